//! Sign selection: the pairing test, the five-term combination step, the
//! buffered reduction that keeps every prefix sum within `5·sup‖c_n‖`,
//! blockwise tail control, and greedy target hitting.

mod reducer;
mod target;

pub use reducer::{bounded_signs, tail_control, BlockReport, TailReport};
pub use target::{approx_target_complex, greedy_target_real, GreedyReport};

use serde::{Deserialize, Serialize};

use crate::complex::Complex2;
use crate::error::SelectionError;
use crate::series::{Sign, SignVector};

/// Slack on the unit-norm preconditions, absorbing rounding in rescaled input.
pub const NORM_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub signs: SignVector,
    /// `max_k ‖S_k‖` for the returned signs.
    #[serde(rename = "prefixBound")]
    pub prefix_bound: f64,
    /// Target minus achieved sum, when a target was given.
    pub residual: Option<Complex2>,
    /// The achieved sum `Σ x_n c_n`.
    pub sum: Complex2,
}

fn check_unit(index: usize, c: Complex2) -> Result<(), SelectionError> {
    let norm = c.max_norm();
    if norm > 1.0 + NORM_SLACK || !norm.is_finite() {
        Err(SelectionError::NormTooLarge { index, norm })
    } else {
        Ok(())
    }
}

/// A sign `s` with `‖c1 + s·c2‖ ≤ 1`, `+1` when both signs work.
///
/// `None` exactly when `|a1|+|a2| > 1`, `|b1|+|b2| > 1` and `a1·a2·b1·b2 < 0`.
pub fn pairable(c1: Complex2, c2: Complex2) -> Result<Option<Sign>, SelectionError> {
    check_unit(1, c1)?;
    check_unit(2, c2)?;
    Ok(pair_sign(c1, c2))
}

#[inline]
fn pair_sign(c1: Complex2, c2: Complex2) -> Option<Sign> {
    if (c1 + c2).max_norm() <= 1.0 {
        Some(Sign::Plus)
    } else if (c1 - c2).max_norm() <= 1.0 {
        Some(Sign::Minus)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineBranch {
    /// `|Re u| ≤ 1`: the signs realize `u + c5`.
    U,
    /// Otherwise: the signs realize `c1 + v`.
    V,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Combine5 {
    pub signs: SignVector,
    pub branch: CombineBranch,
    /// `s1c1 - s2c2 - s3c3 + s4c4` with `s_n = sgn(a_n)`.
    pub u: Complex2,
    /// `s2c2 - s3c3 - s4c4 + s5c5`.
    pub v: Complex2,
    pub sum: Complex2,
}

/// The five-term combination step.
///
/// With `s_n = sgn(a_n)` (zero counted as positive), every `s_n c_n` has
/// nonnegative real part and non-pairability makes the imaginary parts
/// alternate in sign, so `|Im u|, |Im v| < 1`. If `|Re u| ≤ 1` the signs
/// `(s1, -s2, -s3, s4, +1)` give `u + c5`; otherwise `(+1, s2, -s3, -s4, s5)`
/// give `c1 + v`. Either way the sum has norm at most 2.
pub fn combine5(c: &[Complex2; 5]) -> Result<Combine5, SelectionError> {
    for (i, &ci) in c.iter().enumerate() {
        check_unit(i + 1, ci)?;
    }
    for i in 0..4 {
        if let Some(s) = pair_sign(c[i], c[i + 1]) {
            return Err(SelectionError::PairablePair {
                first: i + 1,
                second: i + 2,
                sign: if s == Sign::Plus { '+' } else { '-' },
            });
        }
    }
    Ok(combine5_unchecked(c))
}

pub(crate) fn combine5_unchecked(c: &[Complex2; 5]) -> Combine5 {
    let s: Vec<Sign> = c.iter().map(|ci| Sign::of(ci.re)).collect();
    let u = s[0] * c[0] - s[1] * c[1] - s[2] * c[2] + s[3] * c[3];
    let v = s[1] * c[1] - s[2] * c[2] - s[3] * c[3] + s[4] * c[4];
    let (branch, signs, sum) = if u.re.abs() <= 1.0 {
        (
            CombineBranch::U,
            vec![s[0], s[1].flip(), s[2].flip(), s[3], Sign::Plus],
            u + c[4],
        )
    } else {
        (
            CombineBranch::V,
            vec![Sign::Plus, s[1], s[2].flip(), s[3].flip(), s[4]],
            c[0] + v,
        )
    };
    Combine5 {
        signs: SignVector(signs),
        branch,
        u,
        v,
        sum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alternating(re: f64) -> [Complex2; 5] {
        [0.9, -0.9, 0.9, -0.9, 0.9].map(|im| Complex2::new(re, im))
    }

    #[test]
    fn pairable_examples() {
        assert_eq!(pairable(Complex2::new(1.0, 0.9), Complex2::new(1.0, -0.9)).unwrap(), None);
        let c = Complex2::new(0.8, 0.3);
        assert_eq!(pairable(c, c).unwrap(), Some(Sign::Minus));
        assert_eq!(
            pairable(Complex2::new(0.3, 0.2), Complex2::new(0.4, -0.1)).unwrap(),
            Some(Sign::Plus)
        );
        assert!(matches!(
            pairable(Complex2::new(1.5, 0.0), Complex2::ZERO),
            Err(SelectionError::NormTooLarge { index: 1, .. })
        ));
    }

    #[test]
    fn small_equal_terms_prefer_plus() {
        // both signs work; the documented preference is +1
        let c = Complex2::new(0.3, -0.1);
        assert_eq!(pairable(c, c).unwrap(), Some(Sign::Plus));
    }

    #[test]
    fn combine5_examples() {
        let out = combine5(&alternating(1.0)).unwrap();
        assert_eq!(out.signs, SignVector::from_ints(&[1, -1, -1, 1, 1]).unwrap());
        assert_eq!(out.u, Complex2::ZERO);
        assert_eq!(out.sum, Complex2::new(1.0, 0.9));
        assert_eq!(out.branch, CombineBranch::U);

        let out = combine5(&alternating(0.6)).unwrap();
        assert_eq!(out.signs, SignVector::from_ints(&[1, -1, -1, 1, 1]).unwrap());
        assert_eq!(out.u, Complex2::ZERO);
        assert!((out.sum.max_norm() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn combine5_reports_pairable_pair() {
        let mut c = alternating(1.0);
        c[3] = Complex2::new(0.1, 0.1);
        assert!(matches!(
            combine5(&c),
            Err(SelectionError::PairablePair { first: 3, second: 4, .. })
        ));
    }

    fn unit() -> impl Strategy<Value = Complex2> {
        (-1.0f64..=1.0, -1.0f64..=1.0).prop_map(|(a, b)| Complex2::new(a, b))
    }

    proptest! {
        #[test]
        fn pairing_fact(c1 in unit(), c2 in unit()) {
            let both_fail = (c1 + c2).max_norm() > 1.0 && (c1 - c2).max_norm() > 1.0;
            let fact = c1.re.abs() + c2.re.abs() > 1.0
                && c1.im.abs() + c2.im.abs() > 1.0
                && c1.re * c2.re * c1.im * c2.im < 0.0;
            prop_assert_eq!(both_fail, fact);
            prop_assert_eq!(pairable(c1, c2).unwrap().is_none(), fact);
        }

        #[test]
        fn combine5_bound_on_admissible_input(
            mags in prop::array::uniform5((0.5000001f64..=1.0, 0.5000001f64..=1.0)),
            re_signs in prop::array::uniform5(any::<bool>()),
            phase in any::<bool>(),
        ) {
            // |a| + |a'| > 1 and |b| + |b'| > 1 hold by magnitude; alternating
            // sgn(a·b) makes every adjacent product a·a'·b·b' negative
            let c: [Complex2; 5] = std::array::from_fn(|n| {
                let sa = if re_signs[n] { 1.0 } else { -1.0 };
                let p = if (n % 2 == 0) == phase { 1.0 } else { -1.0 };
                Complex2::new(sa * mags[n].0, p * sa * mags[n].1)
            });
            let out = combine5(&c).unwrap();
            prop_assert!(out.sum.max_norm() <= 2.0 + 1e-12);
            if out.u.re.abs() > 1.0 {
                prop_assert!(out.v.re.abs() <= 1.0);
            }
            let direct: Complex2 = c.iter().zip(out.signs.iter()).map(|(&ci, s)| s * ci).sum();
            prop_assert!(direct.dist(out.sum) < 1e-12);
        }
    }
}
