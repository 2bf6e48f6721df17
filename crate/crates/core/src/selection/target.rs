//! Greedy target hitting on the real line and ε-approximation of complex
//! targets through one or two ratio classes.

use serde::{Deserialize, Serialize};

use super::{tail_control, SelectionResult};
use crate::complex::{Complex2, Matrix2};
use crate::error::SelectionError;
use crate::ratio::{axis_alignment_matrix, RatioReport, RatioValue};
use crate::series::{max_prefix_norm, Sign, SequenceWindow, SignVector};

/// Relative slack on the envelope check, for rounding in the running sum.
const ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyReport {
    pub result: SelectionResult,
    /// First zero-based position `n*` with `|a - S_{n*}| ≤ |t_{n*}|`.
    pub crossing: Option<usize>,
    /// First position after the crossing where
    /// `|a - S_m| ≤ max_{n* ≤ k ≤ m} |t_k|` failed, if any.
    pub envelope_violation: Option<usize>,
}

/// `x_n = sgn(a - S_{n-1})·sgn(t_n)`, with zero signs read as `+1`.
///
/// After the first crossing `|a - S_{n*}| ≤ |t_{n*}|` the residual never
/// exceeds the largest term seen since, `n*` included; this is checked at
/// every step.
pub fn greedy_target_real(terms: &[f64], a: f64) -> Result<GreedyReport, SelectionError> {
    if terms.is_empty() {
        return Err(SelectionError::Empty);
    }
    let window = SequenceWindow::from_reals(terms)?;
    let mut signs = Vec::with_capacity(terms.len());
    let mut sum = 0.0f64;
    let mut crossing = None;
    let mut envelope = 0.0f64;
    let mut violation = None;
    for (n, &t) in terms.iter().enumerate() {
        let x = Sign::of(a - sum) * Sign::of(t);
        sum += x.value() * t;
        signs.push(x);
        let r = (a - sum).abs();
        if crossing.is_none() && r <= t.abs() {
            crossing = Some(n);
        }
        if crossing.is_some() {
            envelope = envelope.max(t.abs());
            if violation.is_none() && r > envelope * (1.0 + ENVELOPE_SLACK) + ENVELOPE_SLACK * a.abs() {
                violation = Some(n);
            }
        }
    }
    let signs = SignVector(signs);
    let prefix_bound = max_prefix_norm(&window, &signs)?;
    Ok(GreedyReport {
        result: SelectionResult {
            signs,
            prefix_bound,
            residual: Some(Complex2::real(a - sum)),
            sum: Complex2::real(sum),
        },
        crossing,
        envelope_violation: violation,
    })
}

/// Which transformed coordinate a term steers.
#[derive(Clone, Copy, PartialEq)]
enum Role {
    Real,
    Imag,
    Leftover,
}

/// Signs with `‖Σ x_n c_n - c‖ ≤ eps`.
///
/// With two distinct ratios the window is mapped so that the first ratio's
/// direction becomes the real axis and the second's the imaginary axis; the
/// first report's mask steers the real coordinate and the second's the
/// imaginary one (the first report wins on overlap). Indices in neither mask
/// get tail-controlled signs first; then the class terms, in index order,
/// each push their own coordinate of the running sum toward the target.
///
/// With a single ratio `t`, the map `(a, b) ↦ (a - t·b, b)` (a swap for the
/// infinity marker) puts the ratio's mask on the imaginary axis; the mask
/// steers the imaginary coordinate and all other terms the real one.
///
/// The residual is recomputed from the returned signs in the original
/// coordinates.
pub fn approx_target_complex(
    window: &SequenceWindow,
    ratios: &[RatioReport],
    c: Complex2,
    eps: f64,
) -> Result<SelectionResult, SelectionError> {
    if ratios.is_empty() {
        return Err(SelectionError::NoRatio);
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(SelectionError::NonPositiveEpsilon(eps));
    }
    let n = window.len();
    let insufficient = |residual: f64| SelectionError::InsufficientMass {
        residual,
        eps,
        shortfall: residual - eps,
    };
    let reach = window.mass();
    if reach < c.max_norm() - eps {
        return Err(insufficient(c.max_norm() - reach));
    }

    let all_plus = SignVector::all_plus(n);
    let plus_sum = window.signed_sum(&all_plus)?;
    if (plus_sum - c).max_norm() <= eps {
        return finish(window, all_plus, c);
    }

    let second = ratios.iter().skip(1).find(|r| r.ratio != ratios[0].ratio);
    let mut roles = vec![Role::Leftover; n];
    let matrix = match second {
        Some(r2) => {
            mark(&mut roles, r2, Role::Imag);
            mark(&mut roles, &ratios[0], Role::Real);
            axis_alignment_matrix(ratios[0].ratio, r2.ratio).map_err(|_| insufficient(f64::INFINITY))?
        }
        None => {
            roles.iter_mut().for_each(|r| *r = Role::Real);
            mark(&mut roles, &ratios[0], Role::Imag);
            match ratios[0].ratio {
                RatioValue::Finite(t) => Matrix2::new(1.0, -t, 0.0, 1.0),
                RatioValue::Infinite => Matrix2::SWAP,
            }
        }
    };

    let terms: Vec<Complex2> = window.terms().iter().map(|&t| matrix.apply(t)).collect();
    let target = matrix.apply(c);
    let mut signs = vec![Sign::Plus; n];
    let mut sum = Complex2::ZERO;

    let leftover: Vec<usize> = (0..n).filter(|&i| roles[i] == Role::Leftover).collect();
    if !leftover.is_empty() {
        let sub = SequenceWindow::new(leftover.iter().map(|&i| terms[i]).collect())?;
        let tc = tail_control(&sub);
        for (&i, s) in leftover.iter().zip(tc.result.signs.iter()) {
            signs[i] = s;
        }
        sum = tc.result.sum;
    }
    for i in 0..n {
        let t = terms[i];
        let x = match roles[i] {
            Role::Real => Sign::of(target.re - sum.re) * Sign::of(t.re),
            Role::Imag => Sign::of(target.im - sum.im) * Sign::of(t.im),
            Role::Leftover => continue,
        };
        signs[i] = x;
        sum += x * t;
    }
    let result = finish(window, SignVector(signs), c)?;
    let residual = result.residual.expect("target given").max_norm();
    if residual > eps {
        return Err(insufficient(residual));
    }
    Ok(result)
}

fn mark(roles: &mut [Role], report: &RatioReport, role: Role) {
    for &p in &report.mask {
        if let Some(r) = roles.get_mut(p) {
            *r = role;
        }
    }
}

fn finish(window: &SequenceWindow, signs: SignVector, c: Complex2) -> Result<SelectionResult, SelectionError> {
    let sum = window.signed_sum(&signs)?;
    let prefix_bound = max_prefix_norm(window, &signs)?;
    Ok(SelectionResult {
        signs,
        prefix_bound,
        residual: Some(c - sum),
        sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::detect_ratios;
    use crate::series::partial_sums;
    use proptest::prelude::*;

    #[test]
    fn exact_hits() {
        let r = greedy_target_real(&[1.0, 1.0], 0.0).unwrap();
        assert_eq!(r.result.signs, SignVector::from_ints(&[1, -1]).unwrap());
        assert_eq!(r.result.residual, Some(Complex2::ZERO));
        let r = greedy_target_real(&[1.0, 1.0], 2.0).unwrap();
        assert_eq!(r.result.signs, SignVector::all_plus(2));
        assert_eq!(r.result.residual, Some(Complex2::ZERO));
        assert!(greedy_target_real(&[], 1.0).is_err());
    }

    #[test]
    fn harmonic_quarter_pi() {
        let terms: Vec<f64> = (1..=100_000).map(|n| 1.0 / n as f64).collect();
        let r = greedy_target_real(&terms, std::f64::consts::FRAC_PI_4).unwrap();
        assert!(r.result.residual.unwrap().re.abs() <= 1e-4);
        assert_eq!(r.envelope_violation, None);
    }

    #[test]
    fn envelope_includes_crossing_term() {
        // a = 0.5 crosses at the first term with residual 0.5, which exceeds
        // every later term: only the inclusive envelope holds
        let r = greedy_target_real(&[1.0, 0.1], 0.5).unwrap();
        assert_eq!(r.crossing, Some(0));
        assert_eq!(r.envelope_violation, None);
        assert!((r.result.residual.unwrap().re - (0.5 - 0.9)).abs() < 1e-15);
    }

    fn two_ratio_window(pairs: usize) -> SequenceWindow {
        let terms = (1..=pairs)
            .flat_map(|k| {
                let w = 1.0 / k as f64;
                [Complex2::new(w, 2.0 * w), Complex2::new(3.0 * w, w)]
            })
            .collect();
        SequenceWindow::new(terms).unwrap()
    }

    #[test]
    fn two_ratio_target_zero() {
        let w = two_ratio_window(50_000);
        let ratios = detect_ratios(&w, 10, 1.0);
        assert_eq!(ratios.len(), 2);
        let r = approx_target_complex(&w, &ratios, Complex2::ZERO, 1e-2).unwrap();
        let res = r.residual.unwrap();
        assert!(res.max_norm() <= 1e-2);
        let last = *partial_sums(&w, &r.signs).unwrap().last().unwrap();
        assert!((Complex2::ZERO - last).dist(res) <= 1e-9);
    }

    #[test]
    fn all_plus_target() {
        let w = two_ratio_window(100);
        let ratios = detect_ratios(&w, 8, 0.1);
        let target = w.signed_sum(&SignVector::all_plus(w.len())).unwrap();
        let r = approx_target_complex(&w, &ratios, target, 1e-9).unwrap();
        assert_eq!(r.signs, SignVector::all_plus(w.len()));
        assert_eq!(r.residual, Some(Complex2::ZERO));
    }

    #[test]
    fn tiny_window_cannot_reach() {
        let w = SequenceWindow::new(vec![Complex2::new(0.02, 0.0); 5]).unwrap();
        let ratios = detect_ratios(&w, 4, 1e-6);
        let err = approx_target_complex(&w, &ratios, Complex2::new(10.0, 10.0), 0.1).unwrap_err();
        assert!(matches!(err, SelectionError::InsufficientMass { .. }));
        assert_eq!(approx_target_complex(&w, &[], Complex2::ZERO, 0.1), Err(SelectionError::NoRatio));
    }

    #[test]
    fn single_ratio_mode() {
        // one ratio: a_n / b_n = n^{-1/2} -> 0, both parts non-summable
        let w = SequenceWindow::from_fn(200_000, |n| {
            let n = n as f64;
            Complex2::new(1.0 / n, 1.0 / n.sqrt())
        })
        .unwrap();
        let ratios = detect_ratios(&w, 6, 1.0);
        assert!(!ratios.is_empty());
        let r = approx_target_complex(&w, &ratios[..1], Complex2::new(0.7, -1.2), 0.05).unwrap();
        assert!(r.residual.unwrap().max_norm() <= 0.05);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn greedy_envelope_holds(terms in prop::collection::vec(-1.0f64..1.0, 1..300), a in -5.0f64..5.0) {
            let r = greedy_target_real(&terms, a).unwrap();
            prop_assert_eq!(r.envelope_violation, None);
        }

        #[test]
        fn residual_is_reproducible(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let w = two_ratio_window(3000);
            let ratios = detect_ratios(&w, 8, 1.0);
            let c = Complex2::new(re, im);
            let r = approx_target_complex(&w, &ratios, c, 0.05).unwrap();
            let last = *partial_sums(&w, &r.signs).unwrap().last().unwrap();
            prop_assert!((c - last).dist(r.residual.unwrap()) <= 1e-9);
        }
    }
}
