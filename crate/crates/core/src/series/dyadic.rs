//! Exact tests for the set `A = ∪_{n≥1} 2^{-n}(ℤ + [-1/4, 1/4])` and the
//! imaginary parts of signed sums of the dyadic tower.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{DyadicTower, SignVector};
use crate::error::SeriesError;

/// An exact fraction `num/den` with `den > 0` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRational")]
pub struct Rational {
    num: i128,
    den: i128,
}

#[derive(Deserialize)]
struct RawRational {
    num: i64,
    den: i64,
}

impl TryFrom<RawRational> for Rational {
    type Error = SeriesError;
    fn try_from(raw: RawRational) -> Result<Self, Self::Error> {
        Rational::new(raw.num, raw.den)
    }
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self, SeriesError> {
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Result<Self, SeriesError> {
        if den == 0 {
            return Err(SeriesError::ZeroDenominator);
        }
        let g = num.gcd(&den);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Rational {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn integer(n: i64) -> Self {
        Rational {
            num: n as i128,
            den: 1,
        }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Parses `p/q` or an integer `p`.
impl FromStr for Rational {
    type Err = SeriesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SeriesError::InvalidFamily(format!("cannot parse rational {s:?}"));
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p = p.parse::<i64>().map_err(|_| bad())?;
        let q = q.parse::<i64>().map_err(|_| bad())?;
        Rational::new(p, q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub member: bool,
    /// Smallest `n ≥ 1` with `dist(2^n·y, ℤ) ≤ 1/4`.
    pub witness: Option<u32>,
    /// Number of exponents examined.
    pub scanned: u32,
}

/// Decides `y ∈ A` exactly.
///
/// The residues `2^n·p mod q` are eventually periodic, so the scan stops at
/// the first repeated residue, having covered the preperiod and one period.
pub fn membership_in_a(y: Rational) -> Membership {
    let q = y.den;
    let mut r = y.num.rem_euclid(q);
    let mut seen = HashSet::new();
    let mut n = 0u32;
    loop {
        n += 1;
        r = (2 * r) % q;
        if 4 * r.min(q - r) <= q {
            return Membership {
                member: true,
                witness: Some(n),
                scanned: n,
            };
        }
        if !seen.insert(r) {
            return Membership {
                member: false,
                witness: None,
                scanned: n,
            };
        }
    }
}

/// Structure of the imaginary part `Σ_k l_k 2^{-m_k-n_k}` of a signed sum of
/// a block-aligned tower prefix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ex42Verdict {
    /// Both routes agree that the imaginary part lies in `A`.
    pub in_a: bool,
    /// Integer block totals `l_k = Σ_{j ∈ block k} x_j`.
    pub block_totals: Vec<i64>,
    /// Last block with `|l_k|·2^{-m_k} > 1` (at least 1).
    pub k0: usize,
    /// Tail after scaling by `2^{m_{k0}+n_{k0}}`, as a float for reporting.
    pub scaled_tail: f64,
    /// `|scaled tail| ≤ 1/4`, the decomposition bound.
    pub tail_bound_holds: bool,
    /// Result of the exact periodic scan on the imaginary part.
    pub exact: Membership,
}

/// Exponent budget for the exact i128 arithmetic.
const MAX_EXACT_EXPONENT: u32 = 120;

/// Checks that the imaginary part of `Σ x_j c_j` over a block-aligned tower
/// prefix lies in `A`, both through the decomposition into an integer head
/// and a tail of size at most `2^{-(n_{k0+1} - n_{k0} - m_{k0} - 1)}`, and by
/// the exact periodic scan.
pub fn ex42_imag_in_a(tower: &DyadicTower, signs: &SignVector) -> Result<Ex42Verdict, SeriesError> {
    let blocks = tower
        .aligned_blocks(signs.len())
        .ok_or(SeriesError::NotBlockAligned { len: signs.len() })?;
    let exponent = |k: usize| tower.m[k] + tower.n[k];
    let top = exponent(blocks);
    if top > MAX_EXACT_EXPONENT {
        return Err(SeriesError::Overflow(format!("block exponent {top}")));
    }

    let mut totals = Vec::with_capacity(blocks);
    let mut start = 0;
    for k in 1..=blocks {
        let len = tower.block_len(k);
        let l: i64 = signs.0[start..start + len].iter().map(|s| s.as_i8() as i64).sum();
        totals.push(l);
        start += len;
    }

    // k0: last block whose real contribution |l_k| 2^{-m_k} exceeds 1
    let k0 = (1..=blocks)
        .filter(|&k| (totals[k - 1].unsigned_abs() as u128) > (1u128 << tower.m[k]))
        .max()
        .unwrap_or(1);

    // imaginary part scaled by 2^{top}: Σ l_k 2^{top - m_k - n_k}
    let scaled = |range: std::ops::RangeInclusive<usize>| -> i128 {
        range
            .map(|k| totals[k - 1] as i128 * (1i128 << (top - exponent(k))))
            .sum()
    };
    let tail_num = if k0 < blocks { scaled(k0 + 1..=blocks) } else { 0 };
    // tail after scaling by 2^{e0} is tail_num / 2^{top - e0}
    let e0 = exponent(k0);
    let tail_den = 1i128 << (top - e0);
    let tail_bound_holds = 4 * tail_num.abs() <= tail_den;
    let head_is_integer = scaled(1..=k0) % tail_den == 0;

    let total_num = scaled(1..=blocks);
    let exact = membership_in_a(Rational::from_i128(total_num, 1i128 << top)?);

    Ok(Ex42Verdict {
        in_a: tail_bound_holds && head_is_integer && exact.member,
        block_totals: totals,
        k0,
        scaled_tail: tail_num as f64 / tail_den as f64,
        tail_bound_holds,
        exact,
    })
}
