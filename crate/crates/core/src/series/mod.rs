//! Sign vectors, finite windows of a sequence, partial sums and the
//! Rademacher encoding of sign choices.

mod dyadic;
mod family;

pub use dyadic::{ex42_imag_in_a, membership_in_a, Ex42Verdict, Membership, Rational};
pub use family::{term, DyadicTower, Family, ScaleRule, SequenceSpec};

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::Complex2;
use crate::error::SeriesError;

/// A single sign. `Plus` orders before `Minus`, so the derived ordering on
/// sign words is the lexicographic order with `+1 < -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    #[inline]
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Sign of `x`, with zero mapped to `Plus`.
    #[inline]
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn try_from_int(v: i64) -> Result<Sign, SeriesError> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(SeriesError::InvalidSign(other)),
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Mul<Complex2> for Sign {
    type Output = Complex2;
    #[inline]
    fn mul(self, rhs: Complex2) -> Complex2 {
        match self {
            Sign::Plus => rhs,
            Sign::Minus => -rhs,
        }
    }
}

/// A finite word over `{-1, +1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(pub Vec<Sign>);

impl SignVector {
    pub fn all_plus(n: usize) -> Self {
        SignVector(vec![Sign::Plus; n])
    }

    pub fn from_ints(values: &[i64]) -> Result<Self, SeriesError> {
        values
            .iter()
            .map(|&v| Sign::try_from_int(v))
            .collect::<Result<Vec<_>, _>>()
            .map(SignVector)
    }

    pub fn to_ints(&self) -> Vec<i8> {
        self.0.iter().map(|s| s.as_i8()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Sign> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Sign] {
        &self.0
    }

    pub fn negated(&self) -> SignVector {
        SignVector(self.0.iter().map(|s| s.flip()).collect())
    }
}

impl From<Vec<Sign>> for SignVector {
    fn from(v: Vec<Sign>) -> Self {
        SignVector(v)
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", if *s == Sign::Plus { "+1" } else { "-1" })?;
        }
        write!(f, "]")
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_ints().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ints = Vec::<i64>::deserialize(deserializer)?;
        SignVector::from_ints(&ints).map_err(serde::de::Error::custom)
    }
}

/// A finite, nonempty run of consecutive terms `c_origin, c_origin+1, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceWindow {
    terms: Vec<Complex2>,
    origin: usize,
}

impl SequenceWindow {
    pub fn new(terms: Vec<Complex2>) -> Result<Self, SeriesError> {
        Self::with_origin(terms, 1)
    }

    pub fn with_origin(terms: Vec<Complex2>, origin: usize) -> Result<Self, SeriesError> {
        if terms.is_empty() {
            return Err(SeriesError::EmptyWindow);
        }
        if origin == 0 {
            return Err(SeriesError::ZeroIndex);
        }
        if let Some(bad) = terms.iter().find(|c| !c.is_finite()) {
            return Err(SeriesError::NonFinite {
                re: bad.re,
                im: bad.im,
            });
        }
        Ok(SequenceWindow { terms, origin })
    }

    /// Window of `f(1), …, f(n)`.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> Complex2) -> Result<Self, SeriesError> {
        Self::new((1..=n).map(f).collect())
    }

    pub fn from_reals(values: &[f64]) -> Result<Self, SeriesError> {
        Self::new(values.iter().map(|&v| Complex2::real(v)).collect())
    }

    pub fn terms(&self) -> &[Complex2] {
        &self.terms
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Always false: windows are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sup_n ‖c_n‖`.
    pub fn sup_norm(&self) -> f64 {
        self.terms.iter().map(|c| c.max_norm()).fold(0.0, f64::max)
    }

    /// `Σ_n ‖c_n‖`.
    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|c| c.max_norm()).sum()
    }

    /// Terms at the given zero-based positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Result<SequenceWindow, SeriesError> {
        let terms = positions
            .iter()
            .map(|&p| {
                self.terms
                    .get(p)
                    .copied()
                    .ok_or(SeriesError::IndexOutOfRange {
                        index: p + 1,
                        limit: self.terms.len(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        SequenceWindow::new(terms)
    }

    /// First `n` terms.
    pub fn prefix(&self, n: usize) -> Result<SequenceWindow, SeriesError> {
        if n > self.terms.len() {
            return Err(SeriesError::IndexOutOfRange {
                index: n,
                limit: self.terms.len(),
            });
        }
        SequenceWindow::with_origin(self.terms[..n].to_vec(), self.origin)
    }

    /// Signed sum `Σ x_n c_n`.
    pub fn signed_sum(&self, signs: &SignVector) -> Result<Complex2, SeriesError> {
        check_len(self.len(), signs.len())?;
        Ok(self
            .terms
            .iter()
            .zip(signs.iter())
            .map(|(&c, s)| s * c)
            .sum())
    }
}

fn check_len(left: usize, right: usize) -> Result<(), SeriesError> {
    if left == right {
        Ok(())
    } else {
        Err(SeriesError::LengthMismatch { left, right })
    }
}

/// Prefix sums `S_k = Σ_{n ≤ k} x_n c_n` for `k = 1..N`.
pub fn partial_sums(
    window: &SequenceWindow,
    signs: &SignVector,
) -> Result<Vec<Complex2>, SeriesError> {
    check_len(window.len(), signs.len())?;
    let mut acc = Complex2::ZERO;
    Ok(window
        .terms
        .iter()
        .zip(signs.iter())
        .map(|(&c, s)| {
            acc += s * c;
            acc
        })
        .collect())
}

/// `max_k ‖S_k‖`.
pub fn max_prefix_norm(window: &SequenceWindow, signs: &SignVector) -> Result<f64, SeriesError> {
    Ok(partial_sums(window, signs)?
        .into_iter()
        .map(Complex2::max_norm)
        .fold(0.0, f64::max))
}

/// Signs `R(2^{n-1} x)` for `n = 1..len`, where `R = +1` on `[0, 1/2)` and
/// `-1` on `[1/2, 1)` (extended with period 1).
///
/// Doubling a fraction in `[0, 1)` is exact in binary floating point, so
/// entry `n` is exactly the `n`-th binary digit of `x` (0 ↦ +1, 1 ↦ −1).
pub fn rademacher_signs(x: f64, len: usize) -> Result<SignVector, SeriesError> {
    if !(0.0..1.0).contains(&x) {
        return Err(SeriesError::OutOfUnitInterval(x));
    }
    let mut frac = x;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(if frac < 0.5 { Sign::Plus } else { Sign::Minus });
        frac = 2.0 * frac;
        if frac >= 1.0 {
            frac -= 1.0;
        }
    }
    Ok(SignVector(out))
}
