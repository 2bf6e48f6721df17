//! Complex numbers as real pairs, measured in the max-norm, and real 2x2 maps.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SeriesError;

/// A complex number `re + i·im` with finite components.
///
/// The norm used throughout the crate is the max-norm `max(|re|, |im|)`,
/// see [`Complex2::max_norm`]. It is within a factor `√2` of the modulus.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Complex2 {
    pub re: f64,
    pub im: f64,
}

impl Complex2 {
    pub const ZERO: Complex2 = Complex2 { re: 0.0, im: 0.0 };
    pub const ONE: Complex2 = Complex2 { re: 1.0, im: 0.0 };
    pub const I: Complex2 = Complex2 { re: 0.0, im: 1.0 };

    #[inline]
    pub const fn new(re: f64, im: f64) -> Self {
        Complex2 { re, im }
    }

    /// Validating constructor: rejects NaN and infinite components.
    pub fn try_new(re: f64, im: f64) -> Result<Self, SeriesError> {
        if re.is_finite() && im.is_finite() {
            Ok(Complex2 { re, im })
        } else {
            Err(SeriesError::NonFinite { re, im })
        }
    }

    #[inline]
    pub fn real(re: f64) -> Self {
        Complex2 { re, im: 0.0 }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// `max(|re|, |im|)`.
    #[inline]
    pub fn max_norm(self) -> f64 {
        self.re.abs().max(self.im.abs())
    }

    /// Euclidean modulus.
    #[inline]
    pub fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Complex2 {
            re: self.re * s,
            im: self.im * s,
        }
    }

    /// Max-norm distance.
    #[inline]
    pub fn dist(self, other: Complex2) -> f64 {
        (self - other).max_norm()
    }

    /// Total order on (re, im), used to canonicalize point sets.
    pub fn total_cmp(&self, other: &Complex2) -> std::cmp::Ordering {
        self.re
            .total_cmp(&other.re)
            .then_with(|| self.im.total_cmp(&other.im))
    }
}

/// `max(|re|, |im|)` as a free function.
#[inline]
pub fn max_norm(c: Complex2) -> f64 {
    c.max_norm()
}

impl Add for Complex2 {
    type Output = Complex2;
    #[inline]
    fn add(self, rhs: Complex2) -> Complex2 {
        Complex2::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Complex2 {
    type Output = Complex2;
    #[inline]
    fn sub(self, rhs: Complex2) -> Complex2 {
        Complex2::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for Complex2 {
    type Output = Complex2;
    #[inline]
    fn neg(self) -> Complex2 {
        Complex2::new(-self.re, -self.im)
    }
}

impl Mul<f64> for Complex2 {
    type Output = Complex2;
    #[inline]
    fn mul(self, rhs: f64) -> Complex2 {
        self.scale(rhs)
    }
}

impl AddAssign for Complex2 {
    #[inline]
    fn add_assign(&mut self, rhs: Complex2) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl SubAssign for Complex2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Complex2) {
        self.re -= rhs.re;
        self.im -= rhs.im;
    }
}

impl Sum for Complex2 {
    fn sum<I: Iterator<Item = Complex2>>(iter: I) -> Complex2 {
        iter.fold(Complex2::ZERO, |acc, c| acc + c)
    }
}

impl fmt::Display for Complex2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_sign_negative() {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`, `-i` with decimal components.
impl FromStr for Complex2 {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SeriesError::ParseComplex(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let parse_imag = |body: &str| -> Result<f64, SeriesError> {
            match body {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => body.parse::<f64>().map_err(|_| bad()),
            }
        };
        let value = if let Some(body) = t.strip_suffix('i') {
            // split at the last sign that is not part of an exponent
            let bytes = body.as_bytes();
            let mut split = None;
            for idx in (1..bytes.len()).rev() {
                let ch = bytes[idx];
                if (ch == b'+' || ch == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                    split = Some(idx);
                    break;
                }
            }
            match split {
                Some(idx) => {
                    let re = body[..idx].parse::<f64>().map_err(|_| bad())?;
                    let im = parse_imag(&body[idx..])?;
                    Complex2::new(re, im)
                }
                None => Complex2::new(0.0, parse_imag(body)?),
            }
        } else {
            Complex2::real(t.parse::<f64>().map_err(|_| bad())?)
        };
        Complex2::try_new(value.re, value.im).map_err(|_| bad())
    }
}

/// Serialized as the pair `[re, im]`.
impl Serialize for Complex2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.re, self.im].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Complex2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(deserializer)?;
        Complex2::try_new(re, im).map_err(serde::de::Error::custom)
    }
}

/// A real 2x2 matrix acting on `(re, im)` column vectors:
/// `(a, b) ↦ (m[0][0]·a + m[0][1]·b, m[1][0]·a + m[1][1]·b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2([[1.0, 0.0], [0.0, 1.0]]);
    /// Exchanges real and imaginary parts.
    pub const SWAP: Matrix2 = Matrix2([[0.0, 1.0], [1.0, 0.0]]);

    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Matrix2([[m00, m01], [m10, m11]])
    }

    /// Matrix whose columns are `c0` and `c1`.
    pub fn from_columns(c0: (f64, f64), c1: (f64, f64)) -> Self {
        Matrix2([[c0.0, c1.0], [c0.1, c1.1]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, c: Complex2) -> Complex2 {
        let m = &self.0;
        Complex2::new(m[0][0] * c.re + m[0][1] * c.im, m[1][0] * c.re + m[1][1] * c.im)
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Matrix2) -> Matrix2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[0.0; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Matrix2(out)
    }

    /// Inverse, or `None` when `|det| ≤ 1e-9`.
    pub fn inverse(&self) -> Option<Matrix2> {
        let det = self.det();
        if det.abs() <= SINGULAR_DET {
            return None;
        }
        let m = &self.0;
        Some(Matrix2([
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ]))
    }

    pub fn is_singular(&self) -> bool {
        self.det().abs() <= SINGULAR_DET
    }
}

/// Determinants at or below this magnitude are treated as singular.
pub const SINGULAR_DET: f64 = 1e-9;

/// A closed axis-aligned rectangle `[lo.re, hi.re] × [lo.im, hi.im]`; either
/// side may be degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Complex2,
    pub hi: Complex2,
}

impl Rect {
    pub fn new(lo: Complex2, hi: Complex2) -> Result<Self, String> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err("non-finite corner".into());
        }
        if lo.re > hi.re || lo.im > hi.im {
            return Err(format!("corners out of order: {lo} vs {hi}"));
        }
        Ok(Rect { lo, hi })
    }

    /// `c + [-h, h]²`.
    pub fn square(center: Complex2, half: f64) -> Result<Self, String> {
        let d = Complex2::new(half, half);
        Rect::new(center - d, center + d)
    }

    pub fn width(&self) -> f64 {
        self.hi.re - self.lo.re
    }

    pub fn height(&self) -> f64 {
        self.hi.im - self.lo.im
    }

    pub fn center(&self) -> Complex2 {
        (self.lo + self.hi).scale(0.5)
    }

    pub fn contains(&self, p: Complex2) -> bool {
        self.lo.re <= p.re && p.re <= self.hi.re && self.lo.im <= p.im && p.im <= self.hi.im
    }

    /// Corners in the order `(lo.re, lo.im)`, `(hi.re, lo.im)`, `(lo.re, hi.im)`,
    /// `(hi.re, hi.im)`.
    pub fn corners(&self) -> [Complex2; 4] {
        [
            self.lo,
            Complex2::new(self.hi.re, self.lo.im),
            Complex2::new(self.lo.re, self.hi.im),
            self.hi,
        ]
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]x[{}, {}]",
            self.lo.re, self.hi.re, self.lo.im, self.hi.im
        )
    }
}
