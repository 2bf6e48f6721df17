//! Sequence families and their term formulas.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::SequenceWindow;
use crate::complex::Complex2;
use crate::error::SeriesError;
use crate::ratio::RatioValue;

/// Magnitude rule `w(n)` for the linear-ratio family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleRule {
    /// `1/n`
    Harmonic,
    /// `n^{-p}`
    Power(f64),
    /// `q^{n-1}`
    Geometric(f64),
}

impl ScaleRule {
    fn weight(self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            ScaleRule::Harmonic => 1.0 / x,
            ScaleRule::Power(p) => x.powf(-p),
            ScaleRule::Geometric(q) => q.powi((n - 1) as i32),
        }
    }
}

/// Block schedule `{m_k}`, `{n_k}` of the dyadic tower family.
///
/// Block `k ≥ 1` holds `2^{m_k + n_k}` copies of `2^{-m_k} + i·2^{-m_k-n_k}`,
/// so every block contributes exactly 1 to `Σ b_j` and `2^{n_k}` to `Σ a_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicTower {
    pub m: Vec<u32>,
    pub n: Vec<u32>,
}

/// Largest supported block exponent `m_k + n_k`.
const MAX_BLOCK_EXPONENT: u32 = 40;

impl DyadicTower {
    pub fn new(m: Vec<u32>, n: Vec<u32>) -> Result<Self, SeriesError> {
        let tower = DyadicTower { m, n };
        tower.validate()?;
        Ok(tower)
    }

    pub fn validate(&self) -> Result<(), SeriesError> {
        let bad = |msg: String| Err(SeriesError::InvalidFamily(msg));
        if self.m.len() != self.n.len() {
            return bad(format!(
                "m and n schedules differ in length ({} vs {})",
                self.m.len(),
                self.n.len()
            ));
        }
        if self.m.len() < 2 {
            return bad("tower needs m_0, n_0 and at least one block".into());
        }
        if self.m[0] != 0 || self.n[0] != 0 {
            return bad("tower requires m_0 = n_0 = 0".into());
        }
        for k in 0..self.m.len() - 1 {
            if self.m[k + 1] < self.m[k] {
                return bad(format!("m must be nondecreasing (m_{} < m_{k})", k + 1));
            }
            if self.n[k + 1] < self.n[k] + self.m[k] + 3 {
                return bad(format!("n_{} < n_{k} + m_{k} + 3", k + 1));
            }
        }
        for k in 1..self.m.len() {
            if self.m[k] + self.n[k] > MAX_BLOCK_EXPONENT {
                return bad(format!("block {k} exponent exceeds {MAX_BLOCK_EXPONENT}"));
            }
        }
        Ok(())
    }

    /// Number of blocks `k ≥ 1`.
    pub fn blocks(&self) -> usize {
        self.m.len() - 1
    }

    /// Number of terms in block `k ≥ 1`.
    pub fn block_len(&self, k: usize) -> usize {
        1usize << (self.m[k] + self.n[k])
    }

    /// Number of terms in blocks `1..=k`.
    pub fn prefix_len(&self, k: usize) -> usize {
        (1..=k).map(|l| self.block_len(l)).sum()
    }

    pub fn total_len(&self) -> usize {
        self.prefix_len(self.blocks())
    }

    /// Block containing term `j ≥ 1`.
    pub fn block_of(&self, j: usize) -> Option<usize> {
        let mut end = 0;
        for k in 1..=self.blocks() {
            end += self.block_len(k);
            if j <= end {
                return Some(k);
            }
        }
        None
    }

    pub fn block_value(&self, k: usize) -> Complex2 {
        let m = self.m[k] as i32;
        let n = self.n[k] as i32;
        Complex2::new(2f64.powi(-m), 2f64.powi(-m - n))
    }

    /// Number of complete blocks in a prefix of `len` terms, if aligned.
    pub fn aligned_blocks(&self, len: usize) -> Option<usize> {
        (1..=self.blocks()).find(|&k| self.prefix_len(k) == len)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Explicit(Vec<Complex2>),
    /// `c_n = w(n)·(t + i)` for finite `t`, `c_n = w(n)` for the infinite ratio.
    LinearRatio { ratio: RatioValue, scale: ScaleRule },
    /// `c_n = (-1)^n / (n ln(n+1)) + i/n`.
    HarmonicLogAlt,
    DyadicTower(DyadicTower),
    /// Round-robin merge: term `n` comes from part `(n-1) mod r`.
    Interleave(Vec<SequenceSpec>),
}

/// A generator for `{c_n}` with an optional length limit.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSpec {
    pub family: Family,
    pub limit: Option<usize>,
}

impl SequenceSpec {
    pub fn new(family: Family, limit: Option<usize>) -> Result<Self, SeriesError> {
        let spec = SequenceSpec { family, limit };
        spec.validate()?;
        Ok(spec)
    }

    pub fn explicit(terms: Vec<Complex2>) -> Result<Self, SeriesError> {
        Self::new(Family::Explicit(terms), None)
    }

    pub fn example41(limit: Option<usize>) -> Self {
        SequenceSpec {
            family: Family::HarmonicLogAlt,
            limit,
        }
    }

    pub fn linear_ratio(ratio: RatioValue, scale: ScaleRule, limit: Option<usize>) -> Self {
        SequenceSpec {
            family: Family::LinearRatio { ratio, scale },
            limit,
        }
    }

    pub fn validate(&self) -> Result<(), SeriesError> {
        match &self.family {
            Family::Explicit(terms) => {
                if terms.is_empty() {
                    return Err(SeriesError::EmptyExplicit);
                }
                if let Some(bad) = terms.iter().find(|c| !c.is_finite()) {
                    return Err(SeriesError::NonFinite {
                        re: bad.re,
                        im: bad.im,
                    });
                }
            }
            Family::LinearRatio { ratio, scale } => {
                if let RatioValue::Finite(t) = ratio {
                    if !t.is_finite() {
                        return Err(SeriesError::InvalidFamily("ratio must be finite or 'inf'".into()));
                    }
                }
                match *scale {
                    ScaleRule::Power(p) if !(p.is_finite() && p > 0.0) => {
                        return Err(SeriesError::InvalidFamily("power exponent must be positive".into()))
                    }
                    ScaleRule::Geometric(q) if !(q > 0.0 && q < 1.0) => {
                        return Err(SeriesError::InvalidFamily("geometric ratio must lie in (0, 1)".into()))
                    }
                    _ => {}
                }
            }
            Family::HarmonicLogAlt => {}
            Family::DyadicTower(tower) => tower.validate()?,
            Family::Interleave(parts) => {
                if parts.is_empty() {
                    return Err(SeriesError::InvalidFamily("interleave needs at least one part".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        if self.limit == Some(0) {
            return Err(SeriesError::InvalidFamily("limit must be positive".into()));
        }
        Ok(())
    }

    fn intrinsic_limit(&self) -> Option<usize> {
        match &self.family {
            Family::Explicit(terms) => Some(terms.len()),
            Family::DyadicTower(t) => Some(t.total_len()),
            Family::Interleave(parts) => {
                let r = parts.len();
                // term n exists iff part (n-1) mod r has index (n-1)/r + 1
                let mut best: Option<usize> = None;
                for (i, p) in parts.iter().enumerate() {
                    if let Some(l) = p.effective_limit() {
                        let last = l * r + i; // n - 1 for the first missing term of part i
                        best = Some(best.map_or(last, |b| b.min(last)));
                    }
                }
                best
            }
            _ => None,
        }
    }

    /// Number of terms available, `None` when unbounded.
    pub fn effective_limit(&self) -> Option<usize> {
        match (self.limit, self.intrinsic_limit()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The window `c_1, …, c_n`.
    pub fn window(&self, n: usize) -> Result<SequenceWindow, SeriesError> {
        if n == 0 {
            return Err(SeriesError::EmptyWindow);
        }
        if let Some(limit) = self.effective_limit() {
            if n > limit {
                return Err(SeriesError::IndexOutOfRange { index: n, limit });
            }
        }
        let terms = (1..=n)
            .map(|k| term(self, k))
            .collect::<Result<Vec<_>, _>>()?;
        SequenceWindow::new(terms)
    }

    /// The full window when the sequence is finite.
    pub fn full_window(&self) -> Result<SequenceWindow, SeriesError> {
        match self.effective_limit() {
            Some(n) => self.window(n),
            None => Err(SeriesError::InvalidFamily("sequence is unbounded; give a count".into())),
        }
    }

    /// The dyadic tower schedule, if this is a tower sequence.
    pub fn tower(&self) -> Option<&DyadicTower> {
        match &self.family {
            Family::DyadicTower(t) => Some(t),
            _ => None,
        }
    }
}

/// `c_n` for `n ≥ 1`.
pub fn term(spec: &SequenceSpec, n: usize) -> Result<Complex2, SeriesError> {
    if n == 0 {
        return Err(SeriesError::ZeroIndex);
    }
    if let Some(limit) = spec.effective_limit() {
        if n > limit {
            return Err(SeriesError::IndexOutOfRange { index: n, limit });
        }
    }
    let value = match &spec.family {
        Family::Explicit(terms) => terms[n - 1],
        Family::LinearRatio { ratio, scale } => {
            let w = scale.weight(n);
            match ratio {
                RatioValue::Finite(t) => Complex2::new(t * w, w),
                RatioValue::Infinite => Complex2::new(w, 0.0),
            }
        }
        Family::HarmonicLogAlt => {
            let x = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            Complex2::new(sign / (x * (x + 1.0).ln()), 1.0 / x)
        }
        Family::DyadicTower(tower) => {
            let k = tower.block_of(n).ok_or(SeriesError::IndexOutOfRange {
                index: n,
                limit: tower.total_len(),
            })?;
            tower.block_value(k)
        }
        Family::Interleave(parts) => {
            let r = parts.len();
            term(&parts[(n - 1) % r], (n - 1) / r + 1)?
        }
    };
    Complex2::try_new(value.re, value.im)
}

#[derive(Serialize, Deserialize)]
struct SpecRecord {
    family: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<Complex2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    limit: Option<usize>,
}

impl SequenceSpec {
    fn to_record(&self) -> SpecRecord {
        let (family, params, terms) = match &self.family {
            Family::Explicit(t) => ("explicit", Value::Null, Some(t.clone())),
            Family::LinearRatio { ratio, scale } => (
                "linear-ratio",
                json!({ "ratio": ratio, "scale": scale }),
                None,
            ),
            Family::HarmonicLogAlt => ("example41", json!({}), None),
            Family::DyadicTower(t) => ("example42", json!({ "m": t.m, "n": t.n }), None),
            Family::Interleave(parts) => {
                let parts: Vec<Value> = parts
                    .iter()
                    .map(|p| serde_json::to_value(p).expect("spec serializes"))
                    .collect();
                ("interleave", json!({ "parts": parts }), None)
            }
        };
        SpecRecord {
            family: family.to_string(),
            params,
            terms,
            limit: self.limit,
        }
    }

    fn from_record(rec: SpecRecord) -> Result<Self, String> {
        let params = if rec.params.is_null() { json!({}) } else { rec.params };
        let field = |name: &str| -> Result<Value, String> {
            params
                .get(name)
                .cloned()
                .ok_or_else(|| format!("family {} needs params.{name}", rec.family))
        };
        let family = match rec.family.as_str() {
            "explicit" => Family::Explicit(rec.terms.ok_or("explicit family needs terms")?),
            "linear-ratio" => Family::LinearRatio {
                ratio: serde_json::from_value(field("ratio")?).map_err(|e| e.to_string())?,
                scale: match params.get("scale") {
                    Some(v) => serde_json::from_value(v.clone()).map_err(|e| e.to_string())?,
                    None => ScaleRule::Harmonic,
                },
            },
            "example41" | "harmonic-log-alt" => Family::HarmonicLogAlt,
            "example42" | "dyadic-tower" => Family::DyadicTower(DyadicTower {
                m: serde_json::from_value(field("m")?).map_err(|e| e.to_string())?,
                n: serde_json::from_value(field("n")?).map_err(|e| e.to_string())?,
            }),
            "interleave" => Family::Interleave(
                serde_json::from_value(field("parts")?).map_err(|e| e.to_string())?,
            ),
            other => return Err(format!("unknown family {other:?}")),
        };
        let spec = SequenceSpec {
            family,
            limit: rec.limit,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl Serialize for SequenceSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SequenceSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rec = SpecRecord::deserialize(deserializer)?;
        SequenceSpec::from_record(rec).map_err(serde::de::Error::custom)
    }
}
