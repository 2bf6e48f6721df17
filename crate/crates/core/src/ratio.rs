//! Ratios `t = lim a_{n_k}/b_{n_k}` along heavy subsequences, directional
//! mass profiles, linear reparametrization and regrouping into blocks.
//!
//! Every conclusion here is a diagnostic at the window horizon `N`: a finite
//! window cannot certify that a subsequence is not absolutely summable.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::{Complex2, Matrix2};
use crate::error::{RatioError, SeriesError};
use crate::series::{SequenceWindow, SignVector};

/// A real ratio or the infinity marker, which orders above every real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatioValue {
    Finite(f64),
    Infinite,
}

impl RatioValue {
    pub fn is_infinite(self) -> bool {
        matches!(self, RatioValue::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            RatioValue::Finite(t) => Some(t),
            RatioValue::Infinite => None,
        }
    }

    /// Direction `(t, 1)` of a term with `a/b = t`, or `(1, 0)` for infinity.
    pub fn direction(self) -> (f64, f64) {
        match self {
            RatioValue::Finite(t) => (t, 1.0),
            RatioValue::Infinite => (1.0, 0.0),
        }
    }

    /// Angle of [`RatioValue::direction`] in `[0, π)`.
    pub fn angle(self) -> f64 {
        match self {
            RatioValue::Finite(t) => (PI / 2.0 - t.atan()).rem_euclid(PI),
            RatioValue::Infinite => 0.0,
        }
    }
}

impl PartialOrd for RatioValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (RatioValue::Finite(a), RatioValue::Finite(b)) => a.partial_cmp(b),
            (RatioValue::Finite(_), RatioValue::Infinite) => Some(Ordering::Less),
            (RatioValue::Infinite, RatioValue::Finite(_)) => Some(Ordering::Greater),
            (RatioValue::Infinite, RatioValue::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for RatioValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioValue::Finite(t) => write!(f, "{t}"),
            RatioValue::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for RatioValue {
    type Err = SeriesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(RatioValue::Infinite),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .map(RatioValue::Finite)
                .ok_or_else(|| SeriesError::InvalidFamily(format!("bad ratio {s:?}"))),
        }
    }
}

/// Serialized as a number, or the string `"inf"`.
impl Serialize for RatioValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            RatioValue::Finite(t) => serializer.serialize_f64(*t),
            RatioValue::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for RatioValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(t) if t.is_finite() => Ok(RatioValue::Finite(t)),
            Raw::Num(t) => Err(serde::de::Error::custom(format!("non-finite ratio {t}"))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which coordinate carries the refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `|a/b| ≤ 1`; the interval bounds `a/b`.
    BDominant,
    /// `|a/b| ≥ 1`; the interval bounds `b/a`.
    ADominant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub ratio: RatioValue,
    /// Zero-based window positions of the retained subsequence.
    pub mask: Vec<usize>,
    /// `Σ ‖c_n‖` over the mask.
    pub mass: f64,
    pub depth: u32,
    pub branch: Branch,
    /// Final dyadic interval in the branch coordinate.
    pub interval: (f64, f64),
    /// Retained mass after each refinement level, starting with the branch.
    pub level_masses: Vec<f64>,
    /// Window length the report is a diagnostic at.
    pub horizon: usize,
}

impl RatioReport {
    /// Whether the final interval contains ratio `t` (read in the branch
    /// coordinate).
    pub fn interval_contains(&self, t: RatioValue) -> bool {
        let (lo, hi) = self.interval;
        let x = match (self.branch, t) {
            (Branch::BDominant, RatioValue::Finite(t)) => t,
            (Branch::BDominant, RatioValue::Infinite) => return false,
            (Branch::ADominant, RatioValue::Finite(t)) if t == 0.0 => return false,
            (Branch::ADominant, RatioValue::Finite(t)) => 1.0 / t,
            (Branch::ADominant, RatioValue::Infinite) => 0.0,
        };
        lo <= x && x <= hi
    }

    /// Angular arc in `[0, π)` swept by the final interval, as `(start, end)`
    /// going counter-clockwise. `start > end` means the arc wraps past `π`.
    pub fn arc(&self) -> (f64, f64) {
        let (lo, hi) = self.interval;
        match self.branch {
            // direction (t, 1): angle π/2 − atan t, decreasing in t
            Branch::BDominant => (
                (PI / 2.0 - hi.atan()).rem_euclid(PI),
                (PI / 2.0 - lo.atan()).rem_euclid(PI),
            ),
            // direction (1, s): angle atan s, increasing in s
            Branch::ADominant => (lo.atan().rem_euclid(PI), hi.atan().rem_euclid(PI)),
        }
    }
}

fn arc_contains(arc: (f64, f64), x: f64) -> bool {
    let (s, e) = arc;
    if s <= e {
        s <= x && x <= e
    } else {
        x >= s || x <= e
    }
}

fn arcs_overlap(p: (f64, f64), q: (f64, f64)) -> bool {
    arc_contains(p, q.0) || arc_contains(p, q.1) || arc_contains(q, p.0) || arc_contains(q, p.1)
}

/// Extracts one ratio by nested dyadic refinement.
///
/// Terms split into `|a/b| ≤ 1` (mass `Σ|b|`) and `|a/b| ≥ 1` (mass `Σ|a|`);
/// the heavier side wins, ties going to the first. The branch coordinate
/// (`a/b` or `b/a`, in `[-1, 1]`) is refined through closed dyadic intervals
/// of width `2^{-k}`, `k = 0..depth`, keeping the child with larger `Σ‖c_n‖`
/// (the lower child on ties). The estimate is the `‖c_n‖`-weighted mean of
/// the branch coordinate over the final mask, inverted on the `b/a` branch;
/// a `b/a` interval touching 0 reports the infinity marker.
pub fn dyadic_ratio_extract(window: &SequenceWindow, depth: u32) -> RatioReport {
    let terms = window.terms();
    let (mut mass_b, mut mass_a) = (0.0, 0.0);
    for c in terms {
        if c.re.abs() <= c.im.abs() && c.im != 0.0 {
            mass_b += c.im.abs();
        }
        if c.re.abs() >= c.im.abs() && c.re != 0.0 {
            mass_a += c.re.abs();
        }
    }
    let branch = if mass_b >= mass_a {
        Branch::BDominant
    } else {
        Branch::ADominant
    };

    // (position, branch coordinate, weight)
    let mut pool: Vec<(usize, f64, f64)> = terms
        .iter()
        .enumerate()
        .filter_map(|(pos, c)| {
            let x = match branch {
                Branch::BDominant if c.im != 0.0 && c.re.abs() <= c.im.abs() => c.re / c.im,
                Branch::ADominant if c.re != 0.0 && c.re.abs() >= c.im.abs() => c.im / c.re,
                _ => return None,
            };
            Some((pos, x, c.max_norm()))
        })
        .collect();

    let weight = |pool: &[(usize, f64, f64)]| pool.iter().map(|p| p.2).sum::<f64>();
    let mut level_masses = vec![weight(&pool)];
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..=depth {
        let mid = 0.5 * (lo + hi);
        let lower: Vec<_> = pool.iter().copied().filter(|p| p.1 <= mid).collect();
        let upper: Vec<_> = pool.iter().copied().filter(|p| p.1 >= mid).collect();
        if weight(&upper) > weight(&lower) {
            lo = mid;
            pool = upper;
        } else {
            hi = mid;
            pool = lower;
        }
        level_masses.push(weight(&pool));
    }

    let mass = weight(&pool);
    let mean = if mass > 0.0 {
        pool.iter().map(|p| p.1 * p.2).sum::<f64>() / mass
    } else {
        0.5 * (lo + hi)
    };
    let ratio = match branch {
        Branch::BDominant => RatioValue::Finite(mean),
        Branch::ADominant if (lo <= 0.0 && 0.0 <= hi) || mean == 0.0 => RatioValue::Infinite,
        Branch::ADominant => RatioValue::Finite(1.0 / mean),
    };
    RatioReport {
        ratio,
        mask: pool.iter().map(|p| p.0).collect(),
        mass,
        depth,
        branch,
        interval: (lo, hi),
        level_masses,
        horizon: window.len(),
    }
}

/// Repeatedly extracts a ratio and removes its mask while the remaining mass
/// is at least `threshold`. Reports whose arcs overlap are merged into the
/// heavier one; the result is sorted by mass, heaviest first.
pub fn detect_ratios(window: &SequenceWindow, depth: u32, threshold: f64) -> Vec<RatioReport> {
    let all = window.terms();
    let mut remaining: Vec<usize> = (0..all.len()).collect();
    let mut reports: Vec<RatioReport> = Vec::new();
    loop {
        let rest_mass: f64 = remaining.iter().map(|&p| all[p].max_norm()).sum();
        if remaining.is_empty() || !(rest_mass >= threshold) || rest_mass == 0.0 {
            break;
        }
        let sub = SequenceWindow::new(remaining.iter().map(|&p| all[p]).collect())
            .expect("nonempty finite terms");
        let mut rep = dyadic_ratio_extract(&sub, depth);
        if rep.mask.is_empty() {
            break;
        }
        rep.mask = rep.mask.iter().map(|&q| remaining[q]).collect();
        rep.horizon = window.len();
        let taken: std::collections::HashSet<usize> = rep.mask.iter().copied().collect();
        remaining.retain(|p| !taken.contains(p));
        reports.push(rep);
    }

    let mut merged: Vec<RatioReport> = Vec::new();
    for rep in reports {
        match merged.iter_mut().find(|m| arcs_overlap(m.arc(), rep.arc())) {
            Some(m) => {
                m.mask.extend_from_slice(&rep.mask);
                m.mask.sort_unstable();
                m.mass += rep.mass;
            }
            None => merged.push(rep),
        }
    }
    merged.sort_by(|x, y| y.mass.total_cmp(&x.mass));
    merged
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionProfile {
    /// `(θ, Σ_n |cos θ·a_n + sin θ·b_n|)`.
    pub samples: Vec<(f64, f64)>,
    pub min_angle: f64,
    pub min_mass: f64,
    pub horizon: usize,
}

/// `(cos θ, sin θ)` for `θ = jπ/m`, exact at multiples of `π/4`.
fn unit_direction(j: usize, m: usize) -> (f64, f64) {
    if (4 * j) % m == 0 {
        return match (4 * j) / m {
            0 => (1.0, 0.0),
            1 => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            2 => (0.0, 1.0),
            _ => (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        };
    }
    let theta = j as f64 * PI / m as f64;
    (theta.cos(), theta.sin())
}

/// Directional masses at `θ_j = jπ/M`, `j = 0..M-1`, and the minimizing
/// direction (first on ties).
pub fn nonsummability_profile(window: &SequenceWindow, m: usize) -> Result<DirectionProfile, RatioError> {
    if m < 4 {
        return Err(RatioError::TooFewDirections(m));
    }
    let terms = window.terms();
    let samples: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let (cs, sn) = unit_direction(j, m);
            let mass = terms.iter().map(|c| (cs * c.re + sn * c.im).abs()).sum();
            (j as f64 * PI / m as f64, mass)
        })
        .collect();
    let (min_angle, min_mass) = samples
        .iter()
        .copied()
        .fold((0.0, f64::INFINITY), |best, s| if s.1 < best.1 { s } else { best });
    Ok(DirectionProfile {
        samples,
        min_angle,
        min_mass,
        horizon: window.len(),
    })
}

/// Term-wise `(a, b) ↦ M·(a, b)`.
pub fn apply_linear_map(window: &SequenceWindow, matrix: &Matrix2) -> Result<SequenceWindow, RatioError> {
    if matrix.is_singular() {
        return Err(RatioError::SingularMatrix { det: matrix.det() });
    }
    let terms = window.terms().iter().map(|&c| matrix.apply(c)).collect();
    Ok(SequenceWindow::with_origin(terms, window.origin())?)
}

/// The matrix sending the direction of ratio `first` to the real axis and
/// that of `second` to the imaginary axis, so the images have ratios `∞`
/// and `0` respectively.
pub fn axis_alignment_matrix(first: RatioValue, second: RatioValue) -> Result<Matrix2, RatioError> {
    if first == second {
        return Err(RatioError::IdenticalRatios);
    }
    let basis = Matrix2::from_columns(first.direction(), second.direction());
    basis
        .inverse()
        .ok_or(RatioError::SingularMatrix { det: basis.det() })
}

/// The window of block sums `Σ_{n ∈ Λ_k} x_n c_n` over consecutive blocks
/// of the given lengths, which must partition the window.
pub fn regroup(
    window: &SequenceWindow,
    block_lengths: &[usize],
    signs: &SignVector,
) -> Result<SequenceWindow, RatioError> {
    if signs.len() != window.len() {
        return Err(SeriesError::LengthMismatch {
            left: window.len(),
            right: signs.len(),
        }
        .into());
    }
    if let Some(k) = block_lengths.iter().position(|&l| l == 0) {
        return Err(RatioError::NotAPartition(format!("block {} is empty", k + 1)));
    }
    let covered: usize = block_lengths.iter().sum();
    if covered != window.len() {
        return Err(RatioError::NotAPartition(format!(
            "blocks cover {covered} of {} indices",
            window.len()
        )));
    }
    let mut out = Vec::with_capacity(block_lengths.len());
    let mut start = 0;
    for &len in block_lengths {
        let sum: Complex2 = window.terms()[start..start + len]
            .iter()
            .zip(&signs.as_slice()[start..start + len])
            .map(|(&c, &s)| s * c)
            .sum();
        out.push(sum);
        start += len;
    }
    Ok(SequenceWindow::new(out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Sign, SequenceSpec};
    use proptest::prelude::*;

    fn harmonic(c: Complex2, n: usize) -> SequenceWindow {
        SequenceWindow::from_fn(n, |k| c.scale(1.0 / k as f64)).unwrap()
    }

    fn interleave(c1: Complex2, c2: Complex2, pairs: usize) -> SequenceWindow {
        let terms = (1..=pairs)
            .flat_map(|k| [c1.scale(1.0 / k as f64), c2.scale(1.0 / k as f64)])
            .collect();
        SequenceWindow::new(terms).unwrap()
    }

    #[test]
    fn ratio_value_order_and_serde() {
        assert!(RatioValue::Finite(1e300) < RatioValue::Infinite);
        assert!(RatioValue::Finite(-1.0) < RatioValue::Finite(2.0));
        assert_eq!(serde_json::to_string(&RatioValue::Infinite).unwrap(), "\"inf\"");
        let t: RatioValue = serde_json::from_str("2.5").unwrap();
        assert_eq!(t, RatioValue::Finite(2.5));
        assert_eq!("inf".parse::<RatioValue>().unwrap(), RatioValue::Infinite);
    }

    #[test]
    fn constant_ratio_half() {
        let w = harmonic(Complex2::new(1.0, 2.0), 1000);
        let r = dyadic_ratio_extract(&w, 10);
        let t = r.ratio.finite().unwrap();
        assert!((t - 0.5).abs() <= 2f64.powi(-10));
        assert_eq!(r.mask.len(), 1000);
        assert_eq!(r.branch, Branch::BDominant);
        assert!((r.mass - w.mass()).abs() < 1e-12);
    }

    #[test]
    fn interleaved_one_and_two() {
        let w = interleave(Complex2::new(1.0, 1.0), Complex2::new(2.0, 1.0), 5000);
        let r = dyadic_ratio_extract(&w, 8);
        let t = r.ratio.finite().unwrap();
        assert!((t - 1.0).abs() <= 2f64.powi(-8) || (t - 2.0).abs() <= 2f64.powi(-8), "{t}");
    }

    #[test]
    fn example41_ratio_decreases_with_horizon() {
        // the limit ratio is 0; at finite N the mass sits near 1/ln N
        let mut seen = Vec::new();
        for n in [1000, 10_000, 100_000, 1_000_000] {
            let w = SequenceSpec::example41(None).window(n).unwrap();
            let t = dyadic_ratio_extract(&w, 12).ratio.finite().unwrap().abs();
            assert!(seen.last().is_none_or(|&last| t <= last), "N={n}: {t} after {seen:?}");
            assert!(t <= 1.5 / (n as f64).ln());
            seen.push(t);
        }
        assert!(seen[3] < 0.6 * seen[0], "{seen:?}");
    }

    #[test]
    #[ignore = "unattainable at N = 1e4: every term has |a/b| = 1/ln(n+1) ≥ 0.108"]
    fn example41_ratio_near_zero_at_ten_thousand() {
        let w = SequenceSpec::example41(None).window(10_000).unwrap();
        let t = dyadic_ratio_extract(&w, 12).ratio.finite().unwrap();
        assert!(t.abs() <= 2f64.powi(-12), "{t}");
    }

    #[test]
    fn detects_two_ratios() {
        let w = interleave(Complex2::new(1.0, 1.0), Complex2::new(3.0, 1.0), 5000);
        let reports = detect_ratios(&w, 10, 1.0);
        assert_eq!(reports.len(), 2);
        let mut ts: Vec<f64> = reports.iter().map(|r| r.ratio.finite().unwrap()).collect();
        ts.sort_by(f64::total_cmp);
        assert!((ts[0] - 1.0).abs() < 1e-9 && (ts[1] - 3.0).abs() < 1e-9, "{ts:?}");
        assert!(reports[0].mass >= reports[1].mass);
    }

    #[test]
    fn detects_one_or_none() {
        let w = harmonic(Complex2::new(0.5, 1.0), 2000);
        assert_eq!(detect_ratios(&w, 8, 1.0).len(), 1);
        let zero = SequenceWindow::new(vec![Complex2::ZERO; 10]).unwrap();
        assert!(detect_ratios(&zero, 8, 1.0).is_empty());
    }

    #[test]
    fn profile_of_one_plus_i() {
        let w = harmonic(Complex2::new(1.0, 1.0), 1000);
        let p = nonsummability_profile(&w, 16).unwrap();
        assert_eq!(p.min_mass, 0.0);
        assert!((p.min_angle - 3.0 * PI / 4.0).abs() < 1e-12);
        let zero = SequenceWindow::new(vec![Complex2::ZERO; 3]).unwrap();
        let z = nonsummability_profile(&zero, 8).unwrap();
        assert!(z.samples.iter().all(|s| s.1 == 0.0));
        assert!(nonsummability_profile(&w, 3).is_err());
    }

    #[test]
    fn linear_maps() {
        let w = harmonic(Complex2::new(1.0, 2.0), 50);
        assert_eq!(apply_linear_map(&w, &Matrix2::IDENTITY).unwrap(), w);
        let swapped = apply_linear_map(&w, &Matrix2::SWAP).unwrap();
        assert_eq!(swapped, harmonic(Complex2::new(2.0, 1.0), 50));
        assert!(apply_linear_map(&w, &Matrix2::new(1.0, 2.0, 2.0, 4.0)).is_err());
    }

    #[test]
    fn aligned_window_has_ratios_zero_and_infinity() {
        let w = interleave(Complex2::new(1.0, 1.0), Complex2::new(3.0, 1.0), 5000);
        let m = axis_alignment_matrix(RatioValue::Finite(1.0), RatioValue::Finite(3.0)).unwrap();
        let image = apply_linear_map(&w, &m).unwrap();
        let reports = detect_ratios(&image, 10, 1.0);
        assert_eq!(reports.len(), 2);
        let ratios: Vec<RatioValue> = reports.iter().map(|r| r.ratio).collect();
        assert!(ratios.contains(&RatioValue::Infinite), "{ratios:?}");
        assert!(ratios.iter().any(|r| r.finite().is_some_and(|t| t.abs() < 1e-9)), "{ratios:?}");
    }

    #[test]
    fn example41_pairs_regroup_to_infinite_ratio() {
        let w = SequenceSpec::example41(None).window(10_000).unwrap();
        let signs = SignVector((0..10_000).map(|j| if j % 2 == 0 { Sign::Minus } else { Sign::Plus }).collect());
        let g = regroup(&w, &vec![2; 5000], &signs).unwrap();
        assert_eq!(dyadic_ratio_extract(&g, 8).ratio, RatioValue::Infinite);
    }

    #[test]
    fn regroup_identity_and_cancellation() {
        let w = harmonic(Complex2::new(0.3, -0.7), 20);
        assert_eq!(regroup(&w, &[1; 20], &SignVector::all_plus(20)).unwrap().terms(), w.terms());
        let c = SequenceWindow::new(vec![Complex2::new(0.2, 0.1); 8]).unwrap();
        let alt = SignVector((0..8).map(|j| if j % 2 == 0 { Sign::Plus } else { Sign::Minus }).collect());
        let g = regroup(&c, &[2; 4], &alt).unwrap();
        assert!(g.terms().iter().all(|&t| t == Complex2::ZERO));
        assert!(matches!(regroup(&c, &[2, 2, 3], &alt), Err(RatioError::NotAPartition(_))));
    }

    fn small_window() -> impl Strategy<Value = SequenceWindow> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40).prop_map(|v| {
            SequenceWindow::new(v.into_iter().map(|(a, b)| Complex2::new(a, b)).collect()).unwrap()
        })
    }

    fn matrix() -> impl Strategy<Value = Matrix2> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
            .prop_map(|(a, b, c, d)| Matrix2::new(a, b, c, d))
            .prop_filter("nonsingular", |m| m.det().abs() > 1e-3)
    }

    proptest! {
        #[test]
        fn retained_mass_is_monotone(w in small_window(), depth in 1u32..12) {
            let r = dyadic_ratio_extract(&w, depth);
            for pair in r.level_masses.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-12);
            }
            let recomputed: f64 = r.mask.iter().map(|&p| w.terms()[p].max_norm()).sum();
            prop_assert!((recomputed - r.mass).abs() < 1e-12);
        }

        #[test]
        fn interval_holds_constant_ratio(t in -20.0f64..20.0, depth in 0u32..14) {
            prop_assume!(t.abs() > 1e-6);
            let w = harmonic(Complex2::new(t, 1.0), 64);
            let r = dyadic_ratio_extract(&w, depth);
            prop_assert!(r.interval_contains(RatioValue::Finite(t)));
        }

        #[test]
        fn linear_maps_compose(w in small_window(), m1 in matrix(), m2 in matrix()) {
            let twice = apply_linear_map(&apply_linear_map(&w, &m1).unwrap(), &m2).unwrap();
            let once = apply_linear_map(&w, &m2.compose(&m1)).unwrap();
            for (x, y) in twice.terms().iter().zip(once.terms()) {
                prop_assert!(x.dist(*y) <= 1e-12 * (1.0 + x.max_norm()));
            }
        }

        #[test]
        fn regroup_matches_block_boundaries(w in small_window(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = w.len();
            let signs = SignVector((0..n).map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus }).collect());
            let mut lengths = Vec::new();
            let mut left = n;
            while left > 0 {
                let l = rng.random_range(1..=left.min(5));
                lengths.push(l);
                left -= l;
            }
            let g = regroup(&w, &lengths, &signs).unwrap();
            let coarse = crate::series::partial_sums(&g, &SignVector::all_plus(g.len())).unwrap();
            let fine = crate::series::partial_sums(&w, &signs).unwrap();
            let mut end = 0;
            for (k, &l) in lengths.iter().enumerate() {
                end += l;
                prop_assert!(coarse[k].dist(fine[end - 1]) < 1e-12);
            }
        }

        #[test]
        fn profile_is_periodic_and_continuous(w in small_window(), m in 4usize..40) {
            let p = nonsummability_profile(&w, m).unwrap();
            // θ = π gives the same mass as θ = 0
            let at_pi: f64 = w.terms().iter().map(|c| (-c.re).abs()).sum();
            prop_assert!((at_pi - p.samples[0].1).abs() < 1e-12);
            let bound: f64 = w.terms().iter().map(|c| c.modulus()).sum::<f64>() * PI / m as f64 + 1e-12;
            let mut closed = p.samples.clone();
            closed.push((PI, at_pi));
            for pair in closed.windows(2) {
                prop_assert!((pair[1].1 - pair[0].1).abs() <= bound);
            }
            prop_assert!(p.samples.iter().all(|s| s.1 >= p.min_mass));
        }
    }
}
