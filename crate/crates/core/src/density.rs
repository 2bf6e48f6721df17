//! Index-set densities, the word metric, coordinate deletion, the deletion
//! Hölder check and box counting over sign-prefix trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::Complex2;
use crate::error::{DensityError, SeriesError};
use crate::series::{SequenceWindow, Sign, SignVector};

/// A set of one-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IndexSet {
    Explicit { indices: Vec<u64> },
    /// `{k·q + j : k ≥ 0} ∖ {0}`.
    Arithmetic { q: u64, j: u64 },
}

impl IndexSet {
    pub fn explicit(mut indices: Vec<u64>) -> Result<Self, DensityError> {
        if indices.contains(&0) {
            return Err(DensityError::InvalidSet("indices start at 1".into()));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(IndexSet::Explicit { indices })
    }

    pub fn arithmetic(q: u64, j: u64) -> Result<Self, DensityError> {
        if q == 0 || j >= q {
            return Err(DensityError::InvalidSet(format!("need 0 ≤ j < q, got q = {q}, j = {j}")));
        }
        Ok(IndexSet::Arithmetic { q, j })
    }

    pub fn empty() -> Self {
        IndexSet::Explicit { indices: Vec::new() }
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::Explicit { indices } => indices.binary_search(&n).is_ok(),
            IndexSet::Arithmetic { q, j } => n >= 1 && n % q == *j,
        }
    }

    /// `#(Λ ∩ [1, k])`.
    pub fn count_upto(&self, k: u64) -> u64 {
        match self {
            IndexSet::Explicit { indices } => indices.partition_point(|&n| n <= k) as u64,
            IndexSet::Arithmetic { q, j } => {
                let all = if k >= *j { (k - j) / q + 1 } else { 0 };
                all - u64::from(*j == 0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    /// `(k, #(Λ ∩ [1, k]) / k)` at each checkpoint, largest `k` first.
    pub counts: Vec<(u64, f64)>,
    pub upper: f64,
    pub lower: f64,
    pub horizon: u64,
}

/// Densities sampled at `k_i = ⌈horizon·2^{-i/4}⌉`; the upper and lower
/// estimates range over the checkpoints with `k ≥ horizon/2`.
pub fn density(set: &IndexSet, horizon: u64) -> Result<DensityReport, DensityError> {
    if horizon < 10 {
        return Err(DensityError::HorizonTooSmall(horizon));
    }
    let mut counts = Vec::new();
    let mut last = 0;
    for i in 0.. {
        let k = (horizon as f64 * 2f64.powf(-(i as f64) / 4.0)).ceil() as u64;
        if k < 1 || (i > 0 && k == last) {
            break;
        }
        if k != last {
            counts.push((k, set.count_upto(k) as f64 / k as f64));
        }
        last = k;
        if k == 1 {
            break;
        }
    }
    let tail = counts.iter().filter(|(k, _)| 2 * k >= horizon).map(|&(_, d)| d);
    let upper = tail.clone().fold(0.0, f64::max);
    let lower = tail.fold(1.0, f64::min);
    Ok(DensityReport {
        counts,
        upper,
        lower,
        horizon,
    })
}

/// `2^{-k}` with `k` the first (one-based) disagreement; 0 for equal words.
pub fn seq_metric(x: &SignVector, y: &SignVector) -> Result<f64, SeriesError> {
    if x.len() != y.len() {
        return Err(SeriesError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(first_disagreement(x.as_slice(), y.as_slice()).map_or(0.0, |k| 2f64.powi(-(k as i32))))
}

fn first_disagreement(x: &[Sign], y: &[Sign]) -> Option<usize> {
    x.iter().zip(y).position(|(a, b)| a != b).map(|p| p + 1)
}

/// The subword of `x` on the positions outside `set`.
pub fn h_lambda(x: &SignVector, set: &IndexSet) -> SignVector {
    SignVector(
        x.iter()
            .enumerate()
            .filter(|&(i, _)| !set.contains(i as u64 + 1))
            .map(|(_, s)| s)
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub pass: bool,
    /// Largest `d(h(x), h(y)) / d(x, y)^{1-eps}` over the samples.
    pub worst_ratio: f64,
    /// First disagreement of the worst pair, before and after deletion.
    pub worst_pair: Option<(usize, Option<usize>)>,
    pub k0: usize,
    /// `m_k ≤ eps·k` for every `1 ≤ k ≤ length`, so that
    /// `2^{-k+m_k} ≤ 2^{-k(1-eps)}` without sampling.
    pub exact_bound_holds: bool,
    pub first_exact_failure: Option<usize>,
    pub samples: usize,
}

/// Checks `d(h_Λ(x), h_Λ(y)) ≤ d(x, y)^{1-eps}` on random pairs of length
/// `length` whose first disagreement `k` is uniform on `(k0, length]`, where
/// `k0` is the last `k ≤ length` with `m_k ≥ eps·k` and
/// `m_k = #(Λ ∩ [1, k-1])`.
pub fn holder_check(
    set: &IndexSet,
    eps: f64,
    samples: usize,
    length: usize,
    seed: u64,
) -> Result<HolderReport, DensityError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(DensityError::BadEps(eps));
    }
    let upper = density(set, (length as u64).max(10))?.upper;
    if upper >= eps {
        return Err(DensityError::DensityTooHigh { upper, eps });
    }
    let m = |k: usize| set.count_upto(k as u64 - 1) as f64;
    let failures: Vec<usize> = (1..=length).filter(|&k| m(k) > eps * k as f64).collect();
    let k0 = (1..=length).rev().find(|&k| m(k) >= eps * k as f64).unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_pair = None;
    if k0 < length {
        for _ in 0..samples {
            let k = rng.random_range(k0 + 1..=length);
            let x: Vec<Sign> = (0..length).map(|_| random_sign(&mut rng)).collect();
            let mut y = x.clone();
            y[k - 1] = y[k - 1].flip();
            for s in &mut y[k..] {
                *s = random_sign(&mut rng);
            }
            let hx = h_lambda(&SignVector(x), set);
            let hy = h_lambda(&SignVector(y), set);
            let kh = first_disagreement(hx.as_slice(), hy.as_slice());
            // log2 of d(h(x), h(y)) / d(x, y)^{1-eps}
            let log_ratio = match kh {
                Some(kh) => -(kh as f64) + k as f64 * (1.0 - eps),
                None => f64::NEG_INFINITY,
            };
            if worst_pair.is_none() || log_ratio > worst {
                worst = log_ratio;
                worst_pair = Some((k, kh));
            }
        }
    }
    Ok(HolderReport {
        pass: worst <= 1e-12,
        worst_ratio: if worst_pair.is_some() { worst.exp2() } else { 0.0 },
        worst_pair,
        k0,
        exact_bound_holds: failures.is_empty(),
        first_exact_failure: failures.first().copied(),
        samples: if k0 < length { samples } else { 0 },
    })
}

fn random_sign(rng: &mut impl Rng) -> Sign {
    if rng.random::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDimReport {
    /// `(k, L_k)` for `k = 1..=depth`.
    pub counts: Vec<(usize, u64)>,
    /// Least-squares slope of `log2 L_k` over the last `⌈depth/2⌉` depths.
    pub slope: f64,
    /// Set when some depth has no surviving prefix; the slope is then 0.
    pub empty: bool,
}

/// Levels expanded sequentially before the subtrees are searched in parallel.
const SPLIT_DEPTH: usize = 6;

/// Counts the prefixes of each length whose every prefix satisfies `admits`.
pub fn box_dim_estimate<F>(admits: F, depth: usize) -> BoxDimReport
where
    F: Fn(&[Sign]) -> bool + Sync,
{
    let mut counts = vec![0u64; depth + 1];
    let mut frontier = vec![Vec::new()];
    counts[0] = 1;
    let split = depth.min(SPLIT_DEPTH);
    for k in 1..=split {
        frontier = frontier
            .into_iter()
            .flat_map(|p: Vec<Sign>| {
                [Sign::Plus, Sign::Minus].into_iter().map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .filter(|p| admits(p))
            .collect();
        counts[k] = frontier.len() as u64;
    }
    if depth > split {
        let deep = frontier
            .par_iter()
            .map(|p| {
                let mut local = vec![0u64; depth + 1];
                let mut word = p.clone();
                walk(&admits, &mut word, depth, &mut local);
                local
            })
            .reduce(
                || vec![0u64; depth + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        for k in split + 1..=depth {
            counts[k] = deep[k];
        }
    }
    let counts: Vec<(usize, u64)> = (1..=depth).map(|k| (k, counts[k])).collect();
    let empty = counts.iter().any(|&(_, c)| c == 0);
    let slope = if empty || depth == 0 {
        0.0
    } else {
        let tail = &counts[depth - depth.div_ceil(2)..];
        least_squares_slope(tail.iter().map(|&(k, c)| (k as f64, (c as f64).log2())))
    };
    BoxDimReport { counts, slope, empty }
}

fn walk<F: Fn(&[Sign]) -> bool>(admits: &F, word: &mut Vec<Sign>, depth: usize, counts: &mut [u64]) {
    if word.len() == depth {
        return;
    }
    for s in [Sign::Plus, Sign::Minus] {
        word.push(s);
        if admits(word) {
            counts[word.len()] += 1;
            walk(admits, word, depth, counts);
        }
        word.pop();
    }
}

fn least_squares_slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let n = points.clone().count() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    num / den
}

/// Prefix predicate for `Σ x_n c_n ∈ B(c, δ)`: a prefix of length `k` survives
/// while `‖S_k - c‖ ≤ δ + Σ_{n>k} ‖c_n‖`.
#[derive(Clone, Debug)]
pub struct BallFeasibility {
    terms: Vec<Complex2>,
    tails: Vec<f64>,
    center: Complex2,
    delta: f64,
}

impl BallFeasibility {
    pub fn new(window: &SequenceWindow, center: Complex2, delta: f64) -> Self {
        let terms = window.terms().to_vec();
        let mut tails = vec![0.0; terms.len() + 1];
        for n in (0..terms.len()).rev() {
            tails[n] = tails[n + 1] + terms[n].max_norm();
        }
        BallFeasibility {
            terms,
            tails,
            center,
            delta,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn admits(&self, prefix: &[Sign]) -> bool {
        if prefix.len() > self.terms.len() {
            return false;
        }
        let sum: Complex2 = prefix.iter().zip(&self.terms).map(|(&s, &c)| s * c).sum();
        (sum - self.center).max_norm() <= self.delta + self.tails[prefix.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(v: &[i64]) -> SignVector {
        SignVector::from_ints(v).unwrap()
    }

    #[test]
    fn metric_examples() {
        let x = sv(&[1, -1, 1, 1]);
        assert_eq!(seq_metric(&x, &x).unwrap(), 0.0);
        assert_eq!(seq_metric(&x, &sv(&[-1, -1, 1, 1])).unwrap(), 0.5);
        assert_eq!(seq_metric(&x, &sv(&[1, -1, 1, -1])).unwrap(), 1.0 / 16.0);
        assert!(seq_metric(&x, &sv(&[1])).is_err());
    }

    #[test]
    fn arithmetic_counts() {
        let evens = IndexSet::arithmetic(2, 0).unwrap();
        assert_eq!(evens.count_upto(10), 5);
        assert_eq!(evens.count_upto(1), 0);
        let odds = IndexSet::arithmetic(2, 1).unwrap();
        assert_eq!(odds.count_upto(9), 5);
        assert!(IndexSet::arithmetic(3, 3).is_err());
        assert!(IndexSet::explicit(vec![0, 1]).is_err());
    }

    #[test]
    fn density_examples() {
        let r = density(&IndexSet::arithmetic(3, 0).unwrap(), 1_000_000).unwrap();
        assert!((r.upper - 1.0 / 3.0).abs() <= 1e-5 && (r.lower - 1.0 / 3.0).abs() <= 1e-5);
        let r = density(&IndexSet::arithmetic(2, 0).unwrap(), 10_000).unwrap();
        assert!((r.upper - 0.5).abs() <= 1e-3 && (r.lower - 0.5).abs() <= 1e-3);
        let squares = IndexSet::explicit((1..=1000u64).map(|n| n * n).collect()).unwrap();
        assert!(density(&squares, 1_000_000).unwrap().upper <= 1e-2);
        assert_eq!(density(&squares, 9), Err(DensityError::HorizonTooSmall(9)));
    }

    #[test]
    fn deletion_examples() {
        let x = sv(&[1, -1, 1, -1]);
        assert_eq!(h_lambda(&x, &IndexSet::empty()), x);
        assert!(h_lambda(&x, &IndexSet::explicit(vec![1, 2, 3, 4]).unwrap()).is_empty());
        assert_eq!(h_lambda(&x, &IndexSet::explicit(vec![2, 4]).unwrap()), sv(&[1, 1]));
    }

    #[test]
    fn holder_examples() {
        let tens = IndexSet::arithmetic(10, 0).unwrap();
        let r = holder_check(&tens, 0.2, 10_000, 1000, 7).unwrap();
        assert!(r.pass && r.exact_bound_holds);
        let r = holder_check(&IndexSet::empty(), 0.3, 500, 200, 1).unwrap();
        assert!(r.pass);
        let (k, kh) = r.worst_pair.unwrap();
        assert_eq!(Some(k), kh);
        assert!(matches!(
            holder_check(&IndexSet::arithmetic(2, 0).unwrap(), 0.1, 10, 100, 0),
            Err(DensityError::DensityTooHigh { .. })
        ));
    }

    #[test]
    fn box_dim_examples() {
        let full = box_dim_estimate(|_| true, 14);
        assert!((full.slope - 1.0).abs() < 1e-12);
        let first_fixed = box_dim_estimate(|p| p[0] == Sign::Plus, 16);
        assert!((first_fixed.slope - 1.0).abs() < 1e-12);
        assert_eq!(first_fixed.counts[0], (1, 1));
        let even_fixed = box_dim_estimate(|p| p.len() % 2 == 1 || *p.last().unwrap() == Sign::Plus, 20);
        assert!((even_fixed.slope - 0.5).abs() < 0.05);
        let none = box_dim_estimate(|_| false, 5);
        assert!(none.empty && none.slope == 0.0);
    }

    #[test]
    fn ball_feasibility_prunes() {
        let w = SequenceWindow::from_fn(12, |n| Complex2::real(0.5f64.powi(n as i32))).unwrap();
        let ball = BallFeasibility::new(&w, Complex2::real(0.3), 0.01);
        let r = box_dim_estimate(|p| ball.admits(p), 12);
        assert!(!r.empty);
        let (_, last) = *r.counts.last().unwrap();
        assert!(last > 0 && last < 1 << 9, "{last}");
    }

    fn word(len: usize) -> impl Strategy<Value = SignVector> {
        prop::collection::vec(any::<bool>(), len)
            .prop_map(|v| SignVector(v.into_iter().map(|b| if b { Sign::Plus } else { Sign::Minus }).collect()))
    }

    proptest! {
        #[test]
        fn ultrametric((x, y, z) in (1usize..=10).prop_flat_map(|n| (word(n), word(n), word(n)))) {
            let dxz = seq_metric(&x, &z).unwrap();
            prop_assert!(dxz <= seq_metric(&x, &y).unwrap().max(seq_metric(&y, &z).unwrap()));
        }

        #[test]
        fn arithmetic_density_converges(q in 1u64..50, j in 0u64..50, horizon in 10u64..100_000) {
            let j = j % q;
            let r = density(&IndexSet::arithmetic(q, j).unwrap(), horizon).unwrap();
            let bound = 2.0 * q as f64 / horizon as f64;
            prop_assert!((r.upper - 1.0 / q as f64).abs() <= bound.max(2.0 / horizon as f64));
            prop_assert!(0.0 <= r.lower && r.lower <= r.upper && r.upper <= 1.0);
        }

        #[test]
        fn deletion_composes(
            x in word(24),
            first in prop::collection::btree_set(1u64..=24, 0..10),
            second in prop::collection::btree_set(1u64..=24, 0..10),
        ) {
            let first = IndexSet::explicit(first.into_iter().collect()).unwrap();
            let second: Vec<u64> = second.into_iter().filter(|&n| !first.contains(n)).collect();
            let union: Vec<u64> = (1..=24).filter(|&n| first.contains(n) || second.contains(&n)).collect();
            // positions of `second` inside the once-deleted word
            let shifted: Vec<u64> = second.iter().map(|&n| n - first.count_upto(n)).collect();
            let twice = h_lambda(&h_lambda(&x, &first), &IndexSet::explicit(shifted).unwrap());
            prop_assert_eq!(twice, h_lambda(&x, &IndexSet::explicit(union).unwrap()));
        }

        #[test]
        fn sparse_sets_hold_exactly(gap in 6u64..40, eps in 0.2f64..0.9) {
            let set = IndexSet::arithmetic(gap, 0).unwrap();
            let r = holder_check(&set, eps, 200, 300, gap).unwrap();
            prop_assert!(r.exact_bound_holds);
            prop_assert!(r.pass);
        }
    }
}
