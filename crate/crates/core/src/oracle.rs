//! Exhaustive ground truth for short windows: the finite range, the optimal
//! prefix discrepancy, transform equivariance and ε-net coverage.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex2, Matrix2, Rect};
use crate::error::OracleError;
use crate::series::{Sign, SequenceWindow, SignVector};

/// Longest window [`exact_range`] enumerates.
pub const MAX_RANGE_LEN: usize = 26;
/// Longest window [`min_prefix_discrepancy`] searches.
pub const MAX_DISCREPANCY_LEN: usize = 22;
/// Longest window [`transform_equivariance_check`] accepts.
pub const MAX_EQUIVARIANCE_LEN: usize = 20;
/// Absolute tolerance for merging range points.
pub const DEDUP_TOL: f64 = 1e-12;
/// Set-equality tolerance of [`transform_equivariance_check`].
pub const EQUIVARIANCE_TOL: f64 = 1e-9;

const FANOUT_BITS: usize = 3;
const RESYNC_PERIOD: u64 = 256;
const MAX_CELLS: usize = 1 << 27;

/// The deduplicated set of signed sums of a window, sorted by `(re, im)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeSet {
    points: Vec<Complex2>,
    source_len: usize,
}

impl RangeSet {
    /// Builds a set from arbitrary points, sorting and merging at `DEDUP_TOL`.
    pub fn from_points(points: Vec<Complex2>, source_len: usize) -> Self {
        RangeSet {
            points: dedup(points, DEDUP_TOL),
            source_len,
        }
    }

    pub fn points(&self) -> &[Complex2] {
        &self.points
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Some point within `tol` of `p` in max-norm.
    pub fn contains_near(&self, p: Complex2, tol: f64) -> bool {
        let start = self.points.partition_point(|q| q.re < p.re - tol);
        self.points[start..]
            .iter()
            .take_while(|q| q.re <= p.re + tol)
            .any(|q| (q.im - p.im).abs() <= tol)
    }

    /// Two-way containment at tolerance `tol`.
    pub fn approx_eq(&self, other: &RangeSet, tol: f64) -> bool {
        self.points.iter().all(|&p| other.contains_near(p, tol))
            && other.points.iter().all(|&p| self.contains_near(p, tol))
    }

    /// `M·p` for every point, re-canonicalized.
    pub fn transformed(&self, matrix: &Matrix2) -> RangeSet {
        RangeSet::from_points(self.points.iter().map(|&p| matrix.apply(p)).collect(), self.source_len)
    }
}

/// Sorts by `(re, im)` and merges points closer than `tol`: runs chained
/// within `tol` in `re` are split by chaining in `im`, keeping the first
/// point of each chain.
fn dedup(mut points: Vec<Complex2>, tol: f64) -> Vec<Complex2> {
    points.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let mut out = Vec::with_capacity(points.len());
    let mut start = 0;
    while start < points.len() {
        let mut end = start + 1;
        while end < points.len() && points[end].re - points[end - 1].re <= tol {
            end += 1;
        }
        let group = &mut points[start..end];
        if group.len() == 1 {
            out.push(group[0]);
        } else {
            group.sort_unstable_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
            let mut last_im = f64::NEG_INFINITY;
            for p in group.iter() {
                if p.im - last_im > tol {
                    out.push(*p);
                }
                last_im = p.im;
            }
        }
        start = end;
    }
    out.sort_unstable_by(|a, b| a.total_cmp(b));
    out
}

/// Sums of `terms[split..]` under every sign pattern, with the signs of
/// `terms[..split]` fixed by `prefix_bits` (bit `j` set means `-1`).
///
/// Patterns of the free terms are visited in Gray-code order, one sign flip
/// per step; the running sum is recomputed from scratch periodically so that
/// rounding does not accumulate.
fn enumerate_subtree(terms: &[Complex2], split: usize, prefix_bits: u64, out: &mut Vec<Complex2>) {
    let sign_of = |bit: bool| if bit { -1.0 } else { 1.0 };
    let head: Complex2 = terms[..split]
        .iter()
        .enumerate()
        .map(|(j, &c)| c.scale(sign_of(prefix_bits >> j & 1 == 1)))
        .sum();
    let free = &terms[split..];
    let mut minus = vec![false; free.len()];
    let resync = |minus: &[bool]| -> Complex2 {
        head + free
            .iter()
            .zip(minus)
            .map(|(&c, &m)| c.scale(sign_of(m)))
            .sum::<Complex2>()
    };
    let mut sum = resync(&minus);
    out.push(sum);
    let count: u64 = 1 << free.len();
    for step in 1..count {
        let j = step.trailing_zeros() as usize;
        minus[j] = !minus[j];
        if step % RESYNC_PERIOD == 0 {
            sum = resync(&minus);
        } else if minus[j] {
            sum -= free[j].scale(2.0);
        } else {
            sum += free[j].scale(2.0);
        }
        out.push(sum);
    }
}

/// `{Σ x_n c_n : x ∈ {-1, 1}^N}` merged at absolute tolerance `1e-12`.
pub fn exact_range(window: &SequenceWindow) -> Result<RangeSet, OracleError> {
    let n = window.len();
    if n > MAX_RANGE_LEN {
        return Err(OracleError::TooLarge {
            len: n,
            max: MAX_RANGE_LEN,
        });
    }
    let terms = window.terms();
    let split = FANOUT_BITS.min(n);
    let parts: Vec<Vec<Complex2>> = (0..1u64 << split)
        .into_par_iter()
        .map(|bits| {
            let mut out = Vec::with_capacity(1 << (n - split));
            enumerate_subtree(terms, split, bits, &mut out);
            out
        })
        .collect();
    Ok(RangeSet::from_points(parts.concat(), n))
}

struct Search<'a> {
    terms: &'a [Complex2],
    path: Vec<Sign>,
    best: f64,
    witness: Option<Vec<Sign>>,
}

impl Search<'_> {
    /// Depth-first in lexicographic order (`+1` first), pruning any branch
    /// whose running maximum already reaches the best value. Only strict
    /// improvements replace the witness, which keeps the lexicographically
    /// smallest optimum.
    fn visit(&mut self, sum: Complex2, running_max: f64) {
        if running_max >= self.best {
            return;
        }
        let k = self.path.len();
        if k == self.terms.len() {
            self.best = running_max;
            self.witness = Some(self.path.clone());
            return;
        }
        for sign in [Sign::Plus, Sign::Minus] {
            let next = sum + sign * self.terms[k];
            self.path.push(sign);
            self.visit(next, running_max.max(next.max_norm()));
            self.path.pop();
        }
    }
}

/// `min_x max_k ‖S_k‖` over all sign vectors, with the lexicographically
/// smallest minimizer (`+1` before `-1`).
pub fn min_prefix_discrepancy(window: &SequenceWindow) -> Result<(f64, SignVector), OracleError> {
    let n = window.len();
    if n > MAX_DISCREPANCY_LEN {
        return Err(OracleError::TooLarge {
            len: n,
            max: MAX_DISCREPANCY_LEN,
        });
    }
    let terms = window.terms();
    let split = FANOUT_BITS.min(n);
    // fixed prefixes in lexicographic order; each subtree searched independently
    let results: Vec<(f64, Vec<Sign>)> = (0..1u64 << split)
        .into_par_iter()
        .filter_map(|idx| {
            let path: Vec<Sign> = (0..split)
                .map(|j| if idx >> (split - 1 - j) & 1 == 1 { Sign::Minus } else { Sign::Plus })
                .collect();
            let mut sum = Complex2::ZERO;
            let mut running = 0.0f64;
            for (j, &s) in path.iter().enumerate() {
                sum += s * terms[j];
                running = running.max(sum.max_norm());
            }
            let mut search = Search {
                terms,
                path,
                best: f64::INFINITY,
                witness: None,
            };
            search.visit(sum, running);
            search.witness.map(|w| (search.best, w))
        })
        .collect();
    let (value, witness) = results
        .into_iter()
        .reduce(|best, cand| if cand.0 < best.0 { cand } else { best })
        .expect("at least one subtree");
    Ok((value, SignVector(witness)))
}

/// Whether `M·R(window) = R(M·window)` as sets, to tolerance `1e-9`.
pub fn transform_equivariance_check(window: &SequenceWindow, matrix: &Matrix2) -> Result<bool, OracleError> {
    if matrix.is_singular() {
        return Err(OracleError::SingularMatrix { det: matrix.det() });
    }
    if window.len() > MAX_EQUIVARIANCE_LEN {
        return Err(OracleError::TooLarge {
            len: window.len(),
            max: MAX_EQUIVARIANCE_LEN,
        });
    }
    let image = exact_range(window)?.transformed(matrix);
    let mapped = SequenceWindow::with_origin(
        window.terms().iter().map(|&c| matrix.apply(c)).collect(),
        window.origin(),
    )
    .expect("finite image of finite terms");
    let direct = exact_range(&mapped)?;
    Ok(image.approx_eq(&direct, EQUIVARIANCE_TOL))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub window: Rect,
    pub epsilon: f64,
    pub covered_fraction: f64,
    /// Largest distance from a cell center to its nearest range point.
    pub worst_gap: f64,
    pub cells: usize,
}

/// Bucket grid for max-norm nearest-point queries.
struct PointGrid<'a> {
    points: &'a [Complex2],
    size: f64,
    origin: Complex2,
    buckets: HashMap<(i64, i64), Vec<u32>>,
    extent: (i64, i64),
}

impl<'a> PointGrid<'a> {
    fn new(points: &'a [Complex2], size: f64) -> Self {
        let origin = Complex2::new(
            points.iter().map(|p| p.re).fold(f64::INFINITY, f64::min),
            points.iter().map(|p| p.im).fold(f64::INFINITY, f64::min),
        );
        let mut grid = PointGrid {
            points,
            size,
            origin,
            buckets: HashMap::new(),
            extent: (0, 0),
        };
        for (i, &p) in points.iter().enumerate() {
            let key = grid.key(p);
            grid.extent.0 = grid.extent.0.max(key.0);
            grid.extent.1 = grid.extent.1.max(key.1);
            grid.buckets.entry(key).or_default().push(i as u32);
        }
        grid
    }

    fn key(&self, p: Complex2) -> (i64, i64) {
        (
            ((p.re - self.origin.re) / self.size).floor() as i64,
            ((p.im - self.origin.im) / self.size).floor() as i64,
        )
    }

    fn scan(&self, key: (i64, i64), q: Complex2, best: &mut f64) {
        if let Some(ids) = self.buckets.get(&key) {
            for &i in ids {
                *best = best.min(self.points[i as usize].dist(q));
            }
        }
    }

    /// Max-norm distance from `q` to the nearest point, by rings of buckets
    /// around `q`'s bucket, clipped to the occupied extent. Points outside
    /// ring `r` are farther than `r·size`.
    fn nearest(&self, q: Complex2) -> f64 {
        let (qx, qy) = self.key(q);
        let (ex, ey) = self.extent;
        let max_ring = [qx, ex - qx, qy, ey - qy].into_iter().map(i64::abs).max().unwrap_or(0)
            + 1;
        let mut best = f64::INFINITY;
        let mut r = 0i64;
        // first ring that can touch the occupied extent
        let gap = [-qx, qx - ex, -qy, qy - ey].into_iter().max().unwrap_or(0).max(0);
        if gap > 0 {
            r = gap;
        }
        while r <= max_ring {
            let (x0, x1) = ((qx - r).max(0), (qx + r).min(ex));
            let (y0, y1) = ((qy - r).max(0), (qy + r).min(ey));
            if x0 <= x1 && y0 <= y1 {
                for x in x0..=x1 {
                    if x == qx - r || x == qx + r {
                        for y in y0..=y1 {
                            self.scan((x, y), q, &mut best);
                        }
                    } else {
                        if qy - r >= 0 {
                            self.scan((x, qy - r), q, &mut best);
                        }
                        if qy + r <= ey {
                            self.scan((x, qy + r), q, &mut best);
                        }
                    }
                }
            }
            if best <= r as f64 * self.size {
                break;
            }
            r += 1;
        }
        best
    }
}

fn cell_centers(lo: f64, width: f64, eps: f64) -> Vec<f64> {
    if width == 0.0 {
        return vec![lo];
    }
    let count = ((width / eps).ceil() as usize).max(1);
    let pitch = width / count as f64;
    (0..count).map(|i| lo + (i as f64 + 0.5) * pitch).collect()
}

/// Grids `window` into cells of side at most `epsilon` (one cell across a
/// degenerate side) and checks each center against the nearest range point.
pub fn epsilon_net_coverage(range: &RangeSet, window: &Rect, epsilon: f64) -> Result<CoverageReport, OracleError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(OracleError::NonPositiveEpsilon(epsilon));
    }
    if range.is_empty() {
        return Err(OracleError::EmptyRange);
    }
    let xs = cell_centers(window.lo.re, window.width(), epsilon);
    let ys = cell_centers(window.lo.im, window.height(), epsilon);
    let cells = xs.len().checked_mul(ys.len()).filter(|&c| c <= MAX_CELLS).ok_or_else(|| {
        OracleError::InvalidRect(format!("{} x {} cells exceed {MAX_CELLS}", xs.len(), ys.len()))
    })?;

    let pts = range.points();
    let span = |f: fn(&Complex2) -> f64| {
        let (lo, hi) = pts.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        hi - lo
    };
    let side = span(|p| p.re).max(span(|p| p.im));
    let bucket = epsilon.max(side / (pts.len() as f64).sqrt());
    let grid = PointGrid::new(pts, bucket);

    let (covered, worst) = ys
        .par_iter()
        .map(|&y| {
            xs.iter().fold((0usize, 0.0f64), |(c, worst), &x| {
                let d = grid.nearest(Complex2::new(x, y));
                (c + usize::from(d <= epsilon), worst.max(d))
            })
        })
        .reduce(|| (0, 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    Ok(CoverageReport {
        window: *window,
        epsilon,
        covered_fraction: covered as f64 / cells as f64,
        worst_gap: worst,
        cells,
    })
}
