//! Exact covering of a rectangle by its level images, and pullback addressing.

use serde::{Deserialize, Serialize};

use super::MoranSystem;
use crate::complex::{Complex2, Rect};
use crate::error::MoranError;

/// Membership slack when following a target through the level images.
pub const ADDRESS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCovering {
    /// One-based level.
    pub level: usize,
    pub covered: bool,
    /// A point of the rectangle outside every image, when not covered.
    pub witness: Option<Complex2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub rect: Rect,
    pub levels: Vec<LevelCovering>,
}

impl CoveringReport {
    pub fn all_covered(&self) -> bool {
        self.levels.iter().all(|l| l.covered)
    }

    pub fn first_failure(&self) -> Option<&LevelCovering> {
        self.levels.iter().find(|l| !l.covered)
    }
}

fn image(system: &MoranSystem, rect: &Rect, t: Complex2) -> Rect {
    let r = system.contraction();
    Rect {
        lo: rect.lo.scale(r) + t,
        hi: rect.hi.scale(r) + t,
    }
}

/// Checks `Q ⊆ ∪_i f_{k,i}(Q)` level by level.
///
/// The decision is exact for the computed image rectangles: the x-axis is cut
/// at every image edge, and each breakpoint and each open slab between
/// breakpoints is checked for full y-coverage by the images spanning it.
/// Witnesses prefer corners of `Q` (upper corner first), then the first
/// uncovered slab.
pub fn covering_check(system: &MoranSystem, rect: &Rect) -> CoveringReport {
    let levels = system
        .levels()
        .iter()
        .enumerate()
        .map(|(k, level)| {
            let images: Vec<Rect> = level.iter().map(|&t| image(system, rect, t)).collect();
            let witness = uncovered_point(rect, &images);
            LevelCovering {
                level: k + 1,
                covered: witness.is_none(),
                witness,
            }
        })
        .collect();
    CoveringReport { rect: *rect, levels }
}

fn uncovered_point(rect: &Rect, images: &[Rect]) -> Option<Complex2> {
    let inside = |p: Complex2| images.iter().any(|r| r.contains(p));
    let [lo, lower_right, upper_left, hi] = rect.corners();
    if let Some(p) = [hi, lower_right, upper_left, lo].into_iter().find(|&p| !inside(p)) {
        return Some(p);
    }
    let (x0, x1) = (rect.lo.re, rect.hi.re);
    let mut cuts: Vec<f64> = images
        .iter()
        .flat_map(|r| [r.lo.re, r.hi.re])
        .filter(|&x| x > x0 && x < x1)
        .chain([x0, x1])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let column = |pred: &dyn Fn(&Rect) -> bool, x: f64| -> Option<Complex2> {
        let spans: Vec<(f64, f64)> = images.iter().filter(|r| pred(r)).map(|r| (r.lo.im, r.hi.im)).collect();
        interval_gap(rect.lo.im, rect.hi.im, spans).map(|y| Complex2::new(x, y))
    };
    for (i, &x) in cuts.iter().enumerate() {
        if let Some(p) = column(&|r: &Rect| r.lo.re <= x && x <= r.hi.re, x) {
            return Some(p);
        }
        if let Some(&next) = cuts.get(i + 1) {
            let mid = 0.5 * (x + next);
            if let Some(p) = column(&|r: &Rect| r.lo.re <= x && next <= r.hi.re, mid) {
                return Some(p);
            }
        }
    }
    None
}

/// A point of `[lo, hi]` outside the union of closed `spans`, if any.
fn interval_gap(lo: f64, hi: f64, mut spans: Vec<(f64, f64)>) -> Option<f64> {
    spans.retain(|&(_, b)| b >= lo);
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach: Option<f64> = None;
    for (a, b) in spans {
        let c = match reach {
            None if a > lo => return Some(lo),
            None => b,
            Some(c) if a > c => return Some(0.5 * (c + a.min(hi))),
            Some(c) => c.max(b),
        };
        if c >= hi {
            return None;
        }
        reach = Some(c);
    }
    Some(reach.map_or(lo, |c| 0.5 * (c + hi)))
}

/// Zero-based digits `σ_1 … σ_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Address {
    pub digits: Vec<usize>,
}

impl std::fmt::Display for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        let sep = if self.digits.iter().all(|&d| d < 10) { "" } else { "," };
        write!(f, "{}", parts.join(sep))
    }
}

/// Follows `target` back through the images `f_{k,i}(Q)`, taking the first
/// image containing the current pullback at each level. The result satisfies
/// `‖f_σ(0) - target‖ ≤ r^m · sup_{z∈Q} ‖z‖`.
pub fn address_for_target(
    system: &MoranSystem,
    rect: &Rect,
    target: Complex2,
    depth: usize,
) -> Result<Address, MoranError> {
    if depth > system.depth() {
        return Err(MoranError::DepthExceedsLevels {
            depth,
            levels: system.depth(),
        });
    }
    let near = |r: &Rect, p: Complex2| {
        p.re >= r.lo.re - ADDRESS_TOL
            && p.re <= r.hi.re + ADDRESS_TOL
            && p.im >= r.lo.im - ADDRESS_TOL
            && p.im <= r.hi.im + ADDRESS_TOL
    };
    if !near(rect, target) {
        return Err(MoranError::TargetEscapes { level: 0, point: target });
    }
    let r = system.contraction();
    let mut z = target;
    let mut digits = Vec::with_capacity(depth);
    for (k, level) in system.levels()[..depth].iter().enumerate() {
        let d = level
            .iter()
            .position(|&t| near(&image(system, rect, t), z))
            .ok_or(MoranError::TargetEscapes { level: k + 1, point: z })?;
        z = (z - level[d]).scale(1.0 / r);
        digits.push(d);
    }
    Ok(Address { digits })
}
