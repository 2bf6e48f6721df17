//! Leveled affine function systems `z ↦ r·z + t_{k,i}`, their attractors,
//! rectangle covering and target addressing.

mod blocks;
mod covering;

pub use blocks::{
    build_two_ratio_system, normal_form_matrix, select_blocks, synthetic_two_ratio_system, SyntheticPair,
    MAX_SYNTHETIC_LEN, BlockSelection, BlockSigns, TwoRatioSystem,
    TWO_RATIO_HALF_WIDTH,
};
pub use covering::{address_for_target, covering_check, Address, CoveringReport, LevelCovering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex2, Rect};
use crate::error::MoranError;

/// Largest number of addresses [`attractor_points`] materializes.
pub const MAX_ATTRACTOR_POINTS: u128 = 1 << 24;

/// Level `k` holds the translations `t_{k,i}` of the maps `z ↦ r·z + t_{k,i}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoranSystem {
    r: f64,
    levels: Vec<Vec<Complex2>>,
}

#[derive(Deserialize)]
struct RawSystem {
    r: f64,
    levels: Vec<Vec<Complex2>>,
}

impl<'de> Deserialize<'de> for MoranSystem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawSystem::deserialize(deserializer)?;
        MoranSystem::new(raw.r, raw.levels).map_err(serde::de::Error::custom)
    }
}

impl MoranSystem {
    /// A system with `r ∈ (0, 1)` and at least two maps per level.
    pub fn new(r: f64, levels: Vec<Vec<Complex2>>) -> Result<Self, MoranError> {
        Self::build(r, levels, 2)
    }

    /// As [`MoranSystem::new`] but allowing single-map levels, for degenerate
    /// reference systems.
    pub fn relaxed(r: f64, levels: Vec<Vec<Complex2>>) -> Result<Self, MoranError> {
        Self::build(r, levels, 1)
    }

    fn build(r: f64, levels: Vec<Vec<Complex2>>, min_maps: usize) -> Result<Self, MoranError> {
        if !(r > 0.0 && r < 1.0) {
            return Err(MoranError::BadContraction(r));
        }
        if levels.is_empty() {
            return Err(MoranError::NoLevels);
        }
        for (k, level) in levels.iter().enumerate() {
            if level.len() < min_maps {
                return Err(MoranError::TooFewMaps {
                    level: k + 1,
                    count: level.len(),
                });
            }
        }
        Ok(MoranSystem { r, levels })
    }

    /// The same maps at every one of `depth` levels.
    pub fn uniform(r: f64, maps: Vec<Complex2>, depth: usize) -> Result<Self, MoranError> {
        Self::new(r, vec![maps; depth])
    }

    pub fn contraction(&self) -> f64 {
        self.r
    }

    pub fn levels(&self) -> &[Vec<Complex2>] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `M = sup ‖f_{k,i}(0)‖`.
    pub fn offset_bound(&self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .map(|t| t.max_norm())
            .fold(0.0, f64::max)
    }

    /// `R = 2M/(1 - r)`, so every map sends `B(0, R)` into itself.
    pub fn radius(&self) -> f64 {
        2.0 * self.offset_bound() / (1.0 - self.r)
    }

    /// Checks `‖t‖ + r·R ≤ R` for every stored translation.
    pub fn nested_ball_holds(&self) -> bool {
        let big_r = self.radius();
        self.levels
            .iter()
            .flatten()
            .all(|t| t.max_norm() + self.r * big_r <= big_r * (1.0 + 1e-15))
    }

    /// `f_σ(0) = Σ_k r^{k-1}·t_{k,σ_k}` for zero-based digits.
    pub fn point(&self, digits: &[usize]) -> Complex2 {
        let mut scale = 1.0;
        let mut z = Complex2::ZERO;
        for (level, &d) in self.levels.iter().zip(digits) {
            z += level[d].scale(scale);
            scale *= self.r;
        }
        z
    }

    fn check_depth(&self, depth: usize) -> Result<u128, MoranError> {
        if depth > self.levels.len() {
            return Err(MoranError::DepthExceedsLevels {
                depth,
                levels: self.levels.len(),
            });
        }
        let count = self.levels[..depth]
            .iter()
            .try_fold(1u128, |acc, l| acc.checked_mul(l.len() as u128))
            .unwrap_or(u128::MAX);
        Ok(count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorCloud {
    /// `f_σ(0)` for every address of the given depth, in lexicographic order.
    pub points: Vec<Complex2>,
    /// Every attractor point lies within this distance of some point.
    pub error_radius: f64,
    pub radius: f64,
}

/// Points `f_σ(0)` over all addresses of length `depth`.
pub fn attractor_points(system: &MoranSystem, depth: usize) -> Result<AttractorCloud, MoranError> {
    let count = system.check_depth(depth)?;
    if count > MAX_ATTRACTOR_POINTS {
        return Err(MoranError::TooManyPoints {
            count,
            max: MAX_ATTRACTOR_POINTS,
        });
    }
    let mut points = vec![Complex2::ZERO];
    let mut scale = 1.0;
    for level in &system.levels[..depth] {
        points = points
            .par_iter()
            .flat_map_iter(|&p| level.iter().map(move |&t| p + t.scale(scale)))
            .collect();
        scale *= system.r;
    }
    let radius = system.radius();
    Ok(AttractorCloud {
        points,
        error_radius: system.r.powi(depth as i32) * radius,
        radius,
    })
}

/// Calls `visit` with `f_σ(0)` for every address of length `depth`, in
/// lexicographic order, without materializing the cloud.
pub fn visit_attractor_points(
    system: &MoranSystem,
    depth: usize,
    mut visit: impl FnMut(Complex2),
) -> Result<(), MoranError> {
    system.check_depth(depth)?;
    fn walk(levels: &[Vec<Complex2>], r: f64, scale: f64, z: Complex2, visit: &mut dyn FnMut(Complex2)) {
        match levels.split_first() {
            None => visit(z),
            Some((level, rest)) => {
                for &t in level {
                    walk(rest, r, scale * r, z + t.scale(scale), visit);
                }
            }
        }
    }
    walk(&system.levels[..depth], system.r, 1.0, Complex2::ZERO, &mut visit);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFill {
    pub grid_points: usize,
    pub covered: usize,
    /// First uncovered grid point in row-major order, if any.
    pub witness: Option<Complex2>,
    pub radius: f64,
}

/// Whether every point of the `pitch`-grid on `rect` lies within `radius`
/// of some depth-`depth` attractor point. Streams the addresses in parallel
/// over the first-level digit.
pub fn attractor_grid_fill(
    system: &MoranSystem,
    depth: usize,
    rect: &Rect,
    pitch: f64,
    radius: f64,
) -> Result<GridFill, MoranError> {
    if !(pitch > 0.0) {
        return Err(MoranError::InvalidRect(format!("pitch {pitch} must be positive")));
    }
    system.check_depth(depth)?;
    let nx = (rect.width() / pitch + 1e-9).floor() as usize + 1;
    let ny = (rect.height() / pitch + 1e-9).floor() as usize + 1;
    let coord = |i: usize, lo: f64| lo + i as f64 * pitch;
    let mark = |hits: &mut Vec<bool>, z: Complex2| {
        let span = |v: f64, lo: f64, n: usize| {
            let a = ((v - radius - lo) / pitch).ceil().max(0.0) as usize;
            let b = ((v + radius - lo) / pitch).floor();
            (a, if b < 0.0 { None } else { Some((b as usize).min(n - 1)) })
        };
        let (x0, x1) = span(z.re, rect.lo.re, nx);
        let (y0, y1) = span(z.im, rect.lo.im, ny);
        let (Some(x1), Some(y1)) = (x1, y1) else { return };
        for iy in y0..=y1 {
            let gy = coord(iy, rect.lo.im);
            if (gy - z.im).abs() > radius {
                continue;
            }
            for ix in x0..=x1 {
                if (coord(ix, rect.lo.re) - z.re).abs() <= radius {
                    hits[iy * nx + ix] = true;
                }
            }
        }
    };
    let hits = if depth == 0 {
        let mut hits = vec![false; nx * ny];
        mark(&mut hits, Complex2::ZERO);
        hits
    } else {
        let top = &system.levels[0];
        let rest = MoranSystem {
            r: system.r,
            levels: system.levels[1..depth].to_vec(),
        };
        top.par_iter()
            .map(|&t| {
                let mut hits = vec![false; nx * ny];
                visit_attractor_points(&rest, depth - 1, |z| mark(&mut hits, t + z.scale(system.r)))
                    .expect("depth checked");
                hits
            })
            .reduce(
                || vec![false; nx * ny],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
                    a
                },
            )
    };
    let covered = hits.iter().filter(|&&h| h).count();
    let witness = hits
        .iter()
        .position(|&h| !h)
        .map(|i| Complex2::new(coord(i % nx, rect.lo.re), coord(i / nx, rect.lo.im)));
    Ok(GridFill {
        grid_points: nx * ny,
        covered,
        witness,
        radius,
    })
}
