//! Consecutive block selection along a ratio class and the four-map system
//! built from two classes.

use serde::{Deserialize, Serialize};

use super::{covering_check, Address, CoveringReport, MoranSystem};
use crate::complex::{Complex2, Matrix2, Rect};
use crate::error::MoranError;
use crate::series::{SequenceWindow, Sign};

/// Half-width of the square the two-ratio system is checked against.
pub const TWO_RATIO_HALF_WIDTH: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSelection {
    pub t: f64,
    pub delta: f64,
    pub eta: Vec<f64>,
    /// Zero-based positions of each block; every block lies strictly after
    /// the previous one.
    pub blocks: Vec<Vec<usize>>,
    /// `(Σ a_n·sgn(b_n), Σ |b_n|)` per block.
    pub sums: Vec<(f64, f64)>,
}

/// Greedy consecutive blocks `Λ_1 < Λ_2 < …` with `Σ_{Λ_k} |b_n|` within
/// `η_k` of `δ^k`.
///
/// A term joins block `k` when `|a_n/b_n - t| + ‖c_n‖ < η_k` and adding it
/// keeps `Σ|b_n| ≤ δ^k + η_k`; the block closes once the sum reaches `δ^k`,
/// or at the end of the window if it is at least `δ^k - η_k` by then.
pub fn select_blocks(
    window: &SequenceWindow,
    t: f64,
    delta: f64,
    eta: &[f64],
    levels: usize,
) -> Result<BlockSelection, MoranError> {
    select_in(window.terms(), t, delta, eta, levels)
}

fn select_in(terms: &[Complex2], t: f64, delta: f64, eta: &[f64], levels: usize) -> Result<BlockSelection, MoranError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(MoranError::BadDelta(delta));
    }
    if eta.len() < levels {
        return Err(MoranError::ShortEta {
            got: eta.len(),
            need: levels,
        });
    }
    let mut cursor = 0;
    let mut blocks = Vec::with_capacity(levels);
    let mut sums = Vec::with_capacity(levels);
    for k in 1..=levels {
        let goal = delta.powi(k as i32);
        let eta_k = eta[k - 1];
        let (mut sum_a, mut sum_b) = (0.0, 0.0);
        let mut block = Vec::new();
        while cursor < terms.len() && sum_b < goal {
            let c = terms[cursor];
            cursor += 1;
            if c.im == 0.0 || (c.re / c.im - t).abs() + c.max_norm() >= eta_k {
                continue;
            }
            if sum_b + c.im.abs() > goal + eta_k {
                continue;
            }
            sum_b += c.im.abs();
            sum_a += c.re * Sign::of(c.im).value();
            block.push(cursor - 1);
        }
        if sum_b < goal - eta_k {
            return Err(MoranError::InsufficientMass {
                level: k,
                shortfall: goal - eta_k - sum_b,
            });
        }
        blocks.push(block);
        sums.push((sum_a, sum_b));
    }
    Ok(BlockSelection {
        t,
        delta,
        eta: eta[..levels].to_vec(),
        blocks,
        sums,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRatioSystem {
    pub system: MoranSystem,
    /// `D_k = [A+B, A-B, -(A+B), -(A-B)]` with `A = a¹_k + i·b¹_k` and
    /// `B = α¹_k + i·β¹_k`.
    pub digits: Vec<[Complex2; 4]>,
    /// Blocks of the first window along ratio 2.
    pub first: BlockSelection,
    /// Blocks of the second window, read with parts swapped, along ratio 3.
    pub second: BlockSelection,
    pub covering: CoveringReport,
}

/// Signs on the selected positions of each window realizing an address.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSigns {
    pub first: Vec<(usize, i8)>,
    pub second: Vec<(usize, i8)>,
}

impl TwoRatioSystem {
    /// Digit `d` at level `k` picks `ε·(A + η·B)` with `(ε, η)` running
    /// through `(+,+), (+,-), (-,+), (-,-)`; the first window's block gets
    /// `ε·sgn(b_n)` and the second's `ε·η·sgn(α_n)`.
    pub fn expand_address(&self, first: &SequenceWindow, second: &SequenceWindow, address: &Address) -> BlockSigns {
        let mut out = BlockSigns {
            first: Vec::new(),
            second: Vec::new(),
        };
        for (k, &d) in address.digits.iter().enumerate() {
            let eps = if d < 2 { Sign::Plus } else { Sign::Minus };
            let eta = if d % 2 == 0 { Sign::Plus } else { Sign::Minus };
            for &p in &self.first.blocks[k] {
                out.first.push((p, (eps * Sign::of(first.terms()[p].im)).as_i8()));
            }
            for &p in &self.second.blocks[k] {
                out.second.push((p, (eps * eta * Sign::of(second.terms()[p].re)).as_i8()));
            }
        }
        out
    }

    pub fn rect() -> Rect {
        Rect::square(Complex2::ZERO, TWO_RATIO_HALF_WIDTH).expect("fixed square")
    }
}

fn bracket(level: usize, value: f64, lo: f64, hi: f64, scale: f64, name: &str) -> Result<(), MoranError> {
    if value < lo * scale || value > hi * scale {
        return Err(MoranError::BracketViolation {
            level,
            inequality: format!("{}·δ^k ≤ {name} ≤ {}·δ^k", fraction(lo), fraction(hi)),
            value,
        });
    }
    Ok(())
}

fn fraction(x: f64) -> String {
    let n = x * 64.0;
    if n.fract() == 0.0 {
        format!("{}/64", n as i64)
    } else {
        x.to_string()
    }
}

/// The linear map sending direction `(t_a, 1)` to `(2, 1)` and `(1, t_b)`
/// to `(1, 3)`, so windows with ratios `a/b → t_a` and `β/α → t_b` can be
/// fed to [`build_two_ratio_system`].
pub fn normal_form_matrix(ratio_a: f64, ratio_b: f64) -> Result<Matrix2, MoranError> {
    let degenerate = MoranError::DegenerateRatios {
        first: ratio_a,
        second: ratio_b,
    };
    let source = Matrix2::from_columns((ratio_a, 1.0), (1.0, ratio_b));
    if !ratio_a.is_finite() || !ratio_b.is_finite() || source.is_singular() {
        return Err(degenerate);
    }
    let inverse = source.inverse().ok_or(degenerate)?;
    Ok(Matrix2::from_columns((2.0, 1.0), (1.0, 3.0)).compose(&inverse))
}

/// Builds the four-map system from a window whose terms approach ratio
/// `a/b = 2` and one whose terms approach `β/α = 3`.
///
/// With `η_k = δ^k/8`, blocks are selected in both windows, their sums are
/// checked against
/// `105/64 ≤ a¹_k/δ^k ≤ 153/64`, `7/8 ≤ b¹_k/δ^k ≤ 9/8`,
/// `7/8 ≤ α¹_k/δ^k ≤ 9/8`, `161/64 ≤ β¹_k/δ^k ≤ 225/64`,
/// and level `k` gets translations `δ^{1-k}·d` for `d ∈ D_k`, so that
/// `f_σ(0) = Σ_k d_{k,σ_k}`. Covering of `[-5, 5]²` is reported, not
/// enforced.
pub fn build_two_ratio_system(
    first: &SequenceWindow,
    second: &SequenceWindow,
    delta: f64,
    levels: usize,
) -> Result<TwoRatioSystem, MoranError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(MoranError::BadDelta(delta));
    }
    if levels == 0 {
        return Err(MoranError::NoLevels);
    }
    let eta: Vec<f64> = (1..=levels).map(|k| delta.powi(k as i32) / 8.0).collect();
    let sel_a = select_in(first.terms(), 2.0, delta, &eta, levels)?;
    let swapped: Vec<Complex2> = second.terms().iter().map(|c| Complex2::new(c.im, c.re)).collect();
    let sel_b = select_in(&swapped, 3.0, delta, &eta, levels)?;

    let mut digits = Vec::with_capacity(levels);
    let mut maps = Vec::with_capacity(levels);
    for k in 1..=levels {
        let scale = delta.powi(k as i32);
        let (a1, b1) = sel_a.sums[k - 1];
        let (beta1, alpha1) = sel_b.sums[k - 1];
        bracket(k, a1, 105.0 / 64.0, 153.0 / 64.0, scale, "a¹_k")?;
        bracket(k, b1, 7.0 / 8.0, 9.0 / 8.0, scale, "b¹_k")?;
        bracket(k, alpha1, 7.0 / 8.0, 9.0 / 8.0, scale, "α¹_k")?;
        bracket(k, beta1, 161.0 / 64.0, 225.0 / 64.0, scale, "β¹_k")?;
        let a = Complex2::new(a1, b1);
        let b = Complex2::new(alpha1, beta1);
        let (s, d) = (a + b, a - b);
        let five = 5.0 * scale;
        let contained = s.re >= 0.0
            && s.re <= five
            && s.im >= 0.0
            && s.im <= five
            && d.re >= 0.0
            && d.re <= five
            && d.im >= -five
            && d.im <= 0.0;
        if !contained {
            return Err(MoranError::BracketViolation {
                level: k,
                inequality: "A+B ∈ [0,5δ^k]², A-B ∈ [0,5δ^k]×[-5δ^k,0]".into(),
                value: s.max_norm().max(d.max_norm()),
            });
        }
        let set = [s, d, -s, -d];
        let lift = delta.powi(1 - k as i32);
        maps.push(set.iter().map(|&x| x.scale(lift)).collect());
        digits.push(set);
    }
    let system = MoranSystem::new(delta, maps)?;
    let covering = covering_check(&system, &TwoRatioSystem::rect());
    Ok(TwoRatioSystem {
        system,
        digits,
        first: sel_a,
        second: sel_b,
        covering,
    })
}

/// Longest synthetic window tried by [`synthetic_two_ratio_system`].
pub const MAX_SYNTHETIC_LEN: usize = 1 << 24;

/// Harmonic windows `(t_a + i)/n` and `(1 + i·t_b)/n`, mapped to the normal
/// form, with the system built from them.
#[derive(Clone, Debug)]
pub struct SyntheticPair {
    pub first: SequenceWindow,
    pub second: SequenceWindow,
    pub matrix: Matrix2,
    pub built: TwoRatioSystem,
}

/// Doubles the window length from 1024 until every level finds its block.
pub fn synthetic_two_ratio_system(
    ratio_a: f64,
    ratio_b: f64,
    delta: f64,
    levels: usize,
) -> Result<SyntheticPair, MoranError> {
    let matrix = normal_form_matrix(ratio_a, ratio_b)?;
    let window = |len: usize, dir: Complex2| {
        SequenceWindow::from_fn(len, |n| matrix.apply(dir).scale(1.0 / n as f64)).expect("finite harmonic terms")
    };
    let mut len = 1024;
    loop {
        let first = window(len, Complex2::new(ratio_a, 1.0));
        let second = window(len, Complex2::new(1.0, ratio_b));
        match build_two_ratio_system(&first, &second, delta, levels) {
            Err(MoranError::InsufficientMass { .. }) if len < MAX_SYNTHETIC_LEN => len *= 2,
            Err(e) => return Err(e),
            Ok(built) => {
                return Ok(SyntheticPair {
                    first,
                    second,
                    matrix,
                    built,
                })
            }
        }
    }
}
