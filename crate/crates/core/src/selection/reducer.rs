//! Buffered reduction of a stream of unit-norm terms into at most five
//! pending super-terms.
//!
//! Each super-term is a node in a forest whose edges carry the sign of a
//! child relative to its parent; an original term's final sign is the
//! product of the edge signs up to its root times the root's own sign.
//! Because only whole super-terms are ever combined, the signs inside a
//! super-term are fixed once it exists. When term `k` arrives the buffer
//! splits `1..k` into at most five consecutive super-terms of norm at most 1,
//! so `‖S_k‖ ≤ 5` whatever signs the roots later receive.

use serde::{Deserialize, Serialize};

use super::{combine5_unchecked, pair_sign, CombineBranch, SelectionResult};
use crate::complex::Complex2;
use crate::series::{max_prefix_norm, Sign, SequenceWindow, SignVector};

const ROOT: u32 = u32::MAX;

#[derive(Default)]
struct Forest {
    parent: Vec<u32>,
    rel: Vec<Sign>,
}

impl Forest {
    fn with_leaves(n: usize) -> Self {
        Forest {
            parent: vec![ROOT; n],
            rel: vec![Sign::Plus; n],
        }
    }

    fn node(&mut self) -> u32 {
        self.parent.push(ROOT);
        self.rel.push(Sign::Plus);
        (self.parent.len() - 1) as u32
    }

    fn attach(&mut self, child: u32, parent: u32, sign: Sign) {
        self.parent[child as usize] = parent;
        self.rel[child as usize] = sign;
    }

    /// Signs of the first `leaves` nodes given each root's sign. Parents are
    /// always created after their children, so one descending pass suffices.
    fn resolve(&self, leaves: usize, roots: &[(u32, Sign)]) -> SignVector {
        let mut sign = vec![Sign::Plus; self.parent.len()];
        for &(id, s) in roots {
            sign[id as usize] = s;
        }
        for id in (0..self.parent.len()).rev() {
            let p = self.parent[id];
            if p != ROOT {
                sign[id] = self.rel[id] * sign[p as usize];
            }
        }
        sign.truncate(leaves);
        SignVector(sign)
    }
}

/// Pending super-terms, values divided by `scale`.
struct Buffer {
    items: Vec<(u32, Complex2)>,
    scale: f64,
}

impl Buffer {
    fn new(scale: f64) -> Self {
        Buffer {
            items: Vec::with_capacity(6),
            scale,
        }
    }

    fn push(&mut self, forest: &mut Forest, node: u32, value: Complex2) {
        self.items.push((node, value.scale(1.0 / self.scale)));
        self.reduce(forest);
    }

    fn merge(&mut self, forest: &mut Forest, k: usize, s: Sign) {
        let (left, lv) = self.items[k];
        let (right, rv) = self.items[k + 1];
        let p = forest.node();
        forest.attach(left, p, Sign::Plus);
        forest.attach(right, p, s);
        self.items.splice(k..k + 2, [(p, lv + s * rv)]);
    }

    fn first_pairable(&self, limit: usize) -> Option<(usize, Sign)> {
        let upto = self.items.len().min(limit);
        (0..upto.saturating_sub(1))
            .find_map(|k| pair_sign(self.items[k].1, self.items[k + 1].1).map(|s| (k, s)))
    }

    /// Merges the earliest pairable adjacent pair among the first five
    /// super-terms, re-scanning after each merge; a full buffer of five
    /// with no pairable pair goes through the combination step.
    fn reduce(&mut self, forest: &mut Forest) {
        loop {
            if let Some((k, s)) = self.first_pairable(5) {
                self.merge(forest, k, s);
                continue;
            }
            if self.items.len() < 5 {
                return;
            }
            let five: [Complex2; 5] = std::array::from_fn(|i| self.items[i].1);
            let out = combine5_unchecked(&five);
            let p = forest.node();
            let (range, value) = match out.branch {
                CombineBranch::U => (0..4, out.u),
                CombineBranch::V => (1..5, out.v),
            };
            for i in range.clone() {
                forest.attach(self.items[i].0, p, out.signs.0[i]);
            }
            self.items.splice(range, [(p, value)]);
        }
    }

    /// Merges remaining pairable pairs anywhere in the buffer.
    fn settle(&mut self, forest: &mut Forest) {
        while let Some((k, s)) = self.first_pairable(usize::MAX) {
            self.merge(forest, k, s);
        }
    }
}

/// Sign patterns for `r` roots in lexicographic order, `+1` first.
fn patterns(r: usize) -> impl Iterator<Item = Vec<Sign>> {
    (0u32..1 << r).map(move |bits| {
        (0..r)
            .map(|j| if bits >> (r - 1 - j) & 1 == 1 { Sign::Minus } else { Sign::Plus })
            .collect()
    })
}

fn result_for(window: &SequenceWindow, signs: SignVector) -> SelectionResult {
    let prefix_bound = max_prefix_norm(window, &signs).expect("lengths agree");
    let sum = window.signed_sum(&signs).expect("lengths agree");
    SelectionResult {
        signs,
        prefix_bound,
        residual: None,
        sum,
    }
}

/// Picks root signs minimizing `objective`, ties to the earliest pattern.
fn choose_roots(
    window: &SequenceWindow,
    forest: &Forest,
    roots: &[u32],
    objective: impl Fn(&SelectionResult) -> f64,
) -> SelectionResult {
    let mut best: Option<(f64, SelectionResult)> = None;
    for pattern in patterns(roots.len()) {
        let assignment: Vec<(u32, Sign)> = roots.iter().copied().zip(pattern).collect();
        let res = result_for(window, forest.resolve(window.len(), &assignment));
        let score = objective(&res);
        if best.as_ref().is_none_or(|b| score < b.0) {
            best = Some((score, res));
        }
    }
    best.expect("at least the empty pattern").1
}

fn unit_scale(sup: f64) -> f64 {
    if sup > 0.0 {
        sup
    } else {
        1.0
    }
}

/// Signs with every prefix sum of norm at most `5·sup‖c_n‖`.
///
/// Terms are divided by the sup-norm and streamed through the buffer; the
/// at most four final roots get the signs minimizing the largest prefix.
pub fn bounded_signs(window: &SequenceWindow) -> SelectionResult {
    let n = window.len();
    let mut forest = Forest::with_leaves(n);
    let mut buffer = Buffer::new(unit_scale(window.sup_norm()));
    for (i, &c) in window.terms().iter().enumerate() {
        buffer.push(&mut forest, i as u32, c);
    }
    buffer.settle(&mut forest);
    let roots: Vec<u32> = buffer.items.iter().map(|it| it.0).collect();
    choose_roots(window, &forest, &roots, |r| r.prefix_bound)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    /// Zero-based half-open position range.
    pub start: usize,
    pub end: usize,
    pub sup: f64,
    /// `max_k ‖Σ_{start ≤ n ≤ k} x_n c_n‖` over the block.
    pub internal_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub result: SelectionResult,
    pub blocks: Vec<BlockReport>,
}

/// Block ends `N_k = 1 + max{n : ‖c_n‖ > 2^{-k}·sup}`, so block `k` has sup
/// at most `2^{1-k}·sup`. Empty blocks are dropped.
fn halving_blocks(window: &SequenceWindow, sup: f64) -> Vec<(usize, usize)> {
    let terms = window.terms();
    let n = terms.len();
    let mut blocks = Vec::new();
    let mut start = 0;
    let mut threshold = sup;
    while start < n {
        threshold *= 0.5;
        let end = match terms[start..].iter().rposition(|c| c.max_norm() > threshold) {
            Some(p) => start + p + 1,
            None if threshold == 0.0 => n,
            None => continue,
        };
        blocks.push((start, end));
        start = end;
    }
    blocks
}

/// Signs whose total has norm at most `5·sup‖c_n‖`.
///
/// The window is cut into blocks whose sup-norms halve; each block is
/// reduced at its own scale, and the block roots are reduced once more at
/// the global scale, the final roots taking the signs that minimize the
/// total. Inside every block the prefix sums stay within five times the
/// block's sup-norm.
pub fn tail_control(window: &SequenceWindow) -> TailReport {
    let n = window.len();
    let sup = window.sup_norm();
    let terms = window.terms();
    let mut forest = Forest::with_leaves(n);
    let blocks = if sup > 0.0 {
        halving_blocks(window, sup)
    } else {
        vec![(0, n)]
    };

    let mut global = Buffer::new(unit_scale(sup));
    let mut block_sups = Vec::with_capacity(blocks.len());
    for &(start, end) in &blocks {
        let block_sup = terms[start..end].iter().map(|c| c.max_norm()).fold(0.0, f64::max);
        block_sups.push(block_sup);
        let mut local = Buffer::new(unit_scale(block_sup));
        for (i, &c) in terms[start..end].iter().enumerate() {
            local.push(&mut forest, (start + i) as u32, c);
        }
        local.settle(&mut forest);
        for (node, value) in std::mem::take(&mut local.items) {
            global.push(&mut forest, node, value.scale(local.scale));
        }
    }
    global.settle(&mut forest);
    let roots: Vec<u32> = global.items.iter().map(|it| it.0).collect();
    let result = choose_roots(window, &forest, &roots, |r| r.sum.max_norm());

    let blocks = blocks
        .iter()
        .zip(block_sups)
        .map(|(&(start, end), sup)| {
            let mut acc = Complex2::ZERO;
            let mut internal = 0.0f64;
            for (c, s) in terms[start..end].iter().zip(&result.signs.0[start..end]) {
                acc += *s * *c;
                internal = internal.max(acc.max_norm());
            }
            BlockReport {
                start,
                end,
                sup,
                internal_bound: internal,
            }
        })
        .collect();
    TailReport { result, blocks }
}
