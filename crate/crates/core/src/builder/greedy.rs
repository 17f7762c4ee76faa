use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::Rng;

use super::hamming::{hamming_count_capped, separation_count};
use super::tree::Kappa;
use crate::entropy::{beta_constant, in_good_window};
use crate::error::{Error, Result};
use crate::shift::{enumeration_size, for_each_cylinder, Block, ShiftMeasure};

/// Default number of blocks drawn per family when enumeration is too large.
pub const DEFAULT_CANDIDATES: usize = 32;

/// Counting budget of one greedy level, in log2 units.
///
/// Each of the `2^{k-1}` families offers at least `2^{n·h'}` candidates;
/// the sweep removes at most `2^k` balls of size `2^{n·β(δ)}` from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyBudget {
    pub level: usize,
    pub n: usize,
    pub log2_candidates: f64,
    pub log2_ball: f64,
    pub log2_removed: f64,
}

impl GreedyBudget {
    pub fn new(level: usize, n: usize, delta: f64, h_prime: f64, l: usize) -> Result<Self> {
        let beta = beta_constant(delta, l)?;
        let log2_ball = n as f64 * beta;
        Ok(Self {
            level,
            n,
            log2_candidates: n as f64 * h_prime,
            log2_ball,
            log2_removed: level as f64 + log2_ball,
        })
    }

    pub fn feasible(&self) -> bool {
        self.log2_candidates > self.log2_removed
    }
}

/// Good blocks of length `n` for `m`, in a deterministic order.
///
/// When `l^n` is within the enumeration cap every good block passing
/// `accept` is listed lexicographically; otherwise `draws` blocks are
/// sampled from `m` and the distinct good ones are kept in draw order.
pub fn good_candidates<R: Rng + ?Sized>(
    m: &ShiftMeasure,
    n: usize,
    epsilon: f64,
    draws: usize,
    rng: &mut R,
) -> Result<Vec<Block>> {
    good_candidates_with(m, n, epsilon, draws, rng, |_| true)
}

pub fn good_candidates_with<R: Rng + ?Sized>(
    m: &ShiftMeasure,
    n: usize,
    epsilon: f64,
    draws: usize,
    rng: &mut R,
    accept: impl Fn(&[u8]) -> bool,
) -> Result<Vec<Block>> {
    let h = m.entropy_rate();
    let mut out = Vec::new();
    if is_enumerable(m, n) {
        for_each_cylinder(m, n, |word, _| {
            if accept(word) && m.is_good_block(word, epsilon) {
                out.push(Block::from_raw(word.to_vec()));
            }
        })?;
    } else {
        let mut seen = BTreeSet::new();
        for _ in 0..draws {
            let b = m.sample_block(n, rng);
            if seen.contains(b.symbols()) {
                continue;
            }
            let lg = m.log2_cylinder_measure(b.symbols());
            if accept(b.symbols()) && in_good_window(lg, n, h, epsilon) {
                seen.insert(b.symbols().to_vec());
                out.push(b);
            } else {
                seen.insert(b.symbols().to_vec());
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyCandidateSet { window_len: n });
    }
    Ok(out)
}

pub(crate) fn is_enumerable(m: &ShiftMeasure, n: usize) -> bool {
    enumeration_size(m.alphabet_size(), n).is_ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    /// Two chosen children per parent.
    pub children: BTreeMap<Kappa, [Block; 2]>,
    /// Candidates removed from each family over the whole sweep.
    pub eliminated: BTreeMap<Kappa, usize>,
    /// Disagreement count below which a candidate is removed.
    pub radius: usize,
}

/// Picks two children per family, visiting parents in key order.
///
/// After each pick every surviving candidate, in every family, that
/// disagrees with the pick in fewer than `⌈3δn⌉` positions (at least 1) is
/// removed. A family left without a surviving candidate is reported as
/// exhausted.
pub fn greedy_two_children(
    families: &BTreeMap<Kappa, Vec<Block>>,
    delta: f64,
    n: usize,
) -> Result<GreedyOutcome> {
    for blocks in families.values() {
        if let Some(b) = blocks.iter().find(|b| b.len() != n) {
            return Err(Error::LengthMismatch { left: b.len(), right: n });
        }
    }
    let radius = separation_count(n, delta);
    let keys: Vec<&Kappa> = families.keys().collect();
    let lists: Vec<&Vec<Block>> = families.values().collect();
    let mut alive: Vec<Vec<bool>> = lists.iter().map(|l| alloc::vec![true; l.len()]).collect();
    let mut cursor = alloc::vec![0usize; lists.len()];
    let mut eliminated = alloc::vec![0usize; lists.len()];
    let mut children = BTreeMap::new();

    for f in 0..lists.len() {
        let mut picked: Vec<Block> = Vec::with_capacity(2);
        for _ in 0..2 {
            while cursor[f] < lists[f].len() && !alive[f][cursor[f]] {
                cursor[f] += 1;
            }
            let Some(pick) = lists[f].get(cursor[f]).cloned() else {
                return Err(Error::FamilyExhausted { parent: keys[f].to_string() });
            };
            for g in 0..lists.len() {
                for (c, block) in lists[g].iter().enumerate() {
                    if alive[g][c] && hamming_count_capped(block.symbols(), pick.symbols(), radius) < radius {
                        alive[g][c] = false;
                        eliminated[g] += 1;
                    }
                }
            }
            picked.push(pick);
        }
        let second = picked.pop().unwrap();
        let first = picked.pop().unwrap();
        children.insert(keys[f].clone(), [first, second]);
    }

    Ok(GreedyOutcome {
        children,
        eliminated: keys.into_iter().cloned().zip(eliminated).collect(),
        radius,
    })
}
