//! Full shifts over a finite alphabet with Bernoulli and Markov measures.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::entropy::{entropy_of, in_good_window};
use crate::error::{Error, Result};
use crate::measure::{ProbVector, PROB_TOL};

/// Largest number of states an exhaustive cylinder scan may visit.
pub const ENUMERATION_CAP: u64 = 1 << 24;

/// Default depth cap of the sequence metric; closer points read as 0.
pub const DEFAULT_DEPTH: usize = 64;

/// Symbol set `{0, .., size-1}` with an optional separating class `P₀`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
    p0: Vec<usize>,
}

impl Alphabet {
    pub fn new(size: usize, p0: &[usize]) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(Error::DomainError(format!("alphabet size {size} not in 2..=256")));
        }
        let mut p0 = p0.to_vec();
        p0.sort_unstable();
        p0.dedup();
        if let Some(&s) = p0.iter().find(|&&s| s >= size) {
            return Err(Error::InvalidSymbol { symbol: s, alphabet: size });
        }
        if p0.len() == size {
            return Err(Error::DomainError("P0 must be a proper subset of the alphabet".into()));
        }
        Ok(Self { size, p0 })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn p0(&self) -> &[usize] {
        &self.p0
    }

    pub fn in_p0(&self, symbol: u8) -> bool {
        self.p0.binary_search(&(symbol as usize)).is_ok()
    }
}

/// Finite word over the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    symbols: Vec<u8>,
}

impl Block {
    pub fn new(symbols: Vec<u8>, alphabet_size: usize) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet_size) {
            return Err(Error::InvalidSymbol { symbol: s as usize, alphabet: alphabet_size });
        }
        Ok(Self { symbols })
    }

    /// Wraps symbols already known to be valid.
    pub(crate) fn from_raw(symbols: Vec<u8>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Block number `index` in lexicographic order of length `n` words.
    pub fn from_index(mut index: u64, n: usize, alphabet_size: usize) -> Self {
        let mut symbols = alloc::vec![0u8; n];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % alphabet_size as u64) as u8;
            index /= alphabet_size as u64;
        }
        Self { symbols }
    }
}

/// Shift-invariant measure on the full shift.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftMeasure {
    Bernoulli(ProbVector),
    Markov { stationary: ProbVector, transition: Vec<ProbVector> },
}

impl ShiftMeasure {
    pub fn bernoulli(probs: Vec<f64>) -> Result<Self> {
        let p = ProbVector::new(probs)?;
        if !(2..=256).contains(&p.len()) {
            return Err(Error::DomainError(format!("alphabet size {} not in 2..=256", p.len())));
        }
        Ok(Self::Bernoulli(p))
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Self::bernoulli(alloc::vec![1.0 / size as f64; size])
    }

    /// Markov measure with the stationary vector found by power iteration on
    /// the lazy chain `(I + P)/2`, which shares the stationary vectors of `P`
    /// and is aperiodic.
    pub fn markov(rows: Vec<Vec<f64>>) -> Result<Self> {
        let transition = Self::check_rows(rows)?;
        let l = transition.len();
        let mut pi = alloc::vec![1.0 / l as f64; l];
        for _ in 0..1_000_000 {
            let mut next = alloc::vec![0.0; l];
            for (i, row) in transition.iter().enumerate() {
                for (j, &p) in row.entries().iter().enumerate() {
                    next[j] += pi[i] * p;
                }
            }
            for (n, &x) in next.iter_mut().zip(&pi) {
                *n = 0.5 * (*n + x);
            }
            let total: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= total);
            let change: f64 = next.iter().zip(&pi).map(|(a, b)| libm::fabs(a - b)).sum();
            pi = next;
            if change < 1e-13 {
                break;
            }
        }
        Self::markov_with_stationary(pi, transition.into_iter().map(ProbVector::into_entries).collect())
    }

    pub fn markov_with_stationary(stationary: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let transition = Self::check_rows(rows)?;
        let pi = ProbVector::new(stationary)?;
        if pi.len() != transition.len() {
            return Err(Error::DimensionMismatch { left: pi.len(), right: transition.len() });
        }
        for j in 0..pi.len() {
            let image: f64 = (0..pi.len())
                .map(|i| pi.entries()[i] * transition[i].entries()[j])
                .sum();
            if libm::fabs(image - pi.entries()[j]) > PROB_TOL {
                return Err(Error::InvalidProbability(format!(
                    "vector is not stationary at state {j}: {image} vs {}",
                    pi.entries()[j]
                )));
            }
        }
        Ok(Self::Markov { stationary: pi, transition })
    }

    fn check_rows(rows: Vec<Vec<f64>>) -> Result<Vec<ProbVector>> {
        let l = rows.len();
        if !(2..=256).contains(&l) {
            return Err(Error::DomainError(format!("alphabet size {l} not in 2..=256")));
        }
        rows.into_iter()
            .map(|row| {
                if row.len() != l {
                    return Err(Error::DimensionMismatch { left: l, right: row.len() });
                }
                ProbVector::new(row)
            })
            .collect()
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            Self::Bernoulli(p) => p.len(),
            Self::Markov { stationary, .. } => stationary.len(),
        }
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self, Self::Bernoulli(_))
    }

    /// Law of the first symbol.
    pub fn initial(&self) -> &ProbVector {
        match self {
            Self::Bernoulli(p) => p,
            Self::Markov { stationary, .. } => stationary,
        }
    }

    fn step(&self, prev: u8, next: u8) -> f64 {
        match self {
            Self::Bernoulli(p) => p.entries()[next as usize],
            Self::Markov { transition, .. } => transition[prev as usize].entries()[next as usize],
        }
    }

    /// Measure of the cylinder `[b]` anchored at any coordinate.
    pub fn cylinder_measure(&self, b: &Block) -> f64 {
        let s = b.symbols();
        let Some((&first, _)) = s.split_first() else {
            return 1.0;
        };
        let mut mass = self.initial().entries()[first as usize];
        for w in s.windows(2) {
            mass *= self.step(w[0], w[1]);
        }
        mass
    }

    /// Base-2 logarithm of the cylinder measure (`-inf` for null cylinders).
    pub fn log2_cylinder_measure(&self, symbols: &[u8]) -> f64 {
        let Some((&first, _)) = symbols.split_first() else {
            return 0.0;
        };
        let mut acc = log2_or_neg_inf(self.initial().entries()[first as usize]);
        for w in symbols.windows(2) {
            acc += log2_or_neg_inf(self.step(w[0], w[1]));
        }
        acc
    }

    /// Entropy rate in bits per symbol.
    pub fn entropy_rate(&self) -> f64 {
        match self {
            Self::Bernoulli(p) => entropy_of(p.entries()),
            Self::Markov { stationary, transition } => stationary
                .entries()
                .iter()
                .zip(transition)
                .map(|(pi, row)| pi * entropy_of(row.entries()))
                .sum(),
        }
    }

    /// Whether a block's cylinder lies strictly inside the good window
    /// `(2^{-n(h+ε)}, 2^{-n(h-ε)})` with `h` the entropy rate.
    pub fn is_good_block(&self, symbols: &[u8], epsilon: f64) -> bool {
        in_good_window(
            self.log2_cylinder_measure(symbols),
            symbols.len(),
            self.entropy_rate(),
            epsilon,
        )
    }

    /// Draws a block of length `n` from the measure.
    pub fn sample_block<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Block {
        let mut symbols = Vec::with_capacity(n);
        if n == 0 {
            return Block::from_raw(symbols);
        }
        let mut cur = draw(self.initial().entries(), rng.gen());
        symbols.push(cur);
        match self {
            Self::Bernoulli(p) => {
                let cdf = cumulative(p.entries());
                for _ in 1..n {
                    symbols.push(draw_cdf(&cdf, rng.gen()));
                }
            }
            Self::Markov { transition, .. } => {
                let cdfs: Vec<Vec<f64>> = transition.iter().map(|r| cumulative(r.entries())).collect();
                for _ in 1..n {
                    cur = draw_cdf(&cdfs[cur as usize], rng.gen());
                    symbols.push(cur);
                }
            }
        }
        Block::from_raw(symbols)
    }
}

fn log2_or_neg_inf(p: f64) -> f64 {
    if p > 0.0 {
        libm::log2(p)
    } else {
        f64::NEG_INFINITY
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw_cdf(cdf: &[f64], u: f64) -> u8 {
    match cdf.iter().position(|&c| u < c) {
        Some(i) => i as u8,
        // rounding left the cdf short of 1: fall back to the last live symbol
        None => {
            let mut last = cdf.len() - 1;
            while last > 0 && cdf[last] == cdf[last - 1] {
                last -= 1;
            }
            last as u8
        }
    }
}

fn draw(p: &[f64], u: f64) -> u8 {
    draw_cdf(&cumulative(p), u)
}

/// Number of blocks of length `n`, or an error above [`ENUMERATION_CAP`].
pub fn enumeration_size(alphabet_size: usize, n: usize) -> Result<u64> {
    let states = libm::pow(alphabet_size as f64, n as f64);
    if states > ENUMERATION_CAP as f64 {
        return Err(Error::EnumerationCapExceeded { states, cap: ENUMERATION_CAP });
    }
    Ok((alphabet_size as u64).pow(n as u32))
}

/// Visits every length-`n` block in lexicographic order together with the
/// base-2 log of its cylinder measure.
pub fn for_each_cylinder(
    m: &ShiftMeasure,
    n: usize,
    mut visit: impl FnMut(&[u8], f64),
) -> Result<()> {
    enumeration_size(m.alphabet_size(), n)?;
    let l = m.alphabet_size();
    let mut word = alloc::vec![0u8; n];
    // prefix[i] = log2 measure of word[..i]
    let mut prefix = alloc::vec![0.0f64; n + 1];
    fn rec(
        m: &ShiftMeasure,
        l: usize,
        depth: usize,
        word: &mut [u8],
        prefix: &mut [f64],
        visit: &mut dyn FnMut(&[u8], f64),
    ) {
        if depth == word.len() {
            visit(word, prefix[depth]);
            return;
        }
        for s in 0..l as u8 {
            word[depth] = s;
            let step = if depth == 0 {
                m.initial().entries()[s as usize]
            } else {
                m.step(word[depth - 1], s)
            };
            prefix[depth + 1] = prefix[depth] + log2_or_neg_inf(step);
            rec(m, l, depth + 1, word, prefix, visit);
        }
    }
    rec(m, l, 0, &mut word, &mut prefix, &mut visit);
    Ok(())
}

/// Entropy of the partition into length-`n` cylinders, by enumeration.
pub fn block_entropy(m: &ShiftMeasure, n: usize) -> Result<f64> {
    let mut h = 0.0;
    for_each_cylinder(m, n, |_, lg| {
        if lg.is_finite() {
            h -= libm::exp2(lg) * lg;
        }
    })?;
    Ok(h)
}

/// Mass of length-`n` cylinders inside the Shannon–McMillan window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmMass {
    pub mass: f64,
    pub holds: bool,
}

impl SmMass {
    fn new(mass: f64, epsilon: f64) -> Self {
        Self { mass, holds: mass > 1.0 - epsilon }
    }
}

fn check_sm_args(n: usize, epsilon: f64) -> Result<()> {
    if n == 0 || !(epsilon > 0.0) {
        return Err(Error::DomainError(format!("need n >= 1 and epsilon > 0 (got {n}, {epsilon})")));
    }
    Ok(())
}

/// Exhaustive scan over all `l^n` cylinders.
pub fn sm_mass_enumerated(m: &ShiftMeasure, n: usize, epsilon: f64) -> Result<SmMass> {
    check_sm_args(n, epsilon)?;
    let h = m.entropy_rate();
    let mut mass = 0.0;
    for_each_cylinder(m, n, |_, lg| {
        if in_good_window(lg, n, h, epsilon) {
            mass += libm::exp2(lg);
        }
    })?;
    Ok(SmMass::new(mass, epsilon))
}

/// Bernoulli shortcut: sum over symbol-count compositions weighted by
/// multinomial coefficients.
pub fn sm_mass_multinomial(m: &ShiftMeasure, n: usize, epsilon: f64) -> Result<SmMass> {
    check_sm_args(n, epsilon)?;
    let ShiftMeasure::Bernoulli(p) = m else {
        return Err(Error::DomainError("multinomial shortcut needs a Bernoulli measure".into()));
    };
    let h = m.entropy_rate();
    let logp: Vec<f64> = p.entries().iter().map(|&x| log2_or_neg_inf(x)).collect();
    let log2_fact = |k: usize| libm::lgamma(k as f64 + 1.0) / core::f64::consts::LN_2;
    let mut counts = alloc::vec![0usize; logp.len()];
    let mut mass = 0.0;
    fn rec(
        slot: usize,
        left: usize,
        counts: &mut [usize],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if slot == counts.len() - 1 {
            counts[slot] = left;
            visit(counts);
            return;
        }
        for k in 0..=left {
            counts[slot] = k;
            rec(slot + 1, left - k, counts, visit);
        }
    }
    rec(0, n, &mut counts, &mut |c: &[usize]| {
        let mut lg = 0.0;
        for (&k, &lp) in c.iter().zip(&logp) {
            if k > 0 {
                lg += k as f64 * lp;
            }
        }
        if in_good_window(lg, n, h, epsilon) {
            let coef = log2_fact(n) - c.iter().map(|&k| log2_fact(k)).sum::<f64>();
            mass += libm::exp2(coef + lg);
        }
    });
    Ok(SmMass::new(mass, epsilon))
}

/// Shannon–McMillan mass: multinomial path for Bernoulli measures,
/// enumeration otherwise.
pub fn sm_mass(m: &ShiftMeasure, n: usize, epsilon: f64) -> Result<SmMass> {
    if m.is_bernoulli() {
        sm_mass_multinomial(m, n, epsilon)
    } else {
        sm_mass_enumerated(m, n, epsilon)
    }
}

/// A one-sided sequence materialized on coordinates `0..horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicPoint {
    symbols: Vec<u8>,
}

impl SymbolicPoint {
    pub fn from_symbols(symbols: Vec<u8>) -> Self {
        Self { symbols }
    }

    /// Materializes `horizon` coordinates of a deterministic generator.
    pub fn from_fn(horizon: usize, f: impl FnMut(usize) -> u8) -> Self {
        Self { symbols: (0..horizon).map(f).collect() }
    }

    pub fn horizon(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn symbol(&self, at: usize) -> Result<u8> {
        self.symbols
            .get(at)
            .copied()
            .ok_or(Error::HorizonExceeded { requested: at, horizon: self.horizon() })
    }

    /// Left shift: coordinate `i` of the result is coordinate `i+1` here.
    pub fn shifted(&self) -> Self {
        Self { symbols: self.symbols.get(1..).unwrap_or(&[]).to_vec() }
    }
}

/// `2^{-j}` for the first `j < depth` with `x[at+j] != y[at+j]`, or 0 when
/// the points agree on `at..at+depth`.
pub fn sequence_distance(x: &SymbolicPoint, y: &SymbolicPoint, at: usize, depth: usize) -> Result<f64> {
    for j in 0..depth {
        if x.symbol(at + j)? != y.symbol(at + j)? {
            return Ok(libm::exp2(-(j as f64)));
        }
    }
    Ok(0.0)
}

/// Fraction of coordinates in `[a, b)` whose symbol lies in `symbols`.
pub fn visit_frequency(x: &SymbolicPoint, symbols: &[usize], a: usize, b: usize) -> Result<f64> {
    if b > x.horizon() {
        return Err(Error::HorizonExceeded { requested: b.saturating_sub(1), horizon: x.horizon() });
    }
    if b <= a {
        return Ok(0.0);
    }
    let hits = x.symbols[a..b]
        .iter()
        .filter(|&&s| symbols.contains(&(s as usize)))
        .count();
    Ok(hits as f64 / (b - a) as f64)
}
