use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::greedy::{good_candidates_with, greedy_two_children, is_enumerable, GreedyBudget, DEFAULT_CANDIDATES};
use super::hamming::{hamming_count_slices, separation_count};
use super::schedule::IntervalSchedule;
use crate::entropy::beta_constant;
use crate::error::{Error, Result};
use crate::shift::{Alphabet, Block, ShiftMeasure, SymbolicPoint};

/// Finite binary address of a tree node; the empty address is the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Kappa(Vec<u8>);

impl Kappa {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Invalid("address bits must be 0 or 1".into()));
        }
        Ok(Self(bits.to_vec()))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Kappa {
        Kappa(self.0[..len].to_vec())
    }

    pub fn child(&self, bit: u8) -> Kappa {
        let mut v = self.0.clone();
        v.push(bit & 1);
        Kappa(v)
    }

    /// First position where two addresses differ.
    pub fn first_difference(&self, other: &Kappa) -> Option<usize> {
        self.0.iter().zip(&other.0).position(|(a, b)| a != b)
    }

    /// All addresses of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> Vec<Kappa> {
        (0..1u64 << len)
            .map(|i| Kappa((0..len).map(|j| ((i >> (len - 1 - j)) & 1) as u8).collect()))
            .collect()
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for Kappa {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::Invalid(format!("address {s:?} is not a binary string"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Kappa)
    }
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub measure: ShiftMeasure,
    /// Symbols whose visits are limited to `δ·n` per tree block.
    pub p0: Vec<usize>,
    pub delta: f64,
    pub h_prime: f64,
    pub epsilon: f64,
    pub schedule: IntervalSchedule,
    pub levels: usize,
    pub seed: u64,
    /// Blocks drawn per family when a window is too long to enumerate.
    pub candidates: usize,
}

impl BuildConfig {
    pub fn new(measure: ShiftMeasure, delta: f64, h_prime: f64, schedule: IntervalSchedule, levels: usize) -> Self {
        Self {
            measure,
            p0: Vec::new(),
            delta,
            h_prime,
            epsilon: 0.1,
            schedule,
            levels,
            seed: 0,
            candidates: DEFAULT_CANDIDATES,
        }
    }
}

/// Checks the parameters and returns the greedy budget of each level
/// `1..=K`.
pub fn check_parameters(config: &BuildConfig) -> Result<Vec<GreedyBudget>> {
    let l = config.measure.alphabet_size();
    Alphabet::new(l, &config.p0)?;
    let h = config.measure.entropy_rate();
    let beta = beta_constant(config.delta, l)
        .map_err(|_| Error::InfeasibleParameters(format!("3δ = {:.6} > 1/2 (δ = {})", 3.0 * config.delta, config.delta)))?;
    if !(config.epsilon > 0.0) {
        return Err(Error::InfeasibleParameters(format!("epsilon = {} must be positive", config.epsilon)));
    }
    if !(beta < config.h_prime && config.h_prime < h) {
        return Err(Error::InfeasibleParameters(format!(
            "need beta(delta) < h' < h, got {beta:.6} < {:.6} < {h:.6}",
            config.h_prime
        )));
    }
    let want = 2 * config.levels + 1;
    if config.schedule.len() != want {
        return Err(Error::InfeasibleParameters(format!(
            "schedule has {} windows, {want} needed for {} levels",
            config.schedule.len(),
            config.levels
        )));
    }
    let mut budgets = Vec::with_capacity(config.levels);
    for k in 1..=config.levels {
        let n = config.schedule.level_window(k).len();
        let b = GreedyBudget::new(k, n, config.delta, config.h_prime, l)?;
        if !b.feasible() {
            return Err(Error::InfeasibleParameters(format!(
                "level {k}: n·h' = {:.3} does not exceed k + n·beta = {:.3} (window length {n})",
                b.log2_candidates, b.log2_removed
            )));
        }
        budgets.push(b);
    }
    Ok(budgets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub level: usize,
    pub window_len: usize,
    pub enumerated: bool,
    pub family_sizes: Vec<usize>,
    pub eliminated: Vec<usize>,
    pub radius: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildStats {
    pub budgets: Vec<GreedyBudget>,
    pub levels: Vec<LevelStats>,
}

pub fn build_tree(config: &BuildConfig) -> Result<ScrambledTree> {
    build_tree_detailed(config).map(|(t, _)| t)
}

/// Builds the tree: even windows are filled with one sample each, the root
/// is the first good root-window candidate, and each level is chosen by the
/// greedy two-children sweep. One ChaCha8 stream seeded from
/// `config.seed` drives every random choice.
pub fn build_tree_detailed(config: &BuildConfig) -> Result<(ScrambledTree, BuildStats)> {
    let budgets = check_parameters(config)?;
    let m = &config.measure;
    let alphabet = Alphabet::new(m.alphabet_size(), &config.p0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut even_content = BTreeMap::new();
    for k in 1..=config.levels {
        let w = config.schedule.window(2 * k);
        even_content.insert(2 * k, m.sample_block(w.len(), &mut rng));
    }

    let delta = config.delta;
    let accept = |n: usize| {
        let cap = libm::floor(delta * n as f64) as usize;
        let alphabet = &alphabet;
        move |word: &[u8]| {
            alphabet.p0().is_empty() || word.iter().filter(|&&s| alphabet.in_p0(s)).count() <= cap
        }
    };

    let n1 = config.schedule.window(1).len();
    let roots = good_candidates_with(m, n1, config.epsilon, config.candidates, &mut rng, accept(n1))?;
    let mut nodes = BTreeMap::new();
    nodes.insert(Kappa::root(), roots[0].clone());

    let mut level_stats = Vec::with_capacity(config.levels);
    for k in 1..=config.levels {
        let n = config.schedule.level_window(k).len();
        let parents = Kappa::all_of_length(k - 1);
        let enumerated = is_enumerable(m, n);
        let mut families = BTreeMap::new();
        if enumerated {
            let shared = good_candidates_with(m, n, config.epsilon, config.candidates, &mut rng, accept(n))?;
            for p in &parents {
                families.insert(p.clone(), shared.clone());
            }
        } else {
            for p in &parents {
                let own = good_candidates_with(m, n, config.epsilon, config.candidates, &mut rng, accept(n))?;
                families.insert(p.clone(), own);
            }
        }
        let outcome = greedy_two_children(&families, delta, n)?;
        level_stats.push(LevelStats {
            level: k,
            window_len: n,
            enumerated,
            family_sizes: families.values().map(Vec::len).collect(),
            eliminated: outcome.eliminated.values().copied().collect(),
            radius: outcome.radius,
        });
        for (parent, [c0, c1]) in outcome.children {
            nodes.insert(parent.child(0), c0);
            nodes.insert(parent.child(1), c1);
        }
    }

    let tree = ScrambledTree {
        alphabet,
        measure: config.measure.clone(),
        delta,
        h_prime: config.h_prime,
        epsilon: config.epsilon,
        seed: config.seed,
        schedule: config.schedule.clone(),
        levels: config.levels,
        even_content,
        nodes,
    };
    Ok((tree, BuildStats { budgets, levels: level_stats }))
}

/// A finished construction: a block for every address of length `≤ K`
/// plus shared content for the even windows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScrambledTree {
    alphabet: Alphabet,
    measure: ShiftMeasure,
    delta: f64,
    h_prime: f64,
    epsilon: f64,
    seed: u64,
    schedule: IntervalSchedule,
    levels: usize,
    even_content: BTreeMap<usize, Block>,
    nodes: BTreeMap<Kappa, Block>,
}

#[derive(Debug, Clone)]
pub struct TreeParts {
    pub alphabet: Alphabet,
    pub measure: ShiftMeasure,
    pub delta: f64,
    pub h_prime: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub schedule: IntervalSchedule,
    pub levels: usize,
    pub even_content: BTreeMap<usize, Block>,
    pub nodes: BTreeMap<Kappa, Block>,
}

impl ScrambledTree {
    /// Reassembles a tree, checking only its shape: window count, the set
    /// of addresses and even windows, and block lengths and symbols.
    pub fn from_parts(parts: TreeParts) -> Result<Self> {
        let l = parts.alphabet.size();
        if parts.measure.alphabet_size() != l {
            return Err(Error::DimensionMismatch { left: parts.measure.alphabet_size(), right: l });
        }
        if parts.schedule.len() != 2 * parts.levels + 1 {
            return Err(Error::Invalid(format!(
                "schedule has {} windows, expected {}",
                parts.schedule.len(),
                2 * parts.levels + 1
            )));
        }
        let even: Vec<usize> = (1..=parts.levels).map(|k| 2 * k).collect();
        if parts.even_content.keys().copied().collect::<Vec<_>>() != even {
            return Err(Error::Invalid("even-window content does not match the schedule".into()));
        }
        for (&k, b) in &parts.even_content {
            check_block(b, parts.schedule.window(k).len(), l, &format!("even window {k}"))?;
        }
        let expected = (0..=parts.levels).map(|k| 1usize << k).sum::<usize>();
        if parts.nodes.len() != expected || parts.nodes.keys().any(|k| k.len() > parts.levels) {
            return Err(Error::Invalid(format!(
                "tree must hold every address of length <= {}",
                parts.levels
            )));
        }
        for (kappa, b) in &parts.nodes {
            let n = parts.schedule.level_window(kappa.len()).len();
            check_block(b, n, l, &format!("node {kappa:?}"))?;
        }
        Ok(Self {
            alphabet: parts.alphabet,
            measure: parts.measure,
            delta: parts.delta,
            h_prime: parts.h_prime,
            epsilon: parts.epsilon,
            seed: parts.seed,
            schedule: parts.schedule,
            levels: parts.levels,
            even_content: parts.even_content,
            nodes: parts.nodes,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn measure(&self) -> &ShiftMeasure {
        &self.measure
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn h_prime(&self) -> f64 {
        self.h_prime
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn schedule(&self) -> &IntervalSchedule {
        &self.schedule
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn even_content(&self) -> &BTreeMap<usize, Block> {
        &self.even_content
    }

    pub fn nodes(&self) -> &BTreeMap<Kappa, Block> {
        &self.nodes
    }

    pub fn node(&self, kappa: &Kappa) -> Option<&Block> {
        self.nodes.get(kappa)
    }

    pub fn leaves(&self) -> Vec<Kappa> {
        Kappa::all_of_length(self.levels)
    }

    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    /// Mutable access to a stored block, for fault injection.
    pub fn node_mut(&mut self, kappa: &Kappa) -> Option<&mut Block> {
        self.nodes.get_mut(kappa)
    }

    /// The point of leaf `kappa` on coordinates `0..horizon`: window
    /// `2i+1` holds the block of `kappa`'s length-`i` prefix and each even
    /// window holds the shared content.
    pub fn assemble_point(&self, kappa: &Kappa, horizon: usize) -> Result<SymbolicPoint> {
        if kappa.len() != self.levels {
            return Err(Error::Invalid(format!(
                "address {kappa} has length {}, the tree has {} levels",
                kappa.len(),
                self.levels
            )));
        }
        if horizon > self.horizon() {
            return Err(Error::HorizonExceeded { requested: horizon, horizon: self.horizon() });
        }
        let mut symbols = Vec::with_capacity(horizon);
        for k in 1..=self.schedule.len() {
            if symbols.len() >= horizon {
                break;
            }
            let block = if k % 2 == 1 {
                &self.nodes[&kappa.prefix((k - 1) / 2)]
            } else {
                &self.even_content[&k]
            };
            symbols.extend_from_slice(block.symbols());
        }
        symbols.truncate(horizon);
        Ok(SymbolicPoint::from_symbols(symbols))
    }

    /// Checks separation between every pair of same-level blocks and the
    /// goodness of every stored block.
    pub fn audit(&self) -> TreeAudit {
        let mut violations = Vec::new();
        let mut min_distance: Option<f64> = None;
        for level in 1..=self.levels {
            let n = self.schedule.level_window(level).len();
            let required = separation_count(n, self.delta);
            let addrs = Kappa::all_of_length(level);
            for i in 0..addrs.len() {
                for j in i + 1..addrs.len() {
                    let a = self.nodes[&addrs[i]].symbols();
                    let b = self.nodes[&addrs[j]].symbols();
                    let count = hamming_count_slices(a, b);
                    let d = count as f64 / n as f64;
                    min_distance = Some(min_distance.map_or(d, |m| m.min(d)));
                    if count < required {
                        violations.push(SeparationViolation {
                            level,
                            a: addrs[i].clone(),
                            b: addrs[j].clone(),
                            count,
                            required,
                        });
                    }
                }
            }
        }
        let not_good = self
            .nodes
            .iter()
            .filter(|(_, b)| !self.measure.is_good_block(b.symbols(), self.epsilon))
            .map(|(k, _)| k.clone())
            .collect();
        TreeAudit { min_distance, violations, not_good }
    }
}

fn check_block(b: &Block, n: usize, l: usize, what: &str) -> Result<()> {
    if b.len() != n {
        return Err(Error::Invalid(format!("{what} has length {}, expected {n}", b.len())));
    }
    if let Some(&s) = b.symbols().iter().find(|&&s| s as usize >= l) {
        return Err(Error::InvalidSymbol { symbol: s as usize, alphabet: l });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationViolation {
    pub level: usize,
    pub a: Kappa,
    pub b: Kappa,
    pub count: usize,
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeAudit {
    /// Smallest normalized distance between same-level blocks.
    pub min_distance: Option<f64>,
    pub violations: Vec<SeparationViolation>,
    pub not_good: Vec<Kappa>,
}

impl TreeAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.not_good.is_empty()
    }
}

impl fmt::Display for SeparationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {}: {} vs {} differ in {} positions, need {}",
            self.level, self.a, self.b, self.count, self.required
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::schedule::make_schedule;
    use alloc::string::ToString;
    use alloc::vec;

    fn small_config(levels: usize, seed: u64) -> BuildConfig {
        let mut c = BuildConfig::new(
            ShiftMeasure::uniform(2).unwrap(),
            0.05,
            0.9,
            make_schedule(16, 2, levels).unwrap(),
            levels,
        );
        c.seed = seed;
        c
    }

    #[test]
    fn kappa_round_trip() {
        let k: Kappa = "0110".parse().unwrap();
        assert_eq!(k.to_string(), "0110");
        assert_eq!(k.prefix(2).to_string(), "01");
        assert_eq!(Kappa::root().to_string(), "");
        assert!("012".parse::<Kappa>().is_err());
        let all = Kappa::all_of_length(2);
        assert_eq!(all.iter().map(|k| k.to_string()).collect::<Vec<_>>(), ["00", "01", "10", "11"]);
        assert_eq!(k.first_difference(&"0100".parse().unwrap()), Some(2));
    }

    #[test]
    fn single_root_tree() {
        let t = build_tree(&small_config(0, 0)).unwrap();
        assert_eq!(t.nodes().len(), 1);
        let p = t.assemble_point(&Kappa::root(), 16).unwrap();
        assert_eq!(p.symbols(), t.node(&Kappa::root()).unwrap().symbols());
    }

    #[test]
    fn one_level_tree() {
        let t = build_tree(&small_config(1, 5)).unwrap();
        assert_eq!(t.nodes().len(), 3);
        let audit = t.audit();
        assert!(audit.passed(), "{audit:?}");
        assert!(audit.min_distance.unwrap() >= 0.15);
        let x = t.assemble_point(&"0".parse().unwrap(), 320).unwrap();
        let y = t.assemble_point(&"1".parse().unwrap(), 320).unwrap();
        assert_eq!(x.symbols()[..64], y.symbols()[..64]);
        assert_ne!(x.symbols()[64..], y.symbols()[64..]);
        assert!(matches!(t.assemble_point(&"0".parse().unwrap(), 321), Err(Error::HorizonExceeded { .. })));
        assert!(t.assemble_point(&Kappa::root(), 10).is_err());
    }

    #[test]
    fn deterministic() {
        let a = build_tree(&small_config(2, 9)).unwrap();
        let b = build_tree(&small_config(2, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_parameters() {
        let mut c = small_config(1, 0);
        c.h_prime = 1.0;
        assert!(matches!(build_tree(&c), Err(Error::InfeasibleParameters(_))));
        let mut c = small_config(1, 0);
        c.delta = 0.2;
        assert!(matches!(build_tree(&c), Err(Error::InfeasibleParameters(_))));
        let mut c = small_config(1, 0);
        c.levels = 2;
        assert!(matches!(build_tree(&c), Err(Error::InfeasibleParameters(_))));
        // level window of length 4 is too short for the budget
        let mut c = small_config(1, 0);
        c.schedule = IntervalSchedule::new(&[(0, 8), (8, 10), (10, 14)]).unwrap();
        assert!(matches!(build_tree(&c), Err(Error::InfeasibleParameters(_))));
    }

    #[test]
    fn p0_visits_are_limited() {
        let mut c = small_config(1, 2);
        c.measure = ShiftMeasure::bernoulli(vec![0.49, 0.49, 0.02]).unwrap();
        c.h_prime = 1.0;
        c.p0 = vec![2];
        let t = build_tree(&c).unwrap();
        for (k, b) in t.nodes() {
            let visits = b.symbols().iter().filter(|&&s| s == 2).count();
            assert!(visits as f64 <= 0.05 * b.len() as f64, "{k}: {visits}");
        }
    }

    #[test]
    fn reassembly_checks_shape() {
        let t = build_tree(&small_config(1, 0)).unwrap();
        let parts = TreeParts {
            alphabet: t.alphabet().clone(),
            measure: t.measure().clone(),
            delta: t.delta(),
            h_prime: t.h_prime(),
            epsilon: t.epsilon(),
            seed: t.seed(),
            schedule: t.schedule().clone(),
            levels: t.levels(),
            even_content: t.even_content().clone(),
            nodes: t.nodes().clone(),
        };
        assert_eq!(ScrambledTree::from_parts(parts.clone()).unwrap(), t);
        let mut bad = parts.clone();
        bad.nodes.remove(&"1".parse().unwrap());
        assert!(ScrambledTree::from_parts(bad).is_err());
        let mut bad = parts;
        bad.even_content.insert(2, Block::new(vec![0; 3], 2).unwrap());
        assert!(ScrambledTree::from_parts(bad).is_err());
    }
}
