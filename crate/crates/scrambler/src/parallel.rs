//! Parallel drivers. Work is split over a rayon pool whose size is capped
//! by `SCRAMBLER_THREADS`; results are always gathered in canonical order.

use rayon::prelude::*;

use scrambler_core::builder::ScrambledTree;
use scrambler_core::chaos::{leaf_pairs, leaf_points, summarize, verify_pair, TreeReport, VerifyOptions};
use scrambler_core::entropy::validators::{
    conditioning_trial, join_trial, validate_fiber_closeness, FiberReport, JoinReport, Threshold, TrialCounts,
};

pub const THREADS_ENV: &str = "SCRAMBLER_THREADS";

pub fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            builder = builder.num_threads(n);
        }
    }
    builder.build().expect("thread pool")
}

/// Every leaf pair, checked in parallel; pairs are reported in address order.
pub fn verify_tree_parallel(tree: &ScrambledTree, options: &VerifyOptions) -> scrambler_core::Result<TreeReport> {
    let points = leaf_points(tree)?;
    let pairs = leaf_pairs(points.len());
    let reports = thread_pool().install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let (ka, x) = &points[i];
                let (kb, y) = &points[j];
                verify_pair(tree, (ka, x), (kb, y), options)
            })
            .collect::<scrambler_core::Result<Vec<_>>>()
    })?;
    Ok(summarize(tree, reports))
}

/// Epsilon and dimension cap of the fiber-closeness validator.
pub const FIBER_EPSILON: f64 = 0.1;
pub const FIBER_MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaLab {
    pub trials: usize,
    pub seed: u64,
    pub threshold: Threshold,
    pub conditioning: TrialCounts,
    pub fiber: FiberReport,
    pub join: JoinReport,
}

impl LemmaLab {
    pub fn failures(&self) -> usize {
        self.conditioning.failures + self.fiber.counts.failures + self.join.counts.failures
    }
}

pub fn run_lemmalab(trials: usize, seed: u64, threshold: Threshold) -> LemmaLab {
    thread_pool().install(|| {
        let f0: Vec<Option<bool>> = (0..trials as u64).into_par_iter().map(|t| conditioning_trial(seed, t)).collect();
        let mut conditioning = TrialCounts::default();
        for o in f0 {
            conditioning.record(o);
        }
        let joins: Vec<_> = (0..trials as u64).into_par_iter().map(|t| join_trial(seed, t, threshold)).collect();
        let mut join = JoinReport::default();
        for o in &joins {
            join.record(o);
        }
        let fiber = validate_fiber_closeness(trials, seed, FIBER_EPSILON, FIBER_MAX_DIM);
        LemmaLab { trials, seed, threshold, conditioning, fiber, join }
    })
}
