//! Construction of a binary tree of blocks whose leaves assemble into
//! pairwise scrambled points.
//!
//! Window `2i+1` of the schedule carries the blocks of level `i`, chosen
//! greedily so that any two blocks on the same level disagree in at least
//! `⌈3δn⌉` positions. Even windows carry content shared by every leaf.

pub mod greedy;
pub mod hamming;
pub mod schedule;
pub mod tree;

pub use greedy::{good_candidates, good_candidates_with, greedy_two_children, GreedyBudget, GreedyOutcome, DEFAULT_CANDIDATES};
pub use hamming::{ball_size_exact, hamming_count, hamming_distance, separation_count};
pub use schedule::{make_schedule, make_schedule_capped, IntervalSchedule, Window, DEFAULT_HORIZON_CAP};
pub use tree::{
    build_tree, build_tree_detailed, check_parameters, BuildConfig, BuildStats, Kappa, LevelStats, ScrambledTree,
    SeparationViolation, TreeAudit, TreeParts,
};
