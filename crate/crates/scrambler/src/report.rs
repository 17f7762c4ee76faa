//! Serializable report views and their human-readable rendering. Human
//! output fixes reals at six decimals; JSON keeps full precision.

use std::fmt::Write as _;

use serde::Serialize;

use scrambler_core::chaos::{PairReport, TreeReport};

use crate::parallel::LemmaLab;

#[derive(Debug, Serialize)]
pub struct ClosenessView {
    pub window: usize,
    pub checkpoint: usize,
    pub observed: usize,
    pub required: usize,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct SeparationView {
    pub window: usize,
    pub level: usize,
    pub length: usize,
    pub mismatches: usize,
    pub counted: usize,
    pub p0_visits: usize,
    pub required: usize,
    pub required_after_p0: usize,
    pub delta_bound: usize,
    pub meets_delta_bound: bool,
    pub checkpoint: usize,
    pub prefix_mismatches: usize,
    pub density_at_t0: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct VerdictView {
    pub sup_estimates: Vec<[f64; 2]>,
    pub inf_estimate_at_t0: f64,
    pub t0: f64,
    pub gap: f64,
    pub eta: f64,
    pub consistent: bool,
}

#[derive(Debug, Serialize)]
pub struct PairView {
    pub a: String,
    pub b: String,
    pub first_difference: usize,
    pub passed: bool,
    pub closeness: Vec<ClosenessView>,
    pub separation: Vec<SeparationView>,
    pub delta_achieved: f64,
    pub verdict: VerdictView,
    pub bridging_checked: usize,
    pub bridging_violations: usize,
}

#[derive(Debug, Serialize)]
pub struct SummaryView {
    pub pairs: usize,
    pub passed: usize,
    pub t0: f64,
    pub delta_achieved: Option<f64>,
    pub delta_floor: Option<f64>,
    pub valid: bool,
    pub vacuous: bool,
    pub consistent_verdicts: usize,
    pub checkpoints: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct VerifyView {
    pub t: f64,
    pub eta: f64,
    pub pairs: Vec<PairView>,
    pub summary: SummaryView,
}

fn pair_view(p: &PairReport) -> PairView {
    PairView {
        a: p.a.to_string(),
        b: p.b.to_string(),
        first_difference: p.first_difference,
        passed: p.passed,
        closeness: p
            .closeness
            .iter()
            .map(|c| ClosenessView {
                window: c.window,
                checkpoint: c.checkpoint,
                observed: c.observed,
                required: c.required,
                passed: c.passed,
            })
            .collect(),
        separation: p
            .separation
            .iter()
            .map(|s| SeparationView {
                window: s.window,
                level: s.level,
                length: s.length,
                mismatches: s.mismatches,
                counted: s.counted,
                p0_visits: s.p0_visits,
                required: s.required,
                required_after_p0: s.required_after_p0,
                delta_bound: s.delta_bound,
                meets_delta_bound: s.meets_delta_bound,
                checkpoint: s.checkpoint,
                prefix_mismatches: s.prefix_mismatches,
                density_at_t0: s.density_at_t0,
                passed: s.passed,
            })
            .collect(),
        delta_achieved: p.delta_achieved,
        verdict: VerdictView {
            sup_estimates: p.verdict.sup_estimates.iter().map(|&(t, s)| [t, s]).collect(),
            inf_estimate_at_t0: p.verdict.inf_estimate_at_t0,
            t0: p.verdict.t0,
            gap: p.verdict.gap,
            eta: p.verdict.eta,
            consistent: p.verdict.consistent,
        },
        bridging_checked: p.bridging.checked,
        bridging_violations: p.bridging.violations,
    }
}

pub fn verify_view(report: &TreeReport, t: f64, eta: f64) -> VerifyView {
    let s = &report.summary;
    VerifyView {
        t,
        eta,
        pairs: report.pairs.iter().map(pair_view).collect(),
        summary: SummaryView {
            pairs: s.pairs,
            passed: s.passed,
            t0: s.t0,
            delta_achieved: s.delta_achieved,
            delta_floor: s.delta_floor,
            valid: s.valid,
            vacuous: s.vacuous,
            consistent_verdicts: s.consistent_verdicts,
            checkpoints: s.checkpoints.clone(),
        },
    }
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn render_verify(report: &TreeReport, t: f64, eta: f64) -> String {
    let mut out = String::new();
    for p in &report.pairs {
        let close_ok = p.closeness.iter().filter(|c| c.passed).count();
        let sep_ok = p.separation.iter().filter(|s| s.passed).count();
        let sup = p.verdict.sup_estimates.first().map_or(0.0, |s| s.1);
        let _ = writeln!(
            out,
            "{}-{} {}  closeness {}/{}  separation {}/{}  delta_achieved {:.6}  sup_F(t) {:.6}  inf_F(t0) {:.6}  dc2 {}",
            p.a,
            p.b,
            if p.passed { "pass" } else { "FAIL" },
            close_ok,
            p.closeness.len(),
            sep_ok,
            p.separation.len(),
            p.delta_achieved,
            sup,
            p.verdict.inf_estimate_at_t0,
            if p.verdict.consistent { "consistent" } else { "inconclusive" },
        );
        for c in p.closeness.iter().filter(|c| !c.passed) {
            let _ = writeln!(
                out,
                "    closeness window {} at {}: {} close coordinates, need {}",
                c.window, c.checkpoint, c.observed, c.required
            );
        }
        for s in p.separation.iter().filter(|s| !s.passed) {
            let _ = writeln!(
                out,
                "    separation window {} (level {}): {} counted disagreements, need {}",
                s.window, s.level, s.counted, s.required_after_p0
            );
        }
        if !p.bridging.holds() {
            let _ = writeln!(out, "    bridging inequality violated {} times", p.bridging.violations);
        }
    }
    let s = &report.summary;
    let _ = writeln!(out, "t {t:.6}  t0 {:.6}  eta {eta:.6}", s.t0);
    if s.vacuous {
        let _ = writeln!(out, "summary: 0 pairs (single leaf); verification is vacuous");
    } else {
        let _ = writeln!(
            out,
            "summary: {}/{} pairs pass; delta_achieved {:.6}, floor {:.6}; uniform (t0, delta_achieved) {}",
            s.passed,
            s.pairs,
            s.delta_achieved.unwrap_or(0.0),
            s.delta_floor.unwrap_or(0.0),
            if s.valid { "valid for all pairs" } else { "NOT valid" },
        );
        let _ = writeln!(
            out,
            "dc2 verdicts consistent: {}/{} (checkpoints {})",
            s.consistent_verdicts,
            s.pairs,
            join_usize(&s.checkpoints)
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct CountsView {
    pub trials: usize,
    pub satisfied: usize,
    pub skipped: usize,
    pub failures: usize,
}

#[derive(Debug, Serialize)]
pub struct LemmaLabView {
    pub trials: usize,
    pub seed: u64,
    pub broken_threshold: bool,
    pub conditioning: CountsView,
    pub fiber_closeness: CountsView,
    pub fiber_epsilon: f64,
    pub fiber_delta_certified: f64,
    pub fiber_delta_searched: f64,
    pub fiber_delta_used: f64,
    pub join: CountsView,
    pub join_failures: usize,
    pub conditional_failures: usize,
    pub nesting_violations: usize,
}

fn counts(c: &scrambler_core::entropy::validators::TrialCounts) -> CountsView {
    CountsView { trials: c.trials, satisfied: c.satisfied, skipped: c.skipped, failures: c.failures }
}

pub fn lemmalab_view(lab: &LemmaLab) -> LemmaLabView {
    LemmaLabView {
        trials: lab.trials,
        seed: lab.seed,
        broken_threshold: lab.threshold == scrambler_core::entropy::validators::Threshold::Broken,
        conditioning: counts(&lab.conditioning),
        fiber_closeness: counts(&lab.fiber.counts),
        fiber_epsilon: lab.fiber.epsilon,
        fiber_delta_certified: lab.fiber.delta_certified,
        fiber_delta_searched: lab.fiber.delta_searched,
        fiber_delta_used: lab.fiber.delta_used,
        join: counts(&lab.join.counts),
        join_failures: lab.join.join_failures,
        conditional_failures: lab.join.conditional_failures,
        nesting_violations: lab.join.nesting_violations,
    }
}

pub fn render_lemmalab(lab: &LemmaLab) -> String {
    let line = |name: &str, c: &scrambler_core::entropy::validators::TrialCounts| {
        format!(
            "{name:<16} trials {:>6}  satisfied {:>6}  skipped {:>6}  failures {:>4}\n",
            c.trials, c.satisfied, c.skipped, c.failures
        )
    };
    let mut out = String::new();
    out += &line("conditioning", &lab.conditioning);
    out += &line("fiber-closeness", &lab.fiber.counts);
    let _ = writeln!(
        out,
        "    epsilon {:.6}  delta certified {:.6}  searched {:.6}  used {:.6}",
        lab.fiber.epsilon, lab.fiber.delta_certified, lab.fiber.delta_searched, lab.fiber.delta_used
    );
    out += &line("join", &lab.join.counts);
    let _ = writeln!(
        out,
        "    join failures {}  conditional failures {}  nesting violations {} (reported only)",
        lab.join.join_failures, lab.join.conditional_failures, lab.join.nesting_violations
    );
    let _ = writeln!(out, "total failures {}", lab.failures());
    out
}

#[derive(Debug, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    pub average: f64,
    /// `F_n(t)` for each threshold of the grid, in grid order.
    pub density: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ProfileView {
    pub length: usize,
    pub diameter: f64,
    pub thresholds: Vec<f64>,
    pub rows: Vec<ProfileRow>,
    pub bridging_checked: usize,
    pub bridging_violations: usize,
}

pub fn render_profile(view: &ProfileView) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>12} {:>12}", "n", "average");
    for t in &view.thresholds {
        let _ = write!(out, " {:>12}", format!("F({t:.6})"));
    }
    out.push('\n');
    for r in &view.rows {
        let _ = write!(out, "{:>12} {:>12.6}", r.n, r.average);
        for f in &r.density {
            let _ = write!(out, " {f:>12.6}");
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "bridging inequalities: {} checked, {} violated",
        view.bridging_checked, view.bridging_violations
    );
    out
}
