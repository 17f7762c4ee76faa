use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scrambler::error::{exit, CliError, Result};
use scrambler::measure_spec::parse_measure;
use scrambler::parallel::{run_lemmalab, verify_tree_parallel};
use scrambler::report::{
    lemmalab_view, render_lemmalab, render_profile, render_verify, verify_view, ProfileRow, ProfileView,
};
use scrambler::trajectory::read_trajectory;
use scrambler::tree_file::{encode_symbols, read_tree, write_tree};
use scrambler_core::builder::{
    ball_size_exact, build_tree_detailed, check_parameters, make_schedule, BuildConfig, Kappa,
};
use scrambler_core::chaos::{check_bridging, ergodic_average, profile, DistanceSeries, VerifyOptions};
use scrambler_core::entropy::ball_size_bound;
use scrambler_core::entropy::validators::Threshold;
use scrambler_core::shift::{sm_mass, DEFAULT_DEPTH};

#[derive(Parser)]
#[command(name = "scrambler", version, about = "Entropy, shift measures and scrambled-set construction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy rate of a shift measure, in bits per symbol.
    Entropy {
        #[arg(long)]
        measure: String,
    },
    /// Mass of the length-n cylinders inside the Shannon-McMillan window.
    Smcheck {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
    },
    /// Exact Hamming ball size against the entropy bound.
    Ball {
        #[arg(long)]
        n: usize,
        /// Normalized radius.
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        l: usize,
    },
    /// Build a scrambled tree and write it as JSON.
    Construct {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        delta: f64,
        #[arg(long = "hprime")]
        h_prime: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 16)]
        n1: usize,
        #[arg(long, default_value_t = 2)]
        rho0: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Blocks drawn per family for windows too long to enumerate.
        #[arg(long, default_value_t = scrambler_core::builder::DEFAULT_CANDIDATES)]
        candidates: usize,
        /// Comma-separated symbols whose visits are limited per block.
        #[arg(long, value_delimiter = ',')]
        p0: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the symbols of the point at a leaf address.
    Points {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        kappa: String,
        /// Number of symbols; defaults to the full horizon.
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check closeness and separation for every leaf pair of a tree.
    Verify {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 0.00390625)]
        t: f64,
        #[arg(long, default_value_t = 0.01)]
        eta: f64,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Proximity densities and ergodic averages of two trajectories.
    Profile {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Comma-separated thresholds.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        /// Comma-separated horizons; defaults to powers of ten and the length.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<usize>,
        #[arg(long)]
        diameter: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        /// Exit with status 6 if a bridging inequality fails.
        #[arg(long)]
        strict: bool,
    },
    /// Randomized checks of the partition lemmas.
    Lemmalab {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Negative control: drop the length threshold of the join lemma.
        #[arg(long)]
        broken_threshold: bool,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn print(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Entropy { measure } => {
            let m = parse_measure(&measure)?;
            print(&format!("{:.6}\n", m.entropy_rate()))?;
        }
        Command::Smcheck { measure, n, epsilon } => {
            let m = parse_measure(&measure)?;
            let r = sm_mass(&m, n, epsilon)?;
            print(&format!("{:.6} {}\n", r.mass, r.holds))?;
        }
        Command::Ball { n, delta, l } => {
            if !(0.0..=0.5).contains(&delta) {
                return Err(CliError::Parse(format!("radius {delta} must lie in [0, 1/2]")));
            }
            let r = (delta * n as f64).floor() as usize;
            let exact = ball_size_exact(n, r, l)?;
            let bound = ball_size_bound(n, delta, l)?;
            print(&format!("{exact} {bound:.6} {}\n", (exact as f64) <= bound))?;
        }
        Command::Construct { measure, delta, h_prime, epsilon, levels, n1, rho0, seed, candidates, p0, out } => {
            let m = parse_measure(&measure)?;
            let schedule = make_schedule(n1, rho0, levels)?;
            let mut config = BuildConfig::new(m, delta, h_prime, schedule, levels);
            config.epsilon = epsilon;
            config.seed = seed;
            config.candidates = candidates;
            config.p0 = p0;
            let mut text = String::new();
            for b in check_parameters(&config)? {
                text += &format!(
                    "budget level {}: window {}  log2 candidates {:.6} > log2 removed {:.6}\n",
                    b.level, b.n, b.log2_candidates, b.log2_removed
                );
            }
            print(&text)?;
            let (tree, _) = build_tree_detailed(&config)?;
            write_tree(&tree, &out)?;
            let audit = tree.audit();
            let lengths: Vec<String> = tree.schedule().windows().iter().map(|w| w.len().to_string()).collect();
            let min = audit.min_distance.map_or("n/a".to_string(), |d| format!("{d:.6}"));
            print(&format!(
                "leaves {}  windows {}  min sibling distance {}  audit {}\n",
                tree.leaves().len(),
                lengths.join(","),
                min,
                if audit.passed() { "ok" } else { "FAILED" }
            ))?;
            if !audit.passed() {
                return Ok(exit::VERIFICATION);
            }
        }
        Command::Points { tree, kappa, length, out } => {
            let tree = read_tree(&tree)?;
            let k: Kappa = kappa
                .parse()
                .map_err(|_| CliError::Lookup(format!("address {kappa:?} is not a binary string")))?;
            if k.len() != tree.levels() {
                return Err(CliError::Lookup(format!(
                    "address {kappa:?} has length {}, the tree has {} levels",
                    k.len(),
                    tree.levels()
                )));
            }
            let point = tree.assemble_point(&k, length.unwrap_or(tree.horizon()))?;
            let mut text = encode_symbols(point.symbols(), tree.alphabet().size());
            text.push('\n');
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| CliError::io(path, e))?,
                None => print(&text)?,
            }
        }
        Command::Verify { tree, t, eta, format } => {
            let tree = read_tree(&tree)?;
            let options = VerifyOptions { t, eta, depth: DEFAULT_DEPTH };
            let report = verify_tree_parallel(&tree, &options)?;
            match format {
                Format::Human => print(&render_verify(&report, t, eta))?,
                Format::Json => print(&json(&verify_view(&report, t, eta)))?,
            }
            if !report.all_passed() {
                return Ok(exit::VERIFICATION);
            }
        }
        Command::Profile { a, b, t, checkpoints, diameter, format, strict } => {
            let u = read_trajectory(&a)?;
            let v = read_trajectory(&b)?;
            let series = DistanceSeries::from_trajectories(&u, &v, diameter)?;
            let n = series.len();
            let cps = if checkpoints.is_empty() {
                let mut c: Vec<usize> = std::iter::successors(Some(10usize), |x| x.checked_mul(10))
                    .take_while(|&x| x < n)
                    .collect();
                c.push(n);
                c
            } else {
                checkpoints
            };
            let averages = ergodic_average(&series, &cps)?;
            let profiles = t.iter().map(|&ti| profile(&series, ti, &cps)).collect::<scrambler_core::Result<Vec<_>>>()?;
            let bridging = check_bridging(&series, &t, &cps)?;
            let rows = averages
                .iter()
                .enumerate()
                .map(|(i, &(n, average))| ProfileRow { n, average, density: profiles.iter().map(|p| p.points[i].1).collect() })
                .collect();
            let view = ProfileView {
                length: n,
                diameter: series.diameter(),
                thresholds: t,
                rows,
                bridging_checked: bridging.checked,
                bridging_violations: bridging.violations,
            };
            match format {
                Format::Human => print(&render_profile(&view))?,
                Format::Json => print(&json(&view))?,
            }
            if strict && !bridging.holds() {
                return Ok(exit::VERIFICATION);
            }
        }
        Command::Lemmalab { trials, seed, broken_threshold, format } => {
            let threshold = if broken_threshold { Threshold::Broken } else { Threshold::Enforced };
            let lab = run_lemmalab(trials as usize, seed, threshold);
            match format {
                Format::Human => print(&render_lemmalab(&lab))?,
                Format::Json => print(&json(&lemmalab_view(&lab)))?,
            }
            if lab.failures() > 0 {
                return Ok(exit::VERIFICATION);
            }
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
