//! JSON persistence of constructed trees.
//!
//! ```json
//! {
//!   "alphabet_size": 2,
//!   "measure": "bernoulli:0.5,0.5",
//!   "delta": 0.05, "h_prime": 0.9, "epsilon": 0.1, "seed": 7,
//!   "schedule": [[0, 16], [16, 64], [64, 320]],
//!   "levels": 1,
//!   "even_content": {"2": "0110..."},
//!   "nodes": {"": "...", "0": "...", "1": "..."}
//! }
//! ```
//!
//! Symbols are written as decimal digits when the alphabet has at most ten
//! letters and comma-separated otherwise. `p0_symbols` is present only when
//! non-empty.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use scrambler_core::builder::{IntervalSchedule, Kappa, ScrambledTree, TreeParts};
use scrambler_core::{Alphabet, Block};

use crate::error::{CliError, Result};
use crate::measure_spec::{format_measure, parse_measure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub alphabet_size: usize,
    pub measure: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p0_symbols: Vec<usize>,
    pub delta: f64,
    pub h_prime: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub schedule: Vec<[usize; 2]>,
    pub levels: usize,
    pub even_content: BTreeMap<usize, String>,
    pub nodes: BTreeMap<String, String>,
}

pub fn encode_symbols(symbols: &[u8], alphabet_size: usize) -> String {
    if alphabet_size <= 10 {
        symbols.iter().map(|&s| char::from(b'0' + s)).collect()
    } else {
        symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn decode_symbols(text: &str, alphabet_size: usize) -> std::result::Result<Vec<u8>, String> {
    let parse = |tok: &str| -> std::result::Result<u8, String> {
        match tok.parse::<u8>() {
            Ok(s) if (s as usize) < alphabet_size => Ok(s),
            _ => Err(format!("symbol {tok:?} is not in an alphabet of size {alphabet_size}")),
        }
    };
    if alphabet_size <= 10 {
        text.chars()
            .map(|c| c.to_digit(10).map(|d| d.to_string()).unwrap_or_else(|| c.to_string()))
            .map(|s| parse(&s))
            .collect()
    } else if text.is_empty() {
        Ok(Vec::new())
    } else {
        text.split(',').map(parse).collect()
    }
}

impl TreeDocument {
    pub fn from_tree(tree: &ScrambledTree) -> Self {
        let l = tree.alphabet().size();
        Self {
            alphabet_size: l,
            measure: format_measure(tree.measure()),
            p0_symbols: tree.alphabet().p0().to_vec(),
            delta: tree.delta(),
            h_prime: tree.h_prime(),
            epsilon: tree.epsilon(),
            seed: tree.seed(),
            schedule: tree.schedule().windows().iter().map(|w| [w.start, w.end]).collect(),
            levels: tree.levels(),
            even_content: tree
                .even_content()
                .iter()
                .map(|(&k, b)| (k, encode_symbols(b.symbols(), l)))
                .collect(),
            nodes: tree
                .nodes()
                .iter()
                .map(|(k, b)| (k.to_string(), encode_symbols(b.symbols(), l)))
                .collect(),
        }
    }

    pub fn into_tree(self) -> std::result::Result<ScrambledTree, String> {
        let l = self.alphabet_size;
        let measure = parse_measure(&self.measure).map_err(|e| e.to_string())?;
        let alphabet = Alphabet::new(l, &self.p0_symbols).map_err(|e| e.to_string())?;
        let bounds: Vec<(usize, usize)> = self.schedule.iter().map(|w| (w[0], w[1])).collect();
        let schedule = IntervalSchedule::new(&bounds).map_err(|e| e.to_string())?;
        let block = |text: &str, what: &str| -> std::result::Result<Block, String> {
            let symbols = decode_symbols(text, l).map_err(|e| format!("{what}: {e}"))?;
            Block::new(symbols, l).map_err(|e| format!("{what}: {e}"))
        };
        let mut even_content = BTreeMap::new();
        for (k, text) in &self.even_content {
            even_content.insert(*k, block(text, &format!("even window {k}"))?);
        }
        let mut nodes = BTreeMap::new();
        for (k, text) in &self.nodes {
            let kappa: Kappa = k.parse().map_err(|e: scrambler_core::Error| e.to_string())?;
            nodes.insert(kappa, block(text, &format!("node {k:?}"))?);
        }
        ScrambledTree::from_parts(TreeParts {
            alphabet,
            measure,
            delta: self.delta,
            h_prime: self.h_prime,
            epsilon: self.epsilon,
            seed: self.seed,
            schedule,
            levels: self.levels,
            even_content,
            nodes,
        })
        .map_err(|e| e.to_string())
    }
}

pub fn tree_to_json(tree: &ScrambledTree) -> String {
    let mut s = serde_json::to_string_pretty(&TreeDocument::from_tree(tree)).expect("tree serializes");
    s.push('\n');
    s
}

pub fn tree_from_json(text: &str, path: &Path) -> Result<ScrambledTree> {
    let bad = |message: String| CliError::TreeFormat { path: path.to_path_buf(), message };
    let doc: TreeDocument = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    doc.into_tree().map_err(bad)
}

pub fn write_tree(tree: &ScrambledTree, path: &Path) -> Result<()> {
    fs::write(path, tree_to_json(tree)).map_err(|e| CliError::io(path, e))
}

pub fn read_tree(path: &Path) -> Result<ScrambledTree> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    tree_from_json(&text, path)
}
