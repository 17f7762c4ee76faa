//! Finite probability spaces: probability vectors, joint distributions over
//! a pair of partitions, conditioning and disintegration.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance used for every "sums to one" check.
pub const PROB_TOL: f64 = 1e-9;

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        for (i, &p) in entries.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability(format!("entry {i} = {p}")));
            }
        }
        let total: f64 = entries.iter().sum();
        if libm::fabs(total - 1.0) > PROB_TOL {
            return Err(Error::InvalidProbability(format!("entries sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// Normalizes nonnegative weights into a probability vector.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroMass);
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        Ok(Self { entries: alloc::vec![1.0 / dim as f64; dim] })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    /// Total mass of the listed indices.
    pub fn mass(&self, subset: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for &i in subset {
            total += *self
                .entries
                .get(i)
                .ok_or(Error::IndexOutOfRange { index: i, len: self.len() })?;
        }
        Ok(total)
    }

    /// Restricts to `subset` and renormalizes. Output order follows the
    /// ascending order of the distinct indices in `subset`.
    pub fn condition_on_subset(&self, subset: &[usize]) -> Result<ProbVector> {
        let mut idx: Vec<usize> = subset.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return Err(Error::ZeroMass);
        }
        let mass = self.mass(&idx)?;
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        let entries = idx.iter().map(|&i| self.entries[i] / mass).collect();
        Ok(ProbVector { entries })
    }

    /// Sum of absolute entry differences.
    pub fn ell1_distance(&self, other: &ProbVector) -> Result<f64> {
        ell1_distance(self, other)
    }
}

pub fn ell1_distance(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
    }
    Ok(p.entries
        .iter()
        .zip(&q.entries)
        .map(|(a, b)| libm::fabs(a - b))
        .sum())
}

/// Probability table over two finite partitions: rows are atoms of the
/// first partition, columns atoms of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

/// One atom of the conditioning partition together with the conditional
/// distribution it induces on the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub weight: f64,
    /// `None` marks a zero-weight column.
    pub conditional: Option<ProbVector>,
}

impl JointDistribution {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidProbability("empty table".into()));
        }
        let mut cells = Vec::with_capacity(rows * cols);
        for row in table {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { left: cols, right: row.len() });
            }
            cells.extend(row);
        }
        Self::from_cells(rows, cols, cells)
    }

    /// Builds from a row-major cell buffer.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(Error::InvalidProbability(format!(
                "{} cells for a {rows}x{cols} table",
                cells.len()
            )));
        }
        for (i, &c) in cells.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidProbability(format!("cell {i} = {c}")));
            }
        }
        let total: f64 = cells.iter().sum();
        if libm::fabs(total - 1.0) > PROB_TOL {
            return Err(Error::InvalidProbability(format!("cells sum to {total}")));
        }
        Ok(Self { rows, cols, cells })
    }

    /// Normalizes a nonnegative row-major weight table.
    pub fn from_weights(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroMass);
        }
        Self::from_cells(rows, cols, weights.into_iter().map(|w| w / total).collect())
    }

    /// Independent coupling of two vectors.
    pub fn product(p: &ProbVector, q: &ProbVector) -> Self {
        let mut cells = Vec::with_capacity(p.len() * q.len());
        for &a in p.entries() {
            for &b in q.entries() {
                cells.push(a * b);
            }
        }
        Self { rows: p.len(), cols: q.len(), cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                cells.push(self.get(r, c));
            }
        }
        Self { rows: self.cols, cols: self.rows, cells }
    }

    pub(crate) fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).iter().sum()).collect()
    }

    pub(crate) fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c)).sum())
            .collect()
    }

    /// Row marginal and column marginal.
    pub fn marginals(&self) -> (ProbVector, ProbVector) {
        (
            ProbVector { entries: self.row_sums() },
            ProbVector { entries: self.col_sums() },
        )
    }

    /// One fiber per column, in column order. Zero-mass columns keep their
    /// slot as a zero-weight fiber without a conditional.
    pub fn disintegrate(&self) -> Vec<Fiber> {
        self.col_sums()
            .into_iter()
            .enumerate()
            .map(|(c, weight)| {
                if weight > 0.0 {
                    let entries = (0..self.rows).map(|r| self.get(r, c) / weight).collect();
                    Fiber { weight, conditional: Some(ProbVector { entries }) }
                } else {
                    Fiber { weight: 0.0, conditional: None }
                }
            })
            .collect()
    }

    /// Conditional distribution of the columns given row `row`.
    pub fn condition_on_row(&self, row: usize) -> Result<ProbVector> {
        if row >= self.rows {
            return Err(Error::IndexOutOfRange { index: row, len: self.rows });
        }
        let cells = self.row(row);
        let mass: f64 = cells.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(ProbVector { entries: cells.iter().map(|c| c / mass).collect() })
    }
}
