//! Parity-check matrices as edge-indexed Tanner graphs.
//!
//! Edges are numbered in row-major order: the edges of check `j` occupy the
//! contiguous id range `check_edges(j)`, sorted by variable index. Each
//! variable additionally keeps the list of its edge ids sorted by check
//! index, so per-edge message arrays can be walked from either side.

mod alist;
mod gf2;

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::fgcodes::IncidenceVector;

pub use alist::{parse_alist, serialize_alist, AlistError};
pub use gf2::{sample_codeword, BitMatrix, NullSpace};
#[cfg(test)]
pub(crate) use gf2::unpack as unpack_bits;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one variable and one check (got N = {n_vars}, M = {n_checks})")]
    Empty { n_vars: usize, n_checks: usize },
    #[error("check {check} references variable {var}, but N = {n_vars}")]
    VarOutOfRange { check: usize, var: usize, n_vars: usize },
    #[error("check {check} lists variable {var} more than once")]
    DuplicateEntry { check: usize, var: usize },
    #[error("incidence vector weight {0} is below 2")]
    WeightTooSmall(usize),
    #[error("word length {got} does not match N = {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Sparse parity-check matrix with dual adjacency views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    n_checks: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    edge_check: Vec<u32>,
    var_ptr: Vec<usize>,
    var_edges: Vec<u32>,
}

impl TannerGraph {
    /// Builds a graph from the variable lists `M(j)` of every check.
    pub fn from_rows(n_vars: usize, rows: &[Vec<usize>]) -> Result<Self, GraphError> {
        let n_checks = rows.len();
        if n_vars == 0 || n_checks == 0 {
            return Err(GraphError::Empty { n_vars, n_checks });
        }
        let mut check_ptr = Vec::with_capacity(n_checks + 1);
        let mut edge_var = Vec::new();
        let mut edge_check = Vec::new();
        let mut col_deg = vec![0usize; n_vars];
        check_ptr.push(0);
        for (j, row) in rows.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::DuplicateEntry { check: j, var: w[0] });
                }
            }
            for &i in &sorted {
                if i >= n_vars {
                    return Err(GraphError::VarOutOfRange { check: j, var: i, n_vars });
                }
                edge_var.push(i as u32);
                edge_check.push(j as u32);
                col_deg[i] += 1;
            }
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = Vec::with_capacity(n_vars + 1);
        var_ptr.push(0);
        for d in &col_deg {
            var_ptr.push(var_ptr.last().unwrap() + d);
        }
        let mut fill = var_ptr[..n_vars].to_vec();
        let mut var_edges = vec![0u32; edge_var.len()];
        // Row-major edge order means each variable sees its checks in order.
        for (e, &i) in edge_var.iter().enumerate() {
            var_edges[fill[i as usize]] = e as u32;
            fill[i as usize] += 1;
        }
        Ok(Self {
            n_vars,
            n_checks,
            check_ptr,
            edge_var,
            edge_check,
            var_ptr,
            var_edges,
        })
    }

    /// Builds a graph from a dense row-major 0/1 matrix.
    pub fn from_dense(n_checks: usize, n_vars: usize, data: &[u8]) -> Result<Self, GraphError> {
        if data.len() != n_checks * n_vars {
            return Err(GraphError::LengthMismatch {
                expected: n_checks * n_vars,
                got: data.len(),
            });
        }
        let rows: Vec<Vec<usize>> = data
            .chunks(n_vars.max(1))
            .take(n_checks)
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i).collect())
            .collect();
        Self::from_rows(n_vars, &rows)
    }

    /// Square circulant whose row `j` is `v` cyclically shifted right by `j`.
    pub fn circulant(v: &IncidenceVector) -> Result<Self, GraphError> {
        if v.weight() < 2 {
            return Err(GraphError::WeightTooSmall(v.weight()));
        }
        let rows: Vec<Vec<usize>> = (0..v.n).map(|j| v.shifted(j)).collect();
        Self::from_rows(v.n, &rows)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Edge ids of check `j`, contiguous and ordered by variable index.
    #[inline]
    pub fn check_edges(&self, j: usize) -> Range<usize> {
        self.check_ptr[j]..self.check_ptr[j + 1]
    }

    /// Edge ids incident to variable `i`, ordered by check index.
    #[inline]
    pub fn var_edges(&self, i: usize) -> &[u32] {
        &self.var_edges[self.var_ptr[i]..self.var_ptr[i + 1]]
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    #[inline]
    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e] as usize
    }

    /// `M(j)`: variables checked by `j`.
    pub fn row(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_var[self.check_edges(j)].iter().map(|&i| i as usize)
    }

    /// `N(i)`: checks involving variable `i`.
    pub fn col(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.var_edges(i).iter().map(|&e| self.edge_check[e as usize] as usize)
    }

    pub fn check_degree(&self, j: usize) -> usize {
        self.check_ptr[j + 1] - self.check_ptr[j]
    }

    pub fn var_degree(&self, i: usize) -> usize {
        self.var_ptr[i + 1] - self.var_ptr[i]
    }

    pub fn max_check_degree(&self) -> usize {
        (0..self.n_checks).map(|j| self.check_degree(j)).max().unwrap_or(0)
    }

    pub fn max_var_degree(&self) -> usize {
        (0..self.n_vars).map(|i| self.var_degree(i)).max().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        let dc = self.check_degree(0);
        let dv = self.var_degree(0);
        (0..self.n_checks).all(|j| self.check_degree(j) == dc)
            && (0..self.n_vars).all(|i| self.var_degree(i) == dv)
    }

    /// Number of unsatisfied checks for a 0/1 word.
    pub fn syndrome_weight(&self, bits: &[u8]) -> Result<usize, GraphError> {
        if bits.len() != self.n_vars {
            return Err(GraphError::LengthMismatch {
                expected: self.n_vars,
                got: bits.len(),
            });
        }
        Ok(self.syndrome_weight_unchecked(bits))
    }

    pub(crate) fn syndrome_weight_unchecked(&self, bits: &[u8]) -> usize {
        (0..self.n_checks)
            .filter(|&j| self.row(j).fold(0u8, |acc, i| acc ^ (bits[i] & 1)) == 1)
            .count()
    }

    /// Dense bit-packed copy of H.
    pub fn to_bit_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n_checks, self.n_vars);
        for j in 0..self.n_checks {
            for i in self.row(j) {
                m.set(j, i, true);
            }
        }
        m
    }

    /// Rank over GF(2) and a basis of the null space.
    pub fn null_space(&self) -> NullSpace {
        NullSpace::of(&self.to_bit_matrix())
    }

    pub fn summary(&self) -> CodeSummary {
        let rank = self.to_bit_matrix().rank();
        CodeSummary {
            n: self.n_vars,
            m: self.n_checks,
            d_c: self.max_check_degree(),
            d_v: self.max_var_degree(),
            edges: self.n_edges(),
            gf2_rank: rank,
            k: self.n_vars - rank,
            regular: self.is_regular(),
        }
    }
}

/// Structural summary of a parity-check matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CodeSummary {
    pub n: usize,
    pub m: usize,
    /// Largest check degree (the check degree of a regular code).
    pub d_c: usize,
    /// Largest variable degree.
    pub d_v: usize,
    pub edges: usize,
    pub gf2_rank: usize,
    pub k: usize,
    pub regular: bool,
}

impl std::fmt::Display for CodeSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "N={}", self.n)?;
        writeln!(f, "M={}", self.m)?;
        writeln!(f, "d_c={}", self.d_c)?;
        writeln!(f, "d_v={}", self.d_v)?;
        writeln!(f, "E={}", self.edges)?;
        writeln!(f, "rank={}", self.gf2_rank)?;
        writeln!(f, "k={}", self.k)?;
        write!(f, "regular={}", self.regular)
    }
}
