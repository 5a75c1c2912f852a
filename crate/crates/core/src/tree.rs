//! Explicit balanced binary trees.
//!
//! Sites carry 1-based heap labels: the root is site 1 and the children of
//! site `k` are `2k` and `2k + 1`. Matrix rows and state-vector entries use
//! the 0-based position `k - 1`. Explicit trees only exist for small depths;
//! large instances are handled exclusively through [`crate::reduction`].

use std::collections::VecDeque;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest depth for which a full (unreduced) system may be materialized.
pub const MAX_FULL_DEPTH: u32 = 14;

/// Largest depth supported anywhere (site counts must fit in `u64`).
pub const MAX_DEPTH: u32 = 64;

/// One problem instance: tree depth `n`, marked level `l` and search
/// parameter `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub n: u32,
    pub l: u32,
    pub gamma: f64,
}

impl TreeParams {
    pub fn new(n: u32, l: u32, gamma: f64) -> Result<Self> {
        let p = TreeParams { n, l, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n > MAX_DEPTH {
            return Err(invalid(format!("depth n = {} outside 1..={MAX_DEPTH}", self.n)));
        }
        if self.l < 1 || self.l > self.n {
            return Err(invalid(format!("marked level l = {} outside 1..={}", self.l, self.n)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid(format!("gamma = {} must be finite and >= 0", self.gamma)));
        }
        Ok(())
    }

    /// Number of sites `N = 2^n - 1`.
    pub fn num_sites(&self) -> u64 {
        num_sites(self.n)
    }

    /// Canonical marked site: the leftmost site on level `l`.
    pub fn marked_site(&self) -> u64 {
        1u64 << (self.l - 1)
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        TreeParams { gamma, ..*self }
    }
}

/// `2^n - 1`, valid for `n <= 64`.
pub fn num_sites(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `ln(2^n - 1)` without forming `2^n` (exact enough for n up to 1000s).
pub fn ln_num_sites(n: u32) -> f64 {
    let n = n as f64;
    n * std::f64::consts::LN_2 + (-(-n * std::f64::consts::LN_2).exp()).ln_1p()
}

/// Level (1-based) of a heap-labelled site.
pub fn level_of(site: u64) -> u32 {
    64 - site.leading_zeros()
}

/// Degree of any site on `level` in a tree of depth `n`.
pub fn degree_at_level(n: u32, level: u32) -> u32 {
    match (n, level) {
        (1, _) => 0,
        (_, 1) => 2,
        (n, l) if l == n => 1,
        _ => 3,
    }
}

/// A balanced binary tree of a given depth with heap labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalancedTree {
    depth: u32,
}

pub fn build_tree(n: u32) -> Result<BalancedTree> {
    if n < 1 {
        return Err(invalid("tree depth must be >= 1"));
    }
    if n > MAX_FULL_DEPTH {
        return Err(invalid(format!(
            "explicit trees are limited to depth {MAX_FULL_DEPTH}; use the reduced systems"
        )));
    }
    Ok(BalancedTree { depth: n })
}

impl BalancedTree {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn num_sites(&self) -> usize {
        num_sites(self.depth) as usize
    }

    fn check(&self, site: u64) -> Result<()> {
        if site == 0 || site > self.num_sites() as u64 {
            return Err(Error::IndexOutOfRange { index: site, len: self.num_sites() as u64 });
        }
        Ok(())
    }

    pub fn degree(&self, site: u64) -> u32 {
        degree_at_level(self.depth, level_of(site))
    }

    /// Neighbours of `site` (parent first, then children).
    pub fn neighbors(&self, site: u64) -> impl Iterator<Item = u64> {
        let last = self.num_sites() as u64;
        let parent = (site > 1).then_some(site / 2);
        let kids = [2 * site, 2 * site + 1].into_iter().filter(move |&c| c <= last);
        parent.into_iter().chain(kids)
    }

    /// Undirected edges as `(parent, child)` pairs in heap order.
    pub fn edges(&self) -> impl Iterator<Item = (u64, u64)> {
        (2..=self.num_sites() as u64).map(|c| (c / 2, c))
    }

    /// Graph Laplacian `L = D - A` in sparse form.
    pub fn laplacian(&self) -> SparseMatrix {
        let n = self.num_sites();
        let mut m = SparseMatrix::zeros(n);
        for s in 1..=n as u64 {
            m.push(s as usize - 1, s as usize - 1, self.degree(s) as f64);
        }
        for (a, b) in self.edges() {
            m.push(a as usize - 1, b as usize - 1, -1.0);
            m.push(b as usize - 1, a as usize - 1, -1.0);
        }
        m.finish();
        m
    }

    /// Breadth-first distances from `site` to every site (indexed by position `k - 1`).
    pub fn bfs_distances(&self, site: u64) -> Result<Vec<u32>> {
        self.check(site)?;
        let n = self.num_sites();
        let mut dist = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        dist[site as usize - 1] = 0;
        queue.push_back(site);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize - 1];
            for u in self.neighbors(v) {
                let slot = &mut dist[u as usize - 1];
                if *slot == u32::MAX {
                    *slot = dv + 1;
                    queue.push_back(u);
                }
            }
        }
        Ok(dist)
    }

    /// Writes the edge list as CSV with a `src,dst` header.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst"])?;
        for (a, b) in self.edges() {
            w.write_record([a.to_string(), b.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Row-compressed real matrix, used for the explicit tree operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix { dim, rows: vec![Vec::new(); dim] }
    }

    fn push(&mut self, i: usize, j: usize, v: f64) {
        self.rows[i].push((j, v));
    }

    fn finish(&mut self) {
        for row in &mut self.rows {
            row.sort_by_key(|&(j, _)| j);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, v)| v)
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| (j, v * factor)).collect())
            .collect();
        SparseMatrix { dim: self.dim, rows }
    }

    pub fn add_to_diagonal(&mut self, i: usize, delta: f64) {
        match self.rows[i].iter_mut().find(|(c, _)| *c == i) {
            Some((_, v)) => *v += delta,
            None => {
                self.rows[i].push((i, delta));
                self.rows[i].sort_by_key(|&(j, _)| j);
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Gershgorin bounds `(lo, hi)` on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, r) in self.rows.iter().enumerate() {
            let mut center = 0.0;
            let mut radius = 0.0;
            for &(j, v) in r {
                if j == i {
                    center = v;
                } else {
                    radius += v.abs();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }
}

/// The full `N x N` search problem `H = gamma L - |w><w|`.
#[derive(Debug, Clone)]
pub struct FullSystem {
    pub tree: BalancedTree,
    pub params: TreeParams,
    /// Heap label of the marked site.
    pub marked_site: u64,
    pub laplacian: SparseMatrix,
    pub hamiltonian: SparseMatrix,
}

impl FullSystem {
    /// Row/column position of the marked site.
    pub fn marked_index(&self) -> usize {
        self.marked_site as usize - 1
    }

    pub fn initial_state(&self) -> Vec<f64> {
        uniform_state(self.tree.num_sites())
    }
}

/// Builds the full Hamiltonian with the oracle on `marked_site`, which must
/// lie on level `params.l`.
pub fn build_full_hamiltonian(params: TreeParams, marked_site: u64) -> Result<FullSystem> {
    params.validate()?;
    let tree = build_tree(params.n)?;
    tree.check(marked_site)?;
    if level_of(marked_site) != params.l {
        return Err(invalid(format!(
            "marked site {marked_site} is on level {}, expected level {}",
            level_of(marked_site),
            params.l
        )));
    }
    let laplacian = tree.laplacian();
    let mut hamiltonian = laplacian.scaled(params.gamma);
    hamiltonian.add_to_diagonal(marked_site as usize - 1, -1.0);
    Ok(FullSystem { tree, params, marked_site, laplacian, hamiltonian })
}

/// The uniform superposition `|s> = N^{-1/2} sum_k |k>`.
pub fn uniform_state(n_sites: usize) -> Vec<f64> {
    let a = 1.0 / (n_sites as f64).sqrt();
    vec![a; n_sites]
}
