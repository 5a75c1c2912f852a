//! Exact lumping of the tree search problem onto small reduced systems.
//!
//! Sites that share both their depth in the tree and their distance to the
//! marked site are merged into one renormalized site. For a marked root
//! this yields a path of length `n`; for a marked site on level `l` it
//! yields a comb: the backbone root..w, one side chain per proper ancestor
//! (the sibling subtree lumped by level) and one chain below `w`.
//!
//! The reduced Hamiltonian is assembled directly from site degrees and
//! merged-edge weights (`-gamma` for a single edge, `-sqrt(2) gamma` for a
//! pair of edges merged into one). The explicit `V H V^T` product is only
//! formed in [`verify_reduction`].

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{invalid, Error, Result};
use crate::tree::{degree_at_level, num_sites, FullSystem, TreeParams};

/// Where a reduced site sits in the comb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteRole {
    /// Path site on `level`, from the root down to the marked site.
    Backbone { level: u32 },
    /// `depth`-th (1-based) site of the chain hanging off the ancestor on
    /// `ancestor_level`.
    Side { ancestor_level: u32, depth: u32 },
    /// `depth`-th (1-based) site below the marked site.
    Descendant { depth: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedSite {
    pub role: SiteRole,
    /// Tree level shared by every member of the group.
    pub level: u32,
    /// Number of original sites merged into this one.
    pub multiplicity: u64,
}

/// A reduced search problem with tree-structured Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub params: TreeParams,
    pub sites: Vec<ReducedSite>,
    /// Diagonal of `H̄`.
    pub diagonal: Vec<f64>,
    /// Off-diagonal couplings `(i, j, value)` with `i < j`.
    pub couplings: Vec<(usize, usize, f64)>,
    pub initial_state: Vec<f64>,
    pub marked_index: usize,
}

impl ReducedSystem {
    pub fn size(&self) -> usize {
        self.sites.len()
    }

    pub fn multiplicities(&self) -> Vec<u64> {
        self.sites.iter().map(|s| s.multiplicity).collect()
    }

    pub fn num_sites(&self) -> u64 {
        self.params.num_sites()
    }

    /// Dense copy of `H̄`.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let m = self.size();
        let mut h = DMatrix::zeros(m, m);
        for (i, &d) in self.diagonal.iter().enumerate() {
            h[(i, i)] = d;
        }
        for &(i, j, v) in &self.couplings {
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
        h
    }

    pub fn marked_vector(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.size()];
        w[self.marked_index] = 1.0;
        w
    }

    /// Groups of original heap labels merged into each reduced site.
    pub fn reduction_map(&self) -> Result<ReductionMap> {
        if self.params.n > crate::tree::MAX_FULL_DEPTH {
            return Err(invalid("reduction maps are only built for explicit trees"));
        }
        let n = self.params.n;
        let w = self.params.marked_site();
        let groups = self
            .sites
            .iter()
            .map(|site| match site.role {
                SiteRole::Backbone { level } => vec![w >> (self.params.l - level)],
                SiteRole::Side { ancestor_level, depth } => {
                    let on_path_child = w >> (self.params.l - ancestor_level - 1);
                    let sibling = on_path_child ^ 1;
                    subtree_level(sibling, depth - 1)
                }
                SiteRole::Descendant { depth } => subtree_level(w, depth),
            })
            .collect();
        let map = ReductionMap { groups, num_sites: num_sites(n) as usize };
        Ok(map)
    }

    pub fn to_json(&self) -> ReducedSystemJson {
        let mut entries: Vec<[f64; 3]> = Vec::with_capacity(self.size() + 2 * self.couplings.len());
        for (i, &d) in self.diagonal.iter().enumerate() {
            entries.push([i as f64, i as f64, d]);
        }
        for &(i, j, v) in &self.couplings {
            entries.push([i as f64, j as f64, v]);
            entries.push([j as f64, i as f64, v]);
        }
        entries.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        ReducedSystemJson {
            n: self.params.n,
            l: self.params.l,
            gamma: self.params.gamma,
            size: self.size(),
            multiplicities: self.multiplicities(),
            marked_index: self.marked_index,
            entries: entries
                .into_iter()
                .map(|[i, j, v]| (i as usize, j as usize, v))
                .collect(),
        }
    }
}

/// Serialized form of a reduced system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSystemJson {
    pub n: u32,
    pub l: u32,
    pub gamma: f64,
    pub size: usize,
    pub multiplicities: Vec<u64>,
    pub marked_index: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl ReducedSystemJson {
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Sites `depth` levels below `root` (depth 0 is `root` itself).
fn subtree_level(root: u64, depth: u32) -> Vec<u64> {
    let first = root << depth;
    (first..first + (1u64 << depth)).collect()
}

/// Partition of the tree sites into reduced sites, each member weighted by
/// `1/sqrt(group size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMap {
    pub groups: Vec<Vec<u64>>,
    pub num_sites: usize,
}

impl ReductionMap {
    pub fn weights(&self) -> Vec<f64> {
        self.groups.iter().map(|g| 1.0 / (g.len() as f64).sqrt()).collect()
    }

    /// The `m x N` matrix `V`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(self.groups.len(), self.num_sites);
        for (r, (g, w)) in self.groups.iter().zip(self.weights()).enumerate() {
            for &site in g {
                v[(r, site as usize - 1)] = w;
            }
        }
        v
    }
}

fn chain_weight() -> f64 {
    std::f64::consts::SQRT_2
}

/// Path reduction for a marked root: site `j` merges all `2^{j-1}` sites of
/// level `j`.
pub fn reduce_root_case(params: TreeParams) -> Result<ReducedSystem> {
    params.validate()?;
    if params.l != 1 {
        return Err(Error::WrongConstructor(format!(
            "root-case reduction needs l = 1, got l = {}; use reduce_comb",
            params.l
        )));
    }
    if params.n < 2 {
        return Err(invalid("root-case reduction needs n >= 2"));
    }
    let n = params.n;
    let g = params.gamma;
    let sites: Vec<ReducedSite> = (1..=n)
        .map(|level| ReducedSite {
            role: if level == 1 {
                SiteRole::Backbone { level }
            } else {
                SiteRole::Descendant { depth: level - 1 }
            },
            level,
            multiplicity: 1u64 << (level - 1),
        })
        .collect();
    let mut diagonal: Vec<f64> = (1..=n).map(|lv| g * degree_at_level(n, lv) as f64).collect();
    diagonal[0] -= 1.0;
    let couplings = (0..n as usize - 1).map(|i| (i, i + 1, -chain_weight() * g)).collect();
    let initial_state = initial_state(&sites, n);
    Ok(ReducedSystem { params, sites, diagonal, couplings, initial_state, marked_index: 0 })
}

fn initial_state(sites: &[ReducedSite], n: u32) -> Vec<f64> {
    let big_n = num_sites(n) as f64;
    sites.iter().map(|s| (s.multiplicity as f64 / big_n).sqrt()).collect()
}

/// Comb reduction for a marked site on any level.
pub fn reduce_comb(params: TreeParams) -> Result<ReducedSystem> {
    params.validate()?;
    let (n, l, g) = (params.n, params.l, params.gamma);
    let mut sites = Vec::with_capacity(comb_size(n, l));
    let mut couplings = Vec::new();

    for level in 1..=l {
        sites.push(ReducedSite { role: SiteRole::Backbone { level }, level, multiplicity: 1 });
        if level > 1 {
            couplings.push((level as usize - 2, level as usize - 1, -g));
        }
    }
    for k in 1..l {
        let mut prev = k as usize - 1;
        for depth in 1..=n - k {
            let idx = sites.len();
            sites.push(ReducedSite {
                role: SiteRole::Side { ancestor_level: k, depth },
                level: k + depth,
                multiplicity: 1u64 << (depth - 1),
            });
            let weight = if depth == 1 { 1.0 } else { chain_weight() };
            couplings.push((prev, idx, -g * weight));
            prev = idx;
        }
    }
    let marked_index = l as usize - 1;
    let mut prev = marked_index;
    for depth in 1..=n - l {
        let idx = sites.len();
        sites.push(ReducedSite {
            role: SiteRole::Descendant { depth },
            level: l + depth,
            multiplicity: 1u64 << depth,
        });
        couplings.push((prev, idx, -g * chain_weight()));
        prev = idx;
    }

    let mut diagonal: Vec<f64> =
        sites.iter().map(|s| g * degree_at_level(n, s.level) as f64).collect();
    diagonal[marked_index] -= 1.0;
    let initial_state = initial_state(&sites, n);
    Ok(ReducedSystem { params, sites, diagonal, couplings, initial_state, marked_index })
}

/// Reduced dimension `l + sum_{k=1}^{l-1} (n - k) + (n - l)`.
pub fn comb_size(n: u32, l: u32) -> usize {
    let side: u32 = (1..l).map(|k| n - k).sum();
    (l + side + (n - l)) as usize
}

/// The four reduction conditions checked by [`verify_reduction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `V V^T = I`
    Orthonormal,
    /// `V H V^T = H̄`
    ReducedHamiltonian,
    /// `V^T V u = u` on the Krylov space of the initial state
    KrylovInvariance,
    /// every eigenvalue of `H̄` is an eigenvalue of `H`
    SpectrumInclusion,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Check::Orthonormal => "(a) V V^T = I",
            Check::ReducedHamiltonian => "(b) V H V^T = H_bar",
            Check::KrylovInvariance => "(c) V^T V u = u on Krylov space",
            Check::SpectrumInclusion => "(d) spectrum inclusion",
        };
        f.write_str(s)
    }
}

pub const ORTHONORMAL_TOL: f64 = 1e-12;
pub const HAMILTONIAN_TOL: f64 = 1e-12;
pub const KRYLOV_TOL: f64 = 1e-10;
pub const SPECTRUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub orthonormal_dev: f64,
    pub hamiltonian_dev: f64,
    pub krylov_dev: f64,
    pub spectrum_dev: f64,
    pub krylov_depth: usize,
}

impl VerificationReport {
    pub fn deviation(&self, check: Check) -> f64 {
        match check {
            Check::Orthonormal => self.orthonormal_dev,
            Check::ReducedHamiltonian => self.hamiltonian_dev,
            Check::KrylovInvariance => self.krylov_dev,
            Check::SpectrumInclusion => self.spectrum_dev,
        }
    }

    pub fn tolerance(check: Check) -> f64 {
        match check {
            Check::Orthonormal => ORTHONORMAL_TOL,
            Check::ReducedHamiltonian => HAMILTONIAN_TOL,
            Check::KrylovInvariance => KRYLOV_TOL,
            Check::SpectrumInclusion => SPECTRUM_TOL,
        }
    }

    pub fn failures(&self) -> Vec<Check> {
        [Check::Orthonormal, Check::ReducedHamiltonian, Check::KrylovInvariance, Check::SpectrumInclusion]
            .into_iter()
            .filter(|&c| !(self.deviation(c) <= Self::tolerance(c)))
            .collect()
    }

    pub fn first_failure(&self) -> Option<Check> {
        self.failures().first().copied()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub(crate) fn failure_summary(&self) -> String {
        match self.first_failure() {
            Some(c) => format!(
                "reduction check {c} failed: max deviation {:e} (tolerance {:e})",
                self.deviation(c),
                Self::tolerance(c)
            ),
            None => "reduction checks passed".into(),
        }
    }
}

/// Checks that `reduced` is an exact reduction of `full` under `map`.
///
/// Returns the report when every check passes and
/// [`Error::Verification`] naming the first failing check otherwise.
pub fn verify_reduction(
    full: &FullSystem,
    map: &ReductionMap,
    reduced: &ReducedSystem,
    krylov_depth: usize,
) -> Result<VerificationReport> {
    if full.params.n > 12 {
        return Err(invalid("verification requires n <= 12"));
    }
    let big_n = full.tree.num_sites();
    if map.num_sites != big_n || map.groups.len() != reduced.size() {
        return Err(invalid("reduction map does not match the systems"));
    }
    let v = map.matrix();
    let vt = v.transpose();
    let m = reduced.size();

    let orthonormal_dev = (&v * &vt - DMatrix::<f64>::identity(m, m)).amax();

    let h = full.hamiltonian.to_dense();
    let hbar = reduced.hamiltonian();
    let hamiltonian_dev = (&v * &h * &vt - &hbar).amax();

    let projector = &vt * &v;
    let mut u = DVector::from_vec(full.initial_state());
    let mut krylov_dev: f64 = 0.0;
    for _ in 0..=krylov_depth {
        let norm = u.norm();
        if norm == 0.0 {
            break;
        }
        u /= norm;
        krylov_dev = krylov_dev.max((&projector * &u - &u).amax());
        u = &h * &u;
    }

    // A lifted eigenpair with residual r certifies dist(mu, sigma(H)) <= r.
    let dec = eigen::decompose(&hbar)?;
    let mut spectrum_dev: f64 = 0.0;
    for k in 0..m {
        let y = &vt * dec.eigenvector(k);
        let hy = DVector::from_vec(full.hamiltonian.matvec(y.as_slice()));
        let resid = (hy - &y * dec.eigenvalues[k]).norm() / y.norm();
        spectrum_dev = spectrum_dev.max(resid);
    }

    let report = VerificationReport {
        orthonormal_dev,
        hamiltonian_dev,
        krylov_dev,
        spectrum_dev,
        krylov_depth,
    };
    if report.passed() {
        Ok(report)
    } else {
        Err(Error::Verification(Box::new(report)))
    }
}
