//! Data model: directed networks, dyad covariates, parameters, and the
//! per-dyad game.
//!
//! Each unordered dyad plays a two-player binary game with strategic
//! complementarity (`alpha > 0`). The error region where both `(1,1)` and
//! `(0,0)` are Nash equilibria is reported as [`DyadOutcome::MultipleEquilibria`];
//! estimation sidesteps it by modeling only the uniquely-determined one-way
//! outcomes.
//!
//! Agents are 0-based in code and 1-based in file formats and reports.

use crate::bvn;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("agent index {index} out of range for n = {n}")]
    AgentOutOfRange { index: usize, n: usize },
    #[error("self pair ({0}, {0}) has no dyad")]
    SelfPair(usize),
    #[error("adjacency must be square with zero diagonal; row {row} violates: {reason}")]
    BadAdjacency { row: usize, reason: String },
    #[error("covariate dimension mismatch: expected {expected}, got {got}")]
    CovariateDim { expected: usize, got: usize },
    #[error("network has {network} agents but covariates have {covariates}")]
    SizeMismatch { network: usize, covariates: usize },
    #[error("parameter out of domain: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Bvn(#[from] bvn::BvnError),
}

/// Directed 0/1 network on `n` agents, no self-loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedNetwork {
    n: usize,
    adj: Vec<u8>,
}

impl DirectedNetwork {
    pub fn empty(n: usize) -> Self {
        assert!(n >= 2, "need at least two agents");
        Self { n, adj: vec![0; n * n] }
    }

    /// Builds from dense rows, enforcing 0/1 entries and a zero diagonal.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, ModelError> {
        let n = rows.len();
        if n < 2 {
            return Err(ModelError::BadAdjacency {
                row: 0,
                reason: format!("need at least 2 agents, got {n}"),
            });
        }
        let mut net = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::BadAdjacency {
                    row: i + 1,
                    reason: format!("expected {n} entries, got {}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(ModelError::BadAdjacency {
                        row: i + 1,
                        reason: format!("entry ({},{}) = {v} is not 0/1", i + 1, j + 1),
                    });
                }
                if i == j && v != 0 {
                    return Err(ModelError::BadAdjacency {
                        row: i + 1,
                        reason: "nonzero diagonal (self-loop)".into(),
                    });
                }
                net.adj[i * n + j] = v;
            }
        }
        Ok(net)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] != 0
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        assert_ne!(i, j, "no self-loops");
        self.adj[i * self.n + j] = v as u8;
    }

    /// `y_{i,j} = 1{(g_{i,j}, g_{j,i}) = (1, 0)}`.
    pub fn one_way(&self, i: usize, j: usize) -> bool {
        self.get(i, j) && !self.get(j, i)
    }

    /// Number of partners `j` with a one-way link `i -> j`.
    pub fn out_one_way_degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| j != i && self.one_way(i, j)).count()
    }

    /// Number of partners `j` with a one-way link `j -> i`.
    pub fn in_one_way_degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| j != i && self.one_way(j, i)).count()
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| self.adj[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }
}

/// Flat index of the ordered pair `(i, j)`, `i != j`, in row-major order with
/// the diagonal skipped.
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

/// Iterates unordered dyads `{i < j}` in lexicographic order.
pub fn dyads(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Lexicographic position of dyad `{i < j}` among all `n(n-1)/2` dyads.
pub(crate) fn dyad_rank(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Covariate vector `Z_{i,j}` for every ordered pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadCovariates {
    n: usize,
    d_z: usize,
    z: Vec<f64>,
}

impl DyadCovariates {
    pub fn zeros(n: usize, d_z: usize) -> Self {
        assert!(n >= 2 && d_z >= 1);
        Self { n, d_z, z: vec![0.0; n * (n - 1) * d_z] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_z(&self) -> usize {
        self.d_z
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let p = pair_index(self.n, i, j) * self.d_z;
        &self.z[p..p + self.d_z]
    }

    pub fn set(&mut self, i: usize, j: usize, values: &[f64]) -> Result<(), ModelError> {
        if values.len() != self.d_z {
            return Err(ModelError::CovariateDim { expected: self.d_z, got: values.len() });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(ModelError::BadParameter(format!(
                "non-finite covariate for pair ({}, {})",
                i + 1,
                j + 1
            )));
        }
        let p = pair_index(self.n, i, j) * self.d_z;
        self.z[p..p + self.d_z].copy_from_slice(values);
        Ok(())
    }
}

/// Common parameters `theta = (beta, alpha, rho)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonParams {
    pub beta: Vec<f64>,
    pub alpha: f64,
    pub rho: f64,
}

impl CommonParams {
    pub fn new(beta: Vec<f64>, alpha: f64, rho: f64) -> Result<Self, ModelError> {
        let p = Self { beta, alpha, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha > 0.0) {
            return Err(ModelError::BadParameter(format!(
                "alpha must be strictly positive, got {}",
                self.alpha
            )));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(ModelError::BadParameter(format!(
                "rho must lie inside (-1, 1), got {}",
                self.rho
            )));
        }
        if !self.beta.iter().all(|b| b.is_finite()) {
            return Err(ModelError::BadParameter("non-finite beta".into()));
        }
        Ok(())
    }
}

/// Sender effects `A` and receiver effects `B`, with `A[0] = 0` pinned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl HeterogeneityVector {
    pub fn zeros(n: usize) -> Self {
        Self { a: vec![0.0; n], b: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.a.len() != self.b.len() || self.a.is_empty() {
            return Err(ModelError::BadParameter("A and B length mismatch".into()));
        }
        if self.a[0] != 0.0 {
            return Err(ModelError::BadParameter(format!(
                "A_1 must be exactly 0 (location normalization), got {}",
                self.a[0]
            )));
        }
        Ok(())
    }
}

/// Network plus covariates, dimension-checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelData {
    pub network: DirectedNetwork,
    pub covariates: DyadCovariates,
}

impl ModelData {
    pub fn new(network: DirectedNetwork, covariates: DyadCovariates) -> Result<Self, ModelError> {
        if network.n() != covariates.n() {
            return Err(ModelError::SizeMismatch {
                network: network.n(),
                covariates: covariates.n(),
            });
        }
        Ok(Self { network, covariates })
    }

    pub fn n(&self) -> usize {
        self.network.n()
    }

    pub fn d_z(&self) -> usize {
        self.covariates.d_z()
    }
}

/// Unique pure-strategy outcome of a dyad, or the multiplicity region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DyadOutcome {
    /// `(g_{i,j}, g_{j,i}) = (1, 0)`.
    OneWayIj,
    /// `(0, 1)`.
    OneWayJi,
    /// `(1, 1)`.
    Mutual,
    /// `(0, 0)`.
    NoLinks,
    /// Both `(1,1)` and `(0,0)` are equilibria; a selection rule applies.
    MultipleEquilibria,
}

/// Linear index `pi_{i,j} = Z_{i,j}' beta + A_i + B_j`.
pub fn linear_index(
    covariates: &DyadCovariates,
    gamma: &HeterogeneityVector,
    beta: &[f64],
    i: usize,
    j: usize,
) -> Result<f64, ModelError> {
    let n = covariates.n();
    if i >= n {
        return Err(ModelError::AgentOutOfRange { index: i, n });
    }
    if j >= n {
        return Err(ModelError::AgentOutOfRange { index: j, n });
    }
    if i == j {
        return Err(ModelError::SelfPair(i));
    }
    if beta.len() != covariates.d_z() {
        return Err(ModelError::CovariateDim { expected: covariates.d_z(), got: beta.len() });
    }
    let z = covariates.get(i, j);
    let dot: f64 = z.iter().zip(beta).map(|(zi, bi)| zi * bi).sum();
    Ok(dot + gamma.a[i] + gamma.b[j])
}

/// One-way link probability
/// `P^(1,0) = Phi(pi_ij) - H(pi_ij, pi_ji + alpha; rho)`.
///
/// The reversal identity `P^(1,0)(pi_ij, pi_ji) = P^(0,1)(pi_ji, pi_ij)` holds
/// by construction, so only this orientation is needed.
pub fn oneway_prob(pi_ij: f64, pi_ji: f64, alpha: f64, rho: f64) -> Result<f64, ModelError> {
    if !(alpha > 0.0) {
        return Err(ModelError::BadParameter(format!("alpha must be positive, got {alpha}")));
    }
    let h = bvn::bvn_cdf(pi_ij, pi_ji + alpha, rho)?;
    Ok(bvn::norm_cdf(pi_ij) - h)
}

/// Classifies an error draw into its equilibrium region. Boundary ties follow
/// the `<=` convention of the threshold-crossing model: a link forms when the
/// index weakly exceeds the error.
pub fn solve_dyad(pi_ij: f64, pi_ji: f64, alpha: f64, eps_ij: f64, eps_ji: f64) -> DyadOutcome {
    debug_assert!(alpha > 0.0);
    let i_links_alone = eps_ij <= pi_ij;
    let i_links_if_reciprocated = eps_ij <= pi_ij + alpha;
    let j_links_alone = eps_ji <= pi_ji;
    let j_links_if_reciprocated = eps_ji <= pi_ji + alpha;

    if i_links_alone && !j_links_if_reciprocated {
        DyadOutcome::OneWayIj
    } else if j_links_alone && !i_links_if_reciprocated {
        DyadOutcome::OneWayJi
    } else if !i_links_alone && i_links_if_reciprocated && !j_links_alone && j_links_if_reciprocated
    {
        DyadOutcome::MultipleEquilibria
    } else if i_links_if_reciprocated && j_links_if_reciprocated {
        DyadOutcome::Mutual
    } else {
        DyadOutcome::NoLinks
    }
}
