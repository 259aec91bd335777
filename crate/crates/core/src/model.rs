//! Model parameters, priors, and the log-likelihood / log-posterior of the
//! node-corrected logit blockmodel.
//!
//! Edge `(i, j)` is Bernoulli with success log-odds
//! `s_ij = gamma_{sigma_i sigma_j} + eta_i + eta_j`, where the block term is
//! zero within a community and the off-diagonal block log-odds are constrained
//! non-positive (within-community association is never less likely than
//! between-community association).

use serde::{Deserialize, Serialize};

use crate::design::{gamma_col, gamma_dim};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::LabelVector;

/// Prior hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Prior variance of the Gaussian (ridge) prior on `(gamma, eta)`.
    pub tau2: f64,
    /// Dirichlet parameter for the mixing vector; length K.
    pub alpha: Vec<f64>,
    /// Number of communities.
    pub k: u32,
}

impl Hyperparams {
    pub fn new(k: u32, tau2: f64, alpha: Vec<f64>) -> Result<Self> {
        let h = Hyperparams { tau2, alpha, k };
        h.validate()?;
        Ok(h)
    }

    /// Symmetric Dirichlet weight `a` on all K components.
    pub fn symmetric(k: u32, tau2: f64, a: f64) -> Result<Self> {
        Self::new(k, tau2, vec![a; k as usize])
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid("K >= 2 required"));
        }
        if !(self.tau2 > 0.0) {
            return Err(Error::invalid("tau2 must be positive"));
        }
        if self.alpha.len() != self.k as usize {
            return Err(Error::invalid("alpha length must equal K"));
        }
        if self.alpha.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::invalid("alpha entries must be positive"));
        }
        Ok(())
    }
}

/// Model parameters: off-diagonal block log-odds, node intercepts, and the
/// label mixing vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    /// Length `C(K,2)`, ordered as in [`crate::design::gamma_pairs`]; all `<= 0`.
    pub gamma: Vec<f64>,
    /// Length n node intercepts.
    pub eta: Vec<f64>,
    /// Length K probability vector.
    pub pi: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(k: u32, n: usize) -> Self {
        ModelParams {
            gamma: vec![0.0; gamma_dim(k)],
            eta: vec![0.0; n],
            pi: vec![1.0 / k as f64; k as usize],
        }
    }

    pub fn validate(&self, k: u32, n: usize) -> Result<()> {
        if self.gamma.len() != gamma_dim(k) {
            return Err(Error::invalid("gamma length must be C(K,2)"));
        }
        if self.gamma.iter().any(|&g| g > 0.0) {
            return Err(Error::invalid("gamma entries must be <= 0"));
        }
        if self.eta.len() != n {
            return Err(Error::invalid("eta length must equal node count"));
        }
        if self.pi.len() != k as usize {
            return Err(Error::invalid("pi length must equal K"));
        }
        let total: f64 = self.pi.iter().sum();
        if self.pi.iter().any(|&p| !(p > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("pi must be a strictly positive probability vector"));
        }
        Ok(())
    }

    /// Block log-odds between labels `a` and `b` (zero within a community).
    pub fn gamma_between(&self, a: u32, b: u32, k: u32) -> f64 {
        if a == b {
            0.0
        } else {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.gamma[gamma_col(lo, hi, k)]
        }
    }
}

/// Numerically stable `log(1 + exp(x))`.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn logit_inv(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood of the graph:
/// `sum_{i<j} [A_ij s_ij - log(1 + exp(s_ij))]`.
pub fn log_likelihood(graph: &Graph, sigma: &LabelVector, params: &ModelParams) -> f64 {
    let n = graph.n();
    let k = sigma.k();
    let mut total = 0.0;
    for i in 0..n {
        let neigh = graph.neighbors(i);
        let mut cursor = 0;
        for j in i + 1..n {
            while cursor < neigh.len() && (neigh[cursor] as usize) < j {
                cursor += 1;
            }
            let a_ij = cursor < neigh.len() && neigh[cursor] as usize == j;
            let s = params.gamma_between(sigma.label(i), sigma.label(j), k)
                + params.eta[i]
                + params.eta[j];
            if a_ij {
                total += s;
            }
            total -= log1p_exp(s);
        }
    }
    total
}

/// Unnormalized log-posterior of a full state `(sigma, params)`.
///
/// Sum of the likelihood, the ridge prior on `(gamma, eta)`, the label prior
/// `sum_k N_k log pi_k`, and the Dirichlet prior `sum_k (alpha_k - 1) log pi_k`.
/// Constraints (`gamma <= 0`, all `N_k >= 2`) are assumed to hold.
pub fn log_posterior(
    graph: &Graph,
    sigma: &LabelVector,
    params: &ModelParams,
    hyper: &Hyperparams,
) -> f64 {
    log_likelihood(graph, sigma, params)
        + log_prior_beta(params, hyper)
        + log_prior_sigma_pi(sigma, params)
        + log_prior_pi(params, hyper)
}

pub fn log_prior_beta(params: &ModelParams, hyper: &Hyperparams) -> f64 {
    let ss: f64 = params.gamma.iter().map(|g| g * g).sum::<f64>()
        + params.eta.iter().map(|e| e * e).sum::<f64>();
    -ss / (2.0 * hyper.tau2)
}

pub fn log_prior_sigma_pi(sigma: &LabelVector, params: &ModelParams) -> f64 {
    sigma
        .sizes()
        .iter()
        .zip(&params.pi)
        .map(|(&nk, &pk)| nk as f64 * pk.ln())
        .sum()
}

pub fn log_prior_pi(params: &ModelParams, hyper: &Hyperparams) -> f64 {
    hyper
        .alpha
        .iter()
        .zip(&params.pi)
        .map(|(&a, &p)| (a - 1.0) * p.ln())
        .sum()
}
