//! Posterior Gibbs sampler: full conditionals for the labels, the mixing
//! vector, and (via Polya-Gamma augmentation) the regression block.
//!
//! One iteration is:
//! 1. a systematic label sweep (per-node categorical conditional, rejecting
//!    moves that would leave a community with fewer than two nodes), followed
//!    by canonical remapping with the block log-odds permuted alongside;
//! 2. a conjugate Dirichlet draw for the mixing vector;
//! 3. Polya-Gamma latent draws for every node pair, then `(gamma, eta)` from
//!    the constrained joint Gaussian: rejection against `gamma <= 0`, with a
//!    within-block Gibbs fallback whose conditional blocks come from SWEEP
//!    pivoting on the block-log-odds indices of the augmented precision
//!    matrix.

use nalgebra::{DMatrix, DVector};

use crate::design::{gamma_col, gamma_dim};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::{remap, LabelVector};
use crate::linalg::sweep_indices;
use crate::model::{
    log1p_exp, log_likelihood, log_prior_beta, log_prior_pi, log_prior_sigma_pi, log_posterior,
    Hyperparams, ModelParams,
};
use crate::random::{dirichlet, multinomial_index, mvn_truncated_nonpositive, pg1, RngHandle};
use crate::trace::{RunMeta, SampleTrace};

/// One Gibbs chain: canonical labels, parameters, cached unnormalized
/// log-posterior, and the chain's RNG stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub sigma: LabelVector,
    pub params: ModelParams,
    pub rng: RngHandle,
    ll: f64,
    lp_beta: f64,
    lp_sigma_pi: f64,
    lp_pi: f64,
}

impl ChainState {
    /// Build a state, canonicalizing the labels (permuting gamma alongside)
    /// and validating the constraints.
    pub fn new(
        graph: &Graph,
        hyper: &Hyperparams,
        sigma: LabelVector,
        mut params: ModelParams,
        rng: RngHandle,
    ) -> Result<Self> {
        hyper.validate()?;
        if sigma.len() != graph.n() {
            return Err(Error::invalid("label vector length != node count"));
        }
        if sigma.k() != hyper.k {
            return Err(Error::invalid("label alphabet does not match K"));
        }
        if sigma.min_size() < 2 {
            return Err(Error::invalid(
                "every community must have at least two nodes",
            ));
        }
        let (sigma, rho) = remap(&sigma);
        if !rho.is_identity() {
            params.gamma = rho.permute_pairs(&params.gamma)?;
        }
        params.validate(hyper.k, graph.n())?;
        let mut state = ChainState {
            sigma,
            params,
            rng,
            ll: 0.0,
            lp_beta: 0.0,
            lp_sigma_pi: 0.0,
            lp_pi: 0.0,
        };
        state.refresh_cached(graph, hyper);
        Ok(state)
    }

    fn refresh_cached(&mut self, graph: &Graph, hyper: &Hyperparams) {
        self.ll = log_likelihood(graph, &self.sigma, &self.params);
        self.lp_beta = log_prior_beta(&self.params, hyper);
        self.lp_sigma_pi = log_prior_sigma_pi(&self.sigma, &self.params);
        self.lp_pi = log_prior_pi(&self.params, hyper);
    }

    /// Cached unnormalized log-posterior.
    pub fn log_post(&self) -> f64 {
        self.ll + self.lp_beta + self.lp_sigma_pi + self.lp_pi
    }

    /// Recompute the log-posterior from scratch (oracle for the cached value).
    pub fn recompute_log_posterior(&self, graph: &Graph, hyper: &Hyperparams) -> f64 {
        log_posterior(graph, &self.sigma, &self.params, hyper)
    }

    /// Install post-scan labels: remap to canonical form, permute gamma
    /// alongside, apply the likelihood delta accumulated by the scan.
    pub(crate) fn apply_scan(
        &mut self,
        entries: Vec<u32>,
        hyper: &Hyperparams,
        ll_delta: f64,
    ) -> Result<()> {
        let sigma = LabelVector::new(entries, hyper.k)?;
        let (canonical, rho) = remap(&sigma);
        if !rho.is_identity() {
            self.params.gamma = rho.permute_pairs(&self.params.gamma)?;
        }
        self.sigma = canonical;
        self.ll += ll_delta;
        // remapping relabels sigma without permuting pi, so recompute the label prior
        self.lp_sigma_pi = log_prior_sigma_pi(&self.sigma, &self.params);
        Ok(())
    }

    pub(crate) fn refresh_pi_terms(&mut self, hyper: &Hyperparams) {
        self.lp_sigma_pi = log_prior_sigma_pi(&self.sigma, &self.params);
        self.lp_pi = log_prior_pi(&self.params, hyper);
    }

    pub(crate) fn set_beta_caches(&mut self, ll: f64, lp_beta: f64) {
        self.ll = ll;
        self.lp_beta = lp_beta;
    }
}

/// Counts of label-move outcomes across sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub accepted_moves: u64,
    pub rejected_moves: u64,
}

impl SweepStats {
    fn absorb(&mut self, other: SweepStats) {
        self.accepted_moves += other.accepted_moves;
        self.rejected_moves += other.rejected_moves;
    }
}

/// How to turn a node's conditional log-weights into a label choice.
pub(crate) enum LabelChoice<'a> {
    Sample(&'a mut RngHandle),
    Argmax,
}

/// Systematic scan over nodes 0..n-1 shared by the sampler and the mode
/// finder. Mutates `entries`/`sizes` in place and returns the move counts
/// together with the likelihood delta of the accepted moves.
pub(crate) fn sigma_scan(
    entries: &mut [u32],
    sizes: &mut [u32],
    params: &ModelParams,
    graph: &Graph,
    mut choice: LabelChoice,
) -> (SweepStats, f64) {
    let n = graph.n();
    let k = params.pi.len() as u32;
    let ku = k as usize;
    let ln_pi: Vec<f64> = params.pi.iter().map(|p| p.ln()).collect();
    // gamma lookup table over ordered label pairs
    let mut gamma_table = vec![0.0f64; ku * ku];
    for a in 1..=k {
        for b in 1..=k {
            gamma_table[((a - 1) * k + (b - 1)) as usize] = params.gamma_between(a, b, k);
        }
    }
    let mut stats = SweepStats::default();
    let mut ll_delta = 0.0;
    let mut lik = vec![0.0f64; ku];
    let mut probs = vec![0.0f64; ku];

    for i in 0..n {
        lik.iter_mut().for_each(|v| *v = 0.0);
        let eta_i = params.eta[i];
        let neigh = graph.neighbors(i);
        let mut cursor = 0usize;
        for j in 0..n {
            if j == i {
                continue;
            }
            while cursor < neigh.len() && (neigh[cursor] as usize) < j {
                cursor += 1;
            }
            let a_ij = cursor < neigh.len() && neigh[cursor] as usize == j;
            let base = eta_i + params.eta[j];
            let row = ((entries[j] - 1) * k) as usize;
            for (cand, l) in lik.iter_mut().enumerate() {
                let s = gamma_table[row + cand] + base;
                *l += if a_ij { s - log1p_exp(s) } else { -log1p_exp(s) };
            }
        }
        let cur = entries[i];
        let drawn = match choice {
            LabelChoice::Sample(ref mut rng) => {
                let max = lik
                    .iter()
                    .zip(&ln_pi)
                    .map(|(l, p)| l + p)
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for c in 0..ku {
                    probs[c] = (lik[c] + ln_pi[c] - max).exp();
                    total += probs[c];
                }
                for p in probs.iter_mut() {
                    *p /= total;
                }
                debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                multinomial_index(&probs, rng).expect("normalized weights")
            }
            LabelChoice::Argmax => {
                let mut best = 0usize;
                let mut best_w = f64::NEG_INFINITY;
                for c in 0..ku {
                    let w = lik[c] + ln_pi[c];
                    if w > best_w {
                        best_w = w;
                        best = c;
                    }
                }
                best as u32 + 1
            }
        };
        if drawn != cur {
            if sizes[(cur - 1) as usize] <= 2 {
                // the move would empty community `cur` below two nodes
                stats.rejected_moves += 1;
            } else {
                ll_delta += lik[(drawn - 1) as usize] - lik[(cur - 1) as usize];
                sizes[(cur - 1) as usize] -= 1;
                sizes[(drawn - 1) as usize] += 1;
                entries[i] = drawn;
                stats.accepted_moves += 1;
            }
        }
    }
    (stats, ll_delta)
}

/// Gibbs step 1: one systematic sweep of the label conditionals, with the
/// minimum-size rejection rule, then canonical remapping.
pub fn sample_sigma_sweep(
    state: &mut ChainState,
    graph: &Graph,
    hyper: &Hyperparams,
) -> Result<SweepStats> {
    let mut entries = state.sigma.entries().to_vec();
    let mut sizes = state.sigma.sizes().to_vec();
    let ChainState { params, rng, .. } = state;
    let (stats, ll_delta) = sigma_scan(
        &mut entries,
        &mut sizes,
        params,
        graph,
        LabelChoice::Sample(rng),
    );
    state.apply_scan(entries, hyper, ll_delta)?;
    Ok(stats)
}

/// Gibbs step 2: conjugate Dirichlet draw for the mixing vector.
pub fn sample_pi(state: &mut ChainState, hyper: &Hyperparams) -> Result<()> {
    let posterior: Vec<f64> = hyper
        .alpha
        .iter()
        .zip(state.sigma.sizes())
        .map(|(&a, &nk)| a + nk as f64)
        .collect();
    state.params.pi = dirichlet(&posterior, &mut state.rng)?;
    state.lp_sigma_pi = log_prior_sigma_pi(&state.sigma, &state.params);
    state.lp_pi = log_prior_pi(&state.params, hyper);
    Ok(())
}

/// Pairwise-accumulated normal equations `X^T W X + tau^{-2} I` and `X^T kappa`
/// shared by the sampler (`W = Omega`, `kappa = A - 1/2`) and the IRLS mode
/// finder (`W = mu(1-mu)`, `kappa = A - mu`).
pub(crate) struct PairSystem {
    /// Symmetric `(q + n) x (q + n)` matrix, gamma columns first.
    pub p: DMatrix<f64>,
    /// Length `q + n` right-hand accumulator.
    pub g: DVector<f64>,
    pub q: usize,
}

pub(crate) fn assemble_system(
    graph: &Graph,
    sigma: &LabelVector,
    params: &ModelParams,
    tau2: f64,
    mut weight_fn: impl FnMut(f64, bool) -> Result<(f64, f64)>,
) -> Result<PairSystem> {
    let n = graph.n();
    let k = sigma.k();
    let q = gamma_dim(k);
    let dim = q + n;
    let mut p = DMatrix::zeros(dim, dim);
    let mut g = DVector::zeros(dim);
    for c in 0..dim {
        p[(c, c)] = 1.0 / tau2;
    }
    for i in 0..n {
        let neigh = graph.neighbors(i);
        let mut cursor = 0usize;
        let (ei, eta_i, si) = (q + i, params.eta[i], sigma.label(i));
        for j in i + 1..n {
            while cursor < neigh.len() && (neigh[cursor] as usize) < j {
                cursor += 1;
            }
            let a_ij = cursor < neigh.len() && neigh[cursor] as usize == j;
            let sj = sigma.label(j);
            let s = params.gamma_between(si, sj, k) + eta_i + params.eta[j];
            let (w, kappa) = weight_fn(s, a_ij)?;
            let ej = q + j;
            if si != sj {
                let (lo, hi) = if si < sj { (si, sj) } else { (sj, si) };
                let c = gamma_col(lo, hi, k);
                p[(c, c)] += w;
                p[(c, ei)] += w;
                p[(ei, c)] += w;
                p[(c, ej)] += w;
                p[(ej, c)] += w;
                g[c] += kappa;
            }
            p[(ei, ei)] += w;
            p[(ej, ej)] += w;
            p[(ei, ej)] += w;
            p[(ej, ei)] += w;
            g[ei] += kappa;
            g[ej] += kappa;
        }
    }
    Ok(PairSystem { p, g, q })
}

/// Outcome details of one regression-block draw.
#[derive(Debug, Clone, Copy, Default)]
pub struct BetaStats {
    /// Joint rejection found no admissible draw; the within-block Gibbs
    /// fallback produced this sweep's `(gamma, eta)`.
    pub fallback: bool,
}

const BETA_REJECTION_ATTEMPTS: usize = 100;
const BETA_FALLBACK_SWEEPS: usize = 20;

fn std_normal_vec(len: usize, rng: &mut RngHandle) -> DVector<f64> {
    DVector::from_iterator(
        len,
        (0..len).map(|_| {
            rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, rng)
        }),
    )
}

/// Gibbs step 3: Polya-Gamma latent draws, then `(gamma, eta)` jointly from
/// `I(gamma <= 0) * N(m, V)` with `V = (X^T Omega X + tau^{-2} I)^{-1}` and
/// `m = V X^T Omega z`.
///
/// The primary path draws from the unconstrained joint normal and accepts
/// when the constraint holds (exact). If no draw is accepted, the sweep falls
/// back to within-block Gibbs from the previous point: `eta | gamma` is a
/// plain normal and `gamma | eta` a truncated normal with diagonal
/// conditional covariance (the Schur complement produced by SWEEP pivoting on
/// the block-log-odds indices); both conditionals are exact, so the fallback
/// leaves the constrained joint invariant.
///
/// `sweep_tag` keys the latent block's RNG sub-stream (one per sweep), so the
/// pairwise draws are reproducible independent of scheduling.
pub fn sample_beta(
    state: &mut ChainState,
    graph: &Graph,
    hyper: &Hyperparams,
    sweep_tag: u64,
) -> Result<BetaStats> {
    let n = graph.n();
    let mut omega_rng = state.rng.fork(0xE11A ^ sweep_tag.rotate_left(13));
    let sys = assemble_system(
        graph,
        &state.sigma,
        &state.params,
        hyper.tau2,
        |s, a_ij| {
            let w = pg1(s, &mut omega_rng)?;
            Ok((w, if a_ij { 0.5 } else { -0.5 }))
        },
    )?;
    let q = sys.q;
    let dim = q + n;

    // Keep the gamma blocks of the precision before they are swept away.
    let gamma_prec: Vec<f64> = (0..q).map(|c| sys.p[(c, c)]).collect();
    let gamma_eta: DMatrix<f64> = sys.p.view((0, q), (q, n)).into_owned();
    let b_gamma: Vec<f64> = (0..q).map(|c| sys.g[c]).collect();

    // Augment with the right-hand side and sweep out the gamma pivots: the
    // eta block becomes the conditional (Schur-complement) precision of eta
    // given gamma, and the augmented column the matching right-hand side.
    let mut aug = DMatrix::zeros(dim + 1, dim + 1);
    aug.view_mut((0, 0), (dim, dim)).copy_from(&sys.p);
    for r in 0..dim {
        aug[(r, dim)] = sys.g[r];
        aug[(dim, r)] = sys.g[r];
    }
    sweep_indices(&mut aug, &(0..q).collect::<Vec<_>>())?;
    let s_eta = aug.view((q, q), (n, n)).into_owned();
    let b_eta = DVector::from_iterator(n, (0..n).map(|r| aug[(q + r, dim)]));
    let chol_s = nalgebra::Cholesky::new(s_eta)
        .ok_or_else(|| Error::numerical("eta marginal precision is not positive definite"))?;
    let m_eta = chol_s.solve(&b_eta);
    let mut m = DVector::zeros(dim);
    for c in 0..q {
        let mut dot = 0.0;
        for v in 0..n {
            dot += gamma_eta[(c, v)] * m_eta[v];
        }
        m[c] = (b_gamma[c] - dot) / gamma_prec[c];
    }
    for v in 0..n {
        m[q + v] = m_eta[v];
    }

    // joint rejection: beta = m + L^{-T} z with P = L L^T, accept if gamma <= 0
    let chol_p = nalgebra::Cholesky::new(sys.p.clone())
        .ok_or_else(|| Error::numerical("posterior precision is not positive definite"))?;
    let lt = chol_p.l().transpose();
    let mut accepted: Option<DVector<f64>> = None;
    for _ in 0..BETA_REJECTION_ATTEMPTS {
        let z = std_normal_vec(dim, &mut state.rng);
        let x = lt
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::numerical("triangular solve failed"))?;
        let beta = &m + x;
        if (0..q).all(|c| beta[c] <= 0.0) {
            accepted = Some(beta);
            break;
        }
    }

    let fallback = accepted.is_none();
    match accepted {
        Some(beta) => {
            state.params.gamma = (0..q).map(|c| beta[c]).collect();
            state.params.eta = (q..dim).map(|c| beta[c]).collect();
        }
        None => {
            // within-block Gibbs from the previous point: eta | gamma is
            // normal with precision P_etaeta; gamma | eta is truncated with
            // diagonal precision P_gammagamma
            let p_etaeta = sys.p.view((q, q), (n, n)).into_owned();
            let chol_cond = nalgebra::Cholesky::new(p_etaeta)
                .ok_or_else(|| Error::numerical("eta conditional precision not SPD"))?;
            let lt_cond = chol_cond.l().transpose();
            let mut gamma = DVector::from_iterator(q, state.params.gamma.iter().copied());
            let mut eta = DVector::zeros(n);
            for _ in 0..BETA_FALLBACK_SWEEPS {
                let mut rhs = DVector::zeros(n);
                for v in 0..n {
                    let mut dot = 0.0;
                    for c in 0..q {
                        dot += gamma_eta[(c, v)] * gamma[c];
                    }
                    rhs[v] = sys.g[q + v] - dot;
                }
                let mean = chol_cond.solve(&rhs);
                let z = std_normal_vec(n, &mut state.rng);
                let x = lt_cond
                    .solve_upper_triangular(&z)
                    .ok_or_else(|| Error::numerical("triangular solve failed"))?;
                eta = &mean + x;

                let mut cond_mean = DVector::zeros(q);
                let mut cond_cov = DMatrix::zeros(q, q);
                for c in 0..q {
                    let mut dot = 0.0;
                    for v in 0..n {
                        dot += gamma_eta[(c, v)] * eta[v];
                    }
                    cond_mean[c] = (b_gamma[c] - dot) / gamma_prec[c];
                    cond_cov[(c, c)] = 1.0 / gamma_prec[c];
                }
                let (g, _path) = mvn_truncated_nonpositive(&cond_mean, &cond_cov, &mut state.rng)?;
                gamma = g;
            }
            state.params.gamma = gamma.iter().copied().collect();
            state.params.eta = eta.iter().copied().collect();
        }
    }

    state.ll = log_likelihood(graph, &state.sigma, &state.params);
    state.lp_beta = log_prior_beta(&state.params, hyper);
    Ok(BetaStats { fallback })
}

/// Iteration schedule for a run.
#[derive(Debug, Clone, Copy)]
pub struct GibbsOptions {
    pub iters: u64,
    pub burnin: u64,
    pub thin: u64,
}

impl GibbsOptions {
    pub fn validate(&self) -> Result<()> {
        if self.iters <= self.burnin {
            return Err(Error::invalid("iters must exceed burnin"));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be at least 1"));
        }
        Ok(())
    }
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions {
            iters: 5000,
            burnin: 1000,
            thin: 1,
        }
    }
}

/// Run the full sampler and record post-burn-in thinned samples.
pub fn gibbs_run(
    graph: &Graph,
    hyper: &Hyperparams,
    mut state: ChainState,
    opts: GibbsOptions,
) -> Result<SampleTrace> {
    opts.validate()?;
    let meta = RunMeta {
        seed: state.rng.seed(),
        stream: state.rng.stream(),
        n: graph.n(),
        k: hyper.k,
        tau2: hyper.tau2,
        alpha: hyper.alpha.clone(),
        iters: opts.iters,
        burnin: opts.burnin,
        thin: opts.thin,
        ..RunMeta::default()
    };
    let mut trace = SampleTrace::empty(graph.n(), hyper.k, meta);
    let mut stats = SweepStats::default();
    let mut fallbacks = 0u64;
    for t in 1..=opts.iters {
        stats.absorb(sample_sigma_sweep(&mut state, graph, hyper)?);
        sample_pi(&mut state, hyper)?;
        let beta_stats = sample_beta(&mut state, graph, hyper, t)?;
        if beta_stats.fallback {
            fallbacks += 1;
        }
        if t > opts.burnin && (t - opts.burnin) % opts.thin == 0 {
            trace.push_sample(
                t,
                state.sigma.entries().to_vec(),
                state.params.gamma.clone(),
                state.params.eta.clone(),
                state.params.pi.clone(),
                state.log_post(),
            );
        }
    }
    trace.meta.accepted_moves = stats.accepted_moves;
    trace.meta.rejected_moves = stats.rejected_moves;
    trace.meta.mvn_fallbacks = fallbacks;
    Ok(trace)
}
