//! Ordered post-burn-in samples from one chain, plus run metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metadata describing how a trace was produced.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub stream: u64,
    pub n: usize,
    pub k: u32,
    pub tau2: f64,
    pub alpha: Vec<f64>,
    pub iters: u64,
    pub burnin: u64,
    pub thin: u64,
    /// Accepted label moves across all sweeps.
    pub accepted_moves: u64,
    /// Label moves rejected by the minimum-community-size constraint.
    pub rejected_moves: u64,
    /// Times the constrained block-log-odds draw fell back to Gibbs sweeps.
    pub mvn_fallbacks: u64,
}

/// Post-burn-in, thinned samples of `(sigma, gamma, eta, pi)` with per-node
/// marginal label counts.
#[derive(Debug, Clone)]
pub struct SampleTrace {
    pub n: usize,
    pub k: u32,
    /// Iteration index of each recorded sample.
    pub iterations: Vec<u64>,
    /// Canonical label vectors, one per sample.
    pub sigma_samples: Vec<Vec<u32>>,
    pub gamma_samples: Vec<Vec<f64>>,
    pub eta_samples: Vec<Vec<f64>>,
    pub pi_samples: Vec<Vec<f64>>,
    pub log_post: Vec<f64>,
    /// `marginal_counts[i][k-1]` = number of samples with `sigma_i = k`.
    pub marginal_counts: Vec<Vec<u64>>,
    /// Posterior mean of eta, carried when a trace is reloaded from disk
    /// without full eta samples.
    pub eta_mean: Option<Vec<f64>>,
    pub meta: RunMeta,
}

impl SampleTrace {
    pub fn empty(n: usize, k: u32, meta: RunMeta) -> Self {
        SampleTrace {
            n,
            k,
            iterations: Vec::new(),
            sigma_samples: Vec::new(),
            gamma_samples: Vec::new(),
            eta_samples: Vec::new(),
            pi_samples: Vec::new(),
            log_post: Vec::new(),
            marginal_counts: vec![vec![0; k as usize]; n],
            eta_mean: None,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.sigma_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_samples.is_empty()
    }

    pub fn push_sample(
        &mut self,
        iteration: u64,
        sigma: Vec<u32>,
        gamma: Vec<f64>,
        eta: Vec<f64>,
        pi: Vec<f64>,
        log_post: f64,
    ) {
        debug_assert_eq!(sigma.len(), self.n);
        for (i, &label) in sigma.iter().enumerate() {
            self.marginal_counts[i][(label - 1) as usize] += 1;
        }
        self.iterations.push(iteration);
        self.sigma_samples.push(sigma);
        self.gamma_samples.push(gamma);
        self.eta_samples.push(eta);
        self.pi_samples.push(pi);
        self.log_post.push(log_post);
    }

    /// Recompute marginal counts from the stored sigma samples.
    pub fn rebuild_counts(&mut self) {
        self.marginal_counts = vec![vec![0; self.k as usize]; self.n];
        for s in &self.sigma_samples {
            for (i, &label) in s.iter().enumerate() {
                self.marginal_counts[i][(label - 1) as usize] += 1;
            }
        }
    }

    /// Posterior mean of eta per node, from full samples when available.
    pub fn eta_posterior_mean(&self) -> Result<Vec<f64>> {
        if !self.eta_samples.is_empty() {
            let t = self.eta_samples.len() as f64;
            let mut mean = vec![0.0; self.n];
            for s in &self.eta_samples {
                for (m, &v) in mean.iter_mut().zip(s) {
                    *m += v;
                }
            }
            for m in mean.iter_mut() {
                *m /= t;
            }
            return Ok(mean);
        }
        self.eta_mean
            .clone()
            .ok_or_else(|| Error::invalid("trace carries neither eta samples nor eta means"))
    }

    /// Check structural invariants: row sums of the marginal counts equal the
    /// sample count and every stored sigma is canonical.
    pub fn validate(&self) -> Result<()> {
        let t = self.len() as u64;
        for row in &self.marginal_counts {
            if row.iter().sum::<u64>() != t {
                return Err(Error::invalid("marginal count row sum != sample count"));
            }
        }
        for s in &self.sigma_samples {
            let lv = crate::labels::LabelVector::new(s.clone(), self.k)?;
            if !lv.is_canonical() {
                return Err(Error::invalid("non-canonical sigma sample in trace"));
            }
        }
        Ok(())
    }

    /// Concatenate several chains into a single trace (for estimation).
    pub fn merge(traces: Vec<SampleTrace>) -> Result<SampleTrace> {
        let first = traces
            .first()
            .ok_or_else(|| Error::invalid("cannot merge zero traces"))?;
        let (n, k) = (first.n, first.k);
        let mut merged = SampleTrace::empty(n, k, first.meta.clone());
        let mut eta_means: Vec<Vec<f64>> = Vec::new();
        for t in traces {
            if t.n != n || t.k != k {
                return Err(Error::invalid("traces have mismatched dimensions"));
            }
            if t.eta_samples.is_empty() {
                if let Some(m) = &t.eta_mean {
                    eta_means.push(m.clone());
                }
            }
            for idx in 0..t.len() {
                merged.push_sample(
                    t.iterations[idx],
                    t.sigma_samples[idx].clone(),
                    t.gamma_samples[idx].clone(),
                    t.eta_samples.get(idx).cloned().unwrap_or_default(),
                    t.pi_samples[idx].clone(),
                    t.log_post[idx],
                );
            }
        }
        // If chains carried only eta means, average them (equal sample counts).
        if merged.eta_samples.iter().any(|e| e.is_empty()) {
            merged.eta_samples.clear();
            if !eta_means.is_empty() {
                let mut mean = vec![0.0; n];
                for m in &eta_means {
                    for (a, &b) in mean.iter_mut().zip(m) {
                        *a += b;
                    }
                }
                for a in mean.iter_mut() {
                    *a /= eta_means.len() as f64;
                }
                merged.eta_mean = Some(mean);
            }
        }
        Ok(merged)
    }
}
