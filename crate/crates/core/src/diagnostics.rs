//! Convergence reporting across chains: potential scale reduction factors,
//! reported but never enforced.

use crate::trace::SampleTrace;

/// Gelman-Rubin potential scale reduction over per-chain scalar series.
/// `None` with fewer than two chains or degenerate within-chain variance.
pub fn psrf(chains: &[Vec<f64>]) -> Option<f64> {
    if chains.len() < 2 {
        return None;
    }
    let n = chains.iter().map(|c| c.len()).min()?;
    if n < 2 {
        return None;
    }
    let m = chains.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = chains
        .iter()
        .map(|c| c[..n].iter().sum::<f64>() / nf)
        .collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = nf / (m - 1.0) * means.iter().map(|&x| (x - grand) * (x - grand)).sum::<f64>();
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| c[..n].iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m;
    if w <= 0.0 {
        return None;
    }
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    Some((var_plus / w).sqrt())
}

/// PSRF values for the log-posterior and each block-log-odds coordinate.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PsrfReport {
    pub log_post: Option<f64>,
    pub gamma: Vec<Option<f64>>,
    pub chains: usize,
    pub samples_per_chain: usize,
}

pub fn psrf_report(traces: &[SampleTrace]) -> PsrfReport {
    let lp: Vec<Vec<f64>> = traces.iter().map(|t| t.log_post.clone()).collect();
    let q = traces
        .first()
        .and_then(|t| t.gamma_samples.first())
        .map_or(0, |g| g.len());
    let gamma = (0..q)
        .map(|c| {
            let series: Vec<Vec<f64>> = traces
                .iter()
                .map(|t| t.gamma_samples.iter().map(|g| g[c]).collect())
                .collect();
            psrf(&series)
        })
        .collect();
    PsrfReport {
        log_post: psrf(&lp),
        gamma,
        chains: traces.len(),
        samples_per_chain: traces.iter().map(|t| t.len()).min().unwrap_or(0),
    }
}
