//! Point estimation from a sample trace: the remapped centroid (consensus)
//! estimator, a candidate-set Binder estimator, the frequency-mode MAP
//! estimator, and posterior summaries.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::{frequency_table, quantile_type7, remap, LabelVector};
use crate::trace::SampleTrace;

fn require_samples(trace: &SampleTrace) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::invalid("trace holds no samples"));
    }
    Ok(())
}

/// Remapped centroid estimator: per-node argmax of the marginal label
/// frequencies (ties to the smallest label), mapped to canonical form.
///
/// Minimizes the Monte-Carlo posterior expected Hamming loss over the
/// canonically remapped sample space.
pub fn centroid_estimate(trace: &SampleTrace) -> Result<LabelVector> {
    require_samples(trace)?;
    let entries: Vec<u32> = trace
        .marginal_counts
        .iter()
        .map(|row| {
            let mut best = 0usize;
            for (k, &c) in row.iter().enumerate() {
                if c > row[best] {
                    best = k;
                }
            }
            best as u32 + 1
        })
        .collect();
    let consensus = LabelVector::new(entries, trace.k)?;
    Ok(remap(&consensus).0)
}

/// Pairwise co-clustering probabilities `p[i][j] = Pr(sigma_i = sigma_j | A)`
/// estimated from the trace; flattened upper triangle `i < j`.
fn coclustering_upper(trace: &SampleTrace) -> Vec<f64> {
    let n = trace.n;
    let t = trace.len() as f64;
    let mut counts = vec![0.0f64; n * (n - 1) / 2];
    for s in &trace.sigma_samples {
        let mut idx = 0usize;
        for i in 0..n {
            let si = s[i];
            for j in i + 1..n {
                if si == s[j] {
                    counts[idx] += 1.0;
                }
                idx += 1;
            }
        }
    }
    for c in counts.iter_mut() {
        *c /= t;
    }
    counts
}

/// Monte-Carlo posterior expected Binder loss of a candidate partition,
/// computed exactly from the co-clustering probabilities.
fn expected_binder_from_upper(candidate: &[u32], p_upper: &[f64]) -> f64 {
    let n = candidate.len();
    let mut risk = 0.0;
    let mut idx = 0usize;
    for i in 0..n {
        let ci = candidate[i];
        for j in i + 1..n {
            let p = p_upper[idx];
            risk += if ci == candidate[j] { 1.0 - p } else { p };
            idx += 1;
        }
    }
    risk
}

/// Posterior expected Binder loss of `candidate` under the trace.
pub fn expected_binder_risk(trace: &SampleTrace, candidate: &LabelVector) -> Result<f64> {
    require_samples(trace)?;
    if candidate.len() != trace.n {
        return Err(Error::invalid("candidate length != trace dimension"));
    }
    Ok(expected_binder_from_upper(
        candidate.entries(),
        &coclustering_upper(trace),
    ))
}

/// Posterior expected Hamming loss of `candidate` against the remapped samples.
pub fn expected_hamming_risk(trace: &SampleTrace, candidate: &LabelVector) -> Result<f64> {
    require_samples(trace)?;
    if candidate.len() != trace.n {
        return Err(Error::invalid("candidate length != trace dimension"));
    }
    let t = trace.len() as f64;
    let mut agree = 0.0;
    for (i, &c) in candidate.entries().iter().enumerate() {
        if c <= trace.k {
            agree += trace.marginal_counts[i][(c - 1) as usize] as f64;
        }
    }
    Ok(trace.n as f64 - agree / t)
}

/// Binder estimator over the candidate set: every distinct sampled
/// configuration plus the centroid. Exact Binder minimization is a binary
/// integer program, so the search is restricted to this set; the winner is
/// the candidate with the smallest Monte-Carlo expected Binder loss (ties to
/// the earliest candidate, centroid last).
pub fn binder_estimate(trace: &SampleTrace) -> Result<LabelVector> {
    require_samples(trace)?;
    let p_upper = coclustering_upper(trace);
    let centroid = centroid_estimate(trace)?;
    let mut best: Option<(f64, Vec<u32>)> = None;
    for (first_idx, _count) in frequency_table(&trace.sigma_samples) {
        let cand = &trace.sigma_samples[first_idx];
        let risk = expected_binder_from_upper(cand, &p_upper);
        if best.as_ref().map_or(true, |(r, _)| risk < *r) {
            best = Some((risk, cand.clone()));
        }
    }
    let centroid_risk = expected_binder_from_upper(centroid.entries(), &p_upper);
    let (best_risk, best_entries) = best.expect("non-empty trace");
    if centroid_risk < best_risk {
        Ok(centroid)
    } else {
        LabelVector::new(best_entries, trace.k)
    }
}

/// MAP estimator: the most frequent canonical configuration in the trace
/// (ties to the first encountered). Also returns the highest recorded
/// log-posterior among its occurrences, so callers can compare it against an
/// externally found mode.
pub fn map_estimate(trace: &SampleTrace) -> Result<(LabelVector, f64)> {
    require_samples(trace)?;
    let table = frequency_table(&trace.sigma_samples);
    let (first_idx, _) = table
        .iter()
        .max_by_key(|&&(first_idx, count)| (count, std::cmp::Reverse(first_idx)))
        .copied()
        .expect("non-empty trace");
    let winner = &trace.sigma_samples[first_idx];
    let best_lp = trace
        .sigma_samples
        .iter()
        .zip(&trace.log_post)
        .filter(|(s, _)| s.as_slice() == winner.as_slice())
        .map(|(_, &lp)| lp)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((LabelVector::new(winner.clone(), trace.k)?, best_lp))
}

/// Equal-tailed credible interval per block-log-odds coordinate.
pub fn gamma_credible_interval(trace: &SampleTrace, level: f64) -> Result<Vec<(f64, f64)>> {
    require_samples(trace)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level must lie strictly between 0 and 1"));
    }
    let q = trace.gamma_samples[0].len();
    let tail = (1.0 - level) / 2.0;
    let mut out = Vec::with_capacity(q);
    for c in 0..q {
        let mut vals: Vec<f64> = trace.gamma_samples.iter().map(|g| g[c]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).expect("gamma samples must not be NaN"));
        out.push((
            quantile_type7(&vals, tail),
            quantile_type7(&vals, 1.0 - tail),
        ));
    }
    Ok(out)
}

/// One node's row in the degree diagnostic.
#[derive(Debug, Clone)]
pub struct EtaDegreeRow {
    pub node: usize,
    pub eta_mean: f64,
    /// `logit(degree / (n-1))`; `None` for degree 0 or n-1, where it is undefined.
    pub logit_norm_degree: Option<f64>,
}

/// Posterior means of the node intercepts paired with logit-normalized
/// degrees, plus their Pearson correlation over the well-defined rows.
#[derive(Debug, Clone)]
pub struct EtaDegreeDiagnostic {
    pub rows: Vec<EtaDegreeRow>,
    pub flagged: Vec<usize>,
    /// `None` when fewer than two usable rows or zero variance (regular graph).
    pub correlation: Option<f64>,
}

pub fn eta_degree_diagnostic(trace: &SampleTrace, graph: &Graph) -> Result<EtaDegreeDiagnostic> {
    require_samples(trace)?;
    if graph.n() != trace.n {
        return Err(Error::invalid("graph size != trace dimension"));
    }
    let eta_mean = trace.eta_posterior_mean()?;
    let n = graph.n();
    let mut rows = Vec::with_capacity(n);
    let mut flagged = Vec::new();
    for i in 0..n {
        let d = graph.degree(i) as f64;
        let logit = if d > 0.0 && (d as usize) < n - 1 {
            let p = d / (n as f64 - 1.0);
            Some((p / (1.0 - p)).ln())
        } else {
            flagged.push(i);
            None
        };
        rows.push(EtaDegreeRow {
            node: i,
            eta_mean: eta_mean[i],
            logit_norm_degree: logit,
        });
    }
    let usable: Vec<(&f64, f64)> = rows
        .iter()
        .filter_map(|r| r.logit_norm_degree.map(|l| (&r.eta_mean, l)))
        .collect();
    let correlation = pearson(
        &usable.iter().map(|(e, _)| **e).collect::<Vec<_>>(),
        &usable.iter().map(|(_, l)| *l).collect::<Vec<_>>(),
    );
    Ok(EtaDegreeDiagnostic {
        rows,
        flagged,
        correlation,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
