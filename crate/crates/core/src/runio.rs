//! On-disk layout of a fitted run: per-chain trace and label-sample CSVs,
//! merged marginal counts, eta posterior means, JSON metadata, a PSRF report,
//! and the elected mode state.
//!
//! All numeric CSV fields round-trip exactly (shortest-representation float
//! formatting), so reruns with identical seeds produce bit-identical files.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::gamma_pairs;
use crate::diagnostics::PsrfReport;
use crate::error::{Error, Result};
use crate::trace::{RunMeta, SampleTrace};

/// Effective parameters of a `fit` invocation, written as `metadata.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitMetadata {
    pub tool_version: String,
    pub graph_path: String,
    pub graph_sha256: String,
    pub n: usize,
    pub k: u32,
    pub tau2: f64,
    pub alpha: Vec<f64>,
    pub iters: u64,
    pub burnin: u64,
    pub thin: u64,
    pub chains: u32,
    pub restarts: u32,
    pub seed: u64,
    pub drop_isolated: bool,
    pub accepted_moves: u64,
    pub rejected_moves: u64,
    pub mvn_fallbacks: u64,
    pub mode_log_post: f64,
}

/// The elected approximate-mode state, written as `mode.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeState {
    pub sigma: Vec<u32>,
    pub gamma: Vec<f64>,
    pub eta: Vec<f64>,
    pub pi: Vec<f64>,
    pub log_post: f64,
}

pub struct RunArtifacts<'a> {
    pub traces: &'a [SampleTrace],
    pub node_names: &'a [String],
    pub metadata: &'a FitMetadata,
    pub psrf: &'a PsrfReport,
    pub mode: Option<&'a ModeState>,
}

fn trace_header(k: u32) -> String {
    let mut cols = vec!["iteration".to_string(), "log_post".to_string()];
    for (a, b) in gamma_pairs(k) {
        cols.push(format!("gamma_{a}_{b}"));
    }
    for c in 1..=k {
        cols.push(format!("pi_{c}"));
    }
    cols.join(",")
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Write every artifact of a fitted run into `dir` (created if missing).
pub fn write_run_dir(dir: &Path, artifacts: &RunArtifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    let k = artifacts.metadata.k;
    for (c, trace) in artifacts.traces.iter().enumerate() {
        let mut out = fs::File::create(dir.join(format!("trace_chain{c}.csv")))?;
        writeln!(out, "{}", trace_header(k))?;
        for idx in 0..trace.len() {
            writeln!(
                out,
                "{},{},{},{}",
                trace.iterations[idx],
                trace.log_post[idx],
                join_floats(&trace.gamma_samples[idx]),
                join_floats(&trace.pi_samples[idx]),
            )?;
        }
        let mut out = fs::File::create(dir.join(format!("sigma_chain{c}.csv")))?;
        for s in &trace.sigma_samples {
            let row: Vec<String> = s.iter().map(|l| l.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
    }

    // merged marginal counts over all chains
    let n = artifacts.metadata.n;
    let mut counts = vec![vec![0u64; k as usize]; n];
    for trace in artifacts.traces {
        for (i, row) in trace.marginal_counts.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                counts[i][c] += v;
            }
        }
    }
    let mut out = fs::File::create(dir.join("counts.csv"))?;
    let header: Vec<String> = std::iter::once("node".to_string())
        .chain((1..=k).map(|c| format!("count_{c}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..n {
        let row: Vec<String> = counts[i].iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{}", artifacts.node_names[i], row.join(","))?;
    }

    // merged eta posterior means
    let mut eta_mean = vec![0.0f64; n];
    for trace in artifacts.traces {
        let m = trace.eta_posterior_mean()?;
        for (a, b) in eta_mean.iter_mut().zip(&m) {
            *a += b / artifacts.traces.len() as f64;
        }
    }
    let mut out = fs::File::create(dir.join("eta_mean.csv"))?;
    writeln!(out, "node,eta_mean")?;
    for i in 0..n {
        writeln!(out, "{},{}", artifacts.node_names[i], eta_mean[i])?;
    }

    fs::write(
        dir.join("metadata.json"),
        serde_json::to_string_pretty(artifacts.metadata)?,
    )?;
    fs::write(
        dir.join("psrf.json"),
        serde_json::to_string_pretty(artifacts.psrf)?,
    )?;
    if let Some(mode) = artifacts.mode {
        fs::write(dir.join("mode.json"), serde_json::to_string_pretty(mode)?)?;
    }
    Ok(())
}

/// A run reloaded from disk. Traces carry sigma/gamma/pi/log_post samples and
/// the merged eta posterior mean (full eta samples are not serialized).
pub struct LoadedRun {
    pub traces: Vec<SampleTrace>,
    pub metadata: FitMetadata,
    pub node_names: Vec<String>,
    pub mode: Option<ModeState>,
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad float '{tok}'")))
}

pub fn read_run_dir(dir: &Path) -> Result<LoadedRun> {
    let metadata: FitMetadata =
        serde_json::from_str(&fs::read_to_string(dir.join("metadata.json"))?)?;
    let (node_names, _counts) = read_counts(&dir.join("counts.csv"), metadata.k)?;
    let eta_mean = read_eta_mean(&dir.join("eta_mean.csv"))?;
    let mut traces = Vec::new();
    for c in 0..metadata.chains {
        let trace_path = dir.join(format!("trace_chain{c}.csv"));
        let sigma_path = dir.join(format!("sigma_chain{c}.csv"));
        let mut trace = read_chain(&trace_path, &sigma_path, &metadata)?;
        trace.eta_mean = Some(eta_mean.clone());
        traces.push(trace);
    }
    let mode_path = dir.join("mode.json");
    let mode = if mode_path.exists() {
        Some(serde_json::from_str(&fs::read_to_string(mode_path)?)?)
    } else {
        None
    };
    Ok(LoadedRun {
        traces,
        metadata,
        node_names,
        mode,
    })
}

fn read_chain(trace_path: &Path, sigma_path: &Path, meta: &FitMetadata) -> Result<SampleTrace> {
    let q = crate::design::gamma_dim(meta.k);
    let ku = meta.k as usize;
    let run_meta = RunMeta {
        seed: meta.seed,
        n: meta.n,
        k: meta.k,
        tau2: meta.tau2,
        alpha: meta.alpha.clone(),
        iters: meta.iters,
        burnin: meta.burnin,
        thin: meta.thin,
        ..RunMeta::default()
    };
    let mut trace = SampleTrace::empty(meta.n, meta.k, run_meta);

    let sigma_file = BufReader::new(fs::File::open(sigma_path)?);
    let mut sigmas: Vec<Vec<u32>> = Vec::new();
    for (lineno, line) in sigma_file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<u32>> = line
            .split(',')
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::parse(lineno + 1, format!("bad label '{t}'")))
            })
            .collect();
        let row = row?;
        if row.len() != meta.n {
            return Err(Error::parse(lineno + 1, "label row length mismatch"));
        }
        sigmas.push(row);
    }

    let trace_file = BufReader::new(fs::File::open(trace_path)?);
    let mut rows = 0usize;
    for (lineno, line) in trace_file.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 2 + q + ku {
            return Err(Error::parse(lineno + 1, "trace row width mismatch"));
        }
        let iteration: u64 = toks[0]
            .parse()
            .map_err(|_| Error::parse(lineno + 1, "bad iteration"))?;
        let log_post = parse_f64(toks[1], lineno + 1)?;
        let gamma: Result<Vec<f64>> = toks[2..2 + q]
            .iter()
            .map(|t| parse_f64(t, lineno + 1))
            .collect();
        let pi: Result<Vec<f64>> = toks[2 + q..]
            .iter()
            .map(|t| parse_f64(t, lineno + 1))
            .collect();
        let sigma = sigmas
            .get(rows)
            .ok_or_else(|| Error::invalid("fewer sigma rows than trace rows"))?
            .clone();
        trace.push_sample(iteration, sigma, gamma?, Vec::new(), pi?, log_post);
        rows += 1;
    }
    if rows != sigmas.len() {
        return Err(Error::invalid("more sigma rows than trace rows"));
    }
    // eta samples are not serialized; mark them absent
    trace.eta_samples.clear();
    Ok(trace)
}

fn read_counts(path: &Path, k: u32) -> Result<(Vec<String>, Vec<Vec<u64>>)> {
    let file = BufReader::new(fs::File::open(path)?);
    let mut names = Vec::new();
    let mut counts = Vec::new();
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 1 + k as usize {
            return Err(Error::parse(lineno + 1, "counts row width mismatch"));
        }
        names.push(toks[0].to_string());
        let row: Result<Vec<u64>> = toks[1..]
            .iter()
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| Error::parse(lineno + 1, format!("bad count '{t}'")))
            })
            .collect();
        counts.push(row?);
    }
    Ok((names, counts))
}

fn read_eta_mean(path: &Path) -> Result<Vec<f64>> {
    let file = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 2 {
            return Err(Error::parse(lineno + 1, "eta_mean row width mismatch"));
        }
        out.push(parse_f64(toks[1], lineno + 1)?);
    }
    Ok(out)
}
