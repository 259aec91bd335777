//! `sbm generate {spike|sbm|benchmark}`: write edge-list + reference-label
//! files plus a metadata JSON describing the effective parameters.

use std::fs;
use std::path::{Path, PathBuf};

use sbm_core::design::gamma_dim;
use sbm_core::error::{Error, Result};
use sbm_core::graph::{write_labels, Graph};
use sbm_core::labels::LabelVector;
use sbm_core::model::ModelParams;
use sbm_core::random::RngHandle;
use sbm_core::synth::{
    between_edge_fraction, gen_benchmark, gen_sbm, gen_spike, BenchmarkSpec, SpikeSpec,
};

use crate::GenerateKind;

pub fn run(kind: GenerateKind) -> Result<()> {
    match kind {
        GenerateKind::Spike { n1, r, seed, out } => {
            let spec = SpikeSpec::new(n1, r)?;
            let (graph, reference) = gen_spike(&spec);
            let meta = serde_json::json!({
                "command": "generate spike",
                "version": env!("CARGO_PKG_VERSION"),
                "n1": n1,
                "r": r,
                "seed": seed,
                "n": graph.n(),
                "edges": graph.num_edges(),
            });
            write_outputs(&out, &graph, &reference, meta)
        }
        GenerateKind::Sbm {
            sizes,
            gamma,
            eta_const,
            eta_file,
            seed,
            out,
        } => {
            if sizes.len() < 2 {
                return Err(Error::invalid("--sizes needs at least two communities"));
            }
            if sizes.iter().any(|&s| s < 2) {
                return Err(Error::invalid("every community needs at least two nodes"));
            }
            let k = sizes.len() as u32;
            let n: usize = sizes.iter().sum();
            let mut entries = Vec::with_capacity(n);
            for (c, &s) in sizes.iter().enumerate() {
                entries.extend(std::iter::repeat(c as u32 + 1).take(s));
            }
            let sigma = LabelVector::new(entries, k)?;
            let q = gamma_dim(k);
            let gamma = if gamma.len() == 1 {
                vec![gamma[0]; q]
            } else if gamma.len() == q {
                gamma
            } else {
                return Err(Error::invalid(format!(
                    "--gamma needs 1 or C(K,2)={q} values, got {}",
                    gamma.len()
                )));
            };
            if gamma.iter().any(|&g| g > 0.0) {
                return Err(Error::invalid("block log-odds must be <= 0"));
            }
            let eta = match &eta_file {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    let vals: Result<Vec<f64>> = text
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .enumerate()
                        .map(|(i, l)| {
                            l.trim()
                                .parse()
                                .map_err(|_| Error::parse(i + 1, format!("bad eta '{l}'")))
                        })
                        .collect();
                    let vals = vals?;
                    if vals.len() != n {
                        return Err(Error::invalid(format!(
                            "eta file holds {} values for n={n}",
                            vals.len()
                        )));
                    }
                    vals
                }
                None => vec![eta_const; n],
            };
            let params = ModelParams {
                gamma: gamma.clone(),
                eta,
                pi: sizes.iter().map(|&s| s as f64 / n as f64).collect(),
            };
            let mut rng = RngHandle::new(seed, 0);
            let graph = gen_sbm(&sigma, &params, &mut rng)?;
            let meta = serde_json::json!({
                "command": "generate sbm",
                "version": env!("CARGO_PKG_VERSION"),
                "sizes": sizes,
                "gamma": gamma,
                "seed": seed,
                "n": graph.n(),
                "edges": graph.num_edges(),
            });
            write_outputs(&out, &graph, &sigma, meta)
        }
        GenerateKind::Benchmark {
            n,
            a,
            b,
            mu,
            avg_degree,
            max_degree,
            min_community,
            max_community,
            seed,
            out,
        } => {
            let mut spec = BenchmarkSpec::new(n, a, b, mu, avg_degree)?;
            if let Some(v) = max_degree {
                spec.max_degree = v;
            }
            if let Some(v) = min_community {
                spec.min_community = v;
            }
            if let Some(v) = max_community {
                spec.max_community = v;
            }
            spec.validate()?;
            let mut rng = RngHandle::new(seed, 0);
            let (graph, reference) = gen_benchmark(&spec, &mut rng)?;
            let meta = serde_json::json!({
                "command": "generate benchmark",
                "version": env!("CARGO_PKG_VERSION"),
                "n": n,
                "a": a,
                "b": b,
                "mu": mu,
                "avg_degree": avg_degree,
                "max_degree": spec.max_degree,
                "min_community": spec.min_community,
                "max_community": spec.max_community,
                "seed": seed,
                "edges": graph.num_edges(),
                "communities": reference.k(),
                "realized_between_fraction": between_edge_fraction(&graph, &reference),
            });
            write_outputs(&out, &graph, &reference, meta)
        }
    }
}

fn write_outputs(
    out: &PathBuf,
    graph: &Graph,
    reference: &LabelVector,
    meta: serde_json::Value,
) -> Result<()> {
    fs::create_dir_all(out)?;
    let edge_path = out.join("edges.txt");
    let mut f = fs::File::create(&edge_path)?;
    graph.write_edge_list(&mut f)?;
    let mut f = fs::File::create(out.join("labels.txt"))?;
    write_labels(&mut f, graph, reference)?;
    fs::write(out.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
    println!(
        "wrote {} ({} nodes, {} edges)",
        display_dir(out),
        graph.n(),
        graph.num_edges()
    );
    Ok(())
}

fn display_dir(p: &Path) -> String {
    p.display().to_string()
}
