//! `sbm estimate`: point estimates and posterior summaries from a run
//! directory written by `sbm fit`.

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use sbm_core::error::{Error, Result};
use sbm_core::estimators::{
    binder_estimate, centroid_estimate, eta_degree_diagnostic, expected_binder_risk,
    expected_hamming_risk, gamma_credible_interval, map_estimate,
};
use sbm_core::design::gamma_pairs;
use sbm_core::graph::Graph;
use sbm_core::runio::read_run_dir;
use sbm_core::trace::SampleTrace;

use crate::labelio::write_label_file;
use crate::{EstimateArgs, EstimatorKind};

pub fn run(args: EstimateArgs) -> Result<()> {
    let run = read_run_dir(&args.trace_dir)?;
    let merged = SampleTrace::merge(run.traces)?;
    if merged.is_empty() {
        return Err(Error::invalid("trace directory holds no samples"));
    }
    let out_dir = args.out.clone().unwrap_or_else(|| args.trace_dir.clone());
    fs::create_dir_all(&out_dir)?;

    let (labels, map_note) = match args.estimator {
        EstimatorKind::Centroid => (centroid_estimate(&merged)?, None),
        EstimatorKind::Binder => (binder_estimate(&merged)?, None),
        EstimatorKind::Map => {
            let (sampled, sampled_lp) = map_estimate(&merged)?;
            // prefer the elected mode when it carries higher log-posterior
            match &run.mode {
                Some(mode) if mode.log_post > sampled_lp => {
                    let lv = sbm_core::labels::LabelVector::new(mode.sigma.clone(), merged.k)?;
                    (
                        lv,
                        Some(serde_json::json!({
                            "source": "mode_search",
                            "mode_log_post": mode.log_post,
                            "sampled_log_post": sampled_lp,
                        })),
                    )
                }
                _ => (
                    sampled,
                    Some(serde_json::json!({
                        "source": "trace_frequency_mode",
                        "sampled_log_post": sampled_lp,
                        "mode_log_post": run.mode.as_ref().map(|m| m.log_post),
                    })),
                ),
            }
        }
    };

    let label_path = out_dir.join(format!("labels_{}.txt", args.estimator.name()));
    write_label_file(&label_path, &run.node_names, &labels)?;

    let ci = gamma_credible_interval(&merged, args.level)?;
    let mut ci_csv = String::from("pair,lo,hi\n");
    for ((a, b), (lo, hi)) in gamma_pairs(merged.k).zip(&ci) {
        ci_csv.push_str(&format!("gamma_{a}_{b},{lo},{hi}\n"));
    }
    fs::write(out_dir.join("gamma_ci.csv"), ci_csv)?;

    // degree diagnostic needs the graph; fall back gracefully if it moved
    let graph_path = args
        .graph
        .clone()
        .unwrap_or_else(|| PathBuf::from(&run.metadata.graph_path));
    let diagnostic = match fs::File::open(&graph_path) {
        Ok(f) => {
            let (graph, _) =
                Graph::load_edge_list(BufReader::new(f), run.metadata.drop_isolated)?;
            if graph.n() != merged.n {
                return Err(Error::invalid(format!(
                    "graph at {} has {} nodes but the trace has {}",
                    graph_path.display(),
                    graph.n(),
                    merged.n
                )));
            }
            let diag = eta_degree_diagnostic(&merged, &graph)?;
            let mut csv = String::from("node,eta_mean,logit_norm_degree,flagged\n");
            for row in &diag.rows {
                let logit = row
                    .logit_norm_degree
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    run.node_names[row.node],
                    row.eta_mean,
                    logit,
                    row.logit_norm_degree.is_none()
                ));
            }
            fs::write(out_dir.join("eta_degree.csv"), csv)?;
            Some(diag)
        }
        Err(e) => {
            eprintln!(
                "warning: graph at {} unavailable ({e}); skipping the eta-degree diagnostic",
                graph_path.display()
            );
            None
        }
    };

    let summary = serde_json::json!({
        "estimator": args.estimator.name(),
        "labels_file": label_path.file_name().and_then(|s| s.to_str()),
        "samples": merged.len(),
        "chains": run.metadata.chains,
        "expected_hamming_risk": expected_hamming_risk(&merged, &labels)?,
        "expected_binder_risk": expected_binder_risk(&merged, &labels)?,
        "gamma_ci_level": args.level,
        "gamma_ci": gamma_pairs(merged.k)
            .zip(&ci)
            .map(|((a, b), (lo, hi))| serde_json::json!({
                "pair": format!("gamma_{a}_{b}"), "lo": lo, "hi": hi
            }))
            .collect::<Vec<_>>(),
        "eta_degree_correlation": diagnostic.as_ref().and_then(|d| d.correlation),
        "map": map_note,
    });
    fs::write(
        out_dir.join(format!("summary_{}.json", args.estimator.name())),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "{} estimate -> {} (expected Hamming risk {:.4}, Binder risk {:.4})",
        args.estimator.name(),
        label_path.display(),
        expected_hamming_risk(&merged, &labels)?,
        expected_binder_risk(&merged, &labels)?,
    );
    Ok(())
}
