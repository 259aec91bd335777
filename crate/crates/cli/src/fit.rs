//! `sbm fit`: ingest a graph, elect an approximate mode from prior restarts,
//! run Gibbs chains concurrently (one RNG stream per chain), and write the
//! run directory.

use std::fs;
use std::io::{BufReader, Cursor, Read};

use sha2::{Digest, Sha256};

use sbm_core::diagnostics::psrf_report;
use sbm_core::error::{Error, Result};
use sbm_core::gibbs::{gibbs_run, ChainState, GibbsOptions};
use sbm_core::graph::Graph;
use sbm_core::modefind::multi_restart_init;
use sbm_core::model::Hyperparams;
use sbm_core::random::RngHandle;
use sbm_core::runio::{write_run_dir, FitMetadata, ModeState, RunArtifacts};
use sbm_core::trace::SampleTrace;

use crate::FitArgs;

pub fn run(args: FitArgs) -> Result<()> {
    let raw = if args.graph == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        buf
    } else {
        fs::read(&args.graph)?
    };
    let sha = format!("{:x}", Sha256::digest(&raw));
    let (graph, stats) = Graph::load_edge_list(BufReader::new(Cursor::new(raw)), args.drop_isolated)?;
    if stats.self_loops + stats.duplicates + stats.isolated_removed > 0 {
        eprintln!(
            "cleaning: dropped {} self-loops, {} duplicate edges, {} isolated nodes",
            stats.self_loops, stats.duplicates, stats.isolated_removed
        );
    }

    let k = args.k;
    if graph.n() <= k as usize {
        return Err(Error::invalid(format!(
            "graph has n={} nodes; need n > K={k}",
            graph.n()
        )));
    }
    if graph.n() < 2 * k as usize {
        return Err(Error::invalid(format!(
            "graph has n={} nodes; the constrained prior needs n >= 2K={}",
            graph.n(),
            2 * k
        )));
    }
    let alpha = if args.alpha.len() == 1 {
        vec![args.alpha[0]; k as usize]
    } else if args.alpha.len() == k as usize {
        args.alpha.clone()
    } else {
        return Err(Error::invalid(format!(
            "--alpha needs 1 or K={k} values, got {}",
            args.alpha.len()
        )));
    };
    let hyper = Hyperparams::new(k, args.tau2, alpha)?;
    let opts = GibbsOptions {
        iters: args.iters,
        burnin: args.burnin,
        thin: args.thin,
    };
    opts.validate()?;
    if args.chains < 1 {
        return Err(Error::invalid("--chains must be at least 1"));
    }

    // stream 0 seeds the restart search; chain c uses stream c+1
    let init_rng = RngHandle::new(args.seed, 0);
    eprintln!("mode search: {} restarts", args.restarts);
    let mode = multi_restart_init(&graph, &hyper, args.restarts, &init_rng)?;
    let mode_state = ModeState {
        sigma: mode.sigma.entries().to_vec(),
        gamma: mode.params.gamma.clone(),
        eta: mode.params.eta.clone(),
        pi: mode.params.pi.clone(),
        log_post: mode.log_post(),
    };
    eprintln!("mode log-posterior: {}", mode_state.log_post);

    let traces: Vec<SampleTrace> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for c in 0..args.chains {
            let graph = &graph;
            let hyper = &hyper;
            let sigma = mode.sigma.clone();
            let params = mode.params.clone();
            let seed = args.seed;
            handles.push(scope.spawn(move || -> Result<SampleTrace> {
                let rng = RngHandle::new(seed, c as u64 + 1);
                let state = ChainState::new(graph, hyper, sigma, params, rng)?;
                gibbs_run(graph, hyper, state, opts)
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;

    let psrf = psrf_report(&traces);
    let metadata = FitMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        graph_path: args.graph.clone(),
        graph_sha256: sha,
        n: graph.n(),
        k,
        tau2: hyper.tau2,
        alpha: hyper.alpha.clone(),
        iters: args.iters,
        burnin: args.burnin,
        thin: args.thin,
        chains: args.chains,
        restarts: args.restarts,
        seed: args.seed,
        drop_isolated: args.drop_isolated,
        accepted_moves: traces.iter().map(|t| t.meta.accepted_moves).sum(),
        rejected_moves: traces.iter().map(|t| t.meta.rejected_moves).sum(),
        mvn_fallbacks: traces.iter().map(|t| t.meta.mvn_fallbacks).sum(),
        mode_log_post: mode_state.log_post,
    };
    write_run_dir(
        &args.out,
        &RunArtifacts {
            traces: &traces,
            node_names: graph.names(),
            metadata: &metadata,
            psrf: &psrf,
            mode: Some(&mode_state),
        },
    )?;
    println!(
        "fit complete: {} chains x {} kept samples -> {}",
        traces.len(),
        traces.first().map_or(0, |t| t.len()),
        args.out.display()
    );
    match psrf.log_post {
        Some(r) => println!("psrf(log_post) = {r:.4}"),
        None => println!("psrf(log_post) unavailable (single chain)"),
    }
    Ok(())
}
