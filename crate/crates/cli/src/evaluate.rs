//! `sbm evaluate`: misclassification rates against a reference partition,
//! with a q-error interval over repeated runs.

use std::path::PathBuf;

use sbm_core::error::{Error, Result};
use sbm_core::labels::{error_rate, q_error_interval};

use crate::labelio::{aligned_vectors, read_label_pairs};
use crate::EvaluateArgs;

pub fn run(args: EvaluateArgs) -> Result<()> {
    let reference = read_label_pairs(&args.reference)?;
    let mut paths: Vec<PathBuf> = Vec::new();
    if let Some(p) = &args.estimate {
        paths.push(p.clone());
    }
    if let Some(pattern) = &args.runs_glob {
        let matches = glob::glob(pattern)
            .map_err(|e| Error::invalid(format!("bad glob '{pattern}': {e}")))?;
        for m in matches {
            let m = m.map_err(|e| Error::invalid(format!("glob error: {e}")))?;
            if !paths.contains(&m) {
                paths.push(m);
            }
        }
    }
    if paths.is_empty() {
        return Err(Error::invalid("no estimate files found"));
    }

    let mut rates = Vec::with_capacity(paths.len());
    for path in &paths {
        let estimate = read_label_pairs(path)?;
        let (est, reference_lv) = aligned_vectors(&estimate, &reference)?;
        let rate = error_rate(&est, &reference_lv)?;
        rates.push(rate);
        if paths.len() == 1 {
            println!("error_rate {rate}");
        } else {
            println!("run {}: error_rate {rate}", path.display());
        }
    }
    if rates.len() > 1 {
        let (lo, hi) = q_error_interval(&rates, args.q)?;
        println!("q_error_interval(q={}): [{lo}, {hi}]", args.q);
    }
    Ok(())
}
