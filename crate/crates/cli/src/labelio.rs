//! Label-file helpers for commands that work without a loaded graph.

use std::fs;
use std::path::Path;

use sbm_core::error::{Error, Result};
use sbm_core::labels::LabelVector;

/// Parse a `token <ws> integer-label` file into (token, raw label) pairs.
/// A path of `-` reads standard input.
pub fn read_label_pairs(path: &Path) -> Result<Vec<(String, u32)>> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf)?;
        buf
    } else {
        fs::read_to_string(path)?
    };
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse(
                lineno + 1,
                format!("expected 2 tokens, found {}", tokens.len()),
            ));
        }
        let label: u32 = tokens[1]
            .parse()
            .map_err(|_| Error::parse(lineno + 1, format!("bad label '{}'", tokens[1])))?;
        if label < 1 {
            return Err(Error::parse(lineno + 1, "labels must be >= 1".to_string()));
        }
        out.push((tokens[0].to_string(), label));
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("empty label file {}", path.display())));
    }
    Ok(out)
}

/// Align an estimate's labels to the reference's token order and recode both
/// sides to 1..K by first appearance. Token sets must match exactly.
pub fn aligned_vectors(
    estimate: &[(String, u32)],
    reference: &[(String, u32)],
) -> Result<(LabelVector, LabelVector)> {
    if estimate.len() != reference.len() {
        return Err(Error::invalid(format!(
            "mismatched node sets: {} vs {} nodes",
            estimate.len(),
            reference.len()
        )));
    }
    let mut est_map = std::collections::HashMap::new();
    for (tok, l) in estimate {
        if est_map.insert(tok.as_str(), *l).is_some() {
            return Err(Error::invalid(format!("duplicate node '{tok}' in estimate")));
        }
    }
    let mut est_entries = Vec::with_capacity(reference.len());
    let mut ref_entries = Vec::with_capacity(reference.len());
    for (tok, rl) in reference {
        let el = est_map
            .remove(tok.as_str())
            .ok_or_else(|| Error::invalid(format!("mismatched node sets: '{tok}' missing from estimate")))?;
        est_entries.push(el);
        ref_entries.push(*rl);
    }
    if !est_map.is_empty() {
        return Err(Error::invalid("mismatched node sets: extra nodes in estimate"));
    }
    Ok((recode(&est_entries)?, recode(&ref_entries)?))
}

fn recode(raw: &[u32]) -> Result<LabelVector> {
    let mut map = std::collections::HashMap::new();
    let entries: Vec<u32> = raw
        .iter()
        .map(|l| {
            let next = map.len() as u32 + 1;
            *map.entry(*l).or_insert(next)
        })
        .collect();
    LabelVector::new(entries, map.len() as u32)
}

/// Write `token <ws> label` lines.
pub fn write_label_file(path: &Path, names: &[String], labels: &LabelVector) -> Result<()> {
    let mut out = String::new();
    for (name, &label) in names.iter().zip(labels.entries()) {
        out.push_str(&format!("{name} {label}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}
