//! Community label vectors, canonical remapping, and partition losses.
//!
//! Labels live in `{1..K}`. Because the blockmodel likelihood only depends on
//! whether two nodes share a label, any permutation of the labels yields the
//! same posterior mass. We resolve this by mapping every assignment to the
//! canonical representative of its permutation class: the relabeling under
//! which labels appear in first-appearance order `1, 2, ..., k`.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A length-n assignment of nodes to communities in `{1..K}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelVector {
    entries: Vec<u32>,
    k: u32,
    canonical: bool,
    sizes: Vec<u32>,
}

impl LabelVector {
    /// Build a label vector over a nominal label alphabet `{1..k}`.
    pub fn new(entries: Vec<u32>, k: u32) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("label vector must be non-empty"));
        }
        if k < 1 {
            return Err(Error::invalid("community count must be at least 1"));
        }
        let mut sizes = vec![0u32; k as usize];
        for &e in &entries {
            if e < 1 || e > k {
                return Err(Error::invalid(format!(
                    "label {e} outside of 1..={k}"
                )));
            }
            sizes[(e - 1) as usize] += 1;
        }
        let canonical = is_first_appearance_order(&entries);
        Ok(LabelVector {
            entries,
            k,
            canonical,
            sizes,
        })
    }

    /// Build with `k` inferred as the maximum label present.
    pub fn from_entries(entries: Vec<u32>) -> Result<Self> {
        let k = *entries
            .iter()
            .max()
            .ok_or_else(|| Error::invalid("label vector must be non-empty"))?;
        Self::new(entries, k)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nominal community count K.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn label(&self, i: usize) -> u32 {
        self.entries[i]
    }

    /// True when labels appear in first-appearance order `1, 2, ...`.
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Community sizes `N_k`, indexed by label-1; length K.
    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Number of distinct labels present.
    pub fn distinct(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    /// Smallest community size over the nominal alphabet (0 if a label is absent).
    pub fn min_size(&self) -> u32 {
        self.sizes.iter().copied().min().unwrap_or(0)
    }

    /// Apply a label permutation given as `map[old-1] = new`.
    pub fn relabeled(&self, map: &[u32]) -> Result<Self> {
        if map.len() != self.k as usize {
            return Err(Error::invalid("relabeling map length must equal K"));
        }
        let entries = self
            .entries
            .iter()
            .map(|&e| map[(e - 1) as usize])
            .collect();
        Self::new(entries, self.k)
    }
}

fn is_first_appearance_order(entries: &[u32]) -> bool {
    let mut next = 1u32;
    let mut seen = vec![false; entries.len() + 1];
    for &e in entries {
        let idx = e as usize;
        if idx >= seen.len() {
            return false;
        }
        if !seen[idx] {
            if e != next {
                return false;
            }
            seen[idx] = true;
            next += 1;
        }
    }
    true
}

/// First position (1-based) where each present label appears, in increasing
/// label order. Absent labels are omitted.
pub fn ind(sigma: &LabelVector) -> Vec<usize> {
    let mut first = vec![usize::MAX; sigma.k() as usize];
    for (pos, &e) in sigma.entries().iter().enumerate() {
        let idx = (e - 1) as usize;
        if first[idx] == usize::MAX {
            first[idx] = pos + 1;
        }
    }
    first.into_iter().filter(|&p| p != usize::MAX).collect()
}

/// Labels in order of first appearance.
pub fn ord(sigma: &LabelVector) -> Vec<u32> {
    let mut seen = vec![false; sigma.k() as usize + 1];
    let mut out = Vec::new();
    for &e in sigma.entries() {
        if !seen[e as usize] {
            seen[e as usize] = true;
            out.push(e);
        }
    }
    out
}

/// The canonical relabeling `rho` produced by [`remap`]: `map[old-1] = new`.
///
/// Labels absent from the source vector are assigned the remaining new labels
/// in increasing old-label order, so `map` is always a permutation of `1..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    map: Vec<u32>,
}

impl Relabeling {
    pub fn identity(k: u32) -> Self {
        Relabeling {
            map: (1..=k).collect(),
        }
    }

    pub fn k(&self) -> u32 {
        self.map.len() as u32
    }

    pub fn map(&self) -> &[u32] {
        &self.map
    }

    pub fn apply_label(&self, label: u32) -> u32 {
        self.map[(label - 1) as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| m == i as u32 + 1)
    }

    /// Permute an off-diagonal block parameter vector indexed by unordered
    /// label pairs `(k, l)`, `k < l`: the entry for `(k, l)` moves to
    /// `(min(rho(k), rho(l)), max(rho(k), rho(l)))`. Diagonal entries are
    /// pinned at zero and never stored, so they need no treatment.
    pub fn permute_pairs(&self, values: &[f64]) -> Result<Vec<f64>> {
        let k = self.k();
        let dim = crate::design::gamma_dim(k);
        if values.len() != dim {
            return Err(Error::invalid(format!(
                "pair vector has length {} but K={k} requires {dim}",
                values.len()
            )));
        }
        let mut out = vec![0.0; dim];
        for (a, b) in crate::design::gamma_pairs(k) {
            let (na, nb) = (self.apply_label(a), self.apply_label(b));
            let (lo, hi) = if na < nb { (na, nb) } else { (nb, na) };
            out[crate::design::gamma_col(lo, hi, k)] =
                values[crate::design::gamma_col(a, b, k)];
        }
        Ok(out)
    }
}

/// Map `sigma` to its canonical representative and return the relabeling used.
pub fn remap(sigma: &LabelVector) -> (LabelVector, Relabeling) {
    let k = sigma.k() as usize;
    let mut map = vec![0u32; k];
    let mut next = 0u32;
    for &e in sigma.entries() {
        let idx = (e - 1) as usize;
        if map[idx] == 0 {
            next += 1;
            map[idx] = next;
        }
    }
    // Absent labels take the remaining slots in increasing old-label order.
    for slot in map.iter_mut() {
        if *slot == 0 {
            next += 1;
            *slot = next;
        }
    }
    let rho = Relabeling { map };
    let entries = sigma
        .entries()
        .iter()
        .map(|&e| rho.apply_label(e))
        .collect();
    let remapped = LabelVector::new(entries, sigma.k()).expect("relabeling preserves validity");
    debug_assert!(remapped.is_canonical());
    (remapped, rho)
}

fn check_same_length(a: &LabelVector, b: &LabelVector) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "label vectors have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.len())
}

/// Hamming distance: number of positions where the two assignments differ.
pub fn hamming(a: &LabelVector, b: &LabelVector) -> Result<usize> {
    check_same_length(a, b)?;
    Ok(a.entries()
        .iter()
        .zip(b.entries())
        .filter(|(x, y)| x != y)
        .count())
}

/// Contingency table `n[i][j] = #{v : a_v = i+1, b_v = j+1}`.
fn contingency(a: &LabelVector, b: &LabelVector) -> Vec<Vec<u64>> {
    let (ka, kb) = (a.k() as usize, b.k() as usize);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.entries().iter().zip(b.entries()) {
        table[(x - 1) as usize][(y - 1) as usize] += 1;
    }
    table
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Binder loss: the number of node pairs on which the two partitions disagree
/// about co-membership. Invariant to label permutations on either side.
pub fn binder(a: &LabelVector, b: &LabelVector) -> Result<u64> {
    check_same_length(a, b)?;
    let table = contingency(a, b);
    let mut same_both = 0u64;
    let mut row = vec![0u64; table.len()];
    let mut col = vec![0u64; table[0].len()];
    for (i, r) in table.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            same_both += choose2(c);
            row[i] += c;
            col[j] += c;
        }
    }
    let same_a: u64 = row.into_iter().map(choose2).sum();
    let same_b: u64 = col.into_iter().map(choose2).sum();
    Ok((same_a - same_both) + (same_b - same_both))
}

/// Binder loss together with its Hamming bound `H (n - H/2)`.
///
/// Panics (debug and release) if the bound is violated, or if both vectors use
/// only labels `{1, 2}` and the two-label identity `B = H (n - H)` fails:
/// either would be an implementation bug.
pub fn binder_hamming_bound(a: &LabelVector, b: &LabelVector) -> Result<(u64, f64)> {
    let n = check_same_length(a, b)?;
    let bb = binder(a, b)?;
    let h = hamming(a, b)? as u64;
    let n = n as u64;
    let bound = h as f64 * (n as f64 - h as f64 / 2.0);
    // Integer form of B <= H(n - H/2): 2B <= H(2n - H).
    assert!(2 * bb <= h * (2 * n - h), "Binder bound violated: B={bb}, H={h}, n={n}");
    let two_label = a.entries().iter().all(|&e| e <= 2) && b.entries().iter().all(|&e| e <= 2);
    if two_label {
        assert_eq!(bb, h * (n - h), "two-label Binder identity violated");
    }
    Ok((bb, bound))
}

/// Misclassification rate: minimum over label permutations of the fraction of
/// disagreeing nodes, found by a maximum-overlap assignment between the two
/// label alphabets.
pub fn error_rate(estimate: &LabelVector, reference: &LabelVector) -> Result<f64> {
    let n = check_same_length(estimate, reference)?;
    let k = estimate.k().max(reference.k()) as usize;
    if k > 20 {
        return Err(Error::invalid(
            "error_rate supports at most 20 labels per side",
        ));
    }
    // overlap[i][j] padded to a square k x k matrix
    let mut overlap = vec![vec![0u64; k]; k];
    for (&x, &y) in estimate.entries().iter().zip(reference.entries()) {
        overlap[(x - 1) as usize][(y - 1) as usize] += 1;
    }
    // Assignment by DP over subsets of reference labels; exact optimum.
    let full = 1usize << k;
    let mut best = vec![0u64; full];
    for mask in 0..full - 1 {
        let i = (mask as u32).count_ones() as usize; // next estimate label to assign
        let cur = best[mask];
        for j in 0..k {
            if mask & (1 << j) == 0 {
                let cand = cur + overlap[i][j];
                let nm = mask | (1 << j);
                if cand > best[nm] {
                    best[nm] = cand;
                }
            }
        }
    }
    let matched = best[full - 1];
    Ok((n as u64 - matched) as f64 / n as f64)
}

/// Type-7 (linear interpolation) empirical quantile of a sorted slice.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Empirical `(q/2, 1 - q/2)` quantile interval of a set of error rates.
pub fn q_error_interval(rates: &[f64], q: f64) -> Result<(f64, f64)> {
    if rates.is_empty() {
        return Err(Error::invalid("q_error_interval requires a non-empty list"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid("q must lie strictly between 0 and 1"));
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("rates must not be NaN"));
    Ok((
        quantile_type7(&sorted, q / 2.0),
        quantile_type7(&sorted, 1.0 - q / 2.0),
    ))
}

/// Frequency table of label vectors, preserving first-encounter order.
pub fn frequency_table(samples: &[Vec<u32>]) -> Vec<(usize, usize)> {
    let mut index: HashMap<&[u32], usize> = HashMap::new();
    let mut out: Vec<(usize, usize)> = Vec::new(); // (first index, count)
    for (i, s) in samples.iter().enumerate() {
        match index.get(s.as_slice()) {
            Some(&slot) => out[slot].1 += 1,
            None => {
                index.insert(s.as_slice(), out.len());
                out.push((i, 1));
            }
        }
    }
    out
}
