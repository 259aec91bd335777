//! Logistic-regression design matrix for a labeled graph, and the rank
//! conditions that make the model identifiable.
//!
//! Each node pair `(i, j)`, `i < j`, contributes one row `x_ij = [b_ij c_ij]`:
//! `b_ij` one-hot encodes the unordered community pair at the endpoints (block
//! log-odds columns) and `c_ij` marks both endpoints (node-intercept columns).
//! The reduced design drops the K diagonal block columns, which are pinned to
//! zero; the model is then full-rank exactly when every community has at
//! least two nodes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::LabelVector;

/// Number of off-diagonal block columns, `C(K, 2)`.
pub fn gamma_dim(k: u32) -> usize {
    let k = k as usize;
    k * (k - 1) / 2
}

/// Column index of the unordered pair `(k, l)`, `1 <= k < l <= K`, in the
/// order `(1,2), (1,3), ..., (1,K), (2,3), ...`.
pub fn gamma_col(k: u32, l: u32, kk: u32) -> usize {
    debug_assert!(1 <= k && k < l && l <= kk);
    let (k, l, kk) = (k as usize, l as usize, kk as usize);
    (k - 1) * kk - k * (k - 1) / 2 + (l - k) - 1
}

/// Unordered label pairs in column order.
pub fn gamma_pairs(kk: u32) -> impl Iterator<Item = (u32, u32)> {
    (1..=kk).flat_map(move |k| (k + 1..=kk).map(move |l| (k, l)))
}

/// Dense reduced design matrix (diagonal block columns removed).
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    n: usize,
    k: u32,
}

impl DesignMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn gamma_cols(&self) -> usize {
        gamma_dim(self.k)
    }

    pub fn eta_col(&self, v: usize) -> usize {
        gamma_dim(self.k) + v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row index of pair `(i, j)`, `i < j`, in lexicographic order.
    pub fn row_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        // rows for first index i start after sum_{t<i} (n-1-t)
        i * self.n - i * (i + 1) / 2 + (j - i) - 1
    }

    /// Numeric rank via SVD at tolerance `1e-9 * largest singular value`.
    pub fn numeric_rank(&self) -> usize {
        numeric_rank(&self.matrix)
    }
}

pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    let tol = 1e-9 * smax;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

fn check_dims(graph: &Graph, sigma: &LabelVector) -> Result<()> {
    if sigma.len() != graph.n() {
        return Err(Error::invalid(format!(
            "label vector length {} does not match node count {}",
            sigma.len(),
            graph.n()
        )));
    }
    Ok(())
}

/// Build the reduced design matrix. Requires at least two distinct labels.
pub fn build_design(graph: &Graph, sigma: &LabelVector) -> Result<DesignMatrix> {
    check_dims(graph, sigma)?;
    if sigma.k() < 2 || sigma.distinct() < 2 {
        return Err(Error::invalid(
            "design requires K >= 2 with at least two labels present",
        ));
    }
    let n = graph.n();
    let k = sigma.k();
    let q = gamma_dim(k);
    let rows = n * (n - 1) / 2;
    let mut m = DMatrix::zeros(rows, q + n);
    let mut row = 0;
    for i in 0..n {
        for j in i + 1..n {
            let (si, sj) = (sigma.label(i), sigma.label(j));
            if si != sj {
                let (lo, hi) = if si < sj { (si, sj) } else { (sj, si) };
                m[(row, gamma_col(lo, hi, k))] = 1.0;
            }
            m[(row, q + i)] = 1.0;
            m[(row, q + j)] = 1.0;
            row += 1;
        }
    }
    Ok(DesignMatrix { matrix: m, n, k })
}

/// Unreduced design: all `K(K+1)/2` block columns (diagonal included, ordered
/// `(1,1), (1,2), ..., (K,K)`) followed by the n intercept columns.
pub fn build_design_unreduced(graph: &Graph, sigma: &LabelVector) -> Result<DMatrix<f64>> {
    check_dims(graph, sigma)?;
    let n = graph.n();
    let k = sigma.k() as usize;
    let blocks = k * (k + 1) / 2;
    // column of unordered pair (a, b), a <= b, 1-based
    let col_of = |a: usize, b: usize| -> usize {
        (a - 1) * k - (a - 1) * a / 2 + (b - a) + (a - 1)
    };
    let rows = n * (n - 1) / 2;
    let mut m = DMatrix::zeros(rows, blocks + n);
    let mut row = 0;
    for i in 0..n {
        for j in i + 1..n {
            let (si, sj) = (sigma.label(i) as usize, sigma.label(j) as usize);
            let (lo, hi) = if si < sj { (si, sj) } else { (sj, si) };
            m[(row, col_of(lo, hi))] = 1.0;
            m[(row, blocks + i)] = 1.0;
            m[(row, blocks + j)] = 1.0;
            row += 1;
        }
    }
    Ok(m)
}

/// Identifiability status of a label configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identifiability {
    Identifiable,
    /// First community (1-based label) with fewer than two nodes.
    Deficient(u32),
}

/// The design is full column-rank if and only if every community has at least
/// two nodes.
pub fn check_identifiability(sigma: &LabelVector) -> Identifiability {
    for (idx, &size) in sigma.sizes().iter().enumerate() {
        if size < 2 {
            return Identifiability::Deficient(idx as u32 + 1);
        }
    }
    Identifiability::Identifiable
}

/// For each community k, the maximum over rows of the residual of the column
/// identity `2 b_{ij,kk} + sum_{l != k} b_{ij,kl} = sum_{v: sigma_v = k} c_{ij,v}`
/// in the unreduced design. All residuals are exactly zero by construction,
/// exhibiting K linearly dependent columns.
pub fn verify_column_dependencies(graph: &Graph, sigma: &LabelVector) -> Result<Vec<f64>> {
    check_dims(graph, sigma)?;
    let m = build_design_unreduced(graph, sigma)?;
    let k = sigma.k() as usize;
    let blocks = k * (k + 1) / 2;
    let col_of = |a: usize, b: usize| -> usize {
        debug_assert!(a <= b);
        (a - 1) * k - (a - 1) * a / 2 + (b - a) + (a - 1)
    };
    let mut residuals = vec![0.0f64; k];
    for (comm, resid) in residuals.iter_mut().enumerate() {
        let kc = comm + 1;
        for row in 0..m.nrows() {
            let mut lhs = 2.0 * m[(row, col_of(kc, kc))];
            for l in 1..=k {
                if l != kc {
                    let (lo, hi) = if l < kc { (l, kc) } else { (kc, l) };
                    lhs += m[(row, col_of(lo, hi))];
                }
            }
            let mut rhs = 0.0;
            for v in 0..graph.n() {
                if sigma.label(v) as usize == kc {
                    rhs += m[(row, blocks + v)];
                }
            }
            *resid = resid.max((lhs - rhs).abs());
        }
    }
    Ok(residuals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(entries: &[u32]) -> LabelVector {
        LabelVector::from_entries(entries.to_vec()).unwrap()
    }

    // the design depends only on n, not on the edge set
    fn graph_n(n: usize) -> Graph {
        Graph::from_edges(n, &[(0, 1)]).unwrap()
    }

    #[test]
    fn gamma_indexing() {
        assert_eq!(gamma_dim(2), 1);
        assert_eq!(gamma_dim(4), 6);
        let pairs: Vec<_> = gamma_pairs(4).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        for (idx, (k, l)) in gamma_pairs(4).enumerate() {
            assert_eq!(gamma_col(k, l, 4), idx);
        }
    }

    #[test]
    fn small_design_shape_and_rows() {
        let g = graph_n(4);
        let d = build_design(&g, &lv(&[1, 1, 2, 2])).unwrap();
        assert_eq!(d.rows(), 6);
        assert_eq!(d.cols(), 5); // gamma_12 + eta_1..4
        // row for pair (0, 2) (1-based nodes 1 and 3): between communities
        let r = d.row_index(0, 2);
        let m = d.matrix();
        assert_eq!(m[(r, 0)], 1.0);
        assert_eq!(m[(r, d.eta_col(0))], 1.0);
        assert_eq!(m[(r, d.eta_col(2))], 1.0);
        assert_eq!(m[(r, d.eta_col(1))], 0.0);
        // within-community row has zero gamma part
        let r = d.row_index(0, 1);
        assert_eq!(m[(r, 0)], 0.0);
    }

    #[test]
    fn degenerate_single_label_rejected() {
        let g = graph_n(4);
        assert!(build_design(&g, &lv(&[1, 1, 1, 1])).is_err());
    }

    #[test]
    fn rank_matches_identifiability() {
        let g = graph_n(5);
        let d = build_design(&g, &lv(&[1, 1, 2, 2, 2])).unwrap();
        assert_eq!(d.cols(), 6);
        assert_eq!(d.numeric_rank(), 6);
        let g = graph_n(4);
        let d = build_design(&g, &lv(&[1, 1, 1, 2])).unwrap();
        assert!(d.numeric_rank() < d.cols());
    }

    #[test]
    fn identifiability_cases() {
        assert_eq!(
            check_identifiability(&lv(&[1, 1, 2, 2])),
            Identifiability::Identifiable
        );
        assert_eq!(
            check_identifiability(&lv(&[1, 1, 1, 2])),
            Identifiability::Deficient(2)
        );
        assert_eq!(
            check_identifiability(&lv(&[1, 2])),
            Identifiability::Deficient(1)
        );
    }

    #[test]
    fn column_dependencies_are_exact() {
        let g = graph_n(4);
        let r = verify_column_dependencies(&g, &lv(&[1, 1, 2, 2])).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
        let g = graph_n(6);
        let r = verify_column_dependencies(&g, &lv(&[1, 2, 3, 1, 2, 3])).unwrap();
        assert_eq!(r, vec![0.0, 0.0, 0.0]);
    }

    /// With the node-intercept columns removed and theta_kl = logit^{-1} of
    /// the (unreduced) block coefficients, the Bernoulli likelihood built
    /// from the design rows is the plain blockmodel likelihood.
    #[test]
    fn block_columns_recover_simple_blockmodel_likelihood() {
        use crate::model::{log1p_exp, logit_inv};
        let mut state = 0xBEEFu64;
        let mut next_f = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 3..=6usize {
            let k = 2 + (n % 2) as u32; // K in {2, 3}
            let blocks = (k * (k + 1) / 2) as usize;
            let entries: Vec<u32> = (0..n).map(|_| 1 + (next_f() * k as f64) as u32).collect();
            let entries: Vec<u32> = entries.iter().map(|&e| e.min(k)).collect();
            let sigma = LabelVector::new(entries, k).unwrap();
            let mut edges = Vec::new();
            for i in 0..n as u32 {
                for j in i + 1..n as u32 {
                    if next_f() < 0.5 {
                        edges.push((i, j));
                    }
                }
            }
            let graph = Graph::from_edges(n, &edges).unwrap();
            let gamma_full: Vec<f64> = (0..blocks).map(|_| 4.0 * next_f() - 2.0).collect();

            let design = build_design_unreduced(&graph, &sigma).unwrap();
            let mut row = 0usize;
            let mut from_design = 0.0;
            let mut from_theta = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let s: f64 = (0..blocks).map(|c| design[(row, c)] * gamma_full[c]).sum();
                    let a = graph.adjacency(i, j);
                    from_design += if a { s - log1p_exp(s) } else { -log1p_exp(s) };
                    let (lo, hi) = {
                        let (x, y) = (sigma.label(i) as usize, sigma.label(j) as usize);
                        if x < y { (x, y) } else { (y, x) }
                    };
                    let col = (lo - 1) * k as usize - (lo - 1) * lo / 2 + (hi - lo) + (lo - 1);
                    let theta = logit_inv(gamma_full[col]);
                    from_theta += if a { theta.ln() } else { (1.0 - theta).ln() };
                    row += 1;
                }
            }
            assert!(
                (from_design - from_theta).abs() < 1e-10,
                "n={n}: {from_design} vs {from_theta}"
            );
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dependencies_hold_for_random_sigma(
                entries in proptest::collection::vec(1u32..=3, 3..=8)
            ) {
                let sigma = LabelVector::new(entries.clone(), 3).unwrap();
                let g = graph_n(entries.len());
                let r = verify_column_dependencies(&g, &sigma).unwrap();
                prop_assert!(r.iter().all(|&x| x == 0.0));
            }

            #[test]
            fn rank_iff_min_two_per_community(
                entries in proptest::collection::vec(1u32..=2, 4..=7)
            ) {
                let sigma = LabelVector::new(entries.clone(), 2).unwrap();
                prop_assume!(sigma.distinct() >= 2);
                let g = graph_n(entries.len());
                let d = build_design(&g, &sigma).unwrap();
                let full = d.numeric_rank() == d.cols();
                let identifiable =
                    check_identifiability(&sigma) == Identifiability::Identifiable;
                prop_assert_eq!(full, identifiable);
            }
        }
    }
}
