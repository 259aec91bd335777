//! The SWEEP operator (Goodnight 1979) for symmetric matrices.
//!
//! Sweeping a set of pivot indices `S` of a symmetric matrix
//! `[[A_SS, A_SR], [A_RS, A_RR]]` in place yields
//! `[[A_SS^{-1}, A_SS^{-1} A_SR], [-A_RS A_SS^{-1}, A_RR - A_RS A_SS^{-1} A_SR]]`:
//! the unswept block becomes the Schur complement, which is exactly the
//! conditional covariance (or precision) block needed when splitting a joint
//! Gaussian.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Sweep pivot `k` in place. Fails if the pivot is numerically singular.
pub fn sweep_in_place(a: &mut DMatrix<f64>, k: usize) -> Result<()> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sweep requires a square matrix");
    let d = a[(k, k)];
    if d.abs() < 1e-300 {
        return Err(Error::numerical(format!("sweep pivot {k} is singular")));
    }
    for j in 0..n {
        a[(k, j)] /= d;
    }
    for i in 0..n {
        if i != k {
            let aik = a[(i, k)];
            if aik != 0.0 {
                for j in 0..n {
                    if j != k {
                        a[(i, j)] -= aik * a[(k, j)];
                    }
                }
            }
            a[(i, k)] = -aik / d;
        }
    }
    a[(k, k)] = 1.0 / d;
    Ok(())
}

/// Sweep a set of pivot indices in order.
pub fn sweep_indices(a: &mut DMatrix<f64>, pivots: &[usize]) -> Result<()> {
    for &k in pivots {
        sweep_in_place(a, k)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn random_spd(dim: usize, seed: u64) -> DMatrix<f64> {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = DMatrix::from_fn(dim, dim, |_, _| next());
        &m * m.transpose() + DMatrix::identity(dim, dim) * 0.5
    }

    #[test]
    fn sweep_matches_direct_schur_complement() {
        for seed in 0..20 {
            let dim = 6;
            let split = 2;
            let a = random_spd(dim, seed + 1);
            let mut swept = a.clone();
            sweep_indices(&mut swept, &(0..split).collect::<Vec<_>>()).unwrap();

            let a_ss = a.view((0, 0), (split, split)).into_owned();
            let a_sr = a.view((0, split), (split, dim - split)).into_owned();
            let a_rs = a.view((split, 0), (dim - split, split)).into_owned();
            let a_rr = a.view((split, split), (dim - split, dim - split)).into_owned();
            let inv_ss = a_ss.try_inverse().unwrap();
            let schur = &a_rr - &a_rs * &inv_ss * &a_sr;

            let swept_rr = swept
                .view((split, split), (dim - split, dim - split))
                .into_owned();
            assert!((swept_rr - &schur).abs().max() < 1e-10, "seed {seed}");

            // swept SS block is the inverse of A_SS
            let swept_ss = swept.view((0, 0), (split, split)).into_owned();
            assert!((swept_ss - &inv_ss).abs().max() < 1e-10);
        }
    }

    #[test]
    fn sweeping_all_pivots_inverts() {
        let a = random_spd(5, 99);
        let mut swept = a.clone();
        sweep_indices(&mut swept, &[0, 1, 2, 3, 4]).unwrap();
        let inv = a.clone().try_inverse().unwrap();
        assert!((swept - inv).abs().max() < 1e-9);
    }

    #[test]
    fn sweep_solves_augmented_system() {
        // Sweeping the coefficient block of [[A, b], [b^T, 0]] leaves A^{-1} b
        // in the augmented column.
        let a = random_spd(4, 7);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let mut aug = DMatrix::zeros(5, 5);
        aug.view_mut((0, 0), (4, 4)).copy_from(&a);
        for i in 0..4 {
            aug[(i, 4)] = b[i];
            aug[(4, i)] = b[i];
        }
        sweep_indices(&mut aug, &[0, 1, 2, 3]).unwrap();
        let x = a.lu().solve(&b).unwrap();
        for i in 0..4 {
            assert!((aug[(i, 4)] - x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_pivot_errors() {
        let mut a = DMatrix::zeros(2, 2);
        a[(1, 1)] = 1.0;
        assert!(sweep_in_place(&mut a, 0).is_err());
    }
}
