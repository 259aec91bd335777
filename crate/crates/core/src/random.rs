//! Random kernels for the sampler: Polya-Gamma PG(1, c) draws, truncated
//! normals, coordinate-constrained multivariate normals, Dirichlet, and
//! categorical draws, all driven by explicitly seeded, streamed RNGs.
//!
//! PG(1, c) uses the exact alternating-series accept/reject sampler of
//! Devroye (2009) as adapted by Polson, Scott & Windle (2013); there is no
//! series truncation bias.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Seeded RNG with an explicit stream id. Identical `(seed, stream)` and call
/// sequence produce identical draws; distinct streams are independent.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngHandle { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derive an independent sub-stream keyed by `tag`, without consuming any
    /// state from `self`. Used to give e.g. each Gibbs sweep's latent-variable
    /// block its own stream.
    pub fn fork(&self, tag: u64) -> Self {
        let derived = splitmix64(self.stream.rotate_left(17) ^ splitmix64(tag ^ 0xA076_1D64_78BD_642F));
        RngHandle::new(self.seed, derived)
    }

    fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    fn unif(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

const TRUNC: f64 = 0.64;

/// Piecewise proposal coefficients a_n(x) for the Jacobi-density series.
fn series_coef(n: u32, x: f64) -> f64 {
    let k = (n as f64 + 0.5) * std::f64::consts::PI;
    if x > TRUNC {
        k * (-0.5 * k * k * x).exp()
    } else if x > 0.0 {
        let half_pi = 0.5 * std::f64::consts::PI;
        let expnt = -1.5 * (half_pi.ln() + x.ln()) + k.ln()
            - 2.0 * (n as f64 + 0.5) * (n as f64 + 0.5) / x;
        expnt.exp()
    } else {
        0.0
    }
}

fn log_std_normal_cdf(x: f64) -> f64 {
    let normal = Normal::standard();
    let p = normal.cdf(x);
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Probability that the proposal draws from the exponential tail piece.
fn mass_texpon(z: f64) -> f64 {
    let t = TRUNC;
    let fz = 0.125 * std::f64::consts::PI * std::f64::consts::PI + 0.5 * z * z;
    let b = (1.0 / t).sqrt() * (t * z - 1.0);
    let a = -(1.0 / t).sqrt() * (t * z + 1.0);
    let x0 = fz.ln() + fz * t;
    let xb = x0 - z + log_std_normal_cdf(b);
    let xa = x0 + z + log_std_normal_cdf(a);
    let qdivp = 4.0 / std::f64::consts::PI * (xb.exp() + xa.exp());
    1.0 / (1.0 + qdivp)
}

/// Inverse-Gaussian IG(mu = 1/z, lambda = 1) truncated to (0, TRUNC].
fn trunc_inv_gauss(z: f64, rng: &mut RngHandle) -> f64 {
    let z = z.abs();
    let t = TRUNC;
    if z < 1.0 / t {
        // mean beyond the truncation point: one-sided chi-like rejection
        loop {
            let mut e1 = rng.exp1();
            let mut e2 = rng.exp1();
            while e1 * e1 > 2.0 * e2 / t {
                e1 = rng.exp1();
                e2 = rng.exp1();
            }
            let mut x = 1.0 + e1 * t;
            x = t / (x * x);
            let alpha = (-0.5 * z * z * x).exp();
            if rng.unif() <= alpha {
                return x;
            }
        }
    } else {
        // standard IG sampler, rejecting draws past the truncation point
        let mu = 1.0 / z;
        loop {
            let y = {
                let n = rng.std_normal();
                n * n
            };
            let mut x = mu + 0.5 * mu * mu * y
                - 0.5 * mu * (4.0 * mu * y + (mu * y) * (mu * y)).sqrt();
            if rng.unif() > mu / (mu + x) {
                x = mu * mu / x;
            }
            if x <= t {
                return x;
            }
        }
    }
}

/// Exact draw from the Polya-Gamma distribution PG(1, c).
///
/// Symmetric in `c`; mean is `tanh(c/2) / (2c)` (`1/4` at `c = 0`).
pub fn pg1(c: f64, rng: &mut RngHandle) -> Result<f64> {
    if !c.is_finite() {
        return Err(Error::numerical(format!("PG tilt must be finite, got {c}")));
    }
    // PG(1, c) = J*(1, c/2) / 4 where J* is the tilted Jacobi variable.
    let z = c.abs() * 0.5;
    let fz = 0.125 * std::f64::consts::PI * std::f64::consts::PI + 0.5 * z * z;
    let p_tail = mass_texpon(z);
    loop {
        let x = if rng.unif() < p_tail {
            TRUNC + rng.exp1() / fz
        } else {
            trunc_inv_gauss(z, rng)
        };
        // Alternating-series accept/reject (partial sums bracket the density).
        let mut s = series_coef(0, x);
        let y = rng.unif() * s;
        let mut n = 0u32;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= series_coef(n, x);
                if y <= s {
                    return Ok(0.25 * x);
                }
            } else {
                s += series_coef(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// Standard normal draw conditioned on the result being at least `lower > 0`,
/// using an exponential proposal (Robert 1995).
fn std_normal_lower_tail(lower: f64, rng: &mut RngHandle) -> f64 {
    let alpha = 0.5 * (lower + (lower * lower + 4.0).sqrt());
    loop {
        let x = lower + rng.exp1() / alpha;
        let rho = (-(x - alpha) * (x - alpha) / 2.0).exp();
        if rng.unif() <= rho {
            return x;
        }
    }
}

/// Draw from `N(mean, sd^2)` conditioned on the value being `<= upper`.
///
/// Plain rejection is used while the acceptance probability is at least 0.1
/// (standardized bound >= -1.2816); deeper truncations switch to an
/// exponential-proposal tail sampler. Never returns a value above `upper`.
pub fn truncnorm_upper(mean: f64, sd: f64, upper: f64, rng: &mut RngHandle) -> f64 {
    assert!(sd > 0.0, "standard deviation must be positive");
    if upper == f64::INFINITY {
        return mean + sd * rng.std_normal();
    }
    let alpha = (upper - mean) / sd;
    // Phi^{-1}(0.1): plain rejection accepts with probability >= 0.1 above this.
    const PLAIN_REJECTION_BOUND: f64 = -1.2815515655446004;
    let z = if alpha >= PLAIN_REJECTION_BOUND {
        loop {
            let z = rng.std_normal();
            if z <= alpha {
                break z;
            }
        }
    } else {
        -std_normal_lower_tail(-alpha, rng)
    };
    let value = (mean + sd * z).min(upper);
    assert!(value <= upper);
    value
}

/// How a truncated multivariate normal draw was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncMvnPath {
    JointRejection,
    GibbsFallback,
}

const JOINT_REJECTION_ATTEMPTS: usize = 1000;
const FALLBACK_SWEEPS: usize = 20;

/// Draw from `N(mean, cov)` conditioned on every coordinate being `<= 0`.
///
/// Primary path: joint rejection (draw, accept if all coordinates are
/// non-positive). If no draw is accepted within 1000 attempts, falls back to
/// coordinate-wise Gibbs sweeps on the full conditionals. When `cov` is
/// diagonal the coordinates are independent and the fallback is exact after a
/// single sweep.
pub fn mvn_truncated_nonpositive(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    rng: &mut RngHandle,
) -> Result<(DVector<f64>, TruncMvnPath)> {
    let d = mean.len();
    if cov.nrows() != d || cov.ncols() != d {
        return Err(Error::invalid("covariance dimensions must match the mean"));
    }
    let chol = nalgebra::Cholesky::new(cov.clone())
        .ok_or_else(|| Error::numerical("covariance is not positive definite"))?;
    let l = chol.l();

    let mut z = DVector::zeros(d);
    for _ in 0..JOINT_REJECTION_ATTEMPTS {
        for i in 0..d {
            z[i] = rng.std_normal();
        }
        let x = mean + &l * &z;
        if x.iter().all(|&v| v <= 0.0) {
            return Ok((x, TruncMvnPath::JointRejection));
        }
    }

    // Gibbs fallback on full conditionals derived from the precision matrix.
    let precision = chol.inverse();
    let mut x = DVector::from_iterator(d, mean.iter().map(|&m| m.min(0.0)));
    for _ in 0..FALLBACK_SWEEPS {
        for i in 0..d {
            let qii = precision[(i, i)];
            let mut shift = 0.0;
            for j in 0..d {
                if j != i {
                    shift += precision[(i, j)] * (x[j] - mean[j]);
                }
            }
            let cond_mean = mean[i] - shift / qii;
            let cond_sd = (1.0 / qii).sqrt();
            x[i] = truncnorm_upper(cond_mean, cond_sd, 0.0, rng);
        }
    }
    Ok((x, TruncMvnPath::GibbsFallback))
}

/// Dirichlet draw via normalized Gamma variates.
pub fn dirichlet(alpha: &[f64], rng: &mut RngHandle) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::invalid("Dirichlet needs at least one parameter"));
    }
    if alpha.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::invalid("Dirichlet parameters must be positive"));
    }
    loop {
        let mut draws = Vec::with_capacity(alpha.len());
        let mut total = 0.0;
        for &a in alpha {
            let g: f64 = Gamma::new(a, 1.0)
                .map_err(|e| Error::invalid(format!("bad Gamma shape: {e}")))?
                .sample(&mut rng.rng);
            draws.push(g);
            total += g;
        }
        if total > 0.0 {
            for v in draws.iter_mut() {
                *v /= total;
            }
            return Ok(draws);
        }
        // all-zero underflow for very small alpha: redraw
    }
}

/// Sample a category from a probability vector; returns a 1-based label.
pub fn multinomial_index(p: &[f64], rng: &mut RngHandle) -> Result<u32> {
    if p.is_empty() {
        return Err(Error::invalid("probability vector must be non-empty"));
    }
    if p.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("probabilities must be non-negative"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "probabilities must sum to 1 (got {total})"
        )));
    }
    let u = rng.unif() * total;
    let mut acc = 0.0;
    for (i, &v) in p.iter().enumerate() {
        acc += v;
        if u <= acc {
            return Ok(i as u32 + 1);
        }
    }
    Ok(p.len() as u32)
}
