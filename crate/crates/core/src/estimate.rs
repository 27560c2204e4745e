//! Reflection-coefficient coding of a range cell.
//!
//! A stationary zero-mean complex AR process is carried by its power `p0` and
//! its reflection (Verblunsky) coefficients `μ_k`, all strictly inside the
//! unit disk. Conventions used throughout:
//!
//! * prediction-error filter `1 + Σ a_k z^{-k}`, i.e. `z_t = −Σ a_k z_{t−k} + e_t`;
//! * autocorrelation `r_j = E[z_t conj(z_{t−j})]`, covariance `R[i][j] = r_{i−j}`;
//! * order update `a⁽ᵏ⁾ = [a⁽ᵏ⁻¹⁾ + μ_k conj(reverse(a⁽ᵏ⁻¹⁾)), μ_k]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::hermitian::{CMatrix, HermitianError, HpdMatrix};
use crate::siegel::SiegelParams;
use crate::simulate::Burst;

/// Largest modulus a reflection coefficient may take.
pub const DISK_CLAMP: f64 = 1.0 - 1e-9;

const TOEPLITZ_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("series is empty")]
    EmptySeries,
    #[error("order {order} too large for {len} samples")]
    OrderTooLarge { order: usize, len: usize },
    #[error("series is identically zero")]
    ZeroSignal,
    #[error("non-finite value")]
    NonFinite,
    #[error("negative regularization weight {0}")]
    InvalidGamma(f64),
    #[error("reflection coefficient {index} has modulus {modulus}, outside the disk")]
    InvalidCoefficient { index: usize, modulus: f64 },
    #[error("matrix is not Toeplitz")]
    NotToeplitz,
    #[error("autocorrelation is not positive definite at lag {lag}")]
    NotPositiveDefinite { lag: usize },
    #[error("block {index}: I − A Aᴴ is not positive definite")]
    SingularBlock { index: usize },
    #[error("spectrum needs at least 2 frequencies, got {0}")]
    InvalidSpectrumSize(usize),
    #[error("cell {cell}: {source}")]
    Cell {
        cell: usize,
        #[source]
        source: Box<EstimateError>,
    },
    #[error(transparent)]
    Hermitian(#[from] HermitianError),
}

/// Coordinates of a range cell in `ℝ × D^{m}`: `(log p0, μ_1..μ_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawReflectionPoint")]
pub struct ReflectionPoint {
    log_p0: f64,
    mu: Vec<Complex64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReflectionPoint {
    log_p0: f64,
    mu: Vec<Complex64>,
}

impl TryFrom<RawReflectionPoint> for ReflectionPoint {
    type Error = EstimateError;
    fn try_from(raw: RawReflectionPoint) -> Result<Self, Self::Error> {
        ReflectionPoint::new(raw.log_p0, raw.mu)
    }
}

impl ReflectionPoint {
    pub fn new(log_p0: f64, mu: Vec<Complex64>) -> Result<Self, EstimateError> {
        if !log_p0.is_finite() {
            return Err(EstimateError::NonFinite);
        }
        for (index, m) in mu.iter().enumerate() {
            if !m.re.is_finite() || !m.im.is_finite() {
                return Err(EstimateError::NonFinite);
            }
            let modulus = m.norm();
            if modulus > DISK_CLAMP {
                return Err(EstimateError::InvalidCoefficient { index, modulus });
            }
        }
        Ok(Self { log_p0, mu })
    }

    pub fn from_power(p0: f64, mu: Vec<Complex64>) -> Result<Self, EstimateError> {
        if !(p0 > 0.0) || !p0.is_finite() {
            return Err(EstimateError::NonFinite);
        }
        Self::new(p0.ln(), mu)
    }

    pub fn log_p0(&self) -> f64 {
        self.log_p0
    }

    pub fn p0(&self) -> f64 {
        self.log_p0.exp()
    }

    pub fn mu(&self) -> &[Complex64] {
        &self.mu
    }

    pub fn order(&self) -> usize {
        self.mu.len()
    }
}

/// AR model in prediction-error-filter form.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    /// `a_1..a_m`.
    pub a: Vec<Complex64>,
    /// Final prediction-error power `p0 Π(1 − |μ_k|²)`.
    pub sigma2: f64,
    pub p0: f64,
}

/// Radial projection onto `|μ| ≤ DISK_CLAMP`, phase kept.
pub(crate) fn clamp_to_disk(mu: Complex64) -> Complex64 {
    let r = mu.norm();
    if !(r > DISK_CLAMP) {
        return mu;
    }
    let mut z = mu * (DISK_CLAMP / r);
    // the rescaled modulus can round one ulp past the bound
    while z.norm() > DISK_CLAMP {
        z *= 1.0 - f64::EPSILON;
    }
    z
}

/// Order update of the prediction-error filter.
fn step_up(a: &[Complex64], mu: Complex64) -> Vec<Complex64> {
    let k = a.len() + 1;
    let mut next: Vec<Complex64> = (0..a.len())
        .map(|j| a[j] + mu * a[k - 2 - j].conj())
        .collect();
    next.push(mu);
    next
}

/// Frequency-smoothness weight `(2πj)²` of the regularized Burg penalty.
fn smoothness_weight(j: usize) -> f64 {
    let w = 2.0 * PI * j as f64;
    w * w
}

/// Regularized Burg estimate of `(log p0, μ_1..μ_order)`.
///
/// Stage `k` picks `μ_k` minimizing the mean forward+backward prediction
/// error plus `gamma · Σ_j (2πj)² |a_j⁽ᵏ⁾|²`. With `gamma = 0` this is the
/// classical Burg ratio `−2 Σ f b̄ / Σ (|f|² + |b|²)`. Coefficients that land
/// on the unit circle are pulled back to modulus `DISK_CLAMP`, keeping the
/// phase.
pub fn burg_regularized(
    series: &[Complex64],
    order: usize,
    gamma: f64,
) -> Result<ReflectionPoint, EstimateError> {
    let n = series.len();
    if n == 0 {
        return Err(EstimateError::EmptySeries);
    }
    if order >= n {
        return Err(EstimateError::OrderTooLarge { order, len: n });
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(EstimateError::InvalidGamma(gamma));
    }
    if series.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EstimateError::NonFinite);
    }
    let p0 = series.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    if p0 == 0.0 {
        return Err(EstimateError::ZeroSignal);
    }

    let mut f = series.to_vec();
    let mut b = series.to_vec();
    let mut a: Vec<Complex64> = Vec::with_capacity(order);
    let mut mus = Vec::with_capacity(order);

    for k in 1..=order {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for t in k..n {
            num += f[t] * b[t - 1].conj();
            den += f[t].norm_sqr() + b[t - 1].norm_sqr();
        }
        let m = (n - k) as f64;
        let mut num = num / m;
        let mut den = den / (2.0 * m);
        if gamma > 0.0 {
            // a_0 = 1 and a_k⁽ᵏ⁻¹⁾ = 0
            let coef = |j: usize| -> Complex64 {
                if j == 0 {
                    Complex64::new(1.0, 0.0)
                } else if j < k {
                    a[j - 1]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            };
            for j in 1..=k {
                let w = smoothness_weight(j);
                num += coef(j) * coef(k - j) * (gamma * w);
                den += coef(k - j).norm_sqr() * gamma * w;
            }
        }
        let mu = if den > 0.0 {
            clamp_to_disk(-num / den)
        } else {
            Complex64::new(0.0, 0.0)
        };

        for t in (k..n).rev() {
            let ft = f[t];
            let bt = b[t - 1];
            f[t] = ft + mu * bt;
            b[t] = bt + mu.conj() * ft;
        }
        a = step_up(&a, mu);
        mus.push(mu);
    }
    ReflectionPoint::new(p0.ln(), mus)
}

/// Reflection coefficients to prediction-error filter (Levinson step-up).
pub fn levinson(point: &ReflectionPoint) -> ArModel {
    let p0 = point.p0();
    let mut a = Vec::with_capacity(point.order());
    let mut sigma2 = p0;
    for &mu in point.mu() {
        a = step_up(&a, mu);
        sigma2 *= 1.0 - mu.norm_sqr();
    }
    ArModel { a, sigma2, p0 }
}

/// Autocorrelation lags `r_0..r_{len−1}` of the AR process. Lags beyond the
/// model order follow the recursion `r_j = −Σ a_k r_{j−k}`.
pub fn autocorrelation_from_reflection(point: &ReflectionPoint, len: usize) -> Vec<Complex64> {
    let mut r = Vec::with_capacity(len);
    if len == 0 {
        return r;
    }
    r.push(Complex64::new(point.p0(), 0.0));
    let mut a: Vec<Complex64> = Vec::new();
    let mut sigma2 = point.p0();
    for (i, &mu) in point.mu().iter().enumerate() {
        let k = i + 1;
        if k < len {
            let mut rk = -mu * sigma2;
            for j in 1..k {
                rk -= a[j - 1] * r[k - j];
            }
            r.push(rk);
        }
        a = step_up(&a, mu);
        sigma2 *= 1.0 - mu.norm_sqr();
    }
    for k in r.len()..len {
        let mut rk = Complex64::new(0.0, 0.0);
        for (j, aj) in a.iter().enumerate() {
            rk -= aj * r[k - 1 - j];
        }
        r.push(rk);
    }
    r
}

/// Hermitian Toeplitz matrix `R[i][j] = r_{i−j}` with `r_{−j} = conj(r_j)`.
pub fn toeplitz(r: &[Complex64]) -> CMatrix {
    let n = r.len();
    CMatrix::from_fn(n, n, |i, j| if i >= j { r[i - j] } else { r[j - i].conj() })
}

/// Toeplitz covariance of size `size` generated by the AR model.
pub fn covariance_from_reflection(
    point: &ReflectionPoint,
    size: usize,
) -> Result<HpdMatrix, EstimateError> {
    let r = autocorrelation_from_reflection(point, size);
    Ok(HpdMatrix::new(toeplitz(&r))?)
}

/// Exact Levinson recursion on autocorrelation lags `r_0..r_m`.
pub fn reflection_from_autocorrelation(r: &[Complex64]) -> Result<ReflectionPoint, EstimateError> {
    let r0 = r.first().ok_or(EstimateError::EmptySeries)?.re;
    if !(r0 > 0.0) {
        return Err(EstimateError::NotPositiveDefinite { lag: 0 });
    }
    let mut a: Vec<Complex64> = Vec::with_capacity(r.len());
    let mut sigma2 = r0;
    let mut mus = Vec::with_capacity(r.len().saturating_sub(1));
    for k in 1..r.len() {
        let mut acc = r[k];
        for j in 1..k {
            acc += a[j - 1] * r[k - j];
        }
        let mu = -acc / sigma2;
        if !(mu.norm() < 1.0) {
            return Err(EstimateError::NotPositiveDefinite { lag: k });
        }
        a = step_up(&a, mu);
        sigma2 *= 1.0 - mu.norm_sqr();
        mus.push(mu);
    }
    ReflectionPoint::new(r0.ln(), mus)
}

/// Inverse of [`covariance_from_reflection`].
pub fn reflection_from_covariance(cov: &HpdMatrix) -> Result<ReflectionPoint, EstimateError> {
    let m = cov.as_matrix();
    let n = m.nrows();
    let scale = m[(0, 0)].norm().max(f64::MIN_POSITIVE);
    for i in 1..n {
        for j in 1..n {
            if (m[(i, j)] - m[(i - 1, j - 1)]).norm() > TOEPLITZ_TOL * scale {
                return Err(EstimateError::NotToeplitz);
            }
        }
    }
    let r: Vec<Complex64> = (0..n).map(|k| m[(k, 0)]).collect();
    reflection_from_autocorrelation(&r)
}

/// `S = −Σ_{k=1}^{m} (n−k) log(1 − |μ_k|²) − n log(πe p0)`.
///
/// This is the AR form of `−log det R + const` for the `n × n` Toeplitz
/// covariance; the additive constant is fixed by the `πe` term.
pub fn entropy_scalar(point: &ReflectionPoint, n: usize) -> Result<f64, EstimateError> {
    if n < point.order() + 1 {
        return Err(EstimateError::OrderTooLarge {
            order: point.order(),
            len: n,
        });
    }
    let nf = n as f64;
    let mut s = -nf * (PI.ln() + 1.0 + point.log_p0());
    for (i, mu) in point.mu().iter().enumerate() {
        let k = (i + 1) as f64;
        s -= (nf - k) * (-mu.norm_sqr()).ln_1p();
    }
    Ok(s)
}

/// Block form `−Σ (N−k) log det(I − A_k A_kᴴ) − N log det(πe R0)`.
pub fn entropy_matrix(params: &SiegelParams, n: usize) -> Result<f64, EstimateError> {
    let blocks = params.blocks();
    if n < blocks.len() + 1 {
        return Err(EstimateError::OrderTooLarge {
            order: blocks.len(),
            len: n,
        });
    }
    let p = params.block_size() as f64;
    let nf = n as f64;
    let mut s = -nf * (p * (PI.ln() + 1.0) + params.r0().log_det());
    for (i, a) in blocks.iter().enumerate() {
        let k = (i + 1) as f64;
        let z = a.as_matrix();
        let gap = CMatrix::identity(z.nrows(), z.nrows()) - z * z.adjoint();
        let gap = HpdMatrix::new(gap).map_err(|_| EstimateError::SingularBlock { index: i })?;
        s -= (nf - k) * gap.log_det();
    }
    Ok(s)
}

/// AR power spectral density `σ² / |1 + Σ a_k e^{−i2πfk}|²` sampled at
/// `f_j = j/n_freq − 1/2`.
pub fn doppler_spectrum(model: &ArModel, n_freq: usize) -> Result<Vec<f64>, EstimateError> {
    if n_freq < 2 {
        return Err(EstimateError::InvalidSpectrumSize(n_freq));
    }
    Ok((0..n_freq)
        .map(|j| {
            let f = spectrum_frequency(j, n_freq);
            let mut den = Complex64::new(1.0, 0.0);
            for (i, a) in model.a.iter().enumerate() {
                let k = (i + 1) as f64;
                den += a * Complex64::from_polar(1.0, -2.0 * PI * f * k);
            }
            model.sigma2 / den.norm_sqr()
        })
        .collect())
}

/// Normalized frequency of spectrum bin `j`.
pub fn spectrum_frequency(j: usize, n_freq: usize) -> f64 {
    j as f64 / n_freq as f64 - 0.5
}

/// Runs [`burg_regularized`] on every range cell of a burst.
pub fn estimate_cells(
    burst: &Burst,
    order: usize,
    gamma: f64,
    exec: Exec,
) -> Result<Vec<ReflectionPoint>, EstimateError> {
    exec.map_range(burst.n_cells(), |j| {
        burg_regularized(burst.cell(j), order, gamma).map_err(|e| EstimateError::Cell {
            cell: j,
            source: Box::new(e),
        })
    })
    .into_iter()
    .collect()
}
