//! Matrix geometry of Block-Toeplitz covariance parameters
//! `(R0, A_1, …, A_{N−1})`, with `R0` HPD and each `A_k` in the Siegel disk
//! `{Z : I − Z Zᴴ ≻ 0}`.
//!
//! Distances follow the same normalization as [`crate::poincare`]:
//! `log((1 + s)/(1 − s))` on the singular values of the Siegel transfer
//! `Φ_Z(W)`, and the metric form carries the matching factor
//! [`DISK_METRIC_SCALE`] on the Siegel blocks.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::ReflectionPoint;
use crate::hermitian::{
    asymmetry, condition_number, hermitian_eig, hermitize, hpd_inv_sqrt, hpd_sqrt, identity,
    singular_values, trace, CMatrix, HermitianError, HpdMatrix, HERMITIAN_TOL,
};
use crate::poincare::DISK_METRIC_SCALE;

/// Required gap `1 − ‖Z‖₂` for a valid Siegel point.
pub const SIEGEL_MARGIN: f64 = 1e-12;

/// Largest accepted condition number of `I − Zᴴ W`.
pub const MAX_PIVOT_CONDITION: f64 = 1e14;

const METRIC_IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SiegelError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("spectral norm {norm} is not inside the Siegel disk")]
    OutsideDisk { norm: f64 },
    #[error("I − Zᴴ W is numerically singular (condition {condition:e})")]
    SingularPivot { condition: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("metric form has imaginary residue {residue:e}")]
    ComplexMetric { residue: f64 },
    #[error("perturbation of R0 is not Hermitian")]
    NotHermitian,
    #[error(transparent)]
    Hermitian(#[from] HermitianError),
}

/// How the singular values of `Φ_{Z1}(Z2)` are folded into a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiegelNorm {
    /// `log((1+s)/(1−s))` with `s` the largest singular value.
    #[default]
    Spectral,
    /// `sqrt(Σ_i log²((1+σ_i)/(1−σ_i)))` over all singular values.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    z: CMatrix,
}

impl SiegelPoint {
    pub fn new(z: CMatrix) -> Result<Self, SiegelError> {
        if z.nrows() != z.ncols() || z.nrows() == 0 {
            return Err(SiegelError::NotSquare {
                rows: z.nrows(),
                cols: z.ncols(),
            });
        }
        if z.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(SiegelError::NonFinite);
        }
        let norm = spectral_norm(&z);
        if !(norm < 1.0 - SIEGEL_MARGIN) {
            return Err(SiegelError::OutsideDisk { norm });
        }
        Ok(Self { z })
    }

    pub fn zero(p: usize) -> Self {
        Self {
            z: CMatrix::zeros(p, p),
        }
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.z
    }

    pub fn dim(&self) -> usize {
        self.z.nrows()
    }
}

fn spectral_norm(m: &CMatrix) -> f64 {
    if m.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        0.0
    } else {
        singular_values(m)[0]
    }
}

/// `(R0, A_1..A_{N−1})`; `N = blocks().len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelParams {
    r0: HpdMatrix,
    blocks: Vec<SiegelPoint>,
}

impl SiegelParams {
    pub fn new(r0: HpdMatrix, blocks: Vec<SiegelPoint>) -> Result<Self, SiegelError> {
        let p = r0.dim();
        if let Some((k, b)) = blocks.iter().enumerate().find(|(_, b)| b.dim() != p) {
            return Err(SiegelError::DimensionMismatch(format!(
                "block {} is {}x{}, R0 is {}x{}",
                k + 1,
                b.dim(),
                b.dim(),
                p,
                p
            )));
        }
        Ok(Self { r0, blocks })
    }

    /// 1×1 embedding of a scalar reflection point.
    pub fn from_scalar(point: &ReflectionPoint) -> Result<Self, SiegelError> {
        let r0 = HpdMatrix::from_diagonal(&[point.p0()])?;
        let blocks = point
            .mu()
            .iter()
            .map(|&m| SiegelPoint::new(CMatrix::from_element(1, 1, m)))
            .collect::<Result<_, _>>()?;
        Self::new(r0, blocks)
    }

    pub fn r0(&self) -> &HpdMatrix {
        &self.r0
    }

    pub fn blocks(&self) -> &[SiegelPoint] {
        &self.blocks
    }

    pub fn block_size(&self) -> usize {
        self.r0.dim()
    }

    /// Number of Toeplitz blocks `N`.
    pub fn n(&self) -> usize {
        self.blocks.len() + 1
    }
}

/// `Φ_Z(W) = (I − Z Zᴴ)^{−1/2} (W − Z) (I − Zᴴ W)^{−1} (I − Zᴴ Z)^{1/2}`.
pub fn siegel_phi(z: &SiegelPoint, w: &SiegelPoint) -> Result<CMatrix, SiegelError> {
    let p = z.dim();
    if w.dim() != p {
        return Err(SiegelError::DimensionMismatch(format!("{p} vs {}", w.dim())));
    }
    let (z, w) = (&z.z, &w.z);
    let eye = identity(p);
    let left = hpd_inv_sqrt(&HpdMatrix::new(&eye - z * z.adjoint())?);
    let right = hpd_sqrt(&HpdMatrix::new(&eye - z.adjoint() * z)?);
    let pivot = &eye - z.adjoint() * w;
    let condition = condition_number(&pivot);
    if !(condition <= MAX_PIVOT_CONDITION) {
        return Err(SiegelError::SingularPivot { condition });
    }
    let pivot_inv = pivot
        .try_inverse()
        .ok_or(SiegelError::SingularPivot { condition })?;
    let phi = left.as_matrix() * (w - z) * pivot_inv * right.as_matrix();
    let norm = spectral_norm(&phi);
    if !(norm < 1.0) {
        return Err(SiegelError::OutsideDisk { norm });
    }
    Ok(phi)
}

/// `log((1+s)/(1−s))`.
fn radial_distance(s: f64) -> f64 {
    s.ln_1p() - (-s).ln_1p()
}

/// Lexicographic order on entries, so symmetric functions can always be
/// evaluated on the same argument order.
fn canonical_cmp(a: &CMatrix, b: &CMatrix) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Siegel-disk distance. Symmetric bit-for-bit: both argument orders
/// evaluate `Φ` on the same canonical pair.
pub fn siegel_distance(
    z1: &SiegelPoint,
    z2: &SiegelPoint,
    norm: SiegelNorm,
) -> Result<f64, SiegelError> {
    let (a, b) = match canonical_cmp(&z1.z, &z2.z) {
        Ordering::Equal if z1.dim() == z2.dim() => return Ok(0.0),
        Ordering::Greater => (z2, z1),
        _ => (z1, z2),
    };
    let phi = siegel_phi(a, b)?;
    let s = singular_values(&phi);
    Ok(match norm {
        SiegelNorm::Spectral => radial_distance(s[0]),
        SiegelNorm::Full => s.iter().map(|&x| radial_distance(x).powi(2)).sum::<f64>().sqrt(),
    })
}

/// Affine-invariant distance `‖log(R1^{−1/2} R2 R1^{−1/2})‖_F`.
pub fn hpd_affine_distance(r1: &HpdMatrix, r2: &HpdMatrix) -> Result<f64, SiegelError> {
    if r1.dim() != r2.dim() {
        return Err(SiegelError::DimensionMismatch(format!(
            "{} vs {}",
            r1.dim(),
            r2.dim()
        )));
    }
    let (a, b) = match canonical_cmp(r1.as_matrix(), r2.as_matrix()) {
        Ordering::Equal => return Ok(0.0),
        Ordering::Greater => (r2, r1),
        Ordering::Less => (r1, r2),
    };
    let w = hpd_inv_sqrt(a);
    let m = hermitize(&(w.as_matrix() * b.as_matrix() * w.as_matrix()));
    let eig = hermitian_eig(&m)?;
    if let Some(&min) = eig.values.last() {
        if !(min > 0.0) {
            return Err(HermitianError::NotPositiveDefinite {
                min_eigenvalue: min,
            }
            .into());
        }
    }
    Ok(eig.values.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

fn check_same_shape(p1: &SiegelParams, p2: &SiegelParams) -> Result<(), SiegelError> {
    if p1.n() != p2.n() || p1.block_size() != p2.block_size() {
        return Err(SiegelError::DimensionMismatch(format!(
            "N={} p={} vs N={} p={}",
            p1.n(),
            p1.block_size(),
            p2.n(),
            p2.block_size()
        )));
    }
    Ok(())
}

/// `d² = N d_R(R0₁, R0₂)² + Σ_k (N − k) d_S(A₁ₖ, A₂ₖ)²`.
pub fn block_toeplitz_distance(
    p1: &SiegelParams,
    p2: &SiegelParams,
    norm: SiegelNorm,
) -> Result<f64, SiegelError> {
    check_same_shape(p1, p2)?;
    let n = p1.n() as f64;
    let d0 = hpd_affine_distance(&p1.r0, &p2.r0)?;
    let mut s = n * d0 * d0;
    for (i, (a, b)) in p1.blocks.iter().zip(&p2.blocks).enumerate() {
        let d = siegel_distance(a, b, norm)?;
        s += (n - (i + 1) as f64) * d * d;
    }
    Ok(s.sqrt())
}

/// `ds² = N Tr[(R0⁻¹ dR0)²] + 4 Σ_k (N−k) Tr[(I − A Aᴴ)⁻¹ dA (I − Aᴴ A)⁻¹ dAᴴ]`.
///
/// The Siegel term is the complex Hessian of `−log det(I − A Aᴴ)`; for 1×1
/// and normal blocks `(I − Aᴴ A)` equals `(I − A Aᴴ)`.
pub fn matrix_metric_form(
    params: &SiegelParams,
    d_r0: &CMatrix,
    d_a: &[CMatrix],
) -> Result<f64, SiegelError> {
    let p = params.block_size();
    if d_r0.shape() != (p, p)
        || d_a.len() != params.blocks.len()
        || d_a.iter().any(|d| d.shape() != (p, p))
    {
        return Err(SiegelError::DimensionMismatch(
            "perturbation shapes do not match the parameters".into(),
        ));
    }
    if asymmetry(d_r0) > HERMITIAN_TOL {
        return Err(SiegelError::NotHermitian);
    }
    let n = params.n() as f64;
    let x = params.r0.inverse() * d_r0;
    let mut ds2 = trace(&(&x * &x)) * n;
    let eye = identity(p);
    for (i, (a, da)) in params.blocks.iter().zip(d_a).enumerate() {
        let z = &a.z;
        let left = HpdMatrix::new(&eye - z * z.adjoint())?.inverse();
        let right = HpdMatrix::new(&eye - z.adjoint() * z)?.inverse();
        let t = trace(&(left * da * right * da.adjoint()));
        ds2 += t * ((n - (i + 1) as f64) * DISK_METRIC_SCALE);
    }
    let residue = ds2.im.abs();
    if residue > METRIC_IMAG_TOL * ds2.re.abs().max(1.0) {
        return Err(SiegelError::ComplexMetric { residue });
    }
    Ok(ds2.re)
}

type Pair = [f64; 2];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSiegelParams {
    r0: Vec<Vec<Pair>>,
    a: Vec<Vec<Vec<Pair>>>,
}

fn to_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_rows(rows: &[Vec<Pair>]) -> Result<CMatrix, SiegelError> {
    let n = rows.len();
    let cols = rows.first().map_or(0, |r| r.len());
    if n == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(SiegelError::NotSquare { rows: n, cols });
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

impl Serialize for SiegelParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawSiegelParams {
            r0: to_rows(self.r0.as_matrix()),
            a: self.blocks.iter().map(|b| to_rows(&b.z)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SiegelParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawSiegelParams::deserialize(d)?;
        let build = || -> Result<SiegelParams, SiegelError> {
            let r0 = HpdMatrix::new(from_rows(&raw.r0)?)?;
            let blocks = raw
                .a
                .iter()
                .map(|b| SiegelPoint::new(from_rows(b)?))
                .collect::<Result<_, _>>()?;
            SiegelParams::new(r0, blocks)
        };
        build().map_err(serde::de::Error::custom)
    }
}
