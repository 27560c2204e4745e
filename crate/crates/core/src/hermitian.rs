//! Complex Hermitian and Hermitian-positive-definite (HPD) matrix kernel.
//!
//! Everything in the geometry modules that needs a matrix function (square
//! root, inverse square root, logarithm, exponential) goes through the
//! spectral decomposition computed here, so that a single eigen solver and a
//! single phase convention are used across the crate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for Hermitian symmetry checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalue floor used when regularization is requested, relative to `λ_max`.
pub const EIGEN_FLOOR: f64 = 1e-14;

const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HermitianError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("eigen solver did not converge")]
    NoConvergence,
    #[error("matrix is singular")]
    Singular,
}

/// Whether non-positive eigenvalues may be floored before a matrix function
/// that needs them strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regularize {
    #[default]
    Off,
    /// Clamp eigenvalues to at least `EIGEN_FLOOR * λ_max`.
    Floor,
}

/// Spectral decomposition `H = V diag(values) V⁺` with descending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// Rebuilds `V diag(f(λ)) V⁺`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        hermitize(&(scaled * v.adjoint()))
    }
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(M + M⁺) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Relative asymmetry `‖M − M⁺‖_F / ‖M‖_F` (zero for the zero matrix).
pub fn asymmetry(m: &CMatrix) -> f64 {
    let scale = frobenius(m);
    if scale == 0.0 {
        return 0.0;
    }
    frobenius(&(m - m.adjoint())) / scale
}

fn check_square_finite(m: &CMatrix) -> Result<(), HermitianError> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(HermitianError::Empty);
    }
    if m.nrows() != m.ncols() {
        return Err(HermitianError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(HermitianError::NonFinite);
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order. Each eigenvector is scaled so
/// that its largest-magnitude component (first one on ties) is real positive.
pub fn hermitian_eig(h: &CMatrix) -> Result<Eigen, HermitianError> {
    check_square_finite(h)?;
    let asym = asymmetry(h);
    if asym > HERMITIAN_TOL {
        return Err(HermitianError::NotHermitian { asymmetry: asym });
    }
    let n = h.nrows();
    let sym = hermitize(h);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(HermitianError::NoConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        let mut best = -1.0;
        for i in 0..n {
            let m = col[i].norm();
            if m > best {
                best = m;
                pivot = i;
            }
        }
        let phase = if best > 0.0 {
            col[pivot].conj() / best
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    Ok(Eigen { values, vectors })
}

/// Hermitian positive-definite matrix, validated on construction.
///
/// The stored matrix is the Hermitized input `(H + H⁺)/2`; its spectral
/// decomposition is cached.
#[derive(Debug, Clone, PartialEq)]
pub struct HpdMatrix {
    matrix: CMatrix,
    eigen: Eigen,
}

impl HpdMatrix {
    pub fn new(m: CMatrix) -> Result<Self, HermitianError> {
        let eigen = hermitian_eig(&m)?;
        let min = *eigen.values.last().expect("non-empty");
        if !(min > 0.0) {
            return Err(HermitianError::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(Self {
            matrix: hermitize(&m),
            eigen,
        })
    }

    /// Builds an HPD matrix from a Hermitian one, flooring small or negative
    /// eigenvalues at `EIGEN_FLOOR * λ_max` when `reg` is `Floor`.
    pub fn with_regularization(m: CMatrix, reg: Regularize) -> Result<Self, HermitianError> {
        match reg {
            Regularize::Off => Self::new(m),
            Regularize::Floor => {
                let eigen = hermitian_eig(&m)?;
                let max = eigen.values[0];
                if !(max > 0.0) {
                    return Err(HermitianError::NotPositiveDefinite {
                        min_eigenvalue: max,
                    });
                }
                let floor = EIGEN_FLOOR * max;
                let values: Vec<f64> = eigen.values.iter().map(|&l| l.max(floor)).collect();
                let eigen = Eigen {
                    values,
                    vectors: eigen.vectors,
                };
                let matrix = eigen.map(|l| l);
                Ok(Self { matrix, eigen })
            }
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n]).expect("identity is HPD")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, HermitianError> {
        let n = diag.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eigen
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn log_det(&self) -> f64 {
        self.eigen.values.iter().map(|l| l.ln()).sum()
    }

    pub fn inverse(&self) -> CMatrix {
        self.eigen.map(|l| 1.0 / l)
    }

    /// Wraps a spectral function result, which is HPD whenever `f` maps
    /// positive reals to positive reals.
    fn spectral(&self, f: impl Fn(f64) -> f64) -> HpdMatrix {
        let eigen = Eigen {
            values: self.eigen.values.iter().map(|&l| f(l)).collect(),
            vectors: self.eigen.vectors.clone(),
        };
        let matrix = eigen.map(|l| l);
        // f is monotone on every use below, but the order can flip (1/√λ).
        let mut idx: Vec<usize> = (0..eigen.values.len()).collect();
        idx.sort_by(|&a, &b| eigen.values[b].total_cmp(&eigen.values[a]));
        let n = idx.len();
        let values = idx.iter().map(|&i| eigen.values[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eigen.vectors[(r, idx[c])]);
        HpdMatrix {
            matrix,
            eigen: Eigen { values, vectors },
        }
    }
}

pub fn hpd_sqrt(h: &HpdMatrix) -> HpdMatrix {
    h.spectral(f64::sqrt)
}

pub fn hpd_inv_sqrt(h: &HpdMatrix) -> HpdMatrix {
    h.spectral(|l| 1.0 / l.sqrt())
}

/// Principal logarithm; the result is Hermitian.
pub fn hpd_log(h: &HpdMatrix) -> CMatrix {
    h.eigen.map(f64::ln)
}

/// Matrix exponential of a Hermitian matrix (always HPD).
pub fn hermitian_exp(h: &CMatrix) -> Result<HpdMatrix, HermitianError> {
    let eigen = hermitian_eig(h)?;
    HpdMatrix::new(eigen.map(f64::exp))
}

/// Logarithm of a Hermitian matrix that is expected to be positive definite.
pub fn hermitian_log(h: &CMatrix, reg: Regularize) -> Result<CMatrix, HermitianError> {
    Ok(hpd_log(&HpdMatrix::with_regularization(h.clone(), reg)?))
}

/// Inverse square root of a Hermitian matrix that is expected to be
/// positive definite.
pub fn hermitian_inv_sqrt(h: &CMatrix, reg: Regularize) -> Result<HpdMatrix, HermitianError> {
    Ok(hpd_inv_sqrt(&HpdMatrix::with_regularization(h.clone(), reg)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub frobenius: f64,
    /// Largest singular value.
    pub spectral: f64,
}

pub fn matrix_norms(m: &CMatrix) -> Norms {
    let frobenius = frobenius(m);
    let spectral = if frobenius == 0.0 {
        0.0
    } else {
        singular_values(m)[0]
    };
    Norms {
        frobenius,
        spectral,
    }
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `σ_max / σ_min`; infinite when singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    let min = *s.last().expect("non-empty");
    if min == 0.0 {
        f64::INFINITY
    } else {
        s[0] / min
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Builds a matrix from row-major complex entries.
pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols, "entry count");
    CMatrix::from_row_slice(rows, cols, entries)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}
