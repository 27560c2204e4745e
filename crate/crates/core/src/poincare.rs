//! Geometry of the product space `ℝ × D^m` carrying reflection coordinates.
//!
//! Distances use the normalization `d(z1, z2) = log((1 + δ)/(1 − δ))` with
//! `δ = |(z2 − z1)/(1 − conj(z1) z2)|`, which is twice the textbook Poincaré
//! distance `artanh δ`. The Riemannian metric matching this distance is
//! `4 |dz|² / (1 − |z|²)²` on each disk factor; exp/log maps and the
//! barycenter flows use that same metric, so `d(x, exp_x(v)) = ‖v‖_x`.
//!
//! A point with `n` pulses weighs the `log p0` axis by `n` and disk factor
//! `k` by `n − k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{clamp_to_disk, EstimateError, ReflectionPoint};

/// Ratio between the distance used here and `artanh δ`.
pub const DISTANCE_SCALE: f64 = 2.0;

/// Factor on `|dz|²/(1 − |z|²)²` in the metric consistent with the distance.
pub const DISK_METRIC_SCALE: f64 = DISTANCE_SCALE * DISTANCE_SCALE;

/// Iterates this close to a data point are treated as sitting on it.
pub const ANCHOR_RADIUS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point has modulus {modulus}, outside the open unit disk")]
    OutsideDisk { modulus: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no points given")]
    Empty,
    #[error("weights must be non-negative and sum to 1")]
    InvalidWeights,
    #[error("gradient flow stopped after {iterations} iterations with gradient norm {gradient_norm:e}")]
    NoConvergence {
        best: Box<ProductPoint>,
        gradient_norm: f64,
        iterations: usize,
    },
    #[error(transparent)]
    Point(#[from] EstimateError),
}

/// Reflection coordinates together with the pulse count that sets the
/// metric weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProductPoint")]
pub struct ProductPoint {
    log_p0: f64,
    mu: Vec<Complex64>,
    n_pulses: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProductPoint {
    log_p0: f64,
    mu: Vec<Complex64>,
    n_pulses: usize,
}

impl TryFrom<RawProductPoint> for ProductPoint {
    type Error = GeometryError;
    fn try_from(raw: RawProductPoint) -> Result<Self, Self::Error> {
        ProductPoint::new(ReflectionPoint::new(raw.log_p0, raw.mu)?, raw.n_pulses)
    }
}

impl ProductPoint {
    pub fn new(point: ReflectionPoint, n_pulses: usize) -> Result<Self, GeometryError> {
        if n_pulses <= point.order() {
            return Err(GeometryError::DimensionMismatch(format!(
                "{} pulses cannot carry {} coefficients",
                n_pulses,
                point.order()
            )));
        }
        Ok(Self {
            log_p0: point.log_p0(),
            mu: point.mu().to_vec(),
            n_pulses,
        })
    }

    pub fn log_p0(&self) -> f64 {
        self.log_p0
    }

    pub fn mu(&self) -> &[Complex64] {
        &self.mu
    }

    pub fn n_pulses(&self) -> usize {
        self.n_pulses
    }

    pub fn order(&self) -> usize {
        self.mu.len()
    }

    pub fn reflection(&self) -> ReflectionPoint {
        ReflectionPoint::new(self.log_p0, self.mu.clone()).expect("validated")
    }

    fn weight(&self, k: usize) -> f64 {
        (self.n_pulses - k) as f64
    }

    pub(crate) fn same_shape(&self, other: &ProductPoint) -> Result<(), GeometryError> {
        if self.n_pulses != other.n_pulses || self.mu.len() != other.mu.len() {
            return Err(GeometryError::DimensionMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.n_pulses,
                self.mu.len(),
                other.n_pulses,
                other.mu.len()
            )));
        }
        Ok(())
    }
}

/// Tangent vector at a [`ProductPoint`], in coordinates `(d log p0, dμ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub d_log_p0: f64,
    pub d_mu: Vec<Complex64>,
}

impl TangentVector {
    pub fn zero(order: usize) -> Self {
        Self {
            d_log_p0: 0.0,
            d_mu: vec![Complex64::new(0.0, 0.0); order],
        }
    }
}

fn check_disk(z: Complex64) -> Result<(), GeometryError> {
    let modulus = z.norm();
    if !(modulus < 1.0) {
        return Err(GeometryError::OutsideDisk { modulus });
    }
    Ok(())
}

/// `φ_a(z) = (z − a)/(1 − conj(a) z)`, the disk automorphism sending `a` to 0.
pub fn mobius(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (1.0 - a.conj() * z)
}

/// `φ_a⁻¹(u) = (u + a)/(1 + conj(a) u)`.
pub fn mobius_inverse(a: Complex64, u: Complex64) -> Complex64 {
    (u + a) / (1.0 + a.conj() * u)
}

/// General disk automorphism `e^{iθ} φ_a(z)`.
pub fn disk_automorphism(theta: f64, a: Complex64, z: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, theta) * mobius(a, z)
}

fn disk_distance_unchecked(z1: Complex64, z2: Complex64) -> f64 {
    let num = (z2 - z1).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (1.0 - z1.conj() * z2).norm();
    let delta = num / den;
    // 1 − δ² = (1 − |z1|²)(1 − |z2|²)/|1 − conj(z1) z2|², exact near the boundary
    let gap = (1.0 - z1.norm_sqr()) * (1.0 - z2.norm_sqr()) / (den * den);
    2.0 * delta.ln_1p() - gap.ln()
}

/// `log((1 + δ)/(1 − δ))`, `δ = |(z2 − z1)/(1 − conj(z1) z2)|`.
pub fn poincare_distance(z1: Complex64, z2: Complex64) -> Result<f64, GeometryError> {
    check_disk(z1)?;
    check_disk(z2)?;
    Ok(disk_distance_unchecked(z1, z2))
}

/// `ds² = n (d log p0)² + Σ_k (n − k) 4|dμ_k|²/(1 − |μ_k|²)²`.
pub fn metric_form(point: &ProductPoint, v: &TangentVector) -> Result<f64, GeometryError> {
    if v.d_mu.len() != point.order() {
        return Err(GeometryError::DimensionMismatch(format!(
            "tangent has {} disk components, point has {}",
            v.d_mu.len(),
            point.order()
        )));
    }
    let n = point.n_pulses as f64;
    let mut s = n * v.d_log_p0 * v.d_log_p0;
    for (i, (mu, dmu)) in point.mu.iter().zip(&v.d_mu).enumerate() {
        let gap = 1.0 - mu.norm_sqr();
        s += point.weight(i + 1) * DISK_METRIC_SCALE * dmu.norm_sqr() / (gap * gap);
    }
    Ok(s)
}

/// Weighted product distance
/// `d² = n Δ(log p0)² + Σ_k (n − k) d_D(μ_{x,k}, μ_{y,k})²`.
pub fn product_distance(x: &ProductPoint, y: &ProductPoint) -> Result<f64, GeometryError> {
    x.same_shape(y)?;
    Ok(product_distance_sq(x, y).sqrt())
}

pub(crate) fn product_distance_sq(x: &ProductPoint, y: &ProductPoint) -> f64 {
    let dl = y.log_p0 - x.log_p0;
    let mut s = x.n_pulses as f64 * dl * dl;
    for (i, (a, b)) in x.mu.iter().zip(&y.mu).enumerate() {
        let d = disk_distance_unchecked(*a, *b);
        s += x.weight(i + 1) * d * d;
    }
    s
}

fn disk_exp_unchecked(base: Complex64, v: Complex64) -> Complex64 {
    let w = v / (1.0 - base.norm_sqr());
    let r = w.norm();
    if r == 0.0 {
        return base;
    }
    let u = w * (r.tanh() / r);
    mobius_inverse(base, u)
}

fn disk_log_unchecked(base: Complex64, target: Complex64) -> Complex64 {
    let u = mobius(base, target);
    let r = u.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // artanh |u| = d/2, taken from the boundary-stable distance formula
    let half = 0.5 * disk_distance_unchecked(base, target);
    u * (half / r) * (1.0 - base.norm_sqr())
}

/// Exponential map of a disk factor: geodesic from `base` with initial
/// velocity `v` (Euclidean coordinates), evaluated at time 1.
pub fn exp_map(base: Complex64, v: Complex64) -> Result<Complex64, GeometryError> {
    check_disk(base)?;
    let z = disk_exp_unchecked(base, v);
    Ok(clamp_inside(z))
}

/// Inverse of [`exp_map`].
pub fn log_map(base: Complex64, target: Complex64) -> Result<Complex64, GeometryError> {
    check_disk(base)?;
    check_disk(target)?;
    Ok(disk_log_unchecked(base, target))
}

/// Norm of a disk tangent vector at `base` under the distance-consistent
/// metric.
pub fn disk_tangent_norm(base: Complex64, v: Complex64) -> f64 {
    DISTANCE_SCALE * v.norm() / (1.0 - base.norm_sqr())
}

/// Objective values equal up to rounding: the gradient norm then decides.
fn on_plateau(candidate: f64, current: f64) -> bool {
    candidate <= current + 16.0 * f64::EPSILON * current.abs()
}

// exp can round onto the circle for very long tangents
fn clamp_inside(z: Complex64) -> Complex64 {
    clamp_to_disk(z)
}

/// Stopping rule for the barycenter gradient flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Threshold on the Riemannian gradient norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 1000,
        }
    }
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn check_inputs(points: &[ProductPoint], weights: &[f64]) -> Result<(), GeometryError> {
    let first = points.first().ok_or(GeometryError::Empty)?;
    if weights.len() != points.len() {
        return Err(GeometryError::DimensionMismatch(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    for p in &points[1..] {
        first.same_shape(p)?;
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(GeometryError::InvalidWeights);
    }
    Ok(())
}

struct DiskFlow {
    point: Complex64,
    gradient_norm: f64,
    converged: bool,
}

/// Largest Hessian eigenvalue of `½ d(·, z)²` at distance `d` on a
/// curvature −1 surface: `d coth d`.
fn transverse_hessian(d: f64) -> f64 {
    if d < 1e-4 {
        1.0 + d * d / 3.0
    } else {
        d / d.tanh()
    }
}

/// Weighted Karcher mean of one disk factor by
/// `x ← exp_x(t Σ w_i log_x(z_i))`, `t` starting at `1/Σ w_i d_i coth d_i`
/// and halved until the objective decreases.
fn disk_karcher(zs: &[Complex64], w: &[f64], tol: f64, max_iter: usize) -> DiskFlow {
    let objective = |x: Complex64| -> f64 {
        zs.iter()
            .zip(w)
            .map(|(z, wi)| {
                let d = disk_distance_unchecked(x, *z);
                wi * d * d
            })
            .sum()
    };
    let gradient = |x: Complex64| -> Complex64 {
        zs.iter()
            .zip(w)
            .map(|(z, wi)| disk_log_unchecked(x, *z) * *wi)
            .sum()
    };
    let mut x = clamp_inside(zs.iter().zip(w).map(|(z, wi)| z * *wi).sum());
    let mut fx = objective(x);
    let mut g = gradient(x);
    let mut gradient_norm = disk_tangent_norm(x, g);
    for _ in 0..=max_iter {
        if gradient_norm < tol {
            return DiskFlow {
                point: x,
                gradient_norm,
                converged: true,
            };
        }
        let curvature: f64 = zs
            .iter()
            .zip(w)
            .map(|(z, wi)| wi * transverse_hessian(disk_distance_unchecked(x, *z)))
            .sum();
        let mut t = 1.0 / curvature;
        let mut moved = false;
        while t > 1e-12 {
            let cand = clamp_inside(disk_exp_unchecked(x, g * t));
            let fc = objective(cand);
            let gc = gradient(cand);
            let gc_norm = disk_tangent_norm(cand, gc);
            if fc < fx || (on_plateau(fc, fx) && gc_norm < gradient_norm) {
                (x, fx, g, gradient_norm) = (cand, fc, gc, gc_norm);
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    DiskFlow {
        point: x,
        gradient_norm,
        converged: false,
    }
}

/// Weighted Fréchet mean (Karcher barycenter) of product points.
///
/// The `log p0` axis is Euclidean, so its coordinate is the weighted average.
/// Each disk factor is an independent gradient flow; the returned gradient
/// norm is the product-metric norm of `Σ w_i log_x(p_i)`.
pub fn karcher_mean(
    points: &[ProductPoint],
    weights: &[f64],
    opts: &FlowOptions,
) -> Result<ProductPoint, GeometryError> {
    check_inputs(points, weights)?;
    let first = &points[0];
    let order = first.order();
    let log_p0: f64 = points.iter().zip(weights).map(|(p, w)| w * p.log_p0).sum();
    if points.len() == 1 {
        return Ok(first.clone());
    }

    let total_weight: f64 = (1..=order).map(|k| first.weight(k)).sum();
    let component_tol = if total_weight > 0.0 {
        opts.tol / total_weight.sqrt()
    } else {
        opts.tol
    };
    let mut mu = Vec::with_capacity(order);
    let mut grad_sq = 0.0;
    let mut converged = true;
    let mut zs = vec![Complex64::new(0.0, 0.0); points.len()];
    for k in 0..order {
        for (z, p) in zs.iter_mut().zip(points) {
            *z = p.mu[k];
        }
        let flow = disk_karcher(&zs, weights, component_tol, opts.max_iter);
        converged &= flow.converged;
        grad_sq += first.weight(k + 1) * flow.gradient_norm * flow.gradient_norm;
        mu.push(flow.point);
    }
    let mean = ProductPoint {
        log_p0,
        mu,
        n_pulses: first.n_pulses,
    };
    if converged {
        Ok(mean)
    } else {
        Err(GeometryError::NoConvergence {
            best: Box::new(mean),
            gradient_norm: grad_sq.sqrt(),
            iterations: opts.max_iter,
        })
    }
}

fn product_log(x: &ProductPoint, y: &ProductPoint) -> TangentVector {
    TangentVector {
        d_log_p0: y.log_p0 - x.log_p0,
        d_mu: x
            .mu
            .iter()
            .zip(&y.mu)
            .map(|(a, b)| disk_log_unchecked(*a, *b))
            .collect(),
    }
}

fn product_exp(x: &ProductPoint, v: &TangentVector, t: f64) -> ProductPoint {
    ProductPoint {
        log_p0: x.log_p0 + t * v.d_log_p0,
        mu: x
            .mu
            .iter()
            .zip(&v.d_mu)
            .map(|(a, dv)| clamp_inside(disk_exp_unchecked(*a, dv * t)))
            .collect(),
        n_pulses: x.n_pulses,
    }
}

fn tangent_norm(x: &ProductPoint, v: &TangentVector) -> f64 {
    metric_form(x, v).expect("shapes match").sqrt()
}

struct WeiszfeldState {
    pull: TangentVector,
    pull_norm: f64,
    inv_dist: f64,
    anchor_weight: f64,
    gradient_norm: f64,
}

/// Weighted Fréchet median, the minimizer of `Σ w_i d(x, p_i)`.
///
/// Weiszfeld-type flow `x ← exp_x(t Σ w_i log_x(p_i)/d_i)` with
/// `t = 1/Σ(w_i/d_i)`, halved while the objective does not decrease. When
/// the iterate sits on data points, their weight is compared with the pull
/// of the remaining points: if the pull is weaker the iterate is the median.
pub fn frechet_median(
    points: &[ProductPoint],
    weights: &[f64],
    opts: &FlowOptions,
) -> Result<ProductPoint, GeometryError> {
    check_inputs(points, weights)?;
    if points.len() == 1 {
        return Ok(points[0].clone());
    }
    let objective = |x: &ProductPoint| -> f64 {
        points
            .iter()
            .zip(weights)
            .map(|(p, w)| w * product_distance_sq(x, p).sqrt())
            .sum()
    };
    let mut x = karcher_mean(points, weights, opts).unwrap_or_else(|e| match e {
        GeometryError::NoConvergence { best, .. } => *best,
        _ => points[0].clone(),
    });
    let state = |x: &ProductPoint| -> WeiszfeldState {
        let mut pull = TangentVector::zero(x.order());
        let mut inv_dist = 0.0;
        let mut anchor_weight = 0.0;
        for (p, w) in points.iter().zip(weights) {
            let d = product_distance_sq(x, p).sqrt();
            if d < ANCHOR_RADIUS {
                anchor_weight += w;
                continue;
            }
            let log = product_log(x, p);
            pull.d_log_p0 += w * log.d_log_p0 / d;
            for (acc, v) in pull.d_mu.iter_mut().zip(&log.d_mu) {
                *acc += v * (w / d);
            }
            inv_dist += w / d;
        }
        let pull_norm = tangent_norm(x, &pull);
        WeiszfeldState {
            gradient_norm: (pull_norm - anchor_weight).max(0.0),
            pull,
            pull_norm,
            inv_dist,
            anchor_weight,
        }
    };
    let mut fx = objective(&x);
    let mut sx = state(&x);
    for _ in 0..opts.max_iter {
        if sx.gradient_norm < opts.tol || sx.inv_dist == 0.0 {
            return Ok(x);
        }
        let mut t = if sx.anchor_weight > 0.0 {
            (1.0 - sx.anchor_weight / sx.pull_norm) / sx.inv_dist
        } else {
            1.0 / sx.inv_dist
        };
        let mut moved = false;
        while t > 1e-14 {
            let cand = product_exp(&x, &sx.pull, t);
            let fc = objective(&cand);
            let sc = state(&cand);
            if fc < fx || (on_plateau(fc, fx) && sc.gradient_norm < sx.gradient_norm) {
                (x, fx, sx) = (cand, fc, sc);
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let gradient_norm = sx.gradient_norm;
    Err(GeometryError::NoConvergence {
        best: Box::new(x),
        gradient_norm,
        iterations: opts.max_iter,
    })
}

/// Unwraps a barycenter result, keeping the best iterate of a flow that hit
/// its iteration cap.
pub fn best_effort(result: Result<ProductPoint, GeometryError>) -> Result<(ProductPoint, bool), GeometryError> {
    match result {
        Ok(p) => Ok((p, true)),
        Err(GeometryError::NoConvergence { best, .. }) => Ok((*best, false)),
        Err(e) => Err(e),
    }
}
