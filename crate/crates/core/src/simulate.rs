//! Labeled synthetic bursts: per-cell complex Gaussian AR series, optionally
//! scaled by a Gamma texture (compound-Gaussian / K-distributed clutter).
//!
//! Every cell draws from its own ChaCha stream (stream id = cell index in the
//! class-by-class layout), so the output does not depend on how cells are
//! scheduled across threads.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{levinson, EstimateError, ReflectionPoint, DISK_CLAMP};
use crate::exec::{mix_seed, Exec};

const SERIES_DOMAIN: u64 = 0x5E41;
const TEXTURE_DOMAIN: u64 = 0x7E47;
const SHUFFLE_DOMAIN: u64 = 0x5AFF;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("AR order {order} needs more than {n_pulses} pulses")]
    InvalidOrder { order: usize, n_pulses: usize },
    #[error("reflection coefficient {index} has modulus {modulus} (must be ≤ 1 − 1e-9)")]
    InvalidCoefficient { index: usize, modulus: f64 },
    #[error("texture shape must be positive, got {0}")]
    InvalidShape(f64),
    #[error("power must be positive, got {0}")]
    InvalidPower(f64),
    #[error("scenario needs at least one class")]
    NoClasses,
    #[error("scenario needs at least 2 pulses, got {0}")]
    TooFewPulses(usize),
    #[error("burst sample count does not match {n_pulses}x{n_cells}")]
    Shape { n_pulses: usize, n_cells: usize },
    #[error("burst has a non-finite sample")]
    NonFinite,
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

/// Complex samples, `n_pulses × n_cells`; each range cell is a column.
#[derive(Debug, Clone, PartialEq)]
pub struct Burst {
    n_pulses: usize,
    n_cells: usize,
    // cell-major: cell j occupies [j*n_pulses, (j+1)*n_pulses)
    samples: Vec<Complex64>,
}

impl Burst {
    /// Builds a burst from per-cell time series.
    pub fn from_cells(n_pulses: usize, cells: Vec<Vec<Complex64>>) -> Result<Self, SimulateError> {
        let n_cells = cells.len();
        if cells.iter().any(|c| c.len() != n_pulses) {
            return Err(SimulateError::Shape { n_pulses, n_cells });
        }
        let samples: Vec<Complex64> = cells.into_iter().flatten().collect();
        Self::from_cell_major(n_pulses, n_cells, samples)
    }

    pub fn from_cell_major(
        n_pulses: usize,
        n_cells: usize,
        samples: Vec<Complex64>,
    ) -> Result<Self, SimulateError> {
        if samples.len() != n_pulses * n_cells {
            return Err(SimulateError::Shape { n_pulses, n_cells });
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SimulateError::NonFinite);
        }
        Ok(Self {
            n_pulses,
            n_cells,
            samples,
        })
    }

    pub fn n_pulses(&self) -> usize {
        self.n_pulses
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Time series of range cell `j`.
    pub fn cell(&self, j: usize) -> &[Complex64] {
        &self.samples[j * self.n_pulses..(j + 1) * self.n_pulses]
    }

    /// Sample `U[pulse][cell]`.
    pub fn get(&self, pulse: usize, cell: usize) -> Complex64 {
        self.samples[cell * self.n_pulses + pulse]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[Complex64]> {
        self.samples.chunks(self.n_pulses.max(1)).take(self.n_cells)
    }
}

/// Simulation parameters of one clutter class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    pub p0: f64,
    /// Reflection coefficients as `[re, im]` pairs.
    pub mu: Vec<Complex64>,
    /// Gamma shape `ν` of the texture; `None` for a pure Gaussian class.
    #[serde(default)]
    pub texture_shape: Option<f64>,
    pub n_cells: usize,
}

impl ClassSpec {
    fn validate(&self, n_pulses: usize) -> Result<(), SimulateError> {
        validate_ar(self.p0, &self.mu, n_pulses)?;
        if let Some(nu) = self.texture_shape {
            check_shape(nu)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_pulses: usize,
    pub classes: Vec<ClassSpec>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimulateError> {
        if self.classes.is_empty() {
            return Err(SimulateError::NoClasses);
        }
        if self.n_pulses < 2 {
            return Err(SimulateError::TooFewPulses(self.n_pulses));
        }
        self.classes
            .iter()
            .try_for_each(|c| c.validate(self.n_pulses))
    }

    pub fn n_cells(&self) -> usize {
        self.classes.iter().map(|c| c.n_cells).sum()
    }
}

fn validate_ar(p0: f64, mu: &[Complex64], n_pulses: usize) -> Result<(), SimulateError> {
    if !(p0 > 0.0) || !p0.is_finite() {
        return Err(SimulateError::InvalidPower(p0));
    }
    if mu.len() >= n_pulses {
        return Err(SimulateError::InvalidOrder {
            order: mu.len(),
            n_pulses,
        });
    }
    for (index, m) in mu.iter().enumerate() {
        let modulus = m.norm();
        if !(modulus <= DISK_CLAMP) {
            return Err(SimulateError::InvalidCoefficient { index, modulus });
        }
    }
    Ok(())
}

fn check_shape(nu: f64) -> Result<(), SimulateError> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(SimulateError::InvalidShape(nu));
    }
    Ok(())
}

/// Independent generator for stream `stream` of a seed domain.
pub fn cell_rng(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, domain));
    rng.set_stream(stream);
    rng
}

/// Circular standard complex Gaussian, `E|w|² = 1`.
fn circular_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Warm-up samples discarded before the kept window.
pub fn burn_in(order: usize) -> usize {
    100 + 10 * order
}

/// One stationary draw of the AR process with power `p0` and reflection
/// coefficients `mu`: `z_t = −Σ a_k z_{t−k} + σ w_t`.
pub fn ar_gaussian_series(
    p0: f64,
    mu: &[Complex64],
    n_pulses: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>, SimulateError> {
    validate_ar(p0, mu, n_pulses)?;
    let model = levinson(&ReflectionPoint::from_power(p0, mu.to_vec())?);
    let sigma = model.sigma2.sqrt();
    let order = model.a.len();
    let total = burn_in(order) + n_pulses;
    let mut z: Vec<Complex64> = Vec::with_capacity(total);
    for _ in 0..order {
        z.push(circular_normal(rng) * p0.sqrt());
    }
    while z.len() < total {
        let t = z.len();
        let mut next = circular_normal(rng) * sigma;
        for (k, a) in model.a.iter().enumerate() {
            next -= a * z[t - 1 - k];
        }
        z.push(next);
    }
    Ok(z.split_off(total - n_pulses))
}

pub fn gamma_texture(shape: f64, rng: &mut impl Rng) -> Result<f64, SimulateError> {
    check_shape(shape)?;
    let g = Gamma::new(shape, 1.0 / shape).map_err(|_| SimulateError::InvalidShape(shape))?;
    Ok(g.sample(rng))
}

/// Unit-mean Gamma textures `τ_j ~ Γ(ν, 1/ν)`, one per cell.
pub fn sirv_textures(
    n_cells: usize,
    shape: f64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<f64>, SimulateError> {
    check_shape(shape)?;
    exec.map_range(n_cells, |j| {
        gamma_texture(shape, &mut cell_rng(seed, TEXTURE_DOMAIN, j as u64))
    })
    .into_iter()
    .collect()
}

/// Multiplies each range cell by `√τ_j`, the texture being constant over the
/// burst.
pub fn apply_sirv_texture(
    burst: &Burst,
    shape: f64,
    seed: u64,
    exec: Exec,
) -> Result<Burst, SimulateError> {
    let tau = sirv_textures(burst.n_cells, shape, seed, exec)?;
    Ok(scale_cells(burst, &tau))
}

fn scale_cells(burst: &Burst, tau: &[f64]) -> Burst {
    let mut samples = burst.samples.clone();
    for (cell, t) in samples.chunks_mut(burst.n_pulses).zip(tau) {
        let s = t.sqrt();
        for z in cell {
            *z *= s;
        }
    }
    Burst { samples, ..*burst }
}

/// Generates every class, lays the cells out class by class, then shuffles
/// cells (and their labels) with a seeded permutation.
pub fn simulate_scenario(
    config: &ScenarioConfig,
    exec: Exec,
) -> Result<(Burst, Vec<usize>), SimulateError> {
    config.validate()?;
    let mut layout = Vec::with_capacity(config.n_cells());
    for (label, class) in config.classes.iter().enumerate() {
        layout.extend(std::iter::repeat_n(label, class.n_cells));
    }
    let cells: Vec<Vec<Complex64>> = exec
        .map_range(layout.len(), |j| {
            let class = &config.classes[layout[j]];
            let mut rng = cell_rng(config.seed, SERIES_DOMAIN, j as u64);
            let mut series = ar_gaussian_series(class.p0, &class.mu, config.n_pulses, &mut rng)?;
            if let Some(nu) = class.texture_shape {
                let tau = gamma_texture(nu, &mut cell_rng(config.seed, TEXTURE_DOMAIN, j as u64))?;
                let s = tau.sqrt();
                series.iter_mut().for_each(|z| *z *= s);
            }
            Ok(series)
        })
        .into_iter()
        .collect::<Result<_, SimulateError>>()?;

    let mut order: Vec<usize> = (0..layout.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(config.seed, SHUFFLE_DOMAIN)));
    let labels = order.iter().map(|&j| layout[j]).collect();
    let mut shuffled = Vec::with_capacity(cells.len());
    let mut slots: Vec<Option<Vec<Complex64>>> = cells.into_iter().map(Some).collect();
    for &j in &order {
        shuffled.push(slots[j].take().expect("permutation"));
    }
    Ok((Burst::from_cells(config.n_pulses, shuffled)?, labels))
}
