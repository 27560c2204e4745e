//! k-means on the product manifold: nearest-centroid assignment under the
//! product distance, Karcher-mean centroid updates.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{mix_seed, Exec};
use crate::poincare::{
    best_effort, karcher_mean, product_distance_sq, uniform_weights, FlowOptions, GeometryError,
    ProductPoint,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("k = {k} exceeds the {distinct} distinct points")]
    TooFewPoints { k: usize, distinct: usize },
    #[error("invalid option: {0}")]
    InvalidOptions(String),
    #[error("{labels} labels for {points} points")]
    LengthMismatch { labels: usize, points: usize },
    #[error("label {label} has no centroid ({k} centroids)")]
    LabelOutOfRange { label: usize, k: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// `k` distinct data points drawn uniformly.
    #[default]
    Random,
    /// Distance-squared weighted seeding.
    #[serde(rename = "pp")]
    PlusPlus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOptions {
    pub k: usize,
    pub max_iter: usize,
    /// Stop when the relative inertia improvement falls below this.
    pub tol: f64,
    pub init: Init,
    pub restarts: usize,
    pub seed: u64,
    pub flow: FlowOptions,
}

impl KMeansOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iter: 100,
            tol: 1e-6,
            init: Init::Random,
            restarts: 1,
            seed,
            flow: FlowOptions::default(),
        }
    }

    fn validate(&self) -> Result<(), ClusterError> {
        if self.k == 0 {
            return Err(ClusterError::ZeroClusters);
        }
        if self.max_iter == 0 {
            return Err(ClusterError::InvalidOptions("max_iter must be ≥ 1".into()));
        }
        if self.restarts == 0 {
            return Err(ClusterError::InvalidOptions("restarts must be ≥ 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(ClusterError::InvalidOptions(format!("tol = {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<ProductPoint>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub n_iter: usize,
    pub converged: bool,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
    /// Centroid updates whose Karcher flow hit its iteration cap.
    pub karcher_failures: usize,
}

/// `Σ_i d(p_i, c_{label_i})²`.
pub fn inertia(
    points: &[ProductPoint],
    labels: &[usize],
    centroids: &[ProductPoint],
) -> Result<f64, ClusterError> {
    if labels.len() != points.len() {
        return Err(ClusterError::LengthMismatch {
            labels: labels.len(),
            points: points.len(),
        });
    }
    let mut total = 0.0;
    for (p, &l) in points.iter().zip(labels) {
        let c = centroids.get(l).ok_or(ClusterError::LabelOutOfRange {
            label: l,
            k: centroids.len(),
        })?;
        p.same_shape(c)?;
        total += product_distance_sq(p, c);
    }
    Ok(total)
}

fn point_key(p: &ProductPoint) -> Vec<u64> {
    std::iter::once(p.log_p0().to_bits())
        .chain(p.mu().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]))
        .collect()
}

fn distinct_count(points: &[ProductPoint]) -> usize {
    points.iter().map(point_key).collect::<HashSet<_>>().len()
}

fn initial_centroids(points: &[ProductPoint], k: usize, init: Init, rng: &mut ChaCha8Rng) -> Vec<ProductPoint> {
    match init {
        Init::Random => {
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.shuffle(rng);
            let mut seen = HashSet::new();
            order
                .into_iter()
                .filter(|&i| seen.insert(point_key(&points[i])))
                .take(k)
                .map(|i| points[i].clone())
                .collect()
        }
        Init::PlusPlus => {
            let mut chosen = vec![points[rng.random_range(0..points.len())].clone()];
            let mut nearest: Vec<f64> = points.iter().map(|p| product_distance_sq(p, &chosen[0])).collect();
            while chosen.len() < k {
                let total: f64 = nearest.iter().sum();
                let mut target = rng.random::<f64>() * total;
                let mut pick = None;
                for (i, &d) in nearest.iter().enumerate() {
                    if d > 0.0 {
                        pick = Some(i);
                        if target < d {
                            break;
                        }
                        target -= d;
                    }
                }
                let c = points[pick.expect("k ≤ distinct points")].clone();
                for (n, p) in nearest.iter_mut().zip(points) {
                    *n = n.min(product_distance_sq(p, &c));
                }
                chosen.push(c);
            }
            chosen
        }
    }
}

/// Nearest centroid of each point, ties going to the lowest index, with the
/// squared distance to it.
fn assign(points: &[ProductPoint], centroids: &[ProductPoint], exec: Exec) -> Vec<(usize, f64)> {
    exec.map(points, |p| {
        let mut best = (0, f64::INFINITY);
        for (j, c) in centroids.iter().enumerate() {
            let d = product_distance_sq(p, c);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    })
}

/// Moves every empty centroid onto the point farthest from its centroid
/// (taken from a cluster with at least two members).
fn reseed_empty(points: &[ProductPoint], centroids: &mut [ProductPoint], assigned: &mut [(usize, f64)]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &(l, _) in assigned.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, &(l, d)) in assigned.iter().enumerate() {
            if sizes[l] > 1 && far.is_none_or(|(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        let (i, _) = far.expect("k ≤ distinct points keeps a shared cluster");
        centroids[empty] = points[i].clone();
        assigned[i] = (empty, 0.0);
    }
}

fn kmeans_single(
    points: &[ProductPoint],
    opts: &KMeansOptions,
    seed: u64,
    exec: Exec,
) -> Result<ClusterModel, ClusterError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = initial_centroids(points, opts.k, opts.init, &mut rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut trace: Vec<f64> = Vec::new();
    let mut karcher_failures = 0;
    let mut converged = false;
    let mut n_iter = 0;

    while n_iter < opts.max_iter {
        n_iter += 1;
        let mut assigned = assign(points, &centroids, exec);
        reseed_empty(points, &mut centroids, &mut assigned);
        let new_labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        let value: f64 = assigned.iter().map(|a| a.1).sum();
        let unchanged = new_labels == labels;
        let small_gain = trace
            .last()
            .is_some_and(|&prev| prev - value <= opts.tol * prev.abs());
        labels = new_labels;
        trace.push(value);
        if unchanged || small_gain {
            converged = true;
            break;
        }
        let updates = exec.map_range(opts.k, |j| {
            let members: Vec<ProductPoint> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == j)
                .map(|(p, _)| p.clone())
                .collect();
            best_effort(karcher_mean(&members, &uniform_weights(members.len()), &opts.flow))
        });
        for (c, u) in centroids.iter_mut().zip(updates) {
            let (point, ok) = u?;
            if !ok {
                karcher_failures += 1;
            }
            *c = point;
        }
    }
    if !converged {
        // centroids moved after the last assignment: report a consistent state
        let assigned = assign(points, &centroids, exec);
        let mut sizes = vec![0usize; opts.k];
        assigned.iter().for_each(|a| sizes[a.0] += 1);
        if sizes.iter().all(|&s| s > 0) {
            labels = assigned.iter().map(|a| a.0).collect();
            trace.push(assigned.iter().map(|a| a.1).sum());
        }
    }
    let inertia = inertia(points, &labels, &centroids)?;
    Ok(ClusterModel {
        k: opts.k,
        centroids,
        labels,
        inertia,
        n_iter,
        converged,
        inertia_trace: trace,
        karcher_failures,
    })
}

/// Lowest-inertia model over `opts.restarts` seeded runs; restart `r` uses
/// seed `mix_seed(opts.seed, r)`.
pub fn kmeans(points: &[ProductPoint], opts: &KMeansOptions, exec: Exec) -> Result<ClusterModel, ClusterError> {
    opts.validate()?;
    let first = points.first().ok_or(ClusterError::TooFewPoints {
        k: opts.k,
        distinct: 0,
    })?;
    for p in &points[1..] {
        first.same_shape(p)?;
    }
    let distinct = distinct_count(points);
    if opts.k > distinct {
        return Err(ClusterError::TooFewPoints { k: opts.k, distinct });
    }
    let mut best: Option<ClusterModel> = None;
    for r in 0..opts.restarts {
        let model = kmeans_single(points, opts, mix_seed(opts.seed, r as u64), exec)?;
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.expect("restarts ≥ 1"))
}
