#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use infogeo::cluster::{kmeans, Init, KMeansOptions};
use infogeo::estimate::{
    covariance_from_reflection, entropy_matrix, entropy_scalar, estimate_cells,
    reflection_from_covariance, ReflectionPoint,
};
use infogeo::evaluate::best_permutation_score;
use infogeo::exec::Exec;
use infogeo::hermitian::{hermitize, hpd_sqrt, identity, CMatrix, HpdMatrix};
use infogeo::poincare::{
    disk_automorphism, frechet_median, karcher_mean, metric_form, mobius, poincare_distance,
    product_distance, uniform_weights, FlowOptions, ProductPoint, TangentVector,
};
use infogeo::siegel::{
    block_toeplitz_distance, hpd_affine_distance, matrix_metric_form, siegel_distance, siegel_phi,
    SiegelNorm, SiegelParams, SiegelPoint,
};
use infogeo::simulate::{simulate_scenario, ClassSpec, ScenarioConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, name, pass, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    c(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

fn disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>())
}

fn reflection(rng: &mut ChaCha8Rng, order: usize, radius: f64) -> ReflectionPoint {
    let mu = (0..order).map(|_| disk(rng, radius)).collect();
    ReflectionPoint::new(rng.random_range(-2.0..2.0), mu).unwrap()
}

fn product_point(rng: &mut ChaCha8Rng, order: usize, n_pulses: usize, radius: f64) -> ProductPoint {
    ProductPoint::new(reflection(rng, order, radius), n_pulses).unwrap()
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, p: usize) -> CMatrix {
    CMatrix::from_fn(p, p, |_, _| complex_normal(rng))
}

fn spectral(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Uniformly oriented matrix with spectral norm uniform in `[0, radius)`.
fn siegel_point(rng: &mut ChaCha8Rng, p: usize, radius: f64) -> SiegelPoint {
    let g = gaussian_matrix(rng, p);
    let s = spectral(&g);
    SiegelPoint::new(g * Complex64::from(radius * rng.random::<f64>() / s)).unwrap()
}

fn hpd(rng: &mut ChaCha8Rng, p: usize) -> HpdMatrix {
    let g = gaussian_matrix(rng, p);
    HpdMatrix::new(&g * g.adjoint() + identity(p) * Complex64::from(0.2)).unwrap()
}

fn hermitian_direction(rng: &mut ChaCha8Rng, p: usize) -> CMatrix {
    hermitize(&gaussian_matrix(rng, p))
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn round_trip_error(rng: &mut ChaCha8Rng, count: usize, radius: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let order = rng.random_range(1..=15);
        let p = reflection(rng, order, radius);
        let cov = covariance_from_reflection(&p, order + 1).unwrap();
        let q = reflection_from_covariance(&cov).unwrap();
        worst = worst.max((p.log_p0() - q.log_p0()).abs());
        for (a, b) in p.mu().iter().zip(q.mu()) {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let worst = round_trip_error(&mut ChaCha8Rng::seed_from_u64(1), 1000, 0.5);
    let elapsed = start.elapsed();
    let near_boundary = round_trip_error(&mut ChaCha8Rng::seed_from_u64(1), 1000, 0.8);
    outcome(
        "1",
        "reflection <-> covariance round trip",
        worst < 1e-12 && elapsed < Duration::from_secs(5),
        format!(
            "max error {worst:.2e} over 1000 points, |mu| < 0.5, orders 1-15, {:.2}s (at |mu| < 0.8: {near_boundary:.2e})",
            secs(elapsed)
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut track = |e: f64| worst = worst.max(e);
    for _ in 0..500 {
        let z = disk(&mut rng, 0.95);
        let w = disk(&mut rng, 0.95);
        let sz = SiegelPoint::new(CMatrix::from_element(1, 1, z)).unwrap();
        let sw = SiegelPoint::new(CMatrix::from_element(1, 1, w)).unwrap();
        track((siegel_phi(&sz, &sw).unwrap()[(0, 0)] - mobius(z, w)).norm());
        let d = poincare_distance(z, w).unwrap();
        for norm in [SiegelNorm::Spectral, SiegelNorm::Full] {
            track(rel_err(siegel_distance(&sz, &sw, norm).unwrap(), d));
        }

        let p1: f64 = rng.random_range(0.1..10.0);
        let p2: f64 = rng.random_range(0.1..10.0);
        let h1 = HpdMatrix::from_diagonal(&[p1]).unwrap();
        let h2 = HpdMatrix::from_diagonal(&[p2]).unwrap();
        track(rel_err(hpd_affine_distance(&h1, &h2).unwrap(), (p1.ln() - p2.ln()).abs()));

        let order = rng.random_range(1..=8);
        let a = reflection(&mut rng, order, 0.95);
        let b = reflection(&mut rng, order, 0.95);
        let n = order + 1;
        let (pa, pb) = (ProductPoint::new(a.clone(), n).unwrap(), ProductPoint::new(b.clone(), n).unwrap());
        let (sa, sb) = (SiegelParams::from_scalar(&a).unwrap(), SiegelParams::from_scalar(&b).unwrap());
        track(rel_err(
            block_toeplitz_distance(&sa, &sb, SiegelNorm::Spectral).unwrap(),
            product_distance(&pa, &pb).unwrap(),
        ));

        let dl: f64 = normal(&mut rng);
        let dmu: Vec<Complex64> = (0..order).map(|_| complex_normal(&mut rng)).collect();
        let scalar = metric_form(
            &pa,
            &TangentVector {
                d_log_p0: dl,
                d_mu: dmu.clone(),
            },
        )
        .unwrap();
        let d_r0 = CMatrix::from_element(1, 1, c(a.p0() * dl, 0.0));
        let d_a: Vec<CMatrix> = dmu.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect();
        track(rel_err(matrix_metric_form(&sa, &d_r0, &d_a).unwrap(), scalar));

        let n_entropy = order + 1 + rng.random_range(0..8);
        track(rel_err(
            entropy_matrix(&sa, n_entropy).unwrap(),
            entropy_scalar(&a, n_entropy).unwrap(),
        ));
    }
    outcome(
        "2",
        "p = 1 reduction tower",
        worst < 1e-12,
        format!("max relative deviation {worst:.2e} over 500 cases x 7 operations"),
    )
}

fn unit_direction(rng: &mut ChaCha8Rng, x: &ProductPoint) -> TangentVector {
    let v = TangentVector {
        d_log_p0: normal(rng),
        d_mu: (0..x.order()).map(|_| complex_normal(rng)).collect(),
    };
    let s = metric_form(x, &v).unwrap().sqrt();
    TangentVector {
        d_log_p0: v.d_log_p0 / s,
        d_mu: v.d_mu.iter().map(|z| z / s).collect(),
    }
}

fn displaced(x: &ProductPoint, v: &TangentVector, eps: f64) -> ProductPoint {
    let mu = x.mu().iter().zip(&v.d_mu).map(|(m, d)| m + d * eps).collect();
    ProductPoint::new(ReflectionPoint::new(x.log_p0() + eps * v.d_log_p0, mu).unwrap(), x.n_pulses()).unwrap()
}

fn rank_one_direction(rng: &mut ChaCha8Rng, a: &SiegelPoint) -> CMatrix {
    let p = a.dim();
    let z = a.as_matrix();
    let eye = identity(p);
    let left = hpd_sqrt(&HpdMatrix::new(&eye - z * z.adjoint()).unwrap());
    let right = hpd_sqrt(&HpdMatrix::new(&eye - z.adjoint() * z).unwrap());
    let u = CMatrix::from_fn(p, 1, |_, _| complex_normal(rng));
    let v = CMatrix::from_fn(p, 1, |_, _| complex_normal(rng));
    left.as_matrix() * u * v.adjoint() * right.as_matrix()
}

fn shifted_params(params: &SiegelParams, eps: f64, d_r0: &CMatrix, d_a: &[CMatrix]) -> SiegelParams {
    let r0 = HpdMatrix::new(params.r0().as_matrix() + d_r0 * Complex64::from(eps)).unwrap();
    let blocks = params
        .blocks()
        .iter()
        .zip(d_a)
        .map(|(a, d)| SiegelPoint::new(a.as_matrix() + d * Complex64::from(eps)).unwrap())
        .collect();
    SiegelParams::new(r0, blocks).unwrap()
}

fn criterion_3() -> Outcome {
    let eps = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut scalar_worst: f64 = 0.0;
    for _ in 0..100 {
        let order = rng.random_range(1..=15);
        let n = order + 1 + rng.random_range(0..8);
        let x = product_point(&mut rng, order, n, 0.9);
        let v = unit_direction(&mut rng, &x);
        let d = product_distance(&x, &displaced(&x, &v, eps)).unwrap();
        scalar_worst = scalar_worst.max((d * d / (eps * eps) - 1.0).abs());
    }

    let mut matrix_worst: f64 = 0.0;
    for case in 0..100 {
        let p = rng.random_range(2..=3);
        let n_blocks = rng.random_range(1..=4);
        let r0 = hpd(&mut rng, p);
        let blocks = (0..n_blocks).map(|_| siegel_point(&mut rng, p, 0.8)).collect();
        let params = SiegelParams::new(r0, blocks).unwrap();
        let zeros: Vec<CMatrix> = vec![CMatrix::zeros(p, p); n_blocks];
        let d_r0 = hermitian_direction(&mut rng, p);
        let (d_a, norm) = if case % 2 == 0 {
            let d: Vec<CMatrix> = (0..n_blocks).map(|_| gaussian_matrix(&mut rng, p)).collect();
            (d, SiegelNorm::Full)
        } else {
            let d: Vec<CMatrix> = params.blocks().iter().map(|a| rank_one_direction(&mut rng, a)).collect();
            (d, SiegelNorm::Spectral)
        };
        let zero_r0 = CMatrix::zeros(p, p);
        for (dr, da) in [(&d_r0, &zeros), (&zero_r0, &d_a)] {
            let ds2 = matrix_metric_form(&params, dr, da).unwrap();
            let moved = shifted_params(&params, eps, dr, da);
            let d = block_toeplitz_distance(&params, &moved, norm).unwrap();
            matrix_worst = matrix_worst.max((d * d / (eps * eps) - ds2).abs() / ds2);
        }
    }
    outcome(
        "3",
        "finite-difference metric consistency",
        scalar_worst < 1e-4 && matrix_worst < 1e-3,
        format!(
            "scalar max rel. error {scalar_worst:.2e} (tol 1e-4, unit-speed directions, |mu| < 0.9); \
             matrix {matrix_worst:.2e} (tol 1e-3, full norm random / spectral norm rank-one directions)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut mobius_worst, mut phi_worst, mut congruence_worst): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..500 {
        let (z1, z2, a) = (disk(&mut rng, 0.95), disk(&mut rng, 0.95), disk(&mut rng, 0.9));
        let theta = rng.random_range(0.0..2.0 * PI);
        let before = poincare_distance(z1, z2).unwrap();
        let after = poincare_distance(disk_automorphism(theta, a, z1), disk_automorphism(theta, a, z2)).unwrap();
        mobius_worst = mobius_worst.max(rel_err(after, before));

        let p = rng.random_range(2..=4);
        let m = siegel_point(&mut rng, p, 0.9);
        let w1 = siegel_point(&mut rng, p, 0.9);
        let w2 = siegel_point(&mut rng, p, 0.9);
        let t1 = SiegelPoint::new(siegel_phi(&m, &w1).unwrap()).unwrap();
        let t2 = SiegelPoint::new(siegel_phi(&m, &w2).unwrap()).unwrap();
        for norm in [SiegelNorm::Spectral, SiegelNorm::Full] {
            let before = siegel_distance(&w1, &w2, norm).unwrap();
            let after = siegel_distance(&t1, &t2, norm).unwrap();
            phi_worst = phi_worst.max(rel_err(after, before));
        }

        let r1 = hpd(&mut rng, p);
        let r2 = hpd(&mut rng, p);
        let g = gaussian_matrix(&mut rng, p) + identity(p);
        let c1 = HpdMatrix::new(&g * r1.as_matrix() * g.adjoint()).unwrap();
        let c2 = HpdMatrix::new(&g * r2.as_matrix() * g.adjoint()).unwrap();
        let before = hpd_affine_distance(&r1, &r2).unwrap();
        let after = hpd_affine_distance(&c1, &c2).unwrap();
        congruence_worst = congruence_worst.max(rel_err(after, before));
    }
    outcome(
        "4",
        "isometry suites",
        mobius_worst < 1e-9 && phi_worst < 1e-9 && congruence_worst < 1e-9,
        format!(
            "Mobius {mobius_worst:.2e}, Siegel automorphism {phi_worst:.2e}, HPD congruence {congruence_worst:.2e} (tol 1e-9, 500 cases each)"
        ),
    )
}

#[derive(Default)]
struct AxiomTally {
    asymmetric: usize,
    nonzero_self: usize,
    zero_distinct: usize,
    worst_triangle: f64,
}

impl AxiomTally {
    fn record<T>(&mut self, x: &T, y: &T, z: &T, d: impl Fn(&T, &T) -> f64) {
        let (xy, yz, xz) = (d(x, y), d(y, z), d(x, z));
        if xy.to_bits() != d(y, x).to_bits() {
            self.asymmetric += 1;
        }
        if d(x, x) != 0.0 {
            self.nonzero_self += 1;
        }
        if !(xy > 0.0) {
            self.zero_distinct += 1;
        }
        self.worst_triangle = self.worst_triangle.max(xz - xy - yz);
    }

    fn ok(&self) -> bool {
        self.asymmetric == 0 && self.nonzero_self == 0 && self.zero_distinct == 0 && self.worst_triangle <= 1e-9
    }

    fn describe(&self, name: &str) -> String {
        format!(
            "{name}: asym {} self {} zero {} triangle excess {:.1e}",
            self.asymmetric, self.nonzero_self, self.zero_distinct, self.worst_triangle
        )
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let triples = 10_000;
    let mut product = AxiomTally::default();
    let mut spectral_t = AxiomTally::default();
    let mut full_t = AxiomTally::default();
    let mut affine = AxiomTally::default();
    let mut block = AxiomTally::default();
    for _ in 0..triples {
        let order = rng.random_range(1..=6);
        let n = 16;
        let pts: Vec<ProductPoint> = (0..3).map(|_| product_point(&mut rng, order, n, 0.95)).collect();
        product.record(&pts[0], &pts[1], &pts[2], |a, b| product_distance(a, b).unwrap());

        let p = rng.random_range(1..=3);
        let s: Vec<SiegelPoint> = (0..3).map(|_| siegel_point(&mut rng, p, 0.95)).collect();
        spectral_t.record(&s[0], &s[1], &s[2], |a, b| siegel_distance(a, b, SiegelNorm::Spectral).unwrap());
        full_t.record(&s[0], &s[1], &s[2], |a, b| siegel_distance(a, b, SiegelNorm::Full).unwrap());

        let h: Vec<HpdMatrix> = (0..3).map(|_| hpd(&mut rng, p)).collect();
        affine.record(&h[0], &h[1], &h[2], |a, b| hpd_affine_distance(a, b).unwrap());

        let n_blocks = rng.random_range(1..=3);
        let params: Vec<SiegelParams> = (0..3)
            .map(|_| {
                let blocks = (0..n_blocks).map(|_| siegel_point(&mut rng, p, 0.9)).collect();
                SiegelParams::new(hpd(&mut rng, p), blocks).unwrap()
            })
            .collect();
        block.record(&params[0], &params[1], &params[2], |a, b| {
            block_toeplitz_distance(a, b, SiegelNorm::Spectral).unwrap()
        });
    }
    let all = [
        (&product, "product"),
        (&spectral_t, "siegel/spectral"),
        (&full_t, "siegel/full"),
        (&affine, "hpd"),
        (&block, "block-toeplitz"),
    ];
    outcome(
        "5",
        "metric axioms over 10^4 triples",
        all.iter().all(|(t, _)| t.ok()),
        all.iter().map(|(t, n)| t.describe(n)).collect::<Vec<_>>().join("; "),
    )
}

fn median_trial(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = 4;
    let n = 16;
    let center: Vec<Complex64> = (0..order).map(|_| disk(&mut rng, 0.5)).collect();
    let jitter = |rng: &mut ChaCha8Rng, base: &[Complex64], log_p0: f64, spread: f64| {
        let mu = base
            .iter()
            .map(|&b| disk_automorphism(0.0, -b, disk(rng, spread)))
            .collect();
        ProductPoint::new(ReflectionPoint::new(log_p0 + spread * normal(rng), mu).unwrap(), n).unwrap()
    };
    let clean: Vec<ProductPoint> = (0..90).map(|_| jitter(&mut rng, &center, 0.0, 0.2)).collect();
    let far: Vec<Complex64> = center.iter().map(|z| -z / z.norm() * 0.97).collect();
    let outliers: Vec<ProductPoint> = (0..10).map(|_| jitter(&mut rng, &far, 5.0, 0.02)).collect();
    let all: Vec<ProductPoint> = clean.iter().chain(&outliers).cloned().collect();

    let opts = FlowOptions::default();
    let reference = karcher_mean(&clean, &uniform_weights(clean.len()), &opts).unwrap();
    let mean = karcher_mean(&all, &uniform_weights(all.len()), &opts).unwrap();
    let median = frechet_median(&all, &uniform_weights(all.len()), &opts).unwrap();
    (
        product_distance(&median, &reference).unwrap(),
        product_distance(&mean, &reference).unwrap(),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut midpoint_worst: f64 = 0.0;
    for _ in 0..200 {
        let order = rng.random_range(1..=8);
        let a = product_point(&mut rng, order, 16, 0.95);
        let b = product_point(&mut rng, order, 16, 0.95);
        let m = karcher_mean(&[a.clone(), b.clone()], &[0.5, 0.5], &FlowOptions::default()).unwrap();
        let half = product_distance(&a, &b).unwrap() / 2.0;
        midpoint_worst = midpoint_worst
            .max((product_distance(&m, &a).unwrap() - half).abs())
            .max((product_distance(&m, &b).unwrap() - half).abs());
    }
    let ratios: Vec<f64> = (0..20)
        .map(|rep| {
            let (median, mean) = median_trial(600 + rep);
            median / mean
        })
        .collect();
    let worst_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    outcome(
        "6",
        "barycenter properties",
        midpoint_worst < 1e-8 && worst_ratio < 0.5,
        format!(
            "two-point midpoint deviation {midpoint_worst:.2e} (tol 1e-8, 200 pairs); \
             median/mean displacement with 10% outliers: worst {worst_ratio:.3} over 20 seeds (need < 0.5)"
        ),
    )
}

fn class(name: &str, mu1: f64, cells: usize, texture: Option<f64>) -> ClassSpec {
    ClassSpec {
        name: name.into(),
        p0: 1.0,
        mu: vec![c(mu1, 0.0)],
        texture_shape: texture,
        n_cells: cells,
    }
}

fn scenario_points(config: &ScenarioConfig, order: usize) -> (Vec<ProductPoint>, Vec<usize>) {
    let (burst, labels) = simulate_scenario(config, Exec::Parallel).unwrap();
    let points = estimate_cells(&burst, order, 0.0, Exec::Parallel)
        .unwrap()
        .into_iter()
        .map(|p| ProductPoint::new(p, config.n_pulses).unwrap())
        .collect();
    (points, labels)
}

fn criterion_7() -> Outcome {
    let config = ScenarioConfig {
        seed: 7,
        n_pulses: 16,
        classes: vec![
            class("a", 0.2, 60, Some(2.0)),
            class("b", -0.6, 60, Some(2.0)),
            ClassSpec {
                mu: vec![c(0.0, 0.8), c(0.3, 0.0)],
                ..class("c", 0.0, 60, None)
            },
        ],
    };
    let (points, _) = scenario_points(&config, 6);
    let mut worst_step: f64 = f64::NEG_INFINITY;
    let mut mismatches = 0;
    let mut runs = 0;
    for init in [Init::Random, Init::PlusPlus] {
        for seed in 0..10 {
            let opts = KMeansOptions {
                init,
                ..KMeansOptions::new(3, seed)
            };
            let first = kmeans(&points, &opts, Exec::Parallel).unwrap();
            let again = kmeans(&points, &opts, Exec::Parallel).unwrap();
            let serial = kmeans(&points, &opts, Exec::Sequential).unwrap();
            if first != again || first != serial {
                mismatches += 1;
            }
            for w in first.inertia_trace.windows(2) {
                worst_step = worst_step.max(w[1] - w[0]);
            }
            runs += 1;
        }
    }
    outcome(
        "7",
        "k-means monotonicity and determinism",
        worst_step <= 1e-7 && mismatches == 0,
        format!("largest inertia increase {worst_step:.2e} (tol 1e-7); {mismatches}/{runs} runs not bit-identical across reruns and schedules"),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let config = ScenarioConfig {
        seed: 8,
        n_pulses: 16,
        classes: vec![class("A", 0.1, 200, Some(1.0)), class("B", 0.9, 200, Some(1.0))],
    };
    let (points, truth) = scenario_points(&config, 15);
    let opts = KMeansOptions {
        restarts: 5,
        ..KMeansOptions::new(2, 8)
    };
    let model = kmeans(&points, &opts, Exec::Parallel).unwrap();
    let report = best_permutation_score(&truth, &model.labels).unwrap();
    let elapsed = start.elapsed();
    outcome(
        "8",
        "end-to-end two-class segmentation",
        report.f1 >= 0.95 && elapsed < Duration::from_secs(60),
        format!("macro-F1 {:.4} (need >= 0.95), {:.2}s", report.f1, secs(elapsed)),
    )
}

fn criterion_9a() -> Outcome {
    let p = ReflectionPoint::from_power(1.0, vec![c(0.0, 0.0)]).unwrap();
    let s = entropy_scalar(&p, 8).unwrap();
    let expected = -8.0 * (1.0 + PI.ln());
    outcome(
        "9a",
        "entropy spot value",
        (s - expected).abs() < 1e-12,
        format!("S(mu=0, p0=1, n=8) = {s:.15} vs {expected:.15}"),
    )
}

fn criterion_9b() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut checked, mut violations) = (0, 0);
    for _ in 0..200 {
        let order = rng.random_range(1..=6);
        let base = reflection(&mut rng, order, 0.9);
        let n = order + 1 + rng.random_range(0..8);
        let k = rng.random_range(0..order);
        let s0 = entropy_scalar(&base, n).unwrap();
        let mut mu = base.mu().to_vec();
        let r = mu[k].norm();
        let grown = r + (0.99 - r) * rng.random::<f64>().max(1e-3);
        mu[k] = if r > 0.0 { mu[k] * (grown / r) } else { c(grown, 0.0) };
        let s1 = entropy_scalar(&ReflectionPoint::new(base.log_p0(), mu).unwrap(), n).unwrap();
        checked += 1;
        if !(s1 < s0) {
            violations += 1;
        }
    }
    outcome(
        "9b",
        "entropy strictly decreasing in each |mu_k|",
        violations == 0,
        format!("{violations}/{checked} radial increases of |mu_k| did not lower S"),
    )
}

fn main() {
    let criteria: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9a,
        criterion_9b,
    ];
    let mut failed = 0;
    for run in criteria {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {}: {}", o.id, o.name, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
