//! Randomized self-checks behind the `check` subcommand: proximal operators
//! against a brute-force grid search, envelope gradients and Cayley
//! derivatives against finite differences, and the Cayley adjoint identity.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::normalized_laplacian;
use crate::error::Result;
use crate::parametrization::{BasisMatrix, CayleyAt, ParamPoint};
use crate::penalties::PenaltySpec;
use crate::ssc_model::SscProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub samples: usize,
    /// Worst observed error in the check's own metric.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, samples: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name,
            samples,
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} worst {:.3e} (tolerance {:.0e}, {} samples)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.samples
        )
    }
}

/// A random penalty of each kind with a smoothing parameter satisfying `μρ < 1`.
fn random_penalty(rng: &mut ChaCha8Rng, kind: usize, mu_min: f64) -> (PenaltySpec<f64>, f64) {
    let lambda = rng.random_range(0.1..2.0);
    let p = match kind {
        0 => PenaltySpec::l1(lambda),
        1 => PenaltySpec::mcp(lambda, rng.random_range(0.2..3.0)),
        _ => PenaltySpec::scad(lambda, rng.random_range(2.5..5.0)),
    }
    .expect("valid random penalty");
    let mu_max = if p.rho() > 0.0 { 0.95 / p.rho() } else { 2.0 };
    let mu = rng.random_range(mu_min.min(mu_max * 0.5)..mu_max);
    (p, mu)
}

/// Minimizer of `λr(t) + (t − z)²/(2μ)` over the grid `hℤ` between 0 and `z`.
fn grid_prox(p: &PenaltySpec<f64>, mu: f64, z: f64, h: f64) -> f64 {
    let steps = (z.abs() / h).ceil() as i64 + 1;
    let sign = if z < 0.0 { -1.0 } else { 1.0 };
    (0..=steps)
        .map(|i| sign * i as f64 * h)
        .map(|t| (t, p.value_scalar(t) + (t - z) * (t - z) / (2.0 * mu)))
        .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

pub fn check_prox(rng: &mut ChaCha8Rng, samples: usize) -> CheckResult {
    let mut worst: f64 = 0.0;
    for kind in 0..3 {
        for _ in 0..samples {
            let (p, mu) = random_penalty(rng, kind, 1e-3);
            let z = rng.random_range(-5.0..5.0);
            let closed = p.prox_scalar(mu, z).expect("valid mu");
            worst = worst.max((closed - grid_prox(&p, mu, z, 1e-4)).abs());
        }
    }
    CheckResult::new("prox vs grid search", 3 * samples, worst, 5e-4)
}

pub fn check_moreau_gradient(rng: &mut ChaCha8Rng, samples: usize) -> CheckResult {
    let mut worst: f64 = 0.0;
    let h = 1e-6;
    for kind in 0..3 {
        for _ in 0..samples {
            let (p, mu) = random_penalty(rng, kind, 0.01);
            let z: f64 = rng.random_range(-5.0..5.0);
            let g = p.moreau_grad_scalar(mu, z).expect("valid mu");
            let fd = (p.moreau_scalar(mu, z + h).unwrap() - p.moreau_scalar(mu, z - h).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g).abs() / g.abs().max(1.0));
        }
    }
    CheckResult::new("envelope gradient", 3 * samples, worst, 1e-5)
}

/// Largest violation of `g_μ ≤ g` and of `g_μ` decreasing in `μ`.
pub fn check_envelope_order(rng: &mut ChaCha8Rng, samples: usize) -> CheckResult {
    let mut worst: f64 = 0.0;
    for kind in 0..3 {
        for _ in 0..samples {
            let (p, mu) = random_penalty(rng, kind, 0.01);
            let z = rng.random_range(-5.0..5.0);
            let env = p.moreau_scalar(mu, z).unwrap();
            let smaller = p.moreau_scalar(mu * 0.5, z).unwrap();
            worst = worst.max(env - p.value_scalar(z)).max(env - smaller);
        }
    }
    CheckResult::new("envelope order", 3 * samples, worst, 1e-12)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, k: usize, scale: f64) -> ParamPoint<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    ParamPoint::project(&m, k).expect("k <= n")
}

fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> BasisMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    BasisMatrix::new(m.qr().q()).expect("orthogonal")
}

const SHAPES: [(usize, usize); 4] = [(6, 1), (6, 3), (20, 1), (20, 3)];

pub fn check_cayley(rng: &mut ChaCha8Rng, samples: usize) -> Result<Vec<CheckResult>> {
    let (mut feas, mut diff, mut adj) = (0.0f64, 0.0f64, 0.0f64);
    let h = 1e-6;
    for &(n, k) in &SHAPES {
        for _ in 0..samples {
            let s = random_basis(rng, n);
            let v = random_point(rng, n, k, 1.0);
            let dir = random_point(rng, n, k, 1.0);
            let at = CayleyAt::new(&s, &v)?;
            let u = at.point();
            feas = feas.max((u.transpose() * u - DMatrix::identity(k, k)).norm());

            let d = at.differential(&dir)?;
            let plus = CayleyAt::new(&s, &v.add_scaled(h, &dir))?.into_point();
            let minus = CayleyAt::new(&s, &v.add_scaled(-h, &dir))?.into_point();
            let fd = (plus - minus) / (2.0 * h);
            diff = diff.max((&fd - &d).norm() / d.norm().max(1.0));

            let z = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
            let lhs = d.dot(&z);
            let rhs = dir.dot(&at.adjoint(&z)?);
            adj = adj.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
    let total = SHAPES.len() * samples;
    Ok(vec![
        CheckResult::new("Cayley feasibility", total, feas, 1e-10),
        CheckResult::new("Cayley differential", total, diff, 1e-6),
        CheckResult::new("Cayley adjoint", total, adj, 1e-10),
    ])
}

/// Synthetic SSC instance: `N = 20` points in three noisy groups, `k = 3`.
pub fn synthetic_ssc(rng: &mut ChaCha8Rng, penalty: PenaltySpec<f64>) -> Result<SscProblem<f64>> {
    let n = 20;
    let group = |i: usize| i * 3 / n;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let base = if group(i) == group(j) { 1.0 } else { 0.05 };
            let x = base * rng.random_range(0.5..1.0);
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let l = normalized_laplacian(&w)?;
    let s = random_basis(rng, n);
    SscProblem::new(l, 3, penalty, s)
}

pub fn check_ssc_gradient(rng: &mut ChaCha8Rng, samples: usize) -> Result<CheckResult> {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let penalty = match i % 3 {
            0 => PenaltySpec::l1(0.05)?,
            1 => PenaltySpec::mcp(0.05, 0.5)?,
            _ => PenaltySpec::scad(0.05, 3.7)?,
        };
        let problem = synthetic_ssc(rng, penalty)?;
        let mu = rng.random_range(0.01..0.9 / penalty.rho_eff());
        let v = random_point(rng, 20, 3, 0.5);
        let grad = problem.smoothed_grad(&v, mu)?;
        let dim = v.dim();
        let mut err_sq = 0.0;
        for idx in 0..dim {
            let e = ParamPoint::<f64>::basis_element(20, 3, idx)?;
            let scale = 1.0 / e.norm_squared().sqrt();
            let fd = (problem.smoothed_value(&v.add_scaled(h * scale, &e), mu)?
                - problem.smoothed_value(&v.add_scaled(-h * scale, &e), mu)?)
                / (2.0 * h);
            let d = fd - grad.dot(&e) * scale;
            err_sq += d * d;
        }
        worst = worst.max(err_sq.sqrt() / grad.norm_squared().sqrt().max(1.0));
    }
    Ok(CheckResult::new("SSC full-chain gradient", samples, worst, 1e-5))
}

/// Runs every check with the given seed.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        check_prox(&mut rng, 1000),
        check_moreau_gradient(&mut rng, 100),
        check_envelope_order(&mut rng, 100),
    ];
    out.extend(check_cayley(&mut rng, 25)?);
    out.push(check_ssc_gradient(&mut rng, 20)?);
    Ok(out)
}
