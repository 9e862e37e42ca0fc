//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use varsmooth::clustering::{affinity, normalized_laplacian, sc_baseline, AffinityParams};
use varsmooth::experiment::{
    gaussian_blobs, grid_search, prepare, run_method, run_prepared, DataSource, DatasetSpec, ExperimentConfig,
    GridPoint, Method, OutputPaths,
};
use varsmooth::solver::{self, rate_envelope_check_split, SmoothedProblem, SolverConfig};
use varsmooth::{BasisMatrix, CayleyAt, ParamPoint, PenaltySpec, SscProblem, SscTrace64};

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(id: usize, name: &'static str, passed: bool, detail: String) -> Outcome {
    let o = Outcome { id, name, passed, detail };
    println!("{} criterion {:>2} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    o
}

// ---------------------------------------------------------------- oracles

#[derive(Clone, Copy)]
enum Kind {
    L1,
    Mcp(f64),
    Scad(f64),
}

/// Scalar penalty `r(t)`, written out independently of the library.
fn r(kind: Kind, t: f64) -> f64 {
    let a = t.abs();
    match kind {
        Kind::L1 => a,
        Kind::Mcp(beta) => {
            if a <= beta {
                a - t * t / (2.0 * beta)
            } else {
                beta / 2.0
            }
        }
        Kind::Scad(s) => {
            if a <= 1.0 {
                a
            } else if a <= s {
                (2.0 * s * a - t * t - 1.0) / (2.0 * (s - 1.0))
            } else {
                (s + 1.0) / 2.0
            }
        }
    }
}

fn spec(kind: Kind, lambda: f64) -> PenaltySpec<f64> {
    match kind {
        Kind::L1 => PenaltySpec::l1(lambda),
        Kind::Mcp(b) => PenaltySpec::mcp(lambda, b),
        Kind::Scad(a) => PenaltySpec::scad(lambda, a),
    }
    .unwrap()
}

/// Brute-force prox: minimizer over the lattice `h·ℤ` covering `[−|z|−1, |z|+1]`.
fn grid_prox(kind: Kind, lambda: f64, mu: f64, z: f64, h: f64) -> f64 {
    let m = ((z.abs() + 1.0) / h).ceil() as i64;
    let mut best = (0.0, f64::INFINITY);
    for i in -m..=m {
        let t = i as f64 * h;
        let v = lambda * r(kind, t) + (t - z) * (t - z) / (2.0 * mu);
        if v < best.1 {
            best = (t, v);
        }
    }
    best.0
}

/// Random penalty with `μ` in `[mu_min, 0.95/ρ)`.
fn random_kind(rng: &mut ChaCha8Rng, which: usize) -> (Kind, f64) {
    let lambda = rng.random_range(0.05..2.0);
    let kind = match which {
        0 => Kind::L1,
        1 => Kind::Mcp(rng.random_range(0.1..3.0)),
        _ => Kind::Scad(rng.random_range(2.1..6.0)),
    };
    (kind, lambda)
}

fn rho(kind: Kind, lambda: f64) -> f64 {
    match kind {
        Kind::L1 => 0.0,
        Kind::Mcp(b) => lambda / b,
        Kind::Scad(a) => lambda / (a - 1.0),
    }
}

fn random_mu(rng: &mut ChaCha8Rng, kind: Kind, lambda: f64, mu_min: f64) -> f64 {
    let rh = rho(kind, lambda);
    let hi = if rh > 0.0 { 0.95 / rh } else { 3.0 };
    rng.random_range(mu_min.min(hi / 2.0)..hi)
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q()
}

/// Skew matrix with zero lower-right `(N−k)×(N−k)` block, as `(A, B)` blocks.
fn random_q(rng: &mut ChaCha8Rng, n: usize, k: usize, scale: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = DMatrix::from_fn(k, k, |_, _| rng.random_range(-scale..scale));
    let a = &m - m.transpose();
    let b = DMatrix::from_fn(n - k, k, |_, _| rng.random_range(-scale..scale));
    (a, b)
}

fn assemble(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let k = a.nrows();
    let n = k + b.nrows();
    let mut v = DMatrix::zeros(n, n);
    v.view_mut((0, 0), (k, k)).copy_from(a);
    v.view_mut((k, 0), (n - k, k)).copy_from(b);
    v.view_mut((0, k), (k, n - k)).copy_from(&(-b.transpose()));
    v
}

/// Dense Cayley map `S (I − V)(I + V)⁻¹ I_{N×k}`.
fn dense_cayley(s: &DMatrix<f64>, v: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = v.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let inv = (&id + v).try_inverse().unwrap();
    (s * (&id - v) * inv).columns(0, k).into_owned()
}

/// Synthetic SSC instance: 20 points in three 2-D Gaussian blobs
/// (7/7/6 points, centers 3 standard deviations apart), local-scaling
/// affinity, `k = 3`.
fn synthetic_laplacian(seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let centers = [(0.0, 0.0), (3.0, 0.0), (1.5, 2.6)];
    let mut pts = DMatrix::zeros(20, 2);
    for i in 0..20 {
        let c = centers[i * 3 / 20];
        pts[(i, 0)] = c.0 + normal.sample(&mut rng);
        pts[(i, 1)] = c.1 + normal.sample(&mut rng);
    }
    let w = affinity(&pts, &AffinityParams::default()).unwrap();
    normalized_laplacian(&w).unwrap()
}

fn synthetic_problem(penalty: PenaltySpec<f64>, basis: BasisMatrix<f64>) -> SscProblem<f64> {
    SscProblem::new(synthetic_laplacian(11), 3, penalty, basis).unwrap()
}

fn synthetic_penalty() -> PenaltySpec<f64> {
    PenaltySpec::mcp(0.1, 0.5).unwrap()
}

// -------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for which in 0..3 {
        for _ in 0..1000 {
            let (kind, lambda) = random_kind(&mut rng, which);
            let mu = random_mu(&mut rng, kind, lambda, 1e-3);
            let z = rng.random_range(-4.0..4.0);
            let closed = spec(kind, lambda).prox_scalar(mu, z).unwrap();
            worst = worst.max((closed - grid_prox(kind, lambda, mu, z, 1e-4)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        1,
        "prox oracle equivalence",
        worst <= 5e-4 && secs < 10.0,
        format!("worst |prox - grid| = {worst:.2e} (tol 5e-4) over 3000 triples in {secs:.2} s (limit 10 s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    let mut worst_rel: f64 = 0.0;
    let mut violations = 0;
    for which in 0..3 {
        for _ in 0..100 {
            let (kind, lambda) = random_kind(&mut rng, which);
            let mu = random_mu(&mut rng, kind, lambda, 0.01);
            let p = spec(kind, lambda);
            let z: f64 = rng.random_range(-4.0..4.0);
            let g = p.moreau_grad_scalar(mu, z).unwrap();
            let fd = (p.moreau_scalar(mu, z + h).unwrap() - p.moreau_scalar(mu, z - h).unwrap()) / (2.0 * h);
            if g.abs() > 1e-8 {
                worst_rel = worst_rel.max((fd - g).abs() / g.abs());
            } else {
                worst_rel = worst_rel.max((fd - g).abs());
            }
            let env = p.moreau_scalar(mu, z).unwrap();
            let env_smaller_mu = p.moreau_scalar(mu / 2.0, z).unwrap();
            let slack = 1e-12 * (1.0 + env.abs());
            if env > lambda * r(kind, z) + slack || env > env_smaller_mu + slack {
                violations += 1;
            }
        }
    }
    outcome(
        2,
        "Moreau gradient",
        worst_rel <= 1e-5 && violations == 0,
        format!("worst relative FD error {worst_rel:.2e} (tol 1e-5); domination/monotonicity violations {violations} of 300"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut feas, mut diff, mut adj) = (0.0f64, 0.0f64, 0.0f64);
    let mut dense_gap: f64 = 0.0;
    let h = 1e-6;
    for &n in &[6usize, 20] {
        for &k in &[1usize, 3] {
            for _ in 0..100 {
                let s_mat = random_orthogonal(&mut rng, n);
                let s = BasisMatrix::new(s_mat.clone()).unwrap();
                let (a, b) = random_q(&mut rng, n, k, 1.0);
                let (ha, hb) = random_q(&mut rng, n, k, 1.0);
                let v = ParamPoint::new(a.clone(), b.clone()).unwrap();
                let hdir = ParamPoint::new(ha.clone(), hb.clone()).unwrap();
                let at = CayleyAt::new(&s, &v).unwrap();
                let u = at.point().clone();
                feas = feas.max((u.transpose() * &u - DMatrix::identity(k, k)).norm());
                dense_gap = dense_gap.max((&u - dense_cayley(&s_mat, &assemble(&a, &b), k)).norm());

                let d = at.differential(&hdir).unwrap();
                let vp = assemble(&(&a + &ha * h), &(&b + &hb * h));
                let vm = assemble(&(&a - &ha * h), &(&b - &hb * h));
                let fd = (dense_cayley(&s_mat, &vp, k) - dense_cayley(&s_mat, &vm, k)) / (2.0 * h);
                diff = diff.max((&fd - &d).norm() / d.norm());

                let z = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
                let lhs = d.dot(&z);
                let adj_z = at.adjoint(&z).unwrap();
                let rhs = assemble(&ha, &hb).dot(&adj_z.assemble());
                adj = adj.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
            }
        }
    }
    outcome(
        3,
        "parametrization",
        feas <= 1e-10 && diff <= 1e-6 && adj <= 1e-10,
        format!(
            "max ||U^T U - I|| {feas:.2e} (tol 1e-10); differential rel err {diff:.2e} (tol 1e-6); \
             adjoint rel err {adj:.2e} (tol 1e-10); dense-formula gap {dense_gap:.1e}; 400 draws"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, k) = (20usize, 3usize);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let penalty = match i % 3 {
            0 => PenaltySpec::l1(0.1).unwrap(),
            1 => synthetic_penalty(),
            _ => PenaltySpec::scad(0.1, 3.7).unwrap(),
        };
        let basis = BasisMatrix::new(random_orthogonal(&mut rng, n)).unwrap();
        let problem = synthetic_problem(penalty, basis);
        let mu = rng.random_range(0.01..0.9 / penalty.rho_eff());
        let (a, b) = random_q(&mut rng, n, k, 0.5);
        let v = ParamPoint::new(a.clone(), b.clone()).unwrap();
        let grad = problem.smoothed_grad(&v, mu).unwrap().assemble();

        // orthonormal coordinates of Q_{N,k} under the Frobenius inner product
        let mut err_sq = 0.0;
        let mut grad_sq = 0.0;
        let mut coord = |e: DMatrix<f64>| {
            let scale = 1.0 / e.norm();
            let e = e * scale;
            let vp = ParamPoint::project(&(assemble(&a, &b) + &e * h), k).unwrap();
            let vm = ParamPoint::project(&(assemble(&a, &b) - &e * h), k).unwrap();
            let fd = (problem.smoothed_value(&vp, mu).unwrap() - problem.smoothed_value(&vm, mu).unwrap()) / (2.0 * h);
            let g = grad.dot(&e);
            err_sq += (fd - g) * (fd - g);
            grad_sq += g * g;
        };
        for p in 0..n {
            for q in 0..p.min(k) {
                let mut e = DMatrix::zeros(n, n);
                e[(p, q)] = 1.0;
                e[(q, p)] = -1.0;
                coord(e);
            }
        }
        worst = worst.max((err_sq / grad_sq).sqrt());
    }
    outcome(
        4,
        "full-chain gradient",
        worst <= 1e-5,
        format!("worst relative error over Q coordinates {worst:.2e} (tol 1e-5), 20 draws"),
    )
}

/// A trace together with what is needed to replay it.
struct Replayable {
    label: String,
    problem: SscProblem<f64>,
    y1: ParamPoint<f64>,
    cfg: SolverConfig<f64>,
    trace: SscTrace64,
}

fn criterion_6(traces: &mut Vec<Replayable>) -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    // warm start as in the clustering pipeline: S completes the SC eigenvectors
    let (u0, _) = sc_baseline(&synthetic_laplacian(11), 3).unwrap();
    let basis = BasisMatrix::select(20, Some(&u0)).unwrap();
    let problem = synthetic_problem(synthetic_penalty(), basis);
    let y1 = ParamPoint::zeros(20, 3).unwrap();
    let trace = solver::run(&problem, y1.clone(), &cfg).unwrap();
    let norms = trace.grad_norms();
    let env = rate_envelope_check_split(&norms, cfg.alpha, 5, 250).unwrap();
    let min = trace.min_grad_norm().unwrap();
    let ratio = min / norms[0];
    let secs = start.elapsed().as_secs_f64();
    let passed = norms.len() == 500 && env.holds && ratio <= 0.1 && secs < 60.0;
    traces.push(Replayable {
        label: "synthetic convergence".into(),
        problem,
        y1,
        cfg,
        trace,
    });
    outcome(
        6,
        "convergence envelope",
        passed,
        format!(
            "eta {:.3e} fitted on [5,250], worst ratio on [251,500] {:.3} (holds: {}); min/initial grad norm {:.3e} (tol 0.1); {:.1} s (limit 60 s)",
            env.eta, env.worst_ratio, env.holds, ratio, secs
        ),
    )
}

fn blobs_config(method: Method, lambda: Vec<f64>, shape: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetSpec {
            source: DataSource::Blobs {
                per_cluster: 30,
                clusters: 3,
                separation: 10.0,
                dim: 2,
            },
            subsample: None,
            seed: 42,
        },
        k: 3,
        affinity: AffinityParams::default(),
        method,
        lambda_grid: lambda,
        shape_grid: shape,
        rho_floor: 1.0,
        solver: SolverConfig::default(),
        kmeans_restarts: 100,
        kmeans_seed: 0,
        kmeans_max_iters: 300,
        output: OutputPaths::default(),
    }
}

fn iris_config(method: Method) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/iris.conf");
    ExperimentConfig::from_file(&path, &[format!("method={}", method.key())]).unwrap()
}

/// Rebuilds the SSC problem a pipeline run solved, for replay.
fn pipeline_replayable(label: String, cfg: &ExperimentConfig, data: &varsmooth::experiment::Dataset, point: GridPoint, trace: SscTrace64) -> Replayable {
    let prep = prepare(cfg, data).unwrap();
    let penalty = cfg.method.penalty(point.lambda.unwrap(), point.shape, cfg.rho_floor).unwrap().unwrap();
    let basis = BasisMatrix::select(data.len(), Some(&prep.warm_start)).unwrap();
    Replayable {
        label,
        problem: SscProblem::new(prep.laplacian, cfg.k, penalty, basis).unwrap(),
        y1: ParamPoint::zeros(data.len(), cfg.k).unwrap(),
        cfg: cfg.solver,
        trace,
    }
}

fn criterion_7(traces: &mut Vec<Replayable>) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let datasets = [
        ("blobs", blobs_config(Method::SscL1, vec![0.0], vec![])),
        ("iris", iris_config(Method::SscL1)),
    ];
    for (name, cfg) in datasets {
        let data = cfg.dataset.load().unwrap();
        let point = GridPoint { lambda: Some(0.0), shape: None };
        let prep = prepare(&cfg, &data).unwrap();
        let run = run_prepared(&cfg, &data, &prep, point).unwrap();
        let u = &run.embedding;
        let u0 = &prep.warm_start;
        let dist = (u * u.transpose() - u0 * u0.transpose()).norm();
        let iters = run.trace.as_ref().unwrap().records.len();
        worst = worst.max(dist);
        details.push(format!("{name} {dist:.2e} after {iters} iterations"));
        traces.push(pipeline_replayable(format!("lambda=0 {name}"), &cfg, &data, point, run.trace.unwrap()));
    }
    outcome(
        7,
        "lambda=0 consistency",
        worst <= 1e-6,
        format!("||UU^T - U0U0^T||_F: {} (tol 1e-6)", details.join(", ")),
    )
}

fn criterion_8(traces: &mut Vec<Replayable>) -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (method, lambda, shape) in [
        (Method::Sc, None, None),
        (Method::SscL1, Some(1e-2), None),
        (Method::SscMcp, Some(1e-2), Some(1e-1)),
    ] {
        let cfg = blobs_config(method, lambda.into_iter().collect(), shape.into_iter().collect());
        let data = gaussian_blobs(30, 3, 10.0, 2, 42).unwrap();
        assert_eq!(data.len(), 90);
        let point = GridPoint { lambda, shape };
        let run = run_method(&cfg, &data, point).unwrap();
        let min_nmi = run.report.restart_nmi.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= min_nmi >= 0.99 && run.report.restart_nmi.len() == 100;
        details.push(format!("{} min NMI {min_nmi:.4}", method.display_name()));
        if let Some(trace) = run.trace {
            traces.push(pipeline_replayable(format!("blobs {}", method.key()), &cfg, &data, point, trace));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        8,
        "planted clusters",
        ok && secs < 120.0,
        format!("{} over 100 restarts (tol 0.99); {secs:.1} s (limit 120 s)", details.join(", ")),
    )
}

fn criterion_9(traces: &mut Vec<Replayable>) -> Outcome {
    let start = Instant::now();
    let sc_cfg = iris_config(Method::Sc);
    let data = sc_cfg.dataset.load().unwrap();
    assert_eq!((data.len(), data.dim()), (150, 4));
    let sc = grid_search(&sc_cfg, &data).unwrap();
    let l1_cfg = iris_config(Method::SscL1);
    let l1 = grid_search(&l1_cfg, &data).unwrap();
    let mcp_cfg = iris_config(Method::SscMcp);
    let mcp = grid_search(&mcp_cfg, &data).unwrap();
    let secs = start.elapsed().as_secs_f64();

    let (scm, l1m, mcpm) = (sc.report.best.metrics, l1.report.best.metrics, mcp.report.best.metrics);
    let near = |got: f64, target: f64| (got - target).abs() <= 0.08;
    let checks = [
        ("SC NMI", scm.nmi_mean, 0.732),
        ("SC ARI", scm.ari_mean, 0.715),
        ("MCP NMI", mcpm.nmi_mean, 0.756),
        ("MCP ARI", mcpm.ari_mean, 0.740),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, got, target) in checks {
        let pass = near(got, target);
        ok &= pass;
        parts.push(format!("{name} {got:.3} vs {target:.3}{}", if pass { "" } else { " OUT OF BAND" }));
    }
    let directional = mcpm.nmi_mean >= l1m.nmi_mean - 0.02;
    ok &= directional && secs < 900.0;
    parts.push(format!(
        "best MCP NMI {:.3} >= best l1 NMI {:.3} - 0.02: {directional}",
        mcpm.nmi_mean, l1m.nmi_mean
    ));
    for (label, cfg, outcome) in [("iris l1 best", &l1_cfg, l1), ("iris mcp best", &mcp_cfg, mcp)] {
        let point = outcome.report.best.params;
        traces.push(pipeline_replayable(label.into(), cfg, &data, point, outcome.best_run.trace.unwrap()));
    }
    outcome(
        9,
        "iris table reproduction",
        ok,
        format!("{} (band 0.08); {secs:.1} s (limit 900 s)", parts.join("; ")),
    )
}

/// Replays every recorded iteration: the schedule formula bitwise, the
/// stepsize as `γ̄ κ^shrinks`, the Armijo inequality on the recorded values,
/// and the trial value recomputed at the reconstructed iterate.
fn criterion_5(traces: &[Replayable]) -> Outcome {
    let mut failures = Vec::new();
    let mut max_shrinks = 0;
    let mut iterations = 0;
    for t in traces {
        let cfg = &t.cfg;
        let rho = t.problem.rho_eff();
        let mut y = t.y1.clone();
        for rec in &t.trace.records {
            iterations += 1;
            let n = rec.n as f64;
            let mu = 1.0 / (cfg.tau * rho * n.powf(1.0 / cfg.alpha));
            if mu.to_bits() != rec.mu.to_bits() {
                failures.push(format!("{}: mu mismatch at n={}", t.label, rec.n));
            }
            let mut gamma = rec.gamma_bar;
            for _ in 0..rec.shrinks {
                gamma *= cfg.kappa;
            }
            if gamma.to_bits() != rec.gamma.to_bits() {
                failures.push(format!("{}: gamma mismatch at n={}", t.label, rec.n));
            }
            max_shrinks = max_shrinks.max(rec.shrinks);
            if rec.trial_value > rec.value - cfg.c * rec.gamma * rec.grad_norm_sq {
                failures.push(format!("{}: Armijo violated at n={}", t.label, rec.n));
            }
            let (value, grad) = t.problem.value_and_grad(&y, rec.mu).unwrap();
            if value.to_bits() != rec.value.to_bits() {
                failures.push(format!("{}: value mismatch at n={}", t.label, rec.n));
            }
            y = y.add_scaled(-rec.gamma, &grad);
            let trial = t.problem.value(&y, rec.mu).unwrap();
            if trial.to_bits() != rec.trial_value.to_bits() {
                failures.push(format!("{}: trial value mismatch at n={}", t.label, rec.n));
            }
        }
    }
    failures.truncate(5);
    outcome(
        5,
        "Armijo and schedule invariants",
        failures.is_empty() && max_shrinks <= 60,
        format!(
            "{} traces, {iterations} iterations replayed; max shrinks {max_shrinks} (limit 60); {}",
            traces.len(),
            if failures.is_empty() { "no mismatches".to_string() } else { failures.join("; ") }
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/blobs.conf");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_varsmooth"))
            .args(["grid", "--config"])
            .arg(&config)
            .args(["--set", "penalty.lambda=1e-2,1e-3", "--set", "penalty.beta=1,1e-1", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("first.json");
    let b = run("second.json");
    outcome(
        10,
        "determinism",
        !a.is_empty() && a == b,
        format!("two grid runs wrote {} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    )
}

fn main() {
    let mut traces = Vec::new();
    let mut results = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4()];
    results.push(criterion_6(&mut traces));
    results.push(criterion_7(&mut traces));
    results.push(criterion_8(&mut traces));
    results.push(criterion_9(&mut traces));
    results.push(criterion_5(&traces));
    results.push(criterion_10());
    results.sort_by_key(|o| o.id);

    println!();
    println!("summary");
    for o in &results {
        println!("  {} {:>2} {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.name);
    }
    let failed = results.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
