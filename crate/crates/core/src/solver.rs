//! Variable smoothing gradient descent with Armijo backtracking.
//!
//! At iteration `n` the nonsmooth outer function `g` is replaced by its
//! Moreau envelope with parameter `μₙ = 1/(τ ρ n^{1/α})`, and one gradient
//! step is taken on the resulting smooth composite `f_[n]∘F`. The stepsize is
//! found by backtracking from an initial guess built from the previous
//! objective decrease.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parametrization::ParamPoint;
use crate::scalar::Scalar;

/// Element of the (Euclidean) parameter space the solver iterates on.
pub trait SolverPoint<T: Scalar>: Clone {
    fn dot(&self, other: &Self) -> T;

    fn norm_squared(&self) -> T {
        self.dot(self)
    }

    /// `self + alpha · other`.
    fn add_scaled(&self, alpha: T, other: &Self) -> Self;

    fn is_finite(&self) -> bool;
}

impl<T: Scalar> SolverPoint<T> for DVector<T> {
    fn dot(&self, other: &Self) -> T {
        nalgebra::Matrix::dot(self, other)
    }

    fn add_scaled(&self, alpha: T, other: &Self) -> Self {
        self + other * alpha
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl<T: Scalar> SolverPoint<T> for ParamPoint<T> {
    fn dot(&self, other: &Self) -> T {
        ParamPoint::dot(self, other)
    }

    fn add_scaled(&self, alpha: T, other: &Self) -> Self {
        ParamPoint::add_scaled(self, alpha, other)
    }

    fn is_finite(&self) -> bool {
        ParamPoint::is_finite(self)
    }
}

/// A composite objective `(h + g∘G)∘F` exposed through its smoothed surrogate
/// `(h + g_μ∘G)∘F`.
///
/// `grad(y, μ)` must be the exact gradient of `value(·, μ)` at `y`.
/// Implementations are shared across threads during grid searches and must
/// not rely on interior mutability.
pub trait SmoothedProblem<T: Scalar>: Sync {
    type Point: SolverPoint<T>;

    fn value(&self, y: &Self::Point, mu: T) -> Result<T>;

    fn grad(&self, y: &Self::Point, mu: T) -> Result<Self::Point>;

    fn value_and_grad(&self, y: &Self::Point, mu: T) -> Result<(T, Self::Point)> {
        Ok((self.value(y, mu)?, self.grad(y, mu)?))
    }

    /// `f∘F(y)` without smoothing.
    fn unsmoothed_value(&self, y: &Self::Point) -> Result<T>;

    /// Positive weak-convexity modulus driving the smoothing schedule.
    fn rho_eff(&self) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    /// Schedule constant, `> 2`.
    pub tau: T,
    /// Armijo constant in `(0, 1)`.
    pub c: T,
    /// Backtracking shrink factor in `(0, 1)`.
    pub kappa: T,
    /// Schedule exponent, `> 1`.
    pub alpha: T,
    /// Floor on the initial stepsize guess.
    pub epsilon_step: T,
    /// Initial stepsize guess at the first iteration.
    pub gamma_first: T,
    pub max_iters: usize,
    pub max_shrinks: usize,
    /// Early stop on the gradient norm; `0` disables it.
    pub grad_tol: T,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tau: T::lit(3.0),
            c: T::lit(2f64.powi(-13)),
            kappa: T::lit(0.5),
            alpha: T::lit(1.1),
            epsilon_step: T::lit(1e-5),
            gamma_first: T::one(),
            max_iters: 500,
            max_shrinks: 60,
            grad_tol: T::zero(),
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("solver config: {what}")));
        let unit = |x: T| x > T::zero() && x < T::one();
        if !(self.tau > T::lit(2.0)) || !self.tau.is_finite() {
            return bad("tau must exceed 2");
        }
        if !unit(self.c) {
            return bad("c must lie in (0,1)");
        }
        if !unit(self.kappa) {
            return bad("kappa must lie in (0,1)");
        }
        if !(self.alpha > T::one()) || !self.alpha.is_finite() {
            return bad("alpha must exceed 1");
        }
        if !(self.epsilon_step > T::zero()) || !(self.gamma_first > T::zero()) {
            return bad("epsilon_step and gamma_first must be positive");
        }
        if self.max_iters == 0 || self.max_shrinks == 0 {
            return bad("max_iters and max_shrinks must be positive");
        }
        if !(self.grad_tol >= T::zero()) {
            return bad("grad_tol must be nonnegative");
        }
        Ok(())
    }
}

/// `μₙ = 1 / (τ · ρ · n^{1/α})`.
pub fn schedule_mu<T: Scalar>(n: usize, cfg: &SolverConfig<T>, rho_eff: T) -> T {
    let root = T::from_usize(n).expect("iteration index fits scalar").powf(T::one() / cfg.alpha);
    T::one() / (cfg.tau * rho_eff * root)
}

/// Outcome of one backtracking search.
#[derive(Debug, Clone)]
pub struct Backtrack<T, P> {
    pub gamma: T,
    pub shrinks: usize,
    /// `J(y − γ∇J(y))` at the accepted `γ`.
    pub trial_value: T,
    /// `y − γ∇J(y)` at the accepted `γ`.
    pub point: P,
}

/// Armijo sufficient-decrease test `J(y − γ∇J(y)) ≤ J(y) − cγ‖∇J(y)‖²`.
///
/// A non-finite trial value counts as a failure.
#[inline]
pub fn armijo_holds<T: Scalar>(trial_value: T, value: T, c: T, gamma: T, grad_norm_sq: T) -> bool {
    trial_value <= value - c * gamma * grad_norm_sq
}

/// Shrinks `γ ← κγ` from `gamma_init` until the Armijo test passes.
pub fn backtrack<T, P, J>(
    mut objective: J,
    y: &P,
    grad: &P,
    value: T,
    cfg: &SolverConfig<T>,
    gamma_init: T,
) -> Result<Backtrack<T, P>>
where
    T: Scalar,
    P: SolverPoint<T>,
    J: FnMut(&P) -> Result<T>,
{
    let grad_norm_sq = grad.norm_squared();
    let mut gamma = gamma_init;
    let mut shrinks = 0;
    loop {
        let point = y.add_scaled(-gamma, grad);
        let trial_value = objective(&point)?;
        if armijo_holds(trial_value, value, cfg.c, gamma, grad_norm_sq) {
            return Ok(Backtrack {
                gamma,
                shrinks,
                trial_value,
                point,
            });
        }
        if shrinks == cfg.max_shrinks {
            return Err(Error::Backtracking {
                iteration: 0,
                max_shrinks: cfg.max_shrinks,
            });
        }
        gamma *= cfg.kappa;
        shrinks += 1;
    }
}

/// Initial guess `γ̄ₙ` for the backtracking search.
///
/// For `n ≥ 2`: `max(2 (J_{n−1} − J_n) / ‖∇J_n‖², ε)`, falling back to the
/// previous accepted stepsize (floored at `ε`) when the decrease is not
/// positive.
pub fn initial_stepsize_guess<T: Scalar>(
    history: &[IterationRecord<T>],
    current_value: T,
    grad_norm_sq: T,
    cfg: &SolverConfig<T>,
) -> T {
    let Some(prev) = history.last() else {
        return cfg.gamma_first;
    };
    let numerator = T::lit(2.0) * (prev.value - current_value);
    let guess = if numerator > T::zero() && grad_norm_sq > T::zero() {
        numerator / grad_norm_sq
    } else {
        prev.gamma
    };
    if guess.is_finite() && guess > cfg.epsilon_step {
        guess
    } else {
        cfg.epsilon_step
    }
}

/// One solver iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord<T> {
    pub n: usize,
    pub mu: T,
    pub gamma_bar: T,
    pub gamma: T,
    pub shrinks: usize,
    pub grad_norm: T,
    pub grad_norm_sq: T,
    /// `f_[n]∘F(yₙ)`.
    pub value: T,
    /// `f_[n]∘F(yₙ₊₁)`, the accepted backtracking trial.
    pub trial_value: T,
    /// `f∘F(yₙ)`.
    pub unsmoothed_value: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIters,
    GradTol,
}

#[derive(Debug, Clone)]
pub struct SolverTrace<T, P> {
    pub records: Vec<IterationRecord<T>>,
    pub final_point: P,
    pub termination: Termination,
}

impl<T: Scalar, P> SolverTrace<T, P> {
    pub fn grad_norms(&self) -> Vec<T> {
        self.records.iter().map(|r| r.grad_norm).collect()
    }

    /// `min_n ‖∇(f_[n]∘F)(yₙ)‖` over the whole trace.
    pub fn min_grad_norm(&self) -> Option<T> {
        self.records
            .iter()
            .map(|r| r.grad_norm)
            .reduce(|a, b| if b < a { b } else { a })
    }

    /// Writes the per-iteration table as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "mu",
            "gamma_bar",
            "gamma",
            "shrinks",
            "grad_norm",
            "smoothed_value",
            "unsmoothed_value",
        ])?;
        for r in &self.records {
            w.write_record([
                r.n.to_string(),
                r.mu.to_f64_lossy().to_string(),
                r.gamma_bar.to_f64_lossy().to_string(),
                r.gamma.to_f64_lossy().to_string(),
                r.shrinks.to_string(),
                r.grad_norm.to_f64_lossy().to_string(),
                r.value.to_f64_lossy().to_string(),
                r.unsmoothed_value.to_f64_lossy().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs variable smoothing from `y1`.
pub fn run<T, Pr>(problem: &Pr, y1: Pr::Point, cfg: &SolverConfig<T>) -> Result<SolverTrace<T, Pr::Point>>
where
    T: Scalar,
    Pr: SmoothedProblem<T> + ?Sized,
{
    cfg.validate()?;
    let rho = problem.rho_eff();
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho_eff must be positive, got {rho}")));
    }
    let mut y = y1;
    let mut records: Vec<IterationRecord<T>> = Vec::with_capacity(cfg.max_iters);
    let mut termination = Termination::MaxIters;

    for n in 1..=cfg.max_iters {
        let mu = schedule_mu(n, cfg, rho);
        let (value, grad) = problem.value_and_grad(&y, mu)?;
        if !value.is_finite() {
            return Err(Error::NonFinite { what: "objective value", iteration: n });
        }
        if !grad.is_finite() {
            return Err(Error::NonFinite { what: "gradient", iteration: n });
        }
        let unsmoothed_value = problem.unsmoothed_value(&y)?;
        let grad_norm_sq = grad.norm_squared();
        let grad_norm = grad_norm_sq.sqrt();

        if cfg.grad_tol > T::zero() && grad_norm <= cfg.grad_tol {
            records.push(IterationRecord {
                n,
                mu,
                gamma_bar: T::zero(),
                gamma: T::zero(),
                shrinks: 0,
                grad_norm,
                grad_norm_sq,
                value,
                trial_value: value,
                unsmoothed_value,
            });
            termination = Termination::GradTol;
            break;
        }

        let gamma_bar = initial_stepsize_guess(&records, value, grad_norm_sq, cfg);
        let step = backtrack(|p| problem.value(p, mu), &y, &grad, value, cfg, gamma_bar).map_err(|e| match e {
            Error::Backtracking { max_shrinks, .. } => Error::Backtracking { iteration: n, max_shrinks },
            other => other,
        })?;
        records.push(IterationRecord {
            n,
            mu,
            gamma_bar,
            gamma: step.gamma,
            shrinks: step.shrinks,
            grad_norm,
            grad_norm_sq,
            value,
            trial_value: step.trial_value,
            unsmoothed_value,
        });
        y = step.point;
    }

    Ok(SolverTrace {
        records,
        final_point: y,
        termination,
    })
}

/// Result of fitting the convergence-rate envelope to a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEnvelope<T> {
    pub eta: T,
    pub holds: bool,
    /// Largest ratio `η_needed / η` seen on the verification window.
    pub worst_ratio: T,
}

/// Fits the smallest `η` such that
///
/// ```text
/// min_{n0≤n≤n1} ‖∇ₙ‖ ≤ sqrt( η / ((n1+1)^{1−1/α} − n0^{1−1/α}) )
/// ```
///
/// for every `n1` in `n0+1..=split`, then checks the same bound for every
/// `n1` in `split+1..=len`. Indices are 1-based iteration numbers.
pub fn rate_envelope_check_split<T: Scalar>(grad_norms: &[T], alpha: T, n0: usize, split: usize) -> Result<RateEnvelope<T>> {
    let len = grad_norms.len();
    if n0 == 0 || split <= n0 || split >= len {
        return Err(Error::TraceTooShort(format!(
            "need 1 <= n0 < split < trace length; got n0={n0}, split={split}, length={len}"
        )));
    }
    let p = T::one() - T::one() / alpha;
    let n0_pow = T::from_usize(n0).unwrap().powf(p);
    let needed = |n1: usize, running_min: T| {
        let denom = T::from_usize(n1 + 1).unwrap().powf(p) - n0_pow;
        running_min * running_min * denom
    };

    let mut running_min = grad_norms[n0 - 1];
    let mut eta = T::zero();
    for n1 in (n0 + 1)..=split {
        running_min = running_min.min(grad_norms[n1 - 1]);
        eta = eta.max(needed(n1, running_min));
    }
    let mut holds = true;
    let mut worst_ratio = T::zero();
    for n1 in (split + 1)..=len {
        running_min = running_min.min(grad_norms[n1 - 1]);
        let need = needed(n1, running_min);
        if need > eta {
            holds = false;
        }
        let ratio = if eta > T::zero() {
            need / eta
        } else if need > T::zero() {
            T::max_value().unwrap_or(T::one())
        } else {
            T::zero()
        };
        worst_ratio = worst_ratio.max(ratio);
    }
    Ok(RateEnvelope { eta, holds, worst_ratio })
}

/// [`rate_envelope_check_split`] calibrated on the first half of the trace.
pub fn rate_envelope_check<T: Scalar, P>(trace: &SolverTrace<T, P>, cfg: &SolverConfig<T>, n0: usize) -> Result<RateEnvelope<T>> {
    let norms = trace.grad_norms();
    rate_envelope_check_split(&norms, cfg.alpha, n0, norms.len() / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::PenalizedQuadratic;
    use nalgebra::DMatrix;

    #[test]
    fn schedule_examples() {
        let cfg = SolverConfig::<f64>::default();
        assert_eq!(schedule_mu(1, &cfg, 1.0), 1.0 / 3.0);
        let cfg2 = SolverConfig { alpha: 2.0, ..cfg };
        assert_eq!(schedule_mu(16, &cfg2, 1.0), 1.0 / 12.0);
        for n in 1..1000 {
            assert!(schedule_mu(n + 1, &cfg, 1.0) < schedule_mu(n, &cfg, 1.0));
        }
        assert!(schedule_mu(1, &cfg, 7.0) < 1.0 / (2.0 * 7.0));
    }

    fn half_sq(y: &DVector<f64>) -> Result<f64> {
        Ok(0.5 * y.norm_squared())
    }

    #[test]
    fn backtrack_examples() {
        let cfg = SolverConfig { c: 0.5, kappa: 0.5, ..SolverConfig::default() };
        let y = DVector::from_vec(vec![1.0, -2.0]);
        let v = half_sq(&y).unwrap();
        let bt = backtrack(half_sq, &y, &y, v, &cfg, 1.0).unwrap();
        assert_eq!((bt.gamma, bt.shrinks), (1.0, 0));
        let bt = backtrack(half_sq, &y, &y, v, &cfg, 2.0).unwrap();
        assert_eq!((bt.gamma, bt.shrinks), (1.0, 1));
        let zero = DVector::zeros(2);
        let bt = backtrack(half_sq, &y, &zero, v, &cfg, 3.5).unwrap();
        assert_eq!((bt.gamma, bt.shrinks), (3.5, 0));
    }

    #[test]
    fn backtrack_cap_is_an_error() {
        let cfg = SolverConfig { max_shrinks: 5, ..SolverConfig::default() };
        let y = DVector::from_vec(vec![1.0]);
        // gradient pointing uphill: the test can never pass
        let wrong = DVector::from_vec(vec![-1.0]);
        let err = backtrack(half_sq, &y, &wrong, 0.5, &cfg, 1.0).unwrap_err();
        assert!(matches!(err, Error::Backtracking { max_shrinks: 5, .. }));
    }

    #[test]
    fn backtrack_rejects_nan_trials() {
        let cfg = SolverConfig { c: 0.5, ..SolverConfig::default() };
        let y = DVector::from_vec(vec![1.0]);
        let j = |p: &DVector<f64>| Ok(if p[0] < 0.0 { f64::NAN } else { 0.5 * p[0] * p[0] });
        let bt = backtrack(j, &y, &y, 0.5, &cfg, 4.0).unwrap();
        assert_eq!(bt.gamma, 1.0);
    }

    fn record(value: f64, gamma: f64) -> IterationRecord<f64> {
        IterationRecord {
            n: 1,
            mu: 0.1,
            gamma_bar: 1.0,
            gamma,
            shrinks: 0,
            grad_norm: 1.0,
            grad_norm_sq: 1.0,
            value,
            trial_value: value,
            unsmoothed_value: value,
        }
    }

    #[test]
    fn stepsize_guess_examples() {
        let cfg = SolverConfig { gamma_first: 0.7, ..SolverConfig::default() };
        assert_eq!(initial_stepsize_guess(&[], 1.0, 1.0, &cfg), 0.7);
        assert_eq!(initial_stepsize_guess(&[record(10.0, 0.3)], 9.0, 4.0, &cfg), 0.5);
        assert_eq!(initial_stepsize_guess(&[record(9.0, 0.2)], 10.0, 4.0, &cfg), 0.2);
        assert_eq!(initial_stepsize_guess(&[record(9.0, 1e-9)], 10.0, 4.0, &cfg), 1e-5);
        assert_eq!(initial_stepsize_guess(&[record(10.0, 0.3)], 10.0 - 1e-12, 4.0, &cfg), 1e-5);
    }

    #[test]
    fn quadratic_converges() {
        let q = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let problem = PenalizedQuadratic::smooth(q.clone(), b.clone()).unwrap();
        let cfg = SolverConfig { max_iters: 200, ..SolverConfig::default() };
        let trace = run(&problem, DVector::zeros(3), &cfg).unwrap();
        assert!(trace.min_grad_norm().unwrap() <= 1e-6);
        let exact = q.lu().solve(&b).unwrap();
        assert!((&trace.final_point - exact).norm() < 1e-5);
        replay_armijo(&trace, &cfg);
    }

    fn replay_armijo<P>(trace: &SolverTrace<f64, P>, cfg: &SolverConfig<f64>) {
        for r in &trace.records {
            assert!(armijo_holds(r.trial_value, r.value, cfg.c, r.gamma, r.grad_norm_sq), "iteration {}", r.n);
            assert!(r.shrinks <= cfg.max_shrinks);
        }
    }

    #[test]
    fn absolute_value_smoothing() {
        let problem = PenalizedQuadratic::<f64>::abs_value(1.0).unwrap();
        let cfg = SolverConfig::default();
        let trace = run(&problem, DVector::from_element(1, 2.0), &cfg).unwrap();
        assert_eq!(trace.records.len(), 500);
        assert!(trace.min_grad_norm().unwrap() <= 0.05);
        assert!(trace.final_point[0].abs() < 1e-2);
        replay_armijo(&trace, &cfg);
        for (i, r) in trace.records.iter().enumerate() {
            assert_eq!(r.mu, schedule_mu(i + 1, &cfg, 1.0));
        }
        let env = rate_envelope_check(&trace, &cfg, 1).unwrap();
        assert!(env.holds);
    }

    #[test]
    fn grad_tol_stops_early() {
        let problem = PenalizedQuadratic::smooth(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let cfg = SolverConfig { grad_tol: 1e-8, ..SolverConfig::default() };
        let trace = run(&problem, DVector::zeros(2), &cfg).unwrap();
        assert_eq!(trace.termination, Termination::GradTol);
        assert!(trace.records.len() < 500);
        assert!(trace.records.last().unwrap().grad_norm <= 1e-8);
    }

    #[test]
    fn deterministic() {
        let problem = PenalizedQuadratic::abs_value(0.5).unwrap();
        let cfg = SolverConfig { max_iters: 100, ..SolverConfig::default() };
        let a = run(&problem, DVector::from_element(1, 3.0), &cfg).unwrap();
        let b = run(&problem, DVector::from_element(1, 3.0), &cfg).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn invalid_config() {
        let problem = PenalizedQuadratic::<f64>::abs_value(1.0).unwrap();
        for cfg in [
            SolverConfig { tau: 2.0, ..SolverConfig::default() },
            SolverConfig { c: 1.0, ..SolverConfig::default() },
            SolverConfig { kappa: 0.0, ..SolverConfig::default() },
            SolverConfig { alpha: 1.0, ..SolverConfig::default() },
            SolverConfig { max_iters: 0, ..SolverConfig::default() },
        ] {
            assert!(run(&problem, DVector::from_element(1, 1.0), &cfg).is_err());
        }
    }

    #[test]
    fn envelope_examples() {
        let constant = vec![1.0; 100];
        assert!(!rate_envelope_check_split(&constant, 2.0, 1, 50).unwrap().holds);
        let decaying: Vec<f64> = (1..=100).map(|n| (n as f64).powf(-0.5)).collect();
        assert!(rate_envelope_check_split(&decaying, 2.0, 1, 50).unwrap().holds);
        assert!(rate_envelope_check_split(&decaying, 2.0, 0, 50).is_err());
        assert!(rate_envelope_check_split(&decaying[..10], 2.0, 5, 10).is_err());
    }

    #[test]
    fn trace_csv_one_row_per_iteration() {
        let problem = PenalizedQuadratic::<f64>::abs_value(1.0).unwrap();
        let cfg = SolverConfig { max_iters: 17, ..SolverConfig::default() };
        let trace = run(&problem, DVector::from_element(1, 2.0), &cfg).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 18);
        assert_eq!(lines[0], "n,mu,gamma_bar,gamma,shrinks,grad_norm,smoothed_value,unsmoothed_value");
    }
}
