//! Weakly convex separable penalties `λ·r` with closed-form proximity
//! operators and exact Moreau envelopes.
//!
//! Every penalty here acts entrywise: on a matrix `Z` the penalty value is
//! `λ Σ_ij r(Z_ij)`. For a smoothing parameter `μ` with `μ·ρ < 1` the
//! proximal subproblem
//!
//! ```text
//! prox(z) = argmin_t  λ r(t) + (t − z)² / (2μ)
//! ```
//!
//! is strongly convex, so the prox is single valued and the Moreau envelope
//! `λr(prox(z)) + (prox(z) − z)²/(2μ)` is continuously differentiable with
//! gradient `(z − prox(z)) / μ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape of the scalar penalty `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PenaltyKind<T> {
    /// `r(t) = |t|`.
    L1,
    /// Minimax concave penalty with flat region beyond `beta`:
    /// `r(t) = |t| − t²/(2β)` for `|t| ≤ β`, `β/2` otherwise.
    Mcp { beta: T },
    /// SCAD with unit inner threshold and outer threshold `a`:
    /// `|t|` on `[0,1]`, `(2a|t| − t² − 1)/(2(a−1))` on `(1,a]`, `(a+1)/2` beyond.
    Scad { a: T },
}

impl<T> PenaltyKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltyKind::L1 => "l1",
            PenaltyKind::Mcp { .. } => "mcp",
            PenaltyKind::Scad { .. } => "scad",
        }
    }
}

/// A penalty `λ·r` together with the modulus used by the smoothing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec<T> {
    kind: PenaltyKind<T>,
    lambda: T,
    rho_floor: T,
}

/// Default SCAD outer threshold (Fan and Li).
pub const SCAD_DEFAULT_A: f64 = 3.7;

/// Default modulus substituted when `λ·r` is convex (`ρ = 0`).
pub const DEFAULT_RHO_FLOOR: f64 = 1.0;

impl<T: Scalar> PenaltySpec<T> {
    pub fn new(kind: PenaltyKind<T>, lambda: T) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "penalty lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        match kind {
            PenaltyKind::L1 => {}
            PenaltyKind::Mcp { beta } => {
                if !(beta > T::zero()) || !beta.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "MCP beta must be positive, got {beta}"
                    )));
                }
            }
            PenaltyKind::Scad { a } => {
                if !(a > T::lit(2.0)) || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "SCAD a must exceed 2, got {a}"
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            lambda,
            rho_floor: T::lit(DEFAULT_RHO_FLOOR),
        })
    }

    pub fn l1(lambda: T) -> Result<Self> {
        Self::new(PenaltyKind::L1, lambda)
    }

    pub fn mcp(lambda: T, beta: T) -> Result<Self> {
        Self::new(PenaltyKind::Mcp { beta }, lambda)
    }

    pub fn scad(lambda: T, a: T) -> Result<Self> {
        Self::new(PenaltyKind::Scad { a }, lambda)
    }

    /// Replaces the modulus used by the schedule when the penalty is convex.
    pub fn with_rho_floor(mut self, floor: T) -> Result<Self> {
        if !(floor > T::zero()) || !floor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rho floor must be positive, got {floor}"
            )));
        }
        self.rho_floor = floor;
        Ok(self)
    }

    pub fn kind(&self) -> PenaltyKind<T> {
        self.kind
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn rho_floor(&self) -> T {
        self.rho_floor
    }

    /// Weak-convexity modulus of `λ·r`.
    pub fn rho(&self) -> T {
        match self.kind {
            PenaltyKind::L1 => T::zero(),
            PenaltyKind::Mcp { beta } => self.lambda / beta,
            PenaltyKind::Scad { a } => self.lambda / (a - T::one()),
        }
    }

    /// Modulus fed to the smoothing schedule; always positive.
    pub fn rho_eff(&self) -> T {
        let rho = self.rho();
        if rho > T::zero() {
            rho
        } else {
            self.rho_floor
        }
    }

    /// `μ·ρ < 1` with `μ > 0`.
    pub fn check_mu(&self, mu: T) -> Result<()> {
        let rho = self.rho();
        if !(mu > T::zero()) || !mu.is_finite() || !(mu * rho < T::one()) {
            return Err(Error::Schedule {
                mu: mu.to_f64_lossy(),
                rho: rho.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// `λ r(t)`.
    pub fn value_scalar(&self, t: T) -> T {
        let at = t.abs();
        let r = match self.kind {
            PenaltyKind::L1 => at,
            PenaltyKind::Mcp { beta } => {
                if at <= beta {
                    at - t * t / (T::lit(2.0) * beta)
                } else {
                    beta / T::lit(2.0)
                }
            }
            PenaltyKind::Scad { a } => {
                let one = T::one();
                if at <= one {
                    at
                } else if at <= a {
                    (T::lit(2.0) * a * at - t * t - one) / (T::lit(2.0) * (a - one))
                } else {
                    (a + one) / T::lit(2.0)
                }
            }
        };
        self.lambda * r
    }

    /// `λ Σ r(Z_ij)`.
    pub fn value(&self, z: &DMatrix<T>) -> T {
        z.iter().fold(T::zero(), |acc, &t| acc + self.value_scalar(t))
    }

    /// Closed-form prox without the precondition check.
    #[inline]
    fn prox_unchecked(&self, mu: T, z: T) -> T {
        let s = mu * self.lambda;
        let az = z.abs();
        match self.kind {
            PenaltyKind::L1 => soft_threshold(z, s),
            PenaltyKind::Mcp { beta } => {
                if az <= s {
                    T::zero()
                } else if az <= beta {
                    copysign(az - s, z) / (T::one() - s / beta)
                } else {
                    z
                }
            }
            PenaltyKind::Scad { a } => {
                let one = T::one();
                if az <= one + s {
                    soft_threshold(z, s)
                } else if az <= a {
                    copysign((a - one) * az - s * a, z) / (a - one - s)
                } else {
                    z
                }
            }
        }
    }

    pub fn prox_scalar(&self, mu: T, z: T) -> Result<T> {
        self.check_mu(mu)?;
        Ok(self.prox_unchecked(mu, z))
    }

    /// Entrywise prox.
    pub fn prox_matrix(&self, mu: T, z: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.check_mu(mu)?;
        Ok(z.map(|t| self.prox_unchecked(mu, t)))
    }

    /// Moreau envelope value, evaluated through the prox.
    pub fn moreau_value(&self, mu: T, z: &DMatrix<T>) -> Result<T> {
        self.check_mu(mu)?;
        let two_mu = T::lit(2.0) * mu;
        Ok(z.iter().fold(T::zero(), |acc, &t| {
            let p = self.prox_unchecked(mu, t);
            let d = p - t;
            acc + self.value_scalar(p) + d * d / two_mu
        }))
    }

    /// Gradient of the Moreau envelope, `(Z − prox(Z)) / μ`.
    pub fn moreau_grad(&self, mu: T, z: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.check_mu(mu)?;
        Ok(z.map(|t| (t - self.prox_unchecked(mu, t)) / mu))
    }

    /// Envelope value and gradient in one pass over `Z`.
    pub fn moreau_value_and_grad(&self, mu: T, z: &DMatrix<T>) -> Result<(T, DMatrix<T>)> {
        self.check_mu(mu)?;
        let two_mu = T::lit(2.0) * mu;
        let mut value = T::zero();
        let grad = z.map(|t| {
            let p = self.prox_unchecked(mu, t);
            let d = p - t;
            value = value + self.value_scalar(p) + d * d / two_mu;
            -d / mu
        });
        Ok((value, grad))
    }

    /// Scalar envelope value, `λr(p) + (p − z)²/(2μ)`.
    pub fn moreau_scalar(&self, mu: T, z: T) -> Result<T> {
        let p = self.prox_scalar(mu, z)?;
        let d = p - z;
        Ok(self.value_scalar(p) + d * d / (T::lit(2.0) * mu))
    }

    /// Scalar envelope gradient.
    pub fn moreau_grad_scalar(&self, mu: T, z: T) -> Result<T> {
        Ok((z - self.prox_scalar(mu, z)?) / mu)
    }
}

#[inline]
fn copysign<T: Scalar>(magnitude: T, sign_of: T) -> T {
    if sign_of < T::zero() {
        -magnitude
    } else {
        magnitude
    }
}

/// `sign(z)·max(|z| − s, 0)`.
#[inline]
pub fn soft_threshold<T: Scalar>(z: T, s: T) -> T {
    let az = z.abs();
    if az <= s {
        T::zero()
    } else {
        copysign(az - s, z)
    }
}
