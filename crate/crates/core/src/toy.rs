//! Small built-in problems with `F = G = id` for demos and solver tests.

use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::penalties::PenaltySpec;
use crate::scalar::Scalar;
use crate::solver::SmoothedProblem;

/// `½ yᵀQy − bᵀy + λ r(y)` with an optional separable penalty.
#[derive(Debug, Clone)]
pub struct PenalizedQuadratic<T: Scalar> {
    q: DMatrix<T>,
    b: DVector<T>,
    penalty: Option<PenaltySpec<T>>,
}

fn as_column<T: Scalar>(y: &DVector<T>) -> DMatrix<T> {
    y.clone().reshape_generic(Dyn(y.len()), Dyn(1))
}

impl<T: Scalar> PenalizedQuadratic<T> {
    pub fn new(q: DMatrix<T>, b: DVector<T>, penalty: Option<PenaltySpec<T>>) -> Result<Self> {
        let n = b.len();
        if q.shape() != (n, n) {
            return Err(Error::dim("quadratic Q", format!("{n}x{n}"), format!("{}x{}", q.nrows(), q.ncols())));
        }
        if (&q - q.transpose()).norm() > T::exact_tol() * (T::one() + q.norm()) {
            return Err(Error::InvalidParameter("quadratic Q must be symmetric".into()));
        }
        Ok(Self { q, b, penalty })
    }

    /// Smooth quadratic; the smoothing parameter has no effect.
    pub fn smooth(q: DMatrix<T>, b: DVector<T>) -> Result<Self> {
        Self::new(q, b, None)
    }

    /// One-dimensional `λ|y|`.
    pub fn abs_value(lambda: T) -> Result<Self> {
        Self::new(DMatrix::zeros(1, 1), DVector::zeros(1), Some(PenaltySpec::l1(lambda)?))
    }

    /// `½‖Ay − c‖² + λ r(y)` up to the constant `½‖c‖²`.
    pub fn least_squares(a: &DMatrix<T>, c: &DVector<T>, penalty: PenaltySpec<T>) -> Result<Self> {
        if a.nrows() != c.len() {
            return Err(Error::dim("least squares rhs", a.nrows(), c.len()));
        }
        Self::new(a.transpose() * a, a.transpose() * c, Some(penalty))
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    fn smooth_part(&self, y: &DVector<T>) -> (T, DVector<T>) {
        let qy = &self.q * y;
        let value = T::lit(0.5) * y.dot(&qy) - self.b.dot(y);
        (value, qy - &self.b)
    }
}

impl<T: Scalar> SmoothedProblem<T> for PenalizedQuadratic<T> {
    type Point = DVector<T>;

    fn value(&self, y: &DVector<T>, mu: T) -> Result<T> {
        let (h, _) = self.smooth_part(y);
        match &self.penalty {
            Some(p) => Ok(h + p.moreau_value(mu, &as_column(y))?),
            None => Ok(h),
        }
    }

    fn grad(&self, y: &DVector<T>, mu: T) -> Result<DVector<T>> {
        Ok(self.value_and_grad(y, mu)?.1)
    }

    fn value_and_grad(&self, y: &DVector<T>, mu: T) -> Result<(T, DVector<T>)> {
        let (h, gh) = self.smooth_part(y);
        match &self.penalty {
            Some(p) => {
                let (gv, gg) = p.moreau_value_and_grad(mu, &as_column(y))?;
                Ok((h + gv, gh + gg.column(0)))
            }
            None => Ok((h, gh)),
        }
    }

    fn unsmoothed_value(&self, y: &DVector<T>) -> Result<T> {
        let (h, _) = self.smooth_part(y);
        Ok(h + self.penalty.map_or(T::zero(), |p| p.value(&as_column(y))))
    }

    fn rho_eff(&self) -> T {
        self.penalty.map_or(T::one(), |p| p.rho_eff())
    }
}
