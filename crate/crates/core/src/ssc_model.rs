//! Sparse spectral clustering objective on the Grassmannian,
//!
//! ```text
//! V ↦ Tr(UᵀLU) + λ r(UUᵀ),   U = Ψ_S(V),
//! ```
//!
//! exposed to the solver with `r` replaced by its Moreau envelope.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::parametrization::{BasisMatrix, CayleyAt, ParamPoint};
use crate::penalties::PenaltySpec;
use crate::scalar::Scalar;
use crate::solver::SmoothedProblem;

#[derive(Debug, Clone)]
pub struct SscProblem<T: Scalar> {
    laplacian: DMatrix<T>,
    k: usize,
    penalty: PenaltySpec<T>,
    basis: BasisMatrix<T>,
}

fn check_laplacian_shape<T: Scalar>(l: &DMatrix<T>, u: &DMatrix<T>) -> Result<()> {
    let n = l.nrows();
    if l.ncols() != n || u.nrows() != n {
        return Err(Error::dim("Laplacian/U", format!("{n}x{n} and {n}xk"), format!("{}x{} and {}x{}", l.nrows(), l.ncols(), u.nrows(), u.ncols())));
    }
    Ok(())
}

/// `Tr(UᵀLU)`.
pub fn h_value<T: Scalar>(l: &DMatrix<T>, u: &DMatrix<T>) -> Result<T> {
    check_laplacian_shape(l, u)?;
    Ok(u.dot(&(l * u)))
}

/// `2LU`, the gradient of `Tr(UᵀLU)` for symmetric `L`.
pub fn h_grad<T: Scalar>(l: &DMatrix<T>, u: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_laplacian_shape(l, u)?;
    Ok(l * u * T::lit(2.0))
}

/// `UUᵀ`, made exactly symmetric.
pub fn gram<T: Scalar>(u: &DMatrix<T>) -> DMatrix<T> {
    let mut m = u * u.transpose();
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            m[(j, i)] = m[(i, j)];
        }
    }
    m
}

impl<T: Scalar> SscProblem<T> {
    pub fn new(laplacian: DMatrix<T>, k: usize, penalty: PenaltySpec<T>, basis: BasisMatrix<T>) -> Result<Self> {
        let n = laplacian.nrows();
        if laplacian.ncols() != n {
            return Err(Error::dim("Laplacian", "square", format!("{}x{}", n, laplacian.ncols())));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("cluster count k={k} must satisfy 1 <= k <= N={n}")));
        }
        if basis.n() != n {
            return Err(Error::dim("basis matrix", n, basis.n()));
        }
        let asym = (&laplacian - laplacian.transpose()).norm();
        if asym > T::exact_tol() {
            return Err(Error::InvalidParameter(format!("Laplacian is not symmetric (‖L − Lᵀ‖ = {asym})")));
        }
        let slack = if T::exact_tol() > T::lit(1e-8) { T::exact_tol() * T::lit(100.0) } else { T::lit(1e-8) };
        let eigs = laplacian.clone().symmetric_eigenvalues();
        for &e in eigs.iter() {
            if e < -slack || e > T::lit(2.0) + slack {
                return Err(Error::InvalidParameter(format!(
                    "Laplacian eigenvalue {e} outside the normalized range [0, 2]"
                )));
            }
        }
        Ok(Self {
            laplacian,
            k,
            penalty,
            basis,
        })
    }

    pub fn laplacian(&self) -> &DMatrix<T> {
        &self.laplacian
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.laplacian.nrows()
    }

    pub fn penalty(&self) -> &PenaltySpec<T> {
        &self.penalty
    }

    pub fn basis(&self) -> &BasisMatrix<T> {
        &self.basis
    }

    fn penalized(&self) -> bool {
        self.penalty.lambda() > T::zero()
    }

    fn check_point(&self, v: &ParamPoint<T>) -> Result<()> {
        if v.n() != self.n() || v.k() != self.k {
            return Err(Error::dim("SSC parameter", format!("Q_{{{},{}}}", self.n(), self.k), format!("Q_{{{},{}}}", v.n(), v.k())));
        }
        Ok(())
    }

    /// `U = Ψ_S(V)`.
    pub fn subspace(&self, v: &ParamPoint<T>) -> Result<DMatrix<T>> {
        self.check_point(v)?;
        Ok(CayleyAt::new(&self.basis, v)?.into_point())
    }

    /// `(W + Wᵀ) U` with `W = ∇g_μ(UUᵀ)`.
    pub fn g_chain_grad(&self, u: &DMatrix<T>, mu: T) -> Result<DMatrix<T>> {
        self.penalty.check_mu(mu)?;
        if !self.penalized() {
            return Ok(DMatrix::zeros(u.nrows(), u.ncols()));
        }
        let w = self.penalty.moreau_grad(mu, &gram(u))?;
        Ok((&w + w.transpose()) * u)
    }

    pub fn smoothed_value(&self, v: &ParamPoint<T>, mu: T) -> Result<T> {
        self.penalty.check_mu(mu)?;
        let u = self.subspace(v)?;
        let h = h_value(&self.laplacian, &u)?;
        if !self.penalized() {
            return Ok(h);
        }
        Ok(h + self.penalty.moreau_value(mu, &gram(&u))?)
    }

    pub fn smoothed_grad(&self, v: &ParamPoint<T>, mu: T) -> Result<ParamPoint<T>> {
        Ok(self.smoothed_value_and_grad(v, mu)?.1)
    }

    pub fn smoothed_value_and_grad(&self, v: &ParamPoint<T>, mu: T) -> Result<(T, ParamPoint<T>)> {
        self.penalty.check_mu(mu)?;
        self.check_point(v)?;
        let at = CayleyAt::new(&self.basis, v)?;
        let u = at.point();
        let lu = &self.laplacian * u;
        let mut value = u.dot(&lu);
        let mut euclid = lu * T::lit(2.0);
        if self.penalized() {
            let (gv, w) = self.penalty.moreau_value_and_grad(mu, &gram(u))?;
            value += gv;
            euclid += (&w + w.transpose()) * u;
        }
        Ok((value, at.adjoint(&euclid)?))
    }

    /// `Tr(UᵀLU) + λ r(UUᵀ)` without smoothing.
    pub fn unsmoothed_value(&self, v: &ParamPoint<T>) -> Result<T> {
        let u = self.subspace(v)?;
        let h = h_value(&self.laplacian, &u)?;
        if !self.penalized() {
            return Ok(h);
        }
        Ok(h + self.penalty.value(&gram(&u)))
    }
}

impl<T: Scalar> SmoothedProblem<T> for SscProblem<T> {
    type Point = ParamPoint<T>;

    fn value(&self, y: &ParamPoint<T>, mu: T) -> Result<T> {
        self.smoothed_value(y, mu)
    }

    fn grad(&self, y: &ParamPoint<T>, mu: T) -> Result<ParamPoint<T>> {
        self.smoothed_grad(y, mu)
    }

    fn value_and_grad(&self, y: &ParamPoint<T>, mu: T) -> Result<(T, ParamPoint<T>)> {
        self.smoothed_value_and_grad(y, mu)
    }

    fn unsmoothed_value(&self, y: &ParamPoint<T>) -> Result<T> {
        SscProblem::unsmoothed_value(self, y)
    }

    fn rho_eff(&self) -> T {
        self.penalty.rho_eff()
    }
}
