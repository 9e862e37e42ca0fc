//! Generalized left-localized Cayley transform parametrizing the Grassmann
//! manifold `Gr(k, N)` by the linear space
//!
//! ```text
//! Q_{N,k} = { [[A, −Bᵀ], [B, 0]] : Aᵀ = −A ∈ R^{k×k}, B ∈ R^{(N−k)×k} }
//! ```
//!
//! through `Ψ_S(V) = S (I − V)(I + V)⁻¹ I_{N×k}`.
//!
//! With `M = I + V` the block structure gives `M⁻¹ r` from a single k×k
//! solve against `K = I + A + BᵀB`:
//!
//! ```text
//! x₁ = K⁻¹ (r₁ + Bᵀ r₂),   x₂ = r₂ − B x₁
//! ```
//!
//! and `M⁻ᵀ r` from `Kᵀ = I − A + BᵀB`:
//!
//! ```text
//! x₁ = K⁻ᵀ (r₁ − Bᵀ r₂),   x₂ = r₂ + B x₁
//! ```
//!
//! `K` has symmetric part `I + BᵀB ≻ 0`, so it is always invertible. Since
//! `(I − V) = 2I − M`, the image is `U = S (2Y − I_{N×k})` with `Y = M⁻¹ I_{N×k}`,
//! and the differential is `DΨ_S(V)[H] = −2 S M⁻¹ H Y`.
//!
//! The inner product on `Q_{N,k}` is the Frobenius inner product of the
//! assembled N×N matrices, i.e. `⟨A, A'⟩ + 2⟨B, B'⟩`.

use nalgebra::{DMatrix, LU};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point `V ∈ Q_{N,k}` stored by its blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint<T: Scalar> {
    a: DMatrix<T>,
    b: DMatrix<T>,
}

impl<T: Scalar> ParamPoint<T> {
    pub fn zeros(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension k={k} must satisfy 1 <= k <= N={n}"
            )));
        }
        Ok(Self {
            a: DMatrix::zeros(k, k),
            b: DMatrix::zeros(n - k, k),
        })
    }

    /// Builds a point from its blocks. `a` must be skew-symmetric up to
    /// rounding; it is stored as its exact skew part.
    pub fn new(a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        let k = a.nrows();
        if a.ncols() != k || k == 0 {
            return Err(Error::dim("ParamPoint A block", "nonempty square", format!("{}x{}", a.nrows(), a.ncols())));
        }
        if b.ncols() != k {
            return Err(Error::dim("ParamPoint B block columns", k, b.ncols()));
        }
        let asym = (&a + a.transpose()).norm();
        if asym > T::exact_tol() * (T::one() + a.norm()) {
            return Err(Error::InvalidParameter(format!(
                "A block is not skew-symmetric (‖A + Aᵀ‖ = {asym})"
            )));
        }
        Ok(Self::from_blocks_skew(a, b))
    }

    fn from_blocks_skew(a: DMatrix<T>, b: DMatrix<T>) -> Self {
        let half = T::lit(0.5);
        let a = (&a - a.transpose()) * half;
        Self { a, b }
    }

    /// Ambient dimension `N`.
    pub fn n(&self) -> usize {
        self.a.nrows() + self.b.nrows()
    }

    /// Subspace dimension `k`.
    pub fn k(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    /// Dimension of `Q_{N,k}` as a real vector space.
    pub fn dim(&self) -> usize {
        let k = self.k();
        k * (k - 1) / 2 + self.b.len()
    }

    /// The `idx`-th coordinate basis element: strictly-upper `A` entries
    /// first (row-major), then `B` entries (column-major).
    pub fn basis_element(n: usize, k: usize, idx: usize) -> Result<Self> {
        let mut e = Self::zeros(n, k)?;
        let n_a = k * (k - 1) / 2;
        if idx < n_a {
            let mut c = 0;
            for i in 0..k {
                for j in (i + 1)..k {
                    if c == idx {
                        e.a[(i, j)] = T::one();
                        e.a[(j, i)] = -T::one();
                        return Ok(e);
                    }
                    c += 1;
                }
            }
            unreachable!()
        } else if idx - n_a < e.b.len() {
            e.b[idx - n_a] = T::one();
            Ok(e)
        } else {
            Err(Error::InvalidParameter(format!("basis index {idx} out of range")))
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.a.shape() == other.a.shape() && self.b.shape() == other.b.shape()
    }

    /// Frobenius inner product of the assembled matrices.
    pub fn dot(&self, other: &Self) -> T {
        self.a.dot(&other.a) + T::lit(2.0) * self.b.dot(&other.b)
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    /// `self + alpha · other`.
    pub fn add_scaled(&self, alpha: T, other: &Self) -> Self {
        Self {
            a: &self.a + &other.a * alpha,
            b: &self.b + &other.b * alpha,
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        Self {
            a: &self.a * alpha,
            b: &self.b * alpha,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(self.b.iter()).all(|x| x.is_finite())
    }

    /// The N×N matrix `[[A, −Bᵀ], [B, 0]]`.
    pub fn assemble(&self) -> DMatrix<T> {
        let (n, k) = (self.n(), self.k());
        let mut v = DMatrix::zeros(n, n);
        v.view_mut((0, 0), (k, k)).copy_from(&self.a);
        v.view_mut((k, 0), (n - k, k)).copy_from(&self.b);
        v.view_mut((0, k), (k, n - k)).copy_from(&(-self.b.transpose()));
        v
    }

    /// Orthogonal projection of an N×N matrix onto `Q_{N,k}`: skew part with
    /// the lower-right block zeroed.
    pub fn project(m: &DMatrix<T>, k: usize) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::dim("project_Q input", "square", format!("{}x{}", m.nrows(), m.ncols())));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("k={k} out of range for N={n}")));
        }
        let half = T::lit(0.5);
        let m11 = m.view((0, 0), (k, k));
        let a = (m11 - m11.transpose()) * half;
        let b = (m.view((k, 0), (n - k, k)) - m.view((0, k), (k, n - k)).transpose()) * half;
        Ok(Self { a, b })
    }
}

/// Assembles `V` as an N×N matrix.
pub fn assemble<T: Scalar>(v: &ParamPoint<T>) -> DMatrix<T> {
    v.assemble()
}

/// Nearest point of `Q_{N,k}` in Frobenius norm.
pub fn project_q<T: Scalar>(m: &DMatrix<T>, k: usize) -> Result<ParamPoint<T>> {
    ParamPoint::project(m, k)
}

/// Orthogonal N×N matrix `S` centring the parametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix<T: Scalar>(DMatrix<T>);

impl<T: Scalar> BasisMatrix<T> {
    pub fn new(s: DMatrix<T>) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n || n == 0 {
            return Err(Error::dim("basis matrix", "nonempty square", format!("{}x{}", s.nrows(), s.ncols())));
        }
        let defect = (s.transpose() * &s - DMatrix::identity(n, n)).norm();
        if defect > T::exact_tol() {
            return Err(Error::InvalidParameter(format!(
                "basis matrix is not orthogonal (‖SᵀS − I‖ = {defect})"
            )));
        }
        Ok(Self(s))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Orthogonal completion of `u0` so that `Ψ_S(0)` spans the columns of
    /// `u0`; the identity when no warm start is given.
    pub fn select(n: usize, u0: Option<&DMatrix<T>>) -> Result<Self> {
        let Some(u0) = u0 else {
            return Ok(Self::identity(n));
        };
        let k = u0.ncols();
        if u0.nrows() != n || k == 0 || k > n {
            return Err(Error::dim("warm start U0", format!("{n}xk with 1<=k<={n}"), format!("{}x{}", u0.nrows(), k)));
        }
        let tol = if T::exact_tol() > T::lit(1e-8) { T::exact_tol() } else { T::lit(1e-8) };
        let defect = (u0.transpose() * u0 - DMatrix::identity(k, k)).norm();
        if defect > tol {
            return Err(Error::InvalidParameter(format!(
                "warm start does not have orthonormal columns (‖U0ᵀU0 − I‖ = {defect})"
            )));
        }
        let mut x = DMatrix::zeros(n, n + k);
        x.view_mut((0, 0), (n, k)).copy_from(u0);
        x.view_mut((0, k), (n, n)).fill_with_identity();
        let mut q = x.qr().q();
        // Householder QR returns the leading columns up to sign.
        for j in 0..k {
            if q.column(j).dot(&u0.column(j)) < T::zero() {
                q.column_mut(j).neg_mut();
            }
        }
        Self::new(q)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }
}

/// `Ψ_S` and its derivatives at a fixed `V`, sharing one k×k factorization.
pub struct CayleyAt<'a, T: Scalar> {
    s: &'a BasisMatrix<T>,
    v: &'a ParamPoint<T>,
    lu: LU<T, nalgebra::Dyn, nalgebra::Dyn>,
    lu_t: LU<T, nalgebra::Dyn, nalgebra::Dyn>,
    y: DMatrix<T>,
    u: DMatrix<T>,
}

impl<'a, T: Scalar> CayleyAt<'a, T> {
    pub fn new(s: &'a BasisMatrix<T>, v: &'a ParamPoint<T>) -> Result<Self> {
        let (n, k) = (v.n(), v.k());
        if s.n() != n {
            return Err(Error::dim("Cayley basis", n, s.n()));
        }
        let btb = v.b.transpose() * &v.b;
        let eye = DMatrix::<T>::identity(k, k);
        let kmat = &eye + &v.a + &btb;
        let kmat_t = &eye - &v.a + &btb;
        let lu = kmat.lu();
        let lu_t = kmat_t.lu();
        let y1 = lu
            .solve(&eye)
            .ok_or_else(|| Error::Numerical("singular I + A + BᵀB in Cayley transform".into()))?;
        let y2 = -(&v.b * &y1);
        let mut y = DMatrix::zeros(n, k);
        y.view_mut((0, 0), (k, k)).copy_from(&y1);
        y.view_mut((k, 0), (n - k, k)).copy_from(&y2);
        let mut inner = &y * T::lit(2.0);
        for j in 0..k {
            inner[(j, j)] -= T::one();
        }
        let u = s.as_matrix() * inner;
        Ok(Self { s, v, lu, lu_t, y, u })
    }

    /// `U = Ψ_S(V)`, an N×k matrix with orthonormal columns.
    pub fn point(&self) -> &DMatrix<T> {
        &self.u
    }

    pub fn into_point(self) -> DMatrix<T> {
        self.u
    }

    fn split(&self, r: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
        let k = self.v.k();
        let n = self.v.n();
        (
            r.view((0, 0), (k, r.ncols())).into_owned(),
            r.view((k, 0), (n - k, r.ncols())).into_owned(),
        )
    }

    fn join(&self, x1: DMatrix<T>, x2: DMatrix<T>) -> DMatrix<T> {
        let k = x1.nrows();
        let c = x1.ncols();
        let mut x = DMatrix::zeros(self.v.n(), c);
        x.view_mut((0, 0), (k, c)).copy_from(&x1);
        x.view_mut((k, 0), (x2.nrows(), c)).copy_from(&x2);
        x
    }

    /// `(I + V)⁻¹ r`.
    fn solve(&self, r: &DMatrix<T>) -> Result<DMatrix<T>> {
        let (r1, r2) = self.split(r);
        let b = &self.v.b;
        let x1 = self
            .lu
            .solve(&(r1 + b.transpose() * &r2))
            .ok_or_else(|| Error::Numerical("singular solve in Cayley differential".into()))?;
        let x2 = r2 - b * &x1;
        Ok(self.join(x1, x2))
    }

    /// `(I + V)⁻ᵀ r`.
    fn solve_transpose(&self, r: &DMatrix<T>) -> Result<DMatrix<T>> {
        let (r1, r2) = self.split(r);
        let b = &self.v.b;
        let x1 = self
            .lu_t
            .solve(&(r1 - b.transpose() * &r2))
            .ok_or_else(|| Error::Numerical("singular solve in Cayley adjoint".into()))?;
        let x2 = r2 + b * &x1;
        Ok(self.join(x1, x2))
    }

    /// `DΨ_S(V)[H] = −2 S (I + V)⁻¹ H Y`.
    pub fn differential(&self, h: &ParamPoint<T>) -> Result<DMatrix<T>> {
        if !h.same_shape(self.v) {
            return Err(Error::dim("Cayley differential direction", format!("Q_{{{},{}}}", self.v.n(), self.v.k()), format!("Q_{{{},{}}}", h.n(), h.k())));
        }
        let (y1, y2) = self.split(&self.y);
        // H Y = [A_h y₁ − B_hᵀ y₂ ; B_h y₁]
        let top = &h.a * &y1 - h.b.transpose() * &y2;
        let bottom = &h.b * &y1;
        let hy = self.join(top, bottom);
        let x = self.solve(&hy)?;
        Ok(self.s.as_matrix() * x * T::lit(-2.0))
    }

    /// Adjoint of the differential: `P_Q(−2 (I + V)⁻ᵀ Sᵀ Z Yᵀ)`.
    pub fn adjoint(&self, z: &DMatrix<T>) -> Result<ParamPoint<T>> {
        let (n, k) = (self.v.n(), self.v.k());
        if z.shape() != (n, k) {
            return Err(Error::dim("Cayley adjoint argument", format!("{n}x{k}"), format!("{}x{}", z.nrows(), z.ncols())));
        }
        let x = self.solve_transpose(&(self.s.as_matrix().transpose() * z))?;
        let (x1, x2) = self.split(&x);
        let (y1, y2) = self.split(&self.y);
        // G = −2 X Yᵀ; project without forming the N×N product.
        let g11 = &x1 * y1.transpose();
        let a = (&g11 - g11.transpose()) * T::lit(-1.0);
        let b = (&x2 * y1.transpose() - &y2 * x1.transpose()) * T::lit(-1.0);
        Ok(ParamPoint { a, b })
    }
}

/// `Ψ_S(V)`.
pub fn cayley_map<T: Scalar>(s: &BasisMatrix<T>, v: &ParamPoint<T>) -> Result<DMatrix<T>> {
    Ok(CayleyAt::new(s, v)?.into_point())
}

/// `DΨ_S(V)[H]`.
pub fn cayley_dmap<T: Scalar>(s: &BasisMatrix<T>, v: &ParamPoint<T>, h: &ParamPoint<T>) -> Result<DMatrix<T>> {
    CayleyAt::new(s, v)?.differential(h)
}

/// `(DΨ_S(V))*[Z]`.
pub fn cayley_adjoint<T: Scalar>(s: &BasisMatrix<T>, v: &ParamPoint<T>, z: &DMatrix<T>) -> Result<ParamPoint<T>> {
    CayleyAt::new(s, v)?.adjoint(z)
}
