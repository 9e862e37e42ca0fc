//! Floating-point scalar abstraction shared by every numerical module.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by the solver and the clustering pipeline: `f32` or `f64`.
///
/// Arithmetic and elementary functions come from [`RealField`]; literal
/// conversion goes through `num-traits`.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy widening to `f64` for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    #[inline]
    fn eps() -> Self {
        Self::default_epsilon()
    }

    /// Tolerance for identities that hold exactly in exact arithmetic.
    ///
    /// `1e-10` in double precision, loosened to a few hundred ulps for `f32`.
    #[inline]
    fn exact_tol() -> Self {
        let floor = Self::lit(1e-10);
        let scaled = Self::eps() * Self::lit(1e3);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
