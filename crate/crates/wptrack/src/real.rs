//! Scalar abstraction: the core math is generic over f32/f64.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar: f32 or f64.
pub trait Real: Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static {
    /// Lift an f64 constant into the scalar type.
    #[inline]
    fn val(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    #[inline]
    fn pi() -> Self {
        Self::val(std::f64::consts::PI)
    }

    #[inline]
    fn two() -> Self {
        Self::val(2.0)
    }

    #[inline]
    fn half() -> Self {
        Self::val(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle<F: Real>(a: F) -> F {
    let two_pi = F::two() * F::pi();
    let mut a = a % two_pi;
    if a <= -F::pi() {
        a += two_pi;
    } else if a > F::pi() {
        a -= two_pi;
    }
    a
}
