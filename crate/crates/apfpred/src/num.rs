//! Scalar abstraction for the simulator core.
//!
//! All geometry, force, and filter math is generic over [`Real`] so the same
//! code runs in `f32` or `f64`. The CLI and trace formats pin `f64` through
//! the aliases at the crate root.

use std::fmt::{Debug, Display};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless conversion from a literal; panics only for non-finite input
    /// on a type that cannot represent it, which does not occur for f32/f64.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert to Real")
    }

    /// Conversion from a count (set sizes, ray totals).
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must convert to Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_circumference<T: Real>(radius: T) -> T {
        T::PI() * radius
    }

    #[test]
    fn generic_math_works_for_both_widths() {
        assert!((half_circumference(2.0f64) - std::f64::consts::PI * 2.0).abs() < 1e-15);
        assert!((half_circumference(2.0f32) - std::f32::consts::PI * 2.0).abs() < 1e-6);
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of_usize(181), 181.0);
    }
}
