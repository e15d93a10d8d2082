//! Scalar abstraction for the numerical core.
//!
//! Everything in the analysis layer is generic over [`Real`], so the same
//! formulas run at `f32` or `f64`. The command-line layer and the reference
//! reports are pinned to `f64` through the aliases at the crate root.

use std::fmt;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the toolkit is generic over (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Convert an `f64` literal into `Self`.
    ///
    /// Panics only if the target type cannot represent ordinary finite
    /// constants, which cannot happen for `f32`/`f64`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert")
    }

    /// Lossy view as `f64`, for error messages and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion_roundtrips() {
        assert_eq!(f64::lit(1.5), 1.5);
        assert_eq!(f32::lit(0.25), 0.25f32);
        assert_eq!(f64::lit(-3.0).as_f64(), -3.0);
    }
}
