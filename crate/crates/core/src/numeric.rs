//! Scalar-generic arithmetic shared by the validator and the simulator.
//!
//! Grounded-to-native scaling and clipping only need field operations and an
//! ordering, so they work for `f32`, `f64` and exact rationals alike. The
//! velocity profile needs a square root and is restricted to floats.

use std::fmt::Debug;

use num_traits::{Float, Num};
use serde::{Deserialize, Serialize};

/// Anything with `+ - * /` and a partial order.
pub trait Scalar: Num + PartialOrd + Copy + Debug {}

impl<T> Scalar for T where T: Num + PartialOrd + Copy + Debug {}

/// Clamp `value` into `[lo, hi]`. Returns `None` when the value was already inside.
pub fn clip<T: Scalar>(value: T, lo: T, hi: T) -> Option<T> {
    if value < lo {
        Some(lo)
    } else if value > hi {
        Some(hi)
    } else {
        None
    }
}

/// One robot variable: the 0-5 style scale the model edits and the native
/// range the hardware uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableRange<T> {
    pub grounded_lo: T,
    pub grounded_hi: T,
    pub native_lo: T,
    pub native_hi: T,
    pub default_grounded: T,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RangeError {
    #[error("grounded range is empty or inverted")]
    GroundedRange,
    #[error("native range is empty or inverted")]
    NativeRange,
    #[error("default lies outside the grounded range")]
    Default,
}

impl<T: Scalar> VariableRange<T> {
    pub fn new(
        grounded: (T, T),
        native: (T, T),
        default_grounded: T,
    ) -> Result<Self, RangeError> {
        let range = Self {
            grounded_lo: grounded.0,
            grounded_hi: grounded.1,
            native_lo: native.0,
            native_hi: native.1,
            default_grounded,
        };
        range.check()?;
        Ok(range)
    }

    // Negated so NaN bounds are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check(&self) -> Result<(), RangeError> {
        if !(self.grounded_lo < self.grounded_hi) {
            return Err(RangeError::GroundedRange);
        }
        if !(self.native_lo < self.native_hi) {
            return Err(RangeError::NativeRange);
        }
        if !(self.grounded_lo <= self.default_grounded && self.default_grounded <= self.grounded_hi)
        {
            return Err(RangeError::Default);
        }
        Ok(())
    }

    /// Affine map from the grounded scale to native units.
    pub fn scale(&self, grounded: T) -> T {
        let fraction = (grounded - self.grounded_lo) / (self.grounded_hi - self.grounded_lo);
        self.native_lo + fraction * (self.native_hi - self.native_lo)
    }

    pub fn clip_grounded(&self, value: T) -> Option<T> {
        clip(value, self.grounded_lo, self.grounded_hi)
    }

    pub fn contains_grounded(&self, value: T) -> bool {
        self.grounded_lo <= value && value <= self.grounded_hi
    }

    pub fn contains_native(&self, value: T) -> bool {
        self.native_lo <= value && value <= self.native_hi
    }

    pub fn default_native(&self) -> T {
        self.scale(self.default_grounded)
    }
}

/// Time to traverse `length` with a trapezoidal velocity profile capped at
/// `peak_speed` and ramping at `accel`. Falls back to a triangular profile
/// when the segment is too short to reach peak speed.
pub fn trapezoid_duration<F: Float>(length: F, peak_speed: F, accel: F) -> F {
    let ramp_distance = peak_speed * peak_speed / accel;
    if length >= ramp_distance {
        length / peak_speed + peak_speed / accel
    } else {
        let two = F::one() + F::one();
        two * (length / accel).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn scale_endpoints_and_midpoint() {
        let r = VariableRange::new((0.0, 5.0), (10.0, 50.0), 2.5).unwrap();
        assert_eq!(r.scale(0.0), 10.0);
        assert_eq!(r.scale(5.0), 50.0);
        assert_eq!(r.scale(2.5), 30.0);
    }

    #[test]
    fn scale_depth_example() {
        // 10 + (3.2 / 5) * 40 = 35.6
        let r = VariableRange::new((0.0, 5.0), (10.0, 50.0), 2.5).unwrap();
        assert!((r.scale(3.2) - 35.6).abs() < 1e-12);
        let exact = VariableRange::new(
            (Ratio::from_integer(0i64), Ratio::from_integer(5)),
            (Ratio::from_integer(10), Ratio::from_integer(50)),
            Ratio::new(5, 2),
        )
        .unwrap();
        assert_eq!(exact.scale(Ratio::new(16, 5)), Ratio::new(178, 5));
    }

    #[test]
    fn f32_scaling() {
        let r: VariableRange<f32> = VariableRange::new((0.0, 5.0), (0.2, 1.0), 2.5).unwrap();
        assert!((r.scale(2.5) - 0.6).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert_eq!(
            VariableRange::new((5.0, 0.0), (0.0, 1.0), 1.0),
            Err(RangeError::GroundedRange)
        );
        assert_eq!(
            VariableRange::new((0.0, 5.0), (1.0, 1.0), 1.0),
            Err(RangeError::NativeRange)
        );
        assert_eq!(
            VariableRange::new((0.0, 5.0), (0.0, 1.0), 6.0),
            Err(RangeError::Default)
        );
    }

    #[test]
    fn clip_reports_only_changes() {
        assert_eq!(clip(7.0, 0.0, 5.0), Some(5.0));
        assert_eq!(clip(-1.0, 0.0, 5.0), Some(0.0));
        assert_eq!(clip(3.0, 0.0, 5.0), None);
        assert_eq!(clip(5.0, 0.0, 5.0), None);
    }

    #[test]
    fn trapezoid_and_triangle() {
        // ramp distance 1*1/2 = 0.5 <= 2: 2/1 + 1/2
        assert!((trapezoid_duration(2.0, 1.0, 2.0) - 2.5).abs() < 1e-12);
        // ramp distance 1 > 0.25: 2 * sqrt(0.25)
        assert!((trapezoid_duration(0.25_f64, 1.0, 1.0) - 1.0).abs() < 1e-12);
        // continuity at the switch point
        let at = trapezoid_duration(1.0_f64, 1.0, 1.0);
        let below = trapezoid_duration(1.0_f64 - 1e-9, 1.0, 1.0);
        assert!((at - below).abs() < 1e-6);
    }
}
