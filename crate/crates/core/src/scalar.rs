//! Scalar abstraction for the distribution layer.
//!
//! Everything in [`crate::gal`] and [`crate::special`] is written against
//! [`Real`], so the same code serves `f64` (the default everywhere else in the
//! crate) and `f32`.

use num_traits::{Float, FloatConst};
use std::fmt::{Debug, Display};

pub trait Real: Float + FloatConst + Debug + Display + Send + Sync + 'static {
    /// Below this argument `log_ndtr` switches to the asymptotic tail series.
    const TAIL_CUTOFF: f64;

    fn erfc(self) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from(x).unwrap()
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap()
    }
}

impl Real for f64 {
    const TAIL_CUTOFF: f64 = -20.0;

    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    const TAIL_CUTOFF: f64 = -8.0;

    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}
