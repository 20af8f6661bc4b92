//! Kolmogorov phase statistics.
//!
//! The phase structure function is `D(d) = 6.88 (d / r0)^(5/3)` and, for a
//! Gaussian phase process, the two-point coherence of `exp(i phi)` is
//! `exp(-D(d) / 2)`. An infinite Fried parameter is the turbulence-free
//! limit and is handled as its own branch (`D = 0`, coherence exactly 1).

use crate::error::{Error, Result};

/// Structure-function coefficient of Kolmogorov turbulence.
pub const KOLMOGOROV_COEFFICIENT: f64 = 6.88;
/// Structure-function exponent of Kolmogorov turbulence.
pub const KOLMOGOROV_EXPONENT: f64 = 5.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceParams {
    r0: f64,
}

impl TurbulenceParams {
    pub const COEFFICIENT: f64 = KOLMOGOROV_COEFFICIENT;
    pub const EXPONENT: f64 = KOLMOGOROV_EXPONENT;

    /// `r0` must be positive; `f64::INFINITY` means no turbulence.
    pub fn new(r0: f64) -> Result<Self> {
        if r0.is_nan() || r0 <= 0.0 {
            return Err(Error::InvalidInput(format!("Fried parameter must be > 0, got {r0}")));
        }
        Ok(Self { r0 })
    }

    pub fn none() -> Self {
        Self { r0: f64::INFINITY }
    }

    /// Fried parameter giving the ratio `w0 / r0`; a zero ratio maps to the
    /// turbulence-free branch.
    pub fn from_ratio(w0: f64, w0_over_r0: f64) -> Result<Self> {
        if !(w0_over_r0 >= 0.0) || !w0_over_r0.is_finite() {
            return Err(Error::InvalidInput(format!("w0/r0 must be finite and >= 0, got {w0_over_r0}")));
        }
        if w0_over_r0 == 0.0 {
            Ok(Self::none())
        } else {
            Self::new(w0 / w0_over_r0)
        }
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn is_turbulence_free(&self) -> bool {
        self.r0.is_infinite()
    }

    pub fn structure_function(&self, d: f64) -> f64 {
        structure_function(d, self)
    }

    pub fn coherence(&self, d: f64) -> f64 {
        coherence(d, self)
    }

    /// Coherence evaluated from a squared separation, avoiding the square
    /// root in hot loops.
    pub fn kernel(&self) -> CoherenceKernel {
        CoherenceKernel {
            rate: if self.is_turbulence_free() { 0.0 } else { 0.5 * Self::COEFFICIENT * self.r0.powf(-Self::EXPONENT) },
        }
    }
}

/// `exp(-rate * (d^2)^(5/6))` with `rate = 3.44 r0^(-5/3)`.
#[derive(Debug, Clone, Copy)]
pub struct CoherenceKernel {
    rate: f64,
}

impl CoherenceKernel {
    #[inline]
    pub fn from_sq(&self, d2: f64) -> f64 {
        if self.rate == 0.0 || d2 == 0.0 {
            1.0
        } else {
            (-self.rate * d2.powf(KOLMOGOROV_EXPONENT / 2.0)).exp()
        }
    }

    /// `coherence - 1`, accurate when the coherence is close to one.
    #[inline]
    pub fn deficit_from_sq(&self, d2: f64) -> f64 {
        if self.rate == 0.0 || d2 == 0.0 {
            0.0
        } else {
            (-self.rate * d2.powf(KOLMOGOROV_EXPONENT / 2.0)).exp_m1()
        }
    }
}

pub fn structure_function(d: f64, params: &TurbulenceParams) -> f64 {
    if params.is_turbulence_free() {
        return 0.0;
    }
    KOLMOGOROV_COEFFICIENT * (d / params.r0).powf(KOLMOGOROV_EXPONENT)
}

pub fn coherence(d: f64, params: &TurbulenceParams) -> f64 {
    if params.is_turbulence_free() {
        return 1.0;
    }
    (-0.5 * structure_function(d, params)).exp()
}

/// Squared planar distance between `(r, dtheta)` and `(rp, 0)`.
///
/// Written as `(r - rp)^2 + 4 r rp sin^2(dtheta / 2)` so nothing cancels
/// when the points nearly coincide.
#[inline]
pub fn chord_distance_sq(r: f64, rp: f64, dtheta: f64) -> f64 {
    let s = (0.5 * dtheta).sin();
    let dr = r - rp;
    dr * dr + 4.0 * r * rp * s * s
}

pub fn chord_distance(r: f64, rp: f64, dtheta: f64) -> f64 {
    chord_distance_sq(r, rp, dtheta).sqrt()
}
