//! Laguerre-Gaussian radial amplitudes at the beam waist.
//!
//! ```text
//! R_p^l(r) = 2 sqrt(p! / (|l|+p)!) / w0 * (r sqrt2 / w0)^|l| * L_p^|l|(2 r^2 / w0^2) * exp(-r^2 / w0^2)
//! ```
//!
//! The azimuthal factor `exp(i l theta) / sqrt(2 pi)` is not carried here;
//! the probability integrals use pre-integrated angular kernels.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_radial, QuadratureConfig};
use crate::special_functions::{assoc_laguerre, log_factorial, PolyIndex};

/// OAM number `l` and radial index `p` of one LG mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub l: i32,
    pub p: u32,
}

impl ModeIndex {
    pub const fn new(l: i32, p: u32) -> Self {
        Self { l, p }
    }

    /// Mode with no radial nodes.
    pub const fn oam(l: i32) -> Self {
        Self { l, p: 0 }
    }

    pub fn abs_l(&self) -> u32 {
        self.l.unsigned_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LGModeSpec {
    pub mode: ModeIndex,
    pub w0: f64,
}

impl LGModeSpec {
    pub fn new(mode: ModeIndex, w0: f64) -> Result<Self> {
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::InvalidInput(format!("mode width must be finite and > 0, got {w0}")));
        }
        PolyIndex::new(mode.p, mode.abs_l())?;
        Ok(Self { mode, w0 })
    }
}

/// Precomputed constants of one radial amplitude, for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    norm: f64,
    abs_l: i32,
    poly: PolyIndex,
    inv_w0: f64,
}

impl RadialProfile {
    pub fn new(spec: &LGModeSpec) -> Self {
        let abs_l = spec.mode.abs_l();
        let p = spec.mode.p;
        let norm = 2.0 * (0.5 * (log_factorial(p) - log_factorial(abs_l + p))).exp() / spec.w0;
        Self {
            norm,
            abs_l: abs_l as i32,
            poly: PolyIndex::new(p, abs_l).expect("validated by LGModeSpec"),
            inv_w0: 1.0 / spec.w0,
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let u = r * self.inv_w0;
        let u2 = u * u;
        let lag = if self.poly.p() == 0 { 1.0 } else { assoc_laguerre(self.poly, 2.0 * u2) };
        self.norm * (u * std::f64::consts::SQRT_2).powi(self.abs_l) * lag * (-u2).exp()
    }
}

pub fn radial_amplitude(spec: &LGModeSpec, r: f64) -> f64 {
    RadialProfile::new(spec).eval(r)
}

/// `|int_0^inf R_{p1}^l R_{p2}^l r dr - delta_{p1 p2}|`.
pub fn radial_orthonormality_defect(l: i32, p1: u32, p2: u32, w0: f64, qcfg: &QuadratureConfig) -> Result<f64> {
    let a = RadialProfile::new(&LGModeSpec::new(ModeIndex::new(l, p1), w0)?);
    let b = RadialProfile::new(&LGModeSpec::new(ModeIndex::new(l, p2), w0)?);
    let overlap = integrate_radial(|r| a.eval(r) * b.eval(r) * r, qcfg, w0)?;
    let target = if p1 == p2 { 1.0 } else { 0.0 };
    Ok((overlap - target).abs())
}
