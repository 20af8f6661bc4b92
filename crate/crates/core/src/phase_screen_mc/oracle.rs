//! Monte Carlo detection probabilities: the complex overlap of the channel
//! modes with `exp(i phi)` is summed on the screen grid, squared, and
//! averaged over independent screens.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::screen::ScreenGenerator;
use crate::error::{Error, Result};
use crate::lg_modes::{LGModeSpec, ModeIndex, RadialProfile};
use crate::probabilities::{ChannelKind, ChannelSpec};
use crate::turbulence::TurbulenceParams;

pub const MIN_SCREENS: usize = 50;
/// Screen side length in units of `w0`.
pub const EXTENT_IN_W0: f64 = 16.0;
/// Samples per `w0` below which the grid is rejected outright.
pub const MIN_SAMPLES_PER_W0: f64 = 8.0;
/// Allowed relative error of the discretized turbulence-free overlap.
pub const BASELINE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_screens: usize,
}

impl McEstimate {
    /// `(value - mean) / stderr`.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean) / self.stderr
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Mean and standard error of i.i.d. samples.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mut s = CompensatedSum::default();
    samples.iter().for_each(|&x| s.add(x));
    let mean = s.value() / n;
    let mut v = CompensatedSum::default();
    samples.iter().for_each(|&x| v.add((x - mean) * (x - mean)));
    let var = if samples.len() > 1 { v.value() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// SplitMix64 finalizer; derives per-screen seeds from the master seed.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pump and conjugated detected modes multiplied on the grid, times the
/// cell area.
fn overlap_field(ch: &ChannelSpec, n: usize, extent: f64) -> Result<Vec<Complex64>> {
    let dx = extent / n as f64;
    let mk =
        |m: ModeIndex| -> Result<(RadialProfile, i32)> { Ok((RadialProfile::new(&LGModeSpec::new(m, ch.w0)?), m.l)) };
    let pump = mk(ch.pump)?;
    let detected = ch.modes().into_iter().skip(1).map(mk).collect::<Result<Vec<_>>>()?;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let mut field = Vec::with_capacity(n * n);
    for row in 0..n {
        let y = (row as f64 - (n / 2) as f64) * dx;
        for col in 0..n {
            let x = (col as f64 - (n / 2) as f64) * dx;
            let (r, th) = (x.hypot(y), y.atan2(x));
            let mode = |(p, l): &(RadialProfile, i32)| Complex64::from_polar(p.eval(r) * norm, *l as f64 * th);
            let mut v = mode(&pump);
            for d in &detected {
                v *= mode(d).conj();
            }
            field.push(v * dx * dx);
        }
    }
    Ok(field)
}

/// `int_0^{8 w0} a(r) r dr` for the radial product `a` of the channel, by
/// composite Simpson.
fn radial_overlap_reference(ch: &ChannelSpec) -> Result<f64> {
    let prof = ch
        .modes()
        .into_iter()
        .map(|m| LGModeSpec::new(m, ch.w0).map(|s| RadialProfile::new(&s)))
        .collect::<Result<Vec<_>>>()?;
    let f = |r: f64| r * prof.iter().map(|p| p.eval(r)).product::<f64>();
    let m = 4000;
    let b = 0.5 * EXTENT_IN_W0 * ch.w0;
    let h = b / m as f64;
    let mut s = f(0.0) + f(b);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    Ok(s * h / 3.0)
}

/// `|C_ref|^2` of a conserving channel on the grid, and its relative
/// deviation from the continuous value.
fn discretized_baseline(reference: &ChannelSpec, n_grid: usize) -> Result<(f64, f64)> {
    let extent = EXTENT_IN_W0 * reference.w0;
    let sum: Complex64 = overlap_field(reference, n_grid, extent)?.iter().sum();
    // the angular factors leave (2 pi)^(1 - m/2) in front of the radial overlap
    let m = reference.modes().len() as i32;
    let discrete = sum.norm_sqr() * (2.0 * PI).powi(m - 2);
    let exact = radial_overlap_reference(reference)?.powi(2);
    Ok((sum.norm_sqr(), (discrete / exact - 1.0).abs()))
}

/// Monte Carlo estimate of the normalized probability of a single or
/// joint channel. A ratio of 0 uses flat (zero) phase.
pub fn mc_joint_probability(
    ch: &ChannelSpec,
    w0_over_r0: f64,
    n_screens: usize,
    seed: u64,
    n_grid: usize,
) -> Result<McEstimate> {
    if ch.kind == ChannelKind::Signal {
        return Err(Error::InvalidChannel("the Monte Carlo oracle covers single and joint channels".into()));
    }
    if n_screens < MIN_SCREENS {
        return Err(Error::InvalidInput(format!("need at least {MIN_SCREENS} screens, got {n_screens}")));
    }
    let tp = TurbulenceParams::from_ratio(ch.w0, w0_over_r0)?;
    let extent = EXTENT_IN_W0 * ch.w0;
    let per_w0 = n_grid as f64 / EXTENT_IN_W0;
    if per_w0 < MIN_SAMPLES_PER_W0 {
        return Err(Error::GridTooCoarse(format!("{per_w0} samples per w0, need at least {MIN_SAMPLES_PER_W0}")));
    }

    let (base, defect) = discretized_baseline(&ch.reference(), n_grid)?;
    if defect > BASELINE_TOLERANCE {
        return Err(Error::GridTooCoarse(format!(
            "discretized turbulence-free overlap off by {defect:e} (n_grid = {n_grid})"
        )));
    }

    let field = overlap_field(ch, n_grid, extent)?;
    let samples: Vec<f64> = if tp.is_turbulence_free() {
        let v = field.iter().sum::<Complex64>().norm_sqr() / base;
        vec![v; n_screens]
    } else {
        let gen = ScreenGenerator::new(n_grid, extent)?;
        (0..n_screens as u64)
            .into_par_iter()
            .map(|k| {
                let screen = gen.generate(&tp, sub_seed(seed, k))?;
                let c: Complex64 =
                    field.iter().zip(&screen.samples).map(|(f, &phi)| f * Complex64::from_polar(1.0, phi)).sum();
                Ok(c.norm_sqr() / base)
            })
            .collect::<Result<_>>()?
    };
    let (mean, stderr) = mean_and_stderr(&samples);
    Ok(McEstimate { mean, stderr, n_screens })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_mean() {
        let mut xs = vec![1e16, 1.0, -1e16];
        xs.extend(std::iter::repeat_n(1.0, 7));
        let (m, _) = mean_and_stderr(&xs);
        assert_eq!(m, 0.8);
        let (m, e) = mean_and_stderr(&[2.0, 4.0]);
        assert_eq!((m, e), (3.0, 1.0));
    }

    #[test]
    fn sub_seeds_are_distinct() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|k| sub_seed(42, k)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
    }

    #[test]
    fn flat_phase_is_exactly_one() {
        let ch = ChannelSpec::joint(1, 0, 1, 1.0).unwrap();
        let e = mc_joint_probability(&ch, 0.0, 50, 0, 128).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        let off = ChannelSpec::single(0, 2, 1.0).unwrap();
        assert!(mc_joint_probability(&off, 0.0, 50, 0, 128).unwrap().mean < 1e-20);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let ch = ChannelSpec::single(0, 0, 1.0).unwrap();
        assert!(matches!(mc_joint_probability(&ch, 1.0, 50, 0, 64), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn baseline_defect_tracks_sampling() {
        let ch = ChannelSpec::joint(2, 0, 2, 1.0).unwrap();
        // one sample per w0 cannot resolve the modes
        assert!(discretized_baseline(&ch, 16).unwrap().1 > BASELINE_TOLERANCE);
        assert!(discretized_baseline(&ch, 128).unwrap().1 < 1e-10);
        let single = ChannelSpec::single(1, 1, 0.3).unwrap();
        assert!(discretized_baseline(&single, 256).unwrap().1 < 1e-10);
    }

    #[test]
    fn argument_checks() {
        let ch = ChannelSpec::single(0, 0, 1.0).unwrap();
        assert!(mc_joint_probability(&ch, 1.0, 49, 0, 256).is_err());
        let sig = ChannelSpec::signal(0, 0, 1.0).unwrap();
        assert!(matches!(mc_joint_probability(&sig, 1.0, 50, 0, 256), Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let ch = ChannelSpec::single(0, 1, 1.0).unwrap();
        let a = mc_joint_probability(&ch, 1.0, 50, 5, 128).unwrap();
        let b = mc_joint_probability(&ch, 1.0, 50, 5, 128).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mean, mc_joint_probability(&ch, 1.0, 50, 6, 128).unwrap().mean);
    }
}
