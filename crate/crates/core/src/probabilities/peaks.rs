use rayon::prelude::*;

use super::{baseline, probability, ChannelSpec};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

/// Points of the coarse scan preceding golden-section refinement.
pub const SCAN_POINTS: usize = 32;
/// Absolute tolerance on the reported peak location `(w0/r0)_max`.
pub const PEAK_TOLERANCE: f64 = 1e-4;
/// Bracket covering every peak of the figure families.
pub const DEFAULT_PEAK_BRACKET: (f64, f64) = (0.05, 4.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakResult {
    pub delta_l: i32,
    pub w0_over_r0_max: f64,
    /// Normalized probability at the peak.
    pub peak_value: f64,
    /// Full width at half maximum, interpolated on the coarse scan.
    pub half_max_width: f64,
}

/// Location and shape of the maximum of a mismatched (`delta_l != 0`)
/// channel inside `bracket`.
pub fn find_peak(ch: &ChannelSpec, bracket: (f64, f64), qcfg: &QuadratureConfig) -> Result<PeakResult> {
    if ch.is_conserving() {
        return Err(Error::InvalidChannel(format!("{ch} conserves OAM; its curve has no interior peak")));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidInput(format!("peak bracket must satisfy 0 < lo < hi, got ({lo}, {hi})")));
    }
    let base = baseline(ch, qcfg)?;
    let f = |x: f64| probability(ch, x, qcfg).map(|raw| raw / base);

    let xs: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64).collect();
    let ys = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let i = (0..SCAN_POINTS).fold(0, |best, k| if ys[k] > ys[best] { k } else { best });
    if i == 0 || i == SCAN_POINTS - 1 {
        return Err(Error::NoInteriorPeak { at: xs[i] });
    }

    let (x_max, peak_value) = golden_section_max(&f, xs[i - 1], xs[i + 1], PEAK_TOLERANCE)?;
    let half = 0.5 * peak_value;
    let left = (0..i).rev().find(|&j| ys[j] < half).ok_or(Error::NoHalfMaximum)?;
    let right = (i + 1..SCAN_POINTS).find(|&j| ys[j] < half).ok_or(Error::NoHalfMaximum)?;
    let cross = |a: usize, b: usize| xs[a] + (half - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a]);
    let width = cross(right - 1, right) - cross(left, left + 1);

    Ok(PeakResult { delta_l: ch.delta_l(), w0_over_r0_max: x_max, peak_value, half_max_width: width })
}

fn golden_section_max(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Channel family of a peak-scaling series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakFamily {
    /// `l0 -> l0 + delta_l`.
    Single,
    /// Pump `l0`, idler `l2 = l0`, signal `l1 = delta_l`.
    Joint,
}

impl PeakFamily {
    pub fn channel(&self, l0: i32, delta_l: i32, w0: f64) -> Result<ChannelSpec> {
        match self {
            PeakFamily::Single => ChannelSpec::single(l0, l0 + delta_l, w0),
            PeakFamily::Joint => ChannelSpec::joint(l0, delta_l, l0, w0),
        }
    }
}

impl std::str::FromStr for PeakFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(PeakFamily::Single),
            "joint" => Ok(PeakFamily::Joint),
            other => Err(Error::InvalidInput(format!("unknown peak family {other:?}"))),
        }
    }
}

/// Peaks of one family plus a least-squares line through
/// `(delta_l, (w0/r0)_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub peaks: Vec<PeakResult>,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    /// `max_residual` over the range the fitted line spans.
    pub relative_max_residual: f64,
}

impl ScalingReport {
    /// Second differences of the peak locations (consecutive `delta_l`).
    pub fn second_differences(&self) -> Vec<f64> {
        self.peaks.windows(3).map(|w| w[2].w0_over_r0_max - 2.0 * w[1].w0_over_r0_max + w[0].w0_over_r0_max).collect()
    }
}

pub fn peak_scaling(
    family: PeakFamily,
    l0: i32,
    delta_ls: &[i32],
    bracket: (f64, f64),
    qcfg: &QuadratureConfig,
) -> Result<ScalingReport> {
    if delta_ls.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least two delta_l values, got {}", delta_ls.len())));
    }
    if delta_ls.iter().any(|&d| d < 1) {
        return Err(Error::InvalidInput("delta_l values must be >= 1".into()));
    }
    let peaks = delta_ls
        .par_iter()
        .map(|&d| find_peak(&family.channel(l0, d, 1.0)?, bracket, qcfg))
        .collect::<Result<Vec<_>>>()?;

    let n = peaks.len() as f64;
    let xs: Vec<f64> = peaks.iter().map(|p| p.delta_l as f64).collect();
    let ys: Vec<f64> = peaks.iter().map(|p| p.w0_over_r0_max).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all delta_l values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - (intercept + slope * x)).abs()).fold(0.0, f64::max);
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = (slope * (xmax - xmin)).abs();
    if span == 0.0 {
        return Err(Error::DegenerateFit("fitted line is flat".into()));
    }
    Ok(ScalingReport { peaks, slope, intercept, max_residual, relative_max_residual: max_residual / span })
}
