//! Detection probabilities of single, joint and signal OAM channels.
//!
//! Every calculator returns the raw integral; the proportionality constants
//! are dropped and curves are reported relative to a per-family baseline
//! (see [`normalize_family`]). The angular factor is the real kernel
//! `cos(dl * dtheta)`: each integrand depends on `dtheta` only through the
//! chord length, which is even in `dtheta`, so the sine part vanishes.
//!
//! ```text
//! single, joint:  int int int a(r) a(rp) c(|r - rp|) cos(dl dtheta) r rp dr drp ddtheta
//! signal:         int int W(r) c(2 r sin(dtheta / 2)) cos(dl dtheta) r dr ddtheta
//! ```
//!
//! with `a` the product of the real radial amplitudes of all modes in the
//! channel, `W = R_pump^2 R_l1^2` and `c` the turbulence coherence.
//!
//! For `dl != 0` the integrand uses `c - 1` in place of `c`, which leaves the
//! value unchanged (the constant integrates to zero over a full period) and
//! removes the cancellation between the positive and negative lobes when the
//! turbulence is weak.

mod channel;
mod peaks;

pub use channel::{ChannelKind, ChannelSpec};
pub use peaks::{
    find_peak, peak_scaling, PeakFamily, PeakResult, ScalingReport, DEFAULT_PEAK_BRACKET, PEAK_TOLERANCE, SCAN_POINTS,
};

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lg_modes::{LGModeSpec, ModeIndex, RadialProfile};
use crate::quadrature::{
    integrate_radial, integrate_weighted_2d, integrate_weighted_3d, truncation_shell_2d, truncation_shell_3d,
    weighted_2d_base_level, weighted_3d_base_level, AngularDomain, QuadratureConfig,
};
use crate::turbulence::{chord_distance_sq, TurbulenceParams};

/// One point of a probability curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityPoint {
    pub w0_over_r0: f64,
    /// `raw / baseline`.
    pub value: f64,
    pub raw: f64,
}

fn profiles(modes: &[ModeIndex], w0: f64) -> Result<Vec<RadialProfile>> {
    modes.iter().map(|&m| LGModeSpec::new(m, w0).map(|s| RadialProfile::new(&s))).collect()
}

fn expect_kind(ch: &ChannelSpec, kind: ChannelKind) -> Result<()> {
    if ch.kind != kind {
        return Err(Error::InvalidChannel(format!("expected a {} channel, got {}", kind.name(), ch)));
    }
    Ok(())
}

fn check_truncation(value: f64, shell: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if shell > cfg.rel_tolerance * value.abs() {
        return Err(Error::NonConvergence { last: value, previous: value + shell });
    }
    Ok(value)
}

/// Three-dimensional channel integral shared by the single and joint cases.
fn overlap_3d(ch: &ChannelSpec, w0_over_r0: f64, qcfg: &QuadratureConfig) -> Result<f64> {
    qcfg.validate()?;
    let tp = TurbulenceParams::from_ratio(ch.w0, w0_over_r0)?;
    let prof = profiles(&ch.modes(), ch.w0)?;
    let weight = |r: f64| prof.iter().map(|p| p.eval(r)).product::<f64>();
    let dl = ch.delta_l();
    if tp.is_turbulence_free() {
        if dl != 0 {
            return Ok(0.0);
        }
        let m = integrate_radial(|r| weight(r) * r, qcfg, ch.w0)?;
        return Ok(2.0 * PI * m * m);
    }
    let k = tp.kernel();
    let dlf = dl as f64;
    let kernel = |r: f64, rp: f64, t: f64| {
        let d2 = chord_distance_sq(r, rp, t);
        if dl == 0 {
            k.from_sq(d2)
        } else {
            k.deficit_from_sq(d2) * (dlf * t).cos()
        }
    };
    debug_assert!({
        let sine = |r: f64, rp: f64, t: f64| k.from_sq(chord_distance_sq(r, rp, t)) * (dlf * t).sin();
        let (v, mag) = weighted_3d_base_level(weight, sine, qcfg, ch.w0, AngularDomain::FullPeriod)?;
        v.abs() <= 1e-10 * mag.max(f64::MIN_POSITIVE)
    });
    let value = integrate_weighted_3d(weight, kernel, qcfg, ch.w0, AngularDomain::HalfPeriodEven)?.value;
    let shell = truncation_shell_3d(weight, kernel, qcfg, ch.w0)?;
    check_truncation(value, shell, qcfg)
}

/// Raw joint detection probability of signal `l1` and idler `l2`.
pub fn joint_probability(ch: &ChannelSpec, w0_over_r0: f64, qcfg: &QuadratureConfig) -> Result<f64> {
    expect_kind(ch, ChannelKind::Joint)?;
    overlap_3d(ch, w0_over_r0, qcfg)
}

/// Raw probability that a photon prepared in `l0` is detected in `l`.
pub fn single_photon_probability(ch: &ChannelSpec, w0_over_r0: f64, qcfg: &QuadratureConfig) -> Result<f64> {
    expect_kind(ch, ChannelKind::Single)?;
    overlap_3d(ch, w0_over_r0, qcfg)
}

/// Raw probability of detecting the signal photon in `l1`, summed over all
/// idler modes.
pub fn signal_probability(ch: &ChannelSpec, w0_over_r0: f64, qcfg: &QuadratureConfig) -> Result<f64> {
    expect_kind(ch, ChannelKind::Signal)?;
    qcfg.validate()?;
    let tp = TurbulenceParams::from_ratio(ch.w0, w0_over_r0)?;
    let prof = profiles(&ch.modes(), ch.w0)?;
    let weight = |r: f64| {
        let a: f64 = prof.iter().map(|p| p.eval(r)).product();
        a * a
    };
    let dl = ch.delta_l();
    if tp.is_turbulence_free() {
        if dl != 0 {
            return Ok(0.0);
        }
        return Ok(2.0 * PI * integrate_radial(|r| weight(r) * r, qcfg, ch.w0)?);
    }
    let k = tp.kernel();
    let dlf = dl as f64;
    let kernel = |r: f64, t: f64| {
        let d2 = chord_distance_sq(r, r, t);
        if dl == 0 {
            k.from_sq(d2)
        } else {
            k.deficit_from_sq(d2) * (dlf * t).cos()
        }
    };
    debug_assert!({
        let sine = |r: f64, t: f64| k.from_sq(chord_distance_sq(r, r, t)) * (dlf * t).sin();
        let (v, mag) = weighted_2d_base_level(weight, sine, qcfg, ch.w0, AngularDomain::FullPeriod)?;
        v.abs() <= 1e-10 * mag.max(f64::MIN_POSITIVE)
    });
    let value = integrate_weighted_2d(weight, kernel, qcfg, ch.w0, AngularDomain::HalfPeriodEven)?.value;
    let shell = truncation_shell_2d(weight, kernel, qcfg, ch.w0)?;
    check_truncation(value, shell, qcfg)
}

/// Raw probability of any channel kind.
pub fn probability(ch: &ChannelSpec, w0_over_r0: f64, qcfg: &QuadratureConfig) -> Result<f64> {
    match ch.kind {
        ChannelKind::Single => single_photon_probability(ch, w0_over_r0, qcfg),
        ChannelKind::Joint => joint_probability(ch, w0_over_r0, qcfg),
        ChannelKind::Signal => signal_probability(ch, w0_over_r0, qcfg),
    }
}

/// Turbulence-free raw value of the channel's conserving reference
/// ([`ChannelSpec::reference`]).
pub fn baseline(ch: &ChannelSpec, qcfg: &QuadratureConfig) -> Result<f64> {
    probability(&ch.reference(), 0.0, qcfg)
}

/// `raw / baseline(ch)`.
pub fn normalized_probability(ch: &ChannelSpec, w0_over_r0: f64, qcfg: &QuadratureConfig) -> Result<f64> {
    let base = baseline(ch, qcfg)?;
    let raw = probability(ch, w0_over_r0, qcfg)?;
    Ok(normalize_family(&[ProbabilityPoint { w0_over_r0, value: raw, raw }], base)?[0].value)
}

/// Sets `value = raw / baseline` on every point.
pub fn normalize_family(points: &[ProbabilityPoint], baseline: f64) -> Result<Vec<ProbabilityPoint>> {
    if !(baseline > 0.0) || !baseline.is_finite() {
        return Err(Error::DegenerateBaseline(baseline));
    }
    Ok(points.iter().map(|p| ProbabilityPoint { value: p.raw / baseline, ..*p }).collect())
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    if grid.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput("sweep grid values must be finite and >= 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("sweep grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Normalized curve of `ch` over `grid` (values of `w0 / r0`).
///
/// Points are evaluated in parallel and returned in grid order. Failing
/// points are collected into [`Error::SweepFailed`].
pub fn sweep(ch: &ChannelSpec, grid: &[f64], qcfg: &QuadratureConfig) -> Result<Vec<ProbabilityPoint>> {
    validate_grid(grid)?;
    qcfg.validate()?;
    let base = baseline(ch, qcfg)?;
    let raws: Vec<Result<f64>> = grid.par_iter().map(|&x| probability(ch, x, qcfg)).collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (&x, r) in grid.iter().zip(raws) {
        match r {
            Ok(raw) => points.push(ProbabilityPoint { w0_over_r0: x, value: raw, raw }),
            Err(e) => failures.push((x, e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::SweepFailed { failures });
    }
    normalize_family(&points, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn norm(ch: &ChannelSpec, x: f64) -> f64 {
        normalized_probability(ch, x, &q()).unwrap()
    }

    /// Independent raw integral: plain midpoint-in-angle, Gauss in r on a
    /// full polar grid, no cusp grading, no deficit trick. Only good to a
    /// few digits, which is all it is used for.
    fn brute_force_joint(modes: &[ModeIndex], dl: i32, w0: f64, ratio: f64) -> f64 {
        let n_r = 160;
        let n_t = 400;
        let r_max = 6.0 * w0;
        let r0 = w0 / ratio;
        let amp = |r: f64| -> f64 {
            modes
                .iter()
                .map(|m| {
                    let a = m.l.unsigned_abs() as i32;
                    let u = r / w0;
                    let norm = 2.0 / w0 / (1..=a).map(|k| k as f64).product::<f64>().sqrt();
                    norm * (u * 2f64.sqrt()).powi(a) * (-u * u).exp()
                })
                .product()
        };
        let h = r_max / n_r as f64;
        let dt = 2.0 * PI / n_t as f64;
        let mut total = 0.0;
        for i in 0..n_r {
            let r = (i as f64 + 0.5) * h;
            for j in 0..n_r {
                let rp = (j as f64 + 0.5) * h;
                let mut ang = 0.0;
                for k in 0..n_t {
                    let t = (k as f64 + 0.5) * dt;
                    let d = (r * r + rp * rp - 2.0 * r * rp * t.cos()).max(0.0).sqrt();
                    ang += (-3.44 * (d / r0).powf(5.0 / 3.0)).exp() * (dl as f64 * t).cos();
                }
                total += amp(r) * amp(rp) * r * rp * ang * dt * h * h;
            }
        }
        total
    }

    #[test]
    fn agrees_with_brute_force_grid() {
        for (l0, l1, l2, x) in [(0, 0, 0, 1.0), (0, 1, 0, 0.7)] {
            let ch = ChannelSpec::joint(l0, l1, l2, 1.0).unwrap();
            let got = joint_probability(&ch, x, &q()).unwrap();
            let modes = ch.modes();
            let want = brute_force_joint(&modes, ch.delta_l(), 1.0, x);
            assert!((got - want).abs() < 2e-3 * want.abs(), "{ch}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_turbulence_limits() {
        for ch in [
            ChannelSpec::single(0, 0, 1.0).unwrap(),
            ChannelSpec::single(2, 2, 0.4).unwrap(),
            ChannelSpec::joint(1, 0, 1, 1.0).unwrap(),
            ChannelSpec::joint(0, 2, -2, 1.0).unwrap().with_p0(1).unwrap(),
            ChannelSpec::signal(1, 1, 3.0).unwrap(),
        ] {
            assert_eq!(norm(&ch, 0.0), 1.0, "{ch}");
        }
        for ch in [
            ChannelSpec::single(0, 1, 1.0).unwrap(),
            ChannelSpec::joint(0, 2, 0, 1.0).unwrap(),
            ChannelSpec::signal(0, -1, 1.0).unwrap(),
        ] {
            assert_eq!(norm(&ch, 0.0), 0.0, "{ch}");
            // continuity toward the analytic branch
            let near = norm(&ch, 1e-6);
            assert!(near > 0.0 && near < 1e-8, "{ch}: {near}");
        }
    }

    #[test]
    fn turbulence_free_overlap_is_the_squared_radial_overlap() {
        // two identical p = 0 modes: int R^2 r dr = 1, so the raw value is 2 pi
        let ch = ChannelSpec::single(3, 3, 0.8).unwrap();
        let raw = single_photon_probability(&ch, 0.0, &q()).unwrap();
        assert!((raw - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn kind_is_checked() {
        let s = ChannelSpec::single(0, 0, 1.0).unwrap();
        assert!(matches!(joint_probability(&s, 1.0, &q()), Err(Error::InvalidChannel(_))));
        assert!(matches!(signal_probability(&s, 1.0, &q()), Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn degenerate_baseline() {
        let p = [ProbabilityPoint { w0_over_r0: 1.0, value: 0.0, raw: 0.3 }];
        assert!(matches!(normalize_family(&p, 0.0), Err(Error::DegenerateBaseline(_))));
        assert!(matches!(normalize_family(&p, -1.0), Err(Error::DegenerateBaseline(_))));
        assert_eq!(normalize_family(&p, 0.6).unwrap()[0].value, 0.5);
    }

    #[test]
    fn grid_validation() {
        let ch = ChannelSpec::single(0, 0, 1.0).unwrap();
        assert!(sweep(&ch, &[], &q()).is_err());
        assert!(sweep(&ch, &[0.5, 0.5], &q()).is_err());
        assert!(sweep(&ch, &[-0.1, 0.5], &q()).is_err());
        assert_eq!(sweep(&ch, &[0.0], &q()).unwrap()[0].value, 1.0);
    }

    #[test]
    fn sweep_reports_failing_points() {
        let ch = ChannelSpec::joint(0, 0, 0, 1.0).unwrap();
        // enough for the analytic turbulence-free branch, too coarse in angle
        let tight = QuadratureConfig { radial_nodes: 24, angular_nodes: 2, max_refinements: 1, ..q() };
        let err = sweep(&ch, &[0.0, 1.0, 2.0], &tight).unwrap_err();
        assert!(err.is_non_convergence());
        match err {
            Error::SweepFailed { failures } => {
                let at: Vec<f64> = failures.iter().map(|f| f.0).collect();
                assert_eq!(at, vec![1.0, 2.0]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn truncation_is_detected() {
        let ch = ChannelSpec::single(0, 0, 1.0).unwrap();
        let short = QuadratureConfig { r_max_factor: 1.5, ..q() };
        assert!(single_photon_probability(&ch, 1.0, &short).unwrap_err().is_non_convergence());
    }

    #[test]
    fn conserving_sweeps_decay() {
        let grid: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
        for ch in [
            ChannelSpec::single(1, 1, 1.0).unwrap(),
            ChannelSpec::joint(0, 1, -1, 1.0).unwrap(),
            ChannelSpec::signal(0, 0, 1.0).unwrap(),
        ] {
            let pts = sweep(&ch, &grid, &q()).unwrap();
            assert_eq!(pts[0].value, 1.0);
            for w in pts.windows(2) {
                assert!(w[1].value < w[0].value, "{ch} at {}", w[1].w0_over_r0);
            }
        }
    }

    #[test]
    fn signal_completeness() {
        let x = 1.0;
        let pump = 1;
        let base = baseline(&ChannelSpec::signal(pump, pump, 1.0).unwrap(), &q()).unwrap();
        let mut prev = 0.0;
        for big_l in 0..=8 {
            let total: f64 = (-big_l..=big_l)
                .map(|l1| signal_probability(&ChannelSpec::signal(pump, pump + l1, 1.0).unwrap(), x, &q()).unwrap())
                .sum::<f64>()
                / base;
            assert!(total >= prev - 1e-12, "L={big_l}: {total} < {prev}");
            assert!(total <= 1.0 + 1e-9, "L={big_l}: {total}");
            prev = total;
        }
    }

    /// Largest |signal - single| gap for l0 = l1 = l = 2 over the default
    /// figure grid, recorded when the calculators were written.
    const RECORDED_L2_GAP: f64 = 0.06705;

    #[test]
    fn signal_tracks_single_photon_for_l2() {
        let grid: Vec<f64> = (1..=40).map(|k| 0.05 + k as f64 * 3.95 / 40.0).collect();
        let a = sweep(&ChannelSpec::signal(2, 2, 1.0).unwrap(), &grid, &q()).unwrap();
        let b = sweep(&ChannelSpec::single(2, 2, 1.0).unwrap(), &grid, &q()).unwrap();
        let gap = a.iter().zip(&b).map(|(s, p)| (s.value - p.value).abs()).fold(0.0, f64::max);
        assert!(gap <= 1.5 * RECORDED_L2_GAP, "gap {gap}");
    }

    #[test]
    fn figure_1c_depends_on_abs_l() {
        for l in 1..=3 {
            let a = norm(&ChannelSpec::joint(0, l, -l, 1.0).unwrap(), 1.3);
            let b = norm(&ChannelSpec::joint(0, -l, l, 1.0).unwrap(), 1.3);
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn scale_invariance(kind in 0usize..3, l0 in -2i32..=2, l1 in -2i32..=2, l2 in -2i32..=2,
                            x in 0.1f64..3.0, s in prop::sample::select(vec![0.5, 2.0, 10.0])) {
            let build = |w0| match kind {
                0 => ChannelSpec::single(l0, l1, w0),
                1 => ChannelSpec::joint(l0, l1, l2, w0),
                _ => ChannelSpec::signal(l0, l1, w0),
            }.unwrap();
            let a = norm(&build(1.0), x);
            let b = norm(&build(s), x);
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-12), "{} vs {}", a, b);
        }

        #[test]
        fn sign_flip_isotropy(kind in 0usize..3, l0 in -2i32..=2, l1 in -2i32..=2, l2 in -2i32..=2, x in 0.1f64..3.0) {
            let ch = match kind {
                0 => ChannelSpec::single(l0, l1, 1.0),
                1 => ChannelSpec::joint(l0, l1, l2, 1.0),
                _ => ChannelSpec::signal(l0, l1, 1.0),
            }.unwrap();
            let a = norm(&ch, x);
            let b = norm(&ch.mirrored().unwrap(), x);
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-12));
        }
    }
}
