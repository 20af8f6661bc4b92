//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;

use oam_turb::lg_modes::radial_orthonormality_defect;
use oam_turb::phase_screen_mc::{empirical_structure_function, mc_joint_probability, sub_seed, ScreenGenerator};
use oam_turb::probabilities::{
    find_peak, normalized_probability, ChannelSpec, PeakFamily, PeakResult, DEFAULT_PEAK_BRACKET, PEAK_TOLERANCE,
};
use oam_turb::quadrature::QuadratureConfig;
use oam_turb::turbulence::{coherence, structure_function, TurbulenceParams};

const ORTHONORMALITY_TOL: f64 = 1e-10;
const CONSERVING_LIMIT_TOL: f64 = 1e-6;
const MISMATCH_LIMIT_TOL: f64 = 1e-8;
const SCALE_INVARIANCE_TOL: f64 = 1e-8;
const SIGN_FLIP_TOL: f64 = 1e-10;
const LINEAR_FIT_TOL: f64 = 0.05;
const DENSE_SCAN_STEP: f64 = 1e-4;
const DENSE_SCAN_HALF_POINTS: i32 = 50;
const CURVATURE_FACTOR: f64 = 3.0;
const MC_SCREENS: usize = 500;
const MC_SEED: u64 = 2024;
const MC_GRID: usize = 256;
const MC_Z_LIMIT: f64 = 3.0;
const SCREEN_BAND: (f64, f64) = (0.85, 1.15);
const SCREEN_COUNT: u64 = 200;
const CONVERGENCE_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Normalized probability evaluations recorded for the convergence check.
#[derive(Default)]
struct Recorder {
    values: Vec<(ChannelSpec, f64, f64)>,
}

impl Recorder {
    fn eval(&mut self, ch: &ChannelSpec, x: f64) -> f64 {
        let v = normalized_probability(ch, x, &QuadratureConfig::default()).expect("quadrature converges");
        self.values.push((*ch, x, v));
        v
    }
}

fn single(l0: i32, l: i32) -> ChannelSpec {
    ChannelSpec::single(l0, l, 1.0).unwrap()
}

fn joint(l0: i32, l1: i32, l2: i32) -> ChannelSpec {
    ChannelSpec::joint(l0, l1, l2, 1.0).unwrap()
}

fn signal(l0: i32, l1: i32) -> ChannelSpec {
    ChannelSpec::signal(l0, l1, 1.0).unwrap()
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn mode_orthonormality() -> Outcome {
    let q = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for l in -4..=4 {
        for p1 in 0..=3 {
            for p2 in 0..=3 {
                worst = worst.max(radial_orthonormality_defect(l, p1, p2, 1.0, &q).unwrap());
            }
        }
    }
    outcome(worst < ORTHONORMALITY_TOL, format!("max defect {worst:.2e} (limit {ORTHONORMALITY_TOL:e})"))
}

fn structure_function_pins() -> Outcome {
    let mut ok = true;
    for r0 in [0.01, 0.37, 1.0, 5.0, 1e3] {
        let tp = TurbulenceParams::new(r0).unwrap();
        ok &= structure_function(r0, &tp) == 6.88;
        ok &= coherence(0.0, &tp) == 1.0;
    }
    let free = TurbulenceParams::none();
    ok &= coherence(0.0, &free) == 1.0 && coherence(1e6, &free) == 1.0 && structure_function(1e6, &free) == 0.0;
    outcome(ok, "D(r0) == 6.88, coherence(0) == 1, r0 = inf coherence == 1 (exact)")
}

fn zero_turbulence_limits(rec: &mut Recorder) -> Outcome {
    let conserving = [single(0, 0), single(2, 2), joint(1, 0, 1), joint(0, 2, -2), signal(0, 0), signal(1, 1)];
    let mismatched = [single(0, 1), single(1, 3), joint(0, 1, 0), joint(2, 0, 0), signal(0, 1)];
    let c_err = conserving.iter().map(|c| (rec.eval(c, 0.0) - 1.0).abs()).fold(0.0, f64::max);
    let m_max = mismatched.iter().map(|c| rec.eval(c, 0.0).abs()).fold(0.0, f64::max);
    outcome(
        c_err < CONSERVING_LIMIT_TOL && m_max < MISMATCH_LIMIT_TOL,
        format!("conserving |P - 1| <= {c_err:.1e}, mismatched P <= {m_max:.1e}"),
    )
}

fn scale_invariance(rec: &mut Recorder) -> Outcome {
    let chans = [single(0, 0), single(1, 2), joint(1, 0, 1), joint(0, 1, -1), joint(0, 2, 0), signal(1, 1)];
    let mut worst = 0.0f64;
    for ch in chans {
        for x in [0.5, 1.5] {
            let a = rec.eval(&ch, x);
            // (2 w0, 2 r0) keeps the ratio
            let b = normalized_probability(&ch.with_w0(2.0).unwrap(), x, &QuadratureConfig::default()).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst < SCALE_INVARIANCE_TOL, format!("max |P(w0, r0) - P(2w0, 2r0)| = {worst:.1e}"))
}

fn single_photon_ordering(rec: &mut Recorder) -> Outcome {
    let mut ok = true;
    let mut rows = Vec::new();
    for x in [0.5, 1.0, 2.0] {
        let v: Vec<f64> = (0..3).map(|k| rec.eval(&single(k, k), x)).collect();
        ok &= v[0] > v[1] && v[1] > v[2];
        rows.push(format!("x={x}: {}", fmt_list(&v)));
    }
    outcome(ok, format!("P(l0 = l = 0, 1, 2) decreasing; {}", rows.join("; ")))
}

fn entangled_below_single(rec: &mut Recorder) -> Outcome {
    let mut violations = Vec::new();
    for x in [0.5, 1.0, 2.0] {
        for k in 0..3 {
            let j = rec.eval(&joint(k, 0, k), x);
            let s = rec.eval(&single(k, k), x);
            if j >= s {
                violations.push(format!("x={x} k={k}: joint {j:.4} vs single {s:.4}"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        if violations.is_empty() {
            "joint < single at all 9 points".to_string()
        } else {
            format!("{} of 9 points violate; {}", violations.len(), violations.join("; "))
        },
    )
}

fn entangled_signal_oam_ordering(rec: &mut Recorder) -> Outcome {
    let v: Vec<f64> = (0..3).map(|k| rec.eval(&joint(0, k, -k), 1.0)).collect();
    let ordered = v[0] > v[1] && v[1] > v[2];
    let mut flip = 0.0f64;
    for k in 1..3 {
        for x in [0.5, 1.0, 2.0] {
            let a = rec.eval(&joint(0, k, -k), x);
            let b = rec.eval(&joint(0, -k, k), x);
            flip = flip.max((a - b).abs());
        }
    }
    outcome(
        ordered && flip < SIGN_FLIP_TOL,
        format!("P(|l| = 0, 1, 2) at x=1: {}; sign-flip max diff {flip:.1e}", fmt_list(&v)),
    )
}

fn signal_above_single(rec: &mut Recorder) -> Outcome {
    let mut ok = true;
    let mut rows = Vec::new();
    for x in [0.5, 1.0, 2.0, 3.0] {
        let sig = rec.eval(&signal(0, 0), x);
        let s = rec.eval(&single(0, 0), x);
        ok &= sig > s;
        rows.push(format!("x={x}: {sig:.4} > {s:.4}"));
    }
    outcome(ok, rows.join("; "))
}

struct Peaks {
    single: Vec<PeakResult>,
    joint: Vec<PeakResult>,
}

fn compute_peaks() -> Peaks {
    let q = QuadratureConfig::default();
    let run = |fam: PeakFamily| -> Vec<PeakResult> {
        (1..=4).map(|dl| find_peak(&fam.channel(0, dl, 1.0).unwrap(), DEFAULT_PEAK_BRACKET, &q).unwrap()).collect()
    };
    Peaks { single: run(PeakFamily::Single), joint: run(PeakFamily::Joint) }
}

fn mismatch_peaks(peaks: &Peaks, rec: &mut Recorder) -> Outcome {
    let s = &peaks.single[..3];
    let j = &peaks.joint[..3];
    let increasing = |p: &[PeakResult]| p.windows(2).all(|w| w[1].w0_over_r0_max > w[0].w0_over_r0_max);
    let sharper = s.iter().zip(j).all(|(a, b)| b.half_max_width < a.half_max_width);
    for (fam, list) in [(PeakFamily::Single, s), (PeakFamily::Joint, j)] {
        for p in list {
            rec.eval(&fam.channel(0, p.delta_l, 1.0).unwrap(), p.w0_over_r0_max);
        }
    }
    let loc = |p: &[PeakResult]| fmt_list(&p.iter().map(|p| p.w0_over_r0_max).collect::<Vec<_>>());
    let wid = |p: &[PeakResult]| fmt_list(&p.iter().map(|p| p.half_max_width).collect::<Vec<_>>());
    outcome(
        increasing(s) && increasing(j) && sharper,
        format!(
            "peaks found; single at [{}], joint at [{}]; increasing: {}/{}; half-max widths single [{}], joint [{}], joint narrower: {sharper}",
            loc(s),
            loc(j),
            increasing(s),
            increasing(j),
            wid(s),
            wid(j)
        ),
    )
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).abs()).fold(0.0, f64::max);
    let span = slope.abs() * (xs[xs.len() - 1] - xs[0]);
    (slope, icpt, res / span)
}

/// Location of the maximum on a `DENSE_SCAN_STEP` grid around `center`.
fn dense_argmax(ch: &ChannelSpec, center: f64) -> (f64, bool) {
    let q = QuadratureConfig::default();
    let xs: Vec<f64> =
        (-DENSE_SCAN_HALF_POINTS..=DENSE_SCAN_HALF_POINTS).map(|k| center + k as f64 * DENSE_SCAN_STEP).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| normalized_probability(ch, x, &q).unwrap()).collect();
    let i = (0..xs.len()).fold(0, |b, k| if ys[k] > ys[b] { k } else { b });
    (xs[i], i > 0 && i < xs.len() - 1)
}

fn peak_scaling_shape(peaks: &Peaks) -> Outcome {
    let dl: Vec<f64> = (1..=4).map(f64::from).collect();
    let mut dense = Vec::new();
    let mut agree = true;
    for p in &peaks.single {
        let (x, interior) = dense_argmax(&PeakFamily::Single.channel(0, p.delta_l, 1.0).unwrap(), p.w0_over_r0_max);
        agree &= interior && (x - p.w0_over_r0_max).abs() <= PEAK_TOLERANCE + DENSE_SCAN_STEP;
        dense.push(x);
    }
    let (_, _, rel) = line_fit(&dl, &peaks.single.iter().map(|p| p.w0_over_r0_max).collect::<Vec<_>>());
    let (_, _, rel_dense) = line_fit(&dl, &dense);
    let jx: Vec<f64> = peaks.joint.iter().map(|p| p.w0_over_r0_max).collect();
    let second: Vec<f64> = jx.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let curved = second.iter().all(|d| d.abs() > CURVATURE_FACTOR * PEAK_TOLERANCE);
    outcome(
        rel < LINEAR_FIT_TOL && rel_dense < LINEAR_FIT_TOL && agree && curved,
        format!(
            "single relative max residual {rel:.4} (dense scan {rel_dense:.4}, peaks agree: {agree}, limit {LINEAR_FIT_TOL}); joint second differences [{}] vs {:.1e}",
            second.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(", "),
            CURVATURE_FACTOR * PEAK_TOLERANCE
        ),
    )
}

fn monte_carlo_agreement(rec: &mut Recorder) -> Outcome {
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (l0, l1, l2) in [(0, 0, 0), (1, 0, 1), (0, 1, -1)] {
        let ch = joint(l0, l1, l2);
        for x in [0.5, 1.0] {
            let quad = rec.eval(&ch, x);
            let mc = mc_joint_probability(&ch, x, MC_SCREENS, MC_SEED, MC_GRID).unwrap();
            let z = mc.z_score(quad);
            worst = worst.max(z.abs());
            rows.push(format!("({l0},{l1},{l2})@{x}: z={z:+.2}"));
        }
    }
    outcome(worst < MC_Z_LIMIT, format!("{MC_SCREENS} screens, seed {MC_SEED}; {}", rows.join(", ")))
}

fn screen_statistics() -> Outcome {
    let gen = ScreenGenerator::new(256, 16.0).unwrap();
    let tp = TurbulenceParams::new(1.0).unwrap();
    let screens: Vec<_> = (0..SCREEN_COUNT).map(|k| gen.generate(&tp, sub_seed(7, k)).unwrap()).collect();
    let dx = screens[0].dx();
    // two samples up to a quarter of the screen
    let seps: Vec<f64> = (0..).map(|k| 2.0 * dx * 2f64.powf(0.5 * k as f64)).take_while(|&d| d <= 4.0).collect();
    let est = empirical_structure_function(&screens, &seps).unwrap();
    let ratios: Vec<f64> = est.iter().map(|&(d, dh)| dh / structure_function(d, &tp)).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    outcome(
        lo >= SCREEN_BAND.0 && hi <= SCREEN_BAND.1,
        format!(
            "D_hat / D in [{lo:.4}, {hi:.4}] over d in [{:.3}, {:.3}] ({SCREEN_COUNT} screens)",
            seps[0],
            seps[seps.len() - 1]
        ),
    )
}

fn quadrature_convergence(rec: &Recorder) -> Outcome {
    let fine = QuadratureConfig::default().doubled();
    let mut worst = 0.0f64;
    let mut at = String::new();
    for (ch, x, v) in &rec.values {
        let w = normalized_probability(ch, *x, &fine).unwrap();
        let rel = if v.abs() > 1e-12 { ((w - v) / v).abs() } else { (w - v).abs() };
        if rel > worst {
            worst = rel;
            at = format!("{ch} at {x:.4}");
        }
    }
    outcome(worst < CONVERGENCE_TOL, format!("{} values; max relative change {worst:.1e} ({at})", rec.values.len()))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_oam-turb");
    let mut ok = true;
    let figure = |dir: &std::path::Path| {
        let st = Command::new(bin).args(["figure", "1c", "--out"]).arg(dir).output().unwrap();
        assert!(st.status.success());
        (1..=3).map(|i| std::fs::read(dir.join(format!("fig1c_{i}.csv"))).unwrap()).collect::<Vec<_>>()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok &= figure(a.path()) == figure(b.path());
    let sweep = || {
        Command::new(bin)
            .args(["sweep", "--kind", "signal", "--l0", "1", "--l1", "0", "--grid", "0:4:9"])
            .output()
            .unwrap()
            .stdout
    };
    ok &= sweep() == sweep();
    let mc = || {
        Command::new(bin)
            .args([
                "validate-mc",
                "--kind",
                "joint",
                "--l0",
                "0",
                "--l1",
                "1",
                "--l2",
                "-1",
                "--w0-over-r0",
                "0.5",
                "--n-screens",
                "50",
                "--n-grid",
                "128",
                "--seed",
                "3",
            ])
            .output()
            .unwrap()
            .stdout
    };
    ok &= mc() == mc();
    outcome(ok, "figure CSVs, sweep CSV and Monte Carlo report byte-identical across runs")
}

fn main() {
    let mut rec = Recorder::default();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!("{} [{id:02}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    report(1, "mode orthonormality", mode_orthonormality());
    report(2, "structure-function pins", structure_function_pins());
    report(3, "zero-turbulence limits", zero_turbulence_limits(&mut rec));
    report(4, "scale invariance", scale_invariance(&mut rec));
    report(5, "single-photon decay ordered by l", single_photon_ordering(&mut rec));
    report(6, "entangled pairs fall off faster than single photons", entangled_below_single(&mut rec));
    report(7, "entangled decay ordered by signal OAM", entangled_signal_oam_ordering(&mut rec));
    report(8, "signal photons decay slower than single photons", signal_above_single(&mut rec));
    let peaks = compute_peaks();
    report(9, "mismatch peaks", mismatch_peaks(&peaks, &mut rec));
    report(10, "peak-location scaling", peak_scaling_shape(&peaks));
    report(11, "quadrature vs Monte Carlo", monte_carlo_agreement(&mut rec));
    report(12, "phase-screen structure function", screen_statistics());
    report(13, "quadrature convergence under node doubling", quadrature_convergence(&rec));
    report(14, "CLI determinism", cli_determinism());

    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| format!("[{:02}] {}", r.0, r.1)).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
