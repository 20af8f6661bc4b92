//! Command-line front end of the `oam-turb` binary.
//!
//! Exit codes: 0 success, 2 quadrature non-convergence, 3 invalid input or
//! usage, 4 Monte Carlo disagreement (`|z| >= 3`), 1 anything else.

pub mod figures;
pub mod output;


use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::phase_screen_mc::mc_joint_probability;
use crate::probabilities::{
    baseline, find_peak, normalized_probability, peak_scaling, probability, sweep, validate_grid, ChannelKind,
    ChannelSpec, PeakFamily, ProbabilityPoint, DEFAULT_PEAK_BRACKET,
};
use crate::quadrature::QuadratureConfig;

use figures::{compute_figure, Panel};
use output::curve_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_MC_DISAGREEMENT: i32 = 4;

/// Default Monte Carlo grid size per side.
pub const DEFAULT_N_GRID: usize = 256;
pub const DEFAULT_N_SCREENS: usize = 500;
/// `|z|` at or above which `validate-mc` reports disagreement.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Parser)]
#[command(name = "oam-turb", version, about = "OAM detection probabilities in Kolmogorov turbulence")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML file with run settings; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub radial_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub angular_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub r_max_factor: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub max_refinements: Option<u32>,
}

#[derive(Debug, Args, Default)]
pub struct ChannelArgs {
    /// single, joint or signal.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub l0: Option<i32>,
    #[arg(long)]
    pub p0: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub l1: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub l2: Option<i32>,
    /// Beam waist shared by all modes.
    #[arg(long)]
    pub w0: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce one figure panel as CSV curves plus an SVG chart.
    Figure {
        /// 1a, 1b, 1c, 1d, 2a, 2b, 3a or 3b.
        panel: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalized probability of one channel over a grid.
    Sweep {
        #[command(flatten)]
        channel: ChannelArgs,
        /// LO:HI:COUNT, evenly spaced, COUNT >= 2.
        #[arg(long)]
        grid: Option<String>,
        /// Fixed Fried parameter (`inf` allowed); grid values are then beam waists.
        #[arg(long)]
        r0: Option<f64>,
        /// Expected OAM mismatch; a different channel mismatch is rejected.
        #[arg(long, allow_negative_numbers = true)]
        delta_l: Option<i32>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Peak location, height and width of a mismatched channel.
    Peak {
        #[arg(long, allow_negative_numbers = true)]
        delta_l: i32,
        /// single or joint.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        l0: Option<i32>,
        /// Idler OAM of a joint channel (defaults to l0).
        #[arg(long, allow_negative_numbers = true)]
        l2: Option<i32>,
        /// LO:HI search bracket in w0/r0.
        #[arg(long)]
        bracket: Option<String>,
    },
    /// Peak locations for delta_l = 1..=N with a linear fit.
    Scaling {
        #[arg(long)]
        family: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        l0: Option<i32>,
        #[arg(long)]
        delta_l_max: Option<i32>,
        #[arg(long)]
        bracket: Option<String>,
    },
    /// Compare the quadrature value with a phase-screen Monte Carlo estimate.
    ValidateMc {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        w0_over_r0: Option<f64>,
        /// Fried parameter; the ratio is then w0 / r0.
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        n_screens: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n_grid: Option<usize>,
    },
}

/// Flat run settings read from `--config`. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: Option<String>,
    pub l0: Option<i32>,
    pub p0: Option<u32>,
    pub l1: Option<i32>,
    pub l2: Option<i32>,
    pub w0: Option<f64>,
    pub grid: Option<String>,
    pub r0: Option<f64>,
    pub w0_over_r0: Option<f64>,
    pub delta_l: Option<i32>,
    pub delta_l_max: Option<i32>,
    pub family: Option<String>,
    pub bracket: Option<String>,
    pub radial_nodes: Option<usize>,
    pub angular_nodes: Option<usize>,
    pub r_max_factor: Option<f64>,
    pub rel_tolerance: Option<f64>,
    pub max_refinements: Option<u32>,
    pub n_screens: Option<usize>,
    pub seed: Option<u64>,
    pub n_grid: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `self` with every unset key taken from `fallback`.
    pub fn or(self, fallback: RunConfig) -> RunConfig {
        RunConfig {
            kind: self.kind.or(fallback.kind),
            l0: self.l0.or(fallback.l0),
            p0: self.p0.or(fallback.p0),
            l1: self.l1.or(fallback.l1),
            l2: self.l2.or(fallback.l2),
            w0: self.w0.or(fallback.w0),
            grid: self.grid.or(fallback.grid),
            r0: self.r0.or(fallback.r0),
            w0_over_r0: self.w0_over_r0.or(fallback.w0_over_r0),
            delta_l: self.delta_l.or(fallback.delta_l),
            delta_l_max: self.delta_l_max.or(fallback.delta_l_max),
            family: self.family.or(fallback.family),
            bracket: self.bracket.or(fallback.bracket),
            radial_nodes: self.radial_nodes.or(fallback.radial_nodes),
            angular_nodes: self.angular_nodes.or(fallback.angular_nodes),
            r_max_factor: self.r_max_factor.or(fallback.r_max_factor),
            rel_tolerance: self.rel_tolerance.or(fallback.rel_tolerance),
            max_refinements: self.max_refinements.or(fallback.max_refinements),
            n_screens: self.n_screens.or(fallback.n_screens),
            seed: self.seed.or(fallback.seed),
            n_grid: self.n_grid.or(fallback.n_grid),
            out: self.out.or(fallback.out),
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig> {
        let d = QuadratureConfig::default();
        let q = QuadratureConfig {
            radial_nodes: self.radial_nodes.unwrap_or(d.radial_nodes),
            angular_nodes: self.angular_nodes.unwrap_or(d.angular_nodes),
            r_max_factor: self.r_max_factor.unwrap_or(d.r_max_factor),
            rel_tolerance: self.rel_tolerance.unwrap_or(d.rel_tolerance),
            max_refinements: self.max_refinements.unwrap_or(d.max_refinements),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn w0(&self) -> Result<f64> {
        let w0 = self.w0.unwrap_or(1.0);
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::InvalidInput(format!("w0 must be finite and > 0, got {w0}")));
        }
        Ok(w0)
    }

    /// Channel from `kind`, `l0`, `p0`, `l1`, `l2` and `w0`.
    pub fn channel(&self) -> Result<ChannelSpec> {
        let kind: ChannelKind =
            self.kind.as_deref().ok_or_else(|| Error::InvalidInput("missing --kind".into()))?.parse()?;
        let l0 = self.l0.ok_or_else(|| Error::InvalidInput("missing --l0".into()))?;
        let l1 = self.l1.ok_or_else(|| Error::InvalidInput("missing --l1".into()))?;
        let w0 = self.w0()?;
        let ch = match (kind, self.l2) {
            (ChannelKind::Joint, Some(l2)) => ChannelSpec::joint(l0, l1, l2, w0)?,
            (ChannelKind::Joint, None) => return Err(Error::InvalidChannel("joint channel needs --l2".into())),
            (_, Some(_)) => return Err(Error::InvalidChannel(format!("{} channel takes no --l2", kind.name()))),
            (ChannelKind::Single, None) => ChannelSpec::single(l0, l1, w0)?,
            (ChannelKind::Signal, None) => ChannelSpec::signal(l0, l1, w0)?,
        };
        match self.p0 {
            Some(p0) => ch.with_p0(p0),
            None => Ok(ch),
        }
    }
}

impl ChannelArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            kind: self.kind,
            l0: self.l0,
            p0: self.p0,
            l1: self.l1,
            l2: self.l2,
            w0: self.w0,
            ..RunConfig::default()
        }
    }
}

/// `LO:HI:COUNT` as `COUNT` evenly spaced values.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidInput(format!("grid must be LO:HI:COUNT, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count < 2 {
        return Err(Error::InvalidInput(format!("grid count must be >= 2, got {count}")));
    }
    let grid: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
    validate_grid(&grid)?;
    Ok(grid)
}

/// `LO:HI` bracket.
pub fn parse_bracket(spec: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidInput(format!("bracket must be LO:HI, got {spec:?}"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_non_convergence() {
        return EXIT_NON_CONVERGENCE;
    }
    match e {
        Error::InvalidInput(_)
        | Error::InvalidChannel(_)
        | Error::NoInteriorPeak { .. }
        | Error::NoHalfMaximum
        | Error::DegenerateFit(_)
        | Error::SeparationOutOfRange { .. }
        | Error::GridTooCoarse(_) => EXIT_INVALID,
        Error::SweepFailed { failures } => failures.first().map_or(EXIT_FAILURE, |(_, e)| exit_code(e)),
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let file = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let common = RunConfig {
        radial_nodes: cli.common.radial_nodes,
        angular_nodes: cli.common.angular_nodes,
        r_max_factor: cli.common.r_max_factor,
        rel_tolerance: cli.common.rel_tolerance,
        max_refinements: cli.common.max_refinements,
        ..RunConfig::default()
    };
    match cli.command {
        Command::Figure { panel, out: dir } => {
            let cfg = RunConfig { out: dir, ..common }.or(file);
            cmd_figure(&panel, &cfg, out, err)
        }
        Command::Sweep { channel, grid, r0, delta_l, out: path } => {
            let cfg = RunConfig { grid, r0, delta_l, out: path, ..channel.into_config() }.or(common).or(file);
            cmd_sweep(&cfg, out)
        }
        Command::Peak { delta_l, kind, l0, l2, bracket } => {
            let cfg = RunConfig { delta_l: Some(delta_l), kind, l0, l2, bracket, ..common }.or(file);
            cmd_peak(&cfg, out)
        }
        Command::Scaling { family, l0, delta_l_max, bracket } => {
            let cfg = RunConfig { family, l0, delta_l_max, bracket, ..common }.or(file);
            cmd_scaling(&cfg, out)
        }
        Command::ValidateMc { channel, w0_over_r0, r0, n_screens, seed, n_grid } => {
            let cfg = RunConfig { w0_over_r0, r0, n_screens, seed: Some(seed), n_grid, ..channel.into_config() }
                .or(common)
                .or(file);
            cmd_validate_mc(&cfg, out)
        }
    }
}

/// Writes all CSVs of a panel, then its SVG. CSVs already written are
/// removed if a later CSV write fails; an SVG failure only warns.
fn cmd_figure(panel: &str, cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let panel: Panel = panel.parse()?;
    let qcfg = cfg.quadrature()?;
    let fig = compute_figure(panel, cfg.w0()?, &qcfg)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;

    let mut written: Vec<PathBuf> = Vec::new();
    for (name, body) in &fig.csv {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, body) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            let _ = std::fs::remove_file(&path);
            return Err(e.into());
        }
        written.push(path);
    }
    let svg = dir.join(format!("fig{}.svg", panel.id()));
    match std::fs::write(&svg, fig.chart.render()) {
        Ok(()) => written.push(svg),
        Err(e) => {
            let _ = writeln!(err, "warning: could not write {}: {e}", svg.display());
        }
    }
    for p in written {
        writeln!(out, "{}", p.display())?;
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let ch = cfg.channel()?;
    if let Some(want) = cfg.delta_l {
        if ch.delta_l() != want {
            return Err(Error::InvalidChannel(format!("{ch} has delta_l = {}, expected {want}", ch.delta_l())));
        }
    }
    let grid = parse_grid(cfg.grid.as_deref().ok_or_else(|| Error::InvalidInput("missing --grid".into()))?)?;
    let qcfg = cfg.quadrature()?;
    let points = match cfg.r0 {
        None => sweep(&ch, &grid, &qcfg)?,
        Some(r0) => sweep_fixed_r0(&ch, &grid, r0, &qcfg)?,
    };
    let csv = curve_csv(&ch, &points);
    match &cfg.out {
        Some(path) => std::fs::write(path, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

/// Sweep over beam waists at a fixed Fried parameter; rows carry `w0 / r0`.
fn sweep_fixed_r0(ch: &ChannelSpec, waists: &[f64], r0: f64, qcfg: &QuadratureConfig) -> Result<Vec<ProbabilityPoint>> {
    if r0.is_nan() || r0 <= 0.0 {
        return Err(Error::InvalidInput(format!("r0 must be > 0 or inf, got {r0}")));
    }
    if waists.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidInput("with --r0 the grid holds beam waists, which must be > 0".into()));
    }
    qcfg.validate()?;
    let results: Vec<Result<ProbabilityPoint>> = waists
        .par_iter()
        .map(|&w| {
            let c = ch.with_w0(w)?;
            let ratio = w / r0;
            let raw = probability(&c, ratio, qcfg)?;
            let base = baseline(&c, qcfg)?;
            if !(base > 0.0) || !base.is_finite() {
                return Err(Error::DegenerateBaseline(base));
            }
            Ok(ProbabilityPoint { w0_over_r0: ratio, value: raw / base, raw })
        })
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (&w, r) in waists.iter().zip(results) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((w / r0, e)),
        }
    }
    if failures.is_empty() {
        Ok(points)
    } else {
        Err(Error::SweepFailed { failures })
    }
}

fn peak_family(name: Option<&str>) -> Result<PeakFamily> {
    name.unwrap_or("single").parse()
}

fn bracket(cfg: &RunConfig) -> Result<(f64, f64)> {
    cfg.bracket.as_deref().map_or(Ok(DEFAULT_PEAK_BRACKET), parse_bracket)
}

fn cmd_peak(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let dl = cfg.delta_l.ok_or_else(|| Error::InvalidInput("missing --delta-l".into()))?;
    let l0 = cfg.l0.unwrap_or(0);
    let w0 = cfg.w0()?;
    let ch = match peak_family(cfg.kind.as_deref())? {
        PeakFamily::Single => {
            if cfg.l2.is_some() {
                return Err(Error::InvalidChannel("single channel takes no --l2".into()));
            }
            ChannelSpec::single(l0, l0 + dl, w0)?
        }
        PeakFamily::Joint => {
            let l2 = cfg.l2.unwrap_or(l0);
            ChannelSpec::joint(l0, dl + l0 - l2, l2, w0)?
        }
    };
    let p = find_peak(&ch, bracket(cfg)?, &cfg.quadrature()?)?;
    writeln!(out, "channel = {ch}")?;
    writeln!(out, "delta_l = {}", p.delta_l)?;
    writeln!(out, "w0_over_r0_max = {}", p.w0_over_r0_max)?;
    writeln!(out, "peak_value = {}", p.peak_value)?;
    writeln!(out, "half_max_width = {}", p.half_max_width)?;
    Ok(EXIT_OK)
}

fn cmd_scaling(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let family = peak_family(cfg.family.as_deref())?;
    let l0 = cfg.l0.unwrap_or(0);
    let max = cfg.delta_l_max.ok_or_else(|| Error::InvalidInput("missing --delta-l-max".into()))?;
    let dls: Vec<i32> = (1..=max).collect();
    let rep = peak_scaling(family, l0, &dls, bracket(cfg)?, &cfg.quadrature()?)?;
    writeln!(out, "delta_l,w0_over_r0_max,peak_value,half_max_width")?;
    for p in &rep.peaks {
        writeln!(out, "{},{},{},{}", p.delta_l, p.w0_over_r0_max, p.peak_value, p.half_max_width)?;
    }
    writeln!(out, "slope = {}", rep.slope)?;
    writeln!(out, "intercept = {}", rep.intercept)?;
    writeln!(out, "max_residual = {}", rep.max_residual)?;
    writeln!(out, "relative_max_residual = {}", rep.relative_max_residual)?;
    let sd: Vec<String> = rep.second_differences().iter().map(|d| d.to_string()).collect();
    writeln!(out, "second_differences = {}", sd.join(" "))?;
    Ok(EXIT_OK)
}

fn cmd_validate_mc(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let ch = cfg.channel()?;
    let seed = cfg.seed.ok_or_else(|| Error::InvalidInput("missing --seed".into()))?;
    let ratio = match (cfg.w0_over_r0, cfg.r0) {
        (Some(_), Some(_)) => return Err(Error::InvalidInput("give either --w0-over-r0 or --r0, not both".into())),
        (Some(x), None) => x,
        (None, Some(r0)) => {
            if !r0.is_finite() {
                return Err(Error::InvalidInput("Monte Carlo validation needs a finite r0".into()));
            }
            if !(r0 > 0.0) {
                return Err(Error::InvalidInput(format!("r0 must be > 0, got {r0}")));
            }
            ch.w0 / r0
        }
        (None, None) => return Err(Error::InvalidInput("missing --w0-over-r0 or --r0".into())),
    };
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::InvalidInput(format!(
            "Monte Carlo validation needs a finite r0 (w0/r0 > 0), got w0/r0 = {ratio}"
        )));
    }
    let n_screens = cfg.n_screens.unwrap_or(DEFAULT_N_SCREENS);
    let n_grid = cfg.n_grid.unwrap_or(DEFAULT_N_GRID);
    let quad = normalized_probability(&ch, ratio, &cfg.quadrature()?)?;
    let mc = mc_joint_probability(&ch, ratio, n_screens, seed, n_grid)?;
    let z = mc.z_score(quad);
    writeln!(out, "channel = {ch}")?;
    writeln!(out, "w0_over_r0 = {ratio}")?;
    writeln!(out, "quadrature = {quad}")?;
    writeln!(out, "mc_mean = {}", mc.mean)?;
    writeln!(out, "mc_stderr = {}", mc.stderr)?;
    writeln!(out, "z = {z}")?;
    writeln!(out, "n_screens = {n_screens}")?;
    writeln!(out, "n_grid = {n_grid}")?;
    writeln!(out, "seed = {seed}")?;
    Ok(if z.abs() < Z_THRESHOLD { EXIT_OK } else { EXIT_MC_DISAGREEMENT })
}
