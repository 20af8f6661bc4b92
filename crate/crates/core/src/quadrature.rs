//! Tensor-product Gauss-Legendre integration over the polar probability
//! domains, with convergence by node doubling.
//!
//! Integrands of the probability calculators carry the Kolmogorov
//! coherence factor, which has a `|d|^(5/3)` cusp where the two integration
//! points coincide (`rp = r`, `dtheta = 0`). The rules here are laid out
//! around that line: the inner radial axis is split at `rp = r` with nodes
//! graded toward the split, and the angular axis is graded toward
//! `dtheta = 0`. With that layout the doubling loop converges quickly even
//! though a plain tensor rule would only converge algebraically.
//!
//! Angular integrals run over `[0, pi]` and are doubled: every integrand is
//! required to be even and `2 pi`-periodic in `dtheta`. The full-period
//! variant exists to check that reduction.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Grading exponent toward the coincidence cusp.
const CUSP_GRADING: i32 = 3;
/// Grading exponent toward the origin for the 2D radial axis.
const ORIGIN_GRADING: i32 = 2;
/// Extra radial extent (in units of `w0`) used by the truncation check.
pub const TRUNCATION_CHECK_EXTENSION: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    /// Nodes per radial panel at the first refinement level.
    pub radial_nodes: usize,
    /// Nodes over the full angular period at the first level (even).
    pub angular_nodes: usize,
    /// Radial truncation at `r_max_factor * w0`.
    pub r_max_factor: f64,
    pub rel_tolerance: f64,
    pub max_refinements: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { radial_nodes: 24, angular_nodes: 48, r_max_factor: 6.0, rel_tolerance: 1e-6, max_refinements: 4 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes == 0 || self.angular_nodes == 0 || self.max_refinements == 0 {
            return Err(Error::InvalidInput("quadrature node counts and refinements must be positive".into()));
        }
        if !self.angular_nodes.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("angular_nodes must be even, got {}", self.angular_nodes)));
        }
        if !(self.r_max_factor > 0.0) || !(self.rel_tolerance > 0.0) {
            return Err(Error::InvalidInput("r_max_factor and rel_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Same configuration with every node count doubled.
    pub fn doubled(&self) -> Self {
        Self { radial_nodes: 2 * self.radial_nodes, angular_nodes: 2 * self.angular_nodes, ..self.clone() }
    }

    pub fn r_max(&self, w0: f64) -> f64 {
        self.r_max_factor * w0
    }

    fn level(&self, k: u32) -> (usize, usize) {
        (self.radial_nodes << k, self.angular_nodes << k)
    }
}

/// Nodes and weights of a one-dimensional rule on `domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: (f64, f64),
}

impl GridRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Legendre `P_n(x)` and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss-Legendre rule mapped to `[lo, hi]`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<GridRule> {
    if n == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad Gauss-Legendre request n={n} on [{lo}, {hi}]")));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess for the i-th largest root
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d.is_finite() { d } else { dp };
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        w[i] = weight;
        x[n - 1 - i] = z;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    Ok(GridRule {
        nodes: x.iter().map(|t| c + h * t).collect(),
        weights: w.iter().map(|v| h * v).collect(),
        domain: (lo, hi),
    })
}

/// Which end of the interval a graded rule clusters its nodes toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toward {
    Lo,
    Hi,
}

/// Gauss-Legendre rule in `t` pulled back through `x = lo + (hi - lo) t^power`
/// (or the mirror image for [`Toward::Hi`]).
pub fn graded_rule(n: usize, lo: f64, hi: f64, toward: Toward, power: i32) -> Result<GridRule> {
    if power < 1 {
        return Err(Error::InvalidInput(format!("grading power must be >= 1, got {power}")));
    }
    let unit = gauss_legendre(n, 0.0, 1.0)?;
    let len = hi - lo;
    let mut pairs: Vec<(f64, f64)> = unit
        .nodes
        .iter()
        .zip(&unit.weights)
        .map(|(&t, &w)| {
            let s = t.powi(power);
            let ws = w * power as f64 * t.powi(power - 1) * len;
            match toward {
                Toward::Lo => (lo + len * s, ws),
                Toward::Hi => (hi - len * s, ws),
            }
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GridRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        domain: (lo, hi),
    })
}

/// Angular domain of the 2D/3D engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularDomain {
    /// Integrate `[0, pi]` and double; integrand must be even in `dtheta`.
    HalfPeriodEven,
    /// Integrate the whole `[0, 2 pi]` period.
    FullPeriod,
}

/// Converged value plus every estimate produced on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub value: f64,
    pub history: Vec<f64>,
}

impl Refinement {
    /// `|I_k - I_{k-1}| / |I_k|` for every refinement step.
    pub fn relative_changes(&self) -> Vec<f64> {
        self.history.windows(2).map(|w| (w[1] - w[0]).abs() / w[1].abs()).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Estimate {
    value: f64,
    /// Integral of the absolute integrand; bounds round-off in `value`.
    magnitude: f64,
}

fn refine(cfg: &QuadratureConfig, mut estimate: impl FnMut(u32) -> Result<Estimate>) -> Result<Refinement> {
    cfg.validate()?;
    let mut prev = estimate(0)?;
    let mut history = vec![prev.value];
    for k in 1..=cfg.max_refinements {
        let cur = estimate(k)?;
        history.push(cur.value);
        let change = (cur.value - prev.value).abs();
        let noise = 64.0 * f64::EPSILON * cur.magnitude;
        if change <= cfg.rel_tolerance * cur.value.abs() || change <= noise {
            return Ok(Refinement { value: cur.value, history });
        }
        prev = cur;
    }
    let n = history.len();
    Err(Error::NonConvergence { last: history[n - 1], previous: history[n - 2] })
}

fn angular_rule(n_full: usize, domain: AngularDomain) -> Result<(GridRule, f64)> {
    let half = graded_rule((n_full / 2).max(1), 0.0, PI, Toward::Lo, CUSP_GRADING)?;
    Ok(match domain {
        AngularDomain::HalfPeriodEven => (half, 2.0),
        AngularDomain::FullPeriod => {
            let mut nodes = half.nodes.clone();
            let mut weights = half.weights.clone();
            for (x, w) in half.nodes.iter().zip(&half.weights).rev() {
                nodes.push(2.0 * PI - x);
                weights.push(*w);
            }
            (GridRule { nodes, weights, domain: (0.0, 2.0 * PI) }, 1.0)
        }
    })
}

/// `int_0^{r_max} f(r) dr` with plain Gauss-Legendre and node doubling.
/// Any radial measure factor belongs inside `f`.
pub fn integrate_radial<F>(f: F, cfg: &QuadratureConfig, w0: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let r_max = cfg.r_max(w0);
    refine(cfg, |k| {
        let (n, _) = cfg.level(k);
        let rule = gauss_legendre(n, 0.0, r_max)?;
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = w * f(r);
            value += v;
            magnitude += v.abs();
        }
        Ok(Estimate { value, magnitude })
    })
    .map(|r| r.value)
}

fn estimate_2d<W, K>(
    weight: &W,
    kernel: &K,
    n_r: usize,
    n_a: usize,
    r_max: f64,
    domain: AngularDomain,
) -> Result<Estimate>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64) -> f64,
{
    let radial = graded_rule(n_r, 0.0, r_max, Toward::Lo, ORIGIN_GRADING)?;
    let (ang, fold) = angular_rule(n_a, domain)?;
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
        let outer = wr * r * weight(r);
        if outer == 0.0 {
            continue;
        }
        let mut s = 0.0;
        let mut sa = 0.0;
        for (&t, &wt) in ang.nodes.iter().zip(&ang.weights) {
            let v = wt * kernel(r, t);
            s += v;
            sa += v.abs();
        }
        value += outer * s;
        magnitude += outer.abs() * sa;
    }
    Ok(Estimate { value: fold * value, magnitude: fold * magnitude })
}

fn estimate_3d<W, K>(
    weight: &W,
    kernel: &K,
    n_r: usize,
    n_a: usize,
    r_max: f64,
    domain: AngularDomain,
) -> Result<Estimate>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64, f64) -> f64,
{
    let outer = gauss_legendre(n_r, 0.0, r_max)?;
    // unit rule graded toward 0, reused on both sides of rp = r
    let unit = graded_rule(n_r, 0.0, 1.0, Toward::Lo, CUSP_GRADING)?;
    let (ang, fold) = angular_rule(n_a, domain)?;
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for (&r, &wr) in outer.nodes.iter().zip(&outer.weights) {
        let wr_full = wr * r * weight(r);
        if wr_full == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        let mut inner_abs = 0.0;
        for (&s, &ws) in unit.nodes.iter().zip(&unit.weights) {
            let below = (r - r * s, r * ws);
            let above = (r + (r_max - r) * s, (r_max - r) * ws);
            for (rp, wp) in [below, above] {
                let wp_full = wp * rp * weight(rp);
                if wp_full == 0.0 {
                    continue;
                }
                let mut s_ang = 0.0;
                let mut s_abs = 0.0;
                for (&t, &wt) in ang.nodes.iter().zip(&ang.weights) {
                    let v = wt * kernel(r, rp, t);
                    s_ang += v;
                    s_abs += v.abs();
                }
                inner += wp_full * s_ang;
                inner_abs += wp_full.abs() * s_abs;
            }
        }
        value += wr_full * inner;
        magnitude += wr_full.abs() * inner_abs;
    }
    Ok(Estimate { value: fold * value, magnitude: fold * magnitude })
}

/// `int int weight(r) kernel(r, dtheta) r dr ddtheta` over
/// `[0, r_max] x [0, 2 pi]`, refined until converged.
pub fn integrate_weighted_2d<W, K>(
    weight: W,
    kernel: K,
    cfg: &QuadratureConfig,
    w0: f64,
    domain: AngularDomain,
) -> Result<Refinement>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64) -> f64,
{
    let r_max = cfg.r_max(w0);
    refine(cfg, |k| {
        let (n_r, n_a) = cfg.level(k);
        estimate_2d(&weight, &kernel, n_r, n_a, r_max, domain)
    })
}

/// `int int int weight(r) weight(rp) kernel(r, rp, dtheta) r rp dr drp ddtheta`
/// over `[0, r_max]^2 x [0, 2 pi]`, refined until converged.
///
/// `kernel` may have a cusp on the line `rp = r, dtheta = 0` but must be
/// smooth elsewhere; the separable `weight` is evaluated once per node.
pub fn integrate_weighted_3d<W, K>(
    weight: W,
    kernel: K,
    cfg: &QuadratureConfig,
    w0: f64,
    domain: AngularDomain,
) -> Result<Refinement>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64, f64) -> f64,
{
    let r_max = cfg.r_max(w0);
    refine(cfg, |k| {
        let (n_r, n_a) = cfg.level(k);
        estimate_3d(&weight, &kernel, n_r, n_a, r_max, domain)
    })
}

/// One unrefined estimate of [`integrate_weighted_2d`] at the first level,
/// returned with the integral of the absolute integrand.
pub fn weighted_2d_base_level<W, K>(
    weight: W,
    kernel: K,
    cfg: &QuadratureConfig,
    w0: f64,
    domain: AngularDomain,
) -> Result<(f64, f64)>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64) -> f64,
{
    cfg.validate()?;
    let (n_r, n_a) = cfg.level(0);
    let e = estimate_2d(&weight, &kernel, n_r, n_a, cfg.r_max(w0), domain)?;
    Ok((e.value, e.magnitude))
}

/// One unrefined estimate of [`integrate_weighted_3d`] at the first level,
/// returned with the integral of the absolute integrand.
pub fn weighted_3d_base_level<W, K>(
    weight: W,
    kernel: K,
    cfg: &QuadratureConfig,
    w0: f64,
    domain: AngularDomain,
) -> Result<(f64, f64)>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64, f64) -> f64,
{
    cfg.validate()?;
    let (n_r, n_a) = cfg.level(0);
    let e = estimate_3d(&weight, &kernel, n_r, n_a, cfg.r_max(w0), domain)?;
    Ok((e.value, e.magnitude))
}

/// `int int f(r, dtheta) r dr ddtheta`; `f` must be even in `dtheta`.
pub fn integrate_product_2d<F>(f: F, cfg: &QuadratureConfig, w0: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_weighted_2d(|_| 1.0, f, cfg, w0, AngularDomain::HalfPeriodEven).map(|r| r.value)
}

/// `int int int f(r, rp, dtheta) r rp dr drp ddtheta`; `f` must be even in
/// `dtheta`.
pub fn integrate_product_3d<F>(f: F, cfg: &QuadratureConfig, w0: f64) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    integrate_weighted_3d(|_| 1.0, f, cfg, w0, AngularDomain::HalfPeriodEven).map(|r| r.value)
}

/// Integral of `|weight(r) weight(rp) kernel|` over the part of the
/// extended domain `max(r, rp) in [r_max, r_max + 2 w0]`, at the first
/// refinement level. Compared against the converged value it says whether
/// the radial truncation lost anything.
pub fn truncation_shell_3d<W, K>(weight: W, kernel: K, cfg: &QuadratureConfig, w0: f64) -> Result<f64>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64, f64) -> f64,
{
    cfg.validate()?;
    let r_max = cfg.r_max(w0);
    let r_ext = r_max + TRUNCATION_CHECK_EXTENSION * w0;
    let n = cfg.radial_nodes;
    let shell = gauss_legendre((n / 2).max(2), r_max, r_ext)?;
    let core = gauss_legendre(n, 0.0, r_max)?;
    let full = gauss_legendre(n, 0.0, r_ext)?;
    let (ang, fold) = angular_rule(cfg.angular_nodes, AngularDomain::HalfPeriodEven)?;
    let block = |a: &GridRule, b: &GridRule| {
        let mut total = 0.0;
        for (&r, &wr) in a.nodes.iter().zip(&a.weights) {
            let fr = wr * r * weight(r);
            for (&rp, &wp) in b.nodes.iter().zip(&b.weights) {
                let frp = wp * rp * weight(rp);
                let ang_sum: f64 =
                    ang.nodes.iter().zip(&ang.weights).map(|(&t, &wt)| wt * kernel(r, rp, t).abs()).sum();
                total += (fr * frp).abs() * ang_sum;
            }
        }
        total
    };
    Ok(fold * (block(&shell, &full) + block(&core, &shell)))
}

/// Two-dimensional counterpart of [`truncation_shell_3d`].
pub fn truncation_shell_2d<W, K>(weight: W, kernel: K, cfg: &QuadratureConfig, w0: f64) -> Result<f64>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64) -> f64,
{
    cfg.validate()?;
    let r_max = cfg.r_max(w0);
    let shell = gauss_legendre(cfg.radial_nodes.max(2), r_max, r_max + TRUNCATION_CHECK_EXTENSION * w0)?;
    let (ang, fold) = angular_rule(cfg.angular_nodes, AngularDomain::HalfPeriodEven)?;
    let mut total = 0.0;
    for (&r, &wr) in shell.nodes.iter().zip(&shell.weights) {
        let fr = (wr * r * weight(r)).abs();
        let ang_sum: f64 = ang.nodes.iter().zip(&ang.weights).map(|(&t, &wt)| wt * kernel(r, t).abs()).sum();
        total += fr * ang_sum;
    }
    Ok(fold * total)
}
