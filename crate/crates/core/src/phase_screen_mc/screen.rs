//! Kolmogorov phase screens by spectral synthesis.
//!
//! Phase spectrum `Phi(f) = 0.023 r0^(-5/3) |f|^(-11/3)` with `f` in cycles
//! per unit length. Every Fourier cell contributes an independent complex
//! Gaussian whose variance is the cell's share of the spectrum. The lowest
//! cells are poorly described by their centre value because of the
//! `|f|^(-11/3)` singularity, so:
//!
//! - main-grid cells with `max(|i|, |j|) <= 3` and all subharmonic cells use
//!   moment-matched weights `int_cell Phi |f|^2 / |f_c|^2`, which reproduce
//!   the small-separation slope of the structure function that each cell
//!   stands for;
//! - three levels of 3x3 subharmonics fill the centre cell;
//! - the innermost unresolved square of half-width `df / 54` becomes a
//!   random tilt with per-axis variance `int Phi (2 pi f_x)^2`.

use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::turbulence::TurbulenceParams;

/// Spectral constant of the Kolmogorov phase spectrum.
pub const SPECTRUM_CONSTANT: f64 = 0.023;
/// Subharmonic levels below the main grid.
pub const SUBHARMONIC_LEVELS: u32 = 3;
/// Main-grid cells within this Chebyshev radius use moment-matched weights.
const MOMENT_CELLS: i64 = 3;
/// Sub-grid points per axis when integrating the spectrum over a cell.
const CELL_SUBGRID: usize = 24;

/// One realization of the turbulent phase on a square grid.
///
/// `samples[row * n + col]` is the phase at `x = (col - n/2) dx`,
/// `y = (row - n/2) dx`, `dx = extent / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScreen {
    pub n: usize,
    pub extent: f64,
    pub r0: f64,
    pub seed: u64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScreenHeader {
    n: usize,
    extent: f64,
    r0: f64,
    // TOML integers are signed 64-bit
    seed: String,
}

impl PhaseScreen {
    pub fn dx(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.n + col]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    fn paths(stem: &Path) -> (PathBuf, PathBuf) {
        (stem.with_extension("bin"), stem.with_extension("txt"))
    }

    /// Writes `<stem>.bin` (row-major little-endian `f64`) and the
    /// `<stem>.txt` header.
    pub fn export(&self, stem: &Path) -> Result<()> {
        let (bin, txt) = Self::paths(stem);
        let mut bytes = Vec::with_capacity(8 * self.samples.len());
        for v in &self.samples {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(bin)?.write_all(&bytes)?;
        let header = ScreenHeader { n: self.n, extent: self.extent, r0: self.r0, seed: self.seed.to_string() };
        let text = toml::to_string(&header).map_err(|e| Error::InvalidInput(e.to_string()))?;
        fs::write(txt, text)?;
        Ok(())
    }

    pub fn import(stem: &Path) -> Result<Self> {
        let (bin, txt) = Self::paths(stem);
        let header: ScreenHeader = toml::from_str(&fs::read_to_string(txt)?)
            .map_err(|e| Error::InvalidInput(format!("bad screen header: {e}")))?;
        let seed =
            header.seed.parse().map_err(|_| Error::InvalidInput(format!("bad screen seed {:?}", header.seed)))?;
        let mut bytes = Vec::new();
        fs::File::open(bin)?.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * header.n * header.n {
            return Err(Error::InvalidInput(format!(
                "screen data holds {} bytes, header implies {}",
                bytes.len(),
                8 * header.n * header.n
            )));
        }
        let samples = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
        Ok(Self { n: header.n, extent: header.extent, r0: header.r0, seed, samples })
    }
}

fn phase_spectrum(fx: f64, fy: f64) -> f64 {
    SPECTRUM_CONSTANT * (fx * fx + fy * fy).powf(-11.0 / 6.0)
}

/// `int_cell Phi |f|^2 / |f_c|^2` over the square of half-width `h`
/// centred on `(cx, cy)`, by a midpoint sub-grid.
fn moment_weight(cx: f64, cy: f64, h: f64) -> f64 {
    let c2 = cx * cx + cy * cy;
    let mut sum = 0.0;
    for a in 0..CELL_SUBGRID {
        let fx = cx + h * ((2 * a + 1) as f64 / CELL_SUBGRID as f64 - 1.0);
        for b in 0..CELL_SUBGRID {
            let fy = cy + h * ((2 * b + 1) as f64 / CELL_SUBGRID as f64 - 1.0);
            sum += phase_spectrum(fx, fy) * (fx * fx + fy * fy) / c2;
        }
    }
    sum / (CELL_SUBGRID * CELL_SUBGRID) as f64 * (2.0 * h) * (2.0 * h)
}

/// `12 int_0^{pi/4} cos(t)^(-1/3) dt`, equal to
/// `(1/2) int_{[-1,1]^2} |u|^(-5/3) du`.
fn tilt_shape_integral() -> f64 {
    let n = 2000;
    let h = 0.25 * PI / n as f64;
    let f = |t: f64| t.cos().powf(-1.0 / 3.0);
    let mut s = f(0.0) + f(0.25 * PI);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    12.0 * s * h / 3.0
}

/// Per-axis variance of the random tilt (radians per unit length, squared)
/// standing for the spectrum inside `[-h, h]^2`, unit `r0`.
fn tilt_variance(h: f64) -> f64 {
    SPECTRUM_CONSTANT * (2.0 * PI).powi(2) * h.powf(1.0 / 3.0) * tilt_shape_integral()
}

fn fft_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

struct Subharmonic {
    sqrt_weight: f64,
    /// `exp(2 pi i f_x x_col)`
    ex: Vec<Complex64>,
    /// `exp(2 pi i f_y y_row)`
    ey: Vec<Complex64>,
}

/// Precomputed spectral weights for screens of one grid geometry.
pub struct ScreenGenerator {
    n: usize,
    extent: f64,
    sqrt_weights: Vec<f64>,
    subharmonics: Vec<Subharmonic>,
    tilt_std: f64,
    coords: Vec<f64>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl ScreenGenerator {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!("screen size must be a power of two >= 8, got {n}")));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidInput(format!("screen extent must be > 0, got {extent}")));
        }
        let df = 1.0 / extent;
        let mut sqrt_weights = vec![0.0; n * n];
        for row in 0..n {
            let j = fft_index(row, n);
            for col in 0..n {
                let i = fft_index(col, n);
                if i == 0 && j == 0 {
                    continue;
                }
                let (fx, fy) = (i as f64 * df, j as f64 * df);
                let w = if i.abs().max(j.abs()) <= MOMENT_CELLS {
                    moment_weight(fx, fy, 0.5 * df)
                } else {
                    phase_spectrum(fx, fy) * df * df
                };
                sqrt_weights[row * n + col] = w.sqrt();
            }
        }
        let dx = extent / n as f64;
        let coords: Vec<f64> = (0..n).map(|k| (k as f64 - (n / 2) as f64) * dx).collect();
        let phasor = |f: f64| -> Vec<Complex64> {
            coords.iter().map(|&x| Complex64::from_polar(1.0, 2.0 * PI * f * x)).collect()
        };
        let mut subharmonics = Vec::new();
        for p in 1..=SUBHARMONIC_LEVELS {
            let dfp = df / 3f64.powi(p as i32);
            for a in -1i32..=1 {
                for b in -1i32..=1 {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let (fx, fy) = (a as f64 * dfp, b as f64 * dfp);
                    subharmonics.push(Subharmonic {
                        sqrt_weight: moment_weight(fx, fy, 0.5 * dfp).sqrt(),
                        ex: phasor(fx),
                        ey: phasor(fy),
                    });
                }
            }
        }
        let innermost = 0.5 * df / 3f64.powi(SUBHARMONIC_LEVELS as i32);
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Ok(Self { n, extent, sqrt_weights, subharmonics, tilt_std: tilt_variance(innermost).sqrt(), coords, fft })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// One screen for Fried parameter `tp.r0()`; identical seeds give
    /// bit-identical screens.
    pub fn generate(&self, tp: &TurbulenceParams, seed: u64) -> Result<PhaseScreen> {
        if tp.is_turbulence_free() {
            return Err(Error::InvalidInput("phase screens need a finite Fried parameter".into()));
        }
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

        let mut buf: Vec<Complex64> = self
            .sqrt_weights
            .iter()
            .map(|&w| {
                let (re, im) = (normal(), normal());
                Complex64::new(re * w, im * w)
            })
            .collect();
        // rows, then columns through a transpose
        self.fft.process(&mut buf);
        let mut t = transpose(&buf, n);
        self.fft.process(&mut t);
        let buf = transpose(&t, n);
        let mut phase: Vec<f64> = buf.iter().map(|c| c.re).collect();

        let mut low = vec![0.0; n * n];
        for s in &self.subharmonics {
            let c = Complex64::new(normal(), normal()) * s.sqrt_weight;
            for row in 0..n {
                let cy = c * s.ey[row];
                for (col, e) in s.ex.iter().enumerate() {
                    low[row * n + col] += cy.re * e.re - cy.im * e.im;
                }
            }
        }
        let low_mean = low.iter().sum::<f64>() / (n * n) as f64;
        let (ax, ay) = (normal() * self.tilt_std, normal() * self.tilt_std);

        let scale = tp.r0().powf(-5.0 / 6.0);
        for row in 0..n {
            for col in 0..n {
                let k = row * n + col;
                let tilt = ax * self.coords[col] + ay * self.coords[row];
                phase[k] = scale * (phase[k] + low[k] - low_mean + tilt);
            }
        }
        Ok(PhaseScreen { n, extent: self.extent, r0: tp.r0(), seed, samples: phase })
    }
}

fn transpose(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            out[c * n + r] = a[r * n + c];
        }
    }
    out
}

pub fn generate_screen(tp: &TurbulenceParams, n: usize, extent: f64, seed: u64) -> Result<PhaseScreen> {
    ScreenGenerator::new(n, extent)?.generate(tp, seed)
}

/// `<[phi(x + d) - phi(x)]^2>` over positions, both axes and all screens.
///
/// Each separation is rounded to a whole number of pixels; the returned
/// pairs carry the realized separation.
pub fn empirical_structure_function(screens: &[PhaseScreen], separations: &[f64]) -> Result<Vec<(f64, f64)>> {
    if screens.len() < 2 {
        return Err(Error::InvalidInput("need at least two screens".into()));
    }
    let (n, extent) = (screens[0].n, screens[0].extent);
    if screens.iter().any(|s| s.n != n || s.extent != extent) {
        return Err(Error::InvalidInput("screens differ in geometry".into()));
    }
    let dx = extent / n as f64;
    let max = (n / 2) as f64 * dx;
    let mut out = Vec::with_capacity(separations.len());
    for &d in separations {
        if !(d >= 0.0) || d > max {
            return Err(Error::SeparationOutOfRange { d, max });
        }
        let s = (d / dx).round() as usize;
        if s == 0 {
            out.push((0.0, 0.0));
            continue;
        }
        let pairs = (n * (n - s)) as f64;
        let mut total = 0.0;
        for scr in screens {
            let (mut h, mut v) = (0.0, 0.0);
            for row in 0..n {
                for col in 0..n - s {
                    let e = scr.at(row, col + s) - scr.at(row, col);
                    h += e * e;
                }
            }
            for row in 0..n - s {
                for col in 0..n {
                    let e = scr.at(row + s, col) - scr.at(row, col);
                    v += e * e;
                }
            }
            total += 0.5 * (h + v) / pairs;
        }
        out.push((s as f64 * dx, total / screens.len() as f64));
    }
    Ok(out)
}
