//! Curve definitions of the reproduced figure panels.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::probabilities::{
    baseline, find_peak, sweep, ChannelSpec, PeakFamily, ProbabilityPoint, DEFAULT_PEAK_BRACKET,
};
use crate::quadrature::QuadratureConfig;

use super::output::{curve_csv, LineChart, Series};

/// Figure grid: `w0/r0 = 0` followed by 40 evenly spaced points on
/// `(0.05, 4.0]`.
pub fn figure_grid() -> Vec<f64> {
    std::iter::once(0.0).chain((1..=40).map(|k| 0.05 + k as f64 * 3.95 / 40.0)).collect()
}

pub const SCALING_DELTA_LS: [i32; 4] = [1, 2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig1d,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
}

impl FromStr for Panel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "1a" => Panel::Fig1a,
            "1b" => Panel::Fig1b,
            "1c" => Panel::Fig1c,
            "1d" => Panel::Fig1d,
            "2a" => Panel::Fig2a,
            "2b" => Panel::Fig2b,
            "3a" => Panel::Fig3a,
            "3b" => Panel::Fig3b,
            other => return Err(Error::InvalidInput(format!("unknown panel {other:?}"))),
        })
    }
}

impl Panel {
    pub const ALL: [Panel; 8] = [
        Panel::Fig1a,
        Panel::Fig1b,
        Panel::Fig1c,
        Panel::Fig1d,
        Panel::Fig2a,
        Panel::Fig2b,
        Panel::Fig3a,
        Panel::Fig3b,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Panel::Fig1a => "1a",
            Panel::Fig1b => "1b",
            Panel::Fig1c => "1c",
            Panel::Fig1d => "1d",
            Panel::Fig2a => "2a",
            Panel::Fig2b => "2b",
            Panel::Fig3a => "3a",
            Panel::Fig3b => "3b",
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Panel::Fig1a => "Single photons, l0 = l",
            Panel::Fig1b => "Entangled photons, l0 = l2, l1 = 0",
            Panel::Fig1c => "Entangled photons, l0 = 0, l1 = -l2",
            Panel::Fig1d => "Signal photons, l0 = l1",
            Panel::Fig2a => "Single photons, l0 = 0, mismatch dl",
            Panel::Fig2b => "Entangled photons, l0 = l2 = 0, l1 = dl",
            Panel::Fig3a => "Peak location vs dl, single photons",
            Panel::Fig3b => "Peak location vs dl, entangled photons",
        }
    }

    /// Channels drawn as curves over [`figure_grid`] (panels 1 and 2).
    pub fn curves(&self, w0: f64) -> Result<Vec<ChannelSpec>> {
        (0..3)
            .map(|k| match self {
                Panel::Fig1a => ChannelSpec::single(k, k, w0),
                Panel::Fig1b => ChannelSpec::joint(k, 0, k, w0),
                Panel::Fig1c => ChannelSpec::joint(0, k, -k, w0),
                Panel::Fig1d => ChannelSpec::signal(k, k, w0),
                Panel::Fig2a => ChannelSpec::single(0, k + 1, w0),
                Panel::Fig2b => ChannelSpec::joint(0, k + 1, 0, w0),
                Panel::Fig3a | Panel::Fig3b => Err(Error::InvalidInput("panel 3 has no curves".into())),
            })
            .collect()
    }

    /// Family and pump OAM values of the point series (panel 3).
    pub fn peak_series(&self) -> Option<(PeakFamily, Vec<i32>)> {
        match self {
            Panel::Fig3a => Some((PeakFamily::Single, (0..4).collect())),
            Panel::Fig3b => Some((PeakFamily::Joint, (0..4).collect())),
            _ => None,
        }
    }
}

/// A computed figure: CSV bodies keyed by file name plus the chart.
pub struct FigureOutput {
    pub csv: Vec<(String, String)>,
    pub chart: LineChart,
}

pub fn compute_figure(panel: Panel, w0: f64, qcfg: &QuadratureConfig) -> Result<FigureOutput> {
    let id = panel.id();
    let mut csv = Vec::new();
    let mut series = Vec::new();
    if let Some((family, l0s)) = panel.peak_series() {
        for (i, &l0) in l0s.iter().enumerate() {
            let mut points = Vec::new();
            for &dl in &SCALING_DELTA_LS {
                let ch = family.channel(l0, dl, w0)?;
                let peak = find_peak(&ch, DEFAULT_PEAK_BRACKET, qcfg)?;
                let base = baseline(&ch, qcfg)?;
                points.push((
                    ch,
                    ProbabilityPoint {
                        w0_over_r0: peak.w0_over_r0_max,
                        value: peak.peak_value,
                        raw: peak.peak_value * base,
                    },
                ));
            }
            let mut body = String::new();
            for (k, (ch, p)) in points.iter().enumerate() {
                let text = curve_csv(ch, std::slice::from_ref(p));
                // header once, then one row per delta_l
                body.push_str(if k == 0 { &text } else { text.split_once('\n').map(|t| t.1).unwrap_or("") });
            }
            csv.push((format!("fig{id}_{}.csv", i + 1), body));
            series.push(Series {
                label: match family {
                    PeakFamily::Single => format!("l0 = {l0}"),
                    PeakFamily::Joint => format!("l0 = l2 = {l0}"),
                },
                points: points.iter().map(|(ch, p)| (ch.delta_l() as f64, p.w0_over_r0)).collect(),
            });
        }
        return Ok(FigureOutput {
            csv,
            chart: LineChart {
                title: panel.title().into(),
                x_label: "dl".into(),
                y_label: "(w0/r0)_max".into(),
                series,
                markers: true,
            },
        });
    }
    let grid = figure_grid();
    for (i, ch) in panel.curves(w0)?.iter().enumerate() {
        let pts = sweep(ch, &grid, qcfg)?;
        csv.push((format!("fig{id}_{}.csv", i + 1), curve_csv(ch, &pts)));
        series.push(Series { label: ch.label(), points: pts.iter().map(|p| (p.w0_over_r0, p.value)).collect() });
    }
    Ok(FigureOutput {
        csv,
        chart: LineChart {
            title: panel.title().into(),
            x_label: "w0/r0".into(),
            y_label: "P (normalized)".into(),
            series,
            markers: false,
        },
    })
}
