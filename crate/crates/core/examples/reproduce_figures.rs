//! Writes CSV curves and SVG charts for the figure panels into a directory.
//! Panel 3 runs sixteen peak searches and takes about a minute.
//!
//!     cargo run --release --example reproduce_figures [out_dir] [panel ...]

use oam_turb::cli::figures::{compute_figure, Panel};
use oam_turb::quadrature::QuadratureConfig;

fn main() -> oam_turb::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = std::path::PathBuf::from(args.next().unwrap_or_else(|| "figures".into()));
    let panels: Vec<Panel> = match args.map(|a| a.parse()).collect::<Result<Vec<Panel>, _>>()? {
        p if p.is_empty() => Panel::ALL.to_vec(),
        p => p,
    };
    std::fs::create_dir_all(&dir)?;
    let q = QuadratureConfig::default();
    for panel in panels {
        let fig = compute_figure(panel, 1.0, &q)?;
        for (name, body) in &fig.csv {
            std::fs::write(dir.join(name), body)?;
        }
        let svg = dir.join(format!("fig{}.svg", panel.id()));
        std::fs::write(&svg, fig.chart.render())?;
        println!("{}: {} curves, {}", panel.id(), fig.csv.len(), svg.display());
    }
    Ok(())
}
