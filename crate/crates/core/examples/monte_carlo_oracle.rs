//! Cross-check of the quadrature against an independent phase-screen
//! Monte Carlo estimate of the same ensemble average.
//!
//!     cargo run --release --example monte_carlo_oracle [n_screens]

use oam_turb::phase_screen_mc::mc_joint_probability;
use oam_turb::probabilities::{normalized_probability, ChannelSpec};
use oam_turb::quadrature::QuadratureConfig;

fn main() -> oam_turb::Result<()> {
    let n_screens = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let q = QuadratureConfig::default();
    let channels =
        [ChannelSpec::single(0, 0, 1.0)?, ChannelSpec::joint(1, 0, 1, 1.0)?, ChannelSpec::joint(0, 1, -1, 1.0)?];
    println!("{n_screens} screens per point, 256 x 256 grid");
    println!("{:<28} {:>6} {:>10} {:>18} {:>7}", "channel", "w0/r0", "quadrature", "monte carlo", "z");
    for ch in &channels {
        for x in [0.5, 1.0] {
            let quad = normalized_probability(ch, x, &q)?;
            let mc = mc_joint_probability(ch, x, n_screens, 2024, 256)?;
            println!(
                "{:<28} {x:>6} {quad:>10.5} {:>9.5} ± {:.5} {:>+7.2}",
                ch.label(),
                mc.mean,
                mc.stderr,
                mc.z_score(quad)
            );
        }
    }
    Ok(())
}
