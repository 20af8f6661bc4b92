//! Normalized detection probabilities of OAM-conserving channels versus
//! turbulence strength: single photons, entangled pairs and signal photons.
//!
//!     cargo run --release --example conserving_curves

use oam_turb::probabilities::{sweep, ChannelSpec};
use oam_turb::quadrature::QuadratureConfig;

fn main() -> oam_turb::Result<()> {
    let q = QuadratureConfig::default();
    let grid = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0];
    let channels = [
        ChannelSpec::single(0, 0, 1.0)?,
        ChannelSpec::single(2, 2, 1.0)?,
        ChannelSpec::joint(0, 0, 0, 1.0)?,
        ChannelSpec::joint(2, 0, 2, 1.0)?,
        ChannelSpec::joint(0, 2, -2, 1.0)?,
        ChannelSpec::signal(0, 0, 1.0)?,
        ChannelSpec::signal(2, 2, 1.0)?,
    ];
    print!("{:<28}", "channel \\ w0/r0");
    for x in grid {
        print!("{x:>9}");
    }
    println!();
    for ch in channels {
        print!("{:<28}", ch.label());
        for p in sweep(&ch, &grid, &q)? {
            print!("{:>9.5}", p.value);
        }
        println!();
    }
    Ok(())
}
