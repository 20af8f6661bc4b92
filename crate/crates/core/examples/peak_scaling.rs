//! Peak location versus OAM mismatch with a straight-line fit; the
//! single-photon series is close to linear, the entangled one is curved.
//!
//!     cargo run --release --example peak_scaling

use oam_turb::probabilities::{peak_scaling, PeakFamily, DEFAULT_PEAK_BRACKET};
use oam_turb::quadrature::QuadratureConfig;

fn main() -> oam_turb::Result<()> {
    let q = QuadratureConfig::default();
    for (name, family) in [("single", PeakFamily::Single), ("joint", PeakFamily::Joint)] {
        let rep = peak_scaling(family, 0, &[1, 2, 3, 4], DEFAULT_PEAK_BRACKET, &q)?;
        println!("{name}: slope {:.5}, intercept {:.5}", rep.slope, rep.intercept);
        for p in &rep.peaks {
            println!("  dl={}  (w0/r0)_max = {:.5}", p.delta_l, p.w0_over_r0_max);
        }
        println!(
            "  relative max residual {:.4}, second differences {:?}",
            rep.relative_max_residual,
            rep.second_differences().iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
