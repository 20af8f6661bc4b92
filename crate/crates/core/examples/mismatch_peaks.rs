//! Crosstalk into OAM-mismatched channels: each curve rises from zero,
//! peaks, and decays. Prints the peak location, height and width.
//!
//!     cargo run --release --example mismatch_peaks

use oam_turb::probabilities::{find_peak, PeakFamily, DEFAULT_PEAK_BRACKET};
use oam_turb::quadrature::QuadratureConfig;

fn main() -> oam_turb::Result<()> {
    let q = QuadratureConfig::default();
    println!("{:<32} {:>12} {:>12} {:>10}", "channel", "(w0/r0)_max", "peak P", "FWHM");
    for family in [PeakFamily::Single, PeakFamily::Joint] {
        for dl in 1..=3 {
            let ch = family.channel(0, dl, 1.0)?;
            let p = find_peak(&ch, DEFAULT_PEAK_BRACKET, &q)?;
            println!(
                "{:<32} {:>12.5} {:>12.3e} {:>10.4}",
                ch.label(),
                p.w0_over_r0_max,
                p.peak_value,
                p.half_max_width
            );
        }
    }
    Ok(())
}
