//! Kolmogorov phase structure function and two-point coherence.
//!
//!     cargo run --release --example structure_function

use oam_turb::turbulence::{chord_distance, coherence, structure_function, TurbulenceParams};

fn main() -> oam_turb::Result<()> {
    let r0s = [0.25, 1.0, 4.0];
    println!("{:>6} {}", "d", r0s.map(|r| format!("{:>22}", format!("r0={r}: D, coh"))).join(""));
    for d in [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0] {
        print!("{d:>6.2}");
        for r0 in r0s {
            let tp = TurbulenceParams::new(r0)?;
            print!(" {:>11.5} {:>9.2e}", structure_function(d, &tp), coherence(d, &tp));
        }
        println!();
    }

    let free = TurbulenceParams::none();
    println!("\nr0 = inf: D(10) = {}, coherence(10) = {}", structure_function(10.0, &free), coherence(10.0, &free));

    // two points at equal radius, nearly aligned: the chord stays accurate
    let (r, dt) = (1.0, 1e-9);
    println!("chord between (1, 0) and (1, 1e-9): {:.6e}", chord_distance(r, r, dt));
    Ok(())
}
