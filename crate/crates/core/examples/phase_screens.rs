//! FFT phase screens with subharmonics: generate an ensemble, compare the
//! empirical structure function with the Kolmogorov law, and round-trip one
//! screen through the binary export format.
//!
//!     cargo run --release --example phase_screens

use oam_turb::phase_screen_mc::{empirical_structure_function, sub_seed, PhaseScreen, ScreenGenerator};
use oam_turb::turbulence::{structure_function, TurbulenceParams};

fn main() -> oam_turb::Result<()> {
    let gen = ScreenGenerator::new(256, 16.0)?;
    let tp = TurbulenceParams::new(1.0)?;
    let screens: Vec<PhaseScreen> = (0..100).map(|k| gen.generate(&tp, sub_seed(1, k))).collect::<Result<_, _>>()?;

    let seps = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0];
    println!("{:>6} {:>10} {:>10} {:>7}", "d", "D_hat", "6.88 d^5/3", "ratio");
    for (d, dh) in empirical_structure_function(&screens, &seps)? {
        let want = structure_function(d, &tp);
        println!("{d:>6.3} {dh:>10.4} {want:>10.4} {:>7.4}", dh / want);
    }

    let dir = std::env::temp_dir().join("oam_turb_screen_example");
    std::fs::create_dir_all(&dir)?;
    let stem = dir.join("screen0");
    screens[0].export(&stem)?;
    let back = PhaseScreen::import(&stem)?;
    println!("\nexported to {}.bin/.txt; round trip identical: {}", stem.display(), back == screens[0]);
    Ok(())
}
