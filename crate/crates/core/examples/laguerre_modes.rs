//! Associated Laguerre polynomials, LG radial profiles and their
//! orthonormality.
//!
//!     cargo run --release --example laguerre_modes

use oam_turb::lg_modes::{radial_orthonormality_defect, LGModeSpec, ModeIndex, RadialProfile};
use oam_turb::quadrature::QuadratureConfig;
use oam_turb::special_functions::{assoc_laguerre, laguerre_series, PolyIndex};

fn main() -> oam_turb::Result<()> {
    println!("L_p^a(x): recurrence vs explicit series");
    for (p, a, x) in [(0, 0, 1.0), (2, 1, 0.5), (3, 2, 4.0), (5, 0, 7.5), (10, 3, 2.0)] {
        let idx = PolyIndex::new(p, a)?;
        println!("  p={p:<2} a={a} x={x:<4} {:>+.12e}  {:>+.12e}", assoc_laguerre(idx, x), laguerre_series(idx, x));
    }

    println!("\nradial amplitude R_p^l(r), w0 = 1");
    print!("  {:>5}", "r");
    let modes =
        [ModeIndex::new(0, 0), ModeIndex::new(1, 0), ModeIndex::new(2, 0), ModeIndex::new(0, 1), ModeIndex::new(-3, 2)];
    for m in &modes {
        print!("  {:>10}", format!("l={},p={}", m.l, m.p));
    }
    println!();
    let profiles: Vec<RadialProfile> =
        modes.iter().map(|&m| LGModeSpec::new(m, 1.0).map(|s| RadialProfile::new(&s))).collect::<Result<_, _>>()?;
    for k in 0..=8 {
        let r = 0.25 * k as f64;
        print!("  {r:>5.2}");
        for prof in &profiles {
            print!("  {:>10.6}", prof.eval(r));
        }
        println!();
    }

    let q = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for l in -4..=4 {
        for p1 in 0..=3 {
            for p2 in 0..=3 {
                worst = worst.max(radial_orthonormality_defect(l, p1, p2, 1.0, &q)?);
            }
        }
    }
    println!("\nmax orthonormality defect over l in [-4, 4], p in [0, 3]: {worst:.2e}");
    Ok(())
}
