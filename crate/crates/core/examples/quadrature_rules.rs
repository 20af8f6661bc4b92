//! Gauss-Legendre and graded rules, and the refining 3D engine on an
//! integral with a known value.
//!
//!     cargo run --release --example quadrature_rules

use std::f64::consts::PI;

use oam_turb::quadrature::{
    gauss_legendre, graded_rule, integrate_weighted_3d, AngularDomain, QuadratureConfig, Toward,
};

fn main() -> oam_turb::Result<()> {
    println!("int_0^1 x^(1/3) dx = 0.75");
    for n in [4, 8, 16, 32] {
        let gl = gauss_legendre(n, 0.0, 1.0)?.integrate(f64::cbrt);
        let graded = graded_rule(n, 0.0, 1.0, Toward::Lo, 3)?.integrate(f64::cbrt);
        println!("  n={n:<3} plain {:.3e}   graded {:.3e}", (gl - 0.75).abs(), (graded - 0.75).abs());
    }

    // int exp(-r^2) exp(-rp^2) r rp dr drp dtheta over the plane pair = 2 pi (1/2)^2
    let cfg = QuadratureConfig::default();
    let res = integrate_weighted_3d(|r| (-r * r).exp(), |_, _, _| 1.0, &cfg, 1.0, AngularDomain::HalfPeriodEven)?;
    println!("\nGaussian 3D integral: {:.15} (exact {:.15})", res.value, PI / 2.0);
    println!("refinement history: {:?}", res.history);

    // the cusp kernel |r - rp| e^{...} in the chord is where grading matters
    let cusp = integrate_weighted_3d(
        |r| (-r * r).exp(),
        |r, rp, t| (-(r * r + rp * rp - 2.0 * r * rp * t.cos()).max(0.0).sqrt()).exp(),
        &cfg,
        1.0,
        AngularDomain::HalfPeriodEven,
    )?;
    println!("cusp kernel: {:.12} after {} level(s)", cusp.value, cusp.history.len());
    Ok(())
}
