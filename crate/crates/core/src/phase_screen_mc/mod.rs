//! Independent Monte Carlo oracle for the probability integrals.
//!
//! Nothing here calls the quadrature module: screens are synthesized on a
//! Cartesian grid and overlaps are plain grid sums.

mod oracle;
mod screen;

pub use oracle::{
    mc_joint_probability, mean_and_stderr, sub_seed, McEstimate, BASELINE_TOLERANCE, EXTENT_IN_W0, MIN_SAMPLES_PER_W0,
    MIN_SCREENS,
};
pub use screen::{
    empirical_structure_function, generate_screen, PhaseScreen, ScreenGenerator, SPECTRUM_CONSTANT, SUBHARMONIC_LEVELS,
};
