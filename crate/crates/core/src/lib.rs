// range checks must reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod lg_modes;
pub mod phase_screen_mc;
pub mod probabilities;
pub mod quadrature;
pub mod special_functions;
pub mod turbulence;

pub use error::{Error, Result};
