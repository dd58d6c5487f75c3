//! Two-level trapped ion driven by a classical laser in a harmonic or
//! q-deformed (anharmonic) trap, prepared in a Schrödinger cat state.
//!
//! The crate is layered bottom-up:
//!
//! - [`qalgebra`]: q-numbers, q-factorials, q-exponentials, q-coherent
//!   amplitudes and the deformed trap spectrum.
//! - [`interaction`]: Fock-basis matrix elements of the laser coupling
//!   operator `F_q`, plus two independent oracles.
//! - [`dynamics`]: the coupled amplitude equations as a Hermitian generator and
//!   a fixed-step fourth-order integrator.
//! - [`observables`]: populations, inversion, coherences, partial mutual
//!   entropy and the Husimi Q-function.
//! - [`analysis`]: peak detection and collapse/revival classification of the
//!   entropy time series.
//! - [`cli`]: run configuration, orchestration and file output.
//!
//! Units: `ħ = 1` and the Rabi frequency `Ω = 1`, so every frequency is the
//! dimensionless ratio to `Ω`. Plotted time is `t_plot = t / 2π`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod interaction;
pub mod observables;
pub mod qalgebra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Converts dimensionless physical time to the plotted time axis.
#[inline]
pub fn to_plot_time(t_phys: f64) -> f64 {
    t_phys / std::f64::consts::TAU
}

/// Converts plotted time back to dimensionless physical time.
#[inline]
pub fn to_phys_time(t_plot: f64) -> f64 {
    t_plot * std::f64::consts::TAU
}
