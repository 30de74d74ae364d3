//! Numerical toolkit for non-Hermitian two-band lattice metals.
//!
//! The crate computes complex band structures of two-band non-Hermitian
//! Bloch Hamiltonians, locates and traces their exceptional points and
//! lines (rings in 2D, knots and links in 3D), classifies the extracted
//! curves topologically (linking numbers, Kauffman bracket, Jones
//! polynomial), and simulates a single-photon interferometric measurement
//! of the complex eigenenergies down to Poissonian coincidence counts.
//!
//! Start with the runnable programs under `examples/`; each one drives a
//! major capability end to end. The `nhmetal` binary exposes the same
//! pipelines as subcommands (`scan`, `trace`, `knot-id`, `measure`,
//! `fermi`).

pub mod bloch;
pub mod cli;
pub mod extract;
pub mod grid;
pub mod io;
pub mod knot;
pub mod mat2;
pub mod measure;
pub mod models;
pub mod momentum;

pub use bloch::{discriminant, is_exceptional, spectrum, BlochModel, BlochVector, ComplexSpectrum};
pub use grid::{scan_fields, FieldGrid, GridSpec};
pub use momentum::Momentum;
