//! Single-excitation physics of two-level emitters coupled to a lossy
//! two-sublattice photonic lattice.
//!
//! The photonic lattice has `N` unit cells, each holding a lossless cavity `a`
//! and a lossy cavity `b` (loss rate `gamma`). Emitters couple locally to the
//! `b` cavity of their cell. All cavity and emitter frequencies are zero.
//!
//! Everything lives in the single-excitation sector and is represented with
//! dense complex matrices. The canonical basis ordering is
//!
//! ```text
//! [ e_1, ..., e_Ne, a_1, b_1, a_2, b_2, ..., a_N, b_N ]
//! ```
//!
//! with `(alpha, beta)` replacing `(a, b)` in the mapped picture.
//!
//! Modules:
//! - [`lattice`]: Hamiltonian construction and the intra-cell picture change.
//! - [`spectral`]: Bloch and open-chain spectra, defectivity, point-gap winding.
//! - [`dynamics`]: time evolution and the observables of spontaneous emission
//!   and excitation transfer.
//! - [`effective`]: photon-mediated effective emitter Hamiltonian computed by
//!   a linear solve, by lattice Green's function pole sums and in closed form.
//! - [`dressed`]: metastable atom-photon dressed states at the exceptional point.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dressed;
pub mod dynamics;
pub mod effective;
mod error;
pub mod lattice;
pub mod linalg;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{
    bare_hamiltonian, mapped_hamiltonian, total_hamiltonian, transform_matrix, transform_state, Boundary, Direction,
    EmitterLayout, LatticeParams, Picture, SingleExcitationState, Sublattice,
};

pub use num_complex::Complex64;

/// Dense complex matrix used for every Hamiltonian in the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
