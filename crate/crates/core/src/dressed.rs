//! Metastable atom-photon dressed states at the exceptional point `gamma = 2J`.
//!
//! States are written down analytically in the mapped picture and checked
//! against the full Hamiltonian with [`verify_eigenstate`], never obtained by
//! diagonalisation.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::lattice::{
    site_index, total_hamiltonian, transform_state, Boundary, Direction, EmitterLayout, LatticeParams, Picture,
    SingleExcitationState, Sublattice,
};
use crate::{c, CMatrix, CVector, Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressedKind {
    /// Photon confined to the source cell and its right neighbour.
    Bulk,
    /// Emitter on the last cell of an open chain; photon spread over the whole chain.
    Edge,
}

impl DressedKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DressedKind::Bulk => "bulk",
            DressedKind::Edge => "edge",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedState {
    /// Mapped-picture amplitudes, one emitter first.
    pub state: SingleExcitationState,
    pub energy: Complex64,
    pub source_cell: usize,
    pub kind: DressedKind,
    pub g: f64,
}

impl DressedState {
    /// Mapped-picture total Hamiltonian of the lattice with the single source emitter.
    pub fn hamiltonian(&self, params: &LatticeParams) -> Result<CMatrix> {
        let layout = EmitterLayout::single(self.source_cell, self.g)?;
        total_hamiltonian(params, &layout, Picture::Mapped)
    }
}

fn check_ep(params: &LatticeParams) -> Result<f64> {
    params.validate()?;
    if !params.is_uniform() {
        return Err(Error::NonUniformHopping { t1: params.t1, t2: params.t2 });
    }
    if !params.at_exceptional_point() {
        return Err(Error::NotAtExceptionalPoint { gamma: params.gamma, t1: params.t1 });
    }
    Ok(params.t1)
}

fn check_g(g: f64) -> Result<()> {
    if g.is_finite() && g >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { field: "g", reason: format!("{g} is not >= 0") })
    }
}

/// Two-cell dressed state of an emitter in cell `source_cell`, energy `-i g^2/(4J)`.
///
/// Amplitudes: 1 on the emitter, `-i g/(sqrt2 gamma)` on `beta_nu` and
/// `-g/(sqrt2 gamma)` on `alpha_{nu+1}`. Open lattices need `nu + 1 <= N`;
/// periodic lattices wrap around.
pub fn bulk_dressed_state(params: &LatticeParams, source_cell: usize, g: f64) -> Result<DressedState> {
    let j = check_ep(params)?;
    check_g(g)?;
    let n = params.n_cells;
    if source_cell == 0 || source_cell > n {
        return Err(Error::CellOutOfRange { cell: source_cell, n_cells: n });
    }
    let next = match (source_cell < n, params.boundary) {
        (true, _) => source_cell + 1,
        (false, Boundary::Periodic) => 1,
        (false, Boundary::Open) => {
            return Err(Error::Dressed(format!("cell {source_cell} has no right neighbour on an open chain")))
        }
    };
    let amp = g * FRAC_1_SQRT_2 / params.gamma;
    let mut photons = CVector::zeros(2 * n);
    photons[site_index(0, source_cell, Sublattice::B)] = c(0.0, -amp);
    photons[site_index(0, next, Sublattice::A)] = c(-amp, 0.0);
    let state = SingleExcitationState::new(CVector::from_element(1, c(1.0, 0.0)), photons, Picture::Mapped)?;
    Ok(DressedState { state, energy: c(0.0, -g * g / (4.0 * j)), source_cell, kind: DressedKind::Bulk, g })
}

/// Dressed state of an emitter on cell `N` of an open chain, energy `-i g^2/(4J)`.
///
/// With `c = g/(sqrt2 gamma)`: `alpha_n = -c (1 + [n = 1]) (-1)^{N-n}` and
/// `beta_n = -i c (1 + [n = N]) (-1)^{N-n}`.
pub fn edge_dressed_state(params: &LatticeParams, g: f64) -> Result<DressedState> {
    let j = check_ep(params)?;
    check_g(g)?;
    if params.boundary != Boundary::Open {
        return Err(Error::WrongBoundary { required: "open" });
    }
    let n = params.n_cells;
    let amp = g * FRAC_1_SQRT_2 / params.gamma;
    let mut photons = CVector::zeros(2 * n);
    for cell in 1..=n {
        let sign = if (n - cell).is_multiple_of(2) { 1.0 } else { -1.0 };
        let a_weight = if cell == 1 { 2.0 } else { 1.0 };
        let b_weight = if cell == n { 2.0 } else { 1.0 };
        photons[site_index(0, cell, Sublattice::A)] = c(-amp * a_weight * sign, 0.0);
        photons[site_index(0, cell, Sublattice::B)] = c(0.0, -amp * b_weight * sign);
    }
    let state = SingleExcitationState::new(CVector::from_element(1, c(1.0, 0.0)), photons, Picture::Mapped)?;
    Ok(DressedState { state, energy: c(0.0, -g * g / (4.0 * j)), source_cell: n, kind: DressedKind::Edge, g })
}

/// `|| H |psi> - energy |psi> ||`, with `h` in the picture of the state.
pub fn verify_eigenstate(h: &CMatrix, ds: &DressedState) -> Result<f64> {
    let v = ds.state.to_vector();
    if h.nrows() != v.len() || h.ncols() != v.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), got: h.nrows() });
    }
    Ok((h * &v - &v * ds.energy).norm())
}

/// Coupling `g <b_mu|psi>` of a probe emitter in cell `probe_cell` to the dressed state.
pub fn coupling_from_dressed(ds: &DressedState, probe_cell: usize, g: f64) -> Result<Complex64> {
    let n = ds.state.n_cells();
    if probe_cell == 0 || probe_cell > n {
        return Err(Error::CellOutOfRange { cell: probe_cell, n_cells: n });
    }
    let original = match ds.state.picture {
        Picture::Original => ds.state.clone(),
        Picture::Mapped => transform_state(&ds.state, Direction::ToOriginal)?,
    };
    Ok(original.photon_amp(probe_cell, Sublattice::B) * g)
}

/// `<site| H |psi>` for one photonic site of the mapped-picture Hamiltonian.
pub fn projected_action(h: &CMatrix, ds: &DressedState, cell: usize, sub: Sublattice) -> Complex64 {
    let v = ds.state.to_vector();
    let row = site_index(ds.state.n_emitters(), cell, sub);
    (0..v.len()).map(|k| h[(row, k)] * v[k]).sum()
}
