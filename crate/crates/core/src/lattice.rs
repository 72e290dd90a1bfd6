//! Lattice parameters, emitter layouts and single-excitation Hamiltonians.
//!
//! Original picture: cell `n` holds a lossless cavity `a_n` and a lossy cavity
//! `b_n`. The bare field Hamiltonian is
//!
//! ```text
//! H_f = sum_n [ t1 a_n^† b_n
//!             + t2/2 (a_n^† b_{n+1} + b_n^† a_{n+1} - i a_n^† a_{n+1} + i b_n^† b_{n+1})
//!             + h.c. ] - i gamma b_n^† b_n
//! ```
//!
//! Mapped picture: `a_n = (alpha_n - i beta_n)/sqrt2`, `b_n = -i (alpha_n + i beta_n)/sqrt2`.
//! In that picture every cavity loses at `gamma/2`, intra-cell hopping is
//! non-reciprocal (`J + gamma/2` on `alpha^† beta`, `J - gamma/2` on `beta^† alpha`)
//! and each emitter couples to both cavities of its cell with a relative
//! phase of `pi/2`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::{c, CMatrix, CVector, Complex64, Error, Result, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    /// `(a, b)` cavities, loss on `b` only.
    Original,
    /// `(alpha, beta)` cavities, uniform loss.
    Mapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToMapped,
    ToOriginal,
}

impl Direction {
    fn source(self) -> Picture {
        match self {
            Direction::ToMapped => Picture::Original,
            Direction::ToOriginal => Picture::Mapped,
        }
    }

    fn target(self) -> Picture {
        match self {
            Direction::ToMapped => Picture::Mapped,
            Direction::ToOriginal => Picture::Original,
        }
    }
}

/// First (`a`/`alpha`) or second (`b`/`beta`) cavity of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sublattice {
    A,
    B,
}

/// Geometry, hoppings and loss of the bare photonic lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub n_cells: usize,
    pub t1: f64,
    pub t2: f64,
    pub gamma: f64,
    pub boundary: Boundary,
}

impl LatticeParams {
    pub fn new(n_cells: usize, t1: f64, t2: f64, gamma: f64, boundary: Boundary) -> Result<Self> {
        let p = Self { n_cells, t1, t2, gamma, boundary };
        p.validate()?;
        Ok(p)
    }

    /// Main-text lattice with `t1 = t2 = j`.
    pub fn uniform(n_cells: usize, j: f64, gamma: f64, boundary: Boundary) -> Result<Self> {
        Self::new(n_cells, j, j, gamma, boundary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::InvalidParameter { field: "n_cells", reason: format!("{} < 2", self.n_cells) });
        }
        if !(self.t1.is_finite() && self.t1 > 0.0) {
            return Err(Error::InvalidParameter { field: "t1", reason: format!("{} is not > 0", self.t1) });
        }
        if !(self.t2.is_finite() && self.t2 > 0.0) {
            return Err(Error::InvalidParameter { field: "t2", reason: format!("{} is not > 0", self.t2) });
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter { field: "gamma", reason: format!("{} is not >= 0", self.gamma) });
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn with_cells(self, n_cells: usize) -> Self {
        Self { n_cells, ..self }
    }

    /// Number of photonic modes, `2N`.
    pub fn n_modes(&self) -> usize {
        2 * self.n_cells
    }

    pub fn is_uniform(&self) -> bool {
        (self.t1 - self.t2).abs() <= 1e-12 * self.t1.max(self.t2)
    }

    /// `gamma == 2 t1` to relative precision 1e-12.
    pub fn at_exceptional_point(&self) -> bool {
        (self.gamma - 2.0 * self.t1).abs() <= 1e-12 * self.t1
    }
}

/// Emitter positions (1-based cell indices) and their common coupling `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterLayout {
    pub cells: Vec<usize>,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingWarning {
    /// `g >= 0.3 t2`: the weak-coupling expansion is doubtful.
    StrongCoupling { g: f64, t2: f64 },
    /// `g >= gamma / sqrt(N)`: long-range dressed states are not normalised.
    ExceedsLossScale { g: f64, bound: f64 },
}

impl EmitterLayout {
    pub fn new(cells: Vec<usize>, g: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidParameter { field: "g", reason: format!("{g} is not >= 0") });
        }
        if cells.contains(&0) {
            return Err(Error::InvalidParameter { field: "cells", reason: "cell indices are 1-based".into() });
        }
        let mut sorted = cells.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter { field: "cells", reason: "cell indices must be distinct".into() });
        }
        Ok(Self { cells, g })
    }

    pub fn single(cell: usize, g: f64) -> Result<Self> {
        Self::new(vec![cell], g)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn check_range(&self, params: &LatticeParams) -> Result<()> {
        match self.cells.iter().find(|&&c| c == 0 || c > params.n_cells) {
            Some(&cell) => Err(Error::CellOutOfRange { cell, n_cells: params.n_cells }),
            None => Ok(()),
        }
    }

    pub fn diagnostics(&self, params: &LatticeParams) -> Vec<CouplingWarning> {
        let mut out = Vec::new();
        if self.g >= 0.3 * params.t2 {
            out.push(CouplingWarning::StrongCoupling { g: self.g, t2: params.t2 });
        }
        let bound = params.gamma / (params.n_cells as f64).sqrt();
        if self.g >= bound {
            out.push(CouplingWarning::ExceedsLossScale { g: self.g, bound });
        }
        out
    }
}

/// Index of a photonic site in a basis with `n_emitters` emitters in front.
#[inline]
pub fn site_index(n_emitters: usize, cell: usize, sub: Sublattice) -> usize {
    debug_assert!(cell >= 1);
    n_emitters
        + 2 * (cell - 1)
        + match sub {
            Sublattice::A => 0,
            Sublattice::B => 1,
        }
}

/// Amplitudes over `[emitters..., a_1, b_1, ..., a_N, b_N]` (or `alpha/beta`).
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub emitter_amps: CVector,
    pub photon_amps: CVector,
    pub picture: Picture,
}

impl SingleExcitationState {
    pub fn new(emitter_amps: CVector, photon_amps: CVector, picture: Picture) -> Result<Self> {
        if !photon_amps.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: photon_amps.len() + 1, got: photon_amps.len() });
        }
        Ok(Self { emitter_amps, photon_amps, picture })
    }

    /// Emitter `emitter` (0-based) excited, field in vacuum.
    pub fn excited_emitter(n_emitters: usize, n_cells: usize, emitter: usize, picture: Picture) -> Result<Self> {
        if emitter >= n_emitters {
            return Err(Error::InvalidParameter {
                field: "initial",
                reason: format!("emitter {emitter} out of range for {n_emitters} emitters"),
            });
        }
        let mut e = CVector::zeros(n_emitters);
        e[emitter] = c(1.0, 0.0);
        Ok(Self { emitter_amps: e, photon_amps: CVector::zeros(2 * n_cells), picture })
    }

    pub fn from_vector(v: &CVector, n_emitters: usize, picture: Picture) -> Result<Self> {
        if v.len() < n_emitters || !(v.len() - n_emitters).is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: n_emitters, got: v.len() });
        }
        Ok(Self {
            emitter_amps: v.rows(0, n_emitters).into_owned(),
            photon_amps: v.rows(n_emitters, v.len() - n_emitters).into_owned(),
            picture,
        })
    }

    pub fn to_vector(&self) -> CVector {
        let ne = self.emitter_amps.len();
        let mut v = CVector::zeros(self.dim());
        v.rows_mut(0, ne).copy_from(&self.emitter_amps);
        v.rows_mut(ne, self.photon_amps.len()).copy_from(&self.photon_amps);
        v
    }

    pub fn dim(&self) -> usize {
        self.emitter_amps.len() + self.photon_amps.len()
    }

    pub fn n_emitters(&self) -> usize {
        self.emitter_amps.len()
    }

    pub fn n_cells(&self) -> usize {
        self.photon_amps.len() / 2
    }

    pub fn norm_sqr(&self) -> f64 {
        self.emitter_amps.norm_squared() + self.photon_amps.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Photon amplitude on `cell` (1-based).
    pub fn photon_amp(&self, cell: usize, sub: Sublattice) -> Complex64 {
        self.photon_amps[site_index(0, cell, sub)]
    }
}

fn add_hop(h: &mut CMatrix, i: usize, j: usize, v: Complex64) {
    h[(i, j)] += v;
    h[(j, i)] += v.conj();
}

/// Bare field Hamiltonian in the original picture, `2N x 2N`.
pub fn bare_hamiltonian(params: &LatticeParams) -> CMatrix {
    let n = params.n_cells;
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    let half = 0.5 * params.t2;
    let a = |cell: usize| site_index(0, cell, Sublattice::A);
    let b = |cell: usize| site_index(0, cell, Sublattice::B);
    for cell in 1..=n {
        add_hop(&mut h, a(cell), b(cell), c(params.t1, 0.0));
        h[(b(cell), b(cell))] += c(0.0, -params.gamma);
        let next = if cell < n {
            cell + 1
        } else if params.boundary == Boundary::Periodic {
            1
        } else {
            continue;
        };
        add_hop(&mut h, a(cell), b(next), c(half, 0.0));
        add_hop(&mut h, b(cell), a(next), c(half, 0.0));
        add_hop(&mut h, a(cell), a(next), c(0.0, -half));
        add_hop(&mut h, b(cell), b(next), c(0.0, half));
    }
    h
}

/// Non-reciprocal SSH form of the field Hamiltonian in the mapped picture.
///
/// Only defined for `t1 == t2 == J`; for unequal hoppings transform
/// [`bare_hamiltonian`] with [`transform_matrix`] instead.
pub fn mapped_hamiltonian(params: &LatticeParams) -> Result<CMatrix> {
    if !params.is_uniform() {
        return Err(Error::NonUniformHopping { t1: params.t1, t2: params.t2 });
    }
    let n = params.n_cells;
    let j = params.t1;
    let g = params.gamma;
    let alpha = |cell: usize| site_index(0, cell, Sublattice::A);
    let beta = |cell: usize| site_index(0, cell, Sublattice::B);
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    for cell in 1..=n {
        h[(alpha(cell), beta(cell))] += c(j + 0.5 * g, 0.0);
        h[(beta(cell), alpha(cell))] += c(j - 0.5 * g, 0.0);
        h[(alpha(cell), alpha(cell))] += c(0.0, -0.5 * g);
        h[(beta(cell), beta(cell))] += c(0.0, -0.5 * g);
        let next = if cell < n {
            cell + 1
        } else if params.boundary == Boundary::Periodic {
            1
        } else {
            continue;
        };
        add_hop(&mut h, alpha(next), beta(cell), c(j, 0.0));
    }
    Ok(h)
}

// Per-cell unitary taking original amplitudes (a, b) to mapped ones (alpha, beta):
// |a> = (|alpha> + i|beta>)/sqrt2, |b> = (i|alpha> + |beta>)/sqrt2.
fn cell_unitary(direction: Direction) -> [[Complex64; 2]; 2] {
    let s = FRAC_1_SQRT_2;
    match direction {
        Direction::ToMapped => [[c(s, 0.0), c(0.0, s)], [c(0.0, s), c(s, 0.0)]],
        Direction::ToOriginal => [[c(s, 0.0), c(0.0, -s)], [c(0.0, -s), c(s, 0.0)]],
    }
}

fn n_emitters_for(dim: usize, n_cells: usize) -> Result<usize> {
    if dim < 2 * n_cells {
        return Err(Error::DimensionMismatch { expected: 2 * n_cells, got: dim });
    }
    Ok(dim - 2 * n_cells)
}

/// Applies the intra-cell picture change to a state. Emitter amplitudes pass through.
pub fn transform_state(state: &SingleExcitationState, direction: Direction) -> Result<SingleExcitationState> {
    if state.picture != direction.source() {
        return Err(Error::InvalidParameter {
            field: "picture",
            reason: format!("state is in the {:?} picture", state.picture),
        });
    }
    let u = cell_unitary(direction);
    let mut out = state.photon_amps.clone();
    for cell in 0..state.n_cells() {
        let (x, y) = (state.photon_amps[2 * cell], state.photon_amps[2 * cell + 1]);
        out[2 * cell] = u[0][0] * x + u[0][1] * y;
        out[2 * cell + 1] = u[1][0] * x + u[1][1] * y;
    }
    Ok(SingleExcitationState {
        emitter_amps: state.emitter_amps.clone(),
        photon_amps: out,
        picture: direction.target(),
    })
}

/// Conjugates a matrix on the `(emitters ⊕ 2N photons)` space: `U M U^†`.
pub fn transform_matrix(m: &CMatrix, n_cells: usize, direction: Direction) -> Result<CMatrix> {
    crate::linalg::check_square(m)?;
    let ne = n_emitters_for(m.nrows(), n_cells)?;
    let u = cell_unitary(direction);
    let mut out = m.clone();
    // rows: U M
    for cell in 0..n_cells {
        let (r0, r1) = (ne + 2 * cell, ne + 2 * cell + 1);
        for col in 0..out.ncols() {
            let (x, y) = (out[(r0, col)], out[(r1, col)]);
            out[(r0, col)] = u[0][0] * x + u[0][1] * y;
            out[(r1, col)] = u[1][0] * x + u[1][1] * y;
        }
    }
    // columns: (U M) U^†
    for cell in 0..n_cells {
        let (c0, c1) = (ne + 2 * cell, ne + 2 * cell + 1);
        for row in 0..out.nrows() {
            let (x, y) = (out[(row, c0)], out[(row, c1)]);
            out[(row, c0)] = x * u[0][0].conj() + y * u[0][1].conj();
            out[(row, c1)] = x * u[1][0].conj() + y * u[1][1].conj();
        }
    }
    Ok(out)
}

/// Total single-excitation Hamiltonian, `(N_e + 2N)` square.
pub fn total_hamiltonian(params: &LatticeParams, layout: &EmitterLayout, picture: Picture) -> Result<CMatrix> {
    params.validate()?;
    layout.check_range(params)?;
    let ne = layout.len();
    let nm = params.n_modes();
    let field = match picture {
        Picture::Original => bare_hamiltonian(params),
        Picture::Mapped if params.is_uniform() => mapped_hamiltonian(params)?,
        Picture::Mapped => transform_matrix(&bare_hamiltonian(params), params.n_cells, Direction::ToMapped)?,
    };
    let mut h = CMatrix::zeros(ne + nm, ne + nm);
    h.view_mut((ne, ne), (nm, nm)).copy_from(&field);
    let g = layout.g;
    for (i, &cell) in layout.cells.iter().enumerate() {
        match picture {
            Picture::Original => {
                add_hop(&mut h, i, site_index(ne, cell, Sublattice::B), c(g, 0.0));
            }
            Picture::Mapped => {
                let gs = g * FRAC_1_SQRT_2;
                add_hop(&mut h, i, site_index(ne, cell, Sublattice::B), c(gs, 0.0));
                add_hop(&mut h, i, site_index(ne, cell, Sublattice::A), -I * gs);
            }
        }
    }
    Ok(h)
}
