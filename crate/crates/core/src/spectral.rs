//! Spectra of the bare field Hamiltonian under periodic and open boundaries.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::lattice::{bare_hamiltonian, Boundary, LatticeParams};
use crate::linalg;
use crate::{c, CMatrix, Complex64, Error, Result};

/// Defectivity below this value flags a near-exceptional point.
pub const DEFECTIVITY_THRESHOLD: f64 = 1e-6;
/// Relative tolerance used to pair left and right eigenvalues.
pub const PAIRING_TOL: f64 = 1e-8;

const WINDING_POINTS: usize = 4096;
const MAX_WINDING_POINTS: usize = 1 << 18;

/// `H(q)` for one quasi-momentum, basis `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochMatrix {
    pub q: f64,
    pub entries: Matrix2<Complex64>,
}

impl BlochMatrix {
    pub fn new(params: &LatticeParams, q: f64) -> Self {
        let (s, co) = q.sin_cos();
        let off = c(params.t1 + params.t2 * co, 0.0);
        let entries = Matrix2::new(c(-params.t2 * s, 0.0), off, off, c(params.t2 * s, -params.gamma));
        Self { q, entries }
    }

    pub fn eigenvalues(&self) -> [Complex64; 2] {
        eig2(&self.entries)
    }

    pub fn det_shifted(&self, e0: Complex64) -> Complex64 {
        let m = &self.entries;
        (m[(0, 0)] - e0) * (m[(1, 1)] - e0) - m[(0, 1)] * m[(1, 0)]
    }
}

fn eig2(m: &Matrix2<Complex64>) -> [Complex64; 2] {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let half_diff = (m[(0, 0)] - m[(1, 1)]) * 0.5;
    let root = (half_diff * half_diff + m[(0, 1)] * m[(1, 0)]).sqrt();
    [half_tr - root, half_tr + root]
}

/// Eigen-data of the bare lattice.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Complex64>,
    /// Quasi-momentum of each eigenvalue for Bloch spectra.
    pub momenta: Option<Vec<f64>>,
    pub right_eigenvectors: Option<CMatrix>,
    /// Biorthonormal to the right vectors (`L^† R = 1`), when the spectrum is not defective.
    pub left_eigenvectors: Option<CMatrix>,
    /// Reciprocal condition number of the column-normalised right-eigenvector matrix.
    pub defectivity: f64,
    pub boundary: Boundary,
}

impl SpectrumResult {
    pub fn is_defective(&self) -> bool {
        self.defectivity < DEFECTIVITY_THRESHOLD
    }
}

/// The `2N` energies `eig H(q_k)`, `q_k = 2 pi k / N`.
pub fn bloch_spectrum(params: &LatticeParams) -> Result<SpectrumResult> {
    params.validate()?;
    if params.boundary != Boundary::Periodic {
        return Err(Error::WrongBoundary { required: "periodic" });
    }
    let n = params.n_cells;
    let mut eigenvalues = Vec::with_capacity(2 * n);
    let mut momenta = Vec::with_capacity(2 * n);
    let mut defectivity = f64::INFINITY;
    for k in 0..n {
        let q = TAU * k as f64 / n as f64;
        let b = BlochMatrix::new(params, q);
        for e in b.eigenvalues() {
            eigenvalues.push(e);
            momenta.push(q);
        }
        let block = CMatrix::from_fn(2, 2, |i, j| b.entries[(i, j)]);
        let e = linalg::eig(&block)?;
        defectivity = defectivity.min(linalg::reciprocal_condition(&e.vectors));
    }
    Ok(SpectrumResult {
        eigenvalues,
        momenta: Some(momenta),
        right_eigenvectors: None,
        left_eigenvectors: None,
        defectivity,
        boundary: Boundary::Periodic,
    })
}

/// Dense eigendecomposition of the real-space matrix for either boundary.
pub fn dense_spectrum(params: &LatticeParams) -> Result<SpectrumResult> {
    params.validate()?;
    let h = bare_hamiltonian(params);
    let e = linalg::eig(&h)?;
    let defectivity = linalg::reciprocal_condition(&e.vectors);
    let left =
        if defectivity >= DEFECTIVITY_THRESHOLD { linalg::left_eigenvectors(&h, &e, PAIRING_TOL)? } else { None };
    Ok(SpectrumResult {
        eigenvalues: e.values,
        momenta: None,
        right_eigenvectors: Some(e.vectors),
        left_eigenvectors: left,
        defectivity,
        boundary: params.boundary,
    })
}

pub fn obc_spectrum(params: &LatticeParams) -> Result<SpectrumResult> {
    if params.boundary != Boundary::Open {
        return Err(Error::WrongBoundary { required: "open" });
    }
    dense_spectrum(params)
}

fn wrap_phase(d: f64) -> f64 {
    let mut d = d % TAU;
    if d > PI {
        d -= TAU;
    } else if d < -PI {
        d += TAU;
    }
    d
}

struct PhaseWalk {
    winding: i32,
    max_step: f64,
    min_abs: f64,
}

fn phase_walk(values: &[Complex64]) -> PhaseWalk {
    let mut total = 0.0;
    let mut max_step = 0.0_f64;
    let mut min_abs = f64::INFINITY;
    for k in 0..values.len() {
        let (z0, z1) = (values[k], values[(k + 1) % values.len()]);
        min_abs = min_abs.min(z0.norm());
        let step = wrap_phase(z1.arg() - z0.arg());
        max_step = max_step.max(step.abs());
        total += step;
    }
    PhaseWalk { winding: (total / TAU).round() as i32, max_step, min_abs }
}

/// Winding of `det(H(q) - E0)` for `q` in `[0, 2 pi)`.
///
/// Phase accumulation starts on 4096 points and the grid is doubled until two
/// consecutive resolutions agree with every phase step below `pi/4`.
pub fn point_gap_winding(params: &LatticeParams, e0: Complex64) -> Result<i32> {
    params.validate()?;
    if params.boundary != Boundary::Periodic {
        return Err(Error::WrongBoundary { required: "periodic" });
    }
    let scale = (params.t1 + params.t2 + params.gamma + e0.norm()).powi(2);
    let walk = |points: usize| -> PhaseWalk {
        let dets: Vec<Complex64> =
            (0..points).map(|k| BlochMatrix::new(params, TAU * k as f64 / points as f64).det_shifted(e0)).collect();
        phase_walk(&dets)
    };
    let mut points = WINDING_POINTS;
    let mut prev = walk(points);
    loop {
        if prev.min_abs < 1e-12 * scale {
            return Err(Error::OnSpectralCurve { min_abs_det: prev.min_abs });
        }
        if points >= MAX_WINDING_POINTS {
            return Err(Error::OnSpectralCurve { min_abs_det: prev.min_abs });
        }
        points *= 2;
        let next = walk(points);
        if next.winding == prev.winding && prev.max_step < PI / 4.0 {
            return Ok(next.winding);
        }
        prev = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindingOutcome {
    Winding(i32),
    /// The determinant does not wind around the origin.
    Trivial,
    /// `E0` lies on (or numerically inside the pseudospectrum of) the real-space spectrum.
    Degenerate,
}

/// Winding of `det(H(phi) - E0)` where the hopping from cell `1` to cell `N`
/// carries a twist `e^{i phi}`, matching the Fourier sign of [`BlochMatrix`].
///
/// For a periodic lattice this reproduces [`point_gap_winding`]. An open
/// lattice has no boundary bond, so its determinant cannot wind.
pub fn twisted_boundary_winding(params: &LatticeParams, e0: Complex64) -> Result<WindingOutcome> {
    params.validate()?;
    let n = params.n_cells;
    let dim = 2 * n;
    let base = bare_hamiltonian(&params.with_boundary(Boundary::Open));
    let full = bare_hamiltonian(&params.with_boundary(Boundary::Periodic));
    let mut wrap = CMatrix::zeros(dim, dim);
    if params.boundary == Boundary::Periodic {
        // entries coupling cell N (rows) to cell 1 (columns)
        for i in dim - 2..dim {
            for j in 0..2 {
                wrap[(i, j)] = full[(i, j)] - base[(i, j)];
            }
        }
    }
    let shifted = |phi: f64| -> CMatrix {
        let tw = Complex64::from_polar(1.0, phi);
        let mut m = base.clone();
        for i in dim - 2..dim {
            for j in 0..2 {
                m[(i, j)] += wrap[(i, j)] * tw.conj();
                m[(j, i)] += wrap[(i, j)].conj() * tw;
            }
        }
        for k in 0..dim {
            m[(k, k)] -= e0;
        }
        m
    };

    let probe = shifted(0.0);
    let sv = nalgebra::SVD::new(probe.clone(), false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin / smax < 1e-10 {
        return Ok(WindingOutcome::Degenerate);
    }

    let mut points = 256;
    loop {
        let dets: Vec<Complex64> =
            (0..points).map(|k| shifted(TAU * k as f64 / points as f64).lu().determinant()).collect();
        if dets.iter().any(|d| !d.is_finite() || d.norm() == 0.0) {
            return Ok(WindingOutcome::Degenerate);
        }
        let walk = phase_walk(&dets);
        if walk.max_step < PI / 4.0 {
            return Ok(match walk.winding {
                0 => WindingOutcome::Trivial,
                w => WindingOutcome::Winding(w),
            });
        }
        if points >= 1 << 14 {
            return Ok(WindingOutcome::Degenerate);
        }
        points *= 2;
    }
}

/// Mean position of the two band loops `E_-(q)` and `E_+(q)`, bands ordered by real part.
pub fn band_centroids(params: &LatticeParams, points: usize) -> [Complex64; 2] {
    let mut acc = [c(0.0, 0.0); 2];
    for k in 0..points {
        let mut e = BlochMatrix::new(params, TAU * k as f64 / points as f64).eigenvalues();
        if e[0].re > e[1].re {
            e.swap(0, 1);
        }
        acc[0] += e[0];
        acc[1] += e[1];
    }
    acc.map(|z| z / points as f64)
}

/// Open-boundary defectivity for each loss rate in `gammas`.
pub fn defectivity_scan(params: &LatticeParams, gammas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let open = params.with_boundary(Boundary::Open);
    gammas
        .par_iter()
        .map(|&g| {
            let p = open.with_gamma(g);
            p.validate()?;
            let e = linalg::eig(&bare_hamiltonian(&p))?;
            Ok((g, linalg::reciprocal_condition(&e.vectors)))
        })
        .collect()
}
