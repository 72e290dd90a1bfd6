//! Time evolution `|psi(t)> = exp(-i H t) |psi(0)>` and the observables of
//! spontaneous emission and excitation transfer.

use std::collections::HashMap;

use crate::lattice::{transform_state, Direction, Picture, SingleExcitationState};
use crate::linalg;
use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Default propagation tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
const MAX_REFINEMENT: u32 = 8;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SingleExcitationState>,
    pub norm_history: Vec<f64>,
    /// Number of internal sub-steps per output interval that met the tolerance.
    pub substeps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// `n_points` equally spaced times from 0 to `t_max` inclusive.
pub fn time_grid(t_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) || n_points < 2 {
        return Err(Error::InvalidTimeGrid);
    }
    let dt = t_max / (n_points - 1) as f64;
    Ok((0..n_points).map(|k| if k + 1 == n_points { t_max } else { k as f64 * dt }).collect())
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() || times[0] != 0.0 {
        return Err(Error::InvalidTimeGrid);
    }
    if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidTimeGrid);
    }
    Ok(())
}

struct Propagators<'a> {
    h: &'a CMatrix,
    substeps: usize,
    cache: HashMap<u64, CMatrix>,
}

impl<'a> Propagators<'a> {
    fn step(&mut self, dt: f64) -> &CMatrix {
        let sub = dt / self.substeps as f64;
        let h = self.h;
        self.cache.entry(sub.to_bits()).or_insert_with(|| linalg::expm(&(h * Complex64::new(0.0, -sub))))
    }

    fn advance(&mut self, psi: &CVector, dt: f64) -> CVector {
        let substeps = self.substeps;
        let u = self.step(dt);
        let mut out = psi.clone();
        for _ in 0..substeps {
            out = u * out;
        }
        out
    }
}

fn run(h: &CMatrix, psi0: &CVector, times: &[f64], substeps: usize) -> Vec<CVector> {
    // equal steps (after quantisation) share one propagator
    let dts: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let reference = dts.first().copied().unwrap_or(0.0);
    let uniform = dts.iter().all(|d| (d - reference).abs() <= 1e-12 * reference);
    let mut props = Propagators { h, substeps, cache: HashMap::new() };
    let mut out = Vec::with_capacity(times.len());
    out.push(psi0.clone());
    for &dt in &dts {
        let step = if uniform { reference } else { dt };
        let next = props.advance(out.last().expect("non-empty"), step);
        out.push(next);
    }
    out
}

/// Propagates `psi0` under `h` and samples the state at every time in `times`.
///
/// Output steps are taken with cached propagators `exp(-i H dt / s)` applied
/// `s` times. The final state is compared with a single exponential over the
/// whole span; `s` doubles until they agree to `tol`.
pub fn evolve(h: &CMatrix, psi0: &SingleExcitationState, times: &[f64], tol: f64) -> Result<Trajectory> {
    linalg::check_square(h)?;
    linalg::check_finite(h, "Hamiltonian")?;
    if psi0.dim() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: psi0.dim() });
    }
    let v0 = psi0.to_vector();
    if v0.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite { what: "initial state" });
    }
    check_grid(times)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { field: "tol", reason: format!("{tol} is not > 0") });
    }
    let t_end = *times.last().expect("checked non-empty");
    let reference = linalg::expm(&(h * Complex64::new(0.0, -t_end))) * &v0;
    let scale = v0.norm().max(1.0);

    let mut substeps = 1;
    let mut achieved = f64::INFINITY;
    for _ in 0..=MAX_REFINEMENT {
        let vectors = run(h, &v0, times, substeps);
        let last = vectors.last().expect("non-empty");
        achieved = (last - &reference).norm() / scale;
        if achieved.is_finite() && achieved <= tol {
            let ne = psi0.n_emitters();
            let states = vectors
                .iter()
                .map(|v| SingleExcitationState::from_vector(v, ne, psi0.picture))
                .collect::<Result<Vec<_>>>()?;
            let norm_history = vectors.iter().map(|v| v.norm()).collect();
            return Ok(Trajectory { times: times.to_vec(), states, norm_history, substeps });
        }
        substeps *= 2;
    }
    Err(Error::ToleranceNotReached { tol, achieved })
}

/// `p_i(t) = |<e_i|psi(t)>|^2`, indexed `[emitter][time]`.
pub fn emitter_populations(traj: &Trajectory) -> Vec<Vec<f64>> {
    let ne = traj.states.first().map_or(0, |s| s.n_emitters());
    (0..ne).map(|i| traj.states.iter().map(|s| s.emitter_amps[i].norm_sqr()).collect()).collect()
}

/// Cavity occupations indexed `[time][site - 1]`.
///
/// Sites are numbered from 1 with `2n - 1` the lossless cavity (`a_n` or
/// `alpha_n`) of cell `n` and `2n` the second cavity (`b_n` or `beta_n`).
pub fn photon_density(traj: &Trajectory, picture: Picture) -> Result<Vec<Vec<f64>>> {
    traj.states
        .iter()
        .map(|s| {
            let state = if s.picture == picture {
                s.clone()
            } else {
                let dir = match picture {
                    Picture::Mapped => Direction::ToMapped,
                    Picture::Original => Direction::ToOriginal,
                };
                transform_state(s, dir)?
            };
            Ok(state.photon_amps.iter().map(|z| z.norm_sqr()).collect())
        })
        .collect()
}

/// Time-averaged photon location around an emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationReport {
    /// Emitter cell and its right neighbour.
    pub p_loc: f64,
    /// Cells strictly left of the emitter cell.
    pub p_l: f64,
    /// Cells strictly right of the right neighbour.
    pub p_r: f64,
    pub t_av: f64,
    pub atom_cell: usize,
}

// trapezoidal average of `f` over [0, t_av], interpolating the last partial interval
fn time_average(times: &[f64], f: &[f64], t_av: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..times.len() - 1 {
        let (t0, t1) = (times[k], times[k + 1]);
        if t0 >= t_av {
            break;
        }
        if t1 <= t_av {
            acc += 0.5 * (f[k] + f[k + 1]) * (t1 - t0);
        } else {
            let frac = (t_av - t0) / (t1 - t0);
            let f_end = f[k] + frac * (f[k + 1] - f[k]);
            acc += 0.5 * (f[k] + f_end) * (t_av - t0);
        }
    }
    acc / t_av
}

/// Cell-resolved photon probabilities averaged over `[0, t_av]` and rescaled to unit sum.
///
/// Cell probabilities are invariant under the intra-cell picture change, so
/// the trajectory may be in either picture.
pub fn localization_report(traj: &Trajectory, atom_cell: usize, t_av: f64) -> Result<LocalizationReport> {
    let first = traj.states.first().ok_or(Error::InvalidTimeGrid)?;
    let n_cells = first.n_cells();
    if atom_cell == 0 || atom_cell > n_cells {
        return Err(Error::CellOutOfRange { cell: atom_cell, n_cells });
    }
    if !(t_av > 0.0) {
        return Err(Error::InvalidParameter { field: "t_av", reason: format!("{t_av} is not > 0") });
    }
    if t_av > traj.span() * (1.0 + 1e-12) {
        return Err(Error::WindowTooLong { t_av, span: traj.span() });
    }
    let loc_hi = (atom_cell + 1).min(n_cells);
    let mut loc = Vec::with_capacity(traj.len());
    let mut left = Vec::with_capacity(traj.len());
    let mut right = Vec::with_capacity(traj.len());
    for s in &traj.states {
        let cell = |n: usize| s.photon_amps[2 * (n - 1)].norm_sqr() + s.photon_amps[2 * (n - 1) + 1].norm_sqr();
        loc.push((atom_cell..=loc_hi).map(cell).sum::<f64>());
        left.push((1..atom_cell).map(cell).sum::<f64>());
        right.push((loc_hi + 1..=n_cells).map(cell).sum::<f64>());
    }
    let t_av = t_av.min(traj.span());
    let (p_loc, p_l, p_r) = (
        time_average(&traj.times, &loc, t_av),
        time_average(&traj.times, &left, t_av),
        time_average(&traj.times, &right, t_av),
    );
    let total = p_loc + p_l + p_r;
    if !(total > 0.0) {
        return Err(Error::InvalidParameter { field: "initial", reason: "no photon population in window".into() });
    }
    Ok(LocalizationReport { p_loc: p_loc / total, p_l: p_l / total, p_r: p_r / total, t_av, atom_cell })
}

/// Fit window `[0.2/rate, 1.5/rate]` for a nominal decay rate.
pub fn decay_fit_window(rate: f64) -> (f64, f64) {
    (0.2 / rate, 1.5 / rate)
}

/// Decay rate `-d ln p / dt` from a least-squares line through `ln p` on `[t_lo, t_hi]`.
pub fn fit_decay_rate(times: &[f64], p: &[f64], window: (f64, f64)) -> Result<f64> {
    if times.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: p.len() });
    }
    let pts: Vec<(f64, f64)> =
        times.iter().zip(p).filter(|(t, _)| **t >= window.0 && **t <= window.1).map(|(t, v)| (*t, v.ln())).collect();
    if pts.len() < 2 || pts.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "window",
            reason: "need two positive samples in the fit window".into(),
        });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
    let my = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    Ok(-sxy / sxx)
}

/// Time and value of the maximum of `series`, ignoring `t = 0`.
pub fn peak(times: &[f64], series: &[f64]) -> (f64, f64) {
    times
        .iter()
        .zip(series)
        .skip(1)
        .fold((0.0, f64::NEG_INFINITY), |acc, (&t, &v)| if v > acc.1 { (t, v) } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{total_hamiltonian, Boundary, EmitterLayout, LatticeParams};

    fn setup(n: usize, gamma: f64, g: f64, cells: Vec<usize>, boundary: Boundary) -> (CMatrix, SingleExcitationState) {
        let p = LatticeParams::uniform(n, 1.0, gamma, boundary).unwrap();
        let l = EmitterLayout::new(cells, g).unwrap();
        let ne = l.len();
        let h = total_hamiltonian(&p, &l, Picture::Original).unwrap();
        (h, SingleExcitationState::excited_emitter(ne, n, 0, Picture::Original).unwrap())
    }

    #[test]
    fn decoupled_emitter_stays_excited() {
        let (h, psi) = setup(6, 1.0, 0.0, vec![3], Boundary::Open);
        let tr = evolve(&h, &psi, &time_grid(50.0, 51).unwrap(), DEFAULT_TOL).unwrap();
        assert!(emitter_populations(&tr)[0].iter().all(|p| (p - 1.0).abs() < 1e-14));
    }

    #[test]
    fn lossless_evolution_is_unitary() {
        let (h, psi) = setup(8, 0.0, 0.3, vec![2], Boundary::Periodic);
        let tr = evolve(&h, &psi, &time_grid(30.0, 61).unwrap(), DEFAULT_TOL).unwrap();
        assert!(tr.norm_history.iter().all(|n| (n - 1.0).abs() < 1e-10));
    }

    #[test]
    fn matches_spectral_decomposition() {
        let (h, psi) = setup(3, 1.0, 0.1, vec![2], Boundary::Open);
        let times = time_grid(10.0, 21).unwrap();
        let tr = evolve(&h, &psi, &times, DEFAULT_TOL).unwrap();
        let e = linalg::eig(&h).unwrap();
        let l = linalg::left_eigenvectors(&h, &e, 1e-8).unwrap().unwrap();
        let coeffs = l.adjoint() * psi.to_vector();
        for (t, s) in times.iter().zip(&tr.states) {
            let phases =
                CVector::from_fn(coeffs.len(), |k, _| coeffs[k] * (e.values[k] * Complex64::new(0.0, -t)).exp());
            let oracle = &e.vectors * phases;
            assert!((s.to_vector() - oracle).norm() < 1e-9);
        }
    }

    #[test]
    fn first_state_is_initial_state() {
        let (h, psi) = setup(4, 2.0, 0.1, vec![1], Boundary::Open);
        let tr = evolve(&h, &psi, &[0.0, 0.3, 1.7], DEFAULT_TOL).unwrap();
        assert_eq!(tr.states[0], psi);
        assert_eq!(emitter_populations(&tr)[0][0], 1.0);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let (h, psi) = setup(4, 2.0, 0.1, vec![1], Boundary::Open);
        assert_eq!(evolve(&h, &psi, &[0.1, 0.2], DEFAULT_TOL).unwrap_err(), Error::InvalidTimeGrid);
        assert_eq!(evolve(&h, &psi, &[0.0, 0.2, 0.2], DEFAULT_TOL).unwrap_err(), Error::InvalidTimeGrid);
        let mut bad = h.clone();
        bad[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(evolve(&bad, &psi, &[0.0, 1.0], DEFAULT_TOL), Err(Error::NonFinite { .. })));
        let small = SingleExcitationState::excited_emitter(1, 2, 0, Picture::Original).unwrap();
        assert!(matches!(evolve(&h, &small, &[0.0, 1.0], DEFAULT_TOL), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn densities_complete_the_norm() {
        let (h, psi) = setup(5, 1.0, 0.2, vec![2], Boundary::Open);
        let tr = evolve(&h, &psi, &time_grid(20.0, 41).unwrap(), DEFAULT_TOL).unwrap();
        let pops = emitter_populations(&tr);
        for picture in [Picture::Original, Picture::Mapped] {
            let dens = photon_density(&tr, picture).unwrap();
            for k in 0..tr.len() {
                let total: f64 = dens[k].iter().sum::<f64>() + pops[0][k];
                assert!((total - tr.norm_history[k].powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn localization_components_sum_to_one() {
        let (h, psi) = setup(20, 2.0, 0.05, vec![8], Boundary::Open);
        let tr = evolve(&h, &psi, &time_grid(20.0, 201).unwrap(), DEFAULT_TOL).unwrap();
        let r = localization_report(&tr, 8, 20.0).unwrap();
        assert!((r.p_loc + r.p_l + r.p_r - 1.0).abs() < 1e-12);
        assert!(r.p_r < 1e-3);
        assert!(r.p_loc > r.p_l);
        assert!(matches!(localization_report(&tr, 8, 25.0), Err(Error::WindowTooLong { .. })));
    }

    #[test]
    fn window_average_interpolates() {
        let times = [0.0, 1.0, 2.0];
        let f = [0.0, 1.0, 2.0];
        assert!((time_average(&times, &f, 1.5) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let times: Vec<f64> = (0..200).map(|k| k as f64).collect();
        let p: Vec<f64> = times.iter().map(|t| (-0.013 * t).exp()).collect();
        assert!((fit_decay_rate(&times, &p, (10.0, 150.0)).unwrap() - 0.013).abs() < 1e-12);
        assert!(fit_decay_rate(&times, &p, (500.0, 600.0)).is_err());
    }

    #[test]
    fn peak_skips_initial_point() {
        assert_eq!(peak(&[0.0, 1.0, 2.0], &[1.0, 0.2, 0.5]), (2.0, 0.5));
    }
}
