//! Photon-mediated effective Hamiltonian between emitters.
//!
//! Three independent routes to `H_eff[m][n] = g^2 <b_m| (E - H_f)^{-1} |b_n>`:
//!
//! - [`heff_numeric`]: dense linear solves against the real-space lattice.
//! - [`greens_pbc`] / [`greens_obc`]: residue sums of the Bloch resolvent on a
//!   ring, and the projector construction of the open chain from a ring with
//!   one extra cell.
//! - [`heff_closed_form`]: closed expressions in `kappa = (gamma - 2J)/(gamma + 2J)`.
//!
//! Cell blocks use `G(n) = <cell n| (0 - H_f)^{-1} |cell 0>` in the `(a, b)` basis.

use log::warn;
use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::lattice::{bare_hamiltonian, site_index, Boundary, EmitterLayout, LatticeParams, Sublattice};
use crate::linalg;
use crate::{c, CMatrix, CVector, Complex64, Error, Result, I};

pub type Block = Matrix2<Complex64>;

/// Step used to lift the degenerate even ring (`t1 = t2`) off the unit circle.
pub const DEGENERATE_DELTA: f64 = 1e-6;
/// Largest accepted relative residual of a resolvent solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-8;

/// Roots of `P(w) = det(w h(w))`, where `h(w) = T_0 + T_1 w + T_{-1}/w` is the
/// Bloch matrix in the complex variable `w = e^{-iq}`.
///
/// For real hoppings and loss all roots are real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleData {
    pub w_minus1: f64,
    pub w_0: f64,
    pub w_plus1: f64,
    /// `(t1^2 - t2^2)^2 + gamma^2 t2^2`.
    pub delta: f64,
    /// Equal to `w_minus1`; reduces to `(gamma - 2J)/(gamma + 2J)` for `t1 = t2 = J`.
    pub kappa: f64,
    sqrt_delta: f64,
    // w_plus1 + 1, evaluated without cancellation
    w_plus1_shift: f64,
    t1: f64,
    t2: f64,
    gamma: f64,
}

impl PoleData {
    pub fn new(t1: f64, t2: f64, gamma: f64) -> Result<Self> {
        if !(t1 > 0.0 && t2 > 0.0 && t1.is_finite() && t2.is_finite()) {
            return Err(Error::InvalidParameter { field: "t1/t2", reason: "hoppings must be positive".into() });
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Lossless);
        }
        let s = t1 * t1 + t2 * t2;
        let diff = t1 * t1 - t2 * t2;
        let delta = diff * diff + gamma * gamma * t2 * t2;
        let sd = delta.sqrt();
        let w_plus1 = -(s + sd) / (t2 * (2.0 * t1 + gamma));
        let w_minus1 = -t2 * (2.0 * t1 - gamma) / (s + sd);
        let w_plus1_shift = (-(t1 - t2).powi(2) - diff * diff / (sd + gamma * t2)) / (t2 * (2.0 * t1 + gamma));
        Ok(Self { w_minus1, w_0: 0.0, w_plus1, delta, kappa: w_minus1, sqrt_delta: sd, w_plus1_shift, t1, t2, gamma })
    }

    pub fn from_params(params: &LatticeParams) -> Result<Self> {
        Self::new(params.t1, params.t2, params.gamma)
    }

    fn hopping_blocks(&self) -> (Block, Block, Block) {
        let h = 0.5 * self.t2;
        let t0 = Block::new(c(0.0, 0.0), c(self.t1, 0.0), c(self.t1, 0.0), c(0.0, -self.gamma));
        let t_fwd = Block::new(c(0.0, -h), c(h, 0.0), c(h, 0.0), c(0.0, h));
        (t0, t_fwd, t_fwd.adjoint())
    }

    /// `w h(w)` assembled from the real-space hopping blocks.
    pub fn w_times_bloch(&self, w: Complex64) -> Block {
        let (t0, t_fwd, t_bwd) = self.hopping_blocks();
        t_bwd + t0 * w + t_fwd * (w * w)
    }

    /// `P(w) = det(w h(w))`.
    pub fn characteristic(&self, w: Complex64) -> Complex64 {
        self.w_times_bloch(w).determinant()
    }

    /// Leading coefficient of `P`, `-t2 (t1 + gamma/2)`.
    pub fn leading_coefficient(&self) -> f64 {
        -self.t2 * (self.t1 + 0.5 * self.gamma)
    }

    pub fn sqrt_delta(&self) -> f64 {
        self.sqrt_delta
    }

    /// Numerator `W(w) = -adj(w h(w))` of `F(w) = -(w h(w))^{-1} = W/P`.
    pub fn numerator(&self, w: Complex64) -> Block {
        let (t1, t2, g) = (self.t1, self.t2, self.gamma);
        let w2m1 = w * w - 1.0;
        let ab = w * t1 + (w * w + 1.0) * (0.5 * t2);
        Block::new(I * w * g - I * w2m1 * (0.5 * t2), ab, ab, I * w2m1 * (0.5 * t2))
    }

    // `wp1 = w + 1` is supplied separately.
    fn numerator_stable(&self, w: f64, wp1: f64) -> Block {
        let (t1, t2, g) = (self.t1, self.t2, self.gamma);
        let w2m1 = (w - 1.0) * wp1;
        let ab = (t1 - t2) * w + 0.5 * t2 * wp1 * wp1;
        Block::new(c(0.0, g * w - 0.5 * t2 * w2m1), c(ab, 0.0), c(ab, 0.0), c(0.0, 0.5 * t2 * w2m1))
    }

    /// Residues `[R_{-1}, R_0, R_{+1}]` of `F(w)/w` at the three poles.
    ///
    /// `None` at the exceptional point `gamma = 2 t1`, where `w_{-1}` merges with `w_0`.
    pub fn residues(&self) -> Option<[Block; 3]> {
        if (2.0 * self.t1 - self.gamma).abs() <= 1e-14 * self.t1 {
            return None;
        }
        let sd = c(self.sqrt_delta, 0.0);
        let r0 = Block::new(I, c(1.0, 0.0), c(1.0, 0.0), -I) * c(-1.0 / (2.0 * self.t1 - self.gamma), 0.0);
        let wp = self.w_plus1;
        let wm = self.w_minus1;
        let r_plus = self.numerator_stable(wp, self.w_plus1_shift) / (c(wp, 0.0) * sd);
        let r_minus = -self.numerator_stable(wm, wm + 1.0) / (c(wm, 0.0) * sd);
        Some([r_minus, r0, r_plus])
    }

    /// `1 - w_{+1}^N` without cancellation near `w_{+1} = -1`. Zero signals a pole on the contour.
    fn one_minus_wplus_pow(&self, n_cells: usize) -> f64 {
        // |w_{+1}| = 1 - (w_{+1} + 1) since w_{+1} < 0
        let p = (n_cells as f64 * (-self.w_plus1_shift).ln_1p()).exp_m1();
        if n_cells.is_multiple_of(2) {
            -p
        } else {
            2.0 + p
        }
    }
}

// Stable residue sum for the ring resolvent block G(n), 0 <= n < N.
//
// G(0) is rewritten through G(N) plus the polynomial part; no term divides by w_{-1}.
fn pole_sum(pd: &PoleData, n_cells: usize, n: usize) -> Result<Block> {
    debug_assert!(n < n_cells);
    let e = if n > 0 { n } else { n_cells } as i32;
    let d_plus = pd.one_minus_wplus_pow(n_cells);
    if d_plus == 0.0 {
        return Err(Error::PoleOnContour);
    }
    let wm = pd.w_minus1;
    let d_minus = 1.0 - wm.powi(n_cells as i32);
    let sd = pd.sqrt_delta;
    let plus = pd.numerator_stable(pd.w_plus1, pd.w_plus1_shift) * c(pd.w_plus1.powi(e - 1) / (sd * d_plus), 0.0);
    let minus = pd.numerator_stable(wm, wm + 1.0) * c(wm.powi(e - 1) / (sd * d_minus), 0.0);
    let mut r = plus - minus;
    if n == 0 {
        r -= Block::new(-I, c(1.0, 0.0), c(1.0, 0.0), I) * c(1.0 / (2.0 * pd.t1 + pd.gamma), 0.0);
    }
    Ok(r)
}

fn ring_block(t1: f64, t2: f64, gamma: f64, n_cells: usize, n: i64) -> Result<Block> {
    let pd = PoleData::new(t1, t2, gamma)?;
    pole_sum(&pd, n_cells, n.rem_euclid(n_cells as i64) as usize)
}

/// A 2x2 block of the ring resolvent at `E = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGreensBlock {
    /// Cell separation reduced to `0..N`.
    pub n: usize,
    pub block: Block,
    /// Only the `bb` entry is meaningful (degenerate even ring with `t1 = t2`);
    /// the other entries are NaN.
    pub bb_only: bool,
}

impl CellGreensBlock {
    pub fn aa(&self) -> Complex64 {
        self.block[(0, 0)]
    }
    pub fn ab(&self) -> Complex64 {
        self.block[(0, 1)]
    }
    pub fn ba(&self) -> Complex64 {
        self.block[(1, 0)]
    }
    pub fn bb(&self) -> Complex64 {
        self.block[(1, 1)]
    }
}

// `scale` is the natural magnitude of the quantity, used to judge the step-to-step spread.
fn richardson<F>(scale: f64, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let coarse = f(DEGENERATE_DELTA)?;
    let fine = f(0.5 * DEGENERATE_DELTA)?;
    let extrapolated = fine * 2.0 - coarse;
    let spread = (fine - coarse).norm() / scale;
    if !(spread <= 1e-2) {
        return Err(Error::ToleranceNotReached { tol: 1e-2, achieved: spread });
    }
    Ok(extrapolated)
}

fn degenerate_ring(params: &LatticeParams, n_cells: usize) -> bool {
    params.is_uniform() && n_cells.is_multiple_of(2)
}

/// Ring resolvent block `G(n)` at `E = 0` for a periodic lattice.
///
/// For `t1 = t2` and even `N` the pole `w_{+1} = -1` sits on the contour. The
/// `bb` entry is then evaluated at `t1 = J(1 - delta)`, `t2 = J(1 + delta)`,
/// Richardson-extrapolated to `delta = 0` and stripped of the zero-mode term
/// `(-1)^n i/(N gamma)`, leaving the value approached as `E -> 0`.
pub fn greens_pbc(params: &LatticeParams, n: i64) -> Result<CellGreensBlock> {
    params.validate()?;
    if params.boundary != Boundary::Periodic {
        return Err(Error::WrongBoundary { required: "periodic" });
    }
    if params.gamma == 0.0 {
        return Err(Error::Lossless);
    }
    let nc = params.n_cells;
    let nr = n.rem_euclid(nc as i64) as usize;
    if degenerate_ring(params, nc) {
        let j = params.t1;
        let bb = richardson(1.0 / (params.gamma + 2.0 * j), |d| {
            Ok(ring_block(j * (1.0 - d), j * (1.0 + d), params.gamma, nc, nr as i64)?[(1, 1)])
        })?;
        let sign = if nr.is_multiple_of(2) { 1.0 } else { -1.0 };
        let bb = bb - c(0.0, sign / (nc as f64 * params.gamma));
        let nan = c(f64::NAN, f64::NAN);
        return Ok(CellGreensBlock { n: nr, block: Block::new(nan, nan, nan, bb), bb_only: true });
    }
    let block = ring_block(params.t1, params.t2, params.gamma, nc, nr as i64)?;
    Ok(CellGreensBlock { n: nr, block, bb_only: false })
}

/// `bb` entry of the open-chain resolvent between cells `m` and `n` (1-based).
///
/// The chain is a ring of `N + 1` cells with cell 0 projected out:
/// `G_OB(m, n) = G(m - n) - G(m) G(0)^{-1} G(-n)`.
pub fn greens_obc(params: &LatticeParams, m: usize, n: usize) -> Result<Complex64> {
    params.validate()?;
    if params.boundary != Boundary::Open {
        return Err(Error::WrongBoundary { required: "open" });
    }
    if params.gamma == 0.0 {
        return Err(Error::Lossless);
    }
    let nc = params.n_cells;
    for cell in [m, n] {
        if cell == 0 || cell > nc {
            return Err(Error::CellOutOfRange { cell, n_cells: nc });
        }
    }
    let ring = nc + 1;
    let projected = |t1: f64, t2: f64| -> Result<Complex64> {
        let pd = PoleData::new(t1, t2, params.gamma)?;
        let g = |k: i64| pole_sum(&pd, ring, k.rem_euclid(ring as i64) as usize);
        let (m, n) = (m as i64, n as i64);
        let g0 = g(0)?;
        let inv = g0.try_inverse().ok_or(Error::Singular { residual: f64::INFINITY })?;
        let r = g(m - n)? - g(m)? * inv * g(-n)?;
        Ok(r[(1, 1)])
    };
    if degenerate_ring(params, ring) {
        let j = params.t1;
        richardson(1.0 / (params.gamma + 2.0 * j), |d| projected(j * (1.0 - d), j * (1.0 + d)))
    } else {
        projected(params.t1, params.t2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeffMethod {
    Numeric,
    ClosedFormPbc,
    ClosedFormObc,
}

impl HeffMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            HeffMethod::Numeric => "numeric",
            HeffMethod::ClosedFormPbc => "closed_form_pbc",
            HeffMethod::ClosedFormObc => "closed_form_obc",
        }
    }
}

/// Which expression produced a closed-form matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Dense linear solve.
    Resolvent,
    /// Infinite-lattice formula with wrap-around, valid for `N >> lambda`.
    LargeN,
    /// Exact finite-`N` expressions.
    FiniteN,
    /// `gamma -> 0` limit of the infinite-lattice formula.
    LosslessLimit,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Resolvent => "resolvent",
            Regime::LargeN => "large_n",
            Regime::FiniteN => "finite_n",
            Regime::LosslessLimit => "lossless_limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeChoice {
    /// Large-`N` when `|kappa|^{N/2} < 1e-12`, finite-`N` otherwise.
    Auto,
    LargeN,
    FiniteN,
}

/// `N_e x N_e` matrix of photon-mediated couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCouplingMatrix {
    pub entries: CMatrix,
    pub method: HeffMethod,
    pub boundary: Boundary,
    pub regime: Regime,
    /// `false` when `g >= J/sqrt(N)`, outside the weak-coupling regime.
    pub weak_coupling_valid: bool,
}

impl EffectiveCouplingMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest `|Re H| / |Im H|` over entries with non-negligible modulus.
    pub fn max_real_fraction(&self) -> f64 {
        let scale = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.entries.iter().filter(|z| z.norm() > 1e-12 * scale).map(|z| z.re.abs() / z.im.abs()).fold(0.0, f64::max)
    }

    /// Ratio of the largest leftward to the largest rightward coupling for
    /// emitters in cells `cells` of an `n_cells` ring, using separations
    /// reduced to `(-N/2, N/2]`.
    pub fn chirality_ratio(&self, cells: &[usize], n_cells: usize) -> f64 {
        let mut right = 0.0_f64;
        let mut left = 0.0_f64;
        for (i, &m) in cells.iter().enumerate() {
            for (j, &n) in cells.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = (m as i64 - n as i64).rem_euclid(n_cells as i64) as usize;
                let z = self.entries[(i, j)].norm();
                if 2 * d <= n_cells {
                    right = right.max(z);
                } else {
                    left = left.max(z);
                }
            }
        }
        left / right
    }
}

fn weak_coupling_valid(params: &LatticeParams, g: f64) -> bool {
    let valid = g < params.t1.min(params.t2) / (params.n_cells as f64).sqrt();
    if !valid {
        warn!("g = {g} is not small against J/sqrt(N); effective couplings may be inaccurate");
    }
    valid
}

/// Entry `(i, j)` is `g^2 <b_{n_i}| (E - H_f)^{-1} |b_{n_j}>`, one solve per source emitter.
///
/// Singular systems are accepted when they are consistent: on even rings
/// with `t1 = t2` the zero mode at `E = 0` lives on the `a` sublattice only, so
/// the `b` components of every solution coincide.
pub fn heff_numeric(params: &LatticeParams, layout: &EmitterLayout, e: Complex64) -> Result<EffectiveCouplingMatrix> {
    params.validate()?;
    layout.check_range(params)?;
    if params.gamma == 0.0 {
        return Err(Error::Lossless);
    }
    let h = bare_hamiltonian(params);
    let dim = h.nrows();
    let mut a = -h;
    for k in 0..dim {
        a[(k, k)] += e;
    }
    let columns: Vec<CVector> = layout
        .cells
        .par_iter()
        .map(|&cell| {
            let mut rhs = CVector::zeros(dim);
            rhs[site_index(0, cell, Sublattice::B)] = c(1.0, 0.0);
            resolvent_column(&a, &rhs)
        })
        .collect::<Result<_>>()?;
    let ne = layout.len();
    let g2 = layout.g * layout.g;
    let entries = CMatrix::from_fn(ne, ne, |i, j| columns[j][site_index(0, layout.cells[i], Sublattice::B)] * g2);
    Ok(EffectiveCouplingMatrix {
        entries,
        method: HeffMethod::Numeric,
        boundary: params.boundary,
        regime: Regime::Resolvent,
        weak_coupling_valid: weak_coupling_valid(params, layout.g),
    })
}

fn resolvent_column(a: &CMatrix, rhs: &CVector) -> Result<CVector> {
    let norm_a = a.norm();
    if let Ok((x, rel)) = linalg::solve(a, rhs) {
        let growth = norm_a * x.norm() / rhs.norm();
        if rel <= SOLVE_RESIDUAL_TOL && growth < 1e12 {
            return Ok(x);
        }
    }
    // near-singular: minimum-norm solution with the null space truncated
    let svd = nalgebra::SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd.solve(rhs, 1e-12 * smax).map_err(|_| Error::Singular { residual: f64::INFINITY })?;
    let residual = (a * &x - rhs).norm() / rhs.norm();
    if !(residual <= SOLVE_RESIDUAL_TOL) {
        return Err(Error::Singular { residual });
    }
    Ok(x)
}

/// `kappa = (gamma - 2J)/(gamma + 2J)`.
pub fn kappa(gamma: f64, j: f64) -> f64 {
    (gamma - 2.0 * j) / (gamma + 2.0 * j)
}

/// Interaction range `lambda = -1/ln|kappa|`: zero at `gamma = 2J`, infinite at `gamma = 0`.
pub fn interaction_range(gamma: f64, j: f64) -> f64 {
    let k = kappa(gamma, j).abs();
    if k == 0.0 {
        0.0
    } else if k >= 1.0 {
        f64::INFINITY
    } else {
        -1.0 / k.ln()
    }
}

/// Asymptotic factor `-(1 - kappa^N)/(1 + kappa^{N-1})` relating edge-straddling
/// open-chain couplings to ring couplings for even `N`; tends to `-1` as `N` grows.
pub fn obc_finite_size_prefactor(kappa: f64, n_cells: usize) -> f64 {
    -(1.0 - kappa.powi(n_cells as i32)) / (1.0 + kappa.powi(n_cells as i32 - 1))
}

/// Infinite-lattice coupling `H_{m n}` for separation `d = m - n >= 0` with `g = 1`.
pub fn large_n_coupling(d: usize, gamma: f64, j: f64) -> Complex64 {
    if d == 0 {
        c(0.0, -1.0 / (gamma + 2.0 * j))
    } else {
        c(0.0, 4.0 * j * (gamma - 2.0 * j).powi(d as i32 - 1) / (gamma + 2.0 * j).powi(d as i32 + 1))
    }
}

/// Exact ring coupling for separation `d` (reduced mod `N`) with `g = 1`.
///
/// For even `N` this is the value approached as `E -> 0`.
pub fn finite_n_coupling(d: usize, n_cells: usize, gamma: f64, j: f64) -> Complex64 {
    let k = kappa(gamma, j);
    let kn = k.powi(n_cells as i32);
    let s = gamma + 2.0 * j;
    let d = d % n_cells;
    if d == 0 {
        c(0.0, -(1.0 - k.powi(n_cells as i32 - 1)) / (s * (1.0 - kn)))
    } else {
        c(0.0, 4.0 * j * k.powi(d as i32 - 1) / (s * s * (1.0 - kn)))
    }
}

/// Closed-form effective Hamiltonian for `t1 = t2 = J` and `gamma > 0`.
///
/// Periodic lattices use the translation-invariant couplings with wrap-around.
/// Open lattices use the ring result with the sign `(-1)^{N+1}` on every pair
/// whose target lies left of the source (large-`N`), or the projector
/// construction (finite-`N`).
pub fn heff_closed_form(
    params: &LatticeParams,
    layout: &EmitterLayout,
    choice: RegimeChoice,
) -> Result<EffectiveCouplingMatrix> {
    params.validate()?;
    layout.check_range(params)?;
    if !params.is_uniform() {
        return Err(Error::NonUniformHopping { t1: params.t1, t2: params.t2 });
    }
    if params.gamma == 0.0 {
        return Err(Error::Lossless);
    }
    let (j, gamma, nc) = (params.t1, params.gamma, params.n_cells);
    let regime = match choice {
        RegimeChoice::LargeN => Regime::LargeN,
        RegimeChoice::FiniteN => Regime::FiniteN,
        RegimeChoice::Auto => {
            if kappa(gamma, j).abs().powf(0.5 * nc as f64) < 1e-12 {
                Regime::LargeN
            } else {
                warn!("N = {nc} is not large against the interaction range; using finite-N expressions");
                Regime::FiniteN
            }
        }
    };
    let ne = layout.len();
    let g2 = layout.g * layout.g;
    let sign = if nc % 2 == 0 { -1.0 } else { 1.0 };
    let mut entries = CMatrix::zeros(ne, ne);
    for (i, &m) in layout.cells.iter().enumerate() {
        for (jx, &n) in layout.cells.iter().enumerate() {
            let d = (m as i64 - n as i64).rem_euclid(nc as i64) as usize;
            let value = match (regime, params.boundary) {
                (Regime::LargeN, boundary) => {
                    let v = if 2 * d <= nc { large_n_coupling(d, gamma, j) } else { c(0.0, 0.0) };
                    if boundary == Boundary::Open && m < n {
                        v * sign
                    } else {
                        v
                    }
                }
                (_, Boundary::Periodic) => finite_n_coupling(d, nc, gamma, j),
                (_, Boundary::Open) => greens_obc(params, m, n)?,
            };
            entries[(i, jx)] = value * g2;
        }
    }
    Ok(EffectiveCouplingMatrix {
        entries,
        method: match params.boundary {
            Boundary::Periodic => HeffMethod::ClosedFormPbc,
            Boundary::Open => HeffMethod::ClosedFormObc,
        },
        boundary: params.boundary,
        regime,
        weak_coupling_valid: weak_coupling_valid(params, layout.g),
    })
}

/// `gamma -> 0` limit of the infinite-lattice couplings: every pair couples with
/// modulus `g^2/J`, alternating in sign with separation.
pub fn heff_lossless_limit(params: &LatticeParams, layout: &EmitterLayout) -> Result<EffectiveCouplingMatrix> {
    params.validate()?;
    layout.check_range(params)?;
    if !params.is_uniform() {
        return Err(Error::NonUniformHopping { t1: params.t1, t2: params.t2 });
    }
    let (j, nc) = (params.t1, params.n_cells);
    let g2 = layout.g * layout.g;
    let ne = layout.len();
    let entries = CMatrix::from_fn(ne, ne, |i, k| {
        let d = (layout.cells[i] as i64 - layout.cells[k] as i64).rem_euclid(nc as i64) as usize;
        large_n_coupling(d, 0.0, j) * g2
    });
    Ok(EffectiveCouplingMatrix {
        entries,
        method: match params.boundary {
            Boundary::Periodic => HeffMethod::ClosedFormPbc,
            Boundary::Open => HeffMethod::ClosedFormObc,
        },
        boundary: params.boundary,
        regime: Regime::LosslessLimit,
        weak_coupling_valid: weak_coupling_valid(params, layout.g),
    })
}
