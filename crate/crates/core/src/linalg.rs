//! Dense complex linear algebra shared by the physics modules.
//!
//! Eigenvalues come from nalgebra's complex Schur decomposition; eigenvectors
//! are recovered from the triangular factor by back-substitution. The matrix
//! exponential is nalgebra's Padé scaling-and-squaring implementation.

use nalgebra::{Schur, SVD};

use crate::{CMatrix, CVector, Complex64, Error, Result};

/// Right eigenpairs of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMatrix,
}

/// Complex Schur decomposition followed by triangular back-substitution.
pub fn eig(m: &CMatrix) -> Result<Eigen> {
    check_square(m)?;
    check_finite(m, "eigenproblem input")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();

    let scale = t.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE * 1e3);

    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut pivot = t[(j, j)] - lambda;
            if pivot.norm() < smin {
                pivot = Complex64::new(smin, 0.0);
            }
            y[(j, k)] = -acc / pivot;
        }
        // keep the growth of near-defective columns bounded
        let cmax = (0..=k).map(|j| y[(j, k)].norm()).fold(0.0, f64::max);
        if cmax > 1e100 {
            for j in 0..=k {
                y[(j, k)] /= cmax;
            }
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= Complex64::new(nrm, 0.0);
        }
    }
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    check_square(m)?;
    check_finite(m, "eigenproblem input")?;
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let (_, t) = schur.unpack();
    Ok((0..m.nrows()).map(|k| t[(k, k)]).collect())
}

/// Left eigenvectors paired with the right eigenpairs of `m`.
///
/// Left vectors are right eigenvectors of `m^†` matched to `right.values` by
/// eigenvalue (`conj(mu_j) ~ lambda_k`, tolerance `match_tol` relative to the
/// spectral scale). Each cluster of numerically equal eigenvalues is then
/// rescaled so that `L^† R = 1` within the cluster. Returns `None` when the
/// matching fails or a cluster overlap matrix is singular (defective input).
pub fn left_eigenvectors(m: &CMatrix, right: &Eigen, match_tol: f64) -> Result<Option<CMatrix>> {
    let n = m.nrows();
    let adj = eig(&m.adjoint())?;
    let scale = right.values.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let tol = match_tol * scale;

    let mut used = vec![false; n];
    let mut order = vec![0usize; n];
    for (k, &target) in right.values.iter().enumerate() {
        let best = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                let da = (adj.values[a].conj() - target).norm();
                let db = (adj.values[b].conj() - target).norm();
                da.total_cmp(&db)
            })
            .expect("unused index available");
        if (adj.values[best].conj() - target).norm() > tol {
            return Ok(None);
        }
        used[best] = true;
        order[k] = best;
    }
    let mut left = CMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        left.set_column(k, &adj.vectors.column(j));
    }

    // biorthonormalise cluster by cluster
    let mut assigned = vec![false; n];
    for k in 0..n {
        if assigned[k] {
            continue;
        }
        let cluster: Vec<usize> =
            (k..n).filter(|&j| !assigned[j] && (right.values[j] - right.values[k]).norm() <= tol).collect();
        for &j in &cluster {
            assigned[j] = true;
        }
        let m_c = cluster.len();
        let mut overlap = CMatrix::zeros(m_c, m_c);
        for (a, &ja) in cluster.iter().enumerate() {
            for (b, &jb) in cluster.iter().enumerate() {
                overlap[(a, b)] = left.column(ja).dotc(&right.vectors.column(jb));
            }
        }
        let inv = match overlap.clone().try_inverse() {
            Some(inv) if inv.iter().all(|z| z.is_finite()) && rcond_raw(&overlap) > 1e-14 => inv,
            _ => return Ok(None),
        };
        // L_c <- L_c * inv^†  so that L_c^† R_c = inv * overlap = 1
        let mut block = CMatrix::zeros(n, m_c);
        for (a, &ja) in cluster.iter().enumerate() {
            block.set_column(a, &left.column(ja));
        }
        let fixed = block * inv.adjoint();
        for (a, &ja) in cluster.iter().enumerate() {
            left.set_column(ja, &fixed.column(a));
        }
    }
    Ok(Some(left))
}

/// Reciprocal 2-norm condition number of `v` after scaling each column to unit norm.
pub fn reciprocal_condition(v: &CMatrix) -> f64 {
    let mut w = v.clone();
    for mut col in w.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= Complex64::new(nrm, 0.0);
        }
    }
    rcond_raw(&w)
}

fn rcond_raw(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// `exp(m)` by Padé approximation with scaling and squaring.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.exp()
}

/// Solves `a x = b` by partial-pivot LU and reports the relative residual.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<(CVector, f64)> {
    check_square(a)?;
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
    }
    let lu = a.clone().lu();
    let x = lu.solve(b).ok_or(Error::Singular { residual: f64::INFINITY })?;
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular { residual: f64::INFINITY });
    }
    let r = a * &x - b;
    let denom = a.norm() * x.norm() + b.norm();
    let rel = if denom > 0.0 { r.norm() / denom } else { 0.0 };
    Ok((x, rel))
}

pub(crate) fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    Ok(())
}

pub(crate) fn check_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        // small LCG
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        let m = random_matrix(12, 7);
        let e = eig(&m).unwrap();
        for k in 0..12 {
            let v = e.vectors.column(k);
            let r = &m * v - v * e.values[k];
            assert!(r.norm() < 1e-12, "residual {}", r.norm());
        }
    }

    #[test]
    fn left_vectors_biorthonormal_and_complete() {
        let m = random_matrix(9, 3);
        let e = eig(&m).unwrap();
        let l = left_eigenvectors(&m, &e, 1e-8).unwrap().unwrap();
        let overlap = l.adjoint() * &e.vectors;
        assert!((overlap - CMatrix::identity(9, 9)).norm() < 1e-10);
        let recon = &e.vectors * l.adjoint();
        assert!((recon - CMatrix::identity(9, 9)).norm() < 1e-10);
    }

    #[test]
    fn jordan_block_is_flagged_defective() {
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..3 {
            m[(i, i + 1)] = c(1.0, 0.0);
        }
        let e = eig(&m).unwrap();
        assert!(reciprocal_condition(&e.vectors) < 1e-6);
    }

    #[test]
    fn expm_of_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, -1.0), c(-0.5, 0.3)]));
        let e = expm(&m);
        assert!((e[(0, 0)] - c(0.0, -1.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - c(-0.5, 0.3).exp()).norm() < 1e-14);
    }

    #[test]
    fn singular_solve_reports_error_or_large_residual() {
        let m = CMatrix::zeros(3, 3);
        let b = CVector::from_element(3, c(1.0, 0.0));
        assert!(solve(&m, &b).is_err());
    }
}
