use nalgebra::SymmetricEigen;
use nhbath::lattice::{transform_matrix, transform_state};
use nhbath::{
    total_hamiltonian, Boundary, CMatrix, CVector, Complex64, Direction, EmitterLayout, LatticeParams, Picture,
    SingleExcitationState,
};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = (LatticeParams, EmitterLayout)> {
    (2usize..=7, 0.2f64..2.0, 0.2f64..2.0, 0.0f64..3.0, any::<bool>(), 0.0f64..0.5, 0usize..=3).prop_map(
        |(n, t1, t2, gamma, open, g, ne)| {
            let boundary = if open { Boundary::Open } else { Boundary::Periodic };
            let params = LatticeParams::new(n, t1, t2, gamma, boundary).unwrap();
            let cells: Vec<usize> = (1..=n).step_by(2).take(ne).collect();
            (params, EmitterLayout::new(cells, g).unwrap())
        },
    )
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loss_operator_is_negative_semidefinite((params, layout) in params_strategy(), mapped in any::<bool>()) {
        let picture = if mapped { Picture::Mapped } else { Picture::Original };
        let h = total_hamiltonian(&params, &layout, picture).unwrap();
        let loss = (&h - h.adjoint()) / Complex64::new(0.0, 2.0);
        prop_assert!(max_abs(&(&loss - loss.adjoint())) < 1e-12);
        let top = SymmetricEigen::new(loss).eigenvalues.max();
        prop_assert!(top <= 1e-12, "largest loss eigenvalue {top}");
    }

    #[test]
    fn pictures_are_unitarily_equivalent((params, layout) in params_strategy(), seed in 0u64..1000) {
        let original = total_hamiltonian(&params, &layout, Picture::Original).unwrap();
        let mapped = total_hamiltonian(&params, &layout, Picture::Mapped).unwrap();
        let n = params.n_cells;
        let forward = transform_matrix(&original, n, Direction::ToMapped).unwrap();
        prop_assert!(max_abs(&(forward - &mapped)) < 1e-12);

        let dim = layout.len() + 2 * n;
        let v = CVector::from_fn(dim, |k, _| {
            let x = (seed as f64 + 1.3 * k as f64).sin();
            Complex64::new(x, (x * 7.0).cos())
        });
        let psi = SingleExcitationState::from_vector(&v, layout.len(), Picture::Original).unwrap();
        let there = transform_state(&psi, Direction::ToMapped).unwrap();
        prop_assert!((there.norm() - psi.norm()).abs() < 1e-12);
        let back = transform_state(&there, Direction::ToOriginal).unwrap();
        prop_assert!((back.to_vector() - v).norm() < 1e-12);
        let h_psi = &original * psi.to_vector();
        let mapped_h_psi = &mapped * there.to_vector();
        let h_psi_mapped = transform_state(
            &SingleExcitationState::from_vector(&h_psi, layout.len(), Picture::Original).unwrap(),
            Direction::ToMapped,
        ).unwrap();
        prop_assert!((h_psi_mapped.to_vector() - mapped_h_psi).norm() < 1e-11);
    }
}
