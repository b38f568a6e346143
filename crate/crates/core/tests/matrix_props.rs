use nambuq_core::matrix::*;
use nambuq_core::rng::SeededRng;
use proptest::prelude::*;

fn state() -> impl Strategy<Value = DensityMatrix> {
    (1usize..=5, any::<u64>()).prop_map(|(dim, seed)| random_density(dim, dim, seed).unwrap())
}

fn state_of_rank() -> impl Strategy<Value = DensityMatrix> {
    (2usize..=5, any::<u64>())
        .prop_flat_map(|(dim, seed)| (Just(dim), 1..=dim, Just(seed)))
        .prop_map(|(dim, rank, seed)| random_density(dim, rank, seed).unwrap())
}

fn close(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> bool {
    a.sub(b).frobenius_norm() <= tol * (1.0 + b.frobenius_norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_states_are_valid(rho in state_of_rank()) {
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-12);
        prop_assert!(rho.eigenvalues()[0] >= -1e-12);
        let m = rho.matrix();
        prop_assert!((m - m.adjoint()).norm() <= 1e-14);
    }

    #[test]
    fn power_additivity(rho in state(), s in 0.1f64..3.0, t in 0.1f64..3.0) {
        let ps = matrix_power(&rho, s).unwrap();
        let pt = matrix_power(&rho, t).unwrap();
        let pst = matrix_power(&rho, s + t).unwrap();
        let prod = HermitianMatrix::new(ps.matrix() * pt.matrix()).unwrap();
        prop_assert!(close(&prod, &pst, 1e-10));
    }

    #[test]
    fn integer_powers_match_products(rho in state(), k in 0u32..6) {
        let mut acc = HermitianMatrix::identity(rho.dim());
        for _ in 0..k {
            acc = HermitianMatrix::new(acc.matrix() * rho.matrix()).unwrap();
        }
        prop_assert!(close(&matrix_power(&rho, k as f64).unwrap(), &acc, 1e-12));
        let tr = acc.trace();
        prop_assert!((moment(&rho, k) - tr).abs() <= 1e-12 * (1.0 + tr.abs()));
    }

    #[test]
    fn moments_decrease_with_order(rho in state()) {
        let m = moments(&rho, 6);
        prop_assert!((m[0] - 1.0).abs() <= 1e-12);
        for w in m.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-14);
        }
    }

    #[test]
    fn moment_gradient_by_finite_differences(rho in state(), n in 1u32..6) {
        let fd = functional_gradient_fd(
            |r: &DensityMatrix| Ok::<f64, MatrixError>(moment(r, n)),
            &rho,
            DEFAULT_FD_STEP,
        )
        .unwrap();
        let closed = matrix_power(&rho, (n - 1) as f64).unwrap().scale(n as f64);
        prop_assert!(close(&fd, &closed, 1e-8));
    }

    #[test]
    fn spectral_roundtrip(rho in state_of_rank()) {
        let sd = spectral_decompose(rho.as_hermitian());
        prop_assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(close(&sd.reconstruct(), rho.as_hermitian(), 1e-12));
    }

    #[test]
    fn partial_trace_of_product(d1 in 1usize..4, d2 in 1usize..4, s1: u64, s2: u64) {
        let a = random_density(d1, d1, s1).unwrap();
        let b = random_density(d2, d2, s2).unwrap();
        let ab = tensor_product(&a, &b);
        let shape = BipartiteShape::new(d1, d2).unwrap();
        let ra = partial_trace(&ab, shape, Subsystem::First).unwrap();
        let rb = partial_trace(&ab, shape, Subsystem::Second).unwrap();
        prop_assert!(close(ra.as_hermitian(), a.as_hermitian(), 1e-12));
        prop_assert!(close(rb.as_hermitian(), b.as_hermitian(), 1e-12));
    }

    #[test]
    fn partial_trace_is_adjoint_of_embedding(d1 in 1usize..4, d2 in 1usize..4, seed: u64) {
        let shape = BipartiteShape::new(d1, d2).unwrap();
        let mut rng = SeededRng::new(seed);
        let rho = random_density_with(shape.total(), shape.total(), &mut rng).unwrap();
        for (keep, d) in [(Subsystem::First, d1), (Subsystem::Second, d2)] {
            let g = random_hermitian(d, 1.0, &mut rng);
            let lhs = partial_trace(&rho, shape, keep).unwrap().as_hermitian().trace_product(&g);
            let rhs = rho.as_hermitian().trace_product(&embed(&g, shape, keep).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn trace_distance_is_a_metric(seed: u64, dim in 2usize..5) {
        let mut rng = SeededRng::new(seed);
        let a = random_density_with(dim, dim, &mut rng).unwrap();
        let b = random_density_with(dim, 1, &mut rng).unwrap();
        let c = random_density_with(dim, 2, &mut rng).unwrap();
        let (ha, hb, hc) = (a.as_hermitian(), b.as_hermitian(), c.as_hermitian());
        prop_assert!(trace_distance(ha, ha) <= 1e-14);
        prop_assert!((trace_distance(ha, hb) - trace_distance(hb, ha)).abs() <= 1e-14);
        prop_assert!(trace_distance(ha, hc) <= trace_distance(ha, hb) + trace_distance(hb, hc) + 1e-12);
        prop_assert!(trace_distance(ha, hb) <= 1.0 + 1e-12);
    }

    #[test]
    fn random_unitaries_are_unitary(seed: u64, dim in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let u = random_unitary(dim, &mut rng);
        let eye = CMatrix::identity(dim, dim);
        prop_assert!((u.adjoint() * &u - eye).norm() <= 1e-12);
    }

    #[test]
    fn literal_roundtrip(rho in state()) {
        let back = from_literal(&to_literal(rho.matrix())).unwrap();
        prop_assert_eq!(&back, rho.matrix());
    }
}

#[test]
fn singular_power_of_rank_deficient_state() {
    let rho = random_density(3, 1, 5).unwrap();
    assert!(matches!(matrix_power(&rho, -0.5), Err(MatrixError::SingularPower { .. })));
    assert!(matrix_power(&rho, 0.5).is_ok());
}

#[test]
fn pauli_algebra() {
    let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
    let xy = commutator(x.matrix(), y.matrix());
    let two_i_z = z.matrix() * C64::new(0.0, 2.0);
    assert!((xy - two_i_z).norm() < 1e-15);
    let bell = pauli::bell();
    let shape = BipartiteShape::new(2, 2).unwrap();
    let r = partial_trace(&bell, shape, Subsystem::First).unwrap();
    assert!(trace_distance(r.as_hermitian(), DensityMatrix::maximally_mixed(2).as_hermitian()) < 1e-15);
}
