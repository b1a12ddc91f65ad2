use alc::*;
use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// `n × m` matrix of rank at most `rank`, as a product of Gaussian factors.
fn low_rank(n: usize, m: usize, rank: usize, seed: u64) -> MeasurementMatrix {
    let left = sample_matrix(rank, n, mix(seed, 0)).unwrap();
    let right = sample_matrix(rank, m, mix(seed, 1)).unwrap();
    MeasurementMatrix::from_matrix(left.entries().transpose() * right.entries()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_vectors_are_annihilated(n in 1usize..8, extra in 0usize..6, seed in any::<u64>()) {
        let m = n + extra;
        let a = sample_matrix(n, m, seed).unwrap();
        let tol = default_kernel_tol(&a);
        let ker = kernel_basis(&a, tol).unwrap();
        prop_assert_eq!(a.numerical_rank(DEFAULT_RANK_RTOL) + ker.dim(), m);
        for v in &ker.vectors {
            prop_assert!((v.norm() - 1.0).abs() < 1e-10);
            prop_assert!(apply(&a, v).unwrap().norm() <= 1e-8 * v.norm().max(tol));
        }
    }

    #[test]
    fn rank_nullity_with_deficient_rank(n in 2usize..8, extra in 0usize..6, seed in any::<u64>()) {
        let m = n + extra;
        let rank = 1 + (seed as usize) % n;
        let a = low_rank(n, m, rank, seed);
        let ker = kernel_basis(&a, default_kernel_tol(&a)).unwrap();
        prop_assert_eq!(a.numerical_rank(DEFAULT_RANK_RTOL), rank);
        prop_assert_eq!(ker.dim(), m - rank);
        let gram = DMatrix::from_fn(ker.dim(), ker.dim(), |i, j| ker.vectors[i].dot(&ker.vectors[j]));
        prop_assert!((gram - DMatrix::identity(ker.dim(), ker.dim())).norm() < 1e-9);
    }

    #[test]
    fn nsp_gain_shrinks_with_more_trials(seed in any::<u64>(), t in 1usize..200) {
        let a = sample_matrix(5, 20, mix(seed, 0)).unwrap();
        let fam = SignalFamily::Sparse { m: 20, s: 3 };
        let few = nsp_min_gain(&a, &fam, t, mix(seed, 1)).unwrap();
        let many = nsp_min_gain(&a, &fam, 2 * t, mix(seed, 1)).unwrap();
        prop_assert!(many.min_gain <= few.min_gain);
        prop_assert!(few.min_gain > 0.0);
    }

    #[test]
    fn nsp_gain_scales_with_the_matrix(seed in any::<u64>(), c in 0.01f64..100.0) {
        let a = sample_matrix(4, 16, mix(seed, 0)).unwrap();
        let fam = SignalFamily::Kronecker { k: 4, l: 4, r: 2, t: 2 };
        let base = nsp_min_gain(&a, &fam, 50, mix(seed, 1)).unwrap();
        let scaled = nsp_min_gain(&a.scaled(c), &fam, 50, mix(seed, 1)).unwrap();
        prop_assert!((scaled.min_gain - c * base.min_gain).abs() <= 1e-12 * c * base.min_gain.max(1.0));
        prop_assert_eq!(scaled.argmin_trial, base.argmin_trial);
    }

    #[test]
    fn witness_lies_in_the_kernel(n in 1usize..7, extra in 1usize..6, seed in any::<u64>()) {
        let a = sample_matrix(n, n + extra, seed).unwrap();
        let u = sparse_kernel_witness(&a, n + 1).unwrap();
        prop_assert!((u.norm() - 1.0).abs() < 1e-12);
        prop_assert!(u.iter().skip(n + 1).all(|v| *v == 0.0));
        prop_assert!(apply(&a, &u).unwrap().norm() <= 1e-9);
    }
}

#[test]
fn witness_needs_more_nonzeros_than_rows() {
    let a = sample_matrix(4, 10, 3).unwrap();
    assert!(matches!(sparse_kernel_witness(&a, 4), Err(AlcError::NotApplicable(_))));
}

#[test]
fn nsp_on_fixed_support_reports_its_argmin() {
    let a = sample_matrix(3, 8, 11).unwrap();
    let fam = SignalFamily::SparseOn { m: 8, support: vec![1, 4] };
    let rep = nsp_min_gain(&a, &fam, 500, 12).unwrap();
    assert_eq!(rep.argmin_u.len(), 8);
    let u = nalgebra::DVector::from_vec(rep.argmin_u.clone());
    assert_relative_eq!(u.norm(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(apply(&a, &u).unwrap().norm(), rep.min_gain, epsilon = 1e-12);
    assert!(u.iter().enumerate().all(|(i, v)| *v == 0.0 || i == 1 || i == 4));
}

#[test]
fn matrix_csv_round_trip_keeps_entries() {
    let a = sample_matrix(3, 5, 77).unwrap();
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let back = MeasurementMatrix::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.entries(), a.entries());
}

#[test]
fn nested_matrices_share_rows() {
    let a = sample_matrix(6, 9, 5).unwrap();
    let top = a.top_rows(4).unwrap();
    assert_eq!(top.entries(), &a.entries().rows(0, 4).into_owned());
}
