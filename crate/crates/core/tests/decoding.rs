mod common;

use alc::harness::{classify, parse_config, run_decoding, TrialClass};
use alc::*;
use common::l0_oracle;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn measure(a: &MeasurementMatrix, sig: impl Into<StructuredSignal>) -> (DVector<f64>, DVector<f64>) {
    let x = embed(&sig.into());
    (apply(a, &x).unwrap(), x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unique_l0_estimates_are_exact(n in 2usize..7, extra in 1usize..6, seed in any::<u64>()) {
        let s = (n / 2).max(1);
        let m = n + extra;
        let a = sample_matrix(n, m, mix(seed, 0)).unwrap();
        let (y, x) = measure(&a, gen_sparse(m, s, mix(seed, 1)).unwrap());
        let out = l0_decode(&a, &y, s, DEFAULT_TOL).unwrap();
        if out.status == DecodeStatus::Unique {
            let est = out.estimate.unwrap();
            prop_assert!((est - &x).norm() <= 1e-9 * x.norm().max(1.0));
        }
    }

    #[test]
    fn l0_agrees_with_brute_force(n in 1usize..5, m in 3usize..11, s in 1usize..3, seed in any::<u64>()) {
        prop_assume!(s <= n && n < m);
        let a = sample_matrix(n, m, mix(seed, 0)).unwrap();
        let (y, _) = measure(&a, gen_sparse(m, s, mix(seed, 1)).unwrap());
        let out = l0_decode(&a, &y, s, DEFAULT_TOL).unwrap();
        let oracle = l0_oracle(&a, &y, s, DEFAULT_TOL);
        let expected = match oracle.len() {
            0 => DecodeStatus::NoSolution,
            1 => DecodeStatus::Unique,
            _ => DecodeStatus::Ambiguous,
        };
        prop_assert_eq!(out.status, expected);
        prop_assert_eq!(out.candidate_count.max(1), oracle.len().max(1));
        if let Some(est) = out.estimate {
            prop_assert!((est - &oracle[0]).norm() <= 1e-6);
        }
    }

    #[test]
    fn more_rows_never_lose_uniqueness(seed in any::<u64>()) {
        let (m, s) = (12, 2);
        let full = sample_matrix(6, m, mix(seed, 0)).unwrap();
        let x = embed(&gen_sparse(m, s, mix(seed, 1)).unwrap().into());
        let mut was_correct = false;
        for n in s..=6 {
            let a = full.top_rows(n).unwrap();
            let y = apply(&a, &x).unwrap();
            let correct = classify(&l0_decode(&a, &y, s, DEFAULT_TOL).unwrap(), &x) == TrialClass::UniqueCorrect;
            prop_assert!(correct || !was_correct, "lost uniqueness at n = {}", n);
            was_correct |= correct;
        }
    }

    #[test]
    fn kron_decoding_is_scale_invariant(seed in any::<u64>(), e in -3i32..4) {
        let shape = KronShape::new(4, 4, 2, 2).unwrap();
        let a = sample_matrix(4, 16, mix(seed, 0)).unwrap();
        let x = embed(&gen_kron(4, 4, 2, 2, mix(seed, 1)).unwrap().into());
        let c = 2f64.powi(e);
        let opts = KronOptions { seed: mix(seed, 2), ..KronOptions::default() };
        let y = apply(&a, &x).unwrap();
        let base = kron_decode(&a, &y, shape, &opts).unwrap();
        let scaled = kron_decode(&a, &(&y * c), shape, &opts).unwrap();
        prop_assert_eq!(base.status, scaled.status);
        if let (Some(e1), Some(e2)) = (base.estimate, scaled.estimate) {
            prop_assert!((e1 * c - e2).norm() <= 1e-6 * x.norm().max(1.0) * c.max(1.0));
        }
    }
}

#[test]
fn kron_scaling_keeps_the_search_path() {
    // this case used to lose its fit after y was multiplied by 8
    let seed = 1432686442547749682;
    let shape = KronShape::new(4, 4, 2, 2).unwrap();
    let a = sample_matrix(4, 16, mix(seed, 0)).unwrap();
    let (y, _) = measure(&a, gen_kron(4, 4, 2, 2, mix(seed, 1)).unwrap());
    let opts = KronOptions { seed: mix(seed, 2), ..KronOptions::default() };
    let base = kron_decode(&a, &y, shape, &opts).unwrap();
    let scaled = kron_decode(&a, &(&y * 8.0), shape, &opts).unwrap();
    assert_eq!(base.status, DecodeStatus::Unique);
    assert_eq!(scaled.status, DecodeStatus::Unique);
    assert_eq!(base.estimate.unwrap() * 8.0, scaled.estimate.unwrap());
}

#[test]
fn kron_with_single_column_factor_matches_l0() {
    // l = t = 1 makes the signal r-sparse with b fixed up to scale
    let (k, r, n) = (8, 2, 4);
    let shape = KronShape::new(k, 1, r, 1).unwrap();
    for i in 0..50u64 {
        let a = sample_matrix(n, k, mix(90, i)).unwrap();
        let (y, x) = measure(&a, gen_kron(k, 1, r, 1, mix(91, i)).unwrap());
        let opts = KronOptions { seed: mix(92, i), ..KronOptions::default() };
        let kr = kron_decode(&a, &y, shape, &opts).unwrap();
        let l0 = l0_decode(&a, &y, r, DEFAULT_TOL).unwrap();
        assert_eq!(kr.status, l0.status, "instance {i}");
        let (e1, e2) = (kr.estimate.unwrap(), l0.estimate.unwrap());
        assert!((&e1 - &e2).norm() <= 1e-6 * x.norm(), "instance {i}");
        assert!((e1 - &x).norm() <= 1e-6 * x.norm().max(1.0));
    }
}

#[test]
fn kron_first_factor_with_one_nonzero() {
    let shape = KronShape::new(5, 5, 1, 2).unwrap();
    let a = sample_matrix(3, 25, 17).unwrap();
    let (y, x) = measure(&a, gen_kron(5, 5, 1, 2, 18).unwrap());
    let out = kron_decode(&a, &y, shape, &KronOptions::default()).unwrap();
    assert_eq!(classify(&out, &x), TrialClass::UniqueCorrect);
}

#[test]
fn kron_four_by_four_recovers() {
    let cfg = parse_config("kind = kron\nk = 4\nl = 4\nr = 2\nt = 2\nn = 4\ntrials = 100\nstarts = 20\nseed = 44\n").unwrap();
    let st = run_decoding(&cfg).unwrap().stats;
    assert!(st.is_partition());
    assert!(st.unique_correct >= 95, "{st:?}");
    assert_eq!(st.unique_wrong, 0);
}

#[test]
fn kron_rejects_oversized_search() {
    let shape = KronShape::new(40, 40, 6, 6).unwrap();
    let a = sample_matrix(12, 1600, 1).unwrap();
    let y = DVector::from_element(12, 1.0);
    assert!(matches!(
        kron_decode(&a, &y, shape, &KronOptions::default()),
        Err(AlcError::ResourceLimit(_))
    ));
}

#[test]
fn collisions_are_separated_and_reproducible() {
    let shape = KronShape::new(4, 4, 2, 2).unwrap();
    let a = sample_matrix(2, 16, 5).unwrap();
    let c = collision_search(&a, shape, 30, 6).unwrap().expect("collision below the threshold");
    assert!(c.objective < MAX_COLLISION_OBJECTIVE);
    assert!(c.separation >= MIN_SEPARATION);
    assert!(c.recompute_objective(&a).unwrap() < MAX_COLLISION_OBJECTIVE);
    let d = embed(&c.x1) - embed(&c.x2);
    assert!((d.norm() - c.separation).abs() <= 1e-9 * c.separation);
    assert_eq!(collision_search(&a, shape, 30, 6).unwrap(), Some(c));
}

#[test]
fn polishing_refuses_identical_signals() {
    let a = sample_matrix(2, 16, 5).unwrap();
    let x = gen_kron(4, 4, 2, 2, 7).unwrap();
    assert!(polish_collision(&a, &x, &x).unwrap().is_none());
    let other = gen_kron(4, 4, 2, 2, 8).unwrap();
    if let Some(c) = polish_collision(&a, &x, &other).unwrap() {
        assert!(c.objective < MAX_COLLISION_OBJECTIVE && c.separation >= MIN_SEPARATION);
    }
}

#[test]
fn interleaving_is_a_bijection_on_small_grids() {
    for p in 1..=6u32 {
        let side = 1u64 << p;
        let mut seen = std::collections::HashSet::new();
        for i in 0..side {
            for j in 0..side {
                let (x, y) = (i as f64 / side as f64, j as f64 / side as f64);
                let z = interleave_compress(x, y, p).unwrap();
                assert!((0.0..1.0).contains(&z));
                assert!(seen.insert(z.to_bits()), "p={p} collision at ({x}, {y})");
                assert_eq!(deinterleave(z, p).unwrap(), (x, y));
            }
        }
    }
}

#[test]
fn interleaving_round_trips_random_points() {
    let p = 20u32;
    let scale = (1u64 << p) as f64;
    let mut rng = SeedStream::new(2020);
    for _ in 0..100_000 {
        let (i, j) = (rng.random_range(0..1u64 << p), rng.random_range(0..1u64 << p));
        let (x, y) = (i as f64 / scale, j as f64 / scale);
        assert_eq!(deinterleave(interleave_compress(x, y, p).unwrap(), p).unwrap(), (x, y));
    }
}
