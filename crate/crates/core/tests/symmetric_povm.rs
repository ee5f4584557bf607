//! Outcome law of the symmetric collective measurement and the classical
//! snapshot identities.

use dseu_core::protocols::{run_shadow_round, Device, DeviceLabel, RoundOutcome};
use dseu_core::qcore::{haar_state, haar_unitary};
use dseu_core::stats::{ks_test, summarize};
use dseu_core::symmetric::{
    build_snapshot, choi_of_unitary, kappa, sample_symmetric_povm, snapshot_inner,
    symmetric_projector,
};
use dseu_core::{SeedStream, UnitaryMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::beta::ln_beta;

#[test]
fn overlap_law_normalization() {
    // Weighting the Haar overlap density (d-1)(1-p)^(d-2) by kappa_T p^T must
    // integrate to one: kappa_T (d-1) B(T+1, d-1) = 1.
    for d in [2usize, 3, 4, 8, 16, 64] {
        for t in [1usize, 2, 3, 4, 8] {
            let k = kappa(d, t).unwrap() as f64;
            let total = k * (d as f64 - 1.0) * ln_beta(t as f64 + 1.0, d as f64 - 1.0).exp();
            assert!((total - 1.0).abs() < 1e-10, "d={d} T={t}: {total}");
        }
    }
}

#[test]
fn overlap_law_ks() {
    let mut rng = SeedStream::new(200).rng();
    for d in [2usize, 4, 8] {
        let input = haar_state(d, &mut rng).unwrap();
        for t in [1usize, 2, 4] {
            let overlaps: Vec<f64> = (0..100_000)
                .map(|_| sample_symmetric_povm(&input, t, &mut rng).unwrap().overlap_sq)
                .collect();
            let law = Beta::new(t as f64 + 1.0, d as f64 - 1.0).unwrap();
            let test = ks_test(&overlaps, |x| law.cdf(x.clamp(0.0, 1.0)));
            assert!(test.p_value > 0.01, "d={d} T={t}: {test:?}");
        }
    }
}

#[test]
fn mean_overlap_single_copy_qubit() {
    let mut rng = SeedStream::new(201).rng();
    let input = haar_state(2, &mut rng).unwrap();
    let s = summarize(
        (0..100_000).map(|_| sample_symmetric_povm(&input, 1, &mut rng).unwrap().overlap_sq),
    );
    assert!(s.z_score(2.0 / 3.0).abs() <= 5.0, "{s:?}");
}

/// Entrywise z-scores of the sample mean of `samples` against `exact`.
fn max_entry_z(samples: &[DMatrix<Complex64>], exact: &DMatrix<Complex64>) -> f64 {
    let (r, c) = exact.shape();
    let mut worst: f64 = 0.0;
    for i in 0..r {
        for j in 0..c {
            for part in [0, 1] {
                let pick = |z: Complex64| if part == 0 { z.re } else { z.im };
                let s = summarize(samples.iter().map(|m| pick(m[(i, j)])));
                worst = worst.max(s.z_score(pick(exact[(i, j)])).abs());
            }
        }
    }
    worst
}

#[test]
fn outcome_first_moment() {
    let mut rng = SeedStream::new(202).rng();
    for (d, t) in [(2usize, 1usize), (3, 2), (4, 4)] {
        let input = haar_state(d, &mut rng).unwrap();
        let samples: Vec<_> = (0..100_000)
            .map(|_| sample_symmetric_povm(&input, t, &mut rng).unwrap().phi.projector())
            .collect();
        let exact = (DMatrix::identity(d, d) + input.projector() * Complex64::new(t as f64, 0.0))
            / Complex64::new((d + t) as f64, 0.0);
        let z = max_entry_z(&samples, &exact);
        assert!(z <= 5.0, "d={d} T={t}: max z {z}");
    }
}

#[test]
fn povm_completeness_on_symmetric_subspace() {
    // kappa_2 E_phi (phi phi^dag)^{(x)2} = Pi_sym over Haar phi at d = 2.
    let (d, t) = (2usize, 2usize);
    let k = kappa(d, t).unwrap() as f64;
    let mut rng = SeedStream::new(203).rng();
    let samples: Vec<_> = (0..1_000_000)
        .map(|_| {
            let p = haar_state(d, &mut rng).unwrap().projector();
            p.kronecker(&p) * Complex64::new(k, 0.0)
        })
        .collect();
    let pi = symmetric_projector(d, t).unwrap().map(|x| Complex64::new(x, 0.0));
    let z = max_entry_z(&samples, &pi);
    assert!(z <= 5.0, "max z {z}");
}

#[test]
fn snapshot_mean_is_choi() {
    let root = SeedStream::new(204);
    for (label, u) in [
        ("identity", UnitaryMatrix::identity(2).unwrap()),
        ("haar", haar_unitary(2, &mut root.child(99).rng()).unwrap()),
    ] {
        let dev = Device::new(DeviceLabel::A, u.clone());
        let peer = Device::new(DeviceLabel::B, u.clone());
        let samples: Vec<_> = (0..100_000u64)
            .map(|t| match run_shadow_round(&dev, &peer, 1, &root, t).unwrap().raw {
                RoundOutcome::Shadow { snapshot_a, .. } => snapshot_a.densify().unwrap(),
                _ => unreachable!(),
            })
            .collect();
        let z = max_entry_z(&samples, &choi_of_unitary(&u).unwrap());
        assert!(z <= 5.0, "{label}: max z {z}");
    }
}

fn snapshot_from_seed(d: usize, s: usize, seed: u64) -> dseu_core::symmetric::FactoredSnapshot {
    let mut rng = SeedStream::new(seed).rng();
    let phi = haar_state(d, &mut rng).unwrap();
    let psi = haar_state(d, &mut rng).unwrap();
    build_snapshot(phi, psi, s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn densified_snapshot_has_trace_d(d in 2usize..=3, s in 1usize..=8, seed in any::<u64>()) {
        let x = snapshot_from_seed(d, s, seed).densify().unwrap();
        prop_assert!((x.trace() - Complex64::new(d as f64, 0.0)).norm() < 1e-10);
        prop_assert!((x.adjoint() - &x).norm() < 1e-10);
    }

    #[test]
    fn factored_inner_matches_dense(d in 2usize..=3, s in 1usize..=8, a in any::<u64>(), b in any::<u64>()) {
        let x = snapshot_from_seed(d, s, a);
        let y = snapshot_from_seed(d, s, b);
        let dense = x.densify().unwrap().dotc(&y.densify().unwrap());
        let fast = snapshot_inner(&x, &y).unwrap();
        prop_assert!(dense.im.abs() < 1e-8 * dense.re.abs().max(1.0));
        prop_assert!((fast - dense.re).abs() <= 1e-8 * dense.re.abs().max(1.0));
    }
}
