//! Symmetric-subspace combinatorics, the symmetric collective measurement on
//! `T` copies of a pure state, and factored classical snapshots of a unitary
//! channel's Choi operator.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{check_dim, check_same_dim, Error, Result};
use crate::qcore::{gaussian_vector, PureState, UnitaryMatrix, NORM_TOL};

/// Largest `d^T` accepted by [`symmetric_projector`].
pub const PROJECTOR_MAX_SIZE: usize = 64;
/// Largest `d^2` accepted by [`choi_of_unitary`] and snapshot densification.
pub const CHOI_MAX_SIZE: usize = 4096;

/// Dimension of the symmetric subspace of `T` copies of a `d`-level system,
/// `C(d + T - 1, T)`, in exact integer arithmetic.
pub fn kappa(dim: usize, copies: usize) -> Result<u64> {
    check_dim(dim)?;
    check_copies(copies)?;
    let overflow = || Error::Overflow(format!("kappa(d={dim}, T={copies})"));
    let mut acc: u128 = 1;
    for i in 1..=copies as u128 {
        // acc = C(d - 1 + i, i) after this step; the division is exact.
        acc = acc
            .checked_mul(dim as u128 - 1 + i)
            .ok_or_else(overflow)?
            / i;
    }
    u64::try_from(acc).map_err(|_| overflow())
}

fn check_copies(copies: usize) -> Result<()> {
    if copies == 0 {
        Err(Error::InvalidArgument("copy count must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// One informative outcome of the symmetric collective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPovmOutcome {
    pub phi: PureState,
    pub copies: usize,
    /// `|<phi|input>|^2`, kept for diagnostics.
    pub overlap_sq: f64,
}

/// Measures `input^{(x) T}` with the continuous symmetric collective POVM
/// `{ kappa_T |phi><phi|^{(x) T} dphi } u { I - Pi_sym }`.
///
/// The outcome density relative to the Haar measure is
/// `kappa_T |<phi|input>|^{2T}`. Its overlap with the input is therefore
/// `Beta(T + 1, d - 1)` distributed, its phase along the input is uniform, and
/// its component orthogonal to the input is Haar in the complement. The
/// `I - Pi_sym` element has zero probability on symmetric product inputs.
pub fn sample_symmetric_povm<R: Rng + ?Sized>(
    input: &PureState,
    copies: usize,
    rng: &mut R,
) -> Result<SymmetricPovmOutcome> {
    check_copies(copies)?;
    let norm = input.amplitudes().norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidState { norm });
    }
    let dim = input.dim();
    let beta = Beta::new(copies as f64 + 1.0, dim as f64 - 1.0)
        .map_err(|e| Error::InvalidArgument(format!("overlap law: {e}")))?;
    let p: f64 = beta.sample(rng);
    let theta = rng.random::<f64>() * std::f64::consts::TAU;

    let psi = input.amplitudes();
    let perp = loop {
        let mut g = gaussian_vector(dim, rng);
        let along = psi.dotc(&g);
        g.axpy(-along, psi, Complex64::new(1.0, 0.0));
        let n = g.norm();
        // Measure-zero event; resample rather than divide by ~0.
        if n > 1e-8 {
            g.unscale_mut(n);
            break g;
        }
    };

    let along = Complex64::from_polar(p.sqrt(), theta);
    let across = Complex64::new((1.0 - p).max(0.0).sqrt(), 0.0);
    let amps: DVector<Complex64> = psi * along + perp * across;
    let phi = PureState::normalized(amps)?;
    let overlap_sq = phi.overlap_sq(input)?;
    debug_assert!((overlap_sq - p).abs() < 1e-9);
    Ok(SymmetricPovmOutcome {
        phi,
        copies,
        overlap_sq,
    })
}

/// Classical snapshot of a unitary channel, kept in factored form.
///
/// Stands for the `d^2 x d^2` operator
/// `[d(d+1)(d+s) |phi><phi| (x) (|psi><psi|)^T - (d+1+s) I (x) I] / s`,
/// where `psi` is the prepared input and `phi` the collective-measurement
/// outcome on `s` copies of the channel output. Its expectation is the Choi
/// operator of the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredSnapshot {
    phi: PureState,
    psi: PureState,
    copies: usize,
}

impl FactoredSnapshot {
    pub fn phi(&self) -> &PureState {
        &self.phi
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    /// `(A, B)` with `A = d(d+1)(d+s)` and `B = d+1+s`.
    fn coefficients(&self) -> (f64, f64) {
        let d = self.dim() as f64;
        let s = self.copies as f64;
        (d * (d + 1.0) * (d + s), d + 1.0 + s)
    }

    /// Dense `d^2 x d^2` matrix. Test oracle only; cost is `O(d^4)`.
    pub fn densify(&self) -> Result<DMatrix<Complex64>> {
        let d = self.dim();
        if d * d > CHOI_MAX_SIZE {
            return Err(Error::SizeLimit {
                what: "snapshot side d^2",
                size: d * d,
                limit: CHOI_MAX_SIZE,
            });
        }
        let (a, b) = self.coefficients();
        let s = self.copies as f64;
        let out = self.phi.projector();
        let reference = self.psi.conj().projector();
        let mut dense = out.kronecker(&reference) * Complex64::new(a / s, 0.0);
        for k in 0..d * d {
            dense[(k, k)] -= Complex64::new(b / s, 0.0);
        }
        Ok(dense)
    }
}

pub fn build_snapshot(phi: PureState, psi: PureState, copies: usize) -> Result<FactoredSnapshot> {
    check_same_dim(phi.dim(), psi.dim())?;
    check_copies(copies)?;
    Ok(FactoredSnapshot { phi, psi, copies })
}

/// `tr[X^dag Y]` in `O(d)` from the factors:
/// `[A^2 |<phi_X|phi_Y>|^2 |<psi_X|psi_Y>|^2 - 2AB + B^2 d^2] / s^2`.
pub fn snapshot_inner(x: &FactoredSnapshot, y: &FactoredSnapshot) -> Result<f64> {
    check_same_dim(x.dim(), y.dim())?;
    if x.copies != y.copies {
        return Err(Error::InvalidArgument(format!(
            "snapshot copy counts differ: {} vs {}",
            x.copies, y.copies
        )));
    }
    let (a, b) = x.coefficients();
    let d = x.dim() as f64;
    let s = x.copies as f64;
    let overlap = x.phi.overlap_sq(&y.phi)? * x.psi.overlap_sq(&y.psi)?;
    Ok((a * a * overlap - 2.0 * a * b + b * b * d * d) / (s * s))
}

/// `(1/T!) sum_pi P_pi` on `(C^d)^{(x) T}`.
pub fn symmetric_projector(dim: usize, copies: usize) -> Result<DMatrix<f64>> {
    check_dim(dim)?;
    check_copies(copies)?;
    let size = u32::try_from(copies)
        .ok()
        .and_then(|t| dim.checked_pow(t))
        .filter(|&n| n <= PROJECTOR_MAX_SIZE)
        .ok_or(Error::SizeLimit {
            what: "d^T",
            size: dim.saturating_pow(copies.min(u32::MAX as usize) as u32),
            limit: PROJECTOR_MAX_SIZE,
        })?;

    let perms: Vec<Vec<usize>> = (0..copies).permutations(copies).collect();
    let weight = 1.0 / perms.len() as f64;
    let mut proj = DMatrix::zeros(size, size);
    let mut digits = vec![0usize; copies];
    for col in 0..size {
        let mut rest = col;
        for slot in digits.iter_mut().rev() {
            *slot = rest % dim;
            rest /= dim;
        }
        for perm in &perms {
            let row = perm.iter().fold(0, |acc, &k| acc * dim + digits[k]);
            proj[(row, col)] += weight;
        }
    }
    Ok(proj)
}

/// Choi operator `(U (x) I)|Phi><Phi|(U (x) I)^dag` with unnormalized
/// `|Phi> = sum_i |ii>`; the first tensor factor is the channel output.
pub fn choi_of_unitary(u: &UnitaryMatrix) -> Result<DMatrix<Complex64>> {
    let d = u.dim();
    if d * d > CHOI_MAX_SIZE {
        return Err(Error::SizeLimit {
            what: "Choi side d^2",
            size: d * d,
            limit: CHOI_MAX_SIZE,
        });
    }
    let m = u.matrix();
    let v = DVector::from_fn(d * d, |k, _| m[(k / d, k % d)]);
    Ok(&v * v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{haar_state, haar_unitary, SeedStream};

    fn dense_inner(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> Complex64 {
        x.dotc(y)
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(2, 2).unwrap(), 3);
        assert_eq!(kappa(2, 1).unwrap(), 2);
        assert_eq!(kappa(4, 3).unwrap(), 20);
        assert_eq!(kappa(64, 1).unwrap(), 64);
        // C(65, 2) = 2080
        assert_eq!(kappa(64, 2).unwrap(), 2080);
    }

    #[test]
    fn kappa_overflow_is_reported() {
        assert!(matches!(kappa(64, 64), Err(Error::Overflow(_))));
        assert!(matches!(kappa(usize::MAX / 2, 3), Err(Error::Overflow(_))));
        assert!(kappa(1, 2).is_err());
        assert!(kappa(2, 0).is_err());
    }

    #[test]
    fn projector_small_cases() {
        let p = symmetric_projector(2, 1).unwrap();
        assert_eq!(p, DMatrix::identity(2, 2));
        for (d, t) in [(2, 2), (2, 3), (3, 2), (4, 3), (2, 6), (8, 2)] {
            let p = symmetric_projector(d, t).unwrap();
            assert!((p.trace() - kappa(d, t).unwrap() as f64).abs() < 1e-10, "d={d} T={t}");
            let sq = &p * &p;
            assert!((sq - &p).abs().max() < 1e-10, "idempotency d={d} T={t}");
            assert!((p.transpose() - &p).abs().max() < 1e-15);
        }
        assert!(matches!(
            symmetric_projector(2, 7),
            Err(Error::SizeLimit { .. })
        ));
        assert!(symmetric_projector(9, 2).is_err());
    }

    #[test]
    fn choi_of_identity() {
        let j = choi_of_unitary(&UnitaryMatrix::identity(2).unwrap()).unwrap();
        let phi = [1.0, 0.0, 0.0, 1.0];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(j[(r, c)], Complex64::new(phi[r] * phi[c], 0.0));
            }
        }
    }

    #[test]
    fn choi_trace_and_pairing() {
        let mut rng = SeedStream::new(5).rng();
        for d in [2, 3] {
            let u = haar_unitary(d, &mut rng).unwrap();
            let v = haar_unitary(d, &mut rng).unwrap();
            let ju = choi_of_unitary(&u).unwrap();
            let jv = choi_of_unitary(&v).unwrap();
            assert!((ju.trace() - Complex64::new(d as f64, 0.0)).norm() < 1e-12);
            let pairing = dense_inner(&ju, &jv);
            let expected = u.trace_inner(&v).unwrap().norm_sqr();
            assert!((pairing.re - expected).abs() < 1e-12);
            assert!(pairing.im.abs() < 1e-12);
        }
    }

    #[test]
    fn snapshot_identity_example() {
        let zero = PureState::basis(2, 0).unwrap();
        let x = build_snapshot(zero.clone(), zero, 1).unwrap();
        let dense = x.densify().unwrap();
        // 18 |00><00| - 4 I
        for r in 0..4 {
            for c in 0..4 {
                let mut want = if r == c { -4.0 } else { 0.0 };
                if r == 0 && c == 0 {
                    want += 18.0;
                }
                assert!((dense[(r, c)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        assert!((dense.trace().re - 2.0).abs() < 1e-12);
        // A = 18, B = 4: 324 - 144 + 16 * 4.
        assert!((snapshot_inner(&x, &x).unwrap() - 244.0).abs() < 1e-9);
        assert!((dense_inner(&dense, &dense).re - 244.0).abs() < 1e-9);
    }

    #[test]
    fn snapshot_orthogonal_outcomes() {
        let mut rng = SeedStream::new(9).rng();
        let x = build_snapshot(
            PureState::basis(2, 0).unwrap(),
            haar_state(2, &mut rng).unwrap(),
            1,
        )
        .unwrap();
        let y = build_snapshot(
            PureState::basis(2, 1).unwrap(),
            haar_state(2, &mut rng).unwrap(),
            1,
        )
        .unwrap();
        // Overlap term vanishes: -144 + 64.
        assert!((snapshot_inner(&x, &y).unwrap() + 80.0).abs() < 1e-9);
        let dense = dense_inner(&x.densify().unwrap(), &y.densify().unwrap());
        assert!((dense.re + 80.0).abs() < 1e-9);
    }

    #[test]
    fn snapshot_errors() {
        let a = PureState::basis(2, 0).unwrap();
        let b = PureState::basis(3, 0).unwrap();
        assert!(build_snapshot(a.clone(), b.clone(), 1).is_err());
        assert!(build_snapshot(a.clone(), a.clone(), 0).is_err());
        let x = build_snapshot(a.clone(), a.clone(), 1).unwrap();
        let y = build_snapshot(a.clone(), a.clone(), 2).unwrap();
        let z = build_snapshot(b.clone(), b, 1).unwrap();
        assert!(snapshot_inner(&x, &y).is_err());
        assert!(snapshot_inner(&x, &z).is_err());
    }

    #[test]
    fn povm_outcome_is_consistent() {
        let mut rng = SeedStream::new(2).rng();
        for d in [2, 3, 8] {
            let input = haar_state(d, &mut rng).unwrap();
            for t in [1, 4] {
                let out = sample_symmetric_povm(&input, t, &mut rng).unwrap();
                assert!((out.phi.amplitudes().norm() - 1.0).abs() < NORM_TOL);
                let ov = out.phi.overlap_sq(&input).unwrap();
                assert!((ov - out.overlap_sq).abs() < 1e-12);
                assert!((0.0..=1.0 + 1e-12).contains(&out.overlap_sq));
                assert_eq!(out.copies, t);
            }
        }
        let input = PureState::basis(2, 0).unwrap();
        assert!(sample_symmetric_povm(&input, 0, &mut rng).is_err());
    }
}
