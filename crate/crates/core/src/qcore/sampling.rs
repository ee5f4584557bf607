use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::state::PureState;
use super::unitary::UnitaryMatrix;
use crate::error::{check_dim, check_same_dim, Error, Result};

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub(crate) fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary.
///
/// QR-decomposes a complex Ginibre matrix and rotates column `j` of `Q` by the
/// phase of `R_jj`, which makes the result exactly Haar distributed.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    check_dim(dim)?;
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        if norm > 0.0 {
            let phase = rjj / norm;
            for z in q.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
    }
    Ok(UnitaryMatrix::from_raw(q))
}

/// Haar-random pure state: a normalized complex Gaussian vector, which has the
/// same law as the first column of a Haar unitary.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    check_dim(dim)?;
    PureState::normalized(gaussian_vector(dim, rng))
}

/// Outcome distribution `|<a|Q psi>|^2` over computational basis indices `a`.
pub fn born_probabilities(psi: &PureState, basis: &UnitaryMatrix) -> Result<Vec<f64>> {
    let rotated = basis.apply(psi)?;
    Ok(rotated.amplitudes().iter().map(|z| z.norm_sqr()).collect())
}

/// Measures `shots` independent copies of `Q psi` in the computational basis.
pub fn born_sample<R: Rng + ?Sized>(
    psi: &PureState,
    basis: &UnitaryMatrix,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_same_dim(basis.dim(), psi.dim())?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shot count must be at least 1".into()));
    }
    let probs = born_probabilities(psi, basis)?;
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| Error::InvalidArgument(format!("outcome distribution: {e}")))?;
    Ok((0..shots).map(|_| dist.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::SeedStream;
    use crate::qcore::state::NORM_TOL;
    use crate::qcore::unitary::unitarity_deviation;

    #[test]
    fn rejects_small_dimension() {
        let mut rng = SeedStream::new(1).rng();
        assert_eq!(
            haar_unitary(1, &mut rng).unwrap_err(),
            Error::InvalidDimension { dim: 1 }
        );
        assert!(haar_state(0, &mut rng).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = SeedStream::new(3).rng();
        for d in [2, 3, 8, 64] {
            let u = haar_unitary(d, &mut rng).unwrap();
            assert!(unitarity_deviation(u.matrix()) <= NORM_TOL, "d={d}");
        }
    }

    #[test]
    fn haar_sampling_is_reproducible() {
        let s = SeedStream::new(11).derive(&[4, 5]);
        let a = haar_unitary(4, &mut s.rng()).unwrap();
        let b = haar_unitary(4, &mut s.rng()).unwrap();
        assert_eq!(a, b);
        let x = haar_state(4, &mut s.rng()).unwrap();
        let y = haar_state(4, &mut s.rng()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn born_sample_deterministic_outcome() {
        let zero = PureState::basis(2, 0).unwrap();
        let id = UnitaryMatrix::identity(2).unwrap();
        let mut rng = SeedStream::new(0).rng();
        assert_eq!(born_sample(&zero, &id, 5, &mut rng).unwrap(), vec![0; 5]);
    }

    #[test]
    fn born_sample_errors() {
        let zero = PureState::basis(2, 0).unwrap();
        let id = UnitaryMatrix::identity(2).unwrap();
        let mut rng = SeedStream::new(0).rng();
        assert!(matches!(
            born_sample(&zero, &id, 0, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
        let id3 = UnitaryMatrix::identity(3).unwrap();
        assert!(matches!(
            born_sample(&zero, &id3, 1, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
