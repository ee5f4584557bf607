use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{PureState, NORM_TOL};
use crate::error::{check_dim, check_same_dim, Error, Result};

/// Dense `d x d` unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: DMatrix<Complex64>,
}

/// Largest entry magnitude of `M^dag M - I`.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    gram.iter()
        .enumerate()
        .map(|(k, z)| {
            let (i, j) = (k % gram.nrows(), k / gram.nrows());
            let target = if i == j { 1.0 } else { 0.0 };
            (z - Complex64::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max)
}

impl UnitaryMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(entries, NORM_TOL)
    }

    /// Like [`UnitaryMatrix::new`] with a caller-chosen unitarity tolerance.
    pub fn with_tolerance(entries: DMatrix<Complex64>, tolerance: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidArgument(format!(
                "unitary must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_dim(entries.nrows())?;
        let deviation = unitarity_deviation(&entries);
        if deviation.is_nan() || deviation > tolerance {
            return Err(Error::NotUnitary {
                deviation,
                tolerance,
            });
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_raw(entries: DMatrix<Complex64>) -> Self {
        debug_assert!(unitarity_deviation(&entries) <= NORM_TOL);
        Self { entries }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            entries: DMatrix::identity(dim, dim),
        })
    }

    pub fn pauli_z() -> Self {
        Self {
            entries: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ])),
        }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            entries: DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(h, 0.0),
                    Complex64::new(h, 0.0),
                    Complex64::new(h, 0.0),
                    Complex64::new(-h, 0.0),
                ],
            ),
        }
    }

    /// Diagonal unitary with the given phases (radians).
    pub fn diagonal_phases(phases: &[f64]) -> Result<Self> {
        check_dim(phases.len())?;
        let diag = nalgebra::DVector::from_iterator(
            phases.len(),
            phases.iter().map(|&t| Complex64::from_polar(1.0, t)),
        );
        Ok(Self {
            entries: DMatrix::from_diagonal(&diag),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    /// `self * other`.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries * &other.entries,
        })
    }

    /// `e^{i theta} * self`.
    pub fn with_global_phase(&self, theta: f64) -> UnitaryMatrix {
        let phase = Complex64::from_polar(1.0, theta);
        Self {
            entries: self.entries.map(|z| z * phase),
        }
    }

    /// Returns `U psi`.
    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        check_same_dim(self.dim(), psi.dim())?;
        Ok(PureState::from_raw(&self.entries * psi.amplitudes()))
    }

    /// `tr[self^dag other]`.
    pub fn trace_inner(&self, other: &UnitaryMatrix) -> Result<Complex64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(self.entries.dotc(&other.entries))
    }
}

/// Returns `U psi`.
pub fn apply(u: &UnitaryMatrix, psi: &PureState) -> Result<PureState> {
    u.apply(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn rejects_non_unitary() {
        let m = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(
            UnitaryMatrix::new(m).unwrap_err(),
            Error::NotUnitary { .. }
        ));
        let rect = DMatrix::<Complex64>::zeros(2, 3);
        assert!(UnitaryMatrix::new(rect).is_err());
        assert!(UnitaryMatrix::identity(1).is_err());
    }

    #[test]
    fn apply_examples() {
        let psi = PureState::from_vec(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ])
        .unwrap();
        let id = UnitaryMatrix::identity(2).unwrap();
        assert_eq!(apply(&id, &psi).unwrap(), psi);

        let plus = PureState::from_vec(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let minus = UnitaryMatrix::pauli_z().apply(&plus).unwrap();
        assert!((minus.amplitudes()[0] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((minus.amplitudes()[1] - Complex64::new(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);

        let wrong = PureState::basis(3, 0).unwrap();
        assert!(id.apply(&wrong).is_err());
    }

    #[test]
    fn trace_inner_matches_definition() {
        let z = UnitaryMatrix::pauli_z();
        let id = UnitaryMatrix::identity(2).unwrap();
        assert!(id.trace_inner(&z).unwrap().norm() < 1e-15);
        let t = z.trace_inner(&z).unwrap();
        assert!((t - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let h = UnitaryMatrix::hadamard();
        let expected = (h.adjoint().compose(&z).unwrap()).matrix().trace();
        assert!((h.trace_inner(&z).unwrap() - expected).norm() < 1e-15);
    }
}
