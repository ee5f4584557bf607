use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{check_dim, check_same_dim, Error, Result};

/// Tolerance for normalization and unitarity checks.
pub const NORM_TOL: f64 = 1e-10;

/// Normalized pure state of a `d`-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<Complex64>,
}

impl PureState {
    /// Wraps `amps`, rejecting vectors whose norm is not 1 within [`NORM_TOL`].
    pub fn new(amps: DVector<Complex64>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState { norm });
        }
        Ok(Self { amps })
    }

    pub fn from_vec(amps: Vec<Complex64>) -> Result<Self> {
        Self::new(DVector::from_vec(amps))
    }

    /// Normalizes `amps` first. Fails on the zero vector.
    pub fn normalized(mut amps: DVector<Complex64>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState { norm });
        }
        amps.unscale_mut(norm);
        Ok(Self { amps })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub(crate) fn from_raw(amps: DVector<Complex64>) -> Self {
        debug_assert!((amps.norm() - 1.0).abs() <= NORM_TOL);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amps
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn overlap_sq(&self, other: &PureState) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// Entrywise complex conjugate, i.e. the state whose projector is the
    /// transpose of this one's.
    pub fn conj(&self) -> PureState {
        Self {
            amps: self.amps.map(|z| z.conj()),
        }
    }

    /// Dense projector `|self><self|`.
    pub fn projector(&self) -> nalgebra::DMatrix<Complex64> {
        &self.amps * self.amps.adjoint()
    }
}

/// `<phi|psi>` with conjugation on the first argument.
pub fn inner(phi: &PureState, psi: &PureState) -> Result<Complex64> {
    phi.inner(psi)
}
