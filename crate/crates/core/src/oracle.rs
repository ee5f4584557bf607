//! Closed-form ground truth for the similarity and for every estimator's
//! expectation, plus Monte Carlo checks of the Haar moment identities they
//! rest on.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_same_dim, Error, Result};
use crate::qcore::{haar_unitary, UnitaryMatrix};
use crate::stats::{summarize, z_score};

/// `|tr[U^dag V]|^2 / d^2`.
pub fn exact_similarity(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    let d = u.dim() as f64;
    Ok(u.trace_inner(v)?.norm_sqr() / (d * d))
}

/// `E_psi |<psi|U^dag V|psi>|^2 = (|tr[U^dag V]|^2 + d) / (d(d+1))` over Haar
/// random `psi`.
pub fn expected_f_psi(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    let d = u.dim() as f64;
    let tr2 = u.trace_inner(v)?.norm_sqr();
    Ok((tr2 + d) / (d * (d + 1.0)))
}

/// Expected collision statistic of the incoherent protocol,
/// `(1 + E f_psi) / (d + 1)`. Independent of the shot count.
pub fn expected_g(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    let d = u.dim() as f64;
    Ok((1.0 + expected_f_psi(u, v)?) / (d + 1.0))
}

/// Expected outcome overlap of the coherent protocol with `copies` copies:
/// `(d+2T)/(d+T)^2 + T^2 (|tr[U^dag V]|^2 + d) / (d(d+1)(d+T)^2)`.
pub fn expected_f_coherent(u: &UnitaryMatrix, v: &UnitaryMatrix, copies: usize) -> Result<f64> {
    if copies == 0 {
        return Err(Error::InvalidArgument("copy count must be at least 1".into()));
    }
    let d = u.dim() as f64;
    let t = copies as f64;
    let tr2 = u.trace_inner(v)?.norm_sqr();
    let denom = (d + t).powi(2);
    Ok((d + 2.0 * t) / denom + t * t * (tr2 + d) / (d * (d + 1.0) * denom))
}

/// Expected shadow estimate. The snapshot pairing is unbiased for the
/// similarity, so this equals [`exact_similarity`].
pub fn expected_gamma(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    exact_similarity(u, v)
}

/// `E_psi |<psi|U^dag V|psi>|^2` by direct Monte Carlo over Haar states.
pub fn sampled_f_psi<R: Rng + ?Sized>(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    samples: usize,
    rng: &mut R,
) -> Result<crate::stats::Summary> {
    check_same_dim(u.dim(), v.dim())?;
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let psi = crate::qcore::haar_state(u.dim(), rng)?;
        values.push(u.apply(&psi)?.overlap_sq(&v.apply(&psi)?)?);
    }
    Ok(summarize(values))
}

/// Outcome of comparing a Monte Carlo estimate against a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub quantity: String,
    pub exact: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub z_score: f64,
}

impl MomentReport {
    pub fn new(quantity: impl Into<String>, exact: f64, empirical: f64, std_error: f64) -> Self {
        Self {
            quantity: quantity.into(),
            exact,
            empirical,
            std_error,
            z_score: z_score(empirical, exact, std_error),
        }
    }

    pub fn passes(&self, max_abs_z: f64) -> bool {
        self.z_score.abs() <= max_abs_z
    }
}

/// Swap operator on `C^d (x) C^d`.
pub fn swap_operator(dim: usize) -> DMatrix<Complex64> {
    let n = dim * dim;
    let mut f = DMatrix::zeros(n, n);
    for i in 0..dim {
        for j in 0..dim {
            f[(j * dim + i, i * dim + j)] = Complex64::new(1.0, 0.0);
        }
    }
    f
}

/// Largest `d` accepted by the twirl checks.
pub const TWIRL_MAX_DIM: usize = 8;

fn twirl_dim(order: usize, a: &DMatrix<Complex64>) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("twirled operator must be square".into()));
    }
    let n = a.nrows();
    let dim = match order {
        1 => n,
        2 => {
            let d = (n as f64).sqrt().round() as usize;
            if d * d != n {
                return Err(Error::InvalidArgument(format!(
                    "order-2 twirl needs a d^2 x d^2 operator, got side {n}"
                )));
            }
            d
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "twirl order must be 1 or 2, got {order}"
            )))
        }
    };
    if dim > TWIRL_MAX_DIM {
        return Err(Error::SizeLimit {
            what: "twirl dimension",
            size: dim,
            limit: TWIRL_MAX_DIM,
        });
    }
    crate::error::check_dim(dim)?;
    Ok(dim)
}

/// Closed-form Haar twirl `E_U U^{(x)k} A U^{dag (x)k}` for `k = 1, 2`:
/// `tr[A]/d I` and
/// `[(d tr B - tr FB) I + (d tr FB - tr B) F] / (d(d^2 - 1))`.
pub fn twirl_exact(order: usize, a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let dim = twirl_dim(order, a)?;
    let d = dim as f64;
    if order == 1 {
        return Ok(DMatrix::identity(dim, dim) * (a.trace() / d));
    }
    let f = swap_operator(dim);
    let tr = a.trace();
    let tr_f = (&f * a).trace();
    let denom = d * (d * d - 1.0);
    let c_id = (tr * d - tr_f) / denom;
    let c_swap = (tr_f * d - tr) / denom;
    Ok(DMatrix::identity(dim * dim, dim * dim) * c_id + f * c_swap)
}

/// Monte Carlo check of [`twirl_exact`]: averages `U^{(x)k} A U^{dag (x)k}`
/// over `samples` Haar unitaries and reports the entry (real or imaginary
/// part) with the largest `|z|`.
/// Floor on the standard error of entries that vanish identically, so
/// round-off noise does not produce large z-scores.
const ROUNDOFF_SE: f64 = 1e-12;

pub fn haar_twirl_check<R: Rng + ?Sized>(
    order: usize,
    a: &DMatrix<Complex64>,
    samples: usize,
    rng: &mut R,
) -> Result<MomentReport> {
    let dim = twirl_dim(order, a)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("twirl check needs at least 2 samples".into()));
    }
    let exact = twirl_exact(order, a)?;
    let n = a.nrows();
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    let mut sum_sq = DMatrix::<Complex64>::zeros(n, n);
    for _ in 0..samples {
        let u = haar_unitary(dim, rng)?;
        let big = if order == 1 {
            u.matrix().clone()
        } else {
            u.matrix().kronecker(u.matrix())
        };
        let twirled = &big * a * big.adjoint();
        sum += &twirled;
        sum_sq += twirled.map(|z| Complex64::new(z.re * z.re, z.im * z.im));
    }
    let count = samples as f64;
    let mut worst: Option<MomentReport> = None;
    for r in 0..n {
        for c in 0..n {
            let mean = sum[(r, c)] / count;
            let parts = [
                ("re", mean.re, sum_sq[(r, c)].re, exact[(r, c)].re),
                ("im", mean.im, sum_sq[(r, c)].im, exact[(r, c)].im),
            ];
            for (part, m, sq, want) in parts {
                let var = ((sq - count * m * m) / (count - 1.0)).max(0.0);
                let report = MomentReport::new(
                    format!("twirl{order}[{r},{c}].{part}"),
                    want,
                    m,
                    (var / count).sqrt().max(ROUNDOFF_SE),
                );
                if worst
                    .as_ref()
                    .is_none_or(|w| report.z_score.abs() > w.z_score.abs())
                {
                    worst = Some(report);
                }
            }
        }
    }
    Ok(worst.expect("non-empty operator"))
}

/// Checks that the three estimators' expectation formulas collapse to the
/// exact similarity for one unitary pair. Returns the largest absolute
/// deviation over the requested copy counts.
pub fn identity_chain_deviation(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    copies: &[usize],
) -> Result<f64> {
    let d = u.dim();
    let exact = exact_similarity(u, v)?;
    let mut worst = (crate::estimators::omega(expected_g(u, v)?, d)? - exact).abs();
    worst = worst.max((expected_gamma(u, v)? - exact).abs());
    for &t in copies {
        let via_chi = crate::estimators::chi(expected_f_coherent(u, v, t)?, t, d)?;
        worst = worst.max((via_chi - exact).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::SeedStream;

    #[test]
    fn similarity_examples() {
        let id = UnitaryMatrix::identity(2).unwrap();
        let z = UnitaryMatrix::pauli_z();
        assert_eq!(exact_similarity(&id, &id).unwrap(), 1.0);
        assert_eq!(exact_similarity(&id, &z).unwrap(), 0.0);
        let u = haar_unitary(5, &mut SeedStream::new(1).rng()).unwrap();
        assert!((exact_similarity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert!(exact_similarity(&id, &UnitaryMatrix::identity(3).unwrap()).is_err());
    }

    #[test]
    fn expectation_examples() {
        let id = UnitaryMatrix::identity(2).unwrap();
        let z = UnitaryMatrix::pauli_z();
        assert!((expected_f_psi(&id, &id).unwrap() - 1.0).abs() < 1e-15);
        assert!((expected_f_psi(&id, &z).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((expected_g(&id, &id).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((expected_g(&id, &z).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!((expected_f_coherent(&id, &id, 2).unwrap() - 5.0 / 8.0).abs() < 1e-15);
        assert_eq!(expected_gamma(&id, &id).unwrap(), 1.0);
        assert_eq!(expected_gamma(&id, &z).unwrap(), 0.0);
        assert!(expected_f_coherent(&id, &id, 0).is_err());
    }

    #[test]
    fn f_psi_lower_bound_and_large_copy_limit() {
        let mut rng = SeedStream::new(2).rng();
        for d in [2, 3, 6] {
            let u = haar_unitary(d, &mut rng).unwrap();
            let v = haar_unitary(d, &mut rng).unwrap();
            let f = expected_f_psi(&u, &v).unwrap();
            assert!(f >= 1.0 / (d as f64 + 1.0));
            let far = expected_f_coherent(&u, &v, 1 << 24).unwrap();
            assert!((far - f).abs() < 1e-6, "d={d}: {far} vs {f}");
        }
    }

    #[test]
    fn twirl_fixed_points() {
        for d in [2, 3] {
            let id = DMatrix::<Complex64>::identity(d * d, d * d);
            let t = twirl_exact(2, &id).unwrap();
            assert!((t - &id).norm() < 1e-12);
            let f = swap_operator(d);
            let t = twirl_exact(2, &f).unwrap();
            assert!((t - &f).norm() < 1e-12);
        }
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        let t = twirl_exact(1, &a).unwrap();
        assert!((t - DMatrix::identity(2, 2) * Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn twirl_argument_checks() {
        let a = DMatrix::<Complex64>::identity(3, 3);
        assert!(twirl_exact(2, &a).is_err());
        assert!(twirl_exact(3, &a).is_err());
        let big = DMatrix::<Complex64>::identity(9, 9);
        assert!(matches!(twirl_exact(1, &big), Err(Error::SizeLimit { .. })));
    }
}
