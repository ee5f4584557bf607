//! JSON file format for unitaries:
//! `{"dim": d, "re": [[...], ...], "im": [[...], ...]}`, row-major.
//!
//! Floats are written in shortest round-trip form, so a written matrix reads
//! back bit-identically.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::UnitaryMatrix;

/// Unitarity tolerance applied to matrices read from files.
pub const FILE_UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&UnitaryMatrix> for UnitaryFile {
    fn from(u: &UnitaryMatrix) -> Self {
        let m = u.matrix();
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            dim: u.dim(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl UnitaryFile {
    pub fn to_unitary(&self) -> Result<UnitaryMatrix> {
        let d = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::InvalidArgument(format!(
                "unitary file declares dim {d} but re/im are not {d}x{d}"
            )));
        }
        let m = DMatrix::from_fn(d, d, |r, c| Complex64::new(self.re[r][c], self.im[r][c]));
        UnitaryMatrix::with_tolerance(m, FILE_UNITARITY_TOL)
    }
}

pub fn to_json(u: &UnitaryMatrix) -> String {
    serde_json::to_string_pretty(&UnitaryFile::from(u)).expect("plain data serializes")
}

pub fn from_json(text: &str) -> Result<UnitaryMatrix> {
    let file: UnitaryFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("malformed unitary file: {e}")))?;
    file.to_unitary()
}

pub fn write_unitary(path: impl AsRef<Path>, u: &UnitaryMatrix) -> std::io::Result<()> {
    let mut text = to_json(u);
    text.push('\n');
    fs::write(path, text)
}

/// Reads and validates a unitary file. I/O failures are reported as
/// invalid-argument errors naming the path.
pub fn read_unitary(path: impl AsRef<Path>) -> Result<UnitaryMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| {
        Error::InvalidArgument(format!("cannot read unitary file {}: {e}", path.display()))
    })?;
    from_json(&text)
}
