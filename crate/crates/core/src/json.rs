//! JSON exchange format for matrices:
//! `{"rows": n, "cols": m, "entries": [[re, im], ...]}` in row-major order.
//!
//! Non-finite entries are rejected on both read and write.

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(S::Error::custom("matrix contains non-finite entries"));
        }
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            entries: self.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        let data = raw.entries.iter().map(|[r, i]| C64::new(*r, *i)).collect();
        CMatrix::from_row_major(raw.rows, raw.cols, data).map_err(D::Error::custom)
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Result<String> {
    Ok(serde_json::to_string(m)?)
}

pub fn matrix_from_json(s: &str) -> Result<CMatrix> {
    serde_json::from_str(s).map_err(Error::from)
}
