// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense matrices serialised as row-major nested arrays.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows<E: serde::de::Error>(rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>, E> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(E::custom("ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub mod seq {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Vec<f64>>> = ms.iter().map(to_rows).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
        let raw: Vec<Vec<Vec<f64>>> = Vec::deserialize(d)?;
        raw.into_iter().map(from_rows).collect()
    }
}
