//! Serde adaptors writing matrices as arrays of rows and vectors as flat arrays.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Some(DMatrix::from_row_slice(rows.len(), cols, &flat))
}

pub mod rows {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, ser: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(de)?;
        from_rows(&rows).ok_or_else(|| D::Error::custom("ragged matrix rows"))
    }
}

pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<f64>, ser: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(de)?))
    }
}

pub mod vectors {
    use super::*;

    pub fn serialize<S: Serializer>(vs: &[DVector<f64>], ser: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        rows.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<DVector<f64>>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(de)?;
        Ok(rows.into_iter().map(DVector::from_vec).collect())
    }
}
