//! Serialization of nalgebra containers as nested `[re, im]` arrays.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};

pub fn vector<S: Serializer>(v: &DVector<C64>, s: S) -> Result<S::Ok, S::Error> {
    v.iter().copied().collect::<Vec<C64>>().serialize(s)
}

pub fn opt_vector<S: Serializer>(v: &Option<DVector<C64>>, s: S) -> Result<S::Ok, S::Error> {
    v.as_ref().map(|v| v.iter().copied().collect::<Vec<C64>>()).serialize(s)
}

pub fn matrix<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<C64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}
