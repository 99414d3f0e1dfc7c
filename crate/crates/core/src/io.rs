//! Wire formats shared by the modules: `[re, im]` pairs and CSV tables.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, CVector, Real};

/// Complex number as a `[re, im]` pair.
pub type Pair = [f64; 2];

pub fn to_pair<T: Real>(z: Complex<T>) -> Pair {
    [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
}

pub fn from_pair<T: Real>(p: Pair) -> Complex<T> {
    Complex::new(T::lit(p[0]), T::lit(p[1]))
}

pub fn vector_to_pairs<T: Real>(v: &CVector<T>) -> Vec<Pair> {
    v.iter().map(|z| to_pair(*z)).collect()
}

pub fn vector_from_pairs<T: Real>(v: &[Pair]) -> CVector<T> {
    CVector::from_iterator(v.len(), v.iter().map(|p| from_pair(*p)))
}

/// Row-major nested `[re, im]` arrays.
pub fn matrix_to_pairs<T: Real>(m: &CMatrix<T>) -> Vec<Vec<Pair>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect()).collect()
}

pub fn matrix_from_pairs<T: Real>(rows: &[Vec<Pair>]) -> Result<CMatrix<T>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: bad.len() });
    }
    Ok(CMatrix::from_fn(n, m, |i, j| from_pair(rows[i][j])))
}

/// Matrix serialized as nested `[re, im]` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixPairs(pub Vec<Vec<Pair>>);

/// Serializes records into a CSV document with a header row.
pub fn to_csv<R: Serialize>(records: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn matrix_pairs_round_trip() {
        let m = CMatrix::from_row_slice(2, 2, &[cx(1.0, -2.0), cx(0.5, 0.0), cx(3.0, 1e-9), cx(-4.0, 2.5)]);
        let back: CMatrix<f64> = matrix_from_pairs(&matrix_to_pairs(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[1.0, 0.0]]];
        assert!(matrix_from_pairs::<f64>(&rows).is_err());
    }

    #[test]
    fn csv_has_header() {
        #[derive(Serialize)]
        struct Row {
            a: u32,
            b: f64,
        }
        let s = to_csv(&[Row { a: 1, b: 0.5 }]).unwrap();
        assert_eq!(s, "a,b\n1,0.5\n");
    }
}
