//! JSON encoding of complex matrices: a row-major array of rows whose entries
//! are `[re, im]` pairs of finite doubles.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Wire form of a matrix; the shape is implicit.
pub type EncodedMatrix = Vec<Vec<[f64; 2]>>;

pub fn encode(m: &ComplexMatrix) -> EncodedMatrix {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Decodes a matrix that must be exactly `rows x cols`. `what` names the
/// matrix in error locations (for example `"states[2]"`).
pub fn decode(enc: &EncodedMatrix, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix> {
    if enc.len() != rows {
        return Err(Error::parse(
            what,
            format!("{} rows ≠ expected {rows}", enc.len()),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (r, row) in enc.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::parse(
                what,
                format!("row {r} length {} ≠ dim {cols}", row.len()),
            ));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::parse(
                    format!("{what}[{r}][{c}]"),
                    "entry is not finite",
                ));
            }
            data.push(Complex64::new(re, im));
        }
    }
    ComplexMatrix::from_vec(rows, cols, data)
}

pub fn decode_square(enc: &EncodedMatrix, dim: usize, what: &str) -> Result<ComplexMatrix> {
    decode(enc, dim, dim, what)
}

/// Shape of an encoded matrix, rejecting ragged rows.
pub fn shape(enc: &EncodedMatrix, what: &str) -> Result<(usize, usize)> {
    let cols = enc.first().map_or(0, Vec::len);
    for (r, row) in enc.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::parse(
                what,
                format!("row {r} length {} ≠ {cols}", row.len()),
            ));
        }
    }
    Ok((enc.len(), cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_row_is_located() {
        let enc: EncodedMatrix = vec![
            vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
        ];
        let err = decode_square(&enc, 3, "states[0]").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1 length 2 ≠ dim 3"), "{msg}");
        assert!(msg.contains("states[0]"));
    }

    #[test]
    fn encode_decode_identity() {
        let m = ComplexMatrix::from_rows(&[vec![
            Complex64::new(0.1, -0.2),
            Complex64::new(1.0 / 3.0, 0.0),
        ]])
        .unwrap();
        let back = decode(&encode(&m), 1, 2, "m").unwrap();
        assert_eq!(back, m);
    }
}
