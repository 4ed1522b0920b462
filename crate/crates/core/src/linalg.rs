//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `exp(2 pi i k / m)`, with `k` reduced first to keep the angle small.
pub fn root_of_unity(k: i64, m: u64) -> Complex64 {
    let k = k.rem_euclid(m as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / m as f64)
}

/// Largest entry modulus of `M M^H - I`.
pub fn unitarity_defect(m: &CMat) -> f64 {
    let prod = m * m.adjoint();
    max_abs(&(prod - CMat::identity(m.nrows(), m.nrows())))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-major `vec`, as used for the stacked received signal.
pub fn vec_cols(m: &CMat) -> Vec<Complex64> {
    m.iter().copied().collect()
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Row-major rows of `[re, im]` pairs.
pub fn to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidDimensions("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Serde adapter storing a complex matrix as row-major `[re, im]` pairs.
pub mod serde_cmat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Plain-text matrix dump, 4 decimals, one row per line.
pub fn format_matrix(m: &CMat) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[(i, j)];
                if z.im.abs() < 5e-5 {
                    format!("{:>9.4}", z.re)
                } else {
                    format!("{:>9.4}{:+.4}i", z.re, z.im)
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
