//! Code matrices, shaping matrices and code variants.
//!
//! Information vectors are layer-major: entries `j*n .. (j+1)*n` are the
//! coefficients `f_j` of layer `j`, which is spread by `Gamma^j`.

mod constellation;
mod spec;

pub use constellation::{Constellation, ConstellationTag};
pub use spec::{CodeMatrix, CodeSpec, SpecFile, Variant};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, ONE, ZERO};

/// Companion-like matrix with `Gamma[0][n-1] = gamma` and ones on the
/// subdiagonal, so `Gamma^n = gamma I`.
pub fn gamma_matrix(gamma: Complex64, n: usize) -> CMat {
    let mut g = CMat::zeros(n, n);
    if n == 0 {
        return g;
    }
    g[(0, n - 1)] = gamma;
    for i in 1..n {
        g[(i, i - 1)] = ONE;
    }
    g
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::WrongLength { expected, got });
    }
    Ok(())
}

/// Row vector `f G`.
pub fn embed(generator: &CMat, f: &[Complex64]) -> Vec<Complex64> {
    let n = generator.nrows();
    (0..n).map(|c| (0..n).map(|i| f[i] * generator[(i, c)]).sum()).collect()
}

/// `sum_j Gamma^j diag(f_j G)` over however many layers `f` holds.
///
/// Entry `(i, c)` comes from layer `(i - c) mod n`, with a factor `gamma`
/// above the diagonal.
pub fn encode_layers(generator: &CMat, gamma: Complex64, f: &[Complex64]) -> Result<CMat> {
    let n = generator.nrows();
    if n == 0 || !f.len().is_multiple_of(n) || f.len() > n * n {
        return Err(Error::WrongLength { expected: n * n, got: f.len() });
    }
    let layers: Vec<Vec<Complex64>> = f.chunks(n).map(|fj| embed(generator, fj)).collect();
    Ok(CMat::from_fn(n, n, |i, c| {
        let j = (i + n - c) % n;
        match layers.get(j) {
            Some(l) if i < c => gamma * l[c],
            Some(l) => l[c],
            None => ZERO,
        }
    }))
}

/// Full-rate codeword from `n^2` symbols.
pub fn encode_full(generator: &CMat, gamma: Complex64, f: &[Complex64]) -> Result<CMat> {
    let n = generator.nrows();
    check_len(n * n, f.len())?;
    encode_layers(generator, gamma, f)
}

/// `diag(f G)` from `n` symbols.
pub fn diagonal_codeword(generator: &CMat, f: &[Complex64]) -> Result<CMat> {
    check_len(generator.nrows(), f.len())?;
    Ok(CMat::from_diagonal(&nalgebra::DVector::from_vec(embed(generator, f))))
}

/// `sum_k s_k Gamma^k` from `n` symbols.
pub fn integral_restriction(gamma: Complex64, n: usize, s: &[Complex64]) -> Result<CMat> {
    check_len(n, s.len())?;
    Ok(CMat::from_fn(n, n, |i, c| {
        let k = (i + n - c) % n;
        if i < c {
            gamma * s[k]
        } else {
            s[k]
        }
    }))
}

/// First `k` layers only, `k n` symbols.
pub fn layered_codeword(generator: &CMat, gamma: Complex64, k: usize, f: &[Complex64]) -> Result<CMat> {
    let n = generator.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidDimensions(format!("layer count {k} outside 1..={n}")));
    }
    check_len(k * n, f.len())?;
    encode_layers(generator, gamma, f)
}

/// All `n` layers, each carrying only its first `nr` coefficients
/// (`sum_j Gamma^j diag(f_j T G)` with `T` selecting `nr` entries).
/// `f` holds `nr` symbols per layer.
pub fn masked_layers_codeword(generator: &CMat, gamma: Complex64, nr: usize, f: &[Complex64]) -> Result<CMat> {
    let n = generator.nrows();
    if nr == 0 || nr > n {
        return Err(Error::InvalidDimensions(format!("selection size {nr} outside 1..={n}")));
    }
    check_len(n * nr, f.len())?;
    let mut padded = vec![ZERO; n * n];
    for (j, fj) in f.chunks(nr).enumerate() {
        padded[j * n..j * n + nr].copy_from_slice(fj);
    }
    encode_layers(generator, gamma, &padded)
}

/// Keeps the first `rows` rows of a square codeword.
pub fn truncate_rows(x: &CMat, rows: usize) -> Result<CMat> {
    if rows == 0 || rows > x.nrows() {
        return Err(Error::InvalidDimensions(format!("cannot keep {rows} of {} rows", x.nrows())));
    }
    Ok(x.rows(0, rows).into_owned())
}

/// Concatenates codewords left to right.
pub fn stack_horizontal(blocks: &[CMat]) -> Result<CMat> {
    let first = blocks.first().ok_or_else(|| Error::InvalidDimensions("nothing to stack".into()))?;
    let rows = first.nrows();
    if blocks.iter().any(|b| b.nrows() != rows) {
        return Err(Error::InvalidDimensions("blocks differ in row count".into()));
    }
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    Ok(out)
}

/// Layer-by-layer vectorization: block `j` lists `X[(c + j) mod n][c]` for
/// `c = 0..n`, the entries layer `j` occupies.
pub fn vectorize_layers(x: &CMat) -> Vec<Complex64> {
    let n = x.nrows();
    (0..n).flat_map(|j| (0..n).map(move |c| x[((c + j) % n, c)])).collect()
}

/// Block-diagonal `R_v = diag(G, G Gamma^(1), ..., G Gamma^(n-1))` where
/// `Gamma^(k)` is diagonal with `k` trailing `gamma` entries, so that
/// `vectorize_layers(X) = f R_v`.
pub fn vectorization_matrix(generator: &CMat, gamma: Complex64) -> CMat {
    let n = generator.nrows();
    let mut rv = CMat::zeros(n * n, n * n);
    for j in 0..n {
        for i in 0..n {
            for c in 0..n {
                let scale = if c >= n - j { gamma } else { ONE };
                rv[(j * n + i, j * n + c)] = generator[(i, c)] * scale;
            }
        }
    }
    rv
}

/// `[[Re R, Im R], [-Im R, Re R]]`, the real form of `v -> v R` on
/// `[Re v, Im v]`.
pub fn real_stacking(rv: &CMat) -> nalgebra::DMatrix<f64> {
    let (r, c) = rv.shape();
    nalgebra::DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = rv[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => z.im,
            (false, true) => -z.im,
        }
    })
}

/// Dispersion matrices: entry `j` is the `n^2 x n` stack of
/// `Gamma^j diag(G row i)` over `i`, i.e. `A_u` for `u = n - j`.
pub fn ld_matrices(generator: &CMat, gamma: Complex64) -> Vec<CMat> {
    let n = generator.nrows();
    let g = gamma_matrix(gamma, n);
    let mut power = CMat::identity(n, n);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a = CMat::zeros(n * n, n);
        for i in 0..n {
            let d = CMat::from_diagonal(&generator.row(i).transpose());
            a.view_mut((i * n, 0), (n, n)).copy_from(&(&power * d));
        }
        out.push(a);
        power = &g * power;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::{pow2_lattice, qam2_alt_generator};
    use crate::linalg::{max_abs, root_of_unity, unitarity_defect};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gamma_2x2() -> Complex64 {
        c(2.0, 1.0) / c(1.0, 2.0)
    }

    #[test]
    fn gamma_matrix_powers() {
        let g = gamma_2x2();
        let m = gamma_matrix(g, 2);
        assert_eq!(m, CMat::from_row_slice(2, 2, &[ZERO, g, ONE, ZERO]));
        let g5 = c(3.0, 2.0) / c(3.0, -2.0);
        let p = gamma_matrix(g5, 5).pow(5);
        assert!(max_abs(&(p - CMat::identity(5, 5) * g5)) < 1e-12);
        let perm = gamma_matrix(ONE, 4).pow(4);
        assert!(max_abs(&(perm - CMat::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn two_by_two_matches_closed_form() {
        let g = qam2_alt_generator().entries;
        let gam = gamma_2x2();
        let f = [c(1.0, -1.0), c(3.0, 1.0), c(-1.0, -3.0), c(1.0, 1.0)];
        let x = encode_full(&g, gam, &f).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (w3, w7) = (root_of_unity(3, 8), root_of_unity(7, 8));
        let expected = CMat::from_row_slice(
            2,
            2,
            &[(f[0] + f[1] * w3) * h, gam * (f[2] + f[3] * w7) * h, (f[2] + f[3] * w3) * h, (f[0] + f[1] * w7) * h],
        );
        assert!(max_abs(&(x - expected)) < 1e-12);
    }

    #[test]
    fn zero_and_basis_inputs() {
        let g = pow2_lattice(1).entries;
        assert_eq!(encode_full(&g, gamma_2x2(), &[ZERO; 4]).unwrap(), CMat::zeros(2, 2));
        let x = encode_full(&g, gamma_2x2(), &[ONE, ZERO, ZERO, ZERO]).unwrap();
        let expected = CMat::from_diagonal(&g.row(0).transpose());
        assert!(max_abs(&(x - expected)) < 1e-15);
        assert_eq!(encode_full(&g, ONE, &[ONE; 3]), Err(Error::WrongLength { expected: 4, got: 3 }));
    }

    #[test]
    fn vectorization_two_by_two() {
        let g = qam2_alt_generator().entries;
        let gam = gamma_2x2();
        let rv = vectorization_matrix(&g, gam);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (w3, w7) = (root_of_unity(3, 8), root_of_unity(7, 8));
        #[rustfmt::skip]
        let expected = CMat::from_row_slice(4, 4, &[
            ONE * h, ONE * h, ZERO, ZERO,
            w3 * h, w7 * h, ZERO, ZERO,
            ZERO, ZERO, ONE * h, gam * h,
            ZERO, ZERO, w3 * h, gam * w7 * h,
        ]);
        assert!(max_abs(&(&rv - expected)) < 1e-15);
        assert!(unitarity_defect(&rv) < 1e-10);
    }

    #[test]
    fn real_stacking_of_i() {
        let rv = CMat::identity(2, 2) * crate::linalg::I;
        let r = real_stacking(&rv);
        #[rustfmt::skip]
        let expected = nalgebra::DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -1.0, 0.0, 0.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
        ]);
        assert_eq!(r, expected);
        assert_eq!(real_stacking(&CMat::identity(3, 3)), nalgebra::DMatrix::identity(6, 6));
    }

    #[test]
    fn ld_for_identity_generator() {
        let a = ld_matrices(&CMat::identity(2, 2), ONE);
        assert_eq!(a.len(), 2);
        for au in &a {
            for col in 0..2 {
                let nonzero: Vec<Complex64> = au.column(col).iter().copied().filter(|z| z.norm() > 0.0).collect();
                assert_eq!(nonzero.len(), 1);
                assert_eq!(nonzero[0], ONE);
            }
        }
    }

    #[test]
    fn variant_shapes() {
        let g = pow2_lattice(1).entries;
        let gam = gamma_2x2();
        let ir = integral_restriction(gam, 3, &[ZERO, ONE, ZERO]).unwrap();
        assert_eq!(ir, gamma_matrix(gam, 3));
        assert_eq!(integral_restriction(gam, 3, &[ONE, ZERO, ZERO]).unwrap(), CMat::identity(3, 3));
        let f = [c(1.0, 1.0), c(-1.0, 1.0), c(1.0, -1.0), c(3.0, 1.0)];
        let full = encode_full(&g, gam, &f).unwrap();
        assert_eq!(layered_codeword(&g, gam, 2, &f).unwrap(), full);
        let one = layered_codeword(&g, gam, 1, &f[..2]).unwrap();
        assert_eq!(one, diagonal_codeword(&g, &f[..2]).unwrap());
        assert!(layered_codeword(&g, gam, 3, &f).is_err());
        assert_eq!(truncate_rows(&full, 1).unwrap(), full.rows(0, 1).into_owned());
        let stacked = stack_horizontal(&[full.clone(), one.clone()]).unwrap();
        assert_eq!(stacked.columns(0, 2).into_owned(), full);
        assert_eq!(stacked.columns(2, 2).into_owned(), one);
    }

    #[test]
    fn masked_layers_zero_the_tail() {
        let g = pow2_lattice(2).entries;
        let gam = c(3.0, 2.0) / c(3.0, -2.0);
        let f: Vec<Complex64> = (0..4).map(|k| c(k as f64, 1.0)).collect();
        let x = masked_layers_codeword(&g, gam, 1, &f).unwrap();
        let mut padded = vec![ZERO; 16];
        for j in 0..4 {
            padded[j * 4] = f[j];
        }
        assert_eq!(x, encode_full(&g, gam, &padded).unwrap());
    }
}
