//! Maximum-likelihood detection for the linear model `y = A f + w`.
//!
//! Both decoders pick the same point: the smallest metric `|y - A f|^2`,
//! and among candidates within `1e-9 (1 + d_min)` of it, the one whose
//! symbol-index vector is lexicographically smallest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codebook::Constellation;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Default cap on codebook size for the exhaustive decoder.
pub const ML_CAP: u64 = 1 << 16;

const TIE_TOL: f64 = 1e-9;
const COLLECT_TOL: f64 = 1e-6;

pub fn metric(y: &[Complex64], a: &CMat, f: &[Complex64]) -> f64 {
    (0..a.nrows())
        .map(|r| {
            let s: Complex64 = (0..a.ncols()).map(|k| a[(r, k)] * f[k]).sum();
            (y[r] - s).norm_sqr()
        })
        .sum()
}

fn symbols(c: &Constellation, idx: &[usize]) -> Vec<Complex64> {
    idx.iter().map(|&i| c.points[i]).collect()
}

/// Applies the shared tie rule to candidate index vectors.
fn select(y: &[Complex64], a: &CMat, c: &Constellation, candidates: Vec<Vec<usize>>) -> Vec<usize> {
    let scored: Vec<(f64, Vec<usize>)> =
        candidates.into_iter().map(|idx| (metric(y, a, &symbols(c, &idx)), idx)).collect();
    let d_min = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    scored
        .into_iter()
        .filter(|(d, _)| *d <= d_min + TIE_TOL * (1.0 + d_min))
        .map(|(_, idx)| idx)
        .min()
        .expect("at least one candidate")
}

/// Brute force over all `|C|^L` symbol vectors.
pub fn ml_decode_exhaustive(y: &[Complex64], a: &CMat, c: &Constellation, cap: u64) -> Result<Vec<usize>> {
    let len = a.ncols();
    let size = (c.len() as f64).powi(len as i32);
    if size > cap as f64 {
        return Err(Error::CodebookTooLarge { size, cap });
    }
    let q = c.len();
    let total = size as u64;
    let mut best = f64::INFINITY;
    let mut ties: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut idx = vec![0usize; len];
    for t in 0..total {
        // most significant digit first, so iteration is lexicographic
        let mut rest = t;
        for slot in idx.iter_mut().rev() {
            *slot = (rest % q as u64) as usize;
            rest /= q as u64;
        }
        let d = metric(y, a, &symbols(c, &idx));
        if d < best {
            best = d;
            ties.retain(|(dd, _)| *dd <= best + COLLECT_TOL * (1.0 + best));
        }
        if d <= best + COLLECT_TOL * (1.0 + best) {
            ties.push((d, idx.clone()));
        }
    }
    let ties = ties.into_iter().map(|(_, idx)| idx).collect();
    Ok(select(y, a, c, ties))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RadiusPolicy {
    /// Start unbounded and shrink on every leaf.
    #[default]
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereOutcome {
    pub indices: Vec<usize>,
    /// Tree nodes accepted inside the radius, leaves included.
    pub visited: u64,
}

struct Level {
    /// Candidate values for this coordinate; for `a`-levels, indexed by the
    /// value already chosen for the paired `b`.
    values: Vec<Vec<i64>>,
}

/// Real-valued Schnorr-Euchner enumeration.
///
/// Symbol `k` is written `a_k + b_k u` (`u = i` or `w3`) with integer
/// coordinates, ordered `[a_0, b_0, a_1, b_1, ...]`. After `QR` of the real
/// model, levels are enumerated from the last coordinate down, so each `b_k`
/// is fixed before `a_k` and only pairs present in the constellation are
/// tried.
pub fn sphere_decode(y: &[Complex64], a: &CMat, c: &Constellation, _policy: RadiusPolicy) -> SphereOutcome {
    let len = a.ncols();
    let rows = a.nrows();
    let dim = 2 * len;
    let u = match c.ring() {
        crate::algint::Ring::GaussianZi => Complex64::new(0.0, 1.0),
        crate::algint::Ring::EisensteinZw3 => Complex64::new(-0.5, 3f64.sqrt() / 2.0),
    };
    let h = DMatrix::<f64>::from_fn(2 * rows, dim, |r, col| {
        let z = if col % 2 == 0 { a[(r % rows, col / 2)] } else { a[(r % rows, col / 2)] * u };
        if r < rows {
            z.re
        } else {
            z.im
        }
    });
    let yr = DVector::<f64>::from_fn(2 * rows, |r, _| if r < rows { y[r].re } else { y[r - rows].im });
    let qr = h.qr();
    let (q, r) = (qr.q(), qr.r());
    let yt = q.transpose() * yr;
    let rank_rows = r.nrows();

    let mut b_values: Vec<i64> = c.coords.iter().map(|p| p.1).collect();
    b_values.sort_unstable();
    b_values.dedup();
    let a_given_b: Vec<Vec<i64>> = b_values
        .iter()
        .map(|&b| {
            let mut v: Vec<i64> = c.coords.iter().filter(|p| p.1 == b).map(|p| p.0).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let levels: Vec<Level> = (0..dim)
        .map(
            |l| if l % 2 == 1 { Level { values: vec![b_values.clone()] } } else { Level { values: a_given_b.clone() } },
        )
        .collect();

    let mut z = vec![0i64; dim];
    let mut b_slot = vec![0usize; len];
    let mut state = Search {
        r: &r,
        yt: &yt,
        rank_rows,
        levels: &levels,
        b_values: &b_values,
        best: f64::INFINITY,
        leaves: Vec::new(),
        visited: 0,
    };
    state.descend(dim, 0.0, &mut z, &mut b_slot);

    let best = state.best;
    let candidates: Vec<Vec<usize>> = state
        .leaves
        .into_iter()
        .filter(|(d, _)| *d <= best + COLLECT_TOL * (1.0 + best))
        .map(|(_, zz)| {
            (0..len)
                .map(|k| c.index_of((zz[2 * k], zz[2 * k + 1])).expect("enumerated pairs lie in the constellation"))
                .collect()
        })
        .collect();
    SphereOutcome { indices: select(y, a, c, candidates), visited: state.visited }
}

struct Search<'a> {
    r: &'a DMatrix<f64>,
    yt: &'a DVector<f64>,
    rank_rows: usize,
    levels: &'a [Level],
    b_values: &'a [i64],
    best: f64,
    leaves: Vec<(f64, Vec<i64>)>,
    visited: u64,
}

impl Search<'_> {
    fn radius(&self) -> f64 {
        self.best + COLLECT_TOL * (1.0 + self.best)
    }

    /// Fixes coordinate `level - 1` given coordinates `level..`.
    fn descend(&mut self, level: usize, dist: f64, z: &mut [i64], b_slot: &mut [usize]) {
        if level == 0 {
            if dist < self.best {
                self.best = dist;
                let radius = self.radius();
                self.leaves.retain(|(d, _)| *d <= radius);
            }
            self.leaves.push((dist, z.to_vec()));
            return;
        }
        let l = level - 1;
        let values = if l % 2 == 1 { &self.levels[l].values[0] } else { &self.levels[l].values[b_slot[l / 2]] };
        let (diag, target) = if l < self.rank_rows {
            let interference: f64 = (level..z.len()).map(|j| self.r[(l, j)] * z[j] as f64).sum();
            (self.r[(l, l)], self.yt[l] - interference)
        } else {
            (0.0, 0.0)
        };
        let mut order: Vec<(f64, i64)> = values
            .iter()
            .map(|&v| {
                let e = target - diag * v as f64;
                (e * e, v)
            })
            .collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (inc, v) in order {
            let d = dist + inc;
            if d > self.radius() {
                break;
            }
            self.visited += 1;
            z[l] = v;
            if l % 2 == 1 {
                b_slot[l / 2] = self.b_values.binary_search(&v).expect("b value from list");
            }
            self.descend(l, d, z, b_slot);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel_tie_prefers_smaller_index() {
        let c = Constellation::qam(2).unwrap();
        let a = CMat::identity(2, 2);
        // midway between (-1-1i, -1-1i) [index 0,0] and (-1-1i, -1+1i) [index 0,1]
        let y = [Complex64::new(-1.0, -1.0), Complex64::new(-1.0, 0.0)];
        assert_eq!(ml_decode_exhaustive(&y, &a, &c, ML_CAP).unwrap(), vec![0, 0]);
        assert_eq!(sphere_decode(&y, &a, &c, RadiusPolicy::Infinite).indices, vec![0, 0]);
    }

    #[test]
    fn noiseless_recovery() {
        let c = Constellation::hex(1.0).unwrap();
        let a = CMat::from_fn(3, 2, |i, j| Complex64::new((i + 2 * j) as f64 * 0.3 + 1.0, i as f64 - j as f64));
        for sent in [[0usize, 6], [3, 3], [5, 1]] {
            let f: Vec<Complex64> = sent.iter().map(|&i| c.points[i]).collect();
            let y: Vec<Complex64> = (0..3).map(|r| (0..2).map(|k| a[(r, k)] * f[k]).sum()).collect();
            assert_eq!(ml_decode_exhaustive(&y, &a, &c, ML_CAP).unwrap(), sent.to_vec());
            assert_eq!(sphere_decode(&y, &a, &c, RadiusPolicy::Infinite).indices, sent.to_vec());
        }
    }

    #[test]
    fn cap_enforced() {
        let c = Constellation::qam(4).unwrap();
        let a = CMat::identity(5, 5);
        assert!(matches!(
            ml_decode_exhaustive(&[Complex64::new(0.0, 0.0); 5], &a, &c, ML_CAP),
            Err(Error::CodebookTooLarge { .. })
        ));
    }
}
