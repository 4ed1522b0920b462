//! Finite signal sets drawn from `Z[i]` (QAM) and `Z[w3]` (HEX).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algint::{GaussLikeInt, Ring};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConstellationTag {
    /// Square QAM with `levels` odd amplitudes per axis (`levels^2` points).
    Qam { levels: u32 },
    /// Eisenstein points `a + b w3` with modulus at most `radius`.
    Hex { radius: f64 },
}

/// Points are stored in a fixed order; the position of a point in
/// [`Constellation::points`] is its symbol index, which is what tie-breaking
/// and bit mapping refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub tag: ConstellationTag,
    pub points: Vec<Complex64>,
    /// Integer coordinates `(a, b)` of each point in the ring basis `(1, u)`.
    pub coords: Vec<(i64, i64)>,
}

impl Constellation {
    /// `levels x levels` QAM on odd integers; real part is the major index.
    pub fn qam(levels: u32) -> Result<Self> {
        if levels < 2 || !levels.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "QAM needs a power-of-two number of levels per axis, got {levels}"
            )));
        }
        let amps: Vec<i64> = (0..levels as i64).map(|k| 2 * k + 1 - levels as i64).collect();
        let coords: Vec<(i64, i64)> = amps.iter().flat_map(|&a| amps.iter().map(move |&b| (a, b))).collect();
        let points = coords.iter().map(|&(a, b)| Complex64::new(a as f64, b as f64)).collect();
        Ok(Self { tag: ConstellationTag::Qam { levels }, points, coords })
    }

    /// QAM with `size` total points, e.g. `qam_total(16)` is 16-QAM.
    pub fn qam_total(size: u32) -> Result<Self> {
        let levels = (size as f64).sqrt().round() as u32;
        if levels * levels != size {
            return Err(Error::InvalidConfig(format!("QAM size {size} is not a square")));
        }
        Self::qam(levels)
    }

    /// Eisenstein points within `radius` of the origin, sorted by `(a, b)`.
    /// The set is closed under negation, so its mean is zero.
    pub fn hex(radius: f64) -> Result<Self> {
        if !(radius >= 1.0) {
            return Err(Error::InvalidConfig(format!("HEX radius must be at least 1, got {radius}")));
        }
        let bound = (2.0 * radius / 3f64.sqrt()).ceil() as i64 + 1;
        let mut coords = Vec::new();
        for a in -bound..=bound {
            for b in -bound..=bound {
                let z = GaussLikeInt::eisenstein(a, b);
                if (z.norm() as f64) <= radius * radius + 1e-9 {
                    coords.push((a, b));
                }
            }
        }
        let points = coords.iter().map(|&(a, b)| GaussLikeInt::eisenstein(a, b).to_complex()).collect();
        Ok(Self { tag: ConstellationTag::Hex { radius }, points, coords })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ring(&self) -> Ring {
        match self.tag {
            ConstellationTag::Qam { .. } => Ring::GaussianZi,
            ConstellationTag::Hex { .. } => Ring::EisensteinZw3,
        }
    }

    /// Average symbol energy.
    pub fn energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    pub fn index_of(&self, coord: (i64, i64)) -> Option<usize> {
        self.coords.iter().position(|&c| c == coord)
    }

    pub fn bits_per_symbol(&self) -> u32 {
        usize::BITS - (self.len() - 1).leading_zeros()
    }

    /// Bit label of a symbol: Gray code per axis for QAM, the plain index
    /// for HEX.
    pub fn label(&self, index: usize) -> u64 {
        match self.tag {
            ConstellationTag::Qam { levels } => {
                let (ia, ib) = (index as u64 / levels as u64, index as u64 % levels as u64);
                let axis_bits = levels.trailing_zeros();
                (gray(ia) << axis_bits) | gray(ib)
            }
            ConstellationTag::Hex { .. } => index as u64,
        }
    }

    pub fn bit_errors(&self, sent: usize, got: usize) -> u32 {
        (self.label(sent) ^ self.label(got)).count_ones()
    }
}

fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}
