//! Unitary generator matrices for the shaping lattices.
//!
//! Rows of a generator index a basis of the extension `L/F`, columns index
//! the Galois conjugates. Column `c` is always the image under `sigma^c` for
//! the cyclic generator `sigma` used by the code, which is what lets
//! `diag(f G)` be read as the embedding of a field element.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algint::{gcd, mod_inverse, pow_mod, primitive_root, tower_prime, two_adic_split};
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, root_of_unity, CMat, I, ONE};
use crate::FieldTag;

/// Imaginary parts of the real odd-degree lattice below this are dropped;
/// anything larger means the construction went wrong.
pub const REALNESS_THRESHOLD: f64 = 1e-9;

/// Where a generator came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Origin {
    /// The 1x1 generator `[1]`.
    Trivial,
    OddDegree {
        n1: u64,
        p: u64,
        r: u64,
        lambda: u64,
    },
    PowerOfTwo {
        s: u32,
    },
    HexC2,
    /// Kronecker product, columns reordered to follow the combined cyclic
    /// generator when `crt_ordered` is set.
    Kronecker {
        left: Box<Origin>,
        right: Box<Origin>,
        crt_ordered: bool,
    },
    /// Hand-entered matrix.
    Explicit {
        label: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryGenerator {
    #[serde(with = "linalg::serde_cmat")]
    pub entries: CMat,
    pub origin: Origin,
    pub unitarity_defect: f64,
}

impl UnitaryGenerator {
    pub fn new(entries: CMat, origin: Origin) -> Self {
        let unitarity_defect = linalg::unitarity_defect(&entries);
        Self { entries, origin, unitarity_defect }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn identity(n: usize) -> Self {
        Self::new(CMat::identity(n, n), Origin::Explicit { label: format!("I{n}") })
    }
}

/// Intermediate quantities of the odd-degree construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddLatticeIngredients {
    pub n1: u64,
    pub p: u64,
    pub r: u64,
    pub lambda: u64,
    pub m: u64,
    pub alpha: Complex64,
    /// `[x, sigma(x), ..., sigma^(n1-1)(x)]`.
    pub x_orbit: Vec<Complex64>,
}

impl OddLatticeIngredients {
    /// `w^lambda * alpha`, the square root of `(-1)^m p`.
    pub fn sqrt_disc(&self) -> Complex64 {
        root_of_unity(self.lambda as i64, self.p) * self.alpha
    }

    /// Exponent table `r^e mod p` for `e` in `[0, p - 1)`.
    fn powers(&self) -> Vec<u64> {
        (0..self.p - 1).map(|e| pow_mod(self.r, e, self.p)).collect()
    }
}

/// Runs the cyclotomic pipeline for the degree-`n1` subfield of `Q(w_p)`.
///
/// For `n1 = 1` the prime 3 is used, so the degenerate orbit is the full
/// trace of `z`.
pub fn odd_lattice_ingredients(n1: u64, cfg: &SearchConfig) -> Result<OddLatticeIngredients> {
    if n1.is_multiple_of(2) {
        return Err(Error::EvenOddDegree(n1 as usize));
    }
    let p = if n1 == 1 { 3 } else { tower_prime(n1, cfg)? };
    if p > cfg.lattice_prime_cap {
        return Err(Error::LatticePrimeCap { p, cap: cfg.lattice_prime_cap });
    }
    let r = primitive_root(p)?;
    let lambda = mod_inverse(r as i64 - 1, p)?;
    let m = (p - 1) / 2;
    let order = (p - 1) as usize;
    let pw: Vec<u64> = (0..p - 1).map(|e| pow_mod(r, e, p)).collect();
    let w = |k: u64| root_of_unity(k as i64, p);

    // one_minus[e] = 1 - w^(r^e) = sigma^e(1 - w)
    let one_minus: Vec<Complex64> = pw.iter().map(|&k| ONE - w(k)).collect();
    let alpha: Complex64 = one_minus[..m as usize].iter().product();

    // sigma^e(z) = w^(lambda r^e) * prod_{k<m} (1 - w^(r^(k+e))) * (1 - w^(r^e))
    let sigma_z = |e: usize| -> Complex64 {
        let alpha_e: Complex64 = (0..m as usize).map(|k| one_minus[(k + e) % order]).product();
        w(lambda * pw[e] % p) * alpha_e * one_minus[e]
    };
    let terms = (p - 1) / n1;
    let x_orbit =
        (0..n1).map(|j| (1..=terms).map(|k| sigma_z(((k * n1 + j) % (p - 1)) as usize)).sum::<Complex64>()).collect();
    Ok(OddLatticeIngredients { n1, p, r, lambda, m, alpha, x_orbit })
}

/// `sum_a sigma^a(x sigma^t(x))`; equals `p^2` at `t = 0` and vanishes
/// otherwise.
pub fn trace_orthogonality(ing: &OddLatticeIngredients, t: usize) -> Complex64 {
    let n = ing.x_orbit.len();
    (0..n).map(|a| ing.x_orbit[a] * ing.x_orbit[(a + t) % n]).sum()
}

/// First row of the odd-degree generator from the closed form
/// `(1/p) w^lambda alpha sum_k (-1)^(k n1 + j) (1 - w^(r^(k n1 + j)))`.
///
/// This relies on `sigma(w^lambda alpha) = -w^lambda alpha` and serves as a
/// cross-check of the orbit sums.
pub fn first_row_closed_form(ing: &OddLatticeIngredients) -> Vec<Complex64> {
    let pw = ing.powers();
    let (p, n1) = (ing.p, ing.n1);
    let lead = ing.sqrt_disc() / p as f64;
    (0..n1)
        .map(|j| {
            let sum: Complex64 = (1..=(p - 1) / n1)
                .map(|k| {
                    let e = k * n1 + j;
                    let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
                    (ONE - root_of_unity(pw[(e % (p - 1)) as usize] as i64, p)) * sign
                })
                .sum();
            lead * sum
        })
        .collect()
}

/// Real circulant generator `G(i, j) = sigma^(i + j)(x) / p`.
pub fn odd_lattice(n1: u64, cfg: &SearchConfig) -> Result<UnitaryGenerator> {
    if n1.is_multiple_of(2) {
        return Err(Error::EvenOddDegree(n1 as usize));
    }
    if n1 == 1 {
        return Ok(UnitaryGenerator::new(CMat::identity(1, 1), Origin::Trivial));
    }
    let ing = odd_lattice_ingredients(n1, cfg)?;
    let p = ing.p as f64;
    let worst = ing.x_orbit.iter().map(|x| x.im.abs() / p).fold(0.0, f64::max);
    if worst > REALNESS_THRESHOLD {
        return Err(Error::ImaginaryResidue(worst));
    }
    let n = n1 as usize;
    let row: Vec<f64> = ing.x_orbit.iter().map(|x| x.re / p).collect();
    let entries = CMat::from_fn(n, n, |i, j| Complex64::new(row[(i + j) % n], 0.0));
    let origin = Origin::OddDegree { n1, p: ing.p, r: ing.r, lambda: ing.lambda };
    Ok(UnitaryGenerator::new(entries, origin))
}

/// `(1/sqrt(m)) [w_M^(i 5^k)]` with `m = 2^s`, `M = 2^(s+2)`: rows follow the
/// basis `1, w_M, ..., w_M^(m-1)`, columns the automorphisms `w_M -> w_M^(5^k)`.
pub fn pow2_lattice(s: u32) -> UnitaryGenerator {
    let m = 1usize << s;
    let big_m = 1u64 << (s + 2);
    let scale = 1.0 / (m as f64).sqrt();
    let entries = CMat::from_fn(m, m, |i, k| {
        let e = (i as u64 * pow_mod(5, k as u64, big_m)) % big_m;
        root_of_unity(e as i64, big_m) * scale
    });
    UnitaryGenerator::new(entries, Origin::PowerOfTwo { s })
}

/// `(1/sqrt 2) [[1, i], [1, -i]]`.
pub fn hex_c2() -> UnitaryGenerator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let entries = CMat::from_row_slice(2, 2, &[ONE * h, I * h, ONE * h, -I * h]);
    UnitaryGenerator::new(entries, Origin::HexC2)
}

/// [`hex_c2`] transposed: rows are the basis `1, i`, columns the two
/// embeddings `i -> i` and `i -> -i`, as the encoder expects.
pub fn hex_c2_embedding() -> UnitaryGenerator {
    let c2 = hex_c2();
    UnitaryGenerator::new(c2.entries.transpose(), Origin::HexC2)
}

/// `(1/sqrt 2) [[1, 1], [w8^3, w8^7]]`, the basis `{1, w8^3}` of `Q(w8)/Q(i)`.
pub fn qam2_alt_generator() -> UnitaryGenerator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let entries = CMat::from_row_slice(2, 2, &[ONE * h, ONE * h, root_of_unity(3, 8) * h, root_of_unity(7, 8) * h]);
    UnitaryGenerator::new(entries, Origin::Explicit { label: "basis {1, w8^3}".into() })
}

/// Plain Kronecker product of generators of coprime dimension.
pub fn kronecker_combine(ga: &UnitaryGenerator, gb: &UnitaryGenerator) -> Result<UnitaryGenerator> {
    let (a, b) = (ga.dim(), gb.dim());
    if gcd(a as u64, b as u64) != 1 {
        return Err(Error::IncompatibleGenerators(a, b));
    }
    Ok(UnitaryGenerator::new(
        linalg::kron(&ga.entries, &gb.entries),
        Origin::Kronecker { left: Box::new(ga.origin.clone()), right: Box::new(gb.origin.clone()), crt_ordered: false },
    ))
}

/// Reorders the columns of `A (x) B` (`A` is `a x a`, `B` is `b x b`, coprime)
/// so column `t` holds the image under `(sigma tau)^t`: old column
/// `(t mod a) b + (t mod b)`.
pub fn crt_reorder(g: &UnitaryGenerator, a: usize, b: usize) -> UnitaryGenerator {
    let n = a * b;
    let src = &g.entries;
    let entries = CMat::from_fn(n, n, |i, t| src[(i, (t % a) * b + (t % b))]);
    let origin = match &g.origin {
        Origin::Kronecker { left, right, .. } => {
            Origin::Kronecker { left: left.clone(), right: right.clone(), crt_ordered: true }
        }
        other => other.clone(),
    };
    UnitaryGenerator::new(entries, origin)
}

/// Generator for dimension `n` over the given base field.
pub fn generator_for(n: usize, field: FieldTag, cfg: &SearchConfig) -> Result<UnitaryGenerator> {
    if n == 0 {
        return Err(Error::InvalidDimensions("n must be positive".into()));
    }
    let (s, n1) = two_adic_split(n as u64);
    let even_part = match field {
        FieldTag::Qam => pow2_lattice(s),
        FieldTag::Hex => match s {
            0 => UnitaryGenerator::new(CMat::identity(1, 1), Origin::Trivial),
            1 => hex_c2_embedding(),
            _ => return Err(Error::HexShapingUndefined(n)),
        },
    };
    if n1 == 1 {
        return Ok(even_part);
    }
    let odd = odd_lattice(n1, cfg)?;
    if even_part.dim() == 1 {
        return Ok(odd);
    }
    let combined = kronecker_combine(&odd, &even_part)?;
    Ok(crt_reorder(&combined, n1 as usize, even_part.dim()))
}
