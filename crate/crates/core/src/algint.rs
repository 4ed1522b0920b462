//! Exact integer and quadratic-integer arithmetic for the non-norm element
//! searches.
//!
//! Everything here works on machine integers: the primes that show up in the
//! constructions are small, and every quantity that ends up in a
//! [`NonNormCertificate`] is an exact integer so certificates can be checked
//! without floating point.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::FieldTag;

/// The two imaginary quadratic rings the base fields are built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    /// Gaussian integers, `a + b i`.
    GaussianZi,
    /// Eisenstein integers, `a + b w` with `w = exp(2 pi i / 3)`.
    EisensteinZw3,
}

impl Ring {
    pub fn name(self) -> &'static str {
        match self {
            Ring::GaussianZi => "Z[i]",
            Ring::EisensteinZw3 => "Z[w3]",
        }
    }

    /// The units of the ring, as `(a, b)` pairs.
    pub fn units(self) -> &'static [(i64, i64)] {
        match self {
            Ring::GaussianZi => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            // 1, -1, w, -w, w^2 = -1 - w, -w^2 = 1 + w
            Ring::EisensteinZw3 => &[(1, 0), (-1, 0), (0, 1), (0, -1), (-1, -1), (1, 1)],
        }
    }

    pub fn for_field(field: FieldTag) -> Ring {
        match field {
            FieldTag::Qam => Ring::GaussianZi,
            FieldTag::Hex => Ring::EisensteinZw3,
        }
    }
}

/// An element `a + b u` of `Z[i]` (`u = i`) or `Z[w3]` (`u = w3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaussLikeInt {
    pub a: i64,
    pub b: i64,
    pub ring: Ring,
}

impl GaussLikeInt {
    pub const fn new(a: i64, b: i64, ring: Ring) -> Self {
        Self { a, b, ring }
    }

    pub const fn gaussian(a: i64, b: i64) -> Self {
        Self::new(a, b, Ring::GaussianZi)
    }

    pub const fn eisenstein(a: i64, b: i64) -> Self {
        Self::new(a, b, Ring::EisensteinZw3)
    }

    /// `a^2 + b^2` in `Z[i]`, `a^2 - ab + b^2` in `Z[w3]`.
    pub fn norm(&self) -> u64 {
        let (a, b) = (self.a as i128, self.b as i128);
        let n = match self.ring {
            Ring::GaussianZi => a * a + b * b,
            Ring::EisensteinZw3 => a * a - a * b + b * b,
        };
        n as u64
    }

    /// Complex conjugate. In `Z[w3]`, `conj(w) = w^2 = -1 - w`.
    pub fn conj(&self) -> Self {
        match self.ring {
            Ring::GaussianZi => Self::new(self.a, -self.b, self.ring),
            Ring::EisensteinZw3 => Self::new(self.a - self.b, -self.b, self.ring),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring, "mixed-ring product");
        let (a, b, c, d) = (self.a, self.b, other.a, other.b);
        match self.ring {
            Ring::GaussianZi => Self::new(a * c - b * d, a * d + b * c, self.ring),
            // (a + bw)(c + dw) = ac + (ad + bc) w + bd w^2, w^2 = -1 - w
            Ring::EisensteinZw3 => Self::new(a * c - b * d, a * d + b * c - b * d, self.ring),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// All unit multiples `u * self`.
    pub fn associates(&self) -> Vec<Self> {
        self.ring.units().iter().map(|&(ua, ub)| Self::new(ua, ub, self.ring).mul(self)).collect()
    }

    pub fn is_associate_of(&self, other: &Self) -> bool {
        self.ring == other.ring && self.associates().contains(other)
    }

    pub fn to_complex(&self) -> Complex64 {
        match self.ring {
            Ring::GaussianZi => Complex64::new(self.a as f64, self.b as f64),
            Ring::EisensteinZw3 => {
                let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
                Complex64::new(self.a as f64, 0.0) + w * self.b as f64
            }
        }
    }
}

impl fmt::Display for GaussLikeInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = match self.ring {
            Ring::GaussianZi => "i",
            Ring::EisensteinZw3 => "w3",
        };
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, b) => write!(f, "{b}{unit}"),
            (a, b) if b < 0 => write!(f, "{a}-{}{unit}", -b),
            (a, b) => write!(f, "{a}+{b}{unit}"),
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic Miller-Rabin; the witness set is exact below 2^64.
pub fn is_prime(m: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if m < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if m.is_multiple_of(w) {
            return m == w;
        }
    }
    let mut d = m - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &w in &WITNESSES {
        let mut x = pow_mod(w, d, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Multiplicative order of `a` modulo `m`.
pub fn mod_order(a: i64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::NotAUnit { value: a, modulus: m });
    }
    let a = a.rem_euclid(m as i64) as u64;
    if gcd(a, m) != 1 {
        return Err(Error::NotAUnit { value: a as i64, modulus: m });
    }
    let mut x = a;
    let mut t = 1;
    while x != 1 {
        x = mul_mod(x, a, m);
        t += 1;
    }
    Ok(t)
}

fn is_primitive_root(r: u64, p: u64, factors: &[u64]) -> bool {
    !r.is_multiple_of(p) && factors.iter().all(|&l| pow_mod(r, (p - 1) / l, p) != 1)
}

/// Primitive root used for the Galois generator `sigma(w_p) = w_p^r`.
///
/// Returns the smallest primitive root `r >= 3`, falling back to 2 only for
/// `p = 3` where no such root exists.
pub fn primitive_root(p: u64) -> Result<u64> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if p == 3 {
        return Ok(2);
    }
    let factors = prime_factors(p - 1);
    (3..p).find(|&r| is_primitive_root(r, p, &factors)).ok_or(Error::NotOddPrime(p))
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Inverse of `a` modulo `m`.
pub fn mod_inverse(a: i64, m: u64) -> Result<u64> {
    let (g, x, _) = ext_gcd((a as i128).rem_euclid(m as i128), m as i128);
    if g != 1 {
        return Err(Error::NotAUnit { value: a, modulus: m });
    }
    Ok(x.rem_euclid(m as i128) as u64)
}

/// Chinese remaindering over pairwise coprime moduli; the result lies in
/// `[0, prod m_i)`.
pub fn crt(residues: &[(i64, u64)]) -> Result<u64> {
    for (i, &(_, mi)) in residues.iter().enumerate() {
        for &(_, mj) in &residues[i + 1..] {
            if gcd(mi, mj) != 1 {
                return Err(Error::NonCoprimeModuli(mi, mj));
            }
        }
    }
    let mut acc: i128 = 0;
    let mut modulus: i128 = 1;
    for &(r, m) in residues {
        let m = m as i128;
        let r = (r as i128).rem_euclid(m);
        // acc + modulus * t == r (mod m)
        let (_, inv, _) = ext_gcd(modulus.rem_euclid(m), m);
        let t = ((r - acc).rem_euclid(m) * inv.rem_euclid(m)).rem_euclid(m);
        acc += modulus * t;
        modulus *= m;
        acc = acc.rem_euclid(modulus);
    }
    Ok(acc as u64)
}

/// First odd prime in the progression `b, b + m, b + 2m, ...` (with `b`
/// reduced into `[0, m)`).
pub fn dirichlet_prime(b: i64, m: u64, cfg: &SearchConfig) -> Result<u64> {
    let start = b.rem_euclid(m as i64) as u64;
    if gcd(start, m) != 1 {
        return Err(Error::NotAUnit { value: b, modulus: m });
    }
    let mut q = start;
    for _ in 0..cfg.progression_cap {
        if q > 2 && is_prime(q) {
            return Ok(q);
        }
        q = q.checked_add(m).ok_or(Error::ProgressionCap { b: start, modulus: m, cap: cfg.progression_cap })?;
    }
    Err(Error::ProgressionCap { b: start, modulus: m, cap: cfg.progression_cap })
}

/// Prime `p = 1 (mod n1)` defining the degree-`n1` subfield of `Q(w_p)`.
///
/// This is the smallest prime `p > 3` with `p = 1 (mod n1)` and
/// `gcd((p - 1) / n1, n1) = 1`; the coprimality makes every element of order
/// `n1` in `Z_p^*` generate `Gal(K/Q)`. Both the lattice and the non-norm
/// search take their prime from here so that they live in the same field.
pub fn tower_prime(n1: u64, cfg: &SearchConfig) -> Result<u64> {
    let mut k = 1u64;
    for _ in 0..cfg.progression_cap {
        let p = 1 + k * n1;
        if p > 3 && gcd(k, n1) == 1 && is_prime(p) {
            return Ok(p);
        }
        k += 1;
    }
    Err(Error::ProgressionCap { b: 1, modulus: n1, cap: cfg.progression_cap })
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Canonical representative among associates of `x` and of `conj(x)`:
/// `a > 0`, `b >= 0`, then maximal `a`, then minimal `b`.
pub fn canonical_split(x: &GaussLikeInt) -> GaussLikeInt {
    let mut images = x.associates();
    images.extend(x.conj().associates());
    images
        .into_iter()
        .filter(|g| g.a > 0 && g.b >= 0)
        .max_by(|u, v| u.a.cmp(&v.a).then(v.b.cmp(&u.b)))
        .expect("a nonzero element always has an image with a > 0, b >= 0")
}

/// Splits a rational prime `q = pi * conj(pi)` in `ring`.
pub fn split_prime(q: u64, ring: Ring) -> Result<GaussLikeInt> {
    let splits = match ring {
        Ring::GaussianZi => q % 4 == 1,
        Ring::EisensteinZw3 => q % 3 == 1,
    };
    if !is_prime(q) || !splits {
        return Err(Error::InertOrRamified { q, ring: ring.name() });
    }
    let found = match ring {
        Ring::GaussianZi => (1..=isqrt(q)).find_map(|b| {
            let rest = q - b * b;
            let a = isqrt(rest);
            (a * a == rest && a > 0).then(|| GaussLikeInt::gaussian(a as i64, b as i64))
        }),
        // 4q = (2a - b)^2 + 3 b^2
        Ring::EisensteinZw3 => (1..=isqrt(4 * q / 3)).find_map(|b| {
            let rest = 4 * q - 3 * b * b;
            let t = isqrt(rest);
            if t * t != rest || !(t + b).is_multiple_of(2) {
                return None;
            }
            Some(GaussLikeInt::eisenstein(((t + b) / 2) as i64, b as i64))
        }),
    };
    found.map(|g| canonical_split(&g)).ok_or(Error::InertOrRamified { q, ring: ring.name() })
}

/// Writes `n = 2^s * n1` with `n1` odd.
pub fn two_adic_split(n: u64) -> (u32, u64) {
    let s = n.trailing_zeros();
    (s, n >> s)
}

/// Everything needed to re-check a unit-magnitude non-norm element
/// `gamma = num / den`, using exact integers only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonNormCertificate {
    pub n: u64,
    pub n1: u64,
    pub s: u32,
    /// Prime defining the odd-degree part of the tower; absent when `n1 = 1`.
    pub p: Option<u64>,
    pub q: u64,
    pub pi1: GaussLikeInt,
    pub gamma_num: GaussLikeInt,
    pub gamma_den: GaussLikeInt,
    pub field_tag: FieldTag,
}

impl NonNormCertificate {
    pub fn gamma(&self) -> Complex64 {
        self.gamma_num.to_complex() / self.gamma_den.to_complex()
    }
}

/// Non-norm element over `Q(i)` for dimension `n`.
pub fn nonnorm_qam(n: u64, cfg: &SearchConfig) -> Result<NonNormCertificate> {
    if n == 0 {
        return Err(Error::InvalidDimensions("n must be positive".into()));
    }
    let (s, n1) = two_adic_split(n);
    // q = 5 (mod 2^(s+2)); for s = 0 the stronger q = 5 (mod 8) is used so
    // every tower shares the same 2-adic residue.
    let two_part = 1u64 << (s.max(1) + 2);
    let (p, q, pi1) = if n1 == 1 {
        (None, 5, GaussLikeInt::gaussian(1, 2))
    } else {
        let p = tower_prime(n1, cfg)?;
        let r = primitive_root(p)?;
        let a = pow_mod(r, (p - 1) / n1, p);
        let b = crt(&[(5, two_part), (a as i64, p)])?;
        let q = dirichlet_prime(b as i64, two_part * p, cfg)?;
        (Some(p), q, split_prime(q, Ring::GaussianZi)?)
    };
    Ok(NonNormCertificate { n, n1, s, p, q, pi1, gamma_num: pi1, gamma_den: pi1.conj(), field_tag: FieldTag::Qam })
}

/// Non-norm element over `Q(w3)` for dimension `n`, `4` not dividing `n`.
pub fn nonnorm_hex(n: u64, cfg: &SearchConfig) -> Result<NonNormCertificate> {
    if n == 0 {
        return Err(Error::InvalidDimensions("n must be positive".into()));
    }
    let (s, n1) = two_adic_split(n);
    if s > 1 {
        return Err(Error::HexMultipleOfFour(n as usize));
    }
    let (p, q, pi1) = if n1 == 1 {
        (None, 7, GaussLikeInt::eisenstein(3, 1))
    } else {
        let p = tower_prime(n1, cfg)?;
        let r = primitive_root(p)?;
        let a = pow_mod(r, (p - 1) / n1, p);
        let mut congruences = vec![(1, 3), (a as i64, p)];
        if s == 1 {
            congruences.push((3, 4));
        }
        let modulus: u64 = congruences.iter().map(|c| c.1).product();
        let b = crt(&congruences)?;
        let q = dirichlet_prime(b as i64, modulus, cfg)?;
        (Some(p), q, split_prime(q, Ring::EisensteinZw3)?)
    };
    Ok(NonNormCertificate { n, n1, s, p, q, pi1, gamma_num: pi1, gamma_den: pi1.conj(), field_tag: FieldTag::Hex })
}

pub fn nonnorm(n: u64, field: FieldTag, cfg: &SearchConfig) -> Result<NonNormCertificate> {
    match field {
        FieldTag::Qam => nonnorm_qam(n, cfg),
        FieldTag::Hex => nonnorm_hex(n, cfg),
    }
}

/// One machine-checkable condition and whether it held.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaReport {
    pub checks: Vec<Check>,
}

impl GammaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Checks on a quotient `num / den` that need no knowledge of the field
/// tower: ring consistency, exact unit magnitude, primality and splitting of
/// `q = norm(num)`, and that `den` is a unit times `conj(num)` while `num` is
/// not an associate of its own conjugate.
pub fn validate_quotient(num: &GaussLikeInt, den: &GaussLikeInt) -> GammaReport {
    let mut checks = Vec::new();
    let same_ring = num.ring == den.ring;
    checks.push(Check::new(
        "ring",
        same_ring && !num.is_zero() && !den.is_zero(),
        format!("numerator in {}, denominator in {}", num.ring.name(), den.ring.name()),
    ));
    let (nn, nd) = (num.norm(), den.norm());
    checks.push(Check::new("unit-magnitude", nn == nd, format!("norm(num) = {nn}, norm(den) = {nd}")));
    checks.push(Check::new("q-prime", is_prime(nn), format!("q = {nn}")));
    let splits = match num.ring {
        Ring::GaussianZi => nn % 4 == 1,
        Ring::EisensteinZw3 => nn % 3 == 1,
    };
    let split_mod = if num.ring == Ring::GaussianZi { 4 } else { 3 };
    checks.push(Check::new("q-splits", splits, format!("q mod {split_mod} = {}", nn % split_mod)));
    checks.push(Check::new(
        "den-conjugate",
        same_ring && den.is_associate_of(&num.conj()),
        format!("den = {den}, conj(num) = {}", num.conj()),
    ));
    checks.push(Check::new(
        "not-self-conjugate",
        !num.is_associate_of(&num.conj()),
        format!("{num} vs {}", num.conj()),
    ));
    GammaReport { checks }
}

/// Tower-dependent congruence on `q`: `q = 5 (mod 2^(s+2))` over `Q(i)`, and
/// `q = 3 (mod 4)` over `Q(w3)` when `s = 1`.
pub fn tower_congruence(q: u64, s: u32, field: FieldTag) -> Check {
    match field {
        FieldTag::Qam => {
            let m = 1u64 << (s + 2);
            Check::new("q-tower-congruence", q % m == 5 % m, format!("q mod {m} = {}", q % m))
        }
        FieldTag::Hex if s == 1 => Check::new("q-tower-congruence", q % 4 == 3, format!("q mod 4 = {}", q % 4)),
        FieldTag::Hex => Check::new("q-tower-congruence", s == 0, format!("s = {s}")),
    }
}

/// Every machine-checkable condition on a certificate. Non-norm-ness itself
/// is not decided here; it follows from inertness of `pi1`, which these
/// conditions imply.
pub fn validate_gamma(cert: &NonNormCertificate) -> GammaReport {
    let mut report = validate_quotient(&cert.gamma_num, &cert.gamma_den);
    let ring = Ring::for_field(cert.field_tag);
    let checks = &mut report.checks;

    let (s, n1) = two_adic_split(cert.n);
    let shape_ok = cert.n > 0 && s == cert.s && n1 == cert.n1 && (cert.field_tag == FieldTag::Qam || s <= 1);
    checks.push(Check::new("dimension-split", shape_ok, format!("n = {} = 2^{} * {}", cert.n, cert.s, cert.n1)));
    checks.push(Check::new(
        "pi1-ring",
        cert.pi1.ring == ring && cert.gamma_num.ring == ring,
        format!("expected {}", ring.name()),
    ));
    checks.push(Check::new("q-matches", cert.gamma_num.norm() == cert.q, format!("q = {}", cert.q)));
    checks.push(Check::new("norm-pi1", cert.pi1.norm() == cert.q, format!("norm({}) = {}", cert.pi1, cert.pi1.norm())));
    checks.push(Check::new("num-is-pi1", cert.gamma_num == cert.pi1, format!("num = {}", cert.gamma_num)));
    checks.push(tower_congruence(cert.q, cert.s, cert.field_tag));

    match (cert.n1, cert.p) {
        (1, _) => {
            checks.push(Check::new("p-prime", true, "n1 = 1, no odd part"));
            checks.push(Check::new("order", true, "n1 = 1, no odd part"));
            checks.push(Check::new("inert-odd-part", true, "n1 = 1, no odd part"));
        }
        (_, None) => {
            checks.push(Check::new("p-prime", false, "n1 > 1 but no p given"));
        }
        (n1, Some(p)) => {
            let p_ok = is_prime(p) && p % n1 == 1 && (cert.field_tag == FieldTag::Qam || p > 3);
            checks.push(Check::new("p-prime", p_ok, format!("p = {p}, p mod {n1} = {}", p % n1)));
            let ord = mod_order(cert.q as i64, p).ok();
            checks.push(Check::new(
                "order",
                ord == Some(n1),
                format!("ord({} mod {p}) = {}", cert.q, ord.map_or("undefined".into(), |o| o.to_string())),
            ));
            // q must generate Gal(K/Q) = Z_p^* / (Z_p^*)^n1
            let inert = ord.is_some() && (p - 1) % n1 == 0 && {
                let k = (p - 1) / n1;
                let qk = pow_mod(cert.q, k, p);
                mod_order(qk as i64, p).ok() == Some(n1)
            };
            checks.push(Check::new(
                "inert-odd-part",
                inert,
                format!("image of q in Z_{p}^* / (Z_{p}^*)^{n1} has order {n1}"),
            ));
        }
    }
    report
}
