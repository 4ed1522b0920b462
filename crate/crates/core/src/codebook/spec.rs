use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::*;
use crate::algint::{nonnorm, GaussLikeInt, NonNormCertificate};
use crate::config::SearchConfig;
use crate::lattices::{generator_for, qam2_alt_generator, Origin, UnitaryGenerator};
use crate::linalg::{self, CMat};
use crate::FieldTag;

/// Generators must be unitary to this tolerance.
pub const UNITARITY_TOL: f64 = 1e-10;
/// `|gamma|` must be one to this tolerance.
pub const GAMMA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Variant {
    Full,
    Diagonal,
    IntegralRestriction,
    Layered(usize),
    Truncated(usize),
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Full => f.write_str("full"),
            Variant::Diagonal => f.write_str("diag"),
            Variant::IntegralRestriction => f.write_str("ir"),
            Variant::Layered(k) => write!(f, "layered:{k}"),
            Variant::Truncated(r) => write!(f, "truncated:{r}"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown variant '{s}'"));
        let count = |v: &str| v.parse::<usize>().map_err(|_| bad());
        match s.split_once(':') {
            None => match s {
                "full" => Ok(Variant::Full),
                "diag" | "diagonal" => Ok(Variant::Diagonal),
                "ir" => Ok(Variant::IntegralRestriction),
                _ => Err(bad()),
            },
            Some(("layered", k)) => Ok(Variant::Layered(count(k)?)),
            Some(("truncated", r)) => Ok(Variant::Truncated(count(r)?)),
            Some(_) => Err(bad()),
        }
    }
}

impl TryFrom<String> for Variant {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.to_string()
    }
}

/// An assembled code: certificate, generator, variant and delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub n: usize,
    pub delay: usize,
    pub variant: Variant,
    pub gamma: Complex64,
    pub cert: NonNormCertificate,
    pub generator: UnitaryGenerator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeMatrix {
    #[serde(with = "linalg::serde_cmat")]
    pub entries: CMat,
    pub info: Vec<Complex64>,
    /// False for truncated codewords, whose vectorization no longer has the
    /// same energy as the information vector.
    pub isometric: bool,
}

impl CodeSpec {
    /// Runs the non-norm search and lattice construction for `n`.
    /// `delay` defaults to `n`.
    pub fn construct(
        n: usize,
        field: FieldTag,
        variant: Variant,
        delay: Option<usize>,
        cfg: &SearchConfig,
    ) -> Result<Self> {
        let cert = nonnorm(n as u64, field, cfg)?;
        let generator = generator_for(n, field, cfg)?;
        Self::from_parts(cert, generator, variant, delay.unwrap_or(n))
    }

    /// Assembles and fully validates a spec.
    pub fn from_parts(
        cert: NonNormCertificate,
        generator: UnitaryGenerator,
        variant: Variant,
        delay: usize,
    ) -> Result<Self> {
        let spec = Self::from_parts_unchecked(cert, generator, variant, delay);
        spec.validate()?;
        Ok(spec)
    }

    /// Assembles a spec without numeric checks, for negative controls.
    pub fn from_parts_unchecked(
        cert: NonNormCertificate,
        generator: UnitaryGenerator,
        variant: Variant,
        delay: usize,
    ) -> Self {
        let n = generator.dim();
        let gamma = cert.gamma();
        Self { n, delay, variant, gamma, cert, generator }
    }

    /// The 2x2 QAM code with basis `{1, w8^3}` and `gamma = (2+i)/(1+2i)`.
    pub fn example_2x2() -> Self {
        let num = GaussLikeInt::gaussian(2, 1);
        let cert = NonNormCertificate {
            n: 2,
            n1: 1,
            s: 1,
            p: None,
            q: 5,
            pi1: num,
            gamma_num: num,
            gamma_den: GaussLikeInt::gaussian(1, 2),
            field_tag: FieldTag::Qam,
        };
        Self::from_parts(cert, qam2_alt_generator(), Variant::Full, 2).expect("2x2 example is valid")
    }

    pub fn field(&self) -> FieldTag {
        self.cert.field_tag
    }

    pub fn with_variant(&self, variant: Variant, delay: Option<usize>) -> Result<Self> {
        let mut out = self.clone();
        out.variant = variant;
        out.delay = delay.unwrap_or(self.n);
        out.check_structure()?;
        Ok(out)
    }

    /// Dimension and variant consistency, without numeric tolerances.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.n;
        let g = &self.generator.entries;
        if n == 0 || g.nrows() != n || g.ncols() != n {
            return Err(Error::InvalidDimensions(format!(
                "generator is {}x{}, code dimension {n}",
                g.nrows(),
                g.ncols()
            )));
        }
        if self.cert.n as usize != n {
            return Err(Error::InvalidSpec(format!("certificate is for n = {}, code has n = {n}", self.cert.n)));
        }
        match self.variant {
            Variant::Full => {
                if self.delay == 0 || !self.delay.is_multiple_of(n) {
                    return Err(Error::InvalidDimensions(format!("delay {} is not a multiple of {n}", self.delay)));
                }
            }
            Variant::Layered(k) if k == 0 || k > n => {
                return Err(Error::InvalidDimensions(format!("layer count {k} outside 1..={n}")));
            }
            Variant::Truncated(r) if r == 0 || r >= n => {
                return Err(Error::InvalidDimensions(format!("truncation to {r} rows needs 1 <= rows < {n}")));
            }
            _ if self.delay != n => {
                return Err(Error::InvalidDimensions(format!(
                    "variant {} needs delay {n}, got {}",
                    self.variant, self.delay
                )));
            }
            _ => {}
        }
        Ok(())
    }

    /// Structure plus generator unitarity, `|gamma| = 1`, agreement of
    /// `gamma` with the certificate, and a shared tower prime.
    pub fn validate(&self) -> Result<()> {
        self.check_structure()?;
        let defect = linalg::unitarity_defect(&self.generator.entries);
        if defect > UNITARITY_TOL {
            return Err(Error::InvalidSpec(format!("generator unitarity defect {defect:e}")));
        }
        if (self.gamma.norm() - 1.0).abs() > GAMMA_TOL {
            return Err(Error::InvalidSpec(format!("|gamma| = {}", self.gamma.norm())));
        }
        if (self.gamma - self.cert.gamma()).norm() > GAMMA_TOL {
            return Err(Error::InvalidSpec("gamma does not match the certificate".into()));
        }
        if let (Some(p), Some(gp)) = (self.cert.p, odd_prime_of(&self.generator.origin)) {
            if p != gp {
                return Err(Error::InvalidSpec(format!("certificate uses p = {p}, generator uses p = {gp}")));
            }
        }
        Ok(())
    }

    pub fn gamma_matrix(&self) -> CMat {
        gamma_matrix(self.gamma, self.n)
    }

    /// Number of information symbols per codeword.
    pub fn info_len(&self) -> usize {
        let n = self.n;
        match self.variant {
            Variant::Full => n * self.delay,
            Variant::Diagonal | Variant::IntegralRestriction => n,
            Variant::Layered(k) => k * n,
            Variant::Truncated(_) => n * n,
        }
    }

    /// Transmit antennas used by a codeword.
    pub fn rows(&self) -> usize {
        match self.variant {
            Variant::Truncated(r) => r,
            _ => self.n,
        }
    }

    /// Codeword matrix for `info`, dispatching on the variant.
    pub fn encode(&self, info: &[Complex64]) -> Result<CMat> {
        let g = &self.generator.entries;
        let n = self.n;
        match self.variant {
            Variant::Full => {
                check_len(self.info_len(), info.len())?;
                if self.delay == n {
                    return encode_full(g, self.gamma, info);
                }
                let blocks = info.chunks(n * n).map(|f| encode_full(g, self.gamma, f)).collect::<Result<Vec<_>>>()?;
                stack_horizontal(&blocks)
            }
            Variant::Diagonal => diagonal_codeword(g, info),
            Variant::IntegralRestriction => integral_restriction(self.gamma, n, info),
            Variant::Layered(k) => layered_codeword(g, self.gamma, k, info),
            Variant::Truncated(r) => truncate_rows(&encode_full(g, self.gamma, info)?, r),
        }
    }

    pub fn codeword(&self, info: &[Complex64]) -> Result<CodeMatrix> {
        Ok(CodeMatrix {
            entries: self.encode(info)?,
            info: info.to_vec(),
            isometric: !matches!(self.variant, Variant::Truncated(_)),
        })
    }

    pub fn vectorization_matrix(&self) -> CMat {
        vectorization_matrix(&self.generator.entries, self.gamma)
    }

    pub fn ld_matrices(&self) -> Vec<CMat> {
        ld_matrices(&self.generator.entries, self.gamma)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn odd_prime_of(origin: &Origin) -> Option<u64> {
    match origin {
        Origin::OddDegree { p, .. } => Some(*p),
        Origin::Kronecker { left, right, .. } => odd_prime_of(left).or_else(|| odd_prime_of(right)),
        _ => None,
    }
}

pub const SPEC_FORMAT: &str = "perfect-stbc/spec-v1";

/// On-disk spec: certificate as exact integers, generator as full-precision
/// floats, so loading never re-runs a search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub format: String,
    #[serde(flatten)]
    pub spec: CodeSpec,
}

impl SpecFile {
    pub fn to_json(spec: &CodeSpec) -> String {
        let file = SpecFile { format: SPEC_FORMAT.to_string(), spec: spec.clone() };
        serde_json::to_string_pretty(&file).expect("spec serializes")
    }

    /// Parses and checks structure only; numeric properties are left to the
    /// verifier so a damaged generator is reported rather than rejected.
    pub fn from_json(text: &str) -> Result<CodeSpec> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        if file.format != SPEC_FORMAT {
            return Err(Error::InvalidSpec(format!("unsupported format '{}'", file.format)));
        }
        file.spec.check_structure()?;
        Ok(file.spec)
    }
}

impl CodeMatrix {
    /// One line per row, `re,im` pairs separated by commas.
    pub fn to_csv(&self) -> String {
        let m = &self.entries;
        let mut out = String::new();
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{},{}", m[(i, j)].re, m[(i, j)].im)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
