//! Property checks and figures of merit for assembled codes.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algint::validate_gamma;
use crate::codebook::{real_stacking, CodeSpec, Constellation, Variant};
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::lattices::{odd_lattice_ingredients, trace_orthogonality, Origin};
use crate::linalg::{self, CMat, ZERO};
use crate::rng::stream_rng;
use crate::FieldTag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitaryReport {
    pub defect: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Largest entry deviation of `M M^H` from `I`.
pub fn check_unitary(mat: &CMat, tol: f64) -> Result<UnitaryReport> {
    linalg::ensure_square(mat)?;
    let defect = linalg::unitarity_defect(mat);
    Ok(UnitaryReport { defect, tol, passed: defect <= tol })
}

/// Spacing of the difference alphabet used for minimum determinants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spacing {
    /// `{0, +-1, +-i, +-1+-i}` (QAM) or `{0}` plus the six units (HEX).
    UnitSpacing,
    /// The unit-spacing set scaled by 2: differences of odd-integer QAM.
    QamSpacing,
}

pub fn difference_values(field: FieldTag, spacing: Spacing) -> Vec<Complex64> {
    let base: Vec<(i64, i64)> = match field {
        FieldTag::Qam => {
            let mut v = vec![(0, 0)];
            v.extend((-1..=1).flat_map(|a| (-1..=1).map(move |b| (a, b))).filter(|&p| p != (0, 0)));
            v
        }
        FieldTag::Hex => {
            let mut v = vec![(0, 0)];
            v.extend_from_slice(crate::algint::Ring::EisensteinZw3.units());
            v
        }
    };
    let ring = crate::algint::Ring::for_field(field);
    let scale = match spacing {
        Spacing::UnitSpacing => 1.0,
        Spacing::QamSpacing => 2.0,
    };
    base.into_iter().map(|(a, b)| crate::algint::GaussLikeInt::new(a, b, ring).to_complex() * scale).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinDetReport {
    pub min_det: f64,
    pub argmin_delta: Vec<Complex64>,
    pub convention: Spacing,
    pub search_size: u64,
    /// False when the value is a Monte Carlo upper bound.
    pub exhaustive: bool,
}

/// Codewords of the unit information vectors, so any codeword is
/// `sum_k f_k basis[k]`.
pub fn basis_codewords(spec: &CodeSpec) -> Result<Vec<CMat>> {
    let len = spec.info_len();
    (0..len)
        .map(|k| {
            let mut e = vec![ZERO; len];
            e[k] = linalg::ONE;
            spec.encode(&e)
        })
        .collect()
}

fn combine(basis: &[CMat], f: &[Complex64]) -> CMat {
    let mut x = CMat::zeros(basis[0].nrows(), basis[0].ncols());
    for (b, &fk) in basis.iter().zip(f) {
        if fk != ZERO {
            x += b * fk;
        }
    }
    x
}

/// `det(D D^H)`, using `|det D|^2` when `D` is square.
pub fn gram_det(d: &CMat) -> f64 {
    if d.is_square() {
        d.clone().determinant().norm_sqr()
    } else {
        (d * d.adjoint()).determinant().re
    }
}

fn digits(mut index: u64, base: u64, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut() {
        *slot = (index % base) as usize;
        index /= base;
    }
    out
}

/// Exhaustive minimum of `det(dX dX^H)` over nonzero difference vectors
/// whose components come from the spacing's difference set.
pub fn min_det(spec: &CodeSpec, convention: Spacing, cap: u64) -> Result<MinDetReport> {
    let values = difference_values(spec.field(), convention);
    let len = spec.info_len();
    let size = (values.len() as f64).powi(len as i32);
    if size > cap as f64 {
        return Err(Error::SearchSpaceOverflow { size, cap });
    }
    let total = size as u64;
    let basis = basis_codewords(spec)?;
    let base = values.len() as u64;
    let (det, index) = (1..total)
        .into_par_iter()
        .map(|idx| {
            let f: Vec<Complex64> = digits(idx, base, len).into_iter().map(|d| values[d]).collect();
            (gram_det(&combine(&basis, &f)), idx)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or_else(|| Error::InvalidDimensions("empty difference set".into()))?;
    Ok(MinDetReport {
        min_det: det,
        argmin_delta: digits(index, base, len).into_iter().map(|d| values[d]).collect(),
        convention,
        search_size: total - 1,
        exhaustive: true,
    })
}

/// Sampled minimum over random nonzero difference vectors; an upper bound
/// on the true minimum.
pub fn min_det_monte_carlo(spec: &CodeSpec, convention: Spacing, samples: u64, seed: u64) -> Result<MinDetReport> {
    let values = difference_values(spec.field(), convention);
    let len = spec.info_len();
    let basis = basis_codewords(spec)?;
    let (det, f) = (0..samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, 0x6d64, t);
            let mut f: Vec<Complex64> = (0..len).map(|_| values[rng.random_range(0..values.len())]).collect();
            if f.iter().all(|z| *z == ZERO) {
                f[rng.random_range(0..len)] = values[1];
            }
            (gram_det(&combine(&basis, &f)), t, f)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(d, _, f)| (d, f))
        .ok_or_else(|| Error::InvalidConfig("Monte Carlo search needs at least one sample".into()))?;
    Ok(MinDetReport { min_det: det, argmin_delta: f, convention, search_size: samples, exhaustive: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PowerMode {
    /// Every codeword of the constellation.
    Exhaustive,
    /// Uniformly drawn codewords.
    MonteCarlo { trials: u64, seed: u64 },
    /// Closed form for i.i.d. zero-mean symbols: `E|s|^2 sum_k |B_k(i,j)|^2`.
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    /// Row-major average `|X_ij|^2`.
    pub entry_energy: Vec<Vec<f64>>,
    pub mean: f64,
    pub max_rel_deviation: f64,
    /// Largest standard error relative to the mean (Monte Carlo only).
    pub rel_sigma: Option<f64>,
    pub mode: PowerMode,
}

impl PowerReport {
    /// Exact modes: deviation at most `1e-9`; Monte Carlo: within `3 sigma`.
    pub fn passed(&self) -> bool {
        match self.rel_sigma {
            Some(sigma) => self.max_rel_deviation <= 3.0 * sigma,
            None => self.max_rel_deviation <= 1e-9,
        }
    }
}

/// Cap on codewords enumerated by [`PowerMode::Exhaustive`].
pub const POWER_EXHAUSTIVE_CAP: u64 = 1 << 22;

/// Average energy of every codeword entry and its largest relative spread.
pub fn power_uniformity(spec: &CodeSpec, constellation: &Constellation, mode: PowerMode) -> Result<PowerReport> {
    let basis = basis_codewords(spec)?;
    let (rows, cols) = basis[0].shape();
    let len = spec.info_len();
    let q = constellation.len() as u64;
    let accumulate = |acc: (Vec<f64>, Vec<f64>), x: CMat| {
        let (mut s1, mut s2) = acc;
        for (k, z) in x.iter().enumerate() {
            let e = z.norm_sqr();
            s1[k] += e;
            s2[k] += e * e;
        }
        (s1, s2)
    };
    let zero = || (vec![0.0; rows * cols], vec![0.0; rows * cols]);
    let merge = |a: (Vec<f64>, Vec<f64>), b: (Vec<f64>, Vec<f64>)| {
        (a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect(), a.1.iter().zip(&b.1).map(|(x, y)| x + y).collect())
    };

    let (means, rel_sigma): (Vec<f64>, Option<Vec<f64>>) = match mode {
        PowerMode::Analytic => {
            let es = constellation.energy();
            let mut m = vec![0.0; rows * cols];
            for b in &basis {
                for (k, z) in b.iter().enumerate() {
                    m[k] += es * z.norm_sqr();
                }
            }
            (m, None)
        }
        PowerMode::Exhaustive => {
            let total = (q as f64).powi(len as i32);
            if total > POWER_EXHAUSTIVE_CAP as f64 {
                return Err(Error::SearchSpaceOverflow { size: total, cap: POWER_EXHAUSTIVE_CAP });
            }
            let total = total as u64;
            let (s1, _) = (0..total)
                .into_par_iter()
                .map(|idx| {
                    let f: Vec<Complex64> = digits(idx, q, len).into_iter().map(|d| constellation.points[d]).collect();
                    combine(&basis, &f)
                })
                .fold(zero, accumulate)
                .reduce(zero, merge);
            (s1.iter().map(|s| s / total as f64).collect(), None)
        }
        PowerMode::MonteCarlo { trials, seed } => {
            if trials < 2 {
                return Err(Error::InvalidConfig("Monte Carlo power check needs at least two trials".into()));
            }
            let (s1, s2) = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream_rng(seed, 0x7077, t);
                    let f: Vec<Complex64> =
                        (0..len).map(|_| constellation.points[rng.random_range(0..q as usize)]).collect();
                    combine(&basis, &f)
                })
                .fold(zero, accumulate)
                .reduce(zero, merge);
            let nt = trials as f64;
            let means: Vec<f64> = s1.iter().map(|s| s / nt).collect();
            let se: Vec<f64> = s2
                .iter()
                .zip(&means)
                .map(|(s2, m)| ((s2 / nt - m * m).max(0.0) * nt / (nt - 1.0) / nt).sqrt())
                .collect();
            (means, Some(se))
        }
    };
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    let max_rel_deviation = means.iter().map(|m| (m - mean).abs() / mean).fold(0.0, f64::max);
    // nalgebra iterates column-major; report row-major
    let entry_energy = (0..rows).map(|i| (0..cols).map(|j| means[j * rows + i]).collect()).collect();
    Ok(PowerReport {
        entry_energy,
        mean,
        max_rel_deviation,
        rel_sigma: rel_sigma.map(|se| se.iter().fold(0.0, |a: f64, s| a.max(*s)) / mean),
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub snr: f64,
    pub r: f64,
    pub m: f64,
    pub nu_squared: f64,
}

/// `nu^2 = snr^(1 - r/m)`.
pub fn normalization(snr: f64, r: f64, m: f64) -> Result<NormalizationParams> {
    if !(snr > 0.0) || !(m > 0.0) || !(0.0..=m).contains(&r) {
        return Err(Error::InvalidConfig(format!("need snr > 0 and 0 <= r <= m, got snr={snr}, r={r}, m={m}")));
    }
    Ok(NormalizationParams { snr, r, m, nu_squared: snr.powf(1.0 - r / m) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetExponentRow {
    pub snr: f64,
    pub nu_squared: f64,
    /// `(nu^2)^n min_det`.
    pub scaled_det: f64,
    /// `log_snr(scaled_det)`.
    pub exponent: f64,
    /// `n - r`.
    pub target: f64,
}

/// Scaled minimum determinant against the `n - r` exponent, per SNR.
/// Informational: the target is only approached as SNR grows.
pub fn det_exponent_check(n: usize, min_det: f64, snr_list: &[f64], r: f64) -> Result<Vec<DetExponentRow>> {
    snr_list
        .iter()
        .map(|&snr| {
            let p = normalization(snr, r, n as f64)?;
            let scaled_det = p.nu_squared.powi(n as i32) * min_det;
            Ok(DetExponentRow {
                snr,
                nu_squared: p.nu_squared,
                scaled_det,
                exponent: scaled_det.ln() / snr.ln(),
                target: n as f64 - r,
            })
        })
        .collect()
}

/// Checks a verifier can run on a spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Gamma,
    Unitarity,
    RvUnitarity,
    Power,
    Isometry,
    Ld,
    Mindet,
    TraceOrthogonality,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::Gamma,
        CheckKind::Unitarity,
        CheckKind::RvUnitarity,
        CheckKind::Power,
        CheckKind::Isometry,
        CheckKind::Ld,
        CheckKind::Mindet,
        CheckKind::TraceOrthogonality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Gamma => "gamma",
            CheckKind::Unitarity => "unitarity",
            CheckKind::RvUnitarity => "rv-unitarity",
            CheckKind::Power => "power",
            CheckKind::Isometry => "isometry",
            CheckKind::Ld => "ld",
            CheckKind::Mindet => "mindet",
            CheckKind::TraceOrthogonality => "trace-orthogonality",
        }
    }

    /// Parses a comma-separated list; `all` selects every check.
    pub fn parse_list(s: &str) -> Result<Vec<CheckKind>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                return Ok(Self::ALL.to_vec());
            }
            let kind = Self::ALL
                .into_iter()
                .find(|k| k.name() == part)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown check '{part}'")))?;
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig("no checks selected".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
    /// Present when the mindet check ran.
    pub min_det: Option<MinDetReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

const TOL: f64 = 1e-10;

/// Runs the selected checks. Structural properties of `(G, gamma)` are
/// checked on the square full-rate code; `mindet` uses the spec's variant.
pub fn verify(spec: &CodeSpec, checks: &[CheckKind], cfg: &SearchConfig) -> Result<VerifyReport> {
    let full = spec.with_variant(Variant::Full, None)?;
    let mut outcomes = Vec::new();
    let mut min_det_report = None;
    for &check in checks {
        let (passed, detail) = match check {
            CheckKind::Gamma => {
                let report = validate_gamma(&spec.cert);
                let magnitude_ok =
                    (spec.gamma.norm() - 1.0).abs() <= 1e-12 && (spec.gamma - spec.cert.gamma()).norm() <= 1e-12;
                let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
                (
                    report.all_passed() && magnitude_ok,
                    if failed.is_empty() && magnitude_ok {
                        format!("gamma = ({})/({}), q = {}", spec.cert.gamma_num, spec.cert.gamma_den, spec.cert.q)
                    } else {
                        format!("failed: {failed:?}, |gamma| = {}", spec.gamma.norm())
                    },
                )
            }
            CheckKind::Unitarity => {
                let r = check_unitary(&spec.generator.entries, TOL)?;
                (r.passed, format!("defect {:.3e}", r.defect))
            }
            CheckKind::RvUnitarity => {
                let rv = full.vectorization_matrix();
                let complex = check_unitary(&rv, TOL)?;
                let real = real_stacking(&rv);
                let real_defect =
                    (&real * real.transpose() - nalgebra::DMatrix::identity(real.nrows(), real.nrows())).amax();
                (
                    complex.passed && real_defect <= TOL,
                    format!("R_v defect {:.3e}, real stacking defect {:.3e}", complex.defect, real_defect),
                )
            }
            CheckKind::Power => {
                let c = constellation_for(spec.field())?;
                let r = power_uniformity(&full, &c, PowerMode::Analytic)?;
                (r.passed(), format!("max relative deviation {:.3e}", r.max_rel_deviation))
            }
            CheckKind::Isometry => {
                let worst = isometry_defect(&full, 200, 7)?;
                (worst <= 1e-9, format!("max relative error {worst:.3e}"))
            }
            CheckKind::Ld => {
                let worst = full
                    .ld_matrices()
                    .iter()
                    .map(|a| linalg::max_abs(&(a.adjoint() * a - CMat::identity(spec.n, spec.n))))
                    .fold(0.0, f64::max);
                (worst <= TOL, format!("max Gram defect {worst:.3e}"))
            }
            CheckKind::Mindet => {
                let report = match min_det(spec, Spacing::UnitSpacing, cfg.exhaustive_cap) {
                    Ok(r) => r,
                    Err(Error::SearchSpaceOverflow { .. }) => {
                        min_det_monte_carlo(spec, Spacing::UnitSpacing, 20_000, 1)?
                    }
                    Err(e) => return Err(e),
                };
                let out = (
                    report.min_det > 1e-9,
                    format!(
                        "min det {} ({}, {} vectors)",
                        report.min_det,
                        if report.exhaustive { "exhaustive" } else { "sampled upper bound" },
                        report.search_size
                    ),
                );
                min_det_report = Some(report);
                out
            }
            CheckKind::TraceOrthogonality => trace_check(&spec.generator.origin, cfg)?,
        };
        outcomes.push(CheckOutcome { check, passed, detail });
    }
    Ok(VerifyReport { outcomes, min_det: min_det_report })
}

fn trace_check(origin: &Origin, cfg: &SearchConfig) -> Result<(bool, String)> {
    fn odd_n1(o: &Origin) -> Option<u64> {
        match o {
            Origin::OddDegree { n1, .. } => Some(*n1),
            Origin::Kronecker { left, right, .. } => odd_n1(left).or_else(|| odd_n1(right)),
            _ => None,
        }
    }
    let Some(n1) = odd_n1(origin) else {
        return Ok((true, "no odd-degree factor".into()));
    };
    let ing = odd_lattice_ingredients(n1, cfg)?;
    let p2 = (ing.p * ing.p) as f64;
    let worst = (0..n1 as usize)
        .map(|t| {
            let target = if t == 0 { p2 } else { 0.0 };
            (trace_orthogonality(&ing, t) - Complex64::new(target, 0.0)).norm() / p2
        })
        .fold(0.0, f64::max);
    Ok((worst <= 1e-8, format!("n1 = {n1}, p = {}, max relative error {worst:.3e}", ing.p)))
}

/// The QAM or HEX alphabet used by default checks: 4-QAM or the seven
/// Eisenstein points of the unit disk.
pub fn constellation_for(field: FieldTag) -> Result<Constellation> {
    match field {
        FieldTag::Qam => Constellation::qam(2),
        FieldTag::Hex => Constellation::hex(1.0),
    }
}

/// Largest `|Tr(X^H X) - |f|^2| / |f|^2` over seeded Gaussian inputs.
pub fn isometry_defect(spec: &CodeSpec, samples: u64, seed: u64) -> Result<f64> {
    let len = spec.info_len();
    let mut worst: f64 = 0.0;
    for t in 0..samples {
        let mut rng = stream_rng(seed, 0x6973, t);
        let f: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        let x = spec.encode(&f)?;
        let fe: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        if fe > 0.0 {
            worst = worst.max((linalg::frobenius_sq(&x) - fe).abs() / fe);
        }
    }
    Ok(worst)
}
