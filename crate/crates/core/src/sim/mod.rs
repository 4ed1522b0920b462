//! Monte Carlo link simulation over i.i.d. Rayleigh fading.

mod decoder;

pub use decoder::{metric, ml_decode_exhaustive, sphere_decode, RadiusPolicy, SphereOutcome, ML_CAP};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::basis_codewords;
use crate::codebook::{CodeSpec, Constellation};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fading {
    RayleighIid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n: usize,
    pub nr: usize,
    pub fading: Fading,
    pub snr_db_list: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() {
            return Err(Error::InvalidConfig("SNR list is empty".into()));
        }
        if self.n == 0 || self.nr == 0 {
            return Err(Error::InvalidConfig("antenna counts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderTag {
    /// Exhaustive maximum likelihood.
    Ml,
    Sphere,
}

impl std::str::FromStr for DecoderTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml" | "exhaustive" => Ok(DecoderTag::Ml),
            "sphere" => Ok(DecoderTag::Sphere),
            _ => Err(Error::InvalidConfig(format!("unknown decoder '{s}'"))),
        }
    }
}

/// Circularly symmetric unit-variance Gaussian.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * h, im * h)
}

/// `nr x n` matrix of i.i.d. `CN(0, 1)` entries.
pub fn channel_sample<R: Rng>(nr: usize, n: usize, rng: &mut R) -> CMat {
    CMat::from_fn(nr, n, |_, _| complex_gaussian(rng))
}

/// `Y = nu H X + W`.
pub fn transmit(x: &CMat, h: &CMat, nu: f64, w: &CMat) -> CMat {
    h * x * Complex64::new(nu, 0.0) + w
}

/// The linear map from symbols to the codeword, with the signal energy
/// statistics needed for SNR calibration.
#[derive(Debug, Clone)]
pub struct LinearCode {
    pub basis: Vec<CMat>,
    pub rows: usize,
    pub delay: usize,
    /// `E|X|_F^2` for i.i.d. uniform symbols.
    pub mean_energy: f64,
}

impl LinearCode {
    pub fn new(spec: &CodeSpec, c: &Constellation) -> Result<Self> {
        let basis = basis_codewords(spec)?;
        let (rows, delay) = basis[0].shape();
        let mean_symbol: Complex64 = c.points.iter().sum::<Complex64>() / c.len() as f64;
        if mean_symbol.norm() > 1e-9 {
            return Err(Error::InvalidConfig("constellation must have zero mean".into()));
        }
        let mean_energy = c.energy() * basis.iter().map(linalg::frobenius_sq).sum::<f64>();
        Ok(Self { basis, rows, delay, mean_energy })
    }

    /// `nu^2 = snr T / E|X|_F^2`, so the average received signal energy per
    /// receive antenna and channel use equals `snr`.
    pub fn nu(&self, snr: f64) -> f64 {
        (snr * self.delay as f64 / self.mean_energy).sqrt()
    }

    pub fn codeword(&self, f: &[Complex64]) -> CMat {
        let mut x = CMat::zeros(self.rows, self.delay);
        for (b, &fk) in self.basis.iter().zip(f) {
            x += b * fk;
        }
        x
    }

    /// Columns `vec(nu H B_k)`, so `vec(nu H X) = A f`.
    pub fn effective(&self, h: &CMat, nu: f64) -> CMat {
        let rows = h.nrows() * self.delay;
        let mut a = CMat::zeros(rows, self.basis.len());
        for (k, b) in self.basis.iter().enumerate() {
            let hb = h * b * Complex64::new(nu, 0.0);
            for (r, z) in hb.iter().enumerate() {
                a[(r, k)] = *z;
            }
        }
        a
    }
}

/// Effective matrix for a spec and channel.
pub fn effective_matrix(spec: &CodeSpec, c: &Constellation, h: &CMat, snr: f64) -> Result<CMat> {
    let code = LinearCode::new(spec, c)?;
    Ok(code.effective(h, code.nu(snr)))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Wilson score interval for `k` successes in `n` trials, `z = 1.96`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let (kf, nf) = (k as f64, n as f64);
    let p = kf / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub codeword_errors: u64,
    pub bit_errors: u64,
    pub error_rate: f64,
    pub bit_rate: f64,
    pub wilson_interval: (f64, f64),
    /// Total sphere-decoder nodes visited (zero for exhaustive ML).
    pub visited_nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub points: Vec<SnrPoint>,
    pub decoder: DecoderTag,
    pub spec_digest: String,
    pub seed: u64,
    pub nr: usize,
}

impl SimResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,trials,cw_errors,cw_rate,ci_lo,ci_hi,bit_rate\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.snr_db,
                p.trials,
                p.codeword_errors,
                p.error_rate,
                p.wilson_interval.0,
                p.wilson_interval.1,
                p.bit_rate
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Outcome of one simulated transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub codeword_error: bool,
    pub bit_errors: u64,
    pub visited: u64,
}

/// One trial: draw symbols, channel and noise from the trial's stream,
/// transmit, decode and compare.
pub fn run_trial(
    code: &LinearCode,
    c: &Constellation,
    nr: usize,
    snr: f64,
    decoder: DecoderTag,
    rng: &mut impl Rng,
) -> Result<TrialOutcome> {
    let len = code.basis.len();
    let sent: Vec<usize> = (0..len).map(|_| rng.random_range(0..c.len())).collect();
    let f: Vec<Complex64> = sent.iter().map(|&i| c.points[i]).collect();
    let h = channel_sample(nr, code.rows, rng);
    let w = CMat::from_fn(nr, code.delay, |_, _| complex_gaussian(rng));
    let nu = code.nu(snr);
    let y = transmit(&code.codeword(&f), &h, nu, &w);
    let a = code.effective(&h, nu);
    let yv = linalg::vec_cols(&y);
    let (got, visited) = match decoder {
        DecoderTag::Ml => (ml_decode_exhaustive(&yv, &a, c, ML_CAP)?, 0),
        DecoderTag::Sphere => {
            let out = sphere_decode(&yv, &a, c, RadiusPolicy::Infinite);
            (out.indices, out.visited)
        }
    };
    let bit_errors = sent.iter().zip(&got).map(|(&s, &g)| c.bit_errors(s, g) as u64).sum();
    Ok(TrialOutcome { codeword_error: sent != got, bit_errors, visited })
}

/// Error-rate sweep; a pure function of its arguments whatever the thread
/// count, since trial `t` at SNR index `i` always uses stream `(seed, i, t)`.
pub fn monte_carlo(cfg: &ChannelConfig, spec: &CodeSpec, c: &Constellation, decoder: DecoderTag) -> Result<SimResult> {
    cfg.validate()?;
    if cfg.n != spec.rows() {
        return Err(Error::InvalidConfig(format!(
            "channel has {} transmit antennas, code uses {}",
            cfg.n,
            spec.rows()
        )));
    }
    let code = LinearCode::new(spec, c)?;
    if decoder == DecoderTag::Ml {
        let size = (c.len() as f64).powi(code.basis.len() as i32);
        if size > ML_CAP as f64 {
            return Err(Error::CodebookTooLarge { size, cap: ML_CAP });
        }
    }
    let bits_per_cw = c.bits_per_symbol() as u64 * code.basis.len() as u64;
    let mut points = Vec::with_capacity(cfg.snr_db_list.len());
    for (si, &snr_db) in cfg.snr_db_list.iter().enumerate() {
        let snr = db_to_linear(snr_db);
        let totals = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(cfg.seed, si as u64, t);
                run_trial(&code, c, cfg.nr, snr, decoder, &mut rng)
            })
            .try_fold(
                || (0u64, 0u64, 0u64),
                |acc, out| out.map(|o| (acc.0 + o.codeword_error as u64, acc.1 + o.bit_errors, acc.2 + o.visited)),
            )
            .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;
        let (errors, bit_errors, visited) = totals;
        points.push(SnrPoint {
            snr_db,
            trials: cfg.trials,
            codeword_errors: errors,
            bit_errors,
            error_rate: errors as f64 / cfg.trials as f64,
            bit_rate: bit_errors as f64 / (bits_per_cw * cfg.trials) as f64,
            wilson_interval: wilson_interval(errors, cfg.trials),
            visited_nodes: visited,
        });
    }
    Ok(SimResult { points, decoder, spec_digest: spec.digest(), seed: cfg.seed, nr: cfg.nr })
}
