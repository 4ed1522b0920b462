//! `perfectst`: construct, verify and simulate perfect space-time codes.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or I/O
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use perfect_stbc::analysis::{verify, CheckKind, VerifyReport};
use perfect_stbc::codebook::{CodeSpec, Constellation, SpecFile, Variant};
use perfect_stbc::sim::{monte_carlo, ChannelConfig, DecoderTag, Fading};
use perfect_stbc::{FieldTag, SearchConfig};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const CODE_DIGEST: &str = env!("PERFECTST_CODE_DIGEST");

#[derive(Parser)]
#[command(name = "perfectst", version, about = "Perfect space-time block codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code and write its spec file.
    Construct(ConstructArgs),
    /// Check a spec file; exits 1 if any selected check fails.
    Verify(VerifyArgs),
    /// Monte Carlo error rates over an i.i.d. Rayleigh channel.
    Simulate(SimulateArgs),
    /// Print the generator and gamma of a spec file.
    Show { spec: PathBuf },
}

#[derive(Args)]
struct ConstructArgs {
    /// Number of transmit antennas.
    #[arg(long, required_unless_present = "example")]
    n: Option<usize>,
    #[arg(long, default_value = "qam")]
    field: FieldTag,
    /// full, diag, ir, layered:k or truncated:r
    #[arg(long, default_value = "full")]
    variant: Variant,
    /// Code length T; defaults to n.
    #[arg(long)]
    delay: Option<usize>,
    /// Use the 2x2 worked example (basis {1, w8^3}, gamma = (2+i)/(1+2i)).
    #[arg(long, conflicts_with_all = ["n", "field"])]
    example: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    spec: PathBuf,
    /// Comma-separated check names, or "all".
    #[arg(long, default_value = "all")]
    checks: String,
    /// Optional JSON report; a manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    spec: PathBuf,
    /// qam:M (M total points) or hex:R (Eisenstein points of norm radius R);
    /// defaults to qam:4 or hex:1 by field.
    #[arg(long)]
    constellation: Option<String>,
    /// SNR sweep in dB, either a:b:step or a comma-separated list.
    #[arg(long, default_value = "0:20:5")]
    snr: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Receive antennas; defaults to the number of transmit antennas.
    #[arg(long)]
    nr: Option<usize>,
    /// sphere or ml
    #[arg(long, default_value = "sphere")]
    decoder: DecoderTag,
    /// CSV output; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Checks,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    code_digest: &'a str,
    command: &'a str,
    parameters: Value,
    search_config: SearchConfig,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn digest_of(path: &Path, bytes: &[u8]) -> FileDigest {
    FileDigest { path: path.display().to_string(), sha256: sha256_hex(bytes) }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_with_manifest(
    out: &Path,
    contents: &str,
    command: &str,
    parameters: Value,
    cfg: &SearchConfig,
    inputs: Vec<FileDigest>,
) -> Result<(), Failure> {
    write_file(out, contents)?;
    let manifest = Manifest {
        tool: "perfectst",
        version: env!("CARGO_PKG_VERSION"),
        code_digest: CODE_DIGEST,
        command,
        parameters,
        search_config: *cfg,
        inputs,
        outputs: vec![digest_of(out, contents.as_bytes())],
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(&manifest_path(out), &text)
}

fn load_spec(path: &Path) -> Result<(CodeSpec, Vec<u8>), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))?;
    let spec = SpecFile::from_json(text)?;
    Ok((spec, bytes))
}

fn construct(args: &ConstructArgs, cfg: &SearchConfig) -> Result<(), Failure> {
    let spec = if args.example {
        CodeSpec::example_2x2().with_variant(args.variant, args.delay)?
    } else {
        let n = args.n.expect("clap enforces --n");
        CodeSpec::construct(n, args.field, args.variant, args.delay, cfg)?
    };
    let c = &spec.cert;
    println!("n = {}, field = {}, variant = {}, delay = {}", spec.n, spec.field(), spec.variant, spec.delay);
    println!("gamma = ({})/({}) = {:.12}{:+.12}i", c.gamma_num, c.gamma_den, spec.gamma.re, spec.gamma.im);
    match c.p {
        Some(p) => println!("p = {p}, q = {}, pi1 = {}", c.q, c.pi1),
        None => println!("p = none, q = {}, pi1 = {}", c.q, c.pi1),
    }
    println!("unitarity defect = {:.3e}", spec.generator.unitarity_defect);
    let params = json!({
        "n": spec.n,
        "field": spec.field().to_string(),
        "variant": spec.variant.to_string(),
        "delay": spec.delay,
        "example": args.example,
    });
    write_with_manifest(&args.out, &(SpecFile::to_json(&spec) + "\n"), "construct", params, cfg, vec![])?;
    println!("wrote {}", args.out.display());
    Ok(())
}

/// `0.05` prints as `1/20`; other values print as `None`.
fn as_unit_fraction(x: f64) -> Option<u64> {
    if x <= 0.0 || x > 1.0 {
        return None;
    }
    let k = (1.0 / x).round();
    ((1.0 / x - k).abs() <= 1e-9 * k).then_some(k as u64)
}

fn print_report(report: &VerifyReport) {
    for o in &report.outcomes {
        println!("{} {:<20} {}", if o.passed { "PASS" } else { "FAIL" }, o.check.name(), o.detail);
    }
    if let Some(m) = &report.min_det {
        match as_unit_fraction(m.min_det) {
            Some(k) => println!("min det = 1/{k} ({:?})", m.convention),
            None => println!("min det = {} ({:?})", m.min_det, m.convention),
        }
    }
}

fn run_verify(args: &VerifyArgs, cfg: &SearchConfig) -> Result<(), Failure> {
    let (spec, bytes) = load_spec(&args.spec)?;
    let checks = CheckKind::parse_list(&args.checks)?;
    let report = verify(&spec, &checks, cfg)?;
    print_report(&report);
    if let Some(out) = &args.out {
        let names: Vec<&str> = checks.iter().map(|c| c.name()).collect();
        let params = json!({ "spec": args.spec.display().to_string(), "checks": names });
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        write_with_manifest(out, &text, "verify", params, cfg, vec![digest_of(&args.spec, &bytes)])?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn parse_snr(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("bad SNR sweep '{s}', expected a:b:step or a list"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let (a, b, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|k| a + k as f64 * step).collect());
    }
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn parse_constellation(s: &str) -> Result<Constellation, Failure> {
    match s.split_once(':') {
        Some(("qam", m)) => {
            Ok(Constellation::qam_total(m.parse().map_err(|_| Failure::Usage(format!("bad QAM size '{m}'")))?)?)
        }
        Some(("hex", r)) => {
            Ok(Constellation::hex(r.parse().map_err(|_| Failure::Usage(format!("bad HEX radius '{r}'")))?)?)
        }
        _ => Err(Failure::Usage(format!("unknown constellation '{s}', expected qam:M or hex:R"))),
    }
}

fn simulate(args: &SimulateArgs, cfg: &SearchConfig) -> Result<(), Failure> {
    let (spec, bytes) = load_spec(&args.spec)?;
    let constellation = args.constellation.clone().unwrap_or_else(|| match spec.field() {
        FieldTag::Qam => "qam:4".into(),
        FieldTag::Hex => "hex:1".into(),
    });
    let c = parse_constellation(&constellation)?;
    let channel = ChannelConfig {
        n: spec.rows(),
        nr: args.nr.unwrap_or(spec.rows()),
        fading: Fading::RayleighIid,
        snr_db_list: parse_snr(&args.snr)?,
        trials: args.trials,
        seed: args.seed,
    };
    let result = monte_carlo(&channel, &spec, &c, args.decoder)?;
    let params = json!({
        "spec": args.spec.display().to_string(),
        "spec_digest": spec.digest(),
        "constellation": constellation,
        "snr_db": channel.snr_db_list,
        "trials": channel.trials,
        "seed": channel.seed,
        "nr": channel.nr,
        "fading": "rayleigh-iid",
        "decoder": args.decoder,
    });
    let csv = result.to_csv();
    write_with_manifest(&args.out, &csv, "simulate", params, cfg, vec![digest_of(&args.spec, &bytes)])?;
    print!("{csv}");
    Ok(())
}

fn show(path: &Path) -> Result<(), Failure> {
    let (spec, _) = load_spec(path)?;
    println!("gamma = ({})/({})", spec.cert.gamma_num, spec.cert.gamma_den);
    println!("generator ({:?}):", spec.generator.origin);
    print!("{}", perfect_stbc::linalg::format_matrix(&spec.generator.entries));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = SearchConfig::from_env();
    let outcome = match &cli.command {
        Command::Construct(a) => construct(a, &cfg),
        Command::Verify(a) => run_verify(a, &cfg),
        Command::Simulate(a) => simulate(a, &cfg),
        Command::Show { spec } => show(spec),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
