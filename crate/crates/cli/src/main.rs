use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use vldp_core::credential::{issue, Attestation, IssuerKey, IssuerRegistry};
use vldp_core::mechanisms::{delta_ledger, exponential_noise, BiasTable, NoiseParams, TruthfulValue};
use vldp_core::oracle::{BindingKeyPair, BitArray, Challenge};
use vldp_core::protocol::{aggregate, create_request, ProofRequest, Prover, SurveyConfig, SurveyResponse, Verifier};
use vldp_core::stats::{
    chi_square_fit, distribution_csv, dp_ratio_check, exact_distribution, histogram_csv, histogram_mode, tally,
};
use vldp_core::{FieldElement, Mechanism};

/// Verifiable local-DP polling: credentials, survey requests, responses,
/// verification, and exact analysis of the noise mechanism.
#[derive(Parser)]
#[command(name = "vldp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a participant binding key pair.
    Keygen {
        #[command(flatten)]
        out: Output,
        #[command(flatten)]
        seed: Seed,
    },
    /// Generate an issuer key.
    IssuerKeygen {
        #[arg(long)]
        id: String,
        #[command(flatten)]
        out: Output,
        #[command(flatten)]
        seed: Seed,
    },
    /// Build a registry of trusted issuers from issuer key files.
    Registry {
        #[arg(long = "issuer", required = true)]
        issuers: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Issue a credential over `name=value` attributes to a key pair.
    Issue {
        #[arg(long)]
        issuer: PathBuf,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long = "attr", required = true, value_parser = parse_attr)]
        attrs: Vec<(String, i64)>,
        #[arg(long, default_value_t = vldp_core::credential::DEFAULT_DEPTH)]
        depth: usize,
        #[command(flatten)]
        out: Output,
        #[command(flatten)]
        seed: Seed,
    },
    /// Turn a survey config into a proof request.
    Request {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Answer a proof request; appends one JSON line to `--out`.
    Respond {
        #[arg(long)]
        request: PathBuf,
        #[arg(long)]
        credential: PathBuf,
        #[arg(long)]
        keys: PathBuf,
        /// Own challenge (hex); only for per-response surveys.
        #[arg(long)]
        challenge: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Verify JSON-lines responses; exits 1 if any is rejected.
    Verify {
        #[command(flatten)]
        input: SurveyInput,
        #[command(flatten)]
        out: Output,
    },
    /// Verify and tally JSON-lines responses.
    Aggregate {
        #[command(flatten)]
        input: SurveyInput,
        #[command(flatten)]
        out: Output,
    },
    /// Exact and sampled analysis of the noise mechanism.
    Stats(StatsArgs),
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Seed {
    /// Seed for reproducible keys and salts; OS entropy when absent.
    #[arg(long)]
    seed: Option<u64>,
}

impl Seed {
    fn rng(&self) -> ChaCha8Rng {
        match self.seed {
            Some(s) => ChaCha8Rng::seed_from_u64(s),
            None => ChaCha8Rng::from_entropy(),
        }
    }
}

#[derive(Args)]
struct SurveyInput {
    #[arg(long)]
    request: PathBuf,
    #[arg(long)]
    registry: PathBuf,
    #[arg(long)]
    responses: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Survey config or bare noise parameters `{epsilon, l, u, d}`.
    #[arg(long)]
    config: PathBuf,
    /// Truthful input.
    #[arg(long)]
    value: i64,
    /// Include the exact output distribution.
    #[arg(long)]
    exact: bool,
    /// Run the exact DP check over all input pairs.
    #[arg(long)]
    dp_check: bool,
    /// Sample the mechanism and fit against the exact distribution.
    #[arg(long)]
    chi2: bool,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the sampled histogram (with `--chi2`) or exact
    /// distribution as CSV.
    #[arg(long)]
    histogram_csv: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

fn parse_attr(s: &str) -> Result<(String, i64), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    let value = value.parse().map_err(|e| format!("bad value `{value}`: {e}"))?;
    Ok((name.to_string(), value))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Output, value: &T) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?)
}

fn append_line(out: &Output, line: &str) -> Result<()> {
    match &out.out {
        Some(p) => {
            let mut f = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .with_context(|| format!("opening {}", p.display()))?;
            writeln!(f, "{line}")?;
            Ok(())
        }
        None => {
            println!("{line}");
            Ok(())
        }
    }
}

fn read_responses(path: &Path) -> Result<Vec<SurveyResponse>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    io::BufReader::new(f)
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(l) if l.trim().is_empty()))
        .map(|(i, l)| SurveyResponse::from_json_line(&l?).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

fn load_survey(input: &SurveyInput) -> Result<(ProofRequest, IssuerRegistry, Vec<SurveyResponse>)> {
    let text = fs::read_to_string(&input.request).with_context(|| format!("reading {}", input.request.display()))?;
    let request = ProofRequest::from_json(&text)?;
    Ok((request, read_json(&input.registry)?, read_responses(&input.responses)?))
}

/// Noise parameters from a survey config or a bare parameter file.
fn load_params(path: &Path) -> Result<NoiseParams> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("survey_id").is_some() {
        let config: SurveyConfig = serde_json::from_value(value)?;
        match create_request(&config)?.mechanism {
            Mechanism::Exponential { params } => Ok(params),
            Mechanism::Rr => bail!("stats needs an exponential-noise survey"),
        }
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

#[derive(Serialize)]
struct StatsReport {
    params: NoiseParams,
    value: i64,
    exact_mode: i64,
    delta_ledger: vldp_core::mechanisms::DeltaLedgerReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dp_check: Option<vldp_core::stats::DpCheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi2: Option<SampleReport>,
}

#[derive(Serialize)]
struct SampleReport {
    samples: u64,
    seed: u64,
    histogram_mode: i64,
    fit: vldp_core::stats::ChiSquareFit,
}

fn stats(a: &StatsArgs) -> Result<()> {
    let params = load_params(&a.config)?;
    let table = BiasTable::new(&params)?;
    let dist = exact_distribution(a.value, &params, &table)?;
    let dp_check = if a.dp_check {
        Some(dp_ratio_check(&params, &table, &params.epsilon().to_rational())?)
    } else {
        None
    };
    let (chi2, csv) = if a.chi2 {
        let value = TruthfulValue::numeric(a.value, &params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let samples = (0..a.samples)
            .map(|_| {
                exponential_noise(
                    value,
                    &params,
                    &table,
                    &BitArray::random(&mut rng, params.required_bits()),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let counts = tally(&samples, &params);
        let report = SampleReport {
            samples: a.samples,
            seed: a.seed,
            histogram_mode: histogram_mode(&counts, &params),
            fit: chi_square_fit(&counts, &dist)?,
        };
        (Some(report), histogram_csv(&counts, &params))
    } else {
        (None, distribution_csv(&dist))
    };
    if let Some(p) = &a.histogram_csv {
        fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
    }
    let report = StatsReport {
        exact_mode: dist.mode(),
        delta_ledger: delta_ledger(&params, &table).report(),
        exact: a.exact.then(|| dist.probabilities_f64()),
        dp_check,
        chi2,
        params,
        value: a.value,
    };
    emit_json(&a.out, &report)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Keygen { out, seed } => emit_json(&out, &BindingKeyPair::generate(&mut seed.rng()))?,
        Command::IssuerKeygen { id, out, seed } => emit_json(&out, &IssuerKey::generate(&id, &mut seed.rng()))?,
        Command::Registry { issuers, out } => {
            let mut registry = IssuerRegistry::new();
            for p in &issuers {
                registry.trust(&read_json::<IssuerKey>(p)?);
            }
            emit_json(&out, &registry)?;
        }
        Command::Issue {
            issuer,
            keys,
            attrs,
            depth,
            out,
            seed,
        } => {
            let issuer: IssuerKey = read_json(&issuer)?;
            let keys: BindingKeyPair = read_json(&keys)?;
            let att = issue(&attrs, keys.pk, &issuer, depth, &mut seed.rng())?;
            emit(&out, &att.to_json())?;
        }
        Command::Request { config, out } => {
            let config: SurveyConfig = read_json(&config)?;
            emit(&out, &create_request(&config)?.to_json())?;
        }
        Command::Respond {
            request,
            credential,
            keys,
            challenge,
            out,
        } => {
            let request = ProofRequest::from_json(&fs::read_to_string(&request)?)?;
            let att = Attestation::from_json(&fs::read_to_string(&credential)?)?;
            let keys: BindingKeyPair = read_json(&keys)?;
            let prover = Prover::new(&request)?;
            let response = match challenge {
                Some(c) => {
                    let c = FieldElement::from_hex(&c).map_err(|e| anyhow!("bad challenge: {e}"))?;
                    prover.respond_with_challenge(&att, keys.sk, Challenge(c))?
                }
                None => prover.respond(&att, keys.sk)?,
            };
            append_line(&out, &response.to_json_line())?;
        }
        Command::Verify { input, out } => {
            let (request, registry, responses) = load_survey(&input)?;
            let verifier = Verifier::new(&request, &registry)?;
            let verdicts: Vec<_> = responses.iter().map(|r| verifier.verify(r)).collect();
            let rejected = verdicts.iter().filter(|v| !v.is_accept()).count();
            let lines = verdicts
                .iter()
                .map(serde_json::to_string)
                .collect::<Result<Vec<_>, _>>()?;
            emit(&out, &lines.join("\n"))?;
            eprintln!("{} accepted, {rejected} rejected", verdicts.len() - rejected);
            if rejected > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Aggregate { input, out } => {
            let (request, registry, responses) = load_survey(&input)?;
            let verifier = Verifier::new(&request, &registry)?;
            let verdicts: Vec<_> = responses.iter().map(|r| verifier.verify(r)).collect();
            emit_json(&out, &aggregate(&request, &verdicts))?;
        }
        Command::Stats(a) => stats(&a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
