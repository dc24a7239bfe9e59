mod config;
mod manifest;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use powindex::chow_inverse::{chow_asymptotic_parameters, reconstruct_partial_chow, ChowReconConfig, VerifyMode};
use powindex::dshap::DShapSampler;
use powindex::indices::{
    chow_estimate, chow_exact, chow_pbiased_exact, coordinate_correlation_pbiased, d_chow, d_chow_partial,
    d_hamming, d_shapley, d_shapley_partial, hermite_degree1_estimate, shapley_dp, shapley_estimate,
    shapley_exact, IndexKind, SHAPLEY_ENUMERATION_CAP,
};
use powindex::io::{self, IndexFile, LoadedGame};
use powindex::selftest;
use powindex::shapley_inverse::{
    reconstruct_partial_shapley, shapley_asymptotic_parameters, ParameterForm, ShapReconConfig,
};
use powindex::{Indices, Ltf, PartialIndices, DEFAULT_ENUMERATION_CAP};

use config::FileConfig;
use manifest::{sha256_hex, InputDigest, OutputRecord, RunManifest};

#[derive(Parser)]
#[command(name = "powindex", version, about = "Power indices and inverse power index problems for weighted voting games")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key = value` settings; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write a JSON run manifest (inputs, settings, output digests) here.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an index vector of a game.
    Indices(IndicesArgs),
    /// Estimate an index vector by sampling (same as `indices --estimate`).
    Estimate(IndicesArgs),
    /// Find a game whose partial index vector is close to the given one.
    Reconstruct {
        #[command(subcommand)]
        target: ReconTarget,
    },
    /// Draw strings from the Shapley distribution.
    SampleDshap(SampleArgs),
    /// Distance between two games or index files.
    Distance(DistanceArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    /// Chow parameters; with `--p`, the p-biased ones.
    Chow,
    Shapley,
    /// Coordinate correlations E_p[f(x) x_i] (needs `--p`).
    Corr,
    /// Degree-1 Hermite coefficients (estimate only).
    Hermite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct IndicesArgs {
    /// Game JSON file.
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Bias of the product distribution.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, conflicts_with = "estimate")]
    exact: bool,
    #[arg(long)]
    estimate: bool,
    /// Positions to estimate (Chow), comma separated; default all.
    #[arg(long)]
    positions: Option<String>,
    /// Per-set accuracy of Chow estimates.
    #[arg(long)]
    eps: Option<f64>,
    /// ℓ₂ accuracy of Shapley estimates.
    #[arg(long)]
    gamma: Option<f64>,
    /// Failure probability of estimates.
    #[arg(long)]
    delta: Option<f64>,
    /// Sample count for Hermite estimates.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ReconTarget {
    /// From partial Chow parameters.
    Chow(ReconArgs),
    /// From partial Shapley indices.
    Shapley(ReconArgs),
}

#[derive(Args)]
struct ReconArgs {
    /// Index JSON file (partial, or full to use every position).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of players; checked against the input.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Verify candidates exactly (default).
    #[arg(long, conflicts_with = "sampled")]
    exact: bool,
    /// Verify candidates by sampling.
    #[arg(long)]
    sampled: bool,
    /// Print the literal asymptotic parameters and exit without solving.
    #[arg(long)]
    paper_exact: bool,
    /// Parameter form reported by `--paper-exact` for Shapley.
    #[arg(long, value_enum)]
    form: Option<FormArg>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
enum FormArg {
    Direct,
    ViaTau,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(short, long)]
    n: usize,
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
enum Metric {
    Hamming,
    Chow,
    Shapley,
}

#[derive(Args)]
struct DistanceArgs {
    /// First game or index file.
    #[arg(long)]
    f: PathBuf,
    /// Second game or index file.
    #[arg(long)]
    g: PathBuf,
    #[arg(long, value_enum)]
    metric: Option<Metric>,
    /// Restrict to these positions, comma separated.
    #[arg(long)]
    positions: Option<String>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Criteria to run, comma separated; default all.
    #[arg(long)]
    only: Option<String>,
}

/// Outcomes that map to exit codes.
enum Status {
    Done,
    NotCertified,
}

struct Run {
    cfg: FileConfig,
    seed: u64,
    inputs: Vec<InputDigest>,
    outputs: Vec<OutputRecord>,
    settings: Value,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<()> {
        let record = |p: String| OutputRecord {
            path: p,
            sha256: sha256_hex(text.as_bytes()),
        };
        match path {
            Some(p) => {
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                self.outputs.push(record(p.display().to_string()));
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                self.outputs.push(record("-".into()));
            }
        }
        Ok(())
    }
}

fn parse_positions(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().with_context(|| format!("bad position `{s}`")))
        .collect()
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn indices(run: &mut Run, a: IndicesArgs, force_estimate: bool) -> Result<Status> {
    let text = run.read(&a.game)?;
    let LoadedGame { ltf, .. } = io::parse_game(&text)?;
    let cfg = &run.cfg;
    let kind = cfg.pick(a.kind, "kind")?.unwrap_or(Kind::Chow);
    let p: Option<f64> = cfg.pick(a.p, "p")?;
    let estimate = force_estimate || a.estimate || cfg.pick::<String>(None, "mode")?.as_deref() == Some("estimate");
    let estimate = estimate && !a.exact;
    let format = cfg.pick(a.format, "format")?.unwrap_or(Format::Json);
    let eps: f64 = cfg.pick(a.eps, "eps")?.unwrap_or(0.1);
    let gamma: f64 = cfg.pick(a.gamma, "gamma")?.unwrap_or(0.1);
    let delta: f64 = cfg.pick(a.delta, "delta")?.unwrap_or(0.05);
    let samples: usize = cfg.pick(a.samples, "samples")?.unwrap_or(100_000);
    let positions = cfg.pick(a.positions, "positions")?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    run.settings = json!({
        "kind": format!("{kind:?}").to_lowercase(), "p": p, "estimate": estimate,
        "eps": eps, "gamma": gamma, "delta": delta, "samples": samples, "positions": positions,
    });

    let n = ltf.n();
    enum Out {
        Full(Indices),
        Partial(PartialIndices),
    }
    let out = match (kind, estimate) {
        (Kind::Chow, false) => match p {
            Some(p) => Out::Full(chow_pbiased_exact(&ltf, p, DEFAULT_ENUMERATION_CAP)?),
            None => Out::Full(chow_exact(&ltf, DEFAULT_ENUMERATION_CAP)?),
        },
        (Kind::Chow, true) => {
            if p.is_some() {
                bail!("p-biased Chow parameters have no estimator; drop --p or use --exact");
            }
            let pos = match &positions {
                Some(s) => parse_positions(s)?,
                None => (0..=n).collect(),
            };
            Out::Partial(chow_estimate(&ltf, &pos, eps, delta, &mut rng)?.0)
        }
        (Kind::Shapley, false) => {
            if n <= SHAPLEY_ENUMERATION_CAP {
                Out::Full(shapley_exact(&ltf, SHAPLEY_ENUMERATION_CAP)?)
            } else {
                Out::Full(shapley_dp(&ltf).with_context(|| {
                    format!("n = {n} is past the enumeration cap {SHAPLEY_ENUMERATION_CAP}; exact Shapley indices then need nonnegative integer weights, or use --estimate")
                })?)
            }
        }
        (Kind::Shapley, true) => Out::Full(shapley_estimate(&ltf, gamma, delta, &mut rng)?.0),
        (Kind::Corr, false) => {
            let p = p.ok_or_else(|| anyhow!("--kind corr needs --p"))?;
            Out::Full(coordinate_correlation_pbiased(&ltf, p, DEFAULT_ENUMERATION_CAP)?)
        }
        (Kind::Corr, true) => bail!("correlations have no estimator; use --exact"),
        (Kind::Hermite, _) => {
            let norm = ltf.l2();
            if norm <= 0.0 {
                bail!("the zero weight vector has no Hermite coefficients");
            }
            // same function with unit-norm weights
            let unit = Ltf::new(ltf.weights().iter().map(|w| w / norm).collect(), ltf.threshold() / norm)?;
            Out::Full(hermite_degree1_estimate(&unit, samples, &mut rng)?)
        }
    };
    let text = match (&out, format) {
        (Out::Full(v), Format::Json) => io::indices_to_json(v),
        (Out::Full(v), Format::Csv) => io::indices_to_csv(v),
        (Out::Partial(v), Format::Json) => io::partial_to_json(v),
        (Out::Partial(v), Format::Csv) => io::partial_to_csv(v),
    };
    run.emit(a.output.as_deref(), &with_newline(text))?;
    Ok(Status::Done)
}

fn load_target(run: &mut Run, a: &ReconArgs, kind: IndexKind) -> Result<PartialIndices> {
    let path = a.input.as_ref().ok_or_else(|| anyhow!("--input is required unless --paper-exact"))?;
    let text = run.read(path)?;
    let partial = io::parse_indices(&text)?.into_partial()?;
    if partial.kind() != kind {
        bail!("{} holds {:?} indices, expected {:?}", path.display(), partial.kind(), kind);
    }
    if let Some(n) = a.n {
        if n != partial.n() {
            bail!("--n {n} does not match n = {} in {}", partial.n(), path.display());
        }
    }
    Ok(partial)
}

fn verify_mode(run: &Run, a: &ReconArgs) -> Result<VerifyMode> {
    if a.sampled {
        return Ok(VerifyMode::Sampled);
    }
    if a.exact {
        return Ok(VerifyMode::Exact);
    }
    Ok(run.cfg.pick(None, "verify_mode")?.unwrap_or(VerifyMode::Exact))
}

/// The solver result with its function in game-file form.
fn result_json(mut value: Value, ltf: &Ltf) -> Value {
    value["ltf"] = serde_json::from_str(&io::ltf_to_json(ltf)).expect("valid json");
    value
}

const RESERVED: &[&str] = &["eps", "delta", "delta_fail", "seed", "verify_mode"];

fn reconstruct_chow(run: &mut Run, a: ReconArgs) -> Result<Status> {
    let eps: f64 = run.cfg.pick(a.eps, "eps")?.unwrap_or(0.2);
    let delta: f64 = run.cfg.pick(a.delta, "delta")?.unwrap_or(0.1);
    if a.paper_exact {
        let table = chow_asymptotic_parameters(eps);
        run.settings = json!({"eps": eps, "paper_exact": true});
        run.emit(a.output.as_deref(), &with_newline(serde_json::to_string_pretty(&table)?))?;
        return Ok(Status::Done);
    }
    let target = load_target(run, &a, IndexKind::Chow)?;
    let mut cfg = run.cfg.apply(ChowReconConfig::desk(eps, delta), RESERVED)?;
    cfg.verify_mode = verify_mode(run, &a)?;
    cfg.seed = run.seed;
    run.settings = serde_json::to_value(&cfg)?;
    let r = reconstruct_partial_chow(&target, &cfg)?;
    let text = serde_json::to_string_pretty(&result_json(serde_json::to_value(&r)?, &r.ltf))?;
    run.emit(a.output.as_deref(), &with_newline(text))?;
    Ok(if r.certified { Status::Done } else { Status::NotCertified })
}

fn reconstruct_shapley(run: &mut Run, a: ReconArgs) -> Result<Status> {
    let eps: f64 = run.cfg.pick(a.eps, "eps")?.unwrap_or(0.25);
    let delta: f64 = run.cfg.pick(a.delta, "delta")?.unwrap_or(0.1);
    if a.paper_exact {
        let n = match (a.n, &a.input) {
            (Some(n), _) => n,
            (None, Some(_)) => load_target(run, &a, IndexKind::Shapley)?.n(),
            (None, None) => bail!("--paper-exact for Shapley needs --n or --input"),
        };
        let form = match run.cfg.pick(a.form, "form")?.unwrap_or(FormArg::Direct) {
            FormArg::Direct => ParameterForm::Direct,
            FormArg::ViaTau => ParameterForm::ViaTau,
        };
        let table = shapley_asymptotic_parameters(eps, n, form);
        run.settings = json!({"eps": eps, "n": n, "paper_exact": true});
        run.emit(a.output.as_deref(), &with_newline(serde_json::to_string_pretty(&table)?))?;
        return Ok(Status::Done);
    }
    let target = load_target(run, &a, IndexKind::Shapley)?;
    let mut cfg = run.cfg.apply(ShapReconConfig::desk(eps, delta), RESERVED)?;
    cfg.verify_mode = verify_mode(run, &a)?;
    cfg.seed = run.seed;
    run.settings = serde_json::to_value(&cfg)?;
    let r = reconstruct_partial_shapley(&target, &cfg)?;
    let text = serde_json::to_string_pretty(&result_json(serde_json::to_value(&r)?, &r.ltf))?;
    run.emit(a.output.as_deref(), &with_newline(text))?;
    Ok(if r.certified { Status::Done } else { Status::NotCertified })
}

fn sample_dshap(run: &mut Run, a: SampleArgs) -> Result<Status> {
    let format = run.cfg.pick(a.format, "format")?.unwrap_or(Format::Csv);
    run.settings = json!({"n": a.n, "count": a.count});
    let sampler = DShapSampler::new(a.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let rows: Vec<Vec<i8>> = (0..a.count).map(|_| sampler.sample(&mut rng)).collect();
    let text = match format {
        Format::Json => serde_json::to_string(&json!({"n": a.n, "samples": rows}))? + "\n",
        Format::Csv => {
            let header: Vec<String> = (1..=a.n).map(|i| format!("x{i}")).collect();
            let mut s = header.join(",") + "\n";
            for r in &rows {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    run.emit(a.output.as_deref(), &text)?;
    Ok(Status::Done)
}

enum Operand {
    Game(Ltf),
    Vector(Indices),
}

fn operand(run: &mut Run, path: &Path) -> Result<Operand> {
    let text = run.read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| powindex::Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if value.get("weights").is_some() {
        Ok(Operand::Game(io::parse_game(&text)?.ltf))
    } else {
        match io::parse_indices(&text)? {
            IndexFile::Full(v) => Ok(Operand::Vector(v)),
            IndexFile::Partial(_) => bail!("{}: distances need full index vectors", path.display()),
        }
    }
}

fn vector_of(op: &Operand, metric: Metric) -> Result<Indices> {
    match (op, metric) {
        (Operand::Vector(v), _) => Ok(v.clone()),
        (Operand::Game(f), Metric::Chow) => Ok(chow_exact(f, DEFAULT_ENUMERATION_CAP)?),
        (Operand::Game(f), Metric::Shapley) => Ok(shapley_exact(f, SHAPLEY_ENUMERATION_CAP)?),
        (Operand::Game(_), Metric::Hamming) => unreachable!("handled by the caller"),
    }
}

fn distance(run: &mut Run, a: DistanceArgs) -> Result<Status> {
    let metric = run.cfg.pick(a.metric, "metric")?.unwrap_or(Metric::Chow);
    let positions = run.cfg.pick(a.positions, "positions")?;
    run.settings = json!({"metric": format!("{metric:?}").to_lowercase(), "positions": positions});
    let (f, g) = (operand(run, &a.f)?, operand(run, &a.g)?);
    let d = match metric {
        Metric::Hamming => match (&f, &g) {
            (Operand::Game(f), Operand::Game(g)) => d_hamming(f, g, DEFAULT_ENUMERATION_CAP)?,
            _ => bail!("the hamming metric needs two game files"),
        },
        Metric::Chow | Metric::Shapley => {
            let (u, v) = (vector_of(&f, metric)?, vector_of(&g, metric)?);
            match (&positions, metric) {
                (None, Metric::Chow) => d_chow(&u, &v)?,
                (None, _) => d_shapley(&u, &v)?,
                (Some(s), Metric::Chow) => d_chow_partial(&u, &v, &parse_positions(s)?)?,
                (Some(s), _) => d_shapley_partial(&u, &v, &parse_positions(s)?)?,
            }
        }
    };
    run.emit(None, &format!("{d}\n"))?;
    Ok(Status::Done)
}

fn selftest_cmd(run: &mut Run, a: SelftestArgs) -> Result<Status> {
    let ids: Vec<usize> = match run.cfg.pick(a.only, "only")? {
        Some(s) => parse_positions(&s)?,
        None => (1..=selftest::CRITERIA).collect(),
    };
    run.settings = json!({"criteria": ids});
    let mut text = String::new();
    let mut failed = 0;
    for id in ids {
        let r = selftest::run(id, run.seed);
        println!("{}", r.line());
        text.push_str(&r.line());
        text.push('\n');
        failed += usize::from(!r.passed);
    }
    run.outputs.push(OutputRecord {
        path: "-".into(),
        sha256: sha256_hex(text.as_bytes()),
    });
    if failed > 0 {
        println!("{failed} criteria failed");
        return Ok(Status::NotCertified);
    }
    Ok(Status::Done)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let core = err.chain().find_map(|e| e.downcast_ref::<powindex::Error>());
    match core {
        Some(powindex::Error::Parse { .. } | powindex::Error::Format(_)) => 2,
        _ => 3,
    }
}

fn hint(err: &anyhow::Error) -> Option<&'static str> {
    match err.chain().find_map(|e| e.downcast_ref::<powindex::Error>()) {
        Some(powindex::Error::CapExceeded { .. }) => {
            Some("exact enumeration is limited in n; try --estimate, or integer weights for Shapley")
        }
        _ => None,
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let result = (|| -> Result<(Status, Run, usize)> {
        let cfg = FileConfig::load(cli.config.as_deref())?;
        let seed = cfg.pick(cli.seed, "seed")?.unwrap_or(0);
        let threads = cfg.pick(cli.threads, "threads")?.unwrap_or(0);
        if threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("setting up the thread pool")?;
        }
        let mut run = Run {
            cfg,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            settings: Value::Null,
        };
        let status = match cli.command {
            Command::Indices(a) => indices(&mut run, a, false)?,
            Command::Estimate(a) => indices(&mut run, a, true)?,
            Command::Reconstruct { target } => match target {
                ReconTarget::Chow(a) => reconstruct_chow(&mut run, a)?,
                ReconTarget::Shapley(a) => reconstruct_shapley(&mut run, a)?,
            },
            Command::SampleDshap(a) => sample_dshap(&mut run, a)?,
            Command::Distance(a) => distance(&mut run, a)?,
            Command::Selftest(a) => selftest_cmd(&mut run, a)?,
        };
        Ok((status, run, rayon::current_num_threads()))
    })();
    match result {
        Ok((status, run, threads)) => {
            if let Some(path) = &cli.manifest {
                let m = RunManifest {
                    command: argv,
                    seed: run.seed,
                    threads,
                    config: run.settings,
                    inputs: run.inputs,
                    outputs: run.outputs,
                    wall_time_seconds: start.elapsed().as_secs_f64(),
                };
                if let Err(e) = m.write(path) {
                    eprintln!("error: writing manifest {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            }
            match status {
                Status::Done => ExitCode::SUCCESS,
                Status::NotCertified => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(h) = hint(&e) {
                eprintln!("hint: {h}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
