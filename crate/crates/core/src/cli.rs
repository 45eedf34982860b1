//! Command-line front end: argument and config-file resolution, series I/O
//! and the four subcommands.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bandwidth::BandwidthMode;
use crate::dgp_eval::{
    monte_carlo, rolling_eval, simulate, DgpModel, DgpSpec, Innovation, DEFAULT_WARMUP,
};
use crate::error::{Error, Result};
use crate::kernels::Bandwidths;
use crate::predict::{predict_next, PredictorConfig};
use crate::series::{Alpha, Method, TimeSeries};

#[derive(Debug, Parser)]
#[command(
    name = "mdcp",
    version,
    about = "Prediction intervals for Markov(p) time series"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Simulate a series from one of the built-in models.
    Simulate(Flags),
    /// Interval for the next value of an input series.
    Predict(Flags),
    /// Monte Carlo coverage study on a built-in model.
    Evaluate(Flags),
    /// Rolling one-step-ahead evaluation on an input series.
    Bench(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// TOML file with default values for any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// mf, pmf, mdcp or pmdcp (bench runs all four when omitted).
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "G")]
    g: Option<usize>,
    #[arg(long = "R")]
    r: Option<usize>,
    #[arg(long = "S")]
    s: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// cv, rot or fixed:h,h0.
    #[arg(long)]
    bandwidth: Option<String>,
    /// sine or logquad.
    #[arg(long)]
    model: Option<String>,
    /// normal or laplace.
    #[arg(long)]
    innovation: Option<String>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// predict: write the conformal p-value scan here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// bench: write per-step records here.
    #[arg(long)]
    steps: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    method: Option<String>,
    p: Option<usize>,
    alpha: Option<f64>,
    #[serde(rename = "B")]
    b: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "G")]
    g: Option<usize>,
    #[serde(rename = "R")]
    r: Option<usize>,
    #[serde(rename = "S")]
    s: Option<usize>,
    w: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    bandwidth: Option<String>,
    model: Option<String>,
    innovation: Option<String>,
    threads: Option<usize>,
    trace: Option<PathBuf>,
    steps: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Predict,
    Evaluate,
    Bench,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Predict => "predict",
            Command::Evaluate => "evaluate",
            Command::Bench => "bench",
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `None` means every method (bench only).
    pub method: Option<Method>,
    pub p: usize,
    pub alpha: f64,
    pub b: usize,
    pub m: usize,
    pub g: usize,
    pub r: usize,
    pub s: usize,
    pub w: usize,
    pub n: usize,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub bandwidth: BandwidthMode,
    pub model: DgpModel,
    pub innovation: Innovation,
    pub threads: usize,
    pub trace: Option<PathBuf>,
    pub steps: Option<PathBuf>,
}

impl RunConfig {
    pub fn predictor(&self, method: Method) -> Result<PredictorConfig> {
        Ok(PredictorConfig {
            method,
            order: self.p,
            alpha: Alpha::new(self.alpha)?,
            bandwidth: self.bandwidth,
            grid_size: self.g,
            replicates: self.b,
            warmup: self.m,
        })
    }

    pub fn methods(&self) -> Vec<Method> {
        match self.method {
            Some(m) => vec![m],
            None => Method::ALL.to_vec(),
        }
    }

    /// `# key=value` lines echoing every setting that affects the output.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let method = self.method.map_or("all", Method::as_str);
        let input = self
            .input
            .as_ref()
            .map_or_else(|| "-".to_string(), |p| p.display().to_string());
        let kv: [(&str, String); 16] = [
            ("command", self.command.as_str().into()),
            ("method", method.into()),
            ("p", self.p.to_string()),
            ("alpha", self.alpha.to_string()),
            ("B", self.b.to_string()),
            ("M", self.m.to_string()),
            ("G", self.g.to_string()),
            ("R", self.r.to_string()),
            ("S", self.s.to_string()),
            ("w", self.w.to_string()),
            ("n", self.n.to_string()),
            ("seed", self.seed.to_string()),
            ("input", input),
            ("bandwidth", format_bandwidth(self.bandwidth)),
            ("model", self.model.as_str().into()),
            ("innovation", self.innovation.as_str().into()),
        ];
        for (k, v) in kv {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }
}

fn format_bandwidth(mode: BandwidthMode) -> String {
    match mode {
        BandwidthMode::Cv => "cv".into(),
        BandwidthMode::RuleOfThumb => "rot".into(),
        BandwidthMode::Fixed(bw) => format!("fixed:{},{}", bw.h, bw.h0),
    }
}

pub fn parse_bandwidth(s: &str) -> Result<BandwidthMode> {
    let lower = s.trim().to_ascii_lowercase();
    match lower.as_str() {
        "cv" => Ok(BandwidthMode::Cv),
        "rot" => Ok(BandwidthMode::RuleOfThumb),
        _ => {
            let bad = || {
                Error::InvalidConfig(format!(
                    "invalid bandwidth `{s}`; expected cv, rot or fixed:h,h0"
                ))
            };
            let rest = lower.strip_prefix("fixed:").ok_or_else(bad)?;
            let (h, h0) = rest.split_once(',').ok_or_else(bad)?;
            let h: f64 = h.trim().parse().map_err(|_| bad())?;
            let h0: f64 = h0.trim().parse().map_err(|_| bad())?;
            Bandwidths::new(h, h0)
                .map(BandwidthMode::Fixed)
                .map_err(|_| bad())
        }
    }
}

fn usage(e: Error) -> Error {
    match e {
        Error::InvalidConfig(_) => e,
        other => Error::InvalidConfig(other.to_string()),
    }
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(Error::InvalidConfig(format!("`{name}` must be positive")));
    }
    Ok(v)
}

fn resolve(command: Command, flags: Flags) -> Result<RunConfig> {
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
            })?;
            toml::from_str::<FileConfig>(&text).map_err(|e| {
                Error::InvalidConfig(format!("config {}: {}", path.display(), e.message()))
            })?
        }
        None => FileConfig::default(),
    };

    let method = match flags.method.or(file.method) {
        Some(s) if s.eq_ignore_ascii_case("all") => None,
        Some(s) => Some(s.parse::<Method>().map_err(usage)?),
        None => None,
    };
    let method = match (command, method) {
        (Command::Bench, m) => m,
        (_, m) => Some(m.unwrap_or(Method::Mdcp)),
    };
    let alpha = flags.alpha.or(file.alpha).unwrap_or(0.05);
    Alpha::new(alpha).map_err(usage)?;
    let bandwidth = match flags.bandwidth.or(file.bandwidth) {
        Some(s) => parse_bandwidth(&s)?,
        None => BandwidthMode::Cv,
    };
    let model = match flags.model.or(file.model) {
        Some(s) => s.parse()?,
        None => DgpModel::Sine,
    };
    let innovation = match flags.innovation.or(file.innovation) {
        Some(s) => s.parse()?,
        None => Innovation::Normal,
    };

    let cfg = RunConfig {
        command,
        method,
        p: positive("p", flags.p.or(file.p).unwrap_or(1))?,
        alpha,
        b: positive("B", flags.b.or(file.b).unwrap_or(250))?,
        m: positive("M", flags.m.or(file.m).unwrap_or(100))?,
        g: positive("G", flags.g.or(file.g).unwrap_or(200))?,
        r: positive("R", flags.r.or(file.r).unwrap_or(100))?,
        s: positive("S", flags.s.or(file.s).unwrap_or(1000))?,
        w: positive("w", flags.w.or(file.w).unwrap_or(100))?,
        n: positive("n", flags.n.or(file.n).unwrap_or(100))?,
        seed: flags.seed.or(file.seed).unwrap_or(42),
        input: flags.input.or(file.input),
        output: flags.output.or(file.output),
        bandwidth,
        model,
        innovation,
        threads: flags.threads.or(file.threads).unwrap_or(0),
        trace: flags.trace.or(file.trace),
        steps: flags.steps.or(file.steps),
    };
    if matches!(command, Command::Predict | Command::Bench) && cfg.input.is_none() {
        return Err(Error::InvalidConfig(format!(
            "`{}` requires --input",
            command.as_str()
        )));
    }
    if cfg.trace.is_some() && !(command == Command::Predict && cfg.methods()[0].is_conformal()) {
        return Err(Error::InvalidConfig(
            "--trace applies to predict with mdcp or pmdcp".into(),
        ));
    }
    if cfg.steps.is_some() && command != Command::Bench {
        return Err(Error::InvalidConfig("--steps applies to bench only".into()));
    }
    Ok(cfg)
}

/// Resolves argv (program name first) and an optional config file into a
/// [`RunConfig`]. Flags take precedence over the file, the file over defaults.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli =
        Cli::try_parse_from(argv).map_err(|e| Error::InvalidConfig(first_line(&e.to_string())))?;
    let (command, flags) = match cli.command {
        CliCommand::Simulate(f) => (Command::Simulate, f),
        CliCommand::Predict(f) => (Command::Predict, f),
        CliCommand::Evaluate(f) => (Command::Evaluate, f),
        CliCommand::Bench(f) => (Command::Bench, f),
    };
    resolve(command, flags)
}

fn first_line(s: &str) -> String {
    s.lines()
        .next()
        .unwrap_or_default()
        .trim_start_matches("error: ")
        .to_string()
}

/// Reads a single-column series: one value per line, `#` comments and blank
/// lines skipped, an optional leading `y` header tolerated.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let text = fs::read_to_string(path)?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<TimeSeries> {
    let mut values = Vec::new();
    let mut seen_row = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_row;
        seen_row = true;
        if first && line.eq_ignore_ascii_case("y") {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("expected a real number, found `{line}`"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("non-finite value `{line}`"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptyFile);
    }
    TimeSeries::new(values)
}

fn emit(path: Option<&Path>, stdout: &mut dyn Write, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Executes one resolved run, writing the main artifact to `--output` or `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let body = render(cfg)?;
    emit(cfg.output.as_deref(), stdout, &body)
}

/// Runs the command and returns the main artifact; side files are written directly.
pub fn render(cfg: &RunConfig) -> Result<String> {
    let mut out = cfg.header();
    match cfg.command {
        Command::Simulate => {
            let spec = DgpSpec {
                model: cfg.model,
                innovation: cfg.innovation,
                n: cfg.n,
                warmup: DEFAULT_WARMUP,
                seed: cfg.seed,
            };
            let series = simulate(&spec)?;
            out.push_str("y\n");
            for v in series.values() {
                let _ = writeln!(out, "{v}");
            }
        }
        Command::Predict => {
            let series = read_series(cfg.input.as_deref().expect("validated"))?;
            let method = cfg.methods()[0];
            let pred = predict_next(&series, &cfg.predictor(method)?, cfg.seed)?;
            let pi = pred.interval;
            out.push_str("method,alpha,lower,upper\n");
            let _ = writeln!(out, "{},{},{},{}", method, cfg.alpha, pi.lower, pi.upper);
            if let (Some(path), Some(trace)) = (&cfg.trace, &pred.trace) {
                let mut t = cfg.header();
                let _ = writeln!(t, "# augmented_len={}", trace.augmented_len);
                t.push_str("y,pvalue,accepted\n");
                for p in &trace.points {
                    let _ = writeln!(t, "{},{},{}", p.y, p.pvalue, u8::from(p.accepted));
                }
                fs::write(path, t)?;
            }
        }
        Command::Evaluate => {
            let spec = DgpSpec {
                model: cfg.model,
                innovation: cfg.innovation,
                n: cfg.n,
                warmup: DEFAULT_WARMUP,
                seed: cfg.seed,
            };
            let method = cfg.methods()[0];
            let report = monte_carlo(&spec, &cfg.predictor(method)?, cfg.r, cfg.s)?;
            for f in &report.failures {
                let _ = writeln!(
                    out,
                    "# failure replication={} seed={} error={}",
                    f.replication,
                    f.seed,
                    f.error.code()
                );
            }
            out.push_str("kind,replication,CVR,LEN,CVR Sd,LEN Sd\n");
            for o in &report.outcomes {
                let _ = writeln!(out, "replication,{},{},{},,", o.replication, o.cvr, o.len);
            }
            let _ = writeln!(
                out,
                "summary,,{},{},{},{}",
                report.cvr_mean, report.len_mean, report.cvr_sd, report.len_sd
            );
        }
        Command::Bench => {
            let series = read_series(cfg.input.as_deref().expect("validated"))?;
            let mut steps = cfg.header();
            steps.push_str("method,t,lower,upper,actual,hit\n");
            out.push_str("method,CVR,LEN,LEN Sd\n");
            for method in cfg.methods() {
                let report = rolling_eval(&series, cfg.w, &cfg.predictor(method)?, cfg.seed)?;
                for (t, e) in &report.failures {
                    let _ = writeln!(out, "# failure method={method} t={t} error={}", e.code());
                }
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    method, report.cvr, report.len, report.len_sd
                );
                for s in &report.steps {
                    let _ = writeln!(
                        steps,
                        "{},{},{},{},{},{}",
                        method,
                        s.t,
                        s.lower,
                        s.upper,
                        s.actual,
                        u8::from(s.hit)
                    );
                }
            }
            if let Some(path) = &cfg.steps {
                fs::write(path, steps)?;
            }
        }
    }
    Ok(out)
}

/// Full CLI entry point; returns the process exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<T> = argv.into_iter().collect();
    if let Err(e) = Cli::try_parse_from(argv.clone()) {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = write!(stdout, "{e}");
            return 0;
        }
    }
    let result = parse_config(argv).and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start thread pool: {e}")))?;
        let body = pool.install(|| render(&cfg))?;
        emit(cfg.output.as_deref(), stdout, &body)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "ERROR {}: {}", e.code(), msg);
            e.class().exit_code()
        }
    }
}
