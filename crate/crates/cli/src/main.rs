//! `polyconfig`: build, check and solve twisted-polygon configurations.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use polyconfig_core::admissibility::{admissible, nonexistence_certificate, CertificateConfig};
use polyconfig_core::grid::GridSpec;
use polyconfig_core::lemmas::run_suite;
use polyconfig_core::solver::{
    equal_size_height, existence_scan_b, solve_planar, solve_spatial_with, SpatialOptions,
};
use polyconfig_core::{
    cc_residual_with_tolerance, centered_positions, residual_vector, PolyError, ThetaChoice,
    TwistedPairParams,
};

use config::{Angle, Command, Format, PartialParams, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "polyconfig", version, about = "Central configurations of two twisted regular polygons")]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the artifact here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug, Default, Clone)]
struct ParamArgs {
    /// Vertices of the lower polygon.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Vertices of the upper polygon.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Radius of the upper polygon.
    #[arg(long)]
    a: Option<f64>,
    /// Mass ratio upper/lower.
    #[arg(long)]
    b: Option<f64>,
    /// Height of the upper plane.
    #[arg(long)]
    h: Option<f64>,
    /// Twist: radians, or a multiple of pi such as `1/3pi` or `pi/3`.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<Angle>,
    /// Mass of each lower body.
    #[arg(long)]
    m: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Point-mass and reduced residuals of one configuration.
    Check {
        #[command(flatten)]
        params: ParamArgs,
        /// Centrality tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Masses and centered positions of one configuration.
    Build {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Coplanar equal polygons for given N, b and θ ∈ {0, π/N}.
    SolvePlanar {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Stacked equal polygons for given N, b and θ ∈ {0, π/N}.
    SolveSpatial {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Height of the stacked pair with a = b = 1.
    Height {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Stacked roots over a log grid of mass ratios.
    Scan {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        b_start: Option<f64>,
        #[arg(long)]
        b_end: Option<f64>,
        #[arg(long)]
        b_points: Option<usize>,
    },
    /// Sign-verification sweeps.
    Lemma {
        /// Suite name, or `all`.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Nonexistence certificate for a lower N-gon and an upper 2N-gon.
    Certify {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Admissible twists for (N, L).
    Admissible {
        #[command(flatten)]
        params: ParamArgs,
    },
}

enum Failure {
    Validation(String),
    Anomaly(Value),
}

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::NoRootInBracket { .. } | PolyError::BracketCount { .. } => {
                Failure::Anomaly(json!({ "anomaly": anomaly_kind(&e), "message": e.to_string() }))
            }
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn anomaly_kind(e: &PolyError) -> &'static str {
    match e {
        PolyError::NoRootInBracket { .. } => "no-root-in-bracket",
        PolyError::BracketCount { .. } => "bracket-count",
        _ => "error",
    }
}

enum Artifact {
    Json(Value),
    Csv(String),
}

struct Outcome {
    artifact: Artifact,
    /// Output was produced but contradicts an expected result.
    anomaly: bool,
}

fn ok(v: impl Serialize) -> Result<Outcome, Failure> {
    Ok(Outcome {
        artifact: Artifact::Json(to_value(v)?),
        anomaly: false,
    })
}

fn to_value(v: impl Serialize) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Validation(format!("serialisation failed: {e}")))
}

fn validation<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Validation(msg.into()))
}

/// Command-line flags layered over the config file.
struct Inputs {
    params: PartialParams,
    config: RunConfig,
}

impl Inputs {
    fn new(config: RunConfig, flags: &ParamArgs) -> Self {
        let mut params = config.params.clone();
        params.n = flags.n.or(params.n);
        params.l = flags.l.or(params.l);
        params.a = flags.a.or(params.a);
        params.b = flags.b.or(params.b);
        params.h = flags.h.or(params.h);
        params.theta = flags.theta.or(params.theta);
        params.m = flags.m.or(params.m);
        Self { params, config }
    }

    fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T, Failure> {
        v.ok_or_else(|| Failure::Validation(format!("missing required parameter '{name}'")))
    }

    fn n(&self) -> Result<usize, Failure> {
        let n = Self::require(self.params.n, "N")?;
        if n < 2 {
            return validation(format!("N must be at least 2, got {n}"));
        }
        Ok(n)
    }

    fn b(&self) -> Result<f64, Failure> {
        Self::require(self.params.b, "b")
    }

    fn full(&self) -> Result<TwistedPairParams, Failure> {
        let p = &self.params;
        Ok(TwistedPairParams::with_mass(
            self.n()?,
            Self::require(p.l, "L")?,
            Self::require(p.a, "a")?,
            Self::require(p.b, "b")?,
            Self::require(p.h, "h")?,
            Self::require(p.theta, "theta")?.radians,
            p.m.unwrap_or(1.0),
        )?)
    }

    /// θ must be 0 or π/N; missing θ means 0.
    fn choice(&self, n: usize) -> Result<ThetaChoice, Failure> {
        let theta = self.params.theta.unwrap_or(Angle::radians(0.0));
        theta
            .choice(n)
            .ok_or_else(|| Failure::Validation(format!("theta must be 0 or pi/{n}, got {theta}")))
    }

    fn grid(&self, name: &str) -> Option<GridSpec> {
        self.config.grids.get(name).cloned()
    }

    fn tolerance(&self, name: &str) -> Option<f64> {
        self.config.tolerances.get(name).copied()
    }
}

fn run_check(inputs: &Inputs, tolerance: Option<f64>) -> Result<Outcome, Failure> {
    let p = inputs.full()?;
    let tol = tolerance.or(inputs.tolerance("centrality")).unwrap_or(1e-10);
    if !(tol.is_finite() && tol > 0.0) {
        return validation(format!("tolerance must be positive, got {tol}"));
    }
    let report = cc_residual_with_tolerance(&centered_positions(&p)?, tol);
    let reduced = residual_vector(&p)?;
    ok(json!({
        "params": p,
        "is_central": report.is_central,
        "lambda": report.lambda,
        "max_residual_norm": report.max_residual_norm,
        "tolerance": tol,
        "per_body_residual": report.per_body_residual,
        "reduced": reduced,
    }))
}

fn run_build(inputs: &Inputs) -> Result<Outcome, Failure> {
    let p = inputs.full()?;
    let sys = centered_positions(&p)?;
    ok(json!({ "params": p, "masses": sys.masses(), "positions": sys.positions() }))
}

fn run_solve_planar(inputs: &Inputs) -> Result<Outcome, Failure> {
    let n = inputs.n()?;
    let choice = inputs.choice(n)?;
    let roots = solve_planar(n, inputs.b()?, choice)?;
    let unverified = roots.iter().any(|r| !r.converged);
    let wrong_count = choice == ThetaChoice::Aligned && roots.len() != 2;
    Ok(Outcome {
        artifact: Artifact::Json(to_value(&roots)?),
        anomaly: unverified || wrong_count,
    })
}

fn spatial_options(inputs: &Inputs) -> SpatialOptions {
    let mut options = SpatialOptions::default();
    if let Some(g) = inputs.grid("a_starts") {
        options.a_starts = g;
    }
    if let Some(g) = inputs.grid("h_starts") {
        options.h_starts = g;
    }
    options
}

fn run_solve_spatial(inputs: &Inputs) -> Result<Outcome, Failure> {
    let n = inputs.n()?;
    let choice = inputs.choice(n)?;
    let b = inputs.b()?;
    ok(solve_spatial_with(n, b, choice, &spatial_options(inputs))?)
}

fn run_height(inputs: &Inputs) -> Result<Outcome, Failure> {
    let n = inputs.n()?;
    let choice = inputs.choice(n)?;
    let h = equal_size_height(n, choice)?;
    let p = TwistedPairParams::new(n, n, 1.0, 1.0, h, choice.angle(n))?;
    let report = cc_residual_with_tolerance(&centered_positions(&p)?, 1e-8);
    Ok(Outcome {
        anomaly: !report.is_central,
        artifact: Artifact::Json(json!({
            "N": n,
            "theta_choice": choice,
            "h": h,
            "lambda": report.lambda,
            "oracle_residual": report.max_residual_norm,
            "is_central": report.is_central,
        })),
    })
}

fn run_scan(
    inputs: &Inputs,
    format: Format,
    b_start: Option<f64>,
    b_end: Option<f64>,
    b_points: Option<usize>,
) -> Result<Outcome, Failure> {
    let n = inputs.n()?;
    let choice = inputs.choice(n)?;
    let grid = match (b_start, b_end, b_points, inputs.grid("b")) {
        (None, None, None, Some(g)) => g,
        (s, e, p, _) => GridSpec::log(s.unwrap_or(0.01), e.unwrap_or(100.0), p.unwrap_or(40)),
    };
    let values = grid.values();
    if values.is_empty() || values.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return validation("mass-ratio grid must be non-empty and positive");
    }
    let table = existence_scan_b(n, choice, &values, &spatial_options(inputs))?;
    let anomaly = table.oracle_failures > 0;
    let artifact = match format {
        Format::Csv => Artifact::Csv(table.to_csv()),
        Format::Json => Artifact::Json(to_value(&table)?),
    };
    Ok(Outcome { artifact, anomaly })
}

fn run_lemma(inputs: &Inputs, suite: Option<String>) -> Result<Outcome, Failure> {
    let name = suite.or_else(|| inputs.config.suite.clone()).unwrap_or_else(|| "all".into());
    let reports = run_suite(&name)?;
    let anomaly = reports.iter().any(|r| r.asserted && !r.passed());
    Ok(Outcome {
        artifact: Artifact::Json(to_value(&reports)?),
        anomaly,
    })
}

fn run_certify(inputs: &Inputs) -> Result<Outcome, Failure> {
    let n = inputs.n()?;
    if let Some(l) = inputs.params.l {
        if l != 2 * n {
            return validation(format!("certificates concern L = 2N = {}, got L = {l}", 2 * n));
        }
    }
    let mut config = CertificateConfig::default();
    for (name, slot) in [("a", &mut config.a_grid), ("b", &mut config.b_grid), ("h", &mut config.h_grid)] {
        if let Some(g) = inputs.grid(name) {
            *slot = g;
        }
    }
    if let Some(t) = inputs.tolerance("random_threshold") {
        config.random_threshold = t;
    }
    if let Some(d) = inputs.tolerance("random_draws") {
        config.random_draws = d as usize;
    }
    let cert = nonexistence_certificate(n, &config)?;
    Ok(Outcome {
        anomaly: !cert.refuted,
        artifact: Artifact::Json(to_value(&cert)?),
    })
}

fn run_admissible(inputs: &Inputs) -> Result<Outcome, Failure> {
    let n = inputs.n()?;
    let l = Inputs::require(inputs.params.l, "L")?;
    let report = admissible(n, l)?;
    let mut value = to_value(&report)?;
    if let Some(theta) = inputs.params.theta {
        let admitted = match theta.exact {
            Some(p) => report.admissible_thetas.contains(&p),
            None => report.admissible_thetas.iter().any(|t| {
                polyconfig_core::polygon::angle_distance(t.radians(), theta.radians)
                    <= polyconfig_core::polygon::ANGLE_TOLERANCE
            }),
        };
        value["theta"] = to_value(theta)?;
        value["theta_admissible"] = Value::Bool(admitted);
    }
    ok(value)
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("invalid config {}: {e}", path.display())))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("POLYCONFIG_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Validation(format!("POLYCONFIG_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Validation(format!("cannot configure thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(Outcome, Option<PathBuf>), Failure> {
    configure_threads()?;
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let output = cli.output.clone().or_else(|| config.output_path.clone().map(PathBuf::from));
    let format = cli.format.or(config.format).unwrap_or(Format::Json);
    let command = match (&cli.command, config.command) {
        (Some(c), _) => c,
        (None, Some(c)) => {
            let flags = ParamArgs::default();
            let inputs = Inputs::new(config, &flags);
            return run(c, &inputs, format, None).map(|o| (o, output));
        }
        (None, None) => return validation("no command given (use a subcommand or \"command\" in --config)"),
    };
    let (kind, flags) = match command {
        Cmd::Check { params, .. } => (Command::Check, params.clone()),
        Cmd::Build { params } => (Command::Build, params.clone()),
        Cmd::SolvePlanar { params } => (Command::SolvePlanar, params.clone()),
        Cmd::SolveSpatial { params } => (Command::SolveSpatial, params.clone()),
        Cmd::Height { params } => (Command::Height, params.clone()),
        Cmd::Scan { params, .. } => (Command::Scan, params.clone()),
        Cmd::Lemma { .. } => (Command::Lemma, ParamArgs::default()),
        Cmd::Certify { params } => (Command::Certify, params.clone()),
        Cmd::Admissible { params } => (Command::Admissible, params.clone()),
    };
    let inputs = Inputs::new(config, &flags);
    run(kind, &inputs, format, Some(command)).map(|o| (o, output))
}

fn run(kind: Command, inputs: &Inputs, format: Format, cmd: Option<&Cmd>) -> Result<Outcome, Failure> {
    if format == Format::Csv && kind != Command::Scan {
        return validation("csv output is only available for scan");
    }
    match kind {
        Command::Check => {
            let tol = match cmd {
                Some(Cmd::Check { tolerance, .. }) => *tolerance,
                _ => None,
            };
            run_check(inputs, tol)
        }
        Command::Build => run_build(inputs),
        Command::SolvePlanar => run_solve_planar(inputs),
        Command::SolveSpatial => run_solve_spatial(inputs),
        Command::Height => run_height(inputs),
        Command::Scan => {
            let (s, e, p) = match cmd {
                Some(Cmd::Scan { b_start, b_end, b_points, .. }) => (*b_start, *b_end, *b_points),
                _ => (None, None, None),
            };
            run_scan(inputs, format, s, e, p)
        }
        Command::Lemma => {
            let suite = match cmd {
                Some(Cmd::Lemma { suite }) => suite.clone(),
                _ => None,
            };
            run_lemma(inputs, suite)
        }
        Command::Certify => run_certify(inputs),
        Command::Admissible => run_admissible(inputs),
    }
}

fn render(artifact: &Artifact) -> String {
    match artifact {
        Artifact::Json(v) => {
            let mut s = serde_json::to_string_pretty(v).expect("json value");
            s.push('\n');
            s
        }
        Artifact::Csv(s) => s.clone(),
    }
}

fn emit(text: &str, output: Option<&Path>) -> io::Result<()> {
    match output {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fallback_output = cli.output.clone();
    match dispatch(cli) {
        Ok((outcome, output)) => {
            let text = render(&outcome.artifact);
            if let Err(e) = emit(&text, output.as_deref()) {
                let target = output.map(|p| p.display().to_string()).unwrap_or_else(|| "stdout".into());
                eprintln!("error: cannot write {target}: {e}");
                return ExitCode::from(1);
            }
            if outcome.anomaly {
                eprintln!("anomaly: result contradicts an expected property; see the artifact");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Anomaly(report)) => {
            let text = render(&Artifact::Json(report));
            if let Err(e) = emit(&text, fallback_output.as_deref()) {
                eprintln!("error: cannot write report: {e}");
            }
            eprintln!("anomaly: computation contradicted an expected property");
            ExitCode::from(2)
        }
    }
}
