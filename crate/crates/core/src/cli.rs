//! Command-line front end.
//!
//! Exit codes: 0 success, 1 gate failure (or a failed run), 2 usage error,
//! 3 resource limit (step cap or rational budget).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use serde::Serialize;

use crate::asymptotics;
use crate::error::{Error, Result};
use crate::model::PopulationConfig;
use crate::output::{self, Cell, Format, Table};
use crate::recurrence::{self, Mode, RationalLimits, Route};
use crate::scalar::{fraction_string, Scalar};
use crate::simulator::{self, Estimator};
use crate::stats::{self, Z_THRESHOLD};
use crate::validate::{self, Group, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_GATE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "moran-sweep", version, about = "Ancestral weight of a sweeping mutant in the biparental Moran model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Simulate,
    Recur,
    Asym,
    Compare,
    Validate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of E(M_{S_N}(1)) for each N.
    Simulate(CommonArgs),
    /// Per-k table of the (u, v) recurrence.
    Recur(CommonArgs),
    /// Convergence of u_N towards (4/sqrt(pi)) sqrt(N), and lemma constants.
    Asym(CommonArgs),
    /// Monte Carlo (both estimators) against exact u_N, with z-gates.
    Compare(CommonArgs),
    /// Run the invariant suite.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Population size(s), comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    /// Replications per N.
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for a `.json` output path, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Restrict `validate` to these groups.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub only: Option<Vec<Group>>,
    /// Worker threads for replications (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Print the planned work and exit without writing anything.
    #[arg(long)]
    pub dry_run: bool,
    /// key=value file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub n: Vec<u64>,
    pub n_reps: u64,
    pub seed: u64,
    pub estimator: Estimator,
    pub mode: Mode,
    pub output_path: Option<PathBuf>,
    pub output_format: Format,
    pub only: Vec<Group>,
    pub threads: Option<usize>,
    #[serde(skip)]
    pub dry_run: bool,
}

/// Parses a `key=value` file. Blank lines and lines starting with `#` are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Usage(format!("config: bad value {v:?} for {key}")))
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T> {
    T::from_str(v, true).map_err(|_| Error::Usage(format!("config: bad value {v:?} for {key}")))
}

fn parse_list<T>(key: &str, v: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').map(|s| f(key, s.trim())).collect()
}

/// Merges file values under the flags (flags win) and applies per-command
/// defaults.
pub fn resolve(kind: CommandKind, args: &CommonArgs) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(p) => parse_config_file(&std::fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    for key in file.keys() {
        if !["n", "reps", "seed", "estimator", "mode", "out", "format", "only", "threads"]
            .contains(&key.as_str())
        {
            return Err(Error::Usage(format!("config: unknown key {key:?}")));
        }
    }
    let get = |k: &str| file.get(k).map(String::as_str);

    let n = match (&args.n, get("n")) {
        (Some(v), _) => v.clone(),
        (None, Some(v)) => parse_list("n", v, parse_value)?,
        (None, None) => match kind {
            CommandKind::Asym => vec![100, 1000, 10_000, 100_000],
            CommandKind::Compare => vec![5, 10, 20],
            _ => vec![10],
        },
    };
    let n_reps = match (args.reps, get("reps")) {
        (Some(v), _) => v,
        (None, Some(v)) => parse_value("reps", v)?,
        (None, None) => 100_000,
    };
    let seed = match (args.seed, get("seed")) {
        (Some(v), _) => v,
        (None, Some(v)) => parse_value("seed", v)?,
        (None, None) => 42,
    };
    let estimator = match (args.estimator, get("estimator")) {
        (Some(v), _) => v,
        (None, Some(v)) => parse_enum("estimator", v)?,
        (None, None) => Estimator::Weights,
    };
    let mode = match (args.mode, get("mode")) {
        (Some(v), _) => v,
        (None, Some(v)) => parse_enum("mode", v)?,
        (None, None) => Mode::Float,
    };
    let output_path = args.out.clone().or_else(|| get("out").map(PathBuf::from));
    let output_format = match (args.format, get("format")) {
        (Some(v), _) => v,
        (None, Some(v)) => parse_enum("format", v)?,
        (None, None) => match output_path.as_deref().and_then(Path::extension) {
            Some(ext) if ext == "json" => Format::Json,
            _ => Format::Csv,
        },
    };
    let only = match (&args.only, get("only")) {
        (Some(v), _) => v.clone(),
        (None, Some(v)) => parse_list("only", v, parse_enum)?,
        (None, None) => Group::ALL.to_vec(),
    };
    let threads = match (args.threads, get("threads")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("threads", v)?),
        (None, None) => None,
    };

    let cfg = ExperimentConfig {
        command: kind,
        n,
        n_reps,
        seed,
        estimator,
        mode,
        output_path,
        output_format,
        only,
        threads,
        dry_run: args.dry_run,
    };
    if cfg.n.is_empty() {
        return Err(Error::Usage("--n needs at least one value".into()));
    }
    if let Some(bad) = cfg.n.iter().find(|&&n| n < 2) {
        return Err(Error::Usage(format!("population size must be >= 2, got {bad}")));
    }
    if cfg.n_reps == 0 {
        return Err(Error::Usage("--reps must be positive".into()));
    }
    if cfg.threads == Some(0) {
        return Err(Error::Usage("--threads must be positive".into()));
    }
    Ok(cfg)
}

/// Outcome of a command: rows to write, lines for stdout, gate status.
struct Report {
    table: Option<Table>,
    lines: Vec<String>,
    gate_ok: bool,
}

pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (kind, common) = match &cli.command {
        Command::Simulate(a) => (CommandKind::Simulate, a),
        Command::Recur(a) => (CommandKind::Recur, a),
        Command::Asym(a) => (CommandKind::Asym, a),
        Command::Compare(a) => (CommandKind::Compare, a),
        Command::Validate(a) => (CommandKind::Validate, a),
    };
    match resolve(kind, common).and_then(|cfg| execute(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    if e.is_resource_limit() {
        EXIT_RESOURCE
    } else {
        match e {
            Error::Usage(_) | Error::InvalidConfig(_) | Error::OutOfRange { .. } => EXIT_USAGE,
            _ => EXIT_GATE,
        }
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<i32> {
    if cfg.dry_run {
        for line in plan(cfg) {
            println!("{line}");
        }
        return Ok(EXIT_OK);
    }
    let report = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(|| dispatch(cfg))?,
        None => dispatch(cfg)?,
    };
    for line in &report.lines {
        println!("{line}");
    }
    if let Some(table) = &report.table {
        let meta = output::meta(command_name(cfg.command), serde_json::to_value(cfg)?);
        let bytes = output::render(table, &meta, cfg.output_format)?;
        // Validate prints its own lines; only write its table when asked to.
        if cfg.output_path.is_some() || cfg.command != CommandKind::Validate {
            output::emit(&bytes, cfg.output_path.as_deref())?;
        }
    }
    Ok(if report.gate_ok { EXIT_OK } else { EXIT_GATE })
}

fn command_name(kind: CommandKind) -> &'static str {
    match kind {
        CommandKind::Simulate => "simulate",
        CommandKind::Recur => "recur",
        CommandKind::Asym => "asym",
        CommandKind::Compare => "compare",
        CommandKind::Validate => "validate",
    }
}

pub fn plan(cfg: &ExperimentConfig) -> Vec<String> {
    let mut lines = vec![format!(
        "dry run: {} with config {}",
        command_name(cfg.command),
        serde_json::to_string(cfg).unwrap_or_default()
    )];
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    match cfg.command {
        CommandKind::Simulate => lines.extend(ns.iter().map(|n| {
            format!("simulate N={n}: {} replications, estimator {}", cfg.n_reps, cfg.estimator.name())
        })),
        CommandKind::Compare => lines.extend(ns.iter().map(|n| {
            format!("compare N={n}: {} paired replications vs exact u_N", cfg.n_reps)
        })),
        CommandKind::Recur => lines.extend(ns.iter().map(|n| format!("recur N={n}: k=1..{n} in {:?} mode", cfg.mode))),
        CommandKind::Asym => lines.extend(ns.iter().map(|n| format!("asym N={n}: u_N, prediction, ratio, lemma C"))),
        CommandKind::Validate => lines.extend(cfg.only.iter().map(|g| format!("validate group {}", g.name()))),
    }
    lines.push(match &cfg.output_path {
        Some(p) => format!("would write {:?} to {}", cfg.output_format, p.display()),
        None => "would write to stdout".into(),
    });
    lines
}

fn sorted_n(cfg: &ExperimentConfig) -> Vec<u64> {
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn dispatch(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.command {
        CommandKind::Simulate => cmd_simulate(cfg),
        CommandKind::Recur => cmd_recur(cfg),
        CommandKind::Asym => cmd_asym(cfg),
        CommandKind::Compare => cmd_compare(cfg),
        CommandKind::Validate => cmd_validate(cfg),
    }
}

fn population(n: u64) -> PopulationConfig {
    PopulationConfig::new(n as usize)
}

fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(vec![
        "N", "n_reps", "estimator", "mean", "variance", "std_error", "ci_low", "ci_high", "seed",
    ]);
    for n in sorted_n(cfg) {
        let st = simulator::replicate(&population(n), cfg.n_reps, cfg.seed, cfg.estimator)?;
        table.push(vec![
            n.into(),
            st.n_reps.into(),
            cfg.estimator.name().into(),
            st.mean.into(),
            st.variance.into(),
            st.std_error.into(),
            st.ci95.0.into(),
            st.ci95.1.into(),
            cfg.seed.into(),
        ]);
    }
    Ok(Report {
        table: Some(table),
        lines: Vec::new(),
        gate_ok: true,
    })
}

fn cmd_recur(cfg: &ExperimentConfig) -> Result<Report> {
    let limits = RationalLimits::default();
    let mut columns = vec!["N", "k", "u", "v", "u_tilde", "v_tilde", "x"];
    if cfg.mode == Mode::Rational {
        columns.extend(["u_exact", "v_exact", "u_tilde_exact", "v_tilde_exact", "x_exact"]);
    }
    let mut table = Table::new(columns);
    for n in sorted_n(cfg) {
        match cfg.mode {
            Mode::Float => {
                for p in recurrence::iterate_uv::<f64>(n, Route::Tilde, limits)? {
                    table.push(vec![
                        n.into(),
                        p.k.into(),
                        p.u.into(),
                        p.v.into(),
                        p.u_tilde.into(),
                        p.v_tilde.into(),
                        p.x.into(),
                    ]);
                }
            }
            Mode::Rational => {
                for p in recurrence::iterate_uv::<BigRational>(n, Route::Tilde, limits)? {
                    let vals = [&p.u, &p.v, &p.u_tilde, &p.v_tilde, &p.x];
                    let mut row: Vec<Cell> = vec![n.into(), p.k.into()];
                    row.extend(vals.iter().map(|q| Cell::from(q.as_f64())));
                    row.extend(vals.iter().map(|q| Cell::from(fraction_string(q))));
                    table.push(row);
                }
            }
        }
    }
    Ok(Report {
        table: Some(table),
        lines: Vec::new(),
        gate_ok: true,
    })
}

fn cmd_asym(cfg: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(vec![
        "N", "u_N", "prediction", "ratio", "v_tilde", "v_tilde_scaled", "lemma_c_min", "lemma_c_k",
    ]);
    for n in sorted_n(cfg) {
        let row = asymptotics::convergence_row(n)?;
        let vt = asymptotics::v_tilde_closed(n)?;
        let (c, k) = asymptotics::smallest_passing_c(n);
        table.push(vec![
            n.into(),
            row.u_n.into(),
            row.prediction.into(),
            row.ratio.into(),
            vt.into(),
            (vt * (std::f64::consts::PI * n as f64).sqrt() / 2.0).into(),
            c.into(),
            k.into(),
        ]);
    }
    Ok(Report {
        table: Some(table),
        lines: Vec::new(),
        gate_ok: true,
    })
}

/// Exact `u_N` where affordable, otherwise the float recurrence.
fn exact_u(n: u64) -> Result<(f64, String)> {
    let limits = RationalLimits::default();
    if n <= limits.max_n {
        let q = recurrence::final_weight_exact(n, limits)?;
        Ok((q.as_f64(), fraction_string(&q)))
    } else {
        Ok((recurrence::final_weight_f64(n)?, String::new()))
    }
}

fn cmd_compare(cfg: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(vec![
        "N",
        "n_reps",
        "weights_mean",
        "weights_se",
        "gene_drop_mean",
        "gene_drop_se",
        "u_exact",
        "u_exact_fraction",
        "prediction",
        "ratio",
        "z_weights",
        "z_gene_drop",
        "pass",
    ]);
    let mut lines = Vec::new();
    let mut gate_ok = true;
    for n in sorted_n(cfg) {
        let (w, g) = simulator::replicate_paired(&population(n), cfg.n_reps, cfg.seed)?;
        let (u, frac) = exact_u(n)?;
        let prediction = asymptotics::theorem_prediction(n);
        let zw = stats::agreement(w.mean, u, w.std_error);
        let zg = stats::agreement(g.mean, u, g.std_error);
        let pass = zw.pass && zg.pass;
        if !pass {
            gate_ok = false;
            lines.push(format!(
                "FAIL N={n}: weights z={:.3}, gene_drop z={:.3} (|z| must be <= {Z_THRESHOLD})",
                zw.z_score, zg.z_score
            ));
        }
        table.push(vec![
            n.into(),
            cfg.n_reps.into(),
            w.mean.into(),
            w.std_error.into(),
            g.mean.into(),
            g.std_error.into(),
            u.into(),
            frac.into(),
            prediction.into(),
            (u / prediction).into(),
            zw.z_score.into(),
            zg.z_score.into(),
            pass.into(),
        ]);
    }
    for line in &lines {
        eprintln!("{line}");
    }
    Ok(Report {
        table: Some(table),
        lines: Vec::new(),
        gate_ok,
    })
}

fn cmd_validate(cfg: &ExperimentConfig) -> Result<Report> {
    let suite = SuiteConfig {
        seed: cfg.seed,
        ..SuiteConfig::default()
    };
    let mut table = Table::new(vec!["group", "check", "params", "observed", "expected", "pass"]);
    let mut lines = Vec::new();
    let mut gate_ok = true;
    for &group in &cfg.only {
        for outcome in validate::run_group(group, &suite)? {
            gate_ok &= outcome.pass;
            lines.push(outcome.line());
            table.push(vec![
                outcome.group.into(),
                outcome.name.clone().into(),
                outcome.params.clone().into(),
                outcome.observed.clone().into(),
                outcome.expected.clone().into(),
                outcome.pass.into(),
            ]);
        }
    }
    let failed = table.rows.iter().filter(|r| r[5] == Cell::Bool(false)).count();
    lines.push(format!("{} checks, {failed} failed", table.rows.len()));
    Ok(Report {
        table: Some(table),
        lines,
        gate_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let map = parse_config_file("# comment\nn = 2,3\n\nreps=50\nseed=7\n").unwrap();
        assert_eq!(map["n"], "2,3");
        assert_eq!(map["reps"], "50");
        assert!(parse_config_file("oops").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(&path, "n=2,3\nreps=50\nseed=7\nestimator=gene_drop\nformat=json\n").unwrap();
        let args = CommonArgs {
            seed: Some(9),
            config: Some(path),
            ..CommonArgs::default()
        };
        let cfg = resolve(CommandKind::Simulate, &args).unwrap();
        assert_eq!(cfg.n, vec![2, 3]);
        assert_eq!(cfg.n_reps, 50);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.estimator, Estimator::GeneDrop);
        assert_eq!(cfg.output_format, Format::Json);
    }

    #[test]
    fn resolve_rejects_bad_values() {
        let args = CommonArgs {
            n: Some(vec![1]),
            ..CommonArgs::default()
        };
        assert!(matches!(resolve(CommandKind::Simulate, &args), Err(Error::Usage(_))));
        let args = CommonArgs {
            reps: Some(0),
            ..CommonArgs::default()
        };
        assert!(matches!(resolve(CommandKind::Simulate, &args), Err(Error::Usage(_))));
    }

    #[test]
    fn format_follows_extension() {
        let args = CommonArgs {
            out: Some("x/out.json".into()),
            ..CommonArgs::default()
        };
        assert_eq!(resolve(CommandKind::Recur, &args).unwrap().output_format, Format::Json);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::Usage("x".into())), EXIT_USAGE);
        assert_eq!(exit_code_for(&Error::MaxStepsExceeded { max_steps: 1 }), EXIT_RESOURCE);
        assert_eq!(exit_code_for(&Error::RationalBudget("x".into())), EXIT_RESOURCE);
        assert_eq!(exit_code_for(&Error::EmptySample), EXIT_GATE);
    }
}
