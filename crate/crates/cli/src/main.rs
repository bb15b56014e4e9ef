use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fwmix::config::{parse_criteria, CompareConfig, CriteriaSelection, OutputFormat, RunConfig};
use fwmix::sweep::{compare_sizes, criteria_from_table, run_sweep};
use fwmix::table::{Table, TextTable};
use fwmix::validate::{run_validation, MAX_VALIDATION_N};
use toml::{Table as TomlTable, Value};

#[derive(Parser)]
#[command(name = "fwmix", version, about = "Four-wave-mixing entanglement sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one criteria sweep over a chi*t grid.
    Simulate(SimulateArgs),
    /// Fock runs at several N against N*chi*t, with the pump-limit overlay.
    Compare(CompareArgs),
    /// Evaluate criteria on a CSV holding the moment columns.
    Criteria(CriteriaArgs),
    /// Run the oracle and invariant self-checks at small N.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; CSV goes to stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// csv, json or both.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Key-value config file; flags override its entries.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// fock, poissonian, thermal, coherent-pure or custom.
    #[arg(long)]
    kind: Option<String>,
    /// N for fock, mean number otherwise.
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    chi_t_min: Option<f64>,
    #[arg(long)]
    chi_t_max: Option<f64>,
    #[arg(long)]
    points: Option<i64>,
    /// Comma-separated criterion names, or `all`.
    #[arg(long)]
    criteria: Option<String>,
    #[arg(long)]
    truncation: Option<f64>,
    #[arg(long)]
    lo_floor: Option<f64>,
    #[arg(long)]
    memory_budget_bytes: Option<i64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Comma-separated particle numbers.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<i64>>,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    scaled_min: Option<f64>,
    #[arg(long)]
    scaled_max: Option<f64>,
    #[arg(long)]
    points: Option<i64>,
    #[arg(long)]
    lo_floor: Option<f64>,
    #[arg(long)]
    memory_budget_bytes: Option<i64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CriteriaArgs {
    /// CSV with the 18 moment columns.
    input: PathBuf,
    #[arg(long, default_value = "all")]
    criteria: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = MAX_VALIDATION_N)]
    max_n: usize,
    /// Print the checks as JSON.
    #[arg(long)]
    json: bool,
}

fn load_table(path: Option<&Path>) -> anyhow::Result<TomlTable> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            text.parse::<TomlTable>().map_err(|e| {
                fwmix::Error::Config {
                    field: "config".into(),
                    reason: format!("{}: {}", p.display(), e.message()),
                }
                .into()
            })
        }
        None => Ok(TomlTable::new()),
    }
}

fn set(t: &mut TomlTable, key: &str, v: Option<Value>) {
    if let Some(v) = v {
        t.insert(key.into(), v);
    }
}

fn set_output(t: &mut TomlTable, out: &OutputArgs) {
    set(t, "output", out.output.as_ref().map(|p| Value::from(p.display().to_string())));
    set(t, "format", out.format.clone().map(Value::from));
}

fn emit(table: &Table, output: Option<&Path>, format: OutputFormat) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            for written in table.write_to(path, format)? {
                eprintln!("wrote {}", written.display());
            }
        }
        None if format == OutputFormat::Csv => {
            let stdout = std::io::stdout();
            table.write_csv(stdout.lock())?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &table.to_json())?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let mut t = load_table(a.config.as_deref())?;
    set(&mut t, "kind", a.kind.map(Value::from));
    set(&mut t, "mean", a.mean.map(Value::from));
    set(&mut t, "chi", a.chi.map(Value::from));
    set(&mut t, "chi_t_min", a.chi_t_min.map(Value::from));
    set(&mut t, "chi_t_max", a.chi_t_max.map(Value::from));
    set(&mut t, "points", a.points.map(Value::from));
    set(&mut t, "criteria", a.criteria.map(Value::from));
    set(&mut t, "truncation", a.truncation.map(Value::from));
    set(&mut t, "lo_floor", a.lo_floor.map(Value::from));
    set(&mut t, "memory_budget_bytes", a.memory_budget_bytes.map(Value::from));
    set_output(&mut t, &a.out);
    let config = RunConfig::from_toml_str(&t.to_string())?;
    let result = run_sweep(&config)?;
    emit(&result.table(), config.output.as_deref(), config.format)
}

fn compare(a: CompareArgs) -> anyhow::Result<()> {
    let mut t = load_table(a.config.as_deref())?;
    set(
        &mut t,
        "sizes",
        a.sizes.map(|s| Value::Array(s.into_iter().map(Value::from).collect())),
    );
    set(&mut t, "chi", a.chi.map(Value::from));
    set(&mut t, "scaled_min", a.scaled_min.map(Value::from));
    set(&mut t, "scaled_max", a.scaled_max.map(Value::from));
    set(&mut t, "points", a.points.map(Value::from));
    set(&mut t, "lo_floor", a.lo_floor.map(Value::from));
    set(&mut t, "memory_budget_bytes", a.memory_budget_bytes.map(Value::from));
    set_output(&mut t, &a.out);
    let config = CompareConfig::from_toml_str(&t.to_string())?;
    let result = compare_sizes(&config)?;
    emit(&result.table(), config.output.as_deref(), config.format)
}

fn criteria(a: CriteriaArgs) -> anyhow::Result<()> {
    let selection = parse_criteria(&CriteriaSelection::Keyword(a.criteria))?;
    let input = TextTable::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let format = match &a.out.format {
        Some(f) => f.parse()?,
        None => OutputFormat::Csv,
    };
    emit(&criteria_from_table(&input, &selection)?, a.out.output.as_deref(), format)
}

fn validate(a: ValidateArgs) -> anyhow::Result<bool> {
    let checks = run_validation(a.max_n)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&checks)?);
    } else {
        for c in &checks {
            println!(
                "{} {:<22} worst {:.3e} (tolerance {:.0e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.tolerance
            );
        }
    }
    Ok(checks.iter().all(|c| c.passed))
}

/// One JSON object on stderr describing the failure.
fn report(err: &anyhow::Error) {
    let (kind, field) = match err.downcast_ref::<fwmix::Error>() {
        Some(fwmix::Error::Config { field, .. }) => ("config", Some(field.clone())),
        Some(fwmix::Error::ResourceLimit { .. }) => ("resource", None),
        Some(fwmix::Error::DegenerateNormalization { .. }) => ("degenerate", None),
        Some(fwmix::Error::Table(_) | fwmix::Error::Csv(_)) => ("table", None),
        Some(fwmix::Error::Io(_)) => ("io", None),
        Some(_) => ("model", None),
        None if err.chain().any(|c| c.is::<std::io::Error>()) => ("io", None),
        None => ("other", None),
    };
    let body = serde_json::json!({
        "error": kind,
        "field": field,
        "message": format!("{err:#}"),
    });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Compare(a) => compare(a).map(|_| true),
        Command::Criteria(a) => criteria(a).map(|_| true),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}
