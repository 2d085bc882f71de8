use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hecke_core::acceptance::{run_criterion, Faults, CRITERIA};
use hecke_core::config::{ConfigFile, ScenarioConfig};
use hecke_core::report::{self, Report};
use hecke_core::HeckeError;

#[derive(Parser)]
#[command(name = "hecke", version, about = "Exact computations in generalised Hecke algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Subgroups, index table, modular functions, extension of the character.
    DescribePair(Common),
    /// The set B on a ball, with the family's closed form when known.
    BSet(Common),
    /// Structure constants of products of basis elements.
    StructureConstants {
        #[command(flatten)]
        common: Common,
        /// A pair of elements to multiply, in the family's syntax.
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        pair: Vec<String>,
    },
    /// z0, H_inf and the stratification of 1 + qZ_p (padic-axb).
    Qadic(Common),
    /// Witnesses x = t(1/n + z) for finite adeles.
    OmegaWitness {
        #[command(flatten)]
        common: Common,
        /// A finite adele such as "2:5/4@64, 3:7".
        #[arg(long)]
        adele: Vec<String>,
        /// Values of n (defaults to 2, 4, 6, 12).
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
    /// Commutation of the induced representation with the Hecke action.
    InducedCheck(Common),
    /// Continuity of the character and the finite quotient algebras.
    Completion(Common),
    /// Factorizations b = x^-1 y with x, y in B+.
    Directedness(Common),
    /// Every report requested in the configuration.
    Run(Common),
    /// The acceptance suite, plus any configured scenarios.
    Selftest {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Only these criteria (1-11).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
        /// Write the per-criterion results as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    CorruptStructureConstants,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML with [[scenario]] tables).
    #[arg(long, conflicts_with = "family")]
    config: Option<PathBuf>,
    /// A single scenario given on the command line.
    #[arg(long)]
    family: Option<String>,
    /// Family parameter as key=value; values use TOML syntax.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    precision: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: Command) -> Result<ExitCode, HeckeError> {
    let (common, section) = match cmd {
        Command::Selftest {
            config,
            criteria,
            out,
            inject_fault,
        } => return selftest(config, criteria, out, inject_fault),
        Command::DescribePair(c) => (c, Some("describe-pair")),
        Command::BSet(c) => (c, Some("b-set")),
        Command::StructureConstants { common, pair } => {
            let mut scenarios = load(&common)?;
            if !pair.is_empty() {
                let pairs: Vec<[String; 2]> =
                    pair.chunks(2).map(|p| [p[0].clone(), p[1].clone()]).collect();
                scenarios.iter_mut().for_each(|s| s.pairs = pairs.clone());
            }
            return analyse(&common, scenarios, Some("structure-constants"));
        }
        Command::Qadic(c) => (c, Some("qadic")),
        Command::OmegaWitness { common, adele, n } => {
            let mut scenarios = load(&common)?;
            for s in &mut scenarios {
                if !adele.is_empty() {
                    s.adeles = adele.clone();
                }
                if !n.is_empty() {
                    s.omega_n = n.clone();
                }
            }
            return analyse(&common, scenarios, Some("omega-witness"));
        }
        Command::InducedCheck(c) => (c, Some("induced-check")),
        Command::Completion(c) => (c, Some("completion")),
        Command::Directedness(c) => (c, Some("directedness")),
        Command::Run(c) => (c, None),
    };
    let scenarios = load(&common)?;
    analyse(&common, scenarios, section)
}

/// Scenarios from `--config` or `--family`, with the command-line overrides applied.
fn load(c: &Common) -> Result<Vec<ScenarioConfig>, HeckeError> {
    let mut scenarios = match (&c.config, &c.family) {
        (Some(path), _) => {
            if !c.params.is_empty() {
                return Err(HeckeError::Config("--param needs --family".into()));
            }
            ConfigFile::load(path)?.scenario
        }
        (None, Some(family)) => {
            let mut params = BTreeMap::new();
            for kv in &c.params {
                let (k, v) = parse_param(kv)?;
                params.insert(k, v);
            }
            vec![ScenarioConfig::new(family, params)]
        }
        (None, None) => {
            return Err(HeckeError::Config("give --config PATH or --family NAME".into()))
        }
    };
    for s in &mut scenarios {
        if let Some(seed) = c.seed {
            s.seed = seed;
        }
        if let Some(p) = c.precision {
            s.precision = p;
        }
    }
    Ok(scenarios)
}

fn parse_param(kv: &str) -> Result<(String, toml::Value), HeckeError> {
    let (k, v) = kv
        .split_once('=')
        .ok_or_else(|| HeckeError::Config(format!("parameter '{kv}' is not key=value")))?;
    let k = k.trim().to_string();
    let value = toml::from_str::<toml::Table>(&format!("v = {v}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(v.trim().to_string()));
    Ok((k, value))
}

fn analyse(
    c: &Common,
    mut scenarios: Vec<ScenarioConfig>,
    section: Option<&str>,
) -> Result<ExitCode, HeckeError> {
    if let Some(name) = section {
        scenarios
            .iter_mut()
            .for_each(|s| s.reports = Some(vec![name.to_string()]));
    }
    let report = report::run(&scenarios)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.has_errors() {
        eprintln!("warning: some sections reported errors; see the \"error\" fields");
    }
    let text = match c.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    emit(c.out.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), HeckeError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| HeckeError::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn selftest(
    config: Option<PathBuf>,
    criteria: Vec<usize>,
    out: Option<PathBuf>,
    fault: Option<Fault>,
) -> Result<ExitCode, HeckeError> {
    let faults = Faults {
        corrupt_structure_constants: matches!(fault, Some(Fault::CorruptStructureConstants)),
    };
    let ids: Vec<usize> = if criteria.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        criteria
    };
    if let Some(bad) = ids.iter().find(|i| !(1..=CRITERIA.len()).contains(*i)) {
        return Err(HeckeError::Config(format!("no criterion {bad}")));
    }
    let scenarios = match &config {
        Some(path) => ConfigFile::load(path)?.scenario,
        None => Vec::new(),
    };
    let mut ok = true;
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &faults);
        println!("{r}");
        ok &= r.passed;
        results.push(r);
    }
    if scenarios.is_empty() {
        println!("warning: no scenarios configured");
    }
    let report: Report = report::run(&scenarios)?;
    for s in &report.scenarios {
        let clean = !Report {
            scenarios: vec![s.clone()],
            ..report.clone()
        }
        .has_errors();
        println!("scenario {} [{}]", s.label, if clean { "PASS" } else { "FAIL" });
        ok &= clean;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&results).expect("serializable");
        emit(Some(&path), &(json + "\n"))?;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
