//! The `toffa` command line. [`run`] does all the work so tests can drive
//! it without spawning a process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use toffa_core::diag::{has_errors, Diagnostic, Severity};
use toffa_core::report;
use toffa_core::tradeoff::compare_scenarios;
use toffa_core::validate::validate_model;
use toffa_core::{parse_model, parse_scenarios, Model, Scenario};
use toffa_service::api::{self, Params};
use toffa_service::{ApiError, ServeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Structured,
    /// Graphviz, for `adapt-model` only.
    Dot,
}

#[derive(Debug, Parser)]
#[command(
    name = "toffa",
    version,
    about = "Trade-off analysis for context-aware feature models"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value = "table", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file.
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    pub model: PathBuf,
    /// Scenario file.
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Add each active context's rules as hard constraints.
    #[arg(long = "strict-context-constraints")]
    pub strict_context: bool,
    /// Report the best K configurations.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub top_k: u16,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model.
    Validate(ModelArg),
    /// List the context feature combinations.
    Ccfs(ModelArg),
    /// Static checks: validity, C-KS structure and interleaving faults.
    Check(ModelArg),
    /// Weights derived from a scenario.
    Prioritize(ScenarioArgs),
    /// Feature utilities.
    Utility {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Restrict context contributions to one CCF.
        #[arg(long)]
        ccf: Option<String>,
    },
    /// Optimal configuration.
    Optimize {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long)]
        ccf: Option<String>,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Optimal configuration per CCF; compares scenarios when the file has several.
    Tradeoff {
        #[command(flatten)]
        input: ScenarioArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Adaptation model over the C-KS.
    AdaptModel {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Initial configuration label; defaults to the most frequent.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long = "strict-context-constraints")]
        strict_context: bool,
    },
    /// Serve the HTTP API and the workbench.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Restore sessions from this file and save them on shutdown.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

/// Failure of a command, already rendered for the user.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Error(String),
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        let mut msg = e.to_string();
        if let ApiError::InvalidModel(d) = &e {
            msg.push('\n');
            msg.push_str(report::diagnostics_text(d).trim_end());
        }
        if let ApiError::Optimize(toffa_core::optimizer::OptimizeError::Solver(
            toffa_core::optimizer::SolverError::Infeasible { conflict },
        )) = &e
        {
            for c in conflict {
                msg.push_str(&format!("\n  {}  # {}", c.constraint, c.origin));
            }
        }
        Failure::Error(msg)
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    parse_model(&read(path)?).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn load_scenarios(path: &Path) -> Result<Vec<Scenario>, Failure> {
    let ss = parse_scenarios(&read(path)?)
        .map_err(|e| Failure::Error(format!("{}: {e}", path.display())))?;
    if ss.is_empty() {
        return Err(Failure::Error(format!(
            "{}: no scenario found",
            path.display()
        )));
    }
    Ok(ss)
}

fn one_scenario(path: &Path) -> Result<Scenario, Failure> {
    let mut ss = load_scenarios(path)?;
    if ss.len() > 1 {
        let ids: Vec<&str> = ss.iter().map(|s| s.id.as_str()).collect();
        return Err(Failure::Error(format!(
            "{}: expected one scenario, found {} ({}); only tradeoff accepts several",
            path.display(),
            ss.len(),
            ids.join(", ")
        )));
    }
    Ok(ss.remove(0))
}

/// A model that passed validation, with its warnings.
fn admitted(path: &Path, err: &mut dyn Write) -> Result<Model, Failure> {
    let m = load_model(path)?;
    let d = api::admit(&m)?;
    warn(err, &d);
    Ok(m)
}

fn warn(err: &mut dyn Write, d: &[Diagnostic]) {
    for x in d.iter().filter(|x| x.severity != Severity::Error) {
        let _ = writeln!(err, "{x}");
    }
}

fn structured<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Error(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::Error(e.to_string()))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Error(e.to_string()))
}

fn no_dot(format: Format) -> Result<(), Failure> {
    if format == Format::Dot {
        return Err(Failure::Usage(
            "--format dot is only available for adapt-model".into(),
        ));
    }
    Ok(())
}

fn params(ccf: Option<String>, solve: Option<&SolveArgs>) -> Params {
    Params {
        ccf,
        strict_context: solve.is_some_and(|s| s.strict_context),
        top_k: solve.map_or(1, |s| s.top_k as usize),
        ..Params::default()
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let f = cli.format;
    if !matches!(cli.command, Command::AdaptModel { .. }) {
        no_dot(f)?;
    }
    match cli.command {
        Command::Validate(a) => {
            let m = load_model(&a.model)?;
            let d = validate_model(&m);
            match f {
                Format::Structured => structured(out, &d)?,
                _ if d.is_empty() => emit(out, "ok\n")?,
                _ => emit(out, &report::diagnostics_text(&d))?,
            }
            Ok(!has_errors(&d))
        }
        Command::Ccfs(a) => {
            let m = admitted(&a.model, err)?;
            let doc = api::ccfs(&m)?;
            match f {
                Format::Structured => structured(out, &doc)?,
                _ => emit(out, &report::ccfs_text(&doc.ccfs))?,
            }
            Ok(true)
        }
        Command::Check(a) => {
            let m = load_model(&a.model)?;
            let doc = api::check(&m);
            match f {
                Format::Structured => structured(out, &doc)?,
                _ if doc.diagnostics.is_empty() => emit(out, "no problems found\n")?,
                _ => emit(out, &report::diagnostics_text(&doc.diagnostics))?,
            }
            Ok(doc.ok)
        }
        Command::Prioritize(a) => {
            let m = admitted(&a.model, err)?;
            let doc = api::prioritize(&m, &one_scenario(&a.scenario)?)?;
            warn(err, &doc.weights.warnings);
            match f {
                Format::Structured => structured(out, &doc)?,
                _ => emit(out, &report::weights_text(&doc.weights))?,
            }
            Ok(true)
        }
        Command::Utility { input, ccf } => {
            let m = admitted(&input.model, err)?;
            let s = one_scenario(&input.scenario)?;
            let doc = api::utility(&m, &s, &params(ccf, None))?;
            match f {
                Format::Structured => structured(out, &doc)?,
                _ => emit(out, &report::utility_text(&doc.table))?,
            }
            Ok(true)
        }
        Command::Optimize { input, ccf, solve } => {
            let m = admitted(&input.model, err)?;
            let s = one_scenario(&input.scenario)?;
            let doc = api::optimize(&m, &s, &params(ccf, Some(&solve)))?;
            match f {
                Format::Structured => structured(out, &doc)?,
                _ => {
                    let parts: Vec<String> = doc
                        .ranked
                        .iter()
                        .map(|r| report::configuration_text(&r.label, &r.configuration))
                        .collect();
                    emit(out, &parts.join("\n"))?
                }
            }
            Ok(true)
        }
        Command::Tradeoff { input, solve } => {
            let m = admitted(&input.model, err)?;
            let ss = load_scenarios(&input.scenario)?;
            let p = params(None, Some(&solve));
            if ss.len() == 1 {
                let doc = api::tradeoff(&m, &ss[0], &p)?;
                match f {
                    Format::Structured => structured(out, &doc)?,
                    _ => emit(out, &report::tradeoff_text(&doc.result))?,
                }
            } else {
                let opts = toffa_core::tradeoff::RunOptions {
                    optimize: toffa_core::optimizer::OptimizeOptions {
                        strict_context: solve.strict_context,
                        top_k: solve.top_k as usize,
                        ..toffa_core::optimizer::OptimizeOptions::from_env()
                    },
                    ..Default::default()
                };
                let c = compare_scenarios(&m, &ss, &opts).map_err(ApiError::from)?;
                match f {
                    Format::Structured => structured(out, &c)?,
                    _ => emit(out, &report::comparison_text(&c))?,
                }
            }
            Ok(true)
        }
        Command::AdaptModel {
            input,
            initial,
            strict_context,
        } => {
            let m = admitted(&input.model, err)?;
            let s = one_scenario(&input.scenario)?;
            let p = Params {
                initial,
                strict_context,
                ..params(None, None)
            };
            let doc = api::adaptation(&m, &s, &p)?;
            match f {
                Format::Structured => structured(out, &doc)?,
                Format::Dot => emit(out, &doc.dot)?,
                Format::Table => emit(out, &report::adaptation_text(&doc.model))?,
            }
            Ok(true)
        }
        Command::Serve {
            port,
            static_dir,
            snapshot,
        } => {
            let cfg = ServeConfig {
                static_dir,
                snapshot,
                ..ServeConfig::local(port)
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Error(e.to_string()))?;
            let _ = writeln!(err, "listening on http://{}", cfg.addr);
            rt.block_on(toffa_service::serve(cfg))
                .map_err(|e| Failure::Error(e.to_string()))?;
            Ok(true)
        }
    }
}

/// Runs one invocation. Returns 0 on success, 1 when the input has errors
/// or a command fails, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli, out, err) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Error(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}
