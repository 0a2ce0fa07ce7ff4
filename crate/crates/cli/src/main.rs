use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use simcontract::architecture::SetupAssignment;
use simcontract::configurator::{build_test_case_contract, configure_contract, ConfigureOptions};
use simcontract::contract::quotient;
use simcontract::dsl::{load_project, Project};
use simcontract::monitor::{
    generate_monitors, render_report, Monitor, MonitorOptions, TraceReader, Verdict,
};

mod output;
mod refs;

use output::{Format, ModelCheck, QuotientDoc, RefineDoc, ValidateDoc};

/// Assume-guarantee contracts for simulation setups.
#[derive(Parser)]
#[command(name = "simcontract", version)]
struct Cli {
    /// Output style: human tables or a TOML document.
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a project and check every model against its component's ports.
    Validate { project: PathBuf },
    /// Compose contracts left to right.
    Compose {
        project: PathBuf,
        /// Comma-separated contract references.
        #[arg(long, value_delimiter = ',', required = true)]
        contracts: Vec<String>,
    },
    /// Quotient of one contract by another.
    Quotient {
        project: PathBuf,
        #[arg(long)]
        top: String,
        #[arg(long)]
        by: String,
    },
    /// Check whether one contract refines another.
    Refine {
        project: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long = "super")]
        sup: String,
        /// Compare assumptions and guarantees as written, without saturating.
        #[arg(long)]
        strict_refinement: bool,
    },
    /// Rank every setup that is valid for a test case.
    Configure {
        project: PathBuf,
        #[arg(long)]
        test_case: String,
        #[arg(long)]
        strict_refinement: bool,
        /// Maximum number of candidate setups to enumerate.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Check a recorded trace against the monitors of a setup.
    Monitor {
        project: PathBuf,
        #[arg(long)]
        test_case: String,
        /// Comma-separated model ids, one per component.
        #[arg(long, value_delimiter = ',', required = true)]
        setup: Vec<String>,
        #[arg(long)]
        trace: PathBuf,
        /// Check guarantees even where the assumption does not hold.
        #[arg(long)]
        ungated: bool,
    },
}

enum Failure {
    /// Semantic negative: the question was answered with "no".
    Negative,
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Project, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    load_project(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn resolve(project: &Project, text: &str) -> Result<simcontract::contract::Contract, Failure> {
    refs::resolve(project, text).map_err(Failure::Input)
}

fn emit(format: Format, human: impl FnOnce() -> String, machine: impl FnOnce() -> String) {
    print!(
        "{}",
        match format {
            Format::Human => human(),
            Format::Machine => machine(),
        }
    );
}

fn negative_unless(ok: bool) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let fmt = cli.format;
    match &cli.command {
        Command::Validate { project } => {
            let p = load(project)?;
            let doc = validate(&p)?;
            emit(
                fmt,
                || output::human_validate(&doc),
                || output::to_toml(&doc),
            );
            negative_unless(doc.ok())
        }
        Command::Compose { project, contracts } => {
            let p = load(project)?;
            let cs = contracts
                .iter()
                .map(|c| resolve(&p, c))
                .collect::<Result<Vec<_>, _>>()?;
            let composed = simcontract::contract::compose_all(&cs)?
                .ok_or_else(|| Failure::Input("no contracts given".into()))?;
            emit(
                fmt,
                || output::human_contract(&composed),
                || output::to_toml(&output::ContractDoc::from(&composed)),
            );
            Ok(())
        }
        Command::Quotient { project, top, by } => {
            let p = load(project)?;
            let q = quotient(&resolve(&p, top)?, &resolve(&p, by)?)?;
            emit(
                fmt,
                || {
                    let mut out = output::human_contract(&q.contract);
                    for (flag, what) in [(q.saturated_top, top), (q.saturated_divisor, by)] {
                        if flag {
                            out.push_str(&format!("  note: {what} was saturated first\n"));
                        }
                    }
                    out
                },
                || {
                    output::to_toml(&QuotientDoc {
                        contract: (&q.contract).into(),
                        saturated_top: q.saturated_top,
                        saturated_divisor: q.saturated_divisor,
                    })
                },
            );
            Ok(())
        }
        Command::Refine {
            project,
            sub,
            sup,
            strict_refinement,
        } => {
            let p = load(project)?;
            let (a, b) = (resolve(&p, sub)?, resolve(&p, sup)?);
            let failure = if *strict_refinement {
                a.refinement_failure_literal(&b)?
            } else {
                a.refinement_failure(&b)?
            };
            let doc = RefineDoc {
                sub: sub.clone(),
                sup: sup.clone(),
                mode: if *strict_refinement {
                    "literal"
                } else {
                    "saturated"
                },
                refines: failure.is_none(),
                failure,
            };
            emit(fmt, || output::human_refine(&doc), || output::to_toml(&doc));
            negative_unless(doc.refines)
        }
        Command::Configure {
            project,
            test_case,
            strict_refinement,
            limit,
        } => {
            let p = load(project)?;
            let tc = resolve(&p, test_case)?;
            let report = configure_contract(
                &p.architecture,
                &tc,
                ConfigureOptions {
                    strict_refinement: *strict_refinement,
                    limit: *limit,
                },
            )?;
            emit(
                fmt,
                || output::human_configure(&report),
                || output::machine_configure(&report),
            );
            negative_unless(!report.valid.is_empty())
        }
        Command::Monitor {
            project,
            test_case,
            setup,
            trace,
            ungated,
        } => {
            let p = load(project)?;
            let tc = resolve(&p, test_case)?;
            let mut assignment = SetupAssignment::new();
            for m in setup {
                let model = p
                    .architecture
                    .model(m)
                    .ok_or_else(|| Failure::Input(format!("unknown model `{m}`")))?;
                if let Some(prev) = assignment.insert(model.component.clone(), model.id.clone()) {
                    return Err(Failure::Input(format!(
                        "models `{prev}` and `{m}` both implement component `{}`",
                        model.component
                    )));
                }
            }
            let spec = generate_monitors(&p.architecture, &assignment, &tc)?;
            let file = File::open(trace)
                .map_err(|e| Failure::Input(format!("{}: {e}", trace.display())))?;
            let located = |e: simcontract::monitor::TraceFormatError| {
                Failure::Input(format!("{}: {e}", trace.display()))
            };
            let reader =
                TraceReader::new(BufReader::new(file), spec.alphabet.clone()).map_err(located)?;
            let mut monitor = Monitor::new(
                &spec,
                &spec.alphabet,
                MonitorOptions {
                    gate_guarantees: !ungated,
                },
            )?;
            for row in reader {
                monitor.feed(&row.map_err(located)?).map_err(located)?;
            }
            let report = monitor.finish();
            emit(fmt, || render_report(&report), || output::to_toml(&report));
            negative_unless(report.verdict == Verdict::Clean)
        }
    }
}

fn validate(p: &Project) -> Result<ValidateDoc, Failure> {
    let arch = &p.architecture;
    let mut models = Vec::new();
    for m in arch.models() {
        let ports = arch
            .component(&m.component)
            .expect("models reference known components")
            .partition();
        models.push(ModelCheck {
            model: m.id.clone(),
            component: m.component.clone(),
            contract: m.contract.id.clone(),
            compatible: m.contract.is_compatible(&ports)?,
            consistent: m.contract.is_consistent(&ports)?,
        });
    }
    let test_case_errors = p
        .test_cases
        .values()
        .filter_map(|tc| {
            build_test_case_contract(tc, arch)
                .err()
                .map(|e| (tc.id.clone(), e.to_string()))
        })
        .collect();
    Ok(ValidateDoc {
        variables: p.variables.len(),
        contracts: p.contracts.len(),
        components: arch.components().count(),
        models,
        test_case_errors,
    })
}
