//! `gamma-ultra`: run single Γ-ultraproduct computations, or the scripted
//! example suite, from the command line.

mod commands;
mod examples;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{GammaArgs, Report};
use input::CliError;

#[derive(Parser)]
#[command(name = "gamma-ultra", version, about = "Γ-ultraproducts of structures omitting unary types")]
struct Cli {
    /// Print one JSON record instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Include the quantifier-enumeration or per-summand computation trace.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

/// Γ as a list of presented types.
#[derive(Args)]
struct GammaFlags {
    /// Include the torsion type, truncated at this depth.
    #[arg(long)]
    tor: Option<usize>,
    /// A listed type in the variable `x`: formulas separated by `;`.
    /// Repeat for several types.
    #[arg(long = "type")]
    types: Vec<String>,
}

impl GammaFlags {
    fn args(self) -> GammaArgs {
        GammaArgs {
            tor: self.tor,
            types: self.types,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Truth of a formula in a structure.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        /// Free-variable assignment `var=value`; repeatable.
        #[arg(long)]
        assign: Vec<String>,
        /// Cap for the invariants in the trace of an invariants sentence.
        #[arg(long, default_value_t = 8)]
        cap: u64,
    },
    /// The invariant Inv(M, phi, psi), capped.
    Inv {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 8)]
        cap: u64,
    },
    /// Membership of a sequence in the Γ-ultraproduct of a context.
    Member {
        #[arg(long)]
        context: PathBuf,
        /// The sequence as JSON, or `@file`.
        #[arg(long)]
        sequence: String,
        /// Check the pointwise sum with this second sequence instead.
        #[arg(long)]
        plus: Option<String>,
        /// For torsion contexts: also decide divisibility by `p^k`.
        #[arg(long)]
        divides: Option<String>,
    },
    /// The Γ-hull of a structure and whether its functions preserve it.
    Hull {
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        gamma: GammaFlags,
    },
    /// Search for closure witness functions, or a counterexample.
    ClosedCheck {
        /// Family members; repeatable.
        #[arg(long)]
        structure: Vec<PathBuf>,
        /// Use the closed-form scheme of a theory (`torsion`) instead.
        #[arg(long, value_parser = ["torsion"])]
        theory: Option<String>,
        #[command(flatten)]
        gamma: GammaFlags,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Search for niceness witness functions for existential formulas.
    NiceCheck {
        #[arg(long, required = true)]
        structure: Vec<PathBuf>,
        /// `exists v. phi`; repeatable.
        #[arg(long, required = true)]
        formula: Vec<String>,
        #[command(flatten)]
        gamma: GammaFlags,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Check Łoś transfer on sampled members of a Γ-ultraproduct.
    LosVerify {
        /// A finite family under a principal ultrafilter.
        #[arg(long, conflicts_with = "structure")]
        context: Option<PathBuf>,
        /// Finite torsion presentations, one per member (torsion mode).
        #[arg(long)]
        structure: Vec<PathBuf>,
        /// The ultrafilter's atom in torsion mode.
        #[arg(long, default_value_t = 0)]
        atom: usize,
        #[arg(long, required = true)]
        formula: Vec<String>,
        /// Enumerate when at most this many member tuples exist, else sample this many.
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Compare all p.p. invariants of two torsion presentations up to a bound.
    TorEe {
        /// Exactly two torsion presentations.
        #[arg(long, num_args = 1, required = true)]
        structure: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        bound: u32,
        #[arg(long, default_value_t = 4)]
        cap: u64,
    },
    /// Which side of the dividing line a torsion presentation is on.
    DividingLine {
        #[arg(long)]
        structure: PathBuf,
    },
    /// Run the scripted examples and print one JSON record per example.
    Examples {
        /// Run only these ids; repeatable.
        #[arg(long)]
        id: Vec<String>,
        /// List the ids with their expected verdicts instead.
        #[arg(long)]
        list: bool,
        /// Add elapsed times (the report is then no longer reproducible).
        #[arg(long)]
        timings: bool,
    },
}

fn run_command(command: Command, trace: bool) -> Result<Report, CliError> {
    match command {
        Command::Eval {
            structure,
            formula,
            assign,
            cap,
        } => commands::eval(&commands::EvalArgs {
            structure,
            formula,
            assign,
            cap,
            trace,
        }),
        Command::Inv {
            structure,
            phi,
            psi,
            cap,
        } => commands::inv(&commands::InvArgs {
            structure,
            phi,
            psi,
            cap,
            trace,
        }),
        Command::Member {
            context,
            sequence,
            plus,
            divides,
        } => commands::member(&commands::MemberArgs {
            context,
            sequence,
            plus,
            divides,
        }),
        Command::Hull { structure, gamma } => commands::hull(&structure, &gamma.args()),
        Command::ClosedCheck {
            structure,
            theory,
            gamma,
            depth,
        } => commands::closed_check(&structure, theory.is_some(), &gamma.args(), depth),
        Command::NiceCheck {
            structure,
            formula,
            gamma,
            depth,
        } => commands::nice_check(&structure, &formula, &gamma.args(), depth),
        Command::LosVerify {
            context,
            structure,
            atom,
            formula,
            samples,
        } => commands::los_verify(&commands::LosArgs {
            context,
            structures: structure,
            atom,
            formulas: formula,
            samples,
        }),
        Command::TorEe { structure, bound, cap } => commands::tor_ee(&structure, bound, cap),
        Command::DividingLine { structure } => commands::dividing(&structure),
        Command::Examples { .. } => unreachable!("handled by run_examples"),
    }
}

/// JSON lines on stdout; in text mode a summary on stderr. Exit status 0
/// iff every selected example passes.
fn run_examples(ids: &[String], list: bool, timings: bool, json: bool) -> ExitCode {
    if list {
        for e in examples::EXAMPLES {
            if json {
                let record = serde_json::json!({ "id": e.id, "description": e.description, "expected": e.expected });
                println!("{record}");
            } else {
                println!("{:<36} {}", e.id, e.expected);
            }
        }
        return ExitCode::SUCCESS;
    }
    let outcomes = match examples::run(ids, timings) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for o in &outcomes {
        println!("{}", serde_json::to_string(o).expect("outcomes serialize"));
    }
    let passed = outcomes.iter().filter(|o| o.status == examples::Status::Pass).count();
    if !json {
        eprintln!("{passed}/{} examples pass", outcomes.len());
    }
    if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Examples { id, list, timings } = &cli.command {
        return run_examples(id, *list, *timings, cli.json);
    }
    match run_command(cli.command, cli.trace) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.record);
            } else {
                for line in report.lines {
                    println!("{line}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
