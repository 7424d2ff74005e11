use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tau_core::book::{check_book, print_expansion, trans1, BookOptions};
use tau_core::oracle::SampleSpec;
use tau_core::sexp::{read_sexp, PrintBase, PrintControl};
use tau_core::sweep::{sweep, SweepConfig};

/// Batch driver for the tau decision procedure.
#[derive(Parser)]
#[command(name = "tau", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OracleArgs {
    /// Seed for the oracle's sampled searches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bindings tried per conjecture before falling back to sampling.
    #[arg(long, default_value_t = 2000)]
    max_samples: usize,
}

impl OracleArgs {
    fn spec(&self) -> SampleSpec {
        SampleSpec {
            seed: self.seed,
            max_samples: self.max_samples,
            ..SampleSpec::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Replay a book and decide its CHECK forms.
    Check {
        book: PathBuf,
        /// Validate every new rule with the oracle.
        #[arg(long)]
        paranoid: bool,
        /// Search for counterexamples to every check.
        #[arg(long)]
        oracle: bool,
        /// Report UNKNOWN verdicts without failing.
        #[arg(long)]
        allow_unknown: bool,
        #[arg(long, default_value_t = 10, value_parser = parse_base)]
        print_base: u32,
        #[arg(long)]
        print_radix: bool,
        #[command(flatten)]
        oracle_args: OracleArgs,
    },
    /// Print the one-step expansion of an event macro. Reads the form from
    /// standard input when none is given.
    Trans1 { form: Option<String> },
    /// Run the randomized soundness sweep.
    Sweep {
        /// Number of random worlds.
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        oracle_args: OracleArgs,
        /// Trust proposed rules instead of validating them.
        #[arg(long)]
        no_paranoid: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn parse_base(s: &str) -> Result<u32, String> {
    let n: u32 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    PrintBase::try_from(n)
        .map(|_| n)
        .map_err(|_| "base must be 2, 8, 10 or 16".to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Check {
            book,
            paranoid,
            oracle,
            allow_unknown,
            print_base,
            print_radix,
            oracle_args,
        } => {
            let opts = BookOptions {
                paranoid,
                oracle,
                allow_unknown,
                print: PrintControl::new(
                    PrintBase::try_from(print_base).expect("validated"),
                    print_radix,
                ),
                spec: oracle_args.spec(),
            };
            match check_book(&book, &opts) {
                Err(e) => {
                    eprintln!("tau: {e}");
                    ExitCode::from(2)
                }
                Ok(report) => {
                    print!("{}", report.transcript);
                    for e in &report.errors {
                        eprintln!("tau: {}: {e}", book.display());
                    }
                    if report.success() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
            }
        }
        Command::Trans1 { form } => {
            let text = match form {
                Some(t) => t,
                None => {
                    let mut buf = String::new();
                    if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
                        eprintln!("tau: {e}");
                        return ExitCode::from(2);
                    }
                    buf
                }
            };
            let form = match read_sexp(&text) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("tau: {e}");
                    return ExitCode::from(2);
                }
            };
            match trans1(&form) {
                Ok(out) => {
                    println!("{}", print_expansion(&out, &PrintControl::default()));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("tau: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Sweep {
            n,
            oracle_args,
            no_paranoid,
            inject_fault,
        } => {
            let cfg = SweepConfig {
                worlds: n,
                seed: oracle_args.seed,
                paranoid: !no_paranoid,
                spec: oracle_args.spec(),
                inject_fault,
                ..SweepConfig::default()
            };
            let report = sweep(&cfg);
            print!("{report}");
            println!("{}", report.summary_json());
            if report.is_sound() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
