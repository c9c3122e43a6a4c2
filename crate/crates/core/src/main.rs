use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wavefront_scope::acceptance::{run_all, summary_line};
use wavefront_scope::par::{init_from_env, worker_count, Exec};
use wavefront_scope::scenario::{prepare, run, ScenarioConfig};
use wavefront_scope::WfsError;

const EXIT_VALIDATION: u8 = 1;
const EXIT_ENGINE: u8 = 2;
const EXIT_ASSERT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "wavefront-scope",
    version,
    about = "Wave front set and microlocal Sobolev regularity detection"
)]
struct Cli {
    /// Run single-threaded.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its report artifacts.
    Run {
        config: PathBuf,
        /// Exit with status 3 if any probe misses its ground-truth expectation.
        #[arg(long)]
        assert: bool,
        /// Output directory (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the bundled acceptance suite and print a pass/fail table.
    Accept {
        /// Print per-case detail under each criterion.
        #[arg(long, short)]
        verbose: bool,
    },
    /// List distributions and windows known to the scenario parser.
    ListCatalog,
}

fn exit_for(e: &WfsError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_ENGINE
    })
}

fn main() -> ExitCode {
    init_from_env();
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match cli.command {
        Command::Run {
            config,
            assert,
            out,
        } => {
            let prep = match ScenarioConfig::load(&config).and_then(|c| prepare(c, exec)) {
                Ok(p) => p,
                Err(e) => return exit_for(&e),
            };
            let outcome = match run(&prep, &out) {
                Ok(o) => o,
                Err(e) => return exit_for(&e),
            };
            let s = &outcome.report.summary;
            eprintln!(
                "{} probes: {} singular, {} regular, {} inconclusive; {} asserted, {} failed; {:.1}s on {} threads",
                s.probes,
                s.singular,
                s.regular,
                s.inconclusive,
                s.asserted,
                s.failed,
                outcome.timings.total_seconds,
                outcome.timings.threads
            );
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            if assert && s.failed > 0 {
                for p in outcome
                    .report
                    .probes
                    .iter()
                    .filter(|p| p.pass == Some(false))
                {
                    eprintln!(
                        "assertion failed: {} x={:?} dir={:?}: {:?} s*={} expected {:?} s*={:?}",
                        p.window,
                        p.point,
                        p.direction,
                        p.decay.classification,
                        p.sobolev.s_star,
                        p.truth.expected,
                        p.truth.critical_s
                    );
                }
                return ExitCode::from(EXIT_ASSERT);
            }
            ExitCode::SUCCESS
        }
        Command::Accept { verbose } => {
            eprintln!(
                "running acceptance suite on {} threads",
                if cli.sequential { 1 } else { worker_count() }
            );
            let report = run_all(exec, |c| {
                println!("{}", summary_line(c));
                if verbose || !c.pass {
                    for d in &c.detail {
                        println!("    {d}");
                    }
                }
            });
            println!("{:.1}s", report.seconds);
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ASSERT)
            }
        }
        Command::ListCatalog => {
            println!("distributions (1D unless noted):");
            for (spec, what) in [
                ("delta@X | delta@(X1,X2)", "Dirac mass at X"),
                ("heaviside@X", "jump at X"),
                ("powersing@X,a=A", "|x - X|^(-A), 0 < A < 1"),
                ("planewave,k=K | planewave,k=(K1,K2)", "e^{ik·x}"),
                ("bump", "Gaussian bump, 1D or 2D"),
                ("halfplane,nu=(N1,N2),c=C", "indicator of x·ν > C (2D)"),
                ("sum(W1*SPEC1;W2*SPEC2;...)", "weighted sum"),
            ] {
                println!("  {spec:<40} {what}");
            }
            println!("windows:");
            for (name, what) in [
                ("gaussian", "e^{-|x|²/2}"),
                ("hermite1", "first Hermite function (φ(0) = 0)"),
                ("hermite2", "second Hermite function"),
                (
                    "annulus(R1,R2) | annulus",
                    "Fourier support in R1 ≤ |η| ≤ R2, all moments zero",
                ),
                ("bump", "compactly supported C∞ bump"),
            ] {
                println!("  {name:<40} {what}");
            }
            ExitCode::SUCCESS
        }
    }
}
