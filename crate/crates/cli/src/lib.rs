//! `welfarist` command-line front end.
//!
//! [`run`] parses arguments, runs one command and returns the exit code
//! with the report. Exit codes: 0 for success or a passing check, 1 when a
//! violation, witness or refutation was found, 2 for usage and input
//! errors. Agents and goods are numbered from 1 on the command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use welfarist_core::fairness::is_ef1;
use welfarist_core::lab::{
    build_gadget, check_gadget_pigeonhole, equivalence_with_mnw, probe_exchange, refute_from_probe,
    scan_exchange, EquivalenceOutcome, GadgetSpec, LabError, PigeonholeOutcome, ProbePoint,
    ProbeVerdict, ScanOutcome,
};
use welfarist_core::model::{
    parse_allocation, parse_profile, serialize_profile, DEFAULT_ENUMERATION_CAP,
};
use welfarist_core::scalar::{parse_rational, parse_rational_list};
use welfarist_core::solver::{
    branch_and_bound, maximizers_with, mnw_maximizers_with, solve_one, MaximizerSet, SolveOptions,
    Strategy,
};
use welfarist_core::welfare::Family;
use welfarist_core::{Profile, Rational, WelfareExpr};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FOUND: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "welfarist",
    about = "Welfarist allocation rules, EF1 audits and counterexample search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Welfare maximizers of a profile.
    Solve(SolveArgs),
    /// Audits an allocation for envy-freeness up to one good.
    #[command(name = "check-ef1")]
    CheckEf1 {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
    },
    /// Evaluates both sides of the exchange identity at one point.
    Probe {
        #[arg(long)]
        welfare: String,
        #[arg(long, value_parser = rational_list)]
        x: List,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: usize,
    },
    /// Probes the exchange identity over a grid.
    Scan {
        #[arg(long)]
        welfare: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational_list)]
        grid: List,
        #[arg(long)]
        kmax: u32,
    },
    /// Prints the counterexample profile as a profile document.
    Gadget {
        #[arg(long, value_parser = rational_list)]
        x: List,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: usize,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
        /// Exchange the roles of agents 1 and i first.
        #[arg(long)]
        swap: bool,
    },
    /// Searches epsilon, builds the counterexample and audits its maximizers.
    Refute {
        #[arg(long)]
        welfare: String,
        #[arg(long, value_parser = rational_list)]
        x: List,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 2)]
        i: usize,
    },
    /// Compares welfare maximizers with MNW maximizers on random profiles.
    Equiv {
        #[arg(long)]
        welfare: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Checks that EF1 allocations of the counterexample split the shared goods evenly.
    Pigeonhole {
        #[arg(long, value_parser = rational_list)]
        x: List,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 2)]
        i: usize,
        /// Defaults to half of the first coordinate.
        #[arg(long, value_parser = rational)]
        epsilon: Option<Rational>,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Welfare expression; the bare word `nash` selects MNW with its tie-break.
    #[arg(long)]
    welfare: String,
    #[arg(long, conflicts_with = "one")]
    all: bool,
    #[arg(long)]
    one: bool,
    #[arg(long, value_enum, default_value_t = StrategyArg::Brute)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
    /// Required for caps above the default.
    #[arg(long)]
    allow_large_cap: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Brute,
    Bb,
}

fn rational(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

/// A comma-separated rational vector such as `1,2,1/2`. Wrapped so clap
/// treats it as one value rather than a repeated flag.
#[derive(Debug, Clone)]
struct List(Vec<Rational>);

fn rational_list(text: &str) -> Result<List, String> {
    parse_rational_list(text)
        .map(List)
        .map_err(|e| e.to_string())
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(i32, String), Failure>;

/// Runs one command. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    match dispatch(cli.command) {
        Ok(result) => result,
        Err(Failure(message)) => (EXIT_USAGE, format!("error: {message}\n")),
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Solve(args) => solve(args),
        Command::CheckEf1 {
            profile,
            allocation,
        } => check_ef1(&profile, &allocation),
        Command::Probe { welfare, x, k, i } => {
            let f = welfare_expr(&welfare)?;
            let outcome = probe_exchange(&f, &probe_point(x.0, k, i)?)?;
            let code = if outcome.verdict == ProbeVerdict::Equal {
                EXIT_OK
            } else {
                EXIT_FOUND
            };
            Ok((
                code,
                format!(
                    "{}\nleft = {}\nright = {}\nbackend = {}\n",
                    outcome.verdict, outcome.left, outcome.right, outcome.backend
                ),
            ))
        }
        Command::Scan {
            welfare,
            n,
            grid,
            kmax,
        } => {
            let f = welfare_expr(&welfare)?;
            match scan_exchange(&f, n, &grid.0, kmax)? {
                ScanOutcome::Pass { checked } => Ok((
                    EXIT_OK,
                    format!(
                        "PASS: {checked} points checked (evidence on a finite grid, not a proof)\n"
                    ),
                )),
                ScanOutcome::Fail(outcome) => Ok((EXIT_FOUND, format!("FAIL: {outcome}\n"))),
            }
        }
        Command::Gadget {
            x,
            k,
            i,
            epsilon,
            swap,
        } => {
            let point = probe_point(x.0, k, i)?;
            let point = if swap { point.swapped() } else { point };
            let n = point.n();
            let spec = GadgetSpec::new(point.x().to_vec(), k, point.i(), epsilon, swap)?;
            let mut out = serialize_profile(&build_gadget(&spec, n)?);
            out.push('\n');
            Ok((EXIT_OK, out))
        }
        Command::Refute { welfare, x, k, i } => {
            let f = welfare_expr(&welfare)?;
            match refute_from_probe(&f, &probe_point(x.0, k, i)?) {
                Ok(report) => {
                    let code = if report.refuted { EXIT_FOUND } else { EXIT_OK };
                    Ok((
                        code,
                        format!("{}\nrefuted = {}\n", report.to_document(), report.refuted),
                    ))
                }
                Err(LabError::ExchangeHolds(detail)) => Ok((
                    EXIT_OK,
                    format!("exchange identity holds: {detail}\nrefuted = false\n"),
                )),
                Err(e) => Err(e.into()),
            }
        }
        Command::Equiv {
            welfare,
            trials,
            seed,
            n,
            m,
        } => {
            let f = welfare_expr(&welfare)?;
            match equivalence_with_mnw(&f, trials, seed, n, m)? {
                EquivalenceOutcome::Pass { trials } => Ok((
                    EXIT_OK,
                    format!("PASS: {trials} profiles, maximizer sets agree with MNW\n"),
                )),
                EquivalenceOutcome::Witness {
                    trial,
                    profile,
                    welfare_set,
                    mnw_set,
                } => {
                    let mut out = format!(
                        "WITNESS at trial {trial}\n{}\n",
                        serialize_profile(&profile)
                    );
                    writeln!(out, "{} maximizers:", f).unwrap();
                    write_members(&mut out, &profile, &welfare_set);
                    writeln!(out, "MNW maximizers:").unwrap();
                    write_members(&mut out, &profile, &mnw_set);
                    Ok((EXIT_FOUND, out))
                }
            }
        }
        Command::Pigeonhole { x, k, i, epsilon } => {
            let point = probe_point(x.0, k, i)?;
            let n = point.n();
            let epsilon =
                epsilon.unwrap_or_else(|| &point.x()[0] / Rational::from_integer(2.into()));
            let spec = GadgetSpec::new(point.x().to_vec(), k, point.i(), epsilon, false)?;
            match check_gadget_pigeonhole(&spec, n)? {
                PigeonholeOutcome::Pass {
                    allocations,
                    ef1_allocations,
                } => Ok((
                    EXIT_OK,
                    format!(
                        "PASS: {ef1_allocations} of {allocations} allocations are EF1; each gives every agent {k} shared goods\n"
                    ),
                )),
                PigeonholeOutcome::Witness(alloc) => {
                    Ok((EXIT_FOUND, format!("WITNESS: EF1 allocation {alloc} is unbalanced\n")))
                }
            }
        }
    }
}

fn welfare_expr(text: &str) -> Result<WelfareExpr, Failure> {
    WelfareExpr::parse(text).map_err(|e| Failure(format!("--welfare {text:?}: {e}")))
}

fn probe_point(x: Vec<Rational>, k: u32, i: usize) -> Result<ProbePoint, Failure> {
    if i < 2 {
        return Err(Failure(format!(
            "--i {i}: expected an agent index in 2..={}",
            x.len()
        )));
    }
    Ok(ProbePoint::new(x, k, i - 1)?)
}

fn read_profile(path: &Path) -> Result<Profile, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_profile(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write_members(out: &mut String, profile: &Profile, set: &MaximizerSet<Rational>) {
    for m in &set.members {
        writeln!(
            out,
            "  {} utilities {}",
            m.allocation.display_with(profile),
            m.utilities
        )
        .unwrap();
    }
}

fn solve(args: SolveArgs) -> Outcome {
    if args.cap > DEFAULT_ENUMERATION_CAP && !args.allow_large_cap {
        return Err(Failure(format!(
            "--cap {}: caps above {DEFAULT_ENUMERATION_CAP} require --allow-large-cap",
            args.cap
        )));
    }
    let profile = read_profile(&args.profile)?;
    let mnw = args.welfare.trim().eq_ignore_ascii_case("nash");
    let f = welfare_expr(&args.welfare)?;
    let options = SolveOptions {
        cap: args.cap,
        ..SolveOptions::default()
    };
    let mut out = String::new();
    if args.one {
        let alloc = match (args.strategy, mnw) {
            (StrategyArg::Bb, true) => branch_and_bound(&profile, Family::Nash),
            (StrategyArg::Bb, false) => solve_one(&profile, &f, Strategy::BranchBound)?,
            (StrategyArg::Brute, true) => {
                mnw_maximizers_with(&profile, &options)?
                    .members
                    .swap_remove(0)
                    .allocation
            }
            (StrategyArg::Brute, false) => {
                maximizers_with(&profile, &f, &options)?
                    .members
                    .swap_remove(0)
                    .allocation
            }
        };
        let utilities = profile.utility_vector(&alloc)?;
        writeln!(
            out,
            "allocation {} utilities {}",
            alloc.display_with(&profile),
            utilities
        )
        .unwrap();
        if !mnw {
            writeln!(out, "welfare {}", f.evaluate(&utilities)?).unwrap();
        }
        return Ok((EXIT_OK, out));
    }
    let set = if mnw {
        mnw_maximizers_with(&profile, &options)?
    } else {
        maximizers_with(&profile, &f, &options)?
    };
    writeln!(
        out,
        "rule {}",
        if mnw {
            "MNW".to_string()
        } else {
            f.to_string()
        }
    )
    .unwrap();
    write!(out, "welfare {}", set.welfare_value).unwrap();
    if let Some(key) = &set.mnw_key {
        write!(out, ", key {key}").unwrap();
    }
    writeln!(out, ", {} maximizer(s) [{}]", set.len(), set.backend).unwrap();
    write_members(&mut out, &profile, &set);
    Ok((EXIT_OK, out))
}

fn check_ef1(profile_path: &Path, allocation_path: &Path) -> Outcome {
    let profile = read_profile(profile_path)?;
    let bytes = std::fs::read(allocation_path)
        .map_err(|e| Failure(format!("{}: {e}", allocation_path.display())))?;
    let alloc = parse_allocation(&bytes, &profile)
        .map_err(|e| Failure(format!("{}: {e}", allocation_path.display())))?;
    let report = is_ef1(&profile, &alloc)?;
    let utilities = profile.utility_vector(&alloc)?;
    let out = format!(
        "allocation {} utilities {}\n{report}\n",
        alloc.display_with(&profile),
        utilities
    );
    Ok((if report.holds { EXIT_OK } else { EXIT_FOUND }, out))
}
