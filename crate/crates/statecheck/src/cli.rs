//! Command-line front end: `check`, `oracle`, `generate`, and
//! `crosscheck` subcommands over the JSON history format.
//!
//! Exit codes: 0 satisfied / all agree, 1 violated, 2 usage or parse
//! error, 3 budget exceeded. Results go to stdout; errors go to stderr.
//! `STATECHECK_BUDGET` overrides the default search budget as
//! `<max_exhaustive>[,<node_limit>]`.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::adya::{
    assign_timestamps, derive_version_order, phenomena_report, pl_check, OracleBudget,
    OracleError, PhenomenaReport, VersionOrder,
};
use crate::commit::IsolationLevel;
use crate::formats::{parse_history, workload_digest, HistoryFile, WitnessFile};
use crate::harness::{
    crosscheck, enumerate_small_workloads, generate_skeleton, generate_workload, random_corpus,
    simulate_level, CrossLevel, EnumBounds, GenParams,
};
use crate::model::Workload;
use crate::search::{
    check_isolation, check_session, verify_isolation_witness, verify_session_witness,
    SearchBudget, Verdict, Witness,
};
use crate::session::{GuaranteeSet, SessionGuarantee};

pub const EXIT_SATISFIED: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "statecheck",
    about = "Black-box transactional consistency checker over observable states",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a history against an isolation level or session guarantees.
    Check(CheckArgs),
    /// Query the dependency-graph oracle: phenomena or PL-level verdicts.
    Oracle(OracleArgs),
    /// Generate a history, optionally guaranteed to satisfy a level.
    Generate(GenerateArgs),
    /// Cross-validate the checker against the oracle on workload corpora.
    Crosscheck(CrosscheckArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// History file (JSON).
    input: PathBuf,
    /// Isolation level: ru, rc, si, ser, sser, sc, psi.
    #[arg(long, conflicts_with = "guarantees")]
    level: Option<String>,
    /// Comma-separated session guarantees: rmw, mr, mw, wfr, cc.
    #[arg(long)]
    guarantees: Option<String>,
    /// Write the witness to this path on success.
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Transaction-count cap for exhaustive search.
    #[arg(long)]
    budget: Option<usize>,
    /// Verify a previously written witness instead of searching.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// History file (JSON).
    input: PathBuf,
    /// Print every phenomenon under a witnessing version order.
    #[arg(long, conflicts_with = "pl")]
    phenomena: bool,
    /// PL-level verdict: pl1, pl2, pl2plus, pl3, si.
    #[arg(long)]
    pl: Option<String>,
    /// Version-order source: "enumerate" (default) or
    /// "derive:<witness.json>".
    #[arg(long, default_value = "enumerate")]
    version_order: String,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 2)]
    sessions: usize,
    /// Transactions per session, as N or LO..HI.
    #[arg(long, default_value = "1..3")]
    txns: String,
    /// Operations per transaction, as N or LO..HI.
    #[arg(long, default_value = "1..3")]
    ops: String,
    #[arg(long, default_value_t = 3)]
    keys: usize,
    #[arg(long = "read-frac", default_value_t = 0.5)]
    read_frac: f64,
    /// Fill reads so the output satisfies this level.
    #[arg(long)]
    level: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct CrosscheckArgs {
    /// Exhaustive bounds as TXNS,OPS,KEYS,SESSIONS.
    #[arg(long, conflicts_with = "random")]
    bounds: Option<String>,
    /// Number of random workloads (at most 6 transactions each).
    #[arg(long)]
    random: Option<usize>,
    /// Comma-separated claims: ser, si, rc, ru, psi, psia, cc4.
    #[arg(long, default_value = "ser,si,rc,ru,psi,psia,cc4")]
    levels: String,
    /// Seed for the random corpus.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report to this path.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Parses argv and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version output.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Crosscheck(args) => cmd_crosscheck(args),
    }
}

fn read_workload(path: &PathBuf) -> Result<Workload, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_history(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn budget_from_env() -> SearchBudget {
    let mut budget = SearchBudget::default();
    if let Ok(text) = std::env::var("STATECHECK_BUDGET") {
        let mut parts = text.splitn(2, ',');
        if let Some(Ok(n)) = parts.next().map(|p| p.trim().parse::<usize>()) {
            budget.max_exhaustive = n;
        }
        if let Some(Ok(n)) = parts.next().map(|p| p.trim().parse::<u64>()) {
            budget.node_limit = n;
        }
    }
    budget
}

fn parse_level(s: &str) -> Result<IsolationLevel, String> {
    IsolationLevel::from_str(s)
}

fn parse_guarantees(s: &str) -> Result<GuaranteeSet, String> {
    let gs: Vec<SessionGuarantee> = s
        .split(',')
        .filter(|p| !p.is_empty())
        .map(SessionGuarantee::from_str)
        .collect::<Result<_, _>>()?;
    GuaranteeSet::new(gs).map_err(|e| e.to_string())
}

fn cmd_check(args: CheckArgs) -> Result<i32, String> {
    let w = read_workload(&args.input)?;
    let mut budget = budget_from_env();
    if let Some(b) = args.budget {
        budget.max_exhaustive = b;
    }

    enum Mode {
        Isolation(IsolationLevel),
        Session(GuaranteeSet),
    }
    let mode = match (&args.level, &args.guarantees) {
        (Some(l), None) => Mode::Isolation(parse_level(l)?),
        (None, Some(g)) => Mode::Session(parse_guarantees(g)?),
        _ => return Err("exactly one of --level or --guarantees is required".to_string()),
    };

    // Replay mode: verify a witness file instead of searching.
    if let Some(path) = &args.replay {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let wf = WitnessFile::parse(&text).map_err(|e| e.to_string())?;
        let witness = wf.to_witness(&w).map_err(|e| e.to_string())?;
        let ok = match (&mode, &witness) {
            (Mode::Isolation(level), Witness::Execution(e)) => {
                verify_isolation_witness(&w, *level, e).map_err(|e| e.to_string())?
            }
            (Mode::Session(gs), Witness::PerSession(m)) => verify_session_witness(&w, gs, m),
            _ => return Err("witness shape does not match the requested check".to_string()),
        };
        if ok {
            println!("witness verified: all tests pass");
            return Ok(EXIT_SATISFIED);
        }
        println!("witness rejected: some test fails under replay");
        return Ok(EXIT_VIOLATED);
    }

    let verdict = match &mode {
        Mode::Isolation(level) => {
            check_isolation(&w, *level, &budget).map_err(|e| e.to_string())?
        }
        Mode::Session(gs) => check_session(&w, gs, &budget).map_err(|e| e.to_string())?,
    };
    match verdict {
        Verdict::Satisfied(witness) => {
            match &witness {
                Witness::Execution(e) => {
                    let names: Vec<&str> = e.order().iter().map(|&t| w.txn_name(t)).collect();
                    println!("satisfied; witness order: [{}]", names.join(", "));
                }
                Witness::PerSession(m) => {
                    println!("satisfied; per-session witnesses:");
                    for (sid, e) in m {
                        let names: Vec<&str> =
                            e.order().iter().map(|&t| w.txn_name(t)).collect();
                        println!("  {sid}: [{}]", names.join(", "));
                    }
                }
            }
            if let Some(path) = &args.witness {
                let mut wf = WitnessFile::from_witness(&w, &witness);
                if let Witness::Execution(e) = &witness {
                    // A shared execution induces a version order, and for
                    // the snapshot level a start/commit assignment; record
                    // both so the oracle can replay the same certificate.
                    wf = wf.with_version_order(&w, &derive_version_order(&w, e));
                    if matches!(mode, Mode::Isolation(IsolationLevel::SnapshotIsolation)) {
                        if let Ok(ts) = assign_timestamps(&w, e) {
                            wf = wf.with_timestamps(&w, &ts);
                        }
                    } else if let Some(ts) = w.all_timestamps() {
                        wf = wf.with_timestamps(&w, &ts);
                    }
                }
                fs::write(path, wf.to_json()).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(EXIT_SATISFIED)
        }
        Verdict::Violated(diag) => {
            println!("violated");
            println!("{diag}");
            Ok(EXIT_VIOLATED)
        }
        Verdict::BudgetExceeded(msg) => {
            println!("budget exceeded: {msg}");
            Ok(EXIT_BUDGET)
        }
    }
}

fn print_phenomena(report: &PhenomenaReport) {
    println!("G0={}", report.g0);
    println!("G1a={}", report.g1a);
    println!("G1b={}", report.g1b);
    println!("G1c={}", report.g1c);
    println!("G2={}", report.g2);
    println!("G-single={}", report.g_single);
    match report.g_sia {
        Some(b) => println!("G-SIa={b}"),
        None => println!("G-SIa=n/a (no timestamps)"),
    }
    match report.g_sib {
        Some(b) => println!("G-SIb={b}"),
        None => println!("G-SIb=n/a (no timestamps)"),
    }
}

fn print_version_order(w: &Workload, vo: &VersionOrder) {
    for k in w.keys() {
        let names: Vec<&str> = vo.of_key(k).iter().map(|&t| w.txn_name(t)).collect();
        println!("version order {}: [{}]", w.key_name(k), names.join(" << "));
    }
}

type DerivedOrder = (VersionOrder, Option<Vec<(i64, i64)>>);

fn cmd_oracle(args: OracleArgs) -> Result<i32, String> {
    let w = read_workload(&args.input)?;
    let oracle_budget = OracleBudget::default();

    // Resolve the version order (and ranks) to report against.
    let derived: Option<DerivedOrder> =
        if let Some(path) = args.version_order.strip_prefix("derive:") {
            let text =
                fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            let wf = WitnessFile::parse(&text).map_err(|e| e.to_string())?;
            let witness = wf.to_witness(&w).map_err(|e| e.to_string())?;
            let e = match witness {
                Witness::Execution(e) => e,
                Witness::PerSession(_) => {
                    return Err("per-session witnesses carry no single version order".to_string())
                }
            };
            let vo = derive_version_order(&w, &e);
            let ts = assign_timestamps(&w, &e).ok();
            Some((vo, ts))
        } else if args.version_order == "enumerate" {
            None
        } else {
            return Err(format!(
                "--version-order must be \"enumerate\" or \"derive:<witness>\", got {:?}",
                args.version_order
            ));
        };

    if let Some(pl) = &args.pl {
        let level = match pl.to_ascii_lowercase().as_str() {
            "pl1" | "ru" => IsolationLevel::ReadUncommitted,
            "pl2" | "rc" => IsolationLevel::ReadCommitted,
            "pl2plus" | "psi" => IsolationLevel::ParallelSnapshotIsolation,
            "pl3" | "ser" => IsolationLevel::Serializability,
            "si" => IsolationLevel::SnapshotIsolation,
            other => return Err(format!("unknown PL level {other:?}")),
        };
        let outcome = if let Some((vo, ts)) = &derived {
            // Judge the supplied version order directly.
            let report = phenomena_report(&w, vo, ts.as_deref());
            let satisfied = match level {
                IsolationLevel::ReadUncommitted => !report.g0,
                IsolationLevel::ReadCommitted => !report.g1a && !report.g1b && !report.g1c,
                IsolationLevel::ParallelSnapshotIsolation => {
                    !report.g1a && !report.g1b && !report.g1c && !report.g_single
                }
                IsolationLevel::Serializability => {
                    !report.g1a && !report.g1b && !report.g1c && !report.g2
                }
                IsolationLevel::SnapshotIsolation => {
                    let si_ok = match (report.g_sia, report.g_sib) {
                        (Some(a), Some(b)) => !a && !b,
                        _ => return Err("snapshot isolation needs timestamps; the witness execution admits none".to_string()),
                    };
                    !report.g1a && !report.g1b && !report.g1c && si_ok
                }
                _ => unreachable!(),
            };
            crate::adya::PlOutcome {
                satisfied,
                version_order: Some(vo.clone()),
                timestamps: ts.clone(),
            }
        } else {
            pl_check(&w, level, &oracle_budget).map_err(|e| match e {
                OracleError::BudgetExceeded(msg) => msg,
                other => other.to_string(),
            })?
        };
        if outcome.satisfied {
            println!("oracle: {pl} satisfied");
            if let Some(vo) = &outcome.version_order {
                print_version_order(&w, vo);
            }
            if let Some(ts) = &outcome.timestamps {
                for t in w.txns() {
                    println!(
                        "timestamps {}: start={} commit={}",
                        w.txn_name(t),
                        ts[t.ix()].0,
                        ts[t.ix()].1
                    );
                }
            }
            return Ok(EXIT_SATISFIED);
        }
        println!("oracle: {pl} violated");
        return Ok(EXIT_VIOLATED);
    }

    if !args.phenomena {
        return Err("one of --phenomena or --pl is required".to_string());
    }

    if let Some((vo, ts)) = &derived {
        print_version_order(&w, vo);
        print_phenomena(&phenomena_report(&w, vo, ts.as_deref()));
        return Ok(EXIT_SATISFIED);
    }

    // Report phenomena under the version order witnessing the strongest
    // satisfiable PL level, so avoidable anomalies are not over-reported.
    let ladder = [
        IsolationLevel::Serializability,
        IsolationLevel::SnapshotIsolation,
        IsolationLevel::ParallelSnapshotIsolation,
        IsolationLevel::ReadCommitted,
        IsolationLevel::ReadUncommitted,
    ];
    for level in ladder {
        let outcome = pl_check(&w, level, &oracle_budget).map_err(|e| e.to_string())?;
        if outcome.satisfied {
            println!("strongest level: {}", level);
            let vo = outcome.version_order.expect("witnessing order");
            print_version_order(&w, &vo);
            print_phenomena(&phenomena_report(&w, &vo, outcome.timestamps.as_deref()));
            return Ok(EXIT_SATISFIED);
        }
    }
    // Even write-cycle freedom fails; report under the first order.
    let vo = crate::adya::enumerate_version_orders(&w, 1_000_000)
        .map_err(|e| e.to_string())?
        .next()
        .expect("at least one version order");
    println!("strongest level: none");
    print_version_order(&w, &vo);
    print_phenomena(&phenomena_report(&w, &vo, None));
    Ok(EXIT_SATISFIED)
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = lo.trim().parse::<usize>().map_err(|e| e.to_string())?;
        let hi = hi.trim().parse::<usize>().map_err(|e| e.to_string())?;
        if lo == 0 || hi < lo {
            return Err(format!("bad range {s:?}"));
        }
        Ok((lo, hi))
    } else {
        let n = s.trim().parse::<usize>().map_err(|e| e.to_string())?;
        if n == 0 {
            return Err("count must be positive".to_string());
        }
        Ok((n, n))
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<i32, String> {
    let params = GenParams {
        sessions: args.sessions,
        txns_per_session: parse_range(&args.txns)?,
        ops_per_txn: parse_range(&args.ops)?,
        keys: args.keys,
        read_fraction: args.read_frac,
        seed: args.seed,
    };
    if params.sessions == 0 || params.keys == 0 {
        return Err("--sessions and --keys must be positive".to_string());
    }
    let w = match &args.level {
        None => generate_workload(&params),
        Some(level) => {
            let level = parse_level(level)?;
            let skel = generate_skeleton(&params);
            simulate_level(&skel, level, params.seed).map_err(|e| e.to_string())?
        }
    };
    let json = HistoryFile::from_workload(&w).to_json();
    fs::write(&args.output, json).map_err(|e| format!("{}: {e}", args.output.display()))?;
    println!(
        "wrote {} ({} transactions, digest {})",
        args.output.display(),
        w.n_txns(),
        workload_digest(&w)
    );
    Ok(EXIT_SATISFIED)
}

fn cmd_crosscheck(args: CrosscheckArgs) -> Result<i32, String> {
    let levels: Vec<CrossLevel> = args
        .levels
        .split(',')
        .filter(|p| !p.is_empty())
        .map(CrossLevel::from_str)
        .collect::<Result<_, _>>()?;
    if levels.is_empty() {
        return Err("--levels must name at least one claim".to_string());
    }
    let cases: Vec<Workload> = match (&args.bounds, args.random) {
        (Some(bounds), None) => {
            let parts: Vec<usize> = bounds
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            if parts.len() != 4 {
                return Err("--bounds takes TXNS,OPS,KEYS,SESSIONS".to_string());
            }
            let b = EnumBounds {
                max_txns: parts[0],
                max_ops: parts[1],
                keys: parts[2],
                max_sessions: parts[3],
            };
            enumerate_small_workloads(&b)
        }
        (None, Some(count)) => random_corpus(count, 6, args.seed),
        (None, None) => enumerate_small_workloads(&EnumBounds::default()),
        _ => return Err("--bounds and --random are mutually exclusive".to_string()),
    };
    let report = crosscheck(&cases, &levels);
    println!(
        "cases={} agreements={} disagreements={} budget_exceeded={} skipped={}",
        report.cases,
        report.agreements,
        report.disagreements.len(),
        report.budget_exceeded,
        report.skipped
    );
    for d in &report.disagreements {
        println!(
            "disagreement[{}] {}: checker={} oracle={}",
            d.level, d.digest, d.checker, d.oracle
        );
    }
    if let Some(path) = &args.output {
        fs::write(path, report.to_json()).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(if report.passed() { EXIT_SATISFIED } else { EXIT_VIOLATED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_range_forms() {
        assert_eq!(parse_range("3").unwrap(), (3, 3));
        assert_eq!(parse_range("1..4").unwrap(), (1, 4));
        assert!(parse_range("0").is_err());
        assert!(parse_range("4..1").is_err());
    }
}
