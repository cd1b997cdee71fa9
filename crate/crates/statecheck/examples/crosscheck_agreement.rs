//! Cross-validation: the state-based checker and the graph oracle are
//! independent implementations that must agree. This drives all seven
//! agreement claims over an exhaustive family of small workloads and a
//! random corpus, and prints the report.
//!
//! Run with `cargo run --release --example crosscheck_theorems`.

use std::time::Instant;

use statecheck::harness::{
    crosscheck, enumerate_small_workloads, random_corpus, CrossLevel, EnumBounds,
};

fn main() {
    let bounds = EnumBounds { max_txns: 3, max_ops: 2, keys: 2, max_sessions: 2 };
    let t0 = Instant::now();
    let family = enumerate_small_workloads(&bounds);
    println!(
        "enumerated {} canonical workloads (≤{} txns, ≤{} ops, {} keys, ≤{} sessions) in {:?}",
        family.len(),
        bounds.max_txns,
        bounds.max_ops,
        bounds.keys,
        bounds.max_sessions,
        t0.elapsed()
    );

    for level in CrossLevel::ALL {
        let t0 = Instant::now();
        let report = crosscheck(&family, &[level]);
        println!(
            "{level:>5}: {} cases, {} agreements, {} disagreements, {} budget-exceeded ({:?})",
            report.cases,
            report.agreements,
            report.disagreements.len(),
            report.budget_exceeded,
            t0.elapsed()
        );
        for d in report.disagreements.iter().take(3) {
            println!("       !! {} checker={} oracle={}", d.digest, d.checker, d.oracle);
        }
    }

    let corpus = random_corpus(500, 6, 1);
    let report = crosscheck(&corpus, &[CrossLevel::Cc4]);
    println!(
        "random: {} cases of causal consistency vs the four guarantees, {} agreements",
        report.cases, report.agreements
    );
    std::process::exit(if report.passed() { 0 } else { 1 });
}
