//! The dependency-graph oracle: build serialization graphs under derived
//! version orders, detect the classic phenomena, and climb the PL-level
//! ladder. All of it is independent of the state-based commit tests.
//!
//! Run with `cargo run --example oracle_phenomena`.

use statecheck::adya::{
    assign_timestamps, build_dsg, derive_version_order, detect, pl_check, OracleBudget,
    Phenomenon,
};
use statecheck::model::{txn, Execution};
use statecheck::{IsolationLevel, Workload};

fn main() {
    let w = Workload::builder()
        .session("init", vec![txn("t0").w("C", "30").w("S", "30")])
        .session("alice", vec![txn("t_w1").r("C", "30").r("S", "30").w("C", "-10")])
        .session("bob", vec![txn("t_w2").r("C", "30").r("S", "30").w("S", "-10")])
        .build()
        .unwrap();

    // Version order induced by one particular execution.
    let order = ["t0", "t_w1", "t_w2"]
        .iter()
        .map(|n| w.txn_by_name(n).unwrap())
        .collect();
    let e = Execution::build(&w, order).unwrap();
    let vo = derive_version_order(&w, &e);
    let g = build_dsg(&w, &vo);

    println!("direct serialization graph under [t0, t_w1, t_w2]:");
    for edge in &g.edges {
        let key = edge.key.map(|k| w.key_name(k).to_string()).unwrap_or_default();
        println!(
            "  {} --{}({})--> {}",
            w.txn_name(edge.from),
            edge.kind,
            key,
            w.txn_name(edge.to)
        );
    }

    println!("\nphenomena:");
    for p in [
        Phenomenon::G0,
        Phenomenon::G1a,
        Phenomenon::G1b,
        Phenomenon::G1c,
        Phenomenon::G2,
        Phenomenon::GSingle,
    ] {
        println!("  {p} = {}", detect(&g, p, &w).unwrap());
    }

    let ts = assign_timestamps(&w, &e).unwrap();
    println!("\nderived start/commit ranks:");
    for t in w.txns() {
        println!("  {}: start={} commit={}", w.txn_name(t), ts[t.ix()].0, ts[t.ix()].1);
    }

    println!("\nlevel ladder:");
    let budget = OracleBudget::default();
    for level in [
        IsolationLevel::Serializability,
        IsolationLevel::SnapshotIsolation,
        IsolationLevel::ParallelSnapshotIsolation,
        IsolationLevel::ReadCommitted,
        IsolationLevel::ReadUncommitted,
    ] {
        let outcome = pl_check(&w, level, &budget).unwrap();
        println!("  {level}: {}", if outcome.satisfied { "satisfied" } else { "violated" });
    }
}
