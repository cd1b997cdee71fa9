//! Write skew: two withdrawals read the same balances and update
//! disjoint accounts. Serializability rejects the history; snapshot
//! isolation (and parallel snapshot isolation) admit it.
//!
//! Run with `cargo run --example banking_write_skew`.

use statecheck::formats::WitnessFile;
use statecheck::model::txn;
use statecheck::{
    check_isolation, IsolationLevel, SearchBudget, Value, Verdict, Witness, Workload,
};

fn main() {
    // Checking and savings both start at 30. Alice withdraws 40 from
    // checking, Bob withdraws 40 from savings; each first checks that the
    // combined balance covers the withdrawal.
    let w = Workload::builder()
        .session("init", vec![txn("t0").w("C", "30").w("S", "30")])
        .session("alice", vec![txn("t_w1").r("C", "30").r("S", "30").w("C", "-10")])
        .session("bob", vec![txn("t_w2").r("C", "30").r("S", "30").w("S", "-10")])
        .build()
        .expect("valid workload");

    let budget = SearchBudget::default();
    for level in [
        IsolationLevel::Serializability,
        IsolationLevel::SnapshotIsolation,
        IsolationLevel::ParallelSnapshotIsolation,
    ] {
        match check_isolation(&w, level, &budget).expect("no timestamps needed") {
            Verdict::Satisfied(witness) => {
                let e = witness.as_execution().expect("isolation witness");
                let order: Vec<&str> = e.order().iter().map(|&t| w.txn_name(t)).collect();
                println!("{level}: satisfied, witness order [{}]", order.join(", "));
                if level == IsolationLevel::SnapshotIsolation {
                    // Walk the witness states: both withdrawals read from
                    // the state the deposit produced, not their parents.
                    for (i, s) in e.states().iter().enumerate() {
                        let vals: Vec<String> = w
                            .keys()
                            .map(|k| {
                                let v = match s.get(k) {
                                    Value::Bottom => "⊥".to_string(),
                                    v => w.value_literal(k, v).unwrap(),
                                };
                                format!("{}={v}", w.key_name(k))
                            })
                            .collect();
                        println!("  s{i}: {}", vals.join(" "));
                    }
                    println!("  witness file:\n{}", indent(&WitnessFile::from_witness(&w, &Witness::Execution(e.clone())).to_json()));
                }
            }
            Verdict::Violated(diag) => println!("{level}: violated — {diag}"),
            Verdict::BudgetExceeded(msg) => println!("{level}: budget exceeded — {msg}"),
        }
    }
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}
