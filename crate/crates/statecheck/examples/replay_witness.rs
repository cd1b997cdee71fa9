//! Witnesses are plain JSON and verifiable without searching: serialize
//! a verdict's execution order, read it back, and replay every commit
//! test against it.
//!
//! Run with `cargo run --example replay_witness`.

use statecheck::formats::{parse_history, workload_digest, WitnessFile};
use statecheck::search::verify_isolation_witness;
use statecheck::{check_isolation, IsolationLevel, SearchBudget, Verdict, Witness};

const HISTORY: &str = r#"{
  "sessions": [
    {"id": "s1", "transactions": [
      {"id": "t1", "ops": [{"type": "w", "key": "x", "value": "1"}]},
      {"id": "t2", "ops": [
        {"type": "r", "key": "x", "value": "1"},
        {"type": "w", "key": "y", "value": "2"}
      ]}
    ]},
    {"id": "s2", "transactions": [
      {"id": "t3", "ops": [{"type": "r", "key": "y", "value": "2"}]}
    ]}
  ]
}"#;

fn main() {
    let w = parse_history(HISTORY).expect("valid history");
    println!("history digest: {}", workload_digest(&w));

    let verdict =
        check_isolation(&w, IsolationLevel::Serializability, &SearchBudget::default()).unwrap();
    let witness = match verdict {
        Verdict::Satisfied(witness) => witness,
        other => panic!("expected satisfied, got {other:?}"),
    };

    let file = WitnessFile::from_witness(&w, &witness);
    let json = file.to_json();
    println!("witness file:\n{json}");

    // A fresh process would start here: parse, rebuild, replay.
    let reloaded = WitnessFile::parse(&json).unwrap();
    let rebuilt = match reloaded.to_witness(&w).unwrap() {
        Witness::Execution(e) => e,
        _ => unreachable!(),
    };
    let ok = verify_isolation_witness(&w, IsolationLevel::Serializability, &rebuilt).unwrap();
    println!("replay under serializability: {}", if ok { "all tests pass" } else { "rejected" });

    // The same order replayed against a stricter reading of time fails
    // only if the history carries timestamps; levels stay independent.
    let si_ok = verify_isolation_witness(&w, IsolationLevel::SnapshotIsolation, &rebuilt).unwrap();
    println!("replay under snapshot isolation: {}", if si_ok { "all tests pass" } else { "rejected" });
}
