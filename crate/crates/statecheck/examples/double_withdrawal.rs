//! The classic read-committed anomaly: an account holds 50 with no
//! overdraft, yet two concurrent withdrawals of 45 both read the opening
//! balance and both commit. Read committed admits the history;
//! serializability does not.
//!
//! Run with `cargo run --example double_withdrawal`.

use statecheck::model::txn;
use statecheck::{check_isolation, IsolationLevel, SearchBudget, Verdict, Workload};

fn main() {
    let w = Workload::builder()
        .session("bank", vec![txn("t0").w("acct", "50")])
        .session("atm1", vec![txn("t1").r("acct", "50").w("acct", "5-by-t1")])
        .session("atm2", vec![txn("t2").r("acct", "50").w("acct", "5-by-t2")])
        .build()
        .expect("valid workload");

    let budget = SearchBudget::default();
    for level in [IsolationLevel::ReadCommitted, IsolationLevel::Serializability] {
        match check_isolation(&w, level, &budget).unwrap() {
            Verdict::Satisfied(witness) => {
                let e = witness.as_execution().unwrap();
                let order: Vec<&str> = e.order().iter().map(|&t| w.txn_name(t)).collect();
                println!("{level}: satisfied with [{}]", order.join(", "));
                println!(
                    "  every read has some earlier state to read from, so each withdrawal"
                );
                println!("  legitimately saw 50 — and the account still went negative.");
            }
            Verdict::Violated(diag) => {
                println!("{level}: violated");
                println!("  {diag}");
            }
            Verdict::BudgetExceeded(msg) => println!("{level}: budget exceeded — {msg}"),
        }
    }
}
