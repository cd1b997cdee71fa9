//! `statecheck` decides, for an observed history of sessions and committed
//! transactions, whether some execution — a total order over the
//! transactions plus the key-value states it induces — satisfies a chosen
//! isolation level's commit test or a session guarantee's session test.
//! Verdicts come with replayable witnesses or a diagnosis of the failing
//! clause.
//!
//! The state-based checker is cross-validated against an independent
//! dependency-graph oracle (version orders, DSG/SSG construction, the
//! G0/G1/G2/G-single/G-SI phenomena and PL levels), and against an
//! axiomatic visibility/arbitration formulation of parallel snapshot
//! isolation. The [`harness`] module enumerates small workloads
//! exhaustively, simulates level-conforming histories, and drives the
//! agreement suites; [`cli`] exposes everything as subcommands.

pub mod adya;
pub mod cli;
pub mod commit;
pub mod formats;
pub mod harness;
pub mod model;
pub mod search;
pub mod session;

pub use commit::IsolationLevel;
pub use model::{
    apply_transaction, state_delta, txn, Execution, Key, OpKind, Operation, ReadStateSpan,
    SessionId, State, Transaction, TxnId, Value, Workload, WorkloadBuilder, WorkloadError,
};
pub use search::{check_isolation, check_session, SearchBudget, Verdict, Witness};
pub use session::{GuaranteeSet, SessionGuarantee};
