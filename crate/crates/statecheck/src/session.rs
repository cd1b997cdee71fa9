//! Session tests: read-my-writes, monotonic reads, monotonic writes,
//! writes-follow-reads, causal consistency, and conjunctions of guarantee
//! sets, each judged per transaction against one candidate execution.
//!
//! Unlike commit tests, session guarantees let every session observe its
//! own execution; the quantifier flip (for every session there exists an
//! execution) is handled by [`crate::search::check_session`]. The
//! monotonic-writes and writes-follow-reads clauses still range over all
//! sessions of the workload, and writes-follow-reads requires `PREREAD`
//! over all transactions, not just the session's.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::commit::{commit_test, CommitTestError, IsolationLevel};
use crate::model::{ExecView, Execution, SessionId, TxnId, Workload};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SessionGuarantee {
    ReadMyWrites,
    MonotonicReads,
    MonotonicWrites,
    WritesFollowReads,
    CausalConsistency,
}

impl SessionGuarantee {
    pub const ALL: [SessionGuarantee; 5] = [
        SessionGuarantee::ReadMyWrites,
        SessionGuarantee::MonotonicReads,
        SessionGuarantee::MonotonicWrites,
        SessionGuarantee::WritesFollowReads,
        SessionGuarantee::CausalConsistency,
    ];

    pub fn token(self) -> &'static str {
        match self {
            SessionGuarantee::ReadMyWrites => "rmw",
            SessionGuarantee::MonotonicReads => "mr",
            SessionGuarantee::MonotonicWrites => "mw",
            SessionGuarantee::WritesFollowReads => "wfr",
            SessionGuarantee::CausalConsistency => "cc",
        }
    }
}

impl fmt::Display for SessionGuarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SessionGuarantee {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SessionGuarantee::ALL
            .into_iter()
            .find(|g| g.token() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown session guarantee {s:?}"))
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("a guarantee set must not be empty")]
pub struct EmptyGuaranteeSet;

/// A non-empty set of session guarantees checked as a conjunction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GuaranteeSet(BTreeSet<SessionGuarantee>);

impl GuaranteeSet {
    pub fn new(gs: impl IntoIterator<Item = SessionGuarantee>) -> Result<Self, EmptyGuaranteeSet> {
        let set: BTreeSet<_> = gs.into_iter().collect();
        if set.is_empty() {
            return Err(EmptyGuaranteeSet);
        }
        Ok(GuaranteeSet(set))
    }

    pub fn of(g: SessionGuarantee) -> Self {
        GuaranteeSet([g].into())
    }

    /// The four classic guarantees, jointly equivalent to causal
    /// consistency.
    pub fn four() -> Self {
        GuaranteeSet(
            [
                SessionGuarantee::ReadMyWrites,
                SessionGuarantee::MonotonicReads,
                SessionGuarantee::MonotonicWrites,
                SessionGuarantee::WritesFollowReads,
            ]
            .into(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = SessionGuarantee> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, g: SessionGuarantee) -> bool {
        self.0.contains(&g)
    }
}

impl fmt::Display for GuaranteeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<&str> = self.0.iter().map(|g| g.token()).collect();
        f.write_str(&toks.join(","))
    }
}

/// Read-my-writes: reads see the session's earlier updates.
pub fn st_rmw(w: &Workload, e: &Execution, se: SessionId, t: TxnId) -> bool {
    st_rmw_view(&e.view(w), se, t)
}

/// Monotonic reads: the session's reads observe monotonically advancing
/// states, including within each transaction.
pub fn st_mr(w: &Workload, e: &Execution, se: SessionId, t: TxnId) -> bool {
    st_mr_view(&e.view(w), se, t)
}

/// Monotonic writes: updates take effect in session order, in every
/// session of the workload.
pub fn st_mw(w: &Workload, e: &Execution, se: SessionId, t: TxnId) -> bool {
    st_mw_view(&e.view(w), se, t)
}

/// Writes-follow-reads: updates are ordered after the states their
/// session predecessors read from, in every session of the workload.
pub fn st_wfr(w: &Workload, e: &Execution, se: SessionId, t: TxnId) -> bool {
    st_wfr_view(&e.view(w), se, t)
}

/// Causal consistency: session order is respected everywhere, reads see
/// all session predecessors, and reads advance monotonically.
pub fn st_cc(w: &Workload, e: &Execution, se: SessionId, t: TxnId) -> bool {
    st_cc_view(&e.view(w), se, t)
}

/// Dispatches to one guarantee's session test.
pub fn session_test(
    w: &Workload,
    e: &Execution,
    g: SessionGuarantee,
    se: SessionId,
    t: TxnId,
) -> bool {
    let v = e.view(w);
    session_test_view(&v, g, se, t)
}

/// Conjunction of every guarantee in the set.
pub fn st_set(w: &Workload, e: &Execution, gs: &GuaranteeSet, se: SessionId, t: TxnId) -> bool {
    let v = e.view(w);
    gs.iter().all(|g| session_test_view(&v, g, se, t))
}

/// Session guarantees combined with an isolation level: the session test
/// and the level's commit test must both hold for `t` in `e`.
pub fn st_with_isolation(
    w: &Workload,
    e: &Execution,
    gs: &GuaranteeSet,
    level: IsolationLevel,
    se: SessionId,
    t: TxnId,
) -> Result<bool, CommitTestError> {
    Ok(st_set(w, e, gs, se, t) && commit_test(w, e, level, t)?)
}

pub(crate) fn session_test_view(v: &ExecView<'_>, g: SessionGuarantee, se: SessionId, t: TxnId) -> bool {
    match g {
        SessionGuarantee::ReadMyWrites => st_rmw_view(v, se, t),
        SessionGuarantee::MonotonicReads => st_mr_view(v, se, t),
        SessionGuarantee::MonotonicWrites => st_mw_view(v, se, t),
        SessionGuarantee::WritesFollowReads => st_wfr_view(v, se, t),
        SessionGuarantee::CausalConsistency => st_cc_view(v, se, t),
    }
}

fn session_predecessors<'w>(v: &ExecView<'w>, se: SessionId, t: TxnId) -> &'w [TxnId] {
    let txns = &v.w.session(se).txns;
    let ix = txns.iter().position(|&x| x == t).expect("transaction not in session");
    &txns[..ix]
}

fn preread_session(v: &ExecView<'_>, se: SessionId) -> bool {
    v.w.session(se).txns.iter().all(|&t| v.preread_txn(t))
}

fn preread_all(v: &ExecView<'_>) -> bool {
    v.w.txns().all(|t| v.preread_txn(t))
}

pub(crate) fn st_rmw_view(v: &ExecView<'_>, se: SessionId, t: TxnId) -> bool {
    if !preread_session(v, se) {
        return false;
    }
    let preds = session_predecessors(v, se, t);
    for op_ix in 0..v.w.txn(t).ops.len() {
        let span = match v.span(t, op_ix) {
            Some(s) => s,
            None => return false,
        };
        for &prior in preds {
            if v.w.txn(prior).is_update() && v.state_ix(prior) > span.last {
                return false;
            }
        }
    }
    true
}

pub(crate) fn st_mr_view(v: &ExecView<'_>, se: SessionId, t: TxnId) -> bool {
    if !preread_session(v, se) || !v.irc(t) {
        return false;
    }
    let preds = session_predecessors(v, se, t);
    for op_ix in 0..v.w.txn(t).ops.len() {
        let span = match v.span(t, op_ix) {
            Some(s) => s,
            None => return false,
        };
        for &prior in preds {
            for prior_ix in 0..v.w.txn(prior).ops.len() {
                match v.span(prior, prior_ix) {
                    Some(p) => {
                        if span.last < p.first {
                            return false;
                        }
                    }
                    None => return false,
                }
            }
        }
    }
    true
}

pub(crate) fn st_mw_view(v: &ExecView<'_>, se: SessionId, _t: TxnId) -> bool {
    if !preread_session(v, se) {
        return false;
    }
    global_update_order(v)
}

/// Updates of every session take effect in session order.
fn global_update_order(v: &ExecView<'_>) -> bool {
    for s in v.w.sessions() {
        let txns = &v.w.session(s).txns;
        for (i, &ti) in txns.iter().enumerate() {
            if !v.w.txn(ti).is_update() {
                continue;
            }
            for &tj in &txns[i + 1..] {
                if v.w.txn(tj).is_update() && v.state_ix(ti) >= v.state_ix(tj) {
                    return false;
                }
            }
        }
    }
    true
}

pub(crate) fn st_wfr_view(v: &ExecView<'_>, _se: SessionId, _t: TxnId) -> bool {
    if !preread_all(v) {
        return false;
    }
    for s in v.w.sessions() {
        let txns = &v.w.session(s).txns;
        for (i, &ti) in txns.iter().enumerate() {
            for &tj in &txns[i + 1..] {
                if !v.w.txn(tj).is_update() {
                    continue;
                }
                for op_ix in 0..v.w.txn(ti).ops.len() {
                    match v.span(ti, op_ix) {
                        Some(span) => {
                            if span.first >= v.state_ix(tj) {
                                return false;
                            }
                        }
                        None => return false,
                    }
                }
            }
        }
    }
    true
}

pub(crate) fn st_cc_view(v: &ExecView<'_>, se: SessionId, t: TxnId) -> bool {
    if !preread_all(v) || !v.irc(t) {
        return false;
    }
    // Reads of t see every session predecessor.
    let preds = session_predecessors(v, se, t);
    for op_ix in 0..v.w.txn(t).ops.len() {
        let span = match v.span(t, op_ix) {
            Some(s) => s,
            None => return false,
        };
        for &prior in preds {
            if v.state_ix(prior) > span.last {
                return false;
            }
        }
    }
    // Every session's transactions take effect in session order.
    for s in v.w.sessions() {
        let txns = &v.w.session(s).txns;
        for (i, &ti) in txns.iter().enumerate() {
            for &tj in &txns[i + 1..] {
                if v.state_ix(ti) >= v.state_ix(tj) {
                    return false;
                }
            }
        }
    }
    true
}
