//! Existential search: does some execution pass a level's commit test for
//! every transaction, and, per session, does some execution pass a
//! guarantee set's session test for the session's transactions?
//!
//! Within the exhaustive budget the search enumerates permutations
//! depth-first in lexicographic transaction-id order, pruning a prefix as
//! soon as some already-placed transaction's test can no longer hold. A
//! placed transaction's commit test only references states up to its own,
//! which later placements never change, so per-placement evaluation is an
//! exact prune; clauses that mention unplaced transactions are deferred
//! until both sides are placed. Every full-length candidate is re-checked
//! with the public tests before it is returned as a witness.
//!
//! Past the exhaustive budget, levels with a graph-side equivalent fall
//! back to the version-order oracle plus the constructive executions
//! below; levels without one report the budget instead of guessing.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::adya::{
    build_dsg, build_ssg, detect, enumerate_version_orders, AdyaHistory, ConflictEdge, EdgeKind,
    OracleError, Phenomenon, SerializationGraph,
};
use crate::commit::{
    commit_test, ct_psi_view, ct_ser_view, ct_si_view, CommitTestError, DependSets,
    IsolationLevel,
};
use crate::model::{
    apply_transaction, chain_states, ExecView, Execution, OpKind, PosMap, SessionId, State, TxnId,
    Workload,
};
use crate::session::{st_set, GuaranteeSet, SessionGuarantee};

/// Caps on the exhaustive search.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    /// Largest transaction count searched by full permutation enumeration.
    pub max_exhaustive: usize,
    /// Hard cap on placements explored before giving up.
    pub node_limit: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_exhaustive: 8, node_limit: 5_000_000 }
    }
}

/// A satisfied verdict's evidence: one shared execution for isolation
/// levels, one execution per session for session guarantees.
#[derive(Clone, Debug)]
pub enum Witness {
    Execution(Execution),
    PerSession(BTreeMap<String, Execution>),
}

impl Witness {
    pub fn as_execution(&self) -> Option<&Execution> {
        match self {
            Witness::Execution(e) => Some(e),
            Witness::PerSession(_) => None,
        }
    }

    pub fn as_per_session(&self) -> Option<&BTreeMap<String, Execution>> {
        match self {
            Witness::Execution(_) => None,
            Witness::PerSession(m) => Some(m),
        }
    }
}

/// Human-readable obstruction naming the failing clause.
#[derive(Clone, Debug)]
pub struct Diagnosis {
    pub clause: String,
    pub message: String,
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.clause, self.message)
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Satisfied(Witness),
    Violated(Diagnosis),
    /// The search space exceeded the budget; neither satisfied nor
    /// violated was established.
    BudgetExceeded(String),
}

impl Verdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::Satisfied(_))
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated(_))
    }

    pub fn is_budget_exceeded(&self) -> bool {
        matches!(self, Verdict::BudgetExceeded(_))
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    CommitTest(#[from] CommitTestError),
    #[error(transparent)]
    Guarantee(#[from] crate::session::EmptyGuaranteeSet),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("the relevant serialization graph is cyclic")]
    CyclicGraph,
    #[error("start/commit ranks are required")]
    MissingTimestamps,
    #[error("history violates the construction's precondition: {0}")]
    PreconditionFailed(String),
    #[error("witness invalid: {0}")]
    WitnessInvalid(String),
}

struct FailNote {
    depth: usize,
    clause: &'static str,
    message: String,
}

/// Incremental chain of placed transactions with shared prune bookkeeping.
struct Prefix<'w> {
    w: &'w Workload,
    order: Vec<TxnId>,
    states: Vec<State>,
    pos: Vec<i32>,
    nodes: u64,
    node_limit: u64,
    exceeded: bool,
    best_fail: Option<FailNote>,
}

impl<'w> Prefix<'w> {
    fn new(w: &'w Workload, node_limit: u64) -> Prefix<'w> {
        Prefix {
            w,
            order: Vec::with_capacity(w.n_txns()),
            states: vec![State::initial(w.n_keys())],
            pos: vec![-1; w.n_txns()],
            nodes: 0,
            node_limit,
            exceeded: false,
            best_fail: None,
        }
    }

    fn view(&self) -> ExecView<'_> {
        ExecView { w: self.w, states: &self.states, pos: PosMap::Partial(&self.pos) }
    }

    fn push(&mut self, t: TxnId) {
        let next = apply_transaction(self.w, self.states.last().unwrap(), t);
        self.pos[t.ix()] = self.order.len() as i32;
        self.order.push(t);
        self.states.push(next);
        self.nodes += 1;
        if self.nodes > self.node_limit {
            self.exceeded = true;
        }
    }

    fn pop(&mut self) {
        let t = self.order.pop().expect("pop on empty prefix");
        self.pos[t.ix()] = -1;
        self.states.pop();
    }

    fn note_fail(&mut self, clause: &'static str, message: impl FnOnce() -> String) {
        let depth = self.order.len();
        if self.best_fail.as_ref().is_none_or(|f| depth > f.depth) {
            self.best_fail = Some(FailNote { depth, clause, message: message() });
        }
    }

    fn prefix_names(&self) -> String {
        self.order.iter().map(|&t| self.w.txn_name(t)).join(", ")
    }
}

fn lex_order(w: &Workload) -> Vec<TxnId> {
    let mut ids: Vec<TxnId> = w.txns().collect();
    ids.sort_by(|a, b| w.txn_name(*a).cmp(w.txn_name(*b)));
    ids
}

/// Decides whether some execution satisfies the level's commit test for
/// every transaction. Exact (with pruning) up to `budget.max_exhaustive`
/// transactions; beyond that, levels with a graph-side equivalent are
/// decided through the version-order oracle and its constructive
/// executions. Witnesses are re-verified before they are returned.
pub fn check_isolation(
    w: &Workload,
    level: IsolationLevel,
    budget: &SearchBudget,
) -> Result<Verdict, CheckError> {
    let ranks = match level {
        IsolationLevel::StrictSerializability => {
            Some(w.all_timestamps().ok_or(CommitTestError::MissingTimestamps)?)
        }
        _ => None,
    };
    if w.n_txns() == 0 {
        let e = Execution::build(w, Vec::new()).expect("empty permutation");
        return Ok(Verdict::Satisfied(Witness::Execution(e)));
    }
    if level == IsolationLevel::ReadUncommitted {
        // The test is constant true: any order is a witness.
        let e = Execution::lexicographic(w);
        debug_assert!(verify_isolation_witness(w, level, &e).unwrap_or(false));
        return Ok(Verdict::Satisfied(Witness::Execution(e)));
    }
    if w.n_txns() > budget.max_exhaustive {
        return Ok(oracle_assisted(w, level, budget));
    }

    let mut px = Prefix::new(w, budget.node_limit);
    let candidates = lex_order(w);
    match dfs_isolation(&mut px, &candidates, level, ranks.as_deref()) {
        DfsOutcome::Found => {
            let e = Execution::build(w, px.order.clone()).expect("complete permutation");
            debug_assert!(verify_isolation_witness(w, level, &e).unwrap_or(false));
            Ok(Verdict::Satisfied(Witness::Execution(e)))
        }
        DfsOutcome::Exceeded => Ok(Verdict::BudgetExceeded(format!(
            "node limit of {} placements reached",
            budget.node_limit
        ))),
        DfsOutcome::Exhausted => {
            let diag = px
                .best_fail
                .map(|f| Diagnosis { clause: f.clause.to_string(), message: f.message })
                .unwrap_or_else(|| Diagnosis {
                    clause: "SEARCH".to_string(),
                    message: "no execution passes the commit test".to_string(),
                });
            Ok(Verdict::Violated(diag))
        }
    }
}

enum DfsOutcome {
    Found,
    Exhausted,
    Exceeded,
}

fn dfs_isolation(
    px: &mut Prefix<'_>,
    candidates: &[TxnId],
    level: IsolationLevel,
    ranks: Option<&[(i64, i64)]>,
) -> DfsOutcome {
    if px.order.len() == px.w.n_txns() {
        // Authoritative re-check of the complete candidate.
        let e = Execution::build(px.w, px.order.clone()).expect("complete permutation");
        let all_pass = px
            .w
            .txns()
            .all(|t| commit_test(px.w, &e, level, t).unwrap_or(false));
        debug_assert!(all_pass, "pruning admitted a failing execution");
        return if all_pass { DfsOutcome::Found } else { DfsOutcome::Exhausted };
    }
    for &t in candidates {
        if px.pos[t.ix()] >= 0 {
            continue;
        }
        px.push(t);
        if px.exceeded {
            return DfsOutcome::Exceeded;
        }
        if placed_ok_isolation(px, level, ranks, t) {
            match dfs_isolation(px, candidates, level, ranks) {
                DfsOutcome::Exhausted => {}
                found_or_exceeded => return found_or_exceeded,
            }
        }
        px.pop();
    }
    DfsOutcome::Exhausted
}

/// Commit-test check for the transaction just placed at the end of the
/// prefix. States up to the placed transaction's own are final, so a
/// failure here can never be repaired by later placements.
fn placed_ok_isolation(
    px: &mut Prefix<'_>,
    level: IsolationLevel,
    ranks: Option<&[(i64, i64)]>,
    t: TxnId,
) -> bool {
    let w = px.w;
    let v = px.view();
    let ok = match level {
        IsolationLevel::ReadUncommitted => true,
        IsolationLevel::ReadCommitted => v.preread_txn(t),
        IsolationLevel::Serializability => ct_ser_view(&v, t),
        IsolationLevel::SnapshotIsolation => ct_si_view(&v, t),
        IsolationLevel::ParallelSnapshotIsolation => {
            let deps = DependSets::compute_view(&v, &px.order);
            ct_psi_view(&v, &deps, t)
        }
        IsolationLevel::StrictSerializability => {
            let ranks = ranks.expect("ranks checked on entry");
            if !ct_ser_view(&v, t) {
                false
            } else {
                // Every real-time predecessor must already be placed.
                let start = ranks[t.ix()].0;
                w.txns().all(|other| {
                    other == t || ranks[other.ix()].1 >= start || v.placed(other)
                })
            }
        }
        IsolationLevel::SequentialConsistency => placed_ok_sc(&v, t),
    };
    if !ok {
        let (clause, msg) = isolation_fail_note(px, level, t);
        px.note_fail(clause, || msg);
    }
    ok
}

fn placed_ok_sc(v: &ExecView<'_>, t: TxnId) -> bool {
    if !v.preread_txn(t) || !v.irc(t) {
        return false;
    }
    let se = v.w.txn(t).session;
    let txns = &v.w.session(se).txns;
    let my_ix = txns.iter().position(|&x| x == t).expect("txn in its session");
    // Session predecessors must be placed (session order is respected),
    // and each one must be visible to every read of t.
    for &prior in &txns[..my_ix] {
        if !v.placed(prior) {
            return false;
        }
        for op_ix in 0..v.w.txn(t).ops.len() {
            match v.span(t, op_ix) {
                Some(span) => {
                    if v.state_ix(prior) > span.last {
                        return false;
                    }
                }
                None => return false,
            }
        }
    }
    true
}

fn isolation_fail_note(
    px: &Prefix<'_>,
    level: IsolationLevel,
    t: TxnId,
) -> (&'static str, String) {
    let w = px.w;
    let v = px.view();
    let name = w.txn_name(t);
    // Identify the most specific failing clause for the report.
    if let Some(op_ix) =
        (0..w.txn(t).ops.len()).find(|&i| v.span(t, i).is_none())
    {
        return (
            "PREREAD",
            format!(
                "no candidate read state for {} in txn {:?} after prefix [{}]",
                w.render_op(t, op_ix),
                name,
                px.prefix_names()
            ),
        );
    }
    match level {
        IsolationLevel::Serializability | IsolationLevel::StrictSerializability => (
            "COMPLETE",
            format!(
                "parent state of txn {:?} is not a candidate read state for all its operations (prefix [{}])",
                name,
                px.prefix_names()
            ),
        ),
        IsolationLevel::SnapshotIsolation => (
            "SNAPSHOT",
            format!(
                "no complete state for txn {:?} leaves its write set untouched up to its parent (prefix [{}])",
                name,
                px.prefix_names()
            ),
        ),
        IsolationLevel::ParallelSnapshotIsolation => (
            "DEP-VISIBILITY",
            format!(
                "some transaction in txn {:?}'s precede-set wrote a key it reads but is not visible to that read (prefix [{}])",
                name,
                px.prefix_names()
            ),
        ),
        IsolationLevel::SequentialConsistency => (
            "SESSION-ORDER",
            format!(
                "txn {:?} cannot take effect here without breaking its session's order or visibility (prefix [{}])",
                name,
                px.prefix_names()
            ),
        ),
        IsolationLevel::ReadCommitted | IsolationLevel::ReadUncommitted => (
            "PREREAD",
            format!("txn {:?} has an unreadable operation (prefix [{}])", name, px.prefix_names()),
        ),
    }
}

/// Replays a witness execution through the level's commit test for every
/// transaction.
pub fn verify_isolation_witness(
    w: &Workload,
    level: IsolationLevel,
    e: &Execution,
) -> Result<bool, CommitTestError> {
    for t in w.txns() {
        if !commit_test(w, e, level, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Replays per-session witnesses through the guarantee set's session
/// tests.
pub fn verify_session_witness(
    w: &Workload,
    gs: &GuaranteeSet,
    witnesses: &BTreeMap<String, Execution>,
) -> bool {
    w.sessions().all(|se| {
        let Some(e) = witnesses.get(&w.session(se).id) else {
            return false;
        };
        w.session(se).txns.iter().all(|&t| st_set(w, e, gs, se, t))
    })
}

/// Decides, for every session independently, whether some execution
/// satisfies the whole guarantee set for that session's transactions.
pub fn check_session(
    w: &Workload,
    gs: &GuaranteeSet,
    budget: &SearchBudget,
) -> Result<Verdict, CheckError> {
    if w.n_txns() > budget.max_exhaustive {
        return Ok(Verdict::BudgetExceeded(format!(
            "{} transactions exceed the exhaustive cap of {}; session tests have no graph-side fallback",
            w.n_txns(),
            budget.max_exhaustive
        )));
    }
    let mut witnesses = BTreeMap::new();
    for se in w.sessions() {
        let mut px = Prefix::new(w, budget.node_limit);
        let candidates = lex_order(w);
        match dfs_session(&mut px, &candidates, gs, se) {
            DfsOutcome::Found => {
                let e = Execution::build(w, px.order.clone()).expect("complete permutation");
                witnesses.insert(w.session(se).id.clone(), e);
            }
            DfsOutcome::Exceeded => {
                return Ok(Verdict::BudgetExceeded(format!(
                    "node limit of {} placements reached while searching session {:?}",
                    budget.node_limit,
                    w.session(se).id
                )))
            }
            DfsOutcome::Exhausted => {
                let diag = px
                    .best_fail
                    .map(|f| Diagnosis {
                        clause: f.clause.to_string(),
                        message: format!("session {:?}: {}", w.session(se).id, f.message),
                    })
                    .unwrap_or_else(|| Diagnosis {
                        clause: "SESSION-TEST".to_string(),
                        message: format!(
                            "no execution satisfies {} for session {:?}",
                            gs,
                            w.session(se).id
                        ),
                    });
                return Ok(Verdict::Violated(diag));
            }
        }
    }
    debug_assert!(verify_session_witness(w, gs, &witnesses));
    Ok(Verdict::Satisfied(Witness::PerSession(witnesses)))
}

fn dfs_session(
    px: &mut Prefix<'_>,
    candidates: &[TxnId],
    gs: &GuaranteeSet,
    se: SessionId,
) -> DfsOutcome {
    if px.order.len() == px.w.n_txns() {
        let e = Execution::build(px.w, px.order.clone()).expect("complete permutation");
        let all_pass = px
            .w
            .session(se)
            .txns
            .iter()
            .all(|&t| st_set(px.w, &e, gs, se, t));
        return if all_pass { DfsOutcome::Found } else { DfsOutcome::Exhausted };
    }
    for &t in candidates {
        if px.pos[t.ix()] >= 0 {
            continue;
        }
        px.push(t);
        if px.exceeded {
            return DfsOutcome::Exceeded;
        }
        if placed_ok_session(px, gs, se, t) {
            match dfs_session(px, candidates, gs, se) {
                DfsOutcome::Exhausted => {}
                found_or_exceeded => return found_or_exceeded,
            }
        }
        px.pop();
    }
    DfsOutcome::Exhausted
}

/// Necessary conditions over the placed transactions only; anything that
/// still mentions an unplaced transaction is deferred. The complete
/// candidate is always re-evaluated with the full session tests.
fn placed_ok_session(
    px: &mut Prefix<'_>,
    gs: &GuaranteeSet,
    se: SessionId,
    t: TxnId,
) -> bool {
    let w = px.w;
    let v = px.view();
    let in_session = w.txn(t).session == se;
    let global_scope = gs.contains(SessionGuarantee::WritesFollowReads)
        || gs.contains(SessionGuarantee::CausalConsistency);

    // PREREAD scope: the checked session's transactions always; all
    // transactions for the global guarantees.
    if (global_scope || in_session) && !v.preread_txn(t) {
        if let Some(op_ix) = (0..w.txn(t).ops.len()).find(|&i| v.span(t, i).is_none()) {
            let msg = format!(
                "no candidate read state for {} in txn {:?} after prefix [{}]",
                w.render_op(t, op_ix),
                w.txn_name(t),
                px.prefix_names()
            );
            px.note_fail("PREREAD", || msg);
        }
        return false;
    }

    let fail = |px: &mut Prefix<'_>, clause: &'static str, what: String| {
        let msg = format!("{what} (prefix [{}])", px.prefix_names());
        px.note_fail(clause, || msg);
        false
    };

    for g in gs.iter() {
        let v = px.view();
        match g {
            SessionGuarantee::ReadMyWrites => {
                if !in_session {
                    continue;
                }
                // Update predecessors must be placed and visible to reads.
                let txns = &w.session(se).txns;
                let my_ix = txns.iter().position(|&x| x == t).unwrap();
                for &prior in &txns[..my_ix] {
                    if !w.txn(prior).is_update() {
                        continue;
                    }
                    if !v.placed(prior) {
                        return fail(px, "READ-MY-WRITES", format!(
                            "txn {:?} placed before its session update {:?}",
                            w.txn_name(t), w.txn_name(prior)
                        ));
                    }
                    for op_ix in 0..w.txn(t).ops.len() {
                        let span = v.span(t, op_ix).expect("preread checked");
                        if v.state_ix(prior) > span.last {
                            return fail(px, "READ-MY-WRITES", format!(
                                "{} in txn {:?} cannot see session update {:?}",
                                w.render_op(t, op_ix), w.txn_name(t), w.txn_name(prior)
                            ));
                        }
                    }
                }
            }
            SessionGuarantee::MonotonicReads => {
                if in_session && !v.irc(t) {
                    return fail(px, "MONOTONIC-READS", format!(
                        "reads of txn {:?} regress within the transaction",
                        w.txn_name(t)
                    ));
                }
                // Pair clause whenever both sides are placed.
                if w.txn(t).session != se {
                    continue;
                }
                let txns = &w.session(se).txns;
                let my_ix = txns.iter().position(|&x| x == t).unwrap();
                let pairs = txns[..my_ix]
                    .iter()
                    .filter(|&&p| v.placed(p))
                    .map(|&p| (p, t))
                    .chain(
                        txns[my_ix + 1..]
                            .iter()
                            .filter(|&&s| v.placed(s))
                            .map(|&s| (t, s)),
                    )
                    .collect::<Vec<_>>();
                for (pred, succ) in pairs {
                    if !mr_pair_ok(&px.view(), pred, succ) {
                        return fail(px, "MONOTONIC-READS", format!(
                            "reads of txn {:?} regress behind reads of its session predecessor {:?}",
                            w.txn_name(succ), w.txn_name(pred)
                        ));
                    }
                }
            }
            SessionGuarantee::MonotonicWrites => {
                // Updates respect session order in every session.
                if !w.txn(t).is_update() {
                    continue;
                }
                let home = w.txn(t).session;
                let txns = &w.session(home).txns;
                let my_ix = txns.iter().position(|&x| x == t).unwrap();
                for &prior in &txns[..my_ix] {
                    if w.txn(prior).is_update() && !v.placed(prior) {
                        return fail(px, "MONOTONIC-WRITES", format!(
                            "update {:?} placed before its session update {:?}",
                            w.txn_name(t), w.txn_name(prior)
                        ));
                    }
                }
            }
            SessionGuarantee::WritesFollowReads => {
                // For every session pair (prior, update) with both sides
                // placed, every read state of the prior transaction must
                // strictly precede the update's state.
                for s in w.sessions() {
                    let txns = &w.session(s).txns;
                    for (i, &ti) in txns.iter().enumerate() {
                        for &tj in &txns[i + 1..] {
                            let (ti_here, tj_here) = (ti == t, tj == t);
                            if !(ti_here || tj_here) {
                                continue;
                            }
                            if !v.placed(ti) || !v.placed(tj) || !w.txn(tj).is_update() {
                                continue;
                            }
                            for op_ix in 0..w.txn(ti).ops.len() {
                                match v.span(ti, op_ix) {
                                    Some(span) => {
                                        if span.first >= v.state_ix(tj) {
                                            return fail(px, "WRITES-FOLLOW-READS", format!(
                                                "update {:?} not ordered after the state {} of {:?} read from",
                                                w.txn_name(tj), w.render_op(ti, op_ix), w.txn_name(ti)
                                            ));
                                        }
                                    }
                                    None => {
                                        return fail(px, "PREREAD", format!(
                                            "no candidate read state for {} in txn {:?}",
                                            w.render_op(ti, op_ix), w.txn_name(ti)
                                        ))
                                    }
                                }
                            }
                        }
                    }
                }
            }
            SessionGuarantee::CausalConsistency => {
                // Full session order everywhere, plus visibility of the
                // checked session's predecessors.
                let home = w.txn(t).session;
                let txns = &w.session(home).txns;
                let my_ix = txns.iter().position(|&x| x == t).unwrap();
                for &prior in &txns[..my_ix] {
                    if !v.placed(prior) {
                        return fail(px, "CAUSAL-ORDER", format!(
                            "txn {:?} placed before its session predecessor {:?}",
                            w.txn_name(t), w.txn_name(prior)
                        ));
                    }
                }
                if in_session {
                    if !v.irc(t) {
                        return fail(px, "CAUSAL-ORDER", format!(
                            "reads of txn {:?} regress within the transaction",
                            w.txn_name(t)
                        ));
                    }
                    for &prior in &txns[..my_ix] {
                        for op_ix in 0..w.txn(t).ops.len() {
                            let span = v.span(t, op_ix).expect("preread checked");
                            if v.state_ix(prior) > span.last {
                                return fail(px, "CAUSAL-VISIBILITY", format!(
                                    "{} in txn {:?} cannot see session predecessor {:?}",
                                    w.render_op(t, op_ix), w.txn_name(t), w.txn_name(prior)
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

fn mr_pair_ok(v: &ExecView<'_>, pred: TxnId, succ: TxnId) -> bool {
    for op_ix in 0..v.w.txn(succ).ops.len() {
        let span = match v.span(succ, op_ix) {
            Some(s) => s,
            None => return false,
        };
        for p_ix in 0..v.w.txn(pred).ops.len() {
            match v.span(pred, p_ix) {
                Some(p) => {
                    if span.last < p.first {
                        return false;
                    }
                }
                None => return false,
            }
        }
    }
    true
}

fn kahn_toposort(
    w: &Workload,
    g: &SerializationGraph,
    kinds: &[EdgeKind],
) -> Result<Vec<TxnId>, ConstructError> {
    let n = w.n_txns();
    let mut indeg = vec![0usize; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut seen = std::collections::BTreeSet::new();
    for e in &g.edges {
        if kinds.contains(&e.kind) && seen.insert((e.from, e.to)) {
            adj[e.from.ix()].push(e.to.ix());
            indeg[e.to.ix()] += 1;
        }
    }
    // Deterministic order: among ready nodes, smallest transaction id.
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let name = |i: usize| w.txn_name(TxnId(i as u32));
    let mut out = Vec::with_capacity(n);
    while !ready.is_empty() {
        let (pos, _) = ready
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| name(i))
            .expect("ready set non-empty");
        let u = ready.swap_remove(pos);
        out.push(TxnId(u as u32));
        for &vtx in &adj[u] {
            indeg[vtx] -= 1;
            if indeg[vtx] == 0 {
                ready.push(vtx);
            }
        }
    }
    if out.len() != n {
        return Err(ConstructError::CyclicGraph);
    }
    Ok(out)
}

fn require_resolvable_reads(w: &Workload) -> Result<(), ConstructError> {
    if w.has_ghost_reads() {
        return Err(ConstructError::PreconditionFailed(
            "some read resolves to no committed write".to_string(),
        ));
    }
    Ok(())
}

/// Builds an execution by topologically sorting the full direct
/// serialization graph. With no dirty reads and no dependency or
/// anti-dependency cycles, every transaction reads from its parent state.
pub fn construct_ser_execution(h: &AdyaHistory<'_>) -> Result<Execution, ConstructError> {
    let w = h.workload;
    require_resolvable_reads(w)?;
    let g = build_dsg(w, &h.version_order);
    let order = kahn_toposort(w, &g, &[EdgeKind::WriteWrite, EdgeKind::WriteRead, EdgeKind::ReadWrite])?;
    Ok(Execution::build(w, order).expect("topological order is a permutation"))
}

/// Builds an execution by topologically sorting the dependency subgraph
/// (write and read dependencies only).
pub(crate) fn construct_rc_execution(h: &AdyaHistory<'_>) -> Result<Execution, ConstructError> {
    let w = h.workload;
    require_resolvable_reads(w)?;
    let g = build_dsg(w, &h.version_order);
    let order = kahn_toposort(w, &g, &[EdgeKind::WriteWrite, EdgeKind::WriteRead])?;
    Ok(Execution::build(w, order).expect("topological order is a permutation"))
}

/// Builds a snapshot-isolation execution from the logical-order graph:
/// start-dependency edges, plus inferred edges from a start-dependency
/// followed by an anti-dependency. Needs start/commit ranks, and a
/// history free of the start-ordered phenomena.
pub fn construct_si_execution(h: &AdyaHistory<'_>) -> Result<Execution, ConstructError> {
    let w = h.workload;
    require_resolvable_reads(w)?;
    let ts = h.start_commit.as_ref().ok_or(ConstructError::MissingTimestamps)?;
    let g = build_ssg(w, &h.version_order, ts);
    for p in [Phenomenon::G1c, Phenomenon::GSia, Phenomenon::GSib] {
        if detect(&g, p, w).expect("start-ordered graph carries timestamps") {
            return Err(ConstructError::PreconditionFailed(format!(
                "history exhibits {p} under this version order"
            )));
        }
    }
    // Logical-order edges: every start dependency, plus an inferred edge
    // whenever a start dependency reaches an anti-dependency.
    let mut ledges: Vec<ConflictEdge> = g.edges_of_kind(EdgeKind::Start).copied().collect();
    for e1 in g.edges_of_kind(EdgeKind::Start) {
        for e2 in g.edges_of_kind(EdgeKind::ReadWrite) {
            if e1.to == e2.from && e1.from != e2.to {
                ledges.push(ConflictEdge {
                    from: e1.from,
                    to: e2.to,
                    kind: EdgeKind::Start,
                    key: None,
                });
            }
        }
    }
    let lgraph = SerializationGraph { flavor: g.flavor, n: w.n_txns(), edges: ledges };
    let order = kahn_toposort(w, &lgraph, &[EdgeKind::Start])?;
    Ok(Execution::build(w, order).expect("topological order is a permutation"))
}

/// Builds a parallel-snapshot-isolation execution by topologically
/// sorting dependency edges only. The history must be free of cycles
/// with a single anti-dependency under the given version order.
pub fn construct_psi_execution(h: &AdyaHistory<'_>) -> Result<Execution, ConstructError> {
    let w = h.workload;
    require_resolvable_reads(w)?;
    let g = build_dsg(w, &h.version_order);
    if detect(&g, Phenomenon::GSingle, w).expect("takes no timestamps") {
        return Err(ConstructError::PreconditionFailed(
            "history exhibits G-single under this version order".to_string(),
        ));
    }
    construct_rc_execution(h)
}

/// Rebuilds each session's execution so that causal consistency holds,
/// given per-session witnesses of the four guarantees: updates replay in
/// witness order; each read-only transaction is re-parented at the latest
/// of its operations' first read states and its session predecessor's
/// state.
pub fn construct_cc_execution(
    w: &Workload,
    witnesses: &BTreeMap<String, Execution>,
) -> Result<BTreeMap<String, Execution>, ConstructError> {
    let four = GuaranteeSet::four();
    if !verify_session_witness(w, &four, witnesses) {
        return Err(ConstructError::WitnessInvalid(
            "given executions do not satisfy the four session guarantees".to_string(),
        ));
    }
    let mut out = BTreeMap::new();
    for se in w.sessions() {
        let e = &witnesses[&w.session(se).id];
        let mut order: Vec<TxnId> = e
            .order()
            .iter()
            .copied()
            .filter(|&t| w.txn(t).is_update())
            .collect();

        // Session predecessor map; read-only transactions are inserted
        // only after their predecessor, so chains resolve in session
        // order with the witness order breaking ties.
        let pred: BTreeMap<TxnId, Option<TxnId>> = w
            .sessions()
            .flat_map(|s| {
                let txns = &w.session(s).txns;
                txns.iter()
                    .enumerate()
                    .map(|(i, &t)| (t, if i == 0 { None } else { Some(txns[i - 1]) }))
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut pending: Vec<TxnId> = e
            .order()
            .iter()
            .copied()
            .filter(|&t| !w.txn(t).is_update())
            .collect();
        while !pending.is_empty() {
            let placed_ok = |t: TxnId, order: &[TxnId]| match pred[&t] {
                None => true,
                Some(p) => w.txn(p).is_update() || order.contains(&p),
            };
            let pick = pending
                .iter()
                .position(|&t| placed_ok(t, &order))
                .ok_or_else(|| {
                    ConstructError::WitnessInvalid("session predecessor chain is cyclic".into())
                })?;
            let t = pending.remove(pick);
            let states = chain_states(w, &order);
            // Latest first-read state over the transaction's operations.
            let mut parent = 0usize;
            for op_ix in 0..w.txn(t).ops.len() {
                let op = &w.txn(t).ops[op_ix];
                debug_assert_eq!(op.kind, OpKind::Read);
                let sf = states
                    .iter()
                    .position(|s| s.get(op.key) == op.value)
                    .ok_or_else(|| {
                        ConstructError::WitnessInvalid(format!(
                            "read {} of txn {:?} resolves to no state",
                            w.render_op(t, op_ix),
                            w.txn_name(t)
                        ))
                    })?;
                parent = parent.max(sf);
            }
            if let Some(p) = pred[&t] {
                if let Some(p_pos) = order.iter().position(|&x| x == p) {
                    parent = parent.max(p_pos + 1);
                }
            }
            order.insert(parent, t);
        }
        let rebuilt = Execution::build(w, order).expect("permutation preserved");
        for &t in &w.session(se).txns {
            if !crate::session::st_cc(w, &rebuilt, se, t) {
                return Err(ConstructError::WitnessInvalid(format!(
                    "rebuilt execution fails causal consistency for txn {:?}",
                    w.txn_name(t)
                )));
            }
        }
        out.insert(w.session(se).id.clone(), rebuilt);
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DependencyCountMode {
    /// Every transaction depends on all of its predecessors, as a
    /// per-site snapshot scheme would force.
    PerSiteSnapshot,
    /// Only the transitive precede-set counts.
    DepSet,
}

/// Dependency counts per transaction under the chosen accounting.
pub fn count_dependencies(
    w: &Workload,
    e: &Execution,
    mode: DependencyCountMode,
) -> Vec<usize> {
    match mode {
        DependencyCountMode::PerSiteSnapshot => {
            w.txns().map(|t| e.position(t)).collect()
        }
        DependencyCountMode::DepSet => {
            let deps = DependSets::compute(w, e);
            w.txns().map(|t| deps.dep(t).len()).collect()
        }
    }
}

/// Oracle-assisted decision for workloads past the exhaustive budget:
/// enumerate version orders, test the level's phenomena, and realize a
/// witness through the constructive executions. Exactness rests on the
/// checker/oracle agreement that the cross-validation suites establish.
fn oracle_assisted(w: &Workload, level: IsolationLevel, budget: &SearchBudget) -> Verdict {
    let vo_limit = budget.node_limit.min(1_000_000) as usize;
    let enumerate = match enumerate_version_orders(w, vo_limit) {
        Ok(it) => it,
        Err(OracleError::BudgetExceeded(msg)) => return Verdict::BudgetExceeded(msg),
        Err(e) => return Verdict::BudgetExceeded(e.to_string()),
    };
    let phenomenon_free = |g: &SerializationGraph| -> Option<bool> {
        match level {
            IsolationLevel::Serializability => Some(
                g1_ok(w, g) && !detect(g, Phenomenon::G2, w).ok()?,
            ),
            IsolationLevel::ReadCommitted => Some(g1_ok(w, g)),
            IsolationLevel::ParallelSnapshotIsolation => Some(
                g1_ok(w, g) && !detect(g, Phenomenon::GSingle, w).ok()?,
            ),
            _ => None,
        }
    };
    fn g1_ok(w: &Workload, g: &SerializationGraph) -> bool {
        crate::adya::g1_free(g, w)
    }
    if !matches!(
        level,
        IsolationLevel::Serializability
            | IsolationLevel::ReadCommitted
            | IsolationLevel::ParallelSnapshotIsolation
    ) {
        return Verdict::BudgetExceeded(format!(
            "{} transactions exceed the exhaustive cap of {} and level {} has no oracle-assisted mode",
            w.n_txns(),
            budget.max_exhaustive,
            level
        ));
    }
    for vo in enumerate {
        let g = build_dsg(w, &vo);
        if phenomenon_free(&g) != Some(true) {
            continue;
        }
        let h = AdyaHistory { workload: w, version_order: vo, start_commit: None };
        let constructed = match level {
            IsolationLevel::Serializability => construct_ser_execution(&h),
            IsolationLevel::ReadCommitted => construct_rc_execution(&h),
            IsolationLevel::ParallelSnapshotIsolation => construct_psi_execution(&h),
            _ => unreachable!(),
        };
        if let Ok(e) = constructed {
            if verify_isolation_witness(w, level, &e).unwrap_or(false) {
                return Verdict::Satisfied(Witness::Execution(e));
            }
        }
    }
    Verdict::Violated(Diagnosis {
        clause: "ORACLE".to_string(),
        message: format!("every version order exhibits a phenomenon proscribed by {level}"),
    })
}
