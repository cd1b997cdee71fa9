//! Dependency-graph oracle: per-key version orders, direct and
//! start-ordered serialization graphs, the classic anomaly phenomena
//! (G0, G1a/b/c, G2, G-single, G-SIa/b), PL-level predicates, timestamp
//! assignment, and an axiomatic visibility/arbitration check for parallel
//! snapshot isolation.
//!
//! This module never consults the state-based commit tests; it exists as
//! an independent route to the same verdicts, which the harness
//! cross-validates. A history satisfies a level when *some* version order
//! (and, for snapshot isolation, some start/commit assignment) avoids the
//! level's phenomena, so the predicates here are existential searches
//! over bounded enumerations.

use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::commit::{DependSets, IsolationLevel};
use crate::model::{Execution, Key, OpKind, TxnId, Value, Workload};

/// Per-key total order over the transactions that write the key.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VersionOrder {
    per_key: Vec<Vec<TxnId>>,
}

impl VersionOrder {
    pub fn of_key(&self, k: Key) -> &[TxnId] {
        &self.per_key[k.ix()]
    }

    /// Position of a writer in its key's chain.
    fn version_ix(&self, k: Key, t: TxnId) -> Option<usize> {
        self.per_key[k.ix()].iter().position(|&x| x == t)
    }
}

/// Orders each key's versions by the execution order of their writers.
pub fn derive_version_order(w: &Workload, e: &Execution) -> VersionOrder {
    let per_key = w
        .keys()
        .map(|k| {
            let mut writers = w.writers_of(k);
            writers.sort_by_key(|&t| e.position(t));
            writers
        })
        .collect();
    VersionOrder { per_key }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("start/commit ranks are required for this query")]
    MissingTimestamps,
    #[error("no graph-based predicate is defined for level {0}")]
    UnsupportedLevel(IsolationLevel),
    #[error("transaction {0:?} never reaches an eligible snapshot state")]
    NoEligibleState(String),
}

/// Streams every combination of per-key writer orders. The total count is
/// the product of the factorials of each key's writer count; enumeration
/// refuses to start above `limit`.
pub fn enumerate_version_orders(
    w: &Workload,
    limit: usize,
) -> Result<impl Iterator<Item = VersionOrder>, OracleError> {
    let mut per_key_perms: Vec<Vec<Vec<TxnId>>> = Vec::new();
    let mut total: usize = 1;
    for k in w.keys() {
        let writers = w.writers_of(k);
        let n = writers.len();
        let perms: Vec<Vec<TxnId>> = if writers.is_empty() {
            vec![Vec::new()]
        } else {
            writers.into_iter().permutations(n).collect()
        };
        total = total.saturating_mul(perms.len());
        if total > limit {
            return Err(OracleError::BudgetExceeded(format!(
                "version-order combinations exceed {limit}"
            )));
        }
        per_key_perms.push(perms);
    }
    let n_keys = per_key_perms.len();
    let mut odometer = vec![0usize; n_keys];
    let mut done = false;
    Ok(std::iter::from_fn(move || {
        if done {
            return None;
        }
        let vo = VersionOrder {
            per_key: odometer
                .iter()
                .enumerate()
                .map(|(k, &i)| per_key_perms[k][i].clone())
                .collect(),
        };
        // Advance.
        done = true;
        for k in 0..n_keys {
            odometer[k] += 1;
            if odometer[k] < per_key_perms[k].len() {
                done = false;
                break;
            }
            odometer[k] = 0;
        }
        Some(vo)
    }))
}

/// A history under the graph model: the workload's transactions plus a
/// version order and, optionally, per-transaction start/commit ranks.
#[derive(Clone, Debug)]
pub struct AdyaHistory<'w> {
    pub workload: &'w Workload,
    pub version_order: VersionOrder,
    pub start_commit: Option<Vec<(i64, i64)>>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EdgeKind {
    WriteWrite,
    WriteRead,
    ReadWrite,
    Start,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::WriteWrite => "ww",
            EdgeKind::WriteRead => "wr",
            EdgeKind::ReadWrite => "rw",
            EdgeKind::Start => "s",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConflictEdge {
    pub from: TxnId,
    pub to: TxnId,
    pub kind: EdgeKind,
    /// Conflicting key; absent on start edges.
    pub key: Option<Key>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GraphFlavor {
    Dsg,
    Ssg,
}

#[derive(Clone, Debug)]
pub struct SerializationGraph {
    pub flavor: GraphFlavor,
    pub n: usize,
    pub edges: Vec<ConflictEdge>,
}

impl SerializationGraph {
    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &ConflictEdge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    fn adjacency(&self, kinds: &[EdgeKind]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            if kinds.contains(&e.kind) {
                adj[e.from.ix()].push(e.to.ix());
            }
        }
        adj
    }

    pub fn has_cycle(&self, kinds: &[EdgeKind]) -> bool {
        let adj = self.adjacency(kinds);
        // Three-color depth-first search.
        let mut color = vec![0u8; self.n];
        fn visit(u: usize, adj: &[Vec<usize>], color: &mut [u8]) -> bool {
            color[u] = 1;
            for &v in &adj[u] {
                if color[v] == 1 || (color[v] == 0 && visit(v, adj, color)) {
                    return true;
                }
            }
            color[u] = 2;
            false
        }
        (0..self.n).any(|u| color[u] == 0 && visit(u, &adj, &mut color))
    }

    pub fn reaches(&self, from: TxnId, to: TxnId, kinds: &[EdgeKind]) -> bool {
        if from == to {
            return true;
        }
        let adj = self.adjacency(kinds);
        let mut seen = vec![false; self.n];
        let mut stack = vec![from.ix()];
        seen[from.ix()] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if v == to.ix() {
                    return true;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }
}

const DSG_KINDS: [EdgeKind; 3] = [EdgeKind::WriteWrite, EdgeKind::WriteRead, EdgeKind::ReadWrite];
const DEP_KINDS: [EdgeKind; 2] = [EdgeKind::WriteWrite, EdgeKind::WriteRead];

/// Builds the direct serialization graph for a version order.
///
/// Write-dependencies connect adjacent versions; read-dependencies connect
/// a value's writer to its external readers; anti-dependencies connect a
/// version's readers to the writer of the next version. A read of the
/// initial value reads the implicit zeroth version of its key and so
/// anti-depends on the writer of the key's first version.
pub fn build_dsg(w: &Workload, vo: &VersionOrder) -> SerializationGraph {
    let mut edges: Vec<ConflictEdge> = Vec::new();
    for k in w.keys() {
        let chain = vo.of_key(k);
        for pair in chain.windows(2) {
            edges.push(ConflictEdge {
                from: pair[0],
                to: pair[1],
                kind: EdgeKind::WriteWrite,
                key: Some(k),
            });
        }
    }
    for t in w.txns() {
        let txn = w.txn(t);
        for (op_ix, op) in txn.ops.iter().enumerate() {
            if op.kind != OpKind::Read {
                continue;
            }
            let internal = txn.ops[..op_ix]
                .iter()
                .any(|o| o.kind == OpKind::Write && o.key == op.key);
            if internal {
                continue;
            }
            match op.value {
                Value::Written(writer) if writer != t => {
                    edges.push(ConflictEdge {
                        from: writer,
                        to: t,
                        kind: EdgeKind::WriteRead,
                        key: Some(op.key),
                    });
                    if let Some(ix) = vo.version_ix(op.key, writer) {
                        if let Some(&next) = vo.of_key(op.key).get(ix + 1) {
                            if next != t {
                                edges.push(ConflictEdge {
                                    from: t,
                                    to: next,
                                    kind: EdgeKind::ReadWrite,
                                    key: Some(op.key),
                                });
                            }
                        }
                    }
                }
                Value::Bottom => {
                    if let Some(&first) = vo.of_key(op.key).first() {
                        if first != t {
                            edges.push(ConflictEdge {
                                from: t,
                                to: first,
                                kind: EdgeKind::ReadWrite,
                                key: Some(op.key),
                            });
                        }
                    }
                }
                // Ghost reads resolve to no version and add no edge; they
                // surface through the G1a predicate instead. Reads of the
                // transaction's own version add nothing beyond the
                // write-dependency edges already present.
                _ => {}
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    SerializationGraph { flavor: GraphFlavor::Dsg, n: w.n_txns(), edges }
}

/// The start-ordered graph: the DSG plus an edge from every transaction
/// to each transaction that starts after it commits.
pub fn build_ssg(
    w: &Workload,
    vo: &VersionOrder,
    start_commit: &[(i64, i64)],
) -> SerializationGraph {
    let mut g = build_dsg(w, vo);
    g.flavor = GraphFlavor::Ssg;
    for a in w.txns() {
        for b in w.txns() {
            if a != b && start_commit[a.ix()].1 < start_commit[b.ix()].0 {
                g.edges.push(ConflictEdge { from: a, to: b, kind: EdgeKind::Start, key: None });
            }
        }
    }
    g
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Phenomenon {
    G0,
    G1a,
    G1b,
    G1c,
    G2,
    GSingle,
    GSia,
    GSib,
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phenomenon::G0 => "G0",
            Phenomenon::G1a => "G1a",
            Phenomenon::G1b => "G1b",
            Phenomenon::G1c => "G1c",
            Phenomenon::G2 => "G2",
            Phenomenon::GSingle => "G-single",
            Phenomenon::GSia => "G-SIa",
            Phenomenon::GSib => "G-SIb",
        })
    }
}

/// Decides one phenomenon over a serialization graph.
///
/// G1a reduces to unresolved reads (the input carries committed
/// transactions only, so a read matching no write is a read of aborted or
/// imaginary data). G1b cannot occur: ingestion rejects transactions that
/// write a key twice, so no intermediate versions exist.
pub fn detect(g: &SerializationGraph, p: Phenomenon, w: &Workload) -> Result<bool, OracleError> {
    let need_ssg = matches!(p, Phenomenon::GSia | Phenomenon::GSib);
    if need_ssg && g.flavor != GraphFlavor::Ssg {
        return Err(OracleError::MissingTimestamps);
    }
    Ok(match p {
        Phenomenon::G0 => g.has_cycle(&[EdgeKind::WriteWrite]),
        Phenomenon::G1a => w.has_ghost_reads(),
        Phenomenon::G1b => false,
        Phenomenon::G1c => g.has_cycle(&DEP_KINDS),
        Phenomenon::G2 => g
            .edges_of_kind(EdgeKind::ReadWrite)
            .any(|e| g.reaches(e.to, e.from, &DSG_KINDS)),
        Phenomenon::GSingle => g
            .edges_of_kind(EdgeKind::ReadWrite)
            .any(|e| g.reaches(e.to, e.from, &DEP_KINDS)),
        Phenomenon::GSia => {
            let starts: Vec<(TxnId, TxnId)> = g
                .edges_of_kind(EdgeKind::Start)
                .map(|e| (e.from, e.to))
                .collect();
            g.edges
                .iter()
                .filter(|e| matches!(e.kind, EdgeKind::WriteWrite | EdgeKind::WriteRead))
                .any(|e| !starts.contains(&(e.from, e.to)))
        }
        Phenomenon::GSib => {
            let kinds = [EdgeKind::WriteWrite, EdgeKind::WriteRead, EdgeKind::Start];
            g.edges_of_kind(EdgeKind::ReadWrite)
                .any(|e| g.reaches(e.to, e.from, &kinds))
        }
    })
}

/// True when the history, under this graph, is free of dirty and
/// intermediate reads and dependency cycles.
pub fn g1_free(g: &SerializationGraph, w: &Workload) -> bool {
    !w.has_ghost_reads() && !g.has_cycle(&DEP_KINDS)
}

#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    /// Upper bound on the number of version orders enumerated.
    pub vo_limit: usize,
    /// Transaction-count cap for the execution enumeration behind the
    /// snapshot-isolation predicate.
    pub si_perm_cap: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { vo_limit: 1_000_000, si_perm_cap: 8 }
    }
}

/// A graph-side verdict together with the witnessing version order and,
/// when the level needed them, the start/commit ranks.
#[derive(Clone, Debug)]
pub struct PlOutcome {
    pub satisfied: bool,
    pub version_order: Option<VersionOrder>,
    pub timestamps: Option<Vec<(i64, i64)>>,
}

/// Graph-based level predicate: PL-3 for serializability, PL-2 for read
/// committed, PL-1 for read uncommitted, PL-2+ for parallel snapshot
/// isolation, and the start-ordered snapshot-isolation predicate.
///
/// The version order is existentially quantified. Snapshot isolation also
/// needs start/commit points: when the workload does not supply them, the
/// predicate ranges over the assignments produced by
/// [`assign_timestamps`] on candidate executions, which is exact on small
/// workloads.
pub fn pl_check(
    w: &Workload,
    level: IsolationLevel,
    budget: &OracleBudget,
) -> Result<PlOutcome, OracleError> {
    let no = PlOutcome { satisfied: false, version_order: None, timestamps: None };
    match level {
        IsolationLevel::Serializability
        | IsolationLevel::ReadCommitted
        | IsolationLevel::ParallelSnapshotIsolation => {
            if w.has_ghost_reads() {
                return Ok(no);
            }
            for vo in enumerate_version_orders(w, budget.vo_limit)? {
                let g = build_dsg(w, &vo);
                let ok = match level {
                    IsolationLevel::Serializability => {
                        !g.has_cycle(&DEP_KINDS) && !detect(&g, Phenomenon::G2, w)?
                    }
                    IsolationLevel::ReadCommitted => !g.has_cycle(&DEP_KINDS),
                    IsolationLevel::ParallelSnapshotIsolation => {
                        !g.has_cycle(&DEP_KINDS) && !detect(&g, Phenomenon::GSingle, w)?
                    }
                    _ => unreachable!(),
                };
                if ok {
                    return Ok(PlOutcome {
                        satisfied: true,
                        version_order: Some(vo),
                        timestamps: None,
                    });
                }
            }
            Ok(no)
        }
        IsolationLevel::ReadUncommitted => {
            for vo in enumerate_version_orders(w, budget.vo_limit)? {
                let g = build_dsg(w, &vo);
                if !g.has_cycle(&[EdgeKind::WriteWrite]) {
                    return Ok(PlOutcome {
                        satisfied: true,
                        version_order: Some(vo),
                        timestamps: None,
                    });
                }
            }
            Ok(no)
        }
        IsolationLevel::SnapshotIsolation => {
            if w.has_ghost_reads() {
                return Ok(no);
            }
            if let Some(ts) = w.all_timestamps() {
                // Externally supplied points: only the version order is
                // existential.
                for vo in enumerate_version_orders(w, budget.vo_limit)? {
                    let g = build_ssg(w, &vo, &ts);
                    if !g.has_cycle(&DEP_KINDS)
                        && !detect(&g, Phenomenon::GSia, w)?
                        && !detect(&g, Phenomenon::GSib, w)?
                    {
                        return Ok(PlOutcome {
                            satisfied: true,
                            version_order: Some(vo),
                            timestamps: Some(ts),
                        });
                    }
                }
                return Ok(no);
            }
            let n = w.n_txns();
            if n > budget.si_perm_cap {
                return Err(OracleError::BudgetExceeded(format!(
                    "snapshot-isolation predicate needs execution enumeration; {n} transactions exceed the cap of {}",
                    budget.si_perm_cap
                )));
            }
            let ids: Vec<TxnId> = w.txns().collect();
            for order in ids.iter().copied().permutations(n) {
                let e = Execution::build(w, order).expect("permutation");
                let ts = match assign_timestamps(w, &e) {
                    Ok(ts) => ts,
                    Err(_) => continue,
                };
                let vo = derive_version_order(w, &e);
                let g = build_ssg(w, &vo, &ts);
                if !g.has_cycle(&DEP_KINDS)
                    && !detect(&g, Phenomenon::GSia, w)?
                    && !detect(&g, Phenomenon::GSib, w)?
                {
                    return Ok(PlOutcome {
                        satisfied: true,
                        version_order: Some(vo),
                        timestamps: Some(ts),
                    });
                }
            }
            Ok(no)
        }
        IsolationLevel::StrictSerializability | IsolationLevel::SequentialConsistency => {
            Err(OracleError::UnsupportedLevel(level))
        }
    }
}

/// Derives start/commit ranks from an execution: each transaction commits
/// at its own state and starts at the first state that is complete for it
/// with a write-delta disjoint from its write set. Fails when some
/// transaction never reaches such a state.
pub fn assign_timestamps(w: &Workload, e: &Execution) -> Result<Vec<(i64, i64)>, OracleError> {
    let n = w.n_txns();
    let mut starts: Vec<Option<i64>> = vec![None; n];
    let mut commits: Vec<Option<i64>> = vec![None; n];
    let mut counter: i64 = 0;
    for state_ix in 0..e.states().len() {
        if state_ix > 0 {
            let t = e.order()[state_ix - 1];
            counter += 1;
            commits[t.ix()] = Some(counter);
        }
        for &t in e.order() {
            if starts[t.ix()].is_some() {
                continue;
            }
            let parent = e.parent_index(t);
            let eligible = e.complete(w, t, state_ix)
                && e.view(w).delta_disjoint(state_ix, parent, w.txn(t).write_set());
            if eligible {
                counter += 1;
                starts[t.ix()] = Some(counter);
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for t in w.txns() {
        match (starts[t.ix()], commits[t.ix()]) {
            (Some(b), Some(c)) => out.push((b, c)),
            _ => return Err(OracleError::NoEligibleState(w.txn_name(t).to_string())),
        }
    }
    Ok(out)
}

/// Explicit visibility/arbitration pair: `ar` is a total order over the
/// transactions and `vis` an acyclic relation contained in it.
#[derive(Clone, Debug)]
pub struct VisAr {
    ar: Vec<TxnId>,
    ar_pos: Vec<u32>,
    vis: Vec<bool>,
    n: usize,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum VisArError {
    #[error("arbitration order is not a permutation of the workload")]
    NotAPermutation,
    #[error("visibility relates {from:?} to {to:?} against the arbitration order")]
    VisOutsideAr { from: String, to: String },
}

impl VisAr {
    pub fn new(
        w: &Workload,
        ar: Vec<TxnId>,
        vis_pairs: impl IntoIterator<Item = (TxnId, TxnId)>,
    ) -> Result<VisAr, VisArError> {
        let n = w.n_txns();
        if ar.len() != n {
            return Err(VisArError::NotAPermutation);
        }
        let mut ar_pos = vec![u32::MAX; n];
        for (i, &t) in ar.iter().enumerate() {
            if t.ix() >= n || ar_pos[t.ix()] != u32::MAX {
                return Err(VisArError::NotAPermutation);
            }
            ar_pos[t.ix()] = i as u32;
        }
        let mut vis = vec![false; n * n];
        for (a, b) in vis_pairs {
            if ar_pos[a.ix()] >= ar_pos[b.ix()] {
                return Err(VisArError::VisOutsideAr {
                    from: w.txn_name(a).to_string(),
                    to: w.txn_name(b).to_string(),
                });
            }
            vis[a.ix() * n + b.ix()] = true;
        }
        Ok(VisAr { ar, ar_pos, vis, n })
    }

    pub fn ar(&self) -> &[TxnId] {
        &self.ar
    }

    pub fn vis(&self, a: TxnId, b: TxnId) -> bool {
        self.vis[a.ix() * self.n + b.ix()]
    }

    pub fn ar_precedes(&self, a: TxnId, b: TxnId) -> bool {
        self.ar_pos[a.ix()] < self.ar_pos[b.ix()]
    }

    pub fn vis_is_transitive(&self) -> bool {
        for a in 0..self.n {
            for b in 0..self.n {
                if !self.vis[a * self.n + b] {
                    continue;
                }
                for c in 0..self.n {
                    if self.vis[b * self.n + c] && !self.vis[a * self.n + c] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Internal consistency of each transaction's own reads: a read returns
/// the value of the transaction's most recent earlier operation on the
/// same key, when one exists. Independent of visibility and arbitration.
fn internal_axiom(w: &Workload) -> bool {
    for t in w.txns() {
        let mut last: Vec<Option<Value>> = vec![None; w.n_keys()];
        for op in &w.txn(t).ops {
            if op.kind == OpKind::Read {
                if let Some(prev) = last[op.key.ix()] {
                    if prev != op.value {
                        return false;
                    }
                }
            }
            last[op.key.ix()] = Some(op.value);
        }
    }
    true
}

/// First operation of `t` on each key, when it is an external read:
/// (key, value) pairs constrained by the external-read axiom.
fn external_reads(w: &Workload, t: TxnId) -> Vec<(Key, Value)> {
    let mut seen: Vec<bool> = vec![false; w.n_keys()];
    let mut out = Vec::new();
    for op in &w.txn(t).ops {
        if !seen[op.key.ix()] {
            seen[op.key.ix()] = true;
            if op.kind == OpKind::Read {
                out.push((op.key, op.value));
            }
        }
    }
    out
}

/// Evaluates the four axioms — internal read consistency, external reads
/// from the latest visible writer, transitive visibility, and
/// write-conflict ordering — against an explicit visibility/arbitration
/// pair. The initial value plays the role of the absent zeroth version.
pub fn psi_axiomatic_check(w: &Workload, va: &VisAr) -> bool {
    if !internal_axiom(w) || !va.vis_is_transitive() {
        return false;
    }
    // NOCONFLICT: distinct writers of one key are visibility-ordered.
    for k in w.keys() {
        let writers = w.writers_of(k);
        for (i, &a) in writers.iter().enumerate() {
            for &b in &writers[i + 1..] {
                if !va.vis(a, b) && !va.vis(b, a) {
                    return false;
                }
            }
        }
    }
    // EXT: an external read returns the arbitration-latest visible write
    // of its key, or the initial value when no writer is visible.
    for t in w.txns() {
        for (k, v) in external_reads(w, t) {
            let mut latest: Option<TxnId> = None;
            for s in w.txns() {
                if s != t && w.txn(s).writes_key(k) && va.vis(s, t) {
                    latest = match latest {
                        Some(cur) if va.ar_precedes(s, cur) => Some(cur),
                        _ => Some(s),
                    };
                }
            }
            let expected = match latest {
                None => Value::Bottom,
                Some(s) => Value::Written(s),
            };
            if v != expected {
                return false;
            }
        }
    }
    true
}

/// Builds the visibility/arbitration pair induced by an execution:
/// arbitration is the execution order and a transaction sees exactly its
/// precede-set.
pub fn construct_vis_ar(w: &Workload, e: &Execution) -> VisAr {
    let deps = DependSets::compute(w, e);
    let mut pairs = Vec::new();
    for t in w.txns() {
        for &d in deps.dep(t) {
            pairs.push((d, t));
        }
    }
    VisAr::new(w, e.order().to_vec(), pairs).expect("precede-sets precede in execution order")
}

/// Existential axiomatic check: does any visibility/arbitration pair over
/// the workload satisfy all four axioms? Enumerates every arbitration
/// order and every visibility subset; refuse beyond `txn_cap`
/// transactions (the space grows doubly exponentially).
pub fn exists_psi_a_witness(w: &Workload, txn_cap: usize) -> Result<bool, OracleError> {
    let n = w.n_txns();
    if n > txn_cap {
        return Err(OracleError::BudgetExceeded(format!(
            "{n} transactions exceed the axiomatic enumeration cap of {txn_cap}"
        )));
    }
    if !internal_axiom(w) {
        return Ok(false);
    }
    if n == 0 {
        return Ok(true);
    }
    let ids: Vec<TxnId> = w.txns().collect();
    let n_pairs = n * (n - 1) / 2;
    for ar in ids.iter().copied().permutations(n) {
        // Pairs (ar[i], ar[j]) with i < j, toggled by mask bit.
        let mut pair_list = Vec::with_capacity(n_pairs);
        for i in 0..n {
            for j in (i + 1)..n {
                pair_list.push((ar[i], ar[j]));
            }
        }
        for mask in 0u64..(1u64 << n_pairs) {
            let pairs = pair_list
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, p)| *p);
            let va = VisAr::new(w, ar.clone(), pairs).expect("pairs follow ar");
            if psi_axiomatic_check(w, &va) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// All phenomena under one fixed version order (and ranks, when given).
#[derive(Clone, Debug)]
pub struct PhenomenaReport {
    pub g0: bool,
    pub g1a: bool,
    pub g1b: bool,
    pub g1c: bool,
    pub g2: bool,
    pub g_single: bool,
    pub g_sia: Option<bool>,
    pub g_sib: Option<bool>,
}

pub fn phenomena_report(
    w: &Workload,
    vo: &VersionOrder,
    ts: Option<&[(i64, i64)]>,
) -> PhenomenaReport {
    let dsg = build_dsg(w, vo);
    let ssg = ts.map(|ts| build_ssg(w, vo, ts));
    let on_dsg = |p| detect(&dsg, p, w).expect("dsg phenomena take no timestamps");
    PhenomenaReport {
        g0: on_dsg(Phenomenon::G0),
        g1a: on_dsg(Phenomenon::G1a),
        g1b: on_dsg(Phenomenon::G1b),
        g1c: on_dsg(Phenomenon::G1c),
        g2: on_dsg(Phenomenon::G2),
        g_single: on_dsg(Phenomenon::GSingle),
        g_sia: ssg.as_ref().map(|g| detect(g, Phenomenon::GSia, w).unwrap()),
        g_sib: ssg.as_ref().map(|g| detect(g, Phenomenon::GSib, w).unwrap()),
    }
}
