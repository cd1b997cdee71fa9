//! Client-observable state model: keys, values, transactions, sessions,
//! workloads, executions, and candidate read states.
//!
//! A workload is the observed input: sessions of committed transactions,
//! each a totally ordered list of read/write operations. An execution is a
//! total order over all transactions together with the chain of key-value
//! states it induces from the initial all-bottom state. Consistency checks
//! are phrased as predicates over executions (see [`crate::commit`] and
//! [`crate::session`]); this module supplies the predicates they share:
//! candidate read states, `PREREAD`, `COMPLETE`, and internal read
//! consistency.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Interned key identifier. Resolve the name through [`Workload::key_name`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Key(pub u32);

/// Index of a transaction within its workload.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TxnId(pub u32);

/// Index of a session within its workload.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SessionId(pub u32);

impl Key {
    pub fn ix(self) -> usize {
        self.0 as usize
    }
}

impl TxnId {
    pub fn ix(self) -> usize {
        self.0 as usize
    }
}

impl SessionId {
    pub fn ix(self) -> usize {
        self.0 as usize
    }
}

/// A value as it appears in a state or an operation.
///
/// Values are canonicalized to their unique writer: since no two
/// transactions write the same raw value to a key, `Written(t)` under key
/// `k` names the value transaction `t` wrote to `k`. `Bottom` is the
/// initial value of every key and is never written. `Ghost` marks a read
/// whose raw value matches no write in the workload; such a read has no
/// candidate read state in any execution.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Value {
    Bottom,
    Written(TxnId),
    Ghost(u32),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum OpKind {
    Read,
    Write,
}

/// One read or write operation. Position within the transaction is the
/// index into [`Transaction::ops`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Operation {
    pub kind: OpKind,
    pub key: Key,
    pub value: Value,
    /// Raw external representation: always present on writes, present on
    /// reads only when the value resolved to no write (ghost).
    pub literal: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Transaction {
    pub id: String,
    pub session: SessionId,
    pub ops: Vec<Operation>,
    /// Optional externally supplied (start, commit) ranks. Required for
    /// strict serializability and start-ordered graphs.
    pub start_commit: Option<(i64, i64)>,
    write_set: Vec<Key>,
    read_set: Vec<Key>,
}

impl Transaction {
    pub fn write_set(&self) -> &[Key] {
        &self.write_set
    }

    pub fn read_set(&self) -> &[Key] {
        &self.read_set
    }

    pub fn writes_key(&self, k: Key) -> bool {
        self.write_set.binary_search(&k).is_ok()
    }

    /// A transaction with at least one write.
    pub fn is_update(&self) -> bool {
        !self.write_set.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub txns: Vec<TxnId>,
}

/// The observed input: sessions partitioning a set of committed
/// transactions, with globally unique write values per key.
#[derive(Clone, Debug)]
pub struct Workload {
    keys: Vec<String>,
    sessions: Vec<Session>,
    txns: Vec<Transaction>,
    ghosts: Vec<(Key, String)>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("empty key name in transaction {txn:?}")]
    EmptyKey { txn: String },
    #[error("duplicate transaction id {0:?}")]
    DuplicateTxnId(String),
    #[error("duplicate session id {0:?}")]
    DuplicateSessionId(String),
    #[error("transaction {txn:?} writes key {key:?} more than once")]
    MultipleWritesToKey { txn: String, key: String },
    #[error("write value {value:?} for key {key:?} appears in more than one transaction")]
    DuplicateWriteValue { key: String, value: String },
    #[error("write without a value in transaction {txn:?}")]
    WriteWithoutValue { txn: String },
    #[error("read of key {key:?} in transaction {txn:?} does not return the transaction's own earlier write")]
    ReadAfterWriteMismatch { txn: String, key: String },
    #[error("transaction {txn:?} reads the value it writes to {key:?} later in the transaction")]
    FutureOwnRead { txn: String, key: String },
    #[error("transaction {txn:?} has start rank >= commit rank")]
    BadTimestamps { txn: String },
    #[error("timestamp rank {rank} is assigned more than once")]
    DuplicateTimestamp { rank: i64 },
}

impl Workload {
    pub fn builder() -> WorkloadBuilder {
        WorkloadBuilder { sessions: Vec::new() }
    }

    pub fn n_txns(&self) -> usize {
        self.txns.len()
    }

    pub fn n_keys(&self) -> usize {
        self.keys.len()
    }

    pub fn txn(&self, t: TxnId) -> &Transaction {
        &self.txns[t.ix()]
    }

    pub fn txns(&self) -> impl Iterator<Item = TxnId> + Clone {
        (0..self.txns.len() as u32).map(TxnId)
    }

    pub fn txn_name(&self, t: TxnId) -> &str {
        &self.txns[t.ix()].id
    }

    pub fn txn_by_name(&self, name: &str) -> Option<TxnId> {
        self.txns.iter().position(|t| t.id == name).map(|i| TxnId(i as u32))
    }

    pub fn sessions(&self) -> impl Iterator<Item = SessionId> + Clone {
        (0..self.sessions.len() as u32).map(SessionId)
    }

    pub fn session(&self, s: SessionId) -> &Session {
        &self.sessions[s.ix()]
    }

    pub fn session_by_name(&self, name: &str) -> Option<SessionId> {
        self.sessions.iter().position(|s| s.id == name).map(|i| SessionId(i as u32))
    }

    pub fn key_name(&self, k: Key) -> &str {
        &self.keys[k.ix()]
    }

    pub fn key_by_name(&self, name: &str) -> Option<Key> {
        self.keys.iter().position(|k| k == name).map(|i| Key(i as u32))
    }

    pub fn keys(&self) -> impl Iterator<Item = Key> + Clone {
        (0..self.keys.len() as u32).map(Key)
    }

    /// True when some read's value matches no write in the workload. Such
    /// a read has an empty candidate span in every execution, so every
    /// level whose test requires `PREREAD` is violated.
    pub fn has_ghost_reads(&self) -> bool {
        !self.ghosts.is_empty()
    }

    /// Transactions that write `k`, in declaration order.
    pub fn writers_of(&self, k: Key) -> Vec<TxnId> {
        self.txns()
            .filter(|&t| self.txn(t).writes_key(k))
            .collect()
    }

    /// External representation of a value under `k`, for display and export.
    pub fn value_literal(&self, k: Key, v: Value) -> Option<String> {
        match v {
            Value::Bottom => None,
            Value::Written(t) => self
                .txn(t)
                .ops
                .iter()
                .find(|o| o.kind == OpKind::Write && o.key == k)
                .and_then(|o| o.literal.clone()),
            Value::Ghost(g) => Some(self.ghosts[g as usize].1.clone()),
        }
    }

    /// Human-readable rendering of one operation, e.g. `r(x,1)` or `w(x,⊥)`.
    pub fn render_op(&self, t: TxnId, op_ix: usize) -> String {
        let op = &self.txn(t).ops[op_ix];
        let kind = match op.kind {
            OpKind::Read => "r",
            OpKind::Write => "w",
        };
        let val = self
            .value_literal(op.key, op.value)
            .unwrap_or_else(|| "⊥".to_string());
        format!("{}({},{})", kind, self.key_name(op.key), val)
    }

    /// All start/commit ranks, if every transaction carries them.
    pub fn all_timestamps(&self) -> Option<Vec<(i64, i64)>> {
        self.txns.iter().map(|t| t.start_commit).collect()
    }
}

/// Starts one transaction for [`WorkloadBuilder`].
pub fn txn(id: &str) -> TxnBuilder {
    TxnBuilder {
        id: id.to_string(),
        start_commit: None,
        ops: Vec::new(),
    }
}

#[derive(Clone, Debug)]
enum OpSpec {
    Write { key: String, literal: Option<String> },
    Read { key: String, literal: Option<String> },
}

#[derive(Clone, Debug)]
pub struct TxnBuilder {
    id: String,
    start_commit: Option<(i64, i64)>,
    ops: Vec<OpSpec>,
}

impl TxnBuilder {
    /// Write `value` to `key`.
    pub fn w(mut self, key: &str, value: &str) -> Self {
        self.ops.push(OpSpec::Write {
            key: key.to_string(),
            literal: Some(value.to_string()),
        });
        self
    }

    /// Write to `key` with an auto-generated unique value.
    pub fn write(mut self, key: &str) -> Self {
        self.ops.push(OpSpec::Write { key: key.to_string(), literal: None });
        self
    }

    /// Read `value` from `key`. The value must name some transaction's
    /// write of `key`; otherwise the read is kept as a ghost read.
    pub fn r(mut self, key: &str, value: &str) -> Self {
        self.ops.push(OpSpec::Read {
            key: key.to_string(),
            literal: Some(value.to_string()),
        });
        self
    }

    /// Read the initial (bottom) value of `key`.
    pub fn read_init(mut self, key: &str) -> Self {
        self.ops.push(OpSpec::Read { key: key.to_string(), literal: None });
        self
    }

    /// Attach start/commit ranks.
    pub fn at(mut self, start: i64, commit: i64) -> Self {
        self.start_commit = Some((start, commit));
        self
    }
}

#[derive(Debug, Default)]
pub struct WorkloadBuilder {
    sessions: Vec<(String, Vec<TxnBuilder>)>,
}

impl WorkloadBuilder {
    pub fn session(mut self, id: &str, txns: Vec<TxnBuilder>) -> Self {
        self.sessions.push((id.to_string(), txns));
        self
    }

    pub fn build(self) -> Result<Workload, WorkloadError> {
        let mut keys: Vec<String> = Vec::new();
        let mut key_ix: BTreeMap<String, Key> = BTreeMap::new();
        let mut intern = |name: &str, keys: &mut Vec<String>| -> Key {
            if let Some(k) = key_ix.get(name) {
                return *k;
            }
            let k = Key(keys.len() as u32);
            keys.push(name.to_string());
            key_ix.insert(name.to_string(), k);
            k
        };

        // Pass 1: ids, auto literals, write resolution.
        let mut txn_ids: BTreeMap<String, TxnId> = BTreeMap::new();
        let mut session_ids: BTreeMap<String, SessionId> = BTreeMap::new();
        let mut flat: Vec<(SessionId, TxnBuilder)> = Vec::new();
        for (s_ix, (sid, txns)) in self.sessions.iter().enumerate() {
            let s = SessionId(s_ix as u32);
            if session_ids.insert(sid.clone(), s).is_some() {
                return Err(WorkloadError::DuplicateSessionId(sid.clone()));
            }
            for tb in txns {
                let t = TxnId(flat.len() as u32);
                if txn_ids.insert(tb.id.clone(), t).is_some() {
                    return Err(WorkloadError::DuplicateTxnId(tb.id.clone()));
                }
                flat.push((s, tb.clone()));
            }
        }

        // writes: (key, literal) -> writer
        let mut write_of: BTreeMap<(Key, String), TxnId> = BTreeMap::new();
        for (t_ix, (_, tb)) in flat.iter().enumerate() {
            let t = TxnId(t_ix as u32);
            let mut written: Vec<Key> = Vec::new();
            for op in &tb.ops {
                if let OpSpec::Write { key, literal } = op {
                    if key.is_empty() {
                        return Err(WorkloadError::EmptyKey { txn: tb.id.clone() });
                    }
                    let k = intern(key, &mut keys);
                    if written.contains(&k) {
                        return Err(WorkloadError::MultipleWritesToKey {
                            txn: tb.id.clone(),
                            key: key.clone(),
                        });
                    }
                    written.push(k);
                    let lit = literal
                        .clone()
                        .unwrap_or_else(|| format!("{}:{}", tb.id, key));
                    if write_of.insert((k, lit.clone()), t).is_some() {
                        return Err(WorkloadError::DuplicateWriteValue { key: key.clone(), value: lit });
                    }
                }
            }
        }

        // Pass 2: resolve reads, assemble transactions.
        let mut ghosts: Vec<(Key, String)> = Vec::new();
        let mut txns: Vec<Transaction> = Vec::new();
        for (t_ix, (s, tb)) in flat.iter().enumerate() {
            let t = TxnId(t_ix as u32);
            let mut ops: Vec<Operation> = Vec::new();
            let mut own_writes: BTreeMap<Key, String> = BTreeMap::new();
            for op in &tb.ops {
                match op {
                    OpSpec::Write { key, literal } => {
                        let k = intern(key, &mut keys);
                        let lit = literal
                            .clone()
                            .unwrap_or_else(|| format!("{}:{}", tb.id, key));
                        own_writes.insert(k, lit.clone());
                        ops.push(Operation {
                            kind: OpKind::Write,
                            key: k,
                            value: Value::Written(t),
                            literal: Some(lit),
                        });
                    }
                    OpSpec::Read { key, literal } => {
                        if key.is_empty() {
                            return Err(WorkloadError::EmptyKey { txn: tb.id.clone() });
                        }
                        let k = intern(key, &mut keys);
                        let value = if let Some(own) = own_writes.get(&k) {
                            // Later reads of a key this transaction already
                            // wrote must return the transaction's own value.
                            if literal.as_deref() != Some(own.as_str()) {
                                return Err(WorkloadError::ReadAfterWriteMismatch {
                                    txn: tb.id.clone(),
                                    key: key.clone(),
                                });
                            }
                            Value::Written(t)
                        } else {
                            match literal {
                                None => Value::Bottom,
                                Some(lit) => match write_of.get(&(k, lit.clone())) {
                                    Some(&writer) if writer == t => {
                                        return Err(WorkloadError::FutureOwnRead {
                                            txn: tb.id.clone(),
                                            key: key.clone(),
                                        });
                                    }
                                    Some(&writer) => Value::Written(writer),
                                    None => {
                                        let g = match ghosts
                                            .iter()
                                            .position(|(gk, gl)| *gk == k && gl == lit)
                                        {
                                            Some(i) => i,
                                            None => {
                                                ghosts.push((k, lit.clone()));
                                                ghosts.len() - 1
                                            }
                                        };
                                        Value::Ghost(g as u32)
                                    }
                                },
                            }
                        };
                        let ghost_lit = matches!(value, Value::Ghost(_))
                            .then(|| literal.clone())
                            .flatten();
                        ops.push(Operation { kind: OpKind::Read, key: k, value, literal: ghost_lit });
                    }
                }
            }
            let mut write_set: Vec<Key> = ops
                .iter()
                .filter(|o| o.kind == OpKind::Write)
                .map(|o| o.key)
                .collect();
            write_set.sort_unstable();
            write_set.dedup();
            let mut read_set: Vec<Key> = ops
                .iter()
                .filter(|o| o.kind == OpKind::Read)
                .map(|o| o.key)
                .collect();
            read_set.sort_unstable();
            read_set.dedup();
            if let Some((b, c)) = tb.start_commit {
                if b >= c {
                    return Err(WorkloadError::BadTimestamps { txn: tb.id.clone() });
                }
            }
            txns.push(Transaction {
                id: tb.id.clone(),
                session: *s,
                ops,
                start_commit: tb.start_commit,
                write_set,
                read_set,
            });
        }

        // Ranks, when present, must be globally distinct.
        let mut ranks: Vec<i64> = txns
            .iter()
            .filter_map(|t| t.start_commit)
            .flat_map(|(b, c)| [b, c])
            .collect();
        ranks.sort_unstable();
        for w in ranks.windows(2) {
            if w[0] == w[1] {
                return Err(WorkloadError::DuplicateTimestamp { rank: w[0] });
            }
        }

        let mut sessions: Vec<Session> = self
            .sessions
            .iter()
            .map(|(id, _)| Session { id: id.clone(), txns: Vec::new() })
            .collect();
        for (t_ix, (s, _)) in flat.iter().enumerate() {
            sessions[s.ix()].txns.push(TxnId(t_ix as u32));
        }

        Ok(Workload { keys, sessions, txns, ghosts })
    }
}

/// A snapshot of all keys, tagged with the transaction whose application
/// produced it (`None` for the initial state).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct State {
    values: Vec<Value>,
    origin: Option<TxnId>,
}

impl State {
    pub fn initial(n_keys: usize) -> State {
        State { values: vec![Value::Bottom; n_keys], origin: None }
    }

    pub fn get(&self, k: Key) -> Value {
        self.values[k.ix()]
    }

    pub fn origin(&self) -> Option<TxnId> {
        self.origin
    }
}

/// State chain induced by applying `order` (not necessarily a
/// permutation) from the initial state.
pub(crate) fn chain_states(w: &Workload, order: &[TxnId]) -> Vec<State> {
    let mut states = Vec::with_capacity(order.len() + 1);
    states.push(State::initial(w.n_keys()));
    for &t in order {
        let next = apply_transaction(w, states.last().unwrap(), t);
        states.push(next);
    }
    states
}

/// Applies a transaction's writes to a state. The result differs from `s`
/// exactly on the transaction's write set.
pub fn apply_transaction(w: &Workload, s: &State, t: TxnId) -> State {
    let mut values = s.values.clone();
    for op in &w.txn(t).ops {
        if op.kind == OpKind::Write {
            values[op.key.ix()] = op.value;
        }
    }
    State { values, origin: Some(t) }
}

/// Keys on which two states differ.
pub fn state_delta(a: &State, b: &State) -> Vec<Key> {
    a.values
        .iter()
        .zip(&b.values)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, _)| Key(i as u32))
        .collect()
}

/// Non-empty contiguous block of candidate read states, by state index.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ReadStateSpan {
    /// First candidate state (sf).
    pub first: usize,
    /// Last candidate state (sl).
    pub last: usize,
}

impl ReadStateSpan {
    pub fn contains(&self, state_ix: usize) -> bool {
        self.first <= state_ix && state_ix <= self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("order is not a permutation of the workload's transactions")]
    NotAPermutation,
}

/// A total order over all transactions with its induced state chain.
/// `states()［0］` is the initial state; `states()[i+1]` results from
/// applying `order()[i]`.
#[derive(Clone, Debug)]
pub struct Execution {
    order: Vec<TxnId>,
    states: Vec<State>,
    pos: Vec<u32>,
}

impl Execution {
    /// Builds the execution for `order`, which must be a permutation of
    /// the workload's transactions.
    pub fn build(w: &Workload, order: Vec<TxnId>) -> Result<Execution, ModelError> {
        let n = w.n_txns();
        if order.len() != n {
            return Err(ModelError::NotAPermutation);
        }
        let mut pos = vec![u32::MAX; n];
        for (i, &t) in order.iter().enumerate() {
            if t.ix() >= n || pos[t.ix()] != u32::MAX {
                return Err(ModelError::NotAPermutation);
            }
            pos[t.ix()] = i as u32;
        }
        let mut states = Vec::with_capacity(n + 1);
        states.push(State::initial(w.n_keys()));
        for &t in &order {
            let next = apply_transaction(w, states.last().unwrap(), t);
            states.push(next);
        }
        Ok(Execution { order, states, pos })
    }

    /// The lexicographically smallest execution (by transaction id).
    pub fn lexicographic(w: &Workload) -> Execution {
        let mut order: Vec<TxnId> = w.txns().collect();
        order.sort_by(|a, b| w.txn_name(*a).cmp(w.txn_name(*b)));
        Execution::build(w, order).expect("identity permutation")
    }

    pub fn order(&self) -> &[TxnId] {
        &self.order
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn position(&self, t: TxnId) -> usize {
        self.pos[t.ix()] as usize
    }

    /// Index of the state `t` transitions from.
    pub fn parent_index(&self, t: TxnId) -> usize {
        self.position(t)
    }

    /// Index of the state `t` produces.
    pub fn state_index(&self, t: TxnId) -> usize {
        self.position(t) + 1
    }

    pub(crate) fn view<'a>(&'a self, w: &'a Workload) -> ExecView<'a> {
        ExecView { w, states: &self.states, pos: PosMap::Full(&self.pos) }
    }

    /// Candidate read states of one operation: the contiguous block of
    /// states, no later than the parent state, from which the operation
    /// could have read. `None` when no state qualifies.
    pub fn candidate_read_states(
        &self,
        w: &Workload,
        t: TxnId,
        op_ix: usize,
    ) -> Option<ReadStateSpan> {
        self.view(w).span(t, op_ix)
    }

    /// True when every operation of every given transaction has a
    /// non-empty candidate span.
    pub fn preread(&self, w: &Workload, ts: impl IntoIterator<Item = TxnId>) -> bool {
        let v = self.view(w);
        ts.into_iter().all(|t| v.preread_txn(t))
    }

    pub fn preread_all(&self, w: &Workload) -> bool {
        self.preread(w, w.txns())
    }

    /// True when state `state_ix` lies in every operation's candidate
    /// span of `t` (vacuously true for an empty transaction).
    pub fn complete(&self, w: &Workload, t: TxnId, state_ix: usize) -> bool {
        self.view(w).complete(t, state_ix)
    }

    /// Internal read consistency: later operations never read from
    /// strictly earlier candidate spans. False when any span is empty.
    pub fn internal_read_consistency(&self, w: &Workload, t: TxnId) -> bool {
        self.view(w).irc(t)
    }
}

pub(crate) enum PosMap<'a> {
    Full(&'a [u32]),
    Partial(&'a [i32]),
}

/// Shared predicate carrier over either a full execution or a search
/// prefix. All predicates may only be asked about placed transactions;
/// their spans and parent states are then fully determined by the chain.
pub(crate) struct ExecView<'a> {
    pub w: &'a Workload,
    pub states: &'a [State],
    pub pos: PosMap<'a>,
}

impl<'a> ExecView<'a> {
    pub fn placed(&self, t: TxnId) -> bool {
        match self.pos {
            PosMap::Full(_) => true,
            PosMap::Partial(p) => p[t.ix()] >= 0,
        }
    }

    pub fn position(&self, t: TxnId) -> usize {
        match self.pos {
            PosMap::Full(p) => p[t.ix()] as usize,
            PosMap::Partial(p) => {
                debug_assert!(p[t.ix()] >= 0, "position of unplaced transaction");
                p[t.ix()] as usize
            }
        }
    }

    pub fn parent_ix(&self, t: TxnId) -> usize {
        self.position(t)
    }

    pub fn state_ix(&self, t: TxnId) -> usize {
        self.position(t) + 1
    }

    /// Candidate read span of `ops[op_ix]` of `t`.
    pub fn span(&self, t: TxnId, op_ix: usize) -> Option<ReadStateSpan> {
        let txn = self.w.txn(t);
        let op = &txn.ops[op_ix];
        let parent = self.parent_ix(t);
        let internal_read = op.kind == OpKind::Read
            && txn.ops[..op_ix]
                .iter()
                .any(|o| o.kind == OpKind::Write && o.key == op.key);
        if op.kind == OpKind::Write || internal_read {
            // Every state up to the parent qualifies.
            return Some(ReadStateSpan { first: 0, last: parent });
        }
        // Value uniqueness makes the matching states a single contiguous
        // run: once written, a value holds until overwritten and never
        // recurs.
        let mut first = None;
        let mut last = 0;
        for (i, s) in self.states[..=parent].iter().enumerate() {
            if s.get(op.key) == op.value {
                if first.is_none() {
                    first = Some(i);
                }
                last = i;
            } else if first.is_some() {
                break;
            }
        }
        first.map(|f| ReadStateSpan { first: f, last })
    }

    pub fn preread_txn(&self, t: TxnId) -> bool {
        (0..self.w.txn(t).ops.len()).all(|i| self.span(t, i).is_some())
    }

    pub fn complete(&self, t: TxnId, state_ix: usize) -> bool {
        (0..self.w.txn(t).ops.len()).all(|i| match self.span(t, i) {
            Some(span) => span.contains(state_ix),
            None => false,
        })
    }

    pub fn irc(&self, t: TxnId) -> bool {
        let n_ops = self.w.txn(t).ops.len();
        let mut spans = Vec::with_capacity(n_ops);
        for i in 0..n_ops {
            match self.span(t, i) {
                Some(s) => spans.push(s),
                None => return false,
            }
        }
        for later in 1..n_ops {
            for earlier in 0..later {
                if spans[later].last < spans[earlier].first {
                    return false;
                }
            }
        }
        true
    }

    /// True when the key sets on which states `a` and `b` differ avoid
    /// `keys` entirely.
    pub fn delta_disjoint(&self, a: usize, b: usize, keys: &[Key]) -> bool {
        keys.iter()
            .all(|k| self.states[a].get(*k) == self.states[b].get(*k))
    }
}

impl fmt::Display for ReadStateSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[s{}, s{}]", self.first, self.last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn banking() -> Workload {
        Workload::builder()
            .session("init", vec![txn("t0").w("C", "30").w("S", "30")])
            .session("alice", vec![txn("t_w1").r("C", "30").r("S", "30").w("C", "-10a")])
            .session("bob", vec![txn("t_w2").r("C", "30").r("S", "30").w("S", "-10b")])
            .build()
            .unwrap()
    }

    fn exec(w: &Workload, names: &[&str]) -> Execution {
        let order = names.iter().map(|n| w.txn_by_name(n).unwrap()).collect();
        Execution::build(w, order).unwrap()
    }

    #[test]
    fn apply_single_write() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1")])
            .build()
            .unwrap();
        let s0 = State::initial(w.n_keys());
        let t1 = w.txn_by_name("t1").unwrap();
        let s1 = apply_transaction(&w, &s0, t1);
        assert_eq!(s1.get(Key(0)), Value::Written(t1));
        assert_eq!(state_delta(&s0, &s1), vec![Key(0)]);
        assert_eq!(s1.origin(), Some(t1));
    }

    #[test]
    fn apply_read_only_changes_no_values() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1"), txn("t2").r("x", "1").read_init("y")])
            .build()
            .unwrap();
        let t1 = w.txn_by_name("t1").unwrap();
        let t2 = w.txn_by_name("t2").unwrap();
        let s0 = State::initial(w.n_keys());
        let s1 = apply_transaction(&w, &s0, t1);
        let s2 = apply_transaction(&w, &s1, t2);
        assert_eq!(state_delta(&s1, &s2), Vec::<Key>::new());
        assert_eq!(s2.origin(), Some(t2));
    }

    #[test]
    fn apply_banking_withdrawal() {
        let w = banking();
        let s0 = State::initial(w.n_keys());
        let s1 = apply_transaction(&w, &s0, w.txn_by_name("t0").unwrap());
        let s2 = apply_transaction(&w, &s1, w.txn_by_name("t_w1").unwrap());
        let c = w.key_by_name("C").unwrap();
        let s = w.key_by_name("S").unwrap();
        assert_eq!(s2.get(c), Value::Written(w.txn_by_name("t_w1").unwrap()));
        assert_eq!(s2.get(s), Value::Written(w.txn_by_name("t0").unwrap()));
        assert_eq!(state_delta(&s1, &s2), vec![c]);
    }

    #[test]
    fn build_execution_chains_states() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t1"]);
        assert_eq!(e.states().len(), 2);
        assert_eq!(e.states()[0].get(Key(0)), Value::Bottom);
        assert_eq!(e.states()[1].get(Key(0)), Value::Written(TxnId(0)));
    }

    #[test]
    fn build_execution_banking_final_state() {
        let w = banking();
        let e = exec(&w, &["t0", "t_w1", "t_w2"]);
        let last = e.states().last().unwrap();
        let c = w.key_by_name("C").unwrap();
        let s = w.key_by_name("S").unwrap();
        assert_eq!(last.get(c), Value::Written(w.txn_by_name("t_w1").unwrap()));
        assert_eq!(last.get(s), Value::Written(w.txn_by_name("t_w2").unwrap()));
    }

    #[test]
    fn distinct_key_writers_commute() {
        use itertools::Itertools;
        let w = Workload::builder()
            .session("s", vec![txn("a").w("x", "1"), txn("b").w("y", "1"), txn("c").w("z", "1")])
            .build()
            .unwrap();
        let all: Vec<TxnId> = w.txns().collect();
        let finals: Vec<Vec<Value>> = all
            .iter()
            .copied()
            .permutations(3)
            .map(|order| {
                let e = Execution::build(&w, order).unwrap();
                w.keys().map(|k| e.states().last().unwrap().get(k)).collect()
            })
            .collect();
        assert_eq!(finals.len(), 6);
        assert!(finals.iter().all(|f| *f == finals[0]));
    }

    #[test]
    fn build_execution_rejects_non_permutations() {
        let w = banking();
        let t0 = w.txn_by_name("t0").unwrap();
        assert_eq!(
            Execution::build(&w, vec![t0, t0, t0]).unwrap_err(),
            ModelError::NotAPermutation
        );
        assert_eq!(Execution::build(&w, vec![t0]).unwrap_err(), ModelError::NotAPermutation);
    }

    #[test]
    fn span_simple_read() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1"), txn("t2").r("x", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t1", "t2"]);
        let t2 = w.txn_by_name("t2").unwrap();
        let span = e.candidate_read_states(&w, t2, 0).unwrap();
        assert_eq!((span.first, span.last), (1, 1));
    }

    #[test]
    fn span_fractured_read_is_initial_only() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1").w("y", "1"), txn("t2").r("x", "1").read_init("y")])
            .build()
            .unwrap();
        let e = exec(&w, &["t1", "t2"]);
        let t2 = w.txn_by_name("t2").unwrap();
        // Brute-force oracle: states before the parent holding (y, ⊥).
        let y = w.key_by_name("y").unwrap();
        let parent = e.parent_index(t2);
        let member: Vec<usize> = (0..=parent)
            .filter(|&i| e.states()[i].get(y) == Value::Bottom)
            .collect();
        assert_eq!(member, vec![0]);
        let span = e.candidate_read_states(&w, t2, 1).unwrap();
        assert_eq!((span.first, span.last), (0, 0));
    }

    #[test]
    fn span_internal_read_covers_all_states_up_to_parent() {
        let w = Workload::builder()
            .session("s", vec![txn("t").w("x", "1").r("x", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t"]);
        let t = w.txn_by_name("t").unwrap();
        let span = e.candidate_read_states(&w, t, 1).unwrap();
        assert_eq!((span.first, span.last), (0, 0));
    }

    #[test]
    fn preread_holds_for_resolved_reads() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1"), txn("t2").r("x", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t1", "t2"]);
        assert!(e.preread_all(&w));
    }

    #[test]
    fn preread_fails_for_ghost_reads_in_every_execution() {
        use itertools::Itertools;
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1"), txn("t2").r("x", "ghost")])
            .build()
            .unwrap();
        assert!(w.has_ghost_reads());
        let all: Vec<TxnId> = w.txns().collect();
        for order in all.iter().copied().permutations(2) {
            let e = Execution::build(&w, order).unwrap();
            assert!(!e.preread_all(&w));
        }
    }

    #[test]
    fn preread_fails_when_reader_precedes_writer() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1"), txn("t2").r("x", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t2", "t1"]);
        let t2 = w.txn_by_name("t2").unwrap();
        assert!(e.candidate_read_states(&w, t2, 0).is_none());
        assert!(!e.preread(&w, [t2]));
    }

    #[test]
    fn complete_simple() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1"), txn("t2").r("x", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t1", "t2"]);
        let t2 = w.txn_by_name("t2").unwrap();
        assert!(e.complete(&w, t2, e.parent_index(t2)));
    }

    #[test]
    fn complete_banking_shared_snapshot() {
        let w = banking();
        let e = exec(&w, &["t0", "t_w1", "t_w2"]);
        let t0 = w.txn_by_name("t0").unwrap();
        let tw1 = w.txn_by_name("t_w1").unwrap();
        let tw2 = w.txn_by_name("t_w2").unwrap();
        assert!(e.complete(&w, tw2, e.state_index(t0)));
        assert!(!e.complete(&w, tw2, e.state_index(tw1)));
    }

    #[test]
    fn complete_fractured_read_has_no_state() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1").w("y", "1"), txn("t2").r("x", "1").read_init("y")])
            .build()
            .unwrap();
        let e = exec(&w, &["t1", "t2"]);
        let t2 = w.txn_by_name("t2").unwrap();
        assert!((0..e.states().len()).all(|s| !e.complete(&w, t2, s)));
    }

    #[test]
    fn irc_single_op_txn() {
        let w = Workload::builder()
            .session("s", vec![txn("t").read_init("x")])
            .build()
            .unwrap();
        let e = exec(&w, &["t"]);
        assert!(e.internal_read_consistency(&w, w.txn_by_name("t").unwrap()));
    }

    #[test]
    fn irc_detects_backward_reads() {
        let mk = |reads_x_first: bool, writer_order: &[&str; 2]| {
            let w = Workload::builder()
                .session("w1", vec![txn("t_x").w("x", "1")])
                .session("w2", vec![txn("t_y").w("y", "1")])
                .session("r", vec![if reads_x_first {
                    txn("t").r("x", "1").read_init("y")
                } else {
                    txn("t").read_init("y").r("x", "1")
                }])
                .build()
                .unwrap();
            let e = exec(&w, &[writer_order[0], writer_order[1], "t"]);
            let t = w.txn_by_name("t").unwrap();
            e.internal_read_consistency(&w, t)
        };
        // With t_y applied first, y=⊥ holds only at the initial state, so
        // r(x,1) then r(y,⊥) reads backward: the later read's span ends
        // before the earlier read's begins.
        assert!(!mk(true, &["t_y", "t_x"]));
        // The reverse read order is monotone.
        assert!(mk(false, &["t_y", "t_x"]));
        // With t_x first, y stays ⊥ through the writer of x, so the spans
        // overlap and both read orders are internally consistent.
        assert!(mk(true, &["t_x", "t_y"]));
        assert!(mk(false, &["t_x", "t_y"]));
    }

    #[test]
    fn irc_both_reads_fresh() {
        let w = Workload::builder()
            .session("w1", vec![txn("t_x").w("x", "1")])
            .session("w2", vec![txn("t_y").w("y", "1")])
            .session("r", vec![txn("t").r("x", "1").r("y", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t_x", "t_y", "t"]);
        assert!(e.internal_read_consistency(&w, w.txn_by_name("t").unwrap()));
    }

    #[test]
    fn span_endpoints_of_writes_start_at_initial_state() {
        let w = banking();
        let e = exec(&w, &["t0", "t_w1", "t_w2"]);
        let tw1 = w.txn_by_name("t_w1").unwrap();
        let span = e.candidate_read_states(&w, tw1, 2).unwrap();
        assert_eq!(span.first, 0);
        assert_eq!(span.last, e.parent_index(tw1));
    }

    #[test]
    fn span_endpoints_overwritten_value() {
        let w = Workload::builder()
            .session("s", vec![txn("t1").w("x", "1"), txn("t2").w("x", "2"), txn("t3").r("x", "1")])
            .build()
            .unwrap();
        let e = exec(&w, &["t1", "t2", "t3"]);
        let t3 = w.txn_by_name("t3").unwrap();
        let span = e.candidate_read_states(&w, t3, 0).unwrap();
        assert_eq!((span.first, span.last), (1, 1));
        assert!(span.last < e.parent_index(t3));
    }

    #[test]
    fn ingest_rejects_double_write_same_key() {
        let err = Workload::builder()
            .session("s", vec![txn("t").w("x", "1").w("x", "2")])
            .build()
            .unwrap_err();
        assert!(matches!(err, WorkloadError::MultipleWritesToKey { .. }));
    }

    #[test]
    fn ingest_rejects_duplicate_write_values_per_key() {
        let err = Workload::builder()
            .session("s", vec![txn("a").w("x", "1"), txn("b").w("x", "1")])
            .build()
            .unwrap_err();
        assert!(matches!(err, WorkloadError::DuplicateWriteValue { .. }));
    }

    #[test]
    fn ingest_rejects_future_own_read() {
        let err = Workload::builder()
            .session("s", vec![txn("t").r("x", "t:x").write("x")])
            .build()
            .unwrap_err();
        assert!(matches!(err, WorkloadError::FutureOwnRead { .. }));
    }

    #[test]
    fn ingest_rejects_mismatched_read_after_own_write() {
        let err = Workload::builder()
            .session("s", vec![txn("a").w("x", "other"), txn("t").w("x", "mine").r("x", "other")])
            .build()
            .unwrap_err();
        assert!(matches!(err, WorkloadError::ReadAfterWriteMismatch { .. }));
    }

    #[test]
    fn ingest_keeps_ghost_reads() {
        let w = Workload::builder()
            .session("s", vec![txn("t").r("x", "nobody-wrote-this")])
            .build()
            .unwrap();
        assert!(w.has_ghost_reads());
        let t = w.txn_by_name("t").unwrap();
        assert!(matches!(w.txn(t).ops[0].value, Value::Ghost(_)));
    }

    #[test]
    fn contiguity_brute_force() {
        use itertools::Itertools;
        // Every candidate read-state set is a contiguous block: compare the
        // span against per-state membership.
        let w = Workload::builder()
            .session("a", vec![txn("t1").w("x", "1").read_init("y"), txn("t2").w("y", "2").r("x", "1")])
            .session("b", vec![txn("t3").r("y", "2").w("x", "3")])
            .build()
            .unwrap();
        let all: Vec<TxnId> = w.txns().collect();
        for order in all.iter().copied().permutations(all.len()) {
            let e = Execution::build(&w, order).unwrap();
            for t in w.txns() {
                for (i, op) in w.txn(t).ops.iter().enumerate() {
                    let parent = e.parent_index(t);
                    let internal = op.kind == OpKind::Read
                        && w.txn(t).ops[..i].iter().any(|o| o.kind == OpKind::Write && o.key == op.key);
                    let members: Vec<usize> = (0..=parent)
                        .filter(|&s| {
                            op.kind == OpKind::Write
                                || internal
                                || e.states()[s].get(op.key) == op.value
                        })
                        .collect();
                    match e.candidate_read_states(&w, t, i) {
                        None => assert!(members.is_empty()),
                        Some(span) => {
                            assert_eq!(members.first(), Some(&span.first));
                            assert_eq!(members.last(), Some(&span.last));
                            assert_eq!(members.len(), span.len());
                        }
                    }
                }
            }
        }
    }
}
