//! Workload generation, level-targeted history simulation, exhaustive
//! small-workload enumeration up to symmetry, and the cross-validation
//! driver that compares the state-based checker with the graph oracle
//! (and causal consistency with the four session guarantees).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adya::{exists_psi_a_witness, pl_check, OracleBudget, OracleError};
use crate::commit::IsolationLevel;
use crate::formats::{workload_digest, HistoryFile};
use crate::model::{txn, Execution, OpKind, TxnBuilder, Workload, WorkloadBuilder};
use crate::search::{
    check_isolation, check_session, verify_isolation_witness, SearchBudget, Verdict,
};
use crate::session::{GuaranteeSet, SessionGuarantee};

/// Parameters for random workload generation. Deterministic in `seed`.
#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    pub sessions: usize,
    /// Inclusive range of transactions per session.
    pub txns_per_session: (usize, usize),
    /// Inclusive range of operations per transaction.
    pub ops_per_txn: (usize, usize),
    pub keys: usize,
    pub read_fraction: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            sessions: 2,
            txns_per_session: (1, 3),
            ops_per_txn: (1, 3),
            keys: 3,
            read_fraction: 0.5,
            seed: 0,
        }
    }
}

/// A workload with operation kinds and keys fixed but read values still
/// open.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub sessions: Vec<SkelSession>,
}

#[derive(Clone, Debug)]
pub struct SkelSession {
    pub id: String,
    pub txns: Vec<SkelTxn>,
}

#[derive(Clone, Debug)]
pub struct SkelTxn {
    pub id: String,
    pub ops: Vec<(OpKind, String)>,
}

impl Skeleton {
    fn txn_count(&self) -> usize {
        self.sessions.iter().map(|s| s.txns.len()).sum()
    }
}

fn range_sample(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    if lo >= hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draws the structural part of a workload: sessions, transactions,
/// operation kinds, and keys. A write's key is drawn among the keys the
/// transaction has not written yet; when none remain the operation
/// becomes a read.
pub fn generate_skeleton(p: &GenParams) -> Skeleton {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut sessions = Vec::with_capacity(p.sessions);
    let mut txn_no = 0usize;
    for s_ix in 0..p.sessions {
        let n_txns = range_sample(&mut rng, p.txns_per_session);
        let mut txns = Vec::with_capacity(n_txns);
        for _ in 0..n_txns {
            let n_ops = range_sample(&mut rng, p.ops_per_txn);
            let mut written: Vec<usize> = Vec::new();
            let mut ops = Vec::with_capacity(n_ops);
            for _ in 0..n_ops {
                let want_read = rng.gen_bool(p.read_fraction.clamp(0.0, 1.0));
                let unwritten: Vec<usize> =
                    (0..p.keys).filter(|k| !written.contains(k)).collect();
                if want_read || unwritten.is_empty() {
                    let k = rng.gen_range(0..p.keys);
                    ops.push((OpKind::Read, format!("k{k}")));
                } else {
                    let k = unwritten[rng.gen_range(0..unwritten.len())];
                    written.push(k);
                    ops.push((OpKind::Write, format!("k{k}")));
                }
            }
            txns.push(SkelTxn { id: format!("t{txn_no:02}"), ops });
            txn_no += 1;
        }
        sessions.push(SkelSession { id: format!("s{s_ix}"), txns });
    }
    Skeleton { sessions }
}

/// Fills a skeleton's reads with values drawn uniformly from the initial
/// value and the other transactions' writes of the same key. Reads after
/// the transaction's own write return the transaction's value.
pub fn generate_workload(p: &GenParams) -> Workload {
    let skel = generate_skeleton(p);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    // (key -> writers' literals), writer literal = "txn:key".
    let mut writes: BTreeMap<&str, Vec<(String, String)>> = BTreeMap::new();
    for sess in &skel.sessions {
        for t in &sess.txns {
            for (kind, key) in &t.ops {
                if *kind == OpKind::Write {
                    writes
                        .entry(key.as_str())
                        .or_default()
                        .push((t.id.clone(), format!("{}:{}", t.id, key)));
                }
            }
        }
    }
    let mut b = WorkloadBuilder::default();
    for sess in &skel.sessions {
        let mut txns: Vec<TxnBuilder> = Vec::new();
        for t in &sess.txns {
            let mut tb = txn(&t.id);
            let mut own: BTreeMap<&str, String> = BTreeMap::new();
            for (kind, key) in &t.ops {
                match kind {
                    OpKind::Write => {
                        let lit = format!("{}:{}", t.id, key);
                        own.insert(key.as_str(), lit.clone());
                        tb = tb.w(key, &lit);
                    }
                    OpKind::Read => {
                        if let Some(lit) = own.get(key.as_str()) {
                            let lit = lit.clone();
                            tb = tb.r(key, &lit);
                            continue;
                        }
                        let candidates: Vec<&(String, String)> = writes
                            .get(key.as_str())
                            .map(|v| v.iter().filter(|(owner, _)| owner != &t.id).collect())
                            .unwrap_or_default();
                        let pick = rng.gen_range(0..=candidates.len());
                        if pick == candidates.len() {
                            tb = tb.read_init(key);
                        } else {
                            let lit = candidates[pick].1.clone();
                            tb = tb.r(key, &lit);
                        }
                    }
                }
            }
            txns.push(tb);
        }
        b = b.session(&sess.id, txns);
    }
    b.build().expect("generated workloads are structurally valid")
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SimulateError {
    #[error("could not fill the skeleton for level {level} within {attempts} attempts")]
    Unfillable { level: IsolationLevel, attempts: usize },
}

/// Resolves a skeleton's reads so that the result is guaranteed to
/// satisfy `level`: a random execution order is drawn (session-respecting
/// for sequential consistency), each transaction reads from a state the
/// level permits, and the result is verified by replay before it is
/// returned.
pub fn simulate_level(
    skel: &Skeleton,
    level: IsolationLevel,
    seed: u64,
) -> Result<Workload, SimulateError> {
    const ATTEMPTS: usize = 20;
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        if let Some(w) = try_simulate(skel, level, &mut rng) {
            return Ok(w);
        }
    }
    Err(SimulateError::Unfillable { level, attempts: ATTEMPTS })
}

fn try_simulate(skel: &Skeleton, level: IsolationLevel, rng: &mut ChaCha8Rng) -> Option<Workload> {
    let n = skel.txn_count();
    // Coordinates (session, txn) in execution order.
    let coords: Vec<(usize, usize)> = match level {
        IsolationLevel::SequentialConsistency => {
            // Interleave sessions, preserving each session's order.
            let mut next = vec![0usize; skel.sessions.len()];
            let mut order = Vec::with_capacity(n);
            while order.len() < n {
                let live: Vec<usize> = (0..skel.sessions.len())
                    .filter(|&s| next[s] < skel.sessions[s].txns.len())
                    .collect();
                let s = live[rng.gen_range(0..live.len())];
                order.push((s, next[s]));
                next[s] += 1;
            }
            order
        }
        _ => {
            let mut order: Vec<(usize, usize)> = skel
                .sessions
                .iter()
                .enumerate()
                .flat_map(|(s, sess)| (0..sess.txns.len()).map(move |t| (s, t)))
                .collect();
            order.shuffle(rng);
            order
        }
    };

    // Value of each key per state; `None` is the initial value.
    let mut states: Vec<BTreeMap<String, Option<String>>> = vec![BTreeMap::new()];
    let mut filled: BTreeMap<(usize, usize), Vec<Option<String>>> = BTreeMap::new();
    let all_writes: BTreeMap<String, Vec<(String, String)>> = {
        let mut m: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        for sess in &skel.sessions {
            for t in &sess.txns {
                for (kind, key) in &t.ops {
                    if *kind == OpKind::Write {
                        m.entry(key.clone())
                            .or_default()
                            .push((t.id.clone(), format!("{}:{}", t.id, key)));
                    }
                }
            }
        }
        m
    };

    for (pos, &(s, t_ix)) in coords.iter().enumerate() {
        let t = &skel.sessions[s].txns[t_ix];
        let parent = pos; // states[pos] is the parent state
        // Pick the snapshot the level allows.
        let write_set: Vec<&str> = t
            .ops
            .iter()
            .filter(|(k, _)| *k == OpKind::Write)
            .map(|(_, key)| key.as_str())
            .collect();
        let snapshot: usize = match level {
            IsolationLevel::Serializability
            | IsolationLevel::StrictSerializability
            | IsolationLevel::SequentialConsistency => parent,
            IsolationLevel::SnapshotIsolation | IsolationLevel::ParallelSnapshotIsolation => {
                // Any earlier state whose write-set values match the
                // parent's; the parent itself always qualifies.
                let valid: Vec<usize> = (0..=parent)
                    .filter(|&s_ix| {
                        write_set.iter().all(|k| {
                            states[s_ix].get(*k).cloned().flatten()
                                == states[parent].get(*k).cloned().flatten()
                        })
                    })
                    .collect();
                valid[rng.gen_range(0..valid.len())]
            }
            IsolationLevel::ReadCommitted | IsolationLevel::ReadUncommitted => parent,
        };

        let mut own: BTreeMap<&str, String> = BTreeMap::new();
        let mut values = Vec::with_capacity(t.ops.len());
        for (kind, key) in &t.ops {
            match kind {
                OpKind::Write => {
                    own.insert(key.as_str(), format!("{}:{}", t.id, key));
                    values.push(None);
                }
                OpKind::Read => {
                    if let Some(lit) = own.get(key.as_str()) {
                        values.push(Some(lit.clone()));
                        continue;
                    }
                    let v = match level {
                        IsolationLevel::ReadCommitted => {
                            let s_ix = rng.gen_range(0..=parent);
                            states[s_ix].get(key.as_str()).cloned().flatten()
                        }
                        IsolationLevel::ReadUncommitted => {
                            let others: Vec<&(String, String)> = all_writes
                                .get(key)
                                .map(|v| v.iter().filter(|(owner, _)| owner != &t.id).collect())
                                .unwrap_or_default();
                            let pick = rng.gen_range(0..=others.len());
                            if pick == others.len() {
                                None
                            } else {
                                Some(others[pick].1.clone())
                            }
                        }
                        _ => states[snapshot].get(key.as_str()).cloned().flatten(),
                    };
                    values.push(v);
                }
            }
        }
        filled.insert((s, t_ix), values);
        // Apply writes.
        let mut next = states[parent].clone();
        for (kind, key) in &t.ops {
            if *kind == OpKind::Write {
                next.insert(key.clone(), Some(format!("{}:{}", t.id, key)));
            }
        }
        states.push(next);
    }

    // Assemble in the skeleton's session structure.
    let mut b = WorkloadBuilder::default();
    for (s, sess) in skel.sessions.iter().enumerate() {
        let mut txns = Vec::new();
        for (t_ix, t) in sess.txns.iter().enumerate() {
            let mut tb = txn(&t.id);
            if level == IsolationLevel::StrictSerializability {
                let pos = coords.iter().position(|&c| c == (s, t_ix)).unwrap() as i64;
                tb = tb.at(2 * pos, 2 * pos + 1);
            }
            for ((kind, key), value) in t.ops.iter().zip(&filled[&(s, t_ix)]) {
                tb = match kind {
                    OpKind::Write => tb.w(key, &format!("{}:{}", t.id, key)),
                    OpKind::Read => match value {
                        Some(lit) => tb.r(key, lit),
                        None => tb.read_init(key),
                    },
                };
            }
            txns.push(tb);
        }
        b = b.session(&sess.id, txns);
    }
    let w = b.build().ok()?;

    // Replay: the generating order must pass the level for every txn.
    let order: Vec<crate::model::TxnId> = coords
        .iter()
        .map(|&(s, t_ix)| w.txn_by_name(&skel.sessions[s].txns[t_ix].id).unwrap())
        .collect();
    let e = Execution::build(&w, order).expect("generation order is a permutation");
    match verify_isolation_witness(&w, level, &e) {
        Ok(true) => Some(w),
        _ => None,
    }
}

/// Bounds for exhaustive enumeration.
#[derive(Clone, Copy, Debug)]
pub struct EnumBounds {
    pub max_txns: usize,
    pub max_ops: usize,
    pub keys: usize,
    pub max_sessions: usize,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds { max_txns: 3, max_ops: 2, keys: 2, max_sessions: 2 }
    }
}

type TxnShape = Vec<(OpKind, usize)>;

/// All structurally valid per-transaction op sequences within bounds.
fn txn_shapes(b: &EnumBounds) -> Vec<TxnShape> {
    let mut shapes = Vec::new();
    let ops: Vec<(OpKind, usize)> = (0..b.keys)
        .flat_map(|k| [(OpKind::Read, k), (OpKind::Write, k)])
        .collect();
    for len in 1..=b.max_ops {
        for shape in std::iter::repeat_n(ops.clone(), len).multi_cartesian_product() {
            // A transaction writes a key at most once.
            let writes: Vec<usize> = shape
                .iter()
                .filter(|(kind, _)| *kind == OpKind::Write)
                .map(|&(_, k)| k)
                .collect();
            let mut dedup = writes.clone();
            dedup.sort_unstable();
            dedup.dedup();
            if dedup.len() == writes.len() {
                shapes.push(shape);
            }
        }
    }
    shapes
}

/// Ordered compositions of `n` into at most `max_parts` positive parts.
fn compositions(n: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, parts: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(acc.clone());
            return;
        }
        if parts == 0 {
            return;
        }
        for first in 1..=n {
            acc.push(first);
            rec(n - first, parts - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_parts, &mut Vec::new(), &mut out);
    out
}

/// One candidate during enumeration: sessions of transaction shapes with
/// per-read sources (`None` = initial value, `Some(flat txn index)` = that
/// transaction's write of the key).
#[derive(Clone, Debug)]
struct Candidate {
    split: Vec<usize>,
    shapes: Vec<TxnShape>,
    reads: Vec<Option<usize>>,
}

impl Candidate {
    /// Encoding under a session permutation and key permutation, for
    /// canonical-form selection.
    fn encode(&self, sess_perm: &[usize], key_perm: &[usize]) -> Vec<u8> {
        // Flat index ranges per session under the original numbering.
        let mut base = Vec::with_capacity(self.split.len());
        let mut acc = 0usize;
        for &len in &self.split {
            base.push(acc);
            acc += len;
        }
        // Map original flat txn index -> new flat index under sess_perm.
        let mut new_index = vec![0usize; acc];
        let mut next = 0usize;
        for &old_s in sess_perm {
            for i in 0..self.split[old_s] {
                new_index[base[old_s] + i] = next;
                next += 1;
            }
        }
        let mut bytes = Vec::new();
        let mut read_ix = 0usize;
        // Emit sessions in permuted order.
        let mut read_of_txn: Vec<Vec<Option<usize>>> = Vec::with_capacity(acc);
        for shape in &self.shapes {
            let n_reads = shape.iter().filter(|(k, _)| *k == OpKind::Read).count();
            read_of_txn.push(self.reads[read_ix..read_ix + n_reads].to_vec());
            read_ix += n_reads;
        }
        for &old_s in sess_perm {
            bytes.push(0xFF);
            for i in 0..self.split[old_s] {
                bytes.push(0xFE);
                let flat = base[old_s] + i;
                let mut r = 0usize;
                for &(kind, key) in &self.shapes[flat] {
                    bytes.push(match kind {
                        OpKind::Read => 0,
                        OpKind::Write => 1,
                    });
                    bytes.push(key_perm[key] as u8);
                    if kind == OpKind::Read {
                        match read_of_txn[flat][r] {
                            None => bytes.push(0xFD),
                            Some(writer_flat) => bytes.push(new_index[writer_flat] as u8),
                        }
                        r += 1;
                    }
                }
            }
        }
        bytes
    }

    fn canonical(&self, n_sessions: usize, n_keys: usize) -> Vec<u8> {
        let sess_perms: Vec<Vec<usize>> = (0..n_sessions).permutations(n_sessions).collect();
        let key_perms: Vec<Vec<usize>> = (0..n_keys).permutations(n_keys).collect();
        sess_perms
            .iter()
            .cartesian_product(key_perms.iter())
            .map(|(sp, kp)| self.encode(sp, kp))
            .min()
            .expect("at least one permutation")
    }

    fn build(&self) -> Workload {
        let mut base = Vec::with_capacity(self.split.len());
        let mut acc = 0usize;
        for &len in &self.split {
            base.push(acc);
            acc += len;
        }
        let key_name = |k: usize| format!("k{k}");
        let txn_name = |flat: usize| format!("t{flat}");
        let mut read_ix = 0usize;
        let mut b = WorkloadBuilder::default();
        for (s, &len) in self.split.iter().enumerate() {
            let mut txns = Vec::with_capacity(len);
            for i in 0..len {
                let flat = base[s] + i;
                let mut tb = txn(&txn_name(flat));
                let mut own: Vec<usize> = Vec::new();
                for &(kind, key) in &self.shapes[flat] {
                    match kind {
                        OpKind::Write => {
                            own.push(key);
                            let lit = format!("{}:{}", txn_name(flat), key_name(key));
                            tb = tb.w(&key_name(key), &lit);
                        }
                        OpKind::Read => {
                            let src = self.reads[read_ix];
                            read_ix += 1;
                            tb = match src {
                                None => tb.read_init(&key_name(key)),
                                Some(writer) => {
                                    let lit =
                                        format!("{}:{}", txn_name(writer), key_name(key));
                                    tb.r(&key_name(key), &lit)
                                }
                            };
                        }
                    }
                }
                txns.push(tb);
            }
            b = b.session(&format!("s{s}"), txns);
        }
        b.build().expect("enumerated candidates are valid")
    }
}

/// Exhaustively enumerates workloads within bounds, one representative
/// per equivalence class under session and key renaming. Reads range over
/// the initial value, other transactions' writes of the key, and the
/// transaction's own earlier write (forced). Deterministic across runs.
///
/// The reduction quotients by exactly `sessions! x keys!` relabelings:
/// dropping the `seen` dedup below re-derives the unreduced family, so
/// verdicts are unaffected (every dropped case is a relabeling of a kept
/// one, and all checks here are label-invariant).
pub fn enumerate_small_workloads(b: &EnumBounds) -> Vec<Workload> {
    let shapes = txn_shapes(b);
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut out = Vec::new();
    for n in 1..=b.max_txns {
        for split in compositions(n, b.max_sessions) {
            let shape_choices: Vec<Vec<usize>> =
                vec![(0..shapes.len()).collect::<Vec<usize>>(); n];
            for shape_ix in shape_choices.into_iter().multi_cartesian_product() {
                let chosen: Vec<TxnShape> =
                    shape_ix.iter().map(|&i| shapes[i].clone()).collect();
                // Writers per key (flat txn indices).
                let mut writers: Vec<Vec<usize>> = vec![Vec::new(); b.keys];
                for (flat, shape) in chosen.iter().enumerate() {
                    for &(kind, key) in shape {
                        if kind == OpKind::Write {
                            writers[key].push(flat);
                        }
                    }
                }
                // Per-read choice lists, in (txn, op) order.
                let mut read_choices: Vec<Vec<Option<usize>>> = Vec::new();
                for (flat, shape) in chosen.iter().enumerate() {
                    let mut own_written: Vec<usize> = Vec::new();
                    for &(kind, key) in shape {
                        match kind {
                            OpKind::Write => own_written.push(key),
                            OpKind::Read => {
                                if own_written.contains(&key) {
                                    // Forced to the transaction's own value.
                                    read_choices.push(vec![Some(flat)]);
                                } else {
                                    let mut cs: Vec<Option<usize>> = vec![None];
                                    cs.extend(
                                        writers[key]
                                            .iter()
                                            .filter(|&&wr| wr != flat)
                                            .map(|&wr| Some(wr)),
                                    );
                                    read_choices.push(cs);
                                }
                            }
                        }
                    }
                }
                let assignments: Box<dyn Iterator<Item = Vec<Option<usize>>>> =
                    if read_choices.is_empty() {
                        Box::new(std::iter::once(Vec::new()))
                    } else {
                        Box::new(read_choices.into_iter().multi_cartesian_product())
                    };
                for reads in assignments {
                    let cand = Candidate { split: split.clone(), shapes: chosen.clone(), reads };
                    let canon = cand.canonical(split.len(), b.keys);
                    if seen.insert(canon) {
                        out.push(cand.build());
                    }
                }
            }
        }
    }
    out
}

/// Claims checked by [`crosscheck`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CrossLevel {
    /// Serializability vs absence of dependency and anti-dependency cycles.
    Ser,
    /// Snapshot isolation vs its start-ordered phenomena, with derived
    /// timestamps.
    Si,
    /// Read committed vs absence of dependency cycles.
    Rc,
    /// Read uncommitted vs absence of write cycles.
    Ru,
    /// Parallel snapshot isolation vs single-anti-dependency-cycle
    /// freedom.
    Psi,
    /// Parallel snapshot isolation vs the axiomatic
    /// visibility/arbitration formulation (small workloads only).
    PsiA,
    /// Causal consistency vs the four session guarantees.
    Cc4,
}

impl CrossLevel {
    pub const ALL: [CrossLevel; 7] = [
        CrossLevel::Ser,
        CrossLevel::Si,
        CrossLevel::Rc,
        CrossLevel::Ru,
        CrossLevel::Psi,
        CrossLevel::PsiA,
        CrossLevel::Cc4,
    ];

    pub fn token(self) -> &'static str {
        match self {
            CrossLevel::Ser => "ser",
            CrossLevel::Si => "si",
            CrossLevel::Rc => "rc",
            CrossLevel::Ru => "ru",
            CrossLevel::Psi => "psi",
            CrossLevel::PsiA => "psia",
            CrossLevel::Cc4 => "cc4",
        }
    }

    /// Transaction-count cap above which the axiomatic enumeration is
    /// skipped.
    pub const PSI_A_CAP: usize = 4;
}

impl fmt::Display for CrossLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for CrossLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CrossLevel::ALL
            .into_iter()
            .find(|l| l.token() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown crosscheck level {s:?}"))
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Disagreement {
    pub digest: String,
    pub level: String,
    pub checker: String,
    pub oracle: String,
    pub workload: HistoryFile,
}

/// Outcome of one cross-validation run. `cases` counts decided
/// (checker, oracle) pairs, so `agreements + disagreements.len() ==
/// cases` always holds; runs that blew a budget are tallied apart and
/// never count as agreement.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CrossReport {
    pub cases: usize,
    pub agreements: usize,
    pub budget_exceeded: usize,
    pub skipped: usize,
    pub disagreements: Vec<Disagreement>,
}

impl CrossReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty() && self.budget_exceeded == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn verdict_bit(v: &Verdict) -> Option<bool> {
    match v {
        Verdict::Satisfied(_) => Some(true),
        Verdict::Violated(_) => Some(false),
        Verdict::BudgetExceeded(_) => None,
    }
}

fn bit_str(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "satisfied",
        Some(false) => "violated",
        None => "budget-exceeded",
    }
}

/// Runs checker and oracle on every case and records each disagreement
/// with a replayable copy of the workload.
pub fn crosscheck(cases: &[Workload], levels: &[CrossLevel]) -> CrossReport {
    let budget = SearchBudget::default();
    let oracle_budget = OracleBudget::default();
    let mut report = CrossReport {
        cases: 0,
        agreements: 0,
        budget_exceeded: 0,
        skipped: 0,
        disagreements: Vec::new(),
    };
    for w in cases {
        for &lvl in levels {
            let pair: Option<(Option<bool>, Option<bool>)> = match lvl {
                CrossLevel::Ser | CrossLevel::Si | CrossLevel::Rc | CrossLevel::Ru | CrossLevel::Psi => {
                    let iso = match lvl {
                        CrossLevel::Ser => IsolationLevel::Serializability,
                        CrossLevel::Si => IsolationLevel::SnapshotIsolation,
                        CrossLevel::Rc => IsolationLevel::ReadCommitted,
                        CrossLevel::Ru => IsolationLevel::ReadUncommitted,
                        CrossLevel::Psi => IsolationLevel::ParallelSnapshotIsolation,
                        _ => unreachable!(),
                    };
                    let checker = check_isolation(w, iso, &budget)
                        .expect("no timestamp-dependent levels here");
                    let oracle = match pl_check(w, iso, &oracle_budget) {
                        Ok(o) => Some(o.satisfied),
                        Err(OracleError::BudgetExceeded(_)) => None,
                        Err(e) => panic!("oracle failed: {e}"),
                    };
                    Some((verdict_bit(&checker), oracle))
                }
                CrossLevel::PsiA => {
                    if w.n_txns() > CrossLevel::PSI_A_CAP {
                        None
                    } else {
                        let checker = check_isolation(
                            w,
                            IsolationLevel::ParallelSnapshotIsolation,
                            &budget,
                        )
                        .expect("psi needs no timestamps");
                        let oracle = match exists_psi_a_witness(w, CrossLevel::PSI_A_CAP) {
                            Ok(b) => Some(b),
                            Err(OracleError::BudgetExceeded(_)) => None,
                            Err(e) => panic!("axiomatic check failed: {e}"),
                        };
                        Some((verdict_bit(&checker), oracle))
                    }
                }
                CrossLevel::Cc4 => {
                    let cc = GuaranteeSet::of(SessionGuarantee::CausalConsistency);
                    let four = GuaranteeSet::four();
                    let a = check_session(w, &cc, &budget).expect("guarantee sets are non-empty");
                    let b = check_session(w, &four, &budget).expect("guarantee sets are non-empty");
                    Some((verdict_bit(&a), verdict_bit(&b)))
                }
            };
            let Some((checker_bit, oracle_bit)) = pair else {
                report.skipped += 1;
                continue;
            };
            match (checker_bit, oracle_bit) {
                (Some(c), Some(o)) => {
                    report.cases += 1;
                    if c == o {
                        report.agreements += 1;
                    } else {
                        report.disagreements.push(Disagreement {
                            digest: workload_digest(w),
                            level: lvl.to_string(),
                            checker: bit_str(checker_bit).to_string(),
                            oracle: bit_str(oracle_bit).to_string(),
                            workload: HistoryFile::from_workload(w),
                        });
                    }
                }
                _ => {
                    report.budget_exceeded += 1;
                }
            }
        }
    }
    report
}

/// Deterministic corpus of random workloads with at most `max_txns`
/// transactions.
pub fn random_corpus(count: usize, max_txns: usize, base_seed: u64) -> Vec<Workload> {
    (0..count)
        .map(|i| {
            let seed = base_seed.wrapping_add(i as u64);
            let mut p = GenParams {
                sessions: 1 + (i % 3),
                txns_per_session: (1, (max_txns / (1 + i % 3)).max(1)),
                ops_per_txn: (1, 3),
                keys: 2 + (i % 2),
                read_fraction: 0.5,
                seed,
            };
            // Clamp the expected total to the cap.
            loop {
                let w = generate_workload(&p);
                if w.n_txns() <= max_txns {
                    return w;
                }
                p.txns_per_session = (1, p.txns_per_session.1.saturating_sub(1).max(1));
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::workload_digest;

    #[test]
    fn generation_is_deterministic_in_seed() {
        let p = GenParams { seed: 7, ..Default::default() };
        let a = generate_workload(&p);
        let b = generate_workload(&p);
        assert_eq!(workload_digest(&a), workload_digest(&b));
        let c = generate_workload(&GenParams { seed: 8, ..Default::default() });
        assert_ne!(workload_digest(&a), workload_digest(&c));
    }

    #[test]
    fn read_fraction_zero_yields_no_reads() {
        let p = GenParams { read_fraction: 0.0, keys: 8, ops_per_txn: (1, 2), ..Default::default() };
        let w = generate_workload(&p);
        for t in w.txns() {
            assert!(w.txn(t).ops.iter().all(|o| o.kind == OpKind::Write));
        }
    }

    #[test]
    fn single_key_writers_make_versions() {
        let p = GenParams {
            sessions: 3,
            txns_per_session: (1, 1),
            ops_per_txn: (1, 1),
            keys: 1,
            read_fraction: 0.0,
            seed: 3,
        };
        let w = generate_workload(&p);
        assert_eq!(w.writers_of(crate::model::Key(0)).len(), 3);
    }

    #[test]
    fn simulate_ser_closed_loop() {
        for seed in 0..30 {
            let p = GenParams { seed, ..Default::default() };
            let skel = generate_skeleton(&p);
            let w = simulate_level(&skel, IsolationLevel::Serializability, seed).unwrap();
            let verdict =
                check_isolation(&w, IsolationLevel::Serializability, &SearchBudget::default())
                    .unwrap();
            assert!(verdict.is_satisfied(), "seed {seed}");
        }
    }

    #[test]
    fn simulate_rc_passes_rc_not_always_ser() {
        let mut ser_failures = 0;
        for seed in 0..40 {
            let p = GenParams { seed, keys: 2, ops_per_txn: (2, 3), ..Default::default() };
            let skel = generate_skeleton(&p);
            let w = simulate_level(&skel, IsolationLevel::ReadCommitted, seed).unwrap();
            let b = SearchBudget::default();
            assert!(check_isolation(&w, IsolationLevel::ReadCommitted, &b).unwrap().is_satisfied());
            if check_isolation(&w, IsolationLevel::Serializability, &b).unwrap().is_violated() {
                ser_failures += 1;
            }
        }
        assert!(ser_failures > 0, "read-committed corpus never left serializability");
    }

    #[test]
    fn simulate_si_closed_loop() {
        for seed in 0..30 {
            let p = GenParams { seed, keys: 2, ops_per_txn: (2, 3), ..Default::default() };
            let skel = generate_skeleton(&p);
            let w = simulate_level(&skel, IsolationLevel::SnapshotIsolation, seed).unwrap();
            let b = SearchBudget::default();
            assert!(
                check_isolation(&w, IsolationLevel::SnapshotIsolation, &b).unwrap().is_satisfied(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn simulate_si_reproduces_write_skew_for_some_seed() {
        // Two read-read-write transactions over a shared pair of keys:
        // the snapshot-isolation filler must eventually let both read the
        // same snapshot and produce a non-serializable history.
        let skel = Skeleton {
            sessions: vec![
                SkelSession {
                    id: "init".into(),
                    txns: vec![SkelTxn {
                        id: "t0".into(),
                        ops: vec![(OpKind::Write, "C".into()), (OpKind::Write, "S".into())],
                    }],
                },
                SkelSession {
                    id: "alice".into(),
                    txns: vec![SkelTxn {
                        id: "t1".into(),
                        ops: vec![
                            (OpKind::Read, "C".into()),
                            (OpKind::Read, "S".into()),
                            (OpKind::Write, "C".into()),
                        ],
                    }],
                },
                SkelSession {
                    id: "bob".into(),
                    txns: vec![SkelTxn {
                        id: "t2".into(),
                        ops: vec![
                            (OpKind::Read, "C".into()),
                            (OpKind::Read, "S".into()),
                            (OpKind::Write, "S".into()),
                        ],
                    }],
                },
            ],
        };
        let b = SearchBudget::default();
        let mut skew_seen = false;
        for seed in 0..40 {
            let w = simulate_level(&skel, IsolationLevel::SnapshotIsolation, seed).unwrap();
            assert!(
                check_isolation(&w, IsolationLevel::SnapshotIsolation, &b).unwrap().is_satisfied()
            );
            if check_isolation(&w, IsolationLevel::Serializability, &b).unwrap().is_violated() {
                skew_seen = true;
                break;
            }
        }
        assert!(skew_seen, "snapshot-isolation simulation never produced write skew");
    }

    #[test]
    fn simulate_sc_closed_loop() {
        for seed in 0..20 {
            let p = GenParams { seed, ..Default::default() };
            let skel = generate_skeleton(&p);
            let w = simulate_level(&skel, IsolationLevel::SequentialConsistency, seed).unwrap();
            let b = SearchBudget::default();
            assert!(
                check_isolation(&w, IsolationLevel::SequentialConsistency, &b)
                    .unwrap()
                    .is_satisfied(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn enumerate_minimal_bounds_by_hand() {
        let b = EnumBounds { max_txns: 1, max_ops: 1, keys: 1, max_sessions: 1 };
        let ws = enumerate_small_workloads(&b);
        // One write, or one read of the initial value.
        assert_eq!(ws.len(), 2);
    }

    #[test]
    fn enumerate_is_deterministic() {
        let b = EnumBounds { max_txns: 2, max_ops: 2, keys: 2, max_sessions: 2 };
        let a: Vec<String> = enumerate_small_workloads(&b).iter().map(workload_digest).collect();
        let c: Vec<String> = enumerate_small_workloads(&b).iter().map(workload_digest).collect();
        assert_eq!(a, c);
        // Canonicalization removed session/key symmetric duplicates.
        let set: HashSet<&String> = a.iter().collect();
        assert_eq!(set.len(), a.len());
    }

    #[test]
    fn crosscheck_small_bounds_all_levels_agree() {
        let b = EnumBounds { max_txns: 2, max_ops: 2, keys: 2, max_sessions: 2 };
        let cases = enumerate_small_workloads(&b);
        let report = crosscheck(&cases, &CrossLevel::ALL);
        assert!(report.passed(), "disagreements: {:?}", report.disagreements);
        assert_eq!(report.agreements, report.cases);
    }

    #[test]
    fn crosscheck_report_shape() {
        let b = EnumBounds { max_txns: 1, max_ops: 1, keys: 1, max_sessions: 1 };
        let cases = enumerate_small_workloads(&b);
        let report = crosscheck(&cases, &[CrossLevel::Ser]);
        assert_eq!(report.cases, cases.len());
        assert_eq!(report.agreements + report.disagreements.len(), report.cases);
    }
}
