//! On-disk formats: the JSON history document, witness files, and stable
//! workload digests.
//!
//! A history file lists sessions of transactions of operations:
//!
//! ```json
//! {"sessions": [{"id": "s1", "transactions": [
//!   {"id": "t1", "ops": [{"type": "w", "key": "x", "value": "1"}]},
//!   {"id": "t2", "ops": [{"type": "r", "key": "x", "value": "1"}]}
//! ]}]}
//! ```
//!
//! A null read value means the initial value. Write values must be
//! non-null and unique per key across the whole file. Optional `start` and
//! `commit` integer ranks on a transaction supply real time for strict
//! serializability and start-ordered predicates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adya::VersionOrder;
use crate::model::{
    txn, Execution, OpKind, TxnId, Value, Workload, WorkloadBuilder, WorkloadError,
};
use crate::search::Witness;

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
pub struct HistoryFile {
    pub sessions: Vec<SessionDoc>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
pub struct SessionDoc {
    pub id: String,
    pub transactions: Vec<TxnDoc>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
pub struct TxnDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commit: Option<i64>,
    pub ops: Vec<OpDoc>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
pub struct OpDoc {
    #[serde(rename = "type")]
    pub kind: String,
    pub key: String,
    pub value: Option<String>,
}

#[derive(Error, Debug)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("transaction {txn:?}: operation type must be \"r\" or \"w\", got {got:?}")]
    BadOpType { txn: String, got: String },
    #[error("transaction {txn:?}: a write needs a value")]
    WriteWithoutValue { txn: String },
    #[error("transaction {txn:?}: start and commit ranks must come together")]
    HalfTimestamped { txn: String },
    #[error("witness names unknown transaction {0:?}")]
    UnknownTxn(String),
    #[error("witness names unknown session {0:?}")]
    UnknownSession(String),
    #[error("witness order is not a permutation of the history's transactions")]
    NotAPermutation,
    #[error("witness carries no execution order")]
    EmptyWitness,
}

impl HistoryFile {
    pub fn parse(text: &str) -> Result<HistoryFile, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("history serializes");
        s.push('\n');
        s
    }

    pub fn to_workload(&self) -> Result<Workload, FormatError> {
        let mut b = WorkloadBuilder::default();
        for sess in &self.sessions {
            let mut txns = Vec::new();
            for t in &sess.transactions {
                let mut tb = txn(&t.id);
                match (t.start, t.commit) {
                    (Some(s), Some(c)) => tb = tb.at(s, c),
                    (None, None) => {}
                    _ => return Err(FormatError::HalfTimestamped { txn: t.id.clone() }),
                }
                for op in &t.ops {
                    match op.kind.as_str() {
                        "w" => match &op.value {
                            Some(v) => tb = tb.w(&op.key, v),
                            None => {
                                return Err(FormatError::WriteWithoutValue { txn: t.id.clone() })
                            }
                        },
                        "r" => {
                            tb = match &op.value {
                                Some(v) => tb.r(&op.key, v),
                                None => tb.read_init(&op.key),
                            }
                        }
                        other => {
                            return Err(FormatError::BadOpType {
                                txn: t.id.clone(),
                                got: other.to_string(),
                            })
                        }
                    }
                }
                txns.push(tb);
            }
            b = b.session(&sess.id, txns);
        }
        Ok(b.build()?)
    }

    pub fn from_workload(w: &Workload) -> HistoryFile {
        let sessions = w
            .sessions()
            .map(|se| SessionDoc {
                id: w.session(se).id.clone(),
                transactions: w
                    .session(se)
                    .txns
                    .iter()
                    .map(|&t| {
                        let tx = w.txn(t);
                        TxnDoc {
                            id: tx.id.clone(),
                            start: tx.start_commit.map(|(b, _)| b),
                            commit: tx.start_commit.map(|(_, c)| c),
                            ops: tx
                                .ops
                                .iter()
                                .map(|op| OpDoc {
                                    kind: match op.kind {
                                        OpKind::Read => "r",
                                        OpKind::Write => "w",
                                    }
                                    .to_string(),
                                    key: w.key_name(op.key).to_string(),
                                    value: match op.value {
                                        Value::Bottom => None,
                                        v => w.value_literal(op.key, v),
                                    },
                                })
                                .collect(),
                        }
                    })
                    .collect(),
            })
            .collect();
        HistoryFile { sessions }
    }
}

/// Parses a history file straight into a workload.
pub fn parse_history(text: &str) -> Result<Workload, FormatError> {
    HistoryFile::parse(text)?.to_workload()
}

/// Canonical serialization of a workload, as written by `from_workload`.
pub fn workload_json(w: &Workload) -> String {
    HistoryFile::from_workload(w).to_json()
}

/// Stable content digest of a workload (hex, 16 chars).
pub fn workload_digest(w: &Workload) -> String {
    let json = serde_json::to_string(&HistoryFile::from_workload(w)).expect("serializes");
    let hash = Sha256::digest(json.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug, Default)]
pub struct WitnessFile {
    /// Shared execution order (isolation levels).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    /// Per-session execution orders (session guarantees).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_session: Option<BTreeMap<String, WitnessOrder>>,
    /// Version order that witnessed a graph-side verdict, keyed by key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_order: Option<BTreeMap<String, Vec<String>>>,
    /// Start/commit ranks, keyed by transaction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<BTreeMap<String, (i64, i64)>>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
pub struct WitnessOrder {
    pub order: Vec<String>,
}

impl WitnessFile {
    pub fn parse(text: &str) -> Result<WitnessFile, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("witness serializes");
        s.push('\n');
        s
    }

    pub fn from_witness(w: &Workload, witness: &Witness) -> WitnessFile {
        let names = |e: &Execution| -> Vec<String> {
            e.order().iter().map(|&t| w.txn_name(t).to_string()).collect()
        };
        match witness {
            Witness::Execution(e) => WitnessFile { order: Some(names(e)), ..Default::default() },
            Witness::PerSession(m) => WitnessFile {
                per_session: Some(
                    m.iter()
                        .map(|(sid, e)| (sid.clone(), WitnessOrder { order: names(e) }))
                        .collect(),
                ),
                ..Default::default()
            },
        }
    }

    pub fn with_version_order(mut self, w: &Workload, vo: &VersionOrder) -> WitnessFile {
        self.version_order = Some(
            w.keys()
                .map(|k| {
                    (
                        w.key_name(k).to_string(),
                        vo.of_key(k).iter().map(|&t| w.txn_name(t).to_string()).collect(),
                    )
                })
                .collect(),
        );
        self
    }

    pub fn with_timestamps(mut self, w: &Workload, ts: &[(i64, i64)]) -> WitnessFile {
        self.timestamps = Some(
            w.txns()
                .map(|t| (w.txn_name(t).to_string(), ts[t.ix()]))
                .collect(),
        );
        self
    }

    fn order_to_execution(w: &Workload, order: &[String]) -> Result<Execution, FormatError> {
        let ids: Vec<TxnId> = order
            .iter()
            .map(|name| w.txn_by_name(name).ok_or_else(|| FormatError::UnknownTxn(name.clone())))
            .collect::<Result<_, _>>()?;
        Execution::build(w, ids).map_err(|_| FormatError::NotAPermutation)
    }

    /// Reconstructs the witness against a parsed workload.
    pub fn to_witness(&self, w: &Workload) -> Result<Witness, FormatError> {
        if let Some(order) = &self.order {
            return Ok(Witness::Execution(Self::order_to_execution(w, order)?));
        }
        if let Some(map) = &self.per_session {
            let mut out = BTreeMap::new();
            for (sid, wo) in map {
                if w.session_by_name(sid).is_none() {
                    return Err(FormatError::UnknownSession(sid.clone()));
                }
                out.insert(sid.clone(), Self::order_to_execution(w, &wo.order)?);
            }
            return Ok(Witness::PerSession(out));
        }
        Err(FormatError::EmptyWitness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BANKING: &str = r#"{
  "sessions": [
    {"id": "init", "transactions": [
      {"id": "t0", "ops": [
        {"type": "w", "key": "C", "value": "30"},
        {"type": "w", "key": "S", "value": "30"}
      ]}
    ]},
    {"id": "alice", "transactions": [
      {"id": "t_w1", "ops": [
        {"type": "r", "key": "C", "value": "30"},
        {"type": "r", "key": "S", "value": "30"},
        {"type": "w", "key": "C", "value": "-10"}
      ]}
    ]},
    {"id": "bob", "transactions": [
      {"id": "t_w2", "ops": [
        {"type": "r", "key": "C", "value": "30"},
        {"type": "r", "key": "S", "value": "30"},
        {"type": "w", "key": "S", "value": "-10"}
      ]}
    ]}
  ]
}"#;

    #[test]
    fn parse_and_roundtrip() {
        let w = parse_history(BANKING).unwrap();
        assert_eq!(w.n_txns(), 3);
        assert_eq!(w.n_keys(), 2);
        // Canonical form is a fixed point of parse ∘ serialize.
        let canon = workload_json(&w);
        let w2 = parse_history(&canon).unwrap();
        assert_eq!(workload_json(&w2), canon);
    }

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let w = parse_history(BANKING).unwrap();
        let d1 = workload_digest(&w);
        let d2 = workload_digest(&parse_history(BANKING).unwrap());
        assert_eq!(d1, d2);
        let other = BANKING.replace("\"value\": \"-10\"", "\"value\": \"-11\"");
        let w3 = parse_history(&other).unwrap();
        assert_ne!(workload_digest(&w3), d1);
    }

    #[test]
    fn null_read_means_initial_value() {
        let text = r#"{"sessions":[{"id":"s","transactions":[
            {"id":"t","ops":[{"type":"r","key":"x","value":null}]}
        ]}]}"#;
        let w = parse_history(text).unwrap();
        let t = w.txn_by_name("t").unwrap();
        assert_eq!(w.txn(t).ops[0].value, Value::Bottom);
    }

    #[test]
    fn rejects_bad_op_type_and_null_write() {
        let bad_type = r#"{"sessions":[{"id":"s","transactions":[
            {"id":"t","ops":[{"type":"x","key":"k","value":"1"}]}
        ]}]}"#;
        assert!(matches!(
            HistoryFile::parse(bad_type).unwrap().to_workload(),
            Err(FormatError::BadOpType { .. })
        ));
        let null_write = r#"{"sessions":[{"id":"s","transactions":[
            {"id":"t","ops":[{"type":"w","key":"k","value":null}]}
        ]}]}"#;
        assert!(matches!(
            HistoryFile::parse(null_write).unwrap().to_workload(),
            Err(FormatError::WriteWithoutValue { .. })
        ));
    }

    #[test]
    fn rejects_duplicate_write_values() {
        let text = r#"{"sessions":[{"id":"s","transactions":[
            {"id":"a","ops":[{"type":"w","key":"k","value":"1"}]},
            {"id":"b","ops":[{"type":"w","key":"k","value":"1"}]}
        ]}]}"#;
        assert!(matches!(
            HistoryFile::parse(text).unwrap().to_workload(),
            Err(FormatError::Workload(WorkloadError::DuplicateWriteValue { .. }))
        ));
    }

    #[test]
    fn ghost_reads_parse() {
        let text = r#"{"sessions":[{"id":"s","transactions":[
            {"id":"t","ops":[{"type":"r","key":"x","value":"phantom"}]}
        ]}]}"#;
        let w = parse_history(text).unwrap();
        assert!(w.has_ghost_reads());
        // And the ghost literal survives export.
        assert!(workload_json(&w).contains("phantom"));
    }

    #[test]
    fn witness_roundtrip() {
        let w = parse_history(BANKING).unwrap();
        let e = Execution::lexicographic(&w);
        let wf = WitnessFile::from_witness(&w, &Witness::Execution(e.clone()));
        let parsed = WitnessFile::parse(&wf.to_json()).unwrap();
        match parsed.to_witness(&w).unwrap() {
            Witness::Execution(e2) => assert_eq!(e2.order(), e.order()),
            _ => panic!("wrong witness shape"),
        }
    }

    #[test]
    fn witness_rejects_unknown_and_partial_orders() {
        let w = parse_history(BANKING).unwrap();
        let bad = WitnessFile { order: Some(vec!["nope".into()]), ..Default::default() };
        assert!(matches!(bad.to_witness(&w), Err(FormatError::UnknownTxn(_))));
        let partial = WitnessFile { order: Some(vec!["t0".into()]), ..Default::default() };
        assert!(matches!(partial.to_witness(&w), Err(FormatError::NotAPermutation)));
    }
}
