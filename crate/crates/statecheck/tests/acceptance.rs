//! Acceptance suite: checker/oracle agreement over the exhaustive small
//! workload family, the canonical anomaly fixtures, the read-state
//! lemmas, witness soundness, and the dependency-count property. One
//! pass/fail line per criterion.

use std::sync::OnceLock;
use std::time::Instant;

use itertools::Itertools;

use statecheck::adya::{pl_check, AdyaHistory, OracleBudget};
use statecheck::commit::IsolationLevel;
use statecheck::formats::parse_history;
use statecheck::harness::{
    crosscheck, enumerate_small_workloads, random_corpus, CrossLevel, EnumBounds, GenParams,
};
use statecheck::model::{Execution, OpKind, TxnId, Value, Workload};
use statecheck::search::{
    check_isolation, check_session, construct_cc_execution, construct_psi_execution,
    construct_ser_execution, construct_si_execution, count_dependencies, verify_isolation_witness,
    verify_session_witness, DependencyCountMode, SearchBudget, Verdict, Witness,
};
use statecheck::session::{GuaranteeSet, SessionGuarantee};

fn family() -> &'static Vec<Workload> {
    static FAMILY: OnceLock<Vec<Workload>> = OnceLock::new();
    FAMILY.get_or_init(|| {
        let f = enumerate_small_workloads(&EnumBounds::default());
        assert!(f.len() > 1000, "family unexpectedly small: {}", f.len());
        f
    })
}

fn fixture(name: &str) -> Workload {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_history(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn pass(name: &str, detail: String) {
    println!("ACCEPTANCE {name}: PASS ({detail})");
}

fn run_cross(levels: &[CrossLevel], what: &str) -> usize {
    let t0 = Instant::now();
    let report = crosscheck(family(), levels);
    assert_eq!(report.budget_exceeded, 0, "{what}: budget exceeded on some case");
    assert!(
        report.disagreements.is_empty(),
        "{what}: {} disagreements, first: {:?}",
        report.disagreements.len(),
        report.disagreements.first()
    );
    assert_eq!(report.agreements, report.cases);
    println!("  {what}: {} cases agree in {:?}", report.cases, t0.elapsed());
    report.cases
}

#[test]
fn serializability_agrees_with_pl3_oracle() {
    let t0 = Instant::now();
    let cases = run_cross(&[CrossLevel::Ser], "ser vs no-dependency-or-antidependency-cycles");
    assert!(
        t0.elapsed().as_secs() < 300,
        "suite exceeded the five-minute single-thread target"
    );
    pass(
        "serializability equivalence",
        format!("{cases} exhaustive cases, {:?}", t0.elapsed()),
    );
}

#[test]
fn read_committed_and_uncommitted_agree_with_oracle() {
    let rc = run_cross(&[CrossLevel::Rc], "rc vs no-dependency-cycles");
    let ru = run_cross(&[CrossLevel::Ru], "ru vs no-write-cycles");
    pass("read committed / read uncommitted equivalence", format!("{rc} + {ru} cases"));
}

#[test]
fn snapshot_isolation_agrees_with_oracle_under_derived_timestamps() {
    let cases = run_cross(&[CrossLevel::Si], "si vs start-ordered phenomena");
    pass("snapshot isolation equivalence", format!("{cases} cases, derived timestamps"));
}

#[test]
fn psi_agrees_with_pl2plus_and_axiomatic_form() {
    let graph_cases = run_cross(&[CrossLevel::Psi], "psi vs single-antidependency-cycle freedom");
    let ax_cases = run_cross(&[CrossLevel::PsiA], "psi vs visibility/arbitration axioms");
    // The axiomatic claim also covers four-transaction workloads.
    let four_txn = random_corpus(300, 4, 0xA11CE);
    let report = crosscheck(&four_txn, &[CrossLevel::PsiA]);
    assert!(report.passed(), "4-txn axiomatic disagreements: {:?}", report.disagreements);
    pass(
        "parallel snapshot isolation equivalences",
        format!("{graph_cases} graph cases, {ax_cases} + {} axiomatic cases", report.cases),
    );
}

#[test]
fn causal_consistency_equals_four_session_guarantees() {
    let exhaustive = run_cross(&[CrossLevel::Cc4], "cc vs {rmw,mr,mw,wfr}");
    let corpus = random_corpus(1000, 6, 0xCAFE);
    let t0 = Instant::now();
    let report = crosscheck(&corpus, &[CrossLevel::Cc4]);
    assert!(report.passed(), "random-corpus disagreements: {:?}", report.disagreements);
    assert_eq!(report.cases, 1000);
    pass(
        "causal consistency equivalence",
        format!("{exhaustive} exhaustive + 1000 random cases ({:?})", t0.elapsed()),
    );
}

#[test]
fn canonical_fixtures_verdicts() {
    let b = SearchBudget::default();
    let ob = OracleBudget::default();

    let banking = fixture("banking.json");
    assert!(check_isolation(&banking, IsolationLevel::Serializability, &b).unwrap().is_violated());
    assert!(check_isolation(&banking, IsolationLevel::SnapshotIsolation, &b).unwrap().is_satisfied());
    assert!(check_isolation(&banking, IsolationLevel::ParallelSnapshotIsolation, &b)
        .unwrap()
        .is_satisfied());

    let dw = fixture("double_withdrawal.json");
    assert!(check_isolation(&dw, IsolationLevel::ReadCommitted, &b).unwrap().is_satisfied());
    assert!(check_isolation(&dw, IsolationLevel::Serializability, &b).unwrap().is_violated());

    let ff = fixture("flipflop.json");
    let mr = GuaranteeSet::of(SessionGuarantee::MonotonicReads);
    assert!(check_session(&ff, &mr, &b).unwrap().is_violated());

    let cyc = fixture("wfr_cycle.json");
    let wfr = GuaranteeSet::of(SessionGuarantee::WritesFollowReads);
    assert!(check_session(&cyc, &wfr, &b).unwrap().is_violated());
    assert!(!pl_check(&cyc, IsolationLevel::ParallelSnapshotIsolation, &ob).unwrap().satisfied);

    pass("canonical fixtures", "banking, double withdrawal, flip-flop, causality cycle".into());
}

/// Brute-force candidate membership for one operation and state.
fn member(w: &Workload, e: &Execution, t: TxnId, op_ix: usize, s_ix: usize) -> bool {
    let op = &w.txn(t).ops[op_ix];
    if s_ix > e.parent_index(t) {
        return false;
    }
    let internal = op.kind == OpKind::Read
        && w.txn(t).ops[..op_ix]
            .iter()
            .any(|o| o.kind == OpKind::Write && o.key == op.key);
    if op.kind == OpKind::Write || internal {
        return true;
    }
    e.states()[s_ix].get(op.key) == op.value
}

#[test]
fn read_state_lemmas_and_contiguity() {
    let mut cases = 0usize;
    let mut contiguity_checked = 0usize;
    'outer: for w in family() {
        let ids: Vec<TxnId> = w.txns().collect();
        let n = ids.len();
        for order in ids.iter().copied().permutations(n) {
            let e = Execution::build(w, order).unwrap();

            // Contiguity: the span equals the brute-force membership set,
            // which must be one contiguous block.
            for &t in &ids {
                for op_ix in 0..w.txn(t).ops.len() {
                    let members: Vec<usize> = (0..e.states().len())
                        .filter(|&s| member(w, &e, t, op_ix, s))
                        .collect();
                    for pair in members.windows(2) {
                        assert_eq!(pair[0] + 1, pair[1], "candidate set not contiguous");
                    }
                    match e.candidate_read_states(w, t, op_ix) {
                        None => assert!(members.is_empty()),
                        Some(span) => {
                            assert_eq!(members.first(), Some(&span.first));
                            assert_eq!(members.last(), Some(&span.last));
                        }
                    }
                    contiguity_checked += 1;
                }
            }

            // Every subset of transactions, both lemma directions.
            for mask in 0u32..(1 << n) {
                let subset: Vec<TxnId> =
                    ids.iter().copied().filter(|t| mask & (1 << t.ix()) != 0).collect();
                let preread = e.preread(w, subset.iter().copied());
                // First-state-reflects-writes: preread of the subset holds
                // exactly when every operation's first candidate state
                // strictly precedes its transaction's state.
                let rhs = subset.iter().all(|&t| {
                    (0..w.txn(t).ops.len()).all(|op_ix| {
                        match e.candidate_read_states(w, t, op_ix) {
                            None => false,
                            Some(span) => span.first < e.state_index(t),
                        }
                    })
                });
                assert_eq!(preread, rhs, "first-state lemma fails");
                // Subset closure: preread over everything implies preread
                // over the subset.
                if e.preread_all(w) {
                    assert!(preread, "subset closure fails");
                }
                cases += 1;
            }
            if cases >= 10_000 {
                break 'outer;
            }
        }
    }
    assert!(cases >= 10_000);
    pass(
        "read-state lemmas",
        format!("{cases} (execution, subset) cases, {contiguity_checked} spans"),
    );
}

#[test]
fn witness_soundness_and_constructive_agreement() {
    let b = SearchBudget::default();
    let ob = OracleBudget::default();
    let mut replayed = 0usize;
    let mut constructed = 0usize;
    let levels = [
        IsolationLevel::ReadUncommitted,
        IsolationLevel::ReadCommitted,
        IsolationLevel::SnapshotIsolation,
        IsolationLevel::Serializability,
        IsolationLevel::SequentialConsistency,
        IsolationLevel::ParallelSnapshotIsolation,
    ];
    for w in family() {
        for level in levels {
            match check_isolation(w, level, &b).unwrap() {
                Verdict::Satisfied(Witness::Execution(e)) => {
                    assert!(
                        verify_isolation_witness(w, level, &e).unwrap(),
                        "witness fails replay for {level}"
                    );
                    replayed += 1;
                }
                Verdict::Satisfied(_) => panic!("isolation witness has session shape"),
                Verdict::Violated(_) => {}
                Verdict::BudgetExceeded(m) => panic!("budget exceeded: {m}"),
            }
        }
        // Constructive executions from oracle witnesses.
        for level in [
            IsolationLevel::Serializability,
            IsolationLevel::SnapshotIsolation,
            IsolationLevel::ParallelSnapshotIsolation,
        ] {
            let outcome = pl_check(w, level, &ob).unwrap();
            if !outcome.satisfied {
                continue;
            }
            let h = AdyaHistory {
                workload: w,
                version_order: outcome.version_order.expect("witnessing order"),
                start_commit: outcome.timestamps,
            };
            let e = match level {
                IsolationLevel::Serializability => construct_ser_execution(&h),
                IsolationLevel::SnapshotIsolation => construct_si_execution(&h),
                IsolationLevel::ParallelSnapshotIsolation => construct_psi_execution(&h),
                _ => unreachable!(),
            }
            .unwrap_or_else(|err| panic!("construction failed for {level}: {err}"));
            assert!(
                verify_isolation_witness(w, level, &e).unwrap(),
                "constructed execution fails {level}"
            );
            // The search must accept what the construction accepts.
            assert!(check_isolation(w, level, &b).unwrap().is_satisfied());
            constructed += 1;
        }
        // Session-guarantee witnesses, plus the causal reconstruction.
        for gs in [GuaranteeSet::of(SessionGuarantee::CausalConsistency), GuaranteeSet::four()] {
            if let Verdict::Satisfied(Witness::PerSession(m)) = check_session(w, &gs, &b).unwrap()
            {
                assert!(verify_session_witness(w, &gs, &m), "session witness fails replay");
                replayed += 1;
                if gs == GuaranteeSet::four() {
                    let rebuilt = construct_cc_execution(w, &m).expect("reconstruction");
                    let cc = GuaranteeSet::of(SessionGuarantee::CausalConsistency);
                    assert!(verify_session_witness(w, &cc, &rebuilt));
                    constructed += 1;
                }
            }
        }
    }
    pass(
        "witness soundness",
        format!("{replayed} witnesses replayed, {constructed} constructive executions verified"),
    );
}

/// Undirected data-conflict relation: a write-write overlap or a resolved
/// read of the other transaction's value.
fn conflicts(w: &Workload, a: TxnId, bt: TxnId) -> bool {
    let shared_write = w
        .txn(a)
        .write_set()
        .iter()
        .any(|k| w.txn(bt).writes_key(*k));
    let reads_from = |x: TxnId, y: TxnId| {
        w.txn(x)
            .ops
            .iter()
            .any(|op| op.kind == OpKind::Read && op.value == Value::Written(y))
    };
    shared_write || reads_from(a, bt) || reads_from(bt, a)
}

fn conflict_components(w: &Workload) -> Vec<usize> {
    let n = w.n_txns();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(comp: &mut Vec<usize>, x: usize) -> usize {
        if comp[x] != x {
            let root = find(comp, comp[x]);
            comp[x] = root;
        }
        comp[x]
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if conflicts(w, TxnId(a as u32), TxnId(b as u32)) {
                let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
                comp[ra] = rb;
            }
        }
    }
    (0..n).map(|x| find(&mut comp, x)).collect()
}

#[test]
fn dependency_counts_are_bounded_by_position() {
    let mut strict_seen = 0usize;
    let mut independent_pairs = 0usize;
    for seed in 0..100u64 {
        let p = GenParams {
            sessions: 4,
            txns_per_session: (5, 5),
            ops_per_txn: (1, 3),
            keys: 10,
            read_fraction: 0.5,
            seed,
        };
        let w = statecheck::harness::generate_workload(&p);
        assert_eq!(w.n_txns(), 20);
        let e = Execution::lexicographic(&w);
        let per_site = count_dependencies(&w, &e, DependencyCountMode::PerSiteSnapshot);
        let dep_set = count_dependencies(&w, &e, DependencyCountMode::DepSet);
        for t in w.txns() {
            assert!(
                dep_set[t.ix()] <= per_site[t.ix()],
                "seed {seed}: dep-set exceeds position for {}",
                w.txn_name(t)
            );
        }
        // Two transactions with no chain of data conflicts between them
        // force a strict gap somewhere.
        let comp = conflict_components(&w);
        let multi_component = comp.iter().any(|&c| c != comp[0]);
        if multi_component {
            independent_pairs += 1;
            let strict = w.txns().any(|t| dep_set[t.ix()] < per_site[t.ix()]);
            assert!(strict, "seed {seed}: independent transactions but no strict gap");
            strict_seen += 1;
        }
    }
    assert!(independent_pairs > 0, "corpus never produced data-independent transactions");
    pass(
        "dependency counts",
        format!("100 workloads of 20 txns; {strict_seen} with strict gaps"),
    );
}
