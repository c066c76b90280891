//! Exact secrecy verification by exhaustive enumeration.
//!
//! "Obtains no information" is checked as statistical independence between
//! an adversary's view and the protected message(s) when messages and
//! randomness are uniform. Every assignment is enumerated and the joint
//! counts are compared with the product of their margins in integer
//! arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::galois::FieldSpec;
use crate::netmodel::{EdgeId, NetworkSpec, NodeId, NodeRole};
use crate::protocols::{assignment_at, assignment_count, run_protocol, ProtocolId, ProtocolTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClaimId {
    B1,
    B2,
    B4,
    T1,
    T2,
    T4,
    /// Negative control: the plain butterfly relay sees both messages.
    N1,
}

impl ClaimId {
    pub const ALL: [ClaimId; 7] = [
        ClaimId::B1,
        ClaimId::B2,
        ClaimId::B4,
        ClaimId::T1,
        ClaimId::T2,
        ClaimId::T4,
        ClaimId::N1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClaimId::B1 => "B1",
            ClaimId::B2 => "B2",
            ClaimId::B4 => "B4",
            ClaimId::T1 => "T1",
            ClaimId::T2 => "T2",
            ClaimId::T4 => "T4",
            ClaimId::N1 => "N1",
        }
    }

    pub fn statement(&self) -> &'static str {
        match self {
            ClaimId::B1 => "any single butterfly edge is independent of (M1, M2)",
            ClaimId::B2 => "each butterfly node is independent of each message it is not meant to receive",
            ClaimId::B4 => {
                "with secure computation-and-forward, each butterfly node is independent of each unintended message"
            }
            ClaimId::T1 => "each terminal edge e7, e8, e9 is independent of each of M1, M2, M3",
            ClaimId::T2 => "each intermediate node is independent of (M1, M2, M3)",
            ClaimId::T4 => {
                "with secure computation-and-forward, each intermediate node is independent of each of M1, M2, M3"
            }
            ClaimId::N1 => "the plain butterfly relay V3 learns the messages",
        }
    }

    /// The verdict every scenario of this claim must produce.
    pub fn expected(&self) -> Verdict {
        match self {
            ClaimId::N1 => Verdict::Leaks,
            _ => Verdict::Independent,
        }
    }

    /// The construction the claim is stated for, over `field`.
    pub fn protocol_for(&self, field: FieldSpec) -> Result<ProtocolId> {
        let candidates: &[ProtocolId] = match self {
            ClaimId::B1 | ClaimId::B2 => &[ProtocolId::BflySncOdd, ProtocolId::BflySncGf4],
            ClaimId::B4 => &[ProtocolId::BflyPlncScf],
            ClaimId::T1 => &[ProtocolId::ThreeSrcCase1Odd, ProtocolId::ThreeSrcCase1Gf4],
            ClaimId::T2 => &[ProtocolId::ThreeSrcCase2],
            ClaimId::T4 => &[ProtocolId::ThreeSrcPlncScf],
            ClaimId::N1 => &[ProtocolId::BflyPlain],
        };
        candidates
            .iter()
            .copied()
            .find(|p| p.supports(field))
            .ok_or_else(|| Error::FieldParityMismatch {
                protocol: candidates.iter().map(|p| p.name()).collect::<Vec<_>>().join("/"),
                q: field.order(),
            })
    }

    /// Every protocol the claim applies to (for a full sweep).
    pub fn protocols(&self) -> Vec<ProtocolId> {
        match self {
            ClaimId::N1 => vec![ProtocolId::BflyPlain],
            c => ProtocolId::ALL.into_iter().filter(|p| p.claims().contains(c)).collect(),
        }
    }

    pub fn scenarios(&self) -> Vec<AdversaryScenario> {
        use ScenarioKind::{Edge, Node};
        use Target::Single;
        let s = |kind, target| AdversaryScenario { kind, target };
        match self {
            ClaimId::B1 => (1..=7).map(|e| s(Edge(EdgeId(e)), Joint)).collect(),
            ClaimId::B2 | ClaimId::B4 => vec![
                s(Node(NodeId("V3")), Single(1)),
                s(Node(NodeId("V3")), Single(2)),
                s(Node(NodeId("V4")), Single(1)),
                s(Node(NodeId("V4")), Single(2)),
                s(Node(NodeId("V5")), Single(1)),
                s(Node(NodeId("V6")), Single(2)),
            ],
            ClaimId::T1 => (7..=9)
                .flat_map(|e| (1..=3).map(move |m| s(Edge(EdgeId(e)), Single(m))))
                .collect(),
            ClaimId::T2 => ["I1", "I2", "I3"].iter().map(|n| s(Node(NodeId(n)), Joint)).collect(),
            ClaimId::T4 => ["I1", "I2", "I3"]
                .iter()
                .flat_map(|n| (1..=3).map(move |m| s(Node(NodeId(n)), Single(m))))
                .collect(),
            ClaimId::N1 => vec![s(Node(NodeId("V3")), Single(1)), s(Node(NodeId("V3")), Single(2))],
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClaimId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_suffix("-negative-control").unwrap_or(t);
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownClaim(s.to_string()))
    }
}

impl Serialize for ClaimId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Edge(EdgeId),
    Node(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// One message, 1-based.
    Single(usize),
    AllMessagesJointly,
}

use Target::AllMessagesJointly as Joint;

/// What the adversary taps and which message(s) it targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversaryScenario {
    pub kind: ScenarioKind,
    pub target: Target,
}

impl fmt::Display for AdversaryScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScenarioKind::Edge(e) => write!(f, "edge {e}")?,
            ScenarioKind::Node(n) => write!(f, "node {n}")?,
        }
        match self.target {
            Target::Single(i) => write!(f, " vs M{i}"),
            Target::AllMessagesJointly => f.write_str(" vs all messages"),
        }
    }
}

impl Serialize for AdversaryScenario {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl AdversaryScenario {
    fn validate(&self, protocol: ProtocolId, net: &NetworkSpec) -> Result<()> {
        let bad = |why: String| Err(Error::ScenarioMismatch(format!("{protocol}: {why}")));
        match self.kind {
            ScenarioKind::Edge(e) if net.edge(e).is_none() => return bad(format!("no edge {e}")),
            ScenarioKind::Node(n) => match net.node(n.0) {
                None => return bad(format!("no node {n}")),
                Some(node) if node.role == NodeRole::Source => return bad(format!("{n} is a source and has no view")),
                _ => {}
            },
            _ => {}
        }
        if let Target::Single(i) = self.target {
            if i == 0 || i > protocol.message_count() {
                return bad(format!("no message M{i}"));
            }
        }
        Ok(())
    }

    fn view(&self, t: &ProtocolTranscript) -> Vec<u32> {
        let symbols = match self.kind {
            ScenarioKind::Edge(e) => t.edge(e),
            ScenarioKind::Node(n) => t.view(n),
        };
        symbols
            .expect("validated scenario has a view")
            .iter()
            .map(|x| x.index())
            .collect()
    }
}

type Key = Vec<u32>;

/// Exact joint counts of (view, target) values with both margins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    cells: BTreeMap<(Key, Key), u64>,
    rows: BTreeMap<Key, u64>,
    cols: BTreeMap<Key, u64>,
    total: u64,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table from a dense matrix; row `i` is view `[i]`, column `j` target `[j]`.
    pub fn from_counts(counts: &[Vec<u64>]) -> Self {
        let mut t = Self::new();
        for (i, row) in counts.iter().enumerate() {
            t.rows.entry(vec![i as u32]).or_insert(0);
            for (j, &c) in row.iter().enumerate() {
                t.cols.entry(vec![j as u32]).or_insert(0);
                t.add(vec![i as u32], vec![j as u32], c);
            }
        }
        t
    }

    pub fn record(&mut self, view: Key, target: Key) {
        self.add(view, target, 1);
    }

    fn add(&mut self, view: Key, target: Key, n: u64) {
        *self.rows.entry(view.clone()).or_insert(0) += n;
        *self.cols.entry(target.clone()).or_insert(0) += n;
        if n > 0 {
            *self.cells.entry((view, target)).or_insert(0) += n;
        }
        self.total += n;
    }

    fn merge(mut self, other: Self) -> Self {
        for ((v, m), n) in other.cells {
            *self.cells.entry((v, m)).or_insert(0) += n;
        }
        for (v, n) in other.rows {
            *self.rows.entry(v).or_insert(0) += n;
        }
        for (m, n) in other.cols {
            *self.cols.entry(m).or_insert(0) += n;
        }
        self.total += other.total;
        self
    }

    pub fn count(&self, view: &[u32], target: &[u32]) -> u64 {
        self.cells.get(&(view.to_vec(), target.to_vec())).copied().unwrap_or(0)
    }

    pub fn row_total(&self, view: &[u32]) -> u64 {
        self.rows.get(view).copied().unwrap_or(0)
    }

    pub fn col_total(&self, target: &[u32]) -> u64 {
        self.cols.get(target).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn views(&self) -> impl Iterator<Item = &Key> {
        self.rows.keys()
    }

    pub fn targets(&self) -> impl Iterator<Item = &Key> {
        self.cols.keys()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Independent,
    Leaks,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Independent => "independent",
            Verdict::Leaks => "leaks",
        })
    }
}

/// A cell whose joint count falls below the product of its margins, plus a
/// second view whose conditional probability of the same target differs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub view: Key,
    pub target: Key,
    pub contrasting_view: Key,
    pub joint_count: u64,
    pub view_total: u64,
    pub target_total: u64,
    pub total: u64,
}

/// Exact independence test: `count(v,m)·N == rows(v)·cols(m)` for every cell.
pub fn check_independence(t: &CountTable) -> (Verdict, Option<Witness>) {
    let n = u128::from(t.total);
    for (v, &rv) in &t.rows {
        for (m, &cm) in &t.cols {
            let c = t.count(v, m);
            if u128::from(c) * n >= u128::from(rv) * u128::from(cm) {
                continue;
            }
            // some other row must put a different conditional mass on m
            let contrasting_view = t
                .rows
                .iter()
                .find(|(w, &rw)| rw > 0 && u128::from(t.count(w, m)) * u128::from(rv) != u128::from(c) * u128::from(rw))
                .map(|(w, _)| w.clone())
                .expect("dependent table has two distinct conditionals");
            return (
                Verdict::Leaks,
                Some(Witness {
                    view: v.clone(),
                    target: m.clone(),
                    contrasting_view,
                    joint_count: c,
                    view_total: rv,
                    target_total: cm,
                    total: t.total,
                }),
            );
        }
    }
    (Verdict::Independent, None)
}

fn target_key(target: Target, messages: &[crate::galois::FieldElement]) -> Key {
    match target {
        Target::Single(i) => vec![messages[i - 1].index()],
        Target::AllMessagesJointly => messages.iter().map(|x| x.index()).collect(),
    }
}

/// Joint (view, target) counts over every message and randomness assignment.
pub fn enumerate_joint(protocol: ProtocolId, field: FieldSpec, scenario: AdversaryScenario) -> Result<CountTable> {
    Ok(enumerate_joint_many(protocol, field, &[scenario])?.remove(0))
}

/// One exhaustive pass filling a table per scenario.
pub fn enumerate_joint_many(
    protocol: ProtocolId,
    field: FieldSpec,
    scenarios: &[AdversaryScenario],
) -> Result<Vec<CountTable>> {
    let net = NetworkSpec::build(protocol.network());
    for s in scenarios {
        s.validate(protocol, &net)?;
    }
    if !protocol.supports(field) {
        return Err(Error::FieldParityMismatch {
            protocol: protocol.name().to_string(),
            q: field.order(),
        });
    }
    let empty = || vec![CountTable::new(); scenarios.len()];
    (0..assignment_count(protocol, field))
        .into_par_iter()
        .try_fold(empty, |mut tables, n| {
            let assign = assignment_at(protocol, field, n);
            let t = run_protocol(protocol, field, &assign)?;
            for (table, s) in tables.iter_mut().zip(scenarios) {
                table.record(s.view(&t), target_key(s.target, &assign.messages));
            }
            Ok(tables)
        })
        .try_reduce(empty, |a, b| {
            Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect())
        })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub view: Vec<String>,
    pub contrasting_view: Vec<String>,
    pub target: Vec<String>,
    pub joint_count: u64,
    pub view_total: u64,
    pub target_total: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub scenario: AdversaryScenario,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecrecyReport {
    pub claim: ClaimId,
    pub protocol: ProtocolId,
    pub q: u32,
    pub expected: Verdict,
    pub outcomes: Vec<ScenarioOutcome>,
    /// Every scenario produced the expected verdict.
    pub holds: bool,
}

impl SecrecyReport {
    pub fn summary(&self) -> String {
        let verdict = if self.outcomes.iter().all(|o| o.verdict == Verdict::Independent) {
            Verdict::Independent
        } else {
            Verdict::Leaks
        };
        let note = match (self.holds, self.expected) {
            (true, Verdict::Leaks) => " (expected)",
            (true, Verdict::Independent) => "",
            (false, _) => " (UNEXPECTED)",
        };
        format!(
            "{} {} q={}: {}{} [{} scenarios]",
            self.claim,
            self.protocol,
            self.q,
            verdict,
            note,
            self.outcomes.len()
        )
    }
}

/// Runs every scenario of `claim` against its construction over `field`.
pub fn verify_claim(claim: ClaimId, field: FieldSpec) -> Result<SecrecyReport> {
    verify_claim_with(claim, claim.protocol_for(field)?, field)
}

/// Like [`verify_claim`] but against an explicit protocol.
pub fn verify_claim_with(claim: ClaimId, protocol: ProtocolId, field: FieldSpec) -> Result<SecrecyReport> {
    let scenarios = claim.scenarios();
    let tables = enumerate_joint_many(protocol, field, &scenarios)?;
    let render = |key: &Key| -> Vec<String> {
        key.iter()
            .map(|&i| field.element(i).expect("index within field").to_string())
            .collect()
    };
    let outcomes: Vec<ScenarioOutcome> = scenarios
        .iter()
        .zip(&tables)
        .map(|(s, t)| {
            let (verdict, witness) = check_independence(t);
            ScenarioOutcome {
                scenario: *s,
                verdict,
                witness: witness.map(|w| WitnessReport {
                    view: render(&w.view),
                    contrasting_view: render(&w.contrasting_view),
                    target: render(&w.target),
                    joint_count: w.joint_count,
                    view_total: w.view_total,
                    target_total: w.target_total,
                    total: w.total,
                }),
            }
        })
        .collect();
    let expected = claim.expected();
    let holds = outcomes.iter().all(|o| o.verdict == expected);
    Ok(SecrecyReport {
        claim,
        protocol,
        q: field.order(),
        expected,
        outcomes,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    fn node(n: &'static str, target: Target) -> AdversaryScenario {
        AdversaryScenario {
            kind: ScenarioKind::Node(NodeId(n)),
            target,
        }
    }

    fn edge(e: u8, target: Target) -> AdversaryScenario {
        AdversaryScenario {
            kind: ScenarioKind::Edge(EdgeId(e)),
            target,
        }
    }

    /// Independent route: every pair of rows has proportional counts.
    fn rows_proportional(t: &CountTable) -> bool {
        let views: Vec<_> = t.views().cloned().collect();
        let targets: Vec<_> = t.targets().cloned().collect();
        views.iter().all(|v| {
            views.iter().all(|w| {
                targets
                    .iter()
                    .all(|m| t.count(v, m) * t.row_total(w) == t.count(w, m) * t.row_total(v))
            })
        })
    }

    #[test]
    fn small_tables() {
        let uniform = CountTable::from_counts(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(check_independence(&uniform), (Verdict::Independent, None));

        let diag = CountTable::from_counts(&[vec![1, 0], vec![0, 1]]);
        let (v, w) = check_independence(&diag);
        assert_eq!(v, Verdict::Leaks);
        let w = w.unwrap();
        assert_eq!((w.view, w.target), (vec![0], vec![1]));
        assert_eq!(w.contrasting_view, vec![1]);

        let product = CountTable::from_counts(&[vec![2, 4], vec![1, 2]]);
        assert_eq!(check_independence(&product).0, Verdict::Independent);
    }

    #[test]
    fn edge_three_is_uniform() {
        let t = enumerate_joint(ProtocolId::BflySncOdd, f(5), edge(3, Joint)).unwrap();
        assert_eq!(t.total(), 125);
        assert_eq!(t.views().count(), 5);
        assert_eq!(t.targets().count(), 25);
        for v in t.views() {
            for m in t.targets() {
                assert_eq!(t.count(v, m), 1);
            }
        }
        assert_eq!(check_independence(&t).0, Verdict::Independent);
    }

    #[test]
    fn plain_relay_is_fully_dependent() {
        let t = enumerate_joint(ProtocolId::BflyPlain, f(5), node("V3", Target::Single(1))).unwrap();
        // view (M1, M2) fixes M1: each view row has a single nonzero cell
        for v in t.views() {
            assert_eq!(t.row_total(v), 1);
            assert_eq!(t.count(v, &v[..1]), 1);
        }
        assert_eq!(check_independence(&t).0, Verdict::Leaks);
    }

    #[test]
    fn scrambled_intermediate_node_is_independent() {
        let t = enumerate_joint(ProtocolId::ThreeSrcCase2, f(5), node("I1", Joint)).unwrap();
        assert_eq!(t.total(), 5u64.pow(6));
        assert_eq!(check_independence(&t).0, Verdict::Independent);
    }

    #[test]
    fn butterfly_relay_split() {
        let g = f(5);
        let p = ProtocolId::BflySncOdd;
        let v = |target| check_independence(&enumerate_joint(p, g, node("V3", target)).unwrap()).0;
        assert_eq!(v(Target::Single(1)), Verdict::Independent);
        assert_eq!(v(Target::Single(2)), Verdict::Independent);
        assert_eq!(v(Joint), Verdict::Leaks);
    }

    #[test]
    fn scenario_validation() {
        let g = f(5);
        assert!(matches!(
            enumerate_joint(ProtocolId::BflySncOdd, g, edge(9, Joint)),
            Err(Error::ScenarioMismatch(_))
        ));
        assert!(matches!(
            enumerate_joint(ProtocolId::BflySncOdd, g, node("V1", Joint)),
            Err(Error::ScenarioMismatch(_))
        ));
        assert!(matches!(
            enumerate_joint(ProtocolId::BflySncOdd, g, node("V3", Target::Single(3))),
            Err(Error::ScenarioMismatch(_))
        ));
        assert!(matches!(
            enumerate_joint(ProtocolId::ThreeSrcCase2, g, node("V3", Joint)),
            Err(Error::ScenarioMismatch(_))
        ));
    }

    #[test]
    fn claim_examples() {
        let g = f(5);
        let b1 = verify_claim(ClaimId::B1, g).unwrap();
        assert_eq!(b1.outcomes.len(), 7);
        assert!(b1.holds);
        let t2 = verify_claim(ClaimId::T2, g).unwrap();
        assert_eq!(t2.outcomes.len(), 3);
        assert!(t2.holds);
        let n1 = verify_claim(ClaimId::N1, g).unwrap();
        assert!(n1.holds);
        assert!(n1.outcomes.iter().all(|o| o.witness.is_some()));
        assert!(n1.summary().contains("leaks (expected)"));
    }

    #[test]
    fn claim_parity() {
        assert!(matches!(
            verify_claim(ClaimId::B1, f(2)),
            Err(Error::FieldParityMismatch { q: 2, .. })
        ));
        assert_eq!(
            verify_claim(ClaimId::B1, FieldSpec::gf4()).unwrap().protocol,
            ProtocolId::BflySncGf4
        );
        assert!(matches!(
            verify_claim_with(ClaimId::B1, ProtocolId::BflySncOdd, FieldSpec::gf4()),
            Err(Error::FieldParityMismatch { .. })
        ));
    }

    #[test]
    fn claim_names() {
        assert_eq!("n1-negative-control".parse::<ClaimId>().unwrap(), ClaimId::N1);
        assert_eq!("t4".parse::<ClaimId>().unwrap(), ClaimId::T4);
        assert!("B3".parse::<ClaimId>().is_err());
    }

    #[test]
    fn enumeration_is_exhaustive() {
        for p in ProtocolId::ALL {
            let g = if p.supports(f(3)) { f(3) } else { FieldSpec::gf4() };
            let t = enumerate_joint(p, g, edge(3, Joint)).unwrap();
            let width = (p.message_count() + p.randomness_count()) as u32;
            assert_eq!(t.total(), u64::from(g.order()).pow(width), "{p}");
        }
    }

    proptest! {
        #[test]
        fn product_tables_are_independent(
            a in proptest::collection::vec(0u64..6, 1..5),
            b in proptest::collection::vec(0u64..6, 1..5),
        ) {
            let rows: Vec<Vec<u64>> = a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect();
            let t = CountTable::from_counts(&rows);
            prop_assert_eq!(check_independence(&t).0, Verdict::Independent);
        }

        #[test]
        fn verdict_matches_proportional_rows(
            rows in proptest::collection::vec(proptest::collection::vec(0u64..4, 3), 1..4),
        ) {
            let t = CountTable::from_counts(&rows);
            let (verdict, witness) = check_independence(&t);
            let expected = if rows_proportional(&t) { Verdict::Independent } else { Verdict::Leaks };
            prop_assert_eq!(verdict, expected);
            prop_assert_eq!(witness.is_some(), verdict == Verdict::Leaks);
        }
    }
}
