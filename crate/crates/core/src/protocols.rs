//! Exact execution of the coding protocols over a finite field.
//!
//! Every protocol is run symbol by symbol: each edge carries a field element
//! (or a pair, for edges used twice), each non-source node records what it
//! observes, and every sink decodes its messages. Physical-layer primitives
//! are modelled as ideal functionalities: a node that receives through secure
//! computation-and-forward observes the modulo sum and nothing else.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::galois::{find_secure_element, FieldElement, FieldSpec, Matrix3};
use crate::netmodel::{EdgeId, NetworkName, NetworkSpec, NodeId, NodeRole};
use crate::secrecy::ClaimId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    BflyPlain,
    BflySncOdd,
    BflySncGf4,
    BflyPlncScf,
    BflyPlncSimple,
    ThreeSrcCase1Odd,
    ThreeSrcCase1Gf4,
    ThreeSrcCase2,
    ThreeSrcPlncScf,
    ThreeSrcPlncCf,
}

/// Fields a protocol can run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRequirement {
    Any,
    OddCharacteristic,
    Gf4,
    OddOrGf4,
}

impl FieldRequirement {
    pub fn accepts(&self, field: FieldSpec) -> bool {
        match self {
            FieldRequirement::Any => true,
            FieldRequirement::OddCharacteristic => field.is_odd_characteristic(),
            FieldRequirement::Gf4 => field.is_gf4(),
            FieldRequirement::OddOrGf4 => field.is_odd_characteristic() || field.is_gf4(),
        }
    }
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 10] = [
        ProtocolId::BflyPlain,
        ProtocolId::BflySncOdd,
        ProtocolId::BflySncGf4,
        ProtocolId::BflyPlncScf,
        ProtocolId::BflyPlncSimple,
        ProtocolId::ThreeSrcCase1Odd,
        ProtocolId::ThreeSrcCase1Gf4,
        ProtocolId::ThreeSrcCase2,
        ProtocolId::ThreeSrcPlncScf,
        ProtocolId::ThreeSrcPlncCf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolId::BflyPlain => "bfly-plain",
            ProtocolId::BflySncOdd => "bfly-snc-odd",
            ProtocolId::BflySncGf4 => "bfly-snc-gf4",
            ProtocolId::BflyPlncScf => "bfly-plnc-scf",
            ProtocolId::BflyPlncSimple => "bfly-plnc-simple",
            ProtocolId::ThreeSrcCase1Odd => "3src-case1-odd",
            ProtocolId::ThreeSrcCase1Gf4 => "3src-case1-gf4",
            ProtocolId::ThreeSrcCase2 => "3src-case2",
            ProtocolId::ThreeSrcPlncScf => "3src-plnc-scf",
            ProtocolId::ThreeSrcPlncCf => "3src-plnc-cf",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ProtocolId::BflyPlain => "butterfly coding forwarding the modulo sum over e3 (no secrecy)",
            ProtocolId::BflySncOdd => "butterfly secure network code with shared key L, odd characteristic",
            ProtocolId::BflySncGf4 => "butterfly secure network code with shared key L over GF(4)",
            ProtocolId::BflyPlncScf => "butterfly with secure computation-and-forward on (e1,e2), (e4,e5), (e6,e7)",
            ProtocolId::BflyPlncSimple => "GF(4) butterfly secure code carried over computation-and-forward",
            ProtocolId::ThreeSrcCase1Odd => "three-source code secure against one terminal edge, odd characteristic",
            ProtocolId::ThreeSrcCase1Gf4 => "three-source code secure against one terminal edge over GF(4)",
            ProtocolId::ThreeSrcCase2 => {
                "three-source code with scramble variables, secure against one intermediate node"
            }
            ProtocolId::ThreeSrcPlncScf => {
                "three-source code using secure computation-and-forward into the intermediate nodes"
            }
            ProtocolId::ThreeSrcPlncCf => "scramble-variable code with computation-and-forward at the terminal",
        }
    }

    pub fn network(&self) -> NetworkName {
        match self {
            ProtocolId::BflyPlain
            | ProtocolId::BflySncOdd
            | ProtocolId::BflySncGf4
            | ProtocolId::BflyPlncScf
            | ProtocolId::BflyPlncSimple => NetworkName::Butterfly,
            _ => NetworkName::ThreeSource,
        }
    }

    pub fn message_count(&self) -> usize {
        match self.network() {
            NetworkName::Butterfly => 2,
            NetworkName::ThreeSource => 3,
        }
    }

    /// Number of uniform randomness symbols (L, or L1..L3).
    pub fn randomness_count(&self) -> usize {
        match self {
            ProtocolId::BflySncOdd | ProtocolId::BflySncGf4 | ProtocolId::BflyPlncSimple => 1,
            ProtocolId::ThreeSrcCase2 | ProtocolId::ThreeSrcPlncCf => 3,
            _ => 0,
        }
    }

    pub fn field_requirement(&self) -> FieldRequirement {
        match self {
            ProtocolId::BflySncOdd | ProtocolId::ThreeSrcCase1Odd => FieldRequirement::OddCharacteristic,
            ProtocolId::BflySncGf4 | ProtocolId::BflyPlncSimple | ProtocolId::ThreeSrcCase1Gf4 => FieldRequirement::Gf4,
            ProtocolId::ThreeSrcPlncScf => FieldRequirement::OddOrGf4,
            ProtocolId::BflyPlain
            | ProtocolId::BflyPlncScf
            | ProtocolId::ThreeSrcCase2
            | ProtocolId::ThreeSrcPlncCf => FieldRequirement::Any,
        }
    }

    pub fn supports(&self, field: FieldSpec) -> bool {
        self.field_requirement().accepts(field)
    }

    /// Security claims the construction is stated to satisfy.
    pub fn claims(&self) -> &'static [ClaimId] {
        use ClaimId::*;
        match self {
            ProtocolId::BflyPlain => &[],
            ProtocolId::BflySncOdd | ProtocolId::BflySncGf4 | ProtocolId::BflyPlncSimple => &[B1, B2],
            ProtocolId::BflyPlncScf => &[B4],
            ProtocolId::ThreeSrcCase1Odd | ProtocolId::ThreeSrcCase1Gf4 => &[T1],
            ProtocolId::ThreeSrcCase2 | ProtocolId::ThreeSrcPlncCf => &[T2],
            ProtocolId::ThreeSrcPlncScf => &[T4],
        }
    }

    fn check_field(&self, field: FieldSpec) -> Result<()> {
        if self.supports(field) {
            Ok(())
        } else {
            Err(Error::FieldParityMismatch {
                protocol: self.name().to_string(),
                q: field.order(),
            })
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

impl Serialize for ProtocolId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolInfo {
    pub id: ProtocolId,
    pub description: &'static str,
    pub claims: &'static [ClaimId],
}

pub fn list_protocols() -> Vec<ProtocolInfo> {
    ProtocolId::ALL
        .into_iter()
        .map(|id| ProtocolInfo {
            id,
            description: id.description(),
            claims: id.claims(),
        })
        .collect()
}

/// Messages M1..Mk and the randomness (L, or L1..L3) for one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageAssignment {
    pub messages: Vec<FieldElement>,
    pub randomness: Vec<FieldElement>,
}

impl MessageAssignment {
    pub fn new(messages: Vec<FieldElement>, randomness: Vec<FieldElement>) -> Self {
        Self { messages, randomness }
    }
}

/// All q^(k+r) assignments for `protocol` over `field`, in mixed-radix order
/// (M1 varies slowest, the last randomness symbol fastest).
pub fn all_assignments(protocol: ProtocolId, field: FieldSpec) -> impl Iterator<Item = MessageAssignment> {
    (0..assignment_count(protocol, field)).map(move |n| assignment_at(protocol, field, n))
}

/// q^(k+r): the number of distinct assignments.
pub fn assignment_count(protocol: ProtocolId, field: FieldSpec) -> u64 {
    let width = protocol.message_count() + protocol.randomness_count();
    u64::from(field.order()).pow(width as u32)
}

/// The `n`-th assignment in enumeration order.
pub fn assignment_at(protocol: ProtocolId, field: FieldSpec, mut n: u64) -> MessageAssignment {
    let k = protocol.message_count();
    let width = k + protocol.randomness_count();
    let q = u64::from(field.order());
    let mut digits = vec![field.zero(); width];
    for slot in digits.iter_mut().rev() {
        *slot = field.element((n % q) as u32).expect("digit below field order");
        n /= q;
    }
    let randomness = digits.split_off(k);
    MessageAssignment::new(digits, randomness)
}

/// A message a sink recovered, by 1-based message index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decoded {
    pub message: usize,
    pub value: FieldElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProtocolTranscript {
    pub protocol: ProtocolId,
    #[serde(serialize_with = "serialize_field")]
    pub field: FieldSpec,
    pub edge_symbols: BTreeMap<EdgeId, Vec<FieldElement>>,
    pub node_views: BTreeMap<NodeId, Vec<FieldElement>>,
    pub decoded: BTreeMap<NodeId, Vec<Decoded>>,
    /// M4 = M1 + M2 held by V4 in the butterfly secure computation-and-forward run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relay_value: Option<FieldElement>,
}

fn serialize_field<S: Serializer>(field: &FieldSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u32(field.order())
}

impl ProtocolTranscript {
    pub fn edge(&self, id: EdgeId) -> Option<&[FieldElement]> {
        self.edge_symbols.get(&id).map(Vec::as_slice)
    }

    pub fn view(&self, node: NodeId) -> Option<&[FieldElement]> {
        self.node_views.get(&node).map(Vec::as_slice)
    }

    /// True when every decoded value equals the message that was sent.
    pub fn decodes_correctly(&self, assign: &MessageAssignment) -> bool {
        let all: Vec<&Decoded> = self.decoded.values().flatten().collect();
        !all.is_empty() && all.iter().all(|d| assign.messages.get(d.message - 1) == Some(&d.value))
    }
}

/// The ideal secure computation-and-forward functionality: the receiver gets
/// `a + b` and observes nothing else.
pub fn ideal_secure_caf(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    a.checked_add(b)
}

struct Run {
    net: NetworkSpec,
    t: ProtocolTranscript,
}

impl Run {
    fn new(protocol: ProtocolId, field: FieldSpec) -> Self {
        Self {
            net: NetworkSpec::build(protocol.network()),
            t: ProtocolTranscript {
                protocol,
                field,
                edge_symbols: BTreeMap::new(),
                node_views: BTreeMap::new(),
                decoded: BTreeMap::new(),
                relay_value: None,
            },
        }
    }

    fn send(&mut self, edge: u8, symbols: &[FieldElement]) {
        self.t.edge_symbols.insert(EdgeId(edge), symbols.to_vec());
    }

    fn observe(&mut self, node: &'static str, view: &[FieldElement]) {
        self.t.node_views.insert(NodeId(node), view.to_vec());
    }

    fn decode(&mut self, node: &'static str, values: &[(usize, FieldElement)]) {
        self.t.decoded.insert(
            NodeId(node),
            values
                .iter()
                .map(|&(message, value)| Decoded { message, value })
                .collect(),
        );
    }

    /// Views of nodes not already set: the concatenated incoming edge symbols.
    fn finish(mut self) -> ProtocolTranscript {
        let receivers: Vec<NodeId> = self
            .net
            .nodes
            .iter()
            .filter(|n| n.role != NodeRole::Source)
            .map(|n| n.id)
            .collect();
        for node in receivers {
            if self.t.node_views.contains_key(&node) {
                continue;
            }
            let view: Vec<FieldElement> = self
                .net
                .incoming(node)
                .iter()
                .flat_map(|e| self.t.edge_symbols[e].iter().copied())
                .collect();
            self.t.node_views.insert(node, view);
        }
        self.t
    }
}

/// Runs `protocol` over `field` on one assignment.
pub fn run_protocol(protocol: ProtocolId, field: FieldSpec, assign: &MessageAssignment) -> Result<ProtocolTranscript> {
    protocol.check_field(field)?;
    let k = protocol.message_count();
    if assign.messages.len() != k {
        return Err(Error::MessageCount {
            protocol: protocol.name().to_string(),
            expected: k,
            got: assign.messages.len(),
        });
    }
    let r = protocol.randomness_count();
    if assign.randomness.len() < r {
        return Err(Error::MissingRandomness {
            protocol: protocol.name().to_string(),
            needed: r,
            got: assign.randomness.len(),
        });
    }
    if assign
        .messages
        .iter()
        .chain(&assign.randomness)
        .any(|x| x.field() != field)
    {
        return Err(Error::FieldMismatch);
    }
    let m = &assign.messages;
    let l = &assign.randomness[..r];
    let mut run = Run::new(protocol, field);
    match protocol {
        ProtocolId::BflyPlain => butterfly_plain(&mut run, m),
        ProtocolId::BflySncOdd => butterfly_secure_odd(&mut run, m, l[0]),
        ProtocolId::BflySncGf4 | ProtocolId::BflyPlncSimple => butterfly_secure_gf4(&mut run, m, l[0])?,
        ProtocolId::BflyPlncScf => butterfly_secure_caf(&mut run, m)?,
        ProtocolId::ThreeSrcCase1Odd | ProtocolId::ThreeSrcCase1Gf4 => three_source_edge_secure(&mut run, m)?,
        ProtocolId::ThreeSrcCase2 => three_source_scrambled(&mut run, m, l, false)?,
        ProtocolId::ThreeSrcPlncCf => three_source_scrambled(&mut run, m, l, true)?,
        ProtocolId::ThreeSrcPlncScf => three_source_secure_caf(&mut run, m)?,
    }
    Ok(run.finish())
}

fn butterfly_plain(run: &mut Run, m: &[FieldElement]) {
    let (m1, m2) = (m[0], m[1]);
    let z3 = m1 + m2;
    run.send(1, &[m1]);
    run.send(2, &[m2]);
    run.send(3, &[z3]);
    run.send(4, &[m1]);
    run.send(5, &[z3]);
    run.send(6, &[z3]);
    run.send(7, &[m2]);
    run.decode("V5", &[(2, z3 - m1)]);
    run.decode("V6", &[(1, z3 - m2)]);
}

fn butterfly_secure_odd(run: &mut Run, m: &[FieldElement], l: FieldElement) {
    let f = run.t.field;
    let two = f.from_int(2);
    let (m1, m2) = (m[0], m[1]);
    let z1 = two * m1 + l;
    let z2 = two * m2 + l;
    let z4 = -(m1 + l);
    let z7 = -(m2 + l);
    let z3 = z1 + z2;
    let z5 = z3 / two;
    let z6 = z5;
    for (e, z) in [(1, z1), (2, z2), (3, z3), (4, z4), (5, z5), (6, z6), (7, z7)] {
        run.send(e, &[z]);
    }
    run.decode("V5", &[(2, z5 + z4)]);
    run.decode("V6", &[(1, z6 + z7)]);
}

fn butterfly_secure_gf4(run: &mut Run, m: &[FieldElement], l: FieldElement) -> Result<()> {
    let f = run.t.field;
    let e = find_secure_element(f)?;
    let scale = f.one() + e;
    let (m1, m2) = (m[0], m[1]);
    let z1 = scale * m1 + l;
    let z2 = scale * m2 + e * l;
    let z4 = -(m1 + l);
    let z7 = -(m2 + l);
    let z3 = z1 + z2;
    let z5 = z3.checked_div(scale)?;
    let z6 = z5;
    for (e, z) in [(1, z1), (2, z2), (3, z3), (4, z4), (5, z5), (6, z6), (7, z7)] {
        run.send(e, &[z]);
    }
    run.decode("V5", &[(2, z5 + z4)]);
    run.decode("V6", &[(1, z6 + z7)]);
    Ok(())
}

fn butterfly_secure_caf(run: &mut Run, m: &[FieldElement]) -> Result<()> {
    let (m1, m2) = (m[0], m[1]);
    run.send(1, &[m1]);
    run.send(2, &[m2]);
    let m4 = ideal_secure_caf(m1, m2)?;
    run.observe("V3", &[m4]);
    run.send(3, &[m4]);
    run.t.relay_value = Some(m4);
    run.send(4, &[-m1]);
    run.send(5, &[m4]);
    run.send(6, &[m4]);
    run.send(7, &[-m2]);
    let at_v5 = ideal_secure_caf(-m1, m4)?;
    let at_v6 = ideal_secure_caf(m4, -m2)?;
    run.observe("V5", &[at_v5]);
    run.observe("V6", &[at_v6]);
    run.decode("V5", &[(2, at_v5)]);
    run.decode("V6", &[(1, at_v6)]);
    Ok(())
}

/// Coefficient matrix mapping (M1, M2, M3) to what I1, I2, I3 forward.
fn edge_secure_matrix(field: FieldSpec) -> Result<Matrix3> {
    if field.is_odd_characteristic() {
        Ok(Matrix3::from_ints(field, [[0, 1, 1], [1, 0, 1], [1, 1, 0]]))
    } else {
        let e = find_secure_element(field)?;
        let (o, i) = (field.zero(), field.one());
        Matrix3::new([[o, i, i], [i, o, e], [e, e, o]])
    }
}

fn three_source_edge_secure(run: &mut Run, m: &[FieldElement]) -> Result<()> {
    let f = run.t.field;
    let a = edge_secure_matrix(f)?;
    let (m1, m2, m3) = (m[0], m[1], m[2]);
    for (e, x) in [(1, m1), (2, m2), (3, m3), (4, m1), (5, m2), (6, m3)] {
        run.send(e, &[x]);
    }
    // I1 holds (M3, M2), I2 holds (M1, M3), I3 holds (M2, M1)
    let z = a.mul_vec([m1, m2, m3])?;
    run.send(7, &[z[0]]);
    run.send(8, &[z[1]]);
    run.send(9, &[z[2]]);
    let rec = a.inverse()?.mul_vec(z)?;
    run.decode("T", &[(1, rec[0]), (2, rec[1]), (3, rec[2])]);
    Ok(())
}

fn three_source_scrambled(run: &mut Run, m: &[FieldElement], l: &[FieldElement], caf_at_terminal: bool) -> Result<()> {
    let masked: Vec<FieldElement> = m.iter().zip(l).map(|(&mi, &li)| mi - li).collect();
    // S_i: L_i over e_i to I_{i+1}, M_i - L_i over e_{3+i} to I_{i-1}
    for i in 0..3 {
        run.send(i as u8 + 1, &[l[i]]);
        run.send(i as u8 + 4, &[masked[i]]);
    }
    // I1 <- (e3: L3, e5: M2-L2), I2 <- (e1: L1, e6: M3-L3), I3 <- (e2: L2, e4: M1-L1)
    let held = [[l[2], masked[1]], [l[0], masked[2]], [l[1], masked[0]]];
    for (j, pair) in held.iter().enumerate() {
        run.send(j as u8 + 7, pair);
    }
    // M1 from (e8, e9), M2 from (e7, e9), M3 from (e7, e8)
    let recovered = [
        held[1][0].checked_add(held[2][1])?,
        held[2][0].checked_add(held[0][1])?,
        held[0][0].checked_add(held[1][1])?,
    ];
    if caf_at_terminal {
        // the terminal only ever sees the three computed sums
        run.observe("T", &recovered);
    }
    run.decode("T", &[(1, recovered[0]), (2, recovered[1]), (3, recovered[2])]);
    Ok(())
}

fn three_source_secure_caf(run: &mut Run, m: &[FieldElement]) -> Result<()> {
    let f = run.t.field;
    let a = edge_secure_matrix(f)?;
    let (m1, m2, m3) = (m[0], m[1], m[2]);
    // Sources pre-scale so each pair sum matches one row of `a`.
    let row = |r: usize, c: usize| a.get(r, c);
    let on_e3 = row(0, 2) * m3;
    let on_e5 = row(0, 1) * m2;
    let on_e1 = row(1, 0) * m1;
    let on_e6 = row(1, 2) * m3;
    let on_e4 = row(2, 0) * m1;
    let on_e2 = row(2, 1) * m2;
    for (e, x) in [(1, on_e1), (2, on_e2), (3, on_e3), (4, on_e4), (5, on_e5), (6, on_e6)] {
        run.send(e, &[x]);
    }
    let at_i1 = ideal_secure_caf(on_e3, on_e5)?;
    let at_i2 = ideal_secure_caf(on_e1, on_e6)?;
    let at_i3 = ideal_secure_caf(on_e4, on_e2)?;
    run.observe("I1", &[at_i1]);
    run.observe("I2", &[at_i2]);
    run.observe("I3", &[at_i3]);
    run.send(7, &[at_i1]);
    run.send(8, &[at_i2]);
    run.send(9, &[at_i3]);
    let rec = a.inverse()?.mul_vec([at_i1, at_i2, at_i3])?;
    run.decode("T", &[(1, rec[0]), (2, rec[1]), (3, rec[2])]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    fn ints(field: FieldSpec, xs: &[i64]) -> Vec<FieldElement> {
        xs.iter().map(|&x| field.from_int(x)).collect()
    }

    fn gf4(xs: &[&str]) -> Vec<FieldElement> {
        xs.iter().map(|s| FieldSpec::gf4().parse_element(s).unwrap()).collect()
    }

    fn sym(t: &ProtocolTranscript, e: u8) -> FieldElement {
        t.edge(EdgeId(e)).unwrap()[0]
    }

    #[test]
    fn butterfly_odd_example() {
        let g = f(5);
        let a = MessageAssignment::new(ints(g, &[1, 2]), ints(g, &[3]));
        let t = run_protocol(ProtocolId::BflySncOdd, g, &a).unwrap();
        let z: Vec<u32> = (1..=7).map(|e| sym(&t, e).index()).collect();
        assert_eq!(z, vec![0, 2, 2, 1, 1, 1, 0]);
        assert_eq!(
            t.decoded[&NodeId("V5")],
            vec![Decoded {
                message: 2,
                value: g.from_int(2)
            }]
        );
        assert_eq!(
            t.decoded[&NodeId("V6")],
            vec![Decoded {
                message: 1,
                value: g.from_int(1)
            }]
        );
        assert_eq!(t.view(NodeId("V3")).unwrap(), &ints(g, &[0, 2])[..]);
    }

    #[test]
    fn butterfly_gf4_example() {
        let a = MessageAssignment::new(gf4(&["1", "e"]), gf4(&["e"]));
        let t = run_protocol(ProtocolId::BflySncGf4, FieldSpec::gf4(), &a).unwrap();
        let z = gf4(&["1", "e", "1+e", "1"]);
        assert_eq!(
            [sym(&t, 1), sym(&t, 2), sym(&t, 3), sym(&t, 5)],
            [z[0], z[1], z[2], z[3]]
        );
        assert_eq!(t.decoded[&NodeId("V5")][0].value, gf4(&["e"])[0]);
        assert_eq!(t.decoded[&NodeId("V6")][0].value, gf4(&["1"])[0]);
    }

    #[test]
    fn three_source_case1_example() {
        let g = f(5);
        let a = MessageAssignment::new(ints(g, &[1, 2, 3]), vec![]);
        let t = run_protocol(ProtocolId::ThreeSrcCase1Odd, g, &a).unwrap();
        assert_eq!([sym(&t, 7), sym(&t, 8), sym(&t, 9)].map(|x| x.index()), [0, 4, 3]);
        let got: Vec<u32> = t.decoded[&NodeId("T")].iter().map(|d| d.value.index()).collect();
        assert_eq!(got, vec![1, 2, 3]);
    }

    #[test]
    fn three_source_gf4_terminal_symbols() {
        let a = MessageAssignment::new(gf4(&["1", "e", "1+e"]), vec![]);
        let t = run_protocol(ProtocolId::ThreeSrcCase1Gf4, FieldSpec::gf4(), &a).unwrap();
        let [m1, m2, m3] = [a.messages[0], a.messages[1], a.messages[2]];
        let e = FieldSpec::gf4().gf4_generator().unwrap();
        assert_eq!(sym(&t, 7), m2 + m3);
        assert_eq!(sym(&t, 8), m1 + e * m3);
        assert_eq!(sym(&t, 9), e * m1 + e * m2);
        assert!(t.decodes_correctly(&a));
    }

    #[test]
    fn secure_caf_views_are_single_sums() {
        let g = f(7);
        let a = MessageAssignment::new(ints(g, &[3, 5]), vec![]);
        let t = run_protocol(ProtocolId::BflyPlncScf, g, &a).unwrap();
        assert_eq!(t.view(NodeId("V3")).unwrap(), &[g.from_int(8)]);
        assert_eq!(t.relay_value, Some(g.from_int(8)));
        assert_eq!(t.view(NodeId("V5")).unwrap(), &[g.from_int(5)]);
        assert_eq!(t.view(NodeId("V6")).unwrap(), &[g.from_int(3)]);

        let gf = FieldSpec::gf4();
        let e = gf.gf4_generator().unwrap();
        let a = MessageAssignment::new(gf4(&["1", "1+e", "e"]), vec![]);
        let t = run_protocol(ProtocolId::ThreeSrcPlncScf, gf, &a).unwrap();
        assert_eq!(t.view(NodeId("I2")).unwrap(), &[a.messages[0] + e * a.messages[2]]);
        assert!(t.decodes_correctly(&a));
    }

    #[test]
    fn scrambled_views_hold_key_and_masked_message() {
        let g = f(5);
        let a = MessageAssignment::new(ints(g, &[1, 2, 3]), ints(g, &[4, 0, 2]));
        let t = run_protocol(ProtocolId::ThreeSrcCase2, g, &a).unwrap();
        // I1 sees L3 and M2 - L2
        assert_eq!(t.view(NodeId("I1")).unwrap(), &ints(g, &[2, 2])[..]);
        assert_eq!(t.edge(EdgeId(7)).unwrap(), &ints(g, &[2, 2])[..]);
        assert!(t.decodes_correctly(&a));
        let cf = run_protocol(ProtocolId::ThreeSrcPlncCf, g, &a).unwrap();
        assert_eq!(cf.view(NodeId("T")).unwrap(), &ints(g, &[1, 2, 3])[..]);
    }

    #[test]
    fn ideal_caf() {
        let g = f(5);
        assert_eq!(ideal_secure_caf(g.from_int(1), g.from_int(2)).unwrap(), g.from_int(3));
        let e = FieldSpec::gf4().gf4_generator().unwrap();
        assert!(ideal_secure_caf(e, e).unwrap().is_zero());
        assert_eq!(ideal_secure_caf(g.one(), f(7).one()), Err(Error::FieldMismatch));
    }

    #[test]
    fn field_parity_is_enforced() {
        let g4 = FieldSpec::gf4();
        let a = MessageAssignment::new(gf4(&["1", "e"]), gf4(&["1"]));
        assert!(matches!(
            run_protocol(ProtocolId::BflySncOdd, g4, &a),
            Err(Error::FieldParityMismatch { q: 4, .. })
        ));
        let g5 = f(5);
        let a5 = MessageAssignment::new(ints(g5, &[1, 2]), ints(g5, &[1]));
        assert!(matches!(
            run_protocol(ProtocolId::BflySncGf4, g5, &a5),
            Err(Error::FieldParityMismatch { q: 5, .. })
        ));
        let g2 = f(2);
        let a2 = MessageAssignment::new(ints(g2, &[1, 0, 1]), vec![]);
        assert!(run_protocol(ProtocolId::ThreeSrcPlncScf, g2, &a2).is_err());
    }

    #[test]
    fn assignment_validation() {
        let g = f(5);
        let no_key = MessageAssignment::new(ints(g, &[1, 2]), vec![]);
        assert!(matches!(
            run_protocol(ProtocolId::BflySncOdd, g, &no_key),
            Err(Error::MissingRandomness { needed: 1, got: 0, .. })
        ));
        let short = MessageAssignment::new(ints(g, &[1, 2]), vec![]);
        assert!(matches!(
            run_protocol(ProtocolId::ThreeSrcCase1Odd, g, &short),
            Err(Error::MessageCount { expected: 3, .. })
        ));
        let mixed = MessageAssignment::new(vec![g.one(), f(7).one()], vec![]);
        assert_eq!(
            run_protocol(ProtocolId::BflyPlain, g, &mixed),
            Err(Error::FieldMismatch)
        );
    }

    #[test]
    fn listing() {
        let all = list_protocols();
        assert_eq!(all.len(), 10);
        let claims = |id: ProtocolId| all.iter().find(|p| p.id == id).unwrap().claims;
        assert_eq!(claims(ProtocolId::BflySncOdd), &[ClaimId::B1, ClaimId::B2]);
        assert!(claims(ProtocolId::BflyPlain).is_empty());
        assert_eq!(claims(ProtocolId::ThreeSrcPlncScf), &[ClaimId::T4]);
        for p in ProtocolId::ALL {
            assert_eq!(p.name().parse::<ProtocolId>().unwrap(), p);
        }
    }

    #[test]
    fn assignment_enumeration_order() {
        let g = f(3);
        let all: Vec<_> = all_assignments(ProtocolId::BflySncOdd, g).collect();
        assert_eq!(all.len(), 27);
        assert_eq!(all[1].randomness, ints(g, &[1]));
        assert_eq!(all[3].messages, ints(g, &[0, 1]));
    }

    fn fields() -> Vec<FieldSpec> {
        vec![f(3), FieldSpec::gf4(), f(5), f(7)]
    }

    // Each edge symbol is a fixed linear form in (messages, randomness).
    proptest! {
        #[test]
        fn transcripts_are_linear(
            pi in 0usize..10,
            fi in 0usize..4,
            xs in proptest::collection::vec(0u32..7, 6),
            ys in proptest::collection::vec(0u32..7, 6),
            c in 0u32..7,
        ) {
            let protocol = ProtocolId::ALL[pi];
            let field = fields()[fi];
            prop_assume!(protocol.supports(field));
            let q = field.order();
            let k = protocol.message_count();
            let r = protocol.randomness_count();
            let mk = |v: &[u32]| {
                let els: Vec<_> = v.iter().map(|&x| field.element(x % q).unwrap()).collect();
                MessageAssignment::new(els[..k].to_vec(), els[k..k + r].to_vec())
            };
            let a = mk(&xs);
            let b = mk(&ys);
            let c = field.element(c % q).unwrap();
            let combine = |u: &MessageAssignment, v: &MessageAssignment, s: FieldElement| MessageAssignment::new(
                u.messages.iter().zip(&v.messages).map(|(&x, &y)| s * x + y).collect(),
                u.randomness.iter().zip(&v.randomness).map(|(&x, &y)| s * x + y).collect(),
            );
            let ta = run_protocol(protocol, field, &a).unwrap();
            let tb = run_protocol(protocol, field, &b).unwrap();
            let tc = run_protocol(protocol, field, &combine(&a, &b, c)).unwrap();
            for (id, sc) in &tc.edge_symbols {
                let expected: Vec<_> = ta.edge_symbols[id].iter().zip(&tb.edge_symbols[id]).map(|(&x, &y)| c * x + y).collect();
                prop_assert_eq!(sc, &expected);
            }
            prop_assert!(ta.decodes_correctly(&a));
        }
    }
}
