//! The butterfly and three-source networks, their channel models, and the
//! time-slot schedules of every transmission scheme.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::galois::FieldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u8);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl Serialize for EdgeId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for EdgeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .strip_prefix(['e', 'E'])
            .and_then(|n| n.parse().ok())
            .map(EdgeId)
            .ok_or_else(|| Error::ScenarioMismatch(format!("bad edge id '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub &'static str);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Source,
    Intermediate,
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub role: NodeRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkName {
    Butterfly,
    ThreeSource,
}

impl NetworkName {
    pub fn as_str(&self) -> &'static str {
        match self {
            NetworkName::Butterfly => "butterfly",
            NetworkName::ThreeSource => "three-source",
        }
    }
}

impl fmt::Display for NetworkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "butterfly" => Ok(NetworkName::Butterfly),
            "three-source" | "threesource" | "three_source" => Ok(NetworkName::ThreeSource),
            _ => Err(Error::UnknownNetwork(s.to_string())),
        }
    }
}

/// Nodes, directed edges, and the edge groups that share a multiple-access
/// channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub name: NetworkName,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub mac_groups: Vec<Vec<EdgeId>>,
}

impl NetworkSpec {
    pub fn build(name: NetworkName) -> Self {
        match name {
            NetworkName::Butterfly => butterfly(),
            NetworkName::ThreeSource => three_source(),
        }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id.0.eq_ignore_ascii_case(id))
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    /// Incoming edges of `node`, ordered by edge id.
    pub fn incoming(&self, node: NodeId) -> Vec<EdgeId> {
        let mut ids: Vec<_> = self.edges.iter().filter(|e| e.to == node).map(|e| e.id).collect();
        ids.sort();
        ids
    }

    pub fn nodes_with_role(&self, role: NodeRole) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(move |n| n.role == role).map(|n| n.id)
    }

    pub fn is_mac_group(&self, edges: &[EdgeId]) -> bool {
        let wanted: BTreeSet<_> = edges.iter().collect();
        self.mac_groups
            .iter()
            .any(|g| g.iter().collect::<BTreeSet<_>>() == wanted)
    }

    /// Kahn's algorithm; true when every node can be ordered.
    pub fn is_dag(&self) -> bool {
        let mut indegree: Vec<usize> = self
            .nodes
            .iter()
            .map(|n| self.edges.iter().filter(|e| e.to == n.id).count())
            .collect();
        let mut ready: Vec<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = ready.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.from == self.nodes[i].id) {
                let j = self
                    .nodes
                    .iter()
                    .position(|n| n.id == e.to)
                    .expect("edge to unknown node");
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
        seen == self.nodes.len()
    }

    /// Checks edge-id uniqueness, endpoints, acyclicity and that every MAC
    /// group feeds a single node.
    pub fn validate(&self) -> Result<()> {
        let ids: BTreeSet<_> = self.edges.iter().map(|e| e.id).collect();
        if ids.len() != self.edges.len() {
            return Err(Error::ScenarioMismatch("duplicate edge id".into()));
        }
        for e in &self.edges {
            if self.node(e.from.0).is_none() || self.node(e.to.0).is_none() {
                return Err(Error::ScenarioMismatch(format!("edge {} has unknown endpoint", e.id)));
            }
        }
        if !self.is_dag() {
            return Err(Error::ScenarioMismatch("network has a cycle".into()));
        }
        for g in &self.mac_groups {
            let dests: BTreeSet<_> = g
                .iter()
                .map(|id| self.edge(*id).map(|e| e.to))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::ScenarioMismatch("MAC group names unknown edge".into()))?;
            if dests.len() != 1 {
                return Err(Error::ScenarioMismatch("MAC group edges reach different nodes".into()));
            }
        }
        Ok(())
    }
}

fn edge(id: u8, from: &'static str, to: &'static str) -> Edge {
    Edge {
        id: EdgeId(id),
        from: NodeId(from),
        to: NodeId(to),
    }
}

fn node(id: &'static str, role: NodeRole) -> Node {
    Node { id: NodeId(id), role }
}

fn group(ids: &[u8]) -> Vec<EdgeId> {
    ids.iter().copied().map(EdgeId).collect()
}

fn butterfly() -> NetworkSpec {
    use NodeRole::*;
    NetworkSpec {
        name: NetworkName::Butterfly,
        nodes: vec![
            node("V1", Source),
            node("V2", Source),
            node("V3", Intermediate),
            node("V4", Intermediate),
            node("V5", Sink),
            node("V6", Sink),
        ],
        edges: vec![
            edge(1, "V1", "V3"),
            edge(2, "V2", "V3"),
            edge(3, "V3", "V4"),
            edge(4, "V1", "V5"),
            edge(5, "V4", "V5"),
            edge(6, "V4", "V6"),
            edge(7, "V2", "V6"),
        ],
        mac_groups: vec![group(&[1, 2]), group(&[4, 5]), group(&[6, 7])],
    }
}

// S_i reaches I_{i+1} over e_i and I_{i-1} over e_{3+i} (indices mod 3);
// I_j reaches T over e_{6+j}.
fn three_source() -> NetworkSpec {
    use NodeRole::*;
    NetworkSpec {
        name: NetworkName::ThreeSource,
        nodes: vec![
            node("S1", Source),
            node("S2", Source),
            node("S3", Source),
            node("I1", Intermediate),
            node("I2", Intermediate),
            node("I3", Intermediate),
            node("T", Sink),
        ],
        edges: vec![
            edge(1, "S1", "I2"),
            edge(2, "S2", "I3"),
            edge(3, "S3", "I1"),
            edge(4, "S1", "I3"),
            edge(5, "S2", "I1"),
            edge(6, "S3", "I2"),
            edge(7, "I1", "T"),
            edge(8, "I2", "T"),
            edge(9, "I3", "T"),
        ],
        mac_groups: vec![
            group(&[1, 6]),
            group(&[2, 4]),
            group(&[3, 5]),
            group(&[7, 8, 9]),
            group(&[8, 9]),
            group(&[7, 9]),
            group(&[7, 8]),
        ],
    }
}

/// Built-in network by name (`butterfly` or `three-source`).
pub fn builtin_network(name: &str) -> Result<NetworkSpec> {
    Ok(NetworkSpec::build(name.parse()?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    NoiselessSymbol(FieldSpec),
    AwgnSingle,
    AwgnMac2,
    AwgnMac3,
}

/// A channel with one real coefficient `h` shared by all of its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    kind: ChannelKind,
    h: f64,
}

impl ChannelModel {
    pub fn new(kind: ChannelKind, h: f64) -> Result<Self> {
        if !(h >= 0.0) {
            return Err(Error::NegativeCoefficient(h));
        }
        Ok(Self { kind, h })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn inputs(&self) -> usize {
        match self.kind {
            ChannelKind::NoiselessSymbol(_) | ChannelKind::AwgnSingle => 1,
            ChannelKind::AwgnMac2 => 2,
            ChannelKind::AwgnMac3 => 3,
        }
    }

    /// Gaussian channel carrying `inputs` simultaneous BPSK signals.
    pub fn awgn(inputs: usize, h: f64) -> Result<Self> {
        let kind = match inputs {
            1 => ChannelKind::AwgnSingle,
            2 => ChannelKind::AwgnMac2,
            3 => ChannelKind::AwgnMac3,
            n => return Err(Error::ScenarioMismatch(format!("no {n}-input Gaussian channel"))),
        };
        Self::new(kind, h)
    }
}

/// The eight transmission schemes compared over the two networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    BfSncNoMac,
    BfSncMac,
    BfPlncScf,
    BfPlncSimple,
    TsSncNoMac,
    TsSncMac,
    TsPlncScf,
    TsPlncCf,
}

impl SchemeId {
    pub const ALL: [SchemeId; 8] = [
        SchemeId::BfSncNoMac,
        SchemeId::BfSncMac,
        SchemeId::BfPlncScf,
        SchemeId::BfPlncSimple,
        SchemeId::TsSncNoMac,
        SchemeId::TsSncMac,
        SchemeId::TsPlncScf,
        SchemeId::TsPlncCf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::BfSncNoMac => "BF-SNC-NoMAC",
            SchemeId::BfSncMac => "BF-SNC-MAC",
            SchemeId::BfPlncScf => "BF-PLNC-SCF",
            SchemeId::BfPlncSimple => "BF-PLNC-Simple",
            SchemeId::TsSncNoMac => "3S-SNC-NoMAC",
            SchemeId::TsSncMac => "3S-SNC-MAC",
            SchemeId::TsPlncScf => "3S-PLNC-SCF",
            SchemeId::TsPlncCf => "3S-PLNC-CF",
        }
    }

    pub fn slug(&self) -> &'static str {
        match self {
            SchemeId::BfSncNoMac => "butterfly-snc-nomac",
            SchemeId::BfSncMac => "butterfly-snc-mac",
            SchemeId::BfPlncScf => "butterfly-plnc-scf",
            SchemeId::BfPlncSimple => "butterfly-plnc-simple",
            SchemeId::TsSncNoMac => "threesource-snc-nomac",
            SchemeId::TsSncMac => "threesource-snc-mac",
            SchemeId::TsPlncScf => "threesource-plnc-scf",
            SchemeId::TsPlncCf => "threesource-plnc-cf",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            SchemeId::BfSncNoMac => "secure network coding without multiple access channels",
            SchemeId::BfSncMac => "secure network coding with a multiple access channel",
            SchemeId::BfPlncScf => "secure physical layer network coding with secure computation-and-forward",
            SchemeId::BfPlncSimple => "secure network coding combined with computation-and-forward",
            SchemeId::TsSncNoMac => "secure network coding without multiple access channels",
            SchemeId::TsSncMac => "secure network coding with multiple access channels",
            SchemeId::TsPlncScf => "secure physical layer network coding with secure computation-and-forward",
            SchemeId::TsPlncCf => "secure physical layer network coding with computation-and-forward",
        }
    }

    pub fn network(&self) -> NetworkName {
        match self {
            SchemeId::BfSncNoMac | SchemeId::BfSncMac | SchemeId::BfPlncScf | SchemeId::BfPlncSimple => {
                NetworkName::Butterfly
            }
            _ => NetworkName::ThreeSource,
        }
    }

    pub fn for_network(network: NetworkName) -> Vec<SchemeId> {
        Self::ALL.into_iter().filter(|s| s.network() == network).collect()
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for SchemeId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(t) || id.slug().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// How a slot uses a channel, which fixes the per-message rate it achieves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelUse {
    /// Single-input channel.
    PointToPoint,
    /// Every input decoded separately; each gets 1/k of the joint rate.
    JointDecode,
    /// The receiver decodes only the modulo sum.
    ComputeForward,
    /// Modulo sum with the receiver's view independent of each input.
    SecureComputeForward,
}

/// One channel activation inside a slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activation {
    pub edges: Vec<EdgeId>,
    pub mode: ChannelUse,
    /// Symbols each edge carries in this activation.
    pub symbols: u32,
}

impl Activation {
    fn single(id: u8) -> Self {
        Self {
            edges: vec![EdgeId(id)],
            mode: ChannelUse::PointToPoint,
            symbols: 1,
        }
    }

    fn mac(ids: &[u8], mode: ChannelUse) -> Self {
        Self {
            edges: group(ids),
            mode,
            symbols: 1,
        }
    }

    fn times(mut self, symbols: u32) -> Self {
        self.symbols = symbols;
        self
    }

    pub fn is_mac(&self) -> bool {
        self.edges.len() > 1
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.edges.iter().map(ToString::to_string).collect();
        if self.is_mac() {
            write!(f, "({})", ids.join(", "))?;
        } else {
            f.write_str(&ids[0])?;
        }
        if self.symbols > 1 {
            write!(f, " x{}", self.symbols)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub scheme: SchemeId,
    pub slots: Vec<Vec<Activation>>,
}

impl Schedule {
    pub fn validate(&self, net: &NetworkSpec) -> Result<()> {
        for (i, slot) in self.slots.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for act in slot {
                for id in &act.edges {
                    if net.edge(*id).is_none() {
                        return Err(Error::ScenarioMismatch(format!(
                            "slot {} uses unknown edge {id}",
                            i + 1
                        )));
                    }
                    if !seen.insert(*id) {
                        return Err(Error::ScenarioMismatch(format!(
                            "edge {id} appears twice in slot {}",
                            i + 1
                        )));
                    }
                }
                if act.is_mac() != (act.mode != ChannelUse::PointToPoint)
                    || (act.is_mac() && !net.is_mac_group(&act.edges))
                {
                    return Err(Error::ScenarioMismatch(format!(
                        "slot {} activation {act} is not a channel",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn edges(&self) -> BTreeSet<EdgeId> {
        self.slots
            .iter()
            .flatten()
            .flat_map(|a| a.edges.iter().copied())
            .collect()
    }

    /// Two-row text table: slot headers, then the channels of each slot.
    pub fn to_table(&self) -> String {
        let mut header = vec!["Time slot".to_string()];
        let mut channels = vec!["Channel".to_string()];
        for (i, slot) in self.slots.iter().enumerate() {
            header.push(format!("Time {}", i + 1));
            channels.push(slot.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "));
        }
        let widths: Vec<usize> = header
            .iter()
            .zip(&channels)
            .map(|(a, b)| a.chars().count().max(b.chars().count()))
            .collect();
        let row = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            format!("| {} |", padded.join(" | "))
        };
        let rule = format!(
            "+{}+",
            widths.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("+")
        );
        format!("{rule}\n{}\n{rule}\n{}\n{rule}\n", row(&header), row(&channels))
    }
}

/// The slot structure of `scheme`.
pub fn builtin_schedule(scheme: SchemeId) -> Schedule {
    use Activation as A;
    use ChannelUse::*;
    let slots = match scheme {
        SchemeId::BfSncNoMac => vec![
            vec![A::single(1), A::single(4)],
            vec![A::single(2), A::single(7)],
            vec![A::single(3)],
            vec![A::single(5), A::single(6)],
        ],
        SchemeId::BfSncMac => vec![
            vec![A::mac(&[1, 2], JointDecode)],
            vec![A::single(3), A::single(4), A::single(7)],
            vec![A::single(5), A::single(6)],
        ],
        SchemeId::BfPlncScf | SchemeId::BfPlncSimple => {
            let mode = if scheme == SchemeId::BfPlncScf {
                SecureComputeForward
            } else {
                ComputeForward
            };
            vec![
                vec![A::mac(&[1, 2], mode)],
                vec![A::single(3)],
                vec![A::mac(&[4, 5], mode), A::mac(&[6, 7], mode)],
            ]
        }
        SchemeId::TsSncNoMac => vec![
            vec![A::single(1), A::single(2), A::single(3)],
            vec![A::single(4), A::single(5), A::single(6)],
            vec![A::single(7).times(2)],
            vec![A::single(8).times(2)],
            vec![A::single(9).times(2)],
        ],
        SchemeId::TsSncMac => vec![
            source_pairs(JointDecode),
            vec![A::mac(&[7, 8, 9], JointDecode).times(2)],
        ],
        SchemeId::TsPlncScf => vec![
            source_pairs(SecureComputeForward),
            vec![A::mac(&[7, 8, 9], JointDecode)],
        ],
        SchemeId::TsPlncCf => vec![
            source_pairs(JointDecode),
            vec![A::mac(&[8, 9], ComputeForward)],
            vec![A::mac(&[7, 9], ComputeForward)],
            vec![A::mac(&[7, 8], ComputeForward)],
        ],
    };
    Schedule { scheme, slots }
}

fn source_pairs(mode: ChannelUse) -> Vec<Activation> {
    vec![
        Activation::mac(&[1, 6], mode),
        Activation::mac(&[2, 4], mode),
        Activation::mac(&[3, 5], mode),
    ]
}

/// Parses a scheme name and returns its schedule.
pub fn builtin_schedule_by_name(name: &str) -> Result<Schedule> {
    Ok(builtin_schedule(name.parse()?))
}
