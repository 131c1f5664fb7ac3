//! Lattice description: nodes with Bell-experiment roles, couplings, fields.
//!
//! Spin configurations are encoded as an N-bit word. Bit `k` holds node `k`
//! in declaration order, and a set bit means spin +1.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard upper bound imposed by the `u32` configuration encoding.
pub const MAX_ENCODABLE_NODES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Iteration order used everywhere: +1 first.
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Spin> {
        match sign {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            other => Err(Error::InvalidArgument(format!("spin must be +1 or -1, got {other}"))),
        }
    }

    pub fn from_bit(bit: bool) -> Spin {
        if bit {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    pub fn bit(self) -> bool {
        self == Spin::Up
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Spin::Up => '+',
            Spin::Down => '-',
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Outcome1,
    Outcome2,
    AnalyzerA,
    AnalyzerB,
    Hidden,
}

impl NodeRole {
    pub const OBSERVED: [NodeRole; 4] =
        [NodeRole::Outcome1, NodeRole::Outcome2, NodeRole::AnalyzerA, NodeRole::AnalyzerB];

    pub fn is_analyzer(self) -> bool {
        matches!(self, NodeRole::AnalyzerA | NodeRole::AnalyzerB)
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeRole::Outcome1 => "outcome1",
            NodeRole::Outcome2 => "outcome2",
            NodeRole::AnalyzerA => "analyzer_a",
            NodeRole::AnalyzerB => "analyzer_b",
            NodeRole::Hidden => "hidden",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub role: NodeRole,
    #[serde(default)]
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub j: f64,
}

impl Edge {
    pub fn touches(&self, id: &str) -> bool {
        self.a == id || self.b == id
    }

    pub fn joins(&self, x: &str, y: &str) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

/// Three-spin term `c * s_i * s_j * s_k` added to the energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubicTerm {
    pub nodes: [String; 3],
    pub c: f64,
}

/// A finite spin lattice with energy
/// `H = c0 - sum_edges J s_a s_b - sum_nodes h s + sum_cubic c s_i s_j s_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub beta: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub c0: f64,
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cubic: Vec<CubicTerm>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl LatticeSpec {
    pub fn new(beta: f64) -> Self {
        LatticeSpec { beta, c0: 0.0, nodes: Vec::new(), edges: Vec::new(), cubic: Vec::new() }
    }

    pub fn node(mut self, id: &str, role: NodeRole, h: f64) -> Self {
        self.nodes.push(Node { id: id.to_string(), role, h });
        self
    }

    pub fn edge(mut self, a: &str, b: &str, j: f64) -> Self {
        self.edges.push(Edge { a: a.to_string(), b: b.to_string(), j });
        self
    }

    pub fn cubic_term(mut self, nodes: [&str; 3], c: f64) -> Self {
        self.cubic.push(CubicTerm { nodes: nodes.map(str::to_string), c });
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: LatticeSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("lattice spec serializes")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn require_index(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::InvalidArgument(format!("unknown node id {id:?}")))
    }

    pub fn role_node(&self, role: NodeRole) -> Option<&Node> {
        self.nodes.iter().find(|n| n.role == role)
    }

    pub fn hidden_ids(&self) -> Vec<&str> {
        self.nodes.iter().filter(|n| n.role == NodeRole::Hidden).map(|n| n.id.as_str()).collect()
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut Node> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    pub fn edge_mut(&mut self, a: &str, b: &str) -> Option<&mut Edge> {
        self.edges.iter_mut().find(|e| e.joins(a, b))
    }

    /// Structural checks: ids, edges, parameters, at most one node per observed role.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidLattice(msg));
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive and finite, got {}", self.beta));
        }
        if !self.c0.is_finite() {
            return bad("c0 must be finite".into());
        }
        if self.nodes.is_empty() {
            return bad("lattice has no nodes".into());
        }
        if self.nodes.len() > MAX_ENCODABLE_NODES {
            return bad(format!(
                "{} nodes exceeds the {MAX_ENCODABLE_NODES}-bit configuration encoding",
                self.nodes.len()
            ));
        }
        let mut ids = HashSet::new();
        let mut roles = HashSet::new();
        for node in &self.nodes {
            if node.id.is_empty() {
                return bad("empty node id".into());
            }
            if !ids.insert(node.id.as_str()) {
                return bad(format!("duplicate node id {:?}", node.id));
            }
            if node.role != NodeRole::Hidden && !roles.insert(node.role) {
                return bad(format!("more than one {} node", node.role));
            }
            if !node.h.is_finite() {
                return bad(format!("field on node {:?} is not finite", node.id));
            }
        }
        let mut pairs = HashSet::new();
        for edge in &self.edges {
            for end in [&edge.a, &edge.b] {
                if !ids.contains(end.as_str()) {
                    return bad(format!("edge references unknown node {end:?}"));
                }
            }
            if edge.a == edge.b {
                return bad(format!("self-loop on node {:?}", edge.a));
            }
            let key = if edge.a < edge.b { (&edge.a, &edge.b) } else { (&edge.b, &edge.a) };
            if !pairs.insert(key) {
                return bad(format!("duplicate edge {}-{}", edge.a, edge.b));
            }
            if !edge.j.is_finite() {
                return bad(format!("coupling {}-{} is not finite", edge.a, edge.b));
            }
        }
        for term in &self.cubic {
            for id in &term.nodes {
                if !ids.contains(id.as_str()) {
                    return bad(format!("cubic term references unknown node {id:?}"));
                }
            }
            let [x, y, z] = &term.nodes;
            if x == y || y == z || x == z {
                return bad("cubic term needs three distinct nodes".into());
            }
            if !term.c.is_finite() {
                return bad("cubic coefficient is not finite".into());
            }
        }
        Ok(())
    }

    /// Validates and additionally requires one node for each observed role.
    pub fn validate_bell(&self) -> Result<()> {
        self.validate()?;
        for role in NodeRole::OBSERVED {
            if self.role_node(role).is_none() {
                return Err(Error::MissingRole(role));
            }
        }
        Ok(())
    }

    /// Energy of a full configuration.
    pub fn energy(&self, config: &SpinConfiguration) -> Result<f64> {
        if config.len() != self.nodes.len() {
            return Err(Error::InvalidConfiguration(format!(
                "configuration covers {} nodes, lattice has {}",
                config.len(),
                self.nodes.len()
            )));
        }
        self.validate()?;
        Ok(crate::model::Hamiltonian::compile(self).energy(config.bits()))
    }

    /// Graph neighbours of every node (by index), ignoring zero couplings.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut out = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if e.j == 0.0 {
                continue;
            }
            let (a, b) = (index[e.a.as_str()], index[e.b.as_str()]);
            out[a].push(b);
            out[b].push(a);
        }
        for term in &self.cubic {
            if term.c == 0.0 {
                continue;
            }
            let idx = term.nodes.each_ref().map(|id| index[id.as_str()]);
            for &p in &idx {
                for &q in &idx {
                    if p != q {
                        out[p].push(q);
                    }
                }
            }
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        out
    }
}

/// A complete assignment of spins, encoded as a bit word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    bits: u32,
    len: usize,
}

impl SpinConfiguration {
    pub fn from_bits(bits: u32, len: usize) -> Self {
        assert!(len <= MAX_ENCODABLE_NODES);
        let mask = if len == 32 { u32::MAX } else { (1u32 << len) - 1 };
        SpinConfiguration { bits: bits & mask, len }
    }

    pub fn from_spins(spins: &[Spin]) -> Self {
        let bits = spins.iter().enumerate().fold(0u32, |acc, (i, s)| acc | ((s.bit() as u32) << i));
        SpinConfiguration::from_bits(bits, spins.len())
    }

    pub fn uniform(spin: Spin, len: usize) -> Self {
        Self::from_spins(&vec![spin; len])
    }

    /// Builds a configuration from `(id, spin)` pairs; every node must appear exactly once.
    pub fn from_assignment(spec: &LatticeSpec, assignment: &[(&str, Spin)]) -> Result<Self> {
        let mut spins: Vec<Option<Spin>> = vec![None; spec.len()];
        for &(id, spin) in assignment {
            let i = spec.index_of(id).ok_or_else(|| Error::InvalidConfiguration(format!("unknown node {id:?}")))?;
            if spins[i].replace(spin).is_some() {
                return Err(Error::InvalidConfiguration(format!("node {id:?} assigned twice")));
            }
        }
        let spins = spins
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| Error::InvalidConfiguration(format!("node {:?} not assigned", spec.nodes[i].id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_spins(&spins))
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spin(&self, i: usize) -> Spin {
        Spin::from_bit(self.bits >> i & 1 == 1)
    }

    /// The configuration with every spin reversed.
    pub fn flipped(&self) -> Self {
        SpinConfiguration::from_bits(!self.bits, self.len)
    }

    pub fn contains(&self, eta: &PartialAssignment) -> bool {
        self.bits & eta.mask() == eta.bits()
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.spin(i))?;
        }
        Ok(())
    }
}

/// Spins fixed on a subset of nodes (by index), kept sorted by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PartialAssignment {
    entries: Vec<(usize, Spin)>,
}

impl PartialAssignment {
    pub fn new(mut entries: Vec<(usize, Spin)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("node assigned twice in partial assignment".into()));
        }
        if entries.iter().any(|&(i, _)| i >= MAX_ENCODABLE_NODES) {
            return Err(Error::InvalidArgument("node index out of range".into()));
        }
        Ok(PartialAssignment { entries })
    }

    pub fn from_ids(spec: &LatticeSpec, assignment: &[(&str, Spin)]) -> Result<Self> {
        let entries =
            assignment.iter().map(|&(id, s)| spec.require_index(id).map(|i| (i, s))).collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Parses `id=spin` pairs separated by commas, e.g. `1=+,a=-`.
    /// Spins are written `+`, `-`, `1` or `-1`; an empty string is the empty assignment.
    pub fn parse(spec: &LatticeSpec, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (id, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected id=spin, got {item:?}")))?;
            let spin = match value.trim() {
                "+" | "1" | "+1" => Spin::Up,
                "-" | "-1" => Spin::Down,
                other => return Err(Error::InvalidArgument(format!("bad spin value {other:?}"))),
            };
            pairs.push((id.trim(), spin));
        }
        Self::from_ids(spec, &pairs)
    }

    pub fn entries(&self) -> &[(usize, Spin)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mask(&self) -> u32 {
        self.entries.iter().fold(0, |m, &(i, _)| m | 1 << i)
    }

    pub fn bits(&self) -> u32 {
        self.entries.iter().fold(0, |m, &(i, s)| m | (s.bit() as u32) << i)
    }

    pub fn is_disjoint(&self, other: &PartialAssignment) -> bool {
        self.mask() & other.mask() == 0
    }

    pub fn union(&self, other: &PartialAssignment) -> Result<PartialAssignment> {
        if !self.is_disjoint(other) {
            return Err(Error::InvalidArgument("assignments overlap".into()));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(entries)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    /// Human-readable form such as `1=+ a=-` using the lattice node ids.
    pub fn describe(&self, spec: &LatticeSpec) -> String {
        self.entries
            .iter()
            .map(|&(i, s)| {
                let id = spec.nodes.get(i).map(|n| n.id.as_str()).unwrap_or("?");
                format!("{id}={s}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}
