//! Claim diagrams over finite label sets. Claims carry payloads of labeled
//! elements; edges carry total maps between payloads. After a validation
//! pass gates each claim behind its ancestors, the surviving subdiagram is
//! collapsed to its colimit: the partition of all validated elements by the
//! equivalence the edge maps generate, together with the per-claim cocone
//! into the classes.
//!
//! Classes are canonically ordered by their lexicographically smallest
//! `(claim id, label)` member, so results compare bytewise across runs and
//! insertion orders.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::{Error, Result};

/// Lifecycle of a claim. Transitions only move out of `Pending`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimStatus {
    Pending,
    Validated,
    Rejected,
}

/// A claim with a payload of uniquely labeled elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimNode {
    id: String,
    statement: String,
    payload: Vec<String>,
    status: ClaimStatus,
}

impl ClaimNode {
    /// Builds a pending claim. Payload labels must be distinct and nonempty
    /// strings; the id must be a nonempty token without whitespace or commas.
    pub fn new(
        id: impl Into<String>,
        statement: impl Into<String>,
        payload: Vec<String>,
    ) -> Result<Self> {
        let id = id.into();
        check_token(&id, "claim id")?;
        let mut seen = BTreeSet::new();
        for label in &payload {
            check_token(label, "payload label")?;
            if !seen.insert(label.clone()) {
                return Err(Error::dag(format!("duplicate payload label {label} in claim {id}")));
            }
        }
        Ok(ClaimNode { id, statement: statement.into(), payload, status: ClaimStatus::Pending })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn statement(&self) -> &str {
        &self.statement
    }

    pub fn payload(&self) -> &[String] {
        &self.payload
    }

    pub fn status(&self) -> ClaimStatus {
        self.status
    }
}

fn check_token(token: &str, what: &str) -> Result<()> {
    if token.is_empty() {
        return Err(Error::dag(format!("{what} must be nonempty")));
    }
    if token.contains(|c: char| c.is_whitespace() || c == ',' || c == '=') {
        return Err(Error::dag(format!(
            "{what} {token:?} may not contain whitespace, commas, or '='"
        )));
    }
    Ok(())
}

/// A directed edge between claims carrying a label map.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimEdge {
    source: String,
    target: String,
    mapping: BTreeMap<String, String>,
}

impl ClaimEdge {
    /// Builds an edge from explicit label pairs. Each source label may be
    /// listed once; totality and image containment are checked against the
    /// endpoint payloads when the edge joins a diagram.
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        pairs: Vec<(String, String)>,
    ) -> Result<Self> {
        let source = source.into();
        let target = target.into();
        check_token(&source, "edge source")?;
        check_token(&target, "edge target")?;
        let mut mapping = BTreeMap::new();
        for (from, to) in pairs {
            check_token(&from, "mapping source label")?;
            check_token(&to, "mapping target label")?;
            if mapping.insert(from.clone(), to).is_some() {
                return Err(Error::dag(format!(
                    "label {from} mapped twice on edge {source} -> {target}"
                )));
            }
        }
        Ok(ClaimEdge { source, target, mapping })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn mapping(&self) -> &BTreeMap<String, String> {
        &self.mapping
    }
}

/// An acyclic diagram of claims under construction, then validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClaimDag {
    nodes: Vec<ClaimNode>,
    edges: Vec<ClaimEdge>,
}

impl ClaimDag {
    pub fn new() -> Self {
        ClaimDag::default()
    }

    pub fn nodes(&self) -> &[ClaimNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[ClaimEdge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&ClaimNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Adds a claim under a fresh id.
    pub fn add_claim(&mut self, node: ClaimNode) -> Result<()> {
        if self.node_index(&node.id).is_some() {
            return Err(Error::dag(format!("duplicate claim id {}", node.id)));
        }
        self.nodes.push(node);
        Ok(())
    }

    /// Adds an edge between existing claims. The mapping must cover every
    /// source label, land inside the target payload, and the edge must keep
    /// the diagram acyclic.
    pub fn add_edge(&mut self, edge: ClaimEdge) -> Result<()> {
        let si = self
            .node_index(&edge.source)
            .ok_or_else(|| Error::dag(format!("unknown edge source {}", edge.source)))?;
        let ti = self
            .node_index(&edge.target)
            .ok_or_else(|| Error::dag(format!("unknown edge target {}", edge.target)))?;
        if si == ti {
            return Err(Error::dag(format!("self-loop on claim {}", edge.source)));
        }
        let source = &self.nodes[si];
        let target = &self.nodes[ti];
        for label in &source.payload {
            if !edge.mapping.contains_key(label) {
                return Err(Error::dag(format!(
                    "edge {} -> {} misses source label {label}",
                    edge.source, edge.target
                )));
            }
        }
        for (from, to) in &edge.mapping {
            if !source.payload.iter().any(|l| l == from) {
                return Err(Error::dag(format!(
                    "edge {} -> {} maps unknown source label {from}",
                    edge.source, edge.target
                )));
            }
            if !target.payload.iter().any(|l| l == to) {
                return Err(Error::dag(format!(
                    "edge {} -> {} maps {from} to unknown target label {to}",
                    edge.source, edge.target
                )));
            }
        }
        if self.reaches(ti, si) {
            return Err(Error::dag(format!(
                "edge {} -> {} would close a cycle",
                edge.source, edge.target
            )));
        }
        self.edges.push(edge);
        Ok(())
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(i) = stack.pop() {
            if i == to {
                return true;
            }
            if seen[i] {
                continue;
            }
            seen[i] = true;
            for e in &self.edges {
                if self.node_index(&e.source) == Some(i) {
                    stack.push(self.node_index(&e.target).unwrap());
                }
            }
        }
        false
    }

    fn parents(&self, i: usize) -> Vec<usize> {
        let id = &self.nodes[i].id;
        self.edges
            .iter()
            .filter(|e| &e.target == id)
            .map(|e| self.node_index(&e.source).unwrap())
            .collect()
    }

    /// Runs the checker over every pending claim and settles all statuses:
    /// a claim is validated exactly when the checker accepts it and every
    /// ancestor was validated; everything else is rejected. The validated
    /// set is therefore closed under predecessors.
    pub fn validate(&mut self, checker: impl Fn(&ClaimNode) -> bool) -> Result<()> {
        if let Some(n) = self.nodes.iter().find(|n| n.status != ClaimStatus::Pending) {
            return Err(Error::dag(format!("claim {} was already settled", n.id)));
        }
        let order = self.topo_order();
        let mut validated = vec![false; self.nodes.len()];
        for i in order {
            let ancestors_ok = self.parents(i).into_iter().all(|p| validated[p]);
            validated[i] = ancestors_ok && checker(&self.nodes[i]);
            self.nodes[i].status =
                if validated[i] { ClaimStatus::Validated } else { ClaimStatus::Rejected };
        }
        Ok(())
    }

    fn topo_order(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for e in &self.edges {
            indegree[self.node_index(&e.target).unwrap()] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop() {
            order.push(i);
            let id = self.nodes[i].id.clone();
            for e in &self.edges {
                if e.source == id {
                    let t = self.node_index(&e.target).unwrap();
                    indegree[t] -= 1;
                    if indegree[t] == 0 {
                        ready.push(t);
                    }
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        order
    }

    /// Collapses the validated subdiagram to its colimit. Requires a prior
    /// [`validate`](Self::validate) run and at least one validated claim.
    pub fn colimit(&self) -> Result<ColimitResult> {
        if self.nodes.iter().any(|n| n.status == ClaimStatus::Pending) {
            return Err(Error::dag("colimit requires a completed validation pass"));
        }
        let mut elements: Vec<(String, String)> = Vec::new();
        let mut element_index: BTreeMap<(String, String), usize> = BTreeMap::new();
        for node in &self.nodes {
            if node.status != ClaimStatus::Validated {
                continue;
            }
            for label in &node.payload {
                let key = (node.id.clone(), label.clone());
                element_index.insert(key.clone(), elements.len());
                elements.push(key);
            }
        }
        if self.nodes.iter().all(|n| n.status != ClaimStatus::Validated) {
            return Err(Error::dag("colimit over an empty validated subdiagram"));
        }

        let mut parent: Vec<usize> = (0..elements.len()).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &self.edges {
            let (Some(s), Some(t)) = (self.node(&e.source), self.node(&e.target)) else {
                continue;
            };
            if s.status != ClaimStatus::Validated || t.status != ClaimStatus::Validated {
                continue;
            }
            for (from, to) in &e.mapping {
                let a = element_index[&(e.source.clone(), from.clone())];
                let b = element_index[&(e.target.clone(), to.clone())];
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }

        let mut groups: BTreeMap<usize, Vec<(String, String)>> = BTreeMap::new();
        for i in 0..elements.len() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(elements[i].clone());
        }
        let mut classes: Vec<Vec<(String, String)>> = groups.into_values().collect();
        for class in &mut classes {
            class.sort();
        }
        classes.sort();
        let mut cocone: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for (k, class) in classes.iter().enumerate() {
            for (id, label) in class {
                cocone.entry(id.clone()).or_default().insert(label.clone(), k);
            }
        }
        Ok(ColimitResult { classes, cocone })
    }
}

/// The colimit of a validated claim diagram: the canonical partition of all
/// validated payload elements and the per-claim maps into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColimitResult {
    classes: Vec<Vec<(String, String)>>,
    cocone: BTreeMap<String, BTreeMap<String, usize>>,
}

impl ColimitResult {
    /// Classes in canonical order, each a sorted list of `(claim id, label)`
    /// members.
    pub fn classes(&self) -> &[Vec<(String, String)>] {
        &self.classes
    }

    /// Class index an element maps to under the cocone.
    pub fn class_of(&self, node_id: &str, label: &str) -> Option<usize> {
        self.cocone.get(node_id)?.get(label).copied()
    }
}

/// Parses the line-oriented diagram format: `node <id> <label,...>` and
/// `edge <src> <dst> <from=to,...>`, one directive per line. Blank lines and
/// `#` comments are skipped. Payloads and mappings may be omitted for empty
/// ones. All parsed claims are pending.
pub fn parse_dag(text: &str) -> Result<ClaimDag> {
    let mut dag = ClaimDag::new();
    let mut pending_edges: Vec<(usize, ClaimEdge)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let directive = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match directive {
            "node" => {
                if rest.is_empty() || rest.len() > 2 {
                    return Err(parse_err(line, "expected `node <id> <label,...>`"));
                }
                let labels = match rest.get(1) {
                    Some(s) => s.split(',').map(str::to_owned).collect(),
                    None => Vec::new(),
                };
                let node = ClaimNode::new(rest[0], "", labels)
                    .map_err(|e| parse_err(line, e.to_string()))?;
                dag.add_claim(node).map_err(|e| parse_err(line, e.to_string()))?;
            }
            "edge" => {
                if rest.len() < 2 || rest.len() > 3 {
                    return Err(parse_err(line, "expected `edge <src> <dst> <from=to,...>`"));
                }
                let mut pairs = Vec::new();
                if let Some(s) = rest.get(2) {
                    for item in s.split(',') {
                        let (from, to) = item.split_once('=').ok_or_else(|| {
                            parse_err(line, format!("mapping entry {item:?} is not `from=to`"))
                        })?;
                        pairs.push((from.to_owned(), to.to_owned()));
                    }
                }
                let edge = ClaimEdge::new(rest[0], rest[1], pairs)
                    .map_err(|e| parse_err(line, e.to_string()))?;
                pending_edges.push((line, edge));
            }
            other => {
                return Err(parse_err(line, format!("unknown directive {other:?}")));
            }
        }
    }
    for (line, edge) in pending_edges {
        dag.add_edge(edge).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(dag)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Serializes a diagram back to the line-oriented format. Statements and
/// statuses are not part of the interchange format.
pub fn format_dag(dag: &ClaimDag) -> String {
    let mut out = String::new();
    for node in dag.nodes() {
        if node.payload().is_empty() {
            let _ = writeln!(out, "node {}", node.id());
        } else {
            let _ = writeln!(out, "node {} {}", node.id(), node.payload().join(","));
        }
    }
    for edge in dag.edges() {
        let pairs: Vec<String> =
            edge.mapping().iter().map(|(f, t)| format!("{f}={t}")).collect();
        if pairs.is_empty() {
            let _ = writeln!(out, "edge {} {}", edge.source(), edge.target());
        } else {
            let _ = writeln!(out, "edge {} {} {}", edge.source(), edge.target(), pairs.join(","));
        }
    }
    out
}

/// Renders colimit classes one per line: `class <k>: <id>:<label> ...`.
pub fn format_classes(result: &ColimitResult) -> String {
    let mut out = String::new();
    for (k, class) in result.classes().iter().enumerate() {
        let members: Vec<String> =
            class.iter().map(|(id, label)| format!("{id}:{label}")).collect();
        let _ = writeln!(out, "class {k}: {}", members.join(" "));
    }
    out
}
