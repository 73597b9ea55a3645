//! Hierarchical graphs built from decoded records, with node-link JSON export.
//!
//! Each graph describes one source passage. A single document node owns the
//! material entries; entity values hang off the entries, and identical
//! values within one passage share a node.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{DopingRecord, FieldLabel, MaterialRecord, MofRecord, Records};

pub const DOPED_WITH: &str = "doped_with";
pub const HAS_MATERIAL: &str = "has_material";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Document,
    Material,
    EntityField,
    Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

const DOCUMENT_ID: &str = "document";

struct Builder {
    graph: KnowledgeGraph,
    values: HashMap<(FieldLabel, String), String>,
    per_field: BTreeMap<FieldLabel, usize>,
    edges: BTreeSet<(String, String, String)>,
}

impl Builder {
    fn new(doc_id: &str) -> Self {
        let doc = Node { id: DOCUMENT_ID.into(), kind: NodeKind::Document, label: doc_id.into(), field: None };
        Builder {
            graph: KnowledgeGraph { nodes: vec![doc], edges: Vec::new() },
            values: HashMap::new(),
            per_field: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    fn field_node(&mut self, field: FieldLabel, text: &str, kind: NodeKind) -> String {
        if let Some(id) = self.values.get(&(field, text.to_owned())) {
            return id.clone();
        }
        let n = self.per_field.entry(field).or_default();
        let id = format!("{field}:{n}");
        *n += 1;
        self.graph.nodes.push(Node { id: id.clone(), kind, label: text.into(), field: Some(field) });
        self.values.insert((field, text.to_owned()), id.clone());
        id
    }

    fn material(&mut self, index: usize, label: &str, field: FieldLabel) -> String {
        let id = format!("material:{index}");
        self.graph.nodes.push(Node {
            id: id.clone(),
            kind: NodeKind::Material,
            label: label.into(),
            field: Some(field),
        });
        self.edge(DOCUMENT_ID, &id, HAS_MATERIAL);
        id
    }

    fn edge(&mut self, source: &str, target: &str, relation: &str) {
        if self.edges.insert((source.into(), target.into(), relation.into())) {
            self.graph.edges.push(Edge { source: source.into(), target: target.into(), relation: relation.into() });
        }
    }

    fn entry<'a>(
        &mut self,
        index: usize,
        root: FieldLabel,
        values: impl Fn(FieldLabel) -> Vec<&'a str>,
        fields: &[FieldLabel],
    ) {
        let label = values(root).first().copied().unwrap_or_default();
        let material = self.material(index, label, root);
        for &field in fields.iter().filter(|f| **f != root) {
            for v in values(field) {
                let id = self.field_node(field, v, NodeKind::Value);
                self.edge(&material, &id, field.as_str());
            }
        }
    }
}

/// Host and dopant value nodes joined by `doped_with` edges, with results and
/// modifiers attached to the document node.
pub fn graph_from_doping(r: &DopingRecord, doc_id: &str) -> KnowledgeGraph {
    let mut b = Builder::new(doc_id);
    let hosts: Vec<String> = r.hosts.iter().map(|h| b.field_node(FieldLabel::Host, h, NodeKind::Value)).collect();
    let dopants: Vec<String> = r.dopants.iter().map(|d| b.field_node(FieldLabel::Dopant, d, NodeKind::Value)).collect();
    for &(h, d) in &r.links {
        b.edge(&hosts[h], &dopants[d], DOPED_WITH);
    }
    for (texts, field) in [(&r.results, FieldLabel::Result), (&r.modifiers, FieldLabel::Modifier)] {
        for t in texts {
            let id = b.field_node(field, t, NodeKind::EntityField);
            b.edge(DOCUMENT_ID, &id, field.as_str());
        }
    }
    b.graph
}

/// One material node per entry, labeled by its root value, with each other
/// field value as a child.
pub fn graph_from_records(records: &Records, doc_id: &str) -> KnowledgeGraph {
    match records {
        Records::Doping(r) => graph_from_doping(r, doc_id),
        Records::Materials(rs) => {
            let mut b = Builder::new(doc_id);
            for (i, r) in rs.iter().enumerate() {
                b.entry(i, r.root_field(), |f| r.values(f), &MaterialRecord::FIELDS);
            }
            b.graph
        }
        Records::Mofs(rs) => {
            let mut b = Builder::new(doc_id);
            for (i, r) in rs.iter().enumerate() {
                b.entry(i, r.root_field(), |f| r.values(f), &MofRecord::FIELDS);
            }
            b.graph
        }
    }
}

impl KnowledgeGraph {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edges_labeled<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.relation == relation)
    }

    /// Checks the structural invariants: unique ids, existing endpoints, one
    /// document node, every material reachable from it, and no cycles.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("graph: {msg}")));
        let mut index = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id.as_str(), i).is_some() {
                return bad(format!("duplicate node id {:?}", n.id));
            }
        }
        let docs: Vec<usize> =
            self.nodes.iter().enumerate().filter(|(_, n)| n.kind == NodeKind::Document).map(|(i, _)| i).collect();
        if docs.len() != 1 {
            return bad(format!("expected one document node, found {}", docs.len()));
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        let mut indegree = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            let (Some(&s), Some(&t)) = (index.get(e.source.as_str()), index.get(e.target.as_str())) else {
                return bad(format!("edge {} -> {} has a missing endpoint", e.source, e.target));
            };
            out[s].push(t);
            indegree[t] += 1;
        }

        let mut reached = vec![false; self.nodes.len()];
        let mut stack = vec![docs[0]];
        while let Some(i) = stack.pop() {
            if !std::mem::replace(&mut reached[i], true) {
                stack.extend(&out[i]);
            }
        }
        if let Some(n) = self.nodes.iter().zip(&reached).find(|(n, r)| n.kind == NodeKind::Material && !**r) {
            return bad(format!("material {:?} is not reachable from the document", n.0.id));
        }

        let mut queue: Vec<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop() {
            seen += 1;
            for &t in &out[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    queue.push(t);
                }
            }
        }
        if seen != self.nodes.len() {
            return bad("contains a cycle".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: KnowledgeGraph = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }
}

/// Writes `g` as node-link JSON.
pub fn export_graph(g: &KnowledgeGraph, path: &Path) -> Result<()> {
    fs::write(path, g.to_json())?;
    Ok(())
}

pub fn import_graph(path: &Path) -> Result<KnowledgeGraph> {
    KnowledgeGraph::from_json(&fs::read_to_string(path)?)
}
