use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{vocab, KnowledgeBase, Term};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphOptions {
    /// Draw reified statements with their subject, predicate and object edges.
    pub include_provenance: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeKind {
    Instance,
    Type,
    Statement,
    Property,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    Assertion,
    Typing,
    Role,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub label: String,
    pub kind: EdgeKind,
}

/// The drawable view of a knowledge base, keyed by IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    pub nodes: BTreeMap<String, (NodeKind, String)>,
    pub edges: Vec<Edge>,
}

impl Graph {
    pub fn from_kb(kb: &KnowledgeBase, options: GraphOptions) -> Self {
        let mut graph = Graph::default();
        let label = |iri: &super::Iri| iri.local_name().to_string();

        for t in kb.triples() {
            let Term::Iri(object) = &t.object else {
                continue;
            };
            if t.is_domain_assertion() {
                graph.node(t.subject.as_str(), NodeKind::Instance, label(&t.subject));
                graph.node(object.as_str(), NodeKind::Instance, label(object));
                graph.edges.push(Edge {
                    from: t.subject.to_string(),
                    to: object.to_string(),
                    label: label(&t.predicate),
                    kind: EdgeKind::Assertion,
                });
            } else if t.predicate.as_str() == vocab::RDF_TYPE
                && !vocab::is_vocabulary(object.as_str())
            {
                graph.node(t.subject.as_str(), NodeKind::Instance, label(&t.subject));
                graph.node(object.as_str(), NodeKind::Type, label(object));
                graph.edges.push(Edge {
                    from: t.subject.to_string(),
                    to: object.to_string(),
                    label: "type".into(),
                    kind: EdgeKind::Typing,
                });
            }
        }

        if options.include_provenance {
            for node in kb.instances_of(vocab::STATEMENT) {
                graph.node(node.as_str(), NodeKind::Statement, label(node));
            }
            for t in kb.triples() {
                let role = match t.predicate.as_str() {
                    vocab::HAS_SUBJECT => "subject",
                    vocab::HAS_PREDICATE => "predicate",
                    vocab::HAS_OBJECT => "object",
                    _ => continue,
                };
                let Term::Iri(target) = &t.object else {
                    continue;
                };
                let kind = if role == "predicate" {
                    NodeKind::Property
                } else {
                    NodeKind::Instance
                };
                graph.node(t.subject.as_str(), NodeKind::Statement, label(&t.subject));
                graph.node(target.as_str(), kind, label(target));
                graph.edges.push(Edge {
                    from: t.subject.to_string(),
                    to: target.to_string(),
                    label: role.into(),
                    kind: EdgeKind::Role,
                });
            }
        }
        graph.edges.sort();
        graph
    }

    /// First registration wins, except that instances override any other kind.
    fn node(&mut self, iri: &str, kind: NodeKind, label: String) {
        self.nodes
            .entry(iri.to_string())
            .and_modify(|existing| {
                if kind == NodeKind::Instance {
                    existing.0 = kind;
                }
            })
            .or_insert((kind, label));
    }

    pub fn count_nodes(&self, kind: NodeKind) -> usize {
        self.nodes.values().filter(|(k, _)| *k == kind).count()
    }

    pub fn count_edges(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph kb {\n  rankdir=LR;\n");
        for (iri, (kind, label)) in &self.nodes {
            let shape = match kind {
                NodeKind::Instance => "ellipse",
                NodeKind::Type => "box",
                NodeKind::Statement => "note",
                NodeKind::Property => "diamond",
            };
            let _ = writeln!(out, "  {} [label={}, shape={shape}];", quote(iri), quote(label));
        }
        for e in &self.edges {
            let style = match e.kind {
                EdgeKind::Assertion => "solid",
                EdgeKind::Typing => "dashed",
                EdgeKind::Role => "dotted",
            };
            let _ = writeln!(
                out,
                "  {} -> {} [label={}, style={style}];",
                quote(&e.from),
                quote(&e.to),
                quote(&e.label)
            );
        }
        out.push_str("}\n");
        out
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT text for `kb`: instances and their assertions, dashed typing edges,
/// and optionally the reified statements.
pub fn export_graph(kb: &KnowledgeBase, options: GraphOptions) -> Vec<u8> {
    Graph::from_kb(kb, options).to_dot().into_bytes()
}
