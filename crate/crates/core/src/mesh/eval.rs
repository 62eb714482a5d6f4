use std::collections::HashSet;

use super::{MeshThesaurus, QueryExpr, TermClause};
use crate::error::Result;
use crate::records::BibRecord;

#[derive(Debug, Clone)]
enum Node {
    Term {
        clause: TermClause,
        accepted: HashSet<String>,
    },
    Date(super::DateRange),
    And(Vec<Node>),
    Or(Vec<Node>),
}

/// A query with every term clause resolved to its accepted descriptor set.
#[derive(Debug, Clone)]
pub struct CompiledQuery {
    root: Node,
}

/// One line of an evaluation trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub depth: usize,
    pub label: String,
    pub value: bool,
}

impl CompiledQuery {
    pub fn compile(expr: &QueryExpr, thesaurus: &MeshThesaurus) -> Result<CompiledQuery> {
        Ok(CompiledQuery {
            root: compile_node(expr, thesaurus)?,
        })
    }

    pub fn matches(&self, record: &BibRecord) -> bool {
        eval_node(&self.root, record)
    }

    /// Per-node boolean trace, outermost node first.
    pub fn explain(&self, record: &BibRecord) -> Vec<TraceLine> {
        let mut out = Vec::new();
        trace_node(&self.root, record, 0, &mut out);
        out
    }
}

fn compile_node(expr: &QueryExpr, thesaurus: &MeshThesaurus) -> Result<Node> {
    Ok(match expr {
        QueryExpr::Term(clause) => {
            let accepted = if clause.explode {
                thesaurus.explode(&clause.descriptor)?.into_iter().collect()
            } else {
                if !thesaurus.contains(&clause.descriptor) {
                    return Err(crate::Error::UnknownDescriptor(clause.descriptor.clone()));
                }
                HashSet::from([clause.descriptor.clone()])
            };
            Node::Term {
                clause: clause.clone(),
                accepted,
            }
        }
        QueryExpr::Date(d) => Node::Date(*d),
        QueryExpr::And(xs) => Node::And(xs.iter().map(|x| compile_node(x, thesaurus)).collect::<Result<_>>()?),
        QueryExpr::Or(xs) => Node::Or(xs.iter().map(|x| compile_node(x, thesaurus)).collect::<Result<_>>()?),
    })
}

fn eval_node(node: &Node, record: &BibRecord) -> bool {
    match node {
        Node::Term { clause, accepted } => record
            .mesh_terms
            .iter()
            .any(|m| (!clause.major_only || m.major) && accepted.contains(&m.descriptor)),
        Node::Date(d) => d.contains_year(record.year),
        Node::And(xs) => xs.iter().all(|x| eval_node(x, record)),
        Node::Or(xs) => xs.iter().any(|x| eval_node(x, record)),
    }
}

fn trace_node(node: &Node, record: &BibRecord, depth: usize, out: &mut Vec<TraceLine>) -> bool {
    let slot = out.len();
    out.push(TraceLine {
        depth,
        label: String::new(),
        value: false,
    });
    let (label, value) = match node {
        Node::Term { clause, accepted } => {
            let expr = QueryExpr::Term(clause.clone());
            (
                format!("{expr} ({} descriptors)", accepted.len()),
                eval_node(node, record),
            )
        }
        Node::Date(d) => (QueryExpr::Date(*d).to_string(), eval_node(node, record)),
        Node::And(xs) | Node::Or(xs) => {
            let mut vals = Vec::with_capacity(xs.len());
            for x in xs {
                vals.push(trace_node(x, record, depth + 1, out));
            }
            if matches!(node, Node::And(_)) {
                ("AND".to_owned(), vals.iter().all(|&v| v))
            } else {
                ("OR".to_owned(), vals.iter().any(|&v| v))
            }
        }
    };
    out[slot].label = label;
    out[slot].value = value;
    value
}

/// Evaluates one record; compiles the query on every call.
pub fn eval_query(record: &BibRecord, expr: &QueryExpr, thesaurus: &MeshThesaurus) -> Result<bool> {
    Ok(CompiledQuery::compile(expr, thesaurus)?.matches(record))
}

/// Order-preserving filter of `corpus` by `expr`.
pub fn run_query(corpus: &[BibRecord], expr: &QueryExpr, thesaurus: &MeshThesaurus) -> Result<Vec<BibRecord>> {
    let q = CompiledQuery::compile(expr, thesaurus)?;
    Ok(corpus.iter().filter(|r| q.matches(r)).cloned().collect())
}
