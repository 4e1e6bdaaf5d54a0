//! Graphviz export of facet-adjacency graphs.

use std::fmt::Write;

use crate::complex::{facet_adjacency, AgentId, SimplicialModel};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Undirected graph with one node per facet and an edge per pair of facets
/// sharing a vertex, labeled by the agents of the shared vertices.
pub fn facet_graph_dot(m: &SimplicialModel, subset: Option<&[AgentId]>) -> String {
    let agents = m.agents();
    let graph = facet_adjacency(m.complex(), subset);
    let names = m.facet_names();
    let mut out = String::from("graph facets {\n  node [shape=box];\n");
    for (i, name) in names.iter().enumerate() {
        writeln!(out, "  f{i} [label={}];", quote(name)).unwrap();
    }
    for e in &graph.edges {
        let label: Vec<&str> = e.agents.iter().map(|&a| agents.name(a)).collect();
        writeln!(
            out,
            "  f{} -- f{} [label={}];",
            e.a,
            e.b,
            quote(&label.join(","))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
