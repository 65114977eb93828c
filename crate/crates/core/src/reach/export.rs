use std::fmt::Write;

use serde::Serialize;

use super::ReachGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RgDumpNode {
    pub id: usize,
    pub states: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RgDumpEdge {
    pub src: usize,
    pub dst: usize,
    pub guard: String,
}

/// Stable JSON shape of a reachability graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RgDump {
    pub system: String,
    pub machines: Vec<String>,
    pub environment: Vec<String>,
    pub nodes: Vec<RgDumpNode>,
    pub edges: Vec<RgDumpEdge>,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl ReachGraph {
    pub fn dump(&self) -> RgDump {
        RgDump {
            system: self.system_name.clone(),
            machines: self.machine_names.clone(),
            environment: self.symbols.names_of(&self.env),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| RgDumpNode { id, states: n.state_names.clone(), outputs: self.symbols.names_of(&n.outputs) })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| RgDumpEdge { src: e.src, dst: e.dst, guard: e.guard.display(&self.symbols).to_string() })
                .collect(),
        }
    }

    /// Graphviz rendering; the initial node is double-circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph \"{}\" {{", escape(&self.system_name)).unwrap();
        writeln!(out, "  rankdir=LR;").unwrap();
        writeln!(out, "  node [fontname=\"monospace\"];").unwrap();
        for (i, n) in self.nodes.iter().enumerate() {
            let outputs = self.symbols.names_of(&n.outputs).join(" ");
            let label = format!("({})\\n{}", escape(&n.state_names.join(", ")), escape(&outputs));
            let shape = if i == 0 { "doublecircle" } else { "ellipse" };
            writeln!(out, "  n{i} [label=\"{label}\", shape={shape}];").unwrap();
        }
        for e in &self.edges {
            let guard = e.guard.display(&self.symbols).to_string();
            writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.src, e.dst, escape(&guard)).unwrap();
        }
        out.push_str("}\n");
        out
    }
}
