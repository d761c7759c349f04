//! Edge-list text format.
//!
//! ```text
//! # optional comments
//! 3
//! 0 1
//! 1 2 2.5
//! ```
//!
//! The first non-comment line is the node count. Each following line is
//! `u v` or `u v w` with 0-based ids and a positive weight. Directedness is
//! supplied by the caller; undirected files list each edge once.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::ParseError;
use crate::graph::Graph;

pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph, ParseError> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some(g) = graph.as_mut() else {
            if fields.len() != 1 {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("expected node count, found {content:?}"),
                });
            }
            let n = fields[0].parse::<usize>().map_err(|e| ParseError::Syntax {
                line,
                message: format!("bad node count {:?}: {e}", fields[0]),
            })?;
            graph = Some(Graph::new(n, directed));
            continue;
        };
        if fields.len() != 2 && fields.len() != 3 {
            return Err(ParseError::Syntax {
                line,
                message: format!("expected \"u v\" or \"u v w\", found {content:?}"),
            });
        }
        let node = |s: &str| {
            s.parse::<usize>().map_err(|e| ParseError::Syntax {
                line,
                message: format!("bad node id {s:?}: {e}"),
            })
        };
        let u = node(fields[0])?;
        let v = node(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|e| ParseError::Syntax {
                line,
                message: format!("bad weight {s:?}: {e}"),
            })?,
            None => 1.0,
        };
        g.add_edge(u, v, w)
            .map_err(|source| ParseError::Graph { line, source })?;
    }
    graph.ok_or(ParseError::MissingHeader)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "{}", g.n()).unwrap();
    for (u, v, w) in g.edges() {
        if w == 1.0 {
            writeln!(out, "{u} {v}").unwrap();
        } else {
            // `{}` on f64 prints the shortest representation that round-trips.
            writeln!(out, "{u} {v} {w}").unwrap();
        }
    }
    out
}

pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<Graph, ParseError> {
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text, directed)
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, format_edge_list(g))
}
