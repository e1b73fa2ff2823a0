//! Text formats for graph instances.
//!
//! * Gset: a header line `N M`, then `M` lines `u v w` with 1-based nodes.
//! * Edge list: lines `u v [w]` with 0-based nodes and default weight 1.
//!   `#` starts a comment. A `# nodes: N` comment fixes the node count,
//!   which otherwise is one more than the largest index seen.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error("missing header line")]
    MissingHeader,
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
}

fn malformed(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, ParseError> {
    let token = token.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| malformed(line, format!("invalid {what} `{token}`")))
}

/// Validates edges one by one so errors can name the offending line.
fn assemble(num_nodes: usize, edges: Vec<(usize, Edge)>) -> Result<Graph, ParseError> {
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    for &(line, e) in &edges {
        let err = |source| ParseError::Graph { line, source };
        for index in [e.u, e.v] {
            if index >= num_nodes {
                return Err(err(GraphError::NodeOutOfRange { index, num_nodes }));
            }
        }
        if e.u == e.v {
            return Err(err(GraphError::SelfLoop(e.u)));
        }
        if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(err(GraphError::DuplicateEdge(e.u, e.v)));
        }
    }
    Graph::from_edges(num_nodes, edges.into_iter().map(|(_, e)| e).collect())
        .map_err(|source| ParseError::Graph { line: 0, source })
}

pub fn parse_gset(text: &str) -> Result<Graph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let mut tokens = header.split_whitespace();
    let n: usize = parse_field(tokens.next(), header_line, "node count")?;
    let m: usize = parse_field(tokens.next(), header_line, "edge count")?;
    if tokens.next().is_some() {
        return Err(malformed(header_line, "header must be `N M`"));
    }

    let mut edges = Vec::with_capacity(m);
    for (line, text) in lines {
        if edges.len() == m {
            return Err(malformed(line, "data after the declared edges"));
        }
        let mut tokens = text.split_whitespace();
        let u: usize = parse_field(tokens.next(), line, "source node")?;
        let v: usize = parse_field(tokens.next(), line, "target node")?;
        let w: f64 = parse_field(tokens.next(), line, "weight")?;
        if tokens.next().is_some() {
            return Err(malformed(line, "expected `u v w`"));
        }
        if u == 0 || v == 0 {
            return Err(malformed(line, "Gset node indices are 1-based"));
        }
        if u > n || v > n {
            return Err(ParseError::Graph {
                line,
                source: GraphError::NodeOutOfRange {
                    index: u.max(v),
                    num_nodes: n,
                },
            });
        }
        if !w.is_finite() {
            return Err(malformed(line, "non-finite weight"));
        }
        edges.push((line, Edge::new(u - 1, v - 1, w)));
    }
    if edges.len() != m {
        return Err(ParseError::EdgeCount {
            expected: m,
            found: edges.len(),
        });
    }
    assemble(n, edges)
}

pub fn parse_edge_list(text: &str) -> Result<Graph, ParseError> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_index: Option<usize> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (data, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(rest) = comment.and_then(|c| c.trim().strip_prefix("nodes:")) {
            declared = Some(parse_field(Some(rest.trim()), line, "node count")?);
        }
        let mut tokens = data.split_whitespace();
        let Some(first) = tokens.next() else { continue };
        let u: usize = parse_field(Some(first), line, "source node")?;
        let v: usize = parse_field(tokens.next(), line, "target node")?;
        let w: f64 = match tokens.next() {
            Some(t) => parse_field(Some(t), line, "weight")?,
            None => 1.0,
        };
        if tokens.next().is_some() {
            return Err(malformed(line, "expected `u v [w]`"));
        }
        if !w.is_finite() {
            return Err(malformed(line, "non-finite weight"));
        }
        max_index = Some(max_index.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((line, Edge::new(u, v, w)));
    }

    let inferred = max_index.map_or(0, |m| m + 1);
    assemble(declared.unwrap_or(inferred), edges)
}

pub fn write_gset(graph: &Graph) -> String {
    let mut out = format!("{} {}\n", graph.num_nodes(), graph.num_edges());
    for e in graph.edges() {
        writeln!(out, "{} {} {}", e.u + 1, e.v + 1, e.w).unwrap();
    }
    out
}

pub fn write_edge_list(graph: &Graph) -> String {
    let mut out = format!("# nodes: {}\n", graph.num_nodes());
    for e in graph.edges() {
        if e.w == 1.0 {
            writeln!(out, "{} {}", e.u, e.v).unwrap();
        } else {
            writeln!(out, "{} {} {}", e.u, e.v, e.w).unwrap();
        }
    }
    out
}

/// On-disk instance formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Gset,
    EdgeList,
    /// Bipartite matching instance in JSON.
    Dbm,
}

/// Guesses the format from a file name: `.json` is a matching instance,
/// `.gset` or a `G<digits>` stem is Gset (unless the extension is `.edges`),
/// anything else an edge list.
pub fn detect_format(path: &Path) -> InstanceFormat {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let gset_stem = stem.len() > 1
        && stem.starts_with(['G', 'g'])
        && stem[1..].bytes().all(|b| b.is_ascii_digit());
    match ext.to_ascii_lowercase().as_str() {
        "json" => InstanceFormat::Dbm,
        "gset" => InstanceFormat::Gset,
        "edges" => InstanceFormat::EdgeList,
        "txt" if !gset_stem => InstanceFormat::EdgeList,
        _ if gset_stem => InstanceFormat::Gset,
        _ => InstanceFormat::EdgeList,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn format_detection() {
        let f = |s: &str| detect_format(Path::new(s));
        assert_eq!(f("data/G14"), InstanceFormat::Gset);
        assert_eq!(f("g22.txt"), InstanceFormat::Gset);
        assert_eq!(f("x.gset"), InstanceFormat::Gset);
        assert_eq!(f("k4.edges"), InstanceFormat::EdgeList);
        assert_eq!(f("graph.txt"), InstanceFormat::EdgeList);
        assert_eq!(f("match.json"), InstanceFormat::Dbm);
        assert_eq!(f("Graph"), InstanceFormat::EdgeList);
    }

    #[test]
    fn gset_small() {
        let g = parse_gset("3 2\n1 2 1\n2 3 -1\n").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(
            g.edges(),
            &[Edge::new(0, 1, 1.0), Edge::new(1, 2, -1.0)]
        );
    }

    #[test]
    fn gset_errors_carry_line_numbers() {
        assert!(matches!(
            parse_gset("3 2\n1 4 1\n2 3 1\n"),
            Err(ParseError::Graph { line: 2, .. })
        ));
        assert!(matches!(
            parse_gset("3 2\n1 2 1\n2 1 1\n"),
            Err(ParseError::Graph {
                line: 3,
                source: GraphError::DuplicateEdge(1, 0)
            })
        ));
        assert!(matches!(
            parse_gset("3 2\n1 2 x\n"),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert_eq!(
            parse_gset("3 2\n1 2 1\n"),
            Err(ParseError::EdgeCount {
                expected: 2,
                found: 1
            })
        );
        assert_eq!(parse_gset("\n\n"), Err(ParseError::MissingHeader));
    }

    #[test]
    fn edge_list_defaults_and_comments() {
        let g = parse_edge_list("# a path\n0 1\n1 2 # trailing\n").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        let g = parse_edge_list("0 1 2.5\n").unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1, 2.5)]);
        assert!(matches!(
            parse_edge_list("0 0\n"),
            Err(ParseError::Graph {
                line: 1,
                source: GraphError::SelfLoop(0)
            })
        ));
        let g = parse_edge_list("# nodes: 6\n0 1\n").unwrap();
        assert_eq!(g.num_nodes(), 6);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..12).prop_flat_map(|n| {
            proptest::collection::vec(
                ((0..n), (0..n), prop_oneof![Just(1.0), -5.0f64..5.0]),
                0..30,
            )
            .prop_map(move |raw| {
                let mut seen = std::collections::HashSet::new();
                let edges = raw
                    .into_iter()
                    .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
                    .map(|(u, v, w)| Edge::new(u, v, w))
                    .collect();
                Graph::from_edges(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn writers_round_trip(g in arb_graph()) {
            prop_assert_eq!(&parse_gset(&write_gset(&g)).unwrap(), &g);
            prop_assert_eq!(&parse_edge_list(&write_edge_list(&g)).unwrap(), &g);
        }
    }
}
