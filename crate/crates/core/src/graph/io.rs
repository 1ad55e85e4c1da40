use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::info;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// What ingestion dropped on the way in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl IngestReport {
    pub fn dropped(&self) -> usize {
        self.self_loops + self.duplicates
    }
}

/// Reads a whitespace-separated `u v` edge list (`#` starts a comment line).
///
/// Node ids are compacted to `0..|V|` in order of first appearance; the
/// original ids stay available through [`Graph::label`].
pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<(Graph, IngestReport)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (graph, report) = parse_edge_list(&text, directed)?;
    info!(
        "loaded {}: |V|={} |E|={} (dropped {} self-loops, {} duplicates)",
        path.display(),
        graph.node_count(),
        graph.edge_count(),
        report.self_loops,
        report.duplicates
    );
    Ok((graph, report))
}

pub(crate) fn parse_edge_list(text: &str, directed: bool) -> Result<(Graph, IngestReport)> {
    let mut labels: Vec<u64> = Vec::new();
    let mut index: HashMap<u64, NodeId> = HashMap::new();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let field = fields.next().ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("expected two node ids, got {line:?}"),
            })?;
            field.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid node id {field:?}"),
            })
        };
        let (a, b) = (next_id()?, next_id()?);
        if let Some(extra) = fields.next() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("unexpected trailing field {extra:?}"),
            });
        }
        let mut intern = |label: u64| {
            *index.entry(label).or_insert_with(|| {
                labels.push(label);
                labels.len() - 1
            })
        };
        let (u, v) = (intern(a), intern(b));
        edges.push((u, v));
    }
    let (graph, report) = Graph::build(labels, edges, directed)?;
    if graph.original_edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok((graph, report))
}

/// Reads non-overlapping ground-truth communities, one per line.
/// Returns one label per node; nodes not listed get `None`.
pub fn load_communities(path: impl AsRef<Path>, graph: &Graph) -> Result<Vec<Option<usize>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_communities(&text, graph)
}

pub(crate) fn parse_communities(text: &str, graph: &Graph) -> Result<Vec<Option<usize>>> {
    let mut labels = vec![None; graph.node_count()];
    let mut community = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for field in line.split_whitespace() {
            let id: u64 = field.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid node id {field:?}"),
            })?;
            let v = graph.node_for_label(id).ok_or(Error::UnknownNode(id))?;
            match labels[v] {
                Some(c) if c != community => return Err(Error::OverlappingCommunity(id)),
                _ => labels[v] = Some(community),
            }
        }
        community += 1;
    }
    Ok(labels)
}

/// Writes live edges in stable id order using the original node ids, after
/// an optional block of `#` header lines.
pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        for e in graph.live_edges() {
            writeln!(out, "{} {}", graph.label(e.source), graph.label(e.destination))?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// Writes the compact-id to original-id map as `compact original` lines.
pub fn write_id_map(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("# compact original\n");
    for (i, l) in graph.labels().iter().enumerate() {
        text.push_str(&format!("{i} {l}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl Graph {
    /// Maps an edge list written against this graph's original ids back onto
    /// this graph's topology. Every edge must exist in the original graph.
    pub fn load_subgraph(&self, path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.parse_subgraph(&text)
    }

    pub(crate) fn parse_subgraph(&self, text: &str) -> Result<Graph> {
        let mut keep = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ids: Vec<u64> = line
                .split_whitespace()
                .map(|f| f.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("invalid edge line {line:?}"),
                })?;
            if ids.len() != 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected two node ids, got {line:?}"),
                });
            }
            let u = self.node_for_label(ids[0]).ok_or(Error::UnknownNode(ids[0]))?;
            let v = self.node_for_label(ids[1]).ok_or(Error::UnknownNode(ids[1]))?;
            keep.push(self.edge_id(u, v).ok_or(Error::NoSuchEdge(u, v))?);
        }
        self.restricted_to(keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_collapse() {
        let (g, report) = parse_edge_list("0 1\n1 0\n", false).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report.duplicates, 1);
    }

    #[test]
    fn self_loop_dropped() {
        let (g, report) = parse_edge_list("# header\n3 3\n3 4\n", false).unwrap();
        assert_eq!(report.self_loops, 1);
        assert_eq!(report.dropped(), 1);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_line_names_line_number() {
        let err = parse_edge_list("0 1\n\n1 x\n", false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_edge_list("0 1 2\n", false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_edge_set_rejected() {
        assert!(matches!(parse_edge_list("# nothing\n", false), Err(Error::EmptyGraph)));
        assert!(matches!(parse_edge_list("2 2\n", false), Err(Error::EmptyGraph)));
    }

    #[test]
    fn sparse_ids_are_compacted() {
        let (g, _) = parse_edge_list("100 7\n7 5000\n", false).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.labels(), &[100, 7, 5000]);
        assert_eq!(g.node_for_label(5000), Some(2));
    }

    #[test]
    fn communities_parse() {
        let (g, _) = parse_edge_list("0 1\n1 2\n2 3\n3 4\n", false).unwrap();
        let labels = parse_communities("0 1 2\n3 4\n", &g).unwrap();
        assert_eq!(labels, vec![Some(0), Some(0), Some(0), Some(1), Some(1)]);
    }

    #[test]
    fn overlapping_communities_rejected() {
        let (g, _) = parse_edge_list("0 1\n1 2\n", false).unwrap();
        assert!(matches!(
            parse_communities("0 1\n1 2\n", &g),
            Err(Error::OverlappingCommunity(1))
        ));
    }

    #[test]
    fn community_node_must_exist() {
        let (g, _) = parse_edge_list("0 1\n", false).unwrap();
        assert!(matches!(parse_communities("0 9\n", &g), Err(Error::UnknownNode(9))));
    }
}
