//! Undirected simple graphs: edge-list ingestion, label files, degrees.
//!
//! Graphs are stored as sorted adjacency lists plus a degree array. Node ids
//! are compacted to `0..n-1` in order of first appearance; original tokens
//! are kept in a side map for output.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::labels::LabelVector;

/// Immutable undirected simple graph.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    degree: Vec<u32>,
    names: Vec<String>,
}

/// Counts of entries dropped while cleaning an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub self_loops: usize,
    pub duplicates: usize,
    pub isolated_removed: usize,
}

impl Graph {
    /// Build from already-compacted integer edges over `0..n-1`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        let names = (0..n).map(|i| i.to_string()).collect();
        Self::from_edges_named(n, edges, names)
    }

    pub fn from_edges_named(n: usize, edges: &[(u32, u32)], names: Vec<String>) -> Result<Graph> {
        if n == 0 {
            return Err(Error::invalid("graph has no nodes"));
        }
        if names.len() != n {
            return Err(Error::invalid("name table length must equal node count"));
        }
        let mut adj = vec![Vec::new(); n];
        let mut canon: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at node {a}")));
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            canon.push((lo, hi));
        }
        canon.sort_unstable();
        canon.dedup();
        for &(a, b) in &canon {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for row in adj.iter_mut() {
            row.sort_unstable();
        }
        let degree = adj.iter().map(|r| r.len() as u32).collect();
        Ok(Graph {
            n,
            edges: canon,
            adj,
            degree,
            names,
        })
    }

    /// Parse a whitespace-separated edge list. Lines beginning with `#` are
    /// comments; tokens may be arbitrary strings. Self-loops and duplicate
    /// edges are dropped and counted. With `drop_isolated`, zero-degree nodes
    /// are removed and ids recompacted.
    pub fn load_edge_list<R: BufRead>(reader: R, drop_isolated: bool) -> Result<(Graph, LoadStats)> {
        let mut stats = LoadStats::default();
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut raw_edges: Vec<(u32, u32)> = Vec::new();
        let mut seen: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::parse(
                    lineno + 1,
                    format!("expected 2 tokens, found {}", tokens.len()),
                ));
            }
            let mut id_of = |tok: &str| -> u32 {
                if let Some(&id) = index.get(tok) {
                    id
                } else {
                    let id = names.len() as u32;
                    index.insert(tok.to_string(), id);
                    names.push(tok.to_string());
                    id
                }
            };
            let a = id_of(tokens[0]);
            let b = id_of(tokens[1]);
            if a == b {
                stats.self_loops += 1;
                continue;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                stats.duplicates += 1;
                continue;
            }
            raw_edges.push(key);
        }

        if names.is_empty() || raw_edges.is_empty() {
            return Err(Error::invalid("empty graph after cleaning"));
        }

        let (n, edges, names) = if drop_isolated {
            let mut deg = vec![0u32; names.len()];
            for &(a, b) in &raw_edges {
                deg[a as usize] += 1;
                deg[b as usize] += 1;
            }
            let mut new_id = vec![u32::MAX; names.len()];
            let mut kept_names = Vec::new();
            for (i, &d) in deg.iter().enumerate() {
                if d > 0 {
                    new_id[i] = kept_names.len() as u32;
                    kept_names.push(names[i].clone());
                } else {
                    stats.isolated_removed += 1;
                }
            }
            let edges: Vec<(u32, u32)> = raw_edges
                .iter()
                .map(|&(a, b)| (new_id[a as usize], new_id[b as usize]))
                .collect();
            (kept_names.len(), edges, kept_names)
        } else {
            (names.len(), raw_edges, names)
        };

        let graph = Graph::from_edges_named(n, &edges, names)?;
        Ok((graph, stats))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unordered edge set, sorted lexicographically with `i < j`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn adjacency(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.names.iter().position(|t| t == token)
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for &(a, b) in &self.edges {
            writeln!(w, "{} {}", self.names[a as usize], self.names[b as usize])?;
        }
        Ok(())
    }
}

/// Parse a `token <ws> integer-label` file aligned to `graph` node order.
/// Labels are recoded to `1..K` in first-appearance order over the graph's
/// node ordering.
pub fn load_labels<R: BufRead>(reader: R, graph: &Graph) -> Result<LabelVector> {
    let mut index: HashMap<String, usize> = HashMap::with_capacity(graph.n());
    for (i, name) in graph.names().iter().enumerate() {
        index.insert(name.clone(), i);
    }
    let mut raw = vec![None::<u32>; graph.n()];
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse(
                lineno + 1,
                format!("expected 2 tokens, found {}", tokens.len()),
            ));
        }
        let node = *index.get(tokens[0]).ok_or_else(|| {
            Error::parse(lineno + 1, format!("node '{}' not present in graph", tokens[0]))
        })?;
        let label: u32 = tokens[1]
            .parse()
            .map_err(|_| Error::parse(lineno + 1, format!("bad label '{}'", tokens[1])))?;
        if label < 1 {
            return Err(Error::parse(lineno + 1, "labels must be >= 1".to_string()));
        }
        if raw[node].is_some() {
            return Err(Error::parse(
                lineno + 1,
                format!("duplicate label for node '{}'", tokens[0]),
            ));
        }
        raw[node] = Some(label);
    }
    let missing = raw.iter().filter(|l| l.is_none()).count();
    if missing > 0 {
        return Err(Error::invalid(format!("missing nodes: {missing} unlabeled")));
    }
    // Recode to 1..K preserving first-appearance order in graph node order.
    let mut recode: HashMap<u32, u32> = HashMap::new();
    let mut entries = Vec::with_capacity(graph.n());
    for l in raw.into_iter().map(|l| l.unwrap()) {
        let next = recode.len() as u32 + 1;
        let code = *recode.entry(l).or_insert(next);
        entries.push(code);
    }
    let k = recode.len() as u32;
    if k < 2 {
        return Err(Error::invalid("label file must define at least 2 communities"));
    }
    LabelVector::new(entries, k)
}

/// Write labels as `token <ws> label` lines in node order.
pub fn write_labels<W: Write>(mut w: W, graph: &Graph, labels: &LabelVector) -> Result<()> {
    if labels.len() != graph.n() {
        return Err(Error::invalid("label vector length differs from node count"));
    }
    for i in 0..graph.n() {
        writeln!(w, "{} {}", graph.name(i), labels.label(i))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn triangle_load() {
        let (g, stats) = Graph::load_edge_list(Cursor::new("a b\nb c\nc a\n"), false).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.num_edges(), 3);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert_eq!(stats, LoadStats::default());
        assert!(g.adjacency(0, 1) && g.adjacency(1, 0));
        assert!(!g.adjacency(0, 0));
    }

    #[test]
    fn dedup_and_self_loops() {
        let (g, stats) = Graph::load_edge_list(Cursor::new("a b\na b\na a\n"), false).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(stats.duplicates, 1);
        assert_eq!(stats.self_loops, 1);
    }

    #[test]
    fn comments_and_bad_lines() {
        let (g, _) = Graph::load_edge_list(Cursor::new("# header\na b\n\nb c\n"), false).unwrap();
        assert_eq!(g.n(), 3);
        let err = Graph::load_edge_list(Cursor::new("a b c\n"), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(Graph::load_edge_list(Cursor::new("# nothing\n"), false).is_err());
    }

    #[test]
    fn drop_isolated_recompacts() {
        // c only appears in a self-loop, so it ends up isolated
        let (g, stats) =
            Graph::load_edge_list(Cursor::new("a b\nc c\nb d\n"), true).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(stats.isolated_removed, 1);
        assert_eq!(g.names(), &["a", "b", "d"]);
        // ids stay in first-appearance order
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn degree_sum_is_twice_edges() {
        let (g, _) = Graph::load_edge_list(Cursor::new("a b\nb c\nc d\nd a\na c\n"), false).unwrap();
        let total: u32 = g.degrees().iter().sum();
        assert_eq!(total as usize, 2 * g.num_edges());
    }

    #[test]
    fn labels_roundtrip_and_recode() {
        let (g, _) = Graph::load_edge_list(Cursor::new("a b\nb c\nc a\n"), false).unwrap();
        let l = load_labels(Cursor::new("a 1\nb 1\nc 2\n"), &g).unwrap();
        assert_eq!(l.entries(), &[1, 1, 2]);
        assert_eq!(l.k(), 2);
        let l = load_labels(Cursor::new("a 5\nb 5\nc 9\n"), &g).unwrap();
        assert_eq!(l.entries(), &[1, 1, 2]);
        // order in the file does not matter; recode follows graph node order
        let l = load_labels(Cursor::new("c 7\nb 4\na 4\n"), &g).unwrap();
        assert_eq!(l.entries(), &[1, 1, 2]);
    }

    #[test]
    fn label_errors() {
        let (g, _) = Graph::load_edge_list(Cursor::new("a b\nb c\nc a\n"), false).unwrap();
        assert!(load_labels(Cursor::new("a 1\nb 2\n"), &g).is_err());
        assert!(load_labels(Cursor::new("a 1\nb 1\nz 2\n"), &g).is_err());
        assert!(load_labels(Cursor::new("a 1\nb 1\nc 1\n"), &g).is_err());
    }

    #[test]
    fn edge_list_roundtrip() {
        let (g, _) =
            Graph::load_edge_list(Cursor::new("u v\nv w\nw x\nx u\nu w\n"), false).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let (g2, _) = Graph::load_edge_list(Cursor::new(buf), false).unwrap();
        assert_eq!(g.edges(), g2.edges());
        assert_eq!(g.names(), g2.names());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn roundtrip_preserves_edges(
                edges in proptest::collection::btree_set((0u32..12, 0u32..12), 1..40)
            ) {
                let edges: Vec<(u32, u32)> = edges
                    .into_iter()
                    .filter(|(a, b)| a != b)
                    .collect();
                prop_assume!(!edges.is_empty());
                let mut text = String::new();
                for (a, b) in &edges {
                    text.push_str(&format!("n{a} n{b}\n"));
                }
                let (g, _) = Graph::load_edge_list(Cursor::new(text), false).unwrap();
                let mut buf = Vec::new();
                g.write_edge_list(&mut buf).unwrap();
                let (g2, _) = Graph::load_edge_list(Cursor::new(buf), false).unwrap();
                // ids may be re-compacted; the named edge set is what survives
                let names = |g: &Graph| {
                    let mut v: Vec<(String, String)> = g
                        .edges()
                        .iter()
                        .map(|&(a, b)| {
                            let (x, y) =
                                (g.name(a as usize).to_string(), g.name(b as usize).to_string());
                            if x < y { (x, y) } else { (y, x) }
                        })
                        .collect();
                    v.sort();
                    v
                };
                prop_assert_eq!(names(&g), names(&g2));
                let total: u32 = g.degrees().iter().sum();
                prop_assert_eq!(total as usize, 2 * g.num_edges());
            }
        }
    }
}
