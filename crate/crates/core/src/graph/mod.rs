//! Simple undirected graphs, the four baseline families, and the edge-list
//! text format.

mod matrix;
mod metrics;

pub use matrix::{build_matrices, DenseMatrix, MatrixSet};
pub use metrics::{compute_metrics, GraphMetrics, CONNECTIVITY_LIMIT};

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Connected simple undirected graph on vertices `0..n`.
///
/// Edges are stored as `(u, v)` with `u < v`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates,
    /// out-of-range endpoints, and disconnected results.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {a}-{b} out of range for n={n}"
                )));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {}-{}",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &list {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        let g = Graph {
            n,
            edges: list,
            adjacency,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Hop distances from `source`; `usize::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    /// `L x`, computed edge by edge so that the entries of the result sum to
    /// zero up to rounding.
    pub fn laplacian_apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(u, v) in &self.edges {
            let f = x[u] - x[v];
            out[u] += f;
            out[v] -= f;
        }
    }

    /// Serializes to the edge-list text format: header `# n=<n> m=<m>`,
    /// then one `u v` line per edge, `u < v`, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::with_capacity(12 * self.edges.len() + 32);
        let _ = writeln!(s, "# n={} m={}", self.n, self.m());
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let rest = header
            .strip_prefix("# n=")
            .ok_or_else(|| parse_err(1, "expected header '# n=<n> m=<m>'"))?;
        let (n_str, m_str) = rest
            .split_once(" m=")
            .ok_or_else(|| parse_err(1, "expected header '# n=<n> m=<m>'"))?;
        let n: usize = n_str.trim().parse().map_err(|_| parse_err(1, "bad n"))?;
        let m: usize = m_str.trim().parse().map_err(|_| parse_err(1, "bad m"))?;
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(i + 1, "expected 'u v'"));
            };
            let u = a.parse().map_err(|_| parse_err(i + 1, "bad vertex"))?;
            let v = b.parse().map_err(|_| parse_err(i + 1, "bad vertex"))?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(parse_err(
                1,
                &format!("header says m={m}, found {} edges", edges.len()),
            ));
        }
        Graph::from_edges(n, edges)
    }
}

/// The four elementary families used as comparison baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Path,
    Cycle,
    Star,
    Complete,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [
        Baseline::Path,
        Baseline::Cycle,
        Baseline::Star,
        Baseline::Complete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Path => "path",
            Baseline::Cycle => "cycle",
            Baseline::Star => "star",
            Baseline::Complete => "complete",
        }
    }

    pub fn min_order(self) -> usize {
        match self {
            Baseline::Cycle => 3,
            _ => 2,
        }
    }

    /// Printed closed forms for `(λ2, λ_N)` on `n` vertices.
    pub fn table_extremes(self, n: usize) -> (f64, f64) {
        use std::f64::consts::PI;
        let nf = n as f64;
        match self {
            Baseline::Path => (
                2.0 - 2.0 * (PI / nf).cos(),
                2.0 - 2.0 * ((nf - 1.0) / nf * PI).cos(),
            ),
            Baseline::Cycle => (
                2.0 - 2.0 * (2.0 * PI / nf).cos(),
                2.0 - 2.0 * ((nf - 1.0) / nf * PI).cos(),
            ),
            Baseline::Star => (1.0, nf),
            Baseline::Complete => (nf, nf),
        }
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Baseline::Path),
            "cycle" => Ok(Baseline::Cycle),
            "star" => Ok(Baseline::Star),
            "complete" => Ok(Baseline::Complete),
            other => Err(Error::InvalidParameter(format!("unknown family '{other}'"))),
        }
    }
}

/// Builds the named baseline on `n` vertices. The star's centre is vertex 0.
pub fn build_baseline(family: Baseline, n: usize) -> Result<Graph> {
    if n < family.min_order() {
        return Err(Error::InvalidParameter(format!(
            "{} needs n >= {}, got {n}",
            family.name(),
            family.min_order()
        )));
    }
    let edges: Vec<(usize, usize)> = match family {
        Baseline::Path => (0..n - 1).map(|i| (i, i + 1)).collect(),
        Baseline::Cycle => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        Baseline::Star => (1..n).map(|i| (0, i)).collect(),
        Baseline::Complete => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
    };
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_four() {
        let g = build_baseline(Baseline::Complete, 4).unwrap();
        assert_eq!(g.m(), 6);
        assert!(g.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn star_five() {
        let g = build_baseline(Baseline::Star, 5).unwrap();
        assert_eq!(g.m(), 4);
        assert_eq!(g.degree(0), 4);
        assert!((1..5).all(|v| g.degree(v) == 1));
    }

    #[test]
    fn path_four() {
        let g = build_baseline(Baseline::Path, 4).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn rejects_small_orders() {
        assert!(build_baseline(Baseline::Cycle, 2).is_err());
        assert!(build_baseline(Baseline::Path, 1).is_err());
        assert!(build_baseline(Baseline::Cycle, 3).is_ok());
        assert!(build_baseline(Baseline::Complete, 2).is_ok());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Graph::from_edges(3, [(0, 0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 0), (1, 2)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1)]),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn neighbor_lists_are_symmetric() {
        let g = build_baseline(Baseline::Cycle, 7).unwrap();
        for u in 0..g.n() {
            for &v in g.neighbors(u) {
                assert!(g.has_edge(v, u));
            }
        }
    }

    #[test]
    fn edge_list_text_format() {
        let g = build_baseline(Baseline::Cycle, 4).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "# n=4 m=4\n0 1\n0 3\n1 2\n2 3\n");
        assert_eq!(Graph::from_edge_list(&text).unwrap(), g);
        assert!(Graph::from_edge_list("# n=4 m=5\n0 1\n").is_err());
        assert!(Graph::from_edge_list("n=4\n").is_err());
    }

    #[test]
    fn table_extremes_for_star_and_complete() {
        assert_eq!(Baseline::Star.table_extremes(7), (1.0, 7.0));
        assert_eq!(Baseline::Complete.table_extremes(7), (7.0, 7.0));
    }
}
