use rayon::prelude::*;
use serde::Serialize;

use super::Graph;
use crate::flow::{edge_connectivity, vertex_connectivity};
use crate::numeric::Sig17;
use crate::{Error, Result};

/// Largest order for which connectivities are computed exactly.
pub const CONNECTIVITY_LIMIT: usize = 2000;

#[derive(Debug, Clone, Serialize)]
pub struct GraphMetrics {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub min_degree: usize,
    pub avg_degree: Sig17,
    pub density: Sig17,
    /// Mean hop distance over unordered distinct pairs.
    pub avg_path_length: Sig17,
    /// `None` when `n` exceeds [`CONNECTIVITY_LIMIT`].
    pub vertex_connectivity: Option<usize>,
    pub edge_connectivity: Option<usize>,
}

pub fn compute_metrics(g: &Graph) -> Result<GraphMetrics> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "metrics need at least two vertices".into(),
        ));
    }
    let degrees = g.degrees();
    let m = g.m();
    let total: u64 = (0..n)
        .into_par_iter()
        .map(|s| {
            let d = g.bfs_distances(s);
            d[s + 1..]
                .iter()
                .try_fold(0u64, |acc, &x| (x != usize::MAX).then_some(acc + x as u64))
        })
        .collect::<Option<Vec<u64>>>()
        .ok_or(Error::Disconnected)?
        .into_iter()
        .sum();
    let pairs = (n * (n - 1) / 2) as f64;
    let (vc, ec) = if n <= CONNECTIVITY_LIMIT {
        (Some(vertex_connectivity(g)), Some(edge_connectivity(g)))
    } else {
        (None, None)
    };
    Ok(GraphMetrics {
        n,
        m,
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        min_degree: degrees.iter().copied().min().unwrap_or(0),
        avg_degree: Sig17(2.0 * m as f64 / n as f64),
        density: Sig17(2.0 * m as f64 / (n as f64 * (n as f64 - 1.0))),
        avg_path_length: Sig17(total as f64 / pairs),
        vertex_connectivity: vc,
        edge_connectivity: ec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_baseline, Baseline};

    #[test]
    fn complete_four() {
        let g = build_baseline(Baseline::Complete, 4).unwrap();
        let m = compute_metrics(&g).unwrap();
        assert_eq!((m.max_degree, m.min_degree), (3, 3));
        assert_eq!(m.avg_path_length.0, 1.0);
        assert_eq!(m.vertex_connectivity, Some(3));
        assert_eq!(m.edge_connectivity, Some(3));
        assert_eq!(m.density.0, 1.0);
    }

    #[test]
    fn star_four_path_length() {
        // pairs: three centre-leaf at distance 1, three leaf-leaf at 2
        let g = build_baseline(Baseline::Star, 4).unwrap();
        let m = compute_metrics(&g).unwrap();
        assert_eq!(m.avg_path_length.0, 1.5);
        assert_eq!(m.vertex_connectivity, Some(1));
        assert_eq!(m.edge_connectivity, Some(1));
    }

    #[test]
    fn density_matches_definition() {
        let g = build_baseline(Baseline::Cycle, 10).unwrap();
        let m = compute_metrics(&g).unwrap();
        assert_eq!(m.density.0, 20.0 / 90.0);
        assert_eq!(m.avg_degree.0, 2.0);
    }

    /// Every connected graph on up to 6 vertices, compared against a
    /// Floyd-Warshall distance table.
    #[test]
    fn path_length_exhaustive_small_graphs() {
        for n in 2..=6usize {
            let all: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect();
            for mask in 0u32..(1 << all.len()) {
                let edges: Vec<_> = all
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, &e)| e)
                    .collect();
                let Ok(g) = Graph::from_edges(n, edges.clone()) else {
                    continue;
                };
                let inf = usize::MAX / 4;
                let mut d = vec![vec![inf; n]; n];
                for (i, row) in d.iter_mut().enumerate() {
                    row[i] = 0;
                }
                for &(u, v) in &edges {
                    d[u][v] = 1;
                    d[v][u] = 1;
                }
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                        }
                    }
                }
                let sum: usize = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .map(|(i, j)| d[i][j])
                    .sum();
                let expect = sum as f64 / (n * (n - 1) / 2) as f64;
                assert_eq!(compute_metrics(&g).unwrap().avg_path_length.0, expect);
            }
        }
    }

    #[test]
    fn single_vertex_rejected() {
        let g = Graph::from_edges(1, []).unwrap();
        assert!(compute_metrics(&g).is_err());
    }
}
