//! The hierarchical small-world network `M_g^r`.
//!
//! Vertices are indexed in level order of the basic tree: the root is 0 and
//! the children of tree vertex `j` are `r*j + 1 ..= r*j + r`. Under this
//! labelling the descendants of any vertex occupy one contiguous index range
//! per level.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::Graph;
use crate::numeric::Sig17;
use crate::{Error, Result};

/// Default cap on the number of vertices `build_hsw` will materialise.
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone)]
pub struct HierarchicalNetwork {
    graph: Graph,
    r: usize,
    g: usize,
    level: Vec<usize>,
    parent: Vec<Option<usize>>,
    desc_count: Vec<usize>,
}

impl HierarchicalNetwork {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn level(&self, v: usize) -> usize {
        self.level[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Number of descendants of `v` in the basic tree.
    pub fn desc_count(&self, v: usize) -> usize {
        self.desc_count[v]
    }

    /// Number of ancestors of `v`; equal to its level.
    pub fn anc_count(&self, v: usize) -> usize {
        self.level[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.level[v] == self.g
    }

    /// Children of `v` in the basic tree (empty for leaves).
    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        if self.is_leaf(v) {
            0..0
        } else {
            self.r * v + 1..self.r * v + self.r + 1
        }
    }

    /// Non-leaf vertices, i.e. those at levels `0..g`.
    pub fn internal_vertices(&self) -> std::ops::Range<usize> {
        0..(self.n() - self.r.pow(self.g as u32))
    }

    /// Descendants of `v` in index order (one contiguous block per level).
    pub fn descendants(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let r = self.r;
        let depth = self.g - self.level[v];
        (1..=depth)
            .scan((v, v), move |(lo, hi), _| {
                *lo = r * *lo + 1;
                *hi = r * *hi + r;
                Some(*lo..=*hi)
            })
            .flatten()
    }

    /// `v` together with its descendants.
    pub fn subtree(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(v).chain(self.descendants(v))
    }

    /// JSON descriptor `{r, g, n, m, levels: [...]}`.
    pub fn descriptor(&self) -> Descriptor {
        let levels = (0..=self.g)
            .map(|i| LevelDescriptor {
                level: i,
                count: self.r.pow(i as u32),
                degree: level_degree(self.r, self.g, i).expect("level in range"),
            })
            .collect();
        Descriptor {
            r: self.r,
            g: self.g,
            n: self.n(),
            m: self.graph.m(),
            levels,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Descriptor {
    pub r: usize,
    pub g: usize,
    pub n: usize,
    pub m: usize,
    pub levels: Vec<LevelDescriptor>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelDescriptor {
    pub level: usize,
    pub count: usize,
    pub degree: usize,
}

fn check_params(r: usize, _g: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("r must be >= 2, got {r}")));
    }
    Ok(())
}

/// Exact `(N_g, E_g)`.
///
/// Both printed forms of `E_g` are evaluated in integer arithmetic and must
/// agree; overflow is reported rather than wrapped.
pub fn order_and_size(r: usize, g: usize) -> Result<(u64, u64)> {
    check_params(r, g)?;
    let r = r as u128;
    let gg = g as u128;
    let exp = u32::try_from(g + 2).map_err(|_| Error::Overflow("r^(g+2)"))?;
    let pow = |e: u32| r.checked_pow(e).ok_or(Error::Overflow("r^(g+2)"));
    let rg1 = pow(exp - 1)?;
    let rg2 = pow(exp)?;
    let n = (rg1 - 1) / (r - 1);

    // (g r^{g+2} - g r^{g+1} - r^{g+1} + r) / (r-1)^2
    let ovf = || Error::Overflow("E_g");
    let pos = gg
        .checked_mul(rg2)
        .ok_or_else(ovf)?
        .checked_add(r)
        .ok_or_else(ovf)?;
    let neg = gg
        .checked_mul(rg1)
        .ok_or_else(ovf)?
        .checked_add(rg1)
        .ok_or_else(ovf)?;
    let num = pos.checked_sub(neg).ok_or_else(ovf)?;
    let den = (r - 1) * (r - 1);
    if num % den != 0 {
        return Err(Error::InvalidParameter(
            "product form of E_g is not integral".into(),
        ));
    }
    let e_product = num / den;

    // (g+1)/(r-1) + (g - 1/(r-1)) N_g = ((g+1) + (g(r-1) - 1) N_g) / (r-1)
    let coef = gg * (r - 1);
    let num2 = if coef >= 1 {
        (coef - 1)
            .checked_mul(n)
            .ok_or_else(ovf)?
            .checked_add(gg + 1)
            .ok_or_else(ovf)?
    } else {
        // g = 0: (1 - N_0) / (r - 1) with N_0 = 1
        (gg + 1) - n
    };
    let e_order = num2 / (r - 1);
    if num2 % (r - 1) != 0 || e_order != e_product {
        return Err(Error::InvalidParameter(format!(
            "E_g forms disagree: {e_product} vs {e_order}"
        )));
    }
    let n = u64::try_from(n).map_err(|_| Error::Overflow("N_g"))?;
    let e = u64::try_from(e_product).map_err(|_| Error::Overflow("E_g"))?;
    Ok((n, e))
}

/// Degree shared by every vertex on level `i`:
/// `(r^{g+1-i} - 1)/(r - 1) + i - 1`.
pub fn level_degree(r: usize, g: usize, i: usize) -> Result<usize> {
    check_params(r, g)?;
    if i > g {
        return Err(Error::InvalidParameter(format!(
            "level {i} outside [0, {g}]"
        )));
    }
    let pow = r
        .checked_pow((g + 1 - i) as u32)
        .ok_or(Error::Overflow("r^(g+1-i)"))?;
    Ok((pow - 1) / (r - 1) + i - 1)
}

pub fn build_hsw(r: usize, g: usize) -> Result<HierarchicalNetwork> {
    build_hsw_with_budget(r, g, DEFAULT_VERTEX_BUDGET)
}

/// Basic-tree construction: link every internal vertex of the full r-ary
/// tree of height `g` to all of its descendants.
pub fn build_hsw_with_budget(r: usize, g: usize, budget: usize) -> Result<HierarchicalNetwork> {
    check_params(r, g)?;
    let (n, _) = order_and_size(r, g)?;
    let n = usize::try_from(n).map_err(|_| Error::Overflow("N_g"))?;
    if n > budget {
        return Err(Error::BudgetExceeded {
            what: "vertex count",
            size: n,
            budget,
        });
    }
    let mut level = vec![0usize; n];
    let mut parent = vec![None; n];
    for v in 1..n {
        let p = (v - 1) / r;
        parent[v] = Some(p);
        level[v] = level[p] + 1;
    }
    let mut desc_count = vec![0usize; n];
    for v in (1..n).rev() {
        let p = parent[v].expect("non-root");
        desc_count[p] += desc_count[v] + 1;
    }
    let mut net = HierarchicalNetwork {
        graph: Graph::from_edges(1, [])?,
        r,
        g,
        level,
        parent,
        desc_count,
    };
    let edges: Vec<(usize, usize)> = (0..n)
        .filter(|&v| !net.is_leaf(v))
        .flat_map(|v| net.descendants(v).map(move |w| (v, w)).collect::<Vec<_>>())
        .collect();
    net.graph = Graph::from_edges(n, edges)?;
    Ok(net)
}

/// Recursive-modular construction: `M_g` is `r` copies of `M_{g-1}` plus a
/// new vertex joined to every vertex of every copy.
///
/// Each vertex carries its tree position `(depth, offset)`; the resulting
/// edges are relabelled onto the canonical level-order indices.
pub fn build_hsw_recursive(r: usize, g: usize) -> Result<Graph> {
    check_params(r, g)?;
    let (n, _) = order_and_size(r, g)?;
    if n as usize > DEFAULT_VERTEX_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "vertex count",
            size: n as usize,
            budget: DEFAULT_VERTEX_BUDGET,
        });
    }
    // positions[k] = (depth, offset) of local vertex k; edges over local ids
    let mut positions: Vec<(usize, usize)> = vec![(0, 0)];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for _ in 0..g {
        let size = positions.len();
        let mut next_pos = Vec::with_capacity(r * size + 1);
        let mut next_edges = Vec::with_capacity(r * edges.len() + r * size);
        next_pos.push((0, 0));
        for copy in 0..r {
            let base = 1 + copy * size;
            for &(depth, off) in &positions {
                next_pos.push((depth + 1, copy * r.pow(depth as u32) + off));
            }
            next_edges.extend(edges.iter().map(|&(a, b)| (base + a, base + b)));
            next_edges.extend((0..size).map(|k| (0, base + k)));
        }
        positions = next_pos;
        edges = next_edges;
    }
    let canonical: Vec<usize> = positions
        .iter()
        .map(|&(depth, off)| (r.pow(depth as u32) - 1) / (r - 1) + off)
        .collect();
    Graph::from_edges(
        positions.len(),
        edges.into_iter().map(|(a, b)| (canonical[a], canonical[b])),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelProfile {
    pub counts: Vec<usize>,
    pub degrees: Vec<usize>,
    pub probabilities: Vec<Sig17>,
    /// Exact degree histogram of the built graph (degree -> vertex count).
    pub histogram: BTreeMap<usize, usize>,
}

pub fn level_profile(net: &HierarchicalNetwork) -> LevelProfile {
    let (r, g) = (net.r(), net.g());
    let denom = (r as f64).powi(g as i32 + 1) - 1.0;
    let counts: Vec<usize> = (0..=g).map(|i| r.pow(i as u32)).collect();
    let degrees = (0..=g)
        .map(|i| level_degree(r, g, i).expect("level in range"))
        .collect();
    let probabilities = counts
        .iter()
        .map(|&c| Sig17(c as f64 * (r as f64 - 1.0) / denom))
        .collect();
    let mut histogram = BTreeMap::new();
    for d in net.graph().degrees() {
        *histogram.entry(d).or_insert(0) += 1;
    }
    LevelProfile {
        counts,
        degrees,
        probabilities,
        histogram,
    }
}
