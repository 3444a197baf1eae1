//! Unit-capacity max-flow used for vertex and edge connectivity.

use std::collections::VecDeque;

use crate::graph::Graph;

#[derive(Clone)]
struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        Self {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    /// Arc `u -> v` with capacity `c`; its partner (index ^ 1) is `v -> u`
    /// with capacity `back`.
    fn add_pair(&mut self, u: usize, v: usize, c: u32, back: u32) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(back);
    }

    /// Augments along shortest paths until the flow reaches `limit` or no path
    /// remains. Consumes residual capacity in place.
    fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        let n = self.head.len();
        let mut flow = 0;
        let mut pred = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        while flow < limit {
            pred.iter_mut().for_each(|p| *p = usize::MAX);
            queue.clear();
            queue.push_back(s);
            let mut found = false;
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    let w = self.to[e];
                    if self.cap[e] > 0 && w != s && pred[w] == usize::MAX {
                        pred[w] = e;
                        if w == t {
                            found = true;
                            break 'bfs;
                        }
                        queue.push_back(w);
                    }
                }
            }
            if !found {
                break;
            }
            let mut bottleneck = limit - flow;
            let mut v = t;
            while v != s {
                let e = pred[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = pred[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            flow += bottleneck;
        }
        flow
    }
}

/// Minimum number of edges whose removal disconnects `g`.
pub(crate) fn edge_connectivity(g: &Graph) -> usize {
    let n = g.n();
    if n < 2 {
        return 0;
    }
    let mut base = FlowNet::new(n);
    for &(u, v) in g.edges() {
        base.add_pair(u, v, 1, 1);
    }
    let mut best = g.degrees().into_iter().min().unwrap_or(0) as u32;
    for t in 1..n {
        if best == 0 {
            break;
        }
        let mut net = base.clone();
        best = best.min(net.max_flow(0, t, best));
    }
    best as usize
}

/// Minimum number of vertices whose removal disconnects `g`; `n - 1` for the
/// complete graph.
pub(crate) fn vertex_connectivity(g: &Graph) -> usize {
    let n = g.n();
    if g.m() == n * (n - 1) / 2 {
        return n.saturating_sub(1);
    }
    // Vertex v becomes in = 2v, out = 2v + 1 joined by a unit arc.
    let big = n as u32;
    let mut base = FlowNet::new(2 * n);
    for v in 0..n {
        base.add_pair(2 * v, 2 * v + 1, 1, 0);
    }
    for &(u, v) in g.edges() {
        base.add_pair(2 * u + 1, 2 * v, big, 0);
        base.add_pair(2 * v + 1, 2 * u, big, 0);
    }
    let mut best = g.degrees().into_iter().min().unwrap_or(0);
    // A minimum separator S misses one of the first |S| + 1 vertices; the
    // lowest-indexed such vertex is separated from some higher-indexed one.
    let mut i = 0;
    while i <= best && i < n {
        for j in i + 1..n {
            if g.has_edge(i, j) {
                continue;
            }
            let mut net = base.clone();
            let k = net.max_flow(2 * i + 1, 2 * j, best as u32) as usize;
            best = best.min(k);
        }
        i += 1;
    }
    best
}
