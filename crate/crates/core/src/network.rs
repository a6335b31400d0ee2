//! Directed communication graphs and the stochastic packet-delivery model.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::NetworkError;
use crate::Position;

/// A directed communication graph. Edge `i -> j` means robot `i` sends
/// messages to robot `j`. Vertices are dense indices `0..N` (the simulator
/// maps robot ids onto them per iteration).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    /// Out-neighbor lists, each sorted ascending.
    out: Vec<Vec<usize>>,
    /// In-neighbor lists, each sorted ascending.
    incoming: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds a graph from an explicit edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, NetworkError> {
        let mut out = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for &(src, dst) in edges {
            if src >= n || dst >= n {
                return Err(NetworkError::EdgeOutOfRange { src, dst, n });
            }
            if src == dst {
                return Err(NetworkError::SelfLoop(src));
            }
            out[src].push(dst);
            incoming[dst].push(src);
        }
        for list in out.iter_mut().chain(incoming.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { n, out, incoming })
    }

    /// Complete digraph on `n` vertices (every ordered pair, no self-loops).
    pub fn all_to_all(n: usize) -> Self {
        let out: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        let incoming = out.clone();
        Self { n, out, incoming }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Edges in deterministic `(src, dst)` order. Delivery sampling and CSV
    /// export both iterate in this order, which keeps seeded runs replayable.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(src, dsts)| dsts.iter().map(move |&dst| (src, dst)))
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.out[src].binary_search(&dst).is_ok()
    }
}

/// Radius-based topology: edge `i -> j` iff `i != j` and
/// `||s_i - s_j|| <= radius`. Symmetric by construction (both directed
/// edges are present).
pub fn build_radius_graph(positions: &[Position], radius: f64) -> Digraph {
    assert!(radius > 0.0, "communication radius must be positive");
    let n = positions.len();
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if (positions[i] - positions[j]).norm() <= radius {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    for list in &mut out {
        list.sort_unstable();
    }
    let incoming = out.clone();
    Digraph { n, out, incoming }
}

/// Out-Laplacian `L = D_out - A_adj`, with `A_ij = 1` iff edge `i -> j`.
/// Rows sum to zero by construction.
pub fn out_laplacian(g: &Digraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = g.out_degree(i) as f64;
        for &j in g.out_neighbors(i) {
            m[(i, j)] = -1.0;
        }
    }
    m
}

/// True iff every vertex reaches every other vertex.
///
/// Checked with a forward and a reverse traversal from vertex 0: the graph
/// is strongly connected iff vertex 0 reaches everyone and everyone reaches
/// vertex 0.
pub fn strongly_connected(g: &Digraph) -> bool {
    let n = g.vertex_count();
    if n <= 1 {
        return true;
    }
    let reach = |neighbors: &dyn Fn(usize) -> Vec<usize>| -> bool {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    };
    reach(&|v| g.out_neighbors(v).to_vec()) && reach(&|v| g.in_neighbors(v).to_vec())
}

/// Independent Bernoulli packet drops with a seeded stream.
///
/// Each directed message is dropped with probability `drop_rate`,
/// independently per edge per step. The model owns its RNG stream, so runs
/// are deterministic given the seed and the sequence of calls.
#[derive(Debug, Clone)]
pub struct PacketLossModel {
    drop_rate: f64,
    rng: ChaCha8Rng,
}

impl PacketLossModel {
    pub fn new(drop_rate: f64, rng: ChaCha8Rng) -> Result<Self, NetworkError> {
        if !(0.0..1.0).contains(&drop_rate) {
            return Err(NetworkError::InvalidDropRate(drop_rate));
        }
        Ok(Self { drop_rate, rng })
    }

    pub fn drop_rate(&self) -> f64 {
        self.drop_rate
    }

    /// Samples this step's delivered edges, in the graph's edge order.
    /// One uniform draw is consumed per edge even at zero loss, so delivery
    /// streams stay aligned across configurations that differ only in
    /// estimator options.
    pub fn sample_delivery(&mut self, g: &Digraph) -> Vec<(usize, usize)> {
        let mut delivered = Vec::with_capacity(g.edge_count());
        for edge in g.edges() {
            if self.rng.random::<f64>() >= self.drop_rate {
                delivered.push(edge);
            }
        }
        delivered
    }
}

/// Writes the edge list as `src,dst` CSV (debugging aid).
pub fn edges_to_csv(g: &Digraph) -> String {
    let mut s = String::from("src,dst\n");
    for (src, dst) in g.edges() {
        s.push_str(&format!("{src},{dst}\n"));
    }
    s
}
