//! Max-flow / min-cut over exact rational capacities, so the duality check
//! is an identity rather than a tolerance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct FlowEdge {
    to: usize,
    rev: usize,
    cap: BigRational,
}

/// Dinic solver on a directed graph (undirected edges are added as a pair).
pub struct FlowNetwork {
    adj: Vec<Vec<FlowEdge>>,
}

/// Certificate of one max-flow run: flow value, cut value and the primal
/// edge ids crossing the cut. Flow and cut agree exactly by construction.
#[derive(Debug)]
pub struct FlowCut {
    pub flow: f64,
    pub cut: f64,
    pub flow_exact_equals_cut: bool,
    /// Indices (as tagged on add_undirected_edge) of saturated cut edges.
    pub cut_edges: Vec<usize>,
}

pub struct EdgeTag {
    node_a: usize,
    edge_index: usize,
    slot: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes] }
    }

    fn rational(cap: f64) -> Result<BigRational> {
        if !(cap >= 0.0) || !cap.is_finite() {
            return Err(Error::Input(format!("invalid capacity {cap}")));
        }
        BigRational::from_float(cap)
            .ok_or_else(|| Error::Input(format!("capacity {cap} not representable")))
    }

    /// Undirected capacity between two nodes; returns a tag used to report
    /// cut membership under the caller's edge numbering `edge_index`.
    pub fn add_undirected_edge(
        &mut self,
        a: usize,
        b: usize,
        cap: f64,
        edge_index: usize,
    ) -> Result<EdgeTag> {
        let c = Self::rational(cap)?;
        let ia = self.adj[a].len();
        let ib = self.adj[b].len();
        self.adj[a].push(FlowEdge { to: b, rev: ib, cap: c.clone() });
        self.adj[b].push(FlowEdge { to: a, rev: ia, cap: c });
        Ok(EdgeTag { node_a: a, edge_index, slot: ia })
    }

    /// Max flow from source to sink; the cut is recovered from residual
    /// reachability and compared to the flow exactly.
    pub fn max_flow_min_cut(
        &mut self,
        source: usize,
        sink: usize,
        tags: &[EdgeTag],
    ) -> Result<FlowCut> {
        let n = self.adj.len();
        let mut flow = BigRational::zero();
        // capture original capacities for cut accounting
        let orig: Vec<Vec<BigRational>> =
            self.adj.iter().map(|es| es.iter().map(|e| e.cap.clone()).collect()).collect();
        loop {
            // BFS levels on the residual graph
            let mut level = vec![usize::MAX; n];
            let mut queue = std::collections::VecDeque::new();
            level[source] = 0;
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                for e in &self.adj[u] {
                    if e.cap.is_positive() && level[e.to] == usize::MAX {
                        level[e.to] = level[u] + 1;
                        queue.push_back(e.to);
                    }
                }
            }
            if level[sink] == usize::MAX {
                break;
            }
            // blocking flow by iterative DFS
            let mut iter = vec![0usize; n];
            loop {
                let pushed = self.dfs(source, sink, None, &level, &mut iter);
                match pushed {
                    Some(f) if f.is_positive() => flow += f,
                    _ => break,
                }
            }
        }
        // residual reachability from the source
        let mut reach = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        reach[source] = true;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for e in &self.adj[u] {
                if e.cap.is_positive() && !reach[e.to] {
                    reach[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        if reach[sink] {
            return Err(Error::Numerical("flow terminated with sink still reachable".into()));
        }
        let mut cut = BigRational::zero();
        let mut cut_edges = Vec::new();
        for tag in tags {
            let a = tag.node_a;
            let e = &self.adj[a][tag.slot];
            let b = e.to;
            if reach[a] != reach[b] {
                cut += orig[a][tag.slot].clone();
                cut_edges.push(tag.edge_index);
            }
        }
        let equal = cut == flow;
        Ok(FlowCut {
            flow: big_to_f64(&flow),
            cut: big_to_f64(&cut),
            flow_exact_equals_cut: equal,
            cut_edges,
        })
    }

    fn dfs(
        &mut self,
        u: usize,
        sink: usize,
        limit: Option<BigRational>,
        level: &[usize],
        iter: &mut [usize],
    ) -> Option<BigRational> {
        if u == sink {
            return limit;
        }
        while iter[u] < self.adj[u].len() {
            let (to, cap) = {
                let e = &self.adj[u][iter[u]];
                (e.to, e.cap.clone())
            };
            if cap.is_positive() && level[u] + 1 == level[to] {
                let pass = match &limit {
                    Some(l) => Some(l.clone().min(cap.clone())),
                    None => Some(cap.clone()),
                };
                if let Some(f) = self.dfs(to, sink, pass, level, iter) {
                    if f.is_positive() {
                        let rev = {
                            let e = &mut self.adj[u][iter[u]];
                            e.cap -= f.clone();
                            e.rev
                        };
                        self.adj[to][rev].cap += f.clone();
                        return Some(f);
                    }
                }
            }
            iter[u] += 1;
        }
        Some(BigRational::zero())
    }
}

fn big_to_f64(r: &BigRational) -> f64 {
    ratio_to_f64(r.numer(), r.denom())
}

fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_bottleneck() {
        // s -1.5- a -0.5- t and s -0.25- t
        let mut net = FlowNetwork::new(3);
        let mut tags = Vec::new();
        tags.push(net.add_undirected_edge(0, 1, 1.5, 0).unwrap());
        tags.push(net.add_undirected_edge(1, 2, 0.5, 1).unwrap());
        tags.push(net.add_undirected_edge(0, 2, 0.25, 2).unwrap());
        let cut = net.max_flow_min_cut(0, 2, &tags).unwrap();
        assert!(cut.flow_exact_equals_cut);
        assert!((cut.flow - 0.75).abs() < 1e-15);
        assert_eq!(cut.cut_edges, vec![1, 2]);
    }
}
