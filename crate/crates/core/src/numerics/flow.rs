//! Edmonds–Karp maximum flow over real or rational capacities.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Sub};

use super::rational::Rational;

/// Arithmetic needed by the flow solver.
pub trait Capacity: Clone + PartialOrd + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    /// Whether a residual capacity is usable.
    fn usable(&self) -> bool;
}

impl Capacity for f64 {
    fn zero() -> Self {
        0.0
    }
    fn usable(&self) -> bool {
        *self > 1e-15
    }
}

impl Capacity for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn usable(&self) -> bool {
        self.is_positive()
    }
}

#[derive(Clone, Debug)]
struct Edge<C> {
    to: usize,
    cap: C,
    flow: C,
}

/// A directed network. Every arc is stored with its reverse residual arc.
#[derive(Clone, Debug)]
pub struct FlowNetwork<C> {
    edges: Vec<Edge<C>>,
    adj: Vec<Vec<usize>>,
    source: usize,
    sink: usize,
}

/// Result of a max-flow computation.
#[derive(Clone, Debug)]
pub struct MaxFlow<C> {
    pub value: C,
    /// Flow on each arc, in insertion order.
    pub arc_flows: Vec<C>,
    /// `source_side[v]` is true when `v` is reachable from the source in the
    /// final residual network (the source side of a minimum cut).
    pub source_side: Vec<bool>,
    /// Capacity of that cut; equals `value` by strong duality.
    pub cut_capacity: C,
}

impl<C: Capacity> FlowNetwork<C> {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            source,
            sink,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds an arc and returns its index. Negative capacities are clamped
    /// to zero.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: C) -> usize {
        let cap = if cap < C::zero() { C::zero() } else { cap };
        let id = self.edges.len() / 2;
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge {
            to,
            cap,
            flow: C::zero(),
        });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: C::zero(),
            flow: C::zero(),
        });
        id
    }

    fn residual(&self, e: usize) -> C {
        self.edges[e].cap.clone() - self.edges[e].flow.clone()
    }

    fn bfs(&self) -> Vec<Option<usize>> {
        let mut parent: Vec<Option<usize>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.edges[e].to;
                if !seen[w] && self.residual(e).usable() {
                    seen[w] = true;
                    parent[w] = Some(e);
                    if w == self.sink {
                        return parent;
                    }
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.edges[e].to;
                if !seen[w] && self.residual(e).usable() {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// Runs shortest-augmenting-path max-flow and extracts a minimum cut.
pub fn max_flow<C: Capacity>(mut net: FlowNetwork<C>) -> MaxFlow<C> {
    let mut value = C::zero();
    if net.source != net.sink {
        loop {
            let parent = net.bfs();
            if parent[net.sink].is_none() {
                break;
            }
            let mut bottleneck: Option<C> = None;
            let mut v = net.sink;
            while let Some(e) = parent[v] {
                let r = net.residual(e);
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= r => b,
                    _ => r,
                });
                v = net.edges[e ^ 1].to;
            }
            let b = bottleneck.expect("path has at least one arc");
            let mut v = net.sink;
            while let Some(e) = parent[v] {
                net.edges[e].flow = net.edges[e].flow.clone() + b.clone();
                net.edges[e ^ 1].flow = net.edges[e ^ 1].flow.clone() - b.clone();
                v = net.edges[e ^ 1].to;
            }
            value = value + b;
        }
    }
    let source_side = net.reachable();
    let mut cut_capacity = C::zero();
    for e in (0..net.edges.len()).step_by(2) {
        let from = net.edges[e ^ 1].to;
        let to = net.edges[e].to;
        if source_side[from] && !source_side[to] {
            cut_capacity = cut_capacity + net.edges[e].cap.clone();
        }
    }
    let arc_flows = (0..net.edges.len())
        .step_by(2)
        .map(|e| net.edges[e].flow.clone())
        .collect();
    MaxFlow {
        value,
        arc_flows,
        source_side,
        cut_capacity,
    }
}
