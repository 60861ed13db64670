//! Edge sets `A ⊂ {(i, j) : 1 ≤ i < j ≤ k+1}` selecting which distances of a
//! `(k+1)`-point configuration are constrained.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A nonempty set of vertex pairs over `k + 1` vertices, 1-based, `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EdgeSet {
    k: usize,
    edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    /// Normalizes each pair to `i < j` and deduplicates.
    pub fn new(k: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<EdgeSet> {
        if k < 1 {
            return Err(Error::InvalidEdges("k must be at least 1".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (i, j) = (a.min(b), a.max(b));
            if i == j {
                return Err(Error::InvalidEdges(format!("loop ({a},{b})")));
            }
            if i < 1 || j > k + 1 {
                return Err(Error::InvalidEdges(format!(
                    "({a},{b}) outside 1..={}",
                    k + 1
                )));
            }
            set.insert((i, j));
        }
        if set.is_empty() {
            return Err(Error::InvalidEdges("edge set is empty".into()));
        }
        Ok(EdgeSet {
            k,
            edges: set.into_iter().collect(),
        })
    }

    /// `{(1,2), (2,3), ..., (k,k+1)}`.
    pub fn path(k: usize) -> Result<EdgeSet> {
        EdgeSet::new(k, (1..=k).map(|i| (i, i + 1)))
    }

    /// `{(1,2), ..., (k-1,k), (k,1)}` on `k` vertices, so the resulting set has
    /// arity `k` (its own `k()` is `k - 1`).
    pub fn cycle(k: usize) -> Result<EdgeSet> {
        if k < 3 {
            return Err(Error::InvalidEdges(format!(
                "a cycle needs at least 3 vertices, got {k}"
            )));
        }
        EdgeSet::new(k - 1, (1..k).map(|i| (i, i + 1)).chain([(k, 1)]))
    }

    /// `{(1,2), (1,3), ..., (1,k+1)}`.
    pub fn star(k: usize) -> Result<EdgeSet> {
        EdgeSet::new(k, (2..=k + 1).map(|j| (1, j)))
    }

    /// Every pair over `k + 1` vertices.
    pub fn complete(k: usize) -> Result<EdgeSet> {
        EdgeSet::new(
            k,
            (1..=k + 1).flat_map(|i| (i + 1..=k + 1).map(move |j| (i, j))),
        )
    }

    /// Parses `path`, `cycle`, `star`, `triangle`, `complete` or an explicit
    /// list `edges:1-2,2-3`. For `cycle` the parameter is the number of
    /// vertices; otherwise it is `k`.
    pub fn parse(spec: &str, k: usize) -> Result<EdgeSet> {
        match spec.trim() {
            "path" => EdgeSet::path(k),
            "cycle" => EdgeSet::cycle(k),
            "star" => EdgeSet::star(k),
            "complete" => EdgeSet::complete(k),
            "triangle" => EdgeSet::new(k.max(2), [(1, 2), (1, 3), (2, 3)]),
            other => {
                let list = other
                    .strip_prefix("edges:")
                    .ok_or_else(|| Error::InvalidEdges(format!("unknown edge spec {other:?}")))?;
                let mut pairs = Vec::new();
                for item in list.split(',').filter(|s| !s.trim().is_empty()) {
                    let (a, b) = item.split_once('-').ok_or_else(|| {
                        Error::InvalidEdges(format!("expected i-j, got {item:?}"))
                    })?;
                    let parse = |s: &str| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::InvalidEdges(format!("{s:?}: {e}")))
                    };
                    pairs.push((parse(a)?, parse(b)?));
                }
                let top = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
                EdgeSet::new(k.max(top.saturating_sub(1)), pairs)
            }
        }
    }

    /// The configuration has `k + 1` points.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.k + 1
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// 0-based vertex order for backtracking: breadth-first through each
    /// connected component, components by smallest vertex. Every vertex after
    /// the first in its component has an already placed neighbour.
    pub fn placement_order(&self) -> Vec<usize> {
        let n = self.arity();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &self.edges {
            adjacency[i - 1].push(j - 1);
            adjacency[j - 1].push(i - 1);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut head = order.len();
            order.push(root);
            while head < order.len() {
                let v = order[head];
                head += 1;
                for &w in &adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        order.push(w);
                    }
                }
            }
        }
        order
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|(i, j)| format!("{i}-{j}")).collect();
        write!(f, "edges:{}", parts.join(","))
    }
}
