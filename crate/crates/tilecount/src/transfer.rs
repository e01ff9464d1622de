//! The weighted directed multigraph of a tile set, and exact tiling counts
//! as weight-(n + epsilon) cycle counts at the vertical-line vertex.
//!
//! Vertices are the canonical boundary profiles (index 0 is the vertical
//! line); each tile becomes one edge from its left profile to its right
//! profile, weighted by its area. Tilings of `[1 x (n + eps)]` are in
//! bijection with cycles at vertex 0 of weight `n + eps`.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{rat_int, FieldElement, IrrationalBasis, Sign};
use crate::tiles::{canonical_profiles, Profile, TileSet};

#[derive(Clone, Debug)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: FieldElement,
    /// Index of the originating tile in the tile set (or a synthetic id).
    pub tile: usize,
}

#[derive(Clone, Debug)]
pub struct TransferGraph {
    pub basis: Arc<IrrationalBasis>,
    pub vertices: Vec<Profile>,
    pub edges: Vec<Edge>,
}

impl TransferGraph {
    pub fn edges_from(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == v)
    }
}

/// Build the transfer multigraph. Each tile maps to exactly one edge;
/// parallel edges encode multiset multiplicity.
pub fn build_graph(ts: &TileSet, budget: u32) -> Result<TransferGraph> {
    ts.validate(budget)?;
    let vertices = canonical_profiles(ts, budget)?;
    let index_of = |p: &Profile| vertices.iter().position(|q| q == p).expect("profile present");
    let mut edges = Vec::with_capacity(ts.tiles.len());
    for (i, t) in ts.tiles.iter().enumerate() {
        let from = index_of(&t.left.canonical(&ts.basis, budget)?);
        let to = index_of(&t.right.canonical(&ts.basis, budget)?);
        edges.push(Edge { from, to, weight: t.area.clone(), tile: i });
    }
    Ok(TransferGraph { basis: ts.basis.clone(), vertices, edges })
}

struct CycleCounter<'a> {
    graph: &'a TransferGraph,
    budget: u32,
    memo: HashMap<(usize, FieldElement), BigUint>,
}

impl<'a> CycleCounter<'a> {
    /// Paths from `v` to vertex 0 of exactly the remaining weight.
    fn paths(&mut self, v: usize, remaining: FieldElement) -> Result<BigUint> {
        if remaining.is_zero() {
            return Ok(if v == 0 { BigUint::one() } else { BigUint::zero() });
        }
        let key = (v, remaining.clone());
        if let Some(c) = self.memo.get(&key) {
            return Ok(c.clone());
        }
        let mut total = BigUint::zero();
        let edges: Vec<(usize, FieldElement)> = self
            .graph
            .edges
            .iter()
            .filter(|e| e.from == v)
            .map(|e| (e.to, e.weight.clone()))
            .collect();
        for (to, w) in edges {
            let rest = remaining.checked_sub(&w)?;
            // Prune on the real value: a negative remainder can never reach 0
            // because all edge weights are positive.
            if !rest.is_zero() && self.graph.basis.sign_budget(&rest, self.budget)? == Sign::Negative {
                continue;
            }
            total += self.paths(to, rest)?;
        }
        self.memo.insert(key, total.clone());
        Ok(total)
    }
}

/// Exact number of tilings of `[1 x (n + eps)]`, via dynamic programming on
/// (vertex, accumulated weight) states.
pub fn count_tilings(ts: &TileSet, n: u64, budget: u32) -> Result<BigUint> {
    let graph = build_graph(ts, budget)?;
    count_tilings_graph(&graph, &ts.epsilon, n, budget)
}

pub fn count_tilings_graph(
    graph: &TransferGraph,
    epsilon: &FieldElement,
    n: u64,
    budget: u32,
) -> Result<BigUint> {
    let target = epsilon.checked_add(&FieldElement::from_rational(epsilon.dim(), rat_int(n as i64)))?;
    let mut counter = CycleCounter { graph, budget, memo: HashMap::new() };
    counter.paths(0, target)
}

/// Explicit tilings as left-to-right tile-id sequences, for oracle use at
/// small n. Errors with `LIMIT_EXCEEDED` when more than `limit` exist.
pub fn enumerate_tilings(ts: &TileSet, n: u64, limit: usize, budget: u32) -> Result<Vec<Vec<usize>>> {
    let graph = build_graph(ts, budget)?;
    let target = ts
        .epsilon
        .checked_add(&FieldElement::from_rational(ts.epsilon.dim(), rat_int(n as i64)))?;
    let mut out = Vec::new();
    let mut seq = Vec::new();
    dfs(&graph, 0, target, &mut seq, &mut out, limit, budget)?;
    Ok(out)
}

fn dfs(
    graph: &TransferGraph,
    v: usize,
    remaining: FieldElement,
    seq: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
    budget: u32,
) -> Result<()> {
    if remaining.is_zero() && v == 0 {
        if out.len() >= limit {
            return Err(Error::LimitExceeded { limit });
        }
        out.push(seq.clone());
        return Ok(());
    }
    if remaining.is_zero() {
        return Ok(());
    }
    for e in graph.edges.iter().filter(|e| e.from == v) {
        let rest = remaining.checked_sub(&e.weight)?;
        if !rest.is_zero() && graph.basis.sign_budget(&rest, budget)? == Sign::Negative {
            continue;
        }
        seq.push(e.tile);
        dfs(graph, e.to, rest, seq, out, limit, budget)?;
        seq.pop();
    }
    Ok(())
}
