//! The λ-graph of a metric space and Bellman–Ford on it.
//!
//! Each site `s` contributes two vertices, `Over(s)` and `Under(s)`.
//! `Under(s) → Over(t)` has constant weight `-d(s,t)` for every pair
//! (zero when `s = t`) and `Over(s) → Under(t)` has weight `λ·d(s,t)` for
//! `s ≠ t`. Every cycle alternates sides, so every cycle weight is strictly
//! increasing in λ.
//!
//! Edge lines are stored over integers: all distances are divided by their
//! rational gcd (the graph's `unit`). Scaling weights by a positive constant
//! preserves every cycle sign and shortest-path tree.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linfun::LinearFn;
use crate::metric::MetricSpace;
use crate::numeric::{Coeff, Frac, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Over(usize),
    Under(usize),
}

impl Vertex {
    /// `Over(s)` is `s`, `Under(s)` is `n + s`.
    pub fn index(self, site_count: usize) -> usize {
        match self {
            Vertex::Over(s) => s,
            Vertex::Under(s) => site_count + s,
        }
    }

    pub fn from_index(index: usize, site_count: usize) -> Vertex {
        if index < site_count {
            Vertex::Over(index)
        } else {
            Vertex::Under(index - site_count)
        }
    }

    pub fn site(self) -> usize {
        match self {
            Vertex::Over(s) | Vertex::Under(s) => s,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Over(s) => write!(f, "over({s})"),
            Vertex::Under(s) => write!(f, "under({s})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// In multiples of the graph's unit.
    pub weight: LinearFn<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaGraph {
    site_count: usize,
    unit: Rational,
    edges: Vec<Edge>,
}

/// Build `G(λ)`: `2n` vertices, `n²` Under→Over and `n(n-1)` Over→Under
/// edges, sorted by (from, to).
pub fn build_lambda_graph(m: &MetricSpace) -> LambdaGraph {
    let n = m.len();
    let ints = m.integer_distances();
    let d = |s: usize, t: usize| ints.dist[s * n + t].clone();
    let mut edges = Vec::with_capacity(2 * n * n - n);
    for s in 0..n {
        for t in 0..n {
            if s != t {
                edges.push(Edge {
                    from: s,
                    to: n + t,
                    weight: LinearFn::new(d(s, t), BigInt::zero()),
                });
            }
        }
    }
    for s in 0..n {
        for t in 0..n {
            edges.push(Edge {
                from: n + s,
                to: t,
                weight: LinearFn::new(BigInt::zero(), -d(s, t)),
            });
        }
    }
    LambdaGraph {
        site_count: n,
        unit: ints.unit,
        edges,
    }
}

impl LambdaGraph {
    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.site_count
    }

    pub fn unit(&self) -> &Rational {
        &self.unit
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        Vertex::from_index(index, self.site_count)
    }

    /// Edge weight in the metric's own length units.
    pub fn weight(&self, e: &Edge) -> LinearFn<Rational> {
        e.weight
            .map(|c| Some(Rational::from_integer(c.clone()) * &self.unit))
            .expect("total")
    }

    pub fn find_edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.edges
            .binary_search_by(|e| (e.from, e.to).cmp(&(from, to)))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// Largest bit length of any slope or intercept.
    pub fn coefficient_bits(&self) -> u64 {
        self.edges
            .iter()
            .flat_map(|e| [e.weight.slope(), e.weight.intercept()])
            .flatten()
            .map(|c| c.bits())
            .max()
            .unwrap_or(0)
    }

    /// Edge list with lines converted to `C`, or `None` if some coefficient
    /// does not fit.
    pub fn lines<C: Coeff>(&self) -> Option<Vec<(usize, usize, LinearFn<C>)>> {
        self.edges
            .iter()
            .map(|e| {
                Some((
                    e.from,
                    e.to,
                    e.weight.map(|c| C::from_rational(&c.to_rational()))?,
                ))
            })
            .collect()
    }

    /// Integer edge weights at `λ = p/q`, scaled by `q`.
    fn scaled_weights(&self, lambda: &Frac<BigInt>) -> Vec<(usize, usize, BigInt)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    e.from,
                    e.to,
                    e.weight.scaled_value(lambda).expect("edges are finite"),
                )
            })
            .collect()
    }
}

/// A closed walk with negative total weight at the probed λ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub vertices: Vec<Vertex>,
    /// Total weight as a function of λ, in metric length units.
    pub weight: LinearFn<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleCheck {
    Clean,
    NegCycle(CycleWitness),
}

impl CycleCheck {
    pub fn is_clean(&self) -> bool {
        matches!(self, CycleCheck::Clean)
    }
}

/// Bellman–Ford negative-cycle detection on `G(λ)`, with a witness cycle
/// taken from the predecessor graph.
pub fn has_negative_cycle(g: &LambdaGraph, lambda: &Rational) -> CycleCheck {
    let point: Frac<BigInt> = Frac::from_rational(lambda).expect("integers hold any rational");
    let weights = g.scaled_weights(&point);
    let cycle = match narrow_weights(&weights, g.vertex_count()) {
        Some(small) => find_negative_cycle(g.vertex_count(), &small),
        None => find_negative_cycle(g.vertex_count(), &weights),
    };
    match cycle {
        None => CycleCheck::Clean,
        Some(indices) => {
            let mut weight = LinearFn::zero();
            for k in 0..indices.len() {
                let e = g
                    .find_edge(indices[k], indices[(k + 1) % indices.len()])
                    .expect("predecessor links follow edges");
                weight = &weight + &g.weight(e);
            }
            CycleCheck::NegCycle(CycleWitness {
                vertices: indices.into_iter().map(|i| g.vertex(i)).collect(),
                weight,
            })
        }
    }
}

/// Converts weights to `i128` when every path sum of up to
/// `vertex_count + 1` edges stays representable with room to spare.
pub(crate) fn narrow_weights(
    weights: &[(usize, usize, BigInt)],
    vertex_count: usize,
) -> Option<Vec<(usize, usize, i128)>> {
    let max_bits = weights.iter().map(|w| w.2.bits()).max().unwrap_or(0);
    let path_bits = max_bits + usize::BITS as u64 - (vertex_count + 1).leading_zeros() as u64;
    if path_bits > 120 {
        return None;
    }
    weights
        .iter()
        .map(|(u, v, w)| Some((*u, *v, w.to_i128()?)))
        .collect()
}

/// `Some(cycle)` if the weighted digraph has a negative cycle.
///
/// All distances start at zero (an implicit source joined to every vertex),
/// so `|V| - 1` relaxation rounds settle every shortest path and round
/// `|V|` only relaxes when a negative cycle exists. Edges are scanned in
/// the given order, which makes runs deterministic.
pub fn find_negative_cycle<C: Coeff>(
    vertex_count: usize,
    edges: &[(usize, usize, C)],
) -> Option<Vec<usize>> {
    const NONE: usize = usize::MAX;
    let mut dist = vec![C::zero(); vertex_count];
    let mut pred = vec![NONE; vertex_count];
    let mut last_relaxed = NONE;
    for _round in 0..vertex_count {
        last_relaxed = NONE;
        for (u, v, w) in edges {
            let cand = dist[*u].clone() + w.clone();
            if cand < dist[*v] {
                dist[*v] = cand;
                pred[*v] = *u;
                last_relaxed = *v;
            }
        }
        if last_relaxed == NONE {
            return None;
        }
    }
    // relaxed in the detection round: walk back onto the cycle
    let mut x = last_relaxed;
    for _ in 0..vertex_count {
        if pred[x] == NONE {
            return Some(
                any_predecessor_cycle(&pred).expect("negative cycle in predecessor graph"),
            );
        }
        x = pred[x];
    }
    Some(cycle_through(&pred, x))
}

fn cycle_through(pred: &[usize], start: usize) -> Vec<usize> {
    let mut cycle = vec![start];
    let mut y = pred[start];
    while y != start {
        cycle.push(y);
        y = pred[y];
    }
    cycle.reverse();
    cycle
}

fn any_predecessor_cycle(pred: &[usize]) -> Option<Vec<usize>> {
    let n = pred.len();
    let mut state = vec![0u8; n]; // 0 unseen, 1 on current walk, 2 done
    for s in 0..n {
        let mut walk = Vec::new();
        let mut x = s;
        while x != usize::MAX && state[x] == 0 {
            state[x] = 1;
            walk.push(x);
            x = pred[x];
        }
        if x != usize::MAX && state[x] == 1 {
            return Some(cycle_through(pred, x));
        }
        for v in walk {
            state[v] = 2;
        }
    }
    None
}

/// An edge added on top of the λ-graph for a single-source computation.
/// Vertex ids at or beyond `2n` introduce new vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraEdge {
    pub from: usize,
    pub to: usize,
    pub weight: LinearFn<Rational>,
}

/// Exact shortest-path length from `source` to every vertex of `G(λ)` plus
/// `extra_edges`, in metric length units.
pub fn sssp_lengths(
    g: &LambdaGraph,
    lambda: &Rational,
    source: usize,
    extra_edges: &[ExtraEdge],
) -> Result<Vec<Rational>> {
    let vertex_count = extra_edges
        .iter()
        .flat_map(|e| [e.from + 1, e.to + 1])
        .chain([g.vertex_count(), source + 1])
        .max()
        .expect("nonempty");
    let mut weights: Vec<(usize, usize, Rational)> =
        Vec::with_capacity(g.edges.len() + extra_edges.len());
    for e in &g.edges {
        let w = e
            .weight
            .value_at_rational(lambda)
            .expect("edges are finite")
            * &g.unit;
        weights.push((e.from, e.to, w));
    }
    for e in extra_edges {
        let w = e.weight.value_at_rational(lambda).ok_or_else(|| {
            Error::Domain(format!(
                "extra edge {}->{} has infinite weight",
                e.from, e.to
            ))
        })?;
        weights.push((e.from, e.to, w));
    }
    rational_shortest_paths(vertex_count, &weights, source)
}

/// Single-source shortest paths over exact rational weights. Weights are
/// brought to a common denominator and relaxed as integers.
pub fn rational_shortest_paths(
    vertex_count: usize,
    weights: &[(usize, usize, Rational)],
    source: usize,
) -> Result<Vec<Rational>> {
    let denom = weights.iter().fold(BigInt::one(), |acc, w| {
        num_integer::lcm(acc, w.2.denom().clone())
    });
    let scaled: Vec<(usize, usize, BigInt)> = weights
        .iter()
        .map(|(u, v, w)| (*u, *v, w.numer() * (&denom / w.denom())))
        .collect();
    let lengths: Vec<Rational> = match narrow_weights(&scaled, vertex_count) {
        Some(small) => shortest_paths(vertex_count, &small, source)?
            .into_iter()
            .map(|x| x.to_rational())
            .collect(),
        None => shortest_paths(vertex_count, &scaled, source)?
            .into_iter()
            .map(|x| x.to_rational())
            .collect(),
    };
    let denom = Rational::from_integer(denom);
    Ok(lengths.into_iter().map(|l| l / &denom).collect())
}

/// Bellman–Ford from a single source with early exit.
pub fn shortest_paths<C: Coeff>(
    vertex_count: usize,
    edges: &[(usize, usize, C)],
    source: usize,
) -> Result<Vec<C>> {
    let mut dist: Vec<Option<C>> = vec![None; vertex_count];
    dist[source] = Some(C::zero());
    let relax = |dist: &mut Vec<Option<C>>| {
        let mut changed = false;
        for (u, v, w) in edges {
            if let Some(du) = &dist[*u] {
                let cand = du.clone() + w.clone();
                if dist[*v].as_ref().is_none_or(|dv| &cand < dv) {
                    dist[*v] = Some(cand);
                    changed = true;
                }
            }
        }
        changed
    };
    let mut settled = false;
    for _ in 1..vertex_count {
        if !relax(&mut dist) {
            settled = true;
            break;
        }
    }
    if !settled && relax(&mut dist) {
        return Err(Error::NegativeCycle);
    }
    dist.into_iter()
        .enumerate()
        .map(|(v, d)| d.ok_or(Error::Unreachable(v)))
        .collect()
}

/// Evaluated weights `m·p + b·q` of `lines` at `λ = p/q`.
pub(crate) fn evaluate_lines<C: Coeff>(
    lines: &[(usize, usize, LinearFn<C>)],
    lambda: &Frac<C>,
) -> Vec<(usize, usize, C)> {
    lines
        .iter()
        .map(|(u, v, l)| (*u, *v, l.scaled_value(lambda).expect("edges are finite")))
        .collect()
}

/// Sign of every cycle is decided by `λ` alone; true if some cycle is
/// negative at `λ`.
pub(crate) fn negative_at<C: Coeff>(
    lines: &[(usize, usize, LinearFn<C>)],
    vertex_count: usize,
    lambda: &Frac<C>,
) -> bool {
    find_negative_cycle(vertex_count, &evaluate_lines(lines, lambda)).is_some()
}
