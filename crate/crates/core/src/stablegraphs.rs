//! Colored stable graphs and the graph-sum side of the theorem.
//!
//! Two independent enumerators: [`enumerate`] builds graphs by repeated
//! degeneration of the smooth curve, [`enumerate_brute`] generates every
//! vertex/edge/leg configuration and keeps the canonical representatives.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::intersect::{vertex_weight, IntersectError};
use crate::localdata::{LocalDataError, LocalSpectralData};
use crate::recursion::{dimension, Slot};
use crate::ring::{factorial, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error(transparent)]
    LocalData(#[from] LocalDataError),
    #[error("B̂ table known to total degree {known}, graph sum needs {requested}")]
    TableTooShort { requested: i64, known: i64 },
    #[error(transparent)]
    Times(#[from] IntersectError),
    #[error("leg colors/degrees must have length n = {0}")]
    BadLegs(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub genus: usize,
    pub color: usize,
    /// Leg labels `0..n`, sorted.
    pub legs: Vec<usize>,
}

/// A connected stable graph with legs `0..n` and vertex colors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColoredStableGraph {
    pub vertices: Vec<Vertex>,
    /// Edges as vertex pairs `(u, v)`, `u <= v`, sorted; loops have `u == v`.
    pub edges: Vec<(usize, usize)>,
    /// Automorphisms fixing the legs, counting half-edge swaps.
    pub aut: u64,
}

impl ColoredStableGraph {
    pub fn valence(&self, v: usize) -> usize {
        self.vertices[v].legs.len() + self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum::<usize>()
    }

    pub fn genus(&self) -> usize {
        let betti = self.edges.len() + 1 - self.vertices.len();
        self.vertices.iter().map(|v| v.genus).sum::<usize>() + betti
    }

    pub fn is_smooth(&self) -> bool {
        self.edges.is_empty()
    }
}

type Shape = (Vec<Vertex>, Vec<(usize, usize)>);

fn permute(shape: &Shape, perm: &[usize]) -> Shape {
    // perm[old] = new
    let mut verts = vec![shape.0[0].clone(); shape.0.len()];
    for (old, v) in shape.0.iter().enumerate() {
        verts[perm[old]] = v.clone();
    }
    let mut edges: Vec<(usize, usize)> = shape
        .1
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (perm[a], perm[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    edges.sort();
    (verts, edges)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for x in 0..n {
        let mut next = Vec::new();
        for p in out {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Canonical representative under vertex relabeling, and the order of the
/// automorphism group fixing legs.
fn canonicalize(shape: &Shape) -> ColoredStableGraph {
    let perms = permutations(shape.0.len());
    let images: Vec<Shape> = perms.iter().map(|p| permute(shape, p)).collect();
    let best = images.iter().min().unwrap().clone();
    let vertex_auts = images.iter().filter(|s| **s == *shape).count() as u64;
    let mut mult: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for e in &best.1 {
        *mult.entry(*e).or_default() += 1;
    }
    let mut aut = vertex_auts;
    for (&(a, b), &m) in &mult {
        let f = factorial(m).to_string().parse::<u64>().unwrap();
        aut *= f;
        if a == b {
            aut *= 1 << m;
        }
    }
    ColoredStableGraph { vertices: best.0, edges: best.1, aut }
}

fn is_stable_shape(shape: &Shape) -> bool {
    let g = ColoredStableGraph { vertices: shape.0.clone(), edges: shape.1.clone(), aut: 1 };
    (0..shape.0.len()).all(|v| 2 * g.vertices[v].genus + g.valence(v) > 2)
}

fn connected(nv: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; nv];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn with_colors(uncolored: &BTreeSet<Shape>, beta: usize) -> Vec<ColoredStableGraph> {
    let mut out = BTreeSet::new();
    for shape in uncolored {
        let nv = shape.0.len();
        let total = beta.pow(nv as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = shape.clone();
            for v in s.0.iter_mut() {
                v.color = c % beta;
                c /= beta;
            }
            out.insert(canonicalize(&s));
        }
    }
    out.into_iter().collect()
}

/// Colored stable graphs of type `(g, n)` with colors `0..beta`, by
/// degeneration from the smooth curve.
pub fn enumerate(g: usize, n: usize, beta: usize) -> Vec<ColoredStableGraph> {
    if 2 * g + n <= 2 || beta == 0 {
        return Vec::new();
    }
    let smooth: Shape = (vec![Vertex { genus: g, color: 0, legs: (0..n).collect() }], Vec::new());
    let mut seen: BTreeSet<Shape> = BTreeSet::new();
    let start = canonicalize(&smooth);
    let mut frontier = vec![(start.vertices, start.edges)];
    while let Some(s) = frontier.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        for d in degenerations(&s) {
            let c = canonicalize(&d);
            let key = (c.vertices, c.edges);
            if !seen.contains(&key) {
                frontier.push(key);
            }
        }
    }
    with_colors(&seen, beta)
}

/// One-step degenerations: pinch a handle into a loop, or split a vertex
/// in two joined by a new edge (redistributing its legs and half-edges).
fn degenerations(s: &Shape) -> Vec<Shape> {
    let mut out = Vec::new();
    let nv = s.0.len();
    for v in 0..nv {
        if s.0[v].genus >= 1 {
            let mut t = s.clone();
            t.0[v].genus -= 1;
            t.1.push((v, v));
            t.1.sort();
            out.push(t);
        }
        // half-edges at v: (edge index, end)
        let mut halves = Vec::new();
        for (ei, &(a, b)) in s.1.iter().enumerate() {
            if a == v {
                halves.push((ei, 0));
            }
            if b == v {
                halves.push((ei, 1));
            }
        }
        let legs = &s.0[v].legs;
        let items = legs.len() + halves.len();
        let w = nv;
        for mask in 0..(1u64 << items) {
            for g1 in 0..=s.0[v].genus {
                let g2 = s.0[v].genus - g1;
                let mut t = s.clone();
                let mut legs1 = Vec::new();
                let mut legs2 = Vec::new();
                for (k, &l) in legs.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        legs2.push(l);
                    } else {
                        legs1.push(l);
                    }
                }
                for (k, &(ei, end)) in halves.iter().enumerate() {
                    if mask >> (legs.len() + k) & 1 == 1 {
                        let e = &mut t.1[ei];
                        if end == 0 {
                            e.0 = w;
                        } else {
                            e.1 = w;
                        }
                    }
                }
                for e in t.1.iter_mut() {
                    *e = (e.0.min(e.1), e.0.max(e.1));
                }
                t.0[v] = Vertex { genus: g1, color: 0, legs: legs1 };
                t.0.push(Vertex { genus: g2, color: 0, legs: legs2 });
                t.1.push((v, w));
                t.1.sort();
                if is_stable_shape(&t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// The same graphs by exhaustive generation: every vertex count, genus
/// vector, leg placement and edge multiset, filtered for connectedness,
/// stability and total genus, then reduced to canonical forms.
pub fn enumerate_brute(g: usize, n: usize, beta: usize) -> Vec<ColoredStableGraph> {
    if 2 * g + n <= 2 || beta == 0 {
        return Vec::new();
    }
    let max_v = 2 * g + n - 2;
    let max_e = 3 * g + n - 3;
    let mut shapes = BTreeSet::new();
    for nv in 1..=max_v {
        let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|a| (a..nv).map(move |b| (a, b))).collect();
        for ne in nv - 1..=max_e {
            if ne + 1 - nv > g {
                continue;
            }
            let genus_left = g - (ne + 1 - nv);
            for edges in multisets(&pairs, ne) {
                if !connected(nv, &edges) {
                    continue;
                }
                for genera in compositions(genus_left, nv) {
                    for code in 0..nv.pow(n as u32) {
                        let mut verts: Vec<Vertex> =
                            genera.iter().map(|&gv| Vertex { genus: gv, color: 0, legs: Vec::new() }).collect();
                        let mut c = code;
                        for leg in 0..n {
                            verts[c % nv].legs.push(leg);
                            c /= nv;
                        }
                        let s = (verts, edges.clone());
                        if is_stable_shape(&s) {
                            let cs = canonicalize(&s);
                            shapes.insert((cs.vertices, cs.edges));
                        }
                    }
                }
            }
        }
    }
    with_colors(&shapes, beta)
}

fn multisets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn rec<T: Clone>(items: &[T], start: usize, k: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            rec(items, i, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, 0, k, &mut Vec::new(), &mut out);
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// `B̂` entries read by the graph sum, cached from the data; individual
/// entries can be overwritten to inject faults.
#[derive(Debug, Clone, PartialEq)]
pub struct BhatTable<S> {
    entries: BTreeMap<(usize, i64, usize, i64), S>,
    order: i64,
}

impl<S: Scalar> BhatTable<S> {
    /// All `B̂_{i,k;j,l}` with `k + l <= order`.
    pub fn from_data(data: &LocalSpectralData<S>, order: i64) -> Result<Self, GraphError> {
        let beta = data.branchpoints();
        let mut entries = BTreeMap::new();
        for i in 0..beta {
            for j in 0..beta {
                for k in 0..=order {
                    for l in 0..=order - k {
                        entries.insert((i, k, j, l), data.bhat(i, k, j, l)?);
                    }
                }
            }
        }
        Ok(BhatTable { entries, order })
    }

    /// Table large enough for every graph of type `(g, n)`.
    pub fn for_type(data: &LocalSpectralData<S>, g: usize, n: usize) -> Result<Self, GraphError> {
        Self::from_data(data, 2 * dimension(g, n).max(0))
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn get(&self, i: usize, k: i64, j: usize, l: i64) -> Result<S, GraphError> {
        self.entries
            .get(&(i, k, j, l))
            .cloned()
            .ok_or(GraphError::TableTooShort { requested: k + l, known: self.order })
    }

    /// Overwrite `B̂_{i,k;j,l}` and its transpose.
    pub fn with_entry(mut self, i: usize, k: i64, j: usize, l: i64, value: S) -> Self {
        self.entries.insert((j, l, i, k), value.clone());
        self.entries.insert((i, k, j, l), value);
        self
    }
}

/// Which global prefactor multiplies the graph sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prefactor {
    /// `2^{3g-3+n}`.
    Stated,
    /// `2^{3g-3+n} 4^{-(2g-2+n)}`.
    QuarterPerVertex,
}

/// The normalization fixed by calibration: the exponent sign of the unit in
/// the vertex weights, and the global prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Normalization {
    pub sign: i64,
    pub prefactor: Prefactor,
}

impl Normalization {
    pub fn factor<S: Scalar>(&self, g: usize, n: usize) -> S {
        let d = dimension(g, n);
        let chi = 2 * g as i64 - 2 + n as i64;
        let e = match self.prefactor {
            Prefactor::Stated => d,
            Prefactor::QuarterPerVertex => d - 2 * chi,
        };
        let p = BigRational::from_integer(BigInt::one() << e.unsigned_abs() as usize);
        S::from_rational(&if e >= 0 { p } else { p.recip() })
    }
}

/// `prefactor · Σ_Γ (1/|Aut Γ|) Π_v vertex weights Π_e B̂`, for legs with the
/// given `(color, degree)` slots.
pub fn theorem_rhs<S: Scalar>(
    data: &LocalSpectralData<S>,
    bhat: &BhatTable<S>,
    graphs: &[ColoredStableGraph],
    g: usize,
    legs: &[Slot],
    norm: Normalization,
) -> Result<S, GraphError> {
    let n = legs.len();
    let terms = graphs
        .par_iter()
        .filter(|gr| {
            gr.vertices.iter().all(|v| v.legs.iter().all(|&l| legs[l].0 == v.color))
                && gr.vertices.iter().map(|v| v.legs.len()).sum::<usize>() == n
        })
        .map(|gr| graph_term(data, bhat, gr, legs, norm))
        .collect::<Result<Vec<S>, GraphError>>()?;
    let sum = terms.into_iter().fold(S::zero(), |a, t| a.add_ref(&t));
    Ok(sum.mul_ref(&norm.factor(g, n)))
}

fn graph_term<S: Scalar>(
    data: &LocalSpectralData<S>,
    bhat: &BhatTable<S>,
    gr: &ColoredStableGraph,
    legs: &[Slot],
    norm: Normalization,
) -> Result<S, GraphError> {
    let nv = gr.vertices.len();
    // budget left at each vertex after its legs
    let mut budget: Vec<i64> = (0..nv)
        .map(|v| {
            let vert = &gr.vertices[v];
            dimension(vert.genus, gr.valence(v)) - vert.legs.iter().map(|&l| legs[l].1).sum::<i64>()
        })
        .collect();
    if budget.iter().any(|&b| b < 0) {
        return Ok(S::zero());
    }
    let ne = gr.edges.len();
    let mut half = vec![0i64; 2 * ne];
    let mut total = S::zero();
    assign(data, bhat, gr, legs, norm, 0, &mut half, &mut budget, &mut total)?;
    Ok(total.scale(&BigRational::new(BigInt::one(), BigInt::from(gr.aut))))
}

#[allow(clippy::too_many_arguments)]
fn assign<S: Scalar>(
    data: &LocalSpectralData<S>,
    bhat: &BhatTable<S>,
    gr: &ColoredStableGraph,
    legs: &[Slot],
    norm: Normalization,
    pos: usize,
    half: &mut Vec<i64>,
    budget: &mut Vec<i64>,
    total: &mut S,
) -> Result<(), GraphError> {
    if pos == half.len() {
        *total = total.add_ref(&evaluate(data, bhat, gr, legs, norm, half)?);
        return Ok(());
    }
    let (a, b) = gr.edges[pos / 2];
    let v = if pos.is_multiple_of(2) { a } else { b };
    for d in 0..=budget[v] {
        half[pos] = d;
        budget[v] -= d;
        assign(data, bhat, gr, legs, norm, pos + 1, half, budget, total)?;
        budget[v] += d;
    }
    Ok(())
}

fn evaluate<S: Scalar>(
    data: &LocalSpectralData<S>,
    bhat: &BhatTable<S>,
    gr: &ColoredStableGraph,
    legs: &[Slot],
    norm: Normalization,
    half: &[i64],
) -> Result<S, GraphError> {
    let mut w = S::one();
    for (e, &(a, b)) in gr.edges.iter().enumerate() {
        let ca = gr.vertices[a].color;
        let cb = gr.vertices[b].color;
        let bh = bhat.get(ca, half[2 * e], cb, half[2 * e + 1])?;
        if bh.is_zero() {
            return Ok(bh);
        }
        w = w.mul_ref(&bh);
    }
    for (v, vert) in gr.vertices.iter().enumerate() {
        let mut degs: Vec<i64> = vert.legs.iter().map(|&l| legs[l].1).collect();
        for (e, &(a, b)) in gr.edges.iter().enumerate() {
            if a == v {
                degs.push(half[2 * e]);
            }
            if b == v {
                degs.push(half[2 * e + 1]);
            }
        }
        let p = &data.points[vert.color];
        let vw = vertex_weight(vert.genus, &degs, &p.unit, &p.times, norm.sign)?;
        if vw.is_zero() {
            return Ok(vw);
        }
        w = w.mul_ref(&vw);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate(0, 3, 2).len(), 2);
        let g04 = enumerate(0, 4, 2);
        assert_eq!(g04.iter().filter(|g| g.is_smooth()).count(), 2);
        assert_eq!(g04.iter().filter(|g| !g.is_smooth()).count(), 12);
        let g11 = enumerate(1, 1, 1);
        assert_eq!(g11.len(), 2);
        let lp = g11.iter().find(|g| !g.is_smooth()).unwrap();
        assert_eq!(lp.aut, 2);
    }

    #[test]
    fn generators_agree() {
        for (g, n, b) in [(0, 5, 1), (1, 2, 1), (2, 0, 1), (1, 3, 2), (2, 1, 1)] {
            let a = enumerate(g, n, b);
            let c = enumerate_brute(g, n, b);
            assert_eq!(a, c, "({g},{n},{b})");
            assert!(a.iter().all(|gr| gr.genus() == g));
        }
        assert_eq!(enumerate(2, 0, 1).len(), 7);
    }
}
