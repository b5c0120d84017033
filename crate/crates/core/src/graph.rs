//! Arbitrary-graph Ising IR. Every edge carries the fixed coupling iπ/4.

use crate::error::{Error, Result};
use crate::field::{canonicalize_field, ComplexField, Prefactor};
use std::collections::{BTreeMap, BTreeSet};

pub type VId = u32;

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub field: ComplexField,
    pub pinned: Option<i8>,
    /// Provenance tag, e.g. `term:3` or `constraint:0`. Not part of Z.
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct IsingGraph {
    vertices: BTreeMap<VId, Vertex>,
    adj: BTreeMap<VId, BTreeSet<VId>>,
    next_id: VId,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Diagnostics {
    pub n_vertices: usize,
    pub n_edges: usize,
    /// `degree_histogram[d]` = number of vertices of degree d.
    pub degree_histogram: Vec<usize>,
    pub max_degree: usize,
    pub pinned: usize,
    pub components: usize,
    /// Euler bound |E| > 3|V| − 6 proves the graph nonplanar.
    pub nonplanar: bool,
}

impl IsingGraph {
    pub fn new() -> Self {
        IsingGraph::default()
    }

    pub fn add_vertex(&mut self, field: ComplexField) -> VId {
        let id = self.next_id;
        self.insert_vertex(id, field, None).expect("fresh id");
        id
    }

    pub fn add_vertex_with_origin(&mut self, field: ComplexField, origin: impl Into<String>) -> VId {
        let id = self.add_vertex(field);
        self.vertices.get_mut(&id).unwrap().origin = origin.into();
        id
    }

    pub fn insert_vertex(&mut self, id: VId, field: ComplexField, pinned: Option<i8>) -> Result<()> {
        if self.vertices.contains_key(&id) {
            return Err(Error::MalformedGraph(format!("duplicate vertex id {id}")));
        }
        if let Some(p) = pinned {
            if p != 1 && p != -1 {
                return Err(Error::MalformedGraph(format!("pinned value {p} on vertex {id}")));
            }
        }
        self.vertices.insert(id, Vertex { field, pinned, origin: String::new() });
        self.adj.insert(id, BTreeSet::new());
        self.next_id = self.next_id.max(id + 1);
        Ok(())
    }

    pub fn remove_vertex(&mut self, v: VId) -> Option<Vertex> {
        let nbrs = self.adj.remove(&v)?;
        for u in nbrs {
            self.adj.get_mut(&u).unwrap().remove(&v);
        }
        self.vertices.remove(&v)
    }

    pub fn contains(&self, v: VId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn vertex(&self, v: VId) -> &Vertex {
        &self.vertices[&v]
    }

    pub fn field(&self, v: VId) -> ComplexField {
        self.vertices[&v].field
    }

    pub fn set_field(&mut self, v: VId, h: ComplexField) {
        self.vertices.get_mut(&v).unwrap().field = h;
    }

    pub fn shift_field(&mut self, v: VId, dq: i64) {
        let x = self.vertices.get_mut(&v).unwrap();
        x.field = x.field.shifted(dq);
    }

    pub fn set_pinned(&mut self, v: VId, p: Option<i8>) {
        self.vertices.get_mut(&v).unwrap().pinned = p;
    }

    pub fn set_origin(&mut self, v: VId, o: impl Into<String>) {
        self.vertices.get_mut(&v).unwrap().origin = o.into();
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VId, &Vertex)> {
        self.vertices.iter().map(|(&k, v)| (k, v))
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_free(&self) -> usize {
        self.vertices.values().filter(|v| v.pinned.is_none()).count()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.values().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: VId) -> &BTreeSet<VId> {
        &self.adj[&v]
    }

    pub fn degree(&self, v: VId) -> usize {
        self.adj[&v].len()
    }

    pub fn has_edge(&self, u: VId, v: VId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(VId, VId)> {
        let mut out = Vec::new();
        for (&u, s) in &self.adj {
            for &v in s.range(u + 1..) {
                out.push((u, v));
            }
        }
        out
    }

    pub fn add_edge(&mut self, u: VId, v: VId) -> Result<()> {
        if u == v {
            return Err(Error::MalformedGraph(format!("self-loop on {u}")));
        }
        if !self.contains(u) || !self.contains(v) {
            return Err(Error::MalformedGraph(format!("dangling edge {u}-{v}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::MalformedGraph(format!("parallel edge {u}-{v}")));
        }
        self.adj.get_mut(&u).unwrap().insert(v);
        self.adj.get_mut(&v).unwrap().insert(u);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: VId, v: VId) -> bool {
        let a = self.adj.get_mut(&u).is_some_and(|s| s.remove(&v));
        let b = self.adj.get_mut(&v).is_some_and(|s| s.remove(&u));
        a && b
    }

    /// Multiplies the weight by `e^{γ S_u S_v}`.
    ///
    /// If the edge is already present the doubled coupling is rewritten via
    /// `e^{2γSS'} = −i·e^{2γ(S+S')}`: the edge disappears, both endpoints gain
    /// two quarter turns, and the returned factor is −i. The caller folds the
    /// factor into its ΔP.
    pub fn toggle_edge(&mut self, u: VId, v: VId) -> Prefactor {
        if self.remove_edge(u, v) {
            self.shift_field(u, 2);
            self.shift_field(v, 2);
            Prefactor::omega_pow(-2)
        } else {
            self.add_edge(u, v).expect("endpoints exist");
            Prefactor::ONE
        }
    }

    pub fn canonicalize_fields(&mut self) -> Prefactor {
        let mut p = Prefactor::ONE;
        for x in self.vertices.values_mut() {
            let (h, f) = canonicalize_field(x.field);
            x.field = h;
            p *= f;
        }
        p
    }

    pub fn components(&self) -> Vec<Vec<VId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &s in self.vertices.keys() {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                for &w in &self.adj[&comp[i]] {
                    if seen.insert(w) {
                        comp.push(w);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Induced subgraph on `keep`, ids preserved.
    pub fn induced(&self, keep: &[VId]) -> IsingGraph {
        let set: BTreeSet<VId> = keep.iter().copied().collect();
        let mut g = IsingGraph::new();
        for &v in &set {
            let x = &self.vertices[&v];
            g.insert_vertex(v, x.field, x.pinned).unwrap();
            g.set_origin(v, x.origin.clone());
        }
        for (u, v) in self.edges() {
            if set.contains(&u) && set.contains(&v) {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    /// Builds a graph from raw parts, reporting duplicates and dangling edges.
    pub fn from_parts(vertices: Vec<(VId, ComplexField, Option<i8>)>, edges: Vec<(VId, VId)>) -> Result<Self> {
        let mut g = IsingGraph::new();
        for (id, h, p) in vertices {
            g.insert_vertex(id, h, p)?;
        }
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }
}

/// Structural report; never mutates.
pub fn validate(g: &IsingGraph) -> Diagnostics {
    let mut hist = Vec::new();
    let mut maxd = 0;
    for v in g.vertex_ids() {
        let d = g.degree(v);
        if hist.len() <= d {
            hist.resize(d + 1, 0);
        }
        hist[d] += 1;
        maxd = maxd.max(d);
    }
    let nv = g.n_vertices();
    let ne = g.n_edges();
    Diagnostics {
        n_vertices: nv,
        n_edges: ne,
        degree_histogram: hist,
        max_degree: maxd,
        pinned: nv - g.n_free(),
        components: g.components().len(),
        nonplanar: nv >= 3 && ne > 3 * nv - 6,
    }
}

/// Validates raw parts before building, the entry point for untrusted input.
pub fn validate_parts(vertices: &[(VId, ComplexField, Option<i8>)], edges: &[(VId, VId)]) -> Result<Diagnostics> {
    let g = IsingGraph::from_parts(vertices.to_vec(), edges.to_vec())?;
    Ok(validate(&g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u32) -> IsingGraph {
        let mut g = IsingGraph::new();
        for _ in 0..n {
            g.add_vertex(ComplexField::ZERO);
        }
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    #[test]
    fn empty_graph_counts() {
        let d = validate(&IsingGraph::new());
        assert_eq!(d, Diagnostics::default());
    }

    #[test]
    fn triangle_and_k5() {
        let d = validate(&complete(3));
        assert_eq!(d.max_degree, 2);
        assert_eq!(d.components, 1);
        assert!(!d.nonplanar);
        let d = validate(&complete(5));
        assert_eq!(d.max_degree, 4);
        assert!(d.nonplanar);
    }

    #[test]
    fn malformed_inputs() {
        let v = vec![(0, ComplexField::ZERO, None), (0, ComplexField::ZERO, None)];
        assert!(matches!(validate_parts(&v, &[]), Err(Error::MalformedGraph(_))));
        let v = vec![(0, ComplexField::ZERO, None)];
        assert!(matches!(validate_parts(&v, &[(0, 7)]), Err(Error::MalformedGraph(_))));
    }

    #[test]
    fn toggle_twice_removes() {
        let mut g = complete(2);
        let p = g.toggle_edge(0, 1);
        assert!(!g.has_edge(0, 1));
        assert_eq!(g.field(0).quarter_turns, 2);
        assert!((p.phase + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
