//! Local Z-preserving rewrites on [`IsingGraph`].
//!
//! Every function returns the ΔP with `Z(before) = ΔP · Z(after)`, unless
//! its doc says otherwise (pinning).

use crate::error::{Error, Result};
use crate::field::{ComplexField, Prefactor};
use crate::gadgets::{crossing_template, leaf_template, merge_template, subdivide_template};
use crate::graph::{IsingGraph, VId};

fn need(g: &IsingGraph, v: VId) -> Result<()> {
    if g.contains(v) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("no vertex {v}")))
    }
}

fn need_free(g: &IsingGraph, v: VId) -> Result<()> {
    need(g, v)?;
    if g.vertex(v).pinned.is_some() {
        return Err(Error::Precondition(format!("vertex {v} is pinned")));
    }
    Ok(())
}

/// Hangs a field-free leaf on `v`; `v` keeps its field.
pub fn attach_leaf(g: &mut IsingGraph, v: VId) -> Result<(VId, Prefactor)> {
    need(g, v)?;
    let t = leaf_template();
    let w = g.add_vertex_with_origin(ComplexField::quarter(t.ancilla_q), "leaf");
    g.add_edge(v, w)?;
    g.shift_field(v, t.shifts[0]);
    Ok((w, t.scalar))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Split {
    /// Keeps the id and the field of the split vertex.
    pub v1: VId,
    pub v2: VId,
    pub ancilla: VId,
}

/// Splits `v` into `v1` (keeping `group1` of its edges and its field) and a
/// new `v2` (the remaining edges), joined through a merge ancilla.
pub fn split_vertex(g: &mut IsingGraph, v: VId, group1: &[VId]) -> Result<(Split, Prefactor)> {
    need_free(g, v)?;
    let nb = g.neighbors(v).clone();
    if nb.len() < 2 {
        return Err(Error::Precondition(format!("vertex {v} has degree {} < 2", nb.len())));
    }
    let mut keep = group1.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.len() != group1.len() || keep.iter().any(|u| !nb.contains(u)) || keep.is_empty() || keep.len() == nb.len() {
        return Err(Error::Precondition(format!("invalid edge partition at vertex {v}")));
    }
    let t = merge_template();
    let origin = g.vertex(v).origin.clone();
    let v2 = g.add_vertex_with_origin(ComplexField::quarter(t.shifts[1]), origin);
    for &u in nb.iter().filter(|u| !keep.contains(u)) {
        g.remove_edge(v, u);
        g.add_edge(v2, u)?;
    }
    g.shift_field(v, t.shifts[0]);
    let a = g.add_vertex_with_origin(ComplexField::quarter(t.ancilla_q), "merge");
    g.add_edge(a, v)?;
    g.add_edge(a, v2)?;
    Ok((Split { v1: v, v2, ancilla: a }, t.scalar))
}

/// Inverse of [`split_vertex`]: folds `v2` back into `v1` and drops the ancilla.
pub fn merge_split(g: &mut IsingGraph, s: Split) -> Result<Prefactor> {
    let t = merge_template();
    for v in [s.v1, s.v2, s.ancilla] {
        need_free(g, v)?;
    }
    let a_nb = g.neighbors(s.ancilla);
    if a_nb.len() != 2 || !a_nb.contains(&s.v1) || !a_nb.contains(&s.v2) || g.field(s.ancilla) != ComplexField::quarter(t.ancilla_q) {
        return Err(Error::Precondition("not a merge gadget".into()));
    }
    if g.has_edge(s.v1, s.v2) {
        return Err(Error::Precondition("merge endpoints are adjacent".into()));
    }
    g.remove_vertex(s.ancilla);
    // Z(split) = Z(merged)/c, so the merged graph carries 1/c.
    let mut p = t.scalar.inv();
    let h = g.field(s.v1).shifted(-t.shifts[0]) + g.field(s.v2).shifted(-t.shifts[1]);
    let nb2: Vec<VId> = g.neighbors(s.v2).iter().copied().collect();
    g.remove_vertex(s.v2);
    g.set_field(s.v1, h);
    for u in nb2 {
        p *= g.toggle_edge(s.v1, u);
    }
    Ok(p)
}

/// Replaces edge `u–v` by a path through a new vertex.
pub fn subdivide_edge(g: &mut IsingGraph, u: VId, v: VId) -> Result<(VId, Prefactor)> {
    if !g.has_edge(u, v) {
        return Err(Error::Precondition(format!("no edge {u}-{v}")));
    }
    let t = subdivide_template();
    g.remove_edge(u, v);
    let w = g.add_vertex_with_origin(ComplexField::quarter(t.ancilla_q), "subdivide");
    g.add_edge(u, w)?;
    g.add_edge(w, v)?;
    g.shift_field(u, t.shifts[0]);
    g.shift_field(v, t.shifts[1]);
    Ok((w, t.scalar))
}

/// Constants `(ancilla quarter turns, shift, ΔP)` for forcing `S = s` with
/// one ancilla: `δ(S, s) = ΔP · Σ_{S0} e^{γ(a·S0 + S0·S + d·S)}`.
pub fn pin_constants(s: i8) -> (i64, i64, Prefactor) {
    if s > 0 {
        (-1, -1, Prefactor::sqrt2_pow(-2) * Prefactor::omega_pow(1))
    } else {
        (-3, -1, Prefactor::sqrt2_pow(-2) * Prefactor::omega_pow(3))
    }
}

/// Makes a free `v` behave as fixed to +1 while staying summed:
/// `Z(g with S_v = +1) = ΔP · Z(g')`.
pub fn pin_spin(g: &mut IsingGraph, v: VId) -> Result<(VId, Prefactor)> {
    need_free(g, v)?;
    realize_pin(g, v, 1)
}

fn realize_pin(g: &mut IsingGraph, v: VId, s: i8) -> Result<(VId, Prefactor)> {
    let (a0, d, p) = pin_constants(s);
    let a = g.add_vertex_with_origin(ComplexField::quarter(a0), "pin");
    g.add_edge(a, v)?;
    g.shift_field(v, d);
    Ok((a, p))
}

/// Frees an already pinned vertex, forcing its value with an ancilla.
pub fn unpin(g: &mut IsingGraph, v: VId) -> Result<(VId, Prefactor)> {
    need(g, v)?;
    let s = g.vertex(v).pinned.ok_or_else(|| Error::Precondition(format!("vertex {v} is not pinned")))?;
    g.set_pinned(v, None);
    realize_pin(g, v, s)
}

/// Adds a centre joined to four distinct vertices. The centre is fixed to
/// +1, the four fields drop a quarter turn each, and the pin is realized
/// with an ancilla. Returns `(centre, ancilla)`.
pub fn insert_plaquette_spin(g: &mut IsingGraph, face: [VId; 4]) -> Result<((VId, VId), Prefactor)> {
    for &v in &face {
        need(g, v)?;
    }
    let mut f = face.to_vec();
    f.sort_unstable();
    f.dedup();
    if f.len() != 4 {
        return Err(Error::Precondition("plaquette with a repeated vertex".into()));
    }
    let c = g.add_vertex_with_origin(ComplexField::ZERO, "plaquette");
    g.set_pinned(c, Some(1));
    for &v in &face {
        g.add_edge(c, v)?;
        g.shift_field(v, -1);
    }
    let (a, p) = unpin(g, c)?;
    Ok(((c, a), p))
}

/// Replaces crossing edges `v1–v3` and `v2–v4` by an ancilla on all four and
/// the cycle v1 v2 v3 v4. Existing cycle edges are toggled away.
pub fn remove_crossing(g: &mut IsingGraph, v1: VId, v3: VId, v2: VId, v4: VId) -> Result<(VId, Prefactor)> {
    let vs = [v1, v2, v3, v4];
    let mut f = vs.to_vec();
    f.sort_unstable();
    f.dedup();
    if f.len() != 4 || !g.has_edge(v1, v3) || !g.has_edge(v2, v4) {
        return Err(Error::Precondition("crossing needs edges v1-v3 and v2-v4 on four distinct vertices".into()));
    }
    let t = crossing_template();
    g.remove_edge(v1, v3);
    g.remove_edge(v2, v4);
    let a = g.add_vertex_with_origin(ComplexField::quarter(t.ancilla_q), "crossing");
    let mut p = t.scalar;
    for (k, &v) in vs.iter().enumerate() {
        g.add_edge(a, v)?;
        g.shift_field(v, t.shifts[k]);
    }
    for k in 0..4 {
        p *= g.toggle_edge(vs[k], vs[(k + 1) % 4]);
    }
    Ok((a, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{check_equivalence, exact_z_ising};

    fn host() -> IsingGraph {
        let mut g = IsingGraph::new();
        let fs = [(0.3, 0.1), (-0.2, 0.4), (0.5, -0.7), (0.1, 0.2), (-0.4, -0.3), (0.2, 0.9)];
        let ids: Vec<VId> = fs.iter().map(|&(a, b)| g.add_vertex(ComplexField::from_complex(num_complex::Complex64::new(a, b)))).collect();
        for (a, b) in [(0, 1), (1, 2), (2, 0), (0, 3), (0, 4), (0, 5), (3, 4)] {
            g.add_edge(ids[a], ids[b]).unwrap();
        }
        g
    }

    fn same(a: &IsingGraph, b: &IsingGraph, p: Prefactor) {
        let za = exact_z_ising(a, 28).unwrap().value;
        let zb = exact_z_ising(b, 28).unwrap().value;
        let v = check_equivalence(za, zb, p, 1e-12);
        assert!(v.pass, "rel {}", v.rel_error);
    }

    #[test]
    fn split_and_merge() {
        let g = host();
        let mut h = g.clone();
        let (s, p) = split_vertex(&mut h, 0, &[1, 2]).unwrap();
        same(&g, &h, p);
        let mut k = h.clone();
        let q = merge_split(&mut k, s).unwrap();
        same(&h, &k, q);
        assert_eq!(k.edges(), g.edges());
        let mut iso = IsingGraph::new();
        let v = iso.add_vertex(ComplexField::ZERO);
        assert!(split_vertex(&mut iso, v, &[]).is_err());
    }

    #[test]
    fn each_rule() {
        let g = host();
        let mut h = g.clone();
        let (_, p) = attach_leaf(&mut h, 2).unwrap();
        same(&g, &h, p);
        let mut h = g.clone();
        let (_, p) = subdivide_edge(&mut h, 1, 2).unwrap();
        same(&g, &h, p);
        let mut h = g.clone();
        let (_, p) = insert_plaquette_spin(&mut h, [1, 2, 3, 4]).unwrap();
        same(&g, &h, p);
        let mut h = g.clone();
        h.add_edge(1, 3).unwrap();
        h.add_edge(2, 4).unwrap();
        let before = h.clone();
        // cycle 1-2-3-4 already has edges 1-2 and 3-4
        let (_, p) = remove_crossing(&mut h, 1, 3, 2, 4).unwrap();
        same(&before, &h, p);
        assert!(insert_plaquette_spin(&mut h.clone(), [1, 1, 2, 3]).is_err());
    }

    #[test]
    fn pinning() {
        let g = host();
        let mut fixed = g.clone();
        fixed.set_pinned(3, Some(1));
        let mut h = g.clone();
        let (_, p) = pin_spin(&mut h, 3).unwrap();
        same(&fixed, &h, p);
        let mut fixed = g.clone();
        fixed.set_pinned(4, Some(-1));
        let mut h = fixed.clone();
        let (_, p) = unpin(&mut h, 4).unwrap();
        same(&fixed, &h, p);
        assert_eq!(h.n_free(), h.n_vertices());
    }
}
