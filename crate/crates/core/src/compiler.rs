//! Lowers a pure-spin model to an [`IsingGraph`]: one spin per term, a GF(2)
//! basis of parity constraints between the term spins, and one star gadget per
//! constraint.

use crate::error::{Error, Result};
use crate::field::{ComplexField, Prefactor};
use crate::gf2::{BitMatrix, BitVec};
use crate::graph::{IsingGraph, VId};
use crate::model::SpinModel;

/// Term variables, their parity constraints, and the overcount exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    /// `(term index, field)` per variable.
    pub variables: Vec<(usize, ComplexField)>,
    /// Each entry lists variable indices whose spin product must be +1.
    pub constraints: Vec<Vec<usize>>,
    pub overcount_exponent: i64,
}

/// Term × site incidence over GF(2).
pub fn incidence_matrix(m: &SpinModel) -> BitMatrix {
    let n = m.sites.len();
    BitMatrix::from_rows(n, m.terms.iter().map(|t| BitVec::from_indices(n, t.sites.iter().copied())).collect())
}

pub fn substitute_terms(m: &SpinModel) -> Result<ConstraintSystem> {
    if !m.is_pure_spin() {
        return Err(Error::Semantic("substitute_terms needs a pure spin model; encode Potts sites first".into()));
    }
    m.validate()?;
    let inc = incidence_matrix(m);
    let rank = inc.rank();
    let constraints = inc.left_null_space().into_iter().map(|y| y.ones().collect()).collect();
    Ok(ConstraintSystem {
        variables: m.terms.iter().enumerate().map(|(i, t)| (i, t.coupling)).collect(),
        constraints,
        overcount_exponent: (m.sites.len() - rank) as i64,
    })
}

/// Replaces `δ(Π_{v∈members} S_v, 1)` by an ancilla joined to every member.
///
/// `δ(ΠS, 1) = ½e^{iπm/4} Σ_{S0} exp(−iπm/4·S0 − iπ/4·ΣS + iπ/4·S0ΣS)`,
/// so the ancilla field is −m quarter turns, each member loses one quarter
/// turn, and the returned ΔP is ½e^{imπ/4}.
pub fn apply_l1_gadget(g: &mut IsingGraph, members: &[VId]) -> Result<(VId, Prefactor)> {
    if members.is_empty() {
        return Err(Error::Precondition("empty constraint".into()));
    }
    let m = members.len() as i64;
    let a = g.add_vertex(ComplexField::quarter(-m));
    for &v in members {
        g.add_edge(a, v)?;
        g.shift_field(v, -1);
    }
    Ok((a, Prefactor::sqrt2_pow(-2) * Prefactor::omega_pow(m)))
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub graph: IsingGraph,
    pub prefactor: Prefactor,
    pub system: ConstraintSystem,
    /// Vertex id of each term variable, then of each constraint ancilla.
    pub term_vertices: Vec<VId>,
    pub ancillas: Vec<VId>,
}

/// `Z_model = as_complex(prefactor) · Z_graph`.
pub fn compile(m: &SpinModel) -> Result<Compiled> {
    let system = substitute_terms(m)?;
    build(system)
}

/// As [`compile`] with a caller-chosen constraint basis (term indices per
/// constraint), e.g. the faces of a planar lattice. The basis is checked.
pub fn compile_with_constraints(m: &SpinModel, constraints: Vec<Vec<usize>>) -> Result<Compiled> {
    let mut system = substitute_terms(m)?;
    let n_terms = m.terms.len();
    let mut cover = vec![0u32; m.sites.len()];
    for c in &constraints {
        cover.iter_mut().for_each(|x| *x = 0);
        for &t in c {
            let term = m.terms.get(t).ok_or_else(|| Error::Precondition(format!("no term {t}")))?;
            for &s in &term.sites {
                cover[s] += 1;
            }
        }
        if cover.iter().any(|x| x % 2 == 1) {
            return Err(Error::Precondition(format!("constraint {c:?} is not a cycle of terms")));
        }
    }
    let rows = constraints.iter().map(|c| BitVec::from_indices(n_terms, c.iter().copied())).collect();
    if BitMatrix::from_rows(n_terms, rows).rank() != system.constraints.len() || constraints.len() != system.constraints.len() {
        return Err(Error::Precondition("constraints do not form a basis".into()));
    }
    system.constraints = constraints;
    build(system)
}

fn build(system: ConstraintSystem) -> Result<Compiled> {
    let mut g = IsingGraph::new();
    let term_vertices: Vec<VId> =
        system.variables.iter().map(|&(t, h)| g.add_vertex_with_origin(h, format!("term:{t}"))).collect();
    let mut p = Prefactor::sqrt2_pow(2 * system.overcount_exponent);
    let mut ancillas = Vec::new();
    for (k, c) in system.constraints.iter().enumerate() {
        let members: Vec<VId> = c.iter().map(|&i| term_vertices[i]).collect();
        let (a, dp) = apply_l1_gadget(&mut g, &members)?;
        g.set_origin(a, format!("constraint:{k}"));
        ancillas.push(a);
        p *= dp;
    }
    p *= g.canonicalize_fields();
    Ok(Compiled { graph: g, prefactor: p, system, term_vertices, ancillas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SiteKind;

    fn triangle() -> SpinModel {
        let mut m = SpinModel::new("tri");
        for s in ["a", "b", "c"] {
            m.add_site(s, SiteKind::Spin);
        }
        m.add_term(vec![0, 1], ComplexField::real(0.3));
        m.add_term(vec![1, 2], ComplexField::real(0.3));
        m.add_term(vec![2, 0], ComplexField::real(0.3));
        m
    }

    #[test]
    fn triangle_system() {
        let s = substitute_terms(&triangle()).unwrap();
        assert_eq!(s.constraints, vec![vec![0, 1, 2]]);
        assert_eq!(s.overcount_exponent, 1);
    }

    #[test]
    fn pair_and_chain_systems() {
        let mut m = SpinModel::new("pair");
        m.add_site("a", SiteKind::Spin);
        m.add_site("b", SiteKind::Spin);
        m.add_term(vec![0, 1], ComplexField::real(1.0));
        let s = substitute_terms(&m).unwrap();
        assert!(s.constraints.is_empty());
        assert_eq!(s.overcount_exponent, 1);
        m.add_term(vec![0], ComplexField::real(1.0));
        let s = substitute_terms(&m).unwrap();
        assert!(s.constraints.is_empty());
        assert_eq!(s.overcount_exponent, 0);
    }

    #[test]
    fn triangle_graph_shape() {
        let c = compile(&triangle()).unwrap();
        assert_eq!(c.graph.n_vertices(), 4);
        assert_eq!(c.graph.field(c.ancillas[0]).quarter_turns, -3);
        assert_eq!(c.graph.field(c.term_vertices[0]).quarter_turns, -1);
    }

    #[test]
    fn empty_model() {
        let mut m = SpinModel::new("e");
        m.add_site("a", SiteKind::Spin);
        m.add_site("b", SiteKind::Spin);
        let c = compile(&m).unwrap();
        assert_eq!(c.graph.n_vertices(), 0);
        assert!((c.prefactor.as_complex().re - 4.0).abs() < 1e-14);
    }
}
