//! Encoding of 3- and 4-state Potts sites into pairs of Ising spins.
//!
//! Bits map to spins as S = (−1)^bit. Four states use the bijection
//! 0=(0,0), 1=(0,1), 2=(1,0), 3=(1,1); three states merge (0,1) and (1,0)
//! into the value 1. The δ expansion is fitted from the decode table over
//! the 16 multilinear monomials, so it never depends on transcribed
//! coefficients.

use crate::error::{Error, Result};
use crate::field::{ComplexField, Prefactor};
use crate::model::{SiteKind, SpinModel};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::LN_2;

/// Decode a spin pair to a Potts value.
pub fn decode(kind: SiteKind, s: i8, t: i8) -> u8 {
    let (a, b) = ((s < 0) as u8, (t < 0) as u8);
    match kind {
        SiteKind::Potts4 => 2 * a + b,
        SiteKind::Potts3 => a + b,
        SiteKind::Spin => a,
    }
}

/// Monomial mask over (S_i, S'_i, S_j, S'_j) → rational coefficient as
/// `(numerator, 16)`.
pub type Expansion = [i64; 16];

fn bits_to_spins(x: usize) -> [i8; 4] {
    [0, 1, 2, 3].map(|k| if x >> k & 1 == 0 { 1 } else { -1 })
}

fn monomial(mask: usize, s: &[i8; 4]) -> i64 {
    (0..4).filter(|k| mask >> k & 1 == 1).map(|k| s[k] as i64).product()
}

/// Walsh coefficients of δ(decode(S_i,S'_i), decode(S_j,S'_j)), scaled by 16.
pub fn fit_delta_expansion(kind: SiteKind) -> Expansion {
    let mut c = [0i64; 16];
    for (mask, cm) in c.iter_mut().enumerate() {
        for x in 0..16 {
            let s = bits_to_spins(x);
            let d = (decode(kind, s[0], s[1]) == decode(kind, s[2], s[3])) as i64;
            *cm += d * monomial(mask, &s);
        }
    }
    c
}

pub fn eval_expansion(c: &Expansion, s: &[i8; 4]) -> f64 {
    (0..16).map(|m| c[m] as f64 * monomial(m, s) as f64).sum::<f64>() / 16.0
}

/// The printed four-state form ¼(1 + SS_j + S'S'_j + SS'S_jS'_j), ×16.
pub fn printed_potts4() -> Expansion {
    let mut c = [0i64; 16];
    c[0] = 4;
    c[0b0101] = 4;
    c[0b1010] = 4;
    c[0b1111] = 4;
    c
}

/// The printed three-state form, ×16: 3/8, ±1/8 pair terms, 3/8 four-body.
pub fn printed_potts3() -> Expansion {
    let mut c = [0i64; 16];
    c[0] = 6;
    c[0b0011] = -2;
    c[0b1100] = -2;
    c[0b0101] = 2;
    c[0b1010] = 2;
    c[0b1001] = 2;
    c[0b0110] = 2;
    c[0b1111] = 6;
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    /// Original Potts site index → indices of its two spins in the encoded model.
    pub pairs: BTreeMap<usize, (usize, usize)>,
    /// Original pure-spin site index → its index in the encoded model.
    pub spins: BTreeMap<usize, usize>,
    pub compensated: Vec<usize>,
}

fn encode(m: &SpinModel, which: SiteKind) -> Result<(SpinModel, Prefactor, Encoding)> {
    m.validate()?;
    let mut out = SpinModel::new(m.name.clone());
    let mut enc = Encoding { pairs: BTreeMap::new(), spins: BTreeMap::new(), compensated: Vec::new() };
    for (i, s) in m.sites.iter().enumerate() {
        if s.kind == which {
            let a = out.add_site(format!("{}.a", s.id), SiteKind::Spin);
            let b = out.add_site(format!("{}.b", s.id), SiteKind::Spin);
            enc.pairs.insert(i, (a, b));
        } else {
            let k = out.add_site(s.id.clone(), s.kind);
            enc.spins.insert(i, k);
        }
    }
    if out.validate().is_err() {
        return Err(Error::Semantic("encoded spin names collide with existing sites".into()));
    }
    let map_site = |i: usize| enc.spins[&i];
    let mut terms: BTreeMap<(Vec<usize>, bool), ComplexField> = BTreeMap::new();
    let mut order: Vec<(Vec<usize>, bool)> = Vec::new();
    let mut push = |sites: Vec<usize>, delta: bool, h: ComplexField| {
        let mut key = sites;
        key.sort_unstable();
        let k = (key, delta);
        match terms.get_mut(&k) {
            Some(x) => *x = *x + h,
            None => {
                order.push(k.clone());
                terms.insert(k, h);
            }
        }
    };
    let mut log_p = Complex64::new(0.0, 0.0);
    let expansion = fit_delta_expansion(which);
    for t in &m.terms {
        let is_target = t.sites.iter().any(|i| m.sites[*i].kind == which);
        if !is_target {
            push(t.sites.iter().map(|&i| map_site(i)).collect(), t.delta, t.coupling);
            continue;
        }
        if !t.delta {
            return Err(Error::Semantic("non-delta term on a Potts site".into()));
        }
        let (a, b) = enc.pairs[&t.sites[0]];
        let (c, d) = enc.pairs[&t.sites[1]];
        let spins = [a, b, c, d];
        let j = t.coupling.value();
        log_p += j * (expansion[0] as f64 / 16.0);
        for (mask, &coef) in expansion.iter().enumerate().skip(1) {
            if coef == 0 {
                continue;
            }
            let sites: Vec<usize> = (0..4).filter(|k| mask >> k & 1 == 1).map(|k| spins[k]).collect();
            push(sites, false, ComplexField::from_complex(j * (coef as f64 / 16.0)));
        }
    }
    let mut p = Prefactor::exp(log_p);
    if which == SiteKind::Potts3 {
        // (½)^{(1−SS')/2} = 2^{−1/2}·e^{(ln2/2)SS'} per site
        for (&i, &(a, b)) in &enc.pairs {
            push(vec![a, b], false, ComplexField::real(LN_2 / 2.0));
            p *= Prefactor::sqrt2_pow(-1);
            enc.compensated.push(i);
        }
    }
    for k in order {
        let h = terms[&k];
        out.terms.push(crate::model::Term { sites: k.0, coupling: h, delta: k.1 });
    }
    out.validate()?;
    Ok((out, p, enc))
}

/// `Z_potts = prefactor · Z_encoded`.
pub fn encode_potts4(m: &SpinModel) -> Result<(SpinModel, Prefactor, Encoding)> {
    encode(m, SiteKind::Potts4)
}

/// As [`encode_potts4`], plus the per-site weight that makes the doubly
/// covered value count once.
pub fn encode_potts3(m: &SpinModel) -> Result<(SpinModel, Prefactor, Encoding)> {
    encode(m, SiteKind::Potts3)
}

/// Encodes every Potts site present; returns the model unchanged if pure spin.
pub fn encode_all(m: &SpinModel) -> Result<(SpinModel, Prefactor)> {
    let mut cur = m.clone();
    let mut p = Prefactor::ONE;
    for kind in [SiteKind::Potts4, SiteKind::Potts3] {
        if cur.sites.iter().any(|s| s.kind == kind) {
            let (next, dp, _) = encode(&cur, kind)?;
            cur = next;
            p *= dp;
        }
    }
    Ok((cur, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_forms_match_decode_tables() {
        assert_eq!(fit_delta_expansion(SiteKind::Potts4), printed_potts4());
        assert_eq!(fit_delta_expansion(SiteKind::Potts3), printed_potts3());
    }

    #[test]
    fn table_entries() {
        let c = printed_potts4();
        assert_eq!(eval_expansion(&c, &[-1, 1, -1, 1]), 1.0);
        assert_eq!(eval_expansion(&c, &[1, 1, -1, -1]), 0.0);
        let c3 = printed_potts3();
        assert_eq!(eval_expansion(&c3, &[1, -1, -1, 1]), 1.0);
        assert_eq!(eval_expansion(&c3, &[1, 1, 1, 1]), 1.0);
    }
}
