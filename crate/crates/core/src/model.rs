//! The source language: sites with a small arity and interaction terms.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use std::collections::HashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteKind {
    Spin,
    Potts3,
    Potts4,
}

impl SiteKind {
    pub fn arity(&self) -> usize {
        match self {
            SiteKind::Spin => 2,
            SiteKind::Potts3 => 3,
            SiteKind::Potts4 => 4,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            SiteKind::Spin => "spin",
            SiteKind::Potts3 => "potts3",
            SiteKind::Potts4 => "potts4",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub id: String,
    pub kind: SiteKind,
}

/// A product term `coupling · Π S_i`, or for Potts pairs `coupling · δ(q_i, q_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub sites: Vec<usize>,
    pub coupling: ComplexField,
    pub delta: bool,
}

/// Weight convention: `Z = Σ_config exp(Σ_terms coupling · term_value)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SpinModel {
    pub name: String,
    pub sites: Vec<Site>,
    pub terms: Vec<Term>,
}

impl SpinModel {
    pub fn new(name: impl Into<String>) -> Self {
        SpinModel { name: name.into(), ..Default::default() }
    }

    pub fn add_site(&mut self, id: impl Into<String>, kind: SiteKind) -> usize {
        self.sites.push(Site { id: id.into(), kind });
        self.sites.len() - 1
    }

    pub fn add_term(&mut self, sites: Vec<usize>, coupling: ComplexField) {
        self.terms.push(Term { sites, coupling, delta: false });
    }

    pub fn add_delta(&mut self, a: usize, b: usize, coupling: ComplexField) {
        self.terms.push(Term { sites: vec![a, b], coupling, delta: true });
    }

    pub fn site_index(&self, id: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.id == id)
    }

    pub fn is_pure_spin(&self) -> bool {
        self.sites.iter().all(|s| s.kind == SiteKind::Spin) && self.terms.iter().all(|t| !t.delta)
    }

    pub fn n_configs(&self) -> Option<u128> {
        self.sites.iter().try_fold(1u128, |acc, s| acc.checked_mul(s.kind.arity() as u128))
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for s in &self.sites {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::Semantic(format!("duplicate site {}", s.id)));
            }
        }
        let mut seen = HashSet::new();
        for t in &self.terms {
            if t.sites.is_empty() {
                return Err(Error::Semantic("empty term".into()));
            }
            if let Some(&bad) = t.sites.iter().find(|&&i| i >= self.sites.len()) {
                return Err(Error::Semantic(format!("term references missing site index {bad}")));
            }
            let mut key = t.sites.clone();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Semantic("repeated site inside a term".into()));
            }
            if !seen.insert((key, t.delta)) {
                let names: Vec<_> = t.sites.iter().map(|&i| self.sites[i].id.as_str()).collect();
                return Err(Error::Semantic(format!("duplicate term {{{}}}", names.join(" "))));
            }
            let potts = t.sites.iter().any(|&i| self.sites[i].kind != SiteKind::Spin);
            if t.delta {
                if t.sites.len() != 2 {
                    return Err(Error::Semantic("delta terms take exactly two sites".into()));
                }
                let (a, b) = (self.sites[t.sites[0]].kind, self.sites[t.sites[1]].kind);
                if a != b {
                    return Err(Error::Semantic("delta term mixes site kinds".into()));
                }
            } else if potts {
                return Err(Error::Semantic(format!(
                    "Potts site {} used in a non-delta term",
                    t.sites.iter().map(|&i| &self.sites[i]).find(|s| s.kind != SiteKind::Spin).unwrap().id
                )));
            }
        }
        Ok(())
    }
}
