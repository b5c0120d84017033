//! The target form: a W×H rectangular lattice, every nearest-neighbour
//! coupling iπ/4, all model content in the site fields.

use crate::field::{ComplexField, Prefactor};
use crate::graph::{IsingGraph, VId};

#[derive(Clone, Debug, PartialEq)]
pub struct GridIsing {
    pub width: usize,
    pub height: usize,
    fields: Vec<ComplexField>,
    /// Frozen cells. Empty in a conforming lattice; see [`GridIsing::check_invariants`].
    pinned: Vec<Option<i8>>,
    pub prefactor: Prefactor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridReport {
    pub couplings: usize,
    pub expected_couplings: usize,
    pub pinned: usize,
    pub conforming: bool,
}

impl GridIsing {
    pub fn new(width: usize, height: usize) -> Self {
        GridIsing {
            width,
            height,
            fields: vec![ComplexField::ZERO; width * height],
            pinned: vec![None; width * height],
            prefactor: Prefactor::ONE,
        }
    }

    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn field(&self, x: usize, y: usize) -> ComplexField {
        self.fields[self.idx(x, y)]
    }

    pub fn set_field(&mut self, x: usize, y: usize, h: ComplexField) {
        let i = self.idx(x, y);
        self.fields[i] = h;
    }

    pub fn pinned(&self, x: usize, y: usize) -> Option<i8> {
        self.pinned[self.idx(x, y)]
    }

    pub fn set_pinned(&mut self, x: usize, y: usize, p: Option<i8>) {
        let i = self.idx(x, y);
        self.pinned[i] = p;
    }

    pub fn n_sites(&self) -> usize {
        self.width * self.height
    }

    pub fn n_free(&self) -> usize {
        self.pinned.iter().filter(|p| p.is_none()).count()
    }

    /// Neighbour pairs `(i, j)` with `i < j` in row-major indexing.
    pub fn couplings(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let i = self.idx(x, y);
                if x + 1 < self.width {
                    out.push((i, i + 1));
                }
                if y + 1 < self.height {
                    out.push((i, i + self.width));
                }
            }
        }
        out
    }

    pub fn check_invariants(&self) -> GridReport {
        let (w, h) = (self.width, self.height);
        let expected = if w == 0 || h == 0 { 0 } else { 2 * w * h - w - h };
        let couplings = self.couplings().len();
        let pinned = self.pinned.iter().filter(|p| p.is_some()).count();
        GridReport { couplings, expected_couplings: expected, pinned, conforming: couplings == expected && pinned == 0 }
    }

    /// Same lattice as an [`IsingGraph`] with ids `y·W + x`.
    pub fn to_graph(&self) -> IsingGraph {
        let mut g = IsingGraph::new();
        for i in 0..self.n_sites() {
            g.insert_vertex(i as VId, self.fields[i], self.pinned[i]).unwrap();
        }
        for (a, b) in self.couplings() {
            g.add_edge(a as VId, b as VId).unwrap();
        }
        g
    }

    /// Same lattice with x and y swapped; Z and the prefactor are unchanged.
    pub fn transposed(&self) -> GridIsing {
        let mut t = GridIsing::new(self.height, self.width);
        t.prefactor = self.prefactor;
        for y in 0..self.height {
            for x in 0..self.width {
                t.set_field(y, x, self.field(x, y));
                t.set_pinned(y, x, self.pinned(x, y));
            }
        }
        t
    }

    pub fn fields(&self) -> &[ComplexField] {
        &self.fields
    }
}
