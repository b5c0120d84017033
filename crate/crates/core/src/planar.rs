//! Lowering an [`IsingGraph`] onto a full rectangular grid.
//!
//! Layout: vertex `k` of a deterministic BFS order owns column `4k+2`; each
//! edge gets a horizontal track at row `4t+2`, tracks packed greedily by
//! column interval. A vertex of degree `d` becomes a vertical bar of `d`
//! copies (one per track it touches) joined by merge gadgets at rows `≡ 0
//! mod 4`. A track crossing a bar becomes a crossing gadget whose ancilla
//! sits on the crossing cell and whose four cycle edges bend through the
//! diagonal cells. The occupied cells then induce exactly the live graph.
//!
//! Empty cells are summed out exactly when a filler parity assignment can be
//! found (see [`crate::stabilizer`]); otherwise they are left as spins fixed
//! to +1 and the grid is reported as non-conforming.

use crate::error::{Error, Result};
use crate::field::{ComplexField, Prefactor};
use crate::graph::{IsingGraph, VId};
use crate::grid::GridIsing;
use crate::rewrite;
use crate::stabilizer::{grid_edges, search_erasure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type Cell = (i64, i64);

/// User-supplied placement: every vertex gets a cell, every edge must be a
/// straight horizontal or vertical run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridLayout {
    pub pos: BTreeMap<VId, Cell>,
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub step: usize,
    pub rule: &'static str,
    pub delta: Prefactor,
    /// Graph after the step, kept only when requested.
    pub graph: Option<IsingGraph>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Densify {
    /// No empty cells.
    Full,
    /// Empty cells summed out exactly; the grid was padded by `margin`.
    Erased { margin: usize },
    /// Empty cells fixed to +1.
    Pinned { cells: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbedReport {
    pub width: usize,
    pub height: usize,
    pub live_cells: usize,
    pub filler_cells: usize,
    pub densify: Densify,
    pub crossings: usize,
    pub splits: usize,
    pub subdivisions: usize,
    pub input_vertices: usize,
    /// `width·height ≤ 64·|V|²`.
    pub within_size_bound: bool,
}

#[derive(Clone, Debug)]
pub struct Embedding {
    /// `Z(input) = grid.prefactor · Z(grid)`.
    pub grid: GridIsing,
    pub trace: Vec<TraceStep>,
    pub report: EmbedReport,
}

#[derive(Clone, Debug)]
pub struct EmbedOptions {
    pub seed: u64,
    /// Annealing moves per margin tried.
    pub erasure_budget: usize,
    pub max_margin: usize,
    /// Skip the erasure search above this many empty cells.
    pub max_fillers: usize,
    pub keep_graphs: bool,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions { seed: 0x15196, erasure_budget: 40_000, max_margin: 2, max_fillers: 400, keep_graphs: false }
    }
}

struct Work {
    g: IsingGraph,
    pos: BTreeMap<VId, Cell>,
    p: Prefactor,
    trace: Vec<TraceStep>,
    keep: bool,
    crossings: usize,
    splits: usize,
    subdivisions: usize,
}

impl Work {
    fn new(g: &IsingGraph, keep: bool) -> Self {
        Work { g: g.clone(), pos: BTreeMap::new(), p: Prefactor::ONE, trace: Vec::new(), keep, crossings: 0, splits: 0, subdivisions: 0 }
    }

    fn record(&mut self, rule: &'static str, delta: Prefactor) {
        self.p *= delta;
        let graph = self.keep.then(|| self.g.clone());
        self.trace.push(TraceStep { step: self.trace.len() + 1, rule, delta, graph });
    }

    fn subdivide(&mut self, a: VId, b: VId, at: Cell) -> Result<VId> {
        let (w, dp) = rewrite::subdivide_edge(&mut self.g, a, b)?;
        self.pos.insert(w, at);
        self.subdivisions += 1;
        self.record("subdivide", dp);
        Ok(w)
    }

    fn occupied(&self) -> BTreeMap<Cell, VId> {
        self.pos.iter().map(|(&v, &c)| (c, v)).collect()
    }

    /// Lays each edge along its cells, leaving crossing cells empty, then
    /// removes the crossings.
    fn realize(&mut self, routes: Vec<(VId, VId, Vec<Cell>)>) -> Result<()> {
        let mut occ = self.occupied();
        if occ.len() != self.pos.len() {
            return Err(Error::Embedding("two vertices share a cell".into()));
        }
        // how each route passes each interior cell
        #[derive(Clone, Copy, PartialEq)]
        enum Pass { H, V, Bend }
        let mut uses: BTreeMap<Cell, Vec<Pass>> = BTreeMap::new();
        for (a, b, cells) in &routes {
            let mut prev = self.pos[a];
            for &c in cells.iter().chain(std::iter::once(&self.pos[b])) {
                if (c.0 - prev.0).abs() + (c.1 - prev.1).abs() != 1 {
                    return Err(Error::Embedding(format!("route {a}-{b} is not a grid path")));
                }
                prev = c;
            }
            for (i, &c) in cells.iter().enumerate() {
                let before = if i == 0 { self.pos[a] } else { cells[i - 1] };
                let after = if i + 1 == cells.len() { self.pos[b] } else { cells[i + 1] };
                let pass = if before.1 == after.1 { Pass::H } else if before.0 == after.0 { Pass::V } else { Pass::Bend };
                uses.entry(c).or_default().push(pass);
            }
        }
        let mut crossing_cells = BTreeSet::new();
        for (&c, u) in &uses {
            if occ.contains_key(&c) {
                return Err(Error::Embedding(format!("route runs through vertex cell {c:?}")));
            }
            match u[..] {
                [_] => {}
                [Pass::H, Pass::V] | [Pass::V, Pass::H] => {
                    crossing_cells.insert(c);
                }
                _ => return Err(Error::Embedding(format!("routes overlap at {c:?}"))),
            }
        }
        for (a, b, cells) in routes {
            let mut cur = a;
            for c in cells {
                if crossing_cells.contains(&c) {
                    continue;
                }
                cur = self.subdivide(cur, b, c)?;
            }
        }
        occ = self.occupied();
        for &(x, y) in &crossing_cells {
            let at = |c: Cell| occ.get(&c).copied().ok_or_else(|| Error::Embedding(format!("crossing at {:?} lacks a neighbour", (x, y))));
            let (v1, v3, v2, v4) = (at((x - 1, y))?, at((x + 1, y))?, at((x, y - 1))?, at((x, y + 1))?);
            let (anc, dp) = rewrite::remove_crossing(&mut self.g, v1, v3, v2, v4)?;
            self.pos.insert(anc, (x, y));
            self.crossings += 1;
            self.record("crossing", dp);
            let corners = [(v1, v2, (x - 1, y - 1)), (v2, v3, (x + 1, y - 1)), (v3, v4, (x + 1, y + 1)), (v4, v1, (x - 1, y + 1))];
            for (a, b, c) in corners {
                if self.pos.values().any(|&p| p == c) {
                    return Err(Error::Embedding(format!("crossing corner {c:?} is taken")));
                }
                self.subdivide(a, b, c)?;
            }
        }
        Ok(())
    }

    /// Live graph must be the grid graph induced by the occupied cells.
    fn check_induced(&self) -> Result<()> {
        let occ = self.occupied();
        if occ.len() != self.g.n_vertices() || self.pos.len() != self.g.n_vertices() {
            return Err(Error::Embedding("unplaced vertices remain".into()));
        }
        for (u, v) in self.g.edges() {
            let (a, b) = (self.pos[&u], self.pos[&v]);
            if (a.0 - b.0).abs() + (a.1 - b.1).abs() != 1 {
                return Err(Error::Embedding(format!("edge {u}-{v} is not a grid edge")));
            }
        }
        for (&(x, y), &u) in &occ {
            for c in [(x + 1, y), (x, y + 1)] {
                if let Some(&v) = occ.get(&c) {
                    if !self.g.has_edge(u, v) {
                        return Err(Error::Embedding(format!("cells {:?} and {c:?} touch without an edge", (x, y))));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Deterministic column order: BFS from the highest-degree vertex.
fn bfs_order(g: &IsingGraph) -> Vec<VId> {
    let mut left: BTreeSet<VId> = g.vertex_ids().collect();
    let mut out = Vec::new();
    while !left.is_empty() {
        let start = *left.iter().max_by_key(|&&v| (g.degree(v), std::cmp::Reverse(v))).unwrap();
        let mut q = VecDeque::from([start]);
        left.remove(&start);
        while let Some(v) = q.pop_front() {
            out.push(v);
            for &u in g.neighbors(v) {
                if left.remove(&u) {
                    q.push_back(u);
                }
            }
        }
    }
    out
}

fn straight_cells(a: Cell, b: Cell) -> Result<Vec<Cell>> {
    if a.0 != b.0 && a.1 != b.1 {
        return Err(Error::Embedding(format!("{a:?}-{b:?} is not straight")));
    }
    let n = (b.0 - a.0).abs() + (b.1 - a.1).abs();
    let (dx, dy) = ((b.0 - a.0).signum(), (b.1 - a.1).signum());
    Ok((1..n).map(|k| (a.0 + k * dx, a.1 + k * dy)).collect())
}

fn bar_layout(w: &mut Work) -> Result<()> {
    let order = bfs_order(&w.g);
    let col: BTreeMap<VId, i64> = order.iter().enumerate().map(|(k, &v)| (v, 4 * k as i64 + 2)).collect();
    let mut edges: Vec<(VId, VId)> = w.g.edges().into_iter().map(|(a, b)| if col[&a] < col[&b] { (a, b) } else { (b, a) }).collect();
    edges.sort_by_key(|&(a, b)| (col[&a], col[&b]));
    let mut track_end: Vec<i64> = Vec::new();
    let mut row: BTreeMap<(VId, VId), i64> = BTreeMap::new();
    for &(a, b) in &edges {
        let t = match track_end.iter().position(|&end| end < col[&a]) {
            Some(t) => t,
            None => {
                track_end.push(i64::MIN);
                track_end.len() - 1
            }
        };
        track_end[t] = col[&b];
        row.insert((a, b), 4 * t as i64 + 2);
    }
    // incident edges per vertex, by row
    let mut inc: BTreeMap<VId, Vec<(i64, VId, usize)>> = BTreeMap::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        let r = row[&(a, b)];
        inc.entry(a).or_default().push((r, b, k));
        inc.entry(b).or_default().push((r, a, k));
    }
    // current endpoint ids of every edge: (left end, right end)
    let mut ends: Vec<(VId, VId)> = edges.clone();
    for &v in &order {
        let x = col[&v];
        let Some(list) = inc.get_mut(&v) else {
            w.pos.insert(v, (x, 0));
            continue;
        };
        list.sort_unstable();
        let list = list.clone();
        let mut cur = v;
        let mut prev_anc: Option<VId> = None;
        for (i, &(r, _, k)) in list.iter().enumerate() {
            w.pos.insert(cur, (x, r));
            if i + 1 == list.len() {
                break;
            }
            let other = if ends[k].0 == cur { ends[k].1 } else { ends[k].0 };
            let mut keep = vec![other];
            keep.extend(prev_anc);
            let (s, dp) = rewrite::split_vertex(&mut w.g, cur, &keep)?;
            w.splits += 1;
            w.record("split", dp);
            w.pos.insert(s.ancilla, (x, r + 2));
            for &(_, _, k2) in &list[i + 1..] {
                if ends[k2].0 == cur {
                    ends[k2].0 = s.v2;
                } else if ends[k2].1 == cur {
                    ends[k2].1 = s.v2;
                }
            }
            prev_anc = Some(s.ancilla);
            cur = s.v2;
        }
    }
    let mut routes = Vec::new();
    for (a, b) in w.g.edges() {
        routes.push((a, b, straight_cells(w.pos[&a], w.pos[&b])?));
    }
    w.realize(routes)
}

fn is_cycle(g: &IsingGraph) -> bool {
    g.n_vertices() >= 3 && g.vertex_ids().all(|v| g.degree(v) == 2) && g.components().len() == 1
}

/// Cycles of length ≤ 8 go on the boundary of a 2×2 or 3×3 block.
fn cycle_layout(w: &mut Work) -> Result<()> {
    let n = w.g.n_vertices();
    let ring: Vec<Cell> = if n <= 4 {
        vec![(0, 0), (1, 0), (1, 1), (0, 1)]
    } else {
        vec![(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (1, 2), (0, 2), (0, 1)]
    };
    let start = w.g.vertex_ids().next().unwrap();
    let mut cyc = vec![start];
    let mut prev = start;
    let mut cur = *w.g.neighbors(start).iter().next().unwrap();
    while cur != start {
        cyc.push(cur);
        let next = *w.g.neighbors(cur).iter().find(|&&u| u != prev).unwrap();
        prev = cur;
        cur = next;
    }
    let slot: Vec<usize> = (0..n).map(|i| i * ring.len() / n).collect();
    for (i, &v) in cyc.iter().enumerate() {
        w.pos.insert(v, ring[slot[i]]);
    }
    let mut routes = Vec::new();
    for i in 0..n {
        let (a, b) = (cyc[i], cyc[(i + 1) % n]);
        let end = if i + 1 == n { slot[0] + ring.len() } else { slot[i + 1] };
        routes.push((a, b, (slot[i] + 1..end).map(|k| ring[k % ring.len()]).collect()));
    }
    w.realize(routes)
}

pub fn embed_grid(g: &IsingGraph, opts: &EmbedOptions) -> Result<Embedding> {
    let mut w = prepare(g, opts)?;
    if w.g.n_vertices() == 0 {
    } else if is_cycle(&w.g) && w.g.n_vertices() <= 8 {
        cycle_layout(&mut w)?;
    } else {
        bar_layout(&mut w)?;
    }
    finish(w, g.n_vertices(), opts)
}

pub fn embed_with_layout(g: &IsingGraph, layout: &GridLayout, opts: &EmbedOptions) -> Result<Embedding> {
    if g.vertices().any(|(_, v)| v.pinned.is_some()) {
        return Err(Error::Precondition("a fixed layout needs an unpinned graph".into()));
    }
    let mut w = prepare(g, opts)?;
    for v in w.g.vertex_ids() {
        let c = layout.pos.get(&v).ok_or_else(|| Error::Embedding(format!("layout misses vertex {v}")))?;
        w.pos.insert(v, *c);
    }
    let mut routes = Vec::new();
    for (a, b) in w.g.edges() {
        routes.push((a, b, straight_cells(w.pos[&a], w.pos[&b])?));
    }
    w.realize(routes)?;
    finish(w, g.n_vertices(), opts)
}

fn prepare(g: &IsingGraph, opts: &EmbedOptions) -> Result<Work> {
    crate::graph::validate_parts(
        &g.vertices().map(|(id, v)| (id, v.field, v.pinned)).collect::<Vec<_>>(),
        &g.edges(),
    )?;
    let mut w = Work::new(g, opts.keep_graphs);
    let pinned: Vec<VId> = g.vertices().filter(|(_, v)| v.pinned.is_some()).map(|(id, _)| id).collect();
    for v in pinned {
        let (_, dp) = rewrite::unpin(&mut w.g, v)?;
        w.record("unpin", dp);
    }
    Ok(w)
}

fn finish(mut w: Work, n_input: usize, opts: &EmbedOptions) -> Result<Embedding> {
    w.check_induced()?;
    if w.pos.is_empty() {
        let mut grid = GridIsing::new(0, 0);
        grid.prefactor = w.p;
        let report = EmbedReport {
            width: 0, height: 0, live_cells: 0, filler_cells: 0, densify: Densify::Full,
            crossings: 0, splits: 0, subdivisions: 0, input_vertices: n_input, within_size_bound: true,
        };
        return Ok(Embedding { grid, trace: w.trace, report });
    }
    let x0 = w.pos.values().map(|c| c.0).min().unwrap();
    let y0 = w.pos.values().map(|c| c.1).min().unwrap();
    let x1 = w.pos.values().map(|c| c.0).max().unwrap();
    let y1 = w.pos.values().map(|c| c.1).max().unwrap();
    let (bw, bh) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    let n_live = w.pos.len();
    let mut densify = if n_live == bw * bh { Densify::Full } else { Densify::Pinned { cells: bw * bh - n_live } };
    let mut chosen: Option<(usize, crate::stabilizer::ErasureResult)> = None;
    if n_live < bw * bh {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for margin in 0..=opts.max_margin {
            let (gw, gh) = (bw + 2 * margin, bh + 2 * margin);
            if gw * gh - n_live > opts.max_fillers {
                break;
            }
            let live = live_mask(&w, x0, y0, margin, gw, gh);
            if let Some(r) = search_erasure(gw, gh, &live, &mut rng, opts.erasure_budget) {
                chosen = Some((margin, r));
                break;
            }
        }
    }
    let margin = chosen.as_ref().map_or(0, |c| c.0);
    let (gw, gh) = (bw + 2 * margin, bh + 2 * margin);
    let mut grid = GridIsing::new(gw, gh);
    let live = live_mask(&w, x0, y0, margin, gw, gh);
    let at: BTreeMap<usize, VId> =
        w.pos.iter().map(|(&v, &(x, y))| (((y - y0) as usize + margin) * gw + (x - x0) as usize + margin, v)).collect();
    let mut fields: Vec<ComplexField> = (0..gw * gh).map(|i| at.get(&i).map_or(ComplexField::ZERO, |&v| w.g.field(v))).collect();
    match chosen {
        Some((margin, r)) => {
            let mut fi = 0;
            let mut li = 0;
            for i in 0..gw * gh {
                if live[i] {
                    fields[i] = fields[i].shifted(r.live_shift[li]);
                    li += 1;
                } else {
                    fields[i] = ComplexField::quarter(r.filler_q[fi]);
                    fi += 1;
                }
            }
            densify = Densify::Erased { margin };
            w.record("densify-erase", r.k.inv());
        }
        None if n_live < gw * gh => {
            let mut ff = 0i64;
            for (a, b) in grid_edges(gw, gh) {
                match (live[a], live[b]) {
                    (false, false) => ff += 1,
                    (false, true) => fields[b] = fields[b].shifted(-1),
                    (true, false) => fields[a] = fields[a].shifted(-1),
                    _ => {}
                }
            }
            for i in 0..gw * gh {
                if !live[i] {
                    grid.set_pinned(i % gw, i / gw, Some(1));
                }
            }
            w.record("densify-pin", Prefactor::omega_pow(-ff));
        }
        None => {}
    }
    let mut canon = Prefactor::ONE;
    for (i, h) in fields.into_iter().enumerate() {
        let (h, f) = crate::field::canonicalize_field(h);
        canon *= f;
        grid.set_field(i % gw, i / gw, h);
    }
    w.record("canonicalize", canon);
    grid.prefactor = w.p;
    let report = EmbedReport {
        width: gw,
        height: gh,
        live_cells: n_live,
        filler_cells: gw * gh - n_live,
        densify,
        crossings: w.crossings,
        splits: w.splits,
        subdivisions: w.subdivisions,
        input_vertices: n_input,
        within_size_bound: gw * gh <= 64 * n_input.max(1) * n_input.max(1),
    };
    Ok(Embedding { grid, trace: w.trace, report })
}

fn live_mask(w: &Work, x0: i64, y0: i64, margin: usize, gw: usize, gh: usize) -> Vec<bool> {
    let mut live = vec![false; gw * gh];
    for &(x, y) in w.pos.values() {
        live[((y - y0) as usize + margin) * gw + (x - x0) as usize + margin] = true;
    }
    live
}
