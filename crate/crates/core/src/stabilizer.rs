//! Exact summation of spins out of an all-γ Ising graph.
//!
//! With `S = 1 − 2σ` every weight on the iπ/4 lattice is
//! `c · i^{Σ l_v σ_v} · (−1)^{Σ_{uv∈Q} σ_u σ_v}`:
//! `e^{γS_uS_v} = ω·i^{−σ_u−σ_v}(−1)^{σ_uσ_v}` and `e^{qγS} = ω^q i^{−qσ}`.
//! Summing one variable keeps that form up to a parity constraint, which is
//! resolved by substituting another summed variable. The constant is tracked
//! as a power of √2 times a power of ω, so the whole computation is exact.

use crate::field::Prefactor;
use crate::gf2::{BitMatrix, BitVec};
use num_complex::Complex64;
use rand::Rng;

/// `2^{sqrt2/2} · ω^{omega}`, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Phase {
    pub sqrt2: i64,
    pub omega: i64,
    pub zero: bool,
}

impl Phase {
    pub fn to_prefactor(self) -> Prefactor {
        if self.zero {
            Prefactor::ZERO
        } else {
            Prefactor::sqrt2_pow(self.sqrt2) * Prefactor::omega_pow(self.omega)
        }
    }
}

#[derive(Clone, Debug)]
pub struct QForm {
    pub lin: Vec<u8>,
    pub adj: Vec<BitVec>,
    pub alive: BitVec,
    pub c: Phase,
}

impl QForm {
    pub fn new(n: usize) -> Self {
        QForm {
            lin: vec![0; n],
            adj: vec![BitVec::zeros(n); n],
            alive: BitVec::from_indices(n, 0..n),
            c: Phase::default(),
        }
    }

    /// Weight of an all-γ graph with integer fields `q` (quarter turns).
    pub fn from_graph(q: &[i64], edges: &[(usize, usize)]) -> Self {
        let mut f = QForm::new(q.len());
        for (v, &qv) in q.iter().enumerate() {
            f.c.omega += qv;
            f.add_lin(v, -qv);
        }
        for &(a, b) in edges {
            f.c.omega += 1;
            f.add_lin(a, -1);
            f.add_lin(b, -1);
            f.toggle(a, b);
        }
        f.c.omega = f.c.omega.rem_euclid(8);
        f
    }

    pub fn n(&self) -> usize {
        self.lin.len()
    }

    pub fn add_lin(&mut self, v: usize, k: i64) {
        self.lin[v] = (self.lin[v] as i64 + k).rem_euclid(4) as u8;
    }

    pub fn toggle(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        self.adj[a].flip(b);
        self.adj[b].flip(a);
    }

    fn neighbours(&self, v: usize) -> Vec<usize> {
        self.adj[v].ones().filter(|&j| self.alive.get(j)).collect()
    }

    fn toggle_clique(&mut self, s: &[usize]) {
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                self.toggle(a, b);
            }
        }
    }

    fn remove(&mut self, v: usize) {
        for j in self.adj[v].ones().collect::<Vec<_>>() {
            self.adj[j].set(v, false);
        }
        self.adj[v] = BitVec::zeros(self.n());
        self.alive.set(v, false);
    }

    /// Sums `u` out. A parity constraint is solved for the first neighbour
    /// accepted by `can_sub`; if there is none the constraint's support is
    /// returned and the form is left with `u` removed.
    pub fn sum_out(&mut self, u: usize, can_sub: &dyn Fn(usize) -> bool) -> Result<(), Vec<usize>> {
        assert!(self.alive.get(u), "variable {u} already summed");
        let nb = self.neighbours(u);
        let l = self.lin[u];
        self.remove(u);
        if l % 2 == 1 {
            // 1 + i^l(−1)^x = √2·ω^{±1}·i^{∓x²}
            let s: i64 = if l == 1 { 1 } else { -1 };
            self.c.sqrt2 += 1;
            self.c.omega = (self.c.omega + s).rem_euclid(8);
            for &j in &nb {
                self.add_lin(j, -s);
            }
            self.toggle_clique(&nb);
            return Ok(());
        }
        // 1 + (−1)^{l/2 + x} = 2·δ(x ≡ l/2)
        let b = (l / 2) as i64;
        if nb.is_empty() {
            if b == 1 {
                self.c.zero = true;
            } else {
                self.c.sqrt2 += 2;
            }
            return Ok(());
        }
        let Some(&w) = nb.iter().find(|&&j| can_sub(j)) else { return Err(nb) };
        self.c.sqrt2 += 2;
        self.substitute(w, b, &nb.iter().copied().filter(|&j| j != w).collect::<Vec<_>>());
        Ok(())
    }

    /// Replaces `σ_w` by `b ⊕ Σ_{rest} σ_j` and drops `w`.
    fn substitute(&mut self, w: usize, b: i64, rest: &[usize]) {
        let nw = self.neighbours(w);
        let lw = self.lin[w] as i64;
        self.remove(w);
        for &k in &nw {
            self.add_lin(k, 2 * b);
        }
        for &j in rest {
            for &k in &nw {
                if j == k {
                    self.add_lin(j, 2);
                } else {
                    self.toggle(j, k);
                }
            }
        }
        // i^{lw·(x mod 2)} = i^{lw·x}·(−1)^{lw·C(x,2)}
        self.c.omega = (self.c.omega + 2 * lw * b).rem_euclid(8);
        for &j in rest {
            self.add_lin(j, lw);
        }
        if lw % 2 == 1 {
            self.toggle_clique(rest);
            for &j in rest {
                self.add_lin(j, 2 * b);
            }
        }
    }

    /// Value at a 0/1 assignment of the live variables (dead ones ignored).
    pub fn eval(&self, sigma: &[u8]) -> Complex64 {
        if self.c.zero {
            return Complex64::new(0.0, 0.0);
        }
        let mut k: i64 = 0;
        let live: Vec<usize> = self.alive.ones().collect();
        for &v in &live {
            k += 2 * (self.lin[v] as i64) * sigma[v] as i64;
        }
        for (i, &a) in live.iter().enumerate() {
            for &b in &live[i + 1..] {
                if self.adj[a].get(b) {
                    k += 4 * (sigma[a] * sigma[b]) as i64;
                }
            }
        }
        self.c.to_prefactor().as_complex() * Prefactor::omega_pow(k).as_complex()
    }
}

/// GF(2) search for filler parities that sum out to fields only.
///
/// `M = A_RR + diag(d)`, `B = A_RL`. With `M` invertible the fillers sum to
/// a quadratic form on the live spins whose added couplings are the
/// off-diagonal part of `Bᵀ M⁻¹ B`; the search drives that to zero.
pub struct ParitySearch {
    n_r: usize,
    n_l: usize,
    a_rr: Vec<BitVec>,
    bt: Vec<BitVec>,
    d: BitVec,
    minv: Vec<BitVec>,
    g: Vec<BitVec>,
    cost: usize,
}

impl ParitySearch {
    /// `a_rr`: filler adjacency (R×R); `b`: filler–live adjacency (R×L).
    pub fn new(a_rr: Vec<BitVec>, b: Vec<BitVec>, n_l: usize) -> Self {
        let n_r = a_rr.len();
        let bt = BitMatrix::from_rows(n_l, b).transpose().rows;
        ParitySearch { n_r, n_l, a_rr, bt, d: BitVec::zeros(n_r), minv: vec![], g: vec![], cost: usize::MAX }
    }

    fn off_diag(g: &[BitVec]) -> usize {
        g.iter().map(|r| r.count_ones()).sum::<usize>() - (0..g.len()).filter(|&i| g[i].get(i)).count()
    }

    /// Installs `d`; false if `M` is singular.
    pub fn reset(&mut self, d: BitVec) -> bool {
        let mut m = BitMatrix::from_rows(self.n_r, self.a_rr.clone());
        for i in d.ones() {
            m.rows[i].flip(i);
        }
        let Some(inv) = m.inverse() else { return false };
        self.d = d;
        self.minv = inv.rows;
        self.recompute_g();
        true
    }

    fn recompute_g(&mut self) {
        // G = Bᵀ M⁻¹ B; row a of Bᵀ is the filler set next to live a.
        let y: Vec<BitVec> = self.bt.iter().map(|row| {
            let mut acc = BitVec::zeros(self.n_r);
            for f in row.ones() {
                acc.xor_with(&self.minv[f]);
            }
            acc
        }).collect();
        self.g = y.iter().map(|ya| BitVec::from_indices(self.n_l, (0..self.n_l).filter(|&b| ya.and_parity(&self.bt[b])))).collect();
        self.cost = Self::off_diag(&self.g) / 2;
    }

    pub fn cost(&self) -> usize {
        self.cost
    }

    pub fn parities(&self) -> &BitVec {
        &self.d
    }

    fn bt_times(&self, u: &BitVec) -> BitVec {
        BitVec::from_indices(self.n_l, (0..self.n_l).filter(|&a| self.bt[a].and_parity(u)))
    }

    /// Off-diagonal pairs whose entry flips under `G += Σ_k x_k y_kᵀ`.
    fn delta(&self, terms: &[(&BitVec, &BitVec)]) -> (i64, Vec<(usize, usize)>) {
        let mut touched: Vec<usize> = terms.iter().flat_map(|(x, y)| x.ones().chain(y.ones())).collect();
        touched.sort_unstable();
        touched.dedup();
        let mut flips = Vec::new();
        let mut dc = 0i64;
        for (i, &a) in touched.iter().enumerate() {
            for &b in &touched[i + 1..] {
                let f = terms.iter().fold(false, |acc, (x, y)| acc ^ (x.get(a) & y.get(b)));
                if f {
                    dc += if self.g[a].get(b) { -1 } else { 1 };
                    flips.push((a, b));
                }
            }
        }
        (dc, flips)
    }

    fn apply_g(&mut self, flips: &[(usize, usize)], diag: &[(usize, bool)], dc: i64) {
        for &(a, b) in flips {
            self.g[a].flip(b);
            self.g[b].flip(a);
        }
        for &(a, f) in diag {
            if f {
                self.g[a].flip(a);
            }
        }
        self.cost = (self.cost as i64 + dc) as usize;
    }

    /// One annealing step at temperature `t`. Returns true if a move was taken.
    pub fn step<R: Rng>(&mut self, rng: &mut R, t: f64) -> bool {
        let f = rng.gen_range(0..self.n_r);
        let accept = |dc: i64, rng: &mut R| dc <= 0 || rng.gen::<f64>() < (-(dc as f64) / t).exp();
        if !self.minv[f].get(f) {
            // rank one: M⁻¹ += u uᵀ, G += v vᵀ
            let u = self.minv[f].clone();
            let v = self.bt_times(&u);
            let (dc, flips) = self.delta(&[(&v, &v)]);
            if !accept(dc, rng) {
                return false;
            }
            for i in u.ones() {
                self.minv[i].xor_with(&u);
            }
            let diag: Vec<(usize, bool)> = v.ones().map(|a| (a, true)).collect();
            self.apply_g(&flips, &diag, dc);
            self.d.flip(f);
            return true;
        }
        // rank two with a partner g where (M⁻¹)_{fg} = 1
        let cands: Vec<usize> = self.minv[f].ones().filter(|&g| g != f).collect();
        if cands.is_empty() {
            return false;
        }
        let g = cands[rng.gen_range(0..cands.len())];
        let c = !self.minv[g].get(g);
        let (uf, ug) = (self.minv[f].clone(), self.minv[g].clone());
        let (vf, vg) = (self.bt_times(&uf), self.bt_times(&ug));
        let mut terms: Vec<(&BitVec, &BitVec)> = vec![(&vf, &vg), (&vg, &vf)];
        if c {
            terms.push((&vf, &vf));
        }
        let (dc, flips) = self.delta(&terms);
        if !accept(dc, rng) {
            return false;
        }
        // M⁻¹ += c·uf ufᵀ + uf ugᵀ + ug ufᵀ
        for i in 0..self.n_r {
            let (a, b) = (uf.get(i), ug.get(i));
            let mut row = BitVec::zeros(self.n_r);
            if (c && a) ^ b {
                row.xor_with(&uf);
            }
            if a {
                row.xor_with(&ug);
            }
            self.minv[i].xor_with(&row);
        }
        let diag: Vec<(usize, bool)> = (0..self.n_l).map(|a| (a, (c && vf.get(a)) ^ (vf.get(a) & vg.get(a)) ^ (vg.get(a) & vf.get(a)))).collect();
        self.apply_g(&flips, &diag, dc);
        self.d.flip(f);
        self.d.flip(g);
        true
    }
}

/// Result of summing the fillers of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureResult {
    /// Filler fields, in quarter turns, per filler cell.
    pub filler_q: Vec<i64>,
    /// Extra quarter turns per live cell so the live weight comes out right.
    pub live_shift: Vec<i64>,
    /// `Z_grid = k · Z_live`.
    pub k: Prefactor,
}

/// Grid adjacency for cell indices `y·W + x`.
pub fn grid_edges(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                e.push((i, i + 1));
            }
            if y + 1 < h {
                e.push((i, i + w));
            }
        }
    }
    e
}

/// Sums the fillers (cells with `live[i] = false`) with the given parities
/// and checks that exactly the live–live grid edges survive. Filler linear
/// coefficient is the parity bit itself.
pub fn erase_with(w: usize, h: usize, live: &[bool], parity: &[bool]) -> Option<ErasureResult> {
    let n = w * h;
    let edges = grid_edges(w, h);
    let mut deg = vec![0i64; n];
    for &(a, b) in &edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    let fillers: Vec<usize> = (0..n).filter(|&i| !live[i]).collect();
    // l_f = −q_f − deg_f (mod 4) ⇒ q_f = −l_f − deg_f
    let mut q = vec![0i64; n];
    let mut filler_q = Vec::with_capacity(fillers.len());
    for (k, &f) in fillers.iter().enumerate() {
        let qf = crate::field::canonical_quarter(-(parity[k] as i64) - deg[f]);
        q[f] = qf;
        filler_q.push(qf);
    }
    let mut form = QForm::from_graph(&q, &edges);
    for &f in &fillers {
        if !form.alive.get(f) {
            continue;
        }
        form.sum_out(f, &|j| !live[j]).ok()?;
    }
    if form.c.zero {
        return None;
    }
    let mut deg_l = vec![0i64; n];
    let mut n_el = 0i64;
    for &(a, b) in &edges {
        if live[a] && live[b] {
            n_el += 1;
            deg_l[a] += 1;
            deg_l[b] += 1;
            if !form.adj[a].get(b) {
                return None;
            }
        }
    }
    let n_q: usize = (0..n).filter(|&a| live[a]).map(|a| form.adj[a].count_ones()).sum::<usize>() / 2;
    if n_q as i64 != n_el {
        return None;
    }
    let mut live_shift = Vec::new();
    let mut sum_m = 0i64;
    for a in (0..n).filter(|&a| live[a]) {
        let m = (form.lin[a] as i64 + deg_l[a]).rem_euclid(4);
        sum_m += m;
        live_shift.push(m);
    }
    let k = form.c.to_prefactor() * Prefactor::omega_pow(sum_m - n_el);
    Some(ErasureResult { filler_q, live_shift, k })
}

/// Budgeted annealing for filler parities on a `w×h` grid, then exact
/// confirmation. Deterministic for a given `rng` state.
pub fn search_erasure<R: Rng>(w: usize, h: usize, live: &[bool], rng: &mut R, budget: usize) -> Option<ErasureResult> {
    let n = w * h;
    let fillers: Vec<usize> = (0..n).filter(|&i| !live[i]).collect();
    let lives: Vec<usize> = (0..n).filter(|&i| live[i]).collect();
    if fillers.is_empty() {
        return erase_with(w, h, live, &[]);
    }
    let mut pos = vec![usize::MAX; n];
    for (k, &f) in fillers.iter().enumerate() {
        pos[f] = k;
    }
    for (k, &l) in lives.iter().enumerate() {
        pos[l] = k;
    }
    let n_r = fillers.len();
    let mut a_rr = vec![BitVec::zeros(n_r); n_r];
    let mut b = vec![BitVec::zeros(lives.len()); n_r];
    for (x, y) in grid_edges(w, h) {
        match (live[x], live[y]) {
            (false, false) => {
                a_rr[pos[x]].set(pos[y], true);
                a_rr[pos[y]].set(pos[x], true);
            }
            (false, true) => b[pos[x]].set(pos[y], true),
            (true, false) => b[pos[y]].set(pos[x], true),
            _ => {}
        }
    }
    let mut s = ParitySearch::new(a_rr, b, lives.len());
    let mut used = 0usize;
    while used < budget {
        let mut ok = false;
        for _ in 0..64 {
            let d = BitVec::from_indices(n_r, (0..n_r).filter(|_| rng.gen_bool(0.5)));
            used += 1;
            if s.reset(d) {
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
        let sweep = (budget / 4).max(1000).min(budget.saturating_sub(used).max(1));
        for it in 0..sweep {
            if s.cost() == 0 {
                let par: Vec<bool> = (0..n_r).map(|k| s.parities().get(k)).collect();
                if let Some(r) = erase_with(w, h, live, &par) {
                    return Some(r);
                }
                break;
            }
            let t = 2.0 * (1.0 - it as f64 / sweep as f64) + 0.05;
            s.step(rng, t);
        }
        used += sweep;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute(q: &[i64], edges: &[(usize, usize)], summed: &[usize], live_sigma: &[u8]) -> Complex64 {
        let n = q.len();
        let mut z = Complex64::new(0.0, 0.0);
        for x in 0..1usize << summed.len() {
            let mut s = live_sigma.to_vec();
            for (k, &v) in summed.iter().enumerate() {
                s[v] = (x >> k & 1) as u8;
            }
            let spin = |v: usize| 1 - 2 * s[v] as i64;
            let mut e: i64 = (0..n).map(|v| q[v] * spin(v)).sum();
            e += edges.iter().map(|&(a, b)| spin(a) * spin(b)).sum::<i64>();
            z += Prefactor::omega_pow(e).as_complex();
        }
        z
    }

    #[test]
    fn elimination_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(2..9);
            let q: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..5)).collect();
            let mut edges = vec![];
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push((a, b));
                    }
                }
            }
            let k = rng.gen_range(1..n);
            let summed: Vec<usize> = (0..k).collect();
            let mut f = QForm::from_graph(&q, &edges);
            let mut ok = true;
            for &u in &summed {
                if f.alive.get(u) && f.sum_out(u, &|j| j < k).is_err() {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            for x in 0..1usize << (n - k) {
                let mut sig = vec![0u8; n];
                for j in k..n {
                    sig[j] = (x >> (j - k) & 1) as u8;
                }
                let want = brute(&q, &edges, &summed, &sig);
                let got = f.eval(&sig);
                assert!((want - got).norm() < 1e-9 * (1.0 + want.norm()), "{want} {got}");
            }
        }
    }

    #[test]
    fn ring_in_five_by_five() {
        let mut live = vec![false; 25];
        for (x, y) in [(1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)] {
            live[y * 5 + x] = true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(search_erasure(5, 5, &live, &mut rng, 200_000).is_some());
        // the bare 3×3 ring cannot lose its centre
        let mut live3 = vec![true; 9];
        live3[4] = false;
        assert!(search_erasure(3, 3, &live3, &mut rng, 20_000).is_none());
    }
}
