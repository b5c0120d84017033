//! Exact complex partition functions. The verification oracle for every pass.
//!
//! Configurations are enumerated in fixed blocks of 2^16 and the block sums
//! are reduced in index order, so the result does not depend on how rayon
//! schedules the blocks.

use crate::compiler::ConstraintSystem;
use crate::error::{Error, Result};
use crate::field::Prefactor;
use crate::gf2::{BitMatrix, BitVec};
use crate::graph::{IsingGraph, VId};
use crate::grid::GridIsing;
use crate::model::{SiteKind, SpinModel};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::time::{Duration, Instant};

pub const DEFAULT_CAP: usize = 28;
const BLOCK_BITS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Brute,
    Constrained,
    Transfer,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Constrained => "constrained",
            Method::Transfer => "transfer",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ZReport {
    pub value: Complex64,
    pub n_configs: u128,
    pub elapsed: Duration,
    pub method: Method,
}

impl fmt::Display for ZReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} {:?} {} {} {}",
            self.value.re,
            self.value.im,
            self.n_configs,
            self.method,
            self.elapsed.as_millis()
        )
    }
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Pairwise sum in the given order.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        return xs.iter().fold(czero(), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sums `f(index)` over `0..n` with the fixed block reduction.
fn blocked_sum<F>(n_bits: usize, f: F) -> Complex64
where
    F: Fn(u64, &mut Vec<Complex64>) + Sync,
{
    let low = n_bits.min(BLOCK_BITS);
    let n_blocks = 1u64 << (n_bits - low);
    let sums: Vec<Complex64> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut buf = Vec::with_capacity(1 << low);
            f(b, &mut buf);
            pairwise_sum(&buf)
        })
        .collect();
    pairwise_sum(&sums)
}

fn omega_table() -> [Complex64; 8] {
    let h = FRAC_1_SQRT_2;
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(h, h),
        Complex64::new(0.0, 1.0),
        Complex64::new(-h, h),
        Complex64::new(-1.0, 0.0),
        Complex64::new(-h, -h),
        Complex64::new(0.0, -1.0),
        Complex64::new(h, -h),
    ]
}

/// Brute-force Z of a source model (Ising and Potts sites).
pub fn exact_z_model(m: &SpinModel, cap_bits: usize) -> Result<ZReport> {
    let t0 = Instant::now();
    m.validate()?;
    let radices: Vec<u64> = m.sites.iter().map(|s| s.kind.arity() as u64).collect();
    let total = m.n_configs().unwrap_or(u128::MAX);
    if total > 1u128 << cap_bits.min(100) {
        let needed = (total as f64).log2().ceil() as usize;
        return Err(Error::CapExceeded { needed, cap: cap_bits });
    }
    let total = total as u64;
    let n_bits = 64 - (total.max(1) - 1).leading_zeros() as usize;
    let terms: Vec<(Vec<usize>, Complex64, bool)> =
        m.terms.iter().map(|t| (t.sites.clone(), t.coupling.value(), t.delta)).collect();
    let spin = m.sites.iter().map(|s| s.kind == SiteKind::Spin).collect::<Vec<_>>();
    let value = blocked_sum(n_bits, |b, buf| {
        let low = n_bits.min(BLOCK_BITS);
        let mut digits = vec![0u64; radices.len()];
        for x in 0..(1u64 << low) {
            let idx = (b << low) | x;
            if idx >= total {
                break;
            }
            let mut r = idx;
            for (d, &k) in digits.iter_mut().zip(&radices) {
                *d = r % k;
                r /= k;
            }
            let mut e = czero();
            for (sites, j, delta) in &terms {
                if *delta {
                    if digits[sites[0]] == digits[sites[1]] {
                        e += j;
                    }
                } else {
                    let mut s = 1.0;
                    for &i in sites {
                        debug_assert!(spin[i]);
                        if digits[i] == 1 {
                            s = -s;
                        }
                    }
                    e += j * s;
                }
            }
            buf.push(e.exp());
        }
    });
    Ok(ZReport { value, n_configs: total as u128, elapsed: t0.elapsed(), method: Method::Brute })
}

/// Free-spin form of a graph: pinned spins folded into fields and a constant.
struct Reduced {
    fields: Vec<Complex64>,
    edges: Vec<(usize, usize)>,
    constant: Complex64,
}

fn reduce_pinned(g: &IsingGraph) -> Reduced {
    let gamma = Complex64::new(0.0, std::f64::consts::FRAC_PI_4);
    let free: Vec<VId> = g.vertices().filter(|(_, x)| x.pinned.is_none()).map(|(v, _)| v).collect();
    let index: BTreeMap<VId, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut fields: Vec<Complex64> = free.iter().map(|&v| g.field(v).value()).collect();
    let mut log_const = czero();
    for (_, x) in g.vertices() {
        if let Some(p) = x.pinned {
            log_const += x.field.value() * p as f64;
        }
    }
    let mut edges = Vec::new();
    for (u, v) in g.edges() {
        let (pu, pv) = (g.vertex(u).pinned, g.vertex(v).pinned);
        match (pu, pv) {
            (None, None) => edges.push((index[&u], index[&v])),
            (Some(a), None) => fields[index[&v]] += gamma * a as f64,
            (None, Some(b)) => fields[index[&u]] += gamma * b as f64,
            (Some(a), Some(b)) => log_const += gamma * (a * b) as f64,
        }
    }
    Reduced { fields, edges, constant: log_const.exp() }
}

/// Z over free spins with fields `h` and iπ/4 couplings on `edges`.
///
/// The low 16 spins are tabulated once; per block only the cross edges to
/// the high spins change, and those are integer counts mod 8, so there is
/// no drift from incremental updates.
pub fn z_free(h: &[Complex64], edges: &[(usize, usize)]) -> Complex64 {
    let n = h.len();
    let low = n.min(BLOCK_BITS);
    let w = omega_table();
    // low-part tables
    let low_edges: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| a < low && b < low).collect();
    let nlow = 1usize << low;
    let mut field_low = vec![czero(); nlow];
    let mut elow = vec![0u8; nlow];
    for x in 0..nlow {
        let mut e = czero();
        for (i, hi) in h.iter().enumerate().take(low) {
            e += if x >> i & 1 == 0 { *hi } else { -hi };
        }
        field_low[x] = e.exp();
        let mut k = 0i32;
        for &(a, b) in &low_edges {
            k += if (x >> a ^ x >> b) & 1 == 0 { 1 } else { -1 };
        }
        elow[x] = k.rem_euclid(8) as u8;
    }
    let high_edges: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| a >= low && b >= low).collect();
    let cross: Vec<(usize, usize)> = edges
        .iter()
        .filter(|&&(a, b)| (a < low) != (b < low))
        .map(|&(a, b)| if a < low { (a, b) } else { (b, a) })
        .collect();
    blocked_sum(n, |blk, buf| {
        let spin = |i: usize| -> i32 {
            if (blk >> (i - low)) & 1 == 0 {
                1
            } else {
                -1
            }
        };
        let mut eh = czero();
        for (i, hi) in h.iter().enumerate().skip(low) {
            eh += hi * spin(i) as f64;
        }
        let mut khigh = 0i32;
        for &(a, b) in &high_edges {
            khigh += spin(a) * spin(b);
        }
        // c_u = Σ of high neighbour spins for each low spin u
        let mut c = vec![0i32; low];
        for &(a, b) in &cross {
            c[a] += spin(b);
        }
        let lo_bits = low.min(8);
        let mut t1 = vec![0i32; 1 << lo_bits];
        let mut t2 = vec![0i32; 1 << (low - lo_bits)];
        for (x, t) in t1.iter_mut().enumerate() {
            *t = (0..lo_bits).map(|i| if x >> i & 1 == 0 { c[i] } else { -c[i] }).sum();
        }
        for (x, t) in t2.iter_mut().enumerate() {
            *t = (0..low - lo_bits).map(|i| if x >> i & 1 == 0 { c[i + lo_bits] } else { -c[i + lo_bits] }).sum();
        }
        let base = eh.exp();
        for x in 0..nlow {
            let k = (elow[x] as i32 + khigh + t1[x & ((1 << lo_bits) - 1)] + t2[x >> lo_bits]).rem_euclid(8);
            buf.push(field_low[x] * w[k as usize]);
        }
        for v in buf.iter_mut() {
            *v *= base;
        }
    })
}

pub fn exact_z_ising(g: &IsingGraph, cap: usize) -> Result<ZReport> {
    let t0 = Instant::now();
    let n = g.n_free();
    if n > cap {
        return Err(Error::CapExceeded { needed: n, cap });
    }
    let r = reduce_pinned(g);
    let value = z_free(&r.fields, &r.edges) * r.constant;
    Ok(ZReport { value, n_configs: 1u128 << n, elapsed: t0.elapsed(), method: Method::Brute })
}

/// Z of a constraint system: enumerates the solution space of the parity
/// constraints through a null-space basis, times 2^overcount.
pub fn exact_z_constrained(sys: &ConstraintSystem, cap: usize) -> Result<ZReport> {
    let t0 = Instant::now();
    let n = sys.variables.len();
    let rows: Vec<BitVec> = sys.constraints.iter().map(|c| BitVec::from_indices(n, c.iter().copied())).collect();
    let cm = BitMatrix::from_rows(n, rows);
    let basis = cm.null_space();
    let k = basis.len();
    if k > cap {
        return Err(Error::CapExceeded { needed: k, cap });
    }
    // all constraints are homogeneous (product = +1), so the zero vector is a solution
    let h: Vec<Complex64> = sys.variables.iter().map(|(_, f)| f.value()).collect();
    let value = blocked_sum(k, |b, buf| {
        let low = k.min(BLOCK_BITS);
        for x in 0..(1u64 << low) {
            let a = (b << low) | x;
            let mut s = BitVec::zeros(n);
            for (i, kv) in basis.iter().enumerate() {
                if a >> i & 1 == 1 {
                    s.xor_with(kv);
                }
            }
            let mut e = czero();
            for (i, hi) in h.iter().enumerate() {
                e += if s.get(i) { -hi } else { *hi };
            }
            buf.push(e.exp());
        }
    });
    let factor = Prefactor::sqrt2_pow(2 * sys.overcount_exponent).as_complex();
    Ok(ZReport { value: value * factor, n_configs: 1u128 << k, elapsed: t0.elapsed(), method: Method::Constrained })
}

/// Row-by-row transfer contraction over a state vector of 2^W amplitudes.
pub fn transfer_z(g: &GridIsing) -> Result<ZReport> {
    let t0 = Instant::now();
    let (w, hgt) = (g.width, g.height);
    if w > 24 {
        return Err(Error::CapExceeded { needed: w, cap: 24 });
    }
    let om = omega_table();
    let n = 1usize << w;
    // row weights factor over the two halves of the row and the bond between them
    let lo_bits = w / 2;
    let half = |y: usize, from: usize, to: usize| -> Vec<Complex64> {
        (0..1usize << (to - from))
            .map(|t| {
                let mut a = Complex64::new(1.0, 0.0);
                let mut k = 0i32;
                for x in from..to {
                    let up = t >> (x - from) & 1 == 0;
                    if let Some(p) = g.pinned(x, y) {
                        if (p > 0) != up {
                            return czero();
                        }
                    }
                    let h = g.field(x, y).value();
                    a *= if up { h.exp() } else { (-h).exp() };
                    if x + 1 < to {
                        k += if (t >> (x - from) ^ t >> (x + 1 - from)) & 1 == 0 { 1 } else { -1 };
                    }
                }
                a * om[k.rem_euclid(8) as usize]
            })
            .collect()
    };
    let row = |y: usize| -> Vec<Complex64> {
        let (lo, hi) = (half(y, 0, lo_bits), half(y, lo_bits, w));
        let mask = (1usize << lo_bits) - 1;
        (0..n)
            .into_par_iter()
            .map(|s| {
                let mut a = lo[s & mask] * hi[s >> lo_bits];
                if lo_bits > 0 && lo_bits < w {
                    let same = (s >> (lo_bits - 1) ^ s >> lo_bits) & 1 == 0;
                    a *= om[if same { 1 } else { 7 }];
                }
                a
            })
            .collect()
    };
    let mut v: Vec<Complex64> = if hgt == 0 { Vec::new() } else { row(0) };
    for y in 1..hgt {
        // vertical bonds, one site at a time: [[ω, ω⁻¹], [ω⁻¹, ω]]
        for x in 0..w {
            let bit = 1usize << x;
            for s in 0..n {
                if s & bit == 0 {
                    let (a, b) = (v[s], v[s | bit]);
                    v[s] = a * om[1] + b * om[7];
                    v[s | bit] = a * om[7] + b * om[1];
                }
            }
        }
        let r = row(y);
        v.par_iter_mut().zip(r.par_iter()).for_each(|(a, b)| *a *= b);
    }
    let value = if hgt == 0 { Complex64::new(1.0, 0.0) } else { pairwise_sum(&v) };
    Ok(ZReport {
        value,
        n_configs: 1u128 << (w * hgt).min(127),
        elapsed: t0.elapsed(),
        method: Method::Transfer,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub rel_error: f64,
    pub abs_error: f64,
}

/// `zA ≟ p·zB`. Magnitudes are compared after scaling out the larger log, so
/// very large or small prefactors do not overflow; when both sides are below
/// `tol` in magnitude the absolute error decides.
pub fn check_equivalence(za: Complex64, zb: Complex64, p: Prefactor, tol: f64) -> Verdict {
    let pb = Prefactor::from_complex(zb) * p;
    let pa = Prefactor::from_complex(za);
    if pa.is_zero() && pb.is_zero() {
        return Verdict { pass: true, rel_error: 0.0, abs_error: 0.0 };
    }
    let m = pa.log_magnitude.max(pb.log_magnitude);
    let a = Prefactor::new(pa.log_magnitude - m, pa.phase).as_complex();
    let b = Prefactor::new(pb.log_magnitude - m, pb.phase).as_complex();
    let rel = (a - b).norm() / a.norm().max(b.norm());
    let abs = (a - b).norm() * m.exp();
    let small = m.exp() <= tol;
    Verdict { pass: rel <= tol || (small && abs <= tol), rel_error: rel, abs_error: abs }
}
