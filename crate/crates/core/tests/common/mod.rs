//! Random hosts and one application of each rewrite rule, shared by the
//! property tests and the acceptance run.
#![allow(dead_code)]

use ising_forge::rewrite::*;
use ising_forge::{ComplexField, IsingGraph, Prefactor, VId};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RULES: [&str; 6] = ["leaf", "split", "subdivide", "pin", "plaquette", "crossing"];

/// 4..=16 spins, fields with Re ∈ [−1, 1] and Im ∈ [−3.2, 3.2], edge density 0.3.
pub fn host(seed: u64) -> (IsingGraph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=16);
    let mut g = IsingGraph::new();
    for _ in 0..n {
        let h = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-3.2..3.2));
        g.add_vertex(ComplexField::from_complex(h));
    }
    for u in 0..n as VId {
        for v in u + 1..n as VId {
            if rng.gen_bool(0.3) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    (g, rng)
}

fn pick(rng: &mut ChaCha8Rng, g: &IsingGraph) -> VId {
    let ids: Vec<VId> = g.vertex_ids().collect();
    ids[rng.gen_range(0..ids.len())]
}

fn distinct(rng: &mut ChaCha8Rng, g: &IsingGraph, k: usize) -> Vec<VId> {
    let mut ids: Vec<VId> = g.vertex_ids().collect();
    for i in 0..k {
        let j = rng.gen_range(i..ids.len());
        ids.swap(i, j);
    }
    ids.truncate(k);
    ids
}

/// `(before, after, ΔP)` pairs with `Z(before) = ΔP·Z(after)` expected.
/// Pin yields two: the pin itself and an unpin of a random sign.
pub fn apply(rule: &str, seed: u64) -> Vec<(IsingGraph, IsingGraph, Prefactor)> {
    let (mut g, mut rng) = host(seed);
    match rule {
        "leaf" => {
            let mut h = g.clone();
            let (_, p) = attach_leaf(&mut h, pick(&mut rng, &g)).unwrap();
            vec![(g, h, p)]
        }
        "split" => {
            let v = pick(&mut rng, &g);
            while g.degree(v) < 2 {
                let u = distinct(&mut rng, &g, 1)[0];
                if u != v && !g.has_edge(u, v) {
                    g.add_edge(u, v).unwrap();
                }
            }
            let nb: Vec<VId> = g.neighbors(v).iter().copied().collect();
            let k = rng.gen_range(1..nb.len());
            let mut h = g.clone();
            let (_, p) = split_vertex(&mut h, v, &nb[..k]).unwrap();
            vec![(g, h, p)]
        }
        "subdivide" => {
            let e = g.edges();
            let (u, v) = if e.is_empty() {
                let d = distinct(&mut rng, &g, 2);
                g.add_edge(d[0], d[1]).unwrap();
                (d[0], d[1])
            } else {
                e[rng.gen_range(0..e.len())]
            };
            let mut h = g.clone();
            let (_, p) = subdivide_edge(&mut h, u, v).unwrap();
            vec![(g, h, p)]
        }
        "pin" => {
            let v = pick(&mut rng, &g);
            let mut fixed = g.clone();
            fixed.set_pinned(v, Some(1));
            let mut h = g.clone();
            let (_, p) = pin_spin(&mut h, v).unwrap();
            let first = (fixed.clone(), h, p);
            let s = if rng.gen_bool(0.5) { 1 } else { -1 };
            fixed.set_pinned(v, Some(s));
            let mut h = fixed.clone();
            let (_, p) = unpin(&mut h, v).unwrap();
            vec![first, (fixed, h, p)]
        }
        "plaquette" => {
            let d = distinct(&mut rng, &g, 4);
            let mut h = g.clone();
            let (_, p) = insert_plaquette_spin(&mut h, [d[0], d[1], d[2], d[3]]).unwrap();
            vec![(g, h, p)]
        }
        "crossing" => {
            let d = distinct(&mut rng, &g, 4);
            for (a, b) in [(d[0], d[2]), (d[1], d[3])] {
                if !g.has_edge(a, b) {
                    g.add_edge(a, b).unwrap();
                }
            }
            let mut h = g.clone();
            let (_, p) = remove_crossing(&mut h, d[0], d[2], d[1], d[3]).unwrap();
            vec![(g, h, p)]
        }
        _ => panic!("unknown rule {rule}"),
    }
}
