//! Acceptance run: one PASS/FAIL line per criterion, printed in order.
//! `cargo test --test acceptance -- --nocapture` shows the lines.

mod common;

use ising_forge::compiler::{apply_l1_gadget, compile, compile_with_constraints};
use ising_forge::dsl::{gen_lattice, parse_model, LatticeKind};
use ising_forge::duality::{compile_faces, derive_square_duality, fit_decimation, self_dual_point};
use ising_forge::eval::{check_equivalence, exact_z_ising, exact_z_model, transfer_z};
use ising_forge::field::canonical_quarter;
use ising_forge::gadgets::*;
use ising_forge::planar::{embed_grid, embed_with_layout, EmbedOptions, Embedding, GridLayout};
use ising_forge::potts::encode_all;
use ising_forge::{ComplexField, IsingGraph, Prefactor, VId};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_4;
use std::time::{Duration, Instant};

const AC1_BUDGET: Duration = Duration::from_secs(1);
const AC4_TOL: f64 = 1e-10;
const AC4_BUDGET: Duration = Duration::from_secs(60);
const AC4_MAX_FREE: usize = 26;
const AC5_TOL: f64 = 1e-10;
const AC5_CASES: u64 = 200;
const AC6_TOL: f64 = 1e-10;
const AC6_MAX_FREE: usize = 26;
const AC7_TOL: f64 = 1e-10;
const AC7_H_TOL: f64 = 1e-12;
const AC7_SAMPLES: usize = 20;
const AC7_REPRO: f64 = 1e-12;
const AC8_TOL: f64 = 1e-10;
const AC8_FIELD_SETS: usize = 50;
const AC8_MAX_CELLS: usize = 24;
const AC9_SPINS: usize = 26;
const AC9_BUDGET: Duration = Duration::from_secs(60);
const AC9_THREADS: usize = 8;
const AC9_TOL: f64 = 1e-13;

struct Line {
    id: &'static str,
    pass: bool,
    what: &'static str,
    detail: String,
}

fn line(id: &'static str, what: &'static str, pass: bool, detail: String) -> Line {
    Line { id, pass, what, detail }
}

fn ac1() -> Line {
    let t = Instant::now();
    let l1 = (1..=8).all(l1_identity_holds);
    let leaf = leaf_identity_holds();
    let sub = subdivide_identity_holds();
    let l3 = (-8..=8).all(l3_identity_holds);
    let l4 = (2..=4usize).all(|m| (0..1u64 << (m * (m - 1) / 2)).all(|k| l4_identity_holds(m, k)));
    let el = t.elapsed();
    line(
        "AC1",
        "identity exhaustion (L1 m=1..8, i1, i3, L3 x=-8..8, L4 m=2..4 all K)",
        l1 && leaf && sub && l3 && l4 && el < AC1_BUDGET,
        format!("l1 {l1} i1 {leaf} i3 {sub} l3 {l3} l4 {l4}, exact Z[ω], {:.1} ms", el.as_secs_f64() * 1e3),
    )
}

fn ac2() -> Line {
    let merge = fit_gadget_constants(&Shape::merge());
    let cross = fit_gadget_constants(&Shape::crossing());
    let fits = matches!((&merge, &cross), (Ok(m), Ok(c)) if m.verify() && c.verify());
    let pm = printed_merge_failures();
    let pc = printed_crossing_failures();
    let expected = pm == vec![vec![-1, -1]] && pc.contains(&vec![1, 1, 1, 1]);
    let show = |t: &Result<GadgetTemplate, _>| match t {
        Ok(t) => format!("a0 {} d {:?}", t.ancilla_q, t.shifts),
        Err(e) => format!("{e}"),
    };
    line(
        "AC2",
        "fitted merge/crossing gadgets exact; printed constants fail where expected",
        fits && expected,
        format!("merge {} crossing {}; printed merge fails at {pm:?}, printed crossing fails at {} assignments incl. all +1", show(&merge), show(&cross), pc.len()),
    )
}

/// `(degree, field)` of every term vertex and ancilla, and whether the
/// prefactor is exactly 2^overcount · Π ½e^{imπ/4}.
fn face_fields(kind: LatticeKind, rows: usize, cols: usize, j: f64) -> (Vec<(usize, ComplexField)>, Vec<(usize, ComplexField)>, bool) {
    let (_, c) = compile_faces(kind, rows, cols, ComplexField::real(j)).unwrap();
    summarize(&c)
}

fn summarize(c: &ising_forge::compiler::Compiled) -> (Vec<(usize, ComplexField)>, Vec<(usize, ComplexField)>, bool) {
    let g = &c.graph;
    let black: Vec<(usize, ComplexField)> = c.term_vertices.iter().map(|&v| (g.degree(v), g.field(v))).collect();
    let white: Vec<(usize, ComplexField)> = c.ancillas.iter().map(|&v| (g.degree(v), g.field(v))).collect();
    // expected prefactor: 2^overcount · Π ½e^{imπ/4}
    let mut p = Prefactor::sqrt2_pow(2 * c.system.overcount_exponent);
    for k in &c.system.constraints {
        p *= Prefactor::sqrt2_pow(-2) * Prefactor::omega_pow(k.len() as i64);
    }
    let dp = c.prefactor * p.inv();
    let same = dp.log_magnitude.abs() < 1e-14 && dp.phase.abs() < 1e-14;
    (black, white, same)
}

fn ac3() -> Line {
    let j = 0.3;
    let printed = |q: i64| ComplexField::new(j, canonical_quarter(q), 0.0);
    let white = |q: i64| ComplexField::quarter(canonical_quarter(q));
    let mut ok = true;
    let mut notes = Vec::new();
    let mut check = |name: &str, bulk_deg: usize, black_q: i64, white_m: usize, white_q: i64, r: (Vec<(usize, ComplexField)>, Vec<(usize, ComplexField)>, bool)| {
        let (b, w, pf) = r;
        let bulk: Vec<_> = b.iter().filter(|(d, _)| *d == bulk_deg).collect();
        let full: Vec<_> = w.iter().filter(|(d, _)| *d == white_m).collect();
        let good = !bulk.is_empty()
            && !full.is_empty()
            && bulk.iter().all(|(_, h)| *h == printed(black_q))
            && full.iter().all(|(_, h)| *h == white(white_q))
            && pf;
        ok &= good;
        notes.push(format!("{name} {}", if good { "ok" } else { "MISMATCH" }));
    };
    // triangular: black J−iπ/2, white −3iπ/4, constant ½e^{3iπ/4} per triangle
    check("triangular", 2, -2, 3, -3, face_fields(LatticeKind::Triangular, 2, 4, j));
    // hexagonal: black J−iπ/2, white −3iπ/2, constant ½e^{3iπ/2}
    check("hexagonal", 2, -2, 6, -6, face_fields(LatticeKind::Hexagonal, 2, 2, j));
    // square: black J−iπ/2, white ±iπ
    check("square", 2, -2, 4, 4, face_fields(LatticeKind::Square, 3, 3, j));
    // three-body: one constraint per interior site over its six triangles
    let m = gen_lattice(LatticeKind::Triangular3Body, 4, 8, ComplexField::real(j), 1000).unwrap();
    let stars: Vec<Vec<usize>> = (0..m.sites.len())
        .map(|s| m.terms.iter().enumerate().filter(|(_, t)| t.sites.contains(&s)).map(|(i, _)| i).collect::<Vec<_>>())
        .filter(|v| v.len() == 6)
        .collect();
    let c = compile_with_constraints(&m, stars).unwrap();
    check("three-body", 3, -3, 6, -6, summarize(&c));
    // the per-constraint constants themselves
    let consts = [(3, 3), (6, 6), (4, 4)].iter().all(|&(m, q)| {
        let mut g = IsingGraph::new();
        let vs: Vec<VId> = (0..m).map(|_| g.add_vertex(ComplexField::ZERO)).collect();
        let (_, p) = apply_l1_gadget(&mut g, &vs).unwrap();
        p == Prefactor::sqrt2_pow(-2) * Prefactor::omega_pow(q)
    });
    ok &= consts;
    line("AC3", "compiled fields match the printed lattice Hamiltonians", ok, format!("{} constants {consts}", notes.join(", ")))
}

const BUNDLED: [(&str, &str); 6] = [
    ("triangle", include_str!("../../../models/triangle.ifm")),
    ("strip", include_str!("../../../models/strip.ifm")),
    ("hexagon", include_str!("../../../models/hexagon.ifm")),
    ("star3", include_str!("../../../models/star3.ifm")),
    ("potts4_chain", include_str!("../../../models/potts4_chain.ifm")),
    ("potts3_chain", include_str!("../../../models/potts3_chain.ifm")),
];

fn ac4() -> Line {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, text) in BUNDLED {
        let t = Instant::now();
        let m = parse_model(text).unwrap();
        let (spin, pe) = encode_all(&m).unwrap();
        let c = compile(&spin).unwrap();
        let n = c.graph.n_free();
        let zs = exact_z_model(&m, 28).unwrap().value;
        let zg = exact_z_ising(&c.graph, 28).unwrap().value;
        let v = check_equivalence(zs, zg, pe * c.prefactor, AC4_TOL);
        let el = t.elapsed();
        let good = v.pass && n <= AC4_MAX_FREE && m.sites.len() <= 12 && el < AC4_BUDGET;
        ok &= good;
        notes.push(format!("{name} n={n} rel={:.1e} {}ms", v.rel_error, el.as_millis()));
    }
    line("AC4", "bundled models: Z_source = P·Z_compiled", ok, notes.join("; "))
}

fn ac5() -> Line {
    let mut worst = 0.0f64;
    let mut fails = Vec::new();
    for rule in common::RULES {
        for seed in 0..AC5_CASES {
            for (a, b, p) in common::apply(rule, seed) {
                let za = exact_z_ising(&a, 28).unwrap().value;
                let zb = exact_z_ising(&b, 28).unwrap().value;
                let v = check_equivalence(za, zb, p, AC5_TOL);
                worst = worst.max(v.rel_error);
                if !v.pass {
                    fails.push(format!("{rule}#{seed}"));
                }
            }
        }
    }
    line(
        "AC5",
        "each rewrite rule preserves Z on 200 random hosts",
        fails.is_empty(),
        format!("rules {:?}, worst rel {worst:.1e}, failures {fails:?}", common::RULES),
    )
}

fn graph(fields: &[(f64, i64)], edges: &[(VId, VId)]) -> IsingGraph {
    let mut g = IsingGraph::new();
    for &(re, q) in fields {
        g.add_vertex(ComplexField::new(re, q, 0.0));
    }
    for &(a, b) in edges {
        g.add_edge(a, b).unwrap();
    }
    g
}

fn grid_case(name: &str, g: &IsingGraph, e: &Embedding) -> (bool, String) {
    let rep = e.grid.check_invariants();
    let n = e.grid.n_free();
    let za = exact_z_ising(g, 28).unwrap().value;
    let zb = exact_z_ising(&e.grid.to_graph(), 28).unwrap().value;
    let v = check_equivalence(za, zb, e.grid.prefactor, AC6_TOL);
    let ok = rep.conforming && rep.couplings == rep.expected_couplings && n <= AC6_MAX_FREE && v.pass;
    (ok, format!("{name} {}x{} n={n} conforming {} rel {:.1e}", e.grid.width, e.grid.height, rep.conforming, v.rel_error))
}

fn ac6() -> Line {
    let opts = EmbedOptions::default();
    let tri = graph(&[(0.3, 0), (-0.2, 1), (0.1, -2)], &[(0, 1), (1, 2), (0, 2)]);
    let pent = graph(&[(0.2, 0), (-0.1, 1), (0.3, 0), (0.0, -1), (0.15, 2)], &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
    let cross = graph(&[(0.2, 0), (0.0, 1), (-0.3, 0), (0.1, -1)], &[(0, 2), (1, 3)]);
    let mut layout = GridLayout::default();
    for (v, c) in [(0, (0, 1)), (2, (2, 1)), (1, (1, 0)), (3, (1, 2))] {
        layout.pos.insert(v, c);
    }
    let cases = [
        ("triangle", &tri, embed_grid(&tri, &opts)),
        ("pentagon", &pent, embed_grid(&pent, &opts)),
        ("crossing", &cross, embed_with_layout(&cross, &layout, &opts)),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, g, e) in cases {
        match e {
            Ok(e) => {
                let (good, s) = grid_case(name, g, &e);
                let good = good && (name != "crossing" || e.report.crossings == 1);
                ok &= good;
                notes.push(s);
            }
            Err(err) => {
                ok = false;
                notes.push(format!("{name} error {err}"));
            }
        }
    }
    line("AC6", "triangle, pentagon, crossing reach conforming grids with Z verified", ok, notes.join("; "))
}

fn ac7() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = [0.0f64; 3];
    let mut sym = true;
    for _ in 0..AC7_SAMPLES {
        let j = Complex64::new(rng.gen_range(0.05..2.0), rng.gen_range(-0.7..0.7));
        let f = fit_decimation(j - Complex64::new(0.0, 2.0 * FRAC_PI_4)).unwrap();
        sym &= f.h1 == f.h2;
        worst[0] = worst[0].max((f.h1 - Complex64::new(0.0, FRAC_PI_4)).norm());
        worst[1] = worst[1].max((f.a * f.a + 0.5 * (2.0 * j).sinh()).norm());
        worst[2] = worst[2].max(((-2.0 * f.k).exp() - j.tanh()).norm());
    }
    let a = sym && worst[0] <= AC7_H_TOL && worst[1] <= AC7_TOL && worst[2] <= AC7_TOL;
    let js = self_dual_point();
    let fk = fit_decimation(Complex64::new(js, -2.0 * FRAC_PI_4)).unwrap().k;
    let b = (fk - Complex64::new(js, 0.0)).norm() <= AC7_TOL;
    let mut c = true;
    let mut ratios = Vec::new();
    for (r, cc) in [(2, 2), (2, 3)] {
        let x = derive_square_duality(r, cc, ComplexField::real(0.5), AC7_TOL).unwrap();
        let y = derive_square_duality(r, cc, ComplexField::real(0.5), AC7_TOL).unwrap();
        c &= (x.ratio - y.ratio).norm() <= AC7_REPRO * x.ratio.norm() && x.lattice.exact.pass;
        ratios.push(format!("{r}x{cc} Z/closed={:.6}", x.ratio.re));
    }
    line(
        "AC7",
        "duality: h=iπ/4, A²=-½sinh2J, e^-2K=tanhJ; K(J*)=J*; finite-lattice report reproducible",
        a && b && c,
        format!(
            "(a) h1=h2 {sym} max|h-iπ/4| {:.1e} max|A²+½sinh2J| {:.1e} max|e^-2K-tanhJ| {:.1e}; (b) J*={js:.10} |K-J*| {:.1e}; (c) {}",
            worst[0],
            worst[1],
            worst[2],
            (fk - js).norm(),
            ratios.join(" ")
        ),
    )
}

fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ising_forge::grid::GridIsing {
    let mut g = ising_forge::grid::GridIsing::new(w, h);
    for y in 0..h {
        for x in 0..w {
            g.set_field(x, y, ComplexField::new(rng.gen_range(-0.5..0.5), rng.gen_range(-3..=4), rng.gen_range(-0.3..0.3)));
            if rng.gen_bool(0.05) {
                g.set_pinned(x, y, Some(if rng.gen_bool(0.5) { 1 } else { -1 }));
            }
        }
    }
    g
}

fn ac8() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut shapes = 0;
    let mut fails = Vec::new();
    for w in 1..=AC8_MAX_CELLS {
        for h in 1..=AC8_MAX_CELLS / w {
            shapes += 1;
            for k in 0..AC8_FIELD_SETS {
                let g = random_grid(&mut rng, w, h);
                let a = transfer_z(&g).unwrap().value;
                let b = exact_z_ising(&g.to_graph(), 28).unwrap().value;
                let v = check_equivalence(a, b, Prefactor::ONE, AC8_TOL);
                worst = worst.max(v.rel_error);
                if !v.pass {
                    fails.push(format!("{w}x{h}#{k}"));
                }
            }
        }
    }
    line(
        "AC8",
        "transfer_z ≡ exact_z_ising on every grid with W·H ≤ 24",
        fails.is_empty(),
        format!("{shapes} shapes x {AC8_FIELD_SETS} field sets, worst rel {worst:.1e}, failures {fails:?}"),
    )
}

fn ac9() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = random_grid(&mut rng, 2, AC9_SPINS / 2);
    let mut g = g.to_graph();
    for v in g.vertex_ids().collect::<Vec<_>>() {
        g.set_pinned(v, None);
    }
    let mut values = Vec::new();
    let mut timed = Duration::ZERO;
    for threads in [1, 2, AC9_THREADS] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let t = Instant::now();
        let z = pool.install(|| exact_z_ising(&g, 28).unwrap().value);
        if threads == AC9_THREADS {
            timed = t.elapsed();
        }
        values.push(z);
    }
    let spread = values.iter().map(|z| (z - values[0]).norm() / values[0].norm()).fold(0.0, f64::max);
    line(
        "AC9",
        "26 free spins within 60 s on 8 threads, identical across thread counts",
        g.n_free() == AC9_SPINS && timed <= AC9_BUDGET && spread <= AC9_TOL,
        format!("n={} {:.2} s on {AC9_THREADS} threads, spread over 1/2/{AC9_THREADS} threads {spread:.1e}", g.n_free(), timed.as_secs_f64()),
    )
}

// Runs without the libtest harness so the per-criterion lines are never captured.
fn main() {
    let checks: [fn() -> Line; 9] = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9];
    let mut failed = Vec::new();
    for f in checks {
        let l = f();
        println!("{} {} {} :: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.what, l.detail);
        if !l.pass {
            failed.push(l.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
