//! Text round trips, canonical forms, and evaluator determinism.

use ising_forge::dsl::{parse_model, render_model};
use ising_forge::eval::exact_z_ising;
use ising_forge::field::{canonicalize_field, wrap_phase};
use ising_forge::serial::{parse_graph, render_graph};
use ising_forge::{ComplexField, IsingGraph, Prefactor, SiteKind, SpinModel, VId};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_8, PI};

fn field() -> impl Strategy<Value = ComplexField> {
    (-3.0f64..3.0, -20i64..20, -2.0f64..2.0).prop_map(|(a, q, r)| ComplexField::new(a, q, r))
}

fn model() -> impl Strategy<Value = SpinModel> {
    let kinds = prop::collection::vec(prop_oneof![Just(SiteKind::Spin), Just(SiteKind::Potts3), Just(SiteKind::Potts4)], 1..8);
    (kinds, prop::collection::vec((any::<u8>(), field()), 0..10)).prop_map(|(kinds, raw)| {
        let mut m = SpinModel::new("rt");
        for (i, k) in kinds.iter().enumerate() {
            m.add_site(format!("x{i}"), *k);
        }
        let n = kinds.len();
        let mut seen = std::collections::HashSet::new();
        for (mask, h) in raw {
            let spins: Vec<usize> = (0..n.min(8)).filter(|&i| mask >> i & 1 == 1 && kinds[i] == SiteKind::Spin).collect();
            let potts: Vec<usize> = (0..n).filter(|&i| kinds[i] != SiteKind::Spin).collect();
            if potts.len() >= 2 && mask & 1 == 1 && kinds[potts[0]] == kinds[potts[1]] {
                if seen.insert((vec![potts[0], potts[1]], true)) {
                    m.add_delta(potts[0], potts[1], h);
                }
            } else if !spins.is_empty() && seen.insert((spins.clone(), false)) {
                m.add_term(spins, h);
            }
        }
        m
    })
}

fn graph() -> impl Strategy<Value = (IsingGraph, Prefactor)> {
    (prop::collection::vec((field(), prop::option::of(prop::bool::ANY)), 1..12), any::<u64>(), -5.0f64..5.0, -10.0f64..10.0).prop_map(
        |(vs, bits, lm, ph)| {
            let mut g = IsingGraph::new();
            for (h, p) in &vs {
                let v = g.add_vertex(*h);
                g.set_pinned(v, p.map(|b| if b { 1 } else { -1 }));
            }
            let n = vs.len() as VId;
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits >> (k % 64) & 1 == 1 {
                        g.add_edge(u, v).unwrap();
                    }
                    k += 1;
                }
            }
            (g, Prefactor::new(lm, ph))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn model_text_round_trip(m in model()) {
        let text = render_model(&m);
        let back = parse_model(&text);
        prop_assume!(m.validate().is_ok());
        let back = back.unwrap();
        prop_assert_eq!(&back.sites, &m.sites);
        prop_assert_eq!(&back.terms, &m.terms);
        prop_assert_eq!(render_model(&back), text);
    }

    #[test]
    fn graph_text_round_trip((g, p) in graph()) {
        let (h, q) = parse_graph(&render_graph(&g, &p)).unwrap();
        prop_assert_eq!(h.edges(), g.edges());
        for (v, x) in g.vertices() {
            prop_assert_eq!(h.field(v), x.field);
            prop_assert_eq!(h.vertex(v).pinned, x.pinned);
        }
        prop_assert_eq!(q, p);
    }

    #[test]
    fn canonical_field_keeps_weights(h in field()) {
        let (c, p) = canonicalize_field(h);
        prop_assert!((-3..=4).contains(&c.quarter_turns));
        prop_assert!(c.residual_imag.abs() < std::f64::consts::FRAC_PI_4);
        prop_assert!(c.imag() > -PI - 1e-12 && c.imag() <= PI + 1e-12);
        prop_assert_eq!(c.real_part, h.real_part);
        prop_assert_eq!(p, Prefactor::ONE);
        let wrapped = c.quarter_turns == -3 && c.residual_imag <= -FRAC_PI_8;
        if wrapped {
            prop_assert!(c.residual_imag > -std::f64::consts::FRAC_PI_4);
        } else {
            prop_assert!(c.residual_imag > -FRAC_PI_8 && c.residual_imag <= FRAC_PI_8);
            if h.residual_imag > -FRAC_PI_8 && h.residual_imag <= FRAC_PI_8 {
                prop_assert_eq!(c.residual_imag, h.residual_imag);
            }
        }
        for s in [1.0, -1.0] {
            let a = (h.value() * s).exp();
            let b = p.as_complex() * (c.value() * s).exp();
            prop_assert!((a - b).norm() <= 1e-9 * a.norm());
        }
        prop_assert_eq!(canonicalize_field(c).0, c);
    }

    #[test]
    fn phase_is_wrapped(x in -100.0f64..100.0) {
        let w = wrap_phase(x);
        prop_assert!(w > -PI && w <= PI);
        let d = (Complex64::from_polar(1.0, x) - Complex64::from_polar(1.0, w)).norm();
        prop_assert!(d < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn evaluator_is_thread_count_independent((g, _) in graph()) {
        let mut big = g.clone();
        // widen past one block so the parallel split matters
        for _ in 0..12 {
            big.add_vertex(ComplexField::new(0.1, 1, 0.0));
        }
        let run = |t: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            pool.install(|| exact_z_ising(&big, 28).unwrap().value)
        };
        let a = run(1);
        prop_assert_eq!(a, run(3));
        prop_assert_eq!(a, run(8));
    }
}
