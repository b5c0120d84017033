//! Every rewrite preserves Z on random hosts (≤ 16 spins, edge density 0.3).

mod common;

use ising_forge::eval::{check_equivalence, exact_z_ising};
use proptest::prelude::*;

fn holds(rule: &str, seed: u64) -> Result<(), TestCaseError> {
    for (a, b, p) in common::apply(rule, seed) {
        let za = exact_z_ising(&a, 28).unwrap().value;
        let zb = exact_z_ising(&b, 28).unwrap().value;
        let v = check_equivalence(za, zb, p, 1e-10);
        prop_assert!(v.pass, "{rule} seed {seed}: rel {} abs {}", v.rel_error, v.abs_error);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn leaf(seed in any::<u64>()) { holds("leaf", seed)?; }

    #[test]
    fn split(seed in any::<u64>()) { holds("split", seed)?; }

    #[test]
    fn subdivide(seed in any::<u64>()) { holds("subdivide", seed)?; }

    #[test]
    fn pin(seed in any::<u64>()) { holds("pin", seed)?; }

    #[test]
    fn plaquette(seed in any::<u64>()) { holds("plaquette", seed)?; }

    #[test]
    fn crossing(seed in any::<u64>()) { holds("crossing", seed)?; }
}
