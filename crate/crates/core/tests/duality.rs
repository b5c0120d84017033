use ising_forge::duality::{derive_lattice_duality, derive_square_duality, fit_decimation, fit_star, star_table};
use ising_forge::dsl::LatticeKind;
use ising_forge::field::ComplexField;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_4;

fn black(j: Complex64) -> Complex64 {
    j - Complex64::new(0.0, 2.0 * FRAC_PI_4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn degree_two_fit_reproduces_star(re in -2.0f64..2.0, im in -1.5f64..1.5) {
        let j = Complex64::new(re, im);
        prop_assume!((2.0 * j).sinh().norm() > 1e-6);
        let w = star_table(black(j), &[Complex64::new(0.0, FRAC_PI_4); 2]);
        let f = fit_star(black(j), &[Complex64::new(0.0, FRAC_PI_4); 2]).unwrap();
        for (x, z) in w.iter().enumerate() {
            prop_assert!((f.eval(x) - z).norm() <= 1e-10 * z.norm());
        }
        prop_assert_eq!(f.coeffs[1], f.coeffs[2]);
    }

    #[test]
    fn bulk_relations(re in 0.05f64..2.0, im in -0.7f64..0.7) {
        let j = Complex64::new(re, im);
        let f = fit_decimation(black(j)).unwrap();
        prop_assert_eq!(f.h1, f.h2);
        prop_assert!((f.h1 - Complex64::new(0.0, FRAC_PI_4)).norm() < 1e-10, "h {:?}", f.h1);
        prop_assert!((f.a * f.a + 0.5 * (2.0 * j).sinh()).norm() < 1e-10, "A² {:?}", f.a * f.a);
        prop_assert!(((-2.0 * f.k).exp() - j.tanh()).norm() < 1e-10);
    }

    #[test]
    fn star_triangle_reproduces_table(hr in -1.0f64..1.0, hi in -3.0f64..3.0) {
        let g = Complex64::new(0.0, FRAC_PI_4);
        let h = Complex64::new(hr, hi);
        let w = star_table(h, &[g; 3]);
        prop_assume!(w.iter().all(|z| z.norm() > 1e-6));
        let f = fit_star(h, &[g; 3]).unwrap();
        for (x, z) in w.iter().enumerate() {
            prop_assert!((f.eval(x) - z).norm() <= 1e-10 * z.norm());
        }
    }
}

#[test]
fn face_lattices_decimate_exactly() {
    for (kind, r, c) in [(LatticeKind::Square, 2, 2), (LatticeKind::Square, 2, 3), (LatticeKind::Square, 3, 3), (LatticeKind::Triangular, 1, 2), (LatticeKind::Hexagonal, 1, 1)] {
        let d = derive_lattice_duality(kind, r, c, ComplexField::new(0.35, 0, 0.2), 1e-10).unwrap();
        println!("{}", d.render());
        assert!(d.exact.pass, "{kind:?} {r}x{c}: {}", d.exact.rel_error);
    }
}

#[test]
fn square_report_is_reproducible() {
    for (r, c) in [(2, 2), (2, 3)] {
        let a = derive_square_duality(r, c, ComplexField::real(0.5), 1e-10).unwrap();
        let b = derive_square_duality(r, c, ComplexField::real(0.5), 1e-10).unwrap();
        println!("{}", a.render());
        assert!((a.ratio - b.ratio).norm() <= 1e-12 * a.ratio.norm());
        assert!(a.tanh_residual < 1e-10);
    }
}
