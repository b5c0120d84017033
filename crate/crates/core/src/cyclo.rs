//! Exact arithmetic in Z[ω], ω = e^{iπ/4}.
//!
//! Every Boltzmann weight built from quarter-turn fields and iπ/4 couplings is
//! a power of ω, so identity checks on the exact path never touch floats.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

/// `c[0] + c[1]ω + c[2]ω² + c[3]ω³` with ω⁴ = −1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Cyclo8(pub [i64; 4]);

impl Cyclo8 {
    pub const ZERO: Cyclo8 = Cyclo8([0, 0, 0, 0]);
    pub const ONE: Cyclo8 = Cyclo8([1, 0, 0, 0]);

    pub fn int(n: i64) -> Self {
        Cyclo8([n, 0, 0, 0])
    }

    /// ω^k for any integer k.
    pub fn omega(k: i64) -> Self {
        let k = k.rem_euclid(8);
        let mut c = [0; 4];
        if k < 4 {
            c[k as usize] = 1;
        } else {
            c[(k - 4) as usize] = -1;
        }
        Cyclo8(c)
    }

    pub fn sqrt2() -> Self {
        Cyclo8([0, 1, 0, -1])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn to_complex(&self) -> Complex64 {
        let w = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(1.0, 0.0);
        for &c in &self.0 {
            acc += p * c as f64;
            p *= w;
        }
        acc
    }

    pub fn scale(&self, k: i64) -> Self {
        Cyclo8(self.0.map(|c| c * k))
    }

    /// Exact division by 2 when every coefficient is even.
    pub fn halve(&self) -> Option<Self> {
        if self.0.iter().all(|c| c % 2 == 0) {
            Some(Cyclo8(self.0.map(|c| c / 2)))
        } else {
            None
        }
    }
}

impl Add for Cyclo8 {
    type Output = Cyclo8;
    fn add(self, o: Cyclo8) -> Cyclo8 {
        let mut c = self.0;
        for i in 0..4 {
            c[i] += o.0[i];
        }
        Cyclo8(c)
    }
}

impl Sub for Cyclo8 {
    type Output = Cyclo8;
    fn sub(self, o: Cyclo8) -> Cyclo8 {
        self + (-o)
    }
}

impl Neg for Cyclo8 {
    type Output = Cyclo8;
    fn neg(self) -> Cyclo8 {
        Cyclo8(self.0.map(|c| -c))
    }
}

impl Mul for Cyclo8 {
    type Output = Cyclo8;
    fn mul(self, o: Cyclo8) -> Cyclo8 {
        let mut c = [0i64; 4];
        for i in 0..4 {
            for j in 0..4 {
                let p = self.0[i] * o.0[j];
                let k = i + j;
                if k < 4 {
                    c[k] += p;
                } else {
                    c[k - 4] -= p;
                }
            }
        }
        Cyclo8(c)
    }
}

impl std::iter::Sum for Cyclo8 {
    fn sum<I: Iterator<Item = Cyclo8>>(iter: I) -> Cyclo8 {
        iter.fold(Cyclo8::ZERO, |a, b| a + b)
    }
}

/// Cross-multiplication test: `a/b == c/d` without dividing.
pub fn same_ratio(a: Cyclo8, b: Cyclo8, c: Cyclo8, d: Cyclo8) -> bool {
    a * d == c * b
}
