//! Complex local fields and the log-form prefactor.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, LN_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A complex field `real + i(quarter_turns·π/4 + residual_imag)`.
///
/// Gadget arithmetic only ever touches `quarter_turns`, so fields built from
/// the iπ/4 calculus stay exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexField {
    pub real_part: f64,
    pub quarter_turns: i64,
    pub residual_imag: f64,
}

impl ComplexField {
    pub const ZERO: ComplexField = ComplexField { real_part: 0.0, quarter_turns: 0, residual_imag: 0.0 };

    pub fn new(real_part: f64, quarter_turns: i64, residual_imag: f64) -> Self {
        ComplexField { real_part, quarter_turns, residual_imag }
    }

    pub fn real(x: f64) -> Self {
        ComplexField::new(x, 0, 0.0)
    }

    pub fn quarter(q: i64) -> Self {
        ComplexField::new(0.0, q, 0.0)
    }

    /// Takes the imaginary part as a floating residual; call
    /// [`canonicalize_field`] to pull out whole quarter turns.
    pub fn from_complex(z: Complex64) -> Self {
        ComplexField::new(z.re, 0, z.im)
    }

    pub fn imag(&self) -> f64 {
        self.quarter_turns as f64 * FRAC_PI_4 + self.residual_imag
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.real_part, self.imag())
    }

    /// True when the value is an exact multiple of iπ/4.
    pub fn is_exact_quarter(&self) -> bool {
        self.real_part == 0.0 && self.residual_imag == 0.0
    }

    pub fn shifted(self, dq: i64) -> Self {
        ComplexField { quarter_turns: self.quarter_turns + dq, ..self }
    }

    pub fn scale(self, k: f64) -> Self {
        ComplexField::new(self.real_part * k, 0, self.imag() * k)
    }

    /// `exp(h·s)` for a spin value `s = ±1`.
    pub fn boltzmann(&self, s: i8) -> Complex64 {
        (self.value() * s as f64).exp()
    }
}

impl Add for ComplexField {
    type Output = ComplexField;
    fn add(self, o: ComplexField) -> ComplexField {
        ComplexField::new(
            self.real_part + o.real_part,
            self.quarter_turns + o.quarter_turns,
            self.residual_imag + o.residual_imag,
        )
    }
}

impl Sub for ComplexField {
    type Output = ComplexField;
    fn sub(self, o: ComplexField) -> ComplexField {
        self + (-o)
    }
}

impl Neg for ComplexField {
    type Output = ComplexField;
    fn neg(self) -> ComplexField {
        ComplexField::new(-self.real_part, -self.quarter_turns, -self.residual_imag)
    }
}

impl Default for ComplexField {
    fn default() -> Self {
        ComplexField::ZERO
    }
}

impl fmt::Display for ComplexField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {} {:?}", self.real_part, self.quarter_turns, self.residual_imag)
    }
}

fn is_canonical(h: &ComplexField) -> bool {
    let r = h.residual_imag;
    if !(-3..=4).contains(&h.quarter_turns) {
        return false;
    }
    if h.quarter_turns == -3 && r <= -FRAC_PI_8 {
        return r > -FRAC_PI_4;
    }
    if h.quarter_turns == 4 && r > 0.0 {
        return false;
    }
    r > -FRAC_PI_8 && r <= FRAC_PI_8
}

/// Brings the imaginary part into (−π, π].
///
/// The residual is reduced into (−π/8, π/8] with whole quarter turns moved
/// into the integer count; the one value past π wraps to −3 turns with a
/// residual in (−π/4, −π/8]. Only multiples of 2πi are removed, so the
/// returned factor is always one.
pub fn canonicalize_field(h: ComplexField) -> (ComplexField, Prefactor) {
    if is_canonical(&h) {
        return (h, Prefactor::ONE);
    }
    let mut q = h.quarter_turns;
    let mut r = h.residual_imag;
    if !(r > -FRAC_PI_8 && r <= FRAC_PI_8) {
        let k = (r / FRAC_PI_4).round() as i64;
        r -= k as f64 * FRAC_PI_4;
        q += k;
        if r <= -FRAC_PI_8 {
            r += FRAC_PI_4;
            q -= 1;
        } else if r > FRAC_PI_8 {
            r -= FRAC_PI_4;
            q += 1;
        }
    }
    q = canonical_quarter(q);
    if q == 4 && r > 0.0 {
        q = -3;
        r -= FRAC_PI_4;
    }
    (ComplexField::new(h.real_part, q, r), Prefactor::ONE)
}

/// Quarter-turn count reduced into −3..=4.
pub fn canonical_quarter(q: i64) -> i64 {
    (q + 3).rem_euclid(8) - 3
}

/// Canonical angle in (−π, π].
pub fn wrap_phase(mut p: f64) -> f64 {
    if p > -PI && p <= PI {
        return p;
    }
    p = p.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// Exact multiplicative constant kept as `exp(log_magnitude + i·phase)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prefactor {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl Prefactor {
    pub const ONE: Prefactor = Prefactor { log_magnitude: 0.0, phase: 0.0 };
    pub const ZERO: Prefactor = Prefactor { log_magnitude: f64::NEG_INFINITY, phase: 0.0 };

    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        Prefactor { log_magnitude, phase: wrap_phase(phase) }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Prefactor::ZERO;
        }
        Prefactor::new(z.norm().ln(), z.arg())
    }

    /// `2^(k/2)`.
    pub fn sqrt2_pow(k: i64) -> Self {
        Prefactor::new(k as f64 * LN_2 / 2.0, 0.0)
    }

    /// `e^{ikπ/4}`.
    pub fn omega_pow(k: i64) -> Self {
        Prefactor::new(0.0, k.rem_euclid(8) as f64 * FRAC_PI_4)
    }

    pub fn exp(z: Complex64) -> Self {
        Prefactor::new(z.re, z.im)
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn as_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }

    pub fn inv(&self) -> Self {
        Prefactor::new(-self.log_magnitude, -self.phase)
    }

    pub fn pow(&self, n: i64) -> Self {
        Prefactor::new(self.log_magnitude * n as f64, self.phase * n as f64)
    }

    /// Complex logarithm on the principal branch.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.log_magnitude, self.phase)
    }
}

pub fn prefactor_mul(a: Prefactor, b: Prefactor) -> Prefactor {
    if a.is_zero() || b.is_zero() {
        return Prefactor::ZERO;
    }
    Prefactor::new(a.log_magnitude + b.log_magnitude, a.phase + b.phase)
}

impl Mul for Prefactor {
    type Output = Prefactor;
    fn mul(self, o: Prefactor) -> Prefactor {
        prefactor_mul(self, o)
    }
}

impl std::ops::MulAssign for Prefactor {
    fn mul_assign(&mut self, o: Prefactor) {
        *self = prefactor_mul(*self, o);
    }
}

impl Default for Prefactor {
    fn default() -> Self {
        Prefactor::ONE
    }
}

impl fmt::Display for Prefactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.log_magnitude, self.phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn minus_i_pi_goes_to_plus_i_pi() {
        let (h, f) = canonicalize_field(ComplexField::quarter(-4));
        assert_eq!(h.quarter_turns, 4);
        assert_eq!(f, Prefactor::ONE);
        let (h, _) = canonicalize_field(ComplexField::new(0.0, 0, -PI));
        assert_eq!(h.quarter_turns, 4);
        assert!(h.residual_imag.abs() < 1e-15);
    }

    #[test]
    fn nine_quarters_wrap() {
        let (h, f) = canonicalize_field(ComplexField::new(0.0, 0, 9.0 * PI / 4.0));
        assert_eq!(h.quarter_turns, 1);
        assert!(h.residual_imag.abs() < 1e-15);
        assert_eq!(f, Prefactor::ONE);
        assert_eq!(canonicalize_field(ComplexField::quarter(9)).0, ComplexField::quarter(1));
    }

    #[test]
    fn zero_is_fixed() {
        assert_eq!(canonicalize_field(ComplexField::ZERO).0, ComplexField::ZERO);
    }

    #[test]
    fn just_past_pi_wraps_negative() {
        let (h, _) = canonicalize_field(ComplexField::new(0.3, 4, 0.1));
        assert_eq!(h.quarter_turns, -3);
        assert!((h.imag() - (PI + 0.1 - 2.0 * PI)).abs() < 1e-14);
        assert!(h.residual_imag.abs() < FRAC_PI_4);
    }

    #[test]
    fn prefactor_examples() {
        let half = Complex64::from_polar(0.5, 3.0 * FRAC_PI_4);
        let a = Prefactor::from_complex(half);
        let p = a * a;
        assert!((p.log_magnitude - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!((p.phase + PI / 2.0).abs() < 1e-15);
        let q = Prefactor::from_complex(Complex64::new(1.0, 1.0)) * Prefactor::from_complex(Complex64::new(1.0, -1.0));
        assert!((q.log_magnitude - LN_2).abs() < 1e-15);
        assert!(q.phase.abs() < 1e-15);
        assert_eq!(Prefactor::ONE * a, a);
    }

    #[test]
    fn long_chain_does_not_overflow() {
        let half = Prefactor::from_complex(Complex64::new(0.5, 0.0));
        let mut p = Prefactor::ONE;
        for _ in 0..100_000 {
            p *= half;
        }
        assert!((p.log_magnitude - 100_000.0 * 0.5f64.ln()).abs() < 1e-6);
        assert!(p.log_magnitude.is_finite());
    }

    #[test]
    fn zero_prefactor_absorbs() {
        let z = Prefactor::from_complex(Complex64::new(0.0, 0.0));
        assert!(z.is_zero());
        assert!((z * Prefactor::sqrt2_pow(3)).is_zero());
        assert!(close(Prefactor::sqrt2_pow(2).as_complex(), Complex64::new(2.0, 0.0), 1e-15));
    }
}
