//! Dual numeric tower: exact Gaussian rationals that degrade to `Complex64`
//! as soon as a float enters a computation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::exact::{rat_to_f64, GaussianRational};

/// Which arithmetic produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn join(self, other: Mode) -> Mode {
        if self == Mode::Exact && other == Mode::Exact {
            Mode::Exact
        } else {
            Mode::Float
        }
    }
}

#[derive(Clone, Debug)]
pub enum Number {
    Exact(GaussianRational),
    Float(Complex64),
}

impl Default for Number {
    fn default() -> Self {
        Number::zero()
    }
}

impl Number {
    pub fn zero() -> Self {
        Number::Exact(GaussianRational::zero())
    }

    pub fn one() -> Self {
        Number::Exact(GaussianRational::one())
    }

    pub fn i() -> Self {
        Number::Exact(GaussianRational::i())
    }

    pub fn int(n: i64) -> Self {
        Number::Exact(GaussianRational::from_ints(n, 0))
    }

    pub fn frac(p: i64, q: i64) -> Self {
        Number::Exact(GaussianRational::from_fracs(p, q, 0, 1))
    }

    pub fn gauss(re: i64, im: i64) -> Self {
        Number::Exact(GaussianRational::from_ints(re, im))
    }

    pub fn real(r: BigRational) -> Self {
        Number::Exact(GaussianRational::from_real(r))
    }

    pub fn float(re: f64, im: f64) -> Self {
        Number::Float(Complex64::new(re, im))
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        Ok(Number::Exact(s.parse()?))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Number::Exact(_) => Mode::Exact,
            Number::Float(_) => Mode::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussianRational> {
        match self {
            Number::Exact(q) => Some(q),
            Number::Float(_) => None,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Number::Exact(q) => q.to_c64(),
            Number::Float(z) => *z,
        }
    }

    /// Forces float mode.
    pub fn to_float(&self) -> Number {
        Number::Float(self.to_c64())
    }

    pub fn re(&self) -> Number {
        match self {
            Number::Exact(q) => Number::real(q.re.clone()),
            Number::Float(z) => Number::float(z.re, 0.0),
        }
    }

    pub fn im(&self) -> Number {
        match self {
            Number::Exact(q) => Number::real(q.im.clone()),
            Number::Float(z) => Number::float(z.im, 0.0),
        }
    }

    pub fn re_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => rat_to_f64(&q.re),
            Number::Float(z) => z.re,
        }
    }

    pub fn im_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => rat_to_f64(&q.im),
            Number::Float(z) => z.im,
        }
    }

    pub fn conj(&self) -> Number {
        match self {
            Number::Exact(q) => Number::Exact(q.conj()),
            Number::Float(z) => Number::Float(z.conj()),
        }
    }

    /// `|z|^2` as a real number in the same mode.
    pub fn norm_sqr(&self) -> Number {
        match self {
            Number::Exact(q) => Number::real(q.norm_sqr()),
            Number::Float(z) => Number::float(z.norm_sqr(), 0.0),
        }
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Exact zero test in exact mode, `== 0.0` in float mode.
    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_zero(),
            Number::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_real(),
            Number::Float(z) => z.im == 0.0,
        }
    }

    pub fn checked_inv(&self) -> Option<Number> {
        match self {
            Number::Exact(q) => q.inv().map(Number::Exact),
            Number::Float(z) => {
                if z.norm_sqr() == 0.0 {
                    None
                } else {
                    Some(Number::Float(z.inv()))
                }
            }
        }
    }

    pub fn checked_div(&self, other: &Number) -> Option<Number> {
        Some(self * &other.checked_inv()?)
    }

    pub fn powi(&self, k: u32) -> Number {
        match self {
            Number::Exact(q) => Number::Exact(q.pow(k)),
            Number::Float(z) => Number::Float(z.powu(k)),
        }
    }

    /// `x^beta` for a positive real `x`; exact when `x` is exact and `beta`
    /// is a non-negative integer.
    pub fn real_pow(&self, beta: f64) -> Number {
        if let Number::Exact(q) = self {
            if beta.fract() == 0.0 && beta >= 0.0 && beta <= u32::MAX as f64 {
                return Number::Exact(q.pow(beta as u32));
            }
        }
        Number::float(self.re_f64().powf(beta), 0.0)
    }

    /// Multiplies by an integer, keeping exactness.
    pub fn scale_int(&self, k: i64) -> Number {
        self * &Number::int(k)
    }

    /// `|a - b| / max(|a|, |b|)`, zero when both vanish.
    pub fn relative_gap(&self, other: &Number) -> f64 {
        let a = self.to_c64();
        let b = other.to_c64();
        let scale = a.norm().max(b.norm());
        if scale == 0.0 {
            0.0
        } else {
            (a - b).norm() / scale
        }
    }

    pub fn approx_eq(&self, other: &Number, rel: f64) -> bool {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => a == b,
            _ => self.relative_gap(other) <= rel,
        }
    }

    /// Orders real parts; exact when both sides are exact.
    pub fn cmp_real(&self, other: &Number) -> Ordering {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => a.re.cmp(&b.re),
            _ => self.re_f64().partial_cmp(&other.re_f64()).unwrap_or(Ordering::Equal),
        }
    }

    /// Lexicographic `(re, im)` comparison for deterministic ordering.
    pub fn lex_cmp(&self, other: &Number) -> Ordering {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => a.lex_cmp(b),
            _ => {
                let (a, b) = (self.to_c64(), other.to_c64());
                a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
            }
        }
    }

    /// Argument in `[0, 2π)`.
    pub fn arg_2pi(&self) -> f64 {
        let a = self.to_c64().arg();
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    pub fn is_negative_real(&self) -> bool {
        match self {
            Number::Exact(q) => q.im.is_zero() && q.re < BigRational::zero(),
            Number::Float(z) => z.im == 0.0 && z.re < 0.0,
        }
    }

    pub fn to_f64_real(&self) -> Option<f64> {
        match self {
            Number::Exact(q) if q.im.is_zero() => q.re.to_f64(),
            Number::Float(z) if z.im == 0.0 => Some(z.re),
            _ => None,
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Number) -> bool {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => a == b,
            _ => self.to_c64() == other.to_c64(),
        }
    }
}

impl From<GaussianRational> for Number {
    fn from(q: GaussianRational) -> Self {
        Number::Exact(q)
    }
}

impl From<Complex64> for Number {
    fn from(z: Complex64) -> Self {
        Number::Float(z)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::float(x, 0.0)
    }
}

impl From<i64> for Number {
    fn from(n: i64) -> Self {
        Number::int(n)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(q) => write!(f, "{q}"),
            Number::Float(z) if z.im == 0.0 => write!(f, "{:e}", z.re),
            Number::Float(z) => write!(f, "{:e}{:+e}i", z.re, z.im),
        }
    }
}

/// Exact values serialize as strings, real floats as numbers, complex
/// floats as `[re, im]`.
impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Number::Exact(q) => s.serialize_str(&q.to_string()),
            Number::Float(z) if z.im == 0.0 => s.serialize_f64(z.re),
            Number::Float(z) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(&z.re)?;
                seq.serialize_element(&z.im)?;
                seq.end()
            }
        }
    }
}

impl Neg for &Number {
    type Output = Number;
    fn neg(self) -> Number {
        match self {
            Number::Exact(q) => Number::Exact(-q),
            Number::Float(z) => Number::Float(-z),
        }
    }
}

impl Neg for Number {
    type Output = Number;
    fn neg(self) -> Number {
        -&self
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr for &Number {
            type Output = Number;
            fn $m(self, o: &Number) -> Number {
                match (self, o) {
                    (Number::Exact(a), Number::Exact(b)) => Number::Exact($body(a, b)),
                    _ => Number::Float(self.to_c64().$m(o.to_c64())),
                }
            }
        }
        impl $tr for Number {
            type Output = Number;
            fn $m(self, o: Number) -> Number {
                (&self).$m(&o)
            }
        }
        impl $tr<&Number> for Number {
            type Output = Number;
            fn $m(self, o: &Number) -> Number {
                (&self).$m(o)
            }
        }
        impl $tr<Number> for &Number {
            type Output = Number;
            fn $m(self, o: Number) -> Number {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, |a: &GaussianRational, b: &GaussianRational| a + b);
binop!(Sub, sub, |a: &GaussianRational, b: &GaussianRational| a - b);
binop!(Mul, mul, |a: &GaussianRational, b: &GaussianRational| a * b);
binop!(Div, div, |a: &GaussianRational, b: &GaussianRational| a / b);

impl std::iter::Sum for Number {
    fn sum<I: Iterator<Item = Number>>(iter: I) -> Number {
        iter.fold(Number::zero(), |acc, x| acc + x)
    }
}

/// Joint mode of a list of values.
pub fn joint_mode<'a>(xs: impl IntoIterator<Item = &'a Number>) -> Mode {
    xs.into_iter().fold(Mode::Exact, |m, x| m.join(x.mode()))
}

/// True when the real number is exactly zero or, in float mode, within `tol`.
pub fn real_is_zero(x: &Number, tol: f64) -> bool {
    match x {
        Number::Exact(q) => q.re.is_zero(),
        Number::Float(z) => z.re.abs() <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactness_is_contagious_only_for_floats() {
        let a = Number::frac(1, 3);
        let b = Number::gauss(0, 1);
        assert!((&a * &b).is_exact());
        let c = &a + &Number::from(0.5);
        assert_eq!(c.mode(), Mode::Float);
        assert!((c.re_f64() - (1.0 / 3.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn real_pow_exact_for_integer_beta() {
        let x = Number::frac(2, 3);
        assert_eq!(x.real_pow(2.0), Number::frac(4, 9));
        assert_eq!(x.real_pow(1.5).mode(), Mode::Float);
    }

    #[test]
    fn serialization_forms() {
        let v = vec![Number::frac(-1, 2), Number::from(0.25), Number::float(1.0, -2.0)];
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["-1/2",0.25,[1.0,-2.0]]"#);
    }

    #[test]
    fn comparisons() {
        assert_eq!(Number::frac(1, 3).cmp_real(&Number::frac(1, 2)), Ordering::Less);
        assert!(Number::frac(1, 3).approx_eq(&Number::from(1.0 / 3.0), 1e-15));
        assert!(!Number::frac(1, 3).approx_eq(&Number::frac(1, 3 + 1), 0.5));
    }
}
