//! Analytic self-maps of the unit disk: linear-fractional, rational and
//! composite representations.

mod geometry;
mod json;
pub(crate) mod validate;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::number::{Mode, Number};
use crate::poly::{horner, horner_d, Poly};
use crate::series::Series;

pub use geometry::{
    pseudo_hyperbolic_disk, pseudo_hyperbolic_disk_sq, pseudo_hyperbolic_halfplane,
    pseudo_hyperbolic_halfplane_sq, CayleyMap, SpaceSpec,
};
pub use json::{flat_to_value, map_from_json, map_from_value, map_to_value, number_from_value, number_to_value, parse_json};
pub use validate::{validate_self_map, Certificate, ValidationReport, Verdict};

/// Maximum nesting of composites.
pub const MAX_COMPOSITE_DEPTH: usize = 8;

/// `(az + b)/(cz + d)` with `ad - bc ≠ 0`, stored with `d = 1` when
/// `d ≠ 0` and `c = 1` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Lft {
    pub a: Number,
    pub b: Number,
    pub c: Number,
    pub d: Number,
}

impl Lft {
    pub fn new(a: Number, b: Number, c: Number, d: Number) -> Result<Lft> {
        let det = &(&a * &d) - &(&b * &c);
        if det.is_zero() {
            return Err(Error::MalformedMap("linear-fractional map with ad - bc = 0".into()));
        }
        let s = if !d.is_zero() { d.clone() } else { c.clone() };
        let inv = s.checked_inv().expect("c and d cannot both vanish when ad - bc != 0");
        Ok(Lft { a: &a * &inv, b: &b * &inv, c: &c * &inv, d: &d * &inv })
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Lft {
        Lft::new(Number::int(a), Number::int(b), Number::int(c), Number::int(d)).expect("nondegenerate")
    }

    pub fn identity() -> Lft {
        Lft::from_ints(1, 0, 0, 1)
    }

    /// `z ↦ λz`.
    pub fn rotation(lambda: Number) -> Result<Lft> {
        Lft::new(lambda, Number::zero(), Number::zero(), Number::one())
    }

    pub fn mode(&self) -> Mode {
        crate::number::joint_mode([&self.a, &self.b, &self.c, &self.d])
    }

    pub fn to_float(&self) -> Lft {
        Lft { a: self.a.to_float(), b: self.b.to_float(), c: self.c.to_float(), d: self.d.to_float() }
    }

    pub fn det(&self) -> Number {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn eval(&self, z: &Number) -> Result<Number> {
        let den = &(&self.c * z) + &self.d;
        let num = &(&self.a * z) + &self.b;
        num.checked_div(&den).ok_or_else(|| Error::PoleAt(z.to_string()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Lft) -> Lft {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (e, f, g, h) = (&inner.a, &inner.b, &inner.c, &inner.d);
        Lft::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
            .expect("composition of invertible maps is invertible")
    }

    pub fn inverse(&self) -> Lft {
        Lft::new(self.d.clone(), -&self.b, -&self.c, self.a.clone()).expect("invertible")
    }

    pub fn jet_at(&self, z0: &Number, depth: usize) -> Result<Series> {
        let mut num = vec![Number::zero(); depth + 1];
        let mut den = vec![Number::zero(); depth + 1];
        num[0] = &(&self.a * z0) + &self.b;
        den[0] = &(&self.c * z0) + &self.d;
        if depth >= 1 {
            num[1] = self.a.clone();
            den[1] = self.c.clone();
        }
        Series::new(num)
            .div(&Series::new(den))
            .ok_or_else(|| Error::PoleAt(z0.to_string()))
    }

    pub fn to_rational(&self) -> RationalMap {
        RationalMap {
            num: Poly::new(vec![self.b.clone(), self.a.clone()]),
            den: Poly::new(vec![self.d.clone(), self.c.clone()]),
        }
    }
}

impl fmt::Display for Lft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({})z + ({}))/(({})z + ({}))", self.a, self.b, self.c, self.d)
    }
}

/// `P(z)/Q(z)`; exact inputs are reduced to lowest terms.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    pub num: Poly,
    pub den: Poly,
}

impl RationalMap {
    pub fn new(num: Poly, den: Poly) -> Result<RationalMap> {
        if den.is_zero() {
            return Err(Error::MalformedMap("denominator is identically zero".into()));
        }
        let (num, den) = if num.mode() == Mode::Exact && den.mode() == Mode::Exact && den.degree() > 0 && !num.is_zero() {
            let g = num.gcd(&den);
            if g.degree() > 0 {
                (num.div_rem(&g).expect("gcd nonzero").0, den.div_rem(&g).expect("gcd nonzero").0)
            } else {
                (num, den)
            }
        } else {
            (num, den)
        };
        // normalize so that the constant term of the denominator is one when possible
        let s = den.coeffs().iter().find(|c| !c.is_zero()).cloned().unwrap_or_else(Number::one);
        let inv = s.checked_inv().expect("nonzero");
        Ok(RationalMap { num: num.scale(&inv), den: den.scale(&inv) })
    }

    pub fn mode(&self) -> Mode {
        self.num.mode().join(self.den.mode())
    }

    pub fn eval(&self, z: &Number) -> Result<Number> {
        let q = self.den.eval(z);
        self.num.eval(z).checked_div(&q).ok_or_else(|| Error::PoleAt(z.to_string()))
    }

    pub fn jet_at(&self, z0: &Number, depth: usize) -> Result<Series> {
        self.num
            .jet_at(z0, depth)
            .div(&self.den.jet_at(z0, depth))
            .ok_or_else(|| Error::PoleAt(z0.to_string()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap> {
        let n = self.num.degree().max(self.den.degree());
        let a_pows: Vec<Poly> = std::iter::successors(Some(Poly::one()), |p| Some(p.mul(&inner.num))).take(n + 1).collect();
        let b_pows: Vec<Poly> = std::iter::successors(Some(Poly::one()), |p| Some(p.mul(&inner.den))).take(n + 1).collect();
        let homog = |p: &Poly| {
            let mut acc = Poly::zero();
            for (k, c) in p.coeffs().iter().enumerate() {
                acc = acc.add(&a_pows[k].mul(&b_pows[n - k]).scale(c));
            }
            acc
        };
        RationalMap::new(homog(&self.num), homog(&self.den))
    }

    /// Returns the linear-fractional form when both degrees are at most one
    /// and the map is not constant.
    pub fn as_lft(&self) -> Option<Lft> {
        if self.num.degree() > 1 || self.den.degree() > 1 {
            return None;
        }
        Lft::new(self.num.coeff(1), self.num.coeff(0), self.den.coeff(1), self.den.coeff(0)).ok()
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &Poly| p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
        write!(f, "[{}] / [{}]", show(&self.num), show(&self.den))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelfMap {
    Lft(Lft),
    Rational(RationalMap),
    Composite { outer: Box<SelfMap>, inner: Box<SelfMap> },
}

/// A composite-free representation.
#[derive(Clone, Debug, PartialEq)]
pub enum FlatMap {
    Lft(Lft),
    Rational(RationalMap),
}

impl FlatMap {
    pub fn to_rational(&self) -> RationalMap {
        match self {
            FlatMap::Lft(l) => l.to_rational(),
            FlatMap::Rational(r) => r.clone(),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            FlatMap::Lft(l) => l.mode(),
            FlatMap::Rational(r) => r.mode(),
        }
    }
}

impl SelfMap {
    pub fn lft(a: Number, b: Number, c: Number, d: Number) -> Result<SelfMap> {
        Ok(SelfMap::Lft(Lft::new(a, b, c, d)?))
    }

    /// Integer-coefficient linear-fractional map, for tests and examples.
    pub fn lft_ints(a: i64, b: i64, c: i64, d: i64) -> SelfMap {
        SelfMap::Lft(Lft::from_ints(a, b, c, d))
    }

    /// Rational map from ascending coefficient lists; degree-one quotients
    /// are stored as linear-fractional maps.
    pub fn rational(num: Vec<Number>, den: Vec<Number>) -> Result<SelfMap> {
        let r = RationalMap::new(Poly::new(num), Poly::new(den))?;
        Ok(match r.as_lft() {
            Some(l) => SelfMap::Lft(l),
            None => SelfMap::Rational(r),
        })
    }

    pub fn rational_ints(num: &[i64], den: &[i64]) -> SelfMap {
        SelfMap::rational(num.iter().map(|&c| Number::int(c)).collect(), den.iter().map(|&c| Number::int(c)).collect())
            .expect("well-formed")
    }

    pub fn compose(outer: SelfMap, inner: SelfMap) -> Result<SelfMap> {
        let m = SelfMap::Composite { outer: Box::new(outer), inner: Box::new(inner) };
        if m.depth() > MAX_COMPOSITE_DEPTH {
            return Err(Error::CompositeTooDeep(MAX_COMPOSITE_DEPTH));
        }
        Ok(m)
    }

    /// `z ↦ φ(λz)`.
    pub fn precompose_rotation(&self, lambda: Number) -> Result<SelfMap> {
        let rot = RationalMap::new(Poly::new(vec![Number::zero(), lambda]), Poly::one())?;
        let flat = self.flatten()?.to_rational().compose(&rot)?;
        Ok(match flat.as_lft() {
            Some(l) => SelfMap::Lft(l),
            None => SelfMap::Rational(flat),
        })
    }

    /// `tφ + (1 - t)ψ`.
    pub fn convex_combination(t: &Number, phi: &SelfMap, psi: &SelfMap) -> Result<SelfMap> {
        let p = phi.flatten()?.to_rational();
        let q = psi.flatten()?.to_rational();
        let s = &Number::one() - t;
        let num = p.num.mul(&q.den).scale(t).add(&q.num.mul(&p.den).scale(&s));
        let den = p.den.mul(&q.den);
        let r = RationalMap::new(num, den)?;
        Ok(match r.as_lft() {
            Some(l) => SelfMap::Lft(l),
            None => SelfMap::Rational(r),
        })
    }

    /// Nesting depth; a plain map has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            SelfMap::Composite { outer, inner } => 1 + outer.depth().max(inner.depth()),
            _ => 0,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            SelfMap::Lft(l) => l.mode(),
            SelfMap::Rational(r) => r.mode(),
            SelfMap::Composite { outer, inner } => outer.mode().join(inner.mode()),
        }
    }

    pub fn flatten(&self) -> Result<FlatMap> {
        if self.depth() > MAX_COMPOSITE_DEPTH {
            return Err(Error::CompositeTooDeep(MAX_COMPOSITE_DEPTH));
        }
        Ok(match self {
            SelfMap::Lft(l) => FlatMap::Lft(l.clone()),
            SelfMap::Rational(r) => match r.as_lft() {
                Some(l) => FlatMap::Lft(l),
                None => FlatMap::Rational(r.clone()),
            },
            SelfMap::Composite { outer, inner } => match (outer.flatten()?, inner.flatten()?) {
                (FlatMap::Lft(o), FlatMap::Lft(i)) => FlatMap::Lft(o.compose(&i)),
                (o, i) => {
                    let r = o.to_rational().compose(&i.to_rational())?;
                    match r.as_lft() {
                        Some(l) => FlatMap::Lft(l),
                        None => FlatMap::Rational(r),
                    }
                }
            },
        })
    }

    pub fn eval(&self, z: &Number) -> Result<Number> {
        match self {
            SelfMap::Lft(l) => l.eval(z),
            SelfMap::Rational(r) => r.eval(z),
            SelfMap::Composite { outer, inner } => outer.eval(&inner.eval(z)?),
        }
    }

    /// Taylor jet of `φ(z0 + h)` to order `depth`.
    pub fn jet_at(&self, z0: &Number, depth: usize) -> Result<Series> {
        match self {
            SelfMap::Lft(l) => l.jet_at(z0, depth),
            SelfMap::Rational(r) => r.jet_at(z0, depth),
            SelfMap::Composite { outer, inner } => {
                let ij = inner.jet_at(z0, depth)?;
                let oj = outer.jet_at(ij.coeff(0), depth)?;
                Ok(oj.compose(&ij.centered()))
            }
        }
    }

    /// `φ^(order)(z)`.
    pub fn derivative(&self, z: &Number, order: usize) -> Result<Number> {
        Ok(self.jet_at(z, order)?.derivatives().pop().expect("nonempty"))
    }

    /// Double-precision evaluator.
    pub fn fast(&self) -> Result<FastMap> {
        let r = self.flatten()?.to_rational();
        Ok(FastMap { num: r.num.c64_coeffs(), den: r.den.c64_coeffs() })
    }

    /// Whether the flattened map is a linear-fractional map.
    pub fn as_lft(&self) -> Option<Lft> {
        match self.flatten() {
            Ok(FlatMap::Lft(l)) => Some(l),
            _ => None,
        }
    }

    pub fn to_float(&self) -> SelfMap {
        match self {
            SelfMap::Lft(l) => SelfMap::Lft(l.to_float()),
            SelfMap::Rational(r) => SelfMap::Rational(RationalMap { num: r.num.to_float(), den: r.den.to_float() }),
            SelfMap::Composite { outer, inner } => {
                SelfMap::Composite { outer: Box::new(outer.to_float()), inner: Box::new(inner.to_float()) }
            }
        }
    }
}

impl fmt::Display for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelfMap::Lft(l) => write!(f, "{l}"),
            SelfMap::Rational(r) => write!(f, "{r}"),
            SelfMap::Composite { outer, inner } => write!(f, "({outer}) ∘ ({inner})"),
        }
    }
}

/// Double-precision evaluation of a flattened map.
#[derive(Clone, Debug)]
pub struct FastMap {
    pub num: Vec<Complex64>,
    pub den: Vec<Complex64>,
}

impl FastMap {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.num, z) / horner(&self.den, z)
    }

    /// `(φ(z), φ'(z))`.
    pub fn eval_d(&self, z: Complex64) -> (Complex64, Complex64) {
        let (p, dp) = horner_d(&self.num, z);
        let (q, dq) = horner_d(&self.den, z);
        (p / q, (dp * q - p * dq) / (q * q))
    }

    /// `1 - |φ(e^{iθ})|^2`.
    pub fn defect(&self, theta: f64) -> f64 {
        1.0 - self.eval(Complex64::from_polar(1.0, theta)).norm_sqr()
    }

    /// `d/dθ |φ(e^{iθ})|^2`.
    pub fn defect_slope(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        let (p, dp) = self.eval_d(z);
        2.0 * (p.conj() * dp * Complex64::i() * z).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Number {
        Number::parse(s).unwrap()
    }

    #[test]
    fn canonical_form() {
        let l = Lft::from_ints(1, 0, -1, 2);
        assert_eq!(l, Lft { a: n("1/2"), b: n("0"), c: n("-1/2"), d: n("1") });
        assert_eq!(Lft::from_ints(2, 0, -2, 4), l);
        let c1 = Lft::from_ints(0, 1, 1, 0);
        assert_eq!(c1.c, Number::one());
        assert!(Lft::new(n("1"), n("2"), n("2"), n("4")).is_err());
    }

    #[test]
    fn eval_and_derivatives_exact() {
        let phi = SelfMap::lft_ints(1, 0, -1, 2);
        assert_eq!(phi.eval(&n("1")).unwrap(), n("1"));
        assert_eq!(phi.derivative(&n("1"), 1).unwrap(), n("2"));
        assert_eq!(phi.derivative(&n("1"), 2).unwrap(), n("4"));
        assert!(matches!(phi.eval(&n("2")), Err(Error::PoleAt(_))));
        let psi = SelfMap::lft_ints(1, 0, -2, 3);
        assert_eq!(psi.derivative(&n("1"), 1).unwrap(), n("3"));
        assert_eq!(psi.derivative(&n("1"), 2).unwrap(), n("12"));
    }

    #[test]
    fn rational_reduces_and_detects_lft() {
        // z(1 - z)/((2 - z)(1 - z)) collapses to z/(2 - z)
        let m = SelfMap::rational_ints(&[0, 1, -1], &[2, -3, 1]);
        assert_eq!(m, SelfMap::lft_ints(1, 0, -1, 2));
        let q = SelfMap::rational_ints(&[0, 0, 1], &[2, 0, -1]);
        assert!(matches!(q, SelfMap::Rational(_)));
        assert_eq!(q.derivative(&n("1"), 1).unwrap(), n("4"));
        assert_eq!(q.derivative(&n("-1"), 1).unwrap(), n("-4"));
    }

    #[test]
    fn composite_flattens_and_agrees() {
        let half = SelfMap::lft_ints(1, 0, 0, 2);
        let quarter = SelfMap::compose(half.clone(), half.clone()).unwrap();
        assert_eq!(quarter.flatten().unwrap(), FlatMap::Lft(Lft::from_ints(1, 0, 0, 4)));
        let q = SelfMap::rational_ints(&[0, 0, 1], &[2, 0, -1]);
        let comp = SelfMap::compose(q.clone(), SelfMap::lft_ints(1, 0, -1, 2)).unwrap();
        let z = n("1/3+1/5i");
        let direct = comp.eval(&z).unwrap();
        let flat = match comp.flatten().unwrap() {
            FlatMap::Rational(r) => r.eval(&z).unwrap(),
            FlatMap::Lft(l) => l.eval(&z).unwrap(),
        };
        assert_eq!(direct, flat);
        for k in 1..5 {
            let d1 = comp.derivative(&z, k).unwrap();
            let d2 = SelfMap::Rational(match comp.flatten().unwrap() {
                FlatMap::Rational(r) => r,
                FlatMap::Lft(l) => l.to_rational(),
            })
            .derivative(&z, k)
            .unwrap();
            assert_eq!(d1, d2);
        }
    }

    #[test]
    fn depth_limit() {
        let mut m = SelfMap::lft_ints(1, 0, 0, 2);
        for _ in 0..MAX_COMPOSITE_DEPTH {
            m = SelfMap::compose(m, SelfMap::lft_ints(1, 0, 0, 2)).unwrap();
        }
        assert!(matches!(SelfMap::compose(m, SelfMap::lft_ints(1, 0, 0, 2)), Err(Error::CompositeTooDeep(_))));
    }

    #[test]
    fn rotation_and_convex_combination() {
        let phi = SelfMap::lft_ints(1, 0, -1, 2);
        let lam = n("3/5+4/5i");
        let rot = phi.precompose_rotation(lam.clone()).unwrap();
        assert_eq!(rot.eval(&lam.conj()).unwrap(), n("1"));
        let psi = SelfMap::lft_ints(1, 0, -2, 3);
        let mid = SelfMap::convex_combination(&n("1/2"), &phi, &psi).unwrap();
        let z = n("1/7");
        let want = &(&phi.eval(&z).unwrap() + &psi.eval(&z).unwrap()) * &n("1/2");
        assert_eq!(mid.eval(&z).unwrap(), want);
    }

    #[test]
    fn fast_eval_matches_exact() {
        let q = SelfMap::rational_ints(&[0, 0, 1], &[2, 0, -1]);
        let f = q.fast().unwrap();
        let z = Complex64::new(0.3, -0.4);
        let exact = q.eval(&Number::from(z)).unwrap().to_c64();
        assert!((f.eval(z) - exact).norm() < 1e-15);
        let (_, d) = f.eval_d(Complex64::new(1.0, 0.0));
        assert!((d - Complex64::new(4.0, 0.0)).norm() < 1e-14);
    }
}
