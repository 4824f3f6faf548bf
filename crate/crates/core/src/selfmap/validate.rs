//! Gatekeeping: is the map an analytic self-map of the disk with `|φ| < 1`
//! almost everywhere on the circle?

use num_complex::Complex64;
use serde::Serialize;

use super::{FastMap, FlatMap, Lft, RationalMap, SelfMap};
use crate::boundary;
use crate::error::{Error, Result};
use crate::number::{Mode, Number};

const BOUNDARY_SAMPLES: usize = 4096;
const INTERIOR_SAMPLES: usize = 512;
const TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Algebraic image-circle containment for a linear-fractional map.
    ExactLinearFractional,
    /// Constant map.
    Constant,
    /// Boundary sampling plus interior probe, no boundary contact.
    Numeric,
    /// Boundary sampling with every near-contact certified exactly.
    NumericWithExactContacts,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub certificate: Certificate,
    pub is_automorphism: bool,
    pub max_boundary_modulus: f64,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub(crate) fn fmt_point(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Checks that `map` sends the disk into itself.
///
/// Failures are errors carrying a witness; borderline numeric cases come
/// back as [`Verdict::Indeterminate`].
pub fn validate_self_map(map: &SelfMap) -> Result<ValidationReport> {
    match map.flatten()? {
        FlatMap::Lft(l) => validate_lft(&l),
        FlatMap::Rational(r) => validate_rational(map, &r),
    }
}

/// `K = |a|^2 + |b|^2 - |c|^2 - |d|^2` and `w = a conj(b) - c conj(d)`;
/// on the circle `|az+b|^2 - |cz+d|^2 = K + 2 Re(w z)`.
pub(crate) fn lft_circle_data(l: &Lft) -> (Number, Number) {
    let k = &(&l.a.norm_sqr() + &l.b.norm_sqr()) - &(&l.c.norm_sqr() + &l.d.norm_sqr());
    let w = &(&l.a * &l.b.conj()) - &(&l.c * &l.d.conj());
    (k, w)
}

fn ray_witness(f: &FastMap, dir: Complex64) -> (Complex64, f64) {
    let mut radii: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    radii.extend((2..16).map(|k| 1.0 - 10f64.powi(-k)));
    for r in radii {
        let z = dir * r;
        let v = f.eval(z).norm();
        if v > 1.0 {
            return (z, v);
        }
    }
    (dir, f.eval(dir).norm())
}

fn validate_lft(l: &Lft) -> Result<ValidationReport> {
    let mode = l.mode();
    let fast = SelfMap::Lft(l.clone()).fast()?;
    if !l.c.is_zero() {
        let inside = match mode {
            Mode::Exact => l.d.norm_sqr().cmp_real(&l.c.norm_sqr()) != std::cmp::Ordering::Greater,
            Mode::Float => l.d.abs_f64() <= l.c.abs_f64() * (1.0 + 1e-12),
        };
        if inside {
            let pole = (-&l.d).checked_div(&l.c).expect("c nonzero");
            return Err(Error::PoleInClosedDisk(pole.to_string()));
        }
    }
    let (k, w) = lft_circle_data(l);
    let (automorphism, excess) = match mode {
        Mode::Exact => {
            let k2 = k.norm_sqr();
            let w4 = w.norm_sqr().scale_int(4);
            let auto = k.is_zero() && w.is_zero();
            let ok = k.cmp_real(&Number::zero()) != std::cmp::Ordering::Greater
                && w4.cmp_real(&k2) != std::cmp::Ordering::Greater;
            (auto, if ok { None } else { Some(()) })
        }
        Mode::Float => {
            let scale = [&l.a, &l.b, &l.c, &l.d].iter().map(|x| x.norm_sqr().re_f64()).sum::<f64>();
            let s = k.re_f64() + 2.0 * w.abs_f64();
            let auto = k.re_f64().abs() <= 1e-12 * scale && w.abs_f64() <= 1e-12 * scale;
            (auto, if s > TOL * scale { Some(()) } else { None })
        }
    };
    let dir = if w.is_zero() { Complex64::new(1.0, 0.0) } else { w.to_c64().conj() / w.abs_f64() };
    if excess.is_some() {
        let (z, v) = ray_witness(&fast, dir);
        return Err(Error::NotSelfMap { witness: fmt_point(z), modulus: v });
    }
    Ok(ValidationReport {
        verdict: Verdict::Pass,
        certificate: Certificate::ExactLinearFractional,
        is_automorphism: automorphism,
        max_boundary_modulus: if automorphism { 1.0 } else { fast.eval(dir).norm() },
        mode,
        note: automorphism.then(|| "disk automorphism: |phi| = 1 on the whole circle".to_string()),
    })
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Quasi-random points of the open disk (Halton in polar coordinates).
pub(crate) fn interior_points(count: usize) -> Vec<Complex64> {
    (1..=count)
        .map(|i| {
            let r = radical_inverse(i, 2).sqrt() * (1.0 - 1e-9);
            Complex64::from_polar(r, std::f64::consts::TAU * radical_inverse(i, 3))
        })
        .collect()
}

fn validate_rational(map: &SelfMap, r: &RationalMap) -> Result<ValidationReport> {
    let mode = r.mode();
    if r.num.degree() == 0 && r.den.degree() == 0 {
        let v = r.num.coeff(0).checked_div(&r.den.coeff(0)).expect("nonzero denominator");
        let m = v.abs_f64();
        let one = Number::one();
        let cmp = match mode {
            Mode::Exact => v.norm_sqr().cmp_real(&one),
            Mode::Float => m.partial_cmp(&1.0).unwrap_or(std::cmp::Ordering::Greater),
        };
        return match cmp {
            std::cmp::Ordering::Less => Ok(ValidationReport {
                verdict: Verdict::Pass,
                certificate: Certificate::Constant,
                is_automorphism: false,
                max_boundary_modulus: m,
                mode,
                note: None,
            }),
            std::cmp::Ordering::Equal => Err(Error::BoundaryArcContact("constant unimodular map".into())),
            std::cmp::Ordering::Greater => Err(Error::NotSelfMap { witness: "0".into(), modulus: m }),
        };
    }
    for root in r.den.roots() {
        if root.norm() <= 1.0 + 1e-9 {
            return Err(Error::PoleInClosedDisk(fmt_point(root)));
        }
    }
    let fast = map.fast()?;
    if mode == Mode::Exact {
        let n = r.num.degree().max(r.den.degree());
        let defect = r.den.mul(&r.den.conj_reversed(n)).sub(&r.num.mul(&r.num.conj_reversed(n)));
        if defect.is_zero() {
            return Err(Error::BoundaryArcContact("|phi| = 1 on the whole circle".into()));
        }
    }
    let maxima = boundary::boundary_maxima(&fast, BOUNDARY_SAMPLES);
    if mode == Mode::Float {
        let flat = (0..BOUNDARY_SAMPLES)
            .all(|i| fast.defect(std::f64::consts::TAU * i as f64 / BOUNDARY_SAMPLES as f64).abs() < 1e-12);
        if flat {
            return Err(Error::BoundaryArcContact("|phi| = 1 at every boundary sample".into()));
        }
    }
    let (theta_max, g_max) = maxima.iter().cloned().fold((0.0, f64::NEG_INFINITY), |acc, m| if m.1 > acc.1 { m } else { acc });
    let modulus = g_max.sqrt();
    if modulus > 1.0 + TOL {
        let (z, v) = ray_witness(&fast, Complex64::from_polar(1.0, theta_max));
        return Err(Error::NotSelfMap { witness: fmt_point(z), modulus: v });
    }
    for z in interior_points(INTERIOR_SAMPLES) {
        let v = fast.eval(z).norm();
        if v >= 1.0 {
            return Err(Error::NotSelfMap { witness: fmt_point(z), modulus: v });
        }
    }
    if modulus < 1.0 - TOL {
        return Ok(ValidationReport {
            verdict: Verdict::Pass,
            certificate: Certificate::Numeric,
            is_automorphism: false,
            max_boundary_modulus: modulus,
            mode,
            note: None,
        });
    }
    // borderline: every near-unimodular maximum must be an exactly certified contact
    let mut notes = Vec::new();
    let mut certified = mode == Mode::Exact;
    if certified {
        for &(theta, g) in maxima.iter().filter(|m| m.1.sqrt() >= 1.0 - TOL) {
            match boundary::certify_exact_contact(map, r, theta) {
                Some(zeta) => notes.push(format!("certified contact at {zeta}")),
                None => {
                    certified = false;
                    notes.push(format!("uncertified near-contact at angle {theta} (|phi|^2 = {g})"));
                }
            }
        }
    } else {
        notes.push("float-mode rational map touches the circle within tolerance".into());
    }
    Ok(ValidationReport {
        verdict: if certified { Verdict::Pass } else { Verdict::Indeterminate },
        certificate: Certificate::NumericWithExactContacts,
        is_automorphism: false,
        max_boundary_modulus: modulus,
        mode,
        note: Some(notes.join("; ")),
    })
}

/// Validates and converts an indeterminate verdict into an error.
pub(crate) fn ensure_valid(map: &SelfMap) -> Result<ValidationReport> {
    let rep = validate_self_map(map)?;
    if !rep.passed() {
        return Err(Error::Indeterminate(format!(
            "self-map validation inconclusive: {}",
            rep.note.clone().unwrap_or_default()
        )));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lft_examples() {
        let rep = validate_self_map(&SelfMap::lft_ints(1, 0, -1, 2)).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.certificate, Certificate::ExactLinearFractional);
        assert!(!rep.is_automorphism);
        assert!((rep.max_boundary_modulus - 1.0).abs() < 1e-15);

        let id = validate_self_map(&SelfMap::lft_ints(1, 0, 0, 1)).unwrap();
        assert!(id.passed() && id.is_automorphism);

        match validate_self_map(&SelfMap::lft_ints(2, 0, 0, 1)) {
            Err(Error::NotSelfMap { witness, modulus }) => {
                assert_eq!(witness, "0.6");
                assert!((modulus - 1.2).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lft_pole_inside() {
        // 1/(2z - 1) has a pole at 1/2
        assert!(matches!(validate_self_map(&SelfMap::lft_ints(0, 1, 2, -1)), Err(Error::PoleInClosedDisk(_))));
    }

    #[test]
    fn rational_examples() {
        let q = SelfMap::rational_ints(&[0, 0, 1], &[2, 0, -1]);
        let rep = validate_self_map(&q).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.certificate, Certificate::NumericWithExactContacts);

        let inner = SelfMap::rational_ints(&[0, 0, 1], &[3]);
        let rep = validate_self_map(&inner).unwrap();
        assert_eq!(rep.certificate, Certificate::Numeric);

        let blaschke = SelfMap::rational_ints(&[0, 0, 1], &[1]);
        assert!(matches!(validate_self_map(&blaschke), Err(Error::BoundaryArcContact(_))));

        let big = SelfMap::rational_ints(&[0, 0, 2], &[1]);
        assert!(matches!(validate_self_map(&big), Err(Error::NotSelfMap { .. })));

        let pole = SelfMap::rational_ints(&[1, 0, 0], &[1, 0, -4]);
        assert!(matches!(validate_self_map(&pole), Err(Error::PoleInClosedDisk(_))));
    }

    #[test]
    fn near_tangent_is_not_certified() {
        // (z^2 + 1 - 1e-12)/(2 + ...) style borderline: scale z^2/(2 - z^2) by (1 - 2^-40)
        let s = Number::real(num_rational::BigRational::new(((1i64 << 40) - 1).into(), (1i64 << 40).into()));
        let m = SelfMap::rational(vec![Number::zero(), Number::zero(), s], vec![Number::int(2), Number::zero(), Number::int(-1)]).unwrap();
        let rep = validate_self_map(&m).unwrap();
        assert_eq!(rep.verdict, Verdict::Indeterminate);
    }
}
