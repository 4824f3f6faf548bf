//! Singular parts of Clark measures for maps with finitely many contact
//! points, and the essential-norm quantities built from them.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::boundary::{find_contact_points, numbers_equal, ContactPoint, ContactSet};
use crate::error::{Error, Result};
use crate::number::{Mode, Number};
use crate::poly::{horner, Poly};
use crate::selfmap::{FastMap, Lft, SelfMap, SpaceSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub zeta: Number,
    pub mass: Number,
}

/// Point masses `1/|φ'(ζ)|` at the contact points with `φ(ζ) = α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularClarkMeasure {
    pub alpha: Number,
    pub atoms: Vec<Atom>,
}

impl SingularClarkMeasure {
    pub fn total_mass(&self) -> Number {
        self.atoms.iter().map(|a| a.mass.clone()).sum()
    }
}

/// Contact set of a map in class 𝒮, with extraction failures reported as
/// membership failures.
pub fn contacts_in_s(map: &SelfMap) -> Result<ContactSet> {
    match find_contact_points(map) {
        Ok(cs) => Ok(cs),
        Err(e @ (Error::DataExtractionFailed { .. } | Error::OrderNotDetected { .. } | Error::ContactArcDetected)) => {
            Err(Error::MapNotInS(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

fn mass(p: &ContactPoint) -> Number {
    p.derivative_modulus().checked_inv().expect("angular derivative is positive")
}

/// Contact points grouped by boundary value, in order of first appearance.
pub fn fibers(cs: &ContactSet) -> Result<Vec<(Number, Vec<&ContactPoint>)>> {
    let mut out: Vec<(Number, Vec<&ContactPoint>)> = Vec::new();
    'points: for p in &cs.points {
        for (alpha, members) in out.iter_mut() {
            if numbers_equal(std::slice::from_ref(alpha), std::slice::from_ref(p.boundary_value()))? {
                members.push(p);
                continue 'points;
            }
        }
        out.push((p.boundary_value().clone(), vec![p]));
    }
    Ok(out)
}

pub fn singular_clark(map: &SelfMap, alpha: &Number) -> Result<SingularClarkMeasure> {
    if (alpha.abs_f64() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} is not unimodular")));
    }
    let cs = contacts_in_s(map)?;
    let mut atoms = Vec::new();
    for p in &cs.points {
        if numbers_equal(std::slice::from_ref(p.boundary_value()), std::slice::from_ref(alpha))? {
            atoms.push(Atom { zeta: p.zeta.clone(), mass: mass(p) });
        }
    }
    Ok(SingularClarkMeasure { alpha: alpha.clone(), atoms })
}

fn max_number(xs: impl IntoIterator<Item = Number>) -> Number {
    xs.into_iter()
        .fold(None::<Number>, |acc, x| match acc {
            Some(a) if a.cmp_real(&x) != Ordering::Less => Some(a),
            _ => Some(x),
        })
        .unwrap_or_else(Number::zero)
}

/// Squared essential norm of `C_φ`: exact on the Hardy space, a lower bound
/// on weighted Bergman spaces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssentialNorm {
    pub beta: f64,
    pub squared_exact: Option<Number>,
    pub squared_lower_bound: Number,
    pub mode: Mode,
}

pub fn essential_norm_composition(map: &SelfMap, space: SpaceSpec) -> Result<EssentialNorm> {
    let cs = contacts_in_s(map)?;
    let lower = max_number(cs.points.iter().map(|p| mass(p).real_pow(space.beta)));
    let exact = if space.beta == 1.0 {
        let fib = fibers(&cs)?;
        Some(max_number(fib.iter().map(|(_, ps)| ps.iter().map(|p| mass(p)).sum::<Number>())))
    } else {
        None
    };
    let mode = exact.as_ref().map_or(lower.mode(), |e| e.mode().join(lower.mode()));
    Ok(EssentialNorm { beta: space.beta, squared_exact: exact, squared_lower_bound: lower, mode })
}

fn weight_at<'a>(weights: &'a [(Number, Number)], zeta: &Number) -> Result<&'a Number> {
    for (z, w) in weights {
        if numbers_equal(std::slice::from_ref(z), std::slice::from_ref(zeta))? {
            return Ok(w);
        }
    }
    Err(Error::WeightMissing(zeta.to_string()))
}

/// Bounds for the squared essential norm of the weighted operator
/// `f ↦ w·(f∘φ)` on the Hardy space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedBounds {
    pub lower: Number,
    pub upper: Number,
    pub compact: bool,
}

/// `lower = max_α Σ_{φ(ζ)=α} |w(ζ)|^2/|φ'(ζ)|` and `upper = 4·lower`.
/// `weights` lists `(ζ, w(ζ))` for every contact point.
pub fn weighted_essential_bounds(map: &SelfMap, weights: &[(Number, Number)]) -> Result<WeightedBounds> {
    let cs = contacts_in_s(map)?;
    let mut sums = Vec::new();
    for (_, ps) in fibers(&cs)? {
        let mut s = Number::zero();
        for p in ps {
            s = &s + &(&weight_at(weights, &p.zeta)?.norm_sqr() * &mass(p));
        }
        sums.push(s);
    }
    let lower = max_number(sums);
    let compact = match &lower {
        Number::Exact(q) => q.is_zero(),
        Number::Float(z) => z.re == 0.0,
    };
    Ok(WeightedBounds { upper: lower.scale_int(4), lower, compact })
}

/// Coefficient/linear-fractional pairs `(w(ζ_i), φ_i)` with `φ_i` the
/// osculating map at `ζ_i`; zero coefficients are dropped.
pub fn weighted_decomposition(map: &SelfMap, weights: &[(Number, Number)]) -> Result<Vec<(Number, Lft)>> {
    let parts = crate::calkin::osculating_decomposition(map)?;
    let mut out = Vec::new();
    for part in parts {
        let w = weight_at(weights, &part.zeta)?;
        if !w.is_zero() {
            out.push((w.clone(), part.lft));
        }
    }
    Ok(out)
}

/// Poisson kernel `P_z(e^{it}) = (1 - |z|^2)/|e^{it} - z|^2`.
#[derive(Clone, Copy, Debug)]
pub struct HarmonicProbe {
    pub z: Complex64,
}

impl HarmonicProbe {
    pub fn poisson(&self, t: f64) -> f64 {
        (1.0 - self.z.norm_sqr()) / (Complex64::from_polar(1.0, t) - self.z).norm_sqr()
    }

    pub fn at(&self, zeta: Complex64) -> f64 {
        (1.0 - self.z.norm_sqr()) / (zeta - self.z).norm_sqr()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClarkProbe {
    pub z: [f64; 2],
    pub alpha: [f64; 2],
    pub lhs: f64,
    pub atomic: f64,
    pub absolutely_continuous: f64,
    pub residual: f64,
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize, failures: &mut usize) -> f64 {
    let (k, err) = gk15(f, a, b);
    // stop once the estimate is at the rounding level of the panel value
    if err <= tol || err <= 1e-14 * k.abs() || b - a < 1e-14 {
        return k;
    }
    if depth == 0 {
        if err > 1e-9 {
            *failures += 1;
        }
        return k;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol * 0.5, depth - 1, failures) + adaptive(f, m, b, tol * 0.5, depth - 1, failures)
}

/// Integral of a periodic function over one period.
///
/// The circle is split into 1024 panels, panels whose midpoint value
/// exceeds ten times the median get a tighter tolerance, and every panel is
/// refined adaptively. The period starts at `start` so that a known
/// singular point sits on a panel boundary.
pub fn periodic_integral(f: &dyn Fn(f64) -> f64, start: f64, tol: f64) -> Result<f64> {
    const PANELS: usize = 1024;
    let h = TAU / PANELS as f64;
    let mids: Vec<f64> = (0..PANELS).map(|i| f(start + (i as f64 + 0.5) * h).abs()).collect();
    let mut sorted = mids.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[PANELS / 2];
    let mut failures = 0;
    let mut total = 0.0;
    for i in 0..PANELS {
        let panel_tol = if mids[i] > 10.0 * median { tol / PANELS as f64 * 1e-2 } else { tol / PANELS as f64 };
        total += adaptive(f, start + i as f64 * h, start + (i + 1) as f64 * h, panel_tol, 40, &mut failures);
    }
    if failures > 0 {
        return Err(Error::QuadratureFailure(format!("{failures} panels did not converge")));
    }
    Ok(total)
}

/// Density `(1 - |φ|^2)/|α - φ|^2` on the circle as a ratio of
/// polynomials with the double zeros at the atoms divided out, so that it
/// stays accurate right next to them.
struct ClarkDensity {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

impl ClarkDensity {
    fn new(map: &SelfMap, alpha: &Number, measure: &SingularClarkMeasure) -> Result<ClarkDensity> {
        let r = map.flatten()?.to_rational();
        let n = r.num.degree().max(r.den.degree());
        let hermitian = |p: &Poly| p.mul(&p.conj_reversed(n));
        // on the circle these are z^n (|Q|^2 - |P|^2) and z^n |αQ - P|^2
        let mut num = hermitian(&r.den).sub(&hermitian(&r.num));
        let mut den = hermitian(&r.den.scale(alpha).sub(&r.num));
        for at in &measure.atoms {
            let factor = Poly::new(vec![-&at.zeta, Number::one()]);
            let factor = factor.mul(&factor);
            for p in [&mut num, &mut den] {
                let (q, rem) = p.div_rem(&factor).expect("monic divisor");
                let tiny = rem.coeffs().iter().all(|c| c.abs_f64() <= 1e-9 * (1.0 + q.coeffs().iter().map(Number::abs_f64).fold(0.0, f64::max)));
                if rem.mode() == Mode::Exact && !rem.is_zero() || !tiny {
                    return Err(Error::QuadratureFailure(format!("atom {} is not a double zero of the density", at.zeta)));
                }
                *p = q;
            }
        }
        Ok(ClarkDensity { num: num.c64_coeffs(), den: den.c64_coeffs() })
    }

    fn at(&self, t: f64) -> f64 {
        let z = Complex64::from_polar(1.0, t);
        let d = horner(&self.den, z);
        if d.norm() == 0.0 {
            return 0.0;
        }
        (horner(&self.num, z) / d).re.max(0.0)
    }
}

/// Residual of the Herglotz identity
/// `Re((α+φ(z))/(α-φ(z))) = Σ P_z(ζ)·mass + ∫ P_z (1-|φ|^2)/|α-φ|^2 dt/2π`.
pub fn clark_radial_probe(map: &SelfMap, alpha: &Number, z: Complex64) -> Result<ClarkProbe> {
    if z.norm() >= 1.0 {
        return Err(Error::InvalidArgument(format!("probe point {z} must be interior")));
    }
    let measure = singular_clark(map, alpha)?;
    let a = alpha.to_c64();
    let fast: FastMap = map.fast()?;
    let probe = HarmonicProbe { z };
    let w = fast.eval(z);
    let lhs = (1.0 - w.norm_sqr()) / (a - w).norm_sqr();
    let atomic: f64 = measure.atoms.iter().map(|at| probe.at(at.zeta.to_c64()) * at.mass.re_f64()).sum();
    let density = ClarkDensity::new(map, alpha, &measure)?;
    let integrand = |t: f64| probe.poisson(t) * density.at(t);
    let start = measure.atoms.first().map_or(0.0, |at| at.zeta.to_c64().arg());
    let ac = periodic_integral(&integrand, start, 1e-11)? / TAU;
    Ok(ClarkProbe {
        z: [z.re, z.im],
        alpha: [a.re, a.im],
        lhs,
        atomic,
        absolutely_continuous: ac,
        residual: (lhs - atomic - ac).abs(),
    })
}
