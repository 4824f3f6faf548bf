//! Boundary data of self-maps: contact points, angular derivatives, orders
//! of contact, boundary jets and their half-plane form.

use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::number::{Mode, Number};
use crate::selfmap::validate::{ensure_valid, lft_circle_data};
use crate::selfmap::{pseudo_hyperbolic_disk_sq, pseudo_hyperbolic_halfplane_sq, CayleyMap, FastMap, FlatMap, RationalMap, SelfMap};
use crate::series::Series;

/// Samples used when scanning the circle for contact points.
pub const CONTACT_SCAN_SAMPLES: usize = 1 << 14;
/// Deepest jet extracted while looking for the order of contact.
pub const MAX_EXTRACTION_DEPTH: usize = 16;
/// Relative gap below which float data are considered equal.
pub const DATA_EQUAL_TOL: f64 = 1e-9;
/// Relative gap above which float data are considered distinct.
pub const DATA_DISTINCT_TOL: f64 = 1e-6;

/// Boundary jet `(φ(ζ), φ'(ζ), …, φ^(k)(ζ))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DataVector {
    pub entries: Vec<Number>,
}

impl DataVector {
    pub fn k(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn truncate(&self, k: usize) -> DataVector {
        DataVector { entries: self.entries[..=k].to_vec() }
    }

    pub fn mode(&self) -> Mode {
        crate::number::joint_mode(&self.entries)
    }

    pub fn lex_cmp(&self, other: &DataVector) -> std::cmp::Ordering {
        for (a, b) in self.entries.iter().zip(&other.entries) {
            let c = a.lex_cmp(b);
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        self.entries.len().cmp(&other.entries.len())
    }
}

/// Decides equality of two lists of numbers: exactly when both are exact,
/// otherwise by componentwise relative gap with an indeterminate band.
pub fn numbers_equal(a: &[Number], b: &[Number]) -> Result<bool> {
    if a.len() != b.len() {
        return Ok(false);
    }
    let exact = a.iter().chain(b).all(Number::is_exact);
    if exact {
        return Ok(a == b);
    }
    let gap = a.iter().zip(b).map(|(x, y)| x.relative_gap(y)).fold(0.0, f64::max);
    if gap <= DATA_EQUAL_TOL {
        Ok(true)
    } else if gap >= DATA_DISTINCT_TOL {
        Ok(false)
    } else {
        Err(Error::IndeterminateDataMatch { gap })
    }
}

pub fn data_equal(a: &DataVector, b: &DataVector) -> Result<bool> {
    numbers_equal(&a.entries, &b.entries)
}

/// Derivatives `u'(0), …, u^(depth)(0)` of `u = τ_{φ(ζ)} ∘ φ ∘ τ_ζ^{-1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfPlaneData {
    pub u_derivs: Vec<Number>,
}

impl HalfPlaneData {
    /// `u^(j)(0)` for `j ≥ 1`.
    pub fn derivative(&self, j: usize) -> &Number {
        &self.u_derivs[j - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContactPoint {
    pub zeta: Number,
    pub order: usize,
    pub data: DataVector,
    pub halfplane: HalfPlaneData,
}

impl ContactPoint {
    pub fn boundary_value(&self) -> &Number {
        &self.data.entries[0]
    }

    /// `|φ'(ζ)| = u'(0)`, a positive real in the mode of the data.
    pub fn derivative_modulus(&self) -> &Number {
        &self.halfplane.u_derivs[0]
    }

    pub fn mode(&self) -> Mode {
        self.data.mode().join(self.zeta.mode())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassFlags {
    pub in_s: bool,
    pub in_s0: bool,
    pub in_s2: bool,
    pub in_l: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContactSet {
    pub points: Vec<ContactPoint>,
    pub map_class: ClassFlags,
}

impl ContactSet {
    pub fn find(&self, zeta: &Number) -> Result<Option<&ContactPoint>> {
        for p in &self.points {
            if numbers_equal(std::slice::from_ref(&p.zeta), std::slice::from_ref(zeta))? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    pub fn mode(&self) -> Mode {
        self.points.iter().fold(Mode::Exact, |m, p| m.join(p.mode()))
    }
}

fn is_unimodular(x: &Number, tol: f64) -> bool {
    match x {
        Number::Exact(q) => q.norm_sqr() == BigRational::from_integer(1.into()),
        Number::Float(z) => (z.norm() - 1.0).abs() <= tol,
    }
}

fn normalize_unimodular(x: Number) -> Number {
    match x {
        Number::Float(z) => Number::Float(z / z.norm()),
        e => e,
    }
}

/// Jet of `φ` at `ζ` and of its half-plane transfer `u` at `0`.
fn transfer_jets(map: &SelfMap, zeta: &Number, depth: usize) -> Result<(Series, Series)> {
    let zeta = normalize_unimodular(zeta.clone());
    let phi = map.jet_at(&zeta, depth)?;
    let alpha = phi.coeff(0).clone();
    if !is_unimodular(&alpha, 1e-10) {
        return Err(Error::DataExtractionFailed {
            zeta: zeta.to_string(),
            reason: format!("|phi(zeta)| = {} is not 1", alpha.abs_f64()),
        });
    }
    let alpha = normalize_unimodular(alpha);
    let to_disk = CayleyMap::new(zeta.clone())?.inverse_lft().jet_at(&Number::zero(), depth)?;
    let inner = phi.compose(&to_disk.centered());
    let to_half = CayleyMap::new(alpha.clone())?.as_lft().jet_at(&alpha, depth)?;
    let mut u = to_half.compose(&inner.centered());
    // the constant term vanishes identically; pin it against rounding
    let mut c = u.coeffs().to_vec();
    c[0] = Number::zero();
    u = Series::new(c);
    Ok((phi, u))
}

/// `u'(0), …, u^(depth)(0)` at a contact point.
pub fn halfplane_transfer(map: &SelfMap, zeta: &Number, depth: usize) -> Result<HalfPlaneData> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let (_, u) = transfer_jets(map, zeta, depth)?;
    Ok(HalfPlaneData { u_derivs: u.derivatives()[1..].to_vec() })
}

fn is_nonreal(c: &Number, scale: f64) -> bool {
    match c {
        Number::Exact(q) => !q.is_real(),
        Number::Float(z) => z.im.abs() > 1e-9 * scale.max(1.0),
    }
}

/// Index of the first non-real Taylor coefficient of `u`.
fn detect_order(u: &Series) -> Option<usize> {
    let mut scale: f64 = 0.0;
    for j in 1..=u.depth() {
        let c = u.coeff(j);
        scale = scale.max(c.abs_f64());
        if is_nonreal(c, scale) {
            return Some(j);
        }
    }
    None
}

/// Full boundary data at a contact point.
pub fn extract_contact(map: &SelfMap, zeta: &Number) -> Result<ContactPoint> {
    let zeta = normalize_unimodular(zeta.clone());
    let mut found = None;
    for depth in [6, MAX_EXTRACTION_DEPTH] {
        let (phi, u) = transfer_jets(map, &zeta, depth)?;
        if let Some(order) = detect_order(&u) {
            found = Some((phi, u, order));
            break;
        }
    }
    let Some((phi, u, order)) = found else {
        return Err(Error::OrderNotDetected { zeta: zeta.to_string(), depth: MAX_EXTRACTION_DEPTH });
    };
    let fail = |reason: String| Error::DataExtractionFailed { zeta: zeta.to_string(), reason };
    let u1 = u.coeff(1);
    let u1_ok = match u1 {
        Number::Exact(q) => q.is_real() && q.re > BigRational::from_integer(0.into()),
        Number::Float(z) => z.re > 0.0 && z.im.abs() <= 1e-10 * z.re,
    };
    if !u1_ok || order == 1 {
        return Err(fail(format!("u'(0) = {u1} is not a positive real")));
    }
    if order % 2 == 1 {
        return Err(fail(format!("first non-real coefficient has odd index {order}")));
    }
    if u.coeff(order).im_f64() <= 0.0 {
        return Err(fail(format!("top coefficient {} has non-positive imaginary part", u.coeff(order))));
    }
    let data = DataVector { entries: phi.truncate(order).derivatives() };
    let mut u_derivs = u.truncate(order).derivatives();
    u_derivs.remove(0);
    if let Number::Float(z) = &mut u_derivs[0] {
        z.im = 0.0;
    }
    Ok(ContactPoint { zeta, order, data, halfplane: HalfPlaneData { u_derivs } })
}

/// Order `2m` of contact at `ζ`.
pub fn order_of_contact(map: &SelfMap, zeta: &Number) -> Result<usize> {
    Ok(extract_contact(map, zeta)?.order)
}

/// Refined local maxima `(θ, |φ(e^{iθ})|^2)` of the boundary modulus.
pub fn boundary_maxima(f: &FastMap, samples: usize) -> Vec<(f64, f64)> {
    let h = TAU / samples as f64;
    let g: Vec<f64> = (0..samples).map(|i| 1.0 - f.defect(i as f64 * h)).collect();
    let mut out = Vec::new();
    for i in 0..samples {
        let prev = g[(i + samples - 1) % samples];
        let next = g[(i + 1) % samples];
        if g[i] >= prev && g[i] > next || g[i] > prev && g[i] >= next {
            out.push(refine_max(f, i as f64 * h, h, g[i]));
        }
    }
    out
}

fn refine_max(f: &FastMap, theta: f64, h: f64, g0: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (theta - h, theta + h);
    if !(f.defect_slope(lo) > 0.0 && f.defect_slope(hi) < 0.0) {
        return (theta.rem_euclid(TAU), g0);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f.defect_slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let g = 1.0 - f.defect(t);
    if g >= g0 {
        (t.rem_euclid(TAU), g)
    } else {
        (theta.rem_euclid(TAU), g0)
    }
}

/// Angles where `|φ|` comes within `tol` of one, clustered.
pub fn near_contact_angles(f: &FastMap, tol: f64) -> Vec<(f64, f64)> {
    let mut cands: Vec<(f64, f64)> =
        boundary_maxima(f, CONTACT_SCAN_SAMPLES).into_iter().filter(|&(_, g)| g >= 1.0 - tol).collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for c in cands {
        if let Some(last) = out.last_mut() {
            if (c.0 - last.0).abs() < 1e-9 {
                if c.1 > last.1 {
                    *last = c;
                }
                continue;
            }
        }
        out.push(c);
    }
    if out.len() > 1 {
        let (first, last) = (out[0].0, out[out.len() - 1].0);
        if first + TAU - last < 1e-9 {
            out.pop();
        }
    }
    out
}

/// Exact unimodular points near `e^{iθ}`, from continued-fraction
/// convergents of the half-angle tangent.
pub fn snap_candidates(theta: f64) -> Vec<Number> {
    let theta = (theta + PI).rem_euclid(TAU) - PI;
    let flip = theta.abs() > PI / 2.0;
    let t = if flip { ((theta - PI.copysign(theta)) / 2.0).tan() } else { (theta / 2.0).tan() };
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::from(0), BigInt::from(1), BigInt::from(1), BigInt::from(0));
    let mut x = t;
    for _ in 0..40 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        let pp = &p2 * &p2;
        let qq = &q2 * &q2;
        let den = &pp + &qq;
        let re = BigRational::new(&qq - &pp, den.clone());
        let im = BigRational::new(BigInt::from(2) * &p2 * &q2, den);
        let mut z = Number::Exact(crate::exact::GaussianRational::new(re, im));
        if flip {
            z = -z;
        }
        out.push(z);
        if q2.bits() > 40 {
            break;
        }
        let frac = x - a;
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out
}

/// An exact contact point of an exact rational map near angle `θ`, if one
/// can be certified (unimodular value, even order, positive top coefficient).
pub fn certify_exact_contact(map: &SelfMap, r: &RationalMap, theta: f64) -> Option<Number> {
    let target = Complex64::from_polar(1.0, theta);
    for z in snap_candidates(theta) {
        if (z.to_c64() - target).norm() > 1e-4 {
            continue;
        }
        let p = r.num.eval(&z);
        let q = r.den.eval(&z);
        if p.norm_sqr() != q.norm_sqr() {
            continue;
        }
        if extract_contact(map, &z).is_ok() {
            return Some(z);
        }
    }
    None
}

fn sort_points(points: &mut [ContactPoint]) {
    points.sort_by(|a, b| a.zeta.arg_2pi().total_cmp(&b.zeta.arg_2pi()));
}

/// All contact points with full data, plus class flags.
pub fn find_contact_points(map: &SelfMap) -> Result<ContactSet> {
    let rep = ensure_valid(map)?;
    if rep.is_automorphism {
        return Err(Error::ContactArcDetected);
    }
    let flat = map.flatten()?;
    let mut points = Vec::new();
    match &flat {
        FlatMap::Lft(l) => {
            let (k, w) = lft_circle_data(l);
            let tangent = match l.mode() {
                Mode::Exact => !w.is_zero() && w.norm_sqr().scale_int(4) == k.norm_sqr(),
                Mode::Float => {
                    let scale = [&l.a, &l.b, &l.c, &l.d].iter().map(|x| x.norm_sqr().re_f64()).sum::<f64>();
                    w.abs_f64() > 0.0 && (k.re_f64() + 2.0 * w.abs_f64()).abs() <= 1e-10 * scale
                }
            };
            if tangent {
                let zeta = (&w.conj().scale_int(-2)).checked_div(&k).expect("K nonzero at tangency");
                points.push(extract_contact(map, &zeta)?);
            }
        }
        FlatMap::Rational(r) => {
            let f = map.fast()?;
            for (theta, g) in near_contact_angles(&f, 1e-9) {
                let zeta = if r.mode() == Mode::Exact { certify_exact_contact(map, r, theta) } else { None };
                match zeta {
                    Some(z) => points.push(extract_contact(map, &z)?),
                    None if g.sqrt() >= 1.0 - 1e-10 => {
                        if r.mode() == Mode::Exact {
                            return Err(Error::Indeterminate(format!("near-contact at angle {theta} cannot be certified")));
                        }
                        points.push(extract_contact(map, &Number::Float(Complex64::from_polar(1.0, theta)))?);
                    }
                    None => {}
                }
            }
        }
    }
    sort_points(&mut points);
    let in_s2 = points.iter().all(|p| p.order == 2);
    let in_l = matches!(flat, FlatMap::Lft(_)) && !points.is_empty();
    let in_s0 = match &flat {
        FlatMap::Lft(_) => true,
        FlatMap::Rational(_) => sup_off_contacts(&map.fast()?, &points)? < 1.0,
    };
    Ok(ContactSet { points, map_class: ClassFlags { in_s: true, in_s0, in_s2, in_l } })
}

/// Supremum of `|φ|` on the circle outside 0.1-radian arcs around contacts.
fn sup_off_contacts(f: &FastMap, points: &[ContactPoint]) -> Result<f64> {
    let angles: Vec<f64> = points.iter().map(|p| p.zeta.arg_2pi()).collect();
    let mut sup: f64 = 0.0;
    for i in 0..CONTACT_SCAN_SAMPLES {
        let t = TAU * i as f64 / CONTACT_SCAN_SAMPLES as f64;
        let near = angles.iter().any(|&a| {
            let d = (t - a).rem_euclid(TAU);
            d.min(TAU - d) < 0.1
        });
        if !near {
            sup = sup.max((1.0 - f.defect(t)).max(0.0).sqrt());
        }
    }
    if sup >= 1.0 - 1e-12 {
        return Err(Error::Indeterminate(format!("|phi| within tolerance of 1 away from contact points (sup {sup})")));
    }
    Ok(sup)
}

/// Class flags; maps whose data cannot be extracted are reported outside 𝒮.
pub fn class_membership(map: &SelfMap) -> Result<ClassFlags> {
    match find_contact_points(map) {
        Ok(cs) => Ok(cs.map_class),
        Err(Error::DataExtractionFailed { .. } | Error::OrderNotDetected { .. }) => Ok(ClassFlags::default()),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngularDerivative {
    /// `φ'(ζ)`, or `None` when the angular derivative is infinite.
    pub value: Option<Number>,
    /// `|φ'(ζ)| = ζ conj(φ(ζ)) φ'(ζ)`.
    pub modulus: Option<Number>,
    /// Extrapolated radial quotient `(1 - |φ(rζ)|)/(1 - r)`.
    pub radial_quotient: f64,
    pub agrees: Option<bool>,
}

fn radial_defect(map: &SelfMap, fast: &FastMap, zeta: &Number, j: u32) -> Result<f64> {
    // 1 - |φ(rζ)| with r = 1 - 2^{-j}; exact arithmetic avoids cancellation
    if map.mode() == Mode::Exact && zeta.is_exact() {
        let h = Number::real(BigRational::new(1.into(), BigInt::from(1u64) << j));
        let z = zeta * &(&Number::one() - &h);
        let v = map.eval(&z)?;
        let d = (&Number::one() - &v.norm_sqr()).re_f64();
        return Ok(d / (1.0 + v.abs_f64()));
    }
    let r = 1.0 - 2f64.powi(-(j as i32));
    Ok(1.0 - fast.eval(zeta.to_c64() * r).norm())
}

/// Angular derivative at `ζ`, cross-checked by the Julia–Carathéodory
/// radial quotient at `r = 1 - 2^{-j}`, `j = 10..=40`.
pub fn angular_derivative(map: &SelfMap, zeta: &Number) -> Result<AngularDerivative> {
    if !is_unimodular(zeta, 1e-14) {
        return Err(Error::InvalidArgument(format!("{zeta} is not unimodular")));
    }
    ensure_valid(map)?;
    let fast = map.fast()?;
    let mut q = Vec::new();
    for j in 10..=40u32 {
        q.push(radial_defect(map, &fast, zeta, j)? * 2f64.powi(j as i32));
    }
    let rich: Vec<f64> = q.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let radial = if map.mode() == Mode::Exact && zeta.is_exact() {
        *rich.last().expect("nonempty")
    } else {
        // pick the most stable extrapolant
        let mut best = (f64::INFINITY, rich[0]);
        for w in rich.windows(2) {
            let d = (w[1] - w[0]).abs();
            if d < best.0 {
                best = (d, w[1]);
            }
        }
        best.1
    };
    let jet = map.jet_at(zeta, 1)?;
    let value = jet.coeff(0).clone();
    if !is_unimodular(&value, 1e-12) {
        return Ok(AngularDerivative { value: None, modulus: None, radial_quotient: radial, agrees: None });
    }
    let d1 = jet.coeff(1).clone();
    let mut modulus = &(zeta * &value.conj()) * &d1;
    if let Number::Float(z) = &mut modulus {
        z.im = 0.0;
    }
    let m = modulus.re_f64();
    let agrees = (radial - m).abs() <= 1e-6 * m;
    Ok(AngularDerivative { value: Some(d1), modulus: Some(modulus), radial_quotient: radial, agrees: Some(agrees) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoCase {
    /// Full agreement of `D_{2m}`: the limit is zero.
    Agree,
    /// Equal orders and `D_{2m-1}`: the limit is `Λ(u^(2m)(0), v^(2m)(0))`.
    TopOrder,
    /// Orders of contact differ: the limit is one.
    OrderMismatch,
    /// Equal orders, different `D_{2m-1}`: the limit is one.
    LowerDataMismatch,
    /// Both maps touch at `ζ` with different boundary values.
    DifferentBoundaryValues,
    /// Exactly one of the maps touches the circle at `ζ`.
    OneSidedContact,
    /// Neither map touches; the limit is the interior distance.
    NoContact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoLimit {
    pub rho: f64,
    pub rho_sq: Number,
    pub case: RhoCase,
}

impl RhoLimit {
    fn one(case: RhoCase) -> RhoLimit {
        RhoLimit { rho: 1.0, rho_sq: Number::one(), case }
    }
}

/// Boundary limit of `ρ = |(φ - ψ)/(1 - conj(φ)ψ)|` at `ζ`.
pub fn rho_boundary_limit(phi: &SelfMap, psi: &SelfMap, zeta: &Number) -> Result<RhoLimit> {
    let a = phi.eval(zeta)?;
    let b = psi.eval(zeta)?;
    let ta = is_unimodular(&a, 1e-10);
    let tb = is_unimodular(&b, 1e-10);
    match (ta, tb) {
        (false, false) => {
            let sq = pseudo_hyperbolic_disk_sq(&a, &b)?;
            Ok(RhoLimit { rho: sq.re_f64().max(0.0).sqrt(), rho_sq: sq, case: RhoCase::NoContact })
        }
        (true, false) | (false, true) => Ok(RhoLimit::one(RhoCase::OneSidedContact)),
        (true, true) => {
            if !numbers_equal(&[a], &[b])? {
                return Ok(RhoLimit::one(RhoCase::DifferentBoundaryValues));
            }
            let p = extract_contact(phi, zeta)?;
            let q = extract_contact(psi, zeta)?;
            if p.order != q.order {
                return Ok(RhoLimit::one(RhoCase::OrderMismatch));
            }
            let m2 = p.order;
            if !data_equal(&p.data.truncate(m2 - 1), &q.data.truncate(m2 - 1))? {
                return Ok(RhoLimit::one(RhoCase::LowerDataMismatch));
            }
            let (u, v) = (p.halfplane.derivative(m2), q.halfplane.derivative(m2));
            if numbers_equal(std::slice::from_ref(u), std::slice::from_ref(v))? {
                return Ok(RhoLimit { rho: 0.0, rho_sq: Number::zero(), case: RhoCase::Agree });
            }
            let sq = pseudo_hyperbolic_halfplane_sq(u, v)?;
            Ok(RhoLimit { rho: sq.re_f64().sqrt(), rho_sq: sq, case: RhoCase::TopOrder })
        }
    }
}
