//! Numerical corroboration: finite sections of composition operators,
//! kernel estimates along approach curves, half-plane kernels and path
//! probes. Everything here is evidence, not proof; exact verdicts come from
//! the relation engine.

use std::f64::consts::TAU;

use faer::{Mat, Side};
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{find_contact_points, rho_boundary_limit};
use crate::calkin::Combination;
use crate::error::{Error, Result};
use crate::exact::GaussianRational;
use crate::number::{Mode, Number};
use crate::selfmap::{validate_self_map, FastMap, FlatMap, SelfMap, SpaceSpec};

/// First `n` Taylor coefficients of `φ` at the origin.
///
/// Linear-fractional maps use the closed form `c_k = det/d^2·(-c/d)^{k-1}`;
/// other maps use the division recurrence for `P/Q`, which is stable
/// because every zero of `Q` lies outside the closed disk.
pub fn taylor_coefficients(map: &SelfMap, n: usize) -> Result<Vec<Complex64>> {
    let out = match map.flatten()? {
        FlatMap::Lft(l) if n > 0 => {
            let d = l.d.clone();
            let c0 = l.b.checked_div(&d).ok_or_else(|| Error::PoleAt("0".into()))?;
            let lead = l.det().checked_div(&(&d * &d)).expect("d nonzero");
            let ratio = (-&l.c).checked_div(&d).expect("d nonzero");
            let (lead, ratio) = (lead.to_c64(), ratio.to_c64());
            let mut out = vec![c0.to_c64()];
            out.extend((1..n).map(|k| lead * ratio.powi(k as i32 - 1)));
            out
        }
        flat => {
            let r = flat.to_rational();
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            let mut one = vec![Complex64::new(0.0, 0.0); n];
            if n > 0 {
                one[0] = Complex64::new(1.0, 0.0);
            }
            mul_div_truncated(&one, &r.num.c64_coeffs(), &r.den.c64_coeffs(), &mut out);
            out
        }
    };
    if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::PrecisionBudgetExceeded("Taylor coefficients overflowed".into()));
    }
    Ok(out)
}

/// `out = a·P/Q` truncated to `a.len()` coefficients.
fn mul_div_truncated(a: &[Complex64], p: &[Complex64], q: &[Complex64], out: &mut [Complex64]) {
    let n = a.len();
    for i in 0..n {
        let mut s = Complex64::new(0.0, 0.0);
        for (k, pk) in p.iter().enumerate().take(i + 1) {
            s += pk * a[i - k];
        }
        for (k, qk) in q.iter().enumerate().skip(1).take(i) {
            s -= qk * out[i - k];
        }
        out[i] = s / q[0];
    }
}

/// Matrix of a combination of composition operators compressed to the
/// first `n` monomials, in the orthonormal basis `z^m/‖z^m‖`. Stored
/// column-major.
#[derive(Clone, Debug)]
pub struct FiniteSection {
    pub n: usize,
    pub beta: f64,
    data: Vec<Complex64>,
}

impl FiniteSection {
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.n + row]
    }

    pub fn column(&self, col: usize) -> &[Complex64] {
        &self.data[col * self.n..(col + 1) * self.n]
    }

    pub fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.n, self.n, |i, j| self.entry(i, j))
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (m, vm) in v.iter().enumerate() {
            if *vm == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(m)) {
                *o += a * vm;
            }
        }
    }

    fn apply_adjoint(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (m, o) in out.iter_mut().enumerate() {
            *o = self.column(m).iter().zip(v).map(|(a, x)| a.conj() * x).sum();
        }
    }
}

/// Finite section of `Σ c_j C_{φ_j}`; column `m` holds the coefficients of
/// `Σ c_j φ_j^m`, computed by `φ^m = φ^{m-1}·P/Q`.
pub fn finite_section(comb: &Combination, n: usize) -> Result<FiniteSection> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("N = {n} must be at least 16")));
    }
    let space = comb.space;
    let lognorm = space.log_monomial_norms(n);
    let fasts: Vec<FastMap> = comb.maps.iter().map(SelfMap::fast).collect::<Result<_>>()?;
    let coeffs: Vec<Complex64> = comb.coeffs.iter().map(Number::to_c64).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (f, c) in fasts.iter().zip(&coeffs) {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut cur = vec![Complex64::new(0.0, 0.0); n];
        cur[0] = Complex64::new(1.0, 0.0);
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for m in 0..n {
            let col = &mut data[m * n..(m + 1) * n];
            for (i, (dst, x)) in col.iter_mut().zip(&cur).enumerate() {
                *dst += c * x * (lognorm[i] - lognorm[m]).exp();
            }
            if m + 1 < n {
                mul_div_truncated(&cur, &f.num, &f.den, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
        }
    }
    if data.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::PrecisionBudgetExceeded("finite section overflowed".into()));
    }
    // subnormal entries derail the dense SVD and carry no information
    for x in data.iter_mut() {
        if x.norm_sqr() < 1e-280 {
            *x = Complex64::new(0.0, 0.0);
        }
    }
    Ok(FiniteSection { n, beta: space.beta, data })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn largest_ritz_value(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let ev = t.self_adjoint_eigenvalues(Side::Lower).expect("tridiagonal eigenproblem converges");
    ev.into_iter().fold(0.0, f64::max)
}

/// Largest singular value by Lanczos iteration on `A*A` with full
/// reorthogonalization. Ritz values never exceed the true value.
pub fn operator_norm_estimate(fs: &FiniteSection) -> f64 {
    let n = fs.n;
    let mut v: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(1.0 + 0.5 * (1.7 * i as f64).sin(), 0.25 * (0.9 * i as f64).cos())).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut last = 0.0;
    let max_steps = n.min(120);
    for j in 0..max_steps {
        fs.apply(&basis[j], &mut tmp);
        fs.apply_adjoint(&tmp, &mut w);
        let alpha: f64 = basis[j].iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        alphas.push(alpha);
        for _ in 0..2 {
            for q in &basis {
                let h: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= h * y;
                }
            }
        }
        let ritz = largest_ritz_value(&alphas, &betas);
        let b = norm(&w);
        let converged = j >= 4 && (ritz - last).abs() <= 1e-15 * ritz.max(1e-300);
        last = ritz;
        if converged || b <= 1e-14 * ritz.max(1e-300) {
            break;
        }
        betas.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    last.max(0.0).sqrt()
}

/// Every singular value, in nonincreasing order.
pub fn singular_values(fs: &FiniteSection) -> Result<Vec<f64>> {
    let mut sv = fs
        .to_faer()
        .singular_values()
        .map_err(|e| Error::PrecisionBudgetExceeded(format!("singular value decomposition failed: {e:?}")))?;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// The `(skip+1)`-th singular value: a heuristic essential-norm proxy.
pub fn singular_tail(fs: &FiniteSection, skip: usize) -> Result<f64> {
    Ok(singular_values(fs)?.get(skip).copied().unwrap_or(0.0))
}

/// `√(2/(1 - |φ(0)|))`, an upper bound for `‖C_φ‖` on the Hardy space.
pub fn hardy_norm_bound(map: &SelfMap) -> Result<f64> {
    let a = map.eval(&Number::zero())?.abs_f64();
    Ok((2.0 / (1.0 - a)).sqrt())
}

/// How depths along a test curve are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveDepth {
    /// Chord distance `|ζ - z|`.
    Chord,
    /// Radial distance `1 - |z|`.
    Radial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub z: Complex64,
    /// `z - ζ`, accurate to full relative precision.
    pub offset: Complex64,
    pub one_minus_abs2: f64,
    pub depth: f64,
}

/// Points on the leg of `|ζ - z|^k = M(1 - |z|^2)` reaching `ζ`
/// counterclockwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestCurve {
    pub zeta: Complex64,
    pub k: u32,
    pub m: f64,
    pub points: Vec<CurvePoint>,
}

impl TestCurve {
    /// Largest relative residual of the defining equation.
    pub fn max_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let lhs = p.offset.norm().powi(self.k as i32);
                let rhs = self.m * p.one_minus_abs2;
                (lhs - rhs).abs() / rhs
            })
            .fold(0.0, f64::max)
    }
}

/// Point at chord `s` or radial depth `δ`, written `z = ζ r e^{-it}`.
fn curve_point(zeta: Complex64, k: u32, m: f64, depth: f64, kind: CurveDepth) -> Result<CurvePoint> {
    let fail = |reason: &str| Error::NoSolutionAtDepth { depth, reason: reason.into() };
    let (s, one_minus_abs2, delta) = match kind {
        CurveDepth::Chord => {
            let h = depth.powi(k as i32) / m;
            if h >= 1.0 {
                return Err(fail("chord too long for this M"));
            }
            let r = (1.0 - h).sqrt();
            (depth, h, h / (1.0 + r))
        }
        CurveDepth::Radial => {
            if depth >= 1.0 {
                return Err(fail("radial depth must be below one"));
            }
            let h = depth * (2.0 - depth);
            ((m * h).powf(1.0 / k as f64), h, depth)
        }
    };
    let r = 1.0 - delta;
    // |1 - r e^{-it}|^2 = δ^2 + 4r sin^2(t/2)
    let sin2 = (s * s - delta * delta) / (4.0 * r);
    if !(sin2 >= 0.0) || sin2 > 1.0 {
        return Err(fail("the locus does not reach this depth"));
    }
    let half = sin2.sqrt().asin();
    let t = 2.0 * half;
    // r e^{-it} - 1 = -(δ + 2r sin^2(t/2)) - i r sin t
    let local = Complex64::new(-(delta + 2.0 * r * sin2), -r * t.sin());
    let offset = zeta * local;
    Ok(CurvePoint { z: zeta + offset, offset, one_minus_abs2, depth })
}

/// `count` points with depths spaced geometrically from `depths.0` down to
/// `depths.1`, ordered from shallow to deep.
pub fn curve_points(
    zeta: &Number,
    k: u32,
    m: f64,
    count: usize,
    depths: (f64, f64),
    kind: CurveDepth,
) -> Result<TestCurve> {
    if k < 1 || !(m > 0.0) || count == 0 {
        return Err(Error::InvalidArgument("need k ≥ 1, M > 0 and at least one point".into()));
    }
    let (hi, lo) = (depths.0.max(depths.1), depths.0.min(depths.1));
    if !(lo > 0.0) {
        return Err(Error::InvalidArgument("depths must be positive".into()));
    }
    let zeta = zeta.to_c64();
    let zeta = zeta / zeta.norm();
    let points = (0..count)
        .map(|i| {
            let f = if count == 1 { 1.0 } else { i as f64 / (count - 1) as f64 };
            let depth = hi * (lo / hi).powf(f);
            curve_point(zeta, k, m, depth, kind)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TestCurve { zeta, k, m, points })
}

/// `Σ_{j,l} c̄_j c_l ((1 - |z|^2)/(1 - conj(φ_j(z)) φ_l(z)))^β` at a point.
struct QuadraticForm {
    maps: Vec<SelfMap>,
    fasts: Vec<FastMap>,
    coeffs: Vec<Complex64>,
    beta: f64,
    exact: bool,
}

impl QuadraticForm {
    fn new(comb: &Combination) -> Result<QuadraticForm> {
        Ok(QuadraticForm {
            fasts: comb.maps.iter().map(SelfMap::fast).collect::<Result<_>>()?,
            maps: comb.maps.clone(),
            coeffs: comb.coeffs.iter().map(Number::to_c64).collect(),
            beta: comb.space.beta,
            exact: comb.maps.iter().all(|m| m.mode() == Mode::Exact),
        })
    }

    fn combine(&self, ratio: impl Fn(usize, usize) -> Complex64) -> f64 {
        let n = self.coeffs.len();
        let mut total = 0.0;
        for j in 0..n {
            for l in 0..n {
                let w = self.coeffs[j].conj() * self.coeffs[l];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let q = ratio(j, l);
                let q = if self.beta == 1.0 { q } else { q.powf(self.beta) };
                total += (w * q).re;
            }
        }
        total
    }

    fn at_float(&self, z: Complex64, one_minus_abs2: f64) -> f64 {
        let vals: Vec<Complex64> = self.fasts.iter().map(|f| f.eval(z)).collect();
        self.combine(|j, l| Complex64::new(one_minus_abs2, 0.0) / (1.0 - vals[j].conj() * vals[l]))
    }

    /// Exact evaluation at the dyadic point `ζ + offset`; immune to the
    /// cancellation in `1 - conj(φ_j)φ_l` near the boundary.
    fn at_exact(&self, zeta: &Number, offset: Complex64) -> Result<f64> {
        let off = GaussianRational::from_c64(offset).ok_or_else(|| Error::InvalidArgument("non-finite point".into()))?;
        let z = zeta + &Number::Exact(off);
        let h = &Number::one() - &z.norm_sqr();
        let vals: Vec<Number> = self.maps.iter().map(|m| m.eval(&z)).collect::<Result<_>>()?;
        let mut ratios = vec![Complex64::new(0.0, 0.0); vals.len() * vals.len()];
        for j in 0..vals.len() {
            for l in 0..vals.len() {
                let den = &Number::one() - &(&vals[j].conj() * &vals[l]);
                ratios[j * vals.len() + l] = h.checked_div(&den).expect("point inside the disk").to_c64();
            }
        }
        Ok(self.combine(|j, l| ratios[j * vals.len() + l]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelEstimate {
    /// `(depth, value)` along the curve, shallow to deep.
    pub samples: Vec<(f64, f64)>,
    /// Largest value over the deepest decade of depths.
    pub estimate: f64,
    /// Spread of the values in the deepest decade, relative to the estimate.
    pub spread: f64,
    pub stabilized: bool,
}

/// Evaluates the normalized-kernel quadratic form along a test curve.
pub fn kernel_lowerbound_estimate(comb: &Combination, curve: &TestCurve) -> Result<KernelEstimate> {
    let form = QuadraticForm::new(comb)?;
    let zeta_exact = GaussianRational::from_c64(curve.zeta).map(Number::Exact);
    let exact = form.exact && zeta_exact.is_some();
    let values: Vec<f64> = curve
        .points
        .par_iter()
        .map(|p| {
            if exact {
                form.at_exact(zeta_exact.as_ref().expect("checked"), p.offset)
            } else {
                Ok(form.at_float(p.z, p.one_minus_abs2))
            }
        })
        .collect::<Result<_>>()?;
    let samples: Vec<(f64, f64)> = curve.points.iter().map(|p| p.depth).zip(values).collect();
    let deepest = samples.last().map_or(0.0, |s| s.0);
    let tail: Vec<f64> = samples.iter().filter(|s| s.0 <= 10.0 * deepest).map(|s| s.1).collect();
    let estimate = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let low = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (estimate - low) / estimate.abs().max(1e-12);
    Ok(KernelEstimate { samples, estimate, spread, stabilized: spread <= 1e-3 })
}

/// Normalized reproducing kernel `k⁺_w(z) = (z + w̄)^{-β}` of the right
/// half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfPlaneKernel {
    pub w: Complex64,
    pub beta: f64,
}

impl HalfPlaneKernel {
    pub fn new(w: Complex64, beta: f64) -> Result<HalfPlaneKernel> {
        if !(w.re > 0.0) {
            return Err(Error::InvalidArgument(format!("kernel point {w} is not in the right half-plane")));
        }
        Ok(HalfPlaneKernel { w, beta })
    }

    /// `⟨k⁺_self, k⁺_other⟩ = k⁺_self(other.w)`.
    pub fn inner(&self, other: &HalfPlaneKernel) -> Complex64 {
        (other.w + self.w.conj()).powf(-self.beta)
    }

    pub fn norm_sq(&self) -> f64 {
        (2.0 * self.w.re).powf(-self.beta)
    }
}

/// Gram matrix `G[i][j] = ⟨k⁺_j, k⁺_i⟩ = (w_i + w̄_j)^{-β}`, checked to be
/// positive semidefinite.
pub fn halfplane_kernel_gram(ws: &[HalfPlaneKernel]) -> Result<Mat<Complex64>> {
    let g = Mat::from_fn(ws.len(), ws.len(), |i, j| ws[j].inner(&ws[i]));
    if ws.len() > 1 {
        let ev = gram_eigenvalues(&g)?;
        let max = ev.iter().copied().fold(0.0, f64::max);
        let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-12 * max {
            return Err(Error::GramNotPsd { min_eig: min, condition: max / min.abs() });
        }
    }
    Ok(g)
}

/// Eigenvalues of a Hermitian matrix, nondecreasing.
pub fn gram_eigenvalues(g: &Mat<Complex64>) -> Result<Vec<f64>> {
    g.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::GramNotPsd { min_eig: f64::NAN, condition: f64::NAN })
}

/// `‖Σ a_j k⁺_{w_j}‖^2 = a^* G a`.
pub fn kernel_combination_norm_sq(ks: &[HalfPlaneKernel], a: &[Complex64]) -> Result<f64> {
    let g = halfplane_kernel_gram(ks)?;
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..ks.len() {
        for j in 0..ks.len() {
            s += a[i].conj() * g[(i, j)] * a[j];
        }
    }
    Ok(s.re.max(0.0))
}

/// `‖k⁺_z - k⁺_w‖^2 = |(z - w)/(z + w̄)|^2 (1/(2 Re z) + 1/(2 Re w))` on the
/// Hardy space of the right half-plane.
pub fn halfplane_kernel_diff_norm_beta1(z: Complex64, w: Complex64) -> Result<f64> {
    if !(z.re > 0.0 && w.re > 0.0) {
        return Err(Error::InvalidArgument("kernel points must lie in the right half-plane".into()));
    }
    Ok(((z - w) / (z + w.conj())).norm_sqr() * (0.5 / z.re + 0.5 / w.re))
}

/// The same norm by expanding the inner products.
pub fn halfplane_kernel_diff_norm_expanded(z: Complex64, w: Complex64) -> f64 {
    0.5 / z.re + 0.5 / w.re - 2.0 * (1.0 / (z + w.conj())).re
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeVerdict {
    ConsistentWithCompact,
    NotConsistentWithCompact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessProbe {
    /// `(radius, max of the quadratic form over the angle grid)`.
    pub per_radius: Vec<(f64, f64)>,
    pub threshold: f64,
    pub verdict: ProbeVerdict,
    pub heuristic: bool,
}

pub const DEFAULT_PROBE_RADII: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];
pub const PROBE_THRESHOLD: f64 = 1e-3;

/// Maximum of the normalized-kernel quadratic form on circles of the given
/// radii: `angles` equispaced points plus a refinement near every contact
/// point of every map.
pub fn compactness_probe(comb: &Combination, radii: &[f64], angles: usize) -> Result<CompactnessProbe> {
    let form = QuadraticForm::new(comb)?;
    let mut contacts = Vec::new();
    for m in &comb.maps {
        if let Ok(cs) = find_contact_points(m) {
            contacts.extend(cs.points.iter().map(|p| p.zeta.to_c64().arg()));
        }
    }
    let per_radius = radii
        .iter()
        .map(|&r| {
            let mut thetas: Vec<f64> = (0..angles).map(|i| TAU * i as f64 / angles as f64).collect();
            for &a in &contacts {
                thetas.extend((-64..=64).map(|j| a + j as f64 * 0.25 * (1.0 - r)));
            }
            let h = 1.0 - r * r;
            let max = thetas
                .par_iter()
                .map(|&t| form.at_float(Complex64::from_polar(r, t), h))
                .reduce(|| f64::NEG_INFINITY, f64::max);
            (r, max)
        })
        .collect::<Vec<_>>();
    let deepest = per_radius.last().map_or(0.0, |p| p.1);
    let verdict = if deepest < PROBE_THRESHOLD {
        ProbeVerdict::ConsistentWithCompact
    } else {
        ProbeVerdict::NotConsistentWithCompact
    };
    Ok(CompactnessProbe { per_radius, threshold: PROBE_THRESHOLD, verdict, heuristic: true })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzRow {
    pub n: usize,
    pub s: f64,
    pub r: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathProbe {
    /// Largest `ρ(φ, ψ)` seen on the boundary scan.
    pub boundary_rho_sup: f64,
    pub rows: Vec<LipschitzRow>,
    /// `(N, max ratio)` for each size in the ladder.
    pub b_hat: Vec<(usize, f64)>,
    /// `(max - min)/max` of the fitted constants across the ladder.
    pub variation: f64,
}

/// Boundary scan threshold: `ρ` this close to one counts as reaching one.
pub const RHO_ONE_TOL: f64 = 1e-3;

/// Rational point `ζ·((1 - t^2) + 2ti)/(1 + t^2)` on the circle.
fn rotated_rational_point(zeta: &GaussianRational, t: &BigRational) -> GaussianRational {
    let one = BigRational::from_integer(1.into());
    let den = &one + t * t;
    let w = GaussianRational::new((&one - t * t) / &den, (t + t) / &den);
    zeta * &w
}

fn rho_at(phi: &SelfMap, psi: &SelfMap, z: &Number) -> Result<f64> {
    let a = phi.eval(z)?;
    let b = psi.eval(z)?;
    let num = (&a - &b).norm_sqr();
    let den = (&Number::one() - &(&a.conj() * &b)).norm_sqr();
    if den.is_zero() {
        return Ok(if num.is_zero() { 0.0 } else { 1.0 });
    }
    Ok(num.checked_div(&den).expect("nonzero").re_f64().max(0.0).sqrt())
}

/// `sup ρ(e^{iθ})` over an equispaced grid plus approaches to every contact
/// point at angular distances `10^{-j}`, `j = 1..=8`; exact arithmetic is
/// used near contacts when both maps are exact.
pub fn boundary_rho_scan(phi: &SelfMap, psi: &SelfMap) -> Result<(f64, Vec<(f64, f64)>)> {
    let (fp, fq) = (phi.fast()?, psi.fast()?);
    let mut sup: f64 = 0.0;
    for i in 0..4096 {
        let z = Complex64::from_polar(1.0, TAU * i as f64 / 4096.0);
        let (a, b) = (fp.eval(z), fq.eval(z));
        let den = (1.0 - a.conj() * b).norm();
        if den > 1e-6 {
            sup = sup.max((a - b).norm() / den);
        }
    }
    let mut zetas: Vec<Number> = Vec::new();
    for m in [phi, psi] {
        for p in find_contact_points(m)?.points {
            if !zetas.iter().any(|z| (z.to_c64() - p.zeta.to_c64()).norm() < 1e-9) {
                zetas.push(p.zeta);
            }
        }
    }
    let exact = phi.mode() == Mode::Exact && psi.mode() == Mode::Exact;
    let mut approach = Vec::new();
    for zeta in &zetas {
        for j in 1..=8i32 {
            for sign in [-1i64, 1] {
                let v = match zeta.as_exact() {
                    Some(ze) if exact => {
                        let t = BigRational::new(sign.into(), num_bigint::BigInt::from(10u64).pow(j as u32));
                        rho_at(phi, psi, &Number::Exact(rotated_rational_point(ze, &t)))?
                    }
                    _ if j <= 5 => {
                        let z = zeta.to_c64() * Complex64::from_polar(1.0, sign as f64 * 10f64.powi(-j));
                        rho_at(phi, psi, &Number::Float(z))?
                    }
                    _ => continue,
                };
                sup = sup.max(v);
                approach.push((sign as f64 * 10f64.powi(-j), v));
            }
        }
    }
    Ok((sup, approach))
}

/// Finite-section Lipschitz ratios `‖C_{φ_s} - C_{φ_r}‖_N/|s - r|` along
/// `φ_t = tφ + (1 - t)ψ` for consecutive partition points.
pub fn path_lipschitz_probe(
    phi: &SelfMap,
    psi: &SelfMap,
    partition: &[BigRational],
    ladder: &[usize],
) -> Result<PathProbe> {
    let (sup, _) = boundary_rho_scan(phi, psi)?;
    if sup >= 1.0 - RHO_ONE_TOL {
        return Err(Error::RhoNotBoundedAwayFromOne(format!("boundary scan reaches rho = {sup}")));
    }
    for m in [phi, psi] {
        for p in find_contact_points(m)?.points {
            let lim = rho_boundary_limit(phi, psi, &p.zeta)?;
            if lim.rho >= 1.0 {
                return Err(Error::RhoNotBoundedAwayFromOne(format!("rho -> 1 at {} ({:?})", p.zeta, lim.case)));
            }
        }
    }
    let maps: Vec<SelfMap> = partition
        .iter()
        .map(|t| {
            let m = SelfMap::convex_combination(&Number::real(t.clone()), phi, psi)?;
            let rep = validate_self_map(&m)?;
            if !rep.passed() {
                return Err(Error::Indeterminate(format!("path map at t = {t} could not be validated")));
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut b_hat = Vec::new();
    for &n in ladder {
        let mut best: f64 = 0.0;
        for i in 0..maps.len().saturating_sub(1) {
            let (s, r) = (&partition[i + 1], &partition[i]);
            let comb = Combination::new(
                vec![maps[i + 1].clone(), maps[i].clone()],
                vec![Number::one(), Number::int(-1)],
                SpaceSpec::hardy(),
            )?;
            let norm = operator_norm_estimate(&finite_section(&comb, n)?);
            let gap = crate::exact::rat_to_f64(&(s - r)).abs();
            let ratio = norm / gap;
            best = best.max(ratio);
            rows.push(LipschitzRow { n, s: crate::exact::rat_to_f64(s), r: crate::exact::rat_to_f64(r), ratio });
        }
        b_hat.push((n, best));
    }
    let hi = b_hat.iter().map(|b| b.1).fold(0.0, f64::max);
    let lo = b_hat.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let variation = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
    Ok(PathProbe { boundary_rho_sup: sup, rows, b_hat, variation })
}
