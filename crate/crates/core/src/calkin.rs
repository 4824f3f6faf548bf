//! Linear relations among composition operators modulo the compact
//! operators: data grouping, compactness decisions, relation spaces,
//! difference bounds and osculating decompositions.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{data_equal, numbers_equal, rho_boundary_limit, ContactPoint, ContactSet, DataVector, RhoCase};
use crate::clark::contacts_in_s;
use crate::error::{Error, Result};
use crate::exact::GaussianRational;
use crate::number::{joint_mode, Mode, Number};
use crate::numerics::HalfPlaneKernel;
use crate::selfmap::{validate_self_map, CayleyMap, Lft, SelfMap, SpaceSpec};

/// `c_1 C_{φ_1} + … + c_n C_{φ_n}` acting on `𝒟_β`.
#[derive(Clone, Debug, PartialEq)]
pub struct Combination {
    pub maps: Vec<SelfMap>,
    pub coeffs: Vec<Number>,
    pub space: SpaceSpec,
}

impl Combination {
    pub fn new(maps: Vec<SelfMap>, coeffs: Vec<Number>, space: SpaceSpec) -> Result<Combination> {
        if maps.is_empty() {
            return Err(Error::InvalidArgument("a combination needs at least one map".into()));
        }
        if maps.len() != coeffs.len() {
            return Err(Error::InvalidArgument(format!("{} maps but {} coefficients", maps.len(), coeffs.len())));
        }
        Ok(Combination { maps, coeffs, space })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.maps.iter().fold(joint_mode(&self.coeffs), |m, f| m.join(f.mode()))
    }
}

/// Contact sets of every map, computed in parallel.
pub fn contact_sets(maps: &[SelfMap]) -> Result<Vec<ContactSet>> {
    maps.par_iter().map(contacts_in_s).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataGroupKey {
    pub zeta: Number,
    pub k: usize,
    pub d: DataVector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataGroup {
    pub key: DataGroupKey,
    pub members: Vec<usize>,
}

/// Contact points of all maps at one boundary point.
struct Bucket<'a> {
    zeta: Number,
    entries: Vec<(usize, &'a ContactPoint)>,
}

fn one(x: &Number) -> &[Number] {
    std::slice::from_ref(x)
}

fn buckets(sets: &[ContactSet]) -> Result<Vec<Bucket<'_>>> {
    let mut out: Vec<Bucket> = Vec::new();
    for (j, cs) in sets.iter().enumerate() {
        'points: for p in &cs.points {
            for b in out.iter_mut() {
                if numbers_equal(one(&b.zeta), one(&p.zeta))? {
                    if !b.zeta.is_exact() && p.zeta.is_exact() {
                        b.zeta = p.zeta.clone();
                    }
                    b.entries.push((j, p));
                    continue 'points;
                }
            }
            out.push(Bucket { zeta: p.zeta.clone(), entries: vec![(j, p)] });
        }
    }
    out.sort_by(|a, b| a.zeta.arg_2pi().total_cmp(&b.zeta.arg_2pi()));
    Ok(out)
}

fn bucket_at<'a>(sets: &'a [ContactSet], zeta: &Number) -> Result<Vec<(usize, &'a ContactPoint)>> {
    let mut out = Vec::new();
    for (j, cs) in sets.iter().enumerate() {
        if let Some(p) = cs.find(zeta)? {
            out.push((j, p));
        }
    }
    Ok(out)
}

/// Partitions `(index, data)` pairs by data equality, ordered
/// lexicographically by data.
fn partition(items: Vec<(usize, DataVector)>) -> Result<Vec<(DataVector, Vec<usize>)>> {
    let mut out: Vec<(DataVector, Vec<usize>)> = Vec::new();
    'items: for (j, d) in items {
        for (rep, members) in out.iter_mut() {
            if data_equal(rep, &d)? {
                members.push(j);
                continue 'items;
            }
        }
        out.push((d, vec![j]));
    }
    out.sort_by(|a, b| a.0.lex_cmp(&b.0));
    Ok(out)
}

/// Groups `ℕ_k(ζ)` split by `D_k`, for every contact point `ζ` and every
/// order `k` present there; ordered by `arg ζ`, then `k`, then `d`.
pub fn groups_from_contacts(sets: &[ContactSet]) -> Result<Vec<DataGroup>> {
    let mut out = Vec::new();
    for b in buckets(sets)? {
        let mut orders: Vec<usize> = b.entries.iter().map(|(_, p)| p.order).collect();
        orders.sort_unstable();
        orders.dedup();
        for k in orders {
            let items = b.entries.iter().filter(|(_, p)| p.order == k).map(|(j, p)| (*j, p.data.clone())).collect();
            for (d, members) in partition(items)? {
                out.push(DataGroup { key: DataGroupKey { zeta: b.zeta.clone(), k, d }, members });
            }
        }
    }
    Ok(out)
}

pub fn build_groups(maps: &[SelfMap]) -> Result<Vec<DataGroup>> {
    groups_from_contacts(&contact_sets(maps)?)
}

/// Members touching `ζ` with order at least `min_order`, split by
/// `D_{len}`.
fn groups_at(
    bucket: &[(usize, &ContactPoint)],
    min_order: usize,
    len: usize,
) -> Result<Vec<(DataVector, Vec<usize>)>> {
    let items = bucket
        .iter()
        .filter(|(_, p)| p.order >= min_order)
        .map(|(j, p)| (*j, p.data.truncate(len)))
        .collect();
    partition(items)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupSum {
    pub key: DataGroupKey,
    pub members: Vec<usize>,
    pub sum: Number,
}

/// A first-order group `{j : D_1(φ_j, ζ) = d}` whose coefficient sum is
/// nonzero; any such group rules out compactness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstOrderViolation {
    pub zeta: Number,
    pub d: DataVector,
    pub members: Vec<usize>,
    pub sum: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessVerdict {
    pub compact: bool,
    pub violated_groups: Vec<GroupSum>,
    pub first_order_violations: Vec<FirstOrderViolation>,
    pub mode: Mode,
}

fn coeff_scale(coeffs: &[Number]) -> f64 {
    coeffs.iter().map(Number::abs_f64).fold(0.0, f64::max)
}

/// Exact zero test, or `|s| ≤ 1e-12·max|c_j|` for float sums.
fn sum_vanishes(s: &Number, scale: f64) -> bool {
    match s {
        Number::Exact(q) => q.is_zero(),
        Number::Float(z) => z.norm() <= 1e-12 * scale,
    }
}

fn group_sum(coeffs: &[Number], members: &[usize]) -> Number {
    members.iter().map(|&j| coeffs[j].clone()).sum()
}

/// Precomputed grouping for a fixed family of maps; deciding compactness
/// of a coefficient vector only sums over groups.
#[derive(Clone, Debug)]
pub struct RelationEngine {
    n: usize,
    groups: Vec<DataGroup>,
    first_order: Vec<(Number, DataVector, Vec<usize>)>,
    mode: Mode,
}

impl RelationEngine {
    pub fn new(maps: &[SelfMap]) -> Result<RelationEngine> {
        Self::from_contacts(&contact_sets(maps)?)
    }

    pub fn from_contacts(sets: &[ContactSet]) -> Result<RelationEngine> {
        let groups = groups_from_contacts(sets)?;
        let mut first_order = Vec::new();
        for b in buckets(sets)? {
            for (d, members) in groups_at(&b.entries, 0, 1)? {
                first_order.push((b.zeta.clone(), d, members));
            }
        }
        let mode = sets.iter().fold(Mode::Exact, |m, cs| m.join(cs.mode()));
        Ok(RelationEngine { n: sets.len(), groups, first_order, mode })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[DataGroup] {
        &self.groups
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Compact iff every group sum vanishes.
    pub fn decide(&self, coeffs: &[Number]) -> Result<CompactnessVerdict> {
        if coeffs.len() != self.n {
            return Err(Error::InvalidArgument(format!("{} coefficients for {} maps", coeffs.len(), self.n)));
        }
        let scale = coeff_scale(coeffs);
        let mut violated_groups = Vec::new();
        for g in &self.groups {
            let sum = group_sum(coeffs, &g.members);
            if !sum_vanishes(&sum, scale) {
                violated_groups.push(GroupSum { key: g.key.clone(), members: g.members.clone(), sum });
            }
        }
        let mut first_order_violations = Vec::new();
        for (zeta, d, members) in &self.first_order {
            let sum = group_sum(coeffs, members);
            if !sum_vanishes(&sum, scale) {
                first_order_violations.push(FirstOrderViolation {
                    zeta: zeta.clone(),
                    d: d.clone(),
                    members: members.clone(),
                    sum,
                });
            }
        }
        Ok(CompactnessVerdict {
            compact: violated_groups.is_empty(),
            violated_groups,
            first_order_violations,
            mode: self.mode.join(joint_mode(coeffs)),
        })
    }

    /// Every group sum, violated or not, in group order.
    pub fn group_sums(&self, coeffs: &[Number]) -> Vec<GroupSum> {
        self.groups
            .iter()
            .map(|g| GroupSum { key: g.key.clone(), members: g.members.clone(), sum: group_sum(coeffs, &g.members) })
            .collect()
    }

    pub fn generators(&self) -> Vec<Vec<u8>> {
        self.groups
            .iter()
            .map(|g| {
                let mut x = vec![0u8; self.n];
                for &j in &g.members {
                    x[j] = 1;
                }
                x
            })
            .collect()
    }

    pub fn relation_space(&self) -> RelationSpace {
        let generators = self.generators();
        let rows: Vec<Vec<BigRational>> = generators.iter().map(|x| indicator_row(x)).collect();
        let (rref_rows, pivots) = rref(rows);
        let kernel = kernel_from_rref(&rref_rows, &pivots, self.n);
        let to_numbers =
            |v: &Vec<BigRational>| v.iter().map(|q| Number::real(q.clone())).collect::<Vec<Number>>();
        RelationSpace {
            n: self.n,
            basis_of_m: rref_rows.iter().map(to_numbers).collect(),
            basis_of_kernel: kernel.iter().map(to_numbers).collect(),
            generators,
            mode: self.mode,
        }
    }
}

pub fn decide_compact(comb: &Combination) -> Result<CompactnessVerdict> {
    RelationEngine::new(&comb.maps)?.decide(&comb.coeffs)
}

/// The span `𝓜` of the group indicators and its annihilator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationSpace {
    pub n: usize,
    pub generators: Vec<Vec<u8>>,
    pub basis_of_m: Vec<Vec<Number>>,
    pub basis_of_kernel: Vec<Vec<Number>>,
    pub mode: Mode,
}

impl RelationSpace {
    pub fn dim_m(&self) -> usize {
        self.basis_of_m.len()
    }

    pub fn dim_kernel(&self) -> usize {
        self.basis_of_kernel.len()
    }
}

pub fn build_relation_space(maps: &[SelfMap]) -> Result<RelationSpace> {
    Ok(RelationEngine::new(maps)?.relation_space())
}

pub fn coset_dimension(maps: &[SelfMap]) -> Result<usize> {
    Ok(build_relation_space(maps)?.dim_m())
}

fn indicator_row(x: &[u8]) -> Vec<BigRational> {
    x.iter().map(|&b| BigRational::from_integer(b.into())).collect()
}

/// Reduced row echelon form over ℚ; returns the nonzero rows and the
/// pivot columns.
pub fn rref(mut rows: Vec<Vec<BigRational>>) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for cc in c..ncols {
                    let v = &rows[r][cc] * &f;
                    rows[i][cc] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(rows: Vec<Vec<BigRational>>) -> usize {
    rref(rows).1.len()
}

fn normalize_first_nonzero(v: &mut [BigRational]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        for x in v.iter_mut() {
            *x = &*x / &lead;
        }
    }
}

/// One kernel vector per free column, scaled so its first nonzero entry
/// is one.
fn kernel_from_rref(rows: &[Vec<BigRational>], pivots: &[usize], n: usize) -> Vec<Vec<BigRational>> {
    let mut out = Vec::new();
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); n];
        v[f] = BigRational::one();
        for (row, &pc) in rows.iter().zip(pivots) {
            v[pc] = -row[f].clone();
        }
        normalize_first_nonzero(&mut v);
        out.push(v);
    }
    out
}

/// Rational basis of `𝓜^⊥` by elimination on the group indicators.
pub fn relation_basis(maps: &[SelfMap]) -> Result<Vec<Vec<BigRational>>> {
    if maps.iter().any(|m| m.mode() == Mode::Float) {
        return Err(Error::ExactModeRequired("relation bases need exact map data".into()));
    }
    let engine = RelationEngine::new(maps)?;
    if engine.mode == Mode::Float {
        return Err(Error::ExactModeRequired("relation bases need exact map data".into()));
    }
    let rows: Vec<Vec<BigRational>> = engine.generators().iter().map(|x| indicator_row(x)).collect();
    let (rref_rows, pivots) = rref(rows);
    Ok(kernel_from_rref(&rref_rows, &pivots, engine.n))
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `𝓜^⊥` by rational Gram–Schmidt: orthogonalize the generators, project
/// the standard basis off them and keep an independent subset of the
/// projections.
pub fn relation_basis_gram_schmidt(generators: &[Vec<u8>], n: usize) -> Vec<Vec<BigRational>> {
    let mut ortho: Vec<Vec<BigRational>> = Vec::new();
    let project_off = |v: &mut Vec<BigRational>, ortho: &[Vec<BigRational>]| {
        for q in ortho {
            let f = dot(v, q) / dot(q, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= &f * y;
            }
        }
    };
    for g in generators {
        let mut v = indicator_row(g);
        project_off(&mut v, &ortho);
        if v.iter().any(|x| !x.is_zero()) {
            ortho.push(v);
        }
    }
    let mut out: Vec<Vec<BigRational>> = Vec::new();
    for j in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[j] = BigRational::one();
        project_off(&mut e, &ortho);
        if e.iter().all(Zero::is_zero) {
            continue;
        }
        let mut trial = out.clone();
        trial.push(e.clone());
        if rank(trial) > out.len() {
            normalize_first_nonzero(&mut e);
            out.push(e);
        }
    }
    out
}

fn abs_derivative_pow(p: &ContactPoint, beta: f64) -> Number {
    p.derivative_modulus().real_pow(beta)
}


/// `Σ_{d} |Σ_{D_1(φ_j,ζ)=d} c_j|^2 / |d_1|^β`.
pub fn first_order_lower_bound(comb: &Combination, zeta: &Number) -> Result<Number> {
    let sets = contact_sets(&comb.maps)?;
    first_order_lower_bound_with(&sets, &comb.coeffs, comb.space, zeta)
}

pub fn first_order_lower_bound_with(
    sets: &[ContactSet],
    coeffs: &[Number],
    space: SpaceSpec,
    zeta: &Number,
) -> Result<Number> {
    let bucket = bucket_at(sets, zeta)?;
    let groups = groups_at(&bucket, 0, 1)?;
    Ok(first_order_sum(&bucket, &groups, coeffs, space.beta))
}

fn first_order_sum(
    bucket: &[(usize, &ContactPoint)],
    groups: &[(DataVector, Vec<usize>)],
    coeffs: &[Number],
    beta: f64,
) -> Number {
    let mut total = Number::zero();
    for (_, members) in groups {
        let p = bucket.iter().find(|(j, _)| *j == members[0]).expect("member in bucket").1;
        let s = group_sum(coeffs, members);
        total = &total + &s.norm_sqr().checked_div(&abs_derivative_pow(p, beta)).expect("nonzero");
    }
    total
}

/// `Σ_{d} |Σ_{j ∈ 𝕄_k(ζ), D_{k-1}(φ_j,ζ)=d} c_j|^2 / |d_1|^β` where
/// `𝕄_k(ζ)` holds the maps with order of contact at least `k` at `ζ`.
pub fn higher_order_lower_bound(comb: &Combination, zeta: &Number, k: usize) -> Result<Number> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k} must be at least 2")));
    }
    let sets = contact_sets(&comb.maps)?;
    let bucket = bucket_at(&sets, zeta)?;
    let groups = groups_at(&bucket, k, k - 1)?;
    Ok(first_order_sum(&bucket, &groups, &comb.coeffs, comb.space.beta))
}

/// `Σ_d ‖Σ c̄_j k⁺_{w_j}‖^2` with `w_j = u_j'(0)/2 - iA·u_j^(k)(0)` over
/// the groups of `𝕄_k(ζ)` split by `D_{k-1}`.
pub fn kernel_sum_lower_bound(comb: &Combination, zeta: &Number, k: usize, a: f64) -> Result<f64> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("k = {k} must be even and at least 2")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("A = {a} must be positive")));
    }
    let sets = contact_sets(&comb.maps)?;
    let bucket = bucket_at(&sets, zeta)?;
    let groups = groups_at(&bucket, k, k - 1)?;
    let beta = comb.space.beta;
    let mut total = 0.0;
    for (_, members) in groups {
        let mut kernels = Vec::new();
        let mut weights = Vec::new();
        for &j in &members {
            let p = bucket.iter().find(|(i, _)| *i == j).expect("member in bucket").1;
            let u1 = p.derivative_modulus().re_f64();
            let uk = p.halfplane.derivative(k).to_c64();
            let w = num_complex::Complex64::new(u1 / 2.0, 0.0) - num_complex::Complex64::i() * a * uk;
            kernels.push(HalfPlaneKernel::new(w, beta)?);
            weights.push(comb.coeffs[j].to_c64().conj());
        }
        total += crate::numerics::kernel_combination_norm_sq(&kernels, &weights)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRho {
    pub zeta: Number,
    pub rho_sq: Number,
    pub derivative_modulus: Number,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    /// Lower bound certified (always, once the data hypotheses hold).
    pub lower: bool,
    /// `ρ(ζ) ≤ 1/2` at every contact point, certifying the upper form.
    pub upper: bool,
}

/// Two-sided estimate of `‖C_φ - C_ψ‖_e^2` on the Hardy space: at least
/// `lower`, at most `B·upper_quantity` for an unspecified absolute `B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifferenceBounds {
    pub lower: Number,
    pub upper_quantity: Number,
    pub hypotheses_met: Hypotheses,
    pub points: Vec<PointRho>,
}

fn same_contact_sets(a: &ContactSet, b: &ContactSet) -> Result<bool> {
    if a.points.len() != b.points.len() {
        return Ok(false);
    }
    for p in &a.points {
        if b.find(&p.zeta)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn max_real(xs: impl IntoIterator<Item = Number>) -> Number {
    xs.into_iter()
        .fold(None::<Number>, |acc, x| match acc {
            Some(a) if a.cmp_real(&x) != Ordering::Less => Some(a),
            _ => Some(x),
        })
        .unwrap_or_else(Number::zero)
}

pub fn difference_bounds(phi: &SelfMap, psi: &SelfMap, space: SpaceSpec) -> Result<DifferenceBounds> {
    if space.beta != 1.0 {
        return Err(Error::HypothesesNotMet("difference bounds hold on the Hardy space (beta = 1) only".into()));
    }
    let a = contacts_in_s(phi)?;
    let b = contacts_in_s(psi)?;
    if !same_contact_sets(&a, &b)? {
        return Err(Error::HypothesesNotMet("F(phi) != F(psi)".into()));
    }
    let mut points = Vec::new();
    for p in &a.points {
        let q = b.find(&p.zeta)?.expect("same contact sets");
        if p.order != q.order {
            return Err(Error::HypothesesNotMet(format!("orders of contact {} and {} differ at {}", p.order, q.order, p.zeta)));
        }
        if !data_equal(&p.data.truncate(p.order - 1), &q.data.truncate(p.order - 1))? {
            return Err(Error::HypothesesNotMet(format!("D_{} differs at {}", p.order - 1, p.zeta)));
        }
        let lim = rho_boundary_limit(phi, psi, &p.zeta)?;
        debug_assert!(matches!(lim.case, RhoCase::Agree | RhoCase::TopOrder));
        points.push(PointRho { zeta: p.zeta.clone(), rho_sq: lim.rho_sq, derivative_modulus: p.derivative_modulus().clone() });
    }
    let term = |pr: &PointRho| pr.rho_sq.checked_div(&pr.derivative_modulus).expect("positive");
    let lower = max_real(points.iter().map(term)).checked_div(&Number::int(4)).expect("nonzero");
    let fibers = crate::clark::fibers(&a)?;
    let mut sums = Vec::new();
    for (_, members) in &fibers {
        let mut s = Number::zero();
        for m in members {
            let pr = points.iter().find(|pr| pr.zeta == m.zeta).expect("point recorded");
            s = &s + &term(pr);
        }
        sums.push(s);
    }
    let upper_quantity = max_real(sums);
    let quarter = Number::frac(1, 4);
    let upper = points.iter().all(|pr| pr.rho_sq.cmp_real(&quarter) != Ordering::Greater);
    Ok(DifferenceBounds { lower, upper_quantity, hypotheses_met: Hypotheses { lower: true, upper }, points })
}

/// `C_φ - C_ψ` is compact on the Hardy space iff the contact sets, orders
/// and top-order data agree everywhere.
pub fn compact_difference_check(phi: &SelfMap, psi: &SelfMap) -> Result<bool> {
    let a = contacts_in_s(phi)?;
    let b = contacts_in_s(psi)?;
    matching_data(&a, &b, 0)
}

/// Contact sets equal, orders equal and `D_{2m-drop}` equal everywhere.
fn matching_data(a: &ContactSet, b: &ContactSet, drop: usize) -> Result<bool> {
    if !same_contact_sets(a, b)? {
        return Ok(false);
    }
    for p in &a.points {
        let q = b.find(&p.zeta)?.expect("same contact sets");
        if p.order != q.order {
            return Ok(false);
        }
        let k = p.order - drop;
        if !data_equal(&p.data.truncate(k), &q.data.truncate(k))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lower bounds on `‖C_φ - C_ψ‖_e^2` from a contact-order or data
/// mismatch at `ζ`; zero when neither obstruction is present.
pub fn cor58_lower_bounds(phi: &SelfMap, psi: &SelfMap, zeta: &Number, space: SpaceSpec) -> Result<Number> {
    let a = contacts_in_s(phi)?;
    let b = contacts_in_s(psi)?;
    let (Some(p), Some(q)) = (a.find(zeta)?, b.find(zeta)?) else {
        return Ok(Number::zero());
    };
    if !numbers_equal(one(p.boundary_value()), one(q.boundary_value()))? {
        return Ok(&abs_derivative_pow(p, space.beta).checked_inv().expect("nonzero")
            + &abs_derivative_pow(q, space.beta).checked_inv().expect("nonzero"));
    }
    match p.order.cmp(&q.order) {
        // only the map of higher order survives in 𝕄_k for k = 2n + 1
        Ordering::Greater => Ok(abs_derivative_pow(p, space.beta).checked_inv().expect("nonzero")),
        Ordering::Less => Ok(abs_derivative_pow(q, space.beta).checked_inv().expect("nonzero")),
        Ordering::Equal => {
            let k = p.order - 1;
            if data_equal(&p.data.truncate(k), &q.data.truncate(k))? {
                Ok(Number::zero())
            } else {
                Ok(&abs_derivative_pow(p, space.beta).checked_inv().expect("nonzero")
                    + &abs_derivative_pow(q, space.beta).checked_inv().expect("nonzero"))
            }
        }
    }
}

/// Linear-fractional map sharing second-order data with a map at one of
/// its contact points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OsculatingPart {
    pub zeta: Number,
    #[serde(skip)]
    pub lft: Lft,
}

/// `τ_α^{-1} ∘ u₀ ∘ τ_ζ` with `u₀(w) = a w/(1 + b w)`, `a = u'(0)`,
/// `b = -u''(0)/(2a)`.
pub fn osculating_lft(p: &ContactPoint) -> Result<Lft> {
    let a = p.halfplane.derivative(1).clone();
    let u2 = p.halfplane.derivative(2).clone();
    let b = (&u2 / &a.scale_int(-2)).clone();
    let u0 = Lft::new(a, Number::zero(), b, Number::one())?;
    let to_half = CayleyMap::new(p.zeta.clone())?.as_lft();
    let from_half = CayleyMap::new(p.boundary_value().clone())?.inverse_lft();
    Ok(from_half.compose(&u0).compose(&to_half))
}

pub fn osculating_decomposition(map: &SelfMap) -> Result<Vec<OsculatingPart>> {
    let cs = contacts_in_s(map)?;
    if let Some(p) = cs.points.iter().find(|p| p.order != 2) {
        return Err(Error::MapNotInS2(format!("order of contact {} at {}", p.order, p.zeta)));
    }
    let mut out = Vec::new();
    for p in &cs.points {
        let invalid = |reason: String| Error::OsculatingMapInvalid { zeta: p.zeta.to_string(), reason };
        let lft = osculating_lft(p)?;
        let as_map = SelfMap::Lft(lft.clone());
        let report = validate_self_map(&as_map).map_err(|e| invalid(e.to_string()))?;
        if !report.passed() || report.is_automorphism {
            return Err(invalid("not a non-automorphic self-map".into()));
        }
        let q = crate::boundary::extract_contact(&as_map, &p.zeta).map_err(|e| invalid(e.to_string()))?;
        if q.order != 2 || !data_equal(&q.data, &p.data)? {
            return Err(invalid(format!("second-order data {:?} do not match", q.data.entries)));
        }
        out.push(OsculatingPart { zeta: p.zeta.clone(), lft });
    }
    Ok(out)
}

/// `C_φ` and `C_ψ` lie in the same component of the space of composition
/// operators on the Hardy space iff contact sets, orders and `D_{2m-1}`
/// agree everywhere. Only decided inside `𝒮₀`.
pub fn connectedness_check(phi: &SelfMap, psi: &SelfMap) -> Result<bool> {
    let a = contacts_in_s(phi)?;
    let b = contacts_in_s(psi)?;
    for (name, cs) in [("phi", &a), ("psi", &b)] {
        if !cs.map_class.in_s0 {
            return Err(Error::MapNotInS0(name.into()));
        }
    }
    matching_data(&a, &b, 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumDecompositionReport {
    pub holds: bool,
    pub verdict: CompactnessVerdict,
    /// Failures of the necessary conditions: parts touching a common point,
    /// or contact sets whose union is not that of the whole map.
    pub violations: Vec<String>,
}

/// Whether `C_φ ≡ Σ C_{φ_i}` modulo compact operators.
pub fn sum_decomposition_check(phi: &SelfMap, parts: &[SelfMap]) -> Result<SumDecompositionReport> {
    let mut maps = vec![phi.clone()];
    maps.extend(parts.iter().cloned());
    let sets = contact_sets(&maps)?;
    let engine = RelationEngine::from_contacts(&sets)?;
    let mut coeffs = vec![Number::int(-1); maps.len()];
    coeffs[0] = Number::one();
    let verdict = engine.decide(&coeffs)?;
    let mut violations = Vec::new();
    for i in 1..sets.len() {
        for j in i + 1..sets.len() {
            for p in &sets[i].points {
                if sets[j].find(&p.zeta)?.is_some() {
                    violations.push(format!("parts {} and {} both touch {}", i - 1, j - 1, p.zeta));
                }
            }
        }
    }
    for p in &sets[0].points {
        if !sets[1..].iter().any(|cs| matches!(cs.find(&p.zeta), Ok(Some(_)))) {
            violations.push(format!("no part touches {}", p.zeta));
        }
    }
    for (i, cs) in sets[1..].iter().enumerate() {
        for p in &cs.points {
            if sets[0].find(&p.zeta)?.is_none() {
                violations.push(format!("part {i} touches {} outside F(phi)", p.zeta));
            }
        }
    }
    for v in &verdict.first_order_violations {
        violations.push(format!("first-order group at {} with d = {:?} has sum {}", v.zeta, v.d.entries, v.sum));
    }
    Ok(SumDecompositionReport { holds: verdict.compact, verdict, violations })
}

/// Exact rational entries of a relation vector, for reports.
pub fn rational_strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(|q| GaussianRational::from_real(q.clone()).to_string()).collect()
}
