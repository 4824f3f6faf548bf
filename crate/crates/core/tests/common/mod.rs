//! Map families and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use calkin_core::exact::GaussianRational;
use calkin_core::selfmap::{CayleyMap, Lft};
use calkin_core::{Number, SelfMap};
use rand::Rng;

pub fn n(s: &str) -> Number {
    Number::parse(s).unwrap()
}

pub fn gauss(a: i64, b: i64, c: i64, d: i64) -> Number {
    Number::Exact(GaussianRational::from_fracs(a, b, c, d))
}

/// Exact points of the unit circle.
pub fn circle_points() -> Vec<Number> {
    vec![n("1"), n("-1"), n("i"), n("-i"), gauss(3, 5, 4, 5), gauss(5, 13, -12, 13), gauss(-8, 17, 15, 17)]
}

/// Half-plane parameters of `u(w) = a w/(1 + b w)`: `a > 0` and `Im b < 0`
/// make `u` a self-map of the upper half-plane touching the boundary only
/// at `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LftParams {
    pub zeta: Number,
    pub alpha: Number,
    pub a: Number,
    pub b: Number,
}

impl LftParams {
    pub fn lft(&self) -> Lft {
        let u = Lft::new(self.a.clone(), Number::zero(), self.b.clone(), Number::one()).unwrap();
        let out = CayleyMap::new(self.alpha.clone()).unwrap().inverse_lft();
        let into = CayleyMap::new(self.zeta.clone()).unwrap().as_lft();
        out.compose(&u).compose(&into)
    }

    pub fn map(&self) -> SelfMap {
        SelfMap::Lft(self.lft())
    }
}

/// `(φ(ζ), φ'(ζ), φ''(ζ))` from the closed-form derivatives of
/// `(Az + B)/(Cz + D)`.
pub fn lft_d2(l: &Lft, zeta: &Number) -> [Number; 3] {
    let den = &(&l.c * zeta) + &l.d;
    let det = &(&l.a * &l.d) - &(&l.b * &l.c);
    let v0 = &(&(&l.a * zeta) + &l.b) / &den;
    let v1 = &det / &(&den * &den);
    let v2 = &(&l.c * &det).scale_int(-2) / &(&(&den * &den) * &den);
    [v0, v1, v2]
}

/// A random family of at most six maps in the linear-fractional class,
/// drawn from a small palette so that boundary data often coincide.
pub fn random_lft_family<R: Rng>(rng: &mut R) -> Vec<LftParams> {
    let points = circle_points();
    let zetas: Vec<Number> = (0..2).map(|_| points[rng.gen_range(0..points.len())].clone()).collect();
    let alphas: Vec<Number> = (0..2).map(|_| points[rng.gen_range(0..points.len())].clone()).collect();
    let a_choices = [n("1"), n("2"), n("1/2")];
    let b_choices = [n("-i"), n("-2i"), n("1-i"), gauss(-1, 3, -1, 2)];
    let palette: Vec<LftParams> = (0..rng.gen_range(2..=4))
        .map(|_| LftParams {
            zeta: zetas[rng.gen_range(0..2)].clone(),
            alpha: alphas[rng.gen_range(0..2)].clone(),
            a: a_choices[rng.gen_range(0..a_choices.len())].clone(),
            b: b_choices[rng.gen_range(0..b_choices.len())].clone(),
        })
        .collect();
    (0..rng.gen_range(1..=6)).map(|_| palette[rng.gen_range(0..palette.len())].clone()).collect()
}

/// Group indicators computed directly from the construction parameters.
pub fn oracle_groups(family: &[LftParams]) -> Vec<Vec<usize>> {
    let mut keys: Vec<(Number, [Number; 3])> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (j, p) in family.iter().enumerate() {
        let key = (p.zeta.clone(), lft_d2(&p.lft(), &p.zeta));
        match keys.iter().position(|k| *k == key) {
            Some(g) => groups[g].push(j),
            None => {
                keys.push(key);
                groups.push(vec![j]);
            }
        }
    }
    groups
}

pub fn oracle_compact(groups: &[Vec<usize>], coeffs: &[Number]) -> bool {
    groups.iter().all(|g| g.iter().map(|&j| coeffs[j].clone()).sum::<Number>().is_zero())
}

pub fn random_gauss<R: Rng>(rng: &mut R) -> Number {
    gauss(rng.gen_range(-4..=4), rng.gen_range(1..=3), rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

/// Half random, half forced into the compact cone by zeroing every group sum.
pub fn random_coeffs<R: Rng>(rng: &mut R, groups: &[Vec<usize>], len: usize, force_compact: bool) -> Vec<Number> {
    let mut c: Vec<Number> = (0..len)
        .map(|_| if rng.gen_bool(0.5) { Number::int(rng.gen_range(-3..=3)) } else { random_gauss(rng) })
        .collect();
    if force_compact {
        for g in groups {
            let (last, rest) = g.split_last().unwrap();
            let s: Number = rest.iter().map(|&j| c[j].clone()).sum();
            c[*last] = -&s;
        }
    }
    c
}

/// `φ = τ_1^{-1} ∘ u ∘ τ_1` with `u(w) = 2w/(1 - i s w)`: equal first-order
/// data at `1` and `u''(0) = 4is`.
pub fn equal_d1_pair() -> (SelfMap, SelfMap) {
    (SelfMap::lft_ints(11, -3, -5, 13), SelfMap::lft_ints(5, -1, -3, 7))
}

pub fn phi2() -> SelfMap {
    SelfMap::lft_ints(1, 0, -1, 2)
}

pub fn phi3() -> SelfMap {
    SelfMap::lft_ints(1, 0, -2, 3)
}

pub fn z2() -> SelfMap {
    SelfMap::rational_ints(&[0, 0, 1], &[2, 0, -1])
}
