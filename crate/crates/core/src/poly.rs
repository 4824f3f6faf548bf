//! Dense univariate polynomials over [`Number`], ascending coefficients.

use num_complex::Complex64;

use crate::number::{Mode, Number};
use crate::series::Series;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<Number>,
}

impl Poly {
    /// Builds a polynomial and trims trailing zeros.
    pub fn new(coeffs: Vec<Number>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: Number) -> Self {
        Poly::new(vec![c])
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Number::one())
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Poly::new(vec![Number::zero(), Number::one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Number] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Number {
        self.coeffs.get(k).cloned().unwrap_or_else(Number::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `deg 0 = 0` by convention.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn mode(&self) -> Mode {
        crate::number::joint_mode(&self.coeffs)
    }

    pub fn to_float(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(Number::to_float).collect() }
    }

    pub fn c64_coeffs(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Number::to_c64).collect()
    }

    pub fn eval(&self, z: &Number) -> Number {
        let mut acc = Number::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }

    pub fn scale(&self, s: &Number) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Number::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, k: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale_int(k as i64))
                .collect(),
        )
    }

    /// `z^n · conj(P)(1/z)` with `n` the padded degree; on the unit circle
    /// this equals `z^n · conj(P(z))`.
    pub fn conj_reversed(&self, n: usize) -> Poly {
        let mut out = vec![Number::zero(); n + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[n - k] = c.conj();
        }
        Poly::new(out)
    }

    /// Taylor coefficients of `P(z0 + h)` in `h`, truncated after `h^depth`.
    pub fn jet_at(&self, z0: &Number, depth: usize) -> Series {
        // repeated synthetic division yields the shifted coefficients
        let mut work: Vec<Number> = self.coeffs.clone();
        let mut out = Vec::with_capacity(depth + 1);
        for _ in 0..=depth {
            if work.is_empty() {
                out.push(Number::zero());
                continue;
            }
            let mut acc = Number::zero();
            let mut quotient = vec![Number::zero(); work.len().saturating_sub(1)];
            for k in (0..work.len()).rev() {
                acc = &(&acc * z0) + &work[k];
                if k > 0 {
                    quotient[k - 1] = acc.clone();
                }
            }
            out.push(acc);
            work = quotient;
        }
        Series::new(out)
    }

    /// Division with remainder; `None` if `d` is zero.
    pub fn div_rem(&self, d: &Poly) -> Option<(Poly, Poly)> {
        let lead = d.coeffs.last()?.checked_inv()?;
        let mut rem = self.coeffs.clone();
        let dn = d.coeffs.len();
        if rem.len() < dn {
            return Some((Poly::zero(), self.clone()));
        }
        let mut quot = vec![Number::zero(); rem.len() - dn + 1];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dn - 1] * &lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] = &rem[k + j] - &(&c * dc);
                }
            }
            // the leading slot is zero by construction; pin it exactly
            rem[k + dn - 1] = Number::zero();
            quot[k] = c;
        }
        Some((Poly::new(quot), Poly::new(rem)))
    }

    /// Monic gcd over the Gaussian rationals. Only meaningful in exact mode.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        match a.coeffs.last().and_then(Number::checked_inv) {
            Some(inv) => a.scale(&inv),
            None => Poly::one(),
        }
    }

    /// All complex roots by the Aberth–Ehrlich iteration, polished by Newton.
    pub fn roots(&self) -> Vec<Complex64> {
        roots_c64(&self.c64_coeffs())
    }
}

/// Horner evaluation of ascending coefficients.
pub fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Value and first derivative by Horner.
pub fn horner_d(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

pub fn roots_c64(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    // Cauchy bound for the initial circle
    let bound = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let radius = bound.min(
        monic[..n]
            .iter()
            .enumerate()
            .map(|(k, x)| x.norm().powf(1.0 / (n - k) as f64))
            .fold(0.0, f64::max)
            * 2.0,
    );
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner_d(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_d(&monic, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    z
}
