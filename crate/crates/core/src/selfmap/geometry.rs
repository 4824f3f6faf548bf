//! Hyperbolic geometry on the disk and the upper half-plane, Cayley
//! transfers, and the weighted space parameter.

use num_complex::Complex64;
use serde::Serialize;

use super::Lft;
use crate::error::{Error, Result};
use crate::number::Number;

/// The space with kernel `(1 - conj(w) z)^(-beta)`; `beta = 1` is the Hardy
/// space, `beta > 1` a weighted Bergman space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpaceSpec {
    pub beta: f64,
}

impl SpaceSpec {
    pub fn new(beta: f64) -> Result<SpaceSpec> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite and >= 1, got {beta}")));
        }
        Ok(SpaceSpec { beta })
    }

    pub fn hardy() -> SpaceSpec {
        SpaceSpec { beta: 1.0 }
    }

    /// `‖z^n‖^2 = n! Γ(β) / Γ(n + β)`, by the product of `k / (k - 1 + β)`.
    pub fn monomial_norm_sq(&self, n: usize) -> f64 {
        self.log_monomial_norm_sq(n).exp()
    }

    pub fn log_monomial_norm_sq(&self, n: usize) -> f64 {
        (1..=n).map(|k| (k as f64 / (k as f64 - 1.0 + self.beta)).ln()).sum()
    }

    /// Logarithms of `‖z^n‖` for `n < count`.
    pub fn log_monomial_norms(&self, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut acc = 0.0;
        for n in 0..count {
            if n > 0 {
                acc += 0.5 * (n as f64 / (n as f64 - 1.0 + self.beta)).ln();
            }
            out.push(acc);
        }
        out
    }
}

/// `|(p - q)/(1 - conj(p) q)|` on the closed disk.
pub fn pseudo_hyperbolic_disk(p: Complex64, q: Complex64) -> Result<f64> {
    if p.norm() > 1.0 + 1e-15 || q.norm() > 1.0 + 1e-15 {
        return Err(Error::InvalidArgument(format!("points must lie in the closed disk: {p}, {q}")));
    }
    let den = (Complex64::new(1.0, 0.0) - p.conj() * q).norm();
    let num = (p - q).norm();
    if den == 0.0 {
        return Err(Error::Indeterminate(format!("coincident boundary points {p}; use the boundary limit")));
    }
    Ok((num / den).min(1.0))
}

/// Exact square `|p - q|^2 / |1 - conj(p) q|^2`.
pub fn pseudo_hyperbolic_disk_sq(p: &Number, q: &Number) -> Result<Number> {
    let den = (&Number::one() - &(&p.conj() * q)).norm_sqr();
    if den.is_zero() {
        return Err(Error::Indeterminate(format!("coincident boundary points {p}; use the boundary limit")));
    }
    Ok(&(p - q).norm_sqr() / &den)
}

/// `Λ(p, q) = |(p - q)/(p - conj(q))|` on the upper half-plane.
pub fn pseudo_hyperbolic_halfplane(p: Complex64, q: Complex64) -> Result<f64> {
    for z in [p, q] {
        if !(z.im > 0.0) {
            return Err(Error::ArgumentNotInUpperHalfPlane(z.to_string()));
        }
    }
    Ok((p - q).norm() / (p - q.conj()).norm())
}

/// Exact `Λ(p, q)^2`.
pub fn pseudo_hyperbolic_halfplane_sq(p: &Number, q: &Number) -> Result<Number> {
    for z in [p, q] {
        if z.im().cmp_real(&Number::zero()) != std::cmp::Ordering::Greater {
            return Err(Error::ArgumentNotInUpperHalfPlane(z.to_string()));
        }
    }
    Ok(&(p - q).norm_sqr() / &(p - &q.conj()).norm_sqr())
}

/// `τ_α(z) = i(α - z)/(α + z)`, carrying `α` to `0` and the disk onto the
/// upper half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct CayleyMap {
    alpha: Number,
}

impl CayleyMap {
    pub fn new(alpha: Number) -> Result<CayleyMap> {
        let ok = match &alpha {
            Number::Exact(q) => q.norm_sqr() == num_rational::BigRational::from_integer(1.into()),
            Number::Float(z) => (z.norm() - 1.0).abs() <= 1e-14,
        };
        if !ok {
            return Err(Error::InvalidArgument(format!("base point {alpha} is not unimodular")));
        }
        Ok(CayleyMap { alpha })
    }

    pub fn alpha(&self) -> &Number {
        &self.alpha
    }

    pub fn as_lft(&self) -> Lft {
        let i = Number::i();
        Lft::new(-&i, &i * &self.alpha, Number::one(), self.alpha.clone()).expect("invertible")
    }

    /// `w ↦ α(i - w)/(i + w)`.
    pub fn inverse_lft(&self) -> Lft {
        let i = Number::i();
        Lft::new(-&self.alpha, &self.alpha * &i, Number::one(), i).expect("invertible")
    }

    pub fn apply(&self, z: &Number) -> Result<Number> {
        self.as_lft().eval(z)
    }

    pub fn inverse(&self, w: &Number) -> Result<Number> {
        self.inverse_lft().eval(w)
    }
}
