//! Truncated power series, used as jets: `s[k]` is the `k`-th Taylor
//! coefficient, so `f^(k)(z0) = k! · s[k]`.

use crate::number::{Mode, Number};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    coeffs: Vec<Number>,
}

impl Series {
    pub fn new(coeffs: Vec<Number>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        Series { coeffs }
    }

    pub fn constant(c: Number, depth: usize) -> Self {
        let mut v = vec![Number::zero(); depth + 1];
        v[0] = c;
        Series::new(v)
    }

    /// The identity jet `z0 + h`.
    pub fn variable(z0: Number, depth: usize) -> Self {
        let mut v = vec![Number::zero(); depth + 1];
        v[0] = z0;
        if depth >= 1 {
            v[1] = Number::one();
        }
        Series::new(v)
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Number] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Number {
        &self.coeffs[k]
    }

    pub fn mode(&self) -> Mode {
        crate::number::joint_mode(&self.coeffs)
    }

    pub fn truncate(&self, depth: usize) -> Series {
        Series::new(self.coeffs[..=depth.min(self.depth())].to_vec())
    }

    /// `k!·s[k]` for `k = 0..=depth`.
    pub fn derivatives(&self) -> Vec<Number> {
        let mut fact = Number::one();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact = fact.scale_int(k as i64);
                }
                c * &fact
            })
            .collect()
    }

    pub fn add(&self, o: &Series) -> Series {
        let d = self.depth().min(o.depth());
        Series::new((0..=d).map(|k| &self.coeffs[k] + &o.coeffs[k]).collect())
    }

    pub fn sub(&self, o: &Series) -> Series {
        let d = self.depth().min(o.depth());
        Series::new((0..=d).map(|k| &self.coeffs[k] - &o.coeffs[k]).collect())
    }

    pub fn scale(&self, s: &Number) -> Series {
        Series::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Series) -> Series {
        let d = self.depth().min(o.depth());
        let out = (0..=d)
            .map(|k| (0..=k).map(|j| &self.coeffs[j] * &o.coeffs[k - j]).sum())
            .collect();
        Series::new(out)
    }

    /// `self / o`; `None` when the constant term of `o` vanishes.
    pub fn div(&self, o: &Series) -> Option<Series> {
        let d = self.depth().min(o.depth());
        let inv0 = o.coeffs[0].checked_inv()?;
        let mut q: Vec<Number> = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc = &acc - &(&o.coeffs[j] * &q[k - j]);
            }
            q.push(&acc * &inv0);
        }
        Some(Series::new(q))
    }

    /// `self ∘ inner`, where `self` is a jet in `h` and `inner` supplies
    /// `h` as a series with zero constant term.
    pub fn compose(&self, inner: &Series) -> Series {
        assert!(inner.coeffs[0].is_zero(), "inner series must vanish at the origin");
        let d = self.depth().min(inner.depth());
        let mut acc = Series::constant(self.coeffs[d].clone(), d);
        for k in (0..d).rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] = &acc.coeffs[0] + &self.coeffs[k];
        }
        acc
    }

    /// `self` with its constant term removed, ready to be used as `inner`.
    pub fn centered(&self) -> Series {
        let mut c = self.coeffs.clone();
        c[0] = Number::zero();
        Series::new(c)
    }
}
