//! Truncated formal power series: dense polynomials in `N` spatial
//! variables ([`MultiPoly`]) and series in `t` with such coefficients
//! ([`TimeSeries`]).
//!
//! Truncation is explicit. Moment derivatives shrink the degree caps,
//! the moment antiderivative grows the `t` order, and nothing is ever
//! zero-padded behind the caller's back.

mod time;

pub use time::TimeSeries;

use crate::error::{Error, Result};
use crate::sequences::MomentSequence;
use std::fmt;

/// A multi-index `α ∈ ℕ₀^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// The unit vector `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = α_1 + ⋯ + α_N`
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl From<&[usize]> for MultiIndex {
    fn from(v: &[usize]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Iterates all `α` with `α_i ≤ caps_i` in row-major order (last axis
/// fastest).
pub fn indices(caps: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = caps.iter().map(|c| c + 1).product();
    let mut cur = vec![0usize; caps.len()];
    (0..total).map(move |k| {
        if k > 0 {
            for axis in (0..caps.len()).rev() {
                if cur[axis] < caps[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = 0;
            }
        }
        cur.clone()
    })
}

/// A real polynomial in `N` variables, dense over the box
/// `0 ≤ α_i ≤ caps_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    caps: Vec<usize>,
    strides: Vec<usize>,
    coeffs: Vec<f64>,
}

fn strides_for(caps: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; caps.len()];
    for axis in (0..caps.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * (caps[axis + 1] + 1);
    }
    strides
}

impl MultiPoly {
    pub fn zeros(caps: &[usize]) -> Self {
        let len = caps.iter().map(|c| c + 1).product();
        Self {
            caps: caps.to_vec(),
            strides: strides_for(caps),
            coeffs: vec![0.0; len],
        }
    }

    pub fn constant(caps: &[usize], c: f64) -> Self {
        let mut p = Self::zeros(caps);
        p.coeffs[0] = c;
        p
    }

    pub fn from_fn(caps: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let coeffs = indices(caps).map(|a| f(&a)).collect();
        Self {
            caps: caps.to_vec(),
            strides: strides_for(caps),
            coeffs,
        }
    }

    /// One-variable polynomial from its coefficient list.
    pub fn univariate(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty(), "need at least the constant coefficient");
        Self {
            caps: vec![coeffs.len() - 1],
            strides: vec![1],
            coeffs: coeffs.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.caps.len()
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn slot(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.caps.len() {
            return None;
        }
        let mut k = 0;
        for ((&a, &c), &s) in alpha.iter().zip(&self.caps).zip(&self.strides) {
            if a > c {
                return None;
            }
            k += a * s;
        }
        Some(k)
    }

    /// Coefficient of `z^α`, or `None` outside the stored box.
    pub fn get(&self, alpha: &[usize]) -> Option<f64> {
        self.slot(alpha).map(|k| self.coeffs[k])
    }

    pub fn set(&mut self, alpha: &[usize], value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Overflow {
                context: format!("coefficient at {}", MultiIndex::from(alpha)),
            });
        }
        let k = self.slot(alpha).ok_or_else(|| {
            Error::ShapeMismatch(format!(
                "index {} outside caps {:?}",
                MultiIndex::from(alpha),
                self.caps
            ))
        })?;
        self.coeffs[k] = value;
        Ok(())
    }

    /// `(α, f_α)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        indices(&self.caps).zip(self.coeffs.iter().copied())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Keeps the coefficients with `α_i ≤ caps_i`.
    pub fn restrict(&self, caps: &[usize]) -> Result<Self> {
        if caps.len() != self.dim() || caps.iter().zip(&self.caps).any(|(a, b)| a > b) {
            return Err(Error::ShapeMismatch(format!(
                "cannot restrict caps {:?} to {:?}",
                self.caps, caps
            )));
        }
        Ok(Self::from_fn(caps, |a| self.get(a).unwrap()))
    }

    fn common_caps(&self, other: &Self) -> Result<Vec<usize>> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch(format!(
                "dimension {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .caps
            .iter()
            .zip(&other.caps)
            .map(|(a, b)| *a.min(b))
            .collect())
    }

    /// `a·self + b·other` on the common (smaller) box.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        let caps = self.common_caps(other)?;
        Ok(Self::from_fn(&caps, |al| {
            a * self.get(al).unwrap() + b * other.get(al).unwrap()
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            caps: self.caps.clone(),
            strides: self.strides.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// `self += c·other` where `other`'s box contains `self`'s.
    pub fn add_scaled_assign(&mut self, c: f64, other: &Self) -> Result<()> {
        if other.dim() != self.dim() || self.caps.iter().zip(&other.caps).any(|(a, b)| a > b) {
            return Err(Error::ShapeMismatch(format!(
                "caps {:?} do not cover {:?}",
                other.caps, self.caps
            )));
        }
        if other.caps == self.caps {
            for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *x += c * y;
            }
        } else {
            for (k, a) in indices(&self.caps.clone()).enumerate() {
                self.coeffs[k] += c * other.get(&a).unwrap();
            }
        }
        Ok(())
    }

    /// Horner evaluation, axis by axis.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "point of dimension {} for a polynomial in {} variables",
                z.len(),
                self.dim()
            )));
        }
        let v = self.horner(0, 0, z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow {
                context: "polynomial evaluation".into(),
            })
        }
    }

    fn horner(&self, axis: usize, offset: usize, z: &[f64]) -> f64 {
        if axis == self.dim() {
            return self.coeffs[offset];
        }
        let mut acc = 0.0;
        for a in (0..=self.caps[axis]).rev() {
            acc = acc * z[axis] + self.horner(axis + 1, offset + a * self.strides[axis], z);
        }
        acc
    }

    /// `Σ_α |f_α| r^{|α|}`, an upper bound for `sup_{|z_i| ≤ r} |f(z)|`.
    pub fn coefficient_norm(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be >= 0, got {r}")));
        }
        let mut total = 0.0;
        for (alpha, c) in self.iter() {
            if c != 0.0 {
                let k: usize = alpha.iter().sum();
                total += c.abs() * r.powi(k as i32);
            }
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::Overflow {
                context: format!("coefficient norm at radius {r}"),
            })
        }
    }

    /// `∂_{m,z_axis}^times`: `a'_n = a_{n+times} m(n+times)/m(n)` along the
    /// axis; the axis cap drops by `times`.
    pub fn moment_derivative_axis(
        &self,
        seq: &MomentSequence,
        axis: usize,
        times: usize,
    ) -> Result<Self> {
        if axis >= self.dim() {
            return Err(Error::InvalidParameter(format!(
                "axis {axis} for a polynomial in {} variables",
                self.dim()
            )));
        }
        if times == 0 {
            return Ok(self.clone());
        }
        let cap = self.caps[axis];
        if times > cap {
            return Err(Error::TruncationExhausted {
                axis,
                cap,
                requested: times,
            });
        }
        if seq.n_cap() < cap {
            return Err(Error::IndexBeyondCap {
                index: cap,
                cap: seq.n_cap(),
            });
        }
        let ratios: Vec<Option<f64>> = (0..=cap - times)
            .map(|n| seq.span_ratio(n, times).ok())
            .collect();
        let mut caps = self.caps.clone();
        caps[axis] -= times;
        let mut out = Self::zeros(&caps);
        let mut src = vec![0; self.dim()];
        for (k, alpha) in indices(&caps).enumerate() {
            src.copy_from_slice(&alpha);
            src[axis] += times;
            let a = self.coeffs[self.slot(&src).unwrap()];
            if a == 0.0 {
                continue;
            }
            let v = ratios[alpha[axis]].map(|r| a * r).filter(|v| v.is_finite());
            out.coeffs[k] = v.ok_or_else(|| Error::Overflow {
                context: format!(
                    "moment derivative along axis {axis} at {}",
                    MultiIndex::from(alpha.as_slice())
                ),
            })?;
        }
        Ok(out)
    }

    /// `∂^α_{m,z} = ∂^{α_1}_{m_1,z_1} ⋯ ∂^{α_N}_{m_N,z_N}`.
    pub fn moment_derivative_multi(&self, seqs: &[MomentSequence], alpha: &[usize]) -> Result<Self> {
        if seqs.len() != self.dim() || alpha.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} sequences and |alpha|={} for dimension {}",
                seqs.len(),
                alpha.len(),
                self.dim()
            )));
        }
        let mut out = self.clone();
        for (axis, (&a, seq)) in alpha.iter().zip(seqs).enumerate() {
            out = out.moment_derivative_axis(seq, axis, a)?;
        }
        Ok(out)
    }

    /// `|f_α| ≤ g_α` for every stored `α`, with `g = self`.
    pub fn majorizes(&self, f: &Self) -> Result<bool> {
        if self.caps != f.caps {
            return Err(Error::ShapeMismatch(format!(
                "majorant caps {:?} vs {:?}",
                self.caps, f.caps
            )));
        }
        if let Some(bad) = self.coeffs.iter().position(|&g| g < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "majorant has a negative coefficient at slot {bad}"
            )));
        }
        Ok(self.coeffs.iter().zip(&f.coeffs).all(|(g, x)| x.abs() <= *g))
    }

    /// Product kept on the box `caps`; a nonzero product coefficient
    /// outside the box is an error rather than a silent drop.
    pub fn mul_truncated(&self, other: &Self, caps: &[usize]) -> Result<Self> {
        if self.dim() != other.dim() || caps.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "product of dimensions {} and {} into {}",
                self.dim(),
                other.dim(),
                caps.len()
            )));
        }
        let mut out = Self::zeros(caps);
        let rhs: Vec<(Vec<usize>, f64)> = other.iter().filter(|(_, c)| *c != 0.0).collect();
        let mut sum = vec![0; self.dim()];
        for (a, x) in self.iter().filter(|(_, c)| *c != 0.0) {
            for (b, y) in &rhs {
                for (axis, s) in sum.iter_mut().enumerate() {
                    *s = a[axis] + b[axis];
                }
                match out.slot(&sum) {
                    Some(k) => out.coeffs[k] += x * y,
                    None => {
                        let axis = (0..caps.len()).find(|&i| sum[i] > caps[i]).unwrap();
                        return Err(Error::TruncationExhausted {
                            axis,
                            cap: caps[axis],
                            requested: sum[axis],
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Smallest box holding every nonzero coefficient (all zeros for the
    /// zero polynomial).
    pub fn support_caps(&self) -> Vec<usize> {
        let mut caps = vec![0; self.dim()];
        for (a, c) in self.iter() {
            if c != 0.0 {
                for (m, x) in caps.iter_mut().zip(&a) {
                    *m = (*m).max(*x);
                }
            }
        }
        caps
    }

    /// `C Σ_α (D z)^α` truncated to `caps`.
    pub fn geometric(caps: &[usize], c: f64, d: f64) -> Self {
        Self::from_fn(caps, |a| c * d.powi(a.iter().sum::<usize>() as i32))
    }
}
