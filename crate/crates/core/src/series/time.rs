use super::MultiPoly;
use crate::error::{Error, Result};
use crate::sequences::MomentSequence;

/// `û(t, z) = Σ_{n ≤ N_t} u_n(z) tⁿ`.
///
/// Each `u_n` keeps its own degree caps: spatial derivatives inside a
/// recursion consume caps unevenly across orders, and storing the actual
/// box per order keeps the truncation visible.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    coeffs: Vec<MultiPoly>,
}

impl TimeSeries {
    pub fn new(coeffs: Vec<MultiPoly>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::ShapeMismatch("a time series needs u_0".into()));
        };
        let dim = first.dim();
        if let Some(n) = coeffs.iter().position(|c| c.dim() != dim) {
            return Err(Error::ShapeMismatch(format!(
                "u_{n} has dimension {} but u_0 has {dim}",
                coeffs[n].dim()
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(n_t: usize, caps: &[usize]) -> Self {
        Self {
            coeffs: vec![MultiPoly::zeros(caps); n_t + 1],
        }
    }

    /// Series that does not depend on `t` beyond the constant term.
    pub fn from_constant_term(u0: MultiPoly, n_t: usize) -> Self {
        let caps = u0.caps().to_vec();
        let mut coeffs = vec![MultiPoly::zeros(&caps); n_t + 1];
        coeffs[0] = u0;
        Self { coeffs }
    }

    /// Truncation order `N_t`.
    pub fn n_t(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    pub fn coeff(&self, n: usize) -> Option<&MultiPoly> {
        self.coeffs.get(n)
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<MultiPoly> {
        self.coeffs
    }

    pub fn push(&mut self, u: MultiPoly) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "pushing dimension {} onto a series of dimension {}",
                u.dim(),
                self.dim()
            )));
        }
        self.coeffs.push(u);
        Ok(())
    }

    /// `∂^times_{m0,t}`: `u'_n = u_{n+times} m0(n+times)/m0(n)`.
    pub fn moment_derivative_t(&self, m0: &MomentSequence, times: usize) -> Result<Self> {
        if times > self.n_t() {
            return Err(Error::TruncationExhausted {
                axis: usize::MAX,
                cap: self.n_t(),
                requested: times,
            });
        }
        let coeffs = (0..=self.n_t() - times)
            .map(|n| {
                let r = m0.span_ratio(n, times)?;
                Ok(self.coeffs[n + times].scale(r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coeffs })
    }

    /// Applies a spatial moment derivative to every `u_n`.
    pub fn moment_derivative_axis(
        &self,
        seq: &MomentSequence,
        axis: usize,
        times: usize,
    ) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|u| u.moment_derivative_axis(seq, axis, times))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coeffs })
    }

    pub fn moment_derivative_multi(&self, seqs: &[MomentSequence], alpha: &[usize]) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|u| u.moment_derivative_multi(seqs, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coeffs })
    }

    /// Right inverse of `∂_{m0,t}` with zero constant term:
    /// `(∂⁻¹f)_{n+1} = f_n m0(n)/m0(n+1)`. The order grows by one and may
    /// not exceed `max_order`.
    pub fn moment_antiderivative_t(&self, m0: &MomentSequence, max_order: usize) -> Result<Self> {
        let n_t = self.n_t() + 1;
        if n_t > max_order {
            return Err(Error::IndexBeyondCap {
                index: n_t,
                cap: max_order,
            });
        }
        let mut coeffs = Vec::with_capacity(n_t + 1);
        coeffs.push(MultiPoly::zeros(self.coeffs[0].caps()));
        for (n, f) in self.coeffs.iter().enumerate() {
            let r = m0.span_ratio(n, 1)?;
            coeffs.push(f.scale(1.0 / r));
        }
        Ok(Self { coeffs })
    }

    /// `self ≪` check against a non-negative majorant of the same shape.
    pub fn majorizes(&self, f: &Self) -> Result<bool> {
        if self.n_t() != f.n_t() {
            return Err(Error::ShapeMismatch(format!(
                "majorant order {} vs {}",
                self.n_t(),
                f.n_t()
            )));
        }
        for (g, x) in self.coeffs.iter().zip(&f.coeffs) {
            if !g.majorizes(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `Σ_n u_n(z) tⁿ`.
    pub fn eval(&self, t: f64, z: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for u in self.coeffs.iter().rev() {
            acc = acc * t + u.eval(z)?;
        }
        Ok(acc)
    }
}
