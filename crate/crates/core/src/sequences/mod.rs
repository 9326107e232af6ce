//! Moment sequences `m(n)` and finite-range checks of their structural
//! properties.
//!
//! Every sequence is stored in natural-log space. Linear values are only
//! materialized on request, with explicit overflow detection, because
//! `Γ(1 + s n)` leaves the `f64` range long before the caps used here.

mod lemmas;
mod witness;

pub use lemmas::{verify_lemma_suite, LemmaOutcome, LemmaReport, LemmaStatus, SequenceLemma};
pub use witness::{
    check_lc, mg_witness, order_witness, regularity_witness, star_witness, OrderWitness,
    Property, PropertyWitness, WitnessKind,
};

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Default number of precomputed terms (indices `0..=DEFAULT_N_CAP`).
pub const DEFAULT_N_CAP: usize = 64;

/// Absolute slack used by every log-space inequality check.
pub const LOG_EPS: f64 = 1e-12;

/// Largest `x` with `exp(x)` finite.
const LN_F64_MAX: f64 = 709.782712893384;

/// The family a moment sequence is drawn from, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `n!`
    Factorial,
    /// `Γ(1 + s n)`
    Gevrey { s: f64 },
    /// `Γ(1 + s n) · ∏_{j=0}^{n} log^p(e + j)`
    GevreyLog { s: f64, p: f64 },
    /// `[n]_q! = [1]_q [2]_q ⋯ [n]_q` with `[k]_q = (1 - q^k)/(1 - q)`
    QFactorial { q: f64 },
    /// `n!` for even `n`, `(n-1)!` for odd `n`
    ParityFactorial,
    /// user-supplied positive values
    Table { values: Vec<f64> },
}

impl Family {
    /// Short tag used in files and on the command line.
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Factorial => "factorial",
            Family::Gevrey { .. } => "gevrey",
            Family::GevreyLog { .. } => "gevrey_log",
            Family::QFactorial { .. } => "q_factorial",
            Family::ParityFactorial => "parity_factorial",
            Family::Table { .. } => "table",
        }
    }

    fn validate(&self, n_cap: usize) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        match self {
            Family::Factorial | Family::ParityFactorial => Ok(()),
            Family::Gevrey { s } => positive("s", *s),
            Family::GevreyLog { s, p } => {
                positive("s", *s)?;
                if p.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("p must be finite, got {p}")))
                }
            }
            Family::QFactorial { q } => {
                if q.is_finite() && *q > 0.0 && *q < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")))
                }
            }
            Family::Table { values } => {
                if values.len() < n_cap + 1 {
                    return Err(Error::TableTooShort {
                        needed: n_cap + 1,
                        got: values.len(),
                    });
                }
                for v in values.iter().take(n_cap + 1) {
                    positive("table value", *v)?;
                }
                Ok(())
            }
        }
    }
}

/// A positive sequence `m(0), …, m(n_cap)` held in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    family: Family,
    logs: Vec<f64>,
    // steps[i] = m(i)/m(i-1); steps[0] is a placeholder 1.0.
    steps: Vec<f64>,
    log_steps: Vec<f64>,
    // linear values, +inf once they overflow
    values: Vec<f64>,
}

/// Integer `s` small enough for exact integer step products.
fn integral_order(s: f64) -> Option<u64> {
    if s.fract() == 0.0 && (1.0..=16.0).contains(&s) {
        Some(s as u64)
    } else {
        None
    }
}

impl MomentSequence {
    /// Builds a sequence and precomputes indices `0..=n_cap`.
    pub fn new(family: Family, n_cap: usize) -> Result<Self> {
        if n_cap < 1 {
            return Err(Error::InvalidParameter("n_cap must be at least 1".into()));
        }
        family.validate(n_cap)?;

        let mut steps = vec![1.0; n_cap + 1];
        let mut log_steps = vec![0.0; n_cap + 1];
        let mut logs = vec![0.0; n_cap + 1];

        // Gevrey part shared by two families.
        let gevrey_step = |s: f64, i: usize| -> (f64, f64) {
            match integral_order(s) {
                Some(k) => {
                    let hi = k * i as u64;
                    let lo = k * (i as u64 - 1);
                    let mut step = 1.0;
                    let mut log_step = 0.0;
                    for f in (lo + 1)..=hi {
                        step *= f as f64;
                        log_step += (f as f64).ln();
                    }
                    (step, log_step)
                }
                None => {
                    let d = ln_gamma(1.0 + s * i as f64) - ln_gamma(1.0 + s * (i as f64 - 1.0));
                    (d.exp(), d)
                }
            }
        };

        match &family {
            Family::Factorial => {
                for i in 1..=n_cap {
                    steps[i] = i as f64;
                    log_steps[i] = (i as f64).ln();
                }
            }
            Family::Gevrey { s } => {
                for i in 1..=n_cap {
                    let (st, ls) = gevrey_step(*s, i);
                    steps[i] = st;
                    log_steps[i] = ls;
                }
            }
            Family::GevreyLog { s, p } => {
                for i in 1..=n_cap {
                    let (st, ls) = gevrey_step(*s, i);
                    let ll = (std::f64::consts::E + i as f64).ln();
                    steps[i] = st * ll.powf(*p);
                    log_steps[i] = ls + p * ll.ln();
                }
            }
            Family::QFactorial { q } => {
                for i in 1..=n_cap {
                    let qi = (1.0 - q.powi(i as i32)) / (1.0 - q);
                    steps[i] = qi;
                    log_steps[i] = qi.ln();
                }
            }
            Family::ParityFactorial => {
                for i in 1..=n_cap {
                    if i % 2 == 0 {
                        let st = (i * (i - 1)) as f64;
                        steps[i] = st;
                        log_steps[i] = st.ln();
                    }
                }
            }
            Family::Table { values } => {
                logs[0] = values[0].ln();
                for i in 1..=n_cap {
                    steps[i] = values[i] / values[i - 1];
                    log_steps[i] = values[i].ln() - values[i - 1].ln();
                }
            }
        }

        match &family {
            Family::Gevrey { s } if integral_order(*s).is_none() => {
                for (n, l) in logs.iter_mut().enumerate() {
                    *l = ln_gamma(1.0 + s * n as f64);
                }
            }
            Family::Table { values } => {
                for (n, l) in logs.iter_mut().enumerate() {
                    *l = values[n].ln();
                }
            }
            _ => {
                for n in 1..=n_cap {
                    logs[n] = logs[n - 1] + log_steps[n];
                }
            }
        }

        let mut values = vec![0.0; n_cap + 1];
        match &family {
            Family::Table { values: v } => values.copy_from_slice(&v[..=n_cap]),
            _ => {
                values[0] = logs[0].exp();
                for n in 1..=n_cap {
                    values[n] = if logs[n] > LN_F64_MAX {
                        f64::INFINITY
                    } else {
                        values[n - 1] * steps[n]
                    };
                }
            }
        }

        if let Some(bad) = logs.iter().position(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "log m({bad}) is not finite for {}",
                family.tag()
            )));
        }

        Ok(Self {
            family,
            logs,
            steps,
            log_steps,
            values,
        })
    }

    pub fn factorial(n_cap: usize) -> Self {
        Self::new(Family::Factorial, n_cap).expect("factorial is always valid")
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Largest index that was precomputed.
    pub fn n_cap(&self) -> usize {
        self.logs.len() - 1
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.n_cap() {
            Err(Error::IndexBeyondCap {
                index: n,
                cap: self.n_cap(),
            })
        } else {
            Ok(())
        }
    }

    pub fn log_value(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.logs[n])
    }

    /// `m(n)` in linear space.
    pub fn value(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        let v = self.values[n];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow {
                context: format!("{}({n}), log value {}", self.family.tag(), self.logs[n]),
            })
        }
    }

    /// `m(n)/m(n-1)` for `n ≥ 1`.
    pub fn ratio(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("ratio needs n >= 1".into()));
        }
        self.check(n)?;
        Ok(self.steps[n])
    }

    pub fn log_ratio(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("ratio needs n >= 1".into()));
        }
        self.check(n)?;
        Ok(self.log_steps[n])
    }

    /// `m(n + k)/m(n)` as a product of consecutive ratios.
    ///
    /// Integer-valued families (factorial, integer Gevrey orders, parity)
    /// come out exact as long as the product stays below 2^53.
    pub fn span_ratio(&self, n: usize, k: usize) -> Result<f64> {
        self.check(n + k)?;
        let mut r = 1.0;
        for i in (n + 1)..=(n + k) {
            r *= self.steps[i];
        }
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Overflow {
                context: format!("{}({})/{}({n})", self.family.tag(), n + k, self.family.tag()),
            })
        }
    }

    /// `log(m(n + k)/m(n))`.
    pub fn log_span(&self, n: usize, k: usize) -> Result<f64> {
        self.check(n + k)?;
        Ok(self.logs[n + k] - self.logs[n])
    }

    pub fn log_values(&self) -> &[f64] {
        &self.logs
    }
}
