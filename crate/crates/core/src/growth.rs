//! Growth-order estimation: fits `log v_n ≈ log C + n log H + σ log M_n`
//! to coefficient norms and compares `σ̂` with the order `1/k₁`.

use crate::error::{Error, Result};
use crate::sequences::MomentSequence;
use crate::series::{MultiPoly, TimeSeries};
use crate::solver::CauchyProblem;
use nalgebra::{DMatrix, DVector};

/// Smallest singular value ratio of the column-scaled design still
/// treated as identifiable.
pub const CONDITION_FLOOR: f64 = 1e-10;

/// `v_n = ‖u_n‖_r`, carried in log space; `-∞` encodes a zero norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSequence {
    pub log_values: Vec<f64>,
    /// Some `v_n` does not fit in an `f64`.
    pub overflowed: bool,
}

impl NormSequence {
    /// `v_n`, `+∞` past the `f64` range.
    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|l| l.exp()).collect()
    }
}

/// `log Σ_α |f_α| r^{|α|}` without forming the sum.
pub fn log_coefficient_norm(f: &MultiPoly, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be >= 0, got {r}")));
    }
    let lr = r.ln();
    let logs: Vec<f64> = f
        .iter()
        .filter(|(_, c)| *c != 0.0)
        .filter_map(|(a, c)| {
            let k: usize = a.iter().sum();
            match k {
                0 => Some(c.abs().ln()),
                _ if r == 0.0 => None,
                _ => Some(c.abs().ln() + k as f64 * lr),
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(top);
    }
    Ok(top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln())
}

pub fn norm_sequence(u: &TimeSeries, r: f64) -> Result<NormSequence> {
    let log_values = u
        .coeffs()
        .iter()
        .map(|c| log_coefficient_norm(c, r))
        .collect::<Result<Vec<_>>>()?;
    let overflowed = log_values.iter().any(|l| *l >= f64::MAX.ln());
    Ok(NormSequence { log_values, overflowed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// Inclusive `[n_lo, n_hi]`.
    pub window: (usize, usize),
    pub log_c: f64,
    pub log_h: f64,
    pub sigma_hat: f64,
    /// Root-mean-square residual of the regression in log space.
    pub rms: f64,
    /// Nonzero values used.
    pub points: usize,
}

impl GrowthFit {
    /// `σ̂ ≤ target + tol`, and `σ̂ ≥ target - tol` as well when `sharp`.
    pub fn verdict(&self, target: f64, tol: f64, sharp: bool) -> bool {
        self.sigma_hat <= target + tol && (!sharp || self.sigma_hat >= target - tol)
    }
}

/// Default window `[N_t/4, N_t]`.
pub fn default_window(n_t: usize) -> (usize, usize) {
    (n_t / 4, n_t)
}

pub fn fit_order(values: &[f64], m: &MomentSequence, window: (usize, usize)) -> Result<GrowthFit> {
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidParameter(format!("norm values must be >= 0, got {v}")));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_order_logs(&logs, m, window)
}

/// As [`fit_order`] with `log v_n` given; `-∞` entries are skipped.
pub fn fit_order_logs(log_values: &[f64], m: &MomentSequence, window: (usize, usize)) -> Result<GrowthFit> {
    let (lo, hi) = window;
    if hi <= lo + 3 {
        return Err(Error::InsufficientData(format!("window [{lo}, {hi}] needs n_hi > n_lo + 3")));
    }
    if hi >= log_values.len() {
        return Err(Error::InsufficientData(format!(
            "window ends at {hi} but only {} values are available",
            log_values.len()
        )));
    }
    let mut rows = Vec::new();
    for (n, &y) in log_values.iter().enumerate().take(hi + 1).skip(lo) {
        if y == f64::NEG_INFINITY {
            continue;
        }
        if !y.is_finite() {
            return Err(Error::InvalidParameter(format!("log v_{n} = {y}")));
        }
        rows.push((n as f64, m.log_value(n)?, y));
    }
    if rows.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} nonzero values in [{lo}, {hi}], need 5",
            rows.len()
        )));
    }
    let design = DMatrix::from_fn(rows.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => rows[i].0,
        _ => rows[i].1,
    });
    let scales: Vec<f64> = (0..3).map(|j| design.column(j).norm()).collect();
    if scales.contains(&0.0) {
        return Err(Error::DegenerateFit("log M_n vanishes on the window".into()));
    }
    let scaled = DMatrix::from_fn(rows.len(), 3, |i, j| design[(i, j)] / scales[j]);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let svd = scaled.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smin <= CONDITION_FLOOR * smax {
        return Err(Error::DegenerateFit(format!(
            "log M_n is affine in n on [{lo}, {hi}], so the order is unidentifiable"
        )));
    }
    let beta = svd
        .solve(&y, CONDITION_FLOOR * smax)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let coef: Vec<f64> = (0..3).map(|j| beta[j] / scales[j]).collect();
    let resid = &design * DVector::from_column_slice(&coef) - &y;
    let rms = (resid.norm_squared() / rows.len() as f64).sqrt();
    Ok(GrowthFit {
        window,
        log_c: coef[0],
        log_h: coef[1],
        sigma_hat: coef[2],
        rms,
        points: rows.len(),
    })
}

/// Outcome of comparing a solution's growth with `1/k₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderCheck {
    pub k1_inv: f64,
    pub fit: GrowthFit,
    pub tol: f64,
    pub sharp: bool,
    pub pass: bool,
}

/// Fits the norms of `u` at radius `r` against the problem's reference
/// sequence over `window` (default `[N_t/4, N_t]`).
pub fn verify_theorem_order(
    problem: &CauchyProblem,
    u: &TimeSeries,
    r: f64,
    tol: f64,
    sharp: bool,
    window: Option<(usize, usize)>,
) -> Result<OrderCheck> {
    let k1_inv = crate::polygon::Order::from_rational(problem.k1_inverse()?)?.to_f64();
    let window = window.unwrap_or_else(|| default_window(u.n_t()));
    let norms = norm_sequence(u, r)?;
    let fit = fit_order_logs(&norms.log_values, &problem.reference, window)?;
    let pass = fit.verdict(k1_inv, tol, sharp);
    Ok(OrderCheck {
        k1_inv,
        fit,
        tol,
        sharp,
        pass,
    })
}
