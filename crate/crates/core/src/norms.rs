//! The weight series `Θ^(β)(ρ) = Σ_α (M^s_{α+β}/M^s_α) ρ^α`, the moment
//! formal norm `‖f(z)‖_ρ = Σ_α |∂^α_{m,z} f(z)|/M^s_α ρ^α`, and
//! falsifiable finite checks of the majorant estimates built on them.
//!
//! A norm is a series in `ρ`, stored as a [`MultiPoly`]; "≪" between such
//! series is coefficientwise. Suprema over polydiscs are replaced by
//! maxima over a real grid strictly inside the disc.

use crate::error::{Error, Result};
use crate::sequences::{check_lc, mg_witness, order_witness, MomentSequence};
use crate::series::{indices, MultiPoly, TimeSeries};

/// Relative slack on coefficientwise comparisons.
pub const REL_TOL: f64 = 1e-12;

/// Default number of grid points per axis for sup checks.
pub const GRID_POINTS: usize = 8;

/// The sequences a norm is taken with: `m_i` per spatial axis, the
/// reference `M`, and the orders `s_i` of `m_i` relative to `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormContext {
    pub m: Vec<MomentSequence>,
    pub reference: MomentSequence,
    pub s: Vec<f64>,
}

impl NormContext {
    pub fn new(m: Vec<MomentSequence>, reference: MomentSequence, s: Vec<f64>) -> Result<Self> {
        if m.len() != s.len() || m.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} sequences for {} orders",
                m.len(),
                s.len()
            )));
        }
        if let Some(bad) = s.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidParameter(format!("orders must be >= 0, got {bad}")));
        }
        Ok(Self { m, reference, s })
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    /// `log M^s_α = Σ_i s_i log M_{α_i}`.
    pub fn log_weight(&self, alpha: &[usize]) -> Result<f64> {
        let mut acc = 0.0;
        for (&a, &s) in alpha.iter().zip(&self.s) {
            if s != 0.0 {
                acc += s * self.reference.log_value(a)?;
            }
        }
        Ok(acc)
    }
}

/// `Θ^(β)` truncated to `caps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSeries {
    pub beta: Vec<usize>,
    pub coeffs: MultiPoly,
}

pub fn theta_series(
    reference: &MomentSequence,
    s: &[f64],
    beta: &[usize],
    caps: &[usize],
) -> Result<ThetaSeries> {
    if s.len() != beta.len() || s.len() != caps.len() {
        return Err(Error::ShapeMismatch(format!(
            "orders {}, shift {}, caps {}",
            s.len(),
            beta.len(),
            caps.len()
        )));
    }
    for (&c, &b) in caps.iter().zip(beta) {
        if c + b > reference.n_cap() {
            return Err(Error::IndexBeyondCap {
                index: c + b,
                cap: reference.n_cap(),
            });
        }
    }
    let l = reference.log_values();
    let coeffs = MultiPoly::from_fn(caps, |alpha| {
        let e: f64 = alpha
            .iter()
            .zip(beta)
            .zip(s)
            .map(|((&a, &b), &si)| if si == 0.0 { 0.0 } else { si * (l[a + b] - l[a]) })
            .sum();
        e.exp()
    });
    Ok(ThetaSeries {
        beta: beta.to_vec(),
        coeffs,
    })
}

/// `‖f(z0)‖_ρ` truncated to `caps`.
pub fn formal_norm(f: &MultiPoly, z0: &[f64], ctx: &NormContext, caps: &[usize]) -> Result<MultiPoly> {
    if caps.len() != ctx.dim() || f.dim() != ctx.dim() {
        return Err(Error::ShapeMismatch("norm caps and dimension".into()));
    }
    let derivs = all_derivatives_at(f, &[z0.to_vec()], ctx, caps)?;
    let mut out = MultiPoly::zeros(caps);
    for (k, alpha) in indices(caps).enumerate() {
        let w = ctx.log_weight(&alpha)?;
        out.set(&alpha, derivs[k][0].abs() * (-w).exp())?;
    }
    Ok(out)
}

// derivs[k][p] = ∂^α f evaluated at points[p], α the k-th index of `caps`.
fn all_derivatives_at(
    f: &MultiPoly,
    points: &[Vec<f64>],
    ctx: &NormContext,
    caps: &[usize],
) -> Result<Vec<Vec<f64>>> {
    for (axis, (&c, &fc)) in caps.iter().zip(f.caps()).enumerate() {
        if c > fc {
            return Err(Error::TruncationExhausted {
                axis,
                cap: fc,
                requested: c,
            });
        }
    }
    indices(caps)
        .map(|alpha| {
            let d = f.moment_derivative_multi(&ctx.m, &alpha)?;
            points.iter().map(|z| d.eval(z)).collect()
        })
        .collect()
}

/// Verdict of a check whose conclusion rests on a hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail { detail: String },
    HypothesisFail { detail: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        *self == Verdict::Pass
    }
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * rhs.abs()
}

/// `Θ^(β) ≪ (M^s_β / M^s_{γ+β}) Θ^(γ+β)` on the box `caps`.
///
/// The inequality needs (lc) for `M`; when (lc) fails on the indices
/// involved the verdict is [`Verdict::HypothesisFail`].
pub fn check_theta_shift(
    reference: &MomentSequence,
    s: &[f64],
    beta: &[usize],
    gamma: &[usize],
    caps: &[usize],
) -> Result<Verdict> {
    let top = caps
        .iter()
        .zip(beta)
        .zip(gamma)
        .map(|((c, b), g)| c + b + g)
        .max()
        .unwrap_or(0);
    let lc_range = top.min(reference.n_cap().saturating_sub(1)).max(1);
    let lc = check_lc(reference, lc_range)?;
    if !lc.holds {
        return Ok(Verdict::HypothesisFail {
            detail: format!("(lc) fails at n={}", lc.failing_index().unwrap_or(0)),
        });
    }
    let shifted: Vec<usize> = beta.iter().zip(gamma).map(|(b, g)| b + g).collect();
    let lhs = theta_series(reference, s, beta, caps)?;
    let rhs = theta_series(reference, s, &shifted, caps)?;
    let l = reference.log_values();
    let log_factor: f64 = beta
        .iter()
        .zip(&shifted)
        .zip(s)
        .map(|((&b, &bg), &si)| if si == 0.0 { 0.0 } else { si * (l[b] - l[bg]) })
        .sum();
    let factor = log_factor.exp();
    for ((alpha, x), y) in lhs.coeffs.iter().zip(rhs.coeffs.coefficients()) {
        if !le(x, factor * y) {
            return Ok(Verdict::Fail {
                detail: format!("alpha={alpha:?}: {x:e} > {:e}", factor * y),
            });
        }
    }
    Ok(Verdict::Pass)
}

/// Points `r (2k + 1 - P)/P`, `k < P`, on every axis: a symmetric grid
/// strictly inside `(-r, r)^N`.
pub fn polydisc_grid(dim: usize, r: f64, points: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..points)
        .map(|k| r * (2.0 * k as f64 + 1.0 - points as f64) / points as f64)
        .collect();
    let caps = vec![points - 1; dim];
    indices(&caps)
        .map(|idx| idx.iter().map(|&k| axis[k]).collect())
        .collect()
}

// For α ≤ caps, with A = α + offset, checks
// sup_z |∂^A f(z)| / M^s_α ≤ c h^{|A|} M^s_{A+shift} / M^s_α.
// `derivs` holds ∂^A f on the grid for every A ≤ caps + offset.
fn check_norm_bound(
    derivs: &[Vec<f64>],
    ctx: &NormContext,
    caps: &[usize],
    shift: &[usize],
    offset: &[usize],
    c: f64,
    h: f64,
) -> Result<Option<String>> {
    let full: Vec<usize> = caps.iter().zip(offset).map(|(c, o)| c + o).collect();
    let slot = |alpha: &[usize]| -> usize {
        // row-major slot of alpha inside `full`
        let mut k = 0;
        for (a, cap) in alpha.iter().zip(&full) {
            k = k * (cap + 1) + a;
        }
        k
    };
    for alpha in indices(caps) {
        let with_offset: Vec<usize> = alpha.iter().zip(offset).map(|(a, o)| a + o).collect();
        let shifted: Vec<usize> = with_offset.iter().zip(shift).map(|(a, g)| a + g).collect();
        let order: usize = with_offset.iter().sum();
        let log_rhs = c.ln() + order as f64 * h.ln() + ctx.log_weight(&shifted)?
            - ctx.log_weight(&alpha)?;
        let sup = derivs[slot(&with_offset)]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let lhs = sup * (-ctx.log_weight(&alpha)?).exp();
        let rhs = log_rhs.exp();
        if !le(lhs, rhs) {
            return Ok(Some(format!("alpha={alpha:?}: {lhs:e} > {rhs:e}")));
        }
    }
    Ok(None)
}

/// From `sup_z ‖f(z)‖_ρ ≪ C Θ^(γ)(hρ)` on the grid, checks
/// `sup_z ‖∂^β f(z)‖_ρ ≪ C h^{|β|} Θ^(γ+β)(hρ)`.
///
/// The hypothesis is checked first, on the box `caps + β`, so that it
/// covers every derivative the conclusion touches.
#[allow(clippy::too_many_arguments)]
pub fn check_norm_derivative_bound(
    f: &MultiPoly,
    grid: &[Vec<f64>],
    ctx: &NormContext,
    beta: &[usize],
    gamma: &[usize],
    c: f64,
    h: f64,
    caps: &[usize],
) -> Result<Verdict> {
    if !(c > 0.0 && h > 0.0) {
        return Err(Error::InvalidParameter(format!("C and h must be > 0, got {c}, {h}")));
    }
    let wide: Vec<usize> = caps.iter().zip(beta).map(|(c, b)| c + b).collect();
    let derivs = all_derivatives_at(f, grid, ctx, &wide)?;
    let zero = vec![0; ctx.dim()];
    if let Some(detail) = check_norm_bound(&derivs, ctx, &wide, gamma, &zero, c, h)? {
        return Ok(Verdict::HypothesisFail { detail });
    }
    // the coefficient at α of the conclusion is ∂^{α+β} f against
    // C h^{|α+β|} M^s_{α+β+γ} / M^s_α
    match check_norm_bound(&derivs, ctx, caps, gamma, beta, c, h)? {
        Some(detail) => Ok(Verdict::Fail { detail }),
        None => Ok(Verdict::Pass),
    }
}

/// Constants turning `φ ≪ C Σ (Dz)^α` into
/// `∂^β φ ≪ C H^{|β|} M^s_β Σ (D'z)^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportConstants {
    /// lower witness constant, minimum over the axes
    pub a_lo: f64,
    /// upper witness constant, maximum over the axes
    pub a_hi: f64,
    /// (mg) constant of the reference sequence
    pub b_mg: f64,
    pub s_star: f64,
    pub d: f64,
    /// `H = D 𝔄 B^{s*}`
    pub h: f64,
    /// `D' = H/𝔞`
    pub d_prime: f64,
    pub n_max: usize,
}

/// Witnesses `𝔞, 𝔄, B` on `0..=n_max` and the resulting `H, D'`.
pub fn transport_constants(ctx: &NormContext, d: f64, n_max: usize) -> Result<TransportConstants> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("D must be > 0, got {d}")));
    }
    let mut a_lo = f64::INFINITY;
    let mut a_hi: f64 = 0.0;
    for (m, &s) in ctx.m.iter().zip(&ctx.s) {
        let w = order_witness(m, &ctx.reference, s, n_max)?;
        // n = 0 enters the estimate through m(0)/M_0^s as well
        let zero = (m.log_value(0)? - s * ctx.reference.log_value(0)?).exp();
        a_lo = a_lo.min(w.a_lo).min(zero);
        a_hi = a_hi.max(w.a_hi).max(zero);
    }
    let b_mg = mg_witness(&ctx.reference, n_max)?
        .constant
        .unwrap_or(f64::INFINITY);
    let s_star = ctx.s.iter().copied().fold(0.0, f64::max);
    let h = d * a_hi * b_mg.powf(s_star);
    Ok(TransportConstants {
        a_lo,
        a_hi,
        b_mg,
        s_star,
        d,
        h,
        d_prime: h / a_lo,
        n_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub constants: TransportConstants,
    /// `(β, holds)` for every `|β| ≤ beta_max`.
    pub results: Vec<(Vec<usize>, bool)>,
}

impl TransportReport {
    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|(_, ok)| *ok)
    }
}

/// Checks `∂^β φ ≪ C H^{|β|} M^s_β Σ (D'z)^α` for the truncated geometric
/// majorant `φ = C Σ (Dz)^α` and every `|β| ≤ beta_max` with `β ≤ caps`.
pub fn check_majorant_transport(
    ctx: &NormContext,
    c: f64,
    d: f64,
    caps: &[usize],
    beta_max: usize,
) -> Result<TransportReport> {
    let n_max = caps.iter().copied().max().unwrap_or(0).max(1);
    let k = transport_constants(ctx, d, n_max)?;
    let phi = MultiPoly::geometric(caps, c, d);
    let mut results = vec![];
    for beta in indices(&vec![beta_max; ctx.dim()]) {
        if beta.iter().sum::<usize>() > beta_max || beta.iter().zip(caps).any(|(b, c)| b > c) {
            continue;
        }
        let lhs = phi.moment_derivative_multi(&ctx.m, &beta)?;
        let log_scale = c.ln() + beta.iter().sum::<usize>() as f64 * k.h.ln() + ctx.log_weight(&beta)?;
        let bound = MultiPoly::from_fn(lhs.caps(), |alpha| {
            (log_scale + alpha.iter().sum::<usize>() as f64 * k.d_prime.ln()).exp()
        });
        let ok = lhs
            .coefficients()
            .iter()
            .zip(bound.coefficients())
            .all(|(x, g)| le(x.abs(), *g));
        results.push((beta, ok));
    }
    Ok(TransportReport {
        constants: k,
        results,
    })
}

/// A bound `sup_{z ∈ D_r} ‖f(z)‖_ρ ≪ 2^N C Θ^(0)(hρ)` built from a radius
/// `R'`: `C` is the majorant norm of `f` at `R'`, so `f ≪ C Σ (z/R')^α`,
/// and `h = H`, `r = 1/(2D')` come from [`transport_constants`] with
/// `D = 1/R'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupNormBound {
    pub r_prime: f64,
    pub c: f64,
    /// `2^N C`
    pub scaled_c: f64,
    pub h: f64,
    pub r: f64,
    pub constants: TransportConstants,
}

pub fn sup_norm_bound(f: &MultiPoly, ctx: &NormContext, r_prime: f64) -> Result<SupNormBound> {
    if !(r_prime > 0.0) {
        return Err(Error::InvalidParameter(format!("R' must be > 0, got {r_prime}")));
    }
    let n_max = f.caps().iter().copied().max().unwrap_or(0).max(1);
    let c = f.coefficient_norm(r_prime)?;
    let constants = transport_constants(ctx, 1.0 / r_prime, n_max)?;
    Ok(SupNormBound {
        r_prime,
        c,
        scaled_c: 2f64.powi(ctx.dim() as i32) * c,
        h: constants.h,
        r: 1.0 / (2.0 * constants.d_prime),
        constants,
    })
}

/// Grid check of a [`SupNormBound`] on every `α ≤ caps`.
pub fn check_sup_norm_bound(
    f: &MultiPoly,
    ctx: &NormContext,
    bound: &SupNormBound,
    points: usize,
    caps: &[usize],
) -> Result<Verdict> {
    let grid = polydisc_grid(ctx.dim(), bound.r, points);
    let derivs = all_derivatives_at(f, &grid, ctx, caps)?;
    let zero = vec![0; ctx.dim()];
    Ok(
        match check_norm_bound(&derivs, ctx, caps, &zero, &zero, bound.scaled_c, bound.h)? {
            Some(detail) => Verdict::Fail { detail },
            None => Verdict::Pass,
        },
    )
}

/// Constants of `sup_{z ∈ D_r} ‖f_n(z)‖_ρ ≪ A Bⁿ Θ^(0)(hρ) M_n^{s̄}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderNormBound {
    pub s_bar: f64,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub r: f64,
    pub verdict: Verdict,
}

/// Builds and grid-checks the bound for a series `Σ f_n(z) tⁿ` of
/// `(M_n)`-order `s̄`.
///
/// With `C_n` the majorant norm of `f_n` at `R'`, the finite-range
/// constants are `A_f = max(1, C_0)` and `B = max_n (C_n / M_n^{s̄})^{1/n}`,
/// so that `f_n ≪ A_f Bⁿ M_n^{s̄} Σ (z/R')^α`; then `A = 2^N A_f` and
/// `h, r` are those of [`sup_norm_bound`].
pub fn check_order_norm_bound(
    f: &TimeSeries,
    ctx: &NormContext,
    s_bar: f64,
    r_prime: f64,
    points: usize,
    caps: &[usize],
) -> Result<OrderNormBound> {
    let mut a_f: f64 = 1.0;
    let mut log_b = f64::NEG_INFINITY;
    let l = ctx.reference.log_values();
    for (n, u) in f.coeffs().iter().enumerate() {
        let c_n = u.coefficient_norm(r_prime)?;
        if n == 0 {
            a_f = a_f.max(c_n);
        } else if c_n > 0.0 {
            if n >= l.len() {
                return Err(Error::IndexBeyondCap {
                    index: n,
                    cap: l.len() - 1,
                });
            }
            log_b = log_b.max((c_n.ln() - s_bar * l[n]) / n as f64);
        }
    }
    let b = if log_b.is_finite() { log_b.exp() } else { 1.0 };
    let n_max = f
        .coeffs()
        .iter()
        .flat_map(|u| u.caps().iter().copied())
        .max()
        .unwrap_or(0)
        .max(1);
    let k = transport_constants(ctx, 1.0 / r_prime, n_max)?;
    let r = 1.0 / (2.0 * k.d_prime);
    let a = 2f64.powi(ctx.dim() as i32) * a_f;
    let grid = polydisc_grid(ctx.dim(), r, points);
    let zero = vec![0; ctx.dim()];
    let mut verdict = Verdict::Pass;
    for (n, u) in f.coeffs().iter().enumerate() {
        let derivs = all_derivatives_at(u, &grid, ctx, caps)?;
        let c_n = (a.ln() + n as f64 * b.ln() + s_bar * l[n]).exp();
        if let Some(detail) = check_norm_bound(&derivs, ctx, caps, &zero, &zero, c_n, k.h)? {
            verdict = Verdict::Fail {
                detail: format!("n={n}, {detail}"),
            };
            break;
        }
    }
    Ok(OrderNormBound {
        s_bar,
        a,
        b,
        h: k.h,
        r,
        verdict,
    })
}

/// One line of [`verify_norm_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormCheck {
    pub name: String,
    pub verdict: Verdict,
}

/// The standard battery on the reference sequence `reference` (which is
/// also used as `m` on every axis):
///
/// - the Θ shift inequality for all `|β|, |γ| ≤ 3`, `s ∈ {1/2, 1, 2}`,
///   in one and two variables;
/// - the sup-norm bound and its derivative transport for `|β| ≤ 3` on
///   the truncated geometric series `Σ z^α`;
/// - the order bound on the synthetic series `f_n = Mₙ 2ⁿ Σ z^α`.
pub fn verify_norm_suite(reference: &MomentSequence, cap: usize) -> Result<Vec<NormCheck>> {
    let mut out = vec![];
    for s in [0.5, 1.0, 2.0] {
        for dim in [1usize, 2] {
            let caps = vec![cap; dim];
            let shifts: Vec<Vec<usize>> = indices(&vec![3; dim])
                .filter(|b| b.iter().sum::<usize>() <= 3)
                .collect();
            let mut verdict = Verdict::Pass;
            'outer: for beta in &shifts {
                for gamma in &shifts {
                    let v = check_theta_shift(reference, &vec![s; dim], beta, gamma, &caps)?;
                    if !v.passed() {
                        verdict = v;
                        break 'outer;
                    }
                }
            }
            out.push(NormCheck {
                name: format!("theta_shift(s={s},N={dim})"),
                verdict,
            });
        }
    }

    let ctx = NormContext::new(vec![reference.clone()], reference.clone(), vec![1.0])?;
    let f = MultiPoly::from_fn(&[cap], |_| 1.0);
    let bound = sup_norm_bound(&f, &ctx, 0.5)?;
    out.push(NormCheck {
        name: "sup_norm_bound".into(),
        verdict: check_sup_norm_bound(&f, &ctx, &bound, GRID_POINTS, &[cap])?,
    });
    let grid = polydisc_grid(1, bound.r, GRID_POINTS);
    for b in 0..=3 {
        out.push(NormCheck {
            name: format!("norm_derivative_bound(beta={b})"),
            verdict: check_norm_derivative_bound(
                &f,
                &grid,
                &ctx,
                &[b],
                &[0],
                bound.scaled_c,
                bound.h,
                &[cap - b],
            )?,
        });
    }

    let n_t = 20.min(reference.n_cap());
    let l = reference.log_values();
    let series = TimeSeries::new(
        (0..=n_t)
            .map(|n| MultiPoly::from_fn(&[cap], |_| (l[n] + n as f64 * 2f64.ln()).exp()))
            .collect(),
    )?;
    let order = check_order_norm_bound(&series, &ctx, 1.0, 0.5, GRID_POINTS, &[cap])?;
    out.push(NormCheck {
        name: "order_norm_bound(s_bar=1)".into(),
        verdict: order.verdict,
    });
    Ok(out)
}
