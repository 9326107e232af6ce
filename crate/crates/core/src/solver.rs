//! Truncated formal solutions of
//!
//! ```text
//! P(∂_{m0,t}, ∂_{m,z}) u = f,   ∂^j_{m0,t} u(0, z) = φ_j(z),  j < K,
//! P = ∂^K_{m0,t} + Σ_{(j,α)} a_{jα}(t) ∂^j_{m0,t} ∂^α_{m,z}
//! ```
//!
//! by the coefficient recursion (any polynomial `a_{jα}`) and, for
//! constant coefficients with zero data, by the `g_n` difference family.
//! Both are certified a posteriori by [`residual_report`].

use crate::error::{Error, Result};
use crate::polygon::{build_polygon, condition_a_violation, k1_inverse, NewtonPolygon, OperatorTerm, Order};
use crate::sequences::MomentSequence;
use crate::series::{indices, MultiPoly, TimeSeries};
use num_rational::Rational64;

/// How the stored forcing coefficients relate to `f(t, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingConvention {
    /// `f = Σ f_n(z) tⁿ`
    Plain,
    /// `f = Σ f_n(z)/m0(n) tⁿ`
    Weighted,
}

impl ForcingConvention {
    pub fn tag(&self) -> &'static str {
        match self {
            ForcingConvention::Plain => "plain",
            ForcingConvention::Weighted => "weighted",
        }
    }
}

/// Forcing data: a polynomial in `t` (coefficients past the last stored
/// one are zero) with the convention its coefficients follow.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub convention: ForcingConvention,
    pub series: TimeSeries,
}

impl Forcing {
    pub fn zero(caps: &[usize]) -> Self {
        Self {
            convention: ForcingConvention::Plain,
            series: TimeSeries::zeros(0, caps),
        }
    }

    fn stored(&self, n: usize) -> Option<&MultiPoly> {
        self.series.coeff(n)
    }

    /// Plain coefficient of `tⁿ` in `f`.
    pub fn plain(&self, n: usize, m0: &MomentSequence) -> Result<Option<MultiPoly>> {
        let Some(f) = self.stored(n) else { return Ok(None) };
        Ok(Some(match self.convention {
            ForcingConvention::Plain => f.clone(),
            ForcingConvention::Weighted => f.scale(1.0 / m0.value(n)?),
        }))
    }

    /// `f_n` with `f = Σ f_n/m0(n) tⁿ`.
    pub fn weighted(&self, n: usize, m0: &MomentSequence) -> Result<Option<MultiPoly>> {
        let Some(f) = self.stored(n) else { return Ok(None) };
        Ok(Some(match self.convention {
            ForcingConvention::Plain => f.scale(m0.value(n)?),
            ForcingConvention::Weighted => f.clone(),
        }))
    }

    pub fn is_zero(&self) -> bool {
        self.series.coeffs().iter().all(MultiPoly::is_zero)
    }
}

/// A Cauchy problem together with its sequences, orders and truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyProblem {
    pub k: usize,
    pub terms: Vec<OperatorTerm>,
    pub forcing: Forcing,
    /// `φ_0, …, φ_{K-1}`
    pub initial: Vec<MultiPoly>,
    pub m0: MomentSequence,
    pub m: Vec<MomentSequence>,
    pub reference: MomentSequence,
    pub s0: Order,
    pub s: Vec<Order>,
    pub n_t: usize,
    pub caps: Vec<usize>,
}

impl CauchyProblem {
    /// Checks shapes; condition (a) is checked by the solvers.
    pub fn validate(&self) -> Result<()> {
        let dim = self.caps.len();
        if self.k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if self.initial.len() != self.k {
            return Err(Error::ShapeMismatch(format!(
                "{} initial functions for K={}",
                self.initial.len(),
                self.k
            )));
        }
        if self.m.len() != dim || self.s.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "{} spatial sequences and {} orders for N={dim}",
                self.m.len(),
                self.s.len()
            )));
        }
        if let Some(t) = self.terms.iter().find(|t| t.alpha.len() != dim) {
            return Err(Error::ShapeMismatch(format!(
                "term (j={}, alpha={:?}) for N={dim}",
                t.j, t.alpha
            )));
        }
        if let Some(p) = self.initial.iter().find(|p| p.dim() != dim) {
            return Err(Error::ShapeMismatch(format!(
                "initial function in {} variables for N={dim}",
                p.dim()
            )));
        }
        if self.forcing.series.dim() != dim {
            return Err(Error::ShapeMismatch(format!(
                "forcing in {} variables for N={dim}",
                self.forcing.series.dim()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.caps.len()
    }

    pub fn k1_inverse(&self) -> Result<Rational64> {
        k1_inverse(&self.terms, self.k, self.s0, &self.s)
    }

    pub fn polygon(&self) -> Result<NewtonPolygon> {
        build_polygon(&self.terms, self.k, self.s0, &self.s)
    }

    /// All coefficients constant in `t` and all `φ_j = 0`.
    pub fn is_constant_zero_data(&self) -> bool {
        self.terms.iter().all(OperatorTerm::is_constant) && self.initial.iter().all(MultiPoly::is_zero)
    }
}

/// Solves by the coefficient recursion: for `N ≥ K`, with `n = N - K`,
///
/// ```text
/// u_N m0(N)/m0(n) = F_n - Σ_{(j,α)} Σ_{p ≥ ord} a_{jα,p} m0(n-p+j)/m0(n-p) ∂^α u_{n-p+j}
/// ```
///
/// where `F_n` is the plain `tⁿ` coefficient of `f`; the seeds are
/// `u_j = φ_j m0(0)/m0(j)`. Terms are summed in input order, powers
/// ascending.
pub fn solve_variable(problem: &CauchyProblem, n_t: usize) -> Result<TimeSeries> {
    problem.validate()?;
    if let Some(e) = condition_a_violation(&problem.terms, problem.k) {
        return Err(e);
    }
    let k = problem.k;
    let m0 = &problem.m0;
    let mut u: Vec<MultiPoly> = Vec::with_capacity(n_t + 1);
    for (j, phi) in problem.initial.iter().enumerate().take(n_t + 1) {
        let r = m0.span_ratio(0, j).map_err(|e| e.at_order(j))?;
        u.push(phi.restrict(&common(phi.caps(), &problem.caps)).map_err(|e| e.at_order(j))?.scale(1.0 / r));
    }
    // derivative cache per term: cache[t][i] = ∂^α u_i
    let mut cache: Vec<Vec<Option<MultiPoly>>> = vec![Vec::new(); problem.terms.len()];

    for big_n in k..=n_t {
        let n = big_n - k;
        let mut step = || -> Result<MultiPoly> {
            let mut acc = match problem.forcing.plain(n, m0)? {
                Some(f) => f.restrict(&common(f.caps(), &problem.caps))?,
                None => MultiPoly::zeros(&problem.caps),
            };
            for (ti, term) in problem.terms.iter().enumerate() {
                for &(p, a) in term.coeff() {
                    if p > n {
                        break;
                    }
                    let i = n - p + term.j;
                    if cache[ti].len() <= i {
                        cache[ti].resize(i + 1, None);
                    }
                    if cache[ti][i].is_none() {
                        cache[ti][i] = Some(u[i].moment_derivative_multi(&problem.m, &term.alpha)?);
                    }
                    let d = cache[ti][i].as_ref().unwrap();
                    let w = m0.span_ratio(n - p, term.j)?;
                    acc = acc.lin_comb(1.0, d, -a * w)?;
                }
            }
            let lead = m0.span_ratio(n, k)?;
            let out = acc.scale(1.0 / lead);
            if out.coefficients().iter().any(|c| !c.is_finite()) {
                return Err(Error::Overflow {
                    context: format!("u_{big_n}"),
                });
            }
            Ok(out)
        };
        let next = step().map_err(|e| e.at_order(big_n))?;
        u.push(next);
    }
    TimeSeries::new(u)
}

fn common(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(x, y)| *x.min(y)).collect()
}

/// `g_0 … g_{n_max}` with `g_0 = … = g_{K-2} = 0`, `g_{K-1} = 1` and
/// `g_n = Σ_{j=1}^K P_j g_{n-j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnFamily {
    pub k: usize,
    /// `P_1, …, P_K`
    pub p: Vec<MultiPoly>,
    pub g: Vec<MultiPoly>,
}

impl GnFamily {
    /// Largest total degree of each `g_n` (`None` for the zero polynomial).
    pub fn degrees(&self) -> Vec<Option<usize>> {
        self.g
            .iter()
            .map(|g| g.iter().filter(|(_, c)| *c != 0.0).map(|(a, _)| a.iter().sum()).max())
            .collect()
    }
}

/// Builds the family on the box `caps`; a product leaving the box is a
/// truncation error.
pub fn gn_polynomials(p: &[MultiPoly], k: usize, n_max: usize, caps: &[usize]) -> Result<GnFamily> {
    if p.len() != k || k == 0 {
        return Err(Error::ShapeMismatch(format!("{} polynomials P_j for K={k}", p.len())));
    }
    let mut g: Vec<MultiPoly> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let next = if n + 1 < k {
            MultiPoly::zeros(caps)
        } else if n + 1 == k {
            MultiPoly::constant(caps, 1.0)
        } else {
            let mut acc = MultiPoly::zeros(caps);
            for (j, pj) in p.iter().enumerate().map(|(i, pj)| (i + 1, pj)) {
                if pj.is_zero() || g[n - j].is_zero() {
                    continue;
                }
                let prod = pj.mul_truncated(&g[n - j], caps).map_err(|e| e.at_order(n))?;
                acc.add_scaled_assign(1.0, &prod)?;
            }
            acc
        };
        g.push(next);
    }
    Ok(GnFamily {
        k,
        p: p.to_vec(),
        g,
    })
}

/// `P_{K-j}(ζ) = -Σ_α a_{jα} ζ^α` for a constant-coefficient operator.
pub fn operator_polynomials(problem: &CauchyProblem) -> Result<Vec<MultiPoly>> {
    let k = problem.k;
    let mut p = vec![MultiPoly::zeros(&problem.caps); k];
    for t in &problem.terms {
        if !t.is_constant() {
            return Err(Error::NotConstantProblem(format!(
                "constant coefficients, but a(j={}, alpha={:?}) depends on t",
                t.j, t.alpha
            )));
        }
        if t.j >= k {
            return Err(Error::NotConstantProblem(format!(
                "time orders below K={k}, got j={}",
                t.j
            )));
        }
        let slot = &mut p[k - t.j - 1];
        let cur = slot.get(&t.alpha).ok_or_else(|| Error::TruncationExhausted {
            axis: (0..t.alpha.len()).find(|&i| t.alpha[i] > problem.caps[i]).unwrap_or(0),
            cap: problem.caps.iter().copied().max().unwrap_or(0),
            requested: t.spatial_order(),
        })?;
        slot.set(&t.alpha, cur - t.coefficient(0))?;
    }
    Ok(p)
}

/// `g(∂_{m,z}) f`, applying only the nonzero monomials of `g`.
fn apply_operator_poly(g: &MultiPoly, f: &MultiPoly, m: &[MomentSequence]) -> Result<Option<MultiPoly>> {
    let mut acc: Option<MultiPoly> = None;
    for (alpha, c) in g.iter() {
        if c == 0.0 {
            continue;
        }
        let d = f.moment_derivative_multi(m, &alpha)?;
        acc = Some(match acc {
            None => d.scale(c),
            Some(a) => a.lin_comb(1.0, &d, c)?,
        });
    }
    Ok(acc)
}

/// Solves a constant-coefficient problem with zero data as
/// `û = Σ_ι u_ι/m0(ι) t^ι`, `u_ι = Σ_{n<ι} g_n(∂_{m,z}) f_{ι-n-1}`, with
/// `f = Σ f_n/m0(n) tⁿ`.
pub fn solve_constant(problem: &CauchyProblem, n_t: usize) -> Result<TimeSeries> {
    problem.validate()?;
    if let Some(j) = problem.initial.iter().position(|p| !p.is_zero()) {
        return Err(Error::NotConstantProblem(format!("zero initial data, but phi_{j} is not zero")));
    }
    let p = operator_polynomials(problem)?;
    let g = gn_polynomials(&p, problem.k, n_t.saturating_sub(1), &problem.caps)?;
    let m0 = &problem.m0;
    let weighted: Vec<Option<MultiPoly>> = (0..n_t)
        .map(|n| problem.forcing.weighted(n, m0))
        .collect::<Result<_>>()?;

    let mut u = vec![MultiPoly::zeros(&problem.caps)];
    for iota in 1..=n_t {
        let coeff = || -> Result<MultiPoly> {
            let mut acc: Option<MultiPoly> = None;
            for n in 0..iota {
                let Some(f) = &weighted[iota - n - 1] else { continue };
                let f = f.restrict(&common(f.caps(), &problem.caps))?;
                if let Some(term) = apply_operator_poly(&g.g[n], &f, &problem.m)? {
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term)?,
                    });
                }
            }
            let v = acc.unwrap_or_else(|| MultiPoly::zeros(&problem.caps));
            let out = v.scale(1.0 / m0.value(iota)?);
            if out.coefficients().iter().any(|c| !c.is_finite()) {
                return Err(Error::Overflow {
                    context: format!("u_{iota}"),
                });
            }
            Ok(out)
        };
        u.push(coeff().map_err(|e| e.at_order(iota))?);
    }
    TimeSeries::new(u)
}

/// Residual of a candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Largest `|R_α| / Σ |contributions_α|` over the equation's checkable
    /// coefficients.
    pub equation: f64,
    /// Largest relative mismatch `‖∂^j u(0,·) - φ_j‖ / ‖φ_j‖` (absolute when
    /// `φ_j = 0`), majorant norm at radius 1.
    pub initial: f64,
    /// Number of `t` orders whose equation coefficient was checked.
    pub orders_checked: usize,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.equation.max(self.initial)
    }
}

/// Applies `P` to `u` with the series operations and compares with `f`.
///
/// Order `n` is checkable when `∂^K_{m0,t} u` and every `∂^j_{m0,t}` term
/// reach it, i.e. `n ≤ N_t - K`; each coefficient is compared on the box
/// left after the spatial derivatives.
pub fn residual_report(problem: &CauchyProblem, u: &TimeSeries) -> Result<ResidualReport> {
    problem.validate()?;
    let k = problem.k;
    let m0 = &problem.m0;
    if u.n_t() < k {
        return Err(Error::InsufficientData(format!(
            "solution of order {} for K={k}",
            u.n_t()
        )));
    }
    let lead = u.moment_derivative_t(m0, k)?;
    let mut term_series = Vec::with_capacity(problem.terms.len());
    for t in &problem.terms {
        // only orders that reach a checkable equation coefficient
        let top = (u.n_t() - k + t.j).min(u.n_t());
        let head = TimeSeries::new(u.coeffs()[..=top].to_vec())?;
        let s = head.moment_derivative_multi(&problem.m, &t.alpha)?;
        let s = if t.j > 0 { Some(s.moment_derivative_t(m0, t.j)?) } else { Some(s) };
        term_series.push(s);
    }

    let orders = u.n_t() - k + 1;
    let mut worst: f64 = 0.0;
    for n in 0..orders {
        let forcing = problem.forcing.plain(n, m0)?;
        let mut parts: Vec<(f64, &MultiPoly)> = vec![(1.0, lead.coeff(n).unwrap())];
        for (t, s) in problem.terms.iter().zip(&term_series) {
            for &(p, a) in t.coeff() {
                if p > n {
                    break;
                }
                let s = s.as_ref().and_then(|s| s.coeff(n - p)).ok_or_else(|| {
                    Error::InsufficientData(format!("term (j={}) at order {}", t.j, n - p))
                })?;
                parts.push((a, s));
            }
        }
        if let Some(f) = &forcing {
            parts.push((-1.0, f));
        }
        let mut caps = problem.caps.clone();
        for (_, p) in &parts {
            caps = common(&caps, p.caps());
        }
        for alpha in indices(&caps) {
            let mut total = 0.0;
            let mut scale = 0.0;
            for (c, p) in &parts {
                let v = c * p.get(&alpha).unwrap();
                total += v;
                scale += v.abs();
            }
            if scale > 0.0 {
                worst = worst.max(total.abs() / scale);
            }
        }
    }

    let mut initial: f64 = 0.0;
    for (j, phi) in problem.initial.iter().enumerate() {
        let got = u.moment_derivative_t(m0, j)?;
        let at0 = got.coeff(0).unwrap();
        let diff = at0.sub(phi)?;
        let base = phi.restrict(diff.caps())?.coefficient_norm(1.0)?;
        let d = diff.coefficient_norm(1.0)?;
        initial = initial.max(if base > 0.0 { d / base } else { d });
    }

    Ok(ResidualReport {
        equation: worst,
        initial,
        orders_checked: orders,
    })
}

pub fn residual(problem: &CauchyProblem, u: &TimeSeries) -> Result<f64> {
    Ok(residual_report(problem, u)?.max())
}

/// Largest `|a_α - b_α| / max(|a_α|, |b_α|)` over orders and boxes both
/// series share; equal coefficients (including two zeros) count as 0.
pub fn max_relative_difference(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        let caps = common(x.caps(), y.caps());
        for alpha in indices(&caps) {
            let (p, q) = (x.get(&alpha).unwrap(), y.get(&alpha).unwrap());
            if p != q {
                worst = worst.max((p - q).abs() / p.abs().max(q.abs()));
            }
        }
    }
    Ok(worst)
}
