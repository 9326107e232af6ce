//! Newton polygon of
//! `P = ∂^K_{m0,t} + Σ a_{jα}(t) ∂^j_{m0,t} ∂^α_{m,z}`
//! with respect to the orders `s0` (time) and `s` (space).
//!
//! Each term contributes the point `(j s0 + α·s, ord_t(a_{jα}) - j)` and
//! the leading term the point `(K s0, -K)`; the polygon is the convex hull
//! of the quadrants `{x ≤ a, y ≥ b}` attached to these points. Coordinates
//! are exact rationals, so slope comparisons never need a tolerance.

use crate::error::{Error, Result};
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::fmt::Write as _;

/// Largest denominator accepted for an order.
pub const MAX_DENOMINATOR: i64 = 64;

/// A non-negative rational order `p/q` with `q ≤ 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Order(Rational64);

impl Order {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("order with zero denominator".into()));
        }
        Self::from_rational(Rational64::new(p, q))
    }

    pub fn integer(p: i64) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn from_rational(r: Rational64) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::InvalidParameter(format!("order must be >= 0, got {r}")));
        }
        if *r.denom() > MAX_DENOMINATOR {
            return Err(Error::InvalidParameter(format!(
                "order {r} has a denominator above {MAX_DENOMINATOR}"
            )));
        }
        Ok(Self(r))
    }

    /// Parses `"p/q"`, `"p"` or a decimal that is exactly `p/q` with
    /// `q ≤ 64` (such as `"0.5"`).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad_order(text))?;
            let q: i64 = q.trim().parse().map_err(|_| bad_order(text))?;
            return Self::new(p, q);
        }
        if let Ok(p) = t.parse::<i64>() {
            return Self::integer(p);
        }
        let x: f64 = t.parse().map_err(|_| bad_order(text))?;
        Self::from_f64(x)
    }

    /// Recovers `p/q`, `q ≤ 64`, from a float that represents it to 1e-12.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(bad_order(&x.to_string()));
        }
        for q in 1..=MAX_DENOMINATOR {
            let p = (x * q as f64).round();
            if (x * q as f64 - p).abs() <= 1e-12 * q as f64 {
                return Self::new(p as i64, q);
            }
        }
        Err(Error::InvalidParameter(format!(
            "{x} is not p/q with q <= {MAX_DENOMINATOR}"
        )))
    }

    pub fn value(&self) -> Rational64 {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().expect("small rationals convert")
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

fn bad_order(text: &str) -> Error {
    Error::InvalidParameter(format!("cannot parse order {text:?}"))
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(f, self.0)
    }
}

fn write_rational(f: &mut impl fmt::Write, r: Rational64) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn rational_string(r: Rational64) -> String {
    let mut s = String::new();
    write_rational(&mut s, r).unwrap();
    s
}

/// One term `a_{jα}(t) ∂^j_{m0,t} ∂^α_{m,z}` with `a_{jα}` a polynomial in
/// `t` given by `(power, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub j: usize,
    pub alpha: Vec<usize>,
    coeff: Vec<(usize, f64)>,
}

impl OperatorTerm {
    /// Zero values are dropped; powers must be distinct and at least one
    /// value nonzero.
    pub fn new(j: usize, alpha: Vec<usize>, coeff: Vec<(usize, f64)>) -> Result<Self> {
        let mut coeff: Vec<(usize, f64)> = coeff.into_iter().filter(|(_, v)| *v != 0.0).collect();
        if let Some((p, v)) = coeff.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidTerm(format!("coefficient of t^{p} is {v}")));
        }
        coeff.sort_by_key(|(p, _)| *p);
        if coeff.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidTerm(format!(
                "repeated power in the coefficient of (j={j}, alpha={alpha:?})"
            )));
        }
        if coeff.is_empty() {
            return Err(Error::InvalidTerm(format!(
                "coefficient of (j={j}, alpha={alpha:?}) is identically zero"
            )));
        }
        Ok(Self { j, alpha, coeff })
    }

    /// A term with a constant coefficient.
    pub fn constant(j: usize, alpha: Vec<usize>, value: f64) -> Result<Self> {
        Self::new(j, alpha, vec![(0, value)])
    }

    /// Nonzero `(power, value)` pairs in increasing power.
    pub fn coeff(&self) -> &[(usize, f64)] {
        &self.coeff
    }

    /// Coefficient of `t^p` in `a_{jα}`.
    pub fn coefficient(&self, p: usize) -> f64 {
        self.coeff
            .iter()
            .find(|(q, _)| *q == p)
            .map_or(0.0, |(_, v)| *v)
    }

    /// Order of vanishing of `a_{jα}` at `t = 0`.
    pub fn ord_t(&self) -> usize {
        self.coeff[0].0
    }

    pub fn max_power(&self) -> usize {
        self.coeff.last().unwrap().0
    }

    pub fn is_constant(&self) -> bool {
        self.coeff.len() == 1 && self.coeff[0].0 == 0
    }

    /// `|α|`
    pub fn spatial_order(&self) -> usize {
        self.alpha.iter().sum()
    }
}

/// The first term violating `ord_t(a_{jα}) ≥ max{0, j - K + 1}`, as an
/// error naming it.
pub fn condition_a_violation(terms: &[OperatorTerm], k: usize) -> Option<Error> {
    terms.iter().find_map(|t| {
        let required = (t.j + 1).saturating_sub(k);
        (t.ord_t() < required).then(|| Error::ConditionA {
            j: t.j,
            alpha: t.alpha.clone(),
            ord_t: t.ord_t(),
            required,
        })
    })
}

pub fn check_condition_a(terms: &[OperatorTerm], k: usize) -> bool {
    condition_a_violation(terms, k).is_none()
}

fn check_dims(terms: &[OperatorTerm], s: &[Order]) -> Result<()> {
    match terms.iter().find(|t| t.alpha.len() != s.len()) {
        Some(t) => Err(Error::ShapeMismatch(format!(
            "term (j={}, alpha={:?}) in {} variables, orders given for {}",
            t.j,
            t.alpha,
            t.alpha.len(),
            s.len()
        ))),
        None => Ok(()),
    }
}

fn term_x(t: &OperatorTerm, s0: Order, s: &[Order]) -> Rational64 {
    let mut x = s0.value() * t.j as i64;
    for (&a, o) in t.alpha.iter().zip(s) {
        x += o.value() * a as i64;
    }
    x
}

/// `1/k1 = max{0, max_{(j,α)} (s0 (j - K) + s·α) / q_{jα}}` with
/// `q_{jα} = ord_t(a_{jα}) - j + K`.
pub fn k1_inverse(terms: &[OperatorTerm], k: usize, s0: Order, s: &[Order]) -> Result<Rational64> {
    if let Some(e) = condition_a_violation(terms, k) {
        return Err(e);
    }
    check_dims(terms, s)?;
    let x0 = s0.value() * k as i64;
    let mut best = Rational64::zero();
    for t in terms {
        let q = (t.ord_t() + k - t.j) as i64;
        let v = (term_x(t, s0, s) - x0) / q;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// The finite part of the polygon's boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolygon {
    /// `(K s0, -K)` followed by the term points in input order.
    pub points: Vec<(Rational64, i64)>,
    /// Vertices of the lower-right chain, increasing in `x`. A horizontal
    /// ray leaves the first vertex to the left and a vertical ray leaves
    /// the last one upwards.
    pub vertices: Vec<(Rational64, i64)>,
    /// Slopes of the chain's segments, strictly increasing.
    pub slopes: Vec<Rational64>,
    /// Inverse of the first positive slope, zero when there is none.
    pub k1_inv: Rational64,
}

/// Lower convex chain from the lowest (then rightmost) point to the
/// rightmost (then lowest) point.
pub fn build_polygon(terms: &[OperatorTerm], k: usize, s0: Order, s: &[Order]) -> Result<NewtonPolygon> {
    check_dims(terms, s)?;
    let mut points = vec![(s0.value() * k as i64, -(k as i64))];
    points.extend(terms.iter().map(|t| (term_x(t, s0, s), t.ord_t() as i64 - t.j as i64)));

    let y_min = points.iter().map(|p| p.1).min().unwrap();
    let x_start = points
        .iter()
        .filter(|p| p.1 == y_min)
        .map(|p| p.0)
        .max()
        .unwrap();

    // lowest y for each x to the right of the start
    let mut cand: Vec<(Rational64, i64)> = points.iter().copied().filter(|p| p.0 >= x_start).collect();
    cand.sort();
    cand.dedup_by(|b, a| a.0 == b.0);

    let mut chain: Vec<(Rational64, i64)> = vec![];
    for p in cand {
        while chain.len() >= 2 {
            let (a, b) = (chain[chain.len() - 2], chain[chain.len() - 1]);
            // drop b unless a → b → p turns left (strictly convex)
            let cross = (b.0 - a.0) * Rational64::from(p.1 - a.1)
                - Rational64::from(b.1 - a.1) * (p.0 - a.0);
            if cross <= Rational64::zero() {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }

    let slopes: Vec<Rational64> = chain
        .windows(2)
        .map(|w| Rational64::from(w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let k1_inv = slopes
        .iter()
        .find(|m| m.is_positive())
        .map_or(Rational64::zero(), |m| m.recip());
    Ok(NewtonPolygon {
        points,
        vertices: chain,
        slopes,
        k1_inv,
    })
}

impl NewtonPolygon {
    /// `k1 = 1/k1_inv`, `None` when there is no positive slope.
    pub fn k1(&self) -> Option<Rational64> {
        (!self.k1_inv.is_zero()).then(|| self.k1_inv.recip())
    }

    /// Static sketch of the points, the chain and its two rays.
    pub fn to_svg(&self) -> String {
        let xs: Vec<f64> = self.points.iter().map(|p| p.0.to_f64().unwrap()).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.1 as f64).collect();
        let (x_lo, x_hi) = span(&xs);
        let (y_lo, y_hi) = span(&ys);
        let (w, h, pad) = (400.0, 300.0, 30.0);
        let sx = |x: f64| pad + (x - x_lo) / (x_hi - x_lo) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - y_lo) / (y_hi - y_lo) * (h - 2.0 * pad);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let chain: Vec<(f64, f64)> = self
            .vertices
            .iter()
            .map(|v| (sx(v.0.to_f64().unwrap()), sy(v.1 as f64)))
            .collect();
        let first = chain[0];
        let last = *chain.last().unwrap();
        let mut path = format!("{:.2},{:.2}", 0.0, first.1);
        for (x, y) in &chain {
            let _ = write!(path, " {x:.2},{y:.2}");
        }
        let _ = write!(path, " {:.2},{:.2}", last.0, 0.0);
        let _ = writeln!(
            out,
            r#"<polyline points="{path}" fill="none" stroke="black" stroke-width="1.5"/>"#
        );
        for (x, y) in xs.iter().zip(&ys) {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
                sx(*x),
                sy(*y)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{pad}" y="16" font-family="monospace" font-size="12">1/k1 = {}</text>"#,
            rational_string(self.k1_inv)
        );
        out.push_str("</svg>\n");
        out
    }
}

fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-9 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    fn o(p: i64, q: i64) -> Order {
        Order::new(p, q).unwrap()
    }

    fn heat() -> Vec<OperatorTerm> {
        vec![OperatorTerm::constant(0, vec![2], -1.0).unwrap()]
    }

    #[test]
    fn order_parsing() {
        assert_eq!(Order::parse("1/2").unwrap(), o(1, 2));
        assert_eq!(Order::parse(" 3 ").unwrap(), o(3, 1));
        assert_eq!(Order::parse("0.25").unwrap(), o(1, 4));
        assert_eq!(Order::parse("2/4").unwrap().to_string(), "1/2");
        assert!(Order::parse("1/65").is_err());
        assert!(Order::parse("-1").is_err());
        assert!(Order::parse("x").is_err());
        assert!(Order::parse("0.123456789").is_err());
    }

    #[test]
    fn condition_a_examples() {
        assert!(check_condition_a(&heat(), 1));
        let bad = vec![OperatorTerm::constant(2, vec![0], 1.0).unwrap()];
        assert!(!check_condition_a(&bad, 2));
        assert!(matches!(
            condition_a_violation(&bad, 2),
            Some(Error::ConditionA { j: 2, ord_t: 0, required: 1, .. })
        ));
        let ok = vec![OperatorTerm::constant(1, vec![3], 1.0).unwrap()];
        assert!(check_condition_a(&ok, 2));
        assert!(matches!(
            k1_inverse(&bad, 2, o(1, 1), &[o(1, 1)]),
            Err(Error::ConditionA { .. })
        ));
    }

    #[test]
    fn k1_examples() {
        let one = [o(1, 1)];
        assert_eq!(k1_inverse(&heat(), 1, o(1, 1), &one).unwrap(), r(1, 1));
        assert_eq!(k1_inverse(&heat(), 2, o(1, 1), &one).unwrap(), r(0, 1));
        assert_eq!(k1_inverse(&heat(), 1, o(0, 1), &one).unwrap(), r(2, 1));
        let variable = vec![OperatorTerm::new(0, vec![2], vec![(1, 1.0)]).unwrap()];
        assert_eq!(k1_inverse(&variable, 1, o(1, 1), &one).unwrap(), r(1, 2));
    }

    #[test]
    fn polygon_examples() {
        let one = [o(1, 1)];
        let p = build_polygon(&heat(), 1, o(1, 1), &one).unwrap();
        assert_eq!(p.vertices, vec![(r(1, 1), -1), (r(2, 1), 0)]);
        assert_eq!(p.slopes, vec![r(1, 1)]);
        assert_eq!(p.k1_inv, r(1, 1));

        let w = build_polygon(&heat(), 2, o(1, 1), &one).unwrap();
        assert_eq!(w.points, vec![(r(2, 1), -2), (r(2, 1), 0)]);
        assert_eq!(w.vertices, vec![(r(2, 1), -2)]);
        assert!(w.slopes.is_empty());
        assert_eq!(w.k1_inv, r(0, 1));
        assert_eq!(w.k1(), None);

        let e = build_polygon(&[], 3, o(1, 2), &[]).unwrap();
        assert_eq!(e.vertices, vec![(r(3, 2), -3)]);
        assert_eq!(e.k1_inv, r(0, 1));
        assert!(e.to_svg().starts_with("<svg"));
    }

    #[test]
    fn chain_skips_points_above_the_hull() {
        // points (1,-1), (2,0), (3,0), (4,3): (2,0) is above the chord
        // from (1,-1) to (3,0) and drops out
        let terms = vec![
            OperatorTerm::constant(0, vec![2], 1.0).unwrap(),
            OperatorTerm::constant(0, vec![3], 1.0).unwrap(),
            OperatorTerm::new(0, vec![4], vec![(3, 1.0)]).unwrap(),
        ];
        let p = build_polygon(&terms, 1, o(1, 1), &[o(1, 1)]).unwrap();
        assert_eq!(p.vertices, vec![(r(1, 1), -1), (r(3, 1), 0), (r(4, 1), 3)]);
        assert_eq!(p.slopes, vec![r(1, 2), r(3, 1)]);
        assert_eq!(p.k1_inv, r(2, 1));
        assert_eq!(k1_inverse(&terms, 1, o(1, 1), &[o(1, 1)]).unwrap(), r(2, 1));
    }

    const ORDERS: [(i64, i64); 4] = [(0, 1), (1, 2), (1, 1), (2, 1)];

    prop_compose! {
        fn admissible_terms()(k in 1usize..=4, dim in 1usize..=2)
            (k in Just(k),
             raw in prop::collection::vec((0usize..=6, prop::collection::vec(0usize..=4, dim), 0usize..=3), 0..=6),
             s0 in 0usize..4, s in prop::collection::vec(0usize..4, dim))
            -> (usize, Vec<OperatorTerm>, Order, Vec<Order>)
        {
            let terms = raw.into_iter().filter_map(|(j, alpha, ord)| {
                let j = j.min(k + 2);
                (ord + k > j).then(|| OperatorTerm::new(j, alpha, vec![(ord, 1.0)]).unwrap())
            }).collect();
            let ord = |i: usize| Order::new(ORDERS[i].0, ORDERS[i].1).unwrap();
            (k, terms, ord(s0), s.into_iter().map(ord).collect())
        }
    }

    proptest! {
        #[test]
        fn geometry_matches_formula((k, terms, s0, s) in admissible_terms()) {
            prop_assert!(check_condition_a(&terms, k));
            let p = build_polygon(&terms, k, s0, &s).unwrap();
            prop_assert_eq!(p.k1_inv, k1_inverse(&terms, k, s0, &s).unwrap());
            prop_assert!(p.slopes.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(p.slopes.iter().all(|m| m.is_positive()));
        }

        #[test]
        fn adding_terms_never_lowers_k1_inverse((k, terms, s0, s) in admissible_terms(), extra in 0usize..=3) {
            let before = k1_inverse(&terms, k, s0, &s).unwrap();
            let mut more = terms.clone();
            more.push(OperatorTerm::new(0, vec![extra; s.len()], vec![(0, 2.0)]).unwrap());
            let after = k1_inverse(&more, k, s0, &s).unwrap();
            prop_assert!(after >= before);
            let hull = build_polygon(&more, k, s0, &s).unwrap();
            prop_assert_eq!(hull.k1_inv, after);
        }

        #[test]
        fn scaling_orders_scales_k1_inverse((k, terms, s0, s) in admissible_terms(), lam in 1i64..=4) {
            let scale = |o: Order| Order::from_rational(o.value() * lam).unwrap();
            let base = k1_inverse(&terms, k, s0, &s).unwrap();
            let scaled_s: Vec<Order> = s.iter().map(|&o| scale(o)).collect();
            let scaled = k1_inverse(&terms, k, scale(s0), &scaled_s).unwrap();
            prop_assert_eq!(scaled, base * lam);
            let p = build_polygon(&terms, k, s0, &s).unwrap();
            let q = build_polygon(&terms, k, scale(s0), &scaled_s).unwrap();
            for (a, b) in p.points.iter().zip(&q.points) {
                prop_assert_eq!(a.0 * lam, b.0);
            }
        }
    }
}
