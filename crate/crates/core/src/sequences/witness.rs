//! Finite-range witnesses for (lc), (mg), (⋆) and for "m is an
//! (M_n)-sequence of order s". Every witness carries the range it was
//! computed on; nothing here is an asymptotic statement.

use super::{MomentSequence, LOG_EPS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    /// moderate growth: `M_{n+k} ≤ B^{n+k} M_n M_k`
    Mg,
    /// `M_{n+k} ≥ b^{n+k} M_n M_k`
    Star,
    /// logarithmic convexity: `M_n² ≤ M_{n-1} M_{n+1}`
    Lc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyWitness {
    pub property: Property,
    /// `B` for (mg), `b` for (⋆), `None` for (lc).
    pub constant: Option<f64>,
    pub holds: bool,
    /// For (lc), the neighbour pair `(n-1, n+1)` around the first failing
    /// index `n`.
    pub first_failure: Option<(usize, usize)>,
    pub n_max: usize,
}

impl PropertyWitness {
    /// First index `n` at which (lc) fails.
    pub fn failing_index(&self) -> Option<usize> {
        match (self.property, self.first_failure) {
            (Property::Lc, Some((lo, _))) => Some(lo + 1),
            _ => None,
        }
    }
}

fn require_cap(seq: &MomentSequence, needed: usize) -> Result<()> {
    if needed > seq.n_cap() {
        Err(Error::IndexBeyondCap {
            index: needed,
            cap: seq.n_cap(),
        })
    } else {
        Ok(())
    }
}

/// Checks `log M_{n-1} + log M_{n+1} - 2 log M_n ≥ -ε` for `1 ≤ n ≤ n_max`.
pub fn check_lc(seq: &MomentSequence, n_max: usize) -> Result<PropertyWitness> {
    require_cap(seq, n_max + 1)?;
    let l = seq.log_values();
    let failing = (1..=n_max).find(|&n| l[n - 1] + l[n + 1] - 2.0 * l[n] < -LOG_EPS);
    Ok(PropertyWitness {
        property: Property::Lc,
        constant: None,
        holds: failing.is_none(),
        first_failure: failing.map(|n| (n - 1, n + 1)),
        n_max,
    })
}

// log (M_{n+k}/(M_n M_k))^{1/(n+k)} over all 1 ≤ n + k ≤ n_max.
fn growth_exponents(seq: &MomentSequence, n_max: usize) -> impl Iterator<Item = f64> + '_ {
    let l = seq.log_values();
    (1..=n_max).flat_map(move |total| {
        (0..=total).map(move |n| (l[total] - l[n] - l[total - n]) / total as f64)
    })
}

/// Smallest `B` with `M_{n+k} ≤ B^{n+k} M_n M_k` on the grid `n + k ≤ n_max`.
pub fn mg_witness(seq: &MomentSequence, n_max: usize) -> Result<PropertyWitness> {
    require_cap(seq, n_max)?;
    let log_b = growth_exponents(seq, n_max).fold(f64::NEG_INFINITY, f64::max);
    Ok(PropertyWitness {
        property: Property::Mg,
        constant: Some(log_b.exp()),
        holds: log_b.is_finite(),
        first_failure: None,
        n_max,
    })
}

/// Largest `b` with `M_{n+k} ≥ b^{n+k} M_n M_k` on the grid `n + k ≤ n_max`.
pub fn star_witness(seq: &MomentSequence, n_max: usize) -> Result<PropertyWitness> {
    require_cap(seq, n_max)?;
    let log_b = growth_exponents(seq, n_max).fold(f64::INFINITY, f64::min);
    Ok(PropertyWitness {
        property: Property::Star,
        constant: Some(log_b.exp()),
        holds: log_b.is_finite(),
        first_failure: None,
        n_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// `𝔞^n M_n^s ≤ m(n) ≤ 𝔄^n M_n^s`
    Plain,
    /// `𝔞 (M_n/M_{n-1})^s ≤ m(n)/m(n-1) ≤ 𝔄 (M_n/M_{n-1})^s`
    Regular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderWitness {
    pub s: f64,
    pub a_lo: f64,
    pub a_hi: f64,
    pub n_max: usize,
    pub kind: WitnessKind,
    /// Regular witnesses only: the lower constant keeps shrinking across
    /// the range, so no uniform positive `𝔞` is in sight.
    pub degenerate: bool,
}

impl OrderWitness {
    /// Re-checks the defining inequality on the whole range, in log space.
    pub fn holds_for(&self, m: &MomentSequence, reference: &MomentSequence) -> Result<bool> {
        require_cap(m, self.n_max)?;
        require_cap(reference, self.n_max)?;
        let (llo, lhi) = (self.a_lo.ln(), self.a_hi.ln());
        let tol = |x: f64| LOG_EPS * (1.0 + x.abs());
        let ok = match self.kind {
            WitnessKind::Plain => (0..=self.n_max).all(|n| {
                let lm = m.log_value(n).unwrap();
                let lref = self.s * reference.log_value(n).unwrap();
                let nn = n as f64;
                nn * llo + lref <= lm + tol(lm) && lm <= nn * lhi + lref + tol(lm)
            }),
            WitnessKind::Regular => (1..=self.n_max).all(|n| {
                let lr = m.log_ratio(n).unwrap();
                let lref = self.s * reference.log_ratio(n).unwrap();
                llo + lref <= lr + tol(lr) && lr <= lhi + lref + tol(lr)
            }),
        };
        Ok(ok)
    }
}

/// Extreme values of `(m(n)/M_n^s)^{1/n}` over `1 ≤ n ≤ n_max`.
pub fn order_witness(
    m: &MomentSequence,
    reference: &MomentSequence,
    s: f64,
    n_max: usize,
) -> Result<OrderWitness> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    require_cap(m, n_max)?;
    require_cap(reference, n_max)?;
    let (lo, hi) = (1..=n_max)
        .map(|n| (m.log_value(n).unwrap() - s * reference.log_value(n).unwrap()) / n as f64)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    Ok(OrderWitness {
        s,
        a_lo: lo.exp(),
        a_hi: hi.exp(),
        n_max,
        kind: WitnessKind::Plain,
        degenerate: false,
    })
}

/// Extreme values of `(m(n)/m(n-1)) / (M_n/M_{n-1})^s` over `1 ≤ n ≤ n_max`.
///
/// The lower constant is flagged degenerate when its minimum over the
/// upper half of the range drops below 3/4 of its minimum over the lower
/// half.
pub fn regularity_witness(
    m: &MomentSequence,
    reference: &MomentSequence,
    s: f64,
    n_max: usize,
) -> Result<OrderWitness> {
    if n_max < 2 {
        return Err(Error::InvalidParameter("n_max must be at least 2".into()));
    }
    require_cap(m, n_max)?;
    require_cap(reference, n_max)?;
    let logs: Vec<f64> = (1..=n_max)
        .map(|n| m.log_ratio(n).unwrap() - s * reference.log_ratio(n).unwrap())
        .collect();
    let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |xs: &[f64]| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = logs.len() / 2;
    let degenerate = min(&logs[half..]) < min(&logs[..half]) + 0.75f64.ln();
    Ok(OrderWitness {
        s,
        a_lo: min(&logs).exp(),
        a_hi: max(&logs).exp(),
        n_max,
        kind: WitnessKind::Regular,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::Family;
    use approx::assert_relative_eq;

    fn seq(f: Family) -> MomentSequence {
        MomentSequence::new(f, 64).unwrap()
    }

    #[test]
    fn lc_verdicts() {
        assert!(check_lc(&seq(Family::Factorial), 40).unwrap().holds);
        assert!(check_lc(&seq(Family::GevreyLog { s: 1.0, p: 1.0 }), 40).unwrap().holds);
        let parity = check_lc(&seq(Family::ParityFactorial), 40).unwrap();
        assert!(!parity.holds);
        assert_eq!(parity.failing_index(), Some(2));
        assert!(check_lc(&seq(Family::Factorial), 64).is_err());
    }

    #[test]
    fn mg_and_star_for_factorial() {
        let f = seq(Family::Factorial);
        let mg = mg_witness(&f, 10).unwrap();
        // brute force over the grid, independent of the fold above
        let mut best = 0f64;
        for n in 0..=10u32 {
            for k in 0..=(10 - n) {
                if n + k == 0 {
                    continue;
                }
                let binom = (1..=k).fold(1.0, |acc, i| acc * (n + i) as f64 / i as f64);
                best = best.max(binom.powf(1.0 / (n + k) as f64));
            }
        }
        assert_relative_eq!(mg.constant.unwrap(), best, epsilon = 1e-12);
        assert_relative_eq!(mg.constant.unwrap(), 252f64.powf(0.1), epsilon = 1e-12);
        for n_max in [1, 5, 20, 63] {
            let star = star_witness(&f, n_max).unwrap();
            assert_relative_eq!(star.constant.unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn parity_has_mg_and_star() {
        let p = seq(Family::ParityFactorial);
        let mg = mg_witness(&p, 20).unwrap();
        let star = star_witness(&p, 20).unwrap();
        assert!(mg.holds && star.holds);
        assert!(mg.constant.unwrap().is_finite());
        assert!(star.constant.unwrap() > 0.0);
        assert!(star.constant.unwrap() <= 1.0 && mg.constant.unwrap() >= 1.0);
    }

    #[test]
    fn order_witness_examples() {
        let g2 = seq(Family::Gevrey { s: 2.0 });
        let f = seq(Family::Factorial);
        let w = order_witness(&g2, &f, 2.0, 60).unwrap();
        // (2n)!/(n!)^2 = C(2n, n); extremes of C(2n,n)^{1/n} by direct evaluation
        let c = |n: u32| (1..=n).fold(1.0, |acc, i| acc * (n + i) as f64 / i as f64);
        let exact_hi = (1..=60).map(|n| c(n).powf(1.0 / n as f64)).fold(0.0, f64::max);
        assert_relative_eq!(w.a_lo, 2.0, epsilon = 1e-12);
        assert_relative_eq!(w.a_hi, exact_hi, epsilon = 1e-10);
        assert_relative_eq!(w.a_hi, 3.829, epsilon = 1e-3);
        assert!(w.holds_for(&g2, &f).unwrap());

        let q = seq(Family::QFactorial { q: 0.5 });
        let wq = order_witness(&q, &f, 0.0, 60).unwrap();
        assert_relative_eq!(wq.a_lo, 1.0, epsilon = 1e-12);
        assert!(wq.a_hi <= 2.0);
        assert!(wq.holds_for(&q, &f).unwrap());

        let id = order_witness(&f, &f, 1.0, 40).unwrap();
        assert_relative_eq!(id.a_lo, 1.0, epsilon = 1e-12);
        assert_relative_eq!(id.a_hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn regularity_examples() {
        let g2 = seq(Family::Gevrey { s: 2.0 });
        let f = seq(Family::Factorial);
        let w = regularity_witness(&g2, &f, 2.0, 60).unwrap();
        // ratio 2n(2n-1)/n² = 4 - 2/n lies in [2, 4)
        assert_relative_eq!(w.a_lo, 2.0, epsilon = 1e-12);
        assert_relative_eq!(w.a_hi, 4.0 - 2.0 / 60.0, epsilon = 1e-12);
        assert!(!w.degenerate);
        assert!(w.holds_for(&g2, &f).unwrap());

        let p = seq(Family::ParityFactorial);
        let wp = regularity_witness(&p, &f, 1.0, 40).unwrap();
        assert!(wp.degenerate);

        let id = regularity_witness(&f, &f, 1.0, 40).unwrap();
        assert_relative_eq!(id.a_lo, 1.0, epsilon = 1e-12);
        assert_relative_eq!(id.a_hi, 1.0, epsilon = 1e-12);
        assert!(!id.degenerate);

        let q = seq(Family::QFactorial { q: 0.5 });
        assert!(!regularity_witness(&q, &f, 0.0, 60).unwrap().degenerate);
    }
}
