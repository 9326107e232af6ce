//! Problem fixtures shared by the benchmarks.

use momentpde::polygon::{OperatorTerm, Order};
use momentpde::sequences::{Family, MomentSequence};
use momentpde::series::{MultiPoly, TimeSeries};
use momentpde::solver::{CauchyProblem, Forcing, ForcingConvention};

fn order(p: i64, q: i64) -> Order {
    Order::new(p, q).unwrap()
}

/// `∂_t u = ∂_z² u`, `u(0,z) = Σ z^k` truncated at `cap`.
pub fn heat(n_t: usize, cap: usize) -> CauchyProblem {
    let n_cap = cap.max(n_t + 1).max(64);
    CauchyProblem {
        k: 1,
        terms: vec![OperatorTerm::constant(0, vec![2], -1.0).unwrap()],
        forcing: Forcing::zero(&[cap]),
        initial: vec![MultiPoly::geometric(&[cap], 1.0, 1.0)],
        m0: MomentSequence::factorial(n_cap),
        m: vec![MomentSequence::factorial(n_cap)],
        reference: MomentSequence::factorial(n_cap),
        s0: order(1, 1),
        s: vec![order(1, 1)],
        n_t,
        caps: vec![cap],
    }
}

/// Two-variable q-problem with zero data and geometric forcing.
pub fn plane(n_t: usize, cap: usize) -> CauchyProblem {
    let n_cap = cap.max(n_t + 2).max(64);
    let caps = [cap, cap];
    let forcing = (0..=n_t)
        .map(|n| MultiPoly::from_fn(&caps, |a| 0.5f64.powi((n + a[0] + a[1]) as i32)))
        .collect();
    CauchyProblem {
        k: 2,
        terms: vec![
            OperatorTerm::constant(0, vec![1, 0], -1.0).unwrap(),
            OperatorTerm::constant(0, vec![0, 1], 0.5).unwrap(),
        ],
        forcing: Forcing {
            convention: ForcingConvention::Weighted,
            series: TimeSeries::new(forcing).unwrap(),
        },
        initial: vec![MultiPoly::zeros(&caps); 2],
        m0: MomentSequence::new(Family::QFactorial { q: 0.5 }, n_cap).unwrap(),
        m: vec![
            MomentSequence::factorial(n_cap),
            MomentSequence::new(Family::Gevrey { s: 0.5 }, n_cap).unwrap(),
        ],
        reference: MomentSequence::factorial(n_cap),
        s0: order(0, 1),
        s: vec![order(1, 1), order(1, 2)],
        n_t,
        caps: caps.to_vec(),
    }
}
