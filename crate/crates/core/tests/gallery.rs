use momentpde::growth::{fit_order_logs, norm_sequence};
use momentpde::io::ProblemFile;
use momentpde::norms::polydisc_grid;
use momentpde::polygon::Order;
use momentpde::sequences::DEFAULT_N_CAP;
use momentpde::solver::{residual, solve_variable, CauchyProblem};
use num_rational::Rational64;
use std::path::PathBuf;

const GALLERY: [&str; 7] = ["heat", "wave", "q_heat", "variable", "heat_forced", "wave_forced", "plane_q"];

fn file(name: &str) -> ProblemFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(format!("{name}.json"));
    ProblemFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn load_at(name: &str, n_t: usize, cap: usize) -> CauchyProblem {
    let mut f = file(name);
    f.meta.n_t = n_t;
    f.meta.caps = vec![cap; f.meta.n];
    f.into_problem(DEFAULT_N_CAP).unwrap().problem
}

#[test]
fn every_gallery_file_solves_with_small_residual() {
    for name in GALLERY {
        let loaded = file(name).into_problem(DEFAULT_N_CAP).unwrap();
        let p = &loaded.problem;
        let u = solve_variable(p, p.n_t).unwrap();
        assert_eq!(u.n_t(), p.n_t);
        let r = residual(p, &u).unwrap();
        assert!(r <= 1e-12, "{name}: {r}");
    }
}

#[test]
fn gallery_orders() {
    let expect = [
        ("heat", Rational64::from(1)),
        ("wave", Rational64::from(0)),
        ("q_heat", Rational64::from(2)),
        ("variable", Rational64::new(1, 2)),
        ("plane_q", Rational64::new(1, 2)),
    ];
    for (name, k1_inv) in expect {
        let p = file(name).into_problem(DEFAULT_N_CAP).unwrap().problem;
        assert_eq!(p.k1_inverse().unwrap(), k1_inv, "{name}");
        assert_eq!(p.polygon().unwrap().k1_inv, k1_inv, "{name}");
    }
    let p = file("plane_q").into_problem(DEFAULT_N_CAP).unwrap().problem;
    assert_eq!(p.s[1], Order::new(1, 2).unwrap());
}

#[test]
fn q_heat_closed_form() {
    // u_n(0) = (2n)!/[n]_q!
    let p = load_at("q_heat", 30, 60);
    let u = solve_variable(&p, 30).unwrap();
    let q: f64 = 0.5;
    for n in 0..=30 {
        let two_n: f64 = (1..=2 * n).map(|k| k as f64).product();
        let qf: f64 = (1..=n).map(|k| (1.0 - q.powi(k as i32)) / (1.0 - q)).product();
        let got = u.coeff(n).unwrap().get(&[0]).unwrap();
        assert!((got - two_n / qf).abs() <= 1e-12 * got, "n={n}");
    }
}

#[test]
fn wave_even_orders_are_one() {
    // φ_0 = Σ z^k, φ_1 = 0: u_{2k}(0) = 1, u_{2k+1} = 0
    let p = load_at("wave", 20, 40);
    let u = solve_variable(&p, 20).unwrap();
    for n in 0..=20 {
        let v = u.coeff(n).unwrap().get(&[0]).unwrap();
        let expect = if n % 2 == 0 { 1.0 } else { 0.0 };
        assert!((v - expect).abs() <= 1e-14, "n={n}: {v}");
    }
}

#[test]
fn fitted_order_is_radius_robust() {
    for name in ["heat", "q_heat", "wave"] {
        let p = load_at(name, 40, 120);
        let u = solve_variable(&p, 40).unwrap();
        let sigmas: Vec<f64> = [0.0, 0.05, 0.1]
            .iter()
            .map(|r| {
                let logs = norm_sequence(&u, *r).unwrap().log_values;
                fit_order_logs(&logs, &p.reference, (10, 40)).unwrap().sigma_hat
            })
            .collect();
        let spread = sigmas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - sigmas.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread < 0.05, "{name}: {sigmas:?}");
    }
}

#[test]
fn norm_surrogate_dominates_grid_values() {
    let p = load_at("heat", 20, 40);
    let u = solve_variable(&p, 20).unwrap();
    for r in [0.05, 0.1, 0.5] {
        let v = norm_sequence(&u, r).unwrap().values();
        for (n, c) in u.coeffs().iter().enumerate() {
            for z in polydisc_grid(1, r, 8) {
                let x = c.eval(&z).unwrap().abs();
                assert!(x <= v[n] * (1.0 + 1e-12), "n={n}, z={z:?}");
            }
        }
    }
}
