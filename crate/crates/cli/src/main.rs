//! `momentpde` command-line front end.
//!
//! Exit status: 0 for success or a passing verdict, 1 for a failing
//! verdict, 2 for input errors and unmet hypotheses.

use clap::{Parser, Subcommand, ValueEnum};
use momentpde::growth::{default_window, fit_order_logs, norm_sequence, verify_theorem_order, GrowthFit};
use momentpde::io::{format_value, read_coefficients, write_coefficients, ProblemFile};
use momentpde::norms::{verify_norm_suite, Verdict};
use momentpde::polygon::{condition_a_violation, rational_string, Order};
use momentpde::sequences::{
    check_lc, mg_witness, star_witness, verify_lemma_suite, Family, LemmaStatus, MomentSequence, DEFAULT_N_CAP,
};
use momentpde::solver::{residual, solve_constant, solve_variable};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "momentpde", version, about = "Formal solutions and growth orders of moment PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Newton polygon vertices, slopes and 1/k1 of a problem file.
    Polygon {
        file: PathBuf,
        /// Also write an SVG sketch of the polygon.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Solve a problem file and write its coefficients as CSV.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Variable)]
        method: Method,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the growth order of a coefficient CSV.
    Estimate {
        coeffs: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        /// Regression window `a:b`; defaults to `[N_t/4, N_t]`.
        #[arg(long)]
        window: Option<String>,
        /// Target order 1/k1, e.g. `1` or `1/2`.
        #[arg(long)]
        k1inv: String,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Require the fitted order to reach the target as well.
        #[arg(long)]
        sharp: bool,
        #[command(flatten)]
        reference: FamilyArgs,
    },
    /// Witness (lc), (mg) and (⋆) for a sequence.
    CheckSeq {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
    },
    /// Run the sequence lemma suite, the norm suite, or a problem's growth check.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 40)]
        nmax: usize,
        /// Truncation caps for the norm suite.
        #[arg(long, default_value_t = 30)]
        caps: usize,
        /// Problem file for `--suite order`.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Variable,
    Constant,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemmas,
    Norms,
    Order,
}

#[derive(clap::Args)]
struct FamilyArgs {
    /// factorial, gevrey, gevrey_log, q_factorial or parity_factorial.
    #[arg(long, default_value = "factorial")]
    family: String,
    /// Comma-separated parameters: `s` (gevrey), `s,p` (gevrey_log), `q` (q_factorial).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family, Failure> {
        let p = &self.params;
        let want = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(Failure::Input(format!(
                    "family {} takes {n} parameter(s), got {}",
                    self.family,
                    p.len()
                )))
            }
        };
        match self.family.as_str() {
            "factorial" => want(0).map(|_| Family::Factorial),
            "parity_factorial" => want(0).map(|_| Family::ParityFactorial),
            "gevrey" => want(1).map(|_| Family::Gevrey { s: p[0] }),
            "gevrey_log" => want(2).map(|_| Family::GevreyLog { s: p[0], p: p[1] }),
            "q_factorial" => want(1).map(|_| Family::QFactorial { q: p[0] }),
            other => Err(Failure::Input(format!("unknown family {other:?}"))),
        }
    }

    fn sequence(&self, n_cap: usize) -> Result<MomentSequence, Failure> {
        Ok(MomentSequence::new(self.family()?, n_cap)?)
    }
}

enum Failure {
    /// Exit status 1.
    Verdict,
    /// Exit status 2.
    Input(String),
}

impl From<momentpde::Error> for Failure {
    fn from(e: momentpde::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn base_n_cap() -> Result<usize, Failure> {
    match std::env::var("MOMENTPDE_NCAP") {
        Ok(v) => v
            .trim()
            .parse()
            .ok()
            .filter(|n: &usize| *n >= 1)
            .ok_or_else(|| Failure::Input(format!("MOMENTPDE_NCAP must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_N_CAP),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<momentpde::io::LoadedProblem, Failure> {
    let file = ProblemFile::parse(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(file.into_problem(base_n_cap()?)?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn parse_window(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Input(format!("window must be a:b, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn verdict_row(fit: &GrowthFit, k1_inv: f64, pass: bool) -> String {
    format!(
        "sigma_hat,logH,logC,rms,k1_inv,verdict\n{},{},{},{},{},{}\n",
        format_value(fit.sigma_hat),
        format_value(fit.log_h),
        format_value(fit.log_c),
        format_value(fit.rms),
        format_value(k1_inv),
        if pass { "PASS" } else { "FAIL" }
    )
}

fn verdict(pass: bool) -> Result<(), Failure> {
    if pass {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_polygon(file: &Path, svg: Option<&Path>) -> Result<(), Failure> {
    let p = load(file)?.problem;
    if let Some(e) = condition_a_violation(&p.terms, p.k) {
        return Err(e.into());
    }
    let poly = p.polygon()?;
    let mut out = String::from("item,x,y\n");
    for (x, y) in &poly.points {
        let _ = writeln!(out, "point,{},{y}", rational_string(*x));
    }
    for (x, y) in &poly.vertices {
        let _ = writeln!(out, "vertex,{},{y}", rational_string(*x));
    }
    for m in &poly.slopes {
        let _ = writeln!(out, "slope,{}", rational_string(*m));
    }
    let _ = writeln!(out, "k1_inv,{}", rational_string(poly.k1_inv));
    out.push_str("condition_a,ok\n");
    if let Some(path) = svg {
        fs::write(path, poly.to_svg()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    emit(None, out.as_bytes())
}

fn cmd_solve(file: &Path, method: Method, out: Option<&Path>) -> Result<(), Failure> {
    let p = load(file)?.problem;
    let u = match method {
        Method::Variable => solve_variable(&p, p.n_t)?,
        Method::Constant => solve_constant(&p, p.n_t)?,
    };
    let r = residual(&p, &u)?;
    let mut buf = Vec::new();
    write_coefficients(&mut buf, &u, Some(r))?;
    emit(out, &buf)
}

fn cmd_estimate(
    coeffs: &Path,
    radius: f64,
    window: Option<&str>,
    k1inv: &str,
    tol: f64,
    sharp: bool,
    reference: &FamilyArgs,
) -> Result<(), Failure> {
    let k1_inv = Order::parse(k1inv)?.to_f64();
    let file = fs::File::open(coeffs).map_err(|e| Failure::Input(format!("{}: {e}", coeffs.display())))?;
    let (u, _) = read_coefficients(file)?;
    let window = match window {
        Some(w) => parse_window(w)?,
        None => default_window(u.n_t()),
    };
    let m = reference.sequence(base_n_cap()?.max(u.n_t()))?;
    let logs = norm_sequence(&u, radius)?.log_values;
    let fit = fit_order_logs(&logs, &m, window)?;
    let pass = fit.verdict(k1_inv, tol, sharp);
    emit(None, verdict_row(&fit, k1_inv, pass).as_bytes())?;
    verdict(pass)
}

fn cmd_check_seq(family: &FamilyArgs, nmax: usize) -> Result<(), Failure> {
    let seq = family.sequence(base_n_cap()?.max(nmax))?;
    let lc = check_lc(&seq, nmax)?;
    let mg = mg_witness(&seq, nmax)?;
    let star = star_witness(&seq, nmax)?;
    let mut out = format!("property,value\nfamily,{}\nn_max,{nmax}\nlc,{}\n", seq.family().tag(), lc.holds);
    if let Some(n) = lc.failing_index() {
        let _ = writeln!(out, "lc_first_failure,{n}");
    }
    let constant = |w: &momentpde::sequences::PropertyWitness| match w.constant {
        Some(c) if w.holds => format_value(c),
        _ => "none".into(),
    };
    let _ = writeln!(out, "mg_B,{}", constant(&mg));
    let _ = writeln!(out, "star_b,{}", constant(&star));
    emit(None, out.as_bytes())
}

fn cmd_verify(
    suite: Suite,
    family: &FamilyArgs,
    nmax: usize,
    caps: usize,
    problem: Option<&Path>,
) -> Result<(), Failure> {
    match suite {
        Suite::Lemmas => {
            let seq = family.sequence(base_n_cap()?.max(nmax))?;
            let report = verify_lemma_suite(&seq, nmax)?;
            let mut out = String::from("lemma,status,checked,detail\n");
            let mut pass = true;
            for o in &report.outcomes {
                let (status, detail) = match &o.status {
                    LemmaStatus::Pass => ("PASS", String::new()),
                    LemmaStatus::Fail { detail } => {
                        pass = false;
                        ("FAIL", detail.clone())
                    }
                    LemmaStatus::Skipped { reason } => ("SKIPPED", reason.clone()),
                };
                let _ = writeln!(out, "{},{status},{},{}", o.lemma.name(), o.checked, csv_text(&detail));
            }
            emit(None, out.as_bytes())?;
            verdict(pass)
        }
        Suite::Norms => {
            let seq = family.sequence(base_n_cap()?.max(2 * caps))?;
            let checks = verify_norm_suite(&seq, caps)?;
            let mut out = String::from("check,status,detail\n");
            let mut worst = 0;
            for c in &checks {
                let (status, detail, rank) = match &c.verdict {
                    Verdict::Pass => ("PASS", "", 0),
                    Verdict::Fail { detail } => ("FAIL", detail.as_str(), 1),
                    Verdict::HypothesisFail { detail } => ("HYPOTHESIS_FAIL", detail.as_str(), 2),
                };
                worst = worst.max(rank);
                let _ = writeln!(out, "{},{status},{}", csv_text(&c.name), csv_text(detail));
            }
            emit(None, out.as_bytes())?;
            match worst {
                0 => Ok(()),
                1 => Err(Failure::Verdict),
                _ => Err(Failure::Input("a norm check hypothesis does not hold".into())),
            }
        }
        Suite::Order => {
            let path = problem.ok_or_else(|| Failure::Input("--suite order needs --problem".into()))?;
            let loaded = load(path)?;
            let p = &loaded.problem;
            let e = &loaded.estimator;
            let u = solve_variable(p, p.n_t)?;
            let check = verify_theorem_order(p, &u, e.radius, e.tol, e.sharp, e.window)?;
            emit(None, verdict_row(&check.fit, check.k1_inv, check.pass).as_bytes())?;
            verdict(check.pass)
        }
    }
}

/// Quotes a free-text field when it holds a separator.
fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Polygon { file, svg } => cmd_polygon(file, svg.as_deref()),
        Command::Solve { file, method, out } => cmd_solve(file, *method, out.as_deref()),
        Command::Estimate {
            coeffs,
            radius,
            window,
            k1inv,
            tol,
            sharp,
            reference,
        } => cmd_estimate(coeffs, *radius, window.as_deref(), k1inv, *tol, *sharp, reference),
        Command::CheckSeq { family, nmax } => cmd_check_seq(family, *nmax),
        Command::Verify {
            suite,
            family,
            nmax,
            caps,
            problem,
        } => cmd_verify(*suite, family, *nmax, *caps, problem.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("momentpde: {msg}");
            ExitCode::from(2)
        }
    }
}
