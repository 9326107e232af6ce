//! Problem files (JSON) and the coefficient CSV interchange format.

use crate::error::{Error, Result};
use crate::polygon::{OperatorTerm, Order};
use crate::sequences::{Family, MomentSequence, DEFAULT_N_CAP};
use crate::series::{indices, MultiPoly, TimeSeries};
use crate::solver::{CauchyProblem, Forcing, ForcingConvention};
use serde::Deserialize;
use std::io::{Read, Write};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub meta: Meta,
    pub sequences: SequencesSpec,
    pub orders: OrdersSpec,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    pub initial: Vec<PolySpec>,
    #[serde(default)]
    pub estimator: EstimatorSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N_t")]
    pub n_t: usize,
    pub caps: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequencesSpec {
    pub m0: FamilySpec,
    pub m: Vec<FamilySpec>,
    #[serde(rename = "M")]
    pub reference: FamilySpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    // braced so that stray keys are rejected
    Factorial {},
    Gevrey { s: f64 },
    GevreyLog { s: f64, p: f64 },
    QFactorial { q: f64 },
    ParityFactorial {},
    Table { values: Vec<f64> },
}

impl FamilySpec {
    pub fn family(&self) -> Family {
        match self {
            FamilySpec::Factorial {} => Family::Factorial,
            FamilySpec::Gevrey { s } => Family::Gevrey { s: *s },
            FamilySpec::GevreyLog { s, p } => Family::GevreyLog { s: *s, p: *p },
            FamilySpec::QFactorial { q } => Family::QFactorial { q: *q },
            FamilySpec::ParityFactorial {} => Family::ParityFactorial,
            FamilySpec::Table { values } => Family::Table { values: values.clone() },
        }
    }

    /// Tables fix their own cap; other families take `n_cap`.
    fn build(&self, n_cap: usize) -> Result<MomentSequence> {
        match self {
            FamilySpec::Table { values } => {
                let cap = values.len().saturating_sub(1);
                if cap < n_cap {
                    return Err(Error::TableTooShort {
                        needed: n_cap + 1,
                        got: values.len(),
                    });
                }
                MomentSequence::new(self.family(), cap)
            }
            _ => MomentSequence::new(self.family(), n_cap),
        }
    }
}

/// A rational order, given as `"p/q"`, an integer or an exact decimal.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Text(String),
    Number(f64),
}

impl OrderSpec {
    pub fn order(&self) -> Result<Order> {
        match self {
            OrderSpec::Text(t) => Order::parse(t),
            OrderSpec::Number(x) => Order::from_f64(*x),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdersSpec {
    pub s0: OrderSpec,
    pub s: Vec<OrderSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub j: usize,
    pub alpha: Vec<usize>,
    /// `[[power, value], ...]`
    pub coeff: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometric {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

/// A spatial polynomial: `"zero"`, `{"geometric": {"C", "D"}}` for
/// `C Σ (D z)^α`, or `{"coefficients": [[α_1, …, α_N, value], ...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolySpec {
    Zero,
    Geometric(Geometric),
    Coefficients(Vec<Vec<f64>>),
}

impl PolySpec {
    pub fn build(&self, caps: &[usize]) -> Result<MultiPoly> {
        match self {
            PolySpec::Zero => Ok(MultiPoly::zeros(caps)),
            PolySpec::Geometric(g) => Ok(MultiPoly::geometric(caps, g.c, g.d)),
            PolySpec::Coefficients(rows) => {
                let mut p = MultiPoly::zeros(caps);
                for row in rows {
                    if row.len() != caps.len() + 1 {
                        return Err(Error::Schema(format!(
                            "coefficient row {row:?} needs {} multi-index entries and a value",
                            caps.len()
                        )));
                    }
                    let alpha = row[..caps.len()].iter().map(|x| index(*x)).collect::<Result<Vec<_>>>()?;
                    p.set(&alpha, row[caps.len()])?;
                }
                Ok(p)
            }
        }
    }
}

fn index(x: f64) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        Err(Error::Schema(format!("{x} is not a non-negative integer index")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionSpec {
    Plain,
    Weighted,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub convention: ConventionSpec,
    /// `[[n, α_1, …, α_N, value], ...]`
    #[serde(default)]
    pub coefficients: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `f_n = C Σ_α D^{n+|α|} z^α` for `n ≤ N_t`.
    Geometric(Geometric),
}

impl ForcingSpec {
    pub fn build(&self, caps: &[usize], n_t: usize) -> Result<Forcing> {
        let convention = match self.convention {
            ConventionSpec::Plain => ForcingConvention::Plain,
            ConventionSpec::Weighted => ForcingConvention::Weighted,
        };
        let coeffs = match (&self.coefficients, &self.generator) {
            (Some(_), Some(_)) => {
                return Err(Error::Schema("forcing takes coefficients or a generator, not both".into()))
            }
            (None, None) => vec![MultiPoly::zeros(caps)],
            (None, Some(GeneratorSpec::Geometric(g))) => (0..=n_t)
                .map(|n| MultiPoly::from_fn(caps, |a| g.c * g.d.powi((n + a.iter().sum::<usize>()) as i32)))
                .collect(),
            (Some(rows), None) => {
                let mut out: Vec<MultiPoly> = vec![MultiPoly::zeros(caps)];
                for row in rows {
                    if row.len() != caps.len() + 2 {
                        return Err(Error::Schema(format!(
                            "forcing row {row:?} needs n, {} multi-index entries and a value",
                            caps.len()
                        )));
                    }
                    let n = index(row[0])?;
                    if out.len() <= n {
                        out.resize(n + 1, MultiPoly::zeros(caps));
                    }
                    let alpha = row[1..=caps.len()].iter().map(|x| index(*x)).collect::<Result<Vec<_>>>()?;
                    out[n].set(&alpha, row[caps.len() + 1])?;
                }
                out
            }
        };
        Ok(Forcing {
            convention,
            series: TimeSeries::new(coeffs)?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub window: Option<(usize, usize)>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub sharp: bool,
}

fn default_radius() -> f64 {
    0.1
}

fn default_tol() -> f64 {
    0.05
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        Self {
            radius: default_radius(),
            window: None,
            tol: default_tol(),
            sharp: false,
        }
    }
}

/// A problem ready for the solvers, with its estimator settings.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: CauchyProblem,
    pub estimator: EstimatorSpec,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    /// Sequence cap: `base_n_cap`, raised to what the truncation needs.
    pub fn required_n_cap(&self, base_n_cap: usize) -> usize {
        let cap = self.meta.caps.iter().copied().max().unwrap_or(0);
        base_n_cap.max(self.meta.n_t + self.meta.k).max(cap)
    }

    pub fn into_problem(self, base_n_cap: usize) -> Result<LoadedProblem> {
        let Meta { n, k, n_t, caps } = self.meta.clone();
        if caps.len() != n {
            return Err(Error::Schema(format!("meta.caps has {} entries for N={n}", caps.len())));
        }
        let n_cap = self.required_n_cap(base_n_cap);
        let m0 = self.sequences.m0.build(n_cap)?;
        let m = self
            .sequences
            .m
            .iter()
            .map(|f| f.build(n_cap))
            .collect::<Result<Vec<_>>>()?;
        let reference = self.sequences.reference.build(n_cap)?;
        let s0 = self.orders.s0.order()?;
        let s = self.orders.s.iter().map(OrderSpec::order).collect::<Result<Vec<_>>>()?;
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm::new(t.j, t.alpha.clone(), t.coeff.clone()))
            .collect::<Result<Vec<_>>>()?;
        let forcing = match &self.forcing {
            Some(f) => f.build(&caps, n_t)?,
            None => Forcing::zero(&caps),
        };
        let initial = self.initial.iter().map(|p| p.build(&caps)).collect::<Result<Vec<_>>>()?;
        let e = &self.estimator;
        if !(e.radius >= 0.0) || !(e.tol >= 0.0) {
            return Err(Error::Schema(format!(
                "estimator radius {} and tol {} must be >= 0",
                e.radius, e.tol
            )));
        }
        let problem = CauchyProblem {
            k,
            terms,
            forcing,
            initial,
            m0,
            m,
            reference,
            s0,
            s,
            n_t,
            caps,
        };
        problem.validate()?;
        Ok(LoadedProblem {
            problem,
            estimator: self.estimator,
        })
    }
}

pub fn load_problem(text: &str) -> Result<LoadedProblem> {
    ProblemFile::parse(text)?.into_problem(DEFAULT_N_CAP)
}

/// Shortest round-trip text for `v`; exponent form outside `[1e-5, 1e15)`.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Writes `n,alpha_1..alpha_N,value` rows for every stored coefficient and,
/// when given, a final `residual,<value>` line.
pub fn write_coefficients<W: Write>(out: W, u: &TimeSeries, residual: Option<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    let mut header = vec!["n".to_string()];
    header.extend((1..=u.dim()).map(|i| format!("alpha_{i}")));
    header.push("value".into());
    w.write_record(&header).map_err(csv_err)?;
    for (n, c) in u.coeffs().iter().enumerate() {
        for alpha in indices(c.caps()) {
            let mut row = vec![n.to_string()];
            row.extend(alpha.iter().map(usize::to_string));
            row.push(format_value(c.get(&alpha).unwrap()));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    if let Some(r) = residual {
        w.write_record(["residual".to_string(), format_value(r)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

/// Reads the format of [`write_coefficients`]. Each order's caps are the
/// largest indices listed for it; absent entries are zero.
pub fn read_coefficients<R: Read>(input: R) -> Result<(TimeSeries, Option<f64>)> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    let header = r.headers().map_err(csv_err)?.clone();
    let dim = header.len().checked_sub(2).ok_or_else(|| Error::Csv("header too short".into()))?;
    let expected: Vec<String> = std::iter::once("n".to_string())
        .chain((1..=dim).map(|i| format!("alpha_{i}")))
        .chain(std::iter::once("value".to_string()))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Csv(format!("header must be {}", expected.join(","))));
    }
    let mut entries: Vec<Vec<(Vec<usize>, f64)>> = Vec::new();
    let mut residual = None;
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let at = |msg: String| Error::Csv(format!("row {}: {msg}", line + 2));
        if residual.is_some() {
            return Err(at("rows after the residual line".into()));
        }
        if rec.get(0) == Some("residual") {
            if rec.len() != 2 {
                return Err(at("residual line must be residual,<value>".into()));
            }
            residual = Some(parse_f64(&rec[1]).map_err(at)?);
            continue;
        }
        if rec.len() != dim + 2 {
            return Err(at(format!("{} fields, expected {}", rec.len(), dim + 2)));
        }
        let n: usize = rec[0].trim().parse().map_err(|_| at(format!("bad order {:?}", &rec[0])))?;
        let alpha = (1..=dim)
            .map(|i| rec[i].trim().parse::<usize>().map_err(|_| at(format!("bad index {:?}", &rec[i]))))
            .collect::<Result<Vec<_>>>()?;
        let v = parse_f64(&rec[dim + 1]).map_err(at)?;
        if entries.len() <= n {
            entries.resize(n + 1, Vec::new());
        }
        entries[n].push((alpha, v));
    }
    if entries.is_empty() {
        return Err(Error::Csv("no coefficient rows".into()));
    }
    let coeffs = entries
        .into_iter()
        .map(|rows| {
            let mut caps = vec![0; dim];
            for (a, _) in &rows {
                for (c, x) in caps.iter_mut().zip(a) {
                    *c = (*c).max(*x);
                }
            }
            let mut p = MultiPoly::zeros(&caps);
            for (a, v) in rows {
                p.set(&a, v)?;
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((TimeSeries::new(coeffs)?, residual))
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse().map_err(|_| format!("bad number {s:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"{
        "meta": {"N": 1, "K": 1, "N_t": 6, "caps": [12]},
        "sequences": {"m0": {"family": "factorial"}, "m": [{"family": "factorial"}], "M": {"family": "factorial"}},
        "orders": {"s0": "1", "s": ["1"]},
        "terms": [{"j": 0, "alpha": [2], "coeff": [[0, -1]]}],
        "initial": [{"geometric": {"C": 1, "D": 1}}],
        "estimator": {"radius": 0.0, "tol": 0.05, "sharp": true}
    }"#;

    #[test]
    fn loads_heat() {
        let p = load_problem(HEAT).unwrap();
        assert_eq!(p.problem.caps, vec![12]);
        assert_eq!(p.problem.k1_inverse().unwrap(), 1.into());
        assert!(p.estimator.sharp);
        assert_eq!(p.problem.m0.n_cap(), DEFAULT_N_CAP);
        assert!(p.problem.forcing.is_zero());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_shapes() {
        let extra = HEAT.replace("\"N_t\": 6", "\"N_t\": 6, \"bogus\": 1");
        assert!(matches!(load_problem(&extra), Err(Error::Schema(_))));
        let fam = HEAT.replace("{\"family\": \"factorial\"}, \"m\"", "{\"family\": \"factorial\", \"q\": 2}, \"m\"");
        assert!(matches!(load_problem(&fam), Err(Error::Schema(_))));
        let caps = HEAT.replace("\"caps\": [12]", "\"caps\": [12, 3]");
        assert!(matches!(load_problem(&caps), Err(Error::Schema(_))));
        let unknown = HEAT.replace("\"initial\"", "\"forcing\": {\"convention\": \"unweighted\"}, \"initial\"");
        assert!(matches!(load_problem(&unknown), Err(Error::Schema(_))));
    }

    #[test]
    fn orders_parse_exactly() {
        let half = HEAT.replace("\"s\": [\"1\"]", "\"s\": [0.5]");
        let p = load_problem(&half).unwrap();
        assert_eq!(p.problem.s[0], Order::new(1, 2).unwrap());
        let third = HEAT.replace("\"s\": [\"1\"]", "\"s\": [\"1/3\"]");
        assert_eq!(load_problem(&third).unwrap().problem.s[0], Order::new(1, 3).unwrap());
    }

    #[test]
    fn forcing_rows_and_generator() {
        let rows = HEAT.replace(
            "\"initial\"",
            "\"forcing\": {\"convention\": \"weighted\", \"coefficients\": [[2, 1, 3.5], [0, 0, 1]]}, \"initial\"",
        );
        let p = load_problem(&rows).unwrap().problem;
        assert_eq!(p.forcing.convention, ForcingConvention::Weighted);
        assert_eq!(p.forcing.series.n_t(), 2);
        assert_eq!(p.forcing.series.coeff(2).unwrap().get(&[1]), Some(3.5));
        assert!(p.forcing.series.coeff(1).unwrap().is_zero());

        let gen = HEAT.replace(
            "\"initial\"",
            "\"forcing\": {\"convention\": \"plain\", \"generator\": {\"geometric\": {\"C\": 2, \"D\": 0.5}}}, \"initial\"",
        );
        let p = load_problem(&gen).unwrap().problem;
        assert_eq!(p.forcing.series.n_t(), 6);
        assert_eq!(p.forcing.series.coeff(3).unwrap().get(&[2]), Some(2.0 * 0.5f64.powi(5)));
    }

    #[test]
    fn n_cap_grows_with_truncation() {
        let big = HEAT.replace("\"caps\": [12]", "\"caps\": [90]");
        assert_eq!(load_problem(&big).unwrap().problem.m[0].n_cap(), 90);
        let f = ProblemFile::parse(HEAT).unwrap();
        assert_eq!(f.into_problem(100).unwrap().problem.m0.n_cap(), 100);
    }

    #[test]
    fn csv_round_trip() {
        let u = TimeSeries::new(vec![
            MultiPoly::from_fn(&[2, 1], |a| a[0] as f64 - 0.25 * a[1] as f64),
            MultiPoly::from_fn(&[0, 0], |_| 1e300),
            MultiPoly::from_fn(&[1, 1], |a| 1.0 / (3 + a[0] + a[1]) as f64),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_coefficients(&mut buf, &u, Some(1.5e-17)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,alpha_1,alpha_2,value\n0,0,0,0\n"));
        assert!(text.ends_with("residual,1.5e-17\n"));
        let (back, r) = read_coefficients(&buf[..]).unwrap();
        assert_eq!(back, u);
        assert_eq!(r, Some(1.5e-17));
    }

    #[test]
    fn csv_errors() {
        assert!(read_coefficients("n,value\n".as_bytes()).is_err());
        assert!(read_coefficients("n,alpha_1,value\n0,x,1\n".as_bytes()).is_err());
        assert!(read_coefficients("n,alpha_1,value\nresidual,0\n0,0,1\n".as_bytes()).is_err());
        assert!(read_coefficients("n,alpha_1,value\n".as_bytes()).is_err());
    }
}
