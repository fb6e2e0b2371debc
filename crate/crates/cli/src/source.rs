//! Turning command-line arguments into a defining function and metric.

use std::collections::BTreeMap;

use num_complex::Complex64;
use twlab::linalg::CMat;
use twlab::{builtin_family, AmbientMetric, DefiningFunction, Error, Family};

use crate::SourceArgs;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    Assertion(Vec<String>),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Assertion(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "argument error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
            Failure::Assertion(list) => {
                write!(f, "{} check(s) failed", list.len())?;
                for item in list {
                    write!(f, "\n  - {item}")?;
                }
                Ok(())
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::NonReal { .. }
            | Error::UnboundParameter(_)
            | Error::UnknownFamily(_)
            | Error::InvalidParameter { .. }
            | Error::InvalidMetric(_)
            | Error::DimensionMismatch { .. }
            | Error::NotApplicable(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("I/O: {e}"))
    }
}

pub struct Surface {
    /// Family name, or "custom" for --rho.
    pub name: String,
    pub family: Option<Family>,
    pub params: BTreeMap<String, f64>,
    pub f: DefiningFunction,
    pub metric: AmbientMetric,
    pub metric_text: String,
}

impl Surface {
    pub fn n(&self) -> usize {
        self.f.dim() - 1
    }
}

fn collect_params(src: &SourceArgs) -> Result<BTreeMap<String, f64>, Failure> {
    let mut params = BTreeMap::new();
    for (k, v) in [("n", src.n), ("t", src.t), ("eps", src.eps)] {
        if let Some(v) = v {
            params.insert(k.to_string(), v);
        }
    }
    for item in &src.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects NAME=VALUE, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--set {k}: `{v}` is not a number")))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok(params)
}

fn infer_dim(text: &str) -> usize {
    let b = text.as_bytes();
    let mut dim = 2;
    for i in 0..b.len().saturating_sub(1) {
        let starts = i == 0 || !(b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_');
        let ends = i + 2 >= b.len() || !(b[i + 2].is_ascii_alphanumeric() || b[i + 2] == b'_');
        if starts && ends && b[i] == b'z' && b[i + 1].is_ascii_digit() {
            dim = dim.max((b[i + 1] - b'0') as usize);
        }
    }
    dim
}

pub fn parse_metric(
    text: &str,
    dim: usize,
    default: Option<AmbientMetric>,
) -> Result<AmbientMetric, Failure> {
    let metric = match text.trim() {
        "auto" => default.unwrap_or_else(|| AmbientMetric::identity(dim)),
        "identity" => AmbientMetric::identity(dim),
        t if t.starts_with("diag:") => {
            let d = t[5..]
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::Usage(format!("cannot read metric `{t}`")))?;
            AmbientMetric::diagonal(&d)?
        }
        t => {
            let rows: Vec<Vec<serde_json::Value>> = serde_json::from_str(t)
                .map_err(|e| Failure::Usage(format!("cannot read metric `{t}`: {e}")))?;
            let entry = |v: &serde_json::Value| -> Option<Complex64> {
                match v {
                    serde_json::Value::Number(x) => Some(Complex64::new(x.as_f64()?, 0.0)),
                    serde_json::Value::Array(p) if p.len() == 2 => {
                        Some(Complex64::new(p[0].as_f64()?, p[1].as_f64()?))
                    }
                    _ => None,
                }
            };
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Failure::Usage("metric matrix must be square".into()));
            }
            let mut m = CMat::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    m[(i, j)] =
                        entry(v).ok_or_else(|| Failure::Usage(format!("bad metric entry {v}")))?;
                }
            }
            AmbientMetric::new(m)?
        }
    };
    if metric.dim() != dim {
        return Err(Failure::Usage(format!(
            "metric is {0}x{0} but the ambient space is C^{dim}",
            metric.dim()
        )));
    }
    Ok(metric)
}

pub fn resolve(src: &SourceArgs) -> Result<Surface, Failure> {
    let params = collect_params(src)?;
    resolve_with(src, params)
}

pub fn resolve_with(src: &SourceArgs, params: BTreeMap<String, f64>) -> Result<Surface, Failure> {
    match (&src.family, &src.rho) {
        (Some(name), None) => {
            let family: Family = name.parse()?;
            let (f, metric) = builtin_family(name, &params)?;
            let metric = parse_metric(&src.metric, f.dim(), Some(metric))?;
            Ok(Surface {
                name: family.name().to_string(),
                family: Some(family),
                params,
                metric_text: src.metric.clone(),
                f,
                metric,
            })
        }
        (None, Some(text)) => {
            let dim = src.dim.unwrap_or_else(|| infer_dim(text));
            let bound = params
                .iter()
                .map(|(k, v)| (k.clone(), Complex64::new(*v, 0.0)))
                .collect();
            let f = DefiningFunction::parse_with_params(text, dim, bound)?;
            let metric = parse_metric(&src.metric, dim, None)?;
            Ok(Surface {
                name: "custom".into(),
                family: None,
                params,
                metric_text: src.metric.clone(),
                f,
                metric,
            })
        }
        _ => Err(Failure::Usage(
            "exactly one of --family and --rho is required".into(),
        )),
    }
}
