//! Serializable run reports. Complex numbers are written as `[re, im]`.
//! Summaries are computed from the sample records alone, so they can be
//! recomputed from a saved report.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::brieskorn::LinkSample;
use crate::gausscurv::{Lambda1Bound, PointRecord};

pub type Point = Vec<[f64; 2]>;

pub fn point(z: &[Complex64]) -> Point {
    z.iter().map(|c| [c.re, c.im]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Defining expression for custom surfaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    pub seed: u64,
    pub points: usize,
    pub dirs: usize,
    pub metric: String,
    pub direct: bool,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SummaryValue {
    Bool(bool),
    Number(f64),
    Text(String),
    Null,
}

impl From<bool> for SummaryValue {
    fn from(v: bool) -> Self {
        SummaryValue::Bool(v)
    }
}

impl From<f64> for SummaryValue {
    fn from(v: f64) -> Self {
        SummaryValue::Number(v)
    }
}

impl From<usize> for SummaryValue {
    fn from(v: usize) -> Self {
        SummaryValue::Number(v as f64)
    }
}

impl From<&str> for SummaryValue {
    fn from(v: &str) -> Self {
        SummaryValue::Text(v.to_string())
    }
}

impl<T: Into<SummaryValue>> From<Option<T>> for SummaryValue {
    fn from(v: Option<T>) -> Self {
        v.map_or(SummaryValue::Null, Into::into)
    }
}

pub type Summary = BTreeMap<String, SummaryValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeRecord {
    pub index: usize,
    pub point: Point,
    pub h2: f64,
    pub sup_a: f64,
    pub bp_min: f64,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub min_bound_residual: Option<f64>,
    pub max_bound_residual: Option<f64>,
    pub min_torsion_margin: f64,
    pub r_direct: Option<f64>,
    pub torsion_direct: Option<f64>,
    pub structural_residual: Option<f64>,
}

impl AnalyzeRecord {
    /// `gauss` says whether the Gauss-path curvatures are meaningful.
    pub fn from_point(index: usize, rec: &PointRecord, gauss: bool) -> AnalyzeRecord {
        let g = |v: f64| gauss.then_some(v);
        AnalyzeRecord {
            index,
            point: point(&rec.point),
            h2: rec.h2,
            sup_a: rec.sup_a,
            bp_min: rec.bp_min,
            k_min: g(rec.k_min),
            k_max: g(rec.k_max),
            min_bound_residual: g(rec.min_bound_residual),
            max_bound_residual: g(rec.max_bound_residual),
            min_torsion_margin: rec.min_torsion_margin,
            r_direct: None,
            torsion_direct: None,
            structural_residual: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub parameter: String,
    pub value: f64,
    pub points: usize,
    pub bp_min: f64,
    pub min_torsion_margin: Option<f64>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    /// Direct-solver scalar curvature (at the first circle point when
    /// sampling on the circle).
    pub r: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub structural_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub index: usize,
    pub point: Point,
    pub direction: Point,
    pub k: f64,
    pub k_ambient: f64,
    pub k_ambient_general: f64,
    pub h2: f64,
    pub identity_residual: f64,
    pub constraint_residual: f64,
    pub frame_residual: f64,
}

impl LinkRecord {
    pub fn new(index: usize, s: &LinkSample) -> LinkRecord {
        LinkRecord {
            index,
            point: point(&s.point),
            direction: point(&s.direction),
            k: s.k,
            k_ambient: s.k_ambient,
            k_ambient_general: s.k_ambient_general,
            h2: s.h2,
            identity_residual: s.identity_residual,
            constraint_residual: s.constraint_residual,
            frame_residual: s.frame_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub bound: String,
    pub value: Option<f64>,
    pub reason: Option<String>,
}

impl BoundRecord {
    pub fn new(b: &Lambda1Bound) -> BoundRecord {
        BoundRecord {
            bound: b.kind.name().to_string(),
            value: b.value.as_ref().ok().copied(),
            reason: b.value.as_ref().err().cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Record {
    Analyze(AnalyzeRecord),
    Sweep(SweepRecord),
    Link(LinkRecord),
    Bound(BoundRecord),
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn point_columns(prefix: &str, p: &Point, out: &mut Vec<(String, String)>) {
    for (j, [re, im]) in p.iter().enumerate() {
        out.push((format!("{prefix}{}_re", j + 1), re.to_string()));
        out.push((format!("{prefix}{}_im", j + 1), im.to_string()));
    }
}

impl Record {
    /// Flat `(column, value)` pairs for CSV output.
    pub fn columns(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        match self {
            Record::Analyze(r) => {
                push("index", r.index.to_string());
                push("h2", r.h2.to_string());
                push("sup_a", r.sup_a.to_string());
                push("bp_min", r.bp_min.to_string());
                push("k_min", opt(r.k_min));
                push("k_max", opt(r.k_max));
                push("min_bound_residual", opt(r.min_bound_residual));
                push("max_bound_residual", opt(r.max_bound_residual));
                push("min_torsion_margin", r.min_torsion_margin.to_string());
                push("r_direct", opt(r.r_direct));
                push("torsion_direct", opt(r.torsion_direct));
                push("structural_residual", opt(r.structural_residual));
                point_columns("z", &r.point, &mut out);
            }
            Record::Sweep(r) => {
                push("parameter", r.parameter.clone());
                push("value", r.value.to_string());
                push("points", r.points.to_string());
                push("bp_min", r.bp_min.to_string());
                push("min_torsion_margin", opt(r.min_torsion_margin));
                push("k_min", opt(r.k_min));
                push("k_max", opt(r.k_max));
                push("r", opt(r.r));
                push("r_min", opt(r.r_min));
                push("r_max", opt(r.r_max));
                push("structural_residual", opt(r.structural_residual));
            }
            Record::Link(r) => {
                push("index", r.index.to_string());
                push("k", r.k.to_string());
                push("k_ambient", r.k_ambient.to_string());
                push("k_ambient_general", r.k_ambient_general.to_string());
                push("h2", r.h2.to_string());
                push("identity_residual", r.identity_residual.to_string());
                push("constraint_residual", r.constraint_residual.to_string());
                push("frame_residual", r.frame_residual.to_string());
                point_columns("z", &r.point, &mut out);
                point_columns("w", &r.direction, &mut out);
            }
            Record::Bound(r) => {
                push("bound", r.bound.clone());
                push("value", opt(r.value));
                push("reason", r.reason.clone().unwrap_or_default());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub provenance: Provenance,
    pub samples: Vec<Record>,
    pub summary: Summary,
}

/// Adds `{name}_min`, `{name}_max` and `{name}_mean` over the present values,
/// accumulated in record order.
pub fn add_stats<I: IntoIterator<Item = Option<f64>>>(
    summary: &mut Summary,
    name: &str,
    values: I,
) {
    let vals: Vec<f64> = values.into_iter().flatten().collect();
    if vals.is_empty() {
        for s in ["min", "max", "mean"] {
            summary.insert(format!("{name}_{s}"), SummaryValue::Null);
        }
        return;
    }
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    summary.insert(format!("{name}_min"), min.into());
    summary.insert(format!("{name}_max"), max.into());
    summary.insert(format!("{name}_mean"), mean.into());
}

/// Statistics over analysis records.
pub fn analyze_summary(records: &[AnalyzeRecord]) -> Summary {
    let mut s = Summary::new();
    add_stats(&mut s, "K", records.iter().flat_map(|r| [r.k_min, r.k_max]));
    add_stats(&mut s, "H2", records.iter().map(|r| Some(r.h2)));
    add_stats(&mut s, "supA", records.iter().map(|r| Some(r.sup_a)));
    add_stats(&mut s, "bp_min", records.iter().map(|r| Some(r.bp_min)));
    add_stats(
        &mut s,
        "torsion_margin",
        records.iter().map(|r| Some(r.min_torsion_margin)),
    );
    add_stats(
        &mut s,
        "bound_residual",
        records
            .iter()
            .flat_map(|r| [r.min_bound_residual, r.max_bound_residual]),
    );
    add_stats(&mut s, "R", records.iter().map(|r| r.r_direct));
    add_stats(
        &mut s,
        "torsion_direct",
        records.iter().map(|r| r.torsion_direct),
    );
    add_stats(
        &mut s,
        "structural_residual",
        records.iter().map(|r| r.structural_residual),
    );
    s.insert("samples".into(), records.len().into());
    s
}

pub fn link_summary(records: &[LinkRecord]) -> Summary {
    let mut s = Summary::new();
    add_stats(&mut s, "K", records.iter().map(|r| Some(r.k)));
    add_stats(
        &mut s,
        "K_ambient",
        records.iter().map(|r| Some(r.k_ambient)),
    );
    add_stats(&mut s, "H2", records.iter().map(|r| Some(r.h2)));
    add_stats(
        &mut s,
        "identity_residual",
        records.iter().map(|r| Some(r.identity_residual)),
    );
    add_stats(
        &mut s,
        "constraint_residual",
        records.iter().map(|r| Some(r.constraint_residual)),
    );
    add_stats(
        &mut s,
        "frame_residual",
        records.iter().map(|r| Some(r.frame_residual)),
    );
    add_stats(
        &mut s,
        "vitter_discrepancy",
        records
            .iter()
            .map(|r| Some((r.k_ambient - r.k_ambient_general).abs())),
    );
    s.insert(
        "K_ambient_nonpositive".into(),
        records
            .iter()
            .filter(|r| r.k_ambient <= 1e-12)
            .count()
            .into(),
    );
    s.insert(
        "K_ambient_positive".into(),
        records
            .iter()
            .filter(|r| r.k_ambient > 1e-12)
            .count()
            .into(),
    );
    s.insert("samples".into(), records.len().into());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_skip_missing_values() {
        let mut s = Summary::new();
        add_stats(&mut s, "x", [Some(1.0), None, Some(3.0)]);
        assert_eq!(s["x_min"], SummaryValue::Number(1.0));
        assert_eq!(s["x_max"], SummaryValue::Number(3.0));
        assert_eq!(s["x_mean"], SummaryValue::Number(2.0));
        add_stats(&mut s, "y", [None]);
        assert_eq!(s["y_mean"], SummaryValue::Null);
    }

    #[test]
    fn report_round_trips_through_json() {
        let rec = AnalyzeRecord {
            index: 0,
            point: point(&[Complex64::new(1.0, -2.0)]),
            h2: 1.0,
            sup_a: 0.0,
            bp_min: 2.0,
            k_min: Some(1.0),
            k_max: Some(1.0),
            min_bound_residual: Some(0.5),
            max_bound_residual: Some(0.5),
            min_torsion_margin: 1.0,
            r_direct: None,
            torsion_direct: None,
            structural_residual: None,
        };
        let report = Report {
            family: "sphere".into(),
            params: BTreeMap::from([("n".to_string(), 1.0)]),
            provenance: Provenance {
                tool: "twlab".into(),
                version: "0".into(),
                command: "analyze".into(),
                rho: None,
                seed: 1,
                points: 1,
                dirs: 1,
                metric: "identity".into(),
                direct: false,
                tolerances: BTreeMap::new(),
            },
            summary: analyze_summary(std::slice::from_ref(&rec)),
            samples: vec![Record::Analyze(rec)],
        };
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"point\":[[1.0,-2.0]]"));
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let recomputed = match &back.samples[0] {
            Record::Analyze(r) => analyze_summary(std::slice::from_ref(r)),
            _ => unreachable!(),
        };
        assert_eq!(recomputed, back.summary);
    }
}
