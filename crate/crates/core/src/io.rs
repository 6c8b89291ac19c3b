//! JSON interchange for fans, piecewise-linear functions, refinements and
//! verification reports, plus plain-text rendering helpers.
//!
//! Rationals are written as `"p/q"` strings in lowest terms (`"p"` for
//! integers) so no precision is lost on the way through.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exactla::scalar::{format_rational, parse_rational};
use crate::plfun::{PLFunction, PlError};
use crate::refine::Refinement;
use crate::theorems::{Certificate, TheoremReport, Verdict};
use crate::{Fan, FanError, QVector, Rational};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a rational number: {0:?}")]
    BadRational(String),
    #[error("ray index {0:?} is not a valid index")]
    BadIndex(String),
    #[error("invalid fan: {0}")]
    InvalidFan(#[from] FanError),
    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(#[from] PlError),
}

impl IoError {
    /// Parse-level failures, as opposed to well-formed but invalid data.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, IoError::Json(_) | IoError::BadRational(_) | IoError::BadIndex(_))
    }
}

/// The fan interchange layout: `{"dim", "rays", "max_cones"}` with 0-based
/// ray indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanJson {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

impl From<&Fan> for FanJson {
    fn from(fan: &Fan) -> Self {
        FanJson { dim: fan.dim(), rays: fan.rays().to_vec(), max_cones: fan.max_cone_lists() }
    }
}

impl FanJson {
    pub fn into_fan(self) -> Result<Fan, FanError> {
        Fan::new(self.dim, self.rays, self.max_cones)
    }
}

pub fn fan_to_json(fan: &Fan) -> String {
    serde_json::to_string_pretty(&FanJson::from(fan)).expect("plain data serializes")
}

pub fn fan_from_json(s: &str) -> Result<Fan, IoError> {
    let raw: FanJson = serde_json::from_str(s)?;
    Ok(raw.into_fan()?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PlJson {
    RayValues { ray_values: BTreeMap<String, String> },
    ConeFunctionals { cone_functionals: Vec<Vec<String>> },
}

fn parse_q(s: &str) -> Result<Rational, IoError> {
    parse_rational(s).ok_or_else(|| IoError::BadRational(s.to_string()))
}

fn parse_qvec(v: &[String]) -> Result<QVector, IoError> {
    v.iter().map(|s| parse_q(s)).collect()
}

pub fn qvec_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

/// Reads either `{"ray_values": {"0": "3/2", ...}}` (missing rays are 0,
/// simplicial fans only) or `{"cone_functionals": [[...], ...]}`.
pub fn pl_from_json(fan: &Arc<Fan>, s: &str) -> Result<PLFunction, IoError> {
    match serde_json::from_str::<PlJson>(s)? {
        PlJson::RayValues { ray_values } => {
            let mut values = vec![Rational::zero(); fan.num_rays()];
            for (k, v) in &ray_values {
                let i: usize = k.trim().parse().map_err(|_| IoError::BadIndex(k.clone()))?;
                if i >= values.len() {
                    return Err(IoError::BadIndex(k.clone()));
                }
                values[i] = parse_q(v)?;
            }
            Ok(PLFunction::from_ray_values(fan, &values)?)
        }
        PlJson::ConeFunctionals { cone_functionals } => {
            let m = cone_functionals.iter().map(|row| parse_qvec(row)).collect::<Result<_, _>>()?;
            Ok(PLFunction::from_cone_functionals(fan, m)?)
        }
    }
}

/// Ray values on simplicial fans, cone functionals otherwise.
pub fn pl_to_json(f: &PLFunction) -> String {
    let value = if f.fan().is_simplicial() {
        let map: BTreeMap<String, String> =
            f.ray_values().iter().enumerate().map(|(i, q)| (i.to_string(), format_rational(q))).collect();
        json!({ "ray_values": map })
    } else {
        json!({ "cone_functionals": f.cone_functionals().iter().map(|m| qvec_strings(m)).collect::<Vec<_>>() })
    };
    serde_json::to_string_pretty(&value).expect("plain data serializes")
}

/// Sidecar written next to a refined fan: weights by ray index and the
/// coarse cone containing each fine cone.
pub fn refinement_sidecar(r: &Refinement) -> Value {
    let weights: BTreeMap<String, String> =
        r.weights.w.iter().enumerate().map(|(i, w)| (i.to_string(), format_rational(w))).collect();
    json!({
        "weights": weights,
        "seed": r.weights.seed,
        "attempts": r.weights.attempts,
        "cone_map": r.cone_map,
        "respected": r.respected.as_slice(),
    })
}

/// Renders a linear form with positive terms first, e.g. `a1+a3-a2-a4`.
/// Coefficients must be integers for the compact form; fractions are
/// printed as `(p/q)a1`.
pub fn format_row(row: &[Rational], var: impl Fn(usize) -> String) -> String {
    let term = |c: &Rational, i: usize| {
        let a = c.abs();
        if a.is_one() {
            var(i)
        } else if a.is_integer() {
            format!("{a}{}", var(i))
        } else {
            format!("({a}){}", var(i))
        }
    };
    let pos: Vec<String> = row.iter().enumerate().filter(|(_, c)| c.is_positive()).map(|(i, c)| term(c, i)).collect();
    let neg: Vec<String> = row.iter().enumerate().filter(|(_, c)| c.is_negative()).map(|(i, c)| term(c, i)).collect();
    let mut out = pos.join("+");
    for n in neg {
        out.push('-');
        out.push_str(&n);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::Combination { label, target, nonneg, free } => json!({
            "kind": "combination",
            "label": label,
            "target": qvec_strings(target),
            "nonneg": nonneg.iter().map(|(k, v)| json!([format_rational(k), qvec_strings(v)])).collect::<Vec<_>>(),
            "free": free.iter().map(|(k, v)| json!([format_rational(k), qvec_strings(v)])).collect::<Vec<_>>(),
        }),
        Certificate::Proportional { label, left, right, factor } => json!({
            "kind": "proportional",
            "label": label,
            "left": qvec_strings(left),
            "right": qvec_strings(right),
            "factor": format_rational(factor),
        }),
        Certificate::Satisfies { label, point, rows, strict } => json!({
            "kind": "satisfies",
            "label": label,
            "point": qvec_strings(point),
            "rows": rows.iter().map(|r| qvec_strings(r)).collect::<Vec<_>>(),
            "strict": strict,
        }),
    }
}

/// Machine-readable report. Timings are left out so output bytes depend
/// only on the inputs and the seed.
pub fn report_json(reports: &[TheoremReport]) -> Value {
    let entries: Vec<Value> = reports
        .iter()
        .map(|r| {
            let mut v = json!({
                "theorem": r.theorem.name(),
                "fan": r.fan,
                "verdict": r.verdict.label(),
                "notes": r.notes,
                "certificates": r.certificates.iter().map(certificate_json).collect::<Vec<_>>(),
            });
            match &r.verdict {
                Verdict::Fails(c) => {
                    v["counterexample"] = json!({
                        "description": c.description,
                        "data": c.data.iter().map(|d| qvec_strings(d)).collect::<Vec<_>>(),
                    });
                }
                Verdict::Inapplicable(why) => v["reason"] = json!(why),
                _ => {}
            }
            v
        })
        .collect();
    let passed = reports.iter().all(|r| r.passed());
    json!({ "passed": passed, "reports": entries })
}

/// Fixed-width table, one line per report.
pub fn report_table(reports: &[TheoremReport]) -> String {
    let fan_w = reports.iter().map(|r| r.fan.len()).max().unwrap_or(3).max(3);
    let thm_w = reports.iter().map(|r| r.theorem.name().len()).max().unwrap_or(7).max(7);
    let mut out = format!("{:<fan_w$}  {:<thm_w$}  {:<12}  {:>5}  detail\n", "fan", "theorem", "verdict", "certs");
    for r in reports {
        let detail = match &r.verdict {
            Verdict::Fails(c) => c.description.clone(),
            Verdict::Inapplicable(why) => why.clone(),
            _ => r.notes.first().cloned().unwrap_or_default(),
        };
        out.push_str(&format!(
            "{:<fan_w$}  {:<thm_w$}  {:<12}  {:>5}  {}\n",
            r.fan,
            r.theorem.name(),
            r.verdict.label(),
            r.certificates.len(),
            detail
        ));
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    out.push_str(&format!("{} reports, {} failed\n", reports.len(), failed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::exactla::scalar::{qvec, ratio};

    #[test]
    fn fan_round_trip() {
        for (_, fan) in corpus::builtin_corpus() {
            let back = fan_from_json(&fan_to_json(&fan)).unwrap();
            assert_eq!(FanJson::from(&back), FanJson::from(&fan));
        }
    }

    #[test]
    fn parse_failures_are_classified() {
        assert!(fan_from_json("{\"dim\": 2,").unwrap_err().is_parse_error());
        let swapped = r#"{"dim": 2, "rays": [[1,0],[0,1],[-1,0]], "max_cones": [[0,1],[0,2]]}"#;
        let e = fan_from_json(swapped).unwrap_err();
        assert!(matches!(e, IoError::InvalidFan(_)));
        assert!(!e.is_parse_error());
    }

    #[test]
    fn pl_round_trip() {
        let fan = Arc::new(corpus::ex21());
        let f = pl_from_json(&fan, r#"{"ray_values": {"0": "3/2", "2": "-1"}}"#).unwrap();
        assert_eq!(f.ray_value(0), ratio(3, 2));
        assert_eq!(f.ray_value(1), Rational::zero());
        assert_eq!(pl_from_json(&fan, &pl_to_json(&f)).unwrap().ray_values(), f.ray_values());
        assert!(matches!(pl_from_json(&fan, r#"{"ray_values": {"9": "1"}}"#), Err(IoError::BadIndex(_))));
        assert!(matches!(pl_from_json(&fan, r#"{"ray_values": {"0": "1/0"}}"#), Err(IoError::BadRational(_))));

        let ns = Arc::new(corpus::ex31());
        let g = PLFunction::linear(&ns, qvec(&[1, 2, 3]));
        let back = pl_from_json(&ns, &pl_to_json(&g)).unwrap();
        assert_eq!(back.cone_functionals(), g.cone_functionals());
    }

    #[test]
    fn rows_render_positive_terms_first() {
        let var = |i: usize| format!("a{i}");
        assert_eq!(format_row(&qvec(&[0, 1, -1, 1, -1]), var), "a1+a3-a2-a4");
        assert_eq!(format_row(&qvec(&[2, 0, 1, 0, 1]), var), "2a0+a2+a4");
        assert_eq!(format_row(&qvec(&[-2, 3]), var), "3a1-2a0");
        assert_eq!(format_row(&[ratio(1, 2), Rational::zero()], var), "(1/2)a0");
        assert_eq!(format_row(&qvec(&[0, 0]), var), "0");
    }
}
