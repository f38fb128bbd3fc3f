//! Uniform output record for verification results.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::exact::{q_to_f64, Q};

pub const SCHEMA: &str = "spherical-green/1";

#[derive(Clone, Debug, PartialEq)]
pub enum ReportValue {
    Real(f64),
    Exact(Q),
}

impl ReportValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            ReportValue::Real(v) => *v,
            ReportValue::Exact(q) => q_to_f64(q),
        }
    }

    /// Decimal rendering; exact values use long division.
    pub fn decimal(&self) -> String {
        match self {
            ReportValue::Real(v) => format_real(*v),
            ReportValue::Exact(q) => decimal_string(q, 30),
        }
    }

    pub fn rational(&self) -> Option<String> {
        match self {
            ReportValue::Real(_) => None,
            ReportValue::Exact(q) => Some(format!("{}/{}", q.numer(), q.denom())),
        }
    }
}

/// Shortest round-trip representation, with non-finite values spelled out.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Decimal expansion of a rational truncated to `digits` fractional digits,
/// trailing zeros removed.
pub fn decimal_string(q: &Q, digits: usize) -> String {
    let neg = q.is_negative();
    let num = q.numer().abs();
    let den = q.denom().clone();
    let (int, mut rem) = num.div_rem(&den);
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if rem.is_zero() {
        return s;
    }
    s.push('.');
    let ten = BigInt::from(10);
    let mut frac = String::new();
    for _ in 0..digits {
        rem *= &ten;
        let (d, r) = rem.div_rem(&den);
        frac.push_str(&d.to_string());
        rem = r;
        if rem.is_zero() {
            break;
        }
    }
    s.push_str(frac.trim_end_matches('0'));
    s
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub name: String,
    pub value: ReportValue,
    pub target: ReportValue,
    pub tolerance: f64,
    pub pass: bool,
    pub metadata: BTreeMap<String, Json>,
}

impl ResidualReport {
    /// Floating comparison: pass iff |value - target| <= tolerance.
    pub fn real(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance;
        ResidualReport {
            name: name.into(),
            value: ReportValue::Real(value),
            target: ReportValue::Real(target),
            tolerance,
            pass,
            metadata: BTreeMap::new(),
        }
    }

    /// Exact comparison: pass iff value == target.
    pub fn exact(name: impl Into<String>, value: Q, target: Q) -> Self {
        let pass = value == target;
        ResidualReport {
            name: name.into(),
            value: ReportValue::Exact(value),
            target: ReportValue::Exact(target),
            tolerance: 0.0,
            pass,
            metadata: BTreeMap::new(),
        }
    }

    /// Pass iff the value is at least `threshold` in magnitude.
    pub fn nonzero(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let mut r = Self::real(name, value, 0.0, threshold);
        r.pass = value.abs() >= threshold;
        r.metadata.insert("criterion".into(), json!("abs_at_least"));
        r
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.metadata
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Json::Null));
        self
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.value, ReportValue::Exact(_))
    }

    /// Compact `key=value;...` rendering of the metadata for CSV output.
    pub fn params_string(&self) -> String {
        self.metadata
            .iter()
            .map(|(k, v)| match v {
                Json::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl Serialize for ResidualReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("name", &self.name)?;
        match &self.value {
            ReportValue::Real(v) if v.is_finite() => m.serialize_entry("value", v)?,
            v => m.serialize_entry("value", &v.decimal())?,
        }
        if let Some(r) = self.value.rational() {
            m.serialize_entry("rational", &r)?;
        }
        match &self.target {
            ReportValue::Real(v) if v.is_finite() => m.serialize_entry("target", v)?,
            v => m.serialize_entry("target", &v.decimal())?,
        }
        if let Some(r) = self.target.rational() {
            m.serialize_entry("target_rational", &r)?;
        }
        m.serialize_entry("exact", &self.is_exact())?;
        m.serialize_entry("tolerance", &self.tolerance)?;
        m.serialize_entry("pass", &self.pass)?;
        m.serialize_entry("metadata", &self.metadata)?;
        m.end()
    }
}

pub fn all_pass(reports: &[ResidualReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

/// Versioned JSON document wrapping a list of reports.
pub fn reports_document(command: &str, reports: &[ResidualReport], extra: Option<Json>) -> Json {
    let mut doc = json!({
        "schema": SCHEMA,
        "command": command,
        "all_pass": all_pass(reports),
        "reports": reports,
    });
    if let Some(e) = extra {
        doc["data"] = e;
    }
    doc
}

pub const CSV_HEADER: &str = "name,value,target,pass,params";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_row(r: &ResidualReport) -> String {
    let value = match &r.value {
        ReportValue::Exact(_) => r.value.rational().unwrap(),
        v => v.decimal(),
    };
    let target = match &r.target {
        ReportValue::Exact(_) => r.target.rational().unwrap(),
        v => v.decimal(),
    };
    [
        csv_field(&r.name),
        csv_field(&value),
        csv_field(&target),
        r.pass.to_string(),
        csv_field(&r.params_string()),
    ]
    .join(",")
}

pub fn reports_csv(reports: &[ResidualReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    #[test]
    fn decimals() {
        assert_eq!(decimal_string(&q(1, 4), 30), "0.25");
        assert_eq!(decimal_string(&q(-7, 2), 30), "-3.5");
        assert_eq!(decimal_string(&qi(0), 30), "0");
        assert_eq!(decimal_string(&q(1, 3), 5), "0.33333");
        assert_eq!(decimal_string(&q(-1, 3), 3), "-0.333");
    }

    #[test]
    fn exact_report_json() {
        let r = ResidualReport::exact("eig", q(-6, 1), qi(-6)).with("n", 2);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["value"], "-6");
        assert_eq!(v["rational"], "-6/1");
        assert_eq!(v["pass"], true);
        assert_eq!(v["exact"], true);
        assert_eq!(v["metadata"]["n"], 2);
    }

    #[test]
    fn real_report() {
        let r = ResidualReport::real("x", 1.0 + 1e-12, 1.0, 1e-10);
        assert!(r.pass);
        let r = ResidualReport::real("x", f64::NAN, 1.0, 1e-10);
        assert!(!r.pass);
        assert_eq!(serde_json::to_value(&r).unwrap()["value"], "NaN");
        assert!(ResidualReport::nonzero("y", -0.5, 1e-3).pass);
        assert!(!ResidualReport::nonzero("y", 1e-5, 1e-3).pass);
    }

    #[test]
    fn csv_quoting() {
        let r = ResidualReport::real("a,b", 0.5, 0.0, 1.0).with("x", "p,q");
        let row = csv_row(&r);
        assert_eq!(row, "\"a,b\",0.5,0.0,true,\"x=p,q\"");
        assert!(reports_csv(&[r]).starts_with(CSV_HEADER));
    }
}
