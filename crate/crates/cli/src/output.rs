//! CSV and JSON rendering. Every float is printed with 17 significant
//! digits so both formats carry identical values; infinities become `inf`
//! in CSV and `null` in JSON.

use std::io::Write;

use serde::Serialize;
use serde_json::value::RawValue;
use voi_core::oracle::OracleReport;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Drops the sign of negative zero, which reflection of a zero payoff produces.
fn unsign_zero(x: f64) -> f64 {
    if x == 0.0 { 0.0 } else { x }
}

pub fn csv_number(x: f64) -> String {
    let x = unsign_zero(x);
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_number(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { format!("{:.16e}", unsign_zero(x)) } else { "null".into() };
    RawValue::from_string(text).expect("formatted float is valid json")
}

/// One row of a value curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    /// `upper` / `lower`, set only for two-branch output.
    pub branch: Option<&'static str>,
    /// Signed information key (negative on the losses branch).
    pub lambda: f64,
    pub value: f64,
    pub beta: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct CurveOutput {
    pub problem: String,
    pub kind: String,
    pub branch: String,
    pub rows: Vec<CurveRow>,
    pub origin_upper: Option<f64>,
    pub origin_lower: Option<f64>,
}

#[derive(Serialize)]
struct JsonRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<&'static str>,
    lambda: Box<RawValue>,
    value: Box<RawValue>,
    beta: Box<RawValue>,
    converged: bool,
}

#[derive(Serialize)]
struct JsonCurve<'a> {
    problem: &'a str,
    #[serde(rename = "type")]
    kind: &'a str,
    branch: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    origin_upper: Option<Box<RawValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    origin_lower: Option<Box<RawValue>>,
    points: Vec<JsonRow>,
}

impl CurveOutput {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> CliResult<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> CliResult<()> {
        let two_branch = self.rows.iter().any(|r| r.branch.is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["lambda", "value", "beta", "converged"];
        if two_branch {
            header.insert(0, "branch");
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut record = vec![
                csv_number(r.lambda),
                csv_number(r.value),
                csv_number(r.beta),
                r.converged.to_string(),
            ];
            if two_branch {
                record.insert(0, r.branch.unwrap_or("").to_string());
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> CliResult<()> {
        let doc = JsonCurve {
            problem: &self.problem,
            kind: &self.kind,
            branch: &self.branch,
            origin_upper: self.origin_upper.map(json_number),
            origin_lower: self.origin_lower.map(json_number),
            points: self
                .rows
                .iter()
                .map(|r| JsonRow {
                    branch: r.branch,
                    lambda: json_number(r.lambda),
                    value: json_number(r.value),
                    beta: json_number(r.beta),
                    converged: r.converged,
                })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
        Ok(())
    }
}

pub fn write_reports(reports: &[OracleReport], format: Format, out: &mut dyn Write) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["target", "oracle_value", "solver_value", "abs_diff", "resolution", "elapsed"])?;
            for r in reports {
                w.write_record([
                    r.target.clone(),
                    csv_number(r.oracle_value),
                    csv_number(r.solver_value),
                    csv_number(r.abs_diff),
                    r.resolution.to_string(),
                    csv_number(r.elapsed),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, reports)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(csv_number(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_number(f64::INFINITY), "inf");
        assert_eq!(csv_number(-0.0), "0.0000000000000000e0");
        assert_eq!(json_number(f64::INFINITY).get(), "null");
        let x = 0.805_182_476_923_412_3_f64;
        assert_eq!(csv_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_and_json_agree() {
        let out = CurveOutput {
            problem: "p".into(),
            kind: "shannon".into(),
            branch: "upper".into(),
            rows: vec![CurveRow {
                branch: None,
                lambda: 0.2,
                value: 2.0 / 3.0,
                beta: f64::INFINITY,
                converged: true,
            }],
            origin_upper: None,
            origin_lower: None,
        };
        let mut csv = Vec::new();
        out.write(Format::Csv, &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "lambda,value,beta,converged");
        let mut json = Vec::new();
        out.write(Format::Json, &mut json).unwrap();
        let json = String::from_utf8(json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["points"][0]["beta"].is_null());
        assert!(json.contains(&csv_number(2.0 / 3.0)));
        assert!(csv.contains(&csv_number(2.0 / 3.0)));
    }
}
