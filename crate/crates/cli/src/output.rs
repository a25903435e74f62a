//! Result emission: exponent curves as CSV or JSON, everything else as JSON.

use std::io::Write;
use std::path::Path;

use cqrel::exponents::ExponentReport;
use serde::Serialize;

use crate::CliError;

pub const CSV_HEADER: [&str; 6] = ["R", "E_lower", "E_upper", "s_lower", "s_upper", "vacuous_flag"];

/// Twelve significant digits, printed in the shortest form that reads back
/// to the rounded value. Infinities print as `inf` / `-inf`.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// One rate with its lower (random coding) and upper (sphere packing) report.
pub struct CurvePoint {
    pub lower: ExponentReport,
    pub upper: ExponentReport,
}

pub fn curve_csv(points: &[CurvePoint]) -> Result<String, CliError> {
    if points.is_empty() {
        return Err(CliError::Parse("no records to emit".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for p in points {
        w.write_record([
            sig12(p.lower.rate),
            sig12(p.lower.value),
            sig12(p.upper.value),
            sig12(p.lower.optimizer),
            sig12(p.upper.optimizer),
            u8::from(p.lower.vacuous).to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII numbers"))
}

/// Lower and upper reports interleaved by rate.
pub fn curve_json(points: &[CurvePoint]) -> Result<String, CliError> {
    if points.is_empty() {
        return Err(CliError::Parse("no records to emit".into()));
    }
    let flat: Vec<&ExponentReport> = points.iter().flat_map(|p| [&p.lower, &p.upper]).collect();
    json(&flat)
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cqrel::channel::CQChannel;
    use cqrel::exponents::{random_coding_bound, sphere_packing_bound, DEFAULT_CAP};

    #[test]
    fn significant_digits() {
        assert_eq!(sig12(0.1), "0.1");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(f64::INFINITY), "inf");
        assert_eq!(sig12(123456.7890123456), "123456.789012");
    }

    #[test]
    fn single_record_and_round_trip() {
        let w = CQChannel::bsc(0.1).unwrap();
        let p = CurvePoint {
            lower: random_coding_bound(&w, 0.2).unwrap(),
            upper: sphere_packing_bound(&w, 0.2, DEFAULT_CAP).unwrap(),
        };
        let text = curve_csv(std::slice::from_ref(&p)).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), "R,E_lower,E_upper,s_lower,s_upper,vacuous_flag");
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
        assert!((row[1] - p.lower.value).abs() < 1e-11);
        assert!((row[2] - p.upper.value).abs() < 1e-11);
        let parsed: Vec<ExponentReport> = serde_json::from_str(&curve_json(&[p]).unwrap()).unwrap();
        assert!((parsed[0].value - row[1]).abs() < 1e-11);
        assert!(curve_csv(&[]).is_err());
    }
}
