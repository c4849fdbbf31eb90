//! CSV and JSON serialisation of sweep results and single-run documents.
//!
//! CSV numbers carry 17 significant digits so files round-trip exactly and
//! can be compared byte for byte.

use crate::error::{Error, Result};
use crate::protocol::ProtocolResult;
use crate::sweep::{ResultRecord, Value};

const ERROR_COLUMNS: [&str; 3] = ["phase_error_estimate", "relative_correction_error", "error"];

fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn json_f64(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

/// Column names: swept parameters, observables, then error columns.
pub fn header(records: &[ResultRecord]) -> Vec<String> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    first
        .params
        .iter()
        .map(|(p, _)| p.clone())
        .chain(first.values.iter().map(|(o, _)| o.name().to_string()))
        .chain(ERROR_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

pub fn records_to_csv(records: &[ResultRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header(records)).map_err(io)?;
    for r in records {
        let mut row: Vec<String> = r.params.iter().map(|&(_, v)| format_f64(v)).collect();
        row.extend(r.values.iter().map(|(_, v)| match v {
            Value::Number(x) => format_f64(*x),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }));
        row.push(r.phase_error_estimate.map_or(String::new(), format_f64));
        row.push(r.relative_correction_error.map_or(String::new(), format_f64));
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn records_to_json(records: &[ResultRecord]) -> Result<String> {
    let rows: Vec<serde_json::Value> = records
        .iter()
        .map(|r| {
            let mut obj = serde_json::Map::new();
            for (p, v) in &r.params {
                obj.insert(p.clone(), json_f64(*v));
            }
            for (o, v) in &r.values {
                let value = match v {
                    Value::Number(x) => json_f64(*x),
                    Value::Text(s) => serde_json::Value::String(s.clone()),
                    Value::Missing => serde_json::Value::Null,
                };
                obj.insert(o.name().to_string(), value);
            }
            let opt = |x: Option<f64>| x.map_or(serde_json::Value::Null, json_f64);
            obj.insert(ERROR_COLUMNS[0].into(), opt(r.phase_error_estimate));
            obj.insert(ERROR_COLUMNS[1].into(), opt(r.relative_correction_error));
            obj.insert(
                ERROR_COLUMNS[2].into(),
                r.error.clone().map_or(serde_json::Value::Null, serde_json::Value::String),
            );
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::to_string_pretty(&rows).map_err(|e| Error::Io(e.to_string()))
}

pub fn result_to_json(result: &ProtocolResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Io(e.to_string()))
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        serde_json::Value::Number(n) => out.push((
            prefix.to_string(),
            n.as_f64().map_or_else(|| n.to_string(), format_f64),
        )),
        serde_json::Value::Null => out.push((prefix.to_string(), String::new())),
        serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        serde_json::Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
    }
}

/// Two-column `key,value` CSV of a single-run document.
pub fn result_to_csv(result: &ProtocolResult) -> Result<String> {
    let value = serde_json::to_value(result).map_err(|e| Error::Io(e.to_string()))?;
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["key", "value"]).map_err(io)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::Observable;

    fn record() -> ResultRecord {
        ResultRecord {
            params: vec![("interferometer.total_time".into(), 1e-3)],
            values: vec![
                (Observable::RelativeCorrection, Value::Number(-2.9014943802120954e-6)),
                (Observable::RegimeFlags, Value::Text("ok".into())),
                (Observable::Negativity, Value::Missing),
            ],
            phase_error_estimate: Some(1.5e-19),
            relative_correction_error: None,
            error: Some("bad, really".into()),
        }
    }

    #[test]
    fn csv_layout() {
        let text = records_to_csv(&[record()]).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "interferometer.total_time,relative_correction,regime_flags,negativity,phase_error_estimate,relative_correction_error,error"
        );
        assert_eq!(
            lines.next().unwrap(),
            "1.0000000000000000e-3,-2.9014943802120954e-6,ok,,1.5000000000000000e-19,,\"bad, really\""
        );
    }

    #[test]
    fn csv_and_json_carry_identical_values() {
        let r = record();
        let csv_text = records_to_csv(std::slice::from_ref(&r)).unwrap();
        let json: serde_json::Value = serde_json::from_str(&records_to_json(&[r]).unwrap()).unwrap();
        let row = csv_text.lines().nth(1).unwrap();
        let rc: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(json[0]["relative_correction"].as_f64().unwrap(), rc);
        assert!(json[0]["negativity"].is_null());
        assert_eq!(json[0]["regime_flags"], "ok");
    }

    #[test]
    fn full_precision_round_trip() {
        for x in [0.1f64, 1.0 / 3.0, -2.9014943802120954e-6, 6.674e-11, f64::MIN_POSITIVE] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
