use std::fmt::Write as _;
use std::path::Path;

use fracperi::isoperimetric::ConvergenceTable;
use fracperi::{Error, SweepResult};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Ordered key/value output, rendered as `key: value` lines or one JSON object.
pub struct Report {
    json: bool,
    fields: Vec<(String, Value)>,
    raw: String,
}

impl Report {
    pub fn new(json: bool) -> Self {
        Self {
            json,
            fields: Vec::new(),
            raw: String::new(),
        }
    }

    pub fn is_json(&self) -> bool {
        self.json
    }

    pub fn num(&mut self, key: &str, v: f64) {
        let value = serde_json::Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or(Value::Null);
        self.fields.push((key.to_string(), value));
    }

    pub fn int(&mut self, key: &str, v: u64) {
        self.fields.push((key.to_string(), Value::from(v)));
    }

    pub fn text(&mut self, key: &str, v: &str) {
        self.fields.push((key.to_string(), Value::from(v)));
    }

    /// Verbatim text printed before the fields.
    pub fn raw(&mut self, text: String) {
        self.raw.push_str(&text);
    }

    pub fn render(&self) -> String {
        let mut out = self.raw.clone();
        if self.fields.is_empty() {
            return out;
        }
        if self.json {
            let map: Map<String, Value> = self.fields.iter().cloned().collect();
            out.push_str(&serde_json::to_string_pretty(&Value::Object(map)).expect("plain values serialize"));
            out.push('\n');
        } else {
            for (k, v) in &self.fields {
                match v {
                    Value::String(s) => writeln!(out, "{k}: {s}"),
                    other => writeln!(out, "{k}: {other}"),
                }
                .expect("writing to a String");
            }
        }
        out
    }
}

fn e16(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per grid point, then the extrapolated limit at `s = limit_s`
/// with empty `raw` and `err_est`.
pub fn sweep_csv(res: &SweepResult, limit_s: f64) -> String {
    let mut out = String::from("s,raw,scaled,err_est,target,rel_gap\n");
    for r in &res.rows {
        let gap = (r.scaled - res.target).abs() / res.target.abs();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e16(r.s),
            e16(r.raw),
            e16(r.scaled),
            e16(r.err_est),
            e16(res.target),
            e16(gap)
        );
    }
    let _ = writeln!(
        out,
        "{},,{},,{},{}",
        e16(limit_s),
        e16(res.limit),
        e16(res.target),
        e16(res.rel_gap)
    );
    out
}

pub fn convergence_csv(t: &ConvergenceTable) -> String {
    let mut out = String::from("s,ratio,witness_ratio,distance,seed\n");
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e16(r.s),
            e16(r.ratio),
            e16(r.witness_ratio),
            e16(r.distance),
            r.seed
        );
    }
    out
}
