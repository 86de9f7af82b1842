//! JSON reports with every real printed to 17 significant digits.

use std::str::FromStr;
use std::time::Duration;

use serde_json::{Map, Number, Value};

/// Formats `x` with 17 significant digits: positional for moderate
/// exponents, scientific otherwise. Non-finite values have no JSON form.
pub fn format_17(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some("0.0".to_string());
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok())?;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        Some(format!("{x:.decimals$}"))
    } else {
        Some(sci)
    }
}

pub fn num(x: f64) -> Value {
    match format_17(x) {
        Some(s) => Value::Number(Number::from_str(&s).expect("formatted float is a valid JSON number")),
        None => Value::Null,
    }
}

pub fn nums<'a>(xs: impl IntoIterator<Item = &'a f64>) -> Value {
    Value::Array(xs.into_iter().map(|&x| num(x)).collect())
}

pub fn matrix(rows: &[[f64; 3]]) -> Value {
    Value::Array(rows.iter().map(nums).collect())
}

#[derive(Debug, Default)]
pub struct Report {
    pub command: String,
    pub arguments: Map<String, Value>,
    pub input_digest: Option<String>,
    pub results: Map<String, Value>,
    pub tolerances: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn arg(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.arguments.insert(key.to_string(), value.into());
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), num(value));
        self
    }

    pub fn render(&self, wall_time: Duration) -> String {
        let mut doc = Map::new();
        doc.insert("command".into(), Value::String(self.command.clone()));
        doc.insert("arguments".into(), Value::Object(self.arguments.clone()));
        doc.insert(
            "input_digest".into(),
            self.input_digest.clone().map_or(Value::Null, Value::String),
        );
        doc.insert("results".into(), Value::Object(self.results.clone()));
        doc.insert("tolerances".into(), Value::Object(self.tolerances.clone()));
        doc.insert("wall_time_seconds".into(), num(wall_time.as_secs_f64()));
        serde_json::to_string_pretty(&Value::Object(doc)).expect("report serialises")
    }
}
