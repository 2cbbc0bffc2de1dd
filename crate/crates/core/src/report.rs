//! Structured key-value reports.
//!
//! Output is valid TOML. Floats are written with 17 significant digits so
//! that two runs can be compared byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Floats(Vec<f64>),
    Ints(Vec<i64>),
}

/// Formats a float with 17 significant digits in TOML syntax.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Float(v) => fmt_float(*v),
            Value::Int(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Str(s) => quote(s),
            Value::Floats(vs) => format!("[{}]", vs.iter().map(|v| fmt_float(*v)).collect::<Vec<_>>().join(", ")),
            Value::Ints(vs) => format!("[{}]", vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    entries: Vec<(String, Value)>,
}

impl Section {
    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn float(&mut self, key: &str, v: f64) -> &mut Self {
        self.set(key, Value::Float(v))
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.set(key, Value::Int(v))
    }

    pub fn bool(&mut self, key: &str, v: bool) -> &mut Self {
        self.set(key, Value::Bool(v))
    }

    pub fn str(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.set(key, Value::Str(v.into()))
    }

    pub fn floats(&mut self, key: &str, v: &[f64]) -> &mut Self {
        self.set(key, Value::Floats(v.to_vec()))
    }

    pub fn ints(&mut self, key: &str, v: &[i64]) -> &mut Self {
        self.set(key, Value::Ints(v.to_vec()))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

/// Top-level entries followed by named sections, in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    root: Section,
    sections: Vec<(String, Section)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn root(&mut self) -> &mut Section {
        &mut self.root
    }

    pub fn section(&mut self, name: &str) -> &mut Section {
        if let Some(i) = self.sections.iter().position(|(n, _)| n == name) {
            return &mut self.sections[i].1;
        }
        self.sections.push((name.to_string(), Section::default()));
        &mut self.sections.last_mut().unwrap().1
    }

    pub fn get(&self, section: Option<&str>, key: &str) -> Option<&Value> {
        match section {
            None => self.root.get(key),
            Some(name) => self.sections.iter().find(|(n, _)| n == name)?.1.get(key),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.root.entries {
            let _ = writeln!(out, "{k} = {}", v.render());
        }
        for (name, sec) in &self.sections {
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            for (k, v) in &sec.entries {
                let _ = writeln!(out, "{k} = {}", v.render());
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}
