//! Structured-text run configuration: `key = value` lines grouped under
//! `[section]` headers, with explicit schema versioning.
//!
//! Unknown keys are tolerated (forward compatibility); missing or malformed
//! values are reported with their `section.key` name.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Default)]
pub struct ConfigDoc {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = ConfigDoc::default();
        let mut current = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::Config(format!("line {}: unterminated section header", idx + 1))
                })?;
                current = name.trim().to_string();
                doc.sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got {:?}",
                    idx + 1,
                    line
                ))
            })?;
            doc.sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        let schema = doc.u64_or("", "schema", 0)?;
        if schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema: expected {SCHEMA_VERSION}, got {schema} (add `schema = 1`)"
            )));
        }
        Ok(doc)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| {
            Error::Config(format!("missing required field {}", field_name(section, key)))
        })
    }

    pub fn str_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.get(section, key).unwrap_or(default)
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<f64> {
        parse_field(self.require(section, key)?, section, key)
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            Some(v) => parse_field(v, section, key),
            None => Ok(default),
        }
    }

    pub fn u64(&self, section: &str, key: &str) -> Result<u64> {
        parse_field(self.require(section, key)?, section, key)
    }

    pub fn u64_or(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.get(section, key) {
            Some(v) => parse_field(v, section, key),
            None => Ok(default),
        }
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64_or(section, key, default as u64)? as usize)
    }

    /// Complex value written as `re im` (space separated).
    pub fn complex(&self, section: &str, key: &str) -> Result<Complex64> {
        let raw = self.require(section, key)?;
        parse_complex(raw, section, key)
    }

    pub fn complex_or(&self, section: &str, key: &str, default: Complex64) -> Result<Complex64> {
        match self.get(section, key) {
            Some(raw) => parse_complex(raw, section, key),
            None => Ok(default),
        }
    }
}

fn field_name(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn parse_field<T: std::str::FromStr>(raw: &str, section: &str, key: &str) -> Result<T> {
    raw.parse().map_err(|_| {
        Error::Config(format!(
            "field {}: cannot parse {:?}",
            field_name(section, key),
            raw
        ))
    })
}

fn parse_complex(raw: &str, section: &str, key: &str) -> Result<Complex64> {
    let parts: Vec<&str> = raw.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "field {}: expected `re im`, got {:?}",
            field_name(section, key),
            raw
        )));
    }
    let re = parse_field(parts[0], section, key)?;
    let im = parse_field(parts[1], section, key)?;
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_values() {
        let doc = ConfigDoc::parse(
            "schema = 1\n\n[problem]\nkind = example-a # comment\nn = 8\n\n[solve]\ntarget = 0.0 0.5\n",
        )
        .unwrap();
        assert_eq!(doc.str_or("problem", "kind", ""), "example-a");
        assert_eq!(doc.u64("problem", "n").unwrap(), 8);
        let z = doc.complex("solve", "target").unwrap();
        assert_eq!((z.re, z.im), (0.0, 0.5));
    }

    #[test]
    fn missing_schema_rejected() {
        let err = ConfigDoc::parse("[problem]\nkind = example-a\n").unwrap_err();
        assert!(err.to_string().contains("schema"));
    }

    #[test]
    fn errors_carry_field_names() {
        let doc = ConfigDoc::parse("schema = 1\n[problem]\nn = not-a-number\n").unwrap();
        let err = doc.u64("problem", "n").unwrap_err();
        assert!(err.to_string().contains("problem.n"));
        let err = doc.f64("problem", "absent").unwrap_err();
        assert!(err.to_string().contains("problem.absent"));
    }
}
