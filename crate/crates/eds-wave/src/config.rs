//! Declarative experiment configuration.
//!
//! The format is a small INI dialect: `[section]` headers, `key = value`
//! pairs, `#` or `;` comments, blank lines ignored. Values stay strings
//! until a typed getter interprets them, so one parsed file can feed
//! several experiment modes. Command-line overrides use the dotted form
//! `section.key=value`.

use std::collections::BTreeMap;

use crate::error::Error;

/// Parsed configuration: top-level pairs plus named sections, both ordered
/// for deterministic re-serialization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub top: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn config_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line: Some(line), msg: msg.into() }
}

impl RawConfig {
    /// Parse a config text. Errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<RawConfig, Error> {
        let mut cfg = RawConfig::default();
        let mut current: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(lineno, "unterminated section header"))?
                    .trim();
                if !valid_name(name) {
                    return Err(config_err(lineno, format!("invalid section name {name:?}")));
                }
                let key = name.to_string();
                if cfg.sections.contains_key(&key) {
                    return Err(config_err(lineno, format!("duplicate section [{key}]")));
                }
                cfg.sections.insert(key.clone(), BTreeMap::new());
                current = Some(key);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(lineno, format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(config_err(lineno, format!("invalid key {key:?}")));
            }
            // Allow a trailing comment after the value.
            let value = match value.find(['#', ';']) {
                Some(pos) => &value[..pos],
                None => value,
            }
            .trim()
            .to_string();
            let map = match &current {
                Some(name) => cfg.sections.get_mut(name).expect("section exists"),
                None => &mut cfg.top,
            };
            if map.insert(key.to_string(), value).is_some() {
                return Err(config_err(lineno, format!("duplicate key {key:?}")));
            }
        }
        Ok(cfg)
    }

    /// Apply a `section.key=value` (or `key=value`) override, replacing any
    /// existing entry.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), Error> {
        let (path, value) = assignment.split_once('=').ok_or_else(|| Error::Config {
            line: None,
            msg: format!("override {assignment:?} must look like section.key=value"),
        })?;
        let value = value.trim().to_string();
        let path = path.trim();
        match path.split_once('.') {
            Some((section, key)) => {
                if !valid_name(section.trim()) || !valid_name(key.trim()) {
                    return Err(Error::Config {
                        line: None,
                        msg: format!("invalid override path {path:?}"),
                    });
                }
                self.sections
                    .entry(section.trim().to_string())
                    .or_default()
                    .insert(key.trim().to_string(), value);
            }
            None => {
                if !valid_name(path) {
                    return Err(Error::Config {
                        line: None,
                        msg: format!("invalid override key {path:?}"),
                    });
                }
                self.top.insert(path.to_string(), value);
            }
        }
        Ok(())
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        if section.is_empty() {
            self.top.get(key).map(String::as_str)
        } else {
            self.sections.get(section).and_then(|m| m.get(key)).map(String::as_str)
        }
    }

    fn typed_err(&self, section: &str, key: &str, value: &str, ty: &str) -> Error {
        let path = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        Error::Config { line: None, msg: format!("{path} = {value:?} is not a valid {ty}") }
    }

    pub fn get_str(&self, section: &str, key: &str) -> Option<&str> {
        self.raw(section, key)
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, Error> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => {
                let parsed: f64 =
                    v.parse().map_err(|_| self.typed_err(section, key, v, "number"))?;
                if parsed.is_finite() {
                    Ok(Some(parsed))
                } else {
                    Err(self.typed_err(section, key, v, "finite number"))
                }
            }
        }
    }

    pub fn get_u32(&self, section: &str, key: &str) -> Result<Option<u32>, Error> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| self.typed_err(section, key, v, "unsigned integer"))
            }
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>, Error> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| self.typed_err(section, key, v, "unsigned integer"))
            }
        }
    }

    pub fn get_bool(&self, section: &str, key: &str) -> Result<Option<bool>, Error> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(Some(true)),
                "false" | "no" | "0" | "off" => Ok(Some(false)),
                _ => Err(self.typed_err(section, key, v, "boolean")),
            },
        }
    }

    /// Comma-separated list of numbers; an empty value is an empty list.
    pub fn get_f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, Error> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) if v.trim().is_empty() => Ok(Some(Vec::new())),
            Some(v) => v
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    let parsed: f64 =
                        item.parse().map_err(|_| self.typed_err(section, key, item, "number"))?;
                    if parsed.is_finite() {
                        Ok(parsed)
                    } else {
                        Err(self.typed_err(section, key, item, "finite number"))
                    }
                })
                .collect::<Result<Vec<f64>, Error>>()
                .map(Some),
        }
    }

    /// Canonical single-line rendering, used for the CSV provenance comment.
    pub fn render_flat(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (k, v) in &self.top {
            parts.push(format!("{k}={v}"));
        }
        for (name, map) in &self.sections {
            for (k, v) in map {
                parts.push(format!("{name}.{k}={v}"));
            }
        }
        parts.join(" ")
    }
}
