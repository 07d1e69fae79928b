//! Prefix-scoped string options that drive all solver composition.
//!
//! Keys are lowercase `[a-z0-9_]` tokens. A scope with prefix `fieldsplit_p_`
//! looks up `fieldsplit_p_<key>`. Every lookup marks the full key consumed and
//! records the effective value (the default when the key is absent), which is
//! what [`OptionsDb::resolved`] and [`OptionsDb::unused_keys`] report.

use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use indexmap::IndexMap;

use crate::{Error, Result};

#[derive(Debug, Default)]
pub struct OptionsDb {
    entries: IndexMap<String, String>,
    consumed: Mutex<IndexMap<String, String>>,
}

impl Clone for OptionsDb {
    fn clone(&self) -> Self {
        Self {
            entries: self.entries.clone(),
            consumed: Mutex::new(self.consumed.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for OptionsDb {
    /// Compares entries only; consumption marks are bookkeeping.
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

fn normalize_key(raw: &str) -> Option<String> {
    let key = raw.to_ascii_lowercase();
    let ok = !key.is_empty()
        && key.starts_with(|c: char| c.is_ascii_alphabetic())
        && key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
    ok.then_some(key)
}

/// `-name` where the character after the dash starts an identifier, so that
/// negative numbers like `-1` or `-.5` stay values.
fn is_key_token(tok: &str) -> bool {
    tok.strip_prefix('-')
        .and_then(|rest| rest.chars().next())
        .is_some_and(|c| c.is_ascii_alphabetic())
}

impl OptionsDb {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `-key [value]` tokens. A key followed by another key (or by
    /// nothing) is a flag with value `"true"`. Later duplicates win.
    pub fn parse_args<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        let mut db = Self::new();
        let mut k = 0;
        while k < tokens.len() {
            let tok = tokens[k].as_ref();
            if !is_key_token(tok) {
                return Err(Error::Parse {
                    location: format!("token {k}"),
                    msg: format!("expected an option key starting with '-', found '{tok}'"),
                });
            }
            let key = normalize_key(&tok[1..]).ok_or_else(|| Error::Parse {
                location: format!("token {k}"),
                msg: format!("invalid option key '{tok}'"),
            })?;
            match tokens.get(k + 1).map(AsRef::as_ref) {
                Some(v) if !is_key_token(v) => {
                    db.set(key, v);
                    k += 2;
                }
                _ => {
                    db.set(key, "true");
                    k += 1;
                }
            }
        }
        Ok(db)
    }

    /// Parses an options file: one `-key value` or `key: value` per line,
    /// `#` starts a comment line, blank lines are ignored.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut db = Self::new();
        for (n, raw) in text.split('\n').enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse {
                location: format!("line {}", n + 1),
                msg,
            };
            let (key, value) = if let Some(rest) = line.strip_prefix('-') {
                let mut parts = rest.splitn(2, char::is_whitespace);
                let k = parts.next().unwrap_or("");
                (k, parts.next().map(str::trim).unwrap_or(""))
            } else if let Some((k, v)) = line.split_once(':') {
                (k.trim(), v.trim())
            } else {
                return Err(err(format!("expected '-key value' or 'key: value', found '{line}'")));
            };
            let key = normalize_key(key).ok_or_else(|| err(format!("invalid option key '{key}'")))?;
            db.set(key, if value.is_empty() { "true" } else { value });
        }
        Ok(db)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_file(&text).map_err(|e| match e {
            Error::Parse { location, msg } => Error::Parse {
                location: format!("{}:{location}", path.display()),
                msg,
            },
            other => other,
        })
    }

    /// `key: value` lines in insertion order.
    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.shift_remove(key)
    }

    /// Applies `other` on top of `self`; its entries win.
    pub fn merge(&mut self, other: &OptionsDb) {
        for (k, v) in &other.entries {
            self.set(k.clone(), v.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Raw lookup without marking.
    pub fn peek(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn scope(&self) -> OptionsScope<'_> {
        OptionsScope {
            db: self,
            prefix: String::new(),
        }
    }

    /// Keys never consumed by a lookup, in insertion order.
    pub fn unused_keys(&self) -> Vec<String> {
        let consumed = self.consumed.lock().unwrap();
        self.entries
            .keys()
            .filter(|k| !consumed.contains_key(*k))
            .cloned()
            .collect()
    }

    /// Every consumed key with the value that took effect, in first-use order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.consumed
            .lock()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    pub fn clear_marks(&self) {
        self.consumed.lock().unwrap().clear();
    }

    /// Logs unused keys, or fails on them when `strict`.
    pub fn check_unused(&self, strict: bool) -> Result<()> {
        let unused = self.unused_keys();
        if unused.is_empty() {
            return Ok(());
        }
        if strict {
            return Err(Error::config(unused[0].clone(), format!("unused option(s): {}", unused.join(", "))));
        }
        for k in &unused {
            log::warn!("option '{k}' was set but never used");
        }
        Ok(())
    }

    fn mark(&self, key: &str, effective: &str) {
        let mut consumed = self.consumed.lock().unwrap();
        consumed.entry(key.to_string()).or_insert_with(|| effective.to_string());
    }
}

#[derive(Debug, Clone)]
pub struct OptionsScope<'a> {
    db: &'a OptionsDb,
    prefix: String,
}

impl<'a> OptionsScope<'a> {
    pub fn db(&self) -> &'a OptionsDb {
        self.db
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    /// Scope for `prefix + segment + "_"`, never producing doubled underscores.
    pub fn child(&self, segment: &str) -> OptionsScope<'a> {
        let seg = segment.trim_matches('_');
        debug_assert!(!seg.is_empty(), "child scope segment must be non-empty");
        if seg.is_empty() {
            return self.clone();
        }
        OptionsScope {
            db: self.db,
            prefix: format!("{}{}_", self.prefix, seg),
        }
    }

    pub fn full_key(&self, key: &str) -> String {
        format!("{}{}", self.prefix, key)
    }

    /// Presence test that does not mark the key.
    pub fn has(&self, key: &str) -> bool {
        self.db.entries.contains_key(&self.full_key(key))
    }

    /// Value when present (and marks it); absent keys are left unmarked.
    pub fn get_opt(&self, key: &str) -> Option<String> {
        let full = self.full_key(key);
        let v = self.db.entries.get(&full)?.clone();
        self.db.mark(&full, &v);
        Some(v)
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        let full = self.full_key(key);
        let v = self.db.entries.get(&full).cloned().unwrap_or_else(|| default.to_string());
        self.db.mark(&full, &v);
        v
    }

    /// Parses the value at use; failures name the full key.
    pub fn get<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + std::fmt::Debug,
    {
        let full = self.full_key(key);
        match self.db.entries.get(&full) {
            Some(raw) => {
                self.db.mark(&full, raw);
                raw.trim()
                    .parse()
                    .map_err(|_| Error::config(full, format!("cannot parse value '{raw}'")))
            }
            None => {
                // Debug keeps exponents for tiny and huge floats
                self.db.mark(&full, &format!("{default:?}"));
                Ok(default)
            }
        }
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        let full = self.full_key(key);
        let raw = self.get_str(key, if default { "true" } else { "false" });
        match raw.to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            _ => Err(Error::config(full, format!("expected a boolean, found '{raw}'"))),
        }
    }

    /// Parses the value into one of a fixed set of choices.
    pub fn get_choice<T: Copy>(&self, key: &str, default: &str, choices: &[(&str, T)]) -> Result<T> {
        let raw = self.get_str(key, default);
        let lower = raw.to_ascii_lowercase();
        choices
            .iter()
            .find(|(name, _)| *name == lower)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                let names: Vec<&str> = choices.iter().map(|c| c.0).collect();
                Error::config(
                    self.full_key(key),
                    format!("unknown value '{raw}' (expected one of: {})", names.join(", ")),
                )
            })
    }
}
