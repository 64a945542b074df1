//! `key=value` settings passed to figure presets.

use std::collections::BTreeMap;

use crate::error::CliError;
use crate::values::parse_values;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    entries: BTreeMap<String, String>,
}

impl Overrides {
    pub fn parse<I, S>(items: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries = BTreeMap::new();
        for item in items {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::usage("override", format!("`{item}` is not key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
                return Err(CliError::usage("override", format!("bad key `{key}`")));
            }
            if value.is_empty() {
                return Err(CliError::usage(key, "empty value"));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::usage(key, "given more than once"));
            }
        }
        Ok(Overrides { entries })
    }

    /// Whitespace-separated `key=value` pairs.
    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        Self::parse(text.split_whitespace())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Fails on any key outside `allowed`.
    pub fn restrict(&self, context: &str, allowed: &[&str]) -> Result<(), CliError> {
        if let Some(k) = self.keys().find(|k| !allowed.contains(k)) {
            return Err(CliError::usage(
                context,
                format!("unknown override `{k}` (accepted: {})", allowed.join(", ")),
            ));
        }
        Ok(())
    }

    pub fn values(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key)
            .map(|v| {
                parse_values(v).map_err(|e| match e {
                    CliError::Usage { reason, .. } => CliError::usage(key, reason),
                    other => other,
                })
            })
            .transpose()
    }

    pub fn counts(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        let Some(values) = self.values(key)? else {
            return Ok(None);
        };
        values
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as usize)
                } else {
                    Err(CliError::usage(key, format!("{v} is not a non-negative integer")))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.values(key)? {
            None => Ok(None),
            Some(v) if v.len() == 1 => Ok(Some(v[0])),
            Some(_) => Err(CliError::usage(key, "expects a single number")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let o = Overrides::parse(["n=25,50,75", "snr = 0:10:40", "a1=0.7"]).unwrap();
        assert_eq!(o.counts("n").unwrap(), Some(vec![25, 50, 75]));
        assert_eq!(o.values("snr").unwrap().unwrap().len(), 5);
        assert_eq!(o.number("a1").unwrap(), Some(0.7));
        assert_eq!(o.number("missing").unwrap(), None);
        assert!(o.restrict("fig2", &["n", "snr", "a1"]).is_ok());
        assert!(o.restrict("fig2", &["n"]).is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert!(Overrides::parse(["n"]).is_err());
        assert!(Overrides::parse(["=3"]).is_err());
        assert!(Overrides::parse(["N=3"]).is_err());
        assert!(Overrides::parse(["n="]).is_err());
        assert!(Overrides::parse(["n=1", "n=2"]).is_err());
        let o = Overrides::parse_str("n=2.5 a1=0.1,0.2").unwrap();
        assert!(o.counts("n").is_err());
        assert!(o.number("a1").is_err());
    }
}
