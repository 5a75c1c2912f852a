//! Parameter resolution: flag, then config file, then default. Every
//! resolved value is recorded for the output header.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::Failure;

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::config(format!("line {}: expected key = value", no + 1)));
        };
        let key = k.trim().replace('_', "-");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Failure::config(format!("line {}: duplicate key {key}", no + 1)));
        }
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: Vec<String>,
    pub echoed: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Resolver { file, ..Default::default() }
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.echoed.push((key.to_string(), value.to_string()));
    }

    fn lookup<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        self.used.push(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(s) => s.parse().map(Some).map_err(|e| Failure::config(format!("{key} = {s}: {e}"))),
            None => Ok(None),
        }
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, Failure>
    where
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    /// Like [`Resolver::get`] but the default depends on earlier values.
    pub fn get_with<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: impl FnOnce() -> T,
    ) -> Result<T, Failure>
    where
        T::Err: Display,
    {
        let v = match self.lookup(key, flag)? {
            Some(v) => v,
            None => default(),
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?;
        if let Some(x) = &v {
            self.record(key, x);
        }
        Ok(v)
    }

    pub fn flag(&mut self, key: &str, set: bool) -> Result<bool, Failure> {
        let v = set || self.lookup::<bool>(key, None)?.unwrap_or(false);
        self.record(key, v);
        Ok(v)
    }

    /// Fails on config keys no parameter asked for.
    pub fn finish(&self) -> Result<(), Failure> {
        match self.file.keys().find(|k| !self.used.contains(k)) {
            Some(k) => Err(Failure::config(format!("unknown config key {k}"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_precedence() {
        let cfg = parse_config("# run\nn = 12\nt_max=50 # inline\n\n").unwrap();
        assert_eq!(cfg["t-max"], "50");
        let mut r = Resolver::new(cfg);
        assert_eq!(r.get("n", Some(9u32), 3).unwrap(), 9);
        assert_eq!(r.get("t-max", None, 1.0).unwrap(), 50.0);
        assert_eq!(r.get("samples", None, 7usize).unwrap(), 7);
        assert_eq!(r.echoed[1], ("t-max".to_string(), "50".to_string()));
        r.finish().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config("n 12").is_err());
        assert!(parse_config("n=1\nn=2").is_err());
        let mut r = Resolver::new(parse_config("n = x\nbogus = 1").unwrap());
        assert!(r.get::<u32>("n", None, 3).is_err());
        assert!(r.finish().is_err());
    }
}
