//! Experiment reports: named scalars and series, bound checks, and their
//! JSON/CSV serialization.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

/// A single asserted inequality `value (>= | <=) bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub holds: bool,
    /// The mathematical statement the bound comes from.
    pub claim: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub scalars: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    /// The statements reproduced by this experiment.
    pub provenance: Vec<String>,
    pub seed: Option<u64>,
    pub meta: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    /// Observations that are reported but not asserted.
    pub flags: Vec<String>,
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{name} = {v}")))
    }
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>) -> Self {
        ExperimentReport {
            name: name.into(),
            scalars: BTreeMap::new(),
            series: BTreeMap::new(),
            provenance: Vec::new(),
            seed: None,
            meta: BTreeMap::new(),
            checks: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn scalar(&mut self, name: &str, value: f64) -> Result<()> {
        require_finite(name, value)?;
        self.scalars.insert(name.to_string(), value);
        Ok(())
    }

    pub fn series(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        for (i, &v) in values.iter().enumerate() {
            require_finite(&format!("{name}[{i}]"), v)?;
        }
        self.series.insert(name.to_string(), values);
        Ok(())
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn provenance(&mut self, statement: &str) {
        self.provenance.push(statement.to_string());
    }

    pub fn flag(&mut self, note: impl Into<String>) {
        self.flags.push(note.into());
    }

    pub fn check(&mut self, name: &str, value: f64, relation: Relation, bound: f64, claim: &str) -> Result<bool> {
        require_finite(name, value)?;
        require_finite(&format!("{name} bound"), bound)?;
        let holds = match relation {
            Relation::AtLeast => value >= bound,
            Relation::AtMost => value <= bound,
        };
        self.checks.push(Check { name: name.to_string(), value, relation, bound, holds, claim: claim.to_string() });
        Ok(holds)
    }

    pub fn check_at_least(&mut self, name: &str, value: f64, bound: f64, claim: &str) -> Result<bool> {
        self.check(name, value, Relation::AtLeast, bound, claim)
    }

    pub fn check_at_most(&mut self, name: &str, value: f64, bound: f64, claim: &str) -> Result<bool> {
        self.check(name, value, Relation::AtMost, bound, claim)
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Series as columns (`index` first, then one column per series in name
    /// order). Shorter series leave trailing cells empty.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("index");
        for name in self.series.keys() {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        let rows = self.series.values().map(Vec::len).max().unwrap_or(0);
        for i in 0..rows {
            out.push_str(&i.to_string());
            for values in self.series.values() {
                out.push(',');
                if let Some(v) = values.get(i) {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// Short SHA-256 digest of the name, seed and parameters.
    pub fn params_hash(&self) -> String {
        let key = serde_json::json!({ "name": self.name, "seed": self.seed, "meta": self.meta });
        let digest = Sha256::digest(key.to_string().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.name, self.params_hash())
    }

    /// Writes `<name>_<hash>.json` and `<name>_<hash>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let stem = self.file_stem();
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        write_atomic(&json, self.to_json()?.as_bytes())?;
        write_atomic(&csv, self.series_csv().as_bytes())?;
        Ok((json, csv))
    }
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_and_serialization() {
        let mut r = ExperimentReport::new("demo");
        r.scalar("x", 1.5).unwrap();
        assert!(r.scalar("bad", f64::NAN).is_err());
        assert!(r.check_at_least("x_lower", 1.5, 1.0, "x >= 1").unwrap());
        assert!(!r.check_at_most("x_upper", 1.5, 1.0, "x <= 1").unwrap());
        assert!(!r.all_hold());
        assert_eq!(r.violations().len(), 1);
        r.series("a", vec![1.0, 2.0, 3.0]).unwrap();
        r.series("b", vec![0.5]).unwrap();
        assert_eq!(r.series_csv(), "index,a,b\n0,1,0.5\n1,2,\n2,3,\n");
        let back: ExperimentReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn hash_depends_on_parameters() {
        let mut a = ExperimentReport::new("demo");
        a.meta("n", 4);
        let mut b = a.clone();
        assert_eq!(a.params_hash(), b.params_hash());
        b.meta("n", 5);
        assert_ne!(a.params_hash(), b.params_hash());
        a.scalar("ignored", 1.0).unwrap();
        assert_eq!(a.file_stem(), format!("demo_{}", a.params_hash()));
    }
}
