use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::time::Time;

use super::Workload;

/// Reads an ETC matrix from headerless CSV: one row per task, one column per
/// processor.
pub fn read_etc_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<Time>>> {
    parse_etc_csv(File::open(path)?)
}

pub fn parse_etc_csv(reader: impl Read) -> Result<Vec<Vec<Time>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("ETC entry {f:?} is not a number")))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidConfig(format!("ETC entry {v} must be positive")));
                }
                Ok(Time::from_f64(v))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.len() != first.len()) {
            return Err(Error::InvalidConfig("ETC rows have differing lengths".into()));
        }
    }
    Ok(rows)
}

/// Loads a workload file. Gang member arrivals are aligned with their gang
/// and `etcFile` references are resolved relative to the file's directory.
pub fn load_workload(path: impl AsRef<Path>) -> Result<Workload> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut w: Workload = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for bot in &mut w.bots {
        if bot.etc.is_empty() {
            if let Some(f) = &bot.etc_file {
                bot.etc = read_etc_csv(base.join(f))?;
            }
        }
    }
    w.normalize();
    Ok(w)
}

impl Workload {
    /// Parses workload JSON held in memory. `etcFile` references are not
    /// followed.
    pub fn from_json(text: &str) -> Result<Workload> {
        let mut w: Workload = serde_json::from_str(text)?;
        w.normalize();
        Ok(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("workload serializes")
    }

    fn normalize(&mut self) {
        for g in &mut self.gangs {
            g.normalize();
        }
    }
}
