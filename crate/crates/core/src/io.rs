//! Versioned CSV tables and JSON helpers.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

/// A CSV table whose first line is `# <name> v<version>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub version: u32,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, version: u32, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            version,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|v| v.to_string()).collect();
        if row.len() != self.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "table {} has {} columns, row has {}",
                self.name,
                self.columns.len(),
                row.len()
            )));
        }
        if let Some(cell) = row.iter().find(|c| c.contains([',', '\n'])) {
            return Err(Error::InvalidArgument(format!("cell {cell:?} needs quoting")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {} v{}\n{}\n", self.name, self.version, self.columns.join(","));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::InvalidArgument("missing version header".into()))?;
        let (name, version) = header
            .rsplit_once(" v")
            .and_then(|(n, v)| Some((n, v.parse::<u32>().ok()?)))
            .ok_or_else(|| Error::InvalidArgument(format!("bad header {header:?}")))?;
        let columns: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("missing column line".into()))?
            .split(',')
            .collect();
        let mut table = Table::new(name, version, &columns);
        for line in lines.filter(|l| !l.is_empty()) {
            table.push(line.split(','))?;
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))
}
