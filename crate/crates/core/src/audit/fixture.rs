//! Reference tick patterns, one CSV per table.
//!
//! Files start with `#` header lines carrying the convention string and the
//! table id, then a CSV header `row,<column>…` and one line per monomial
//! with values `1`, `0` or `*` (absent when 2n = 8).

use std::collections::BTreeMap;
use std::path::Path;

use super::tables::TableId;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Tick,
    Blank,
    /// Footnoted tick that is absent when 2n = 8.
    AbsentAt8,
}

impl Expect {
    fn parse(s: &str) -> Result<Expect> {
        match s.trim() {
            "1" => Ok(Expect::Tick),
            "0" => Ok(Expect::Blank),
            "*" => Ok(Expect::AbsentAt8),
            other => Err(Error::Fixture(format!("bad cell value {:?}", other))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub table: TableId,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    cells: BTreeMap<(String, String), Expect>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Fixture> {
        let mut convention = None;
        let mut table = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            if let Some(c) = body.strip_prefix("convention:") {
                convention = Some(c.trim().to_string());
            } else if let Some(t) = body.strip_prefix("table:") {
                let id = t.split_whitespace().next().unwrap_or("");
                table = Some(TableId::parse(id)?);
            }
        }
        match convention {
            Some(c) if c == crate::CONVENTION => {}
            Some(_) => return Err(Error::Fixture("convention string does not match this build".into())),
            None => return Err(Error::Fixture("missing convention header".into())),
        }
        let table = table.ok_or_else(|| Error::Fixture("missing table header".into()))?;
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("row") {
            return Err(Error::Fixture("first column must be `row`".into()));
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut cells = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.get(0).unwrap_or("").to_string();
            if rec.len() != columns.len() + 1 {
                return Err(Error::Fixture(format!("row {} has {} fields, expected {}", row, rec.len(), columns.len() + 1)));
            }
            for (c, v) in columns.iter().zip(rec.iter().skip(1)) {
                cells.insert((row.clone(), c.clone()), Expect::parse(v)?);
            }
            rows.push(row);
        }
        Ok(Fixture { table, columns, rows, cells })
    }

    /// Reads `<dir>/<table>.csv`.
    pub fn load(dir: &Path, table: TableId) -> Result<Fixture> {
        let path = dir.join(format!("{}.csv", table.label()));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Fixture(format!("{}: {}", path.display(), e)))?;
        let f = Fixture::parse(&text)?;
        if f.table != table {
            return Err(Error::Fixture(format!("{} declares table {}", path.display(), f.table)));
        }
        Ok(f)
    }

    pub fn expect(&self, row: &str, col: &str) -> Option<Expect> {
        self.cells.get(&(row.to_string(), col.to_string())).copied()
    }
}
