//! Isotope registry as CSV, one table row per line.
//!
//! Fields use the table's concise notation (`278.9(4)`), optionally with a
//! bracketed systematic (`198(4)[20]`). Absent constants are empty fields.

use std::path::{Path, PathBuf};

use ionkit_core::spectra::{self, IsotopeRecord, Measured};

use crate::error::{Error, Result};

pub const HEADER: [&str; 8] = ["A", "I", "dnu_b", "dnu_r", "A_S12", "A_P12", "A_D32", "B_D32"];

/// File name looked up in the data directory.
pub const FILE_NAME: &str = "registry.csv";

pub fn to_csv(records: &[IsotopeRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in records {
        w.write_record(r.to_fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("fields are UTF-8")
}

/// 1-based column of field `index` in a raw CSV line.
pub(crate) fn column_of(record: &csv::StringRecord, index: usize) -> usize {
    1 + record.iter().take(index).map(|f| f.len() + 1).sum::<usize>()
}

pub fn parse(text: &str, path: &str) -> Result<Vec<IsotopeRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let malformed = |line: u64, column: usize, message: String| Error::Malformed {
        path: path.to_string(),
        line: line as usize,
        column,
        message,
    };
    let mut out: Vec<IsotopeRecord> = Vec::new();
    let mut header_seen = false;
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, 1, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if !header_seen {
            let got: Vec<&str> = row.iter().map(str::trim).collect();
            if got != HEADER {
                return Err(malformed(line, 1, format!("expected header {}", HEADER.join(","))));
            }
            header_seen = true;
            continue;
        }
        if row.len() != HEADER.len() {
            return Err(malformed(line, 1, format!("expected {} fields, found {}", HEADER.len(), row.len())));
        }
        let fields: Vec<&str> = row.iter().map(str::trim).collect();
        if fields[0].parse::<u32>().is_err() {
            return Err(malformed(line, 1, format!("bad mass number {:?}", fields[0])));
        }
        if fields[1].parse::<ionkit_core::HalfInt>().is_err() {
            return Err(malformed(line, column_of(&row, 1), format!("bad nuclear spin {:?}", fields[1])));
        }
        for (k, f) in fields.iter().enumerate().skip(2) {
            if k < 4 || !f.is_empty() {
                if let Err(e) = f.parse::<Measured>() {
                    return Err(malformed(line, column_of(&row, k), format!("{}: {e}", HEADER[k])));
                }
            }
        }
        let arr: [&str; 8] = fields.try_into().expect("length checked");
        let rec = IsotopeRecord::from_fields(&arr).map_err(|e| malformed(line, 1, e.to_string()))?;
        if out.iter().any(|r| r.mass_number == rec.mass_number) {
            return Err(malformed(line, 1, format!("duplicate row for A = {}", rec.mass_number)));
        }
        out.push(rec);
    }
    if !header_seen {
        return Err(malformed(1, 1, "empty registry".into()));
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<IsotopeRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    parse(&text, &path.display().to_string())
}

/// Where the registry came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Embedded,
    File(PathBuf),
}

impl Source {
    pub fn describe(&self) -> String {
        match self {
            Source::Embedded => "embedded".into(),
            Source::File(p) => p.display().to_string(),
        }
    }

    /// Inverse of [`Source::describe`].
    pub fn from_description(s: &str) -> Self {
        if s == "embedded" {
            Source::Embedded
        } else {
            Source::File(PathBuf::from(s))
        }
    }

    pub fn load(&self) -> Result<Vec<IsotopeRecord>> {
        match self {
            Source::Embedded => Ok(spectra::registry()),
            Source::File(p) => read(p),
        }
    }
}

/// An explicit path wins, then `registry.csv` in the data directory, then
/// the embedded table.
pub fn resolve(explicit: Option<&Path>, data_dir: Option<&Path>) -> Source {
    if let Some(p) = explicit {
        return Source::File(p.to_path_buf());
    }
    if let Some(dir) = data_dir {
        let p = dir.join(FILE_NAME);
        if p.is_file() {
            return Source::File(p);
        }
    }
    Source::Embedded
}

pub fn find(records: &[IsotopeRecord], mass_number: u32) -> Result<&IsotopeRecord> {
    records
        .iter()
        .find(|r| r.mass_number == mass_number)
        .ok_or_else(|| Error::domain(spectra::SpectraError::UnknownIsotope(mass_number)))
}
