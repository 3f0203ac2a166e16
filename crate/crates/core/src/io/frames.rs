//! Frame-feature CSV cache.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{Condition, FrameFeatureRow};

pub const FRAME_CSV_HEADER: [&str; 8] = ["subject_id", "condition", "day", "frame_index", "voiced", "f0_hz", "h1h2_db", "nsam_db"];

/// Consecutive frames of one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTable {
    pub subject_id: String,
    pub condition: Condition,
    pub day: Option<u32>,
    pub rows: Vec<FrameFeatureRow>,
}

/// Nine significant digits, printed in the shortest form that parses back
/// to the same rounded value.
pub fn format_sig9(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig9).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

pub fn write_frame_csv(tables: &[FrameTable], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(FRAME_CSV_HEADER).map_err(|e| csv_err(path, e))?;
    for t in tables {
        let day = t.day.map(|d| d.to_string()).unwrap_or_default();
        for r in &t.rows {
            w.write_record([
                t.subject_id.as_str(),
                t.condition.as_str(),
                &day,
                &r.frame_index.to_string(),
                if r.voiced { "1" } else { "0" },
                &opt(r.f0_hz),
                &opt(r.h1h2_db),
                &opt(r.nsam_db),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, line: u64) -> Result<&'a str> {
    rec.get(i).ok_or_else(|| Error::Parse(format!("line {line}: missing column {}", FRAME_CSV_HEADER[i])))
}

fn parse_opt(s: &str, line: u64) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
}

/// Reads a frame CSV; consecutive rows with the same recording key form
/// one table.
pub fn read_frame_csv(path: &Path) -> Result<Vec<FrameTable>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(BufReader::new(file));
    let mut records = r.records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| csv_err(path, e))?,
        None => return Err(Error::SchemaMismatch(format!("{}: empty file", path.display()))),
    };
    if header.iter().ne(FRAME_CSV_HEADER) {
        return Err(Error::SchemaMismatch(format!("{}: {:?}", path.display(), header.iter().collect::<Vec<_>>())));
    }
    let mut tables: Vec<FrameTable> = Vec::new();
    for (n, rec) in records.enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = n as u64 + 2;
        if rec.len() != FRAME_CSV_HEADER.len() {
            return Err(Error::SchemaMismatch(format!("line {line}: {} columns", rec.len())));
        }
        let subject_id = field(&rec, 0, line)?;
        let condition: Condition = field(&rec, 1, line)?.parse()?;
        let day = match field(&rec, 2, line)? {
            "" => None,
            d => Some(d.parse::<u32>().map_err(|_| Error::Parse(format!("line {line}: bad day {d:?}")))?),
        };
        let frame_index = field(&rec, 3, line)?
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("line {line}: bad frame index")))?;
        let voiced = match field(&rec, 4, line)? {
            "1" => true,
            "0" => false,
            v => return Err(Error::Parse(format!("line {line}: bad voiced flag {v:?}"))),
        };
        let row = FrameFeatureRow {
            frame_index,
            voiced,
            f0_hz: parse_opt(field(&rec, 5, line)?, line)?,
            h1h2_db: parse_opt(field(&rec, 6, line)?, line)?,
            nsam_db: parse_opt(field(&rec, 7, line)?, line)?,
        };
        match tables.last_mut() {
            Some(t) if t.subject_id == subject_id && t.condition == condition && t.day == day => t.rows.push(row),
            _ => tables.push(FrameTable { subject_id: subject_id.to_owned(), condition, day, rows: vec![row] }),
        }
    }
    Ok(tables)
}
