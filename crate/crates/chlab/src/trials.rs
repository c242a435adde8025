//! Trial-record files.
//!
//! Two line-oriented formats carry the same five fields in the same order:
//!
//! * CSV, with header `index,a_setting,b_setting,a_detect,b_detect` and
//!   `0`/`1` for settings (`0` = unprimed) and flags.
//! * JSON lines, one object per line with the same keys and values.
//!
//! Indices must be strictly increasing. An empty file is an empty stream.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chlab_core::analysis::TrialRecord;
use chlab_core::{Setting, SettingPair};
use serde::{Deserialize, Serialize};

use crate::report::write_atomically;

pub const CSV_HEADER: &str = "index,a_setting,b_setting,a_detect,b_detect";

#[derive(Debug, thiserror::Error)]
pub enum TrialsError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Malformed { path: PathBuf, line: u64, message: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TrialFormat {
    #[default]
    Csv,
    Jsonl,
}

impl TrialFormat {
    /// `.jsonl` and `.ndjson` are JSON lines; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => TrialFormat::Jsonl,
            _ => TrialFormat::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            TrialFormat::Csv => "csv",
            TrialFormat::Jsonl => "jsonl",
        }
    }
}

impl FromStr for TrialFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(TrialFormat::Csv),
            "jsonl" => Ok(TrialFormat::Jsonl),
            other => Err(format!("unknown trial format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    index: u64,
    a_setting: u8,
    b_setting: u8,
    a_detect: u8,
    b_detect: u8,
}

fn write_record<W: Write + ?Sized>(out: &mut W, r: &TrialRecord, format: TrialFormat) -> io::Result<()> {
    let (a, b) = (r.alice_setting.index(), r.bob_setting.index());
    let (x, y) = (u8::from(r.alice_detect), u8::from(r.bob_detect));
    match format {
        TrialFormat::Csv => writeln!(out, "{},{a},{b},{x},{y}", r.index),
        TrialFormat::Jsonl => {
            let j = JsonRecord {
                index: r.index,
                a_setting: a as u8,
                b_setting: b as u8,
                a_detect: x,
                b_detect: y,
            };
            serde_json::to_writer(&mut *out, &j)?;
            out.write_all(b"\n")
        }
    }
}

/// Writes all records to `path`, replacing it atomically.
pub fn write_trials(records: &[TrialRecord], path: &Path, format: TrialFormat) -> Result<(), TrialsError> {
    write_atomically(path, |out| {
        if format == TrialFormat::Csv {
            writeln!(out, "{CSV_HEADER}")?;
        }
        for r in records {
            write_record(out, r, format)?;
        }
        Ok(())
    })
    .map_err(|source| TrialsError::Io {
        path: path.to_owned(),
        source,
    })
}

fn bit(field: &str, v: u8) -> Result<bool, String> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(format!("{field} must be 0 or 1, got {v}")),
    }
}

fn setting(field: &str, v: u8) -> Result<Setting, String> {
    Setting::from_index(v).ok_or_else(|| format!("{field} must be 0 or 1, got {v}"))
}

fn parse_csv_line(line: &str) -> Result<TrialRecord, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let index = fields[0]
        .parse::<u64>()
        .map_err(|_| format!("index `{}` is not a nonnegative integer", fields[0]))?;
    let small = |i: usize, name: &str| {
        fields[i]
            .parse::<u8>()
            .map_err(|_| format!("{name} `{}` must be 0 or 1", fields[i]))
    };
    let pair = SettingPair::new(
        setting("a_setting", small(1, "a_setting")?)?,
        setting("b_setting", small(2, "b_setting")?)?,
    );
    Ok(TrialRecord::new(
        index,
        pair,
        bit("a_detect", small(3, "a_detect")?)?,
        bit("b_detect", small(4, "b_detect")?)?,
    ))
}

fn parse_json_line(line: &str) -> Result<TrialRecord, String> {
    let j: JsonRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let pair = SettingPair::new(setting("a_setting", j.a_setting)?, setting("b_setting", j.b_setting)?);
    Ok(TrialRecord::new(
        j.index,
        pair,
        bit("a_detect", j.a_detect)?,
        bit("b_detect", j.b_detect)?,
    ))
}

/// Streams records from any line source. Errors carry 1-based line numbers.
pub struct TrialReader<R> {
    lines: io::Lines<R>,
    path: PathBuf,
    format: TrialFormat,
    line: u64,
    last_index: Option<u64>,
}

impl<R: BufRead> TrialReader<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>, format: TrialFormat) -> Self {
        Self {
            lines: reader.lines(),
            path: path.into(),
            format,
            line: 0,
            last_index: None,
        }
    }

    fn malformed(&self, message: impl Into<String>) -> TrialsError {
        TrialsError::Malformed {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }
}

impl<R: BufRead> Iterator for TrialReader<R> {
    type Item = Result<TrialRecord, TrialsError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(source) => {
                    return Some(Err(TrialsError::Io {
                        path: self.path.clone(),
                        source,
                    }))
                }
            };
            self.line += 1;
            if self.format == TrialFormat::Csv && self.line == 1 {
                if text.trim() != CSV_HEADER {
                    return Some(Err(self.malformed(format!("expected header `{CSV_HEADER}`"))));
                }
                continue;
            }
            if text.trim().is_empty() {
                continue;
            }
            let parsed = match self.format {
                TrialFormat::Csv => parse_csv_line(&text),
                TrialFormat::Jsonl => parse_json_line(&text),
            };
            let record = match parsed {
                Ok(r) => r,
                Err(m) => return Some(Err(self.malformed(m))),
            };
            if let Some(prev) = self.last_index {
                if record.index <= prev {
                    return Some(Err(self.malformed(format!(
                        "index {} does not increase (previous {prev})",
                        record.index
                    ))));
                }
            }
            self.last_index = Some(record.index);
            return Some(Ok(record));
        }
    }
}

/// Reads a whole trial file; the format follows the extension.
pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>, TrialsError> {
    let file = File::open(path).map_err(|source| TrialsError::Io {
        path: path.to_owned(),
        source,
    })?;
    TrialReader::new(BufReader::new(file), path, TrialFormat::from_path(path)).collect()
}

/// Writes records to any writer, for streaming output.
pub fn write_trials_to(out: impl Write, records: &[TrialRecord], format: TrialFormat) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    if format == TrialFormat::Csv {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for r in records {
        write_record(&mut out, r, format)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, format: TrialFormat) -> Result<Vec<TrialRecord>, TrialsError> {
        TrialReader::new(text.as_bytes(), "mem", format).collect()
    }

    fn line_of(e: TrialsError) -> u64 {
        match e {
            TrialsError::Malformed { line, .. } => line,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn empty_input_is_empty_stream() {
        assert!(parse("", TrialFormat::Csv).unwrap().is_empty());
        assert!(parse("", TrialFormat::Jsonl).unwrap().is_empty());
        assert!(parse(&format!("{CSV_HEADER}\n"), TrialFormat::Csv).unwrap().is_empty());
    }

    #[test]
    fn csv_errors_name_the_line() {
        let text = format!("{CSV_HEADER}\n0,0,1,1,0\n1,1,1,0,0\n2,0,1\n");
        assert_eq!(line_of(parse(&text, TrialFormat::Csv).unwrap_err()), 4);
        let text = format!("{CSV_HEADER}\n0,0,1,1,0\n1,2,1,0,0\n");
        assert_eq!(line_of(parse(&text, TrialFormat::Csv).unwrap_err()), 3);
        let text = format!("{CSV_HEADER}\n5,0,1,1,0\n5,0,1,1,0\n");
        assert_eq!(line_of(parse(&text, TrialFormat::Csv).unwrap_err()), 3);
        assert_eq!(line_of(parse("a,b,c\n", TrialFormat::Csv).unwrap_err()), 1);
    }

    #[test]
    fn jsonl_errors_name_the_line() {
        let text = "{\"index\":0,\"a_setting\":0,\"b_setting\":1,\"a_detect\":1,\"b_detect\":0}\n{\"index\":1,\"a_set";
        assert_eq!(line_of(parse(text, TrialFormat::Jsonl).unwrap_err()), 2);
        let text = "{\"index\":0,\"a_setting\":0,\"b_setting\":1,\"a_detect\":1,\"b_detect\":0,\"x\":1}\n";
        assert_eq!(line_of(parse(text, TrialFormat::Jsonl).unwrap_err()), 1);
    }

    #[test]
    fn round_trip_through_memory() {
        let recs: Vec<_> = (0..50u64)
            .map(|i| TrialRecord::new(i * 3, SettingPair::from_index((i % 4) as usize), i % 2 == 0, i % 7 == 0))
            .collect();
        for format in [TrialFormat::Csv, TrialFormat::Jsonl] {
            let mut buf = Vec::new();
            write_trials_to(&mut buf, &recs, format).unwrap();
            let text = String::from_utf8(buf).unwrap();
            assert_eq!(parse(&text, format).unwrap(), recs);
        }
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(TrialFormat::from_path(Path::new("a/t.jsonl")), TrialFormat::Jsonl);
        assert_eq!(TrialFormat::from_path(Path::new("t.csv")), TrialFormat::Csv);
        assert_eq!(TrialFormat::from_path(Path::new("t")), TrialFormat::Csv);
    }
}
