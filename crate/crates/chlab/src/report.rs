//! CSV exports of CH reports, partition reports and scans.
//!
//! All numbers are written with Rust's shortest round-trip formatting, so a
//! report is a pure function of the values it holds.

use std::io::{self, BufWriter, Write};
use std::path::Path;

use chlab_core::analysis::{PartitionReport, ScanTable};
use chlab_core::inequality::ChReport;

/// Writes through a temporary file in the destination directory and renames
/// it over `path` once complete, so readers never see a partial file.
pub fn write_atomically<F>(path: &Path, body: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    let mut out = BufWriter::new(tmp);
    body(&mut out)?;
    let tmp = out.into_inner().map_err(|e| e.into_error())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_to(out: &mut dyn Write, header: &[&str], rows: Vec<Vec<String>>) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

/// `variant,value,violated`: one row per CH variant.
pub fn ch_report_rows(report: &ChReport) -> Vec<Vec<String>> {
    (0..4)
        .map(|i| vec![i.to_string(), report.value(i).to_string(), flag(report.violated()[i])])
        .collect()
}

pub fn write_ch_report(path: &Path, report: &ChReport) -> io::Result<()> {
    write_atomically(path, |out| {
        csv_to(out, &["variant", "value", "violated"], ch_report_rows(report))
    })
}

/// `row,v0,v1,v2,v3,any`. Rows `0..k` hold each partition's variant values
/// and whether any variant was violated (1/0). Then three summary rows:
/// `fraction` (per-variant and any-variant violation fractions), and
/// `band_low` / `band_high` (the binomial 3σ band around one half).
pub fn partition_report_rows(report: &PartitionReport) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = report
        .partitions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![i.to_string()];
            row.extend(p.values().iter().map(f64::to_string));
            row.push(flag(p.any_violated()));
            row
        })
        .collect();
    let mut fraction = vec!["fraction".to_owned()];
    fraction.extend(report.fractions.iter().map(f64::to_string));
    fraction.push(report.any_fraction.to_string());
    rows.push(fraction);
    let (lo, hi) = report.band();
    for (name, v) in [("band_low", lo), ("band_high", hi)] {
        let mut row = vec![name.to_owned()];
        row.extend(std::iter::repeat_n(v.to_string(), 4));
        row.push(String::new());
        rows.push(row);
    }
    rows
}

pub fn write_partition_report(path: &Path, report: &PartitionReport) -> io::Result<()> {
    write_atomically(path, |out| {
        csv_to(
            out,
            &["row", "v0", "v1", "v2", "v3", "any"],
            partition_report_rows(report),
        )
    })
}

pub const SCAN_HEADER: [&str; 7] = ["r", "eta", "variant", "expected", "value", "std_error", "fraction"];

/// Long format: one row per (cell, variant).
pub fn scan_rows(table: &ScanTable) -> Vec<Vec<String>> {
    table
        .cells
        .iter()
        .flat_map(|c| {
            (0..4).map(move |v| {
                vec![
                    c.r.to_string(),
                    c.eta.to_string(),
                    v.to_string(),
                    c.expected[v].to_string(),
                    c.values[v].to_string(),
                    c.std_errors[v].to_string(),
                    c.fractions[v].to_string(),
                ]
            })
        })
        .collect()
}

pub fn write_scan(path: &Path, table: &ScanTable) -> io::Result<()> {
    write_atomically(path, |out| csv_to(out, &SCAN_HEADER, scan_rows(table)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ch_report_has_four_rows() {
        let r = ChReport::from_values([0.2, -0.1, 0.0, -0.3]);
        let rows = ch_report_rows(&r);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0], ["0", "0.2", "1"]);
        assert_eq!(rows[2], ["2", "0", "0"]);
    }

    #[test]
    fn partition_report_rows_and_summary() {
        let parts = (0..100)
            .map(|i| ChReport::from_values([i as f64 - 49.5, -1.0, -1.0, -1.0]))
            .collect();
        let rep = PartitionReport::from_partitions(parts).unwrap();
        let rows = partition_report_rows(&rep);
        assert_eq!(rows.len(), 103);
        assert_eq!(rows[100][0], "fraction");
        assert_eq!(rows[100][1], "0.5");
        assert_eq!(rows[101][1], "0.35");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, "old").unwrap();
        write_ch_report(&p, &ChReport::from_values([0.0; 4])).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("variant,value,violated\n"));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
