//! CSV serialization of sweep tables.
//!
//! Numbers are written with Rust's shortest-roundtrip float formatting, so a
//! parse of the file reproduces every value exactly (well beyond the
//! 12-significant-digit contract). Absent estimates (no-signal rows) leave
//! their cells empty; the infinite SNR level is the literal `inf`.

use std::fs;
use std::path::Path;

use super::{SweepParameter, SweepRow, SweepTable};
use crate::noise::SnrLevel;
use crate::{DifxError, Result};

pub const CSV_HEADER: &str =
    "param,value,snr_db,width_rms_px,height_rms_px,bumpiness,chrom_r,chrom_g,chrom_b,no_signal";

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(table: &SweepTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(DifxError::InvalidArgument("refusing to write an empty table".into()));
    }
    let mut out = String::with_capacity(64 * (table.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        let chroma = row.report.chromaticity;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            table.parameter.token(),
            row.value,
            row.snr,
            cell(row.report.width_rms_px),
            cell(row.report.height_rms_px),
            cell(row.report.bumpiness),
            cell(chroma.map(|c| c[0])),
            cell(chroma.map(|c| c[1])),
            cell(chroma.map(|c| c[2])),
            row.report.no_signal,
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// One parsed CSV row; mirrors the written columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub param: SweepParameter,
    pub value: f64,
    pub snr: SnrLevel,
    pub width_rms_px: Option<f64>,
    pub height_rms_px: Option<f64>,
    pub bumpiness: Option<f64>,
    pub chrom: [Option<f64>; 3],
    pub no_signal: bool,
}

impl CsvRow {
    pub(crate) fn from_sweep(param: SweepParameter, row: &SweepRow) -> Self {
        Self {
            param,
            value: row.value,
            snr: row.snr,
            width_rms_px: row.report.width_rms_px,
            height_rms_px: row.report.height_rms_px,
            bumpiness: row.report.bumpiness,
            chrom: match row.report.chromaticity {
                Some(c) => [Some(c[0]), Some(c[1]), Some(c[2])],
                None => [None; 3],
            },
            no_signal: row.report.no_signal,
        }
    }
}

fn parse_cell(text: &str, line: usize, col: &str) -> Result<Option<f64>> {
    if text.is_empty() {
        return Ok(None);
    }
    text.parse::<f64>().map(Some).map_err(|_| {
        DifxError::Format(format!("line {line}: bad {col} value `{text}`"))
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(DifxError::Format(format!(
                "unexpected CSV header `{header}`"
            )))
        }
        None => return Err(DifxError::Format("empty CSV file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(DifxError::Format(format!(
                "line {}: expected 10 fields, found {}",
                i + 1,
                fields.len()
            )));
        }
        rows.push(CsvRow {
            param: SweepParameter::from_token(fields[0])?,
            value: fields[1].parse().map_err(|_| {
                DifxError::Format(format!("line {}: bad value `{}`", i + 1, fields[1]))
            })?,
            snr: SnrLevel::parse(fields[2])?,
            width_rms_px: parse_cell(fields[3], i + 1, "width_rms_px")?,
            height_rms_px: parse_cell(fields[4], i + 1, "height_rms_px")?,
            bumpiness: parse_cell(fields[5], i + 1, "bumpiness")?,
            chrom: [
                parse_cell(fields[6], i + 1, "chrom_r")?,
                parse_cell(fields[7], i + 1, "chrom_g")?,
                parse_cell(fields[8], i + 1, "chrom_b")?,
            ],
            no_signal: match fields[9] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(DifxError::Format(format!(
                        "line {}: bad no_signal flag `{other}`",
                        i + 1
                    )))
                }
            },
        });
    }
    if rows.is_empty() {
        return Err(DifxError::Format("CSV has a header but no rows".into()));
    }
    Ok(rows)
}
