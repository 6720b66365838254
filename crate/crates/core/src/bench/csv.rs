use ::csv::{ReaderBuilder, StringRecord, Writer};

use super::RunRecord;
use crate::error::{Error, Result};

pub const RECORDS_HEADER: [&str; 9] = [
    "solver", "problem", "n", "perm", "seed", "rhoend", "nf", "fbest", "status",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Serializes records with a header line. Floats use 17 significant digits.
pub fn emit_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = Writer::from_writer(Vec::new());
    w.write_record(RECORDS_HEADER).map_err(csv_error)?;
    for r in records {
        w.write_record([
            r.solver.clone(),
            r.problem.clone(),
            r.n.to_string(),
            r.perm_index.to_string(),
            r.seed.to_string(),
            format_float(r.rhoend),
            r.nf.to_string(),
            format_float(r.fbest),
            r.status.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Parses the output of [`emit_csv`]. Errors carry the 1-based line number.
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<RunRecord>> {
    let mut reader = ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(row) => row.map_err(csv_error)?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    };
    if header.iter().ne(RECORDS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", RECORDS_HEADER.join(",")),
        });
    }
    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        records.push(parse_row(&row).map_err(|message| Error::Parse { line, message })?);
    }
    Ok(records)
}

fn parse_row(row: &StringRecord) -> std::result::Result<RunRecord, String> {
    if row.len() != RECORDS_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            RECORDS_HEADER.len(),
            row.len()
        ));
    }
    fn field<T: std::str::FromStr>(row: &StringRecord, i: usize) -> std::result::Result<T, String> {
        row[i]
            .trim()
            .parse()
            .map_err(|_| format!("invalid {} `{}`", RECORDS_HEADER[i], &row[i]))
    }
    Ok(RunRecord {
        solver: row[0].to_string(),
        problem: row[1].to_string(),
        n: field(row, 2)?,
        perm_index: field(row, 3)?,
        seed: field(row, 4)?,
        rhoend: field(row, 5)?,
        nf: field(row, 6)?,
        fbest: field(row, 7)?,
        status: field(row, 8)?,
    })
}

fn csv_error(e: ::csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}
