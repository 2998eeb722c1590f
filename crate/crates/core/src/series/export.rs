use std::io::Write;

use super::sum::SeriesResult;
use crate::error::{Error, Result};

/// One evaluation point and its series value.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub point: Vec<f64>,
    pub result: SeriesResult,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `x_*, c_*, tail_bound, terms_summed` rows with 17 significant digits.
pub fn write_series_csv<W: Write>(out: W, rows: &[SeriesRow]) -> Result<()> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let dim = first.point.len();
    let blades = first.result.value.coeffs().len();
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..dim)
        .map(|i| format!("x{i}"))
        .chain((0..blades).map(|b| format!("c{b}")))
        .chain(["tail_bound".to_string(), "terms_summed".to_string()])
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        if row.point.len() != dim || row.result.value.coeffs().len() != blades {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.point.len(),
            });
        }
        let rec: Vec<String> = row
            .point
            .iter()
            .chain(row.result.value.coeffs())
            .map(|&v| fmt(v))
            .chain([fmt(row.result.tail_bound), row.result.terms_summed.to_string()])
            .collect();
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}
