//! CSV output helpers.
//!
//! All floats are written with 17 significant digits so that values survive
//! a text round trip bit for bit.

use std::io::Write;

use nalgebra::DMatrix;

use crate::Result;

/// Formats `v` in scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a dense matrix with header `i,c0,c1,...`.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = std::iter::once("i".to_string())
        .chain((0..m.ncols()).map(|k| format!("c{k}")))
        .collect();
    w.write_record(&header)?;
    for i in 0..m.nrows() {
        let mut row = vec![i.to_string()];
        row.extend((0..m.ncols()).map(|k| fmt_f64(m[(i, k)])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes named columns of equal length.
pub fn write_columns_csv<W: Write>(names: &[&str], columns: &[&[f64]], writer: W) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != rows) {
        return Err(crate::Error::Shape(
            "column names and column lengths must agree".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(names)?;
    for r in 0..rows {
        w.write_record(columns.iter().map(|c| fmt_f64(c[r])))?;
    }
    w.flush()?;
    Ok(())
}
