//! OCV table files: a `soc,voltage` header then one knot per row.

use std::fs;
use std::path::Path;

use ctxnode_core::OcvCurve;

use crate::error::{csv_error, Error, Result};

#[derive(serde::Deserialize)]
struct Row {
    soc: f64,
    voltage: f64,
}

/// Loads and validates an OCV table.
pub fn load_ocv_table(path: &Path) -> Result<OcvCurve> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    if headers != vec!["soc", "voltage"] {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("expected header soc,voltage, found {:?}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut knots = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        knots.push((row.soc, row.voltage));
    }
    OcvCurve::new(&knots).map_err(Error::model(path.display().to_string()))
}

/// Table text for `curve`. Numbers use the shortest exact representation,
/// so loading the output reproduces the curve bit for bit.
pub fn format_ocv_table(curve: &OcvCurve) -> String {
    let mut out = String::from("soc,voltage\n");
    for (s, v) in curve.knots() {
        out.push_str(&format!("{s},{v}\n"));
    }
    out
}

pub fn write_ocv_table(curve: &OcvCurve, path: &Path) -> Result<()> {
    fs::write(path, format_ocv_table(curve)).map_err(|e| Error::io(path, e))
}
