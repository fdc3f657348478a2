//! CSV tables of sweep rows.

use std::io::Write;
use std::path::Path;

use crate::error::{usage, Result};
use crate::sweep::Row;

pub const COLUMNS: [&str; 11] = [
    "scenario_id",
    "policy",
    "axis",
    "axis_value",
    "bs_density",
    "engine",
    "pcov",
    "ase",
    "method",
    "ci_halfwidth",
    "status",
];

/// Nine significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn record(row: &Row, timings: bool) -> Vec<String> {
    let mut out = vec![
        row.scenario_id.clone(),
        row.policy.name().to_string(),
        row.axis.name().to_string(),
        fmt_float(row.axis_value),
        fmt_float(row.bs_density),
        row.engine.name().to_string(),
    ];
    match &row.outcome {
        Ok(p) => {
            out.push(fmt_float(p.pcov));
            out.push(fmt_float(p.ase));
            out.push(p.method.name().to_string());
            out.push(p.ci_halfwidth.map(fmt_float).unwrap_or_default());
            out.push("ok".into());
        }
        Err(e) => {
            out.extend([String::new(), String::new(), String::new(), String::new()]);
            out.push(format!("error: {e}"));
        }
    }
    if timings {
        out.push(format!("{:.3}", row.wall_time_ms));
    }
    out
}

/// Writes a header and one record per row. `timings` appends a
/// `wall_time_ms` column, which makes the output run-dependent.
pub fn write_rows<W: Write>(w: W, rows: &[Row], timings: bool) -> Result<()> {
    if rows.is_empty() {
        return Err(usage("refusing to write an empty table"));
    }
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if timings {
        header.push("wall_time_ms");
    }
    wtr.write_record(&header)?;
    for row in rows {
        wtr.write_record(record(row, timings))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn to_string(rows: &[Row], timings: bool) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, timings)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn write_file(path: &Path, rows: &[Row], timings: bool) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_rows(std::io::BufWriter::new(file), rows, timings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{Axis, Engine};
    use udncov::analytic::AssociationPolicy;
    use udncov::{CoveragePoint, Method};

    fn row(outcome: std::result::Result<CoveragePoint, String>) -> Row {
        Row {
            scenario_id: "s,1".into(),
            policy: AssociationPolicy::Strongest,
            axis: Axis::BsDensity,
            axis_value: 1e-3,
            bs_density: 1e-3,
            engine: Engine::MonteCarlo,
            outcome,
            wall_time_ms: 1.5,
        }
    }

    #[test]
    fn layout() {
        let ok = row(Ok(CoveragePoint::new(1.0, 1e-3, 0.5, Method::MonteCarlo, Some(0.01))));
        let bad = row(Err("validity error: nope".into()));
        let text = to_string(&[ok, bad], false).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(
            lines[1],
            "\"s,1\",strongest,bs_density,1.00000000e-3,1.00000000e-3,mc,5.00000000e-1,5.00000000e-4,monte_carlo,1.00000000e-2,ok"
        );
        assert!(lines[2].ends_with(",,,,,error: validity error: nope"));
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn timings_column_and_empty_table() {
        let ok = row(Ok(CoveragePoint::new(1.0, 1e-3, 0.5, Method::ClosedForm, None)));
        let text = to_string(&[ok], true).unwrap();
        assert!(text.starts_with(&format!("{},wall_time_ms\n", COLUMNS.join(","))));
        assert!(text.trim_end().ends_with(",ok,1.500"));
        assert!(to_string(&[], false).is_err());
    }
}
