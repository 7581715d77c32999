//! CSV profile output with a JSON sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::spectral::SpectralField;

/// Metadata written next to every profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    #[serde(rename = "L")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub kind: String,
}

/// Formats a value with 16 significant digits.
pub fn fmt_sig16(v: f64) -> String {
    format!("{v:.15e}")
}

/// Writes `x,value` rows, with each abscissa multiplied by `x_scale`.
pub fn write_csv<W: Write, T: Scalar>(out: &mut W, field: &SpectralField<T>, x_scale: f64) -> std::io::Result<()> {
    writeln!(out, "x,value")?;
    let g = field.grid();
    for (j, v) in field.values().iter().enumerate() {
        writeln!(
            out,
            "{},{}",
            fmt_sig16(g.x(j).to_f64_lossy() * x_scale),
            fmt_sig16(v.to_f64_lossy())
        )?;
    }
    Ok(())
}

/// Writes `path` and `path.json`.
pub fn save_field<T: Scalar>(
    path: &Path,
    field: &SpectralField<T>,
    x_scale: f64,
    sidecar: &FieldSidecar,
) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv(&mut out, field, x_scale)?;
    out.flush()?;
    let mut meta = path.as_os_str().to_owned();
    meta.push(".json");
    let json = serde_json::to_string_pretty(sidecar).map_err(std::io::Error::other)?;
    std::fs::write(meta, json + "\n")
}

/// Parses a CSV written by [`write_csv`] back into `(x, value)` pairs.
pub fn read_csv(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("x,value") => {}
        other => return Err(format!("bad header {other:?}")),
    }
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').ok_or_else(|| format!("bad row {l:?}"))?;
            Ok((
                a.parse().map_err(|e| format!("{e}: {a}"))?,
                b.parse().map_err(|e| format!("{e}: {b}"))?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn csv_round_trip() {
        let g = Grid::new(5.0, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x: f64| (-x * x).exp() / 3.0);
        let mut buf = Vec::new();
        write_csv(&mut buf, &f, 1.0).unwrap();
        let rows = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(rows.len(), 16);
        for (j, (x, v)) in rows.into_iter().enumerate() {
            assert!((x - g.x(j)).abs() <= 1e-15 * g.x(j).abs());
            assert!((v - f.values()[j]).abs() <= 1e-15 * f.values()[j].abs());
        }
        assert_eq!(fmt_sig16(0.1), "1.000000000000000e-1");
    }

    #[test]
    fn sidecar_file() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(5.0, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x: f64| x.cos());
        let meta = FieldSidecar {
            half_length: 5.0,
            n_points: 16,
            beta: 0.1,
            epsilon: 0.2,
            kind: "core".into(),
        };
        let path = dir.path().join("w.csv");
        save_field(&path, &f, 1.0, &meta).unwrap();
        let back: FieldSidecar =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("w.csv.json")).unwrap()).unwrap();
        assert_eq!(back, meta);
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("x,value\n"));
    }
}
