//! Plain UTF-8 CSV: mandatory header, '.' decimal separator, one
//! newline-terminated row per record. Numbers are written in their
//! shortest form that parses back to the identical `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::cqed::Spectrum;
use crate::error::{Error, Result};
use crate::fitting::ShiftDataset;
use crate::units;

/// Shortest exact representation; exponent form outside [1e-4, 1e15).
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| Cell::Num(x)).collect());
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => out.push_str(&format_number(*x)),
                    Cell::Text(t) => {
                        let _ = write!(out, "{t}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

/// Two-column spectrum CSV: `detuning_GHz,intensity` (ordinary GHz).
pub fn spectrum_table(s: &Spectrum) -> CsvTable {
    let mut t = CsvTable::new(&["detuning_GHz", "intensity"]);
    for (w, y) in s.iter() {
        t.push_nums(&[units::ordinary(w), y]);
    }
    t
}

fn ingest_err(path: &Path, row: usize, msg: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_path_buf(),
        row,
        msg: msg.into(),
    }
}

type NumericRows = (Vec<String>, Vec<(usize, Vec<f64>)>);

/// Numeric rows of a headed CSV: (header fields, [(line number, values)]).
fn numeric_rows(text: &str, path: &Path, width: usize) -> Result<NumericRows> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(ingest_err(path, 1, "empty file"));
    };
    let header: Vec<String> = header.split(',').map(|h| h.trim().to_string()).collect();
    if header.len() != width {
        return Err(ingest_err(
            path,
            1,
            format!("expected {width} columns, found {}", header.len()),
        ));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(ingest_err(
                path,
                row,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        let values = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ingest_err(path, row, format!("`{f}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((row, values));
    }
    if rows.is_empty() {
        return Err(ingest_err(path, 2, "no data rows"));
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisMode {
    WavelengthNm,
    DetuningGhz,
}

/// Parses spectrum CSV text. The first header field selects the axis:
/// `wavelength_nm` (converted to detuning about `lambda0_nm` with
/// Δν = −c·Δλ/λ₀²) or `detuning_GHz` (ordinary GHz). The result is
/// sorted and exact duplicates are merged; a repeated abscissa with a
/// different intensity is an error.
pub fn parse_spectrum_csv(text: &str, path: &Path, lambda0_nm: Option<f64>) -> Result<Spectrum> {
    let (header, rows) = numeric_rows(text, path, 2)?;
    let mode = match header[0].to_ascii_lowercase().as_str() {
        "wavelength_nm" => AxisMode::WavelengthNm,
        "detuning_ghz" => AxisMode::DetuningGhz,
        other => {
            return Err(ingest_err(
                path,
                1,
                format!("first column must be wavelength_nm or detuning_GHz, found `{other}`"),
            ))
        }
    };
    let lambda0 = match (mode, lambda0_nm) {
        (AxisMode::WavelengthNm, Some(l)) if l > 0.0 => l,
        (AxisMode::WavelengthNm, _) => {
            return Err(ingest_err(
                path,
                1,
                "wavelength mode needs a reference wavelength",
            ))
        }
        (AxisMode::DetuningGhz, _) => 0.0,
    };
    let mut points: Vec<(usize, f64, f64)> = rows
        .into_iter()
        .map(|(row, v)| {
            let ghz = match mode {
                AxisMode::WavelengthNm => units::wavelength_offset_to_ghz(v[0], lambda0),
                AxisMode::DetuningGhz => v[0],
            };
            (row, units::angular(ghz), v[1])
        })
        .collect();
    if let Some(&(row, _, y)) = points.iter().find(|p| p.2 < 0.0) {
        return Err(ingest_err(path, row, format!("negative intensity {y}")));
    }
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut detunings: Vec<f64> = Vec::with_capacity(points.len());
    let mut intensities: Vec<f64> = Vec::with_capacity(points.len());
    for (row, w, y) in points {
        if detunings.last() == Some(&w) {
            if intensities.last() != Some(&y) {
                return Err(ingest_err(
                    path,
                    row,
                    "duplicate abscissa with a conflicting intensity",
                ));
            }
            continue;
        }
        detunings.push(w);
        intensities.push(y);
    }
    Spectrum::new(detunings, intensities)
}

pub fn ingest_spectrum_csv(path: &Path, lambda0_nm: Option<f64>) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spectrum_csv(&text, path, lambda0_nm)
}

/// Shift-versus-bias CSV: `voltage_V,shift_meV`.
pub fn ingest_shift_csv(path: &Path) -> Result<ShiftDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (header, rows) = numeric_rows(&text, path, 2)?;
    if !header[0].eq_ignore_ascii_case("voltage_V") || !header[1].eq_ignore_ascii_case("shift_meV")
    {
        return Err(ingest_err(path, 1, "header must be voltage_V,shift_meV"));
    }
    let pts = rows.into_iter().map(|(_, v)| (v[0], v[1])).collect();
    ShiftDataset::new(pts, None).map_err(|e| ingest_err(path, 0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn p() -> PathBuf {
        PathBuf::from("mem.csv")
    }

    #[test]
    fn number_format_roundtrips() {
        for x in [
            0.0,
            1.0,
            -2.5,
            1e-7,
            123456.789,
            1e20,
            std::f64::consts::PI,
            0.1 + 0.2,
        ] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(!s.contains(','));
        }
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1e-7), "1e-7");
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            parse_spectrum_csv("", &p(), None),
            Err(Error::Ingest { row: 1, .. })
        ));
        assert!(parse_spectrum_csv("detuning_GHz,intensity\n", &p(), None).is_err());
    }

    #[test]
    fn bad_row_reports_line() {
        let e = parse_spectrum_csv("detuning_GHz,intensity\n1,2\nx,3\n", &p(), None).unwrap_err();
        assert!(matches!(e, Error::Ingest { row: 3, .. }), "{e}");
    }

    #[test]
    fn sorts_and_dedups() {
        let s = parse_spectrum_csv("detuning_GHz,intensity\n2,1\n1,5\n2,1\n", &p(), None).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.intensities, vec![5.0, 1.0]);
        let e = parse_spectrum_csv("detuning_GHz,intensity\n2,1\n2,3\n", &p(), None);
        assert!(matches!(e, Err(Error::Ingest { .. })));
    }

    #[test]
    fn wavelength_mode_converts_and_flips_order() {
        let text = "wavelength_nm,intensity\n934.97,1\n935.0,2\n935.03,3\n";
        let s = parse_spectrum_csv(text, &p(), Some(935.0)).unwrap();
        // longest wavelength = most negative detuning
        assert_eq!(s.intensities, vec![3.0, 2.0, 1.0]);
        let ghz = units::ordinary(s.detunings[2]);
        assert!((ghz - 10.29).abs() < 0.01, "{ghz}");
        assert!(parse_spectrum_csv(text, &p(), None).is_err());
    }

    #[test]
    fn unknown_axis_rejected() {
        assert!(parse_spectrum_csv("freq,intensity\n1,1\n", &p(), None).is_err());
    }
}
