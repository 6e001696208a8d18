use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::survival::{validate_sample, SurvivalSample};

/// Column mapping and unit conversion for survival CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSpec {
    pub time_col: String,
    pub event_col: String,
    /// Raw times are divided by this, e.g. 365.25 for days to years.
    pub time_scale: f64,
    pub time_unit: String,
}

impl Default for CsvSpec {
    fn default() -> Self {
        Self {
            time_col: "time".into(),
            event_col: "event".into(),
            time_scale: 1.0,
            time_unit: String::new(),
        }
    }
}

fn parse_event(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

pub fn read_csv(path: impl AsRef<Path>, spec: &CsvSpec) -> Result<SurvivalSample<f64>> {
    read_csv_from(File::open(path)?, spec)
}

/// Rows in errors are 1-based data rows (the header is not counted).
pub fn read_csv_from(reader: impl Read, spec: &CsvSpec) -> Result<SurvivalSample<f64>> {
    if !(spec.time_scale > 0.0 && spec.time_scale.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "time scale must be positive, got {}",
            spec.time_scale
        )));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let time_idx = column(&spec.time_col)?;
    let event_idx = column(&spec.event_col)?;

    let mut raw = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let cell = |idx: usize, name: &str| {
            rec.get(idx).ok_or_else(|| Error::Parse {
                row,
                column: name.to_string(),
                message: "missing cell".into(),
            })
        };
        let t_raw = cell(time_idx, &spec.time_col)?;
        let time: f64 = t_raw.parse().map_err(|_| Error::Parse {
            row,
            column: spec.time_col.clone(),
            message: format!("`{t_raw}` is not a number"),
        })?;
        if !time.is_finite() || time < 0.0 {
            return Err(Error::Parse {
                row,
                column: spec.time_col.clone(),
                message: format!("time must be finite and nonnegative, got `{t_raw}`"),
            });
        }
        let e_raw = cell(event_idx, &spec.event_col)?;
        let event = parse_event(e_raw).ok_or_else(|| Error::Parse {
            row,
            column: spec.event_col.clone(),
            message: format!("event must be one of 0, 1, true, false; got `{e_raw}`"),
        })?;
        raw.push((time / spec.time_scale, event));
    }
    validate_sample(raw, spec.time_unit.clone())
}

pub fn write_csv(sample: &SurvivalSample<f64>, path: impl AsRef<Path>, spec: &CsvSpec) -> Result<()> {
    let mut f = File::create(path)?;
    write_csv_to(sample, &mut f, spec)?;
    f.flush()?;
    Ok(())
}

/// Writes times multiplied back by `time_scale`, shortest round-trip form.
pub fn write_csv_to(sample: &SurvivalSample<f64>, writer: impl Write, spec: &CsvSpec) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([spec.time_col.as_str(), spec.event_col.as_str()])?;
    for r in sample.records() {
        let t = r.time * spec.time_scale;
        w.write_record([t.to_string(), u8::from(r.event).to_string()])?;
    }
    w.flush()?;
    Ok(())
}
