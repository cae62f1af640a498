//! Time-series ingestion and resampling onto the decision-window grid.
//!
//! Inputs are CSV files with an ISO-8601 timestamp column and a numeric
//! value column, or NASA POWER hourly CSV exports. Readings must be strictly
//! increasing in time. Missing readings are errors, never imputed.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeZone, Utc};

use crate::error::{csv_error, Error, Result};

/// Fill value NASA POWER uses for missing data.
const NASA_FILL: f64 = -999.0;

/// Raw readings from one file, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub path: PathBuf,
    /// Unix seconds.
    pub timestamps: Vec<i64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn first(&self) -> Option<i64> {
        self.timestamps.first().copied()
    }

    pub fn last(&self) -> Option<i64> {
        self.timestamps.last().copied()
    }
}

/// Where the timestamp and value of each reading come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSpec {
    /// Plain CSV with a header row.
    Csv { timestamp: String, value: String },
    /// NASA POWER hourly export: `YEAR,MO,DY,HR,<parameter>` after an
    /// optional header block. Hours are shifted by `utc_offset_hours` to UTC.
    NasaPower { parameter: String, utc_offset_hours: i32 },
}

/// How sub-window readings collapse to one value per window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Last observation carried forward, then the maximum over the window.
    /// Preserves threat peaks.
    Max,
    /// Mean of the readings inside the window. Preserves energy totals.
    Mean,
}

/// `windows` consecutive windows of `window_seconds` from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowGrid {
    pub start: i64,
    pub window_seconds: i64,
    pub windows: usize,
}

impl WindowGrid {
    pub fn window_start(&self, i: usize) -> i64 {
        self.start + i as i64 * self.window_seconds
    }

    pub fn end(&self) -> i64 {
        self.window_start(self.windows)
    }
}

/// Parses an ISO-8601 timestamp. Offsets are honoured; naive times are UTC.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc().timestamp())
}

/// `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(t: i64) -> String {
    match Utc.timestamp_opt(t, 0).single() {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => t.to_string(),
    }
}

/// Reads a series without resampling.
pub fn read_series(path: &Path, spec: &ColumnSpec) -> Result<Series> {
    match spec {
        ColumnSpec::Csv { timestamp, value } => read_csv(path, timestamp, value),
        ColumnSpec::NasaPower {
            parameter,
            utc_offset_hours,
        } => read_nasa_power(path, parameter, *utc_offset_hours),
    }
}

/// Reads `path` and resamples it onto `grid`.
pub fn load_timeseries(path: &Path, spec: &ColumnSpec, grid: &WindowGrid, aggregation: Aggregation) -> Result<Vec<f64>> {
    resample(&read_series(path, spec)?, grid, aggregation)
}

struct Builder {
    path: PathBuf,
    series: Series,
}

impl Builder {
    fn new(path: &Path) -> Self {
        Self {
            path: path.into(),
            series: Series {
                path: path.into(),
                timestamps: Vec::new(),
                values: Vec::new(),
            },
        }
    }

    fn parse_error(&self, line: u64, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message,
        }
    }

    fn push(&mut self, line: u64, t: i64, v: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(self.parse_error(line, format!("value {v} is not finite")));
        }
        if let Some(prev) = self.series.last() {
            if t <= prev {
                return Err(Error::NonMonotone {
                    path: self.path.clone(),
                    line,
                    timestamp: format_timestamp(t),
                    previous: format_timestamp(prev),
                });
            }
        }
        self.series.timestamps.push(t);
        self.series.values.push(v);
        Ok(())
    }

    fn finish(self) -> Result<Series> {
        if self.series.is_empty() {
            return Err(Error::Parse {
                path: self.path,
                line: 0,
                message: "no readings".into(),
            });
        }
        Ok(self.series)
    }
}

fn read_csv(path: &Path, timestamp_column: &str, value_column: &str) -> Result<Series> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("no column named {name:?} (found {:?})", headers.iter().collect::<Vec<_>>()),
        })
    };
    let (ti, vi) = (column(timestamp_column)?, column(value_column)?);
    let mut b = Builder::new(path);
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let ts = &record[ti];
        let t = parse_timestamp(ts).ok_or_else(|| b.parse_error(line, format!("invalid timestamp {ts:?}")))?;
        let raw = &record[vi];
        if raw.is_empty() {
            return Err(b.parse_error(line, format!("missing value in column {value_column:?}")));
        }
        let v: f64 = raw.parse().map_err(|_| b.parse_error(line, format!("invalid number {raw:?}")))?;
        b.push(line, t, v)?;
    }
    b.finish()
}

fn read_nasa_power(path: &Path, parameter: &str, utc_offset_hours: i32) -> Result<Series> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut b = Builder::new(path);
    let mut in_header = false;
    let mut value_index = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n as u64 + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if row.starts_with("-BEGIN HEADER-") {
            in_header = true;
            continue;
        }
        if row.starts_with("-END HEADER-") {
            in_header = false;
            continue;
        }
        if in_header {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        let Some(vi) = value_index else {
            if fields.len() < 5 || fields[..4] != ["YEAR", "MO", "DY", "HR"] {
                return Err(b.parse_error(line, format!("expected YEAR,MO,DY,HR,... header, found {row:?}")));
            }
            let vi = fields
                .iter()
                .position(|f| *f == parameter)
                .ok_or_else(|| b.parse_error(line, format!("no column named {parameter:?}")))?;
            value_index = Some(vi);
            continue;
        };
        if fields.len() <= vi {
            return Err(b.parse_error(line, format!("expected at least {} fields, found {}", vi + 1, fields.len())));
        }
        let int = |i: usize| {
            fields[i]
                .parse::<u32>()
                .map_err(|_| b.parse_error(line, format!("invalid integer {:?}", fields[i])))
        };
        let (year, month, day, hour) = (int(0)?, int(1)?, int(2)?, int(3)?);
        let t = Utc
            .with_ymd_and_hms(year as i32, month, day, hour, 0, 0)
            .single()
            .ok_or_else(|| b.parse_error(line, format!("invalid date {year}-{month}-{day} hour {hour}")))?
            .timestamp()
            - i64::from(utc_offset_hours) * 3600;
        let v: f64 = fields[vi]
            .parse()
            .map_err(|_| b.parse_error(line, format!("invalid number {:?}", fields[vi])))?;
        if v == NASA_FILL {
            return Err(b.parse_error(line, format!("missing value ({NASA_FILL}) for {parameter}")));
        }
        b.push(line, t, v)?;
    }
    if value_index.is_none() {
        return Err(b.parse_error(0, "no YEAR,MO,DY,HR header row".into()));
    }
    b.finish()
}

fn gap(series: &Series, from: i64, to: i64, window: i64) -> Error {
    Error::Gap {
        path: series.path.clone(),
        from: format_timestamp(from),
        to: format_timestamp(to),
        seconds: to - from,
        window,
    }
}

/// Resamples `series` onto `grid`.
///
/// Readings must leave no stretch longer than one window uncovered. With
/// [`Aggregation::Max`] a reading at or before the grid start covers the
/// start; with [`Aggregation::Mean`] only readings inside the grid count.
pub fn resample(series: &Series, grid: &WindowGrid, aggregation: Aggregation) -> Result<Vec<f64>> {
    let w = grid.window_seconds;
    if w <= 0 {
        return Err(Error::Usage(format!("window length must be positive, got {w} s")));
    }
    let t = &series.timestamps;
    let end = grid.end();
    let first_inside = t.partition_point(|&s| s < grid.start);
    let last_inside = t.partition_point(|&s| s < end);
    // Readings that determine the resampled values.
    let lo = match aggregation {
        Aggregation::Max if first_inside > 0 && t.get(first_inside) != Some(&grid.start) => first_inside - 1,
        _ => first_inside,
    };
    let used = &t[lo..last_inside];
    match (used.first(), used.last()) {
        (Some(&first), Some(&last)) => {
            if first > grid.start && first - grid.start >= w {
                return Err(gap(series, grid.start, first, w));
            }
            if let Some(p) = used.windows(2).find(|p| p[1] - p[0] > w) {
                return Err(gap(series, p[0], p[1], w));
            }
            if end - last > w {
                return Err(gap(series, last, end, w));
            }
        }
        _ => return Err(gap(series, grid.start, end, w)),
    }

    let mut out = Vec::with_capacity(grid.windows);
    let mut j = first_inside;
    for i in 0..grid.windows {
        let (a, b) = (grid.window_start(i), grid.window_start(i + 1));
        let from = j;
        while j < t.len() && t[j] < b {
            j += 1;
        }
        let inside = &series.values[from..j];
        let value = match aggregation {
            Aggregation::Max => {
                let carried = (from > 0 && t.get(from) != Some(&a)).then(|| series.values[from - 1]);
                inside.iter().copied().chain(carried).reduce(f64::max)
            }
            Aggregation::Mean => (!inside.is_empty()).then(|| inside.iter().sum::<f64>() / inside.len() as f64),
        };
        out.push(value.ok_or_else(|| gap(series, a, b, w))?);
    }
    Ok(out)
}
