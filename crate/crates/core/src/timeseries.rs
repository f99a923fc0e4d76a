//! Ingestion of dated case counts and binning into generation time steps.
//!
//! Raw surveillance data usually arrives as a cumulative case-count curve.
//! The pipeline here is: parse dated rows, difference cumulative counts into
//! pseudo-incidence, then bin incidence into generation intervals. Negative
//! pseudo-incidence values (downward reporting corrections) are preserved and
//! flagged by the series kind; exclusion happens downstream at tetrad level.

use std::io;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_sig;

/// What the counts in a [`RawSeries`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Running total of cases; may contain downward corrections.
    Cumulative,
    /// Per-interval new cases; counts must be non-negative.
    Incident,
    /// Per-interval differences of a cumulative curve; negatives are legal
    /// and mark reporting corrections.
    PseudoIncidence,
}

/// One dated observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    pub count: f64,
}

/// A dated case-count series with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    kind: SeriesKind,
    records: Vec<Observation>,
}

impl RawSeries {
    /// Builds a series from observations, sorting them by date.
    ///
    /// Rejects empty input, duplicate dates, non-finite counts, and negative
    /// counts when `kind` is [`SeriesKind::Incident`].
    pub fn new(kind: SeriesKind, mut records: Vec<Observation>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::validation("series contains no observations"));
        }
        records.sort_by_key(|obs| obs.date);
        for pair in records.windows(2) {
            if pair[0].date == pair[1].date {
                return Err(Error::validation(format!(
                    "duplicate date {}",
                    pair[0].date
                )));
            }
        }
        for obs in &records {
            if !obs.count.is_finite() {
                return Err(Error::validation(format!(
                    "non-finite count at {}",
                    obs.date
                )));
            }
            if kind == SeriesKind::Incident && obs.count < 0.0 {
                return Err(Error::validation(format!(
                    "negative incident count {} at {}",
                    obs.count, obs.date
                )));
            }
        }
        Ok(RawSeries { kind, records })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sum of all counts.
    pub fn total(&self) -> f64 {
        self.records.iter().map(|obs| obs.count).sum()
    }

    /// True if any count is negative (reporting correction present).
    pub fn has_negative(&self) -> bool {
        self.records.iter().any(|obs| obs.count < 0.0)
    }
}

/// Column names used by [`ingest_csv`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_column: String,
    pub count_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            date_column: "date".to_string(),
            count_column: "count".to_string(),
        }
    }
}

/// Parses a comma-delimited UTF-8 stream with a header row into a
/// [`RawSeries`].
///
/// Dates must be ISO-8601 (`YYYY-MM-DD`). Parse failures report the
/// 1-based data row number.
pub fn ingest_csv<R: io::Read>(source: R, schema: &CsvSchema, kind: SeriesKind) -> Result<RawSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| Error::validation(format!("cannot read CSV header: {e}")))?
        .clone();
    let date_idx = column_index(&headers, &schema.date_column)?;
    let count_idx = column_index(&headers, &schema.count_column)?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_number = i + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_number,
            message: e.to_string(),
        })?;
        let date_field = field(&row, date_idx, row_number, &schema.date_column)?;
        let count_field = field(&row, count_idx, row_number, &schema.count_column)?;
        let date: NaiveDate = date_field.parse().map_err(|e| Error::Parse {
            row: row_number,
            message: format!("bad date {date_field:?}: {e}"),
        })?;
        let count: f64 = count_field.parse().map_err(|e| Error::Parse {
            row: row_number,
            message: format!("bad count {count_field:?}: {e}"),
        })?;
        records.push(Observation { date, count });
    }
    RawSeries::new(kind, records)
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::validation(format!("missing column {name:?} in CSV header")))
}

fn field<'a>(
    row: &'a csv::StringRecord,
    idx: usize,
    row_number: usize,
    name: &str,
) -> Result<&'a str> {
    row.get(idx).ok_or_else(|| Error::Parse {
        row: row_number,
        message: format!("row too short, no {name:?} field"),
    })
}

/// Differences a cumulative series into pseudo-incidence.
///
/// Output element k is `count[k+1] - count[k]`, dated at `date[k+1]`; the
/// output is one shorter than the input. Negative differences are retained
/// with kind [`SeriesKind::PseudoIncidence`] so tetrad-level exclusion can
/// see them.
pub fn cumulative_to_pseudo_incidence(series: &RawSeries) -> Result<RawSeries> {
    if series.kind() != SeriesKind::Cumulative {
        return Err(Error::validation(
            "differencing requires a cumulative series",
        ));
    }
    if series.len() < 2 {
        return Err(Error::validation(
            "differencing requires at least 2 observations",
        ));
    }
    let records = series
        .records()
        .windows(2)
        .map(|pair| Observation {
            date: pair[1].date,
            count: pair[1].count - pair[0].count,
        })
        .collect();
    RawSeries::new(SeriesKind::PseudoIncidence, records)
}

/// Guards against degenerate intervals that would explode the bin count.
const MAX_BINS: i64 = 1_000_000;

/// Bins incident or pseudo-incident observations into generation steps of
/// `generation_interval_days`, summing counts inside each half-open bin
/// `[origin + k·g, origin + (k+1)·g)`.
///
/// The output starts at the first occupied bin; empty interior bins become
/// zero. Cumulative series must be differenced first.
pub fn aggregate_to_generations(
    series: &RawSeries,
    generation_interval_days: f64,
    origin: NaiveDate,
) -> Result<GenerationSeries> {
    if series.kind() == SeriesKind::Cumulative {
        return Err(Error::validation(
            "cannot bin a cumulative series; difference it into pseudo-incidence first",
        ));
    }
    if !(generation_interval_days > 0.0 && generation_interval_days.is_finite()) {
        return Err(Error::validation(format!(
            "generation interval must be a positive number of days, got {generation_interval_days}"
        )));
    }

    let mut bins: Vec<(i64, f64)> = Vec::with_capacity(series.len());
    for obs in series.records() {
        let days = (obs.date - origin).num_days();
        if days < 0 {
            return Err(Error::validation(format!(
                "observation at {} precedes origin {origin}",
                obs.date
            )));
        }
        let bin = (days as f64 / generation_interval_days).floor() as i64;
        bins.push((bin, obs.count));
    }

    let first = bins.iter().map(|&(b, _)| b).min().expect("non-empty");
    let last = bins.iter().map(|&(b, _)| b).max().expect("non-empty");
    let width = last - first + 1;
    if width > MAX_BINS {
        return Err(Error::validation(format!(
            "interval {generation_interval_days} days spreads the data over {width} generations (limit {MAX_BINS})"
        )));
    }

    let mut values = vec![0.0; width as usize];
    for (bin, count) in bins {
        values[(bin - first) as usize] += count;
    }
    GenerationSeries::new(first, generation_interval_days, values)
}

#[derive(Serialize, Deserialize)]
struct GenerationSeriesRepr {
    i0_generation: i64,
    generation_interval_days: f64,
    values: Vec<f64>,
}

/// Incidence per generation, indexed from `i0_generation`.
///
/// Element k holds the incidence of generation `i0_generation + k`; the
/// series is contiguous by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GenerationSeriesRepr")]
pub struct GenerationSeries {
    i0_generation: i64,
    generation_interval_days: f64,
    values: Vec<f64>,
}

impl TryFrom<GenerationSeriesRepr> for GenerationSeries {
    type Error = Error;

    fn try_from(repr: GenerationSeriesRepr) -> Result<Self> {
        GenerationSeries::new(
            repr.i0_generation,
            repr.generation_interval_days,
            repr.values,
        )
    }
}

impl GenerationSeries {
    /// Builds a series; requires at least one value, a positive finite
    /// interval, and finite values.
    pub fn new(i0_generation: i64, generation_interval_days: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("generation series must not be empty"));
        }
        if !(generation_interval_days > 0.0 && generation_interval_days.is_finite()) {
            return Err(Error::validation(format!(
                "generation interval must be a positive number of days, got {generation_interval_days}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite incidence {v}")));
        }
        Ok(GenerationSeries {
            i0_generation,
            generation_interval_days,
            values,
        })
    }

    pub fn i0_generation(&self) -> i64 {
        self.i0_generation
    }

    pub fn interval_days(&self) -> f64 {
        self.generation_interval_days
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Generation index of element `offset`.
    pub fn generation(&self, offset: usize) -> i64 {
        self.i0_generation + offset as i64
    }

    /// Iterates `(generation index, incidence)` pairs.
    pub fn generations(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (self.generation(k), v))
    }

    /// Same values re-anchored at a different first generation.
    pub fn reindex(&self, i0_generation: i64) -> Self {
        GenerationSeries {
            i0_generation,
            ..self.clone()
        }
    }

    /// Same values with a different generation interval.
    pub fn with_interval(&self, generation_interval_days: f64) -> Result<Self> {
        GenerationSeries::new(
            self.i0_generation,
            generation_interval_days,
            self.values.clone(),
        )
    }

    /// Running sum of incidence, anchored at the first generation.
    pub fn running_sum(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    /// Writes columns `(generation, incidence)` with 12 significant digits.
    pub fn to_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["generation", "incidence"])
            .map_err(csv_io)?;
        for (t, v) in self.generations() {
            w.write_record([t.to_string(), fmt_sig(v, 12)])
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads columns `(generation, incidence)`; the interval is not part of
    /// the CSV shape and must be supplied. Generation indices must be
    /// strictly increasing; gaps are filled with zero incidence.
    pub fn from_csv<R: io::Read>(reader: R, generation_interval_days: f64) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = r
            .headers()
            .map_err(|e| Error::validation(format!("cannot read CSV header: {e}")))?
            .clone();
        let gen_idx = column_index(&headers, "generation")?;
        let inc_idx = column_index(&headers, "incidence")?;

        let mut rows: Vec<(i64, f64)> = Vec::new();
        for (i, row) in r.records().enumerate() {
            let row_number = i + 1;
            let row = row.map_err(|e| Error::Parse {
                row: row_number,
                message: e.to_string(),
            })?;
            let t: i64 = field(&row, gen_idx, row_number, "generation")?
                .parse()
                .map_err(|e| Error::Parse {
                    row: row_number,
                    message: format!("bad generation index: {e}"),
                })?;
            let v: f64 = field(&row, inc_idx, row_number, "incidence")?
                .parse()
                .map_err(|e| Error::Parse {
                    row: row_number,
                    message: format!("bad incidence: {e}"),
                })?;
            if let Some(&(prev, _)) = rows.last() {
                if t <= prev {
                    return Err(Error::validation(format!(
                        "generation indices must be strictly increasing ({prev} then {t})"
                    )));
                }
            }
            rows.push((t, v));
        }
        let Some(&(first, _)) = rows.first() else {
            return Err(Error::validation("generation CSV contains no rows"));
        };
        let last = rows.last().expect("non-empty").0;
        let mut values = vec![0.0; (last - first + 1) as usize];
        for (t, v) in rows {
            values[(t - first) as usize] = v;
        }
        GenerationSeries::new(first, generation_interval_days, values)
    }

    /// Serializes to `{i0_generation, generation_interval_days, values}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("series serializes")
    }

    /// Parses the JSON form, re-validating invariants.
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation(format!("bad series JSON: {e}")))
    }
}

fn csv_io(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => Error::Io(io_err),
        other => Error::validation(format!("CSV write failed: {other:?}")),
    }
}
