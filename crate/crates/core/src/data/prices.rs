use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
    pub instrument: String,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, closes: Vec<f64>, instrument: impl Into<String>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::param("dates and closes differ in length"));
        }
        if let Some(w) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::param(format!("dates not strictly increasing at {}", dates[w + 1])));
        }
        if let Some((i, &c)) = closes.iter().enumerate().find(|(_, c)| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::NonPositivePrice { row: i + 1, value: c });
        }
        Ok(PriceSeries { dates, closes, instrument: instrument.into() })
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// A loaded series and what was skipped on the way in.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceLoad {
    pub prices: PriceSeries,
    pub dropped_rows: usize,
    /// File line numbers (header is line 1) of rows without a close.
    pub dropped_lines: Vec<usize>,
}

/// `YYYY-MM-DD` or `DD/MM/YYYY`.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let t = text.trim();
    NaiveDate::parse_from_str(t, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(t, "%d/%m/%Y"))
        .ok()
}

/// Reads date and close columns from a headed CSV file. Rows with a blank
/// close are dropped and counted; rows are returned in date order. Errors
/// name the file line (header = line 1).
pub fn load_prices_csv(path: &Path, date_column: &str, close_column: &str) -> Result<PriceLoad> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::MissingColumn { path: path.to_path_buf(), column: name.to_string() })
    };
    let di = find(date_column)?;
    let ci = find(close_column)?;

    let mut rows: Vec<(NaiveDate, f64, usize)> = Vec::new();
    let mut dropped_lines = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = k + 2;
        let date_text = record.get(di).unwrap_or("");
        let close_text = record.get(ci).unwrap_or("");
        if date_text.is_empty() && close_text.is_empty() {
            continue;
        }
        let date = parse_date(date_text).ok_or_else(|| Error::BadDate { row: line, value: date_text.to_string() })?;
        if close_text.is_empty() {
            dropped_lines.push(line);
            continue;
        }
        let close: f64 = close_text
            .parse()
            .map_err(|_| Error::BadPrice { row: line, value: close_text.to_string() })?;
        if !(close > 0.0 && close.is_finite()) {
            return Err(Error::NonPositivePrice { row: line, value: close });
        }
        rows.push((date, close, line));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateDate { row: w[1].2.max(w[0].2), date: w[1].0.to_string() });
    }
    let instrument = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let prices = PriceSeries {
        dates: rows.iter().map(|r| r.0).collect(),
        closes: rows.iter().map(|r| r.1).collect(),
        instrument,
    };
    if !dropped_lines.is_empty() {
        log::info!("{}: dropped {} rows without a close", path.display(), dropped_lines.len());
    }
    Ok(PriceLoad { prices, dropped_rows: dropped_lines.len(), dropped_lines })
}

/// Rows with start ≤ date ≤ end (both ends inclusive).
pub fn filter_period(prices: &PriceSeries, start: NaiveDate, end: NaiveDate) -> PriceSeries {
    let keep: Vec<usize> = (0..prices.len()).filter(|&i| prices.dates[i] >= start && prices.dates[i] <= end).collect();
    PriceSeries {
        dates: keep.iter().map(|&i| prices.dates[i]).collect(),
        closes: keep.iter().map(|&i| prices.closes[i]).collect(),
        instrument: prices.instrument.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub instrument: String,
    /// First and last price dates, ISO formatted.
    pub period: (String, String),
}

/// r_t = ln(close_t / close_{t-1}) between consecutive available rows.
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: prices.len() });
    }
    let values = prices.closes.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    Ok(ReturnSeries {
        values,
        instrument: prices.instrument.clone(),
        period: (prices.dates[0].to_string(), prices.dates[prices.len() - 1].to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn loads_and_sorts() {
        let f = write("Date,Close\n2020-01-03,102\n02/01/2020,101\n2020-01-06,103.5\n");
        let p = load_prices_csv(f.path(), "Date", "Close").unwrap();
        assert_eq!(p.prices.len(), 3);
        assert_eq!(p.dropped_rows, 0);
        assert_eq!(p.prices.dates[0], d(2020, 1, 2));
        assert_eq!(p.prices.closes, vec![101.0, 102.0, 103.5]);
    }

    #[test]
    fn blank_close_is_dropped() {
        let f = write("date,close\n2020-01-02,1\n2020-01-03,\n2020-01-06,2\n");
        let p = load_prices_csv(f.path(), "date", "close").unwrap();
        assert_eq!(p.prices.len(), 2);
        assert_eq!(p.dropped_rows, 1);
        assert_eq!(p.dropped_lines, vec![3]);
    }

    #[test]
    fn bad_rows_are_named() {
        let f = write("date,close\n2020-01-02,1\n2020-01-03,-5\n");
        assert!(matches!(load_prices_csv(f.path(), "date", "close"), Err(Error::NonPositivePrice { row: 3, .. })));
        let f = write("date,close\n2020-13-02,1\n");
        assert!(matches!(load_prices_csv(f.path(), "date", "close"), Err(Error::BadDate { row: 2, .. })));
        let f = write("date,close\n2020-01-02,abc\n");
        assert!(matches!(load_prices_csv(f.path(), "date", "close"), Err(Error::BadPrice { row: 2, .. })));
        let f = write("date,close\n2020-01-02,1\n02/01/2020,2\n");
        assert!(matches!(load_prices_csv(f.path(), "date", "close"), Err(Error::DuplicateDate { .. })));
        let f = write("date,close\n2020-01-02,1\n");
        match load_prices_csv(f.path(), "date", "Adj Close") {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "Adj Close"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            load_prices_csv(Path::new("/nonexistent/prices.csv"), "date", "close"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn log_return_examples() {
        let dates = vec![d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 3)];
        let p = PriceSeries::new(dates.clone(), vec![100.0, 110.0, 99.0], "x").unwrap();
        let r = log_returns(&p).unwrap();
        assert!((r.values[0] - 0.095_310_179_804_324_87).abs() < 1e-15);
        assert!((r.values[1] - (0.9f64).ln()).abs() < 1e-15);
        assert_eq!(r.period, ("2020-01-01".to_string(), "2020-01-03".to_string()));
        let flat = PriceSeries::new(dates[..2].to_vec(), vec![100.0, 100.0], "x").unwrap();
        assert_eq!(log_returns(&flat).unwrap().values, vec![0.0]);
        let one = PriceSeries::new(dates[..1].to_vec(), vec![100.0], "x").unwrap();
        assert!(log_returns(&one).is_err());
    }

    #[test]
    fn period_filter_is_inclusive() {
        let dates: Vec<NaiveDate> = (1..=10).map(|k| d(2019, 1, k)).collect();
        let p = PriceSeries::new(dates, (1..=10).map(f64::from).collect(), "x").unwrap();
        let f = filter_period(&p, d(2019, 1, 2), d(2019, 1, 5));
        assert_eq!(f.len(), 4);
        assert_eq!(f.closes, vec![2.0, 3.0, 4.0, 5.0]);
        assert!(filter_period(&p, d(2020, 1, 1), d(2021, 1, 1)).is_empty());
    }
}
