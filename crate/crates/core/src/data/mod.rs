//! Price files, log returns and report files.

pub mod prices;
pub mod reports;

pub use chrono::NaiveDate;
pub use prices::{filter_period, load_prices_csv, log_returns, parse_date, PriceLoad, PriceSeries, ReturnSeries};
pub use reports::{
    fmt_sig, read_structured, read_tabular, render_report, verify_report, write_report, ReportBody, ReportDoc,
    ReportFormat,
};
