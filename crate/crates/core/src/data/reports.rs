use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{BoundsSummary, CltReport, DecayReport, MseRatioReport, Table1, Table2};
use crate::riskmeasure::{EstimateReport, Provenance, SignConvention, Units};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// Comma-separated rows laid out like the printed tables.
    #[default]
    Tabular,
    /// Self-describing JSON document with provenance.
    Structured,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tabular" | "csv" => Ok(ReportFormat::Tabular),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(Error::Parse(format!("unknown format '{other}' (tabular or structured)"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Tabular => "tabular",
            ReportFormat::Structured => "structured",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "body", rename_all = "snake_case")]
pub enum ReportBody {
    Estimates(Vec<EstimateReport>),
    MseRatios(Vec<MseRatioReport>),
    Table1(Table1),
    /// Point estimates with bootstrap SDs.
    Table2(Table2),
    /// The same cells as Table2, shown as percentile intervals.
    Intervals(Table2),
    Decay(Vec<DecayReport>),
    Clt(Vec<CltReport>),
    Bounds(Vec<BoundsSummary>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub provenance: Option<Provenance>,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl ReportDoc {
    pub fn new(body: ReportBody, provenance: Option<Provenance>) -> Self {
        ReportDoc { provenance, body }
    }
}

/// x rounded to 12 significant digits, printed in shortest form.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{r}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn sign_label(s: SignConvention) -> &'static str {
    match s {
        SignConvention::Loss => "loss",
        SignConvention::Return => "return",
    }
}

struct Rendered {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    footer: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn beta_label(beta: f64) -> String {
    format!("beta={}", fmt_sig(beta))
}

fn table2_footer(t: &Table2, what: &str) -> Vec<String> {
    let (sign, units) = t
        .rows
        .first()
        .and_then(|r| r.first())
        .map(|c| (c.sign, c.units))
        .unwrap_or((SignConvention::Loss, Units::Raw));
    let units_text = match units {
        Units::DailyPercent => "Estimates are in daily % return".to_string(),
        Units::Raw => "Estimates are in raw log-return units".to_string(),
    };
    let sign_text = match sign {
        SignConvention::Loss => "sign: loss (larger = riskier)",
        SignConvention::Return => "sign: return (risk shown as a negative return)",
    };
    vec![format!("{units_text}; {sign_text}"), what.to_string()]
}

fn render(doc: &ReportDoc) -> Rendered {
    let mut comments = Vec::new();
    if let Some(p) = &doc.provenance {
        comments.push(format!("{} {} config_hash={}", p.tool, p.version, p.config_hash));
        let seeds: Vec<String> = p.seeds.iter().map(u64::to_string).collect();
        comments.push(format!("seeds={}", seeds.join(" ")));
    }
    let mut footer = Vec::new();
    let (header, rows) = match &doc.body {
        ReportBody::Estimates(rs) => (
            strings(&[
                "estimator", "spectrum", "n", "point", "sd", "ci_lo", "ci_hi", "ci_level", "bandwidth", "sign", "units",
            ]),
            rs.iter()
                .map(|r| {
                    vec![
                        format!("{:?}", r.estimator).to_lowercase(),
                        r.spectrum.to_string(),
                        r.n.to_string(),
                        fmt_sig(r.point),
                        opt(r.sd),
                        opt(r.ci.map(|c| c.lo)),
                        opt(r.ci.map(|c| c.hi)),
                        opt(r.ci.map(|c| c.level)),
                        opt(r.bandwidth),
                        sign_label(r.sign).into(),
                        r.units.label().into(),
                    ]
                })
                .collect(),
        ),
        ReportBody::MseRatios(rs) => (
            strings(&["model", "n", "beta", "replicates", "truth", "mse1", "mse2", "ratio", "ratio_se"]),
            rs.iter()
                .map(|r| {
                    vec![
                        r.model.to_string(),
                        r.n.to_string(),
                        fmt_sig(r.beta),
                        r.replicates.to_string(),
                        fmt_sig(r.truth),
                        fmt_sig(r.mse1),
                        fmt_sig(r.mse2),
                        fmt_sig(r.ratio),
                        fmt_sig(r.ratio_se),
                    ]
                })
                .collect(),
        ),
        ReportBody::Table1(t) => {
            let mut header = strings(&["beta", "n"]);
            for m in &t.spec.models {
                header.push(m.short_name());
                header.push(format!("{}_se", m.short_name()));
            }
            let mut rows = Vec::new();
            for &beta in &t.spec.betas {
                for &n in &t.spec.ns {
                    if !t.spec.models.iter().any(|m| t.cell(m, n, beta).is_some()) {
                        continue;
                    }
                    let mut row = vec![fmt_sig(beta), n.to_string()];
                    for m in &t.spec.models {
                        let c = t.cell(m, n, beta);
                        row.push(opt(c.map(|c| c.ratio)));
                        row.push(opt(c.map(|c| c.ratio_se)));
                    }
                    rows.push(row);
                }
            }
            footer.push("MSE2/MSE1 (kernel over empirical); _se columns are delta-method Monte-Carlo standard errors".into());
            (header, rows)
        }
        ReportBody::Table2(t) | ReportBody::Intervals(t) => {
            let intervals = matches!(doc.body, ReportBody::Intervals(_));
            let mut header = vec!["instrument".to_string()];
            header.extend(t.betas.iter().map(|&b| beta_label(b)));
            let rows = t
                .instruments
                .iter()
                .zip(&t.rows)
                .map(|(name, cells)| {
                    let mut row = vec![name.clone()];
                    row.extend(cells.iter().map(|c| match (intervals, c.ci) {
                        (true, Some(ci)) => format!("[{}; {}]", fmt_sig(ci.lo), fmt_sig(ci.hi)),
                        _ => format!("{}({})", fmt_sig(c.point), opt(c.sd)),
                    }));
                    row
                })
                .collect();
            let what = if intervals {
                let level = t.rows.first().and_then(|r| r.first()).and_then(|c| c.ci).map(|c| c.level).unwrap_or(0.9);
                format!("{}% bootstrap percentile intervals", fmt_sig(100.0 * level))
            } else {
                "bootstrap standard deviations in parentheses".to_string()
            };
            footer.extend(table2_footer(t, &what));
            (header, rows)
        }
        ReportBody::Decay(rs) => (
            strings(&["label", "n", "median", "seeds", "strictly_decreasing"]),
            rs.iter()
                .flat_map(|r| {
                    r.ns.iter().zip(&r.medians).map(move |(n, m)| {
                        vec![
                            r.label.clone(),
                            n.to_string(),
                            fmt_sig(*m),
                            r.seeds.to_string(),
                            r.strictly_decreasing.map(|b| b.to_string()).unwrap_or_default(),
                        ]
                    })
                })
                .collect(),
        ),
        ReportBody::Clt(rs) => (
            strings(&["n", "replicates", "truth", "sigma2", "ks", "variance_ratio", "mean_standardized", "mean_bandwidth"]),
            rs.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.replicates.to_string(),
                        fmt_sig(r.truth),
                        fmt_sig(r.sigma2),
                        fmt_sig(r.ks),
                        fmt_sig(r.variance_ratio),
                        fmt_sig(r.mean_standardized),
                        fmt_sig(r.mean_bandwidth),
                    ]
                })
                .collect(),
        ),
        ReportBody::Bounds(rs) => {
            let mut header = strings(&["n", "bandwidth", "tau1", "tau2", "lambda", "seeds", "all_hold"]);
            header.extend((1..=6).map(|k| format!("fail_{k}")));
            let rows = rs
                .iter()
                .map(|r| {
                    let mut row = vec![
                        r.n.to_string(),
                        fmt_sig(r.bandwidth),
                        fmt_sig(r.tau1),
                        fmt_sig(r.tau2),
                        fmt_sig(r.lambda),
                        r.seeds.to_string(),
                        r.all_hold.to_string(),
                    ];
                    row.extend(r.failures.iter().map(usize::to_string));
                    row
                })
                .collect();
            (header, rows)
        }
    };
    let warnings: Vec<&String> = match &doc.body {
        ReportBody::Estimates(rs) => rs.iter().flat_map(|r| &r.warnings).collect(),
        ReportBody::Table2(t) | ReportBody::Intervals(t) => t.rows.iter().flatten().flat_map(|c| &c.warnings).collect(),
        _ => Vec::new(),
    };
    for w in warnings {
        let line = format!("warning: {w}");
        if !footer.contains(&line) {
            footer.push(line);
        }
    }
    Rendered { comments, header, rows, footer }
}

/// The report as text in the given format. Identical input gives identical
/// bytes.
pub fn render_report(doc: &ReportDoc, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(doc)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Tabular => {
            let r = render(doc);
            let mut out = String::new();
            for c in &r.comments {
                out.push_str(&format!("# {c}\n"));
            }
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Parse(e.to_string());
            w.write_record(&r.header).map_err(csv_err)?;
            for row in &r.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            out.push_str(&String::from_utf8_lossy(&bytes));
            for f in &r.footer {
                out.push_str(&format!("# {f}\n"));
            }
            Ok(out)
        }
    }
}

pub fn write_report(doc: &ReportDoc, path: &Path, format: ReportFormat) -> Result<()> {
    let text = render_report(doc, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Header and data rows of a tabular report; `#` lines are skipped.
pub fn read_tabular(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).flexible(true).from_reader(file);
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

pub fn read_structured(path: &Path) -> Result<ReportDoc> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_str(&text)?)
}

fn same_number(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-11 * a.abs().max(b.abs())
}

fn tokens(cell: &str) -> Vec<&str> {
    cell.split(['(', ')', '[', ']', ';', ' ']).filter(|t| !t.is_empty()).collect()
}

fn same_cell(a: &str, b: &str) -> bool {
    let (ta, tb) = (tokens(a), tokens(b));
    ta.len() == tb.len()
        && ta.iter().zip(&tb).all(|(x, y)| match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(p), Ok(q)) => same_number(p, q),
            _ => x == y,
        })
}

fn same_value(a: &serde_json::Value, b: &serde_json::Value) -> bool {
    use serde_json::Value;
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => match (x.as_f64(), y.as_f64()) {
            (Some(p), Some(q)) => same_number(p, q),
            _ => x == y,
        },
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same_value(p, q)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| same_value(v, w)))
        }
        _ => a == b,
    }
}

/// Re-reads a written report and checks every value against `doc` to 12
/// significant digits.
pub fn verify_report(doc: &ReportDoc, path: &Path, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Structured => {
            let back = read_structured(path)?;
            let (a, b) = (serde_json::to_value(doc)?, serde_json::to_value(&back)?);
            if !same_value(&a, &b) {
                return Err(Error::ReportMismatch(format!("{} does not match the report", path.display())));
            }
        }
        ReportFormat::Tabular => {
            let expected = render(doc);
            let (header, rows) = read_tabular(path)?;
            if header != expected.header {
                return Err(Error::ReportMismatch(format!("header {header:?} != {:?}", expected.header)));
            }
            if rows.len() != expected.rows.len() {
                return Err(Error::ReportMismatch(format!(
                    "{} data rows, expected {}",
                    rows.len(),
                    expected.rows.len()
                )));
            }
            for (i, (got, want)) in rows.iter().zip(&expected.rows).enumerate() {
                let ok = got.len() == want.len() && got.iter().zip(want).all(|(g, w)| same_cell(g, w));
                if !ok {
                    return Err(Error::ReportMismatch(format!("row {}: {got:?} != {want:?}", i + 1)));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskmeasure::{EstimatorKind, Interval, IntervalMethod, RiskSpectrum};

    fn estimate(point: f64) -> EstimateReport {
        let mut r = EstimateReport::new(EstimatorKind::Kernel, point, 250, RiskSpectrum::exponential(5.0).unwrap());
        r.sd = Some(0.012_345_678_901_234);
        r.ci = Some(Interval { lo: point - 0.02, hi: point + 0.02, level: 0.9, method: IntervalMethod::Percentile });
        r.bandwidth = Some(0.3);
        r.provenance = Some(Provenance::new(&serde_json::json!({"x": 1}), vec![7]));
        r
    }

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig(-0.000_123_456_789_012_345), "-0.000123456789012");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(f64::NAN), "NaN");
    }

    #[test]
    fn empty_batch_is_header_only() {
        let doc = ReportDoc::new(ReportBody::Estimates(vec![]), None);
        let text = render_report(&doc, ReportFormat::Tabular).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("estimator,spectrum,n,point"));
    }

    #[test]
    fn one_estimate_round_trips_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let doc = ReportDoc::new(ReportBody::Estimates(vec![estimate(1.234_567_890_123_456_7)]), None);
        for format in [ReportFormat::Tabular, ReportFormat::Structured] {
            let path = dir.path().join(format!("r.{format}"));
            write_report(&doc, &path, format).unwrap();
            verify_report(&doc, &path, format).unwrap();
        }
        let back = read_structured(&dir.path().join("r.structured")).unwrap();
        assert_eq!(back, doc);
        let (_, rows) = read_tabular(&dir.path().join("r.tabular")).unwrap();
        let p: f64 = rows[0][3].parse().unwrap();
        assert!((p - 1.234_567_890_12).abs() < 1e-15);
    }

    #[test]
    fn verifier_catches_changes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let doc = ReportDoc::new(ReportBody::Estimates(vec![estimate(0.5)]), None);
        write_report(&doc, &path, ReportFormat::Tabular).unwrap();
        let other = ReportDoc::new(ReportBody::Estimates(vec![estimate(0.500_000_001)]), None);
        assert!(matches!(verify_report(&other, &path, ReportFormat::Tabular), Err(Error::ReportMismatch(_))));
    }

    #[test]
    fn table2_layout() {
        let betas = vec![1.0, 5.0, 10.0, 20.0, 100.0, 200.0];
        let names = ["Nikkei", "DAX", "FTSE", "HangSeng"];
        let table = Table2 {
            betas: betas.clone(),
            instruments: names.iter().map(|s| s.to_string()).collect(),
            rows: names
                .iter()
                .map(|_| {
                    betas
                        .iter()
                        .map(|&b| {
                            estimate(0.01 * b).presented(SignConvention::Return, Units::DailyPercent)
                        })
                        .collect()
                })
                .collect(),
        };
        let doc = ReportDoc::new(ReportBody::Table2(table.clone()), None);
        let text = render_report(&doc, ReportFormat::Tabular).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 5);
        assert_eq!(data[0], "instrument,beta=1,beta=5,beta=10,beta=20,beta=100,beta=200");
        assert!(data[1].starts_with("Nikkei,-1(1.23456789012)"), "{}", data[1]);
        assert_eq!(data[1].matches('(').count(), 6);
        assert!(text.contains("# Estimates are in daily % return"));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t3.csv");
        let doc3 = ReportDoc::new(ReportBody::Intervals(table), None);
        write_report(&doc3, &path, ReportFormat::Tabular).unwrap();
        verify_report(&doc3, &path, ReportFormat::Tabular).unwrap();
        let (_, rows) = read_tabular(&path).unwrap();
        assert_eq!(rows[0][1], "[-3; 1]");
    }
}
