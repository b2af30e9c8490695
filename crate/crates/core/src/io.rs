//! File formats and workload generation.
//!
//! Column orders (CSV, header row required):
//!
//! | file            | columns                                                |
//! |-----------------|--------------------------------------------------------|
//! | term structure  | `time,rate`                                            |
//! | option batch    | `maturity,frequency,recovery`                          |
//! | results         | `index,spread_bps,premium_pv,payoff_pv,accrual_pv`     |
//!
//! JSON equivalents: a term structure is an array of `{"time", "rate"}`; an
//! option batch is either a bare array of `{"maturity", "frequency",
//! "recovery"}` or `{"format_version": 1, "count": n, "options": [...]}`;
//! results are an array of objects keyed by the CSV column names.
//!
//! Files ending in `.json` are JSON, anything else is CSV. Floats in CSV are
//! written with 17 significant digits so every `f64` reads back exactly.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{check_node, CurveKind, RatePoint, TermStructure};
use crate::error::{CdsError, Result};
use crate::pricing::{LegValues, SpreadResult};
use crate::schedule::CdsOption;

pub const BATCH_FORMAT_VERSION: u32 = 1;
/// Rate nodes per curve in generated workloads.
pub const DEFAULT_RATE_NODES: usize = 1024;

const CURVE_HEADER: [&str; 2] = ["time", "rate"];
const OPTION_HEADER: [&str; 3] = ["maturity", "frequency", "recovery"];
const RESULT_HEADER: [&str; 5] = [
    "index",
    "spread_bps",
    "premium_pv",
    "payoff_pv",
    "accrual_pv",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = CdsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CdsError::Domain(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// Renders `x` with 17 significant digits, positionally where that stays
/// readable and in scientific notation otherwise.
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0.0".into()
        } else {
            "0.0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent present") + 1..]
        .parse()
        .expect("exponent parses");
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> CdsError {
    CdsError::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CdsError::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CdsError::io(path, e))
}

/// Line of the `i`-th element of a top-level JSON array, 1-based.
fn json_element_line(text: &str, element: usize) -> u64 {
    let mut line = 1u64;
    let mut depth = 0i32;
    let mut in_string = false;
    let mut escaped = false;
    let mut seen = 0usize;
    let mut expecting = false;
    for ch in text.chars() {
        if ch == '\n' {
            line += 1;
        }
        if in_string {
            match (escaped, ch) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        if depth == 1 && expecting && !ch.is_whitespace() && ch != ',' && ch != ']' {
            if seen == element {
                return line;
            }
            seen += 1;
            expecting = false;
        }
        match ch {
            '"' => in_string = true,
            '[' | '{' => {
                depth += 1;
                if depth == 1 {
                    expecting = true;
                }
            }
            ']' | '}' => depth -= 1,
            ',' if depth == 1 => expecting = true,
            _ => {}
        }
    }
    line
}

/// Minimal CSV reader shared by every loader: checks the header, then yields
/// `(line, record)` pairs.
fn csv_records(path: &Path, text: &str, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_error(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse_error(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        rows.push((line, record));
    }
    Ok(rows)
}

fn field<T: FromStr>(
    path: &Path,
    line: u64,
    record: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T> {
    let raw = &record[i];
    raw.parse()
        .map_err(|_| parse_error(path, line, format!("cannot parse {name} `{raw}`")))
}

pub fn load_term_structure(path: impl AsRef<Path>, kind: CurveKind) -> Result<TermStructure> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let (nodes, lines): (Vec<RatePoint>, Vec<u64>) = match Format::from_path(path) {
        Format::Csv => csv_records(path, &text, &CURVE_HEADER)?
            .into_iter()
            .map(|(line, rec)| {
                let time = field(path, line, &rec, 0, "time")?;
                let rate = field(path, line, &rec, 1, "rate")?;
                Ok((RatePoint::new(time, rate), line))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip(),
        Format::Json => {
            let nodes: Vec<RatePoint> = serde_json::from_str(&text)
                .map_err(|e| parse_error(path, e.line() as u64, e.to_string()))?;
            let lines = (0..nodes.len())
                .map(|i| json_element_line(&text, i))
                .collect();
            (nodes, lines)
        }
    };
    if nodes.is_empty() {
        return Err(parse_error(path, 1, "term structure has no nodes"));
    }
    let mut prev = None;
    for (i, node) in nodes.iter().enumerate() {
        check_node(kind, i, *node, prev).map_err(|e| parse_error(path, lines[i], e.to_string()))?;
        prev = Some(node.time);
    }
    TermStructure::new(kind, nodes)
}

pub fn save_term_structure(ts: &TermStructure, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match Format::from_path(path) {
        Format::Csv => {
            let mut out = CURVE_HEADER.join(",");
            out.push('\n');
            for node in ts.nodes() {
                out.push_str(&format!(
                    "{},{}\n",
                    format_sig17(node.time),
                    format_sig17(node.value)
                ));
            }
            out
        }
        Format::Json => to_json_lines(&ts.nodes().collect::<Vec<_>>())?,
    };
    write_file(path, &text)
}

/// Pretty JSON array with one element per line.
fn to_json_lines<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::from("[");
    for (i, item) in items.iter().enumerate() {
        out.push_str(if i == 0 { "\n  " } else { ",\n  " });
        out.push_str(&serde_json::to_string(item).map_err(|e| CdsError::Domain(e.to_string()))?);
    }
    out.push_str(if items.is_empty() { "]\n" } else { "\n]\n" });
    Ok(out)
}

/// Option batch with declared metadata, the JSON object form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFile {
    pub format_version: u32,
    pub count: usize,
    pub options: Vec<CdsOption>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BatchJson {
    Bare(Vec<CdsOption>),
    Declared(BatchFile),
}

pub fn load_options(path: impl AsRef<Path>) -> Result<Vec<CdsOption>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    match Format::from_path(path) {
        Format::Csv => csv_records(path, &text, &OPTION_HEADER)?
            .into_iter()
            .map(|(line, rec)| {
                let option = CdsOption {
                    maturity: field(path, line, &rec, 0, "maturity")?,
                    payment_frequency: field(path, line, &rec, 1, "frequency")?,
                    recovery_rate: field(path, line, &rec, 2, "recovery")?,
                };
                option
                    .validate()
                    .map_err(|e| parse_error(path, line, e.to_string()))?;
                Ok(option)
            })
            .collect(),
        Format::Json => {
            let parsed: BatchJson = serde_json::from_str(&text)
                .map_err(|e| parse_error(path, e.line() as u64, e.to_string()))?;
            let (options, offset) = match parsed {
                BatchJson::Bare(options) => (options, None),
                BatchJson::Declared(batch) => {
                    if batch.format_version != BATCH_FORMAT_VERSION {
                        return Err(parse_error(
                            path,
                            1,
                            format!("unsupported format_version {}", batch.format_version),
                        ));
                    }
                    if batch.count != batch.options.len() {
                        return Err(parse_error(
                            path,
                            1,
                            format!(
                                "declared count {} but found {} options",
                                batch.count,
                                batch.options.len()
                            ),
                        ));
                    }
                    (batch.options, Some(()))
                }
            };
            for (i, option) in options.iter().enumerate() {
                if let Err(e) = option.validate() {
                    // In the object form the options array is nested; fall back to its start.
                    let line = if offset.is_none() {
                        json_element_line(&text, i)
                    } else {
                        1
                    };
                    return Err(parse_error(path, line, format!("option {i}: {e}")));
                }
            }
            Ok(options)
        }
    }
}

pub fn save_options(options: &[CdsOption], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match Format::from_path(path) {
        Format::Csv => {
            let mut out = OPTION_HEADER.join(",");
            out.push('\n');
            for o in options {
                out.push_str(&format!(
                    "{},{},{}\n",
                    format_sig17(o.maturity),
                    o.payment_frequency,
                    format_sig17(o.recovery_rate)
                ));
            }
            out
        }
        Format::Json => {
            let batch = BatchFile {
                format_version: BATCH_FORMAT_VERSION,
                count: options.len(),
                options: options.to_vec(),
            };
            serde_json::to_string_pretty(&batch).map_err(|e| CdsError::Domain(e.to_string()))?
                + "\n"
        }
    };
    write_file(path, &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ResultRow {
    index: usize,
    spread_bps: f64,
    premium_pv: f64,
    payoff_pv: f64,
    accrual_pv: f64,
}

impl From<&SpreadResult> for ResultRow {
    fn from(r: &SpreadResult) -> Self {
        Self {
            index: r.option_index,
            spread_bps: r.spread_bps,
            premium_pv: r.legs.premium_pv,
            payoff_pv: r.legs.payoff_pv,
            accrual_pv: r.legs.accrual_pv,
        }
    }
}

impl From<ResultRow> for SpreadResult {
    fn from(r: ResultRow) -> Self {
        Self {
            option_index: r.index,
            spread_bps: r.spread_bps,
            legs: LegValues {
                premium_pv: r.premium_pv,
                payoff_pv: r.payoff_pv,
                accrual_pv: r.accrual_pv,
            },
        }
    }
}

pub fn write_results(
    results: &[SpreadResult],
    path: impl AsRef<Path>,
    format: Format,
) -> Result<()> {
    write_file(path.as_ref(), &render_results(results, format)?)
}

/// Results as the text [`write_results`] would store.
pub fn render_results(results: &[SpreadResult], format: Format) -> Result<String> {
    let rows: Vec<ResultRow> = results.iter().map(ResultRow::from).collect();
    let text = match format {
        Format::Csv => {
            let mut out = RESULT_HEADER.join(",");
            out.push('\n');
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.index,
                    format_sig17(r.spread_bps),
                    format_sig17(r.premium_pv),
                    format_sig17(r.payoff_pv),
                    format_sig17(r.accrual_pv)
                ));
            }
            out
        }
        Format::Json => to_json_lines(&rows)?,
    };
    Ok(text)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<SpreadResult>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    match Format::from_path(path) {
        Format::Csv => csv_records(path, &text, &RESULT_HEADER)?
            .into_iter()
            .map(|(line, rec)| {
                Ok(ResultRow {
                    index: field(path, line, &rec, 0, "index")?,
                    spread_bps: field(path, line, &rec, 1, "spread_bps")?,
                    premium_pv: field(path, line, &rec, 2, "premium_pv")?,
                    payoff_pv: field(path, line, &rec, 3, "payoff_pv")?,
                    accrual_pv: field(path, line, &rec, 4, "accrual_pv")?,
                }
                .into())
            })
            .collect(),
        Format::Json => {
            let rows: Vec<ResultRow> = serde_json::from_str(&text)
                .map_err(|e| parse_error(path, e.line() as u64, e.to_string()))?;
            Ok(rows.into_iter().map(SpreadResult::from).collect())
        }
    }
}

/// A complete pricing input set.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub interest: TermStructure,
    pub hazard: TermStructure,
    pub options: Vec<CdsOption>,
}

/// Deterministic pseudo-random workload.
///
/// Both curves have `num_rate_nodes` nodes evenly spaced over (0, 30] years.
/// Interest rates are drawn from [0.005, 0.05], hazard rates from
/// [0.001, 0.08]; options have maturity in [0.5, 10], frequency in
/// {1, 2, 4, 12} and recovery in [0, 0.9].
pub fn generate_workload(num_options: usize, num_rate_nodes: usize, seed: u64) -> Result<Workload> {
    if num_rate_nodes == 0 {
        return Err(CdsError::Domain(
            "a workload needs at least one rate node".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 30.0;
    let step = horizon / num_rate_nodes as f64;
    let times: Vec<f64> = (1..=num_rate_nodes).map(|i| i as f64 * step).collect();
    let interest = TermStructure::new(
        CurveKind::Interest,
        times
            .iter()
            .map(|&t| RatePoint::new(t, rng.random_range(0.005..=0.05))),
    )?;
    let hazard = TermStructure::new(
        CurveKind::Hazard,
        times
            .iter()
            .map(|&t| RatePoint::new(t, rng.random_range(0.001..=0.08))),
    )?;
    const FREQUENCIES: [u32; 4] = [1, 2, 4, 12];
    let options = (0..num_options)
        .map(|_| CdsOption {
            maturity: rng.random_range(0.5..=10.0),
            payment_frequency: FREQUENCIES[rng.random_range(0..FREQUENCIES.len())],
            recovery_rate: rng.random_range(0.0..=0.9),
        })
        .collect();
    Ok(Workload {
        interest,
        hazard,
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_rendering() {
        assert_eq!(format_sig17(120.0), "120.00000000000000");
        assert_eq!(format_sig17(0.25), "0.25000000000000000");
        assert_eq!(format_sig17(1e-9), "1.0000000000000001e-9");
        assert_eq!(format_sig17(0.0), "0.0");
        for x in [
            0.1,
            1.0 / 3.0,
            123456.789e-3,
            9.999999999999999e16,
            2.5e-300,
            -7.25,
        ] {
            let s = format_sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn format_from_name() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
        assert_eq!(Format::from_path(Path::new("a/b.json")), Format::Json);
        assert_eq!(Format::from_path(Path::new("a/b.txt")), Format::Csv);
    }

    #[test]
    fn json_element_lines() {
        let text = "[\n  {\"time\": 1},\n  {\"time\": 2},\n\n  {\"time\": \"}\"}\n]";
        assert_eq!(json_element_line(text, 0), 2);
        assert_eq!(json_element_line(text, 1), 3);
        assert_eq!(json_element_line(text, 2), 5);
    }

    #[test]
    fn workload_is_seeded() {
        let a = generate_workload(50, 64, 7).unwrap();
        let b = generate_workload(50, 64, 7).unwrap();
        let c = generate_workload(50, 64, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.interest.len(), 64);
        assert!(generate_workload(1, 0, 1).is_err());
    }
}
