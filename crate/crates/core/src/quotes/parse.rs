use std::io::Read;

use serde::Deserialize;

use super::{QuoteCurve, QuoteError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuoteFormat {
    Csv,
    Json,
}

impl QuoteFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => QuoteFormat::Json,
            _ => QuoteFormat::Csv,
        }
    }
}

/// Parsed quote file: one curve per maturity label, in order of first
/// appearance, plus optional file-level metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct QuoteFile {
    pub curves: Vec<QuoteCurve>,
    pub spot: Option<f64>,
    pub terminal_strike: Option<f64>,
}

impl QuoteFile {
    pub fn curve(&self, maturity: &str) -> Option<&QuoteCurve> {
        self.curves.iter().find(|c| c.maturity() == maturity)
    }
}

#[derive(Deserialize)]
struct CsvRow {
    maturity: String,
    strike: f64,
    price: f64,
}

#[derive(Deserialize)]
struct JsonRow {
    maturity: serde_json::Value,
    strike: f64,
    price: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonDoc {
    Rows(Vec<JsonRow>),
    Document {
        quotes: Vec<JsonRow>,
        #[serde(default)]
        spot: Option<f64>,
        #[serde(default)]
        terminal_strike: Option<f64>,
    },
}

/// Reads quotes in the given format.
///
/// CSV needs the header `maturity,strike,price`; JSON is either an array of
/// `{maturity, strike, price}` objects or an object holding such an array
/// under `quotes` next to optional `spot` and `terminal_strike` fields.
pub fn parse_quotes<R: Read>(mut source: R, format: QuoteFormat) -> Result<QuoteFile, QuoteError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| QuoteError::MalformedInput(e.to_string()))?;
    if text.trim().is_empty() {
        return Err(QuoteError::MalformedInput("empty input".into()));
    }
    let (rows, spot, terminal_strike) = match format {
        QuoteFormat::Csv => (csv_rows(&text)?, None, None),
        QuoteFormat::Json => json_rows(&text)?,
    };
    if rows.is_empty() {
        return Err(QuoteError::MalformedInput("no quote rows".into()));
    }

    let mut grouped: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (label, strike, price) in rows {
        match grouped.iter_mut().find(|(l, _)| *l == label) {
            Some((_, quotes)) => quotes.push((strike, price)),
            None => grouped.push((label, vec![(strike, price)])),
        }
    }
    let curves = grouped
        .into_iter()
        .map(|(label, quotes)| QuoteCurve::new(label, quotes, spot))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuoteFile {
        curves,
        spot,
        terminal_strike,
    })
}

fn csv_rows(text: &str) -> Result<Vec<(String, f64, f64)>, QuoteError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| QuoteError::MalformedInput(e.to_string()))?
        .clone();
    for required in ["maturity", "strike", "price"] {
        if !headers.iter().any(|h| h == required) {
            return Err(QuoteError::MalformedInput(format!(
                "missing column `{required}` (expected header maturity,strike,price)"
            )));
        }
    }
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| QuoteError::MalformedInput(e.to_string()))?;
            Ok((row.maturity, row.strike, row.price))
        })
        .collect()
}

type JsonParts = (Vec<(String, f64, f64)>, Option<f64>, Option<f64>);

fn json_rows(text: &str) -> Result<JsonParts, QuoteError> {
    let doc: JsonDoc =
        serde_json::from_str(text).map_err(|e| QuoteError::MalformedInput(e.to_string()))?;
    let (rows, spot, terminal_strike) = match doc {
        JsonDoc::Rows(rows) => (rows, None, None),
        JsonDoc::Document {
            quotes,
            spot,
            terminal_strike,
        } => (quotes, spot, terminal_strike),
    };
    let rows = rows
        .into_iter()
        .map(|r| {
            let label = match r.maturity {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(QuoteError::MalformedInput(format!(
                        "maturity must be a string or number, got {other}"
                    )))
                }
            };
            Ok((label, r.strike, r.price))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((rows, spot, terminal_strike))
}
