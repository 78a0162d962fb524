//! Observed call quotes: ingestion, no-arbitrage validation and
//! piecewise-linear interpolation.
//!
//! A [`QuoteCurve`] holds the raw `(strike, price)` pairs of one maturity.
//! [`validate_candidate`] checks that the quotes can come from an
//! arbitrage-free market (decreasing, convex, first slope at least -1, a
//! strike-0 quote equal to spot). [`interpolate`] turns a valid curve into a
//! [`CallPriceFn`], the linear interpolant from which the extremal measure is
//! read off.

mod call_fn;
mod parse;
mod validate;

pub use call_fn::{CallPrice, CallPriceFn};
pub use parse::{parse_quotes, QuoteFile, QuoteFormat};
pub use validate::{check_calendar, interpolate, validate_candidate, price_tolerance};

use crate::report::ValidationReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum QuoteError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("duplicate strike {strike} for maturity {maturity}")]
    DuplicateStrike { maturity: String, strike: f64 },
    #[error("negative price {price} at strike {strike} for maturity {maturity}")]
    NegativePrice {
        maturity: String,
        strike: f64,
        price: f64,
    },
    #[error("curve failed validation ({} violation(s))", .0.violations.len())]
    InvalidCurve(ValidationReport),
}

/// Observed call prices for one maturity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuoteCurve {
    maturity: String,
    strikes: Vec<f64>,
    prices: Vec<f64>,
    spot: Option<f64>,
}

impl QuoteCurve {
    /// Builds a curve from `(strike, price)` pairs in any order.
    pub fn new(
        maturity: impl Into<String>,
        quotes: impl IntoIterator<Item = (f64, f64)>,
        spot: Option<f64>,
    ) -> Result<Self, QuoteError> {
        let maturity = maturity.into();
        let mut pairs: Vec<(f64, f64)> = quotes.into_iter().collect();
        if pairs.is_empty() {
            return Err(QuoteError::MalformedInput(format!(
                "maturity {maturity} has no quotes"
            )));
        }
        for &(k, c) in &pairs {
            if !k.is_finite() || !c.is_finite() {
                return Err(QuoteError::MalformedInput(format!(
                    "non-finite quote ({k}, {c}) for maturity {maturity}"
                )));
            }
            if k < 0.0 {
                return Err(QuoteError::MalformedInput(format!(
                    "negative strike {k} for maturity {maturity}"
                )));
            }
            if c < 0.0 {
                return Err(QuoteError::NegativePrice {
                    maturity,
                    strike: k,
                    price: c,
                });
            }
        }
        if let Some(s) = spot {
            if !(s.is_finite() && s > 0.0) {
                return Err(QuoteError::MalformedInput(format!(
                    "spot must be positive, got {s}"
                )));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(QuoteError::DuplicateStrike {
                maturity,
                strike: w[0].0,
            });
        }
        let (strikes, prices) = pairs.into_iter().unzip();
        Ok(Self {
            maturity,
            strikes,
            prices,
            spot,
        })
    }

    pub fn maturity(&self) -> &str {
        &self.maturity
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn spot(&self) -> Option<f64> {
        self.spot
    }

    pub fn len(&self) -> usize {
        self.strikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strikes.is_empty()
    }

    pub fn with_spot(mut self, spot: Option<f64>) -> Self {
        self.spot = spot;
        self
    }

    /// Copy of the curve with the price at `strike` replaced.
    pub fn with_price(&self, strike: f64, price: f64) -> Result<Self, QuoteError> {
        let quotes = self
            .strikes
            .iter()
            .zip(&self.prices)
            .map(|(&k, &c)| if k == strike { (k, price) } else { (k, c) });
        Self::new(self.maturity.clone(), quotes, self.spot)
    }
}
