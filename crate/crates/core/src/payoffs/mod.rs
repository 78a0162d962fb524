//! Two-argument payoffs `c(x, y)` on the stock prices at the two maturities.

mod properties;

pub use properties::{
    check_properties, check_properties_with_tolerance, rate_constants, PayoffProperties,
    RateConstants, PROPERTY_TOLERANCE,
};

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PayoffError {
    #[error("({x}, {y}) lies outside the payoff domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("payoff is not finite at ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("property checks need at least 3 grid points per axis, got {x} and {y}")]
    GridTooSmall { x: usize, y: usize },
    #[error("invalid payoff table: {0}")]
    InvalidTable(String),
    #[error("unknown payoff {0:?}; expected asian:<strike>, xy2, expxy2 or table:<path>")]
    Unknown(String),
}

/// Evaluator behind [`PayoffKind::Custom`]; must be pure.
pub type PayoffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A payoff given by values on a rectangular grid, bilinearly interpolated.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Table {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// `values[i][j] = c(x_grid[i], y_grid[j])`.
    pub values: Vec<Vec<f64>>,
}

impl Table {
    fn validate(&self) -> Result<(), PayoffError> {
        let bad = |m: &str| Err(PayoffError::InvalidTable(m.to_string()));
        if self.x_grid.len() < 2 || self.y_grid.len() < 2 {
            return bad("each grid needs at least two points");
        }
        for g in [&self.x_grid, &self.y_grid] {
            if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| !(w[0] < w[1])) {
                return bad("grids must be finite and strictly ascending");
            }
        }
        if self.values.len() != self.x_grid.len()
            || self.values.iter().any(|r| r.len() != self.y_grid.len())
        {
            return bad("values must have one row per x and one column per y");
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return bad("values must be finite");
        }
        Ok(())
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let cell = |g: &[f64], t: f64| {
            let i = g.partition_point(|&v| v <= t).clamp(1, g.len() - 1) - 1;
            (i, ((t - g[i]) / (g[i + 1] - g[i])).clamp(0.0, 1.0))
        };
        let (i, s) = cell(&self.x_grid, x);
        let (j, t) = cell(&self.y_grid, y);
        let v = &self.values;
        (1.0 - s) * ((1.0 - t) * v[i][j] + t * v[i][j + 1])
            + s * ((1.0 - t) * v[i + 1][j] + t * v[i + 1][j + 1])
    }
}

#[derive(Clone)]
pub enum PayoffKind {
    /// `(x/2 + y/2 - strike)^+`.
    Asian { strike: f64 },
    /// `x y^2`.
    XySquared,
    /// `exp(x) y^2`.
    ExpXYSquared,
    Tabulated(Table),
    Custom { name: String, f: PayoffFn },
}

impl fmt::Debug for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Asian { strike } => write!(f, "Asian {{ strike: {strike} }}"),
            Self::XySquared => f.write_str("XySquared"),
            Self::ExpXYSquared => f.write_str("ExpXYSquared"),
            Self::Tabulated(t) => f.debug_tuple("Tabulated").field(t).finish(),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A payoff together with the rectangle `[x_lo, x_hi] x [y_lo, y_hi]` on
/// which it may be evaluated.
#[derive(Clone, Debug)]
pub struct Payoff {
    kind: PayoffKind,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

const DOMAIN_SLACK: f64 = 1e-12;

impl Payoff {
    fn analytic(kind: PayoffKind) -> Self {
        Self {
            kind,
            x_range: (0.0, f64::INFINITY),
            y_range: (0.0, f64::INFINITY),
        }
    }

    pub fn asian(strike: f64) -> Self {
        Self::analytic(PayoffKind::Asian { strike })
    }

    pub fn xy_squared() -> Self {
        Self::analytic(PayoffKind::XySquared)
    }

    pub fn exp_x_y_squared() -> Self {
        Self::analytic(PayoffKind::ExpXYSquared)
    }

    /// Domain is the bounding box of the grids.
    pub fn tabulated(table: Table) -> Result<Self, PayoffError> {
        table.validate()?;
        let x_range = (table.x_grid[0], *table.x_grid.last().unwrap());
        let y_range = (table.y_grid[0], *table.y_grid.last().unwrap());
        Ok(Self {
            kind: PayoffKind::Tabulated(table),
            x_range,
            y_range,
        })
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::analytic(PayoffKind::Custom {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    /// Restricts the domain to `[0, kx] x [0, ky]`.
    pub fn with_domain(mut self, kx: f64, ky: f64) -> Self {
        self.x_range = (0.0, kx);
        self.y_range = (0.0, ky);
        self
    }

    pub fn kind(&self) -> &PayoffKind {
        &self.kind
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    /// Short name in the command-line syntax.
    pub fn label(&self) -> String {
        match &self.kind {
            PayoffKind::Asian { strike } => format!("asian:{strike}"),
            PayoffKind::XySquared => "xy2".into(),
            PayoffKind::ExpXYSquared => "expxy2".into(),
            PayoffKind::Tabulated(_) => "table".into(),
            PayoffKind::Custom { name, .. } => name.clone(),
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let inside = |t: f64, (lo, hi): (f64, f64)| {
            let slack = DOMAIN_SLACK * lo.abs().max(if hi.is_finite() { hi.abs() } else { 0.0 }).max(1.0);
            t >= lo - slack && t <= hi + slack
        };
        inside(x, self.x_range) && inside(y, self.y_range)
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64, PayoffError> {
        if !self.contains(x, y) {
            return Err(PayoffError::OutOfDomain { x, y });
        }
        let v = match &self.kind {
            PayoffKind::Asian { strike } => (0.5 * (x + y) - strike).max(0.0),
            PayoffKind::XySquared => x * y * y,
            PayoffKind::ExpXYSquared => x.exp() * y * y,
            PayoffKind::Tabulated(t) => t.eval(x, y),
            PayoffKind::Custom { f, .. } => f(x, y),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(PayoffError::NonFinite { x, y })
        }
    }

    /// `c(xs[i], ys[j])` for all pairs.
    pub fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>, PayoffError> {
        xs.iter()
            .map(|&x| ys.iter().map(|&y| self.evaluate(x, y)).collect())
            .collect()
    }
}

/// Parses `asian:<strike>`, `xy2`, `expxy2` or `table:<path.json>`.
pub fn parse_payoff(spec: &str) -> Result<Payoff, PayoffError> {
    let spec = spec.trim();
    match spec.split_once(':') {
        None if spec == "xy2" => Ok(Payoff::xy_squared()),
        None if spec == "expxy2" => Ok(Payoff::exp_x_y_squared()),
        Some(("asian", k)) => match k.trim().parse::<f64>() {
            Ok(k) if k.is_finite() => Ok(Payoff::asian(k)),
            _ => Err(PayoffError::Unknown(spec.into())),
        },
        Some(("table", path)) => load_table(Path::new(path.trim())),
        _ => Err(PayoffError::Unknown(spec.into())),
    }
}

fn load_table(path: &Path) -> Result<Payoff, PayoffError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PayoffError::InvalidTable(format!("{}: {e}", path.display())))?;
    let table: Table =
        serde_json::from_str(&text).map_err(|e| PayoffError::InvalidTable(e.to_string()))?;
    Payoff::tabulated(table)
}
