use super::QuoteError;

/// A call-price function `k -> C(k)` together with its right derivative.
///
/// Implemented by interpolated quotes, discrete measures and the analytic
/// marginals of the convergence studies, so that dyadic restrictions and
/// Wasserstein gap computations work uniformly over all of them.
pub trait CallPrice {
    fn call(&self, k: f64) -> f64;
    /// Right derivative `C'(k+)`, which equals `F(k) - 1` for the
    /// distribution function `F` of a consistent measure.
    fn right_slope(&self, k: f64) -> f64;
}

/// Piecewise-linear call-price function through a set of knots.
///
/// Left of the first knot the function continues with slope -1; right of
/// the last knot it stays flat. When the last value is zero the function is
/// an honest candidate function reaching zero at [`terminal_strike`]. When
/// it is not, the function agrees with the call function of its implied
/// measure up to that constant offset.
///
/// [`terminal_strike`]: CallPriceFn::terminal_strike
#[derive(Clone, Debug, PartialEq)]
pub struct CallPriceFn {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl CallPriceFn {
    /// Knots must be strictly increasing and finite.
    pub fn from_knots(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, QuoteError> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(QuoteError::MalformedInput(format!(
                "need matching non-empty knots and values, got {} and {}",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(QuoteError::MalformedInput("non-finite knot or value".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QuoteError::MalformedInput(
                "knots must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    /// Linear interpolant of `f` sampled at `knots`.
    pub fn sample<F: Fn(f64) -> f64>(knots: &[f64], f: F) -> Result<Self, QuoteError> {
        let values = knots.iter().map(|&k| f(k)).collect();
        Self::from_knots(knots.to_vec(), values)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// First knot at which the function is exactly zero, if any.
    pub fn terminal_strike(&self) -> Option<f64> {
        self.knots
            .iter()
            .zip(&self.values)
            .find(|(_, &v)| v == 0.0)
            .map(|(&k, _)| k)
    }

    /// Slopes of the linear pieces between consecutive knots.
    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect()
    }

    pub fn eval(&self, k: f64) -> f64 {
        let n = self.knots.len();
        if k <= self.knots[0] {
            return self.values[0] + (self.knots[0] - k);
        }
        if k >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        // knots[j] < k < knots[j + 1], or an exact hit
        let j = self.knots.partition_point(|&x| x <= k) - 1;
        if self.knots[j] == k {
            return self.values[j];
        }
        let (k0, k1) = (self.knots[j], self.knots[j + 1]);
        let (c0, c1) = (self.values[j], self.values[j + 1]);
        let t = (k - k0) / (k1 - k0);
        c0 + t * (c1 - c0)
    }

    pub fn right_derivative(&self, k: f64) -> f64 {
        let n = self.knots.len();
        if k < self.knots[0] {
            return -1.0;
        }
        if k >= self.knots[n - 1] {
            return 0.0;
        }
        let j = self.knots.partition_point(|&x| x <= k) - 1;
        (self.values[j + 1] - self.values[j]) / (self.knots[j + 1] - self.knots[j])
    }

    pub fn left_derivative(&self, k: f64) -> f64 {
        let n = self.knots.len();
        if k <= self.knots[0] {
            return -1.0;
        }
        if k > self.knots[n - 1] {
            return 0.0;
        }
        let j = self.knots.partition_point(|&x| x < k) - 1;
        (self.values[j + 1] - self.values[j]) / (self.knots[j + 1] - self.knots[j])
    }
}

impl CallPrice for CallPriceFn {
    fn call(&self, k: f64) -> f64 {
        self.eval(k)
    }

    fn right_slope(&self, k: f64) -> f64 {
        self.right_derivative(k)
    }
}
