use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Natural cubic spline through (t_i, v_i).
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    ts: Vec<f64>,
    vs: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(ts: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        let n = ts.len();
        if n < 2 || vs.len() != n {
            return Err(Error::InvalidInput(format!(
                "spline needs at least two knots with matching values, got {} times and {} values",
                n,
                vs.len()
            )));
        }
        if ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().chain(&vs).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("spline knots must be finite and strictly increasing".into()));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for the interior second derivatives
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = ts[i] - ts[i - 1];
                let h1 = ts[i + 1] - ts[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((vs[i + 1] - vs[i]) / h1 - (vs[i] - vs[i - 1]) / h0);
                if i > 1 {
                    let w = h0 / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] -= w * rhs[i - 1];
                }
            }
            for i in (1..n - 1).rev() {
                m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
            }
        }
        Ok(Self { ts, vs, m })
    }

    /// Value at t; outside the knot range the end cubic pieces are continued.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        let i = match self.ts.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        a * self.vs[i]
            + b * self.vs[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// A real, continuous time profile λ(t).
#[derive(Clone)]
pub enum TimeProfile {
    Constant(f64),
    /// a + b·sin(ωt)
    Sinusoid { a: f64, b: f64, omega: f64 },
    Table(CubicSpline),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TimeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Sinusoid { a, b, omega } => write!(f, "Sinusoid({a} + {b}·sin({omega}t))"),
            Self::Table(s) => write!(f, "Table({} knots)", s.ts.len()),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl fmt::Display for TimeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "c={c}"),
            Self::Sinusoid { a, b, omega } => write!(f, "a={a},b={b},omega={omega}"),
            Self::Table(s) => write!(f, "table({} knots)", s.ts.len()),
            Self::Custom(_) => write!(f, "custom"),
        }
    }
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Sinusoid { a, b, omega } => a + b * (omega * t).sin(),
            Self::Table(s) => s.eval(t),
            Self::Custom(f) => f(t),
        }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn table(ts: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        CubicSpline::new(ts, vs).map(Self::Table)
    }

    /// Some(c) when the profile is the constant c.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Self::Constant(c) => Some(*c),
            Self::Sinusoid { a, b, .. } if *b == 0.0 => Some(*a),
            _ => None,
        }
    }
}
