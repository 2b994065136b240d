use serde::Serialize;

use super::curve::{energy_range, EnergyRange, PressureCurve, SmoothPressure};
use crate::error::{Error, Result};

/// Points of the Legendre cross-check grid over `[t_min, t_max]`.
const LEGENDRE_GRID: usize = 20_001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub alpha: f64,
    /// Solution of `p̂'(ξ) = α`.
    pub xi: f64,
    /// `I(α) = p̂(1) - p̂(ξ) + (ξ - 1)α`.
    pub rate: f64,
    /// `p̂(1) - α + sup_t (tα - p̂(t))` by grid search and refinement.
    pub rate_legendre: f64,
}

impl RateRow {
    pub fn legendre_residual(&self) -> f64 {
        (self.rate - self.rate_legendre).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    #[serde(flatten)]
    pub range: EnergyRange,
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn max_legendre_residual(&self) -> f64 {
        self.rows.iter().map(RateRow::legendre_residual).fold(0.0, f64::max)
    }

    pub fn row(&self, alpha: f64) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.alpha == alpha)
    }
}

/// Rate evaluator built once from a pressure curve.
#[derive(Debug, Clone)]
pub struct RateFunction {
    smooth: SmoothPressure,
    range: EnergyRange,
    t_min: f64,
    t_max: f64,
    p1: f64,
}

impl RateFunction {
    pub fn new(curve: &PressureCurve) -> Result<Self> {
        let range = energy_range(curve)?;
        let smooth = SmoothPressure::new(curve);
        let p1 = smooth.p(1.0);
        Ok(Self { smooth, range, t_min: curve.t_min(), t_max: curve.t_max(), p1 })
    }

    pub fn range(&self) -> EnergyRange {
        self.range
    }

    pub fn smooth(&self) -> &SmoothPressure {
        &self.smooth
    }

    fn check(&self, alpha: f64) -> Result<()> {
        let EnergyRange { alpha_min_hat: lo, alpha_max_hat: hi, .. } = self.range;
        if !(alpha > lo && alpha < hi) {
            return Err(Error::Range { alpha, lo, hi });
        }
        Ok(())
    }

    /// Root of `p̂'(ξ) = α` by bisection.
    pub fn xi(&self, alpha: f64) -> Result<f64> {
        self.check(alpha)?;
        let (mut lo, mut hi) = (self.t_min, self.t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = self.smooth.dp(mid);
            if (v - alpha).abs() <= 1e-12 || hi - lo <= 1e-14 {
                return Ok(mid);
            }
            if v < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn rate(&self, alpha: f64) -> Result<(f64, f64)> {
        let xi = self.xi(alpha)?;
        Ok((xi, self.p1 - self.smooth.p(xi) + (xi - 1.0) * alpha))
    }

    /// Legendre form evaluated independently of the root finder.
    pub fn rate_legendre(&self, alpha: f64) -> f64 {
        let f = |t: f64| t * alpha - self.smooth.p(t);
        let h = (self.t_max - self.t_min) / (LEGENDRE_GRID - 1) as f64;
        let mut best = (self.t_min, f(self.t_min));
        for k in 1..LEGENDRE_GRID {
            let t = self.t_min + k as f64 * h;
            let v = f(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        // golden-section refinement around the grid maximum
        let (mut a, mut b) = ((best.0 - h).max(self.t_min), (best.0 + h).min(self.t_max));
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
        for _ in 0..80 {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        let sup = best.1.max(f(0.5 * (a + b)));
        self.p1 - alpha + sup
    }

    pub fn row(&self, alpha: f64) -> Result<RateRow> {
        let (xi, rate) = self.rate(alpha)?;
        Ok(RateRow { alpha, xi, rate, rate_legendre: self.rate_legendre(alpha) })
    }
}

/// Rate function of the Birkhoff averages of the potential behind `curve`
/// at each requested `α`.
pub fn rate_function(curve: &PressureCurve, alphas: &[f64]) -> Result<RateTable> {
    let f = RateFunction::new(curve)?;
    let rows = alphas.iter().map(|&a| f.row(a)).collect::<Result<Vec<_>>>()?;
    Ok(RateTable { range: f.range(), rows })
}

/// `count` equally spaced values strictly inside the estimated range.
pub fn alpha_grid(range: &EnergyRange, count: usize) -> Vec<f64> {
    let (lo, hi) = (range.alpha_min_hat, range.alpha_max_hat);
    (1..=count).map(|k| lo + (hi - lo) * k as f64 / (count + 1) as f64).collect()
}
