use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pillow::{MapSpec, Potential};
use crate::subsystem::Subsystem;
use crate::thermo::{eigen_pair_with, pressure_estimate, BracketConfig, OperatorConfig, SplitOperator};

/// Largest `|t|` accepted on a pressure curve grid.
pub const T_MAX: f64 = 20.0;

/// Threshold on `max p''` below which the potential is treated as
/// cohomologous to a constant.
pub const CONVEXITY_GATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    /// Eigenvalue of the split operator; derivatives from the eigenvector pair.
    Eigen,
    /// Midpoint of the certified partition-sum bracket at a fixed level;
    /// derivatives by finite differences.
    ZnBracket { n_max: u32 },
}

/// Sampled `p(t) = P(f, tφ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureCurve {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub ddp: Vec<f64>,
    pub method: CurveMethod,
}

/// Symmetric grid `{0, ±0.5, ±1, ±1.5, ±2, ±3, ±4, ±6, ±9, ±14, ±20}`.
pub fn default_t_grid() -> Vec<f64> {
    let pos = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 9.0, 14.0, 20.0];
    let mut t: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    t.push(0.0);
    t.extend(pos);
    t
}

/// Derivative of the discrete eigenvalue in `t`: with `K_t` the operator
/// whose weights are `φ e^{tφ}`, `p'(t) = m̃ᵀ K_t ũ / (λ m̃ᵀ ũ)`.
fn eigen_point(spec: MapSpec, sub: &Subsystem, pot: &Potential, t: f64, cfg: OperatorConfig) -> Result<(f64, f64)> {
    let tp = pot.scaled(t);
    let op = SplitOperator::new(spec, sub, &tp, cfg.grid)?;
    let e = eigen_pair_with(&op, cfg)?;
    let dop = SplitOperator::with_weight(spec, sub, cfg.grid, |face, x, y| {
        pot.eval_raw(face, x, y) * tp.eval_raw(face, x, y).exp()
    })?;
    let k = dop.apply(&e.u_tilde);
    let d = k.dot(&e.eigenmeasure) / (e.lambda * e.u_tilde.dot(&e.eigenmeasure));
    Ok((e.log_lambda, d))
}

fn central_differences(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (v[b] - v[a]) / (t[b] - t[a])
        })
        .collect()
}

/// Pressure curve of the full map. Fails when the curve is flat, which
/// signals a potential cohomologous to a constant.
pub fn pressure_curve(
    spec: MapSpec,
    pot: &Potential,
    t_grid: &[f64],
    method: CurveMethod,
    cfg: OperatorConfig,
) -> Result<PressureCurve> {
    if t_grid.len() < 3 {
        return Err(Error::Domain("pressure curve needs at least three t values".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("t grid must be strictly increasing".into()));
    }
    if t_grid.iter().any(|t| t.abs() > T_MAX) {
        return Err(Error::Domain(format!("t grid exceeds |t| <= {T_MAX}")));
    }
    let sub = Subsystem::full(spec);
    let (p, dp) = match method {
        CurveMethod::Eigen => {
            let pts = t_grid
                .iter()
                .map(|&t| eigen_point(spec, &sub, pot, t, cfg))
                .collect::<Result<Vec<_>>>()?;
            pts.into_iter().unzip()
        }
        CurveMethod::ZnBracket { n_max } => {
            let p = t_grid
                .iter()
                .map(|&t| {
                    pressure_estimate(spec, &sub, &pot.scaled(t), n_max, BracketConfig::default(), u128::MAX)
                        .map(|e| e.estimate)
                })
                .collect::<Result<Vec<f64>>>()?;
            let dp = central_differences(t_grid, &p);
            (p, dp)
        }
    };
    let ddp = central_differences(t_grid, &dp);
    let max_ddp = ddp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_ddp.is_nan() || max_ddp <= CONVEXITY_GATE {
        return Err(Error::Cohomologous { max_ddp });
    }
    Ok(PressureCurve { t: t_grid.to_vec(), p, dp, ddp, method })
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s.signum() != d0.signum() {
                0.0
            } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            d[0] = end(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self { x: x.to_vec(), y: y.to_vec(), d }
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.x.partition_point(|&v| v <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[k]
            + (s3 - 2.0 * s2 + s) * h * self.d[k]
            + (-2.0 * s3 + 3.0 * s2) * self.y[k + 1]
            + (s3 - s2) * h * self.d[k + 1]
    }

    /// `∫_{x_k}^{t}` of the interpolant within the segment containing `t`.
    fn partial(&self, k: usize, t: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        h * ((s - s3 + 0.5 * s4) * self.y[k]
            + (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4) * h * self.d[k]
            + (s3 - 0.5 * s4) * self.y[k + 1]
            + (0.25 * s4 - s3 / 3.0) * h * self.d[k + 1])
    }

    /// `∫_{x_0}^{t}` of the interpolant.
    pub fn integral_from_start(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let whole: f64 = (0..k).map(|j| self.partial(j, self.x[j + 1])).sum();
        whole + self.partial(k, t)
    }
}

impl PressureCurve {
    pub fn t_min(&self) -> f64 {
        self.t[0]
    }

    pub fn t_max(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Grid index used as the anchor of the integrated curve (closest to 1).
    fn anchor(&self) -> usize {
        let mut best = 0;
        for (k, &t) in self.t.iter().enumerate() {
            if (t - 1.0).abs() < (self.t[best] - 1.0).abs() {
                best = k;
            }
        }
        best
    }

    pub fn dp_interpolant(&self) -> MonotoneCubic {
        MonotoneCubic::new(&self.t, &self.dp)
    }
}

/// Smooth model of the pressure curve: `p̂' ` interpolates the sampled
/// derivative monotonically and `p̂` is its integral, anchored at the grid
/// point closest to `t = 1`.
#[derive(Debug, Clone)]
pub struct SmoothPressure {
    dp: MonotoneCubic,
    anchor_t: f64,
    anchor_p: f64,
    anchor_int: f64,
}

impl SmoothPressure {
    pub fn new(curve: &PressureCurve) -> Self {
        let dp = curve.dp_interpolant();
        let k = curve.anchor();
        let anchor_int = dp.integral_from_start(curve.t[k]);
        Self { dp, anchor_t: curve.t[k], anchor_p: curve.p[k], anchor_int }
    }

    pub fn p(&self, t: f64) -> f64 {
        self.anchor_p + self.dp.integral_from_start(t) - self.anchor_int
    }

    pub fn dp(&self, t: f64) -> f64 {
        self.dp.eval(t)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor_t
    }
}

/// `γ_φ = p'(1)` and the estimates `p'(±T)` of the ends of the range of
/// Birkhoff averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRange {
    pub gamma_phi: f64,
    pub alpha_min_hat: f64,
    pub alpha_max_hat: f64,
}

pub fn energy_range(curve: &PressureCurve) -> Result<EnergyRange> {
    let smooth = SmoothPressure::new(curve);
    let gamma_phi = smooth.dp(1.0);
    let alpha_min_hat = curve.dp[0];
    let alpha_max_hat = curve.dp[curve.dp.len() - 1];
    if !(alpha_min_hat < gamma_phi && gamma_phi < alpha_max_hat) {
        let max_ddp = curve.ddp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Cohomologous { max_ddp });
    }
    Ok(EnergyRange { gamma_phi, alpha_min_hat, alpha_max_hat })
}
