use serde::Serialize;

use super::birkhoff::{BirkhoffScan, BracketConfig};
use crate::cells::tile_count;
use crate::error::{Error, Result};
use crate::pillow::{MapSpec, Potential};
use crate::scalar::CompensatedSum;
use crate::subsystem::Subsystem;

/// Partition sums at one level, stored as logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionSum {
    pub n: u32,
    /// `log Σ_X exp Sₙφ(x_X)` over centres.
    pub log_centre: f64,
    /// `log Σ_X exp(Sₙφ(x_X) + ωₙ)`, an upper bound of `log Zₙ` that is
    /// subadditive in `n`.
    pub log_upper: f64,
    /// Lower bound for the pressure from the class matrix of certified
    /// infima: `(1/n) log ρ(Lₙ)`.
    pub rate_lower: f64,
    /// Upper bound for the pressure from the class matrix of certified
    /// suprema: `(1/n) log ρ(Uₙ)`.
    pub rate_upper: f64,
}

impl PartitionSum {
    /// `Zₙ` evaluated at tile centres.
    pub fn centre_sum(&self) -> f64 {
        self.log_centre.exp()
    }

    pub fn upper_sum(&self) -> f64 {
        self.log_upper.exp()
    }
}

/// Spectral radius of a nonnegative 2×2 matrix.
pub(crate) fn rho2(a: [[f64; 2]; 2]) -> f64 {
    let [[p, q], [r, s]] = a;
    0.5 * (p + s + ((p - s) * (p - s) + 4.0 * q * r).sqrt())
}

#[derive(Default, Clone)]
struct Acc {
    centre: CompensatedSum,
    upper: [[CompensatedSum; 2]; 2],
    lower: [[CompensatedSum; 2]; 2],
}

fn check_capacity(sub: &Subsystem, n: u32, cap: u128) -> Result<()> {
    let count = tile_count(sub, n);
    if count > cap {
        return Err(Error::Capacity { what: format!("tiles at level {n}"), required: count, cap });
    }
    Ok(())
}

fn partition_from_scan(scan: &BirkhoffScan<'_>, pot: &Potential, n: u32) -> PartitionSum {
    let shift = n as f64 * pot.sup_norm();
    let parts = scan.fold(n, Acc::default, |acc, b, st| {
        let (p, c) = (b.position().index(), b.color().index());
        acc.centre.add((st.centre - shift).exp());
        acc.upper[p][c].add((st.upper - shift).exp());
        acc.lower[p][c].add((st.lower - shift).exp());
    });
    let mut total = Acc::default();
    for part in &parts {
        total.centre.merge(&part.centre);
        for p in 0..2 {
            for c in 0..2 {
                total.upper[p][c].merge(&part.upper[p][c]);
                total.lower[p][c].merge(&part.lower[p][c]);
            }
        }
    }
    let log_centre = total.centre.value().ln() + shift;
    let osc = scan.simple_oscillation(n);
    let up = total.upper.map(|r| r.map(|v| v.value()));
    let lo = total.lower.map(|r| r.map(|v| v.value()));
    let nf = n as f64;
    PartitionSum {
        n,
        log_centre,
        log_upper: log_centre + osc,
        rate_lower: (rho2(lo).ln() + shift) / nf,
        rate_upper: (rho2(up).ln() + shift) / nf,
    }
}

/// Partition sum `Zₙ(F, φ)` with certified bounds.
pub fn partition_sum(
    spec: MapSpec,
    sub: &Subsystem,
    pot: &Potential,
    n: u32,
    cfg: BracketConfig,
    cap: u128,
) -> Result<PartitionSum> {
    if n == 0 {
        return Err(Error::Domain("partition sums need n >= 1".into()));
    }
    check_capacity(sub, n, cap)?;
    let scan = BirkhoffScan::new(spec, sub, pot, cfg)?;
    Ok(partition_from_scan(&scan, pot, n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureEstimate {
    pub levels: Vec<PartitionSum>,
    /// `(1/n) log Zₙ` at centres.
    pub centre_rates: Vec<f64>,
    /// `min_n (1/n) log` of the subadditive upper sums.
    pub fekete_upper: f64,
    /// Certified bracket `[lower, upper]` for the pressure.
    pub lower: f64,
    pub upper: f64,
    /// Midpoint of the bracket.
    pub estimate: f64,
    pub width: f64,
}

impl PressureEstimate {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Pressure bracket from all levels `1..=n_max`.
pub fn pressure_estimate(
    spec: MapSpec,
    sub: &Subsystem,
    pot: &Potential,
    n_max: u32,
    cfg: BracketConfig,
    cap: u128,
) -> Result<PressureEstimate> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    check_capacity(sub, n_max, cap)?;
    let scan = BirkhoffScan::new(spec, sub, pot, cfg)?;
    let levels: Vec<PartitionSum> = (1..=n_max).map(|n| partition_from_scan(&scan, pot, n)).collect();
    let centre_rates = levels.iter().map(|z| z.log_centre / z.n as f64).collect();
    let fekete_upper = levels.iter().map(|z| z.log_upper / z.n as f64).fold(f64::INFINITY, f64::min);
    let lower = levels.iter().map(|z| z.rate_lower).fold(f64::NEG_INFINITY, f64::max);
    let upper = levels.iter().map(|z| z.rate_upper).fold(fekete_upper, f64::min);
    Ok(PressureEstimate {
        levels,
        centre_rates,
        fekete_upper,
        lower,
        upper,
        estimate: 0.5 * (lower + upper),
        width: upper - lower,
    })
}
