//! Eigenmeasure and equilibrium weights on tiles, and Gibbs and
//! invariance diagnostics.
//!
//! For a level-`n` tile `X` of color `c`, the eigenmeasure satisfies
//! `m(X) = λ^{-n} ∫_{X⁰_c} exp Sₙφ(b_X y) dm(y)` with `b_X` the inverse
//! branch onto `X`. Splitting `Sₙφ(b_X y)` into the first `n - K` terms,
//! which vary by at most the head oscillation over the tile, and the last
//! `K` terms, which only depend on the suffix tile `Y` and `y`, gives
//! `m(X) ≈ λ^{-n} exp S_{n-K}φ(x_X) · J(Y)` with
//! `J(Y) = ∫ exp S_Kφ(b_Y y) dm(y)` integrated against the dual masses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::birkhoff::{BirkhoffScan, BracketConfig};
use super::operator::EigenPair;
use crate::cells::{tile_count, walk_partitioned, walk_tiles, TileAddress, TileBox};
use crate::error::{Error, Result};
use crate::pillow::{apply_map, Color, MapSpec, Potential};
use crate::scalar::CompensatedSum;
use crate::subsystem::Subsystem;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Eigenmeasure,
    Equilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureConfig {
    /// Suffix length `K` of the quadrature.
    pub suffix_len: u32,
    /// Bins per axis used to coarsen the dual masses.
    pub bins: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self { suffix_len: 3, bins: 64 }
    }
}

/// Weights on the level-`n` tiles of a subsystem, stored densely by box.
#[derive(Debug, Clone, PartialEq)]
pub struct TileMeasure {
    pub level: u32,
    pub kind: MeasureKind,
    pub side: u64,
    weights: Vec<f64>,
    /// Sum of the weights after normalization.
    pub total: f64,
    /// Sum before normalization.
    pub raw_total: f64,
    pub tiles: usize,
}

impl TileMeasure {
    pub fn weight(&self, b: &TileBox) -> f64 {
        self.weights[b.dense_index(self.side)]
    }

    pub fn weight_of(&self, spec: MapSpec, addr: &TileAddress) -> f64 {
        self.weight(&addr.tile_box(spec))
    }

    /// Tiles carrying positive weight, in dense index order.
    pub fn entries(&self) -> impl Iterator<Item = (TileBox, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| (TileBox::from_dense_index(self.level, self.side, k), w))
    }

    /// Mass of the tiles contained in the 0-tile `c`.
    pub fn face_mass(&self, c: Color) -> f64 {
        let half = (self.side * self.side) as usize;
        let r = &self.weights[c.index() * half..(c.index() + 1) * half];
        let mut s = CompensatedSum::default();
        r.iter().for_each(|&w| s.add(w));
        s.value()
    }

    /// `Σ_X w(X) g(x_X)` over tile centres.
    pub fn integrate_centres(&self, g: impl Fn(&Point) -> f64 + Sync) -> f64 {
        let side = self.side;
        let parts: Vec<CompensatedSum> = self
            .weights
            .par_chunks(1 << 16)
            .enumerate()
            .map(|(chunk, ws)| {
                let mut s = CompensatedSum::default();
                for (k, &w) in ws.iter().enumerate() {
                    if w > 0.0 {
                        let b = TileBox::from_dense_index(self.level, side, (chunk << 16) + k);
                        s.add(w * g(&b.center(side)));
                    }
                }
                s
            })
            .collect();
        let mut total = CompensatedSum::default();
        parts.iter().for_each(|p| total.merge(p));
        total.value()
    }

    fn normalize(&mut self) -> Result<()> {
        let mut s = CompensatedSum::default();
        self.weights.iter().for_each(|&w| s.add(w));
        let raw = s.value();
        if !(raw > 0.0 && raw.is_finite()) {
            return Err(Error::Degenerate(format!("tile weights sum to {raw}")));
        }
        self.weights.iter_mut().for_each(|w| *w /= raw);
        let mut t = CompensatedSum::default();
        self.weights.iter().for_each(|&w| t.add(w));
        self.raw_total = raw;
        self.total = t.value();
        Ok(())
    }
}

/// Dual masses of one face coarsened to `bins²` point masses at their
/// mass centroids.
fn coarsen(eig: &EigenPair, face: Color, bins: usize) -> Vec<(f64, f64, f64)> {
    let m = &eig.eigenmeasure;
    let mut acc = vec![(0.0, 0.0, 0.0); bins * bins];
    for (k, &w) in m.values[face.index()].iter().enumerate() {
        let (x, y) = m.node(k);
        let bx = ((x * bins as f64) as usize).min(bins - 1);
        let by = ((y * bins as f64) as usize).min(bins - 1);
        let e = &mut acc[by * bins + bx];
        e.0 += w;
        e.1 += w * x;
        e.2 += w * y;
    }
    acc.into_iter().filter(|e| e.0 > 0.0).map(|(w, x, y)| (w, x / w, y / w)).collect()
}

/// Eigenmeasure `m` and equilibrium measure `μ = ũ m` on level-`n` tiles.
pub fn tile_measures(
    spec: MapSpec,
    sub: &Subsystem,
    pot: &Potential,
    n: u32,
    eig: &EigenPair,
    cfg: MeasureConfig,
    cap: u128,
) -> Result<(TileMeasure, TileMeasure)> {
    if n == 0 {
        return Err(Error::Domain("tile measures need n >= 1".into()));
    }
    let count = tile_count(sub, n);
    if count > cap {
        return Err(Error::Capacity { what: format!("tiles at level {n}"), required: count, cap });
    }
    let k = n.min(cfg.suffix_len.max(1));
    let scan = BirkhoffScan::new(spec, sub, pot, BracketConfig { suffix_len: k, sampling_depth: 0 })?;

    let bins = [coarsen(eig, Color::Black, cfg.bins), coarsen(eig, Color::White, cfg.bins)];
    let side_k = spec.side_count(k)?;
    let mut suffixes = Vec::new();
    walk_tiles(spec, sub, k, |_| (), |_, _, _| (), |b, _| suffixes.push(*b));
    let js: Vec<(usize, f64)> = suffixes
        .par_iter()
        .map(|y| {
            let (even_a, even_b) = y.orientation();
            let mut s = CompensatedSum::default();
            for &(w, x0, y0) in &bins[y.color().index()] {
                let u = if even_a { x0 } else { 1.0 - x0 };
                let v = if even_b { y0 } else { 1.0 - y0 };
                s.add(w * scan.forward_sum(&y.local_point(side_k, u, v), k).exp());
            }
            (y.dense_index(side_k), s.value())
        })
        .collect();
    let mut j = vec![0.0; 2 * (side_k * side_k) as usize];
    for (i, v) in js {
        j[i] = v;
    }

    let side = spec.side_count(n)?;
    let total = 2 * (side as usize) * (side as usize);
    let mut mw = vec![0.0; total];
    let mut uw = vec![0.0; total];
    let log_lambda_n = n as f64 * eig.log_lambda;
    scan.walk(n, |b, st| {
        let w = (st.head - log_lambda_n).exp() * j[st.suffix];
        let c = b.center(side);
        let i = b.dense_index(side);
        mw[i] = w;
        uw[i] = w * eig.u_tilde.eval(b.position(), c.x, c.y);
    });
    let mut m = TileMeasure {
        level: n,
        kind: MeasureKind::Eigenmeasure,
        side,
        weights: mw,
        total: 0.0,
        raw_total: 0.0,
        tiles: count as usize,
    };
    let mut mu = TileMeasure { kind: MeasureKind::Equilibrium, weights: uw, ..m.clone() };
    m.normalize()?;
    mu.normalize()?;
    Ok((m, mu))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsReport {
    pub level: u32,
    pub pressure: f64,
    /// `max max(r, 1/r)` with `r = μ(X) / exp(Sₙφ(x) - nP)` over tiles and
    /// sample points.
    pub c_observed: f64,
    /// The same ratio divided by the mass of the 0-tile `fⁿ(X)`.
    pub c_split: f64,
    pub worst_tile: Option<String>,
    pub zero_weight_tiles: usize,
}

const SAMPLE_POINTS: [(f64, f64); 5] = [(0.5, 0.5), (0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)];

#[derive(Clone, Copy)]
struct Worst {
    log_c: f64,
    log_split: f64,
    tile: Option<TileBox>,
    zeros: usize,
}

/// Gibbs ratios of a tile measure against the pressure `p`.
pub fn gibbs_constants(
    spec: MapSpec,
    sub: &Subsystem,
    pot: &Potential,
    measure: &TileMeasure,
    p: f64,
) -> Result<GibbsReport> {
    let n = measure.level;
    let side = measure.side;
    let face_mass = [measure.face_mass(Color::Black), measure.face_mass(Color::White)];
    let log_face = face_mass.map(f64::ln);
    let parts = walk_partitioned(
        spec,
        sub,
        n,
        |_| (),
        |_, _, _| (),
        || Worst { log_c: 0.0, log_split: 0.0, tile: None, zeros: 0 },
        |acc, b, _| {
            let w = measure.weight(b);
            if w <= 0.0 {
                acc.zeros += 1;
                return;
            }
            for &(u, v) in &SAMPLE_POINTS {
                let mut q = b.local_point(side, u, v);
                let mut s = 0.0;
                for _ in 0..n {
                    s += pot.eval(&q);
                    q = apply_map(spec, &q);
                }
                let lr = w.ln() - s + n as f64 * p;
                let ls = lr - log_face[b.color().index()];
                if lr.abs() > acc.log_c {
                    acc.log_c = lr.abs();
                    acc.tile = Some(*b);
                }
                acc.log_split = acc.log_split.max(ls.abs());
            }
        },
    );
    let mut worst = Worst { log_c: 0.0, log_split: 0.0, tile: None, zeros: 0 };
    for part in parts {
        if part.log_c > worst.log_c {
            worst.log_c = part.log_c;
            worst.tile = part.tile;
        }
        worst.log_split = worst.log_split.max(part.log_split);
        worst.zeros += part.zeros;
    }
    Ok(GibbsReport {
        level: n,
        pressure: p,
        c_observed: worst.log_c.exp(),
        c_split: worst.log_split.exp(),
        worst_tile: worst.tile.and_then(|b| b.address(spec)).map(|a| a.to_string()),
        zero_weight_tiles: worst.zeros,
    })
}

/// `∫ g∘f dμ - ∫ g dμ` at tile level, using that `f` maps the centre of `X`
/// to the centre of `σX`.
pub fn invariance_defect(spec: MapSpec, measure: &TileMeasure, g: impl Fn(&Point) -> f64 + Sync) -> f64 {
    let after = measure.integrate_centres(|p| g(&apply_map(spec, p)));
    let before = measure.integrate_centres(&g);
    after - before
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::DEFAULT_CAPACITY;
    use crate::thermo::operator::{eigen_pair, OperatorConfig};

    #[test]
    fn zero_potential_gives_uniform_weights() {
        let s = MapSpec::new(3).unwrap();
        let sub = Subsystem::full(s);
        let pot = Potential::zero();
        let eig = eigen_pair(s, &sub, &pot, OperatorConfig { grid: 33, ..Default::default() }).unwrap();
        let (m, mu) = tile_measures(s, &sub, &pot, 3, &eig, MeasureConfig::default(), DEFAULT_CAPACITY).unwrap();
        let expected = 1.0 / (2.0 * 729.0);
        for (_, w) in m.entries().chain(mu.entries()) {
            assert!((w - expected).abs() < 1e-12 * expected);
        }
        assert_eq!(m.entries().count(), 1458);
        assert!((m.total - 1.0).abs() < 1e-12);
        let g = gibbs_constants(s, &sub, &pot, &mu, 9f64.ln()).unwrap();
        assert!((g.c_observed - 2.0).abs() < 1e-9, "{g:?}");
        assert!((g.c_split - 1.0).abs() < 1e-9);
    }
}
