use std::ops::RangeInclusive;

use serde::Serialize;

use super::rate::RateFunction;
use crate::cells::{partner_box, EdgeLabel, TileBox, DEFAULT_CAPACITY};
use crate::error::{Error, Result};
use crate::pillow::{Color, MapSpec, Potential};
use crate::scalar::CompensatedSum;
use crate::subsystem::{classify, ClassifyResult, Subsystem};
use crate::thermo::{
    distortion_constants, gibbs_constants, tile_measures, BirkhoffScan, BracketConfig, EigenPair, MeasureConfig,
    TileMeasure, DEFAULT_C0,
};

/// Certified Birkhoff data of every level-`n` tile of the full map, stored
/// densely by box.
#[derive(Debug, Clone)]
pub struct BirkhoffTable {
    pub level: u32,
    pub side: u64,
    pub centre: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BirkhoffTable {
    pub fn new(spec: MapSpec, pot: &Potential, n: u32, cfg: BracketConfig, cap: u128) -> Result<Self> {
        let side = spec.side_count(n)?;
        let count = 2 * (side as u128) * (side as u128);
        if n == 0 || count > cap {
            return Err(Error::Capacity { what: format!("tiles at level {n}"), required: count, cap });
        }
        let sub = Subsystem::full(spec);
        let scan = BirkhoffScan::new(spec, &sub, pot, cfg)?;
        let len = count as usize;
        let mut t = Self { level: n, side, centre: vec![0.0; len], lower: vec![0.0; len], upper: vec![0.0; len] };
        scan.walk(n, |b, st| {
            let i = b.dense_index(side);
            t.centre[i] = st.centre;
            t.lower[i] = st.lower;
            t.upper[i] = st.upper;
        });
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.centre.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centre.is_empty()
    }
}

/// Which tail a deviation level `α` probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// `α > γ_φ`: averages at least `α`.
    Upper,
    /// `α < γ_φ`: averages at most `α`.
    Lower,
}

impl Tail {
    pub fn of(alpha: f64, gamma: f64) -> Result<Self> {
        if alpha > gamma {
            Ok(Tail::Upper)
        } else if alpha < gamma {
            Ok(Tail::Lower)
        } else {
            Err(Error::Domain(format!("alpha = {alpha} equals the mean {gamma}")))
        }
    }

    /// Tile certainly contains a point beyond `nα` (its centre).
    fn certain(self, t: &BirkhoffTable, i: usize, level: f64) -> bool {
        match self {
            Tail::Upper => t.centre[i] >= level,
            Tail::Lower => t.centre[i] <= level,
        }
    }

    /// Tile may contain a point beyond `nα`.
    fn possible(self, t: &BirkhoffTable, i: usize, level: f64) -> bool {
        match self {
            Tail::Upper => t.upper[i] >= level,
            Tail::Lower => t.lower[i] <= level,
        }
    }
}

/// Pairs `(X_b, X_w)` of `n`-tiles selected at level `α`. The selection uses
/// certified brackets, so pairs whose bracket straddles `nα` are kept.
#[derive(Debug, Clone, Serialize)]
pub struct PairSet {
    pub level: u32,
    pub side: u64,
    pub alpha: f64,
    pub tail: Tail,
    pub edge: EdgeLabel,
    /// Number of pairs in the full map, `(deg f)ⁿ`.
    pub total_pairs: usize,
    /// Pairs containing a point whose average is certainly beyond `α`.
    pub certain_count: usize,
    /// Pairs that may contain such a point.
    pub possible_count: usize,
    #[serde(skip)]
    black: Vec<u32>,
    #[serde(skip)]
    white: Vec<u32>,
    #[serde(skip)]
    certain: Vec<bool>,
}

impl PairSet {
    pub fn pairs(&self) -> impl Iterator<Item = (TileBox, TileBox)> + '_ {
        let side = self.side;
        self.black.iter().zip(&self.white).map(move |(&b, &w)| {
            (
                TileBox::from_dense_index(self.level, side, b as usize),
                TileBox::from_dense_index(self.level, side, w as usize),
            )
        })
    }

    /// Boxes of both tiles of every selected pair.
    pub fn boxes(&self) -> impl Iterator<Item = TileBox> + '_ {
        self.pairs().flat_map(|(b, w)| [b, w])
    }

    /// Mass of the selected pairs; `certain_only` restricts to certain pairs.
    pub fn mass(&self, mu: &TileMeasure, certain_only: bool) -> f64 {
        let mut s = CompensatedSum::default();
        for (k, (b, w)) in self.pairs().enumerate() {
            if !certain_only || self.certain[k] {
                s.add(mu.weight(&b));
                s.add(mu.weight(&w));
            }
        }
        s.value()
    }

    /// The union of the selected pairs as a subsystem of `fⁿ`.
    pub fn subsystem(&self, spec: MapSpec) -> Result<Subsystem> {
        Subsystem::from_boxes(spec, self.level, self.boxes())
    }
}

/// Selects the pairs of `n`-tiles with a Birkhoff average beyond `α`.
pub fn select_pairs(spec: MapSpec, table: &BirkhoffTable, e0: EdgeLabel, alpha: f64, gamma: f64) -> Result<PairSet> {
    let tail = Tail::of(alpha, gamma)?;
    let (n, side) = (table.level, table.side);
    let level = n as f64 * alpha;
    let mut set = PairSet {
        level: n,
        side,
        alpha,
        tail,
        edge: e0,
        total_pairs: (side * side) as usize,
        certain_count: 0,
        possible_count: 0,
        black: Vec::new(),
        white: Vec::new(),
        certain: Vec::new(),
    };
    for k in 0..table.len() {
        let b = TileBox::from_dense_index(n, side, k);
        if b.color() != Color::Black {
            continue;
        }
        let (w, _) = partner_box(spec, e0, &b)?;
        let j = w.dense_index(side);
        let possible = tail.possible(table, k, level) || tail.possible(table, j, level);
        if !possible {
            continue;
        }
        let certain = tail.certain(table, k, level) || tail.certain(table, j, level);
        set.possible_count += 1;
        set.certain_count += certain as usize;
        set.black.push(k as u32);
        set.white.push(j as u32);
        set.certain.push(certain);
    }
    Ok(set)
}

/// `Pⁿ(α)` for the full map at level `n`.
pub fn pairs_alpha(
    spec: MapSpec,
    pot: &Potential,
    e0: EdgeLabel,
    n: u32,
    alpha: f64,
    gamma: f64,
    cfg: BracketConfig,
) -> Result<PairSet> {
    let table = BirkhoffTable::new(spec, pot, n, cfg, DEFAULT_CAPACITY)?;
    select_pairs(spec, &table, e0, alpha, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationConfig {
    pub bracket: BracketConfig,
    pub measure: MeasureConfig,
    pub edge: EdgeLabel,
    /// Classification cap used for `fⁿ` restricted to the selected pairs.
    pub classify_cap: u32,
    pub cap: u128,
}

impl Default for DeviationConfig {
    fn default() -> Self {
        Self {
            bracket: BracketConfig::default(),
            measure: MeasureConfig::default(),
            edge: EdgeLabel::Bottom,
            classify_cap: 3,
            cap: DEFAULT_CAPACITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRow {
    pub n: u32,
    /// `μ̂` of the tiles whose certified bracket reaches beyond `nα`.
    pub mu_tiles: f64,
    /// `μ̂(Pⁿ(α))` counting every possibly selected pair.
    pub mu_pairs: f64,
    /// `μ̂` of the certainly selected pairs.
    pub mu_pairs_certain: f64,
    pub bound: f64,
    pub holds: bool,
    /// `-(1/n) log μ̂(Pⁿ(α))`.
    pub slope: f64,
    pub pairs_certain: usize,
    pub pairs_possible: usize,
    pub gibbs_constant: f64,
    pub strongly_primitive: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub alpha: f64,
    pub tail: Tail,
    pub xi: f64,
    pub rate: f64,
    /// `C_α = 2 C_μ exp(D(|2(ξ-1)| + 1))` with `D` the Birkhoff distortion
    /// and `C_μ` the largest observed Gibbs constant.
    pub c_alpha: f64,
    pub c_mu: f64,
    pub distortion: f64,
    pub rows: Vec<DeviationRow>,
    /// Smallest `n` from which the bound holds at every computed level.
    pub first_bound_n: Option<u32>,
    /// Smallest `n` from which, at every computed level, the bound holds and
    /// `fⁿ` restricted to the selected pairs is strongly primitive.
    pub first_valid_n: Option<u32>,
}

impl DeviationReport {
    pub fn row(&self, n: u32) -> Option<&DeviationRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// First level of the longest suffix of `rows` on which `ok` holds.
fn first_from(rows: &[DeviationRow], ok: impl Fn(&DeviationRow) -> bool) -> Option<u32> {
    match rows.iter().rposition(|r| !ok(r)) {
        None => rows.first().map(|r| r.n),
        Some(p) => rows.get(p + 1).map(|r| r.n),
    }
}

fn tile_mass(table: &BirkhoffTable, mu: &TileMeasure, tail: Tail, level: f64) -> f64 {
    let mut s = CompensatedSum::default();
    for k in 0..table.len() {
        if tail.possible(table, k, level) {
            s.add(mu.weight(&TileBox::from_dense_index(table.level, table.side, k)));
        }
    }
    s.value()
}

/// Large-deviation report of the equilibrium measure at each `α`, over the
/// levels in `levels`. Tables and measures are built once per level.
pub fn deviation_report(
    spec: MapSpec,
    pot: &Potential,
    alphas: &[f64],
    levels: RangeInclusive<u32>,
    rate: &RateFunction,
    eig: &EigenPair,
    cfg: DeviationConfig,
) -> Result<Vec<DeviationReport>> {
    if *levels.start() == 0 || levels.is_empty() {
        return Err(Error::Domain("deviation levels must be a nonempty range of positive integers".into()));
    }
    let gamma = rate.range().gamma_phi;
    let tails = alphas.iter().map(|&a| Tail::of(a, gamma)).collect::<Result<Vec<_>>>()?;
    let rates = alphas.iter().map(|&a| rate.rate(a)).collect::<Result<Vec<_>>>()?;
    let sub = Subsystem::full(spec);
    let mut per_alpha: Vec<Vec<DeviationRow>> = vec![Vec::new(); alphas.len()];
    let mut c_mu: f64 = 1.0;
    for n in levels {
        let table = BirkhoffTable::new(spec, pot, n, cfg.bracket, cfg.cap)?;
        let (_, mu) = tile_measures(spec, &sub, pot, n, eig, cfg.measure, cfg.cap)?;
        let gibbs = gibbs_constants(spec, &sub, pot, &mu, eig.log_lambda)?;
        c_mu = c_mu.max(gibbs.c_observed);
        for (k, &alpha) in alphas.iter().enumerate() {
            let pairs = select_pairs(spec, &table, cfg.edge, alpha, gamma)?;
            let mu_pairs = pairs.mass(&mu, false);
            let strongly_primitive = if cfg.classify_cap == 0 || pairs.possible_count == 0 {
                None
            } else {
                let c: ClassifyResult = classify(&pairs.subsystem(spec)?, cfg.classify_cap)?;
                Some(c.strongly_primitive)
            };
            per_alpha[k].push(DeviationRow {
                n,
                mu_tiles: tile_mass(&table, &mu, tails[k], n as f64 * alpha),
                mu_pairs,
                mu_pairs_certain: pairs.mass(&mu, true),
                bound: 0.0,
                holds: false,
                slope: -mu_pairs.ln() / n as f64,
                pairs_certain: pairs.certain_count,
                pairs_possible: pairs.possible_count,
                gibbs_constant: gibbs.c_observed,
                strongly_primitive,
            });
        }
    }
    let consts = distortion_constants(spec, pot, 1, DEFAULT_C0);
    let d = consts.birkhoff_distortion();
    let reports = alphas
        .iter()
        .zip(per_alpha)
        .enumerate()
        .map(|(k, (&alpha, mut rows))| {
            let (xi, i) = rates[k];
            let c_alpha = 2.0 * c_mu * (d * ((2.0 * (xi - 1.0)).abs() + 1.0)).exp();
            for r in &mut rows {
                r.bound = c_alpha * (-i * r.n as f64).exp();
                r.holds = r.mu_pairs <= r.bound;
            }
            let first_bound_n = first_from(&rows, |r| r.holds);
            let first_valid_n = first_from(&rows, |r| r.holds && r.strongly_primitive != Some(false));
            DeviationReport {
                alpha,
                tail: tails[k],
                xi,
                rate: i,
                c_alpha,
                c_mu,
                distortion: d,
                rows,
                first_bound_n,
                first_valid_n,
            }
        })
        .collect();
    Ok(reports)
}
