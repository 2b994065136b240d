//! Birkhoff sums over tiles with certified two-sided bounds.
//!
//! For a level-`n` tile `X` with centre `x_X`, the map `f` sends `X` onto
//! `σX` (drop the first letter) and `x_X` onto `x_{σX}`, so
//! `Sₙφ(x_X) = φ(x_X) + S_{n-1}φ(x_{σX})` and a depth-first walk that
//! prepends letters computes all centre sums with one evaluation per tile.
//!
//! Bounds for `sup_X Sₙφ` and `inf_X Sₙφ` split the sum into a head of
//! `n - K` terms, controlled by the Hölder seminorm and the tile radii, and
//! a tail `S_Kφ` over the level-`K` suffix tile, whose extrema are sampled
//! on a finer grid with an explicit remainder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{walk_partitioned, walk_tiles, TileBox};
use crate::error::Result;
use crate::pillow::{apply_map, Color, MapSpec, OneTileLabel, Potential};
use crate::subsystem::Subsystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketConfig {
    /// Length `K` of the sampled suffix.
    pub suffix_len: u32,
    /// Extra subdivision depth used to sample the suffix sums.
    pub sampling_depth: u32,
}

impl Default for BracketConfig {
    fn default() -> Self {
        Self { suffix_len: 3, sampling_depth: 4 }
    }
}

/// Per-tile data produced by a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileStats {
    /// `Sₙφ` at the tile centre.
    pub centre: f64,
    /// Certified lower bound of `inf_X Sₙφ`.
    pub lower: f64,
    /// Certified upper bound of `sup_X Sₙφ`.
    pub upper: f64,
    /// `S_{n-K}φ` at the centre, `K = min(n, suffix_len)`.
    pub head: f64,
    /// Dense index of the level-`K` suffix tile.
    pub suffix: usize,
}

#[derive(Debug, Clone)]
struct SuffixTable {
    sup: Vec<f64>,
    inf: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    s: f64,
    s_suffix: f64,
    suffix: usize,
}

/// Precomputed data for certified Birkhoff scans of one potential.
#[derive(Debug, Clone)]
pub struct BirkhoffScan<'a> {
    spec: MapSpec,
    sub: &'a Subsystem,
    pot: &'a Potential,
    holder: f64,
    cfg: BracketConfig,
    /// `r_k^κ` for `k = 0, 1, …`, with `r_k = (√2/2)·m^{-k}`.
    radius_pow: Vec<f64>,
    sides: Vec<u64>,
    tables: Vec<SuffixTable>,
}

impl<'a> BirkhoffScan<'a> {
    pub fn new(spec: MapSpec, sub: &'a Subsystem, pot: &'a Potential, cfg: BracketConfig) -> Result<Self> {
        let depth = (cfg.suffix_len + cfg.sampling_depth + 32) as usize;
        let kappa = pot.kappa();
        let radius_pow = (0..depth)
            .map(|k| (std::f64::consts::FRAC_1_SQRT_2 * (spec.m() as f64).powi(-(k as i32))).powf(kappa))
            .collect();
        let mut sides = Vec::new();
        for k in 0..=(cfg.suffix_len + cfg.sampling_depth) {
            sides.push(spec.side_count(k)?);
        }
        let mut scan = Self {
            spec,
            sub,
            pot,
            holder: pot.holder_seminorm(),
            cfg,
            radius_pow,
            sides,
            tables: Vec::new(),
        };
        scan.tables = (1..=cfg.suffix_len).map(|k| scan.build_table(k)).collect();
        Ok(scan)
    }

    pub fn config(&self) -> BracketConfig {
        self.cfg
    }

    fn radius(&self, k: u32) -> f64 {
        self.radius_pow.get(k as usize).copied().unwrap_or(0.0)
    }

    fn side(&self, level: u32) -> u64 {
        self.sides.get(level as usize).copied().unwrap_or_else(|| self.spec.m().pow(level))
    }

    /// `|φ|_κ · Σ_{j=from}^{to} r_j^κ`.
    fn radius_sum(&self, from: u32, to: u32) -> f64 {
        if from > to || self.holder == 0.0 {
            return 0.0;
        }
        let s: f64 = (from..=to).map(|j| self.radius(j)).sum();
        self.holder * s
    }

    /// Oscillation bound `|Sₙφ(y) - Sₙφ(x_X)| ⩽ ωₙ` for `y` in an `n`-tile.
    /// The sequence `ωₙ` is subadditive.
    pub fn simple_oscillation(&self, n: u32) -> f64 {
        self.radius_sum(1, n)
    }

    /// `S_kφ` at a point, by forward iteration.
    pub fn forward_sum(&self, p: &crate::Point, k: u32) -> f64 {
        let mut q = p.clone();
        let mut s = 0.0;
        for _ in 0..k {
            s += self.pot.eval(&q);
            q = apply_map(self.spec, &q);
        }
        s
    }

    fn build_table(&self, k: u32) -> SuffixTable {
        let side = self.side(k);
        let fine = self.side(self.cfg.sampling_depth);
        let remainder = self.radius_sum(k + self.cfg.sampling_depth - (k - 1), k + self.cfg.sampling_depth);
        let mut boxes = Vec::new();
        walk_tiles(self.spec, self.sub, k, |_| (), |_, _, _| (), |b, _| boxes.push(*b));
        let extremes: Vec<(usize, f64, f64)> = boxes
            .par_iter()
            .map(|b| {
                let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
                for q in 0..fine {
                    for p in 0..fine {
                        let u = (p as f64 + 0.5) / fine as f64;
                        let v = (q as f64 + 0.5) / fine as f64;
                        let s = self.forward_sum(&b.local_point(side, u, v), k);
                        hi = hi.max(s);
                        lo = lo.min(s);
                    }
                }
                (b.dense_index(side), hi + remainder, lo - remainder)
            })
            .collect();
        let total = 2 * (side * side) as usize;
        let mut t = SuffixTable { sup: vec![f64::NAN; total], inf: vec![f64::NAN; total] };
        for (i, hi, lo) in extremes {
            t.sup[i] = hi;
            t.inf[i] = lo;
        }
        t
    }

    fn root(&self) -> impl Fn(Color) -> Node + Sync {
        |_| Node { s: 0.0, s_suffix: 0.0, suffix: 0 }
    }

    fn stepper(&self, n: u32) -> impl Fn(&Node, &TileBox, OneTileLabel) -> Node + Sync + '_ {
        let k_eff = n.min(self.cfg.suffix_len);
        move |parent: &Node, child: &TileBox, _t| {
            let side = self.side_of(child.level);
            let s = parent.s + self.pot.eval(&child.center(side));
            if child.level == k_eff {
                Node { s, s_suffix: s, suffix: child.dense_index(side) }
            } else {
                Node { s, ..*parent }
            }
        }
    }

    fn side_of(&self, level: u32) -> u64 {
        self.side(level)
    }

    fn stats(&self, n: u32, node: &Node) -> TileStats {
        let k_eff = n.min(self.cfg.suffix_len);
        let head = node.s - node.s_suffix;
        let t = &self.tables[(k_eff - 1) as usize];
        let po = self.radius_sum(k_eff + 1, n);
        let osc = self.simple_oscillation(n);
        let upper = (head + po + t.sup[node.suffix]).min(node.s + osc);
        let lower = (head - po + t.inf[node.suffix]).max(node.s - osc);
        TileStats { centre: node.s, lower, upper, head, suffix: node.suffix }
    }

    /// Visits every level-`n` tile (`n ⩾ 1`) with its statistics.
    pub fn walk(&self, n: u32, mut leaf: impl FnMut(&TileBox, &TileStats)) {
        assert!(n >= 1, "scan level must be positive");
        walk_tiles(self.spec, self.sub, n, self.root(), self.stepper(n), |b, node| {
            leaf(b, &self.stats(n, node))
        });
    }

    /// Parallel fold over all level-`n` tiles, one accumulator per part.
    pub fn fold<R: Send>(
        &self,
        n: u32,
        init: impl Fn() -> R + Sync,
        leaf: impl Fn(&mut R, &TileBox, &TileStats) + Sync,
    ) -> Vec<R> {
        assert!(n >= 1, "scan level must be positive");
        walk_partitioned(self.spec, self.sub, n, self.root(), self.stepper(n), init, |r, b, node| {
            leaf(r, b, &self.stats(n, node))
        })
    }

    /// Certified bounds of `sup/inf S_Kφ` over a suffix tile.
    pub fn suffix_extremes(&self, k: u32, index: usize) -> (f64, f64) {
        let t = &self.tables[(k - 1) as usize];
        (t.inf[index], t.sup[index])
    }
}
