//! Discretized split Ruelle operator.
//!
//! Functions on the split sphere are pairs of bilinear interpolants on a
//! `G × G` grid per face. For a node `y` of face `c`,
//! `(𝕃u)_c(y) = Σ_{t : color t = c} exp φ(b_t y) · u_{home t}(b_t y)`,
//! where `b_t` is the inverse branch of the one-tile `t`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pillow::{reflect, Color, MapSpec, OneTileLabel, Potential};
use crate::scalar::{pairwise_sum, CompensatedSum};
use crate::subsystem::{classify, Subsystem};

/// Level up to which strong irreducibility is searched before an eigen
/// solve is refused.
pub const STRONG_SEARCH_CAP: u32 = 6;

/// A pair of grid functions `(u_b, u_w)`, indexed by [`Color::index`];
/// node `(p, q)` sits at `(p, q) / (G - 1)` and is stored at `q·G + p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFunction {
    pub g: usize,
    pub values: [Vec<f64>; 2],
}

impl SplitFunction {
    pub fn constant(g: usize, v: f64) -> Self {
        Self { g, values: [vec![v; g * g], vec![v; g * g]] }
    }

    pub fn from_fn(g: usize, f: impl Fn(Color, f64, f64) -> f64) -> Self {
        let h = 1.0 / (g - 1) as f64;
        let make = |c: Color| {
            (0..g * g).map(|k| f(c, (k % g) as f64 * h, (k / g) as f64 * h)).collect::<Vec<_>>()
        };
        Self { g, values: [make(Color::Black), make(Color::White)] }
    }

    pub fn node(&self, k: usize) -> (f64, f64) {
        let h = 1.0 / (self.g - 1) as f64;
        ((k % self.g) as f64 * h, (k / self.g) as f64 * h)
    }

    /// Bilinear interpolation on the face grid.
    pub fn eval(&self, face: Color, x: f64, y: f64) -> f64 {
        let (ix, wx) = locate(self.g, x);
        let (iy, wy) = locate(self.g, y);
        bilerp(&self.values[face.index()], self.g, ix, wx, iy, wy)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_distance(&self, other: &SplitFunction) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.values.iter_mut().flatten() {
            *v *= s;
        }
    }

    /// Sum of all node values (used for mass vectors).
    pub fn total(&self) -> f64 {
        pairwise_sum(&self.values[0]) + pairwise_sum(&self.values[1])
    }

    /// `Σ self · other` over all nodes.
    pub fn dot(&self, other: &SplitFunction) -> f64 {
        let mut s = CompensatedSum::default();
        for c in 0..2 {
            for (a, b) in self.values[c].iter().zip(&other.values[c]) {
                s.add(a * b);
            }
        }
        s.value()
    }
}

#[inline]
fn locate(g: usize, t: f64) -> (usize, f64) {
    let pos = t.clamp(0.0, 1.0) * (g - 1) as f64;
    let i = (pos.floor() as usize).min(g - 2);
    (i, pos - i as f64)
}

#[inline]
fn bilerp(v: &[f64], g: usize, ix: usize, wx: f64, iy: usize, wy: f64) -> f64 {
    let k = iy * g + ix;
    let lo = v[k] * (1.0 - wx) + v[k + 1] * wx;
    let hi = v[k + g] * (1.0 - wx) + v[k + g + 1] * wx;
    lo * (1.0 - wy) + hi * wy
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { grid: 257, tol: 1e-8, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone)]
struct Axis {
    idx: Vec<usize>,
    w: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Term {
    label: OneTileLabel,
    /// `exp φ(b_t y)` at every node `y` of the face `color t`.
    weight: Vec<f64>,
}

/// The split operator with branch points and weights precomputed.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    g: usize,
    terms: [Vec<Term>; 2],
    axes: Vec<Axis>,
}

impl SplitOperator {
    pub fn new(spec: MapSpec, sub: &Subsystem, pot: &Potential, g: usize) -> Result<Self> {
        Self::with_weight(spec, sub, g, |face, x, y| pot.eval_raw(face, x, y).exp())
    }

    /// Operator whose term weight at the branch point `(face, x, y)` is
    /// `weight(face, x, y)` instead of `exp φ`.
    pub fn with_weight(
        spec: MapSpec,
        sub: &Subsystem,
        g: usize,
        weight: impl Fn(Color, f64, f64) -> f64 + Sync,
    ) -> Result<Self> {
        if g < 2 {
            return Err(Error::Domain(format!("grid resolution must be at least 2, got {g}")));
        }
        let m = spec.m();
        let h = 1.0 / (g - 1) as f64;
        let coord = |i: u64, p: usize| (i as f64 + reflect(i, p as f64 * h)) / m as f64;
        let axes: Vec<Axis> = (0..m)
            .map(|i| {
                let (idx, w) = (0..g).map(|p| locate(g, coord(i, p))).unzip();
                Axis { idx, w }
            })
            .collect();
        let mut terms = [Vec::new(), Vec::new()];
        for t in sub.labels() {
            let weight: Vec<f64> = (0..g * g)
                .into_par_iter()
                .map(|k| {
                    let x = coord(t.i as u64, k % g);
                    let y = coord(t.j as u64, k / g);
                    weight(t.home, x, y)
                })
                .collect();
            terms[t.color().index()].push(Term { label: t, weight });
        }
        Ok(Self { g, terms, axes })
    }

    pub fn grid(&self) -> usize {
        self.g
    }

    pub fn apply(&self, u: &SplitFunction) -> SplitFunction {
        assert_eq!(u.g, self.g, "grid mismatch");
        let g = self.g;
        let mut out = SplitFunction::constant(g, 0.0);
        for c in Color::ALL {
            let terms = &self.terms[c.index()];
            out.values[c.index()].par_chunks_mut(g).enumerate().for_each(|(q, row)| {
                for term in terms {
                    let (ax, ay) = (&self.axes[term.label.i as usize], &self.axes[term.label.j as usize]);
                    let src = &u.values[term.label.home.index()];
                    let (iy, wy) = (ay.idx[q], ay.w[q]);
                    let wrow = &term.weight[q * g..(q + 1) * g];
                    for p in 0..g {
                        row[p] += wrow[p] * bilerp(src, g, ax.idx[p], ax.w[p], iy, wy);
                    }
                }
            });
        }
        out
    }

    /// Transpose action on node masses: each node mass of face `c` is pushed
    /// to the interpolation stencil of every branch point, weighted by
    /// `exp φ`.
    pub fn apply_transpose(&self, mass: &SplitFunction) -> SplitFunction {
        let g = self.g;
        let faces: Vec<Vec<f64>> = Color::ALL
            .par_iter()
            .map(|&home| {
                let mut acc = vec![0.0; g * g];
                for c in Color::ALL {
                    let src = &mass.values[c.index()];
                    for term in self.terms[c.index()].iter().filter(|t| t.label.home == home) {
                        let (ax, ay) = (&self.axes[term.label.i as usize], &self.axes[term.label.j as usize]);
                        for q in 0..g {
                            let (iy, wy) = (ay.idx[q], ay.w[q]);
                            for p in 0..g {
                                let k = q * g + p;
                                let v = src[k] * term.weight[k];
                                if v == 0.0 {
                                    continue;
                                }
                                let (ix, wx) = (ax.idx[p], ax.w[p]);
                                let base = iy * g + ix;
                                acc[base] += v * (1.0 - wx) * (1.0 - wy);
                                acc[base + 1] += v * wx * (1.0 - wy);
                                acc[base + g] += v * (1.0 - wx) * wy;
                                acc[base + g + 1] += v * wx * wy;
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut it = faces.into_iter();
        let black = it.next().unwrap_or_default();
        let white = it.next().unwrap_or_default();
        SplitFunction { g, values: [black, white] }
    }
}

/// One application of the split operator.
pub fn split_apply(spec: MapSpec, sub: &Subsystem, pot: &Potential, u: &SplitFunction) -> Result<SplitFunction> {
    Ok(SplitOperator::new(spec, sub, pot, u.g)?.apply(u))
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub log_lambda: f64,
    /// Collatz–Wielandt bounds on the discrete eigenvalue at termination.
    pub lambda_bounds: (f64, f64),
    /// Eigenfunction normalized by `Σ ũ · m̃ = 1`.
    #[serde(skip)]
    pub u_tilde: SplitFunction,
    /// Dual eigenvector as node masses, total one.
    #[serde(skip)]
    pub eigenmeasure: SplitFunction,
    /// `‖𝕃ũ/λ - ũ‖∞`.
    pub residual: f64,
    pub iterations: usize,
    pub dual_iterations: usize,
}

fn history_tail(h: &[f64]) -> Vec<f64> {
    h[h.len().saturating_sub(50)..].to_vec()
}

/// Eigenvalue, eigenfunction and eigenmeasure of the split operator by
/// normalized power iteration.
pub fn eigen_pair(spec: MapSpec, sub: &Subsystem, pot: &Potential, cfg: OperatorConfig) -> Result<EigenPair> {
    let class = classify(sub, STRONG_SEARCH_CAP)?;
    if !class.strongly_irreducible {
        return Err(Error::Precondition(format!(
            "the subsystem is not known to be strongly irreducible (no interior witnesses up to level {STRONG_SEARCH_CAP}); the eigenfunction is only guaranteed for strongly irreducible subsystems"
        )));
    }
    let op = SplitOperator::new(spec, sub, pot, cfg.grid)?;
    eigen_pair_with(&op, cfg)
}

/// Power iteration on a prepared operator.
pub fn eigen_pair_with(op: &SplitOperator, cfg: OperatorConfig) -> Result<EigenPair> {
    let g = op.grid();
    let mut u = SplitFunction::constant(g, 1.0);
    let mut history = Vec::new();
    let mut bounds = (0.0, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iter {
        let v = op.apply(&u);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (a, b) in v.values.iter().flatten().zip(u.values.iter().flatten()) {
            let r = a / b;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(Error::Degenerate(format!("operator lost positivity at iteration {it}")));
        }
        let top = v.max();
        u = v;
        u.scale(1.0 / top);
        bounds = (lo, hi);
        let gap = (hi - lo) / hi;
        history.push(gap);
        iterations = it;
        if gap <= cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            method: "power iteration".into(),
            iterations,
            history: history_tail(&history),
        });
    }
    let lambda = 0.5 * (bounds.0 + bounds.1);

    let mut mass = SplitFunction::constant(g, 1.0 / (2 * g * g) as f64);
    let mut dual_history = Vec::new();
    let mut dual_iterations = 0;
    let mut dual_converged = false;
    for it in 1..=cfg.max_iter {
        let mut next = op.apply_transpose(&mass);
        let total = next.total();
        next.scale(1.0 / total);
        let tv: f64 = 0.5
            * next
                .values
                .iter()
                .flatten()
                .zip(mass.values.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        mass = next;
        dual_history.push(tv);
        dual_iterations = it;
        if tv <= cfg.tol {
            dual_converged = true;
            break;
        }
    }
    if !dual_converged {
        return Err(Error::NonConvergence {
            method: "dual power iteration".into(),
            iterations: dual_iterations,
            history: history_tail(&dual_history),
        });
    }
    let norm = u.dot(&mass);
    u.scale(1.0 / norm);
    let mut lu = op.apply(&u);
    lu.scale(1.0 / lambda);
    let residual = lu.sup_distance(&u);
    Ok(EigenPair {
        lambda,
        log_lambda: lambda.ln(),
        lambda_bounds: bounds,
        u_tilde: u,
        eigenmeasure: mass,
        residual,
        iterations,
        dual_iterations,
    })
}

/// `Σ_X exp Sₙφ(b_X y)` over the level-`n` tiles `X` of the subsystem with
/// color `c`, for `y` in the 0-tile of color `c`. This is `(𝕃ⁿ1)_c(y)`
/// without discretization.
pub fn branch_sum(spec: MapSpec, sub: &Subsystem, pot: &Potential, c: Color, x: f64, y: f64, n: u32) -> f64 {
    let by_color = sub.labels_by_color();
    let m = spec.m() as f64;
    let mut acc = CompensatedSum::default();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        by_color: &[Vec<OneTileLabel>; 2],
        pot: &Potential,
        m: f64,
        face: Color,
        x: f64,
        y: f64,
        s: f64,
        left: u32,
        acc: &mut CompensatedSum,
    ) {
        if left == 0 {
            acc.add(s.exp());
            return;
        }
        for t in &by_color[face.index()] {
            let bx = (t.i as f64 + reflect(t.i as u64, x)) / m;
            let by = (t.j as f64 + reflect(t.j as u64, y)) / m;
            let v = pot.eval_raw(t.home, bx, by);
            rec(by_color, pot, m, t.home, bx, by, s + v, left - 1, acc);
        }
    }
    rec(&by_color, pot, m, c, x, y, 0.0, n, &mut acc);
    acc.value()
}
