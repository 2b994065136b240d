//! Subsystems, tile matrices, entropy and the irreducibility hierarchy.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::cells::{tile_count, walk_tiles, TileBox, TileRegion, DEFAULT_CAPACITY};
use crate::error::{Error, Result};
use crate::pillow::{Color, MapSpec, OneTileLabel};

/// A subsystem `F = f|_{dom F}` given by the one-tiles whose union is
/// `dom F`. Membership is stored as a dense mask over all `2m²` labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    spec: MapSpec,
    mask: Vec<bool>,
    len: usize,
}

impl Subsystem {
    fn slot(spec: MapSpec, t: &OneTileLabel) -> usize {
        let m = spec.m() as usize;
        t.home.index() * m * m + t.i as usize * m + t.j as usize
    }

    fn empty(spec: MapSpec) -> Result<Self> {
        let total = 2u128 * spec.degree() as u128;
        if total > DEFAULT_CAPACITY {
            return Err(Error::Capacity { what: "one-tile labels".into(), required: total, cap: DEFAULT_CAPACITY });
        }
        Ok(Self { spec, mask: vec![false; total as usize], len: 0 })
    }

    pub fn new(spec: MapSpec, labels: impl IntoIterator<Item = OneTileLabel>) -> Result<Self> {
        let mut s = Self::empty(spec)?;
        for t in labels {
            s.insert(t)?;
        }
        if s.len == 0 {
            return Err(Error::Domain("subsystem must contain at least one tile".into()));
        }
        Ok(s)
    }

    fn insert(&mut self, t: OneTileLabel) -> Result<()> {
        if !t.is_valid_for(self.spec) {
            return Err(Error::Domain(format!("label {t} invalid for m = {}", self.spec.m())));
        }
        let k = Self::slot(self.spec, &t);
        if !self.mask[k] {
            self.mask[k] = true;
            self.len += 1;
        }
        Ok(())
    }

    /// The whole map.
    pub fn full(spec: MapSpec) -> Self {
        Self::new(spec, spec.labels()).expect("full label set is valid")
    }

    /// Removes the middle cell of both faces (odd `m` only). For `m = 3` the
    /// maximal invariant set is a Sierpiński carpet on each face.
    pub fn carpet(spec: MapSpec) -> Result<Self> {
        let m = spec.m();
        if m.is_multiple_of(2) {
            return Err(Error::Domain(format!("carpet needs an odd subdivision factor, got {m}")));
        }
        let c = (m / 2) as u32;
        Self::new(spec, spec.labels().into_iter().filter(|t| !(t.i == c && t.j == c)))
    }

    /// Builds a subsystem from a set of tile boxes at some level, read as
    /// one-tiles of the iterate `f^level`.
    pub fn from_boxes(spec: MapSpec, level: u32, boxes: impl IntoIterator<Item = TileBox>) -> Result<Self> {
        let it = crate::pillow::iterate_spec(spec, level)?;
        Self::new(
            it,
            boxes.into_iter().map(|b| OneTileLabel { home: b.face, i: b.a as u32, j: b.b as u32 }),
        )
    }

    pub fn spec(&self) -> MapSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, t: &OneTileLabel) -> bool {
        t.is_valid_for(self.spec) && self.mask[Self::slot(self.spec, t)]
    }

    /// Labels in lexicographic `(home, i, j)` order.
    pub fn labels(&self) -> impl Iterator<Item = OneTileLabel> + '_ {
        let m = self.spec.m() as usize;
        self.mask.iter().enumerate().filter(|(_, &on)| on).map(move |(k, _)| OneTileLabel {
            home: if k / (m * m) == 0 { Color::Black } else { Color::White },
            i: ((k / m) % m) as u32,
            j: (k % m) as u32,
        })
    }

    /// Labels grouped by their color, indexed by [`Color::index`].
    pub fn labels_by_color(&self) -> [Vec<OneTileLabel>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for t in self.labels() {
            out[t.color().index()].push(t);
        }
        out
    }

    pub fn tile_matrix(&self) -> TileMatrix {
        let mut counts = [[0u64; 2]; 2];
        for t in self.labels() {
            counts[t.position().index()][t.color().index()] += 1;
        }
        TileMatrix::from_counts(counts)
    }
}

fn w_first(c: Color) -> usize {
    match c {
        Color::White => 0,
        Color::Black => 1,
    }
}

/// The 2×2 tile matrix. Rows are indexed by position and columns by color,
/// both in the order (white, black):
/// `A = [[N_ww, N_bw], [N_wb, N_bb]]` where `N_{c,c'}` counts one-tiles of
/// color `c` and position `c'`. With this layout `Aⁿ` counts the `n`-tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileMatrix {
    pub a: [[u64; 2]; 2],
}

impl TileMatrix {
    /// From counts indexed `[position][color]` by [`Color::index`].
    fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        let mut a = [[0u64; 2]; 2];
        for p in Color::ALL {
            for c in Color::ALL {
                a[w_first(p)][w_first(c)] = counts[p.index()][c.index()];
            }
        }
        Self { a }
    }

    pub fn count(&self, color: Color, position: Color) -> u64 {
        self.a[w_first(position)][w_first(color)]
    }

    /// `Aⁿ` in the same layout.
    pub fn power_u128(&self, n: u32) -> [[u128; 2]; 2] {
        let base = self.a.map(|r| r.map(|v| v as u128));
        let mut out = [[1u128, 0], [0, 1]];
        for _ in 0..n {
            let mut next = [[0u128; 2]; 2];
            for (r, row) in next.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = (0..2).map(|k| out[r][k].saturating_mul(base[k][c])).fold(0u128, u128::saturating_add);
                }
            }
            out = next;
        }
        out
    }

    /// `(Aⁿ)` entry for tiles of the given color and position.
    pub fn power_count(&self, n: u32, color: Color, position: Color) -> u128 {
        self.power_u128(n)[w_first(position)][w_first(color)]
    }

    pub fn spectral_radius(&self) -> f64 {
        let [[a, b], [c, d]] = self.a.map(|r| r.map(|v| v as f64));
        // (a-d)² + 4bc avoids cancellation in tr² - 4 det
        let disc = (a - d) * (a - d) + 4.0 * b * c;
        0.5 * (a + d + disc.sqrt())
    }

    pub fn is_irreducible(&self) -> bool {
        self.a[0][1] > 0 && self.a[1][0] > 0
    }

    pub fn is_primitive(&self) -> bool {
        self.is_irreducible() && (self.a[0][0] > 0 || self.a[1][1] > 0)
    }

    /// Largest over `(c, c')` of the first `n` with `(Aⁿ)_{c'c} > 0`.
    pub fn irreducibility_level(&self) -> Option<u32> {
        if !self.is_irreducible() {
            return None;
        }
        let p1 = self.power_u128(1);
        let all = p1.iter().flatten().all(|&v| v > 0);
        Some(if all { 1 } else { 2 })
    }
}

/// Topological entropy `log ρ(A)`; `-∞` for a nilpotent matrix.
pub fn entropy(a: &TileMatrix) -> f64 {
    let rho = a.spectral_radius();
    if rho == 0.0 {
        f64::NEG_INFINITY
    } else {
        rho.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifyResult {
    pub irreducible: bool,
    pub primitive: bool,
    pub strongly_irreducible: bool,
    pub strongly_primitive: bool,
    /// Irreducibility level from the tile matrix (largest over color pairs).
    pub n_f_irreducible: Option<u32>,
    /// Largest over color pairs of the first level with an interior witness.
    pub n_f_strongly_irreducible: Option<u32>,
    /// First level from which every color pair has an interior witness.
    pub n_f_strongly_primitive: Option<u32>,
    pub search_cap: u32,
}

impl ClassifyResult {
    /// The level reported as `n_F`: the strong primitivity threshold when
    /// known, otherwise the strong irreducibility level.
    pub fn n_f(&self) -> Option<u32> {
        self.n_f_strongly_primitive.or(self.n_f_strongly_irreducible)
    }
}

/// Interior witnesses at one level: `[position][color]` flags for tiles of
/// the subsystem contained in the interior of the 0-tile of that position.
fn interior_witnesses(sub: &Subsystem, n: u32) -> Result<[[bool; 2]; 2]> {
    let spec = sub.spec();
    let side = spec.side_count(n)?;
    let mut w = [[false; 2]; 2];
    if n == 1 {
        for t in sub.labels() {
            let bx = TileBox { level: 1, face: t.home, a: t.i as u64, b: t.j as u64 };
            if !bx.touches_equator(side) {
                w[bx.position().index()][bx.color().index()] = true;
            }
        }
        return Ok(w);
    }
    let count = tile_count(sub, n);
    if count > DEFAULT_CAPACITY {
        return Err(Error::Capacity { what: format!("tiles at level {n}"), required: count, cap: DEFAULT_CAPACITY });
    }
    walk_tiles(spec, sub, n, |_| (), |_, _, _| (), |b, _| {
        if !b.touches_equator(side) {
            w[b.position().index()][b.color().index()] = true;
        }
    });
    Ok(w)
}

/// Classifies the subsystem. Weak properties come from the tile matrix;
/// strong ones from a search for interior tiles up to level `n_cap`, and are
/// reported as `false` when no witness is found below the cap.
pub fn classify(sub: &Subsystem, n_cap: u32) -> Result<ClassifyResult> {
    if n_cap == 0 {
        return Err(Error::Domain("classification cap must be at least 1".into()));
    }
    let a = sub.tile_matrix();
    let irreducible = a.is_irreducible();
    let primitive = a.is_primitive();
    let mut first = [[None::<u32>; 2]; 2];
    let mut full_from = None;
    for n in 1..=n_cap {
        let w = match interior_witnesses(sub, n) {
            Ok(w) => w,
            Err(Error::Capacity { .. }) => break,
            Err(e) => return Err(e),
        };
        for p in 0..2 {
            for c in 0..2 {
                if w[p][c] && first[p][c].is_none() {
                    first[p][c] = Some(n);
                }
            }
        }
        if w.iter().flatten().all(|&x| x) {
            full_from = Some(n);
            break;
        }
    }
    let strongly_irreducible = irreducible && first.iter().flatten().all(Option::is_some);
    let n_si = if strongly_irreducible { first.iter().flatten().filter_map(|x| *x).max() } else { None };
    // An interior witness of color c in face c' extends to witnesses of every
    // color reachable from c by appending letters, so once all four pairs
    // are witnessed they stay witnessed at every later level.
    let strongly_primitive = irreducible && full_from.is_some();
    Ok(ClassifyResult {
        irreducible,
        primitive,
        strongly_irreducible,
        strongly_primitive,
        n_f_irreducible: a.irreducibility_level(),
        n_f_strongly_irreducible: n_si,
        n_f_strongly_primitive: if strongly_primitive { full_from } else { None },
        search_cap: n_cap,
    })
}

/// Outer approximation of the maximal invariant set at level `n`.
#[derive(Debug, Clone)]
pub struct LimitSetSample {
    pub level: u32,
    pub regions: Vec<TileRegion>,
    /// Total area of the tiles; each face has area one.
    pub area: Rational64,
}

pub fn limit_set_sample(spec: MapSpec, sub: &Subsystem, n: u32, cap: u128) -> Result<LimitSetSample> {
    let count = tile_count(sub, n);
    if count > cap {
        return Err(Error::Capacity { what: format!("tiles at level {n}"), required: count, cap });
    }
    let mut regions = Vec::with_capacity(count as usize);
    walk_tiles(spec, sub, n, |_| (), |_, _, _| (), |b, _| regions.push(b.region(spec)));
    let side = spec.side_count(n)? as i64;
    let area = Rational64::new(count as i64, side * side);
    Ok(LimitSetSample { level: n, regions, area })
}
