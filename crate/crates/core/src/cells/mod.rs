//! Cell decompositions of the pillow: tile addresses, integer tile boxes,
//! enumeration of the tiles of a subsystem, local degrees and pairs.
//!
//! A level-`n` tile is always a square `[a, a+1] × [b, b+1] / mⁿ` on one
//! face. Its color, and the way `fⁿ` maps it onto a 0-tile, only depend on
//! `(face, a, b)` because `fⁿ` is the pillow map with factor `mⁿ`.

mod degree;
mod pairs;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pillow::{canonicalize, Color, MapSpec, OneTileLabel, PillowPoint};
use crate::subsystem::Subsystem;

pub use degree::{local_degree_matrix, LocalDegreeMatrix};
pub use pairs::{pair_partner, partner_box, EdgeLabel, PairPartner, Segment};

/// Default cap on the number of tiles an operation may materialize.
pub const DEFAULT_CAPACITY: u128 = 20_000_000;

/// A level-`n` tile as an integer box on one face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TileBox {
    pub level: u32,
    pub face: Color,
    pub a: u64,
    pub b: u64,
}

impl TileBox {
    pub fn root(face: Color) -> Self {
        Self { level: 0, face, a: 0, b: 0 }
    }

    /// The 0-tile this box is mapped onto by `fⁿ`.
    pub fn color(&self) -> Color {
        if (self.a + self.b).is_multiple_of(2) {
            self.face
        } else {
            self.face.opposite()
        }
    }

    /// The 0-tile containing the box.
    pub fn position(&self) -> Color {
        self.face
    }

    /// Orientation of `fⁿ` along each axis: `true` when the local coordinate
    /// is preserved, `false` when it is reversed.
    pub fn orientation(&self) -> (bool, bool) {
        (self.a.is_multiple_of(2), self.b.is_multiple_of(2))
    }

    /// Index in a dense array of all `2·side²` boxes of one level.
    #[inline]
    pub fn dense_index(&self, side: u64) -> usize {
        ((self.face.index() as u64 * side + self.b) * side + self.a) as usize
    }

    pub fn from_dense_index(level: u32, side: u64, k: usize) -> TileBox {
        let k = k as u64;
        let face = if k / (side * side) == 0 { Color::Black } else { Color::White };
        TileBox { level, face, a: k % side, b: (k / side) % side }
    }

    pub fn touches_equator(&self, side: u64) -> bool {
        self.a == 0 || self.b == 0 || self.a + 1 == side || self.b + 1 == side
    }

    /// The box of `t · self`, i.e. the image of `self` under the inverse
    /// branch of `t`. `side` is `m^level` for the current level. The caller
    /// guarantees `self.face == t.color()`.
    #[inline]
    pub fn prepend(&self, t: OneTileLabel, side: u64) -> TileBox {
        debug_assert_eq!(self.face, t.color());
        let fold = |k: u32, v: u64| {
            let local = if k.is_multiple_of(2) { v } else { side - 1 - v };
            k as u64 * side + local
        };
        TileBox { level: self.level + 1, face: t.home, a: fold(t.i, self.a), b: fold(t.j, self.b) }
    }

    /// Point of the box with local coordinates `(u, v) ∈ [0,1]²`.
    pub fn local_point(&self, side: u64, u: f64, v: f64) -> PillowPoint<f64> {
        let s = side as f64;
        canonicalize(self.face, (self.a as f64 + u) / s, (self.b as f64 + v) / s)
            .expect("local coordinates in the unit square")
    }

    pub fn center(&self, side: u64) -> PillowPoint<f64> {
        self.local_point(side, 0.5, 0.5)
    }

    /// Whether `other` (at a deeper or equal level) lies inside this box.
    pub fn contains(&self, spec: MapSpec, other: &TileBox) -> bool {
        if other.level < self.level || other.face != self.face {
            return false;
        }
        let Ok(scale) = spec.side_count(other.level - self.level) else {
            return false;
        };
        other.a / scale == self.a && other.b / scale == self.b
    }

    /// Address of the tile. `None` for level 0.
    pub fn address(&self, spec: MapSpec) -> Option<TileAddress> {
        if self.level == 0 {
            return None;
        }
        let m = spec.m();
        let mut word = Vec::with_capacity(self.level as usize);
        let (mut face, mut a, mut b) = (self.face, self.a, self.b);
        let mut side = m.pow(self.level - 1);
        for _ in 0..self.level {
            let (i, j) = ((a / side) as u32, (b / side) as u32);
            let t = OneTileLabel { home: face, i, j };
            let (ra, rb) = (a % side, b % side);
            a = if i % 2 == 0 { ra } else { side - 1 - ra };
            b = if j % 2 == 0 { rb } else { side - 1 - rb };
            face = t.color();
            word.push(t);
            side = (side / m).max(1);
        }
        Some(TileAddress { word })
    }

    pub fn region(&self, spec: MapSpec) -> TileRegion {
        let side = spec.side_count(self.level).expect("box level fits");
        let s = side as f64;
        TileRegion {
            face: self.face,
            x0: self.a as f64 / s,
            y0: self.b as f64 / s,
            side: 1.0 / s,
            center: self.center(side),
            diameter: std::f64::consts::SQRT_2 / s,
            touches_equator: self.touches_equator(side),
        }
    }
}

/// Geometric description of a tile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileRegion {
    pub face: Color,
    pub x0: f64,
    pub y0: f64,
    pub side: f64,
    #[serde(skip)]
    pub center: PillowPoint<f64>,
    pub diameter: f64,
    pub touches_equator: bool,
}

/// An admissible word `t₁ … tₙ` of one-tile labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileAddress {
    word: Vec<OneTileLabel>,
}

impl TileAddress {
    pub fn new(spec: MapSpec, word: Vec<OneTileLabel>) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::Domain("tile address must have at least one letter".into()));
        }
        for t in &word {
            if !t.is_valid_for(spec) {
                return Err(Error::Domain(format!("label {t} invalid for m = {}", spec.m())));
            }
        }
        for w in word.windows(2) {
            if w[1].position() != w[0].color() {
                return Err(Error::Domain(format!(
                    "inadmissible word: {} is followed by {} but must be followed by a letter positioned in the {:?} face",
                    w[0],
                    w[1],
                    w[0].color()
                )));
            }
        }
        Ok(Self { word })
    }

    pub fn word(&self) -> &[OneTileLabel] {
        &self.word
    }

    pub fn level(&self) -> u32 {
        self.word.len() as u32
    }

    pub fn color(&self) -> Color {
        self.word[self.word.len() - 1].color()
    }

    pub fn position(&self) -> Color {
        self.word[0].position()
    }

    pub fn tile_box(&self, spec: MapSpec) -> TileBox {
        let mut bx = TileBox::root(self.color());
        let mut side = 1u64;
        for &t in self.word.iter().rev() {
            bx = bx.prepend(t, side);
            side *= spec.m();
        }
        bx
    }

    /// Address of the tile obtained by applying `f` (dropping `t₁`).
    pub fn shift(&self) -> Option<TileAddress> {
        (self.word.len() > 1).then(|| TileAddress { word: self.word[1..].to_vec() })
    }

    /// The `k`-tile containing this tile, `1 ⩽ k ⩽ n`.
    pub fn truncate(&self, k: usize) -> TileAddress {
        TileAddress { word: self.word[..k.clamp(1, self.word.len())].to_vec() }
    }

    pub fn in_subsystem(&self, sub: &Subsystem) -> bool {
        self.word.iter().all(|t| sub.contains(t))
    }
}

impl fmt::Display for OneTileLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}-{}", self.home.letter(), self.i, self.j)
    }
}

impl fmt::Display for TileAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.word.iter().enumerate() {
            if k > 0 {
                f.write_str("/")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for OneTileLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("malformed tile label {s:?}"));
        let mut chars = s.chars();
        let home = match chars.next() {
            Some('b') => Color::Black,
            Some('w') => Color::White,
            _ => return Err(bad()),
        };
        let (i, j) = chars.as_str().split_once('-').ok_or_else(bad)?;
        Ok(OneTileLabel {
            home,
            i: i.parse().map_err(|_| bad())?,
            j: j.parse().map_err(|_| bad())?,
        })
    }
}

impl TileAddress {
    pub fn parse(spec: MapSpec, s: &str) -> Result<Self> {
        let word = s.split('/').map(str::parse).collect::<Result<Vec<OneTileLabel>>>()?;
        Self::new(spec, word)
    }
}

/// A tile together with its address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub address: TileAddress,
    pub tile_box: TileBox,
}

/// Exact number of level-`n` tiles of the subsystem.
pub fn tile_count(sub: &Subsystem, n: u32) -> u128 {
    let p = sub.tile_matrix().power_u128(n);
    p.iter().flatten().sum()
}

fn check_capacity(sub: &Subsystem, n: u32, cap: u128) -> Result<()> {
    let count = tile_count(sub, n);
    if count > cap {
        return Err(Error::Capacity { what: format!("tiles at level {n}"), required: count, cap });
    }
    Ok(())
}

/// Visits every level-`n` tile of the subsystem depth first. Tiles are built
/// by prepending letters to the two 0-tiles, so the state of a tile is
/// derived from the state of its image under `f`.
pub fn walk_tiles<S>(
    spec: MapSpec,
    sub: &Subsystem,
    n: u32,
    root: impl Fn(Color) -> S,
    step: impl Fn(&S, &TileBox, OneTileLabel) -> S,
    mut leaf: impl FnMut(&TileBox, &S),
) {
    let by_color = sub.labels_by_color();
    for c in Color::ALL {
        let s = root(c);
        walk_rec(spec, &by_color, n, &TileBox::root(c), 1, &s, &step, &mut leaf);
    }
}

#[allow(clippy::too_many_arguments)]
fn walk_rec<S>(
    spec: MapSpec,
    by_color: &[Vec<OneTileLabel>; 2],
    n: u32,
    bx: &TileBox,
    side: u64,
    state: &S,
    step: &impl Fn(&S, &TileBox, OneTileLabel) -> S,
    leaf: &mut impl FnMut(&TileBox, &S),
) {
    if bx.level == n {
        leaf(bx, state);
        return;
    }
    for &t in &by_color[bx.face.index()] {
        let child = bx.prepend(t, side);
        let s = step(state, &child, t);
        walk_rec(spec, by_color, n, &child, side * spec.m(), &s, step, leaf);
    }
}

/// Parallel variant of [`walk_tiles`]: the tree is split on the last letter
/// of the word, each part folds into its own accumulator, and the
/// accumulators are returned in a fixed order.
pub fn walk_partitioned<S, R>(
    spec: MapSpec,
    sub: &Subsystem,
    n: u32,
    root: impl Fn(Color) -> S + Sync,
    step: impl Fn(&S, &TileBox, OneTileLabel) -> S + Sync,
    init: impl Fn() -> R + Sync,
    leaf: impl Fn(&mut R, &TileBox, &S) + Sync,
) -> Vec<R>
where
    S: Send + Sync,
    R: Send,
{
    let by_color = sub.labels_by_color();
    if n == 0 {
        return Color::ALL
            .iter()
            .map(|&c| {
                let mut r = init();
                leaf(&mut r, &TileBox::root(c), &root(c));
                r
            })
            .collect();
    }
    let parts: Vec<(Color, OneTileLabel)> = Color::ALL
        .iter()
        .flat_map(|&c| by_color[c.index()].iter().map(move |&t| (c, t)))
        .collect();
    parts
        .par_iter()
        .map(|&(c, t)| {
            let r0 = root(c);
            let bx = TileBox::root(c).prepend(t, 1);
            let s = step(&r0, &bx, t);
            let mut acc = init();
            let mut visit = |b: &TileBox, st: &S| leaf(&mut acc, b, st);
            walk_rec(spec, &by_color, n, &bx, spec.m(), &s, &step, &mut visit);
            acc
        })
        .collect()
}

/// All level-`n` tiles of the subsystem in lexicographic word order.
pub fn enumerate_tiles(spec: MapSpec, sub: &Subsystem, n: u32, cap: u128) -> Result<Vec<Tile>> {
    if n == 0 {
        return Err(Error::Domain("enumeration level must be at least 1".into()));
    }
    check_capacity(sub, n, cap)?;
    let mut boxes = Vec::with_capacity(tile_count(sub, n) as usize);
    walk_tiles(spec, sub, n, |_| (), |_, _, _| (), |b, _| boxes.push(*b));
    let mut tiles: Vec<Tile> = boxes
        .into_iter()
        .map(|b| Tile { address: b.address(spec).expect("level >= 1"), tile_box: b })
        .collect();
    tiles.sort_by(|x, y| x.address.cmp(&y.address));
    Ok(tiles)
}

/// Box of the tile with the given address, checked for admissibility.
pub fn tile_region(spec: MapSpec, addr: &TileAddress) -> TileRegion {
    addr.tile_box(spec).region(spec)
}

/// Counts of level-`n` tiles by `[position][color]`, indexed by
/// [`Color::index`].
pub fn count_by_class(spec: MapSpec, sub: &Subsystem, n: u32) -> [[u128; 2]; 2] {
    let parts = walk_partitioned(
        spec,
        sub,
        n,
        |_| (),
        |_, _, _| (),
        || [[0u128; 2]; 2],
        |acc, b, _| acc[b.position().index()][b.color().index()] += 1,
    );
    let mut out = [[0u128; 2]; 2];
    for p in parts {
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += p[r][c];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec3() -> MapSpec {
        MapSpec::new(3).unwrap()
    }

    fn label(h: Color, i: u32, j: u32) -> OneTileLabel {
        OneTileLabel { home: h, i, j }
    }

    #[test]
    fn counts_match_examples() {
        let s = spec3();
        let full = Subsystem::full(s);
        let carpet = Subsystem::carpet(s).unwrap();
        assert_eq!(enumerate_tiles(s, &full, 2, DEFAULT_CAPACITY).unwrap().len(), 162);
        assert_eq!(enumerate_tiles(s, &carpet, 1, DEFAULT_CAPACITY).unwrap().len(), 16);
        assert_eq!(enumerate_tiles(s, &carpet, 3, DEFAULT_CAPACITY).unwrap().len(), 1024);
    }

    #[test]
    fn enumeration_is_sorted_and_admissible() {
        let s = spec3();
        let tiles = enumerate_tiles(s, &Subsystem::carpet(s).unwrap(), 2, DEFAULT_CAPACITY).unwrap();
        for w in tiles.windows(2) {
            assert!(w[0].address < w[1].address);
        }
        for t in &tiles {
            assert!(TileAddress::new(s, t.address.word().to_vec()).is_ok());
            assert_eq!(t.address.tile_box(s), t.tile_box);
        }
    }

    #[test]
    fn capacity_error_reports_count() {
        let s = spec3();
        let err = enumerate_tiles(s, &Subsystem::full(s), 5, 1000).unwrap_err();
        assert_eq!(err, Error::Capacity { what: "tiles at level 5".into(), required: 2 * 9u128.pow(5), cap: 1000 });
    }

    #[test]
    fn region_examples() {
        let s = spec3();
        let r = tile_region(s, &TileAddress::new(s, vec![label(Color::White, 0, 0)]).unwrap());
        assert_eq!((r.x0, r.y0, r.touches_equator), (0.0, 0.0, true));
        assert!((r.side - 1.0 / 3.0).abs() < 1e-15);
        let r = tile_region(s, &TileAddress::new(s, vec![label(Color::White, 1, 1)]).unwrap());
        assert!((r.x0 - 1.0 / 3.0).abs() < 1e-15 && !r.touches_equator);
        let b = TileBox { level: 4, face: Color::Black, a: 40, b: 40 };
        assert!((b.region(s).diameter - 0.017459).abs() < 1e-6);
    }

    #[test]
    fn inadmissible_word_rejected() {
        let s = spec3();
        // (white,1,0) has color black, so the next letter must sit on the black face.
        assert!(TileAddress::new(s, vec![label(Color::White, 1, 0), label(Color::White, 0, 0)]).is_err());
        assert!(TileAddress::new(s, vec![label(Color::White, 1, 0), label(Color::Black, 0, 0)]).is_ok());
        assert!(TileAddress::new(s, vec![]).is_err());
    }

    #[test]
    fn address_display_round_trip() {
        let s = spec3();
        let a = TileAddress::new(s, vec![label(Color::White, 1, 0), label(Color::Black, 2, 1)]).unwrap();
        assert_eq!(a.to_string(), "w1-0/b2-1");
        assert_eq!(TileAddress::parse(s, "w1-0/b2-1").unwrap(), a);
        assert!(TileAddress::parse(s, "x1-0").is_err());
    }

    #[test]
    fn box_address_round_trip() {
        let s = MapSpec::new(2).unwrap();
        let full = Subsystem::full(s);
        walk_tiles(s, &full, 4, |_| (), |_, _, _| (), |b, _| {
            let addr = b.address(s).unwrap();
            assert_eq!(addr.tile_box(s), *b);
            assert_eq!(addr.color(), b.color());
            assert_eq!(addr.position(), b.position());
        });
    }

    #[test]
    fn partitioned_walk_counts_agree() {
        let s = spec3();
        let carpet = Subsystem::carpet(s).unwrap();
        let c = count_by_class(s, &carpet, 3);
        assert_eq!(c, [[256, 256], [256, 256]]);
    }
}
