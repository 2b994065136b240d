//! Checkerboard pillow maps.
//!
//! The sphere is two unit squares (a black and a white face) glued along
//! their boundary by the identity on coordinates. The boundary square is
//! the invariant Jordan curve and its four corners are the postcritical
//! set. For a subdivision factor `m`, each face is cut into an `m × m`
//! grid of cells; the cell `(i, j)` on face `F` is mapped onto a whole face
//! by an affine similarity with factor `m`, composed with the reflections
//! that make neighbouring cells fold onto each other. The cell keeps the
//! face's color when `i + j` is even and takes the opposite color otherwise.

mod metric;
mod potential;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Coord;

pub use metric::{measure_distortion_c0, measure_pillow_diameter, path_distance, DIAMETER_UPPER, PILLOW_DIAMETER};
pub use potential::{BasisFunction, Potential, BASIS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::Black, Color::White];

    pub fn opposite(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    /// `+1` on the white face, `-1` on the black one.
    pub fn sign(self) -> f64 {
        match self {
            Color::Black => -1.0,
            Color::White => 1.0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Color::Black => 'b',
            Color::White => 'w',
        }
    }
}

/// A member of the pillow family, identified by its subdivision factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapSpec {
    m: u64,
}

impl MapSpec {
    pub fn new(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("subdivision factor must be >= 2, got {m}")));
        }
        if m > u32::MAX as u64 {
            return Err(Error::Capacity {
                what: "subdivision factor".into(),
                required: m as u128,
                cap: u32::MAX as u128,
            });
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Topological degree, `m²`.
    pub fn degree(&self) -> u64 {
        self.m * self.m
    }

    /// Expansion factor of the path metric.
    pub fn expansion(&self) -> f64 {
        self.m as f64
    }

    /// `m^n`, the number of level-`n` tiles along one side of a face.
    pub fn side_count(&self, n: u32) -> Result<u64> {
        self.m.checked_pow(n).ok_or_else(|| Error::Capacity {
            what: format!("grid side m^{n}"),
            required: (self.m as u128).saturating_pow(n),
            cap: u64::MAX as u128,
        })
    }

    /// All `2m²` one-tile labels in lexicographic `(home, i, j)` order.
    pub fn labels(&self) -> Vec<OneTileLabel> {
        let m = self.m as u32;
        let mut out = Vec::with_capacity(2 * (m * m) as usize);
        for home in Color::ALL {
            for i in 0..m {
                for j in 0..m {
                    out.push(OneTileLabel { home, i, j });
                }
            }
        }
        out
    }
}

/// The pillow map of factor `m^k`, which is the `k`-th iterate of the map of
/// factor `m`.
pub fn iterate_spec(spec: MapSpec, k: u32) -> Result<MapSpec> {
    if k == 0 {
        return Err(Error::Domain("iterate count must be positive".into()));
    }
    let m = spec.m.checked_pow(k).ok_or_else(|| Error::Capacity {
        what: format!("iterate m^{k}"),
        required: (spec.m as u128).saturating_pow(k),
        cap: u32::MAX as u128,
    })?;
    MapSpec::new(m)
}

/// Reflection applied on the `k`-th row/column: identity for even `k`,
/// `t ↦ 1 - t` for odd `k`.
pub fn reflect<T: Coord>(k: u64, t: T) -> T {
    if k.is_multiple_of(2) {
        t
    } else {
        T::one() - t
    }
}

/// A point of the pillow in canonical form: coordinates in `[0,1]²`, and
/// face `White` whenever the point lies on the equator.
#[derive(Debug, Clone, PartialEq)]
pub struct PillowPoint<T> {
    pub face: Color,
    pub x: T,
    pub y: T,
}

impl<T: Coord> PillowPoint<T> {
    pub fn new(face: Color, x: T, y: T) -> Result<Self> {
        canonicalize(face, x, y)
    }

    pub fn on_equator(&self) -> bool {
        is_edge_value(&self.x) || is_edge_value(&self.y)
    }

    /// Whether the point lies in the closed 0-tile of the given color.
    pub fn in_face(&self, c: Color) -> bool {
        self.face == c || self.on_equator()
    }
}

fn is_edge_value<T: Coord>(v: &T) -> bool {
    v.is_zero() || v.is_one()
}

fn clamp_unit<T: Coord>(v: T) -> Option<T> {
    let tol = T::domain_tolerance();
    let snap = T::snap_tolerance();
    let zero = T::zero();
    let one = T::one();
    if v < zero.clone() - tol.clone() || v > one.clone() + tol {
        return None;
    }
    if v <= snap.clone() {
        Some(zero)
    } else if v >= one.clone() - snap {
        Some(one)
    } else {
        Some(v)
    }
}

/// Canonical representative of a raw `(face, x, y)`.
pub fn canonicalize<T: Coord>(face: Color, x: T, y: T) -> Result<PillowPoint<T>> {
    let (cx, cy) = match (clamp_unit(x.clone()), clamp_unit(y.clone())) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Domain(format!(
                "coordinates ({:?}, {:?}) outside the unit square",
                x, y
            )))
        }
    };
    let face = if is_edge_value(&cx) || is_edge_value(&cy) {
        Color::White
    } else {
        face
    };
    Ok(PillowPoint { face, x: cx, y: cy })
}

/// One-tile label: cell `(i, j)` of the face `home`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OneTileLabel {
    pub home: Color,
    pub i: u32,
    pub j: u32,
}

impl OneTileLabel {
    pub fn new(spec: MapSpec, home: Color, i: u32, j: u32) -> Result<Self> {
        if i as u64 >= spec.m() || j as u64 >= spec.m() {
            return Err(Error::Domain(format!(
                "cell ({i}, {j}) out of range for m = {}",
                spec.m()
            )));
        }
        Ok(Self { home, i, j })
    }

    /// The 0-tile this cell is mapped onto.
    pub fn color(&self) -> Color {
        if (self.i + self.j).is_multiple_of(2) {
            self.home
        } else {
            self.home.opposite()
        }
    }

    /// The 0-tile containing this cell.
    pub fn position(&self) -> Color {
        self.home
    }

    pub fn is_valid_for(&self, spec: MapSpec) -> bool {
        (self.i as u64) < spec.m() && (self.j as u64) < spec.m()
    }
}

fn cell_index<T: Coord>(m: u64, v: &T) -> (u64, T) {
    let mt = T::from_i64(m as i64);
    let scaled = mt * v.clone();
    let k = scaled.floor_i64().clamp(0, m as i64 - 1);
    let local = scaled - T::from_i64(k);
    (k as u64, local)
}

/// The pillow map `f`.
pub fn apply_map<T: Coord>(spec: MapSpec, p: &PillowPoint<T>) -> PillowPoint<T> {
    let m = spec.m();
    let (i, u) = cell_index(m, &p.x);
    let (j, v) = cell_index(m, &p.y);
    let face = if (i + j) % 2 == 0 { p.face } else { p.face.opposite() };
    let x = reflect(i, u);
    let y = reflect(j, v);
    // m·x - floor(m·x) is in [0, 1) up to rounding, so this cannot fail.
    canonicalize(face, x.clone(), y.clone()).unwrap_or(PillowPoint { face, x, y })
}

/// Inverse of `f` restricted to the one-tile `t`, defined on the closed
/// 0-tile of color `t.color()`.
pub fn inverse_branch<T: Coord>(
    spec: MapSpec,
    t: OneTileLabel,
    p: &PillowPoint<T>,
) -> Result<PillowPoint<T>> {
    if !t.is_valid_for(spec) {
        return Err(Error::Domain(format!("label {t:?} invalid for m = {}", spec.m())));
    }
    if !p.in_face(t.color()) {
        return Err(Error::Precondition(format!(
            "point on the {:?} face is not in the domain of branch {t:?} (color {:?})",
            p.face,
            t.color()
        )));
    }
    Ok(branch_unchecked(spec, t, p))
}

pub(crate) fn branch_unchecked<T: Coord>(
    spec: MapSpec,
    t: OneTileLabel,
    p: &PillowPoint<T>,
) -> PillowPoint<T> {
    let mt = T::from_i64(spec.m() as i64);
    let x = (T::from_i64(t.i as i64) + reflect(t.i as u64, p.x.clone())) / mt.clone();
    let y = (T::from_i64(t.j as i64) + reflect(t.j as u64, p.y.clone())) / mt;
    canonicalize(t.home, x.clone(), y.clone()).unwrap_or(PillowPoint { face: t.home, x, y })
}
