use std::ops::Mul;

use serde::Serialize;

use super::TileBox;
use crate::error::Result;
use crate::pillow::{Color, MapSpec, PillowPoint};
use crate::scalar::Coord;
use crate::subsystem::Subsystem;

/// Local degree matrix at a point: `entries[position][color]` counts the
/// level-`n` tiles of the subsystem that contain the point, indexed by
/// [`Color::index`] (black first). With this layout the matrices compose as
/// `Deg^{n+k}(x) = Degⁿ(x) · Deg^k(fⁿ x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LocalDegreeMatrix {
    pub entries: [[u64; 2]; 2],
}

impl LocalDegreeMatrix {
    pub fn get(&self, color: Color, position: Color) -> u64 {
        self.entries[position.index()][color.index()]
    }

    /// Number of tiles containing the point.
    pub fn total(&self) -> u64 {
        self.entries.iter().flatten().sum()
    }

    /// Tiles of a given color containing the point.
    pub fn degree_of_color(&self, color: Color) -> u64 {
        self.entries[0][color.index()] + self.entries[1][color.index()]
    }
}

impl Mul for LocalDegreeMatrix {
    type Output = LocalDegreeMatrix;

    fn mul(self, rhs: LocalDegreeMatrix) -> LocalDegreeMatrix {
        let mut out = [[0u64; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (0..2).map(|k| self.entries[r][k] * rhs.entries[k][c]).sum();
            }
        }
        LocalDegreeMatrix { entries: out }
    }
}

/// Grid indices `k` at scale `side` whose closed cell `[k, k+1]/side`
/// contains `v`.
fn incident_indices<T: Coord>(v: &T, side: u64) -> Vec<u64> {
    let scaled = T::from_i64(side as i64) * v.clone();
    let k = scaled.floor_i64();
    let exact = T::from_i64(k) == scaled;
    let mut out = Vec::with_capacity(2);
    if exact && k >= 1 && (k as u64) <= side {
        out.push(k as u64 - 1);
    }
    if k >= 0 && (k as u64) < side {
        out.push(k as u64);
    }
    out
}

/// Counts the closed level-`n` tiles of the subsystem containing `p`.
pub fn local_degree_matrix<T: Coord>(
    spec: MapSpec,
    sub: &Subsystem,
    p: &PillowPoint<T>,
    n: u32,
) -> Result<LocalDegreeMatrix> {
    let side = spec.side_count(n)?;
    let faces: &[Color] = if p.on_equator() { &Color::ALL } else { std::slice::from_ref(&p.face) };
    let xs = incident_indices(&p.x, side);
    let ys = incident_indices(&p.y, side);
    let mut out = LocalDegreeMatrix::default();
    for &face in faces {
        for &a in &xs {
            for &b in &ys {
                let bx = TileBox { level: n, face, a, b };
                let inside = match bx.address(spec) {
                    Some(addr) => addr.in_subsystem(sub),
                    None => true,
                };
                if inside {
                    out.entries[bx.position().index()][bx.color().index()] += 1;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pillow::{apply_map, canonicalize};
    use num_rational::Rational64;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn generic_point_has_one_tile() {
        let s = MapSpec::new(3).unwrap();
        let p = canonicalize(Color::Black, 0.4123, 0.2718).unwrap();
        for n in 1..4 {
            assert_eq!(local_degree_matrix(s, &Subsystem::full(s), &p, n).unwrap().total(), 1);
        }
    }

    #[test]
    fn grid_vertex_example() {
        let s = MapSpec::new(3).unwrap();
        let p = canonicalize(Color::White, q(1, 3), q(1, 3)).unwrap();
        let d = local_degree_matrix(s, &Subsystem::full(s), &p, 1).unwrap();
        assert_eq!(d.get(Color::White, Color::White), 2);
        assert_eq!(d.get(Color::Black, Color::White), 2);
        assert_eq!(d.get(Color::White, Color::Black) + d.get(Color::Black, Color::Black), 0);
    }

    #[test]
    fn cocycle_at_vertex() {
        let s = MapSpec::new(3).unwrap();
        let full = Subsystem::full(s);
        let p = canonicalize(Color::White, q(1, 3), q(1, 3)).unwrap();
        let fp = apply_map(s, &p);
        let d2 = local_degree_matrix(s, &full, &p, 2).unwrap();
        let d1 = local_degree_matrix(s, &full, &p, 1).unwrap();
        let d1f = local_degree_matrix(s, &full, &fp, 1).unwrap();
        assert_eq!(d2, d1 * d1f);
    }

    #[test]
    fn corner_is_in_two_zero_tiles_worth_of_cells() {
        let s = MapSpec::new(3).unwrap();
        let p = canonicalize(Color::White, q(0, 1), q(0, 1)).unwrap();
        let d = local_degree_matrix(s, &Subsystem::full(s), &p, 1).unwrap();
        assert_eq!(d.total(), 2);
    }
}
