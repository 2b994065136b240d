use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{apply_map, canonicalize, Color, MapSpec, PillowPoint};
use crate::scalar::Coord;

/// Diameter of the pillow in the path metric, attained by opposite corners
/// of a face. [`measure_pillow_diameter`] reproduces it by grid search.
pub const PILLOW_DIAMETER: f64 = std::f64::consts::SQRT_2;

/// Upper bound for the diameter of the pillow used by the distortion
/// constants. The measured diameter is `√2`; the extra margin keeps the
/// bound safe against grid-search resolution.
pub const DIAMETER_UPPER: f64 = std::f64::consts::SQRT_2 + 0.5;

fn hypot<T: Float>(a: T, b: T) -> T {
    (a * a + b * b).sqrt()
}

/// Length of the shortest path in the flat pillow metric.
///
/// Points on the same face are joined by a straight segment. Points on
/// opposite faces are joined through one of the four edges, which unfolds to
/// a segment towards the reflection of the target across that edge.
pub fn path_distance<T: Coord + Float>(p: &PillowPoint<T>, q: &PillowPoint<T>) -> T {
    let same = p.face == q.face || p.on_equator() || q.on_equator();
    let two = T::one() + T::one();
    let (dx, dy) = (p.x - q.x, p.y - q.y);
    let mut best = T::infinity();
    if same {
        best = hypot(dx, dy);
    }
    if !same || p.on_equator() || q.on_equator() {
        let cands = [
            hypot(p.x + q.x, dy),
            hypot(two - p.x - q.x, dy),
            hypot(dx, p.y + q.y),
            hypot(dx, two - p.y - q.y),
        ];
        for c in cands {
            best = best.min(c);
        }
    }
    best
}

fn grid_points(g: usize) -> Vec<PillowPoint<f64>> {
    let mut pts = Vec::new();
    for face in Color::ALL {
        for a in 0..=g {
            for b in 0..=g {
                let p = canonicalize(face, a as f64 / g as f64, b as f64 / g as f64)
                    .expect("grid point in range");
                if face == Color::Black && p.face == Color::White {
                    continue;
                }
                pts.push(p);
            }
        }
    }
    pts
}

/// Grid estimate of the diameter: the largest distance between points of a
/// `(g+1)²` grid on each face.
pub fn measure_pillow_diameter(g: usize) -> f64 {
    let pts = grid_points(g.max(1));
    let mut best = 0.0f64;
    for (k, p) in pts.iter().enumerate() {
        for q in &pts[k + 1..] {
            best = best.max(path_distance(p, q));
        }
    }
    best
}

/// Empirical comparability constant between `d(fⁿx, fⁿy)` and
/// `mⁿ d(x, y)` for pairs inside one `n`-tile, returned as the largest
/// observed value of `max(r, 1/r)`.
pub fn measure_distortion_c0(spec: MapSpec, n: u32, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.m() as f64;
    let side = m.powi(n as i32);
    let mut worst = 1.0f64;
    for _ in 0..samples {
        let face = if rng.gen::<bool>() { Color::White } else { Color::Black };
        let a = rng.gen_range(0..side as u64) as f64;
        let b = rng.gen_range(0..side as u64) as f64;
        let draw = |rng: &mut ChaCha8Rng| {
            let x = (a + rng.gen_range(0.02..0.98)) / side;
            let y = (b + rng.gen_range(0.02..0.98)) / side;
            canonicalize(face, x, y).expect("interior point")
        };
        let p = draw(&mut rng);
        let q = draw(&mut rng);
        let d0 = path_distance(&p, &q);
        if d0 < 1e-9 {
            continue;
        }
        let (mut fp, mut fq) = (p, q);
        for _ in 0..n {
            fp = apply_map(spec, &fp);
            fq = apply_map(spec, &fq);
        }
        let r = path_distance(&fp, &fq) / (side * d0);
        worst = worst.max(r).max(1.0 / r);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(face: Color, x: f64, y: f64) -> PillowPoint<f64> {
        canonicalize(face, x, y).unwrap()
    }

    #[test]
    fn distance_examples() {
        let d = path_distance(&pt(Color::White, 0.1, 0.1), &pt(Color::White, 0.4, 0.5));
        assert!((d - 0.5).abs() < 1e-15);
        let d = path_distance(&pt(Color::White, 0.1, 0.5), &pt(Color::Black, 0.1, 0.5));
        assert!((d - 0.2).abs() < 1e-15);
        let d = path_distance(&pt(Color::White, 0.0, 0.5), &pt(Color::Black, 0.1, 0.5));
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn diameter_is_root_two() {
        let d = measure_pillow_diameter(16);
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12, "{d}");
        assert!(d <= DIAMETER_UPPER);
    }

    #[test]
    fn distortion_constant_near_one() {
        let c = measure_distortion_c0(MapSpec::new(3).unwrap(), 2, 2000, 7);
        assert!(c < 1.0 + 1e-9, "{c}");
    }
}
