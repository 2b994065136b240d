use std::f64::consts::{PI, SQRT_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{canonicalize, path_distance, Color, PillowPoint, DIAMETER_UPPER};
use crate::error::{Error, Result};

/// Functions spanning the supported potentials. Each one is continuous on
/// the pillow: the signed terms vanish on the equator, so flipping their
/// sign between faces does not break the gluing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFunction {
    Constant,
    CosCos,
    CosX,
    CosY,
    SignedSine,
    SignedBubble,
}

pub const BASIS: [BasisFunction; 6] = [
    BasisFunction::Constant,
    BasisFunction::CosCos,
    BasisFunction::CosX,
    BasisFunction::CosY,
    BasisFunction::SignedSine,
    BasisFunction::SignedBubble,
];

impl BasisFunction {
    pub fn eval(self, face: Color, x: f64, y: f64) -> f64 {
        match self {
            BasisFunction::Constant => 1.0,
            BasisFunction::CosCos => (TAU * x).cos() * (TAU * y).cos(),
            BasisFunction::CosX => (TAU * x).cos(),
            BasisFunction::CosY => (TAU * y).cos(),
            BasisFunction::SignedSine => face.sign() * (PI * x).sin() * (PI * y).sin(),
            BasisFunction::SignedBubble => face.sign() * x * (1.0 - x) * y * (1.0 - y),
        }
    }

    /// Lipschitz constant for the path metric.
    pub fn lipschitz(self) -> f64 {
        match self {
            BasisFunction::Constant => 0.0,
            BasisFunction::CosCos | BasisFunction::CosX | BasisFunction::CosY => TAU,
            BasisFunction::SignedSine => PI,
            BasisFunction::SignedBubble => SQRT_2 / 4.0,
        }
    }

    pub fn sup_norm(self) -> f64 {
        match self {
            BasisFunction::SignedBubble => 1.0 / 16.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisFunction::Constant => "constant",
            BasisFunction::CosCos => "cos_cos",
            BasisFunction::CosX => "cos_x",
            BasisFunction::CosY => "cos_y",
            BasisFunction::SignedSine => "signed_sine",
            BasisFunction::SignedBubble => "signed_bubble",
        }
    }
}

/// A real potential on the pillow, given by coefficients on [`BASIS`] and a
/// Hölder exponent `κ ∈ (0, 1]`.
///
/// `face_jump` adds `a · s(face)`, which is discontinuous across the equator.
/// It exists for negative tests only and makes every Hölder bound infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    coefficients: [f64; 6],
    kappa: f64,
    #[serde(default)]
    face_jump: f64,
}

impl Potential {
    pub fn new(coefficients: [f64; 6], kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1], got {kappa}")));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("potential coefficients must be finite".into()));
        }
        Ok(Self { coefficients, kappa, face_jump: 0.0 })
    }

    pub fn zero() -> Self {
        Self { coefficients: [0.0; 6], kappa: 1.0, face_jump: 0.0 }
    }

    pub fn single(b: BasisFunction, c: f64) -> Self {
        let mut coefficients = [0.0; 6];
        let k = BASIS.iter().position(|&x| x == b).unwrap_or(0);
        coefficients[k] = c;
        Self { coefficients, kappa: 1.0, face_jump: 0.0 }
    }

    /// Adds the discontinuous term `a · s(face)`.
    pub fn with_face_jump(mut self, a: f64) -> Self {
        self.face_jump = a;
        self
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coefficients {
            *c *= t;
        }
        out.face_jump *= t;
        out
    }

    pub fn coefficients(&self) -> &[f64; 6] {
        &self.coefficients
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn face_jump(&self) -> f64 {
        self.face_jump
    }

    pub fn is_zero(&self) -> bool {
        self.face_jump == 0.0 && self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// Evaluates on raw face coordinates without canonicalizing first. For a
    /// continuous potential the face is irrelevant on the equator.
    #[inline]
    pub fn eval_raw(&self, face: Color, x: f64, y: f64) -> f64 {
        let mut v = self.face_jump * face.sign();
        for (b, &c) in BASIS.iter().zip(&self.coefficients) {
            if c != 0.0 {
                v += c * b.eval(face, x, y);
            }
        }
        v
    }

    pub fn eval(&self, p: &PillowPoint<f64>) -> f64 {
        self.eval_raw(p.face, p.x, p.y)
    }

    /// Lipschitz bound for the path metric, infinite if a face jump is set.
    pub fn lipschitz_bound(&self) -> f64 {
        if self.face_jump != 0.0 {
            return f64::INFINITY;
        }
        BASIS.iter().zip(&self.coefficients).map(|(b, c)| c.abs() * b.lipschitz()).sum()
    }

    /// Upper bound for the `κ`-Hölder seminorm. A Lipschitz function with
    /// constant `L` on a space of diameter at most `D` has `κ`-seminorm at
    /// most `L · D^(1-κ)`.
    pub fn holder_seminorm(&self) -> f64 {
        self.lipschitz_bound() * DIAMETER_UPPER.powf(1.0 - self.kappa)
    }

    pub fn sup_norm(&self) -> f64 {
        self.face_jump.abs()
            + BASIS.iter().zip(&self.coefficients).map(|(b, c)| c.abs() * b.sup_norm()).sum::<f64>()
    }

    /// Largest disagreement between the two face formulas on the equator,
    /// sampled at `4k` points.
    pub fn gluing_defect(&self, k: usize) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..=k {
            let t = s as f64 / k.max(1) as f64;
            for (x, y) in [(t, 0.0), (t, 1.0), (0.0, t), (1.0, t)] {
                let d = (self.eval_raw(Color::White, x, y) - self.eval_raw(Color::Black, x, y)).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest sampled ratio `|φ(p) - φ(q)| / d(p, q)^κ`, using random
    /// pairs including close pairs straddling the equator.
    pub fn sampled_holder_ratio(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let draw = |rng: &mut ChaCha8Rng| {
            let face = if rng.gen::<bool>() { Color::White } else { Color::Black };
            canonicalize(face, rng.gen::<f64>(), rng.gen::<f64>()).expect("unit square")
        };
        for k in 0..samples {
            let p = draw(&mut rng);
            let q = if k % 2 == 0 {
                draw(&mut rng)
            } else {
                // a close partner on the other face, across the bottom edge
                let h = rng.gen_range(1e-6..1e-2);
                let p = canonicalize(p.face, p.x, h).expect("unit square");
                let q = canonicalize(p.face.opposite(), (p.x + h).min(1.0), h).expect("unit square");
                let r = self.eval(&p) - self.eval(&q);
                let d = path_distance(&p, &q);
                if d > 0.0 {
                    worst = worst.max(r.abs() / d.powf(self.kappa));
                }
                continue;
            };
            let d = path_distance(&p, &q);
            if d > 0.0 {
                worst = worst.max((self.eval(&p) - self.eval(&q)).abs() / d.powf(self.kappa));
            }
        }
        worst
    }
}
