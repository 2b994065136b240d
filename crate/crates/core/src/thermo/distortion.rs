use serde::Serialize;

use crate::pillow::{MapSpec, Potential, PILLOW_DIAMETER};

/// Comparability constant of `d(fⁿx, fⁿy)` and `mⁿ d(x, y)` inside one
/// `n`-tile. `fⁿ` restricted to a tile is a similarity onto a face, so the
/// constant is one; [`crate::pillow::measure_distortion_c0`] checks this.
pub const DEFAULT_C0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionConstants {
    pub c0: f64,
    /// `C₁ = C₀ |φ|_κ / (1 - m^{-κ})`.
    pub c1: f64,
    /// `C̄ = (deg f)^{n_F} exp(2 n_F ‖φ‖∞ + C₁ diam^κ)`.
    pub cbar: f64,
    pub diam: f64,
    pub n_f: u32,
    pub kappa: f64,
    pub holder_seminorm: f64,
    pub sup_norm: f64,
    pub degree: u64,
}

impl DistortionConstants {
    /// `C₁ diam^κ`, the bound on `|Sₙφ(x) - Sₙφ(y)|` for `x, y` in one tile.
    pub fn birkhoff_distortion(&self) -> f64 {
        self.c1 * self.diam.powf(self.kappa)
    }

    /// Gibbs constant of the equilibrium measure implied by the distortion
    /// bounds, for eigenvalue `lambda`.
    pub fn gibbs_constant(&self, lambda: f64) -> f64 {
        let d = self.birkhoff_distortion().exp();
        let nf = self.n_f as f64;
        self.cbar * d * (1.0 + d * lambda.powf(nf) * (nf * self.sup_norm).exp())
    }
}

pub fn distortion_constants(spec: MapSpec, pot: &Potential, n_f: u32, c0: f64) -> DistortionConstants {
    let kappa = pot.kappa();
    let holder = pot.holder_seminorm();
    let sup = pot.sup_norm();
    let m = spec.expansion();
    let c1 = if holder == 0.0 { 0.0 } else { c0 * holder / (1.0 - m.powf(-kappa)) };
    let diam = PILLOW_DIAMETER;
    let nf = n_f as f64;
    let cbar = (spec.degree() as f64).powf(nf) * (2.0 * nf * sup + c1 * diam.powf(kappa)).exp();
    DistortionConstants {
        c0,
        c1,
        cbar,
        diam,
        n_f,
        kappa,
        holder_seminorm: holder,
        sup_norm: sup,
        degree: spec.degree(),
    }
}
