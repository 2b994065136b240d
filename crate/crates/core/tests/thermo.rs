use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tilepress_core::pillow::{path_distance, BasisFunction, BASIS};
use tilepress_core::subsystem::classify;
use tilepress_core::thermo::*;
use tilepress_core::{Color, MapSpec, Point, Potential, Subsystem};

fn carpet() -> (MapSpec, Subsystem) {
    let spec = MapSpec::new(3).unwrap();
    (spec, Subsystem::carpet(spec).unwrap())
}

fn mixed() -> Potential {
    Potential::new([0.0, 0.2, 0.0, 0.0, 0.3, 0.0], 1.0).unwrap()
}

fn coarse() -> OperatorConfig {
    OperatorConfig { grid: 65, ..OperatorConfig::default() }
}

#[test]
fn eigenmeasure_is_a_jacobian() {
    let (spec, sub) = carpet();
    let pot = mixed();
    let eig = eigen_pair(spec, &sub, &pot, coarse()).unwrap();
    let n_f = classify(&sub, 4).unwrap().n_f_irreducible.unwrap();
    let c = distortion_constants(spec, &pot, n_f, DEFAULT_C0);
    let slack = 2.0 * c.birkhoff_distortion();
    let cfg = MeasureConfig::default();
    for n in 1..=3 {
        let (m_n, _) = tile_measures(spec, &sub, &pot, n, &eig, cfg, u128::MAX).unwrap();
        let (m_next, _) = tile_measures(spec, &sub, &pot, n + 1, &eig, cfg, u128::MAX).unwrap();
        for (b, w) in m_next.entries() {
            let addr = b.address(spec).unwrap();
            let image = addr.shift().unwrap().tile_box(spec);
            let x = b.center(m_next.side);
            let expected = eig.log_lambda - pot.eval(&x);
            let got = (m_n.weight(&image) / w).ln();
            assert!((got - expected).abs() <= slack, "n={n} {addr}: {got} vs {expected}");
        }
    }
}

#[test]
fn tile_measures_are_probabilities() {
    let (spec, sub) = carpet();
    let pot = mixed();
    let eig = eigen_pair(spec, &sub, &pot, coarse()).unwrap();
    let (m, mu) = tile_measures(spec, &sub, &pot, 4, &eig, MeasureConfig::default(), u128::MAX).unwrap();
    assert!((m.total - 1.0).abs() < 1e-12);
    assert!((mu.total - 1.0).abs() < 1e-12);
    assert_eq!(mu.entries().count(), 2 * 8usize.pow(4));
}

#[test]
fn eigenfunction_within_distortion_constant() {
    let (spec, sub) = carpet();
    let pot = mixed();
    let eig = eigen_pair(spec, &sub, &pot, coarse()).unwrap();
    let n_f = classify(&sub, 4).unwrap().n_f_irreducible.unwrap();
    let cbar = distortion_constants(spec, &pot, n_f, DEFAULT_C0).cbar;
    assert!(eig.residual <= 1e-6);
    assert!(eig.u_tilde.min() >= 1.0 / cbar && eig.u_tilde.max() <= cbar);
    let z = pressure_estimate(spec, &sub, &pot, 5, BracketConfig::default(), u128::MAX).unwrap();
    assert!(z.contains(eig.log_lambda), "{} not in [{}, {}]", eig.log_lambda, z.lower, z.upper);
}

#[test]
fn branch_sums_obey_distortion_bounds() {
    let (spec, sub) = carpet();
    let pot = Potential::single(BasisFunction::SignedSine, 0.5);
    let n_f = classify(&sub, 4).unwrap().n_f_irreducible.unwrap();
    let c = distortion_constants(spec, &pot, n_f, DEFAULT_C0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let c1 = if rng.gen() { Color::White } else { Color::Black };
        let (x0, y0, x1, y1): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let a = branch_sum(spec, &sub, &pot, c1, x0, y0, n);
        let b = branch_sum(spec, &sub, &pot, c1, x1, y1, n);
        let d = path_distance(&Point { face: c1, x: x0, y: y0 }, &Point { face: c1, x: x1, y: y1 });
        assert!((a / b).ln().abs() <= c.c1 * d.powf(c.kappa) + 1e-12);
        let other = branch_sum(spec, &sub, &pot, c1.opposite(), x1, y1, n);
        assert!((a / other).max(other / a) <= c.cbar);
    }
}

#[test]
fn equilibrium_weights_are_nearly_invariant() {
    let spec = MapSpec::new(3).unwrap();
    let sub = Subsystem::full(spec);
    let pot = mixed();
    let eig = eigen_pair(spec, &sub, &pot, coarse()).unwrap();
    let (_, mu) = tile_measures(spec, &sub, &pot, 4, &eig, MeasureConfig::default(), u128::MAX).unwrap();
    for g in BASIS {
        let d = invariance_defect(spec, &mu, |p| g.eval(p.face, p.x, p.y));
        assert!(d.abs() <= 0.05, "{}: {d}", g.name());
    }
}
