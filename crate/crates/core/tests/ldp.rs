use std::collections::HashSet;

use tilepress_core::cells::{partner_box, TileBox};
use tilepress_core::ldp::*;
use tilepress_core::pillow::apply_map;
use tilepress_core::pillow::BasisFunction;
use tilepress_core::thermo::*;
use tilepress_core::{cells::EdgeLabel, Color, Error, MapSpec, Potential, Subsystem};

fn setup() -> (MapSpec, Potential) {
    (MapSpec::new(3).unwrap(), Potential::single(BasisFunction::SignedSine, 1.0))
}

fn short_grid() -> Vec<f64> {
    vec![-2.0, -1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0]
}

#[test]
fn derivative_at_one_is_the_equilibrium_mean() {
    let (spec, pot) = setup();
    let curve = pressure_curve(spec, &pot, &short_grid(), CurveMethod::Eigen, OperatorConfig::default()).unwrap();
    let gamma = energy_range(&curve).unwrap().gamma_phi;
    let sub = Subsystem::full(spec);
    let eig = eigen_pair(spec, &sub, &pot, OperatorConfig::default()).unwrap();
    let (_, mu) = tile_measures(spec, &sub, &pot, 6, &eig, MeasureConfig::default(), u128::MAX).unwrap();
    let mean = mu.integrate_centres(|p| pot.eval(p));
    assert!((gamma - mean).abs() <= 0.02, "{gamma} vs {mean}");
}

#[test]
fn zn_bracket_curve_tracks_eigen_curve() {
    let (spec, pot) = setup();
    let t = [0.0, 0.5, 1.0];
    let cfg = OperatorConfig { grid: 65, ..OperatorConfig::default() };
    let a = pressure_curve(spec, &pot, &t, CurveMethod::Eigen, cfg).unwrap();
    let b = pressure_curve(spec, &pot, &t, CurveMethod::ZnBracket { n_max: 4 }, cfg).unwrap();
    for k in 0..3 {
        assert!((a.p[k] - b.p[k]).abs() < 0.05, "{} vs {}", a.p[k], b.p[k]);
    }
}

#[test]
fn widening_t_never_shrinks_hats() {
    let (spec, pot) = setup();
    let cfg = OperatorConfig { grid: 65, ..OperatorConfig::default() };
    let full = default_t_grid();
    let narrow: Vec<f64> = full.iter().copied().filter(|t| t.abs() <= 10.0).collect();
    let wide = energy_range(&pressure_curve(spec, &pot, &full, CurveMethod::Eigen, cfg).unwrap()).unwrap();
    let tight = energy_range(&pressure_curve(spec, &pot, &narrow, CurveMethod::Eigen, cfg).unwrap()).unwrap();
    assert!(wide.alpha_min_hat <= tight.alpha_min_hat && wide.alpha_max_hat >= tight.alpha_max_hat);
    assert!(wide.alpha_min_hat < wide.gamma_phi && wide.gamma_phi < wide.alpha_max_hat);
}

#[test]
fn rate_table_shape() {
    let (spec, pot) = setup();
    let cfg = OperatorConfig { grid: 65, ..OperatorConfig::default() };
    let curve = pressure_curve(spec, &pot, &default_t_grid(), CurveMethod::Eigen, cfg).unwrap();
    let f = RateFunction::new(&curve).unwrap();
    let g = f.range().gamma_phi;
    let (xi, i) = f.rate(g).unwrap();
    assert!((xi - 1.0).abs() < 1e-6 && i.abs() < 1e-6);
    let table = rate_function(&curve, &alpha_grid(&f.range(), 20)).unwrap();
    assert!(table.max_legendre_residual() <= 1e-4);
    for w in table.rows.windows(3) {
        assert!(w[0].xi < w[1].xi);
        assert!(w[0].rate + w[2].rate - 2.0 * w[1].rate > 0.0);
    }
    for r in &table.rows {
        assert!((f.smooth().dp(r.xi) - r.alpha).abs() <= 1e-8);
    }
    assert!(matches!(rate_function(&curve, &[1.5]), Err(Error::Range { .. })));
}

/// Largest sampled `Sₙφ` over a tile, centre included.
fn sampled_max(spec: MapSpec, pot: &Potential, b: &TileBox, side: u64, n: u32) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for k in 0..=8 {
        for l in 0..=8 {
            let mut q = b.local_point(side, k as f64 / 8.0, l as f64 / 8.0);
            let mut s = 0.0;
            for _ in 0..n {
                s += pot.eval(&q);
                q = apply_map(spec, &q);
            }
            best = best.max(s);
        }
    }
    best
}

#[test]
fn pair_selection_brackets_brute_force() {
    let (spec, pot) = setup();
    let cfg = BracketConfig::default();
    let gamma = 0.2522;
    for (n, alpha) in [(1, gamma + 1e-3), (2, gamma + 1e-3), (3, 0.5), (3, 0.8)] {
        let set = pairs_alpha(spec, &pot, EdgeLabel::Bottom, n, alpha, gamma, cfg).unwrap();
        let side = spec.side_count(n).unwrap();
        let selected: HashSet<usize> = set.pairs().map(|(b, _)| b.dense_index(side)).collect();
        let mut found = 0;
        for k in 0..(2 * side * side) as usize {
            let b = TileBox::from_dense_index(n, side, k);
            if b.color() != Color::Black {
                continue;
            }
            let (w, _) = partner_box(spec, EdgeLabel::Bottom, &b).unwrap();
            let reach = sampled_max(spec, &pot, &b, side, n).max(sampled_max(spec, &pot, &w, side, n));
            if reach >= n as f64 * alpha {
                found += 1;
                assert!(selected.contains(&k), "n={n} alpha={alpha} missed {b:?}");
            }
        }
        assert!(set.certain_count <= found && found <= set.possible_count);
    }
    let high = pairs_alpha(spec, &pot, EdgeLabel::Left, 5, 0.95, gamma, cfg).unwrap();
    assert!(high.possible_count > 0 && high.possible_count < 9usize.pow(5));
    assert!(high.certain_count <= high.possible_count);
}

#[test]
fn pair_masses_partition_and_decrease() {
    let (spec, pot) = setup();
    let sub = Subsystem::full(spec);
    let eig = eigen_pair(spec, &sub, &pot, OperatorConfig { grid: 65, ..OperatorConfig::default() }).unwrap();
    let (_, mu) = tile_measures(spec, &sub, &pot, 4, &eig, MeasureConfig::default(), u128::MAX).unwrap();
    let table = BirkhoffTable::new(spec, &pot, 4, BracketConfig::default(), u128::MAX).unwrap();
    let all = select_pairs(spec, &table, EdgeLabel::Top, -5.0, -10.0).unwrap();
    assert!((all.mass(&mu, false) - 1.0).abs() < 1e-9);
    let mut prev = f64::INFINITY;
    for a in [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let m = select_pairs(spec, &table, EdgeLabel::Top, a, 0.25).unwrap().mass(&mu, false);
        assert!(m <= prev);
        prev = m;
    }
}
