//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line to stderr
//! (bypassing output capture) and then asserts its verdict.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tilepress_core::cells::{count_by_class, local_degree_matrix, partner_box, EdgeLabel, TileBox};
use tilepress_core::ldp::*;
use tilepress_core::pillow::{apply_map, canonicalize, path_distance, BasisFunction, BASIS};
use tilepress_core::subsystem::{classify, entropy};
use tilepress_core::thermo::*;
use tilepress_core::{Color, MapSpec, Point, Potential, Subsystem};

fn verdict(id: u32, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) {
    let in_time = elapsed <= limit;
    let pass = ok && in_time;
    let line = format!(
        "acceptance {id:>2} {:<4} {name}: {detail}; {:.2}s (limit {}s)\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its time limit");
}

fn m3() -> MapSpec {
    MapSpec::new(3).unwrap()
}

fn g2(c: f64) -> Potential {
    Potential::single(BasisFunction::SignedSine, c)
}

fn n_f(sub: &Subsystem) -> u32 {
    classify(sub, 4).unwrap().n_f_irreducible.unwrap()
}

#[test]
fn criterion_01_entropy() {
    let t = Instant::now();
    let spec = m3();
    let full = Subsystem::full(spec).tile_matrix();
    let carpet = Subsystem::carpet(spec).unwrap().tile_matrix();
    let (h_full, h_carpet) = (entropy(&full), entropy(&carpet));
    let ok = full.spectral_radius() == 9.0 && h_full == 9f64.ln() && (h_carpet - 8f64.ln()).abs() <= 1e-12;
    verdict(
        1,
        "entropy identities",
        ok,
        t.elapsed(),
        Duration::from_secs(1),
        format!("h(full)={h_full:.15} h(carpet)={h_carpet:.15}"),
    );
}

#[test]
fn criterion_02_matrix_powers() {
    let t = Instant::now();
    let mut checked = 0;
    let mut bad = Vec::new();
    for m in [2, 3] {
        let spec = MapSpec::new(m).unwrap();
        let mut subs = vec![("full", Subsystem::full(spec))];
        if m % 2 == 1 {
            subs.push(("carpet", Subsystem::carpet(spec).unwrap()));
        } else {
            let corner = spec.labels().into_iter().filter(|l| !(l.i == 0 && l.j == 0));
            subs.push(("corner-removed", Subsystem::new(spec, corner).unwrap()));
        }
        for (name, sub) in subs {
            let a = sub.tile_matrix();
            for n in 1..=6 {
                let counts = count_by_class(spec, &sub, n);
                for pos in Color::ALL {
                    for col in Color::ALL {
                        if counts[pos.index()][col.index()] != a.power_count(n, col, pos) {
                            bad.push(format!("m={m} {name} n={n}"));
                        }
                    }
                }
                checked += 1;
            }
        }
    }
    verdict(
        2,
        "tile-matrix powers",
        bad.is_empty(),
        t.elapsed(),
        Duration::from_secs(30),
        format!("{checked} (subsystem, n) cases, mismatches {bad:?}"),
    );
}

#[test]
fn criterion_03_pressure_consistency() {
    let t = Instant::now();
    let spec = m3();
    let sub = Subsystem::carpet(spec).unwrap();
    let pot = g2(0.3);
    let eig = eigen_pair(spec, &sub, &pot, OperatorConfig::default()).unwrap();
    let est = pressure_estimate(spec, &sub, &pot, 7, BracketConfig::default(), u128::MAX).unwrap();
    let ok = est.contains(eig.log_lambda) && est.width <= 0.05;
    verdict(
        3,
        "pressure consistency",
        ok,
        t.elapsed(),
        Duration::from_secs(300),
        format!("log λ={:.6} bracket=[{:.6}, {:.6}] width={:.4}", eig.log_lambda, est.lower, est.upper, est.width),
    );
}

#[test]
fn criterion_04_eigenfunction() {
    let t = Instant::now();
    let spec = m3();
    let sub = Subsystem::carpet(spec).unwrap();
    let pot = g2(0.3);
    let eig = eigen_pair(spec, &sub, &pot, OperatorConfig::default()).unwrap();
    let cbar = distortion_constants(spec, &pot, n_f(&sub), DEFAULT_C0).cbar;
    let (lo, hi) = (eig.u_tilde.min(), eig.u_tilde.max());
    let ok = eig.residual <= 1e-6 && lo >= 1.0 / cbar && hi <= cbar;
    verdict(
        4,
        "eigenfunction certificates",
        ok,
        t.elapsed(),
        Duration::from_secs(120),
        format!("residual={:.2e} ũ∈[{lo:.4}, {hi:.4}] C̄={cbar:.3}", eig.residual),
    );
}

#[test]
fn criterion_05_distortion() {
    let t = Instant::now();
    let spec = m3();
    let sub = Subsystem::carpet(spec).unwrap();
    let pot = Potential::new([0.0, 0.2, 0.0, 0.0, 0.3, 0.0], 1.0).unwrap();
    let c = distortion_constants(spec, &pot, n_f(&sub), DEFAULT_C0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut same_bad, mut cross_bad) = (0, 0);
    let (mut same_worst, mut cross_worst) = (0.0f64, 0.0f64);
    let face = |rng: &mut ChaCha8Rng| if rng.gen() { Color::White } else { Color::Black };
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let col = face(&mut rng);
        let (x0, y0, x1, y1): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let a = branch_sum(spec, &sub, &pot, col, x0, y0, n);
        let b = branch_sum(spec, &sub, &pot, col, x1, y1, n);
        let d = path_distance(&Point { face: col, x: x0, y: y0 }, &Point { face: col, x: x1, y: y1 });
        let slack = (a / b).ln().abs() - c.c1 * d.powf(c.kappa);
        same_worst = same_worst.max(slack);
        same_bad += (slack > 1e-12) as usize;
    }
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let col = face(&mut rng);
        let (x0, y0, x1, y1): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let a = branch_sum(spec, &sub, &pot, col, x0, y0, n);
        let b = branch_sum(spec, &sub, &pot, col.opposite(), x1, y1, n);
        let r = (a / b).max(b / a);
        cross_worst = cross_worst.max(r);
        cross_bad += (r > c.cbar) as usize;
    }
    verdict(
        5,
        "distortion laws",
        same_bad == 0 && cross_bad == 0,
        t.elapsed(),
        Duration::from_secs(120),
        format!(
            "same-colour violations {same_bad} (max log excess {same_worst:.3}), \
             cross-colour violations {cross_bad} (max ratio {cross_worst:.3} vs C̄={:.3})",
            c.cbar
        ),
    );
}

#[test]
fn criterion_06_local_degree_cocycle() {
    let t = Instant::now();
    let spec = m3();
    let sub = Subsystem::full(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for _ in 0..50 {
        let face = if rng.gen() { Color::White } else { Color::Black };
        let (a, b) = (rng.gen_range(0..=9i64), rng.gen_range(0..=9i64));
        let p = canonicalize(face, Rational64::new(a, 9), Rational64::new(b, 9)).unwrap();
        for n in 1..=2 {
            let mut q = p.clone();
            for _ in 0..n {
                q = apply_map(spec, &q);
            }
            for k in 1..=2 {
                let whole = local_degree_matrix(spec, &sub, &p, n + k).unwrap();
                let split =
                    local_degree_matrix(spec, &sub, &p, n).unwrap() * local_degree_matrix(spec, &sub, &q, k).unwrap();
                bad += (whole != split) as usize;
            }
        }
    }
    verdict(
        6,
        "local-degree cocycle",
        bad == 0,
        t.elapsed(),
        Duration::from_secs(10),
        format!("50 vertices x 4 (n, m) pairs, mismatches {bad}"),
    );
}

#[test]
fn criterion_07_gibbs() {
    let t = Instant::now();
    let spec = m3();
    let cfg = MeasureConfig::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, sub, p) in [
        ("full", Subsystem::full(spec), 9f64.ln()),
        ("carpet", Subsystem::carpet(spec).unwrap(), 8f64.ln()),
    ] {
        let pot = Potential::zero();
        let eig = eigen_pair(spec, &sub, &pot, OperatorConfig::default()).unwrap();
        let (_, mu) = tile_measures(spec, &sub, &pot, 5, &eig, cfg, u128::MAX).unwrap();
        let g = gibbs_constants(spec, &sub, &pot, &mu, p).unwrap();
        ok &= g.c_observed == 1.0;
        detail.push(format!("φ=0 {name}: C_obs={} (per-colour C={})", g.c_observed, g.c_split));
    }
    let sub = Subsystem::carpet(spec).unwrap();
    let pot = Potential::new([0.0, 0.2, 0.0, 0.0, 0.3, 0.0], 1.0).unwrap();
    let eig = eigen_pair(spec, &sub, &pot, OperatorConfig::default()).unwrap();
    let (_, mu) = tile_measures(spec, &sub, &pot, 5, &eig, cfg, u128::MAX).unwrap();
    let g = gibbs_constants(spec, &sub, &pot, &mu, eig.log_lambda).unwrap();
    let theory = distortion_constants(spec, &pot, n_f(&sub), DEFAULT_C0).gibbs_constant(eig.lambda);
    ok &= g.c_observed <= theory && g.zero_weight_tiles == 0;
    detail.push(format!("φ≠0 carpet n=5: C_obs={:.4} <= C_theory={theory:.3e}", g.c_observed));
    verdict(7, "Gibbs property", ok, t.elapsed(), Duration::from_secs(120), detail.join("; "));
}

#[test]
fn criterion_08_invariance() {
    let t = Instant::now();
    let spec = m3();
    let pot = g2(0.3);
    let mut worst = 0.0f64;
    for sub in [Subsystem::carpet(spec).unwrap(), Subsystem::full(spec)] {
        let eig = eigen_pair(spec, &sub, &pot, OperatorConfig::default()).unwrap();
        let (_, mu) = tile_measures(spec, &sub, &pot, 6, &eig, MeasureConfig::default(), u128::MAX).unwrap();
        for g in BASIS {
            worst = worst.max(invariance_defect(spec, &mu, |p| g.eval(p.face, p.x, p.y)).abs());
        }
    }
    verdict(
        8,
        "invariance",
        worst <= 0.02,
        t.elapsed(),
        Duration::from_secs(180),
        format!("max |∫g∘f dμ - ∫g dμ| = {worst:.2e} over the basis, carpet and full, n=6"),
    );
}

#[test]
fn criterion_09_pairs() {
    let t = Instant::now();
    let spec = m3();
    let mut ok = true;
    for n in 1..=4 {
        let side = spec.side_count(n).unwrap();
        for e0 in EdgeLabel::ALL {
            let mut owner = vec![0u8; (2 * side * side) as usize];
            let mut pairs = 0u64;
            for k in 0..owner.len() {
                let b = TileBox::from_dense_index(n, side, k);
                if b.color() != Color::Black {
                    continue;
                }
                let (w, _) = partner_box(spec, e0, &b).unwrap();
                owner[k] += 1;
                owner[w.dense_index(side)] += 1;
                pairs += 1;
            }
            ok &= pairs == 9u64.pow(n) && owner.iter().all(|&c| c == 1);
        }
    }
    verdict(
        9,
        "pair structure",
        ok,
        t.elapsed(),
        Duration::from_secs(60),
        "card = 9^n, every tile in exactly one pair, n<=4, all four edges".into(),
    );
}

struct LdpSetup {
    rate: RateFunction,
    table: RateTable,
    curve_time: Duration,
}

fn ldp_setup() -> &'static LdpSetup {
    static CELL: OnceLock<LdpSetup> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let curve = pressure_curve(m3(), &g2(1.0), &default_t_grid(), CurveMethod::Eigen, OperatorConfig::default())
            .unwrap();
        let rate = RateFunction::new(&curve).unwrap();
        let table = rate_function(&curve, &alpha_grid(&rate.range(), 20)).unwrap();
        LdpSetup { rate, table, curve_time: t.elapsed() }
    })
}

struct Deviation {
    reports: Vec<DeviationReport>,
    elapsed: Duration,
}

fn deviation() -> &'static Deviation {
    static CELL: OnceLock<Deviation> = OnceLock::new();
    CELL.get_or_init(|| {
        let setup = ldp_setup();
        let t = Instant::now();
        let spec = m3();
        let pot = g2(1.0);
        let r = setup.rate.range();
        let alphas = [
            r.gamma_phi - 0.6 * (r.gamma_phi - r.alpha_min_hat),
            r.gamma_phi + 0.6 * (r.alpha_max_hat - r.gamma_phi),
        ];
        let eig = eigen_pair(spec, &Subsystem::full(spec), &pot, OperatorConfig::default()).unwrap();
        let reports =
            deviation_report(spec, &pot, &alphas, 3..=7, &setup.rate, &eig, DeviationConfig::default()).unwrap();
        Deviation { reports, elapsed: t.elapsed() + setup.curve_time }
    })
}

#[test]
fn criterion_10_rate_function() {
    let t = Instant::now();
    let s = ldp_setup();
    let g = s.rate.range().gamma_phi;
    let (xi, i) = s.rate.rate(g).unwrap();
    let convex = s.table.rows.windows(3).all(|w| w[0].rate + w[2].rate - 2.0 * w[1].rate > 0.0);
    let legendre = s.table.max_legendre_residual();
    let ok = i.abs() <= 1e-6 && (xi - 1.0).abs() <= 1e-6 && convex && legendre <= 1e-4 && s.table.rows.len() == 20;
    verdict(
        10,
        "rate function",
        ok,
        t.elapsed().max(s.curve_time),
        Duration::from_secs(300),
        format!(
            "γ={g:.6} I(γ)={i:.1e} ξ(γ)-1={:.1e} strictly convex={convex} max Legendre residual={legendre:.1e}",
            xi - 1.0
        ),
    );
}

#[test]
fn criterion_11_deviation_bound() {
    let d = deviation();
    let mut ok = true;
    let mut detail = Vec::new();
    for rep in &d.reports {
        let n0 = rep.first_valid_n;
        let holds = n0.is_some_and(|n0| rep.rows.iter().filter(|r| r.n >= n0).all(|r| r.holds));
        let slopes: Vec<f64> = rep.rows.iter().filter(|r| r.n >= 4).map(|r| r.slope).collect();
        let monotone = slopes.windows(2).all(|w| w[1] >= w[0]);
        let last = rep.row(7).map(|r| r.slope).unwrap_or(f64::NAN);
        let capped = last <= rep.rate + 0.1;
        ok &= holds && monotone && capped;
        detail.push(format!(
            "α={:.4} I={:.4} C_α={:.3e} N={n0:?} bound={holds} slopes(4..7)={:?} nondecreasing={monotone} slope(7)<=I+0.1={capped}",
            rep.alpha,
            rep.rate,
            rep.c_alpha,
            slopes.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>()
        ));
    }
    verdict(11, "large-deviation bound", ok, d.elapsed, Duration::from_secs(900), detail.join("; "));
}

#[test]
fn criterion_12_strong_primitivity() {
    let d = deviation();
    let mut ok = true;
    let mut detail = Vec::new();
    for rep in &d.reports {
        let flags: Vec<(u32, Option<bool>)> = rep.rows.iter().map(|r| (r.n, r.strongly_primitive)).collect();
        let good = rep.first_valid_n.is_some_and(|n0| {
            rep.rows.iter().filter(|r| r.n >= n0).all(|r| r.strongly_primitive == Some(true))
        });
        ok &= good;
        detail.push(format!(
            "α={:.4} N={:?} (bound alone from {:?}) strongly primitive by n: {flags:?}",
            rep.alpha, rep.first_valid_n, rep.first_bound_n
        ));
    }
    verdict(12, "strong primitivity", ok, d.elapsed, Duration::from_secs(900), detail.join("; "));
}
