use num_rational::Rational64;
use serde::Serialize;

use tilepress_core::cells::{count_by_class, local_degree_matrix, partner_box, EdgeLabel, TileBox};
use tilepress_core::ldp::{rate_function, RateFunction};
use tilepress_core::pillow::{apply_map, canonicalize, BASIS};
use tilepress_core::thermo::{
    gibbs_constants, invariance_defect, pressure_estimate, tile_measures, BracketConfig, MeasureConfig,
};
use tilepress_core::{Color, ExactPoint, Subsystem};

use crate::commands::Context;
use crate::error::CliError;
use crate::output::{real, Sink};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, value: Option<f64>, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, value, detail: detail.into() }
    }

    fn error(name: &str, e: impl std::fmt::Display) -> Self {
        Self::new(name, false, None, e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub failed: usize,
}

/// Vertices of the level-2 grid, walked in a fixed order. Exact coordinates
/// keep their images on the grid.
fn vertex_points(m: u64, count: usize) -> Vec<ExactPoint> {
    let side = (m * m) as i64;
    (0..count as i64)
        .map(|k| {
            let face = if k % 2 == 0 { Color::White } else { Color::Black };
            let a = (7 * k + 3) % (side + 1);
            let b = (11 * k + 5) % (side + 1);
            canonicalize(face, Rational64::new(a, side), Rational64::new(b, side)).expect("in range")
        })
        .collect()
}

fn gluing(ctx: &Context) -> Check {
    let d = ctx.pot.gluing_defect(256);
    Check::new("gluing", d <= 1e-12, Some(d), "potential agrees on both faces along the equator")
}

fn matrix_powers(ctx: &Context) -> Check {
    let a = ctx.sub.tile_matrix();
    let top = ctx.n_max.min(5);
    let mut bad = Vec::new();
    for n in 1..=top {
        let c = count_by_class(ctx.spec, &ctx.sub, n);
        for pos in Color::ALL {
            for col in Color::ALL {
                if c[pos.index()][col.index()] != a.power_count(n, col, pos) {
                    bad.push(n);
                }
            }
        }
    }
    Check::new("matrix_powers", bad.is_empty(), None, format!("n = 1..={top}, mismatching levels {bad:?}"))
}

fn cocycle(ctx: &Context) -> Check {
    let full = Subsystem::full(ctx.spec);
    let mut bad = 0;
    let pts = vertex_points(ctx.spec.m(), 50);
    for p in &pts {
        for n in 1..=2 {
            let mut q = p.clone();
            for _ in 0..n {
                q = apply_map(ctx.spec, &q);
            }
            for k in 1..=2 {
                let whole = local_degree_matrix(ctx.spec, &full, p, n + k);
                let a = local_degree_matrix(ctx.spec, &full, p, n);
                let b = local_degree_matrix(ctx.spec, &full, &q, k);
                match (whole, a, b) {
                    (Ok(w), Ok(a), Ok(b)) => bad += (w != a * b) as usize,
                    _ => bad += 1,
                }
            }
        }
    }
    Check::new("local_degree_cocycle", bad == 0, Some(bad as f64), "50 grid vertices, n, k <= 2")
}

fn pairs(ctx: &Context) -> Check {
    let top = ctx.n_max.min(4);
    let mut ok = true;
    for n in 1..=top {
        let Ok(side) = ctx.spec.side_count(n) else {
            return Check::new("pairs", false, None, "level out of range");
        };
        for e0 in EdgeLabel::ALL {
            let mut owner = vec![0u8; (2 * side * side) as usize];
            for k in 0..owner.len() {
                let b = TileBox::from_dense_index(n, side, k);
                if b.color() != Color::Black {
                    continue;
                }
                match partner_box(ctx.spec, e0, &b) {
                    Ok((w, _)) => {
                        owner[k] += 1;
                        owner[w.dense_index(side)] += 1;
                    }
                    Err(_) => ok = false,
                }
            }
            ok &= owner.iter().all(|&c| c == 1);
        }
    }
    Check::new("pairs", ok, None, format!("every tile in exactly one pair, n = 1..={top}, all edges"))
}

fn thermo_checks(ctx: &Context, out: &mut Vec<Check>) {
    let eig = match ctx.eigen() {
        Ok(e) => e,
        Err(e) => {
            out.push(Check::error("eigen", e));
            return;
        }
    };
    out.push(Check::new("eigen_residual", eig.residual <= 1e-6, Some(eig.residual), "sup-norm residual of ũ"));
    let consts = ctx.constants();
    if let Some(c) = consts {
        let (lo, hi) = (eig.u_tilde.min(), eig.u_tilde.max());
        out.push(Check::new(
            "eigen_bounds",
            lo >= 1.0 / c.cbar && hi <= c.cbar,
            Some(hi.max(1.0 / lo)),
            format!("ũ in [{lo:.6}, {hi:.6}], C̄ = {:.6}", c.cbar),
        ));
    }
    let n = ctx.n_max.min(6);
    match pressure_estimate(ctx.spec, &ctx.sub, &ctx.pot, n, BracketConfig::default(), ctx.cfg.capacity()) {
        Ok(est) => {
            let slack = 1e-12;
            let inside = est.lower - slack <= eig.log_lambda && eig.log_lambda <= est.upper + slack;
            out.push(Check::new(
                "pressure_bracket",
                inside,
                Some(est.width),
                format!("log λ = {:.9} in [{:.9}, {:.9}] at n = {n}", eig.log_lambda, est.lower, est.upper),
            ));
            let mut sub_ok = true;
            for a in &est.levels {
                for b in &est.levels {
                    if let Some(c) = est.levels.iter().find(|c| c.n == a.n + b.n) {
                        sub_ok &= c.log_upper <= a.log_upper + b.log_upper + 1e-12;
                    }
                }
            }
            out.push(Check::new("submultiplicativity", sub_ok, None, "certified upper sums, all computed pairs"));
        }
        Err(e) => out.push(Check::error("pressure_bracket", e)),
    }
    let n = ctx.n_max.min(5);
    match tile_measures(ctx.spec, &ctx.sub, &ctx.pot, n, &eig, MeasureConfig::default(), ctx.cfg.capacity()) {
        Ok((_, mu)) => {
            match gibbs_constants(ctx.spec, &ctx.sub, &ctx.pot, &mu, eig.log_lambda) {
                Ok(g) => {
                    let theory = consts.map(|c| c.gibbs_constant(eig.lambda)).unwrap_or(f64::INFINITY);
                    out.push(Check::new(
                        "gibbs",
                        g.c_observed <= theory && g.zero_weight_tiles == 0,
                        Some(g.c_observed),
                        format!("observed {:.6} against {theory:.6e} at n = {n}", g.c_observed),
                    ));
                }
                Err(e) => out.push(Check::error("gibbs", e)),
            }
            let worst = BASIS
                .iter()
                .map(|g| invariance_defect(ctx.spec, &mu, |p| g.eval(p.face, p.x, p.y)).abs())
                .fold(0.0, f64::max);
            out.push(Check::new("invariance", worst <= 0.02, Some(worst), format!("basis functions at n = {n}")));
        }
        Err(e) => out.push(Check::error("gibbs", e)),
    }
}

fn rate_check(ctx: &Context) -> Check {
    let curve = match ctx.curve() {
        Ok(c) => c,
        Err(e) => return Check::error("rate", e),
    };
    let f = match RateFunction::new(&curve) {
        Ok(f) => f,
        Err(e) => return Check::error("rate", e),
    };
    let (xi, i) = match f.rate(f.range().gamma_phi) {
        Ok(v) => v,
        Err(e) => return Check::error("rate", e),
    };
    let alphas = tilepress_core::ldp::alpha_grid(&f.range(), ctx.cfg.ldp.alpha_count.max(3));
    let legendre = match rate_function(&curve, &alphas) {
        Ok(t) => t.max_legendre_residual(),
        Err(e) => return Check::error("rate", e),
    };
    Check::new(
        "rate",
        i.abs() <= 1e-6 && (xi - 1.0).abs() <= 1e-6 && legendre <= 1e-4,
        Some(legendre),
        format!("I(γ) = {i:.2e}, ξ(γ) - 1 = {:.2e}, Legendre residual {legendre:.2e}", xi - 1.0),
    )
}

/// Runs the property suite. Fails with [`CliError::Verification`] after
/// writing the report when any check fails.
pub fn verify(ctx: &Context, with_rate: bool, sink: &mut Sink) -> Result<VerifyReport, CliError> {
    let mut checks = vec![gluing(ctx), matrix_powers(ctx), cocycle(ctx), pairs(ctx)];
    thermo_checks(ctx, &mut checks);
    if with_rate {
        checks.push(rate_check(ctx));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let report = VerifyReport { checks, failed };
    sink.csv(
        "verify",
        &["check", "pass", "value", "detail"],
        report.checks.iter().map(|c| {
            vec![c.name.clone(), c.pass.to_string(), c.value.map(real).unwrap_or_default(), c.detail.clone()]
        }),
    )?;
    sink.json("verify", &report)?;
    Ok(report)
}
