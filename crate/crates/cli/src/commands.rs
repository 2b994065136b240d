use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use tilepress_core::cells::{enumerate_tiles, tile_count};
use tilepress_core::ldp::{
    alpha_grid, deviation_report, pressure_curve, CurveMethod, DeviationConfig, DeviationReport, EnergyRange,
    PressureCurve, RateFunction, RateRow,
};
use tilepress_core::subsystem::{classify, entropy, Subsystem};
use tilepress_core::thermo::{
    distortion_constants, eigen_pair, gibbs_constants, pressure_estimate, tile_measures, BracketConfig,
    DistortionConstants, EigenPair, MeasureConfig, DEFAULT_C0,
};
use tilepress_core::{Color, MapSpec, Potential};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{real, Sink};

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub n_max: Option<u32>,
    /// Adds a face-dependent constant to the potential, breaking continuity
    /// across the equator.
    pub inject_discontinuity: Option<f64>,
}

/// Shared state of one invocation.
pub struct Context {
    pub cfg: RunConfig,
    pub spec: MapSpec,
    pub sub: Subsystem,
    pub pot: Potential,
    pub n_max: u32,
    /// `--n-max` when given on the command line.
    pub n_override: Option<u32>,
}

impl Context {
    pub fn new(cfg: RunConfig, opts: &Options) -> Result<Self, CliError> {
        let sub = cfg.subsystem()?;
        let mut pot = cfg.potential();
        if let Some(a) = opts.inject_discontinuity {
            pot = pot.with_face_jump(a);
        }
        let n_max = opts.n_max.unwrap_or(cfg.levels.n_max);
        if n_max == 0 {
            return Err(CliError::Invalid { key: "--n-max".into(), message: "must be positive".into() });
        }
        Ok(Self { spec: cfg.spec(), sub, pot, n_max, n_override: opts.n_max, cfg })
    }

    /// Fails with a suggested level when the level-`n` tiles exceed capacity.
    pub fn check_capacity(&self, n: u32) -> Result<(), CliError> {
        let cap = self.cfg.capacity();
        let count = tile_count(&self.sub, n);
        if count <= cap {
            return Ok(());
        }
        let fits = (1..n).rev().find(|&k| tile_count(&self.sub, k) <= cap);
        Err(CliError::Capacity {
            message: format!("level {n} has {count} tiles, capacity is {cap}"),
            suggestion: match fits {
                Some(k) => format!("try --n-max {k}"),
                None => "raise levels.capacity".into(),
            },
        })
    }

    pub fn n_f(&self) -> Option<u32> {
        classify(&self.sub, 4).ok().and_then(|c| c.n_f_irreducible)
    }

    pub fn constants(&self) -> Option<DistortionConstants> {
        self.n_f().map(|n| distortion_constants(self.spec, &self.pot, n, DEFAULT_C0))
    }

    pub fn eigen(&self) -> Result<EigenPair, CliError> {
        Ok(eigen_pair(self.spec, &self.sub, &self.pot, self.cfg.operator())?)
    }

    pub fn curve(&self) -> Result<PressureCurve, CliError> {
        let t = self.cfg.ldp.t_values();
        Ok(pressure_curve(self.spec, &self.pot, &t, CurveMethod::Eigen, self.cfg.operator())?)
    }
}

#[derive(Serialize)]
struct Describe {
    m: u64,
    deg: u64,
    tiles_n1: u128,
    pairs_n1: u64,
    post_card: u32,
    subsystem_size: usize,
    labels: Vec<String>,
    tile_matrix: [[u64; 2]; 2],
    irreducible: bool,
    primitive: bool,
    strongly_irreducible: bool,
    strongly_primitive: bool,
    n_f: Option<u32>,
}

pub fn describe(ctx: &Context, sink: &mut Sink) -> Result<Value, CliError> {
    let c = classify(&ctx.sub, 4)?;
    let d = Describe {
        m: ctx.spec.m(),
        deg: ctx.spec.degree(),
        tiles_n1: tile_count(&ctx.sub, 1),
        pairs_n1: ctx.spec.degree(),
        post_card: 4,
        subsystem_size: ctx.sub.len(),
        labels: ctx.sub.labels().map(|l| l.to_string()).collect(),
        tile_matrix: ctx.sub.tile_matrix().a,
        irreducible: c.irreducible,
        primitive: c.primitive,
        strongly_irreducible: c.strongly_irreducible,
        strongly_primitive: c.strongly_primitive,
        n_f: c.n_f(),
    };
    sink.json("describe", &d)?;
    Ok(serde_json::to_value(d).expect("serializable"))
}

pub fn entropy_cmd(ctx: &Context, sink: &mut Sink) -> Result<Value, CliError> {
    let a = ctx.sub.tile_matrix();
    let v = json!({ "h_top": entropy(&a), "rho": a.spectral_radius(), "A": a.a });
    sink.json("entropy", &v)?;
    Ok(v)
}

fn eigen_dump(sink: &mut Sink, eig: &EigenPair) -> Result<(), CliError> {
    let u = &eig.u_tilde;
    let rows = Color::ALL.into_iter().flat_map(|c| {
        (0..u.g * u.g).map(move |k| {
            let (x, y) = u.node(k);
            vec![
                c.letter().to_string(),
                (k % u.g).to_string(),
                (k / u.g).to_string(),
                real(x),
                real(y),
                real(u.values[c.index()][k]),
                real(eig.eigenmeasure.values[c.index()][k]),
            ]
        })
    });
    sink.csv("eigen", &["face", "p", "q", "x", "y", "u", "mass"], rows)
}

pub fn pressure(ctx: &Context, sink: &mut Sink) -> Result<Value, CliError> {
    ctx.check_capacity(ctx.n_max)?;
    let est = pressure_estimate(ctx.spec, &ctx.sub, &ctx.pot, ctx.n_max, BracketConfig::default(), ctx.cfg.capacity())?;
    sink.csv(
        "pressure_levels",
        &["n", "log_z_centre", "log_z_upper", "rate_lower", "rate_upper"],
        est.levels.iter().map(|l| {
            vec![l.n.to_string(), real(l.log_centre), real(l.log_upper), real(l.rate_lower), real(l.rate_upper)]
        }),
    )?;
    let eig = ctx.eigen().ok();
    if let Some(e) = &eig {
        eigen_dump(sink, e)?;
    }
    let consts = ctx.constants();
    let v = json!({
        "lambda": eig.as_ref().map(|e| e.lambda),
        "log_lambda": eig.as_ref().map(|e| e.log_lambda),
        "residual": eig.as_ref().map(|e| e.residual),
        "C0": consts.map(|c| c.c0),
        "C1": consts.map(|c| c.c1),
        "Cbar": consts.map(|c| c.cbar),
        "P_bracket": [est.lower, est.upper],
        "P_estimate": est.estimate,
        "n_max": ctx.n_max,
    });
    sink.json("pressure", &v)?;
    Ok(v)
}

pub fn gibbs(ctx: &Context, sink: &mut Sink) -> Result<Value, CliError> {
    let n = ctx.n_max;
    ctx.check_capacity(n)?;
    let eig = ctx.eigen()?;
    let (m, mu) = tile_measures(ctx.spec, &ctx.sub, &ctx.pot, n, &eig, MeasureConfig::default(), ctx.cfg.capacity())?;
    let report = gibbs_constants(ctx.spec, &ctx.sub, &ctx.pot, &mu, eig.log_lambda)?;
    let theory = ctx.constants().map(|c| c.gibbs_constant(eig.lambda));
    let spec = ctx.spec;
    sink.csv(
        "tile_measures",
        &["address", "color", "position", "m", "mu"],
        mu.entries().map(|(b, w)| {
            let addr = b.address(spec).map(|a| a.to_string()).unwrap_or_default();
            vec![addr, b.color().letter().to_string(), b.position().letter().to_string(), real(m.weight(&b)), real(w)]
        }),
    )?;
    let v = json!({
        "level": n,
        "log_lambda": eig.log_lambda,
        "residual": eig.residual,
        "gibbs": report,
        "c_theory": theory,
        "within_theory": theory.map(|t| report.c_observed <= t),
    });
    sink.json("gibbs", &v)?;
    Ok(v)
}

#[derive(Serialize)]
struct RateSummary<'a> {
    gamma: f64,
    alpha_hats: [f64; 2],
    max_legendre_residual: f64,
    rows: &'a [RateRow],
}

fn curve_csv(sink: &mut Sink, curve: &PressureCurve) -> Result<(), CliError> {
    sink.csv(
        "pressure_curve",
        &["t", "p", "dp", "ddp"],
        (0..curve.t.len()).map(|k| vec![real(curve.t[k]), real(curve.p[k]), real(curve.dp[k]), real(curve.ddp[k])]),
    )
}

pub fn rate(ctx: &Context, sink: &mut Sink) -> Result<Value, CliError> {
    let curve = ctx.curve()?;
    curve_csv(sink, &curve)?;
    let f = RateFunction::new(&curve)?;
    let range = f.range();
    let alphas = if ctx.cfg.ldp.alphas.is_empty() {
        alpha_grid(&range, ctx.cfg.ldp.alpha_count)
    } else {
        ctx.cfg.ldp.alphas.clone()
    };
    let table = tilepress_core::ldp::rate_function(&curve, &alphas)?;
    sink.csv(
        "rate_table",
        &["alpha", "xi", "rate", "rate_legendre"],
        table.rows.iter().map(|r| vec![real(r.alpha), real(r.xi), real(r.rate), real(r.rate_legendre)]),
    )?;
    let s = RateSummary {
        gamma: range.gamma_phi,
        alpha_hats: [range.alpha_min_hat, range.alpha_max_hat],
        max_legendre_residual: table.max_legendre_residual(),
        rows: &table.rows,
    };
    sink.json("rate", &s)?;
    Ok(serde_json::to_value(&s).expect("serializable"))
}

/// Levels `α` on both sides of the mean at 60% of each half-range.
pub fn default_alphas(range: &EnergyRange) -> Vec<f64> {
    vec![
        range.gamma_phi - 0.6 * (range.gamma_phi - range.alpha_min_hat),
        range.gamma_phi + 0.6 * (range.alpha_max_hat - range.gamma_phi),
    ]
}

pub fn deviation(ctx: &Context, sink: &mut Sink) -> Result<Value, CliError> {
    let [lo, hi] = ctx.cfg.ldp.n_range;
    let full = Subsystem::full(ctx.spec);
    let top = ctx.n_override.map_or(hi, |n| hi.min(n));
    if top < lo {
        return Err(CliError::Invalid { key: "--n-max".into(), message: format!("below ldp.n_range start {lo}") });
    }
    let count = tile_count(&full, top);
    if count > ctx.cfg.capacity() {
        let fits = (lo..top).rev().find(|&k| tile_count(&full, k) <= ctx.cfg.capacity());
        return Err(CliError::Capacity {
            message: format!("level {top} has {count} tiles, capacity is {}", ctx.cfg.capacity()),
            suggestion: fits.map_or("raise levels.capacity".into(), |k| format!("try --n-max {k}")),
        });
    }
    let curve = ctx.curve()?;
    let f = RateFunction::new(&curve)?;
    let range = f.range();
    let alphas = if ctx.cfg.ldp.alphas.is_empty() { default_alphas(&range) } else { ctx.cfg.ldp.alphas.clone() };
    let eig = eigen_pair(ctx.spec, &full, &ctx.pot, ctx.cfg.operator())?;
    let dcfg = DeviationConfig { edge: ctx.cfg.ldp.e0, cap: ctx.cfg.capacity(), ..DeviationConfig::default() };
    let reports = deviation_report(ctx.spec, &ctx.pot, &alphas, lo..=top, &f, &eig, dcfg)?;
    sink.csv(
        "deviation",
        &[
            "alpha",
            "n",
            "mu_tiles",
            "mu_pairs",
            "mu_pairs_certain",
            "bound",
            "holds",
            "slope",
            "pairs_certain",
            "pairs_possible",
            "strongly_primitive",
        ],
        reports.iter().flat_map(|rep| {
            rep.rows.iter().map(move |r| {
                vec![
                    real(rep.alpha),
                    r.n.to_string(),
                    real(r.mu_tiles),
                    real(r.mu_pairs),
                    real(r.mu_pairs_certain),
                    real(r.bound),
                    r.holds.to_string(),
                    real(r.slope),
                    r.pairs_certain.to_string(),
                    r.pairs_possible.to_string(),
                    r.strongly_primitive.map_or(String::new(), |b| b.to_string()),
                ]
            })
        }),
    )?;
    let v = json!({
        "gamma": range.gamma_phi,
        "alpha_hats": [range.alpha_min_hat, range.alpha_max_hat],
        "edge": ctx.cfg.ldp.e0,
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    sink.json("deviation", &v)?;
    Ok(v)
}

fn report_json(rep: &DeviationReport) -> Value {
    json!({
        "alpha": rep.alpha,
        "tail": rep.tail,
        "xi": rep.xi,
        "rate": rep.rate,
        "first_valid_N": rep.first_valid_n,
        "first_bound_N": rep.first_bound_n,
        "C_alpha_components": { "C_alpha": rep.c_alpha, "C_mu": rep.c_mu, "D": rep.distortion },
        "rows": rep.rows,
    })
}

pub fn tiles(ctx: &Context, sink: &mut Sink) -> Result<Value, CliError> {
    let n = ctx.n_max;
    ctx.check_capacity(n)?;
    let list = enumerate_tiles(ctx.spec, &ctx.sub, n, ctx.cfg.capacity())?;
    let spec = ctx.spec;
    sink.csv(
        "tiles",
        &["address", "face", "color", "position", "x0", "y0", "side", "touches_equator"],
        list.iter().map(|t| {
            let r = t.tile_box.region(spec);
            vec![
                t.address.to_string(),
                r.face.letter().to_string(),
                t.tile_box.color().letter().to_string(),
                t.tile_box.position().letter().to_string(),
                real(r.x0),
                real(r.y0),
                real(r.side),
                r.touches_equator.to_string(),
            ]
        }),
    )?;
    let v = json!({ "level": n, "tiles": list.len() });
    sink.json("tiles", &v)?;
    Ok(v)
}
