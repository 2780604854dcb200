use rayon::prelude::*;
use serde_json::{json, Value as Json};

use super::config::{ConfigError, Experiment, RunConfig};
use super::csv::{Cell, Table};
use super::CliError;
use crate::analysis::{
    convergence_to_mu, good_blocks_within, invariance_check, invariance_refinement,
    log_partition_slope, mixing_curve, oracle_monotonicity, oracle_sandwich, walk_dominance,
    ConvergenceSetup, DominanceReport, InvarianceSetup, LimitBoundary, MixingSetup,
};
use crate::exact::{Distribution, ExactEngine};
use crate::gibbs::GibbsSampler;
use crate::model::{default_cutoff, h_scale, Boundary, EnsembleSpec, PathConfig, TiltSpec};
use crate::oracle::{
    default_height_cap, polymer_marginal, stationary_density, GridSpec, PolymerBoundary,
    PolymerTilt,
};

/// What an experiment produced, before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub payload: Json,
    pub tables: Vec<Table>,
    /// `Some` for experiments with a pass/fail verdict.
    pub verdict: Option<bool>,
    /// Extra wall-clock figures; not reproducible.
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    fn new(payload: Json, tables: Vec<Table>, verdict: Option<bool>) -> Self {
        Self {
            payload,
            tables,
            verdict,
            timings: Vec::new(),
        }
    }
}

fn need<T>(x: Option<T>, key: &str) -> Result<T, CliError> {
    x.ok_or_else(|| ConfigError::MissingRequired(key.into()).into())
}

fn lattice_boundary(cfg: &RunConfig, u: &str, v: &str) -> Result<Boundary, CliError> {
    let start = need(cfg.ints(u), u)?.to_vec();
    Ok(if cfg.is_bridge()? {
        Boundary::Bridge {
            u: start,
            v: need(cfg.ints(v), v)?.to_vec(),
        }
    } else {
        Boundary::Walk { u: start }
    })
}

fn limit_boundary(cfg: &RunConfig) -> Result<LimitBoundary, CliError> {
    let u = need(cfg.floats("boundary.u_cont"), "boundary.u_cont")?.to_vec();
    Ok(if cfg.is_bridge()? {
        LimitBoundary::Bridge {
            u,
            v: need(cfg.floats("boundary.v_cont"), "boundary.v_cont")?.to_vec(),
        }
    } else {
        LimitBoundary::Walk { u }
    })
}

struct Lattice {
    spec: EnsembleSpec,
    tilt: TiltSpec,
}

fn lattice(cfg: &RunConfig, u: &str, v: &str) -> Result<Lattice, CliError> {
    let tilt = cfg.tilt(need(cfg.lambda(), "model.lambda")?)?;
    let boundary = lattice_boundary(cfg, u, v)?;
    let x_max = cfg
        .int("engine.x_max")
        .unwrap_or_else(|| default_cutoff(&tilt, boundary.top()));
    let m = need(cfg.int("window.m"), "window.m")?;
    let n = need(cfg.int("window.n"), "window.n")?;
    let spec = EnsembleSpec::new(cfg.n(), m, n, boundary, x_max)?;
    Ok(Lattice { spec, tilt })
}

fn non_increasing(xs: impl IntoIterator<Item = f64>) -> bool {
    let xs: Vec<f64> = xs.into_iter().collect();
    xs.windows(2).all(|w| w[1] <= w[0])
}

fn top_curve_rows(table: &mut Table, t: i64, law: &Distribution) -> Result<(), CliError> {
    let top = law.coordinate(0)?;
    for (x, &p) in top.atoms().unwrap().iter().zip(top.probs()) {
        if p > 0.0 {
            table.push(vec![Cell::Int(t), Cell::Int(*x as i64), Cell::Real(p)]);
        }
    }
    Ok(())
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.experiment() {
        Experiment::Exact => exact(cfg),
        Experiment::Sample => sample(cfg),
        Experiment::Mixing => mixing(cfg),
        Experiment::Invariance => invariance(cfg),
        Experiment::Converge => converge(cfg),
        Experiment::Dominance => dominance(cfg),
        Experiment::Blocks => blocks(cfg),
        Experiment::Slope => slope(cfg),
        Experiment::Oracle => oracle(cfg),
    }
}

fn exact(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Lattice { spec, tilt } = lattice(cfg, "boundary.u", "boundary.v")?;
    let engine = ExactEngine::new(&spec, &cfg.kernel()?, &tilt)?;
    let result = engine.partition()?;
    let mut table = Table::new("marginal", &["t", "x", "prob"]);
    let mut means = Vec::new();
    for t in spec.m_left()..=spec.n_right() {
        let law = result.marginal(t)?;
        means.push(law.coordinate(0)?.mean().unwrap());
        top_curve_rows(&mut table, t, &law)?;
    }
    let warnings: Vec<String> = result.warnings.iter().map(|w| format!("{w:?}")).collect();
    let payload = json!({
        "log_z": result.log_z,
        "x_max": spec.x_max(),
        "top_mean_by_time": means,
        "warnings": warnings,
    });
    Ok(Outcome::new(payload, vec![table], None))
}

fn empirical_rows(spec: &EnsembleSpec, paths: &[PathConfig]) -> Table {
    let mut table = Table::new("marginal", &["t", "x", "freq"]);
    for t in spec.m_left()..=spec.n_right() {
        let mut counts = std::collections::BTreeMap::new();
        for p in paths {
            *counts.entry(p.get(0, t)).or_insert(0u64) += 1;
        }
        for (x, c) in counts {
            table.push(vec![
                Cell::Int(t),
                Cell::Int(x),
                Cell::Real(c as f64 / paths.len() as f64),
            ]);
        }
    }
    table
}

fn sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Lattice { spec, tilt } = lattice(cfg, "boundary.u", "boundary.v")?;
    let kernel = cfg.kernel()?;
    if cfg.word("sample.method") == Some("exact") {
        let count = cfg.uint("sample.count").unwrap_or(1000) as usize;
        let engine = ExactEngine::new(&spec, &kernel, &tilt)?;
        let paths = engine.exact_sample(cfg.seed(), count)?;
        let payload = json!({ "method": "exact", "samples": paths.len() });
        return Ok(Outcome::new(payload, vec![empirical_rows(&spec, &paths)], None));
    }
    let sampler = GibbsSampler::new(&spec, &kernel, &tilt)?;
    let (paths, diag) = sampler.sample_paths(&cfg.mcmc())?;
    if paths.is_empty() {
        return Err(CliError::Invalid("the sampler recorded no configurations".into()));
    }
    let observables: Vec<Json> = diag
        .observables
        .iter()
        .map(|o| {
            json!({
                "name": o.name,
                "mean": o.mean,
                "tau": o.tau,
                "effective_samples": o.effective_samples,
            })
        })
        .collect();
    let payload = json!({
        "method": "mcmc",
        "samples": paths.len(),
        "chains": diag.chains,
        "recorded_sweeps": diag.recorded_sweeps,
        "acceptance": diag.acceptance,
        "observables": observables,
    });
    let mut out = Outcome::new(payload, vec![empirical_rows(&spec, &paths)], None);
    out.timings.push(("sweep_seconds".into(), diag.sweep_seconds));
    Ok(out)
}

fn mixing(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = MixingSetup {
        n: cfg.n(),
        kernel: cfg.kernel()?,
        tilt: cfg.tilt(need(cfg.lambda(), "model.lambda")?)?,
        t_lattice: cfg.int("window.t").unwrap_or(1),
        ks: need(cfg.ints("window.k"), "window.k")?.to_vec(),
        first: lattice_boundary(cfg, "boundary.u", "boundary.v")?,
        second: lattice_boundary(cfg, "boundary.u_alt", "boundary.v_alt")?,
        x_max: cfg.int("engine.x_max"),
    };
    let report = mixing_curve(&setup)?;
    let mut table = Table::new("mixing", &["K", "tv", "log_tv"]);
    for &(k, tv) in &report.points {
        table.push(vec![Cell::Int(k), Cell::Real(tv), Cell::Real(tv.ln())]);
    }
    let pass = report.strictly_decreasing && report.r_squared.is_some_and(|r| r >= 0.9);
    let payload = json!({
        "slope": report.slope,
        "intercept": report.intercept,
        "r_squared": report.r_squared,
        "c1": report.c1(),
        "c2": report.c2(),
        "monotone": report.monotone,
        "strictly_decreasing": report.strictly_decreasing,
        "pass": pass,
    });
    Ok(Outcome::new(payload, vec![table], Some(pass)))
}

fn invariance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = InvarianceSetup {
        n: cfg.n(),
        m_cont: cfg.float("window.m_cont").unwrap_or(1.0),
        lambdas: cfg.lambdas(),
        kernel: cfg.kernel()?,
        a: cfg.a(),
        b: cfg.b(),
        boundary: limit_boundary(cfg)?,
        dx: cfg.float("grid.dx").unwrap_or(0.05),
        height_cap: cfg.float("grid.cap"),
        t_obs: cfg.float("window.t_obs").unwrap_or(0.0),
    };
    let points = invariance_check(&setup)?;
    let mut table = Table::new("invariance", &["lambda", "half_width", "distance"]);
    for p in &points {
        table.push(vec![
            Cell::Real(p.lambda),
            Cell::Int(p.half_width),
            Cell::Real(p.distance),
        ]);
    }
    let refinement = match (cfg.float("grid.dx_fine"), setup.lambdas.last()) {
        (Some(fine), Some(&lambda)) => {
            let (coarse, refined) = invariance_refinement(&setup, lambda, fine)?;
            Some(json!({ "lambda": lambda, "dx_fine": fine, "coarse": coarse, "fine": refined }))
        }
        _ => None,
    };
    let pass = non_increasing(points.iter().map(|p| p.distance));
    let payload = json!({ "pass": pass, "refinement": refinement });
    Ok(Outcome::new(payload, vec![table], Some(pass)))
}

fn converge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = ConvergenceSetup {
        n: cfg.n(),
        lambdas: cfg.lambdas(),
        a: cfg.a(),
        b: cfg.b(),
        kernel: cfg.kernel()?,
        boundary: limit_boundary(cfg)?,
        half_scale: cfg.float("window.half_scale").unwrap_or(1.0),
        dx: cfg.float("grid.dx").unwrap_or(0.05),
        height_cap: cfg.float("grid.cap"),
        mcmc: cfg.mcmc(),
    };
    let points = convergence_to_mu(&setup)?;
    let mut table = Table::new("converge", &["lambda", "half_width", "tv", "sampled"]);
    for p in &points {
        table.push(vec![
            Cell::Real(p.lambda),
            Cell::Int(p.half_width),
            Cell::Real(p.tv),
            Cell::Bool(p.sampled),
        ]);
    }
    let pass = non_increasing(points.iter().map(|p| p.tv));
    Ok(Outcome::new(json!({ "pass": pass }), vec![table], Some(pass)))
}

fn oracle_grid(cfg: &RunConfig, a: f64) -> Result<GridSpec, CliError> {
    let cap = cfg
        .float("grid.cap")
        .unwrap_or_else(|| default_height_cap(cfg.n(), a));
    Ok(GridSpec::new(
        cfg.float("grid.dx").unwrap_or(0.05),
        cap,
        cfg.float("window.m_cont").unwrap_or(1.0),
    )?)
}

fn dominance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.n();
    let tilt = PolymerTilt::new(cfg.a(), cfg.b())?;
    let grid = oracle_grid(cfg, tilt.a)?;
    let t = cfg.float("oracle.t").unwrap_or(0.0);
    let u = need(cfg.floats("boundary.u_cont"), "boundary.u_cont")?.to_vec();
    let w = need(cfg.floats("boundary.u_cont_alt"), "boundary.u_cont_alt")?.to_vec();
    if u.iter().zip(&w).any(|(a, b)| a > b) {
        return Err(CliError::Invalid(
            "boundary.u_cont must lie below boundary.u_cont_alt".into(),
        ));
    }
    let fixed = |x: &[f64]| PolymerBoundary::Fixed {
        u: x.to_vec(),
        v: x.to_vec(),
    };
    let free = |x: &[f64]| PolymerBoundary::FreeRight { u: Some(x.to_vec()) };
    let mut rows: Vec<(&str, DominanceReport, bool)> = vec![
        ("monotone_fixed", oracle_monotonicity(n, tilt, &grid, &fixed(&u), &fixed(&w), t)?, true),
        ("monotone_free_right", oracle_monotonicity(n, tilt, &grid, &free(&u), &free(&w), t)?, true),
    ];
    let [first, second] = oracle_sandwich(n, tilt, &grid)?;
    rows.push(("sandwich_zero_free_right", first, true));
    rows.push(("sandwich_free_right_free_both", second, true));

    let Lattice { spec, tilt: lat_tilt } = lattice(cfg, "boundary.u", "boundary.v")?;
    let low = need(cfg.ints("boundary.u"), "boundary.u")?;
    let high = need(cfg.ints("boundary.u_alt"), "boundary.u_alt")?;
    let x_max = spec
        .x_max()
        .max(default_cutoff(&lat_tilt, high[0]))
        .max(cfg.int("engine.x_max").unwrap_or(0));
    let t_lat = (spec.m_left() + spec.n_right()).div_euclid(2);
    let walk = walk_dominance(
        &cfg.kernel()?,
        &lat_tilt,
        spec.m_left(),
        spec.n_right(),
        low,
        high,
        x_max,
        t_lat,
    )?;
    rows.push(("walk_exploratory", walk, false));

    let mut table = Table::new("dominance", &["check", "max_violation", "pass", "gating"]);
    for (name, r, gating) in &rows {
        table.push(vec![
            Cell::from(*name),
            Cell::Real(r.max_violation),
            Cell::Bool(r.pass),
            Cell::Bool(*gating),
        ]);
    }
    let pass = rows.iter().filter(|r| r.2).all(|r| r.1.pass);
    let payload = json!({ "pass": pass, "walk_observation_time": t_lat });
    Ok(Outcome::new(payload, vec![table], Some(pass)))
}

fn blocks(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = lattice(cfg, "boundary.u", "boundary.v")?;
    let y = lattice(cfg, "boundary.u_alt", "boundary.v_alt")?;
    let kernel = cfg.kernel()?;
    let params = cfg.mcmc();
    let sx = GibbsSampler::new(&x.spec, &kernel, &x.tilt)?;
    let sy = GibbsSampler::new(&y.spec, &kernel, &y.tilt)?;
    let chains = params.chains as u64;
    // y chains use the streams after those of x
    let runs = (0..2 * chains)
        .into_par_iter()
        .map(|r| if r < chains { sx.run_chain(&params, r) } else { sy.run_chain(&params, r) })
        .collect::<Result<Vec<_>, _>>()?;
    let (rx, ry) = runs.split_at(chains as usize);
    let xs: Vec<&PathConfig> = rx.iter().flat_map(|r| &r.samples).collect();
    let ys: Vec<&PathConfig> = ry.iter().flat_map(|r| &r.samples).collect();
    if xs.is_empty() {
        return Err(CliError::Invalid("the sampler recorded no configurations".into()));
    }

    let scale = h_scale(x.tilt.potential())?;
    let eta = cfg.float("blocks.eta").unwrap_or(2.0);
    let eps = cfg.float("blocks.eps").unwrap_or(0.1);
    let m_list = cfg.ints("blocks.m_list").unwrap_or(&[1, 2, 3]).to_vec();
    let counts: Vec<Vec<(usize, usize, i64)>> = xs
        .par_iter()
        .zip(ys.par_iter())
        .map(|(a, b)| {
            let (pa, pb) = (a.rescale(&scale), b.rescale(&scale));
            m_list
                .iter()
                .map(|&m| {
                    let r = good_blocks_within(&pa, &pb, eta, eps, m);
                    (r.m0, r.m0_5, r.m_blocks)
                })
                .collect()
        })
        .collect();
    let pairs = counts.len() as f64;
    let last = m_list.len() - 1;
    let covered = counts[0][last].2;
    if covered < 1 {
        return Err(CliError::Invalid("the window holds no complete block".into()));
    }
    let density = counts.iter().map(|c| c[last].0 as f64).sum::<f64>() / (pairs * 2.0 * covered as f64);
    let nu = density / 2.0;
    let mut table = Table::new(
        "blocks",
        &["M", "mean_m0", "mean_m0_5", "mean_density", "prob_below"],
    );
    let mut probs = Vec::new();
    for (j, _) in m_list.iter().enumerate() {
        let m = counts[0][j].2;
        let mean_m0 = counts.iter().map(|c| c[j].0 as f64).sum::<f64>() / pairs;
        let mean_m05 = counts.iter().map(|c| c[j].1 as f64).sum::<f64>() / pairs;
        let below = counts.iter().filter(|c| (c[j].0 as f64) <= nu * m as f64).count() as f64 / pairs;
        probs.push(below);
        table.push(vec![
            Cell::Int(m),
            Cell::Real(mean_m0),
            Cell::Real(mean_m05),
            Cell::Real(if m > 0 { mean_m0 / (2.0 * m as f64) } else { 0.0 }),
            Cell::Real(below),
        ]);
    }
    let pass = density > 0.0 && non_increasing(probs.iter().copied());
    let payload = json!({
        "pairs": counts.len(),
        "eta": eta,
        "eps": eps,
        "density": density,
        "nu": nu,
        "pass": pass,
    });
    Ok(Outcome::new(payload, vec![table], Some(pass)))
}

fn slope(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tilt = cfg.tilt(need(cfg.lambda(), "model.lambda")?)?;
    let w = need(cfg.ints("boundary.u"), "boundary.u")?;
    let ts = need(cfg.ints("window.lengths"), "window.lengths")?;
    let x_max = cfg
        .int("engine.x_max")
        .unwrap_or_else(|| default_cutoff(&tilt, w[0]));
    let report = log_partition_slope(w, ts, &cfg.kernel()?, &tilt, x_max)?;
    let mut table = Table::new("slope", &["T", "log_z"]);
    for &(t, z) in &report.points {
        table.push(vec![Cell::Int(t), Cell::Real(z)]);
    }
    let payload = json!({
        "slope": report.slope,
        "intercept": report.intercept,
        "secants": report.secants,
        "second_differences": report.second_differences,
        "stability": report.stability,
        "x_max": x_max,
        "pass": report.pass,
    });
    Ok(Outcome::new(payload, vec![table], Some(report.pass)))
}

fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.n();
    let tilt = PolymerTilt::new(cfg.a(), cfg.b())?;
    let grid = oracle_grid(cfg, tilt.a)?;
    let kind = cfg.word("oracle.boundary").unwrap_or("stationary");
    let u = cfg.floats("boundary.u_cont").map(<[f64]>::to_vec);
    let law = match kind {
        "stationary" => stationary_density(n, tilt, &grid)?,
        other => {
            let boundary = match other {
                "zero" => PolymerBoundary::ZeroBC,
                "free_right" => PolymerBoundary::FreeRight { u },
                "free_both" => PolymerBoundary::FreeBoth,
                _ => {
                    let u = need(u, "boundary.u_cont")?;
                    let v = cfg.floats("boundary.v_cont").map_or(u.clone(), <[f64]>::to_vec);
                    PolymerBoundary::Fixed { u, v }
                }
            };
            polymer_marginal(n, tilt, &grid, &boundary, cfg.float("oracle.t").unwrap_or(0.0))?
        }
    };
    let top = law.coordinate(0)?;
    let mut table = Table::new("oracle", &["x", "prob"]);
    for (x, &p) in top.atoms().unwrap().iter().zip(top.probs()) {
        table.push(vec![Cell::Real(*x), Cell::Real(p)]);
    }
    let payload = json!({
        "boundary": kind,
        "cells": grid.cells(),
        "dx": grid.dx(),
        "top_mean": top.mean(),
    });
    Ok(Outcome::new(payload, vec![table], None))
}
