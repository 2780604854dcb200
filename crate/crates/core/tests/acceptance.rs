//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL` line with the measured quantities.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use common::*;
use ensembles::analysis::*;
use ensembles::cli::{parse_config, run};
use ensembles::exact::{Distribution, ExactEngine, StateSpace, Support, DEFAULT_BUDGET};
use ensembles::gibbs::{GibbsSampler, McmcParams};
use ensembles::model::{Boundary, EnsembleSpec, Kernel, PathConfig};
use ensembles::oracle::{GridSpec, PolymerBoundary, PolymerTilt};
use rand::Rng;

fn report(id: u32, pass: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ensembles::cli::RunConfig {
    let text = std::fs::read_to_string(configs().join(name)).unwrap();
    parse_config(&text).unwrap()
}

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

fn random_state<R: Rng>(n: usize, x_max: i64, rng: &mut R) -> Vec<i64> {
    let budget = ensembles::exact::Budget {
        max_entries: DEFAULT_BUDGET,
    };
    let space = StateSpace::enumerate(n, x_max, &budget).unwrap();
    space.state(rng.random_range(0..space.len())).to_vec()
}

#[test]
fn criterion_01_gibbs_property() {
    let started = Instant::now();
    let mut rng = ensembles::rng::stream(2024, 0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..60 {
        let n = rng.random_range(1..=2usize);
        let len = rng.random_range(2..=6i64);
        let x_max = rng.random_range(n as i64 + 2..=6);
        let lambda = rng.random_range(0.2..=1.0);
        let b = 1.0 + rng.random_range(0.01..=3.0);
        let kernel = if rng.random_bool(0.5) {
            Kernel::simple()
        } else {
            Kernel::lazy()
        };
        let tilt = linear_tilt(1.0, b, lambda);
        let u = random_state(n, x_max, &mut rng);
        // a bridge endpoint reached by an actual walk path, so the bridge is feasible
        let walk_spec = walk(n, 0, len, &u, x_max);
        let walk_engine = ExactEngine::new(&walk_spec, &kernel, &tilt).unwrap();
        let seed = rng.random();
        let v = walk_engine.exact_sample(seed, 1).unwrap()[0].column(len).to_vec();
        let spec = bridge(n, 0, len, &u, &v, x_max);
        let engine = ExactEngine::new(&spec, &kernel, &tilt).unwrap();
        let path = &engine.exact_sample(seed ^ 1, 1).unwrap()[0];
        let k = rng.random_range(0..len);
        let l = rng.random_range(k + 1..=len);
        let law = engine
            .conditional_bridge_law(k, l, path.column(k), path.column(l))
            .unwrap();
        let tv = law.diagnostic_tv.expect("instance small enough to enumerate");
        worst = worst.max(tv);
        checked += 1;
    }
    let secs = started.elapsed().as_secs_f64();
    report(
        1,
        checked >= 50 && worst <= 1e-10 && secs < 10.0,
        format!("instances={checked} max_diagnostic_tv={worst:.3e} seconds={secs:.2}"),
    );
}

#[test]
fn criterion_02_exact_sampler_fidelity() {
    let started = Instant::now();
    let spec = EnsembleSpec::with_default_cutoff(
        1,
        0,
        4,
        Boundary::Walk { u: vec![1] },
        &linear_tilt(1.0, 2.0, 0.5),
    )
    .unwrap();
    let tilt = linear_tilt(1.0, 2.0, 0.5);
    let engine = ExactEngine::new(&spec, &Kernel::simple(), &tilt).unwrap();
    let samples = engine.exact_sample(99, 100_000).unwrap();
    let result = engine.partition().unwrap();
    let mut min_p: f64 = 1.0;
    for t in 1..=4 {
        let exact = result.marginal(t).unwrap();
        let mut counts = vec![0u64; exact.len()];
        for p in &samples {
            counts[(p.get(0, t) - 1) as usize] += 1;
        }
        min_p = min_p.min(chi_square_p(&counts, exact.probs()));
    }
    let secs = started.elapsed().as_secs_f64();
    report(
        2,
        min_p > 0.001 && secs < 30.0,
        format!("min_chi_square_p={min_p:.4} seconds={secs:.2}"),
    );
}

fn empirical(samples: &[PathConfig], t: i64, x_max: i64) -> Distribution {
    let mut w = vec![0.0; x_max as usize];
    for p in samples {
        w[(p.get(0, t) - 1) as usize] += 1.0;
    }
    Distribution::from_weights(
        Support::Chamber {
            n: 1,
            x_max,
            times: vec![t],
        },
        &w,
    )
    .unwrap()
}

#[test]
fn criterion_03_mcmc_correctness() {
    let started = Instant::now();
    let tilt = linear_tilt(1.0, 2.0, 0.3);
    let spec = EnsembleSpec::with_default_cutoff(
        1,
        -10,
        10,
        Boundary::Bridge {
            u: vec![1],
            v: vec![1],
        },
        &tilt,
    )
    .unwrap();
    let kernel = Kernel::simple();
    let sampler = GibbsSampler::new(&spec, &kernel, &tilt).unwrap();
    let params = McmcParams {
        sweeps: 15_000,
        burn_in: 200,
        chains: 8,
        seed: 3,
        ..McmcParams::default()
    };
    let (samples, diag) = sampler.sample_paths(&params).unwrap();
    let ess = diag.observables[0].effective_samples.unwrap();
    let boundaries_kept = samples
        .iter()
        .all(|p| p.column(-10) == [1] && p.column(10) == [1]);
    let exact = ExactEngine::new(&spec, &kernel, &tilt).unwrap().partition().unwrap();
    let worst = (-9..=9)
        .map(|t| {
            empirical(&samples, t, spec.x_max())
                .tv(&exact.marginal(t).unwrap())
                .unwrap()
        })
        .fold(0.0f64, f64::max);
    let secs = started.elapsed().as_secs_f64();
    report(
        3,
        worst <= 0.02 && ess >= 1e5 && boundaries_kept && secs < 120.0,
        format!(
            "max_tv={worst:.4} effective_samples={ess:.0} boundaries_kept={boundaries_kept} seconds={secs:.2}"
        ),
    );
}

#[test]
fn criterion_04_mixing_decay() {
    let started = Instant::now();
    let setup = |first, second| MixingSetup {
        n: 1,
        kernel: Kernel::simple(),
        tilt: linear_tilt(1.0, 2.0, 0.5),
        t_lattice: 1,
        ks: (1..=6).collect(),
        first,
        second,
        x_max: None,
    };
    let bridge = mixing_curve(&setup(
        Boundary::Bridge {
            u: vec![1],
            v: vec![1],
        },
        Boundary::Bridge {
            u: vec![3],
            v: vec![3],
        },
    ))
    .unwrap();
    let walk = mixing_curve(&setup(
        Boundary::Walk { u: vec![1] },
        Boundary::Walk { u: vec![3] },
    ))
    .unwrap();
    let ok = |r: &MixingReport| r.strictly_decreasing && r.r_squared.is_some_and(|x| x >= 0.9);
    let secs = started.elapsed().as_secs_f64();
    report(
        4,
        ok(&bridge) && ok(&walk) && secs < 60.0,
        format!(
            "bridge c2={:.4} R2={:.4}; walk c2={:.4} R2={:.4}; seconds={secs:.2}",
            bridge.c2().unwrap(),
            bridge.r_squared.unwrap(),
            walk.c2().unwrap(),
            walk.r_squared.unwrap()
        ),
    );
}

fn invariance_setup() -> InvarianceSetup {
    InvarianceSetup {
        n: 1,
        m_cont: 1.0,
        lambdas: vec![0.4, 0.2, 0.1],
        kernel: Kernel::uniform(2).unwrap(),
        a: 1.0,
        b: 2.0,
        boundary: LimitBoundary::Walk { u: vec![1.0] },
        dx: 0.05,
        height_cap: None,
        t_obs: 0.0,
    }
}

#[test]
fn criterion_05_invariance_principle() {
    let started = Instant::now();
    let setup = invariance_setup();
    let pts = invariance_check(&setup).unwrap();
    let d: Vec<f64> = pts.iter().map(|p| p.distance).collect();
    let (coarse, fine) = invariance_refinement(&setup, 0.1, 0.025).unwrap();
    let refinement_ok = (fine - coarse).abs() < 0.25 * coarse;
    let secs = started.elapsed().as_secs_f64();
    report(
        5,
        non_increasing(&d) && d[2] <= 0.08 && refinement_ok && secs < 300.0,
        format!(
            "distances={d:.4?} refinement={coarse:.4}->{fine:.4} seconds={secs:.2}"
        ),
    );
}

#[test]
fn criterion_06_convergence_to_mu() {
    let started = Instant::now();
    let setup = |boundary| ConvergenceSetup {
        n: 1,
        lambdas: vec![0.5, 0.3, 0.2],
        a: 1.0,
        b: 2.0,
        kernel: Kernel::uniform(2).unwrap(),
        boundary,
        half_scale: 1.0,
        dx: 0.05,
        height_cap: None,
        mcmc: McmcParams::default(),
    };
    let tv = |b| -> Vec<f64> {
        convergence_to_mu(&setup(b))
            .unwrap()
            .iter()
            .map(|p| p.tv)
            .collect()
    };
    let walk = tv(LimitBoundary::Walk { u: vec![1.0] });
    let bridge = tv(LimitBoundary::Bridge {
        u: vec![1.0],
        v: vec![1.0],
    });
    let gap = (walk[2] - bridge[2]).abs();
    let secs = started.elapsed().as_secs_f64();
    report(
        6,
        non_increasing(&walk) && non_increasing(&bridge) && gap <= 0.05 && secs < 600.0,
        format!("walk={walk:.4?} bridge={bridge:.4?} final_gap={gap:.4} seconds={secs:.2}"),
    );
}

#[test]
fn criterion_07_dominance_and_sandwich() {
    let started = Instant::now();
    let tilt = PolymerTilt::new(1.0, 2.0).unwrap();
    let mut gating = Vec::new();
    for (n, u, w) in [
        (1, vec![0.5], vec![1.5]),
        (2, vec![1.0, 0.5], vec![2.0, 1.0]),
    ] {
        let grid = GridSpec::new(0.05, 8.0, 1.0).unwrap();
        let fixed = |x: &Vec<f64>| PolymerBoundary::Fixed {
            u: x.clone(),
            v: x.clone(),
        };
        let free = |x: &Vec<f64>| PolymerBoundary::FreeRight { u: Some(x.clone()) };
        for t in [-0.5, 0.0, 0.5] {
            gating.push(oracle_monotonicity(n, tilt, &grid, &fixed(&u), &fixed(&w), t).unwrap());
            gating.push(oracle_monotonicity(n, tilt, &grid, &free(&u), &free(&w), t).unwrap());
        }
        gating.extend(oracle_sandwich(n, tilt, &grid).unwrap());
    }
    let violations = gating.iter().filter(|r| !r.pass).count();
    let walk = walk_dominance(
        &Kernel::simple(),
        &linear_tilt(1.0, 2.0, 0.5),
        -6,
        6,
        &[2, 1],
        &[4, 3],
        70,
        0,
    )
    .unwrap();
    let secs = started.elapsed().as_secs_f64();
    report(
        7,
        violations == 0 && secs < 120.0,
        format!(
            "oracle_checks={} violations={violations} walk_exploratory_max_violation={:.3e} seconds={secs:.2}",
            gating.len(),
            walk.max_violation
        ),
    );
}

#[test]
fn criterion_08_partition_lower_bound() {
    let started = Instant::now();
    let tilt = linear_tilt(1.0, 2.0, 0.5);
    let ts = [8, 16, 32, 64, 128];
    let one = log_partition_slope(&[1], &ts, &Kernel::simple(), &tilt, 67).unwrap();
    let two = log_partition_slope(&[2, 1], &ts, &Kernel::simple(), &tilt, 67).unwrap();
    let bounded = |r: &SlopeReport| r.second_differences.iter().all(|d| d.abs() < 1.0);
    let secs = started.elapsed().as_secs_f64();
    report(
        8,
        one.pass && two.pass && bounded(&one) && bounded(&two) && secs < 120.0,
        format!(
            "n=1 slope={:.4} stability={:.2e}; n=2 slope={:.4} stability={:.2e}; seconds={secs:.2}",
            one.slope, one.stability, two.slope, two.stability
        ),
    );
}

#[test]
fn criterion_09_good_blocks() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = run(&load("blocks.cfg"), dir.path()).unwrap();
    let payload = &out.envelope["payload"];
    let density = payload["density"].as_f64().unwrap();
    let text = std::fs::read_to_string(dir.path().join("blocks.csv")).unwrap();
    let probs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    let secs = started.elapsed().as_secs_f64();
    report(
        9,
        density > 0.0 && non_increasing(&probs) && secs < 300.0,
        format!(
            "density={density:.4} nu={:.4} prob_below={probs:.4?} seconds={secs:.2}",
            payload["nu"].as_f64().unwrap()
        ),
    );
}

/// Output files with the wall-clock timings blanked out.
fn artifacts(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().to_string();
            let mut text = std::fs::read_to_string(&p).unwrap();
            if name == "results.json" {
                let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
                v["timings"] = serde_json::Value::Null;
                text = v.to_string();
            }
            (name, text)
        })
        .collect()
}

fn run_with_threads(cfg: &ensembles::cli::RunConfig, threads: usize, dir: &Path) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| run(cfg, dir)).unwrap();
}

#[test]
fn criterion_10_determinism() {
    let started = Instant::now();
    let mut names: Vec<String> = std::fs::read_dir(configs())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .filter(|n| n.ends_with(".cfg"))
        .collect();
    names.sort();
    let mut mismatches = Vec::new();
    let mut experiments = std::collections::BTreeSet::new();
    for name in &names {
        let cfg = load(name);
        experiments.insert(cfg.experiment().name());
        let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
        run_with_threads(&cfg, 1, dirs[0].path());
        run_with_threads(&cfg, 1, dirs[1].path());
        run_with_threads(&cfg, 8, dirs[2].path());
        let base = artifacts(dirs[0].path());
        if base != artifacts(dirs[1].path()) || base != artifacts(dirs[2].path()) {
            mismatches.push(name.clone());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    report(
        10,
        mismatches.is_empty() && experiments.len() == 9,
        format!(
            "configs={} experiments={} mismatched={mismatches:?} seconds={secs:.2}",
            names.len(),
            experiments.len()
        ),
    );
}
