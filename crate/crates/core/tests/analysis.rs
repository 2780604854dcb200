mod common;

use common::linear_tilt;
use ensembles::analysis::*;
use ensembles::exact::{Distribution, Support};
use ensembles::model::{Boundary, Kernel, PathConfig, ScaleInfo};
use ensembles::oracle::{GridSpec, PolymerBoundary, PolymerTilt};
use proptest::prelude::*;

fn mixing_setup(first: Boundary, second: Boundary) -> MixingSetup {
    MixingSetup {
        n: 1,
        kernel: Kernel::simple(),
        tilt: linear_tilt(1.0, 2.0, 0.5),
        t_lattice: 1,
        ks: (1..=6).collect(),
        first,
        second,
        x_max: None,
    }
}

#[test]
fn identical_boundaries_do_not_mix() {
    let b = Boundary::Bridge {
        u: vec![1],
        v: vec![1],
    };
    let r = mixing_curve(&mixing_setup(b.clone(), b)).unwrap();
    assert!(r.points.iter().all(|&(_, tv)| tv == 0.0));
    assert!(r.slope.is_none());
}

#[test]
fn bridge_mixing_decays() {
    let r = mixing_curve(&mixing_setup(
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
    assert!(r.strictly_decreasing, "{:?}", r.points);
    assert!(r.r_squared.unwrap() >= 0.9);
    assert!(r.c2().unwrap() > 0.0);
    // single-site oracle: the first point from a direct three-time computation
    assert!((r.points[0].1 - 0.1985).abs() < 5e-4, "{}", r.points[0].1);
}

#[test]
fn walk_mixing_decays() {
    let r = mixing_curve(&mixing_setup(
        Boundary::Walk { u: vec![1] },
        Boundary::Walk { u: vec![3] },
    ))
    .unwrap();
    assert!(r.strictly_decreasing, "{:?}", r.points);
    assert!(r.r_squared.unwrap() >= 0.9);
}

fn line(origin: f64, step: f64, w: &[f64]) -> Distribution {
    Distribution::from_weights(
        Support::Line {
            origin,
            step,
            count: w.len(),
        },
        w,
    )
    .unwrap()
}

#[test]
fn dominance_of_shifted_laws() {
    let low = line(1.0, 1.0, &[3.0, 2.0, 1.0, 0.0]);
    let high = line(1.0, 1.0, &[0.0, 1.0, 2.0, 3.0]);
    let r = dominance_check(&low, &high).unwrap();
    assert!(r.pass && r.max_violation <= 0.0);
    let r = dominance_check(&high, &low).unwrap();
    assert!(!r.pass);
    assert!((r.max_violation - 4.0 / 6.0).abs() < 1e-12);
    let same = dominance_check(&low, &low).unwrap();
    assert!(same.pass && same.max_violation == 0.0);
    let other = line(0.5, 1.0, &[3.0, 2.0, 1.0, 0.0]);
    assert_eq!(dominance_check(&low, &other), Err(AnalysisError::GridMismatch));
}

proptest! {
    #[test]
    fn dominance_matches_naive_cdf(w1 in prop::collection::vec(0.01f64..1.0, 6), w2 in prop::collection::vec(0.01f64..1.0, 6)) {
        let (a, b) = (line(1.0, 1.0, &w1), line(1.0, 1.0, &w2));
        let r = dominance_check(&a, &b).unwrap();
        let (fa, fb) = (a.cdf().unwrap(), b.cdf().unwrap());
        let naive = fa.iter().zip(&fb).take(5).map(|(x, y)| y - x).fold(0.0f64, f64::max);
        prop_assert!((r.max_violation - naive).abs() < 1e-12);
    }
}

#[test]
fn polymer_orderings_hold_on_grid() {
    let tilt = PolymerTilt::new(1.0, 2.0).unwrap();
    let grid = GridSpec::new(0.1, 8.0, 1.0).unwrap();
    let r = oracle_monotonicity(
        1,
        tilt,
        &grid,
        &PolymerBoundary::Fixed {
            u: vec![0.5],
            v: vec![0.5],
        },
        &PolymerBoundary::Fixed {
            u: vec![1.5],
            v: vec![1.5],
        },
        0.0,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
    let [first, second] = oracle_sandwich(2, tilt, &GridSpec::new(0.2, 6.0, 1.0).unwrap()).unwrap();
    assert!(first.pass && second.pass, "{first:?} {second:?}");
}

#[test]
fn partition_slope_without_tilt() {
    // killed simple walk on {1..x_max}: decay rate cos(π/(x_max+1))
    let x_max = 12;
    let tilt = common::untilted(0.5);
    let ts: Vec<i64> = vec![50, 100, 200, 400];
    let r = log_partition_slope(&[1], &ts, &Kernel::simple(), &tilt, x_max).unwrap();
    let exact = (std::f64::consts::PI / (x_max + 1) as f64).cos().ln();
    assert!((r.slope - exact).abs() < 1e-6, "{} vs {exact}", r.slope);
    assert!(r.pass);
    assert!(r.points.iter().all(|&(t, z)| z >= r.intercept + r.slope * t as f64 - 1e-9));
}

#[test]
fn partition_slope_more_curves_decay_faster() {
    let tilt = linear_tilt(1.0, 2.0, 0.5);
    let ts = [8, 16, 32, 64];
    let one = log_partition_slope(&[1], &ts, &Kernel::simple(), &tilt, 40).unwrap();
    let two = log_partition_slope(&[2, 1], &ts, &Kernel::simple(), &tilt, 40).unwrap();
    assert!(one.pass && two.pass, "{one:?} {two:?}");
    assert!(two.slope <= one.slope);
}

#[test]
fn invariance_rejects_late_observation() {
    let setup = InvarianceSetup {
        n: 1,
        m_cont: 1.0,
        lambdas: vec![0.4],
        kernel: Kernel::simple(),
        a: 1.0,
        b: 2.0,
        boundary: LimitBoundary::Walk { u: vec![1.0] },
        dx: 0.1,
        height_cap: Some(10.0),
        t_obs: 1.5,
    };
    assert!(matches!(invariance_check(&setup), Err(AnalysisError::Invalid(_))));
}

#[test]
fn invariance_distance_is_small() {
    let setup = InvarianceSetup {
        n: 1,
        m_cont: 1.0,
        lambdas: vec![0.4, 0.2],
        kernel: Kernel::uniform(2).unwrap(),
        a: 1.0,
        b: 2.0,
        boundary: LimitBoundary::Walk { u: vec![1.0] },
        dx: 0.05,
        height_cap: Some(12.0),
        t_obs: 0.0,
    };
    let pts = invariance_check(&setup).unwrap();
    for p in &pts {
        assert!(p.distance < 0.1, "{p:?}");
    }
}

#[test]
fn good_blocks_on_rescaled_lattice_path() {
    let scale = ScaleInfo::from_h_big(1.0, 2.0);
    let p = PathConfig::constant(-40, 40, &[3, 2]).rescale(&scale);
    let r = good_blocks(&p, &p, 2.0, 0.25);
    assert_eq!(r.m_blocks, 5);
    assert_eq!(r.m0, 2 * r.m_blocks as usize);
    let strict = good_blocks(&p, &p, 1.0, 0.25);
    assert_eq!(strict.m0, 0);
    assert_eq!(r, good_blocks(&p, &p, 2.0, 0.25));
}
