mod common;

use common::*;
use ensembles::exact::{
    self, enumerate_paths, law_restricted, partition_bridge, partition_walk, tv_exact,
    Distribution, ExactEngine, ExactError, Warning,
};
use ensembles::model::{Kernel, PathConfig};
use ensembles::numeric::log_sum_exp;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn bridge_example_single_admissible_path() {
    let spec = bridge(1, 0, 2, &[1], &[1], 10);
    let k = Kernel::simple();
    let t = linear_tilt(1.0, 2.0, 1.0);
    let r = partition_bridge(&spec, &k, &t).unwrap();
    assert!((r.log_z - (0.25f64.ln() - 3.0)).abs() < 1e-12);

    let brute = enumerate_paths(&spec, &k, &t, 1000).unwrap();
    let finite: Vec<_> = brute.iter().filter(|(_, w)| w.is_finite()).collect();
    assert_eq!(finite.len(), 1);
    assert_eq!(finite[0].0.flat(), &[1, 2, 1]);
    assert!((finite[0].1 - r.log_z).abs() < 1e-12);

    let untilted = partition_bridge(&spec, &k, &untilted(1.0)).unwrap();
    assert!((untilted.log_z - 0.25f64.ln()).abs() < 1e-14);
}

#[test]
fn parity_broken_bridge() {
    let spec = bridge(1, 0, 2, &[1], &[2], 10);
    let err = partition_bridge(&spec, &Kernel::simple(), &linear_tilt(1.0, 2.0, 1.0)).unwrap_err();
    assert_eq!(err, ExactError::ParityInfeasible);
}

#[test]
fn walk_single_step() {
    let spec = walk(1, 0, 1, &[1], 10);
    let r = partition_walk(&spec, &Kernel::lazy(), &linear_tilt(1.0, 2.0, 1.0)).unwrap();
    assert!((r.log_z - (0.75f64.ln() - 1.0)).abs() < 1e-14);
    assert!(r.warnings.is_empty());
}

#[test]
fn untilted_walk_survival_matches_rejection_sampling() {
    // probability that three ordered lazy walkers stay ordered and positive for 6 steps
    let spec = walk(3, 0, 6, &[5, 3, 1], 40);
    let k = Kernel::lazy();
    let z = partition_walk(&spec, &k, &untilted(1.0)).unwrap().log_z.exp();

    let mut rng = ensembles::rng::stream(11, 0);
    let trials = 1_000_000;
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut x = [5i64, 3, 1];
        let mut ok = true;
        for _ in 0..6 {
            for xi in x.iter_mut() {
                let u: f64 = rng.random();
                *xi += if u < 0.25 { -1 } else if u < 0.75 { 0 } else { 1 };
            }
            if !(x[0] > x[1] && x[1] > x[2] && x[2] > 0) {
                ok = false;
                break;
            }
        }
        hits += ok as u64;
    }
    let p = hits as f64 / trials as f64;
    let sd = (z * (1.0 - z) / trials as f64).sqrt();
    assert!((p - z).abs() < 3.0 * sd, "exact {z}, empirical {p}");
}

#[test]
fn cutoff_warning_when_boundary_at_cap() {
    let spec = walk(1, 0, 3, &[5], 5);
    let r = partition_walk(&spec, &Kernel::lazy(), &linear_tilt(1.0, 2.0, 0.01)).unwrap();
    assert!(matches!(r.warnings[..], [Warning::CutoffDominated { fraction }] if fraction > 0.5));
}

#[test]
fn restricted_laws() {
    let k = Kernel::simple();
    let t = linear_tilt(1.0, 2.0, 1.0);
    let spec = bridge(1, 0, 2, &[1], &[1], 10);
    let left = law_restricted(&spec, &k, &t, &[0]).unwrap();
    assert_eq!(left.probs()[0], 1.0);
    let joint = law_restricted(&spec, &k, &t, &[0, 1]).unwrap();
    // only (1, 2): state ids 0 and 1
    assert!((joint.probs()[1] - 1.0).abs() < 1e-15);
    let mid = exact::marginal(&spec, &k, &t, 1).unwrap();
    assert!((mid.probs()[1] - 1.0).abs() < 1e-15);
}

#[test]
fn symmetric_bridge_marginals() {
    let spec = bridge(2, 0, 8, &[3, 1], &[3, 1], 14);
    let e = ExactEngine::new(&spec, &Kernel::uniform(1).unwrap(), &linear_tilt(0.7, 2.0, 0.5))
        .unwrap();
    let r = e.partition().unwrap();
    for k in 0..=4 {
        let a = r.marginal(k).unwrap();
        let b = r.marginal(8 - k).unwrap();
        let sum: f64 = a.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let diff = a
            .probs()
            .iter()
            .zip(b.probs())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13, "k = {k}: {diff}");
    }
}

#[test]
fn conditional_law_edge_cases() {
    let spec = bridge(1, 0, 4, &[1], &[1], 6);
    let e = ExactEngine::new(&spec, &Kernel::simple(), &linear_tilt(1.0, 2.0, 0.5)).unwrap();
    let law = e.conditional_bridge_law(1, 2, &[2], &[3]).unwrap();
    assert_eq!(law.law.len(), 1);
    assert_eq!(law.diagnostic_tv, Some(0.0));
    let gibbs = e.conditional_bridge_law(0, 4, &[1], &[1]).unwrap();
    assert!(gibbs.diagnostic_tv.unwrap() < 1e-12);
    // X(1) = 2 and X(3) = 6 cannot both happen in two steps
    assert!(matches!(
        e.conditional_bridge_law(1, 3, &[2], &[6]),
        Err(ExactError::ZeroProbabilityEndpoint { .. })
    ));
    assert!(e.conditional_bridge_law(3, 2, &[2], &[3]).is_err());
}

#[test]
fn exact_samples_are_reproducible() {
    let spec = walk(2, 0, 10, &[2, 1], 30);
    let e = ExactEngine::new(&spec, &Kernel::lazy(), &linear_tilt(1.0, 2.0, 0.3)).unwrap();
    let a = e.exact_sample(5, 200).unwrap();
    let b = e.exact_sample(5, 200).unwrap();
    assert_eq!(a, b);
    assert!(e.exact_sample(5, 0).unwrap().is_empty());
    assert!(a.iter().all(|p| p.ordering_ok()));
    assert_ne!(a, e.exact_sample(6, 200).unwrap());
}

#[test]
fn exact_sampler_matches_marginals() {
    let spec = bridge(1, 0, 6, &[2], &[2], 40);
    let e = ExactEngine::new(&spec, &Kernel::uniform(2).unwrap(), &linear_tilt(1.0, 2.0, 0.3))
        .unwrap();
    let samples = e.exact_sample(1, 20_000).unwrap();
    let r = e.partition().unwrap();
    for t in 1..6 {
        let m = r.marginal(t).unwrap();
        let mut counts = vec![0u64; m.len()];
        for p in &samples {
            counts[(p.get(0, t) - 1) as usize] += 1;
        }
        assert!(chi_square_p(&counts, m.probs()) > 1e-3);
    }
}

#[test]
fn increasing_tilt_lowers_partition() {
    let spec = walk(2, 0, 6, &[3, 1], 30);
    let k = Kernel::lazy();
    let mut prev = f64::INFINITY;
    for a in [0.1, 0.5, 1.0, 2.0] {
        let z = partition_walk(&spec, &k, &linear_tilt(a, 1.5, 0.4)).unwrap().log_z;
        assert!(z < prev);
        prev = z;
    }
}

#[test]
fn cutoff_stability_once_tilt_dominates() {
    let k = Kernel::uniform(2).unwrap();
    let t = linear_tilt(1.0, 2.0, 0.5);
    let z1 = partition_walk(&walk(2, 0, 12, &[3, 1], 60), &k, &t).unwrap().log_z;
    let z2 = partition_walk(&walk(2, 0, 12, &[3, 1], 120), &k, &t).unwrap().log_z;
    assert!((z1 - z2).abs() < 1e-8);
}

fn small_instance() -> impl Strategy<Value = (ensembles::model::EnsembleSpec, Kernel, f64, f64)> {
    let kernels = prop_oneof![
        Just(Kernel::simple()),
        Just(Kernel::lazy()),
        Just(Kernel::uniform(2).unwrap()),
        Just(Kernel::new(vec![-1, 0, 1], vec![0.2, 0.6, 0.2]).unwrap()),
    ];
    (1usize..=2, 2i64..=6, kernels, 0.2f64..1.0, 1.1f64..4.0, 0usize..3, any::<bool>())
        .prop_map(|(n, len, k, lambda, b, lift, is_bridge)| {
            let u: Vec<i64> = (1..=n as i64).rev().map(|x| x + lift as i64).collect();
            let x_max = if n == 1 { 8 } else { 6 };
            let spec = if is_bridge && k.bridge_feasible(u[0], u[0], len as u64) {
                bridge(n, -1, len - 1, &u, &u, x_max)
            } else {
                walk(n, -1, len - 1, &u, x_max)
            };
            (spec, k, lambda, b)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_consistent_at_every_time((spec, k, lambda, b) in small_instance()) {
        let e = ExactEngine::new(&spec, &k, &linear_tilt(1.0, b, lambda)).unwrap();
        let r = e.partition().unwrap();
        for z in r.log_z_by_time().unwrap() {
            prop_assert!((z - r.log_z).abs() < 1e-9);
        }
    }

    #[test]
    fn partition_matches_enumeration((spec, k, lambda, b) in small_instance()) {
        let t = linear_tilt(0.8, b, lambda);
        let e = ExactEngine::new(&spec, &k, &t).unwrap();
        let paths = enumerate_paths(&spec, &k, &t, 5_000_000).unwrap();
        let w: Vec<f64> = paths.iter().map(|(_, w)| *w).collect();
        prop_assert!((log_sum_exp(&w) - e.partition().unwrap().log_z).abs() < 1e-10);
    }

    #[test]
    fn restriction_consistency((spec, k, lambda, b) in small_instance()) {
        let e = ExactEngine::new(&spec, &k, &linear_tilt(1.0, b, lambda)).unwrap();
        let m = spec.m_left();
        let times: Vec<i64> = (m..=spec.n_right()).take(3).collect();
        let joint = e.law_restricted(&times).unwrap();
        for (pos, &t) in times.iter().enumerate() {
            let direct = e.marginal(t).unwrap();
            prop_assert!(tv_exact(&joint.time_marginal(pos).unwrap(), &direct).unwrap() < 1e-12);
        }
        if times.len() == 3 {
            let pair = e.law_restricted(&[times[0], times[2]]).unwrap();
            let from_joint = joint.restrict_times(&[0, 2]).unwrap();
            prop_assert!(tv_exact(&pair, &from_joint).unwrap() < 1e-12);
        }
    }

    #[test]
    fn gibbs_property_small((spec, k, lambda, b) in small_instance(), seed in 0u64..1000) {
        let t = linear_tilt(1.0, b, lambda);
        let e = ExactEngine::new(&spec, &k, &t).unwrap();
        let path: PathConfig = e.exact_sample(seed, 1).unwrap().pop().unwrap();
        let (m, nn) = (spec.m_left(), spec.n_right());
        let kk = m + (seed as i64 % (nn - m));
        let ll = nn.min(kk + 1 + (seed as i64 / 7) % (nn - kk));
        let law = e.conditional_bridge_law(kk, ll, path.column(kk), path.column(ll)).unwrap();
        prop_assert!(law.diagnostic_tv.unwrap() <= 1e-10);
    }
}

#[test]
fn distributions_on_different_times_do_not_compare() {
    let spec = walk(1, 0, 3, &[1], 10);
    let e = ExactEngine::new(&spec, &Kernel::lazy(), &linear_tilt(1.0, 2.0, 1.0)).unwrap();
    let a: Distribution = e.marginal(1).unwrap();
    let b = e.marginal(2).unwrap();
    assert_eq!(tv_exact(&a, &b), Err(ExactError::SpaceMismatch));
}
