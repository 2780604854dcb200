use ensembles::exact::Distribution;
use ensembles::oracle::{
    free_marginal, mixture_marginal, polymer_marginal, stationary_density, zero_bc_extrapolate,
    GridSpec, OracleError, PolymerBoundary, PolymerTilt,
};

fn tilt(a: f64) -> PolymerTilt {
    PolymerTilt::new(a, 2.0).unwrap()
}

fn top(d: &Distribution) -> Distribution {
    d.coordinate(0).unwrap()
}

#[test]
fn untilted_pinned_marginal_is_time_symmetric() {
    let grid = GridSpec::new(0.1, 6.0, 1.0).unwrap();
    let b = PolymerBoundary::Fixed {
        u: vec![1.0],
        v: vec![1.0],
    };
    let left = polymer_marginal(1, tilt(0.0), &grid, &b, -0.5).unwrap();
    let right = polymer_marginal(1, tilt(0.0), &grid, &b, 0.5).unwrap();
    assert!(left.tv(&right).unwrap() < 1e-12);
    let sum: f64 = left.probs().iter().sum();
    assert!((sum - 1.0).abs() < 1e-10);
}

#[test]
fn wall_repels_as_grid_refines() {
    let mut prev = f64::INFINITY;
    for dx in [0.2, 0.1, 0.05] {
        let grid = GridSpec::new(dx, 10.0, 1.0).unwrap();
        let d = polymer_marginal(1, tilt(1.0), &grid, &PolymerBoundary::ZeroBC, 0.0).unwrap();
        let near_wall = d.probs()[0];
        assert!(near_wall < prev, "dx = {dx}: {near_wall}");
        prev = near_wall;
    }
}

#[test]
fn mean_is_stable_under_refinement() {
    let mean = |dx: f64| {
        let grid = GridSpec::with_default_cap(dx, 2.0, 1, 1.0).unwrap();
        top(&polymer_marginal(1, tilt(1.0), &grid, &PolymerBoundary::ZeroBC, 0.0).unwrap())
            .mean()
            .unwrap()
    };
    let (a, b) = (mean(0.05), mean(0.025));
    assert!((a - b).abs() <= 0.02 * b, "{a} vs {b}");
}

#[test]
fn zero_boundary_limit() {
    let grid = GridSpec::new(0.05, 12.0, 2.0).unwrap();
    let r = zero_bc_extrapolate(1, tilt(1.0), &grid).unwrap();
    assert!(r.cauchy[1] <= r.cauchy[0], "{:?}", r.cauchy);
    assert!(r.direction_tv <= 0.02, "{}", r.direction_tv);
}

#[test]
fn one_curve_matches_scalar_recursion() {
    let grid = GridSpec::new(0.1, 5.0, 0.5).unwrap();
    let law = polymer_marginal(1, tilt(1.0), &grid, &PolymerBoundary::ZeroBC, 0.2).unwrap();

    // plain scalar chain, written out independently
    let cells = 50usize;
    let dt = 0.01;
    let taps: Vec<f64> = (-8i64..=8).map(|k| (-(k * k) as f64 / 2.0).exp()).collect();
    let norm: f64 = taps.iter().sum();
    let w: Vec<f64> = (1..=cells).map(|c| (-0.5 * dt * c as f64 * 0.1).exp()).collect();
    let step = |v: &[f64]| -> Vec<f64> {
        (0..cells)
            .map(|j| {
                let mut acc = 0.0;
                for (t, g) in taps.iter().enumerate() {
                    let i = j as i64 + t as i64 - 8;
                    if (0..cells as i64).contains(&i) {
                        acc += g / norm * w[i as usize] * v[i as usize];
                    }
                }
                acc * w[j]
            })
            .collect()
    };
    let mut a = vec![0.0; cells];
    a[0] = 1.0;
    let mut b = a.clone();
    for _ in 0..70 {
        a = step(&a);
    }
    for _ in 0..30 {
        b = step(&b);
    }
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let total: f64 = prod.iter().sum();
    for (p, q) in law.probs().iter().zip(&prod) {
        assert!((p - q / total).abs() < 1e-12);
    }
}

#[test]
fn stationary_density_shape() {
    let grid = GridSpec::new(0.05, 12.0, 0.0).unwrap();
    let d = top(&stationary_density(1, tilt(1.0), &grid).unwrap());
    let p = d.probs();
    assert!(p.iter().all(|&x| x > 0.0));
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mode = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(p[0] < 0.01 * p[mode]);
    assert!(p[..=mode].windows(2).all(|w| w[0] <= w[1]));
    assert!(p[mode..].windows(2).all(|w| w[0] >= w[1]));

    // recomputed on a finer grid, the mean barely moves
    let fine = top(&stationary_density(1, tilt(1.0), &grid.with_dx(0.025)).unwrap());
    assert!((fine.mean().unwrap() - d.mean().unwrap()).abs() < 0.01);
}

#[test]
fn long_windows_approach_stationarity() {
    let base = GridSpec::new(0.05, 12.0, 0.0).unwrap();
    let stat = stationary_density(1, tilt(1.0), &base).unwrap();
    let mut prev = f64::INFINITY;
    for m in [1.0, 2.0, 4.0] {
        let grid = base.with_m_half(m);
        let zero = polymer_marginal(1, tilt(1.0), &grid, &PolymerBoundary::ZeroBC, 0.0).unwrap();
        let tv = zero.tv(&stat).unwrap();
        assert!(tv < prev);
        prev = tv;
        if m == 4.0 {
            assert!(tv <= 0.02, "{tv}");
            let free = free_marginal(1, tilt(1.0), &grid, true, 0.0).unwrap();
            assert!(free.tv(&stat).unwrap() <= 0.02);
        }
    }
}

#[test]
fn free_both_is_a_mixture_of_free_right() {
    for n in [1, 2] {
        let grid = GridSpec::new(0.1, 5.0, 1.0).unwrap();
        let both = free_marginal(n, tilt(1.0), &grid, true, 0.0).unwrap();
        let start = free_marginal(n, tilt(1.0), &grid, true, -1.0).unwrap();
        let mixed = mixture_marginal(n, tilt(1.0), &grid, &start, 0.0).unwrap();
        assert!(both.tv(&mixed).unwrap() <= 1e-9);
    }
}

#[test]
fn top_curve_stabilizes_in_n() {
    let grid = GridSpec::new(0.2, 8.0, 0.0).unwrap();
    let tops: Vec<Distribution> = (1..=3)
        .map(|n| top(&stationary_density(n, tilt(1.0), &grid).unwrap()))
        .collect();
    let d12 = tops[0].tv(&tops[1]).unwrap();
    let d23 = tops[1].tv(&tops[2]).unwrap();
    assert!(d23 < d12, "{d12} {d23}");
}

#[test]
fn rejects_bad_inputs() {
    let grid = GridSpec::new(0.1, 3.0, 1.0).unwrap();
    let b = PolymerBoundary::Fixed {
        u: vec![1.0, 1.0],
        v: vec![2.0, 1.0],
    };
    assert!(matches!(
        polymer_marginal(2, tilt(1.0), &grid, &b, 0.0),
        Err(OracleError::InvalidBoundary(_))
    ));
    assert!(matches!(
        polymer_marginal(1, tilt(1.0), &grid, &PolymerBoundary::ZeroBC, 2.0),
        Err(OracleError::TimeOutOfRange(_))
    ));
}
