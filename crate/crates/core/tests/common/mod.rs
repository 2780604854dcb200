#![allow(dead_code)]

use ensembles::model::{Boundary, EnsembleSpec, Potential, TiltSpec};

pub fn linear_tilt(a: f64, b: f64, lambda: f64) -> TiltSpec {
    TiltSpec::new(a, b, Potential::linear(lambda).unwrap()).unwrap()
}

pub fn untilted(lambda: f64) -> TiltSpec {
    TiltSpec::reference(Potential::linear(lambda).unwrap())
}

pub fn bridge(n: usize, m: i64, nn: i64, u: &[i64], v: &[i64], x_max: i64) -> EnsembleSpec {
    EnsembleSpec::new(
        n,
        m,
        nn,
        Boundary::Bridge {
            u: u.to_vec(),
            v: v.to_vec(),
        },
        x_max,
    )
    .unwrap()
}

pub fn walk(n: usize, m: i64, nn: i64, u: &[i64], x_max: i64) -> EnsembleSpec {
    EnsembleSpec::new(n, m, nn, Boundary::Walk { u: u.to_vec() }, x_max).unwrap()
}

/// Chi-square p-value of observed counts against expected probabilities,
/// pooling cells with expected count below 5 into one.
pub fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * total as f64;
        if e < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += e;
        } else {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp.max(1e-300);
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}
