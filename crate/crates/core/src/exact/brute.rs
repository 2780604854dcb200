//! Direct enumeration of whole paths from the model definitions. Used as the
//! independent side of the conditional-law diagnostic and in tests.

use crate::model::{in_open_chamber, EnsembleSpec, Kernel, PathConfig, TiltSpec};

/// Every admissible path of the ensemble with its log weight
/// `Σ log p(jumps) - 𝒜`, or `None` once more than `cap` paths turn up.
pub fn enumerate_paths(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
    cap: usize,
) -> Option<Vec<(PathConfig, f64)>> {
    let n = spec.n();
    let mut out = Vec::new();
    let mut columns: Vec<Vec<i64>> = vec![spec.boundary().start().to_vec()];
    let ok = extend(spec, kernel, tilt, cap, n, &mut columns, &mut out);
    ok.then_some(out)
}

fn extend(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
    cap: usize,
    n: usize,
    columns: &mut Vec<Vec<i64>>,
    out: &mut Vec<(PathConfig, f64)>,
) -> bool {
    if columns.len() == spec.len() {
        if let Some(v) = spec.boundary().end() {
            if columns.last().unwrap().as_slice() != v {
                return true;
            }
        }
        let path = PathConfig::from_columns_unchecked(n, spec.m_left(), columns);
        let tilt_w = path.log_tilt_weight(tilt).to_f64();
        let jumps: f64 = columns
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| kernel.prob(b - a).ln()))
            .sum();
        out.push((path, tilt_w + jumps));
        return out.len() <= cap;
    }
    let last = columns.last().unwrap().clone();
    let offsets = kernel.offsets();
    let mut digits = vec![0usize; n];
    loop {
        let next: Vec<i64> = (0..n).map(|i| last[i] + offsets[digits[i]]).collect();
        if next[0] <= spec.x_max() && in_open_chamber(&next) {
            columns.push(next);
            let ok = extend(spec, kernel, tilt, cap, n, columns, out);
            columns.pop();
            if !ok {
                return false;
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < offsets.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}
