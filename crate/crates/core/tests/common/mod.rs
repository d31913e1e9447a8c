#![allow(dead_code)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;
use wshift::weightspec::{TailRule, WeightSpec};

pub const PREFIX_LEN: usize = 64;

/// Atoms `(s_i, w_i)` on `[0.2, 1]`, pairwise at least 0.1 apart, weights
/// at least 0.1 and summing to one, sorted by location.
pub fn random_measure(rng: &mut StdRng) -> Vec<(f64, f64)> {
    let count = rng.gen_range(2..=4);
    let mut locations: Vec<f64> = Vec::new();
    while locations.len() < count {
        let s = rng.gen_range(0.2..=1.0);
        if locations.iter().all(|t: &f64| (t - s).abs() >= 0.1) {
            locations.push(s);
        }
    }
    locations.sort_by(f64::total_cmp);
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let spare = 1.0 - 0.1 * count as f64;
    locations.into_iter().zip(raw).map(|(s, r)| (s, 0.1 + spare * r / total)).collect()
}

pub fn moments(measure: &[(f64, f64)], count: usize) -> Vec<f64> {
    (0..count).map(|k| measure.iter().map(|(s, w)| w * s.powi(k as i32)).sum()).collect()
}

/// Shift whose squared β are the moments of `measure` through the prefix,
/// continued by the constant `sqrt(max s)`.
pub fn spec_from_measure(measure: &[(f64, f64)]) -> WeightSpec {
    let m = moments(measure, PREFIX_LEN + 1);
    let prefix: Vec<f64> = (0..PREFIX_LEN).map(|n| (m[n + 1] / m[n]).sqrt()).collect();
    let top = measure.iter().map(|(s, _)| *s).fold(0.0, f64::max);
    WeightSpec::unilateral(prefix, TailRule::Constant(top.sqrt())).unwrap()
}

fn random_weights(rng: &mut StdRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(0.25..3.0)).collect()
}

pub fn random_tail(rng: &mut StdRng) -> TailRule {
    if rng.gen_bool(0.5) {
        TailRule::Constant(rng.gen_range(0.25..3.0))
    } else {
        let period = rng.gen_range(1..=4);
        TailRule::Periodic(random_weights(rng, period))
    }
}

/// Unilateral or bilateral shift with a short prefix and constant or
/// periodic tails.
pub fn random_structured_spec(rng: &mut StdRng, bilateral: bool) -> WeightSpec {
    let prefix_len = rng.gen_range(0..6);
    let prefix = random_weights(rng, prefix_len);
    let tail = random_tail(rng);
    if bilateral {
        let neg_len = rng.gen_range(0..6);
        let neg = random_weights(rng, neg_len);
        let tail_neg = random_tail(rng);
        WeightSpec::bilateral(prefix, tail, neg, tail_neg).unwrap()
    } else {
        WeightSpec::unilateral(prefix, tail).unwrap()
    }
}

pub fn random_point(rng: &mut StdRng, max_modulus: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.0..=max_modulus), rng.gen_range(0.0..std::f64::consts::TAU))
}

pub fn random_polynomial(rng: &mut StdRng, max_degree: usize) -> Vec<Complex64> {
    let degree = rng.gen_range(0..=max_degree);
    (0..=degree).map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), 0.0)).collect()
}
