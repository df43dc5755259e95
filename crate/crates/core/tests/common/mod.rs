//! Test-only reference implementations, written from the model definition
//! without touching the library's update code.

#![allow(dead_code)]

use powervac::{NetworkState, RngStream};

/// One synchronous status update over an explicit link list.
///
/// Every individual `i` pays `r * s_i / d_i` into each incident link, where
/// `d_i` counts links touching `i` in either direction. Each link `a -> b`
/// pools its two payments; `b` receives the share `q` and `a` keeps the rest.
pub fn oracle_update(statuses: &[f64], links: &[(usize, usize)], r: f64, q: f64) -> Vec<f64> {
    let n = statuses.len();
    let mut degree = vec![0usize; n];
    for &(a, b) in links {
        degree[a] += 1;
        degree[b] += 1;
    }
    let pay = |i: usize| r * statuses[i] / degree[i] as f64;
    let mut next: Vec<f64> = statuses.iter().map(|s| (1.0 - r) * s).collect();
    for &(a, b) in links {
        let pooled = pay(a) + pay(b);
        next[b] += q * pooled;
        next[a] += (1.0 - q) * pooled;
    }
    next
}

/// Random out-lists with `lambda` distinct non-self targets each.
pub fn random_out_links(n: usize, lambda: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            rng.shuffle(&mut others);
            others.truncate(lambda);
            others
        })
        .collect()
}

/// Random state with statuses in (0.05, 5).
pub fn random_state(n: usize, lambda: usize, rng: &mut RngStream) -> NetworkState {
    let statuses = (0..n).map(|_| 0.05 + 4.95 * unit(rng)).collect();
    NetworkState::from_links(statuses, &random_out_links(n, lambda, rng)).unwrap()
}

pub fn unit(rng: &mut RngStream) -> f64 {
    rng.index(1 << 30) as f64 / (1u64 << 30) as f64
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
