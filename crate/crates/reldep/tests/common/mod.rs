//! Independent reference implementations shared by the integration suites.
//!
//! Everything here is coded directly from the defining formulas - literal
//! pair/triple sums, odometer tuple enumeration, leave-one-out averages -
//! and shares none of the library's fast paths, so agreement between the two
//! is meaningful evidence.

#![allow(dead_code)]

use rand::Rng;

use reldep::{eval_kernel, stream_rng, KernelId, Sample};

/// Sign with `sgn(0) = 0`, the tie convention used throughout.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A seeded generator for test data, on its own stream tag.
pub fn test_rng(seed: u64) -> impl Rng {
    stream_rng(seed, &[0xACCE, 0])
}

/// Continuous column: i.i.d. uniform draws, ties almost surely absent.
pub fn continuous(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Heavily tied column: values on a small integer grid.
pub fn tied(rng: &mut impl Rng, n: usize, levels: u32) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0..levels) as f64).collect()
}

/// Two columns as an `n x 2` sample.
pub fn pair_sample(x: &[f64], y: &[f64]) -> Sample<f64> {
    let mut cols = x.to_vec();
    cols.extend_from_slice(y);
    Sample::from_cols(cols, x.len(), 2).unwrap()
}

// ---------------------------------------------------------------------------
// Reference estimators
// ---------------------------------------------------------------------------

/// Kendall's tau by the literal sum over all index pairs.
pub fn kendall_pair_sum(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += sgn(x[i] - x[j]) * sgn(y[i] - y[j]);
        }
    }
    s / (n * (n - 1) / 2) as f64
}

/// The Spearman dominating term by the literal sum over all ordered triples
/// of distinct indices: `3 / (n(n-1)(n-2)) * sum sgn(x_i - x_j) sgn(y_i - y_k)`.
pub fn spearman_triple_sum(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                s += sgn(x[i] - x[j]) * sgn(y[i] - y[k]);
            }
        }
    }
    3.0 * s / (n * (n - 1) * (n - 2)) as f64
}

// ---------------------------------------------------------------------------
// Reference kernels (orders 2 and 3) and the jackknife variance
// ---------------------------------------------------------------------------

fn kendall_kernel(a: (f64, f64), b: (f64, f64)) -> f64 {
    sgn(a.0 - b.0) * sgn(a.1 - b.1)
}

/// Symmetrized Spearman kernel: half the sum of `sgn(u_a - u_b) sgn(v_a - v_c)`
/// over the six orderings of three points.
fn spearman_kernel(pts: [(f64, f64); 3]) -> f64 {
    let mut s = 0.0;
    for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
        s += sgn(pts[a].0 - pts[b].0) * sgn(pts[a].1 - pts[c].1);
    }
    s / 2.0
}

/// Jackknife variance of the Kendall U-statistic from the defining formula:
/// leave-one-out kernel means around the full-sample value, scaled by
/// `m^2 (n-1) / (n (n-m)^2)` with `m = 2`.
pub fn jackknife_kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut u = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            u += kendall_kernel((x[i], y[i]), (x[j], y[j]));
        }
    }
    u /= (n * (n - 1) / 2) as f64;
    let mut ss = 0.0;
    for k in 0..n {
        let mut q = 0.0;
        for j in 0..n {
            if j != k {
                q += kendall_kernel((x[k], y[k]), (x[j], y[j]));
            }
        }
        q /= (n - 1) as f64;
        ss += (q - u) * (q - u);
    }
    let nf = n as f64;
    4.0 * (nf - 1.0) / (nf * (nf - 2.0) * (nf - 2.0)) * ss
}

/// Same, for the order-3 Spearman kernel (`m = 3`).
pub fn jackknife_spearman(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let z = |t: usize| (x[t], y[t]);
    let mut u = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                u += spearman_kernel([z(i), z(j), z(k)]);
            }
        }
    }
    u /= (n * (n - 1) * (n - 2) / 6) as f64;
    let mut ss = 0.0;
    for k in 0..n {
        let mut q = 0.0;
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in i + 1..n {
                if j == k {
                    continue;
                }
                q += spearman_kernel([z(k), z(i), z(j)]);
            }
        }
        q /= ((n - 1) * (n - 2) / 2) as f64;
        ss += (q - u) * (q - u);
    }
    let nf = n as f64;
    9.0 * (nf - 1.0) / (nf * (nf - 3.0) * (nf - 3.0)) * ss
}

// ---------------------------------------------------------------------------
// Brute-force V-statistic
// ---------------------------------------------------------------------------

/// V-statistic by the definition: the kernel averaged over all `n^m` ordered
/// index tuples, repeats included, enumerated with an odometer.
pub fn vstat_brute(s: &Sample<f64>, kernel: KernelId, pair: (usize, usize)) -> f64 {
    let n = s.n();
    let m = reldep::kernel_order(kernel);
    let (ci, cj) = pair;
    let mut idx = vec![0usize; m];
    let mut pts = vec![(0.0, 0.0); m];
    let mut total = 0.0;
    loop {
        for (slot, &t) in pts.iter_mut().zip(idx.iter()) {
            *slot = (s.get(t, ci), s.get(t, cj));
        }
        total += eval_kernel(kernel, &pts).unwrap();
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == m {
                return total / (n as f64).powi(m as i32);
            }
        }
    }
}
