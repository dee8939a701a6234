//! Symmetric kernels of the six pairwise dependence measures.
//!
//! Each kernel `h` is a symmetric function of `m` bivariate points
//! `(u_1, v_1), ..., (u_m, v_m)`; the corresponding dependence measure is the
//! expectation `E h`, estimated by the order-`m` U-statistic over a sample.
//! All kernels except [`KernelId::Covariance`] depend on the points only
//! through the coordinatewise orderings, hence are invariant under strictly
//! increasing marginal transforms.
//!
//! Tie conventions are fixed once here: `sgn(0) = 0`, the three-point
//! indicator difference uses non-strict `<=`, and the four-point "both below
//! both" indicator uses strict `<`.

use crate::error::{Error, Result};
use crate::num::{real, sgn, Real};

/// Identifies one of the six supported dependence-measure kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelId {
    /// Covariance, `h = (u1-u2)(v1-v2)/2`, order 2.
    Covariance,
    /// Kendall's tau, `h = sgn(u1-u2) sgn(v1-v2)`, order 2.
    KendallTau,
    /// Spearman's rho-hat (the U-statistic variant), order 3.
    SpearmanHat,
    /// Bergsma-Dassios tau-star, order 4.
    TauStar,
    /// Hoeffding's D (scaled to 1 at perfect positive dependence), order 5.
    HoeffdingD,
    /// Blum-Kiefer-Rosenblatt R, order 6.
    BkrR,
}

impl KernelId {
    /// All kernels, in increasing order of kernel order.
    pub const ALL: [KernelId; 6] = [
        KernelId::Covariance,
        KernelId::KendallTau,
        KernelId::SpearmanHat,
        KernelId::TauStar,
        KernelId::HoeffdingD,
        KernelId::BkrR,
    ];

    /// Number of points the kernel takes.
    pub fn order(self) -> usize {
        match self {
            KernelId::Covariance | KernelId::KendallTau => 2,
            KernelId::SpearmanHat => 3,
            KernelId::TauStar => 4,
            KernelId::HoeffdingD => 5,
            KernelId::BkrR => 6,
        }
    }

    /// Canonical lowercase name, also accepted by [`KernelId::parse`].
    pub fn name(self) -> &'static str {
        match self {
            KernelId::Covariance => "covariance",
            KernelId::KendallTau => "kendall",
            KernelId::SpearmanHat => "spearman",
            KernelId::TauStar => "tau-star",
            KernelId::HoeffdingD => "hoeffding-d",
            KernelId::BkrR => "bkr-r",
        }
    }

    /// Parses a kernel name as used on the command line. The hyphenated
    /// canonical names also accept undashed spellings.
    pub fn parse(s: &str) -> Result<KernelId> {
        match s {
            "covariance" => Ok(KernelId::Covariance),
            "kendall" => Ok(KernelId::KendallTau),
            "spearman" => Ok(KernelId::SpearmanHat),
            "tau-star" | "taustar" => Ok(KernelId::TauStar),
            "hoeffding-d" | "hoeffding" => Ok(KernelId::HoeffdingD),
            "bkr-r" | "bkr" => Ok(KernelId::BkrR),
            _ => Err(Error::Usage(format!(
                "unknown kernel {s:?}; expected one of covariance, kendall, spearman, \
                 tau-star, hoeffding-d, bkr-r"
            ))),
        }
    }
}

impl std::fmt::Display for KernelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Order of `kernel`; free-function form of [`KernelId::order`].
pub fn kernel_order(kernel: KernelId) -> usize {
    kernel.order()
}

/// Evaluates `kernel` on exactly `kernel.order()` bivariate points.
///
/// Errors with [`Error::Usage`] on an arity mismatch. Values are exact up to
/// float rounding: the rank-based kernels accumulate small integers and scale
/// once at the end.
pub fn eval_kernel<T: Real>(kernel: KernelId, pts: &[(T, T)]) -> Result<T> {
    let m = kernel.order();
    if pts.len() != m {
        return Err(Error::Usage(format!(
            "kernel {} takes {} points, got {}",
            kernel,
            m,
            pts.len()
        )));
    }
    let mut u = [T::zero(); 6];
    let mut v = [T::zero(); 6];
    for (t, &(a, b)) in pts.iter().enumerate() {
        u[t] = a;
        v[t] = b;
    }
    Ok(match kernel {
        KernelId::Covariance => (u[0] - u[1]) * (v[0] - v[1]) / real(2.0),
        KernelId::KendallTau => sgn(u[0] - u[1]) * sgn(v[0] - v[1]),
        KernelId::SpearmanHat => spearman_hat(&u[..3], &v[..3]),
        KernelId::TauStar => tau_star(&u[..4], &v[..4]),
        KernelId::HoeffdingD => hoeffding_d(&u[..5], &v[..5]),
        KernelId::BkrR => bkr_r(&u[..6], &v[..6]),
    })
}

/// Calls `f` on every permutation of `0..m` (Heap's algorithm, `m <= 6`).
pub(crate) fn each_permutation<F: FnMut(&[usize])>(m: usize, mut f: F) {
    debug_assert!(m <= 6);
    let mut a = [0usize, 1, 2, 3, 4, 5];
    let mut c = [0usize; 6];
    f(&a[..m]);
    let mut i = 1;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a[..m]);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `1{z[a] <= z[c]} - 1{z[b] <= z[c]}` as a small integer.
#[inline]
fn phi<T: Real>(z: &[T], a: usize, b: usize, c: usize) -> i64 {
    (z[a] <= z[c]) as i64 - (z[b] <= z[c]) as i64
}

/// `1{both of z[a], z[b] strictly below both of z[c], z[d]}`.
#[inline]
fn below<T: Real>(z: &[T], a: usize, b: usize, c: usize, d: usize) -> i64 {
    (z[a] < z[c] && z[a] < z[d] && z[b] < z[c] && z[b] < z[d]) as i64
}

/// `(j2,j4 above | j1,j3 below) + (reverse) - (j2,j3 | j1,j4) - (reverse)`.
#[inline]
fn tau_star_bracket<T: Real>(z: &[T], p: &[usize]) -> i64 {
    below(z, p[0], p[2], p[1], p[3]) + below(z, p[1], p[3], p[0], p[2])
        - below(z, p[0], p[3], p[1], p[2])
        - below(z, p[1], p[2], p[0], p[3])
}

fn spearman_hat<T: Real>(u: &[T], v: &[T]) -> T {
    // Symmetrized kernel: half the sum of sgn(u_a - u_b) sgn(v_a - v_c) over
    // all 3! orderings. The factor 1/2 (not 1/3!) is what makes the exact
    // finite-sample identity with the full Spearman coefficient and Kendall's
    // tau hold; see `ustat`.
    let mut acc = T::zero();
    each_permutation(3, |p| {
        acc += sgn(u[p[0]] - u[p[1]]) * sgn(v[p[0]] - v[p[2]]);
    });
    acc / real(2.0)
}

fn tau_star<T: Real>(u: &[T], v: &[T]) -> T {
    let mut acc: i64 = 0;
    each_permutation(4, |p| {
        acc += tau_star_bracket(u, p) * tau_star_bracket(v, p);
    });
    T::from_i64(acc).unwrap() / real(16.0)
}

fn hoeffding_d<T: Real>(u: &[T], v: &[T]) -> T {
    let mut acc: i64 = 0;
    each_permutation(5, |p| {
        acc += phi(u, p[0], p[1], p[4])
            * phi(u, p[2], p[3], p[4])
            * phi(v, p[0], p[1], p[4])
            * phi(v, p[2], p[3], p[4]);
    });
    T::from_i64(acc).unwrap() / real(16.0)
}

fn bkr_r<T: Real>(u: &[T], v: &[T]) -> T {
    let mut acc: i64 = 0;
    each_permutation(6, |p| {
        acc += phi(u, p[0], p[1], p[4])
            * phi(u, p[2], p[3], p[4])
            * phi(v, p[0], p[1], p[5])
            * phi(v, p[2], p[3], p[5]);
    });
    T::from_i64(acc).unwrap() / real(32.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(u: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
        u.iter().copied().zip(v.iter().copied()).collect()
    }

    fn eval(k: KernelId, u: &[f64], v: &[f64]) -> f64 {
        eval_kernel(k, &pts(u, v)).unwrap()
    }

    #[test]
    fn orders() {
        let orders: Vec<usize> = KernelId::ALL.iter().map(|k| k.order()).collect();
        assert_eq!(orders, vec![2, 2, 3, 4, 5, 6]);
        assert_eq!(kernel_order(KernelId::TauStar), 4);
    }

    #[test]
    fn arity_mismatch_is_a_usage_error() {
        let e = eval_kernel(KernelId::KendallTau, &[(0.0f64, 0.0)]).unwrap_err();
        assert!(matches!(e, Error::Usage(_)));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn name_round_trip() {
        for k in KernelId::ALL {
            assert_eq!(KernelId::parse(k.name()).unwrap(), k);
        }
        assert!(KernelId::parse("pearson").is_err());
    }

    #[test]
    fn covariance_and_kendall() {
        assert_eq!(eval(KernelId::Covariance, &[0.0, 2.0], &[0.0, 2.0]), 2.0);
        assert_eq!(eval(KernelId::KendallTau, &[1.0, 2.0], &[2.0, 1.0]), -1.0);
        assert_eq!(eval(KernelId::KendallTau, &[1.0, 1.0], &[2.0, 1.0]), 0.0);
        assert_eq!(eval(KernelId::KendallTau, &[1.0, 3.0], &[2.0, 5.0]), 1.0);
    }

    // Reference values below were frozen from exact rational enumeration of
    // the kernel definitions.

    #[test]
    fn spearman_hat_spot_values() {
        let k = KernelId::SpearmanHat;
        assert_eq!(eval(k, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(eval(k, &[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(eval(k, &[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]), 1.0);
        assert_eq!(eval(k, &[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(eval(k, &[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn tau_star_spot_values() {
        let k = KernelId::TauStar;
        let id = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(eval(k, &id, &id), 1.0);
        assert_eq!(eval(k, &id, &[4.0, 3.0, 2.0, 1.0]), 1.0);
        assert_eq!(eval(k, &id, &[2.0, 1.0, 4.0, 3.0]), 1.0);
        assert_eq!(eval(k, &id, &[1.0, 3.0, 2.0, 4.0]), -0.5);
        assert_eq!(eval(k, &[1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn hoeffding_d_spot_values() {
        let k = KernelId::HoeffdingD;
        let id = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(eval(k, &id, &id), 1.0);
        assert_eq!(eval(k, &id, &[5.0, 4.0, 3.0, 2.0, 1.0]), 1.0);
        assert_eq!(eval(k, &id, &[2.0, 1.0, 4.0, 5.0, 3.0]), 0.0);
        assert_eq!(
            eval(k, &[1.0, 1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 3.0, 4.0]),
            0.0
        );
    }

    #[test]
    fn bkr_r_spot_values() {
        let k = KernelId::BkrR;
        let id = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(eval(k, &id, &id), 1.0);
        assert_eq!(eval(k, &id, &[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]), 1.0);
        assert_eq!(eval(k, &id, &[2.0, 1.0, 4.0, 3.0, 6.0, 5.0]), 1.0);
    }

    #[test]
    fn permutation_enumeration_is_complete() {
        let mut seen = std::collections::HashSet::new();
        each_permutation(4, |p| {
            seen.insert([p[0], p[1], p[2], p[3]]);
        });
        assert_eq!(seen.len(), 24);
    }
}
