//! U- and V-statistics of the pairwise dependence kernels, with jackknife
//! variance estimation.
//!
//! A [`Sample`] holds `n` observations of `p` components column-major. For a
//! component pair `(i, j)` and a kernel of order `m`, the U-statistic is the
//! average of the kernel over all size-`m` row subsets, and the V-statistic
//! averages over all `n^m` row tuples with repetition. [`ustat_matrix`]
//! evaluates all `d = p(p-1)/2` pairs, stacked in vech (column-stacked upper
//! triangle) order, together with leave-one-out jackknife variances.
//!
//! Fast paths keep the common kernels cheap: Kendall's tau runs in O(n log n)
//! per pair via inversion counting, the Spearman U-statistic uses the exact
//! finite-sample identity with the full Spearman coefficient (or an exact
//! integer row-sum form when ties are present), and covariance has a closed
//! form. The remaining kernels enumerate subsets and refuse, with a resource
//! error, workloads above an evaluation cap.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{eval_kernel, KernelId};
use crate::num::{count, real, sgn, Real};
use crate::rank::{is_tie_free, kendall_cd, spearman_rho, KendallScratch};

/// Default per-pair cap on kernel evaluations in enumeration-based routines.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

// ---------------------------------------------------------------------------
// Sample storage
// ---------------------------------------------------------------------------

/// An `n x p` data matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    n: usize,
    p: usize,
    cols: Vec<T>,
}

impl<T: Real> Sample<T> {
    /// Builds a sample from column-major storage (`cols[j*n + r]` is row `r`
    /// of component `j`).
    pub fn from_cols(cols: Vec<T>, n: usize, p: usize) -> Result<Self> {
        if cols.len() != n * p {
            return Err(Error::Usage(format!(
                "column storage has {} values, expected n*p = {}*{} = {}",
                cols.len(),
                n,
                p,
                n * p
            )));
        }
        Ok(Sample { n, p, cols })
    }

    /// Builds a sample from row-major storage.
    pub fn from_row_major(data: &[T], n: usize, p: usize) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::Usage(format!(
                "row storage has {} values, expected n*p = {}*{} = {}",
                data.len(),
                n,
                p,
                n * p
            )));
        }
        let mut cols = vec![T::zero(); n * p];
        for r in 0..n {
            for j in 0..p {
                cols[j * n + r] = data[r * p + j];
            }
        }
        Ok(Sample { n, p, cols })
    }

    /// All-zero sample of the given shape.
    pub fn zeros(n: usize, p: usize) -> Self {
        Sample {
            n,
            p,
            cols: vec![T::zero(); n * p],
        }
    }

    /// Number of observations (rows).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of components (columns).
    pub fn p(&self) -> usize {
        self.p
    }

    /// Component `j` as a contiguous slice of length `n`.
    pub fn col(&self, j: usize) -> &[T] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    pub(crate) fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.cols[j * self.n..(j + 1) * self.n]
    }

    /// Value at row `r`, component `j`.
    pub fn get(&self, r: usize, j: usize) -> T {
        self.cols[j * self.n + r]
    }

    /// True if every value is finite.
    pub fn is_finite(&self) -> bool {
        self.cols.iter().all(|v| v.is_finite())
    }

    /// True if no column contains a repeated value.
    pub fn is_tie_free(&self) -> bool {
        (0..self.p).all(|j| is_tie_free(self.col(j)))
    }
}

// ---------------------------------------------------------------------------
// vech indexing of component pairs
// ---------------------------------------------------------------------------

/// Position of pair `(i, j)`, `0 <= i < j < p`, in the column-stacked upper
/// triangle: `(0,1), (0,2), (1,2), (0,3), ...`.
pub fn vech_index(i: usize, j: usize, p: usize) -> usize {
    assert!(i < j && j < p, "need 0 <= i < j < p, got ({i},{j}) with p={p}");
    j * (j - 1) / 2 + i
}

/// Inverse of [`vech_index`].
pub fn vech_unindex(k: usize, p: usize) -> (usize, usize) {
    let d = p * (p - 1) / 2;
    assert!(k < d, "pair index {k} out of range for p={p} (d={d})");
    let mut j = ((((8 * k + 1) as f64).sqrt() + 1.0) / 2.0) as usize;
    while j * (j - 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * j / 2 <= k {
        j += 1;
    }
    (k - j * (j - 1) / 2, j)
}

/// The set of component pairs of a `p`-variate sample in vech order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairGrid {
    p: usize,
}

impl PairGrid {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Usage(format!("need p >= 2 components, got {p}")));
        }
        Ok(PairGrid { p })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of pairs `d = p(p-1)/2`.
    pub fn d(&self) -> usize {
        self.p * (self.p - 1) / 2
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        vech_index(i, j, self.p)
    }

    pub fn unindex(&self, k: usize) -> (usize, usize) {
        vech_unindex(k, self.p)
    }

    /// Pairs in vech order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let p = self.p;
        (0..p * (p - 1) / 2).map(move |k| vech_unindex(k, p))
    }
}

// ---------------------------------------------------------------------------
// Combinatorics helpers
// ---------------------------------------------------------------------------

/// Binomial coefficient as `u128` (exact for all inputs used here).
pub(crate) fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Calls `f` on every size-`m` subset of `0..n` in lexicographic order.
fn each_combination<F: FnMut(&[usize])>(n: usize, m: usize, mut f: F) {
    if m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        // Advance to the next lexicographic subset.
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - m {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn check_rows(n: usize, m: usize) -> Result<()> {
    if n < m {
        return Err(Error::Usage(format!(
            "need at least m = {m} rows for a kernel of order {m}, got n = {n}"
        )));
    }
    Ok(())
}

fn check_cap(what: &str, needed: u128, cap: u64) -> Result<()> {
    if needed > cap as u128 {
        return Err(Error::ResourceCap {
            what: what.to_string(),
            needed,
            cap,
        });
    }
    Ok(())
}

/// The two columns of `s` named by `pair`, as slices.
fn pair_cols<'a, T: Real>(s: &'a Sample<T>, pair: (usize, usize)) -> Result<(&'a [T], &'a [T])> {
    let (i, j) = pair;
    if i >= j || j >= s.p() {
        return Err(Error::Usage(format!(
            "component pair ({i},{j}) invalid for p = {}",
            s.p()
        )));
    }
    Ok((s.col(i), s.col(j)))
}

// ---------------------------------------------------------------------------
// U-statistics
// ---------------------------------------------------------------------------

/// U-statistic of `kernel` for one component pair by direct subset
/// enumeration. Refuses workloads with more than `cap` kernel evaluations.
pub fn ustat_naive<T: Real>(
    s: &Sample<T>,
    kernel: KernelId,
    pair: (usize, usize),
    cap: u64,
) -> Result<T> {
    let (x, y) = pair_cols(s, pair)?;
    let n = s.n();
    let m = kernel.order();
    check_rows(n, m)?;
    let subsets = binom(n, m);
    check_cap(
        &format!("u-statistic enumeration (order {m}, n = {n})"),
        subsets,
        cap,
    )?;
    let mut args = [(T::zero(), T::zero()); 6];
    let mut acc = T::zero();
    each_combination(n, m, |idx| {
        for (t, &r) in idx.iter().enumerate() {
            args[t] = (x[r], y[r]);
        }
        acc += eval_kernel(kernel, &args[..m]).expect("arity fixed by construction");
    });
    Ok(acc / T::from_u128(subsets).expect("subset count representable"))
}

/// Kendall tau U-statistic from the exact pair count.
fn kendall_u<T: Real>(x: &[T], y: &[T], ws: &mut KendallScratch<T>) -> T {
    let n = x.len();
    let cd = kendall_cd(x, y, ws);
    T::from_i64(cd).unwrap() / T::from_u128(binom(n, 2)).unwrap()
}

/// Spearman U-statistic in exact integer row-sum form (ties allowed):
/// `sum_a (R_a S_a - K_a) / (2 C(n,3))` with `R_a = sum_b sgn(x_a - x_b)`,
/// `S_a` likewise for `y`, and `K_a` the Kendall row sums.
fn spearman_u_rowsum<T: Real>(x: &[T], y: &[T]) -> T {
    let n = x.len();
    let mut r = vec![0i64; n];
    let mut sv = vec![0i64; n];
    let mut kk = vec![0i64; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let su = (x[a] > x[b]) as i64 - (x[a] < x[b]) as i64;
            let sy = (y[a] > y[b]) as i64 - (y[a] < y[b]) as i64;
            r[a] += su;
            r[b] -= su;
            sv[a] += sy;
            sv[b] -= sy;
            let e = su * sy;
            kk[a] += e;
            kk[b] += e;
        }
    }
    let mut acc: i64 = 0;
    for a in 0..n {
        acc += r[a] * sv[a] - kk[a];
    }
    T::from_i64(acc).unwrap() / (real::<T>(2.0) * T::from_u128(binom(n, 3)).unwrap())
}

/// Spearman U-statistic for one pair: identity route on tie-free columns,
/// exact row-sum route otherwise.
fn spearman_u<T: Real>(x: &[T], y: &[T], ws: &mut KendallScratch<T>) -> T {
    let n = x.len();
    if is_tie_free(x) && is_tie_free(y) {
        // rho_hat = ((n+1) rho - 3 tau_hat) / (n - 2), the exact finite-sample
        // identity linking the full Spearman coefficient, the U-statistic
        // variant, and Kendall's tau on tie-free data.
        let rho = spearman_rho(x, y);
        let tau = kendall_u(x, y, ws);
        (count::<T>(n + 1) * rho - real::<T>(3.0) * tau) / count::<T>(n - 2)
    } else {
        spearman_u_rowsum(x, y)
    }
}

/// Production U-statistic for one component pair: closed form for covariance,
/// O(n log n) inversion counting for Kendall, the Spearman identity/row-sum
/// routes, and capped enumeration for the remaining kernels.
pub fn pair_ustat<T: Real>(s: &Sample<T>, kernel: KernelId, pair: (usize, usize)) -> Result<T> {
    let (x, y) = pair_cols(s, pair)?;
    let n = s.n();
    check_rows(n, kernel.order())?;
    match kernel {
        KernelId::Covariance => Ok(covariance_u(x, y)),
        KernelId::KendallTau => Ok(kendall_u(x, y, &mut KendallScratch::new())),
        KernelId::SpearmanHat => Ok(spearman_u(x, y, &mut KendallScratch::new())),
        _ => ustat_naive(s, kernel, pair, DEFAULT_ENUM_CAP),
    }
}

/// Sample covariance with denominator `n - 1` (the U-statistic value).
fn covariance_u<T: Real>(x: &[T], y: &[T]) -> T {
    let n = x.len();
    let nn = count::<T>(n);
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxy = T::zero();
    for t in 0..n {
        sx += x[t];
        sy += y[t];
        sxy += x[t] * y[t];
    }
    (nn * sxy - sx * sy) / (nn * count::<T>(n - 1))
}

/// U-statistics of all `d` component pairs in vech order (no variances).
pub fn ustat_vector<T: Real>(s: &Sample<T>, kernel: KernelId) -> Result<Vec<T>> {
    let grid = PairGrid::new(s.p())?;
    check_rows(s.n(), kernel.order())?;
    (0..grid.d())
        .into_par_iter()
        .map(|k| pair_ustat(s, kernel, grid.unindex(k)))
        .collect()
}

/// U-statistic and jackknife variance for every component pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UStatResult<T> {
    pub kernel: KernelId,
    pub n: usize,
    pub p: usize,
    /// Pair U-statistics in vech order, length `d = p(p-1)/2`.
    pub u: Vec<T>,
    /// Jackknife variance estimates, same order and length as `u`.
    pub sigma2: Vec<T>,
}

impl<T> UStatResult<T> {
    pub fn d(&self) -> usize {
        self.u.len()
    }
}

/// Byte budget for the per-column sign matrices of the fast Kendall path.
const KENDALL_SIGNS_CAP: usize = 1 << 25;

/// Evaluates `kernel` on all component pairs: U-statistics and jackknife
/// variances, parallel over pairs, deterministic in output.
pub fn ustat_matrix<T: Real>(s: &Sample<T>, kernel: KernelId) -> Result<UStatResult<T>> {
    let grid = PairGrid::new(s.p())?;
    check_rows(s.n(), kernel.order())?;
    if kernel == KernelId::KendallTau
        && s.n() > 2
        && s.p().saturating_mul(s.n() * s.n()) <= KENDALL_SIGNS_CAP
    {
        return kendall_matrix_fast(s, &grid);
    }
    let per_pair: Vec<(T, T)> = (0..grid.d())
        .into_par_iter()
        .map(|k| {
            let pair = grid.unindex(k);
            let u = pair_ustat(s, kernel, pair)?;
            let s2 = jackknife_sigma2(s, kernel, pair)?;
            Ok((u, s2))
        })
        .collect::<Result<_>>()?;
    let (u, sigma2) = per_pair.into_iter().unzip();
    Ok(UStatResult {
        kernel,
        n: s.n(),
        p: s.p(),
        u,
        sigma2,
    })
}

/// Sign matrix of one column: entry `(a, b)` is `sgn(col[a] - col[b])`.
fn kendall_sign_matrix<T: Real>(col: &[T]) -> Vec<i8> {
    let n = col.len();
    let mut s = vec![0i8; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = col[a] - col[b];
            let v = (d > T::zero()) as i8 - (d < T::zero()) as i8;
            s[a * n + b] = v;
            s[b * n + a] = -v;
        }
    }
    s
}

/// Kendall specialization of [`ustat_matrix`]: per-column sign matrices make
/// each pair one integer pass over row pairs, giving both the concordance
/// count and the jackknife row sums. The integer sums convert to the same
/// floats as the generic route, so results are bit-identical to it.
fn kendall_matrix_fast<T: Real>(s: &Sample<T>, grid: &PairGrid) -> Result<UStatResult<T>> {
    let n = s.n();
    let signs: Vec<Vec<i8>> = (0..s.p())
        .into_par_iter()
        .map(|c| kendall_sign_matrix(s.col(c)))
        .collect();
    let c2 = T::from_u128(binom(n, 2)).unwrap();
    let denom = count::<T>(n - 1);
    let scale = real::<T>(4.0) * count::<T>(n - 1)
        / (count::<T>(n) * count::<T>(n - 2) * count::<T>(n - 2));
    let per_pair: Vec<(T, T)> = (0..grid.d())
        .into_par_iter()
        .map_init(
            || vec![0i32; n],
            |rows, k| {
                let (a, b) = grid.unindex(k);
                let (sa, sb) = (&signs[a], &signs[b]);
                let mut total: i64 = 0;
                for i in 0..n {
                    let (ra, rb) = (&sa[i * n..(i + 1) * n], &sb[i * n..(i + 1) * n]);
                    let mut acc: i32 = 0;
                    for j in 0..n {
                        acc += (ra[j] as i32) * (rb[j] as i32);
                    }
                    rows[i] = acc;
                    total += acc as i64;
                }
                // Rows double-count unordered pairs, so cd = total / 2 exactly.
                let u = T::from_i64(total / 2).unwrap() / c2;
                let mut ss = T::zero();
                for &ri in rows.iter() {
                    let dev = T::from_i64(ri as i64).unwrap() / denom - u;
                    ss += dev * dev;
                }
                (u, scale * ss)
            },
        )
        .collect();
    let (u, sigma2) = per_pair.into_iter().unzip();
    Ok(UStatResult {
        kernel: KernelId::KendallTau,
        n,
        p: s.p(),
        u,
        sigma2,
    })
}

// ---------------------------------------------------------------------------
// V-statistics
// ---------------------------------------------------------------------------

/// V-statistic (mean over all `n^m` row tuples with repetition) for one pair.
///
/// Order-2 kernels use the closed form
/// `V = (sum_k h(z_k, z_k) + n(n-1) U) / n^2`; higher orders expand over set
/// partitions of the argument positions, so the cost is driven by tuples of
/// distinct rows for each block pattern rather than all `n^m` tuples. The
/// all-distinct pattern reuses the pair U-statistic.
pub fn vstat<T: Real>(
    s: &Sample<T>,
    kernel: KernelId,
    pair: (usize, usize),
    cap: u64,
) -> Result<T> {
    let (x, y) = pair_cols(s, pair)?;
    let n = s.n();
    let m = kernel.order();
    check_rows(n, m)?;
    let u = pair_ustat(s, kernel, pair)?;
    if m == 2 {
        let mut diag = T::zero();
        for t in 0..n {
            diag += eval_kernel(kernel, &[(x[t], y[t]), (x[t], y[t])])?;
        }
        let nn = count::<T>(n);
        return Ok((diag + nn * count::<T>(n - 1) * u) / (nn * nn));
    }

    let shapes = partition_shapes(m);
    let mut needed: u128 = 0;
    for shape in &shapes {
        if shape.len() < m {
            needed += falling(n, shape.len());
        }
    }
    check_cap(
        &format!("v-statistic partition expansion (order {m}, n = {n})"),
        needed,
        cap,
    )?;

    // n^m * V = sum over set partitions of positions, grouped by block-size
    // shape: (number of partitions with that shape) * (sum of the kernel over
    // ordered tuples of distinct rows, one row per block).
    let mut total = T::zero();
    let mut args = [(T::zero(), T::zero()); 6];
    for shape in &shapes {
        let k = shape.len();
        if k == m {
            // All blocks singletons: m! C(n,m) U.
            let ordered = T::from_u128(falling(n, m)).unwrap();
            total += ordered * u;
            continue;
        }
        let mut shape_sum = T::zero();
        let mut tuple = [0usize; 6];
        let mut used = vec![false; n];
        sum_over_distinct_tuples(
            n,
            k,
            0,
            &mut tuple,
            &mut used,
            &mut |tuple: &[usize; 6]| {
                let mut t = 0;
                for (b, &size) in shape.iter().enumerate() {
                    for _ in 0..size {
                        args[t] = (x[tuple[b]], y[tuple[b]]);
                        t += 1;
                    }
                }
                shape_sum += eval_kernel(kernel, &args[..m]).expect("arity fixed");
            },
        );
        total += T::from_u64(shape_count(m, shape)).unwrap() * shape_sum;
    }
    Ok(total / count::<T>(n).powi(m as i32))
}

/// Falling factorial `n (n-1) ... (n-k+1)` as `u128`.
fn falling(n: usize, k: usize) -> u128 {
    let mut f: u128 = 1;
    for i in 0..k {
        f *= (n - i) as u128;
    }
    f
}

/// Integer partitions of `m` with parts in non-increasing order.
fn partition_shapes(m: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, m, &mut Vec::new(), &mut out);
    out
}

/// Number of set partitions of `m` positions whose block sizes equal `shape`:
/// `m! / (prod_i shape_i! * prod_size mult_size!)`.
fn shape_count(m: usize, shape: &[usize]) -> u64 {
    fn fact(k: usize) -> u64 {
        (1..=k as u64).product::<u64>().max(1)
    }
    let mut denom = 1u64;
    let mut run = 1usize;
    for i in 0..shape.len() {
        denom *= fact(shape[i]);
        if i + 1 < shape.len() && shape[i + 1] == shape[i] {
            run += 1;
        } else {
            denom *= fact(run);
            run = 1;
        }
    }
    fact(m) / denom
}

/// Recursively enumerates ordered tuples of `k` distinct rows from `0..n`.
fn sum_over_distinct_tuples<F: FnMut(&[usize; 6])>(
    n: usize,
    k: usize,
    depth: usize,
    tuple: &mut [usize; 6],
    used: &mut [bool],
    f: &mut F,
) {
    if depth == k {
        f(tuple);
        return;
    }
    for r in 0..n {
        if !used[r] {
            used[r] = true;
            tuple[depth] = r;
            sum_over_distinct_tuples(n, k, depth + 1, tuple, used, f);
            used[r] = false;
        }
    }
}

// ---------------------------------------------------------------------------
// Jackknife variance
// ---------------------------------------------------------------------------

/// Leave-one-out kernel mean for row `k`: the average of the kernel with its
/// first argument fixed at row `k` over all `(m-1)`-subsets of the other rows.
pub fn loo_kernel_mean<T: Real>(
    s: &Sample<T>,
    kernel: KernelId,
    pair: (usize, usize),
    k: usize,
    cap: u64,
) -> Result<T> {
    let (x, y) = pair_cols(s, pair)?;
    let n = s.n();
    let m = kernel.order();
    check_rows(n, m)?;
    if k >= n {
        return Err(Error::Usage(format!("row {k} out of range for n = {n}")));
    }
    let subsets = binom(n - 1, m - 1);
    check_cap(
        &format!("leave-one-out enumeration (order {m}, n = {n})"),
        subsets,
        cap,
    )?;
    let mut args = [(T::zero(), T::zero()); 6];
    args[0] = (x[k], y[k]);
    let mut acc = T::zero();
    // Enumerate (m-1)-subsets of 0..n-1 and map them onto rows != k.
    each_combination(n - 1, m - 1, |idx| {
        for (t, &r) in idx.iter().enumerate() {
            let row = if r >= k { r + 1 } else { r };
            args[t + 1] = (x[row], y[row]);
        }
        acc += eval_kernel(kernel, &args[..m]).expect("arity fixed");
    });
    Ok(acc / T::from_u128(subsets).expect("subset count representable"))
}

/// Jackknife variance of the pair U-statistic:
/// `sigma2 = m^2 (n-1) / (n (n-m)^2) * sum_k (q_k - U)^2`
/// with `q_k` the leave-one-out kernel means. Requires `n > m`.
pub fn jackknife_sigma2<T: Real>(
    s: &Sample<T>,
    kernel: KernelId,
    pair: (usize, usize),
) -> Result<T> {
    let (x, y) = pair_cols(s, pair)?;
    let n = s.n();
    let m = kernel.order();
    if n <= m {
        return Err(Error::Usage(format!(
            "jackknife variance needs n > kernel order; got n = {n}, m = {m}"
        )));
    }
    let (q, u) = match kernel {
        KernelId::Covariance => {
            jackknife_q_m2(x, y, |a, b| (a.0 - b.0) * (a.1 - b.1) / real::<T>(2.0))
        }
        KernelId::KendallTau => jackknife_q_m2(x, y, |a, b| sgn(a.0 - b.0) * sgn(a.1 - b.1)),
        _ => {
            check_cap(
                &format!("jackknife enumeration (order {m}, n = {n})"),
                n as u128 * binom(n - 1, m - 1),
                DEFAULT_ENUM_CAP,
            )?;
            let u = ustat_naive(s, kernel, pair, DEFAULT_ENUM_CAP)?;
            let mut q = Vec::with_capacity(n);
            for k in 0..n {
                q.push(loo_kernel_mean(s, kernel, pair, k, DEFAULT_ENUM_CAP)?);
            }
            (q, u)
        }
    };
    let mut ss = T::zero();
    for qk in &q {
        let dev = *qk - u;
        ss += dev * dev;
    }
    let m_t = count::<T>(m);
    let n_t = count::<T>(n);
    let nm = count::<T>(n - m);
    Ok(m_t * m_t * count::<T>(n - 1) / (n_t * nm * nm) * ss)
}

/// All leave-one-out means and the U-statistic for an order-2 kernel in one
/// O(n^2) pass over unordered row pairs.
fn jackknife_q_m2<T: Real, H: Fn((T, T), (T, T)) -> T>(
    x: &[T],
    y: &[T],
    h: H,
) -> (Vec<T>, T) {
    let n = x.len();
    let mut q = vec![T::zero(); n];
    let mut total = T::zero();
    for a in 0..n {
        for b in (a + 1)..n {
            let v = h((x[a], y[a]), (x[b], y[b]));
            q[a] += v;
            q[b] += v;
            total += v;
        }
    }
    let denom = count::<T>(n - 1);
    for qk in q.iter_mut() {
        *qk = *qk / denom;
    }
    (q, total / T::from_u128(binom(n, 2)).unwrap())
}
