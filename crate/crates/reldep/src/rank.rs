//! Rank and inversion-counting utilities behind the fast estimator paths.
//!
//! The central routine is [`kendall_cd`]: the exact concordant-minus-discordant
//! pair count in O(n log n) with full tie handling, via a sort on the first
//! coordinate and a merge-based strict inversion count on the second. Pairs
//! tied in either coordinate contribute zero, matching the `sgn(0) = 0` kernel
//! convention.

use crate::num::Real;

/// Indices `0..n` sorted ascending by `x` (stable).
pub fn argsort<T: Real>(x: &[T]) -> Vec<u32> {
    let mut ix: Vec<u32> = (0..x.len() as u32).collect();
    ix.sort_by(|&a, &b| x[a as usize].partial_cmp(&x[b as usize]).unwrap());
    ix
}

/// True if `x` contains no repeated value.
pub fn is_tie_free<T: Real>(x: &[T]) -> bool {
    let ix = argsort(x);
    ix.windows(2)
        .all(|w| x[w[0] as usize] != x[w[1] as usize])
}

/// Number of strict inversions `(s, t): s < t, a[s] > a[t]`, counted by
/// bottom-up merge sort. `a` is sorted ascending on return; `buf` is scratch
/// and is resized as needed.
pub fn inversions<V: PartialOrd + Copy>(a: &mut [V], buf: &mut Vec<V>) -> u64 {
    let n = a.len();
    let mut count = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = usize::min(lo + width, n);
            let hi = usize::min(lo + 2 * width, n);
            if mid < hi {
                count += merge(&mut a[lo..hi], mid - lo, buf);
            }
            lo = hi;
        }
        width *= 2;
    }
    count
}

/// Merges the two sorted halves `a[..mid]`, `a[mid..]`, returning the number
/// of strict inversions across the split.
fn merge<V: PartialOrd + Copy>(a: &mut [V], mid: usize, buf: &mut Vec<V>) -> u64 {
    buf.clear();
    buf.extend_from_slice(a);
    let (left, right) = buf[..a.len()].split_at(mid);
    let mut count = 0u64;
    let (mut i, mut j) = (0, 0);
    for slot in a.iter_mut() {
        // Take from the left on ties so equal values never count as inverted.
        if i < left.len() && (j >= right.len() || left[i] <= right[j]) {
            *slot = left[i];
            i += 1;
        } else {
            *slot = right[j];
            j += 1;
            count += (left.len() - i) as u64;
        }
    }
    count
}

/// Sum over runs of equal adjacent keys of `c * (c - 1) / 2`.
fn tied_pairs_by<K: PartialEq, F: Fn(usize) -> K>(n: usize, key: F) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for t in 1..n {
        if key(t) == key(t - 1) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Exact concordant-minus-discordant pair count for `(x, y)`, ties allowed.
///
/// Equals `sum over s < t of sgn(x_s - x_t) sgn(y_s - y_t)`; dividing by
/// `n(n-1)/2` gives the Kendall tau U-statistic. O(n log n).
pub fn kendall_cd<T: Real>(x: &[T], y: &[T], scratch: &mut KendallScratch<T>) -> i64 {
    let n = x.len();
    debug_assert_eq!(n, y.len());
    if n < 2 {
        return 0;
    }
    let ix = &mut scratch.ix;
    ix.clear();
    ix.extend(0..n as u32);
    ix.sort_unstable_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        x[a].partial_cmp(&x[b])
            .unwrap()
            .then_with(|| y[a].partial_cmp(&y[b]).unwrap())
    });

    let tied_x = tied_pairs_by(n, |t| x[ix[t] as usize]);
    let tied_xy = tied_pairs_by(n, |t| {
        let i = ix[t] as usize;
        (x[i], y[i])
    });

    let seq = &mut scratch.seq;
    seq.clear();
    seq.extend(ix.iter().map(|&i| y[i as usize]));
    let d = inversions(seq, &mut scratch.buf);
    // `seq` is now sorted ascending, so y-tie runs are adjacent.
    let tied_y = tied_pairs_by(n, |t| seq[t]);

    // Inclusion-exclusion for pairs untied in both coordinates; intermediate
    // differences can dip negative, so stay signed.
    let n2 = (n as i64) * (n as i64 - 1) / 2;
    n2 - tied_x as i64 - tied_y as i64 + tied_xy as i64 - 2 * (d as i64)
}

/// Reusable buffers for [`kendall_cd`].
#[derive(Default)]
pub struct KendallScratch<T> {
    ix: Vec<u32>,
    seq: Vec<T>,
    buf: Vec<T>,
}

impl<T> KendallScratch<T> {
    pub fn new() -> Self {
        KendallScratch {
            ix: Vec::new(),
            seq: Vec::new(),
            buf: Vec::new(),
        }
    }
}

/// Midranks of `x`: tied values share the average of their rank positions,
/// ranks run from 1 to n.
pub fn midranks<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let ix = argsort(x);
    let mut r = vec![T::zero(); n];
    let mut s = 0;
    while s < n {
        let mut e = s + 1;
        while e < n && x[ix[e] as usize] == x[ix[s] as usize] {
            e += 1;
        }
        // Positions s..e (0-based) hold equal values; average 1-based rank.
        let avg = crate::num::count::<T>(s + e + 1) / crate::num::real(2.0);
        for t in s..e {
            r[ix[t] as usize] = avg;
        }
        s = e;
    }
    r
}

/// Full Spearman rank correlation: Pearson correlation of midranks.
///
/// Returns zero when either column is constant (both rank variances vanish).
pub fn spearman_rho<T: Real>(x: &[T], y: &[T]) -> T {
    let n = x.len();
    debug_assert_eq!(n, y.len());
    let rx = midranks(x);
    let ry = midranks(y);
    let mean = crate::num::count::<T>(n + 1) / crate::num::real(2.0);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for t in 0..n {
        let a = rx[t] - mean;
        let b = ry[t] - mean;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    let denom = (sxx * syy).sqrt();
    if denom == T::zero() {
        T::zero()
    } else {
        sxy / denom
    }
}
