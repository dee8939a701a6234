//! Tests of the relevant independence hypothesis.
//!
//! For a dependence measure `theta_ij` estimated pairwise by U-statistics, the
//! relevant null is `max_ij |theta_ij| <= delta`: all pairwise dependences are
//! at most `delta` in magnitude. The workhorse statistic normalizes each pair
//! by its jackknife standard error,
//! `T = max_ij (U_ij^2 - delta^2) / (2 sigma_ij delta)`,
//! and large values are evidence against the null.
//!
//! Two calibrations are provided: an asymptotic Gumbel critical value
//! `q_{1-alpha}/a_d + b_d` with the standard extreme-value norming constants,
//! and a multiplier-free row resampling bootstrap whose draws re-center each
//! pair at the truncated V-statistic `V_{ij,delta}`, placing the bootstrap
//! law at the boundary of the null. Besides the normalized statistic, the
//! bootstrap also calibrates the non-normalized squared and absolute-value
//! variants, and the interchanged direction (null: all `|theta_ij| > delta`)
//! flips both the truncation and the rejection side. The classical direction
//! is the `delta = 0` point null handled by the same machinery.

use rand::Rng;
use rayon::prelude::*;

use crate::datagen::{stream_rng, STREAM_BOOT};
use crate::error::{Error, Result};
use crate::kernels::KernelId;
use crate::num::{count, real, sgn, Real};
use crate::rank::{argsort, inversions};
use crate::ustat::{
    ustat_matrix, ustat_vector, vech_unindex, vstat, PairGrid, Sample, UStatResult,
    DEFAULT_ENUM_CAP,
};

/// Pairs whose jackknife standard error falls below this floor make the
/// normalized statistic ill-defined and raise a numeric error.
pub const SIGMA_FLOOR: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Shape of the max-type statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `max (U^2 - delta^2) / (2 sigma delta)`; requires jackknife variances.
    NormalizedSq,
    /// `sqrt(n) max (U^2 - delta^2)`.
    NonNormalizedSq,
    /// `sqrt(n) (max |U| - delta)`.
    Abs,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::NormalizedSq, Variant::NonNormalizedSq, Variant::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Variant::NormalizedSq => "normalized",
            Variant::NonNormalizedSq => "nv",
            Variant::Abs => "abs",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        match s {
            "normalized" => Ok(Variant::NormalizedSq),
            "nv" | "nonnormalized" => Ok(Variant::NonNormalizedSq),
            "abs" => Ok(Variant::Abs),
            _ => Err(Error::Usage(format!(
                "unknown variant {s:?}; expected normalized, nv, or abs"
            ))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which hypothesis is the null.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Null: all `|theta_ij| <= delta`. Reject for large statistics.
    Relevant,
    /// Null: all `|theta_ij| > delta`. Reject for small statistics.
    Interchanged,
    /// The point null `delta = 0` (classical overall independence test).
    Classical,
}

impl Direction {
    pub const ALL: [Direction; 3] = [
        Direction::Relevant,
        Direction::Interchanged,
        Direction::Classical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Relevant => "relevant",
            Direction::Interchanged => "interchanged",
            Direction::Classical => "classical",
        }
    }

    pub fn parse(s: &str) -> Result<Direction> {
        Direction::ALL
            .iter()
            .copied()
            .find(|d| d.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown direction {s:?}; expected relevant, interchanged, or classical"
                ))
            })
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Critical-value calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Gumbel limit of the normalized maximum.
    Asymptotic,
    /// Row-resampling bootstrap at the truncated boundary.
    Bootstrap,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Asymptotic => "asymptotic",
            Method::Bootstrap => "bootstrap",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "asymptotic" => Ok(Method::Asymptotic),
            "bootstrap" => Ok(Method::Bootstrap),
            _ => Err(Error::Usage(format!(
                "unknown method {s:?}; expected asymptotic or bootstrap"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full test specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig<T> {
    /// Relevance margin; positive except for the classical direction.
    pub delta: T,
    /// Nominal level in (0, 1).
    pub alpha: T,
    pub variant: Variant,
    pub direction: Direction,
    pub method: Method,
    /// Number of bootstrap draws.
    pub boot: usize,
    /// Seed for the bootstrap resampling streams.
    pub seed: u64,
    /// Truncate to `delta * sgn(V)` instead of the literal `+delta`.
    pub signed_truncation: bool,
    /// Evaluate bootstrap draws in parallel (each draw has its own stream, so
    /// results are identical either way).
    pub parallel_draws: bool,
}

impl<T: Real> Default for TestConfig<T> {
    fn default() -> Self {
        TestConfig {
            delta: real(0.1),
            alpha: real(0.1),
            variant: Variant::NormalizedSq,
            direction: Direction::Relevant,
            method: Method::Bootstrap,
            boot: 100,
            seed: 0,
            signed_truncation: false,
            parallel_draws: false,
        }
    }
}

impl<T: Real> TestConfig<T> {
    /// Checks internal consistency; every test entry point calls this.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::Usage(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        if !self.delta.is_finite() || self.delta < T::zero() {
            return Err(Error::Usage(format!(
                "delta must be finite and nonnegative, got {}",
                self.delta
            )));
        }
        match self.direction {
            Direction::Classical => {
                if self.delta != T::zero() {
                    return Err(Error::Usage(format!(
                        "classical direction tests the point null and needs delta = 0, got {}",
                        self.delta
                    )));
                }
                if self.variant == Variant::NormalizedSq {
                    return Err(Error::Usage(
                        "classical direction requires the nonnormalized or abs variant \
                         (the normalized statistic divides by delta)"
                            .into(),
                    ));
                }
                if self.method != Method::Bootstrap {
                    return Err(Error::Usage(
                        "classical direction is only calibrated by bootstrap".into(),
                    ));
                }
            }
            Direction::Relevant | Direction::Interchanged => {
                if self.delta <= T::zero() {
                    return Err(Error::Usage(format!(
                        "{} direction needs delta > 0, got {}",
                        self.direction, self.delta
                    )));
                }
            }
        }
        if self.method == Method::Asymptotic
            && (self.variant != Variant::NormalizedSq || self.direction != Direction::Relevant)
        {
            return Err(Error::Usage(
                "asymptotic calibration exists only for the normalized statistic in the \
                 relevant direction"
                    .into(),
            ));
        }
        if self.method == Method::Bootstrap && self.boot == 0 {
            return Err(Error::Usage("bootstrap needs at least one draw".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Outcome of a test run.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport<T> {
    pub kernel: KernelId,
    pub n: usize,
    pub p: usize,
    pub d: usize,
    pub variant: Variant,
    pub direction: Direction,
    pub method: Method,
    pub delta: T,
    pub alpha: T,
    pub statistic: T,
    pub critical_value: T,
    /// True when the null is rejected: statistic above the critical value for
    /// the relevant and classical directions, at or below it for the
    /// interchanged direction.
    pub reject: bool,
    /// Pairs with `|U_ij| > delta` as `(i, j, U_ij)` in vech order (0-based).
    pub exceedances: Vec<(usize, usize, T)>,
    /// Sorted bootstrap draws (bootstrap method only).
    pub boot_draws: Option<Vec<T>>,
    /// Informational bootstrap p-value: the fraction of draws at least as
    /// extreme as the statistic in the rejection direction.
    pub boot_pvalue: Option<T>,
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Gumbel quantile `q_{1-alpha} = -log log(1/(1-alpha))`.
pub fn gumbel_quantile<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Usage(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    // log(1/(1-alpha)) = -ln_1p(-alpha), accurate for small alpha.
    Ok(-(-(-alpha).ln_1p()).ln())
}

/// Extreme-value norming constants for `d` pairs:
/// `a_d = sqrt(2 log d)`, `b_d = a_d - (log log d + log 4 pi) / (2 a_d)`.
pub fn norming_constants<T: Real>(d: usize) -> Result<(T, T)> {
    if d < 2 {
        return Err(Error::Usage(format!(
            "norming constants need at least d = 2 pairs, got {d}"
        )));
    }
    let ld = count::<T>(d).ln();
    let a = (real::<T>(2.0) * ld).sqrt();
    let b = a - (ld.ln() + (real::<T>(4.0) * T::PI()).ln()) / (real::<T>(2.0) * a);
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// Recovers `p` from a vech length `d = p(p-1)/2`.
fn p_from_d(d: usize) -> Result<usize> {
    let p = (((8 * d + 1) as f64).sqrt() as usize + 1) / 2;
    for cand in p.saturating_sub(1)..=p + 1 {
        if cand >= 2 && cand * (cand - 1) / 2 == d {
            return Ok(cand);
        }
    }
    Err(Error::Usage(format!(
        "{d} is not a valid pair count p(p-1)/2"
    )))
}

/// Normalized maximum statistic `max (u^2 - delta^2) / (2 sigma delta)`.
///
/// Errors with a degenerate-variance report when any jackknife standard
/// error falls below [`SIGMA_FLOOR`].
pub fn stat_normalized_sq<T: Real>(u: &[T], sigma2: &[T], delta: T) -> Result<T> {
    if u.is_empty() || u.len() != sigma2.len() {
        return Err(Error::Usage(format!(
            "statistic needs matching nonempty inputs, got {} u-values and {} variances",
            u.len(),
            sigma2.len()
        )));
    }
    if delta <= T::zero() {
        return Err(Error::Usage(format!(
            "normalized statistic needs delta > 0, got {delta}"
        )));
    }
    let p = p_from_d(u.len())?;
    let floor = real::<T>(SIGMA_FLOOR);
    let degenerate: Vec<(usize, usize)> = sigma2
        .iter()
        .enumerate()
        .filter(|(_, &s2)| s2.sqrt() < floor)
        .map(|(k, _)| vech_unindex(k, p))
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateVariance { pairs: degenerate });
    }
    let two_delta = real::<T>(2.0) * delta;
    let mut best = T::neg_infinity();
    for k in 0..u.len() {
        let t = (u[k] * u[k] - delta * delta) / (two_delta * sigma2[k].sqrt());
        if t > best {
            best = t;
        }
    }
    Ok(best)
}

/// Non-normalized statistic `sqrt(n) max (u^2 - delta^2)`.
pub fn stat_nonnormalized_sq<T: Real>(u: &[T], delta: T, n: usize) -> Result<T> {
    if u.is_empty() {
        return Err(Error::Usage("statistic needs a nonempty u vector".into()));
    }
    if delta < T::zero() {
        return Err(Error::Usage(format!("delta must be nonnegative, got {delta}")));
    }
    let mut best = T::neg_infinity();
    for &uk in u {
        let t = uk * uk - delta * delta;
        if t > best {
            best = t;
        }
    }
    Ok(count::<T>(n).sqrt() * best)
}

/// Absolute-value statistic `sqrt(n) (max |u| - delta)`.
pub fn stat_abs<T: Real>(u: &[T], delta: T, n: usize) -> Result<T> {
    if u.is_empty() {
        return Err(Error::Usage("statistic needs a nonempty u vector".into()));
    }
    if delta < T::zero() {
        return Err(Error::Usage(format!("delta must be nonnegative, got {delta}")));
    }
    let mut best = T::neg_infinity();
    for &uk in u {
        if uk.abs() > best {
            best = uk.abs();
        }
    }
    Ok(count::<T>(n).sqrt() * (best - delta))
}

/// Truncates V-statistics at the hypothesis boundary.
///
/// Relevant and classical directions keep `v` where `|v| <= delta` and
/// replace the rest by `delta`; the interchanged direction keeps `v` where
/// `|v| > delta` and replaces the rest by `delta`. With `signed`, the
/// replacement is `delta * sgn(v)` (zero stays zero).
pub fn truncate_v<T: Real>(v: &[T], delta: T, direction: Direction, signed: bool) -> Vec<T> {
    let repl = |vi: T| if signed { delta * sgn(vi) } else { delta };
    v.iter()
        .map(|&vi| {
            let small = vi.abs() <= delta;
            let keep = match direction {
                Direction::Relevant | Direction::Classical => small,
                Direction::Interchanged => !small,
            };
            if keep {
                vi
            } else {
                repl(vi)
            }
        })
        .collect()
}

/// Resamples `n` rows with replacement.
pub fn resample<T: Real, R: Rng + ?Sized>(s: &Sample<T>, rng: &mut R) -> Sample<T> {
    let n = s.n();
    let p = s.p();
    let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut out = Sample::zeros(n, p);
    for j in 0..p {
        let src = s.col(j);
        let dst = out.col_mut(j);
        for (t, &r) in rows.iter().enumerate() {
            dst[t] = src[r];
        }
    }
    out
}

/// Smallest 1-based order-statistic rank at or above `frac * b`, snapped to
/// the nearest integer when `frac * b` is within rounding error of one, and
/// clamped into `1..=b`.
fn quantile_rank<T: Real>(frac: T, b: usize) -> usize {
    let x = frac * count::<T>(b);
    let nearest = x.round();
    let rank = if (x - nearest).abs() <= real(1e-9) {
        nearest
    } else {
        x.ceil()
    };
    (rank.to_usize().unwrap_or(1)).clamp(1, b)
}

// ---------------------------------------------------------------------------
// Asymptotic test
// ---------------------------------------------------------------------------

/// Gumbel-calibrated test of the relevant null from precomputed pair
/// statistics. Requires `d >= 2` pairs.
pub fn asymptotic_test<T: Real>(
    r: &UStatResult<T>,
    cfg: &TestConfig<T>,
) -> Result<TestReport<T>> {
    cfg.validate()?;
    if cfg.method != Method::Asymptotic {
        return Err(Error::Usage(
            "asymptotic_test called with a bootstrap configuration".into(),
        ));
    }
    let statistic = stat_normalized_sq(&r.u, &r.sigma2, cfg.delta)?;
    let (a, b) = norming_constants(r.d())?;
    let critical_value = gumbel_quantile(cfg.alpha)? / a + b;
    Ok(TestReport {
        kernel: r.kernel,
        n: r.n,
        p: r.p,
        d: r.d(),
        variant: cfg.variant,
        direction: cfg.direction,
        method: cfg.method,
        delta: cfg.delta,
        alpha: cfg.alpha,
        statistic,
        critical_value,
        reject: statistic > critical_value,
        exceedances: exceedances(&r.u, r.p, cfg.delta),
        boot_draws: None,
        boot_pvalue: None,
    })
}

fn exceedances<T: Real>(u: &[T], p: usize, delta: T) -> Vec<(usize, usize, T)> {
    u.iter()
        .enumerate()
        .filter(|(_, &uk)| uk.abs() > delta)
        .map(|(k, &uk)| {
            let (i, j) = vech_unindex(k, p);
            (i, j, uk)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Bootstrap test
// ---------------------------------------------------------------------------

/// Row-resampling bootstrap test. Draw `b` resamples rows with its own
/// seeded stream, recomputes the pair U-statistics `U*`, recenters them at
/// the truncated V-statistics, and evaluates the statistic of the configured
/// variant; the critical value is the appropriate order statistic of the
/// draws. The V-statistics and truncation come from the original sample
/// only. For the normalized variant each draw is restudentized by the
/// jackknife of its own resample: the original-sample normalizer is itself
/// noisy, the max over pairs selects pairs where it undershoots, and draws
/// that reuse it miss that selection effect and run anticonservative as the
/// dimension grows.
pub fn bootstrap_test<T: Real>(
    s: &Sample<T>,
    kernel: KernelId,
    cfg: &TestConfig<T>,
) -> Result<TestReport<T>> {
    cfg.validate()?;
    if cfg.method != Method::Bootstrap {
        return Err(Error::Usage(
            "bootstrap_test called with an asymptotic configuration".into(),
        ));
    }
    let grid = PairGrid::new(s.p())?;
    let n = s.n();
    let m = kernel.order();

    let (u, sigma2) = if cfg.variant == Variant::NormalizedSq {
        let r = ustat_matrix(s, kernel)?;
        (r.u, Some(r.sigma2))
    } else {
        (ustat_vector(s, kernel)?, None)
    };

    // Order-2 kernels vanish on the diagonal, so V = (n-1)/n * U.
    let v: Vec<T> = if m == 2 {
        let shrink = count::<T>(n - 1) / count::<T>(n);
        u.iter().map(|&uk| shrink * uk).collect()
    } else {
        let mut v = Vec::with_capacity(grid.d());
        for k in 0..grid.d() {
            v.push(vstat(s, kernel, grid.unindex(k), DEFAULT_ENUM_CAP)?);
        }
        v
    };
    let vt = truncate_v(&v, cfg.delta, cfg.direction, cfg.signed_truncation);

    let statistic = match cfg.variant {
        Variant::NormalizedSq => stat_normalized_sq(&u, sigma2.as_ref().unwrap(), cfg.delta)?,
        Variant::NonNormalizedSq => stat_nonnormalized_sq(&u, cfg.delta, n)?,
        Variant::Abs => stat_abs(&u, cfg.delta, n)?,
    };

    let ctx = DrawContext {
        cfg,
        v: &v,
        vt: &vt,
        n,
    };
    let aux = (kernel == KernelId::KendallTau
        && s.is_tie_free()
        && cfg.variant != Variant::NormalizedSq)
        .then(|| KendallBootAux::new(s, grid));
    let draw_one = |b: usize, scratch: &mut BootScratch<T>| -> Result<T> {
        let mut rng = stream_rng(cfg.seed, &[STREAM_BOOT, b as u64]);
        if cfg.variant == Variant::NormalizedSq {
            let rs = resample(s, &mut rng);
            let r = ustat_matrix(&rs, kernel)?;
            return Ok(ctx.draw_normalized(&r.u, &r.sigma2));
        }
        let u_star = match &aux {
            Some(aux) => aux.ustar(&mut rng, scratch),
            None => boot_ustar_generic(s, kernel, &mut rng)?,
        };
        Ok(ctx.draw_stat(&u_star))
    };
    let mut draws: Vec<T> = if cfg.parallel_draws {
        (0..cfg.boot)
            .into_par_iter()
            .map_init(BootScratch::new, |scratch, b| draw_one(b, scratch))
            .collect::<Result<_>>()?
    } else {
        let mut scratch = BootScratch::new();
        let mut out = Vec::with_capacity(cfg.boot);
        for b in 0..cfg.boot {
            out.push(draw_one(b, &mut scratch)?);
        }
        out
    };
    draws.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite draws"));

    let (critical_value, reject, pvalue) = decide(&draws, statistic, cfg);
    Ok(TestReport {
        kernel,
        n,
        p: s.p(),
        d: grid.d(),
        variant: cfg.variant,
        direction: cfg.direction,
        method: cfg.method,
        delta: cfg.delta,
        alpha: cfg.alpha,
        statistic,
        critical_value,
        reject,
        exceedances: exceedances(&u, s.p(), cfg.delta),
        boot_draws: Some(draws),
        boot_pvalue: Some(pvalue),
    })
}

/// Critical value, decision, and informational p-value from sorted draws.
fn decide<T: Real>(draws: &[T], statistic: T, cfg: &TestConfig<T>) -> (T, bool, T) {
    let b = draws.len();
    match cfg.direction {
        Direction::Relevant | Direction::Classical => {
            let rank = quantile_rank(T::one() - cfg.alpha, b);
            let crit = draws[rank - 1];
            let exceed = draws.iter().filter(|&&x| x >= statistic).count();
            (crit, statistic > crit, count::<T>(exceed) / count::<T>(b))
        }
        Direction::Interchanged => {
            let rank = quantile_rank(cfg.alpha, b);
            let crit = draws[rank - 1];
            let below = draws.iter().filter(|&&x| x <= statistic).count();
            (crit, statistic <= crit, count::<T>(below) / count::<T>(b))
        }
    }
}

/// Shared per-draw state: the centering and truncation vectors.
struct DrawContext<'a, T: Real> {
    cfg: &'a TestConfig<T>,
    v: &'a [T],
    vt: &'a [T],
    n: usize,
}

impl<T: Real> DrawContext<'_, T> {
    /// Normalized draw with the resample's own jackknife variances. A
    /// degenerate resampled pair yields a non-finite term under IEEE
    /// division; the guarded fold simply never selects it.
    fn draw_normalized(&self, u_star: &[T], sigma2_star: &[T]) -> T {
        let two_delta = real::<T>(2.0) * self.cfg.delta;
        let mut best = T::neg_infinity();
        for k in 0..u_star.len() {
            let e = u_star[k] - self.v[k] + self.vt[k];
            let t = (e * e - self.vt[k] * self.vt[k]) / (two_delta * sigma2_star[k].sqrt());
            if t > best {
                best = t;
            }
        }
        best
    }

    fn draw_stat(&self, u_star: &[T]) -> T {
        let mut best = T::neg_infinity();
        match self.cfg.variant {
            Variant::NormalizedSq => unreachable!("normalized draws use draw_normalized"),
            Variant::NonNormalizedSq => {
                for k in 0..u_star.len() {
                    let e = u_star[k] - self.v[k] + self.vt[k];
                    let t = e * e - self.vt[k] * self.vt[k];
                    if t > best {
                        best = t;
                    }
                }
                count::<T>(self.n).sqrt() * best
            }
            Variant::Abs => {
                for k in 0..u_star.len() {
                    let e = u_star[k] - self.v[k] + self.vt[k];
                    let t = e.abs() - self.vt[k].abs();
                    if t > best {
                        best = t;
                    }
                }
                count::<T>(self.n).sqrt() * best
            }
        }
    }
}

/// Generic per-draw U* evaluation: materialize the resample, recompute.
pub(crate) fn boot_ustar_generic<T: Real, R: Rng + ?Sized>(
    s: &Sample<T>,
    kernel: KernelId,
    rng: &mut R,
) -> Result<Vec<T>> {
    let rs = resample(s, rng);
    ustat_vector(&rs, kernel)
}

/// Reusable buffers for the fast Kendall bootstrap path.
pub(crate) struct BootScratch<T> {
    w: Vec<u32>,
    exp: Vec<u32>,
    seq: Vec<u32>,
    buf: Vec<u32>,
    _marker: std::marker::PhantomData<T>,
}

impl<T> BootScratch<T> {
    pub(crate) fn new() -> Self {
        BootScratch {
            w: Vec::new(),
            exp: Vec::new(),
            seq: Vec::new(),
            buf: Vec::new(),
            _marker: std::marker::PhantomData,
        }
    }
}

/// Precomputed column orderings for tie-free Kendall bootstrap draws.
///
/// A resample only matters through its row multiplicities `w`. Expanding each
/// column's original sort order by `w` yields the resample sorted by that
/// column with equal values adjacent, so the concordant-minus-discordant
/// count for pair `(i, j)` is `n(n-1)/2 - t - 2 D`, where
/// `t = sum_r w_r (w_r - 1) / 2` counts duplicated-row pairs (tied in both
/// coordinates) and `D` is the strict inversion count of column `j`'s ranks
/// read in column `i`'s expanded order. This avoids re-sorting per pair and
/// per draw.
pub(crate) struct KendallBootAux {
    n: usize,
    p: usize,
    d: usize,
    /// Column argsorts, `p * n`, column-major.
    ord: Vec<u32>,
    /// Rank of each row within its column, `p * n`, column-major.
    rank: Vec<u32>,
}

impl KendallBootAux {
    pub(crate) fn new<T: Real>(s: &Sample<T>, grid: PairGrid) -> Self {
        let n = s.n();
        let p = s.p();
        let mut ord = vec![0u32; p * n];
        let mut rank = vec![0u32; p * n];
        for j in 0..p {
            let o = argsort(s.col(j));
            for (t, &r) in o.iter().enumerate() {
                ord[j * n + t] = r;
                rank[j * n + r as usize] = t as u32;
            }
        }
        KendallBootAux {
            n,
            p,
            d: grid.d(),
            ord,
            rank,
        }
    }

    pub(crate) fn ustar<T: Real, R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        scratch: &mut BootScratch<T>,
    ) -> Vec<T> {
        let n = self.n;
        let p = self.p;
        scratch.w.clear();
        scratch.w.resize(n, 0);
        for _ in 0..n {
            scratch.w[rng.random_range(0..n)] += 1;
        }
        let tie_pairs: u64 = scratch
            .w
            .iter()
            .map(|&c| (c as u64) * (c as u64).saturating_sub(1) / 2)
            .sum();

        scratch.exp.clear();
        scratch.exp.reserve(p * n);
        for j in 0..p {
            for t in 0..n {
                let r = self.ord[j * n + t];
                for _ in 0..scratch.w[r as usize] {
                    scratch.exp.push(r);
                }
            }
        }

        let n2 = (n as u64) * (n as u64 - 1) / 2;
        let denom = T::from_u64(n2).unwrap();
        let mut u_star = Vec::with_capacity(self.d);
        for k in 0..self.d {
            let (i, j) = vech_unindex(k, p);
            scratch.seq.clear();
            scratch
                .seq
                .extend((0..n).map(|t| self.rank[j * n + scratch.exp[i * n + t] as usize]));
            let inv = inversions(&mut scratch.seq, &mut scratch.buf);
            let cd = (n2 - tie_pairs) as i64 - 2 * inv as i64;
            u_star.push(T::from_i64(cd).unwrap() / denom);
        }
        u_star
    }
}

/// Runs the configured test end to end on a sample.
pub fn run_full_test<T: Real>(
    s: &Sample<T>,
    kernel: KernelId,
    cfg: &TestConfig<T>,
) -> Result<TestReport<T>> {
    cfg.validate()?;
    match cfg.method {
        Method::Asymptotic => {
            let r = ustat_matrix(s, kernel)?;
            asymptotic_test(&r, cfg)
        }
        Method::Bootstrap => bootstrap_test(s, kernel, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{stream_rng, STREAM_DATA};

    fn cfg64() -> TestConfig<f64> {
        TestConfig::default()
    }

    fn rand_sample(n: usize, p: usize, seed: u64) -> Sample<f64> {
        let mut rng = stream_rng(seed, &[STREAM_DATA, 99]);
        let vals: Vec<f64> = (0..n * p).map(|_| rng.random::<f64>()).collect();
        Sample::from_cols(vals, n, p).unwrap()
    }

    #[test]
    fn gumbel_quantile_frozen_values() {
        // Frozen from 50-digit closed-form evaluation.
        assert!((gumbel_quantile(0.5f64).unwrap() - 0.36651292058166433).abs() < 1e-15);
        assert!((gumbel_quantile(0.1f64).unwrap() - 2.2503673273124453).abs() < 1e-15);
        assert!(gumbel_quantile(0.0f64).is_err());
        assert!(gumbel_quantile(1.0f64).is_err());
        assert!(gumbel_quantile(-0.2f64).is_err());
    }

    #[test]
    fn norming_constants_frozen_values() {
        let (a, b) = norming_constants::<f64>(2).unwrap();
        assert!((a - 1.1774100225154747).abs() < 1e-15);
        assert!((b - 0.25822669427980125).abs() < 1e-15);
        let (a, b) = norming_constants::<f64>(4950).unwrap();
        assert!((a - 4.1248376587600962).abs() < 1e-14);
        assert!((b - 3.5585207779481247).abs() < 1e-14);
        assert!(norming_constants::<f64>(1).is_err());
    }

    #[test]
    fn statistic_hand_values() {
        // (0.2^2 - 0.1^2) / (2 * 0.05 * 0.1) = 3 at the first pair.
        let t = stat_normalized_sq(&[0.2f64, -0.1, 0.0], &[0.0025; 3], 0.1).unwrap();
        assert!((t - 3.0).abs() < 1e-12);
        // sqrt(100) * max(0.3^2 - 0.01, 0.2^2 - 0.01) = 0.8.
        let t = stat_nonnormalized_sq(&[0.3f64, -0.2], 0.1, 100).unwrap();
        assert!((t - 0.8).abs() < 1e-12);
        // sqrt(100) * (0.4 - 0.1) = 3.
        let t = stat_abs(&[0.4f64, 0.1], 0.1, 100).unwrap();
        assert!((t - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_variance_is_reported() {
        let e = stat_normalized_sq(&[0.2f64, 0.1, 0.0], &[0.0025, 0.0, 0.0025], 0.1)
            .unwrap_err();
        match e {
            Error::DegenerateVariance { ref pairs } => assert_eq!(pairs, &vec![(0, 2)]),
            other => panic!("expected degenerate variance, got {other:?}"),
        }
        assert_eq!(e.exit_code(), 5);
    }

    #[test]
    fn truncation_examples() {
        let v = [0.05f64, -0.2, 0.15, -0.03, 0.0];
        assert_eq!(
            truncate_v(&v, 0.1, Direction::Relevant, false),
            vec![0.05, 0.1, 0.1, -0.03, 0.0]
        );
        assert_eq!(
            truncate_v(&v, 0.1, Direction::Relevant, true),
            vec![0.05, -0.1, 0.1, -0.03, 0.0]
        );
        assert_eq!(
            truncate_v(&v, 0.1, Direction::Interchanged, false),
            vec![0.1, -0.2, 0.15, 0.1, 0.1]
        );
        assert_eq!(
            truncate_v(&v, 0.1, Direction::Interchanged, true),
            vec![0.1, -0.2, 0.15, -0.1, 0.0]
        );
        assert_eq!(
            truncate_v(&v, 0.0, Direction::Classical, false),
            vec![0.0, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn quantile_ranks_snap_instead_of_drifting() {
        assert_eq!(quantile_rank(1.0 - 0.1f64, 100), 90);
        assert_eq!(quantile_rank(1.0 - 0.05f64, 100), 95);
        assert_eq!(quantile_rank(0.9f64, 7), 7);
        assert_eq!(quantile_rank(0.1f64, 100), 10);
        assert_eq!(quantile_rank(0.001f64, 10), 1);
        assert_eq!(quantile_rank(0.999f64, 10), 10);
    }

    #[test]
    fn config_validation_matrix() {
        let mut c = cfg64();
        assert!(c.validate().is_ok());

        c = cfg64();
        c.alpha = 0.0;
        assert!(c.validate().is_err());

        c = cfg64();
        c.delta = 0.0;
        assert!(c.validate().is_err(), "relevant direction needs delta > 0");

        c = cfg64();
        c.direction = Direction::Classical;
        c.delta = 0.0;
        c.variant = Variant::NonNormalizedSq;
        assert!(c.validate().is_ok());
        c.delta = 0.1;
        assert!(c.validate().is_err());
        c.delta = 0.0;
        c.variant = Variant::NormalizedSq;
        assert!(c.validate().is_err());
        c.variant = Variant::Abs;
        c.method = Method::Asymptotic;
        assert!(c.validate().is_err());

        c = cfg64();
        c.method = Method::Asymptotic;
        assert!(c.validate().is_ok());
        c.variant = Variant::Abs;
        assert!(c.validate().is_err());
        c.variant = Variant::NormalizedSq;
        c.direction = Direction::Interchanged;
        assert!(c.validate().is_err());

        c = cfg64();
        c.boot = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn resample_properties() {
        let s = rand_sample(10, 3, 5);
        let mut rng = stream_rng(1, &[STREAM_BOOT, 0]);
        let r1 = resample(&s, &mut rng);
        let mut rng = stream_rng(1, &[STREAM_BOOT, 0]);
        let r2 = resample(&s, &mut rng);
        assert_eq!(r1, r2);
        // Every resampled row is one of the original rows.
        for t in 0..10 {
            let found = (0..10).any(|r| (0..3).all(|j| r1.get(t, j) == s.get(r, j)));
            assert!(found);
        }
        // n = 1 resamples to the identical sample.
        let one = rand_sample(1, 3, 6);
        let mut rng = stream_rng(2, &[STREAM_BOOT, 0]);
        assert_eq!(resample(&one, &mut rng), one);
    }

    #[test]
    fn asymptotic_report_assembles_closed_forms() {
        let s = rand_sample(20, 4, 7);
        let r = ustat_matrix(&s, KernelId::KendallTau).unwrap();
        let mut cfg = cfg64();
        cfg.method = Method::Asymptotic;
        let rep = asymptotic_test(&r, &cfg).unwrap();
        let (a, b) = norming_constants::<f64>(6).unwrap();
        let expect = gumbel_quantile(0.1f64).unwrap() / a + b;
        assert_eq!(rep.critical_value, expect);
        assert_eq!(rep.d, 6);
        assert_eq!(rep.reject, rep.statistic > rep.critical_value);
        assert!(rep.boot_draws.is_none());
    }

    #[test]
    fn bootstrap_is_deterministic_and_parallel_invariant() {
        let s = rand_sample(24, 5, 11);
        let mut cfg = cfg64();
        cfg.boot = 50;
        cfg.seed = 33;
        let r1 = bootstrap_test(&s, KernelId::KendallTau, &cfg).unwrap();
        let r2 = bootstrap_test(&s, KernelId::KendallTau, &cfg).unwrap();
        assert_eq!(r1, r2);
        cfg.parallel_draws = true;
        let r3 = bootstrap_test(&s, KernelId::KendallTau, &cfg).unwrap();
        assert_eq!(r1, r3);
        assert_eq!(r1.boot_draws.as_ref().unwrap().len(), 50);
        let draws = r1.boot_draws.as_ref().unwrap();
        assert!(draws.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn fast_kendall_draws_match_generic_route() {
        let s = rand_sample(18, 4, 13);
        assert!(s.is_tie_free());
        let grid = PairGrid::new(4).unwrap();
        let aux = KendallBootAux::new(&s, grid);
        let mut scratch = BootScratch::<f64>::new();
        for b in 0..25u64 {
            let mut rng = stream_rng(9, &[STREAM_BOOT, b]);
            let fast = aux.ustar::<f64, _>(&mut rng, &mut scratch);
            let mut rng = stream_rng(9, &[STREAM_BOOT, b]);
            let slow = boot_ustar_generic(&s, KernelId::KendallTau, &mut rng).unwrap();
            assert_eq!(fast, slow, "draw {b}");
        }
    }

    #[test]
    fn interchanged_direction_flips_the_decision_side() {
        // Independent-ish data: all |V| small, so the interchanged test should
        // reject (conclude all dependences are at most delta).
        let s = rand_sample(40, 4, 21);
        let mut cfg = cfg64();
        cfg.direction = Direction::Interchanged;
        cfg.boot = 60;
        cfg.seed = 5;
        let rep = bootstrap_test(&s, KernelId::KendallTau, &cfg).unwrap();
        assert_eq!(rep.reject, rep.statistic <= rep.critical_value);
    }

    #[test]
    fn classical_direction_runs_with_zero_delta() {
        let s = rand_sample(30, 4, 17);
        let mut cfg = cfg64();
        cfg.direction = Direction::Classical;
        cfg.delta = 0.0;
        cfg.variant = Variant::NonNormalizedSq;
        cfg.boot = 40;
        let rep = bootstrap_test(&s, KernelId::KendallTau, &cfg).unwrap();
        assert_eq!(rep.delta, 0.0);
        assert_eq!(rep.reject, rep.statistic > rep.critical_value);
        // With delta = 0 every pair is an exceedance almost surely.
        assert_eq!(rep.exceedances.len(), rep.d);
    }

    #[test]
    fn statistic_is_monotone_in_delta() {
        let u = [0.25f64, -0.18, 0.05];
        let s2 = [0.002f64, 0.003, 0.001];
        let mut prev = f64::INFINITY;
        for delta in [0.05f64, 0.1, 0.2, 0.3] {
            let t = stat_normalized_sq(&u, &s2, delta).unwrap();
            assert!(t <= prev);
            prev = t;
        }
    }
}
