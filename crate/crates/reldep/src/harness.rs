//! Monte Carlo orchestration and CSV plumbing.
//!
//! A [`SimConfig`] describes one simulation cell: a data-generating model, a
//! sample size, and a fully specified test. [`run_cell`] estimates the cell's
//! rejection probability over independent replications; [`run_power_curve`]
//! sweeps the dependence strength on Kendall's tau scale; [`run_table`]
//! expands a flat `key = value` spec file into the full grid of cells and is
//! the engine behind the `table` subcommand. CSV helpers load user data and
//! serialize results.
//!
//! Everything is deterministic for a fixed seed. Replication `r` of a cell
//! draws its data from an own counter-keyed stream and hands the test an own
//! derived seed, so results do not depend on thread count or scheduling; the
//! per-replication rejection flags reduce into a count, which is order-free.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::datagen::{
    mix_seed, rho_from_tau, stream_rng, tau_from_rho, CorrelationModel, Distribution, Draw,
    ModelTag, MvSampler, STREAM_DATA, STREAM_REP,
};
use crate::error::{Error, Result};
use crate::kernels::KernelId;
use crate::num::{count, real, Real};
use crate::testing::{run_full_test, Direction, Method, TestConfig, Variant};
use crate::ustat::Sample;

// ---------------------------------------------------------------------------
// Simulation cells
// ---------------------------------------------------------------------------

/// One simulation-study cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub n: usize,
    pub p: usize,
    pub model: CorrelationModel<T>,
    pub dist: Distribution<T>,
    pub kernel: KernelId,
    /// The test run on every replication; its `seed` is the cell's master
    /// seed, from which all replication streams derive.
    pub test: TestConfig<T>,
    /// Monte Carlo replications.
    pub reps: usize,
    /// Dependence strength on Kendall's tau scale, echoed into result rows.
    /// `model.rho` holds the equivalent scale correlation.
    pub tau: T,
    /// Worker threads for this cell; `None` (or `Some(0)`) uses the ambient
    /// rayon pool. Results are identical for every choice.
    pub threads: Option<usize>,
}

impl<T: Real> SimConfig<T> {
    /// Cell with dependence strength given on Kendall's tau scale.
    #[allow(clippy::too_many_arguments)]
    pub fn from_tau(
        n: usize,
        p: usize,
        tag: ModelTag,
        dist: Distribution<T>,
        tau: T,
        kernel: KernelId,
        test: TestConfig<T>,
        reps: usize,
    ) -> Result<Self> {
        let rho = rho_from_tau(tau)?;
        Ok(SimConfig {
            n,
            p,
            model: CorrelationModel::new(tag, p, rho),
            dist,
            kernel,
            test,
            reps,
            tau,
            threads: None,
        })
    }

    /// Cell with dependence strength given as the scale correlation.
    #[allow(clippy::too_many_arguments)]
    pub fn from_rho(
        n: usize,
        p: usize,
        tag: ModelTag,
        dist: Distribution<T>,
        rho: T,
        kernel: KernelId,
        test: TestConfig<T>,
        reps: usize,
    ) -> Result<Self> {
        let tau = tau_from_rho(rho)?;
        Ok(SimConfig {
            n,
            p,
            model: CorrelationModel::new(tag, p, rho),
            dist,
            kernel,
            test,
            reps,
            tau,
            threads: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Usage("a cell needs at least one replication".into()));
        }
        if self.model.p != self.p {
            return Err(Error::Usage(format!(
                "model dimension {} does not match p = {}",
                self.model.p, self.p
            )));
        }
        self.test.validate()
    }
}

/// Aggregated outcome of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<T> {
    pub config: SimConfig<T>,
    pub rejections: usize,
    /// `rejections / reps`, exactly.
    pub reject_rate: T,
    /// Binomial standard error `sqrt(r (1 - r) / reps)`.
    pub mc_stderr: T,
    pub wall_time_s: f64,
}

fn thread_pool(k: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build()
        .map_err(|e| Error::Usage(format!("cannot build a {k}-thread pool: {e}")))
}

/// Runs one simulation cell: `reps` independent draw-then-test trials.
///
/// Replication `r` draws data from `stream(seed, DATA, r)` and runs the test
/// with seed `mix(seed, REP, r)`, where `seed` is the cell's master seed.
pub fn run_cell<T: Real + Draw>(cfg: &SimConfig<T>) -> Result<SimResult<T>> {
    cfg.validate()?;
    let start = Instant::now();
    let sigma = cfg.model.matrix()?;
    let sampler = MvSampler::new(cfg.dist, &sigma, cfg.p)?;
    let seed = cfg.test.seed;
    let work = || -> Result<usize> {
        let flags: Vec<bool> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = stream_rng(seed, &[STREAM_DATA, rep as u64]);
                let s = sampler.draw(cfg.n, &mut rng);
                let mut tc = cfg.test;
                tc.seed = mix_seed(seed, &[STREAM_REP, rep as u64]);
                run_full_test(&s, cfg.kernel, &tc).map(|r| r.reject)
            })
            .collect::<Result<_>>()?;
        Ok(flags.into_iter().filter(|&b| b).count())
    };
    let rejections = match cfg.threads {
        Some(k) if k > 0 => thread_pool(k)?.install(work),
        _ => work(),
    }?;
    let reps = count::<T>(cfg.reps);
    let reject_rate = count::<T>(rejections) / reps;
    let mc_stderr = (reject_rate * (T::one() - reject_rate) / reps).sqrt();
    Ok(SimResult {
        config: cfg.clone(),
        rejections,
        reject_rate,
        mc_stderr,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs `base` at each tau in `taus` (all in `[0, 1)`), holding everything
/// else fixed — including the master seed, so the curve uses common random
/// numbers across grid points.
pub fn run_power_curve<T: Real + Draw>(
    base: &SimConfig<T>,
    taus: &[T],
) -> Result<Vec<SimResult<T>>> {
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        if !(tau >= T::zero() && tau < T::one()) {
            return Err(Error::Usage(format!("tau must lie in [0, 1), got {tau}")));
        }
        let mut cfg = base.clone();
        cfg.tau = tau;
        cfg.model.rho = rho_from_tau(tau)?;
        out.push(run_cell(&cfg)?);
    }
    Ok(out)
}

/// Parses a power grid `a:b:step` into taus `a, a + step, ..., <= b`.
pub fn parse_tau_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(Error::Usage(format!(
            "tau grid must have the form a:b:step, got {s:?}"
        )));
    };
    let parse = |t: &str| -> Result<f64> {
        t.trim()
            .parse()
            .map_err(|_| Error::Usage(format!("cannot parse {t:?} in the tau grid as a number")))
    };
    let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
    if !(step > 0.0) {
        return Err(Error::Usage(format!("tau grid step must be positive, got {step}")));
    }
    if !(0.0..1.0).contains(&a) || b < a || b >= 1.0 {
        return Err(Error::Usage(format!(
            "tau grid must satisfy 0 <= a <= b < 1, got {a}:{b}"
        )));
    }
    let mut taus = Vec::new();
    for k in 0.. {
        let t = a + k as f64 * step;
        if t > b + 1e-12 {
            break;
        }
        // Snap accumulated float error so grid points print cleanly.
        taus.push((t * 1e12).round() / 1e12);
    }
    Ok(taus)
}

// ---------------------------------------------------------------------------
// Table specs
// ---------------------------------------------------------------------------

/// Parsed form of a `table` spec file: the cell grid is the product of
/// `np x models x dists`, with every other setting shared.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec<T> {
    pub np: Vec<(usize, usize)>,
    pub models: Vec<ModelTag>,
    pub dists: Vec<Distribution<T>>,
    pub kernel: KernelId,
    pub variant: Variant,
    pub direction: Direction,
    pub method: Method,
    pub delta: T,
    pub alpha: T,
    pub tau: T,
    pub reps: usize,
    pub boot: usize,
    pub seed: u64,
    pub signed_truncation: bool,
}

impl<T: Real> Default for TableSpec<T> {
    /// Paper-style defaults: all three models, both distributions, Kendall's
    /// tau with the normalized bootstrap at `delta = alpha = tau = 0.1`,
    /// 1000 replications and 100 bootstrap draws. `np` must still be set.
    fn default() -> Self {
        TableSpec {
            np: Vec::new(),
            models: ModelTag::ALL.to_vec(),
            dists: vec![Distribution::Normal, Distribution::StudentT(real(3.0))],
            kernel: KernelId::KendallTau,
            variant: Variant::NormalizedSq,
            direction: Direction::Relevant,
            method: Method::Bootstrap,
            delta: real(0.1),
            alpha: real(0.1),
            tau: real(0.1),
            reps: 1000,
            boot: 100,
            seed: 0,
            signed_truncation: false,
        }
    }
}

fn perr(path: &str, line: usize, msg: String) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg,
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|t| !t.is_empty())
}

impl<T: Real> TableSpec<T> {
    /// Parses the flat `key = value` spec format. `#` starts a comment, blank
    /// lines are skipped, keys must not repeat, and `np` is required. `tau`
    /// and `rho` both set the dependence strength and are mutually exclusive.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut spec = TableSpec::default();
        let mut seen: Vec<String> = Vec::new();
        let mut strength_key: Option<&'static str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(perr(
                    path,
                    line_no,
                    format!("expected `key = value`, got {line:?}"),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(perr(path, line_no, format!("key {key:?} has no value")));
            }
            if seen.iter().any(|k| k == key) {
                return Err(perr(path, line_no, format!("duplicate key {key:?}")));
            }
            seen.push(key.to_string());
            let fail = |msg: String| perr(path, line_no, msg);
            match key {
                "np" => {
                    spec.np = split_list(value)
                        .map(|item| {
                            let Some((n, p)) = item.split_once('x') else {
                                return Err(fail(format!(
                                    "np entry {item:?} must look like 50x100"
                                )));
                            };
                            let n = n.trim().parse().map_err(|_| {
                                fail(format!("cannot parse n in np entry {item:?}"))
                            })?;
                            let p = p.trim().parse().map_err(|_| {
                                fail(format!("cannot parse p in np entry {item:?}"))
                            })?;
                            Ok((n, p))
                        })
                        .collect::<Result<_>>()?;
                    if spec.np.is_empty() {
                        return Err(fail("np list is empty".into()));
                    }
                }
                "model" | "models" => {
                    spec.models = split_list(value)
                        .map(|m| ModelTag::parse(m).map_err(|e| fail(e.to_string())))
                        .collect::<Result<_>>()?;
                    if spec.models.is_empty() {
                        return Err(fail("model list is empty".into()));
                    }
                }
                "dist" | "dists" => {
                    spec.dists = split_list(value)
                        .map(|d| Distribution::parse(d).map_err(|e| fail(e.to_string())))
                        .collect::<Result<_>>()?;
                    if spec.dists.is_empty() {
                        return Err(fail("dist list is empty".into()));
                    }
                }
                "kernel" => spec.kernel = KernelId::parse(value).map_err(|e| fail(e.to_string()))?,
                "variant" => {
                    spec.variant = Variant::parse(value).map_err(|e| fail(e.to_string()))?
                }
                "direction" => {
                    spec.direction = Direction::parse(value).map_err(|e| fail(e.to_string()))?
                }
                "method" => spec.method = Method::parse(value).map_err(|e| fail(e.to_string()))?,
                "delta" => spec.delta = parse_real(value).map_err(fail)?,
                "alpha" => spec.alpha = parse_real(value).map_err(fail)?,
                "tau" | "rho" => {
                    if let Some(other) = strength_key {
                        return Err(fail(format!(
                            "{key:?} conflicts with {other:?}; give the dependence \
                             strength only once"
                        )));
                    }
                    strength_key = Some(if key == "tau" { "tau" } else { "rho" });
                    let x: T = parse_real(value).map_err(&fail)?;
                    spec.tau = if key == "tau" {
                        x
                    } else {
                        tau_from_rho(x).map_err(|e| fail(e.to_string()))?
                    };
                }
                "reps" => spec.reps = parse_int(value).map_err(fail)?,
                "boot" => spec.boot = parse_int(value).map_err(fail)?,
                "seed" => {
                    spec.seed = value
                        .parse()
                        .map_err(|_| fail(format!("cannot parse seed {value:?} as u64")))?
                }
                "signed_truncation" => {
                    spec.signed_truncation = match value {
                        "true" => true,
                        "false" => false,
                        _ => {
                            return Err(fail(format!(
                                "signed_truncation must be true or false, got {value:?}"
                            )))
                        }
                    }
                }
                _ => return Err(perr(path, line_no, format!("unknown key {key:?}"))),
            }
        }
        if spec.np.is_empty() {
            return Err(perr(path, 0, "missing required key \"np\"".into()));
        }
        Ok(spec)
    }
}

fn parse_real<T: Real>(value: &str) -> std::result::Result<T, String> {
    let x: f64 = value
        .parse()
        .map_err(|_| format!("cannot parse {value:?} as a number"))?;
    if !x.is_finite() {
        return Err(format!("value {value:?} is not finite"));
    }
    Ok(real(x))
}

fn parse_int(value: &str) -> std::result::Result<usize, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse {value:?} as a positive integer"))
}

/// Expands a spec into its cell grid in row order `np x model x dist`. Row
/// `k` gets the derived master seed `mix(seed, k)`, so cells are independent
/// and each row can be rerun in isolation.
pub fn table_cells<T: Real>(
    spec: &TableSpec<T>,
    threads: Option<usize>,
) -> Result<Vec<SimConfig<T>>> {
    let rho = rho_from_tau(spec.tau)?;
    let mut cells = Vec::new();
    for &(n, p) in &spec.np {
        for &tag in &spec.models {
            for &dist in &spec.dists {
                let test = TestConfig {
                    delta: spec.delta,
                    alpha: spec.alpha,
                    variant: spec.variant,
                    direction: spec.direction,
                    method: spec.method,
                    boot: spec.boot,
                    seed: mix_seed(spec.seed, &[cells.len() as u64]),
                    signed_truncation: spec.signed_truncation,
                    parallel_draws: false,
                };
                cells.push(SimConfig {
                    n,
                    p,
                    model: CorrelationModel::new(tag, p, rho),
                    dist,
                    kernel: spec.kernel,
                    test,
                    reps: spec.reps,
                    tau: spec.tau,
                    threads,
                });
            }
        }
    }
    Ok(cells)
}

/// Runs every cell of a table spec in row order.
pub fn run_table<T: Real + Draw>(
    spec: &TableSpec<T>,
    threads: Option<usize>,
) -> Result<Vec<SimResult<T>>> {
    table_cells(spec, threads)?.iter().map(run_cell).collect()
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Column order of every results CSV this crate writes.
pub const RESULTS_HEADER: &str =
    "n,p,model,dist,kernel,variant,direction,method,delta,alpha,tau,reps,boot,reject_rate,mc_stderr,seed,wall_time_s";

/// Serializes results rows under [`RESULTS_HEADER`]. Rates use 4 decimals.
/// Unless `timing` is set, `wall_time_s` is written as `0.000` so reruns are
/// byte-identical.
pub fn format_results_csv<T: Real>(results: &[SimResult<T>], timing: bool) -> String {
    let mut out = String::with_capacity(64 + 96 * results.len());
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in results {
        let c = &r.config;
        let wall = if timing { r.wall_time_s } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.4},{:.4},{},{:.3}",
            c.n,
            c.p,
            c.model.tag,
            c.dist,
            c.kernel,
            c.test.variant,
            c.test.direction,
            c.test.method,
            c.test.delta,
            c.test.alpha,
            c.tau,
            c.reps,
            c.test.boot,
            r.reject_rate,
            r.mc_stderr,
            c.test.seed,
            wall,
        );
    }
    out
}

/// Serializes a sample as CSV, one row per observation, shortest decimal
/// form that parses back to the identical float. With `header`, columns are
/// labeled `x1..xp`.
pub fn format_sample_csv<T: Real>(s: &Sample<T>, header: bool) -> String {
    let n = s.n();
    let p = s.p();
    let mut out = String::new();
    if header {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "x{}", j + 1);
        }
        out.push('\n');
    }
    for t in 0..n {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", s.get(t, j));
        }
        out.push('\n');
    }
    out
}

/// Reads a rectangular numeric CSV into a sample. `has_header` skips the
/// first non-blank row.
pub fn load_csv<T: Real>(path: &str, has_header: bool) -> Result<Sample<T>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    parse_sample_csv(&text, path, has_header)
}

/// [`load_csv`] on in-memory text; `path` only labels errors. Accepts LF or
/// CRLF endings and an optional UTF-8 byte-order mark, skips blank lines,
/// and rejects ragged rows, non-numeric cells, non-finite values, and empty
/// input, each with its 1-based line number.
pub fn parse_sample_csv<T: Real>(text: &str, path: &str, has_header: bool) -> Result<Sample<T>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut header_pending = has_header;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let mut row = Vec::with_capacity(width.unwrap_or(4));
        for (col, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let x: f64 = cell.parse().map_err(|_| {
                perr(
                    path,
                    line_no,
                    format!("cannot parse {:?} in column {} as a number", cell, col + 1),
                )
            })?;
            if !x.is_finite() {
                return Err(perr(
                    path,
                    line_no,
                    format!("non-finite value {:?} in column {}", cell, col + 1),
                ));
            }
            row.push(real::<T>(x));
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(perr(
                    path,
                    line_no,
                    format!("row has {} columns, expected {}", row.len(), w),
                ));
            }
            _ => {}
        }
        rows.push(row);
    }
    let p = width.ok_or_else(|| perr(path, 1, "no data rows".into()))?;
    let n = rows.len();
    let mut s = Sample::zeros(n, p);
    for (t, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            s.col_mut(j)[t] = x;
        }
    }
    Ok(s)
}
