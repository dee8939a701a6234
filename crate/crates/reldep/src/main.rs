//! Command-line interface.
//!
//! Four subcommands: `test` runs one hypothesis test on a CSV dataset;
//! `simulate` estimates the rejection probability of one simulation cell;
//! `power` sweeps a tau grid; `table` expands a spec file into the full
//! model-by-distribution grid. Results are written as CSV with a fixed
//! column order so runs can be diffed byte for byte.
//!
//! Exit codes: 0 the run completed (the test decision is in the output, not
//! the exit code), 2 usage error, 3 data or spec parse error, 4 resource-cap
//! refusal, 5 numeric failure.

use std::fs;

use clap::{Args, Parser, Subcommand};

use reldep::{
    format_results_csv, load_csv, parse_tau_grid, run_cell, run_full_test, run_power_curve,
    run_table, Direction, Error, KernelId, Method, ModelTag, Result, SimConfig64, TableSpec,
    TestConfig64, TestReport64, Variant,
};

#[derive(Parser)]
#[command(
    name = "reldep",
    version,
    about = "Tests of relevant dependence between components of high-dimensional samples",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test a CSV dataset for relevant pairwise dependence
    Test(TestArgs),
    /// Estimate the rejection rate of one simulation cell
    Simulate(SimArgs),
    /// Sweep rejection rates over a grid of Kendall's tau values
    Power(PowerArgs),
    /// Run the full cell grid described by a spec file
    Table(TableArgs),
}

/// Flags shared by every test-running subcommand.
#[derive(Args)]
struct TestFlags {
    /// Dependence measure: covariance, kendall, spearman, tau-star,
    /// hoeffding-d, or bkr-r
    #[arg(long, default_value = "kendall")]
    kernel: String,
    /// Relevance margin (0 for the classical direction)
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Nominal level in (0, 1)
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Statistic shape: normalized, nv, or abs
    #[arg(long, default_value = "normalized")]
    variant: String,
    /// Null direction: relevant, interchanged, or classical
    #[arg(long, default_value = "relevant")]
    direction: String,
    /// Calibration: bootstrap or asymptotic
    #[arg(long, default_value = "bootstrap")]
    method: String,
    /// Bootstrap draws
    #[arg(long, default_value_t = 100)]
    boot: usize,
    /// Master seed; everything derived from it is reproducible
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncate V at delta * sgn(V) instead of +delta
    #[arg(long)]
    signed_truncation: bool,
}

impl TestFlags {
    fn kernel(&self) -> Result<KernelId> {
        KernelId::parse(&self.kernel)
    }

    fn config(&self, parallel_draws: bool) -> Result<TestConfig64> {
        let cfg = TestConfig64 {
            delta: self.delta,
            alpha: self.alpha,
            variant: Variant::parse(&self.variant)?,
            direction: Direction::parse(&self.direction)?,
            method: Method::parse(&self.method)?,
            boot: self.boot,
            seed: self.seed,
            signed_truncation: self.signed_truncation,
            parallel_draws,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct TestArgs {
    /// Input CSV with one row per observation
    #[arg(long)]
    input: String,
    /// Treat the first row as a header
    #[arg(long)]
    header: bool,
    #[command(flatten)]
    flags: TestFlags,
    /// Evaluate bootstrap draws in parallel
    #[arg(long)]
    parallel_draws: bool,
}

/// Flags describing a simulation cell's data-generating process.
#[derive(Args)]
struct CellFlags {
    /// Observations per replication
    #[arg(long)]
    n: usize,
    /// Dimension of the observed vector
    #[arg(long)]
    p: usize,
    /// Correlation model: m1, m2, or m3
    #[arg(long, default_value = "m1")]
    model: String,
    /// Marginal family: normal or t<dof>, e.g. t3
    #[arg(long, default_value = "normal")]
    dist: String,
    /// Correlated component pair for m3, 1-based as i,j
    #[arg(long)]
    pair: Option<String>,
    /// Monte Carlo replications
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Worker threads (0 or omitted: automatic)
    #[arg(long)]
    threads: Option<usize>,
    /// Write measured wall times instead of 0.000
    #[arg(long)]
    timing: bool,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<String>,
}

impl CellFlags {
    fn cell(&self, flags: &TestFlags, tau: f64, rho: Option<f64>) -> Result<SimConfig64> {
        let test = flags.config(false)?;
        let mut cfg = match rho {
            Some(rho) => SimConfig64::from_rho(
                self.n,
                self.p,
                ModelTag::parse(&self.model)?,
                reldep::Distribution::parse(&self.dist)?,
                rho,
                flags.kernel()?,
                test,
                self.reps,
            )?,
            None => SimConfig64::from_tau(
                self.n,
                self.p,
                ModelTag::parse(&self.model)?,
                reldep::Distribution::parse(&self.dist)?,
                tau,
                flags.kernel()?,
                test,
                self.reps,
            )?,
        };
        cfg.threads = self.threads;
        if let Some(pair) = &self.pair {
            let (i, j) = parse_pair(pair)?;
            cfg.model = cfg.model.with_pair(i, j);
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    cell: CellFlags,
    #[command(flatten)]
    flags: TestFlags,
    /// Dependence strength on Kendall's tau scale
    #[arg(long, conflicts_with = "rho", default_value_t = 0.1)]
    tau: f64,
    /// Dependence strength as the scale correlation (alternative to --tau)
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    cell: CellFlags,
    #[command(flatten)]
    flags: TestFlags,
    /// Tau grid as a:b:step, e.g. 0.05:0.3:0.05
    #[arg(long)]
    tau_grid: String,
}

#[derive(Args)]
struct TableArgs {
    /// Spec file with flat `key = value` lines
    #[arg(long)]
    spec: String,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 or omitted: automatic)
    #[arg(long)]
    threads: Option<usize>,
    /// Write measured wall times instead of 0.000
    #[arg(long)]
    timing: bool,
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |t: &str| -> Result<usize> {
        t.parse()
            .map_err(|_| Error::Usage(format!("cannot parse pair index {t:?}")))
    };
    match parts.as_slice() {
        [i, j] => {
            let (i, j) = (parse(i)?, parse(j)?);
            if i == 0 || j == 0 || i >= j {
                return Err(Error::Usage(format!(
                    "pair must be 1-based with i < j, got {s:?}"
                )));
            }
            Ok((i - 1, j - 1))
        }
        _ => Err(Error::Usage(format!("pair must look like 1,2; got {s:?}"))),
    }
}

fn write_out(out: &Option<String>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_report(r: &TestReport64) {
    println!(
        "kernel: {}   n: {}   p: {}   pairs: {}",
        r.kernel, r.n, r.p, r.d
    );
    println!(
        "method: {}   variant: {}   direction: {}   delta: {}   alpha: {}",
        r.method, r.variant, r.direction, r.delta, r.alpha
    );
    let null = match r.direction {
        Direction::Relevant => format!("all pairwise |dependence| <= {}", r.delta),
        Direction::Interchanged => format!("some pairwise |dependence| > {} everywhere", r.delta),
        Direction::Classical => "all pairs independent".to_string(),
    };
    println!("null hypothesis: {null}");
    println!("statistic:      {:.6}", r.statistic);
    println!("critical value: {:.6}", r.critical_value);
    if let Some(p) = r.boot_pvalue {
        println!("bootstrap p-value: {p:.4}");
    }
    println!(
        "decision: {}",
        if r.reject {
            "reject the null"
        } else {
            "fail to reject the null"
        }
    );
    if !r.exceedances.is_empty() {
        println!("pairs with |U| > delta ({} total):", r.exceedances.len());
        for &(i, j, u) in r.exceedances.iter().take(12) {
            println!("  ({},{})  U = {:+.6}", i + 1, j + 1, u);
        }
        if r.exceedances.len() > 12 {
            println!("  ...");
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Test(a) => {
            let kernel = a.flags.kernel()?;
            let cfg = a.flags.config(a.parallel_draws)?;
            let data = load_csv(&a.input, a.header)?;
            let report = run_full_test(&data, kernel, &cfg)?;
            print_report(&report);
            Ok(())
        }
        Cmd::Simulate(a) => {
            let cfg = a.cell.cell(&a.flags, a.tau, a.rho)?;
            let res = run_cell(&cfg)?;
            write_out(&a.cell.out, &format_results_csv(&[res], a.cell.timing))
        }
        Cmd::Power(a) => {
            let taus = parse_tau_grid(&a.tau_grid)?;
            let base = a.cell.cell(&a.flags, taus[0], None)?;
            let results = run_power_curve(&base, &taus)?;
            write_out(&a.cell.out, &format_results_csv(&results, a.cell.timing))
        }
        Cmd::Table(a) => {
            let text = fs::read_to_string(&a.spec).map_err(|source| Error::Io {
                path: a.spec.clone(),
                source,
            })?;
            let spec: TableSpec<f64> = TableSpec::parse(&text, &a.spec)?;
            let results = run_table(&spec, a.threads)?;
            write_out(&a.out, &format_results_csv(&results, a.timing))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
