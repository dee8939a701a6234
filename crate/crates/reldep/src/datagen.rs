//! Seeded generators for the simulation study's correlation models.
//!
//! Three scale-matrix families parameterized by `rho`: equicorrelation (M1),
//! an equicorrelated leading block of size `floor(p / sqrt(2))` (M2), and a
//! single correlated pair (M3). Data are either multivariate normal or
//! elliptical Student t with `dof` degrees of freedom and scale matrix
//! `Sigma`; in both cases the population Kendall tau of a pair with scale
//! correlation `rho` is `(2/pi) asin(rho)`.
//!
//! Reproducibility runs through [`stream_rng`]: every random draw in the
//! crate comes from a ChaCha12 generator keyed by SplitMix64-style mixing of
//! a user seed and a context path (replication index, bootstrap draw index,
//! and so on), so results are independent of thread scheduling and identical
//! across runs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution as RandDistribution;

use crate::error::{Error, Result};
use crate::num::{count, real, Real};
use crate::ustat::Sample;

// ---------------------------------------------------------------------------
// Deterministic substreams
// ---------------------------------------------------------------------------

/// Context tag for data-generation streams (one per replication).
pub const STREAM_DATA: u64 = 0x5A17;
/// Context tag for bootstrap resampling streams (one per draw).
pub const STREAM_BOOT: u64 = 0xB007;
/// Context tag for deriving per-replication test seeds.
pub const STREAM_REP: u64 = 0x5EED;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `seed` and a context path to a single sub-seed.
pub fn mix_seed(seed: u64, path: &[u64]) -> u64 {
    let mut s = mix(seed ^ GOLDEN);
    for &part in path {
        s = mix(s.wrapping_add(GOLDEN) ^ part);
    }
    s
}

/// A ChaCha12 generator keyed by `seed` and a context path. Equal inputs give
/// equal streams; distinct paths give independent streams.
pub fn stream_rng(seed: u64, path: &[u64]) -> ChaCha12Rng {
    let mut s = mix_seed(seed, path);
    let mut key = [0u8; 32];
    for w in 0..4 {
        s = mix(s.wrapping_add(GOLDEN));
        key[w * 8..(w + 1) * 8].copy_from_slice(&s.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

// ---------------------------------------------------------------------------
// Scalar sampling support
// ---------------------------------------------------------------------------

/// Scalars that can be drawn from the distributions the generators need.
pub trait Draw: Real {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Chi-squared draw; `dof` must be positive.
    fn chi_squared<R: Rng + ?Sized>(dof: Self, rng: &mut R) -> Self;
}

macro_rules! impl_draw {
    ($t:ty) => {
        impl Draw for $t {
            fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rand_distr::StandardNormal.sample(rng)
            }
            fn chi_squared<R: Rng + ?Sized>(dof: Self, rng: &mut R) -> Self {
                rand_distr::ChiSquared::new(dof)
                    .expect("positive degrees of freedom")
                    .sample(rng)
            }
        }
    };
}

impl_draw!(f32);
impl_draw!(f64);

// ---------------------------------------------------------------------------
// Correlation models
// ---------------------------------------------------------------------------

/// The three scale-matrix families of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    /// Equicorrelation: all off-diagonal entries equal `rho`.
    M1,
    /// Equicorrelated leading block of size `floor(p / sqrt(2))`.
    M2,
    /// Identity except for one correlated pair.
    M3,
}

impl ModelTag {
    pub const ALL: [ModelTag; 3] = [ModelTag::M1, ModelTag::M2, ModelTag::M3];

    pub fn name(self) -> &'static str {
        match self {
            ModelTag::M1 => "m1",
            ModelTag::M2 => "m2",
            ModelTag::M3 => "m3",
        }
    }

    pub fn parse(s: &str) -> Result<ModelTag> {
        ModelTag::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown model {s:?}; expected m1, m2, or m3")))
    }
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully specified correlation model: family, dimension, strength, and (for
/// M3) the correlated pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel<T> {
    pub tag: ModelTag,
    pub p: usize,
    pub rho: T,
    /// The correlated component pair for M3; ignored by M1 and M2.
    pub pair: (usize, usize),
}

impl<T: Real> CorrelationModel<T> {
    /// Model with the default M3 pair `(0, 1)`.
    pub fn new(tag: ModelTag, p: usize, rho: T) -> Self {
        CorrelationModel {
            tag,
            p,
            rho,
            pair: (0, 1),
        }
    }

    pub fn with_pair(mut self, i: usize, j: usize) -> Self {
        self.pair = (i, j);
        self
    }

    /// Size of the M2 correlated block for dimension `p`.
    pub fn block_size(p: usize) -> usize {
        (p as f64 / std::f64::consts::SQRT_2).floor() as usize
    }

    /// The `p x p` scale matrix, row-major. Errors on parameters outside the
    /// admissible range (M1: `-1/(p-1) < rho < 1`; M2, M3: `|rho| < 1`).
    pub fn matrix(&self) -> Result<Vec<T>> {
        let p = self.p;
        let rho = self.rho;
        if p < 2 {
            return Err(Error::Usage(format!("model needs p >= 2, got {p}")));
        }
        if !rho.is_finite() {
            return Err(Error::Usage("rho must be finite".into()));
        }
        let one = T::one();
        match self.tag {
            ModelTag::M1 => {
                let lower = -one / count::<T>(p - 1);
                if rho <= lower || rho >= one {
                    return Err(Error::Usage(format!(
                        "m1 needs -1/(p-1) < rho < 1; got rho = {rho}, p = {p}"
                    )));
                }
            }
            ModelTag::M2 | ModelTag::M3 => {
                if rho <= -one || rho >= one {
                    return Err(Error::Usage(format!(
                        "{} needs |rho| < 1; got rho = {rho}",
                        self.tag
                    )));
                }
            }
        }
        let mut a = vec![T::zero(); p * p];
        for i in 0..p {
            a[i * p + i] = one;
        }
        match self.tag {
            ModelTag::M1 => {
                for i in 0..p {
                    for j in 0..p {
                        if i != j {
                            a[i * p + j] = rho;
                        }
                    }
                }
            }
            ModelTag::M2 => {
                let b = Self::block_size(p);
                for i in 0..b {
                    for j in 0..b {
                        if i != j {
                            a[i * p + j] = rho;
                        }
                    }
                }
            }
            ModelTag::M3 => {
                let (i, j) = self.pair;
                if i >= j || j >= p {
                    return Err(Error::Usage(format!(
                        "m3 pair ({i},{j}) invalid for p = {p}"
                    )));
                }
                a[i * p + j] = rho;
                a[j * p + i] = rho;
            }
        }
        Ok(a)
    }
}

/// Free-function form of [`CorrelationModel::matrix`].
pub fn model_matrix<T: Real>(model: &CorrelationModel<T>) -> Result<Vec<T>> {
    model.matrix()
}

// ---------------------------------------------------------------------------
// Sampling distributions
// ---------------------------------------------------------------------------

/// Marginal family of the generated data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution<T> {
    Normal,
    /// Elliptical Student t with the given degrees of freedom; the model
    /// matrix acts as the scale matrix, not the covariance.
    StudentT(T),
}

impl<T: Real> Distribution<T> {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "normal" {
            return Ok(Distribution::Normal);
        }
        if let Some(rest) = s.strip_prefix('t') {
            if let Ok(dof) = rest.parse::<f64>() {
                if dof > 0.0 && dof.is_finite() {
                    return Ok(Distribution::StudentT(real(dof)));
                }
            }
        }
        Err(Error::Usage(format!(
            "unknown distribution {s:?}; expected \"normal\" or \"t<dof>\" such as \"t3\""
        )))
    }
}

impl<T: Real> std::fmt::Display for Distribution<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distribution::Normal => f.write_str("normal"),
            Distribution::StudentT(dof) => {
                let d = dof.to_f64().unwrap_or(f64::NAN);
                if d.fract() == 0.0 {
                    write!(f, "t{}", d as i64)
                } else {
                    write!(f, "t{d}")
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Cholesky factorization
// ---------------------------------------------------------------------------

/// Lower Cholesky factor of the symmetric matrix `a` (row-major `p x p`).
/// Retries with diagonal jitter up to `1e-10` before giving up with a
/// numeric error.
pub fn cholesky<T: Real>(a: &[T], p: usize) -> Result<Vec<T>> {
    if a.len() != p * p {
        return Err(Error::Usage(format!(
            "matrix storage has {} values, expected {p}x{p}",
            a.len()
        )));
    }
    for &jitter in &[0.0, 1e-12, 1e-10] {
        if let Some(l) = try_cholesky(a, p, real(jitter)) {
            return Ok(l);
        }
    }
    Err(Error::Numeric(
        "matrix is not positive definite (Cholesky failed even with 1e-10 jitter)".into(),
    ))
}

fn try_cholesky<T: Real>(a: &[T], p: usize, jitter: T) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); p * p];
    for j in 0..p {
        let mut s = a[j * p + j] + jitter;
        for k in 0..j {
            s -= l[j * p + k] * l[j * p + k];
        }
        if s <= T::zero() || !s.is_finite() {
            return None;
        }
        let diag = s.sqrt();
        l[j * p + j] = diag;
        for i in (j + 1)..p {
            let mut v = a[i * p + j];
            for k in 0..j {
                v -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = v / diag;
        }
    }
    Some(l)
}

// ---------------------------------------------------------------------------
// Multivariate sampling
// ---------------------------------------------------------------------------

/// Reusable sampler: factors the scale matrix once, then draws samples.
pub struct MvSampler<T> {
    dist: Distribution<T>,
    p: usize,
    chol: Vec<T>,
}

impl<T: Draw> MvSampler<T> {
    pub fn new(dist: Distribution<T>, sigma: &[T], p: usize) -> Result<Self> {
        if let Distribution::StudentT(dof) = dist {
            if dof <= T::zero() {
                return Err(Error::Usage(format!(
                    "student t needs positive degrees of freedom, got {dof}"
                )));
            }
        }
        Ok(MvSampler {
            dist,
            p,
            chol: cholesky(sigma, p)?,
        })
    }

    /// Draws `n` rows into a fresh sample.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Sample<T> {
        let p = self.p;
        let mut s = Sample::zeros(n, p);
        let mut z = vec![T::zero(); p];
        for r in 0..n {
            for zj in z.iter_mut() {
                *zj = T::std_normal(rng);
            }
            let scale = match self.dist {
                Distribution::Normal => T::one(),
                Distribution::StudentT(dof) => {
                    let w = T::chi_squared(dof, rng);
                    (dof / w).sqrt()
                }
            };
            for j in 0..p {
                let mut x = T::zero();
                let row = &self.chol[j * p..j * p + j + 1];
                for (k, &l) in row.iter().enumerate() {
                    x += l * z[k];
                }
                s.col_mut(j)[r] = x * scale;
            }
        }
        s
    }
}

/// Draws an `n x p` sample from `dist` with scale matrix `sigma`.
pub fn sample<T: Draw, R: Rng + ?Sized>(
    dist: Distribution<T>,
    sigma: &[T],
    p: usize,
    n: usize,
    rng: &mut R,
) -> Result<Sample<T>> {
    Ok(MvSampler::new(dist, sigma, p)?.draw(n, rng))
}

// ---------------------------------------------------------------------------
// tau / rho maps
// ---------------------------------------------------------------------------

/// Population Kendall tau of an elliptical pair with scale correlation `rho`:
/// `tau = (2/pi) asin(rho)`.
pub fn tau_from_rho<T: Real>(rho: T) -> Result<T> {
    if !(rho >= -T::one() && rho <= T::one()) {
        return Err(Error::Usage(format!("rho must lie in [-1, 1], got {rho}")));
    }
    Ok(real::<T>(2.0) / T::PI() * rho.asin())
}

/// Inverse of [`tau_from_rho`]: `rho = sin(pi tau / 2)`.
pub fn rho_from_tau<T: Real>(tau: T) -> Result<T> {
    if !(tau >= -T::one() && tau <= T::one()) {
        return Err(Error::Usage(format!("tau must lie in [-1, 1], got {tau}")));
    }
    Ok((T::PI() * tau / real::<T>(2.0)).sin())
}
