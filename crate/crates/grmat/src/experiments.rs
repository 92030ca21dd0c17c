//! The statistical harness: Monte Carlo and exhaustive checks of trace-datum
//! equidistribution, one-step lifting fibers, trace congruences, single
//! traces, class-probability consistency and sampler uniformity.
//!
//! Sampling is split into fixed-size chunks; chunk `c` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, and partial results are
//! merged in chunk order, so reports do not depend on the worker count.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::char_derivative::digest;
use crate::conjugacy::{
    class_of_matrix_gl, enumerate_data, fulman_prob, fulman_prob_gl, so_data, ConjClassDatum, ConjugacyError,
};
use crate::groups::{enumerate_fq, lift_section, sample_haar, twist, Family, GroupError, GroupSpec, LieAlgebra, Section, Sign};
use crate::matrix::{Matrix, MatrixError};
use crate::poly::Poly;
use crate::ring::{El, Ring};
use crate::trace::{traces_to_interval_family, two_sided_modulus, vp, TraceDatum, TraceError};

/// Samples per RNG stream.
pub const CHUNK: usize = 2048;
/// Largest group enumerated in exact mode.
pub const EXACT_LIMIT: usize = 10_000_000;
/// Largest Lie-algebra fiber enumerated by the one-step check.
pub const FIBER_LIMIT: u128 = 1_000_000;
/// Largest group whose conjugation orbits are computed.
pub const ORBIT_LIMIT: usize = 2_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Conjugacy(#[from] ConjugacyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Which traces form a datum. `TwoSided` follows [`TraceDatum`]: `d1`
/// powers of the inverse and `d2` powers of the matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceShape {
    Positive { d: usize },
    TwoSided { d1: usize, d2: usize },
    Powers { powers: Vec<i64> },
}

impl TraceShape {
    /// Total length `d`.
    pub fn len(&self) -> usize {
        match self {
            TraceShape::Positive { d } => *d,
            TraceShape::TwoSided { d1, d2 } => d1 + d2,
            TraceShape::Powers { powers } => powers.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Montecarlo,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub n: usize,
    pub p: u32,
    pub m: usize,
    pub k: u32,
    pub sign: Option<Sign>,
    pub shape: TraceShape,
    pub samples: usize,
    pub seed: u64,
    pub mode: Mode,
    pub section: Section,
    /// Worker threads; `1` runs sequentially, `0` uses every core.
    #[serde(skip)]
    pub workers: usize,
    /// Overrides the default pass threshold of 2.5 times the noise.
    pub tv_threshold: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(family: Family, n: usize, p: u32, m: usize, k: u32) -> ExperimentConfig {
        ExperimentConfig {
            family,
            n,
            p,
            m,
            k,
            sign: None,
            shape: TraceShape::Positive { d: 1 },
            samples: 1000,
            seed: 0,
            mode: Mode::Montecarlo,
            section: Section::Standard,
            workers: 1,
            tv_threshold: None,
        }
    }

    pub fn group(&self) -> Result<GroupSpec, ExperimentError> {
        Ok(GroupSpec::new(self.family, self.n, self.p, self.m, self.k, self.sign)?)
    }

    /// Checks the standing hypotheses on the trace shape.
    pub fn validate_shape(&self) -> Result<(), ExperimentError> {
        match &self.shape {
            TraceShape::Positive { d } => {
                if *d == 0 || *d >= self.n {
                    return Err(ExperimentError::Config(format!("need 0 < d < n, got d = {d}, n = {}", self.n)));
                }
            }
            TraceShape::TwoSided { d1, d2 } => {
                if d1 + d2 + 1 >= self.n {
                    return Err(ExperimentError::Config(format!("need d1 + d2 < n - 1, got {} and n = {}", d1 + d2, self.n)));
                }
            }
            TraceShape::Powers { powers } => {
                if powers.is_empty() {
                    return Err(ExperimentError::Config("empty power list".into()));
                }
                if let Some(b) = powers.iter().find(|b| **b == 0 || b.unsigned_abs() % self.p as u64 == 0) {
                    return Err(ExperimentError::Config(format!("power {b} must be nonzero and prime to p")));
                }
            }
        }
        if self.mode == Mode::Montecarlo && self.samples == 0 {
            return Err(ExperimentError::Config("no samples requested".into()));
        }
        Ok(())
    }
}

#[cfg(feature = "parallel")]
fn map_indices<U, F>(len: usize, workers: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match workers {
        1 => (0..len).map(f).collect(),
        0 => (0..len).into_par_iter().map(f).collect(),
        w => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("thread pool")
            .install(|| (0..len).into_par_iter().map(f).collect()),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_indices<U, F>(len: usize, _workers: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..len).map(f).collect()
}

/// `f` over `items`, in order.
pub fn par_map<T, U, F>(items: &[T], workers: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_indices(items.len(), workers, |i| f(&items[i]))
}

/// Runs `f(rng, count)` once per chunk and returns the partial results in
/// chunk order.
pub fn run_chunks<T, F>(seed: u64, samples: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    map_indices(chunks, workers, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        f(&mut rng, CHUNK.min(samples - c * CHUNK))
    })
}

/// `samples` Haar-random elements of the group.
pub fn sample_matrices(spec: &GroupSpec, section: Section, seed: u64, samples: usize, workers: usize) -> Vec<Matrix> {
    let lie = spec.lie_algebra();
    run_chunks(seed, samples, workers, |rng, len| (0..len).map(|_| sample_haar(spec, &lie, section, rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Every element of the group at its top level: the residue-field group,
/// then each level's fibers `section(M) (I + p^j A)`.
pub fn enumerate_group(spec: &GroupSpec, workers: usize) -> Result<Vec<Matrix>, ExperimentError> {
    let lie = spec.lie_algebra();
    let mut current = enumerate_fq(spec, EXACT_LIMIT)?;
    if spec.k() > 1 {
        let total = current.len() as u128 * lie.size().pow(spec.k() - 1);
        if total > EXACT_LIMIT as u128 {
            return Err(ExperimentError::TooLarge(format!("{total} elements in {}", spec.label())));
        }
    }
    let fiber: Vec<Matrix> = if spec.k() > 1 { lie.elements().collect() } else { Vec::new() };
    for level in 2..=spec.k() {
        let lifted: Result<Vec<Matrix>, GroupError> =
            par_map(&current, workers, |m| lift_section(spec, m, level, Section::Standard, &lie)).into_iter().collect();
        current = lifted?.iter().flat_map(|m| fiber.iter().map(move |a| twist(m, a, level - 1))).collect();
    }
    Ok(current)
}

fn power_traces(m: &Matrix, d: usize) -> Vec<El> {
    let mut out = Vec::with_capacity(d);
    let mut acc = m.clone();
    for i in 0..d {
        if i > 0 {
            acc = acc.mul(m);
        }
        out.push(acc.trace());
    }
    out
}

/// The datum of `m` for the shape.
pub fn trace_datum(shape: &TraceShape, m: &Matrix) -> Result<TraceDatum, ExperimentError> {
    let r = m.ring();
    Ok(match shape {
        TraceShape::Positive { d } => TraceDatum::from_traces(r, &power_traces(m, *d))?,
        TraceShape::TwoSided { d1, d2 } => {
            let inv = m.inverse()?;
            TraceDatum::from_two_sided(r, &power_traces(&inv, *d1), &power_traces(m, *d2))?
        }
        TraceShape::Powers { .. } => return Err(ExperimentError::Config("a power list has no trace datum".into())),
    })
}

/// Histogram code of the shape's traces of `m`.
pub fn trace_cell(shape: &TraceShape, m: &Matrix) -> Result<u128, ExperimentError> {
    match shape {
        TraceShape::Powers { powers } => {
            let r = m.ring();
            let inv = if powers.iter().any(|b| *b < 0) { Some(m.inverse()?) } else { None };
            let mut code: u128 = 0;
            for &b in powers {
                let base = if b < 0 { inv.as_ref().expect("inverse computed") } else { m };
                let t = base.pow(b.unsigned_abs()).trace();
                code = code * r.size() as u128 + r.index_of(&t) as u128;
            }
            Ok(code)
        }
        _ => Ok(trace_datum(shape, m)?.cell()),
    }
}

/// Number of values the shape's data can take: `q^{kd - S}`.
pub fn cell_count(shape: &TraceShape, ring: &Ring) -> Result<u128, ExperimentError> {
    let k = ring.k();
    let side = |d: usize| -> u64 { (1..=d as u64).map(|i| (k - vp(ring.p(), i).min(k)) as u64).sum() };
    let e = match shape {
        TraceShape::Positive { d } => side(*d),
        TraceShape::TwoSided { d1, d2 } => side(*d1) + side(*d2),
        TraceShape::Powers { powers } => k as u64 * powers.len() as u64,
    };
    (ring.q() as u128)
        .checked_pow(e as u32)
        .filter(|c| *c <= 1u128 << 64)
        .ok_or_else(|| ExperimentError::TooLarge(format!("q^{e} cells")))
}

pub type Histogram = BTreeMap<u128, u64>;

fn merge(parts: impl IntoIterator<Item = Histogram>) -> Histogram {
    let mut out = Histogram::new();
    for h in parts {
        for (c, v) in h {
            *out.entry(c).or_insert(0) += v;
        }
    }
    out
}

/// Half the L1 distance between two normalized histograms on the same
/// cells, exactly.
pub fn tv_distance(a: &[u64], b: &[u64]) -> Result<BigRational, ExperimentError> {
    if a.len() != b.len() {
        return Err(ExperimentError::Config(format!("histograms of {} and {} cells", a.len(), b.len())));
    }
    let (sa, sb): (u64, u64) = (a.iter().sum(), b.iter().sum());
    if sa == 0 || sb == 0 {
        return Err(ExperimentError::Config("empty histogram".into()));
    }
    let total: BigInt = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (BigInt::from(x) * sb - BigInt::from(y) * sa).abs())
        .sum();
    Ok(BigRational::new(total, BigInt::from(2) * sa * sb))
}

/// TV distance from the uniform law on `cells` cells.
pub fn tv_to_uniform(hist: &Histogram, cells: u128) -> f64 {
    let n: u64 = hist.values().sum();
    let u = 1.0 / cells as f64;
    let seen: f64 = hist.values().map(|&c| (c as f64 / n as f64 - u).abs()).sum();
    let unseen = (cells - hist.len() as u128) as f64 * u;
    0.5 * (seen + unseen)
}

/// Expected TV of a truly uniform sampler: `sqrt(C (1 - 1/C) / (2 pi N))`,
/// capped at one.
pub fn tv_noise(cells: u128, samples: u64) -> f64 {
    let c = cells as f64;
    (c * (1.0 - 1.0 / c) / (2.0 * std::f64::consts::PI * samples as f64)).sqrt().min(1.0)
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

#[derive(Clone, Debug, Serialize)]
pub struct TVReport {
    pub config: ExperimentConfig,
    pub group: String,
    pub cell_count: u128,
    pub samples: u64,
    pub observed_cells: usize,
    pub tv: f64,
    pub noise: f64,
    pub threshold: Option<f64>,
    pub min_frequency: f64,
    pub max_frequency: f64,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: u64,
    #[serde(skip)]
    pub histogram: Histogram,
}

impl TVReport {
    fn build(cfg: &ExperimentConfig, spec: &GroupSpec, cells: u128, histogram: Histogram, start: Instant) -> TVReport {
        let samples: u64 = histogram.values().sum();
        let freq = |c: u64| c as f64 / samples as f64;
        let max_frequency = histogram.values().map(|&c| freq(c)).fold(0.0, f64::max);
        let min_frequency = if (histogram.len() as u128) < cells {
            0.0
        } else {
            histogram.values().map(|&c| freq(c)).fold(1.0, f64::min)
        };
        let tv = tv_to_uniform(&histogram, cells);
        let (noise, threshold) = match cfg.mode {
            Mode::Montecarlo => {
                let noise = tv_noise(cells, samples);
                (noise, Some(cfg.tv_threshold.unwrap_or(2.5 * noise)))
            }
            Mode::Exact => (0.0, cfg.tv_threshold),
        };
        TVReport {
            config: cfg.clone(),
            group: spec.label(),
            cell_count: cells,
            samples,
            observed_cells: histogram.len(),
            tv,
            noise,
            threshold,
            min_frequency,
            max_frequency,
            pass: threshold.is_none_or(|t| tv < t),
            seed: cfg.seed,
            runtime_ms: elapsed_ms(start),
            histogram,
        }
    }

    /// Everything except the wall-clock time and the worker count.
    pub fn same_outcome(&self, other: &TVReport) -> bool {
        let plain = |c: &ExperimentConfig| ExperimentConfig { workers: 1, ..c.clone() };
        plain(&self.config) == plain(&other.config)
            && self.cell_count == other.cell_count
            && self.tv.to_bits() == other.tv.to_bits()
            && self.histogram == other.histogram
    }
}

/// Histogram of `cell(M)` over Haar samples or over the whole group.
fn tabulate<F>(cfg: &ExperimentConfig, spec: &GroupSpec, cell: F) -> Result<Histogram, ExperimentError>
where
    F: Fn(&Matrix) -> Result<u128, ExperimentError> + Sync + Send,
{
    match cfg.mode {
        Mode::Montecarlo => {
            let lie = spec.lie_algebra();
            let parts = run_chunks(cfg.seed, cfg.samples, cfg.workers, |rng, len| {
                let mut h = Histogram::new();
                for _ in 0..len {
                    *h.entry(cell(&sample_haar(spec, &lie, cfg.section, rng))?).or_insert(0) += 1;
                }
                Ok::<_, ExperimentError>(h)
            });
            Ok(merge(parts.into_iter().collect::<Result<Vec<_>, _>>()?))
        }
        Mode::Exact => {
            let all = enumerate_group(spec, cfg.workers)?;
            let cells: Result<Vec<u128>, _> = par_map(&all, cfg.workers, &cell).into_iter().collect();
            let mut h = Histogram::new();
            for c in cells? {
                *h.entry(c).or_insert(0) += 1;
            }
            Ok(h)
        }
    }
}

/// TV distance of the trace data from uniform over the datum space.
pub fn run_trace_equidistribution(cfg: &ExperimentConfig) -> Result<TVReport, ExperimentError> {
    let start = Instant::now();
    cfg.validate_shape()?;
    let spec = cfg.group()?;
    let cells = cell_count(&cfg.shape, spec.ring())?;
    let hist = tabulate(cfg, &spec, |m| trace_cell(&cfg.shape, m))?;
    Ok(TVReport::build(cfg, &spec, cells, hist, start))
}

/// The trace-equidistribution report for each size in `sizes`.
pub fn monotonicity_probe(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<TVReport>, ExperimentError> {
    sizes
        .iter()
        .map(|&n| run_trace_equidistribution(&ExperimentConfig { n, ..cfg.clone() }))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OneStepEntry {
    pub a0_digest: String,
    pub deg_min: usize,
    /// Whether the lemma's hypothesis holds for this base point.
    pub hypothesis: bool,
    pub labels: usize,
    pub expected_labels: u128,
    pub per_label_min: u64,
    pub per_label_max: u64,
    pub expected_per_label: u128,
    pub distinct_chars: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OneStepReport {
    pub config: ExperimentConfig,
    pub group: String,
    pub fiber_size: u128,
    pub checked: usize,
    pub satisfied: usize,
    pub entries: Vec<OneStepEntry>,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// `ceil((r - 1) / 2)`.
pub fn half_degree(r: usize) -> usize {
    r / 2
}

/// Coordinates a label fixes and the threshold statistic of `A0`.
struct OneStepRule {
    coords: usize,
    stat: fn(usize) -> usize,
    holds: fn(usize, usize) -> bool,
}

fn onestep_rule(cfg: &ExperimentConfig) -> Result<OneStepRule, ExperimentError> {
    match (cfg.family, &cfg.shape) {
        (Family::GL, TraceShape::Positive { d }) => Ok(OneStepRule { coords: d + 1, stat: |r| r, holds: |s, d| s > d }),
        (Family::GL, TraceShape::TwoSided { d1, d2 }) => Ok(OneStepRule { coords: d1 + d2 + 1, stat: |r| r, holds: |s, d| s > d }),
        (Family::Sp | Family::SO, TraceShape::Positive { d }) => Ok(OneStepRule { coords: *d, stat: half_degree, holds: |s, d| s >= d }),
        _ => Err(ExperimentError::Config(format!("no one-step statement for {} with {:?}", cfg.family, cfg.shape))),
    }
}

/// The class of a lifted characteristic polynomial: a Hayes label for GL,
/// the top next-to-leading coefficients otherwise.
fn onestep_label(cfg: &ExperimentConfig, f: &Poly) -> Result<Vec<u64>, ExperimentError> {
    let r = f.ring();
    let n = f.deg().unwrap_or(0);
    let els: Vec<El> = match (cfg.family, &cfg.shape) {
        (Family::GL, TraceShape::Positive { d }) => label_els(&two_sided_modulus(r, 0, *d), f)?,
        (Family::GL, TraceShape::TwoSided { d1, d2 }) => label_els(&two_sided_modulus(r, *d1, *d2), f)?,
        (_, shape) => (1..=shape.len()).map(|j| f.coeff(n - j)).collect(),
    };
    Ok(els.iter().map(|e| r.index_of(e)).collect())
}

fn label_els(modulus: &crate::hayes::HayesModulus, f: &Poly) -> Result<Vec<El>, ExperimentError> {
    let l = modulus.label(f).map_err(|e| ExperimentError::Config(e.to_string()))?;
    Ok(l.lead_window.into_iter().chain(l.residue).collect())
}

fn onestep_entry(cfg: &ExperimentConfig, spec: &GroupSpec, lie: &LieAlgebra, rule: &OneStepRule, a0: &Matrix, workers: usize) -> Result<OneStepEntry, ExperimentError> {
    let k = spec.k();
    let lifted = lift_section(spec, a0, k, Section::Standard, lie)?;
    let fiber: Vec<Matrix> = lie.elements().collect();
    let chars: Vec<Poly> = par_map(&fiber, workers, |a| twist(&lifted, a, k - 1).char_poly());
    let mut by_label: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut by_char: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    for f in &chars {
        let label = onestep_label(cfg, f)?;
        *by_label.entry(label.clone()).or_insert(0) += 1;
        by_char.insert(f.coeffs().iter().map(|c| f.ring().index_of(c)).collect(), label);
    }
    let deg_min = a0.min_poly_mod_p().deg().unwrap_or(0);
    let stat = (rule.stat)(deg_min);
    let hypothesis = (rule.holds)(stat, cfg.shape.len());
    let q = spec.field().q() as u128;
    let size = lie.size();
    let per_label_min = by_label.values().copied().min().unwrap_or(0);
    let per_label_max = by_label.values().copied().max().unwrap_or(0);
    let (expected_labels, expected_per_label, pass) = if hypothesis {
        let labels = q.pow(rule.coords as u32);
        let per = size / labels;
        let ok = by_label.len() as u128 == labels && per_label_min as u128 == per && per_label_max as u128 == per;
        (labels, per, ok)
    } else {
        // q^l distinct polynomials, equally likely, in distinct classes
        let chars_expected = q.pow(stat as u32);
        let per = size / chars_expected;
        let distinct_labels = by_char.values().collect::<std::collections::HashSet<_>>().len();
        let ok = by_char.len() as u128 == chars_expected
            && distinct_labels == by_char.len()
            && per_label_min as u128 == per
            && per_label_max as u128 == per;
        (chars_expected, per, ok)
    };
    Ok(OneStepEntry {
        a0_digest: digest(a0),
        deg_min,
        hypothesis,
        labels: by_label.len(),
        expected_labels,
        per_label_min,
        per_label_max,
        expected_per_label,
        distinct_chars: by_char.len(),
        pass,
    })
}

/// Exhaustive Lie-fiber check of the one-step lemma from level `k - 1` to
/// `k`. Exact mode uses every base point; otherwise `samples` Haar ones.
pub fn run_onestep_check(cfg: &ExperimentConfig) -> Result<OneStepReport, ExperimentError> {
    let start = Instant::now();
    let rule = onestep_rule(cfg)?;
    let spec = cfg.group()?;
    if spec.k() < 2 {
        return Err(ExperimentError::Config("the one-step check needs k >= 2".into()));
    }
    let lie = spec.lie_algebra();
    if lie.size() > FIBER_LIMIT {
        return Err(ExperimentError::TooLarge(format!("Lie fiber of {} elements", lie.size())));
    }
    let lower = spec.at_level(spec.k() - 1)?;
    let bases = match cfg.mode {
        Mode::Exact => enumerate_group(&lower, cfg.workers)?,
        Mode::Montecarlo => sample_matrices(&lower, cfg.section, cfg.seed, cfg.samples, cfg.workers),
    };
    let entries: Result<Vec<OneStepEntry>, _> = par_map(&bases, cfg.workers, |a0| onestep_entry(cfg, &spec, &lie, &rule, a0, 1)).into_iter().collect();
    let entries = entries?;
    Ok(OneStepReport {
        config: cfg.clone(),
        group: spec.label(),
        fiber_size: lie.size(),
        checked: entries.len(),
        satisfied: entries.iter().filter(|e| e.hypothesis).count(),
        pass: entries.iter().all(|e| e.pass),
        entries,
        runtime_ms: elapsed_ms(start),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceReport {
    pub config: ExperimentConfig,
    pub group: String,
    pub samples: usize,
    pub max_power: usize,
    pub checks: u64,
    pub violations: u64,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// `(checks, violations)` of `tr(M^i) = sigma(tr(M^{i/p})) mod p^{min(v_p(i), k)}`
/// for `i <= max_power`.
pub fn congruence_violations(m: &Matrix, max_power: usize) -> (u64, u64) {
    let r = m.ring();
    let p = r.p() as usize;
    let traces = power_traces(m, max_power);
    let mut checks = 0;
    let mut bad = 0;
    for i in (p..=max_power).step_by(p) {
        let need = vp(r.p(), i as u64).min(r.k());
        let diff = r.sub(&traces[i - 1], &r.sigma(&traces[i / p - 1]));
        checks += 1;
        if r.valuation(&diff).0 < need {
            bad += 1;
        }
    }
    (checks, bad)
}

/// Counts congruence violations over Haar samples; `max_power` defaults to
/// `2 p^2`.
pub fn run_trace_congruence(cfg: &ExperimentConfig, max_power: Option<usize>) -> Result<CongruenceReport, ExperimentError> {
    let start = Instant::now();
    let spec = cfg.group()?;
    let max_power = max_power.unwrap_or(2 * (cfg.p as usize).pow(2));
    let lie = spec.lie_algebra();
    let parts = run_chunks(cfg.seed, cfg.samples, cfg.workers, |rng, len| {
        (0..len).fold((0u64, 0u64), |(c, v), _| {
            let (c1, v1) = congruence_violations(&sample_haar(&spec, &lie, cfg.section, rng), max_power);
            (c + c1, v + v1)
        })
    });
    let (checks, violations) = parts.into_iter().fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    Ok(CongruenceReport {
        config: cfg.clone(),
        group: spec.label(),
        samples: cfg.samples,
        max_power,
        checks,
        violations,
        pass: violations == 0,
        runtime_ms: elapsed_ms(start),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleTraceReport {
    pub power: u64,
    pub tv: TVReport,
    /// Exact mode: every lifting fiber spreads `tr(M^r)` uniformly over its
    /// residue class, and the level counts satisfy the recursion.
    pub recursion: Option<bool>,
}

/// TV of `tr(M^r)` from uniform on the ring.
pub fn run_single_trace(cfg: &ExperimentConfig, r: u64) -> Result<SingleTraceReport, ExperimentError> {
    let start = Instant::now();
    if r == 0 || r.is_multiple_of(cfg.p as u64) {
        return Err(ExperimentError::Config(format!("power {r} must be prime to p")));
    }
    let spec = cfg.group()?;
    let ring = spec.ring().clone();
    let cell = |m: &Matrix| Ok(ring.index_of(&m.pow(r).trace()) as u128);
    let hist = tabulate(cfg, &spec, cell)?;
    let recursion = match cfg.mode {
        Mode::Exact if spec.k() > 1 => Some(single_trace_recursion(cfg, &spec, r, &hist)?),
        _ => None,
    };
    let mut tv = TVReport::build(cfg, &spec, ring.size() as u128, hist, start);
    if let Some(ok) = recursion {
        tv.pass &= ok;
    }
    Ok(SingleTraceReport { power: r, tv, recursion })
}

fn single_trace_recursion(cfg: &ExperimentConfig, spec: &GroupSpec, r: u64, top: &Histogram) -> Result<bool, ExperimentError> {
    let k = spec.k();
    let lie = spec.lie_algebra();
    let ring = spec.ring();
    let lower = spec.at_level(k - 1)?;
    let low_ring = lower.ring().clone();
    let residue = spec.field().size() as u128;
    let per = lie.size() / residue;
    let bases = enumerate_group(&lower, cfg.workers)?;
    let fiber: Vec<Matrix> = lie.elements().collect();
    let fibers_ok = par_map(&bases, cfg.workers, |a0| {
        let Ok(lifted) = lift_section(spec, a0, k, Section::Standard, &lie) else {
            return false;
        };
        let mut counts: HashMap<u64, u128> = HashMap::new();
        for a in &fiber {
            *counts.entry(ring.index_of(&twist(&lifted, a, k - 1).pow(r).trace())).or_insert(0) += 1;
        }
        counts.len() as u128 == residue && counts.values().all(|&c| c == per)
    });
    let mut low = HashMap::new();
    for a0 in &bases {
        *low.entry(low_ring.index_of(&a0.pow(r).trace())).or_insert(0u128) += 1;
    }
    let levels_ok = top.iter().all(|(&x, &c)| {
        let reduced = ring.reduce(&ring.element_at(x as u64), &low_ring);
        low.get(&low_ring.index_of(&reduced)).copied().unwrap_or(0) * per == c as u128
    }) && top.values().map(|&c| c as u128).sum::<u128>() == bases.len() as u128 * lie.size();
    Ok(fibers_ok.into_iter().all(|b| b) && levels_ok)
}

#[derive(Clone, Debug, Serialize)]
pub struct BucketRow {
    pub datum: String,
    pub observed: u64,
    pub expected_numerator: String,
    pub expected_denominator: String,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FulmanReport {
    pub config: ExperimentConfig,
    pub group: String,
    pub order: usize,
    pub buckets: Vec<BucketRow>,
    /// Conjugation orbit sizes agree with the class sizes of the formulas.
    pub orbit_check: Option<bool>,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// Signed (or plain) data of the family whose classes make up the group.
fn family_data(spec: &GroupSpec) -> Result<Vec<ConjClassDatum>, ExperimentError> {
    let field = spec.field();
    Ok(match spec.family() {
        Family::SO => so_data(spec.n(), spec.sign().unwrap_or(Sign::Plus), field)?,
        Family::SL => {
            let one = field.one();
            enumerate_data(Family::GL, spec.n(), field)?
                .into_iter()
                .filter(|d| {
                    let c0 = d.char_poly(field).coeff(0);
                    let det = if spec.n().is_multiple_of(2) { c0 } else { field.neg(&c0) };
                    det == one
                })
                .collect()
        }
        fam => enumerate_data(fam, spec.dim(), field)?,
    })
}

/// Class probability in the group (SL renormalizes the GL value by `q - 1`).
fn class_probability(spec: &GroupSpec, d: &ConjClassDatum) -> Result<BigRational, ExperimentError> {
    Ok(match spec.family() {
        Family::SL => fulman_prob_gl(d)? * BigRational::from_integer(BigInt::from(spec.q() - 1)),
        _ => fulman_prob(d)?,
    })
}

fn matrix_key(m: &Matrix) -> Vec<u64> {
    m.entries().iter().map(|e| m.ring().index_of(e)).collect()
}

/// Sizes of the conjugation orbits of `all` under itself.
pub fn orbit_sizes(all: &[Matrix]) -> Result<Vec<(Matrix, usize)>, ExperimentError> {
    let inverses: Vec<Matrix> = all.iter().map(|g| g.inverse()).collect::<Result<_, _>>()?;
    let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
    let mut out = Vec::new();
    for x in all {
        if seen.contains(&matrix_key(x)) {
            continue;
        }
        let mut orbit = std::collections::HashSet::new();
        for (g, gi) in all.iter().zip(&inverses) {
            orbit.insert(matrix_key(&g.mul(x).mul(gi)));
        }
        out.push((x.clone(), orbit.len()));
        seen.extend(orbit);
    }
    Ok(out)
}

/// Exhaustive comparison of class frequencies with the exact formulas,
/// bucketed by the rational canonical form.
pub fn run_fulman_consistency(cfg: &ExperimentConfig) -> Result<FulmanReport, ExperimentError> {
    let start = Instant::now();
    let spec = cfg.group()?.at_level(1)?;
    let all = enumerate_group(&spec, cfg.workers)?;
    let order = all.len();
    let data = family_data(&spec)?;
    let mut expected: BTreeMap<String, BigRational> = BTreeMap::new();
    let mut class_sizes: BTreeMap<String, Vec<BigRational>> = BTreeMap::new();
    let g = BigRational::from_integer(BigInt::from(order));
    for d in &data {
        let key = d.forget_signs().canonical();
        let size = class_probability(&spec, d)? * &g;
        *expected.entry(key.clone()).or_insert_with(BigRational::zero) += &size;
        class_sizes.entry(key).or_default().push(size);
    }
    let classes: Result<Vec<ConjClassDatum>, _> = par_map(&all, cfg.workers, class_of_matrix_gl).into_iter().collect();
    let classes = classes?;
    let mut observed: BTreeMap<String, u64> = BTreeMap::new();
    for c in &classes {
        *observed.entry(c.canonical()).or_insert(0) += 1;
    }
    let keys: std::collections::BTreeSet<&String> = expected.keys().chain(observed.keys()).collect();
    let buckets: Vec<BucketRow> = keys
        .into_iter()
        .map(|k| {
            let e = expected.get(k).cloned().unwrap_or_else(BigRational::zero);
            let o = observed.get(k).copied().unwrap_or(0);
            BucketRow {
                datum: k.clone(),
                observed: o,
                expected_numerator: e.numer().to_string(),
                expected_denominator: e.denom().to_string(),
                matches: e == BigRational::from_integer(BigInt::from(o)),
            }
        })
        .collect();
    let orbit_check = match spec.family() {
        Family::GL | Family::Sp | Family::U if order <= ORBIT_LIMIT => Some(orbits_match(&all, &class_sizes)?),
        _ => None,
    };
    Ok(FulmanReport {
        config: cfg.clone(),
        group: spec.label(),
        order,
        pass: buckets.iter().all(|b| b.matches) && orbit_check != Some(false),
        buckets,
        orbit_check,
        runtime_ms: elapsed_ms(start),
    })
}

fn orbits_match(all: &[Matrix], class_sizes: &BTreeMap<String, Vec<BigRational>>) -> Result<bool, ExperimentError> {
    let mut found: BTreeMap<String, Vec<BigRational>> = BTreeMap::new();
    for (x, size) in orbit_sizes(all)? {
        found
            .entry(class_of_matrix_gl(&x)?.canonical())
            .or_default()
            .push(BigRational::from_integer(BigInt::from(size)));
    }
    let sorted = |m: &BTreeMap<String, Vec<BigRational>>| -> BTreeMap<String, Vec<BigRational>> {
        m.iter()
            .map(|(k, v)| {
                let mut v: Vec<BigRational> = v.iter().filter(|x| !x.is_zero()).cloned().collect();
                v.sort();
                (k.clone(), v)
            })
            .filter(|(_, v)| !v.is_empty())
            .collect()
    };
    Ok(sorted(&found) == sorted(class_sizes))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareReport {
    pub config: ExperimentConfig,
    pub group: String,
    pub order: usize,
    pub samples: usize,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Every sample was a group element.
    pub members: bool,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// Chi-square test of the Haar sampler against the enumerated group;
/// passes when the p-value exceeds `alpha`.
pub fn chi_square_uniformity(cfg: &ExperimentConfig, alpha: f64) -> Result<ChiSquareReport, ExperimentError> {
    let start = Instant::now();
    let spec = cfg.group()?;
    let all = enumerate_group(&spec, cfg.workers)?;
    if all.len() < 2 {
        return Err(ExperimentError::Config("the group must have at least two elements".into()));
    }
    let index: HashMap<Vec<u64>, usize> = all.iter().enumerate().map(|(i, m)| (matrix_key(m), i)).collect();
    let lie = spec.lie_algebra();
    let parts = run_chunks(cfg.seed, cfg.samples, cfg.workers, |rng, len| {
        let mut counts = vec![0u64; all.len()];
        let mut stray = 0u64;
        for _ in 0..len {
            match index.get(&matrix_key(&sample_haar(&spec, &lie, cfg.section, rng))) {
                Some(&i) => counts[i] += 1,
                None => stray += 1,
            }
        }
        (counts, stray)
    });
    let mut counts = vec![0u64; all.len()];
    let mut stray = 0;
    for (c, s) in parts {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        stray += s;
    }
    let expected = cfg.samples as f64 / all.len() as f64;
    let statistic: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let df = all.len() - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let p_value = 1.0 - dist.cdf(statistic);
    Ok(ChiSquareReport {
        config: cfg.clone(),
        group: spec.label(),
        order: all.len(),
        samples: cfg.samples,
        statistic,
        degrees_of_freedom: df,
        p_value,
        members: stray == 0,
        pass: stray == 0 && p_value > alpha,
        runtime_ms: elapsed_ms(start),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberReport {
    pub group: String,
    pub elements: usize,
    pub base_order: usize,
    pub expected_fiber: u128,
    pub min_fiber: usize,
    pub max_fiber: usize,
    pub pass: bool,
}

/// Sizes of the reduction fibers `G(level k) -> G(F_q)`.
pub fn lifting_fibers(spec: &GroupSpec, workers: usize) -> Result<FiberReport, ExperimentError> {
    let all = enumerate_group(spec, workers)?;
    let field = spec.field().clone();
    let mut fibers: HashMap<Vec<u64>, usize> = HashMap::new();
    for m in &all {
        if !spec.is_member(m) {
            return Err(ExperimentError::Group(GroupError::NotMember(spec.label())));
        }
        *fibers.entry(matrix_key(&m.reduce(&field))).or_insert(0) += 1;
    }
    let expected = spec.lie_algebra().size().pow(spec.k() - 1);
    let distinct: std::collections::HashSet<Vec<u64>> = all.iter().map(matrix_key).collect();
    let min_fiber = fibers.values().copied().min().unwrap_or(0);
    let max_fiber = fibers.values().copied().max().unwrap_or(0);
    Ok(FiberReport {
        group: spec.label(),
        elements: all.len(),
        base_order: fibers.len(),
        expected_fiber: expected,
        min_fiber,
        max_fiber,
        pass: distinct.len() == all.len() && min_fiber as u128 == expected && max_fiber as u128 == expected,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NewtonReport {
    pub group: String,
    pub elements: usize,
    pub data: usize,
    pub family_size: usize,
    pub pass: bool,
}

/// Over the whole group: two elements share the length-`d` trace datum iff
/// their characteristic polynomials fall in the same interval family.
pub fn newton_correspondence(spec: &GroupSpec, d: usize, workers: usize) -> Result<NewtonReport, ExperimentError> {
    let all = enumerate_group(spec, workers)?;
    let shape = TraceShape::Positive { d };
    let n = spec.dim();
    let width = n - d.min(n);
    let rows: Result<Vec<(u128, Poly)>, ExperimentError> =
        par_map(&all, workers, |m| Ok((trace_datum(&shape, m)?.cell(), m.char_poly()))).into_iter().collect();
    let rows = rows?;
    let mut families: HashMap<u128, Vec<Poly>> = HashMap::new();
    for (m, (cell, _)) in all.iter().zip(&rows) {
        if !families.contains_key(cell) {
            families.insert(*cell, traces_to_interval_family(&trace_datum(&shape, m)?, n)?);
        }
    }
    let in_family = |f: &Poly, fam: &[Poly]| fam.iter().any(|g| crate::trace::interval_membership(f, g, width, false));
    // forward: every element's polynomial is in its datum's family
    let forward = rows.iter().all(|(c, f)| in_family(f, &families[c]));
    // backward: no polynomial lies in the family of a different datum
    let backward = rows.iter().all(|(c, f)| families.iter().all(|(c2, fam)| c2 == c || !in_family(f, fam)));
    Ok(NewtonReport {
        group: spec.label(),
        elements: all.len(),
        data: families.len(),
        family_size: families.values().map(Vec::len).max().unwrap_or(0),
        pass: forward && backward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn tv_distance_examples() {
        assert_eq!(tv_distance(&[3, 1], &[3, 1]).unwrap(), rat(0, 1));
        assert_eq!(tv_distance(&[2, 0], &[0, 5]).unwrap(), rat(1, 1));
        assert_eq!(tv_distance(&[3, 1], &[2, 2]).unwrap(), rat(1, 4));
        assert!(tv_distance(&[1], &[1, 1]).is_err());
    }

    #[test]
    fn uniform_tv_of_histograms() {
        let h: Histogram = [(0, 3), (1, 1)].into_iter().collect();
        assert!((tv_to_uniform(&h, 2) - 0.25).abs() < 1e-12);
        let h: Histogram = [(0, 4)].into_iter().collect();
        assert!((tv_to_uniform(&h, 4) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn chunks_do_not_depend_on_workers() {
        use rand::Rng;
        let draw = |w| run_chunks(5, 5000, w, |rng, len| (0..len).map(|_| rng.gen::<u32>()).collect::<Vec<_>>());
        assert_eq!(draw(1), draw(3));
        assert_eq!(draw(1).iter().map(Vec::len).sum::<usize>(), 5000);
    }

    #[test]
    fn cell_counts() {
        let r = Ring::new(3, 2, 2).unwrap();
        assert_eq!(cell_count(&TraceShape::Positive { d: 2 }, &r).unwrap(), 81u128.pow(2));
        let z9 = Ring::new(3, 1, 2).unwrap();
        assert_eq!(cell_count(&TraceShape::Positive { d: 3 }, &z9).unwrap(), 3u128.pow(5));
        assert_eq!(cell_count(&TraceShape::Powers { powers: vec![1, -2] }, &z9).unwrap(), 81);
    }

    #[test]
    fn whole_gl1_of_z9() {
        let mut cfg = ExperimentConfig::new(Family::GL, 1, 3, 1, 2);
        cfg.mode = Mode::Exact;
        cfg.shape = TraceShape::Powers { powers: vec![1] };
        let rep = run_trace_equidistribution(&cfg).unwrap();
        assert_eq!(rep.cell_count, 9);
        assert_eq!(rep.samples, 6);
        assert_eq!(rep.observed_cells, 6);
        assert!((rep.tv - 1.0 / 3.0).abs() < 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn shape_validation() {
        let mut cfg = ExperimentConfig::new(Family::GL, 3, 3, 1, 2);
        cfg.shape = TraceShape::Positive { d: 3 };
        assert!(cfg.validate_shape().is_err());
        cfg.shape = TraceShape::TwoSided { d1: 1, d2: 1 };
        assert!(cfg.validate_shape().is_err());
        cfg.shape = TraceShape::Powers { powers: vec![1, 3] };
        assert!(cfg.validate_shape().is_err());
        cfg.shape = TraceShape::Powers { powers: vec![-1, 2] };
        assert!(cfg.validate_shape().is_ok());
    }

    #[test]
    fn unipotent_congruence() {
        let r = Ring::new(3, 1, 2).unwrap();
        let m = Matrix::from_ints(&r, &[&[1, 1], &[0, 1]]);
        assert_eq!(m.pow(3).trace(), r.from_int(2));
        assert_eq!(congruence_violations(&m, 18), (6, 0));
    }
}
