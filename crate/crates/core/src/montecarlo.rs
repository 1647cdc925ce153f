//! Seeded Monte Carlo estimation of logical-noise statistics.
//!
//! Trials are cut into fixed-size blocks; block `b` draws all of its
//! randomness from stream `b` of the seed. Blocks are merged in index order,
//! so a report is bit-identical for every shard (thread) count.

use rayon::prelude::*;

use crate::analytic::AnalyticDistribution;
use crate::codes::CodeSpec;
use crate::decoder::{Decoder, DecoderKind};
use crate::error::{Error, Result};
use crate::noise::{stream_rng, IidNoiseModel, NoiseVector};

/// Trials per random stream.
pub const BLOCK_SIZE: u64 = 1 << 14;

/// Number of histogram bins.
pub const HISTOGRAM_BINS: usize = 201;

/// Streaming mean and central moments up to fourth order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term = delta * dn * n1;
        self.mean += dn;
        self.m4 += term * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term;
    }

    /// Combines two disjoint samples.
    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3 + other.m3 + d2 * d * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        *self = Moments { n: self.n + other.n, mean: self.mean + d * nb / n, m2, m3, m4 };
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the sample mean.
    pub fn se_mean(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    /// Standard error of the sample standard deviation (delta method with
    /// the sample fourth moment, so heavy-tailed mixtures are not
    /// under-covered).
    pub fn se_std(&self) -> f64 {
        if self.n < 4 || self.m2 == 0.0 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = self.m2 / n;
        let mu4 = self.m4 / n;
        let var_of_var = ((mu4 - var * var * (n - 3.0) / (n - 1.0)) / n).max(0.0);
        var_of_var.sqrt() / (2.0 * self.std_dev())
    }

    /// Sample excess kurtosis.
    pub fn excess_kurtosis(&self) -> f64 {
        if self.m2 == 0.0 {
            return 0.0;
        }
        self.n as f64 * self.m4 / (self.m2 * self.m2) - 3.0
    }
}

/// Uniform histogram with explicit under- and overflow counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    underflow: u64,
    overflow: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) || bins == 0 {
            return Err(Error::Domain(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self { lo, hi, counts: vec![0; bins], underflow: 0, overflow: 0 })
    }

    pub fn add(&mut self, x: f64) {
        if x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let bins = self.counts.len();
            let i = (((x - self.lo) / (self.hi - self.lo)) * bins as f64) as usize;
            self.counts[i.min(bins - 1)] += 1;
        }
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }

    pub fn edges(&self) -> Vec<f64> {
        let bins = self.counts.len();
        (0..=bins).map(|i| self.lo + (self.hi - self.lo) * i as f64 / bins as f64).collect()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn underflow(&self) -> u64 {
        self.underflow
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn total(&self) -> u64 {
        self.underflow + self.overflow + self.counts.iter().sum::<u64>()
    }

    /// Largest gap between the empirical CDF and `cdf`, taken over the bin
    /// edges (where the empirical CDF is known exactly).
    pub fn ks_statistic(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.total() as f64;
        let mut below = self.underflow;
        let mut worst: f64 = 0.0;
        for (edge, count) in self.edges().into_iter().zip(self.counts.iter().chain(std::iter::once(&0))) {
            worst = worst.max((below as f64 / n - cdf(edge)).abs());
            below += count;
        }
        worst
    }
}

/// Summary of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub n_trials: u64,
    pub seed: u64,
    pub moments_q: Moments,
    pub moments_p: Moments,
    pub histogram_q: Histogram,
    pub histogram_p: Histogram,
}

impl TrialReport {
    pub fn mean_q(&self) -> f64 {
        self.moments_q.mean()
    }

    pub fn mean_p(&self) -> f64 {
        self.moments_p.mean()
    }

    pub fn std_q(&self) -> f64 {
        self.moments_q.std_dev()
    }

    pub fn std_p(&self) -> f64 {
        self.moments_p.std_dev()
    }

    pub fn se_std_q(&self) -> f64 {
        self.moments_q.se_std()
    }

    pub fn se_std_p(&self) -> f64 {
        self.moments_p.se_std()
    }
}

#[derive(Clone)]
struct Block {
    q: Moments,
    p: Moments,
    hq: Histogram,
    hp: Histogram,
}

struct Pipeline<'a> {
    code: &'a CodeSpec,
    decoder: Decoder,
    model: IidNoiseModel,
    inverse: crate::symplectic::SymplecticTransform,
    seed: u64,
}

impl Pipeline<'_> {
    fn block(&self, b: u64, n_trials: u64, template: &Histogram) -> Result<Block> {
        let start = b * BLOCK_SIZE;
        let len = BLOCK_SIZE.min(n_trials - start);
        let mut rng = stream_rng(self.seed, b);
        let dim = 2 * self.code.n_modes();
        let mut xi = vec![0.0; dim];
        let mut z = NoiseVector::zeros(self.code.n_modes());
        let mut out = Block { q: Moments::default(), p: Moments::default(), hq: template.clone(), hp: template.clone() };
        for _ in 0..len {
            self.model.fill(&mut rng, &mut xi);
            self.inverse.apply_into(&xi, z.as_mut_slice());
            let d = self.decoder.decode(&z, &mut rng)?;
            out.q.push(d.logical_xi_q);
            out.p.push(d.logical_xi_p);
            out.hq.add(d.logical_xi_q);
            out.hp.add(d.logical_xi_p);
        }
        Ok(out)
    }
}

/// Runs `n_trials` noisy encode / reshape / decode trials of `code` with
/// i.i.d. input noise `sigma`, on `shards` worker threads.
///
/// Histograms span `±6·max(σ, s)`, with `s` the larger output standard
/// deviation of the first block.
pub fn run(code: &CodeSpec, kind: DecoderKind, sigma: f64, n_trials: u64, seed: u64, shards: usize) -> Result<TrialReport> {
    if n_trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    if shards == 0 {
        return Err(Error::Domain("need at least one shard".into()));
    }
    let pipeline = Pipeline {
        code,
        decoder: Decoder::new(kind, code, sigma)?,
        model: IidNoiseModel::new(sigma, code.n_modes())?,
        inverse: code.encoder().inverse(),
        seed,
    };

    let scratch = Histogram::new(-1.0, 1.0, 1)?;
    let pilot = pipeline.block(0, n_trials, &scratch)?;
    let spread = sigma.max(pilot.q.std_dev()).max(pilot.p.std_dev());
    let half = if spread > 0.0 { 6.0 * spread } else { 1.0 };
    let template = Histogram::new(-half, half, HISTOGRAM_BINS)?;

    let blocks = n_trials.div_ceil(BLOCK_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(shards)
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    let parts: Vec<Block> = pool.install(|| {
        (0..blocks).into_par_iter().map(|b| pipeline.block(b, n_trials, &template)).collect::<Result<Vec<_>>>()
    })?;

    let mut acc = Block { q: Moments::default(), p: Moments::default(), hq: template.clone(), hp: template };
    for part in &parts {
        acc.q.merge(&part.q);
        acc.p.merge(&part.p);
        acc.hq.merge(&part.hq);
        acc.hp.merge(&part.hp);
    }
    Ok(TrialReport { n_trials, seed, moments_q: acc.q, moments_p: acc.p, histogram_q: acc.hq, histogram_p: acc.hp })
}

/// Pass/fail thresholds for [`compare`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// KS critical value is `ks_coefficient / √n`.
    pub ks_coefficient: f64,
    /// Largest accepted `|z|` for the mean and standard deviation.
    pub z_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { ks_coefficient: 1.63, z_max: 3.0 }
    }
}

/// Agreement of a Monte Carlo report with analytic distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonReport {
    pub ks_q: f64,
    pub ks_p: f64,
    pub ks_critical: f64,
    pub z_mean_q: f64,
    pub z_mean_p: f64,
    pub z_std_q: f64,
    pub z_std_p: f64,
    pub pass: bool,
}

fn z_score(observed: f64, expected: f64, se: f64) -> f64 {
    let diff = observed - expected;
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Compares the position and momentum samples of `report` with `q` and `p`.
pub fn compare(
    report: &TrialReport,
    q: &dyn AnalyticDistribution,
    p: &dyn AnalyticDistribution,
    thresholds: Thresholds,
) -> Result<ComparisonReport> {
    if report.histogram_q.total() == 0 || report.moments_q.count() == 0 {
        return Err(Error::Empty("report holds no trials".into()));
    }
    let n = report.moments_q.count() as f64;
    let ks_q = report.histogram_q.ks_statistic(|x| q.cdf(x));
    let ks_p = report.histogram_p.ks_statistic(|x| p.cdf(x));
    let ks_critical = thresholds.ks_coefficient / n.sqrt();
    let z_mean_q = z_score(report.mean_q(), q.mean(), report.moments_q.se_mean());
    let z_mean_p = z_score(report.mean_p(), p.mean(), report.moments_p.se_mean());
    let z_std_q = z_score(report.std_q(), q.std_dev(), report.se_std_q());
    let z_std_p = z_score(report.std_p(), p.std_dev(), report.se_std_p());
    let pass = ks_q < ks_critical
        && ks_p < ks_critical
        && [z_mean_q, z_mean_p, z_std_q, z_std_p].iter().all(|z| z.abs() <= thresholds.z_max);
    Ok(ComparisonReport { ks_q, ks_p, ks_critical, z_mean_q, z_mean_p, z_std_q, z_std_p, pass })
}
