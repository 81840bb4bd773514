//! Experiment planners and Monte Carlo sweeps that turn repeated path
//! simulations into fitted convergence-rate exponents.
//!
//! The planner maps the model tuple (alpha, eta, p, gamma) to a projection
//! schedule kappa and a predicted decay exponent upsilon; each sweep
//! estimates one moment family over a grid of levels and fits a log-log
//! slope. Everything is a pure function of the configuration plus the
//! master seed: replicate r of a sweep point n draws from a stream derived
//! only from (master_seed, sweep tag, n, r), and reductions always run in
//! ascending replicate order, so results are bit-stable and independent of
//! how replicates are sharded across workers.

use serde::{Deserialize, Serialize};

use crate::distance::{coupled_pair_from_uniforms, projection_gap, Estimate, GapSource};
use crate::error::{Error, Result};
use crate::paths::DyadicPath;
use crate::randlaws::{
    uniform_open01, HeavyTailLaw, PerturbedTailLaw, QuantileTable, RngStream, StableLaw,
    SymmetricParetoLaw,
};
use crate::sobolev::{diff_norm, diff_norm_pow_p, SobolevParams};

/// Sweep tags keep the stream families of different experiments disjoint.
const TAG_INTERP: u64 = 1;
const TAG_MOMENT: u64 = 2;
const TAG_INCREMENT: u64 = 3;
const TAG_RATE: u64 = 4;
const TAG_TABLE: u64 = 5;

/// Stream for replicate `r` of sweep point `n` under the given tag.
fn sweep_stream(master_seed: u64, tag: u64, n: u64, r: u64) -> RngStream {
    RngStream::new(master_seed, (tag << 56) ^ (n << 32) ^ r)
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub eta: f64,
    pub p: f64,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(rename = "K")]
    pub perturbation: f64,
    pub n_values: Vec<u32>,
    pub reps: usize,
    pub n_ref_offset: u32,
    pub master_seed: u64,
    pub pool_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: 1.5,
            eta: 0.2,
            p: 1.2,
            gamma: 1.0,
            amplitude: 1.0,
            perturbation: 0.0,
            n_values: (3..=9).collect(),
            reps: 1000,
            n_ref_offset: 4,
            master_seed: 1,
            pool_size: 1_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(Error::Config(format!(
                "stability index must satisfy 1 < alpha < 2, got {}",
                self.alpha
            )));
        }
        if !(self.eta > 0.0 && self.eta < 1.0 / self.alpha) {
            return Err(Error::Config(format!(
                "regularity must satisfy 0 < eta < 1/alpha = {}, got {}",
                1.0 / self.alpha,
                self.eta
            )));
        }
        if !(self.p >= 1.0 && self.p < self.alpha) {
            return Err(Error::Config(format!(
                "moment order must satisfy 1 <= p < alpha = {}, got {}",
                self.alpha, self.p
            )));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Config(format!(
                "perturbation decay gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("n_values must be strictly increasing".into()));
        }
        if self.reps < 2 {
            return Err(Error::Config(format!("reps must be >= 2, got {}", self.reps)));
        }
        Ok(())
    }

    /// The increment law described by (alpha, A, K, gamma).
    pub fn law(&self) -> Result<HeavyTailLaw> {
        if self.perturbation == 0.0 && self.amplitude == 1.0 {
            Ok(HeavyTailLaw::Pareto(SymmetricParetoLaw::new(self.alpha)?))
        } else {
            Ok(HeavyTailLaw::Perturbed(PerturbedTailLaw::new(
                self.alpha,
                self.amplitude,
                self.perturbation,
                self.gamma,
            )?))
        }
    }

    pub fn sobolev_params(&self) -> Result<SobolevParams> {
        SobolevParams::new(self.eta, self.p)
    }
}

/// Ordinary least squares fit of log2(value) against n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFitResult {
    /// Slope per unit n, in log2.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_std_error: f64,
}

/// Projection schedule kappa and predicted decay exponent upsilon for the
/// tuple (alpha, eta, p, gamma):
///   kappa   = min(2/alpha - 1, gamma/alpha) / (1 + (1/alpha - eta) p)
///   upsilon = (1/alpha - eta) p * kappa.
/// A pure Pareto law has no tail perturbation; pass `f64::INFINITY` for
/// gamma so the min picks 2/alpha - 1.
pub fn plan_kappa_upsilon(alpha: f64, eta: f64, p: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "stability index must satisfy 1 < alpha < 2, got {alpha}"
        )));
    }
    if !(eta > 0.0 && eta < 1.0 / alpha) {
        return Err(Error::Domain(format!(
            "regularity must satisfy 0 < eta < 1/alpha, got {eta}"
        )));
    }
    if !(p >= 1.0 && p < alpha) {
        return Err(Error::Domain(format!("moment order must satisfy 1 <= p < alpha, got {p}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("decay gamma must be > 0, got {gamma}")));
    }
    let drift = (1.0 / alpha - eta) * p;
    let kappa = (2.0 / alpha - 1.0).min(gamma / alpha) / (1.0 + drift);
    Ok((kappa, drift * kappa))
}

/// OLS of log2(value) on n. Needs at least three points and strictly
/// positive values.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<RateFitResult> {
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "log-log fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, v)) = points.iter().find(|&&(_, v)| !(v > 0.0)) {
        return Err(Error::Numeric(format!(
            "log-log fit needs positive values, got {v} at n = {n}"
        )));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.log2()).collect();
    let xm = xs.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs at least two distinct n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_tot: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    let slope_std_error =
        if points.len() > 2 { (ss_res / (k - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateFitResult { slope, intercept, r_squared, slope_std_error })
}

/// Shard replicates 0..reps across `workers` threads; slot r always holds
/// replicate r's value, so the result is independent of the sharding.
fn map_replicates<T, F>(reps: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(usize) -> T + Sync,
{
    let mut out = vec![T::default(); reps];
    let workers = workers.max(1).min(reps.max(1));
    if workers <= 1 {
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = f(r);
        }
        return out;
    }
    let chunk = reps.div_ceil(workers);
    std::thread::scope(|scope| {
        for (i, slice) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (j, slot) in slice.iter_mut().enumerate() {
                    *slot = f(i * chunk + j);
                }
            });
        }
    });
    out
}

/// Which random path family a projection sweep draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepSource {
    /// Stable skeleton at the reference level.
    Stable,
    /// Heavy-tailed walk at the reference level.
    Walk,
    /// Deterministic affine path (test hook; every estimate is zero and the
    /// log-log fit is rejected).
    Affine,
}

/// One projection-error sweep: estimates of E ||F - proj_m(F)||^p over the
/// configured m grid, plus the fitted log2 slope.
#[derive(Debug, Clone, Serialize)]
pub struct InterpErrorSweep {
    pub n_ref: u32,
    pub rows: Vec<(u32, Estimate)>,
    pub fit: RateFitResult,
    /// The dominant predicted exponent -(1/alpha - eta) p.
    pub predicted_slope: f64,
}

/// Monte Carlo estimate of the projection error exponent. The m grid is
/// `config.n_values`; the reference level is the largest m plus
/// `n_ref_offset`. All m for one replicate reuse the same realization of F
/// (common random numbers), which removes the replicate-level noise from
/// the slope.
pub fn interp_error_sweep(
    config: &ExperimentConfig,
    source: SweepSource,
    workers: usize,
) -> Result<InterpErrorSweep> {
    config.validate()?;
    let m_values = &config.n_values;
    let last = *m_values.last().expect("validated nonempty");
    let n_ref = last + config.n_ref_offset;
    if m_values[0] < 2 || last > n_ref - 2 {
        return Err(Error::Config(format!(
            "projection levels must lie in [2, n_ref - 2] = [2, {}]",
            n_ref - 2
        )));
    }
    let params = config.sobolev_params()?;
    let law = config.law()?;
    let alpha = config.alpha;
    let per_rep = |r: usize| -> Vec<f64> {
        let stream = sweep_stream(config.master_seed, TAG_INTERP, n_ref as u64, r as u64);
        let f = match source {
            SweepSource::Stable => DyadicPath::sample_stable_path(
                StableLaw::new(alpha).expect("validated alpha"),
                n_ref,
                stream,
            ),
            SweepSource::Walk => {
                let mut rng = stream.rng();
                let inc: Vec<f64> =
                    (0..1usize << n_ref).map(|_| law.sample(&mut rng)).collect();
                DyadicPath::build_walk(&inc, alpha, n_ref).expect("validated shape")
            }
            SweepSource::Affine => DyadicPath::from_fn(n_ref, |t| t),
        };
        m_values
            .iter()
            .map(|&m| {
                diff_norm_pow_p(&f, &f.project(m).expect("m < n_ref"), &params)
                    .expect("validated params")
            })
            .collect()
    };
    let samples = map_replicates(config.reps, workers, per_rep);
    let mut rows = Vec::with_capacity(m_values.len());
    for (i, &m) in m_values.iter().enumerate() {
        let column: Vec<f64> = samples.iter().map(|row| row[i]).collect();
        rows.push((m, Estimate::from_samples(&column)?));
    }
    let fit = fit_loglog(
        &rows.iter().map(|&(m, e)| (m as f64, e.mean)).collect::<Vec<_>>(),
    )?;
    Ok(InterpErrorSweep {
        n_ref,
        rows,
        fit,
        predicted_slope: -(1.0 / alpha - config.eta) * config.p,
    })
}

/// One (s, t) evaluation pair of the increment battery, in units of the
/// cell width 2^-n, plus the estimated ratio
/// E|X(t) - X(s)|^p / (t - s)^{p/alpha}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IncrementRatio {
    pub s: f64,
    pub t: f64,
    pub ratio: f64,
}

/// Deterministic battery spanning on-grid, same-cell, and node-straddling
/// pairs, in units of the cell width. Every pair has t > s.
fn increment_pair_battery(n: u32) -> Vec<(f64, f64)> {
    let cells = (1u64 << n) as f64;
    vec![
        // on-grid
        (0.0, 1.0),
        (1.0, 2.0),
        (0.0, 4.0),
        (0.0, cells / 2.0),
        (cells / 2.0, cells),
        (0.0, cells),
        // same-cell (t - s = half a cell)
        (0.25, 0.75),
        (cells / 2.0 + 0.25, cells / 2.0 + 0.75),
        // straddling a grid node
        (0.5, 1.5),
        (0.75, 2.5),
        (cells / 2.0 - 0.5, cells / 2.0 + 0.5),
    ]
}

/// Per-pair ratios E|X_n(t) - X_n(s)|^p / (t - s)^{p/alpha} for the walk
/// built from `law` at level n.
pub fn increment_moment_ratios(
    law: &HeavyTailLaw,
    p: f64,
    n: u32,
    reps: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<IncrementRatio>> {
    let alpha = law.alpha();
    if !(p >= 1.0 && p < alpha) {
        return Err(Error::Domain(format!(
            "moment order must satisfy 1 <= p < alpha = {alpha}, got {p}"
        )));
    }
    if reps < 2 {
        return Err(Error::Domain(format!("reps must be >= 2, got {reps}")));
    }
    let h = (-(n as f64)).exp2();
    let battery = increment_pair_battery(n);
    let per_rep = |r: usize| -> Vec<f64> {
        let stream = sweep_stream(master_seed, TAG_INCREMENT, n as u64, r as u64);
        let mut rng = stream.rng();
        let inc: Vec<f64> = (0..1usize << n).map(|_| law.sample(&mut rng)).collect();
        let path = DyadicPath::build_walk(&inc, alpha, n).expect("validated shape");
        battery
            .iter()
            .map(|&(s, t)| {
                let d = path.eval(t * h).expect("t in [0,1]")
                    - path.eval(s * h).expect("s in [0,1]");
                d.abs().powf(p)
            })
            .collect()
    };
    let samples = map_replicates(reps, workers, per_rep);
    let mut out = Vec::with_capacity(battery.len());
    for (i, &(s, t)) in battery.iter().enumerate() {
        let mean = samples.iter().map(|row| row[i]).sum::<f64>() / reps as f64;
        out.push(IncrementRatio { s, t, ratio: mean / ((t - s) * h).powf(p / alpha) });
    }
    Ok(out)
}

/// Max over the pair battery of the normalized increment moment; the bound
/// predicts this stays within a constant across n.
pub fn increment_moment_check(
    law: &HeavyTailLaw,
    p: f64,
    n: u32,
    reps: usize,
    master_seed: u64,
    workers: usize,
) -> Result<f64> {
    let ratios = increment_moment_ratios(law, p, n, reps, master_seed, workers)?;
    Ok(ratios.iter().map(|r| r.ratio).fold(0.0, f64::max))
}

/// Normalized-sum moment sweep: estimates of E |(Y_1 + ... + Y_N)/N^{1/alpha}|^p.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSweep {
    pub rows: Vec<(u64, Estimate)>,
    /// max/min of the estimates over the top half of the N grid.
    pub bounded_ratio: f64,
}

/// Scalar sum-moment sweep over raw summand counts N (not levels).
pub fn moment_sweep(
    law: &HeavyTailLaw,
    p: f64,
    counts: &[u64],
    reps: usize,
    master_seed: u64,
    workers: usize,
) -> Result<MomentSweep> {
    let alpha = law.alpha();
    if !(p > 0.0 && p < alpha) {
        return Err(Error::Domain(format!(
            "moment order must satisfy 0 < p < alpha = {alpha}, got {p}"
        )));
    }
    if counts.is_empty() || !counts.windows(2).all(|w| w[0] < w[1]) || counts[0] == 0 {
        return Err(Error::Domain(
            "summand counts must be strictly increasing positive integers".into(),
        ));
    }
    if reps < 2 {
        return Err(Error::Domain(format!("reps must be >= 2, got {reps}")));
    }
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        let scale = (n as f64).powf(-1.0 / alpha);
        let per_rep = |r: usize| -> f64 {
            let stream = sweep_stream(master_seed, TAG_MOMENT, n, r as u64);
            let mut rng = stream.rng();
            let sum: f64 = (0..n).map(|_| law.sample(&mut rng)).sum();
            (scale * sum).abs().powf(p)
        };
        let samples = map_replicates(reps, workers, per_rep);
        rows.push((n, Estimate::from_samples(&samples)?));
    }
    let top = &rows[rows.len() / 2..];
    let max = top.iter().map(|&(_, e)| e.mean).fold(f64::MIN, f64::max);
    let min = top.iter().map(|&(_, e)| e.mean).fold(f64::MAX, f64::min);
    Ok(MomentSweep { rows, bounded_ratio: max / min })
}

/// One level of the rate sweep: the coupled distance at level n and the two
/// projection-gap side terms of the triangle decomposition at the reference
/// level n + n_ref_offset.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateSweepRow {
    pub n: u32,
    /// Projection level round(kappa * n).
    pub m: u32,
    pub distance: Estimate,
    pub gap_walk: Estimate,
    pub gap_stable: Estimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSweep {
    pub rows: Vec<RateSweepRow>,
    pub fit: RateFitResult,
    pub kappa: f64,
    pub upsilon: f64,
    /// Fitted slope divided by the predicted -upsilon; >= 1 means the decay
    /// is at least as fast as predicted.
    pub slope_ratio: f64,
}

/// Coupled walk/skeleton distance across the configured levels, with the
/// fitted log2 slope compared against the planner's -upsilon.
/// `self_coupling` is a sanity hook: the skeleton coupled to itself gives
/// identically zero distances, and the log-log fit is rejected.
pub fn rate_sweep(
    config: &ExperimentConfig,
    self_coupling: bool,
    workers: usize,
) -> Result<RateSweep> {
    config.validate()?;
    let law = config.law()?;
    // a vanishing perturbation has no gamma-term in the planner's min
    let gamma_eff = law.gamma_decay().unwrap_or(f64::INFINITY);
    let (kappa, upsilon) = plan_kappa_upsilon(config.alpha, config.eta, config.p, gamma_eff)?;
    let params = config.sobolev_params()?;
    let alpha = config.alpha;
    let table = QuantileTable::build(
        StableLaw::new(alpha)?,
        config.pool_size,
        RngStream::new(config.master_seed, TAG_TABLE << 56),
    )?;
    // The side terms are diagnostics, not fit inputs; a tenth of the
    // replications keeps their cost negligible next to the distance column.
    let gap_reps = (config.reps / 10).max(2);
    let mut rows = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let m = ((kappa * n as f64).round() as u32).max(1);
        let n_ref = n + config.n_ref_offset;
        let per_rep = |r: usize| -> f64 {
            let stream = sweep_stream(config.master_seed, TAG_RATE, n as u64, r as u64);
            if self_coupling {
                let mut rng = stream.rng();
                let sigma = StableLaw::attractor_scale(alpha, law.tail_amplitude());
                let scale = sigma * (-(n as f64) / alpha).exp2();
                let mut nodes = Vec::with_capacity((1usize << n) + 1);
                let mut acc = 0.0;
                nodes.push(acc);
                for _ in 0..1usize << n {
                    acc += scale * table.quantile(uniform_open01(&mut rng));
                    nodes.push(acc);
                }
                let path = DyadicPath::from_node_values(n, nodes).expect("validated shape");
                diff_norm(&path, &path, &params).expect("validated params")
            } else {
                let mut rng = stream.rng();
                let uniforms: Vec<f64> =
                    (0..1usize << n).map(|_| uniform_open01(&mut rng)).collect();
                let pair = coupled_pair_from_uniforms(n, &law, &table, alpha, &uniforms)
                    .expect("validated inputs");
                diff_norm(&pair.walk_path, &pair.stable_path, &params)
                    .expect("validated params")
            }
        };
        let samples = map_replicates(config.reps, workers, per_rep);
        let distance = Estimate::from_samples(&samples)?;
        let gap_stream = |salt: u64| {
            sweep_stream(config.master_seed, TAG_RATE, n as u64, (salt << 48) | 1 << 47)
        };
        let gap_walk =
            projection_gap(GapSource::Walk(&law), m, n_ref, &params, gap_reps, gap_stream(1))?;
        let gap_stable =
            projection_gap(GapSource::Stable { alpha }, m, n_ref, &params, gap_reps, gap_stream(2))?;
        rows.push(RateSweepRow { n, m, distance, gap_walk, gap_stable });
    }
    let fit = fit_loglog(
        &rows.iter().map(|r| (r.n as f64, r.distance.mean)).collect::<Vec<_>>(),
    )?;
    Ok(RateSweep { rows, fit, kappa, upsilon, slope_ratio: fit.slope / -upsilon })
}
