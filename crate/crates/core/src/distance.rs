//! Empirical Wasserstein-1 estimators and the quantile-coupled path pair.
//!
//! On the line, W1 between two N-point empirical measures is exactly the
//! mean absolute difference of order statistics (monotone matching is
//! optimal in one dimension). The functional distance between the walk and
//! the stable skeleton is estimated through an admissible coupling: each
//! cell draws one shared uniform, pushed through the walk law's quantile on
//! one side and a frozen stable quantile table on the other, so the two
//! increments are comonotone. Any coupling upper-bounds the Wasserstein
//! distance, which is the right side to compare against a decay bound.
//! The stable marginal carries the walk's attractor scale so the coupled
//! gap measures the fluctuation mismatch rather than a scale mismatch.

use crate::error::{Error, Result};
use crate::paths::DyadicPath;
use crate::randlaws::{uniform_open01, HeavyTailLaw, QuantileTable, RngStream, StableLaw};
use crate::sobolev::{diff_norm, diff_norm_pow_p, SobolevParams};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

impl Estimate {
    /// Sample mean and standard error (sample sd / sqrt(reps)); needs >= 2
    /// replicates for the variance to exist.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Domain(format!("need >= 2 replications, got {n}")));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var =
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        Ok(Estimate { mean, std_error: (var / n as f64).sqrt(), replications: n })
    }
}

/// Exact W1 between two equal-size empirical measures on the line:
/// (1/N) * sum |a_(i) - b_(i)| over sorted order statistics.
pub fn w1_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "w1_sorted needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Shape("w1_sorted needs at least one point".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let total: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.len() as f64)
}

/// A walk path and a stable skeleton built from the same per-cell uniforms.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub walk_path: DyadicPath,
    pub stable_path: DyadicPath,
    pub level: u32,
}

/// Build the coupled pair from explicit per-cell uniforms (used by the
/// forced-stream test hooks; `coupled_path_pair` draws them from a stream).
pub fn coupled_pair_from_uniforms(
    n: u32,
    law: &HeavyTailLaw,
    table: &QuantileTable,
    alpha: f64,
    uniforms: &[f64],
) -> Result<CoupledPair> {
    if (table.alpha() - alpha).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "table alpha {} does not match alpha {alpha}",
            table.alpha()
        )));
    }
    let cells = 1usize << n;
    if uniforms.len() != cells {
        return Err(Error::Shape(format!(
            "level {n} coupling needs {cells} uniforms, got {}",
            uniforms.len()
        )));
    }
    let mut walk_inc = Vec::with_capacity(cells);
    for &u in uniforms {
        walk_inc.push(law.quantile(u)?);
    }
    let walk_path = DyadicPath::build_walk(&walk_inc, alpha, n)?;
    // stable increments at the walk's attractor scale
    let sigma = StableLaw::attractor_scale(alpha, law.tail_amplitude());
    let scale = sigma * (-(n as f64) / alpha).exp2();
    let mut nodes = Vec::with_capacity(cells + 1);
    let mut acc = 0.0;
    nodes.push(acc);
    for &u in uniforms {
        acc += scale * table.quantile(u);
        nodes.push(acc);
    }
    let stable_path = DyadicPath::from_node_values(n, nodes)?;
    Ok(CoupledPair { walk_path, stable_path, level: n })
}

/// Per-cell comonotone coupling: one uniform per cell drives both marginals.
pub fn coupled_path_pair(
    n: u32,
    law: &HeavyTailLaw,
    table: &QuantileTable,
    alpha: f64,
    stream: RngStream,
) -> Result<CoupledPair> {
    let mut rng = stream.rng();
    let uniforms: Vec<f64> = (0..1usize << n).map(|_| uniform_open01(&mut rng)).collect();
    coupled_pair_from_uniforms(n, law, table, alpha, &uniforms)
}

/// Mean and standard error over replicates of the Sobolev distance between
/// the two coupled marginals; replicate r uses substream r, reduction in
/// ascending replicate order.
pub fn coupled_distance(
    n: u32,
    law: &HeavyTailLaw,
    table: &QuantileTable,
    params: &SobolevParams,
    reps: usize,
    stream: RngStream,
) -> Result<Estimate> {
    let mut samples = Vec::with_capacity(reps);
    for r in 0..reps {
        let pair = coupled_path_pair(n, law, table, alpha_of(table), stream.substream(r as u64))?;
        samples.push(diff_norm(&pair.walk_path, &pair.stable_path, params)?);
    }
    Estimate::from_samples(&samples)
}

fn alpha_of(table: &QuantileTable) -> f64 {
    table.alpha()
}

/// Sanity mode: the stable skeleton coupled to itself; every replicate's
/// distance is exactly zero.
pub fn self_coupled_distance(
    n: u32,
    table: &QuantileTable,
    params: &SobolevParams,
    reps: usize,
    stream: RngStream,
) -> Result<Estimate> {
    let alpha = table.alpha();
    let mut samples = Vec::with_capacity(reps);
    for r in 0..reps {
        let mut rng = stream.substream(r as u64).rng();
        let cells = 1usize << n;
        let scale = (-(n as f64) / alpha).exp2();
        let mut nodes = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        nodes.push(acc);
        for _ in 0..cells {
            acc += scale * table.quantile(uniform_open01(&mut rng));
            nodes.push(acc);
        }
        let path = DyadicPath::from_node_values(n, nodes)?;
        samples.push(diff_norm(&path, &path, params)?);
    }
    Estimate::from_samples(&samples)
}

/// Source for the projection-gap estimator.
#[derive(Debug, Clone, Copy)]
pub enum GapSource<'a> {
    /// Stable skeleton sampled at the reference level.
    Stable { alpha: f64 },
    /// Heavy-tailed walk at the reference level.
    Walk(&'a HeavyTailLaw),
    /// Deterministic affine path (test hook; its gap vanishes identically).
    Affine { intercept: f64, slope: f64 },
}

/// Monte Carlo estimate of E ||F - proj_m(F)||^p (the raw p-th-power
/// quantity, Lp part + seminorm) with F realized at level n_ref.
pub fn projection_gap(
    source: GapSource,
    m: u32,
    n_ref: u32,
    params: &SobolevParams,
    reps: usize,
    stream: RngStream,
) -> Result<Estimate> {
    if m >= n_ref {
        return Err(Error::Domain(format!(
            "projection level m={m} must be below the reference level n_ref={n_ref}"
        )));
    }
    let mut samples = Vec::with_capacity(reps);
    for r in 0..reps {
        let sub = stream.substream(r as u64);
        let f = match source {
            GapSource::Stable { alpha } => {
                DyadicPath::sample_stable_path(StableLaw::new(alpha)?, n_ref, sub)
            }
            GapSource::Walk(law) => {
                let mut rng = sub.rng();
                let inc: Vec<f64> =
                    (0..1usize << n_ref).map(|_| law.sample(&mut rng)).collect();
                DyadicPath::build_walk(&inc, law.alpha(), n_ref)?
            }
            GapSource::Affine { intercept, slope } => {
                DyadicPath::from_fn(n_ref, |t| intercept + slope * t)
            }
        };
        samples.push(diff_norm_pow_p(&f, &f.project(m)?, params)?);
    }
    Estimate::from_samples(&samples)
}
