//! Dyadic piecewise-linear paths.
//!
//! A path stores its values at the nodes k * 2^{-n} of a dyadic grid and is
//! affine in between. This represents both the interpolated random walk and
//! stable path skeletons; the affine-interpolation projection onto a coarser
//! dyadic grid is exact subsampling of node values.

use crate::error::{Error, Result};
use crate::randlaws::{RngStream, StableLaw};

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPath {
    level: u32,
    node_values: Vec<f64>,
}

impl DyadicPath {
    /// Path at `level` from its 2^level + 1 node values.
    pub fn from_node_values(level: u32, node_values: Vec<f64>) -> Result<Self> {
        let want = (1usize << level) + 1;
        if node_values.len() != want {
            return Err(Error::Shape(format!(
                "level {level} path needs {want} node values, got {}",
                node_values.len()
            )));
        }
        Ok(DyadicPath { level, node_values })
    }

    pub fn zero(level: u32) -> Self {
        DyadicPath { level, node_values: vec![0.0; (1usize << level) + 1] }
    }

    /// Samples an arbitrary function at the dyadic nodes of `level`.
    pub fn from_fn(level: u32, f: impl Fn(f64) -> f64) -> Self {
        let n = 1usize << level;
        let node_values = (0..=n).map(|k| f(k as f64 / n as f64)).collect();
        DyadicPath { level, node_values }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn cells(&self) -> usize {
        1usize << self.level
    }

    /// The interpolated random walk: node k holds 2^{-n/alpha} (Y_1+...+Y_k).
    pub fn build_walk(increments: &[f64], alpha: f64, level: u32) -> Result<Self> {
        let n = 1usize << level;
        if increments.len() != n {
            return Err(Error::Shape(format!(
                "level {level} walk needs {n} increments, got {}",
                increments.len()
            )));
        }
        let scale = 2.0f64.powf(-(level as f64) / alpha);
        let mut node_values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        node_values.push(0.0);
        for &y in increments {
            acc += y;
            node_values.push(scale * acc);
        }
        Ok(DyadicPath { level, node_values })
    }

    /// Cumulative sums of 2^level iid stable draws scaled by 2^{-level/alpha};
    /// distributed exactly as the affine interpolation of S along the grid.
    pub fn sample_stable_path(law: StableLaw, level: u32, stream: RngStream) -> Self {
        let mut rng = stream.rng();
        let n = 1usize << level;
        let scale = 2.0f64.powf(-(level as f64) / law.alpha());
        let mut node_values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        node_values.push(0.0);
        for _ in 0..n {
            acc += law.sample(&mut rng);
            node_values.push(scale * acc);
        }
        DyadicPath { level, node_values }
    }

    /// Exact affine interpolation between nodes.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("evaluation point must be in [0,1], got {t}")));
        }
        let n = self.cells() as f64;
        let x = t * n;
        let k = (x.floor() as usize).min(self.cells() - 1);
        let frac = x - k as f64;
        Ok(self.node_values[k] * (1.0 - frac) + self.node_values[k + 1] * frac)
    }

    /// Projection onto the level-m dyadic grid: subsampling of node values.
    pub fn project(&self, m: u32) -> Result<Self> {
        if m > self.level {
            return Err(Error::Domain(format!(
                "cannot project a level {} path onto finer level {m}",
                self.level
            )));
        }
        let stride = 1usize << (self.level - m);
        let node_values = self.node_values.iter().step_by(stride).copied().collect();
        Ok(DyadicPath { level: m, node_values })
    }

    /// Exact refinement to a finer nested grid (midpoint insertion).
    pub fn refine_to(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(Error::Domain(format!(
                "refinement target {level} is coarser than level {}",
                self.level
            )));
        }
        let stride = 1usize << (level - self.level);
        let cells = 1usize << level;
        let mut node_values = Vec::with_capacity(cells + 1);
        for k in 0..self.cells() {
            let a = self.node_values[k];
            let b = self.node_values[k + 1];
            for j in 0..stride {
                let frac = j as f64 / stride as f64;
                node_values.push(a * (1.0 - frac) + b * frac);
            }
        }
        node_values.push(*self.node_values.last().expect("nonempty"));
        Ok(DyadicPath { level, node_values })
    }

    /// Pointwise difference after exact common refinement.
    pub fn sub(&self, other: &DyadicPath) -> DyadicPath {
        let level = self.level.max(other.level);
        let a = self.refine_to(level).expect("refining to max level");
        let b = other.refine_to(level).expect("refining to max level");
        let node_values = a
            .node_values
            .iter()
            .zip(b.node_values.iter())
            .map(|(x, y)| x - y)
            .collect();
        DyadicPath { level, node_values }
    }

    pub fn scaled(&self, c: f64) -> DyadicPath {
        DyadicPath {
            level: self.level,
            node_values: self.node_values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &DyadicPath) -> DyadicPath {
        let level = self.level.max(other.level);
        let a = self.refine_to(level).expect("refining to max level");
        let b = other.refine_to(level).expect("refining to max level");
        let node_values =
            a.node_values.iter().zip(b.node_values.iter()).map(|(x, y)| x + y).collect();
        DyadicPath { level, node_values }
    }

    /// Coefficient view <f, h_m^j> = sqrt(2^m) (f(t_{j+1}^m) - f(t_j^m)),
    /// exposed for testing the basis bijection.
    pub fn basis_coefficient(&self, m: u32, j: usize) -> Result<f64> {
        if m > self.level || j >= (1usize << m) {
            return Err(Error::Domain(format!(
                "coefficient (m={m}, j={j}) out of range for level {}",
                self.level
            )));
        }
        let coarse = self.project(m)?;
        let root = 2.0f64.powf(m as f64 / 2.0);
        Ok(root * (coarse.node_values[j + 1] - coarse.node_values[j]))
    }

    /// CSV dump with columns (t, value), one row per node.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,value")?;
        let n = self.cells() as f64;
        for (k, v) in self.node_values.iter().enumerate() {
            writeln!(w, "{},{}", k as f64 / n, v)?;
        }
        Ok(())
    }
}

/// Block sums of the projection identity:
/// block j = 2^{-(n-m)/alpha} * sum of the increments in block j.
pub fn block_sums(increments: &[f64], n: u32, m: u32, alpha: f64) -> Result<Vec<f64>> {
    if m > n {
        return Err(Error::Domain(format!("block level {m} exceeds walk level {n}")));
    }
    let want = 1usize << n;
    if increments.len() != want {
        return Err(Error::Shape(format!(
            "level {n} walk needs {want} increments, got {}",
            increments.len()
        )));
    }
    let block = 1usize << (n - m);
    let scale = 2.0f64.powf(-((n - m) as f64) / alpha);
    Ok(increments
        .chunks_exact(block)
        .map(|chunk| scale * chunk.iter().sum::<f64>())
        .collect())
}
