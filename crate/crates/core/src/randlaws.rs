//! Increment laws, exact samplers and quantile machinery.
//!
//! Houses the symmetric Pareto law, the perturbed-tail family (both in the
//! normal domain of attraction of a symmetric alpha-stable law), the
//! standardized stable sampler (Chambers-Mallows-Stuck), a sorted-pool
//! quantile table for stable quantiles, and the moment regularizer `phi_p`.

use crate::error::{Error, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A reproducible, splittable random stream.
///
/// Two streams with different `stream_index` are statistically independent;
/// the generator derived from `(master_seed, stream_index)` is a pure
/// function of both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream { master_seed, stream_index }
    }

    /// Same master seed, different substream.
    pub fn substream(&self, stream_index: u64) -> Self {
        RngStream { master_seed: self.master_seed, stream_index }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Mixes experiment coordinates into a stream index (SplitMix64 finalizer).
pub fn mix_stream_index(a: u64, b: u64) -> u64 {
    let mut z = a.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(b);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw in the open interval (0, 1).
pub fn uniform_open01<R: RngCore>(rng: &mut R) -> f64 {
    // 53 random bits offset by half an ulp; never exactly 0 or 1.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Symmetric Pareto law with density (alpha/2)|y|^{-alpha-1} on {|y| > 1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricParetoLaw {
    alpha: f64,
}

impl SymmetricParetoLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Config(format!(
                "stability index must satisfy 1 < alpha < 2, got {alpha}"
            )));
        }
        Ok(SymmetricParetoLaw { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= -1.0 {
            0.5 * (-t).powf(-self.alpha)
        } else if t < 1.0 {
            0.5
        } else {
            1.0 - 0.5 * t.powf(-self.alpha)
        }
    }

    /// Generalized inverse of the cdf, left-continuous convention:
    /// the flat piece of the cdf at 1/2 maps to -1.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile argument must be in (0,1), got {u}")));
        }
        let a = self.alpha;
        Ok(if u <= 0.5 {
            -(2.0 * u).powf(-1.0 / a)
        } else {
            (2.0 * (1.0 - u)).powf(-1.0 / a)
        })
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        // inverse transform from one uniform draw
        self.quantile(uniform_open01(rng)).expect("open01 is in (0,1)")
    }

    /// E|Y|^p = alpha / (alpha - p), closed form, for 0 < p < alpha.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        check_moment_order(p, self.alpha)?;
        Ok(self.alpha / (self.alpha - p))
    }
}

/// Law in the normal domain of attraction with survival function
/// P(Y > t) = (A + K t^{-gamma}) / (2 t^alpha) for t >= 1, symmetric,
/// and the remaining mass 1 - (A + K) uniform on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedTailLaw {
    alpha: f64,
    amplitude: f64,
    perturbation: f64,
    gamma: f64,
}

impl PerturbedTailLaw {
    pub fn new(alpha: f64, amplitude: f64, perturbation: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Config(format!(
                "stability index must satisfy 1 < alpha < 2, got {alpha}"
            )));
        }
        if !(amplitude > 0.0) {
            return Err(Error::Config(format!("tail amplitude A must be > 0, got {amplitude}")));
        }
        if !(perturbation >= 0.0) {
            return Err(Error::Config(format!(
                "perturbation amplitude K must be >= 0, got {perturbation}"
            )));
        }
        if !(gamma > 0.0) {
            return Err(Error::Config(format!("perturbation decay gamma must be > 0, got {gamma}")));
        }
        if amplitude + perturbation > 1.0 {
            return Err(Error::Config(format!(
                "tail mass A + K must be <= 1, got {}",
                amplitude + perturbation
            )));
        }
        Ok(PerturbedTailLaw { alpha, amplitude, perturbation, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn perturbation(&self) -> f64 {
        self.perturbation
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// P(Y > t) for t >= 1.
    pub fn survival(&self, t: f64) -> f64 {
        debug_assert!(t >= 1.0);
        (self.amplitude + self.perturbation * t.powf(-self.gamma)) / (2.0 * t.powf(self.alpha))
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let tail_mass = self.amplitude + self.perturbation;
        if t <= -1.0 {
            self.survival(-t)
        } else if t < 1.0 {
            0.5 * tail_mass + 0.5 * (1.0 - tail_mass) * (t + 1.0)
        } else {
            1.0 - self.survival(t)
        }
    }

    /// Inverse cdf. The tails are inverted by bisection on the explicit cdf
    /// (tolerance 1e-12 in probability); the uniform core is inverted in
    /// closed form. Left-continuous convention at cdf flats.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile argument must be in (0,1), got {u}")));
        }
        let tail_mass = self.amplitude + self.perturbation;
        let half_tail = 0.5 * tail_mass;
        if u <= half_tail {
            // negative tail: solve survival(|t|) = u for |t| >= 1
            Ok(-self.invert_survival(u))
        } else if u < 1.0 - half_tail {
            Ok(2.0 * (u - half_tail) / (1.0 - tail_mass) - 1.0)
        } else {
            Ok(self.invert_survival(1.0 - u))
        }
    }

    /// Solves survival(t) = s for t in [1, inf).
    fn invert_survival(&self, s: f64) -> f64 {
        debug_assert!(s > 0.0 && s <= 0.5 * (self.amplitude + self.perturbation));
        // bracket: survival(t) >= A/(2 t^alpha), so t <= (A/(2s))^{1/alpha};
        // survival(t) <= (A+K)/(2 t^alpha), so t >= ((A+K)/(2s))^{1/alpha} ... >= 1
        let mut lo = 1.0f64;
        let mut hi = ((self.amplitude + self.perturbation) / (2.0 * s)).powf(1.0 / self.alpha).max(1.0);
        // survival is strictly decreasing; bisect until the probability bracket closes
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.survival(mid) > s {
                lo = mid;
            } else {
                hi = mid;
            }
            if self.survival(lo) - self.survival(hi) < 1e-12 || hi - lo < 1e-15 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        self.quantile(uniform_open01(rng)).expect("open01 is in (0,1)")
    }

    /// E|Y|^p via numeric integration of the explicit density, relative
    /// tolerance 1e-10, for 0 < p < alpha.
    ///
    /// Density: uniform (1 - A - K)/2 on [-1,1]; on |t| > 1 the tail density is
    /// (alpha A t^{-alpha-1} + (alpha+gamma) K t^{-alpha-gamma-1})/2 per side.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        check_moment_order(p, self.alpha)?;
        let core = (1.0 - self.amplitude - self.perturbation) / (p + 1.0);
        // tail (both sides): 2 * int_1^inf t^p f(t) dt, substituted t = 1/s:
        // integrand(s) = alpha A s^{alpha-p-1} + (alpha+gamma) K s^{alpha+gamma-p-1}
        let a = self.alpha;
        let g = self.gamma;
        let (ca, cb) = (a * self.amplitude, (a + g) * self.perturbation);
        let integrand = |s: f64| ca * s.powf(a - p - 1.0) + cb * s.powf(a + g - p - 1.0);
        // endpoint singularity at s = 0 (exponent a - p - 1 in (-1, 0)):
        // geometric panels toward 0, Gauss-Legendre per panel, tail by ratio.
        let mut total = 0.0;
        let mut upper = 1.0f64;
        let mut last = f64::INFINITY;
        for _ in 0..4000 {
            let lower = 0.5 * upper;
            let panel = gauss8(&integrand, lower, upper);
            total += panel;
            if panel < 1e-12 * total && panel < last {
                // remaining panels decay geometrically with ratio <= panel/last
                let ratio = (panel / last).min(0.999);
                total += panel * ratio / (1.0 - ratio);
                break;
            }
            last = panel;
            upper = lower;
        }
        Ok(core + total)
    }
}

/// Any of the supported heavy-tailed increment laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HeavyTailLaw {
    Pareto(SymmetricParetoLaw),
    Perturbed(PerturbedTailLaw),
}

impl HeavyTailLaw {
    pub fn alpha(&self) -> f64 {
        match self {
            HeavyTailLaw::Pareto(l) => l.alpha(),
            HeavyTailLaw::Perturbed(l) => l.alpha(),
        }
    }

    /// Leading tail amplitude A in P(Y > t) ~ A / (2 t^alpha).
    pub fn tail_amplitude(&self) -> f64 {
        match self {
            HeavyTailLaw::Pareto(_) => 1.0,
            HeavyTailLaw::Perturbed(l) => l.amplitude(),
        }
    }

    /// Decay exponent of the tail perturbation; `None` when the perturbation
    /// vanishes (pure Pareto), in which case planners treat it as +infinity.
    pub fn gamma_decay(&self) -> Option<f64> {
        match self {
            HeavyTailLaw::Pareto(_) => None,
            HeavyTailLaw::Perturbed(l) => {
                if l.perturbation() == 0.0 {
                    None
                } else {
                    Some(l.gamma())
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            HeavyTailLaw::Pareto(l) => l.quantile(u),
            HeavyTailLaw::Perturbed(l) => l.quantile(u),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            HeavyTailLaw::Pareto(l) => l.cdf(t),
            HeavyTailLaw::Perturbed(l) => l.cdf(t),
        }
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        match self {
            HeavyTailLaw::Pareto(l) => l.sample(rng),
            HeavyTailLaw::Perturbed(l) => l.sample(rng),
        }
    }

    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        match self {
            HeavyTailLaw::Pareto(l) => l.abs_moment(p),
            HeavyTailLaw::Perturbed(l) => l.abs_moment(p),
        }
    }
}

/// Symmetric alpha-stable law standardized to characteristic function
/// exp(-|theta|^alpha).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    alpha: f64,
}

impl StableLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Config(format!(
                "stability index must satisfy 1 < alpha < 2, got {alpha}"
            )));
        }
        Ok(StableLaw { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// One variate by the Chambers-Mallows-Stuck construction for the
    /// symmetric case: one uniform angle on (-pi/2, pi/2) and one unit
    /// exponential.
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        let u = std::f64::consts::PI * (uniform_open01(rng) - 0.5);
        let e = -uniform_open01(rng).ln();
        self.from_angle_exponential(u, e)
    }

    /// CMS formula with explicit inputs (exposed for tests).
    pub fn from_angle_exponential(&self, u: f64, e: f64) -> f64 {
        let a = self.alpha;
        if u == 0.0 {
            return 0.0;
        }
        let s = (a * u).sin() / u.cos().powf(1.0 / a);
        s * (((1.0 - a) * u).cos() / e).powf((1.0 - a) / a)
    }

    /// Scale of the stable attractor of a law with leading tail amplitude A:
    /// 2^{-n/alpha} sums of its increments converge to `sigma * S` with S
    /// standardized, where sigma^alpha = A * alpha * I_alpha and
    /// I_alpha = int_0^inf (1 - cos u) u^{-1-alpha} du.
    pub fn attractor_scale(alpha: f64, tail_amplitude: f64) -> f64 {
        (tail_amplitude * alpha * cosine_tail_integral(alpha)).powf(1.0 / alpha)
    }
}

/// I_alpha = int_0^inf (1-cos u) u^{-1-alpha} du
///         = -cos(pi alpha / 2) * Gamma(2-alpha) / (alpha (alpha - 1)),
/// for alpha in (1, 2).
pub fn cosine_tail_integral(alpha: f64) -> f64 {
    debug_assert!(alpha > 1.0 && alpha < 2.0);
    -(std::f64::consts::FRAC_PI_2 * alpha).cos() * gamma_01(2.0 - alpha)
        / (alpha * (alpha - 1.0))
}

/// Gamma function on (0, 2), Lanczos approximation (g = 7, n = 9).
fn gamma_01(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x < 2.0);
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let z = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

pub(crate) use crate::quadrature::gauss8;

/// Sorted pool of stable draws acting as an empirical quantile function,
/// with an analytic series tail outside the pool's resolution.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    alpha: f64,
    sorted_pool: Vec<f64>,
    /// Leading tail coefficients: P(Z > t) = c1 t^-alpha + c2 t^-2alpha + ...
    tail_c1: f64,
    tail_c2: f64,
}

impl QuantileTable {
    pub const MIN_POOL: usize = 100_000;

    /// Sorted pool of `pool_size` stable draws, stored as antithetic +/-
    /// pairs. Symmetrizing the pool makes the empirical quantile exactly
    /// antisymmetric, so its mean is zero; an unsymmetrized pool of size P
    /// carries a sample-mean offset of order P^(1/alpha - 1) that would leak
    /// a deterministic drift into every skeleton path built from the table.
    pub fn build(law: StableLaw, pool_size: usize, stream: RngStream) -> Result<Self> {
        if pool_size < Self::MIN_POOL {
            return Err(Error::Config(format!(
                "quantile table pool must hold at least {} draws, got {pool_size}",
                Self::MIN_POOL
            )));
        }
        let mut rng = stream.rng();
        let mut pool = Vec::with_capacity(pool_size + 1);
        for _ in 0..pool_size / 2 {
            let z = law.sample(&mut rng);
            pool.push(z);
            pool.push(-z);
        }
        if pool_size % 2 == 1 {
            pool.push(0.0);
        }
        pool.sort_by(|a, b| a.partial_cmp(b).expect("stable draws are finite"));
        let a = law.alpha();
        // First two terms of the tail series for cf exp(-|theta|^alpha):
        // P(Z > t) = sum_k (-1)^{k+1} Gamma(k alpha) sin(k pi alpha / 2)
        //            / (pi k!) t^{-k alpha}.
        let pi = std::f64::consts::PI;
        let tail_c1 = gamma_01(a - 1.0) * (a - 1.0) * (0.5 * pi * a).sin() / pi;
        let tail_c2 = -(2.0 * a - 1.0) * (2.0 * a - 2.0) * gamma_01(2.0 * a - 2.0)
            * (pi * a).sin()
            / (2.0 * pi);
        Ok(QuantileTable { alpha: a, sorted_pool: pool, tail_c1, tail_c2 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pool_size(&self) -> usize {
        self.sorted_pool.len()
    }

    pub fn pool(&self) -> &[f64] {
        &self.sorted_pool
    }

    /// Tail probability mass below which the analytic series tail replaces
    /// the order statistics. The pool's extreme order statistics carry O(1)
    /// relative noise, so the deep tail must come from the series.
    const TAIL_CUT: f64 = 5e-3;

    /// Empirical quantile in the bulk (linear interpolation between order
    /// statistics), analytic series tail beyond `TAIL_CUT`, with a linear
    /// blend over one further octave for continuity.
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u));
        let v = u.min(1.0 - u);
        if v >= 2.0 * Self::TAIL_CUT {
            return self.empirical(u);
        }
        let tail = self.series_tail_quantile(v).copysign(u - 0.5);
        if v < Self::TAIL_CUT {
            tail
        } else {
            let w = (2.0 * Self::TAIL_CUT - v) / Self::TAIL_CUT;
            w * tail + (1.0 - w) * self.empirical(u)
        }
    }

    fn empirical(&self, u: f64) -> f64 {
        let n = self.sorted_pool.len();
        let r = u * (n - 1) as f64;
        let lo = (r.floor() as usize).min(n - 2);
        let frac = r - lo as f64;
        self.sorted_pool[lo] * (1.0 - frac) + self.sorted_pool[lo + 1] * frac
    }

    /// Positive quantile at upper-tail mass eps from the two-term series,
    /// one correction step on the leading-order inversion.
    fn series_tail_quantile(&self, eps: f64) -> f64 {
        let t0 = (self.tail_c1 / eps).powf(1.0 / self.alpha);
        let corr = self.tail_c2 / self.tail_c1 * t0.powf(-self.alpha);
        t0 * (1.0 + corr / self.alpha)
    }
}

/// Smooth regularization of |x|^p: |x|^p outside [-1,1], the matching
/// parabola (p/2) x^2 + (1 - p/2) inside.
pub fn phi_p(x: f64, p: f64) -> f64 {
    debug_assert!((1.0..2.0).contains(&p));
    let ax = x.abs();
    if ax > 1.0 {
        ax.powf(p)
    } else {
        0.5 * p * x * x + (1.0 - 0.5 * p)
    }
}

fn check_moment_order(p: f64, alpha: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("moment order must be positive, got {p}")));
    }
    if p >= alpha {
        return Err(Error::Domain(format!(
            "absolute moment of order {p} diverges for stability index {alpha}"
        )));
    }
    Ok(())
}
