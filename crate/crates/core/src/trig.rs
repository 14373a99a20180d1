//! Joint sine/cosine for wrapped lattice coordinates.
//!
//! `f64::sin_cos` evaluates sine and cosine separately through libm. The
//! integrator needs both for every atom on every step, so this shares the
//! octant reduction and evaluates the Cephes minimax polynomials once. It is
//! pure Rust, so results do not depend on the platform's libm.

#![allow(clippy::excessive_precision)] // coefficients as published

const FRAC_4_PI: f64 = 1.0 / std::f64::consts::FRAC_PI_4;

const DP1: f64 = 7.853_981_256_484_985_351_56e-1;
const DP2: f64 = 3.774_894_707_930_798_176_68e-8;
const DP3: f64 = 2.695_151_429_079_059_526_45e-15;

const SIN_COEF: [f64; 6] = [
    1.589_623_015_765_465_680_60e-10,
    -2.505_074_776_285_780_728_66e-8,
    2.755_731_362_138_572_452_13e-6,
    -1.984_126_982_958_953_859_96e-4,
    8.333_333_333_322_118_588_78e-3,
    -1.666_666_666_666_663_072_95e-1,
];

const COS_COEF: [f64; 6] = [
    -1.135_853_652_138_768_173_00e-11,
    2.087_570_084_197_473_167_78e-9,
    -2.755_731_417_929_673_881_12e-7,
    2.480_158_728_885_170_453_48e-5,
    -1.388_888_888_887_305_641_16e-3,
    4.166_666_666_666_659_292_18e-2,
];

#[inline(always)]
fn poly(z: f64, c: &[f64; 6]) -> f64 {
    ((((c[0] * z + c[1]) * z + c[2]) * z + c[3]) * z + c[4]) * z + c[5]
}

/// (sin x, cos x) for 0 ≤ x ≤ 8π. Absolute error is a few ulp of 1.
/// Branch-free: octants of random positions defeat branch prediction.
#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    // NaN passes through; the integrator reports it after the step
    debug_assert!(x.is_nan() || (0.0..=8.0 * std::f64::consts::PI).contains(&x), "sin_cos domain: {x}");
    // x ≥ 0, so truncation is floor
    let j = (x * FRAC_4_PI) as u64;
    let j = j + (j & 1);
    let y = j as f64;
    let z = ((x - y * DP1) - y * DP2) - y * DP3;
    let zz = z * z;
    let sp = z + z * zz * poly(zz, &SIN_COEF);
    let cp = 1.0 - 0.5 * zz + zz * zz * poly(zz, &COS_COEF);
    // quarter turns: q = 0 → (s, c), 1 → (c, −s), 2 → (−s, −c), 3 → (−c, s)
    let q = (j >> 1) & 3;
    let swap = 0u64.wrapping_sub(q & 1);
    let (sb, cb) = (sp.to_bits(), cp.to_bits());
    let s_bits = (sb & !swap) | (cb & swap);
    let c_bits = (cb & !swap) | (sb & swap);
    let s_sign = (q >> 1) << 63;
    let c_sign = (((q + 1) >> 1) & 1) << 63;
    (f64::from_bits(s_bits ^ s_sign), f64::from_bits(c_bits ^ c_sign))
}
