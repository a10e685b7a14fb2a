//! Small numeric helpers shared by the estimators.

/// `n!!`, the product of the integers `n, n-2, ...` down to 1 or 2; `0!! = 1`.
pub fn double_factorial(n: u32) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Maps `x` into `[-period/2, period/2)`.
pub fn wrap_symmetric(x: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    rem_euclid(x + half, period) - half
}

/// Euclidean remainder, always in `[0, period)`.
pub fn rem_euclid(x: f64, period: f64) -> f64 {
    let r = libm::fmod(x, period);
    let r = if r < 0.0 { r + period } else { r };
    // fmod of a tiny negative number plus period can round up to period
    if r >= period {
        0.0
    } else {
        r
    }
}

/// `|x|^e`, with an exact repeated-multiplication path for small integer `e`.
pub fn abs_pow(x: f64, e: f64) -> f64 {
    let a = libm::fabs(x);
    if is_integer(e) && (0.0..=16.0).contains(&e) {
        let mut acc = 1.0;
        for _ in 0..(e as u32) {
            acc *= a;
        }
        acc
    } else {
        libm::pow(a, e)
    }
}

pub(crate) fn is_integer(x: f64) -> bool {
    x.is_finite() && libm::floor(x) == x
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for one unit of a seeded experiment:
/// `splitmix64(splitmix64(splitmix64(master) ^ first) ^ second)`.
///
/// The formula is part of the reproducibility contract; changing it changes
/// every published sweep.
pub fn derive_seed(master: u64, first: u64, second: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ first) ^ second)
}

/// Sample mean and unbiased sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64))
}
