//! Window statistics used by the feature catalog. All functions are total on
//! finite input: degenerate cases (empty or zero-variance windows) return 0.

use crate::scalar::Real;

pub fn mean<T: Real>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    x.iter().fold(T::zero(), |a, &v| a + v) / T::from_usize_lossy(x.len())
}

pub fn min<T: Real>(x: &[T]) -> T {
    x.iter().copied().reduce(T::min).unwrap_or_else(T::zero)
}

pub fn max<T: Real>(x: &[T]) -> T {
    x.iter().copied().reduce(T::max).unwrap_or_else(T::zero)
}

pub fn median<T: Real>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / T::c(2.0)
    }
}

/// `k`-th central moment (population normalization).
fn central_moment<T: Real>(x: &[T], mu: T, k: i32) -> T {
    if x.is_empty() {
        return T::zero();
    }
    x.iter().fold(T::zero(), |a, &v| a + (v - mu).powi(k)) / T::from_usize_lossy(x.len())
}

/// Population standard deviation.
pub fn std_dev<T: Real>(x: &[T]) -> T {
    central_moment(x, mean(x), 2).sqrt()
}

pub fn rms<T: Real>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    (x.iter().fold(T::zero(), |a, &v| a + v * v) / T::from_usize_lossy(x.len())).sqrt()
}

pub fn skewness<T: Real>(x: &[T]) -> T {
    let mu = mean(x);
    let m2 = central_moment(x, mu, 2);
    if m2 <= T::zero() {
        return T::zero();
    }
    central_moment(x, mu, 3) / m2.powf(T::c(1.5))
}

/// Excess kurtosis.
pub fn kurtosis<T: Real>(x: &[T]) -> T {
    let mu = mean(x);
    let m2 = central_moment(x, mu, 2);
    if m2 <= T::zero() {
        return T::zero();
    }
    central_moment(x, mu, 4) / (m2 * m2) - T::c(3.0)
}

/// Sample autocorrelation at `lag`, normalized by the full-window variance.
pub fn autocorrelation<T: Real>(x: &[T], lag: usize) -> T {
    let n = x.len();
    if lag >= n {
        return T::zero();
    }
    let mu = mean(x);
    let var = central_moment(x, mu, 2);
    if var <= T::zero() {
        return T::zero();
    }
    let acc = (0..n - lag).fold(T::zero(), |a, i| a + (x[i] - mu) * (x[i + lag] - mu));
    acc / (T::from_usize_lossy(n) * var)
}

/// Single-bin DFT amplitude at `freq_hz`, scaled so a sinusoid of amplitude
/// `A` spanning whole cycles returns `A`.
pub fn tone_amplitude<T: Real>(x: &[T], freq_hz: T, sampling_rate_hz: T) -> T {
    if x.is_empty() {
        return T::zero();
    }
    let w = T::c(2.0) * T::PI() * freq_hz / sampling_rate_hz;
    let (mut re, mut im) = (T::zero(), T::zero());
    for (n, &v) in x.iter().enumerate() {
        let ph = w * T::from_usize_lossy(n);
        re = re + v * ph.cos();
        im = im - v * ph.sin();
    }
    T::c(2.0) * re.hypot(im) / T::from_usize_lossy(x.len())
}

/// Shannon entropy (bits) of an equal-width amplitude histogram over `[min, max]`.
pub fn histogram_entropy<T: Real>(x: &[T], bins: usize) -> T {
    let (lo, hi) = (min(x), max(x));
    if x.is_empty() || bins == 0 || !(hi > lo) {
        return T::zero();
    }
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / T::from_usize_lossy(bins);
    for &v in x {
        let b = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        counts[b] += 1;
    }
    let n = T::from_usize_lossy(x.len());
    counts
        .iter()
        .filter(|&&c| c > 0)
        .fold(T::zero(), |h, &c| {
            let p = T::from_usize_lossy(c) / n;
            h - p * p.log2()
        })
}

/// Approximate entropy with embedding dimension `m` and tolerance `r`
/// (Chebyshev distance, self-matches counted).
pub fn approximate_entropy<T: Real>(x: &[T], m: usize, r: T) -> T {
    let n = x.len();
    if m == 0 || n <= m + 1 {
        return T::zero();
    }
    let phi = |m: usize| -> T {
        let count = n - m + 1;
        let mut total = T::zero();
        for i in 0..count {
            let mut matches = 0usize;
            for j in 0..count {
                if (0..m).all(|k| (x[i + k] - x[j + k]).abs() <= r) {
                    matches += 1;
                }
            }
            total = total + (T::from_usize_lossy(matches) / T::from_usize_lossy(count)).ln();
        }
        total / T::from_usize_lossy(count)
    };
    phi(m) - phi(m + 1)
}
