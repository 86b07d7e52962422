//! Mexican-hat continuous wavelet transform on uniformly sampled signals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Scaled and shifted Mexican-hat wavelet
/// `2 / (sqrt(3p) pi^(1/4)) * (1 - u^2) * exp(-u^2 / 2)`, `u = (t - q) / p`.
pub fn mexican_hat<T: Real>(t: T, p: T, q: T) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::InvalidParameter(format!("wavelet scale must be > 0, got {p}")));
    }
    Ok(mexican_hat_unchecked(t, p, q))
}

#[inline]
fn mexican_hat_unchecked<T: Real>(t: T, p: T, q: T) -> T {
    let two = T::c(2.0);
    let u = (t - q) / p;
    let u2 = u * u;
    let norm = two / ((T::c(3.0) * p).sqrt() * T::PI().powf(T::c(0.25)));
    norm * (T::one() - u2) * (-u2 / two).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct WaveletParams<T> {
    /// Scales `p` in seconds, strictly increasing.
    pub scales: Vec<T>,
    /// Distance between consecutive shifts `q`, in samples.
    pub shift_stride_samples: usize,
    /// Kernel support is truncated at `|t - q| <= support_half_width * p`.
    pub support_half_width: T,
}

impl<T: Real> Default for WaveletParams<T> {
    /// Eight dyadic scales whose main-lobe width `2p` spans 0.5 ms to 64 ms.
    fn default() -> Self {
        WaveletParams {
            scales: (0..8).map(|k| T::c(0.25e-3 * f64::from(1u32 << k))).collect(),
            shift_stride_samples: 8,
            support_half_width: T::c(6.0),
        }
    }
}

impl<T: Real> WaveletParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::InvalidParameter("scale set is empty".into()));
        }
        if self.scales.iter().any(|&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(Error::InvalidParameter("scales must be finite and > 0".into()));
        }
        if self.scales.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("scales must be strictly increasing".into()));
        }
        if self.shift_stride_samples == 0 {
            return Err(Error::InvalidParameter("shift stride must be >= 1".into()));
        }
        if !(self.support_half_width > T::zero()) {
            return Err(Error::InvalidParameter("support half width must be > 0".into()));
        }
        Ok(())
    }
}

/// Coefficients indexed `[scale][shift]`. A flagged coefficient had part of
/// its truncated support outside the signal and was computed on the samples
/// that exist.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtMatrix<T> {
    pub scales: Vec<T>,
    pub shifts: Vec<usize>,
    pub coeffs: Vec<Vec<T>>,
    pub flagged: Vec<Vec<bool>>,
}

impl<T: Real> CwtMatrix<T> {
    pub fn get(&self, scale: usize, shift: usize) -> T {
        self.coeffs[scale][shift]
    }

    /// Unflagged coefficients of one scale.
    pub fn interior(&self, scale: usize) -> impl Iterator<Item = T> + '_ {
        self.coeffs[scale]
            .iter()
            .zip(&self.flagged[scale])
            .filter(|(_, &f)| !f)
            .map(|(&c, _)| c)
    }
}

/// Sampled wavelet kernels for a fixed sample period.
#[derive(Debug, Clone)]
pub struct Cwt<T> {
    params: WaveletParams<T>,
    dt: T,
    /// Kernel of scale i sampled at `k * dt`, `k = -h..=h`.
    kernels: Vec<Vec<T>>,
}

impl<T: Real> Cwt<T> {
    pub fn new(params: WaveletParams<T>, sample_period: T) -> Result<Self> {
        params.validate()?;
        if !(sample_period > T::zero()) {
            return Err(Error::InvalidParameter("sample period must be > 0".into()));
        }
        let kernels = params
            .scales
            .iter()
            .map(|&p| {
                let h = (params.support_half_width * p / sample_period)
                    .floor()
                    .to_usize()
                    .unwrap_or(0);
                (0..=2 * h)
                    .map(|i| {
                        let t = T::from_usize_lossy(i) * sample_period - T::from_usize_lossy(h) * sample_period;
                        mexican_hat_unchecked(t, p, T::zero())
                    })
                    .collect()
            })
            .collect();
        Ok(Cwt {
            params,
            dt: sample_period,
            kernels,
        })
    }

    pub fn params(&self) -> &WaveletParams<T> {
        &self.params
    }

    pub fn sample_period(&self) -> T {
        self.dt
    }

    /// Half-width of the truncated support of scale `i`, in samples.
    pub fn half_width(&self, i: usize) -> usize {
        self.kernels[i].len() / 2
    }

    /// Single coefficient at scale index `i` and shift sample `q`.
    pub fn coefficient(&self, y: &[T], i: usize, q: usize) -> (T, bool) {
        let kernel = &self.kernels[i];
        let h = kernel.len() / 2;
        let lo = q.saturating_sub(h);
        let hi = (q + h).min(y.len().saturating_sub(1));
        let flagged = q < h || q + h >= y.len();
        let mut acc = T::zero();
        for (n, &yn) in y.iter().enumerate().take(hi + 1).skip(lo) {
            acc = acc + yn * kernel[n + h - q];
        }
        (acc * self.dt, flagged)
    }

    /// Transform at the given shift samples.
    pub fn transform_at(&self, y: &[T], shifts: &[usize]) -> Result<CwtMatrix<T>> {
        if y.is_empty() {
            return Err(Error::InvalidInput("cannot transform an empty signal".into()));
        }
        if let Some(&q) = shifts.iter().find(|&&q| q >= y.len()) {
            return Err(Error::InvalidInput(format!(
                "shift {q} outside signal of length {}",
                y.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(self.kernels.len());
        let mut flagged = Vec::with_capacity(self.kernels.len());
        for i in 0..self.kernels.len() {
            let (c, f): (Vec<T>, Vec<bool>) = shifts.iter().map(|&q| self.coefficient(y, i, q)).unzip();
            coeffs.push(c);
            flagged.push(f);
        }
        Ok(CwtMatrix {
            scales: self.params.scales.clone(),
            shifts: shifts.to_vec(),
            coeffs,
            flagged,
        })
    }

    /// Transform at every `shift_stride_samples`-th sample of the signal.
    pub fn transform(&self, y: &[T]) -> Result<CwtMatrix<T>> {
        let shifts: Vec<usize> = (0..y.len()).step_by(self.params.shift_stride_samples).collect();
        self.transform_at(y, &shifts)
    }

    /// Discrete mean of the truncated kernel of scale `i`, `sum psi * dt`.
    pub fn kernel_mean(&self, i: usize) -> T {
        self.kernels[i].iter().fold(T::zero(), |a, &v| a + v) * self.dt
    }
}

/// One-shot transform of `y` sampled every `sample_period` seconds.
pub fn cwt<T: Real>(y: &[T], params: &WaveletParams<T>, sample_period: T) -> Result<CwtMatrix<T>> {
    Cwt::new(params.clone(), sample_period)?.transform(y)
}
