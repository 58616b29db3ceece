//! Tapped-delay-line Rayleigh fading with an exponential power delay profile,
//! and additive white Gaussian noise.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub num_taps: usize,
    pub decay_rate: f64,
    /// Tap spacing is one sample at this rate.
    pub sample_rate: f64,
    /// Scale the profile to unit total mean power.
    pub normalize: bool,
}

impl ChannelParams {
    pub fn new(num_taps: usize, decay_rate: f64, sample_rate: f64, normalize: bool) -> Result<Self> {
        if num_taps == 0 {
            return Err(Error::Config("num_taps must be >= 1".into()));
        }
        if !(decay_rate >= 0.0) || !decay_rate.is_finite() {
            return Err(Error::Config(format!("decay_rate must be >= 0, got {decay_rate}")));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::Config(format!("sample_rate must be > 0, got {sample_rate}")));
        }
        Ok(Self {
            num_taps,
            decay_rate,
            sample_rate,
            normalize,
        })
    }

    /// Mean power of each tap, `e^{−τl}` (optionally normalized).
    pub fn tap_powers(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.num_taps)
            .map(|l| (-self.decay_rate * l as f64).exp())
            .collect();
        if self.normalize {
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / total).collect()
        } else {
            raw
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Complex64>,
    /// Stream the taps were drawn from, when known.
    pub source: Option<StreamKey>,
}

impl ChannelRealization {
    pub fn identity() -> Self {
        Self {
            taps: vec![Complex64::new(1.0, 0.0)],
            source: None,
        }
    }

    pub fn from_taps(taps: Vec<Complex64>) -> Self {
        Self { taps, source: None }
    }

    /// `H_t = Σ_l h_l e^{−j2πtl/n}` for signed tone `t`.
    pub fn frequency_response(&self, tone: i64, n: usize) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(l, h)| {
                let idx = (tone * l as i64).rem_euclid(n as i64) as f64;
                h * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * idx / n as f64)
            })
            .sum()
    }
}

/// Draw `CN(0, σ_l²)` taps.
pub fn draw_channel<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> ChannelRealization {
    let taps = params
        .tap_powers()
        .into_iter()
        .map(|p| complex_gaussian(rng, p))
        .collect();
    ChannelRealization { taps, source: None }
}

/// Linear convolution; output length `samples + taps − 1`.
pub fn apply_channel(samples: &[Complex64], ch: &ChannelRealization) -> Vec<Complex64> {
    if samples.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); samples.len() + ch.taps.len() - 1];
    for (i, x) in samples.iter().enumerate() {
        for (l, h) in ch.taps.iter().enumerate() {
            out[i + l] += x * h;
        }
    }
    out
}

/// Add `CN(0, N0)` noise with `N0 = signal_power_ref / 10^(snr_db/10)`.
pub fn add_awgn<R: Rng + ?Sized>(
    samples: &[Complex64],
    snr_db: f64,
    signal_power_ref: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(signal_power_ref > 0.0) {
        return Err(Error::Config(format!(
            "signal_power_ref must be > 0, got {signal_power_ref}"
        )));
    }
    let n0 = noise_power(snr_db, signal_power_ref);
    Ok(samples
        .iter()
        .map(|x| x + complex_gaussian(rng, n0))
        .collect())
}

pub fn noise_power(snr_db: f64, signal_power_ref: f64) -> f64 {
    signal_power_ref / 10f64.powf(snr_db / 10.0)
}

/// One `CN(0, power)` draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, power: f64) -> Complex64 {
    let sd = (power / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sd, im * sd)
}
