//! Non-coherent wake-up receiver: drop the cyclic prefix, low-pass filter,
//! compare the energy in the two bit windows.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveform::WaveformConfig;

/// Second-order IIR section `H(z) = (b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

/// Two-sample delay memory (transposed direct form II).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BiquadState {
    s1: f64,
    s2: f64,
}

impl BiquadState {
    pub fn step(&mut self, bq: &Biquad, x: f64) -> f64 {
        let y = bq.b[0] * x + self.s1;
        self.s1 = bq.b[1] * x - bq.a[0] * y + self.s2;
        self.s2 = bq.b[2] * x - bq.a[1] * y;
        y
    }
}

impl Biquad {
    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / (1.0 + self.a[0] + self.a[1])
    }

    /// `H(e^{j2πf/fs})`.
    pub fn response(&self, freq_hz: f64, sample_rate: f64) -> Complex64 {
        let w = 2.0 * std::f64::consts::PI * freq_hz / sample_rate;
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2) / (1.0 + self.a[0] * z1 + self.a[1] * z2)
    }

    pub fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }

    pub fn filter_real(&self, x: &[f64]) -> Vec<f64> {
        let mut st = BiquadState::default();
        x.iter().map(|&v| st.step(self, v)).collect()
    }

    /// Real and imaginary parts filtered separately from zero state.
    pub fn filter(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (mut re, mut im) = (BiquadState::default(), BiquadState::default());
        x.iter()
            .map(|v| Complex64::new(re.step(self, v.re), im.step(self, v.im)))
            .collect()
    }
}

/// Bilinear-transform Butterworth low-pass, prewarped so the −3 dB point is
/// exactly at `cutoff_hz`.
pub fn design_butterworth2(cutoff_hz: f64, sample_rate: f64) -> Result<Biquad> {
    if !(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0) {
        return Err(Error::Config(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            sample_rate / 2.0
        )));
    }
    let k = (std::f64::consts::PI * cutoff_hz / sample_rate).tan();
    let sq2 = std::f64::consts::SQRT_2;
    let norm = 1.0 / (1.0 + sq2 * k + k * k);
    let b0 = k * k * norm;
    Ok(Biquad {
        b: [b0, 2.0 * b0, b0],
        a: [2.0 * (k * k - 1.0) * norm, (1.0 - sq2 * k + k * k) * norm],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WurConfig {
    pub cutoff_hz: f64,
    pub sample_rate: f64,
    pub cp_samples: usize,
    pub window_samples: usize,
    pub window0_start: usize,
    pub window1_start: usize,
}

pub const DEFAULT_CUTOFF_HZ: f64 = 2.5e6;

impl WurConfig {
    /// Windows `[0, w)` and `[w, 2w)` after CP removal, matching the shape
    /// templates.
    pub fn for_waveform(cfg: &WaveformConfig, cutoff_hz: f64, sample_rate: f64) -> Result<Self> {
        if (sample_rate - cfg.sample_rate).abs() > 1e-6 * cfg.sample_rate {
            return Err(Error::Config(format!(
                "receiver sample rate {sample_rate} Hz differs from the link rate {} Hz",
                cfg.sample_rate
            )));
        }
        let w = cfg.window_samples(cfg.n_fft)?;
        let out = Self {
            cutoff_hz,
            sample_rate,
            cp_samples: cfg.cp_samples,
            window_samples: w,
            window0_start: 0,
            window1_start: w,
        };
        out.validate(cfg.n_fft)?;
        Ok(out)
    }

    pub fn validate(&self, symbol_len: usize) -> Result<()> {
        if !(self.cutoff_hz > 0.0 && self.cutoff_hz < self.sample_rate / 2.0) {
            return Err(Error::Config(format!("cutoff {} Hz out of range", self.cutoff_hz)));
        }
        let (a, b, w) = (self.window0_start, self.window1_start, self.window_samples);
        if w == 0 || a.max(b) + w > symbol_len || (a < b + w && b < a + w) {
            return Err(Error::Config("energy windows must be disjoint and inside the symbol".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct WakeUpReceiver {
    pub config: WurConfig,
    pub filter: Biquad,
}

impl WakeUpReceiver {
    pub fn new(config: WurConfig) -> Result<Self> {
        let filter = design_butterworth2(config.cutoff_hz, config.sample_rate)?;
        Ok(Self { config, filter })
    }

    /// Window energies `(E0, E1)` for one CP-prefixed symbol.
    pub fn energies(&self, rx: &[Complex64]) -> Result<(f64, f64)> {
        let c = &self.config;
        let need = c.cp_samples + c.window0_start.max(c.window1_start) + c.window_samples;
        if rx.len() < need {
            return Err(Error::LengthMismatch {
                expected: need,
                got: rx.len(),
            });
        }
        let y = self.filter.filter(&rx[c.cp_samples..]);
        let energy = |start: usize| -> f64 {
            y[start..start + c.window_samples]
                .iter()
                .map(|v| v.norm_sqr())
                .sum()
        };
        Ok((energy(c.window0_start), energy(c.window1_start)))
    }

    /// 0 if `E0 > E1`, else 1 (ties decode as 0).
    pub fn detect(&self, rx: &[Complex64]) -> Result<u8> {
        let (e0, e1) = self.energies(rx)?;
        Ok(if e0 >= e1 { 0 } else { 1 })
    }
}

pub fn detect_bit(rx: &[Complex64], cfg: &WurConfig) -> Result<u8> {
    WakeUpReceiver::new(cfg.clone())?.detect(rx)
}
