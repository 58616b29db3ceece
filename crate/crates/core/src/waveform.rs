//! Sequence-to-waveform synthesis, cyclic prefix, ideal envelope templates
//! and the bit-0/bit-1 sequence relations.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sequence::{nominal_power, Sequence};

const GRID_EPS: f64 = 1e-9;

/// OFDM numerology shared by the transmitter, receiver and optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformConfig {
    /// `T_s` in seconds.
    pub symbol_duration: f64,
    /// `Δf = 1/T_s` in Hz.
    pub subcarrier_spacing: f64,
    /// `T_CP` in seconds.
    pub cp_duration: f64,
    /// Length of each ON/OFF window in seconds.
    pub active_duration: f64,
    pub sample_rate: f64,
    /// Samples per `T_s` at `sample_rate`.
    pub n_fft: usize,
    pub cp_samples: usize,
}

impl WaveformConfig {
    pub fn new(
        symbol_duration: f64,
        cp_duration: f64,
        active_duration: f64,
        sample_rate: f64,
    ) -> Result<Self> {
        if !(symbol_duration > 0.0 && sample_rate > 0.0) {
            return Err(Error::Config(
                "symbol duration and sample rate must be positive".into(),
            ));
        }
        if !(active_duration > 0.0) {
            return Err(Error::Config("active duration must be positive".into()));
        }
        if active_duration > symbol_duration / 2.0 * (1.0 + GRID_EPS) {
            return Err(Error::Config(format!(
                "active duration {active_duration:e} s exceeds T_s/2 = {:e} s",
                symbol_duration / 2.0
            )));
        }
        if cp_duration < 0.0 {
            return Err(Error::Config("negative CP duration".into()));
        }
        let n_fft = integral(sample_rate * symbol_duration, "sample_rate * T_s")?;
        let cp_samples = integral(sample_rate * cp_duration, "sample_rate * T_CP")?;
        Ok(Self {
            symbol_duration,
            subcarrier_spacing: 1.0 / symbol_duration,
            cp_duration,
            active_duration,
            sample_rate,
            n_fft,
            cp_samples,
        })
    }

    /// 802.11n/ac numerology at 20 Msps: `T_s` = 3.2 µs, `T_CP` = 0.8 µs.
    pub fn wifi(active_us: f64) -> Result<Self> {
        Self::new(3.2e-6, 0.8e-6, active_us * 1e-6, 20e6)
    }

    pub fn with_active_duration(&self, active_duration: f64) -> Result<Self> {
        Self::new(
            self.symbol_duration,
            self.cp_duration,
            active_duration,
            self.sample_rate,
        )
    }

    /// Samples covered by one active window on an `n`-point grid.
    pub fn window_samples(&self, n: usize) -> Result<usize> {
        integral(
            n as f64 * self.active_duration / self.symbol_duration,
            "n * T_active / T_s",
        )
    }

    pub fn active_fraction(&self) -> f64 {
        self.active_duration / self.symbol_duration
    }

    /// Fails unless `n_fft >= 2L-1`.
    pub fn check_tones(&self, tones: usize) -> Result<()> {
        check_grid(tones, self.n_fft)
    }
}

fn integral(x: f64, what: &str) -> Result<usize> {
    let r = x.round();
    if r < 0.0 || (x - r).abs() > GRID_EPS * x.abs().max(1.0) {
        return Err(Error::Config(format!("{what} = {x} is not an integer")));
    }
    Ok(r as usize)
}

pub(crate) fn check_grid(tones: usize, n: usize) -> Result<()> {
    let min = 2 * tones - 1;
    if n < min {
        return Err(Error::Undersampled { n, tones, min });
    }
    Ok(())
}

fn check_odd(tones: usize) -> Result<()> {
    if tones % 2 == 0 {
        return Err(Error::InvalidSequence(format!(
            "length must be odd, got {tones}"
        )));
    }
    Ok(())
}

/// `Σ_k c_k e^{j2π(k-(L-1)/2)p/n}` for `p = 0..n`, without the `1/√P` factor.
pub(crate) fn centered_idft(tones: &[Complex64], n: usize) -> Vec<Complex64> {
    let centre = (tones.len() as i64 - 1) / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, &c) in tones.iter().enumerate() {
        let bin = (k as i64 - centre).rem_euclid(n as i64) as usize;
        buf[bin] += c;
    }
    crate::fft::inverse(&mut buf);
    buf
}

/// Inverse of [`centered_idft`] restricted to the L occupied bins.
pub(crate) fn centered_dft(samples: &[Complex64], tones: usize) -> Vec<Complex64> {
    let n = samples.len();
    let centre = (tones as i64 - 1) / 2;
    let mut buf = samples.to_vec();
    crate::fft::forward(&mut buf);
    (0..tones)
        .map(|k| buf[(k as i64 - centre).rem_euclid(n as i64) as usize] / n as f64)
        .collect()
}

/// Time samples `s[p]` of the basis function built from raw tones on an
/// `n`-point grid over one `T_s`, normalized by `1/√P` with `P = L-1`.
///
/// The DC element need not be zero, so optimizer iterates can be passed in.
pub fn synthesize_tones(tones: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    check_odd(tones.len())?;
    check_grid(tones.len(), n)?;
    let p = nominal_power(tones.len());
    if p <= 0.0 {
        return Err(Error::InvalidSequence("need at least 3 tones".into()));
    }
    let scale = 1.0 / p.sqrt();
    Ok(centered_idft(tones, n)
        .into_iter()
        .map(|x| x * scale)
        .collect())
}

pub fn synthesize(seq: &Sequence, n: usize) -> Result<Vec<Complex64>> {
    synthesize_tones(seq.elements(), n)
}

/// Prepend the last `cp_samples` of a `n_fft`-sample symbol.
pub fn prepend_cp(samples: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    if samples.len() != cfg.n_fft {
        return Err(Error::LengthMismatch {
            expected: cfg.n_fft,
            got: samples.len(),
        });
    }
    let cp = cfg.cp_samples;
    let mut out = Vec::with_capacity(cfg.n_fft + cp);
    out.extend_from_slice(&samples[cfg.n_fft - cp..]);
    out.extend_from_slice(samples);
    Ok(out)
}

/// Sampled ideal envelope `D_i` as amplitudes `a_p = √D_i(pT_s/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTemplate {
    amplitudes: Vec<f64>,
    on_set: Vec<usize>,
    off_set: Vec<usize>,
    symbol_index: usize,
}

impl ShapeTemplate {
    /// Template with arbitrary nonnegative amplitudes; ON samples are the
    /// nonzero ones.
    pub fn from_amplitudes(amplitudes: Vec<f64>, symbol_index: usize) -> Result<Self> {
        if amplitudes.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::Config("shape amplitudes must be finite and >= 0".into()));
        }
        let on_set: Vec<usize> = (0..amplitudes.len()).filter(|&p| amplitudes[p] > 0.0).collect();
        if on_set.is_empty() {
            return Err(Error::Config("shape has no ON samples".into()));
        }
        let off_set = (0..amplitudes.len()).filter(|&p| amplitudes[p] == 0.0).collect();
        Ok(Self {
            amplitudes,
            on_set,
            off_set,
            symbol_index,
        })
    }

    /// Constant envelope `a_p = 1` (no OFF samples).
    pub fn flat(n: usize) -> Self {
        Self {
            amplitudes: vec![1.0; n],
            on_set: (0..n).collect(),
            off_set: Vec::new(),
            symbol_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn on_set(&self) -> &[usize] {
        &self.on_set
    }

    pub fn off_set(&self) -> &[usize] {
        &self.off_set
    }

    pub fn symbol_index(&self) -> usize {
        self.symbol_index
    }
}

/// Ideal envelope for bit `i` on an `n`-point grid: `T_s/T_active` on the
/// half-open window `[i·T_active, (i+1)·T_active)`, zero elsewhere.
pub fn make_shape(cfg: &WaveformConfig, i: usize, n: usize) -> Result<ShapeTemplate> {
    if i > 1 {
        return Err(Error::Config(format!("bit index must be 0 or 1, got {i}")));
    }
    let w = cfg.window_samples(n)?;
    if w == 0 || (i + 1) * w > n {
        return Err(Error::Config(format!(
            "window of {w} samples does not fit bit {i} on a {n}-point grid"
        )));
    }
    let level = (n as f64 / w as f64).sqrt();
    let mut amplitudes = vec![0.0; n];
    for a in &mut amplitudes[i * w..(i + 1) * w] {
        *a = level;
    }
    ShapeTemplate::from_amplitudes(amplitudes, i)
}

/// How the bit-1 sequence is obtained from the bit-0 sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Reverse element order: time reversal of the waveform.
    Flip,
    /// Element-wise conjugate: conjugated time reversal.
    Conjugate,
    /// Linear phase ramp over the centred tone index: delay by `T_active`.
    PhaseRamp,
    /// Delay by `T_active` computed on the sample grid (synthesize, rotate,
    /// transform back).
    TimeShift,
}

impl std::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip" => Ok(Relation::Flip),
            "conjugate" => Ok(Relation::Conjugate),
            "phase_ramp" => Ok(Relation::PhaseRamp),
            "time_shift" => Ok(Relation::TimeShift),
            other => Err(Error::Config(format!("unknown relation `{other}`"))),
        }
    }
}

pub fn derive_bit1(seq0: &Sequence, cfg: &WaveformConfig, relation: Relation) -> Result<Sequence> {
    let c = seq0.elements();
    let out = match relation {
        Relation::Flip => c.iter().rev().copied().collect(),
        Relation::Conjugate => c.iter().map(|x| x.conj()).collect(),
        Relation::PhaseRamp => {
            let frac = cfg.active_fraction();
            c.iter()
                .enumerate()
                .map(|(k, &x)| {
                    let tone = seq0.tone_offset(k) as f64;
                    x * Complex64::from_polar(1.0, -2.0 * PI * tone * frac)
                })
                .collect()
        }
        Relation::TimeShift => {
            cfg.check_tones(c.len())?;
            let n = cfg.n_fft;
            let shift = cfg.window_samples(n)?;
            let mut samples = centered_idft(c, n);
            samples.rotate_right(shift % n);
            let mut tones = centered_dft(&samples, c.len());
            // the DC bin only carries round-off
            let dc = seq0.dc_index();
            tones[dc] = Complex64::new(0.0, 0.0);
            tones
        }
    };
    Sequence::new(out)
}

/// Bit-0 and bit-1 sequences of one OOK symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct OokSymbolPair {
    pub seq0: Sequence,
    pub seq1: Sequence,
    pub relation: Relation,
}

impl OokSymbolPair {
    pub fn new(seq0: Sequence, cfg: &WaveformConfig, relation: Relation) -> Result<Self> {
        let seq1 = derive_bit1(&seq0, cfg, relation)?;
        Ok(Self {
            seq0,
            seq1,
            relation,
        })
    }

    pub fn for_bit(&self, bit: u8) -> &Sequence {
        if bit == 0 {
            &self.seq0
        } else {
            &self.seq1
        }
    }
}
