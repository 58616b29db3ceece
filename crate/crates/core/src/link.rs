//! OFDM transmit grid shared by a wake-up symbol and QAM data, the QAM
//! receiver, and the comparison waveforms (single-tone OOK, time-gated
//! mask OOK, coherent QPSK).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{complex_gaussian, ChannelRealization};
use crate::error::{Error, Result};
use crate::waveform::{prepend_cp, OokSymbolPair, WaveformConfig};

/// Seed of the fixed QPSK fill on the mask baseline's tones.
pub const MASK_FILL_SEED: u64 = 0x6d61_736b;
/// The mask baseline occupies signed tones `-6..=6`.
pub const MASK_TONES: std::ops::RangeInclusive<i64> = -6..=6;
/// Tone used by the single-tone baseline.
pub const SINGLE_TONE: i64 = 1;

fn bin(tone: i64, n: usize) -> usize {
    tone.rem_euclid(n as i64) as usize
}

fn idft(grid: &mut [Complex64]) {
    crate::fft::inverse(grid);
}

/// `(1/n) Σ_p x[p] e^{−j2πtp/n}` at every bin.
fn dft(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    crate::fft::forward(&mut buf);
    buf.iter_mut().for_each(|v| *v /= n as f64);
    buf
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuxLayout {
    pub n_fft: usize,
    /// Signed tones carrying the sequence, in element order.
    pub wus_tones: Vec<i64>,
    pub qam_tones: Vec<i64>,
    /// Fraction of the total (unit) power given to the wake-up symbol.
    pub power_split: f64,
}

impl MuxLayout {
    /// Sequence on tones −7..7, QAM on ±10..16, half the power each.
    pub fn standard() -> Self {
        Self {
            n_fft: 64,
            wus_tones: (-7..=7).collect(),
            qam_tones: (-16..=-10).chain(10..=16).collect(),
            power_split: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let half = self.n_fft as i64 / 2;
        let all = self.wus_tones.iter().chain(&self.qam_tones);
        let mut seen = vec![false; self.n_fft];
        for &t in all {
            if t < -half || t >= half {
                return Err(Error::Config(format!("tone {t} outside the {}-point grid", self.n_fft)));
            }
            let b = bin(t, self.n_fft);
            if seen[b] {
                return Err(Error::Config(format!("tone {t} assigned twice")));
            }
            seen[b] = true;
        }
        if self.qam_tones.is_empty() {
            return Err(Error::Config("no QAM tones".into()));
        }
        if !(0.0..=1.0).contains(&self.power_split) {
            return Err(Error::Config(format!(
                "power_split must lie in [0, 1], got {}",
                self.power_split
            )));
        }
        Ok(())
    }

    /// Per-tone QAM amplitude for unit-energy constellations.
    pub fn qam_amplitude(&self) -> f64 {
        ((1.0 - self.power_split) / self.qam_tones.len() as f64).sqrt()
    }

    pub fn wus_amplitude(&self) -> f64 {
        self.power_split.sqrt()
    }
}

/// Square Gray-mapped M-QAM with unit average energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamConstellation {
    order: usize,
    side: usize,
    scale: f64,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            return Err(Error::Config(format!("unsupported QAM order {order}")));
        }
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        Ok(Self { order, side, scale })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    fn axis_bits(&self) -> usize {
        self.bits_per_symbol() / 2
    }

    fn level(&self, code: usize) -> f64 {
        // Gray decode
        let mut idx = code;
        let mut shift = code >> 1;
        while shift > 0 {
            idx ^= shift;
            shift >>= 1;
        }
        (2 * idx) as f64 - (self.side as f64 - 1.0)
    }

    fn code(&self, v: f64) -> usize {
        let idx = ((v + self.side as f64 - 1.0) / 2.0).round();
        let idx = idx.clamp(0.0, self.side as f64 - 1.0) as usize;
        idx ^ (idx >> 1)
    }

    /// Bits are MSB first: the first half selects the in-phase level.
    pub fn map(&self, bits: &[u8]) -> Complex64 {
        let h = self.axis_bits();
        let pack = |b: &[u8]| b.iter().fold(0usize, |acc, &x| (acc << 1) | x as usize);
        let i = self.level(pack(&bits[..h]));
        let q = self.level(pack(&bits[h..2 * h]));
        Complex64::new(i, q) / self.scale
    }

    pub fn demap(&self, sym: Complex64) -> Vec<u8> {
        let h = self.axis_bits();
        let mut out = Vec::with_capacity(2 * h);
        for code in [self.code(sym.re * self.scale), self.code(sym.im * self.scale)] {
            for b in (0..h).rev() {
                out.push(((code >> b) & 1) as u8);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QamSymbolBlock {
    pub constellation: QamConstellation,
    pub symbols: Vec<Complex64>,
    pub bits: Vec<u8>,
}

impl QamSymbolBlock {
    pub fn from_bits(constellation: QamConstellation, bits: Vec<u8>) -> Result<Self> {
        let k = constellation.bits_per_symbol();
        if bits.len() % k != 0 {
            return Err(Error::LengthMismatch {
                expected: bits.len().div_ceil(k) * k,
                got: bits.len(),
            });
        }
        let symbols = bits.chunks(k).map(|c| constellation.map(c)).collect();
        Ok(Self {
            constellation,
            symbols,
            bits,
        })
    }

    pub fn random<R: Rng + ?Sized>(constellation: QamConstellation, tones: usize, rng: &mut R) -> Self {
        let bits = (0..tones * constellation.bits_per_symbol())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        Self::from_bits(constellation, bits).expect("whole symbols")
    }

    pub fn zeros(constellation: QamConstellation, tones: usize) -> Self {
        Self {
            constellation,
            symbols: vec![Complex64::new(0.0, 0.0); tones],
            bits: vec![0; tones * constellation.bits_per_symbol()],
        }
    }
}

/// The wake-up waveform options.
#[derive(Debug, Clone, PartialEq)]
pub enum WusWaveform {
    Sequence(OokSymbolPair),
    SingleTone,
    Mask,
}

impl WusWaveform {
    /// One `n_fft`-sample symbol with unit mean power (no CP).
    pub fn symbol(&self, bit: u8, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
        match self {
            WusWaveform::Sequence(pair) => {
                let seq = pair.for_bit(bit);
                cfg.check_tones(seq.len())?;
                let mut grid = vec![Complex64::new(0.0, 0.0); cfg.n_fft];
                let scale = 1.0 / seq.nominal_power().sqrt();
                for (k, c) in seq.elements().iter().enumerate() {
                    grid[bin(seq.tone_offset(k), cfg.n_fft)] += c * scale;
                }
                idft(&mut grid);
                Ok(grid)
            }
            WusWaveform::SingleTone => single_tone_ook(bit, cfg),
            WusWaveform::Mask => mask_based_ook(bit, cfg),
        }
    }

    /// The transmitted CP-included frame.
    ///
    /// Sequence and single-tone symbols get an ordinary CP. The mask option
    /// is sent as two 2 µs OOK sub-symbols (guard interval plus the gated
    /// half body), so it is not cyclic over the OFDM receiver's window.
    pub fn frame(&self, bit: u8, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
        let sym = self.symbol(bit, cfg)?;
        match self {
            WusWaveform::Mask => mask_frame(bit, &sym, cfg),
            _ => prepend_cp(&sym, cfg),
        }
    }

    /// Frequency-domain grid for the sequence option.
    fn tone_grid(&self, bit: u8, layout: &MuxLayout) -> Option<Result<Vec<Complex64>>> {
        let WusWaveform::Sequence(pair) = self else {
            return None;
        };
        let seq = pair.for_bit(bit);
        if seq.len() != layout.wus_tones.len() {
            return Some(Err(Error::LengthMismatch {
                expected: layout.wus_tones.len(),
                got: seq.len(),
            }));
        }
        let mut grid = vec![Complex64::new(0.0, 0.0); layout.n_fft];
        let scale = layout.wus_amplitude() / seq.nominal_power().sqrt();
        for (c, &t) in seq.elements().iter().zip(&layout.wus_tones) {
            grid[bin(t, layout.n_fft)] += c * scale;
        }
        Some(Ok(grid))
    }
}

/// Standalone wake-up frame, CP included.
pub fn wus_transmit(wus: &WusWaveform, bit: u8, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    wus.frame(bit, cfg)
}

/// Mask symbol laid out as the bit's 2 µs OOK sub-symbol: the gated half
/// body preceded by a guard interval of half the CP copied from its tail.
fn mask_frame(bit: u8, sym: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    let half = cfg.n_fft / 2;
    let gi = cfg.cp_samples / 2;
    if cfg.n_fft % 2 != 0 || cfg.cp_samples % 2 != 0 || gi > half {
        return Err(Error::Config("mask frame needs even n_fft and CP".into()));
    }
    let b = bit as usize;
    let body = &sym[b * half..(b + 1) * half];
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.n_fft + cfg.cp_samples];
    let start = b * (half + gi);
    for (o, v) in out[start..start + half + gi].iter_mut().zip(body[half - gi..].iter().chain(body)) {
        *o = *v;
    }
    Ok(out)
}

/// One CP-OFDM symbol carrying the wake-up bit and/or the QAM block.
///
/// Sequence options are placed on the tone grid together with the QAM
/// symbols and converted with a single inverse transform; the time-gated
/// baselines are added as frames in the time domain.
pub fn mux_transmit(
    bit: u8,
    wus: Option<&WusWaveform>,
    qam: Option<&QamSymbolBlock>,
    layout: &MuxLayout,
    cfg: &WaveformConfig,
) -> Result<Vec<Complex64>> {
    layout.validate()?;
    if layout.n_fft != cfg.n_fft {
        return Err(Error::Config(format!(
            "layout grid {} differs from n_fft {}",
            layout.n_fft, cfg.n_fft
        )));
    }
    let mut grid = vec![Complex64::new(0.0, 0.0); layout.n_fft];
    let mut gated = None;
    if let Some(w) = wus {
        match w.tone_grid(bit, layout) {
            Some(g) => grid = g?,
            None => gated = Some(w.frame(bit, cfg)?),
        }
    }
    if let Some(q) = qam {
        if q.symbols.len() != layout.qam_tones.len() {
            return Err(Error::LengthMismatch {
                expected: layout.qam_tones.len(),
                got: q.symbols.len(),
            });
        }
        let amp = layout.qam_amplitude();
        for (s, &t) in q.symbols.iter().zip(&layout.qam_tones) {
            grid[bin(t, layout.n_fft)] += s * amp;
        }
    }
    idft(&mut grid);
    let mut out = prepend_cp(&grid, cfg)?;
    if let Some(g) = gated {
        let amp = layout.wus_amplitude();
        for (x, w) in out.iter_mut().zip(g) {
            *x += w * amp;
        }
    }
    Ok(out)
}

/// Received values on the QAM tones after CP removal and the DFT.
pub fn ofdm_demodulate(rx: &[Complex64], layout: &MuxLayout, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    let need = cfg.cp_samples + cfg.n_fft;
    if rx.len() < need {
        return Err(Error::LengthMismatch {
            expected: need,
            got: rx.len(),
        });
    }
    let spec = dft(&rx[cfg.cp_samples..need]);
    Ok(layout.qam_tones.iter().map(|&t| spec[bin(t, cfg.n_fft)]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmReception {
    /// Equalized, unit-energy-scaled symbols; `None` where the channel gain is zero.
    pub symbols: Vec<Option<Complex64>>,
    /// Hard bits per tone; `None` for erased tones.
    pub bits: Vec<Option<Vec<u8>>>,
}

impl OfdmReception {
    /// Bit errors against the transmitted block; erased tones count fully.
    pub fn bit_errors(&self, tx: &QamSymbolBlock) -> usize {
        let k = tx.constellation.bits_per_symbol();
        self.bits
            .iter()
            .zip(tx.bits.chunks(k))
            .map(|(rx, txb)| match rx {
                Some(b) => b.iter().zip(txb).filter(|(a, b)| a != b).count(),
                None => k,
            })
            .sum()
    }
}

/// CP removal, DFT, one-tap zero forcing with the known channel, Gray demap.
pub fn ofdm_receive(
    rx: &[Complex64],
    layout: &MuxLayout,
    cfg: &WaveformConfig,
    csi: &ChannelRealization,
    constellation: &QamConstellation,
) -> Result<OfdmReception> {
    let y = ofdm_demodulate(rx, layout, cfg)?;
    let amp = layout.qam_amplitude();
    if amp == 0.0 {
        return Err(Error::Config("no power on the QAM tones".into()));
    }
    let mut symbols = Vec::with_capacity(y.len());
    let mut bits = Vec::with_capacity(y.len());
    for (v, &t) in y.iter().zip(&layout.qam_tones) {
        let h = csi.frequency_response(t, cfg.n_fft);
        if h.norm() == 0.0 {
            symbols.push(None);
            bits.push(None);
        } else {
            let s = v / (h * amp);
            symbols.push(Some(s));
            bits.push(Some(constellation.demap(s)));
        }
    }
    Ok(OfdmReception { symbols, bits })
}

/// Fraction of the symbol's power that lands on `tones`, in dB.
pub fn tone_leakage_dbc(symbol: &[Complex64], tones: &[i64]) -> f64 {
    let spec = dft(symbol);
    let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
    let on: f64 = tones.iter().map(|&t| spec[bin(t, symbol.len())].norm_sqr()).sum();
    10.0 * (on / total).log10()
}

/// Tone +1 switched on for the bit's active window, unit mean power over
/// the symbol.
pub fn single_tone_ook(bit: u8, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    let n = cfg.n_fft;
    let w = cfg.window_samples(n)?;
    let start = bit as usize * w;
    let amp = (n as f64 / w as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (p, x) in out.iter_mut().enumerate().skip(start).take(w) {
        let phase = 2.0 * std::f64::consts::PI * (SINGLE_TONE * p as i64) as f64 / n as f64;
        *x = Complex64::from_polar(amp, phase);
    }
    Ok(out)
}

/// OFDM symbol with a fixed QPSK fill on tones −6..6, zeroed outside the
/// bit's half of the symbol and rescaled to unit mean power.
pub fn mask_based_ook(bit: u8, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    let n = cfg.n_fft;
    let mut grid = vec![Complex64::new(0.0, 0.0); n];
    for (t, v) in MASK_TONES.zip(mask_fill()) {
        grid[bin(t, n)] = v;
    }
    idft(&mut grid);
    let half = n / 2;
    let start = bit as usize * half;
    for (p, x) in grid.iter_mut().enumerate() {
        if p < start || p >= start + half {
            *x = Complex64::new(0.0, 0.0);
        }
    }
    let mean: f64 = grid.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
    let scale = 1.0 / mean.sqrt();
    Ok(grid.into_iter().map(|x| x * scale).collect())
}

/// The mask baseline's per-tone QPSK fill.
pub fn mask_fill() -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(MASK_FILL_SEED);
    MASK_TONES
        .map(|_| {
            let q = rng.random_range(0..4u8) as f64;
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * (2.0 * q + 1.0))
        })
        .collect()
}

/// Monte-Carlo coherent QPSK over AWGN; returns `(bit_errors, bits)`.
pub fn qpsk_reference_errors<R: Rng + ?Sized>(ebn0_db: f64, trials: u64, rng: &mut R) -> (u64, u64) {
    let qpsk = QamConstellation::new(4).expect("QPSK");
    // Es = 1, two bits per symbol
    let n0 = 0.5 / 10f64.powf(ebn0_db / 10.0);
    let mut errors = 0;
    for _ in 0..trials {
        let bits = [rng.random_range(0..2u8), rng.random_range(0..2u8)];
        let y = qpsk.map(&bits) + complex_gaussian(rng, n0);
        errors += qpsk.demap(y).iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
    }
    (errors, 2 * trials)
}

pub fn qpsk_reference_ber<R: Rng + ?Sized>(ebn0_db: f64, trials: u64, rng: &mut R) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let (e, n) = qpsk_reference_errors(ebn0_db, trials, rng);
    Ok(e as f64 / n as f64)
}

/// `Q(√(2 Eb/N0))`.
pub fn qpsk_theory_ber(ebn0_db: f64) -> f64 {
    let g = 10f64.powf(ebn0_db / 10.0);
    0.5 * statrs::function::erf::erfc(g.sqrt())
}
