use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wakeform_core::channel::ChannelRealization;
use wakeform_core::link::{
    mask_based_ook, mask_fill, mux_transmit, ofdm_receive, qpsk_reference_errors, qpsk_theory_ber,
    single_tone_ook, tone_leakage_dbc, MuxLayout, QamConstellation, QamSymbolBlock, WusWaveform, MASK_TONES,
};
use wakeform_core::waveform::{OokSymbolPair, Relation, WaveformConfig};
use wakeform_core::{load_table1, Complex64};

fn table_wus(id: u32) -> (WusWaveform, WaveformConfig) {
    let active = if id <= 2 { 1.2 } else { 1.6 };
    let cfg = WaveformConfig::wifi(active).unwrap();
    let pair = OokSymbolPair::new(load_table1(id).unwrap(), &cfg, Relation::TimeShift).unwrap();
    (WusWaveform::Sequence(pair), cfg)
}

fn body(frame: &[Complex64], cfg: &WaveformConfig) -> Vec<Complex64> {
    frame[cfg.cp_samples..cfg.cp_samples + cfg.n_fft].to_vec()
}

/// Direct-sum DFT with `1/n`.
fn dft_bin(x: &[Complex64], tone: i64) -> Complex64 {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(p, v)| v * Complex64::from_polar(1.0 / n, -2.0 * PI * tone as f64 * p as f64 / n))
        .sum()
}

#[test]
fn sequence_wus_stays_off_the_data_tones() {
    let layout = MuxLayout::standard();
    for id in 1..=4 {
        let (wus, cfg) = table_wus(id);
        for bit in [0u8, 1] {
            let tx = mux_transmit(bit, Some(&wus), None, &layout, &cfg).unwrap();
            let dbc = tone_leakage_dbc(&body(&tx, &cfg), &layout.qam_tones);
            assert!(dbc <= -120.0, "seq {id} bit {bit}: {dbc} dBc");
        }
    }
}

#[test]
fn transmit_is_additive_in_its_parts() {
    let layout = MuxLayout::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let qam = QamSymbolBlock::random(QamConstellation::new(16).unwrap(), 14, &mut rng);
    let (seq, cfg) = table_wus(2);
    for wus in [seq, WusWaveform::SingleTone, WusWaveform::Mask] {
        for bit in [0u8, 1] {
            let a = mux_transmit(bit, Some(&wus), None, &layout, &cfg).unwrap();
            let b = mux_transmit(bit, None, Some(&qam), &layout, &cfg).unwrap();
            let both = mux_transmit(bit, Some(&wus), Some(&qam), &layout, &cfg).unwrap();
            for i in 0..both.len() {
                assert!((a[i] + b[i] - both[i]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn orthogonal_mux_recovers_qam_exactly() {
    let layout = MuxLayout::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for order in [4, 16, 64] {
        let c = QamConstellation::new(order).unwrap();
        for id in 1..=4 {
            let (wus, cfg) = table_wus(id);
            let qam = QamSymbolBlock::random(c, 14, &mut rng);
            let tx = mux_transmit(1, Some(&wus), Some(&qam), &layout, &cfg).unwrap();
            let rx = ofdm_receive(&tx, &layout, &cfg, &ChannelRealization::identity(), &c).unwrap();
            assert_eq!(rx.bit_errors(&qam), 0);
            for (s, want) in rx.symbols.iter().zip(&qam.symbols) {
                assert!((s.unwrap() - want).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn mask_contaminates_the_data_tones() {
    let layout = MuxLayout::standard();
    let cfg = WaveformConfig::wifi(1.6).unwrap();
    let c = QamConstellation::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let qam = QamSymbolBlock::random(c, 14, &mut rng);
    for bit in [0u8, 1] {
        let witness = tone_leakage_dbc(&mask_based_ook(bit, &cfg).unwrap(), &layout.qam_tones);
        assert!(witness > -40.0, "{witness}");
        let tx = mux_transmit(bit, Some(&WusWaveform::Mask), Some(&qam), &layout, &cfg).unwrap();
        let rx = ofdm_receive(&tx, &layout, &cfg, &ChannelRealization::identity(), &c).unwrap();
        let evm: f64 = rx
            .symbols
            .iter()
            .zip(&qam.symbols)
            .map(|(s, w)| (s.unwrap() - w).norm_sqr())
            .sum();
        assert!(evm > 1e-6, "bit {bit}: {evm}");
    }
}

#[test]
fn mask_symbol_is_gated_fill() {
    let cfg = WaveformConfig::wifi(1.6).unwrap();
    let n = cfg.n_fft;
    let fill = mask_fill();
    // ungated symbol by direct summation
    let full: Vec<Complex64> = (0..n)
        .map(|p| {
            MASK_TONES
                .zip(&fill)
                .map(|(t, v)| v * Complex64::from_polar(1.0, 2.0 * PI * t as f64 * p as f64 / n as f64))
                .sum()
        })
        .collect();
    let full_power: f64 = full.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    for bit in [0usize, 1] {
        let gated: Vec<Complex64> = full
            .iter()
            .enumerate()
            .map(|(p, v)| if p / (n / 2) == bit { *v } else { Complex64::new(0.0, 0.0) })
            .collect();
        let gated_power: f64 = gated.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!((gated_power / full_power - 0.5).abs() < 0.1, "{}", gated_power / full_power);
        let sym = mask_based_ook(bit as u8, &cfg).unwrap();
        let scale = (1.0 / gated_power).sqrt();
        for (a, b) in sym.iter().zip(&gated) {
            assert!((a - b * scale).norm() < 1e-10);
        }
        // 13 contiguous tones including DC carry the fill before gating
        for (t, v) in MASK_TONES.zip(&fill) {
            assert!((dft_bin(&full, t) - v).norm() < 1e-10);
        }
    }
}

#[test]
fn single_tone_occupies_its_window() {
    let cfg = WaveformConfig::wifi(1.2).unwrap();
    let w = cfg.window_samples(cfg.n_fft).unwrap();
    for bit in [0u8, 1] {
        let s = single_tone_ook(bit, &cfg).unwrap();
        let power: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.len() as f64;
        assert!((power - 1.0).abs() < 1e-12);
        for (p, v) in s.iter().enumerate() {
            let inside = p >= bit as usize * w && p < (bit as usize + 1) * w;
            assert_eq!(v.norm() > 0.0, inside);
        }
    }
}

#[test]
fn mux_power_is_the_configured_total() {
    let layout = MuxLayout::standard();
    let c = QamConstellation::new(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for id in 1..=4 {
        let (wus, cfg) = table_wus(id);
        let mut acc = 0.0;
        let trials = 4000;
        for t in 0..trials {
            let qam = QamSymbolBlock::random(c, 14, &mut rng);
            let tx = mux_transmit((t % 2) as u8, Some(&wus), Some(&qam), &layout, &cfg).unwrap();
            let b = body(&tx, &cfg);
            acc += b.iter().map(|v| v.norm_sqr()).sum::<f64>() / b.len() as f64;
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() < 0.01, "seq {id}: {mean}");
    }
}

#[test]
fn qpsk_monte_carlo_tracks_theory() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for ebn0 in [0.0, 2.0, 4.0, 6.0] {
        let (errors, bits) = qpsk_reference_errors(ebn0, 200_000, &mut rng);
        let p = qpsk_theory_ber(ebn0);
        let se = (p * (1.0 - p) / bits as f64).sqrt();
        let got = errors as f64 / bits as f64;
        assert!((got - p).abs() <= 3.0 * se, "Eb/N0 {ebn0}: {got} vs {p} (se {se})");
    }
    assert!(qpsk_theory_ber(30.0) < 1e-100);
}
