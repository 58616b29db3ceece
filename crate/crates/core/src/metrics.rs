//! Waveform quality metrics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sequence::Sequence;
use crate::waveform::{centered_idft, check_grid, ShapeTemplate};

/// Sampled RMSE between the power envelope and the scaled ideal shape,
/// `sqrt(1/N Σ_p (|Σ_k c_k e^{j2πkp/N}|² - P a_p²)²)`, on the shape's grid.
///
/// The time samples are not divided by `√P`, so a sequence with `‖c‖² = P`
/// is compared against an envelope of mean `P`.
pub fn rmse_cost(seq: &Sequence, shape: &ShapeTemplate) -> Result<f64> {
    rmse_cost_tones(seq.elements(), shape)
}

pub(crate) fn rmse_cost_tones(tones: &[Complex64], shape: &ShapeTemplate) -> Result<f64> {
    let n = shape.len();
    check_grid(tones.len(), n)?;
    let p = tones.len() as f64 - 1.0;
    let s = centered_idft(tones, n);
    let sum: f64 = s
        .iter()
        .zip(shape.amplitudes())
        .map(|(x, a)| {
            let d = x.norm_sqr() - p * a * a;
            d * d
        })
        .sum();
    Ok((sum / n as f64).sqrt())
}

/// Peak ON power over peak OFF power in dB, evaluated on an `n`-point grid.
///
/// `shape` may be defined on a coarser grid whose length divides `n`; its
/// windows are then stretched onto the finer grid.
pub fn onoff_ratio_db(seq: &Sequence, shape: &ShapeTemplate, n: usize) -> Result<f64> {
    let base = shape.len();
    if base == 0 || n % base != 0 {
        return Err(Error::LengthMismatch {
            expected: base,
            got: n,
        });
    }
    if shape.off_set().is_empty() {
        return Err(Error::EmptyOffSet);
    }
    check_grid(seq.len(), n)?;
    let factor = n / base;
    let s = centered_idft(seq.elements(), n);
    let amps = shape.amplitudes();
    let (mut on, mut off) = (0.0f64, 0.0f64);
    for (p, x) in s.iter().enumerate() {
        let pw = x.norm_sqr();
        if amps[p / factor] > 0.0 {
            on = on.max(pw);
        } else {
            off = off.max(pw);
        }
    }
    if on == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(10.0 * (on / off).log10())
}

/// Per-tone power `|c_k|²`.
pub fn tone_power_profile(seq: &Sequence) -> Vec<f64> {
    seq.elements().iter().map(|c| c.norm_sqr()).collect()
}

/// Largest over smallest nonzero tone power.
pub fn tone_power_spread(seq: &Sequence) -> f64 {
    let nz: Vec<f64> = tone_power_profile(seq)
        .into_iter()
        .filter(|&p| p > 0.0)
        .collect();
    let max = nz.iter().cloned().fold(0.0, f64::max);
    let min = nz.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

pub fn papr_db(samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::ZeroSignal);
    }
    let (peak, sum) = samples.iter().fold((0.0f64, 0.0f64), |(pk, s), x| {
        let p = x.norm_sqr();
        (pk.max(p), s + p)
    });
    if sum == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(10.0 * (peak / (sum / samples.len() as f64)).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::load_table1;
    use crate::waveform::{make_shape, synthesize, WaveformConfig};
    use std::f64::consts::PI;

    fn direct_rmse(tones: &[Complex64], amps: &[f64]) -> f64 {
        let n = amps.len();
        let p = tones.len() as f64 - 1.0;
        let mut acc = 0.0;
        for t in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, c) in tones.iter().enumerate() {
                s += c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * t as f64 / n as f64);
            }
            let d = s.norm_sqr() - p * amps[t] * amps[t];
            acc += d * d;
        }
        (acc / n as f64).sqrt()
    }

    #[test]
    fn rmse_zero_when_envelope_matches() {
        let mut c = vec![Complex64::new(0.0, 0.0); 15];
        c[2] = Complex64::new(14f64.sqrt(), 0.0);
        let seq = Sequence::new(c).unwrap();
        assert!(rmse_cost(&seq, &ShapeTemplate::flat(64)).unwrap() < 1e-12);
    }

    #[test]
    fn rmse_matches_direct_summation() {
        let ones = Sequence::normalized(vec![Complex64::new(1.0, 0.0); 15]).unwrap();
        let flat = ShapeTemplate::flat(64);
        let got = rmse_cost(&ones, &flat).unwrap();
        let want = direct_rmse(ones.elements(), flat.amplitudes());
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");

        let cfg = WaveformConfig::wifi(1.6).unwrap();
        let shape = make_shape(&cfg, 0, 64).unwrap();
        let seq3 = load_table1(3).unwrap();
        let got = rmse_cost(&seq3, &shape).unwrap();
        let want = direct_rmse(seq3.elements(), shape.amplitudes());
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn rmse_rejects_coarse_grid() {
        let shape = ShapeTemplate::flat(20);
        assert!(rmse_cost(&load_table1(1).unwrap(), &shape).is_err());
    }

    #[test]
    fn papr_examples() {
        let flat: Vec<Complex64> = (0..32).map(|i| Complex64::from_polar(2.0, i as f64)).collect();
        assert!(papr_db(&flat).unwrap().abs() < 1e-12);
        let mut imp = vec![Complex64::new(0.0, 0.0); 100];
        imp[17] = Complex64::new(0.0, 3.0);
        assert!((papr_db(&imp).unwrap() - 20.0).abs() < 1e-12);
        assert!(papr_db(&[Complex64::new(0.0, 0.0); 4]).is_err());
        assert!(papr_db(&[]).is_err());

        let s = synthesize(&load_table1(1).unwrap(), 1024).unwrap();
        let peak = s.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
        let mean = s.iter().map(|x| x.norm_sqr()).sum::<f64>() / 1024.0;
        assert!((papr_db(&s).unwrap() - 10.0 * (peak / mean).log10()).abs() < 1e-9);
    }

    #[test]
    fn tone_profile_properties() {
        let seq1 = load_table1(1).unwrap();
        let prof = tone_power_profile(&seq1);
        for k in 0..15 {
            assert!((prof[k] - prof[14 - k]).abs() < 1e-3);
        }
        assert!((prof.iter().sum::<f64>() - seq1.energy()).abs() < 1e-12);
        assert!(tone_power_spread(&load_table1(2).unwrap()) < tone_power_spread(&seq1));
        assert!(tone_power_profile(&Sequence::zeros(15).unwrap())
            .iter()
            .all(|&p| p == 0.0));
    }

    #[test]
    fn onoff_errors() {
        let seq = load_table1(1).unwrap();
        assert!(matches!(
            onoff_ratio_db(&seq, &ShapeTemplate::flat(64), 64),
            Err(Error::EmptyOffSet)
        ));
        let cfg = WaveformConfig::wifi(1.2).unwrap();
        let shape = make_shape(&cfg, 0, 64).unwrap();
        assert!(onoff_ratio_db(&seq, &shape, 100).is_err());
        let coarse = onoff_ratio_db(&seq, &shape, 64).unwrap();
        let fine = onoff_ratio_db(&seq, &shape, 1024).unwrap();
        assert!((coarse - 49.5).abs() < 3.0, "{coarse}");
        assert!((fine - 49.5).abs() < 3.0, "{fine}");
    }
}
