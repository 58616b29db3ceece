//! The linear map from L tones to N time samples used inside the optimizer.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::waveform::check_grid;

/// `G = F_Nᴴ M`: zero-pad L tones into N bins, then an unnormalized inverse
/// DFT, `(Gx)_p = Σ_{k<L} x_k e^{j2πkp/N}`.
///
/// Columns are orthogonal with `GᴴG = N·I`. The constant frequency offset of
/// the transmitted waveform is left out since it does not change envelopes.
#[derive(Clone)]
pub struct SynthesisOperator {
    tones: usize,
    grid: usize,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SynthesisOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SynthesisOperator")
            .field("tones", &self.tones)
            .field("grid", &self.grid)
            .finish()
    }
}

impl SynthesisOperator {
    pub fn new(tones: usize, grid: usize) -> Result<Self> {
        if tones == 0 {
            return Err(Error::InvalidSequence("zero tones".into()));
        }
        check_grid(tones, grid)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            tones,
            grid,
            inverse: planner.plan_fft_inverse(grid),
            forward: planner.plan_fft_forward(grid),
        })
    }

    pub fn tones(&self) -> usize {
        self.tones
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.tones, "forward: wrong input length");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid];
        buf[..self.tones].copy_from_slice(x);
        self.inverse.process(&mut buf);
        buf
    }

    pub fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.grid, "adjoint: wrong input length");
        let mut buf = y.to_vec();
        self.forward.process(&mut buf);
        buf.truncate(self.tones);
        buf
    }

    /// Entry `(p, k)` of `G`.
    pub fn entry(&self, p: usize, k: usize) -> Complex64 {
        let phase = 2.0 * std::f64::consts::PI * ((k * p) % self.grid) as f64 / self.grid as f64;
        Complex64::from_polar(1.0, phase)
    }
}

pub fn build_operator(tones: usize, grid: usize) -> Result<SynthesisOperator> {
    SynthesisOperator::new(tones, grid)
}
