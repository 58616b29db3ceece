//! Batch experiments: optimizer runs, metric reports and Monte-Carlo BER
//! sweeps with deterministic per-trial streams.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{add_awgn, apply_channel, draw_channel, ChannelParams, ChannelRealization};
use crate::config::ConfigMap;
use crate::error::{Error, Result};
use crate::link::{
    mux_transmit, ofdm_receive, qpsk_reference_errors, wus_transmit, MuxLayout, QamConstellation,
    QamSymbolBlock, WusWaveform,
};
use crate::metrics::{onoff_ratio_db, papr_db, rmse_cost, tone_power_profile, tone_power_spread};
use crate::receiver::{WakeUpReceiver, WurConfig, DEFAULT_CUTOFF_HZ};
use crate::rng::StreamKey;
use crate::scan::{scan_run, ScanOutcome, ScanParams};
use crate::sequence::{load_table1, table1_active_us, Sequence};
use crate::waveform::{make_shape, synthesize, OokSymbolPair, Relation, WaveformConfig};

pub const SEED_ENV: &str = "WAKEFORM_SEED";
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    StandaloneAwgn,
    StandaloneFading,
    Mux,
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standalone_awgn" => Ok(Self::StandaloneAwgn),
            "standalone_fading" => Ok(Self::StandaloneFading),
            "mux" => Ok(Self::Mux),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaveformOption {
    Table(u32),
    File(PathBuf),
    SingleTone,
    Mask,
    QpskRef,
}

impl WaveformOption {
    pub fn parse(name: &str, seq_file: Option<PathBuf>) -> Result<Self> {
        match name {
            "single_tone" => Ok(Self::SingleTone),
            "mask" => Ok(Self::Mask),
            "qpsk_ref" => Ok(Self::QpskRef),
            "file" => seq_file
                .map(Self::File)
                .ok_or_else(|| Error::Config("waveform = file needs seq_file".into())),
            other => match other.strip_prefix("seq").and_then(|n| n.parse().ok()) {
                Some(id @ 1..=4) => Ok(Self::Table(id)),
                _ => Err(Error::Config(format!("unknown waveform `{other}`"))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Table(id) => format!("seq{id}"),
            Self::File(p) => p.display().to_string(),
            Self::SingleTone => "single_tone".into(),
            Self::Mask => "mask".into(),
            Self::QpskRef => "qpsk_ref".into(),
        }
    }

    /// Active duration the option was designed for, if it has one.
    fn native_active_us(&self) -> Option<f64> {
        match self {
            Self::Table(id) => table1_active_us(*id).ok(),
            _ => None,
        }
    }

    fn sequence(&self) -> Result<Option<Sequence>> {
        match self {
            Self::Table(id) => load_table1(*id).map(Some),
            Self::File(p) => Sequence::read(p).map(Some),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Awgn,
    ExpPdp(ChannelParams),
}

/// Wake-up signal carried next to the QAM data in the mux scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuxWus {
    /// The configured sequence waveform.
    Seq,
    SingleTone,
    Mask,
    /// QAM only.
    None,
}

impl FromStr for MuxWus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq" => Ok(Self::Seq),
            "single_tone" => Ok(Self::SingleTone),
            "mask" => Ok(Self::Mask),
            "none" => Ok(Self::None),
            other => Err(Error::Config(format!("unknown baseline `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub waveform: WaveformOption,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub channel: ChannelKind,
    pub wur_cutoff_hz: f64,
    pub wur_sample_rate_hz: f64,
    pub qam_order: usize,
    pub layout: MuxLayout,
    pub baseline: MuxWus,
    pub t_active_us: f64,
    pub relation: Relation,
    /// Record wall-clock time per point; off makes CSVs byte-identical.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, waveform: WaveformOption, snr_db: Vec<f64>, trials: u64) -> Self {
        let t_active_us = waveform.native_active_us().unwrap_or(1.6);
        let channel = match scenario {
            Scenario::StandaloneFading => ChannelKind::ExpPdp(paper_channel()),
            _ => ChannelKind::Awgn,
        };
        Self {
            scenario,
            waveform,
            snr_db,
            trials,
            master_seed: DEFAULT_SEED,
            channel,
            wur_cutoff_hz: DEFAULT_CUTOFF_HZ,
            wur_sample_rate_hz: 20e6,
            qam_order: 4,
            layout: MuxLayout::standard(),
            baseline: MuxWus::Seq,
            t_active_us,
            relation: Relation::TimeShift,
            timing: true,
        }
    }

    /// Build from a parsed file; relative `seq_file` paths resolve against
    /// `base_dir`.
    pub fn from_map(mut map: ConfigMap, base_dir: &Path) -> Result<Self> {
        let scenario: Scenario = map.take_or("scenario", Scenario::StandaloneAwgn)?;
        let seq_file = map.take_str("seq_file").map(|p| base_dir.join(p));
        let name = map.take_str("waveform").unwrap_or_else(|| "seq1".into());
        let waveform = WaveformOption::parse(&name, seq_file)?;
        let snr_db = map
            .take_list::<f64>("snr_db")?
            .ok_or_else(|| Error::Config("missing snr_db".into()))?;
        let trials = map.take_or("trials", 10_000u64)?;
        let mut cfg = Self::new(scenario, waveform, snr_db, trials);
        cfg.master_seed = map.take_or("master_seed", DEFAULT_SEED)?;

        let kind = map.take_str("channel");
        let num_taps = map.take_or("num_taps", 10usize)?;
        let decay = map.take_or("decay_rate", 0.1f64)?;
        let normalize = map.take_bool("normalize", true)?;
        cfg.wur_cutoff_hz = map.take_or("wur_cutoff_hz", DEFAULT_CUTOFF_HZ)?;
        cfg.wur_sample_rate_hz = map.take_or("wur_sample_rate_hz", 20e6)?;
        let fading = ChannelKind::ExpPdp(ChannelParams::new(num_taps, decay, 20e6, normalize)?);
        cfg.channel = match (kind.as_deref(), scenario) {
            (Some("awgn"), Scenario::StandaloneFading) | (Some("exppdp"), Scenario::StandaloneAwgn) => {
                return Err(Error::Config("channel contradicts scenario".into()))
            }
            (Some("awgn"), _) => ChannelKind::Awgn,
            (Some("exppdp"), _) => fading,
            (Some(other), _) => return Err(Error::Config(format!("unknown channel `{other}`"))),
            (None, Scenario::StandaloneFading) => fading,
            (None, _) => ChannelKind::Awgn,
        };

        cfg.qam_order = map.take_or("qam_order", 4usize)?;
        cfg.layout.power_split = map.take_or("power_split", 0.5f64)?;
        match map.take_str("mux_layout").as_deref() {
            None | Some("standard") => {}
            Some(other) => return Err(Error::Config(format!("unknown mux_layout `{other}`"))),
        }
        cfg.baseline = map.take_or("baseline", MuxWus::Seq)?;
        if let Some(t) = map.take::<f64>("t_active_us")? {
            cfg.t_active_us = t;
        }
        if let Some(r) = map.take_str("relation") {
            cfg.relation = r.parse()?;
        }
        cfg.timing = map.take_bool("timing", true)?;
        map.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_map(ConfigMap::read(path)?, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::Config("snr_db is empty".into()));
        }
        if self.snr_db.windows(2).any(|w| !(w[1] > w[0])) || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db must be finite and strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        QamConstellation::new(self.qam_order)?;
        self.layout.validate()?;
        self.waveform_config()?;
        Ok(())
    }

    pub fn waveform_config(&self) -> Result<WaveformConfig> {
        WaveformConfig::wifi(self.t_active_us)
    }

    fn wus(&self, cfg: &WaveformConfig) -> Result<Option<WusWaveform>> {
        Ok(match &self.waveform {
            WaveformOption::SingleTone => Some(WusWaveform::SingleTone),
            WaveformOption::Mask => Some(WusWaveform::Mask),
            WaveformOption::QpskRef => None,
            other => {
                let seq = other.sequence()?.expect("sequence option");
                Some(WusWaveform::Sequence(OokSymbolPair::new(seq, cfg, self.relation)?))
            }
        })
    }
}

/// Ten-tap exponential profile with decay 0.1 at 20 MHz, unit power.
pub fn paper_channel() -> ChannelParams {
    ChannelParams::new(10, 0.1, 20e6, true).expect("valid defaults")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub bits_per_trial: u64,
    pub bit_errors: u64,
    pub wall_seconds: f64,
}

impl LinkPoint {
    pub fn bits(&self) -> u64 {
        self.trials * self.bits_per_trial
    }

    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits() as f64
    }

    pub fn ci_halfwidth(&self) -> f64 {
        wilson_halfwidth(self.bit_errors, self.bits())
    }
}

/// Half-width of the 95 % Wilson score interval.
pub fn wilson_halfwidth(errors: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = errors as f64 / n;
    z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub label: String,
    pub points: Vec<LinkPoint>,
}

pub const CSV_HEADER: [&str; 6] = ["snr_db", "trials", "bit_errors", "ber", "ci_halfwidth", "wall_seconds"];

impl LinkReport {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(file)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("ascii"))
    }

    fn write_to<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for p in &self.points {
            w.write_record([
                p.snr_db.to_string(),
                p.trials.to_string(),
                p.bit_errors.to_string(),
                p.ber().to_string(),
                p.ci_halfwidth().to_string(),
                p.wall_seconds.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// SNR where the BER first falls to `target`, interpolating
    /// `log10(BER)` linearly between grid points.
    pub fn snr_at_ber(&self, target: f64) -> Option<f64> {
        let lt = target.log10();
        for w in self.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.ber() >= target && b.ber() <= target {
                if b.bit_errors == 0 || a.ber() == b.ber() {
                    return Some(b.snr_db);
                }
                let (la, lb) = (a.ber().log10(), b.ber().log10());
                return Some(a.snr_db + (lt - la) / (lb - la) * (b.snr_db - a.snr_db));
            }
        }
        match self.points.first() {
            Some(p) if p.ber() <= target => Some(p.snr_db),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuxReport {
    /// QAM bits on the data tones.
    pub ofdm: LinkReport,
    /// Wake-up bit, absent when no wake-up signal is sent.
    pub wur: Option<LinkReport>,
}

/// Mean power of the CP-included symbol, averaged over both bits.
pub fn symbol_power_ref(wus: &WusWaveform, cfg: &WaveformConfig) -> Result<f64> {
    let mut acc = 0.0;
    for bit in [0u8, 1] {
        let x = wus_transmit(wus, bit, cfg)?;
        acc += x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
    }
    Ok(acc / 2.0)
}

/// Channel output truncated to the transmitted length (one block-faded
/// symbol; the tail beyond it is discarded).
fn pass_channel<R: Rng>(x: &[Complex64], channel: &ChannelKind, rng: &mut R) -> (Vec<Complex64>, ChannelRealization) {
    match channel {
        ChannelKind::Awgn => (x.to_vec(), ChannelRealization::identity()),
        ChannelKind::ExpPdp(p) => {
            let ch = draw_channel(p, rng);
            let mut y = apply_channel(x, &ch);
            y.truncate(x.len());
            (y, ch)
        }
    }
}

fn run_points<F>(cfg: &ExperimentConfig, bits_per_trial: u64, label: String, trial: F) -> Result<LinkReport>
where
    F: Fn(f64, StreamKey) -> Result<u64> + Sync,
{
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (idx, &snr) in cfg.snr_db.iter().enumerate() {
        let start = Instant::now();
        let bit_errors = (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial(snr, StreamKey::new(cfg.master_seed, idx as u64, t)))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        points.push(LinkPoint {
            snr_db: snr,
            trials: cfg.trials,
            bits_per_trial,
            bit_errors,
            wall_seconds: if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 },
        });
    }
    Ok(LinkReport { label, points })
}

/// Standalone wake-up BER sweep (or the coherent QPSK reference).
pub fn run_ber(cfg: &ExperimentConfig) -> Result<LinkReport> {
    cfg.validate()?;
    if cfg.scenario == Scenario::Mux {
        return Err(Error::Config("run_ber handles standalone scenarios; use run_mux_ber".into()));
    }
    let wcfg = cfg.waveform_config()?;
    let label = cfg.waveform.label();

    let Some(wus) = cfg.wus(&wcfg)? else {
        // equal energy per bit: one bit spread over the CP-included symbol
        let spread_db = 10.0 * ((wcfg.n_fft + wcfg.cp_samples) as f64).log10();
        return run_points(cfg, 2, label, |snr, key| {
            let mut rng = key.rng();
            Ok(qpsk_reference_errors(snr + spread_db, 1, &mut rng).0)
        });
    };

    let tx = [wus_transmit(&wus, 0, &wcfg)?, wus_transmit(&wus, 1, &wcfg)?];
    let power = symbol_power_ref(&wus, &wcfg)?;
    let receiver = WakeUpReceiver::new(WurConfig::for_waveform(&wcfg, cfg.wur_cutoff_hz, cfg.wur_sample_rate_hz)?)?;
    run_points(cfg, 1, label, |snr, key| {
        let mut rng = key.rng();
        let bit = rng.random_range(0..2u8);
        let (y, _) = pass_channel(&tx[bit as usize], &cfg.channel, &mut rng);
        let y = add_awgn(&y, snr, power, &mut rng)?;
        Ok(u64::from(receiver.detect(&y)? != bit))
    })
}

/// Multiplexed sweep: QAM data on the outer tones and (optionally) a
/// wake-up signal in the centre, both reported.
///
/// Noise is referenced to the configured total transmit power (unity), so
/// runs with and without the wake-up signal share the same noise level.
pub fn run_mux_ber(cfg: &ExperimentConfig) -> Result<MuxReport> {
    cfg.validate()?;
    let wcfg = cfg.waveform_config()?;
    let constellation = QamConstellation::new(cfg.qam_order)?;
    let wus = match cfg.baseline {
        MuxWus::None => None,
        MuxWus::SingleTone => Some(WusWaveform::SingleTone),
        MuxWus::Mask => Some(WusWaveform::Mask),
        MuxWus::Seq => match cfg.wus(&wcfg)? {
            Some(w @ WusWaveform::Sequence(_)) => Some(w),
            _ => {
                return Err(Error::Config(
                    "baseline = seq needs a sequence waveform (seq1..seq4 or file)".into(),
                ))
            }
        },
    };
    let receiver = WakeUpReceiver::new(WurConfig::for_waveform(&wcfg, cfg.wur_cutoff_hz, cfg.wur_sample_rate_hz)?)?;
    let layout = &cfg.layout;
    let tones = layout.qam_tones.len();
    let bits_per_trial = (tones * constellation.bits_per_symbol()) as u64;
    let label = match (&wus, cfg.baseline) {
        (None, _) => "qam_only".to_string(),
        (Some(_), MuxWus::Seq) => cfg.waveform.label(),
        (Some(WusWaveform::Mask), _) => "mask".into(),
        _ => "single_tone".into(),
    };

    let trial = |snr: f64, key: StreamKey| -> Result<(u64, u64)> {
        let mut rng = key.rng();
        let bit = rng.random_range(0..2u8);
        let qam = QamSymbolBlock::random(constellation, tones, &mut rng);
        let tx = mux_transmit(bit, wus.as_ref(), Some(&qam), layout, &wcfg)?;
        let (y, ch) = pass_channel(&tx, &cfg.channel, &mut rng);
        let y = add_awgn(&y, snr, 1.0, &mut rng)?;
        let data = ofdm_receive(&y, layout, &wcfg, &ch, &constellation)?;
        let wake = match wus {
            Some(_) => u64::from(receiver.detect(&y)? != bit),
            None => 0,
        };
        Ok((data.bit_errors(&qam) as u64, wake))
    };

    let mut ofdm = Vec::new();
    let mut wur = Vec::new();
    for (idx, &snr) in cfg.snr_db.iter().enumerate() {
        let start = Instant::now();
        let (e_data, e_wake) = (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial(snr, StreamKey::new(cfg.master_seed, idx as u64, t)))
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        let wall = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        ofdm.push(LinkPoint {
            snr_db: snr,
            trials: cfg.trials,
            bits_per_trial,
            bit_errors: e_data,
            wall_seconds: wall,
        });
        wur.push(LinkPoint {
            snr_db: snr,
            trials: cfg.trials,
            bits_per_trial: 1,
            bit_errors: e_wake,
            wall_seconds: wall,
        });
    }
    Ok(MuxReport {
        ofdm: LinkReport {
            label: label.clone(),
            points: ofdm,
        },
        wur: wus.map(|_| LinkReport { label, points: wur }),
    })
}

/// Optimizer run description.
#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    pub params: ScanParams,
    pub t_active_us: f64,
    pub grid: usize,
    pub solver_debug_csv: Option<PathBuf>,
}

impl OptimizeConfig {
    pub fn from_map(mut map: ConfigMap, base_dir: &Path) -> Result<Self> {
        let tones = map.take_or("L", 15usize)?;
        let grid = map.take_or("N", 64usize)?;
        let init = map.take_str("init").unwrap_or_else(|| "ones".into());
        let mut params = match init.as_str() {
            "ones" => ScanParams::ones(tones)?,
            other => match other.strip_prefix("file:") {
                Some(p) => {
                    let seq = Sequence::read(base_dir.join(p))?;
                    if seq.len() != tones {
                        return Err(Error::LengthMismatch {
                            expected: tones,
                            got: seq.len(),
                        });
                    }
                    ScanParams::new(seq)
                }
                None => return Err(Error::Config(format!("unknown init `{other}`"))),
            },
        };
        params.lambda = map.take_or("lambda", params.lambda)?;
        params.u_first = map.take_or("u_first", params.u_first)?;
        params.u_leak = map.take_or("u_leak", params.u_leak)?;
        params.max_iters = map.take_or("max_iters", params.max_iters)?;
        params.cost_tol = map.take_or("cost_tol", params.cost_tol)?;
        params.solver_tol = map.take_or("solver_tol", params.solver_tol)?;
        let t_active_us = map.take_or("t_active_us", 1.2f64)?;
        let solver_debug_csv = map.take_str("solver_debug_csv").map(|p| base_dir.join(p));
        params.solver_debug = solver_debug_csv.is_some();
        map.finish()?;
        params.validate(grid)?;
        Ok(Self {
            params,
            t_active_us,
            grid,
            solver_debug_csv,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_map(ConfigMap::read(path)?, base)
    }
}

pub fn run_optimize(cfg: &OptimizeConfig) -> Result<ScanOutcome> {
    let wcfg = WaveformConfig::wifi(cfg.t_active_us)?;
    let shape = make_shape(&wcfg, 0, cfg.grid)?;
    scan_run(&cfg.params, &shape)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub t_active_us: Option<f64>,
    pub n: Option<usize>,
    pub value: f64,
}

/// Leakage ratios and envelope errors for both active durations, PAPR and
/// the per-tone power profile.
pub fn run_metrics(seq: &Sequence) -> Result<Vec<MetricRow>> {
    let mut rows = Vec::new();
    for active in [1.2, 1.6] {
        let cfg = WaveformConfig::wifi(active)?;
        let shape = make_shape(&cfg, 0, 64)?;
        for n in [64usize, 1024] {
            rows.push(MetricRow {
                metric: "onoff_ratio_db".into(),
                t_active_us: Some(active),
                n: Some(n),
                value: onoff_ratio_db(seq, &shape, n)?,
            });
        }
        rows.push(MetricRow {
            metric: "rmse_cost".into(),
            t_active_us: Some(active),
            n: Some(64),
            value: rmse_cost(seq, &shape)?,
        });
    }
    rows.push(MetricRow {
        metric: "papr_db".into(),
        t_active_us: None,
        n: Some(1024),
        value: papr_db(&synthesize(seq, 1024)?)?,
    });
    rows.push(MetricRow {
        metric: "tone_power_spread".into(),
        t_active_us: None,
        n: None,
        value: tone_power_spread(seq),
    });
    for (k, p) in tone_power_profile(seq).into_iter().enumerate() {
        rows.push(MetricRow {
            metric: format!("tone_power_{k}"),
            t_active_us: None,
            n: None,
            value: p,
        });
    }
    Ok(rows)
}

pub fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from("metric,t_active_us,n,value\n");
    for r in rows {
        let t = r.t_active_us.map(|v| v.to_string()).unwrap_or_default();
        let n = r.n.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{t},{n},{}", r.metric, r.value);
    }
    out
}

/// `table:N` or a path to a sequence file.
pub fn load_sequence_spec(spec: &str) -> Result<Sequence> {
    match spec.strip_prefix("table:") {
        Some(id) => {
            let id = id
                .parse()
                .map_err(|_| Error::Config(format!("bad table id `{id}`")))?;
            load_table1(id)
        }
        None => Sequence::read(spec),
    }
}
