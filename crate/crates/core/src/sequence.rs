//! Frequency-domain sequences, the four published reference sequences, and
//! the `wakeform-seq v1` text format.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A length-L complex sequence mapped onto L contiguous subcarriers.
///
/// L is odd and the centre element (0-based index `(L-1)/2`) sits on the DC
/// tone, which is always exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    elements: Vec<Complex64>,
}

impl Sequence {
    pub fn new(elements: Vec<Complex64>) -> Result<Self> {
        let len = elements.len();
        if len == 0 || len % 2 == 0 {
            return Err(Error::InvalidSequence(format!(
                "length must be odd and positive, got {len}"
            )));
        }
        let dc = elements[(len - 1) / 2];
        if dc != Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidSequence(format!(
                "DC element must be exactly zero, got {dc}"
            )));
        }
        if elements.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidSequence("non-finite element".into()));
        }
        Ok(Self { elements })
    }

    /// Rescale a nonzero tone vector to squared norm `L-1`, zeroing DC first.
    pub fn normalized(mut elements: Vec<Complex64>) -> Result<Self> {
        let len = elements.len();
        if len % 2 == 1 {
            elements[(len - 1) / 2] = Complex64::new(0.0, 0.0);
        }
        let norm = elements.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroSignal);
        }
        let scale = ((len as f64 - 1.0).max(0.0)).sqrt() / norm;
        Self::new(elements.into_iter().map(|c| c * scale).collect())
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Complex64> {
        self.elements
    }

    pub fn dc_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    /// Nominal power `P = L - 1`.
    pub fn nominal_power(&self) -> f64 {
        nominal_power(self.len())
    }

    pub fn energy(&self) -> f64 {
        self.elements.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Tone index relative to DC for 0-based element `k`.
    pub fn tone_offset(&self, k: usize) -> i64 {
        k as i64 - self.dc_index() as i64
    }

    /// Parse the `wakeform-seq v1` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let len = parse_header(header).map_err(|msg| Error::Parse { line: hline, msg })?;

        let mut elements = Vec::with_capacity(len);
        for (line, body) in lines {
            if body.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `<k> <re> <im>`, got {} fields", fields.len()),
                });
            }
            let k: usize = fields[0].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad index `{}`", fields[0]),
            })?;
            if k != elements.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected index {}, got {k}", elements.len()),
                });
            }
            if k >= len {
                return Err(Error::Parse {
                    line,
                    msg: format!("more than L={len} elements"),
                });
            }
            let re = parse_f64(fields[1], line)?;
            let im = parse_f64(fields[2], line)?;
            elements.push(Complex64::new(re, im));
        }
        if elements.len() != len {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declares L={len} but found {} elements", elements.len()),
            });
        }
        Self::new(elements)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# wakeform-seq v1 L={}\n", self.len());
        for (k, c) in self.elements.iter().enumerate() {
            let _ = writeln!(out, "{k} {} {}", fmt_component(c.re), fmt_component(c.im));
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn nominal_power(len: usize) -> f64 {
    len as f64 - 1.0
}

fn parse_header(header: &str) -> std::result::Result<usize, String> {
    let rest = header
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|h| h.strip_prefix("wakeform-seq"))
        .map(str::trim)
        .and_then(|h| h.strip_prefix("v1"))
        .map(str::trim)
        .ok_or_else(|| format!("bad header `{header}`"))?;
    let len = rest
        .strip_prefix("L=")
        .ok_or_else(|| format!("missing L= in header `{header}`"))?;
    len.parse()
        .map_err(|_| format!("bad sequence length `{len}`"))
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number `{field}`"),
    })
}

fn fmt_component(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Published optimized bit-0 sequences, as (magnitude, degrees) pairs at the
/// printed precision.
const TABLE1: [[(f64, f64); 15]; 4] = [
    [
        (0.117, 22.5),
        (0.375, 315.0),
        (0.784, 247.5),
        (1.221, 180.0),
        (1.480, 112.5),
        (1.367, 45.0),
        (0.826, 337.5),
        (0.0, 0.0),
        (0.826, 22.5),
        (1.367, 315.0),
        (1.480, 247.5),
        (1.221, 180.0),
        (0.784, 112.5),
        (0.375, 45.0),
        (0.117, 337.5),
    ],
    [
        (0.692, 266.19),
        (0.986, 211.15),
        (1.119, 157.37),
        (1.119, 115.63),
        (1.119, 80.70),
        (1.119, 34.18),
        (0.735, 337.50),
        (0.0, 0.0),
        (0.735, 22.50),
        (1.119, 304.18),
        (1.119, 215.70),
        (1.119, 115.63),
        (1.119, 22.37),
        (0.986, 301.15),
        (0.692, 221.19),
    ],
    [
        (0.031, 180.0),
        (0.171, 90.0),
        (0.509, 0.0),
        (1.023, 270.0),
        (1.489, 180.0),
        (1.557, 90.0),
        (1.011, 0.0),
        (0.0, 0.0),
        (1.011, 0.0),
        (1.557, 270.0),
        (1.489, 180.0),
        (1.023, 90.0),
        (0.509, 0.0),
        (0.171, 270.0),
        (0.031, 180.0),
    ],
    [
        (0.225, 50.42),
        (0.705, 324.83),
        (1.175, 242.64),
        (1.225, 170.47),
        (1.052, 122.68),
        (1.225, 74.16),
        (0.980, 0.0),
        (0.0, 0.0),
        (0.980, 0.0),
        (1.225, 254.16),
        (1.052, 122.68),
        (1.225, 350.47),
        (1.175, 242.64),
        (0.705, 144.83),
        (0.225, 50.42),
    ],
];

/// Active duration (µs) each reference sequence was optimized for.
pub fn table1_active_us(id: u32) -> Result<f64> {
    match id {
        1 | 2 => Ok(1.2),
        3 | 4 => Ok(1.6),
        other => Err(Error::UnknownTableId(other)),
    }
}

/// Load reference sequence `id` (1..=4), converted from polar to rectangular.
pub fn load_table1(id: u32) -> Result<Sequence> {
    let idx = match id {
        1..=4 => (id - 1) as usize,
        other => return Err(Error::UnknownTableId(other)),
    };
    let elements = TABLE1[idx]
        .iter()
        .map(|&(mag, deg)| {
            if mag == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(mag, deg.to_radians())
            }
        })
        .collect();
    Sequence::new(elements)
}
