//! Oscillation periods of the linear entropy: predicted from the vibronic
//! level structure and observed in a sampled series.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{VibronicBasisSet, VibronicCoefficients};
use crate::units::HBAR;

/// Levels with |c| at or below this are ignored by the period prediction.
pub const AMPLITUDE_THRESHOLD: f64 = 1e-4;
/// At most this many levels per channel enter the quadruple enumeration.
pub const MAX_LEVELS: usize = 32;
/// Shortest series accepted by [`spectral_peaks`].
pub const MIN_SERIES_LEN: usize = 64;
/// Peaks must exceed this multiple of the median spectral magnitude.
pub const PEAK_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedPeriod {
    /// Beat energy |(E_v − E_v') − (E_w − E_w')|.
    pub delta_e: f64,
    /// 2πħ/ΔE
    pub period: f64,
    /// Summed |c_v c_v' c_w c_w'| |S_vw S_v'w'| over the contributing quadruples.
    pub weight: f64,
    pub quadruples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodPrediction {
    /// Sorted by decreasing weight.
    pub periods: Vec<PredictedPeriod>,
    /// Weight of the ΔE = 0 terms (the constant part of the overlaps).
    pub background: f64,
}

fn dominant_levels(c: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c.len()).filter(|&v| c[v].norm() > AMPLITUDE_THRESHOLD).collect();
    idx.sort_by(|&a, &b| c[b].norm().total_cmp(&c[a].norm()));
    idx.truncate(MAX_LEVELS);
    idx.sort_unstable();
    idx
}

/// Beat frequencies of |⟨ψ_α|ψ_β⟩|² under field-free evolution.
pub fn predict_periods(c: &VibronicCoefficients, bases: &VibronicBasisSet) -> PeriodPrediction {
    let mut raw: Vec<(f64, f64)> = Vec::new();
    let mut scale = 0.0f64;
    for a in 0..c.n_channels() {
        scale = bases.energies(a).iter().fold(scale, |s, e| s.max(e.abs()));
    }
    let zero_tol = 1e-12 * scale.max(1e-300);
    let mut background = 0.0;
    for a in 0..c.n_channels() {
        for b in a + 1..c.n_channels() {
            let la = dominant_levels(c.channel(a));
            let lb = dominant_levels(c.channel(b));
            let ea = bases.energies(a);
            let eb = bases.energies(b);
            let s = bases.overlap(a, b);
            // (v, w) and (v', w') index the two overlap factors
            let pairs: Vec<(usize, usize, f64)> = la
                .iter()
                .flat_map(|&v| lb.iter().map(move |&w| (v, w)))
                .map(|(v, w)| (v, w, c.get(a, v).norm() * c.get(b, w).norm() * s[(v, w)].abs()))
                .filter(|p| p.2 > 0.0)
                .collect();
            for (i, &(v, w, x)) in pairs.iter().enumerate() {
                for &(v2, w2, y) in &pairs[i + 1..] {
                    let de = ((ea[v] - ea[v2]) - (eb[w] - eb[w2])).abs();
                    let weight = 2.0 * x * y;
                    if de <= zero_tol {
                        background += weight;
                    } else {
                        raw.push((de, weight));
                    }
                }
                background += x * x;
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut periods: Vec<PredictedPeriod> = Vec::new();
    for (de, w) in raw {
        match periods.last_mut() {
            Some(last) if (de - last.delta_e).abs() <= 1e-9 * de => {
                last.weight += w;
                last.quadruples += 1;
            }
            _ => periods.push(PredictedPeriod {
                delta_e: de,
                period: 2.0 * PI * HBAR / de,
                weight: w,
                quadruples: 1,
            }),
        }
    }
    periods.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    PeriodPrediction { periods, background }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub frequency: f64,
    pub period: f64,
    /// Amplitude of the equivalent cosine, corrected for the window gain.
    pub amplitude: f64,
    /// Bin index before sub-bin refinement.
    pub bin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub window: String,
    /// Bin width 1/(N Δt).
    pub resolution: f64,
    /// Sorted by decreasing amplitude.
    pub peaks: Vec<SpectralPeak>,
}

/// Uniform sample spacing, or an error naming the offending interval.
pub fn sample_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: times.len(),
            min: 2,
        });
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-6 * h.abs() {
            return Err(Error::NonuniformSampling(format!(
                "interval {i} is {:e}, mean spacing is {h:e}",
                w[1] - w[0]
            )));
        }
    }
    Ok(h)
}

/// Peaks of the Hann-windowed magnitude spectrum of the mean-subtracted series.
pub fn spectral_peaks(times: &[f64], values: &[f64]) -> Result<Spectrum> {
    assert_eq!(times.len(), values.len(), "times and values differ in length");
    let n = values.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: n,
            min: MIN_SERIES_LEN,
        });
    }
    let h = sample_spacing(times)?;
    let mean = values.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect();
    let gain: f64 = window.iter().sum();
    let mut buf: Vec<Complex64> = values
        .iter()
        .zip(&window)
        .map(|(v, w)| Complex64::new((v - mean) * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let mag: Vec<f64> = buf[..=half].iter().map(|z| z.norm()).collect();
    let mut sorted = mag[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (PEAK_FACTOR * median).max(1e-9 * scale * gain);
    let resolution = 1.0 / (n as f64 * h);
    let mut peaks = Vec::new();
    for k in 1..half {
        let (l, m, r) = (mag[k - 1], mag[k], mag[k + 1]);
        if !(m > l && m >= r && m > floor) {
            continue;
        }
        let denom = l - 2.0 * m + r;
        let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
        let top = m - 0.25 * (l - r) * shift;
        let frequency = (k as f64 + shift) * resolution;
        peaks.push(SpectralPeak {
            frequency,
            period: 1.0 / frequency,
            amplitude: 2.0 * top / gain,
            bin: k,
        });
    }
    peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    Ok(Spectrum {
        window: "hann".into(),
        resolution,
        peaks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub min: f64,
    pub max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// Exact extrema of sampled values (first occurrence wins ties).
pub fn extremes(times: &[f64], values: &[f64]) -> Result<Extremes> {
    if values.is_empty() || times.len() != values.len() {
        return Err(Error::SeriesTooShort {
            len: values.len().min(times.len()),
            min: 1,
        });
    }
    let mut e = Extremes {
        min: values[0],
        max: values[0],
        t_min: times[0],
        t_max: times[0],
    };
    for (&t, &v) in times.iter().zip(values) {
        if v < e.min {
            e.min = v;
            e.t_min = t;
        }
        if v > e.max {
            e.max = v;
            e.t_max = t;
        }
    }
    Ok(e)
}

/// Predicted and observed oscillations of L(t) over an analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub window_start: f64,
    pub window_end: f64,
    pub predicted: Vec<PredictedPeriod>,
    pub background: f64,
    /// None when the window holds fewer than the minimum number of samples.
    pub spectrum: Option<Spectrum>,
    pub linear_entropy: Extremes,
}

impl OscillationReport {
    /// `times`/`values` must already be restricted to the window.
    pub fn new(
        times: &[f64],
        values: &[f64],
        prediction: Option<PeriodPrediction>,
    ) -> Result<Self> {
        let linear_entropy = extremes(times, values)?;
        let spectrum = match spectral_peaks(times, values) {
            Ok(s) => Some(s),
            Err(Error::SeriesTooShort { .. }) => None,
            Err(e) => return Err(e),
        };
        let (predicted, background) = match prediction {
            Some(p) => (p.periods, p.background),
            None => (Vec::new(), 0.0),
        };
        Ok(OscillationReport {
            window_start: times[0],
            window_end: times[times.len() - 1],
            predicted,
            background,
            spectrum,
            linear_entropy,
        })
    }

    /// Observed peaks farther than one bin (in frequency) from every
    /// predicted period of weight above `min_weight`.
    pub fn unexplained_peaks(&self, min_weight: f64) -> Vec<SpectralPeak> {
        let Some(spec) = &self.spectrum else {
            return Vec::new();
        };
        spec.peaks
            .iter()
            .filter(|p| {
                !self.predicted.iter().any(|q| {
                    q.weight > min_weight && (1.0 / q.period - p.frequency).abs() <= spec.resolution
                })
            })
            .copied()
            .collect()
    }
}
