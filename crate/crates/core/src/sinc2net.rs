//! Sinc-squared modulated kernels.
//!
//! Each filter is `h(t) = sinc²(B·t)·cos(2π·f_c·t)` with the normalised sinc
//! `sin(πx)/(πx)`. Its magnitude response is a triangle centred on `f_c` with
//! zeros at `f_c ± B`. Kernels are sampled on a symmetric grid of odd length
//! so that `t = 0` falls on the centre tap.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SincError {
    #[error("kernel length must be odd and positive, got {0}")]
    EvenLength(usize),
    #[error("sample rate must be positive, got {0}")]
    SampleRate(f64),
    #[error("bandwidth must be positive, got {0} Hz")]
    Bandwidth(f64),
    #[error("centre frequency {center_hz} Hz outside [0, {nyquist_hz}]")]
    Center { center_hz: f64, nyquist_hz: f64 },
    #[error("FFT size {n_fft} must be a power of two >= 4 x kernel length {length}")]
    FftSize { n_fft: usize, length: usize },
    #[error("cannot analyse an empty kernel")]
    EmptyKernel,
    #[error("band [{lo_hz}, {hi_hz}] Hz covers only {bins} DFT bins (need at least 8)")]
    DegenerateBand { lo_hz: f64, hi_hz: f64, bins: usize },
    #[error("need at least 2 filters, got {0}")]
    TooFewFilters(usize),
    #[error("mel range is empty: sample rate {0} Hz leaves no room above 30 Hz")]
    MelRange(f64),
    #[error("unknown window {0:?} (expected none or hamming)")]
    UnknownWindow(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hamming,
}

impl Window {
    /// Window value at `offset` taps from the centre of a kernel with
    /// `half = (length - 1) / 2`. Depends only on `|offset|`.
    fn at(self, offset: usize, half: usize) -> f64 {
        match self {
            Window::None => 1.0,
            Window::Hamming if half == 0 => 1.0,
            Window::Hamming => 0.54 + 0.46 * (PI * offset as f64 / half as f64).cos(),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Window::None => "none",
            Window::Hamming => "hamming",
        })
    }
}

impl FromStr for Window {
    type Err = SincError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Window::None),
            "hamming" => Ok(Window::Hamming),
            other => Err(SincError::UnknownWindow(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    length: usize,
    sample_rate_hz: f64,
    window: Window,
}

impl KernelConfig {
    pub fn new(length: usize, sample_rate_hz: f64, window: Window) -> Result<Self, SincError> {
        if length % 2 == 0 {
            return Err(SincError::EvenLength(length));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(SincError::SampleRate(sample_rate_hz));
        }
        Ok(KernelConfig {
            length,
            sample_rate_hz,
            window,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    pub fn window(&self) -> Window {
        self.window
    }

    fn half(&self) -> usize {
        (self.length - 1) / 2
    }

    /// Distance of tap `n` from the centre tap, in taps.
    fn offset(&self, n: usize) -> usize {
        n.abs_diff(self.half())
    }

    /// Sample time of tap `n` in seconds (negative left of centre).
    pub fn time_of(&self, n: usize) -> f64 {
        (n as f64 - self.half() as f64) / self.sample_rate_hz
    }
}

impl Default for KernelConfig {
    /// 129 taps at 16 kHz, unwindowed.
    fn default() -> Self {
        KernelConfig {
            length: 129,
            sample_rate_hz: 16_000.0,
            window: Window::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SincFilterParams {
    pub bandwidth_hz: f64,
    pub center_hz: f64,
}

impl SincFilterParams {
    pub fn new(bandwidth_hz: f64, center_hz: f64, cfg: &KernelConfig) -> Result<Self, SincError> {
        let p = SincFilterParams {
            bandwidth_hz,
            center_hz,
        };
        p.validate(cfg)?;
        Ok(p)
    }

    pub fn validate(&self, cfg: &KernelConfig) -> Result<(), SincError> {
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(SincError::Bandwidth(self.bandwidth_hz));
        }
        let nyquist_hz = cfg.nyquist_hz();
        if !(0.0..=nyquist_hz).contains(&self.center_hz) {
            return Err(SincError::Center {
                center_hz: self.center_hz,
                nyquist_hz,
            });
        }
        Ok(())
    }
}

/// Normalised sinc, `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

// Unwindowed h at |t| = t; no parameter validation (finite differences step
// outside the valid range at the edges).
fn kernel_value(bandwidth_hz: f64, center_hz: f64, t: f64) -> f64 {
    let s = sinc(bandwidth_hz * t);
    s * s * (2.0 * PI * center_hz * t).cos()
}

fn taps_unchecked(bandwidth_hz: f64, center_hz: f64, cfg: &KernelConfig) -> Vec<f64> {
    (0..cfg.length)
        .map(|n| {
            let offset = cfg.offset(n);
            let t = offset as f64 / cfg.sample_rate_hz;
            kernel_value(bandwidth_hz, center_hz, t) * cfg.window.at(offset, cfg.half())
        })
        .collect()
}

/// Samples the kernel for `p` on the grid of `cfg`.
pub fn synth_kernel(p: &SincFilterParams, cfg: &KernelConfig) -> Result<Vec<f64>, SincError> {
    p.validate(cfg)?;
    Ok(taps_unchecked(p.bandwidth_hz, p.center_hz, cfg))
}

/// Per-tap partial derivatives of the kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelGradients {
    pub d_bandwidth: Vec<f64>,
    pub d_center: Vec<f64>,
}

/// Analytical derivatives of every tap with respect to bandwidth and centre
/// frequency. The window does not depend on either parameter.
pub fn grad_params(p: &SincFilterParams, cfg: &KernelConfig) -> Result<KernelGradients, SincError> {
    p.validate(cfg)?;
    let (b, fc) = (p.bandwidth_hz, p.center_hz);
    let (d_bandwidth, d_center) = (0..cfg.length)
        .map(|n| {
            let offset = cfg.offset(n);
            let w = cfg.window.at(offset, cfg.half());
            if offset == 0 {
                return (0.0, 0.0);
            }
            let t = offset as f64 / cfg.sample_rate_hz;
            let s = sinc(b * t);
            let phase = 2.0 * PI * fc * t;
            let ds_db = ((PI * b * t).cos() - s) / b;
            let d_b = 2.0 * s * ds_db * phase.cos();
            let d_fc = -2.0 * PI * t * s * s * phase.sin();
            (d_b * w, d_fc * w)
        })
        .unzip();
    Ok(KernelGradients {
        d_bandwidth,
        d_center,
    })
}

/// Outcome of comparing [`grad_params`] with central differences of
/// [`synth_kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradCheck {
    pub bandwidth_rel_error: f64,
    pub center_rel_error: f64,
}

impl GradCheck {
    pub fn max_rel_error(&self) -> f64 {
        self.bandwidth_rel_error.max(self.center_rel_error)
    }
}

/// Central-difference derivative of every tap with respect to one parameter.
pub fn finite_difference(
    p: &SincFilterParams,
    cfg: &KernelConfig,
    param: Param,
    step: f64,
) -> Vec<f64> {
    let (mut plus, mut minus) = (*p, *p);
    match param {
        Param::Bandwidth => {
            plus.bandwidth_hz += step;
            minus.bandwidth_hz -= step;
        }
        Param::Center => {
            plus.center_hz += step;
            minus.center_hz -= step;
        }
    }
    let hi = taps_unchecked(plus.bandwidth_hz, plus.center_hz, cfg);
    let lo = taps_unchecked(minus.bandwidth_hz, minus.center_hz, cfg);
    hi.iter().zip(&lo).map(|(a, b)| (a - b) / (2.0 * step)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    Bandwidth,
    Center,
}

/// Max tap error relative to the largest finite-difference magnitude.
fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = analytic
        .iter()
        .zip(numeric)
        .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Checks [`grad_params`] against central differences with a step of
/// `rel_step` times each parameter's magnitude.
pub fn gradient_check(
    p: &SincFilterParams,
    cfg: &KernelConfig,
    rel_step: f64,
) -> Result<GradCheck, SincError> {
    let analytic = grad_params(p, cfg)?;
    let step_b = rel_step * p.bandwidth_hz;
    let step_fc = rel_step * p.center_hz.abs().max(1.0);
    let fd_b = finite_difference(p, cfg, Param::Bandwidth, step_b);
    let fd_fc = finite_difference(p, cfg, Param::Center, step_fc);
    Ok(GradCheck {
        bandwidth_rel_error: relative_error(&analytic.d_bandwidth, &fd_b),
        center_rel_error: relative_error(&analytic.d_center, &fd_fc),
    })
}

/// One-sided magnitude spectrum on `[0, nyquist]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub n_fft: usize,
    pub sample_rate_hz: f64,
    pub freqs_hz: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz / self.n_fft as f64
    }

    /// Frequency of the largest magnitude (lowest such bin on ties).
    pub fn peak_hz(&self) -> f64 {
        let (k, _) = self
            .magnitude
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| {
                if v > bv {
                    (k, v)
                } else {
                    (bk, bv)
                }
            });
        self.freqs_hz[k]
    }
}

/// Smallest FFT size accepted for a kernel of `length` taps.
pub fn min_fft_size(length: usize) -> usize {
    (4 * length).next_power_of_two()
}

/// Zero-padded DFT magnitude of `kernel`.
pub fn freq_response(
    kernel: &[f64],
    n_fft: usize,
    sample_rate_hz: f64,
) -> Result<Spectrum, SincError> {
    if kernel.is_empty() {
        return Err(SincError::EmptyKernel);
    }
    if !n_fft.is_power_of_two() || n_fft < 4 * kernel.len() {
        return Err(SincError::FftSize {
            n_fft,
            length: kernel.len(),
        });
    }
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(SincError::SampleRate(sample_rate_hz));
    }
    let mut buf: Vec<Complex<f64>> = kernel
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n_fft)
        .collect();
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);

    let bins = n_fft / 2 + 1;
    let bin_hz = sample_rate_hz / n_fft as f64;
    Ok(Spectrum {
        n_fft,
        sample_rate_hz,
        freqs_hz: (0..bins).map(|k| k as f64 * bin_hz).collect(),
        magnitude: buf[..bins].iter().map(|c| c.norm()).collect(),
    })
}

/// Ideal triangular magnitude: 1 at `f_c`, falling linearly to 0 at `f_c ± B`.
pub fn ideal_triangle(p: &SincFilterParams, f_hz: f64) -> f64 {
    (1.0 - (f_hz - p.center_hz).abs() / p.bandwidth_hz).max(0.0)
}

/// Normalised L2 distance between the measured magnitude and the ideal
/// triangle over `[f_c - B, f_c + B]` (clipped to `[0, nyquist]`). Both
/// curves are scaled to a unit peak on that band first.
pub fn triangle_fit_error(spectrum: &Spectrum, p: &SincFilterParams) -> Result<f64, SincError> {
    let nyquist = spectrum.sample_rate_hz / 2.0;
    let lo_hz = (p.center_hz - p.bandwidth_hz).max(0.0);
    let hi_hz = (p.center_hz + p.bandwidth_hz).min(nyquist);
    let band: Vec<usize> = spectrum
        .freqs_hz
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= lo_hz && f <= hi_hz)
        .map(|(k, _)| k)
        .collect();
    if band.len() < 8 {
        return Err(SincError::DegenerateBand {
            lo_hz,
            hi_hz,
            bins: band.len(),
        });
    }

    let measured: Vec<f64> = band.iter().map(|&k| spectrum.magnitude[k]).collect();
    let ideal: Vec<f64> = band
        .iter()
        .map(|&k| ideal_triangle(p, spectrum.freqs_hz[k]))
        .collect();
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(*x));
    let (pm, pi) = (peak(&measured), peak(&ideal));
    if pi == 0.0 {
        return Err(SincError::DegenerateBand {
            lo_hz,
            hi_hz,
            bins: 0,
        });
    }
    if pm == 0.0 {
        return Ok(1.0);
    }

    let (num, den) = measured
        .iter()
        .zip(&ideal)
        .fold((0.0, 0.0), |(num, den), (m, i)| {
            let (m, i) = (m / pm, i / pi);
            (num + (m - i) * (m - i), den + i * i)
        });
    Ok((num / den).sqrt())
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

pub const MEL_LOW_HZ: f64 = 30.0;
pub const MEL_TOP_MARGIN_HZ: f64 = 100.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FilterBankSpec {
    pub kernel: KernelConfig,
    pub filters: Vec<SincFilterParams>,
}

impl FilterBankSpec {
    pub fn new(kernel: KernelConfig, filters: Vec<SincFilterParams>) -> Result<Self, SincError> {
        for f in &filters {
            f.validate(&kernel)?;
        }
        Ok(FilterBankSpec { kernel, filters })
    }

    pub fn n_filters(&self) -> usize {
        self.filters.len()
    }

    /// One kernel per filter, in filter order.
    pub fn synth(&self) -> Vec<Vec<f64>> {
        self.filters
            .par_iter()
            .map(|p| taps_unchecked(p.bandwidth_hz, p.center_hz, &self.kernel))
            .collect()
    }
}

/// Mel-spaced bank: centres equally spaced in mel over
/// `[30 Hz, nyquist - 100 Hz]`, each bandwidth the gap to the next centre.
pub fn init_mel(n_filters: usize, cfg: &KernelConfig) -> Result<FilterBankSpec, SincError> {
    if n_filters < 2 {
        return Err(SincError::TooFewFilters(n_filters));
    }
    let top_hz = cfg.nyquist_hz() - MEL_TOP_MARGIN_HZ;
    if top_hz <= MEL_LOW_HZ {
        return Err(SincError::MelRange(cfg.sample_rate_hz));
    }
    let (lo, hi) = (hz_to_mel(MEL_LOW_HZ), hz_to_mel(top_hz));
    let step = (hi - lo) / (n_filters - 1) as f64;
    let centres: Vec<f64> = (0..n_filters)
        .map(|i| {
            // pin the endpoints so round-off cannot leave the range
            match i {
                0 => MEL_LOW_HZ,
                i if i == n_filters - 1 => top_hz,
                i => mel_to_hz(lo + step * i as f64),
            }
        })
        .collect();
    let filters = centres
        .iter()
        .enumerate()
        .map(|(i, &center_hz)| {
            let bandwidth_hz = if i + 1 < n_filters {
                centres[i + 1] - center_hz
            } else {
                center_hz - centres[i - 1]
            };
            SincFilterParams {
                bandwidth_hz,
                center_hz,
            }
        })
        .collect();
    FilterBankSpec::new(*cfg, filters)
}
