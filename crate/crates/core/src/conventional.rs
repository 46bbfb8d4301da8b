//! Phase-shift channel model: `y = hᴴ Φ g x + n` with planar steering vectors.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{direction_cosines, ArrayLayout, PlaneWaveDirection};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelLink {
    pub gains: Vec<Complex64>,
    /// Linear power gain γ.
    pub pathloss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfiguration {
    /// Radians in `[0, 2π)`.
    pub phases: Vec<f64>,
}

impl PhaseConfiguration {
    pub fn new(phases: Vec<f64>) -> Self {
        Self {
            phases: phases.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// `true` if every phase is one of the 1-bit states `{0, π}`.
    pub fn is_binary(&self) -> bool {
        self.phases.iter().all(|&p| p == 0.0 || p == PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedSignalModel {
    pub transmit_symbol: Complex64,
    /// σ_n², linear.
    pub noise_power: f64,
}

impl ReceivedSignalModel {
    pub fn new(transmit_symbol: Complex64, noise_power: f64) -> Result<Self> {
        if !(noise_power >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise power must be non-negative, got {noise_power}"
            )));
        }
        Ok(Self {
            transmit_symbol,
            noise_power,
        })
    }

    /// Linear SNR for a given end-to-end gain. Infinite when noiseless.
    pub fn snr(&self, gain: Complex64) -> f64 {
        (gain * self.transmit_symbol).norm_sqr() / self.noise_power
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneBitMode {
    /// Snap each continuous optimum to the closer of `{0, π}`.
    Nearest,
    /// Exact binary optimum by sweeping a half-plane boundary.
    Sweep,
}

pub(crate) fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// 2D array response `a_x(θ) ⊗ a_z(φ)` in Kronecker (x-major) order.
pub fn steering_vector(layout: &ArrayLayout, dir: &PlaneWaveDirection) -> Result<Vec<Complex64>> {
    layout.validate()?;
    let (ux, uz) = direction_cosines(dir)?;
    let step = TAU * layout.delta;
    Ok((0..layout.n_x)
        .flat_map(|m| {
            (0..layout.n_z).map(move |n| Complex64::from_polar(1.0, step * (m as f64 * ux + n as f64 * uz)))
        })
        .collect())
}

/// TX→RIS link `g` and RIS→RX link `h`.
///
/// `h` carries the conjugate departure response so that `hᴴ` is the physical
/// re-radiation row `a(aod)ᵀ` of the far-field convention used by the
/// pattern module.
pub fn build_channels(
    layout: &ArrayLayout,
    aoa: &PlaneWaveDirection,
    aod: &PlaneWaveDirection,
    gamma_g: f64,
    gamma_h: f64,
) -> Result<(ChannelLink, ChannelLink)> {
    for (name, gamma) in [("gamma_g", gamma_g), ("gamma_h", gamma_h)] {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive, got {gamma}"
            )));
        }
    }
    let g_scale = gamma_g.sqrt();
    let h_scale = gamma_h.sqrt();
    let g = steering_vector(layout, aoa)?
        .into_iter()
        .map(|a| a * g_scale)
        .collect();
    let h = steering_vector(layout, aod)?
        .into_iter()
        .map(|a| a.conj() * h_scale)
        .collect();
    Ok((
        ChannelLink {
            gains: g,
            pathloss: gamma_g,
        },
        ChannelLink {
            gains: h,
            pathloss: gamma_h,
        },
    ))
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Noiseless gain `hᴴ Φ g` for a unit transmit symbol.
pub fn received_gain(h: &[Complex64], g: &[Complex64], config: &PhaseConfiguration) -> Result<Complex64> {
    check_len(h.len(), g.len())?;
    check_len(h.len(), config.len())?;
    Ok(h.iter()
        .zip(g)
        .zip(&config.phases)
        .map(|((h, g), &phi)| h.conj() * Complex64::cis(phi) * g)
        .sum())
}

fn cascade(g: &[Complex64], h: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(g.len(), h.len())?;
    g.iter()
        .zip(h)
        .enumerate()
        .map(|(index, (g, h))| {
            if g.norm() == 0.0 || h.norm() == 0.0 {
                Err(Error::ZeroChannelEntry { index })
            } else {
                Ok(h.conj() * g)
            }
        })
        .collect()
}

/// Continuous phases that co-phase every term of `hᴴ Φ g`: `φ_n = ∠h_n − ∠g_n`.
pub fn optimal_phases(g: &[Complex64], h: &[Complex64]) -> Result<PhaseConfiguration> {
    let c = cascade(g, h)?;
    Ok(PhaseConfiguration::new(c.iter().map(|c| -c.arg()).collect()))
}

/// 1-bit configuration with phases in `{0, π}`.
pub fn quantize_1bit(g: &[Complex64], h: &[Complex64], mode: OneBitMode) -> Result<PhaseConfiguration> {
    let c = cascade(g, h)?;
    let signs = match mode {
        OneBitMode::Nearest => c
            .iter()
            // nearer to π than to 0 exactly when cos(φ*) < 0, φ* = −∠c
            .map(|c| if c.re < 0.0 { -1.0 } else { 1.0 })
            .collect(),
        OneBitMode::Sweep => best_binary_signs(&c),
    };
    Ok(signs_to_phases(&signs))
}

pub(crate) fn signs_to_phases(signs: &[f64]) -> PhaseConfiguration {
    PhaseConfiguration {
        phases: signs.iter().map(|&s| if s < 0.0 { PI } else { 0.0 }).collect(),
    }
}

/// Maximizes `|Σ s_n c_n|` over `s ∈ {±1}ᴺ`.
///
/// The optimum is `s_n = sign Re(c_n e^{-jα})` for some direction α; the sign
/// pattern only changes where α crosses `∠c_n ± π/2`, so one evaluation per
/// arc between consecutive boundaries covers every candidate.
pub(crate) fn best_binary_signs(c: &[Complex64]) -> Vec<f64> {
    if c.is_empty() {
        return Vec::new();
    }
    let mut boundaries: Vec<f64> = c
        .iter()
        .flat_map(|c| {
            let a = c.arg();
            [wrap_phase(a + PI / 2.0), wrap_phase(a - PI / 2.0)]
        })
        .collect();
    boundaries.sort_by(f64::total_cmp);

    let signs_at = |alpha: f64| -> Vec<f64> {
        let dir = Complex64::cis(-alpha);
        c.iter()
            .map(|c| if (c * dir).re >= 0.0 { 1.0 } else { -1.0 })
            .collect()
    };
    let value = |s: &[f64]| -> f64 { s.iter().zip(c).map(|(s, c)| c * s).sum::<Complex64>().norm() };

    let mut best = signs_at(0.0);
    let mut best_value = value(&best);
    let k = boundaries.len();
    for i in 0..k {
        let lo = boundaries[i];
        let hi = if i + 1 < k { boundaries[i + 1] } else { boundaries[0] + TAU };
        let s = signs_at(0.5 * (lo + hi));
        let v = value(&s);
        if v > best_value {
            best_value = v;
            best = s;
        }
    }
    best
}
