//! Closed-form load optimization for a RIS without mutual coupling, and its
//! projection onto a varactor's capacitance range.
//!
//! With a diagonal `Z_SS`, write `D_n = Z_SS(n,n) + Z_RIS(n,n) = R_n + jY_n`,
//! `R_n = R₀ + Re Z_SS(n,n)`. Then `1/D_n = (1 + e^{jψ_n}) / 2R_n` with
//! `e^{jψ_n} = D̄_n / D_n`, so
//!
//! ```text
//! H / y₀ = b − Σ a_n e^{jψ_n},   a_n = z_ST(n) z_RS(n) / 2|R_n|,   b = Z_RT − Σ a_n
//! ```
//!
//! `|H|` is largest when every `a_n e^{jψ_n}` points along `−b`, i.e.
//! `ψ_n = ∠b − ∠a_n + π`, and the load follows as `2|R_n|/(1 + e^{jψ_n}) − Z_SS(n,n)`.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conventional::wrap_phase;
use crate::impedance::ImpedanceSet;
use crate::load::{reactance_to_capacitance, LoadModel};
use crate::{Error, Result};

/// Below this `|1 + e^{jψ}|` the optimal load is treated as an open circuit.
const UNBOUNDED_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerCoefficients {
    a: Vec<Complex64>,
    b: Complex64,
}

impl OptimizerCoefficients {
    /// Checks `b = z_rt − Σ a_n` to a relative 1e-12.
    pub fn new(a: Vec<Complex64>, b: Complex64, z_rt: Complex64) -> Result<Self> {
        let expected = z_rt - a.iter().sum::<Complex64>();
        let scale = expected.norm().max(a.iter().map(|a| a.norm()).sum::<f64>()).max(f64::MIN_POSITIVE);
        if (expected - b).norm() > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "b = {b} is inconsistent with z_rt − Σa = {expected}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Target re-radiation phases `ψ_n`.
    pub fn target_phases(&self) -> Vec<f64> {
        let arg_b = self.b.arg();
        self.a
            .iter()
            .map(|a| wrap_phase(arg_b - a.arg() + PI))
            .collect()
    }
}

pub fn compute_coefficients(imps: &ImpedanceSet, r0: f64) -> Result<OptimizerCoefficients> {
    imps.validate()?;
    if !imps.is_diagonal() {
        return Err(Error::NonDiagonalCoupling(
            "Z_SS has non-zero mutual impedances".into(),
        ));
    }
    let a = imps
        .self_impedances()
        .iter()
        .zip(imps.z_st.iter().zip(&imps.z_rs))
        .enumerate()
        .map(|(n, (zss, (st, rs)))| {
            let denom = 2.0 * (r0 + zss.re).abs();
            if denom == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "element {n}: R0 + Re Z_SS vanishes"
                )));
            }
            Ok(st * rs / denom)
        })
        .collect::<Result<Vec<_>>>()?;
    let b = imps.z_rt - a.iter().sum::<Complex64>();
    Ok(OptimizerCoefficients { a, b })
}

/// Coefficients from the self impedances alone, warning when mutual
/// coupling is being discarded.
pub fn compute_coefficients_neglecting_coupling(imps: &ImpedanceSet, r0: f64) -> Result<OptimizerCoefficients> {
    if imps.is_diagonal() {
        compute_coefficients(imps, r0)
    } else {
        warn!("optimizer assumes negligible mutual coupling; using the diagonal of Z_SS");
        compute_coefficients(&imps.to_diagonal(), r0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadTarget {
    Finite(Complex64),
    /// Open circuit; only reachable as a limit, left to quantization.
    Unbounded,
}

impl LoadTarget {
    pub fn reactance(&self) -> f64 {
        match self {
            LoadTarget::Finite(z) => z.im,
            LoadTarget::Unbounded => f64::INFINITY,
        }
    }

    /// Concrete impedance, with open circuits replaced by `r0 + j·open_reactance`.
    pub fn realize(&self, r0: f64, open_reactance: f64) -> Complex64 {
        match self {
            LoadTarget::Finite(z) => *z,
            LoadTarget::Unbounded => Complex64::new(r0, open_reactance),
        }
    }
}

pub fn optimal_loads(coeffs: &OptimizerCoefficients, r0: f64, z_ss_diag: &[Complex64]) -> Result<Vec<LoadTarget>> {
    if z_ss_diag.len() != coeffs.a.len() {
        return Err(Error::DimensionMismatch {
            expected: coeffs.a.len(),
            got: z_ss_diag.len(),
        });
    }
    Ok(coeffs
        .target_phases()
        .iter()
        .zip(z_ss_diag)
        .map(|(&psi, zss)| {
            let denom = Complex64::new(1.0, 0.0) + Complex64::cis(psi);
            if denom.norm() < UNBOUNDED_EPS {
                LoadTarget::Unbounded
            } else {
                LoadTarget::Finite(2.0 * (r0 + zss.re).abs() / denom - zss)
            }
        })
        .collect())
}

/// How an unconstrained optimal load is mapped into `[c_min, c_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacitanceRule {
    /// Clip the target reactance to the nearer realizable one.
    NearestReactance,
    /// Pick the capacitance whose re-radiation phase `ψ` is angularly
    /// closest to the target phase. Identical to `NearestReactance` for
    /// realizable targets.
    NearestPhase,
}

/// Re-radiation phase `ψ = −2∠D` of an element with total impedance `D`.
pub fn reradiation_phase(total: Complex64) -> f64 {
    wrap_phase(-2.0 * total.arg())
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(std::f64::consts::TAU - d)
}

pub fn quantize_loads(
    targets: &[LoadTarget],
    z_ss_diag: &[Complex64],
    model: &LoadModel,
    frequency: f64,
    rule: CapacitanceRule,
) -> Result<Vec<f64>> {
    if targets.len() != z_ss_diag.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            got: z_ss_diag.len(),
        });
    }
    targets
        .iter()
        .zip(z_ss_diag)
        .map(|(target, zss)| {
            let x = target.reactance();
            let nearest = if x.is_finite() {
                reactance_to_capacitance(x, model, frequency)?
            } else {
                model.c_max
            };
            if rule == CapacitanceRule::NearestReactance {
                return Ok(nearest);
            }
            let (x_lo, x_hi) = model.reactance_range(frequency);
            if x.is_finite() && (x_lo..=x_hi).contains(&x) {
                return Ok(nearest);
            }
            let r = model.r0 + zss.re;
            let psi_target = match target {
                LoadTarget::Finite(z) => reradiation_phase(Complex64::new(r, zss.im + z.im)),
                LoadTarget::Unbounded => PI,
            };
            let psi_of = |xl: f64| reradiation_phase(Complex64::new(r, zss.im + xl));
            Ok(
                if angular_distance(psi_of(x_lo), psi_target) < angular_distance(psi_of(x_hi), psi_target) {
                    model.c_min
                } else {
                    model.c_max
                },
            )
        })
        .collect()
}
