//! Series RLC model of a unit-cell load and its inverse map onto a bounded
//! capacitance range.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadModel {
    /// Series resistance R₀, ohms.
    pub r0: f64,
    /// Series inductance, henries.
    pub inductance: f64,
    /// Capacitance bounds, farads.
    pub c_min: f64,
    pub c_max: f64,
    /// Fixed series reactance of the rest of the cell's load network, ohms.
    /// Zero reduces the model to the bare RLC circuit.
    #[serde(default)]
    pub series_reactance: f64,
}

impl LoadModel {
    pub fn new(r0: f64, inductance: f64, c_min: f64, c_max: f64) -> Result<Self> {
        let m = Self {
            r0,
            inductance,
            c_min,
            c_max,
            series_reactance: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_series_reactance(mut self, x: f64) -> Self {
        self.series_reactance = x;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r0 >= 0.0) {
            return Err(Error::InvalidArgument(format!("r0 must be >= 0, got {}", self.r0)));
        }
        if !(self.inductance.is_finite() && self.inductance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "inductance must be >= 0, got {}",
                self.inductance
            )));
        }
        if !(self.c_min.is_finite() && self.c_min > 0.0) {
            return Err(Error::InvalidArgument(format!("c_min must be > 0, got {}", self.c_min)));
        }
        if !(self.c_max.is_finite() && self.c_max > self.c_min) {
            return Err(Error::InvalidArgument(format!(
                "c_max must exceed c_min ({} <= {})",
                self.c_max, self.c_min
            )));
        }
        if !self.series_reactance.is_finite() {
            return Err(Error::InvalidArgument("series reactance must be finite".into()));
        }
        Ok(())
    }

    /// Reactance realized at capacitance `c`.
    pub fn reactance(&self, c: f64, frequency: f64) -> f64 {
        let w = TAU * frequency;
        self.series_reactance + w * self.inductance - 1.0 / (w * c)
    }

    /// Realizable reactance interval `[X(c_min), X(c_max)]`.
    pub fn reactance_range(&self, frequency: f64) -> (f64, f64) {
        (self.reactance(self.c_min, frequency), self.reactance(self.c_max, frequency))
    }
}

/// `R₀ + j(2πfL − 1/(2πfC))`, plus the model's fixed series reactance.
pub fn load_impedance_rlc(c: f64, model: &LoadModel, frequency: f64) -> Result<Complex64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("capacitance must be positive, got {c}")));
    }
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "frequency must be positive, got {frequency}"
        )));
    }
    Ok(Complex64::new(model.r0, model.reactance(c, frequency)))
}

/// Capacitance realizing `x_target`, clipped to `[c_min, c_max]`.
///
/// When no positive capacitance realizes the target (it is more inductive
/// than `C → ∞` allows), the bound with the nearer realized reactance wins.
pub fn reactance_to_capacitance(x_target: f64, model: &LoadModel, frequency: f64) -> Result<f64> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "frequency must be positive, got {frequency}"
        )));
    }
    let w = TAU * frequency;
    let denom = w * (model.series_reactance + w * model.inductance - x_target);
    if denom > 0.0 {
        return Ok((1.0 / denom).clamp(model.c_min, model.c_max));
    }
    let (x_lo, x_hi) = model.reactance_range(frequency);
    Ok(if (x_lo - x_target).abs() < (x_hi - x_target).abs() {
        model.c_min
    } else {
        model.c_max
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const F: f64 = 26.168e9;

    fn table() -> LoadModel {
        LoadModel::new(5.2, 30e-12, 0.025e-12, 0.03e-12).unwrap()
    }

    // independent evaluation of the RLC formula
    fn x_of(c: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * F;
        w * 30e-12 - 1.0 / (w * c)
    }

    #[test]
    fn table_bounds_realize_expected_reactances() {
        let m = table();
        let z = load_impedance_rlc(0.025e-12, &m, F).unwrap();
        assert_abs_diff_eq!(z.re, 5.2);
        assert_abs_diff_eq!(z.im, -238.35, epsilon = 0.01);
        let z = load_impedance_rlc(0.03e-12, &m, F).unwrap();
        assert_abs_diff_eq!(z.im, -197.81, epsilon = 0.01);
        assert_abs_diff_eq!(z.im, x_of(0.03e-12), epsilon = 1e-9);
    }

    #[test]
    fn degenerate_rlc_is_pure_resistance() {
        let m = LoadModel::new(5.2, 0.0, 1e-12, 1e300).unwrap();
        let z = load_impedance_rlc(1e300, &m, F).unwrap();
        assert_eq!(z, Complex64::new(5.2, 0.0));
    }

    #[test]
    fn rlc_rejects_non_positive_inputs() {
        let m = table();
        assert!(load_impedance_rlc(0.0, &m, F).is_err());
        assert!(load_impedance_rlc(1e-13, &m, -1.0).is_err());
    }

    #[test]
    fn inversion_inside_range() {
        let c = reactance_to_capacitance(-220.0, &table(), F).unwrap();
        assert_abs_diff_eq!(c * 1e12, 0.02704, epsilon = 1e-5);
        assert_abs_diff_eq!(x_of(c), -220.0, epsilon = 1e-9);
    }

    #[test]
    fn inversion_clips_low() {
        let w = 2.0 * std::f64::consts::PI * F;
        let unclipped = 1.0 / (w * (w * 30e-12 + 300.0));
        assert_abs_diff_eq!(unclipped * 1e12, 0.01995, epsilon = 1e-5);
        let c = reactance_to_capacitance(-300.0, &table(), F).unwrap();
        assert_eq!(c, 0.025e-12);
        assert_abs_diff_eq!(x_of(c), -238.35, epsilon = 0.01);
    }

    #[test]
    fn inversion_clips_high() {
        assert_eq!(reactance_to_capacitance(0.0, &table(), F).unwrap(), 0.03e-12);
        // beyond the C → ∞ asymptote the upper bound is still the nearer one
        assert_eq!(reactance_to_capacitance(1e4, &table(), F).unwrap(), 0.03e-12);
    }

    #[test]
    fn degenerate_range_rejected() {
        assert!(LoadModel::new(5.2, 30e-12, 0.03e-12, 0.03e-12).is_err());
        assert!(LoadModel::new(-1.0, 30e-12, 0.01e-12, 0.03e-12).is_err());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_on_realizable_branch(t in 0.0f64..=1.0, xs in -500.0f64..500.0) {
            let m = table().with_series_reactance(xs);
            let (lo, hi) = m.reactance_range(F);
            let x = lo + t * (hi - lo);
            let c = reactance_to_capacitance(x, &m, F).unwrap();
            let z = load_impedance_rlc(c, &m, F).unwrap();
            proptest::prop_assert!((z.im - x).abs() < 1e-6);
        }

        #[test]
        fn clipping_is_idempotent_and_monotone(x1 in -1000.0f64..1000.0, x2 in -1000.0f64..1000.0) {
            let m = table();
            let c1 = reactance_to_capacitance(x1, &m, F).unwrap();
            let again = reactance_to_capacitance(m.reactance(c1, F), &m, F).unwrap();
            proptest::prop_assert!((again - c1).abs() <= 1e-12 * c1);
            let c2 = reactance_to_capacitance(x2, &m, F).unwrap();
            if x1 <= x2 {
                proptest::prop_assert!(c1 <= c2);
            }
        }
    }
}
