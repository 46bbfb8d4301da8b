//! Self and mutual impedance of parallel (z-directed) thin-wire dipoles by the
//! induced-EMF method with sinusoidal current distributions.
//!
//! For a source dipole of half-length `h_p` carrying `I(z) = I_m sin k(h_p − |z|)`
//! the axial field at radial distance ρ and height z is
//!
//! ```text
//! E_z = −j η I_m / 4π · [ e^{−jkR₁}/R₁ + e^{−jkR₂}/R₂ − 2 cos(k h_p) e^{−jkR₀}/R₀ ]
//! ```
//!
//! and the impedance referred to the feed currents is
//! `Z_qp = −1/(I_p(0) I_q(0)) ∫ E_z I_q(z) dz` over the receiving wire. A
//! wire's own radius stands in for ρ on the self term; collinear wires use the
//! geometric mean of the two radii.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::Point3;
use crate::quadrature::{integrate, Tolerance};
use crate::{Error, Result, ETA0};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSpec {
    /// Feed point (wire center), meters.
    pub position: Point3,
    /// Total length, meters.
    pub length: f64,
    /// Wire radius, meters.
    pub radius: f64,
}

impl DipoleSpec {
    pub fn new(position: Point3, length: f64, radius: f64) -> Result<Self> {
        let d = Self {
            position,
            length,
            radius,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dipole length must be positive, got {}",
                self.length
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dipole radius must be positive, got {}",
                self.radius
            )));
        }
        if self.radius >= self.length / 10.0 {
            return Err(Error::InvalidArgument(format!(
                "thin-wire model needs radius < length/10 (radius {}, length {})",
                self.radius, self.length
            )));
        }
        if self.position.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("dipole position must be finite".into()));
        }
        Ok(())
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.length
    }

    /// Same wire moved to a new feed point.
    pub fn at(&self, position: Point3) -> Self {
        Self { position, ..*self }
    }
}

fn radial_and_axial(p: &DipoleSpec, q: &DipoleSpec) -> (f64, f64) {
    let dx = q.position[0] - p.position[0];
    let dy = q.position[1] - p.position[1];
    (dx.hypot(dy), q.position[2] - p.position[2])
}

fn check_overlap(p: &DipoleSpec, q: &DipoleSpec) -> Result<()> {
    if p == q {
        return Ok(());
    }
    let (rho, dz) = radial_and_axial(p, q);
    let touching_sideways = rho < p.radius + q.radius;
    let axial_overlap = dz.abs() < p.half_length() + q.half_length();
    if touching_sideways && axial_overlap {
        return Err(Error::OverlappingDipoles(format!(
            "radial gap {rho:.3e} m, axial offset {dz:.3e} m"
        )));
    }
    Ok(())
}

/// Impedance seen at the feed of `q` due to the current on `p` (ohms).
pub fn mutual_impedance(p: &DipoleSpec, q: &DipoleSpec, wavelength: f64) -> Result<Complex64> {
    mutual_impedance_with(p, q, wavelength, Tolerance::default())
}

pub fn mutual_impedance_with(
    p: &DipoleSpec,
    q: &DipoleSpec,
    wavelength: f64,
    tol: Tolerance,
) -> Result<Complex64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    p.validate()?;
    q.validate()?;
    check_overlap(p, q)?;

    let k = 2.0 * PI / wavelength;
    let (hp, hq) = (p.half_length(), q.half_length());
    let (sin_p, sin_q) = ((k * hp).sin(), (k * hq).sin());
    if sin_p.abs() < 1e-6 || sin_q.abs() < 1e-6 {
        return Err(Error::InvalidArgument(
            "dipole length is a whole number of wavelengths; feed current vanishes".into(),
        ));
    }

    let (rho, dz) = radial_and_axial(p, q);
    let rho = rho.max((p.radius * q.radius).sqrt());
    let rho2 = rho * rho;
    let two_cos = 2.0 * (k * hp).cos();

    let spherical = |r: f64| Complex64::cis(-k * r) / r;
    let kernel = |zq: f64| {
        let z = dz + zq;
        let r1 = (rho2 + (z - hp) * (z - hp)).sqrt();
        let r2 = (rho2 + (z + hp) * (z + hp)).sqrt();
        let r0 = (rho2 + z * z).sqrt();
        let field = spherical(r1) + spherical(r2) - spherical(r0) * two_cos;
        field * (k * (hq - zq.abs())).sin()
    };

    let breaks = [0.0, -dz, -dz - hp, -dz + hp];
    let integral = integrate(kernel, -hq, hq, &breaks, tol)?;
    let prefactor = Complex64::new(0.0, ETA0 / (4.0 * PI * sin_p * sin_q));
    Ok(prefactor * integral.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 1.0;

    fn half_wave(position: Point3) -> DipoleSpec {
        DipoleSpec::new(position, 0.5 * LAMBDA, LAMBDA / 1000.0).unwrap()
    }

    #[test]
    fn thin_wire_invariant() {
        assert!(DipoleSpec::new([0.0; 3], 0.5, 0.05).is_err());
        assert!(DipoleSpec::new([0.0; 3], 0.5, 0.0).is_err());
        assert!(DipoleSpec::new([0.0; 3], -0.5, 0.001).is_err());
        assert!(DipoleSpec::new([0.0; 3], 0.5, 0.049).is_ok());
    }

    #[test]
    fn half_wave_self_impedance_is_classical() {
        let d = half_wave([0.0; 3]);
        let z = mutual_impedance(&d, &d, LAMBDA).unwrap();
        assert_relative_eq!(z.re, 73.13, max_relative = 0.02);
        assert_relative_eq!(z.im, 42.5, max_relative = 0.02);
    }

    #[test]
    fn swap_is_reciprocal() {
        let p = DipoleSpec::new([0.0, 0.0, 0.0], 0.47, 0.002).unwrap();
        let q = DipoleSpec::new([0.3, 0.2, 0.61], 0.25, 0.004).unwrap();
        let a = mutual_impedance(&p, &q, LAMBDA).unwrap();
        let b = mutual_impedance(&q, &p, LAMBDA).unwrap();
        assert_relative_eq!((a - b).norm() / a.norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn side_by_side_coupling_decays() {
        let p = half_wave([0.0; 3]);
        let mags: Vec<f64> = [0.5, 1.0, 2.0, 10.0]
            .iter()
            .map(|&s| mutual_impedance(&p, &half_wave([s, 0.0, 0.0]), LAMBDA).unwrap().norm())
            .collect();
        assert!(mags.windows(2).all(|w| w[1] < w[0]), "{mags:?}");
        // far-field limit: η k l_e² / (4π d) with effective length λ/π
        let asymptote = ETA0 / (2.0 * PI * PI * 10.0);
        assert!((mags[3] - asymptote).abs() < 0.05 * asymptote, "{} vs {asymptote}", mags[3]);
    }

    #[test]
    fn overlapping_wires_rejected() {
        let p = half_wave([0.0; 3]);
        let q = half_wave([0.0, 0.0, 0.1]);
        assert!(matches!(
            mutual_impedance(&p, &q, LAMBDA),
            Err(Error::OverlappingDipoles(_))
        ));
        let longer = DipoleSpec::new([0.0; 3], 0.45, LAMBDA / 1000.0).unwrap();
        assert!(mutual_impedance(&p, &longer, LAMBDA).is_err());
    }

    #[test]
    fn collinear_neighbours_are_finite() {
        let p = half_wave([0.0; 3]);
        let q = half_wave([0.0, 0.0, 0.55]);
        let z = mutual_impedance(&p, &q, LAMBDA).unwrap();
        assert!(z.re.is_finite() && z.im.is_finite());
        assert!(z.norm() < 73.0);
    }

    #[test]
    fn full_wavelength_rejected() {
        let d = DipoleSpec::new([0.0; 3], 2.0, 0.001).unwrap();
        assert!(mutual_impedance(&d, &d, LAMBDA).is_err());
    }
}
