//! Planar array geometry and the angle convention shared by both channel models.
//!
//! The array lies in the x–z plane with outward normal +y. Both angles are
//! measured from the surface normal: `(0°, 0°)` is broadside, azimuth tilts
//! toward +x and elevation toward +z. Element `(m, n)` sits at `(m·d, 0, n·d)`
//! and is stored at flat index `m·n_z + n`, the order of `a_x ⊗ a_z`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SPEED_OF_LIGHT};

/// A point in space, meters.
pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub n_x: usize,
    pub n_z: usize,
    /// Element spacing over wavelength, `d/λ`.
    pub delta: f64,
    /// Meters.
    pub wavelength: f64,
}

impl ArrayLayout {
    pub fn new(n_x: usize, n_z: usize, delta: f64, wavelength: f64) -> Result<Self> {
        let layout = Self {
            n_x,
            n_z,
            delta,
            wavelength,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Layout at a given carrier frequency in Hz.
    pub fn at_frequency(n_x: usize, n_z: usize, delta: f64, frequency: f64) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "frequency must be positive, got {frequency}"
            )));
        }
        Self::new(n_x, n_z, delta, SPEED_OF_LIGHT / frequency)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_z == 0 {
            return Err(Error::InvalidArgument(format!(
                "array needs at least one element per axis, got {}x{}",
                self.n_x, self.n_z
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spacing ratio must be positive, got {}",
                self.delta
            )));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element spacing `d` in meters.
    pub fn spacing(&self) -> f64 {
        self.delta * self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Flat index of element `(m, n)`.
    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.n_z + n
    }

    /// Inverse of [`ArrayLayout::index`].
    #[inline]
    pub fn grid_position(&self, index: usize) -> (usize, usize) {
        (index / self.n_z, index % self.n_z)
    }

    /// Geometric center of the element grid.
    pub fn center(&self) -> Point3 {
        let d = self.spacing();
        [
            0.5 * (self.n_x - 1) as f64 * d,
            0.0,
            0.5 * (self.n_z - 1) as f64 * d,
        ]
    }

    /// Largest extent of the array (corner to corner), meters.
    pub fn aperture_diagonal(&self) -> f64 {
        let d = self.spacing();
        let lx = (self.n_x - 1) as f64 * d;
        let lz = (self.n_z - 1) as f64 * d;
        lx.hypot(lz)
    }
}

pub fn element_positions(layout: &ArrayLayout) -> Vec<Point3> {
    let d = layout.spacing();
    (0..layout.n_x)
        .flat_map(|m| (0..layout.n_z).map(move |n| [m as f64 * d, 0.0, n as f64 * d]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveDirection {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl PlaneWaveDirection {
    pub const BROADSIDE: PlaneWaveDirection = PlaneWaveDirection {
        azimuth_deg: 0.0,
        elevation_deg: 0.0,
    };

    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        let dir = Self {
            azimuth_deg,
            elevation_deg,
        };
        dir.validate()?;
        Ok(dir)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("azimuth", self.azimuth_deg),
            ("elevation", self.elevation_deg),
        ] {
            if !(v.is_finite() && (-90.0..=90.0).contains(&v)) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [-90, 90] degrees, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Unit vector pointing from the array toward this direction.
    pub fn unit_vector(&self) -> Point3 {
        let (az, el) = (self.azimuth_deg.to_radians(), self.elevation_deg.to_radians());
        [az.sin() * el.cos(), az.cos() * el.cos(), el.sin()]
    }

    /// Mirror reflection of an incidence direction about the surface normal.
    pub fn specular(&self) -> Self {
        Self {
            azimuth_deg: -self.azimuth_deg,
            elevation_deg: -self.elevation_deg,
        }
    }
}

/// Tangential direction cosines `(u_x, u_z)` of a validated direction.
pub fn direction_cosines(dir: &PlaneWaveDirection) -> Result<(f64, f64)> {
    dir.validate()?;
    let [ux, _, uz] = dir.unit_vector();
    Ok((ux, uz))
}
