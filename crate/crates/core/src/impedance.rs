//! End-to-end channel of a loaded-dipole RIS expressed through self and mutual
//! impedances:
//!
//! ```text
//! H = y₀ [ Z_RT − z_RS (Z_SS + Z_RIS)⁻¹ z_ST ]
//! ```
//!
//! With matched loads (`Z_RIS = Z₀ I`) the RIS still scatters; that residual
//! is the structural-scattering channel.

use std::collections::HashMap;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dipole::{mutual_impedance, DipoleSpec};
use crate::geometry::{element_positions, ArrayLayout, PlaneWaveDirection};
use crate::linalg::{CMatrix, CVector, Factorization};
use crate::{Error, Result};

pub const DEFAULT_Z0: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Every self and mutual impedance among the cells.
    Full,
    /// Self impedances only; mutual coupling neglected.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceSet {
    pub z_ss: CMatrix,
    pub z_st: Vec<Complex64>,
    pub z_rs: Vec<Complex64>,
    pub z_rt: Complex64,
    /// Reference impedance, ohms.
    pub z0: f64,
    pub y0: Complex64,
}

impl ImpedanceSet {
    pub fn len(&self) -> usize {
        self.z_st.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_st.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.z_st.len();
        if self.z_ss.nrows() != n || self.z_ss.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.z_ss.nrows(),
            });
        }
        if self.z_rs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.z_rs.len(),
            });
        }
        Ok(())
    }

    pub fn self_impedances(&self) -> Vec<Complex64> {
        self.z_ss.diagonal().iter().copied().collect()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.z_ss[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    /// Copy with the off-diagonal entries of `Z_SS` removed.
    pub fn to_diagonal(&self) -> Self {
        let diag = CVector::from_vec(self.self_impedances());
        Self {
            z_ss: CMatrix::from_diagonal(&diag),
            ..self.clone()
        }
    }

    /// Relabels cells so that new cell `i` is old cell `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.len();
        Self {
            z_ss: CMatrix::from_fn(n, n, |i, j| self.z_ss[(perm[i], perm[j])]),
            z_st: perm.iter().map(|&p| self.z_st[p]).collect(),
            z_rs: perm.iter().map(|&p| self.z_rs[p]).collect(),
            ..self.clone()
        }
    }
}

/// The RIS cells and their coupling matrix, independent of TX and RX.
#[derive(Debug, Clone)]
pub struct Surface {
    pub layout: ArrayLayout,
    pub cells: Vec<DipoleSpec>,
    pub z_ss: CMatrix,
    pub coupling: Coupling,
}

impl Surface {
    /// Places a copy of `template` at every element position (offset by the
    /// template's own position) and fills `Z_SS`.
    pub fn new(layout: &ArrayLayout, template: &DipoleSpec, coupling: Coupling) -> Result<Self> {
        layout.validate()?;
        template.validate()?;
        let origin = template.position;
        let cells: Vec<DipoleSpec> = element_positions(layout)
            .into_iter()
            .map(|p| template.at([p[0] + origin[0], p[1] + origin[1], p[2] + origin[2]]))
            .collect();

        // identical cells on a grid: Z_SS depends only on |Δm|, |Δn|
        let offsets: Vec<(usize, usize)> = match coupling {
            Coupling::Full => (0..layout.n_x)
                .flat_map(|dm| (0..layout.n_z).map(move |dn| (dm, dn)))
                .collect(),
            Coupling::Diagonal => vec![(0, 0)],
        };
        let lambda = layout.wavelength;
        let values: Vec<((usize, usize), Complex64)> = offsets
            .par_iter()
            .map(|&(dm, dn)| {
                let z = mutual_impedance(&cells[0], &cells[layout.index(dm, dn)], lambda)?;
                Ok(((dm, dn), z))
            })
            .collect::<Result<_>>()?;
        let table: HashMap<(usize, usize), Complex64> = values.into_iter().collect();

        let n = layout.len();
        let z_ss = CMatrix::from_fn(n, n, |i, j| {
            let (mi, ni) = layout.grid_position(i);
            let (mj, nj) = layout.grid_position(j);
            let key = (mi.abs_diff(mj), ni.abs_diff(nj));
            match coupling {
                Coupling::Diagonal if i != j => Complex64::new(0.0, 0.0),
                _ => table[&key],
            }
        });
        Ok(Self {
            layout: *layout,
            cells,
            z_ss,
            coupling,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn center(&self) -> [f64; 3] {
        let c = self.layout.center();
        let o = self.cells[0].position;
        [c[0] + o[0], c[1] + o[1], c[2] + o[2]]
    }

    /// Fraunhofer distance of the aperture (cells included).
    pub fn far_field_distance(&self) -> f64 {
        let extent = self.layout.aperture_diagonal().max(self.cells[0].length);
        2.0 * extent * extent / self.layout.wavelength
    }

    /// A dipole like `template` placed `distance` meters from the surface
    /// center along `dir`.
    pub fn remote_dipole(&self, template: &DipoleSpec, dir: &PlaneWaveDirection, distance: f64) -> Result<DipoleSpec> {
        dir.validate()?;
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "link distance must be positive, got {distance}"
            )));
        }
        let c = self.center();
        let u = dir.unit_vector();
        let d = template.at([c[0] + distance * u[0], c[1] + distance * u[1], c[2] + distance * u[2]]);
        d.validate()?;
        Ok(d)
    }

    /// Mutual impedances between an external dipole and every cell.
    pub fn link_vector(&self, remote: &DipoleSpec) -> Result<Vec<Complex64>> {
        let dist = {
            let c = self.center();
            let p = remote.position;
            ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
        };
        let limit = self.far_field_distance();
        if dist < limit {
            warn!("dipole at {dist:.3} m is inside the RIS far-field distance {limit:.3} m");
        }
        self.cells
            .par_iter()
            .map(|cell| mutual_impedance(remote, cell, self.layout.wavelength))
            .collect()
    }

    pub fn impedance_set(&self, tx: &DipoleSpec, rx: &DipoleSpec) -> Result<ImpedanceSet> {
        Ok(ImpedanceSet {
            z_ss: self.z_ss.clone(),
            z_st: self.link_vector(tx)?,
            z_rs: self.link_vector(rx)?,
            z_rt: Complex64::new(0.0, 0.0),
            z0: DEFAULT_Z0,
            y0: Complex64::new(1.0, 0.0),
        })
    }
}

/// Full impedance description of TX → RIS → RX with the direct link blocked.
pub fn assemble_impedance_set(
    layout: &ArrayLayout,
    tx: &DipoleSpec,
    rx: &DipoleSpec,
    ris_dipole_template: &DipoleSpec,
    coupling: Coupling,
) -> Result<ImpedanceSet> {
    Surface::new(layout, ris_dipole_template, coupling)?.impedance_set(tx, rx)
}

/// `(Z_SS + diag(loads))⁻¹ z_ST` by LU solve.
pub(crate) fn loaded_response(imps: &ImpedanceSet, loads: &[Complex64]) -> Result<CVector> {
    imps.validate()?;
    if loads.len() != imps.len() {
        return Err(Error::DimensionMismatch {
            expected: imps.len(),
            got: loads.len(),
        });
    }
    let mut system = imps.z_ss.clone();
    for (i, l) in loads.iter().enumerate() {
        system[(i, i)] += l;
    }
    let factors = Factorization::new(&system)?;
    factors.solve(&CVector::from_column_slice(&imps.z_st))
}

fn scattered(imps: &ImpedanceSet, loads: &[Complex64]) -> Result<Complex64> {
    let x = loaded_response(imps, loads)?;
    Ok(imps.z_rs.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
}

/// `y₀ (Z_RT − z_RS (Z_SS + Z_RIS)⁻¹ z_ST)` for a diagonal load matrix given
/// by its diagonal.
pub fn end_to_end_channel(imps: &ImpedanceSet, loads: &[Complex64]) -> Result<Complex64> {
    Ok(imps.y0 * (imps.z_rt - scattered(imps, loads)?))
}

/// `−y₀ z_RS (Z_SS + Z₀ I)⁻¹ z_ST`.
pub fn structural_scattering_channel(imps: &ImpedanceSet) -> Result<Complex64> {
    let matched = vec![Complex64::new(imps.z0, 0.0); imps.len()];
    Ok(-imps.y0 * scattered(imps, &matched)?)
}
