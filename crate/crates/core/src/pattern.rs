//! Far-field re-radiation of the induced cell currents over an angular grid,
//! and lobe bookkeeping on the resulting map.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{ArrayLayout, PlaneWaveDirection};
use crate::impedance::{loaded_response, ImpedanceSet};
use crate::linalg::CVector;
use crate::{Error, Result};

/// Floor applied to `20 log10 |·|` so every grid value stays finite.
pub const FLOOR_DB: f64 = -400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub step_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            azimuth_min_deg: -90.0,
            azimuth_max_deg: 90.0,
            elevation_min_deg: -90.0,
            elevation_max_deg: 90.0,
            step_deg: 1.0,
        }
    }
}

fn axis_samples(lo: f64, hi: f64, step: f64, name: &str) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && -90.0 <= lo && lo <= hi && hi <= 90.0) {
        return Err(Error::InvalidArgument(format!(
            "{name} range [{lo}, {hi}] must be ordered inside [-90, 90]"
        )));
    }
    let count = (hi - lo) / step;
    let rounded = count.round();
    if (count - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} does not divide the {name} range [{lo}, {hi}]"
        )));
    }
    Ok((0..=rounded as usize).map(|i| lo + i as f64 * step).collect())
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.axes().map(|_| ())
    }

    /// Azimuth and elevation samples.
    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(self.step_deg.is_finite() && self.step_deg > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {}",
                self.step_deg
            )));
        }
        Ok((
            axis_samples(self.azimuth_min_deg, self.azimuth_max_deg, self.step_deg, "azimuth")?,
            axis_samples(self.elevation_min_deg, self.elevation_max_deg, self.step_deg, "elevation")?,
        ))
    }
}

/// Scattered power in dB relative to `reference_db`, stored row-major with
/// elevation as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternGrid {
    pub azimuths_deg: Vec<f64>,
    pub elevations_deg: Vec<f64>,
    pub values_db: Vec<f64>,
    pub reference_db: f64,
}

impl PatternGrid {
    pub fn new(azimuths_deg: Vec<f64>, elevations_deg: Vec<f64>, values_db: Vec<f64>, reference_db: f64) -> Result<Self> {
        if azimuths_deg.is_empty() || elevations_deg.is_empty() {
            return Err(Error::InvalidArgument("empty pattern grid".into()));
        }
        if values_db.len() != azimuths_deg.len() * elevations_deg.len() {
            return Err(Error::DimensionMismatch {
                expected: azimuths_deg.len() * elevations_deg.len(),
                got: values_db.len(),
            });
        }
        if values_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("pattern values must be finite".into()));
        }
        Ok(Self {
            azimuths_deg,
            elevations_deg,
            values_db,
            reference_db,
        })
    }

    pub fn value(&self, az_index: usize, el_index: usize) -> f64 {
        self.values_db[el_index * self.azimuths_deg.len() + az_index]
    }

    /// Grid maximum and its location.
    pub fn peak(&self) -> (PlaneWaveDirection, f64) {
        let (i, v) = self
            .values_db
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let na = self.azimuths_deg.len();
        (
            PlaneWaveDirection {
                azimuth_deg: self.azimuths_deg[i % na],
                elevation_deg: self.elevations_deg[i / na],
            },
            v,
        )
    }

    /// Same map against a different reference level.
    pub fn rereferenced(&self, reference_db: f64) -> Self {
        let shift = self.reference_db - reference_db;
        Self {
            values_db: self.values_db.iter().map(|v| v + shift).collect(),
            reference_db,
            ..self.clone()
        }
    }

    fn step(&self, axis: &[f64]) -> f64 {
        if axis.len() > 1 {
            axis[1] - axis[0]
        } else {
            0.0
        }
    }

    pub fn azimuth_step(&self) -> f64 {
        self.step(&self.azimuths_deg)
    }

    pub fn elevation_step(&self) -> f64 {
        self.step(&self.elevations_deg)
    }
}

/// Cell currents for a unit TX feed current: `−(Z_SS + Z_RIS)⁻¹ z_ST`.
pub fn induced_currents(imps: &ImpedanceSet, loads: &[Complex64]) -> Result<Vec<Complex64>> {
    let x: CVector = loaded_response(imps, loads)?;
    Ok(x.iter().map(|v| -v).collect())
}

/// `20 log10 |Σ_n i_n e^{jk p_n·k̂}|` over the grid, before referencing.
fn raw_pattern(currents: &[Complex64], layout: &ArrayLayout, az: &[f64], el: &[f64]) -> Result<Vec<f64>> {
    if currents.len() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            got: currents.len(),
        });
    }
    let kd = layout.wavenumber() * layout.spacing();
    let (n_x, n_z) = (layout.n_x, layout.n_z);
    let points: Vec<(f64, f64)> = el
        .iter()
        .flat_map(|&e| az.iter().map(move |&a| (a, e)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(a, e)| {
            let u = PlaneWaveDirection {
                azimuth_deg: a,
                elevation_deg: e,
            }
            .unit_vector();
            // separable phase: e^{jkd(m u_x + n u_z)}
            let px: Vec<Complex64> = (0..n_x).map(|m| Complex64::cis(kd * m as f64 * u[0])).collect();
            let pz: Vec<Complex64> = (0..n_z).map(|n| Complex64::cis(kd * n as f64 * u[2])).collect();
            let mut sum = Complex64::new(0.0, 0.0);
            for (m, wx) in px.iter().enumerate() {
                let row = &currents[m * n_z..(m + 1) * n_z];
                let inner: Complex64 = row.iter().zip(&pz).map(|(i, wz)| i * wz).sum();
                sum += inner * wx;
            }
            to_db(sum.norm())
        })
        .collect())
}

pub(crate) fn to_db(amplitude: f64) -> f64 {
    if amplitude > 0.0 {
        (20.0 * amplitude.log10()).max(FLOOR_DB)
    } else {
        FLOOR_DB
    }
}

/// Grid maximum of the raw pattern in dB, used as a normalization reference.
pub fn pattern_peak_db(currents: &[Complex64], layout: &ArrayLayout, grid: &GridSpec) -> Result<f64> {
    let (az, el) = grid.axes()?;
    Ok(raw_pattern(currents, layout, &az, &el)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn scattered_pattern(
    currents: &[Complex64],
    layout: &ArrayLayout,
    grid: &GridSpec,
    reference_db: f64,
) -> Result<PatternGrid> {
    let (az, el) = grid.axes()?;
    let raw = raw_pattern(currents, layout, &az, &el)?;
    let values = raw.into_iter().map(|v| v - reference_db).collect();
    PatternGrid::new(az, el, values, reference_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub direction: PlaneWaveDirection,
    pub level_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorLobe {
    pub direction: PlaneWaveDirection,
    pub level_db: f64,
    pub present: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LobeReport {
    pub intended: Lobe,
    pub specular: Lobe,
    pub mirror: MirrorLobe,
    pub gap_structural_minus_intended: f64,
}

/// Where to look for each lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedLobes {
    pub intended: PlaneWaveDirection,
    pub specular: PlaneWaveDirection,
    pub mirror: PlaneWaveDirection,
}

impl ExpectedLobes {
    /// Intended lobe at the departure direction, structural lobe at the
    /// specular image of the incidence, and the 1-bit mirror lobe at the
    /// departure direction reflected through broadside.
    pub fn for_link(aoa: &PlaneWaveDirection, aod: &PlaneWaveDirection) -> Self {
        Self {
            intended: *aod,
            specular: aoa.specular(),
            mirror: aod.specular(),
        }
    }
}

/// Mirror lobes within this many dB of the intended lobe count as present.
pub const MIRROR_PRESENT_DB: f64 = 3.0;

fn window_max(grid: &PatternGrid, center: &PlaneWaveDirection, window_deg: f64) -> Result<Lobe> {
    let az = &grid.azimuths_deg;
    let el = &grid.elevations_deg;
    let inside = |v: f64, axis: &[f64]| v >= axis[0] - 1e-9 && v <= axis[axis.len() - 1] + 1e-9;
    if !inside(center.azimuth_deg, az) || !inside(center.elevation_deg, el) {
        return Err(Error::InvalidArgument(format!(
            "lobe window centered at ({}, {}) lies outside the grid",
            center.azimuth_deg, center.elevation_deg
        )));
    }
    let tol = 1e-9;
    let mut best: Option<Lobe> = None;
    for (j, &e) in el.iter().enumerate() {
        if (e - center.elevation_deg).abs() > window_deg + tol {
            continue;
        }
        for (i, &a) in az.iter().enumerate() {
            if (a - center.azimuth_deg).abs() > window_deg + tol {
                continue;
            }
            let v = grid.value(i, j);
            if best.map_or(true, |b| v > b.level_db) {
                best = Some(Lobe {
                    direction: PlaneWaveDirection {
                        azimuth_deg: a,
                        elevation_deg: e,
                    },
                    level_db: v,
                });
            }
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("lobe window contains no grid samples".into()))
}

pub fn detect_lobes(grid: &PatternGrid, expected: &ExpectedLobes, window_deg: f64) -> Result<LobeReport> {
    if !(window_deg.is_finite() && window_deg >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lobe window must be non-negative, got {window_deg}"
        )));
    }
    let intended = window_max(grid, &expected.intended, window_deg)?;
    let specular = window_max(grid, &expected.specular, window_deg)?;
    let mirror = window_max(grid, &expected.mirror, window_deg)?;
    Ok(LobeReport {
        intended,
        specular,
        mirror: MirrorLobe {
            direction: mirror.direction,
            level_db: mirror.level_db,
            present: mirror.level_db >= intended.level_db - MIRROR_PRESENT_DB,
        },
        gap_structural_minus_intended: specular.level_db - intended.level_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dir(a: f64, e: f64) -> PlaneWaveDirection {
        PlaneWaveDirection::new(a, e).unwrap()
    }

    fn synthetic(f: impl Fn(f64, f64) -> f64) -> PatternGrid {
        let (az, el) = GridSpec::default().axes().unwrap();
        let values = el.iter().flat_map(|&e| az.iter().map(move |&a| (a, e))).map(|(a, e)| f(a, e)).collect();
        PatternGrid::new(az, el, values, 0.0).unwrap()
    }

    #[test]
    fn single_element_is_isotropic() {
        let layout = ArrayLayout::new(1, 1, 0.5, 0.01).unwrap();
        let p = scattered_pattern(&[Complex64::new(0.3, -0.2)], &layout, &GridSpec::default(), 0.0).unwrap();
        let first = p.values_db[0];
        assert!(p.values_db.iter().all(|v| (v - first).abs() < 1e-12));
    }

    #[test]
    fn uniform_aperture_first_sidelobe() {
        let layout = ArrayLayout::new(64, 1, 0.5, 0.01).unwrap();
        let grid = GridSpec {
            azimuth_min_deg: -90.0,
            azimuth_max_deg: 90.0,
            elevation_min_deg: 0.0,
            elevation_max_deg: 0.0,
            step_deg: 0.01,
        };
        let currents = vec![Complex64::new(1.0, 0.0); 64];
        let p = scattered_pattern(&currents, &layout, &grid, 0.0).unwrap();
        let (peak_dir, peak) = p.peak();
        assert_abs_diff_eq!(peak_dir.azimuth_deg, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(peak, 20.0 * 64f64.log10(), epsilon = 1e-9);
        // first sidelobe: largest local maximum off the main beam
        let v = &p.values_db;
        let side = (1..v.len() - 1)
            .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1] && p.azimuths_deg[i].abs() > 2.0)
            .map(|i| v[i])
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(side - peak, -13.26, epsilon = 0.05);
    }

    #[test]
    fn conjugate_phasing_steers_the_peak() {
        let layout = ArrayLayout::new(20, 20, 0.5, 0.01).unwrap();
        let target = dir(45.0, 0.0);
        let a = crate::conventional::steering_vector(&layout, &target).unwrap();
        let currents: Vec<Complex64> = a.iter().map(|v| v.conj()).collect();
        let p = scattered_pattern(&currents, &layout, &GridSpec::default(), 0.0).unwrap();
        let (d, _) = p.peak();
        assert!((d.azimuth_deg - 45.0).abs() <= 1.0 && d.elevation_deg.abs() <= 1.0, "{d:?}");
    }

    #[test]
    fn peak_respects_triangle_bound() {
        let layout = ArrayLayout::new(4, 3, 0.5, 0.01).unwrap();
        let currents: Vec<Complex64> = (0..12).map(|i| Complex64::from_polar(1.0 + i as f64, 0.7 * i as f64)).collect();
        let p = scattered_pattern(&currents, &layout, &GridSpec::default(), 3.0).unwrap();
        let bound = 20.0 * currents.iter().map(|c| c.norm()).sum::<f64>().log10() - 3.0;
        assert!(p.peak().1 <= bound + 1e-9);
    }

    #[test]
    fn grid_validation() {
        let bad = GridSpec {
            step_deg: 7.0,
            ..GridSpec::default()
        };
        assert!(bad.validate().is_err());
        assert!(GridSpec { step_deg: 0.0, ..GridSpec::default() }.validate().is_err());
        assert!(PatternGrid::new(vec![], vec![0.0], vec![], 0.0).is_err());
    }

    #[test]
    fn analytic_peak_recovered() {
        let g = synthetic(|a, e| -((a - 30.0).powi(2) + e * e) / 50.0);
        let expected = ExpectedLobes {
            intended: dir(32.0, 1.0),
            specular: dir(0.0, 0.0),
            mirror: dir(-30.0, 0.0),
        };
        let r = detect_lobes(&g, &expected, 5.0).unwrap();
        assert_abs_diff_eq!(r.intended.direction.azimuth_deg, 30.0, epsilon = 1.0);
        assert_abs_diff_eq!(r.intended.direction.elevation_deg, 0.0, epsilon = 1.0);
    }

    #[test]
    fn flat_grid_marks_mirror_present() {
        let g = synthetic(|_, _| -7.0);
        let r = detect_lobes(&g, &ExpectedLobes::for_link(&dir(0.0, 0.0), &dir(45.0, 0.0)), 5.0).unwrap();
        assert_eq!(r.intended.level_db, -7.0);
        assert_eq!(r.specular.level_db, -7.0);
        assert!(r.mirror.present);
        assert_eq!(r.gap_structural_minus_intended, 0.0);
    }

    #[test]
    fn weak_mirror_marked_absent() {
        let g = synthetic(|a, e| {
            let bump = |c: f64| (-((a - c).powi(2) + e * e) / 4.0).exp();
            10.0 * (bump(45.0) + 0.25 * bump(-45.0) + 1e-6).log10()
        });
        let r = detect_lobes(&g, &ExpectedLobes::for_link(&dir(0.0, 0.0), &dir(45.0, 0.0)), 5.0).unwrap();
        assert_abs_diff_eq!(r.intended.level_db - r.mirror.level_db, 6.02, epsilon = 0.01);
        assert!(!r.mirror.present);
    }

    #[test]
    fn window_outside_grid_rejected() {
        let (az, el) = GridSpec {
            azimuth_min_deg: -10.0,
            azimuth_max_deg: 10.0,
            elevation_min_deg: -10.0,
            elevation_max_deg: 10.0,
            step_deg: 1.0,
        }
        .axes()
        .unwrap();
        let n = az.len() * el.len();
        let g = PatternGrid::new(az, el, vec![0.0; n], 0.0).unwrap();
        let far = ExpectedLobes::for_link(&dir(0.0, 0.0), &dir(45.0, 0.0));
        assert!(detect_lobes(&g, &far, 5.0).is_err());
    }
}
