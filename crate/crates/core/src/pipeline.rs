//! End-to-end scenario runs: optimize under the selected channel model,
//! evaluate on the fully coupled dipole surrogate, write artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conventional::{build_channels, optimal_phases, quantize_1bit, received_gain, OneBitMode, PhaseConfiguration};
use crate::dipole::DipoleSpec;
use crate::geometry::{ArrayLayout, PlaneWaveDirection};
use crate::impedance::{end_to_end_channel, structural_scattering_channel, ImpedanceSet, Surface};
use crate::load::{load_impedance_rlc, LoadModel};
use crate::optimizer::{
    compute_coefficients_neglecting_coupling, optimal_loads, quantize_loads, reradiation_phase, CapacitanceRule,
    LoadTarget,
};
use crate::pattern::{
    detect_lobes, induced_currents, pattern_peak_db, scattered_pattern, ExpectedLobes, LobeReport, PatternGrid,
};
use crate::scenario::{BitZeroState, ChannelModel, Quantization, ScenarioConfig, SeriesReactance};
use crate::{Error, Result};

/// Open circuits are realized as `r0 + j·OPEN_CIRCUIT_SCALE·z0`.
pub const OPEN_CIRCUIT_SCALE: f64 = 1e12;

/// Per-element control state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RisConfiguration {
    /// Continuous phases in radians.
    Phases(Vec<f64>),
    /// Binary diode states; `true` is the `π` state.
    BinaryStates(Vec<bool>),
    Capacitances(Vec<f64>),
    Loads(Vec<Complex64>),
}

impl RisConfiguration {
    pub fn len(&self) -> usize {
        match self {
            RisConfiguration::Phases(v) => v.len(),
            RisConfiguration::BinaryStates(v) => v.len(),
            RisConfiguration::Capacitances(v) => v.len(),
            RisConfiguration::Loads(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn from_binary_phases(config: &PhaseConfiguration) -> Self {
        RisConfiguration::BinaryStates(
            config
                .phases
                .iter()
                .map(|p| (p - std::f64::consts::PI).abs() < 1e-9)
                .collect(),
        )
    }
}

/// Load whose re-radiation phase `ψ = −2∠(z_nn + load)` equals `phase`, with
/// real part `r0`.
pub fn phase_to_load_target(phase: f64, r0: f64, z_nn: Complex64) -> LoadTarget {
    let r = r0 + z_nn.re;
    let denom = Complex64::new(1.0, 0.0) + Complex64::cis(phase);
    if denom.norm() < 1e-12 {
        LoadTarget::Unbounded
    } else {
        LoadTarget::Finite(2.0 * r / denom - z_nn)
    }
}

/// Everything fixed by a scenario before a configuration is chosen.
#[derive(Debug, Clone)]
pub struct Scene {
    pub config: ScenarioConfig,
    pub layout: ArrayLayout,
    pub surface: Surface,
    pub cell: DipoleSpec,
    pub link_distance: f64,
    pub imps: ImpedanceSet,
    /// Load model with the series reactance resolved.
    pub load_model: LoadModel,
    pub g: Vec<Complex64>,
    pub h: Vec<Complex64>,
    pub reference_db: f64,
}

/// Series reactance that puts the isolated cell at resonance for the
/// midpoint of the realizable reactance range.
pub fn auto_series_reactance(z_self: Complex64, model: &LoadModel, frequency: f64) -> f64 {
    let bare = LoadModel {
        series_reactance: 0.0,
        ..*model
    };
    let (lo, hi) = bare.reactance_range(frequency);
    -z_self.im - 0.5 * (lo + hi)
}

impl Scene {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let layout = config.array_layout()?;
        let lambda = layout.wavelength;
        let phys = &config.physics;
        let cell = DipoleSpec::new([0.0; 3], phys.dipole_length_wl * lambda, phys.dipole_radius_wl * lambda)?;
        let surface = Surface::new(&layout, &cell, config.coupling)?;
        let link_distance = phys
            .link_distance_m
            .unwrap_or_else(|| 2.0 * surface.far_field_distance());
        let tx = surface.remote_dipole(&cell, &config.aoa, link_distance)?;
        let rx = surface.remote_dipole(&cell, &config.aod, link_distance)?;
        let mut imps = surface.impedance_set(&tx, &rx)?;
        imps.z0 = phys.z0_ohm;
        imps.y0 = Complex64::new(phys.y0_re, phys.y0_im);

        let bare = config.load_model()?;
        let z_self = surface.z_ss[(0, 0)];
        let series = match phys.series_reactance_ohm {
            SeriesReactance::Fixed(x) => x,
            SeriesReactance::Auto(_) => auto_series_reactance(z_self, &bare, config.frequency_hz),
        };
        let load_model = bare.with_series_reactance(series);
        load_model.validate()?;

        let (g, h) = build_channels(
            &layout,
            &config.aoa,
            &config.aod,
            config.pathloss.gamma_g,
            config.pathloss.gamma_h,
        )?;

        // matched loads, broadside incidence
        let broadside_tx = if config.aoa == PlaneWaveDirection::BROADSIDE {
            imps.z_st.clone()
        } else {
            let t = surface.remote_dipole(&cell, &PlaneWaveDirection::BROADSIDE, link_distance)?;
            surface.link_vector(&t)?
        };
        let reference_imps = ImpedanceSet {
            z_st: broadside_tx,
            ..imps.clone()
        };
        let matched = vec![Complex64::new(imps.z0, 0.0); layout.len()];
        let currents = induced_currents(&reference_imps, &matched)?;
        let reference_db = pattern_peak_db(&currents, &layout, &config.grid.spec())?;

        Ok(Self {
            config: config.clone(),
            layout,
            surface,
            cell,
            link_distance,
            imps,
            load_model,
            g: g.gains,
            h: h.gains,
            reference_db,
        })
    }

    pub fn self_impedances(&self) -> Vec<Complex64> {
        self.imps.self_impedances()
    }

    fn open_circuit(&self) -> Complex64 {
        Complex64::new(self.load_model.r0, OPEN_CIRCUIT_SCALE * self.imps.z0)
    }

    fn capacitance_for_state(&self, pi_state: bool) -> f64 {
        let zero = match self.config.physics.one_bit_zero_state {
            BitZeroState::CMax => self.load_model.c_max,
            BitZeroState::CMin => self.load_model.c_min,
        };
        let other = if zero == self.load_model.c_max {
            self.load_model.c_min
        } else {
            self.load_model.c_max
        };
        if pi_state {
            other
        } else {
            zero
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.layout.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.len(),
                got: n,
            });
        }
        Ok(())
    }

    /// Complex load per element for a configuration.
    pub fn loads_for(&self, config: &RisConfiguration) -> Result<Vec<Complex64>> {
        self.check_len(config.len())?;
        let f = self.config.frequency_hz;
        match config {
            RisConfiguration::Phases(p) => Ok(p
                .iter()
                .zip(self.self_impedances())
                .map(|(&phi, z)| phase_to_load_target(phi, self.load_model.r0, z).realize(self.load_model.r0, self.open_circuit().im))
                .collect()),
            RisConfiguration::BinaryStates(s) => s
                .iter()
                .map(|&b| load_impedance_rlc(self.capacitance_for_state(b), &self.load_model, f))
                .collect(),
            RisConfiguration::Capacitances(c) => c.iter().map(|&c| load_impedance_rlc(c, &self.load_model, f)).collect(),
            RisConfiguration::Loads(l) => Ok(l.clone()),
        }
    }

    /// Equivalent re-radiation phases of a set of loads.
    pub fn equivalent_phases(&self, loads: &[Complex64]) -> Vec<f64> {
        loads
            .iter()
            .zip(self.self_impedances())
            .map(|(l, z)| reradiation_phase(z + l))
            .collect()
    }

    fn rule(&self) -> CapacitanceRule {
        self.config.physics.capacitance_rule
    }

    /// Runs the scenario's optimizer and quantizer.
    pub fn optimize(&self) -> Result<Optimized> {
        let cfg = &self.config;
        let f = cfg.frequency_hz;
        let z_diag = self.self_impedances();
        let r0 = self.load_model.r0;
        let (configuration, capacitances, optimizer) = match cfg.model {
            ChannelModel::Conventional => {
                let optimizer = "conventional_phase_alignment";
                match cfg.quantization {
                    Quantization::Ideal => {
                        let p = optimal_phases(&self.g, &self.h)?;
                        (RisConfiguration::Phases(p.phases), None, optimizer)
                    }
                    Quantization::OneBitNearest | Quantization::OneBitSweep => {
                        let mode = if cfg.quantization == Quantization::OneBitNearest {
                            OneBitMode::Nearest
                        } else {
                            OneBitMode::Sweep
                        };
                        let p = quantize_1bit(&self.g, &self.h, mode)?;
                        let states = RisConfiguration::from_binary_phases(&p);
                        let caps = match &states {
                            RisConfiguration::BinaryStates(s) => s.iter().map(|&b| self.capacitance_for_state(b)).collect(),
                            _ => unreachable!(),
                        };
                        (states, Some(caps), optimizer)
                    }
                    Quantization::CapacitanceRange => {
                        let p = optimal_phases(&self.g, &self.h)?;
                        let targets: Vec<LoadTarget> = p
                            .phases
                            .iter()
                            .zip(&z_diag)
                            .map(|(&phi, &z)| phase_to_load_target(phi, r0, z))
                            .collect();
                        let caps = quantize_loads(&targets, &z_diag, &self.load_model, f, self.rule())?;
                        (RisConfiguration::Capacitances(caps.clone()), Some(caps), optimizer)
                    }
                }
            }
            ChannelModel::Impedance => {
                let optimizer = "impedance_closed_form";
                let coeffs = compute_coefficients_neglecting_coupling(&self.imps, r0)?;
                let targets = optimal_loads(&coeffs, r0, &z_diag)?;
                match cfg.quantization {
                    Quantization::Ideal => {
                        let open = self.open_circuit().im;
                        let loads = targets.iter().map(|t| t.realize(r0, open)).collect();
                        (RisConfiguration::Loads(loads), None, optimizer)
                    }
                    Quantization::CapacitanceRange => {
                        let caps = quantize_loads(&targets, &z_diag, &self.load_model, f, self.rule())?;
                        (RisConfiguration::Capacitances(caps.clone()), Some(caps), optimizer)
                    }
                    Quantization::OneBitNearest | Quantization::OneBitSweep => {
                        return Err(Error::InvalidArgument(
                            "binary quantizers apply to the conventional model only".into(),
                        ))
                    }
                }
            }
        };
        let loads = self.loads_for(&configuration)?;
        let phases = match &configuration {
            RisConfiguration::Phases(p) => p.clone(),
            RisConfiguration::BinaryStates(s) => s.iter().map(|&b| if b { std::f64::consts::PI } else { 0.0 }).collect(),
            _ => self.equivalent_phases(&loads),
        };
        let quantizer = match cfg.quantization {
            Quantization::CapacitanceRange => format!(
                "capacitance_range:{}",
                match self.rule() {
                    CapacitanceRule::NearestPhase => "nearest_phase",
                    CapacitanceRule::NearestReactance => "nearest_reactance",
                }
            ),
            q => q.as_str().to_string(),
        };
        Ok(Optimized {
            configuration,
            phases,
            capacitances,
            loads,
            optimizer: optimizer.to_string(),
            quantizer,
        })
    }

    pub fn evaluate_loads(&self, loads: &[Complex64]) -> Result<Evaluation> {
        self.check_len(loads.len())?;
        let currents = induced_currents(&self.imps, loads)?;
        let pattern = scattered_pattern(&currents, &self.layout, &self.config.grid.spec(), self.reference_db)?;
        let expected = ExpectedLobes::for_link(&self.config.aoa, &self.config.aod);
        let report = detect_lobes(&pattern, &expected, self.config.grid.window_deg)?;
        Ok(Evaluation {
            currents,
            pattern,
            report,
        })
    }

    pub fn evaluate(&self, config: &RisConfiguration) -> Result<Evaluation> {
        self.evaluate_loads(&self.loads_for(config)?)
    }

    /// Matched-load (structural-only) evaluation of this scenario.
    pub fn evaluate_matched(&self) -> Result<Evaluation> {
        self.evaluate_loads(&vec![Complex64::new(self.imps.z0, 0.0); self.layout.len()])
    }

    /// `|hᴴ Φ g|` for the given phases.
    pub fn conventional_gain(&self, phases: &[f64]) -> Result<f64> {
        Ok(received_gain(&self.h, &self.g, &PhaseConfiguration::new(phases.to_vec()))?.norm())
    }

    pub fn impedance_gain(&self, loads: &[Complex64]) -> Result<f64> {
        Ok(end_to_end_channel(&self.imps, loads)?.norm())
    }
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub configuration: RisConfiguration,
    /// Phases for the conventional model; equivalent re-radiation phases for
    /// load-based configurations.
    pub phases: Vec<f64>,
    pub capacitances: Option<Vec<f64>>,
    pub loads: Vec<Complex64>,
    pub optimizer: String,
    pub quantizer: String,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub currents: Vec<Complex64>,
    pub pattern: PatternGrid,
    pub report: LobeReport,
}

/// Assemble the scenario, map `config` to loads, and evaluate its pattern.
pub fn evaluate_configuration(scenario: &ScenarioConfig, config: &RisConfiguration) -> Result<(PatternGrid, LobeReport)> {
    let e = Scene::new(scenario)?.evaluate(config)?;
    Ok((e.pattern, e.report))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub model: String,
    pub quantization: String,
    pub optimizer: String,
    pub quantizer: String,
    #[serde(flatten)]
    pub report: LobeReport,
    pub h_conventional_abs: f64,
    pub h_impedance_abs: f64,
    pub h_structural_abs: f64,
    pub matched_specular_level_db: f64,
    pub normalization_reference_db: f64,
    pub series_reactance_ohm: f64,
    pub link_distance_m: f64,
    pub config: ScenarioConfig,
}

pub struct RunArtifacts {
    pub summary: RunSummary,
    pub pattern_csv: PathBuf,
    pub summary_json: PathBuf,
    pub elements_csv: PathBuf,
}

/// Optimizes and evaluates a scenario without touching the filesystem.
pub fn compute_scenario(config: &ScenarioConfig) -> Result<(RunSummary, Optimized, Evaluation, Scene)> {
    let scene = Scene::new(config)?;
    let opt = scene.optimize()?;
    let eval = scene.evaluate_loads(&opt.loads)?;
    let matched = scene.evaluate_matched()?;
    let summary = RunSummary {
        scenario: config.name.clone(),
        model: config.model.as_str().into(),
        quantization: config.quantization.as_str().into(),
        optimizer: opt.optimizer.clone(),
        quantizer: opt.quantizer.clone(),
        report: eval.report,
        h_conventional_abs: scene.conventional_gain(&opt.phases)?,
        h_impedance_abs: scene.impedance_gain(&opt.loads)?,
        h_structural_abs: structural_scattering_channel(&scene.imps)?.norm(),
        matched_specular_level_db: matched.report.specular.level_db,
        normalization_reference_db: scene.reference_db,
        series_reactance_ohm: scene.load_model.series_reactance,
        link_distance_m: scene.link_distance,
        config: config.clone(),
    };
    Ok((summary, opt, eval, scene))
}

fn provenance(config: &ScenarioConfig) -> Result<String> {
    let mut s = String::from("# resolved scenario\n");
    for line in config.to_toml()?.lines() {
        let _ = writeln!(s, "# {line}");
    }
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn pattern_csv(grid: &PatternGrid, header: &str) -> String {
    let mut s = String::with_capacity(header.len() + grid.values_db.len() * 32);
    s.push_str(header);
    s.push_str("azimuth_deg,elevation_deg,level_db\n");
    for (j, e) in grid.elevations_deg.iter().enumerate() {
        for (i, a) in grid.azimuths_deg.iter().enumerate() {
            let _ = writeln!(s, "{a:.6},{e:.6},{:.6}", grid.value(i, j));
        }
    }
    s
}

fn elements_csv(scene: &Scene, opt: &Optimized, header: &str) -> String {
    let mut s = String::from(header);
    s.push_str("index,m,n,phase_rad,capacitance_f,load_re_ohm,load_im_ohm\n");
    for (k, load) in opt.loads.iter().enumerate() {
        let (m, n) = scene.layout.grid_position(k);
        let cap = opt
            .capacitances
            .as_ref()
            .map(|c| format!("{:.6e}", c[k]))
            .unwrap_or_default();
        let _ = writeln!(s, "{k},{m},{n},{:.9},{cap},{:.9},{:.9}", opt.phases[k], load.re, load.im);
    }
    s
}

/// Runs a scenario and writes `pattern.csv`, `summary.json` and
/// `elements.csv` into `out_dir` (the config's own directory if `None`).
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunArtifacts> {
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| config.output.dir.clone());
    let (summary, opt, eval, scene) = compute_scenario(config)?;
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let header = provenance(config)?;

    let pattern_path = dir.join("pattern.csv");
    write_file(&pattern_path, &pattern_csv(&eval.pattern, &header))?;
    let summary_path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Serialization(e.to_string()))?;
    write_file(&summary_path, &(json + "\n"))?;
    let elements_path = dir.join("elements.csv");
    write_file(&elements_path, &elements_csv(&scene, &opt, &header))?;
    Ok(RunArtifacts {
        summary,
        pattern_csv: pattern_path,
        summary_json: summary_path,
        elements_csv: elements_path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: String,
    pub model: String,
    pub quantization: String,
    pub aoa_azimuth_deg: f64,
    pub aoa_elevation_deg: f64,
    pub aod_azimuth_deg: f64,
    pub aod_elevation_deg: f64,
    pub intended_db: f64,
    pub specular_db: f64,
    pub mirror_db: f64,
    pub mirror_present: bool,
    pub gap_db: f64,
    pub matched_specular_db: f64,
}

impl SweepRow {
    pub fn from_summary(s: &RunSummary) -> Self {
        Self {
            scenario: s.scenario.clone(),
            model: s.model.clone(),
            quantization: s.quantization.clone(),
            aoa_azimuth_deg: s.config.aoa.azimuth_deg,
            aoa_elevation_deg: s.config.aoa.elevation_deg,
            aod_azimuth_deg: s.config.aod.azimuth_deg,
            aod_elevation_deg: s.config.aod.elevation_deg,
            intended_db: s.report.intended.level_db,
            specular_db: s.report.specular.level_db,
            mirror_db: s.report.mirror.level_db,
            mirror_present: s.report.mirror.present,
            gap_db: s.report.gap_structural_minus_intended,
            matched_specular_db: s.matched_specular_level_db,
        }
    }
}

pub const SWEEP_HEADER: &str = "scenario,model,quantization,aoa_azimuth_deg,aoa_elevation_deg,aod_azimuth_deg,aod_elevation_deg,intended_db,specular_db,mirror_db,mirror_present,gap_db,matched_specular_db";

pub fn sweep_csv(rows: &[SweepRow], configs: &[ScenarioConfig]) -> Result<String> {
    let mut s = String::new();
    for (i, c) in configs.iter().enumerate() {
        let _ = writeln!(s, "# scenario {i}");
        s.push_str(&provenance(c)?);
    }
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.6},{:.6}",
            r.scenario,
            r.model,
            r.quantization,
            r.aoa_azimuth_deg,
            r.aoa_elevation_deg,
            r.aod_azimuth_deg,
            r.aod_elevation_deg,
            r.intended_db,
            r.specular_db,
            r.mirror_db,
            r.mirror_present,
            r.gap_db,
            r.matched_specular_db
        );
    }
    Ok(s)
}

/// Runs every scenario (concurrently) into `out_root/<index>_<name>/` and
/// writes `out_root/comparison.csv`. Any failure aborts the sweep and names
/// the scenario.
pub fn run_sweep(configs: &[ScenarioConfig], out_root: &Path) -> Result<Vec<SweepRow>> {
    if configs.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one scenario".into()));
    }
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let dir = out_root.join(format!("{i:02}_{}", c.name));
            run_scenario(c, Some(&dir))
                .map(|a| SweepRow::from_summary(&a.summary))
                .map_err(|e| Error::ScenarioRun {
                    name: c.name.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;
    write_file(&out_root.join("comparison.csv"), &sweep_csv(&rows, configs)?)?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ImpedanceDump {
    pub scenario: String,
    pub n: usize,
    pub coupling: String,
    pub cell_length_m: f64,
    pub cell_radius_m: f64,
    pub link_distance_m: f64,
    pub series_reactance_ohm: f64,
    pub z0_ohm: f64,
    pub y0: [f64; 2],
    pub z_rt: [f64; 2],
    pub z_st: Vec<[f64; 2]>,
    pub z_rs: Vec<[f64; 2]>,
    /// Row-major `[re, im]` pairs.
    pub z_ss: Vec<Vec<[f64; 2]>>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn impedance_dump(config: &ScenarioConfig) -> Result<ImpedanceDump> {
    let scene = Scene::new(config)?;
    let imps = &scene.imps;
    Ok(ImpedanceDump {
        scenario: config.name.clone(),
        n: imps.len(),
        coupling: format!("{:?}", config.coupling).to_lowercase(),
        cell_length_m: scene.cell.length,
        cell_radius_m: scene.cell.radius,
        link_distance_m: scene.link_distance,
        series_reactance_ohm: scene.load_model.series_reactance,
        z0_ohm: imps.z0,
        y0: pair(imps.y0),
        z_rt: pair(imps.z_rt),
        z_st: imps.z_st.iter().copied().map(pair).collect(),
        z_rs: imps.z_rs.iter().copied().map(pair).collect(),
        z_ss: imps
            .z_ss
            .row_iter()
            .map(|r| r.iter().copied().map(pair).collect())
            .collect(),
    })
}

pub fn write_impedance_dump(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<PathBuf> {
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| config.output.dir.clone());
    let dump = impedance_dump(config)?;
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join("impedance.json");
    let json = serde_json::to_string(&dump).map_err(|e| Error::Serialization(e.to_string()))?;
    write_file(&path, &(json + "\n"))?;
    Ok(path)
}
