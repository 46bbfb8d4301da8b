//! Scenario documents (TOML): parsing with per-field error reporting,
//! defaults, and serialization back to text.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::FieldError;
use crate::geometry::{ArrayLayout, PlaneWaveDirection};
use crate::impedance::{Coupling, DEFAULT_Z0};
use crate::load::LoadModel;
use crate::optimizer::CapacitanceRule;
use crate::pattern::GridSpec;
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Conventional,
    Impedance,
}

impl ChannelModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelModel::Conventional => "conventional",
            ChannelModel::Impedance => "impedance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantization {
    Ideal,
    OneBitNearest,
    OneBitSweep,
    CapacitanceRange,
}

impl Quantization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantization::Ideal => "ideal",
            Quantization::OneBitNearest => "one_bit_nearest",
            Quantization::OneBitSweep => "one_bit_sweep",
            Quantization::CapacitanceRange => "capacitance_range",
        }
    }
}

/// Which capacitance bound realizes the binary state `0`; state `π` takes
/// the other one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitZeroState {
    CMax,
    CMin,
}

/// Fixed series reactance added to every cell load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesReactance {
    Fixed(f64),
    /// Resonates the isolated cell halfway across the capacitance range.
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl SeriesReactance {
    pub const AUTO: SeriesReactance = SeriesReactance::Auto(AutoTag::Auto);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub n_x: usize,
    pub n_z: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossConfig {
    pub gamma_g: f64,
    pub gamma_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadConfig {
    pub r0_ohm: f64,
    pub inductance_h: f64,
    pub c_min_f: f64,
    pub c_max_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub step_deg: f64,
    pub window_deg: f64,
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            azimuth_min_deg: self.azimuth_min_deg,
            azimuth_max_deg: self.azimuth_max_deg,
            elevation_min_deg: self.elevation_min_deg,
            elevation_max_deg: self.elevation_max_deg,
            step_deg: self.step_deg,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            azimuth_min_deg: g.azimuth_min_deg,
            azimuth_max_deg: g.azimuth_max_deg,
            elevation_min_deg: g.elevation_min_deg,
            elevation_max_deg: g.elevation_max_deg,
            step_deg: g.step_deg,
            window_deg: 5.0,
        }
    }
}

/// Half-wave class cell, short enough to leave a gap of several wire radii
/// between collinear neighbours at λ/2 spacing.
pub const DEFAULT_DIPOLE_LENGTH_WL: f64 = 0.49;

/// Surrogate parameters with no counterpart in the channel models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub z0_ohm: f64,
    pub y0_re: f64,
    pub y0_im: f64,
    /// Cell, TX and RX dipole length in wavelengths.
    pub dipole_length_wl: f64,
    pub dipole_radius_wl: f64,
    pub series_reactance_ohm: SeriesReactance,
    /// TX/RX distance from the surface center; `None` means twice the
    /// Fraunhofer distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_distance_m: Option<f64>,
    pub capacitance_rule: CapacitanceRule,
    pub one_bit_zero_state: BitZeroState,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            z0_ohm: DEFAULT_Z0,
            y0_re: 1.0,
            y0_im: 0.0,
            dipole_length_wl: DEFAULT_DIPOLE_LENGTH_WL,
            dipole_radius_wl: 0.002,
            series_reactance_ohm: SeriesReactance::AUTO,
            link_distance_m: None,
            capacitance_rule: CapacitanceRule::NearestReactance,
            one_bit_zero_state: BitZeroState::CMax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub frequency_hz: f64,
    pub model: ChannelModel,
    pub quantization: Quantization,
    pub coupling: Coupling,
    pub layout: LayoutConfig,
    pub aoa: PlaneWaveDirection,
    pub aod: PlaneWaveDirection,
    pub pathloss: PathlossConfig,
    pub load: LoadConfig,
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn array_layout(&self) -> Result<ArrayLayout> {
        ArrayLayout::at_frequency(self.layout.n_x, self.layout.n_z, self.layout.delta, self.frequency_hz)
    }

    /// Load model without the series reactance (resolved by the scene).
    pub fn load_model(&self) -> Result<LoadModel> {
        LoadModel::new(
            self.load.r0_ohm,
            self.load.inductance_h,
            self.load.c_min_f,
            self.load.c_max_f,
        )
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Re-run the full validation on an in-memory config.
    pub fn validate(&self) -> Result<()> {
        parse_scenario(&self.to_toml()?).map(|_| ())
    }
}

// ---- parsing -----------------------------------------------------------

struct Reader {
    errors: Vec<FieldError>,
}

impl Reader {
    fn err(&mut self, path: &str, reason: impl Into<String>) {
        self.errors.push(FieldError {
            path: path.to_string(),
            reason: reason.into(),
        });
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.err(&join(prefix, key), "unknown key");
            }
        }
    }

    fn table<'a>(&mut self, table: &'a Table, prefix: &str, key: &str, required: bool) -> Option<&'a Table> {
        let path = join(prefix, key);
        match table.get(key) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.err(&path, "expected a table");
                None
            }
            None => {
                if required {
                    self.err(&path, "missing required table");
                }
                None
            }
        }
    }

    fn float(&mut self, table: &Table, prefix: &str, key: &str) -> Option<f64> {
        let path = join(prefix, key);
        match table.get(key) {
            Some(Value::Float(v)) => Some(*v),
            Some(Value::Integer(v)) => Some(*v as f64),
            Some(_) => {
                self.err(&path, "expected a number");
                None
            }
            None => {
                self.err(&path, "missing required field");
                None
            }
        }
    }

    fn float_or(&mut self, table: Option<&Table>, prefix: &str, key: &str, default: f64) -> Option<f64> {
        match table {
            Some(t) if t.contains_key(key) => self.float(t, prefix, key),
            _ => Some(default),
        }
    }

    fn count(&mut self, table: &Table, prefix: &str, key: &str) -> Option<usize> {
        let path = join(prefix, key);
        match table.get(key) {
            Some(Value::Integer(v)) if *v >= 1 => Some(*v as usize),
            Some(Value::Integer(v)) => {
                self.err(&path, format!("must be >= 1, got {v}"));
                None
            }
            Some(_) => {
                self.err(&path, "expected an integer");
                None
            }
            None => {
                self.err(&path, "missing required field");
                None
            }
        }
    }

    fn string<'a>(&mut self, table: &'a Table, prefix: &str, key: &str) -> Option<&'a str> {
        match table.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.err(&join(prefix, key), "expected a string");
                None
            }
            None => None,
        }
    }

    fn choice<T: Copy>(
        &mut self,
        table: Option<&Table>,
        prefix: &str,
        key: &str,
        options: &[(&str, T)],
        default: Option<T>,
    ) -> Option<T> {
        let path = join(prefix, key);
        let raw = match table {
            Some(t) => self.string(t, prefix, key),
            None => None,
        };
        let present = table.is_some_and(|t| t.contains_key(key));
        match raw {
            Some(s) => match options.iter().find(|(name, _)| *name == s) {
                Some((_, v)) => Some(*v),
                None => {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    self.err(&path, format!("`{s}` is not one of {}", names.join(", ")));
                    None
                }
            },
            None if present => None,
            None => {
                if default.is_none() {
                    self.err(&path, "missing required field");
                }
                default
            }
        }
    }

    fn positive(&mut self, path: &str, v: Option<f64>) -> Option<f64> {
        match v {
            Some(x) if x.is_finite() && x > 0.0 => Some(x),
            Some(x) => {
                self.err(path, format!("must be positive and finite, got {x}"));
                None
            }
            None => None,
        }
    }

    fn non_negative(&mut self, path: &str, v: Option<f64>) -> Option<f64> {
        match v {
            Some(x) if x.is_finite() && x >= 0.0 => Some(x),
            Some(x) => {
                self.err(path, format!("must be non-negative and finite, got {x}"));
                None
            }
            None => None,
        }
    }

    fn direction(&mut self, root: &Table, key: &str) -> Option<PlaneWaveDirection> {
        let t = self.table(root, "", key, true)?;
        self.unknown_keys(t, key, &["azimuth_deg", "elevation_deg"]);
        let mut angle = |name: &str| {
            let path = join(key, name);
            match self.float(t, key, name) {
                Some(v) if v.is_finite() && (-90.0..=90.0).contains(&v) => Some(v),
                Some(v) => {
                    self.err(&path, format!("must lie in [-90, 90], got {v}"));
                    None
                }
                None => None,
            }
        };
        let az = angle("azimuth_deg");
        let el = angle("elevation_deg");
        Some(PlaneWaveDirection {
            azimuth_deg: az?,
            elevation_deg: el?,
        })
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

const ROOT_KEYS: &[&str] = &[
    "name",
    "frequency_hz",
    "model",
    "quantization",
    "coupling",
    "layout",
    "aoa",
    "aod",
    "pathloss",
    "load",
    "grid",
    "physics",
    "output",
];

/// Parses and validates a scenario document. Every problem found is
/// reported, each tagged with its dotted key path.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Scenario(vec![FieldError {
            path: "<document>".into(),
            reason: e.message().to_string(),
        }])
    })?;
    let mut r = Reader { errors: Vec::new() };
    r.unknown_keys(&root, "", ROOT_KEYS);

    let name = match root.get("name") {
        Some(_) => r.string(&root, "", "name").map(str::to_string),
        None => Some("scenario".to_string()),
    };
    let frequency = r.float(&root, "", "frequency_hz");
    let frequency = r.positive("frequency_hz", frequency);
    let model = r.choice(
        Some(&root),
        "",
        "model",
        &[("conventional", ChannelModel::Conventional), ("impedance", ChannelModel::Impedance)],
        None,
    );
    let quantization = r.choice(
        Some(&root),
        "",
        "quantization",
        &[
            ("ideal", Quantization::Ideal),
            ("one_bit_nearest", Quantization::OneBitNearest),
            ("one_bit_sweep", Quantization::OneBitSweep),
            ("capacitance_range", Quantization::CapacitanceRange),
        ],
        None,
    );
    let coupling = r.choice(
        Some(&root),
        "",
        "coupling",
        &[("full", Coupling::Full), ("diagonal", Coupling::Diagonal)],
        Some(Coupling::Full),
    );
    if let (Some(ChannelModel::Impedance), Some(Quantization::OneBitNearest | Quantization::OneBitSweep)) =
        (model, quantization)
    {
        r.err(
            "quantization",
            "binary quantizers apply to the conventional model only; use `capacitance_range` or `ideal`",
        );
    }

    let layout = r.table(&root, "", "layout", true).and_then(|t| {
        r.unknown_keys(t, "layout", &["n_x", "n_z", "delta"]);
        let n_x = r.count(t, "layout", "n_x");
        let n_z = r.count(t, "layout", "n_z");
        let delta = r.float(t, "layout", "delta");
        let delta = r.positive("layout.delta", delta);
        Some(LayoutConfig {
            n_x: n_x?,
            n_z: n_z?,
            delta: delta?,
        })
    });

    let aoa = r.direction(&root, "aoa");
    let aod = r.direction(&root, "aod");

    let pl = r.table(&root, "", "pathloss", false);
    if let Some(t) = pl {
        r.unknown_keys(t, "pathloss", &["gamma_g", "gamma_h"]);
    }
    let gamma_g = r.float_or(pl, "pathloss", "gamma_g", 1.0);
    let gamma_g = r.positive("pathloss.gamma_g", gamma_g);
    let gamma_h = r.float_or(pl, "pathloss", "gamma_h", 1.0);
    let gamma_h = r.positive("pathloss.gamma_h", gamma_h);

    let load = r.table(&root, "", "load", true).and_then(|t| {
        r.unknown_keys(t, "load", &["r0_ohm", "inductance_h", "c_min_f", "c_max_f"]);
        let r0 = r.float(t, "load", "r0_ohm");
        let r0 = r.non_negative("load.r0_ohm", r0);
        let l = r.float(t, "load", "inductance_h");
        let l = r.non_negative("load.inductance_h", l);
        let c_min = r.float(t, "load", "c_min_f");
        let c_min = r.positive("load.c_min_f", c_min);
        let c_max = r.float(t, "load", "c_max_f");
        let c_max = r.positive("load.c_max_f", c_max);
        if let (Some(lo), Some(hi)) = (c_min, c_max) {
            if lo >= hi {
                r.err("load.c_max_f", format!("capacitance range is degenerate: c_min {lo} >= c_max {hi}"));
                return None;
            }
        }
        Some(LoadConfig {
            r0_ohm: r0?,
            inductance_h: l?,
            c_min_f: c_min?,
            c_max_f: c_max?,
        })
    });

    let grid = {
        let d = GridConfig::default();
        let t = r.table(&root, "", "grid", false);
        if let Some(t) = t {
            r.unknown_keys(
                t,
                "grid",
                &[
                    "azimuth_min_deg",
                    "azimuth_max_deg",
                    "elevation_min_deg",
                    "elevation_max_deg",
                    "step_deg",
                    "window_deg",
                ],
            );
        }
        let g = (|| {
            Some(GridConfig {
                azimuth_min_deg: r.float_or(t, "grid", "azimuth_min_deg", d.azimuth_min_deg)?,
                azimuth_max_deg: r.float_or(t, "grid", "azimuth_max_deg", d.azimuth_max_deg)?,
                elevation_min_deg: r.float_or(t, "grid", "elevation_min_deg", d.elevation_min_deg)?,
                elevation_max_deg: r.float_or(t, "grid", "elevation_max_deg", d.elevation_max_deg)?,
                step_deg: r.float_or(t, "grid", "step_deg", d.step_deg)?,
                window_deg: r.float_or(t, "grid", "window_deg", d.window_deg)?,
            })
        })();
        g.and_then(|g| {
            let mut ok = true;
            if let Err(e) = g.spec().validate() {
                r.err("grid", e.to_string());
                ok = false;
            }
            if !(g.window_deg.is_finite() && g.window_deg >= 0.0) {
                r.err("grid.window_deg", format!("must be non-negative, got {}", g.window_deg));
                ok = false;
            }
            ok.then_some(g)
        })
    };

    let physics = {
        let d = PhysicsConfig::default();
        let t = r.table(&root, "", "physics", false);
        if let Some(t) = t {
            r.unknown_keys(
                t,
                "physics",
                &[
                    "z0_ohm",
                    "y0_re",
                    "y0_im",
                    "dipole_length_wl",
                    "dipole_radius_wl",
                    "series_reactance_ohm",
                    "link_distance_m",
                    "capacitance_rule",
                    "one_bit_zero_state",
                ],
            );
        }
        let z0 = r.float_or(t, "physics", "z0_ohm", d.z0_ohm);
        let z0 = r.positive("physics.z0_ohm", z0);
        let y0_re = r.float_or(t, "physics", "y0_re", d.y0_re);
        let y0_im = r.float_or(t, "physics", "y0_im", d.y0_im);
        if let (Some(a), Some(b)) = (y0_re, y0_im) {
            if !(a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
                r.err("physics.y0_re", "y0 must be finite and nonzero");
            }
        }
        let len = r.float_or(t, "physics", "dipole_length_wl", d.dipole_length_wl);
        let len = r.positive("physics.dipole_length_wl", len);
        let rad = r.float_or(t, "physics", "dipole_radius_wl", d.dipole_radius_wl);
        let rad = r.positive("physics.dipole_radius_wl", rad);
        if let (Some(l), Some(a)) = (len, rad) {
            if a >= l / 10.0 {
                r.err("physics.dipole_radius_wl", "thin-wire model needs radius < length / 10");
            }
        }
        let series = match t.and_then(|t| t.get("series_reactance_ohm")) {
            None => Some(d.series_reactance_ohm),
            Some(Value::String(s)) if s == "auto" => Some(SeriesReactance::AUTO),
            Some(Value::Float(v)) if v.is_finite() => Some(SeriesReactance::Fixed(*v)),
            Some(Value::Integer(v)) => Some(SeriesReactance::Fixed(*v as f64)),
            Some(_) => {
                r.err("physics.series_reactance_ohm", "expected a finite number or \"auto\"");
                None
            }
        };
        let link = match t.and_then(|t| t.get("link_distance_m")) {
            None => Some(None),
            Some(_) => {
                let v = r.float(t.unwrap(), "physics", "link_distance_m");
                r.positive("physics.link_distance_m", v).map(Some)
            }
        };
        let rule = r.choice(
            t,
            "physics",
            "capacitance_rule",
            &[
                ("nearest_reactance", CapacitanceRule::NearestReactance),
                ("nearest_phase", CapacitanceRule::NearestPhase),
            ],
            Some(d.capacitance_rule),
        );
        let zero = r.choice(
            t,
            "physics",
            "one_bit_zero_state",
            &[("c_max", BitZeroState::CMax), ("c_min", BitZeroState::CMin)],
            Some(d.one_bit_zero_state),
        );
        (|| {
            Some(PhysicsConfig {
                z0_ohm: z0?,
                y0_re: y0_re?,
                y0_im: y0_im?,
                dipole_length_wl: len?,
                dipole_radius_wl: rad?,
                series_reactance_ohm: series?,
                link_distance_m: link?,
                capacitance_rule: rule?,
                one_bit_zero_state: zero?,
            })
        })()
    };

    let output = {
        let t = r.table(&root, "", "output", false);
        match t {
            Some(t) => {
                r.unknown_keys(t, "output", &["dir"]);
                r.string(t, "output", "dir").map(PathBuf::from).or_else(|| {
                    if !t.contains_key("dir") {
                        r.err("output.dir", "missing required field");
                    }
                    None
                })
            }
            None => Some(PathBuf::from("out").join(name.as_deref().unwrap_or("scenario"))),
        }
    };

    if !r.errors.is_empty() {
        return Err(Error::Scenario(r.errors));
    }
    // every field is Some once no error was recorded
    Ok(ScenarioConfig {
        name: name.unwrap(),
        frequency_hz: frequency.unwrap(),
        model: model.unwrap(),
        quantization: quantization.unwrap(),
        coupling: coupling.unwrap(),
        layout: layout.unwrap(),
        aoa: aoa.unwrap(),
        aod: aod.unwrap(),
        pathloss: PathlossConfig {
            gamma_g: gamma_g.unwrap(),
            gamma_h: gamma_h.unwrap(),
        },
        load: load.unwrap(),
        grid: grid.unwrap(),
        physics: physics.unwrap(),
        output: OutputConfig { dir: output.unwrap() },
    })
}

pub fn load_scenario(path: impl AsRef<std::path::Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BASELINE: &str = r#"
name = "baseline"
frequency_hz = 26.168e9
model = "conventional"
quantization = "one_bit_nearest"

[layout]
n_x = 20
n_z = 20
delta = 0.5

[aoa]
azimuth_deg = 0
elevation_deg = 0

[aod]
azimuth_deg = 45
elevation_deg = 0

[load]
r0_ohm = 5.2
inductance_h = 30e-12
c_min_f = 0.025e-12
c_max_f = 0.03e-12
"#;

    fn paths(e: Error) -> Vec<String> {
        match e {
            Error::Scenario(v) => v.into_iter().map(|f| f.path).collect(),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn table_values_echoed_with_defaults() {
        let c = parse_scenario(BASELINE).unwrap();
        assert_eq!(c.frequency_hz, 26.168e9);
        assert_eq!((c.layout.n_x, c.layout.n_z, c.layout.delta), (20, 20, 0.5));
        assert_eq!(c.load.r0_ohm, 5.2);
        assert_eq!(c.load.inductance_h, 30e-12);
        assert_eq!((c.load.c_min_f, c.load.c_max_f), (0.025e-12, 0.03e-12));
        assert_eq!(c.physics.z0_ohm, 50.0);
        assert_eq!((c.physics.y0_re, c.physics.y0_im), (1.0, 0.0));
        assert_eq!(c.grid.step_deg, 1.0);
        assert_eq!(c.physics.dipole_length_wl, DEFAULT_DIPOLE_LENGTH_WL);
        assert_eq!(c.physics.capacitance_rule, CapacitanceRule::NearestReactance);
        assert_eq!(c.physics.dipole_radius_wl, 0.002);
        assert_eq!(c.coupling, Coupling::Full);
        assert!((c.wavelength() - 11.456e-3).abs() < 1e-6);
    }

    #[test]
    fn empty_document_lists_required_fields() {
        let p = paths(parse_scenario("").unwrap_err());
        for key in ["frequency_hz", "model", "quantization", "layout", "aoa", "aod", "load"] {
            assert!(p.iter().any(|x| x == key), "{key} missing from {p:?}");
        }
    }

    #[test]
    fn degenerate_capacitance_range_rejected() {
        let text = BASELINE.replace("c_max_f = 0.03e-12", "c_max_f = 0.025e-12");
        assert_eq!(paths(parse_scenario(&text).unwrap_err()), vec!["load.c_max_f"]);
    }

    #[test]
    fn unknown_and_invalid_fields_all_reported() {
        let text = BASELINE
            .replace("delta = 0.5", "delta = -0.5\ncolour = 3")
            .replace("azimuth_deg = 45", "azimuth_deg = 120")
            .replace("\"one_bit_nearest\"", "\"two_bit\"");
        let p = paths(parse_scenario(&text).unwrap_err());
        for key in ["layout.delta", "layout.colour", "aod.azimuth_deg", "quantization"] {
            assert!(p.iter().any(|x| x == key), "{key} missing from {p:?}");
        }
    }

    #[test]
    fn impedance_with_binary_quantizer_rejected() {
        let text = BASELINE.replace("\"conventional\"", "\"impedance\"");
        assert_eq!(paths(parse_scenario(&text).unwrap_err()), vec!["quantization"]);
    }

    #[test]
    fn malformed_document_reported() {
        assert!(matches!(parse_scenario("frequency_hz = ="), Err(Error::Scenario(_))));
    }

    #[test]
    fn round_trip_is_identity() {
        let mut c = parse_scenario(BASELINE).unwrap();
        assert_eq!(parse_scenario(&c.to_toml().unwrap()).unwrap(), c);
        c.physics.series_reactance_ohm = SeriesReactance::Fixed(-12.5);
        c.physics.link_distance_m = Some(3.0);
        c.grid.step_deg = 2.0;
        assert_eq!(parse_scenario(&c.to_toml().unwrap()).unwrap(), c);
    }
}
