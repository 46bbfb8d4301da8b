use std::fs;
use std::path::Path;

use risim_core::geometry::PlaneWaveDirection;
use risim_core::pipeline::{
    compute_scenario, evaluate_configuration, impedance_dump, run_scenario, run_sweep, RisConfiguration, Scene,
    SweepRow, SWEEP_HEADER,
};
use risim_core::scenario::{load_scenario, ChannelModel, Quantization, ScenarioConfig};
use risim_core::{Complex64, Error};

fn baseline() -> ScenarioConfig {
    load_scenario(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/baseline.toml")).unwrap()
}

fn coarse(mut c: ScenarioConfig) -> ScenarioConfig {
    c.grid.step_deg = 3.0;
    c
}

fn with(aoa: (f64, f64), aod: (f64, f64), model: ChannelModel) -> ScenarioConfig {
    let mut c = baseline();
    c.aoa = PlaneWaveDirection::new(aoa.0, aoa.1).unwrap();
    c.aod = PlaneWaveDirection::new(aod.0, aod.1).unwrap();
    c.model = model;
    c.quantization = match model {
        ChannelModel::Conventional => Quantization::OneBitNearest,
        ChannelModel::Impedance => Quantization::CapacitanceRange,
    };
    c.name = format!("{}_{}_{}_{}", model.as_str(), aoa.0, aoa.1, aod.0);
    c
}

#[test]
fn run_writes_self_describing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = baseline();
    let a = run_scenario(&cfg, Some(dir.path())).unwrap();

    let csv = fs::read_to_string(&a.pattern_csv).unwrap();
    let toml_line = format!("# frequency_hz = {}", toml::Value::Float(cfg.frequency_hz));
    assert!(csv.lines().any(|l| l == toml_line), "provenance header missing");
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "azimuth_deg,elevation_deg,level_db");
    assert_eq!(body.len(), 1 + 181 * 181);
    assert_eq!(body[1].split(',').next().unwrap(), "-90.000000");
    assert_eq!(body[2], body[2].split(',').take(2).collect::<Vec<_>>().join(",") + "," + body[2].split(',').nth(2).unwrap());
    // elevation is the slow index
    assert!(body[1].starts_with("-90.000000,-90.000000,") && body[2].starts_with("-89.000000,-90.000000,"));
    for field in body[1].split(',') {
        assert_eq!(field.split('.').nth(1).unwrap().len(), 6);
    }

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&a.summary_json).unwrap()).unwrap();
    for key in [
        "intended",
        "specular",
        "mirror",
        "gap_structural_minus_intended",
        "h_conventional_abs",
        "h_impedance_abs",
        "normalization_reference_db",
        "optimizer",
        "quantizer",
        "config",
    ] {
        assert!(json.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(json["config"]["frequency_hz"], 26.168e9);

    let elements = fs::read_to_string(&a.elements_csv).unwrap();
    let rows: Vec<&str> = elements.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "index,m,n,phase_rad,capacitance_f,load_re_ohm,load_im_ohm");
    assert_eq!(rows.len(), 401);
}

#[test]
fn fig3_scenario_reports_all_three_lobes() {
    let (s, _, _, _) = compute_scenario(&baseline()).unwrap();
    let r = s.report;
    assert_eq!(
        (r.specular.direction.azimuth_deg, r.specular.direction.elevation_deg),
        (0.0, 0.0)
    );
    assert!((r.intended.direction.azimuth_deg - 45.0).abs() <= 2.0);
    assert!((r.mirror.direction.azimuth_deg + 45.0).abs() <= 2.0);
    assert!(r.mirror.present);
    assert!(r.gap_structural_minus_intended > 0.0);
    assert!(s.h_conventional_abs > 0.0 && s.h_impedance_abs > 0.0);
    assert_eq!(s.optimizer, "conventional_phase_alignment");
    assert_eq!(s.quantizer, "one_bit_nearest");
}

#[test]
fn fig6_scenario_gap_is_finite_and_positive() {
    let (s, opt, _, _) = compute_scenario(&with((-30.0, -60.0), (45.0, 0.0), ChannelModel::Impedance)).unwrap();
    let gap = s.report.gap_structural_minus_intended;
    assert!(gap.is_finite() && gap > 0.0, "gap {gap}");
    let caps = opt.capacitances.unwrap();
    assert!(caps.iter().all(|&c| (0.025e-12..=0.03e-12).contains(&c)));
    assert!(opt.loads.iter().all(|l| (l.re - 5.2).abs() < 1e-12));
    assert_eq!(s.quantizer, "capacitance_range:nearest_reactance");
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = coarse(with((-30.0, -60.0), (30.0, 0.0), ChannelModel::Impedance));
    let ra = run_scenario(&cfg, Some(a.path())).unwrap();
    let rb = run_scenario(&cfg, Some(b.path())).unwrap();
    for (x, y) in [
        (&ra.pattern_csv, &rb.pattern_csv),
        (&ra.summary_json, &rb.summary_json),
        (&ra.elements_csv, &rb.elements_csv),
    ] {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn sweep_of_four_angle_pairs_and_two_models_has_eight_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfgs = Vec::new();
    for aoa in [(0.0, 0.0), (-30.0, -60.0)] {
        for aod in [(45.0, 0.0), (30.0, 0.0)] {
            for model in [ChannelModel::Conventional, ChannelModel::Impedance] {
                cfgs.push(coarse(with(aoa, aod, model)));
            }
        }
    }
    let rows = run_sweep(&cfgs, dir.path()).unwrap();
    assert_eq!(rows.len(), 8);
    let table = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let body: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], SWEEP_HEADER);
    assert_eq!(body.len(), 9);
    for (row, cfg) in rows.iter().zip(&cfgs) {
        assert_eq!(row.scenario, cfg.name);
        assert!(dir.path().join(format!("{:02}_{}", cfgs.iter().position(|c| c.name == cfg.name).unwrap(), cfg.name)).join("summary.json").exists());
    }
}

#[test]
fn single_scenario_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coarse(baseline());
    let rows = run_sweep(&[cfg.clone()], dir.path()).unwrap();
    let (s, _, _, _) = compute_scenario(&cfg).unwrap();
    assert_eq!(rows, vec![SweepRow::from_summary(&s)]);
}

#[test]
fn duplicate_scenarios_give_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coarse(with((0.0, 0.0), (30.0, 0.0), ChannelModel::Conventional));
    let rows = run_sweep(&[cfg.clone(), cfg], dir.path()).unwrap();
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn failing_scenario_aborts_sweep_and_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let good = coarse(baseline());
    let mut bad = coarse(baseline());
    bad.name = "collides".into();
    bad.layout.delta = 0.1;
    match run_sweep(&[good, bad], dir.path()) {
        Err(Error::ScenarioRun { name, .. }) => assert_eq!(name, "collides"),
        other => panic!("expected a named failure, got {other:?}"),
    }
    assert!(!dir.path().join("comparison.csv").exists());
}

#[test]
fn explicit_configurations_evaluate() {
    let cfg = coarse(baseline());
    let n = 400;
    let (_, matched) = evaluate_configuration(&cfg, &RisConfiguration::Loads(vec![Complex64::new(50.0, 0.0); n])).unwrap();
    let (_, all_zero) = evaluate_configuration(&cfg, &RisConfiguration::BinaryStates(vec![false; n])).unwrap();
    // uniform configurations scatter only toward the specular direction
    for r in [matched, all_zero] {
        assert!(r.specular.level_db > r.intended.level_db + 10.0);
    }
    assert!(matches!(
        evaluate_configuration(&cfg, &RisConfiguration::Phases(vec![0.0; 3])),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn conventional_ideal_phases_steer_exactly() {
    let mut cfg = baseline();
    cfg.quantization = Quantization::Ideal;
    let (s, _, _, _) = compute_scenario(&cfg).unwrap();
    assert_eq!(s.report.intended.direction, PlaneWaveDirection::new(45.0, 0.0).unwrap());
    assert!(!s.report.mirror.present);
}

#[test]
fn impedance_dump_is_complete() {
    let mut cfg = baseline();
    cfg.layout.n_x = 3;
    cfg.layout.n_z = 2;
    let d = impedance_dump(&cfg).unwrap();
    assert_eq!(d.n, 6);
    assert_eq!(d.z_ss.len(), 6);
    assert!(d.z_ss.iter().all(|r| r.len() == 6));
    assert_eq!(d.z_st.len(), 6);
    assert_eq!(d.z_rt, [0.0, 0.0]);
    assert_eq!(d.z0_ohm, 50.0);
    let text = serde_json::to_string(&d).unwrap();
    assert!(text.contains("\"z_ss\""));
}

#[test]
fn scene_reference_is_matched_broadside_peak() {
    let cfg = coarse(with((-30.0, -60.0), (45.0, 0.0), ChannelModel::Conventional));
    let oblique = Scene::new(&cfg).unwrap();
    let normal = Scene::new(&coarse(baseline())).unwrap();
    assert!((oblique.reference_db - normal.reference_db).abs() < 1e-9);
    let (_, peak) = normal.evaluate_matched().unwrap().pattern.peak();
    assert!(peak.abs() < 1e-9);
}
