use std::path::Path;

use proptest::prelude::*;
use risim_core::impedance::{end_to_end_channel, structural_scattering_channel, Coupling};
use risim_core::pattern::{induced_currents, scattered_pattern, GridSpec};
use risim_core::pipeline::Scene;
use risim_core::scenario::{load_scenario, ChannelModel, Quantization, ScenarioConfig};
use risim_core::Complex64;

fn baseline() -> ScenarioConfig {
    load_scenario(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/baseline.toml")).unwrap()
}

fn small(n_x: usize, n_z: usize) -> ScenarioConfig {
    let mut c = baseline();
    c.layout.n_x = n_x;
    c.layout.n_z = n_z;
    c.grid.step_deg = 5.0;
    c
}

#[test]
fn nearest_neighbours_couple_more_strongly_than_next_nearest() {
    let scene = Scene::new(&baseline()).unwrap();
    let z = &scene.imps.z_ss;
    let l = &scene.layout;
    let (a, b) = (l.index(10, 10), l.index(10, 11));
    let c2 = l.index(10, 12);
    assert!(z[(a, b)].norm() > z[(a, c2)].norm());
    let (d, e) = (l.index(11, 10), l.index(12, 10));
    assert!(z[(a, d)].norm() > z[(a, e)].norm());
    for i in 0..l.len() {
        for j in 0..l.len() {
            assert!((z[(i, j)] - z[(j, i)]).norm() <= 1e-12 * z[(i, j)].norm().max(1.0));
        }
    }
}

#[test]
fn structural_channel_is_nonzero() {
    let scene = Scene::new(&baseline()).unwrap();
    let s = structural_scattering_channel(&scene.imps).unwrap();
    assert!(s.norm() > 0.0 && s.is_finite());
}

#[test]
fn open_circuit_loads_silence_the_surface() {
    let scene = Scene::new(&small(4, 3)).unwrap();
    let open = vec![Complex64::new(5.2, 1e12 * 50.0); scene.layout.len()];
    let i = induced_currents(&scene.imps, &open).unwrap();
    let matched = induced_currents(&scene.imps, &vec![Complex64::new(50.0, 0.0); scene.layout.len()]).unwrap();
    let peak = matched.iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(i.iter().all(|c| c.norm() < 1e-9 * peak));
}

#[test]
fn single_cell_matches_scalar_formula() {
    let scene = Scene::new(&small(1, 1)).unwrap();
    let z = scene.imps.z_ss[(0, 0)];
    let load = Complex64::new(5.2, -40.0);
    let i = induced_currents(&scene.imps, &[load]).unwrap()[0];
    let expected = -scene.imps.z_st[0] / (z + load);
    assert!((i - expected).norm() <= 1e-12 * expected.norm());
    let h = end_to_end_channel(&scene.imps, &[load]).unwrap();
    let h_expected = scene.imps.y0 * (scene.imps.z_rt - scene.imps.z_rs[0] * scene.imps.z_st[0] / (z + load));
    assert!((h - h_expected).norm() <= 1e-12 * h_expected.norm());
}

#[test]
fn matched_broadside_pattern_is_azimuth_symmetric() {
    let scene = Scene::new(&small(6, 4)).unwrap();
    let n = scene.layout.len();
    let currents = induced_currents(&scene.imps, &vec![Complex64::new(50.0, 0.0); n]).unwrap();
    let grid = GridSpec {
        step_deg: 2.0,
        ..GridSpec::default()
    };
    let p = scattered_pattern(&currents, &scene.layout, &grid, 0.0).unwrap();
    let na = p.azimuths_deg.len();
    for j in 0..p.elevations_deg.len() {
        for i in 0..na {
            let (x, y) = (p.value(i, j), p.value(na - 1 - i, j));
            if x > -300.0 {
                assert!((x - y).abs() < 1e-6, "az asymmetry {x} vs {y}");
            }
        }
    }
}

#[test]
fn impedance_optimum_beats_perturbations() {
    let mut cfg = small(5, 4);
    cfg.model = ChannelModel::Impedance;
    cfg.quantization = Quantization::Ideal;
    cfg.coupling = Coupling::Diagonal;
    let scene = Scene::new(&cfg).unwrap();
    let best = scene.optimize().unwrap();
    let gain = scene.impedance_gain(&best.loads).unwrap();
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    for _ in 0..200 {
        let mut loads = best.loads.clone();
        for l in loads.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            l.im += 20.0 * u;
        }
        assert!(scene.impedance_gain(&loads).unwrap() <= gain * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn channel_invariant_under_relabelling(seed in any::<u64>(), x in proptest::collection::vec(-200.0f64..200.0, 12)) {
        let scene = Scene::new(&small(4, 3)).unwrap();
        let n = scene.layout.len();
        let loads: Vec<Complex64> = x.iter().map(|&x| Complex64::new(5.2, x)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted_loads: Vec<Complex64> = perm.iter().map(|&p| loads[p]).collect();
        let h = end_to_end_channel(&scene.imps, &loads).unwrap();
        let hp = end_to_end_channel(&scene.imps.permuted(&perm), &permuted_loads).unwrap();
        prop_assert!((h - hp).norm() <= 1e-9 * h.norm());
        let i = induced_currents(&scene.imps, &loads).unwrap();
        let ip = induced_currents(&scene.imps.permuted(&perm), &permuted_loads).unwrap();
        for (k, &p) in perm.iter().enumerate() {
            prop_assert!((ip[k] - i[p]).norm() <= 1e-9 * i[p].norm().max(1e-30));
        }
    }
}
