use fpsi_core::app::output::{read_series, vtk_string, SeriesRow};
use fpsi_core::app::run::{CHECKPOINT_FILE, SERIES_FILE};
use fpsi_core::app::{run, MeshSource, RunConfig, ScenarioId, Simulation};
use fpsi_core::forms::Fields;
use fpsi_core::timestep::{SchemeOrder, State};
use fpsi_core::FpsiError;

const DT: f64 = 1e-4;

fn small_wave(order: SchemeOrder, steps: usize) -> RunConfig {
    let mut cfg = RunConfig::new(ScenarioId::PressureWave2d, DT, steps as f64 * DT);
    cfg.mesh = Some(MeshSource::Channel(2));
    cfg.order = order;
    cfg
}

fn max_diff(a: &Fields, b: &Fields) -> f64 {
    a.to_vector()
        .iter()
        .zip(b.to_vector())
        .chain(a.us.iter().zip(b.us.clone()))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Floats of the POINTS section.
fn vtk_points(text: &str) -> Vec<[f64; 3]> {
    let mut lines = text.lines().skip_while(|l| !l.starts_with("POINTS"));
    let n: usize = lines.next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    lines
        .take(n)
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

#[test]
fn rest_state_snapshot_is_the_reference_geometry() {
    let sim = Simulation::new(small_wave(SchemeOrder::First, 1)).unwrap();
    let disc = &sim.scenario.disc;
    let text = vtk_string(disc, &sim.state.current, "rest");
    assert!(text.starts_with("# vtk DataFile Version 3.0\nrest\nASCII\nDATASET UNSTRUCTURED_GRID"));
    let pts = vtk_points(&text);
    assert_eq!(pts.len(), disc.mesh.n_vertices());
    for (p, v) in pts.iter().zip(disc.mesh.vertices()) {
        assert!((p[0] - v[0]).abs() < 1e-12 && (p[1] - v[1]).abs() < 1e-12 && p[2] == 0.0);
    }
    assert!(text.contains(&format!("CELL_TYPES {}", disc.mesh.n_cells())));
    for name in ["v_f", "v_s", "q", "u"] {
        assert!(text.contains(&format!("VECTORS {name} double")));
    }
    for name in ["p_f", "p_d"] {
        assert!(text.contains(&format!("SCALARS {name} double 1")));
    }
}

#[test]
fn uniform_displacement_shifts_every_point() {
    let sim = Simulation::new(small_wave(SchemeOrder::First, 1)).unwrap();
    let disc = &sim.scenario.disc;
    let mut f = sim.state.current.clone();
    let shift = [0.25, -0.5];
    let (vf, vs) = (disc.vf.as_ref().unwrap(), disc.vs.as_ref().unwrap());
    f.uf = vf.interpolate(|_, out| out.copy_from_slice(&shift));
    f.us = vs.interpolate(|_, out| out.copy_from_slice(&shift));
    let pts = vtk_points(&vtk_string(disc, &f, "shifted"));
    for (p, v) in pts.iter().zip(disc.mesh.vertices()) {
        assert!((p[0] - v[0] - shift[0]).abs() < 1e-12 && (p[1] - v[1] - shift[1]).abs() < 1e-12);
    }
}

#[test]
fn run_writes_series_snapshots_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_wave(SchemeOrder::First, 4);
    cfg.output_dir = Some(dir.path().to_path_buf());
    cfg.output_every = 2;
    let summary = run(&cfg).unwrap();
    assert_eq!(summary.steps, 4);
    assert!((summary.final_time - 4.0 * DT).abs() < 1e-15);

    let text = std::fs::read_to_string(dir.path().join(SERIES_FILE)).unwrap();
    assert_eq!(text.lines().next().unwrap(), SeriesRow::header());
    assert!(SeriesRow::header().starts_with("t,ux_probe,ur_probe,kinetic_solid"));
    let rows = read_series(&dir.path().join(SERIES_FILE)).unwrap();
    assert_eq!(rows.len(), 5);
    for (k, r) in rows.iter().enumerate() {
        assert!((r[0] - k as f64 * DT).abs() < 1e-15);
        assert!(r.iter().all(|v| v.is_finite()));
    }
    for step in [0, 2, 4] {
        assert!(dir.path().join(format!("step_{step:06}.vtk")).exists());
    }
    assert!(!dir.path().join("step_000001.vtk").exists());

    let state = State::load_checkpoint(&dir.path().join(CHECKPOINT_FILE)).unwrap();
    assert_eq!(state.step, 4);
    assert!(state.current.max_abs() > 0.0, "the pulse should move the fluid");
}

fn restart_matches_continuous_run(order: SchemeOrder) {
    let dir = tempfile::tempdir().unwrap();
    let reference = {
        let mut sim = Simulation::new(small_wave(order, 4)).unwrap();
        for _ in 0..4 {
            sim.step().unwrap();
        }
        sim.state
    };

    let mut first = small_wave(order, 2);
    first.output_dir = Some(dir.path().to_path_buf());
    run(&first).unwrap();

    let mut second = small_wave(order, 4);
    second.restart = Some(dir.path().join(CHECKPOINT_FILE));
    let mut sim = Simulation::new(second).unwrap();
    assert_eq!(sim.remaining_steps(), 2);
    for _ in 0..2 {
        sim.step().unwrap();
    }
    assert_eq!(sim.state.step, 4);
    assert_eq!(max_diff(&sim.state.current, &reference.current), 0.0);
}

#[test]
fn first_order_restart_is_exact() {
    restart_matches_continuous_run(SchemeOrder::First);
}

#[test]
fn second_order_restart_keeps_its_history() {
    restart_matches_continuous_run(SchemeOrder::Second);
}

#[test]
fn restart_with_another_step_drops_the_history() {
    let dir = tempfile::tempdir().unwrap();
    let mut first = small_wave(SchemeOrder::Second, 2);
    first.output_dir = Some(dir.path().to_path_buf());
    run(&first).unwrap();
    let mut cfg = RunConfig::new(ScenarioId::PressureWave2d, 2.0 * DT, 6.0 * DT);
    cfg.mesh = Some(MeshSource::Channel(2));
    cfg.order = SchemeOrder::Second;
    cfg.restart = Some(dir.path().join(CHECKPOINT_FILE));
    let sim = Simulation::new(cfg).unwrap();
    assert!(sim.state.previous.is_none());
    assert_eq!(sim.remaining_steps(), 2);
}

#[test]
fn checkpoint_for_another_mesh_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut first = small_wave(SchemeOrder::First, 1);
    first.output_dir = Some(dir.path().to_path_buf());
    run(&first).unwrap();
    let mut cfg = small_wave(SchemeOrder::First, 2);
    cfg.mesh = Some(MeshSource::Channel(3));
    cfg.restart = Some(dir.path().join(CHECKPOINT_FILE));
    assert!(Simulation::new(cfg).is_err());
}

#[test]
fn invalid_configuration_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut cfg = RunConfig::new(ScenarioId::MmsStokes, 0.1, 0.2);
    cfg.mesh = Some(MeshSource::Channel(2));
    cfg.output_dir = Some(out.clone());
    let err = run(&cfg).unwrap_err();
    assert!(matches!(err, FpsiError::Config(_)), "{err}");
    assert!(err.is_config_error());
    assert!(!out.exists());

    let mut cfg = small_wave(SchemeOrder::First, 2);
    cfg.dt = -1.0;
    cfg.output_dir = Some(out.clone());
    assert!(run(&cfg).unwrap_err().is_config_error());
    assert!(!out.exists());
}

#[test]
fn template_round_trips_through_toml() {
    for id in ScenarioId::ALL {
        let cfg = RunConfig::new(id, 1e-3, 1e-2);
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }
}

#[test]
fn decay_from_rest_stays_at_rest() {
    let mut cfg = RunConfig::new(ScenarioId::Decay, DT, 3.0 * DT);
    cfg.mesh = Some(MeshSource::Channel(2));
    let summary = run(&cfg).unwrap();
    for row in &summary.series {
        assert_eq!(row.energy.total(), 0.0);
        assert_eq!(row.probe, [0.0, 0.0]);
    }
}
