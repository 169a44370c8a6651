use std::path::Path;

use selfsim::fv_solver::initialize_from_field;
use selfsim::gas::GasKind;
use selfsim::presets;
use selfsim_cli::config::{ExperimentConfig, KEYS};
use selfsim_cli::output::{self, Snapshot, Table};
use selfsim_cli::CliError;

fn p() -> &'static Path {
    Path::new("mem")
}

#[test]
fn spec_text_round_trips_for_both_models() {
    for kind in [GasKind::Nonisentropic, GasKind::Isentropic] {
        let spec = presets::solution_t(kind);
        let text = output::spec_to_text(&spec);
        let back = output::spec_from_text(&text, p()).unwrap();
        assert_eq!(back, spec, "{}", kind.name());
        assert_eq!(output::spec_to_text(&back), text);
    }
}

#[test]
fn spec_parse_errors_carry_line_numbers() {
    let text = output::spec_to_text(&presets::solution_t(GasKind::Nonisentropic));
    let broken = text.replacen("sigma = ", "sigma = x", 1);
    let line = broken.lines().position(|l| l.starts_with("sigma")).unwrap() + 1;
    match output::spec_from_text(&broken, p()) {
        Err(CliError::Parse { line: l, .. }) => assert_eq!(l, line),
        other => panic!("expected parse error, got {other:?}"),
    }
    let missing: String = text.lines().filter(|l| !l.starts_with("stagnation")).map(|l| format!("{l}\n")).collect();
    assert!(matches!(output::spec_from_text(&missing, p()), Err(CliError::Parse { .. })));
}

fn small_snapshot() -> (Snapshot, selfsim::simgrid::SimMesh) {
    let spec = presets::solution_t(GasKind::Nonisentropic);
    let mesh = presets::aligned_mesh(&spec, 24, 6).unwrap();
    let field = initialize_from_field(&spec.field, &mesh, 1.25).unwrap();
    (Snapshot { t: 1.25, step: 7, mesh_file: "mesh_000000.txt".into(), field }, mesh)
}

#[test]
fn snapshot_csv_round_trips() {
    let (snap, mesh) = small_snapshot();
    let csv = output::snapshot_to_csv(&snap, &mesh).unwrap();
    assert!(csv.lines().any(|l| l == output::SNAPSHOT_HEADER));
    let back = output::snapshot_from_csv(&csv, p()).unwrap();
    assert_eq!((back.t, back.step, back.mesh_file.as_str()), (snap.t, snap.step, snap.mesh_file.as_str()));
    assert_eq!(back.field.model, snap.field.model);
    assert_eq!(back.field.cells.len(), snap.field.cells.len());
    for (a, b) in back.field.cells.iter().zip(&snap.field.cells) {
        for k in 0..4 {
            // primitive columns are written in shortest round-trip form,
            // so only the primitive/conservative conversion rounds
            assert!((a[k] - b[k]).abs() <= 1e-12 * b[k].abs().max(1.0), "{a:?} vs {b:?}");
        }
    }
    assert_eq!(output::snapshot_to_csv(&back, &mesh).unwrap(), csv);
}

#[test]
fn vtk_round_trips_and_matches_mesh() {
    let (snap, mesh) = small_snapshot();
    let text = output::snapshot_to_vtk(&snap, &mesh).unwrap();
    let v = output::vtk_from_text(&text, p()).unwrap();
    assert_eq!((v.t, v.step), (snap.t, snap.step));
    assert_eq!(v.points.len(), mesh.vertices().len());
    assert_eq!(v.polygons.len(), mesh.num_cells());
    for c in 0..mesh.num_cells() {
        assert_eq!(v.polygons[c], mesh.polygon(c));
    }
    let prims = snap.field.primitives().unwrap();
    for (c, s) in prims.iter().enumerate() {
        assert!((v.rho[c] - s.rho).abs() <= 1e-12 * s.rho);
    }
    assert_eq!(output::vtk_to_text(&v), text);
    assert!(output::vtk_from_text(&text.replace("CELLS ", "CELLZ "), p()).is_err());
}

#[test]
fn mesh_file_round_trips() {
    let (_, mesh) = small_snapshot();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    output::write(&path, &mesh.to_text()).unwrap();
    let back = output::mesh_from_file(&path).unwrap();
    assert_eq!(back.to_text(), mesh.to_text());
    assert!(matches!(output::mesh_from_file(&dir.path().join("none.txt")), Err(CliError::MissingInput(_))));
}

#[test]
fn table_round_trips_exactly() {
    let mut t = Table::new(&["a", "b"]);
    t.comments.push("t = 1".into());
    t.rows = vec![vec![0.1, -3e-300], vec![f64::NAN, 1.0 / 3.0]];
    let text = t.to_csv();
    let back = Table::from_csv(&text, p()).unwrap();
    assert_eq!(back.comments, t.comments);
    assert_eq!(back.rows[0], t.rows[0]);
    assert!(back.rows[1][0].is_nan());
    assert_eq!(back.rows[1][1], 1.0 / 3.0);
    assert!(Table::from_csv("a,b\n1\n", p()).is_err());
}

#[test]
fn config_round_trips_every_key() {
    let mut cfg = ExperimentConfig::default();
    cfg.set("model", "isentropic").unwrap();
    cfg.set("alpha_deg", "7.5").unwrap();
    cfg.set("mesh", "aligned").unwrap();
    cfg.set("t_end", "3").unwrap();
    let text = cfg.to_text();
    let back = ExperimentConfig::parse(&text, p()).unwrap();
    for key in KEYS {
        assert_eq!(back.get(key), cfg.get(key), "{key}");
    }
    assert_eq!(back.to_text(), text);
}
