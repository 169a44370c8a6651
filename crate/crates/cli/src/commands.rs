//! The five subcommands. Each returns the text printed on success.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use selfsim::diagnostics::{
    classify, discrete_entropy_production, self_similarity_deviation, steadiness_deviation,
    weak_residual_series, Bump, ClassifyThresholds, SnapshotSeries, TestFunctionSet,
};
use selfsim::exact_fields::{verify_solution_t, SolutionTSpec};
use selfsim::fv_solver::{
    adapt_to_field, cfl_dt, initialize_from_field, run_adaptive, step_recorded, BoundarySpec, FieldState,
    Scheme, StopReason,
};
use selfsim::gas::GasModel;
use selfsim::riemann::solve_exact;
use selfsim::simgrid::{
    aligned_mesh_for_t, build_domain_mesh, check_supersonic_boundary_field, QuadDomain, RayAlignment, SimMesh,
};
use selfsim::vec2::{self, Vec2};

use crate::config::{ExperimentConfig, MeshKind};
use crate::error::{io_err, CliError, CliResult};
use crate::output::{self, Snapshot, Table};

pub const SPEC_FILE: &str = "solution_t.txt";
pub const CHECKS_FILE: &str = "solution_t_checks.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

/// Writes the Solution T spec and its interface checks to the output directory.
pub fn build_ic(cfg: &ExperimentConfig) -> CliResult<String> {
    let spec = cfg.solution_t()?;
    create_dir(&cfg.output)?;
    output::write(&cfg.output.join(SPEC_FILE), &output::spec_to_text(&spec))?;
    let checks = verify_solution_t(&spec);
    output::write(&cfg.output.join(CHECKS_FILE), &output::checks_to_csv(&checks))?;
    let g = &spec.model;
    let mut s = format!(
        "Solution T ({} gas, alpha = {} deg)\ninflow Mach {:.5}, shock angle {:.6} deg\n",
        g.kind.name(),
        cfg.alpha_deg,
        g.mach(&spec.inflow),
        spec.sigma.to_degrees()
    );
    for c in &checks {
        s.push_str(&format!(
            "{:<14} {:<7} RH {:.2e}  EEF {:.2e}  admissible {}\n",
            c.name,
            c.kind.name(),
            c.rh_relative,
            c.eef_relative,
            c.admissible
        ));
    }
    if spec.alpha == 0.0 {
        s.push_str("note: alpha = 0 gives uniform flow; both shocks have zero strength (Mach waves)\n");
    }
    s.push_str(&format!("wrote {}\n", cfg.output.join(SPEC_FILE).display()));
    Ok(s)
}

/// Checks a stored spec; the table is returned in both cases.
pub fn verify_t(spec_path: &Path) -> CliResult<(String, bool)> {
    let spec = output::spec_from_text(&output::read(spec_path)?, spec_path)?;
    let checks = verify_solution_t(&spec);
    Ok((output::checks_to_csv(&checks), checks.iter().all(|c| c.passed)))
}

pub fn build_mesh(cfg: &ExperimentConfig, spec: &SolutionTSpec) -> CliResult<SimMesh> {
    let mesh = match cfg.mesh {
        MeshKind::Structured => {
            // alpha = 0 has no discontinuities to follow
            let align = (cfg.align_rays && spec.alpha > 0.0).then(|| RayAlignment::new(spec.ray_angles().to_vec()));
            build_domain_mesh(&QuadDomain { corners: cfg.domain }, cfg.nx, cfg.ny, align.as_ref())
        }
        MeshKind::Aligned => aligned_mesh_for_t(spec, &cfg.domain, cfg.n_theta, cfg.n_r),
    };
    mesh.map_err(|e| CliError::Usage(e.to_string()))
}

/// Mesh and initial field after the configured initial refinement levels.
pub fn initial_state(cfg: &ExperimentConfig, spec: &SolutionTSpec) -> CliResult<(SimMesh, FieldState)> {
    let mut mesh = build_mesh(cfg, spec)?;
    let init = |m: &SimMesh| initialize_from_field(&spec.field, m, cfg.t0).map_err(CliError::physics);
    let mut f = init(&mesh)?;
    for _ in 0..cfg.initial_levels {
        mesh = adapt_to_field(&f, &mesh, &cfg.adapt()).map_err(CliError::Solver)?.0;
        f = init(&mesh)?;
    }
    Ok((mesh, f))
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::ReachedTime => "reached_time",
        StopReason::Converged => "converged",
        StopReason::MaxSteps => "max_steps",
    }
}

/// Writes snapshots and the meshes they live on.
struct SnapshotWriter {
    dir: PathBuf,
    mesh_file: String,
    mesh_cells: usize,
    last_step: Option<usize>,
}

impl SnapshotWriter {
    fn write(&mut self, mesh: &SimMesh, f: &FieldState, step: usize) -> CliResult<()> {
        if self.last_step == Some(step) {
            return Ok(());
        }
        // refinement only adds cells, so the count identifies the mesh
        if mesh.num_cells() != self.mesh_cells {
            self.mesh_file = format!("mesh_{step:06}.txt");
            self.mesh_cells = mesh.num_cells();
            output::write(&self.dir.join(&self.mesh_file), &mesh.to_text())?;
        }
        let snap = Snapshot {
            t: f.t,
            step,
            mesh_file: self.mesh_file.clone(),
            field: f.clone(),
        };
        let base = self.dir.join(format!("snap_{step:06}"));
        output::write(&base.with_extension("csv"), &output::snapshot_to_csv(&snap, mesh)?)?;
        output::write(&base.with_extension("vtk"), &output::snapshot_to_vtk(&snap, mesh)?)?;
        self.last_step = Some(step);
        Ok(())
    }
}

pub const HISTORY_COLUMNS: &[&str] = &["step", "t", "dt", "residual", "cells"];

/// Initializes from Solution T, runs, and writes snapshots, history and summary.
pub fn run(cfg: &ExperimentConfig) -> CliResult<String> {
    let start = Instant::now();
    let spec = cfg.solution_t()?;
    let (mesh, f0) = initial_state(cfg, &spec)?;
    let check = check_supersonic_boundary_field(&mesh, &spec.field);
    if !check.ok {
        return Err(CliError::Physics(selfsim::Error::DegenerateDomain(format!(
            "boundary is not supersonic: min xi.n = {:e} m/s, max |v|+c = {:e} m/s",
            check.min_boundary_speed, check.max_signal_speed
        ))));
    }
    let out = &cfg.output;
    let snap_dir = out.join(SNAPSHOT_DIR);
    create_dir(&snap_dir)?;
    output::write(&out.join("config.txt"), &cfg.to_text())?;
    output::write(&out.join(SPEC_FILE), &output::spec_to_text(&spec))?;

    let mut writer = SnapshotWriter {
        dir: snap_dir,
        mesh_file: String::new(),
        mesh_cells: usize::MAX,
        last_step: None,
    };
    writer.write(&mesh, &f0, 0)?;
    let mut history = Table::new(HISTORY_COLUMNS);
    let mut failure: Option<CliError> = None;
    let every = cfg.snapshot_every;
    let result = run_adaptive(&f0, &mesh, &BoundarySpec::exterior(spec.field.clone()), &cfg.stop(), &cfg.scheme(), &cfg.adapt(), false, |m, v| {
        let step = v.index + 1;
        history.rows.push(vec![step as f64, v.after.t, v.dt, v.residual, m.num_cells() as f64]);
        if every > 0 && step % every == 0 {
            if let Err(e) = writer.write(m, v.after, step) {
                failure = Some(e);
                return Err(selfsim::Error::InvalidParameter("output failed".into()));
            }
        }
        Ok(())
    });
    if let Some(e) = failure {
        return Err(e);
    }
    output::write(&out.join("history.csv"), &history.to_csv())?;
    let mut summary = String::new();
    let outcome = match result {
        Ok((final_mesh, report)) => {
            writer.write(&final_mesh, &report.final_state, report.steps)?;
            let c = classify(&report.final_state, &final_mesh, &spec, &ClassifyThresholds::default())
                .map_err(CliError::Solver)?;
            let first = report.residuals.first().copied().unwrap_or(f64::NAN);
            let last = report.residuals.last().copied().unwrap_or(f64::NAN);
            summary.push_str(&format!(
                "steps = {}\nstop = {}\nt_final = {:e}\ncells = {}\nresidual_first = {first:e}\nresidual_last = {last:e}\nverdict = {}\nwedge_velocity = {:e}\ndistance = {:e}\n",
                report.steps,
                stop_name(report.stop),
                report.final_state.t,
                final_mesh.num_cells(),
                c.verdict.name(),
                c.wedge_velocity,
                c.distance
            ));
            Ok(())
        }
        Err(e) => {
            summary.push_str(&format!("steps = {}\nerror = {e}\n", history.rows.len()));
            Err(CliError::Solver(e))
        }
    };
    output::write(&out.join("summary.txt"), &summary)?;
    output::write(
        &out.join("meta.txt"),
        &format!("# not reproducible: timing only\nwall_clock_s = {:.3}\n", start.elapsed().as_secs_f64()),
    )?;
    outcome.map(|_| summary)
}

/// Left/right states `(rho, v, p)` of a 1D Riemann problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Riemann1d {
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub gamma: f64,
    pub t: f64,
    pub samples: usize,
    pub x_min: f64,
    pub x_max: f64,
}

pub fn riemann1d(r: &Riemann1d) -> CliResult<Table> {
    if !(r.t > 0.0) || r.samples < 2 || !(r.x_max > r.x_min) {
        return Err(CliError::Usage("need t > 0, samples >= 2 and x_max > x_min".into()));
    }
    let g = GasModel::nonisentropic(r.gamma).map_err(CliError::physics)?;
    let state = |s: [f64; 3]| g.state_from_pressure(s[0], [s[1], 0.0], s[2]).map_err(CliError::physics);
    let (l, rr) = (state(r.left)?, state(r.right)?);
    let fan = solve_exact(&l, &rr, &g, [1.0, 0.0]).map_err(CliError::Physics)?;
    let mut table = Table::new(&["x", "rho", "v", "p"]);
    table.comments = vec![
        format!("t = {:e}", r.t),
        format!("gamma = {:e}", r.gamma),
        format!("star_p = {:e}", fan.star_p),
        format!("star_v = {:e}", fan.star_v),
    ];
    for i in 0..r.samples {
        let x = r.x_min + (r.x_max - r.x_min) * i as f64 / (r.samples - 1) as f64;
        let s = fan.sample(x / r.t);
        table.rows.push(vec![x, s.rho, s.v[0], g.pressure(&s)]);
    }
    Ok(table)
}

pub const METRIC_COLUMNS: &[&str] =
    &["step", "t", "self_similarity", "steadiness", "entropy_production", "wedge_velocity", "distance"];
pub const WEAK_COLUMNS: &[&str] = &["bump", "t", "x", "y", "weak_relative", "entropy_relative"];

/// Moves a field onto a refinement of its mesh (children inherit parent values).
fn project(f: &FieldState, from: &SimMesh, to: &SimMesh) -> CliResult<FieldState> {
    if from.num_cells() == to.num_cells() {
        return Ok(f.clone());
    }
    let loc = from.locator();
    let cells = (0..to.num_cells())
        .map(|c| {
            loc.locate(to.centroid(c))
                .map(|p| f.cells[p])
                .ok_or_else(|| CliError::Verification("snapshot meshes are not nested".into()))
        })
        .collect::<CliResult<_>>()?;
    Ok(FieldState { cells, ..f.clone() })
}

/// Largest relative entropy production of one Godunov step from `f`.
fn step_production(f: &FieldState, mesh: &SimMesh, b: &BoundarySpec) -> selfsim::Result<f64> {
    let scheme = Scheme::godunov();
    let dt = cfl_dt(f, mesh, &scheme)?;
    let (after, rec) = step_recorded(f, mesh, dt, &scheme, b, true)?;
    Ok(discrete_entropy_production(f, &after, rec.as_ref(), mesh)?.max_relative())
}

fn bbox(mesh: &SimMesh) -> (Vec2, Vec2) {
    mesh.vertices().iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), v| ([lo[0].min(v[0]), lo[1].min(v[1])], [hi[0].max(v[0]), hi[1].max(v[1])]),
    )
}

/// Reads a run directory and writes `metrics.csv` and `weak.csv` into `out`.
pub fn diagnose(dir: &Path, out: Option<&Path>) -> CliResult<String> {
    let snap_dir = dir.join(SNAPSHOT_DIR);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&snap_dir)
        .map_err(|_| CliError::MissingInput(snap_dir.clone()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "csv")
                && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("snap_"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::MissingInput(snap_dir.join("snap_*.csv")));
    }
    let spec_path = dir.join(SPEC_FILE);
    let spec = output::spec_from_text(&output::read(&spec_path)?, &spec_path)?;
    let mut meshes: HashMap<String, SimMesh> = HashMap::new();
    let mut snaps = Vec::new();
    for p in &files {
        let s = output::snapshot_from_csv(&output::read(p)?, p)?;
        if !meshes.contains_key(&s.mesh_file) {
            meshes.insert(s.mesh_file.clone(), output::mesh_from_file(&snap_dir.join(&s.mesh_file))?);
        }
        snaps.push(s);
    }
    let last = meshes[&snaps.last().unwrap().mesh_file].clone();
    let projected: Vec<FieldState> = snaps
        .iter()
        .map(|s| project(&s.field, &meshes[&s.mesh_file], &last))
        .collect::<CliResult<_>>()?;
    let series = SnapshotSeries::new(projected, None).map_err(|e| CliError::Verification(e.to_string()))?;
    let n = snaps.len();
    let times = series.times();

    let similarity = self_similarity_deviation(&series, &last).map(|d| d.deviation).unwrap_or_else(|_| vec![f64::NAN; n]);
    // fixed points whose xi = x/t stays inside the mesh at every snapshot time
    let (lo, hi) = bbox(&last);
    let loc = last.locator();
    let points: Vec<Vec2> = selfsim::diagnostics::grid_points(vec2::scale(lo, 0.6 * times[0]), vec2::scale(hi, 0.6 * times[0]), 7)
        .into_iter()
        .filter(|p| times.iter().all(|t| loc.locate(vec2::scale(*p, 1.0 / t)).is_some()))
        .collect();
    let steadiness = steadiness_deviation(&series, &last, &points).unwrap_or_else(|_| vec![f64::NAN; n]);

    let b = BoundarySpec::exterior(spec.field.clone());
    let th = ClassifyThresholds::default();
    let mut metrics = Table::new(METRIC_COLUMNS);
    for (k, s) in snaps.iter().enumerate() {
        let mesh = &meshes[&s.mesh_file];
        let production = step_production(&s.field, mesh, &b).unwrap_or(f64::NAN);
        let c = classify(&s.field, mesh, &spec, &th).map_err(CliError::Solver)?;
        metrics.rows.push(vec![
            s.step as f64,
            s.t,
            similarity[k],
            steadiness[k],
            production,
            c.wedge_velocity,
            c.distance,
        ]);
    }

    let mut weak = Table::new(WEAK_COLUMNS);
    let (t_first, t_last) = (times[0], times[n - 1]);
    if t_last > t_first {
        let tc = (t_first * t_last).sqrt();
        let rt = 0.3 * (tc - t_first).min(t_last - tc);
        let hw = 0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]);
        let centre = vec2::scale(vec2::add(lo, hi), 0.5);
        for (k, angle) in [spec.sigma, 0.5 * spec.alpha, std::f64::consts::PI].iter().enumerate() {
            let xi = vec2::add(centre, vec2::scale(vec2::unit_from_angle(*angle), 0.3 * hw));
            let x = vec2::scale(xi, tc);
            let r = 0.1 * hw * tc;
            let row = Bump::new([tc, x[0], x[1]], [rt, r, r])
                .and_then(|bump| weak_residual_series(&series, &last, &TestFunctionSet::new(vec![bump]).with_quadrature(2, 24)))
                .map(|d| (d[0].0.relative(), d[0].1.relative()))
                .unwrap_or((f64::NAN, f64::NAN));
            weak.rows.push(vec![k as f64, tc, x[0], x[1], row.0, row.1]);
        }
    }

    let out = out.unwrap_or(dir);
    create_dir(out)?;
    output::write(&out.join("metrics.csv"), &metrics.to_csv())?;
    output::write(&out.join("weak.csv"), &weak.to_csv())?;
    let fin = metrics.rows.last().unwrap();
    Ok(format!(
        "{n} snapshots, t = {t_first:e} .. {t_last:e}\nfinal: self-similarity {:.3e}, steadiness {:.3e}, entropy production {:.3e}, wedge |v| {:.1} m/s, distance {:.3e}\nwrote {}\n",
        fin[2],
        fin[3],
        fin[4],
        fin[5],
        fin[6],
        out.join("metrics.csv").display()
    ))
}
