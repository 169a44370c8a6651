use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfsim::diagnostics::*;
use selfsim::exact_fields::{build_solution_t, ConicalField, SolutionTSpec};
use selfsim::fv_solver::*;
use selfsim::gas::{ConservativeState, GasKind, GasModel, PrimitiveState};
use selfsim::presets;
use selfsim::simgrid::{build_domain_mesh, QuadDomain, SimMesh};
use selfsim::vec2;

fn random_state(g: &GasModel, rng: &mut ChaCha8Rng) -> PrimitiveState {
    let rho = rng.gen_range(0.3..3.0);
    let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    if g.is_isentropic() {
        g.state(rho, v, 0.0).unwrap()
    } else {
        g.state_from_pressure(rho, v, rng.gen_range(0.3..3.0)).unwrap()
    }
}

fn square_mesh(h: f64, n: usize) -> SimMesh {
    build_domain_mesh(&QuadDomain::centered_square(h), n, n, None).unwrap()
}

/// Independent area-weighted mean density.
fn mean_density(f: &FieldState, mesh: &SimMesh) -> f64 {
    let num: f64 = (0..mesh.num_cells()).map(|c| mesh.area(c) * f.cells[c].0[0]).sum();
    num / mesh.total_area()
}

#[test]
fn uniform_step_produces_no_entropy() {
    for kind in [GasKind::Nonisentropic, GasKind::Isentropic] {
        let g = presets::model(kind);
        let u = presets::inflow(&g);
        let mesh = square_mesh(1500.0, 8).refine(&[9, 10]);
        let f = FieldState::uniform(&mesh, &u, g, 1.0).unwrap();
        let scheme = Scheme::godunov();
        let b = BoundarySpec::exterior(ConicalField::uniform(g, u).unwrap());
        let dt = cfl_dt(&f, &mesh, &scheme).unwrap();
        let (after, rec) = step_recorded(&f, &mesh, dt, &scheme, &b, true).unwrap();
        let p = discrete_entropy_production(&f, &after, rec.as_ref(), &mesh).unwrap();
        assert!(p.max_relative() <= 1e-13, "{kind:?}: {}", p.max_relative());
        assert!(discrete_entropy_production(&f, &after, None, &mesh).is_err());
    }
}

#[test]
fn random_godunov_steps_are_entropy_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..50 {
        let g = if trial % 2 == 0 {
            GasModel::nonisentropic(1.4).unwrap()
        } else {
            GasModel::isentropic(1.4, 1.0).unwrap()
        };
        // a small moving mesh far enough out for the supersonic boundary check
        let mesh = square_mesh(6.0, 8);
        let cells: Vec<ConservativeState> =
            (0..mesh.num_cells()).map(|_| g.to_conservative(&random_state(&g, &mut rng))).collect();
        let f = FieldState::new(1.0, cells, g).unwrap();
        let outside = ConicalField::uniform(g, random_state(&g, &mut rng)).unwrap();
        let b = BoundarySpec::exterior(outside);
        let scheme = Scheme::godunov().with_cfl(rng.gen_range(0.1..0.45));
        let dt = cfl_dt(&f, &mesh, &scheme).unwrap();
        let (after, rec) = step_recorded(&f, &mesh, dt, &scheme, &b, true).unwrap();
        let p = discrete_entropy_production(&f, &after, rec.as_ref(), &mesh).unwrap();
        assert!(p.max_relative() <= 1e-12, "trial {trial}: {}", p.max_relative());
    }
}

#[test]
fn reverse_time_update_is_detected() {
    let g = GasModel::nonisentropic(1.4).unwrap();
    let l = g.state_from_pressure(1.0, [0.0, 0.0], 1.0).unwrap();
    let r = g.state_from_pressure(0.7, [0.0, 0.0], 0.6).unwrap();
    let mesh = build_domain_mesh(&QuadDomain::rectangle(-0.5, -0.01, 0.5, 0.01), 50, 1, None).unwrap();
    let cells = (0..50)
        .map(|c| g.to_conservative(if mesh.centroid(c)[0] < 0.0 { &l } else { &r }))
        .collect();
    let f = FieldState::new(1.0, cells, g).unwrap();
    let scheme = Scheme::godunov().with_motion(MeshMotion::Static).with_cfl(0.2);
    let dt = cfl_dt(&f, &mesh, &scheme).unwrap();
    let (fwd, rec) = step_recorded(&f, &mesh, dt, &scheme, &BoundarySpec::transmissive(), true).unwrap();
    let mut rec = rec.unwrap();
    // same fluxes applied with -dt: the anti-diffusive mirror of the step
    rec.dt = -dt;
    let cells = f.cells.iter().zip(&fwd.cells).map(|(a, b)| *a * 2.0 - *b).collect();
    let rev = FieldState::new(1.0 - dt, cells, g).unwrap();
    let p = discrete_entropy_production(&f, &rev, Some(&rec), &mesh).unwrap();
    let worst = p
        .production
        .iter()
        .zip(&p.scale)
        .map(|(a, s)| a / s)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(worst > 1e-4, "max relative production {worst}");
}

fn bump_on_ray(angle: f64, r: f64) -> Bump {
    let c = vec2::scale(vec2::unit_from_angle(angle), r);
    Bump::new([1.0, c[0], c[1]], [0.5, 250.0, 250.0]).unwrap()
}

#[test]
fn weak_residual_of_constant_field_vanishes() {
    let g = presets::model(GasKind::Nonisentropic);
    let field = ConicalField::uniform(g, presets::inflow(&g)).unwrap();
    let phis = TestFunctionSet::new(vec![bump_on_ray(0.3, 600.0), bump_on_ray(-2.0, 100.0)]).with_quadrature(5, 64);
    for (w, e) in weak_residual_exact(&field, &phis).unwrap() {
        assert!(w.relative() < 1e-8, "{}", w.relative());
        assert!(e.relative().abs() < 1e-8);
    }
    let early = TestFunctionSet::new(vec![Bump::new([0.2, 0.0, 0.0], [0.5, 1.0, 1.0]).unwrap()]);
    assert!(weak_residual_exact(&field, &early).is_err());
}

#[test]
fn weak_residual_of_solution_t_converges_with_quadrature() {
    for kind in [GasKind::Nonisentropic, GasKind::Isentropic] {
        let spec = presets::solution_t(kind);
        let bumps = vec![
            bump_on_ray(spec.sigma, 700.0),
            bump_on_ray(-spec.alpha, 500.0),
            bump_on_ray(spec.alpha, 120.0),
        ];
        let fine = TestFunctionSet::new(bumps.clone()).with_quadrature(4, 64);
        for (w, e) in weak_residual_exact(&spec.field, &fine).unwrap() {
            assert!(w.relative() <= 1e-6, "{kind:?} {}", w.relative());
            assert!(e.relative() <= 1e-6, "{kind:?} {}", e.relative());
        }
        // midpoint rule: error ~ h^2
        let ns = [64usize, 128, 256];
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let set = TestFunctionSet::new(vec![bumps[0]]).with_quadrature(1, n);
                weak_residual_exact(&spec.field, &set).unwrap()[0].0.relative()
            })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = ns.iter().zip(&errs).map(|(n, e)| ((*n as f64).ln(), e.ln())).unzip();
        let m = ns.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
        let slope = -xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope >= 1.9, "{kind:?}: slope {slope} from {errs:?}");
    }
}

#[test]
fn weak_residual_detects_rankine_hugoniot_violation() {
    let spec = presets::solution_t(GasKind::Nonisentropic);
    let g = spec.model;
    let post = spec.post_shock;
    let wrong = g.state_from_pressure(post.rho, post.v, 1.1 * g.pressure(&post)).unwrap();
    let mut sectors: Vec<(f64, PrimitiveState)> = spec.field.sectors().map(|(a, _, s)| (a, *s)).collect();
    for s in sectors.iter_mut() {
        if s.1 == post {
            s.1 = wrong;
        }
    }
    let bad = ConicalField::new(g, sectors).unwrap();
    let bump = bump_on_ray(spec.sigma, 700.0);
    for n in [8, 16, 32] {
        let set = TestFunctionSet::new(vec![bump]).with_quadrature(4, n);
        let d = weak_residual_exact(&bad, &set).unwrap()[0].0.relative();
        assert!(d > 1e-3, "defect {d} at {n}");
    }
}

#[test]
fn weak_residual_of_snapshot_series() {
    let spec = presets::solution_t(GasKind::Nonisentropic);
    let mesh = presets::aligned_mesh(&spec, 64, 24).unwrap();
    let snaps: Vec<FieldState> = [0.4, 1.0, 1.6]
        .iter()
        .map(|&t| initialize_from_field(&spec.field, &mesh, t).unwrap())
        .collect();
    let series = SnapshotSeries::new(snaps, None).unwrap();
    let bump = bump_on_ray(spec.sigma, 500.0);
    let coarse = weak_residual_series(&series, &mesh, &TestFunctionSet::new(vec![bump]).with_quadrature(2, 16)).unwrap();
    let fine = weak_residual_series(&series, &mesh, &TestFunctionSet::new(vec![bump]).with_quadrature(2, 64)).unwrap();
    // discontinuities cut quadrature cells, so convergence is first order here
    assert!(fine[0].0.relative() < coarse[0].0.relative());
    assert!(fine[0].0.relative() < 2e-2, "{}", fine[0].0.relative());
    let late = TestFunctionSet::new(vec![Bump::new([1.5, 0.0, 0.0], [0.5, 1.0, 1.0]).unwrap()]);
    assert!(weak_residual_series(&series, &mesh, &late).is_err());
}

fn density_shift(f: &FieldState, amount: f64) -> FieldState {
    let cells = f.cells.iter().map(|u| ConservativeState([u.0[0] + amount, u.0[1], u.0[2], u.0[3]])).collect();
    FieldState::new(f.t, cells, f.model).unwrap()
}

#[test]
fn self_similarity_on_manufactured_series() {
    let spec = presets::solution_t(GasKind::Nonisentropic);
    let mesh = square_mesh(1500.0, 20);
    let w = initialize_from_field(&spec.field, &mesh, 1.0).unwrap();
    // exact
    let exact: Vec<FieldState> = (0..6)
        .map(|k| initialize_from_field(&spec.field, &mesh, 2f64.powi(k)).unwrap())
        .collect();
    let d = self_similarity_deviation(&SnapshotSeries::new(exact, None).unwrap(), &mesh).unwrap();
    assert!(d.deviation.iter().all(|&x| x <= 1e-13));
    // geometric decay U_k = w + 2^-k delta, delta a density shift
    let delta = 0.05;
    let n: usize = 8;
    let geo: Vec<FieldState> = (0..n)
        .map(|k| {
            let mut f = density_shift(&w, delta * 2f64.powi(-(k as i32)));
            f.t = 2f64.powi(k as i32);
            f
        })
        .collect();
    let last_rho = mean_density(geo.last().unwrap(), &mesh);
    let tail = 2;
    let tail_mean: f64 = (n - tail..n).map(|k| 2f64.powi(-(k as i32))).sum::<f64>() / tail as f64;
    let d = self_similarity_deviation(&SnapshotSeries::new(geo.clone(), None).unwrap(), &mesh).unwrap();
    for k in 0..n {
        let analytic = (2f64.powi(-(k as i32)) - tail_mean).abs() * delta / last_rho;
        assert!((d.deviation[k] - analytic).abs() <= 1e-12, "k {k}: {} vs {analytic}", d.deviation[k]);
    }
    for k in 1..n - tail {
        assert!(d.deviation[k] < d.deviation[k - 1]);
    }
    // relabeling t -> r t leaves D unchanged
    let relabeled: Vec<FieldState> = geo
        .iter()
        .map(|f| FieldState { t: 3.7 * f.t, ..f.clone() })
        .collect();
    let d2 = self_similarity_deviation(&SnapshotSeries::new(relabeled, None).unwrap(), &mesh).unwrap();
    assert_eq!(d.deviation, d2.deviation);
    // oscillating pair: D is exactly half their distance
    let b = density_shift(&w, delta);
    let osc: Vec<FieldState> = (0..n)
        .map(|k| FieldState { t: 1.0 + k as f64, ..(if k % 2 == 0 { w.clone() } else { b.clone() }) })
        .collect();
    let last_rho = mean_density(osc.last().unwrap(), &mesh);
    let d = self_similarity_deviation(&SnapshotSeries::new(osc, None).unwrap(), &mesh).unwrap();
    for x in &d.deviation {
        assert!((x - 0.5 * delta / last_rho).abs() <= 1e-12);
    }
    assert!(self_similarity_deviation(&SnapshotSeries::new(vec![w.clone(), FieldState { t: 2.0, ..b }], None).unwrap(), &mesh).is_err());
}

#[test]
fn windowed_self_similarity_ignores_cells_outside() {
    let spec = presets::solution_t(GasKind::Nonisentropic);
    let mesh = square_mesh(1500.0, 10);
    let w = initialize_from_field(&spec.field, &mesh, 1.0).unwrap();
    let mut far = w.clone();
    for c in 0..mesh.num_cells() {
        if mesh.centroid(c)[0] < -600.0 {
            far.cells[c].0[0] *= 1.5;
        }
    }
    let snaps: Vec<FieldState> = (0..4)
        .map(|k| FieldState { t: 1.0 + k as f64, ..(if k == 0 { far.clone() } else { w.clone() }) })
        .collect();
    let window = Some(vec![[0.0, -1500.0], [1500.0, -1500.0], [1500.0, 1500.0], [0.0, 1500.0]]);
    let d = self_similarity_deviation(&SnapshotSeries::new(snaps.clone(), window).unwrap(), &mesh).unwrap();
    assert!(d.deviation.iter().all(|&x| x == 0.0));
    let d = self_similarity_deviation(&SnapshotSeries::new(snaps, None).unwrap(), &mesh).unwrap();
    assert!(d.deviation[0] > 0.0);
}

#[test]
fn steadiness_of_steady_and_moving_patterns() {
    let spec = presets::solution_t(GasKind::Nonisentropic);
    let mesh = presets::aligned_mesh(&spec, 64, 16).unwrap();
    let ts = [1.0, 1.5, 2.0, 3.0, 4.0];
    let points = grid_points([-900.0, -900.0], [900.0, 900.0], 9);
    let snaps: Vec<FieldState> = ts.iter().map(|&t| initialize_from_field(&spec.field, &mesh, t).unwrap()).collect();
    let d = steadiness_deviation(&SnapshotSeries::new(snaps, None).unwrap(), &mesh, &points).unwrap();
    assert!(d.iter().all(|&x| x <= 1e-14), "{d:?}");
    // a circular front at |xi| = 500 sweeps over fixed points as t grows
    let g = spec.model;
    let (inner, outer) = (
        g.to_conservative(&g.state_from_pressure(2.0, [0.0, 0.0], 2e5).unwrap()),
        g.to_conservative(&g.state_from_pressure(1.0, [0.0, 0.0], 1e5).unwrap()),
    );
    let front: Vec<FieldState> = ts
        .iter()
        .map(|&t| {
            let cells = (0..mesh.num_cells())
                .map(|c| if vec2::norm(mesh.centroid(c)) < 500.0 { inner } else { outer })
                .collect();
            FieldState::new(t, cells, g).unwrap()
        })
        .collect();
    let d = steadiness_deviation(&SnapshotSeries::new(front.clone(), None).unwrap(), &mesh, &points).unwrap();
    assert!(d[0] > 0.05, "{d:?}");
    // the same series is exactly self-similar
    let s = self_similarity_deviation(&SnapshotSeries::new(front.clone(), None).unwrap(), &mesh).unwrap();
    assert!(s.deviation.iter().all(|&x| x <= 1e-14));
    let far = grid_points([-5000.0, -5000.0], [5000.0, 5000.0], 3);
    assert!(steadiness_deviation(&SnapshotSeries::new(front, None).unwrap(), &mesh, &far).is_err());
}

#[test]
fn early_snapshots_stay_near_initial_data() {
    let spec = presets::solution_t(GasKind::Isentropic);
    let mesh = square_mesh(1500.0, 24);
    let f0 = initialize_from_field(&spec.field, &mesh, 1.0).unwrap();
    let b = BoundarySpec::exterior(spec.field.clone());
    let mut snaps = vec![f0.clone()];
    run_observed(&f0, &mesh, &b, &StopCriteria::steps(12), &Scheme::godunov(), false, |v| {
        snaps.push(v.after.clone());
        Ok(())
    })
    .unwrap();
    let d = trace_distance(&SnapshotSeries::new(snaps, None).unwrap(), &mesh, &spec.field).unwrap();
    assert_eq!(d[0], 0.0);
    assert!(d[1] > 0.0);
    for (k, x) in d.iter().enumerate() {
        assert!(*x <= (k as f64 + 1.0) * d[1], "step {k}: {x} vs first {}", d[1]);
    }
}

fn specs() -> Vec<SolutionTSpec> {
    let mut out = Vec::new();
    for kind in [GasKind::Nonisentropic, GasKind::Isentropic] {
        let g = presets::model(kind);
        for deg in [5.0f64, 10.0, 20.0] {
            out.push(build_solution_t(&presets::inflow(&g), deg.to_radians(), &g, None).unwrap());
        }
    }
    out
}

#[test]
fn classification_examples() {
    let th = ClassifyThresholds::default();
    let mesh = square_mesh(1500.0, 60);
    for spec in specs() {
        let f = initialize_from_field(&spec.field, &mesh, 1.0).unwrap();
        let c = classify(&f, &mesh, &spec, &th).unwrap();
        assert_eq!(c.verdict, Verdict::TLike);
        assert!(c.wedge_velocity <= 1e-9 && c.distance <= 1e-14 && c.wedge_cells > 0, "{c:?}");
    }
    let spec = presets::solution_t(GasKind::Nonisentropic);
    let g = spec.model;
    let f = initialize_from_field(&spec.field, &mesh, 1.0).unwrap();
    let mut moved = f.clone();
    for c in wedge_cells(&mesh, &spec, &th) {
        let s = moved.primitive(c).unwrap();
        moved.cells[c] = g.to_conservative(&PrimitiveState { v: [300.0, 0.0], ..s });
    }
    assert_eq!(classify(&moved, &mesh, &spec, &th).unwrap().verdict, Verdict::NLike);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let mut noisy = f.clone();
        for u in noisy.cells.iter_mut() {
            for k in 0..4 {
                u.0[k] *= 1.0 + rng.gen_range(-0.01..0.01);
            }
        }
        let c = classify(&noisy, &mesh, &spec, &th).unwrap();
        assert_eq!(c.verdict, Verdict::TLike, "{c:?}");
    }
}
