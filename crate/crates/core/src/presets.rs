//! The wedge-flow configuration: gamma = 1.4, alpha = 10 deg, inflow
//! rho = 1.19 kg/m^3, |v| = 1000 m/s along +x, T = 20 C.

use crate::error::Result;
use crate::exact_fields::{build_solution_t, SolutionTSpec};
use crate::fv_solver::{adapt_to_field, initialize_from_field, AdaptOptions, FieldState};
use crate::gas::{GasKind, GasModel, PrimitiveState, CELSIUS_OFFSET};
use crate::simgrid::{aligned_mesh_for_t, build_domain_mesh, QuadDomain, RayAlignment, SimMesh};
use crate::vec2::Vec2;

pub const GAMMA: f64 = 1.4;
pub const ALPHA_DEG: f64 = 10.0;
pub const INFLOW_DENSITY: f64 = 1.19;
pub const INFLOW_SPEED: f64 = 1000.0;
pub const INFLOW_TEMPERATURE_C: f64 = 20.0;
/// Half width of the default square domain in `xi` (m/s); exceeds the largest
/// signal speed of Solution T (about 1343 m/s).
pub const DOMAIN_HALF_WIDTH: f64 = 1500.0;

/// Air with the given model; the isentropic constant is calibrated so both
/// models share the inflow pressure.
pub fn model(kind: GasKind) -> GasModel {
    let air = GasModel::air();
    match kind {
        GasKind::Nonisentropic => air,
        GasKind::Isentropic => GasModel {
            kind: GasKind::Isentropic,
            ..air
        }
        .with_calibrated_kappa(INFLOW_DENSITY, INFLOW_TEMPERATURE_C + CELSIUS_OFFSET)
            .expect("inflow is admissible"),
    }
}

pub fn inflow(g: &GasModel) -> PrimitiveState {
    g.state_from_temperature(
        INFLOW_DENSITY,
        [INFLOW_SPEED, 0.0],
        INFLOW_TEMPERATURE_C + CELSIUS_OFFSET,
    )
    .expect("inflow is admissible")
}

pub fn solution_t(kind: GasKind) -> SolutionTSpec {
    let g = model(kind);
    build_solution_t(&inflow(&g), ALPHA_DEG.to_radians(), &g, None).expect("attached shock")
}

pub fn square(half_width: f64) -> Vec<Vec2> {
    let h = half_width;
    vec![[-h, -h], [h, -h], [h, h], [-h, h]]
}

/// Polar mesh aligned with every discontinuity of `spec` on the default square.
pub fn aligned_mesh(spec: &SolutionTSpec, n_theta: usize, n_r: usize) -> Result<SimMesh> {
    aligned_mesh_for_t(spec, &square(DOMAIN_HALF_WIDTH), n_theta, n_r)
}

/// Structured mesh of the default square whose grid lines follow the rays of
/// `spec` near the right boundary, refined `levels` times at the jumps of the
/// initial data. Returns the mesh with Solution T averaged onto it at `t0`.
pub fn non_aligned_setup(
    spec: &SolutionTSpec,
    n: usize,
    levels: usize,
    adapt: &AdaptOptions,
    t0: f64,
) -> Result<(SimMesh, FieldState)> {
    let alignment = RayAlignment::new(spec.ray_angles().to_vec());
    let mut mesh = build_domain_mesh(
        &QuadDomain::centered_square(DOMAIN_HALF_WIDTH),
        n,
        n,
        Some(&alignment),
    )?;
    let mut f = initialize_from_field(&spec.field, &mesh, t0)?;
    for _ in 0..levels {
        mesh = adapt_to_field(&f, &mesh, adapt)?.0;
        f = initialize_from_field(&spec.field, &mesh, t0)?;
    }
    Ok((mesh, f))
}
