//! Independent oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use selfsim::exact_fields::ConicalField;
use selfsim::fv_solver::*;
use selfsim::gas::{GasKind, GasModel, PrimitiveState};
use selfsim::riemann::{self, godunov_flux, FluxKind};
use selfsim::simgrid::{build_domain_mesh, QuadDomain, SimMesh};
use std::f64::consts::PI;

/// Wave-curve pressure function written out independently of the solver.
pub fn side(g: &GasModel, k: &PrimitiveState, p: f64) -> f64 {
    let gamma = g.gamma;
    let pk = g.pressure(k);
    let ck = g.sound_speed(k);
    if p <= pk {
        2.0 * ck / (gamma - 1.0) * ((p / pk).powf((gamma - 1.0) / (2.0 * gamma)) - 1.0)
    } else {
        match g.kind {
            GasKind::Nonisentropic => {
                let a = 2.0 / ((gamma + 1.0) * k.rho);
                let b = (gamma - 1.0) / (gamma + 1.0) * pk;
                (p - pk) * (a / (p + b)).sqrt()
            }
            GasKind::Isentropic => {
                let rho = (p / g.kappa).powf(1.0 / gamma);
                ((p - pk) * (1.0 / k.rho - 1.0 / rho)).sqrt()
            }
        }
    }
}

/// Star pressure by plain bisection along the normal `x` direction.
pub fn bisection_star_pressure(g: &GasModel, l: &PrimitiveState, r: &PrimitiveState) -> f64 {
    let du = r.v[0] - l.v[0];
    let f = |p: f64| side(g, l, p) + side(g, r, p) + du;
    let (mut lo, mut hi) = (1e-300, g.pressure(l).max(g.pressure(r)));
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn random_state(g: &GasModel, rng: &mut ChaCha8Rng) -> PrimitiveState {
    let rho = 10f64.powf(rng.gen_range(-1.0..1.0));
    let p = 10f64.powf(rng.gen_range(-1.0..1.0));
    let v = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    g.state_from_pressure(rho, v, p).unwrap()
}

pub fn models() -> [GasModel; 2] {
    [
        GasModel::nonisentropic(1.4).unwrap(),
        GasModel::isentropic(1.4, 1.0).unwrap(),
    ]
}

/// Flux across an edge moving with `w`, computed by boosting into the edge
/// frame, solving the static problem there and transforming the flux back.
pub fn boosted_flux(
    g: &GasModel,
    l: &PrimitiveState,
    r: &PrimitiveState,
    n: [f64; 2],
    w: [f64; 2],
) -> [f64; 4] {
    let f = godunov_flux(&l.shifted(w), &r.shifted(w), g, n).unwrap().0;
    let mass = f[0];
    let mom = [f[1] + w[0] * mass, f[2] + w[1] * mass];
    let energy = match g.kind {
        GasKind::Nonisentropic => {
            f[3] + w[0] * f[1] + w[1] * f[2] + 0.5 * (w[0] * w[0] + w[1] * w[1]) * mass
        }
        GasKind::Isentropic => 0.0,
    };
    [mass, mom[0], mom[1], energy]
}

pub fn sod() -> (GasModel, PrimitiveState, PrimitiveState) {
    let g = GasModel::nonisentropic(1.4).unwrap();
    let l = g.state_from_pressure(1.0, [0.0, 0.0], 1.0).unwrap();
    let r = g.state_from_pressure(0.125, [0.0, 0.0], 0.1).unwrap();
    (g, l, r)
}

pub fn sod_strip(nx: usize) -> (SimMesh, FieldState) {
    let (g, l, r) = sod();
    let h = 1.0 / nx as f64;
    let mesh = build_domain_mesh(&QuadDomain::rectangle(-0.5, -0.5 * h, 0.5, 0.5 * h), nx, 1, None).unwrap();
    let field = ConicalField::new(g, vec![(-PI, l), (-0.5 * PI, r), (0.5 * PI, l)]).unwrap();
    let f = initialize_from_field(&field, &mesh, 1.0).unwrap();
    (mesh, f)
}

/// L1 density error against the exact fan at `t = 1.2`.
pub fn sod_error(nx: usize, order: Order) -> f64 {
    let (g, l, r) = sod();
    let (mesh, f0) = sod_strip(nx);
    let scheme = Scheme::new(FluxKind::Godunov, order).with_motion(MeshMotion::Static);
    let mut f = f0;
    while f.t < 1.2 - 1e-14 {
        let dt = cfl_dt(&f, &mesh, &scheme).unwrap().min(1.2 - f.t);
        f = step(&f, &mesh, dt, &scheme, &BoundarySpec::transmissive()).unwrap();
    }
    let fan = riemann::solve_exact(&l, &r, &g, [1.0, 0.0]).unwrap();
    let h = 1.0 / nx as f64;
    (0..nx)
        .map(|c| {
            let x = mesh.centroid(c)[0];
            // dense midpoint average of the exact density over the cell
            const M: usize = 256;
            let exact: f64 = (0..M)
                .map(|k| fan.sample((x + h * ((k as f64 + 0.5) / M as f64 - 0.5)) / (f.t - 1.0)).rho)
                .sum::<f64>()
                / M as f64;
            (f.primitive(c).unwrap().rho - exact).abs() * h
        })
        .sum()
}
