//! Finite-volume time integration on meshes that move with the similarity
//! motion `x = t xi`.
//!
//! With physical area `a(t) A` and edge length `l(t) L` (for the similarity
//! motion `a = t^2`, `l = t`) one step reads
//!
//! ```text
//! a(t+dt) A U_new = a(t) A U - dt l(t+dt/2) sum_e L_e F_e,
//! F_e = f(u*) . n - s_e U(u*),   s_e = w_e . n_e,
//! ```
//!
//! where `u*` is the interface state seen by an edge moving with velocity
//! `w_e`. Because `sum_e L_e s_e = 2 A` and `a(t+dt) - a(t) = 2 dt t_mid`,
//! uniform states are preserved exactly (the discrete geometric conservation
//! law). A static mesh (`a = l = 1`, `w = 0`) is available for validation.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exact_fields::ConicalField;
use crate::gas::{ConservativeState, Flux, GasModel, PrimitiveState};
use crate::geometry;
use crate::riemann::{moving_edge_flux_with, FluxKind, InterfaceState};
use crate::simgrid::{check_supersonic_boundary, SimMesh};
use crate::vec2::{self, Vec2};

/// How mesh coordinates relate to physical positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MeshMotion {
    /// Vertices at `x = t xi`.
    #[default]
    Similarity,
    /// Mesh coordinates are physical positions.
    Static,
}

impl MeshMotion {
    #[inline]
    pub fn area_factor(self, t: f64) -> f64 {
        match self {
            MeshMotion::Similarity => t * t,
            MeshMotion::Static => 1.0,
        }
    }

    #[inline]
    pub fn length_factor(self, t: f64) -> f64 {
        match self {
            MeshMotion::Similarity => t,
            MeshMotion::Static => 1.0,
        }
    }

    /// Velocity of an edge whose midpoint sits at mesh coordinate `m`.
    #[inline]
    pub fn edge_velocity(self, m: Vec2) -> Vec2 {
        match self {
            MeshMotion::Similarity => m,
            MeshMotion::Static => [0.0, 0.0],
        }
    }

    /// Similarity coordinate of mesh point `p` at time `t`.
    #[inline]
    pub fn xi_of(self, p: Vec2, t: f64) -> Vec2 {
        match self {
            MeshMotion::Similarity => p,
            MeshMotion::Static => vec2::scale(p, 1.0 / t),
        }
    }
}

/// Cell averages at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub cells: Vec<ConservativeState>,
    pub model: GasModel,
}

impl FieldState {
    /// Checks that every cell is admissible.
    pub fn new(t: f64, cells: Vec<ConservativeState>, model: GasModel) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        let f = FieldState { t, cells, model };
        f.primitives()?;
        Ok(f)
    }

    pub fn uniform(mesh: &SimMesh, state: &PrimitiveState, model: GasModel, t: f64) -> Result<Self> {
        model.validate(state)?;
        Self::new(t, vec![model.to_conservative(state); mesh.num_cells()], model)
    }

    pub fn primitive(&self, c: usize) -> Result<PrimitiveState> {
        self.model
            .to_primitive(&self.cells[c])
            .map_err(|e| positivity(e, c, self.t))
    }

    pub fn primitives(&self) -> Result<Vec<PrimitiveState>> {
        (0..self.cells.len()).map(|c| self.primitive(c)).collect()
    }

    /// Physical totals `sum_c a(t) A_c U_c`.
    pub fn total(&self, mesh: &SimMesh, motion: MeshMotion) -> ConservativeState {
        let a = motion.area_factor(self.t);
        self.cells
            .iter()
            .zip(mesh.areas())
            .fold(ConservativeState::ZERO, |s, (u, &ar)| s + *u * (a * ar))
    }
}

fn positivity(e: Error, cell: usize, t: f64) -> Error {
    match e {
        Error::InvalidState { what, value } => Error::Positivity {
            cell,
            t,
            what,
            value,
        },
        other => other,
    }
}

/// Average of a conical field over every cell (exact sector areas).
pub fn initialize_from_field(field: &ConicalField, mesh: &SimMesh, t0: f64) -> Result<FieldState> {
    if !(t0 > 0.0) {
        return Err(Error::NonpositiveTime(t0));
    }
    let g = field.model;
    let sectors: Vec<(f64, f64, ConservativeState)> = field
        .sectors()
        .filter(|(a, b, _)| b > a)
        .map(|(a, b, s)| (a, b, g.to_conservative(s)))
        .collect();
    let mut cells = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let poly = mesh.polygon_points(c);
        cells.push(match pure_sector(field, &poly) {
            Some(k) => g.to_conservative(&field.states()[k]),
            None => {
                let mut sum = ConservativeState::ZERO;
                let mut area = 0.0;
                for &(a, b, u) in &sectors {
                    let mut w = 0.0;
                    // cones wider than pi are clipped in two halves
                    let pieces = ((b - a) / (0.5 * std::f64::consts::PI)).ceil().max(1.0) as usize;
                    for k in 0..pieces {
                        let a0 = a + (b - a) * k as f64 / pieces as f64;
                        let a1 = a + (b - a) * (k + 1) as f64 / pieces as f64;
                        w += geometry::cone_intersection_area(&poly, a0, a1);
                    }
                    sum += u * w;
                    area += w;
                }
                sum * (1.0 / area)
            }
        });
    }
    FieldState::new(t0, cells, g)
}

/// Sector containing the whole polygon when that is evident from its vertices.
fn pure_sector(field: &ConicalField, poly: &[Vec2]) -> Option<usize> {
    if geometry::convex_contains(poly, [0.0, 0.0], 0.0) {
        return None;
    }
    let angles: Vec<f64> = poly.iter().map(|p| p[1].atan2(p[0])).collect();
    let k = field.sector_index(angles[0]);
    if angles.iter().any(|&a| field.sector_index(a) != k) {
        return None;
    }
    // vertices in one sector span less than pi, so the polygon stays in it
    let (lo, hi) = angles
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
    (hi - lo < std::f64::consts::PI).then_some(k)
}

/// What the domain boundary sees outside.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryRule {
    /// All flux components prescribed from a conical exterior field.
    Prescribed(ConicalField),
    /// Exterior state equal to the adjacent cell (used for validation strips).
    Transmissive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpec {
    pub rule: BoundaryRule,
}

impl BoundarySpec {
    pub fn exterior(field: ConicalField) -> Self {
        BoundarySpec {
            rule: BoundaryRule::Prescribed(field),
        }
    }

    pub fn transmissive() -> Self {
        BoundarySpec {
            rule: BoundaryRule::Transmissive,
        }
    }

    /// Prescribing every flux component is only consistent when no signal can
    /// enter through the boundary.
    pub fn validate(&self, mesh: &SimMesh, f: &FieldState) -> Result<()> {
        if let BoundaryRule::Prescribed(field) = &self.rule {
            let g = &f.model;
            let interior = f
                .primitives()?
                .iter()
                .map(|s| s.speed() + g.sound_speed(s))
                .fold(0.0, f64::max);
            let check = check_supersonic_boundary(mesh, interior.max(field.max_signal_speed()));
            if !check.ok {
                return Err(Error::DegenerateDomain(format!(
                    "boundary is not supersonic: min xi.n = {:e}, max |v|+c = {:e}",
                    check.min_boundary_speed, check.max_signal_speed
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    First,
    /// Limited linear reconstruction with Heun time stepping.
    SecondMuscl,
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "first" => Ok(Order::First),
            "2" | "2-muscl" | "muscl" => Ok(Order::SecondMuscl),
            other => Err(Error::InvalidParameter(format!("unknown order `{other}`"))),
        }
    }
}

impl Order {
    pub fn name(self) -> &'static str {
        match self {
            Order::First => "1",
            Order::SecondMuscl => "2-muscl",
        }
    }

    pub fn default_cfl(self) -> f64 {
        match self {
            Order::First => 0.45,
            Order::SecondMuscl => 0.3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scheme {
    pub flux: FluxKind,
    pub order: Order,
    pub cfl: f64,
    pub motion: MeshMotion,
}

impl Scheme {
    pub fn new(flux: FluxKind, order: Order) -> Self {
        Scheme {
            flux,
            order,
            cfl: order.default_cfl(),
            motion: MeshMotion::Similarity,
        }
    }

    pub fn godunov() -> Self {
        Self::new(FluxKind::Godunov, Order::First)
    }

    pub fn with_cfl(self, cfl: f64) -> Self {
        Scheme { cfl, ..self }
    }

    pub fn with_motion(self, motion: MeshMotion) -> Self {
        Scheme { motion, ..self }
    }
}

impl Default for Scheme {
    fn default() -> Self {
        Self::godunov()
    }
}

/// Largest stable step: `cfl` times the smallest ratio of the adjacent cells'
/// incircle diameter to `max(|v - w| + c)` over the edges.
pub fn cfl_dt(f: &FieldState, mesh: &SimMesh, scheme: &Scheme) -> Result<f64> {
    if !(scheme.cfl > 0.0 && scheme.cfl <= 1.0) {
        return Err(Error::InvalidParameter(format!("cfl {} outside (0, 1]", scheme.cfl)));
    }
    let prims = f.primitives()?;
    Ok(cfl_dt_prims(&prims, f, mesh, scheme))
}

fn cfl_dt_prims(prims: &[PrimitiveState], f: &FieldState, mesh: &SimMesh, scheme: &Scheme) -> f64 {
    let g = &f.model;
    let sound: Vec<f64> = prims.iter().map(|s| g.sound_speed(s)).collect();
    let lf = scheme.motion.length_factor(f.t);
    let mut dt = f64::INFINITY;
    for e in mesh.edges() {
        let w = scheme.motion.edge_velocity(e.midpoint);
        let speed = |c: usize| vec2::norm(vec2::sub(prims[c].v, w)) + sound[c];
        let (mut len, mut lam) = (mesh.length_scale(e.left), speed(e.left));
        if let Some(r) = e.right {
            len = len.min(mesh.length_scale(r));
            lam = lam.max(speed(r));
        }
        dt = dt.min(lf * len / lam);
    }
    scheme.cfl * dt
}

/// Interface data of one edge, sufficient to rebuild its numerical entropy flux.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeRecord {
    Interior(InterfaceState),
    /// Exterior states with the fraction of the edge each covers.
    Exterior(Vec<(f64, PrimitiveState)>),
}

/// Everything needed to audit one first-order step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    /// `a(t)`, `a(t + dt)` and `l(t + dt/2)`.
    pub area_factor_before: f64,
    pub area_factor_after: f64,
    pub length_factor: f64,
    /// Normal edge speed `w . n` per edge.
    pub edge_speed: Vec<f64>,
    pub edge_flux: Vec<Flux>,
    pub interfaces: Vec<EdgeRecord>,
}

struct Assembly {
    /// `sum_e sign L_e F_e` per cell, mesh lengths.
    rhs: Vec<ConservativeState>,
    edge_flux: Vec<Flux>,
    interfaces: Option<Vec<EdgeRecord>>,
}

fn exterior_pieces(
    field: &ConicalField,
    a: Vec2,
    b: Vec2,
    motion: MeshMotion,
    t: f64,
) -> Vec<(f64, PrimitiveState)> {
    let xa = motion.xi_of(a, t);
    let xb = motion.xi_of(b, t);
    let mut cuts: Vec<f64> = field
        .sectors()
        .filter_map(|(start, _, _)| geometry::segment_ray_crossing(xa, xb, vec2::unit_from_angle(start)))
        .filter(|&u| u > 0.0 && u < 1.0)
        .collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = vec2::lerp(xa, xb, 0.5 * (w[0] + w[1]));
            (w[1] - w[0], *field.at_xi(mid))
        })
        .collect()
}

/// Per-cell linear reconstruction of `(rho, vx, vy, q)`: Green-Gauss gradients
/// limited so that face values stay within the neighbouring cell values.
fn reconstruct(prims: &[PrimitiveState], mesh: &SimMesh, g: &GasModel) -> Vec<Vec<PrimitiveState>> {
    let vars = |s: &PrimitiveState| [s.rho, s.v[0], s.v[1], s.q];
    let n = mesh.num_cells();
    let mut out = Vec::with_capacity(n);
    for c in 0..n {
        let uc = vars(&prims[c]);
        let mut grad = [[0.0; 2]; 4];
        let mut lo = uc;
        let mut hi = uc;
        for &e in mesh.cell_edges(c) {
            let edge = &mesh.edges()[e];
            let sign = edge.sign_for(c);
            let other = if edge.left == c { edge.right } else { Some(edge.left) };
            let un = other.map_or(uc, |o| vars(&prims[o]));
            for k in 0..4 {
                let face = 0.5 * (uc[k] + un[k]);
                grad[k][0] += sign * edge.length * edge.normal[0] * face;
                grad[k][1] += sign * edge.length * edge.normal[1] * face;
                lo[k] = lo[k].min(un[k]);
                hi[k] = hi[k].max(un[k]);
            }
        }
        let inv_a = 1.0 / mesh.area(c);
        let xc = mesh.centroid(c);
        let mut phi = [1.0f64; 4];
        let edges = mesh.cell_edges(c);
        let offsets: Vec<Vec2> = edges
            .iter()
            .map(|&e| vec2::sub(mesh.edges()[e].midpoint, xc))
            .collect();
        for k in 0..4 {
            grad[k] = vec2::scale(grad[k], inv_a);
            for d in &offsets {
                let delta = vec2::dot(grad[k], *d);
                let bound = if delta > 0.0 {
                    hi[k] - uc[k]
                } else if delta < 0.0 {
                    lo[k] - uc[k]
                } else {
                    continue;
                };
                phi[k] = phi[k].min((bound / delta).min(1.0));
            }
        }
        let faces: Vec<PrimitiveState> = offsets
            .iter()
            .map(|d| {
                let v: Vec<f64> = (0..4).map(|k| uc[k] + phi[k] * vec2::dot(grad[k], *d)).collect();
                g.state(v[0], [v[1], v[2]], v[3]).unwrap_or(prims[c])
            })
            .collect();
        out.push(faces);
    }
    out
}

fn face_state(
    faces: Option<&[Vec<PrimitiveState>]>,
    prims: &[PrimitiveState],
    mesh: &SimMesh,
    c: usize,
    e: usize,
) -> PrimitiveState {
    match faces {
        None => prims[c],
        Some(f) => {
            let k = mesh.cell_edges(c).iter().position(|&x| x == e).expect("edge of cell");
            f[c][k]
        }
    }
}

fn assemble(
    prims: &[PrimitiveState],
    g: &GasModel,
    mesh: &SimMesh,
    scheme: &Scheme,
    b: &BoundarySpec,
    t_mid: f64,
    record: bool,
) -> Result<Assembly> {
    let faces = match scheme.order {
        Order::First => None,
        Order::SecondMuscl => Some(reconstruct(prims, mesh, g)),
    };
    let faces = faces.as_deref();
    let mut rhs = vec![ConservativeState::ZERO; mesh.num_cells()];
    let mut edge_flux = Vec::with_capacity(mesh.edges().len());
    let mut interfaces = record.then(|| Vec::with_capacity(mesh.edges().len()));
    for (e, edge) in mesh.edges().iter().enumerate() {
        let w = scheme.motion.edge_velocity(edge.midpoint);
        let s = vec2::dot(w, edge.normal);
        let n = edge.normal;
        let ul = face_state(faces, prims, mesh, edge.left, e);
        let (flux, rec) = match edge.right {
            Some(r) => {
                let ur = face_state(faces, prims, mesh, r, e);
                let (flux, state) = if ul == ur {
                    (
                        g.physical_flux(&ul, n) - g.to_conservative(&ul) * s,
                        InterfaceState::Star(ul),
                    )
                } else {
                    moving_edge_flux_with(scheme.flux, &ul, &ur, g, n, w)?
                };
                rhs[r] -= flux * edge.length;
                (flux, EdgeRecord::Interior(state))
            }
            None => {
                let pieces = match &b.rule {
                    BoundaryRule::Prescribed(field) => {
                        let v = mesh.vertices();
                        exterior_pieces(
                            field,
                            v[edge.vertices[0]],
                            v[edge.vertices[1]],
                            scheme.motion,
                            t_mid,
                        )
                    }
                    BoundaryRule::Transmissive => vec![(1.0, prims[edge.left])],
                };
                let flux = pieces.iter().fold(ConservativeState::ZERO, |acc, (frac, u)| {
                    acc + (g.physical_flux(u, n) - g.to_conservative(u) * s) * *frac
                });
                (flux, EdgeRecord::Exterior(pieces))
            }
        };
        rhs[edge.left] += flux * edge.length;
        edge_flux.push(flux);
        if let Some(list) = interfaces.as_mut() {
            list.push(rec);
        }
    }
    Ok(Assembly {
        rhs,
        edge_flux,
        interfaces,
    })
}

fn to_field(
    volumes: Vec<ConservativeState>,
    mesh: &SimMesh,
    a1: f64,
    t1: f64,
    g: GasModel,
) -> Result<FieldState> {
    let cells: Vec<ConservativeState> = volumes
        .into_iter()
        .zip(mesh.areas())
        .map(|(v, &ar)| v * (1.0 / (a1 * ar)))
        .collect();
    for (c, u) in cells.iter().enumerate() {
        g.to_primitive(u).map_err(|e| positivity(e, c, t1))?;
    }
    Ok(FieldState {
        t: t1,
        cells,
        model: g,
    })
}

/// Advances one step. Positivity loss is reported, never repaired.
pub fn step(f: &FieldState, mesh: &SimMesh, dt: f64, scheme: &Scheme, b: &BoundarySpec) -> Result<FieldState> {
    step_recorded(f, mesh, dt, scheme, b, false).map(|(f, _)| f)
}

/// [`step`] that can also return the interface record (first order only).
pub fn step_recorded(
    f: &FieldState,
    mesh: &SimMesh,
    dt: f64,
    scheme: &Scheme,
    b: &BoundarySpec,
    record: bool,
) -> Result<(FieldState, Option<StepRecord>)> {
    let prims = f.primitives()?;
    step_with_prims(f, &prims, mesh, dt, scheme, b, record)
}

fn step_with_prims(
    f: &FieldState,
    prims: &[PrimitiveState],
    mesh: &SimMesh,
    dt: f64,
    scheme: &Scheme,
    b: &BoundarySpec,
    record: bool,
) -> Result<(FieldState, Option<StepRecord>)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt:e}")));
    }
    if cfl_dt_prims(prims, f, mesh, &scheme.with_cfl(1.0)) < dt * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!("time step {dt:e} violates CFL 1")));
    }
    let g = f.model;
    let motion = scheme.motion;
    let (t0, t1, tm) = (f.t, f.t + dt, f.t + 0.5 * dt);
    let (a0, a1, lm) = (motion.area_factor(t0), motion.area_factor(t1), motion.length_factor(tm));
    let v0: Vec<ConservativeState> = f
        .cells
        .iter()
        .zip(mesh.areas())
        .map(|(u, &ar)| *u * (a0 * ar))
        .collect();
    let advance = |v: &[ConservativeState], asm: &Assembly| -> Vec<ConservativeState> {
        v.iter().zip(&asm.rhs).map(|(v, r)| *v - *r * (dt * lm)).collect()
    };
    match scheme.order {
        Order::First => {
            let asm = assemble(prims, &g, mesh, scheme, b, tm, record)?;
            let next = to_field(advance(&v0, &asm), mesh, a1, t1, g)?;
            let rec = asm.interfaces.map(|interfaces| StepRecord {
                t: t0,
                dt,
                area_factor_before: a0,
                area_factor_after: a1,
                length_factor: lm,
                edge_speed: mesh
                    .edges()
                    .iter()
                    .map(|e| vec2::dot(motion.edge_velocity(e.midpoint), e.normal))
                    .collect(),
                edge_flux: asm.edge_flux,
                interfaces,
            });
            Ok((next, rec))
        }
        Order::SecondMuscl => {
            let asm = assemble(prims, &g, mesh, scheme, b, tm, false)?;
            let v1 = advance(&v0, &asm);
            let stage = to_field(v1.clone(), mesh, a1, t1, g)?;
            let asm2 = assemble(&stage.primitives()?, &g, mesh, scheme, b, tm, false)?;
            let v2 = advance(&v1, &asm2);
            let v: Vec<ConservativeState> =
                v0.iter().zip(&v2).map(|(a, b)| (*a + *b) * 0.5).collect();
            Ok((to_field(v, mesh, a1, t1, g)?, None))
        }
    }
}

/// Reference scales for the scaled L1 norm `|rho|/rho + |m|/(rho c) + |E|/(rho c^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormScales {
    pub rho: f64,
    pub speed: f64,
}

impl NormScales {
    /// Area-weighted mean density and sound speed of a field.
    pub fn of(f: &FieldState, mesh: &SimMesh) -> Result<Self> {
        let prims = f.primitives()?;
        let total = mesh.total_area();
        let (mut rho, mut c) = (0.0, 0.0);
        for (s, &a) in prims.iter().zip(mesh.areas()) {
            rho += a * s.rho;
            c += a * f.model.sound_speed(s);
        }
        Ok(NormScales {
            rho: rho / total,
            speed: c / total,
        })
    }

    #[inline]
    pub fn norm(&self, u: &ConservativeState) -> f64 {
        let (r, c) = (self.rho, self.speed);
        u.0[0].abs() / r + (u.0[1].abs() + u.0[2].abs()) / (r * c) + u.0[3].abs() / (r * c * c)
    }

    /// Area-weighted L1 norm over a mesh.
    pub fn field_norm(&self, cells: &[ConservativeState], mesh: &SimMesh) -> f64 {
        cells.iter().zip(mesh.areas()).map(|(u, a)| a * self.norm(u)).sum()
    }
}

/// Change per unit `log t`, relative to the size of the field:
/// `sum A |U_new - U_old| / (log(t_new / t_old) sum A |U_old|)`.
pub fn steadiness_residual(before: &FieldState, after: &FieldState, mesh: &SimMesh, scales: &NormScales) -> f64 {
    let diff: f64 = before
        .cells
        .iter()
        .zip(&after.cells)
        .zip(mesh.areas())
        .map(|((a, b), ar)| ar * scales.norm(&(*b - *a)))
        .sum();
    diff / ((after.t / before.t).ln() * scales.field_norm(&before.cells, mesh))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopCriteria {
    pub t_end: Option<f64>,
    pub residual_tol: Option<f64>,
    pub max_steps: usize,
}

impl StopCriteria {
    pub fn steps(max_steps: usize) -> Self {
        StopCriteria {
            t_end: None,
            residual_tol: None,
            max_steps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    ReachedTime,
    Converged,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    /// Steadiness residual of every step.
    pub residuals: Vec<f64>,
    pub final_state: FieldState,
    pub steps: usize,
    pub wall_clock: Duration,
    pub stop: StopReason,
}

/// One completed step, as shown to a run observer.
#[derive(Clone, Copy)]
pub struct StepView<'a> {
    pub index: usize,
    pub before: &'a FieldState,
    pub after: &'a FieldState,
    pub dt: f64,
    pub residual: f64,
    pub record: Option<&'a StepRecord>,
}

/// Repeats [`step`] with `dt` from [`cfl_dt`] until a stop criterion holds.
pub fn run(
    f0: &FieldState,
    mesh: &SimMesh,
    b: &BoundarySpec,
    stop: &StopCriteria,
    scheme: &Scheme,
) -> Result<RunReport> {
    run_observed(f0, mesh, b, stop, scheme, false, |_| Ok(()))
}

/// [`run`] calling `observe` after every step; with `record` set, first-order
/// steps carry their interface record.
pub fn run_observed(
    f0: &FieldState,
    mesh: &SimMesh,
    b: &BoundarySpec,
    stop: &StopCriteria,
    scheme: &Scheme,
    record: bool,
    mut observe: impl FnMut(&StepView) -> Result<()>,
) -> Result<RunReport> {
    let start = Instant::now();
    if f0.cells.len() != mesh.num_cells() {
        return Err(Error::InvalidParameter("field does not match the mesh".into()));
    }
    b.validate(mesh, f0)?;
    let scales = NormScales::of(f0, mesh)?;
    let mut f = f0.clone();
    let mut residuals = Vec::new();
    let mut reason = StopReason::MaxSteps;
    for index in 0..stop.max_steps {
        if let Some(t_end) = stop.t_end {
            if f.t >= t_end * (1.0 - 1e-14) {
                reason = StopReason::ReachedTime;
                break;
            }
        }
        let prims = f.primitives()?;
        let mut dt = cfl_dt_prims(&prims, &f, mesh, scheme);
        if let Some(t_end) = stop.t_end {
            dt = dt.min(t_end - f.t);
        }
        let (next, rec) = step_with_prims(&f, &prims, mesh, dt, scheme, b, record)?;
        let residual = steadiness_residual(&f, &next, mesh, &scales);
        residuals.push(residual);
        observe(&StepView {
            index,
            before: &f,
            after: &next,
            dt,
            residual,
            record: rec.as_ref(),
        })?;
        f = next;
        if let Some(tol) = stop.residual_tol {
            if residual <= tol {
                reason = StopReason::Converged;
                break;
            }
        }
    }
    if let Some(t_end) = stop.t_end {
        if reason == StopReason::MaxSteps && f.t >= t_end * (1.0 - 1e-14) {
            reason = StopReason::ReachedTime;
        }
    }
    Ok(RunReport {
        steps: residuals.len(),
        residuals,
        final_state: f,
        wall_clock: start.elapsed(),
        stop: reason,
    })
}

/// Refinement schedule for [`run_adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptOptions {
    /// Steps between adaptations.
    pub every: usize,
    /// No adaptation after this many steps.
    pub until: usize,
    /// Jump threshold of [`SimMesh::mark_jumps`].
    pub threshold: f64,
    pub max_level: u8,
    /// Adaptation stops once the mesh has this many cells.
    pub max_cells: usize,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            every: 200,
            until: 1000,
            threshold: 0.05,
            max_level: 3,
            max_cells: 50_000,
        }
    }
}

/// Copies parent averages onto refined cells (conservative: a parent average
/// is the mean of equal children states).
pub fn transfer_to_children(f: &FieldState, parent: &[usize]) -> FieldState {
    FieldState {
        t: f.t,
        cells: parent.iter().map(|&p| f.cells[p]).collect(),
        model: f.model,
    }
}

/// Marks and refines cells at jumps until nothing is marked or limits are hit.
pub fn adapt_to_field(
    f: &FieldState,
    mesh: &SimMesh,
    opts: &AdaptOptions,
) -> Result<(SimMesh, FieldState)> {
    let prims = f.primitives()?;
    let marked = mesh.mark_jumps(&prims, &f.model, opts.threshold, opts.max_level);
    if marked.is_empty() || mesh.num_cells() >= opts.max_cells {
        return Ok((mesh.clone(), f.clone()));
    }
    let (fine, parent) = mesh.refine_mapped(&marked);
    let f = transfer_to_children(f, &parent);
    Ok((fine, f))
}

/// [`run_observed`] with refine-only mesh adaptation every `opts.every` steps.
/// Returns the final mesh with the report; residuals of all segments are
/// concatenated and `observe` sees global step indices.
#[allow(clippy::too_many_arguments)]
pub fn run_adaptive(
    f0: &FieldState,
    mesh: &SimMesh,
    b: &BoundarySpec,
    stop: &StopCriteria,
    scheme: &Scheme,
    opts: &AdaptOptions,
    record: bool,
    mut observe: impl FnMut(&SimMesh, &StepView) -> Result<()>,
) -> Result<(SimMesh, RunReport)> {
    let start = Instant::now();
    let mut mesh = mesh.clone();
    let mut f = f0.clone();
    let mut residuals = Vec::new();
    let stop_reason = loop {
        let done = residuals.len();
        let remaining = stop.max_steps - done;
        let adapting = done < opts.until && mesh.num_cells() < opts.max_cells;
        let segment = if adapting { opts.every.min(remaining) } else { remaining };
        let seg_stop = StopCriteria {
            max_steps: segment,
            ..*stop
        };
        let report = run_observed(&f, &mesh, b, &seg_stop, scheme, record, |v| {
            let view = StepView {
                index: v.index + done,
                ..*v
            };
            observe(&mesh, &view)
        })?;
        residuals.extend(report.residuals);
        f = report.final_state;
        if report.stop != StopReason::MaxSteps || residuals.len() >= stop.max_steps {
            break report.stop;
        }
        if adapting {
            let (m, g) = adapt_to_field(&f, &mesh, opts)?;
            mesh = m;
            f = g;
        }
    };
    Ok((
        mesh,
        RunReport {
            steps: residuals.len(),
            residuals,
            final_state: f,
            wall_clock: start.elapsed(),
            stop: stop_reason,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgrid::{build_domain_mesh, QuadDomain};

    fn air() -> GasModel {
        GasModel::air()
    }

    #[test]
    fn cfl_matches_formula_on_static_grid() {
        let g = air();
        let h = 0.1;
        let mesh = build_domain_mesh(&QuadDomain::rectangle(0.0, 0.0, 1.0, 1.0), 10, 10, None).unwrap();
        let s = g.state_from_pressure(1.0, [3.0, 4.0], 1.0).unwrap();
        let f = FieldState::uniform(&mesh, &s, g, 1.0).unwrap();
        let scheme = Scheme::godunov().with_motion(MeshMotion::Static);
        let a = 5.0 + g.sound_speed(&s);
        let dt = cfl_dt(&f, &mesh, &scheme).unwrap();
        assert!((dt - 0.45 * h / a).abs() < 1e-15);
        let fine = mesh.refine(&(0..mesh.num_cells()).collect::<Vec<_>>());
        let ff = FieldState::uniform(&fine, &s, g, 1.0).unwrap();
        assert!((cfl_dt(&ff, &fine, &scheme).unwrap() - 0.5 * dt).abs() < 1e-15);
    }

    #[test]
    fn uniform_similarity_flow_is_preserved() {
        let g = air();
        let s = g.state_from_temperature(1.19, [1000.0, 0.0], 293.15).unwrap();
        let mesh = build_domain_mesh(&QuadDomain::centered_square(1500.0), 8, 8, None).unwrap();
        let b = BoundarySpec::exterior(ConicalField::uniform(g, s).unwrap());
        let f = FieldState::uniform(&mesh, &s, g, 1.0).unwrap();
        let scheme = Scheme::godunov();
        let dt = cfl_dt(&f, &mesh, &scheme).unwrap();
        let next = step(&f, &mesh, dt, &scheme, &b).unwrap();
        for (a, b) in f.cells.iter().zip(&next.cells) {
            assert!((*a - *b).max_abs() <= 1e-12 * a.max_abs());
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = air();
        let s = g.state_from_pressure(1.0, [0.0, 0.0], 1.0).unwrap();
        let mesh = build_domain_mesh(&QuadDomain::rectangle(0.0, 0.0, 1.0, 1.0), 4, 4, None).unwrap();
        let f = FieldState::uniform(&mesh, &s, g, 1.0).unwrap();
        let scheme = Scheme::godunov().with_motion(MeshMotion::Static);
        let dt = cfl_dt(&f, &mesh, &scheme).unwrap();
        assert!(step(&f, &mesh, 10.0 * dt, &scheme, &BoundarySpec::transmissive()).is_err());
    }

    #[test]
    fn order_parses() {
        assert_eq!("2-muscl".parse::<Order>().unwrap(), Order::SecondMuscl);
        assert!("3".parse::<Order>().is_err());
    }
}
