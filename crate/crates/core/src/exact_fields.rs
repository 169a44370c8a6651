//! Piecewise-constant conical fields, the oblique-shock construction of the
//! steady self-similar wedge solution ("Solution T"), and the jump conditions
//! used to certify it.
//!
//! Solution T, for inflow along `+x` and wedge half-angle `alpha`:
//!
//! ```text
//!   sector            angle range         state
//!   inflow            |theta| >= sigma    free stream
//!   upper post-shock  alpha <= theta < sigma   deflected by +alpha
//!   stagnation        |theta| < alpha     v = 0, p = post-shock p
//!   lower post-shock  -sigma <= theta < -alpha  deflected by -alpha
//! ```
//!
//! The shocks lie on the rays `theta = +-sigma`, the contact discontinuities on
//! `theta = +-alpha`. The field is constant along rays, hence steady and
//! self-similar at once.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::gas::{Flux, GasKind, GasModel, PrimitiveState, SpaceTimeNormal};
use crate::vec2::{self, Vec2};

/// Relative RH residual accepted for an interface.
pub const RH_TOLERANCE: f64 = 1e-10;
/// Relative EEF jump accepted for an interface.
pub const EEF_TOLERANCE: f64 = 1e-12;

/// Field constant on each of a list of half-open angular sectors
/// `[start_k, start_{k+1})` partitioning `[-pi, pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicalField {
    pub model: GasModel,
    starts: Vec<f64>,
    states: Vec<PrimitiveState>,
}

impl ConicalField {
    /// `sectors` holds `(start angle, state)` pairs; the first start must be `-pi`
    /// and starts must be nondecreasing and below `pi`.
    pub fn new(model: GasModel, sectors: Vec<(f64, PrimitiveState)>) -> Result<Self> {
        if sectors.is_empty() || sectors[0].0 != -PI {
            return Err(Error::InvalidParameter(
                "conical field sectors must start at -pi".into(),
            ));
        }
        for w in sectors.windows(2) {
            if !(w[1].0 >= w[0].0) {
                return Err(Error::InvalidParameter(
                    "conical field sectors must be ordered".into(),
                ));
            }
        }
        if !(sectors.last().unwrap().0 < PI) {
            return Err(Error::InvalidParameter("sector start beyond pi".into()));
        }
        for (_, s) in &sectors {
            model.validate(s)?;
        }
        let (starts, states) = sectors.into_iter().unzip();
        Ok(ConicalField {
            model,
            starts,
            states,
        })
    }

    pub fn uniform(model: GasModel, state: PrimitiveState) -> Result<Self> {
        Self::new(model, vec![(-PI, state)])
    }

    /// `(start, end, state)` for every sector, in angular order.
    pub fn sectors(&self) -> impl Iterator<Item = (f64, f64, &PrimitiveState)> + '_ {
        self.starts.iter().enumerate().map(move |(k, &a)| {
            let b = self.starts.get(k + 1).copied().unwrap_or(PI);
            (a, b, &self.states[k])
        })
    }

    pub fn states(&self) -> &[PrimitiveState] {
        &self.states
    }

    /// Sector index containing polar angle `theta`.
    pub fn sector_index(&self, theta: f64) -> usize {
        let theta = if theta >= PI { theta - 2.0 * PI } else { theta };
        self.starts.partition_point(|&a| a <= theta).saturating_sub(1)
    }

    /// Angles where the state changes (sector starts other than `-pi`, plus `-pi`
    /// itself when the first and last sectors differ).
    pub fn discontinuity_angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 1..self.starts.len() {
            if self.states[k] != self.states[k - 1] && self.starts[k] > self.starts[k - 1] {
                out.push(self.starts[k]);
            }
        }
        if self.states.len() > 1 && self.states[0] != *self.states.last().unwrap() {
            out.push(-PI);
        }
        out
    }

    /// Value at similarity coordinate `xi`.
    #[inline]
    pub fn at_xi(&self, xi: Vec2) -> &PrimitiveState {
        &self.states[self.sector_index(xi[1].atan2(xi[0]))]
    }

    /// Value at time `t` and position `x`. Depends only on the direction of `x`.
    pub fn evaluate(&self, t: f64, x: Vec2) -> &PrimitiveState {
        debug_assert!(t > 0.0);
        self.at_xi([x[0] / t, x[1] / t])
    }

    /// Largest `|v| + c` over all sectors.
    pub fn max_signal_speed(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.speed() + self.model.sound_speed(s))
            .fold(0.0, f64::max)
    }
}

/// Deflection of a straight shock at angle `beta` to the inflow direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObliqueShock {
    /// Shock angle measured from the inflow direction, counterclockwise.
    pub sigma: f64,
    /// Post-shock state, deflected counterclockwise by the requested angle.
    pub post: PrimitiveState,
}

/// Normal-shock jump for upstream density `rho1`, pressure `p1` and normal
/// velocity `un1` (> sound speed). Returns `(rho2, un2)`.
pub fn normal_shock(g: &GasModel, upstream: &PrimitiveState, un1: f64) -> (f64, f64) {
    let rho1 = upstream.rho;
    let p1 = g.pressure(upstream);
    match g.kind {
        GasKind::Nonisentropic => {
            let c1 = g.sound_speed(upstream);
            let m2 = (un1 / c1).powi(2);
            let rho2 = rho1 * (g.gamma + 1.0) * m2 / ((g.gamma - 1.0) * m2 + 2.0);
            (rho2, rho1 * un1 / rho2)
        }
        GasKind::Isentropic => {
            // h(rho) = kappa rho^gamma - p1 - m^2 (1/rho1 - 1/rho) is convex with
            // roots rho1 and rho2 > rho1; Newton from the right converges monotonically.
            let m = rho1 * un1;
            let h = |rho: f64| {
                (
                    g.kappa * rho.powf(g.gamma) - p1 - m * m * (1.0 / rho1 - 1.0 / rho),
                    g.kappa * g.gamma * rho.powf(g.gamma - 1.0) - m * m / (rho * rho),
                )
            };
            let mut rho = 2.0 * rho1;
            while h(rho).0 <= 0.0 {
                rho *= 2.0;
            }
            for _ in 0..200 {
                let (f, df) = h(rho);
                let next = rho - f / df;
                if !(next < rho) || next <= rho1 {
                    break;
                }
                rho = next;
            }
            (rho, m / rho)
        }
    }
}

/// Deflection angle produced by a shock at angle `beta` in a stream of speed `speed`.
pub fn deflection_angle(g: &GasModel, inflow: &PrimitiveState, beta: f64) -> f64 {
    let speed = inflow.speed();
    let un1 = speed * beta.sin();
    let vt = speed * beta.cos();
    if un1 <= g.sound_speed(inflow) {
        return 0.0;
    }
    let (_, un2) = normal_shock(g, inflow, un1);
    beta - un2.atan2(vt)
}

/// Shock angle of maximal deflection and that deflection.
pub fn max_deflection(g: &GasModel, inflow: &PrimitiveState) -> (f64, f64) {
    let mu = (1.0 / g.mach(inflow)).asin();
    // golden-section search for the single interior maximum
    let invphi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (mu, FRAC_PI_2);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (deflection_angle(g, inflow, c), deflection_angle(g, inflow, d));
    for _ in 0..200 {
        if b - a < 1e-13 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = deflection_angle(g, inflow, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = deflection_angle(g, inflow, d);
        }
    }
    let beta = 0.5 * (a + b);
    (beta, deflection_angle(g, inflow, beta))
}

/// Post-shock state behind a shock at angle `beta` for inflow along `+x`.
fn post_shock_state(g: &GasModel, inflow: &PrimitiveState, beta: f64) -> PrimitiveState {
    let speed = inflow.speed();
    let un1 = speed * beta.sin();
    let vt = speed * beta.cos();
    let (rho2, un2) = normal_shock(g, inflow, un1);
    // normal from the inflow side into the post-shock side, tangent along the ray
    let n = [beta.sin(), -beta.cos()];
    let t = [beta.cos(), beta.sin()];
    let v = vec2::add(vec2::scale(n, un2), vec2::scale(t, vt));
    let q = match g.kind {
        GasKind::Nonisentropic => {
            let p1 = g.pressure(inflow);
            let m = inflow.rho * un1;
            let p2 = p1 + m * (un1 - un2);
            p2 / ((g.gamma - 1.0) * rho2)
        }
        GasKind::Isentropic => g.isentropic_internal_energy(rho2),
    };
    PrimitiveState { rho: rho2, v, q }
}

/// Weak attached oblique shock turning an inflow along `+x` counterclockwise by `alpha`.
pub fn oblique_shock(inflow: &PrimitiveState, alpha: f64, g: &GasModel) -> Result<ObliqueShock> {
    g.validate(inflow)?;
    if !(inflow.v[0] > 0.0 && inflow.v[1] == 0.0) {
        return Err(Error::InvalidParameter(
            "inflow must move along +x".into(),
        ));
    }
    if !(alpha >= 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "deflection angle must lie in [0, pi/2), got {alpha}"
        )));
    }
    let mach = g.mach(inflow);
    if !(mach > 1.0) {
        return Err(Error::SubsonicInflow { mach });
    }
    let mu = (1.0 / mach).asin();
    if alpha == 0.0 {
        return Ok(ObliqueShock {
            sigma: mu,
            post: *inflow,
        });
    }
    let (beta_max, theta_max) = max_deflection(g, inflow);
    if alpha > theta_max {
        return Err(Error::Detachment {
            alpha_deg: alpha.to_degrees(),
            max_deg: theta_max.to_degrees(),
            mach,
        });
    }
    // deflection increases on the weak branch (mu, beta_max); bisect to full precision
    let (mut lo, mut hi) = (mu, beta_max);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if deflection_angle(g, inflow, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = if (deflection_angle(g, inflow, lo) - alpha).abs()
        <= (deflection_angle(g, inflow, hi) - alpha).abs()
    {
        lo
    } else {
        hi
    };
    Ok(ObliqueShock {
        sigma,
        post: post_shock_state(g, inflow, sigma),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterfaceKind {
    Shock,
    Contact,
}

impl InterfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            InterfaceKind::Shock => "shock",
            InterfaceKind::Contact => "contact",
        }
    }
}

/// A steady discontinuity along a ray from the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceSpec {
    pub name: &'static str,
    pub angle: f64,
    pub normal: SpaceTimeNormal,
    pub minus: PrimitiveState,
    pub plus: PrimitiveState,
    pub kind: InterfaceKind,
}

impl InterfaceSpec {
    pub fn direction(&self) -> Vec2 {
        vec2::unit_from_angle(self.angle)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTSpec {
    pub model: GasModel,
    pub inflow: PrimitiveState,
    pub alpha: f64,
    pub sigma: f64,
    /// Upper post-shock state; the lower one is its mirror image.
    pub post_shock: PrimitiveState,
    pub stagnation: PrimitiveState,
    pub field: ConicalField,
}

fn mirror(s: &PrimitiveState) -> PrimitiveState {
    PrimitiveState {
        v: [s.v[0], -s.v[1]],
        ..*s
    }
}

/// Assembles Solution T from its five defining values. Used by the builder
/// and when reading a stored spec back.
pub fn solution_t_from_parts(
    model: GasModel,
    inflow: PrimitiveState,
    alpha: f64,
    sigma: f64,
    post_shock: PrimitiveState,
    stagnation: PrimitiveState,
) -> Result<SolutionTSpec> {
    if !(alpha >= 0.0 && sigma >= alpha && sigma < PI) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= alpha <= sigma < pi, got alpha = {alpha}, sigma = {sigma}"
        )));
    }
    let field = ConicalField::new(
        model,
        vec![
            (-PI, inflow),
            (-sigma, mirror(&post_shock)),
            (-alpha, stagnation),
            (alpha, post_shock),
            (sigma, inflow),
        ],
    )?;
    Ok(SolutionTSpec {
        model,
        inflow,
        alpha,
        sigma,
        post_shock,
        stagnation,
        field,
    })
}

/// Builds Solution T. `stagnation_density` defaults to the post-shock density;
/// for the isentropic model the density is fixed by the pressure and may not be overridden.
pub fn build_solution_t(
    inflow: &PrimitiveState,
    alpha: f64,
    g: &GasModel,
    stagnation_density: Option<f64>,
) -> Result<SolutionTSpec> {
    let shock = oblique_shock(inflow, alpha, g)?;
    let post = shock.post;
    let p_post = g.pressure(&post);
    let stagnation = match (g.kind, stagnation_density) {
        (GasKind::Isentropic, Some(rho)) if rho != post.rho => {
            return Err(Error::InvalidParameter(
                "isentropic stagnation density is fixed by the post-shock pressure".into(),
            ))
        }
        (_, rho) => {
            let rho = rho.unwrap_or(post.rho);
            g.state_from_pressure(rho, [0.0, 0.0], p_post)?
        }
    };
    solution_t_from_parts(*g, *inflow, alpha, shock.sigma, post, stagnation)
}

impl SolutionTSpec {
    pub fn lower_post_shock(&self) -> PrimitiveState {
        mirror(&self.post_shock)
    }

    /// The four discontinuity rays with normals pointing from the minus to the plus side.
    pub fn interfaces(&self) -> Vec<InterfaceSpec> {
        let (a, s) = (self.alpha, self.sigma);
        let lower = self.lower_post_shock();
        let normal = |n: Vec2| SpaceTimeNormal::spatial(n).expect("unit normal");
        vec![
            InterfaceSpec {
                name: "upper_shock",
                angle: s,
                normal: normal([s.sin(), -s.cos()]),
                minus: self.inflow,
                plus: self.post_shock,
                kind: InterfaceKind::Shock,
            },
            InterfaceSpec {
                name: "upper_contact",
                angle: a,
                normal: normal([a.sin(), -a.cos()]),
                minus: self.post_shock,
                plus: self.stagnation,
                kind: InterfaceKind::Contact,
            },
            InterfaceSpec {
                name: "lower_contact",
                angle: -a,
                normal: normal([a.sin(), a.cos()]),
                minus: lower,
                plus: self.stagnation,
                kind: InterfaceKind::Contact,
            },
            InterfaceSpec {
                name: "lower_shock",
                angle: -s,
                normal: normal([s.sin(), s.cos()]),
                minus: self.inflow,
                plus: lower,
                kind: InterfaceKind::Shock,
            },
        ]
    }

    /// Angles of all discontinuity rays, ascending.
    pub fn ray_angles(&self) -> [f64; 4] {
        [-self.sigma, -self.alpha, self.alpha, self.sigma]
    }

    /// Whether `xi` lies strictly inside the stagnation wedge.
    pub fn in_wedge(&self, xi: Vec2) -> bool {
        xi[1].atan2(xi[0]).abs() < self.alpha
    }
}

/// Left side of the Rankine-Hugoniot condition `(u+ - u-) n_t + (f(u+) - f(u-)) . n`.
pub fn rh_residual(
    u_minus: &PrimitiveState,
    u_plus: &PrimitiveState,
    n: &SpaceTimeNormal,
    g: &GasModel,
) -> Flux {
    let du = g.to_conservative(u_plus) - g.to_conservative(u_minus);
    let df = g.physical_flux(u_plus, n.n) - g.physical_flux(u_minus, n.n);
    du * n.n_t + df
}

/// [`rh_residual`] relative to the largest flux magnitude of the two states.
pub fn rh_relative_residual(
    u_minus: &PrimitiveState,
    u_plus: &PrimitiveState,
    n: &SpaceTimeNormal,
    g: &GasModel,
) -> f64 {
    let r = rh_residual(u_minus, u_plus, n, g);
    let scale = [u_minus, u_plus]
        .iter()
        .map(|u| {
            g.physical_flux(u, n.n)
                .max_abs()
                .max(n.n_t.abs() * g.to_conservative(u).max_abs())
        })
        .fold(0.0, f64::max);
    if scale > 0.0 {
        r.max_abs() / scale
    } else {
        r.max_abs()
    }
}

/// Left side of the entropy jump inequality `(eta+ - eta-) n_t + (psi+ - psi-) . n`.
pub fn eef_jump_residual(
    u_minus: &PrimitiveState,
    u_plus: &PrimitiveState,
    n: &SpaceTimeNormal,
    g: &GasModel,
) -> f64 {
    (g.entropy(u_plus) - g.entropy(u_minus)) * n.n_t
        + (g.entropy_flux(u_plus, n.n) - g.entropy_flux(u_minus, n.n))
}

/// Magnitude against which entropy jumps are measured: the larger of
/// `(|eta| + eta_ref)(|v| + c)` over both states, where `eta_ref` is the density
/// (nonisentropic, entropy is per unit mass and dimensionless) or the pressure.
pub fn eef_scale(u_minus: &PrimitiveState, u_plus: &PrimitiveState, g: &GasModel) -> f64 {
    [u_minus, u_plus]
        .iter()
        .map(|u| {
            let reference = match g.kind {
                GasKind::Nonisentropic => u.rho,
                GasKind::Isentropic => g.pressure(u),
            };
            (g.entropy(u).abs() + reference) * (u.speed() + g.sound_speed(u))
        })
        .fold(0.0, f64::max)
}

/// Whether the normal velocity does not increase across the discontinuity
/// (normal `n` points from the minus to the plus side).
pub fn entropy_jump_admissible(u_minus: &PrimitiveState, u_plus: &PrimitiveState, n: Vec2) -> bool {
    let jump = vec2::dot(vec2::sub(u_plus.v, u_minus.v), n);
    jump <= 1e-12 * u_minus.speed().max(u_plus.speed())
}

/// Verification outcome for one interface.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceCheck {
    pub name: &'static str,
    pub kind: InterfaceKind,
    pub angle: f64,
    pub rh_relative: f64,
    pub eef_jump: f64,
    pub eef_relative: f64,
    pub normal_velocity_jump: f64,
    pub admissible: bool,
    /// Contacts only: relative pressure mismatch and largest `|v . n|`.
    pub contact_pressure_mismatch: f64,
    pub contact_normal_velocity: f64,
    pub passed: bool,
}

pub fn check_interface(spec: &InterfaceSpec, g: &GasModel) -> InterfaceCheck {
    let (m, p, n) = (&spec.minus, &spec.plus, &spec.normal);
    let rh_relative = rh_relative_residual(m, p, n, g);
    let eef_jump = eef_jump_residual(m, p, n, g);
    let eef_relative = eef_jump / eef_scale(m, p, g);
    let normal_velocity_jump = vec2::dot(vec2::sub(p.v, m.v), n.n);
    let admissible = entropy_jump_admissible(m, p, n.n);
    let (mut mismatch, mut vn) = (0.0, 0.0);
    let mut contact_ok = true;
    if spec.kind == InterfaceKind::Contact {
        let (pm, pp) = (g.pressure(m), g.pressure(p));
        mismatch = (pp - pm).abs() / pm.max(pp);
        vn = vec2::dot(m.v, n.n).abs().max(vec2::dot(p.v, n.n).abs());
        let vscale = m.speed().max(p.speed()) + g.sound_speed(m);
        contact_ok = mismatch <= RH_TOLERANCE && vn <= RH_TOLERANCE * vscale;
    }
    let passed = rh_relative <= RH_TOLERANCE
        && eef_relative <= EEF_TOLERANCE
        && admissible
        && contact_ok;
    InterfaceCheck {
        name: spec.name,
        kind: spec.kind,
        angle: spec.angle,
        rh_relative,
        eef_jump,
        eef_relative,
        normal_velocity_jump,
        admissible,
        contact_pressure_mismatch: mismatch,
        contact_normal_velocity: vn,
        passed,
    }
}

/// Checks every interface of a Solution T description.
pub fn verify_solution_t(spec: &SolutionTSpec) -> Vec<InterfaceCheck> {
    spec.interfaces()
        .iter()
        .map(|i| check_interface(i, &spec.model))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::CELSIUS_OFFSET;

    fn wedge_inflow(g: &GasModel) -> PrimitiveState {
        g.state_from_temperature(1.19, [1000.0, 0.0], 20.0 + CELSIUS_OFFSET)
            .unwrap()
    }

    fn models() -> Vec<GasModel> {
        let iso = GasModel::isentropic(1.4, 1.0)
            .unwrap()
            .with_calibrated_kappa(1.19, 293.15)
            .unwrap();
        vec![GasModel::air(), iso]
    }

    #[test]
    fn zero_deflection_gives_mach_wave() {
        let g = GasModel::air();
        let inflow = wedge_inflow(&g);
        let s = oblique_shock(&inflow, 0.0, &g).unwrap();
        assert_eq!(s.post, inflow);
        assert!((s.sigma - (1.0 / g.mach(&inflow)).asin()).abs() < 1e-15);
    }

    #[test]
    fn post_shock_is_deflected_by_alpha() {
        for g in models() {
            let inflow = wedge_inflow(&g);
            let alpha = 10f64.to_radians();
            let s = oblique_shock(&inflow, alpha, &g).unwrap();
            let angle = s.post.v[1].atan2(s.post.v[0]);
            assert!((angle - alpha).abs() < 1e-14, "{angle} vs {alpha}");
            let n = SpaceTimeNormal::spatial([s.sigma.sin(), -s.sigma.cos()]).unwrap();
            assert!(rh_relative_residual(&inflow, &s.post, &n, &g) < 1e-14);
        }
    }

    #[test]
    fn subsonic_and_detached_inflow_fail() {
        let g = GasModel::air();
        let slow = g.state_from_temperature(1.0, [200.0, 0.0], 293.15).unwrap();
        assert!(matches!(
            oblique_shock(&slow, 0.1, &g),
            Err(Error::SubsonicInflow { .. })
        ));
        let inflow = wedge_inflow(&g);
        assert!(matches!(
            oblique_shock(&inflow, 50f64.to_radians(), &g),
            Err(Error::Detachment { .. })
        ));
    }

    #[test]
    fn evaluation_is_ray_constant_and_mirror_symmetric() {
        let g = GasModel::air();
        let spec = build_solution_t(&wedge_inflow(&g), 10f64.to_radians(), &g, None).unwrap();
        let f = &spec.field;
        for &(x, y) in &[(3.0, 0.2), (1.0, 0.4), (-2.0, 0.5), (5.0, 1.1), (0.3, -0.01)] {
            let a = f.evaluate(1.0, [x, y]);
            for r in [0.25, 3.0, 1e4] {
                assert_eq!(a, f.evaluate(r, [r * x, r * y]));
            }
            let b = f.evaluate(1.0, [x, -y]);
            assert_eq!((a.rho, a.v[0], a.v[1], a.q), (b.rho, b.v[0], -b.v[1], b.q));
        }
        assert_eq!(*f.evaluate(1.0, [-1.0, 0.0]), spec.inflow);
        assert_eq!(*f.evaluate(1.0, [1.0, 0.05]), spec.stagnation);
        assert_eq!(spec.stagnation.v, [0.0, 0.0]);
    }

    #[test]
    fn stagnation_pressure_matches_post_shock() {
        for g in models() {
            let spec = build_solution_t(&wedge_inflow(&g), 10f64.to_radians(), &g, None).unwrap();
            let (a, b) = (g.pressure(&spec.stagnation), g.pressure(&spec.post_shock));
            assert!((a - b).abs() <= 1e-15 * b);
        }
        let g = GasModel::air();
        let spec = build_solution_t(&wedge_inflow(&g), 10f64.to_radians(), &g, Some(3.0)).unwrap();
        assert_eq!(spec.stagnation.rho, 3.0);
        assert!(verify_solution_t(&spec).iter().all(|c| c.passed));
    }

    #[test]
    fn rh_residual_examples() {
        let g = GasModel::air();
        let u = g.state(1.2, [3.0, 1.0], 2.0).unwrap();
        let n = SpaceTimeNormal::new(0.3, [1.0, 2.0]).unwrap();
        assert_eq!(rh_residual(&u, &u, &n, &g), Flux::ZERO);
        assert_eq!(eef_jump_residual(&u, &u, &n, &g), 0.0);
        // contact candidate with mismatched pressures
        let a = g.state_from_pressure(1.0, [0.0, 5.0], 2.0).unwrap();
        let b = g.state_from_pressure(3.0, [0.0, -1.0], 2.5).unwrap();
        let r = rh_residual(&a, &b, &SpaceTimeNormal::spatial([1.0, 0.0]).unwrap(), &g);
        assert!((r[1] - 0.5).abs() < 1e-15 && r[0] == 0.0 && r[2] == 0.0 && r[3] == 0.0);
    }

    #[test]
    fn shock_pair_admissibility_is_orientation_sensitive() {
        for g in models() {
            let spec = build_solution_t(&wedge_inflow(&g), 10f64.to_radians(), &g, None).unwrap();
            let shock = spec.interfaces()[0];
            let n = shock.normal;
            assert!(entropy_jump_admissible(&shock.minus, &shock.plus, n.n));
            assert!(!entropy_jump_admissible(&shock.plus, &shock.minus, n.n));
            assert!(eef_jump_residual(&shock.minus, &shock.plus, &n, &g) < 0.0);
            assert!(eef_jump_residual(&shock.plus, &shock.minus, &n, &g) > 0.0);
        }
    }

    #[test]
    fn conical_field_validation() {
        let g = GasModel::air();
        let s = g.state(1.0, [0.0, 0.0], 1.0).unwrap();
        assert!(ConicalField::new(g, vec![(0.0, s)]).is_err());
        assert!(ConicalField::new(g, vec![(-PI, s), (1.0, s), (0.5, s)]).is_err());
        let f = ConicalField::uniform(g, s).unwrap();
        assert_eq!(f.sector_index(PI), 0);
        assert!(f.discontinuity_angles().is_empty());
    }
}
