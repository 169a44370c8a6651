//! Exact Riemann solver for both gas models, numerical fluxes across
//! (possibly moving) edges, and limited MUSCL reconstruction.
//!
//! States are rotated into the frame `(n, perp(n))` of the edge. The
//! tangential velocity is carried passively and jumps only at the middle
//! wave; for the isentropic model that wave is a pure shear layer (the density
//! is the same on both sides).

use crate::error::{Error, Result};
use crate::gas::{Flux, GasKind, GasModel, PrimitiveState};
use crate::vec2::{self, Vec2};

/// Newton stops once the relative pressure update drops below this.
const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

/// An outer wave of the fan. For shocks `head == tail == shock speed`; for
/// rarefactions `head` is the edge facing the unperturbed state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wave {
    pub kind: WaveKind,
    pub head: f64,
    pub tail: f64,
}

impl Wave {
    pub fn speed(&self) -> f64 {
        self.head
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveFan {
    pub model: GasModel,
    /// Edge normal; `left` and `right` are expressed in the `(n, perp(n))` frame.
    pub normal: Vec2,
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub star_p: f64,
    pub star_v: f64,
    pub star_left_rho: f64,
    pub star_right_rho: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
    pub contact_speed: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Side {
    rho: f64,
    p: f64,
    c: f64,
}

impl Side {
    fn of(g: &GasModel, s: &PrimitiveState) -> Self {
        let p = g.pressure(s);
        Side {
            rho: s.rho,
            p,
            c: (g.gamma * p / s.rho).sqrt(),
        }
    }
}

/// Velocity change `f_K(p)` across the wave facing side `K` and its derivative.
fn wave_function(g: &GasModel, k: &Side, p: f64) -> (f64, f64) {
    let gamma = g.gamma;
    if p > k.p {
        match g.kind {
            GasKind::Nonisentropic => {
                let a = 2.0 / ((gamma + 1.0) * k.rho);
                let b = (gamma - 1.0) / (gamma + 1.0) * k.p;
                let sq = (a / (p + b)).sqrt();
                let dp = p - k.p;
                (dp * sq, sq * (1.0 - 0.5 * dp / (b + p)))
            }
            GasKind::Isentropic => {
                let rho = (p / g.kappa).powf(1.0 / gamma);
                let dp = p - k.p;
                let dvol = 1.0 / k.rho - 1.0 / rho;
                let f = (dp * dvol).sqrt();
                if f > 0.0 {
                    let c2 = gamma * p / rho;
                    let dg = dvol + dp / (rho * rho * c2);
                    (f, 0.5 * dg / f)
                } else {
                    (0.0, 1.0 / (k.rho * k.c))
                }
            }
        }
    } else {
        let r = p / k.p;
        let e = (gamma - 1.0) / (2.0 * gamma);
        let f = 2.0 * k.c / (gamma - 1.0) * (r.powf(e) - 1.0);
        let df = r.powf(-(gamma + 1.0) / (2.0 * gamma)) / (k.rho * k.c);
        (f, df)
    }
}

/// Residual `f_L(p) + f_R(p) + (v_R - v_L)` of the star-pressure equation.
/// Exposed for verification; the root is the star pressure.
pub fn pressure_function(
    g: &GasModel,
    left: &PrimitiveState,
    right: &PrimitiveState,
    normal_velocity_jump: f64,
    p: f64,
) -> f64 {
    let l = Side::of(g, left);
    let r = Side::of(g, right);
    wave_function(g, &l, p).0 + wave_function(g, &r, p).0 + normal_velocity_jump
}

/// Largest normal velocity jump `v_R - v_L` that does not create vacuum.
pub fn vacuum_bound(g: &GasModel, left: &PrimitiveState, right: &PrimitiveState) -> f64 {
    2.0 * (g.sound_speed(left) + g.sound_speed(right)) / (g.gamma - 1.0)
}

/// Solves the Riemann problem across direction `n` (unit) between lab-frame states.
pub fn solve_exact(
    left: &PrimitiveState,
    right: &PrimitiveState,
    g: &GasModel,
    n: Vec2,
) -> Result<WaveFan> {
    g.validate(left)?;
    g.validate(right)?;
    let ul = PrimitiveState {
        v: vec2::to_frame(left.v, n),
        ..*left
    };
    let ur = PrimitiveState {
        v: vec2::to_frame(right.v, n),
        ..*right
    };
    let l = Side::of(g, &ul);
    let r = Side::of(g, &ur);
    let dv = ur.v[0] - ul.v[0];
    let bound = 2.0 * (l.c + r.c) / (g.gamma - 1.0);
    if dv >= bound {
        return Err(Error::Vacuum { jump: dv, bound });
    }

    let phi = |p: f64| {
        let (fl, dfl) = wave_function(g, &l, p);
        let (fr, dfr) = wave_function(g, &r, p);
        (fl + fr + dv, dfl + dfr)
    };

    // phi is increasing and concave with phi(0+) < 0, so [lo, hi] brackets the root.
    let mut lo = 0.0;
    let mut hi = l.p.max(r.p);
    while phi(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut p = (0.5 * (l.p + r.p)).clamp(lo, hi);
    if !(p > lo && p < hi) {
        p = 0.5 * (lo + hi);
    }
    let mut iterations = 0;
    for it in 0..NEWTON_MAX_ITER {
        iterations = it + 1;
        let (f, df) = phi(p);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let mut next = p - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - p).abs();
        p = next;
        if step <= NEWTON_TOL * p || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }

    let (fl, _) = wave_function(g, &l, p);
    let (fr, _) = wave_function(g, &r, p);
    let star_v = 0.5 * (ul.v[0] + ur.v[0]) + 0.5 * (fr - fl);
    let gamma = g.gamma;

    let star_rho = |k: &Side| -> f64 {
        match g.kind {
            GasKind::Isentropic => (p / g.kappa).powf(1.0 / gamma),
            GasKind::Nonisentropic => {
                let ratio = p / k.p;
                if p > k.p {
                    let gg = (gamma - 1.0) / (gamma + 1.0);
                    k.rho * (ratio + gg) / (gg * ratio + 1.0)
                } else {
                    k.rho * ratio.powf(1.0 / gamma)
                }
            }
        }
    };
    let star_left_rho = star_rho(&l);
    let star_right_rho = star_rho(&r);

    // Speed of the shock facing side k relative to that side's gas.
    let shock_relative_speed = |k: &Side, star_rho: f64| -> f64 {
        match g.kind {
            GasKind::Nonisentropic => {
                k.c * ((gamma + 1.0) / (2.0 * gamma) * p / k.p + (gamma - 1.0) / (2.0 * gamma)).sqrt()
            }
            GasKind::Isentropic => {
                let dvol = 1.0 / k.rho - 1.0 / star_rho;
                let dp = p - k.p;
                if dp > 1e-14 * k.p && dvol > 0.0 {
                    (dp / dvol).sqrt() / k.rho
                } else {
                    k.c
                }
            }
        }
    };

    let left_wave = if p > l.p {
        let s = ul.v[0] - shock_relative_speed(&l, star_left_rho);
        Wave {
            kind: WaveKind::Shock,
            head: s,
            tail: s,
        }
    } else {
        let c_star = l.c * (p / l.p).powf((gamma - 1.0) / (2.0 * gamma));
        Wave {
            kind: WaveKind::Rarefaction,
            head: ul.v[0] - l.c,
            tail: star_v - c_star,
        }
    };
    let right_wave = if p > r.p {
        let s = ur.v[0] + shock_relative_speed(&r, star_right_rho);
        Wave {
            kind: WaveKind::Shock,
            head: s,
            tail: s,
        }
    } else {
        let c_star = r.c * (p / r.p).powf((gamma - 1.0) / (2.0 * gamma));
        Wave {
            kind: WaveKind::Rarefaction,
            head: ur.v[0] + r.c,
            tail: star_v + c_star,
        }
    };

    Ok(WaveFan {
        model: *g,
        normal: n,
        left: ul,
        right: ur,
        star_p: p,
        star_v,
        star_left_rho,
        star_right_rho,
        left_wave,
        right_wave,
        contact_speed: star_v,
        iterations,
    })
}

impl WaveFan {
    /// Slowest and fastest signal speeds of the fan.
    pub fn speed_range(&self) -> (f64, f64) {
        (self.left_wave.head, self.right_wave.head)
    }

    fn state_with_pressure(&self, rho: f64, v: Vec2, p: f64) -> PrimitiveState {
        let g = &self.model;
        let q = match g.kind {
            GasKind::Nonisentropic => p / ((g.gamma - 1.0) * rho),
            GasKind::Isentropic => g.isentropic_internal_energy(rho),
        };
        PrimitiveState { rho, v, q }
    }

    /// State at `x/t = xi`, in the normal frame.
    pub fn sample_in_frame(&self, xi: f64) -> PrimitiveState {
        let g = &self.model;
        let gamma = g.gamma;
        if xi <= self.contact_speed {
            let k = &self.left;
            let side = Side::of(g, k);
            let vt = k.v[1];
            match self.left_wave.kind {
                WaveKind::Shock => {
                    if xi < self.left_wave.head {
                        *k
                    } else {
                        self.state_with_pressure(self.star_left_rho, [self.star_v, vt], self.star_p)
                    }
                }
                WaveKind::Rarefaction => {
                    if xi < self.left_wave.head {
                        *k
                    } else if xi > self.left_wave.tail {
                        self.state_with_pressure(self.star_left_rho, [self.star_v, vt], self.star_p)
                    } else {
                        let c = 2.0 / (gamma + 1.0) * (side.c + 0.5 * (gamma - 1.0) * (k.v[0] - xi));
                        let ratio = c / side.c;
                        let rho = side.rho * ratio.powf(2.0 / (gamma - 1.0));
                        let p = side.p * ratio.powf(2.0 * gamma / (gamma - 1.0));
                        self.state_with_pressure(rho, [xi + c, vt], p)
                    }
                }
            }
        } else {
            let k = &self.right;
            let side = Side::of(g, k);
            let vt = k.v[1];
            match self.right_wave.kind {
                WaveKind::Shock => {
                    if xi > self.right_wave.head {
                        *k
                    } else {
                        self.state_with_pressure(self.star_right_rho, [self.star_v, vt], self.star_p)
                    }
                }
                WaveKind::Rarefaction => {
                    if xi > self.right_wave.head {
                        *k
                    } else if xi < self.right_wave.tail {
                        self.state_with_pressure(self.star_right_rho, [self.star_v, vt], self.star_p)
                    } else {
                        let c = 2.0 / (gamma + 1.0) * (side.c - 0.5 * (gamma - 1.0) * (k.v[0] - xi));
                        let ratio = c / side.c;
                        let rho = side.rho * ratio.powf(2.0 / (gamma - 1.0));
                        let p = side.p * ratio.powf(2.0 * gamma / (gamma - 1.0));
                        self.state_with_pressure(rho, [xi - c, vt], p)
                    }
                }
            }
        }
    }

    /// State at `x/t = xi` (measured along the normal), in lab-frame velocities.
    pub fn sample(&self, xi: f64) -> PrimitiveState {
        let s = self.sample_in_frame(xi);
        PrimitiveState {
            v: vec2::from_frame(s.v, self.normal),
            ..s
        }
    }
}

/// Godunov flux `f(u*) . n` with `u*` the exact Riemann state at `x/t = 0`.
pub fn godunov_flux(
    left: &PrimitiveState,
    right: &PrimitiveState,
    g: &GasModel,
    n: Vec2,
) -> Result<Flux> {
    let fan = solve_exact(left, right, g, n)?;
    Ok(g.physical_flux(&fan.sample(0.0), n))
}

/// Local Lax-Friedrichs flux.
pub fn rusanov_flux(left: &PrimitiveState, right: &PrimitiveState, g: &GasModel, n: Vec2) -> Flux {
    moving_rusanov(left, right, g, n, 0.0).0
}

fn moving_rusanov(
    left: &PrimitiveState,
    right: &PrimitiveState,
    g: &GasModel,
    n: Vec2,
    s: f64,
) -> (Flux, f64) {
    let ul = g.to_conservative(left);
    let ur = g.to_conservative(right);
    let hl = g.physical_flux(left, n) - ul * s;
    let hr = g.physical_flux(right, n) - ur * s;
    let lambda = (vec2::dot(left.v, n) - s).abs() + g.sound_speed(left);
    let lambda = lambda.max((vec2::dot(right.v, n) - s).abs() + g.sound_speed(right));
    ((hl + hr) * 0.5 - (ur - ul) * (0.5 * lambda), lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FluxKind {
    Godunov,
    Rusanov,
}

impl std::str::FromStr for FluxKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "godunov" => Ok(FluxKind::Godunov),
            "rusanov" => Ok(FluxKind::Rusanov),
            other => Err(Error::InvalidParameter(format!("unknown flux `{other}`"))),
        }
    }
}

impl FluxKind {
    pub fn name(self) -> &'static str {
        match self {
            FluxKind::Godunov => "godunov",
            FluxKind::Rusanov => "rusanov",
        }
    }
}

/// What a numerical flux evaluation saw at the interface; enough to rebuild
/// the matching numerical entropy flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InterfaceState {
    /// Lab-frame Riemann state sampled on the moving edge.
    Star(PrimitiveState),
    /// Two-state average with dissipation coefficient `lambda`.
    Averaged {
        left: PrimitiveState,
        right: PrimitiveState,
        lambda: f64,
    },
}

impl InterfaceState {
    /// Numerical entropy flux across an edge with normal `n` moving with normal speed `s`.
    pub fn entropy_flux(&self, g: &GasModel, n: Vec2, s: f64) -> f64 {
        match *self {
            InterfaceState::Star(u) => g.entropy_flux(&u, n) - s * g.entropy(&u),
            InterfaceState::Averaged { left, right, lambda } => {
                let hl = g.entropy_flux(&left, n) - s * g.entropy(&left);
                let hr = g.entropy_flux(&right, n) - s * g.entropy(&right);
                0.5 * (hl + hr) - 0.5 * lambda * (g.entropy(&right) - g.entropy(&left))
            }
        }
    }
}

/// Flux across an edge with normal `n` whose points move with velocity `w`:
/// `f(u*) . n - (w . n) U(u*)`, where `u*` is found by boosting both states into
/// the edge's rest frame, solving there, and boosting back.
pub fn moving_edge_flux(
    left: &PrimitiveState,
    right: &PrimitiveState,
    g: &GasModel,
    n: Vec2,
    w: Vec2,
) -> Result<Flux> {
    moving_edge_flux_with(FluxKind::Godunov, left, right, g, n, w).map(|(f, _)| f)
}

/// [`moving_edge_flux`] for a chosen flux, also returning the interface record.
pub fn moving_edge_flux_with(
    kind: FluxKind,
    left: &PrimitiveState,
    right: &PrimitiveState,
    g: &GasModel,
    n: Vec2,
    w: Vec2,
) -> Result<(Flux, InterfaceState)> {
    let s = vec2::dot(w, n);
    match kind {
        FluxKind::Godunov => {
            let fan = solve_exact(&left.shifted(w), &right.shifted(w), g, n)?;
            let star = fan.sample(0.0).shifted(vec2::scale(w, -1.0));
            let flux = g.physical_flux(&star, n) - g.to_conservative(&star) * s;
            Ok((flux, InterfaceState::Star(star)))
        }
        FluxKind::Rusanov => {
            let (flux, lambda) = moving_rusanov(left, right, g, n, s);
            Ok((
                flux,
                InterfaceState::Averaged {
                    left: *left,
                    right: *right,
                    lambda,
                },
            ))
        }
    }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a > 0.0 {
        a.min(b)
    } else {
        a.max(b)
    }
}

/// A cell average located at coordinate `x` along the reconstruction line.
#[derive(Clone, Copy, Debug)]
pub struct StencilPoint {
    pub state: PrimitiveState,
    pub x: f64,
}

/// Minmod-limited linear reconstruction of `(rho, v, p)` in the center cell of a
/// three-cell stencil, evaluated at the two face coordinates. Falls back to the
/// cell value if a face value leaves the admissible set.
pub fn muscl_states(
    g: &GasModel,
    left: &StencilPoint,
    center: &StencilPoint,
    right: &StencilPoint,
    face_left_x: f64,
    face_right_x: f64,
) -> (PrimitiveState, PrimitiveState) {
    let vars = |s: &PrimitiveState| [s.rho, s.v[0], s.v[1], g.pressure(s)];
    let (l, c, r) = (vars(&left.state), vars(&center.state), vars(&right.state));
    let dl = center.x - left.x;
    let dr = right.x - center.x;
    let fallback = (center.state, center.state);
    if !(dl > 0.0 && dr > 0.0) {
        return fallback;
    }
    let mut fl = [0.0; 4];
    let mut fr = [0.0; 4];
    for k in 0..4 {
        let slope = minmod((c[k] - l[k]) / dl, (r[k] - c[k]) / dr);
        fl[k] = c[k] + slope * (face_left_x - center.x);
        fr[k] = c[k] + slope * (face_right_x - center.x);
    }
    let build = |w: [f64; 4]| g.state_from_pressure(w[0], [w[1], w[2]], w[3]).ok();
    match (build(fl), build(fr)) {
        (Some(a), Some(b)) if g.kind == GasKind::Isentropic || (fl[3] > 0.0 && fr[3] > 0.0) => (a, b),
        _ => fallback,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sod(g: &GasModel) -> (PrimitiveState, PrimitiveState) {
        (
            g.state_from_pressure(1.0, [0.0, 0.0], 1.0).unwrap(),
            g.state_from_pressure(0.125, [0.0, 0.0], 0.1).unwrap(),
        )
    }

    #[test]
    fn equal_states_give_trivial_fan() {
        for g in [GasModel::air(), GasModel::isentropic(1.4, 1.0).unwrap()] {
            let u = g.state(1.3, [0.4, -0.2], 2.0).unwrap();
            let fan = solve_exact(&u, &u, &g, [1.0, 0.0]).unwrap();
            assert_relative_eq!(fan.star_p, g.pressure(&u), max_relative = 1e-14);
            assert_relative_eq!(fan.star_v, 0.4, max_relative = 1e-14);
            for xi in [-5.0, -0.1, 0.0, 0.3, 0.4, 7.0] {
                let s = fan.sample(xi);
                assert_relative_eq!(s.rho, u.rho, max_relative = 1e-13);
                assert_relative_eq!(s.v[0], u.v[0], max_relative = 1e-13);
                assert_relative_eq!(s.v[1], u.v[1], max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn sod_star_pressure() {
        let g = GasModel::air();
        let (l, r) = sod(&g);
        let fan = solve_exact(&l, &r, &g, [1.0, 0.0]).unwrap();
        assert!((fan.star_p - 0.30313).abs() < 5e-6);
        assert_eq!(fan.left_wave.kind, WaveKind::Rarefaction);
        assert_eq!(fan.right_wave.kind, WaveKind::Shock);
        // far left sample is the unperturbed state
        assert_eq!(fan.sample(-10.0), l);
        assert_eq!(fan.sample(10.0), r);
    }

    #[test]
    fn symmetric_collision_stagnates() {
        for g in [GasModel::air(), GasModel::isentropic(1.4, 1.0).unwrap()] {
            let a = 0.7;
            let l = g.state(1.0, [a, 0.0], 1.0).unwrap();
            let r = g.state(1.0, [-a, 0.0], 1.0).unwrap();
            let fan = solve_exact(&l, &r, &g, [1.0, 0.0]).unwrap();
            assert!(fan.star_v.abs() < 1e-14);
            assert_eq!(fan.left_wave.kind, WaveKind::Shock);
            assert_eq!(fan.right_wave.kind, WaveKind::Shock);
        }
    }

    #[test]
    fn vacuum_is_an_error() {
        let g = GasModel::air();
        let l = g.state_from_pressure(1.0, [-20.0, 0.0], 1.0).unwrap();
        let r = g.state_from_pressure(1.0, [20.0, 0.0], 1.0).unwrap();
        assert!(matches!(solve_exact(&l, &r, &g, [1.0, 0.0]), Err(Error::Vacuum { .. })));
    }

    #[test]
    fn rusanov_consistency_and_symmetry() {
        let g = GasModel::air();
        let u = g.state(1.1, [0.3, 0.2], 1.7).unwrap();
        let n = vec2::unit_from_angle(1.1);
        let f = rusanov_flux(&u, &u, &g, n);
        let exact = g.physical_flux(&u, n);
        for k in 0..4 {
            assert_relative_eq!(f[k], exact[k], max_relative = 1e-15);
        }
        let l = g.state(1.0, [0.5, 0.0], 1.0).unwrap();
        let r = g.state(1.0, [-0.5, 0.0], 1.0).unwrap();
        assert_eq!(rusanov_flux(&l, &r, &g, [1.0, 0.0])[0], 0.0);
    }

    #[test]
    fn muscl_uniform_linear_and_extremum() {
        let g = GasModel::air();
        let at = |rho: f64, x: f64| StencilPoint {
            state: g.state_from_pressure(rho, [0.0, 0.0], 1.0).unwrap(),
            x,
        };
        let (a, b) = muscl_states(&g, &at(1.0, -1.0), &at(1.0, 0.0), &at(1.0, 1.0), -0.5, 0.5);
        assert_eq!((a.rho, b.rho), (1.0, 1.0));

        let (a, b) = muscl_states(&g, &at(1.0, -1.0), &at(1.2, 0.0), &at(1.4, 1.0), -0.5, 0.5);
        assert_relative_eq!(a.rho, 1.1, max_relative = 1e-15);
        assert_relative_eq!(b.rho, 1.3, max_relative = 1e-15);

        let (a, b) = muscl_states(&g, &at(1.0, -1.0), &at(1.5, 0.0), &at(1.1, 1.0), -0.5, 0.5);
        assert_eq!((a.rho, b.rho), (1.5, 1.5));
    }

    #[test]
    fn muscl_falls_back_when_faces_leave_admissible_set() {
        let g = GasModel::air();
        let at = |rho: f64, p: f64, x: f64| StencilPoint {
            state: g.state_from_pressure(rho, [0.0, 0.0], p).unwrap(),
            x,
        };
        // steep linear pressure profile extrapolated to a far face goes negative
        let c = at(1.0, 1.0, 0.0);
        let (a, b) = muscl_states(&g, &at(1.0, 2.0, -1.0), &c, &at(1.0, 0.0001, 1.0), -3.0, 3.0);
        assert_eq!((a, b), (c.state, c.state));
    }
}
