//! Polytropic gas models for the compressible Euler equations in two space
//! dimensions: state representations, physical fluxes and entropy pairs.
//!
//! Two systems share one state layout. The nonisentropic system carries
//! `(rho, rho v, rho e)` with `e = |v|^2/2 + q` and `p = (gamma - 1) rho q`.
//! The isentropic system carries `(rho, rho v)` only, with `p = kappa rho^gamma`;
//! its conservative vectors keep a zero fourth slot so both systems can use the
//! same fixed-size arithmetic.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::vec2::{self, Vec2};

/// Smallest density accepted as admissible.
pub const MIN_DENSITY: f64 = 1e-12;
/// Smallest specific internal energy accepted as admissible.
pub const MIN_INTERNAL_ENERGY: f64 = 1e-12;
/// Specific gas constant of dry air, J/(kg K).
pub const AIR_GAS_CONSTANT: f64 = 287.058;
/// 0 degrees Celsius in kelvin.
pub const CELSIUS_OFFSET: f64 = 273.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GasKind {
    Nonisentropic,
    Isentropic,
}

impl GasKind {
    pub fn name(self) -> &'static str {
        match self {
            GasKind::Nonisentropic => "nonisentropic",
            GasKind::Isentropic => "isentropic",
        }
    }
}

impl std::str::FromStr for GasKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nonisentropic" => Ok(GasKind::Nonisentropic),
            "isentropic" => Ok(GasKind::Isentropic),
            other => Err(Error::InvalidParameter(format!("unknown gas model `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    pub kind: GasKind,
    pub gamma: f64,
    /// Pressure constant of the isentropic law `p = kappa rho^gamma`.
    pub kappa: f64,
    /// Specific gas constant; only used to convert temperatures.
    pub gas_constant: f64,
}

/// Primitive variables. For the isentropic model `q` always holds the
/// isentropic internal energy `kappa rho^(gamma-1) / (gamma-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub v: Vec2,
    pub q: f64,
}

/// Conserved variables `(rho, rho v1, rho v2, rho e)`; the last slot is zero
/// for the isentropic model.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConservativeState(pub [f64; 4]);

/// Flux vectors share the conserved-variable layout.
pub type Flux = ConservativeState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPairValue {
    pub eta: f64,
    pub psi: Vec2,
    /// Gas-dynamic specific entropy (nonisentropic model only).
    pub s: Option<f64>,
}

/// Unit normal `(n_t, n)` of a space-time surface; the spatial part never vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimeNormal {
    pub n_t: f64,
    pub n: Vec2,
}

impl SpaceTimeNormal {
    /// Normalizes `(n_t, n)` to unit length.
    pub fn new(n_t: f64, n: Vec2) -> Result<Self> {
        let spatial = vec2::norm(n);
        if !(spatial > 0.0) || !n_t.is_finite() {
            return Err(Error::InvalidParameter(
                "space-time normal needs a nonzero spatial part".into(),
            ));
        }
        let len = n_t.hypot(spatial);
        Ok(SpaceTimeNormal {
            n_t: n_t / len,
            n: vec2::scale(n, 1.0 / len),
        })
    }

    /// Normal of a steady interface.
    pub fn spatial(n: Vec2) -> Result<Self> {
        Self::new(0.0, n)
    }
}

impl ConservativeState {
    pub const ZERO: ConservativeState = ConservativeState([0.0; 4]);

    pub fn scaled(self, s: f64) -> Self {
        self * s
    }

    pub fn abs_sum(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl Index<usize> for ConservativeState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for ConservativeState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let a = self.0;
        let b = o.0;
        ConservativeState([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl Sub for ConservativeState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let a = self.0;
        let b = o.0;
        ConservativeState([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl Mul<f64> for ConservativeState {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let a = self.0;
        ConservativeState([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
}

impl Neg for ConservativeState {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl AddAssign for ConservativeState {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for ConservativeState {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl PrimitiveState {
    /// Same state seen from a frame moving with velocity `w`.
    pub fn shifted(&self, w: Vec2) -> Self {
        PrimitiveState {
            v: vec2::sub(self.v, w),
            ..*self
        }
    }

    pub fn speed(&self) -> f64 {
        vec2::norm(self.v)
    }
}

impl GasModel {
    pub fn new(kind: GasKind, gamma: f64, kappa: f64, gas_constant: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma <= 5.0 / 3.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (1, 5/3], got {gamma}"
            )));
        }
        if kind == GasKind::Isentropic && !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !(gas_constant > 0.0 && gas_constant.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gas constant must be positive, got {gas_constant}"
            )));
        }
        Ok(GasModel {
            kind,
            gamma,
            kappa,
            gas_constant,
        })
    }

    pub fn nonisentropic(gamma: f64) -> Result<Self> {
        Self::new(GasKind::Nonisentropic, gamma, 1.0, AIR_GAS_CONSTANT)
    }

    pub fn isentropic(gamma: f64, kappa: f64) -> Result<Self> {
        Self::new(GasKind::Isentropic, gamma, kappa, AIR_GAS_CONSTANT)
    }

    /// Nonisentropic air with `gamma = 1.4`.
    pub fn air() -> Self {
        GasModel {
            kind: GasKind::Nonisentropic,
            gamma: 1.4,
            kappa: 1.0,
            gas_constant: AIR_GAS_CONSTANT,
        }
    }

    /// Chooses `kappa` so that `kappa rho^gamma = rho R T` for the given reference state.
    pub fn with_calibrated_kappa(self, rho: f64, temperature: f64) -> Result<Self> {
        if !(rho > 0.0 && temperature > 0.0) {
            return Err(Error::InvalidParameter(
                "calibration needs positive density and temperature".into(),
            ));
        }
        let kappa = self.gas_constant * temperature * rho.powf(1.0 - self.gamma);
        Self::new(self.kind, self.gamma, kappa, self.gas_constant)
    }

    pub fn is_isentropic(&self) -> bool {
        self.kind == GasKind::Isentropic
    }

    /// Number of conserved components `m`.
    pub fn components(&self) -> usize {
        match self.kind {
            GasKind::Nonisentropic => 4,
            GasKind::Isentropic => 3,
        }
    }

    pub fn isentropic_internal_energy(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }

    /// Builds a validated state. `q` is ignored by the isentropic model.
    pub fn state(&self, rho: f64, v: Vec2, q: f64) -> Result<PrimitiveState> {
        let q = match self.kind {
            GasKind::Nonisentropic => q,
            GasKind::Isentropic => self.isentropic_internal_energy(rho),
        };
        let s = PrimitiveState { rho, v, q };
        self.validate(&s)?;
        Ok(s)
    }

    /// State from density, velocity and pressure. The isentropic model
    /// derives pressure from density and ignores `p`.
    pub fn state_from_pressure(&self, rho: f64, v: Vec2, p: f64) -> Result<PrimitiveState> {
        self.state(rho, v, p / ((self.gamma - 1.0) * rho))
    }

    /// State from density, velocity and absolute temperature (ideal gas, `p = rho R T`).
    pub fn state_from_temperature(&self, rho: f64, v: Vec2, temperature: f64) -> Result<PrimitiveState> {
        self.state(rho, v, self.gas_constant * temperature / (self.gamma - 1.0))
    }

    pub fn validate(&self, s: &PrimitiveState) -> Result<()> {
        if !(s.rho >= MIN_DENSITY) {
            return Err(Error::InvalidState {
                what: "density",
                value: s.rho,
            });
        }
        if !(s.v[0].is_finite() && s.v[1].is_finite()) {
            return Err(Error::InvalidState {
                what: "velocity",
                value: s.speed(),
            });
        }
        if self.kind == GasKind::Nonisentropic && !(s.q >= MIN_INTERNAL_ENERGY && s.q.is_finite()) {
            return Err(Error::InvalidState {
                what: "internal energy",
                value: s.q,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn pressure(&self, s: &PrimitiveState) -> f64 {
        match self.kind {
            GasKind::Nonisentropic => (self.gamma - 1.0) * s.rho * s.q,
            GasKind::Isentropic => self.kappa * s.rho.powf(self.gamma),
        }
    }

    #[inline]
    pub fn sound_speed(&self, s: &PrimitiveState) -> f64 {
        (self.gamma * self.pressure(s) / s.rho).sqrt()
    }

    /// Temperature from the ideal-gas relation `p = rho R T`.
    pub fn temperature(&self, s: &PrimitiveState) -> f64 {
        self.pressure(s) / (s.rho * self.gas_constant)
    }

    pub fn mach(&self, s: &PrimitiveState) -> f64 {
        s.speed() / self.sound_speed(s)
    }

    #[inline]
    pub fn to_conservative(&self, s: &PrimitiveState) -> ConservativeState {
        let m = [s.rho * s.v[0], s.rho * s.v[1]];
        let energy = match self.kind {
            GasKind::Nonisentropic => s.rho * (0.5 * vec2::dot(s.v, s.v) + s.q),
            GasKind::Isentropic => 0.0,
        };
        ConservativeState([s.rho, m[0], m[1], energy])
    }

    #[inline]
    pub fn to_primitive(&self, u: &ConservativeState) -> Result<PrimitiveState> {
        let rho = u.0[0];
        if !(rho >= MIN_DENSITY) {
            return Err(Error::InvalidState {
                what: "density",
                value: rho,
            });
        }
        let v = [u.0[1] / rho, u.0[2] / rho];
        let q = match self.kind {
            GasKind::Nonisentropic => {
                let q = u.0[3] / rho - 0.5 * vec2::dot(v, v);
                if !(q >= MIN_INTERNAL_ENERGY) {
                    return Err(Error::InvalidState {
                        what: "internal energy",
                        value: q,
                    });
                }
                q
            }
            GasKind::Isentropic => self.isentropic_internal_energy(rho),
        };
        Ok(PrimitiveState { rho, v, q })
    }

    /// `f(u) . n` for a spatial direction `n`.
    #[inline]
    pub fn physical_flux(&self, s: &PrimitiveState, n: Vec2) -> Flux {
        let p = self.pressure(s);
        let vn = vec2::dot(s.v, n);
        let mass = s.rho * vn;
        let energy = match self.kind {
            GasKind::Nonisentropic => (s.rho * (0.5 * vec2::dot(s.v, s.v) + s.q) + p) * vn,
            GasKind::Isentropic => 0.0,
        };
        ConservativeState([
            mass,
            mass * s.v[0] + p * n[0],
            mass * s.v[1] + p * n[1],
            energy,
        ])
    }

    /// Gas-dynamic specific entropy `s = log q + (1 - gamma) log rho`.
    pub fn specific_entropy(&self, s: &PrimitiveState) -> f64 {
        s.q.ln() + (1.0 - self.gamma) * s.rho.ln()
    }

    /// The entropy density `eta` of the model's entropy pair.
    #[inline]
    pub fn entropy(&self, s: &PrimitiveState) -> f64 {
        match self.kind {
            GasKind::Nonisentropic => -s.rho * self.specific_entropy(s),
            GasKind::Isentropic => s.rho * (0.5 * vec2::dot(s.v, s.v) + s.q),
        }
    }

    /// Entropy flux `psi . n`.
    #[inline]
    pub fn entropy_flux(&self, s: &PrimitiveState, n: Vec2) -> f64 {
        let vn = vec2::dot(s.v, n);
        match self.kind {
            GasKind::Nonisentropic => self.entropy(s) * vn,
            GasKind::Isentropic => (self.entropy(s) + self.pressure(s)) * vn,
        }
    }

    pub fn entropy_pair(&self, s: &PrimitiveState) -> EntropyPairValue {
        match self.kind {
            GasKind::Nonisentropic => {
                let spec = self.specific_entropy(s);
                let eta = -s.rho * spec;
                EntropyPairValue {
                    eta,
                    psi: [eta * s.v[0], eta * s.v[1]],
                    s: Some(spec),
                }
            }
            GasKind::Isentropic => {
                let eta = self.entropy(s);
                let h = eta + self.pressure(s);
                EntropyPairValue {
                    eta,
                    psi: [h * s.v[0], h * s.v[1]],
                    s: None,
                }
            }
        }
    }

    /// Entropy density as a function of the conserved variables.
    pub fn entropy_of(&self, u: &ConservativeState) -> Result<f64> {
        Ok(self.entropy(&self.to_primitive(u)?))
    }
}
