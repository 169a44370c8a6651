//! Flat `key = value` experiment configuration with `#` comments.

use std::path::{Path, PathBuf};

use selfsim::exact_fields::{build_solution_t, SolutionTSpec};
use selfsim::fv_solver::{AdaptOptions, Order, Scheme, StopCriteria};
use selfsim::gas::{GasKind, GasModel, PrimitiveState, CELSIUS_OFFSET};
use selfsim::riemann::FluxKind;
use selfsim::simgrid::QuadDomain;

use crate::error::{io_err, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Structured,
    Aligned,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: GasKind,
    pub gamma: f64,
    pub gas_constant: f64,
    /// Isentropic pressure constant; calibrated to the inflow when absent.
    pub kappa: Option<f64>,
    pub inflow_density: f64,
    pub inflow_speed: f64,
    pub inflow_temperature_c: f64,
    /// Specific internal energy; overrides the temperature when set.
    pub inflow_q: Option<f64>,
    pub alpha_deg: f64,
    pub stagnation_density: Option<f64>,
    pub domain: [[f64; 2]; 4],
    pub mesh: MeshKind,
    pub nx: usize,
    pub ny: usize,
    pub align_rays: bool,
    pub n_theta: usize,
    pub n_r: usize,
    pub initial_levels: usize,
    pub adapt_every: usize,
    pub adapt_until: usize,
    pub refine_threshold: f64,
    pub max_level: u8,
    pub max_cells: usize,
    pub flux: FluxKind,
    pub order: Order,
    /// Defaults to the order's CFL number.
    pub cfl: Option<f64>,
    pub t0: f64,
    pub t_end: Option<f64>,
    pub residual_tol: Option<f64>,
    pub max_steps: usize,
    pub snapshot_every: usize,
    pub output: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: GasKind::Nonisentropic,
            gamma: 1.4,
            gas_constant: GasModel::air().gas_constant,
            kappa: None,
            inflow_density: 1.19,
            inflow_speed: 1000.0,
            inflow_temperature_c: 20.0,
            inflow_q: None,
            alpha_deg: 10.0,
            stagnation_density: None,
            domain: QuadDomain::centered_square(1500.0).corners,
            mesh: MeshKind::Structured,
            nx: 136,
            ny: 136,
            align_rays: true,
            n_theta: 128,
            n_r: 40,
            initial_levels: 1,
            adapt_every: 200,
            adapt_until: 1200,
            refine_threshold: 0.05,
            max_level: 1,
            max_cells: 50_000,
            flux: FluxKind::Godunov,
            order: Order::First,
            cfl: None,
            t0: 1.0,
            t_end: None,
            residual_tol: Some(1e-4),
            max_steps: 6000,
            snapshot_every: 500,
            output: PathBuf::from("out"),
            seed: 0,
        }
    }
}

/// Every configuration key, in file order.
pub const KEYS: &[&str] = &[
    "model",
    "gamma",
    "gas_constant",
    "kappa",
    "inflow_density",
    "inflow_speed",
    "inflow_temperature_c",
    "inflow_q",
    "alpha_deg",
    "stagnation_density",
    "domain",
    "mesh",
    "nx",
    "ny",
    "align_rays",
    "n_theta",
    "n_r",
    "initial_levels",
    "adapt_every",
    "adapt_until",
    "refine_threshold",
    "max_level",
    "max_cells",
    "flux",
    "order",
    "cfl",
    "t0",
    "t_end",
    "residual_tol",
    "max_steps",
    "snapshot_every",
    "output",
    "seed",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{key}`: cannot parse `{v}`"))
}

/// `none` clears an optional value.
fn opt<T: std::str::FromStr>(key: &str, v: &str) -> Result<Option<T>, String> {
    if v == "none" {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

fn show_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("none".into(), |x| x.to_string())
}

impl ExperimentConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "model" => self.model = v.parse().map_err(|e: selfsim::Error| e.to_string())?,
            "gamma" => self.gamma = num(key, v)?,
            "gas_constant" => self.gas_constant = num(key, v)?,
            "kappa" => self.kappa = opt(key, v)?,
            "inflow_density" => self.inflow_density = num(key, v)?,
            "inflow_speed" => self.inflow_speed = num(key, v)?,
            "inflow_temperature_c" => self.inflow_temperature_c = num(key, v)?,
            "inflow_q" => self.inflow_q = opt(key, v)?,
            "alpha_deg" => self.alpha_deg = num(key, v)?,
            "stagnation_density" => self.stagnation_density = opt(key, v)?,
            "domain" => {
                let xs: Vec<f64> = v
                    .split_whitespace()
                    .map(|x| num(key, x))
                    .collect::<Result<_, _>>()?;
                if xs.len() != 8 {
                    return Err("`domain` needs 8 numbers: four corners x y, counterclockwise".into());
                }
                for k in 0..4 {
                    self.domain[k] = [xs[2 * k], xs[2 * k + 1]];
                }
            }
            "mesh" => {
                self.mesh = match v {
                    "structured" => MeshKind::Structured,
                    "aligned" => MeshKind::Aligned,
                    _ => return Err(format!("`mesh`: expected structured or aligned, got `{v}`")),
                }
            }
            "nx" => self.nx = num(key, v)?,
            "ny" => self.ny = num(key, v)?,
            "align_rays" => self.align_rays = num(key, v)?,
            "n_theta" => self.n_theta = num(key, v)?,
            "n_r" => self.n_r = num(key, v)?,
            "initial_levels" => self.initial_levels = num(key, v)?,
            "adapt_every" => self.adapt_every = num(key, v)?,
            "adapt_until" => self.adapt_until = num(key, v)?,
            "refine_threshold" => self.refine_threshold = num(key, v)?,
            "max_level" => self.max_level = num(key, v)?,
            "max_cells" => self.max_cells = num(key, v)?,
            "flux" => self.flux = v.parse().map_err(|e: selfsim::Error| e.to_string())?,
            "order" => self.order = v.parse().map_err(|e: selfsim::Error| e.to_string())?,
            "cfl" => self.cfl = opt(key, v)?,
            "t0" => self.t0 = num(key, v)?,
            "t_end" => self.t_end = opt(key, v)?,
            "residual_tol" => self.residual_tol = opt(key, v)?,
            "max_steps" => self.max_steps = num(key, v)?,
            "snapshot_every" => self.snapshot_every = num(key, v)?,
            "output" => self.output = PathBuf::from(v),
            "seed" => self.seed = num(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Text form of one key, parseable by [`ExperimentConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "model" => self.model.name().into(),
            "gamma" => self.gamma.to_string(),
            "gas_constant" => self.gas_constant.to_string(),
            "kappa" => show_opt(&self.kappa),
            "inflow_density" => self.inflow_density.to_string(),
            "inflow_speed" => self.inflow_speed.to_string(),
            "inflow_temperature_c" => self.inflow_temperature_c.to_string(),
            "inflow_q" => show_opt(&self.inflow_q),
            "alpha_deg" => self.alpha_deg.to_string(),
            "stagnation_density" => show_opt(&self.stagnation_density),
            "domain" => self
                .domain
                .iter()
                .flat_map(|c| c.iter().map(|x| x.to_string()))
                .collect::<Vec<_>>()
                .join(" "),
            "mesh" => match self.mesh {
                MeshKind::Structured => "structured".into(),
                MeshKind::Aligned => "aligned".into(),
            },
            "nx" => self.nx.to_string(),
            "ny" => self.ny.to_string(),
            "align_rays" => self.align_rays.to_string(),
            "n_theta" => self.n_theta.to_string(),
            "n_r" => self.n_r.to_string(),
            "initial_levels" => self.initial_levels.to_string(),
            "adapt_every" => self.adapt_every.to_string(),
            "adapt_until" => self.adapt_until.to_string(),
            "refine_threshold" => self.refine_threshold.to_string(),
            "max_level" => self.max_level.to_string(),
            "max_cells" => self.max_cells.to_string(),
            "flux" => self.flux.name().into(),
            "order" => self.order.name().into(),
            "cfl" => show_opt(&self.cfl),
            "t0" => self.t0.to_string(),
            "t_end" => show_opt(&self.t_end),
            "residual_tol" => show_opt(&self.residual_tol),
            "max_steps" => self.max_steps.to_string(),
            "snapshot_every" => self.snapshot_every.to_string(),
            "output" => self.output.display().to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut c = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::parse(path, i + 1, "expected `key = value`"))?;
            c.set(k.trim(), v).map_err(|m| CliError::parse(path, i + 1, m))?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# selfsim experiment\n");
        for k in KEYS {
            s.push_str(&format!("{k} = {}\n", self.get(k).expect("listed key")));
        }
        s
    }

    /// Range checks that need no physics.
    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("gamma", self.gamma - 1.0),
            ("gas_constant", self.gas_constant),
            ("inflow_density", self.inflow_density),
            ("inflow_speed", self.inflow_speed),
            ("inflow_temperature (K)", self.inflow_temperature_c + CELSIUS_OFFSET),
            ("t0", self.t0),
            ("refine_threshold", self.refine_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(CliError::Usage(format!("`{name}` must be positive (gamma > 1)")));
            }
        }
        for (name, v) in [("kappa", self.kappa), ("inflow_q", self.inflow_q), ("stagnation_density", self.stagnation_density)] {
            if matches!(v, Some(x) if !(x > 0.0)) {
                return Err(CliError::Usage(format!("`{name}` must be positive")));
            }
        }
        if !(0.0..90.0).contains(&self.alpha_deg) {
            return Err(CliError::Usage("`alpha_deg` must lie in [0, 90)".into()));
        }
        if self.nx == 0 || self.ny == 0 || self.n_theta == 0 || self.n_r == 0 {
            return Err(CliError::Usage("mesh resolutions must be positive".into()));
        }
        if matches!(self.cfl, Some(c) if !(c > 0.0 && c <= 1.0)) {
            return Err(CliError::Usage("`cfl` must lie in (0, 1]".into()));
        }
        if matches!(self.t_end, Some(t) if !(t > self.t0)) {
            return Err(CliError::Usage("`t_end` must exceed `t0`".into()));
        }
        if self.max_steps == 0 {
            return Err(CliError::Usage("`max_steps` must be positive".into()));
        }
        Ok(())
    }

    pub fn gas_model(&self) -> CliResult<GasModel> {
        let base = GasModel::new(self.model, self.gamma, self.kappa.unwrap_or(1.0), self.gas_constant)
            .map_err(CliError::physics)?;
        match (self.model, self.kappa) {
            (GasKind::Isentropic, None) => base
                .with_calibrated_kappa(self.inflow_density, self.inflow_temperature_c + CELSIUS_OFFSET)
                .map_err(CliError::physics),
            _ => Ok(base),
        }
    }

    pub fn inflow(&self, g: &GasModel) -> CliResult<PrimitiveState> {
        let v = [self.inflow_speed, 0.0];
        match self.inflow_q {
            Some(q) if !g.is_isentropic() => g.state(self.inflow_density, v, q),
            _ => g.state_from_temperature(self.inflow_density, v, self.inflow_temperature_c + CELSIUS_OFFSET),
        }
        .map_err(CliError::physics)
    }

    pub fn solution_t(&self) -> CliResult<SolutionTSpec> {
        self.validate()?;
        let g = self.gas_model()?;
        let inflow = self.inflow(&g)?;
        build_solution_t(&inflow, self.alpha_deg.to_radians(), &g, self.stagnation_density).map_err(CliError::physics)
    }

    pub fn scheme(&self) -> Scheme {
        let s = Scheme::new(self.flux, self.order);
        match self.cfl {
            Some(c) => s.with_cfl(c),
            None => s,
        }
    }

    pub fn stop(&self) -> StopCriteria {
        StopCriteria {
            t_end: self.t_end,
            residual_tol: self.residual_tol,
            max_steps: self.max_steps,
        }
    }

    pub fn adapt(&self) -> AdaptOptions {
        AdaptOptions {
            every: self.adapt_every.max(1),
            until: self.adapt_until,
            threshold: self.refine_threshold,
            max_level: self.max_level,
            max_cells: self.max_cells,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trips() {
        let mut c = ExperimentConfig::default();
        c.set("kappa", "2.5").unwrap();
        c.set("domain", "0 -1 2 -1 2 1 0 1").unwrap();
        c.set("order", "2").unwrap();
        let back = ExperimentConfig::parse(&c.to_text(), Path::new("x")).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), c.to_text());
    }

    #[test]
    fn comments_and_errors() {
        let c = ExperimentConfig::parse("# a\nalpha_deg = 5 # deg\n\n", Path::new("x")).unwrap();
        assert_eq!(c.alpha_deg, 5.0);
        let e = ExperimentConfig::parse("alpha_deg 5", Path::new("x")).unwrap_err();
        assert_eq!(e.exit_code(), 64);
        assert!(ExperimentConfig::parse("wings = 2", Path::new("x")).is_err());
        assert!(ExperimentConfig::parse("nx = -3", Path::new("x")).is_err());
    }

    #[test]
    fn wedge_flow_defaults() {
        let c = ExperimentConfig::default();
        let spec = c.solution_t().unwrap();
        assert_eq!(spec.inflow.rho, 1.19);
        assert!((spec.model.temperature(&spec.inflow) - 293.15).abs() < 1e-9);
        let mut bad = c.clone();
        bad.gamma = 0.9;
        assert_eq!(bad.solution_t().unwrap_err().exit_code(), 64);
    }
}
