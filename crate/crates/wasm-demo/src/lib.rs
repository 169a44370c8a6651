//! Browser demo of the `selfsim` library.
//!
//! The plain Rust types below hold all logic and are tested natively; the
//! `web` module wraps them for `wasm-bindgen` and maps errors to `JsError`.

use selfsim::diagnostics::{classify, ClassifyThresholds};
use selfsim::exact_fields::{build_solution_t, SolutionTSpec};
use selfsim::fv_solver::{cfl_dt, initialize_from_field, step, steadiness_residual, BoundarySpec, FieldState, NormScales, Scheme};
use selfsim::gas::{GasKind, GasModel};
use selfsim::presets;
use selfsim::riemann::solve_exact;
use selfsim::simgrid::{build_domain_mesh, QuadDomain, RayAlignment, SimMesh};
use selfsim::vec2::Vec2;
use selfsim::{Error, Result};

/// Half width of the displayed similarity window (m/s).
pub const HALF_WIDTH: f64 = presets::DOMAIN_HALF_WIDTH;

/// Exact fan of a 1D Riemann problem with `(rho, v, p)` states, sampled at
/// `samples` points of `[x_min, x_max]` at time `t`. Rows are `[x, rho, v, p]`.
pub fn riemann_profile(
    left: [f64; 3],
    right: [f64; 3],
    gamma: f64,
    t: f64,
    samples: usize,
    x_range: [f64; 2],
) -> Result<Vec<[f64; 4]>> {
    if !(t > 0.0) || samples < 2 || !(x_range[1] > x_range[0]) {
        return Err(Error::InvalidParameter("need t > 0, samples >= 2 and x_max > x_min".into()));
    }
    let g = GasModel::nonisentropic(gamma)?;
    let l = g.state_from_pressure(left[0], [left[1], 0.0], left[2])?;
    let r = g.state_from_pressure(right[0], [right[1], 0.0], right[2])?;
    let fan = solve_exact(&l, &r, &g, [1.0, 0.0])?;
    Ok((0..samples)
        .map(|i| {
            let x = x_range[0] + (x_range[1] - x_range[0]) * i as f64 / (samples - 1) as f64;
            let s = fan.sample(x / t);
            [x, s.rho, s.v[0], g.pressure(&s)]
        })
        .collect())
}

/// Row-major image over `[-HALF_WIDTH, HALF_WIDTH]^2`, row 0 at the top;
/// `NaN` marks pixels inside the wedge or outside the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Raster {
    fn sample(width: usize, height: usize, mut f: impl FnMut(Vec2) -> f64) -> Self {
        let h = HALF_WIDTH;
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            let y = h - (j as f64 + 0.5) * 2.0 * h / height as f64;
            for i in 0..width {
                let x = -h + (i as f64 + 0.5) * 2.0 * h / width as f64;
                values.push(f([x, y]));
            }
        }
        Raster { width, height, values }
    }

    /// Finite minimum and maximum; `None` when every pixel is `NaN`.
    pub fn range(&self) -> Option<(f64, f64)> {
        let finite = self.values.iter().copied().filter(|v| v.is_finite());
        finite.fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

pub fn gas_kind(isentropic: bool) -> GasKind {
    if isentropic {
        GasKind::Isentropic
    } else {
        GasKind::Nonisentropic
    }
}

/// Solution T for the wedge-flow inflow at the given half angle.
pub fn solution_t(alpha_deg: f64, kind: GasKind) -> Result<SolutionTSpec> {
    let g = presets::model(kind);
    build_solution_t(&presets::inflow(&g), alpha_deg.to_radians(), &g, None)
}

/// Density of Solution T in similarity coordinates.
pub fn solution_t_raster(spec: &SolutionTSpec, width: usize, height: usize) -> Raster {
    Raster::sample(width, height, |xi| if spec.in_wedge(xi) { f64::NAN } else { spec.field.at_xi(xi).rho })
}

/// A small moving-mesh computation started from Solution T.
pub struct WedgeRun {
    pub spec: SolutionTSpec,
    pub mesh: SimMesh,
    pub field: FieldState,
    boundary: BoundarySpec,
    scheme: Scheme,
    scales: NormScales,
    pub steps: usize,
    pub residual: f64,
}

impl WedgeRun {
    /// `aligned` picks the polar mesh that follows every discontinuity;
    /// otherwise an `n` by `n` structured mesh whose lines bend onto the rays
    /// only near the boundary.
    pub fn new(alpha_deg: f64, kind: GasKind, n: usize, aligned: bool) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameter("mesh resolution must be at least 4".into()));
        }
        let spec = solution_t(alpha_deg, kind)?;
        let mesh = if aligned {
            presets::aligned_mesh(&spec, 2 * n, n / 2)?
        } else {
            let align = RayAlignment::new(spec.ray_angles().to_vec());
            build_domain_mesh(&QuadDomain::centered_square(HALF_WIDTH), n, n, Some(&align))?
        };
        let field = initialize_from_field(&spec.field, &mesh, 1.0)?;
        let boundary = BoundarySpec::exterior(spec.field.clone());
        boundary.validate(&mesh, &field)?;
        let scales = NormScales::of(&field, &mesh)?;
        Ok(WedgeRun { spec, mesh, field, boundary, scheme: Scheme::godunov(), scales, steps: 0, residual: f64::NAN })
    }

    /// Advances `k` steps and returns the last steadiness residual, scaled by
    /// the initial field so values compare across calls.
    // Steps by hand: the library's run loop reads the clock, which panics on
    // wasm32-unknown-unknown.
    pub fn advance(&mut self, k: usize) -> Result<f64> {
        for _ in 0..k {
            let dt = cfl_dt(&self.field, &self.mesh, &self.scheme)?;
            let next = step(&self.field, &self.mesh, dt, &self.scheme, &self.boundary)?;
            self.residual = steadiness_residual(&self.field, &next, &self.mesh, &self.scales);
            self.field = next;
            self.steps += 1;
        }
        Ok(self.residual)
    }

    /// Cell densities sampled at pixel centres.
    pub fn raster(&self, width: usize, height: usize) -> Result<Raster> {
        let rho: Vec<f64> = self.field.primitives()?.iter().map(|s| s.rho).collect();
        let loc = self.mesh.locator();
        Ok(Raster::sample(width, height, |xi| loc.locate(xi).map_or(f64::NAN, |c| rho[c])))
    }

    /// `"T_like"`, `"N_like"` or `"indeterminate"` for the current field.
    pub fn verdict(&self) -> Result<&'static str> {
        Ok(classify(&self.field, &self.mesh, &self.spec, &ClassifyThresholds::default())?.verdict.name())
    }

    pub fn time(&self) -> f64 {
        self.field.t
    }
}

pub mod web {
    use super::*;
    use wasm_bindgen::prelude::*;

    fn js(e: Error) -> JsError {
        JsError::new(&e.to_string())
    }

    fn triple(v: &[f64]) -> std::result::Result<[f64; 3], JsError> {
        <[f64; 3]>::try_from(v).map_err(|_| JsError::new("a state is rho, v, p"))
    }

    /// Flattened `[x, rho, v, p]` rows of the exact Riemann fan.
    #[wasm_bindgen(js_name = riemannProfile)]
    pub fn riemann_profile_js(
        left: &[f64],
        right: &[f64],
        gamma: f64,
        t: f64,
        samples: usize,
        x_min: f64,
        x_max: f64,
    ) -> std::result::Result<Vec<f64>, JsError> {
        let rows = riemann_profile(triple(left)?, triple(right)?, gamma, t, samples, [x_min, x_max]).map_err(js)?;
        Ok(rows.into_iter().flatten().collect())
    }

    /// Density image plus summary numbers of Solution T.
    #[wasm_bindgen]
    pub struct SolutionT {
        spec: SolutionTSpec,
    }

    #[wasm_bindgen]
    impl SolutionT {
        #[wasm_bindgen(constructor)]
        pub fn new(alpha_deg: f64, isentropic: bool) -> std::result::Result<SolutionT, JsError> {
            Ok(SolutionT { spec: solution_t(alpha_deg, gas_kind(isentropic)).map_err(js)? })
        }

        #[wasm_bindgen(js_name = shockAngleDeg)]
        pub fn shock_angle_deg(&self) -> f64 {
            self.spec.sigma.to_degrees()
        }

        #[wasm_bindgen(js_name = postShockDensity)]
        pub fn post_shock_density(&self) -> f64 {
            self.spec.post_shock.rho
        }

        #[wasm_bindgen(js_name = stagnationDensity)]
        pub fn stagnation_density(&self) -> f64 {
            self.spec.stagnation.rho
        }

        pub fn raster(&self, width: usize, height: usize) -> Vec<f64> {
            solution_t_raster(&self.spec, width, height).values
        }
    }

    #[wasm_bindgen]
    pub struct WedgeDemo {
        run: WedgeRun,
    }

    #[wasm_bindgen]
    impl WedgeDemo {
        #[wasm_bindgen(constructor)]
        pub fn new(alpha_deg: f64, isentropic: bool, n: usize, aligned: bool) -> std::result::Result<WedgeDemo, JsError> {
            Ok(WedgeDemo { run: WedgeRun::new(alpha_deg, gas_kind(isentropic), n, aligned).map_err(js)? })
        }

        pub fn advance(&mut self, steps: usize) -> std::result::Result<f64, JsError> {
            self.run.advance(steps).map_err(js)
        }

        pub fn raster(&self, width: usize, height: usize) -> std::result::Result<Vec<f64>, JsError> {
            Ok(self.run.raster(width, height).map_err(js)?.values)
        }

        pub fn verdict(&self) -> std::result::Result<String, JsError> {
            Ok(self.run.verdict().map_err(js)?.to_string())
        }

        pub fn steps(&self) -> usize {
            self.run.steps
        }

        pub fn time(&self) -> f64 {
            self.run.time()
        }

        pub fn cells(&self) -> usize {
            self.run.mesh.num_cells()
        }
    }
}
