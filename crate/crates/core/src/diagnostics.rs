//! Quantitative checks of the solution concepts: discrete entropy production
//! of a solver step, weak-form and entropy-inequality defects against smooth
//! test functions, and estimators for asymptotic self-similarity and
//! steadiness of snapshot series.
//!
//! Self-similarity is measured by comparing `xi -> u(t, t xi)` across times,
//! i.e. cell averages on a fixed similarity mesh. This is the reading that
//! matches `f(rt, rx) = f(t, x)`. The alternative literal reading
//! `u(t, t^{-1} xi)` would compare points that drift apart as `t` grows and is
//! not implemented.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact_fields::{ConicalField, SolutionTSpec};
use crate::fv_solver::{initialize_from_field, EdgeRecord, FieldState, NormScales, StepRecord};
use crate::gas::{ConservativeState, GasModel, PrimitiveState};
use crate::geometry;
use crate::simgrid::SimMesh;
use crate::vec2::{self, Vec2};

/// Per-cell entropy production of one step and the magnitude it should be
/// compared against.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyProduction {
    pub production: Vec<f64>,
    pub scale: Vec<f64>,
}

impl EntropyProduction {
    /// Largest `production / scale` (positive means entropy was created).
    pub fn max_relative(&self) -> f64 {
        self.production
            .iter()
            .zip(&self.scale)
            .map(|(p, s)| if *s > 0.0 { p / s } else { *p })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.production.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `[a(t+dt) A eta(U_new) - a(t) A eta(U_old)] / dt + l sum_e L_e Psi_e` per
/// cell, with `Psi_e` the numerical entropy flux matching the recorded
/// interface states. Nonpositive for entropy-stable steps.
pub fn discrete_entropy_production(
    before: &FieldState,
    after: &FieldState,
    record: Option<&StepRecord>,
    mesh: &SimMesh,
) -> Result<EntropyProduction> {
    let rec = record.ok_or(Error::MissingFluxRecord)?;
    if rec.interfaces.len() != mesh.edges().len() {
        return Err(Error::MissingFluxRecord);
    }
    let g = &before.model;
    let n = mesh.num_cells();
    let mut production = vec![0.0; n];
    let mut scale = vec![0.0; n];
    for c in 0..n {
        let e0 = g.entropy(&before.primitive(c)?);
        let e1 = g.entropy(&after.primitive(c)?);
        let (v0, v1) = (
            rec.area_factor_before * mesh.area(c) * e0,
            rec.area_factor_after * mesh.area(c) * e1,
        );
        production[c] = (v1 - v0) / rec.dt;
        scale[c] = (v1.abs() + v0.abs()) / rec.dt;
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        let s = rec.edge_speed[e];
        let psi = match &rec.interfaces[e] {
            EdgeRecord::Interior(state) => state.entropy_flux(g, edge.normal, s),
            EdgeRecord::Exterior(pieces) => pieces
                .iter()
                .map(|(w, u)| w * (g.entropy_flux(u, edge.normal) - s * g.entropy(u)))
                .sum(),
        };
        let term = rec.length_factor * edge.length * psi;
        production[edge.left] += term;
        scale[edge.left] += term.abs();
        if let Some(r) = edge.right {
            production[r] -= term;
            scale[r] += term.abs();
        }
    }
    Ok(EntropyProduction { production, scale })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> (&'static [f64], &'static [f64]) {
    const X1: [f64; 1] = [0.0];
    const W1: [f64; 1] = [2.0];
    const X2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
    const W2: [f64; 2] = [1.0, 1.0];
    const X3: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W3: [f64; 3] = [0.555_555_555_555_555_6, 0.888_888_888_888_888_9, 0.555_555_555_555_555_6];
    const X4: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W4: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    const X5: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W5: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    match order {
        0 | 1 => (&X1, &W1),
        2 => (&X2, &W2),
        3 => (&X3, &W3),
        4 => (&X4, &W4),
        _ => (&X5, &W5),
    }
}

/// Composite Gauss rule: `pieces` equal subintervals of `[a, b]`.
fn composite(a: f64, b: f64, pieces: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / pieces as f64;
    let mut out = Vec::with_capacity(pieces * x.len());
    for k in 0..pieces {
        let mid = a + (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}

/// `exp(-1 / (1 - s^2))` on `|s| < 1`, zero elsewhere, and its derivative.
#[inline]
fn mollifier(s: f64) -> (f64, f64) {
    let d = 1.0 - s * s;
    if d <= 0.0 {
        return (0.0, 0.0);
    }
    let b = (-1.0 / d).exp();
    (b, -2.0 * s / (d * d) * b)
}

/// Tensor-product mollifier bump in `(t, x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub radius: [f64; 3],
}

impl Bump {
    pub fn new(center: [f64; 3], radius: [f64; 3]) -> Result<Self> {
        if radius.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidParameter("bump radii must be positive".into()));
        }
        Ok(Bump { center, radius })
    }

    /// `(phi, phi_t, phi_x, phi_y)`.
    #[inline]
    pub fn eval(&self, t: f64, x: Vec2) -> [f64; 4] {
        let z = [t, x[0], x[1]];
        let mut v = [0.0; 3];
        let mut d = [0.0; 3];
        for k in 0..3 {
            let (b, db) = mollifier((z[k] - self.center[k]) / self.radius[k]);
            v[k] = b;
            d[k] = db / self.radius[k];
        }
        [
            v[0] * v[1] * v[2],
            d[0] * v[1] * v[2],
            v[0] * d[1] * v[2],
            v[0] * v[1] * d[2],
        ]
    }

    fn t_range(&self) -> (f64, f64) {
        (self.center[0] - self.radius[0], self.center[0] + self.radius[0])
    }

    fn box_corners(&self) -> [Vec2; 4] {
        let [_, cx, cy] = self.center;
        let [_, rx, ry] = self.radius;
        [
            [cx - rx, cy - ry],
            [cx + rx, cy - ry],
            [cx + rx, cy + ry],
            [cx - rx, cy + ry],
        ]
    }
}

/// Test functions with the quadrature used to integrate against them.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctionSet {
    pub bumps: Vec<Bump>,
    /// Gauss points per subinterval and direction.
    pub gauss_order: usize,
    /// Subintervals per direction.
    pub subdivisions: usize,
}

impl TestFunctionSet {
    pub fn new(bumps: Vec<Bump>) -> Self {
        TestFunctionSet {
            bumps,
            gauss_order: 4,
            subdivisions: 32,
        }
    }

    pub fn with_quadrature(self, gauss_order: usize, subdivisions: usize) -> Self {
        TestFunctionSet {
            gauss_order,
            subdivisions: subdivisions.max(1),
            ..self
        }
    }
}

/// Weak-form defect `-int int (U phi_t + f(U) . grad phi)` of one test function
/// and the matching magnitude `int int (|U| |phi_t| + |f(U)| |grad phi|)` per component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakDefect {
    pub defect: ConservativeState,
    pub scale: ConservativeState,
}

impl WeakDefect {
    /// Largest component defect relative to its own scale.
    pub fn relative(&self) -> f64 {
        (0..4)
            .filter(|&k| self.scale[k] > 0.0)
            .map(|k| self.defect[k].abs() / self.scale[k])
            .fold(0.0, f64::max)
    }
}

/// Entropy-inequality defect `-int int (eta phi_t + psi . grad phi)`; at most
/// zero (up to quadrature error) for admissible solutions and nonnegative `phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyDefect {
    pub defect: f64,
    pub scale: f64,
}

impl EntropyDefect {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.defect / self.scale
        } else {
            self.defect
        }
    }
}

struct Accum {
    weak: [f64; 4],
    weak_scale: [f64; 4],
    eef: f64,
    eef_scale: f64,
}

impl Accum {
    fn new() -> Self {
        Accum {
            weak: [0.0; 4],
            weak_scale: [0.0; 4],
            eef: 0.0,
            eef_scale: 0.0,
        }
    }

    #[inline]
    fn add(&mut self, g: &GasModel, u: &PrimitiveState, phi: [f64; 4], w: f64) {
        let uc = g.to_conservative(u);
        let fx = g.physical_flux(u, [1.0, 0.0]);
        let fy = g.physical_flux(u, [0.0, 1.0]);
        let grad = (phi[2] * phi[2] + phi[3] * phi[3]).sqrt();
        for k in 0..4 {
            self.weak[k] -= w * (uc[k] * phi[1] + fx[k] * phi[2] + fy[k] * phi[3]);
            self.weak_scale[k] +=
                w * (uc[k].abs() * phi[1].abs() + (fx[k] * fx[k] + fy[k] * fy[k]).sqrt() * grad);
        }
        let pair = g.entropy_pair(u);
        self.eef -= w * (pair.eta * phi[1] + pair.psi[0] * phi[2] + pair.psi[1] * phi[3]);
        self.eef_scale += w * (pair.eta.abs() * phi[1].abs() + vec2::norm(pair.psi) * grad);
    }

    fn finish(self) -> (WeakDefect, EntropyDefect) {
        (
            WeakDefect {
                defect: ConservativeState(self.weak),
                scale: ConservativeState(self.weak_scale),
            },
            EntropyDefect {
                defect: self.eef,
                scale: self.eef_scale,
            },
        )
    }
}

/// Angular interval `[lo, hi]` (with `hi - lo <= 2 pi`, `lo >= -pi`) covering a box.
fn box_angles(corners: &[Vec2; 4]) -> (f64, f64) {
    if geometry::convex_contains(corners, [0.0, 0.0], 0.0) {
        return (-PI, PI);
    }
    let a: Vec<f64> = corners.iter().map(|p| p[1].atan2(p[0])).collect();
    let (lo, hi) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if hi - lo <= PI {
        (lo, hi)
    } else {
        // the box straddles the negative x axis
        let shifted: Vec<f64> = a.iter().map(|&x| if x < 0.0 { x + 2.0 * PI } else { x }).collect();
        let lo = shifted.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = shifted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

fn box_radii(corners: &[Vec2; 4]) -> (f64, f64) {
    let hi = corners.iter().map(|p| vec2::norm(*p)).fold(0.0, f64::max);
    if geometry::convex_contains(corners, [0.0, 0.0], 0.0) {
        return (0.0, hi);
    }
    // nearest point of the box to the origin
    let (xs, ys) = (
        [corners[0][0], corners[1][0]],
        [corners[0][1], corners[2][1]],
    );
    let nx = 0f64.clamp(xs[0], xs[1]);
    let ny = 0f64.clamp(ys[0], ys[1]);
    (vec2::norm([nx, ny]), hi)
}

/// Weak-form and entropy defects of a conical (self-similar, piecewise
/// constant) field. Each sector is integrated in polar coordinates so the
/// integrand is smooth on every quadrature cell.
pub fn weak_residual_exact(
    field: &ConicalField,
    phis: &TestFunctionSet,
) -> Result<Vec<(WeakDefect, EntropyDefect)>> {
    let g = &field.model;
    let mut out = Vec::with_capacity(phis.bumps.len());
    for bump in &phis.bumps {
        let (t0, t1) = bump.t_range();
        if !(t0 > 0.0) {
            return Err(Error::SupportOutsideWindow);
        }
        let corners = bump.box_corners();
        let (alo, ahi) = box_angles(&corners);
        let (r0, r1) = box_radii(&corners);
        let nq = phis.subdivisions;
        let ts = composite(t0, t1, nq, phis.gauss_order);
        let rs = composite(r0, r1, nq, phis.gauss_order);
        let mut acc = Accum::new();
        // sectors, repeated one turn up so wrapped angle ranges are covered
        for turn in [0.0, 2.0 * PI] {
            for (a, b, state) in field.sectors() {
                let (a, b) = ((a + turn).max(alo), (b + turn).min(ahi));
                if !(b > a) {
                    continue;
                }
                let ths = composite(a, b, nq, phis.gauss_order);
                for &(th, wth) in &ths {
                    let d = vec2::unit_from_angle(th);
                    for &(r, wr) in &rs {
                        let x = vec2::scale(d, r);
                        for &(t, wt) in &ts {
                            let phi = bump.eval(t, x);
                            acc.add(g, state, phi, wt * wr * wth * r);
                        }
                    }
                }
            }
        }
        out.push(acc.finish());
    }
    Ok(out)
}

/// Weak-form and entropy defects of a snapshot series on a similarity mesh.
/// Between snapshots the field is held at the latest earlier snapshot, read at
/// `xi = x / t`. Every bump must lie within the series' time span and, at each
/// of its times, inside the mesh.
pub fn weak_residual_series(
    series: &SnapshotSeries,
    mesh: &SimMesh,
    phis: &TestFunctionSet,
) -> Result<Vec<(WeakDefect, EntropyDefect)>> {
    let n = series.snapshots.len();
    if n == 0 {
        return Err(Error::TooFewSnapshots { need: 1, got: 0 });
    }
    let times = series.times();
    let prims: Vec<Vec<PrimitiveState>> = series
        .snapshots
        .iter()
        .map(|f| f.primitives())
        .collect::<Result<_>>()?;
    let g = &series.snapshots[0].model;
    let locator = mesh.locator();
    let mut out = Vec::with_capacity(phis.bumps.len());
    for bump in &phis.bumps {
        let (t0, t1) = bump.t_range();
        if !(t0 >= times[0] && t1 <= times[n - 1]) {
            return Err(Error::SupportOutsideWindow);
        }
        let c = bump.box_corners();
        let nq = phis.subdivisions;
        let ts = composite(t0, t1, nq, phis.gauss_order);
        let xs = composite(c[0][0], c[1][0], nq, phis.gauss_order);
        let ys = composite(c[0][1], c[2][1], nq, phis.gauss_order);
        let mut acc = Accum::new();
        for &(t, wt) in &ts {
            let k = times.partition_point(|&s| s <= t).saturating_sub(1);
            for &(x, wx) in &xs {
                for &(y, wy) in &ys {
                    let cell = locator
                        .locate([x / t, y / t])
                        .ok_or(Error::SupportOutsideWindow)?;
                    acc.add(g, &prims[k][cell], bump.eval(t, [x, y]), wt * wx * wy);
                }
            }
        }
        out.push(acc.finish());
    }
    Ok(out)
}

/// Snapshots on one similarity mesh with an evaluation window in `xi`.
#[derive(Clone, Debug)]
pub struct SnapshotSeries {
    pub snapshots: Vec<FieldState>,
    /// Convex window `K` in `xi`, counterclockwise; `None` means the whole mesh.
    pub window: Option<Vec<Vec2>>,
}

impl SnapshotSeries {
    pub fn new(snapshots: Vec<FieldState>, window: Option<Vec<Vec2>>) -> Result<Self> {
        for w in snapshots.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::InvalidParameter("snapshot times must increase".into()));
            }
        }
        Ok(SnapshotSeries { snapshots, window })
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|f| f.t).collect()
    }

    fn cells_in_window(&self, mesh: &SimMesh) -> Vec<usize> {
        (0..mesh.num_cells())
            .filter(|&c| match &self.window {
                None => true,
                Some(k) => geometry::convex_contains(k, mesh.centroid(c), 0.0),
            })
            .collect()
    }
}

/// Result of [`self_similarity_deviation`].
#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarity {
    pub times: Vec<f64>,
    /// `D(t)`: windowed L1 distance of `xi -> u(t, t xi)` from the limit candidate.
    pub deviation: Vec<f64>,
    /// Limit candidate `w`, the mean of the last quarter of snapshots.
    pub limit: Vec<ConservativeState>,
}

/// Number of trailing snapshots averaged into a limit candidate.
fn tail_len(n: usize) -> usize {
    n.div_ceil(4).max(1)
}

/// Area-weighted windowed L1 distance (scaled norm) between two cell fields.
fn windowed_distance(
    a: &[ConservativeState],
    b: &[ConservativeState],
    cells: &[usize],
    mesh: &SimMesh,
    scales: &NormScales,
) -> f64 {
    let area: f64 = cells.iter().map(|&c| mesh.area(c)).sum();
    let sum: f64 = cells
        .iter()
        .map(|&c| mesh.area(c) * scales.norm(&(a[c] - b[c])))
        .sum();
    sum / area
}

/// `D(t) = sum_{c in K} A_c |U_c(t) - w_c| / sum_{c in K} A_c`, with `|.|` the
/// scaled norm of [`NormScales`] taken from the last snapshot.
pub fn self_similarity_deviation(series: &SnapshotSeries, mesh: &SimMesh) -> Result<SelfSimilarity> {
    let n = series.snapshots.len();
    if n < 3 {
        return Err(Error::TooFewSnapshots { need: 3, got: n });
    }
    let tail = tail_len(n);
    let mut limit = vec![ConservativeState::ZERO; mesh.num_cells()];
    for f in &series.snapshots[n - tail..] {
        for (l, u) in limit.iter_mut().zip(&f.cells) {
            *l += *u;
        }
    }
    for l in &mut limit {
        *l = *l * (1.0 / tail as f64);
    }
    let scales = NormScales::of(series.snapshots.last().unwrap(), mesh)?;
    let cells = series.cells_in_window(mesh);
    if cells.is_empty() {
        return Err(Error::InvalidParameter("window contains no cells".into()));
    }
    let deviation = series
        .snapshots
        .iter()
        .map(|f| windowed_distance(&f.cells, &limit, &cells, mesh, &scales))
        .collect();
    Ok(SelfSimilarity {
        times: series.times(),
        deviation,
        limit,
    })
}

/// Distance of every snapshot from the sector averages of `initial` on the
/// same window. For a solution attaining its initial data the early values
/// stay at the size of the first-step perturbation.
pub fn trace_distance(series: &SnapshotSeries, mesh: &SimMesh, initial: &ConicalField) -> Result<Vec<f64>> {
    let n = series.snapshots.len();
    if n == 0 {
        return Err(Error::TooFewSnapshots { need: 1, got: 0 });
    }
    let reference = initialize_from_field(initial, mesh, series.snapshots[0].t)?;
    let scales = NormScales::of(&reference, mesh)?;
    let cells = series.cells_in_window(mesh);
    Ok(series
        .snapshots
        .iter()
        .map(|f| windowed_distance(&f.cells, &reference.cells, &cells, mesh, &scales))
        .collect())
}

/// Samples every snapshot at the fixed physical points `points` (the similarity
/// mesh sits at `t xi`) and returns, per time, the mean scaled distance from
/// the mean of the last quarter of samples. Zero for steady flows.
pub fn steadiness_deviation(series: &SnapshotSeries, mesh: &SimMesh, points: &[Vec2]) -> Result<Vec<f64>> {
    let n = series.snapshots.len();
    if n < 3 {
        return Err(Error::TooFewSnapshots { need: 3, got: n });
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("no sample points".into()));
    }
    let locator = mesh.locator();
    let mut samples: Vec<Vec<ConservativeState>> = Vec::with_capacity(n);
    for f in &series.snapshots {
        let mut row = Vec::with_capacity(points.len());
        for p in points {
            let c = locator
                .locate(vec2::scale(*p, 1.0 / f.t))
                .ok_or(Error::WindowOutsideMesh { t: f.t })?;
            row.push(f.cells[c]);
        }
        samples.push(row);
    }
    let tail = tail_len(n);
    let mut limit = vec![ConservativeState::ZERO; points.len()];
    for row in &samples[n - tail..] {
        for (l, u) in limit.iter_mut().zip(row) {
            *l += *u;
        }
    }
    for l in &mut limit {
        *l = *l * (1.0 / tail as f64);
    }
    let scales = NormScales::of(series.snapshots.last().unwrap(), mesh)?;
    Ok(samples
        .iter()
        .map(|row| {
            row.iter()
                .zip(&limit)
                .map(|(u, l)| scales.norm(&(*u - *l)))
                .sum::<f64>()
                / points.len() as f64
        })
        .collect())
}

/// Regular `n x n` grid of points covering a box.
pub fn grid_points(lo: Vec2, hi: Vec2, n: usize) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            let r = (j as f64 + 0.5) / n as f64;
            out.push([lo[0] + s * (hi[0] - lo[0]), lo[1] + r * (hi[1] - lo[1])]);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    TLike,
    NLike,
    Indeterminate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::TLike => "T_like",
            Verdict::NLike => "N_like",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyThresholds {
    /// Speed (m/s) above which the wedge is considered in motion.
    pub wedge_velocity: f64,
    /// Relative L1 distance to Solution T below which the field matches it.
    pub distance: f64,
    /// Cells count as inside the wedge when every vertex has `|theta| < alpha (1 - margin)`.
    pub angular_margin: f64,
    /// Cells closer than this to the origin are ignored by the wedge metric.
    pub min_radius: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds {
            wedge_velocity: 100.0,
            distance: 0.1,
            angular_margin: 0.2,
            min_radius: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Largest `|v|` over cells inside the wedge.
    pub wedge_velocity: f64,
    /// Relative L1 distance (scaled by the inflow state) to the cell averages of Solution T.
    pub distance: f64,
    pub wedge_cells: usize,
}

/// Cells lying strictly inside the wedge `|theta| < alpha (1 - margin)`.
pub fn wedge_cells(mesh: &SimMesh, spec: &SolutionTSpec, th: &ClassifyThresholds) -> Vec<usize> {
    let limit = spec.alpha * (1.0 - th.angular_margin);
    (0..mesh.num_cells())
        .filter(|&c| {
            vec2::norm(mesh.centroid(c)) >= th.min_radius
                && mesh.polygon(c).iter().all(|&v| {
                    let p = mesh.vertices()[v];
                    p[0] > 0.0 && p[1].atan2(p[0]).abs() < limit
                })
        })
        .collect()
}

/// Decides whether a final field looks like Solution T or like a flow with a
/// moving wedge region.
pub fn classify(
    f: &FieldState,
    mesh: &SimMesh,
    spec: &SolutionTSpec,
    th: &ClassifyThresholds,
) -> Result<Classification> {
    let prims = f.primitives()?;
    let wedge = wedge_cells(mesh, spec, th);
    let wedge_velocity = wedge.iter().map(|&c| prims[c].speed()).fold(0.0, f64::max);
    let reference = initialize_from_field(&spec.field, mesh, f.t)?;
    let g = &spec.model;
    let scales = NormScales {
        rho: spec.inflow.rho,
        speed: g.sound_speed(&spec.inflow),
    };
    let num: f64 = (0..mesh.num_cells())
        .map(|c| mesh.area(c) * scales.norm(&(f.cells[c] - reference.cells[c])))
        .sum();
    let den = scales.field_norm(&reference.cells, mesh);
    let distance = num / den;
    let verdict = if wedge_velocity > th.wedge_velocity {
        Verdict::NLike
    } else if distance < th.distance {
        Verdict::TLike
    } else {
        Verdict::Indeterminate
    };
    Ok(Classification {
        verdict,
        wedge_velocity,
        distance,
        wedge_cells: wedge.len(),
    })
}
