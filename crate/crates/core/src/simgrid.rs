//! Meshes in similarity coordinates `xi`. Vertices move as `x = t xi`, so
//! every cell keeps its shape: physical areas scale with `t^2`, edge lengths
//! with `t`, and each point of an edge moves with constant velocity `xi`.
//!
//! Cells are convex polygons described by their geometric corners (3 or 4).
//! Refinement splits a cell into four children; a coarser neighbour then picks
//! up the new side midpoint as an extra polygon vertex, so the flux assembly
//! always sees a conforming polygonal mesh. Refinement is 2:1 balanced across
//! edges.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exact_fields::{ConicalField, SolutionTSpec};
use crate::gas::{GasModel, PrimitiveState};
use crate::geometry;
use crate::vec2::{self, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    /// Geometric corners, counterclockwise.
    pub corners: Vec<usize>,
    pub level: u8,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Cell for which `vertices` runs counterclockwise; the normal points out of it.
    pub left: usize,
    /// Cell on the other side, `None` on the domain boundary.
    pub right: Option<usize>,
    pub length: f64,
    pub normal: Vec2,
    pub midpoint: Vec2,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// Outward normal with respect to cell `c` and the sign relating it to `normal`.
    #[inline]
    pub fn sign_for(&self, c: usize) -> f64 {
        if self.left == c {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimMesh {
    vertices: Vec<Vec2>,
    cells: Vec<Cell>,
    midpoints: HashMap<(usize, usize), usize>,
    polygons: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    area: Vec<f64>,
    centroid: Vec<Vec2>,
    perimeter: Vec<f64>,
}

#[inline]
fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SimMesh {
    /// Assembles a mesh. `midpoints` maps a corner pair to the vertex splitting
    /// that side, for sides whose neighbour has been refined.
    pub fn from_cells(
        vertices: Vec<Vec2>,
        cells: Vec<Cell>,
        midpoints: HashMap<(usize, usize), usize>,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::DegenerateDomain("mesh has no cells".into()));
        }
        let mut polygons = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.corners.len() < 3 || cell.corners.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::DegenerateDomain("malformed cell".into()));
            }
            let mut poly = Vec::with_capacity(cell.corners.len() + 2);
            let k = cell.corners.len();
            for i in 0..k {
                let (a, b) = (cell.corners[i], cell.corners[(i + 1) % k]);
                poly.push(a);
                push_side_interior(&midpoints, a, b, &mut poly);
            }
            polygons.push(poly);
        }

        let mut area = Vec::with_capacity(cells.len());
        let mut centroid = Vec::with_capacity(cells.len());
        let mut perimeter = Vec::with_capacity(cells.len());
        for (c, poly) in polygons.iter().enumerate() {
            let pts: Vec<Vec2> = poly.iter().map(|&i| vertices[i]).collect();
            let a = geometry::polygon_area(&pts);
            if !(a > 0.0) {
                return Err(Error::DegenerateDomain(format!(
                    "cell {c} has nonpositive area {a:e}"
                )));
            }
            area.push(a);
            centroid.push(geometry::polygon_centroid(&pts));
            perimeter.push(geometry::polygon_perimeter(&pts));
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_edges = vec![Vec::new(); cells.len()];
        for (c, poly) in polygons.iter().enumerate() {
            let k = poly.len();
            for i in 0..k {
                let (a, b) = (poly[i], poly[(i + 1) % k]);
                match lookup.get(&key(a, b)) {
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let d = vec2::sub(pb, pa);
                        let length = vec2::norm(d);
                        lookup.insert(key(a, b), edges.len());
                        cell_edges[c].push(edges.len());
                        edges.push(Edge {
                            vertices: [a, b],
                            left: c,
                            right: None,
                            length,
                            normal: [d[1] / length, -d[0] / length],
                            midpoint: vec2::lerp(pa, pb, 0.5),
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() || edge.vertices != [b, a] {
                            return Err(Error::DegenerateDomain(format!(
                                "edge {a}-{b} is not shared consistently"
                            )));
                        }
                        edge.right = Some(c);
                        cell_edges[c].push(e);
                    }
                }
            }
        }

        Ok(SimMesh {
            vertices,
            cells,
            midpoints,
            polygons,
            edges,
            cell_edges,
            area,
            centroid,
            perimeter,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn polygon(&self, c: usize) -> &[usize] {
        &self.polygons[c]
    }

    pub fn polygon_points(&self, c: usize) -> Vec<Vec2> {
        self.polygons[c].iter().map(|&i| self.vertices[i]).collect()
    }

    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    /// Cell area in the `xi` plane.
    pub fn area(&self, c: usize) -> f64 {
        self.area[c]
    }

    pub fn areas(&self) -> &[f64] {
        &self.area
    }

    pub fn centroid(&self, c: usize) -> Vec2 {
        self.centroid[c]
    }

    pub fn centroids(&self) -> &[Vec2] {
        &self.centroid
    }

    pub fn perimeter(&self, c: usize) -> f64 {
        self.perimeter[c]
    }

    /// Incircle diameter `4 A / P` (exact for tangential polygons; the side length for squares).
    pub fn length_scale(&self, c: usize) -> f64 {
        4.0 * self.area[c] / self.perimeter[c]
    }

    pub fn total_area(&self) -> f64 {
        self.area.iter().sum()
    }

    pub fn level(&self, c: usize) -> u8 {
        self.cells[c].level
    }

    pub fn neighbors(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.cell_edges[c].iter().filter_map(move |&e| {
            let edge = &self.edges[e];
            if edge.left == c {
                edge.right
            } else {
                Some(edge.left)
            }
        })
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_boundary())
    }

    /// `V - E + C`; equals 1 for a simply connected domain.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.cells.len() as i64
    }

    /// Physical geometry at time `t`.
    pub fn geometry_at(&self, t: f64) -> Result<MeshGeometryAt> {
        if !(t > 0.0) {
            return Err(Error::NonpositiveTime(t));
        }
        Ok(MeshGeometryAt {
            t,
            cell_area: self.area.iter().map(|a| t * t * a).collect(),
            edge_length: self.edges.iter().map(|e| t * e.length).collect(),
            edge_velocity: self.edges.iter().map(|e| e.midpoint).collect(),
            vertex_position: self.vertices.iter().map(|&v| vec2::scale(v, t)).collect(),
        })
    }

    /// Refines the marked cells (plus whatever 2:1 balance requires).
    pub fn refine(&self, marked: &[usize]) -> SimMesh {
        self.refine_mapped(marked).0
    }

    /// Like [`refine`](Self::refine); also returns, for each new cell, the index
    /// of the old cell it came from.
    pub fn refine_mapped(&self, marked: &[usize]) -> (SimMesh, Vec<usize>) {
        let mut split: HashSet<usize> = marked.iter().copied().collect();
        // balance: a refined cell may not border a cell more than one level coarser
        let mut stack: Vec<usize> = split.iter().copied().collect();
        while let Some(c) = stack.pop() {
            let lvl = self.cells[c].level;
            for n in self.neighbors(c) {
                if self.cells[n].level < lvl && split.insert(n) {
                    stack.push(n);
                }
            }
        }
        if split.is_empty() {
            return (self.clone(), (0..self.num_cells()).collect());
        }
        let mut order: Vec<usize> = split.into_iter().collect();
        order.sort_unstable();

        let mut vertices = self.vertices.clone();
        let mut midpoints = self.midpoints.clone();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec2>| -> usize {
            *midpoints.entry(key(a, b)).or_insert_with(|| {
                vertices.push(vec2::lerp(vertices[a], vertices[b], 0.5));
                vertices.len() - 1
            })
        };

        let is_split: Vec<bool> = {
            let mut v = vec![false; self.num_cells()];
            for &c in &order {
                v[c] = true;
            }
            v
        };
        let mut cells = Vec::with_capacity(self.num_cells() + 3 * order.len());
        let mut parent = Vec::with_capacity(cells.capacity());
        for (c, cell) in self.cells.iter().enumerate() {
            if !is_split[c] {
                cells.push(cell.clone());
                parent.push(c);
                continue;
            }
            let k = &cell.corners;
            let level = cell.level + 1;
            match k.len() {
                4 => {
                    let m01 = midpoint(k[0], k[1], &mut vertices);
                    let m12 = midpoint(k[1], k[2], &mut vertices);
                    let m23 = midpoint(k[2], k[3], &mut vertices);
                    let m30 = midpoint(k[3], k[0], &mut vertices);
                    let ctr = k.iter().fold([0.0, 0.0], |s, &i| vec2::add(s, self.vertices[i]));
                    vertices.push(vec2::scale(ctr, 0.25));
                    let ctr = vertices.len() - 1;
                    for corners in [
                        vec![k[0], m01, ctr, m30],
                        vec![m01, k[1], m12, ctr],
                        vec![ctr, m12, k[2], m23],
                        vec![m30, ctr, m23, k[3]],
                    ] {
                        cells.push(Cell { corners, level });
                        parent.push(c);
                    }
                }
                3 => {
                    let m01 = midpoint(k[0], k[1], &mut vertices);
                    let m12 = midpoint(k[1], k[2], &mut vertices);
                    let m20 = midpoint(k[2], k[0], &mut vertices);
                    for corners in [
                        vec![k[0], m01, m20],
                        vec![m01, k[1], m12],
                        vec![m20, m12, k[2]],
                        vec![m01, m12, m20],
                    ] {
                        cells.push(Cell { corners, level });
                        parent.push(c);
                    }
                }
                _ => unreachable!("cells have 3 or 4 corners"),
            }
        }
        let mesh = SimMesh::from_cells(vertices, cells, midpoints)
            .expect("refinement of a valid mesh stays valid");
        (mesh, parent)
    }

    /// Cells adjacent to an edge across which the density jumps by more than
    /// `threshold` (relative) or the velocity by more than `threshold` times the
    /// larger signal speed, restricted to cells below `max_level`.
    pub fn mark_jumps(
        &self,
        states: &[PrimitiveState],
        g: &GasModel,
        threshold: f64,
        max_level: u8,
    ) -> Vec<usize> {
        let mut marked = vec![false; self.num_cells()];
        for e in &self.edges {
            let Some(r) = e.right else { continue };
            let (a, b) = (&states[e.left], &states[r]);
            let drho = (a.rho - b.rho).abs() / a.rho.min(b.rho);
            let signal = (a.speed() + g.sound_speed(a)).max(b.speed() + g.sound_speed(b));
            let dv = vec2::norm(vec2::sub(a.v, b.v)) / signal;
            if drho > threshold || dv > threshold {
                marked[e.left] = true;
                marked[r] = true;
            }
        }
        (0..self.num_cells())
            .filter(|&c| marked[c] && self.cells[c].level < max_level)
            .collect()
    }

    /// Point location structure for repeated queries.
    pub fn locator(&self) -> CellLocator<'_> {
        CellLocator::new(self)
    }

    /// Plain-text serialization (see [`SimMesh::from_text`]).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# selfsim mesh v1").unwrap();
        writeln!(s, "vertices {}", self.vertices.len()).unwrap();
        for v in &self.vertices {
            writeln!(s, "{:e} {:e}", v[0], v[1]).unwrap();
        }
        writeln!(s, "cells {}", self.cells.len()).unwrap();
        for c in &self.cells {
            write!(s, "{} {}", c.level, c.corners.len()).unwrap();
            for v in &c.corners {
                write!(s, " {v}").unwrap();
            }
            s.push('\n');
        }
        let mut mids: Vec<_> = self.midpoints.iter().collect();
        mids.sort();
        writeln!(s, "midpoints {}", mids.len()).unwrap();
        for ((a, b), m) in mids {
            writeln!(s, "{a} {b} {m}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("mesh text: {msg}"));
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut section = |name: &str| -> Result<(usize, Vec<&str>)> {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let mut it = line.split_whitespace();
            let n: usize = match (it.next(), it.next().and_then(|n| n.parse().ok())) {
                (Some(h), Some(n)) if h == name => n,
                _ => return Err(bad(&format!("expected `{name} <count>`"))),
            };
            let body: Vec<&str> = lines.by_ref().take(n).collect();
            if body.len() != n {
                return Err(bad(&format!("truncated {name}")));
            }
            Ok((n, body))
        };
        fn numbers<T: std::str::FromStr>(line: &str) -> Option<Vec<T>> {
            line.split_whitespace().map(|t| t.parse().ok()).collect()
        }

        let (_, body) = section("vertices")?;
        let vertices = body
            .iter()
            .map(|l| match numbers::<f64>(l).as_deref() {
                Some(&[x, y]) => Ok([x, y]),
                _ => Err(bad("bad vertex")),
            })
            .collect::<Result<Vec<Vec2>>>()?;
        let (_, body) = section("cells")?;
        let cells = body
            .iter()
            .map(|l| {
                let nums = numbers::<usize>(l).ok_or_else(|| bad("bad cell"))?;
                if nums.len() < 2 || nums.len() != 2 + nums[1] {
                    return Err(bad("bad cell"));
                }
                Ok(Cell {
                    level: u8::try_from(nums[0]).map_err(|_| bad("bad level"))?,
                    corners: nums[2..].to_vec(),
                })
            })
            .collect::<Result<Vec<Cell>>>()?;
        let (_, body) = section("midpoints")?;
        let mut midpoints = HashMap::with_capacity(body.len());
        for l in body {
            match numbers::<usize>(l).as_deref() {
                Some(&[a, b, m]) if m < vertices.len() => {
                    midpoints.insert(key(a, b), m);
                }
                _ => return Err(bad("bad midpoint")),
            }
        }
        SimMesh::from_cells(vertices, cells, midpoints)
    }
}

fn push_side_interior(
    midpoints: &HashMap<(usize, usize), usize>,
    a: usize,
    b: usize,
    out: &mut Vec<usize>,
) {
    if let Some(&m) = midpoints.get(&key(a, b)) {
        push_side_interior(midpoints, a, m, out);
        out.push(m);
        push_side_interior(midpoints, m, b, out);
    }
}

/// Physical geometry of a similarity mesh at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshGeometryAt {
    pub t: f64,
    pub cell_area: Vec<f64>,
    pub edge_length: Vec<f64>,
    /// Velocity of each edge midpoint, equal to its `xi` position.
    pub edge_velocity: Vec<Vec2>,
    pub vertex_position: Vec<Vec2>,
}

/// Bucketed point location over a mesh.
pub struct CellLocator<'a> {
    mesh: &'a SimMesh,
    origin: Vec2,
    inv_h: Vec2,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> CellLocator<'a> {
    fn new(mesh: &'a SimMesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &mesh.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let n = (mesh.num_cells() as f64).sqrt().ceil().max(1.0) as usize;
        let (nx, ny) = (n, n);
        let size = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
        let inv_h = [nx as f64 / size[0], ny as f64 / size[1]];
        let mut buckets = vec![Vec::new(); nx * ny];
        let clamp = |x: f64, n: usize| (x.floor().max(0.0) as usize).min(n - 1);
        for c in 0..mesh.num_cells() {
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &v in mesh.polygon(c) {
                let p = mesh.vertices[v];
                for k in 0..2 {
                    a[k] = a[k].min(p[k]);
                    b[k] = b[k].max(p[k]);
                }
            }
            let (i0, i1) = (
                clamp((a[0] - lo[0]) * inv_h[0], nx),
                clamp((b[0] - lo[0]) * inv_h[0], nx),
            );
            let (j0, j1) = (
                clamp((a[1] - lo[1]) * inv_h[1], ny),
                clamp((b[1] - lo[1]) * inv_h[1], ny),
            );
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(c);
                }
            }
        }
        CellLocator {
            mesh,
            origin: lo,
            inv_h,
            nx,
            ny,
            buckets,
        }
    }

    /// Cell containing `xi`, if any.
    pub fn locate(&self, xi: Vec2) -> Option<usize> {
        let fx = (xi[0] - self.origin[0]) * self.inv_h[0];
        let fy = (xi[1] - self.origin[1]) * self.inv_h[1];
        if !(fx >= -1e-9 && fy >= -1e-9 && fx <= self.nx as f64 + 1e-9 && fy <= self.ny as f64 + 1e-9) {
            return None;
        }
        let i = (fx.floor().max(0.0) as usize).min(self.nx - 1);
        let j = (fy.floor().max(0.0) as usize).min(self.ny - 1);
        self.buckets[j * self.nx + i].iter().copied().find(|&c| {
            geometry::convex_contains(&self.mesh.polygon_points(c), xi, 1e-12)
        })
    }
}

/// Outcome of the supersonic-boundary test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupersonicCheck {
    pub ok: bool,
    /// `min xi . n` over the boundary minus the largest signal speed.
    pub margin: f64,
    pub min_boundary_speed: f64,
    pub max_signal_speed: f64,
}

/// Whether every boundary point moves outward faster than any signal in the
/// domain (`xi . n > |v| + c`), so all boundary fluxes may be prescribed.
pub fn check_supersonic_boundary(mesh: &SimMesh, max_signal_speed: f64) -> SupersonicCheck {
    let min_boundary_speed = mesh
        .boundary_edges()
        .flat_map(|(_, e)| {
            // xi . n is linear along the edge; check both ends
            let a = mesh.vertices[e.vertices[0]];
            let b = mesh.vertices[e.vertices[1]];
            [vec2::dot(a, e.normal), vec2::dot(b, e.normal)]
        })
        .fold(f64::INFINITY, f64::min);
    let margin = min_boundary_speed - max_signal_speed;
    SupersonicCheck {
        ok: margin > 0.0,
        margin,
        min_boundary_speed,
        max_signal_speed,
    }
}

/// [`check_supersonic_boundary`] against the signal speeds of a conical field.
pub fn check_supersonic_boundary_field(mesh: &SimMesh, field: &ConicalField) -> SupersonicCheck {
    check_supersonic_boundary(mesh, field.max_signal_speed())
}

/// Convex quadrilateral domain, corners counterclockwise starting bottom-left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadDomain {
    pub corners: [Vec2; 4],
}

impl QuadDomain {
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        QuadDomain {
            corners: [[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        }
    }

    /// Square `[-h, h]^2` centred on the origin.
    pub fn centered_square(half_width: f64) -> Self {
        Self::rectangle(-half_width, -half_width, half_width, half_width)
    }

    fn validate(&self) -> Result<()> {
        let c = &self.corners;
        for i in 0..4 {
            let e0 = vec2::sub(c[(i + 1) % 4], c[i]);
            let e1 = vec2::sub(c[(i + 2) % 4], c[(i + 1) % 4]);
            if !(vec2::cross(e0, e1) > 0.0) {
                return Err(Error::DegenerateDomain(
                    "domain corners must form a convex counterclockwise quadrilateral".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Makes chosen grid lines follow rays from the origin over the right part of
/// a structured mesh. Lines are fully aligned for `s >= full_from` (`s` the
/// normalized coordinate from the left side), blended in over
/// `[blend_from, full_from]`, and untouched left of `blend_from`.
#[derive(Clone, Debug, PartialEq)]
pub struct RayAlignment {
    pub angles: Vec<f64>,
    pub blend_from: f64,
    pub full_from: f64,
}

impl RayAlignment {
    pub fn new(angles: Vec<f64>) -> Self {
        RayAlignment {
            angles,
            blend_from: 0.6,
            full_from: 0.8,
        }
    }
}

/// Structured `nx x ny` quadrilateral mesh of a convex quadrilateral.
pub fn build_domain_mesh(
    domain: &QuadDomain,
    nx: usize,
    ny: usize,
    alignment: Option<&RayAlignment>,
) -> Result<SimMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::DegenerateDomain("cell counts must be positive".into()));
    }
    domain.validate()?;
    let [c0, c1, c2, c3] = domain.corners;
    let column = |s: f64| (vec2::lerp(c0, c1, s), vec2::lerp(c3, c2, s));

    // grid-line indices that follow each ray, fixed on the right side
    let mut rays: Vec<(usize, f64)> = Vec::new();
    if let Some(al) = alignment {
        if !(0.0 <= al.blend_from && al.blend_from <= al.full_from && al.full_from <= 1.0) {
            return Err(Error::InvalidParameter("bad alignment zone".into()));
        }
        let mut angles = al.angles.clone();
        angles.sort_by(f64::total_cmp);
        let (b, t) = column(1.0);
        let mut last = 0usize;
        for a in angles {
            if let Some(r) = geometry::segment_ray_crossing(b, t, vec2::unit_from_angle(a)) {
                let j = ((r * ny as f64).round() as usize).clamp(last + 1, ny.saturating_sub(1));
                if j > last && j < ny {
                    rays.push((j, a));
                    last = j;
                }
            }
        }
    }

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        let s = i as f64 / nx as f64;
        let (b, t) = column(s);
        let w = match alignment {
            Some(al) if !rays.is_empty() => {
                if s >= al.full_from {
                    1.0
                } else if s <= al.blend_from {
                    0.0
                } else {
                    let u = (s - al.blend_from) / (al.full_from - al.blend_from);
                    u * u * (3.0 - 2.0 * u)
                }
            }
            _ => 0.0,
        };
        // breakpoints (index, parameter) for the aligned distribution on this column
        let mut knots: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        if w > 0.0 {
            for &(j, a) in &rays {
                match geometry::segment_ray_crossing(b, t, vec2::unit_from_angle(a)) {
                    Some(r) if r > knots.last().unwrap().1 => knots.push((j as f64, r)),
                    _ => {
                        return Err(Error::DegenerateDomain(format!(
                            "alignment ray at {a} rad leaves the aligned zone"
                        )))
                    }
                }
            }
        }
        knots.push((ny as f64, 1.0));
        for j in 0..=ny {
            let uniform = j as f64 / ny as f64;
            let r = if w > 0.0 {
                let jf = j as f64;
                let k = knots.partition_point(|&(kj, _)| kj <= jf).clamp(1, knots.len() - 1);
                let (ja, ra) = knots[k - 1];
                let (jb, rb) = knots[k];
                let aligned = if jf == ja { ra } else { ra + (rb - ra) * (jf - ja) / (jb - ja) };
                (1.0 - w) * uniform + w * aligned
            } else {
                uniform
            };
            vertices.push(if w == 1.0 {
                // land exactly on the ray where one passes through this node
                match rays.iter().find(|&&(jr, _)| jr == j) {
                    Some(&(_, a)) => {
                        let d = vec2::unit_from_angle(a);
                        let rr = geometry::segment_ray_crossing(b, t, d).unwrap_or(r);
                        let p = vec2::lerp(b, t, rr);
                        vec2::scale(d, vec2::dot(p, d))
                    }
                    None => vec2::lerp(b, t, r),
                }
            } else {
                vec2::lerp(b, t, r)
            });
        }
    }
    let idx = |i: usize, j: usize| i * (ny + 1) + j;
    let mut cells = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            cells.push(Cell {
                corners: vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)],
                level: 0,
            });
        }
    }
    SimMesh::from_cells(vertices, cells, HashMap::new())
}

/// Polar mesh of a convex polygon around the origin whose angular grid lines
/// include every discontinuity ray of `spec`, so no cell straddles a discontinuity.
/// The innermost ring consists of triangles meeting at the origin.
pub fn aligned_mesh_for_t(
    spec: &SolutionTSpec,
    domain: &[Vec2],
    n_theta: usize,
    n_r: usize,
) -> Result<SimMesh> {
    aligned_polar_mesh(domain, &spec.ray_angles(), n_theta, n_r)
}

/// Polar mesh whose angular lines include `rays` and the domain corners.
pub fn aligned_polar_mesh(
    domain: &[Vec2],
    rays: &[f64],
    n_theta: usize,
    n_r: usize,
) -> Result<SimMesh> {
    if domain.len() < 3 || n_theta < 3 || n_r == 0 {
        return Err(Error::DegenerateDomain("bad polar mesh parameters".into()));
    }
    if !(geometry::polygon_area(domain) > 0.0)
        || !geometry::convex_contains(domain, [0.0, 0.0], 0.0)
    {
        return Err(Error::DegenerateDomain(
            "polar mesh domain must be counterclockwise and contain the origin".into(),
        ));
    }
    let wrap = |a: f64| {
        let mut a = a % (2.0 * PI);
        if a >= PI {
            a -= 2.0 * PI;
        }
        if a < -PI {
            a += 2.0 * PI;
        }
        a
    };
    let mut knots: Vec<f64> = rays.iter().map(|&a| wrap(a)).collect();
    knots.extend(domain.iter().map(|p| p[1].atan2(p[0])).map(wrap));
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let target = 2.0 * PI / n_theta as f64;
    let mut angles = Vec::new();
    for k in 0..knots.len() {
        let a = knots[k];
        let b = if k + 1 < knots.len() { knots[k + 1] } else { knots[0] + 2.0 * PI };
        let pieces = ((b - a) / target).round().max(1.0) as usize;
        for p in 0..pieces {
            angles.push(if p == 0 { a } else { a + (b - a) * p as f64 / pieces as f64 });
        }
    }
    let boundary: Vec<Vec2> = angles
        .iter()
        .map(|&a| {
            let d = vec2::unit_from_angle(a);
            let s = geometry::ray_exit(domain, d).expect("origin lies inside the domain");
            vec2::scale(d, s)
        })
        .collect();
    let na = angles.len();
    let mut vertices = vec![[0.0, 0.0]];
    for j in 1..=n_r {
        let s = j as f64 / n_r as f64;
        for b in &boundary {
            vertices.push(if j == n_r { *b } else { vec2::scale(*b, s) });
        }
    }
    let idx = |j: usize, i: usize| 1 + (j - 1) * na + (i % na);
    let mut cells = Vec::with_capacity(na * n_r);
    for i in 0..na {
        cells.push(Cell {
            corners: vec![0, idx(1, i), idx(1, i + 1)],
            level: 0,
        });
    }
    for j in 1..n_r {
        for i in 0..na {
            cells.push(Cell {
                corners: vec![idx(j, i), idx(j + 1, i), idx(j + 1, i + 1), idx(j, i + 1)],
                level: 0,
            });
        }
    }
    SimMesh::from_cells(vertices, cells, HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> SimMesh {
        build_domain_mesh(&QuadDomain::rectangle(0.0, 0.0, 1.0, 1.0), n, n, None).unwrap()
    }

    #[test]
    fn structured_counts() {
        let m = unit_square(2);
        assert_eq!(m.num_cells(), 4);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        let (nx, ny) = (5, 3);
        let m = build_domain_mesh(&QuadDomain::rectangle(0.0, 0.0, 2.0, 1.0), nx, ny, None).unwrap();
        let interior = m.edges().iter().filter(|e| !e.is_boundary()).count();
        assert_eq!(interior, 2 * nx * ny - nx - ny);
        for e in m.edges() {
            assert!((vec2::norm(e.normal) - 1.0).abs() < 1e-15);
        }
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn normals_point_from_left_to_right() {
        let m = unit_square(3);
        for e in m.edges() {
            if let Some(r) = e.right {
                let d = vec2::sub(m.centroid(r), m.centroid(e.left));
                assert!(vec2::dot(d, e.normal) > 0.0);
            } else {
                let d = vec2::sub(e.midpoint, m.centroid(e.left));
                assert!(vec2::dot(d, e.normal) > 0.0);
            }
        }
    }

    #[test]
    fn empty_refinement_is_identity() {
        let m = unit_square(2);
        let r = m.refine(&[]);
        assert_eq!(r.vertices(), m.vertices());
        assert_eq!(r.cells(), m.cells());
    }

    #[test]
    fn single_refinement_adds_hanging_vertices_to_neighbours() {
        let m = unit_square(2);
        let r = m.refine(&[0]);
        assert_eq!(r.num_cells(), 7);
        assert!((r.total_area() - 1.0).abs() < 1e-15);
        // the two neighbours of cell 0 became pentagons
        let pentagons = (0..r.num_cells()).filter(|&c| r.polygon(c).len() == 5).count();
        assert_eq!(pentagons, 2);
        assert_eq!(r.euler_characteristic(), 1);
        for e in r.edges() {
            assert!(e.length > 0.0);
        }
    }

    #[test]
    fn balance_forces_neighbour_refinement() {
        let m = unit_square(2).refine(&[0]);
        // refine the child of cell 0 that touches the coarse neighbour on its right
        let fine = (0..m.num_cells())
            .find(|&c| m.level(c) == 1 && m.centroid(c) == [0.375, 0.125])
            .unwrap();
        let r = m.refine(&[fine]);
        let max_jump = r
            .edges()
            .iter()
            .filter_map(|e| e.right.map(|o| (r.level(e.left) as i32 - r.level(o) as i32).abs()))
            .max()
            .unwrap();
        assert!(max_jump <= 1);
        assert!((r.total_area() - 1.0).abs() < 1e-14);
        assert_eq!(r.euler_characteristic(), 1);
    }

    #[test]
    fn geometry_scales_with_time() {
        let m = unit_square(3);
        let g1 = m.geometry_at(1.0).unwrap();
        assert_eq!(g1.cell_area, m.areas());
        for t in [0.5, 1.0, 7.0] {
            let g = m.geometry_at(t).unwrap();
            let g2 = m.geometry_at(2.0 * t).unwrap();
            for c in 0..m.num_cells() {
                assert_eq!(g2.cell_area[c], 4.0 * g.cell_area[c]);
            }
            assert_eq!(g.edge_velocity, g1.edge_velocity);
        }
        assert!(matches!(m.geometry_at(0.0), Err(Error::NonpositiveTime(_))));
    }

    #[test]
    fn supersonic_boundary_requires_outward_speed() {
        // boundary through the origin has xi . n = 0 somewhere
        let m = build_domain_mesh(&QuadDomain::rectangle(0.0, 0.0, 1.0, 1.0), 2, 2, None).unwrap();
        assert!(!check_supersonic_boundary(&m, 0.1).ok);
        let m = build_domain_mesh(&QuadDomain::centered_square(100.0), 4, 4, None).unwrap();
        let check = check_supersonic_boundary(&m, 1.0);
        assert!(check.ok && (check.margin - 99.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let m = unit_square(3).refine(&[4]);
        let back = SimMesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.cells(), m.cells());
        assert_eq!(back.edges().len(), m.edges().len());
        assert!(SimMesh::from_text("vertices 1\n0 0\ncells 1\n0 3 0 1 2\nmidpoints 0\n").is_err());
    }

    #[test]
    fn locator_finds_cells() {
        let m = unit_square(4).refine(&[5]);
        let loc = m.locator();
        for c in 0..m.num_cells() {
            assert_eq!(loc.locate(m.centroid(c)), Some(c));
        }
        assert_eq!(loc.locate([2.0, 0.5]), None);
    }

    #[test]
    fn degenerate_domains_fail() {
        let bow = QuadDomain {
            corners: [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(build_domain_mesh(&bow, 2, 2, None).is_err());
        assert!(build_domain_mesh(&QuadDomain::centered_square(1.0), 0, 2, None).is_err());
    }
}
