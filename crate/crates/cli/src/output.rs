//! File formats written by the commands, each with its parser. Floats use
//! Rust's shortest round-trip formatting, so write -> read -> write is
//! byte-identical.

use std::path::Path;

use selfsim::exact_fields::{solution_t_from_parts, InterfaceCheck, SolutionTSpec};
use selfsim::fv_solver::FieldState;
use selfsim::gas::{GasKind, GasModel, PrimitiveState};
use selfsim::simgrid::SimMesh;

use crate::error::{io_err, CliError, CliResult};

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

pub fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn state_text(s: &PrimitiveState) -> String {
    format!("{:e} {:e} {:e} {:e}", s.rho, s.v[0], s.v[1], s.q)
}

fn model_lines(g: &GasModel) -> String {
    format!(
        "model = {}\ngamma = {:e}\nkappa = {:e}\ngas_constant = {:e}\n",
        g.kind.name(),
        g.gamma,
        g.kappa,
        g.gas_constant
    )
}

/// `key = value` lines, ignoring `#` comments.
fn key_values(text: &str, path: &Path) -> CliResult<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::parse(path, i + 1, "expected `key = value`"))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn floats(v: &str, n: usize, path: &Path, line: usize) -> CliResult<Vec<f64>> {
    let xs: Vec<f64> = v
        .split_whitespace()
        .map(|x| x.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::parse(path, line, format!("bad number in `{v}`")))?;
    if xs.len() != n {
        return Err(CliError::parse(path, line, format!("expected {n} numbers")));
    }
    Ok(xs)
}

struct ModelFields {
    kind: Option<GasKind>,
    gamma: Option<f64>,
    kappa: Option<f64>,
    gas_constant: Option<f64>,
}

impl ModelFields {
    fn new() -> Self {
        ModelFields {
            kind: None,
            gamma: None,
            kappa: None,
            gas_constant: None,
        }
    }

    /// Consumes a model key; returns false for other keys.
    fn take(&mut self, k: &str, v: &str, path: &Path, line: usize) -> CliResult<bool> {
        let f = |v: &str| floats(v, 1, path, line).map(|x| x[0]);
        match k {
            "model" => self.kind = Some(v.parse().map_err(|e: selfsim::Error| CliError::parse(path, line, e.to_string()))?),
            "gamma" => self.gamma = Some(f(v)?),
            "kappa" => self.kappa = Some(f(v)?),
            "gas_constant" => self.gas_constant = Some(f(v)?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn build(&self, path: &Path) -> CliResult<GasModel> {
        match (self.kind, self.gamma, self.kappa, self.gas_constant) {
            (Some(k), Some(g), Some(ka), Some(r)) => {
                GasModel::new(k, g, ka, r).map_err(|e| CliError::parse(path, 0, e.to_string()))
            }
            _ => Err(CliError::parse(path, 0, "model, gamma, kappa and gas_constant are required")),
        }
    }
}

pub fn spec_to_text(spec: &SolutionTSpec) -> String {
    format!(
        "# selfsim solution T v1\n# states: rho vx vy q\n{}alpha = {:e}\nsigma = {:e}\ninflow = {}\npost_shock = {}\nstagnation = {}\n",
        model_lines(&spec.model),
        spec.alpha,
        spec.sigma,
        state_text(&spec.inflow),
        state_text(&spec.post_shock),
        state_text(&spec.stagnation),
    )
}

/// Reads a spec as stored, without recomputing any state, so a tampered file
/// is verified as written.
pub fn spec_from_text(text: &str, path: &Path) -> CliResult<SolutionTSpec> {
    let mut m = ModelFields::new();
    let (mut alpha, mut sigma) = (None, None);
    let mut states: [Option<[f64; 4]>; 3] = [None; 3];
    for (line, k, v) in key_values(text, path)? {
        if m.take(&k, &v, path, line)? {
            continue;
        }
        match k.as_str() {
            "alpha" => alpha = Some(floats(&v, 1, path, line)?[0]),
            "sigma" => sigma = Some(floats(&v, 1, path, line)?[0]),
            "inflow" | "post_shock" | "stagnation" => {
                let x = floats(&v, 4, path, line)?;
                let i = ["inflow", "post_shock", "stagnation"].iter().position(|n| *n == k).unwrap();
                states[i] = Some([x[0], x[1], x[2], x[3]]);
            }
            _ => return Err(CliError::parse(path, line, format!("unknown key `{k}`"))),
        }
    }
    let g = m.build(path)?;
    let mut prims = Vec::new();
    for s in states {
        let [rho, vx, vy, q] = s.ok_or_else(|| CliError::parse(path, 0, "inflow, post_shock and stagnation are required"))?;
        // stored verbatim; admissibility is the verifier's business
        prims.push(PrimitiveState { rho, v: [vx, vy], q });
    }
    let (alpha, sigma) = match (alpha, sigma) {
        (Some(a), Some(s)) => (a, s),
        _ => return Err(CliError::parse(path, 0, "alpha and sigma are required")),
    };
    solution_t_from_parts(g, prims[0], alpha, sigma, prims[1], prims[2]).map_err(|e| CliError::parse(path, 0, e.to_string()))
}

pub const CHECK_HEADER: &str = "interface,kind,angle,rh_relative,eef_jump,eef_relative,normal_velocity_jump,admissible,passed";

pub fn checks_to_csv(checks: &[InterfaceCheck]) -> String {
    let mut s = format!("{CHECK_HEADER}\n");
    for c in checks {
        s.push_str(&format!(
            "{},{},{:e},{:e},{:e},{:e},{:e},{},{}\n",
            c.name,
            c.kind.name(),
            c.angle,
            c.rh_relative,
            c.eef_jump,
            c.eef_relative,
            c.normal_velocity_jump,
            c.admissible,
            c.passed
        ));
    }
    s
}

/// Header of field snapshots (cell centroids in similarity coordinates).
pub const SNAPSHOT_HEADER: &str = "xi_x,xi_y,rho,vx,vy,p,q,s";

/// A snapshot as stored: its time, model, mesh file name and per-cell rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub mesh_file: String,
    pub field: FieldState,
}

pub fn snapshot_to_csv(snap: &Snapshot, mesh: &SimMesh) -> CliResult<String> {
    let f = &snap.field;
    let g = &f.model;
    let mut s = format!(
        "# t = {:e}\n# step = {}\n# mesh = {}\n{}",
        snap.t,
        snap.step,
        snap.mesh_file,
        model_lines(g).lines().map(|l| format!("# {l}\n")).collect::<String>()
    );
    s.push_str(SNAPSHOT_HEADER);
    s.push('\n');
    for c in 0..mesh.num_cells() {
        let u = f.primitive(c).map_err(CliError::Solver)?;
        let x = mesh.centroid(c);
        let entropy = if g.is_isentropic() { 0.0 } else { g.specific_entropy(&u) };
        s.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            x[0],
            x[1],
            u.rho,
            u.v[0],
            u.v[1],
            g.pressure(&u),
            u.q,
            entropy
        ));
    }
    Ok(s)
}

pub fn snapshot_from_csv(text: &str, path: &Path) -> CliResult<Snapshot> {
    let mut m = ModelFields::new();
    let (mut t, mut step, mut mesh_file) = (None, None, None);
    let mut cells = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(meta) = line.strip_prefix('#') {
            let (k, v) = meta
                .split_once('=')
                .ok_or_else(|| CliError::parse(path, i + 1, "expected `# key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if m.take(k, v, path, i + 1)? {
                continue;
            }
            match k {
                "t" => t = Some(floats(v, 1, path, i + 1)?[0]),
                "step" => step = Some(v.parse().map_err(|_| CliError::parse(path, i + 1, "bad step"))?),
                "mesh" => mesh_file = Some(v.to_string()),
                _ => return Err(CliError::parse(path, i + 1, format!("unknown key `{k}`"))),
            }
        } else if !header {
            if line != SNAPSHOT_HEADER {
                return Err(CliError::parse(path, i + 1, format!("expected header `{SNAPSHOT_HEADER}`")));
            }
            header = true;
        } else if !line.is_empty() {
            let x = floats(&line.replace(',', " "), 8, path, i + 1)?;
            cells.push(PrimitiveState { rho: x[2], v: [x[3], x[4]], q: x[6] });
        }
    }
    let g = m.build(path)?;
    let t = t.ok_or_else(|| CliError::parse(path, 0, "missing `# t`"))?;
    let conservative = cells.iter().map(|u| g.to_conservative(u)).collect();
    let field = FieldState::new(t, conservative, g).map_err(|e| CliError::parse(path, 0, e.to_string()))?;
    Ok(Snapshot {
        t,
        step: step.ok_or_else(|| CliError::parse(path, 0, "missing `# step`"))?,
        mesh_file: mesh_file.ok_or_else(|| CliError::parse(path, 0, "missing `# mesh`"))?,
        field,
    })
}

/// Legacy VTK unstructured grid of polygons in similarity coordinates.
pub fn snapshot_to_vtk(snap: &Snapshot, mesh: &SimMesh) -> CliResult<String> {
    let f = &snap.field;
    let g = &f.model;
    let prims = f.primitives().map_err(CliError::Solver)?;
    let mut s = format!("# vtk DataFile Version 3.0\nselfsim snapshot t = {:e} step = {}\nASCII\nDATASET UNSTRUCTURED_GRID\n", snap.t, snap.step);
    s.push_str(&format!("POINTS {} double\n", mesh.vertices().len()));
    for v in mesh.vertices() {
        s.push_str(&format!("{:e} {:e} 0\n", v[0], v[1]));
    }
    let n = mesh.num_cells();
    let size: usize = (0..n).map(|c| mesh.polygon(c).len() + 1).sum();
    s.push_str(&format!("CELLS {n} {size}\n"));
    for c in 0..n {
        let p = mesh.polygon(c);
        s.push_str(&p.len().to_string());
        for v in p {
            s.push_str(&format!(" {v}"));
        }
        s.push('\n');
    }
    s.push_str(&format!("CELL_TYPES {n}\n"));
    for _ in 0..n {
        s.push_str("7\n");
    }
    s.push_str(&format!("CELL_DATA {n}\n"));
    let scalar = |s: &mut String, name: &str, f: &dyn Fn(&PrimitiveState) -> f64| {
        s.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for u in &prims {
            s.push_str(&format!("{:e}\n", f(u)));
        }
    };
    scalar(&mut s, "rho", &|u| u.rho);
    scalar(&mut s, "p", &|u| g.pressure(u));
    scalar(&mut s, "q", &|u| u.q);
    s.push_str("VECTORS v double\n");
    for u in &prims {
        s.push_str(&format!("{:e} {:e} 0\n", u.v[0], u.v[1]));
    }
    Ok(s)
}

/// What a VTK snapshot carries: time, points, polygons and cell data.
#[derive(Clone, Debug, PartialEq)]
pub struct VtkSnapshot {
    pub t: f64,
    pub step: usize,
    pub points: Vec<[f64; 2]>,
    pub polygons: Vec<Vec<usize>>,
    pub rho: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub v: Vec<[f64; 2]>,
}

pub fn vtk_from_text(text: &str, path: &Path) -> CliResult<VtkSnapshot> {
    let lines: Vec<&str> = text.lines().collect();
    let bad = |i: usize, m: &str| CliError::parse(path, i + 1, m.to_string());
    let title = lines.get(1).ok_or_else(|| bad(1, "missing title"))?;
    let words: Vec<&str> = title.split_whitespace().collect();
    let (t, step) = match words.as_slice() {
        ["selfsim", "snapshot", "t", "=", t, "step", "=", s] => (
            t.parse().map_err(|_| bad(1, "bad time"))?,
            s.parse().map_err(|_| bad(1, "bad step"))?,
        ),
        _ => return Err(bad(1, "expected `selfsim snapshot t = .. step = ..`")),
    };
    let mut out = VtkSnapshot { t, step, points: vec![], polygons: vec![], rho: vec![], p: vec![], q: vec![], v: vec![] };
    let count = |l: &str, i: usize| -> CliResult<usize> {
        l.split_whitespace().nth(1).and_then(|x| x.parse().ok()).ok_or_else(|| bad(i, "bad count"))
    };
    let nums = |l: &str, i: usize| -> CliResult<Vec<f64>> {
        l.split_whitespace().map(|x| x.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad(i, "bad number"))
    };
    let mut i = 4;
    while i < lines.len() {
        let l = lines[i];
        if l.starts_with("POINTS") {
            let n = count(l, i)?;
            for k in 0..n {
                let x = nums(lines.get(i + 1 + k).ok_or_else(|| bad(i, "truncated"))?, i + 1 + k)?;
                out.points.push([x[0], x[1]]);
            }
            i += n + 1;
        } else if l.starts_with("CELLS") {
            let n = count(l, i)?;
            for k in 0..n {
                let x = nums(lines.get(i + 1 + k).ok_or_else(|| bad(i, "truncated"))?, i + 1 + k)?;
                out.polygons.push(x[1..].iter().map(|&v| v as usize).collect());
            }
            i += n + 1;
        } else if l.starts_with("CELL_TYPES") {
            i += count(l, i)? + 1;
        } else if l.starts_with("SCALARS") {
            let name = l.split_whitespace().nth(1).unwrap_or("");
            let n = out.polygons.len();
            let vals: Vec<f64> = (0..n)
                .map(|k| lines.get(i + 2 + k).ok_or_else(|| bad(i, "truncated")).and_then(|l| Ok(nums(l, i + 2 + k)?[0])))
                .collect::<CliResult<_>>()?;
            match name {
                "rho" => out.rho = vals,
                "p" => out.p = vals,
                "q" => out.q = vals,
                _ => return Err(bad(i, "unknown scalar")),
            }
            i += n + 2;
        } else if l.starts_with("VECTORS") {
            let n = out.polygons.len();
            for k in 0..n {
                let x = nums(lines.get(i + 1 + k).ok_or_else(|| bad(i, "truncated"))?, i + 1 + k)?;
                out.v.push([x[0], x[1]]);
            }
            i += n + 1;
        } else {
            i += 1;
        }
    }
    let n = out.polygons.len();
    if n == 0 || out.points.is_empty() {
        return Err(bad(0, "no points or cells"));
    }
    if out.polygons.iter().flatten().any(|&k| k >= out.points.len()) {
        return Err(bad(0, "cell references a missing point"));
    }
    if [out.rho.len(), out.p.len(), out.q.len(), out.v.len()].iter().any(|&m| m != n) {
        return Err(bad(0, "cell data length differs from cell count"));
    }
    Ok(out)
}

/// Writes a parsed VTK snapshot back in the same layout.
pub fn vtk_to_text(v: &VtkSnapshot) -> String {
    let mut s = format!("# vtk DataFile Version 3.0\nselfsim snapshot t = {:e} step = {}\nASCII\nDATASET UNSTRUCTURED_GRID\n", v.t, v.step);
    s.push_str(&format!("POINTS {} double\n", v.points.len()));
    for p in &v.points {
        s.push_str(&format!("{:e} {:e} 0\n", p[0], p[1]));
    }
    let n = v.polygons.len();
    let size: usize = v.polygons.iter().map(|p| p.len() + 1).sum();
    s.push_str(&format!("CELLS {n} {size}\n"));
    for p in &v.polygons {
        s.push_str(&p.len().to_string());
        for k in p {
            s.push_str(&format!(" {k}"));
        }
        s.push('\n');
    }
    s.push_str(&format!("CELL_TYPES {n}\n"));
    for _ in 0..n {
        s.push_str("7\n");
    }
    s.push_str(&format!("CELL_DATA {n}\n"));
    for (name, vals) in [("rho", &v.rho), ("p", &v.p), ("q", &v.q)] {
        s.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for x in vals {
            s.push_str(&format!("{x:e}\n"));
        }
    }
    s.push_str("VECTORS v double\n");
    for x in &v.v {
        s.push_str(&format!("{:e} {:e} 0\n", x[0], x[1]));
    }
    s
}

/// Comma-separated numeric table with a header line and `#` comments.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s: String = self.comments.iter().map(|c| format!("# {c}\n")).collect();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str, path: &Path) -> CliResult<Self> {
        let mut t = Table { comments: vec![], columns: vec![], rows: vec![] };
        for (i, raw) in text.lines().enumerate() {
            if let Some(c) = raw.strip_prefix("# ") {
                t.comments.push(c.to_string());
            } else if t.columns.is_empty() {
                t.columns = raw.split(',').map(str::to_string).collect();
            } else if !raw.trim().is_empty() {
                let row = raw
                    .split(',')
                    .map(|x| x.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::parse(path, i + 1, "bad number"))?;
                if row.len() != t.columns.len() {
                    return Err(CliError::parse(path, i + 1, "row length differs from header"));
                }
                t.rows.push(row);
            }
        }
        if t.columns.is_empty() {
            return Err(CliError::parse(path, 0, "missing header"));
        }
        Ok(t)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn mesh_from_file(path: &Path) -> CliResult<SimMesh> {
    SimMesh::from_text(&read(path)?).map_err(|e| CliError::parse(path, 0, e.to_string()))
}
