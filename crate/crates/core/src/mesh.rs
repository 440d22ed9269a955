//! Flat-triangle surface meshes of the unit sphere and the unit cube.
//!
//! Sphere meshes are octahedra refined by midpoint subdivision with the new
//! vertices pushed back onto the sphere; cube meshes are structured grids on
//! each face. All panels are oriented so that the right-hand normal points
//! out of the enclosed volume.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Sphere,
    Cube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshwidthMode {
    /// Largest panel diameter.
    Max,
    /// Mean panel diameter.
    Average,
}

/// Geometry of one flat panel, parametrised over the reference triangle
/// `{(s, t) : s, t >= 0, s + t <= 1}` by `v0 + s (v1 - v0) + t (v2 - v0)`.
#[derive(Debug, Clone)]
pub struct PanelGeometry {
    pub vertices: [Vec3; 3],
    pub area: f64,
    pub unit_normal: Vec3,
    pub diameter: f64,
}

impl PanelGeometry {
    fn new(vertices: [Vec3; 3]) -> Self {
        let e1 = vertices[1] - vertices[0];
        let e2 = vertices[2] - vertices[0];
        let cross = e1.cross(&e2);
        let twice_area = cross.norm();
        let diameter = (vertices[1] - vertices[0])
            .norm()
            .max((vertices[2] - vertices[1]).norm())
            .max((vertices[0] - vertices[2]).norm());
        Self {
            vertices,
            area: 0.5 * twice_area,
            unit_normal: cross / twice_area,
            diameter,
        }
    }

    /// Physical point at reference coordinates `(s, t)`.
    #[inline]
    pub fn point(&self, st: [f64; 2]) -> Vec3 {
        let [a, b, c] = &self.vertices;
        a + (b - a) * st[0] + (c - a) * st[1]
    }

    pub fn centroid(&self) -> Vec3 {
        (self.vertices[0] + self.vertices[1] + self.vertices[2]) / 3.0
    }

    /// Length of the edge opposite local vertex `k`.
    pub fn edge_length(&self, k: usize) -> f64 {
        (self.vertices[(k + 2) % 3] - self.vertices[(k + 1) % 3]).norm()
    }
}

/// Edge connectivity. Local edge `k` of a panel is the one opposite its
/// local vertex `k`. Every edge stores its endpoints as `[low, high]`
/// vertex indices and its two panels: the first traverses the edge from
/// low to high in its own orientation, the second from high to low.
#[derive(Debug, Clone)]
pub struct EdgeTopology {
    pub edges: Vec<[usize; 2]>,
    pub panel_edges: Vec<[usize; 3]>,
    pub edge_panels: Vec<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    panels: Vec<[usize; 3]>,
    level: usize,
    domain: Domain,
    geometry: Vec<PanelGeometry>,
    topology: EdgeTopology,
}

impl Mesh {
    /// Builds a mesh from raw data. Fails if the panels do not form a closed,
    /// consistently oriented two-manifold.
    pub fn from_parts(
        vertices: Vec<Vec3>,
        panels: Vec<[usize; 3]>,
        level: usize,
        domain: Domain,
    ) -> Result<Self> {
        if panels.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for p in &panels {
            if p.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("panel {p:?} references a missing vertex")));
            }
        }
        let geometry = panels
            .iter()
            .map(|p| PanelGeometry::new([vertices[p[0]], vertices[p[1]], vertices[p[2]]]))
            .collect();
        let topology = build_topology(&panels)?;
        Ok(Self { vertices, panels, level, domain, geometry, topology })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn panels(&self) -> &[[usize; 3]] {
        &self.panels
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edges.len()
    }

    pub fn geometry(&self, panel: usize) -> &PanelGeometry {
        &self.geometry[panel]
    }

    pub fn geometries(&self) -> &[PanelGeometry] {
        &self.geometry
    }

    pub fn topology(&self) -> &EdgeTopology {
        &self.topology
    }

    pub fn surface_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Enclosed volume from the divergence theorem, `(1/3) ∫ x·n dS`.
    pub fn enclosed_volume(&self) -> f64 {
        self.geometry
            .iter()
            .map(|g| g.area * g.centroid().dot(&g.unit_normal))
            .sum::<f64>()
            / 3.0
    }

    pub fn meshwidth(&self, mode: MeshwidthMode) -> f64 {
        let diameters = self.geometry.iter().map(|g| g.diameter);
        match mode {
            MeshwidthMode::Max => diameters.fold(0.0, f64::max),
            MeshwidthMode::Average => diameters.sum::<f64>() / self.geometry.len() as f64,
        }
    }

    /// Checks the closed-surface invariants: Euler characteristic 2,
    /// non-degenerate panels and outward normals.
    pub fn check_invariants(&self) -> Result<()> {
        let v = self.vertices.len() as i64;
        let e = self.topology.edges.len() as i64;
        let f = self.panels.len() as i64;
        if v - e + f != 2 {
            return Err(Error::InvalidMesh(format!("Euler characteristic {} != 2", v - e + f)));
        }
        for (i, g) in self.geometry.iter().enumerate() {
            if !(g.area > 0.0) {
                return Err(Error::InvalidMesh(format!("panel {i} is degenerate")));
            }
            let outward = match self.domain {
                Domain::Sphere => g.centroid().dot(&g.unit_normal) > 0.0,
                Domain::Cube => {
                    let c = g.centroid();
                    let expected = cube_face_normal(&c);
                    (g.unit_normal - expected).norm() < 1e-12
                }
            };
            if !outward {
                return Err(Error::InvalidMesh(format!("panel {i} is not oriented outward")));
            }
        }
        Ok(())
    }

    /// Splits every panel into four through its edge midpoints. New sphere
    /// vertices are projected back onto the unit sphere.
    pub fn refine(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<[usize; 2], usize> = HashMap::new();
        let mut panels = Vec::with_capacity(4 * self.panels.len());
        for p in &self.panels {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (p[k], p[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let mut m = 0.5 * (vertices[a] + vertices[b]);
                    if self.domain == Domain::Sphere {
                        m /= m.norm();
                    }
                    vertices.push(m);
                    vertices.len() - 1
                });
            }
            // mid[k] sits on edge (p[k], p[k+1])
            panels.push([p[0], mid[0], mid[2]]);
            panels.push([mid[0], p[1], mid[1]]);
            panels.push([mid[2], mid[1], p[2]]);
            panels.push([mid[0], mid[1], mid[2]]);
        }
        Mesh::from_parts(vertices, panels, self.level + 1, self.domain)
            .expect("refinement preserves a valid closed mesh")
    }

    pub fn write_off<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "OFF")?;
        writeln!(out, "{} {} {}", self.vertices.len(), self.panels.len(), self.edge_count())?;
        for v in &self.vertices {
            writeln!(out, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z)?;
        }
        for p in &self.panels {
            writeln!(out, "3 {} {} {}", p[0], p[1], p[2])?;
        }
        Ok(())
    }

    /// Reads an OFF file written by [`Mesh::write_off`] (triangles only).
    pub fn read_off<R: BufRead>(input: R, domain: Domain) -> Result<Mesh> {
        let mut tokens = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.split('#').next().unwrap_or("").trim().to_owned();
            if !line.is_empty() {
                tokens.extend(line.split_whitespace().map(str::to_owned));
            }
        }
        let mut it = tokens.into_iter();
        let header = it.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
        if header != "OFF" {
            return Err(Error::Parse(format!("expected OFF header, found {header:?}")));
        }
        let mut next_num = |what: &str| -> Result<String> {
            it.next().ok_or_else(|| Error::Parse(format!("unexpected end of file reading {what}")))
        };
        let parse_usize = |s: String| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
        let parse_f64 = |s: String| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        let nv = parse_usize(next_num("vertex count")?)?;
        let nf = parse_usize(next_num("face count")?)?;
        let _ne = next_num("edge count")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let x = parse_f64(next_num("vertex")?)?;
            let y = parse_f64(next_num("vertex")?)?;
            let z = parse_f64(next_num("vertex")?)?;
            vertices.push(Vec3::new(x, y, z));
        }
        let mut panels = Vec::with_capacity(nf);
        for _ in 0..nf {
            let n = parse_usize(next_num("face")?)?;
            if n != 3 {
                return Err(Error::Parse(format!("only triangles are supported, found {n}-gon")));
            }
            let a = parse_usize(next_num("face")?)?;
            let b = parse_usize(next_num("face")?)?;
            let c = parse_usize(next_num("face")?)?;
            panels.push([a, b, c]);
        }
        Mesh::from_parts(vertices, panels, 0, domain)
    }
}

/// Outward normal of the cube face closest to `c`.
fn cube_face_normal(c: &Vec3) -> Vec3 {
    let mut dist = f64::INFINITY;
    let mut normal = Vec3::zeros();
    for axis in 0..3 {
        for (side, sign) in [(0.0, -1.0), (1.0, 1.0)] {
            let d = (c[axis] - side).abs();
            if d < dist {
                dist = d;
                normal = Vec3::zeros();
                normal[axis] = sign;
            }
        }
    }
    normal
}

fn build_topology(panels: &[[usize; 3]]) -> Result<EdgeTopology> {
    let mut index: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut forward: Vec<Option<usize>> = Vec::new();
    let mut backward: Vec<Option<usize>> = Vec::new();
    let mut panel_edges = Vec::with_capacity(panels.len());
    for (pi, p) in panels.iter().enumerate() {
        let mut local = [0usize; 3];
        for (k, slot) in local.iter_mut().enumerate() {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            if a == b {
                return Err(Error::InvalidMesh(format!("panel {pi} repeats a vertex")));
            }
            let key = [a.min(b), a.max(b)];
            let e = *index.entry(key).or_insert_with(|| {
                edges.push(key);
                forward.push(None);
                backward.push(None);
                edges.len() - 1
            });
            let slot_ref = if a < b { &mut forward[e] } else { &mut backward[e] };
            if slot_ref.is_some() {
                return Err(Error::InvalidMesh(format!(
                    "edge {key:?} is traversed twice in the same direction"
                )));
            }
            *slot_ref = Some(pi);
            *slot = e;
        }
        panel_edges.push(local);
    }
    let edge_panels = forward
        .into_iter()
        .zip(backward)
        .zip(&edges)
        .map(|((f, b), key)| match (f, b) {
            (Some(f), Some(b)) => Ok([f, b]),
            _ => Err(Error::InvalidMesh(format!("edge {key:?} is not shared by two panels"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeTopology { edges, panel_edges, edge_panels })
}

/// Unit sphere from an octahedron refined `level` times; `8 * 4^level` panels.
pub fn make_sphere_mesh(level: usize) -> Mesh {
    let vertices = vec![
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 0.0, -1.0),
    ];
    let mut panels = Vec::with_capacity(8);
    for x in [0usize, 1] {
        for y in [2usize, 3] {
            for z in [4usize, 5] {
                let (a, b, c) = (vertices[x], vertices[y], vertices[z]);
                let n = (b - a).cross(&(c - a));
                if n.dot(&(a + b + c)) > 0.0 {
                    panels.push([x, y, z]);
                } else {
                    panels.push([x, z, y]);
                }
            }
        }
    }
    let mut mesh = Mesh::from_parts(vertices, panels, 0, Domain::Sphere)
        .expect("octahedron is a valid closed mesh");
    for _ in 0..level {
        mesh = mesh.refine();
    }
    mesh
}

/// Unit cube `[0,1]^3` with every face cut into `divisions^2` squares of two
/// triangles each; `12 * divisions^2` panels.
pub fn make_cube_mesh(divisions: usize) -> Result<Mesh> {
    if divisions == 0 {
        return Err(Error::Config("cube divisions must be at least 1".into()));
    }
    let n = divisions;
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vertex = |g: [usize; 3], vertices: &mut Vec<Vec3>| -> usize {
        *index.entry(g).or_insert_with(|| {
            vertices.push(Vec3::new(g[0] as f64, g[1] as f64, g[2] as f64) / n as f64);
            vertices.len() - 1
        })
    };
    let mut panels = Vec::with_capacity(12 * n * n);
    for axis in 0..3 {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0usize, 1] {
            for u in 0..n {
                for v in 0..n {
                    let corner = |du: usize, dv: usize| {
                        let mut g = [0usize; 3];
                        g[axis] = side * n;
                        g[b] = u + du;
                        g[c] = v + dv;
                        g
                    };
                    let p00 = vertex(corner(0, 0), &mut vertices);
                    let p10 = vertex(corner(1, 0), &mut vertices);
                    let p11 = vertex(corner(1, 1), &mut vertices);
                    let p01 = vertex(corner(0, 1), &mut vertices);
                    // e_b x e_c = e_axis, so (p00, p10, p11) faces +axis
                    if side == 1 {
                        panels.push([p00, p10, p11]);
                        panels.push([p00, p11, p01]);
                    } else {
                        panels.push([p00, p11, p10]);
                        panels.push([p00, p01, p11]);
                    }
                }
            }
        }
    }
    Mesh::from_parts(vertices, panels, 0, Domain::Cube)
}
