//! Lowest-order boundary-element spaces and the maps taking analytic traces
//! to coefficient vectors.
//!
//! * `P0` — piecewise constants, one DOF per panel.
//! * `P1` — continuous piecewise linears (hat functions), one DOF per vertex.
//! * `Rwg` — div-conforming Rao–Wilton–Glisson functions, one DOF per edge,
//!   `β̃ = ±(l / 2A)(x − p_opp)` with the sign fixed by the edge's reference
//!   direction (lower to higher vertex index).
//! * `Snc` — the rotated family `n × β̃`, curl-conforming.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinMatrix, MatrixData, OperatorTag};
use crate::linalg;
use crate::mesh::{Mesh, PanelGeometry, Vec3};
use crate::quadrature::{barycentric, gauss_triangle, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    P0,
    P1,
    Rwg,
    Snc,
}

/// A DOF touched by one local shape function of a panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDof {
    pub global: usize,
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct FunctionSpace {
    kind: SpaceKind,
    mesh: Arc<Mesh>,
    dof_count: usize,
    /// Per panel, the DOFs of its local shape functions (1 for P0, 3 otherwise;
    /// P1 local `k` is vertex `k`, edge-element local `k` is the edge opposite
    /// vertex `k`).
    dof_map: Vec<Vec<LocalDof>>,
}

impl FunctionSpace {
    pub fn new(kind: SpaceKind, mesh: Arc<Mesh>) -> Self {
        let (dof_count, dof_map) = match kind {
            SpaceKind::P0 => (
                mesh.panel_count(),
                (0..mesh.panel_count()).map(|p| vec![LocalDof { global: p, sign: 1.0 }]).collect(),
            ),
            SpaceKind::P1 => (
                mesh.vertex_count(),
                mesh.panels()
                    .iter()
                    .map(|p| p.iter().map(|&v| LocalDof { global: v, sign: 1.0 }).collect())
                    .collect(),
            ),
            SpaceKind::Rwg | SpaceKind::Snc => {
                let topo = mesh.topology();
                let map = topo
                    .panel_edges
                    .iter()
                    .enumerate()
                    .map(|(p, edges)| {
                        edges
                            .iter()
                            .map(|&e| LocalDof {
                                global: e,
                                sign: if topo.edge_panels[e][0] == p { 1.0 } else { -1.0 },
                            })
                            .collect()
                    })
                    .collect();
                (mesh.edge_count(), map)
            }
        };
        Self { kind, mesh, dof_count, dof_map }
    }

    pub fn p0(mesh: &Arc<Mesh>) -> Self {
        Self::new(SpaceKind::P0, Arc::clone(mesh))
    }

    pub fn p1(mesh: &Arc<Mesh>) -> Self {
        Self::new(SpaceKind::P1, Arc::clone(mesh))
    }

    pub fn rwg(mesh: &Arc<Mesh>) -> Self {
        Self::new(SpaceKind::Rwg, Arc::clone(mesh))
    }

    pub fn snc(mesh: &Arc<Mesh>) -> Self {
        Self::new(SpaceKind::Snc, Arc::clone(mesh))
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn local_dofs(&self, panel: usize) -> &[LocalDof] {
        &self.dof_map[panel]
    }

    pub fn same_mesh(&self, other: &FunctionSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    pub(crate) fn expect(&self, kind: SpaceKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongSpace { expected: kind, found: self.kind })
        }
    }
}

/// Unsigned local RWG function `(l_k / 2A)(x − v_k)` for the edge opposite
/// local vertex `k`.
#[inline]
pub fn rwg_local(g: &PanelGeometry, k: usize, x: &Vec3) -> Vec3 {
    (x - g.vertices[k]) * (g.edge_length(k) / (2.0 * g.area))
}

/// Unsigned local RWG divergence `l_k / A`.
#[inline]
pub fn rwg_local_div(g: &PanelGeometry, k: usize) -> f64 {
    g.edge_length(k) / g.area
}

/// Surface curl `n × ∇λ_k` of the hat function of local vertex `k`,
/// constant on the panel. Equals `−e_k / 2A` with `e_k` the edge opposite
/// vertex `k` traversed in panel orientation.
#[inline]
pub fn p1_local_curl(g: &PanelGeometry, k: usize) -> Vec3 {
    let e = g.vertices[(k + 2) % 3] - g.vertices[(k + 1) % 3];
    -e / (2.0 * g.area)
}

/// Evaluates the shape function of DOF `local` on `panel` at reference
/// point `st`, including the orientation sign. Scalar spaces return the
/// value in the x-component.
pub fn eval_basis(space: &FunctionSpace, panel: usize, local: usize, st: [f64; 2]) -> Vec3 {
    let g = space.mesh.geometry(panel);
    let sign = space.dof_map[panel][local].sign;
    match space.kind {
        SpaceKind::P0 => Vec3::new(1.0, 0.0, 0.0),
        SpaceKind::P1 => Vec3::new(barycentric(st)[local], 0.0, 0.0),
        SpaceKind::Rwg => rwg_local(g, local, &g.point(st)) * sign,
        SpaceKind::Snc => g.unit_normal.cross(&rwg_local(g, local, &g.point(st))) * sign,
    }
}

/// Coefficient vector tied to the space it lives in.
#[derive(Debug, Clone)]
pub struct CoeffVector {
    pub values: DVector<Complex64>,
    pub kind: SpaceKind,
}

impl CoeffVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Nodal interpolation into P1.
pub fn interpolate_p1<F>(f: F, space: &FunctionSpace) -> Result<CoeffVector>
where
    F: Fn(&Vec3) -> Complex64,
{
    space.expect(SpaceKind::P1)?;
    let values = DVector::from_iterator(space.dof_count, space.mesh.vertices().iter().map(f));
    Ok(CoeffVector { values, kind: SpaceKind::P1 })
}

/// Panel-wise L² projection into P0; `f` receives the point and the panel
/// normal.
pub fn project_p0<F>(f: F, space: &FunctionSpace, order: usize) -> Result<CoeffVector>
where
    F: Fn(&Vec3, &Vec3) -> Complex64,
{
    space.expect(SpaceKind::P0)?;
    let rule = gauss_triangle(order)?;
    let values = DVector::from_iterator(
        space.dof_count,
        space.mesh.geometries().iter().map(|g| {
            let s: Complex64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| f(&g.point(*p), &g.unit_normal) * *w)
                .sum();
            s * 2.0
        }),
    );
    Ok(CoeffVector { values, kind: SpaceKind::P0 })
}

/// L²_t-orthogonal projection of a tangential field into RWG.
pub fn project_rwg<F>(f: F, space: &FunctionSpace, order: usize) -> Result<CoeffVector>
where
    F: Fn(&Vec3, &Vec3) -> [Complex64; 3],
{
    space.expect(SpaceKind::Rwg)?;
    let gram = mass_matrix(space, space, order.max(2))?;
    let rule = gauss_triangle(order)?;
    let mut rhs = DVector::<Complex64>::zeros(space.dof_count);
    for (p, g) in space.mesh.geometries().iter().enumerate() {
        let n = g.unit_normal;
        for (st, w) in rule.points.iter().zip(&rule.weights) {
            let x = g.point(*st);
            let v = f(&x, &n);
            // drop any normal component
            let vn = v[0] * n.x + v[1] * n.y + v[2] * n.z;
            let vt = [v[0] - vn * n.x, v[1] - vn * n.y, v[2] - vn * n.z];
            let jw = 2.0 * g.area * w;
            for (k, dof) in space.dof_map[p].iter().enumerate() {
                let b = rwg_local(g, k, &x) * dof.sign;
                rhs[dof.global] += (vt[0] * b.x + vt[1] * b.y + vt[2] * b.z) * jw;
            }
        }
    }
    let values = linalg::solve_real_spd(gram.real()?, &rhs)?;
    Ok(CoeffVector { values, kind: SpaceKind::Rwg })
}

/// Canonical RWG interpolant: each coefficient is the mean normal flux of
/// the field through its edge (RWG functions have unit normal component on
/// their own edge and none on the others).
pub fn interpolate_rwg<F>(f: F, space: &FunctionSpace, order: usize) -> Result<CoeffVector>
where
    F: Fn(&Vec3, &Vec3) -> [Complex64; 3],
{
    space.expect(SpaceKind::Rwg)?;
    let (nodes, weights) = crate::quadrature::gauss_legendre_unit(order.max(1))?;
    let mut values = DVector::<Complex64>::zeros(space.dof_count);
    let mut done = vec![false; space.dof_count];
    for (p, g) in space.mesh.geometries().iter().enumerate() {
        for (k, dof) in space.dof_map[p].iter().enumerate() {
            if done[dof.global] {
                continue;
            }
            done[dof.global] = true;
            let a = g.vertices[(k + 1) % 3];
            let b = g.vertices[(k + 2) % 3];
            let t = (b - a).normalize();
            let out = a - g.vertices[k];
            let nu = (out - t * out.dot(&t)).normalize();
            let mean: Complex64 = nodes
                .iter()
                .zip(&weights)
                .map(|(s, w)| {
                    let x = a + (b - a) * *s;
                    let v = f(&x, &g.unit_normal);
                    (v[0] * nu.x + v[1] * nu.y + v[2] * nu.z) * *w
                })
                .sum();
            values[dof.global] = mean * dof.sign;
        }
    }
    Ok(CoeffVector { values, kind: SpaceKind::Rwg })
}

/// Galerkin mass matrix `∫ ψ_i · φ_j dS` for the supported pairings.
pub fn mass_matrix(test: &FunctionSpace, trial: &FunctionSpace, order: usize) -> Result<GalerkinMatrix> {
    if !test.same_mesh(trial) {
        return Err(Error::MeshMismatch);
    }
    use SpaceKind::*;
    let supported = matches!(
        (test.kind, trial.kind),
        (P0, P0) | (P0, P1) | (P1, P0) | (P1, P1) | (Snc, Rwg) | (Rwg, Rwg)
    );
    if !supported {
        return Err(Error::UnsupportedPairing { test: test.kind, trial: trial.kind });
    }
    let rule: QuadratureRule = gauss_triangle(order.max(2))?;
    let mut m = DMatrix::<f64>::zeros(test.dof_count, trial.dof_count);
    for (p, g) in test.mesh.geometries().iter().enumerate() {
        let td = &test.dof_map[p];
        let sd = &trial.dof_map[p];
        for (st, w) in rule.points.iter().zip(&rule.weights) {
            let jw = 2.0 * g.area * w;
            for (i, a) in td.iter().enumerate() {
                let u = eval_basis(test, p, i, *st);
                for (j, b) in sd.iter().enumerate() {
                    let v = eval_basis(trial, p, j, *st);
                    m[(a.global, b.global)] += jw * u.dot(&v);
                }
            }
        }
    }
    Ok(GalerkinMatrix::new(MatrixData::Real(m), test.kind, trial.kind, OperatorTag::Mass))
}

/// Constant-in-space trace helper: `∫_Γ φ_i dS` for P1.
pub fn p1_integrals(space: &FunctionSpace) -> Result<DVector<f64>> {
    space.expect(SpaceKind::P1)?;
    let mut a = DVector::zeros(space.dof_count);
    for (p, g) in space.mesh.geometries().iter().enumerate() {
        for dof in &space.dof_map[p] {
            a[dof.global] += g.area / 3.0;
        }
    }
    Ok(a)
}
