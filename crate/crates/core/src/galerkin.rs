//! Dense Galerkin matrices and the panel-pair assembly engine shared by the
//! Laplace and Maxwell operators.

use std::io::Write;
use std::ops::{AddAssign, Mul};

use nalgebra::{DMatrix, Scalar};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{PanelGeometry, Vec3};
use crate::quadrature::{
    barycentric, classify_vertices, gauss_triangle, pair_points, PairClass, QuadConfig, SingularRules,
};
use crate::spaces::{FunctionSpace, SpaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorTag {
    V,
    K,
    Kp,
    W,
    Wm,
    Wtilde,
    Mass,
    E,
    H,
}

impl OperatorTag {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorTag::V => "V",
            OperatorTag::K => "K",
            OperatorTag::Kp => "Kp",
            OperatorTag::W => "W",
            OperatorTag::Wm => "Wm",
            OperatorTag::Wtilde => "Wtilde",
            OperatorTag::Mass => "M",
            OperatorTag::E => "E",
            OperatorTag::H => "H",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// A dense Galerkin matrix tagged with the spaces and operator it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinMatrix {
    pub data: MatrixData,
    pub test: SpaceKind,
    pub trial: SpaceKind,
    pub operator: OperatorTag,
    pub wavenumber: Option<Complex64>,
}

impl GalerkinMatrix {
    pub fn new(data: MatrixData, test: SpaceKind, trial: SpaceKind, operator: OperatorTag) -> Self {
        Self { data, test, trial, operator, wavenumber: None }
    }

    pub fn with_wavenumber(mut self, k: Complex64) -> Self {
        self.wavenumber = Some(k);
        self
    }

    pub fn nrows(&self) -> usize {
        match &self.data {
            MatrixData::Real(m) => m.nrows(),
            MatrixData::Complex(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match &self.data {
            MatrixData::Real(m) => m.ncols(),
            MatrixData::Complex(m) => m.ncols(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn real(&self) -> Result<&DMatrix<f64>> {
        match &self.data {
            MatrixData::Real(m) => Ok(m),
            MatrixData::Complex(_) => Err(Error::Dimension(format!(
                "{} matrix is complex-valued",
                self.operator.name()
            ))),
        }
    }

    /// Complex view; real matrices are promoted.
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match &self.data {
            MatrixData::Real(m) => m.map(|v| Complex64::new(v, 0.0)),
            MatrixData::Complex(m) => m.clone(),
        }
    }

    /// Diagonal entries as complex numbers.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let n = self.nrows().min(self.ncols());
        match &self.data {
            MatrixData::Real(m) => (0..n).map(|i| Complex64::new(m[(i, i)], 0.0)).collect(),
            MatrixData::Complex(m) => (0..n).map(|i| m[(i, i)]).collect(),
        }
    }

    /// Largest diagonal modulus.
    pub fn max_abs_diagonal(&self) -> f64 {
        self.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖A − Aᵀ‖∞ / ‖A‖∞` using row-sum norms.
    pub fn symmetry_defect(&self) -> f64 {
        fn defect<T: Copy>(m: &DMatrix<T>, abs: impl Fn(T) -> f64, sub: impl Fn(T, T) -> T) -> f64 {
            let n = m.nrows();
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for i in 0..n {
                let mut rn = 0.0;
                let mut rd = 0.0;
                for j in 0..m.ncols() {
                    rn += abs(sub(m[(i, j)], m[(j, i)]));
                    rd += abs(m[(i, j)]);
                }
                num = num.max(rn);
                den = den.max(rd);
            }
            if den == 0.0 {
                0.0
            } else {
                num / den
            }
        }
        if !self.is_square() {
            return f64::INFINITY;
        }
        match &self.data {
            MatrixData::Real(m) => defect(m, f64::abs, |a, b| a - b),
            MatrixData::Complex(m) => defect(m, |z: Complex64| z.norm(), |a, b| a - b),
        }
    }

    pub fn transpose(&self, operator: OperatorTag) -> GalerkinMatrix {
        let data = match &self.data {
            MatrixData::Real(m) => MatrixData::Real(m.transpose()),
            MatrixData::Complex(m) => MatrixData::Complex(m.transpose()),
        };
        GalerkinMatrix {
            data,
            test: self.trial,
            trial: self.test,
            operator,
            wavenumber: self.wavenumber,
        }
    }

    /// Row-major CSV with full precision; complex entries as `re+imi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match &self.data {
            MatrixData::Real(m) => {
                for i in 0..m.nrows() {
                    let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.17e}", m[(i, j)])).collect();
                    writeln!(out, "{}", row.join(","))?;
                }
            }
            MatrixData::Complex(m) => {
                for i in 0..m.nrows() {
                    let row: Vec<String> = (0..m.ncols())
                        .map(|j| format!("{:.17e}{:+.17e}i", m[(i, j)].re, m[(i, j)].im))
                        .collect();
                    writeln!(out, "{}", row.join(","))?;
                }
            }
        }
        Ok(())
    }
}

/// A quadrature point of a panel pair in physical coordinates, with the
/// barycentric coordinates on each panel (own vertex order) and a weight
/// that already includes both surface Jacobians.
#[derive(Debug, Clone, Copy)]
pub struct PairPoint {
    pub x: Vec3,
    pub y: Vec3,
    pub bx: [f64; 3],
    pub by: [f64; 3],
    pub w: f64,
}

/// The panel pair handed to an element kernel.
pub struct PairContext<'a> {
    pub test_panel: usize,
    pub trial_panel: usize,
    pub test: &'a PanelGeometry,
    pub trial: &'a PanelGeometry,
    pub class: PairClass,
}

pub trait Field: Scalar + Copy + Send + Sync + AddAssign + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn is_finite_value(&self) -> bool;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

struct PanelPoints {
    x: Vec<Vec3>,
    bary: Vec<[f64; 3]>,
    w: Vec<f64>,
}

/// Test panels assembled per scatter pass; bounds the temporary row buffers.
const PANEL_CHUNK: usize = 64;

/// Assembles `Σ_{pairs} local_block` into a dense matrix.
///
/// `element` fills the unsigned local block (row-major, test-local ×
/// trial-local shape functions) for one panel pair; the engine applies the
/// DOF orientation signs and scatters. Pairs for which `skip` returns true
/// contribute nothing.
pub fn assemble<T, F>(
    test: &FunctionSpace,
    trial: &FunctionSpace,
    quad: &QuadConfig,
    skip: impl Fn(PairClass) -> bool + Sync,
    element: F,
) -> Result<DMatrix<T>>
where
    T: Field,
    F: Fn(&PairContext, &[PairPoint], &mut [T]) + Sync,
{
    if !test.same_mesh(trial) {
        return Err(Error::MeshMismatch);
    }
    quad.validate()?;
    let mesh = test.mesh();
    let regular = gauss_triangle(quad.regular)?;
    let singular = SingularRules::new(quad.singular)?;
    let panel_points: Vec<PanelPoints> = mesh
        .geometries()
        .iter()
        .map(|g| PanelPoints {
            x: regular.points.iter().map(|p| g.point(*p)).collect(),
            bary: regular.points.iter().map(|p| barycentric(*p)).collect(),
            w: regular.weights.iter().map(|w| 2.0 * g.area * w).collect(),
        })
        .collect();

    let n_trial = trial.dof_count();
    let mut out = DMatrix::<T>::from_element(test.dof_count(), n_trial, T::zero());
    let panels: Vec<usize> = (0..mesh.panel_count()).collect();
    for chunk in panels.chunks(PANEL_CHUNK) {
        let rows: Vec<Vec<T>> = chunk
            .par_iter()
            .map_init(
                || (Vec::<PairPoint>::new(), Vec::<T>::new()),
                |(points, local), &a| {
                    let n_loc_a = test.local_dofs(a).len();
                    let mut buf = vec![T::zero(); n_loc_a * n_trial];
                    let ga = mesh.geometry(a);
                    let pa = &mesh.panels()[a];
                    for b in 0..mesh.panel_count() {
                        let class = if a == b {
                            PairClass::Identical
                        } else {
                            classify_vertices(pa, &mesh.panels()[b])
                        };
                        if skip(class) {
                            continue;
                        }
                        let gb = mesh.geometry(b);
                        points.clear();
                        if class.is_singular() {
                            let jac = 4.0 * ga.area * gb.area;
                            points.extend(pair_points(class, &singular).map(|p| PairPoint {
                                x: ga.point(p.x),
                                y: gb.point(p.y),
                                bx: barycentric(p.x),
                                by: barycentric(p.y),
                                w: p.w * jac,
                            }));
                        } else {
                            let (qa, qb) = (&panel_points[a], &panel_points[b]);
                            for i in 0..qa.x.len() {
                                for j in 0..qb.x.len() {
                                    points.push(PairPoint {
                                        x: qa.x[i],
                                        y: qb.x[j],
                                        bx: qa.bary[i],
                                        by: qb.bary[j],
                                        w: qa.w[i] * qb.w[j],
                                    });
                                }
                            }
                        }
                        let tb = trial.local_dofs(b);
                        local.clear();
                        local.resize(n_loc_a * tb.len(), T::zero());
                        let ctx = PairContext { test_panel: a, trial_panel: b, test: ga, trial: gb, class };
                        element(&ctx, points, local);
                        for (k, da) in test.local_dofs(a).iter().enumerate() {
                            for (l, db) in tb.iter().enumerate() {
                                buf[k * n_trial + db.global] += local[k * tb.len() + l] * (da.sign * db.sign);
                            }
                        }
                    }
                    buf
                },
            )
            .collect();
        for (&a, buf) in chunk.iter().zip(rows) {
            for (k, da) in test.local_dofs(a).iter().enumerate() {
                for j in 0..n_trial {
                    out[(da.global, j)] += buf[k * n_trial + j];
                }
            }
        }
    }
    if out.iter().any(|v| !v.is_finite_value()) {
        return Err(Error::NonFiniteKernel);
    }
    Ok(out)
}
