//! Galerkin matrices of the Laplace boundary integral operators with the
//! fundamental solution `G(x, y) = 1 / (4π |x − y|)`.
//!
//! * `V`  — single layer, P0 × P0.
//! * `K`  — double layer, P0 test × P1 trial, kernel `∂G/∂n_y`; with this
//!   kernel `K 1 = −1/2` on a closed surface, so `(M/2 + K) 1 = 0`.
//! * `Kp` — adjoint double layer, assembled as `Kᵀ`.
//! * `W`  — hypersingular, P1 × P1, in the surface-curl form.
//! * `Wm` — `W + a aᵀ` with `a_i = ∫ φ_i`, positive definite.
//! * `Wtilde` — hypersingular operator of `−Δ + 1` (wavenumber `i`), the
//!   energy matrix for Dirichlet errors.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::galerkin::{assemble, GalerkinMatrix, MatrixData, OperatorTag};
use crate::quadrature::{PairClass, QuadConfig};
use crate::spaces::{p1_integrals, p1_local_curl, FunctionSpace, SpaceKind};

const FOUR_PI: f64 = 4.0 * PI;

#[inline]
pub fn laplace_kernel(r: f64) -> f64 {
    1.0 / (FOUR_PI * r)
}

pub fn assemble_v(p0: &FunctionSpace, quad: &QuadConfig) -> Result<GalerkinMatrix> {
    p0.expect(SpaceKind::P0)?;
    let m: DMatrix<f64> = assemble(p0, p0, quad, |_| false, |_, pts, out| {
        out[0] = pts.iter().map(|p| p.w * laplace_kernel((p.x - p.y).norm())).sum();
    })?;
    Ok(GalerkinMatrix::new(MatrixData::Real(m), SpaceKind::P0, SpaceKind::P0, OperatorTag::V))
}

pub fn assemble_k(p0: &FunctionSpace, p1: &FunctionSpace, quad: &QuadConfig) -> Result<GalerkinMatrix> {
    p0.expect(SpaceKind::P0)?;
    p1.expect(SpaceKind::P1)?;
    // on a flat panel n_y ⟂ (x − y), so identical pairs contribute nothing
    let m: DMatrix<f64> = assemble(p0, p1, quad, |c| c == PairClass::Identical, |ctx, pts, out| {
        let n = ctx.trial.unit_normal;
        for p in pts {
            let d = p.x - p.y;
            let r = d.norm();
            let k = p.w * n.dot(&d) / (FOUR_PI * r * r * r);
            for (o, b) in out.iter_mut().zip(&p.by) {
                *o += k * b;
            }
        }
    })?;
    Ok(GalerkinMatrix::new(MatrixData::Real(m), SpaceKind::P0, SpaceKind::P1, OperatorTag::K))
}

/// Adjoint double layer; the Galerkin block is exactly `Kᵀ`.
pub fn assemble_kp(k: &GalerkinMatrix) -> GalerkinMatrix {
    k.transpose(OperatorTag::Kp)
}

pub fn assemble_w(p1: &FunctionSpace, quad: &QuadConfig) -> Result<GalerkinMatrix> {
    p1.expect(SpaceKind::P1)?;
    let m: DMatrix<f64> = assemble(p1, p1, quad, |_| false, |ctx, pts, out| {
        let g: f64 = pts.iter().map(|p| p.w * laplace_kernel((p.x - p.y).norm())).sum();
        for k in 0..3 {
            let ck = p1_local_curl(ctx.test, k);
            for l in 0..3 {
                out[3 * k + l] = g * ck.dot(&p1_local_curl(ctx.trial, l));
            }
        }
    })?;
    Ok(GalerkinMatrix::new(MatrixData::Real(m), SpaceKind::P1, SpaceKind::P1, OperatorTag::W))
}

/// `W + a aᵀ` with `a_i = ∫_Γ φ_i dS`.
pub fn assemble_w_modified(w: &GalerkinMatrix, p1: &FunctionSpace) -> Result<GalerkinMatrix> {
    let a = p1_integrals(p1)?;
    let m = w.real()? + &a * a.transpose();
    Ok(GalerkinMatrix::new(MatrixData::Real(m), SpaceKind::P1, SpaceKind::P1, OperatorTag::Wm))
}

/// Hypersingular operator for wavenumber `i`:
/// `∫∫ G_i curl φ_i · curl φ_j + ∫∫ G_i (n_x · n_y) φ_i φ_j` with
/// `G_i = e^{−r} / (4π r)`.
pub fn assemble_w_tilde(p1: &FunctionSpace, quad: &QuadConfig) -> Result<GalerkinMatrix> {
    p1.expect(SpaceKind::P1)?;
    let m: DMatrix<f64> = assemble(p1, p1, quad, |_| false, |ctx, pts, out| {
        let nn = ctx.test.unit_normal.dot(&ctx.trial.unit_normal);
        let mut g = 0.0;
        let mut mass = [0.0; 9];
        for p in pts {
            let r = (p.x - p.y).norm();
            let gw = p.w * (-r).exp() * laplace_kernel(r);
            g += gw;
            for k in 0..3 {
                for l in 0..3 {
                    mass[3 * k + l] += gw * p.bx[k] * p.by[l];
                }
            }
        }
        for k in 0..3 {
            let ck = p1_local_curl(ctx.test, k);
            for l in 0..3 {
                out[3 * k + l] = g * ck.dot(&p1_local_curl(ctx.trial, l)) + nn * mass[3 * k + l];
            }
        }
    })?;
    Ok(GalerkinMatrix::new(MatrixData::Real(m), SpaceKind::P1, SpaceKind::P1, OperatorTag::Wtilde))
}

/// All Laplace matrices needed by the residual and MMS studies on one mesh.
#[derive(Debug, Clone)]
pub struct LaplaceMatrices {
    pub v: GalerkinMatrix,
    pub k: GalerkinMatrix,
    pub kp: GalerkinMatrix,
    pub w: GalerkinMatrix,
    pub wm: GalerkinMatrix,
    pub wtilde: GalerkinMatrix,
    /// P0 × P1 mass.
    pub m01: GalerkinMatrix,
    /// P1 × P0 mass.
    pub m10: GalerkinMatrix,
}

impl LaplaceMatrices {
    pub fn assemble(p0: &FunctionSpace, p1: &FunctionSpace, quad: &QuadConfig) -> Result<Self> {
        let v = assemble_v(p0, quad)?;
        let k = assemble_k(p0, p1, quad)?;
        let kp = assemble_kp(&k);
        let w = assemble_w(p1, quad)?;
        let wm = assemble_w_modified(&w, p1)?;
        let wtilde = assemble_w_tilde(p1, quad)?;
        let m01 = crate::spaces::mass_matrix(p0, p1, 2)?;
        let m10 = m01.transpose(OperatorTag::Mass);
        Ok(Self { v, k, kp, w, wm, wtilde, m01, m10 })
    }
}
