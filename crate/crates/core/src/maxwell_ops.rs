//! Galerkin matrices of the Maxwell electric (`E`) and magnetic (`H`)
//! boundary integral operators, RWG trial and SNC (`n × RWG`) test
//! functions, under the symmetric pairing.
//!
//! Conventions (single layer `k Ψ_A + k⁻¹ ∇Ψ_V div`, double layer
//! `curl Ψ_A`, magnetic trace scaled by `1/k`):
//!
//! * `E_ij = −k A_ij + k⁻¹ D_ij` with
//!   `A_ij = ∫∫ G_k β̃_i(x)·β̃_j(y)` and `D_ij = ∫∫ G_k div β̃_i div β̃_j`;
//! * `H_ij = −∫∫ (∇_x G_k(x, y) × β̃_j(y)) · β̃_i(x)`;
//! * `G_k = e^{ik r} / (4π r)`.
//!
//! At `k = i` the electric matrix is `−i (A + D)`; `i E` is real symmetric
//! positive definite and serves as the diagnostic energy matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::galerkin::{assemble, GalerkinMatrix, MatrixData, OperatorTag};
use crate::quadrature::{PairClass, QuadConfig};
use crate::spaces::{mass_matrix, rwg_local, rwg_local_div, FunctionSpace, SpaceKind};

const FOUR_PI: f64 = 4.0 * PI;

#[inline]
pub fn helmholtz_kernel(k: Complex64, r: f64) -> Complex64 {
    (Complex64::i() * k * r).exp() / (FOUR_PI * r)
}

fn check_spaces(rwg: &FunctionSpace, snc: &FunctionSpace, k: Complex64) -> Result<()> {
    rwg.expect(SpaceKind::Rwg)?;
    snc.expect(SpaceKind::Snc)?;
    if !rwg.same_mesh(snc) {
        return Err(Error::MeshMismatch);
    }
    if k.norm() == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    Ok(())
}

/// Electric operator `E_k`.
pub fn assemble_e(rwg: &FunctionSpace, snc: &FunctionSpace, k: Complex64, quad: &QuadConfig) -> Result<GalerkinMatrix> {
    check_spaces(rwg, snc, k)?;
    let m: DMatrix<Complex64> = assemble(snc, rwg, quad, |_| false, |ctx, pts, out| {
        let (ga, gb) = (ctx.test, ctx.trial);
        let div_a = [0, 1, 2].map(|i| rwg_local_div(ga, i));
        let div_b = [0, 1, 2].map(|j| rwg_local_div(gb, j));
        for p in pts {
            let g = helmholtz_kernel(k, (p.x - p.y).norm()) * p.w;
            let u = [0, 1, 2].map(|i| rwg_local(ga, i, &p.x));
            let v = [0, 1, 2].map(|j| rwg_local(gb, j, &p.y));
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] += g * (-k * u[i].dot(&v[j]) + div_a[i] * div_b[j] / k);
                }
            }
        }
    })?;
    Ok(GalerkinMatrix::new(MatrixData::Complex(m), SpaceKind::Snc, SpaceKind::Rwg, OperatorTag::E).with_wavenumber(k))
}

/// Magnetic operator `H_k`.
pub fn assemble_h(rwg: &FunctionSpace, snc: &FunctionSpace, k: Complex64, quad: &QuadConfig) -> Result<GalerkinMatrix> {
    check_spaces(rwg, snc, k)?;
    let ik = Complex64::i() * k;
    // (x − y), β̃_j(y), β̃_i(x) are coplanar on a single flat panel
    let m: DMatrix<Complex64> = assemble(snc, rwg, quad, |c| c == PairClass::Identical, |ctx, pts, out| {
        let (ga, gb) = (ctx.test, ctx.trial);
        for p in pts {
            let d = p.x - p.y;
            let r = d.norm();
            // ∇_x G = (x − y) e^{ikr}(ikr − 1) / (4π r³)
            let f = (ik * r).exp() * (ik * r - 1.0) / (FOUR_PI * r * r * r) * p.w;
            let u = [0, 1, 2].map(|i| rwg_local(ga, i, &p.x));
            for j in 0..3 {
                let c = d.cross(&rwg_local(gb, j, &p.y));
                for i in 0..3 {
                    out[3 * i + j] -= f * c.dot(&u[i]);
                }
            }
        }
    })?;
    Ok(GalerkinMatrix::new(MatrixData::Complex(m), SpaceKind::Snc, SpaceKind::Rwg, OperatorTag::H).with_wavenumber(k))
}

/// The real symmetric positive definite matrix `A + D = i E_i` used for
/// basis-norm diagnostics and as an alternative energy form.
pub fn energy_matrix_k_i(rwg: &FunctionSpace, snc: &FunctionSpace, quad: &QuadConfig) -> Result<DMatrix<f64>> {
    let e = assemble_e(rwg, snc, Complex64::i(), quad)?;
    match e.data {
        MatrixData::Complex(m) => Ok(m.map(|z| (Complex64::i() * z).re)),
        MatrixData::Real(_) => unreachable!("electric matrix is complex"),
    }
}

/// Matrices needed by the Maxwell residual and MMS studies on one mesh.
#[derive(Debug, Clone)]
pub struct MaxwellMatrices {
    pub e: GalerkinMatrix,
    pub h: GalerkinMatrix,
    /// SNC × RWG mass matrix.
    pub m: GalerkinMatrix,
    pub wavenumber: Complex64,
}

impl MaxwellMatrices {
    pub fn assemble(rwg: &FunctionSpace, snc: &FunctionSpace, k: Complex64, quad: &QuadConfig) -> Result<Self> {
        let e = assemble_e(rwg, snc, k, quad)?;
        let h = assemble_h(rwg, snc, k, quad)?;
        let m = mass_matrix(snc, rwg, 2)?;
        Ok(Self { e, h, m, wavenumber: k })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigvals;
    use crate::mesh::make_cube_mesh;
    use crate::quadrature::{classify_pair, gauss_triangle, integrate_pair, SingularRules};
    use std::sync::Arc;

    fn spaces(n: usize) -> (FunctionSpace, FunctionSpace) {
        let m = Arc::new(make_cube_mesh(n).unwrap());
        (FunctionSpace::rwg(&m), FunctionSpace::snc(&m))
    }

    #[test]
    fn electric_at_imaginary_wavenumber_is_spd_after_rotation() {
        let (rwg, snc) = spaces(1);
        let e = assemble_e(&rwg, &snc, Complex64::i(), &QuadConfig::DEFAULT).unwrap();
        assert!(e.symmetry_defect() < 1e-8);
        for z in e.diagonal() {
            assert!(z.re.abs() < 1e-12 * z.norm());
            assert!(z.im < 0.0);
        }
        let a = energy_matrix_k_i(&rwg, &snc, &QuadConfig::DEFAULT).unwrap();
        assert!(sym_eigvals(&a).unwrap()[0] > 0.0);
    }

    #[test]
    fn electric_is_complex_symmetric() {
        let (rwg, snc) = spaces(2);
        let e = assemble_e(&rwg, &snc, Complex64::new(1.0, 0.0), &QuadConfig::DEFAULT).unwrap();
        assert!(e.symmetry_defect() < 1e-8, "{}", e.symmetry_defect());
    }

    #[test]
    fn zero_wavenumber_rejected() {
        let (rwg, snc) = spaces(1);
        assert!(matches!(
            assemble_e(&rwg, &snc, Complex64::new(0.0, 0.0), &QuadConfig::DEFAULT),
            Err(Error::ZeroWavenumber)
        ));
        assert!(assemble_e(&snc, &rwg, Complex64::new(1.0, 0.0), &QuadConfig::DEFAULT).is_err());
    }

    #[test]
    fn magnetic_kernel_static_limit() {
        // For small k the pair integral of the H kernel approaches the one
        // with the static gradient −(x − y)/(4π r³).
        let m = make_cube_mesh(2).unwrap();
        let rules = SingularRules::new(4).unwrap();
        let reg = gauss_triangle(4).unwrap();
        let (a, b) = (0, 20);
        let class = classify_pair(&m, a, b);
        let (ga, gb) = (m.geometry(a), m.geometry(b));
        let dir = nalgebra::Vector3::new(0.3, -0.2, 0.9);
        let k = Complex64::new(1e-6, 0.0);
        let ik = Complex64::i() * k;
        let dynamic = |x: &nalgebra::Vector3<f64>, y: &nalgebra::Vector3<f64>| {
            let d = x - y;
            let r = d.norm();
            ((ik * r).exp() * (ik * r - 1.0) / (FOUR_PI * r * r * r)).re * d.dot(&dir)
        };
        let stat = |x: &nalgebra::Vector3<f64>, y: &nalgebra::Vector3<f64>| {
            let d = x - y;
            let r = d.norm();
            -d.dot(&dir) / (FOUR_PI * r * r * r)
        };
        let v1 = integrate_pair(dynamic, ga, gb, class, &rules, &reg).unwrap();
        let v2 = integrate_pair(stat, ga, gb, class, &rules, &reg).unwrap();
        assert!((v1 - v2).abs() <= 1e-10 * v2.abs().max(1e-12));
    }

    #[test]
    fn mass_matrix_is_antisymmetric() {
        let (rwg, snc) = spaces(2);
        let mm = MaxwellMatrices::assemble(&rwg, &snc, Complex64::new(1.0, 0.0), &QuadConfig::DEGRADED).unwrap();
        let d = mm.m.real().unwrap();
        assert!((d + d.transpose()).amax() < 1e-14);
        assert_eq!(mm.wavenumber, Complex64::new(1.0, 0.0));
    }
}
