//! Calderón residual vectors and manufactured-solution (MMS) error studies.
//!
//! Laplace, with `d` the P1 interpolant of the Dirichlet trace and `n` the
//! P0 projection of the Neumann trace:
//!
//! * exterior: `ρ_D = (M₀₁/2 − K) d + V n`, `ρ_N = W d + (M₁₀/2 + Kᵀ) n`;
//! * interior: `ρ_D = (−M₀₁/2 − K) d + V n`, `ρ_N = W d + (Kᵀ − M₁₀/2) n`.
//!
//! Maxwell, with `x = P_h γ_× u` and `r = P_h γ_R u / k` mapped into RWG by
//! the edge-flux interpolant or the L²_t projection ([`RwgTrace`]):
//!
//! * interior: `ρ₁ = E r + (H − M/2) x`, `ρ₂ = E x + (H − M/2) r`;
//! * exterior: the sign of `M/2` flips.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinMatrix, MatrixData};
use crate::laplace_ops::LaplaceMatrices;
use crate::linalg::{self, SolveReport, SolverPath};
use crate::maxwell_ops::MaxwellMatrices;
use crate::mesh::Vec3;
use crate::solutions::{ManufacturedSolution, Side, Traces};
use crate::spaces::{interpolate_p1, interpolate_rwg, project_p0, project_rwg, FunctionSpace};

/// Relative tolerance of the iterative MMS solves.
pub const SOLVER_TOL: f64 = 1e-10;

/// Infinity and Euclidean norm of a residual vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub inf: f64,
    pub two: f64,
}

impl Norms {
    pub fn of(v: &DVector<Complex64>) -> Self {
        Self { inf: v.iter().map(|z| z.norm()).fold(0.0, f64::max), two: v.norm() }
    }
}

#[derive(Debug, Clone)]
pub struct NamedResidual {
    pub name: &'static str,
    pub vector: DVector<Complex64>,
    pub norms: Norms,
}

#[derive(Debug, Clone)]
pub struct ResidualSet {
    pub residuals: Vec<NamedResidual>,
    pub level: usize,
    pub h: f64,
    /// Largest coefficient magnitude of the discrete traces, the reference
    /// scale for machine-precision judgements.
    pub trace_scale: f64,
}

impl ResidualSet {
    pub fn get(&self, name: &str) -> Option<&NamedResidual> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

fn complex_mul(a: &GalerkinMatrix, x: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if a.ncols() != x.len() {
        return Err(Error::Dimension(format!(
            "{} has {} columns, vector has {} entries",
            a.operator.name(),
            a.ncols(),
            x.len()
        )));
    }
    Ok(match &a.data {
        MatrixData::Real(m) => {
            let re = m * x.map(|z| z.re);
            let im = m * x.map(|z| z.im);
            re.zip_map(&im, Complex64::new)
        }
        MatrixData::Complex(m) => m * x,
    })
}

fn half_sign(side: Side) -> f64 {
    match side {
        Side::Exterior => 0.5,
        Side::Interior => -0.5,
    }
}

/// Discrete Laplace traces `(d, n)` of a solution.
pub fn laplace_traces(
    sol: &ManufacturedSolution,
    p0: &FunctionSpace,
    p1: &FunctionSpace,
    order: usize,
) -> Result<(DVector<Complex64>, DVector<Complex64>)> {
    let Traces::Laplace { dirichlet, neumann, .. } = &sol.traces else {
        return Err(Error::Config(format!("solution {} is not a Laplace solution", sol.name)));
    };
    let d = interpolate_p1(|x| dirichlet(x, x), p1)?.values;
    let n = project_p0(|x, nrm| neumann(x, nrm), p0, order)?.values;
    Ok((d, n))
}

/// Residual vectors `ρ_D` (tested with P0) and `ρ_N` (tested with P1) for
/// given discrete traces.
pub fn laplace_residual_vectors(
    mats: &LaplaceMatrices,
    d: &DVector<Complex64>,
    n: &DVector<Complex64>,
    side: Side,
) -> Result<(DVector<Complex64>, DVector<Complex64>)> {
    let s = half_sign(side);
    let m01d = complex_mul(&mats.m01, d)?;
    let rho_d = m01d * Complex64::new(s, 0.0) - complex_mul(&mats.k, d)? + complex_mul(&mats.v, n)?;
    let m10n = complex_mul(&mats.m10, n)?;
    let rho_n = complex_mul(&mats.w, d)? + m10n * Complex64::new(s, 0.0) + complex_mul(&mats.kp, n)?;
    Ok((rho_d, rho_n))
}

pub fn laplace_residuals(
    sol: &ManufacturedSolution,
    p0: &FunctionSpace,
    p1: &FunctionSpace,
    mats: &LaplaceMatrices,
    order: usize,
    h: f64,
) -> Result<ResidualSet> {
    let (d, n) = laplace_traces(sol, p0, p1, order)?;
    let (rho_d, rho_n) = laplace_residual_vectors(mats, &d, &n, sol.side)?;
    let trace_scale = d.iter().chain(n.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    Ok(ResidualSet {
        residuals: vec![
            NamedResidual { name: "rho_D", norms: Norms::of(&rho_d), vector: rho_d },
            NamedResidual { name: "rho_N", norms: Norms::of(&rho_n), vector: rho_n },
        ],
        level: p0.mesh().level(),
        h,
        trace_scale,
    })
}

/// How tangential traces are mapped into RWG coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RwgTrace {
    /// Edge-flux interpolant; its error is orthogonal to the SNC test
    /// functions to one extra order, which the residual rates inherit.
    Interpolant,
    /// L²_t-orthogonal projection onto RWG.
    Projection,
}

impl RwgTrace {
    pub fn label(&self) -> &'static str {
        match self {
            RwgTrace::Interpolant => "interpolant",
            RwgTrace::Projection => "projection",
        }
    }

    fn apply<F>(&self, f: F, rwg: &FunctionSpace, order: usize) -> Result<DVector<Complex64>>
    where
        F: Fn(&Vec3, &Vec3) -> [Complex64; 3],
    {
        Ok(match self {
            RwgTrace::Interpolant => interpolate_rwg(f, rwg, order)?.values,
            RwgTrace::Projection => project_rwg(f, rwg, order)?.values,
        })
    }
}

impl std::str::FromStr for RwgTrace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolant" => Ok(RwgTrace::Interpolant),
            "projection" => Ok(RwgTrace::Projection),
            _ => Err(Error::Config(format!("unknown RWG trace map {s:?} (expected interpolant or projection)"))),
        }
    }
}

/// Discrete Maxwell traces `(x, r)` with `r` scaled by `1/k`.
pub fn maxwell_traces(
    sol: &ManufacturedSolution,
    rwg: &FunctionSpace,
    map: RwgTrace,
    order: usize,
) -> Result<(DVector<Complex64>, DVector<Complex64>, Complex64)> {
    let Traces::Maxwell { tangential, magnetic, wavenumber, .. } = &sol.traces else {
        return Err(Error::Config(format!("solution {} is not a Maxwell solution", sol.name)));
    };
    let x = map.apply(|p, n| tangential(p, n), rwg, order)?;
    let r = map.apply(|p, n| magnetic(p, n), rwg, order)? / *wavenumber;
    Ok((x, r, *wavenumber))
}

pub fn maxwell_residual_vectors(
    mats: &MaxwellMatrices,
    x: &DVector<Complex64>,
    r: &DVector<Complex64>,
    side: Side,
) -> Result<(DVector<Complex64>, DVector<Complex64>)> {
    let s = Complex64::new(-half_sign(side), 0.0);
    // (H ∓ M/2) applied to a vector
    let hm = |v: &DVector<Complex64>| -> Result<DVector<Complex64>> {
        Ok(complex_mul(&mats.h, v)? - complex_mul(&mats.m, v)? * s)
    };
    let rho1 = complex_mul(&mats.e, r)? + hm(x)?;
    let rho2 = complex_mul(&mats.e, x)? + hm(r)?;
    Ok((rho1, rho2))
}

pub fn maxwell_residuals(
    sol: &ManufacturedSolution,
    rwg: &FunctionSpace,
    mats: &MaxwellMatrices,
    map: RwgTrace,
    order: usize,
    h: f64,
) -> Result<ResidualSet> {
    let (x, r, _) = maxwell_traces(sol, rwg, map, order)?;
    let (rho1, rho2) = maxwell_residual_vectors(mats, &x, &r, sol.side)?;
    let trace_scale = x.iter().chain(r.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    Ok(ResidualSet {
        residuals: vec![
            NamedResidual { name: "rho_1", norms: Norms::of(&rho1), vector: rho1 },
            NamedResidual { name: "rho_2", norms: Norms::of(&rho2), vector: rho2 },
        ],
        level: rwg.mesh().level(),
        h,
        trace_scale,
    })
}

/// Outcome of one MMS solve and its energy-norm error.
#[derive(Debug, Clone)]
pub struct MmsSolve {
    pub error: f64,
    pub path: SolverPath,
    pub converged: bool,
    pub iterations: usize,
    pub relative_residual: f64,
}

impl MmsSolve {
    fn from_report(error: f64, report: &SolveReport<Complex64>) -> Self {
        Self {
            error,
            path: report.path,
            converged: report.converged,
            iterations: report.iterations,
            relative_residual: report.relative_residual,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MmsErrors {
    /// `e_N` and `e_D` for Laplace; `e_R` for Maxwell.
    pub errors: Vec<(&'static str, MmsSolve)>,
    pub tolerance: f64,
}

impl MmsErrors {
    pub fn get(&self, name: &str) -> Option<&MmsSolve> {
        self.errors.iter().find(|(n, _)| *n == name).map(|(_, s)| s)
    }
}

/// CG on a real matrix with direct fallback when CG does not converge.
fn solve_real(a: &DMatrix<f64>, b: &DVector<Complex64>, tol: f64) -> Result<SolveReport<Complex64>> {
    let n = b.len();
    let report = linalg::cg_complex_rhs(a, b, tol, 5 * n)?;
    if report.converged {
        return Ok(report);
    }
    log::info!(
        "CG stopped after {} iterations at relative residual {:.3e}; using a direct solve",
        report.iterations,
        report.relative_residual
    );
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let mut direct = linalg::direct_solve(&ac, b)?;
    direct.iterations = report.iterations;
    Ok(direct)
}

/// Laplace MMS study: solve for the Neumann trace with (possibly faulty)
/// `V` and for the Dirichlet trace with (possibly faulty) `W^m`; measure the
/// errors in the `V` and `W̃` energy norms of the clean matrices.
#[allow(clippy::too_many_arguments)]
pub fn mms_laplace(
    sol: &ManufacturedSolution,
    p0: &FunctionSpace,
    p1: &FunctionSpace,
    clean: &LaplaceMatrices,
    v_used: &GalerkinMatrix,
    wm_used: &GalerkinMatrix,
    order: usize,
    tol: f64,
) -> Result<MmsErrors> {
    let (d, n) = laplace_traces(sol, p0, p1, order)?;
    // V τ_N = (±M/2 + K) τ_D and W τ_D = (±M/2 − K') τ_N, upper signs for
    // the interior identity
    let s = Complex64::new(-half_sign(sol.side), 0.0);
    let rhs_n = complex_mul(&clean.m01, &d)? * s + complex_mul(&clean.k, &d)?;
    let rhs_d = complex_mul(&clean.m10, &n)? * s - complex_mul(&clean.kp, &n)?;

    let sol_n = solve_real(v_used.real()?, &rhs_n, tol)?;
    let e_n = linalg::energy_norm_real(&(&n - &sol_n.solution), clean.v.real()?)?;
    let sol_d = solve_real(wm_used.real()?, &rhs_d, tol)?;
    let e_d = linalg::energy_norm_real(&(&d - &sol_d.solution), clean.wtilde.real()?)?;
    Ok(MmsErrors {
        errors: vec![("e_N", MmsSolve::from_report(e_n, &sol_n)), ("e_D", MmsSolve::from_report(e_d, &sol_d))],
        tolerance: tol,
    })
}

/// Energy form used for `e_R`.
#[derive(Debug, Clone)]
pub enum MaxwellEnergy<'a> {
    /// Modulus of the bilinear form of the clean electric matrix.
    CleanElectric,
    /// The real SPD matrix `i E_i`.
    ImaginaryWavenumber(&'a DMatrix<f64>),
}

/// Maxwell MMS study: GMRES solve of `E w = (M/2 − H) x` with a (possibly
/// faulty) electric matrix; `e_R` is the energy norm of `r − w`.
#[allow(clippy::too_many_arguments)]
pub fn mms_maxwell(
    sol: &ManufacturedSolution,
    rwg: &FunctionSpace,
    clean: &MaxwellMatrices,
    e_used: &GalerkinMatrix,
    energy: MaxwellEnergy<'_>,
    map: RwgTrace,
    order: usize,
    tol: f64,
) -> Result<MmsErrors> {
    let (x, r, _) = maxwell_traces(sol, rwg, map, order)?;
    let s = Complex64::new(-half_sign(sol.side), 0.0);
    let rhs = complex_mul(&clean.m, &x)? * s - complex_mul(&clean.h, &x)?;
    let a = e_used.to_complex();
    let n = rhs.len();
    let mut report = linalg::gmres(&a, &rhs, tol, n, 2 * n)?;
    if !report.converged {
        log::info!(
            "GMRES stopped after {} iterations at relative residual {:.3e}; using a direct solve",
            report.iterations,
            report.relative_residual
        );
        let iterations = report.iterations;
        report = linalg::direct_solve(&a, &rhs)?;
        report.iterations = iterations;
    }
    let delta = &r - &report.solution;
    let e_r = match energy {
        MaxwellEnergy::CleanElectric => linalg::energy_norm(&delta, &clean.e.to_complex())?,
        MaxwellEnergy::ImaginaryWavenumber(m) => linalg::energy_norm_real(&delta, m)?,
    };
    Ok(MmsErrors { errors: vec![("e_R", MmsSolve::from_report(e_r, &report))], tolerance: tol })
}
