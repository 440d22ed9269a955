//! Dense solvers: conjugate gradients, full-memory GMRES, LU, and a
//! symmetric eigensolver, plus the energy form used for MMS errors.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverPath {
    Cg,
    Gmres,
    Direct,
}

impl SolverPath {
    pub fn name(&self) -> &'static str {
        match self {
            SolverPath::Cg => "CG",
            SolverPath::Gmres => "GMRES",
            SolverPath::Direct => "Direct",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport<T: nalgebra::Scalar> {
    pub solution: DVector<T>,
    pub converged: bool,
    pub iterations: usize,
    pub relative_residual: f64,
    pub path: SolverPath,
}

fn check_dims(rows: usize, cols: usize, b: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::Dimension(format!("matrix is {rows}x{cols}, expected square")));
    }
    if rows != b {
        return Err(Error::Dimension(format!("matrix has {rows} rows, right-hand side {b}")));
    }
    Ok(())
}

/// Unpreconditioned conjugate gradients from a zero initial guess.
/// Breakdown on an indefinite matrix and the iteration cap are reported as
/// `converged = false`.
pub fn cg(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64, max_iter: usize) -> Result<SolveReport<f64>> {
    check_dims(a.nrows(), a.ncols(), b.len())?;
    let n = b.len();
    let bnorm = b.norm();
    let mut x = DVector::zeros(n);
    if bnorm == 0.0 {
        return Ok(SolveReport { solution: x, converged: true, iterations: 0, relative_residual: 0.0, path: SolverPath::Cg });
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut iterations = 0;
    let mut converged = false;
    let mut ap = DVector::zeros(n);
    while iterations < max_iter {
        ap.gemv(1.0, a, &p, 0.0);
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            // A is not positive definite along p
            break;
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        iterations += 1;
        let rr_new = r.dot(&r);
        if rr_new.sqrt() <= rel_tol * bnorm {
            converged = true;
            break;
        }
        p *= rr_new / rr;
        p += &r;
        rr = rr_new;
    }
    // report the true residual, not the recursively updated one
    let relative_residual = (b - a * &x).norm() / bnorm;
    let converged = converged && relative_residual <= rel_tol * 10.0;
    Ok(SolveReport { solution: x, converged, iterations, relative_residual, path: SolverPath::Cg })
}

/// CG on a real symmetric matrix with a complex right-hand side, solving
/// the real and imaginary parts separately.
pub fn cg_complex_rhs(
    a: &DMatrix<f64>,
    b: &DVector<Complex64>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<SolveReport<Complex64>> {
    let re = cg(a, &b.map(|z| z.re), rel_tol, max_iter)?;
    let im = cg(a, &b.map(|z| z.im), rel_tol, max_iter)?;
    let solution = re.solution.zip_map(&im.solution, Complex64::new);
    let bnorm = b.norm();
    let relative_residual = if bnorm == 0.0 {
        0.0
    } else {
        (b - a.map(|v| Complex64::new(v, 0.0)) * &solution).norm() / bnorm
    };
    Ok(SolveReport {
        solution,
        converged: re.converged && im.converged,
        iterations: re.iterations.max(im.iterations),
        relative_residual,
        path: SolverPath::Cg,
    })
}

/// GMRES with restarts of length `restart` (full memory when `restart >= n`).
pub fn gmres(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    rel_tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<SolveReport<Complex64>> {
    check_dims(a.nrows(), a.ncols(), b.len())?;
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = b.norm();
    let mut x = DVector::from_element(n, zero);
    if bnorm == 0.0 {
        return Ok(SolveReport { solution: x, converged: true, iterations: 0, relative_residual: 0.0, path: SolverPath::Gmres });
    }
    let m = restart.clamp(1, n.max(1));
    let mut iterations = 0;
    let mut converged = false;
    'outer: while iterations < max_iter {
        let r = b - a * &x;
        let beta = r.norm();
        if beta <= rel_tol * bnorm {
            converged = true;
            break;
        }
        let mut basis: Vec<DVector<Complex64>> = vec![r / Complex64::new(beta, 0.0)];
        let mut h = DMatrix::<Complex64>::from_element(m + 1, m, zero);
        let mut cs = vec![zero; m];
        let mut sn = vec![zero; m];
        let mut g = DVector::<Complex64>::from_element(m + 1, zero);
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for j in 0..m {
            if iterations >= max_iter {
                break;
            }
            let mut w = a * &basis[j];
            for (i, v) in basis.iter().enumerate() {
                let hij = v.dotc(&w);
                h[(i, j)] = hij;
                w.axpy(-hij, v, Complex64::new(1.0, 0.0));
            }
            let wn = w.norm();
            h[(j + 1, j)] = Complex64::new(wn, 0.0);
            // apply previous rotations
            for i in 0..j {
                let t = cs[i].conj() * h[(i, j)] + sn[i].conj() * h[(i + 1, j)];
                h[(i + 1, j)] = -sn[i] * h[(i, j)] + cs[i] * h[(i + 1, j)];
                h[(i, j)] = t;
            }
            let (c, s) = givens(h[(j, j)], h[(j + 1, j)]);
            cs[j] = c;
            sn[j] = s;
            h[(j, j)] = c.conj() * h[(j, j)] + s.conj() * h[(j + 1, j)];
            h[(j + 1, j)] = zero;
            g[j + 1] = -s * g[j];
            g[j] = c.conj() * g[j];
            iterations += 1;
            k_used = j + 1;
            let happy = wn <= 1e-14 * bnorm;
            if g[j + 1].norm() <= rel_tol * bnorm || happy {
                break;
            }
            basis.push(w / Complex64::new(wn, 0.0));
        }
        // back substitution for the k_used x k_used triangular system
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for l in (i + 1)..k_used {
                s -= h[(i, l)] * y[l];
            }
            y[i] = s / h[(i, i)];
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &basis[i], Complex64::new(1.0, 0.0));
        }
        let res = (b - a * &x).norm();
        if res <= rel_tol * bnorm {
            converged = true;
            break 'outer;
        }
        if k_used == 0 {
            break;
        }
    }
    let relative_residual = (b - a * &x).norm() / bnorm;
    Ok(SolveReport { solution: x, converged, iterations, relative_residual, path: SolverPath::Gmres })
}

/// Complex Givens rotation zeroing `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    (a / r, b / r)
}

/// LU with partial pivoting.
pub fn direct_solve<T>(a: &DMatrix<T>, b: &DVector<T>) -> Result<SolveReport<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    check_dims(a.nrows(), a.ncols(), b.len())?;
    let lu = a.clone().lu();
    // pivots far below the matrix scale mean a numerically singular matrix
    let scale = a.iter().map(|v| v.modulus()).fold(0.0, f64::max);
    let u = lu.u();
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].modulus()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > scale * 1e-14 * a.nrows() as f64) {
        return Err(Error::Singular);
    }
    let x = lu.solve(b).ok_or(Error::Singular)?;
    let bnorm = b.norm();
    let relative_residual = if bnorm == 0.0 { 0.0 } else { (b - a * &x).norm() / bnorm };
    Ok(SolveReport { solution: x, converged: true, iterations: 0, relative_residual, path: SolverPath::Direct })
}

/// Solves a real SPD system with a complex right-hand side (Cholesky).
pub fn solve_real_spd(a: &DMatrix<f64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    check_dims(a.nrows(), a.ncols(), b.len())?;
    let chol = a.clone().cholesky().ok_or(Error::Singular)?;
    let re = chol.solve(&b.map(|z| z.re));
    let im = chol.solve(&b.map(|z| z.im));
    Ok(re.zip_map(&im, Complex64::new))
}

/// Relative symmetry tolerance required by [`sym_eigvals`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigvals(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("eigenvalues need a square matrix".into()));
    }
    let scale = a.amax();
    let defect = (a - a.transpose()).amax();
    if defect > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(if scale > 0.0 { defect / scale } else { defect }));
    }
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `√|xᵀ A x|` with the unconjugated transpose.
pub fn energy_norm<T>(x: &DVector<T>, a: &DMatrix<T>) -> Result<f64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if a.nrows() != x.len() || a.ncols() != x.len() {
        return Err(Error::Dimension(format!(
            "energy norm of length-{} vector with {}x{} matrix",
            x.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(x.dot(&(a * x)).modulus().sqrt())
}

/// Energy norm of a complex vector against a real matrix.
pub fn energy_norm_real(x: &DVector<Complex64>, a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != x.len() || a.ncols() != x.len() {
        return Err(Error::Dimension("energy norm dimension mismatch".into()));
    }
    let re = x.map(|z| z.re);
    let im = x.map(|z| z.im);
    let are = a * &re;
    let aim = a * &im;
    let v = Complex64::new(re.dot(&are) - im.dot(&aim), re.dot(&aim) + im.dot(&are));
    Ok(v.norm().sqrt())
}
