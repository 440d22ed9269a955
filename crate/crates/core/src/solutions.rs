//! Manufactured solutions with closed-form traces.
//!
//! Laplace (harmonic `u`):
//! * `1a` — exterior of the unit ball, `u = r⁻² e^{iφ} P₁¹(cos θ) = −(x + iy)/r³`.
//! * `1b` — interior of the unit ball, `u = r e^{iφ} P₁¹(cos θ) = −(x + iy)`.
//! * `2`  — interior of the unit cube, `u = x² − y²/2 − z²/2`.
//!
//! Sphere traces are the closed forms on `r = 1` written in the angles of
//! the evaluation point, i.e. evaluated at its radial projection. Cube
//! traces are exact on the flat faces.
//!
//! Maxwell (`curl curl U − k² U = 0`), both on the unit cube:
//! * `m3` — `U = (1, 0, 0) e^{ikz}`, `k = 1`.
//! * `m4` — `U = (d × (p × d)) e^{ik x·d}`, `p = (1.01, 0, 1.05)`,
//!   `d = (1, 1, 1)/√3`, `k = 2`.
//!
//! Maxwell traces: `γ_× u = U × n`, `γ_R u = (curl U) × n`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{Domain, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Interior,
    Exterior,
}

pub type ScalarTrace = Arc<dyn Fn(&Vec3, &Vec3) -> Complex64 + Send + Sync>;
pub type VectorTrace = Arc<dyn Fn(&Vec3, &Vec3) -> [Complex64; 3] + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&Vec3) -> Complex64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&Vec3) -> [Complex64; 3] + Send + Sync>;

#[derive(Clone)]
pub enum Traces {
    Laplace {
        /// Dirichlet trace at a boundary point (the normal is ignored).
        dirichlet: ScalarTrace,
        /// Outward normal derivative; receives the panel normal.
        neumann: ScalarTrace,
        /// The solution itself, away from the boundary.
        field: ScalarField,
    },
    Maxwell {
        tangential: VectorTrace,
        magnetic: VectorTrace,
        field: VectorField,
        wavenumber: Complex64,
    },
}

#[derive(Clone)]
pub struct ManufacturedSolution {
    pub name: &'static str,
    pub side: Side,
    pub domain: Domain,
    pub traces: Traces,
    pub smoothness_note: &'static str,
}

impl fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedSolution")
            .field("name", &self.name)
            .field("side", &self.side)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ManufacturedSolution {
    pub fn is_maxwell(&self) -> bool {
        matches!(self.traces, Traces::Maxwell { .. })
    }

    pub fn wavenumber(&self) -> Option<Complex64> {
        match &self.traces {
            Traces::Maxwell { wavenumber, .. } => Some(*wavenumber),
            Traces::Laplace { .. } => None,
        }
    }

    /// The same solution at wavenumber `k`; only plane waves accept one.
    pub fn at_wavenumber(&self, k: Complex64) -> Result<Self> {
        if k.norm() == 0.0 {
            return Err(Error::ZeroWavenumber);
        }
        match self.name {
            "m3" => Ok(maxwell_example_3_at(k)),
            "m4" => Ok(maxwell_example_4_at(k)),
            other => Err(Error::Config(format!("solution {other} has no wavenumber"))),
        }
    }

    /// Looks a solution up by its command-line name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "1a" => Ok(example_1a()),
            "1b" => Ok(example_1b()),
            "2" => Ok(example_2()),
            "m3" => Ok(maxwell_example_3()),
            "m4" => Ok(maxwell_example_4()),
            other => Err(Error::Config(format!("unknown solution {other:?} (expected 1a, 1b, 2, m3, m4)"))),
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `−(x̂ + iŷ)` at the radial projection `x̂` of `x`: `e^{iφ} P₁¹(cos θ)`.
fn sphere_harmonic(x: &Vec3) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return c(0.0);
    }
    -Complex64::new(x.x / r, x.y / r)
}

/// `u(x) = −(x + iy)/|x|³`, the decaying exterior field.
fn exterior_field(x: &Vec3) -> Complex64 {
    let r = x.norm();
    -Complex64::new(x.x, x.y) / (r * r * r)
}

/// `∇u · n` for [`exterior_field`].
fn exterior_normal_derivative(x: &Vec3, n: &Vec3) -> Complex64 {
    let r = x.norm();
    let z = Complex64::new(x.x, x.y);
    -Complex64::new(n.x, n.y) / (r * r * r) + 3.0 * z * x.dot(n) / r.powi(5)
}

/// Exterior dipole-type solution on the unit sphere.
///
/// The traces are those of the field itself evaluated on the flat panels
/// (`u` and `∇u · n` with the panel normal), so the Calderón identity holds
/// exactly on the polyhedron and the residual sees only discretisation
/// error. On `|x| = 1` they reduce to `τ_D = −(x̂ + iŷ)` and `τ_N = −2 τ_D`.
pub fn example_1a() -> ManufacturedSolution {
    ManufacturedSolution {
        name: "1a",
        side: Side::Exterior,
        domain: Domain::Sphere,
        traces: Traces::Laplace {
            dirichlet: Arc::new(|x, _| exterior_field(x)),
            neumann: Arc::new(exterior_normal_derivative),
            field: Arc::new(exterior_field),
        },
        smoothness_note: "analytic traces on the sphere",
    }
}

/// Interior solution `u = −(x + iy)` with the sphere traces
/// `τ_D = τ_N = −(x̂ + iŷ)` evaluated at the radial projection.
///
/// The field's own traces on the polyhedron would be linear and piecewise
/// constant, i.e. exactly representable, leaving only quadrature error in
/// the residual; the projected traces keep a genuine convergence study.
pub fn example_1b() -> ManufacturedSolution {
    ManufacturedSolution {
        name: "1b",
        side: Side::Interior,
        domain: Domain::Sphere,
        traces: Traces::Laplace {
            dirichlet: Arc::new(|x, _| sphere_harmonic(x)),
            neumann: Arc::new(|x, _| sphere_harmonic(x)),
            field: Arc::new(|x| -Complex64::new(x.x, x.y)),
        },
        smoothness_note: "analytic traces on the sphere",
    }
}

pub fn example_2() -> ManufacturedSolution {
    ManufacturedSolution {
        name: "2",
        side: Side::Interior,
        domain: Domain::Cube,
        traces: Traces::Laplace {
            dirichlet: Arc::new(|x, _| c(x.x * x.x - 0.5 * x.y * x.y - 0.5 * x.z * x.z)),
            neumann: Arc::new(|x, n| c(2.0 * x.x * n.x - x.y * n.y - x.z * n.z)),
            field: Arc::new(|x| c(x.x * x.x - 0.5 * x.y * x.y - 0.5 * x.z * x.z)),
        },
        smoothness_note: "polynomial Dirichlet trace; face-wise linear Neumann trace, discontinuous across edges",
    }
}

fn cross_c(a: [Complex64; 3], b: &Vec3) -> [Complex64; 3] {
    [a[1] * b.z - a[2] * b.y, a[2] * b.x - a[0] * b.z, a[0] * b.y - a[1] * b.x]
}

/// Plane wave `U = pol e^{ik x·d}` with `curl U = ik (d × pol) e^{ik x·d}`.
fn plane_wave(name: &'static str, pol: Vec3, d: Vec3, kc: Complex64) -> ManufacturedSolution {
    let curl_dir = d.cross(&pol);
    let phase = move |x: &Vec3| (Complex64::i() * kc * x.dot(&d)).exp();
    let field = move |x: &Vec3| {
        let e = phase(x);
        [e * pol.x, e * pol.y, e * pol.z]
    };
    let curl = move |x: &Vec3| {
        let e = phase(x) * Complex64::i() * kc;
        [e * curl_dir.x, e * curl_dir.y, e * curl_dir.z]
    };
    ManufacturedSolution {
        name,
        // plane waves are entire, so the interior identity holds for them
        side: Side::Interior,
        domain: Domain::Cube,
        traces: Traces::Maxwell {
            tangential: Arc::new(move |x, n| cross_c(field(x), n)),
            magnetic: Arc::new(move |x, n| cross_c(curl(x), n)),
            field: Arc::new(field),
            wavenumber: kc,
        },
        smoothness_note: "analytic field; traces smooth per face",
    }
}

pub fn maxwell_example_3() -> ManufacturedSolution {
    maxwell_example_3_at(c(1.0))
}

/// Example 3 with another (nonzero, possibly complex) wavenumber.
pub fn maxwell_example_3_at(k: Complex64) -> ManufacturedSolution {
    plane_wave("m3", Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), k)
}

pub fn maxwell_example_4() -> ManufacturedSolution {
    maxwell_example_4_at(c(2.0))
}

/// Example 4 with another (nonzero, possibly complex) wavenumber.
pub fn maxwell_example_4_at(k: Complex64) -> ManufacturedSolution {
    let d = Vec3::new(1.0, 1.0, 1.0).normalize();
    let p = Vec3::new(1.01, 0.0, 1.05);
    plane_wave("m4", d.cross(&p.cross(&d)), d, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplace(s: &ManufacturedSolution) -> (ScalarTrace, ScalarTrace, ScalarField) {
        match &s.traces {
            Traces::Laplace { dirichlet, neumann, field } => (dirichlet.clone(), neumann.clone(), field.clone()),
            _ => panic!("not a Laplace solution"),
        }
    }

    fn maxwell(s: &ManufacturedSolution) -> (VectorTrace, VectorTrace, VectorField, Complex64) {
        match &s.traces {
            Traces::Maxwell { tangential, magnetic, field, wavenumber } => {
                (tangential.clone(), magnetic.clone(), field.clone(), *wavenumber)
            }
            _ => panic!("not a Maxwell solution"),
        }
    }

    /// Deterministic points on the unit sphere.
    fn sphere_points(n: usize) -> Vec<Vec3> {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                Vec3::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect()
    }

    #[test]
    fn example_1a_values() {
        let (d, n, _) = laplace(&example_1a());
        let x = Vec3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(d(&x, &x).re, -1.0);
        assert_relative_eq!(n(&x, &x).re, 2.0);
        for p in sphere_points(50) {
            assert!((n(&p, &p) + 2.0 * d(&p, &p)).norm() < 1e-15);
        }
        let pole = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(d(&pole, &pole), c(0.0));
    }

    #[test]
    fn example_1b_traces_agree() {
        let (d, n, _) = laplace(&example_1b());
        for p in sphere_points(100) {
            assert_eq!(d(&p, &p), n(&p, &p));
        }
    }

    #[test]
    fn example_2_values() {
        let (d, n, _) = laplace(&example_2());
        let x = Vec3::new(1.0, 0.5, 0.5);
        assert_relative_eq!(d(&x, &x).re, 0.75);
        assert_relative_eq!(n(&x, &Vec3::new(1.0, 0.0, 0.0)).re, 2.0);
    }

    #[test]
    fn laplace_fields_are_harmonic() {
        let h = 2e-4;
        for s in [example_1a(), example_1b(), example_2()] {
            let (_, _, u) = laplace(&s);
            for i in 0..10 {
                let t = i as f64;
                let x = Vec3::new(1.3 + 0.1 * t.sin(), 0.4 * t.cos(), 0.2 + 0.05 * t);
                let mut lap = -6.0 * u(&x);
                for axis in 0..3 {
                    let mut e = Vec3::zeros();
                    e[axis] = h;
                    lap += u(&(x + e)) + u(&(x - e));
                }
                assert!((lap / (h * h)).norm() < 1e-6, "{}: {}", s.name, lap / (h * h));
            }
        }
    }

    #[test]
    fn laplace_neumann_traces_match_field_gradient() {
        // cube: derivative along the face normal
        let (_, n, u) = laplace(&example_2());
        let h = 1e-6;
        let x = Vec3::new(0.3, 0.7, 1.0);
        let nz = Vec3::new(0.0, 0.0, 1.0);
        let fd = (u(&(x + nz * h)) - u(&(x - nz * h))) / (2.0 * h);
        assert!((fd - n(&x, &nz)).norm() < 1e-8);
        // sphere: radial derivative at r = 1
        for s in [example_1a(), example_1b()] {
            let (_, n, u) = laplace(&s);
            for p in sphere_points(20) {
                let fd = (u(&(p * (1.0 + h))) - u(&(p * (1.0 - h)))) / (2.0 * h);
                assert!((fd - n(&p, &p)).norm() < 1e-8, "{}", s.name);
            }
        }
    }

    #[test]
    fn maxwell_fields_solve_the_vector_helmholtz_equation() {
        let h = 1e-3;
        for s in [maxwell_example_3(), maxwell_example_4()] {
            let (_, _, u, k) = maxwell(&s);
            for i in 0..5 {
                let t = i as f64;
                let x = Vec3::new(0.2 * t, 0.5 - 0.1 * t, 0.3);
                // for divergence-free U, curl curl U = −ΔU
                let mut lap = [c(0.0); 3];
                let ux = u(&x);
                for axis in 0..3 {
                    let mut e = Vec3::zeros();
                    e[axis] = h;
                    let (a, b) = (u(&(x + e)), u(&(x - e)));
                    for comp in 0..3 {
                        lap[comp] += (a[comp] + b[comp] - ux[comp] * 2.0) / (h * h);
                    }
                }
                for comp in 0..3 {
                    assert!((-lap[comp] - k * k * ux[comp]).norm() < 1e-4, "{}", s.name);
                }
                // divergence
                let mut div = c(0.0);
                for axis in 0..3 {
                    let mut e = Vec3::zeros();
                    e[axis] = h;
                    div += (u(&(x + e))[axis] - u(&(x - e))[axis]) / (2.0 * h);
                }
                assert!(div.norm() < 1e-6);
            }
        }
    }

    #[test]
    fn maxwell_example_3_at_origin() {
        let (t, m, _, _) = maxwell(&maxwell_example_3());
        let x = Vec3::zeros();
        let n = Vec3::new(0.0, 0.0, -1.0);
        let gt = t(&x, &n);
        let gr = m(&x, &n);
        for (v, e) in gt.iter().zip([c(0.0), c(1.0), c(0.0)]) {
            assert!((v - e).norm() < 1e-15);
        }
        for (v, e) in gr.iter().zip([Complex64::new(0.0, -1.0), c(0.0), c(0.0)]) {
            assert!((v - e).norm() < 1e-15);
        }
    }

    #[test]
    fn maxwell_traces_are_tangential() {
        for s in [maxwell_example_3(), maxwell_example_4()] {
            let (t, m, _, _) = maxwell(&s);
            for axis in 0..3 {
                let mut n = Vec3::zeros();
                n[axis] = 1.0;
                let x = Vec3::new(0.3, 0.6, 0.9);
                for v in [t(&x, &n), m(&x, &n)] {
                    let dot = v[0] * n.x + v[1] * n.y + v[2] * n.z;
                    assert!(dot.norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn example_4_polarisation_is_transverse() {
        let d = Vec3::new(1.0, 1.0, 1.0).normalize();
        let p = Vec3::new(1.01, 0.0, 1.05);
        assert!(d.dot(&d.cross(&p.cross(&d))).abs() < 1e-15);
        assert_eq!(maxwell_example_4().wavenumber(), Some(c(2.0)));
    }

    #[test]
    fn example_3_tangential_modulus_constant_on_side_faces() {
        let (t, _, _, _) = maxwell(&maxwell_example_3());
        let n = Vec3::new(0.0, 1.0, 0.0);
        let norm = |v: [Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let a = norm(t(&Vec3::new(0.1, 1.0, 0.2), &n));
        let b = norm(t(&Vec3::new(0.8, 1.0, 0.9), &n));
        assert_relative_eq!(a, b, epsilon = 1e-15);
    }

    #[test]
    fn lookup_by_name() {
        for name in ["1a", "1b", "2", "m3", "m4"] {
            assert_eq!(ManufacturedSolution::by_name(name).unwrap().name, name);
        }
        assert!(ManufacturedSolution::by_name("3").is_err());
    }
}
