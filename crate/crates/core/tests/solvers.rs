//! Solver behaviour on clean and faulted matrices, and reference values of
//! the Galerkin diagonals.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use calderon_core::faults::{apply_fault, FaultKind, FaultSpec};
use calderon_core::laplace_ops::{assemble_v, assemble_w};
use calderon_core::linalg::{cg, gmres, sym_eigvals};
use calderon_core::maxwell_ops::assemble_e;
use calderon_core::mesh::{make_cube_mesh, make_sphere_mesh};
use calderon_core::quadrature::QuadConfig;
use calderon_core::solutions::maxwell_example_3;
use calderon_core::spaces::FunctionSpace;

#[test]
fn sphere_diagonals_match_reference_values() {
    let mesh = Arc::new(make_sphere_mesh(2));
    let v = assemble_v(&FunctionSpace::p0(&mesh), &QuadConfig::DEFAULT).unwrap();
    let w = assemble_w(&FunctionSpace::p1(&mesh), &QuadConfig::DEFAULT).unwrap();
    let (vd, wd) = (v.max_abs_diagonal(), w.max_abs_diagonal());
    assert!((vd - 1.261e-2).abs() < 0.05 * 1.261e-2, "max diag V {vd:.4e}");
    assert!((wd - 2.488e-1).abs() < 0.10 * 2.488e-1, "max diag W {wd:.4e}");
}

#[test]
fn electric_operator_is_symmetric_and_gmres_converges() {
    // 108 panels: the cube mesh closest to 96 panels
    let mesh = Arc::new(make_cube_mesh(3).unwrap());
    let (rwg, snc) = (FunctionSpace::rwg(&mesh), FunctionSpace::snc(&mesh));
    let k = maxwell_example_3().wavenumber().unwrap();
    let e = assemble_e(&rwg, &snc, k, &QuadConfig::DEFAULT).unwrap();
    assert!(e.symmetry_defect() <= 1e-8, "{:.3e}", e.symmetry_defect());

    let a = e.to_complex();
    let n = a.nrows();
    let x_true = DVector::from_fn(n, |i, _| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
    let b = &a * &x_true;
    let r = gmres(&a, &b, 1e-10, n, 10 * n).unwrap();
    assert!(r.converged, "relative residual {:.3e} after {}", r.relative_residual, r.iterations);
    assert!((&r.solution - &x_true).norm() < 1e-6 * x_true.norm());
}

#[test]
fn halved_single_layer_diagonal_breaks_definiteness_and_cg() {
    for d in [3, 4] {
        let mesh = Arc::new(make_cube_mesh(d).unwrap());
        let v = assemble_v(&FunctionSpace::p0(&mesh), &QuadConfig::DEFAULT).unwrap();
        let faulted = apply_fault(&v, &FaultSpec::new(FaultKind::B, 0, 1.0 / d as f64)).unwrap();
        let clean_ev = sym_eigvals(v.real().unwrap()).unwrap();
        let faulted_ev = sym_eigvals(faulted.real().unwrap()).unwrap();
        assert!(clean_ev[0] > 0.0, "divisions {d}: clean min {:.3e}", clean_ev[0]);
        assert!(faulted_ev[0] < 0.0, "divisions {d}: faulted min {:.3e}", faulted_ev[0]);

        let b = DVector::from_element(v.nrows(), 1.0);
        let n = b.len();
        assert!(cg(v.real().unwrap(), &b, 1e-10, 5 * n).unwrap().converged);
        assert!(!cg(faulted.real().unwrap(), &b, 1e-10, 5 * n).unwrap().converged, "divisions {d}");
    }
}
