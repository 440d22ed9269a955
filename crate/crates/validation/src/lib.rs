//! Reference computations that share no code with `calderon-core`, used to
//! check its quadrature independently.
//!
//! The singular-pair oracle evaluates the inner integral of `1/|x − y|`
//! over a flat triangle in closed form (potential of a uniform triangle)
//! and the outer integral by adaptive subdivision with a separately coded
//! collapsed Gauss rule.

use std::f64::consts::PI;

use nalgebra::Vector3;

pub type Point = Vector3<f64>;

/// `∫_T 1/|x − y| dS_y` for a flat triangle, exact.
pub fn triangle_potential(tri: &[Point; 3], x: &Point) -> f64 {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
    let w = (x - tri[0]).dot(&n);
    let rho = x - n * w;
    let aw = w.abs();
    let mut sum = 0.0;
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let lhat = (b - a).normalize();
        let mhat = lhat.cross(&n);
        let t0 = (a - rho).dot(&mhat);
        let lp = (b - rho).dot(&lhat);
        let lm = (a - rho).dot(&lhat);
        let r0sq = t0 * t0 + w * w;
        let rp = (r0sq + lp * lp).sqrt();
        let rm = (r0sq + lm * lm).sqrt();
        if t0.abs() > 1e-14 {
            let log = if lp + lm >= 0.0 {
                ((rp + lp) / (rm + lm)).ln()
            } else {
                ((rm - lm) / (rp - lp)).ln()
            };
            sum += t0 * log;
            if aw > 0.0 {
                sum -= aw * ((t0 * lp / (r0sq + aw * rp)).atan() - (t0 * lm / (r0sq + aw * rm)).atan());
            }
        }
    }
    sum
}

/// 5-point Gauss–Legendre on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Collapsed 5×5 Gauss rule on a physical triangle (exact to degree 8).
pub fn gauss_on(tri: &[Point; 3], f: &dyn Fn(&Point) -> f64) -> f64 {
    let area2 = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm();
    let mut s = 0.0;
    for (xu, wu) in GL5 {
        let u = 0.5 * (xu + 1.0);
        for (xv, wv) in GL5 {
            let v = 0.5 * (xv + 1.0) * (1.0 - u);
            let p = tri[0] + (tri[1] - tri[0]) * u + (tri[2] - tri[0]) * v;
            s += 0.25 * wu * wv * (1.0 - u) * f(&p);
        }
    }
    s * area2
}

fn split(tri: &[Point; 3]) -> [[Point; 3]; 4] {
    let m01 = 0.5 * (tri[0] + tri[1]);
    let m12 = 0.5 * (tri[1] + tri[2]);
    let m20 = 0.5 * (tri[2] + tri[0]);
    [[tri[0], m01, m20], [m01, tri[1], m12], [m20, m12, tri[2]], [m01, m12, m20]]
}

/// Adaptive red refinement of `tri` until two successive estimates agree
/// to `tol` or `depth` runs out; `coarse` is the estimate on `tri` itself.
pub fn adaptive(tri: &[Point; 3], f: &dyn Fn(&Point) -> f64, coarse: f64, tol: f64, depth: usize) -> f64 {
    let kids = split(tri);
    let parts: Vec<f64> = kids.iter().map(|k| gauss_on(k, f)).collect();
    let fine: f64 = parts.iter().sum();
    if (fine - coarse).abs() < tol || depth == 0 {
        return fine;
    }
    kids.iter()
        .zip(parts)
        .map(|(k, c)| adaptive(k, f, c, tol / 2.0, depth - 1))
        .sum()
}

/// `∫_{T_a} ∫_{T_b} 1/(4π|x − y|) dS_y dS_x` for any pair of flat triangles,
/// including identical and touching ones.
pub fn single_layer_pair(ta: &[Point; 3], tb: &[Point; 3]) -> f64 {
    let f = |x: &Point| triangle_potential(tb, x) / (4.0 * PI);
    let coarse = gauss_on(ta, &f);
    adaptive(ta, &f, coarse, 1e-13, 14)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_matches_far_field_quadrature() {
        let tri = [Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.2, 0.0), Point::new(0.3, 0.9, 0.1)];
        for x in [Point::new(3.0, 1.0, 2.0), Point::new(-2.0, 0.5, -1.5), Point::new(0.4, 0.4, 4.0)] {
            let exact = triangle_potential(&tri, &x);
            let f = |y: &Point| 1.0 / (x - y).norm();
            let numeric = adaptive(&tri, &f, gauss_on(&tri, &f), 1e-14, 6);
            assert!((exact - numeric).abs() < 1e-12 * exact, "{exact} vs {numeric}");
        }
    }

    #[test]
    fn potential_at_a_vertex_of_a_right_triangle() {
        // ∫ over the unit right triangle seen from its right-angle corner:
        // ∫_0^{π/2} ∫_0^{1/(cos φ + sin φ)} dr dφ = √2 · artanh(1/√2)
        let tri = [Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let exact = 2f64.sqrt() * (1.0 / 2f64.sqrt()).atanh();
        assert!((triangle_potential(&tri, &tri[0]) - exact).abs() < 1e-13);
    }

    #[test]
    fn gauss_rule_integrates_area_and_linear_moments() {
        let tri = [Point::new(0.0, 0.0, 0.0), Point::new(2.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        assert!((gauss_on(&tri, &|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((gauss_on(&tri, &|p| p.x) - 2.0 / 3.0).abs() < 1e-14);
    }
}
