//! Quadrature on triangles and on pairs of triangles.
//!
//! Regular rules live on the reference triangle `{s, t >= 0, s + t <= 1}`
//! and are exact for polynomials up to their stated degree. Singular panel
//! pairs (identical, common edge, common vertex) use the Sauter–Schwab
//! regularising transformations with a tensor Gauss–Legendre rule of
//! `singular` points per coordinate.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, PanelGeometry, Vec3};

/// Quadrature orders used for panel-pair integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadConfig {
    /// Polynomial degree of the per-panel rule used for disjoint pairs.
    pub regular: usize,
    /// Gauss points per coordinate of the four-dimensional singular rules.
    pub singular: usize,
}

impl QuadConfig {
    pub const DEFAULT: QuadConfig = QuadConfig { regular: 4, singular: 4 };
    /// The reduced-accuracy configuration used as a quadrature fault.
    pub const DEGRADED: QuadConfig = QuadConfig { regular: 2, singular: 1 };

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_TRIANGLE_ORDER).contains(&self.regular) {
            return Err(Error::UnsupportedOrder(self.regular));
        }
        if !(1..=MAX_GAUSS_POINTS).contains(&self.singular) {
            return Err(Error::UnsupportedOrder(self.singular));
        }
        Ok(())
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub const MAX_TRIANGLE_ORDER: usize = 20;
pub const MAX_GAUSS_POINTS: usize = 32;

/// Points and weights on the reference triangle; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p[0], p[1])).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_GAUSS_POINTS {
        return Err(Error::UnsupportedOrder(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        // map [-1, 1] -> [0, 1], ascending order
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok((nodes, weights))
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Triangle rule exact for total degree `order`.
pub fn gauss_triangle(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_TRIANGLE_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let (points, weights) = match order {
        1 => (vec![[1.0 / 3.0, 1.0 / 3.0]], vec![0.5]),
        2 => (
            vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            vec![1.0 / 6.0; 3],
        ),
        4 => {
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            push_orbit3(&mut pts, &mut wts, 0.445948490915965, 0.223381589678011 / 2.0);
            push_orbit3(&mut pts, &mut wts, 0.091576213509771, 0.109951743655322 / 2.0);
            (pts, wts)
        }
        5 => {
            let mut pts = vec![[1.0 / 3.0, 1.0 / 3.0]];
            let mut wts = vec![0.225 / 2.0];
            push_orbit3(&mut pts, &mut wts, 0.470142064105115, 0.132394152788506 / 2.0);
            push_orbit3(&mut pts, &mut wts, 0.101286507323456, 0.125939180544827 / 2.0);
            (pts, wts)
        }
        _ => collapsed_gauss(order)?,
    };
    Ok(QuadratureRule { points, weights, order })
}

/// Adds the three points with barycentric coordinates `(a, a, 1 - 2a)` and
/// permutations.
fn push_orbit3(pts: &mut Vec<[f64; 2]>, wts: &mut Vec<f64>, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    pts.extend([[a, a], [b, a], [a, b]]);
    wts.extend([w; 3]);
}

/// Duffy-collapsed tensor Gauss rule, exact for total degree `order`.
fn collapsed_gauss(order: usize) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    let n = (order + 2).div_ceil(2);
    let (x, w) = gauss_legendre_unit(n)?;
    let mut pts = Vec::with_capacity(n * n);
    let mut wts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = x[i];
            pts.push([u, x[j] * (1.0 - u)]);
            wts.push(w[i] * w[j] * (1.0 - u));
        }
    }
    Ok((pts, wts))
}

/// Relationship between two panels, with the local vertex orders that put
/// the shared vertices first (in the same order on both panels).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Disjoint,
    CommonVertex { perm_a: [usize; 3], perm_b: [usize; 3] },
    CommonEdge { perm_a: [usize; 3], perm_b: [usize; 3] },
    Identical,
}

impl PairClass {
    pub fn is_singular(&self) -> bool {
        !matches!(self, PairClass::Disjoint)
    }
}

/// Classifies the panel pair `(a, b)` by shared vertices.
pub fn classify_pair(mesh: &Mesh, a: usize, b: usize) -> PairClass {
    if a == b {
        return PairClass::Identical;
    }
    classify_vertices(&mesh.panels()[a], &mesh.panels()[b])
}

pub(crate) fn classify_vertices(pa: &[usize; 3], pb: &[usize; 3]) -> PairClass {
    let mut shared: Vec<(usize, usize)> = Vec::with_capacity(3);
    for (i, va) in pa.iter().enumerate() {
        if let Some(j) = pb.iter().position(|vb| vb == va) {
            shared.push((i, j));
        }
    }
    // canonical order (by global vertex index) so that (a, b) and (b, a)
    // see the same aligned configuration
    shared.sort_by_key(|&(i, _)| pa[i]);
    let complete = |first: &[(usize, usize)]| {
        let mut perm_a = [0; 3];
        let mut perm_b = [0; 3];
        for (k, &(i, j)) in first.iter().enumerate() {
            perm_a[k] = i;
            perm_b[k] = j;
        }
        let mut ka = first.len();
        let mut kb = first.len();
        for i in 0..3 {
            if !first.iter().any(|&(x, _)| x == i) {
                perm_a[ka] = i;
                ka += 1;
            }
            if !first.iter().any(|&(_, y)| y == i) {
                perm_b[kb] = i;
                kb += 1;
            }
        }
        (perm_a, perm_b)
    };
    match shared.len() {
        0 => PairClass::Disjoint,
        1 => {
            let (perm_a, perm_b) = complete(&shared);
            PairClass::CommonVertex { perm_a, perm_b }
        }
        2 => {
            let (perm_a, perm_b) = complete(&shared);
            PairClass::CommonEdge { perm_a, perm_b }
        }
        _ => PairClass::Identical,
    }
}

/// One point of a panel-pair rule: reference coordinates on each panel
/// (in the panel's own vertex order) and the weight on the product of the
/// reference triangles, which sums to 1/4.
#[derive(Debug, Clone, Copy)]
pub struct PairRulePoint {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub w: f64,
}

/// Sauter–Schwab rules on the aligned reference configuration, built once
/// per singular order.
#[derive(Debug, Clone)]
pub struct SingularRules {
    pub identical: Vec<PairRulePoint>,
    pub common_edge: Vec<PairRulePoint>,
    pub common_vertex: Vec<PairRulePoint>,
    pub order: usize,
}

/// Maps a point of `{0 <= x2 <= x1 <= 1}` to the standard reference triangle.
#[inline]
fn to_standard(p: (f64, f64)) -> [f64; 2] {
    [p.0 - p.1, p.1]
}

impl SingularRules {
    pub fn new(order: usize) -> Result<Self> {
        let (g, gw) = gauss_legendre_unit(order)?;
        let mut identical = Vec::new();
        let mut common_edge = Vec::new();
        let mut common_vertex = Vec::new();
        let push = |set: &mut Vec<PairRulePoint>, x: (f64, f64), y: (f64, f64), w: f64| {
            set.push(PairRulePoint { x: to_standard(x), y: to_standard(y), w });
        };
        for (&xi, &wxi) in g.iter().zip(&gw) {
            for (&e1, &w1) in g.iter().zip(&gw) {
                for (&e2, &w2) in g.iter().zip(&gw) {
                    for (&e3, &w3) in g.iter().zip(&gw) {
                        let w = wxi * w1 * w2 * w3;

                        let wi = w * xi.powi(3) * e1 * e1 * e2;
                        let terms = [
                            ((xi, xi * (1.0 - e1 + e1 * e2)), (xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1))),
                            ((xi, xi * e1 * (1.0 - e2 + e2 * e3)), (xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2))),
                            ((xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)), (xi, xi * e1 * (1.0 - e2))),
                        ];
                        for (x, y) in terms {
                            push(&mut identical, x, y, wi);
                            push(&mut identical, y, x, wi);
                        }

                        let we1 = w * xi.powi(3) * e1 * e1;
                        let we = we1 * e2;
                        let edge_terms = [
                            ((xi, xi * e1 * e3), (xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)), we1),
                            ((xi, xi * e1), (xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)), we),
                            ((xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)), (xi, xi * e1 * e2 * e3), we),
                            ((xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)), (xi, xi * e1), we),
                            ((xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)), (xi, xi * e1 * e2), we),
                        ];
                        // symmetrised in (x, y) so that swapping the panels
                        // reproduces the same value to roundoff
                        for (x, y, wt) in edge_terms {
                            push(&mut common_edge, x, y, 0.5 * wt);
                            push(&mut common_edge, y, x, 0.5 * wt);
                        }

                        let wv = w * xi.powi(3) * e2;
                        let x = (xi, xi * e1);
                        let y = (xi * e2, xi * e2 * e3);
                        push(&mut common_vertex, x, y, wv);
                        push(&mut common_vertex, y, x, wv);
                    }
                }
            }
        }
        Ok(Self { identical, common_edge, common_vertex, order })
    }
}

/// Re-expresses reference coordinates given relative to the aligned vertex
/// order `perm` (aligned vertex `k` is local vertex `perm[k]`) in the
/// panel's own vertex order.
#[inline]
pub fn unpermute(st: [f64; 2], perm: &[usize; 3]) -> [f64; 2] {
    let mut bary = [0.0; 3];
    bary[perm[0]] = 1.0 - st[0] - st[1];
    bary[perm[1]] = st[0];
    bary[perm[2]] = st[1];
    [bary[1], bary[2]]
}

/// Barycentric coordinates of reference point `(s, t)`.
#[inline]
pub fn barycentric(st: [f64; 2]) -> [f64; 3] {
    [1.0 - st[0] - st[1], st[0], st[1]]
}

/// Integrates `kernel(x, y)` over the panel pair with the rule selected by
/// `class`. The result includes both surface Jacobians.
pub fn integrate_pair<F>(
    kernel: F,
    ga: &PanelGeometry,
    gb: &PanelGeometry,
    class: PairClass,
    singular: &SingularRules,
    regular: &QuadratureRule,
) -> Result<f64>
where
    F: Fn(&Vec3, &Vec3) -> f64,
{
    let jac = 4.0 * ga.area * gb.area;
    let mut sum = 0.0;
    match class {
        PairClass::Disjoint => {
            for (px, wx) in regular.points.iter().zip(&regular.weights) {
                let x = ga.point(*px);
                for (py, wy) in regular.points.iter().zip(&regular.weights) {
                    let v = kernel(&x, &gb.point(*py));
                    if !v.is_finite() {
                        return Err(Error::NonFiniteKernel);
                    }
                    sum += wx * wy * v;
                }
            }
        }
        _ => {
            for p in pair_points(class, singular) {
                let x = ga.point(p.x);
                let y = gb.point(p.y);
                sum += p.w * kernel(&x, &y);
            }
        }
    }
    Ok(sum * jac)
}

/// Iterator over the singular rule for `class`, in each panel's own
/// reference coordinates. Panics on `Disjoint`.
pub fn pair_points(
    class: PairClass,
    rules: &SingularRules,
) -> impl Iterator<Item = PairRulePoint> + '_ {
    let (set, perms) = match class {
        PairClass::Identical => (&rules.identical, None),
        PairClass::CommonEdge { perm_a, perm_b } => (&rules.common_edge, Some((perm_a, perm_b))),
        PairClass::CommonVertex { perm_a, perm_b } => {
            (&rules.common_vertex, Some((perm_a, perm_b)))
        }
        PairClass::Disjoint => panic!("pair_points called on a disjoint pair"),
    };
    set.iter().map(move |p| match perms {
        None => *p,
        Some((pa, pb)) => PairRulePoint { x: unpermute(p.x, &pa), y: unpermute(p.y, &pb), w: p.w },
    })
}
