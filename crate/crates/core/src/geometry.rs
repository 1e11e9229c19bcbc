//! Metric-agnostic differential geometry kernel.
//!
//! Scalar, vector and metric fields are evaluation maps `point -> jet(s)`;
//! every derivative the kernel takes (brackets, the Koszul formula, the
//! curvature tensor, the frame Laplacian) comes out of the jets, so the same
//! code path serves every metric the engine sees. Connection and curvature are
//! computed from the Koszul formula against the coordinate basis with
//! jet-valued intermediates rather than from precomputed Christoffel tables;
//! that keeps arbitrary user metrics uniform at desk scale.
//!
//! Index convention: `curvature_scalar(g, X, Y, Z, W, p) = g(R(Z,W)Y, X)`
//! with `R(X,Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_{[X,Y]} Z`, so for a frame
//! `R_ijkl = curvature_scalar(g, e_i, e_j, e_k, e_l, p)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::expr::Expr;
use crate::jet::Jet;

/// Jet order used by every field evaluation.
pub const ORDER: usize = 3;

/// Gram-matrix tolerance for frame orthonormality checks.
pub const FRAME_TOL: f64 = 1e-9;

/// A point in chart coordinates. For 2-dimensional base charts the third
/// coordinate is unused and kept at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Coordinate jets seeding a full-order evaluation at this point.
    pub fn jets(&self) -> [Jet; 3] {
        [
            Jet::coordinate(0, self.x, ORDER),
            Jet::coordinate(1, self.y, ORDER),
            Jet::coordinate(2, self.z, ORDER),
        ]
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Where a chart is valid. Samplers stay away from the boundary by a margin;
/// evaluation entry points enforce the strict predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartDomain {
    All,
    /// `coord(axis) > 0`
    HalfSpacePos { axis: usize },
    /// `x^2 + y^2 < r2` (first two coordinates)
    Disk { r2: f64 },
}

impl ChartDomain {
    pub fn contains(&self, p: Point3, margin: f64) -> bool {
        if !p.is_finite() {
            return false;
        }
        match *self {
            ChartDomain::All => true,
            ChartDomain::HalfSpacePos { axis } => p.coord(axis) > margin,
            ChartDomain::Disk { r2 } => p.x * p.x + p.y * p.y < r2 - margin,
        }
    }

    fn check(&self, p: Point3) -> Result<()> {
        if self.contains(p, 0.0) {
            Ok(())
        } else {
            Err(EngineError::OutOfDomain(p))
        }
    }
}

type ScalarFn = dyn Fn(Point3) -> Result<Jet> + Send + Sync;
type VectorFn = dyn Fn(Point3) -> Result<[Jet; 3]> + Send + Sync;
type MatrixFn = dyn Fn(Point3) -> Result<[[Jet; 3]; 3]> + Send + Sync;
type FrameFn = dyn Fn(Point3) -> Result<[[Jet; 3]; 3]> + Send + Sync;

/// Smooth scalar function, evaluated as a jet so it can be re-differentiated.
#[derive(Clone)]
pub struct ScalarField {
    f: Arc<ScalarFn>,
}

impl ScalarField {
    pub fn new(f: impl Fn(Point3) -> Result<Jet> + Send + Sync + 'static) -> Self {
        ScalarField { f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_| Ok(Jet::constant(c, ORDER)))
    }

    pub fn coordinate(axis: usize) -> Self {
        ScalarField::new(move |p| Ok(Jet::coordinate(axis, p.coord(axis), ORDER)))
    }

    /// Field from a closed-form expression in the chart variables `x, y, z`.
    pub fn from_expr(expr: Expr) -> Self {
        ScalarField::new(move |p| {
            let [x, y, z] = p.jets();
            Ok(expr.eval_jet(&[("x", x), ("y", y), ("z", z)])?)
        })
    }

    pub fn eval(&self, p: Point3) -> Result<Jet> {
        let j = (self.f)(p)?;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(EngineError::Jet(crate::jet::JetError::NonFinite(
                "scalar field evaluation",
            )))
        }
    }
}

/// Vector field in the coordinate basis. `dim` is the chart dimension; unused
/// components are identically zero.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    f: Arc<VectorFn>,
}

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(Point3) -> Result<[Jet; 3]> + Send + Sync + 'static) -> Self {
        VectorField { dim, f: Arc::new(f) }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Self {
        let dim = comps.len();
        VectorField::new(dim, move |p| {
            let mut out = [Jet::constant(0.0, ORDER); 3];
            for (k, c) in comps.iter().enumerate() {
                out[k] = c.eval(p)?;
            }
            Ok(out)
        })
    }

    pub fn from_exprs(exprs: Vec<Expr>) -> Self {
        VectorField::from_components(exprs.into_iter().map(ScalarField::from_expr).collect())
    }

    /// The coordinate field `∂/∂x_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        VectorField::new(dim, move |_| {
            let mut out = [Jet::constant(0.0, ORDER); 3];
            out[axis] = Jet::constant(1.0, ORDER);
            Ok(out)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: Point3) -> Result<[Jet; 3]> {
        let v = (self.f)(p)?;
        for j in &v {
            if !j.is_finite() {
                return Err(EngineError::Jet(crate::jet::JetError::NonFinite(
                    "vector field evaluation",
                )));
            }
        }
        Ok(v)
    }

    /// Directional derivative `X(u) = Σ X^k ∂_k u` as a scalar field.
    pub fn derive(&self, u: &ScalarField) -> ScalarField {
        let x = self.clone();
        let u = u.clone();
        ScalarField::new(move |p| {
            let xv = x.eval(p)?;
            let uj = u.eval(p)?;
            // start high: jet addition truncates to the minimum order of the
            // actual contributions
            let mut acc = Jet::constant(0.0, ORDER);
            for k in 0..x.dim {
                acc = acc + xv[k] * uj.partial(k)?;
            }
            Ok(acc)
        })
    }

    pub fn scale(&self, s: f64) -> VectorField {
        let x = self.clone();
        VectorField::new(self.dim, move |p| {
            let v = x.eval(p)?;
            Ok([v[0].scale(s), v[1].scale(s), v[2].scale(s)])
        })
    }
}

/// Symmetric metric field; `dim` 3 for the total space, 2 for a base surface.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    domain: ChartDomain,
    f: Arc<MatrixFn>,
}

impl MetricField {
    pub fn new(
        dim: usize,
        domain: ChartDomain,
        f: impl Fn(Point3) -> Result<[[Jet; 3]; 3]> + Send + Sync + 'static,
    ) -> Self {
        MetricField {
            dim,
            domain,
            f: Arc::new(f),
        }
    }

    /// Build from the upper-triangle component fields, row-major:
    /// 3D expects `[g11,g12,g13,g22,g23,g33]`, 2D `[g11,g12,g22]`.
    pub fn from_upper_triangle(dim: usize, domain: ChartDomain, comps: Vec<ScalarField>) -> Self {
        assert_eq!(comps.len(), dim * (dim + 1) / 2);
        MetricField::new(dim, domain, move |p| {
            let zero = Jet::constant(0.0, ORDER);
            let mut m = [[zero; 3]; 3];
            let mut it = comps.iter();
            for i in 0..dim {
                for j in i..dim {
                    let v = it.next().unwrap().eval(p)?;
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            Ok(m)
        })
    }

    pub fn from_upper_triangle_exprs(dim: usize, domain: ChartDomain, exprs: Vec<Expr>) -> Self {
        MetricField::from_upper_triangle(
            dim,
            domain,
            exprs.into_iter().map(ScalarField::from_expr).collect(),
        )
    }

    pub fn euclidean(dim: usize) -> Self {
        MetricField::new(dim, ChartDomain::All, move |_| {
            let zero = Jet::constant(0.0, ORDER);
            let one = Jet::constant(1.0, ORDER);
            let mut m = [[zero; 3]; 3];
            for (i, row) in m.iter_mut().enumerate().take(dim) {
                row[i] = one;
            }
            Ok(m)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> ChartDomain {
        self.domain
    }

    pub fn eval(&self, p: Point3) -> Result<[[Jet; 3]; 3]> {
        self.domain.check(p)?;
        let m = (self.f)(p)?;
        for row in m.iter().take(self.dim) {
            for j in row.iter().take(self.dim) {
                if !j.is_finite() {
                    return Err(EngineError::Jet(crate::jet::JetError::NonFinite(
                        "metric field evaluation",
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Positive definiteness via leading principal minors, with margin.
    pub fn check_spd(&self, p: Point3, margin: f64) -> Result<()> {
        let m = self.eval(p)?;
        let a = |i: usize, j: usize| m[i][j].value();
        let minor1 = a(0, 0);
        let minor2 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        let mut ok = minor1 > margin && minor2 > margin;
        if self.dim == 3 {
            let minor3 = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
            ok = ok && minor3 > margin;
        }
        if ok {
            Ok(())
        } else {
            Err(EngineError::SingularMetric)
        }
    }
}

/// Ordered orthonormal frame `(e1, e2, e3)`; for submersions `e3` is vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Adapted,
    Natural,
}

#[derive(Clone)]
pub struct FrameTriple {
    pub kind: FrameKind,
    f: Arc<FrameFn>,
}

impl FrameTriple {
    pub fn new(
        kind: FrameKind,
        f: impl Fn(Point3) -> Result<[[Jet; 3]; 3]> + Send + Sync + 'static,
    ) -> Self {
        FrameTriple { kind, f: Arc::new(f) }
    }

    pub fn from_vector_fields(kind: FrameKind, fields: [VectorField; 3]) -> Self {
        FrameTriple::new(kind, move |p| {
            Ok([fields[0].eval(p)?, fields[1].eval(p)?, fields[2].eval(p)?])
        })
    }

    /// All nine component jets at once; the construction cost is shared.
    pub fn eval(&self, p: Point3) -> Result<[[Jet; 3]; 3]> {
        (self.f)(p)
    }

    /// One leg of the frame as a standalone vector field.
    pub fn vector(&self, i: usize) -> VectorField {
        assert!(i < 3);
        let f = self.clone();
        VectorField::new(3, move |p| Ok(f.eval(p)?[i]))
    }

    /// Same frame with `e3 -> -e3` (orientation control for invariance tests).
    pub fn flip_vertical(&self) -> FrameTriple {
        let f = self.clone();
        FrameTriple::new(self.kind, move |p| {
            let [e1, e2, e3] = f.eval(p)?;
            Ok([e1, e2, [-e3[0], -e3[1], -e3[2]]])
        })
    }

    /// Same frame with `(e1, e2) -> (e2, -e1)`.
    pub fn rotate_horizontal(&self) -> FrameTriple {
        let f = self.clone();
        FrameTriple::new(self.kind, move |p| {
            let [e1, e2, e3] = f.eval(p)?;
            Ok([e2, [-e1[0], -e1[1], -e1[2]], e3])
        })
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self, g: &MetricField, p: Point3) -> Result<f64> {
        let e = self.eval(p)?;
        let gm = g.eval(p)?;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        s += gm[a][b].value() * e[i][a].value() * e[j][b].value();
                    }
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        Ok(worst)
    }
}

/// Jet-valued linear solve `m w = b` for `dim` in {2, 3}, by adjugate.
pub(crate) fn solve_linear(m: &[[Jet; 3]; 3], b: &[Jet; 3], dim: usize) -> Result<[Jet; 3]> {
    let zero = Jet::constant(0.0, ORDER);
    let scale: f64 = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| m[i][j].value().abs())
                .fold(0.0f64, f64::max)
                .max(f64::MIN_POSITIVE)
        })
        .product();
    if dim == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.value().abs() <= 1e-12 * scale {
            return Err(EngineError::SingularMetric);
        }
        let inv_det = det.recip()?;
        let c0 = m[1][1] * b[0] - m[0][1] * b[1];
        let c1 = m[0][0] * b[1] - m[1][0] * b[0];
        return Ok([c0 * inv_det, c1 * inv_det, zero]);
    }
    let cof = |r1: usize, c1: usize, r2: usize, c2: usize| m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    let det = m[0][0] * cof(1, 1, 2, 2) - m[0][1] * cof(1, 0, 2, 2) + m[0][2] * cof(1, 0, 2, 1);
    if det.value().abs() <= 1e-12 * scale {
        return Err(EngineError::SingularMetric);
    }
    let inv_det = det.recip()?;
    // adjugate rows applied to b (m symmetric in every call site, but keep general)
    let adj = [
        [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
        [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
        [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
    ];
    let mut out = [zero; 3];
    for i in 0..3 {
        out[i] = (adj[i][0] * b[0] + adj[i][1] * b[1] + adj[i][2] * b[2]) * inv_det;
    }
    Ok(out)
}

/// `⟨X, Y⟩_g` at `p` as a jet (re-differentiable).
pub fn inner(g: &MetricField, x: &VectorField, y: &VectorField, p: Point3) -> Result<Jet> {
    let gm = g.eval(p)?;
    let xv = x.eval(p)?;
    let yv = y.eval(p)?;
    Ok(inner_jets(&gm, &xv, &yv, g.dim()))
}

pub(crate) fn inner_jets(gm: &[[Jet; 3]; 3], xv: &[Jet; 3], yv: &[Jet; 3], dim: usize) -> Jet {
    let mut acc = Jet::constant(0.0, ORDER);
    for i in 0..dim {
        for j in 0..dim {
            acc = acc + gm[i][j] * xv[i] * yv[j];
        }
    }
    acc
}

pub fn inner_field(g: &MetricField, x: &VectorField, y: &VectorField) -> ScalarField {
    let (g, x, y) = (g.clone(), x.clone(), y.clone());
    ScalarField::new(move |p| inner(&g, &x, &y, p))
}

/// `[X, Y]^k = Σ_i X^i ∂_i Y^k − Y^i ∂_i X^k`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let dim = x.dim();
    let (x, y) = (x.clone(), y.clone());
    VectorField::new(dim, move |p| {
        let xv = x.eval(p)?;
        let yv = y.eval(p)?;
        bracket_jets(&xv, &yv, dim)
    })
}

pub(crate) fn bracket_jets(xv: &[Jet; 3], yv: &[Jet; 3], dim: usize) -> Result<[Jet; 3]> {
    let mut out = [Jet::constant(0.0, ORDER); 3];
    for k in 0..dim {
        let mut acc = Jet::constant(0.0, ORDER);
        for i in 0..dim {
            acc = acc + xv[i] * yv[k].partial(i)? - yv[i] * xv[k].partial(i)?;
        }
        out[k] = acc;
    }
    Ok(out)
}

/// `∇_X Y` at `p` in coordinate components, by the Koszul formula solved
/// against the coordinate basis and the inverse metric. The components come
/// back as jets one order below the inputs, so the result can feed another
/// derivative (curvature, Laplacian).
pub fn levi_civita(g: &MetricField, x: &VectorField, y: &VectorField, p: Point3) -> Result<[Jet; 3]> {
    let dim = g.dim();
    let gm = g.eval(p)?;
    let xv = x.eval(p)?;
    let yv = y.eval(p)?;
    levi_civita_jets(&gm, &xv, &yv, dim)
}

pub(crate) fn levi_civita_jets(
    gm: &[[Jet; 3]; 3],
    xv: &[Jet; 3],
    yv: &[Jet; 3],
    dim: usize,
) -> Result<[Jet; 3]> {
    // g-dual covectors w(V)_k = <V, ∂_k>
    let dual = |v: &[Jet; 3]| -> [Jet; 3] {
        let mut w = [Jet::constant(0.0, ORDER); 3];
        for k in 0..dim {
            let mut acc = Jet::constant(0.0, ORDER);
            for j in 0..dim {
                acc = acc + gm[k][j] * v[j];
            }
            w[k] = acc;
        }
        w
    };
    let wx = dual(xv);
    let wy = dual(yv);
    let s = inner_jets(gm, xv, yv, dim); // <X, Y>
    let br = bracket_jets(xv, yv, dim)?;
    let wbr = dual(&br);

    let mut rhs = [Jet::constant(0.0, ORDER); 3];
    for k in 0..dim {
        // X<Y,∂k> + Y<X,∂k> − ∂k<X,Y> + <[X,Y],∂k> − <[Y,∂k],X> − <[X,∂k],Y>
        let mut t = Jet::constant(0.0, ORDER);
        for i in 0..dim {
            t = t + xv[i] * wy[k].partial(i)?;
            t = t + yv[i] * wx[k].partial(i)?;
        }
        t = t - s.partial(k)?;
        t = t + wbr[k];
        // [V,∂k]^j = −∂k V^j, so the last two Koszul terms each contribute
        // +Σ g_ij X^i ∂k Y^j and +Σ g_ij Y^i ∂k X^j
        for i in 0..dim {
            for j in 0..dim {
                t = t + gm[i][j] * xv[i] * yv[j].partial(k)?;
                t = t + gm[i][j] * yv[i] * xv[j].partial(k)?;
            }
        }
        rhs[k] = t.scale(0.5);
    }
    solve_linear(gm, &rhs, dim)
}

/// `∇_X Y` as a vector field.
pub fn levi_civita_field(g: &MetricField, x: &VectorField, y: &VectorField) -> VectorField {
    let (g, x, y) = (g.clone(), x.clone(), y.clone());
    VectorField::new(g.dim(), move |p| levi_civita(&g, &x, &y, p))
}

/// `R(X,Y)Z` at `p` in coordinate components.
pub fn curvature(
    g: &MetricField,
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
    p: Point3,
) -> Result<[Jet; 3]> {
    let dyz = levi_civita_field(g, y, z);
    let dxz = levi_civita_field(g, x, z);
    let a = levi_civita(g, x, &dyz, p)?;
    let b = levi_civita(g, y, &dxz, p)?;
    let br = lie_bracket(x, y);
    let c = levi_civita(g, &br, z, p)?;
    Ok([a[0] - b[0] - c[0], a[1] - b[1] - c[1], a[2] - b[2] - c[2]])
}

/// `g(R(Z,W)Y, X)` at `p`.
pub fn curvature_scalar(
    g: &MetricField,
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
    w: &VectorField,
    p: Point3,
) -> Result<f64> {
    let r = curvature(g, z, w, y, p)?;
    let gm = g.eval(p)?;
    let xv = x.eval(p)?;
    let mut acc = 0.0;
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            acc += gm[i][j].value() * r[i].value() * xv[j].value();
        }
    }
    Ok(acc)
}

/// Frame Laplacian `Δ u = Σ_i e_i(e_i(u)) − (∇_{e_i} e_i)(u)` at `p`.
///
/// The frame must be orthonormal at `p` (checked to [`FRAME_TOL`]).
pub fn laplacian_frame(
    g: &MetricField,
    frame: &FrameTriple,
    u: &ScalarField,
    p: Point3,
) -> Result<f64> {
    let dev = frame.gram_deviation(g, p)?;
    if dev > FRAME_TOL {
        return Err(EngineError::FrameNotOrthonormal(dev));
    }
    let mut acc = 0.0;
    for i in 0..3 {
        let ei = frame.vector(i);
        let first = ei.derive(u);
        let second = ei.derive(&first);
        acc += second.eval(p)?.value();
        let grad = levi_civita(g, &ei, &ei, p)?;
        let uj = u.eval(p)?;
        for k in 0..3 {
            acc -= grad[k].value() * uj.partial(k)?.value();
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn euclidean_inner_of_coordinate_fields() {
        let g = MetricField::euclidean(3);
        let dx = VectorField::coordinate(3, 0);
        let v = inner(&g, &dx, &dx, p(0.3, -0.7, 2.0)).unwrap();
        assert_eq!(v.value(), 1.0);
        let dy = VectorField::coordinate(3, 1);
        assert_eq!(inner(&g, &dx, &dy, p(1.0, 2.0, 3.0)).unwrap().value(), 0.0);
    }

    #[test]
    fn coordinate_fields_commute() {
        let dx = VectorField::coordinate(3, 0);
        let dy = VectorField::coordinate(3, 1);
        let br = lie_bracket(&dx, &dy).eval(p(0.2, 0.4, -1.0)).unwrap();
        for c in br.iter() {
            assert_eq!(c.value(), 0.0);
        }
    }

    #[test]
    fn euclidean_connection_vanishes() {
        let g = MetricField::euclidean(3);
        let dx = VectorField::coordinate(3, 0);
        let dy = VectorField::coordinate(3, 1);
        let grad = levi_civita(&g, &dx, &dy, p(1.0, -2.0, 0.5)).unwrap();
        for c in grad.iter() {
            assert!(c.value().abs() < 1e-15);
        }
    }

    #[test]
    fn euclidean_curvature_vanishes() {
        let g = MetricField::euclidean(3);
        let fields: Vec<_> = (0..3).map(|a| VectorField::coordinate(3, a)).collect();
        let r = curvature_scalar(&g, &fields[0], &fields[1], &fields[0], &fields[1], p(0.4, 0.2, 1.0))
            .unwrap();
        assert!(r.abs() < 1e-14);
    }

    #[test]
    fn laplacian_of_radius_squared() {
        let g = MetricField::euclidean(3);
        let frame = FrameTriple::from_vector_fields(
            FrameKind::Natural,
            [
                VectorField::coordinate(3, 0),
                VectorField::coordinate(3, 1),
                VectorField::coordinate(3, 2),
            ],
        );
        let u = ScalarField::new(|q| {
            let [x, y, z] = q.jets();
            Ok(x * x + y * y + z * z)
        });
        let v = laplacian_frame(&g, &frame, &u, p(0.3, 1.0, -0.2)).unwrap();
        assert!((v - 6.0).abs() < 1e-12);
        let c = ScalarField::constant(4.2);
        assert!(laplacian_frame(&g, &frame, &c, p(1.0, 1.0, 1.0)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn laplacian_rejects_skewed_frame() {
        let g = MetricField::euclidean(3);
        let skew = FrameTriple::from_vector_fields(
            FrameKind::Natural,
            [
                VectorField::coordinate(3, 0).scale(2.0),
                VectorField::coordinate(3, 1),
                VectorField::coordinate(3, 2),
            ],
        );
        let u = ScalarField::constant(0.0);
        assert!(matches!(
            laplacian_frame(&g, &skew, &u, p(0.0, 0.0, 0.0)),
            Err(EngineError::FrameNotOrthonormal(_))
        ));
    }

    #[test]
    fn domain_checks() {
        let half = ChartDomain::HalfSpacePos { axis: 1 };
        assert!(half.contains(p(0.0, 0.5, 0.0), 1e-3));
        assert!(!half.contains(p(0.0, -0.5, 0.0), 1e-3));
        assert!(!half.contains(p(0.0, 5e-4, 0.0), 1e-3));
        let disk = ChartDomain::Disk { r2: 1.0 };
        assert!(disk.contains(p(0.5, 0.5, 9.0), 1e-3));
        assert!(!disk.contains(p(0.8, 0.8, 0.0), 1e-3));
    }

    #[test]
    fn spd_check_rejects_degenerate_metric() {
        let g = MetricField::from_upper_triangle_exprs(
            2,
            ChartDomain::All,
            vec![
                Expr::parse("1").unwrap(),
                Expr::parse("1").unwrap(),
                Expr::parse("1").unwrap(),
            ],
        );
        assert!(g.check_spd(p(0.0, 0.0, 0.0), 1e-12).is_err());
        let e = MetricField::euclidean(2);
        assert!(e.check_spd(p(1.0, 2.0, 0.0), 1e-12).is_ok());
    }
}
