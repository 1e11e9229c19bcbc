//! Candidate Riemannian submersions `π : (M^3, g) -> (N^2, h)` and the frame
//! machinery around them: vertical direction, horizontal lifts of a base
//! frame, bracket (integrability) data, tension and base curvature.
//!
//! A spec carries the map components symbolically so their differential stays
//! at full jet order, and carries the base-space data as fields of the two
//! base coordinates so pullbacks along `π` are plain evaluations with
//! jet-valued arguments.
//!
//! Bracket data of a frame `(e1, e2, e3)` with vertical `e3`:
//!
//! ```text
//! [e1,e3] = f3 e2 + k1 e3,   [e2,e3] = -f3 e1 + k2 e3,
//! [e1,e2] = f1 e1 + f2 e2 - 2 sigma e3,
//! ```
//!
//! and the frame is adapted (horizontal legs basic) exactly when `f3 = 0`.

use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::expr::Expr;
use crate::geometry::{
    self, bracket_jets, inner_jets, solve_linear, ChartDomain, FrameKind, FrameTriple,
    MetricField, Point3, ScalarField, VectorField, ORDER,
};
use crate::jet::Jet;

/// Tolerance on `|f3|` below which a frame counts as adapted.
pub const ADAPTED_TOL: f64 = 1e-8;
/// Tolerance for the bracket-structure assertions of [`IntegrabilityData`].
pub const STRUCTURE_TOL: f64 = 1e-8;

type BaseFn = dyn Fn(&Jet, &Jet) -> Result<Jet> + Send + Sync;

/// Scalar function on the base surface, callable with jet-valued coordinates
/// (composition with the map components comes for free).
#[derive(Clone)]
pub struct BaseField {
    f: Arc<BaseFn>,
}

impl BaseField {
    pub fn new(f: impl Fn(&Jet, &Jet) -> Result<Jet> + Send + Sync + 'static) -> Self {
        BaseField { f: Arc::new(f) }
    }

    /// From an expression in the base coordinates, named `x` and `y`.
    pub fn from_expr(expr: Expr) -> Self {
        BaseField::new(move |s, t| Ok(expr.eval_jet(&[("x", *s), ("y", *t)])?))
    }

    pub fn constant(c: f64) -> Self {
        BaseField::new(move |s, _| Ok(Jet::constant(c, s.order())))
    }

    pub fn eval(&self, s: &Jet, t: &Jet) -> Result<Jet> {
        (self.f)(s, t)
    }
}

/// A candidate Riemannian submersion: map components, total metric, base
/// metric and an h-orthonormal base frame.
#[derive(Clone)]
pub struct SubmersionSpec {
    pub name: String,
    pi: [Expr; 2],
    dpi: [[Expr; 3]; 2],
    g: MetricField,
    /// upper triangle `[h11, h12, h22]`
    h: [BaseField; 3],
    /// `eta[a]` = components of the a-th base frame vector
    eta: [[BaseField; 2]; 2],
    base_domain: ChartDomain,
}

pub struct SubmersionBuilder {
    name: String,
    pi: Option<[Expr; 2]>,
    g: Option<MetricField>,
    h: Option<[Expr; 3]>,
    eta: Option<[[Expr; 2]; 2]>,
    base_domain: ChartDomain,
}

impl SubmersionBuilder {
    pub fn name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Map components as expressions in `x, y, z`.
    pub fn map(mut self, pi1: Expr, pi2: Expr) -> Self {
        self.pi = Some([pi1, pi2]);
        self
    }

    pub fn metric(mut self, g: MetricField) -> Self {
        self.g = Some(g);
        self
    }

    /// Base metric upper triangle `[h11, h12, h22]` as expressions in the
    /// base coordinates `x, y`.
    pub fn base_metric(mut self, domain: ChartDomain, h11: Expr, h12: Expr, h22: Expr) -> Self {
        self.h = Some([h11, h12, h22]);
        self.base_domain = domain;
        self
    }

    /// Optional h-orthonormal base frame `eta[a] = (component_x, component_y)`.
    /// Without it the frame comes from Gram-Schmidt on the coordinate basis.
    pub fn base_frame(mut self, eta1: [Expr; 2], eta2: [Expr; 2]) -> Self {
        self.eta = Some([eta1, eta2]);
        self
    }

    pub fn build(self) -> SubmersionSpec {
        let pi = self.pi.expect("map components required");
        let g = self.g.expect("total metric required");
        let h_exprs = self.h.expect("base metric required");
        let dpi = [
            [pi[0].diff("x"), pi[0].diff("y"), pi[0].diff("z")],
            [pi[1].diff("x"), pi[1].diff("y"), pi[1].diff("z")],
        ];
        let h = [
            BaseField::from_expr(h_exprs[0].clone()),
            BaseField::from_expr(h_exprs[1].clone()),
            BaseField::from_expr(h_exprs[2].clone()),
        ];
        let eta = match self.eta {
            Some(e) => e.map(|v| v.map(BaseField::from_expr)),
            None => gram_schmidt_base_frame(&h),
        };
        SubmersionSpec {
            name: self.name,
            pi,
            dpi,
            g,
            h,
            eta,
            base_domain: self.base_domain,
        }
    }
}

/// Orthonormalize `(∂x, ∂y)` against `h` pointwise.
fn gram_schmidt_base_frame(h: &[BaseField; 3]) -> [[BaseField; 2]; 2] {
    let h1 = h.clone();
    let eta1x = BaseField::new(move |s, t| Ok(h1[0].eval(s, t)?.sqrt()?.recip()?));
    let eta1y = BaseField::constant(0.0);
    let h2 = h.clone();
    let h3 = h.clone();
    let norm2 = move |h: &[BaseField; 3], s: &Jet, t: &Jet| -> Result<Jet> {
        let h11 = h[0].eval(s, t)?;
        let h12 = h[1].eval(s, t)?;
        let h22 = h[2].eval(s, t)?;
        Ok((h22 - h12 * h12 * h11.recip()?).sqrt()?)
    };
    let eta2x = BaseField::new(move |s, t| {
        let h11 = h2[0].eval(s, t)?;
        let h12 = h2[1].eval(s, t)?;
        let n = norm2(&h2, s, t)?;
        Ok(-h12 * (h11 * n).recip()?)
    });
    let eta2y = BaseField::new(move |s, t| {
        let h11 = h3[0].eval(s, t)?;
        let h12 = h3[1].eval(s, t)?;
        let h22 = h3[2].eval(s, t)?;
        Ok((h22 - h12 * h12 * h11.recip()?).sqrt()?.recip()?)
    });
    [[eta1x, eta1y], [eta2x, eta2y]]
}

impl SubmersionSpec {
    pub fn builder() -> SubmersionBuilder {
        SubmersionBuilder {
            name: String::new(),
            pi: None,
            g: None,
            h: None,
            eta: None,
            base_domain: ChartDomain::All,
        }
    }

    pub fn metric(&self) -> &MetricField {
        &self.g
    }

    pub fn domain(&self) -> ChartDomain {
        self.g.domain()
    }

    pub fn base_domain(&self) -> ChartDomain {
        self.base_domain
    }

    /// Map components evaluated as jets at `p`.
    pub fn map_jets(&self, p: Point3) -> Result<[Jet; 2]> {
        let [x, y, z] = p.jets();
        let vars = [("x", x), ("y", y), ("z", z)];
        Ok([self.pi[0].eval_jet(&vars)?, self.pi[1].eval_jet(&vars)?])
    }

    /// The image `π(p)` in base coordinates.
    pub fn base_point(&self, p: Point3) -> Result<Point3> {
        let m = self.map_jets(p)?;
        Ok(Point3::new(m[0].value(), m[1].value(), 0.0))
    }

    /// Rows of the Jacobian of `(π1, π2)` as jets (symbolic derivatives, so
    /// the rows keep full jet order).
    pub fn differential_jets(&self, p: Point3) -> Result<[[Jet; 3]; 2]> {
        let [x, y, z] = p.jets();
        let vars = [("x", x), ("y", y), ("z", z)];
        let mut out = [[Jet::constant(0.0, ORDER); 3]; 2];
        for (r, row) in self.dpi.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                out[r][c] = e.eval_jet(&vars)?;
            }
        }
        Ok(out)
    }

    /// The Jacobian of `(π1, π2)` at `p`.
    pub fn differential(&self, p: Point3) -> Result<[[f64; 3]; 2]> {
        if !self.g.domain().contains(p, 0.0) {
            return Err(EngineError::OutOfDomain(p));
        }
        let j = self.differential_jets(p)?;
        Ok([
            [j[0][0].value(), j[0][1].value(), j[0][2].value()],
            [j[1][0].value(), j[1][1].value(), j[1][2].value()],
        ])
    }

    /// Base metric pulled back through jet-valued base coordinates.
    fn base_metric_at(&self, s: &Jet, t: &Jet) -> Result<[[Jet; 3]; 3]> {
        let zero = Jet::constant(0.0, ORDER);
        let h11 = self.h[0].eval(s, t)?;
        let h12 = self.h[1].eval(s, t)?;
        let h22 = self.h[2].eval(s, t)?;
        Ok([[h11, h12, zero], [h12, h22, zero], [zero, zero, zero]])
    }

    /// The base metric as a 2-dimensional metric field in its own right
    /// (direct route for the base curvature cross-check).
    pub fn base_metric_2d(&self) -> MetricField {
        let h = self.h.clone();
        MetricField::new(2, self.base_domain, move |p| {
            let s = Jet::coordinate(0, p.x, ORDER);
            let t = Jet::coordinate(1, p.y, ORDER);
            let zero = Jet::constant(0.0, ORDER);
            let h11 = h[0].eval(&s, &t)?;
            let h12 = h[1].eval(&s, &t)?;
            let h22 = h[2].eval(&s, &t)?;
            Ok([[h11, h12, zero], [h12, h22, zero], [zero, zero, zero]])
        })
    }

    /// The base frame as 2-dimensional vector fields.
    pub fn base_frame_2d(&self) -> [VectorField; 2] {
        let mk = |a: usize| {
            let eta = self.eta[a].clone();
            VectorField::new(2, move |p| {
                let s = Jet::coordinate(0, p.x, ORDER);
                let t = Jet::coordinate(1, p.y, ORDER);
                Ok([
                    eta[0].eval(&s, &t)?,
                    eta[1].eval(&s, &t)?,
                    Jet::constant(0.0, ORDER),
                ])
            })
        };
        [mk(0), mk(1)]
    }

    /// Kernel direction of `dπ` (not yet normalized), as jets: the Euclidean
    /// cross product of the Jacobian rows.
    fn kernel_jets(&self, p: Point3) -> Result<[Jet; 3]> {
        let d = self.differential_jets(p)?;
        let v = [
            d[0][1] * d[1][2] - d[0][2] * d[1][1],
            d[0][2] * d[1][0] - d[0][0] * d[1][2],
            d[0][0] * d[1][1] - d[0][1] * d[1][0],
        ];
        let scale = d
            .iter()
            .flatten()
            .map(|j| j.value().abs())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let norm2 = v[0].value() * v[0].value()
            + v[1].value() * v[1].value()
            + v[2].value() * v[2].value();
        if norm2.sqrt() <= 1e-12 * scale * scale {
            return Err(EngineError::RankDeficient);
        }
        Ok(v)
    }

    /// g-unit vertical vector at `p`, oriented so that its largest-magnitude
    /// coordinate component is positive (first one wins ties). The
    /// orientation flips the signs of `f3, k1, k2, sigma` consistently;
    /// residual-level results do not depend on it.
    pub fn vertical_direction(&self, p: Point3) -> Result<[f64; 3]> {
        let e = self.frame_jets(p)?;
        Ok([e[2][0].value(), e[2][1].value(), e[2][2].value()])
    }

    fn frame_jets(&self, p: Point3) -> Result<[[Jet; 3]; 3]> {
        let gm = self.g.eval(p)?;
        let d = self.differential_jets(p)?;
        let v = self.kernel_jets(p)?;
        let n2 = inner_jets(&gm, &v, &v, 3);
        let inv_norm = n2.sqrt()?.recip()?;
        let mut e3 = [v[0] * inv_norm, v[1] * inv_norm, v[2] * inv_norm];
        let mut dominant = 0usize;
        for k in 1..3 {
            if e3[k].value().abs() > e3[dominant].value().abs() {
                dominant = k;
            }
        }
        if e3[dominant].value() < 0.0 {
            for c in &mut e3 {
                *c = -*c;
            }
        }
        // covector of e3: the horizontality constraint row
        let mut w = [Jet::constant(0.0, ORDER); 3];
        for k in 0..3 {
            let mut acc = Jet::constant(0.0, ORDER);
            for j in 0..3 {
                acc = acc + gm[k][j] * e3[j];
            }
            w[k] = acc;
        }
        // horizontal lifts of the base frame: dπ(e_a) = η_a ∘ π, <e_a, e3>_g = 0
        let pi_jets = self.map_jets(p)?;
        let zero = Jet::constant(0.0, ORDER);
        let mat = [d[0], d[1], w];
        let mut lifts = [[zero; 3]; 2];
        for (a, lift) in lifts.iter_mut().enumerate() {
            let rhs = [
                self.eta[a][0].eval(&pi_jets[0], &pi_jets[1])?,
                self.eta[a][1].eval(&pi_jets[0], &pi_jets[1])?,
                zero,
            ];
            *lift = solve_linear(&mat, &rhs, 3)?;
        }
        Ok([lifts[0], lifts[1], e3])
    }

    /// The adapted frame: horizontal lifts of the base frame plus the unit
    /// vertical direction.
    pub fn build_frame(&self) -> FrameTriple {
        let spec = self.clone();
        FrameTriple::new(FrameKind::Adapted, move |p| spec.frame_jets(p))
    }

    /// Does `dπ` restrict to a linear isometry on the horizontal space at
    /// `p`? Returns the verdict at tolerance `tol` together with the worst
    /// deviation `|h(dπX, dπY) - g(X, Y)|` over an independently built
    /// g-orthonormal horizontal basis (no reference to the base frame, so
    /// this genuinely validates the spec instead of echoing the lift
    /// construction).
    pub fn is_riemannian_submersion(&self, p: Point3, tol: f64) -> Result<(bool, f64)> {
        let gm_j = self.g.eval(p)?;
        let mut gm = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                gm[i][j] = gm_j[i][j].value();
            }
        }
        let vj = self.kernel_jets(p)?;
        let v = [vj[0].value(), vj[1].value(), vj[2].value()];
        let ip = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += gm[i][j] * a[i] * b[j];
                }
            }
            s
        };
        let vn2 = ip(&v, &v);
        // project the coordinate basis onto the horizontal space
        let mut cands: Vec<[f64; 3]> = Vec::new();
        for c in 0..3 {
            let mut u = [0.0; 3];
            u[c] = 1.0;
            let t = ip(&u, &v) / vn2;
            for k in 0..3 {
                u[k] -= t * v[k];
            }
            cands.push(u);
        }
        cands.sort_by(|a, b| ip(b, b).partial_cmp(&ip(a, a)).unwrap());
        let x1 = cands[0];
        let n1 = ip(&x1, &x1).sqrt();
        let x1 = [x1[0] / n1, x1[1] / n1, x1[2] / n1];
        let mut x2 = cands[1];
        let t = ip(&x2, &x1);
        for k in 0..3 {
            x2[k] -= t * x1[k];
        }
        let n2 = ip(&x2, &x2).sqrt();
        if !(n2 > 1e-12) {
            return Err(EngineError::RankDeficient);
        }
        let x2 = [x2[0] / n2, x2[1] / n2, x2[2] / n2];
        // push forward and compare inner products against h at π(p)
        let d = self.differential(p)?;
        let push = |u: &[f64; 3]| -> [f64; 2] {
            [
                d[0][0] * u[0] + d[0][1] * u[1] + d[0][2] * u[2],
                d[1][0] * u[0] + d[1][1] * u[1] + d[1][2] * u[2],
            ]
        };
        let q = self.map_jets(p)?;
        let hm = self.base_metric_at(&q[0], &q[1])?;
        let h = [
            [hm[0][0].value(), hm[0][1].value()],
            [hm[1][0].value(), hm[1][1].value()],
        ];
        let hip = |a: &[f64; 2], b: &[f64; 2]| {
            h[0][0] * a[0] * b[0] + h[0][1] * (a[0] * b[1] + a[1] * b[0]) + h[1][1] * a[1] * b[1]
        };
        let p1 = push(&x1);
        let p2 = push(&x2);
        let mut dev = 0.0f64;
        for (pair, want) in [(hip(&p1, &p1), 1.0), (hip(&p2, &p2), 1.0), (hip(&p1, &p2), 0.0)] {
            dev = dev.max((pair - want).abs());
        }
        Ok((dev <= tol, dev))
    }

    /// Tension `τ(π) = -dπ(∇_{e3} e3)` at `p`, expressed in the base frame,
    /// together with its h-norm. Vanishes exactly where the submersion is
    /// harmonic.
    pub fn tension(&self, frame: &FrameTriple, p: Point3) -> Result<([f64; 2], f64)> {
        let e3 = frame.vector(2);
        let grad = geometry::levi_civita(&self.g, &e3, &e3, p)?;
        let d = self.differential(p)?;
        let mut tb = [0.0f64; 2];
        for (r, row) in d.iter().enumerate() {
            for (c, j) in row.iter().enumerate() {
                tb[r] -= j * grad[c].value();
            }
        }
        // express in the (orthonormal) base frame: solve eta-matrix * c = tb
        let q = self.map_jets(p)?;
        let mut m = [[0.0f64; 2]; 2];
        for a in 0..2 {
            for c in 0..2 {
                m[c][a] = self.eta[a][c].eval(&q[0], &q[1])?.value();
            }
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-14 {
            return Err(EngineError::SingularMetric);
        }
        let c = [
            (m[1][1] * tb[0] - m[0][1] * tb[1]) / det,
            (m[0][0] * tb[1] - m[1][0] * tb[0]) / det,
        ];
        Ok((c, (c[0] * c[0] + c[1] * c[1]).sqrt()))
    }
}

/// Bracket data values at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataValues {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub sigma: f64,
}

impl DataValues {
    pub fn as_array(&self) -> [f64; 6] {
        [self.f1, self.f2, self.f3, self.kappa1, self.kappa2, self.sigma]
    }
}

/// The six bracket coefficients as re-differentiable scalar fields, plus the
/// structural assertions that the frame brackets really have the expected
/// shape.
#[derive(Clone)]
pub struct IntegrabilityData {
    pub f1: ScalarField,
    pub f2: ScalarField,
    pub f3: ScalarField,
    pub kappa1: ScalarField,
    pub kappa2: ScalarField,
    pub sigma: ScalarField,
    core: Arc<dyn Fn(Point3) -> Result<[Jet; 9]> + Send + Sync>,
}

/// Decompose the frame brackets. Index layout of the core evaluation:
/// `[f1, f2, f3, k1, k2, sigma, <[e1,e3],e1>, <[e2,e3],e2>, <[e2,e3],e1>+f3]`
/// (the last three must vanish for a frame of the expected structure).
pub fn integrability_data(frame: &FrameTriple, g: &MetricField) -> IntegrabilityData {
    let (frame, g) = (frame.clone(), g.clone());
    let core = Arc::new(move |p: Point3| -> Result<[Jet; 9]> {
        let e = frame.eval(p)?;
        let gm = g.eval(p)?;
        let br12 = bracket_jets(&e[0], &e[1], 3)?;
        let br13 = bracket_jets(&e[0], &e[2], 3)?;
        let br23 = bracket_jets(&e[1], &e[2], 3)?;
        let ip = |a: &[Jet; 3], b: &[Jet; 3]| inner_jets(&gm, a, b, 3);
        let f3 = ip(&br13, &e[1]);
        Ok([
            ip(&br12, &e[0]),
            ip(&br12, &e[1]),
            f3,
            ip(&br13, &e[2]),
            ip(&br23, &e[2]),
            ip(&br12, &e[2]).scale(-0.5),
            ip(&br13, &e[0]),
            ip(&br23, &e[1]),
            ip(&br23, &e[0]) + f3,
        ])
    });
    let field = |idx: usize| {
        let core = core.clone();
        ScalarField::new(move |p| Ok(core(p)?[idx]))
    };
    IntegrabilityData {
        f1: field(0),
        f2: field(1),
        f3: field(2),
        kappa1: field(3),
        kappa2: field(4),
        sigma: field(5),
        core,
    }
}

impl IntegrabilityData {
    /// All six values at once, with the structure assertions enforced at
    /// [`STRUCTURE_TOL`].
    pub fn eval(&self, p: Point3) -> Result<DataValues> {
        let j = (self.core)(p)?;
        let worst = j[6].value().abs().max(j[7].value().abs()).max(j[8].value().abs());
        if worst > STRUCTURE_TOL {
            return Err(EngineError::StructureViolation(worst));
        }
        Ok(DataValues {
            f1: j[0].value(),
            f2: j[1].value(),
            f3: j[2].value(),
            kappa1: j[3].value(),
            kappa2: j[4].value(),
            sigma: j[5].value(),
        })
    }

    /// Max magnitude of the three structure residuals at `p`.
    pub fn structure_residual(&self, p: Point3) -> Result<f64> {
        let j = (self.core)(p)?;
        Ok(j[6].value().abs().max(j[7].value().abs()).max(j[8].value().abs()))
    }

    /// Residual of the bracket reconstruction `[e1,e2] = f1 e1 + f2 e2 - 2σ e3`
    /// against explicitly supplied data values (negative-control hook:
    /// corrupt a coefficient and the matching component residual appears).
    pub fn reconstruction_residual(
        &self,
        frame: &FrameTriple,
        g: &MetricField,
        p: Point3,
        values: DataValues,
    ) -> Result<[f64; 3]> {
        let e = frame.eval(p)?;
        let gm = g.eval(p)?;
        let br12 = bracket_jets(&e[0], &e[1], 3)?;
        let ip = |a: &[Jet; 3], b: &[Jet; 3]| inner_jets(&gm, a, b, 3).value();
        Ok([
            ip(&br12, &e[0]) - values.f1,
            ip(&br12, &e[1]) - values.f2,
            ip(&br12, &e[2]) - (-2.0 * values.sigma),
        ])
    }
}

/// Base Gauss curvature from the bracket data:
/// `K^N = e1(f2) - e2(f1) - f1^2 - f2^2 + 2 f3 sigma`
/// (for adapted frames the `f3` term drops out). Returned as a field so
/// fiber constancy `e3(K^N) = 0` can be checked by re-differentiation.
pub fn base_curvature_field(data: &IntegrabilityData, frame: &FrameTriple) -> ScalarField {
    let e1 = frame.vector(0);
    let e2 = frame.vector(1);
    let d1 = e1.derive(&data.f2);
    let d2 = e2.derive(&data.f1);
    let data = data.clone();
    ScalarField::new(move |p| {
        let a = d1.eval(p)?;
        let b = d2.eval(p)?;
        let f1 = data.f1.eval(p)?;
        let f2 = data.f2.eval(p)?;
        let f3 = data.f3.eval(p)?;
        let sigma = data.sigma.eval(p)?;
        Ok(a - b - f1 * f1 - f2 * f2 + (f3 * sigma).scale(2.0))
    })
}

/// `K^N` at a point.
pub fn base_gauss_curvature(
    data: &IntegrabilityData,
    frame: &FrameTriple,
    p: Point3,
) -> Result<f64> {
    Ok(base_curvature_field(data, frame).eval(p)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn flat_projection_spec() -> SubmersionSpec {
        SubmersionSpec::builder()
            .name("flat")
            .map(Expr::parse("x").unwrap(), Expr::parse("y").unwrap())
            .metric(MetricField::euclidean(3))
            .base_metric(
                ChartDomain::All,
                Expr::parse("1").unwrap(),
                Expr::parse("0").unwrap(),
                Expr::parse("1").unwrap(),
            )
            .build()
    }

    #[test]
    fn differential_of_projection() {
        let spec = flat_projection_spec();
        let d = spec.differential(Point3::new(0.3, -0.4, 2.0)).unwrap();
        assert_eq!(d, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
    }

    #[test]
    fn vertical_of_projection_points_up() {
        let spec = flat_projection_spec();
        let v = spec.vertical_direction(Point3::new(1.0, 1.0, 1.0)).unwrap();
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
        assert!((v[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_projection_is_riemannian() {
        let spec = flat_projection_spec();
        let (ok, dev) = spec
            .is_riemannian_submersion(Point3::new(0.1, 0.2, 0.3), 1e-9)
            .unwrap();
        assert!(ok);
        assert!(dev < 1e-14);
    }

    #[test]
    fn scaled_base_metric_breaks_isometry() {
        let spec = SubmersionSpec::builder()
            .name("scaled")
            .map(Expr::parse("x").unwrap(), Expr::parse("y").unwrap())
            .metric(MetricField::euclidean(3))
            .base_metric(
                ChartDomain::All,
                Expr::parse("4").unwrap(),
                Expr::parse("0").unwrap(),
                Expr::parse("4").unwrap(),
            )
            .build();
        let (ok, dev) = spec
            .is_riemannian_submersion(Point3::new(0.0, 0.0, 0.0), 1e-9)
            .unwrap();
        assert!(!ok);
        assert!((dev - 3.0).abs() < 1e-12);
    }

    #[test]
    fn flat_projection_data_and_tension_vanish() {
        let spec = flat_projection_spec();
        let frame = spec.build_frame();
        let data = integrability_data(&frame, spec.metric());
        let p = Point3::new(0.7, -0.1, 0.4);
        let v = data.eval(p).unwrap();
        for c in v.as_array() {
            assert!(c.abs() < 1e-14);
        }
        let (tv, norm) = spec.tension(&frame, p).unwrap();
        assert!(tv[0].abs() < 1e-14 && tv[1].abs() < 1e-14);
        assert!(norm < 1e-14);
        assert!(base_gauss_curvature(&data, &frame, p).unwrap().abs() < 1e-13);
    }

    #[test]
    fn gram_schmidt_base_frame_is_orthonormal() {
        // skewed base metric, no frame supplied
        let spec = SubmersionSpec::builder()
            .name("gs")
            .map(Expr::parse("x").unwrap(), Expr::parse("y").unwrap())
            .metric(MetricField::euclidean(3))
            .base_metric(
                ChartDomain::All,
                Expr::parse("4").unwrap(),
                Expr::parse("0.5").unwrap(),
                Expr::parse("2").unwrap(),
            )
            .build();
        let h = spec.base_metric_2d();
        let [n1, n2] = spec.base_frame_2d();
        let q = Point3::new(0.4, 1.2, 0.0);
        let g11 = geometry::inner(&h, &n1, &n1, q).unwrap().value();
        let g12 = geometry::inner(&h, &n1, &n2, q).unwrap().value();
        let g22 = geometry::inner(&h, &n2, &n2, q).unwrap().value();
        assert!((g11 - 1.0).abs() < 1e-12);
        assert!(g12.abs() < 1e-12);
        assert!((g22 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_map_is_rejected() {
        let spec = SubmersionSpec::builder()
            .name("degenerate")
            .map(Expr::parse("x").unwrap(), Expr::parse("x").unwrap())
            .metric(MetricField::euclidean(3))
            .base_metric(
                ChartDomain::All,
                Expr::parse("1").unwrap(),
                Expr::parse("0").unwrap(),
                Expr::parse("1").unwrap(),
            )
            .build();
        assert!(matches!(
            spec.vertical_direction(Point3::new(0.0, 0.0, 0.0)),
            Err(EngineError::RankDeficient)
        ));
    }
}
