//! The two-parameter homogeneous family `M_{m,l}` on (a domain of) R^3:
//!
//! ```text
//! g = (dx^2 + dy^2) / F^2 + (dz + (l/2)(y dx - x dy) / F)^2,
//! F = 1 + m (x^2 + y^2)
//! ```
//!
//! covering the model spaces R^3, S^3, S^2xR, H^2xR, SL2R~, Nil and SU(2).
//! Besides the metric and its canonical orthonormal frame, this module holds
//! the closed-form connection and curvature tables used as oracles against
//! the generic kernel, and the total classification of `(m, l)` into model
//! spaces.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{
    ChartDomain, FrameKind, FrameTriple, MetricField, Point3, VectorField, ORDER,
};
use crate::jet::Jet;

/// Parameters of the family: `m` scales the base curvature, `l` the bundle
/// twist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcvParams {
    pub m: f64,
    pub l: f64,
}

impl BcvParams {
    pub fn new(m: f64, l: f64) -> Self {
        BcvParams { m, l }
    }

    /// The scalar `R = 4m - l^2`; zero exactly for the space forms.
    pub fn r_scalar(&self) -> f64 {
        4.0 * self.m - self.l * self.l
    }

    /// Chart domain: all of R^3 for `m >= 0`, the disk `x^2+y^2 < -1/m`
    /// otherwise (where `F > 0`).
    pub fn domain(&self) -> ChartDomain {
        if self.m >= 0.0 {
            ChartDomain::All
        } else {
            ChartDomain::Disk { r2: -1.0 / self.m }
        }
    }

    /// `F = 1 + m (x^2 + y^2)` at a point, as a jet.
    pub fn conformal_factor(&self, p: Point3) -> Jet {
        let [x, y, _] = p.jets();
        Jet::constant(1.0, ORDER) + (x * x + y * y).scale(self.m)
    }
}

/// The metric tensor of `M_{m,l}`, expanded into symmetric components.
pub fn bcv_metric(params: BcvParams) -> MetricField {
    let domain = params.domain();
    MetricField::new(3, domain, move |p| {
        let [x, y, _] = p.jets();
        let f = params.conformal_factor(p);
        let inv_f2 = (f * f).recip()?;
        let l = params.l;
        let zero = Jet::constant(0.0, ORDER);
        let mut g = [[zero; 3]; 3];
        // (dx^2+dy^2)/F^2 + omega^2 with omega = dz + (l/(2F))(y dx - x dy)
        let wx = y.scale(0.5 * l) * f.recip()?;
        let wy = x.scale(-0.5 * l) * f.recip()?;
        g[0][0] = inv_f2 + wx * wx;
        g[1][1] = inv_f2 + wy * wy;
        g[2][2] = Jet::constant(1.0, ORDER);
        g[0][1] = wx * wy;
        g[1][0] = g[0][1];
        g[0][2] = wx;
        g[2][0] = wx;
        g[1][2] = wy;
        g[2][1] = wy;
        Ok(g)
    })
}

/// The canonical orthonormal frame
/// `E1 = F ∂x - (l y / 2) ∂z, E2 = F ∂y + (l x / 2) ∂z, E3 = ∂z`.
pub fn bcv_frame(params: BcvParams) -> FrameTriple {
    FrameTriple::new(FrameKind::Natural, move |p| {
        let [x, y, _] = p.jets();
        let f = params.conformal_factor(p);
        let zero = Jet::constant(0.0, ORDER);
        let one = Jet::constant(1.0, ORDER);
        Ok([
            [f, zero, y.scale(-0.5 * params.l)],
            [zero, f, x.scale(0.5 * params.l)],
            [zero, zero, one],
        ])
    })
}

/// Closed-form `∇_{E_i} E_j` (1-based indices) as a coordinate-basis vector
/// field: the connection table of the family.
pub fn bcv_connection_oracle(params: BcvParams, i: usize, j: usize) -> VectorField {
    assert!((1..=3).contains(&i) && (1..=3).contains(&j));
    let frame = bcv_frame(params);
    VectorField::new(3, move |p| {
        let e = frame.eval(p)?;
        let [x, y, _] = p.jets();
        let zero = Jet::constant(0.0, ORDER);
        let half_l = 0.5 * params.l;
        // coefficients on (E1, E2, E3)
        let coeff: [Jet; 3] = match (i, j) {
            (1, 1) => [zero, y.scale(2.0 * params.m), zero],
            (2, 2) => [x.scale(2.0 * params.m), zero, zero],
            (1, 2) => [y.scale(-2.0 * params.m), zero, Jet::constant(half_l, ORDER)],
            (2, 1) => [zero, x.scale(-2.0 * params.m), Jet::constant(-half_l, ORDER)],
            (3, 1) | (1, 3) => [zero, Jet::constant(-half_l, ORDER), zero],
            (3, 2) | (2, 3) => [Jet::constant(half_l, ORDER), zero, zero],
            _ => [zero, zero, zero],
        };
        let mut out = [zero; 3];
        for k in 0..3 {
            out[k] = coeff[0] * e[0][k] + coeff[1] * e[1][k] + coeff[2] * e[2][k];
        }
        Ok(out)
    })
}

/// Closed-form curvature component `R_ijkl = g(R(E_k, E_l) E_j, E_i)`
/// (1-based). Nonzero exactly when `{i,j} = {k,l}` as unordered pairs:
/// `R_1212 = 4m - 3l^2/4`, `R_1313 = R_2323 = l^2/4`, with the signs implied
/// by the antisymmetries.
pub fn bcv_curvature_oracle(params: BcvParams, idx: (usize, usize, usize, usize)) -> f64 {
    let (i, j, k, l) = idx;
    assert!([i, j, k, l].iter().all(|&a| (1..=3).contains(&a)));
    if i == j || k == l {
        return 0.0;
    }
    let pair = |a: usize, b: usize| (a.min(b), a.max(b));
    if pair(i, j) != pair(k, l) {
        return 0.0;
    }
    let base = match pair(i, j) {
        (1, 2) => 4.0 * params.m - 0.75 * params.l * params.l,
        _ => 0.25 * params.l * params.l,
    };
    let sign = if (i < j) == (k < l) { 1.0 } else { -1.0 };
    sign * base
}

/// The model spaces covered by the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelName {
    #[serde(rename = "euclidean3")]
    Euclidean3,
    #[serde(rename = "sphere3")]
    Sphere3,
    #[serde(rename = "s2xr")]
    S2xR,
    #[serde(rename = "h2xr")]
    H2xR,
    #[serde(rename = "sl2r")]
    Sl2R,
    #[serde(rename = "nil")]
    Nil,
    #[serde(rename = "su2")]
    Su2,
}

impl std::fmt::Display for ModelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelName::Euclidean3 => "Euclidean3",
            ModelName::Sphere3 => "Sphere3",
            ModelName::S2xR => "S2xR",
            ModelName::H2xR => "H2xR",
            ModelName::Sl2R => "SL2R~",
            ModelName::Nil => "Nil",
            ModelName::Su2 => "SU2",
        };
        f.write_str(s)
    }
}

/// Total classification of `(m, l)`, with exact-equality tolerance `1e-12`.
pub fn classify_bcv(params: BcvParams) -> ModelName {
    const TOL: f64 = 1e-12;
    let m_zero = params.m.abs() <= TOL;
    let l_zero = params.l.abs() <= TOL;
    let r_zero = params.r_scalar().abs() <= TOL;
    if m_zero && l_zero {
        ModelName::Euclidean3
    } else if l_zero {
        if params.m > 0.0 {
            ModelName::S2xR
        } else {
            ModelName::H2xR
        }
    } else if m_zero {
        ModelName::Nil
    } else if r_zero {
        ModelName::Sphere3
    } else if params.m < 0.0 {
        ModelName::Sl2R
    } else {
        ModelName::Su2
    }
}

/// Max absolute deviation of the generic `levi_civita` from the closed-form
/// connection table, in coordinate components, over all nine frame pairs and
/// all `points`.
pub fn bcv_connection_deviation(params: BcvParams, points: &[Point3]) -> Result<f64> {
    let g = bcv_metric(params);
    let frame = bcv_frame(params);
    let e: Vec<VectorField> = (0..3).map(|i| frame.vector(i)).collect();
    let mut worst = 0.0f64;
    for &p in points {
        for i in 1..=3 {
            for j in 1..=3 {
                let got = crate::geometry::levi_civita(&g, &e[i - 1], &e[j - 1], p)?;
                let want = bcv_connection_oracle(params, i, j).eval(p)?;
                for k in 0..3 {
                    worst = worst.max((got[k].value() - want[k].value()).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Max absolute deviation of the generic `curvature_scalar` from the
/// closed-form curvature table over all index combinations (up to the
/// antisymmetries) and all `points`.
pub fn bcv_curvature_deviation(params: BcvParams, points: &[Point3]) -> Result<f64> {
    let g = bcv_metric(params);
    let frame = bcv_frame(params);
    let e: Vec<VectorField> = (0..3).map(|i| frame.vector(i)).collect();
    let mut worst = 0.0f64;
    for &p in points {
        for (k, l) in [(1, 2), (1, 3), (2, 3)] {
            // share R(E_k, E_l) E_j across the i loop
            let gm = g.eval(p)?;
            for j in 1..=3 {
                let r = crate::geometry::curvature(&g, &e[k - 1], &e[l - 1], &e[j - 1], p)?;
                for i in 1..=3 {
                    let ev = e[i - 1].eval(p)?;
                    let mut got = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            got += gm[a][b].value() * r[a].value() * ev[b].value();
                        }
                    }
                    let want = bcv_curvature_oracle(params, (i, j, k, l));
                    worst = worst.max((got - want).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Connection and curvature deviations together (identity-suite entry
/// point).
pub fn bcv_oracle_deviation(params: BcvParams, points: &[Point3]) -> Result<(f64, f64)> {
    Ok((
        bcv_connection_deviation(params, points)?,
        bcv_curvature_deviation(params, points)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{curvature_scalar, levi_civita, lie_bracket};
    use crate::sample::{sample_points, SamplePlan};

    #[test]
    fn euclidean_parameters_give_identity_metric() {
        let g = bcv_metric(BcvParams::new(0.0, 0.0));
        let m = g.eval(Point3::new(0.7, -0.2, 1.0)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m[i][j].value() - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn nil_metric_components() {
        let g = bcv_metric(BcvParams::new(0.0, 1.0));
        let p = Point3::new(0.8, -0.6, 0.3);
        let m = g.eval(p).unwrap();
        assert!((m[0][0].value() - (1.0 + p.y * p.y / 4.0)).abs() < 1e-15);
        assert!((m[0][1].value() - (-p.x * p.y / 4.0)).abs() < 1e-15);
        assert!((m[0][2].value() - p.y / 2.0).abs() < 1e-15);
    }

    #[test]
    fn metric_is_spd_on_domain() {
        let params = BcvParams::new(-1.0, 1.0);
        let g = bcv_metric(params);
        for p in sample_points(params.domain(), SamplePlan { count: 100, seed: 3 }) {
            g.check_spd(p, 1e-12).unwrap();
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        let params = BcvParams::new(0.25, 1.0);
        let g = bcv_metric(params);
        let frame = bcv_frame(params);
        for p in sample_points(params.domain(), SamplePlan { count: 20, seed: 5 }) {
            assert!(frame.gram_deviation(&g, p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn frame_scaling_at_known_point() {
        // m = -1/4: F(0.5, 0.5) = 1 - 0.125 = 0.875, so E1 = 0.875 ∂x
        let frame = bcv_frame(BcvParams::new(-0.25, 0.0));
        let e = frame.eval(Point3::new(0.5, 0.5, 0.0)).unwrap();
        assert!((e[0][0].value() - 0.875).abs() < 1e-15);
        assert_eq!(e[0][1].value(), 0.0);
        assert_eq!(e[0][2].value(), 0.0);
    }

    #[test]
    fn bracket_of_frame_legs() {
        let params = BcvParams::new(0.5, -0.7);
        let frame = bcv_frame(params);
        let p = Point3::new(0.4, -0.9, 0.6);
        // [E1, E2] = -2my E1 + 2mx E2 + l E3
        let br = lie_bracket(&frame.vector(0), &frame.vector(1)).eval(p).unwrap();
        let e = frame.eval(p).unwrap();
        for k in 0..3 {
            let want = -2.0 * params.m * p.y * e[0][k].value()
                + 2.0 * params.m * p.x * e[1][k].value()
                + params.l * e[2][k].value();
            assert!((br[k].value() - want).abs() < 1e-12, "component {k}");
        }
        // all other brackets vanish
        for (a, b) in [(0usize, 2usize), (1, 2)] {
            let br = lie_bracket(&frame.vector(a), &frame.vector(b)).eval(p).unwrap();
            for k in 0..3 {
                assert!(br[k].value().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn connection_matches_table_at_a_point() {
        let params = BcvParams::new(0.25, 1.0);
        let g = bcv_metric(params);
        let frame = bcv_frame(params);
        let p = Point3::new(0.3, 0.7, -0.4);
        for i in 1..=3 {
            for j in 1..=3 {
                let got = levi_civita(&g, &frame.vector(i - 1), &frame.vector(j - 1), p).unwrap();
                let want = bcv_connection_oracle(params, i, j).eval(p).unwrap();
                for k in 0..3 {
                    assert!(
                        (got[k].value() - want[k].value()).abs() < 1e-10,
                        "nabla_E{i} E{j} component {k}: {} vs {}",
                        got[k].value(),
                        want[k].value()
                    );
                }
            }
        }
    }

    #[test]
    fn curvature_components_at_known_parameters() {
        // (m=1, l=2): R_1212 = 4 - 3 = 1; (m=-1/4, l=0): R_1212 = -1, others 0
        let p = Point3::new(0.2, -0.3, 0.9);
        let cases = [
            (BcvParams::new(1.0, 2.0), 1.0, 1.0),
            (BcvParams::new(-0.25, 0.0), -1.0, 0.0),
        ];
        for (params, want_1212, want_1313) in cases {
            let g = bcv_metric(params);
            let f = bcv_frame(params);
            let r1212 =
                curvature_scalar(&g, &f.vector(0), &f.vector(1), &f.vector(0), &f.vector(1), p)
                    .unwrap();
            let r1313 =
                curvature_scalar(&g, &f.vector(0), &f.vector(2), &f.vector(0), &f.vector(2), p)
                    .unwrap();
            let r2323 =
                curvature_scalar(&g, &f.vector(1), &f.vector(2), &f.vector(1), &f.vector(2), p)
                    .unwrap();
            assert!((r1212 - want_1212).abs() < 1e-9, "R1212 {r1212}");
            assert!((r1313 - want_1313).abs() < 1e-9);
            assert!((r2323 - want_1313).abs() < 1e-9);
        }
    }

    #[test]
    fn curvature_oracle_symmetries() {
        let params = BcvParams::new(0.7, 0.3);
        assert_eq!(bcv_curvature_oracle(params, (1, 3, 2, 3)), 0.0);
        let v = bcv_curvature_oracle(params, (1, 2, 1, 2));
        assert_eq!(bcv_curvature_oracle(params, (2, 1, 1, 2)), -v);
        assert_eq!(bcv_curvature_oracle(params, (2, 1, 2, 1)), v);
        assert_eq!(bcv_curvature_oracle(params, (1, 2, 2, 1)), -v);
        assert_eq!(
            bcv_curvature_oracle(BcvParams::new(0.0, 1.0), (1, 2, 1, 2)),
            -0.75
        );
    }

    #[test]
    fn classification_is_total_and_matches_cases() {
        assert_eq!(classify_bcv(BcvParams::new(0.0, 0.0)), ModelName::Euclidean3);
        assert_eq!(classify_bcv(BcvParams::new(1.0, 2.0)), ModelName::Sphere3);
        assert_eq!(classify_bcv(BcvParams::new(0.25, 0.0)), ModelName::S2xR);
        assert_eq!(classify_bcv(BcvParams::new(-0.25, 0.0)), ModelName::H2xR);
        assert_eq!(classify_bcv(BcvParams::new(0.0, 1.0)), ModelName::Nil);
        assert_eq!(classify_bcv(BcvParams::new(-1.0, 1.0)), ModelName::Sl2R);
        assert_eq!(classify_bcv(BcvParams::new(1.0, 1.0)), ModelName::Su2);
    }
}
