//! Structural invariants of the geometry kernel: metric compatibility,
//! torsion-freeness, curvature symmetries, the first Bianchi identity, and
//! jet/finite-difference agreement for composed fields.

use proptest::prelude::*;

use biharm::bcv::{bcv_frame, bcv_metric, BcvParams};
use biharm::expr::Expr;
use biharm::geometry::{
    curvature, curvature_scalar, inner_field, levi_civita, lie_bracket, MetricField, Point3,
    VectorField,
};
use biharm::jet::Jet;

const PARAM_GRID: [f64; 5] = [-1.0, -0.25, 0.0, 0.25, 1.0];

/// A point inside the chart of every metric in the test set (disk of radius
/// 1 for the most restrictive parameters).
fn clamp_point(x: f64, y: f64, z: f64) -> Point3 {
    let r = (x * x + y * y).sqrt();
    let s = if r > 0.85 { 0.85 / r } else { 1.0 };
    Point3::new(x * s, y * s, z)
}

/// Low-degree polynomial vector fields with bounded coefficients.
fn poly_field(c: [f64; 9]) -> VectorField {
    let comp = |k: usize| {
        Expr::parse(&format!(
            "({}) + ({})*x + ({})*y*z",
            c[3 * k],
            c[3 * k + 1],
            c[3 * k + 2]
        ))
        .unwrap()
    };
    VectorField::from_exprs(vec![comp(0), comp(1), comp(2)])
}

fn value_inner(g: &MetricField, a: &[Jet; 3], b: &[Jet; 3], p: Point3) -> f64 {
    let gm = g.eval(p).unwrap();
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += gm[i][j].value() * a[i].value() * b[j].value();
        }
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn metric_compatibility(
        mi in 0usize..5, li in 0usize..5,
        x in -1.2f64..1.2, y in -1.2f64..1.2, z in -1.2f64..1.2,
        cx in proptest::array::uniform9(-0.8f64..0.8),
        cy in proptest::array::uniform9(-0.8f64..0.8),
        cz in proptest::array::uniform9(-0.8f64..0.8),
    ) {
        let g = bcv_metric(BcvParams::new(PARAM_GRID[mi], PARAM_GRID[li]));
        let p = clamp_point(x, y, z);
        let (xf, yf, zf) = (poly_field(cx), poly_field(cy), poly_field(cz));
        // X<Y,Z> = <∇_X Y, Z> + <Y, ∇_X Z>
        let lhs = xf.derive(&inner_field(&g, &yf, &zf)).eval(p).unwrap().value();
        let dy = levi_civita(&g, &xf, &yf, p).unwrap();
        let dz = levi_civita(&g, &xf, &zf, p).unwrap();
        let rhs = value_inner(&g, &dy, &zf.eval(p).unwrap(), p)
            + value_inner(&g, &yf.eval(p).unwrap(), &dz, p);
        prop_assert!((lhs - rhs).abs() < 1e-8, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn torsion_free(
        mi in 0usize..5, li in 0usize..5,
        x in -1.2f64..1.2, y in -1.2f64..1.2, z in -1.2f64..1.2,
        cx in proptest::array::uniform9(-0.8f64..0.8),
        cy in proptest::array::uniform9(-0.8f64..0.8),
    ) {
        let g = bcv_metric(BcvParams::new(PARAM_GRID[mi], PARAM_GRID[li]));
        let p = clamp_point(x, y, z);
        let (xf, yf) = (poly_field(cx), poly_field(cy));
        let a = levi_civita(&g, &xf, &yf, p).unwrap();
        let b = levi_civita(&g, &yf, &xf, p).unwrap();
        let br = lie_bracket(&xf, &yf).eval(p).unwrap();
        for k in 0..3 {
            let t = a[k].value() - b[k].value() - br[k].value();
            prop_assert!(t.abs() < 1e-8, "component {k}: {t}");
        }
    }

    #[test]
    fn jet_derivatives_match_finite_differences(
        x in -0.9f64..0.9, y in -0.9f64..0.9, z in -0.9f64..0.9,
        a in -0.7f64..0.7, b in -0.7f64..0.7,
    ) {
        // composed elementary field on [-1,1]^3
        let src = format!("exp(({a})*x + ({b})*sin(y)) * (1 + x*z^2) / (2 + cos(x*y))");
        let e = Expr::parse(&src).unwrap();
        let p = Point3::new(x, y, z);
        let jets = [
            Jet::coordinate(0, p.x, 3),
            Jet::coordinate(1, p.y, 3),
            Jet::coordinate(2, p.z, 3),
        ];
        let j = e.eval_jet(&[("x", jets[0]), ("y", jets[1]), ("z", jets[2])]).unwrap();
        let f = |q: [f64; 3]| e.eval_f64(&[("x", q[0]), ("y", q[1]), ("z", q[2])]).unwrap();
        for (i, jdx, k) in [(1u8, 0u8, 0u8), (0, 1, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1)] {
            let exact = j.extract(i, jdx, k).unwrap();
            let fd = fd_partial(&f, [p.x, p.y, p.z], (i, jdx, k));
            let scale = exact.abs().max(fd.abs());
            if scale > 1e-6 {
                prop_assert!((exact - fd).abs() / scale < 1e-4, "({i},{jdx},{k}): {exact} vs {fd}");
            }
        }
    }
}

/// Richardson-extrapolated nested central differences.
fn fd_partial(f: &dyn Fn([f64; 3]) -> f64, p: [f64; 3], mi: (u8, u8, u8)) -> f64 {
    fn central(f: &dyn Fn([f64; 3]) -> f64, p: [f64; 3], mi: (u8, u8, u8), h: f64) -> f64 {
        let (i, j, k) = mi;
        let (axis, rest) = if i > 0 {
            (0usize, (i - 1, j, k))
        } else if j > 0 {
            (1, (i, j - 1, k))
        } else if k > 0 {
            (2, (i, j, k - 1))
        } else {
            return f(p);
        };
        let mut a = p;
        a[axis] += h;
        let mut b = p;
        b[axis] -= h;
        (central(f, a, rest, h) - central(f, b, rest, h)) / (2.0 * h)
    }
    let order = (mi.0 + mi.1 + mi.2) as usize;
    let h = [1e-4, 1e-4, 4e-3, 2e-2][order];
    let d1 = central(f, p, mi, h);
    let d2 = central(f, p, mi, h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

#[test]
fn curvature_symmetries_and_bianchi() {
    let points = [
        Point3::new(0.3, 0.4, -0.7),
        Point3::new(-0.5, 0.2, 1.1),
        Point3::new(0.05, -0.6, 0.0),
    ];
    for &m in &PARAM_GRID {
        for &l in &PARAM_GRID {
            let params = BcvParams::new(m, l);
            let g = bcv_metric(params);
            let frame = bcv_frame(params);
            let e: Vec<VectorField> = (0..3).map(|i| frame.vector(i)).collect();
            for &p in &points {
                // R_ijkl = -R_jikl = -R_ijlk = R_klij
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            for w in 0..3 {
                                let r = curvature_scalar(&g, &e[i], &e[j], &e[k], &e[w], p).unwrap();
                                let r_ji = curvature_scalar(&g, &e[j], &e[i], &e[k], &e[w], p).unwrap();
                                let r_lk = curvature_scalar(&g, &e[i], &e[j], &e[w], &e[k], p).unwrap();
                                let r_kl = curvature_scalar(&g, &e[k], &e[w], &e[i], &e[j], p).unwrap();
                                assert!((r + r_ji).abs() < 1e-8, "antisym first pair");
                                assert!((r + r_lk).abs() < 1e-8, "antisym second pair");
                                assert!((r - r_kl).abs() < 1e-8, "pair symmetry");
                            }
                        }
                    }
                }
                // first Bianchi: R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0
                let a = curvature(&g, &e[0], &e[1], &e[2], p).unwrap();
                let b = curvature(&g, &e[1], &e[2], &e[0], p).unwrap();
                let c = curvature(&g, &e[2], &e[0], &e[1], p).unwrap();
                for k in 0..3 {
                    let s = a[k].value() + b[k].value() + c[k].value();
                    assert!(s.abs() < 1e-8, "bianchi component {k}: {s}");
                }
            }
        }
    }
}

#[test]
fn inner_product_is_symmetric() {
    let g = bcv_metric(BcvParams::new(0.25, 1.0));
    let x = poly_field([0.3, -0.2, 0.5, 0.0, 0.7, -0.1, 0.9, 0.2, -0.4]);
    let y = poly_field([-0.6, 0.1, 0.0, 0.8, -0.3, 0.2, 0.1, -0.5, 0.7]);
    let p = Point3::new(0.4, -0.3, 0.8);
    let a = inner_field(&g, &x, &y).eval(p).unwrap();
    let b = inner_field(&g, &y, &x).eval(p).unwrap();
    assert!((a.value() - b.value()).abs() < 1e-14);
}
