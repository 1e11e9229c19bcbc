//! The biharmonicity criterion and the verdict machinery.
//!
//! For an adapted frame with data `{f1, f2, k1, k2, sigma}` the submersion is
//! biharmonic exactly when both residuals vanish:
//!
//! ```text
//! r1 = -Δ k1 - 2 Σ_i f_i e_i(k2) - k2 Σ_i (e_i(f_i) - k_i f_i) + k1 (-K^N + Σ_i f_i^2)
//! r2 = -Δ k2 + 2 Σ_i f_i e_i(k1) + k1 Σ_i (e_i(f_i) - k_i f_i) + k2 (-K^N + Σ_i f_i^2)
//! ```
//!
//! with sums over `i = 1, 2`. Harmonic maps (vanishing tension) are always
//! biharmonic; the verdict taxonomy keeps them distinct so "proper" means
//! biharmonic and not harmonic.
//!
//! Alongside the criterion, this module evaluates the structural identities
//! every frame of the expected bracket shape must satisfy — three Jacobi
//! lines and seven curvature lines — as residuals against the directly
//! computed curvature tensor. They are the engine's self-checks: all of them
//! vanish on sound geometry regardless of the verdict.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::geometry::{laplacian_frame, FrameTriple, MetricField, Point3};
use crate::sample::{sample_points, SamplePlan};
use crate::submersion::{
    base_curvature_field, integrability_data, IntegrabilityData, SubmersionSpec, ADAPTED_TOL,
};

/// Sample-based conclusion about one submersion; a certificate over the
/// sampled points, explicitly weaker than a symbolic proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Harmonic,
    ProperBiharmonicCandidate,
    NotBiharmonic,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Harmonic => "harmonic",
            Verdict::ProperBiharmonicCandidate => "proper_biharmonic_candidate",
            Verdict::NotBiharmonic => "not_biharmonic",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Decision thresholds. `tol_h` bounds the tension norm for "harmonic",
/// `tol_b` bounds the criterion residuals for "biharmonic", and residuals
/// beyond `not_factor * tol_b` count as genuinely nonvanishing — one decade
/// of separation between numerical noise and a real obstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol_h: f64,
    pub tol_b: f64,
    pub not_factor: f64,
    /// horizontal-isometry validation threshold
    pub tol_submersion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_h: 1e-7,
            tol_b: 1e-6,
            not_factor: 10.0,
            tol_submersion: 1e-9,
        }
    }
}

/// The two residuals of the biharmonicity criterion at `p`. Requires an
/// adapted frame (`|f3| <= ADAPTED_TOL` at `p`).
pub fn biharmonic_residual(
    spec: &SubmersionSpec,
    frame: &FrameTriple,
    data: &IntegrabilityData,
    p: Point3,
) -> Result<(f64, f64)> {
    let g = spec.metric();
    let f3 = data.f3.eval(p)?.value();
    if f3.abs() > ADAPTED_TOL {
        return Err(EngineError::NotAdapted(f3.abs()));
    }
    let e1 = frame.vector(0);
    let e2 = frame.vector(1);
    let d1 = |f: &crate::geometry::ScalarField| -> Result<f64> {
        Ok(e1.derive(f).eval(p)?.value())
    };
    let d2 = |f: &crate::geometry::ScalarField| -> Result<f64> {
        Ok(e2.derive(f).eval(p)?.value())
    };

    let f1 = data.f1.eval(p)?.value();
    let f2 = data.f2.eval(p)?.value();
    let k1 = data.kappa1.eval(p)?.value();
    let k2 = data.kappa2.eval(p)?.value();

    let lap_k1 = laplacian_frame(g, frame, &data.kappa1, p)?;
    let lap_k2 = laplacian_frame(g, frame, &data.kappa2, p)?;
    let k_n = base_curvature_field(data, frame).eval(p)?.value();

    let div_term = d1(&data.f1)? + d2(&data.f2)? - k1 * f1 - k2 * f2;
    let f_sq = f1 * f1 + f2 * f2;
    let r1 = -lap_k1 - 2.0 * (f1 * d1(&data.kappa2)? + f2 * d2(&data.kappa2)?)
        - k2 * div_term
        + k1 * (-k_n + f_sq);
    let r2 = -lap_k2 + 2.0 * (f1 * d1(&data.kappa1)? + f2 * d2(&data.kappa1)?)
        + k1 * div_term
        + k2 * (-k_n + f_sq);
    Ok((r1, r2))
}

/// Residuals of the three Jacobi-identity lines for a frame of the expected
/// bracket structure; identically zero on sound data.
pub fn jacobi_residuals(
    frame: &FrameTriple,
    data: &IntegrabilityData,
    _g: &MetricField,
    p: Point3,
) -> Result<[f64; 3]> {
    let e1 = frame.vector(0);
    let e2 = frame.vector(1);
    let e3 = frame.vector(2);
    let v = data.eval(p)?;
    let d = |x: &crate::geometry::VectorField, f: &crate::geometry::ScalarField| -> Result<f64> {
        Ok(x.derive(f).eval(p)?.value())
    };
    let j1 = d(&e3, &data.f1)? + (v.kappa1 + v.f2) * v.f3 - d(&e1, &data.f3)?;
    let j2 = d(&e3, &data.f2)? + (v.kappa2 - v.f1) * v.f3 - d(&e2, &data.f3)?;
    let j3 = 2.0 * d(&e3, &data.sigma)? + v.kappa1 * v.f1 + v.kappa2 * v.f2
        + d(&e2, &data.kappa1)?
        - d(&e1, &data.kappa2)?;
    Ok([j1, j2, j3])
}

/// Residuals of the seven curvature lines: bracket-data expression minus the
/// directly computed `R^M(e_a, e_b, e_c, e_d) = g(R(e_c,e_d) e_b, e_a)`.
pub fn rc_residuals(
    frame: &FrameTriple,
    data: &IntegrabilityData,
    g: &MetricField,
    p: Point3,
) -> Result<[f64; 7]> {
    let e1 = frame.vector(0);
    let e2 = frame.vector(1);
    let e3 = frame.vector(2);
    let v = data.eval(p)?;
    let d = |x: &crate::geometry::VectorField, f: &crate::geometry::ScalarField| -> Result<f64> {
        Ok(x.derive(f).eval(p)?.value())
    };
    let e1_sigma = d(&e1, &data.sigma)?;
    let e2_sigma = d(&e2, &data.sigma)?;
    let e3_sigma = d(&e3, &data.sigma)?;
    let e1_k1 = d(&e1, &data.kappa1)?;
    let e2_k1 = d(&e2, &data.kappa1)?;
    let e1_k2 = d(&e1, &data.kappa2)?;
    let e2_k2 = d(&e2, &data.kappa2)?;
    let e1_f2 = d(&e1, &data.f2)?;
    let e2_f1 = d(&e2, &data.f1)?;

    let lhs = [
        -e1_sigma + 2.0 * v.kappa1 * v.sigma,
        e1_k1 + v.sigma * v.sigma - v.kappa1 * v.kappa1 + v.kappa2 * v.f1,
        e1_k2 - e3_sigma - v.kappa1 * v.f1 - v.kappa1 * v.kappa2,
        e1_f2 - e2_f1 - v.f1 * v.f1 - v.f2 * v.f2 + 2.0 * v.f3 * v.sigma
            - 3.0 * v.sigma * v.sigma,
        -e2_sigma + 2.0 * v.kappa2 * v.sigma,
        e2_k1 + e3_sigma + v.kappa2 * v.f2 - v.kappa1 * v.kappa2,
        v.sigma * v.sigma + e2_k2 - v.kappa1 * v.f2 - v.kappa2 * v.kappa2,
    ];
    // R^M(e_a, e_b, e_c, e_d) = g(R(e_c, e_d) e_b, e_a); the seven lines share
    // five distinct curvature vectors R(e_c, e_d) e_b
    let legs = [e1, e2, e3];
    let gm = g.eval(p)?;
    let ev = [legs[0].eval(p)?, legs[1].eval(p)?, legs[2].eval(p)?];
    let mut rvec = std::collections::HashMap::new();
    for key in [(0usize, 1usize, 2usize), (0, 1, 1), (1, 2, 1), (0, 2, 2), (1, 2, 2)] {
        let (c, dd, b) = key;
        rvec.insert(key, crate::geometry::curvature(g, &legs[c], &legs[dd], &legs[b], p)?);
    }
    let scalar = |a: usize, b: usize, c: usize, dd: usize| -> f64 {
        let r = &rvec[&(c, dd, b)];
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += gm[i][j].value() * r[i].value() * ev[a][j].value();
            }
        }
        acc
    };
    // (a, b, c, d) of R^M(e_a, e_b, e_c, e_d), 0-based
    let idx: [(usize, usize, usize, usize); 7] = [
        (0, 2, 0, 1),
        (0, 2, 0, 2),
        (0, 2, 1, 2),
        (0, 1, 0, 1),
        (0, 1, 1, 2),
        (1, 2, 0, 2),
        (1, 2, 1, 2),
    ];
    let mut out = [0.0f64; 7];
    for (n, &(a, b, c, dd)) in idx.iter().enumerate() {
        out[n] = lhs[n] - scalar(a, b, c, dd);
    }
    Ok(out)
}

/// Everything measured at one sample point.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub p: [f64; 3],
    pub r1: f64,
    pub r2: f64,
    pub tension: f64,
    pub k_n: f64,
    pub jac: [f64; 3],
    pub rc: [f64; 7],
    pub fiber: f64,
    pub f3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub max_residual: f64,
    pub median_residual: f64,
    pub max_tension: f64,
    pub median_tension: f64,
    pub max_jacobi: f64,
    pub max_rc: f64,
    pub max_fiber: f64,
    pub max_f3: f64,
    pub max_structure: f64,
    pub submersion_deviation: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct BiharmonicReport {
    pub points: Vec<PointRecord>,
    pub aggregate: Aggregate,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Evaluate one sample point; shared by the sequential and parallel paths.
fn point_record(
    spec: &SubmersionSpec,
    frame: &FrameTriple,
    data: &IntegrabilityData,
    k_n_field: &crate::geometry::ScalarField,
    p: Point3,
) -> Result<PointRecord> {
    let (r1, r2) = biharmonic_residual(spec, frame, data, p)?;
    let (_, tension) = spec.tension(frame, p)?;
    let k_n = k_n_field.eval(p)?.value();
    let jac = jacobi_residuals(frame, data, spec.metric(), p)?;
    let rc = rc_residuals(frame, data, spec.metric(), p)?;
    let fiber = frame.vector(2).derive(k_n_field).eval(p)?.value();
    let f3 = data.f3.eval(p)?.value();
    Ok(PointRecord {
        p: [p.x, p.y, p.z],
        r1,
        r2,
        tension,
        k_n,
        jac,
        rc,
        fiber,
        f3,
    })
}

/// Run the full pointwise analysis over a sample plan and fold it into a
/// verdict. Point evaluations are independent and run in parallel; the fold
/// is ordered by sample index, so reports are deterministic for a fixed
/// seed.
pub fn classify_map(
    spec: &SubmersionSpec,
    plan: SamplePlan,
    tols: Tolerances,
) -> Result<BiharmonicReport> {
    let points = sample_points(spec.domain(), plan);
    // standing hypothesis first: dπ is a horizontal isometry everywhere sampled
    let mut worst_dev = 0.0f64;
    for &p in &points {
        let (_, dev) = spec.is_riemannian_submersion(p, tols.tol_submersion)?;
        worst_dev = worst_dev.max(dev);
    }
    if worst_dev > tols.tol_submersion {
        return Err(EngineError::InvalidSubmersion(worst_dev));
    }

    let frame = spec.build_frame();
    let data = integrability_data(&frame, spec.metric());
    let k_n_field = base_curvature_field(&data, &frame);

    let records: Vec<PointRecord> = points
        .par_iter()
        .map(|&p| point_record(spec, &frame, &data, &k_n_field, p))
        .collect::<Result<Vec<_>>>()?;

    let mut max_structure = 0.0f64;
    for &p in &points {
        max_structure = max_structure.max(data.structure_residual(p)?);
    }

    let res_mag: Vec<f64> = records.iter().map(|r| r.r1.abs().max(r.r2.abs())).collect();
    let tensions: Vec<f64> = records.iter().map(|r| r.tension).collect();
    let max_residual = res_mag.iter().copied().fold(0.0, f64::max);
    let max_tension = tensions.iter().copied().fold(0.0, f64::max);
    let fold_abs = |sel: fn(&PointRecord) -> f64| -> f64 {
        records.iter().map(sel).fold(0.0, |a, b| a.max(b.abs()))
    };
    let max_jacobi = records
        .iter()
        .flat_map(|r| r.jac.iter())
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let max_rc = records
        .iter()
        .flat_map(|r| r.rc.iter())
        .fold(0.0f64, |a, b| a.max(b.abs()));

    let verdict = if max_tension < tols.tol_h {
        Verdict::Harmonic
    } else if max_residual < tols.tol_b {
        Verdict::ProperBiharmonicCandidate
    } else if max_residual >= tols.not_factor * tols.tol_b {
        Verdict::NotBiharmonic
    } else {
        Verdict::Inconclusive
    };

    let aggregate = Aggregate {
        max_residual,
        median_residual: median(res_mag),
        max_tension,
        median_tension: median(tensions),
        max_jacobi,
        max_rc,
        max_fiber: fold_abs(|r| r.fiber),
        max_f3: fold_abs(|r| r.f3),
        max_structure,
        submersion_deviation: worst_dev,
        verdict,
    };
    Ok(BiharmonicReport {
        points: records,
        aggregate,
    })
}
