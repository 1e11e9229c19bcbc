use std::time::Instant;
use biharm::bcv::{bcv_oracle_deviation, BcvParams};
use biharm::biharmonic::{rc_residuals, jacobi_residuals, biharmonic_residual};
use biharm::catalog::nil_example;
use biharm::sample::{sample_points, SamplePlan};
use biharm::submersion::integrability_data;

fn main() {
    let params = BcvParams::new(-0.25, 1.0);
    let pts = sample_points(params.domain(), SamplePlan { count: 100, seed: 1 });
    let t = Instant::now();
    let (c, k) = bcv_oracle_deviation(params, &pts).unwrap();
    println!("bcv_oracle_deviation 100 pts: {:?} (conn {c:e}, curv {k:e})", t.elapsed());

    let entry = nil_example();
    let frame = entry.spec.build_frame();
    let data = integrability_data(&frame, entry.spec.metric());
    let pts = sample_points(entry.spec.domain(), SamplePlan { count: 10, seed: 2 });
    let t = Instant::now();
    for &p in &pts {
        let _ = rc_residuals(&frame, &data, entry.spec.metric(), p).unwrap();
    }
    println!("rc_residuals x10 (nil): {:?}", t.elapsed());
    let t = Instant::now();
    for &p in &pts {
        let _ = jacobi_residuals(&frame, &data, entry.spec.metric(), p).unwrap();
    }
    println!("jacobi x10: {:?}", t.elapsed());
    let t = Instant::now();
    for &p in &pts {
        let _ = biharmonic_residual(&entry.spec, &frame, &data, p).unwrap();
    }
    println!("biharmonic_residual x10: {:?}", t.elapsed());
}
