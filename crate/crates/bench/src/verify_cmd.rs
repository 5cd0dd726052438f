use nalgebra::DVector;
use serde_json::{json, Value};

use riemopt::manifolds::{make_manifold, Sphere};
use riemopt::verify::{
    correction_blowup_trace, geodesic_rectangle, holonomy_probe, isometry_suite, roundtrip_suite,
    triangle_comparison_suite,
};
use riemopt::Manifold;

use crate::config::VerifyConfig;
use crate::BenchError;

/// Largest violation tolerated before `verify` reports a numeric failure.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

pub fn run_verify(c: &VerifyConfig) -> Result<Value, BenchError> {
    let mut reports = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, target) in c.manifolds.iter().enumerate() {
        let m = make_manifold(&target.manifold)?;
        let seed = c.seed.wrapping_add(i as u64);
        let tri = triangle_comparison_suite(m.as_ref(), c.samples, target.max_diam, seed)?;
        let rt = roundtrip_suite(m.as_ref(), c.samples, target.max_diam, seed)?;
        let iso = isometry_suite(m.as_ref(), c.samples, target.max_diam, seed)?;
        worst = worst
            .max(tri.max_violation)
            .max(rt.max_violation)
            .max(iso.max_violation);
        reports.push(json!({
            "manifold": m.name(),
            "max_diam": target.max_diam,
            "triangles": tri,
            "roundtrip": rt,
            "isometry": iso,
        }));
    }

    let sphere = Sphere::new(2);
    let c0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let e1 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
    let e2 = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let eps = 0.01;
    let rect = geodesic_rectangle(&sphere, &c0, &e1, &e2, eps, eps)?;
    let (defect, bound) = holonomy_probe(&sphere, &rect, &e1)?;

    let blowup = match correction_blowup_trace(0.1, 1.0, 50) {
        Ok(trace) => json!({ "diverged_at": null, "trace": trace }),
        Err(d) => json!({ "diverged_at": d.round, "trace": d.trace }),
    };

    Ok(json!({
        "experiment": "verify",
        "seed": c.seed,
        "samples": c.samples,
        "tolerance": VERIFY_TOLERANCE,
        "max_violation": worst,
        "passed": worst <= VERIFY_TOLERANCE && defect <= bound,
        "manifolds": reports,
        "holonomy": {
            "manifold": sphere.name(),
            "epsilon": eps,
            "defect": defect,
            "bound": bound,
            "defect_over_area": defect / (eps * eps),
        },
        "blowup": blowup,
    }))
}
