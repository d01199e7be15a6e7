//! Randomized invariant suite behind `mirrorsweep selfcheck`.

use mirrorsweep_core::eval::depth_metrics;
use mirrorsweep_core::geometry::{
    correspondence_from_plane, correspondence_general, mirror_matrix, plane_in_camera, warp_pixel, CameraIntrinsics,
    CameraPose, PixelDepth, SymmetryPlane, SymmetryTransform,
};
use mirrorsweep_core::photo::DepthMap;
use mirrorsweep_core::sampler::{cap_contains, fibonacci_cap, Direction, SphericalCap};
use mirrorsweep_core::{Mat3, Mat4, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::pfm::{decode_pfm, encode_pfm};

const TOL: f64 = 1e-9;

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if v.norm_squared() > 0.05 && v.norm_squared() <= 1.0 {
            return v.normalized().expect("nonzero");
        }
    }
}

fn intrinsics(rng: &mut ChaCha8Rng) -> CameraIntrinsics {
    CameraIntrinsics::new(
        rng.random_range(100.0..800.0),
        rng.random_range(100.0..800.0),
        rng.random_range(0.0..512.0),
        rng.random_range(0.0..512.0),
    )
    .expect("valid intrinsics")
}

fn plane(rng: &mut ChaCha8Rng) -> SymmetryPlane {
    let d = rng.random_range(0.2..5.0);
    SymmetryPlane::new(unit(rng).scale(1.0 / d)).expect("nonzero plane")
}

fn pose(rng: &mut ChaCha8Rng) -> CameraPose {
    loop {
        let r = Mat3::rotation(unit(rng), rng.random_range(-3.0..3.0));
        let t = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(1.0..4.0));
        let p = CameraPose::new(r, t).expect("rotation");
        if p.rotation().mul_vec(Vec3::X).dot(p.translation()).abs() > 0.05 {
            return p;
        }
    }
}

fn scale_normalized(m: &Mat4) -> Mat4 {
    let pivot = m.0.iter().flatten().fold(0.0f64, |a, v| if v.abs() > a.abs() { *v } else { a });
    m.scale(1.0 / pivot)
}

/// Largest violation seen by `check`, over `cases` draws.
fn worst(cases: usize, rng: &mut ChaCha8Rng, mut check: impl FnMut(&mut ChaCha8Rng) -> f64) -> f64 {
    (0..cases).map(|_| check(rng)).fold(0.0, f64::max)
}

pub fn run(cases: usize, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dof_cases = (cases / 10).max(100);
    let mut results: Vec<(&str, usize, f64, f64)> = Vec::new();

    let e = worst(cases, &mut rng, |r| {
        correspondence_from_plane(&intrinsics(r), &plane(r)).normalized_square().max_abs_diff(&Mat4::IDENTITY)
    });
    results.push(("correspondence involution", cases, e, TOL));

    let e = worst(cases, &mut rng, |r| {
        let p = plane(r);
        let w = p.w();
        let u = w.cross(unit(r)).normalized().unwrap_or(Vec3::Y);
        let x = w.scale(-1.0 / w.norm_squared()) + u.scale(r.random_range(-3.0..3.0));
        (mirror_matrix(&p).transform_point(x) - x).max_abs()
    });
    results.push(("mirror fixed points", cases, e, TOL));

    let e = worst(cases, &mut rng, |r| {
        let c = correspondence_from_plane(&intrinsics(r), &plane(r));
        let src = PixelDepth::new(r.random_range(0.0..512.0), r.random_range(0.0..512.0), r.random_range(0.2..5.0));
        match warp_pixel(&c, src).and_then(|m| warp_pixel(&c, m)) {
            Ok(b) => ((b.x - src.x).abs() / src.x.max(1.0))
                .max((b.y - src.y).abs() / src.y.max(1.0))
                .max((b.d - src.d).abs() / src.d),
            Err(_) => 0.0,
        }
    });
    results.push(("warp round trip", cases, e, 1e-6));

    let e = worst(cases, &mut rng, |r| {
        let (k, rt) = (intrinsics(r), pose(r));
        let g = correspondence_general(&k, &rt, &SymmetryTransform::m2());
        let p = correspondence_from_plane(&k, &plane_in_camera(&rt).expect("non-degenerate"));
        scale_normalized(g.matrix()).max_abs_diff(&scale_normalized(p.matrix()))
    });
    results.push(("general vs plane correspondence", cases, e, TOL));

    let e = worst(dof_cases, &mut rng, |r| {
        let (k, rt) = (intrinsics(r), pose(r));
        let spin = Mat3::rotation(Vec3::X, r.random_range(-3.0..3.0));
        let shift = rt.rotation().mul_vec(Vec3::new(0.0, r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)));
        let moved = CameraPose::new(rt.rotation().mul_mat(&spin), rt.translation() + shift).expect("rotation");
        let a = correspondence_general(&k, &rt, &SymmetryTransform::m2());
        let b = correspondence_general(&k, &moved, &SymmetryTransform::m2());
        scale_normalized(a.matrix()).max_abs_diff(&scale_normalized(b.matrix()))
    });
    results.push(("pose perturbations within the plane", dof_cases, e, TOL));

    let e = worst(cases / 10 + 1, &mut rng, |r| {
        let cap = SphericalCap::new(Direction::new(unit(r)).expect("unit"), r.random_range(0.05..90.0)).expect("cap");
        let n = r.random_range(1..200);
        fibonacci_cap(&cap, n).iter().filter(|s| !cap_contains(&cap, s)).count() as f64
    });
    results.push(("cap samples inside cap", cases / 10 + 1, e, 0.5));

    let e = worst(cases / 10 + 1, &mut rng, |r| {
        let n = r.random_range(1..100);
        let gt: Vec<f64> = (0..n).map(|_| r.random_range(0.05..20.0)).collect();
        let pred: Vec<f64> = (0..n).map(|_| r.random_range(0.05..20.0)).collect();
        let (g, p) = (DepthMap::from_values(n, 1, gt), DepthMap::from_values(n, 1, pred));
        let base = depth_metrics(&p, &g, None).expect("nonempty").silog;
        [0.1, 1.0, 17.3]
            .iter()
            .map(|c| (depth_metrics(&p.scaled(*c), &g, None).expect("nonempty").silog - base).abs())
            .fold(0.0, f64::max)
    });
    results.push(("SILog scale invariance", cases / 10 + 1, e, 1e-12));

    let g = DepthMap::from_values(2, 1, vec![1.0, 1.0]);
    let p = DepthMap::from_values(2, 1, vec![1.0, 2.0]);
    let ln2 = std::f64::consts::LN_2;
    let e = (depth_metrics(&p, &g, None).expect("nonempty").silog - ln2 * ln2 / 4.0).abs();
    results.push(("SILog worked example", 1, e, 1e-9));

    let e = worst(20, &mut rng, |r| {
        let (w, h) = (r.random_range(1..20), r.random_range(1..20));
        let values: Vec<f64> = (0..w * h)
            .map(|_| if r.random_bool(0.1) { f64::NAN } else { r.random_range(0.1..10.0f32) as f64 })
            .collect();
        let d = DepthMap::from_values(w, h, values);
        match decode_pfm(&encode_pfm(&d)) {
            Ok(back) if bits(&back) == bits(&d) && back.mask() == d.mask() => 0.0,
            _ => 1.0,
        }
    });
    results.push(("PFM round trip", 20, e, 0.5));

    let c = RunConfig::default();
    let e = if RunConfig::from_json(&c.to_json()).ok() == Some(c) { 0.0 } else { 1.0 };
    results.push(("config round trip", 1, e, 0.5));

    let mut failed = 0;
    for (name, n, err, tol) in &results {
        if err < tol {
            println!("PASS {name} ({n} cases, worst {err:.3e} < {tol:.0e})");
        } else {
            failed += 1;
            println!("FAIL {name} ({n} cases, worst {err:.3e} >= {tol:.0e})");
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{failed} invariant check(s) failed")))
    }
}

fn bits(d: &DepthMap) -> Vec<u64> {
    d.values().as_slice().iter().map(|v| if v.is_nan() { u64::MAX } else { v.to_bits() }).collect()
}
