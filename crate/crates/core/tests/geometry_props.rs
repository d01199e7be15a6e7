use mirrorsweep_core::geometry::{
    correspondence_from_plane, correspondence_general, mirror_matrix, plane_in_camera, warp_pixel, CameraIntrinsics,
    CameraPose, PixelDepth, SymmetryPlane, SymmetryTransform,
};
use mirrorsweep_core::{Mat3, Mat4, Vec3};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn unit() -> impl Strategy<Value = Vec3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 0.05)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalized().unwrap())
}

fn intrinsics() -> impl Strategy<Value = CameraIntrinsics> {
    (100.0f64..800.0, 100.0f64..800.0, 0.0f64..512.0, 0.0f64..512.0)
        .prop_map(|(fx, fy, cx, cy)| CameraIntrinsics::new(fx, fy, cx, cy).unwrap())
}

fn plane() -> impl Strategy<Value = SymmetryPlane> {
    (unit(), 0.2f64..5.0).prop_map(|(n, d)| SymmetryPlane::new(n.scale(1.0 / d)).unwrap())
}

/// Object placed in front of the camera with the object's x = 0 plane off the optical center.
fn pose() -> impl Strategy<Value = CameraPose> {
    (unit(), -3.0f64..3.0, -0.5f64..0.5, -0.5f64..0.5, 1.0f64..4.0)
        .prop_map(|(axis, angle, tx, ty, tz)| {
            CameraPose::new(Mat3::rotation(axis, angle), Vec3::new(tx, ty, tz)).unwrap()
        })
        .prop_filter("plane through camera", |p| p.rotation().mul_vec(Vec3::X).dot(p.translation()).abs() > 0.05)
}

/// Divides by the largest-magnitude entry so matrices equal up to scale compare equal.
fn scale_normalized(m: &Mat4) -> Mat4 {
    let mut pivot = 0.0f64;
    for r in &m.0 {
        for v in r {
            if v.abs() > pivot.abs() {
                pivot = *v;
            }
        }
    }
    m.scale(1.0 / pivot)
}

fn point_on_plane(p: &SymmetryPlane, a: f64, b: f64) -> Vec3 {
    let w = p.w();
    let base = w.scale(-1.0 / w.norm_squared());
    let helper = if w.x.abs() < 0.9 * w.norm() { Vec3::X } else { Vec3::Y };
    let u = w.cross(helper).normalized().unwrap();
    let v = w.cross(u).normalized().unwrap();
    base + u.scale(a) + v.scale(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn correspondence_is_an_involution(k in intrinsics(), p in plane()) {
        let c = correspondence_from_plane(&k, &p);
        prop_assert!(c.normalized_square().max_abs_diff(&Mat4::IDENTITY) < TOL);
    }

    #[test]
    fn mirror_fixes_points_on_plane(p in plane(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let x = point_on_plane(&p, a, b);
        let y = mirror_matrix(&p).transform_point(x);
        prop_assert!((y - x).max_abs() < TOL);
    }

    #[test]
    fn warp_round_trips(
        k in intrinsics(),
        p in plane(),
        x in 0.0f64..512.0,
        y in 0.0f64..512.0,
        d in 0.2f64..5.0,
    ) {
        let c = correspondence_from_plane(&k, &p);
        let src = PixelDepth::new(x, y, d);
        if let Ok(mid) = warp_pixel(&c, src) {
            let back = warp_pixel(&c, mid).unwrap();
            prop_assert!((back.x - x).abs() <= 1e-6 * x.abs().max(1.0));
            prop_assert!((back.y - y).abs() <= 1e-6 * y.abs().max(1.0));
            prop_assert!((back.d - d).abs() <= 1e-6 * d);
        }
    }

    #[test]
    fn general_matches_plane_form(k in intrinsics(), rt in pose()) {
        let general = correspondence_general(&k, &rt, &SymmetryTransform::m2());
        let plane = correspondence_from_plane(&k, &plane_in_camera(&rt).unwrap());
        let diff = scale_normalized(general.matrix()).max_abs_diff(&scale_normalized(plane.matrix()));
        prop_assert!(diff < TOL, "diff {diff}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rotation_about_plane_normal_is_invisible(k in intrinsics(), rt in pose(), angle in -3.1f64..3.1) {
        // Object-space rotation about x (the symmetry plane's normal), applied before Rt.
        let spin = Mat3::rotation(Vec3::X, angle);
        let perturbed = CameraPose::new(rt.rotation().mul_mat(&spin), rt.translation()).unwrap();
        let a = correspondence_general(&k, &rt, &SymmetryTransform::m2());
        let b = correspondence_general(&k, &perturbed, &SymmetryTransform::m2());
        prop_assert!(scale_normalized(a.matrix()).max_abs_diff(&scale_normalized(b.matrix())) < TOL);
    }

    #[test]
    fn translation_along_plane_is_invisible(k in intrinsics(), rt in pose(), ty in -2.0f64..2.0, tz in -2.0f64..2.0) {
        let shift = rt.rotation().mul_vec(Vec3::new(0.0, ty, tz));
        let perturbed = CameraPose::new(*rt.rotation(), rt.translation() + shift).unwrap();
        let a = correspondence_general(&k, &rt, &SymmetryTransform::m2());
        let b = correspondence_general(&k, &perturbed, &SymmetryTransform::m2());
        prop_assert!(scale_normalized(a.matrix()).max_abs_diff(&scale_normalized(b.matrix())) < TOL);
    }
}
