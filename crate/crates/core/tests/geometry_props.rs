use mpi_core::geometry::{
    compose_pose, homography_ref_to_tgt, homography_tgt_to_ref, invert_pose, project_point,
    CameraIntrinsics, Homography, Plane, Pose,
};
use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;

fn intrinsics() -> impl Strategy<Value = CameraIntrinsics> {
    (50.0..1500.0f64, 0.8..1.25f64, 8usize..640, 8usize..480, -5.0..5.0f64, -5.0..5.0f64).prop_map(
        |(f, aspect, w, h, dx, dy)| {
            let cx = (w as f64 - 1.0) / 2.0 + dx;
            let cy = (h as f64 - 1.0) / 2.0 + dy;
            CameraIntrinsics::new(f, f * aspect, cx, cy, w, h).unwrap()
        },
    )
}

fn pose(max_angle: f64, max_t: f64) -> impl Strategy<Value = Pose> {
    (
        prop::array::uniform3(-max_angle..=max_angle),
        prop::array::uniform3(-max_t..=max_t),
    )
        .prop_map(|(a, t)| {
            let r = Rotation3::from_euler_angles(a[0], a[1], a[2]);
            Pose::new(*r.matrix(), Vector3::from(t)).unwrap()
        })
}

fn plane() -> impl Strategy<Value = Plane> {
    (-0.4..0.4f64, -0.4..0.4f64, 1.0..100.0f64).prop_map(|(nx, ny, d)| {
        Plane::new(Vector3::new(nx, ny, 1.0).normalize(), d).unwrap()
    })
}

/// Reference pixel back-projected onto the plane.
fn lift(k: &CameraIntrinsics, plane: &Plane, u: f64, v: f64) -> Option<Vector3<f64>> {
    let ray = k.inverse_matrix() * Vector3::new(u, v, 1.0);
    let s = plane.distance() / plane.normal().dot(&ray);
    (s > 0.0).then(|| ray * s)
}

fn scale_free_eq(a: &Matrix3<f64>, b: &Matrix3<f64>, tol: f64) -> bool {
    let a = a / a.norm();
    let b = b / b.norm();
    let sign = if a.dot(&b) < 0.0 { -1.0 } else { 1.0 };
    (a - b * sign).amax() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pose_inverse_round_trip(p in pose(1.0, 5.0), x in prop::array::uniform3(-10.0..10.0f64)) {
        let x = Vector3::from(x);
        let back = invert_pose(&p).transform_point(&p.transform_point(&x));
        prop_assert!((back - x).amax() < 1e-12);
        let id = p.compose(&p.inverse()).to_homogeneous();
        prop_assert!((id - nalgebra::Matrix4::identity()).amax() < 1e-12);
    }

    #[test]
    fn composition_matches_matrix_product(a in pose(1.0, 5.0), b in pose(1.0, 5.0)) {
        let c = compose_pose(&a, &b);
        let m = a.to_homogeneous() * b.to_homogeneous();
        prop_assert!((c.to_homogeneous() - m).amax() < 1e-12);
    }

    #[test]
    fn homography_reproduces_point_on_plane(
        kr in intrinsics(),
        kt in intrinsics(),
        theta in pose(0.3, 2.0),
        plane in plane(),
        fu in 0.0..1.0f64,
        fv in 0.0..1.0f64,
    ) {
        let (u, v) = (fu * (kr.width() - 1) as f64, fv * (kr.height() - 1) as f64);
        let x = lift(&kr, &plane, u, v);
        prop_assume!(x.is_some());
        let x = x.unwrap();
        let tgt = project_point(&kt, &theta, &x);
        prop_assume!(tgt.is_ok());
        let (ut, vt) = tgt.unwrap();
        let (Ok(h_tr), Ok(h_rt)) = (
            homography_tgt_to_ref(&plane, &kr, &kt, &theta),
            homography_ref_to_tgt(&plane, &kr, &kt, &theta),
        ) else {
            return Err(TestCaseError::reject("degenerate"));
        };
        let (ur, vr) = h_tr.apply(ut, vt).unwrap();
        prop_assert!((ur - u).abs() < 1e-6 && (vr - v).abs() < 1e-6, "{ur},{vr} vs {u},{v}");
        let (ut2, vt2) = h_rt.apply(u, v).unwrap();
        prop_assert!((ut2 - ut).abs() < 1e-6 && (vt2 - vt).abs() < 1e-6);
    }

    #[test]
    fn directions_are_mutual_inverses(
        kr in intrinsics(), kt in intrinsics(), theta in pose(0.3, 2.0), plane in plane(),
    ) {
        let h1 = homography_tgt_to_ref(&plane, &kr, &kt, &theta);
        let h2 = homography_ref_to_tgt(&plane, &kr, &kt, &theta);
        prop_assume!(h1.is_ok() && h2.is_ok());
        let prod = h1.unwrap().matrix() * h2.unwrap().matrix();
        prop_assert!(scale_free_eq(&prod, &Matrix3::identity(), 1e-9));
    }

    #[test]
    fn identity_configuration(k in intrinsics(), plane in plane()) {
        let h = homography_tgt_to_ref(&plane, &k, &k, &Pose::identity()).unwrap();
        prop_assert!(scale_free_eq(h.matrix(), &Matrix3::identity(), 1e-12));
    }

    #[test]
    fn chained_homographies_compose(
        k in intrinsics(),
        ab in pose(0.2, 1.0),
        bc in pose(0.2, 1.0),
        d in 5.0..100.0f64,
    ) {
        let plane_a = Plane::fronto_parallel(d).unwrap();
        let plane_b = plane_a.transformed(&ab);
        prop_assume!(plane_b.is_ok());
        let plane_b = plane_b.unwrap();
        let ac = bc.compose(&ab);
        let h_ab = homography_tgt_to_ref(&plane_a, &k, &k, &ab);
        let h_bc = homography_tgt_to_ref(&plane_b, &k, &k, &bc);
        let h_ac = homography_tgt_to_ref(&plane_a, &k, &k, &ac);
        prop_assume!(h_ab.is_ok() && h_bc.is_ok() && h_ac.is_ok());
        let chained = h_ab.unwrap().matrix() * h_bc.unwrap().matrix();
        prop_assert!(scale_free_eq(&chained, h_ac.unwrap().matrix(), 1e-9));
    }

    #[test]
    fn scaling_does_not_move_points(
        k in intrinsics(), theta in pose(0.3, 2.0), plane in plane(), s in 1e-3..1e3f64,
        u in 0.0..640.0f64, v in 0.0..480.0f64,
    ) {
        let h = homography_tgt_to_ref(&plane, &k, &k, &theta);
        prop_assume!(h.is_ok());
        let h = h.unwrap();
        let hs = h.scaled(s).unwrap();
        match (h.apply(u, v), hs.apply(u, v)) {
            (Some(a), Some(b)) => prop_assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9),
            (None, None) => {}
            other => prop_assert!(false, "visibility changed under scaling: {other:?}"),
        }
    }
}

#[test]
fn lateral_parallax_matches_disparity() {
    let k = CameraIntrinsics::centered(725.0, 1242, 375).unwrap();
    let plane = Plane::fronto_parallel(10.0).unwrap();
    let h = homography_ref_to_tgt(&plane, &k, &k, &Pose::from_translation(Vector3::new(0.54, 0.0, 0.0))).unwrap();
    let (u, v) = h.apply(600.0, 100.0).unwrap();
    assert!((u - (600.0 + 725.0 * 0.54 / 10.0)).abs() < 1e-9);
    assert!((v - 100.0).abs() < 1e-9);
}

#[test]
fn pure_translation_homography() {
    let h = Homography::translation(3.0, -2.0);
    assert_eq!(h.apply(1.0, 1.0), Some((4.0, -1.0)));
    assert_eq!(h.inverse().apply(4.0, -1.0), Some((1.0, 1.0)));
}
