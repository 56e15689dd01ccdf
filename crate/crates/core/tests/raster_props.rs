use mpi_core::geometry::{homography_tgt_to_ref, CameraIntrinsics, Homography, Plane, Pose};
use mpi_core::raster::{bilinear_sample, warp, BorderPolicy, Raster};
use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;

fn raster(w: usize, h: usize, c: usize, lo: f32, hi: f32) -> impl Strategy<Value = Raster> {
    prop::collection::vec(lo..=hi, w * h * c).prop_map(move |d| Raster::from_vec(w, h, c, d).unwrap())
}

fn homography() -> impl Strategy<Value = Homography> {
    (
        prop::array::uniform3(-0.05..0.05f64),
        prop::array::uniform3(-0.5..0.5f64),
        2.0..30.0f64,
    )
        .prop_map(|(a, t, d)| {
            let k = CameraIntrinsics::centered(12.0, 9, 7).unwrap();
            let r = Rotation3::from_euler_angles(a[0], a[1], a[2]);
            let pose = Pose::new(*r.matrix(), Vector3::from(t)).unwrap();
            homography_tgt_to_ref(&Plane::fronto_parallel(d).unwrap(), &k, &k, &pose).unwrap()
        })
}

fn combine(a: &Raster, b: &Raster, sa: f32, sb: f32) -> Raster {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| sa * x + sb * y).collect();
    Raster::from_vec(a.width(), a.height(), a.channels(), data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn warp_is_linear(
        a in raster(9, 7, 2, -1.0, 1.0),
        b in raster(9, 7, 2, -1.0, 1.0),
        sa in -2.0..2.0f32,
        sb in -2.0..2.0f32,
        h in homography(),
        clamp in any::<bool>(),
    ) {
        let border = if clamp { BorderPolicy::Clamp } else { BorderPolicy::Transparent };
        let lhs = warp(&combine(&a, &b, sa, sb), &h, 9, 7, border);
        let rhs = combine(&warp(&a, &h, 9, 7, border), &warp(&b, &h, 9, 7, border), sa, sb);
        for (x, y) in lhs.data().iter().zip(rhs.data()) {
            prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn warp_preserves_range(
        a in raster(9, 7, 1, -0.5, 0.75),
        h in homography(),
    ) {
        let out = warp(&a, &h, 9, 7, BorderPolicy::Transparent);
        prop_assert!(out.data().iter().all(|v| (-0.5..=0.75).contains(v)));
    }

    #[test]
    fn warped_alpha_stays_valid(a in raster(9, 7, 1, 0.0, 1.0), h in homography()) {
        for border in [BorderPolicy::Transparent, BorderPolicy::Clamp] {
            let out = warp(&a, &h, 9, 7, border);
            prop_assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn positive_scaling_changes_nothing(a in raster(9, 7, 3, 0.0, 1.0), h in homography(), s in 1e-4..1e4f64) {
        let scaled = h.scaled(s).unwrap();
        prop_assert_eq!(
            warp(&a, &h, 9, 7, BorderPolicy::Transparent),
            warp(&a, &scaled, 9, 7, BorderPolicy::Transparent)
        );
    }

    #[test]
    fn sampling_at_centres_is_exact(a in raster(5, 4, 2, -3.0, 3.0), x in 0usize..5, y in 0usize..4) {
        prop_assert_eq!(bilinear_sample(&a, x as f64, y as f64, BorderPolicy::Transparent), a.pixel(x, y).to_vec());
    }
}

/// Smooth test image: low-frequency sinusoids in [0, 1].
fn smooth(w: usize, h: usize) -> Raster {
    Raster::from_fn(w, h, 1, |x, y, _| {
        let (fx, fy) = (x as f32 / w as f32, y as f32 / h as f32);
        0.5 + 0.25 * (6.0 * fx).sin() + 0.2 * (4.0 * fy + 1.0).cos()
    })
}

#[test]
fn forward_then_inverse_warp_round_trip() {
    let (w, h) = (96, 64);
    let img = smooth(w, h);
    let k = CameraIntrinsics::centered(80.0, w, h).unwrap();
    let r = Rotation3::from_euler_angles(0.01, -0.02, 0.015);
    let pose = Pose::new(*r.matrix(), Vector3::new(0.2, -0.1, 0.1)).unwrap();
    let hom = homography_tgt_to_ref(&Plane::fronto_parallel(8.0).unwrap(), &k, &k, &pose).unwrap();
    let there = warp(&img, &hom, w, h, BorderPolicy::Transparent);
    let back = warp(&there, &hom.inverse(), w, h, BorderPolicy::Transparent);
    let margin = 12;
    let mut worst = 0.0f32;
    for y in margin..h - margin {
        for x in margin..w - margin {
            worst = worst.max((back.get(x, y, 0) - img.get(x, y, 0)).abs());
        }
    }
    assert!(worst < 2e-2, "max interior error {worst}");
}

#[test]
fn identity_warp_is_bitwise() {
    let img = smooth(13, 11);
    for border in [BorderPolicy::Transparent, BorderPolicy::Clamp] {
        assert_eq!(warp(&img, &Homography::identity(), 13, 11, border), img);
    }
}

#[test]
fn integer_shift_moves_pixels() {
    let img = smooth(10, 6);
    let h = Homography::from_matrix(Matrix3::new(1.0, 0.0, 2.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0)).unwrap();
    let out = warp(&img, &h, 10, 6, BorderPolicy::Transparent);
    assert_eq!(out.get(3, 2, 0), img.get(5, 3, 0));
    assert_eq!(out.get(9, 0, 0), 0.0);
}
