use mpi_core::geometry::{plane_set, CameraIntrinsics, Plane, Pose};
use mpi_core::mpi::{
    apply_edits, composite, depth_from_alpha, expand_hybrid, render_view, ChannelKind, DepthMode,
    EditAction, EditOp, EditScript, HybridScene, MpiScene, Region,
};
use mpi_core::raster::{BorderPolicy, Raster};
use nalgebra::Vector3;
use proptest::prelude::*;

fn raster(w: usize, h: usize, c: usize, lo: f32, hi: f32) -> impl Strategy<Value = Raster> {
    prop::collection::vec(lo..=hi, w * h * c).prop_map(move |d| Raster::from_vec(w, h, c, d).unwrap())
}

fn stack(n: usize, w: usize, h: usize, c: usize, lo: f32, hi: f32) -> impl Strategy<Value = Vec<Raster>> {
    prop::collection::vec(raster(w, h, c, lo, hi), n)
}

/// Alpha values with a fair share of exact 0 and 1.
fn alpha_value() -> impl Strategy<Value = f32> {
    prop_oneof![1 => Just(0.0f32), 1 => Just(1.0f32), 4 => 0.0..=1.0f32]
}

fn alpha_stack(m: usize, w: usize, h: usize) -> impl Strategy<Value = Vec<Raster>> {
    prop::collection::vec(
        prop::collection::vec(alpha_value(), w * h).prop_map(move |d| Raster::from_vec(w, h, 1, d).unwrap()),
        m,
    )
}

/// Random feature hybrid with `W, H ≤ 4`, `m ≤ 6`, `k ≤ min(3, m)`, `c ≤ 4`.
fn hybrid() -> impl Strategy<Value = HybridScene> {
    (1usize..=4, 1usize..=4, 1usize..=6, 1usize..=4)
        .prop_flat_map(|(w, h, m, c)| (Just((w, h, m, c)), 1usize..=m.min(3)))
        .prop_flat_map(|((w, h, m, c), k)| {
            (
                stack(k, w, h, c, -1.0, 1.0),
                alpha_stack(m, w, h),
                prop_oneof![
                    raster(w, h, k * m, 0.0, 1.0),
                    // Sparse association, exercising the degenerate-column rule.
                    prop::collection::vec(prop_oneof![3 => Just(0.0f32), 1 => 0.0..1.0f32], w * h * k * m)
                        .prop_map(move |d| Raster::from_vec(w, h, k * m, d).unwrap()),
                ],
                0.5..20.0f64,
                Just((w, h, m)),
            )
        })
        .prop_map(|(lifted, alpha, assoc, f, (w, h, m))| {
            HybridScene::new(
                lifted,
                alpha,
                assoc,
                fronto_planes(1.0, 50.0, m),
                CameraIntrinsics::centered(f, w, h).unwrap(),
                ChannelKind::Features,
            )
            .unwrap()
        })
}

/// Scalar front-to-back compositing straight from the definition.
fn oracle_composite(content: &[Raster], alpha: &[Raster], x: usize, y: usize, c: usize) -> (f64, f64) {
    let mut value = 0.0;
    for z in 0..content.len() {
        let mut t = 1.0;
        for a in &alpha[..z] {
            t *= 1.0 - a.get(x, y, 0) as f64;
        }
        value += content[z].get(x, y, c) as f64 * alpha[z].get(x, y, 0) as f64 * t;
    }
    let residual = alpha.iter().map(|a| 1.0 - a.get(x, y, 0) as f64).product();
    (value, residual)
}

/// Plane content from the triple loop `C[c][i] = Σ_j S[c][j] · Φ*[j][i]`.
fn oracle_expand(s: &HybridScene, x: usize, y: usize, i: usize, c: usize) -> f64 {
    let (k, m) = (s.num_lifted(), s.num_planes());
    let col: Vec<f64> = (0..k).map(|j| s.assoc().get(x, y, j * m + i) as f64).collect();
    let sum: f64 = col.iter().sum();
    let mut acc = 0.0;
    for (j, phi) in col.iter().enumerate() {
        let weight = if sum <= 1e-8 { 1.0 / k as f64 } else { phi / sum };
        acc += s.lifted()[j].get(x, y, c) as f64 * weight;
    }
    acc
}

/// Bilinear lookup with zeros outside the pixel-centre domain.
fn oracle_sample(img: &Raster, x: f64, y: f64, c: usize) -> f64 {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let eps = 1e-6;
    if !(x >= -eps && x <= w - 1.0 + eps && y >= -eps && y <= h - 1.0 + eps) {
        return 0.0;
    }
    let (x, y) = (x.clamp(0.0, w - 1.0), y.clamp(0.0, h - 1.0));
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let mut acc = 0.0;
    for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
        for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
            if wx * wy == 0.0 {
                continue;
            }
            acc += wx * wy * img.get(x0 as usize + dx, y0 as usize + dy, c) as f64;
        }
    }
    acc
}

/// Renders by intersecting each target ray with each plane and projecting
/// the hit into the reference camera; no homographies involved.
fn oracle_render(s: &MpiScene, pose: &Pose, u: usize, v: usize, c: usize) -> f64 {
    let k = s.intrinsics();
    let inv = pose.inverse();
    let ray = inv.rotation() * Vector3::new((u as f64 - k.cx()) / k.fx(), (v as f64 - k.cy()) / k.fy(), 1.0);
    let origin = inv.translation();
    let mut value = 0.0;
    let mut t = 1.0;
    for ((plane, content), alpha) in s.planes().iter().zip(s.content()).zip(s.alpha()) {
        let s_hit = (plane.distance() - plane.normal().dot(origin)) / plane.normal().dot(&ray);
        let p = origin + ray * s_hit;
        let (x, y) = (k.fx() * p.x / p.z + k.cx(), k.fy() * p.y / p.z + k.cy());
        let a = oracle_sample(alpha, x, y, 0);
        value += oracle_sample(content, x, y, c) * a * t;
        t *= 1.0 - a;
    }
    value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn composite_matches_definition(
        (content, alpha) in (1usize..=4, 1usize..=4, 1usize..=6, 1usize..=3)
            .prop_flat_map(|(w, h, m, c)| (stack(m, w, h, c, -1.0, 1.0), alpha_stack(m, w, h)))
    ) {
        let out = composite(&content, &alpha).unwrap();
        let (w, h, c) = content[0].dims();
        for y in 0..h {
            for x in 0..w {
                for ch in 0..c {
                    let (value, residual) = oracle_composite(&content, &alpha, x, y, ch);
                    prop_assert!((out.image.get(x, y, ch) as f64 - value).abs() < 1e-6);
                    prop_assert!((out.transmittance.get(x, y, 0) as f64 - residual).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn weights_and_transmittance_partition_unity(alpha in (1usize..=4, 1usize..=4, 1usize..=8)
        .prop_flat_map(|(w, h, m)| alpha_stack(m, w, h)))
    {
        let (w, h) = (alpha[0].width(), alpha[0].height());
        let ones = vec![Raster::filled(w, h, 1, 1.0); alpha.len()];
        let out = composite(&ones, &alpha).unwrap();
        for (s, t) in out.image.data().iter().zip(out.transmittance.data()) {
            prop_assert!((s + t - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn nearer_opacity_never_raises_farther_weight(
        alpha in alpha_stack(5, 2, 2),
        near in 0usize..4,
        bump in 0.0..1.0f32,
    ) {
        let weight = |alpha: &[Raster], z: usize| {
            let ind: Vec<Raster> = (0..alpha.len())
                .map(|i| Raster::filled(2, 2, 1, if i == z { 1.0 } else { 0.0 }))
                .collect();
            composite(&ind, alpha).unwrap().image
        };
        let mut raised = alpha.clone();
        raised[near] = Raster::from_fn(2, 2, 1, |x, y, _| (alpha[near].get(x, y, 0) + bump).min(1.0));
        for z in near + 1..alpha.len() {
            let before = weight(&alpha, z);
            let after = weight(&raised, z);
            for (b, a) in before.data().iter().zip(after.data()) {
                prop_assert!(a <= b, "plane {z}: {b} -> {a}");
            }
        }
    }

    #[test]
    fn expansion_matches_triple_loop(s in hybrid()) {
        let mpi = expand_hybrid(&s).unwrap();
        let (w, h, c) = s.lifted()[0].dims();
        for (i, content) in mpi.content().iter().enumerate() {
            for y in 0..h {
                for x in 0..w {
                    for ch in 0..c {
                        let want = oracle_expand(&s, x, y, i, ch);
                        prop_assert!((content.get(x, y, ch) as f64 - want).abs() < 1e-6);
                    }
                }
            }
        }
        prop_assert_eq!(mpi.alpha(), s.alpha());
    }

    #[test]
    fn expansion_is_linear(
        (s, other) in hybrid().prop_flat_map(|s| {
            let (w, h, c) = s.lifted()[0].dims();
            let k = s.num_lifted();
            (Just(s), stack(k, w, h, c, -1.0, 1.0))
        }),
        a in -2.0..2.0f32,
        b in -2.0..2.0f32,
    ) {
        let mix: Vec<Raster> = s.lifted().iter().zip(&other).map(|(p, q)| {
            let d = p.data().iter().zip(q.data()).map(|(x, y)| a * x + b * y).collect();
            Raster::from_vec(p.width(), p.height(), p.channels(), d).unwrap()
        }).collect();
        let s_other = s.with_lifted(other, ChannelKind::Features).unwrap();
        let e_mix = expand_hybrid(&s.with_lifted(mix, ChannelKind::Features).unwrap()).unwrap();
        let e_a = expand_hybrid(&s).unwrap();
        let e_b = expand_hybrid(&s_other).unwrap();
        for ((m, p), q) in e_mix.content().iter().zip(e_a.content()).zip(e_b.content()) {
            for ((m, p), q) in m.data().iter().zip(p.data()).zip(q.data()) {
                prop_assert!((m - (a * p + b * q)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn expand_and_render_match_ray_oracle(
        s in hybrid(),
        tx in -0.3..0.3f64,
        ty in -0.3..0.3f64,
        tz in -0.3..0.3f64,
    ) {
        let mpi = expand_hybrid(&s).unwrap();
        let pose = Pose::from_translation(Vector3::new(tx, ty, tz));
        let out = render_view(&mpi, mpi.intrinsics(), &pose, BorderPolicy::Transparent).unwrap();
        let (w, h, c) = out.image.dims();
        for y in 0..h {
            for x in 0..w {
                for ch in 0..c {
                    let want = oracle_render(&mpi, &pose, x, y, ch);
                    prop_assert!((out.image.get(x, y, ch) as f64 - want).abs() < 1e-5,
                        "({x},{y},{ch}): {} vs {want}", out.image.get(x, y, ch));
                }
            }
        }
    }

    #[test]
    fn render_equals_composite_of_warps(s in hybrid(), tx in -0.3..0.3f64) {
        let mpi = expand_hybrid(&s).unwrap();
        let pose = Pose::lateral(tx);
        let fused = render_view(&mpi, mpi.intrinsics(), &pose, BorderPolicy::Transparent).unwrap();
        let hs = mpi_core::mpi::plane_homographies(&mpi, mpi.intrinsics(), &pose).unwrap();
        let (w, h) = (mpi.intrinsics().width(), mpi.intrinsics().height());
        let warp = |r: &Raster, i: usize| mpi_core::raster::warp(r, &hs[i], w, h, BorderPolicy::Transparent);
        let content: Vec<Raster> = mpi.content().iter().enumerate().map(|(i, r)| warp(r, i)).collect();
        let alpha: Vec<Raster> = mpi.alpha().iter().enumerate().map(|(i, r)| warp(r, i)).collect();
        let two_step = composite(&content, &alpha).unwrap();
        prop_assert_eq!(fused, two_step);
    }

    #[test]
    fn depth_stays_within_plane_range(alpha in (1usize..=4, 1usize..=4, 1usize..=6)
        .prop_flat_map(|(w, h, m)| alpha_stack(m, w, h)))
    {
        let planes = fronto_planes(2.0, 80.0, alpha.len());
        let (near, far) = (2.0f32, 80.0f32);
        let norm = depth_from_alpha(&alpha, &planes, DepthMode::Normalized).unwrap();
        prop_assert!(norm.data().iter().all(|d| *d >= near * (1.0 - 1e-6) && *d <= far * (1.0 + 1e-6)));
        let raw = depth_from_alpha(&alpha, &planes, DepthMode::Raw).unwrap();
        prop_assert!(raw.data().iter().all(|d| *d >= 0.0 && *d <= far * (1.0 + 1e-6)));
    }

    #[test]
    fn semantic_probabilities_stay_on_simplex(
        (probs, alpha) in (1usize..=4, 1usize..=4, 1usize..=5, 2usize..=4)
            .prop_flat_map(|(w, h, m, l)| (
                stack(m, w, h, l, 0.0, 1.0).prop_map(move |s| s.into_iter().map(|r| {
                    let d: Vec<f32> = r.data().chunks(l).flat_map(|px| {
                        let sum: f32 = px.iter().sum::<f32>().max(1e-3);
                        px.iter().map(move |v| v / sum).collect::<Vec<_>>()
                    }).collect();
                    Raster::from_vec(w, h, l, d).unwrap()
                }).collect::<Vec<_>>()),
                alpha_stack(m, w, h),
            ))
    ) {
        let out = composite(&probs, &alpha).unwrap();
        let l = probs[0].channels();
        let norm = out.normalized();
        for ((px, t), npx) in out.image.data().chunks(l).zip(out.transmittance.data()).zip(norm.data().chunks(l)) {
            let sum: f32 = px.iter().sum();
            prop_assert!((sum - (1.0 - t)).abs() < 1e-4);
            if 1.0 - t > 1e-6 {
                let nsum: f32 = npx.iter().sum();
                prop_assert!((nsum - 1.0).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn edits_stay_inside_their_region(
        layer in 0usize..2,
        rx in 0usize..5, ry in 0usize..4, rw in 1usize..5, rh in 1usize..4,
        label in 0u32..3,
    ) {
        let (w, h) = (5, 4);
        let s = semantic_scene(w, h);
        let (rw, rh) = (rw.min(w - rx), rh.min(h - ry));
        let script = EditScript { ops: vec![EditOp {
            layer,
            region: Some(Region::Rect { x: rx, y: ry, width: rw, height: rh }),
            action: EditAction::SetLabel { label },
        }]};
        let e = apply_edits(&s, &script).unwrap();
        prop_assert_eq!(e.alpha(), s.alpha());
        prop_assert_eq!(e.assoc(), s.assoc());
        for j in 0..2 {
            for y in 0..h {
                for x in 0..w {
                    let inside = j == layer && x >= rx && x < rx + rw && y >= ry && y < ry + rh;
                    if inside {
                        prop_assert_eq!(e.lifted()[j].argmax().get(x, y), label);
                    } else {
                        prop_assert_eq!(e.lifted()[j].pixel(x, y), s.lifted()[j].pixel(x, y));
                    }
                }
            }
        }
    }
}

fn fronto_planes(near: f64, far: f64, m: usize) -> Vec<Plane> {
    if m == 1 {
        return vec![Plane::fronto_parallel(far).unwrap()];
    }
    plane_set(near, far, m).unwrap()
}

fn semantic_scene(w: usize, h: usize) -> HybridScene {
    let lifted = (0..2)
        .map(|j| Raster::from_fn(w, h, 3, |x, y, c| if c == (x + y + j) % 3 { 1.0 } else { 0.0 }))
        .collect();
    HybridScene::new(
        lifted,
        vec![Raster::filled(w, h, 1, 0.5); 3],
        Raster::from_fn(w, h, 6, |x, _, c| ((x + c) % 2) as f32),
        plane_set(1.0, 10.0, 3).unwrap(),
        CameraIntrinsics::centered(5.0, w, h).unwrap(),
        ChannelKind::Semantics,
    )
    .unwrap()
}

#[test]
fn identity_association_reproduces_lifted_layers() {
    let (w, h, k) = (4, 3, 3);
    let lifted: Vec<Raster> = (0..k).map(|j| Raster::from_fn(w, h, 2, |x, y, c| (x * 7 + y * 3 + c + j * 11) as f32 * 0.01)).collect();
    let assoc = Raster::from_fn(w, h, k * k, |_, _, ch| if ch / k == ch % k { 1.0 } else { 0.0 });
    let s = HybridScene::new(
        lifted.clone(),
        vec![Raster::filled(w, h, 1, 0.3); k],
        assoc,
        plane_set(1.0, 10.0, k).unwrap(),
        CameraIntrinsics::centered(4.0, w, h).unwrap(),
        ChannelKind::Features,
    )
    .unwrap();
    assert_eq!(expand_hybrid(&s).unwrap().content(), &lifted[..]);
}

#[test]
fn eq4_hand_cases() {
    let planes: Vec<Plane> = [2.0, 10.0].iter().map(|d| Plane::fronto_parallel(*d).unwrap()).collect();
    let a = vec![Raster::filled(1, 1, 1, 0.5), Raster::filled(1, 1, 1, 1.0)];
    let d = depth_from_alpha(&a, &planes, DepthMode::Raw).unwrap();
    assert!((d.data()[0] - 6.0).abs() < 1e-6);
}
