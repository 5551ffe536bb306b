use lrf_core::geom::{RigidTransform, TriangleMesh};
use lrf_core::io::{
    load_manifest, parse_obj, parse_pose, read_ply, write_obj, write_ply, write_pose, Geometry, PlyEncoding,
    PoseConvention, SyntheticSpec,
};
use lrf_core::Vec3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mesh_strategy() -> impl Strategy<Value = TriangleMesh<f64>> {
    (3usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::array::uniform3(-1e3..1e3f64), n),
            prop::collection::vec(prop::sample::subsequence((0..n).collect::<Vec<_>>(), 3), 1..30),
        )
            .prop_map(|(v, t)| {
                let verts = v.into_iter().map(Vec3::from_f64).collect();
                let tris = t.into_iter().map(|s| [s[0], s[2], s[1]]).collect();
                TriangleMesh::new(verts, tris).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ply_round_trips_exactly(mesh in mesh_strategy(), binary in any::<bool>()) {
        let enc = if binary { PlyEncoding::BinaryLittleEndian } else { PlyEncoding::Ascii };
        let g = Geometry::from(mesh);
        let mut buf = Vec::new();
        write_ply(&mut buf, &g, enc).unwrap();
        let back: Geometry<f64> = read_ply(&buf, "mem").unwrap();
        prop_assert_eq!(back.points(), g.points());
        prop_assert_eq!(back.triangles(), g.triangles());
    }

    #[test]
    fn obj_round_trips_exactly(mesh in mesh_strategy()) {
        let g = Geometry::from(mesh);
        let mut buf = Vec::new();
        write_obj(&mut buf, &g).unwrap();
        let back: Geometry<f64> = parse_obj(std::str::from_utf8(&buf).unwrap(), "mem").unwrap();
        prop_assert_eq!(back.points(), g.points());
        prop_assert_eq!(back.triangles(), g.triangles());
    }

    #[test]
    fn pose_text_round_trips(seed in any::<u64>()) {
        let t = RigidTransform::<f64>::random(&mut ChaCha8Rng::seed_from_u64(seed), 500.0);
        let mut buf = Vec::new();
        write_pose(&mut buf, &t).unwrap();
        let back: RigidTransform<f64> =
            parse_pose(std::str::from_utf8(&buf).unwrap(), "mem", PoseConvention::default()).unwrap();
        prop_assert!((*back.rotation() - *t.rotation()).max_abs() < 1e-12);
        prop_assert!((back.translation() - t.translation()).max_abs() < 1e-9);
    }
}

#[test]
fn synthetic_pair_written_by_hand_reloads_through_a_manifest() {
    let pair = lrf_core::io::generate_synthetic::<f64>(&SyntheticSpec {
        density: 900,
        seed: 4,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let model = Geometry::from(pair.model.mesh().unwrap().clone());
    let scene = Geometry::from(pair.scene.mesh().unwrap().clone());
    lrf_core::io::save_ply(p.join("m.ply"), &model, PlyEncoding::Ascii).unwrap();
    lrf_core::io::save_obj(p.join("s.obj"), &scene).unwrap();
    lrf_core::io::save_pose(p.join("gt.txt"), &pair.gt).unwrap();
    std::fs::write(
        p.join("set.toml"),
        "name = \"hand\"\n\n[[pair]]\nmodel = \"m.ply\"\nscene = \"s.obj\"\ngt = \"gt.txt\"\n",
    )
    .unwrap();
    let loaded = load_manifest::<f64>(p.join("set.toml"), None).unwrap();
    assert!(loaded.errors.is_empty(), "{:?}", loaded.errors);
    let back = &loaded.pairs[0];
    assert_eq!(back.scene.len(), pair.scene.len());
    assert!((back.mr - pair.mr).abs() < 1e-12);
    assert!((*back.gt.rotation() - *pair.gt.rotation()).max_abs() < 1e-12);
}
