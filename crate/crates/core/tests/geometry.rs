use std::path::PathBuf;

use ifsnet::geometry::systems::{cantor, koch, sierpinski};
use ifsnet::geometry::{
    compute_inverse_bound, compute_separation, ifs_to_string, load_ifs, lp_max_min_affine,
    map_polytope, parse_ifs, verify_nice, AffineMap, BoxDomain, ConvexPolytope, HalfSpace,
    IfsSystem, Mode, PolytopeUnion,
};
use ifsnet::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn interval(lo: f64, hi: f64) -> ConvexPolytope {
    ConvexPolytope::from_box(&BoxDomain::new(vec![lo], vec![hi]).unwrap()).unwrap()
}

fn line(a: f64, b: f64) -> AffineMap {
    AffineMap::from_rows(&[vec![a]], &[b]).unwrap()
}

#[test]
fn apply_examples() {
    let c = cantor();
    assert_eq!(c.maps()[0].apply(&[0.0]).unwrap(), vec![0.0]);
    assert_eq!(c.maps()[1].apply(&[1.0]).unwrap(), vec![1.0]);
    assert_eq!(
        sierpinski().maps()[0].apply(&[0.0, 0.0]).unwrap(),
        vec![0.0, 0.0]
    );
    assert!(matches!(
        c.maps()[0].apply(&[0.0, 1.0]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn inverse_examples() {
    let c = cantor();
    let g1 = c.maps()[0].invert().unwrap();
    let g2 = c.maps()[1].invert().unwrap();
    assert!(g1.max_abs_diff(&line(3.0, 0.0)) < 1e-15);
    assert!(g2.max_abs_diff(&line(3.0, -2.0)) < 1e-15);
    assert!(matches!(
        line(0.0, 1.0).invert(),
        Err(Error::SingularMap { .. })
    ));
    let k = koch();
    for f in k.maps() {
        assert!(f.invert().unwrap().invert().unwrap().max_abs_diff(f) < 1e-14);
    }
}

#[test]
fn map_polytope_examples() {
    let c = cantor();
    let img = map_polytope(&c.maps()[0], &interval(0.0, 1.0)).unwrap();
    assert_eq!(img.facet_count(), 2);
    for (x, inside) in [
        (0.0, true),
        (1.0 / 3.0, true),
        (0.2, true),
        (0.34, false),
        (-0.01, false),
    ] {
        assert_eq!(img.contains(&[x], 1e-12), inside, "x = {x}");
    }
    // 1 − 3y ≥ 0 is 1/3 − y ≥ 0 up to a positive factor
    let h = img
        .halfspaces()
        .iter()
        .find(|h| h.normal()[0] < 0.0)
        .unwrap();
    assert!((h.offset() / -h.normal()[0] - 1.0 / 3.0).abs() < 1e-15);

    let id = map_polytope(&AffineMap::identity(1), &interval(0.0, 1.0)).unwrap();
    assert_eq!(id.vertices(), interval(0.0, 1.0).vertices());

    let s = sierpinski();
    let tri = &s.seed().parts()[0];
    let img = map_polytope(&s.maps()[0], tri).unwrap();
    let v = tri.vertices();
    let mid = |a: &[f64], b: &[f64]| vec![(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let expected = [v[0].clone(), mid(&v[0], &v[1]), mid(&v[0], &v[2])];
    for e in &expected {
        assert!(img
            .vertices()
            .iter()
            .any(|w| (w[0] - e[0]).abs() < 1e-15 && (w[1] - e[1]).abs() < 1e-15));
    }
}

#[test]
fn certification_examples() {
    verify_nice(&cantor()).unwrap();
    let cert = verify_nice(&sierpinski()).unwrap();
    assert!(cert.min_margin() > -1e-9);
    let overlapping = IfsSystem::new(
        vec![line(0.5, 0.0), line(0.5, 0.25)],
        PolytopeUnion::single(interval(0.0, 1.0)),
        Mode::TotallyDisconnected,
    )
    .unwrap();
    match verify_nice(&overlapping) {
        Err(Error::SeparationViolation {
            first,
            second,
            witness,
            ..
        }) => {
            assert_eq!((first, second), (1, 2));
            assert!(witness[0] >= 0.25 - 1e-9 && witness[0] <= 0.5 + 1e-9);
        }
        other => panic!("expected a separation violation, got {other:?}"),
    }
    let escaping = IfsSystem::new(
        vec![line(0.5, 0.0), line(0.5, 0.75)],
        PolytopeUnion::single(interval(0.0, 1.0)),
        Mode::TotallyDisconnected,
    )
    .unwrap();
    assert!(matches!(
        verify_nice(&escaping),
        Err(Error::ContainmentViolation {
            map: 2,
            part: 1,
            ..
        })
    ));
}

#[test]
fn inverse_bounds() {
    let c = cantor();
    assert!((compute_inverse_bound(&c, 0).unwrap() - 3.0).abs() < 1e-14);
    assert!((compute_inverse_bound(&c, 1).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn separation_matches_a_dense_grid() {
    let c = cantor();
    let img0 = c.image(0);
    let n = 100_000;
    let grid_max = (0..=n)
        .map(|i| img0.indicator(&[2.0 / 3.0 + i as f64 / n as f64 / 3.0]))
        .fold(f64::NEG_INFINITY, f64::max);
    let delta = compute_separation(&c, 0).unwrap();
    assert!((delta - 1.0 / 3.0).abs() < 1e-12);
    assert!((delta + grid_max).abs() < 1e-9);
    assert!((compute_separation(&c, 1).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!(matches!(
        compute_separation(&sierpinski(), 0),
        Err(Error::NonPositiveSeparation { .. })
    ));
}

#[test]
fn lp_examples() {
    let hs = |a: f64, b: f64| HalfSpace::new(vec![a], b).unwrap();
    let v = lp_max_min_affine(
        &[hs(1.0, 0.0), hs(-1.0, 1.0 / 3.0)],
        &interval(2.0 / 3.0, 1.0),
    )
    .unwrap();
    assert!((v.value + 1.0 / 3.0).abs() < 1e-12);
    assert!(
        (lp_max_min_affine(&[hs(1.0, 0.0)], &interval(0.0, 1.0))
            .unwrap()
            .value
            - 1.0)
            .abs()
            < 1e-12
    );
    let sym = lp_max_min_affine(&[hs(1.0, 0.0), hs(-1.0, 0.0)], &interval(-1.0, 1.0)).unwrap();
    assert!(sym.value.abs() < 1e-12 && sym.point[0].abs() < 1e-12);
}

#[test]
fn fixtures_match_builtins() {
    for (name, sys) in [
        ("cantor.ifs", cantor()),
        ("sierpinski.ifs", sierpinski()),
        ("koch.ifs", koch()),
    ] {
        let loaded = load_ifs(&fixture(name)).unwrap();
        assert_eq!(loaded.mode(), sys.mode());
        for (a, b) in loaded.maps().iter().zip(sys.maps()) {
            assert_eq!(a.max_abs_diff(b), 0.0, "{name}");
        }
        verify_nice(&loaded).unwrap();
    }
    for name in [
        "cantor_lifted.ifs",
        "sierpinski_lifted.ifs",
        "koch_lifted.ifs",
    ] {
        let sys = load_ifs(&fixture(name)).unwrap();
        assert_eq!(sys.mode(), Mode::TotallyDisconnected);
        verify_nice(&sys).unwrap();
    }
}

#[test]
fn file_round_trip_is_bit_exact() {
    for sys in [cantor(), sierpinski(), koch()] {
        let text = ifs_to_string(&sys);
        let back = parse_ifs(&text).unwrap();
        assert_eq!(ifs_to_string(&back), text);
        for (a, b) in back.maps().iter().zip(sys.maps()) {
            assert_eq!(a.max_abs_diff(b), 0.0);
        }
    }
}

#[test]
fn parse_errors_name_the_field() {
    let good = ifs_to_string(&cantor());
    let bad_row = good.replacen("\"A\":[[", "\"A\":[[1.0,", 1);
    match parse_ifs(&bad_row) {
        Err(Error::Parse { context, .. }) => assert_eq!(context, "maps[0].A[0]"),
        other => panic!("{other:?}"),
    }
    match parse_ifs("{\"dimension\": 1,\n \"mode\": \"compact\",\n \"maps\": [}") {
        Err(Error::Parse { context, .. }) => assert!(context.starts_with("line 3"), "{context}"),
        other => panic!("{other:?}"),
    }
    let bad_mode = good.replace("\"compact\"", "\"closed\"");
    assert!(matches!(parse_ifs(&bad_mode), Err(Error::Parse { context, .. }) if context == "mode"));
    let unknown = good.replacen("{", "{\"colour\":1,", 1);
    assert!(matches!(parse_ifs(&unknown), Err(Error::Parse { .. })));
    assert!(matches!(
        load_ifs(&fixture("missing.ifs")),
        Err(Error::Io(_))
    ));
}

#[test]
fn non_contractive_maps_are_rejected() {
    let r = IfsSystem::new(
        vec![line(1.5, 0.0), line(0.5, 0.5)],
        PolytopeUnion::single(interval(0.0, 1.0)),
        Mode::TotallyDisconnected,
    );
    assert!(matches!(r, Err(Error::NotContractive { map: 1, .. })));
}
