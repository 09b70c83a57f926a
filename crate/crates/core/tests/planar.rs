use std::collections::BTreeSet;

use lagnerve::a_infinity::check_ainf_relations;
use lagnerve::planar_floer::*;
use lagnerve::rational::{q, qi};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn standard(d: usize) -> StaircaseConfig {
    StaircaseConfig::new(StaircaseParams::standard(d)).unwrap()
}

fn grid() -> Vec<StaircaseConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for d in 1..=4 {
        out.push(standard(d));
        for _ in 0..4 {
            out.push(StaircaseConfig::new(StaircaseParams::random(&mut rng, d)).unwrap());
        }
    }
    out
}

#[test]
fn staircase_pairs_meet_once() {
    let cfg = standard(4);
    let xs = intersections(&cfg.curves).unwrap();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let n = xs.iter().filter(|x| x.curves == (i, j)).count();
            assert_eq!(n, 1, "gamma_{} and gamma_{}", i, j);
        }
        assert_eq!(xs.iter().filter(|x| x.curves == (i, 4)).count(), 2);
    }
}

#[test]
fn single_staircase_is_valid() {
    let cfg = standard(1);
    assert_eq!(cfg.curves.len(), 2);
    assert_eq!(cfg.gammas()[0].grading_lift.len(), 3);
}

#[test]
fn staircase_constraints_are_named() {
    let mut p = StaircaseParams::standard(2);
    p.eps[0] = p.widths[0] - p.widths[1];
    match build_staircase(&p) {
        Err(PlanarError::Staircase { constraint, index }) => {
            assert_eq!(constraint, "eps_i < w_i - w_{i+1}");
            assert_eq!(index, Some(0));
        }
        other => panic!("{:?}", other),
    }
    let mut p = StaircaseParams::standard(3);
    p.depths.swap(0, 1);
    assert!(matches!(build_staircase(&p), Err(PlanarError::Staircase { ref constraint, .. }) if constraint == "D_i increasing"));
    let mut p = StaircaseParams::standard(2);
    p.widths[1] = p.w;
    assert!(matches!(build_staircase(&p), Err(PlanarError::Staircase { ref constraint, .. }) if constraint == "w_i > w"));
    let mut p = StaircaseParams::standard(2);
    p.heights[0] = -p.depths[0];
    assert!(matches!(build_staircase(&p), Err(PlanarError::Staircase { ref constraint, .. }) if constraint == "h_i > -D_i"));
    assert_eq!(build_conetail(qi(1), qi(1)), Err(PlanarError::ConeTail));
}

#[test]
fn cone_tail_shape() {
    let c = build_conetail(qi(1), q(1, 2)).unwrap();
    assert_eq!(c.mirrored(), c);
    let probe = PLCurve::new(CurveKind::TestCurve, vec![pt(qi(0), qi(1))], Some(pt(qi(0), qi(1))), Some(pt(qi(0), qi(1))), 0).unwrap();
    let xs = intersections(&[c.clone(), probe]).unwrap();
    assert_eq!(xs.len(), 1);
    assert!(matches!(intersections(&[c, vertical_line(qi(1))]), Err(PlanarError::Tangency { .. })));
}

#[test]
fn parallel_flats_do_not_meet() {
    let a = PLCurve::new(CurveKind::TestCurve, vec![pt(qi(0), qi(0))], Some(pt(qi(1), qi(0))), Some(pt(qi(1), qi(0))), 0).unwrap();
    let b = PLCurve::new(CurveKind::TestCurve, vec![pt(qi(0), qi(1))], Some(pt(qi(1), qi(0))), Some(pt(qi(1), qi(0))), 0).unwrap();
    assert!(intersections(&[a, b]).unwrap().is_empty());
}

#[test]
fn crossing_at_a_vertex_is_rejected() {
    let a = PLCurve::new(CurveKind::TestCurve, vec![pt(qi(0), qi(0))], Some(pt(qi(1), qi(0))), Some(pt(qi(1), qi(0))), 0).unwrap();
    let b = PLCurve::new(CurveKind::TestCurve, vec![pt(qi(0), qi(-1)), pt(qi(0), qi(0)), pt(qi(1), qi(1))], None, None, 0).unwrap();
    assert!(matches!(intersections(&[a, b]), Err(PlanarError::VertexCrossing { .. })));
}

#[test]
fn self_crossing_curve_is_rejected() {
    let r = PLCurve::new(
        CurveKind::TestCurve,
        vec![pt(qi(0), qi(0)), pt(qi(2), qi(0)), pt(qi(1), qi(1)), pt(qi(1), qi(-1))],
        None,
        None,
        0,
    );
    assert!(matches!(r, Err(PlanarError::NotEmbedded { .. })));
}

#[test]
fn grading_lifts() {
    let cfg = standard(2);
    let g = &cfg.gammas()[0];
    assert_eq!(g.grading_lift.iter().map(|p| p.half_turns).collect::<Vec<_>>(), vec![0, 0, 0]);
    let c = cfg.cone();
    assert_eq!(c.grading_lift.iter().map(|p| p.half_turns).collect::<Vec<_>>(), vec![0, 0, -1]);
}

#[test]
fn cone_tail_crossings_differ_by_one() {
    for cfg in grid() {
        let d = cfg.d();
        let xs = intersections(&cfg.curves).unwrap();
        for i in 0..d {
            let pair: Vec<&IntersectionPoint> = xs.iter().filter(|x| x.curves == (i, d)).collect();
            assert_eq!(pair.len(), 2);
            assert!(pair[0].location.q < pair[1].location.q);
            assert_eq!(pair[1].degree - pair[0].degree, 1);
            assert_eq!(pair[0].degree, 0);
        }
        assert!(xs.iter().filter(|x| x.curves.1 < d).all(|x| x.degree == 0));
    }
}

#[test]
fn region_r_for_two_curves() {
    let cfg = standard(2);
    let r = regions(&cfg, RegionVariant::R);
    assert_eq!(r.faces.len(), 1);
    let arcs = r.boundary_arcs();
    let labels: BTreeSet<usize> = arcs[0].iter().flat_map(|s| s.iter().copied()).collect();
    assert_eq!(labels, BTreeSet::from([0, 1, WALL_LABEL]));
    assert_eq!(arcs[0].len(), 3);
    assert!(r.faces[0].holes.is_empty());
}

#[test]
fn empty_configuration_has_empty_region() {
    let r = Region::from_curves(RegionVariant::R, &[], &[]);
    assert!(r.is_empty());
    let one = Region::from_curves(RegionVariant::R, &[(0, vertical_line(qi(1)))], &[]);
    assert!(one.is_empty());
}

#[test]
fn double_prime_region_holds_the_cone_crossings() {
    for cfg in grid() {
        let r = regions(&cfg, RegionVariant::RDoublePrime);
        let xs = intersections(&cfg.curves).unwrap();
        for x in xs.iter().filter(|x| x.curves.1 == cfg.d()) {
            assert!(r.contains(x.location));
        }
        assert!(r.contains_region(&regions(&cfg, RegionVariant::R)));
        assert!(r.contains_region(&regions(&cfg, RegionVariant::RPrime)));
    }
}

#[test]
fn classification() {
    let w = qi(1);
    let l = pt(qi(-1), qi(-2));
    let r = pt(qi(2), qi(-2));
    assert_eq!(classify_corner_data(&[r, r, r], w), CornerType::Type1);
    assert_eq!(classify_corner_data(&[l, r, l], w), CornerType::Type2);
    assert_eq!(classify_corner_data(&[l, r, r], w), CornerType::Type3);
    assert_eq!(classify_corner_data(&[r, l, r], w), CornerType::Other);
    assert_eq!(classify_corner_data(&[l, l], w), CornerType::Type2);
}

fn polygons_for(cfg: &StaircaseConfig, x0_left: bool, xd_left: bool) -> (CornerType, Vec<Polygon>, CornerData) {
    let data = staircase_corner_data(cfg, x0_left, xd_left).unwrap();
    let kind = classify_corner_data(&data.corners, cfg.params.w);
    let polys = enumerate_polygons(&cfg.curves, &data).unwrap();
    (kind, polys, data)
}

#[test]
fn type_one_and_two_have_one_disk() {
    for cfg in grid() {
        let d = cfg.d();
        for (left, kind, variant) in [(false, CornerType::Type1, RegionVariant::R), (true, CornerType::Type2, RegionVariant::RPrime)] {
            let (k, polys, data) = polygons_for(&cfg, left, left);
            assert_eq!(k, kind);
            assert_eq!(polys.len(), 1, "{:?} d={}", kind, d);
            let p = &polys[0];
            if d == 1 {
                assert!(p.constant);
                continue;
            }
            assert_eq!(p.orientation, Orientation::Clockwise);
            // one slit direction per intermediate corner past the first
            assert_eq!(p.reflex.len(), d - 2);
            assert_eq!(p.is_rigid(), d == 2);
            let region = regions(&cfg, variant);
            let conf = confinement(&cfg, &data).unwrap();
            assert!(conf.same_set(&region));
            assert!(conf.contains_polygon(p));
            assert_eq!(p.area, region.area());
        }
    }
}

#[test]
fn type_three_counts() {
    for cfg in grid() {
        let d = cfg.d();
        let (k, polys, data) = polygons_for(&cfg, true, false);
        assert_eq!(k, CornerType::Type3);
        if d == 1 {
            // one strip from the left crossing to the right one
            assert_eq!(polys.len(), 1);
            assert!(polys[0].is_rigid());
            let conf = confinement(&cfg, &data).unwrap();
            assert!(conf.same_set(&regions(&cfg, RegionVariant::RDoublePrime)));
            assert!(conf.contains_polygon(&polys[0]));
        } else {
            assert!(polys.is_empty());
            let conf = confinement(&cfg, &data).unwrap();
            assert!(regions(&cfg, RegionVariant::RDoublePrime).contains_region(&conf));
        }
    }
}

#[test]
fn strips_give_the_identity_matrix() {
    for cfg in grid().into_iter().filter(|c| c.d() == 1) {
        let xs = intersections(&cfg.curves).unwrap();
        let left: Vec<Pt> = xs.iter().filter(|x| x.location.q < cfg.params.w).map(|x| x.location).collect();
        let right: Vec<Pt> = xs.iter().filter(|x| x.location.q >= cfg.params.w).map(|x| x.location).collect();
        let matrix: Vec<Vec<usize>> = left
            .iter()
            .map(|&a| {
                right
                    .iter()
                    .map(|&b| {
                        let data = CornerData { boundary: vec![0, 1], corners: vec![a, b] };
                        enumerate_polygons(&cfg.curves, &data).unwrap().iter().filter(|p| p.is_rigid() && !p.constant).count()
                    })
                    .collect()
            })
            .collect();
        assert_eq!(matrix, vec![vec![1]]);
    }
}

#[test]
fn confinement_shrinks_step_by_step() {
    for cfg in grid().into_iter().filter(|c| c.d() >= 2).take(6) {
        for (a, b) in [(false, false), (true, true), (true, false)] {
            let data = staircase_corner_data(&cfg, a, b).unwrap();
            let kind = classify_corner_data(&data.corners, cfg.params.w);
            let steps = confinement_steps(&cfg.curves, &stripping_wall(&cfg, kind), &data).unwrap();
            assert_eq!(steps.len(), cfg.d() + 2);
            for w in steps.windows(2) {
                assert!(w[0].contains_region(&w[1]));
            }
        }
    }
}

#[test]
fn mirrored_configuration_swaps_sides() {
    let cfg = standard(2);
    let r = regions(&cfg, RegionVariant::RDoublePrime);
    let c = cfg.cone();
    assert_eq!(&c.mirrored(), c);
    assert!(r.contains(pt(-cfg.params.w, -cfg.params.depths[0])));
    assert!(r.contains(pt(cfg.params.w, -cfg.params.depths[0])));
}

#[test]
fn triangle_on_three_staircase_curves() {
    let cfg = standard(3);
    let pc = mu_d_counts(cfg.gammas(), 2).unwrap();
    assert_eq!(pc.polygons.len(), 1);
    let (key, poly) = &pc.polygons[0];
    assert_eq!(key, &vec![0, 1, 2]);
    assert!(poly.is_rigid());
    let cat = &pc.category;
    let out = cat.mu_entry(&[0, 1, 2], 0, &[0, 0]);
    assert_eq!(out, 1);
    // no bigons between staircase curves
    assert_eq!(cat.mu_entry(&[0, 1], 0, &[0]), 0);
}

#[test]
fn worked_products_with_the_cone_tail() {
    let cfg = standard(2);
    let pc = mu_d_counts(&cfg.curves, 3).unwrap();
    let cat = &pc.category;
    // generators of hom(gamma_i, c) are sorted left then right
    assert_eq!(cat.mu_entry(&[0, 1, 2], 0, &[0, 0]), 1);
    assert_eq!(cat.mu_entry(&[0, 1, 2], 1, &[1, 0]), 1);
    assert_eq!(cat.mu_entry(&[0, 1, 2], 0, &[1, 0]), 0);
    assert_eq!(cat.mu_entry(&[0, 1, 2], 1, &[0, 0]), 0);
    assert_eq!(cat.mu_entry(&[0, 2], 1, &[0]), 1);
    assert_eq!(cat.mu_entry(&[0, 2], 0, &[1]), 0);
    assert!(check_ainf_relations(cat, 3).unwrap().failures.is_empty());
}

#[test]
fn generated_categories_satisfy_the_relations() {
    for cfg in grid() {
        let pc = mu_d_counts(&cfg.curves, cfg.d() + 1).unwrap();
        let report = check_ainf_relations(&pc.category, cfg.d() + 1).unwrap();
        assert!(report.failures.is_empty(), "d={} {:?}", cfg.d(), report.failures);
        for (_, p) in &pc.polygons {
            assert!(p.is_rigid() && p.orientation == Orientation::Clockwise);
        }
    }
}

#[test]
fn poset_with_two_inputs() {
    let p = broken_disk_poset(2, 2);
    assert_eq!(p.names(), vec!["(**)", "(*(*))", "((*)*)", "((**))"]);
    let expected: BTreeSet<BTreeSet<usize>> = [vec![], vec![0, 1, 2, 3], vec![1], vec![2], vec![3]]
        .into_iter()
        .map(|v| v.into_iter().collect())
        .collect();
    let gens: BTreeSet<BTreeSet<usize>> = p.closed_generators.iter().cloned().chain([BTreeSet::new(), p.all()]).collect();
    assert_eq!(gens, expected);
    assert!(p.is_open(&BTreeSet::from([0])));
    assert!(!p.closed_sets().contains(&BTreeSet::from([0])));
    assert_eq!(broken_disk_poset(2, 1).elements.len(), 1);
}

#[test]
fn broken_strips() {
    for k in 1..=5 {
        let p = broken_disk_poset(1, k);
        assert_eq!(p.elements.len(), k);
        for (i, t) in p.elements.iter().enumerate() {
            assert_eq!(t.components(), i + 1);
        }
        let opens: BTreeSet<BTreeSet<usize>> = p.closed_sets().iter().map(|c| p.all().difference(c).copied().collect()).collect();
        let segments: BTreeSet<BTreeSet<usize>> = (0..=k).map(|n| (0..n).collect()).collect();
        assert_eq!(opens, segments);
        // every open set contains the generizations of its points
        for u in &opens {
            for &x in u {
                assert!(p.closure(x).iter().all(|y| *y >= x));
            }
        }
    }
}

#[test]
fn svg_output() {
    let cfg = standard(2);
    let r = regions(&cfg, RegionVariant::R);
    let data = staircase_corner_data(&cfg, false, false).unwrap();
    let polys = enumerate_polygons(&cfg.curves, &data).unwrap();
    let s = svg(&cfg.curves, &[&r], &polys.iter().collect::<Vec<_>>());
    assert!(s.starts_with("<svg"));
    assert_eq!(s.matches("<circle").count(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn random_staircases(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = StaircaseConfig::new(StaircaseParams::random(&mut rng, d)).unwrap();
        let pc = mu_d_counts(&cfg.curves, d + 1).unwrap();
        prop_assert!(check_ainf_relations(&pc.category, d + 1).unwrap().failures.is_empty());
        for (a, b) in [(false, false), (true, true), (true, false)] {
            let data = staircase_corner_data(&cfg, a, b).unwrap();
            let conf = confinement(&cfg, &data).unwrap();
            for p in enumerate_polygons(&cfg.curves, &data).unwrap() {
                if !p.constant {
                    prop_assert!(conf.contains_polygon(&p));
                }
            }
        }
    }
}
