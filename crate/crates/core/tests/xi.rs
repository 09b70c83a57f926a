use lagnerve::a_infinity::*;
use lagnerve::cube_model::CollaredCube;
use lagnerve::dg_nerve::*;
use lagnerve::graded_zmod::*;
use lagnerve::planar_floer::*;
use lagnerve::rational::Q;
use lagnerve::xi_functor::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_dg(seed: u64, objects: usize, mode: CoefficientMode) -> DgCategory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cs: Vec<Complex> = (0..objects).map(|_| random_complex(&mut rng, 3)).collect();
    chain_complex_category(&cs, mode)
}

fn dg_case(seed: u64, objects: Vec<usize>, arity: usize) -> (AInfCategory, CobordismSimplex) {
    let dg = random_dg(seed, 2, CoefficientMode::Integers);
    let mut cat = dg.cat.clone();
    cat.max_arity = arity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    let s = CobordismSimplex::from_nerve(&random_simplex(&mut rng, &dg, objects));
    (cat, s)
}

fn basis(cat: &AInfCategory, a: usize, b: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; cat.hom(a, b).rank()];
    v[i] = 1;
    v
}

fn planar(params: StaircaseParams) -> (StaircaseConfig, AInfCategory) {
    let cfg = StaircaseConfig::new(params).unwrap();
    let mut cat = mu_d_counts(&cfg.curves, cfg.curves.len() - 1).unwrap().category;
    cat.max_arity = 4;
    (cfg, cat)
}

fn planar_grid() -> Vec<(StaircaseConfig, AInfCategory)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = vec![planar(StaircaseParams::standard(4))];
    for _ in 0..2 {
        out.push(planar(StaircaseParams::random(&mut rng, 4)));
    }
    out
}

#[test]
fn decomposition_shapes() {
    let (cat, _) = dg_case(1, vec![0, 1], 2);
    for n in 1..=3usize {
        let objects: Vec<usize> = (0..=n).map(|i| i % 2).collect();
        for x in 0..2 {
            let dec = ProductDecomposition::new(&cat, x, &objects);
            assert_eq!(dec.summands.len(), 1 << n);
            assert!(dec.summands.iter().all(|s| s.k[0] == 0));
            let total: usize = dec.summands.iter().map(|s| cat.hom(x, objects[*s.k.last().unwrap()]).rank()).sum();
            assert_eq!(dec.module.rank(), total);
            for s in &dec.summands {
                assert_eq!(s.shift(), s.k.len() as i32 - 1);
                let degs: Vec<i32> = s.base.degrees().iter().map(|d| d + s.shift()).collect();
                assert_eq!(&dec.module.degrees()[s.offset..s.offset + s.base.rank()], degs.as_slice());
                assert_eq!(dec.iota(&s.k).degree, s.shift());
                assert_eq!(dec.pi(&s.k).degree, -s.shift());
            }
            assert!(dec.id_cube_defect().unwrap().is_empty());
            let cube = CollaredCube::simplex(n);
            assert!(decompose(&cat, x, &cube, &objects, Q::from_integer(2)).is_ok());
        }
    }
}

#[test]
fn square_for_two_simplices() {
    let (cat, _) = dg_case(1, vec![0, 1], 2);
    let objects = [0, 1, 1];
    let dec = ProductDecomposition::new(&cat, 0, &objects);
    let ks: Vec<Vec<usize>> = dec.summands.iter().map(|s| s.k.clone()).collect();
    assert_eq!(ks, vec![vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 2]]);
    let expect = [(0, 0), (1, 1), (1, 2), (1, 1)];
    for (s, (y, sh)) in dec.summands.iter().zip(expect) {
        assert_eq!(s.base, *cat.hom(0, y));
        assert_eq!(s.shift(), sh);
    }
}

#[test]
fn shallow_staircase_is_rejected() {
    let (cat, _) = dg_case(1, vec![0, 1], 2);
    let cube = CollaredCube::simplex(1);
    let err = decompose(&cat, 0, &cube, &[0, 1], Q::from_integer(1)).unwrap_err();
    assert!(matches!(err, XiError::Depth { .. }));
}

#[test]
fn identity_edge_gives_the_unit() {
    let (cat, _) = dg_case(4, vec![0, 1], 3);
    for y in 0..2 {
        let s = CobordismSimplex::identity(1, y);
        let xi1 = xi_d(&cat, &s, 1);
        assert!(!xi1.is_empty());
        for m in xi1.values() {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let e = if i == j { sign(m.source.degree(j) as i64) } else { 0 };
                    assert_eq!(m.get(i, j), e);
                }
            }
        }
        for d in 2..=3 {
            assert!(xi_d(&cat, &s, d).values().all(|m| m.is_zero()));
        }
    }
}

#[test]
fn planar_edge_counts_triangles() {
    for (cfg, cat) in planar_grid() {
        let f = basis(&cat, 1, 2, 0);
        let s = CobordismSimplex::edge(1, 2, f);
        let xi1 = xi_d(&cat, &s, 1);
        let pts = intersections(&cfg.curves).unwrap();
        let at = |a: usize, b: usize| -> Vec<Pt> { pts.iter().filter(|p| p.curves == (a, b)).map(|p| p.location).collect() };
        let m = &xi1[&vec![0]];
        for (i, &out) in at(0, 2).iter().enumerate() {
            for (j, &x) in at(0, 1).iter().enumerate() {
                let data = CornerData { boundary: vec![0, 1, 2], corners: vec![out, x, at(1, 2)[0]] };
                let n = rigid_polygons(&cfg.curves, &data, Orientation::Clockwise).unwrap().len() as i64;
                assert_eq!(m.get(i, j), n % 2);
            }
        }
    }
}

#[test]
fn dg_simplices_pass_the_goal_equation() {
    let cases = [(1u64, vec![0, 1]), (2, vec![0, 1, 0]), (5, vec![1, 1, 0]), (3, vec![1, 0, 1, 0])];
    for (seed, objs) in cases {
        let arity = if objs.len() == 4 { 3 } else { 4 };
        let (cat, s) = dg_case(seed, objs, arity);
        s.validate(&cat).unwrap();
        let r = check_product_relations(&cat, &s, arity).unwrap();
        assert!(r.passed(), "module {:?}", r.failures.first());
        let c = build_xi_simplex(&cat, &s, arity);
        let r = check_goal_equation(&c, &cat, arity).unwrap();
        assert!(r.passed() && r.checked > 0, "goal {:?}", r.failures.first());
        let two = cat.reduced(CoefficientMode::ModTwo);
        let c2 = build_xi_simplex(&two, &s, arity);
        assert!(check_goal_equation(&c2, &two, arity).unwrap().passed());
    }
}

#[test]
fn planar_simplices_pass_the_goal_equation() {
    for (_, cat) in planar_grid() {
        let e = CobordismSimplex::edge(1, 2, basis(&cat, 1, 2, 0));
        let t = CobordismSimplex::triangle(&cat, [1, 2, 3], basis(&cat, 1, 2, 0), basis(&cat, 2, 3, 0));
        for s in [e, t] {
            s.validate(&cat).unwrap();
            assert!(check_product_relations(&cat, &s, 4).unwrap().passed());
            let c = build_xi_simplex(&cat, &s, 4);
            let r = check_goal_equation(&c, &cat, 4).unwrap();
            assert!(r.passed(), "{:?}", r.failures.first());
        }
    }
}

#[test]
fn zeroed_face_is_localized() {
    let (cat, s) = dg_case(2, vec![0, 1, 0], 3);
    let mut c = build_xi_simplex(&cat, &s, 3);
    assert!(!c.maps[&vec![0, 2]].is_zero());
    c.maps.insert(vec![0, 2], PreModuleMap::zero(0));
    let r = check_goal_equation(&c, &cat, 3).unwrap();
    assert!(!r.passed());
    assert!(r.failures.iter().all(|f| f.location.starts_with("K=[0, 1, 2]")));
}

#[test]
fn reduction_cases_partition() {
    for n in 1..=4 {
        for k in lagnerve::cube_model::subsets_with_zero(n) {
            for c in 0..=4 {
                assert_eq!(matching_reductions(n, &k, c).len(), 1, "K={:?} c={}", k, c);
            }
        }
    }
    assert_eq!(reduction(2, &[0, 2], 0), Reduction::Identity);
    assert_eq!(reduction(2, &[0, 2], 1), Reduction::Zero);
    assert_eq!(reduction(3, &[0, 2], 0), Reduction::Zero);
    assert_eq!(reduction(2, &[0, 1], 3), Reduction::FaceXi(vec![1, 2]));
    assert_eq!(reduction(2, &[0], 0), Reduction::FaceXi(vec![0, 1, 2]));
    assert_eq!(reduction(2, &[0, 1, 2], 2), Reduction::ModuleMu);
}

#[test]
fn table_matches_direct_blocks() {
    for (seed, objs) in [(2u64, vec![0, 1, 0]), (3, vec![1, 0, 1, 0])] {
        let (cat, s) = dg_case(seed, objs, 3);
        let r = check_reduction_table(&cat, &s, 3);
        assert!(r.passed() && r.checked > 0, "{:?}", r.failures.first());
    }
    for (_, cat) in planar_grid() {
        let t = CobordismSimplex::triangle(&cat, [1, 2, 3], basis(&cat, 1, 2, 0), basis(&cat, 2, 3, 0));
        assert!(check_reduction_table(&cat, &t, 3).passed());
    }
}

#[test]
fn face_maps_are_ambient_blocks() {
    let (cat, s) = dg_case(3, vec![1, 0, 1, 0], 2);
    for k in lagnerve::cube_model::subsets_with_zero(3).into_iter().filter(|k| k.len() >= 2) {
        let xi = xi_map(&cat, &s.face(&k), 2);
        let src = yoneda_module(&cat, s.objects[0]);
        for d in 1..=2 {
            for key in module_keys(&cat, &src, &yoneda_module(&cat, s.objects[*k.last().unwrap()]), d) {
                let ranks = cat.hom(key[d - 1], s.objects[0]).rank();
                for i in 0..ranks {
                    let x = basis(&cat, key[d - 1], s.objects[0], i);
                    let a_rank = if d == 2 { cat.hom(key[0], key[1]).rank() } else { 1 };
                    for j in 0..a_rank {
                        let a = if d == 2 { vec![basis(&cat, key[0], key[1], j)] } else { vec![] };
                        let a: Vec<&[i64]> = a.iter().map(|v| v.as_slice()).collect();
                        let block = chain_sum(&cat, &s, &[0], None, &key, &x, &a).remove(&k).unwrap_or_default();
                        let mut via = vec![0; cat.hom(key[0], s.objects[*k.last().unwrap()]).rank()];
                        let mut args = vec![x.as_slice()];
                        args.extend(a.iter());
                        xi.eval(&cat, &src, &key, &args, theta(k.len()), &mut via);
                        let block = if block.is_empty() { vec![0; via.len()] } else { block };
                        assert_eq!(block, via, "K={:?} key {:?}", k, key);
                    }
                }
            }
        }
    }
}

#[test]
fn corollary_replay_for_two_simplices() {
    let mut seen_faces = false;
    for (seed, objs) in [(2u64, vec![0, 1, 0]), (5, vec![1, 1, 0]), (9, vec![0, 0, 1])] {
        let (cat, s) = dg_case(seed, objs, 3);
        let r = replay_corollaries(&cat, &s, 3).unwrap();
        assert!(r.passed(), "{:?}", r.corollaries.iter().find_map(|c| c.mismatches.first()));
        assert_eq!(r.corollaries[2].nonzero, 0);
        seen_faces |= r.corollaries[0].nonzero > 0;
    }
    assert!(seen_faces);
    for (_, cat) in planar_grid() {
        let t = CobordismSimplex::triangle(&cat, [1, 2, 3], basis(&cat, 1, 2, 0), basis(&cat, 2, 3, 0));
        assert!(replay_corollaries(&cat, &t, 3).unwrap().passed());
    }
}

#[test]
fn stabilization_preserves_counts() {
    for (_, cat) in planar_grid() {
        let beta = StaircaseConfig::new(StaircaseParams::standard(2)).unwrap();
        // L0, L1 are test objects; L2, L3 and the cone tail are cobordism ends
        let slots = vec![0, 1, 2, 2, 2];
        let st = Stabilizer::new(&beta, slots.clone(), Q::from_integer(10)).unwrap();
        let t = CobordismSimplex::triangle(&cat, [2, 3, 4], basis(&cat, 2, 3, 0), basis(&cat, 3, 4, 0));
        let e = CobordismSimplex::edge(2, 3, basis(&cat, 2, 3, 0));
        let r = st.verify(&cat, &[e, t], 3).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!(r.fibers.iter().any(|(b, _)| b.len() == 3));
        let once = st.stabilize(&cat).unwrap();
        let twice = st.stabilize(&once).unwrap();
        for key in once.mu_keys() {
            assert_eq!(once.mu(key).unwrap().column(0), twice.mu(key).unwrap().column(0));
        }
        assert!(Stabilizer::new(&beta, slots, Q::from_integer(2)).is_err());
    }
}

#[test]
fn degenerate_edges_on_objects() {
    let (cat, _) = dg_case(4, vec![0, 1], 3);
    let (_, planar_cat) = planar(StaircaseParams::standard(3));
    for (c, objects) in [(&cat, 0..2), (&planar_cat, 0..4)] {
        for y in objects {
            let r = s0_object_check(c, y, 3, None).unwrap();
            assert!(r.passed(), "{:?}", r.failures.first());
            assert!(degenerate_simplex_check(c, y, 2, 3).unwrap().passed());
        }
    }
    // a perturbed identity with a nonzero second component
    let mut bad = build_xi_simplex(&cat, &CobordismSimplex::identity(1, 0), 3);
    let m = bad.maps.get_mut(&vec![0, 1]).unwrap();
    let key = module_keys(&cat, &yoneda_module(&cat, 0), &yoneda_module(&cat, 0), 2)
        .into_iter()
        .find(|k| {
            let ranks = cat.hom(k[1], 0).rank() * cat.hom(k[0], k[1]).rank();
            ranks > 0 && cat.hom(k[0], 0).rank() > 0
        })
        .unwrap();
    let src = tensor_all(&[cat.hom(key[1], 0), cat.hom(key[0], key[1])]);
    let tgt = cat.hom(key[0], 0).clone();
    let mut g = GradedMap::zero(src.clone(), tgt.clone(), -1);
    let (r, c) = (0..tgt.rank())
        .flat_map(|r| (0..src.rank()).map(move |c| (r, c)))
        .find(|&(r, c)| tgt.degree(r) == src.degree(c) - 1)
        .unwrap();
    g.set(r, c, 1);
    m.components.insert(key, g);
    assert!(!s0_object_check(&cat, 0, 3, Some(&bad)).unwrap().passed());
}

#[test]
fn simplex_round_trip() {
    let (cat, s) = dg_case(2, vec![0, 1, 0], 2);
    let text = serde_json::to_string(&s).unwrap();
    let back: CobordismSimplex = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
    let id = CobordismSimplex::identity(2, 1);
    let back: CobordismSimplex = serde_json::from_str(&serde_json::to_string(&id).unwrap()).unwrap();
    assert_eq!(back, id);
    let cube = CollaredCube::identity(1, &cat.objects[1]);
    assert_eq!(CobordismSimplex::bind_objects(&cube, &cat).unwrap(), vec![1, 1]);
    let cube = CollaredCube::identity(1, "nowhere");
    assert!(CobordismSimplex::bind_objects(&cube, &cat).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn random_dg_simplices(seed in 0u64..10_000, n in 1usize..=2, objs in proptest::collection::vec(0usize..2, 3)) {
        let objects = objs[..=n].to_vec();
        let (cat, s) = dg_case(seed, objects, 3);
        let c = build_xi_simplex(&cat, &s, 3);
        for (k, m) in &c.maps {
            prop_assert_eq!(m.degree, 2 - k.len() as i32);
            for (key, g) in &m.components {
                prop_assert_eq!(g.degree, m.degree - key.len() as i32 + 1);
            }
        }
        let r = check_goal_equation(&c, &cat, 3).unwrap();
        prop_assert!(r.passed(), "{:?}", r.failures.first());
    }
}
