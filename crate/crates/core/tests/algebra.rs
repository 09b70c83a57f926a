use lagnerve::a_infinity::*;
use lagnerve::dg_nerve::*;
use lagnerve::graded_zmod::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn random_dg(seed: u64, objects: usize, mode: CoefficientMode) -> DgCategory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cs: Vec<Complex> = (0..objects).map(|_| random_complex(&mut rng, 3)).collect();
    chain_complex_category(&cs, mode)
}

#[test]
fn chain_complex_category_is_dg() {
    for seed in 0..5 {
        let dg = random_dg(seed, 2, CoefficientMode::Integers);
        let r = check_ainf_relations(&dg.cat, 2).unwrap();
        assert!(r.passed(), "{:?}", r.failures.first());
        assert!(r.checked > 0);
    }
}

#[test]
fn perturbed_mu2_fails_at_arity_three() {
    let cs = vec![Complex { degrees: vec![0, 0], d: vec![vec![0, 0], vec![0, 0]] }];
    let mut cat = chain_complex_category(&cs, CoefficientMode::Integers).cat;
    cat.max_arity = 3;
    assert!(check_ainf_relations(&cat, 3).unwrap().passed());
    let h = cat.hom(0, 0).clone();
    let (e00, e01) = (h.index_of("E0_0").unwrap(), h.index_of("E0_1").unwrap());
    // mu2(E0_0, E0_1) += E0_1
    cat.add_mu_entry(&[0, 0, 0], e01, &[e00, e01], 1);
    assert!(check_ainf_relations(&cat, 2).unwrap().passed());
    let r = check_ainf_relations(&cat, 3).unwrap();
    assert!(!r.passed());
    assert!(r.failures.iter().all(|f| f.location.starts_with("d=3")));
}

#[test]
fn yoneda_modules_satisfy_relations() {
    let dg = random_dg(11, 3, CoefficientMode::Integers);
    let mut cat = dg.cat.clone();
    cat.max_arity = 3;
    for y in 0..3 {
        let m = yoneda_module(&cat, y);
        let r = check_module_relations(&cat, &m, 3).unwrap();
        assert!(r.passed(), "{:?}", r.failures.first());
    }
}

#[test]
fn broken_module_fails_at_arity_one() {
    let dg = random_dg(5, 1, CoefficientMode::Integers);
    let mut m = yoneda_module(&dg.cat, 0);
    let v = m.values[0].clone();
    // an odd "differential" mapping each basis element to itself plus the degree +1 partners
    let mut g = GradedMap::zero(v.clone(), v.clone(), 1);
    for r in 0..v.rank() {
        for c in 0..v.rank() {
            if v.degree(r) == v.degree(c) + 1 {
                g.set(r, c, 1);
            }
        }
    }
    if g.is_zero() {
        return;
    }
    m.mu.components.insert(vec![0], g);
    let r = check_module_relations(&dg.cat, &m, 1).unwrap();
    assert!(!r.passed());
}

#[test]
fn mu1_squares_to_zero_and_leibniz() {
    for mode in [CoefficientMode::Integers, CoefficientMode::ModTwo] {
        let dg = random_dg(21, 2, mode);
        let mut cat = dg.cat.clone();
        cat.max_arity = 3;
        let ms: Vec<AInfModule> = (0..2).map(|y| yoneda_module(&cat, y)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for deg in -1..=1 {
            let t = random_premodule(&mut rng, &cat, &ms[0], &ms[1], deg, 3).reduced(mode);
            let mt = mu1(&cat, &ms[0], &ms[1], &t, 3);
            let mmt = mu1(&cat, &ms[0], &ms[1], &mt, 3);
            assert!(mmt.is_zero(), "mu1 mu1 != 0 in {:?}", mode);
            let t2 = random_premodule(&mut rng, &cat, &ms[1], &ms[0], 1 - deg, 3).reduced(mode);
            // mu1 mu2(t2,t1) + mu2(t2, mu1 t1) + (-1)^{|t1|-1} mu2(mu1 t2, t1) = 0
            let lhs = mu1(&cat, &ms[0], &ms[0], &mu2(&cat, &ms[0], &ms[1], &ms[0], &t2, &t, 3), 3);
            let b = mu2(&cat, &ms[0], &ms[1], &ms[0], &t2, &mu1(&cat, &ms[0], &ms[1], &t, 3), 3);
            let c = mu2(&cat, &ms[0], &ms[1], &ms[0], &mu1(&cat, &ms[1], &ms[0], &t2, 3), &t, 3);
            let total = lhs
                .add_scaled(&b, 1)
                .unwrap()
                .add_scaled(&c, sign(deg as i64 - 1))
                .unwrap()
                .reduced(mode);
            assert!(total.is_zero(), "Leibniz fails in {:?}", mode);
        }
    }
}

#[test]
fn unit_is_closed_and_two_sided() {
    let dg = random_dg(8, 2, CoefficientMode::Integers);
    let mut cat = dg.cat.clone();
    cat.max_arity = 3;
    let ms: Vec<AInfModule> = (0..2).map(|y| yoneda_module(&cat, y)).collect();
    let u0 = unit(&ms[0]);
    let u1 = unit(&ms[1]);
    assert!(mu1(&cat, &ms[0], &ms[0], &u0, 3).is_zero());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for deg in -1..=1 {
        let t = random_premodule(&mut rng, &cat, &ms[0], &ms[1], deg, 3);
        let right = mu2(&cat, &ms[0], &ms[0], &ms[1], &t, &u0, 3);
        assert!(right.add_scaled(&t, -1).unwrap().is_zero());
        let left = mu2(&cat, &ms[0], &ms[1], &ms[1], &u1, &t, 3);
        assert!(left.add_scaled(&t, -sign(deg as i64)).unwrap().is_zero());
    }
}

#[test]
fn mu1_arity_one_formula() {
    let dg = random_dg(13, 2, CoefficientMode::Integers);
    let cat = &dg.cat;
    let ms: Vec<AInfModule> = (0..2).map(|y| yoneda_module(cat, y)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = random_premodule(&mut rng, cat, &ms[0], &ms[1], 0, 1);
    let mt = mu1(cat, &ms[0], &ms[1], &t, 1);
    for x in 0..2 {
        let v = ms[0].value(x);
        let t1 = t.component(&[x]);
        let d0 = ms[0].mu.component(&[x]);
        let d1 = ms[1].mu.component(&[x]);
        for i in 0..v.rank() {
            let e: Vec<i64> = (0..v.rank()).map(|k| (k == i) as i64).collect();
            let tx = t1.map(|m| m.apply(&e)).unwrap_or(vec![0; ms[1].value(x).rank()]);
            let a = d1.map(|m| m.apply(&tx)).unwrap_or(vec![0; tx.len()]);
            let dx = d0.map(|m| m.apply(&e)).unwrap_or(vec![0; v.rank()]);
            let b = t1.map(|m| m.apply(&dx)).unwrap_or(vec![0; tx.len()]);
            let expect: Vec<i64> = a.iter().zip(&b).map(|(p, q)| sign(v.degree(i) as i64) * (p + q)).collect();
            let got = mt.component(&[x]).map(|m| m.column(i)).unwrap_or(vec![0; expect.len()]);
            assert_eq!(got, expect);
        }
    }
}

#[test]
fn yoneda_is_a_dg_functor() {
    let dg = random_dg(31, 3, CoefficientMode::Integers);
    let mut cat = dg.cat.clone();
    cat.max_arity = 3;
    let ms: Vec<AInfModule> = (0..3).map(|y| yoneda_module(&cat, y)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for deg in -1..=1 {
        let f = random_element(&mut rng, cat.hom(0, 1), deg);
        let g = random_element(&mut rng, cat.hom(1, 2), 0);
        let yf = yoneda_map(&cat, &f, deg, 0, 1, 2);
        let yg = yoneda_map(&cat, &g, 0, 1, 2, 2);
        let mut mf = vec![0; f.len()];
        cat.eval_mu(&[0, 1], &[&f], 1, &mut mf);
        let lhs = mu1(&cat, &ms[0], &ms[1], &yf, 2);
        assert!(lhs.add_scaled(&yoneda_map(&cat, &mf, deg + 1, 0, 1, 2), -1).unwrap().is_zero());
        let mut gf = vec![0; cat.hom(0, 2).rank()];
        cat.eval_mu(&[0, 1, 2], &[&g, &f], 1, &mut gf);
        let comp = mu2(&cat, &ms[0], &ms[1], &ms[2], &yg, &yf, 2);
        assert!(comp.add_scaled(&yoneda_map(&cat, &gf, deg, 0, 2, 2), -1).unwrap().is_zero());
    }
}

#[test]
fn nerve_two_simplex_expansion() {
    let dg = random_dg(4, 3, CoefficientMode::Integers);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = random_simplex(&mut rng, &dg, vec![0, 1, 2]);
    let f = |k: &[usize]| s.f[k].clone();
    let lhs = dg.d(&f(&[0, 1, 2]), 0, 2, -1);
    let comp = dg.comp(&f(&[1, 2]), &f(&[0, 1]), [0, 1, 2], 0, 0);
    let rhs = dg.axpy(&comp, -1, &f(&[0, 2]));
    assert_eq!(lhs, rhs);
    assert!(validate(&dg, &s).unwrap().passed());
}

#[test]
fn nerve_three_simplex_expansion() {
    let dg = random_dg(6, 2, CoefficientMode::Integers);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let s = random_simplex(&mut rng, &dg, vec![0, 1, 0, 1]);
    let f = |k: &[usize]| s.f[k].clone();
    let o = &s.objects;
    // d f_0123 = -f_023 + f_013 + f_123∘f_01 - f_23∘f_012 + f_3-split... as listed
    let mut rhs = dg.axpy(&f(&[0, 1, 3]), -1, &f(&[0, 2, 3]));
    let a = dg.comp(&f(&[1, 2, 3]), &f(&[0, 1]), [o[0], o[1], o[3]], -1, 0);
    let b = dg.comp(&f(&[2, 3]), &f(&[0, 1, 2]), [o[0], o[2], o[3]], 0, -1);
    rhs = dg.axpy(&rhs, 1, &a);
    rhs = dg.axpy(&rhs, -1, &b);
    let lhs = dg.d(&f(&[0, 1, 2, 3]), o[0], o[3], -2);
    assert_eq!(lhs, rhs);
}

#[test]
fn random_simplices_validate_and_satisfy_simplicial_identities() {
    let dg = random_dg(12, 3, CoefficientMode::Integers);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=4 {
        let objects: Vec<usize> = (0..=n).map(|_| rng.gen_range(0..3)).collect();
        let s = random_simplex(&mut rng, &dg, objects);
        let r = validate(&dg, &s).unwrap();
        assert!(r.passed(), "n={} {:?}", n, r.failures.first());
        for i in 0..=n {
            let si = degeneracy(&dg, i, &s).unwrap();
            assert!(validate(&dg, &si).unwrap().passed());
            assert_eq!(face(&dg, i, &si).unwrap(), s);
            assert_eq!(face(&dg, i + 1, &si).unwrap(), s);
            if n >= 2 {
                let di = face(&dg, i, &s).unwrap();
                assert!(validate(&dg, &di).unwrap().passed());
                for j in (i + 1)..=n {
                    let dj = face(&dg, j, &s).unwrap();
                    assert_eq!(face(&dg, i, &dj).unwrap(), face(&dg, j - 1, &di).unwrap());
                }
            }
        }
    }
}

#[test]
fn yoneda_image_of_simplex_is_a_module_simplex() {
    let dg = random_dg(14, 2, CoefficientMode::Integers);
    let mut cat = dg.cat.clone();
    cat.max_arity = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let s = random_simplex(&mut rng, &dg, vec![0, 1, 0, 1]);
    let modules: Vec<AInfModule> = s.objects.iter().map(|&y| yoneda_module(&cat, y)).collect();
    let mut maps = BTreeMap::new();
    for (k, f) in &s.f {
        let deg = 2 - k.len() as i32;
        maps.insert(k.clone(), yoneda_map(&cat, f, deg, s.objects[k[0]], s.objects[k[k.len() - 1]], 3));
    }
    // modules indexed by simplex position
    let cand = NerveSimplexCandidate { n: 3, modules: modules.clone(), maps: maps.clone() };
    let per_object: Vec<AInfModule> = modules;
    let _ = per_object;
    let r = check_goal_equation(&cand, &cat, 3).unwrap();
    assert!(r.passed(), "{:?}", r.failures.first());
    let ms = NerveSimplex { n: 3, objects: vec![0, 1, 2, 3], f: maps };
    let ctx = ModuleDg { cat: &cat, modules: &cand.modules, arity: 3 };
    assert!(validate(&ctx, &ms).unwrap().passed());
}
