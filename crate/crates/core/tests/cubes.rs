use std::collections::BTreeMap;

use lagnerve::b_construction::*;
use lagnerve::cube_model::*;
use proptest::prelude::*;

fn sub(n: usize, m: &[usize]) -> IndexSubset {
    IndexSubset::new(n, m).unwrap()
}

#[test]
fn subset_operations() {
    assert_eq!(closure_bar(&sub(5, &[0, 2, 5])).unwrap().members(), &[0, 1, 2, 3, 4, 5]);
    assert!(is_consecutive(&sub(3, &[0, 1, 2])));
    assert!(is_consecutive(&sub(3, &[2])));
    assert!(!is_consecutive(&sub(3, &[0, 2])));
    assert!(IndexSubset::new(2, &[3]).is_err());
    for n in 0..=5 {
        for k in nonempty_subsets(n) {
            let k = sub(n, &k);
            let kp = k_prime(&k).unwrap();
            assert!(is_consecutive(&kp));
            assert!(kp.contains(n));
            let bar = closure_bar(&k).unwrap();
            let gap = bar.members().iter().any(|j| !k.contains(*j));
            assert_eq!(gap, !is_consecutive(&k));
        }
    }
}

#[test]
fn face_subcube_is_functorial() {
    for n in 0..=4 {
        let y = CollaredCube::simplex(n);
        y.validate().unwrap();
        assert_eq!(y.face_subcube(&(0..=n).collect::<Vec<_>>()).unwrap(), y);
        for j in nonempty_subsets(n) {
            let yj = y.face_subcube(&j).unwrap();
            if j.len() == 1 {
                assert_eq!(yj.n, 0);
                assert_eq!(yj.object(0).unwrap(), y.object(j[0]).unwrap());
            }
            for jj in nonempty_subsets(j.len() - 1) {
                let direct: Vec<usize> = jj.iter().map(|&t| j[t]).collect();
                assert_eq!(yj.face_subcube(&jj).unwrap().face_data, y.face_subcube(&direct).unwrap().face_data);
            }
        }
    }
}

#[test]
fn front_faces_compose() {
    let y = CollaredCube::simplex(3);
    for i in 1..3 {
        for j in (i + 1)..3 {
            // d_i d_j = d_{j-1} d_i
            let lhs = y.front_face(j).unwrap().face_subcube(&[0, 1]).unwrap();
            let a = y.front_face(j).unwrap();
            let b = y.front_face(i).unwrap();
            let keep = |c: &CollaredCube, drop: usize| -> CollaredCube {
                let v: Vec<usize> = (0..=c.n).filter(|&k| k != drop).collect();
                c.face_subcube(&v).unwrap()
            };
            assert_eq!(keep(&a, i).face_data, keep(&b, j - 1).face_data);
            assert_eq!(lhs.n, 1);
        }
    }
    let id = CollaredCube::identity(2, "X");
    let f = id.front_face(1).unwrap();
    assert_eq!(f, CollaredCube::identity(1, "X"));
}

#[test]
fn back_face_is_glued_from_two_faces() {
    let y = CollaredCube::simplex(3);
    let b = y.back_face(2).unwrap();
    assert_eq!(b.lower.face_data, y.face_subcube(&[0, 1, 2]).unwrap().face_data);
    assert_eq!(b.upper.face_data, y.face_subcube(&[2, 3]).unwrap().face_data);
    let mut bad = y.clone();
    bad.face_data.remove(&vec![1, 2, 3]);
    assert!(bad.validate().is_err());
}

#[test]
fn max_labels_restrict_to_faces() {
    for n in 1..=4 {
        let c = max_labeled_cube(n);
        assert_eq!(c.labels.len(), 1 << n);
        for (p, l) in &c.labels {
            assert_eq!(*l, *p.last().unwrap());
        }
        for i in 1..=n {
            assert_eq!(c.front_face(i).unwrap(), max_labeled_cube(n - 1));
        }
    }
}

#[test]
fn poset_nerves() {
    let p = hom_poset_nerve(0, 3, 3).unwrap();
    assert_eq!(p.elements, vec![vec![0, 3], vec![0, 1, 3], vec![0, 2, 3], vec![0, 1, 2, 3]]);
    // a square: 4 vertices, 5 edges, 2 triangles
    assert_eq!(p.count_by_dimension(), vec![4, 5, 2]);
    assert_eq!(hom_poset_nerve(0, 1, 1).unwrap().count_by_dimension(), vec![1]);
    assert!(hom_poset_nerve(2, 1, 3).is_err());
    let c = marked_prism(3);
    assert_eq!(c.cube_dimension(), 2);
    assert_eq!(c.marks.len(), 4);
    // {0,3}, {0,1,3}, {0,2,3}, {0,1,2,3}
    assert_eq!(c.marked_point_count(), 2 + 3 + 3 + 4);
}

#[test]
fn cube_json_round_trip() {
    let y = CollaredCube::simplex(2);
    let s = serde_json::to_string(&y).unwrap();
    let back: CollaredCube = serde_json::from_str(&s).unwrap();
    assert_eq!(back, y);
    assert!(s.contains("\"1/1\""));
}

fn texts(m: &CellModel) -> Vec<String> {
    let mut out: Vec<String> = m
        .pieces
        .iter()
        .map(|p| match &p.content {
            Content::Brane(l) => format!("{:?} {} {:?}", p.region, m.label_text(l), l.roles),
            Content::Square(s) => {
                let inner: Vec<String> = s
                    .inner
                    .iter()
                    .map(|q| match &q.content {
                        Content::Brane(l) => format!("{} {:?}", m.label_text(l), l.roles),
                        Content::Square(_) => "square".into(),
                    })
                    .collect();
                format!("{:?} {:?}", p.region, inner)
            }
        })
        .collect();
    out.sort();
    out
}

#[test]
fn b1_pieces_of_a_triangle() {
    let y = simplex_model(&CollaredCube::simplex(2));
    let b = b_i(&y, 1).unwrap();
    assert_eq!(
        texts(&b),
        vec![
            "BasePrism Y{0,1,2} [Cube(1), Vert]",
            "ExtStrip(1) Y{1,2} [Zero, Vert]",
            "PhiTube(1) [\"Y{0,1} [Vert]\"]",
            "VBig(1) [\"Y{0,1} [Vert]\"]",
            "VSmall(1) [\"Y{0,1} [Vert]\"]",
        ]
    );
    b.check_tiling().unwrap();
    // the tube lands on the bottom as Y01 turned onto q_1
    let bottom = b.front(1).unwrap();
    let turned = bottom.pieces.iter().find(|p| p.region == Region::PhiTube(1)).unwrap();
    match &turned.content {
        Content::Brane(l) => assert_eq!((bottom.label_text(l).as_str(), l.roles.clone()), ("Y{0,1}", vec![Role::Vert])),
        _ => panic!("turned tube should be a brane"),
    }
    // V big meets the right side in L1
    let right = b.back(0).unwrap();
    assert!(texts(&right).contains(&"VBig(1) L1 [Zero]".to_string()));
}

#[test]
fn b1_pieces_of_a_tetrahedron_by_term() {
    let y = simplex_model(&CollaredCube::simplex(3));
    let b = b_i(&y, 1).unwrap();
    assert_eq!(
        texts(&b),
        vec![
            "BasePrism Y{0,1,2,3} [Cube(1), Cube(2), Vert]",
            "ExtStrip(1) Y{1,2,3} [Zero, Cube(1), Vert]",
            "PhiTube(1) [\"Y{0,1} [Zero, Vert]\"]",
            "VBig(1) [\"Y{0,1} [Zero, Vert]\"]",
            "VSmall(1) [\"Y{0,1} [Zero, Vert]\"]",
        ]
    );
    let bp = b_prime_raw(&CollaredCube::simplex(3)).unwrap();
    assert!(texts(&bp).contains(&"ExtStrip(1) Y{1,2,3} [Zero, Cube(1), Vert]".to_string()));
}

#[test]
fn identity_cube_adds_only_the_object() {
    let id = CollaredCube::identity(3, "X");
    let b = b_full(&id).unwrap();
    for p in &b.pieces {
        if let Content::Brane(l) = &p.content {
            let t = b.label_text(l);
            assert!(t == "X" || t == "id(X)", "{}", t);
        }
    }
    assert!(check_vertex_labels(&id).unwrap().passed());
    let one = b_full(&CollaredCube::identity(1, "X")).unwrap();
    let labels: Vec<String> = one.pieces.iter().map(|p| match &p.content {
        Content::Brane(l) => format!("{} {:?}", one.label_text(l), l.roles),
        _ => String::new(),
    }).collect();
    assert!(labels.contains(&"X [Tail(Front)]".to_string()));
    assert!(labels.contains(&"X [Tail(Back)]".to_string()));
}

#[test]
fn b_of_an_edge_drags_the_tails() {
    let m = b_full(&CollaredCube::simplex(1)).unwrap();
    assert_eq!(m.pieces.len(), 3);
    let f = m.front(0).unwrap();
    assert_eq!(f.pieces.len(), 1);
    let b = m.back(0).unwrap();
    let text = |c: &CellModel| match &c.pieces[0].content {
        Content::Brane(l) => c.label_text(l),
        _ => String::new(),
    };
    assert_eq!((text(&f), text(&b)), ("L0".to_string(), "L1".to_string()));
}

#[test]
fn corner_of_b_carries_two_tails() {
    let m = b_full(&CollaredCube::simplex(2)).unwrap();
    let corner = m
        .pieces
        .iter()
        .filter(|p| p.region == Region::ConeTailCollar { axes: vec![1, 2], sides: vec![Side::Back, Side::Back] })
        .count();
    assert_eq!(corner, 1);
    m.check_tiling().unwrap();
}

#[test]
fn phi_parameters() {
    assert!(PhiParams::new(1).validate().is_ok());
    let mut p = PhiParams::new(1);
    p.delta = p.eps;
    assert!(p.validate().is_err());
    let mut p = PhiParams::new(1);
    p.eps = lagnerve::rational::q(1, 2);
    assert!(p.validate().is_err());
    assert!(b_full_with(&CollaredCube::simplex(2), lagnerve::rational::qi(2)).is_err());
}

#[test]
fn face_oracle_trivial_cases() {
    let c = CollaredCube::simplex(3);
    let m = b_full(&c).unwrap();
    assert_eq!(face_front(&m, &[0, 1, 2, 3]).unwrap(), m);
    let y = simplex_model(&c);
    let f = y.front(0).unwrap();
    assert_eq!(f.pieces.len(), 1);
    match &f.pieces[0].content {
        Content::Brane(l) => assert_eq!(f.label_text(l), "Y{0,2,3}"),
        _ => panic!(),
    }
}

#[test]
fn lemma_b1_and_corollary_exhaustive() {
    for c in sample_cubes(4) {
        for i in 1..c.n {
            let r = check_lemma_b1(&c, i).unwrap();
            assert!(r.passed(), "N={} i={} {:?}", c.n, i, r.failures);
        }
        let mut z = simplex_model(&c);
        for i in 1..c.n {
            let r = check_step_corollary(&z, i).unwrap();
            assert!(r.passed(), "N={} i={} {:?}", c.n, i, r.failures);
            z = b_i(&z, i).unwrap();
        }
        z.check_tiling().unwrap();
        z.check_adjacency().unwrap();
        for k in 1..c.n {
            let r = replay_face_commutation(&c, k).unwrap();
            assert!(r.passed(), "{:?}", r.failures);
            assert_eq!(r.checked, 4);
        }
    }
}

#[test]
fn lemma_b_faces_exhaustive() {
    for c in sample_cubes(4) {
        assert!(check_vertex_labels(&c).unwrap().passed());
        for k in subsets_with_zero(c.n) {
            let r = check_b_faces(&c, &k).unwrap();
            assert!(r.passed(), "N={} K={:?} {:?}", c.n, k, r.failures);
        }
    }
}

#[test]
fn named_b_face_cases() {
    let c2 = CollaredCube::simplex(2);
    let b = b_full(&c2).unwrap();
    let front = face_front(&b, &[0, 2]).unwrap();
    assert_eq!(canonical(&front), canonical(&b_full(&c2.face_subcube(&[0, 2]).unwrap()).unwrap()));
    // consecutive K = {0,1}: no cone-tail factor, K' = {1,2}
    let back = face_back(&b, &[0, 1]).unwrap();
    assert_eq!(canonical(&back), canonical(&b_full(&c2.face_subcube(&[1, 2]).unwrap()).unwrap()));
    // non-consecutive K = {0,2} in [3]: c × B(Y_{23})
    let c3 = CollaredCube::simplex(3);
    let b3 = b_full(&c3).unwrap();
    let back = face_back(&b3, &[0, 2]).unwrap();
    let y23 = b_full(&c3.face_subcube(&[2, 3]).unwrap()).unwrap();
    let expected = cone_tail_product(&y23, &[0], lagnerve::rational::qi(1), default_tail_width());
    assert_eq!(canonical(&back), canonical(&expected));
    // without the tail factor it is a different brane
    assert_ne!(canonical(&back), canonical(&y23.with_axis(0, Role::Zero, back.bounds[0])));
}

#[test]
fn face_oracle_detects_wrong_faces() {
    let c = CollaredCube::simplex(3);
    let b = b_full(&c).unwrap();
    let f = face_front(&b, &[0, 1, 3]).unwrap();
    assert_ne!(canonical(&f), canonical(&b_full(&c.face_subcube(&[0, 2, 3]).unwrap()).unwrap()));
    assert_ne!(canonical(&f), canonical(&b_full(&c.face_subcube(&[0, 1, 2]).unwrap()).unwrap()));
    // a relabelled face is caught
    let mut other = c.face_subcube(&[0, 1, 3]).unwrap();
    other.face_data.insert(vec![0, 1], "Z".into());
    assert_ne!(canonical(&f), canonical(&b_full(&other).unwrap()));
    // B_1 and B_2 are different surgeries
    let y = simplex_model(&c);
    assert_ne!(canonical(&b_i(&y, 1).unwrap()), canonical(&b_i(&y, 2).unwrap()));
}

fn label_strategy(n: usize) -> impl Strategy<Value = CollaredCube> {
    let subsets = nonempty_subsets(n);
    prop::collection::vec(0u8..3, subsets.len()).prop_map(move |codes| {
        let mut face_data = BTreeMap::new();
        for (j, c) in subsets.iter().zip(codes) {
            let l = if j.len() == 1 { format!("X{}", c) } else { format!("f{}_{}", j.len(), c) };
            face_data.insert(j.clone(), l);
        }
        CollaredCube::with_labels(n, face_data)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn b_faces_hold_for_colliding_labels(c in (2usize..=3).prop_flat_map(label_strategy)) {
        for k in subsets_with_zero(c.n) {
            let r = check_b_faces(&c, &k).unwrap();
            prop_assert!(r.passed(), "{:?}", r.failures);
        }
        for i in 1..c.n {
            prop_assert!(check_lemma_b1(&c, i).unwrap().passed());
        }
    }
}
