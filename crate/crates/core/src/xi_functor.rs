//! The functor Xi on cobordism simplices: the intersection complex of a test
//! object with a cube, its module structure, and the maps Xi_{Y_K}.
//!
//! A simplex is given over a base category by elements `f_F` in
//! `hom(Y_{min F}, Y_{max F})` of degree `2 - |F|`, one for every `F ⊆ [N]`
//! with `|F| >= 2`; `Unit` stands for the strict identity. The product
//! complex of a test object X is `⊕_{0 ∈ K} hom(X, Y_{max K})[1 - #K]`, and
//! its operations sum over chains of the two kinds of arrows `K -> L`:
//! adding a block above `max K` (weighted by `f`) or filling one gap below it
//! (weighted by the identity).

use crate::a_infinity::{
    build_map, check_module_relations, yoneda_module, AInfCategory, AInfModule, CheckReport, NerveSimplexCandidate,
    PreModuleMap, Residual,
};
use crate::cube_model::{is_consecutive, k_prime, max_labeled_cube, CollaredCube, IndexSubset};
use crate::dg_nerve::{degeneracy, Element, ModuleDg, NerveSimplex};
use crate::graded_zmod::{compose, shift, sign, AlgebraError, FreeGradedModule, GradedMap};
use crate::planar_floer::{enumerate_polygons, intersections, CornerData, Orientation, PLCurve, PlanarError, Pt};
use crate::rational::Q;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum XiError {
    #[error("missing f_F for F = {0:?}")]
    Missing(Vec<usize>),
    #[error("f_F for F = {f:?} has a component of degree {found}, expected {expected}")]
    Degree { f: Vec<usize>, found: i32, expected: i32 },
    #[error("f_F for F = {0:?} has the wrong length")]
    Shape(Vec<usize>),
    #[error("identity placed on F = {0:?}, which is not an edge between equal objects")]
    Unit(Vec<usize>),
    #[error("object {0} is not in the base category")]
    Object(String),
    #[error("staircase depth {staircase} does not exceed cube depth {cube}")]
    Depth { staircase: Q, cube: Q },
    #[error("stabilization: {0}")]
    Stabilization(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Cube(#[from] crate::cube_model::CubeError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CobElement {
    Unit,
    Chain(Vec<i64>),
}

/// The f-data of an N-simplex; `objects[i]` is the base object Y_i.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CobordismSimplex {
    pub n: usize,
    pub objects: Vec<usize>,
    #[serde(with = "pairs")]
    pub f: BTreeMap<Vec<usize>, CobElement>,
}

mod pairs {
    use super::CobElement;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Vec<usize>, CobElement>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(&Vec<usize>, &CobElement)> = m.iter().collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<usize>, CobElement>, D::Error> {
        let v: Vec<(Vec<usize>, CobElement)> = Vec::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

/// `(-1)^{floor((|F|-2)/2)}`, the weight of `f_F` on its arrow.
pub fn theta(len: usize) -> i64 {
    sign(((len - 2) / 2) as i64)
}

fn faces(n: usize) -> Vec<Vec<usize>> {
    crate::a_infinity::subsets_of_size_at_least(n, 2)
}

impl CobordismSimplex {
    /// The identity cobordism of `object` and its degeneracies.
    pub fn identity(n: usize, object: usize) -> Self {
        let f = faces(n)
            .into_iter()
            .map(|k| {
                let e = if k.len() == 2 { CobElement::Unit } else { CobElement::Chain(Vec::new()) };
                (k, e)
            })
            .collect();
        CobordismSimplex { n, objects: vec![object; n + 1], f }
    }

    pub fn from_nerve(s: &NerveSimplex<Element>) -> Self {
        CobordismSimplex {
            n: s.n,
            objects: s.objects.clone(),
            f: s.f.iter().map(|(k, v)| (k.clone(), CobElement::Chain(v.clone()))).collect(),
        }
    }

    pub fn edge(a: usize, b: usize, f: Vec<i64>) -> Self {
        CobordismSimplex { n: 1, objects: vec![a, b], f: [(vec![0, 1], CobElement::Chain(f))].into() }
    }

    /// A 2-simplex from two closed degree-0 edges with a vanishing top
    /// element: the long edge is forced to `mu^2(f12, f01)`.
    pub fn triangle(cat: &AInfCategory, objects: [usize; 3], f01: Vec<i64>, f12: Vec<i64>) -> Self {
        let [a, b, c] = objects;
        let mut f02 = vec![0; cat.hom(a, c).rank()];
        cat.eval_mu(&[a, b, c], &[&f12, &f01], 1, &mut f02);
        let f02: Vec<i64> = f02.into_iter().map(|v| cat.mode.reduce(v)).collect();
        let f = [
            (vec![0, 1], CobElement::Chain(f01)),
            (vec![1, 2], CobElement::Chain(f12)),
            (vec![0, 2], CobElement::Chain(f02)),
            (vec![0, 1, 2], CobElement::Chain(Vec::new())),
        ];
        CobordismSimplex { n: 2, objects: objects.to_vec(), f: f.into() }
    }

    /// Objects of the cube's vertices looked up by label in `cat`.
    pub fn bind_objects(cube: &CollaredCube, cat: &AInfCategory) -> Result<Vec<usize>, XiError> {
        (0..=cube.n)
            .map(|k| {
                let l = cube.object(k)?;
                cat.object_index(l).ok_or_else(|| XiError::Object(l.to_string()))
            })
            .collect()
    }

    /// The face spanned by `k`, reindexed by `[|k|-1]`.
    pub fn face(&self, k: &[usize]) -> CobordismSimplex {
        let n = k.len() - 1;
        let f = faces(n)
            .into_iter()
            .filter_map(|j| {
                let image: Vec<usize> = j.iter().map(|&i| k[i]).collect();
                self.f.get(&image).map(|e| (j, e.clone()))
            })
            .collect();
        CobordismSimplex { n, objects: k.iter().map(|&i| self.objects[i]).collect(), f }
    }

    fn get(&self, k: &[usize]) -> Result<&CobElement, XiError> {
        self.f.get(k).ok_or_else(|| XiError::Missing(k.to_vec()))
    }

    /// Presence, shape and degree of every `f_F`.
    pub fn validate(&self, cat: &AInfCategory) -> Result<(), XiError> {
        for k in faces(self.n) {
            let (a, b) = (self.objects[k[0]], self.objects[k[k.len() - 1]]);
            match self.get(&k)? {
                CobElement::Unit => {
                    if k.len() != 2 || a != b {
                        return Err(XiError::Unit(k));
                    }
                }
                CobElement::Chain(v) => {
                    let m = cat.hom(a, b);
                    if v.is_empty() {
                        continue;
                    }
                    if v.len() != m.rank() {
                        return Err(XiError::Shape(k));
                    }
                    let expected = 2 - k.len() as i32;
                    if let Some(i) = (0..v.len()).find(|&i| v[i] != 0 && m.degree(i) != expected) {
                        return Err(XiError::Degree { f: k, found: m.degree(i), expected });
                    }
                }
            }
        }
        Ok(())
    }

    /// Arrows out of `k`: the target subset, its sign and its element.
    fn arrows(&self, k: &[usize]) -> Vec<(Vec<usize>, i64, &CobElement)> {
        let max = *k.last().unwrap();
        let mut out = Vec::new();
        let above: Vec<usize> = (max + 1..=self.n).collect();
        for mask in 1u32..(1 << above.len()) {
            let u: Vec<usize> = (0..above.len()).filter(|&i| mask & (1 << i) != 0).map(|i| above[i]).collect();
            let mut f = vec![max];
            f.extend(&u);
            let mut l = k.to_vec();
            l.extend(&u);
            if let Some(e) = self.f.get(&f) {
                out.push((l, theta(f.len()), e));
            }
        }
        for t in 0..max {
            if k.contains(&t) {
                continue;
            }
            let mut l = k.to_vec();
            l.push(t);
            l.sort_unstable();
            let above_t = k.iter().filter(|&&j| j > t).count();
            out.push((l, sign(above_t as i64), &CobElement::Unit));
        }
        out
    }
}

/// Sum over arrow chains starting at `from` of `mu^{r+d}(δ_r, ..., δ_1, x, a_{d-1}, ..., a_1)`,
/// sorted by the chain's end; `key = [X_0..X_{d-1}]`, `x ∈ hom(X_{d-1}, Y_{max from})`,
/// `a` in written order. Chains leaving `within` are skipped.
pub fn chain_sum(
    cat: &AInfCategory,
    s: &CobordismSimplex,
    from: &[usize],
    within: Option<&[usize]>,
    key: &[usize],
    x: &[i64],
    a: &[&[i64]],
) -> BTreeMap<Vec<usize>, Vec<i64>> {
    let mut out = BTreeMap::new();
    let mut path = vec![from.to_vec()];
    let mut elems = Vec::new();
    walk(cat, s, within, key, x, a, &mut path, &mut elems, 1, &mut out);
    for v in out.values_mut() {
        for c in v.iter_mut() {
            *c = cat.mode.reduce(*c);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn walk<'a>(
    cat: &AInfCategory,
    s: &'a CobordismSimplex,
    within: Option<&[usize]>,
    key: &[usize],
    x: &[i64],
    a: &[&[i64]],
    path: &mut Vec<Vec<usize>>,
    elems: &mut Vec<&'a CobElement>,
    coef: i64,
    out: &mut BTreeMap<Vec<usize>, Vec<i64>>,
) {
    let y = |k: &[usize]| s.objects[*k.last().unwrap()];
    let x_obj = key[key.len() - 1];
    let end = path.last().unwrap().clone();
    let rank = cat.hom(key[0], y(&end)).rank();
    let has_unit = elems.iter().any(|e| matches!(e, CobElement::Unit));
    let slot = out.entry(end.clone()).or_insert_with(|| vec![0; rank]);
    if has_unit {
        // mu^2(e, x) = (-1)^{|x|} x; the unit kills every longer product
        if elems.len() == 1 && a.is_empty() {
            let m = cat.hom(x_obj, y(&path[0]));
            for (i, &c) in x.iter().enumerate() {
                slot[i] += coef * c * sign(m.degree(i) as i64);
            }
        }
    } else if elems.iter().all(|e| matches!(e, CobElement::Chain(c) if !c.is_empty())) {
        let mut objs = key.to_vec();
        objs.extend(path.iter().map(|k| y(k)));
        let mut args: Vec<&[i64]> = elems
            .iter()
            .rev()
            .map(|e| match e {
                CobElement::Chain(c) => c.as_slice(),
                CobElement::Unit => unreachable!(),
            })
            .collect();
        args.push(x);
        args.extend_from_slice(a);
        cat.eval_mu(&objs, &args, coef, slot);
    }
    if has_unit {
        return;
    }
    for (next, sg, e) in s.arrows(&end) {
        if within.is_some_and(|w| next.iter().any(|i| !w.contains(i))) {
            continue;
        }
        path.push(next);
        elems.push(e);
        walk(cat, s, within, key, x, a, path, elems, coef * sg, out);
        path.pop();
        elems.pop();
    }
}

/// One summand `hom(X, Y_{max K})[1 - #K]` of a product complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub k: Vec<usize>,
    pub object: usize,
    pub offset: usize,
    pub base: FreeGradedModule,
}

impl Summand {
    /// Degree of the inclusion; the projection has the opposite degree.
    pub fn shift(&self) -> i32 {
        self.k.len() as i32 - 1
    }
}

/// The product complex of test object `x` with an N-simplex, summands in
/// lexicographic order of K.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductDecomposition {
    pub x: usize,
    pub n: usize,
    pub summands: Vec<Summand>,
    pub module: FreeGradedModule,
}

fn subsets_with_zero(n: usize) -> Vec<Vec<usize>> {
    crate::cube_model::subsets_with_zero(n)
}

impl ProductDecomposition {
    pub fn new(cat: &AInfCategory, x: usize, objects: &[usize]) -> Self {
        let n = objects.len() - 1;
        let mut ks = subsets_with_zero(n);
        ks.sort();
        let mut summands = Vec::new();
        let mut basis: Vec<(String, i32)> = Vec::new();
        for k in ks {
            let object = objects[*k.last().unwrap()];
            let base = cat.hom(x, object).clone();
            let shifted = shift(&base, 1 - k.len() as i32);
            let tag: Vec<String> = k.iter().map(|i| i.to_string()).collect();
            for i in 0..shifted.rank() {
                basis.push((format!("{{{}}}:{}", tag.join(","), shifted.id(i)), shifted.degree(i)));
            }
            summands.push(Summand { k, object, offset: basis.len() - shifted.rank(), base });
        }
        let module = FreeGradedModule::new(basis).expect("summand tags keep ids distinct");
        ProductDecomposition { x, n, summands, module }
    }

    pub fn summand(&self, k: &[usize]) -> Option<&Summand> {
        self.summands.iter().find(|s| s.k == k)
    }

    fn locate(&self, i: usize) -> (&Summand, usize) {
        let s = self.summands.iter().rev().find(|s| s.offset <= i && s.base.rank() > 0).unwrap();
        (s, i - s.offset)
    }

    pub fn iota(&self, k: &[usize]) -> GradedMap {
        let s = self.summand(k).expect("K contains 0");
        let mut g = GradedMap::zero(s.base.clone(), self.module.clone(), s.shift());
        for i in 0..s.base.rank() {
            g.set(s.offset + i, i, 1);
        }
        g
    }

    pub fn pi(&self, k: &[usize]) -> GradedMap {
        let s = self.summand(k).expect("K contains 0");
        let mut g = GradedMap::zero(self.module.clone(), s.base.clone(), -s.shift());
        for i in 0..s.base.rank() {
            g.set(i, s.offset + i, 1);
        }
        g
    }

    /// `Σ_K ι_K ∘ π_K` minus the identity, as a list of nonzero entries.
    pub fn id_cube_defect(&self) -> Result<Vec<(usize, usize, i64)>, AlgebraError> {
        let mut acc = GradedMap::zero(self.module.clone(), self.module.clone(), 0);
        for s in &self.summands {
            acc = acc.add(&compose(&self.iota(&s.k), &self.pi(&s.k))?)?;
        }
        let id = GradedMap::identity(&self.module);
        let diff = acc.add(&id.scale(-1))?;
        let mut out = Vec::new();
        for r in 0..diff.rows() {
            for c in 0..diff.cols() {
                if diff.get(r, c) != 0 {
                    out.push((r, c, diff.get(r, c)));
                }
            }
        }
        Ok(out)
    }
}

/// Product complex of `x` with the cube whose vertices carry `objects`;
/// the vertex ranks are read through the max-labelled cube and the staircase
/// depth must exceed the cube's.
pub fn decompose(
    cat: &AInfCategory,
    x: usize,
    cube: &CollaredCube,
    objects: &[usize],
    staircase_depth: Q,
) -> Result<ProductDecomposition, XiError> {
    if staircase_depth <= cube.depth {
        return Err(XiError::Depth { staircase: staircase_depth, cube: cube.depth });
    }
    let dec = ProductDecomposition::new(cat, x, objects);
    let labels = max_labeled_cube(cube.n);
    for s in &dec.summands {
        let vertex = labels.labels[&s.k];
        if cat.hom(x, objects[vertex]).rank() != s.base.rank() {
            return Err(XiError::Algebra(AlgebraError::BasisMismatch(format!("summand {:?}", s.k))));
        }
    }
    Ok(dec)
}

fn unit_index(v: &[i64]) -> usize {
    v.iter().position(|&c| c != 0).expect("basis vector")
}

/// The module `hom(-, T)` of the product complexes, operations up to `arity`.
pub fn product_module(cat: &AInfCategory, s: &CobordismSimplex, arity: usize) -> (Vec<ProductDecomposition>, AInfModule) {
    let decs: Vec<ProductDecomposition> = (0..cat.object_count()).map(|x| ProductDecomposition::new(cat, x, &s.objects)).collect();
    let shell = AInfModule {
        values: decs.iter().map(|d| d.module.clone()).collect(),
        mu: PreModuleMap::zero(1),
    };
    let mu = build_map(cat, &shell, &shell, 1, arity, |key, vecs, _degs, out| {
        let d = key.len();
        let dec = &decs[key[d - 1]];
        let (sm, i) = dec.locate(unit_index(&vecs[0]));
        let mut x = vec![0; sm.base.rank()];
        x[i] = 1;
        let a: Vec<&[i64]> = vecs[1..].iter().map(|v| v.as_slice()).collect();
        let target = &decs[key[0]];
        for (l, v) in chain_sum(cat, s, &sm.k, None, key, &x, &a) {
            let off = target.summand(&l).unwrap().offset;
            for (j, c) in v.into_iter().enumerate() {
                out[off + j] += c;
            }
        }
    });
    (decs, AInfModule { values: shell.values, mu })
}

/// The A-infinity module relations of the product complexes.
pub fn check_product_relations(cat: &AInfCategory, s: &CobordismSimplex, arity: usize) -> Result<CheckReport, AlgebraError> {
    let (_, t) = product_module(cat, s, arity);
    check_module_relations(cat, &t, arity)
}

/// `Xi_Y` of the whole simplex: `θ(N+1)` times the block from `{0}` to `[N]`.
pub fn xi_map(cat: &AInfCategory, s: &CobordismSimplex, arity: usize) -> PreModuleMap {
    let n = s.n;
    let full: Vec<usize> = (0..=n).collect();
    let src = yoneda_module(cat, s.objects[0]);
    let tgt = yoneda_module(cat, s.objects[n]);
    let th = theta(n + 1);
    build_map(cat, &src, &tgt, 1 - n as i32, arity, |key, vecs, _degs, out| {
        let a: Vec<&[i64]> = vecs[1..].iter().map(|v| v.as_slice()).collect();
        if let Some(v) = chain_sum(cat, s, &[0], None, key, &vecs[0], &a).get(&full) {
            for (o, c) in out.iter_mut().zip(v) {
                *o += th * c;
            }
        }
    })
}

/// The component `Xi^d` at one basis tuple, as a matrix with one column per input tuple.
pub fn xi_d(cat: &AInfCategory, s: &CobordismSimplex, d: usize) -> BTreeMap<Vec<usize>, GradedMap> {
    xi_map(cat, s, d).components.into_iter().filter(|(k, _)| k.len() == d).collect()
}

/// Xi of every face, keyed by the face.
pub fn face_table(cat: &AInfCategory, s: &CobordismSimplex, arity: usize) -> BTreeMap<Vec<usize>, PreModuleMap> {
    faces(s.n).into_iter().map(|k| (k.clone(), xi_map(cat, &s.face(&k), arity))).collect()
}

pub fn build_xi_simplex(cat: &AInfCategory, s: &CobordismSimplex, arity: usize) -> NerveSimplexCandidate {
    NerveSimplexCandidate {
        n: s.n,
        modules: s.objects.iter().map(|&y| yoneda_module(cat, y)).collect(),
        maps: face_table(cat, s, arity),
    }
}

/// How the block `π_[N] μ^{1+c} (ι_K ⊗ ι_[N]^{⊗c})` reduces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    ModuleMu,
    FaceXi(Vec<usize>),
    Identity,
    Zero,
}

/// Every case whose condition holds for `(K, c)`; exactly one for `0 ∈ K ⊆ [N]`.
pub fn matching_reductions(n: usize, k: &[usize], c: usize) -> Vec<Reduction> {
    let sub = IndexSubset::new(n, k).expect("subset of [N]");
    let consecutive = is_consecutive(&sub);
    let len = k.len();
    let mut out = Vec::new();
    if len == n + 1 {
        out.push(Reduction::ModuleMu);
    }
    if consecutive && len <= n {
        let kp = k_prime(&sub).expect("nonempty");
        out.push(Reduction::FaceXi(kp.members().to_vec()));
    }
    if !consecutive && len == n && c == 0 {
        out.push(Reduction::Identity);
    }
    if !consecutive && len == n && c > 0 {
        out.push(Reduction::Zero);
    }
    if !consecutive && len < n {
        out.push(Reduction::Zero);
    }
    out
}

pub fn reduction(n: usize, k: &[usize], c: usize) -> Reduction {
    let m = matching_reductions(n, k, c);
    assert_eq!(m.len(), 1, "reduction cases for K = {:?}, c = {}", k, c);
    m.into_iter().next().unwrap()
}

/// Face data and modules for evaluating reductions.
pub struct XiContext<'a> {
    pub cat: &'a AInfCategory,
    pub s: &'a CobordismSimplex,
    pub faces: BTreeMap<Vec<usize>, PreModuleMap>,
    pub modules: Vec<AInfModule>,
}

impl<'a> XiContext<'a> {
    pub fn new(cat: &'a AInfCategory, s: &'a CobordismSimplex, arity: usize) -> Self {
        XiContext {
            cat,
            s,
            faces: face_table(cat, s, arity),
            modules: s.objects.iter().map(|&y| yoneda_module(cat, y)).collect(),
        }
    }

    fn y(&self, k: &[usize]) -> usize {
        self.s.objects[*k.last().unwrap()]
    }

    fn reduce(&self, v: Vec<i64>) -> Vec<i64> {
        v.into_iter().map(|c| self.cat.mode.reduce(c)).collect()
    }

    /// `μ_M^{1+c}(x, a)` of the Yoneda module of vertex `vertex`.
    fn module_mu(&self, vertex: usize, key: &[usize], x: &[i64], a: &[&[i64]]) -> Vec<i64> {
        let y = self.s.objects[vertex];
        let mut objs = key.to_vec();
        objs.push(y);
        let mut out = vec![0; self.cat.hom(key[0], y).rank()];
        let mut args = vec![x];
        args.extend_from_slice(a);
        self.cat.eval_mu(&objs, &args, 1, &mut out);
        self.reduce(out)
    }

    /// `θ(|K|) Xi_{Y_K}(x, a)`, the raw block from `{min K}` to `K`.
    fn face_block(&self, k: &[usize], key: &[usize], x: &[i64], a: &[&[i64]]) -> Vec<i64> {
        if k.len() == 1 {
            return self.module_mu(k[0], key, x, a);
        }
        let mut out = vec![0; self.cat.hom(key[0], self.y(k)).rank()];
        let mut args = vec![x];
        args.extend_from_slice(a);
        self.faces[k].eval(self.cat, &self.modules[k[0]], key, &args, theta(k.len()), &mut out);
        self.reduce(out)
    }

    /// The block `π_[N] μ^{1+c}(ι_K x, a)` computed from the reduction table.
    pub fn table_block(&self, k: &[usize], key: &[usize], x: &[i64], a: &[&[i64]]) -> Vec<i64> {
        let n = self.s.n;
        let rank = self.cat.hom(key[0], self.s.objects[n]).rank();
        match reduction(n, k, a.len()) {
            Reduction::ModuleMu => self.module_mu(n, key, x, a),
            Reduction::FaceXi(kp) => self.face_block(&kp, key, x, a),
            Reduction::Identity => {
                let t = (0..=n).find(|i| !k.contains(i)).unwrap();
                let m = self.cat.hom(key[0], self.y(k));
                let e = sign((n - t) as i64);
                self.reduce((0..rank).map(|i| e * sign(m.degree(i) as i64) * x[i]).collect())
            }
            Reduction::Zero => vec![0; rank],
        }
    }

    /// The same block summed directly over arrow chains.
    pub fn direct_block(&self, k: &[usize], key: &[usize], x: &[i64], a: &[&[i64]]) -> Vec<i64> {
        let full: Vec<usize> = (0..=self.s.n).collect();
        chain_sum(self.cat, self.s, k, None, key, x, a)
            .remove(&full)
            .unwrap_or_else(|| vec![0; self.cat.hom(key[0], self.y(&full)).rank()])
    }
}

fn basis_vec(rank: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; rank];
    v[i] = 1;
    v
}

/// Every basis tuple `(x, a_{d-1}, .., a_1)` over `key`, `x` in `hom(X_{d-1}, y)`.
fn basis_tuples(cat: &AInfCategory, key: &[usize], y: usize) -> Vec<(Vec<usize>, Vec<Vec<i64>>)> {
    let d = key.len();
    let mut ranks = vec![cat.hom(key[d - 1], y).rank()];
    for k in (1..d).rev() {
        ranks.push(cat.hom(key[k - 1], key[k]).rank());
    }
    let total: usize = ranks.iter().product();
    (0..total)
        .map(|mut col| {
            let mut idx = vec![0; ranks.len()];
            for j in (0..ranks.len()).rev() {
                idx[j] = col % ranks[j];
                col /= ranks[j];
            }
            let vecs = idx.iter().zip(&ranks).map(|(&i, &r)| basis_vec(r, i)).collect();
            (idx, vecs)
        })
        .collect()
}

/// Compares the table with the direct blocks for every `K ∋ 0` and `c < arity`.
pub fn check_reduction_table(cat: &AInfCategory, s: &CobordismSimplex, arity: usize) -> CheckReport {
    let ctx = XiContext::new(cat, s, arity);
    let mut report = CheckReport::default();
    for k in subsets_with_zero(s.n) {
        for c in 0..arity {
            for key in cat.composable_tuples(c) {
                for (idx, vecs) in basis_tuples(cat, &key, ctx.y(&k)) {
                    let a: Vec<&[i64]> = vecs[1..].iter().map(|v| v.as_slice()).collect();
                    let t = ctx.table_block(&k, &key, &vecs[0], &a);
                    let d = ctx.direct_block(&k, &key, &vecs[0], &a);
                    report.checked += 1;
                    if t != d {
                        report.failures.push(Residual {
                            location: format!("K={:?} c={} objects {:?} basis {:?}", k, c, key, idx),
                            values: t.iter().zip(&d).map(|(x, y)| cat.mode.reduce(x - y)).collect(),
                        });
                    }
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorollaryReport {
    pub corollary: usize,
    pub terms: usize,
    pub nonzero: usize,
    pub mismatches: Vec<Residual>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ReplayReport {
    pub corollaries: Vec<CorollaryReport>,
    /// The grouped sum, which vanishes by the module relations.
    pub total: CheckReport,
    pub goal: CheckReport,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.total.passed() && self.goal.passed() && self.corollaries.iter().all(|c| c.mismatches.is_empty())
    }
}

/// Expands `π_[N] μ (id ⊗ μ ⊗ id)(ι_0 ⊗ ι_[N]^{⊗ d-1})` into four groups and
/// simplifies each one with the reduction table and the face maps; every
/// term is compared with its direct evaluation.
pub fn replay_corollaries(cat: &AInfCategory, s: &CobordismSimplex, arity: usize) -> Result<ReplayReport, AlgebraError> {
    let ctx = XiContext::new(cat, s, arity);
    let n = s.n;
    let full: Vec<usize> = (0..=n).collect();
    let mut cors: Vec<CorollaryReport> = (1..=4).map(|c| CorollaryReport { corollary: c, ..Default::default() }).collect();
    let mut total = CheckReport::default();
    let mode = cat.mode;
    let mut record = |cor: usize, label: String, direct: Vec<i64>, simple: Vec<i64>| {
        let r = &mut cors[cor - 1];
        r.terms += 1;
        if direct.iter().any(|&v| v != 0) {
            r.nonzero += 1;
        }
        if direct != simple {
            r.mismatches.push(Residual { location: label, values: direct });
        }
    };
    for d in 1..=arity {
        for key in cat.composable_tuples(d - 1) {
            let y0 = s.objects[0];
            let yn = s.objects[n];
            if cat.hom(key[d - 1], y0).rank() == 0 || cat.hom(key[0], yn).rank() == 0 {
                continue;
            }
            for (idx, vecs) in basis_tuples(cat, &key, y0) {
                let x = &vecs[0];
                // degs of a_1..a_{d-1}: written position j holds a_{d-j}
                let deg_a = |i: usize| cat.hom(key[i - 1], key[i]).degree(idx[d - i]);
                let sgn = |c: usize| mode.sign((1..=c).map(|i| deg_a(i) as i64 - 1).sum());
                let mut sum = vec![0i64; cat.hom(key[0], yn).rank()];
                for b in 1..=d {
                    let c = d - b;
                    let inner_a: Vec<&[i64]> = vecs[1..b].iter().map(|v| v.as_slice()).collect();
                    let outer_a: Vec<&[i64]> = vecs[b..].iter().map(|v| v.as_slice()).collect();
                    let inner = chain_sum(cat, s, &[0], None, &key[c..], x, &inner_a);
                    for k in subsets_with_zero(n) {
                        let rank = cat.hom(key[c], ctx.y(&k)).rank();
                        let v = inner.get(&k).cloned().unwrap_or_else(|| vec![0; rank]);
                        let v_simple = ctx.face_block(&k, &key[c..], x, &inner_a);
                        let direct = ctx.direct_block(&k, &key[..=c], &v, &outer_a);
                        let simple = ctx.table_block(&k, &key[..=c], &v_simple, &outer_a);
                        let cor = if c == 0 {
                            1
                        } else if is_consecutive(&IndexSubset::new(n, &k).unwrap()) {
                            2
                        } else {
                            3
                        };
                        let label = format!("K={:?} b={} c={} objects {:?} basis {:?}", k, b, c, key, idx);
                        for (acc, t) in sum.iter_mut().zip(&direct) {
                            *acc += sgn(c) * t;
                        }
                        record(cor, label, direct, simple);
                    }
                }
                // a > 0: mu^b on a_{c+b}..a_{c+1}
                for b in 1..d {
                    for c in 0..(d - b) {
                        let (lo, hi) = (d - c - b, d - c);
                        let mut inner = vec![0; cat.hom(key[c], key[c + b]).rank()];
                        let args: Vec<&[i64]> = vecs[lo..hi].iter().map(|v| v.as_slice()).collect();
                        cat.eval_mu(&key[c..=c + b], &args, 1, &mut inner);
                        let mut outer_key = key[..=c].to_vec();
                        outer_key.extend_from_slice(&key[c + b..]);
                        let mut outer: Vec<&[i64]> = vecs[1..lo].iter().map(|v| v.as_slice()).collect();
                        outer.push(&inner);
                        outer.extend(vecs[hi..].iter().map(|v| v.as_slice()));
                        let direct = ctx.direct_block(&[0], &outer_key, x, &outer);
                        let mut simple = vec![0; direct.len()];
                        ctx.faces[&full].eval(cat, &ctx.modules[0], &outer_key, &{
                            let mut v: Vec<&[i64]> = vec![x];
                            v.extend(outer.iter());
                            v
                        }, theta(n + 1), &mut simple);
                        let simple: Vec<i64> = simple.into_iter().map(|v| mode.reduce(v)).collect();
                        for (acc, t) in sum.iter_mut().zip(&direct) {
                            *acc += sgn(c) * t;
                        }
                        let label = format!("a>0 b={} c={} objects {:?} basis {:?}", b, c, key, idx);
                        record(4, label, direct, simple);
                    }
                }
                total.checked += 1;
                if sum.iter().any(|&v| mode.reduce(v) != 0) {
                    total.failures.push(Residual {
                        location: format!("objects {:?} basis {:?}", key, idx),
                        values: sum.iter().map(|&v| mode.reduce(v)).collect(),
                    });
                }
            }
        }
    }
    let goal = crate::a_infinity::check_goal_equation(&build_xi_simplex(cat, s, arity), cat, arity)?;
    Ok(ReplayReport { corollaries: cors, total, goal })
}

/// Report of a stabilization comparison.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StabilizationReport {
    pub homs_checked: usize,
    pub mu_checked: usize,
    pub xi_checked: usize,
    /// Boundary slots of the second factor and the number of disks over each domain.
    pub fibers: Vec<(Vec<usize>, usize)>,
    pub failures: Vec<String>,
}

impl StabilizationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Products `Z × β_{slot(Z)}` with the curves of a β-configuration, the last
/// curve playing the role of `E^∨`.
pub struct Stabilizer<'a> {
    pub curves: &'a [PLCurve],
    pub slots: Vec<usize>,
    generators: BTreeMap<(usize, usize), Pt>,
    fibers: std::cell::RefCell<BTreeMap<Vec<usize>, usize>>,
}

impl<'a> Stabilizer<'a> {
    /// `depth` bounds every depth and height of the β-staircases.
    pub fn new(beta: &'a crate::planar_floer::StaircaseConfig, slots: Vec<usize>, margin: Q) -> Result<Self, XiError> {
        let p = &beta.params;
        let tallest = p.heights.iter().chain(&p.depths).fold(p.depth_max.max(p.h), |m, &v| m.max(v));
        if tallest >= margin {
            return Err(XiError::Stabilization(format!("β reaches {} but the margin is {}", tallest, margin)));
        }
        let e = beta.d();
        if let Some(&s) = slots.iter().find(|&&s| s > e) {
            return Err(XiError::Stabilization(format!("slot {} out of range", s)));
        }
        let mut generators = BTreeMap::new();
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for x in intersections(&beta.curves)? {
            // E^∨ meets each β once: keep the degree-0 crossing at q < 0
            if x.curves.1 == e && x.location.q >= Q::from_integer(0) {
                continue;
            }
            if x.degree != 0 {
                return Err(XiError::Stabilization(format!("crossing of {:?} has degree {}", x.curves, x.degree)));
            }
            *counts.entry(x.curves).or_default() += 1;
            generators.insert(x.curves, x.location);
        }
        if let Some((c, _)) = counts.iter().find(|(_, &n)| n != 1) {
            return Err(XiError::Stabilization(format!("curves {:?} meet more than once", c)));
        }
        Ok(Stabilizer { curves: &beta.curves, slots, generators, fibers: Default::default() })
    }

    fn e(&self) -> usize {
        self.curves.len() - 1
    }

    /// Boundary slots of a key with repeated `E^∨` collapsed.
    fn boundary(&self, key: &[usize]) -> Vec<usize> {
        let mut b: Vec<usize> = key.iter().map(|&o| self.slots[o]).collect();
        b.dedup_by(|x, y| *x == self.e() && *y == self.e());
        b
    }

    /// Disks in the second factor over a fixed domain with this boundary.
    pub fn fiber(&self, boundary: &[usize]) -> Result<usize, XiError> {
        if let Some(&n) = self.fibers.borrow().get(boundary) {
            return Ok(n);
        }
        let k = boundary.len() - 1;
        let n = if k == 0 {
            1
        } else {
            let g = |a: usize, b: usize| {
                self.generators
                    .get(&(a.min(b), a.max(b)))
                    .copied()
                    .ok_or_else(|| XiError::Stabilization(format!("no generator for slots {} and {}", a, b)))
            };
            let mut corners = vec![g(boundary[k], boundary[0])?];
            for j in 1..=k {
                corners.push(g(boundary[j - 1], boundary[j])?);
            }
            let data = CornerData { boundary: boundary.to_vec(), corners };
            enumerate_polygons(self.curves, &data)?
                .iter()
                .filter(|p| p.constant || (p.orientation == Orientation::Clockwise && p.reflex.len() + 2 == k.max(2)))
                .count()
        };
        self.fibers.borrow_mut().insert(boundary.to_vec(), n);
        Ok(n)
    }

    fn slot_name(&self, a: usize, b: usize) -> String {
        if a == b {
            "e".into()
        } else {
            format!("b{}.{}", a, b)
        }
    }

    /// The stabilized category: `hom ⊗ (one generator)` and `μ` times the fiber count.
    pub fn stabilize(&self, cat: &AInfCategory) -> Result<AInfCategory, XiError> {
        let n = cat.object_count();
        if self.slots.len() != n {
            return Err(XiError::Stabilization("one slot per object".into()));
        }
        let names = cat.objects.iter().map(|o| format!("{}×β", o)).collect();
        let mut out = AInfCategory::new(names, cat.max_arity, cat.mode);
        for a in 0..n {
            for b in 0..n {
                let h = cat.hom(a, b);
                if h.rank() == 0 {
                    continue;
                }
                let (sa, sb) = (self.slots[a], self.slots[b]);
                if !(sa < sb || (sa == self.e() && sb == self.e())) {
                    return Err(XiError::Stabilization(format!("hom({}, {}) is nonzero but the slots do not increase", a, b)));
                }
                let tag = self.slot_name(sa, sb);
                let basis = (0..h.rank()).map(|i| (format!("{}⊗{}", h.id(i), tag), h.degree(i))).collect();
                out.set_hom(a, b, FreeGradedModule::new(basis)?);
            }
        }
        let mut keys: Vec<&Vec<usize>> = cat.mu_keys().collect();
        keys.sort();
        for key in keys {
            let fiber = self.fiber(&self.boundary(key))?;
            let mut m = cat.mu(key).unwrap().scale(fiber as i64).reduced(cat.mode);
            m.source = out.mu_source(key);
            m.target = out.hom(key[0], key[key.len() - 1]).clone();
            out.set_mu(key.clone(), m)?;
        }
        Ok(out)
    }

    /// Stabilizes `cat` and compares homs, `μ` and the Xi matrices of `simplices`.
    pub fn verify(&self, cat: &AInfCategory, simplices: &[CobordismSimplex], arity: usize) -> Result<StabilizationReport, XiError> {
        let st = self.stabilize(cat)?;
        let mut r = StabilizationReport::default();
        let n = cat.object_count();
        for a in 0..n {
            for b in 0..n {
                r.homs_checked += 1;
                if cat.hom(a, b).degrees() != st.hom(a, b).degrees() {
                    r.failures.push(format!("hom({}, {}) changes", a, b));
                }
            }
        }
        let mut keys: Vec<&Vec<usize>> = cat.mu_keys().collect();
        keys.sort();
        for key in keys {
            r.mu_checked += 1;
            let (m0, m1) = (cat.mu(key).unwrap(), st.mu(key).unwrap());
            let same = (0..m0.rows()).all(|i| (0..m0.cols()).all(|j| cat.mode.reduce(m0.get(i, j)) == m1.get(i, j)));
            if !same {
                r.failures.push(format!("mu at {:?} changes", key));
            }
        }
        for s in simplices {
            let (x0, x1) = (xi_map(cat, s, arity), xi_map(&st, s, arity));
            for (k, m0) in &x0.components {
                r.xi_checked += 1;
                let same = x1.components.get(k).is_some_and(|m1| {
                    (0..m0.rows()).all(|i| (0..m0.cols()).all(|j| m0.get(i, j) == m1.get(i, j)))
                });
                if !same {
                    r.failures.push(format!("Xi component {:?} of {:?} changes", k, s.objects));
                }
            }
            if x1.components.len() != x0.components.len() {
                r.failures.push(format!("Xi of {:?} gains components", s.objects));
            }
        }
        r.fibers = self.fibers.borrow().iter().map(|(k, &v)| (k.clone(), v)).collect();
        for (b, v) in &r.fibers {
            if *v != 1 {
                r.failures.push(format!("{} disks over a domain with boundary {:?}", v, b));
            }
        }
        Ok(r)
    }
}

/// Xi of the identity edge on `y0` against the degenerate edge of the
/// dg nerve of modules, and likewise for `candidate` when given.
pub fn s0_object_check(
    cat: &AInfCategory,
    y0: usize,
    arity: usize,
    candidate: Option<&NerveSimplexCandidate>,
) -> Result<CheckReport, XiError> {
    let own;
    let c = match candidate {
        Some(c) => c,
        None => {
            own = build_xi_simplex(cat, &CobordismSimplex::identity(1, y0), arity);
            &own
        }
    };
    let modules = vec![yoneda_module(cat, y0)];
    let ctx = ModuleDg { cat, modules: &modules, arity };
    let vertex = NerveSimplex { n: 0, objects: vec![0], f: BTreeMap::new() };
    let edge = degeneracy(&ctx, 0, &vertex).map_err(|e| XiError::Stabilization(e.to_string()))?;
    let mut report = CheckReport::default();
    for (k, expected) in &edge.f {
        report.checked += 1;
        let got = c.maps.get(k).cloned().unwrap_or_else(|| PreModuleMap::zero(expected.degree));
        let diff = got.add_scaled(expected, -1)?.reduced(cat.mode);
        for (key, m) in &diff.components {
            if let Some(col) = (0..m.cols()).find(|&j| m.column(j).iter().any(|&v| v != 0)) {
                report.failures.push(Residual {
                    location: format!("K={:?} d={} objects {:?} input {}", k, key.len(), key, m.source.id(col)),
                    values: m.column(col),
                });
            }
        }
    }
    Ok(report)
}

/// The degenerate N-simplex on `y0` against the identity cobordism's Xi.
pub fn degenerate_simplex_check(cat: &AInfCategory, y0: usize, n: usize, arity: usize) -> Result<CheckReport, XiError> {
    let c = build_xi_simplex(cat, &CobordismSimplex::identity(n, y0), arity);
    let modules = vec![yoneda_module(cat, y0); n + 1];
    let ctx = ModuleDg { cat, modules: &modules, arity };
    let mut s = NerveSimplex { n: 0, objects: vec![0], f: BTreeMap::new() };
    for _ in 0..n {
        s = degeneracy(&ctx, 0, &s).map_err(|e| XiError::Stabilization(e.to_string()))?;
    }
    let mut report = CheckReport::default();
    for (k, expected) in &s.f {
        report.checked += 1;
        let got = &c.maps[k];
        let diff = got.add_scaled(expected, -1)?.reduced(cat.mode);
        if !diff.is_zero() {
            report.failures.push(Residual { location: format!("K={:?}", k), values: Vec::new() });
        }
    }
    Ok(report)
}
