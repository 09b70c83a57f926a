//! Simplices of the dg nerve: data, the validation equation, pullbacks.
//!
//! An A-infinity category with vanishing mu^{>=3} is read as a dg category via
//! `d f = (-1)^{|f|} mu1(f)` and `g∘f = (-1)^{|f|} mu2(g, f)`.

use crate::a_infinity::{mu1, mu2, AInfCategory, AInfModule, CheckReport, PreModuleMap, Residual};
use crate::graded_zmod::{sign, AlgebraError, CoefficientMode, FreeGradedModule};
use rand::Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NerveError {
    #[error("missing f_K for K = {0:?}")]
    Missing(Vec<usize>),
    #[error("f_K for K = {k:?} has a component of degree {found}, expected {expected}")]
    Degree { k: Vec<usize>, found: i32, expected: i32 },
    #[error("map is not monotone: {0:?}")]
    NotMonotone(Vec<usize>),
    #[error("index {0} out of range")]
    Index(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Operations a dg category must provide for nerve computations.
pub trait DgContext {
    type Mor: Clone;
    fn d(&self, f: &Self::Mor, src: usize, tgt: usize, deg: i32) -> Self::Mor;
    fn comp(&self, g: &Self::Mor, f: &Self::Mor, objs: [usize; 3], deg_g: i32, deg_f: i32) -> Self::Mor;
    fn identity(&self, x: usize) -> Self::Mor;
    fn zero(&self, src: usize, tgt: usize, deg: i32) -> Self::Mor;
    fn axpy(&self, acc: &Self::Mor, k: i64, f: &Self::Mor) -> Self::Mor;
    /// Nonzero entries of `f`, flattened, or `None` when `f` vanishes.
    fn residual(&self, f: &Self::Mor) -> Option<Vec<i64>>;
}

/// Subset-indexed data of an N-simplex; `objects[i]` is X_i.
#[derive(Clone, Debug, PartialEq)]
pub struct NerveSimplex<M> {
    pub n: usize,
    pub objects: Vec<usize>,
    pub f: BTreeMap<Vec<usize>, M>,
}

pub fn proper_subsets(n: usize) -> Vec<Vec<usize>> {
    crate::a_infinity::subsets_of_size_at_least(n, 2)
}

/// Sign of the composite f_{K''}∘f_{K'} in d f_K, with m = |K|-1, j = |K'|-1.
pub fn split_sign(k_len: usize, lo_len: usize) -> i64 {
    sign(((k_len - 1) * (lo_len - 2)) as i64)
}

/// Right-hand side of the nerve equation for K.
pub fn nerve_rhs<C: DgContext>(ctx: &C, s: &NerveSimplex<C::Mor>, k: &[usize]) -> Result<C::Mor, NerveError> {
    let m = k.len() - 1;
    let get = |j: &[usize]| s.f.get(j).ok_or_else(|| NerveError::Missing(j.to_vec()));
    let x = |i: usize| s.objects[i];
    let mut acc = ctx.zero(x(k[0]), x(k[m]), 3 - k.len() as i32);
    for j in 1..m {
        let mut face = k.to_vec();
        face.remove(j);
        acc = ctx.axpy(&acc, sign(j as i64), get(&face)?);
        let lo = &k[..=j];
        let hi = &k[j..];
        let g = ctx.comp(
            get(hi)?,
            get(lo)?,
            [x(k[0]), x(k[j]), x(k[m])],
            2 - hi.len() as i32,
            2 - lo.len() as i32,
        );
        acc = ctx.axpy(&acc, split_sign(k.len(), lo.len()), &g);
    }
    Ok(acc)
}

pub fn validate<C: DgContext>(ctx: &C, s: &NerveSimplex<C::Mor>) -> Result<CheckReport, NerveError> {
    let mut report = CheckReport::default();
    for k in proper_subsets(s.n) {
        let f = s.f.get(&k).ok_or_else(|| NerveError::Missing(k.clone()))?;
        let lhs = ctx.d(f, s.objects[k[0]], s.objects[k[k.len() - 1]], 2 - k.len() as i32);
        let rhs = nerve_rhs(ctx, s, &k)?;
        let diff = ctx.axpy(&lhs, -1, &rhs);
        report.checked += 1;
        if let Some(values) = ctx.residual(&diff) {
            report.failures.push(Residual {
                location: format!("K={:?}", k),
                values,
            });
        }
    }
    Ok(report)
}

/// Pullback along a monotone map alpha: [n] -> [n'], given as its values.
pub fn pullback<C: DgContext>(ctx: &C, alpha: &[usize], s: &NerveSimplex<C::Mor>) -> Result<NerveSimplex<C::Mor>, NerveError> {
    if alpha.windows(2).any(|w| w[0] > w[1]) {
        return Err(NerveError::NotMonotone(alpha.to_vec()));
    }
    if let Some(&bad) = alpha.iter().find(|&&a| a > s.n) {
        return Err(NerveError::Index(bad));
    }
    let n = alpha.len() - 1;
    let objects: Vec<usize> = alpha.iter().map(|&a| s.objects[a]).collect();
    let mut f = BTreeMap::new();
    for j in proper_subsets(n) {
        let mut image: Vec<usize> = j.iter().map(|&i| alpha[i]).collect();
        image.dedup();
        let g = if image.len() == j.len() {
            s.f.get(&image).ok_or_else(|| NerveError::Missing(image.clone()))?.clone()
        } else if j.len() == 2 {
            ctx.identity(objects[j[0]])
        } else {
            ctx.zero(objects[j[0]], objects[j[j.len() - 1]], 2 - j.len() as i32)
        };
        f.insert(j, g);
    }
    Ok(NerveSimplex { n, objects, f })
}

pub fn coface(n: usize, i: usize) -> Vec<usize> {
    (0..n).map(|k| if k < i { k } else { k + 1 }).collect()
}

pub fn codegeneracy(n: usize, i: usize) -> Vec<usize> {
    (0..=n + 1).map(|k| if k <= i { k } else { k - 1 }).collect()
}

pub fn face<C: DgContext>(ctx: &C, i: usize, s: &NerveSimplex<C::Mor>) -> Result<NerveSimplex<C::Mor>, NerveError> {
    if i > s.n || s.n == 0 {
        return Err(NerveError::Index(i));
    }
    pullback(ctx, &coface(s.n, i), s)
}

pub fn degeneracy<C: DgContext>(ctx: &C, i: usize, s: &NerveSimplex<C::Mor>) -> Result<NerveSimplex<C::Mor>, NerveError> {
    if i > s.n {
        return Err(NerveError::Index(i));
    }
    pullback(ctx, &codegeneracy(s.n, i), s)
}

/// A dg category presented as an A-infinity category without higher products.
#[derive(Clone, Debug)]
pub struct DgCategory {
    pub cat: AInfCategory,
}

/// A homogeneous morphism: coefficient vector in hom(src, tgt).
pub type Element = Vec<i64>;

impl DgCategory {
    pub fn new(cat: AInfCategory) -> Result<Self, AlgebraError> {
        if cat.mu_keys().any(|k| k.len() > 3) {
            return Err(AlgebraError::Structure("dg category with nonzero mu^{>=3}".into()));
        }
        Ok(DgCategory { cat })
    }
}

impl DgContext for DgCategory {
    type Mor = Element;

    fn d(&self, f: &Element, src: usize, tgt: usize, deg: i32) -> Element {
        let mut out = vec![0; self.cat.hom(src, tgt).rank()];
        self.cat.eval_mu(&[src, tgt], &[f], self.cat.mode.sign(deg as i64), &mut out);
        out.iter().map(|&v| self.cat.mode.reduce(v)).collect()
    }

    fn comp(&self, g: &Element, f: &Element, objs: [usize; 3], _deg_g: i32, deg_f: i32) -> Element {
        let mut out = vec![0; self.cat.hom(objs[0], objs[2]).rank()];
        self.cat.eval_mu(&objs, &[g, f], self.cat.mode.sign(deg_f as i64), &mut out);
        out.iter().map(|&v| self.cat.mode.reduce(v)).collect()
    }

    fn identity(&self, x: usize) -> Element {
        identity_element(&self.cat, x).expect("object without a strict unit")
    }

    fn zero(&self, src: usize, tgt: usize, _deg: i32) -> Element {
        vec![0; self.cat.hom(src, tgt).rank()]
    }

    fn axpy(&self, acc: &Element, k: i64, f: &Element) -> Element {
        acc.iter().zip(f).map(|(a, b)| self.cat.mode.reduce(a + k * b)).collect()
    }

    fn residual(&self, f: &Element) -> Option<Vec<i64>> {
        if f.iter().all(|&v| v == 0) {
            None
        } else {
            Some(f.clone())
        }
    }
}

/// The basis element named `id` in hom(x, x), as registered by the builders here.
pub fn identity_element(cat: &AInfCategory, x: usize) -> Option<Element> {
    let h = cat.hom(x, x);
    // chain-complex categories: identity = sum of diagonal elementary maps
    let mut v = vec![0; h.rank()];
    if let Some(i) = h.index_of("e") {
        v[i] = 1;
        return Some(v);
    }
    let mut found = false;
    for (i, id) in h.ids().iter().enumerate() {
        if let Some(rest) = id.strip_prefix('E') {
            let mut it = rest.split('_');
            if let (Some(r), Some(c)) = (it.next(), it.next()) {
                if r == c {
                    v[i] = 1;
                    found = true;
                }
            }
        }
    }
    found.then_some(v)
}

/// Degree of a homogeneous element, `None` for zero or inhomogeneous.
pub fn element_degree(m: &FreeGradedModule, v: &[i64]) -> Option<i32> {
    let mut deg = None;
    for (i, &c) in v.iter().enumerate() {
        if c != 0 {
            match deg {
                None => deg = Some(m.degree(i)),
                Some(d) if d != m.degree(i) => return None,
                _ => {}
            }
        }
    }
    deg
}

pub fn check_degrees(dg: &DgCategory, s: &NerveSimplex<Element>) -> Result<(), NerveError> {
    for (k, f) in &s.f {
        let m = dg.cat.hom(s.objects[k[0]], s.objects[k[k.len() - 1]]);
        let expected = 2 - k.len() as i32;
        for (i, &c) in f.iter().enumerate() {
            if c != 0 && m.degree(i) != expected {
                return Err(NerveError::Degree {
                    k: k.clone(),
                    found: m.degree(i),
                    expected,
                });
            }
        }
    }
    Ok(())
}

/// A bounded complex of free modules: basis degrees and differential matrix.
#[derive(Clone, Debug)]
pub struct Complex {
    pub degrees: Vec<i32>,
    pub d: Vec<Vec<i64>>,
}

/// The full dg subcategory of chain complexes on `complexes`, with
/// hom basis `E{r}_{c}` (column c of the source to row r of the target).
pub fn chain_complex_category(complexes: &[Complex], mode: CoefficientMode) -> DgCategory {
    let n = complexes.len();
    let mut cat = AInfCategory::new((0..n).map(|i| format!("C{}", i)).collect(), 2, mode);
    let hom_basis = |i: usize, j: usize| -> Vec<(usize, usize, i32)> {
        let (a, b) = (&complexes[i], &complexes[j]);
        let mut v = Vec::new();
        for r in 0..b.degrees.len() {
            for c in 0..a.degrees.len() {
                v.push((r, c, b.degrees[r] - a.degrees[c]));
            }
        }
        v
    };
    for i in 0..n {
        for j in 0..n {
            let basis = hom_basis(i, j);
            let m = FreeGradedModule::new(basis.iter().map(|&(r, c, d)| (format!("E{}_{}", r, c), d)).collect()).unwrap();
            cat.set_hom(i, j, m);
        }
    }
    let mat_of = |i: usize, j: usize, v: &[i64]| -> Vec<Vec<i64>> {
        let (a, b) = (&complexes[i], &complexes[j]);
        let mut m = vec![vec![0; a.degrees.len()]; b.degrees.len()];
        for (k, &(r, c, _)) in hom_basis(i, j).iter().enumerate() {
            m[r][c] = v[k];
        }
        m
    };
    let matmul = |x: &Vec<Vec<i64>>, y: &Vec<Vec<i64>>, inner: usize, cols: usize| -> Vec<Vec<i64>> {
        x.iter()
            .map(|row| (0..cols).map(|c| (0..inner).map(|k| row[k] * y[k][c]).sum()).collect())
            .collect()
    };
    for i in 0..n {
        for j in 0..n {
            let basis = hom_basis(i, j);
            let (a, b) = (&complexes[i], &complexes[j]);
            for (col, &(_, _, deg)) in basis.iter().enumerate() {
                let mut e = vec![0; basis.len()];
                e[col] = 1;
                let f = mat_of(i, j, &e);
                // mu1(f) = (-1)^{|f|} (d f - (-1)^{|f|} f d) = (-1)^{|f|} d f - f d
                let df = matmul(&b.d, &f, b.degrees.len(), a.degrees.len());
                let fd = matmul(&f, &a.d, a.degrees.len(), a.degrees.len());
                for (k, &(r, c, _)) in basis.iter().enumerate() {
                    let v = sign(deg as i64) * df[r][c] - fd[r][c];
                    if v != 0 {
                        cat.add_mu_entry(&[i, j], k, &[col], v);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let bf = hom_basis(i, j);
                let bg = hom_basis(j, k);
                let bt = hom_basis(i, k);
                let index: BTreeMap<(usize, usize), usize> = bt.iter().enumerate().map(|(t, &(r, c, _))| ((r, c), t)).collect();
                for (gi, &(gr, gc, _)) in bg.iter().enumerate() {
                    for (fi, &(fr, fc, fdeg)) in bf.iter().enumerate() {
                        if gc == fr {
                            // mu2(g, f) = (-1)^{|f|} g f
                            cat.add_mu_entry(&[i, j, k], index[&(gr, fc)], &[gi, fi], sign(fdeg as i64));
                        }
                    }
                }
            }
        }
    }
    DgCategory { cat }
}

/// Random complex: point and contractible summands, conjugated by a random
/// unimodular change of basis in each degree.
pub fn random_complex<R: Rng>(rng: &mut R, max_rank: usize) -> Complex {
    let mut degrees = Vec::new();
    let mut pairs = Vec::new();
    let summands = rng.gen_range(1..=max_rank.max(1));
    while degrees.len() < summands {
        let deg = rng.gen_range(-1..=1);
        if degrees.len() + 2 <= summands && rng.gen_bool(0.4) {
            pairs.push((degrees.len(), degrees.len() + 1));
            degrees.push(deg);
            degrees.push(deg + 1);
        } else {
            degrees.push(deg);
        }
    }
    let r = degrees.len();
    let mut d = vec![vec![0i64; r]; r];
    for &(a, b) in &pairs {
        d[b][a] = 1;
    }
    // conjugate by elementary operations inside a degree: P d P^{-1}
    for _ in 0..3 {
        let i = rng.gen_range(0..r);
        let j = rng.gen_range(0..r);
        if i == j || degrees[i] != degrees[j] {
            continue;
        }
        let k: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        // P = 1 + k E_ij: rows i += k * row j, then columns j -= k * column i
        let row_j = d[j].clone();
        for (x, y) in d[i].iter_mut().zip(row_j) {
            *x += k * y;
        }
        for row in d.iter_mut() {
            row[j] -= k * row[i];
        }
    }
    Complex { degrees, d }
}

pub fn random_element<R: Rng>(rng: &mut R, m: &FreeGradedModule, deg: i32) -> Element {
    (0..m.rank())
        .map(|i| if m.degree(i) == deg { rng.gen_range(-2..=2) } else { 0 })
        .collect()
}

/// Random closed element of degree 0 in hom(x, y): d h plus a random cycle
/// found by sampling among degree-0 elements with vanishing differential.
pub fn random_closed<R: Rng>(rng: &mut R, dg: &DgCategory, x: usize, y: usize, deg: i32) -> Element {
    let m = dg.cat.hom(x, y);
    let h = random_element(rng, m, deg - 1);
    let mut f = dg.d(&h, x, y, deg - 1);
    for _ in 0..8 {
        let z = random_element(rng, m, deg);
        if dg.residual(&dg.d(&z, x, y, deg)).is_none() {
            f = dg.axpy(&f, 1, &z);
            break;
        }
    }
    if x == y && rng.gen_bool(0.5) {
        if let Some(e) = identity_element(&dg.cat, x) {
            f = dg.axpy(&f, 1, &e);
        }
    }
    f
}

/// A random valid N-simplex: free choices on the spine and on every subset
/// containing min+1, the remaining subsets solved from their equations.
pub fn random_simplex<R: Rng>(rng: &mut R, dg: &DgCategory, objects: Vec<usize>) -> NerveSimplex<Element> {
    let n = objects.len() - 1;
    let mut s = NerveSimplex { n, objects, f: BTreeMap::new() };
    let x = |s: &NerveSimplex<Element>, i: usize| s.objects[i];
    for i in 0..n {
        let f = random_closed(rng, dg, x(&s, i), x(&s, i + 1), 0);
        s.f.insert(vec![i, i + 1], f);
    }
    let mut free: Vec<Vec<usize>> = proper_subsets(n)
        .into_iter()
        .filter(|q| q.len() >= 3 && q[1] == q[0] + 1)
        .collect();
    free.sort_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])).then(a.cmp(b)));
    for q in free {
        let deg = 2 - q.len() as i32;
        let fq = random_element(rng, dg.cat.hom(x(&s, q[0]), x(&s, q[q.len() - 1])), deg);
        s.f.insert(q.clone(), fq.clone());
        let mut target = q.clone();
        target.remove(1);
        // d f_Q = -f_{Q - q_1} + rest  =>  f_{Q - q_1} = rest - d f_Q
        let placeholder = dg.zero(x(&s, q[0]), x(&s, q[q.len() - 1]), deg + 1);
        s.f.insert(target.clone(), placeholder);
        let rhs = nerve_rhs(dg, &s, &q).expect("lower data present");
        let dq = dg.d(&fq, x(&s, q[0]), x(&s, q[q.len() - 1]), deg);
        s.f.insert(target, dg.axpy(&rhs, -1, &dq));
    }
    s
}

/// The dg structure on pre-module maps: `d t = (-1)^{|t|} mu1 t`,
/// `t2∘t1 = (-1)^{|t1|} mu2(t2, t1)`; objects index `modules`.
pub struct ModuleDg<'a> {
    pub cat: &'a AInfCategory,
    pub modules: &'a [AInfModule],
    pub arity: usize,
}

impl<'a> DgContext for ModuleDg<'a> {
    type Mor = PreModuleMap;

    fn d(&self, f: &PreModuleMap, src: usize, tgt: usize, _deg: i32) -> PreModuleMap {
        mu1(self.cat, &self.modules[src], &self.modules[tgt], f, self.arity).scale(self.cat.mode.sign(f.degree as i64))
    }

    fn comp(&self, g: &PreModuleMap, f: &PreModuleMap, objs: [usize; 3], _dg: i32, _df: i32) -> PreModuleMap {
        let m = &self.modules;
        mu2(self.cat, &m[objs[0]], &m[objs[1]], &m[objs[2]], g, f, self.arity).scale(self.cat.mode.sign(f.degree as i64))
    }

    fn identity(&self, x: usize) -> PreModuleMap {
        crate::a_infinity::unit(&self.modules[x])
    }

    fn zero(&self, _src: usize, _tgt: usize, deg: i32) -> PreModuleMap {
        PreModuleMap::zero(deg)
    }

    fn axpy(&self, acc: &PreModuleMap, k: i64, f: &PreModuleMap) -> PreModuleMap {
        let f = if f.degree != acc.degree && f.is_zero() {
            PreModuleMap::zero(acc.degree)
        } else {
            f.clone()
        };
        let acc = if acc.degree != f.degree && acc.is_zero() {
            PreModuleMap::zero(f.degree)
        } else {
            acc.clone()
        };
        acc.add_scaled(&f.truncated(self.arity), k)
            .expect("degrees agree")
            .reduced(self.cat.mode)
    }

    fn residual(&self, f: &PreModuleMap) -> Option<Vec<i64>> {
        let r = f.reduced(self.cat.mode);
        let vals: Vec<i64> = r
            .components
            .values()
            .flat_map(|m| (0..m.cols()).flat_map(move |c| m.column(c)))
            .filter(|&v| v != 0)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals)
        }
    }
}
