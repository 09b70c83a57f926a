//! A-infinity categories, right modules, pre-module maps and the operations
//! mu1 / mu2 on them, in Seidel's sign conventions.
//!
//! Inputs are always written left to right as `(a_d, ..., a_1)` with
//! `a_i in hom(X_{i-1}, X_i)`; for modules `(x, a_{d-1}, ..., a_1)` with
//! `x in M(X_{d-1})`.  An object key `[X_0, ..., X_d]` selects a component.

use crate::graded_zmod::{AlgebraError, CoefficientMode, FreeGradedModule, GradedMap};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Residual {
    pub location: String,
    pub values: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub checked: usize,
    pub failures: Vec<Residual>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}

/// Basis of `m_1 ⊗ ... ⊗ m_k` in written order.
pub fn tensor_all(parts: &[&FreeGradedModule]) -> FreeGradedModule {
    let mut acc = match parts.first() {
        Some(m) => (*m).clone(),
        None => return FreeGradedModule::new(vec![("1", 0)]).unwrap(),
    };
    for m in &parts[1..] {
        acc = acc.tensor(m);
    }
    acc
}

fn decode(mut col: usize, ranks: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; ranks.len()];
    for k in (0..ranks.len()).rev() {
        idx[k] = col % ranks[k];
        col /= ranks[k];
    }
    idx
}

/// Adds `coef * map(args)` to `out`, expanding multilinearly.
fn apply_multilinear(map: &GradedMap, ranks: &[usize], args: &[&[i64]], coef: i64, out: &mut [i64]) {
    if coef == 0 {
        return;
    }
    let nz: Vec<Vec<(usize, i64)>> = args
        .iter()
        .map(|v| v.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect())
        .collect();
    if nz.iter().any(|v| v.is_empty()) {
        return;
    }
    let mut pos = vec![0usize; nz.len()];
    loop {
        let mut col = 0;
        let mut c = coef;
        for k in 0..nz.len() {
            let (i, v) = nz[k][pos[k]];
            col = col * ranks[k] + i;
            c *= v;
        }
        for (r, o) in out.iter_mut().enumerate() {
            let e = map.get(r, col);
            if e != 0 {
                *o += c * e;
            }
        }
        let mut k = nz.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < nz[k].len() {
                break;
            }
            pos[k] = 0;
        }
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

#[derive(Clone, Debug)]
pub struct AInfCategory {
    pub objects: Vec<String>,
    homs: BTreeMap<(usize, usize), FreeGradedModule>,
    mu: HashMap<Vec<usize>, GradedMap>,
    pub max_arity: usize,
    pub mode: CoefficientMode,
    empty: FreeGradedModule,
}

impl AInfCategory {
    pub fn new(objects: Vec<String>, max_arity: usize, mode: CoefficientMode) -> Self {
        AInfCategory {
            objects,
            homs: BTreeMap::new(),
            mu: HashMap::new(),
            max_arity,
            mode,
            empty: FreeGradedModule::zero(),
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == id)
    }

    pub fn set_hom(&mut self, x: usize, y: usize, m: FreeGradedModule) {
        self.homs.insert((x, y), m);
    }

    pub fn hom(&self, x: usize, y: usize) -> &FreeGradedModule {
        self.homs.get(&(x, y)).unwrap_or(&self.empty)
    }

    /// Source basis of mu at `key = [X_0..X_d]`.
    pub fn mu_source(&self, key: &[usize]) -> FreeGradedModule {
        let d = key.len() - 1;
        let parts: Vec<&FreeGradedModule> = (0..d).map(|k| self.hom(key[d - k - 1], key[d - k])).collect();
        tensor_all(&parts)
    }

    fn mu_ranks(&self, key: &[usize]) -> Vec<usize> {
        let d = key.len() - 1;
        (0..d).map(|k| self.hom(key[d - k - 1], key[d - k]).rank()).collect()
    }

    pub fn set_mu(&mut self, key: Vec<usize>, map: GradedMap) -> Result<(), AlgebraError> {
        let d = key.len() as i32 - 1;
        if d < 1 {
            return Err(AlgebraError::Structure("mu needs arity >= 1".into()));
        }
        if map.degree != 2 - d {
            return Err(AlgebraError::Structure(format!("mu^{} must have degree {}", d, 2 - d)));
        }
        if map.source.degrees() != self.mu_source(&key).degrees()
            || &map.target != self.hom(key[0], key[d as usize])
        {
            return Err(AlgebraError::BasisMismatch(format!("mu at {:?}", key)));
        }
        map.validate()?;
        self.mu.insert(key, map);
        Ok(())
    }

    pub fn mu(&self, key: &[usize]) -> Option<&GradedMap> {
        self.mu.get(key)
    }

    pub fn mu_keys(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.mu.keys()
    }

    /// Adds `v` to the entry of mu at `key`, output basis `out`, inputs `ins` (written order).
    pub fn add_mu_entry(&mut self, key: &[usize], out: usize, ins: &[usize], v: i64) {
        let ranks = self.mu_ranks(key);
        let col = ins.iter().zip(&ranks).fold(0, |acc, (&i, &r)| acc * r + i);
        if !self.mu.contains_key(key) {
            let d = key.len() as i32 - 1;
            let z = GradedMap::zero(self.mu_source(key), self.hom(key[0], key[key.len() - 1]).clone(), 2 - d);
            self.mu.insert(key.to_vec(), z);
        }
        let mode = self.mode;
        let m = self.mu.get_mut(key).unwrap();
        let cur = m.get(out, col);
        m.set(out, col, mode.reduce(cur + v));
    }

    /// Entry of mu at `key`, output basis `out`, inputs `ins` (written order).
    pub fn mu_entry(&self, key: &[usize], out: usize, ins: &[usize]) -> i64 {
        let ranks = self.mu_ranks(key);
        let col = ins.iter().zip(&ranks).fold(0, |acc, (&i, &r)| acc * r + i);
        self.mu.get(key).map_or(0, |m| m.get(out, col))
    }

    pub fn eval_mu(&self, key: &[usize], args: &[&[i64]], coef: i64, out: &mut [i64]) {
        if let Some(m) = self.mu.get(key) {
            apply_multilinear(m, &self.mu_ranks(key), args, coef, out);
        }
    }

    pub fn reduced(&self, mode: CoefficientMode) -> AInfCategory {
        let mut c = self.clone();
        c.mode = mode;
        for m in c.mu.values_mut() {
            *m = m.reduced(mode);
        }
        c
    }

    /// Object tuples `[X_0..X_d]` with every hom(X_{i-1}, X_i) nonzero.
    pub fn composable_tuples(&self, d: usize) -> Vec<Vec<usize>> {
        let n = self.object_count();
        let mut out: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
        for _ in 0..d {
            let mut next = Vec::new();
            for t in &out {
                let last = *t.last().unwrap();
                for y in 0..n {
                    if self.hom(last, y).rank() > 0 {
                        let mut u = t.clone();
                        u.push(y);
                        next.push(u);
                    }
                }
            }
            out = next;
        }
        out
    }

    fn basis_label(&self, key: &[usize], idx: &[usize]) -> String {
        let d = key.len() - 1;
        let mut s = String::new();
        for (k, &i) in idx.iter().enumerate() {
            if k > 0 {
                s.push_str(", ");
            }
            s.push_str(self.hom(key[d - k - 1], key[d - k]).id(i));
        }
        s
    }
}

/// Sum of reduced degrees |a| - 1.
pub fn maltese(degrees: &[i32]) -> i64 {
    degrees.iter().map(|&d| d as i64 - 1).sum()
}

pub fn check_ainf_relations(cat: &AInfCategory, d_max: usize) -> Result<CheckReport, AlgebraError> {
    if d_max > cat.max_arity {
        return Err(AlgebraError::Structure(format!(
            "arity {} exceeds stored arity {}",
            d_max, cat.max_arity
        )));
    }
    let mode = cat.mode;
    let mut report = CheckReport::default();
    for d in 1..=d_max {
        for key in cat.composable_tuples(d) {
            let target = cat.hom(key[0], key[d]).rank();
            let ranks = cat.mu_ranks(&key);
            let total: usize = ranks.iter().product();
            for col in 0..total {
                let idx = decode(col, &ranks);
                // written position k holds a_{d-k}
                let vecs: Vec<Vec<i64>> = idx.iter().zip(&ranks).map(|(&i, &r)| unit_vec(r, i)).collect();
                let degs: Vec<i32> = (0..d).map(|k| cat.hom(key[d - k - 1], key[d - k]).degree(idx[k])).collect();
                let mut out = vec![0i64; target];
                for b in 1..=d {
                    for c in 0..=(d - b) {
                        // a_{c+b}..a_{c+1} sit at written positions d-c-b .. d-c
                        let lo = d - c - b;
                        let hi = d - c;
                        let inner_key = &key[c..=c + b];
                        let mut inner = vec![0i64; cat.hom(key[c], key[c + b]).rank()];
                        let inner_args: Vec<&[i64]> = vecs[lo..hi].iter().map(|v| v.as_slice()).collect();
                        cat.eval_mu(inner_key, &inner_args, 1, &mut inner);
                        if inner.iter().all(|&v| v == 0) {
                            continue;
                        }
                        let s = mode.sign(maltese(&degs[hi..]));
                        let mut outer_key: Vec<usize> = key[..=c].to_vec();
                        outer_key.extend_from_slice(&key[c + b..]);
                        let mut args: Vec<&[i64]> = vecs[..lo].iter().map(|v| v.as_slice()).collect();
                        args.push(&inner);
                        args.extend(vecs[hi..].iter().map(|v| v.as_slice()));
                        cat.eval_mu(&outer_key, &args, s, &mut out);
                    }
                }
                report.checked += 1;
                if out.iter().any(|&v| mode.reduce(v) != 0) {
                    report.failures.push(Residual {
                        location: format!("d={} objects {:?} inputs ({})", d, key, cat.basis_label(&key, &idx)),
                        values: out.iter().map(|&v| mode.reduce(v)).collect(),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// A collection of components `t^d` keyed by `[X_0..X_{d-1}]`, each from
/// `M(X_{d-1}) ⊗ hom(X_{d-2},X_{d-1}) ⊗ ... ⊗ hom(X_0,X_1)` to `N(X_0)`,
/// of degree `degree - d + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PreModuleMap {
    pub degree: i32,
    pub components: BTreeMap<Vec<usize>, GradedMap>,
}

#[derive(Clone, Debug)]
pub struct AInfModule {
    pub values: Vec<FreeGradedModule>,
    /// The structure maps mu_M, stored as a degree-1 pre-module map.
    pub mu: PreModuleMap,
}

impl AInfModule {
    pub fn value(&self, x: usize) -> &FreeGradedModule {
        &self.values[x]
    }

    pub fn reduced(&self, mode: CoefficientMode) -> AInfModule {
        AInfModule {
            values: self.values.clone(),
            mu: self.mu.reduced(mode),
        }
    }
}

fn module_ranks(cat: &AInfCategory, src: &AInfModule, key: &[usize]) -> Vec<usize> {
    let d = key.len();
    let mut r = vec![src.value(key[d - 1]).rank()];
    for k in (1..d).rev() {
        r.push(cat.hom(key[k - 1], key[k]).rank());
    }
    r
}

fn module_source(cat: &AInfCategory, src: &AInfModule, key: &[usize]) -> FreeGradedModule {
    let d = key.len();
    let mut parts = vec![src.value(key[d - 1])];
    for k in (1..d).rev() {
        parts.push(cat.hom(key[k - 1], key[k]));
    }
    tensor_all(&parts)
}

/// Keys `[X_0..X_{d-1}]` with nonzero source and target data.
pub fn module_keys(cat: &AInfCategory, src: &AInfModule, tgt: &AInfModule, d: usize) -> Vec<Vec<usize>> {
    cat.composable_tuples(d - 1)
        .into_iter()
        .filter(|k| src.value(k[d - 1]).rank() > 0 && tgt.value(k[0]).rank() > 0)
        .collect()
}

impl PreModuleMap {
    pub fn zero(degree: i32) -> Self {
        PreModuleMap {
            degree,
            components: BTreeMap::new(),
        }
    }

    pub fn component(&self, key: &[usize]) -> Option<&GradedMap> {
        self.components.get(key)
    }

    pub fn eval(&self, cat: &AInfCategory, src: &AInfModule, key: &[usize], args: &[&[i64]], coef: i64, out: &mut [i64]) {
        if let Some(m) = self.components.get(key) {
            apply_multilinear(m, &module_ranks(cat, src, key), args, coef, out);
        }
    }

    pub fn reduced(&self, mode: CoefficientMode) -> PreModuleMap {
        let mut components = BTreeMap::new();
        for (k, m) in &self.components {
            let r = m.reduced(mode);
            if !r.is_zero() {
                components.insert(k.clone(), r);
            }
        }
        PreModuleMap {
            degree: self.degree,
            components,
        }
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &PreModuleMap, k: i64) -> Result<PreModuleMap, AlgebraError> {
        if self.degree != other.degree {
            return Err(AlgebraError::Structure("sum of pre-module maps of different degree".into()));
        }
        let mut out = self.clone();
        for (key, m) in &other.components {
            let add = m.scale(k);
            let v = match out.components.remove(key) {
                Some(cur) => cur.add(&add)?,
                None => add,
            };
            out.components.insert(key.clone(), v);
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> PreModuleMap {
        PreModuleMap {
            degree: self.degree,
            components: self.components.iter().map(|(key, m)| (key.clone(), m.scale(k))).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(|m| m.is_zero())
    }

    pub fn truncated(&self, arity: usize) -> PreModuleMap {
        PreModuleMap {
            degree: self.degree,
            components: self
                .components
                .iter()
                .filter(|(k, _)| k.len() <= arity)
                .map(|(k, m)| (k.clone(), m.clone()))
                .collect(),
        }
    }
}

/// Builds a pre-module map by evaluating `f(key, basis indices, degrees)` on
/// every basis tuple; `degs[0] = |x|`, `degs[k] = |a_{d-k}|`.
pub fn build_map<F>(
    cat: &AInfCategory,
    src: &AInfModule,
    tgt: &AInfModule,
    degree: i32,
    arity: usize,
    mut f: F,
) -> PreModuleMap
where
    F: FnMut(&[usize], &[Vec<i64>], &[i32], &mut [i64]),
{
    let mode = cat.mode;
    let mut t = PreModuleMap::zero(degree);
    for d in 1..=arity {
        for key in module_keys(cat, src, tgt, d) {
            let ranks = module_ranks(cat, src, &key);
            let total: usize = ranks.iter().product();
            let source = module_source(cat, src, &key);
            let target = tgt.value(key[0]).clone();
            let mut m = GradedMap::zero(source, target, degree - d as i32 + 1);
            let mut nonzero = false;
            for col in 0..total {
                let idx = decode(col, &ranks);
                let vecs: Vec<Vec<i64>> = idx.iter().zip(&ranks).map(|(&i, &r)| unit_vec(r, i)).collect();
                let mut degs = vec![src.value(key[d - 1]).degree(idx[0])];
                for k in 1..d {
                    degs.push(cat.hom(key[d - k - 1], key[d - k]).degree(idx[k]));
                }
                let mut out = vec![0i64; m.rows()];
                f(&key, &vecs, &degs, &mut out);
                for (r, v) in out.into_iter().enumerate() {
                    let v = mode.reduce(v);
                    if v != 0 {
                        m.set(r, col, v);
                        nonzero = true;
                    }
                }
            }
            if nonzero {
                t.components.insert(key, m);
            }
        }
    }
    t
}

/// Applies the three sums of the mu1 formula (or the two sums of the module
/// relation when `t` is mu_M itself) on one basis tuple.
#[allow(clippy::too_many_arguments)]
fn mu1_terms(
    cat: &AInfCategory,
    src: &AInfModule,
    tgt: &AInfModule,
    t: &PreModuleMap,
    key: &[usize],
    vecs: &[Vec<i64>],
    degs: &[i32],
    heart: bool,
    out: &mut [i64],
) {
    let mode = cat.mode;
    let d = key.len();
    // a_i sits at written position d - i; degs index likewise.
    let sgn = |c: usize| -> i64 {
        if heart {
            // |x| + sum_{i>c} ||a_i||
            mode.sign(degs[0] as i64 + maltese(&degs[1..d - c]))
        } else {
            // sum_{i<=c} ||a_i||
            mode.sign(maltese(&degs[d - c..]))
        }
    };
    for b in 1..=d {
        let c = d - b;
        let s = sgn(c);
        let inner_key = &key[c..];
        let args: Vec<&[i64]> = vecs[..b].iter().map(|v| v.as_slice()).collect();
        // mu_N (t^b (...), ...)
        if heart {
            let mut inner = vec![0i64; tgt.value(key[c]).rank()];
            t.eval(cat, src, inner_key, &args, 1, &mut inner);
            if inner.iter().any(|&v| v != 0) {
                let mut outer: Vec<&[i64]> = vec![&inner];
                outer.extend(vecs[b..].iter().map(|v| v.as_slice()));
                tgt.mu.eval(cat, tgt, &key[..=c], &outer, s, out);
            }
        }
        // t^{1+c}(mu_M^b(...), ...)
        let mut inner = vec![0i64; src.value(key[c]).rank()];
        src.mu.eval(cat, src, inner_key, &args, 1, &mut inner);
        if inner.iter().any(|&v| v != 0) {
            let mut outer: Vec<&[i64]> = vec![&inner];
            outer.extend(vecs[b..].iter().map(|v| v.as_slice()));
            t.eval(cat, src, &key[..=c], &outer, s, out);
        }
    }
    // t^{a+1+c}(x, ..., mu^b(...), ...), a >= 1
    for b in 1..d {
        for c in 0..(d - b) {
            let s = sgn(c);
            // a_{c+b}..a_{c+1} at written positions d-c-b .. d-c
            let lo = d - c - b;
            let hi = d - c;
            let mut inner = vec![0i64; cat.hom(key[c], key[c + b]).rank()];
            let args: Vec<&[i64]> = vecs[lo..hi].iter().map(|v| v.as_slice()).collect();
            cat.eval_mu(&key[c..=c + b], &args, 1, &mut inner);
            if inner.iter().all(|&v| v == 0) {
                continue;
            }
            let mut outer_key = key[..=c].to_vec();
            outer_key.extend_from_slice(&key[c + b..]);
            let mut outer: Vec<&[i64]> = vecs[..lo].iter().map(|v| v.as_slice()).collect();
            outer.push(&inner);
            outer.extend(vecs[hi..].iter().map(|v| v.as_slice()));
            t.eval(cat, src, &outer_key, &outer, s, out);
        }
    }
}

pub fn check_module_relations(cat: &AInfCategory, m: &AInfModule, d_max: usize) -> Result<CheckReport, AlgebraError> {
    if d_max > cat.max_arity {
        return Err(AlgebraError::Structure(format!(
            "arity {} exceeds stored arity {}",
            d_max, cat.max_arity
        )));
    }
    let mode = cat.mode;
    let mut report = CheckReport::default();
    for d in 1..=d_max {
        for key in module_keys(cat, m, m, d) {
            let ranks = module_ranks(cat, m, &key);
            let total: usize = ranks.iter().product();
            for col in 0..total {
                let idx = decode(col, &ranks);
                let vecs: Vec<Vec<i64>> = idx.iter().zip(&ranks).map(|(&i, &r)| unit_vec(r, i)).collect();
                let mut degs = vec![m.value(key[d - 1]).degree(idx[0])];
                for k in 1..d {
                    degs.push(cat.hom(key[d - k - 1], key[d - k]).degree(idx[k]));
                }
                let mut out = vec![0i64; m.value(key[0]).rank()];
                mu1_terms(cat, m, m, &m.mu, &key, &vecs, &degs, false, &mut out);
                report.checked += 1;
                if out.iter().any(|&v| mode.reduce(v) != 0) {
                    report.failures.push(Residual {
                        location: format!("d={} objects {:?} basis {:?}", d, key, idx),
                        values: out.iter().map(|&v| mode.reduce(v)).collect(),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// mu1 of a pre-module map `t: src -> tgt`, components up to `arity`.
pub fn mu1(cat: &AInfCategory, src: &AInfModule, tgt: &AInfModule, t: &PreModuleMap, arity: usize) -> PreModuleMap {
    build_map(cat, src, tgt, t.degree + 1, arity, |key, vecs, degs, out| {
        mu1_terms(cat, src, tgt, t, key, vecs, degs, true, out)
    })
}

/// mu2(t2, t1) for `t1: m0 -> m1`, `t2: m1 -> m2`.
pub fn mu2(
    cat: &AInfCategory,
    m0: &AInfModule,
    m1: &AInfModule,
    m2: &AInfModule,
    t2: &PreModuleMap,
    t1: &PreModuleMap,
    arity: usize,
) -> PreModuleMap {
    let mode = cat.mode;
    build_map(cat, m0, m2, t1.degree + t2.degree, arity, |key, vecs, degs, out| {
        let d = key.len();
        for b in 1..=d {
            let c = d - b;
            let s = mode.sign(degs[0] as i64 + maltese(&degs[1..b]));
            let mut inner = vec![0i64; m1.value(key[c]).rank()];
            let args: Vec<&[i64]> = vecs[..b].iter().map(|v| v.as_slice()).collect();
            t1.eval(cat, m0, &key[c..], &args, 1, &mut inner);
            if inner.iter().all(|&v| v == 0) {
                continue;
            }
            let mut outer: Vec<&[i64]> = vec![&inner];
            outer.extend(vecs[b..].iter().map(|v| v.as_slice()));
            t2.eval(cat, m1, &key[..=c], &outer, s, out);
        }
    })
}

/// The strict unit u^1(x) = (-1)^{|x|} x of a module.
pub fn unit(m: &AInfModule) -> PreModuleMap {
    let mut t = PreModuleMap::zero(0);
    for (x, v) in m.values.iter().enumerate() {
        if v.rank() == 0 {
            continue;
        }
        let source = tensor_all(&[v]);
        let mut g = GradedMap::zero(source, v.clone(), 0);
        for i in 0..v.rank() {
            g.set(i, i, crate::graded_zmod::sign(v.degree(i) as i64));
        }
        t.components.insert(vec![x], g);
    }
    t
}

/// The Yoneda module hom(-, y).
pub fn yoneda_module(cat: &AInfCategory, y: usize) -> AInfModule {
    let values: Vec<FreeGradedModule> = (0..cat.object_count()).map(|x| cat.hom(x, y).clone()).collect();
    let mut mu = PreModuleMap::zero(1);
    for key in cat.mu_keys() {
        if *key.last().unwrap() == y && key.len() >= 2 {
            let m = cat.mu(key).unwrap();
            if !m.is_zero() {
                mu.components.insert(key[..key.len() - 1].to_vec(), m.clone());
            }
        }
    }
    AInfModule { values, mu }
}

/// The pre-module map hom(-, y0) -> hom(-, y1) given by
/// `(x, a_{d-1}, ..., a_1) -> mu^{d+1}(f, x, a_{d-1}, ..., a_1)`.
pub fn yoneda_map(cat: &AInfCategory, f: &[i64], degree: i32, y0: usize, y1: usize, arity: usize) -> PreModuleMap {
    let m0 = yoneda_module(cat, y0);
    let m1 = yoneda_module(cat, y1);
    build_map(cat, &m0, &m1, degree, arity, |key, vecs, _degs, out| {
        let mut full = key.to_vec();
        full.push(y0);
        full.push(y1);
        let mut args: Vec<&[i64]> = vec![f];
        args.extend(vecs.iter().map(|v| v.as_slice()));
        cat.eval_mu(&full, &args, 1, out);
    })
}

/// Modules Xi(Y_i) with maps Xi_{Y_K} for every |K| >= 2; the map for K has
/// degree 2 - |K|.
#[derive(Clone, Debug)]
pub struct NerveSimplexCandidate {
    pub n: usize,
    pub modules: Vec<AInfModule>,
    pub maps: BTreeMap<Vec<usize>, PreModuleMap>,
}

pub fn subsets_of_size_at_least(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << (n + 1)) {
        let s: Vec<usize> = (0..=n).filter(|&i| mask & (1 << i) != 0).collect();
        if s.len() >= k {
            out.push(s);
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Right-hand side of the nerve equation in element form,
/// `(-1)^{|K|} [ sum_j (-1)^j Xi_{K - k_j} + sum_j (-1)^{|K|(j-1)} mu2(Xi_{K>=k_j}, Xi_{K<=k_j}) ]`.
pub fn goal_rhs(
    cat: &AInfCategory,
    c: &NerveSimplexCandidate,
    k: &[usize],
    arity: usize,
) -> Result<PreModuleMap, AlgebraError> {
    let m = k.len() - 1;
    let get = |s: &[usize]| {
        c.maps
            .get(s)
            .ok_or_else(|| AlgebraError::Structure(format!("missing face data for {:?}", s)))
    };
    let mut rhs = PreModuleMap::zero(2 - k.len() as i32 + 1);
    for j in 1..m {
        let mut face = k.to_vec();
        face.remove(j);
        rhs = rhs.add_scaled(&get(&face)?.truncated(arity), crate::graded_zmod::sign(j as i64))?;
        let lo = &k[..=j];
        let hi = &k[j..];
        let w = mu2(
            cat,
            &c.modules[k[0]],
            &c.modules[k[j]],
            &c.modules[k[m]],
            get(hi)?,
            get(lo)?,
            arity,
        );
        rhs = rhs.add_scaled(&w, crate::graded_zmod::sign((k.len() * (j - 1)) as i64))?;
    }
    Ok(rhs.scale(crate::graded_zmod::sign(k.len() as i64)).reduced(cat.mode))
}

pub fn check_goal_equation(
    c: &NerveSimplexCandidate,
    cat: &AInfCategory,
    d_max: usize,
) -> Result<CheckReport, AlgebraError> {
    if d_max > cat.max_arity {
        return Err(AlgebraError::Structure(format!(
            "arity {} exceeds stored arity {}",
            d_max, cat.max_arity
        )));
    }
    let mut report = CheckReport::default();
    for k in subsets_of_size_at_least(c.n, 2) {
        let t = c
            .maps
            .get(&k)
            .ok_or_else(|| AlgebraError::Structure(format!("missing face data for {:?}", k)))?;
        if t.degree != 2 - k.len() as i32 {
            return Err(AlgebraError::Structure(format!(
                "Xi for {:?} has degree {}, expected {}",
                k,
                t.degree,
                2 - k.len() as i32
            )));
        }
        let lhs = mu1(cat, &c.modules[k[0]], &c.modules[k[k.len() - 1]], t, d_max);
        let rhs = goal_rhs(cat, c, &k, d_max)?;
        let diff = lhs.add_scaled(&rhs, -1)?.reduced(cat.mode);
        report.checked += 1;
        for (key, m) in &diff.components {
            if m.is_zero() {
                continue;
            }
            let col = (0..m.cols()).find(|&c| m.column(c).iter().any(|&v| v != 0)).unwrap();
            report.failures.push(Residual {
                location: format!("K={:?} d={} objects {:?} input {}", k, key.len(), key, m.source.id(col)),
                values: m.column(col),
            });
        }
    }
    Ok(report)
}

/// A random pre-module map of the given degree with components up to `arity`.
pub fn random_premodule<R: rand::Rng>(rng: &mut R, cat: &AInfCategory, m0: &AInfModule, m1: &AInfModule, deg: i32, arity: usize) -> PreModuleMap {
    let mut t = PreModuleMap::zero(deg);
    for d in 1..=arity {
        for key in module_keys(cat, m0, m1, d) {
            let src = module_source(cat, m0, &key);
            let tgt = m1.value(key[0]).clone();
            let cdeg = deg - d as i32 + 1;
            let mut g = GradedMap::zero(src.clone(), tgt.clone(), cdeg);
            for r in 0..tgt.rank() {
                for c in 0..src.rank() {
                    if tgt.degree(r) == src.degree(c) + cdeg && rng.gen_bool(0.5) {
                        g.set(r, c, rng.gen_range(-2..=2));
                    }
                }
            }
            t.components.insert(key, g);
        }
    }
    t
}
