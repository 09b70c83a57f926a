//! Finitely based graded modules over Z (or Z/2) and integer-matrix maps.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("degree mismatch: entry ({row}, {col}) of a degree {map_degree} map joins degrees {col_degree} -> {row_degree}")]
    DegreeMismatch {
        row: usize,
        col: usize,
        map_degree: i32,
        row_degree: i32,
        col_degree: i32,
    },
    #[error("duplicate basis id {0}")]
    DuplicateId(String),
    #[error("{0}")]
    Structure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum CoefficientMode {
    #[default]
    Integers,
    ModTwo,
}

impl CoefficientMode {
    pub fn reduce(self, v: i64) -> i64 {
        match self {
            CoefficientMode::Integers => v,
            CoefficientMode::ModTwo => v.rem_euclid(2),
        }
    }

    /// (-1)^e in this coefficient ring.
    pub fn sign(self, e: i64) -> i64 {
        if e.rem_euclid(2) == 0 || self == CoefficientMode::ModTwo {
            1
        } else {
            -1
        }
    }
}

/// (-1)^e as an integer.
pub fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct FreeGradedModule {
    ids: Vec<String>,
    degrees: Vec<i32>,
}

impl FreeGradedModule {
    pub fn new<S: Into<String>>(basis: Vec<(S, i32)>) -> Result<Self, AlgebraError> {
        let mut ids = Vec::with_capacity(basis.len());
        let mut degrees = Vec::with_capacity(basis.len());
        let mut seen = HashSet::new();
        for (id, deg) in basis {
            let id = id.into();
            if !seen.insert(id.clone()) {
                return Err(AlgebraError::DuplicateId(id));
            }
            ids.push(id);
            degrees.push(deg);
        }
        Ok(FreeGradedModule { ids, degrees })
    }

    pub fn zero() -> Self {
        FreeGradedModule::default()
    }

    pub fn rank(&self) -> usize {
        self.ids.len()
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Basis of the tensor product, ordered lexicographically (self index major).
    pub fn tensor(&self, other: &FreeGradedModule) -> FreeGradedModule {
        let mut ids = Vec::with_capacity(self.rank() * other.rank());
        let mut degrees = Vec::with_capacity(self.rank() * other.rank());
        for i in 0..self.rank() {
            for j in 0..other.rank() {
                ids.push(format!("{}⊗{}", self.ids[i], other.ids[j]));
                degrees.push(self.degrees[i] + other.degrees[j]);
            }
        }
        FreeGradedModule { ids, degrees }
    }
}

/// M[k]: every degree drops by k, so M[k]^n = M^{n+k}.
pub fn shift(m: &FreeGradedModule, k: i32) -> FreeGradedModule {
    FreeGradedModule {
        ids: m.ids.clone(),
        degrees: m.degrees.iter().map(|d| d - k).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedMap {
    pub source: FreeGradedModule,
    pub target: FreeGradedModule,
    pub degree: i32,
    entries: Vec<i64>,
}

impl GradedMap {
    pub fn new(
        source: FreeGradedModule,
        target: FreeGradedModule,
        degree: i32,
        entries: Vec<Vec<i64>>,
    ) -> Result<Self, AlgebraError> {
        if entries.len() != target.rank() || entries.iter().any(|r| r.len() != source.rank()) {
            return Err(AlgebraError::BasisMismatch(format!(
                "matrix shape does not match {}x{}",
                target.rank(),
                source.rank()
            )));
        }
        let flat = entries.into_iter().flatten().collect();
        Self::from_flat(source, target, degree, flat)
    }

    pub fn from_flat(
        source: FreeGradedModule,
        target: FreeGradedModule,
        degree: i32,
        entries: Vec<i64>,
    ) -> Result<Self, AlgebraError> {
        if entries.len() != target.rank() * source.rank() {
            return Err(AlgebraError::BasisMismatch("entry count".into()));
        }
        let m = GradedMap {
            source,
            target,
            degree,
            entries,
        };
        m.check_degrees()?;
        Ok(m)
    }

    fn check_degrees(&self) -> Result<(), AlgebraError> {
        for r in 0..self.target.rank() {
            for c in 0..self.source.rank() {
                if self.get(r, c) != 0 && self.target.degree(r) != self.source.degree(c) + self.degree {
                    return Err(AlgebraError::DegreeMismatch {
                        row: r,
                        col: c,
                        map_degree: self.degree,
                        row_degree: self.target.degree(r),
                        col_degree: self.source.degree(c),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn zero(source: FreeGradedModule, target: FreeGradedModule, degree: i32) -> Self {
        let n = source.rank() * target.rank();
        GradedMap {
            source,
            target,
            degree,
            entries: vec![0; n],
        }
    }

    pub fn identity(m: &FreeGradedModule) -> Self {
        let mut g = GradedMap::zero(m.clone(), m.clone(), 0);
        for i in 0..m.rank() {
            g.set(i, i, 1);
        }
        g
    }

    pub fn rows(&self) -> usize {
        self.target.rank()
    }

    pub fn cols(&self) -> usize {
        self.source.rank()
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.source.rank() + c]
    }

    /// Sets an entry without degree validation; callers keep the invariant.
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        let n = self.source.rank();
        self.entries[r * n + c] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: i64) {
        let n = self.source.rank();
        self.entries[r * n + c] += v;
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows()).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn reduced(&self, mode: CoefficientMode) -> GradedMap {
        let mut g = self.clone();
        for v in g.entries.iter_mut() {
            *v = mode.reduce(*v);
        }
        g
    }

    pub fn validate(&self) -> Result<(), AlgebraError> {
        self.check_degrees()
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.rows()];
        for (c, &x) in v.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.get(r, c) * x;
            }
        }
        out
    }

    pub fn scale(&self, k: i64) -> GradedMap {
        let mut g = self.clone();
        for v in g.entries.iter_mut() {
            *v *= k;
        }
        g
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap, AlgebraError> {
        if self.source != other.source || self.target != other.target || self.degree != other.degree {
            return Err(AlgebraError::BasisMismatch("sum of maps with different shapes".into()));
        }
        let mut g = self.clone();
        for (a, b) in g.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
        Ok(g)
    }
}

pub fn compose(g: &GradedMap, f: &GradedMap) -> Result<GradedMap, AlgebraError> {
    if f.target != g.source {
        return Err(AlgebraError::BasisMismatch("target(f) != source(g)".into()));
    }
    let mut h = GradedMap::zero(f.source.clone(), g.target.clone(), g.degree + f.degree);
    for r in 0..g.rows() {
        for k in 0..g.cols() {
            let a = g.get(r, k);
            if a == 0 {
                continue;
            }
            for c in 0..f.cols() {
                h.add_to(r, c, a * f.get(k, c));
            }
        }
    }
    Ok(h)
}

/// (f⊗g)(x⊗y) = (-1)^{|g||x|} f(x)⊗g(y).
pub fn tensor(f: &GradedMap, g: &GradedMap, mode: CoefficientMode) -> GradedMap {
    let source = f.source.tensor(&g.source);
    let target = f.target.tensor(&g.target);
    let mut h = GradedMap::zero(source, target, f.degree + g.degree);
    let (gs, gt) = (g.cols(), g.rows());
    for xi in 0..f.cols() {
        let s = mode.sign(g.degree as i64 * f.source.degree(xi) as i64);
        for yi in 0..gs {
            for fr in 0..f.rows() {
                let a = f.get(fr, xi);
                if a == 0 {
                    continue;
                }
                for gr in 0..gt {
                    let b = g.get(gr, yi);
                    if b != 0 {
                        h.add_to(fr * gt + gr, xi * gs + yi, mode.reduce(s * a * b));
                    }
                }
            }
        }
    }
    h.reduced(mode)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainComplex {
    pub module: FreeGradedModule,
    pub differential: GradedMap,
}

impl ChainComplex {
    pub fn new(module: FreeGradedModule, differential: GradedMap) -> Result<Self, AlgebraError> {
        if differential.source != module || differential.target != module {
            return Err(AlgebraError::BasisMismatch("differential must be an endomorphism".into()));
        }
        if differential.degree != 1 {
            return Err(AlgebraError::Structure("differential must have degree 1".into()));
        }
        differential.validate()?;
        Ok(ChainComplex { module, differential })
    }
}

pub fn check_differential(c: &ChainComplex) -> bool {
    compose(&c.differential, &c.differential)
        .map(|dd| dd.is_zero())
        .unwrap_or(false)
}

#[derive(Clone, Debug)]
pub struct DirectSum {
    pub module: FreeGradedModule,
    pub injections: Vec<GradedMap>,
    pub projections: Vec<GradedMap>,
}

pub fn direct_sum(parts: &[FreeGradedModule]) -> DirectSum {
    let mut basis = Vec::new();
    for (k, m) in parts.iter().enumerate() {
        for i in 0..m.rank() {
            basis.push((format!("{}:{}", k, m.id(i)), m.degree(i)));
        }
    }
    let module = FreeGradedModule::new(basis).expect("summand prefixes keep ids distinct");
    let mut injections = Vec::new();
    let mut projections = Vec::new();
    let mut offset = 0;
    for m in parts {
        let mut inj = GradedMap::zero(m.clone(), module.clone(), 0);
        let mut proj = GradedMap::zero(module.clone(), m.clone(), 0);
        for i in 0..m.rank() {
            inj.set(offset + i, i, 1);
            proj.set(i, offset + i, 1);
        }
        offset += m.rank();
        injections.push(inj);
        projections.push(proj);
    }
    DirectSum {
        module,
        injections,
        projections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> FreeGradedModule {
        FreeGradedModule::new(vec![("x", 0), ("y", 1)]).unwrap()
    }

    #[test]
    fn koszul_sign_on_odd_input() {
        let m = m2();
        let d = GradedMap::new(m.clone(), m.clone(), 1, vec![vec![0, 0], vec![1, 0]]).unwrap();
        let id = GradedMap::identity(&m);
        let t = tensor(&id, &d, CoefficientMode::Integers);
        // (id⊗d)(y⊗x) = -y⊗y
        assert_eq!(t.get(3, 2), -1);
        let t2 = tensor(&id, &d, CoefficientMode::ModTwo);
        assert_eq!(t2.get(3, 2), 1);
    }

    #[test]
    fn degree_violation_rejected() {
        let m = FreeGradedModule::new(vec![("x", 0), ("y", 0)]).unwrap();
        let r = GradedMap::new(m.clone(), m, 1, vec![vec![0, 1], vec![1, 0]]);
        assert!(matches!(r, Err(AlgebraError::DegreeMismatch { .. })));
    }
}
