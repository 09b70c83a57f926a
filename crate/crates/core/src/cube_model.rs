//! Subset combinatorics of cobordism simplices and the collared cube data
//! structure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CubeError {
    #[error("empty subset")]
    Empty,
    #[error("index {index} outside [0, {n}]")]
    OutOfRange { index: usize, n: usize },
    #[error("missing face data for {0:?}")]
    MissingFace(Vec<usize>),
    #[error("face {0:?} has an empty label")]
    EmptyLabel(Vec<usize>),
    #[error("face index {i} must satisfy 0 < i < {n}")]
    FaceIndex { i: usize, n: usize },
    #[error("back collaring at {i}: lower part ends at {lower:?}, upper part starts at {upper:?}")]
    BackCollar { i: usize, lower: String, upper: String },
    #[error("parameter {0} must be positive")]
    NonPositive(&'static str),
    #[error("expected {expected} axis widths, found {found}")]
    Widths { expected: usize, found: usize },
    #[error("hom poset needs i <= j <= n, got i={i}, j={j}, n={n}")]
    PosetRange { i: usize, j: usize, n: usize },
    #[error("map {0:?} is not monotone")]
    NotMonotone(Vec<usize>),
}

/// A subset of [N] = {0, ..., N}, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexSubset {
    pub n: usize,
    members: Vec<usize>,
}

impl IndexSubset {
    pub fn new(n: usize, members: &[usize]) -> Result<Self, CubeError> {
        let mut m = members.to_vec();
        m.sort_unstable();
        m.dedup();
        if let Some(&bad) = m.iter().find(|&&k| k > n) {
            return Err(CubeError::OutOfRange { index: bad, n });
        }
        Ok(IndexSubset { n, members: m })
    }

    pub fn full(n: usize) -> Self {
        IndexSubset { n, members: (0..=n).collect() }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }

    pub fn min(&self) -> Option<usize> {
        self.members.first().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.members.last().copied()
    }

    /// Complement inside [N].
    pub fn complement(&self) -> IndexSubset {
        IndexSubset {
            n: self.n,
            members: (0..=self.n).filter(|k| !self.contains(*k)).collect(),
        }
    }
}

pub fn closure_bar(k: &IndexSubset) -> Result<IndexSubset, CubeError> {
    let (lo, hi) = match (k.min(), k.max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(CubeError::Empty),
    };
    Ok(IndexSubset { n: k.n, members: (lo..=hi).collect() })
}

pub fn is_consecutive(k: &IndexSubset) -> bool {
    match (k.min(), k.max()) {
        (Some(a), Some(b)) => b - a + 1 == k.len(),
        _ => true,
    }
}

pub fn k_prime(k: &IndexSubset) -> Result<IndexSubset, CubeError> {
    let m = k.max().ok_or(CubeError::Empty)?;
    Ok(IndexSubset { n: k.n, members: (m..=k.n).collect() })
}

/// All nonempty subsets of [n], by size then lexicographically.
pub fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1u32 << (n + 1)))
        .map(|mask| (0..=n).filter(|k| mask & (1 << k) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// 𝒫₀(n): subsets of [n] containing 0.
pub fn subsets_with_zero(n: usize) -> Vec<Vec<usize>> {
    nonempty_subsets(n).into_iter().filter(|s| s[0] == 0).collect()
}

/// 𝒫_n: subsets of [n] containing 0 and n.
pub fn subsets_with_ends(n: usize) -> Vec<Vec<usize>> {
    subsets_with_zero(n).into_iter().filter(|s| *s.last().unwrap() == n).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NonCharacteristic {
    AvoidsAll,
    SkeletonNC {
        #[serde(with = "rational")]
        e: Q,
    },
}

/// An N-simplex of cobordisms seen through its face labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollaredCube {
    pub n: usize,
    /// Keyed by the subset J, written as a sorted vertex list.
    #[serde(with = "face_pairs")]
    pub face_data: BTreeMap<Vec<usize>, String>,
    #[serde(with = "rational::vec")]
    pub widths: Vec<Q>,
    #[serde(with = "rational")]
    pub depth: Q,
    #[serde(with = "rational")]
    pub width: Q,
    pub non_characteristic: NonCharacteristic,
    /// (front, back) collar flags per axis.
    pub collars: Vec<(bool, bool)>,
}

fn label_for(j: &[usize]) -> String {
    if j.len() == 1 {
        format!("L{}", j[0])
    } else {
        let parts: Vec<String> = j.iter().map(|k| k.to_string()).collect();
        format!("Y{{{}}}", parts.join(","))
    }
}

impl CollaredCube {
    /// A generic simplex: objects L0..LN and a distinct label per face.
    pub fn simplex(n: usize) -> Self {
        let face_data = nonempty_subsets(n).into_iter().map(|j| {
            let l = label_for(&j);
            (j, l)
        });
        Self::with_labels(n, face_data.collect())
    }

    pub fn with_labels(n: usize, face_data: BTreeMap<Vec<usize>, String>) -> Self {
        CollaredCube {
            n,
            face_data,
            widths: vec![rational::one(); n],
            depth: rational::one(),
            width: rational::one(),
            non_characteristic: NonCharacteristic::AvoidsAll,
            collars: vec![(true, true); n],
        }
    }

    /// The cube collared by a single object everywhere: the identity cobordism
    /// and its degeneracies.
    pub fn identity(n: usize, object: &str) -> Self {
        let face_data = nonempty_subsets(n)
            .into_iter()
            .map(|j| {
                let l = if j.len() == 1 { object.to_string() } else { format!("id({})", object) };
                (j, l)
            })
            .collect();
        Self::with_labels(n, face_data)
    }

    /// Pull back along a monotone map alpha: [m] -> [n]. Faces on which
    /// alpha is not injective become degenerate labels.
    pub fn pullback(&self, alpha: &[usize]) -> Result<CollaredCube, CubeError> {
        if alpha.windows(2).any(|w| w[0] > w[1]) {
            return Err(CubeError::NotMonotone(alpha.to_vec()));
        }
        if let Some(&bad) = alpha.iter().find(|&&a| a > self.n) {
            return Err(CubeError::OutOfRange { index: bad, n: self.n });
        }
        let m = alpha.len() - 1;
        let mut face_data = BTreeMap::new();
        for j in nonempty_subsets(m) {
            let mut image: Vec<usize> = j.iter().map(|&k| alpha[k]).collect();
            let injective = image.windows(2).all(|w| w[0] < w[1]);
            image.dedup();
            let base = self.label(&image)?.to_string();
            let l = if injective { base } else { format!("s({})", base) };
            face_data.insert(j, l);
        }
        let mut out = Self::with_labels(m, face_data);
        out.depth = self.depth;
        out.width = self.width;
        out.non_characteristic = self.non_characteristic.clone();
        Ok(out)
    }

    pub fn label(&self, j: &[usize]) -> Result<&str, CubeError> {
        self.face_data.get(j).map(|s| s.as_str()).ok_or_else(|| CubeError::MissingFace(j.to_vec()))
    }

    pub fn object(&self, k: usize) -> Result<&str, CubeError> {
        self.label(&[k])
    }

    pub fn validate(&self) -> Result<(), CubeError> {
        for j in nonempty_subsets(self.n) {
            let l = self.label(&j)?;
            if l.is_empty() {
                return Err(CubeError::EmptyLabel(j));
            }
        }
        if self.widths.len() != self.n {
            return Err(CubeError::Widths { expected: self.n, found: self.widths.len() });
        }
        if self.widths.iter().any(|w| *w <= Q::from_integer(0)) {
            return Err(CubeError::NonPositive("width per axis"));
        }
        if self.depth <= Q::from_integer(0) {
            return Err(CubeError::NonPositive("depth"));
        }
        if self.width <= Q::from_integer(0) {
            return Err(CubeError::NonPositive("width"));
        }
        if let NonCharacteristic::SkeletonNC { e } = &self.non_characteristic {
            if *e <= Q::from_integer(0) {
                return Err(CubeError::NonPositive("non-characteristic bound"));
            }
        }
        for i in 1..self.n {
            let b = self.back_face(i)?;
            let lower = b.lower.object(b.lower.n)?.to_string();
            let upper = b.upper.object(0)?.to_string();
            if lower != upper {
                return Err(CubeError::BackCollar { i, lower, upper });
            }
        }
        Ok(())
    }

    /// Y_J, reindexed along [|J|-1] ≅ J.
    pub fn face_subcube(&self, j: &[usize]) -> Result<CollaredCube, CubeError> {
        let sub = IndexSubset::new(self.n, j)?;
        if sub.is_empty() {
            return Err(CubeError::Empty);
        }
        let j = sub.members();
        let m = j.len() - 1;
        let mut face_data = BTreeMap::new();
        for s in nonempty_subsets(m) {
            let image: Vec<usize> = s.iter().map(|&k| j[k]).collect();
            face_data.insert(s, self.label(&image)?.to_string());
        }
        // axis t of the face is the direction of vertex j[t]
        let widths = (1..=m).map(|t| self.axis_width(j[t])).collect();
        let collars = (1..=m).map(|t| self.collars.get(j[t] - 1).copied().unwrap_or((true, true))).collect();
        Ok(CollaredCube {
            n: m,
            face_data,
            widths,
            depth: self.depth,
            width: self.width,
            non_characteristic: self.non_characteristic.clone(),
            collars,
        })
    }

    fn axis_width(&self, axis: usize) -> Q {
        self.widths.get(axis.wrapping_sub(1)).copied().unwrap_or_else(rational::one)
    }

    /// The face at q_i = 0, i.e. d_i Y.
    pub fn front_face(&self, i: usize) -> Result<CollaredCube, CubeError> {
        if i == 0 || i >= self.n {
            return Err(CubeError::FaceIndex { i, n: self.n });
        }
        let j: Vec<usize> = (0..=self.n).filter(|&k| k != i).collect();
        self.face_subcube(&j)
    }

    /// The face at q_i = w_i: Y_{0..i} below height i, Y_{i..N} above.
    pub fn back_face(&self, i: usize) -> Result<BackFace, CubeError> {
        if i == 0 || i >= self.n {
            return Err(CubeError::FaceIndex { i, n: self.n });
        }
        let lower = self.face_subcube(&(0..=i).collect::<Vec<_>>())?;
        let upper = self.face_subcube(&(i..=self.n).collect::<Vec<_>>())?;
        let a = lower.object(lower.n)?;
        let b = upper.object(0)?;
        if a != b {
            return Err(CubeError::BackCollar { i, lower: a.to_string(), upper: b.to_string() });
        }
        Ok(BackFace { i, lower, upper })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackFace {
    pub i: usize,
    pub lower: CollaredCube,
    pub upper: CollaredCube,
}

impl BackFace {
    pub fn glue_label(&self) -> &str {
        &self.upper.face_data[&vec![0]]
    }
}

/// Vertices of I^N indexed by 𝒫₀(N), labelled by max.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxLabeledCube {
    pub n: usize,
    pub labels: BTreeMap<Vec<usize>, usize>,
}

pub fn max_labeled_cube(n: usize) -> MaxLabeledCube {
    let labels = subsets_with_zero(n).into_iter().map(|p| {
        let m = *p.last().unwrap();
        (p, m)
    });
    MaxLabeledCube { n, labels: labels.collect() }
}

impl MaxLabeledCube {
    /// Restrict to the vertices P with i ∉ P and reindex [N]∖{i} ≅ [N-1].
    pub fn front_face(&self, i: usize) -> Result<MaxLabeledCube, CubeError> {
        if i == 0 || i > self.n {
            return Err(CubeError::FaceIndex { i, n: self.n });
        }
        let squash = |k: usize| if k > i { k - 1 } else { k };
        let labels = self
            .labels
            .iter()
            .filter(|(p, _)| !p.contains(&i))
            .map(|(p, &l)| (p.iter().map(|&k| squash(k)).collect(), squash(l)))
            .collect();
        Ok(MaxLabeledCube { n: self.n - 1, labels })
    }
}

/// C(n) = I^{n-1} × [0, n]; the edge over P ∈ 𝒫_n carries the heights in P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedPrism {
    pub n: usize,
    pub marks: BTreeMap<Vec<usize>, Vec<usize>>,
}

pub fn marked_prism(n: usize) -> MarkedPrism {
    let marks = subsets_with_ends(n).into_iter().map(|p| (p.clone(), p));
    MarkedPrism { n, marks: marks.collect() }
}

impl MarkedPrism {
    pub fn cube_dimension(&self) -> usize {
        self.n.saturating_sub(1)
    }

    pub fn height(&self) -> usize {
        self.n
    }

    pub fn marked_point_count(&self) -> usize {
        self.marks.values().map(|m| m.len()).sum()
    }
}

/// Nerve of the inclusion poset P_{i,j}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetNerve {
    pub elements: Vec<Vec<usize>>,
    /// Nondegenerate simplices as strictly increasing chains of element indices.
    pub simplices: Vec<Vec<usize>>,
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

pub fn hom_poset_nerve(i: usize, j: usize, n: usize) -> Result<PosetNerve, CubeError> {
    if i > j || j > n {
        return Err(CubeError::PosetRange { i, j, n });
    }
    let elements: Vec<Vec<usize>> = nonempty_subsets(n)
        .into_iter()
        .filter(|s| s[0] == i && *s.last().unwrap() == j)
        .collect();
    let mut simplices: Vec<Vec<usize>> = (0..elements.len()).map(|k| vec![k]).collect();
    let mut frontier = simplices.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for chain in &frontier {
            let top = &elements[*chain.last().unwrap()];
            for (k, e) in elements.iter().enumerate() {
                if e.len() > top.len() && is_subset(top, e) {
                    let mut c = chain.clone();
                    c.push(k);
                    next.push(c);
                }
            }
        }
        simplices.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(PosetNerve { elements, simplices })
}

impl PosetNerve {
    pub fn count_by_dimension(&self) -> Vec<usize> {
        let top = self.simplices.iter().map(|s| s.len()).max().unwrap_or(0);
        (1..=top).map(|l| self.simplices.iter().filter(|s| s.len() == l).count()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize, m: &[usize]) -> IndexSubset {
        IndexSubset::new(n, m).unwrap()
    }

    #[test]
    fn bar_and_prime() {
        assert_eq!(closure_bar(&s(4, &[0, 3])).unwrap().members(), &[0, 1, 2, 3]);
        assert_eq!(closure_bar(&s(5, &[2])).unwrap().members(), &[2]);
        assert!(closure_bar(&s(3, &[])).is_err());
        assert!(!is_consecutive(&s(3, &[0, 2])));
        assert_eq!(k_prime(&s(3, &[0, 2])).unwrap().members(), &[2, 3]);
        assert_eq!(k_prime(&s(2, &[0])).unwrap().members(), &[0, 1, 2]);
        assert_eq!(k_prime(&IndexSubset::full(4)).unwrap().members(), &[4]);
    }

    #[test]
    fn back_face_of_triangle() {
        let y = CollaredCube::simplex(2);
        let b = y.back_face(1).unwrap();
        assert_eq!(b.lower.label(&[0, 1]).unwrap(), "Y{0,1}");
        assert_eq!(b.upper.label(&[0, 1]).unwrap(), "Y{1,2}");
        assert_eq!(b.glue_label(), "L1");
        assert!(y.back_face(2).is_err());
    }
}

mod face_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Vec<usize>, String>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(&Vec<usize>, &String)> = m.iter().collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<usize>, String>, D::Error> {
        let v: Vec<(Vec<usize>, String)> = Vec::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

/// Every generic simplex and identity cube with 1 <= N <= `n_max`, plus the
/// pullbacks of lower simplices along surjections (degenerate cubes).
pub fn sample_cubes(n_max: usize) -> Vec<CollaredCube> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        out.push(CollaredCube::simplex(n));
        out.push(CollaredCube::identity(n, "X"));
        for m in 1..n {
            let base = CollaredCube::simplex(m);
            for cut in 0..n {
                let alpha: Vec<usize> = (0..=n).map(|k| if k <= cut { k.min(m) } else { (k - 1).min(m) }).collect();
                if alpha.iter().max() == Some(&m) {
                    out.push(base.pullback(&alpha).expect("surjection"));
                }
            }
        }
    }
    out
}
