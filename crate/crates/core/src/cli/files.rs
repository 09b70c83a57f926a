//! JSON file formats: base categories, cubes with cobordism data, planar
//! configurations and built Xi simplices.  Every file carries `schema: 1`.

use crate::a_infinity::{AInfCategory, NerveSimplexCandidate};
use crate::cube_model::CollaredCube;
use crate::graded_zmod::{CoefficientMode, FreeGradedModule, GradedMap};
use crate::planar_floer::{CurveKind, PLCurve, Pt, StaircaseConfig, StaircaseParams};
use crate::xi_functor::{CobElement, CobordismSimplex};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

pub const SCHEMA: u32 = 1;

/// A bad input file; `location` names the file and the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub location: String,
    pub message: String,
}

impl InputError {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        InputError { location: location.into(), message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for InputError {}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| InputError::new(&name, e.to_string()))?;
    parse_json(&name, &text)
}

pub fn parse_json<T: DeserializeOwned>(name: &str, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::new(format!("{}:{}:{}", name, e.line(), e.column()), e.to_string()))
}

fn check_schema(name: &str, schema: u32) -> Result<(), InputError> {
    if schema != SCHEMA {
        return Err(InputError::new(format!("{}: schema", name), format!("unsupported schema {}, expected {}", schema, SCHEMA)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    Z,
    Z2,
}

impl From<CoefficientMode> for ModeTag {
    fn from(m: CoefficientMode) -> Self {
        match m {
            CoefficientMode::Integers => ModeTag::Z,
            CoefficientMode::ModTwo => ModeTag::Z2,
        }
    }
}

impl From<ModeTag> for CoefficientMode {
    fn from(m: ModeTag) -> Self {
        match m {
            ModeTag::Z => CoefficientMode::Integers,
            ModeTag::Z2 => CoefficientMode::ModTwo,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomEntry {
    pub source: String,
    pub target: String,
    /// Generator names and degrees.
    pub basis: Vec<(String, i32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuEntry {
    /// `[X_0, ..., X_d]`.
    pub objects: Vec<String>,
    /// Generator of hom(X_0, X_d).
    pub output: String,
    /// Inputs in written order `a_d, ..., a_1`, with `a_i` in hom(X_{i-1}, X_i).
    pub inputs: Vec<String>,
    pub value: i64,
}

/// A finite directed A-infinity category given by its nonzero structure constants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseFile {
    pub schema: u32,
    pub mode: ModeTag,
    pub max_arity: usize,
    pub objects: Vec<String>,
    pub homs: Vec<HomEntry>,
    pub mu: Vec<MuEntry>,
}

impl BaseFile {
    pub fn from_category(cat: &AInfCategory) -> BaseFile {
        let n = cat.objects.len();
        let mut homs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let h = cat.hom(a, b);
                if h.rank() > 0 {
                    let basis = (0..h.rank()).map(|i| (h.id(i).to_string(), h.degree(i))).collect();
                    homs.push(HomEntry { source: cat.objects[a].clone(), target: cat.objects[b].clone(), basis });
                }
            }
        }
        let mut keys: Vec<&Vec<usize>> = cat.mu_keys().collect();
        keys.sort();
        let mut mu = Vec::new();
        for key in keys {
            let m = cat.mu(key).expect("listed key");
            let d = key.len() - 1;
            // written order: a_d in hom(X_{d-1}, X_d) first
            let parts: Vec<&FreeGradedModule> = (0..d).map(|k| cat.hom(key[d - k - 1], key[d - k])).collect();
            for col in 0..m.cols() {
                let mut idx = vec![0; d];
                let mut c = col;
                for k in (0..d).rev() {
                    idx[k] = c % parts[k].rank();
                    c /= parts[k].rank();
                }
                for row in 0..m.rows() {
                    let value = m.get(row, col);
                    if value != 0 {
                        mu.push(MuEntry {
                            objects: key.iter().map(|&o| cat.objects[o].clone()).collect(),
                            output: m.target.id(row).to_string(),
                            inputs: (0..d).map(|k| parts[k].id(idx[k]).to_string()).collect(),
                            value,
                        });
                    }
                }
            }
        }
        BaseFile { schema: SCHEMA, mode: cat.mode.into(), max_arity: cat.max_arity, objects: cat.objects.clone(), homs, mu }
    }

    pub fn to_category(&self, name: &str) -> Result<AInfCategory, InputError> {
        check_schema(name, self.schema)?;
        let at = |field: String| format!("{}: {}", name, field);
        let mut seen = BTreeMap::new();
        for (i, o) in self.objects.iter().enumerate() {
            if seen.insert(o.as_str(), i).is_some() {
                return Err(InputError::new(at(format!("objects[{}]", i)), format!("duplicate object {:?}", o)));
            }
        }
        let object = |field: String, id: &str| seen.get(id).copied().ok_or_else(|| InputError::new(at(field), format!("unknown object {:?}", id)));
        if self.max_arity == 0 {
            return Err(InputError::new(at("max_arity".into()), "must be positive"));
        }
        let mode: CoefficientMode = self.mode.into();
        let mut cat = AInfCategory::new(self.objects.clone(), self.max_arity, mode);
        let mut defined = BTreeMap::new();
        for (i, h) in self.homs.iter().enumerate() {
            let a = object(format!("homs[{}].source", i), &h.source)?;
            let b = object(format!("homs[{}].target", i), &h.target)?;
            if defined.insert((a, b), i).is_some() {
                return Err(InputError::new(at(format!("homs[{}]", i)), "hom listed twice"));
            }
            let m = FreeGradedModule::new(h.basis.clone()).map_err(|e| InputError::new(at(format!("homs[{}].basis", i)), e.to_string()))?;
            cat.set_hom(a, b, m);
        }
        for (i, e) in self.mu.iter().enumerate() {
            let field = |f: &str| format!("mu[{}].{}", i, f);
            let key: Vec<usize> = e
                .objects
                .iter()
                .enumerate()
                .map(|(k, o)| object(field(&format!("objects[{}]", k)), o))
                .collect::<Result<_, _>>()?;
            let d = key.len().saturating_sub(1);
            if d == 0 || d > self.max_arity {
                return Err(InputError::new(at(field("objects")), format!("arity {} outside 1..={}", d, self.max_arity)));
            }
            if e.inputs.len() != d {
                return Err(InputError::new(at(field("inputs")), format!("expected {} inputs", d)));
            }
            let target = cat.hom(key[0], key[d]);
            let out = target
                .index_of(&e.output)
                .ok_or_else(|| InputError::new(at(field("output")), format!("{:?} is not a generator of hom({}, {})", e.output, e.objects[0], e.objects[d])))?;
            let mut ins = Vec::with_capacity(d);
            let mut in_degree = 0;
            for (k, id) in e.inputs.iter().enumerate() {
                // the k-th written input a_{d-k} lies in hom(X_{d-k-1}, X_{d-k})
                let h = cat.hom(key[d - k - 1], key[d - k]);
                let i = h.index_of(id).ok_or_else(|| {
                    InputError::new(
                        at(field(&format!("inputs[{}]", k))),
                        format!("{:?} is not a generator of hom({}, {})", id, e.objects[d - k - 1], e.objects[d - k]),
                    )
                })?;
                in_degree += h.degree(i);
                ins.push(i);
            }
            let expected = in_degree + 2 - d as i32;
            if e.value != 0 && target.degree(out) != expected {
                return Err(InputError::new(at(field("output")), format!("degree {} but mu^{} needs {}", target.degree(out), d, expected)));
            }
            cat.add_mu_entry(&key, out, &ins, e.value);
        }
        Ok(cat)
    }
}

/// One cobordism element: the strict unit, or a combination of hom generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementEntry {
    pub face: Vec<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unit: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub terms: BTreeMap<String, i64>,
}

/// A collared cube whose vertex labels name base objects, with one element
/// per face of size >= 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeFile {
    pub schema: u32,
    pub cube: CollaredCube,
    #[serde(default)]
    pub elements: Vec<ElementEntry>,
}

impl CubeFile {
    pub fn cube(&self, name: &str) -> Result<CollaredCube, InputError> {
        check_schema(name, self.schema)?;
        self.cube.validate().map_err(|e| InputError::new(format!("{}: cube", name), e.to_string()))?;
        Ok(self.cube.clone())
    }

    pub fn simplex(&self, name: &str, cat: &AInfCategory) -> Result<CobordismSimplex, InputError> {
        let cube = self.cube(name)?;
        let at = |field: String| format!("{}: {}", name, field);
        let objects = CobordismSimplex::bind_objects(&cube, cat).map_err(|e| InputError::new(at("cube.face_data".into()), e.to_string()))?;
        let n = cube.n;
        let mut f = BTreeMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            let field = |s: &str| at(format!("elements[{}].{}", i, s));
            let valid = e.face.len() >= 2 && e.face.windows(2).all(|w| w[0] < w[1]) && e.face.iter().all(|&k| k <= n);
            if !valid {
                return Err(InputError::new(field("face"), format!("{:?} is not a face of the {}-cube with at least two vertices", e.face, n)));
            }
            let (a, b) = (objects[e.face[0]], objects[*e.face.last().unwrap()]);
            let value = if e.unit {
                if !e.terms.is_empty() {
                    return Err(InputError::new(field("terms"), "a unit element has no terms"));
                }
                CobElement::Unit
            } else {
                let h = cat.hom(a, b);
                let mut v = vec![0; h.rank()];
                for (id, &c) in &e.terms {
                    let i = h.index_of(id).ok_or_else(|| {
                        InputError::new(field(&format!("terms.{}", id)), format!("not a generator of hom({}, {})", cat.objects[a], cat.objects[b]))
                    })?;
                    v[i] = cat.mode.reduce(c);
                }
                CobElement::Chain(if v.iter().all(|&c| c == 0) { Vec::new() } else { v })
            };
            if f.insert(e.face.clone(), value).is_some() {
                return Err(InputError::new(field("face"), format!("face {:?} listed twice", e.face)));
            }
        }
        let s = CobordismSimplex { n, objects, f };
        s.validate(cat).map_err(|e| InputError::new(at("elements".into()), e.to_string()))?;
        Ok(s)
    }

    pub fn from_simplex(cube: CollaredCube, s: &CobordismSimplex, cat: &AInfCategory) -> CubeFile {
        let elements = s
            .f
            .iter()
            .map(|(k, e)| match e {
                CobElement::Unit => ElementEntry { face: k.clone(), unit: true, terms: BTreeMap::new() },
                CobElement::Chain(v) => {
                    let h = cat.hom(s.objects[k[0]], s.objects[*k.last().unwrap()]);
                    let terms = v.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (h.id(i).to_string(), c)).collect();
                    ElementEntry { face: k.clone(), unit: false, terms }
                }
            })
            .collect();
        CubeFile { schema: SCHEMA, cube, elements }
    }
}

/// A PL curve before validation; the grading lift is recomputed on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub vertices: Vec<Pt>,
    #[serde(default)]
    pub head: Option<Pt>,
    #[serde(default)]
    pub tail: Option<Pt>,
    #[serde(default)]
    pub shift: i64,
}

/// A planar configuration: a staircase with its cone tail, or explicit curves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub staircase: Option<StaircaseParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_arity: Option<usize>,
}

pub enum PlanarInput {
    Staircase(Box<StaircaseConfig>),
    Curves(Vec<PLCurve>),
}

impl PlanarInput {
    pub fn curves(&self) -> &[PLCurve] {
        match self {
            PlanarInput::Staircase(c) => &c.curves,
            PlanarInput::Curves(c) => c,
        }
    }
}

impl PlanarFile {
    pub fn load(&self, name: &str) -> Result<PlanarInput, InputError> {
        check_schema(name, self.schema)?;
        match &self.staircase {
            Some(p) => {
                if !self.curves.is_empty() {
                    return Err(InputError::new(format!("{}: curves", name), "give either a staircase or curves"));
                }
                let c = StaircaseConfig::new(p.clone()).map_err(|e| InputError::new(format!("{}: staircase", name), e.to_string()))?;
                Ok(PlanarInput::Staircase(Box::new(c)))
            }
            None => self
                .curves
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    PLCurve::new(c.kind.clone(), c.vertices.clone(), c.head, c.tail, c.shift)
                        .map_err(|e| InputError::new(format!("{}: curves[{}]", name, i), e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(PlanarInput::Curves),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiComponent {
    /// `[X_0, ..., X_{d-1}]`.
    pub objects: Vec<String>,
    pub matrix: GradedMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiFace {
    pub face: Vec<usize>,
    pub degree: i32,
    pub components: Vec<XiComponent>,
}

/// The module-level simplex: Xi of every face of size >= 2, truncated at `arity`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiSimplexFile {
    pub schema: u32,
    pub n: usize,
    pub arity: usize,
    /// Base objects Y_0..Y_N.
    pub vertices: Vec<String>,
    pub faces: Vec<XiFace>,
}

impl XiSimplexFile {
    pub fn new(cat: &AInfCategory, s: &CobordismSimplex, c: &NerveSimplexCandidate, arity: usize) -> XiSimplexFile {
        let faces = c
            .maps
            .iter()
            .map(|(k, m)| XiFace {
                face: k.clone(),
                degree: m.degree,
                components: m
                    .components
                    .iter()
                    .filter(|(_, g)| !g.is_zero())
                    .map(|(key, g)| XiComponent { objects: key.iter().map(|&o| cat.objects[o].clone()).collect(), matrix: g.clone() })
                    .collect(),
            })
            .collect();
        XiSimplexFile { schema: SCHEMA, n: s.n, arity, vertices: s.objects.iter().map(|&o| cat.objects[o].clone()).collect(), faces }
    }
}
