//! Staircase and cone-tail configurations in the (q, p) plane, with exact
//! rational coordinates, gradings, planar regions and polygon counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::a_infinity::AInfCategory;
use crate::graded_zmod::{CoefficientMode, FreeGradedModule};
use crate::rational::{self, q, qi, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanarError {
    #[error("staircase constraint violated: {constraint}{}", .index.map(|i| format!(" at i={}", i)).unwrap_or_default())]
    Staircase { constraint: String, index: Option<usize> },
    #[error("cone tail needs 0 < eps < w")]
    ConeTail,
    #[error("degenerate curve: {0}")]
    Degenerate(String),
    #[error("curve {curve} is not embedded: segments {a} and {b} meet")]
    NotEmbedded { curve: usize, a: usize, b: usize },
    #[error("curves {a} and {b} are tangent along segments {sa} and {sb}")]
    Tangency { a: usize, b: usize, sa: usize, sb: usize },
    #[error("curves {a} and {b} cross at a vertex")]
    VertexCrossing { a: usize, b: usize },
    #[error("point ({0}) is not on curve {1}")]
    OffCurve(String, usize),
    #[error("corner data: {0}")]
    Corners(String),
    #[error("grading mismatch on polygon {0}")]
    Grading(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pt {
    #[serde(with = "rational")]
    pub q: Q,
    #[serde(with = "rational")]
    pub p: Q,
}

pub fn pt(q: Q, p: Q) -> Pt {
    Pt { q, p }
}

impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.q, self.p)
    }
}

fn sub(a: Pt, b: Pt) -> Pt {
    pt(a.q - b.q, a.p - b.p)
}

fn add(a: Pt, b: Pt) -> Pt {
    pt(a.q + b.q, a.p + b.p)
}

fn scale(a: Pt, t: Q) -> Pt {
    pt(a.q * t, a.p * t)
}

fn cross(a: Pt, b: Pt) -> Q {
    a.q * b.p - a.p * b.q
}

fn dot(a: Pt, b: Pt) -> Q {
    a.q * b.q + a.p * b.p
}

fn is_zero_vec(a: Pt) -> bool {
    a.q.is_zero() && a.p.is_zero()
}

/// Direction representative with angle in [0, pi).
fn canonical_dir(d: Pt) -> Pt {
    if d.p < Q::zero() || (d.p.is_zero() && d.q < Q::zero()) {
        pt(-d.q, -d.p)
    } else {
        d
    }
}

/// Strict angle comparison of canonical directions.
fn angle_gt(a: Pt, b: Pt) -> bool {
    cross(b, a) > Q::zero()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Staircase(usize),
    ConeTail,
    VerticalLine(#[serde(with = "rational")] Q),
    TestCurve,
}

/// Lifted phase of a segment: `half_turns + angle(dir)/pi` with `dir` canonical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub half_turns: i64,
    pub dir: Pt,
}

impl Phase {
    /// `ceil(self - other)`; the two phases must be transverse.
    fn ceil_minus(&self, other: &Phase) -> i64 {
        let n = self.half_turns - other.half_turns;
        if angle_gt(self.dir, other.dir) {
            n + 1
        } else {
            n
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLCurve {
    pub kind: CurveKind,
    pub vertices: Vec<Pt>,
    /// Travel direction of the incoming ray, if the curve starts at infinity.
    pub head: Option<Pt>,
    /// Travel direction of the outgoing ray, if the curve ends at infinity.
    pub tail: Option<Pt>,
    pub grading_lift: Vec<Phase>,
}

/// A segment or ray `o + t dir`, `t` in `[0, tmax]` or `[0, inf)`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    o: Pt,
    dir: Pt,
    tmax: Option<Q>,
}

impl Piece {
    fn at(&self, t: Q) -> Pt {
        add(self.o, scale(self.dir, t))
    }

    fn contains_t(&self, t: Q) -> bool {
        t >= Q::zero() && self.tmax.is_none_or(|m| t <= m)
    }

    /// Parameter of `x` if it lies on the piece.
    fn locate(&self, x: Pt) -> Option<Q> {
        let v = sub(x, self.o);
        if !cross(self.dir, v).is_zero() {
            return None;
        }
        let t = dot(v, self.dir) / dot(self.dir, self.dir);
        self.contains_t(t).then_some(t)
    }
}

enum Meet {
    None,
    Point(Q, Q),
    Overlap,
}

fn meet(a: &Piece, b: &Piece) -> Meet {
    let den = cross(a.dir, b.dir);
    let w = sub(b.o, a.o);
    if den.is_zero() {
        if !cross(w, a.dir).is_zero() {
            return Meet::None;
        }
        // collinear: b's range in a's parameter
        let n2 = dot(a.dir, a.dir);
        let s0 = dot(w, a.dir) / n2;
        let k = dot(b.dir, a.dir) / n2;
        let (lo, hi): (Option<Q>, Option<Q>) = match b.tmax {
            Some(m) => {
                let s1 = s0 + m * k;
                (Some(s0.min(s1)), Some(s0.max(s1)))
            }
            None if k > Q::zero() => (Some(s0), None),
            None => (None, Some(s0)),
        };
        let a_hi = a.tmax;
        let below = match (hi, Some(Q::zero())) {
            (Some(h), Some(z)) => h < z,
            _ => false,
        };
        let above = match (lo, a_hi) {
            (Some(l), Some(m)) => l > m,
            _ => false,
        };
        return if below || above { Meet::None } else { Meet::Overlap };
    }
    let t = cross(w, b.dir) / den;
    let u = cross(w, a.dir) / den;
    if a.contains_t(t) && b.contains_t(u) {
        Meet::Point(t, u)
    } else {
        Meet::None
    }
}

impl PLCurve {
    /// Builds a curve and its phase lift; `shift` is the half-turn count of the first segment.
    pub fn new(kind: CurveKind, vertices: Vec<Pt>, head: Option<Pt>, tail: Option<Pt>, shift: i64) -> Result<Self, PlanarError> {
        if vertices.is_empty() {
            return Err(PlanarError::Degenerate("no vertices".into()));
        }
        let mut dirs = Vec::new();
        if let Some(h) = head {
            dirs.push(h);
        }
        for w in vertices.windows(2) {
            dirs.push(sub(w[1], w[0]));
        }
        if let Some(t) = tail {
            dirs.push(t);
        }
        if dirs.is_empty() {
            return Err(PlanarError::Degenerate("a single point".into()));
        }
        if dirs.iter().any(|&d| is_zero_vec(d)) {
            return Err(PlanarError::Degenerate("zero-length segment".into()));
        }
        let mut lift = vec![Phase { half_turns: shift, dir: canonical_dir(dirs[0]) }];
        for w in dirs.windows(2) {
            let turn = cross(w[0], w[1]);
            if turn.is_zero() && dot(w[0], w[1]) < Q::zero() {
                return Err(PlanarError::Degenerate("segment doubles back".into()));
            }
            let prev = *lift.last().unwrap();
            let next = canonical_dir(w[1]);
            let k = if turn > Q::zero() && angle_gt(prev.dir, next) {
                1
            } else if turn < Q::zero() && angle_gt(next, prev.dir) {
                -1
            } else {
                0
            };
            lift.push(Phase { half_turns: prev.half_turns + k, dir: next });
        }
        let c = PLCurve { kind, vertices, head, tail, grading_lift: lift };
        c.check_embedded(0)?;
        Ok(c)
    }

    fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::new();
        if let Some(h) = self.head {
            out.push(Piece { o: self.vertices[0], dir: pt(-h.q, -h.p), tmax: None });
        }
        for w in self.vertices.windows(2) {
            out.push(Piece { o: w[0], dir: sub(w[1], w[0]), tmax: Some(Q::from_integer(1)) });
        }
        if let Some(t) = self.tail {
            out.push(Piece { o: *self.vertices.last().unwrap(), dir: t, tmax: None });
        }
        out
    }

    fn has_head(&self) -> bool {
        self.head.is_some()
    }

    fn check_embedded(&self, id: usize) -> Result<(), PlanarError> {
        let ps = self.pieces();
        for a in 0..ps.len() {
            for b in (a + 2)..ps.len() {
                if !matches!(meet(&ps[a], &ps[b]), Meet::None) {
                    return Err(PlanarError::NotEmbedded { curve: id, a, b });
                }
            }
        }
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        self.grading_lift.len()
    }

    /// Position `(segment, s)` of a point, `s` increasing along the curve.
    fn position(&self, x: Pt) -> Option<(usize, Q)> {
        for (j, pc) in self.pieces().iter().enumerate() {
            if let Some(t) = pc.locate(x) {
                let s = if j == 0 && self.has_head() { -t } else { t };
                // a vertex belongs to the later segment
                if let Some(m) = pc.tmax {
                    if t == m && j + 1 < self.segment_count() {
                        continue;
                    }
                }
                if j == 0 && self.has_head() && t.is_zero() && self.segment_count() > 1 {
                    continue;
                }
                return Some((j, s));
            }
        }
        None
    }

    /// Start vertex of segment `j`, if finite.
    fn seg_start(&self, j: usize) -> Option<Pt> {
        let off = self.has_head() as usize;
        if j < off {
            None
        } else {
            self.vertices.get(j - off).copied()
        }
    }

    /// The path along the curve from `a` to `b` (both on the curve).
    pub fn arc(&self, a: Pt, b: Pt, id: usize) -> Result<Vec<Pt>, PlanarError> {
        let pa = self.position(a).ok_or_else(|| PlanarError::OffCurve(a.to_string(), id))?;
        let pb = self.position(b).ok_or_else(|| PlanarError::OffCurve(b.to_string(), id))?;
        if pa == pb {
            return Ok(vec![a]);
        }
        let forward = pa < pb;
        let (lo, hi, x, y) = if forward { (pa, pb, a, b) } else { (pb, pa, b, a) };
        let mut pts = vec![x];
        for j in (lo.0 + 1)..=hi.0 {
            if let Some(v) = self.seg_start(j) {
                if v != x && v != y {
                    pts.push(v);
                }
            }
        }
        pts.push(y);
        if !forward {
            pts.reverse();
        }
        Ok(pts)
    }

    pub fn mirrored(&self) -> PLCurve {
        let m = |v: Pt| pt(-v.q, v.p);
        let mut verts: Vec<Pt> = self.vertices.iter().map(|&v| m(v)).collect();
        verts.reverse();
        let head = self.tail.map(|t| pt(t.q, -t.p));
        let tail = self.head.map(|h| pt(h.q, -h.p));
        PLCurve::new(self.kind.clone(), verts, head, tail, self.grading_lift[0].half_turns).expect("mirror of a valid curve")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircaseParams {
    pub d: usize,
    #[serde(with = "rational")]
    pub w: Q,
    #[serde(with = "rational::vec")]
    pub widths: Vec<Q>,
    /// Lower bound D-bar on the depths (the cobordism depth).
    #[serde(with = "rational")]
    pub depth_min: Q,
    /// Upper bound D-underline on the depths.
    #[serde(with = "rational")]
    pub depth_max: Q,
    #[serde(with = "rational::vec")]
    pub depths: Vec<Q>,
    #[serde(with = "rational::vec")]
    pub heights: Vec<Q>,
    /// sup of the heights; validated, otherwise unused.
    #[serde(with = "rational")]
    pub h: Q,
    #[serde(with = "rational::vec")]
    pub eps: Vec<Q>,
    /// Box parameter of the cone tail.
    #[serde(with = "rational")]
    pub tail_eps: Q,
}

fn violation(c: &str, i: Option<usize>) -> PlanarError {
    PlanarError::Staircase { constraint: c.to_string(), index: i }
}

impl StaircaseParams {
    /// A fixed admissible choice with w = 1.
    pub fn standard(d: usize) -> Self {
        let n = 2 * d.max(1) as i128;
        let widths: Vec<Q> = (0..d).map(|i| qi(2) - q(i as i128, n)).collect();
        let eps: Vec<Q> = (0..d).map(|_| q(1, 2 * n)).collect();
        StaircaseParams {
            d,
            w: qi(1),
            widths,
            depth_min: qi(1),
            depth_max: qi(d as i128 + 2),
            depths: (0..d).map(|i| qi(i as i128 + 2)).collect(),
            heights: (0..d).map(|i| qi(i as i128 + 1)).collect(),
            h: qi(d as i128),
            eps,
            tail_eps: q(1, 2),
        }
    }

    /// Random admissible parameters on a grid of small rationals.
    pub fn random<R: Rng>(rng: &mut R, d: usize) -> Self {
        let w = qi(rng.gen_range(1..=3));
        let mut widths = vec![Q::zero(); d];
        let mut acc = w + q(rng.gen_range(1..=4), 4);
        for i in (0..d).rev() {
            widths[i] = acc;
            acc += q(rng.gen_range(1..=4), 4);
        }
        let eps: Vec<Q> = (0..d)
            .map(|i| {
                let next = if i + 1 < d { widths[i + 1] } else { w };
                (widths[i] - next) * q(rng.gen_range(1..=3), 4)
            })
            .collect();
        let depth_min = q(rng.gen_range(2..=4), 2);
        let mut depths = Vec::new();
        let mut dep = depth_min + q(rng.gen_range(1..=3), 3);
        for _ in 0..d {
            depths.push(dep);
            dep += q(rng.gen_range(1..=3), 3);
        }
        let mut heights = Vec::new();
        let mut h = q(rng.gen_range(-2..=2), 2);
        for _ in 0..d {
            heights.push(h);
            h += q(rng.gen_range(1..=3), 2);
        }
        let hs = heights.last().copied().unwrap_or_else(Q::zero);
        StaircaseParams {
            d,
            w,
            widths,
            depth_min,
            depth_max: dep,
            depths,
            heights,
            h: hs,
            eps,
            tail_eps: w.min(depth_min) * q(rng.gen_range(1..=3), 4),
        }
    }

    pub fn validate(&self) -> Result<(), PlanarError> {
        let d = self.d;
        if d == 0 {
            return Err(violation("d >= 1", None));
        }
        for (name, len) in [("widths", self.widths.len()), ("depths", self.depths.len()), ("heights", self.heights.len()), ("eps", self.eps.len())] {
            if len != d {
                return Err(violation(&format!("{} has length d", name), None));
            }
        }
        if self.w <= Q::zero() {
            return Err(violation("w > 0", None));
        }
        if self.depth_min <= Q::zero() {
            return Err(violation("D_bar > 0", None));
        }
        if self.depth_max <= self.depth_min {
            return Err(violation("D_underline > D_bar", None));
        }
        for i in 0..d {
            if self.widths[i] <= self.w {
                return Err(violation("w_i > w", Some(i)));
            }
            if i + 1 < d && self.widths[i + 1] >= self.widths[i] {
                return Err(violation("w_i decreasing", Some(i)));
            }
            if i + 1 < d && self.depths[i + 1] <= self.depths[i] {
                return Err(violation("D_i increasing", Some(i)));
            }
            if i + 1 < d && self.heights[i + 1] <= self.heights[i] {
                return Err(violation("h_i increasing", Some(i)));
            }
            if !(self.depth_min < self.depths[i] && self.depths[i] < self.depth_max) {
                return Err(violation("D_underline > D_i > D_bar", Some(i)));
            }
            if self.heights[i] <= -self.depths[i] {
                return Err(violation("h_i > -D_i", Some(i)));
            }
            if self.heights[i] > self.h {
                return Err(violation("h >= h_i", Some(i)));
            }
            if self.eps[i] <= Q::zero() {
                return Err(violation("eps_i > 0", Some(i)));
            }
            let next = if i + 1 < d { self.widths[i + 1] } else { self.w };
            if self.eps[i] >= self.widths[i] - next {
                return Err(violation("eps_i < w_i - w_{i+1}", Some(i)));
            }
        }
        if !(Q::zero() < self.tail_eps && self.tail_eps < self.w) {
            return Err(PlanarError::ConeTail);
        }
        if self.tail_eps >= self.depth_min {
            return Err(violation("cone tail eps < D_bar", None));
        }
        Ok(())
    }
}

pub fn build_staircase(p: &StaircaseParams) -> Result<Vec<PLCurve>, PlanarError> {
    p.validate()?;
    (0..p.d)
        .map(|i| {
            let lo = pt(p.widths[i] - p.eps[i], -p.depths[i]);
            let hi = pt(p.widths[i], p.heights[i]);
            PLCurve::new(CurveKind::Staircase(i), vec![lo, hi], Some(pt(qi(1), Q::zero())), Some(pt(qi(1), Q::zero())), 0)
        })
        .collect()
}

/// Downward rays at q = -w and q = w joined by the zero section; the bends
/// sit on the boxes and the primitive of p dq vanishes identically.
pub fn build_conetail(w: Q, eps: Q) -> Result<PLCurve, PlanarError> {
    if !(Q::zero() < eps && eps < w) {
        return Err(PlanarError::ConeTail);
    }
    PLCurve::new(
        CurveKind::ConeTail,
        vec![pt(-w, Q::zero()), pt(w, Q::zero())],
        Some(pt(Q::zero(), qi(1))),
        Some(pt(Q::zero(), qi(-1))),
        0,
    )
}

pub fn vertical_line(w: Q) -> PLCurve {
    PLCurve::new(CurveKind::VerticalLine(w), vec![pt(w, Q::zero())], Some(pt(Q::zero(), qi(1))), Some(pt(Q::zero(), qi(1))), 0)
        .expect("a line is a valid curve")
}

/// A staircase together with its cone tail, the latter last.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaircaseConfig {
    pub params: StaircaseParams,
    pub curves: Vec<PLCurve>,
}

impl StaircaseConfig {
    pub fn new(params: StaircaseParams) -> Result<Self, PlanarError> {
        let mut curves = build_staircase(&params)?;
        curves.push(build_conetail(params.w, params.tail_eps)?);
        Ok(StaircaseConfig { params, curves })
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn gammas(&self) -> &[PLCurve] {
        &self.curves[..self.d()]
    }

    pub fn cone(&self) -> &PLCurve {
        &self.curves[self.d()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub location: Pt,
    /// Curve indices `(a, b)` with `a < b`; the point is a generator of hom(L_a, L_b).
    pub curves: (usize, usize),
    pub segments: (usize, usize),
    pub degree: i64,
}

/// All transverse crossings between distinct curves, sorted by curve pair then location.
pub fn intersections(config: &[PLCurve]) -> Result<Vec<IntersectionPoint>, PlanarError> {
    let mut out = Vec::new();
    for (i, c) in config.iter().enumerate() {
        c.check_embedded(i)?;
    }
    for a in 0..config.len() {
        for b in (a + 1)..config.len() {
            out.extend(pair_intersections(config, a, b)?);
        }
    }
    Ok(out)
}

fn pair_intersections(config: &[PLCurve], a: usize, b: usize) -> Result<Vec<IntersectionPoint>, PlanarError> {
    let pa = config[a].pieces();
    let pb = config[b].pieces();
    for (sa, x) in pa.iter().enumerate() {
        for (sb, y) in pb.iter().enumerate() {
            if let Meet::Overlap = meet(x, y) {
                return Err(PlanarError::Tangency { a, b, sa, sb });
            }
        }
    }
    let mut out = Vec::new();
    for (sa, x) in pa.iter().enumerate() {
        for (sb, y) in pb.iter().enumerate() {
            match meet(x, y) {
                Meet::None | Meet::Overlap => {}
                Meet::Point(t, u) => {
                    let at_end = |pc: &Piece, t: Q| t.is_zero() || pc.tmax == Some(t);
                    if at_end(x, t) || at_end(y, u) {
                        return Err(PlanarError::VertexCrossing { a, b });
                    }
                    let la = config[a].grading_lift[sa];
                    let lb = config[b].grading_lift[sb];
                    out.push(IntersectionPoint { location: x.at(t), curves: (a, b), segments: (sa, sb), degree: la.ceil_minus(&lb) });
                }
            }
        }
    }
    out.sort_by_key(|u| u.location);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Planar subdivision

pub const BOX_LABEL: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub outer: Vec<Pt>,
    pub holes: Vec<Vec<Pt>>,
    /// A point in the open face.
    pub sample: Pt,
    /// Curve labels along each edge of `outer`.
    pub boundary_labels: Vec<BTreeSet<usize>>,
    pub touches_box: bool,
}

fn shoelace(poly: &[Pt]) -> Q {
    let n = poly.len();
    let mut s = Q::zero();
    for i in 0..n {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    s / qi(2)
}

fn on_segment(x: Pt, a: Pt, b: Pt) -> bool {
    cross(sub(b, a), sub(x, a)).is_zero()
        && x.q >= a.q.min(b.q)
        && x.q <= a.q.max(b.q)
        && x.p >= a.p.min(b.p)
        && x.p <= a.p.max(b.p)
}

/// Winding number of a closed polyline around `x` (which must not lie on it).
pub fn winding(poly: &[Pt], x: Pt) -> i64 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.p <= x.p {
            if b.p > x.p && cross(sub(b, a), sub(x, a)) > Q::zero() {
                w += 1;
            }
        } else if b.p <= x.p && cross(sub(b, a), sub(x, a)) < Q::zero() {
            w -= 1;
        }
    }
    w
}

fn on_boundary(poly: &[Pt], x: Pt) -> bool {
    let n = poly.len();
    (0..n).any(|i| on_segment(x, poly[i], poly[(i + 1) % n]))
}

impl Face {
    pub fn area(&self) -> Q {
        shoelace(&self.outer) - self.holes.iter().map(|h| shoelace(h).abs()).sum::<Q>()
    }

    /// Membership in the closed face.
    pub fn contains(&self, x: Pt) -> bool {
        let in_outer = on_boundary(&self.outer, x) || winding(&self.outer, x) != 0;
        in_outer && !self.holes.iter().any(|h| !on_boundary(h, x) && winding(h, x) != 0)
    }
}

#[derive(Clone, Debug)]
pub struct Subdivision {
    pub faces: Vec<Face>,
    pub bound: Q,
}

fn direction_cmp(a: Pt, b: Pt) -> std::cmp::Ordering {
    let half = |v: Pt| if v.p > Q::zero() || (v.p.is_zero() && v.q > Q::zero()) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| Q::zero().cmp(&cross(a, b)))
}

impl Subdivision {
    /// Faces of the box `[-bound, bound]^2` cut by the given labelled curves and segments.
    pub fn build(curves: &[(usize, PLCurve)], segments: &[(usize, Pt, Pt)], extra: &[Pt]) -> Subdivision {
        let mut coords: Vec<Q> = Vec::new();
        for (_, c) in curves {
            for v in &c.vertices {
                coords.push(v.q.abs());
                coords.push(v.p.abs());
            }
        }
        for (_, a, b) in segments {
            coords.extend([a.q.abs(), a.p.abs(), b.q.abs(), b.p.abs()]);
        }
        for v in extra {
            coords.extend([v.q.abs(), v.p.abs()]);
        }
        let m = coords.into_iter().fold(Q::zero(), |a, b| a.max(b)).ceil() * qi(2) + qi(4);
        let mut segs: Vec<(usize, Pt, Pt)> = segments.to_vec();
        for (label, c) in curves {
            for pc in c.pieces() {
                let end = match pc.tmax {
                    Some(t) => pc.at(t),
                    None => clip_ray(&pc, m),
                };
                segs.push((*label, pc.o, end));
            }
        }
        let corners = [pt(-m, -m), pt(m, -m), pt(m, m), pt(-m, m)];
        for i in 0..4 {
            segs.push((BOX_LABEL, corners[i], corners[(i + 1) % 4]));
        }
        Subdivision::from_segments(&segs, m)
    }

    fn from_segments(segs: &[(usize, Pt, Pt)], m: Q) -> Subdivision {
        let mut points: BTreeSet<Pt> = BTreeSet::new();
        for (_, a, b) in segs {
            points.insert(*a);
            points.insert(*b);
        }
        for i in 0..segs.len() {
            for j in (i + 1)..segs.len() {
                let (_, a, b) = segs[i];
                let (_, c, d) = segs[j];
                let x = Piece { o: a, dir: sub(b, a), tmax: Some(qi(1)) };
                let y = Piece { o: c, dir: sub(d, c), tmax: Some(qi(1)) };
                match meet(&x, &y) {
                    Meet::Point(t, _) => {
                        points.insert(x.at(t));
                    }
                    Meet::Overlap => {
                        for v in [a, b] {
                            if on_segment(v, c, d) {
                                points.insert(v);
                            }
                        }
                        for v in [c, d] {
                            if on_segment(v, a, b) {
                                points.insert(v);
                            }
                        }
                    }
                    Meet::None => {}
                }
            }
        }
        let pts: Vec<Pt> = points.into_iter().collect();
        let mut edges: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
        for &(label, a, b) in segs {
            if a == b {
                continue;
            }
            let dir = sub(b, a);
            let mut on: Vec<(Q, usize)> = pts
                .iter()
                .enumerate()
                .filter(|(_, &x)| on_segment(x, a, b))
                .map(|(i, &x)| (dot(sub(x, a), dir), i))
                .collect();
            on.sort();
            for w in on.windows(2) {
                let key = (w[0].1.min(w[1].1), w[0].1.max(w[1].1));
                edges.entry(key).or_default().insert(label);
            }
        }
        let n = pts.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges.keys() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_by(|&a, &b| direction_cmp(sub(pts[a], pts[u]), sub(pts[b], pts[u])));
        }
        // next half-edge after u->v: the neighbour of v just before u in ccw order
        let mut cycle_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for &(a, b) in edges.keys() {
            for (u, v) in [(a, b), (b, a)] {
                if cycle_of.contains_key(&(u, v)) {
                    continue;
                }
                let id = cycles.len();
                let mut cyc = Vec::new();
                let (mut x, mut y) = (u, v);
                loop {
                    cycle_of.insert((x, y), id);
                    cyc.push(x);
                    let list = &adj[y];
                    let pos = list.iter().position(|&z| z == x).unwrap();
                    let z = list[(pos + list.len() - 1) % list.len()];
                    x = y;
                    y = z;
                    if (x, y) == (u, v) {
                        break;
                    }
                }
                cycles.push(cyc);
            }
        }
        let polys: Vec<Vec<Pt>> = cycles.iter().map(|c| c.iter().map(|&i| pts[i]).collect()).collect();
        let areas: Vec<Q> = polys.iter().map(|p| shoelace(p)).collect();
        let edge_labels = |u: usize, v: usize| edges[&(u.min(v), u.max(v))].clone();
        let mut face_of_cycle: Vec<Option<usize>> = vec![None; cycles.len()];
        let mut faces: Vec<Face> = Vec::new();
        for (ci, cyc) in cycles.iter().enumerate() {
            if areas[ci] > Q::zero() {
                face_of_cycle[ci] = Some(faces.len());
                let labels: Vec<BTreeSet<usize>> = (0..cyc.len()).map(|k| edge_labels(cyc[k], cyc[(k + 1) % cyc.len()])).collect();
                let touches = labels.iter().any(|l| l.contains(&BOX_LABEL));
                faces.push(Face { outer: polys[ci].clone(), holes: vec![], sample: pts[0], boundary_labels: labels, touches_box: touches });
            }
        }
        for (ci, cyc) in cycles.iter().enumerate() {
            if areas[ci] > Q::zero() {
                continue;
            }
            let on_box = (0..cyc.len()).any(|k| edge_labels(cyc[k], cyc[(k + 1) % cyc.len()]).contains(&BOX_LABEL));
            if on_box {
                continue;
            }
            let probe = polys[ci][0];
            let host = faces
                .iter()
                .enumerate()
                .filter(|(_, f)| !on_boundary(&f.outer, probe) && winding(&f.outer, probe) != 0)
                .min_by(|a, b| shoelace(&a.1.outer).cmp(&shoelace(&b.1.outer)))
                .map(|(i, _)| i);
            if let Some(h) = host {
                face_of_cycle[ci] = Some(h);
                faces[h].holes.push(polys[ci].clone());
                if (0..cyc.len()).any(|k| edge_labels(cyc[k], cyc[(k + 1) % cyc.len()]).contains(&BOX_LABEL)) {
                    faces[h].touches_box = true;
                }
            }
        }
        // sample points from vertical slabs
        let mut xs: Vec<Q> = pts.iter().map(|p| p.q).collect();
        xs.sort();
        xs.dedup();
        let mut sampled = vec![false; faces.len()];
        for w in xs.windows(2) {
            let x0 = (w[0] + w[1]) / qi(2);
            let mut cuts: Vec<(Q, usize, usize)> = Vec::new();
            for &(a, b) in edges.keys() {
                let (l, r) = if pts[a].q < pts[b].q { (a, b) } else { (b, a) };
                if pts[l].q < x0 && x0 < pts[r].q {
                    let t = (x0 - pts[l].q) / (pts[r].q - pts[l].q);
                    cuts.push((pts[l].p + t * (pts[r].p - pts[l].p), l, r));
                }
            }
            cuts.sort();
            for c in cuts.windows(2) {
                let (y0, l, r) = c[0];
                if let Some(f) = face_of_cycle[cycle_of[&(l, r)]] {
                    if !sampled[f] {
                        sampled[f] = true;
                        faces[f].sample = pt(x0, (y0 + c[1].0) / qi(2));
                    }
                }
            }
        }
        Subdivision { faces, bound: m }
    }

    /// Faces whose closure stays away from the bounding box.
    pub fn bounded_faces(&self) -> Vec<Face> {
        self.faces.iter().filter(|f| !f.touches_box).cloned().collect()
    }
}

fn clip_ray(pc: &Piece, m: Q) -> Pt {
    let mut best: Option<Q> = None;
    for (o, d) in [(pc.o.q, pc.dir.q), (pc.o.p, pc.dir.p)] {
        if d.is_zero() {
            continue;
        }
        let lim = if d > Q::zero() { m } else { -m };
        let t = (lim - o) / d;
        best = Some(best.map_or(t, |b: Q| b.min(t)));
    }
    pc.at(best.expect("nonzero direction"))
}

// ---------------------------------------------------------------------------
// Regions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionVariant {
    R,
    RPrime,
    RDoublePrime,
    Confinement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub variant: RegionVariant,
    pub faces: Vec<Face>,
}

/// Label used for the auxiliary line or curve bounding a region.
pub const WALL_LABEL: usize = usize::MAX - 1;

impl Region {
    pub fn from_curves(variant: RegionVariant, curves: &[(usize, PLCurve)], segments: &[(usize, Pt, Pt)]) -> Region {
        let sub = Subdivision::build(curves, segments, &[]);
        Region { variant, faces: sub.bounded_faces() }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn contains(&self, x: Pt) -> bool {
        self.faces.iter().any(|f| f.contains(x))
    }

    pub fn area(&self) -> Q {
        self.faces.iter().map(|f| f.area()).sum()
    }

    /// Curve labels met along the outer boundary of each face, merging repeats.
    pub fn boundary_arcs(&self) -> Vec<Vec<BTreeSet<usize>>> {
        self.faces
            .iter()
            .map(|f| {
                let mut arcs: Vec<BTreeSet<usize>> = Vec::new();
                for l in &f.boundary_labels {
                    if arcs.last() != Some(l) {
                        arcs.push(l.clone());
                    }
                }
                if arcs.len() > 1 && arcs.first() == arcs.last() {
                    arcs.pop();
                }
                arcs
            })
            .collect()
    }

    fn boundary_segments(&self) -> Vec<(usize, Pt, Pt)> {
        let mut out = Vec::new();
        for f in &self.faces {
            for poly in std::iter::once(&f.outer).chain(&f.holes) {
                for i in 0..poly.len() {
                    out.push((0, poly[i], poly[(i + 1) % poly.len()]));
                }
            }
        }
        out
    }

    /// Equality as closed subsets of the plane.
    pub fn same_set(&self, other: &Region) -> bool {
        let mut segs = self.boundary_segments();
        segs.extend(other.boundary_segments());
        let sub = Subdivision::build(&[], &segs, &[]);
        sub.faces.iter().all(|f| self.contains(f.sample) == other.contains(f.sample))
    }

    /// Whether the closed set contains the other one.
    pub fn contains_region(&self, other: &Region) -> bool {
        let mut segs = self.boundary_segments();
        segs.extend(other.boundary_segments());
        let sub = Subdivision::build(&[], &segs, &[]);
        sub.faces.iter().all(|f| !other.contains(f.sample) || self.contains(f.sample))
    }

    pub fn contains_polygon(&self, poly: &Polygon) -> bool {
        if poly.constant {
            return poly.corners.iter().all(|c| self.contains(c.location));
        }
        let mut segs = self.boundary_segments();
        let n = poly.boundary.len();
        for i in 0..n {
            segs.push((1, poly.boundary[i], poly.boundary[(i + 1) % n]));
        }
        let sub = Subdivision::build(&[], &segs, &[]);
        sub.faces.iter().all(|f| winding(&poly.boundary, f.sample) == 0 || self.contains(f.sample))
    }
}

/// R (with l_w), R' (with l_{-w}) or R'' (with the cone tail), bounded by the staircase.
pub fn regions(config: &StaircaseConfig, variant: RegionVariant) -> Region {
    let w = config.params.w;
    let mut curves: Vec<(usize, PLCurve)> = config.gammas().iter().cloned().enumerate().collect();
    match variant {
        RegionVariant::R => curves.push((WALL_LABEL, vertical_line(w))),
        RegionVariant::RPrime => curves.push((WALL_LABEL, vertical_line(-w))),
        RegionVariant::RDoublePrime | RegionVariant::Confinement => curves.push((config.d(), config.cone().clone())),
    }
    Region::from_curves(variant, &curves, &[])
}

// ---------------------------------------------------------------------------
// Corner data and polygons

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CornerType {
    Type1,
    Type2,
    Type3,
    Other,
}

/// Corners `x_0 in L_d ∩ L_0` and `x_k in L_{k-1} ∩ L_k` of a boundary cycle `L_0..L_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerData {
    pub boundary: Vec<usize>,
    pub corners: Vec<Pt>,
}

pub fn classify_corner_data(corners: &[Pt], w: Q) -> CornerType {
    let left: Vec<usize> = (0..corners.len()).filter(|&i| corners[i].q < w).collect();
    let d = corners.len() - 1;
    match left.as_slice() {
        [] => CornerType::Type1,
        [0] if d > 0 => CornerType::Type3,
        [0, x] if *x == d => CornerType::Type2,
        _ => CornerType::Other,
    }
}

/// Corner data of a staircase configuration: boundary `γ_0..γ_{d-1}, c`, with the
/// cone-tail corners `x_0` and `x_d` at `q = ±w` as chosen.
pub fn staircase_corner_data(config: &StaircaseConfig, x0_left: bool, xd_left: bool) -> Result<CornerData, PlanarError> {
    let d = config.d();
    let pts = intersections(&config.curves)?;
    let pick = |a: usize, b: usize, left: Option<bool>| -> Result<Pt, PlanarError> {
        let cands: Vec<Pt> = pts
            .iter()
            .filter(|x| x.curves == (a, b) && left.is_none_or(|l| (x.location.q < Q::zero()) == l))
            .map(|x| x.location)
            .collect();
        match cands.as_slice() {
            [x] => Ok(*x),
            _ => Err(PlanarError::Corners(format!("{} candidates on curves {} and {}", cands.len(), a, b))),
        }
    };
    let mut corners = vec![pick(0, d, Some(x0_left))?];
    for k in 1..d {
        corners.push(pick(k - 1, k, None)?);
    }
    corners.push(pick(d - 1, d, Some(xd_left))?);
    Ok(CornerData { boundary: (0..=d).collect(), corners })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub curve: usize,
    pub points: Vec<Pt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polygon {
    pub corners: Vec<IntersectionPoint>,
    pub arcs: Vec<Arc>,
    /// Closed boundary polyline (corner x_0 first).
    pub boundary: Vec<Pt>,
    /// Faces of the configuration's subdivision covered once.
    pub faces: Vec<usize>,
    pub orientation: Orientation,
    #[serde(with = "rational")]
    pub area: Q,
    pub constant: bool,
    /// Corners whose interior angle exceeds pi; each one opens a slit direction.
    pub reflex: Vec<usize>,
}

impl Polygon {
    /// No reflex corners: an isolated disk rather than a member of a slit family.
    pub fn is_rigid(&self) -> bool {
        self.reflex.is_empty()
    }
}

fn corner_point(curves: &[PLCurve], a: usize, b: usize, x: Pt) -> Result<IntersectionPoint, PlanarError> {
    let (lo, hi) = (a.min(b), a.max(b));
    let pts = pair_intersections(curves, lo, hi)?;
    pts.into_iter()
        .find(|p| p.location == x)
        .ok_or_else(|| PlanarError::Corners(format!("({}) is not a crossing of curves {} and {}", x, lo, hi)))
}

fn polyline_is_simple(poly: &[Pt]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let seg = |i: usize| (poly[i], poly[(i + 1) % n]);
    for i in 0..n {
        let (a, b) = seg(i);
        if a == b {
            return false;
        }
        for j in (i + 1)..n {
            let (c, d) = seg(j);
            let x = Piece { o: a, dir: sub(b, a), tmax: Some(qi(1)) };
            let y = Piece { o: c, dir: sub(d, c), tmax: Some(qi(1)) };
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            match meet(&x, &y) {
                Meet::None => {}
                Meet::Overlap => return false,
                Meet::Point(t, u) => {
                    if !adjacent {
                        return false;
                    }
                    // adjacent segments may only share their common vertex
                    let shared = if j == i + 1 { t == qi(1) && u.is_zero() } else { t.is_zero() && u == qi(1) };
                    if !shared {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Embedded polygons whose boundary runs along `L_0` from `x_0` to `x_1`,
/// along `L_1` to `x_2`, ..., along `L_d` back to `x_0`, in either
/// orientation. Reflex corners are recorded rather than rejected.
pub fn enumerate_polygons(config: &[PLCurve], data: &CornerData) -> Result<Vec<Polygon>, PlanarError> {
    let d = data.boundary.len() - 1;
    if data.corners.len() != d + 1 || d == 0 {
        return Err(PlanarError::Corners("need d+1 corners and d >= 1".into()));
    }
    let l = &data.boundary;
    let mut corners = Vec::new();
    for k in 0..=d {
        let (a, b) = if k == 0 { (l[d], l[0]) } else { (l[k - 1], l[k]) };
        corners.push(corner_point(config, a, b, data.corners[k])?);
    }
    let mut arcs = Vec::new();
    for k in 0..=d {
        let from = data.corners[k];
        let to = data.corners[(k + 1) % (d + 1)];
        arcs.push(Arc { curve: l[k], points: config[l[k]].arc(from, to, l[k])? });
    }
    let zero: Vec<bool> = arcs.iter().map(|a| a.points.len() == 1).collect();
    if zero.iter().all(|&z| z) {
        let constant = Polygon {
            corners,
            arcs,
            boundary: vec![data.corners[0]],
            faces: vec![],
            orientation: Orientation::Clockwise,
            area: Q::zero(),
            constant: true,
            reflex: vec![],
        };
        return Ok(vec![constant]);
    }
    if zero.iter().any(|&z| z) {
        return Ok(vec![]);
    }
    let mut boundary: Vec<Pt> = Vec::new();
    for a in &arcs {
        boundary.extend_from_slice(&a.points[..a.points.len() - 1]);
    }
    if !polyline_is_simple(&boundary) {
        return Ok(vec![]);
    }
    let area = shoelace(&boundary);
    let orient = if area > Q::zero() { Orientation::CounterClockwise } else { Orientation::Clockwise };
    let mut reflex = Vec::new();
    for k in 0..=d {
        let prev = &arcs[(k + d) % (d + 1)].points;
        let next = &arcs[k].points;
        let din = sub(prev[prev.len() - 1], prev[prev.len() - 2]);
        let dout = sub(next[1], next[0]);
        let turn = cross(din, dout);
        let convex = match orient {
            Orientation::CounterClockwise => turn > Q::zero(),
            Orientation::Clockwise => turn < Q::zero(),
        };
        if !convex {
            reflex.push(k);
        }
    }
    let labelled: Vec<(usize, PLCurve)> = config.iter().cloned().enumerate().collect();
    let sub_div = Subdivision::build(&labelled, &[], &[]);
    let faces: Vec<usize> = sub_div.faces.iter().enumerate().filter(|(_, f)| winding(&boundary, f.sample) != 0).map(|(i, _)| i).collect();
    Ok(vec![Polygon { corners, arcs, boundary, faces, orientation: orient, area: area.abs(), constant: false, reflex }])
}

/// Polygons with the given orientation and only convex corners.
pub fn rigid_polygons(config: &[PLCurve], data: &CornerData, orientation: Orientation) -> Result<Vec<Polygon>, PlanarError> {
    Ok(enumerate_polygons(config, data)?.into_iter().filter(|p| p.orientation == orientation && p.is_rigid()).collect())
}

/// Boundary stripping: start from the closed set together with every boundary
/// curve, then replace the curves one at a time (deepest first) by the arcs
/// that can carry disk boundary. Returns the region after each step.
pub fn confinement_steps(config: &[PLCurve], closed_set: &[PLCurve], data: &CornerData) -> Result<Vec<Region>, PlanarError> {
    let d = data.boundary.len() - 1;
    let mut arcs: BTreeMap<usize, Vec<Pt>> = BTreeMap::new();
    for k in 0..=d {
        let from = data.corners[k];
        let to = data.corners[(k + 1) % (d + 1)];
        let c = data.boundary[k];
        arcs.insert(c, config[c].arc(from, to, c)?);
    }
    let mut full: Vec<usize> = data.boundary.clone();
    let walls: Vec<(usize, PLCurve)> = closed_set.iter().cloned().map(|c| (WALL_LABEL, c)).collect();
    let region_of = |full: &[usize]| {
        let mut curves = walls.clone();
        curves.extend(full.iter().map(|&c| (c, config[c].clone())));
        let mut segs = Vec::new();
        for (c, pts) in &arcs {
            if full.contains(c) {
                continue;
            }
            for w in pts.windows(2) {
                segs.push((*c, w[0], w[1]));
            }
        }
        Region::from_curves(RegionVariant::Confinement, &curves, &segs)
    };
    let mut steps = vec![region_of(&full)];
    // the deepest staircase curve first, the cone tail last
    let mut order: Vec<usize> = data.boundary[..d].iter().rev().copied().collect();
    order.push(data.boundary[d]);
    for c in order {
        full.retain(|&x| x != c);
        steps.push(region_of(&full));
    }
    Ok(steps)
}

/// The auxiliary closed set used by boundary stripping for a corner type.
pub fn stripping_wall(config: &StaircaseConfig, kind: CornerType) -> Vec<PLCurve> {
    let w = config.params.w;
    match kind {
        CornerType::Type1 => vec![vertical_line(w)],
        CornerType::Type2 => vec![vertical_line(-w)],
        CornerType::Type3 | CornerType::Other => vec![config.cone().clone()],
    }
}

pub fn confinement(config: &StaircaseConfig, data: &CornerData) -> Result<Region, PlanarError> {
    let kind = classify_corner_data(&data.corners, config.params.w);
    let wall = stripping_wall(config, kind);
    Ok(confinement_steps(&config.curves, &wall, data)?.pop().expect("at least one step"))
}

// ---------------------------------------------------------------------------
// Structure constants

pub struct PlanarCategory {
    pub category: AInfCategory,
    pub points: Vec<IntersectionPoint>,
    /// Object tuple and the polygon realizing each nonzero entry.
    pub polygons: Vec<(Vec<usize>, Polygon)>,
}

pub fn generator_name(x: &IntersectionPoint, k: usize) -> String {
    format!("x{}.{}#{}", x.curves.0, x.curves.1, k)
}

/// The directed A-infinity category of the configuration: objects in the given
/// order, hom(L_a, L_b) spanned by crossings for a < b, and mu^d counting
/// embedded convex polygons traversed clockwise, mod 2.
pub fn mu_d_counts(config: &[PLCurve], max_arity: usize) -> Result<PlanarCategory, PlanarError> {
    let points = intersections(config)?;
    let n = config.len();
    let names: Vec<String> = (0..n).map(|i| format!("L{}", i)).collect();
    let mut cat = AInfCategory::new(names, max_arity, CoefficientMode::ModTwo);
    let mut gens: BTreeMap<(usize, usize), Vec<&IntersectionPoint>> = BTreeMap::new();
    for x in &points {
        gens.entry(x.curves).or_default().push(x);
    }
    for (&(a, b), xs) in &gens {
        let basis: Vec<(String, i32)> = xs.iter().enumerate().map(|(k, x)| (generator_name(x, k), x.degree as i32)).collect();
        cat.set_hom(a, b, FreeGradedModule::new(basis).expect("distinct generator names"));
    }
    let mut polygons = Vec::new();
    for d in 1..=max_arity {
        for key in increasing_tuples(n, d + 1) {
            let homs: Vec<&Vec<&IntersectionPoint>> = match (0..d)
                .map(|k| gens.get(&(key[k], key[k + 1])))
                .collect::<Option<Vec<_>>>()
            {
                Some(h) => h,
                None => continue,
            };
            let Some(outs) = gens.get(&(key[0], key[d])) else { continue };
            let ranks: Vec<usize> = homs.iter().map(|h| h.len()).collect();
            let total: usize = ranks.iter().product();
            for (oi, out) in outs.iter().enumerate() {
                for col in 0..total {
                    let mut idx = vec![0; d];
                    let mut c = col;
                    for k in (0..d).rev() {
                        idx[k] = c % ranks[k];
                        c /= ranks[k];
                    }
                    let mut corners = vec![out.location];
                    corners.extend((0..d).map(|k| homs[k][idx[k]].location));
                    let data = CornerData { boundary: key.clone(), corners };
                    for poly in rigid_polygons(config, &data, Orientation::Clockwise)? {
                        if poly.constant {
                            continue;
                        }
                        let ins: i64 = (0..d).map(|k| homs[k][idx[k]].degree).sum();
                        if out.degree != ins + 2 - d as i64 {
                            return Err(PlanarError::Grading(format!("{:?} corners {:?}", key, data.corners)));
                        }
                        // written order a_d .. a_1
                        let written: Vec<usize> = idx.iter().rev().copied().collect();
                        cat.add_mu_entry(&key, oi, &written, 1);
                        polygons.push((key.clone(), poly));
                    }
                }
            }
        }
    }
    Ok(PlanarCategory { category: cat, points, polygons })
}

fn increasing_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, len, cur, out);
            cur.pop();
        }
    }
    go(0, n, len, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Broken disks

/// A broken disk: each component lists its inputs, which are original
/// marked points (`Leaf`) or further components attached at a node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiskTree {
    Leaf,
    Node(Vec<DiskTree>),
}

impl DiskTree {
    pub fn components(&self) -> usize {
        match self {
            DiskTree::Leaf => 0,
            DiskTree::Node(ch) => 1 + ch.iter().map(|c| c.components()).sum::<usize>(),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            DiskTree::Leaf => 1,
            DiskTree::Node(ch) => ch.iter().map(|c| c.leaves()).sum(),
        }
    }

    /// Trees obtained by gluing one node back (contracting one internal edge).
    fn contractions(&self) -> Vec<DiskTree> {
        let DiskTree::Node(ch) = self else { return vec![] };
        let mut out = Vec::new();
        for (i, c) in ch.iter().enumerate() {
            if let DiskTree::Node(grand) = c {
                let mut merged = ch[..i].to_vec();
                merged.extend(grand.iter().cloned());
                merged.extend(ch[i + 1..].iter().cloned());
                out.push(DiskTree::Node(merged));
            }
            for sub in c.contractions() {
                let mut v = ch.clone();
                v[i] = sub;
                out.push(DiskTree::Node(v));
            }
        }
        // the root may also be glued into a strip sitting at the output
        out
    }
}

impl fmt::Display for DiskTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiskTree::Leaf => write!(f, "*"),
            DiskTree::Node(ch) => {
                write!(f, "(")?;
                for c in ch {
                    write!(f, "{}", c)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Trees with `leaves` leaves, every component having at least one input, at most `budget` components.
fn disk_trees(leaves: usize, budget: usize) -> Vec<DiskTree> {
    if budget == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    // children sequences of the root using the remaining budget
    fn sequences(leaves: usize, budget: usize) -> Vec<(Vec<DiskTree>, usize)> {
        if leaves == 0 {
            return vec![(vec![], 0)];
        }
        let mut out = Vec::new();
        // first child is a leaf
        for (rest, used) in sequences(leaves - 1, budget) {
            let mut v = vec![DiskTree::Leaf];
            v.extend(rest);
            out.push((v, used));
        }
        // first child is a component over `l` leaves
        for l in 1..=leaves {
            for b in 1..=budget {
                for t in disk_trees(l, b).into_iter().filter(|t| t.components() == b) {
                    for (rest, used) in sequences(leaves - l, budget - b) {
                        let mut v = vec![t.clone()];
                        v.extend(rest);
                        out.push((v, used + b));
                    }
                }
            }
        }
        out
    }
    for (ch, used) in sequences(leaves, budget - 1) {
        if used < budget {
            out.push(DiskTree::Node(ch));
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BrokenDiskPoset {
    pub d: usize,
    pub k: usize,
    pub elements: Vec<DiskTree>,
    /// `degenerates[i]` lists the elements that are degenerations of element `i` (including `i`).
    pub degenerates: Vec<BTreeSet<usize>>,
    /// Closed boundary strata (with their degenerations); together with the
    /// empty set and the whole space they generate the closed sets.
    pub closed_generators: Vec<BTreeSet<usize>>,
}

impl BrokenDiskPoset {
    pub fn names(&self) -> Vec<String> {
        self.elements.iter().map(|t| t.to_string()).collect()
    }

    pub fn index_of(&self, t: &DiskTree) -> Option<usize> {
        self.elements.iter().position(|e| e == t)
    }

    pub fn all(&self) -> BTreeSet<usize> {
        (0..self.elements.len()).collect()
    }

    /// All closed sets: finite unions and intersections of the generators, with the empty set and the whole space.
    pub fn closed_sets(&self) -> BTreeSet<BTreeSet<usize>> {
        let mut sets: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        sets.insert(BTreeSet::new());
        sets.insert(self.all());
        sets.extend(self.closed_generators.iter().cloned());
        loop {
            let list: Vec<BTreeSet<usize>> = sets.iter().cloned().collect();
            let before = sets.len();
            for a in &list {
                for b in &list {
                    sets.insert(a.union(b).copied().collect());
                    sets.insert(a.intersection(b).copied().collect());
                }
            }
            if sets.len() == before {
                return sets;
            }
        }
    }

    pub fn is_open(&self, u: &BTreeSet<usize>) -> bool {
        let comp: BTreeSet<usize> = self.all().difference(u).copied().collect();
        self.closed_sets().contains(&comp)
    }

    /// Specialization order: `x ⤳ y` when `y` lies in the closure of `{x}`.
    pub fn closure(&self, x: usize) -> BTreeSet<usize> {
        self.closed_sets().into_iter().filter(|c| c.contains(&x)).fold(self.all(), |a, c| a.intersection(&c).copied().collect())
    }
}

pub fn broken_disk_poset(d: usize, k: usize) -> BrokenDiskPoset {
    let mut elements: Vec<DiskTree> = (1..=k).flat_map(|b| disk_trees(d, b)).collect();
    elements.retain(|t| t.leaves() == d && t.components() <= k);
    elements.sort_by(|a, b| a.components().cmp(&b.components()).then(a.cmp(b)));
    elements.dedup();
    let index: BTreeMap<DiskTree, usize> = elements.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    // y degenerates from x when x is reached from y by contractions
    let n = elements.len();
    let mut degenerates: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    for (j, t) in elements.iter().enumerate() {
        let mut stack = vec![t.clone()];
        let mut seen: BTreeSet<DiskTree> = BTreeSet::new();
        while let Some(s) = stack.pop() {
            for c in contractions_with_root(&s) {
                if seen.insert(c.clone()) {
                    if let Some(&i) = index.get(&c) {
                        degenerates[i].insert(j);
                    }
                    stack.push(c);
                }
            }
        }
    }
    let closed_generators: Vec<BTreeSet<usize>> = (0..n).filter(|&i| elements[i].components() > 1).map(|i| degenerates[i].clone()).collect();
    BrokenDiskPoset { d, k, elements, degenerates, closed_generators }
}

fn contractions_with_root(t: &DiskTree) -> Vec<DiskTree> {
    let mut out = t.contractions();
    // a root with a single component input is a strip at the output; gluing it gives the input
    if let DiskTree::Node(ch) = t {
        if ch.len() == 1 {
            if let DiskTree::Node(_) = &ch[0] {
                out.push(ch[0].clone());
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// SVG

pub fn svg(curves: &[PLCurve], regions: &[&Region], polygons: &[&Polygon]) -> String {
    let labelled: Vec<(usize, PLCurve)> = curves.iter().cloned().enumerate().collect();
    let mut extent = Q::zero();
    for c in curves {
        for v in &c.vertices {
            extent = extent.max(v.q.abs()).max(v.p.abs());
        }
    }
    let m = extent + qi(2);
    let f = |x: Q| -> f64 { *x.numer() as f64 / *x.denom() as f64 };
    let scale_px = 400.0 / f(m);
    let tx = |v: Pt| (500.0 + f(v.q) * scale_px, 500.0 - f(v.p) * scale_px);
    let path = |pts: &[Pt], closed: bool| {
        let mut s = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = tx(p);
            s.push_str(&format!("{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, x, y));
        }
        if closed {
            s.push('Z');
        }
        s
    };
    let mut out = String::from("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" viewBox=\"0 0 1000 1000\">\n");
    for r in regions {
        for face in &r.faces {
            out.push_str(&format!("<path d=\"{}\" fill=\"#f5e663\" stroke=\"none\"/>\n", path(&face.outer, true)));
            for h in &face.holes {
                out.push_str(&format!("<path d=\"{}\" fill=\"white\" stroke=\"none\"/>\n", path(h, true)));
            }
        }
    }
    for p in polygons {
        if !p.constant {
            out.push_str(&format!("<path d=\"{}\" fill=\"#f0b030\" fill-opacity=\"0.6\" stroke=\"none\"/>\n", path(&p.boundary, true)));
        }
    }
    let colours = ["#1f4e9c", "#2e8b57", "#8b2e7a", "#b8860b", "#444444", "#c0392b"];
    for (i, c) in curves.iter().enumerate() {
        let mut pts = Vec::new();
        let pieces = c.pieces();
        for (j, pc) in pieces.iter().enumerate() {
            let end = match pc.tmax {
                Some(t) => pc.at(t),
                None => clip_ray(pc, m),
            };
            if j == 0 {
                pts.push(if c.has_head() { end } else { pc.o });
                if c.has_head() {
                    pts.push(pc.o);
                    continue;
                }
            }
            pts.push(end);
        }
        let colour = if c.kind == CurveKind::ConeTail { "#c0392b" } else { colours[i % colours.len()] };
        out.push_str(&format!("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", path(&pts, false), colour));
    }
    if let Ok(xs) = intersections(curves) {
        for x in xs {
            let (cx, cy) = tx(x.location);
            out.push_str(&format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1a1a1a\"><title>deg {}</title></circle>\n", cx, cy, x.degree));
        }
    }
    let _ = labelled;
    out.push_str("</svg>\n");
    out
}
