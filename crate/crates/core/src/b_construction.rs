//! The B-construction as surgery on cell models: boxes in the q-coordinates
//! carrying face labels of a collared cube, plus the quarter-turn square
//! glued in by each B_i step.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cube_model::{
    closure_bar, k_prime, subsets_with_zero, CollaredCube, CubeError, IndexSubset,
};
use crate::rational::{self, q, qi, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BError {
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error("piece straddles the cut at axis {axis}")]
    Straddle { axis: usize },
    #[error("axis {axis} out of range for a {dims}-dimensional model")]
    Axis { axis: usize, dims: usize },
    #[error("collar width {eps} does not fit in half-width {w}")]
    Collar { eps: String, w: String },
    #[error("invalid phi parameters: {0}")]
    Params(String),
    #[error("face index {i} must satisfy 0 < i < {n}")]
    FaceIndex { i: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Side {
    Front,
    Back,
}

/// What a piece does along one ambient axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Role {
    /// Zero section: the piece is a product along this axis.
    Zero,
    /// The t-th cube axis of the face simplex (1-based).
    Cube(usize),
    /// The vertical axis of the face simplex.
    Vert,
    /// A cone-tail collar.
    Tail(Side),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Label {
    /// Vertices of the face Y_J in the root cube.
    pub face: Vec<usize>,
    pub roles: Vec<Role>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SquarePart {
    Small,
    Tube,
    Big,
}

/// One of the three regions filling the square [w, w+i]_{q_i} × [0, i]_{q_N}
/// added by B_i. `inner` is the lower back face (∂_i Y)|_{[0,i]}, living on
/// the ambient axes other than `ax_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Square {
    pub part: SquarePart,
    pub ax_i: usize,
    pub ax_v: usize,
    /// Collar width as a fraction of the side length.
    #[serde(with = "rational")]
    pub frac: Q,
    pub inner: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Content {
    Brane(Label),
    Square(Box<Square>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Region {
    BasePrism,
    VSmall(usize),
    PhiTube(usize),
    VBig(usize),
    ExtStrip(usize),
    ConeTailCollar { axes: Vec<usize>, sides: Vec<Side> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(with = "rational")]
    pub lo: Q,
    #[serde(with = "rational")]
    pub hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Self {
        Interval { lo, hi }
    }

    fn len(&self) -> Q {
        self.hi - self.lo
    }

    fn affine(&self, from: Interval, to: Interval) -> Interval {
        let f = |x: Q| to.lo + (x - from.lo) * to.len() / from.len();
        Interval { lo: f(self.lo), hi: f(self.hi) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    pub region: Region,
    pub bounds: Vec<Interval>,
    pub content: Content,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellModel {
    pub dims: usize,
    pub labels: BTreeMap<Vec<usize>, String>,
    pub bounds: Vec<Interval>,
    pub pieces: Vec<Piece>,
}

/// Parameters of the embedding φ used by one B_i step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiParams {
    pub i: usize,
    pub w_i: Q,
    pub eps: Q,
    pub delta: Q,
}

impl PhiParams {
    pub fn new(i: usize) -> Self {
        PhiParams { i, w_i: qi(1), eps: q(1, 8), delta: q(1, 16) }
    }

    /// The boundary formulas for α ≤ 1+δ and α ≥ 2−δ, the monotonicity of
    /// both coordinates, and containment in the square reduce to these.
    pub fn validate(&self) -> Result<(), BError> {
        let zero = qi(0);
        let i = qi(self.i as i128);
        let fail = |m: &str| Err(BError::Params(m.to_string()));
        if self.i == 0 {
            return fail("i must be positive");
        }
        if self.w_i <= zero {
            return fail("w_i must be positive");
        }
        if self.eps <= zero || self.delta <= zero {
            return fail("eps and delta must be positive");
        }
        if self.delta >= rational::half() {
            return fail("delta must be below 1/2 so the two boundary ranges of alpha are disjoint");
        }
        if self.delta >= self.eps {
            return fail("delta must be below eps for the second coordinate to decrease");
        }
        if self.eps * qi(2) >= i {
            return fail("2 eps must be below i for the tube to fit in the square");
        }
        if self.w_i + self.eps <= qi(1) + self.delta {
            return fail("w_i + eps must exceed 1 + delta for the first coordinate to increase");
        }
        Ok(())
    }

    pub fn collar_fraction(&self) -> Q {
        self.eps / qi(self.i as i128)
    }
}

#[derive(Debug, Clone, Copy)]
enum End {
    Lo,
    Hi,
}

fn remove_at<T: Clone>(v: &[T], a: usize) -> Vec<T> {
    let mut out = v.to_vec();
    out.remove(a);
    out
}

fn insert_at<T: Clone>(v: &[T], a: usize, x: T) -> Vec<T> {
    let mut out = v.to_vec();
    out.insert(a, x);
    out
}

fn restrict_brane(l: &Label, bounds: &[Interval], a: usize, end: End) -> Result<Vec<(Label, Vec<Interval>)>, BError> {
    let rest = remove_at(&l.roles, a);
    let other = remove_at(bounds, a);
    let m = l.face.len() - 1;
    match (l.roles[a], end) {
        (Role::Zero, _) | (Role::Tail(_), _) => Ok(vec![(Label { face: l.face.clone(), roles: rest }, other)]),
        (Role::Vert, e) => {
            let v = match e {
                End::Lo => l.face[0],
                End::Hi => l.face[m],
            };
            let roles = rest
                .iter()
                .map(|r| match r {
                    Role::Cube(_) | Role::Vert => Role::Zero,
                    x => *x,
                })
                .collect();
            Ok(vec![(Label { face: vec![v], roles }, other)])
        }
        (Role::Cube(t), End::Lo) => {
            let face = l.face.iter().enumerate().filter(|(s, _)| *s != t).map(|(_, &x)| x).collect();
            let roles = rest
                .iter()
                .map(|r| match r {
                    Role::Cube(s) if *s > t => Role::Cube(s - 1),
                    x => *x,
                })
                .collect();
            Ok(vec![(Label { face, roles }, other)])
        }
        (Role::Cube(t), End::Hi) => {
            let va = rest.iter().position(|r| *r == Role::Vert).ok_or(BError::Axis { axis: a, dims: bounds.len() })?;
            let iv = other[va];
            // vertex heights are proportional to their indices in the root cube
            let span = qi((l.face[m] - l.face[0]) as i128);
            let h = iv.lo + iv.len() * qi((l.face[t] - l.face[0]) as i128) / span;
            let lower_roles = rest
                .iter()
                .map(|r| match r {
                    Role::Cube(s) if *s > t => Role::Zero,
                    x => *x,
                })
                .collect();
            let upper_roles = rest
                .iter()
                .map(|r| match r {
                    Role::Cube(s) if *s < t => Role::Zero,
                    Role::Cube(s) => Role::Cube(s - t),
                    x => *x,
                })
                .collect();
            let mut lb = other.clone();
            lb[va] = Interval::new(iv.lo, h);
            let mut ub = other;
            ub[va] = Interval::new(h, iv.hi);
            Ok(vec![
                (Label { face: l.face[..=t].to_vec(), roles: lower_roles }, lb),
                (Label { face: l.face[t..].to_vec(), roles: upper_roles }, ub),
            ])
        }
    }
}

impl Piece {
    fn brane(region: Region, bounds: Vec<Interval>, label: Label) -> Piece {
        Piece { region, bounds, content: Content::Brane(label) }
    }

    fn restrict(&self, a: usize, end: End) -> Result<Vec<Piece>, BError> {
        match &self.content {
            Content::Brane(l) => Ok(restrict_brane(l, &self.bounds, a, end)?
                .into_iter()
                .map(|(l, b)| Piece::brane(self.region.clone(), b, l))
                .collect()),
            Content::Square(s) => self.restrict_square(s, a, end),
        }
    }

    fn restrict_square(&self, s: &Square, a: usize, end: End) -> Result<Vec<Piece>, BError> {
        let bi = self.bounds[s.ax_i];
        let bv = self.bounds[s.ax_v];
        let vi = inner_index(s.ax_i, s.ax_v);
        let di = bi.len() * s.frac;
        let dv = bv.len() * s.frac;
        let region = self.region.clone();
        let tag = |ps: Vec<Piece>| -> Vec<Piece> {
            ps.into_iter().map(|mut p| {
                p.region = region.clone();
                p
            })
            .collect()
        };
        if a == s.ax_i || a == s.ax_v {
            let bottom = restrict_pieces(&s.inner, vi, bv.lo)?;
            let top = restrict_pieces(&s.inner, vi, bv.hi)?;
            let out = match (a == s.ax_i, end, s.part) {
                // left side, glued to the back face
                (true, End::Lo, SquarePart::Small) => insert_axis_all(&bottom, vi, Role::Zero, Interval::new(bv.lo, bv.lo + dv)),
                (true, End::Lo, SquarePart::Tube) => rescale_all(&s.inner, vi, bv, Interval::new(bv.lo + dv, bv.hi - dv)),
                (true, End::Lo, SquarePart::Big) => insert_axis_all(&top, vi, Role::Zero, Interval::new(bv.hi - dv, bv.hi)),
                (true, End::Hi, SquarePart::Big) => insert_axis_all(&top, vi, Role::Zero, bv),
                (true, End::Hi, _) => vec![],
                // bottom side, where the tube lands turned by a quarter
                (false, End::Lo, part) => {
                    let at = if s.ax_v < s.ax_i { s.ax_i - 1 } else { s.ax_i };
                    match part {
                        SquarePart::Small => insert_axis_all(&bottom, at, Role::Zero, Interval::new(bi.lo, bi.lo + di)),
                        SquarePart::Big => insert_axis_all(&top, at, Role::Zero, Interval::new(bi.hi - di, bi.hi)),
                        SquarePart::Tube => {
                            let sigma = turn_permutation(self.bounds.len(), s.ax_i, s.ax_v);
                            let turned: Vec<Piece> = s.inner.iter().map(|p| p.permuted(&sigma)).collect();
                            rescale_all(&turned, at, bv, Interval::new(bi.lo + di, bi.hi - di))
                        }
                    }
                }
                (false, End::Hi, SquarePart::Big) => {
                    let at = if s.ax_v < s.ax_i { s.ax_i - 1 } else { s.ax_i };
                    insert_axis_all(&top, at, Role::Zero, bi)
                }
                (false, End::Hi, _) => vec![],
            };
            return Ok(tag(out));
        }
        let ia = inner_index(s.ax_i, a);
        let v = match end {
            End::Lo => self.bounds[a].lo,
            End::Hi => self.bounds[a].hi,
        };
        let inner = restrict_pieces(&s.inner, ia, v)?;
        let sq = Square {
            part: s.part,
            ax_i: if s.ax_i > a { s.ax_i - 1 } else { s.ax_i },
            ax_v: if s.ax_v > a { s.ax_v - 1 } else { s.ax_v },
            frac: s.frac,
            inner,
        };
        Ok(vec![Piece { region: self.region.clone(), bounds: remove_at(&self.bounds, a), content: Content::Square(Box::new(sq)) }])
    }

    /// Move axis `old` to position `sigma[old]`.
    fn permuted(&self, sigma: &[usize]) -> Piece {
        let d = sigma.len();
        let mut bounds = self.bounds.clone();
        for (old, &new) in sigma.iter().enumerate() {
            bounds[new] = self.bounds[old];
        }
        let content = match &self.content {
            Content::Brane(l) => {
                let mut roles = l.roles.clone();
                for (old, &new) in sigma.iter().enumerate() {
                    roles[new] = l.roles[old];
                }
                Content::Brane(Label { face: l.face.clone(), roles })
            }
            Content::Square(s) => {
                let new_i = sigma[s.ax_i];
                let inner_sigma: Vec<usize> = (0..d)
                    .filter(|&x| x != s.ax_i)
                    .map(|x| inner_index(new_i, sigma[x]))
                    .collect();
                Content::Square(Box::new(Square {
                    part: s.part,
                    ax_i: new_i,
                    ax_v: sigma[s.ax_v],
                    frac: s.frac,
                    inner: s.inner.iter().map(|p| p.permuted(&inner_sigma)).collect(),
                }))
            }
        };
        Piece { region: self.region.clone(), bounds, content }
    }

    fn with_axis(&self, at: usize, role: Role, iv: Interval) -> Piece {
        let bounds = insert_at(&self.bounds, at, iv);
        let content = match &self.content {
            Content::Brane(l) => Content::Brane(Label { face: l.face.clone(), roles: insert_at(&l.roles, at, role) }),
            Content::Square(s) => {
                let ax_i = if s.ax_i >= at { s.ax_i + 1 } else { s.ax_i };
                let ax_v = if s.ax_v >= at { s.ax_v + 1 } else { s.ax_v };
                let ia = inner_index(ax_i, at);
                Content::Square(Box::new(Square {
                    part: s.part,
                    ax_i,
                    ax_v,
                    frac: s.frac,
                    inner: s.inner.iter().map(|p| p.with_axis(ia, role, iv)).collect(),
                }))
            }
        };
        Piece { region: self.region.clone(), bounds, content }
    }

    fn rescaled(&self, a: usize, from: Interval, to: Interval) -> Piece {
        let mut bounds = self.bounds.clone();
        bounds[a] = bounds[a].affine(from, to);
        let content = match &self.content {
            Content::Square(s) if a != s.ax_i => {
                let ia = inner_index(s.ax_i, a);
                let mut s2 = (**s).clone();
                s2.inner = s.inner.iter().map(|p| p.rescaled(ia, from, to)).collect();
                Content::Square(Box::new(s2))
            }
            c => c.clone(),
        };
        Piece { region: self.region.clone(), bounds, content }
    }

    fn clipped(&self, a: usize, lo: Q, hi: Q) -> Result<Option<Piece>, BError> {
        let b = self.bounds[a];
        if b.hi <= lo || b.lo >= hi {
            return Ok(None);
        }
        if b.lo >= lo && b.hi <= hi {
            return Ok(Some(self.clone()));
        }
        let cut = Interval::new(b.lo.max(lo), b.hi.min(hi));
        match &self.content {
            Content::Brane(l) if matches!(l.roles[a], Role::Zero | Role::Tail(_)) => {
                let mut p = self.clone();
                p.bounds[a] = cut;
                Ok(Some(p))
            }
            Content::Square(s) if a != s.ax_i && a != s.ax_v => {
                let ia = inner_index(s.ax_i, a);
                let mut inner = Vec::new();
                for p in &s.inner {
                    if let Some(c) = p.clipped(ia, lo, hi)? {
                        inner.push(c);
                    }
                }
                let mut s2 = (**s).clone();
                s2.inner = inner;
                let mut bounds = self.bounds.clone();
                bounds[a] = cut;
                Ok(Some(Piece { region: self.region.clone(), bounds, content: Content::Square(Box::new(s2)) }))
            }
            _ => Err(BError::Straddle { axis: a }),
        }
    }

    fn footprint_volume(&self, skip: usize) -> Q {
        self.bounds.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, b)| b.len()).product()
    }
}

/// Index of ambient axis `a` among the axes other than `skip`.
fn inner_index(skip: usize, a: usize) -> usize {
    if a > skip {
        a - 1
    } else {
        a
    }
}

/// Permutation taking the inner axes of a square (ambient minus ax_i) to the
/// axes of its bottom face (ambient minus ax_v), sending ax_v to ax_i.
fn turn_permutation(dims: usize, ax_i: usize, ax_v: usize) -> Vec<usize> {
    (0..dims)
        .filter(|&x| x != ax_i)
        .map(|x| {
            let target = if x == ax_v { ax_i } else { x };
            inner_index(ax_v, target)
        })
        .collect()
}

fn restrict_pieces(ps: &[Piece], a: usize, v: Q) -> Result<Vec<Piece>, BError> {
    let mut out = Vec::new();
    for p in ps {
        if p.bounds[a].lo == v {
            out.extend(p.restrict(a, End::Lo)?);
        } else if p.bounds[a].hi == v {
            out.extend(p.restrict(a, End::Hi)?);
        }
    }
    Ok(out)
}

fn insert_axis_all(ps: &[Piece], at: usize, role: Role, iv: Interval) -> Vec<Piece> {
    ps.iter().map(|p| p.with_axis(at, role, iv)).collect()
}

fn rescale_all(ps: &[Piece], a: usize, from: Interval, to: Interval) -> Vec<Piece> {
    ps.iter().map(|p| p.rescaled(a, from, to)).collect()
}

impl CellModel {
    fn check_axis(&self, a: usize) -> Result<(), BError> {
        if a >= self.dims {
            return Err(BError::Axis { axis: a, dims: self.dims });
        }
        Ok(())
    }

    /// Restrict to the prism face at the low end of axis `a`.
    pub fn front(&self, a: usize) -> Result<CellModel, BError> {
        self.check_axis(a)?;
        self.restrict_at(a, self.bounds[a].lo)
    }

    /// Restrict to the prism face at the high end of axis `a`.
    pub fn back(&self, a: usize) -> Result<CellModel, BError> {
        self.check_axis(a)?;
        self.restrict_at(a, self.bounds[a].hi)
    }

    fn restrict_at(&self, a: usize, v: Q) -> Result<CellModel, BError> {
        Ok(CellModel {
            dims: self.dims - 1,
            labels: self.labels.clone(),
            bounds: remove_at(&self.bounds, a),
            pieces: restrict_pieces(&self.pieces, a, v)?,
        })
    }

    /// The part of the model with lo ≤ q_a ≤ hi.
    pub fn slab(&self, a: usize, lo: Q, hi: Q) -> Result<CellModel, BError> {
        self.check_axis(a)?;
        let mut pieces = Vec::new();
        for p in &self.pieces {
            if let Some(c) = p.clipped(a, lo, hi)? {
                pieces.push(c);
            }
        }
        let mut bounds = self.bounds.clone();
        bounds[a] = Interval::new(lo, hi);
        Ok(CellModel { dims: self.dims, labels: self.labels.clone(), bounds, pieces })
    }

    pub fn with_axis(&self, at: usize, role: Role, iv: Interval) -> CellModel {
        CellModel {
            dims: self.dims + 1,
            labels: self.labels.clone(),
            bounds: insert_at(&self.bounds, at, iv),
            pieces: insert_axis_all(&self.pieces, at, role, iv),
        }
    }

    pub fn rescaled(&self, a: usize, to: Interval) -> CellModel {
        let from = self.bounds[a];
        let mut bounds = self.bounds.clone();
        bounds[a] = to;
        CellModel {
            dims: self.dims,
            labels: self.labels.clone(),
            bounds,
            pieces: rescale_all(&self.pieces, a, from, to),
        }
    }

    pub fn permuted(&self, sigma: &[usize]) -> CellModel {
        let mut bounds = self.bounds.clone();
        for (old, &new) in sigma.iter().enumerate() {
            bounds[new] = self.bounds[old];
        }
        CellModel {
            dims: self.dims,
            labels: self.labels.clone(),
            bounds,
            pieces: self.pieces.iter().map(|p| p.permuted(sigma)).collect(),
        }
    }

    pub fn union(&self, other: &CellModel) -> CellModel {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        let bounds = self
            .bounds
            .iter()
            .zip(&other.bounds)
            .map(|(a, b)| Interval::new(a.lo.min(b.lo), a.hi.max(b.hi)))
            .collect();
        CellModel { dims: self.dims, labels: self.labels.clone(), bounds, pieces }
    }

    pub fn label_text(&self, l: &Label) -> String {
        self.labels.get(&l.face).cloned().unwrap_or_else(|| format!("{:?}", l.face))
    }

    /// Pairwise disjoint interiors (the three parts of one square count as
    /// one region) and total volume equal to the prism.
    pub fn check_tiling(&self) -> Result<(), String> {
        let mut regions: Vec<&Piece> = Vec::new();
        for p in &self.pieces {
            let same_square = regions.iter().any(|r| {
                r.bounds == p.bounds
                    && matches!((&r.content, &p.content), (Content::Square(a), Content::Square(b)) if a.ax_i == b.ax_i && a.ax_v == b.ax_v && a.part != b.part)
            });
            if !same_square {
                regions.push(p);
            }
        }
        for (x, a) in regions.iter().enumerate() {
            for b in &regions[x + 1..] {
                let overlap = a.bounds.iter().zip(&b.bounds).all(|(u, v)| u.lo.max(v.lo) < u.hi.min(v.hi));
                if overlap {
                    return Err(format!("overlapping pieces {:?} and {:?}", a.region, b.region));
                }
            }
        }
        let total: Q = regions.iter().map(|p| p.footprint_volume(usize::MAX)).sum();
        let prism: Q = self.bounds.iter().map(|b| b.len()).product();
        if total != prism {
            return Err(format!("pieces cover volume {} of {}", total, prism));
        }
        Ok(())
    }

    /// Faces seen from below and from above the wall q_a = v.
    pub fn wall_sides(&self, a: usize, v: Q) -> Result<(CellModel, CellModel), BError> {
        let side = |end: End| -> Result<CellModel, BError> {
            let mut pieces = Vec::new();
            for p in &self.pieces {
                let touches = match end {
                    End::Hi => p.bounds[a].hi == v,
                    End::Lo => p.bounds[a].lo == v,
                };
                if touches {
                    pieces.extend(p.restrict(a, end)?);
                }
            }
            Ok(CellModel { dims: self.dims - 1, labels: self.labels.clone(), bounds: remove_at(&self.bounds, a), pieces })
        };
        Ok((side(End::Hi)?, side(End::Lo)?))
    }

    /// Along every interior wall, the faces of the pieces on the two sides
    /// agree up to reparametrization.
    pub fn check_adjacency(&self) -> Result<usize, String> {
        let mut walls: Vec<(usize, Q)> = Vec::new();
        for p in &self.pieces {
            for (a, b) in p.bounds.iter().enumerate() {
                for v in [b.lo, b.hi] {
                    if v != self.bounds[a].lo && v != self.bounds[a].hi && !walls.contains(&(a, v)) {
                        walls.push((a, v));
                    }
                }
            }
        }
        let mut checked = 0;
        for (a, v) in walls {
            let (lo, hi) = self.wall_sides(a, v).map_err(|e| e.to_string())?;
            let (lo, hi) = (lo.pieces, hi.pieces);
            let (Some(bl), Some(bh)) = (solid_box(&lo), solid_box(&hi)) else { continue };
            let common: Vec<Interval> =
                bl.iter().zip(&bh).map(|(x, y)| Interval::new(x.lo.max(y.lo), x.hi.min(y.hi))).collect();
            if common.iter().any(|c| c.lo >= c.hi) {
                continue;
            }
            let clip = |ps: Vec<Piece>| -> Option<Vec<Piece>> {
                let mut cur = ps;
                for (k, c) in common.iter().enumerate() {
                    let mut next = Vec::new();
                    for p in &cur {
                        match p.clipped(k, c.lo, c.hi) {
                            Ok(Some(x)) => next.push(x),
                            Ok(None) => {}
                            Err(_) => return None,
                        }
                    }
                    cur = next;
                }
                Some(cur)
            };
            let (Some(lo), Some(hi)) = (clip(lo), clip(hi)) else { continue };
            let mk = |pieces| CellModel { dims: self.dims - 1, labels: self.labels.clone(), bounds: common.clone(), pieces };
            if canonical(&mk(lo)) != canonical(&mk(hi)) {
                return Err(format!("incompatible faces across axis {} at {}", a, v));
            }
            checked += 1;
        }
        Ok(checked)
    }
}

/// Bounding box of pieces, if they fill it exactly.
fn solid_box(ps: &[Piece]) -> Option<Vec<Interval>> {
    let first = ps.first()?;
    let mut bb = first.bounds.clone();
    for p in ps {
        for (b, x) in bb.iter_mut().zip(&p.bounds) {
            b.lo = b.lo.min(x.lo);
            b.hi = b.hi.max(x.hi);
        }
    }
    let mut seen: Vec<&Vec<Interval>> = Vec::new();
    let mut vol = qi(0);
    for p in ps {
        if !seen.contains(&&p.bounds) {
            seen.push(&p.bounds);
            vol += p.footprint_volume(usize::MAX);
        }
    }
    let full: Q = bb.iter().map(|b| b.len()).product();
    (vol == full).then_some(bb)
}

/// The simplex Y over [0,1]^{N-1} × [0,N], a single base piece.
pub fn simplex_model(cube: &CollaredCube) -> CellModel {
    let n = cube.n;
    let mut bounds: Vec<Interval> = (1..n).map(|_| Interval::new(qi(0), qi(1))).collect();
    let mut roles: Vec<Role> = (1..n).map(Role::Cube).collect();
    if n > 0 {
        bounds.push(Interval::new(qi(0), qi(n as i128)));
        roles.push(Role::Vert);
    }
    let label = Label { face: (0..=n).collect(), roles };
    CellModel {
        dims: n,
        labels: cube.face_data.clone(),
        bounds: bounds.clone(),
        pieces: vec![Piece::brane(Region::BasePrism, bounds, label)],
    }
}

/// ∂_i^back Y assembled from the cube data: Y_{0..i} below height i and
/// Y_{i..N} above, each a product in the directions it does not span.
pub fn back_face_model(cube: &CollaredCube, i: usize) -> Result<CellModel, BError> {
    let n = cube.n;
    if i == 0 || i >= n {
        return Err(BError::FaceIndex { i, n });
    }
    cube.back_face(i)?;
    let mut bounds: Vec<Interval> = (1..n).filter(|&a| a != i).map(|_| Interval::new(qi(0), qi(1))).collect();
    bounds.push(Interval::new(qi(0), qi(n as i128)));
    let axes: Vec<usize> = (1..n).filter(|&a| a != i).collect();
    let lower_roles: Vec<Role> = axes
        .iter()
        .map(|&a| if a < i { Role::Cube(a) } else { Role::Zero })
        .chain(std::iter::once(Role::Vert))
        .collect();
    let upper_roles: Vec<Role> = axes
        .iter()
        .map(|&a| if a > i { Role::Cube(a - i) } else { Role::Zero })
        .chain(std::iter::once(Role::Vert))
        .collect();
    let h = bounds.len() - 1;
    let mut lb = bounds.clone();
    lb[h] = Interval::new(qi(0), qi(i as i128));
    let mut ub = bounds.clone();
    ub[h] = Interval::new(qi(i as i128), qi(n as i128));
    Ok(CellModel {
        dims: n - 1,
        labels: cube.face_data.clone(),
        bounds,
        pieces: vec![
            Piece::brane(Region::BasePrism, lb, Label { face: (0..=i).collect(), roles: lower_roles }),
            Piece::brane(Region::BasePrism, ub, Label { face: (i..=n).collect(), roles: upper_roles }),
        ],
    })
}

/// One B step on axis `ax` (0-based), cutting the back face at height `h`.
/// The vertical is the last axis.
pub fn b_step(m: &CellModel, ax: usize, h: Q, params: &PhiParams) -> Result<CellModel, BError> {
    params.validate()?;
    m.check_axis(ax)?;
    let vert = m.dims - 1;
    if ax == vert {
        return Err(BError::Axis { axis: ax, dims: m.dims });
    }
    let w = m.bounds[ax].hi;
    let top = m.bounds[vert].hi;
    let face = m.back(ax)?;
    let fv = vert - 1;
    let lower = face.slab(fv, m.bounds[vert].lo, h)?;
    let upper = face.slab(fv, h, top)?;
    let mut sq_bounds = m.bounds.clone();
    sq_bounds[ax] = Interval::new(w, w + h);
    sq_bounds[vert] = Interval::new(m.bounds[vert].lo, h);
    let i = params.i;
    let frac = params.collar_fraction();
    let mut pieces = m.pieces.clone();
    for (part, region) in [
        (SquarePart::Small, Region::VSmall(i)),
        (SquarePart::Tube, Region::PhiTube(i)),
        (SquarePart::Big, Region::VBig(i)),
    ] {
        let sq = Square { part, ax_i: ax, ax_v: vert, frac, inner: lower.pieces.clone() };
        pieces.push(Piece { region, bounds: sq_bounds.clone(), content: Content::Square(Box::new(sq)) });
    }
    for mut p in insert_axis_all(&upper.pieces, ax, Role::Zero, Interval::new(w, w + h)) {
        p.region = Region::ExtStrip(i);
        pieces.push(p);
    }
    let mut bounds = m.bounds.clone();
    bounds[ax] = Interval::new(m.bounds[ax].lo, w + h);
    Ok(CellModel { dims: m.dims, labels: m.labels.clone(), bounds, pieces })
}

/// B_i applied to a model whose vertex j sits at height j.
pub fn b_i(m: &CellModel, i: usize) -> Result<CellModel, BError> {
    b_step(m, i - 1, qi(i as i128), &PhiParams::new(i))
}

/// B_{N-1} ∘ … ∘ B_1 (Y) before rescaling.
pub fn b_prime_raw(cube: &CollaredCube) -> Result<CellModel, BError> {
    let mut m = simplex_model(cube);
    for i in 1..cube.n {
        m = b_i(&m, i)?;
    }
    Ok(m)
}

fn half_widths(cube: &CollaredCube) -> Vec<Q> {
    (0..cube.n).map(|a| cube.widths.get(a).copied().unwrap_or_else(rational::one)).collect()
}

/// B′(Y), rescaled to ∏[−w_i, w_i].
pub fn b_prime(cube: &CollaredCube) -> Result<CellModel, BError> {
    let mut m = b_prime_raw(cube)?;
    for (a, w) in half_widths(cube).into_iter().enumerate() {
        m = m.rescaled(a, Interval::new(-w, w));
    }
    Ok(m)
}

/// Cone-tail collar width used by `b_full`.
pub fn default_tail_width() -> Q {
    q(1, 4)
}

/// B(Y): B′(Y) squeezed into ∏[−w+ε, w−ε], with cone-tail collars over
/// every face and corner of the cube.
pub fn b_full(cube: &CollaredCube) -> Result<CellModel, BError> {
    b_full_with(cube, default_tail_width())
}

pub fn b_full_with(cube: &CollaredCube, eps: Q) -> Result<CellModel, BError> {
    let ws = half_widths(cube);
    for w in &ws {
        if eps >= *w || eps <= qi(0) {
            return Err(BError::Collar { eps: rational::to_string(&eps), w: rational::to_string(w) });
        }
    }
    let mut inner = b_prime_raw(cube)?;
    for (a, w) in ws.iter().enumerate() {
        inner = inner.rescaled(a, Interval::new(-*w + eps, *w - eps));
    }
    let n = cube.n;
    let mut pieces = inner.pieces.clone();
    for code in 1..3usize.pow(n as u32) {
        let zone: Vec<usize> = (0..n).map(|a| (code / 3usize.pow(a as u32)) % 3).collect();
        // 0 = middle, 1 = front collar, 2 = back collar
        if zone.iter().all(|&z| z == 0) {
            continue;
        }
        let mut face = inner.clone();
        for a in (0..n).rev() {
            face = match zone[a] {
                1 => face.front(a)?,
                2 => face.back(a)?,
                _ => face,
            };
        }
        let mut axes = Vec::new();
        let mut sides = Vec::new();
        for a in 0..n {
            let (side, iv) = match zone[a] {
                1 => (Side::Front, Interval::new(-ws[a], -ws[a] + eps)),
                2 => (Side::Back, Interval::new(ws[a] - eps, ws[a])),
                _ => continue,
            };
            face = face.with_axis(a, Role::Tail(side), iv);
            axes.push(a + 1);
            sides.push(side);
        }
        for mut p in face.pieces {
            p.region = Region::ConeTailCollar { axes: axes.clone(), sides: sides.clone() };
            pieces.push(p);
        }
    }
    let bounds = ws.iter().map(|w| Interval::new(-*w, *w)).collect();
    Ok(CellModel { dims: n, labels: cube.face_data.clone(), bounds, pieces })
}

/// c^{positions} × m: every listed axis is a full cone tail over [−w, w].
pub fn cone_tail_product(m: &CellModel, positions: &[usize], w: Q, eps: Q) -> CellModel {
    let mut cur = m.clone();
    for &at in positions {
        let zones = [
            (Role::Tail(Side::Front), Interval::new(-w, -w + eps)),
            (Role::Zero, Interval::new(-w + eps, w - eps)),
            (Role::Tail(Side::Back), Interval::new(w - eps, w)),
        ];
        let mut pieces = Vec::new();
        for (role, iv) in zones {
            pieces.extend(insert_axis_all(&cur.pieces, at, role, iv));
        }
        cur = CellModel {
            dims: cur.dims + 1,
            labels: cur.labels.clone(),
            bounds: insert_at(&cur.bounds, at, Interval::new(-w, w)),
            pieces,
        };
    }
    cur
}

/// The portion collared by q_j = −w for every 0 ≠ j ∉ K.
pub fn face_front(m: &CellModel, k: &[usize]) -> Result<CellModel, BError> {
    let mut cur = m.clone();
    for j in (1..=m.dims).rev() {
        if !k.contains(&j) {
            cur = cur.front(j - 1)?;
        }
    }
    Ok(cur)
}

/// The portion collared by q_j = w for every 0 ≠ j ∈ K.
pub fn face_back(m: &CellModel, k: &[usize]) -> Result<CellModel, BError> {
    let mut cur = m.clone();
    for j in (1..=m.dims).rev() {
        if k.contains(&j) {
            cur = cur.back(j - 1)?;
        }
    }
    Ok(cur)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CanonKind {
    Brane { label: String, roles: Vec<Role> },
    Square { part: SquarePart, ax_i: usize, ax_v: usize, inner: Vec<CanonPiece> },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonPiece {
    pub bounds: Vec<(usize, usize)>,
    pub kind: CanonKind,
}

/// Normal form up to rectilinear reparametrization of each axis: collar
/// pieces are absorbed into the pieces they collar, then every axis is
/// relabelled by the rank of its breakpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canon {
    pub dims: usize,
    pub pieces: Vec<CanonPiece>,
}

pub fn canonical(m: &CellModel) -> Canon {
    Canon { dims: m.dims, pieces: canon_pieces(&m.pieces, m.dims, &m.labels) }
}

fn canon_pieces(ps: &[Piece], dims: usize, labels: &BTreeMap<Vec<usize>, String>) -> Vec<CanonPiece> {
    let ps = absorb(ps.to_vec(), dims, labels);
    let mut ranks: Vec<Vec<Q>> = vec![Vec::new(); dims];
    for p in &ps {
        for (a, b) in p.bounds.iter().enumerate() {
            ranks[a].push(b.lo);
            ranks[a].push(b.hi);
        }
    }
    for r in ranks.iter_mut() {
        r.sort();
        r.dedup();
    }
    let rank = |a: usize, x: Q| ranks[a].binary_search(&x).unwrap();
    let mut out: Vec<CanonPiece> = ps
        .iter()
        .map(|p| {
            let bounds = p.bounds.iter().enumerate().map(|(a, b)| (rank(a, b.lo), rank(a, b.hi))).collect();
            let kind = match &p.content {
                Content::Brane(l) => CanonKind::Brane {
                    label: labels.get(&l.face).cloned().unwrap_or_else(|| format!("{:?}", l.face)),
                    roles: l.roles.clone(),
                },
                Content::Square(s) => CanonKind::Square {
                    part: s.part,
                    ax_i: s.ax_i,
                    ax_v: s.ax_v,
                    inner: canon_pieces(&s.inner, dims - 1, labels),
                },
            };
            CanonPiece { bounds, kind }
        })
        .collect();
    out.sort();
    out
}

fn footprints_overlap(x: &Piece, y: &Piece, skip: usize) -> bool {
    x.bounds.iter().zip(&y.bounds).enumerate().all(|(k, (u, v))| k == skip || u.lo.max(v.lo) < u.hi.min(v.hi))
}

fn is_zero_along(p: &Piece, a: usize) -> bool {
    match &p.content {
        Content::Brane(l) => l.roles[a] == Role::Zero,
        Content::Square(s) => {
            a != s.ax_i && a != s.ax_v && s.inner.iter().all(|q| is_zero_along(q, inner_index(s.ax_i, a)))
        }
    }
}

fn face_model(ps: Vec<Piece>, dims: usize, labels: &BTreeMap<Vec<usize>, String>) -> Canon {
    Canon { dims, pieces: canon_pieces(&ps, dims, labels) }
}

fn distinct_volume(ps: &[Piece], ids: &[usize], skip: usize) -> Q {
    let mut seen: Vec<&Vec<Interval>> = Vec::new();
    let mut vol = qi(0);
    for &y in ids {
        if !seen.contains(&&ps[y].bounds) {
            seen.push(&ps[y].bounds);
            vol += ps[y].footprint_volume(skip);
        }
    }
    vol
}

fn faces_of(ps: &[Piece], ids: &[usize], a: usize, end: End) -> Option<Vec<Piece>> {
    let mut out = Vec::new();
    for &y in ids {
        out.extend(ps[y].restrict(a, end).ok()?);
    }
    Some(out)
}

fn end_value(p: &Piece, a: usize, end: End) -> Q {
    match end {
        End::Lo => p.bounds[a].lo,
        End::Hi => p.bounds[a].hi,
    }
}

fn opposite(end: End) -> End {
    match end {
        End::Lo => End::Hi,
        End::Hi => End::Lo,
    }
}

/// Starting from collar `x`, whose `end` side lies on a wall, collect the
/// smallest sets of collars and of pieces across the wall whose footprints
/// only meet each other.
fn collar_block(ps: &[Piece], x: usize, a: usize, end: End) -> (Vec<usize>, Vec<usize>) {
    let wall = end_value(&ps[x], a, end);
    let mut collars = vec![x];
    let mut across: Vec<usize> = Vec::new();
    loop {
        let mut grew = false;
        for y in 0..ps.len() {
            if !across.contains(&y)
                && end_value(&ps[y], a, opposite(end)) == wall
                && collars.iter().any(|&c| footprints_overlap(&ps[y], &ps[c], a))
            {
                across.push(y);
                grew = true;
            }
        }
        for y in 0..ps.len() {
            if !collars.contains(&y)
                && end_value(&ps[y], a, end) == wall
                && across.iter().any(|&c| footprints_overlap(&ps[y], &ps[c], a))
            {
                collars.push(y);
                grew = true;
            }
        }
        if !grew {
            return (collars, across);
        }
    }
}

/// Repeatedly fold product collars into the pieces they collar.
fn absorb(mut ps: Vec<Piece>, dims: usize, labels: &BTreeMap<Vec<usize>, String>) -> Vec<Piece> {
    if dims == 0 {
        return ps;
    }
    let same_face = |x: Vec<Piece>, y: Vec<Piece>| face_model(x, dims - 1, labels) == face_model(y, dims - 1, labels);
    'outer: loop {
        for a in 0..dims {
            for x in 0..ps.len() {
                if !is_zero_along(&ps[x], a) {
                    continue;
                }
                for end in [End::Lo, End::Hi] {
                    let (collars, across) = collar_block(&ps, x, a, end);
                    if across.is_empty() {
                        continue;
                    }
                    let ext = ps[x].bounds[a];
                    if !collars.iter().all(|&y| is_zero_along(&ps[y], a) && ps[y].bounds[a] == ext) {
                        continue;
                    }
                    if distinct_volume(&ps, &collars, a) != distinct_volume(&ps, &across, a) {
                        continue;
                    }
                    let (Some(own), Some(theirs)) =
                        (faces_of(&ps, &collars, a, End::Lo), faces_of(&ps, &across, a, opposite(end)))
                    else {
                        continue;
                    };
                    if !same_face(own, theirs) {
                        continue;
                    }
                    let to = end_value(&ps[x], a, opposite(end));
                    for &y in &across {
                        let from = ps[y].bounds[a];
                        let target = match end {
                            End::Hi => Interval::new(to, from.hi),
                            End::Lo => Interval::new(from.lo, to),
                        };
                        ps[y] = ps[y].rescaled(a, from, target);
                    }
                    let mut drop = collars;
                    drop.sort_unstable();
                    for y in drop.into_iter().rev() {
                        ps.remove(y);
                    }
                    continue 'outer;
                }
            }
        }
        return ps;
    }
}

/// Outcome of a family of structural comparisons.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FaceReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl FaceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn compare(&mut self, name: String, lhs: Result<CellModel, BError>, rhs: Result<CellModel, BError>) {
        self.checked += 1;
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                if canonical(&l) != canonical(&r) {
                    self.failures.push(name);
                }
            }
            (Err(e), _) | (_, Err(e)) => self.failures.push(format!("{}: {}", name, e)),
        }
    }

    pub fn merge(&mut self, other: FaceReport) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}

/// α_{N,i}: turn the lower back face so its vertical runs along axis `ax`,
/// starting at `w`.
fn alpha_turn(lower: &CellModel, ax: usize, w: Q) -> CellModel {
    let d = lower.dims;
    let vert = d - 1;
    let sigma: Vec<usize> = (0..d).map(|x| if x == vert { ax } else if x >= ax { x + 1 } else { x }).collect();
    let turned = lower.permuted(&sigma);
    let b = turned.bounds[ax];
    turned.rescaled(ax, Interval::new(b.lo + w, b.hi + w))
}

/// Lemma B1: the four face identities of B_i(Y) on a simplex.
pub fn check_lemma_b1(cube: &CollaredCube, i: usize) -> Result<FaceReport, BError> {
    let n = cube.n;
    if i == 0 || i >= n {
        return Err(BError::FaceIndex { i, n });
    }
    let y = simplex_model(cube);
    let bi = b_i(&y, i)?;
    let mut rep = FaceReport::default();
    for k in 1..n {
        let lhs = bi.front(k - 1);
        let rhs = if k == i {
            Ok(simplex_model(&cube.front_face(k)?))
        } else {
            let ii = if k < i { i - 1 } else { i };
            b_i(&simplex_model(&cube.front_face(k)?), ii)
        };
        rep.compare(format!("front k={} i={}", k, i), lhs, rhs);
        let lhs = bi.back(k - 1);
        let back = back_face_model(cube, k)?;
        let rhs = if k == i {
            back.slab(n - 2, qi(i as i128), qi(n as i128))
        } else {
            let ax = if k < i { i - 2 } else { i - 1 };
            b_step(&back, ax, qi(i as i128), &PhiParams::new(i))
        };
        rep.compare(format!("back k={} i={}", k, i), lhs, rhs);
    }
    let bottom = y.front(n - 1)?;
    let lower = back_face_model(cube, i)?.slab(n - 2, qi(0), qi(i as i128))?;
    let rhs = bottom.union(&alpha_turn(&lower, i - 1, y.bounds[i - 1].hi));
    rep.compare(format!("bottom i={}", i), bi.front(n - 1), Ok(rhs));
    rep.compare(format!("top i={}", i), bi.back(n - 1), y.back(n - 1));
    Ok(rep)
}

/// The corollary for one step B_i applied to a collared model z whose vertex
/// j sits at height j; the right-hand sides use faces of z from the oracle.
pub fn check_step_corollary(z: &CellModel, i: usize) -> Result<FaceReport, BError> {
    let n = z.dims;
    let h = qi(i as i128);
    let p = PhiParams::new(i);
    let bz = b_step(z, i - 1, h, &p)?;
    let mut rep = FaceReport::default();
    for k in 1..n {
        let dz = z.front(k - 1)?;
        let rhs = match i.cmp(&k) {
            std::cmp::Ordering::Greater => b_step(&dz, i - 2, h, &p),
            std::cmp::Ordering::Equal => Ok(dz),
            std::cmp::Ordering::Less => b_step(&dz, i - 1, h, &p),
        };
        rep.compare(format!("d_{}^front B_{}", k, i), bz.front(k - 1), rhs);
        let dz = z.back(k - 1)?;
        let rhs = if i == k {
            dz.slab(n - 2, h, z.bounds[n - 1].hi)
        } else {
            b_step(&dz, if k < i { i - 2 } else { i - 1 }, h, &p)
        };
        rep.compare(format!("d_{}^back B_{}", k, i), bz.back(k - 1), rhs);
    }
    let lower = z.back(i - 1)?.slab(n - 2, z.bounds[n - 1].lo, h)?;
    let rhs = z.front(n - 1)?.union(&alpha_turn(&lower, i - 1, z.bounds[i - 1].hi));
    rep.compare(format!("d_N B_{}", i), bz.front(n - 1), Ok(rhs));
    rep.compare(format!("d_N^back B_{}", i), bz.back(n - 1), z.back(n - 1));
    Ok(rep)
}

/// Every line of d_k B′(Y) ≅ … ≅ B′(d_k Y), each compared with the next.
pub fn replay_face_commutation(cube: &CollaredCube, k: usize) -> Result<FaceReport, BError> {
    let n = cube.n;
    if k == 0 || k >= n {
        return Err(BError::FaceIndex { i: k, n });
    }
    let y = simplex_model(cube);
    let steps = |m: &CellModel, from: usize, to: usize, shift: usize| -> Result<CellModel, BError> {
        // B_j for j in from..=to on a face whose axes above k moved down by `shift`
        let mut cur = m.clone();
        for j in from..=to {
            cur = b_step(&cur, j - 1 - shift, qi(j as i128), &PhiParams::new(j))?;
        }
        Ok(cur)
    };
    let upto = |j: usize| -> Result<CellModel, BError> {
        let mut cur = y.clone();
        for s in 1..=j {
            cur = b_i(&cur, s)?;
        }
        Ok(cur)
    };
    let line1 = upto(n - 1)?.front(k - 1)?;
    let line2 = steps(&upto(k)?.front(k - 1)?, k + 1, n - 1, 1)?;
    let line3 = steps(&upto(k - 1)?.front(k - 1)?, k + 1, n - 1, 1)?;
    let line4 = steps(&steps(&y.front(k - 1)?, 1, k - 1, 0)?, k + 1, n - 1, 1)?;
    let line5 = b_prime_raw(&cube.front_face(k)?)?;
    let mut rep = FaceReport::default();
    let lines = [line1, line2, line3, line4, line5];
    for (x, pair) in lines.windows(2).enumerate() {
        rep.compare(format!("d_{} B' line {} to {}", k, x + 1, x + 2), Ok(pair[0].clone()), Ok(pair[1].clone()));
    }
    Ok(rep)
}

/// Lemma B-faces for one K containing 0.
pub fn check_b_faces(cube: &CollaredCube, k: &[usize]) -> Result<FaceReport, BError> {
    let n = cube.n;
    let kk = IndexSubset::new(n, k)?;
    let mut rep = FaceReport::default();
    if !kk.contains(0) {
        return Ok(rep);
    }
    let b = b_full(cube)?;
    rep.compare(
        format!("front {:?}", kk.members()),
        face_front(&b, kk.members()),
        b_full(&cube.face_subcube(kk.members())?),
    );
    if kk.len() < n {
        let bar = closure_bar(&kk)?;
        let kp = k_prime(&kk)?;
        let free: Vec<usize> = (1..=n).filter(|j| !kk.contains(*j)).collect();
        let tails: Vec<usize> = free
            .iter()
            .enumerate()
            .filter(|(_, j)| bar.contains(**j))
            .map(|(pos, _)| pos)
            .collect();
        let rhs = b_full(&cube.face_subcube(kp.members())?)
            .map(|m| cone_tail_product(&m, &tails, qi(1), default_tail_width()));
        rep.compare(format!("back {:?}", kk.members()), face_back(&b, kk.members()), rhs);
    }
    Ok(rep)
}

/// Vertex P of B(Y) carries the object Y_{max P}.
pub fn check_vertex_labels(cube: &CollaredCube) -> Result<FaceReport, BError> {
    let b = b_full(cube)?;
    let mut rep = FaceReport::default();
    for p in subsets_with_zero(cube.n) {
        rep.checked += 1;
        let mut cur = b.clone();
        for a in (0..cube.n).rev() {
            cur = if p.contains(&(a + 1)) { cur.back(a)? } else { cur.front(a)? };
        }
        let expected = cube.object(*p.last().unwrap())?;
        let got: Vec<String> = cur
            .pieces
            .iter()
            .map(|pc| match &pc.content {
                Content::Brane(l) => cur.label_text(l),
                Content::Square(_) => "square".to_string(),
            })
            .collect();
        if got.len() != 1 || got[0] != expected {
            rep.failures.push(format!("vertex {:?}: expected {}, found {:?}", p, expected, got));
        }
    }
    Ok(rep)
}

/// Piece rectangles projected to two axes, as an SVG document.
pub fn svg_projection(m: &CellModel, x: usize, y: usize) -> String {
    let scale = 80.0;
    let f = |v: Q| *v.numer() as f64 / *v.denom() as f64;
    let (x0, x1) = (f(m.bounds[x].lo), f(m.bounds[x].hi));
    let (y0, y1) = (f(m.bounds[y].lo), f(m.bounds[y].hi));
    let width = (x1 - x0) * scale + 40.0;
    let height = (y1 - y0) * scale + 40.0;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">\n",
        width, height
    );
    for p in &m.pieces {
        let (a, b) = (p.bounds[x], p.bounds[y]);
        let px = 20.0 + (f(a.lo) - x0) * scale;
        let py = 20.0 + (y1 - f(b.hi)) * scale;
        let (w, h) = ((f(a.hi) - f(a.lo)) * scale, (f(b.hi) - f(b.lo)) * scale);
        let (fill, text) = match &p.content {
            Content::Brane(l) => ("#cfe3f5", m.label_text(l)),
            Content::Square(s) => match s.part {
                SquarePart::Small => ("#f7e3b5", "V small".to_string()),
                SquarePart::Tube => ("#f5c2c2", "tube".to_string()),
                SquarePart::Big => ("#d9f0d0", "V big".to_string()),
            },
        };
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\" fill-opacity=\"0.5\" stroke=\"black\"/>\n",
            px, py, w, h, fill
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\">{}</text>\n",
            px + 3.0,
            py + 12.0,
            text
        ));
    }
    out.push_str("</svg>\n");
    out
}
