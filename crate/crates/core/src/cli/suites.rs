//! Verification checks.  Each check is an independent closure; a suite is a
//! list of them, run on a worker pool and reported sorted by id.

use crate::a_infinity::*;
use crate::b_construction::*;
use crate::cube_model::{sample_cubes, subsets_with_zero, CollaredCube};
use crate::dg_nerve::*;
use crate::graded_zmod::{sign, AlgebraError, CoefficientMode, GradedMap};
use crate::planar_floer::*;
use crate::rational::Q;
use crate::xi_functor::*;
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Display;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Residual lines kept per check.
const MAX_RESIDUALS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Nerve,
    Ainf,
    BFaces,
    Goal,
    Planar,
    Stabilize,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Settings {
    pub mode: CoefficientMode,
    pub n_max: usize,
    pub d_max: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { mode: CoefficientMode::Integers, n_max: 4, d_max: 4, seed: 1 }
    }
}

/// Smallest failing simplex dimension and arity found by shrinking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Minimal {
    pub n: usize,
    pub d: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub checked: usize,
    pub residual: Vec<String>,
    pub minimal: Option<Minimal>,
}

impl Outcome {
    fn fail(&mut self, msg: impl Into<String>) {
        self.residual.push(msg.into());
    }

    pub(crate) fn report(&mut self, ctx: &str, r: &CheckReport) {
        self.checked += r.checked;
        for f in &r.failures {
            self.fail(format!("{}: {} residual {:?}", ctx, f.location, f.values));
        }
    }

    fn faces(&mut self, ctx: &str, r: &FaceReport) {
        self.checked += r.checked;
        for f in &r.failures {
            self.fail(format!("{}: {}", ctx, f));
        }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.fail(msg());
        }
    }

    /// Unwraps `r`, turning an error into a residual line.
    pub(crate) fn take<T, E: Display>(&mut self, ctx: &str, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(format!("{}: error: {}", ctx, e));
                None
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.residual.is_empty()
    }
}

type Runner = Box<dyn Fn() -> Outcome + Send + Sync>;

pub struct Check {
    pub id: String,
    pub anchor: &'static str,
    run: Runner,
}

impl Check {
    pub fn new(id: impl Into<String>, anchor: &'static str, run: impl Fn() -> Outcome + Send + Sync + 'static) -> Check {
        Check { id: id.into(), anchor, run: Box::new(run) }
    }

    pub fn run(&self) -> Outcome {
        (self.run)()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    pub checked: usize,
    pub residual: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal: Option<Minimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
    #[serde(skip)]
    pub elapsed: std::time::Duration,
}

/// Runs `checks` on a pool of worker threads; the result is sorted by id.
pub fn run_checks(checks: Vec<Check>, timings: bool) -> Vec<CheckRecord> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(checks.len().max(1));
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(checks.len()));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(c) = checks.get(i) else { break };
                let start = Instant::now();
                let mut out = c.run();
                let elapsed = start.elapsed();
                let extra = out.residual.len().saturating_sub(MAX_RESIDUALS);
                out.residual.truncate(MAX_RESIDUALS);
                if extra > 0 {
                    out.residual.push(format!("... {} more", extra));
                }
                let rec = CheckRecord {
                    id: c.id.clone(),
                    anchor: c.anchor.to_string(),
                    status: if out.passed() { Status::Pass } else { Status::Fail },
                    checked: out.checked,
                    residual: out.residual,
                    minimal: out.minimal,
                    wall_ms: timings.then_some(elapsed.as_millis() as u64),
                    elapsed,
                };
                done.lock().expect("no worker panics while holding the lock").push(rec);
            });
        }
    });
    let mut out = done.into_inner().expect("workers finished");
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

pub fn checks(suite: Suite, s: Settings) -> Vec<Check> {
    match suite {
        Suite::Nerve => nerve_checks(s),
        Suite::Ainf => ainf_checks(s),
        Suite::BFaces => b_face_checks(s, None),
        Suite::Goal => goal_checks(s),
        Suite::Planar => planar_checks(s),
        Suite::Stabilize => vec![Check::new("xi.stabilize", "stabilization/square", move || stabilize_check(s))],
        Suite::All => [Suite::Nerve, Suite::Ainf, Suite::BFaces, Suite::Goal, Suite::Planar, Suite::Stabilize]
            .into_iter()
            .flat_map(|x| checks(x, s))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// shared instance generators

pub fn random_dg(seed: u64, objects: usize, mode: CoefficientMode) -> DgCategory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cs: Vec<Complex> = (0..objects).map(|_| random_complex(&mut rng, 3)).collect();
    chain_complex_category(&cs, mode)
}

/// A random dg base over two objects and a random simplex on `objects`.
pub fn dg_case(seed: u64, objects: Vec<usize>, arity: usize) -> (AInfCategory, CobordismSimplex) {
    let dg = random_dg(seed, 2, CoefficientMode::Integers);
    let mut cat = dg.cat.clone();
    cat.max_arity = arity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    let s = CobordismSimplex::from_nerve(&random_simplex(&mut rng, &dg, objects));
    (cat, s)
}

pub fn basis(cat: &AInfCategory, a: usize, b: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; cat.hom(a, b).rank()];
    v[i] = 1;
    v
}

/// Four staircases with their cone tail: the standard one and two drawn from `seed`.
pub fn planar_bases(seed: u64) -> Result<Vec<(StaircaseConfig, AInfCategory)>, PlanarError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = vec![StaircaseParams::standard(4)];
    params.push(StaircaseParams::random(&mut rng, 4));
    params.push(StaircaseParams::random(&mut rng, 4));
    params
        .into_iter()
        .map(|p| {
            let cfg = StaircaseConfig::new(p)?;
            let mut cat = mu_d_counts(&cfg.curves, cfg.curves.len() - 1)?.category;
            cat.max_arity = 4;
            Ok((cfg, cat))
        })
        .collect()
}

/// Staircases with `d` curves: the standard one and four drawn from `seed`.
pub fn staircase_grid(seed: u64, d: usize) -> Result<Vec<StaircaseConfig>, PlanarError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (d as u64).wrapping_mul(0x9e37_79b9));
    let mut out = vec![StaircaseConfig::new(StaircaseParams::standard(d))?];
    for _ in 0..4 {
        out.push(StaircaseConfig::new(StaircaseParams::random(&mut rng, d))?);
    }
    Ok(out)
}

fn two_simplex_on(cat: &AInfCategory, objects: [usize; 3]) -> CobordismSimplex {
    CobordismSimplex::triangle(cat, objects, basis(cat, objects[0], objects[1], 0), basis(cat, objects[1], objects[2], 0))
}

// ---------------------------------------------------------------------------
// nerve

fn nerve_checks(s: Settings) -> Vec<Check> {
    let mut out: Vec<Check> = (1..=s.n_max)
        .map(|n| Check::new(format!("nerve.simplicial.N{}", n), "dg-nerve/simplicial-identities", move || nerve_simplicial(s, n)))
        .collect();
    out.push(Check::new("nerve.expansion.N2", "dg-nerve/two-simplex", move || nerve_expansion(s)));
    out
}

fn nerve_simplicial(s: Settings, n: usize) -> Outcome {
    let mut out = Outcome::default();
    let dg = random_dg(s.seed, 3, s.mode);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ ((n as u64) << 8));
    for trial in 0..3 {
        let objects: Vec<usize> = (0..=n).map(|_| rng.gen_range(0..3)).collect();
        let x = random_simplex(&mut rng, &dg, objects);
        let ctx = format!("N={} trial {}", n, trial);
        if let Some(r) = out.take(&ctx, validate(&dg, &x)) {
            out.report(&ctx, &r);
        }
        let face = |i: usize, y: &NerveSimplex<Element>| face(&dg, i, y);
        let degen = |j: usize, y: &NerveSimplex<Element>| degeneracy(&dg, j, y);
        for j in 0..=n {
            let Some(sj) = out.take(&ctx, degen(j, &x)) else { continue };
            if let Some(r) = out.take(&ctx, validate(&dg, &sj)) {
                out.report(&format!("{} s_{}", ctx, j), &r);
            }
            for i in 0..=n + 1 {
                let Some(lhs) = out.take(&ctx, face(i, &sj)) else { continue };
                // d_i s_j: s_{j-1} d_i (i < j), id (i = j, j+1), s_j d_{i-1} (i > j+1)
                let rhs = if i == j || i == j + 1 {
                    Ok(x.clone())
                } else if n == 0 {
                    continue;
                } else if i < j {
                    face(i, &x).and_then(|y| degen(j - 1, &y))
                } else {
                    face(i - 1, &x).and_then(|y| degen(j, &y))
                };
                if let Some(rhs) = out.take(&ctx, rhs) {
                    out.expect(lhs == rhs, || format!("{}: d_{} s_{} differs", ctx, i, j));
                }
            }
        }
        if n >= 2 {
            for j in 1..=n {
                for i in 0..j {
                    let lhs = face(j, &x).and_then(|y| face(i, &y));
                    let rhs = face(i, &x).and_then(|y| face(j - 1, &y));
                    if let (Some(l), Some(r)) = (out.take(&ctx, lhs), out.take(&ctx, rhs)) {
                        out.expect(l == r, || format!("{}: d_{} d_{} != d_{} d_{}", ctx, i, j, j - 1, i));
                    }
                }
                if let Some(y) = out.take(&ctx, face(j, &x)) {
                    if let Some(r) = out.take(&ctx, validate(&dg, &y)) {
                        out.report(&format!("{} d_{}", ctx, j), &r);
                    }
                }
            }
        }
    }
    if !out.passed() {
        out.minimal = Some(Minimal { n, d: 2 });
    }
    out
}

fn nerve_expansion(s: Settings) -> Outcome {
    let mut out = Outcome::default();
    let dg = random_dg(s.seed ^ 0x4e, 3, s.mode);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x4e);
    for objects in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 1, 0]] {
        let x = random_simplex(&mut rng, &dg, objects.clone());
        let f = |k: &[usize]| x.f[k].clone();
        let o = &x.objects;
        let lhs = dg.d(&f(&[0, 1, 2]), o[0], o[2], -1);
        let comp = dg.comp(&f(&[1, 2]), &f(&[0, 1]), [o[0], o[1], o[2]], 0, 0);
        let rhs = dg.axpy(&comp, -1, &f(&[0, 2]));
        out.expect(lhs == rhs, || format!("objects {:?}: d f_012 != -f_02 + f_12 f_01", objects));
    }
    out
}

// ---------------------------------------------------------------------------
// A-infinity signs

fn ainf_checks(s: Settings) -> Vec<Check> {
    vec![
        Check::new("ainf.relations", "ainf/structure-equations", move || ainf_relations(s)),
        Check::new("ainf.modules", "ainf/yoneda-modules", move || ainf_modules(s)),
        Check::new("ainf.mu1-squared", "ainf/mu1-squared", move || sign_identity(s, SignIdentity::Mu1Squared)),
        Check::new("ainf.leibniz", "ainf/leibniz", move || sign_identity(s, SignIdentity::Leibniz)),
        Check::new("ainf.unit", "ainf/unit", move || sign_identity(s, SignIdentity::Unit)),
    ]
}

fn ainf_relations(s: Settings) -> Outcome {
    let mut out = Outcome::default();
    for t in 0..3 {
        let mut cat = random_dg(s.seed.wrapping_add(t), 2, s.mode).cat;
        cat.max_arity = s.d_max;
        let ctx = format!("dg seed +{}", t);
        if let Some(r) = out.take(&ctx, check_ainf_relations(&cat, s.d_max)) {
            out.report(&ctx, &r);
        }
    }
    if let Ok(cfg) = StaircaseConfig::new(StaircaseParams::standard(3)) {
        if let Some(pc) = out.take("staircase d=3", mu_d_counts(&cfg.curves, s.d_max)) {
            if let Some(r) = out.take("staircase d=3", check_ainf_relations(&pc.category, s.d_max)) {
                out.report("staircase d=3", &r);
            }
        }
    }
    out
}

fn ainf_modules(s: Settings) -> Outcome {
    let mut out = Outcome::default();
    let mut cat = random_dg(s.seed ^ 0xa1, 3, s.mode).cat;
    cat.max_arity = s.d_max.min(3);
    for y in 0..3 {
        let m = yoneda_module(&cat, y);
        let ctx = format!("Yoneda module of object {}", y);
        if let Some(r) = out.take(&ctx, check_module_relations(&cat, &m, cat.max_arity)) {
            out.report(&ctx, &r);
        }
    }
    out
}

#[derive(Clone, Copy)]
enum SignIdentity {
    Mu1Squared,
    Leibniz,
    Unit,
}

/// Over Z a failure is re-run mod 2; passing there marks it as a sign bug.
fn sign_identity(s: Settings, which: SignIdentity) -> Outcome {
    let run = |mode| sign_identity_in(s, which, mode);
    if s.mode == CoefficientMode::ModTwo {
        return run(CoefficientMode::ModTwo);
    }
    let mut out = run(CoefficientMode::Integers);
    if !out.passed() && run(CoefficientMode::ModTwo).passed() {
        for r in out.residual.iter_mut() {
            *r = format!("sign bug (holds mod 2): {}", r);
        }
    }
    out
}

fn sign_identity_in(s: Settings, which: SignIdentity, mode: CoefficientMode) -> Outcome {
    let mut out = Outcome::default();
    let arity = s.d_max.min(3);
    let mut cat = random_dg(s.seed ^ 0x21, 2, mode).cat;
    cat.max_arity = arity;
    let ms: Vec<AInfModule> = (0..2).map(|y| yoneda_module(&cat, y)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x7);
    for deg in -1..=1 {
        let t = random_premodule(&mut rng, &cat, &ms[0], &ms[1], deg, arity).reduced(mode);
        let t2 = random_premodule(&mut rng, &cat, &ms[1], &ms[0], 1 - deg, arity).reduced(mode);
        let ctx = format!("{:?} |t|={}", mode, deg);
        let zero = |m: Result<PreModuleMap, AlgebraError>| m.map(|m| m.reduced(mode).is_zero());
        let ok = match which {
            SignIdentity::Mu1Squared => {
                let mt = mu1(&cat, &ms[0], &ms[1], &t, arity);
                Ok(mu1(&cat, &ms[0], &ms[1], &mt, arity).reduced(mode).is_zero())
            }
            SignIdentity::Leibniz => {
                // mu1 mu2(t2,t) + mu2(t2, mu1 t) + (-1)^{|t|-1} mu2(mu1 t2, t) = 0
                let a = mu1(&cat, &ms[0], &ms[0], &mu2(&cat, &ms[0], &ms[1], &ms[0], &t2, &t, arity), arity);
                let b = mu2(&cat, &ms[0], &ms[1], &ms[0], &t2, &mu1(&cat, &ms[0], &ms[1], &t, arity), arity);
                let c = mu2(&cat, &ms[0], &ms[1], &ms[0], &mu1(&cat, &ms[1], &ms[0], &t2, arity), &t, arity);
                zero(a.add_scaled(&b, 1).and_then(|ab| ab.add_scaled(&c, sign(deg as i64 - 1))))
            }
            SignIdentity::Unit => {
                let (u0, u1) = (unit(&ms[0]), unit(&ms[1]));
                let closed = mu1(&cat, &ms[0], &ms[0], &u0, arity).reduced(mode).is_zero();
                let right = zero(mu2(&cat, &ms[0], &ms[0], &ms[1], &t, &u0, arity).add_scaled(&t, -1));
                let left = zero(mu2(&cat, &ms[0], &ms[1], &ms[1], &u1, &t, arity).add_scaled(&t, -sign(deg as i64)));
                right.and_then(|r| left.map(|l| closed && r && l))
            }
        };
        if let Some(ok) = out.take(&ctx, ok) {
            out.expect(ok, || format!("{}: identity has a nonzero residual", ctx));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// cell-model faces

/// Face checks on `cube`, or on every sample cube with N <= n_max.
pub fn b_face_checks(s: Settings, cube: Option<CollaredCube>) -> Vec<Check> {
    let groups: Vec<(String, Vec<CollaredCube>)> = match cube {
        Some(c) => vec![("input".to_string(), vec![c])],
        None => (1..=s.n_max)
            .map(|n| (format!("N{}", n), sample_cubes(s.n_max).into_iter().filter(|c| c.n == n).collect()))
            .collect(),
    };
    let mut out = Vec::new();
    for (tag, cubes) in groups {
        let c1 = cubes.clone();
        out.push(Check::new(format!("b.surgery.{}", tag), "b-construction/surgery-steps", move || b_surgery(&c1)));
        let c2 = cubes.clone();
        out.push(Check::new(format!("b.faces.{}", tag), "b-construction/faces", move || b_faces(&c2)));
        out.push(Check::new(format!("b.commutation.{}", tag), "b-construction/face-commutation", move || b_commutation(&cubes)));
    }
    out
}

fn b_surgery(cubes: &[CollaredCube]) -> Outcome {
    let mut out = Outcome::default();
    for c in cubes {
        for i in 1..c.n {
            let ctx = format!("N={} i={}", c.n, i);
            if let Some(r) = out.take(&ctx, check_lemma_b1(c, i)) {
                out.faces(&ctx, &r);
            }
        }
        let mut z = simplex_model(c);
        for i in 1..c.n {
            let ctx = format!("N={} step {}", c.n, i);
            if let Some(r) = out.take(&ctx, check_step_corollary(&z, i)) {
                out.faces(&ctx, &r);
            }
            match out.take(&ctx, b_i(&z, i)) {
                Some(next) => z = next,
                None => break,
            }
        }
        let ctx = format!("N={} tiling", c.n);
        out.take(&ctx, z.check_tiling());
        out.take(&ctx, z.check_adjacency());
        out.checked += 2;
    }
    out
}

fn b_faces(cubes: &[CollaredCube]) -> Outcome {
    let mut out = Outcome::default();
    for c in cubes {
        let ctx = format!("N={}", c.n);
        if let Some(r) = out.take(&ctx, check_vertex_labels(c)) {
            out.faces(&ctx, &r);
        }
        for k in subsets_with_zero(c.n) {
            let ctx = format!("N={} K={:?}", c.n, k);
            if let Some(r) = out.take(&ctx, check_b_faces(c, &k)) {
                out.faces(&ctx, &r);
            }
        }
    }
    out
}

fn b_commutation(cubes: &[CollaredCube]) -> Outcome {
    let mut out = Outcome::default();
    for c in cubes {
        for k in 1..c.n {
            let ctx = format!("N={} k={}", c.n, k);
            if let Some(r) = out.take(&ctx, replay_face_commutation(c, k)) {
                out.faces(&ctx, &r);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// planar counts and posets

fn planar_checks(s: Settings) -> Vec<Check> {
    let mut out = Vec::new();
    for d in 1..=s.d_max {
        out.push(Check::new(format!("planar.type12.d{}", d), "planar/fiber-counts", move || planar_type12(s, d)));
        out.push(Check::new(format!("planar.type3.d{}", d), "planar/identity-strip", move || planar_type3(s, d)));
        out.push(Check::new(format!("planar.relations.d{}", d), "planar/structure-equations", move || planar_relations(s, d)));
    }
    out.push(Check::new("poset.d2k2", "moduli-poset/two-inputs", poset_two_inputs));
    out.push(Check::new("poset.d1", "moduli-poset/strips", poset_strips));
    out
}

fn planar_type12(s: Settings, d: usize) -> Outcome {
    let mut out = Outcome::default();
    let Some(grid) = out.take("grid", staircase_grid(s.seed, d)) else { return out };
    for (g, cfg) in grid.iter().enumerate() {
        for (left, kind, variant) in [(false, CornerType::Type1, RegionVariant::R), (true, CornerType::Type2, RegionVariant::RPrime)] {
            let ctx = format!("d={} config {} {:?}", d, g, kind);
            let Some(data) = out.take(&ctx, staircase_corner_data(cfg, left, left)) else { continue };
            let found = classify_corner_data(&data.corners, cfg.params.w);
            out.expect(found == kind, || format!("{}: classified as {:?}", ctx, found));
            let Some(polys) = out.take(&ctx, enumerate_polygons(&cfg.curves, &data)) else { continue };
            out.expect(polys.len() == 1, || format!("{}: {} polygons, expected 1", ctx, polys.len()));
            let Some(p) = polys.first() else { continue };
            if d == 1 {
                out.expect(p.constant, || format!("{}: expected the constant disk", ctx));
                continue;
            }
            out.expect(p.orientation == Orientation::Clockwise, || format!("{}: counter-clockwise disk", ctx));
            out.expect(p.reflex.len() == d - 2, || format!("{}: {} reflex corners, expected {}", ctx, p.reflex.len(), d - 2));
            let region = regions(cfg, variant);
            if let Some(conf) = out.take(&ctx, confinement(cfg, &data)) {
                out.expect(conf.same_set(&region), || format!("{}: confinement differs from {:?}", ctx, variant));
                out.expect(conf.contains_polygon(p), || format!("{}: polygon leaves the confinement region", ctx));
            }
            out.expect(p.area == region.area(), || format!("{}: area {} vs region {}", ctx, p.area, region.area()));
        }
    }
    out
}

fn planar_type3(s: Settings, d: usize) -> Outcome {
    let mut out = Outcome::default();
    let Some(grid) = out.take("grid", staircase_grid(s.seed, d)) else { return out };
    for (g, cfg) in grid.iter().enumerate() {
        let ctx = format!("d={} config {}", d, g);
        let Some(data) = out.take(&ctx, staircase_corner_data(cfg, true, false)) else { continue };
        let kind = classify_corner_data(&data.corners, cfg.params.w);
        out.expect(kind == CornerType::Type3, || format!("{}: classified as {:?}", ctx, kind));
        let Some(polys) = out.take(&ctx, enumerate_polygons(&cfg.curves, &data)) else { continue };
        let Some(conf) = out.take(&ctx, confinement(cfg, &data)) else { continue };
        let outer = regions(cfg, RegionVariant::RDoublePrime);
        if d == 1 {
            out.expect(polys.len() == 1 && polys[0].is_rigid(), || format!("{}: {} polygons, expected one rigid strip", ctx, polys.len()));
            out.expect(conf.same_set(&outer), || format!("{}: confinement differs from the outer region", ctx));
            for p in &polys {
                out.expect(conf.contains_polygon(p), || format!("{}: strip leaves the confinement region", ctx));
            }
            // rows: crossings left of w, columns: crossings right of w
            let Some(xs) = out.take(&ctx, intersections(&cfg.curves)) else { continue };
            let side = |left: bool| -> Vec<Pt> { xs.iter().filter(|x| (x.location.q < cfg.params.w) == left).map(|x| x.location).collect() };
            let mut matrix = Vec::new();
            for &a in &side(true) {
                let mut row = Vec::new();
                for &b in &side(false) {
                    let data = CornerData { boundary: vec![0, 1], corners: vec![a, b] };
                    let n = out.take(&ctx, enumerate_polygons(&cfg.curves, &data)).map_or(0, |ps| ps.iter().filter(|p| p.is_rigid() && !p.constant).count());
                    row.push(n);
                }
                matrix.push(row);
            }
            out.expect(matrix == vec![vec![1]], || format!("{}: strip matrix {:?}, expected the identity", ctx, matrix));
        } else {
            out.expect(polys.is_empty(), || format!("{}: {} polygons, expected none", ctx, polys.len()));
            out.expect(outer.contains_region(&conf), || format!("{}: confinement leaves the outer region", ctx));
        }
    }
    out
}

fn planar_relations(s: Settings, d: usize) -> Outcome {
    let mut out = Outcome::default();
    let Some(grid) = out.take("grid", staircase_grid(s.seed, d)) else { return out };
    for (g, cfg) in grid.iter().enumerate() {
        let ctx = format!("d={} config {}", d, g);
        let Some(pc) = out.take(&ctx, mu_d_counts(&cfg.curves, d + 1)) else { continue };
        if let Some(r) = out.take(&ctx, check_ainf_relations(&pc.category, d + 1)) {
            out.report(&ctx, &r);
        }
        for (key, p) in &pc.polygons {
            out.expect(p.is_rigid() && p.orientation == Orientation::Clockwise, || format!("{}: polygon {:?} is not a rigid clockwise disk", ctx, key));
        }
    }
    out
}

fn poset_two_inputs() -> Outcome {
    let mut out = Outcome::default();
    let p = broken_disk_poset(2, 2);
    out.expect(p.names() == ["(**)", "(*(*))", "((*)*)", "((**))"], || format!("elements {:?}", p.names()));
    let expected: BTreeSet<BTreeSet<usize>> = [vec![], vec![0, 1, 2, 3], vec![1], vec![2], vec![3]].into_iter().map(|v| v.into_iter().collect()).collect();
    let gens: BTreeSet<BTreeSet<usize>> = p.closed_generators.iter().cloned().chain([BTreeSet::new(), p.all()]).collect();
    out.expect(gens == expected, || format!("closed generators {:?}", gens));
    out.expect(p.is_open(&BTreeSet::from([0])), || "{(**)} is not open".into());
    out.expect(!p.closed_sets().contains(&BTreeSet::from([0])), || "{(**)} is closed".into());
    out.expect(broken_disk_poset(2, 1).elements.len() == 1, || "one input gives more than one element".into());
    out
}

fn poset_strips() -> Outcome {
    let mut out = Outcome::default();
    for k in 1..=5 {
        let p = broken_disk_poset(1, k);
        out.expect(p.elements.len() == k, || format!("k={}: {} elements", k, p.elements.len()));
        for (i, t) in p.elements.iter().enumerate() {
            out.expect(t.components() == i + 1, || format!("k={}: element {} has {} components", k, i, t.components()));
        }
        let opens: BTreeSet<BTreeSet<usize>> = p.closed_sets().iter().map(|c| p.all().difference(c).copied().collect()).collect();
        let segments: BTreeSet<BTreeSet<usize>> = (0..=k).map(|n| (0..n).collect()).collect();
        out.expect(opens == segments, || format!("k={}: open sets {:?}", k, opens));
    }
    out
}

// ---------------------------------------------------------------------------
// Xi

fn goal_checks(s: Settings) -> Vec<Check> {
    let n3 = s.n_max.min(3);
    let mut out = Vec::new();
    for n in 1..=n3 {
        out.push(Check::new(format!("xi.decompose.N{}", n), "xi/decomposition", move || xi_decompose(n)));
        out.push(Check::new(format!("xi.goal.dg.N{}", n), "xi/goal-equation", move || xi_goal_dg(s, n)));
        if n <= 2 {
            out.push(Check::new(format!("xi.goal.planar.N{}", n), "xi/goal-equation", move || xi_goal_planar(s, n)));
        }
    }
    if s.n_max >= 2 {
        out.push(Check::new("xi.square.N2", "xi/decomposition", xi_square));
        out.push(Check::new("xi.replay.N2", "xi/reduction-replay", move || xi_replay(s)));
        out.push(Check::new("xi.table", "xi/reduction-table", move || xi_table(s)));
    }
    out.push(Check::new("xi.s0", "xi/degenerate-edges", move || xi_s0(s)));
    out
}

fn xi_decompose(n: usize) -> Outcome {
    let mut out = Outcome::default();
    let (cat, _) = dg_case(1, vec![0, 1], 2);
    let objects: Vec<usize> = (0..=n).map(|i| i % 2).collect();
    for x in 0..2 {
        let ctx = format!("N={} X={}", n, x);
        let dec = ProductDecomposition::new(&cat, x, &objects);
        out.expect(dec.summands.len() == 1 << n, || format!("{}: {} summands", ctx, dec.summands.len()));
        out.expect(dec.summands.iter().all(|m| m.k[0] == 0), || format!("{}: a summand misses 0", ctx));
        let total: usize = dec.summands.iter().map(|m| m.base.rank()).sum();
        out.expect(dec.module.rank() == total, || format!("{}: rank {} vs {}", ctx, dec.module.rank(), total));
        for m in &dec.summands {
            out.expect(m.shift() == m.k.len() as i32 - 1, || format!("{}: K={:?} shift {}", ctx, m.k, m.shift()));
            let degs: Vec<i32> = m.base.degrees().iter().map(|d| d + m.shift()).collect();
            out.expect(dec.module.degrees()[m.offset..m.offset + m.base.rank()] == degs[..], || format!("{}: K={:?} degrees", ctx, m.k));
            out.expect(dec.iota(&m.k).degree == m.shift() && dec.pi(&m.k).degree == -m.shift(), || format!("{}: K={:?} iota/pi degrees", ctx, m.k));
        }
        if let Some(defect) = out.take(&ctx, dec.id_cube_defect()) {
            out.expect(defect.is_empty(), || format!("{}: sum of iota pi differs from the identity at {:?}", ctx, defect.first()));
        }
        out.take(&ctx, decompose(&cat, x, &CollaredCube::simplex(n), &objects, Q::from_integer(2)));
    }
    out
}

fn xi_square() -> Outcome {
    let mut out = Outcome::default();
    let (cat, _) = dg_case(1, vec![0, 1], 2);
    let dec = ProductDecomposition::new(&cat, 0, &[0, 1, 1]);
    let ks: Vec<Vec<usize>> = dec.summands.iter().map(|m| m.k.clone()).collect();
    out.expect(ks == vec![vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 2]], || format!("summands {:?}", ks));
    let shifts: Vec<i32> = dec.summands.iter().map(|m| m.shift()).collect();
    out.expect(shifts == vec![0, 1, 2, 1], || format!("shifts {:?}", shifts));
    out
}

/// Goal-equation residual of `s` at `arity`, shrunk to the smallest failing arity.
pub(crate) fn goal_at(out: &mut Outcome, ctx: &str, cat: &AInfCategory, s: &CobordismSimplex, arity: usize) {
    if let Some(r) = out.take(ctx, check_product_relations(cat, s, arity)) {
        out.report(&format!("{} module relations", ctx), &r);
    }
    let c = build_xi_simplex(cat, s, arity);
    let Some(r) = out.take(ctx, check_goal_equation(&c, cat, arity)) else { return };
    out.report(ctx, &r);
    if !r.passed() && out.minimal.is_none() {
        let d = (1..arity)
            .find(|&d| check_goal_equation(&build_xi_simplex(cat, s, d), cat, d).is_ok_and(|r| !r.passed()))
            .unwrap_or(arity);
        out.minimal = Some(Minimal { n: s.n, d });
    }
}

fn xi_goal_dg(s: Settings, n: usize) -> Outcome {
    let mut out = Outcome::default();
    let arity = if n <= 2 { s.d_max } else { s.d_max.min(3) };
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x60a1 ^ n as u64);
    for trial in 0..3 {
        let objects: Vec<usize> = (0..=n).map(|_| rng.gen_range(0..2)).collect();
        let seed = rng.gen_range(0..1 << 16);
        let (cat, x) = dg_case(seed, objects.clone(), arity);
        if s.mode == CoefficientMode::Integers {
            goal_at(&mut out, &format!("N={} Z trial {} objects {:?}", n, trial, objects), &cat, &x, arity);
        }
        let two = cat.reduced(CoefficientMode::ModTwo);
        goal_at(&mut out, &format!("N={} Z/2 trial {} objects {:?}", n, trial, objects), &two, &x, arity);
    }
    out
}

fn xi_goal_planar(s: Settings, n: usize) -> Outcome {
    let mut out = Outcome::default();
    let Some(bases) = out.take("planar bases", planar_bases(s.seed)) else { return out };
    let arity = s.d_max.min(4);
    for (g, (_, cat)) in bases.iter().enumerate() {
        let x = if n == 1 { CobordismSimplex::edge(1, 2, basis(cat, 1, 2, 0)) } else { two_simplex_on(cat, [1, 2, 3]) };
        let ctx = format!("N={} planar base {}", n, g);
        if out.take(&ctx, x.validate(cat)).is_some() {
            goal_at(&mut out, &ctx, cat, &x, arity);
        }
    }
    out
}

fn xi_replay(s: Settings) -> Outcome {
    let mut out = Outcome::default();
    let arity = s.d_max.min(3);
    let mut cases = Vec::new();
    for (seed, objs) in [(2u64, vec![0, 1, 0]), (5, vec![1, 1, 0]), (9, vec![0, 0, 1])] {
        let (cat, x) = dg_case(seed ^ s.seed, objs, arity);
        cases.push((format!("dg seed {}", seed ^ s.seed), cat, x));
    }
    if let Some(bases) = out.take("planar bases", planar_bases(s.seed)) {
        for (g, (_, cat)) in bases.into_iter().enumerate() {
            let x = two_simplex_on(&cat, [1, 2, 3]);
            cases.push((format!("planar base {}", g), cat, x));
        }
    }
    for (ctx, cat, x) in cases {
        let Some(r) = out.take(&ctx, replay_corollaries(&cat, &x, arity)) else { continue };
        for c in &r.corollaries {
            out.checked += c.terms;
            for m in &c.mismatches {
                out.fail(format!("{} group {}: {} residual {:?}", ctx, c.corollary, m.location, m.values));
            }
        }
        out.report(&format!("{} total", ctx), &r.total);
        out.report(&format!("{} goal", ctx), &r.goal);
    }
    out
}

fn xi_table(s: Settings) -> Outcome {
    let mut out = Outcome::default();
    let arity = s.d_max.min(3);
    for (seed, objs) in [(2u64, vec![0, 1, 0]), (3, vec![1, 0, 1, 0])] {
        if objs.len() > s.n_max + 1 {
            continue;
        }
        let (cat, x) = dg_case(seed ^ s.seed, objs, arity);
        out.report(&format!("dg seed {}", seed ^ s.seed), &check_reduction_table(&cat, &x, arity));
    }
    if let Some(bases) = out.take("planar bases", planar_bases(s.seed)) {
        for (g, (_, cat)) in bases.iter().enumerate() {
            out.report(&format!("planar base {}", g), &check_reduction_table(cat, &two_simplex_on(cat, [1, 2, 3]), arity));
        }
    }
    out
}

fn xi_s0(s: Settings) -> Outcome {
    let mut out = Outcome::default();
    let arity = s.d_max.min(3);
    let (cat, _) = dg_case(s.seed ^ 4, vec![0, 1], arity);
    let planar = StaircaseConfig::new(StaircaseParams::standard(3)).map_err(|e| e.to_string()).and_then(|cfg| {
        let mut c = mu_d_counts(&cfg.curves, cfg.curves.len() - 1).map_err(|e| e.to_string())?.category;
        c.max_arity = arity;
        Ok(c)
    });
    let mut bases = vec![("dg", cat)];
    if let Some(p) = out.take("planar base", planar) {
        bases.push(("planar", p));
    }
    for (name, c) in &bases {
        for y in 0..c.objects.len() {
            let ctx = format!("{} object {}", name, c.objects[y]);
            if let Some(r) = out.take(&ctx, s0_object_check(c, y, arity, None)) {
                out.report(&ctx, &r);
            }
            if let Some(r) = out.take(&ctx, degenerate_simplex_check(c, y, 2, arity)) {
                out.report(&format!("{} N=2", ctx), &r);
            }
        }
    }
    out
}

fn stabilize_check(s: Settings) -> Outcome {
    let mut out = Outcome::default();
    let Some(bases) = out.take("planar bases", planar_bases(s.seed)) else { return out };
    let Some(beta) = out.take("beta staircase", StaircaseConfig::new(StaircaseParams::standard(2))) else { return out };
    let arity = s.d_max.min(3);
    for (g, (_, cat)) in bases.iter().enumerate() {
        let ctx = format!("planar base {}", g);
        // L0, L1 are test objects; L2, L3 and the cone tail are cobordism ends
        let Some(st) = out.take(&ctx, Stabilizer::new(&beta, vec![0, 1, 2, 2, 2], Q::from_integer(10))) else { continue };
        let simplices = [CobordismSimplex::edge(2, 3, basis(cat, 2, 3, 0)), two_simplex_on(cat, [2, 3, 4])];
        if let Some(r) = out.take(&ctx, st.verify(cat, &simplices, arity)) {
            out.checked += r.homs_checked + r.mu_checked + r.xi_checked;
            for f in r.failures {
                out.fail(format!("{}: {}", ctx, f));
            }
        }
        // stabilizing twice changes nothing further
        if let Some(once) = out.take(&ctx, st.stabilize(cat)) {
            if let Some(twice) = out.take(&ctx, st.stabilize(&once)) {
                let mut keys: Vec<&Vec<usize>> = once.mu_keys().collect();
                keys.sort();
                for key in keys {
                    // generator names gain a tag per pass; compare degrees and entries
                    let shape = |m: &GradedMap| {
                        let m = m.reduced(CoefficientMode::ModTwo);
                        let entries: Vec<Vec<i64>> = (0..m.cols()).map(|c| m.column(c)).collect();
                        (m.source.degrees().to_vec(), m.target.degrees().to_vec(), entries)
                    };
                    let same = once.mu(key).map(shape) == twice.mu(key).map(shape);
                    out.expect(same, || format!("{}: mu at {:?} changes on a second stabilization", ctx, key));
                }
            }
        }
    }
    out
}
