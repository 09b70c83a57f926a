//! The `lagnerve` command: verification suites, planar counts and Xi simplex building.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad input.

pub mod files;
pub mod suites;

use crate::a_infinity::check_ainf_relations;
use crate::graded_zmod::CoefficientMode;
use crate::planar_floer::{classify_corner_data, enumerate_polygons, mu_d_counts, regions, staircase_corner_data, svg, RegionVariant};
use crate::xi_functor::{build_xi_simplex, check_reduction_table};
use clap::{Args, Parser, Subcommand, ValueEnum};
use files::{load_json, BaseFile, CubeFile, InputError, PlanarFile, PlanarInput, XiSimplexFile, SCHEMA};
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use suites::{run_checks, CheckRecord, Check, Outcome, Settings, Status, Suite};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Z,
    Z2,
}

impl From<Mode> for CoefficientMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Z => CoefficientMode::Integers,
            Mode::Z2 => CoefficientMode::ModTwo,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lagnerve", version, about = "Exact checks for cobordism simplices and their module-level images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Coefficients: integers or integers mod 2.
    #[arg(long, value_enum, default_value = "z", env = "LAGNERVE_MODE", global = true)]
    pub mode: Mode,
    /// Largest simplex or cube dimension.
    #[arg(long = "n-max", visible_alias = "N", default_value_t = 4, env = "LAGNERVE_N_MAX", global = true)]
    pub n_max: usize,
    /// Largest A-infinity arity.
    #[arg(long = "d-max", default_value_t = 4, env = "LAGNERVE_D_MAX", global = true)]
    pub d_max: usize,
    /// Seed for randomized instances.
    #[arg(long, default_value_t = 1, env = "LAGNERVE_SEED", global = true)]
    pub seed: u64,
    /// Output directory; the main JSON goes to stdout when absent.
    #[arg(long, env = "LAGNERVE_OUT", global = true)]
    pub out: Option<PathBuf>,
    /// Where to write an SVG figure (count only).
    #[arg(long, env = "LAGNERVE_SVG", global = true)]
    pub svg: Option<PathBuf>,
    /// Record wall time per check in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timings: bool,
}

impl RunConfig {
    pub fn settings(&self) -> Result<Settings, InputError> {
        for (name, v) in [("--n-max", self.n_max), ("--d-max", self.d_max)] {
            if !(1..=4).contains(&v) {
                return Err(InputError::new(name, format!("{} is outside 1..=4", v)));
            }
        }
        Ok(Settings { mode: self.mode.into(), n_max: self.n_max, d_max: self.d_max, seed: self.seed })
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Run a verification suite and write a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Cube file: checked alone by b-faces; with --base, goal checks its simplex.
        #[arg(long)]
        cube: Option<PathBuf>,
        /// Base category file for `goal --cube`.
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Count polygons of a planar configuration and tabulate mu.
    Count { config: PathBuf },
    /// Build the module-level simplex of a cube over a base category.
    BuildXi { cube: PathBuf, base: PathBuf },
}

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config: RunConfig,
    pub seed: u64,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(command: &Command, config: &RunConfig, checks: Vec<CheckRecord>) -> Report {
        let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
        Report {
            schema: SCHEMA,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.clone(),
            config: config.clone(),
            seed: config.seed,
            summary: Summary { total: checks.len(), passed, failed: checks.len() - passed },
            checks,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.summary.failed == 0 {
            0
        } else {
            1
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            2
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32, InputError> {
    let settings = cli.config.settings()?;
    match &cli.command {
        Command::Verify { suite, cube, base } => {
            let checks = verify_checks(*suite, settings, cube.as_deref(), base.as_deref())?;
            let report = Report::new(&cli.command, &cli.config, run_checks(checks, cli.config.timings));
            emit(&cli.config, "report.json", &report)?;
            for c in report.checks.iter().filter(|c| c.status == Status::Fail) {
                eprintln!("FAIL {}: {}", c.id, c.residual.first().map_or("", String::as_str));
            }
            Ok(report.exit_code())
        }
        Command::Count { config } => {
            let table = count(config, settings.d_max, cli.config.svg.as_deref())?;
            emit(&cli.config, "count.json", &table)?;
            Ok(0)
        }
        Command::BuildXi { cube, base } => {
            let (simplex, checks) = build_xi(cube, base, settings)?;
            let report = Report::new(&cli.command, &cli.config, run_checks(checks, cli.config.timings));
            if let Some(dir) = &cli.config.out {
                write_json(&dir.join("simplex.json"), &simplex)?;
            }
            emit(&cli.config, "report.json", &report)?;
            Ok(report.exit_code())
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), InputError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| InputError::new(dir.display().to_string(), e.to_string()))?;
    }
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    std::fs::write(path, text).map_err(|e| InputError::new(path.display().to_string(), e.to_string()))
}

/// Writes `value` to `<out>/<name>`, or to stdout without `--out`.
fn emit<T: Serialize>(config: &RunConfig, name: &str, value: &T) -> Result<(), InputError> {
    match &config.out {
        Some(dir) => write_json(&dir.join(name), value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
            Ok(())
        }
    }
}

fn name_of(p: &Path) -> String {
    p.display().to_string()
}

/// The checks of `suite`, or the checks of the given input files.
pub fn verify_checks(suite: Suite, settings: Settings, cube: Option<&Path>, base: Option<&Path>) -> Result<Vec<Check>, InputError> {
    match (suite, cube, base) {
        (_, None, None) => Ok(suites::checks(suite, settings)),
        (Suite::BFaces, Some(c), None) => {
            let file: CubeFile = load_json(c)?;
            Ok(suites::b_face_checks(settings, Some(file.cube(&name_of(c))?)))
        }
        (Suite::Goal, Some(c), Some(b)) => build_xi(c, b, settings).map(|(_, checks)| checks),
        _ => Err(InputError::new("verify", "--cube alone applies to b-faces; --cube with --base applies to goal")),
    }
}

/// The Xi simplex of a cube file over a base file, and the checks on it.
pub fn build_xi(cube: &Path, base: &Path, settings: Settings) -> Result<(XiSimplexFile, Vec<Check>), InputError> {
    let base_file: BaseFile = load_json(base)?;
    let mut cat = base_file.to_category(&name_of(base))?;
    if settings.mode == CoefficientMode::ModTwo {
        cat = cat.reduced(CoefficientMode::ModTwo);
    }
    let cube_file: CubeFile = load_json(cube)?;
    let s = cube_file.simplex(&name_of(cube), &cat)?;
    let arity = settings.d_max.min(cat.max_arity);
    let simplex = XiSimplexFile::new(&cat, &s, &build_xi_simplex(&cat, &s, arity), arity);
    let (c1, s1) = (cat.clone(), s.clone());
    let (c2, s2) = (cat.clone(), s.clone());
    let checks = vec![
        Check::new("input.base", "ainf/structure-equations", move || {
            let mut out = Outcome::default();
            if let Some(r) = out.take("base", check_ainf_relations(&cat, cat.max_arity)) {
                out.report("base", &r);
            }
            out
        }),
        Check::new("input.goal", "xi/goal-equation", move || {
            let mut out = Outcome::default();
            suites::goal_at(&mut out, "input", &c1, &s1, arity);
            out
        }),
        Check::new("input.table", "xi/reduction-table", move || {
            let mut out = Outcome::default();
            out.report("reduction table", &check_reduction_table(&c2, &s2, arity.min(3)));
            out
        }),
    ];
    Ok((simplex, checks))
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct GeneratorRow {
    pub name: String,
    pub hom: (usize, usize),
    pub degree: i64,
    pub location: crate::planar_floer::Pt,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct CornerRow {
    pub corner_type: String,
    pub polygons: usize,
    pub rigid: usize,
}

#[derive(Serialize, Debug)]
pub struct CountTable {
    pub schema: u32,
    pub curves: usize,
    pub generators: Vec<GeneratorRow>,
    /// Staircase inputs only: polygons with the three standard corner data.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corner_types: Vec<CornerRow>,
    /// The generated category, including its nonzero mu entries.
    pub base: BaseFile,
}

pub fn count(config: &Path, d_max: usize, svg_path: Option<&Path>) -> Result<CountTable, InputError> {
    let name = name_of(config);
    let file: PlanarFile = load_json(config)?;
    let input = file.load(&name)?;
    let curves = input.curves();
    let arity = file.max_arity.unwrap_or(curves.len().saturating_sub(1).clamp(1, d_max.max(1)));
    let pc = mu_d_counts(curves, arity).map_err(|e| InputError::new(format!("{}: curves", name), e.to_string()))?;
    let generators = {
        let mut rows = Vec::new();
        let mut k = std::collections::BTreeMap::new();
        for x in &pc.points {
            let i = k.entry(x.curves).or_insert(0);
            rows.push(GeneratorRow { name: crate::planar_floer::generator_name(x, *i), hom: x.curves, degree: x.degree, location: x.location });
            *i += 1;
        }
        rows
    };
    let mut corner_types = Vec::new();
    let mut shaded = Vec::new();
    if let PlanarInput::Staircase(cfg) = &input {
        for (a, b) in [(false, false), (true, true), (true, false)] {
            let data = staircase_corner_data(cfg, a, b).map_err(|e| InputError::new(&name, e.to_string()))?;
            let polys = enumerate_polygons(&cfg.curves, &data).map_err(|e| InputError::new(&name, e.to_string()))?;
            corner_types.push(CornerRow {
                corner_type: format!("{:?}", classify_corner_data(&data.corners, cfg.params.w)),
                polygons: polys.len(),
                rigid: polys.iter().filter(|p| p.is_rigid() && !p.constant).count(),
            });
        }
        shaded.push(regions(cfg, RegionVariant::R));
    }
    if let Some(path) = svg_path {
        let polys: Vec<_> = pc.polygons.iter().map(|(_, p)| p).collect();
        let text = svg(curves, &shaded.iter().collect::<Vec<_>>(), &polys);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| InputError::new(dir.display().to_string(), e.to_string()))?;
        }
        std::fs::write(path, text).map_err(|e| InputError::new(path.display().to_string(), e.to_string()))?;
    }
    Ok(CountTable { schema: SCHEMA, curves: curves.len(), generators, corner_types, base: BaseFile::from_category(&pc.category) })
}
