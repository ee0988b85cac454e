//! Command-line front end. Exit codes: 0 when every checked invariant holds,
//! 1 when one fails, 2 on input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cone::{build_cone, interval_cone, parse_param, Param, Resolution};
use crate::control::{check_scales, integer_scales, ControlTable};
use crate::error::{CoarseError, Result};
use crate::flasque::{certify_flasque, flasque_domain, flasque_homotopy, FlasqueWitness};
use crate::generators::TowerSpec;
use crate::geodesic::{check_geodesification, geodesify};
use crate::homotopy::{check_family_condition, check_homotopy_map, homotopy_from_close, HomotopyDomain};
use crate::io::{
    load_map, load_map_between, load_space, parse_family, parse_rays, parse_sequence, space_to_json, CsvReport, MapFile,
};
use crate::maps::{closeness_constant, injectivity_control, surjectivity_constant, uniformity_control, MapWitness};
use crate::metric::validate_metric;
use crate::product::{build_product, canonical_embed, mediate};
use crate::rays::{extract_ray, BranchRule};
use crate::space::{Combiner, FiniteMetricSpace};
use crate::suite::{render_summary, run_suite, Fault, SuiteConfig};

#[derive(Debug, Parser)]
#[command(
    name = "coarse-lab",
    version,
    about = "Quantitative coarse geometry on finite metric spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub out: Outputs,
    #[command(subcommand)]
    pub command: Command,
}

/// Report destinations shared by every command.
#[derive(Debug, Args)]
pub struct Outputs {
    /// Write the CSV report here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Write the JSON verdict here instead of stdout.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the metric axioms exhaustively.
    Validate {
        #[arg(long)]
        space: String,
    },
    /// Build the c-geodesification and check its comparison map.
    Geodesify {
        #[arg(long)]
        space: String,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Largest integer scale checked.
        #[arg(long, default_value_t = 8)]
        check: usize,
        /// Write the realized space here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coarse rays.
    Ray {
        #[command(subcommand)]
        action: RayCommand,
    },
    /// Asymptotic products.
    Product {
        #[command(subcommand)]
        action: ProductCommand,
    },
    /// Cone spaces.
    Cone {
        #[command(subcommand)]
        action: ConeCommand,
    },
    /// Coarse homotopies.
    Homotopy {
        #[command(subcommand)]
        action: HomotopyCommand,
    },
    /// Flasque spaces.
    Flasque {
        #[command(subcommand)]
        action: FlasqueCommand,
    },
    /// Run the invariant suite.
    Suite(SuiteArgs),
}

#[derive(Debug, Subcommand)]
pub enum RayCommand {
    /// Extract a ray from a base point and check the ray criterion.
    Extract {
        #[arg(long)]
        space: String,
        /// JSON list of point labels.
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value = "tail-count")]
        rule: BranchRule,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CombinerArg {
    Max,
    Sum,
}

impl From<CombinerArg> for Combiner {
    fn from(c: CombinerArg) -> Self {
        match c {
            CombinerArg::Max => Combiner::Max,
            CombinerArg::Sum => Combiner::Sum,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ProductCommand {
    /// Build the asymptotic product of two spaces.
    Build {
        #[arg(long)]
        left: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        q: String,
        #[arg(long = "R")]
        r: f64,
        #[arg(long, value_enum, default_value_t = CombinerArg::Max)]
        combiner: CombinerArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mediating map into the product from a compatible pair of maps.
    Mediate {
        /// Map file `Z → X`.
        #[arg(long)]
        f: PathBuf,
        /// Map file `Z → Y`.
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        c: f64,
        /// Product tolerance; defaults to `c`.
        #[arg(long = "R")]
        r: Option<f64>,
        /// Basepoint of `X`; defaults to its first point.
        #[arg(long)]
        p: Option<String>,
        /// Basepoint of `Y`; defaults to its first point.
        #[arg(long)]
        q: Option<String>,
        /// Largest tolerated radius gap between `f` and `g`.
        #[arg(long, default_value_t = f64::INFINITY)]
        slack: f64,
        #[arg(long, value_enum, default_value_t = CombinerArg::Max)]
        combiner: CombinerArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical embedding `x ↦ (x, ⌊d(x, p)⌋)` of a space into `X ∗ ℤ₊`.
    Embed {
        #[arg(long)]
        space: String,
        #[arg(long)]
        p: String,
        #[arg(long = "R")]
        r: f64,
        #[arg(long, default_value_t = 6)]
        scales: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConeCommand {
    /// Build a cone over a base space and check the triangle inequality.
    Build {
        #[arg(long = "N")]
        n: u32,
        /// `refined` or `fixed:M`.
        #[arg(long, default_value = "refined")]
        resolution: Resolution,
        /// Arbitrary base space instead of the unit interval.
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// The domain `X ∗ ⅁([0,1])`.
#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Cone depth; defaults to `⌈ecc(p)⌉ + 2`.
    #[arg(long = "N")]
    pub n: Option<u32>,
    #[arg(long, default_value = "refined")]
    pub resolution: Resolution,
    /// Product tolerance.
    #[arg(long = "R", default_value_t = 1.0)]
    pub r: f64,
    /// Basepoint of `X`; defaults to its first point.
    #[arg(long)]
    pub p: Option<String>,
    /// Largest integer scale for control tables.
    #[arg(long, default_value_t = 6)]
    pub scales: usize,
}

#[derive(Debug, Subcommand)]
pub enum HomotopyCommand {
    /// Control report for a map on the domain.
    CheckMap {
        #[arg(long)]
        space: String,
        #[arg(long)]
        target: String,
        /// Map file from domain labels `x|t@i` to target labels.
        #[arg(long)]
        map: PathBuf,
        /// Target point the properness profile is centered at.
        #[arg(long)]
        center: Option<String>,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Family condition along rays.
    CheckFamily {
        #[arg(long)]
        space: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        family: PathBuf,
        /// JSON list of label lists.
        #[arg(long)]
        rays: PathBuf,
        /// Parameters to test; defaults to the whole grid.
        #[arg(long, value_delimiter = ',')]
        t: Vec<String>,
    },
    /// The homotopy between two close maps.
    FromClose {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    /// Shift map files, smallest level first; each names its space.
    #[arg(long, required = true)]
    pub shift: Vec<PathBuf>,
    /// Spaces matching each shift; overrides the names in the map files.
    #[arg(long)]
    pub space: Vec<String>,
    /// Iterate cap; defaults to `|X| + 1`.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum FlasqueCommand {
    /// Certify a tower of shift maps as flasque.
    Certify {
        #[command(flatten)]
        shifts: ShiftArgs,
        /// Balls `label:radius` tested for escape; defaults to radii 0..=4 at the first point.
        #[arg(long)]
        ball: Vec<String>,
        #[arg(long, default_value_t = 6)]
        scales: usize,
    },
    /// Check the flasque homotopy from the identity to the collapse map.
    Homotopy {
        #[command(flatten)]
        shifts: ShiftArgs,
        /// Basepoint of `X`; defaults to its first point.
        #[arg(long)]
        p: Option<String>,
        /// Top of the ℤ₊ factor.
        #[arg(long, default_value_t = 16)]
        m: usize,
        /// Cone depth.
        #[arg(long = "N", default_value_t = 18)]
        n: u32,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 3)]
        scales: usize,
    },
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Run the built-in lemma suite.
    #[arg(long)]
    pub paper_lemmas: bool,
    #[arg(long, default_value = "zplus:64,128,256")]
    pub tower: String,
    #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
    pub grid: Vec<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// `floor-map` or `flasque-shift`.
    #[arg(long)]
    pub inject_fault: Option<Fault>,
}

/// A finished command: verdict, JSON body, and CSV rows.
struct Outcome {
    pass: bool,
    json: Value,
    csv: CsvReport,
}

impl Outcome {
    fn new(pass: bool, json: Value) -> Self {
        Self {
            pass,
            json,
            csv: CsvReport::new(),
        }
    }

    fn table(mut self, check: &str, t: &ControlTable, reference: Option<&ControlTable>) -> Self {
        self.csv.extend(&t.to_csv_rows(check, reference));
        self
    }
}

/// Parses arguments, runs, and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads();
    run(cli)
}

fn init_threads() {
    if let Some(n) = std::env::var("COARSE_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command).and_then(|o| emit(&cli.out, o)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ CoarseError::TriangleFailure(..)) => {
            eprintln!("invariant failed: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(out: &Outputs, o: Outcome) -> Result<bool> {
    let mut verdict = o.json;
    verdict["pass"] = Value::Bool(o.pass);
    let text = serde_json::to_string_pretty(&verdict)?;
    if let Some(p) = &out.csv {
        fs::write(p, o.csv.render())?;
    }
    match &out.json {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(o.pass)
}

fn space(reference: &str) -> Result<Arc<FiniteMetricSpace>> {
    Ok(Arc::new(load_space(reference, Path::new("."))?))
}

fn point(space: &FiniteMetricSpace, label: Option<&str>) -> Result<usize> {
    match label {
        Some(l) => space.index_of(l),
        None if space.is_empty() => Err(CoarseError::EmptySpace),
        None => Ok(0),
    }
}

fn write_space(path: &Option<PathBuf>, s: &FiniteMetricSpace) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, space_to_json(s)?)?;
    }
    Ok(())
}

fn write_map(path: &Option<PathBuf>, w: &MapWitness, source: &str, target: &str) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, serde_json::to_string(&MapFile::from_map(w, source, target))?)?;
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Validate { space: s } => {
            let s = space(&s)?;
            let rep = validate_metric(&s);
            let witnesses: Vec<String> = rep.violations.iter().map(|v| v.describe(&s)).collect();
            Ok(Outcome::new(
                rep.is_valid(),
                json!({"command": "validate", "points": s.len(), "violations": rep.total, "witnesses": witnesses}),
            ))
        }
        Command::Geodesify {
            space: s,
            c,
            m,
            check,
            out,
        } => {
            let base = space(&s)?;
            let real = geodesify(base, c, m)?;
            write_space(&out, &real.space)?;
            let rep = check_geodesification(&real, check)?;
            Ok(Outcome::new(
                rep.passes(),
                json!({
                    "command": "geodesify",
                    "vertices": real.vertex_count(),
                    "edges": real.edges.len(),
                    "points": real.space.len(),
                    "surjectivity": rep.surjectivity,
                    "forward": rep.forward,
                    "backward": rep.backward,
                }),
            )
            .table("uniformity", &rep.uniformity, Some(&rep.uniformity_bound))
            .table("spread", &rep.spread, Some(&rep.spread_bound)))
        }
        Command::Ray {
            action:
                RayCommand::Extract {
                    space: s,
                    seq,
                    r0,
                    c,
                    rule,
                },
        } => {
            let s = space(&s)?;
            let seq = parse_sequence(&fs::read_to_string(seq)?, &s)?;
            let ray = extract_ray(&s, &seq, r0, c, rule)?;
            let crit = ray.verify(&s)?;
            let labels: Vec<String> = ray.ray.iter().map(|&x| s.label(x).into_owned()).collect();
            Ok(Outcome::new(
                crit.passes(),
                json!({
                    "command": "ray extract",
                    "ray": labels,
                    "constant": ray.constant,
                    "covered_indices": ray.covered_indices,
                    "criterion": crit,
                }),
            ))
        }
        Command::Product { action } => product(action),
        Command::Cone {
            action:
                ConeCommand::Build {
                    n,
                    resolution,
                    base,
                    out,
                },
        } => {
            let cone = match base {
                Some(b) => build_cone(space(&b)?, n)?,
                None => interval_cone(n, resolution)?,
            };
            write_space(&out, &cone.space)?;
            let rep = cone.validate();
            let witnesses: Vec<String> = rep.violations.iter().take(8).map(|v| v.describe(&cone.space)).collect();
            Ok(Outcome::new(
                rep.is_valid(),
                json!({"command": "cone build", "points": cone.len(), "violations": rep.total, "witnesses": witnesses}),
            ))
        }
        Command::Homotopy { action } => homotopy(action),
        Command::Flasque { action } => flasque(action),
        Command::Suite(args) => suite(args),
    }
}

fn product(action: ProductCommand) -> Result<Outcome> {
    match action {
        ProductCommand::Build {
            left,
            p,
            right,
            q,
            r,
            combiner,
            out,
        } => {
            let (l, rt) = (space(&left)?, space(&right)?);
            let (p, q) = (l.index_of(&p)?, rt.index_of(&q)?);
            let prod = build_product(l, p, rt, q, r, combiner.into())?;
            write_space(&out, &prod.space)?;
            Ok(Outcome::new(
                true,
                json!({"command": "product build", "pairs": prod.len(), "points": prod.space.labels()}),
            ))
        }
        ProductCommand::Mediate {
            f,
            g,
            c,
            r,
            p,
            q,
            slack,
            combiner,
            out,
        } => {
            let fw = load_map(&f)?;
            let gw = load_map_between(&g, fw.source().clone(), load_map(&g)?.target().clone())?;
            let (x, y) = (fw.target().clone(), gw.target().clone());
            let (p, q) = (point(&x, p.as_deref())?, point(&y, q.as_deref())?);
            let prod = build_product(x, p, y, q, r.unwrap_or(c), combiner.into())?;
            let med = mediate(&fw, &gw, &prod, c, slack)?;
            write_map(&out, &med.map, "source", "product")?;
            let pass = med.k <= med.r_comp + c + 1.0 + crate::space::TOL;
            Ok(Outcome::new(
                pass,
                json!({"command": "product mediate", "k": med.k, "r_comp": med.r_comp, "bound": med.r_comp + c + 1.0}),
            ))
        }
        ProductCommand::Embed {
            space: s,
            p,
            r,
            scales,
            out,
        } => {
            let x = space(&s)?;
            let p = x.index_of(&p)?;
            let top = x.eccentricity(p).ceil() as usize;
            let prod = build_product(
                x.clone(),
                p,
                Arc::new(crate::generators::zplus(top)),
                0,
                r,
                Combiner::Max,
            )?;
            let e = canonical_embed(&prod)?;
            write_map(&out, &e, &s, "product")?;
            let sur = surjectivity_constant(&e);
            let scales = integer_scales(scales);
            let inj = injectivity_control(&e, &scales)?;
            let identity = ControlTable::from_fn(&scales, |k| k)?;
            let pass = sur <= r + crate::space::TOL && inj.dominated_by(&identity, 0.0);
            Ok(
                Outcome::new(pass, json!({"command": "product embed", "surjectivity": sur, "R": r})).table(
                    "injectivity",
                    &inj,
                    Some(&identity),
                ),
            )
        }
    }
}

fn domain(x: Arc<FiniteMetricSpace>, args: &DomainArgs) -> Result<HomotopyDomain> {
    let p = point(&x, args.p.as_deref())?;
    let n = args.n.unwrap_or(x.eccentricity(p).ceil() as u32 + 2);
    HomotopyDomain::new(x, p, interval_cone(n, args.resolution)?, args.r)
}

fn homotopy(action: HomotopyCommand) -> Result<Outcome> {
    match action {
        HomotopyCommand::CheckMap {
            space: s,
            target,
            map,
            center,
            domain: d,
        } => {
            let dom = domain(space(&s)?, &d)?;
            let y = space(&target)?;
            let h = load_map_between(&map, dom.space().clone(), y.clone())?;
            let c = point(&y, center.as_deref())?;
            let scales = integer_scales(d.scales);
            let rep = check_homotopy_map(&h, &dom, &scales, &scales, c)?;
            let bounded = rep.properness.bounds().iter().all(|b| b.is_finite());
            Ok(Outcome::new(
                bounded,
                json!({"command": "homotopy check-map", "domain_points": dom.len()}),
            )
            .table("uniformity", &rep.uniformity, None)
            .table("properness", &rep.properness, None)
            .table("left-properness", &rep.left_properness, None))
        }
        HomotopyCommand::CheckFamily {
            space: s,
            target,
            family,
            rays,
            t,
        } => {
            let x = space(&s)?;
            let y = space(&target)?;
            let fam = parse_family(&fs::read_to_string(family)?, x.clone(), y)?;
            let rays = parse_rays(&fs::read_to_string(rays)?, &x)?;
            let ts = t.iter().map(|s| parse_param(s)).collect::<Result<Vec<Param>>>()?;
            let cond = check_family_condition(&fam, &rays, if ts.is_empty() { None } else { Some(&ts) })?;
            Ok(Outcome::new(
                cond.passes,
                json!({"command": "homotopy check-family", "bound": cond.bound, "failures": cond.failures}),
            ))
        }
        HomotopyCommand::FromClose { f, g, domain: d, out } => {
            let fw = load_map(&f)?;
            let gw = load_map_between(&g, fw.source().clone(), fw.target().clone())?;
            let dom = domain(fw.source().clone(), &d)?;
            let h = homotopy_from_close(&fw, &gw, &dom)?;
            write_map(&out, &h, "domain", "target")?;
            let scales = integer_scales(d.scales);
            check_scales(&scales)?;
            let closeness = closeness_constant(&fw, &gw)?;
            let uf = uniformity_control(&fw, &scales)?;
            let ug = uniformity_control(&gw, &scales)?;
            let bound = uf.pointwise_max(&ug)?;
            let bound = ControlTable::from_fn(&scales, |k| bound.at(k).unwrap() + closeness)?;
            let rep = check_homotopy_map(&h, &dom, &scales, &scales, 0)?;
            Ok(Outcome::new(
                rep.uniformity.dominated_by(&bound, 0.0),
                json!({"command": "homotopy from-close", "closeness": closeness, "domain_points": dom.len()}),
            )
            .table("uniformity", &rep.uniformity, Some(&bound))
            .table("left-properness", &rep.left_properness, None))
        }
    }
}

fn shifts(args: &ShiftArgs) -> Result<Vec<FlasqueWitness>> {
    if !args.space.is_empty() && args.space.len() != args.shift.len() {
        return Err(CoarseError::InvalidParameter("give one --space per --shift".into()));
    }
    args.shift
        .iter()
        .enumerate()
        .map(|(k, path)| {
            let w = match args.space.get(k) {
                Some(s) => {
                    let x = space(s)?;
                    load_map_between(path, x.clone(), x)?
                }
                None => load_map(path)?,
            };
            let cap = args.cap.unwrap_or(w.source().len() + 1);
            FlasqueWitness::new(w, cap)
        })
        .collect()
}

fn flasque(action: FlasqueCommand) -> Result<Outcome> {
    match action {
        FlasqueCommand::Certify {
            shifts: s,
            ball,
            scales,
        } => {
            let tower = shifts(&s)?;
            let top = tower.last().unwrap().space();
            let balls = if ball.is_empty() {
                (0..=4).map(|k| (top.label(0).into_owned(), k as f64)).collect()
            } else {
                ball.iter()
                    .map(|b| {
                        let (l, r) = b
                            .rsplit_once(':')
                            .ok_or_else(|| CoarseError::Parse(format!("ball `{b}` needs label:radius")))?;
                        let r: f64 = r
                            .parse()
                            .map_err(|_| CoarseError::Parse(format!("bad radius in `{b}`")))?;
                        Ok((l.to_owned(), r))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let cert = certify_flasque(&tower, &balls, &integer_scales(scales))?;
            let closeness: Vec<f64> = cert.levels.iter().map(|l| l.closeness).collect();
            Ok(Outcome::new(
                cert.passes(),
                json!({
                    "command": "flasque certify",
                    "closeness": closeness,
                    "escapes": cert.escapes,
                    "stable": cert.stable,
                }),
            )
            .table("iterate-union", &cert.top().iterate_union, None))
        }
        FlasqueCommand::Homotopy {
            shifts: s,
            p,
            m,
            n,
            r,
            scales,
        } => {
            let tower = shifts(&s)?;
            let w = tower.last().unwrap();
            let p = point(w.space(), p.as_deref())?;
            let dom = flasque_domain(w, p, m, n, r)?;
            let radii = integer_scales(4);
            let (_, rep) = flasque_homotopy(w, &dom, &radii, &integer_scales(scales))?;
            Ok(Outcome::new(
                rep.endpoints_hold() && rep.ray_gap_holds() && rep.properness_holds(),
                json!({
                    "command": "flasque homotopy",
                    "domain_points": dom.len(),
                    "starts_at_identity": rep.starts_at_identity,
                    "ends_at_collapse": rep.ends_at_collapse,
                    "left_inverse": rep.left_inverse,
                    "ray_gap": rep.ray_gap,
                    "preimage_heights": rep.preimage_heights,
                    "height_bounds": rep.height_bounds,
                }),
            )
            .table("uniformity", &rep.uniformity, None))
        }
    }
}

fn suite(args: SuiteArgs) -> Result<Outcome> {
    if !args.paper_lemmas {
        return Err(CoarseError::InvalidParameter(
            "no suite selected (use --paper-lemmas)".into(),
        ));
    }
    let tower: TowerSpec = args.tower.parse()?;
    let cfg = SuiteConfig {
        tower,
        grid_sizes: args.grid,
        seed: args.seed,
        fault: args.inject_fault,
    };
    let report = run_suite(&cfg)?;
    eprint!("{}", render_summary(&report));
    let mut o = Outcome::new(
        report.passes(),
        json!({"command": "suite", "tower": report.tower, "rows": report.rows}),
    );
    o.csv = CsvReport::new();
    o.csv
        .extend(report.to_csv().split_once('\n').map(|x| x.1).unwrap_or(""));
    Ok(o)
}
