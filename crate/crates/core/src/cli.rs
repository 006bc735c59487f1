//! Scenario configuration and the `criteria`/`run`/`verify`/`sweep`
//! commands.
//!
//! A config is TOML restricted to flat dotted keys:
//!
//! ```toml
//! name = "constant_inflow"
//! dimension = 2
//! gamma = 1.4
//! flow.kind = "constant"          # constant | expansion | grid
//! flow.rho = 1.0
//! flow.velocity = [-1.0, 0.0]
//! flow.pressure = 1.0
//! volume.shape = "disk"           # disk | annulus | polygon
//! volume.center = [3.0, 0.0]
//! volume.radius = 1.0
//! volume.markers = 1024
//! volume.order = 16
//! target.x0 = [0.0, 0.0]
//! criteria.q = -8.0
//! criteria.epsilon = 0.5
//! criteria.T = 5.0
//! criteria.M = 100.0
//! run.dt = 1e-3
//! run.stride = 10
//! ```
//!
//! The README lists every key. Unknown keys are rejected by name.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::criteria::{self, CriteriaInputs, CriteriaReport};
use crate::flowfield::{make_analytic_flow, point, AnalyticSpec, FlowField, Vec3};
use crate::functionals::{self, PhiSpec};
use crate::matvol::{init_volume, QuadratureRule, Shape, VolumeShapeSpec};
use crate::solver::{GridFlow, GridSpec, GridState, SolverOptions};
use crate::verify::{self, CheckReport, TheoremReport};
use crate::{Error, Flow, Result};

pub const CSV_HEADER: &str = "t,m,E,G,F,I1,I2,I3,I4,reg,dist,Qq";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    Csv,
    #[default]
    Report,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridInit {
    pub cells: [usize; 2],
    pub lo: [f64; 2],
    pub extent: [f64; 2],
    /// Expressions in `x`, `y` (and `pi`).
    pub rho: String,
    pub vx: String,
    pub vy: String,
    /// Exactly one of pressure or entropy is given.
    pub pressure: Option<String>,
    pub entropy: Option<String>,
    pub solver_dt: f64,
    pub filter: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowConfig {
    Analytic(AnalyticSpec),
    Grid(GridInit),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub dimension: usize,
    pub gamma: f64,
    pub flow: FlowConfig,
    pub volume: VolumeShapeSpec,
    pub x0: Vec3,
    pub epsilon: f64,
    pub q: f64,
    pub horizon: f64,
    pub m_reg: f64,
    /// Entropy floor; defaults to the flow's own.
    pub s0: Option<f64>,
    pub dt: f64,
    pub stride: usize,
    pub floor: f64,
    /// Gradient threshold for the grid smoothness guard.
    pub smoothness: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub sweep_q: Vec<f64>,
    pub sweep_epsilon: Vec<f64>,
    pub verify_times: Vec<f64>,
    pub verify_h: f64,
    pub oracle_cases: usize,
    pub lemma2_cases: usize,
}

/// Flattened dotted-key view of a TOML document; every read consumes the
/// key so leftovers can be reported.
struct Keys(BTreeMap<String, toml::Value>);

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            v => {
                out.insert(key, v);
            }
        }
    }
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::config(key, "expected a number")),
    }
}

impl Keys {
    fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| {
            let key = e.span().map_or_else(
                || "<document>".to_string(),
                |s| {
                    let line = text[..s.start].lines().count().max(1);
                    format!("<line {line}>")
                },
            );
            Error::config(key, e.message().to_string())
        })?;
        let mut map = BTreeMap::new();
        flatten("", table, &mut map);
        Ok(Keys(map))
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.0.remove(key).map(|v| as_f64(key, &v)).transpose()
    }

    fn req_f64(&mut self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::config(key, "missing"))
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(_) => Err(Error::config(key, "expected a non-negative integer")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Error::config(key, "expected a string")),
        }
    }

    fn req_string(&mut self, key: &str) -> Result<String> {
        self.string(key)?.ok_or_else(|| Error::config(key, "missing"))
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a.iter().map(|v| as_f64(key, v)).collect::<Result<_>>().map(Some),
            Some(_) => Err(Error::config(key, "expected an array of numbers")),
        }
    }

    fn req_list(&mut self, key: &str) -> Result<Vec<f64>> {
        self.list(key)?.ok_or_else(|| Error::config(key, "missing"))
    }

    fn pair(&mut self, key: &str) -> Result<[f64; 2]> {
        match self.req_list(key)?[..] {
            [a, b] => Ok([a, b]),
            _ => Err(Error::config(key, "expected two numbers")),
        }
    }

    fn point(&mut self, key: &str, dimension: usize) -> Result<Vec3> {
        let v = self.req_list(key)?;
        if v.len() != dimension {
            return Err(Error::config(key, format!("expected {dimension} coordinates")));
        }
        point(&v).map_err(|e| Error::config(key, e.to_string()))
    }

    fn vertices(&mut self, key: &str) -> Result<Vec<[f64; 2]>> {
        let Some(toml::Value::Array(a)) = self.0.remove(key) else {
            return Err(Error::config(key, "expected an array of [x, y] pairs"));
        };
        a.iter()
            .map(|v| match v {
                toml::Value::Array(p) if p.len() == 2 => Ok([as_f64(key, &p[0])?, as_f64(key, &p[1])?]),
                _ => Err(Error::config(key, "expected [x, y] pairs")),
            })
            .collect()
    }

    fn finish(self) -> Result<()> {
        match self.0.into_keys().next() {
            Some(k) => Err(Error::config(k, "unknown key")),
            None => Ok(()),
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.name.is_empty() {
            cfg.name = path
                .file_stem()
                .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut k = Keys::parse(text)?;
        let name = k.string("name")?.unwrap_or_default();
        let dimension = k.usize("dimension")?.unwrap_or(2);
        if dimension != 2 && dimension != 3 {
            return Err(Error::config("dimension", "must be 2 or 3"));
        }
        let gamma = k.f64("gamma")?.unwrap_or(1.4);
        if !(gamma > 1.0) {
            return Err(Error::config("gamma", "must exceed 1"));
        }

        let kind = k.req_string("flow.kind")?;
        let flow = match kind.as_str() {
            "constant" => FlowConfig::Analytic(AnalyticSpec::Constant {
                rho: k.req_f64("flow.rho")?,
                velocity: k.req_list("flow.velocity")?,
                pressure: k.req_f64("flow.pressure")?,
            }),
            "expansion" => FlowConfig::Analytic(AnalyticSpec::Expansion {
                rho0: k.req_f64("flow.rho0")?,
                entropy: k.f64("flow.entropy")?.unwrap_or(0.0),
                t_c: k.req_f64("flow.t_c")?,
            }),
            "grid" => {
                if dimension != 2 {
                    return Err(Error::config("flow.kind", "grid flows are two-dimensional"));
                }
                let cells = k.req_list("flow.cells")?;
                let [nx, ny] = cells[..] else {
                    return Err(Error::config("flow.cells", "expected two counts"));
                };
                let pressure = k.string("flow.p")?;
                let entropy = k.string("flow.s")?;
                if pressure.is_some() == entropy.is_some() {
                    return Err(Error::config("flow.p", "give exactly one of flow.p and flow.s"));
                }
                FlowConfig::Grid(GridInit {
                    cells: [nx as usize, ny as usize],
                    lo: k.pair("flow.lo")?,
                    extent: k.pair("flow.extent")?,
                    rho: k.req_string("flow.rho")?,
                    vx: k.req_string("flow.vx")?,
                    vy: k.req_string("flow.vy")?,
                    pressure,
                    entropy,
                    solver_dt: k.f64("flow.solver_dt")?.unwrap_or(1e-2),
                    filter: k.f64("flow.filter")?,
                })
            }
            other => return Err(Error::config("flow.kind", format!("unknown kind `{other}`"))),
        };
        if let FlowConfig::Analytic(AnalyticSpec::Constant { velocity, .. }) = &flow {
            if velocity.len() != dimension {
                return Err(Error::config(
                    "flow.velocity",
                    format!("expected {dimension} components"),
                ));
            }
        }

        let shape_kind = k.req_string("volume.shape")?;
        let shape = match shape_kind.as_str() {
            "disk" | "ball" => Shape::Disk {
                center: k.point("volume.center", dimension)?.as_slice()[..dimension].to_vec(),
                radius: k.req_f64("volume.radius")?,
            },
            "annulus" | "shell" => Shape::Annulus {
                center: k.point("volume.center", dimension)?.as_slice()[..dimension].to_vec(),
                inner: k.req_f64("volume.inner")?,
                outer: k.req_f64("volume.outer")?,
            },
            "polygon" => Shape::Polygon {
                vertices: k.vertices("volume.vertices")?,
            },
            other => return Err(Error::config("volume.shape", format!("unknown shape `{other}`"))),
        };
        let quadrature = match k.string("volume.quadrature")?.as_deref().unwrap_or("gauss") {
            "gauss" => QuadratureRule::TensorGauss {
                order: k.usize("volume.order")?.unwrap_or(16),
            },
            "triangulation" => QuadratureRule::Triangulation {
                refinement: k.usize("volume.refinement")?.unwrap_or(2),
            },
            other => {
                return Err(Error::config(
                    "volume.quadrature",
                    format!("unknown rule `{other}`"),
                ))
            }
        };
        let volume = VolumeShapeSpec::single(shape, k.usize("volume.markers")?.unwrap_or(1024), quadrature);

        let x0 = k.point("target.x0", dimension)?;
        let q = k.req_f64("criteria.q")?;
        let limit = criteria::q_limit(dimension, gamma);
        if !(q < limit) {
            return Err(Error::config("criteria.q", format!("must be below {limit}")));
        }
        let epsilon = k.req_f64("criteria.epsilon")?;
        if !(epsilon > 0.0) {
            return Err(Error::config("criteria.epsilon", "must be positive"));
        }
        let horizon = k.req_f64("criteria.T")?;
        if !(horizon > 0.0) {
            return Err(Error::config("criteria.T", "must be positive"));
        }
        let m_reg = k.req_f64("criteria.M")?;
        if !(m_reg >= 0.0) {
            return Err(Error::config("criteria.M", "must be non-negative"));
        }
        let s0 = k.f64("criteria.s0")?;
        let dt = k.f64("run.dt")?.unwrap_or(1e-3);
        if !(dt > 0.0) {
            return Err(Error::config("run.dt", "must be positive"));
        }
        let stride = k.usize("run.stride")?.unwrap_or(10).max(1);
        let floor = k.f64("run.floor")?.unwrap_or(functionals::SINGULARITY_FLOOR);
        let smoothness = k.f64("run.smoothness")?;
        let out_dir = k.string("output.dir")?.map(PathBuf::from);
        let format = match k.string("output.format")?.as_deref() {
            None | Some("report") => OutputFormat::Report,
            Some("csv") => OutputFormat::Csv,
            Some(other) => {
                return Err(Error::config(
                    "output.format",
                    format!("unknown format `{other}`"),
                ))
            }
        };
        let sweep_q = k.list("sweep.q")?.unwrap_or_else(|| vec![q]);
        let sweep_epsilon = k.list("sweep.epsilon")?.unwrap_or_else(|| vec![epsilon]);
        let verify_times = k.list("verify.times")?.unwrap_or_else(|| vec![0.0]);
        let verify_h = k.f64("verify.h")?.unwrap_or(1e-4);
        let oracle_cases = k.usize("verify.oracle_cases")?.unwrap_or(200);
        let lemma2_cases = k.usize("verify.lemma2_cases")?.unwrap_or(20);
        k.finish()?;

        Ok(ScenarioConfig {
            name,
            dimension,
            gamma,
            flow,
            volume,
            x0,
            epsilon,
            q,
            horizon,
            m_reg,
            s0,
            dt,
            stride,
            floor,
            smoothness,
            out_dir,
            format,
            sweep_q,
            sweep_epsilon,
            verify_times,
            verify_h,
            oracle_cases,
            lemma2_cases,
        })
    }

    /// Flow at `t = 0` with the configured entropy floor.
    pub fn build_flow(&self) -> Result<FlowField> {
        let flow = match &self.flow {
            FlowConfig::Analytic(spec) => make_analytic_flow(self.dimension, self.gamma, spec)?,
            FlowConfig::Grid(g) => {
                let grid = GridSpec::new(g.cells, g.lo, g.extent)?;
                let field = |key: &str, src: &str| -> Result<Node<DefaultNumericTypes>> {
                    build_operator_tree(src).map_err(|e| Error::config(key, e.to_string()))
                };
                let rho = field("flow.rho", &g.rho)?;
                let vx = field("flow.vx", &g.vx)?;
                let vy = field("flow.vy", &g.vy)?;
                let (fourth_key, fourth) = match (&g.pressure, &g.entropy) {
                    (Some(p), _) => ("flow.p", field("flow.p", p)?),
                    (None, Some(s)) => ("flow.s", field("flow.s", s)?),
                    (None, None) => return Err(Error::config("flow.p", "missing")),
                };
                let mut failure = None;
                let mut values = Vec::with_capacity(grid.node_count());
                let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
                for j in 0..g.cells[1] {
                    for i in 0..g.cells[0] {
                        let [x, y] = grid.node(i, j);
                        let mut eval = |key: &str, n: &Node<DefaultNumericTypes>| -> f64 {
                            let r = ctx
                                .set_value("x".into(), Value::Float(x))
                                .and_then(|_| ctx.set_value("y".into(), Value::Float(y)))
                                .and_then(|_| ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI)))
                                .and_then(|_| n.eval_number_with_context(&ctx));
                            r.unwrap_or_else(|e| {
                                failure.get_or_insert_with(|| Error::config(key, e.to_string()));
                                f64::NAN
                            })
                        };
                        values.push((
                            eval("flow.rho", &rho),
                            eval("flow.vx", &vx),
                            eval("flow.vy", &vy),
                            eval(fourth_key, &fourth),
                        ));
                    }
                }
                if let Some(e) = failure {
                    return Err(e);
                }
                let nx = g.cells[0];
                let lookup = |x: f64, y: f64| {
                    let [h0, h1] = grid.spacing();
                    let i = ((x - g.lo[0]) / h0).round() as usize;
                    let j = ((y - g.lo[1]) / h1).round() as usize;
                    values[j * nx + i]
                };
                let state = if g.pressure.is_some() {
                    GridState::from_pressure_fn(grid, self.gamma, 0.0, lookup)?
                } else {
                    GridState::from_fn(grid, self.gamma, 0.0, lookup)?
                };
                let s_min = state.entropy().iter().copied().fold(f64::INFINITY, f64::min);
                let gf = GridFlow::new(state, g.solver_dt, SolverOptions { filter: g.filter })?;
                FlowField::from_grid(gf, s_min)
            }
        };
        Ok(match self.s0 {
            Some(s0) => flow.with_entropy_floor(s0),
            None => flow,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "movvol",
    about = "Material-volume threshold criteria and certification runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate constants, Q/R, the threshold and the condition integral.
    Criteria(Common),
    /// Run the scenario to the horizon or the hitting time.
    Run(Common),
    /// Lemma suite, bounds chain and blow-up oracle with pass counts.
    Verify(Common),
    /// Tabulate the criteria over the configured (q, epsilon) grid.
    Sweep(Common),
}

/// Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration
/// or unmet precondition.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let (Command::Criteria(c) | Command::Run(c) | Command::Verify(c) | Command::Sweep(c)) = &cli.command;
    let mut cfg = match ScenarioConfig::load(&c.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    if let Some(o) = &c.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Some(f) = c.format {
        cfg.format = f;
    }
    let result = match &cli.command {
        Command::Criteria(_) => cmd_criteria(&cfg),
        Command::Run(_) => cmd_run(&cfg),
        Command::Verify(_) => cmd_verify(&cfg, c.seed),
        Command::Sweep(_) => cmd_sweep(&cfg),
    };
    match result.and_then(|(text, ok)| {
        out.write_all(text.as_bytes())?;
        Ok(ok)
    }) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config { .. }
                | Error::InvalidParameter(_)
                | Error::TooClose { .. }
                | Error::TargetInside => 2,
                _ => 1,
            }
        }
    }
}

struct Report(String);

impl Report {
    fn new() -> Self {
        Report(String::new())
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.0, "{key}: {value}");
        self
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

/// Initial inputs for the criteria, as used by `run`.
pub fn initial_inputs(cfg: &ScenarioConfig) -> Result<CriteriaInputs> {
    let flow = cfg.build_flow()?;
    let vol = init_volume(&cfg.volume, &flow, cfg.x0, cfg.epsilon)?;
    let phi = PhiSpec::power(cfg.q)?;
    let s = functionals::sample(&flow, &vol, &phi, cfg.epsilon)?;
    Ok(CriteriaInputs {
        q: cfg.q,
        gamma: flow.gamma(),
        n: flow.dimension(),
        s0: flow.entropy_floor(),
        m: s.m,
        energy: s.energy,
        m_reg: cfg.m_reg,
        epsilon: cfg.epsilon,
        horizon: cfg.horizon,
        g0: s.g,
        cond10: criteria::condition10(&vol, &flow, cfg.q)?,
        d_init: s.dist,
    })
}

fn write_criteria(r: &mut Report, inp: &CriteriaInputs, c: &CriteriaReport) {
    r.kv("q", inp.q)
        .kv("epsilon", inp.epsilon)
        .kv("T", inp.horizon)
        .kv("M", inp.m_reg)
        .kv("s0", inp.s0)
        .kv("m", inp.m)
        .kv("E", inp.energy)
        .kv("G0", inp.g0)
        .kv("d_init", inp.d_init)
        .kv("sigma_n", c.constants.sigma_n)
        .kv("C1", c.constants.c1)
        .kv("C3", c.constants.c3)
        .kv("C", c.constants.c)
        .kv("Q0", c.q0)
        .kv("R0", c.r0)
        .kv("case", c.case)
        .kv("delta", c.delta)
        .kv("cond10", c.cond10)
        .kv("cond10_holds", c.cond10_holds)
        .kv("nec_ok", c.necessary.ok);
    if let Some(p) = c.necessary.primary {
        r.kv("nec_name", p.name)
            .kv("nec_lhs", p.lhs)
            .kv("nec_rhs", p.rhs)
            .kv("nec_slack", p.slack());
    }
    if let Some(p) = c.necessary.small_r {
        r.kv("small_r_lhs", p.lhs)
            .kv("small_r_rhs", p.rhs)
            .kv("small_r_holds", p.holds());
    }
}

fn cmd_criteria(cfg: &ScenarioConfig) -> Result<(String, bool)> {
    let inp = initial_inputs(cfg)?;
    let c = criteria::evaluate(&inp)?;
    let mut r = Report::new();
    r.kv("scenario", &cfg.name);
    write_criteria(&mut r, &inp, &c);
    Ok((r.0, true))
}

/// CSV time series with the fixed header.
pub fn time_series_csv(report: &TheoremReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for (x, qq) in report.series.iter().zip(&report.q_series) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            x.t, x.m, x.energy, x.g, x.f, x.i1, x.i2, x.i3, x.i4, x.reg, x.dist, qq
        );
    }
    s
}

pub fn theorem_report_text(name: &str, rep: &TheoremReport) -> String {
    let count = |v: &[CheckReport]| format!("{}/{}", v.iter().filter(|c| c.passed).count(), v.len());
    let mut r = Report::new();
    r.kv("scenario", name)
        .kv("verdict", rep.verdict)
        .kv("hit_time", opt(rep.hit_time))
        .kv("horizon", rep.horizon)
        .kv("final_time", rep.final_time)
        .kv("E_drift", rep.e_drift)
        .kv("reg_max", rep.reg_max)
        .kv("samples", rep.series.len())
        .kv("bound_checks", count(&rep.bound_checks))
        .kv("inequality17_checks", count(&rep.inequality_checks))
        .kv("smoothness", rep.smoothness_note.as_deref().unwrap_or("ok"));
    write_criteria(&mut r, &rep.inputs, &rep.criteria);
    r.0
}

fn cmd_run(cfg: &ScenarioConfig) -> Result<(String, bool)> {
    let rep = verify::run_theorem_scenario(cfg)?;
    let csv = time_series_csv(&rep);
    let text = theorem_report_text(&cfg.name, &rep);
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", cfg.name)), &csv)?;
        std::fs::write(dir.join(format!("{}.report", cfg.name)), &text)?;
    }
    let ok = rep.failed_checks() == 0 && rep.verdict != verify::Verdict::Violation;
    Ok((
        match cfg.format {
            OutputFormat::Csv => csv,
            OutputFormat::Report => text,
        },
        ok,
    ))
}

/// Every check the `verify` command runs, in output order.
pub fn verify_suite(cfg: &ScenarioConfig, seed: u64) -> Result<Vec<(String, Vec<CheckReport>)>> {
    let mut groups = Vec::new();

    let mut flow = cfg.build_flow()?;
    let t_last = cfg.verify_times.iter().copied().fold(0.0, f64::max);
    flow.advance_to(t_last + 2.0 * cfg.verify_h)?;
    let vol = init_volume(&cfg.volume, &flow, cfg.x0, cfg.epsilon)?;
    let phi = PhiSpec::power(cfg.q)?;
    let mut lemmas = Vec::new();
    for &t in &cfg.verify_times {
        lemmas.extend(verify::check_lemma_suite(
            &flow,
            &vol,
            &phi,
            t,
            cfg.verify_h,
            cfg.epsilon,
        )?);
    }
    groups.push(("lemma_suite".to_string(), lemmas));

    let rep = verify::run_theorem_scenario(cfg)?;
    groups.push(("bounds_chain".to_string(), rep.bound_checks));
    groups.push(("inequality17".to_string(), rep.inequality_checks));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle = (0..cfg.oracle_cases)
        .map(|_| {
            let (f0, q0, inp) = verify::random_oracle_case(&mut rng);
            verify::oracle_agreement(f0, q0, &inp)
        })
        .collect();
    groups.push(("blowup_oracle".to_string(), oracle));

    let lemma2 = (0..cfg.lemma2_cases)
        .map(|_| verify::random_lemma2_case(&mut rng))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    groups.push(("lemma2_random".to_string(), lemma2));
    Ok(groups)
}

fn cmd_verify(cfg: &ScenarioConfig, seed: u64) -> Result<(String, bool)> {
    let groups = verify_suite(cfg, seed)?;
    let mut text = String::new();
    let mut ok = true;
    for (name, checks) in &groups {
        for c in checks.iter().filter(|c| !c.passed) {
            let _ = writeln!(text, "{name}: {c}");
        }
    }
    let mut r = Report::new();
    r.kv("scenario", &cfg.name).kv("seed", seed);
    for (name, checks) in &groups {
        let passed = checks.iter().filter(|c| c.passed).count();
        ok &= passed == checks.len();
        r.kv(name, format!("{passed}/{}", checks.len()));
    }
    r.kv("status", if ok { "pass" } else { "FAIL" });
    text.push_str(&r.0);
    Ok((text, ok))
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub q: f64,
    pub epsilon: f64,
    pub outcome: std::result::Result<CriteriaReport, String>,
}

/// Criteria over the `(q, epsilon)` grid, row-major in `q`.
pub fn sweep(cfg: &ScenarioConfig) -> Vec<SweepRow> {
    let points: Vec<(f64, f64)> = cfg
        .sweep_q
        .iter()
        .flat_map(|&q| cfg.sweep_epsilon.iter().map(move |&e| (q, e)))
        .collect();
    points
        .par_iter()
        .map(|&(q, epsilon)| {
            let point = ScenarioConfig {
                q,
                epsilon,
                ..cfg.clone()
            };
            let outcome = initial_inputs(&point)
                .and_then(|inp| criteria::evaluate(&inp))
                .map_err(|e| e.to_string());
            SweepRow { q, epsilon, outcome }
        })
        .collect()
}

fn cmd_sweep(cfg: &ScenarioConfig) -> Result<(String, bool)> {
    let mut s = String::from("q,epsilon,Q0,R0,case,delta,cond10,nec_ok\n");
    for row in sweep(cfg) {
        match row.outcome {
            Ok(c) => {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    row.q, row.epsilon, c.q0, c.r0, c.case, c.delta, c.cond10, c.necessary.ok
                );
            }
            Err(e) => {
                let _ = writeln!(
                    s,
                    "{},{},,,invalid,,,\"{}\"",
                    row.q,
                    row.epsilon,
                    e.replace('"', "'")
                );
            }
        }
    }
    Ok((s, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
flow.kind = "constant"
flow.rho = 1.0
flow.velocity = [-1.0, 0.0]
flow.pressure = 1.0
volume.shape = "disk"
volume.center = [3.0, 0.0]
volume.radius = 1.0
target.x0 = [0.0, 0.0]
criteria.q = -8.0
criteria.epsilon = 0.5
criteria.T = 5.0
criteria.M = 100.0
"#;

    #[test]
    fn parses_dotted_keys() {
        let c = ScenarioConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.dimension, 2);
        assert_eq!(c.volume.markers, 1024);
        assert_eq!(c.x0, Vec3::zeros());
        assert!(c.build_flow().is_ok());
    }

    #[test]
    fn errors_name_the_key() {
        let bad = BASE.replace("criteria.q = -8.0", "criteria.q = -6.0");
        match ScenarioConfig::from_toml_str(&bad) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "criteria.q"),
            other => panic!("{other:?}"),
        }
        let extra = format!("{BASE}\nvolume.radiu = 2.0\n");
        match ScenarioConfig::from_toml_str(&extra) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "volume.radiu"),
            other => panic!("{other:?}"),
        }
        let typed = BASE.replace("flow.rho = 1.0", "flow.rho = \"dense\"");
        match ScenarioConfig::from_toml_str(&typed) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "flow.rho"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_expressions() {
        let text = r#"
flow.kind = "grid"
flow.cells = [32, 32]
flow.lo = [-4.0, -4.0]
flow.extent = [8.0, 8.0]
flow.rho = "1 + 0.1 * math::exp(-(x^2 + y^2))"
flow.vx = "0.2"
flow.vy = "0"
flow.p = "1"
volume.shape = "disk"
volume.center = [2.0, 0.0]
volume.radius = 0.5
target.x0 = [-2.0, 0.0]
criteria.q = -8.0
criteria.epsilon = 0.5
criteria.T = 0.1
criteria.M = 100.0
"#;
        let c = ScenarioConfig::from_toml_str(text).unwrap();
        let f = c.build_flow().unwrap();
        let s = f.state(0.0, &Vec3::new(0.0, 0.0, 0.0)).unwrap();
        assert!((s.rho - 1.1).abs() < 1e-12);
        assert!((s.vel[0] - 0.2).abs() < 1e-12);
        let broken = text.replace("flow.vy = \"0\"", "flow.vy = \"0 +\"");
        match ScenarioConfig::from_toml_str(&broken).unwrap().build_flow() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "flow.vy"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "flow.kind = \"nope\"").unwrap();
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(
            ["movvol", "criteria", "--config", path.to_str().unwrap()],
            &mut o,
            &mut e,
        );
        assert_eq!(code, 2);
        assert!(String::from_utf8(e).unwrap().contains("flow.kind"));
        let code = run(["movvol", "bogus"], &mut o, &mut Vec::new());
        assert_eq!(code, 2);
    }
}
