//! Command-line interface.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage,
//! configuration and input errors. Commands that run a scan or a suite
//! write `<name>.json` (deterministic for a fixed configuration) and
//! `<name>.timings.json` to the output directory.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calderon::{calderon_samples, summarize};
use crate::error::{Error, Result};
use crate::frame2d::cube::CubeR;
use crate::frame2d::demo::{run_frame_demo, FrameDemoConfig};
use crate::frame2d::testsignal::SupportSpec;
use crate::frame2d::transform::{write_coefficients_header, write_tile_coefficients, TileCoefficients};
use crate::group::{iwasawa_decompose, iwasawa_recompose, GroupElement};
use crate::overlap::{overlap_scan, pointwise_overlap};
use crate::tiling::{check_eps, membership_translate, tile_assign, RegionKind, TileIndex, DEFAULT_ETA};
use crate::verify::{frame2d_checks, run_suite, Suite, Timings, VerifyConfig};
use crate::window::{
    admissibility_entry_mc, admissibility_quadrature, normalize_to_wavelet, WindowKind, WindowSpec, DEFAULT_ORDER,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tiling-frames",
    version,
    about = "Tiling-system frames for the affine matrix group: tile assignment, overlap and frame-bound scans, and the n = 2 frame demo"
)]
pub struct Cli {
    /// Directory for reports and CSV files [default: $TILEFRAME_OUT or .]
    #[arg(long, global = true, env = "TILEFRAME_OUT")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads [default: available parallelism]. Reports do not
    /// depend on this value.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// JSON file with settings for the command; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iwasawa factors and tile of a matrix given row-major (4, 9 or 16 entries).
    Decompose(MatrixArgs),
    /// Tile assignment, region membership and overlapping tiles of a matrix.
    Assign(AssignArgs),
    /// Pointwise overlap counts over sampled points.
    OverlapScan(ScanArgs),
    /// Sampled Calderón sums and empirical frame bounds.
    CalderonScan(CalderonArgs),
    /// Admissibility integral of a window in both Haar normalizations.
    Admissibility(AdmissibilityArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Analysis, synthesis and reconstruction of a test signal (n = 2).
    FrameDemo(FrameDemoArgs),
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Matrix entries, row-major.
    #[arg(required = true, allow_negative_numbers = true)]
    pub entries: Vec<f64>,
    /// Boundary tolerance [default: 1e-9]
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    /// Also list the tiles p with a·p⁻¹ in F_o(eps).
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Indicator,
    Smooth,
}

impl From<WindowArg> for WindowKind {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Indicator => WindowKind::Indicator,
            WindowArg::Smooth => WindowKind::Smooth,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Matrix size [default: 2]
    #[arg(long)]
    pub n: Option<usize>,
    /// Widening ε in (0, 1/2] [default: 0.2]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of sampled points [default: 100000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random seed [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Boundary tolerance [default: 1e-9]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Also write a CSV file with this name in the output directory.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalderonArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    /// Window [default: smooth]
    #[arg(long, value_enum)]
    pub window: Option<WindowArg>,
}

#[derive(Debug, Args)]
pub struct AdmissibilityArgs {
    /// Matrix size [default: 2]
    #[arg(long)]
    pub n: Option<usize>,
    /// Window ramp width ε [default: 0.2]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Window [default: smooth]
    #[arg(long, value_enum)]
    pub window: Option<WindowArg>,
    /// Monte-Carlo samples for the entry-space estimate, n = 2 only [default: 1000000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random seed [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gauss–Legendre points per panel [default: 64]
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Tiling,
    Overlap,
    Calderon,
    Frame2d,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Tiling => Suite::Tiling,
            SuiteArg::Overlap => Suite::Overlap,
            SuiteArg::Calderon => Suite::Calderon,
            SuiteArg::Frame2d => Suite::Frame2d,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    /// Restrict to one matrix size [default: every size the suite covers]
    #[arg(long)]
    pub n: Option<usize>,
    /// Restrict to one ε [default: 0.2, and 0.3 for the n = 2 overlap scan]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Main sample count of every check [default: per check, 1e4 to 1e6]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random seed [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SupportArg {
    Band,
    Tile,
    Ball,
}

#[derive(Debug, Args)]
pub struct FrameDemoArgs {
    /// Grid points per axis: one value or four comma-separated values.
    /// Required unless the config file has a grid.
    #[arg(long, value_delimiter = ',')]
    pub grid_points: Option<Vec<usize>>,
    /// Grid spacings h1,h2,h3,h4 [default: 1.75,0.5,1.75,0.5]
    #[arg(long, value_delimiter = ',')]
    pub grid_spacing: Option<Vec<f64>>,
    /// Window [default: smooth]
    #[arg(long, value_enum)]
    pub window: Option<WindowArg>,
    /// Window ramp width ε [default: 0.2]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Random seed for the signal and the checks [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Width of the Gaussian bump [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Support restriction of the signal [default: band]
    #[arg(long, value_enum)]
    pub support: Option<SupportArg>,
    /// Frame algorithm iterations [default: 60]
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Tile of the bump center as lambda,kappa,mu [default: 0,0,0]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tile: Option<Vec<i64>>,
    /// Write coefficients with |c| >= --min-coefficient to this CSV file.
    #[arg(long)]
    pub coefficients_csv: Option<PathBuf>,
    /// Threshold for the coefficient CSV [default: 1e-6]
    #[arg(long)]
    pub min_coefficient: Option<f64>,
    /// Save the sampled signal in the binary signal format.
    #[arg(long)]
    pub save_signal: Option<PathBuf>,
}

/// Parses `args` and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error: a violated mathematical bound is a failed check,
/// everything else is a usage or input problem.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SymbolBelowBound { .. } | Error::Divergence { .. } | Error::Inconsistent(_) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::InvalidParameter("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("cannot configure worker pool: {e}")))?;
    }
    let out = Output::new(cli.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")));
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Assign(a) => cmd_assign(a),
        Command::OverlapScan(a) => cmd_overlap_scan(a, cfg, &out),
        Command::CalderonScan(a) => cmd_calderon_scan(a, cfg, &out),
        Command::Admissibility(a) => cmd_admissibility(a, cfg),
        Command::Verify(a) => cmd_verify(a, cfg, &out),
        Command::FrameDemo(a) => cmd_frame_demo(a, cfg, &out),
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    fn path(&self, name: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        Ok(self.dir.join(name))
    }

    fn create(&self, name: &Path) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name)?)?))
    }

    /// Writes `<name>.json` and `<name>.timings.json`.
    fn report<T: Serialize>(&self, name: &str, report: &T, timings: &Timings) -> Result<PathBuf> {
        let path = self.path(Path::new(&format!("{name}.json")))?;
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        let mut t = serde_json::to_string_pretty(timings)?;
        t.push('\n');
        std::fs::write(self.path(Path::new(&format!("{name}.timings.json")))?, t)?;
        Ok(path)
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    std::io::stdout().write_all(s.as_bytes())?;
    Ok(())
}

/// Settings from the config file, or defaults.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(T::default()),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn matrix(entries: &[f64]) -> Result<GroupElement> {
    let n = match entries.len() {
        4 => 2,
        9 => 3,
        16 => 4,
        k => {
            return Err(Error::InvalidParameter(format!(
                "expected 4, 9 or 16 matrix entries, got {k}"
            )))
        }
    };
    GroupElement::from_row_slice(n, entries)
}

fn cmd_decompose(a: &MatrixArgs) -> Result<i32> {
    let m = matrix(&a.entries)?;
    let f = iwasawa_decompose(&m)?;
    let back = iwasawa_recompose(&f)?;
    let residual = (back.matrix() - m.matrix()).norm() / m.matrix().norm();
    let t = tile_assign(&m)?;
    print_json(&json!({
        "n": m.n(),
        "input": m.to_row_vec(),
        "factors": f,
        "index": t.index,
        "coords": t.coords,
        "boundary": t.boundary,
        "residual": residual,
    }))?;
    Ok(EXIT_PASS)
}

fn cmd_assign(a: &AssignArgs) -> Result<i32> {
    let m = matrix(&a.matrix.entries)?;
    let eta = a.matrix.eta.unwrap_or(DEFAULT_ETA);
    let t = tile_assign(&m)?;
    let membership = membership_translate(&m, &t.index, RegionKind::Fundamental, eta)?;
    let mut out = json!({
        "n": m.n(),
        "input": m.to_row_vec(),
        "index": t.index,
        "coords": t.coords,
        "boundary": t.boundary,
        "membership": format!("{membership:?}").to_lowercase(),
    });
    if let Some(eps) = a.eps {
        check_eps(eps)?;
        out["overlaps"] = serde_json::to_value(pointwise_overlap(&m, eps, eta)?)?;
    }
    print_json(&out)?;
    Ok(EXIT_PASS)
}

/// Settings of the two scan commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub n: usize,
    pub eps: f64,
    pub window: WindowKind,
    pub samples: usize,
    pub seed: u64,
    pub eta: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            n: 2,
            eps: 0.2,
            window: WindowKind::Smooth,
            samples: 100_000,
            seed: 7,
            eta: DEFAULT_ETA,
        }
    }
}

impl ScanConfig {
    fn apply(&mut self, a: &ScanArgs) {
        set(&mut self.n, a.n);
        set(&mut self.eps, a.eps);
        set(&mut self.samples, a.samples);
        set(&mut self.seed, a.seed);
        set(&mut self.eta, a.eta);
    }

    fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        if !(2..=6).contains(&self.n) {
            return Err(Error::InvalidParameter(format!("n must lie in 2..=6, got {}", self.n)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        Ok(())
    }
}

fn cmd_overlap_scan(a: &ScanArgs, cfg: Option<&Path>, out: &Output) -> Result<i32> {
    let mut c: ScanConfig = load_config(cfg)?;
    c.apply(a);
    c.validate()?;
    let mut t = Timings::default();
    let start = std::time::Instant::now();
    let s = overlap_scan(c.n, c.eps, c.samples, c.seed, c.eta)?;
    t.stages.insert("scan".into(), start.elapsed().as_secs_f64());
    let bound = crate::overlap::overlap_bound(c.n, c.eps);
    let passed = s.evaluated > 0 && s.min.unwrap_or(0) >= 1 && s.max.is_some_and(|m| m as u128 <= bound);
    let report = json!({"config": c, "passed": passed, "bound": bound, "summary": s});
    let path = out.report("overlap_scan", &report, &t)?;
    if let Some(csv) = &a.csv {
        let mut w = out.create(csv)?;
        writeln!(w, "# pointwise overlap histogram, n = {}, eps = {}", c.n, c.eps)?;
        writeln!(w, "# count samples")?;
        for (k, v) in &s.histogram {
            writeln!(w, "{k} {v}")?;
        }
        w.flush()?;
    }
    println!(
        "overlap counts in [{}, {}] over {} points (bound {bound}); report {}",
        s.min.unwrap_or(0),
        s.max.unwrap_or(0),
        s.evaluated,
        path.display()
    );
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_calderon_scan(a: &CalderonArgs, cfg: Option<&Path>, out: &Output) -> Result<i32> {
    let mut c: ScanConfig = load_config(cfg)?;
    c.apply(&a.scan);
    set(&mut c.window, a.window.map(Into::into));
    c.validate()?;
    let window = WindowSpec {
        kind: c.window,
        epsilon: c.eps,
        ramp: Default::default(),
    };
    let label = match c.window {
        WindowKind::Indicator => "indicator",
        WindowKind::Smooth => "smooth",
    };
    let mut t = Timings::default();
    let start = std::time::Instant::now();
    let rows = calderon_samples(c.n, &window, c.eps, c.samples, c.seed, c.eta)?;
    let r = summarize(c.n, label, c.eps, CubeR::default().volume(), &rows)?;
    t.stages.insert("scan".into(), start.elapsed().as_secs_f64());
    let passed = r.lower_violations == 0 && r.upper_violations == 0;
    let report = json!({"config": c, "passed": passed, "report": r});
    let path = out.report("calderon_scan", &report, &t)?;
    if let Some(csv) = &a.scan.csv {
        let mut w = out.create(csv)?;
        writeln!(w, "# Calderon sums, n = {}, eps = {}, window = {label}", c.n, c.eps)?;
        let cols: Vec<String> = (1..=c.n * c.n).map(|k| format!("x{k}")).collect();
        writeln!(w, "# {} sum overlaps", cols.join(" "))?;
        for row in &rows {
            let Some(v) = row.value else { continue };
            let pts: Vec<String> = row.point.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{} {:e} {}", pts.join(" "), v.sum, v.overlaps)?;
        }
        w.flush()?;
    }
    println!(
        "Calderón sums in [{:.6}, {:.6}], condition {:.4} (bound {}); report {}",
        r.min_sum,
        r.max_sum,
        r.cond,
        r.overlap_bound,
        path.display()
    );
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

/// Settings of the admissibility command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmissibilityConfig {
    pub n: usize,
    pub eps: f64,
    pub window: WindowKind,
    pub samples: usize,
    pub seed: u64,
    pub order: usize,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        Self {
            n: 2,
            eps: 0.2,
            window: WindowKind::Smooth,
            samples: 1_000_000,
            seed: 7,
            order: DEFAULT_ORDER,
        }
    }
}

fn cmd_admissibility(a: &AdmissibilityArgs, cfg: Option<&Path>) -> Result<i32> {
    let mut c: AdmissibilityConfig = load_config(cfg)?;
    set(&mut c.n, a.n);
    set(&mut c.eps, a.eps);
    set(&mut c.window, a.window.map(Into::into));
    set(&mut c.samples, a.samples);
    set(&mut c.seed, a.seed);
    set(&mut c.order, a.order);
    check_eps(c.eps)?;
    if !(2..=6).contains(&c.n) || c.samples == 0 {
        return Err(Error::InvalidParameter("n must lie in 2..=6 and samples must be positive".into()));
    }
    let window = WindowSpec {
        kind: c.window,
        epsilon: c.eps,
        ramp: Default::default(),
    };
    let quad = admissibility_quadrature(&window, c.n, c.order)?;
    let (scale, _) = normalize_to_wavelet(&window, c.n)?;
    let mut report = json!({
        "config": c,
        "coords_quadrature": quad,
        "wavelet_scale": scale,
    });
    if c.n == 2 {
        let mc = admissibility_entry_mc(&window, &CubeR::default(), 0, c.samples, c.seed)?;
        report["entry_mc"] = serde_json::to_value(mc)?;
        report["entry_to_coords_ratio"] = json!(mc.value / quad);
    }
    print_json(&report)?;
    Ok(EXIT_PASS)
}

fn cmd_verify(a: &VerifyArgs, cfg: Option<&Path>, out: &Output) -> Result<i32> {
    let mut c: VerifyConfig = load_config(cfg)?;
    c.n = a.n.or(c.n);
    c.eps = a.eps.or(c.eps);
    c.samples = a.samples.or(c.samples);
    set(&mut c.seed, a.seed);
    c.validate()?;
    let suite: Suite = a.suite.into();
    let (reports, timings) = run_suite(suite, &c)?;
    let passed = reports.iter().all(|r| r.passed);
    let report = json!({"suite": suite.name(), "config": c, "passed": passed, "suites": reports});
    let path = out.report(&format!("verify_{}", suite.name()), &report, &timings)?;
    for r in &reports {
        for check in &r.checks {
            println!(
                "{} {}/{}: {}",
                if check.passed { "PASS" } else { "FAIL" },
                r.suite,
                check.name,
                check.observed
            );
        }
    }
    println!("report {}", path.display());
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_frame_demo(a: &FrameDemoArgs, cfg: Option<&Path>, out: &Output) -> Result<i32> {
    let has_grid = match cfg {
        Some(p) => {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(p)?)?;
            v.get("grid").is_some()
        }
        None => false,
    };
    if a.grid_points.is_none() && !has_grid {
        return Err(Error::InvalidParameter(
            "frame-demo needs a grid: pass --grid-points N (or N1,N2,N3,N4) or set \"grid\" in the config file".into(),
        ));
    }
    let mut c: FrameDemoConfig = load_config(cfg)?;
    if let Some(p) = &a.grid_points {
        c.grid.counts = match p.as_slice() {
            [k] => [*k; 4],
            [a, b, c2, d] => [*a, *b, *c2, *d],
            _ => return Err(Error::InvalidParameter("--grid-points takes one or four values".into())),
        };
    }
    if let Some(h) = &a.grid_spacing {
        c.grid.spacings = h
            .as_slice()
            .try_into()
            .map_err(|_| Error::InvalidParameter("--grid-spacing takes four values".into()))?;
    }
    set(&mut c.window.kind, a.window.map(Into::into));
    set(&mut c.window.epsilon, a.eps);
    set(&mut c.seed, a.seed);
    set(&mut c.sigma, a.sigma);
    set(&mut c.iterations, a.iterations);
    if let Some(s) = a.support {
        c.support = match s {
            SupportArg::Band => SupportSpec::Band,
            SupportArg::Ball => SupportSpec::Ball,
            SupportArg::Tile => SupportSpec::Tile { eps: c.window.epsilon },
        };
    }
    if let Some(t) = &a.tile {
        let [l, k, m] = t.as_slice() else {
            return Err(Error::InvalidParameter("--tile takes lambda,kappa,mu".into()));
        };
        c.tile = TileIndex {
            lambda: *l,
            kappa: vec![*k],
            mu: vec![*m],
        };
    }
    c.validate()?;

    let min_abs = a.min_coefficient.unwrap_or(1e-6);
    let mut csv = match &a.coefficients_csv {
        Some(p) => {
            let mut w = out.create(p)?;
            write_coefficients_header(&mut w)?;
            Some(w)
        }
        None => None,
    };
    let mut sink = |t: &TileCoefficients| -> Result<()> {
        if let Some(w) = csv.as_mut() {
            write_tile_coefficients(t, min_abs, w)?;
        }
        Ok(())
    };
    let result = run_frame_demo(&c, Some(&mut sink))?;
    if let Some(mut w) = csv {
        w.flush()?;
    }
    let checks = frame2d_checks(&result.report);
    let passed = checks.iter().all(|c| c.passed);
    let timings = Timings {
        stages: result.timings.stages.clone(),
    };
    let report = json!({"passed": passed, "checks": checks, "report": result.report});
    let path = out.report("frame_demo", &report, &timings)?;

    let mut w = out.create(Path::new("frame_demo_errors.csv"))?;
    let r = &result.report;
    writeln!(w, "# frame algorithm relative L2 error per iteration")?;
    writeln!(
        w,
        "# conservative bounds A = {}, B = {}; empirical bounds A = {}, B = {}",
        r.conservative.lower, r.conservative.upper, r.empirical.lower, r.empirical.upper
    )?;
    writeln!(w, "# iteration conservative empirical")?;
    for (i, (x, y)) in r.conservative.errors.iter().zip(&r.empirical.errors).enumerate() {
        writeln!(w, "{i} {x:e} {y:e}")?;
    }
    w.flush()?;
    if let Some(p) = &a.save_signal {
        result.signal.save(&out.path(p)?)?;
    }
    for check in &checks {
        println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.observed);
    }
    println!(
        "tiles {}, coefficients {}, condition {:.4}; report {}",
        r.tiles,
        r.coefficients,
        r.condition_number,
        path.display()
    );
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}
