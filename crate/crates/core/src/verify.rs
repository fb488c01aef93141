//! Verification suites shared by the command line and the acceptance
//! tests. Each suite returns named checks with the observed values and,
//! on failure, a sample that reproduces it.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calderon::frame_bound_scan;
use crate::error::{Error, Result};
use crate::frame2d::demo::{run_frame_demo, FrameDemoConfig, FrameDemoReport};
use crate::group::{
    haar_measure_mc, iwasawa_decompose, iwasawa_recompose, orthogonality_defect, CoordBox,
};
use crate::overlap::{brute_force_overlap_n2, count_integer_hits, overlap_bound, overlap_scan, pointwise_overlap};
use crate::sampling::map_chunks;
use crate::tiling::{
    check_eps, coverage_check, random_coords, random_index, sample_scan_point, sample_uniform_matrix,
    tile_assign, tile_point, DEFAULT_ETA,
};
use crate::window::{admissibility_quadrature, WindowSpec, DEFAULT_ORDER};

/// One named assertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub requirement: String,
    pub observed: Value,
    /// Input reproducing a failure, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, requirement: impl Into<String>, observed: Value) -> Self {
        Self {
            name: name.into(),
            passed,
            requirement: requirement.into(),
            observed,
            replay: None,
        }
    }

    fn replay_if_failed(mut self, replay: Option<Value>) -> Self {
        if !self.passed {
            self.replay = replay;
        }
        self
    }
}

/// Checks and raw measurements of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, Value>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.into(),
            passed: true,
            checks: vec![],
            data: BTreeMap::new(),
        }
    }

    fn push(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    fn record<T: Serialize>(&mut self, key: impl Into<String>, v: &T) -> Result<()> {
        self.data.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }
}

/// Wall-clock seconds per stage; never part of a deterministic report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: BTreeMap<String, f64>,
}

impl Timings {
    fn time<T>(&mut self, name: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.insert(name.into(), t.elapsed().as_secs_f64());
        out
    }
}

// ---------------------------------------------------------------- checks

/// Largest errors of `recompose(decompose(a))` over random matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub n: usize,
    pub samples: usize,
    pub max_relative_error: f64,
    pub max_orthogonality_defect: f64,
    pub worst: Vec<f64>,
}

/// Matrices with entries uniform in `[−2, 2]`, `|det| ≥ 10⁻³`.
pub fn roundtrip_check(n: usize, samples: usize, seed: u64) -> Result<RoundTripReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let parts = map_chunks(samples, seed, |range, rng| -> Result<(f64, f64, Vec<f64>)> {
        let (mut err, mut orth, mut worst) = (0.0f64, 0.0f64, vec![]);
        for _ in range {
            let a = sample_uniform_matrix(n, rng);
            let f = iwasawa_decompose(&a)?;
            let back = iwasawa_recompose(&f)?;
            let e = (back.matrix() - a.matrix()).norm() / a.matrix().norm();
            if e > err {
                err = e;
                worst = a.to_row_vec();
            }
            orth = orth.max(orthogonality_defect(&f.k));
        }
        Ok((err, orth, worst))
    });
    let mut r = RoundTripReport {
        n,
        samples,
        max_relative_error: 0.0,
        max_orthogonality_defect: 0.0,
        worst: vec![],
    };
    for p in parts {
        let (e, o, w) = p?;
        if e > r.max_relative_error || r.worst.is_empty() {
            r.max_relative_error = e;
            r.worst = w;
        }
        r.max_orthogonality_defect = r.max_orthogonality_defect.max(o);
    }
    Ok(r)
}

/// Outcome of generate-from-known-tile trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub n: usize,
    pub trials: usize,
    pub index_bound: i64,
    pub failures: usize,
    /// Trials whose assignment was flagged as near a boundary.
    pub flagged: usize,
    pub max_coord_error: f64,
    pub max_det_error: f64,
    pub first_failure: Option<Value>,
}

/// Builds `a = tile_point(p, c)` from random coordinates and a random index
/// with entries in `[−bound, bound]`, then checks that `tile_assign(a)`
/// returns `p` exactly, `c` within `1e−9`, and `|det a| = (s·2^λ)ⁿ`.
pub fn equivariance_check(n: usize, trials: usize, seed: u64, bound: i64) -> Result<EquivarianceReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let parts = map_chunks(trials, seed, |range, rng| -> Result<EquivarianceReport> {
        let mut r = EquivarianceReport {
            n,
            trials: range.len(),
            index_bound: bound,
            failures: 0,
            flagged: 0,
            max_coord_error: 0.0,
            max_det_error: 0.0,
            first_failure: None,
        };
        for _ in range {
            let c = random_coords(n, rng);
            let p = random_index(n, bound, rng);
            let a = tile_point(&p, &c)?;
            let det = (c.s * 2f64.powi(p.lambda as i32)).powi(n as i32);
            let det_err = (a.det().abs() - det).abs() / det;
            r.max_det_error = r.max_det_error.max(det_err);
            let got = tile_assign(&a)?;
            if got.boundary {
                r.flagged += 1;
            }
            let e = got.coords.max_diff(&c);
            r.max_coord_error = r.max_coord_error.max(e);
            if got.index != p || e > 1e-9 || det_err > 1e-10 {
                r.failures += 1;
                if r.first_failure.is_none() {
                    r.first_failure = Some(json!({
                        "index": p, "coords": c, "matrix": a.to_row_vec(), "assigned": got.index,
                    }));
                }
            }
        }
        Ok(r)
    });
    let mut total = EquivarianceReport {
        n,
        trials,
        index_bound: bound,
        failures: 0,
        flagged: 0,
        max_coord_error: 0.0,
        max_det_error: 0.0,
        first_failure: None,
    };
    for p in parts {
        let p = p?;
        total.failures += p.failures;
        total.flagged += p.flagged;
        total.max_coord_error = total.max_coord_error.max(p.max_coord_error);
        total.max_det_error = total.max_det_error.max(p.max_det_error);
        if total.first_failure.is_none() {
            total.first_failure = p.first_failure;
        }
    }
    Ok(total)
}

/// Integer hit counts for a fixed interval length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitCountReport {
    pub len: f64,
    pub samples: usize,
    pub max_count: usize,
    /// count → number of samples
    pub histogram: BTreeMap<usize, usize>,
    pub brute_force_mismatches: usize,
    pub first_mismatch: Option<Value>,
}

/// Random `α ∈ [−100, 100]` and `ε ∈ (0, ½]`; each hit list is compared
/// with a scan of every `β ∈ [α − 10, α + L + 10]`.
pub fn hit_count_check(len: f64, samples: usize, seed: u64) -> Result<HitCountReport> {
    if !(len > 0.0) {
        return Err(Error::InvalidParameter(format!("interval length must be positive, got {len}")));
    }
    let parts = map_chunks(samples, seed, |range, rng| {
        let mut hist = BTreeMap::new();
        let mut mism = 0;
        let mut first = None;
        for _ in range {
            let alpha: f64 = rng.random_range(-100.0..100.0);
            let eps = 0.5 - rng.random_range(0.0..0.5);
            let got = count_integer_hits(alpha, len, eps);
            let lo = (alpha - 10.0).floor() as i64;
            let hi = (alpha + len + 10.0).ceil() as i64;
            let brute: Vec<i64> = (lo..=hi)
                .filter(|&b| {
                    let (b0, b1) = (b as f64 - eps, b as f64 + 1.0 + eps);
                    alpha.max(b0) <= (alpha + len).min(b1) && alpha < b1 && alpha + len > b0
                })
                .collect();
            if got != brute {
                mism += 1;
                first.get_or_insert(json!({"alpha": alpha, "len": len, "eps": eps}));
            }
            *hist.entry(got.len()).or_insert(0usize) += 1;
        }
        (hist, mism, first)
    });
    let mut r = HitCountReport {
        len,
        samples,
        max_count: 0,
        histogram: BTreeMap::new(),
        brute_force_mismatches: 0,
        first_mismatch: None,
    };
    for (hist, mism, first) in parts {
        for (k, v) in hist {
            *r.histogram.entry(k).or_insert(0) += v;
        }
        r.brute_force_mismatches += mism;
        if r.first_mismatch.is_none() {
            r.first_mismatch = first;
        }
    }
    r.max_count = r.histogram.keys().next_back().copied().unwrap_or(0);
    Ok(r)
}

/// Agreement of the fast overlap enumeration with the exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub eps: f64,
    pub points: usize,
    pub compared: usize,
    pub boundary_rejections: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<Vec<f64>>,
}

pub fn overlap_cross_check(eps: f64, points: usize, seed: u64, eta: f64) -> Result<CrossCheckReport> {
    check_eps(eps)?;
    let parts = map_chunks(points, seed, |range, rng| -> Result<CrossCheckReport> {
        let mut r = CrossCheckReport {
            eps,
            points: range.len(),
            compared: 0,
            boundary_rejections: 0,
            mismatches: 0,
            first_mismatch: None,
        };
        for _ in range {
            let b = sample_scan_point(2, rng);
            let fast = match pointwise_overlap(&b, eps, eta) {
                Ok(f) => f,
                Err(Error::Boundary) => {
                    r.boundary_rejections += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let brute = match brute_force_overlap_n2(&b, eps, eta) {
                Ok(v) => v,
                Err(Error::Boundary) => {
                    r.boundary_rejections += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            r.compared += 1;
            let mut tiles = fast.tiles;
            tiles.sort();
            if tiles != brute {
                r.mismatches += 1;
                r.first_mismatch.get_or_insert(b.to_row_vec());
            }
        }
        Ok(r)
    });
    let mut total = CrossCheckReport {
        eps,
        points,
        compared: 0,
        boundary_rejections: 0,
        mismatches: 0,
        first_mismatch: None,
    };
    for p in parts {
        let p = p?;
        total.compared += p.compared;
        total.boundary_rejections += p.boundary_rejections;
        total.mismatches += p.mismatches;
        if total.first_mismatch.is_none() {
            total.first_mismatch = p.first_mismatch;
        }
    }
    Ok(total)
}

/// Haar measure of `F` for `n = 2` three ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarVolumeReport {
    pub samples: usize,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
    /// `|MC − closed form|` in standard errors.
    pub z_score: f64,
    pub indicator_quadrature: f64,
}

/// `∫_F ds/s · w dw · dy = (3/2)·ln 2`.
pub fn haar_volume_check(samples: usize, seed: u64) -> Result<HaarVolumeReport> {
    let region = CoordBox::uniform(2, (1.0, 2.0), (0.0, 1.0));
    let mc = haar_measure_mc(&region, samples, seed, |_| true)?;
    let exact = 1.5 * 2f64.ln();
    let quad = admissibility_quadrature(&WindowSpec::indicator(0.2)?, 2, DEFAULT_ORDER)?;
    Ok(HaarVolumeReport {
        samples,
        closed_form: exact,
        monte_carlo: mc.value,
        std_error: mc.std_error,
        z_score: (mc.value - exact).abs() / mc.std_error.max(f64::MIN_POSITIVE),
        indicator_quadrature: quad,
    })
}

// ---------------------------------------------------------------- suites

/// Which suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Tiling,
    Overlap,
    Calderon,
    Frame2d,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Tiling => "tiling",
            Suite::Overlap => "overlap",
            Suite::Calderon => "calderon",
            Suite::Frame2d => "frame2d",
            Suite::All => "all",
        }
    }
}

/// Settings of a verification run; `None` selects the suite's default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Restrict to one dimension.
    pub n: Option<usize>,
    /// Restrict to one ε.
    pub eps: Option<f64>,
    /// Override the main sample count of every check.
    pub samples: Option<usize>,
    pub seed: u64,
    pub eta: f64,
    pub roundtrip_samples: usize,
    pub equivariance_trials_n2: usize,
    pub equivariance_trials_n3: usize,
    pub coverage_samples: usize,
    pub haar_samples: usize,
    pub overlap_samples: usize,
    pub cross_check_points: usize,
    pub hit_count_samples: usize,
    pub calderon_samples: usize,
    pub frame: FrameDemoConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: None,
            eps: None,
            samples: None,
            seed: 7,
            eta: DEFAULT_ETA,
            roundtrip_samples: 10_000,
            equivariance_trials_n2: 100_000,
            equivariance_trials_n3: 10_000,
            coverage_samples: 10_000,
            haar_samples: 1_000_000,
            overlap_samples: 100_000,
            cross_check_points: 1_000,
            hit_count_samples: 100_000,
            calderon_samples: 100_000,
            frame: FrameDemoConfig::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.eps {
            check_eps(e)?;
        }
        if let Some(n) = self.n {
            if !(2..=6).contains(&n) {
                return Err(Error::InvalidParameter(format!("n must lie in 2..=6, got {n}")));
            }
        }
        if self.samples == Some(0) {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1e-3) {
            return Err(Error::InvalidParameter(format!("eta must lie in (0, 1e-3), got {}", self.eta)));
        }
        self.frame.validate()
    }

    fn count(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn dims(&self, default: &[usize]) -> Vec<usize> {
        match self.n {
            Some(n) => vec![n],
            None => default.to_vec(),
        }
    }

    fn epsilons(&self, default: &[f64]) -> Vec<f64> {
        match self.eps {
            Some(e) => vec![e],
            None => default.to_vec(),
        }
    }
}

fn n_eps_key(n: usize, eps: f64) -> String {
    format!("n{n}_eps{eps}")
}

pub fn verify_tiling(cfg: &VerifyConfig, t: &mut Timings) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("tiling");
    for n in cfg.dims(&[2, 3, 4]) {
        let r = t.time(format!("roundtrip_n{n}"), || roundtrip_check(n, cfg.count(cfg.roundtrip_samples), cfg.seed))?;
        rep.push(
            Check::new(
                format!("roundtrip_n{n}"),
                r.max_relative_error <= 1e-10 && r.max_orthogonality_defect <= 1e-10,
                "recomposition error and orthogonality defect at most 1e-10",
                json!({"max_relative_error": r.max_relative_error, "max_orthogonality_defect": r.max_orthogonality_defect}),
            )
            .replay_if_failed(Some(json!(r.worst))),
        );
        rep.record(format!("roundtrip_n{n}"), &r)?;
    }
    for n in cfg.dims(&[2, 3]) {
        let trials = cfg.count(if n == 2 { cfg.equivariance_trials_n2 } else { cfg.equivariance_trials_n3 });
        let r = t.time(format!("equivariance_n{n}"), || equivariance_check(n, trials, cfg.seed, 3))?;
        rep.push(
            Check::new(
                format!("equivariance_n{n}"),
                r.failures == 0,
                "tile index recovered exactly and coordinates within 1e-9",
                json!({"trials": r.trials, "failures": r.failures, "max_coord_error": r.max_coord_error}),
            )
            .replay_if_failed(r.first_failure.clone()),
        );
        rep.record(format!("equivariance_n{n}"), &r)?;
        let c = t.time(format!("coverage_n{n}"), || {
            coverage_check(n, cfg.count(cfg.coverage_samples), cfg.seed, cfg.eta)
        })?;
        rep.push(
            Check::new(
                format!("coverage_n{n}"),
                c.failures == 0,
                "exactly one tile contains each non-boundary sample",
                json!({"samples": c.samples, "failures": c.failures, "boundary_rejections": c.boundary_rejections}),
            )
            .replay_if_failed(c.failure_examples.first().map(|v| json!(v))),
        );
        rep.record(format!("coverage_n{n}"), &c)?;
    }
    if cfg.n.is_none_or(|n| n == 2) {
        let h = t.time("haar_volume", || haar_volume_check(cfg.count(cfg.haar_samples), cfg.seed))?;
        rep.push(Check::new(
            "haar_volume_n2",
            h.z_score <= 3.0,
            "Monte-Carlo measure of F within 3 standard errors of (3/2)·ln 2",
            json!({"estimate": h.monte_carlo, "std_error": h.std_error, "z": h.z_score}),
        ));
        rep.push(Check::new(
            "indicator_admissibility_n2",
            (h.indicator_quadrature - h.closed_form).abs() <= 1e-8,
            "quadrature of the indicator window equals (3/2)·ln 2 within 1e-8",
            json!(h.indicator_quadrature),
        ));
        rep.record("haar_volume", &h)?;
    }
    Ok(rep)
}

pub fn verify_overlap(cfg: &VerifyConfig, t: &mut Timings) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("overlap");
    for n in cfg.dims(&[2, 3]) {
        let eps_list = if n == 2 { cfg.epsilons(&[0.2, 0.3]) } else { cfg.epsilons(&[0.2]) };
        for eps in eps_list {
            let key = n_eps_key(n, eps);
            let s = t.time(format!("scan_{key}"), || {
                overlap_scan(n, eps, cfg.count(cfg.overlap_samples), cfg.seed, cfg.eta)
            })?;
            let bound = overlap_bound(n, eps);
            let (lo, hi) = (s.min.unwrap_or(0), s.max.unwrap_or(0));
            rep.push(
                Check::new(
                    format!("overlap_bound_{key}"),
                    s.evaluated > 0 && lo >= 1 && (hi as u128) <= bound,
                    format!("pointwise overlap count in [1, {bound}]"),
                    json!({"min": lo, "max": hi, "evaluated": s.evaluated}),
                )
                .replay_if_failed(s.max_point.as_ref().map(|p| json!(p))),
            );
            rep.record(format!("scan_{key}"), &s)?;
            if n == 2 {
                let c = t.time(format!("cross_check_{key}"), || {
                    overlap_cross_check(eps, cfg.count(cfg.cross_check_points).min(cfg.cross_check_points), cfg.seed, cfg.eta)
                })?;
                rep.push(
                    Check::new(
                        format!("brute_force_{key}"),
                        c.mismatches == 0 && c.compared > 0,
                        "enumeration equals the exhaustive search on every compared point",
                        json!({"compared": c.compared, "mismatches": c.mismatches}),
                    )
                    .replay_if_failed(c.first_mismatch.as_ref().map(|p| json!(p))),
                );
                rep.record(format!("cross_check_{key}"), &c)?;
            }
        }
    }
    let h = t.time("hit_count", || hit_count_check(4.0, cfg.count(cfg.hit_count_samples), cfg.seed))?;
    rep.push(
        Check::new(
            "hit_count_len4",
            h.max_count == 6 && h.brute_force_mismatches == 0,
            "at most 6 integer hits for L = 4, attained, matching brute force",
            json!({"max": h.max_count, "mismatches": h.brute_force_mismatches}),
        )
        .replay_if_failed(h.first_mismatch.clone()),
    );
    rep.record("hit_count", &h)?;
    Ok(rep)
}

pub fn verify_calderon(cfg: &VerifyConfig, t: &mut Timings) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("calderon");
    let volume = crate::frame2d::cube::CubeR::default().volume();
    let eps_list = cfg.epsilons(&[0.2]);
    for n in cfg.dims(&[2, 3]) {
        for &eps in &eps_list {
            let key = n_eps_key(n, eps);
            let ind = WindowSpec::indicator(eps)?;
            let r = t.time(format!("indicator_{key}"), || {
                frame_bound_scan(n, &ind, "indicator", eps, cfg.count(cfg.calderon_samples), cfg.seed, volume, cfg.eta)
            })?;
            let dev = (r.min_sum - 1.0).abs().max((r.max_sum - 1.0).abs());
            rep.push(
                Check::new(
                    format!("tight_frame_{key}"),
                    dev <= 1e-12,
                    "indicator Calderón sum equals 1 within 1e-12",
                    json!({"min": r.min_sum, "max": r.max_sum, "evaluated": r.evaluated}),
                )
                .replay_if_failed(Some(json!({"argmin": r.argmin, "argmax": r.argmax}))),
            );
            rep.record(format!("indicator_{key}"), &r)?;
        }
    }
    if cfg.n.is_none_or(|n| n == 2) {
        for &eps in &eps_list {
            let key = n_eps_key(2, eps);
            let smooth = WindowSpec::smooth(eps)?;
            let r = t.time(format!("smooth_{key}"), || {
                frame_bound_scan(2, &smooth, "smooth", eps, cfg.count(cfg.calderon_samples), cfg.seed, volume, cfg.eta)
            })?;
            let m = r.overlap_bound as f64;
            rep.push(
                Check::new(
                    format!("frame_bounds_{key}"),
                    r.lower_violations == 0 && r.upper_violations == 0 && r.min_sum >= 1.0 - 1e-12 && r.max_sum <= m,
                    format!("every sampled sum in [1, {m}]"),
                    json!({"min": r.min_sum, "max": r.max_sum, "evaluated": r.evaluated}),
                )
                .replay_if_failed(Some(json!({"argmin": r.argmin, "argmax": r.argmax}))),
            );
            rep.push(Check::new(
                format!("condition_{key}"),
                r.cond <= m,
                format!("empirical condition number at most {m}"),
                json!(r.cond),
            ));
            rep.record(format!("smooth_{key}"), &r)?;
        }
    }
    Ok(rep)
}

pub fn frame2d_checks(r: &FrameDemoReport) -> Vec<Check> {
    let vol = r.cube_volume;
    let indicator = r.config.window.kind == crate::window::WindowKind::Indicator;
    let mut v = vec![
        Check::new(
            "cube_volume",
            vol == 78400.0,
            "|R| = 78400",
            json!(vol),
        ),
        Check::new(
            "containment",
            r.containment.violations == 0,
            "sampled points of F_o(1/2) lie strictly inside R",
            json!(r.containment),
        ),
        Check::new(
            "orthonormality",
            r.orthonormality_defect <= 1e-8,
            "character inner products within 1e-8 of the identity",
            json!(r.orthonormality_defect),
        ),
        Check::new(
            "parseval",
            r.parseval_max_relative_error <= 1e-6,
            "per-tile coefficient energy matches the direct sum within 1e-6",
            json!(r.parseval_max_relative_error),
        ),
        Check::new(
            "symbol_sandwich",
            r.symbol_min >= vol * (1.0 - 1e-9) && r.symbol_max <= r.symbol_upper_bound * (1.0 + 1e-9),
            "|R| <= symbol <= M·|R| on the signal support",
            json!({"min": r.symbol_min, "max": r.symbol_max}),
        ),
        Check::new(
            "multiplier_identity",
            r.multiplier_max_deviation <= 1e-9,
            "synthesis of the analysis equals symbol times signal",
            json!(r.multiplier_max_deviation),
        ),
        Check::new(
            "fast_path",
            r.fast_path_error <= 1e-10,
            "fast reconstruction error at most 1e-10",
            json!(r.fast_path_error),
        ),
        Check::new(
            "full_path",
            r.full_path_error <= 1e-6,
            "full reconstruction error at most 1e-6",
            json!(r.full_path_error),
        ),
        Check::new(
            "frame_algorithm_rate",
            r.conservative.max_ratio <= r.conservative.rate_bound + 1e-12,
            "per-iteration error ratio at most (B-A)/(B+A) with A = |R|, B = M·|R|",
            json!({"max_ratio": r.conservative.max_ratio, "bound": r.conservative.rate_bound}),
        ),
    ];
    if indicator {
        v.push(Check::new(
            "tight_frame",
            (r.condition_number - 1.0).abs() <= 1e-12 && r.empirical.errors.get(1).is_some_and(|e| *e <= 1e-12),
            "condition number 1 and exact after one iteration",
            json!({"cond": r.condition_number, "errors": &r.empirical.errors[..2.min(r.empirical.errors.len())]}),
        ));
    } else {
        v.push(Check::new(
            "empirical_bounds_faster",
            r.empirical.final_error < r.conservative.final_error,
            "empirical frame bounds converge strictly faster than the conservative ones",
            json!({"empirical": r.empirical.final_error, "conservative": r.conservative.final_error}),
        ));
    }
    v
}

pub fn verify_frame2d(cfg: &VerifyConfig, t: &mut Timings) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("frame2d");
    if cfg.n.is_some_and(|n| n != 2) {
        return Err(Error::Unsupported("the frame2d suite runs for n = 2 only".into()));
    }
    let mut fc = cfg.frame.clone();
    if let Some(e) = cfg.eps {
        fc.window.epsilon = e;
    }
    let out = t.time("frame_demo", || run_frame_demo(&fc, None))?;
    for (k, v) in &out.timings.stages {
        t.stages.insert(format!("frame_demo.{k}"), *v);
    }
    for c in frame2d_checks(&out.report) {
        rep.push(c.replay_if_failed(Some(json!({"signal": out.report.signal}))));
    }
    let mut r = out.report;
    r.config = fc;
    rep.record("demo", &r)?;
    Ok(rep)
}

/// Runs one suite, or all of them.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<(Vec<SuiteReport>, Timings)> {
    cfg.validate()?;
    let mut t = Timings::default();
    let mut out = vec![];
    let all = suite == Suite::All;
    if all || suite == Suite::Tiling {
        out.push(verify_tiling(cfg, &mut t)?);
    }
    if all || suite == Suite::Overlap {
        out.push(verify_overlap(cfg, &mut t)?);
    }
    if all || suite == Suite::Calderon {
        out.push(verify_calderon(cfg, &mut t)?);
    }
    if (all && cfg.n.is_none_or(|n| n == 2)) || suite == Suite::Frame2d {
        out.push(verify_frame2d(cfg, &mut t)?);
    }
    Ok((out, t))
}
