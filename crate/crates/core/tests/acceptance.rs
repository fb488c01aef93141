//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::time::Instant;

use tiling_frames::calderon::frame_bound_scan;
use tiling_frames::frame2d::cube::CubeR;
use tiling_frames::frame2d::demo::{run_frame_demo, FrameDemoConfig};
use tiling_frames::overlap::overlap_scan;
use tiling_frames::tiling::DEFAULT_ETA;
use tiling_frames::verify::{
    equivariance_check, frame2d_checks, haar_volume_check, hit_count_check, overlap_cross_check, roundtrip_check,
};
use tiling_frames::window::WindowSpec;
use tiling_frames::Result;

const SEED: u64 = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn roundtrip() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = vec![];
    for n in 2..=4 {
        let r = roundtrip_check(n, 10_000, SEED)?;
        ok &= r.max_relative_error <= 1e-10 && r.max_orthogonality_defect <= 1e-10;
        parts.push(format!(
            "n={n} err={:.1e} orth={:.1e}",
            r.max_relative_error, r.max_orthogonality_defect
        ));
    }
    Ok(outcome(ok, parts.join(", ")))
}

fn equivariance() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = vec![];
    for (n, trials) in [(2, 100_000), (3, 10_000)] {
        let r = equivariance_check(n, trials, SEED, 3)?;
        ok &= r.failures == 0 && r.max_coord_error <= 1e-9;
        parts.push(format!(
            "n={n} trials={trials} failures={} coord_err={:.1e}",
            r.failures, r.max_coord_error
        ));
    }
    Ok(outcome(ok, parts.join(", ")))
}

fn overlap() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = vec![];
    for (n, eps, samples, bound) in [(2, 0.2, 100_000, 33), (2, 0.3, 100_000, 36), (3, 0.2, 10_000, 5832)] {
        let s = overlap_scan(n, eps, samples, SEED, DEFAULT_ETA)?;
        let (min, max) = (s.min.unwrap_or(0), s.max.unwrap_or(usize::MAX));
        ok &= s.evaluated > 0 && min >= 1 && max <= bound;
        parts.push(format!("n={n} eps={eps} range=[{min}, {max}] bound={bound}"));
    }
    for eps in [0.2, 0.3] {
        let c = overlap_cross_check(eps, 1000, SEED, DEFAULT_ETA)?;
        ok &= c.mismatches == 0 && c.compared > 0;
        parts.push(format!("brute force eps={eps}: {}/{} agree", c.compared - c.mismatches, c.compared));
    }
    Ok(outcome(ok, parts.join(", ")))
}

fn hit_counter() -> Result<Outcome> {
    let r = hit_count_check(4.0, 100_000, SEED)?;
    Ok(outcome(
        r.max_count == 6 && r.brute_force_mismatches == 0,
        format!("max={} mismatches={} histogram={:?}", r.max_count, r.brute_force_mismatches, r.histogram),
    ))
}

fn tight_frame() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = vec![];
    let w = WindowSpec::indicator(0.2)?;
    for n in [2, 3] {
        let r = frame_bound_scan(n, &w, "indicator", 0.2, 100_000, SEED, CubeR::default().volume(), DEFAULT_ETA)?;
        let dev = (r.min_sum - 1.0).abs().max((r.max_sum - 1.0).abs());
        ok &= r.evaluated > 0 && dev <= 1e-12;
        parts.push(format!("n={n} evaluated={} max|sum-1|={dev:.1e}", r.evaluated));
    }
    Ok(outcome(ok, parts.join(", ")))
}

fn sandwich() -> Result<Outcome> {
    let w = WindowSpec::smooth(0.2)?;
    let r = frame_bound_scan(2, &w, "smooth", 0.2, 100_000, SEED, CubeR::default().volume(), DEFAULT_ETA)?;
    let ok = r.evaluated > 0
        && r.min_sum >= 1.0 - 1e-12
        && r.max_sum <= 33.0
        && r.cond <= 33.0
        && r.lower_violations == 0
        && r.upper_violations == 0;
    Ok(outcome(
        ok,
        format!(
            "evaluated={} sums in [{:.6}, {:.4}], cond={:.4} (bound 33)",
            r.evaluated, r.min_sum, r.max_sum, r.cond
        ),
    ))
}

fn haar() -> Result<Outcome> {
    let r = haar_volume_check(1_000_000, SEED)?;
    let quad = (r.indicator_quadrature - r.closed_form).abs();
    Ok(outcome(
        r.z_score <= 3.0 && quad <= 1e-8,
        format!(
            "mc={:.6} ± {:.1e} (z={:.2}), quadrature error={quad:.1e}",
            r.monte_carlo, r.std_error, r.z_score
        ),
    ))
}

fn frame_demo() -> Result<Outcome> {
    let config = FrameDemoConfig::default();
    let r = run_frame_demo(&config, None)?.report;
    let checks = frame2d_checks(&r);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let ok = failed.is_empty() && r.containment.samples >= 1_000_000 && config.grid.counts == [32; 4];
    Ok(outcome(
        ok,
        format!(
            "|R|={} parseval={:.1e} fast={:.1e} full={:.1e} ratio={:.4}<={:.4} cond={:.3} tiles={} failed={failed:?}",
            r.cube_volume,
            r.parseval_max_relative_error,
            r.fast_path_error,
            r.full_path_error,
            r.conservative.max_ratio,
            r.conservative.rate_bound,
            r.condition_number,
            r.tiles,
        ),
    ))
}

type Criterion = (&'static str, f64, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 8] = [
        ("iwasawa round trip", 10.0, roundtrip),
        ("tile assignment equivariance", 60.0, equivariance),
        ("overlap bounds", 300.0, overlap),
        ("integer hit counter", f64::INFINITY, hit_counter),
        ("tight frame", f64::INFINITY, tight_frame),
        ("frame bound sandwich", f64::INFINITY, sandwich),
        ("haar volume", f64::INFINITY, haar),
        ("frame demo", 300.0, frame_demo),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && secs < *limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = if limit.is_finite() { format!(", limit {limit} s") } else { String::new() };
        println!(
            "criterion {} {}: {name}: {detail} [{secs:.1} s{budget}]",
            i + 1,
            if passed { "PASS" } else { "FAIL" }
        );
        failures += usize::from(!passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
