//! Calderón sums `Σ_{p∈P} ĝ(b·p⁻¹)²` and sampled frame bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{iwasawa_decompose, GroupElement, IwasawaFactors};
use crate::overlap::{enumerate_overlaps, overlap_bound};
use crate::sampling::map_chunks;
use crate::tiling::{membership_coords, sample_scan_point, Membership, RegionKind, TileIndex};
use crate::window::{Axis, Window};

/// Checks that the window vanishes outside `F_o(ε)`, so that the overlap
/// enumeration at `ε` sees every nonzero term.
pub fn check_support<W: Window + ?Sized>(window: &W, eps: f64) -> Result<()> {
    let s = window.breakpoints(Axis::Scale);
    let y = window.breakpoints(Axis::Shear);
    let tol = 1e-12;
    let ok = s[0] >= 1.0 - eps - tol
        && s[s.len() - 1] <= 2.0 + eps + tol
        && y[0] >= -eps - tol
        && y[y.len() - 1] <= 1.0 + eps + tol;
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "window support exceeds the widened tile for epsilon {eps}"
        )));
    }
    Ok(())
}

/// One Calderón sum with the number of contributing tiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalderonValue {
    pub sum: f64,
    pub overlaps: usize,
}

/// Nonzero terms `(p′, ĝ(b·p′⁻¹))` of the Calderón sum, from the Iwasawa
/// factors of `b`. A term within `eta` of the boundary of `F̄` is rejected,
/// since the indicator window jumps there.
pub fn calderon_terms<W: Window + ?Sized>(
    f: &IwasawaFactors,
    window: &W,
    eps: f64,
    eta: f64,
) -> Result<(usize, Vec<(TileIndex, f64)>)> {
    let (_, hits) = enumerate_overlaps(f, eps, eta)?;
    let count = hits.len();
    let mut terms = Vec::with_capacity(count);
    for h in hits {
        if membership_coords(&h.coords, RegionKind::Closure, eta) == Membership::Boundary {
            return Err(Error::Boundary);
        }
        let g = window.eval_coords(&h.coords);
        if g != 0.0 {
            terms.push((h.index, g));
        }
    }
    Ok((count, terms))
}

/// Calderón sum from the Iwasawa factors of `b`.
pub fn calderon_from_factors<W: Window + ?Sized>(
    f: &IwasawaFactors,
    window: &W,
    eps: f64,
    eta: f64,
) -> Result<CalderonValue> {
    let (overlaps, terms) = calderon_terms(f, window, eps, eta)?;
    Ok(CalderonValue {
        sum: terms.iter().map(|(_, g)| g * g).sum(),
        overlaps,
    })
}

/// `Σ_{p′} ĝ(b·p′⁻¹)²` over the tiles with `b ∈ F_o(ε)·p′`.
pub fn calderon_sum<W: Window + ?Sized>(b: &GroupElement, window: &W, eps: f64, eta: f64) -> Result<f64> {
    check_support(window, eps)?;
    Ok(calderon_from_factors(&iwasawa_decompose(b)?, window, eps, eta)?.sum)
}

/// Sampled frame bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBoundReport {
    pub n: usize,
    pub eps: f64,
    pub window: String,
    pub samples: usize,
    pub evaluated: usize,
    pub boundary_rejections: usize,
    pub min_sum: f64,
    pub max_sum: f64,
    pub a_emp: f64,
    pub b_emp: f64,
    pub cond: f64,
    pub cube_volume: f64,
    /// `|R|`
    pub theoretical_a: f64,
    /// `M·|R|` with the best available overlap bound.
    pub theoretical_b: f64,
    pub overlap_bound: u128,
    pub max_overlap: usize,
    /// Samples with a sum below `1 − 10⁻¹²`.
    pub lower_violations: usize,
    /// Samples with a sum above their own overlap count or above `M`.
    pub upper_violations: usize,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

/// One sampled point of a scan; `value` is `None` for rejected samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalderonSample {
    pub point: Vec<f64>,
    pub value: Option<CalderonValue>,
}

/// Calderón sums at `samples` points drawn by [`sample_scan_point`].
pub fn calderon_samples<W: Window + ?Sized>(
    n: usize,
    window: &W,
    eps: f64,
    samples: usize,
    seed: u64,
    eta: f64,
) -> Result<Vec<CalderonSample>> {
    check_support(window, eps)?;
    let parts = map_chunks(samples, seed, |range, rng| -> Result<Vec<CalderonSample>> {
        let mut out = Vec::with_capacity(range.len());
        for _ in range {
            let b = sample_scan_point(n, rng);
            let value = match calderon_from_factors(&iwasawa_decompose(&b)?, window, eps, eta) {
                Ok(v) => Some(v),
                Err(Error::Boundary) => None,
                Err(e) => return Err(e),
            };
            out.push(CalderonSample {
                point: b.to_row_vec(),
                value,
            });
        }
        Ok(out)
    });
    let mut all = Vec::with_capacity(samples);
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// `A_emp = |R|·min`, `B_emp = |R|·max` of the sampled Calderón sums.
#[allow(clippy::too_many_arguments)]
pub fn frame_bound_scan<W: Window + ?Sized>(
    n: usize,
    window: &W,
    label: &str,
    eps: f64,
    samples: usize,
    seed: u64,
    cube_volume: f64,
    eta: f64,
) -> Result<FrameBoundReport> {
    if !(cube_volume > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cube volume must be positive, got {cube_volume}"
        )));
    }
    let rows = calderon_samples(n, window, eps, samples, seed, eta)?;
    summarize(n, label, eps, cube_volume, &rows)
}

/// Folds sampled sums into a [`FrameBoundReport`].
pub fn summarize(
    n: usize,
    label: &str,
    eps: f64,
    cube_volume: f64,
    rows: &[CalderonSample],
) -> Result<FrameBoundReport> {
    let bound = overlap_bound(n, eps);
    let mut min = (f64::INFINITY, Vec::new());
    let mut max = (f64::NEG_INFINITY, Vec::new());
    let mut evaluated = 0;
    let mut max_overlap = 0;
    let mut lower = 0;
    let mut upper = 0;
    for r in rows {
        let Some(v) = r.value else { continue };
        evaluated += 1;
        max_overlap = max_overlap.max(v.overlaps);
        if v.sum < 1.0 - 1e-12 {
            lower += 1;
        }
        if v.sum > v.overlaps as f64 + 1e-12 || v.sum > bound as f64 {
            upper += 1;
        }
        if v.sum < min.0 {
            min = (v.sum, r.point.clone());
        }
        if v.sum > max.0 {
            max = (v.sum, r.point.clone());
        }
    }
    if evaluated == 0 {
        return Err(Error::AllRejected(rows.len()));
    }
    Ok(FrameBoundReport {
        n,
        eps,
        window: label.to_string(),
        samples: rows.len(),
        evaluated,
        boundary_rejections: rows.len() - evaluated,
        min_sum: min.0,
        max_sum: max.0,
        a_emp: cube_volume * min.0,
        b_emp: cube_volume * max.0,
        cond: max.0 / min.0,
        cube_volume,
        theoretical_a: cube_volume,
        theoretical_b: bound as f64 * cube_volume,
        overlap_bound: bound,
        max_overlap,
        lower_violations: lower,
        upper_violations: upper,
        argmin: min.1,
        argmax: max.1,
    })
}
