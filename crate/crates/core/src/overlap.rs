//! Overlap enumeration: the tiles `p′` with `b ∈ F_o(ε)·p′`.
//!
//! For `b = S·k·T` (scale, orthogonal, det-one triangular) the condition
//! `b·p′⁻¹ ∈ F_o(ε)` reduces to interval conditions on `S/2^{λ′}`, on
//! `T_ii/2^{κ′_i}` and, diagonal by diagonal, on
//! `y′_ij = T_ij·2^{−κ′_j}/w′_i − Σ_k y′_ik·μ′_kj − μ′_ij`.
//! Enumerating the integers `μ′_ij` that keep `y′_ij` in `(−ε, 1+ε)` is
//! therefore exhaustive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{iwasawa_decompose, upper_index, upper_len, upper_pairs, GroupElement, IwasawaFactors};
use crate::sampling::map_chunks;
use crate::tiling::{
    assign_from_factors, check_eps, membership_coords, membership_translate, sample_scan_point,
    Membership, RegionKind, TileAssignment, TileIndex, OVERFLOW_GUARD,
};

/// Integers `β` with `[α, α+L] ∩ (β−ε, β+1+ε) ≠ ∅`.
pub fn count_integer_hits(alpha: f64, len: f64, eps: f64) -> Vec<i64> {
    let lo = (alpha - 1.0 - eps).ceil() as i64;
    let hi = (alpha + len + eps).floor() as i64;
    (lo..=hi)
        .filter(|&b| {
            let b = b as f64;
            alpha < b + 1.0 + eps && alpha + len > b - eps
        })
        .collect()
}

/// `3ⁿ·6^{n(n−1)/2}`, or `None` on overflow.
pub fn theoretical_m_bound(n: usize) -> Option<u128> {
    let e = u32::try_from(n * (n - 1) / 2).ok()?;
    3u128
        .checked_pow(u32::try_from(n).ok()?)?
        .checked_mul(6u128.checked_pow(e)?)
}

/// Refined overlap bound for `n = 2`: 33 for `ε < ¼`, 36 for `¼ ≤ ε < ½`.
pub fn refined_m_bound_n2(eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "refined bound needs epsilon in (0, 1/2), got {eps}"
        )));
    }
    Ok(if eps < 0.25 { 33 } else { 36 })
}

/// Best available bound on the pointwise overlap count.
pub fn overlap_bound(n: usize, eps: f64) -> u128 {
    if n == 2 {
        if let Ok(b) = refined_m_bound_n2(eps) {
            return b as u128;
        }
    }
    theoretical_m_bound(n).unwrap_or(u128::MAX)
}

/// One tile `p′` with `b·p′⁻¹ ∈ F_o(ε)`, with the coordinates of `b·p′⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapHit {
    pub index: TileIndex,
    pub coords: IwasawaFactors,
}

/// Interval test for an open interval with relative boundary tolerance.
fn classify_open(t: f64, lo: f64, hi: f64, eta: f64) -> Membership {
    if (t - lo).abs() < eta * lo.abs().max(1.0) || (t - hi).abs() < eta * hi.abs().max(1.0) {
        Membership::Boundary
    } else if t > lo && t < hi {
        Membership::Inside
    } else {
        Membership::Outside
    }
}

fn exp2(e: i64) -> f64 {
    2f64.powi(e as i32)
}

/// Enumerates every `p′` with `b·p′⁻¹ ∈ F_o(ε)` from the Iwasawa factors of
/// `b`. Fails with [`Error::Boundary`] when `b` sits within `eta` of the
/// boundary of its own tile or when a candidate coordinate sits within `eta`
/// of an endpoint of `F_o(ε)`.
pub fn enumerate_overlaps(
    f: &IwasawaFactors,
    eps: f64,
    eta: f64,
) -> Result<(TileAssignment, Vec<OverlapHit>)> {
    check_eps(eps)?;
    let base = assign_from_factors(f, OVERFLOW_GUARD)?;
    if base.boundary
        || membership_coords(&base.coords.as_factors(), RegionKind::Fundamental, eta)
            == Membership::Boundary
    {
        return Err(Error::Boundary);
    }
    let n = f.n();
    let t = f.triangular();
    let (lo, hi) = (1.0 - eps, 2.0 + eps);
    let (ylo, yhi) = (-eps, 1.0 + eps);

    let mut hits = Vec::new();
    for dl in -1..=1 {
        let lambda = base.index.lambda + dl;
        let s = f.s / exp2(lambda);
        match classify_open(s, lo, hi, eta) {
            Membership::Boundary => return Err(Error::Boundary),
            Membership::Outside => continue,
            Membership::Inside => {}
        }
        for code in 0..3usize.pow((n - 1) as u32) {
            let mut kappa = Vec::with_capacity(n - 1);
            let mut w = Vec::with_capacity(n - 1);
            let mut c = code;
            let mut ok = true;
            for i in 0..n - 1 {
                let k = base.index.kappa[i] + (c % 3) as i64 - 1;
                c /= 3;
                let wi = t[(i, i)] / exp2(k);
                match classify_open(wi, lo, hi, eta) {
                    Membership::Boundary => return Err(Error::Boundary),
                    Membership::Outside => {
                        ok = false;
                        break;
                    }
                    Membership::Inside => {}
                }
                kappa.push(k);
                w.push(wi);
            }
            if !ok {
                continue;
            }
            let mut full_kappa = kappa.clone();
            full_kappa.push(-kappa.iter().sum::<i64>());
            let pairs: Vec<(usize, usize)> = upper_pairs(n).collect();
            let mut mu = vec![0i64; upper_len(n)];
            let mut y = vec![0f64; upper_len(n)];
            let ctx = Dfs {
                n,
                t: &t,
                w: &w,
                full_kappa: &full_kappa,
                pairs: &pairs,
                eps,
                eta,
                bounds: (ylo, yhi),
            };
            ctx.run(0, &mut mu, &mut y, &mut |mu, y| {
                hits.push(OverlapHit {
                    index: TileIndex {
                        lambda,
                        kappa: kappa.clone(),
                        mu: mu.to_vec(),
                    },
                    coords: IwasawaFactors {
                        s,
                        k: f.k.clone(),
                        w: w.clone(),
                        y: y.to_vec(),
                    },
                });
            })?;
        }
    }
    Ok((base, hits))
}

struct Dfs<'a> {
    n: usize,
    t: &'a nalgebra::DMatrix<f64>,
    w: &'a [f64],
    full_kappa: &'a [i64],
    pairs: &'a [(usize, usize)],
    eps: f64,
    eta: f64,
    bounds: (f64, f64),
}

impl Dfs<'_> {
    fn run(
        &self,
        pos: usize,
        mu: &mut [i64],
        y: &mut [f64],
        emit: &mut dyn FnMut(&[i64], &[f64]),
    ) -> Result<()> {
        if pos == self.pairs.len() {
            emit(mu, y);
            return Ok(());
        }
        let n = self.n;
        let (i, j) = self.pairs[pos];
        let mut arg = self.t[(i, j)] * exp2(-self.full_kappa[j]) / self.w[i];
        for k in i + 1..j {
            arg -= y[upper_index(n, i, k)] * mu[upper_index(n, k, j)] as f64;
        }
        let slack = 1e-9 * arg.abs().max(1.0);
        let lo = (arg - 1.0 - self.eps - slack).ceil() as i64;
        let hi = (arg + self.eps + slack).floor() as i64;
        let idx = upper_index(n, i, j);
        for m in lo..=hi {
            let yv = arg - m as f64;
            match classify_open(yv, self.bounds.0, self.bounds.1, self.eta) {
                Membership::Boundary => return Err(Error::Boundary),
                Membership::Outside => continue,
                Membership::Inside => {}
            }
            mu[idx] = m;
            y[idx] = yv;
            self.run(pos + 1, mu, y, emit)?;
        }
        Ok(())
    }
}

/// Pointwise overlap report for one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub point: Vec<f64>,
    pub base: TileIndex,
    pub tiles: Vec<TileIndex>,
    pub count: usize,
    pub bound: u128,
}

/// All `p′ ∈ P` with `b·p′⁻¹` inside `F_o(ε)`, each confirmed by a direct
/// membership test of the matrix `b·p′⁻¹`.
pub fn pointwise_overlap(b: &GroupElement, eps: f64, eta: f64) -> Result<OverlapReport> {
    let f = iwasawa_decompose(b)?;
    let (base, hits) = enumerate_overlaps(&f, eps, eta)?;
    let region = RegionKind::Open { eps };
    for h in &hits {
        match membership_translate(b, &h.index, region, eta)? {
            Membership::Inside => {}
            Membership::Boundary => return Err(Error::Boundary),
            Membership::Outside => {
                return Err(Error::Inconsistent(format!(
                    "enumerated tile {:?} fails the membership test",
                    h.index
                )))
            }
        }
    }
    let tiles: Vec<TileIndex> = hits.into_iter().map(|h| h.index).collect();
    Ok(OverlapReport {
        point: b.to_row_vec(),
        base: base.index,
        count: tiles.len(),
        tiles,
        bound: overlap_bound(b.n(), eps),
    })
}

/// Exhaustive search for `n = 2`: every index with `|λ′−λ|, |κ′−κ| ≤ 2` and
/// `|μ′| ≤ 16(|μ|+2)+4`, tested by membership alone. Returns the sorted
/// list of tiles with `b·p′⁻¹ ∈ F_o(ε)`.
pub fn brute_force_overlap_n2(b: &GroupElement, eps: f64, eta: f64) -> Result<Vec<TileIndex>> {
    if b.n() != 2 {
        return Err(Error::Unsupported(format!(
            "brute-force overlap search is implemented for n = 2, got n = {}",
            b.n()
        )));
    }
    let base = crate::tiling::tile_assign(b)?.index;
    let reach = 16 * (base.mu[0].abs() + 2) + 4;
    let region = RegionKind::Open { eps };
    let mut out = Vec::new();
    for lambda in base.lambda - 2..=base.lambda + 2 {
        for kappa in base.kappa[0] - 2..=base.kappa[0] + 2 {
            for mu in -reach..=reach {
                let p = TileIndex {
                    lambda,
                    kappa: vec![kappa],
                    mu: vec![mu],
                };
                match membership_translate(b, &p, region, eta)? {
                    Membership::Inside => out.push(p),
                    Membership::Boundary => return Err(Error::Boundary),
                    Membership::Outside => {}
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Summary of an overlap scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapScanSummary {
    pub n: usize,
    pub eps: f64,
    pub samples: usize,
    pub evaluated: usize,
    pub boundary_rejections: usize,
    pub min: Option<usize>,
    pub max: Option<usize>,
    /// count → number of samples
    pub histogram: BTreeMap<usize, usize>,
    pub theoretical_bound: Option<u128>,
    pub refined_bound: Option<u64>,
    /// Point attaining the maximum, for replay.
    pub max_point: Option<Vec<f64>>,
}

#[derive(Default)]
struct ScanPart {
    evaluated: usize,
    rejected: usize,
    hist: BTreeMap<usize, usize>,
    max: Option<(usize, Vec<f64>)>,
}

/// Pointwise overlap counts over `samples` points drawn by
/// [`sample_scan_point`].
pub fn overlap_scan(n: usize, eps: f64, samples: usize, seed: u64, eta: f64) -> Result<OverlapScanSummary> {
    check_eps(eps)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let parts = map_chunks(samples, seed, |range, rng| -> Result<ScanPart> {
        let mut part = ScanPart::default();
        for _ in range {
            let b = sample_scan_point(n, rng);
            let f = iwasawa_decompose(&b)?;
            match enumerate_overlaps(&f, eps, eta) {
                Ok((_, hits)) => {
                    let c = hits.len();
                    part.evaluated += 1;
                    *part.hist.entry(c).or_default() += 1;
                    if part.max.as_ref().is_none_or(|(m, _)| c > *m) {
                        part.max = Some((c, b.to_row_vec()));
                    }
                }
                Err(Error::Boundary) => part.rejected += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(part)
    });
    let mut summary = OverlapScanSummary {
        n,
        eps,
        samples,
        evaluated: 0,
        boundary_rejections: 0,
        min: None,
        max: None,
        histogram: BTreeMap::new(),
        theoretical_bound: theoretical_m_bound(n),
        refined_bound: if n == 2 { refined_m_bound_n2(eps).ok() } else { None },
        max_point: None,
    };
    for part in parts {
        let part = part?;
        summary.evaluated += part.evaluated;
        summary.boundary_rejections += part.rejected;
        for (c, k) in part.hist {
            *summary.histogram.entry(c).or_default() += k;
        }
        if let Some((c, pt)) = part.max {
            if summary.max.is_none_or(|m| c > m) {
                summary.max = Some(c);
                summary.max_point = Some(pt);
            }
        }
    }
    summary.min = summary.histogram.keys().next().copied();
    Ok(summary)
}
