//! The tiling system `(F, P)` of GL_n(R).
//!
//! `F` is the set of matrices whose Iwasawa coordinates satisfy
//! `s, w_i ∈ [1,2)` and `y_{i,j} ∈ [0,1)`; `P` is the discrete set of
//! upper-triangular matrices `2^λ·U` with `U_ii = 2^{κ_i}` and
//! `U_ij = 2^{κ_j}·μ_ij`. Every invertible matrix factors uniquely as
//! `f·p`, computed here by a diagonal-by-diagonal floor recursion.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    iwasawa_decompose, matrix_rows, random_orthogonal, upper_index, upper_len, upper_pairs,
    GroupElement, IwasawaFactors,
};

/// Default bound on `|λ|` and `|κ_i|`.
pub const OVERFLOW_GUARD: i64 = 512;

/// Default relative boundary tolerance for membership tests.
pub const DEFAULT_ETA: f64 = 1e-9;

/// Distance from an integer below which a floor is considered ambiguous.
pub const FLOOR_TOL: f64 = 1e-12;

/// Discrete parameters `(λ, κ₁..κ_{n−1}, μ_{i<j})` of an element of `P`.
///
/// `mu` uses the packed order of [`crate::group::upper_index`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileIndex {
    pub lambda: i64,
    pub kappa: Vec<i64>,
    pub mu: Vec<i64>,
}

impl TileIndex {
    pub fn identity(n: usize) -> Self {
        Self {
            lambda: 0,
            kappa: vec![0; n - 1],
            mu: vec![0; upper_len(n)],
        }
    }

    pub fn n(&self) -> usize {
        self.kappa.len() + 1
    }

    /// `κ₁..κ_n` with `κ_n = −Σ κ_i`.
    pub fn full_kappa(&self) -> Vec<i64> {
        let mut k = self.kappa.clone();
        k.push(-self.kappa.iter().sum::<i64>());
        k
    }

    pub fn mu_at(&self, i: usize, j: usize) -> i64 {
        self.mu[upper_index(self.n(), i, j)]
    }

    pub fn check_guard(&self, guard: i64) -> Result<()> {
        for &v in std::iter::once(&self.lambda).chain(self.kappa.iter()) {
            if v.abs() > guard {
                return Err(Error::TileRange { value: v, guard });
            }
        }
        Ok(())
    }

    /// The matrix `p ∈ P`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let kappa = self.full_kappa();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            p[(i, i)] = exp2(self.lambda + kappa[i]);
        }
        for (i, j) in upper_pairs(n) {
            p[(i, j)] = exp2(self.lambda + kappa[j]) * self.mu_at(i, j) as f64;
        }
        p
    }

    pub fn to_element(&self) -> Result<GroupElement> {
        self.check_guard(OVERFLOW_GUARD)?;
        GroupElement::from_matrix(self.to_matrix())
    }

    /// Exact inverse of `p`, by back substitution on the triangular matrix.
    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        let p = self.to_matrix();
        let n = self.n();
        let mut inv = DMatrix::zeros(n, n);
        for col in 0..n {
            for row in (0..=col).rev() {
                let mut v = if row == col { 1.0 } else { 0.0 };
                for k in row + 1..=col {
                    v -= p[(row, k)] * inv[(k, col)];
                }
                inv[(row, col)] = v / p[(row, row)];
            }
        }
        inv
    }
}

fn exp2(e: i64) -> f64 {
    2f64.powi(e as i32)
}

/// Tile-local coordinates of a point of `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileCoords {
    pub s: f64,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(with = "matrix_rows")]
    pub k: DMatrix<f64>,
}

impl TileCoords {
    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    pub fn as_factors(&self) -> IwasawaFactors {
        IwasawaFactors {
            s: self.s,
            k: self.k.clone(),
            w: self.w.clone(),
            y: self.y.clone(),
        }
    }

    pub fn from_factors(f: &IwasawaFactors) -> Self {
        Self {
            s: f.s,
            w: f.w.clone(),
            y: f.y.clone(),
            k: f.k.clone(),
        }
    }

    /// Largest coordinate difference (orthogonal factor included).
    pub fn max_diff(&self, other: &TileCoords) -> f64 {
        let mut d = (self.s - other.s).abs();
        for (a, b) in self.w.iter().zip(&other.w) {
            d = d.max((a - b).abs());
        }
        for (a, b) in self.y.iter().zip(&other.y) {
            d = d.max((a - b).abs());
        }
        d.max((&self.k - &other.k).amax())
    }
}

/// Result of [`tile_assign`]. `boundary` is set when one of the floors was
/// taken within [`FLOOR_TOL`] of an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileAssignment {
    pub index: TileIndex,
    pub coords: TileCoords,
    pub boundary: bool,
}

/// Splits `v > 0` as `m·2^e` with `m ∈ [1,2)`.
fn dyadic_split(v: f64) -> (i64, f64, bool) {
    let mut e = v.log2().floor() as i64;
    let mut m = v / exp2(e);
    while m >= 2.0 {
        e += 1;
        m = v / exp2(e);
    }
    while m < 1.0 {
        e -= 1;
        m = v / exp2(e);
    }
    let near = (m - 1.0).abs() < FLOOR_TOL || (2.0 - m).abs() < 2.0 * FLOOR_TOL;
    (e, m, near)
}

/// Solves `a = s·k·w·y·p` with `p ∈ P` and coordinates in their half-open
/// ranges.
pub fn tile_assign(a: &GroupElement) -> Result<TileAssignment> {
    tile_assign_guarded(a, OVERFLOW_GUARD)
}

pub fn tile_assign_guarded(a: &GroupElement, guard: i64) -> Result<TileAssignment> {
    let f = iwasawa_decompose(a)?;
    assign_from_factors(&f, guard)
}

/// Tile assignment from precomputed Iwasawa factors.
pub fn assign_from_factors(f: &IwasawaFactors, guard: i64) -> Result<TileAssignment> {
    let n = f.n();
    let (lambda, s, mut boundary) = dyadic_split(f.s);
    let t = f.triangular();

    let mut kappa = Vec::with_capacity(n - 1);
    let mut w = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let (e, m, near) = dyadic_split(t[(i, i)]);
        kappa.push(e);
        w.push(m);
        boundary |= near;
    }
    let index_guard = TileIndex {
        lambda,
        kappa: kappa.clone(),
        mu: vec![],
    };
    index_guard.check_guard(guard)?;
    let mut full_kappa = kappa.clone();
    full_kappa.push(-kappa.iter().sum::<i64>());

    let m = upper_len(n);
    let mut mu = vec![0i64; m];
    let mut y = vec![0f64; m];
    for (i, j) in upper_pairs(n) {
        let mut arg = t[(i, j)] * exp2(-full_kappa[j]) / w[i];
        for k in i + 1..j {
            arg -= y[upper_index(n, i, k)] * mu[upper_index(n, k, j)] as f64;
        }
        let fl = arg.floor();
        let frac = arg - fl;
        if frac < FLOOR_TOL * arg.abs().max(1.0) || 1.0 - frac < FLOOR_TOL * arg.abs().max(1.0) {
            boundary = true;
        }
        let idx = upper_index(n, i, j);
        mu[idx] = fl as i64;
        y[idx] = frac;
    }

    Ok(TileAssignment {
        index: TileIndex { lambda, kappa, mu },
        coords: TileCoords {
            s,
            w,
            y,
            k: f.k.clone(),
        },
        boundary,
    })
}

/// `s·k·w·y·p`, the inverse of [`tile_assign`].
pub fn tile_point(index: &TileIndex, coords: &TileCoords) -> Result<GroupElement> {
    if index.n() != coords.n() {
        return Err(Error::DimensionMismatch {
            expected: coords.n(),
            found: index.n(),
        });
    }
    index.check_guard(OVERFLOW_GUARD)?;
    let f = coords.as_factors();
    f.validate()?;
    let m = &f.k * f.triangular() * index.to_matrix() * f.s;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::TileRange {
            value: index.lambda,
            guard: OVERFLOW_GUARD,
        });
    }
    GroupElement::from_matrix(m)
}

/// The three regions built from the coordinate box of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionKind {
    /// `F`: half-open box.
    Fundamental,
    /// `F̄`: closed box.
    Closure,
    /// `F_o(ε)`: open box widened by `ε`.
    Open { eps: f64 },
}

impl RegionKind {
    pub fn open(eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(RegionKind::Open { eps })
    }

    fn intervals(&self) -> (Interval, Interval) {
        match *self {
            RegionKind::Fundamental => (
                Interval::new(1.0, 2.0, true, false),
                Interval::new(0.0, 1.0, true, false),
            ),
            RegionKind::Closure => (
                Interval::new(1.0, 2.0, true, true),
                Interval::new(0.0, 1.0, true, true),
            ),
            RegionKind::Open { eps } => (
                Interval::new(1.0 - eps, 2.0 + eps, false, false),
                Interval::new(-eps, 1.0 + eps, false, false),
            ),
        }
    }
}

/// `ε` must lie in `(0, ½]`.
pub fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2], got {eps}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above && below
    }

    fn near_endpoint(&self, t: f64, eta: f64) -> bool {
        (t - self.lo).abs() < eta * self.lo.abs().max(1.0)
            || (t - self.hi).abs() < eta * self.hi.abs().max(1.0)
    }
}

/// Outcome of a membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

/// Classifies Iwasawa coordinates against a region. A point is `Outside`
/// as soon as one coordinate is outside its interval by at least the
/// tolerance; otherwise any coordinate within `eta` of an endpoint makes it
/// `Boundary`.
pub fn membership_coords(f: &IwasawaFactors, region: RegionKind, eta: f64) -> Membership {
    let (scale, shear) = region.intervals();
    let mut boundary = false;
    let checks = std::iter::once((f.s, scale))
        .chain(f.w.iter().map(|&w| (w, scale)))
        .chain(f.y.iter().map(|&y| (y, shear)));
    for (t, iv) in checks {
        if iv.near_endpoint(t, eta) {
            boundary = true;
        } else if !iv.contains(t) {
            return Membership::Outside;
        }
    }
    if boundary {
        Membership::Boundary
    } else {
        Membership::Inside
    }
}

/// Decomposes `a` and classifies it against `region`.
pub fn membership(a: &GroupElement, region: RegionKind, eta: f64) -> Result<Membership> {
    Ok(membership_coords(&iwasawa_decompose(a)?, region, eta))
}

/// Membership of `a·p⁻¹`.
pub fn membership_translate(
    a: &GroupElement,
    p: &TileIndex,
    region: RegionKind,
    eta: f64,
) -> Result<Membership> {
    let q = GroupElement::from_matrix(a.matrix() * p.inverse_matrix())?;
    membership(&q, region, eta)
}

/// Uniformly random tile coordinates in `F` (orthogonal factor Haar).
pub fn random_coords<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TileCoords {
    TileCoords {
        s: rng.random_range(1.0..2.0),
        w: (0..n - 1).map(|_| rng.random_range(1.0..2.0)).collect(),
        y: (0..upper_len(n)).map(|_| rng.random_range(0.0..1.0)).collect(),
        k: random_orthogonal(n, rng),
    }
}

/// Random tile index with every entry in `[-bound, bound]`.
pub fn random_index<R: Rng + ?Sized>(n: usize, bound: i64, rng: &mut R) -> TileIndex {
    TileIndex {
        lambda: rng.random_range(-bound..=bound),
        kappa: (0..n - 1).map(|_| rng.random_range(-bound..=bound)).collect(),
        mu: (0..upper_len(n))
            .map(|_| rng.random_range(-bound..=bound))
            .collect(),
    }
}

/// Sampler for scan points: Iwasawa coordinates uniform on the widened box
/// `s, w_i ∈ [½, 4]`, `y ∈ [−2, 3]`, Haar `k`, composed with a random
/// `P`-translate with index entries in `[−2, 2]`.
pub fn sample_scan_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupElement {
    loop {
        let f = IwasawaFactors {
            s: rng.random_range(0.5..4.0),
            w: (0..n - 1).map(|_| rng.random_range(0.5..4.0)).collect(),
            y: (0..upper_len(n)).map(|_| rng.random_range(-2.0..3.0)).collect(),
            k: random_orthogonal(n, rng),
        };
        let p = random_index(n, 2, rng);
        let m = &f.k * f.triangular() * p.to_matrix() * f.s;
        if let Ok(g) = GroupElement::from_matrix(m) {
            return g;
        }
    }
}

/// Random matrix with entries uniform in `[−2, 2]`, rejected when
/// `|det| < 10⁻³`.
pub fn sample_uniform_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupElement {
    loop {
        let v: Vec<f64> = (0..n * n).map(|_| rng.random_range(-2.0..2.0)).collect();
        if let Ok(g) = GroupElement::from_row_slice(n, &v) {
            if g.det().abs() >= 1e-3 {
                return g;
            }
        }
    }
}

/// Outcome of [`coverage_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub n: usize,
    pub samples: usize,
    pub failures: usize,
    pub boundary_rejections: usize,
    /// Row-major entries of up to ten failing samples.
    pub failure_examples: Vec<Vec<f64>>,
}

#[derive(Default)]
struct CoveragePart {
    failures: usize,
    rejected: usize,
    examples: Vec<Vec<f64>>,
}

/// Checks, on random matrices, that the assigned tile round-trips, that
/// `a·p⁻¹ ∈ F` for the assigned `p`, and that `a·p′⁻¹ ∉ F` for every other
/// candidate `p′` of the widest overlap neighborhood.
pub fn coverage_check(n: usize, samples: usize, seed: u64, eta: f64) -> Result<CoverageReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let parts = crate::sampling::map_chunks(samples, seed, |range, rng| {
        let mut part = CoveragePart::default();
        for _ in range {
            let a = sample_uniform_matrix(n, rng);
            match coverage_sample(&a, eta) {
                Ok(true) => {}
                Ok(false) => {
                    part.failures += 1;
                    if part.examples.len() < 10 {
                        part.examples.push(a.to_row_vec());
                    }
                }
                Err(_) => part.rejected += 1,
            }
        }
        part
    });
    let mut report = CoverageReport {
        n,
        samples,
        failures: 0,
        boundary_rejections: 0,
        failure_examples: vec![],
    };
    for part in parts {
        report.failures += part.failures;
        report.boundary_rejections += part.rejected;
        for e in part.examples {
            if report.failure_examples.len() < 10 {
                report.failure_examples.push(e);
            }
        }
    }
    Ok(report)
}

/// `Ok(true)` on success, `Ok(false)` on a violated property, `Err` when the
/// sample lies within the boundary tolerance.
fn coverage_sample(a: &GroupElement, eta: f64) -> Result<bool> {
    let t = tile_assign(a)?;
    if t.boundary {
        return Err(Error::Boundary);
    }
    let back = tile_point(&t.index, &t.coords)?;
    let scale = a.matrix().amax();
    if (back.matrix() - a.matrix()).amax() > 1e-9 * scale {
        return Ok(false);
    }
    let again = tile_assign(&back)?;
    if again.index != t.index || again.coords.max_diff(&t.coords) > 1e-9 {
        return Ok(false);
    }
    match membership_translate(a, &t.index, RegionKind::Fundamental, eta)? {
        Membership::Inside => {}
        Membership::Boundary => return Err(Error::Boundary),
        Membership::Outside => return Ok(false),
    }
    let f = iwasawa_decompose(a)?;
    let (_, hits) = crate::overlap::enumerate_overlaps(&f, 0.5, eta)?;
    if !hits.iter().any(|h| h.index == t.index) {
        return Ok(false);
    }
    for h in hits.iter().filter(|h| h.index != t.index) {
        match membership_translate(a, &h.index, RegionKind::Fundamental, eta)? {
            Membership::Outside => {}
            Membership::Boundary => return Err(Error::Boundary),
            Membership::Inside => return Ok(false),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::iwasawa_recompose;
    use crate::sampling::chunk_rng;

    fn ge(n: usize, v: &[f64]) -> GroupElement {
        GroupElement::from_row_slice(n, v).unwrap()
    }

    fn coords2(s: f64, w: f64, y: f64) -> IwasawaFactors {
        IwasawaFactors {
            s,
            k: DMatrix::identity(2, 2),
            w: vec![w],
            y: vec![y],
        }
    }

    #[test]
    fn index_matrix_layout() {
        let p = TileIndex {
            lambda: 1,
            kappa: vec![2, -1],
            mu: vec![3, -2, 5],
        };
        let m = p.to_matrix();
        // κ₃ = −1
        assert_eq!(m[(0, 0)], 2f64.powi(3));
        assert_eq!(m[(1, 1)], 2f64.powi(0));
        assert_eq!(m[(2, 2)], 2f64.powi(0));
        assert_eq!(m[(0, 1)], 2f64.powi(0) * 3.0);
        assert_eq!(m[(1, 2)], 2f64.powi(0) * -2.0);
        assert_eq!(m[(0, 2)], 2f64.powi(0) * 5.0);
        assert_eq!(m[(1, 0)], 0.0);
        let prod = &m * p.inverse_matrix();
        assert!((prod - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn assign_identity() {
        for n in 2..=4 {
            let t = tile_assign(&GroupElement::identity(n)).unwrap();
            assert_eq!(t.index, TileIndex::identity(n));
            assert_eq!(t.coords.s, 1.0);
            assert!(t.coords.w.iter().all(|&w| w == 1.0));
            assert!(t.coords.y.iter().all(|&y| y.abs() < 1e-15));
            // s = 1 exactly sits on the tile boundary
            assert!(t.boundary);
        }
    }

    #[test]
    fn assign_diagonal_example() {
        let a = ge(2, &[4.0, 0.0, 0.0, 1.0]);
        let t = tile_assign(&a).unwrap();
        assert_eq!(
            t.index,
            TileIndex {
                lambda: 1,
                kappa: vec![1],
                mu: vec![0]
            }
        );
        assert!((t.coords.s - 1.0).abs() < 1e-14);
        assert!((t.coords.w[0] - 1.0).abs() < 1e-14);
        assert!(t.coords.y[0].abs() < 1e-14);
        assert!((&t.coords.k - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        let back = tile_point(&t.index, &t.coords).unwrap();
        assert!((back.matrix() - a.matrix()).amax() < 1e-14);
    }

    #[test]
    fn assign_shear_example() {
        let a = ge(2, &[1.0, 1.5, 0.0, 1.0]);
        let t = tile_assign(&a).unwrap();
        assert_eq!(
            t.index,
            TileIndex {
                lambda: 0,
                kappa: vec![0],
                mu: vec![1]
            }
        );
        assert!((t.coords.y[0] - 0.5).abs() < 1e-14);
        let back = tile_point(&t.index, &t.coords).unwrap();
        assert!((back.matrix() - a.matrix()).amax() < 1e-14);
    }

    #[test]
    fn recovers_known_tile_n3() {
        let mut rng = chunk_rng(21, 0);
        for _ in 0..500 {
            let c = random_coords(3, &mut rng);
            let p = random_index(3, 3, &mut rng);
            let a = tile_point(&p, &c).unwrap();
            let t = tile_assign(&a).unwrap();
            assert_eq!(t.index, p);
            assert!(t.coords.max_diff(&c) < 1e-9);
        }
    }

    #[test]
    fn determinant_bookkeeping() {
        let mut rng = chunk_rng(22, 0);
        for n in 2..=3 {
            for _ in 0..200 {
                let c = random_coords(n, &mut rng);
                let p = random_index(n, 3, &mut rng);
                let a = tile_point(&p, &c).unwrap();
                let expected = (c.s * 2f64.powi(p.lambda as i32)).powi(n as i32);
                assert!((a.det().abs() - expected).abs() <= 1e-10 * expected);
            }
        }
    }

    #[test]
    fn boundary_sample_is_flagged() {
        // s·2^λ = 2 exactly
        let a = ge(2, &[2.0, 0.3, 0.0, 2.0]);
        assert!(tile_assign(&a).unwrap().boundary);
    }

    #[test]
    fn overflow_guard() {
        let a = ge(2, &[64.0, 0.0, 0.0, 64.0]);
        assert!(matches!(
            tile_assign_guarded(&a, 4),
            Err(Error::TileRange { value: 6, guard: 4 })
        ));
        assert!(tile_assign_guarded(&a, 6).is_ok());
        let p = TileIndex {
            lambda: 600,
            kappa: vec![0],
            mu: vec![0],
        };
        let c = random_coords(2, &mut chunk_rng(1, 0));
        assert!(matches!(tile_point(&p, &c), Err(Error::TileRange { .. })));
    }

    #[test]
    fn coverage_small_runs() {
        for n in 2..=3 {
            let r = coverage_check(n, 2000, 3, DEFAULT_ETA).unwrap();
            assert_eq!(r.failures, 0, "{:?}", r.failure_examples);
            assert!(r.boundary_rejections < 20);
        }
    }

    #[test]
    fn membership_examples() {
        let all = [
            RegionKind::Fundamental,
            RegionKind::Closure,
            RegionKind::Open { eps: 0.2 },
        ];
        for r in all {
            assert_eq!(membership_coords(&coords2(1.5, 1.5, 0.5), r, 0.0), Membership::Inside);
        }
        let edge = coords2(2.0, 1.5, 0.5);
        assert_eq!(membership_coords(&edge, all[0], 0.0), Membership::Outside);
        assert_eq!(membership_coords(&edge, all[1], 0.0), Membership::Inside);
        assert_eq!(membership_coords(&edge, all[2], 0.0), Membership::Inside);
        assert_eq!(membership_coords(&edge, all[0], 1e-9), Membership::Boundary);

        let eps = 0.2;
        let open_edge = coords2(1.0 - eps, 1.5, 0.5);
        assert_eq!(
            membership_coords(&open_edge, RegionKind::Open { eps }, 0.0),
            Membership::Outside
        );
        // far outside in one coordinate wins over a boundary hit in another
        assert_eq!(
            membership_coords(&coords2(2.0, 5.0, 0.5), RegionKind::Fundamental, 1e-9),
            Membership::Outside
        );
    }

    #[test]
    fn membership_through_matrices() {
        let f = coords2(1.5, 1.5, 0.5);
        let a = iwasawa_recompose(&f).unwrap();
        assert_eq!(
            membership(&a, RegionKind::Fundamental, DEFAULT_ETA).unwrap(),
            Membership::Inside
        );
        let p = TileIndex {
            lambda: 1,
            kappa: vec![-1],
            mu: vec![2],
        };
        let b = a.mul(&p.to_element().unwrap()).unwrap();
        assert_eq!(
            membership_translate(&b, &p, RegionKind::Fundamental, DEFAULT_ETA).unwrap(),
            Membership::Inside
        );
        assert!(RegionKind::open(0.6).is_err());
        assert!(RegionKind::open(0.0).is_err());
        assert!(RegionKind::open(0.5).is_ok());
    }

    #[test]
    fn region_monotonicity() {
        let mut rng = chunk_rng(23, 0);
        for _ in 0..5000 {
            let f = IwasawaFactors {
                s: rng.random_range(0.5..2.6),
                w: vec![rng.random_range(0.5..2.6), rng.random_range(0.5..2.6)],
                y: (0..3).map(|_| rng.random_range(-0.6..1.6)).collect(),
                k: DMatrix::identity(3, 3),
            };
            let eps: f64 = rng.random_range(1e-3..=0.5);
            let inf = membership_coords(&f, RegionKind::Fundamental, 0.0);
            let inc = membership_coords(&f, RegionKind::Closure, 0.0);
            let ino = membership_coords(&f, RegionKind::Open { eps }, 0.0);
            if inf == Membership::Inside {
                assert_eq!(inc, Membership::Inside);
            }
            if inc == Membership::Inside {
                assert_eq!(ino, Membership::Inside);
            }
        }
    }

    #[test]
    fn closure_points_have_nearby_fundamental_points() {
        let mut rng = chunk_rng(24, 0);
        let delta = 1e-6;
        for _ in 0..2000 {
            // closed box, endpoints hit with positive probability
            let pick = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| match rng.random_range(0..4) {
                0 => lo,
                1 => hi,
                _ => rng.random_range(lo..=hi),
            };
            let f = IwasawaFactors {
                s: pick(&mut rng, 1.0, 2.0),
                w: vec![pick(&mut rng, 1.0, 2.0)],
                y: vec![pick(&mut rng, 0.0, 1.0)],
                k: random_orthogonal(2, &mut rng),
            };
            assert_eq!(membership_coords(&f, RegionKind::Closure, 0.0), Membership::Inside);
            let g = IwasawaFactors {
                s: f.s.min(2.0 - delta),
                w: vec![f.w[0].min(2.0 - delta)],
                y: vec![f.y[0].min(1.0 - delta)],
                k: f.k.clone(),
            };
            assert_eq!(membership_coords(&g, RegionKind::Fundamental, 0.0), Membership::Inside);
            let a = iwasawa_recompose(&f).unwrap();
            let b = iwasawa_recompose(&g).unwrap();
            assert!((a.matrix() - b.matrix()).amax() < 10.0 * delta);
        }
    }
}
