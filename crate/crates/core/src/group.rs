//! Matrices of GL_n(R), the affine group M_n(R) ⋊ GL_n(R), the Iwasawa
//! factorization `a = s·k·w·y`, and Haar-measure evaluation in Iwasawa
//! coordinates.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;

/// Relative factor used for the default singularity threshold.
pub const DET_TOL_FACTOR: f64 = 1e-12;

/// Row-major index of the strictly upper-triangular entry `(i, j)`, `i < j`,
/// inside a packed vector of length `n(n-1)/2`.
///
/// Entries are packed diagonal by diagonal: first the super-diagonal
/// `(0,1), (1,2), …`, then `(0,2), (1,3), …`. This is the order in which the
/// tile recursion visits them.
pub fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    let d = j - i;
    // entries on diagonals 1..d
    let before: usize = (1..d).map(|k| n - k).sum();
    before + i
}

/// Iterates `(i, j)` over the strictly upper triangle in packed order.
pub fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n).flat_map(move |d| (0..n - d).map(move |i| (i, i + d)))
}

/// Number of strictly upper-triangular entries.
pub fn upper_len(n: usize) -> usize {
    n * (n - 1) / 2
}

/// An invertible real `n×n` matrix with its determinant cached.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    m: DMatrix<f64>,
    det: f64,
}

impl GroupElement {
    /// Builds an element from row-major entries.
    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 2, got {}",
                m.nrows()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let det = m.determinant();
        let tol = det_tol(&m);
        if !(det.abs() > tol) {
            return Err(Error::Singular { det, tol });
        }
        Ok(Self { m, det })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
            det: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Row-major copy of the entries.
    pub fn to_row_vec(&self) -> Vec<f64> {
        self.m.transpose().as_slice().to_vec()
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        check_dims(self.n(), other.n())?;
        GroupElement::from_matrix(&self.m * &other.m)
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let inv = self
            .m
            .clone()
            .try_inverse()
            .ok_or(Error::Singular {
                det: self.det,
                tol: det_tol(&self.m),
            })?;
        GroupElement::from_matrix(inv)
    }

    /// `self · other⁻¹`, the right quotient used for tile membership.
    pub fn right_div(&self, other: &GroupElement) -> Result<GroupElement> {
        self.mul(&other.inverse()?)
    }
}

/// Default singularity threshold: `1e-12 · max|entry|ⁿ`.
pub fn det_tol(m: &DMatrix<f64>) -> f64 {
    let max = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    DET_TOL_FACTOR * max.powi(m.nrows() as i32)
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// An affine map `y ↦ h·y + x` of M_n(R).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineElement {
    pub x: DMatrix<f64>,
    pub h: GroupElement,
}

impl AffineElement {
    pub fn new(x: DMatrix<f64>, h: GroupElement) -> Result<Self> {
        if x.nrows() != h.n() || x.ncols() != h.n() {
            return Err(Error::DimensionMismatch {
                expected: h.n(),
                found: x.nrows().max(x.ncols()),
            });
        }
        Ok(Self { x, h })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: DMatrix::zeros(n, n),
            h: GroupElement::identity(n),
        }
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    /// `[x₁, h₁]·[x₂, h₂] = [x₁ + h₁x₂, h₁h₂]`.
    pub fn multiply(&self, other: &AffineElement) -> Result<AffineElement> {
        check_dims(self.n(), other.n())?;
        let x = &self.x + self.h.matrix() * &other.x;
        let h = self.h.mul(&other.h)?;
        Ok(AffineElement { x, h })
    }

    /// `[x, h]⁻¹ = [−h⁻¹x, h⁻¹]`.
    pub fn inverse(&self) -> Result<AffineElement> {
        let h_inv = self.h.inverse()?;
        let x = -(h_inv.matrix() * &self.x);
        Ok(AffineElement { x, h: h_inv })
    }

    /// Applies the map to a point of M_n(R).
    pub fn apply(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.h.matrix() * y + &self.x
    }
}

/// The unique factorization `a = s·k·w·y` of an invertible matrix.
///
/// `w` holds `w₁..w_{n−1}`; the last diagonal entry is the reciprocal of
/// their product. `y` holds the strictly upper entries in the packed order of
/// [`upper_index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IwasawaFactors {
    pub s: f64,
    #[serde(with = "matrix_rows")]
    pub k: DMatrix<f64>,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
}

impl IwasawaFactors {
    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    pub fn y_at(&self, i: usize, j: usize) -> f64 {
        self.y[upper_index(self.n(), i, j)]
    }

    /// Full diagonal `w₁..w_n` with `w_n = ∏ w_i⁻¹`.
    pub fn full_diagonal(&self) -> Vec<f64> {
        let mut d = self.w.clone();
        d.push(1.0 / self.w.iter().product::<f64>());
        d
    }

    /// The upper-triangular factor `w·y` (determinant one).
    pub fn triangular(&self) -> DMatrix<f64> {
        let n = self.n();
        let d = self.full_diagonal();
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = d[i];
        }
        for (i, j) in upper_pairs(n) {
            t[(i, j)] = d[i] * self.y_at(i, j);
        }
        t
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.k.ncols() != n || self.w.len() + 1 != n || self.y.len() != upper_len(n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.w.len() + 1,
            });
        }
        if !(self.s > 0.0) || self.w.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter(
                "scale and diagonal factors must be positive".into(),
            ));
        }
        if orthogonality_defect(&self.k) > 1e-10 {
            return Err(Error::InvalidParameter("k is not orthogonal".into()));
        }
        Ok(())
    }
}

/// `max |k·kᵀ − I|`.
pub fn orthogonality_defect(k: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    let g = k * k.transpose() - DMatrix::<f64>::identity(n, n);
    g.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Relative pivot threshold for the triangular factor.
const PIVOT_TOL: f64 = 1e-13;

/// Factors `a = s·k·w·y`.
///
/// The scale `s = |det a|^{1/n}` is divided out first; the remainder is
/// orthogonalized with the triangular diagonal forced positive, so the sign
/// and reflection parts land in `k` (which may have determinant −1).
pub fn iwasawa_decompose(a: &GroupElement) -> Result<IwasawaFactors> {
    let n = a.n();
    let s = a.det().abs().powf(1.0 / n as f64);
    let scaled = a.matrix() / s;
    let qr = scaled.qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let max_r = r.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    for i in 0..n {
        if r[(i, i)].abs() <= PIVOT_TOL * max_r {
            return Err(Error::Singular {
                det: a.det(),
                tol: det_tol(a.matrix()),
            });
        }
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    let w: Vec<f64> = (0..n - 1).map(|i| r[(i, i)]).collect();
    let y: Vec<f64> = upper_pairs(n).map(|(i, j)| r[(i, j)] / r[(i, i)]).collect();
    Ok(IwasawaFactors { s, k: q, w, y })
}

/// Inverse of [`iwasawa_decompose`].
pub fn iwasawa_recompose(f: &IwasawaFactors) -> Result<GroupElement> {
    f.validate()?;
    GroupElement::from_matrix(&f.k * f.triangular() * f.s)
}

/// Haar density `s⁻¹ ∏ w_i^{2(n−i)−1}` in Iwasawa coordinates, with the
/// orthogonal factor carrying normalized Haar measure.
pub fn haar_density(f: &IwasawaFactors) -> f64 {
    haar_density_coords(f.n(), f.s, &f.w)
}

pub fn haar_density_coords(n: usize, s: f64, w: &[f64]) -> f64 {
    let mut d = 1.0 / s;
    for (i, wi) in w.iter().enumerate() {
        // 1-based exponent 2(n−i)−1
        d *= wi.powi(2 * (n - i - 1) as i32 - 1);
    }
    d
}

/// Samples an orthogonal matrix from normalized Haar measure on O_n.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
        let qr = g.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < 1e-12) {
            continue;
        }
        let mut q = qr.q();
        for i in 0..n {
            if r[(i, i)] < 0.0 {
                q.column_mut(i).neg_mut();
            }
        }
        if rng.random_bool(0.5) {
            q.column_mut(0).neg_mut();
        }
        return q;
    }
}

/// A box in Iwasawa coordinates `(s, w₁..w_{n−1}, y_{i<j})`; closed-open
/// conventions do not matter for measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub s: (f64, f64),
    pub w: Vec<(f64, f64)>,
    pub y: Vec<(f64, f64)>,
}

impl CoordBox {
    /// The box `s, w_i ∈ [lo, hi]`, `y ∈ [ylo, yhi]`.
    pub fn uniform(n: usize, scale: (f64, f64), shear: (f64, f64)) -> Self {
        Self {
            s: scale,
            w: vec![scale; n - 1],
            y: vec![shear; upper_len(n)],
        }
    }

    pub fn n(&self) -> usize {
        self.w.len() + 1
    }

    fn axes(&self) -> impl Iterator<Item = &(f64, f64)> {
        std::iter::once(&self.s).chain(self.w.iter()).chain(self.y.iter())
    }

    pub fn volume(&self) -> f64 {
        self.axes().map(|(lo, hi)| (hi - lo).max(0.0)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.axes().any(|(lo, hi)| !(hi > lo))
    }

    /// Draws coordinates uniformly in the box, with `k` from Haar measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IwasawaFactors {
        let n = self.n();
        let mut u = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();
        let s = u(self.s);
        let w = self.w.iter().map(|&b| u(b)).collect();
        let y = self.y.iter().map(|&b| u(b)).collect();
        let k = random_orthogonal(n, rng);
        IwasawaFactors { s, k, w, y }
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Whether `target` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

/// Running sums for a sample mean and variance; merges associatively.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    /// Estimate of `scale · E[X]` with standard error.
    pub fn estimate(&self, scale: f64) -> McEstimate {
        if self.count == 0 {
            return McEstimate {
                value: 0.0,
                std_error: 0.0,
                samples: 0,
            };
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            value: scale * mean,
            std_error: scale * (var / n).sqrt(),
            samples: self.count,
        }
    }
}

/// Monte-Carlo Haar measure of `{a : coords(a) ∈ region, pred(a)}`.
///
/// Coordinates are drawn uniformly in `region` and weighted by the Haar
/// density; the orthogonal factor is drawn from normalized Haar measure, so
/// the `k`-marginal contributes a factor of one.
pub fn haar_measure_mc<P>(region: &CoordBox, samples: usize, seed: u64, pred: P) -> Result<McEstimate>
where
    P: Fn(&IwasawaFactors) -> bool + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    if region.is_empty() {
        return Ok(McEstimate {
            value: 0.0,
            std_error: 0.0,
            samples,
        });
    }
    let n = region.n();
    let parts = sampling::map_chunks(samples, seed, |range, rng| {
        let mut m = Moments::default();
        for _ in range {
            let f = region.sample(rng);
            let v = if pred(&f) {
                haar_density_coords(n, f.s, &f.w)
            } else {
                0.0
            };
            m.push(v);
        }
        m
    });
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(total.estimate(region.volume()))
}

/// Serde helper storing a square matrix as nested rows.
pub(crate) mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("matrix must be square"));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::chunk_rng;

    fn ge(n: usize, v: &[f64]) -> GroupElement {
        GroupElement::from_row_slice(n, v).unwrap()
    }

    fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m
    }

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn packed_upper_order() {
        let pairs: Vec<_> = upper_pairs(4).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3), (0, 2), (1, 3), (0, 3)]);
        for (idx, (i, j)) in pairs.into_iter().enumerate() {
            assert_eq!(upper_index(4, i, j), idx);
        }
    }

    #[test]
    fn singular_rejected() {
        assert!(matches!(
            GroupElement::from_row_slice(2, &[1.0, 0.0, 0.0, 0.0]),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            GroupElement::from_row_slice(2, &[1.0, 2.0, 2.0, 4.0]),
            Err(Error::Singular { .. })
        ));
        assert!(GroupElement::from_row_slice(2, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn affine_identity_and_inverse() {
        let id = AffineElement::identity(2);
        let a = AffineElement::new(unit(2, 0, 0), ge(2, &[2.0, 0.0, 0.0, 2.0])).unwrap();
        assert_eq!(id.multiply(&a).unwrap(), a);

        // [e11, 2I]·[e11, I] = [e11 + 2e11, 2I]
        let b = AffineElement::new(unit(2, 0, 0), GroupElement::identity(2)).unwrap();
        let ab = a.multiply(&b).unwrap();
        assert!(max_diff(&ab.x, &(unit(2, 0, 0) * 3.0)) < 1e-15);
        assert!(max_diff(ab.h.matrix(), &(DMatrix::identity(2, 2) * 2.0)) < 1e-15);

        let inv = a.inverse().unwrap();
        assert!(max_diff(&inv.x, &(unit(2, 0, 0) * -0.5)) < 1e-15);
        assert!(max_diff(inv.h.matrix(), &(DMatrix::identity(2, 2) * 0.5)) < 1e-15);
        let back = a.multiply(&inv).unwrap();
        assert!(max_diff(&back.x, &DMatrix::zeros(2, 2)) < 1e-15);

        let t = AffineElement::new(unit(2, 1, 0) * 3.0, GroupElement::identity(2)).unwrap();
        assert!(max_diff(&t.inverse().unwrap().x, &(unit(2, 1, 0) * -3.0)) < 1e-15);
        assert_eq!(id.inverse().unwrap(), id);
    }

    #[test]
    fn affine_dimension_mismatch() {
        let a = AffineElement::identity(2);
        let b = AffineElement::identity(3);
        assert!(matches!(
            a.multiply(&b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn affine_group_axioms_on_random_triples() {
        let mut rng = chunk_rng(11, 0);
        for _ in 0..1000 {
            let mut draw = || loop {
                let h: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
                let x = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
                if let Ok(h) = GroupElement::from_row_slice(2, &h) {
                    if h.det().abs() > 1e-3 {
                        return AffineElement::new(x, h).unwrap();
                    }
                }
            };
            let (a, b, c) = (draw(), draw(), draw());
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            let scale = 1.0 + left.x.amax() + left.h.matrix().amax();
            assert!(max_diff(&left.x, &right.x) <= 1e-10 * scale);
            assert!(max_diff(left.h.matrix(), right.h.matrix()) <= 1e-10 * scale);
            let e = a.multiply(&a.inverse().unwrap()).unwrap();
            assert!(e.x.amax() < 1e-10 * (1.0 + a.x.amax()) * 1e3);
            assert!(max_diff(e.h.matrix(), &DMatrix::identity(2, 2)) < 1e-10);
        }
    }

    #[test]
    fn decompose_identity() {
        for n in 2..=4 {
            let f = iwasawa_decompose(&GroupElement::identity(n)).unwrap();
            assert!((f.s - 1.0).abs() < 1e-15);
            assert!(max_diff(&f.k, &DMatrix::identity(n, n)) < 1e-15);
            assert!(f.w.iter().all(|w| (w - 1.0).abs() < 1e-15));
            assert!(f.y.iter().all(|y| y.abs() < 1e-15));
        }
    }

    #[test]
    fn decompose_rotation() {
        let rot = ge(2, &[0.0, -1.0, 1.0, 0.0]);
        let f = iwasawa_decompose(&rot).unwrap();
        assert!((f.s - 1.0).abs() < 1e-15);
        assert!(max_diff(&f.k, rot.matrix()) < 1e-15);
        assert!((f.w[0] - 1.0).abs() < 1e-15);
        assert!(f.y[0].abs() < 1e-15);
    }

    #[test]
    fn decompose_diagonal_examples() {
        let f = iwasawa_decompose(&ge(2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((f.s - 2.0).abs() < 1e-14);
        assert!(max_diff(&f.k, &DMatrix::identity(2, 2)) < 1e-14);
        assert!((f.w[0] - 2.0).abs() < 1e-14);
        assert!(f.y[0].abs() < 1e-14);

        let f = iwasawa_decompose(&ge(2, &[-3.0, 0.0, 0.0, 2.0])).unwrap();
        assert!((f.s - 6f64.sqrt()).abs() < 1e-14);
        let k = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(max_diff(&f.k, &k) < 1e-14);
        assert!((f.w[0] - 3.0 / 6f64.sqrt()).abs() < 1e-14);
        assert!((f.w[0] - 1.2247).abs() < 1e-4);
        assert!(f.y[0].abs() < 1e-14);
    }

    #[test]
    fn recompose_examples_roundtrip() {
        for m in [
            vec![0.0, -1.0, 1.0, 0.0],
            vec![4.0, 0.0, 0.0, 1.0],
            vec![-3.0, 0.0, 0.0, 2.0],
        ] {
            let a = ge(2, &m);
            let f = iwasawa_decompose(&a).unwrap();
            let back = iwasawa_recompose(&f).unwrap();
            assert!(max_diff(back.matrix(), a.matrix()) < 1e-14);
            let again = iwasawa_decompose(&back).unwrap();
            assert!((again.s - f.s).abs() < 1e-9);
            assert!(max_diff(&again.k, &f.k) < 1e-9);
        }
    }

    #[test]
    fn haar_density_examples() {
        let f = |n: usize, s: f64, w: Vec<f64>| IwasawaFactors {
            s,
            k: DMatrix::identity(n, n),
            y: vec![0.0; upper_len(n)],
            w,
        };
        assert_eq!(haar_density(&f(2, 1.0, vec![1.0])), 1.0);
        assert!((haar_density(&f(2, 2.0, vec![1.5])) - 0.75).abs() < 1e-15);
        assert!((haar_density(&f(3, 1.0, vec![2.0, 1.0])) - 8.0).abs() < 1e-15);
    }

    #[test]
    fn random_orthogonal_covers_both_components() {
        let mut rng = chunk_rng(3, 0);
        let mut neg = 0;
        for _ in 0..2000 {
            let k = random_orthogonal(3, &mut rng);
            assert!(orthogonality_defect(&k) < 1e-12);
            if k.determinant() < 0.0 {
                neg += 1;
            }
        }
        assert!((800..1200).contains(&neg), "{neg}");
    }

    #[test]
    fn haar_measure_of_fundamental_box() {
        let region = CoordBox::uniform(2, (1.0, 2.0), (0.0, 1.0));
        let est = haar_measure_mc(&region, 200_000, 5, |_| true).unwrap();
        let exact = 1.5 * 2f64.ln();
        assert!(est.agrees_with(exact, 3.0), "{est:?}");

        let empty = CoordBox::uniform(2, (1.0, 1.0), (0.0, 1.0));
        assert_eq!(haar_measure_mc(&empty, 10, 5, |_| true).unwrap().value, 0.0);
        assert!(haar_measure_mc(&region, 0, 5, |_| true).is_err());

        let eps = 0.2;
        let wide = CoordBox::uniform(2, (1.0 - eps, 2.0 + eps), (-eps, 1.0 + eps));
        let est_wide = haar_measure_mc(&wide, 200_000, 5, |_| true).unwrap();
        let exact_wide = (2.2f64 / 0.8).ln() * (2.2f64 * 2.2 - 0.8 * 0.8) / 2.0 * 1.4;
        assert!(est_wide.agrees_with(exact_wide, 3.0));
        assert!(est_wide.value > est.value);
    }

    #[test]
    fn measure_is_reproducible_under_seed() {
        let region = CoordBox::uniform(3, (1.0, 2.0), (0.0, 1.0));
        let a = haar_measure_mc(&region, 5000, 9, |_| true).unwrap();
        let b = haar_measure_mc(&region, 5000, 9, |_| true).unwrap();
        assert_eq!(a, b);
    }
}
