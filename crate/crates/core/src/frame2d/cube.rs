//! The cube `R` in `M₂(R) ≅ R⁴` and the dual lattice `J`.
//!
//! Entries are flattened row-major: `x₁ = b₁₁, x₂ = b₁₂, x₃ = b₂₁,
//! x₄ = b₂₂`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Axis-aligned box `∏ (lo_k, hi_k)` in flattened entry coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeR {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl Default for CubeR {
    fn default() -> Self {
        Self {
            lo: [-7.0, -10.0, -7.0, -10.0],
            hi: [7.0, 10.0, 7.0, 10.0],
        }
    }
}

impl CubeR {
    pub fn new(lo: [f64; 4], hi: [f64; 4]) -> Result<Self> {
        if (0..4).any(|k| !(hi[k] > lo[k])) {
            return Err(Error::InvalidParameter(format!(
                "cube bounds must satisfy lo < hi, got {lo:?} / {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn widths(&self) -> [f64; 4] {
        std::array::from_fn(|k| self.hi[k] - self.lo[k])
    }

    /// `|R|`.
    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    /// Strict containment of a 2×2 matrix.
    pub fn contains(&self, b: &DMatrix<f64>) -> bool {
        let x = flatten(b);
        (0..4).all(|k| x[k] > self.lo[k] && x[k] < self.hi[k])
    }
}

/// Row-major flattening of a 2×2 matrix.
pub fn flatten(b: &DMatrix<f64>) -> [f64; 4] {
    [b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]]
}

pub fn unflatten(x: &[f64; 4]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, x)
}

/// Index `(m₁, m₂, m₃, m₄)` of a lattice point of `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeIndex {
    pub m: [i64; 4],
}

impl LatticeIndex {
    /// Frequency matrix `γ` with `tr(γ·y) = Σ_k m_k·x_k / width_k`.
    ///
    /// `tr(γy) = Σ γ_ij y_ji`, so the step paired with `x₂ = y₁₂` sits at
    /// `γ₂₁` and the one paired with `x₃ = y₂₁` at `γ₁₂`.
    pub fn frequency(&self, cube: &CubeR) -> DMatrix<f64> {
        let w = cube.widths();
        let l: [f64; 4] = std::array::from_fn(|k| self.m[k] as f64 / w[k]);
        DMatrix::from_row_slice(2, 2, &[l[0], l[2], l[1], l[3]])
    }

    /// The same quadruple placed without the transpose, `γ_ij = m/L_ij`.
    /// Not an orthonormal family on `R`; kept for the negative test.
    pub fn frequency_untransposed(&self, cube: &CubeR) -> DMatrix<f64> {
        let w = cube.widths();
        let l: [f64; 4] = std::array::from_fn(|k| self.m[k] as f64 / w[k]);
        DMatrix::from_row_slice(2, 2, &l)
    }
}

/// `χ_γ(y) = exp(2πi·tr(γ·y))`.
pub fn character(gamma: &DMatrix<f64>, y: &DMatrix<f64>) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (gamma * y).trace())
}

/// `⟨e_γ, e_γ′⟩` on `R` by Gauss–Legendre quadrature. The integrand
/// factors over the four entries, so each factor is a 1-D integral split
/// into unit panels.
pub fn character_inner_product(
    cube: &CubeR,
    gamma: &DMatrix<f64>,
    gamma_prime: &DMatrix<f64>,
    rule: &gauss_quad::GaussLegendre,
) -> Complex64 {
    let d = gamma - gamma_prime;
    // coefficient of x_k in tr(d·y): x₁=y₁₁↔d₁₁, x₂=y₁₂↔d₂₁, x₃=y₂₁↔d₁₂, x₄=y₂₂↔d₂₂
    let c = [d[(0, 0)], d[(1, 0)], d[(0, 1)], d[(1, 1)]];
    let mut acc = Complex64::new(1.0 / cube.volume(), 0.0);
    for (k, &ck) in c.iter().enumerate() {
        let (lo, hi) = (cube.lo[k], cube.hi[k]);
        let panels = (hi - lo).ceil() as usize;
        let h = (hi - lo) / panels as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            re += rule.integrate(a, a + h, |x| (2.0 * PI * ck * x).cos());
            im += rule.integrate(a, a + h, |x| (2.0 * PI * ck * x).sin());
        }
        acc *= Complex64::new(re, im);
    }
    acc
}

/// Largest deviation `|⟨e_γ, e_γ′⟩ − δ|` over the given index pairs.
pub fn orthonormality_defect(
    cube: &CubeR,
    pairs: &[(LatticeIndex, LatticeIndex)],
    transposed_convention: bool,
) -> f64 {
    let rule = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(64).unwrap());
    pairs
        .iter()
        .map(|(a, b)| {
            let (ga, gb) = if transposed_convention {
                (a.frequency(cube), b.frequency(cube))
            } else {
                (a.frequency_untransposed(cube), b.frequency_untransposed(cube))
            };
            let ip = character_inner_product(cube, &ga, &gb, &rule);
            let delta = if a == b { 1.0 } else { 0.0 };
            (ip - delta).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_volume() {
        assert_eq!(CubeR::default().volume(), 78400.0);
        assert_eq!(CubeR::default().widths(), [14.0, 20.0, 14.0, 20.0]);
    }

    #[test]
    fn trace_pairing() {
        let cube = CubeR::default();
        let g = LatticeIndex { m: [1, 2, 3, 4] }.frequency(&cube);
        let x = [0.3, -1.2, 2.5, 0.7];
        let y = unflatten(&x);
        let expected: f64 = (0..4).map(|k| [1.0, 2.0, 3.0, 4.0][k] * x[k] / cube.widths()[k]).sum();
        assert!(((&g * &y).trace() - expected).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_only_with_trace_pairing() {
        let cube = CubeR::default();
        let pairs = vec![
            (LatticeIndex { m: [0, 0, 1, 0] }, LatticeIndex { m: [0, 1, 0, 0] }),
            (LatticeIndex { m: [1, 0, 0, 0] }, LatticeIndex { m: [1, 0, 0, 0] }),
            (LatticeIndex { m: [2, -1, 3, 0] }, LatticeIndex { m: [2, -1, 4, 0] }),
        ];
        assert!(orthonormality_defect(&cube, &pairs, true) < 1e-8);
        assert!(orthonormality_defect(&cube, &pairs, false) > 1e-3);
    }

    #[test]
    fn containment() {
        let c = CubeR::default();
        assert!(c.contains(&unflatten(&[6.9, 9.9, -6.9, -9.9])));
        assert!(!c.contains(&unflatten(&[7.0, 0.0, 0.0, 0.0])));
        assert!(CubeR::new([0.0; 4], [1.0, 1.0, 0.0, 1.0]).is_err());
    }
}
