//! Grids and Gaussian test signals for the frame demo.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cube::flatten;
use super::signal::{GridAxis, SpectralSignal};
use crate::error::{Error, Result};
use crate::group::{random_orthogonal, GroupElement};
use crate::tiling::{
    membership_translate, tile_assign, tile_point, Membership, RegionKind, TileCoords, TileIndex,
};

/// Point counts and spacings of a uniform grid; the origin is placed per
/// signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: [usize; 4],
    pub spacings: [f64; 4],
}

impl Default for GridSpec {
    /// 32 points per axis with spacings `14·2⁻³` and `2⁻¹`; every tile
    /// with `λ + κ ≥ −3` and `λ − κ ≥ −2` is compatible with this grid.
    fn default() -> Self {
        Self {
            counts: [32; 4],
            spacings: [1.75, 0.5, 1.75, 0.5],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for k in 0..4 {
            if self.counts[k] < 2 || !(self.spacings[k] > 0.0) || !self.spacings[k].is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "grid axis {k} needs at least two points and a positive spacing"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axes centered on `center`, shifted by `jitter` cells (each in
    /// `[−½, ½)`) so grid points avoid exact dyadic boundaries.
    pub fn axes(&self, center: [f64; 4], jitter: [f64; 4]) -> Result<[GridAxis; 4]> {
        self.validate()?;
        Ok(std::array::from_fn(|k| {
            let h = self.spacings[k];
            let half = (self.counts[k] as f64 - 1.0) / 2.0;
            GridAxis::from_spacing(center[k] + (jitter[k] - half) * h, h, self.counts[k])
        }))
    }
}

/// Where a test signal is allowed to be nonzero, besides the Gaussian
/// cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SupportSpec {
    /// Points whose tile shares `λ` and `κ` with the bump's tile.
    Band,
    /// Points inside `F_o(ε)·p₀`.
    Tile { eps: f64 },
    /// Only the Gaussian cutoff.
    Ball,
}

/// `f̂(b) = exp(−|b − b₀|²/2σ²)·exp(2πi⟨ξ, b⟩)`, cut off at `cutoff·σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub tile: TileIndex,
    pub center: [f64; 4],
    pub sigma: f64,
    pub cutoff: f64,
    pub modulation: [f64; 4],
    pub support: SupportSpec,
}

impl GaussianBump {
    /// Bump centered at an interior point of tile `p0`: `s, w ∈ [1.25,
    /// 1.75]`, `y ∈ [¼, ¾]`, random `k`.
    pub fn random<R: Rng + ?Sized>(
        p0: &TileIndex,
        sigma: f64,
        support: SupportSpec,
        rng: &mut R,
    ) -> Result<Self> {
        if p0.n() != 2 {
            return Err(Error::Unsupported("test signals live on 2×2 matrices".into()));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let coords = TileCoords {
            s: rng.random_range(1.25..1.75),
            w: vec![rng.random_range(1.25..1.75)],
            y: vec![rng.random_range(0.25..0.75)],
            k: random_orthogonal(2, rng),
        };
        let b = tile_point(p0, &coords)?;
        let c = flatten(b.matrix());
        Ok(Self {
            tile: p0.clone(),
            center: c,
            sigma,
            cutoff: 6.0,
            modulation: std::array::from_fn(|_| rng.random_range(-0.5..0.5)),
            support,
        })
    }

    /// Value at `x` ignoring the support restriction.
    pub fn gaussian(&self, x: &[f64; 4]) -> Option<Complex64> {
        let r2: f64 = (0..4).map(|k| (x[k] - self.center[k]).powi(2)).sum();
        if r2 > (self.cutoff * self.sigma).powi(2) {
            return None;
        }
        let phase: f64 = (0..4).map(|k| self.modulation[k] * x[k]).sum();
        Some(Complex64::from_polar((-r2 / (2.0 * self.sigma * self.sigma)).exp(), 2.0 * PI * phase))
    }

    fn supported(&self, x: &[f64; 4], eta: f64) -> Result<bool> {
        let b = match GroupElement::from_row_slice(2, x) {
            Ok(b) => b,
            Err(Error::Singular { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(match self.support {
            SupportSpec::Ball => true,
            SupportSpec::Band => {
                let a = tile_assign(&b)?;
                !a.boundary && a.index.lambda == self.tile.lambda && a.index.kappa == self.tile.kappa
            }
            SupportSpec::Tile { eps } => {
                membership_translate(&b, &self.tile, RegionKind::open(eps)?, eta)? == Membership::Inside
            }
        })
    }

    /// Samples on the given grid.
    pub fn sample(&self, axes: [GridAxis; 4], eta: f64) -> Result<SpectralSignal> {
        let mut f = SpectralSignal::zeros(axes)?;
        let values: Vec<Result<Complex64>> = (0..f.len())
            .into_par_iter()
            .map(|l| {
                let x = f.point(l);
                match self.gaussian(&x) {
                    Some(v) if self.supported(&x, eta)? => Ok(v),
                    _ => Ok(Complex64::new(0.0, 0.0)),
                }
            })
            .collect();
        for (z, v) in f.data.iter_mut().zip(values) {
            *z = v?;
        }
        Ok(f)
    }

    /// Samples on a grid of shape `spec` centered on the bump with a
    /// random sub-cell shift.
    pub fn sample_centered<R: Rng + ?Sized>(
        &self,
        spec: &GridSpec,
        eta: f64,
        rng: &mut R,
    ) -> Result<SpectralSignal> {
        let jitter = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
        self.sample(spec.axes(self.center, jitter)?, eta)
    }
}

/// Deterministic generator for demo and test signals.
pub fn signal_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
