//! Fourier-domain windows `ĝ` with `1_F̄ ≤ ĝ ≤ 1_{F_o(ε)}`, and the
//! admissibility integral `∫ |ĝ(h)|² dh`.
//!
//! Windows are separable in the Iwasawa coordinates `(s, w, y)` and
//! constant in the orthogonal factor.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame2d::cube::CubeR;
use crate::group::{iwasawa_decompose, GroupElement, IwasawaFactors, McEstimate, Moments};
use crate::sampling::map_chunks;
use crate::tiling::check_eps;

/// Default Gauss–Legendre order per panel.
pub const DEFAULT_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// Indicator of the closed box `F̄`.
    Indicator,
    /// Raised-cosine plateau with ramps of width `ε`.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ramp {
    #[default]
    RaisedCosine,
}

/// Window parameters, serialized as `{"kind", "epsilon", "ramp"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub epsilon: f64,
    #[serde(default)]
    pub ramp: Ramp,
}

impl WindowSpec {
    pub fn indicator(epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(Self {
            kind: WindowKind::Indicator,
            epsilon,
            ramp: Ramp::RaisedCosine,
        })
    }

    pub fn smooth(epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(Self {
            kind: WindowKind::Smooth,
            epsilon,
            ramp: Ramp::RaisedCosine,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_eps(self.epsilon)
    }
}

/// Coordinate family a profile applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `s` and `w_i`, plateau `[1, 2]`.
    Scale,
    /// `y_ij`, plateau `[0, 1]`.
    Shear,
}

impl Axis {
    pub fn plateau(self) -> (f64, f64) {
        match self {
            Axis::Scale => (1.0, 2.0),
            Axis::Shear => (0.0, 1.0),
        }
    }
}

/// A separable window in Iwasawa coordinates.
pub trait Window: Sync + Send {
    /// One-dimensional profile on a coordinate of the given family.
    fn profile(&self, axis: Axis, t: f64) -> f64;

    /// Sorted points where the profile is not smooth; the first and last
    /// bound its support.
    fn breakpoints(&self, axis: Axis) -> Vec<f64>;

    /// Constant factor applied to the product of profiles.
    fn amplitude(&self) -> f64 {
        1.0
    }

    fn eval_coords(&self, f: &IwasawaFactors) -> f64 {
        let mut v = self.amplitude() * self.profile(Axis::Scale, f.s);
        for &w in &f.w {
            if v == 0.0 {
                return 0.0;
            }
            v *= self.profile(Axis::Scale, w);
        }
        for &y in &f.y {
            if v == 0.0 {
                return 0.0;
            }
            v *= self.profile(Axis::Shear, y);
        }
        v
    }
}

/// Raised-cosine plateau: 1 on `[lo, hi]`, 0 outside `(lo−ε, hi+ε)`.
pub fn raised_cosine(t: f64, lo: f64, hi: f64, eps: f64) -> f64 {
    if t >= lo && t <= hi {
        1.0
    } else if t <= lo - eps || t >= hi + eps {
        0.0
    } else if t < lo {
        (std::f64::consts::FRAC_PI_2 * (t - lo + eps) / eps).sin().powi(2)
    } else {
        (std::f64::consts::FRAC_PI_2 * (hi + eps - t) / eps).sin().powi(2)
    }
}

impl Window for WindowSpec {
    fn profile(&self, axis: Axis, t: f64) -> f64 {
        let (lo, hi) = axis.plateau();
        match self.kind {
            WindowKind::Indicator => {
                if t >= lo && t <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            WindowKind::Smooth => raised_cosine(t, lo, hi, self.epsilon),
        }
    }

    fn breakpoints(&self, axis: Axis) -> Vec<f64> {
        let (lo, hi) = axis.plateau();
        match self.kind {
            WindowKind::Indicator => vec![lo, hi],
            WindowKind::Smooth => vec![lo - self.epsilon, lo, hi, hi + self.epsilon],
        }
    }
}

/// A window multiplied by a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledWindow<W> {
    pub inner: W,
    pub scale: f64,
}

impl<W: Window> Window for ScaledWindow<W> {
    fn profile(&self, axis: Axis, t: f64) -> f64 {
        self.inner.profile(axis, t)
    }

    fn breakpoints(&self, axis: Axis) -> Vec<f64> {
        self.inner.breakpoints(axis)
    }

    fn amplitude(&self) -> f64 {
        self.scale * self.inner.amplitude()
    }
}

/// `ĝ(a)`; singular input is an error.
pub fn window_eval<W: Window + ?Sized>(window: &W, a: &GroupElement) -> Result<f64> {
    Ok(window.eval_coords(&iwasawa_decompose(a)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdmissibilityMethod {
    /// Gauss–Legendre quadrature in Iwasawa coordinates, normalized
    /// `k`-marginal.
    CoordsQuadrature,
    /// Monte Carlo over matrix entries against `dh / |det h|ⁿ` (n = 2).
    EntryMc,
}

/// Value and error estimate of an admissibility integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub value: f64,
    pub error: f64,
    pub method: AdmissibilityMethod,
}

fn rule(order: usize) -> Result<GaussLegendre> {
    let order = NonZeroUsize::new(order)
        .ok_or_else(|| Error::InvalidParameter("quadrature order must be positive".into()))?;
    Ok(GaussLegendre::new(order))
}

/// `∫ f` over the support of a profile, one panel per breakpoint interval.
fn panel_integral<F: Fn(f64) -> f64>(rule: &GaussLegendre, breaks: &[f64], f: F) -> f64 {
    breaks
        .windows(2)
        .map(|p| rule.integrate(p[0], p[1], &f))
        .sum()
}

/// Quadrature of `|ĝ|²` against the Haar density in Iwasawa coordinates.
/// The integrand factors, so this is a product of one-dimensional rules.
pub fn admissibility_quadrature<W: Window + ?Sized>(window: &W, n: usize, order: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let rule = rule(order)?;
    let sb = window.breakpoints(Axis::Scale);
    let yb = window.breakpoints(Axis::Shear);
    let sq = |axis: Axis, t: f64| window.profile(axis, t).powi(2);
    let mut v = window.amplitude().powi(2);
    v *= panel_integral(&rule, &sb, |s| sq(Axis::Scale, s) / s);
    for i in 1..n {
        let e = (2 * (n - i) - 1) as i32;
        v *= panel_integral(&rule, &sb, |w| sq(Axis::Scale, w) * w.powi(e));
    }
    let shear = panel_integral(&rule, &yb, |y| sq(Axis::Shear, y));
    v *= shear.powi((n * (n - 1) / 2) as i32);
    Ok(v)
}

/// Monte-Carlo integral of `ĝ(h·p⁻¹)² / |det h|²` over the entry box
/// `2^λ·R`, where `p = 2^λ·I`. With `λ = 0` this is the admissibility
/// integral in entry coordinates.
pub fn admissibility_entry_mc<W: Window + ?Sized>(
    window: &W,
    cube: &CubeR,
    lambda: i32,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let scale = 2f64.powi(lambda);
    let lo: [f64; 4] = std::array::from_fn(|k| cube.lo[k] * scale);
    let hi: [f64; 4] = std::array::from_fn(|k| cube.hi[k] * scale);
    let parts = map_chunks(samples, seed, |range, rng| -> Result<Moments> {
        use rand::Rng;
        let mut m = Moments::default();
        for _ in range {
            let x: [f64; 4] = std::array::from_fn(|k| rng.random_range(lo[k]..hi[k]));
            let det = x[0] * x[3] - x[1] * x[2];
            // ĝ vanishes for s < ½, i.e. |det| < ¼·4^λ
            if det.abs() < 0.2 * scale * scale {
                m.push(0.0);
                continue;
            }
            let q = GroupElement::from_row_slice(2, &x.map(|v| v / scale))?;
            let g = window.eval_coords(&iwasawa_decompose(&q)?);
            m.push(g * g / (det * det));
        }
        Ok(m)
    });
    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    let volume: f64 = (0..4).map(|k| hi[k] - lo[k]).product();
    Ok(total.estimate(volume))
}

/// Admissibility integral by the chosen method.
pub fn admissibility_integral<W: Window + ?Sized>(
    window: &W,
    n: usize,
    method: AdmissibilityMethod,
    samples: usize,
    seed: u64,
) -> Result<Admissibility> {
    match method {
        AdmissibilityMethod::CoordsQuadrature => {
            let v = admissibility_quadrature(window, n, DEFAULT_ORDER)?;
            let coarse = admissibility_quadrature(window, n, DEFAULT_ORDER / 2)?;
            Ok(Admissibility {
                value: v,
                error: (v - coarse).abs(),
                method,
            })
        }
        AdmissibilityMethod::EntryMc => {
            if n != 2 {
                return Err(Error::Unsupported(format!(
                    "entry-space Monte Carlo is available for n = 2 only, got n = {n}"
                )));
            }
            let e = admissibility_entry_mc(window, &CubeR::default(), 0, samples, seed)?;
            Ok(Admissibility {
                value: e.value,
                error: e.std_error,
                method,
            })
        }
    }
}

/// Scales `window` so its coordinate admissibility integral is one.
/// Returns `c = I^{−1/2}` and the scaled window.
pub fn normalize_to_wavelet<W: Window + Clone>(window: &W, n: usize) -> Result<(f64, ScaledWindow<W>)> {
    let integral = admissibility_quadrature(window, n, DEFAULT_ORDER)?;
    if !(integral > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window has admissibility integral {integral}; cannot normalize"
        )));
    }
    let c = integral.powf(-0.5);
    Ok((
        c,
        ScaledWindow {
            inner: window.clone(),
            scale: c,
        },
    ))
}
