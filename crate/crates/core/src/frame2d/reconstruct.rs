//! Frame operator symbol and reconstruction.
//!
//! The frame operator acts on `f̂` as multiplication by
//! `|R|·Σ_p ĝ(b·p⁻¹)²`. The canonical dual divides by that symbol; the
//! frame algorithm iterates with relaxation `2/(A+B)`.

use serde::{Deserialize, Serialize};

use super::cube::CubeR;
use super::signal::SpectralSignal;
use super::table::GridTable;
use super::transform::apply_frame_operator;
use crate::calderon::calderon_sum;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::window::WindowSpec;

/// Relative slack allowed below the lower frame bound `|R|`.
pub const SYMBOL_SLACK: f64 = 1e-9;

/// Relative error below which the frame algorithm has converged.
pub const ROUNDOFF: f64 = 1e-12;

/// `|R|·Σ_p ĝ(b·p⁻¹)²` at a single point.
pub fn frame_operator_symbol(b: &GroupElement, window: &WindowSpec, cube: &CubeR, eta: f64) -> Result<f64> {
    if b.n() != 2 {
        return Err(Error::Unsupported("the frame operator symbol is defined for n = 2".into()));
    }
    Ok(cube.volume() * calderon_sum(b, window, window.epsilon, eta)?)
}

/// The symbol at every grid point of the table; zero where the table is
/// empty.
pub fn symbol_on_grid(table: &GridTable, cube: &CubeR) -> Vec<f64> {
    let r = cube.volume();
    (0..table.len()).map(|l| r * table.calderon(l)).collect()
}

/// Fails if the symbol drops below `|R|` anywhere on the support of `f`.
pub fn check_symbol(f: &SpectralSignal, symbol: &[f64], cube: &CubeR) -> Result<()> {
    let bound = cube.volume() * (1.0 - SYMBOL_SLACK);
    for (z, &s) in f.data.iter().zip(symbol) {
        if z.norm_sqr() > 0.0 && !(s >= bound) {
            return Err(Error::SymbolBelowBound { symbol: s, bound });
        }
    }
    Ok(())
}

/// How the frame operator is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorPath {
    /// Multiply by the symbol directly.
    Fast,
    /// Analysis over every contributing tile followed by synthesis.
    Full,
}

/// `S f` along the chosen path.
pub fn apply_operator(
    f: &SpectralSignal,
    table: &GridTable,
    symbol: &[f64],
    cube: &CubeR,
    path: OperatorPath,
) -> Result<SpectralSignal> {
    match path {
        OperatorPath::Fast => {
            let mut out = f.clone();
            for (z, s) in out.data.iter_mut().zip(symbol) {
                *z *= *s;
            }
            out.flags = table.flags.clone();
            Ok(out)
        }
        OperatorPath::Full => apply_frame_operator(f, table, cube),
    }
}

/// `S⁻¹ S f` via the canonical dual frame.
pub fn reconstruct_canonical(
    f: &SpectralSignal,
    table: &GridTable,
    cube: &CubeR,
    path: OperatorPath,
) -> Result<SpectralSignal> {
    let symbol = symbol_on_grid(table, cube);
    check_symbol(f, &symbol, cube)?;
    let mut out = apply_operator(f, table, &symbol, cube, path)?;
    for (z, s) in out.data.iter_mut().zip(&symbol) {
        if *s > 0.0 {
            *z /= *s;
        }
    }
    Ok(out)
}

/// Result of [`reconstruct_frame_algorithm`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAlgorithmRun {
    pub output: SpectralSignal,
    /// Relative grid `L²` error after each iteration, starting with the
    /// initial guess `0`.
    pub errors: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl FrameAlgorithmRun {
    /// `(B − A)/(B + A)`.
    pub fn rate_bound(&self) -> f64 {
        (self.upper - self.lower) / (self.upper + self.lower)
    }

    /// Per-iteration error ratios, zero once the error is at round-off
    /// level.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors
            .windows(2)
            .map(|w| if w[0] > ROUNDOFF { w[1] / w[0] } else { 0.0 })
            .collect()
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }
}

/// `f_{k+1} = f_k + 2/(A+B)·(S f − S f_k)` from `f_0 = 0`, with `S` applied
/// as the symbol.
pub fn reconstruct_frame_algorithm(
    f: &SpectralSignal,
    table: &GridTable,
    cube: &CubeR,
    lower: f64,
    upper: f64,
    iterations: usize,
) -> Result<FrameAlgorithmRun> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("the frame algorithm needs at least one iteration".into()));
    }
    if !(lower > 0.0 && upper >= lower && upper.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frame bounds must satisfy 0 < A ≤ B, got A = {lower}, B = {upper}"
        )));
    }
    let symbol = symbol_on_grid(table, cube);
    check_symbol(f, &symbol, cube)?;
    let relax = 2.0 / (lower + upper);
    let sf: Vec<_> = f.data.iter().zip(&symbol).map(|(z, s)| z * *s).collect();
    let mut cur = SpectralSignal::zeros(f.axes)?;
    cur.flags = table.flags.clone();
    let mut errors = vec![1.0];
    let scale = f.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(FrameAlgorithmRun {
            output: cur,
            errors: vec![0.0; iterations + 1],
            lower,
            upper,
        });
    }
    for it in 1..=iterations {
        for ((c, t), s) in cur.data.iter_mut().zip(&sf).zip(&symbol) {
            *c += (t - *c * *s) * relax;
        }
        let err = cur
            .data
            .iter()
            .zip(&f.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / scale;
        let prev = *errors.last().unwrap();
        if err > prev * (1.0 + 1e-12) && err > 1e-14 {
            return Err(Error::Divergence {
                iteration: it,
                error: err,
                previous: prev,
            });
        }
        errors.push(err);
    }
    Ok(FrameAlgorithmRun {
        output: cur,
        errors,
        lower,
        upper,
    })
}
