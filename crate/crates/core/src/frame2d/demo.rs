//! End-to-end run of the `n = 2` frame on a Gaussian test signal.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cube::{flatten, orthonormality_defect, CubeR, LatticeIndex};
use super::reconstruct::{check_symbol, reconstruct_frame_algorithm, symbol_on_grid, FrameAlgorithmRun};
use super::signal::SpectralSignal;
use super::table::GridTable;
use super::testsignal::{signal_rng, GaussianBump, GridSpec, SupportSpec};
use super::transform::{TileCoefficients, TileTransform};
use crate::error::{Error, Result};
use crate::group::{iwasawa_recompose, CoordBox, GroupElement};
use crate::overlap::overlap_bound;
use crate::sampling::map_chunks;
use crate::tiling::{TileIndex, DEFAULT_ETA};
use crate::window::{window_eval, WindowKind, WindowSpec};

/// Settings of a demo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameDemoConfig {
    pub window: WindowSpec,
    pub grid: GridSpec,
    pub tile: TileIndex,
    pub sigma: f64,
    pub support: SupportSpec,
    pub seed: u64,
    pub iterations: usize,
    pub eta: f64,
    /// Samples of `F_o(½)` for the containment check.
    pub containment_samples: usize,
    /// Index pairs for the orthonormality check.
    pub orthonormality_pairs: usize,
    /// Fraction of coefficient energy the reported `γ` radius must capture.
    pub capture_fraction: f64,
}

impl Default for FrameDemoConfig {
    fn default() -> Self {
        Self {
            window: WindowSpec {
                kind: crate::window::WindowKind::Smooth,
                epsilon: 0.2,
                ramp: crate::window::Ramp::RaisedCosine,
            },
            grid: GridSpec::default(),
            tile: TileIndex::identity(2),
            sigma: 1.0,
            support: SupportSpec::Band,
            seed: 1,
            iterations: 60,
            eta: DEFAULT_ETA,
            containment_samples: 1_000_000,
            orthonormality_pairs: 50,
            capture_fraction: 1.0 - 1e-6,
        }
    }
}

impl FrameDemoConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.grid.validate()?;
        if self.tile.n() != 2 {
            return Err(Error::Unsupported("the frame demo runs for n = 2".into()));
        }
        if !(self.sigma > 0.0) || self.iterations == 0 || !(self.eta > 0.0) {
            return Err(Error::InvalidParameter(
                "sigma and eta must be positive and iterations at least 1".into(),
            ));
        }
        if !(self.capture_fraction > 0.0 && self.capture_fraction <= 1.0) {
            return Err(Error::InvalidParameter("capture fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Largest entries seen on samples of `F_o(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub eps: f64,
    pub samples: usize,
    pub max_abs: [f64; 4],
    pub violations: usize,
}

/// Samples `F_o(ε)` uniformly in Iwasawa coordinates and checks the cube
/// bounds entrywise.
pub fn containment_check(cube: &CubeR, eps: f64, samples: usize, seed: u64) -> Result<ContainmentReport> {
    crate::tiling::check_eps(eps)?;
    let region = CoordBox::uniform(2, (1.0 - eps, 2.0 + eps), (-eps, 1.0 + eps));
    let parts = map_chunks(samples, seed, |range, rng| -> Result<([f64; 4], usize)> {
        let mut max_abs = [0.0f64; 4];
        let mut bad = 0;
        for _ in range {
            let b = iwasawa_recompose(&region.sample(rng))?;
            let x = flatten(b.matrix());
            for k in 0..4 {
                max_abs[k] = max_abs[k].max(x[k].abs());
            }
            if !cube.contains(b.matrix()) {
                bad += 1;
            }
        }
        Ok((max_abs, bad))
    });
    let mut report = ContainmentReport {
        eps,
        samples,
        max_abs: [0.0; 4],
        violations: 0,
    };
    for p in parts {
        let (m, bad) = p?;
        for (r, v) in report.max_abs.iter_mut().zip(m) {
            *r = r.max(v);
        }
        report.violations += bad;
    }
    Ok(report)
}

/// Random index pairs with entries in `[−3, 3]`; every fifth pair is
/// diagonal.
pub fn orthonormality_pairs<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<(LatticeIndex, LatticeIndex)> {
    let draw = |rng: &mut R| LatticeIndex {
        m: std::array::from_fn(|_| rng.random_range(-3..=3)),
    };
    (0..count)
        .map(|i| {
            let a = draw(rng);
            let b = if i % 5 == 0 { a } else { draw(rng) };
            (a, b)
        })
        .collect()
}

/// Per-tile check of `Σ_γ |c|² = |R|·ΔV·Σ_b |f̂(b)|²·ĝ(b·p⁻¹)²` with the
/// right side evaluated directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsevalCheck {
    pub tile: TileIndex,
    pub coefficient_energy: f64,
    pub direct: f64,
    pub relative_error: f64,
}

/// Right-hand side of the Parseval identity, evaluating the window at
/// `b·p⁻¹` from scratch.
pub fn parseval_rhs(f: &SpectralSignal, p: &TileIndex, window: &WindowSpec, cube: &CubeR) -> Result<f64> {
    let pinv = p.inverse_matrix();
    let mut acc = 0.0;
    for (l, z) in f.data.iter().enumerate() {
        let a = z.norm_sqr();
        if a == 0.0 {
            continue;
        }
        let b = DMatrix::from_row_slice(2, 2, &f.point(l));
        let g = window_eval(window, &GroupElement::from_matrix(b * &pinv)?)?;
        acc += a * g * g;
    }
    Ok(cube.volume() * f.cell_volume() * acc)
}

pub fn parseval_check(
    f: &SpectralSignal,
    c: &TileCoefficients,
    window: &WindowSpec,
    cube: &CubeR,
) -> Result<ParsevalCheck> {
    let direct = parseval_rhs(f, &c.geometry.index, window, cube)?;
    let energy = c.energy();
    let scale = direct.abs().max(energy.abs());
    Ok(ParsevalCheck {
        tile: c.geometry.index.clone(),
        coefficient_energy: energy,
        direct,
        relative_error: if scale == 0.0 { 0.0 } else { (energy - direct).abs() / scale },
    })
}

/// Results of one frame algorithm run, without the output signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub lower: f64,
    pub upper: f64,
    pub rate_bound: f64,
    pub max_ratio: f64,
    pub final_error: f64,
    pub errors: Vec<f64>,
}

impl From<&FrameAlgorithmRun> for IterationSummary {
    fn from(r: &FrameAlgorithmRun) -> Self {
        Self {
            lower: r.lower,
            upper: r.upper,
            rate_bound: r.rate_bound(),
            max_ratio: r.max_ratio(),
            final_error: *r.errors.last().unwrap(),
            errors: r.errors.clone(),
        }
    }
}

/// Everything measured by [`run_frame_demo`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDemoReport {
    pub config: FrameDemoConfig,
    pub cube_volume: f64,
    pub containment: ContainmentReport,
    pub orthonormality_defect: f64,
    /// Defect of the untransposed pairing; expected to be of order one.
    pub untransposed_defect: f64,
    pub signal: GaussianBump,
    pub grid_points: usize,
    pub support_points: usize,
    pub flagged_points: usize,
    pub tiles: usize,
    /// Number of contributing tiles per `(λ, κ)`.
    pub tiles_by_scale: BTreeMap<String, usize>,
    pub coefficients: usize,
    pub coefficient_energy: f64,
    pub signal_energy: f64,
    pub capture_radius: i64,
    pub parseval_max_relative_error: f64,
    pub parseval: Vec<ParsevalCheck>,
    pub symbol_min: f64,
    pub symbol_max: f64,
    pub symbol_upper_bound: f64,
    pub condition_number: f64,
    pub multiplier_max_deviation: f64,
    pub fast_path_error: f64,
    pub full_path_error: f64,
    pub fast_full_difference: f64,
    pub conservative: IterationSummary,
    pub empirical: IterationSummary,
}

/// Wall-clock time of each stage, kept apart from the deterministic report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DemoTimings {
    pub stages: BTreeMap<String, f64>,
}

/// Intermediate products of a demo run.
pub struct FrameDemoOutput {
    pub report: FrameDemoReport,
    pub timings: DemoTimings,
    pub signal: SpectralSignal,
}

/// Receives each tile's coefficients as they are computed.
pub type CoefficientSink<'a> = &'a mut dyn FnMut(&TileCoefficients) -> Result<()>;

fn relative_error(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Builds the signal, runs analysis and synthesis tile by tile, both
/// reconstructions and two frame algorithm runs. Coefficients are passed
/// to `sink` one tile at a time and then dropped.
pub fn run_frame_demo(config: &FrameDemoConfig, mut sink: Option<CoefficientSink>) -> Result<FrameDemoOutput> {
    config.validate()?;
    let mut timings = DemoTimings::default();
    let mut clock = std::time::Instant::now();
    let mut lap = |name: &str, timings: &mut DemoTimings| {
        timings.stages.insert(name.into(), clock.elapsed().as_secs_f64());
        clock = std::time::Instant::now();
    };
    let cube = CubeR::default();
    let window = config.window;
    let mut rng = signal_rng(config.seed);

    let containment = containment_check(&cube, 0.5, config.containment_samples, config.seed)?;
    let pairs = orthonormality_pairs(config.orthonormality_pairs, &mut rng);
    let orth = orthonormality_defect(&cube, &pairs, true);
    let untransposed = orthonormality_defect(&cube, &pairs, false);
    lap("checks", &mut timings);

    let bump = GaussianBump::random(&config.tile, config.sigma, config.support, &mut rng)?;
    let f = bump.sample_centered(&config.grid, config.eta, &mut rng)?;
    let mask: Vec<bool> = f.data.iter().map(|z| z.norm_sqr() > 0.0).collect();
    let support_points = mask.iter().filter(|&&m| m).count();
    if support_points == 0 {
        return Err(Error::InvalidParameter("the test signal has no grid points in its support".into()));
    }
    lap("signal", &mut timings);

    let table = GridTable::build_masked(f.axes, window, config.eta, Some(&mask))?;
    let symbol = symbol_on_grid(&table, &cube);
    check_symbol(&f, &symbol, &cube)?;
    lap("table", &mut timings);

    let tiles = table.tiles_touching(&f);
    let mut by_scale = BTreeMap::new();
    for p in &tiles {
        *by_scale.entry(format!("{},{}", p.lambda, p.kappa[0])).or_insert(0) += 1;
    }
    let mut transform = TileTransform::new(cube);
    let mut sf = SpectralSignal::zeros(f.axes)?;
    let mut parseval = Vec::with_capacity(tiles.len());
    let mut energy = 0.0;
    let mut count = 0;
    let mut radius_energy: Vec<f64> = vec![];
    for p in &tiles {
        let c = transform.analyze(&f, &table, p)?;
        parseval.push(parseval_check(&f, &c, &window, &cube)?);
        energy += c.energy();
        count += c.data.len();
        for (pos, z) in c.data.iter().enumerate() {
            let r = c.geometry.lattice_index(pos).iter().map(|m| m.unsigned_abs()).max().unwrap() as usize;
            if radius_energy.len() <= r {
                radius_energy.resize(r + 1, 0.0);
            }
            radius_energy[r] += z.norm_sqr();
        }
        transform.synthesize_into(&c, &table, &mut sf)?;
        if let Some(f) = sink.as_mut() {
            f(&c)?;
        }
    }
    lap("analysis_synthesis", &mut timings);

    let mut acc = 0.0;
    let mut capture_radius = radius_energy.len() as i64 - 1;
    for (r, e) in radius_energy.iter().enumerate() {
        acc += e;
        if acc >= config.capture_fraction * energy {
            capture_radius = r as i64;
            break;
        }
    }

    let on_support = |v: &[f64]| -> (f64, f64) {
        v.iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .fold((f64::MAX, 0.0f64), |(lo, hi), (&s, _)| (lo.min(s), hi.max(s)))
    };
    let (symbol_min, symbol_max) = on_support(&symbol);
    let expected: Vec<_> = f.data.iter().zip(&symbol).map(|(z, s)| z * *s).collect();
    let multiplier_dev = relative_error(&sf.data, &expected);
    let fast: Vec<_> = expected.iter().zip(&symbol).map(|(z, s)| if *s > 0.0 { z / *s } else { *z }).collect();
    let full: Vec<_> = sf.data.iter().zip(&symbol).map(|(z, s)| if *s > 0.0 { z / *s } else { *z }).collect();
    let fast_err = relative_error(&fast, &f.data);
    let full_err = relative_error(&full, &f.data);
    let fast_full = relative_error(&full, &fast);
    lap("canonical", &mut timings);

    let r = cube.volume();
    // the indicator window gives a tight frame
    let m = match window.kind {
        WindowKind::Indicator => 1.0,
        WindowKind::Smooth => overlap_bound(2, window.epsilon) as f64,
    };
    let conservative = reconstruct_frame_algorithm(&f, &table, &cube, r, m * r, config.iterations)?;
    let empirical = reconstruct_frame_algorithm(&f, &table, &cube, symbol_min, symbol_max, config.iterations)?;
    lap("frame_algorithm", &mut timings);

    let parseval_max = parseval.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    let report = FrameDemoReport {
        config: config.clone(),
        cube_volume: r,
        containment,
        orthonormality_defect: orth,
        untransposed_defect: untransposed,
        signal: bump,
        grid_points: f.len(),
        support_points,
        flagged_points: table.flags.len(),
        tiles: tiles.len(),
        tiles_by_scale: by_scale,
        coefficients: count,
        coefficient_energy: energy,
        signal_energy: f.norm().powi(2),
        capture_radius,
        parseval_max_relative_error: parseval_max,
        parseval,
        symbol_min,
        symbol_max,
        symbol_upper_bound: m * r,
        condition_number: symbol_max / symbol_min,
        multiplier_max_deviation: multiplier_dev,
        fast_path_error: fast_err,
        full_path_error: full_err,
        fast_full_difference: fast_full,
        conservative: (&conservative).into(),
        empirical: (&empirical).into(),
    };
    Ok(FrameDemoOutput {
        report,
        timings,
        signal: f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containment_holds() {
        let r = containment_check(&CubeR::default(), 0.5, 20_000, 5).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_abs[0] < 7.0 && r.max_abs[1] < 10.0);
        assert!(r.max_abs[0] > 3.0);
        let tight = CubeR::new([-3.0; 4], [3.0; 4]).unwrap();
        assert!(containment_check(&tight, 0.5, 20_000, 5).unwrap().violations > 0);
    }

    #[test]
    fn small_demo() {
        let config = FrameDemoConfig {
            grid: GridSpec {
                counts: [10, 26, 10, 26],
                ..GridSpec::default()
            },
            containment_samples: 1000,
            orthonormality_pairs: 5,
            iterations: 10,
            ..FrameDemoConfig::default()
        };
        let mut tiles = 0;
        let mut sink = |_: &TileCoefficients| -> Result<()> {
            tiles += 1;
            Ok(())
        };
        let out = run_frame_demo(&config, Some(&mut sink)).unwrap();
        assert_eq!(tiles, out.report.tiles);
        let r = &out.report;
        assert!(r.fast_path_error < 1e-12, "{}", r.fast_path_error);
        assert!(r.full_path_error < 1e-9, "{}", r.full_path_error);
        assert!(r.parseval_max_relative_error < 1e-6, "{}", r.parseval_max_relative_error);
        assert!(r.symbol_min >= r.cube_volume * (1.0 - 1e-9));
        assert!(r.condition_number <= 33.0);
        assert!(r.conservative.max_ratio <= r.conservative.rate_bound + 1e-12);
        assert!(r.empirical.final_error < r.conservative.final_error);
    }
}
