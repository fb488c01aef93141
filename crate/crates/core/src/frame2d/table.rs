//! Per-grid-point window values `ĝ(b·p⁻¹)` for every tile `p` whose
//! widened translate contains `b`.

use std::collections::HashMap;

use rayon::prelude::*;

use super::signal::{GridAxis, SpectralSignal};
use crate::calderon::{calderon_terms, check_support};
use crate::error::{Error, Result};
use crate::group::{iwasawa_decompose, GroupElement};
use crate::tiling::TileIndex;
use crate::window::WindowSpec;

/// Points evaluated per parallel batch.
const BUILD_CHUNK: usize = 1 << 16;

/// Relative perturbation sizes tried, in order, for grid points on a
/// boundary.
const NUDGES: [f64; 6] = [10.0, -10.0, 100.0, -100.0, 1000.0, -1000.0];

/// Direction of the perturbation `b ↦ b·(I + δ·D)`; generic so that it
/// moves every Iwasawa coordinate.
const DIRECTION: [f64; 4] = [0.618, 0.371, -0.254, 0.437];

/// Sparse table of window values on a grid.
#[derive(Debug, Clone)]
pub struct GridTable {
    pub axes: [GridAxis; 4],
    pub window: WindowSpec,
    pub eta: f64,
    pub tiles: Vec<TileIndex>,
    ids: HashMap<TileIndex, u32>,
    start: Vec<usize>,
    entries: Vec<(u32, f64)>,
    by_tile: Vec<Vec<(u32, f64)>>,
    /// Points evaluated at `b·(I+δD)` because `b` was within `eta` of a
    /// boundary.
    pub flags: Vec<usize>,
    /// Points with a numerically singular matrix; `ĝ = 0` for every tile.
    pub singular: Vec<usize>,
}

enum PointResult {
    Terms(Vec<(TileIndex, f64)>),
    Flagged(Vec<(TileIndex, f64)>),
    Singular,
}

fn point_terms(x: &[f64; 4], window: &WindowSpec, eta: f64) -> Result<PointResult> {
    let eval = |delta: f64| -> Result<Vec<(TileIndex, f64)>> {
        let d = DIRECTION.map(|v| v * delta);
        let y = [
            x[0] * (1.0 + d[0]) + x[1] * d[2],
            x[0] * d[1] + x[1] * (1.0 + d[3]),
            x[2] * (1.0 + d[0]) + x[3] * d[2],
            x[2] * d[1] + x[3] * (1.0 + d[3]),
        ];
        let b = GroupElement::from_row_slice(2, &y)?;
        let f = iwasawa_decompose(&b)?;
        Ok(calderon_terms(&f, window, window.epsilon, eta)?.1)
    };
    match eval(0.0) {
        Ok(t) => return Ok(PointResult::Terms(t)),
        Err(Error::Singular { .. }) => return Ok(PointResult::Singular),
        Err(Error::Boundary) => {}
        Err(e) => return Err(e),
    }
    for k in NUDGES {
        match eval(k * eta) {
            Ok(t) => return Ok(PointResult::Flagged(t)),
            Err(Error::Boundary) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Boundary)
}

impl GridTable {
    /// Evaluates the overlap terms at every grid point.
    pub fn build(axes: [GridAxis; 4], window: WindowSpec, eta: f64) -> Result<Self> {
        Self::build_masked(axes, window, eta, None)
    }

    /// As [`GridTable::build`], leaving points outside `mask` empty.
    pub fn build_masked(
        axes: [GridAxis; 4],
        window: WindowSpec,
        eta: f64,
        mask: Option<&[bool]>,
    ) -> Result<Self> {
        window.validate()?;
        check_support(&window, window.epsilon)?;
        let probe = SpectralSignal::zeros(axes)?;
        let len = probe.len();
        if let Some(m) = mask {
            if m.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    found: m.len(),
                });
            }
        }
        let mut table = GridTable {
            axes,
            window,
            eta,
            tiles: vec![],
            ids: HashMap::new(),
            start: Vec::with_capacity(len + 1),
            entries: vec![],
            by_tile: vec![],
            flags: vec![],
            singular: vec![],
        };
        table.start.push(0);
        for lo in (0..len).step_by(BUILD_CHUNK) {
            let hi = (lo + BUILD_CHUNK).min(len);
            let results: Vec<Result<PointResult>> = (lo..hi)
                .into_par_iter()
                .map(|l| {
                    if mask.is_some_and(|m| !m[l]) {
                        return Ok(PointResult::Terms(vec![]));
                    }
                    point_terms(&probe.point(l), &window, eta)
                })
                .collect();
            for (off, r) in results.into_iter().enumerate() {
                let l = lo + off;
                let terms = match r? {
                    PointResult::Terms(t) => t,
                    PointResult::Flagged(t) => {
                        table.flags.push(l);
                        t
                    }
                    PointResult::Singular => {
                        table.singular.push(l);
                        vec![]
                    }
                };
                for (p, g) in terms {
                    let id = table.intern(p);
                    table.entries.push((id, g));
                    table.by_tile[id as usize].push((l as u32, g));
                }
                table.start.push(table.entries.len());
            }
        }
        Ok(table)
    }

    fn intern(&mut self, p: TileIndex) -> u32 {
        if let Some(&id) = self.ids.get(&p) {
            return id;
        }
        let id = self.tiles.len() as u32;
        self.ids.insert(p.clone(), id);
        self.tiles.push(p);
        self.by_tile.push(vec![]);
        id
    }

    pub fn len(&self) -> usize {
        self.start.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tile_id(&self, p: &TileIndex) -> Option<u32> {
        self.ids.get(p).copied()
    }

    /// `(tile id, ĝ)` pairs at a grid point.
    pub fn at(&self, point: usize) -> &[(u32, f64)] {
        &self.entries[self.start[point]..self.start[point + 1]]
    }

    /// `(grid point, ĝ)` pairs of a tile; empty for tiles that miss the grid.
    pub fn points_of(&self, p: &TileIndex) -> &[(u32, f64)] {
        match self.tile_id(p) {
            Some(id) => &self.by_tile[id as usize],
            None => &[],
        }
    }

    /// Tiles whose window is nonzero somewhere on the support of `f`.
    pub fn tiles_touching(&self, f: &SpectralSignal) -> Vec<TileIndex> {
        let mut ids: Vec<u32> = (0..self.len())
            .filter(|&l| f.data[l].norm_sqr() > 0.0)
            .flat_map(|l| self.at(l).iter().map(|e| e.0))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let mut tiles: Vec<TileIndex> = ids.into_iter().map(|i| self.tiles[i as usize].clone()).collect();
        tiles.sort();
        tiles
    }

    /// `Σ_p ĝ(b·p⁻¹)²` at a grid point.
    pub fn calderon(&self, point: usize) -> f64 {
        self.at(point).iter().map(|e| e.1 * e.1).sum()
    }
}
