//! Analysis and synthesis for the frame `{ρ[γ,p]⁻¹g : γ ∈ J, p ∈ P}`.
//!
//! For a tile `p` the coefficients are
//! `c_{p,γ} = |det p|⁻¹·ΔV·Σ_b f̂(b)·ĝ(b·p⁻¹)·exp(−2πi·tr(b·p⁻¹·γ))`.
//! Right multiplication by `p⁻¹` acts on each row of `b` separately, and
//! the characters are periodic under the lattice `Λ` of cube periods, so
//! per row the grid folds onto the finite group `(grid·p⁻¹)/Λ`. This needs
//! `Λ·p` to be a sublattice of the grid lattice, i.e. the integers
//! `A = W₁·p₁₁/h₁`, `B = W₁·p₁₂/h₂`, `C = W₂·p₂₂/h₂` per row. The
//! coefficient set is one full period of `J` modulo the dual of
//! `grid·p⁻¹`, `A·C` frequencies per row, and the per-row transform is a
//! twisted two-stage FFT. With a full period, `synthesis ∘ analysis` is
//! exactly multiplication by `|R|·ĝ(b·p⁻¹)²`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::cube::CubeR;
use super::signal::SpectralSignal;
use super::table::GridTable;
use crate::error::{Error, Result};
use crate::tiling::{TileIndex, OVERFLOW_GUARD};

/// Largest coefficient block accepted for one tile.
pub const MAX_TILE_COEFFICIENTS: usize = 1 << 26;

/// Lattice data of one row for one tile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowGeometry {
    /// Residues along the first entry of the row.
    pub a: usize,
    /// Shift of the second entry per wrap of the first.
    pub b: i64,
    /// Residues along the second entry.
    pub c: usize,
    /// First grid point of the row mapped through `p⁻¹`.
    pub origin: [f64; 2],
    pub widths: [f64; 2],
}

/// Everything the transform needs about tile `p` on a given grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileGeometry {
    pub index: TileIndex,
    pub rows: [RowGeometry; 2],
    pub det_abs: f64,
}

fn exact_int(v: f64, what: &str, p: &TileIndex) -> Result<i64> {
    let r = v.round();
    if (v - r).abs() > 1e-9 * v.abs().max(1.0) {
        return Err(Error::GridIncompatible(format!(
            "{what} = {v} is not an integer for tile {p:?}; grid spacings must divide the cube widths times the tile entries"
        )));
    }
    Ok(r as i64)
}

impl TileGeometry {
    pub fn new(p: &TileIndex, axes_min: [f64; 4], spacing: [f64; 4], cube: &CubeR) -> Result<Self> {
        if p.n() != 2 {
            return Err(Error::Unsupported("the frame transform is implemented for n = 2".into()));
        }
        p.check_guard(OVERFLOW_GUARD)?;
        let m = p.to_matrix();
        let (p11, p12, p22) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
        let widths = cube.widths();
        let mut rows = [RowGeometry {
            a: 0,
            b: 0,
            c: 0,
            origin: [0.0; 2],
            widths: [0.0; 2],
        }; 2];
        for (r, row) in rows.iter_mut().enumerate() {
            let (w1, w2) = (widths[2 * r], widths[2 * r + 1]);
            let (h1, h2) = (spacing[2 * r], spacing[2 * r + 1]);
            let a = exact_int(w1 * p11 / h1, "W·p11/h", p)?;
            let b = exact_int(w1 * p12 / h2, "W·p12/h", p)?;
            let c = exact_int(w2 * p22 / h2, "W·p22/h", p)?;
            if a < 1 || c < 1 {
                return Err(Error::GridIncompatible(format!(
                    "grid too coarse for tile {p:?}: fewer than one sample per lattice period (A = {a}, C = {c})"
                )));
            }
            let (o1, o2) = (axes_min[2 * r], axes_min[2 * r + 1]);
            *row = RowGeometry {
                a: a as usize,
                b,
                c: c as usize,
                origin: [o1 / p11, -o1 * p12 / (p11 * p22) + o2 / p22],
                widths: [w1, w2],
            };
        }
        let g = TileGeometry {
            index: p.clone(),
            rows,
            det_abs: (p11 * p22).abs(),
        };
        if g.len() > MAX_TILE_COEFFICIENTS {
            return Err(Error::GridIncompatible(format!(
                "tile {p:?} needs {} coefficients, more than {MAX_TILE_COEFFICIENTS}; use a coarser grid",
                g.len()
            )));
        }
        Ok(g)
    }

    pub fn for_signal(p: &TileIndex, f: &SpectralSignal, cube: &CubeR) -> Result<Self> {
        Self::new(p, f.axes.map(|a| a.min), f.spacings(), cube)
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.rows[0].a, self.rows[0].c, self.rows[1].a, self.rows[1].c]
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position in the residue array of grid index `idx`.
    pub fn residue(&self, idx: [usize; 4]) -> usize {
        let mut q = [0usize; 4];
        for r in 0..2 {
            let g = &self.rows[r];
            let i1 = idx[2 * r] as i64;
            let i2 = idx[2 * r + 1] as i64;
            let q1 = i1.rem_euclid(g.a as i64);
            let t = (i1 - q1) / g.a as i64;
            let q2 = (i2 as i128 - t as i128 * g.b as i128).rem_euclid(g.c as i128) as i64;
            q[2 * r] = q1 as usize;
            q[2 * r + 1] = q2 as usize;
        }
        let s = self.shape();
        ((q[0] * s[1] + q[1]) * s[2] + q[2]) * s[3] + q[3]
    }

    /// Lattice index `(m₁..m₄)` of a coefficient position.
    pub fn lattice_index(&self, pos: usize) -> [i64; 4] {
        let s = self.shape();
        let mut r = pos;
        let mut k = [0usize; 4];
        for a in (0..4).rev() {
            k[a] = r % s[a];
            r /= s[a];
        }
        std::array::from_fn(|a| centered(k[a], s[a]))
    }

    /// `tr(o_r·p⁻¹·γ)` contribution of row `r` for frequencies `(m_a, m_b)`.
    fn offset_phase(&self, r: usize, ma: i64, mb: i64) -> f64 {
        let g = &self.rows[r];
        ma as f64 * g.origin[0] / g.widths[0] + mb as f64 * g.origin[1] / g.widths[1]
    }
}

/// Representative of residue `k` modulo `len` in `[−len/2, len/2)`.
pub fn centered(k: usize, len: usize) -> i64 {
    if 2 * k >= len {
        k as i64 - len as i64
    } else {
        k as i64
    }
}

/// Coefficients of one tile, stored in FFT order; see
/// [`TileGeometry::lattice_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct TileCoefficients {
    pub geometry: TileGeometry,
    pub data: Vec<Complex64>,
}

impl TileCoefficients {
    pub fn zeros(geometry: TileGeometry) -> Self {
        let n = geometry.len();
        Self {
            geometry,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Coefficients over a set of tiles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coefficients {
    pub tiles: Vec<TileCoefficients>,
}

impl Coefficients {
    pub fn energy(&self) -> f64 {
        self.tiles.iter().map(|t| t.energy()).sum()
    }

    pub fn len(&self) -> usize {
        self.tiles.iter().map(|t| t.data.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Σ c·conj(d)`, matching tiles by index.
    pub fn inner(&self, other: &Coefficients) -> Result<Complex64> {
        let map: HashMap<&TileIndex, &TileCoefficients> =
            other.tiles.iter().map(|t| (&t.geometry.index, t)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.tiles {
            if let Some(o) = map.get(&t.geometry.index) {
                if o.geometry != t.geometry {
                    return Err(Error::InvalidParameter("coefficient grids differ".into()));
                }
                acc += t.data.iter().zip(&o.data).map(|(a, b)| a * b.conj()).sum::<Complex64>();
            }
        }
        Ok(acc)
    }

    /// Smallest `r` such that coefficients with `max_k |m_k| ≤ r` carry at
    /// least `fraction` of the energy.
    pub fn capture_radius(&self, fraction: f64) -> i64 {
        let mut by_radius: Vec<f64> = Vec::new();
        for t in &self.tiles {
            for (pos, z) in t.data.iter().enumerate() {
                let r = t.geometry.lattice_index(pos).iter().map(|m| m.abs()).max().unwrap() as usize;
                if by_radius.len() <= r {
                    by_radius.resize(r + 1, 0.0);
                }
                by_radius[r] += z.norm_sqr();
            }
        }
        let total: f64 = by_radius.iter().sum();
        let mut acc = 0.0;
        for (r, e) in by_radius.iter().enumerate() {
            acc += e;
            if acc >= fraction * total {
                return r as i64;
            }
        }
        by_radius.len().saturating_sub(1) as i64
    }
}

struct Plans {
    planner: FftPlanner<f64>,
}

impl Plans {
    fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
        }
    }

    fn get(&mut self, len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        if inverse {
            self.planner.plan_fft_inverse(len)
        } else {
            self.planner.plan_fft_forward(len)
        }
    }
}

/// In-place FFT of every line along `axis` of a row-major 4-D array.
fn fft_axis(data: &mut [Complex64], shape: [usize; 4], axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let len = shape[axis];
    if len == 1 {
        return;
    }
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    if stride == 1 {
        fft.process(data);
        return;
    }
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // transpose blocks so lines become contiguous
    let mut block = vec![Complex64::new(0.0, 0.0); len * stride];
    for o in 0..outer {
        let base = o * len * stride;
        for j in 0..len {
            for s in 0..stride {
                block[s * len + j] = data[base + j * stride + s];
            }
        }
        fft.process_with_scratch(&mut block, &mut scratch);
        for j in 0..len {
            for s in 0..stride {
                data[base + j * stride + s] = block[s * len + j];
            }
        }
    }
}

/// Multiplies `data[.., q, k, ..]` (row `r`, first-entry residue `q`,
/// second-entry bin `k`) by `exp(sign·2πi·m_k·q·B/(A·C))`.
fn twiddle(data: &mut [Complex64], shape: [usize; 4], g: &RowGeometry, r: usize, sign: f64) {
    let (a, c) = (g.a, g.c);
    let modulus = (a * c) as i128;
    let mut table = vec![Complex64::new(0.0, 0.0); a * c];
    for q in 0..a {
        for k in 0..c {
            let m = centered(k, c) as i128;
            let v = (m * q as i128 * g.b as i128).rem_euclid(modulus);
            table[q * c + k] = Complex64::from_polar(1.0, sign * 2.0 * PI * v as f64 / modulus as f64);
        }
    }
    let inner: usize = shape[2 * r + 2..].iter().product();
    let outer: usize = shape[..2 * r].iter().product();
    for o in 0..outer {
        for q in 0..a {
            for k in 0..c {
                let t = table[q * c + k];
                let base = ((o * a + q) * c + k) * inner;
                for z in &mut data[base..base + inner] {
                    *z *= t;
                }
            }
        }
    }
}

/// Multiplies every coefficient by `scale·exp(sign·2πi·tr(o·p⁻¹·γ))`.
fn offsets(data: &mut [Complex64], g: &TileGeometry, sign: f64, scale: f64) {
    let s = g.shape();
    let row0: Vec<Complex64> = (0..s[0] * s[1])
        .map(|i| {
            let ph = g.offset_phase(0, centered(i / s[1], s[0]), centered(i % s[1], s[1]));
            Complex64::from_polar(scale, sign * 2.0 * PI * ph.rem_euclid(1.0))
        })
        .collect();
    let row1: Vec<Complex64> = (0..s[2] * s[3])
        .map(|i| {
            let ph = g.offset_phase(1, centered(i / s[3], s[2]), centered(i % s[3], s[3]));
            Complex64::from_polar(1.0, sign * 2.0 * PI * ph.rem_euclid(1.0))
        })
        .collect();
    for (i, f0) in row0.iter().enumerate() {
        let chunk = &mut data[i * row1.len()..(i + 1) * row1.len()];
        for (z, f1) in chunk.iter_mut().zip(&row1) {
            *z *= f0 * f1;
        }
    }
}

fn forward(data: &mut [Complex64], g: &TileGeometry, plans: &mut Plans) {
    let shape = g.shape();
    for r in 0..2 {
        let row = &g.rows[r];
        fft_axis(data, shape, 2 * r + 1, &plans.get(row.c, false));
        twiddle(data, shape, row, r, 1.0);
        fft_axis(data, shape, 2 * r, &plans.get(row.a, false));
    }
}

fn backward(data: &mut [Complex64], g: &TileGeometry, plans: &mut Plans) {
    let shape = g.shape();
    for r in 0..2 {
        let row = &g.rows[r];
        fft_axis(data, shape, 2 * r, &plans.get(row.a, true));
        twiddle(data, shape, row, r, -1.0);
        fft_axis(data, shape, 2 * r + 1, &plans.get(row.c, true));
    }
}

/// Per-tile analysis and synthesis sharing FFT plans.
pub struct TileTransform {
    plans: Plans,
    cube: CubeR,
}

impl TileTransform {
    pub fn new(cube: CubeR) -> Self {
        Self {
            plans: Plans::new(),
            cube,
        }
    }

    /// Coefficients of `f` for tile `p`.
    pub fn analyze(&mut self, f: &SpectralSignal, table: &GridTable, p: &TileIndex) -> Result<TileCoefficients> {
        check_table(f, table)?;
        let g = TileGeometry::for_signal(p, f, &self.cube)?;
        let mut z = vec![Complex64::new(0.0, 0.0); g.len()];
        for &(l, w) in table.points_of(&g.index) {
            let v = f.data[l as usize];
            if v.norm_sqr() > 0.0 {
                z[g.residue(f.multi_index(l as usize))] += v * w;
            }
        }
        forward(&mut z, &g, &mut self.plans);
        offsets(&mut z, &g, -1.0, f.cell_volume() / g.det_abs);
        Ok(TileCoefficients { geometry: g, data: z })
    }

    /// Adds the synthesis of one tile's coefficients to `out`.
    pub fn synthesize_into(
        &mut self,
        c: &TileCoefficients,
        table: &GridTable,
        out: &mut SpectralSignal,
    ) -> Result<()> {
        check_table(out, table)?;
        let g = &c.geometry;
        let expected = TileGeometry::for_signal(&g.index, out, &self.cube)?;
        if &expected != g || c.data.len() != expected.len() {
            return Err(Error::InvalidParameter(format!(
                "coefficients of tile {:?} do not match the grid",
                g.index
            )));
        }
        let mut z = c.data.clone();
        offsets(&mut z, g, 1.0, 1.0 / g.det_abs);
        backward(&mut z, g, &mut self.plans);
        for &(l, w) in table.points_of(&g.index) {
            let idx = out.multi_index(l as usize);
            out.data[l as usize] += z[g.residue(idx)] * w;
        }
        Ok(())
    }
}

fn check_table(f: &SpectralSignal, table: &GridTable) -> Result<()> {
    if f.axes != table.axes {
        return Err(Error::InvalidParameter("signal and window table use different grids".into()));
    }
    Ok(())
}

/// Coefficients `c_{p,γ}` for the given tiles, each over one full period
/// of `γ`.
pub fn analysis_coefficients(
    f: &SpectralSignal,
    tiles: &[TileIndex],
    table: &GridTable,
    cube: &CubeR,
) -> Result<Coefficients> {
    let mut t = TileTransform::new(*cube);
    let mut out = Coefficients::default();
    for p in tiles {
        out.tiles.push(t.analyze(f, table, p)?);
    }
    Ok(out)
}

/// Adjoint of [`analysis_coefficients`] with respect to the grid inner
/// product `ΔV·Σ f·conj(g)` and the plain coefficient inner product.
pub fn synthesize(c: &Coefficients, table: &GridTable, cube: &CubeR) -> Result<SpectralSignal> {
    let mut out = SpectralSignal::zeros(table.axes)?;
    let mut t = TileTransform::new(*cube);
    for tile in &c.tiles {
        t.synthesize_into(tile, table, &mut out)?;
    }
    Ok(out)
}

/// `Σ_p T_p*·T_p f` over the tiles touching the support of `f`, one tile at
/// a time.
pub fn apply_frame_operator(f: &SpectralSignal, table: &GridTable, cube: &CubeR) -> Result<SpectralSignal> {
    check_table(f, table)?;
    let mut out = SpectralSignal::zeros(f.axes)?;
    let mut t = TileTransform::new(*cube);
    for p in table.tiles_touching(f) {
        let c = t.analyze(f, table, &p)?;
        t.synthesize_into(&c, table, &mut out)?;
    }
    out.flags = table.flags.clone();
    Ok(out)
}

/// Header lines of the coefficient CSV.
pub fn write_coefficients_header<W: std::io::Write>(mut w: W) -> Result<()> {
    writeln!(w, "# frame coefficients c[p, gamma]; gamma = [[m1/W1, m3/W3], [m2/W2, m4/W4]] with W the cube widths")?;
    writeln!(w, "# lambda,kappa,mu,m1,m2,m3,m4,re,im")?;
    Ok(())
}

/// Rows for one tile, keeping coefficients with `|c| ≥ min_abs`.
pub fn write_tile_coefficients<W: std::io::Write>(t: &TileCoefficients, min_abs: f64, mut w: W) -> Result<()> {
    let p = &t.geometry.index;
    for (pos, z) in t.data.iter().enumerate() {
        if z.norm() < min_abs {
            continue;
        }
        let m = t.geometry.lattice_index(pos);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{:e},{:e}",
            p.lambda, p.kappa[0], p.mu[0], m[0], m[1], m[2], m[3], z.re, z.im
        )?;
    }
    Ok(())
}

/// Writes coefficients with `|c| ≥ min_abs` as CSV.
pub fn write_coefficients_csv<W: std::io::Write>(c: &Coefficients, min_abs: f64, mut w: W) -> Result<()> {
    write_coefficients_header(&mut w)?;
    for t in &c.tiles {
        write_tile_coefficients(t, min_abs, &mut w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame2d::signal::GridAxis;
    use crate::window::WindowSpec;

    #[test]
    fn centered_representatives() {
        assert_eq!((0..4).map(|k| centered(k, 4)).collect::<Vec<_>>(), vec![0, 1, -2, -1]);
        assert_eq!((0..5).map(|k| centered(k, 5)).collect::<Vec<_>>(), vec![0, 1, 2, -2, -1]);
    }

    #[test]
    fn geometry_integers() {
        let cube = CubeR::default();
        let h = [1.75, 0.5, 1.75, 0.5];
        let p = TileIndex {
            lambda: 1,
            kappa: vec![-1],
            mu: vec![3],
        };
        let g = TileGeometry::new(&p, [0.0; 4], h, &cube).unwrap();
        // p11 = 1, p12 = 4·3, p22 = 4
        assert_eq!(g.rows[0].a, 8);
        assert_eq!(g.rows[0].b, 14 * 12 * 2);
        assert_eq!(g.rows[0].c, 160);
        assert_eq!(g.det_abs, 4.0);
        // |Q| = |R|·|det p|²/ΔV
        let dv: f64 = h.iter().product();
        assert!((g.len() as f64 - 78400.0 * 16.0 / dv).abs() < 1e-6);

        let coarse = TileIndex {
            lambda: -3,
            kappa: vec![-1],
            mu: vec![0],
        };
        assert!(matches!(
            TileGeometry::new(&coarse, [0.0; 4], h, &cube),
            Err(Error::GridIncompatible(_))
        ));
        let odd = [1.7, 0.5, 1.75, 0.5];
        assert!(TileGeometry::new(&TileIndex::identity(2), [0.0; 4], odd, &cube).is_err());
    }

    #[test]
    fn residues_identify_lattice_translates() {
        // grid points whose images under p⁻¹ differ by a cube period share a residue
        let cube = CubeR::default();
        let h = [1.75, 0.5, 1.75, 0.5];
        let p = TileIndex {
            lambda: 0,
            kappa: vec![1],
            mu: vec![-2],
        };
        let g = TileGeometry::new(&p, [0.0; 4], h, &cube).unwrap();
        let (r0, r1) = (g.rows[0], g.rows[1]);
        let base = [3usize, 5, 2, 7];
        let shifted = [3 + r0.a, (5 + r0.b) as usize, 2 + r1.a, (7 + r1.b + 2 * r1.c as i64) as usize];
        assert_eq!(g.residue(base), g.residue(shifted));
        let u = |i: [usize; 4]| {
            let b = nalgebra::DMatrix::from_row_slice(2, 2, &std::array::from_fn::<f64, 4, _>(|k| i[k] as f64 * h[k]));
            b * p.inverse_matrix()
        };
        let d = u(shifted) - u(base);
        for (k, w) in [(0usize, 14.0), (1, 20.0)] {
            for row in 0..2 {
                let v = d[(row, k)] / w;
                assert!((v - v.round()).abs() < 1e-9, "{v}");
            }
        }
        let mut other = base;
        other[0] += 1;
        assert_ne!(g.residue(base), g.residue(other));
    }

    fn small_grid() -> [GridAxis; 4] {
        [
            GridAxis::from_spacing(-4.3, 1.75, 6),
            GridAxis::from_spacing(-4.1, 0.5, 18),
            GridAxis::from_spacing(-4.6, 1.75, 6),
            GridAxis::from_spacing(-4.2, 0.5, 18),
        ]
    }

    #[test]
    fn frame_operator_is_multiplier_on_small_grid() {
        let cube = CubeR::default();
        let w = WindowSpec::smooth(0.3).unwrap();
        let table = GridTable::build(small_grid(), w, 1e-9).unwrap();
        let mut f = SpectralSignal::zeros(small_grid()).unwrap();
        let h = f.spacings();
        let mins = f.axes.map(|a| a.min);
        let mut kept = 0;
        for (l, z) in f.data.iter_mut().enumerate() {
            let ok = table.at(l).iter().all(|&(id, _)| {
                TileGeometry::new(&table.tiles[id as usize], mins, h, &cube).is_ok_and(|g| g.len() <= 1 << 17)
            });
            if ok {
                let x = ((l * 7919) % 1000) as f64 / 1000.0;
                *z = Complex64::new(x - 0.5, (x * 13.0).sin());
                kept += 1;
            }
        }
        assert!(kept > 100, "{kept}");
        let sf = apply_frame_operator(&f, &table, &cube).unwrap();
        let r = cube.volume();
        for l in 0..f.len() {
            let expected = f.data[l] * r * table.calderon(l);
            assert!((sf.data[l] - expected).norm() <= 1e-9 * (1.0 + expected.norm()), "{l}");
        }
    }
}
