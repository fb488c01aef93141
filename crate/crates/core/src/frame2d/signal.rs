//! Uniformly gridded samples of `f̂` on `M₂(R) ≅ R⁴`, and their file
//! format.
//!
//! File layout: an 8-byte little-endian header length, a JSON header, then
//! the samples as interleaved `re, im` little-endian `f64`, row-major with
//! the last axis fastest.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "tiling-frames/spectral-signal";
pub const FORMAT_VERSION: u32 = 1;
pub const LAYOUT: &str = "interleaved re,im float64 little-endian";

/// One grid axis: `count` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn from_spacing(min: f64, spacing: f64, count: usize) -> Self {
        Self {
            min,
            max: min + spacing * (count as f64 - 1.0),
            count,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count as f64 - 1.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + self.spacing() * i as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    axes: [GridAxis; 4],
    endianness: String,
    layout: String,
    order: String,
    /// Linear indices of grid points evaluated at a perturbed location.
    flags: Vec<usize>,
}

/// Samples of `f̂` on a uniform grid over the flattened entries
/// `(b₁₁, b₁₂, b₂₁, b₂₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSignal {
    pub axes: [GridAxis; 4],
    pub data: Vec<Complex64>,
    pub flags: Vec<usize>,
}

impl SpectralSignal {
    pub fn zeros(axes: [GridAxis; 4]) -> Result<Self> {
        validate_axes(&axes)?;
        let len = axes.iter().map(|a| a.count).product();
        Ok(Self {
            axes,
            data: vec![Complex64::new(0.0, 0.0); len],
            flags: vec![],
        })
    }

    pub fn from_data(axes: [GridAxis; 4], data: Vec<Complex64>) -> Result<Self> {
        validate_axes(&axes)?;
        let len: usize = axes.iter().map(|a| a.count).product();
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: data.len(),
            });
        }
        Ok(Self {
            axes,
            data,
            flags: vec![],
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn counts(&self) -> [usize; 4] {
        self.axes.map(|a| a.count)
    }

    pub fn spacings(&self) -> [f64; 4] {
        self.axes.map(|a| a.spacing())
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    pub fn multi_index(&self, linear: usize) -> [usize; 4] {
        let c = self.counts();
        let mut r = linear;
        let mut out = [0; 4];
        for k in (0..4).rev() {
            out[k] = r % c[k];
            r /= c[k];
        }
        out
    }

    pub fn linear_index(&self, idx: [usize; 4]) -> usize {
        let c = self.counts();
        ((idx[0] * c[1] + idx[1]) * c[2] + idx[2]) * c[3] + idx[3]
    }

    /// Flattened matrix entries at a grid point.
    pub fn point(&self, linear: usize) -> [f64; 4] {
        let idx = self.multi_index(linear);
        std::array::from_fn(|k| self.axes[k].point(idx[k]))
    }

    pub fn same_grid(&self, other: &SpectralSignal) -> Result<()> {
        if self.axes != other.axes {
            return Err(Error::InvalidParameter("signals live on different grids".into()));
        }
        Ok(())
    }

    /// Grid inner product `ΔV·Σ f·conj(g)`.
    pub fn inner(&self, other: &SpectralSignal) -> Result<Complex64> {
        self.same_grid(other)?;
        let s: Complex64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.cell_volume())
    }

    /// Grid `L²` norm.
    pub fn norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    /// `‖self − other‖ / ‖other‖`.
    pub fn relative_error(&self, reference: &SpectralSignal) -> Result<f64> {
        self.same_grid(reference)?;
        let num: f64 = self
            .data
            .iter()
            .zip(&reference.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.data.iter().map(|z| z.norm_sqr()).sum();
        if den == 0.0 {
            return Ok(num.sqrt());
        }
        Ok((num / den).sqrt())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            axes: self.axes,
            endianness: "little".into(),
            layout: LAYOUT.into(),
            order: "row-major".into(),
            flags: self.flags.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::with_capacity(self.data.len() * 16);
        for z in &self.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len) as usize;
        if len > 1 << 30 {
            return Err(Error::InvalidParameter(format!("implausible header length {len}")));
        }
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let header: Header = serde_json::from_slice(&json)?;
        if header.format != FORMAT_TAG || header.version != FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported signal format {} v{}",
                header.format, header.version
            )));
        }
        if header.endianness != "little" || header.layout != LAYOUT || header.order != "row-major" {
            return Err(Error::InvalidParameter("unsupported sample layout".into()));
        }
        validate_axes(&header.axes)?;
        let n: usize = header.axes.iter().map(|a| a.count).product();
        let mut raw = vec![0u8; n * 16];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        let mut s = Self::from_data(header.axes, data)?;
        s.flags = header.flags;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

fn validate_axes(axes: &[GridAxis; 4]) -> Result<()> {
    for (k, a) in axes.iter().enumerate() {
        if a.count < 2 || !(a.max > a.min) || !a.min.is_finite() || !a.max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "axis {k} needs at least two points and min < max, got {a:?}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes() -> [GridAxis; 4] {
        [
            GridAxis::from_spacing(-1.0, 0.5, 3),
            GridAxis::from_spacing(0.0, 0.25, 4),
            GridAxis::from_spacing(2.0, 1.0, 2),
            GridAxis::from_spacing(-3.0, 0.125, 5),
        ]
    }

    #[test]
    fn indexing() {
        let s = SpectralSignal::zeros(axes()).unwrap();
        assert_eq!(s.len(), 3 * 4 * 2 * 5);
        for l in [0, 7, 39, 119] {
            assert_eq!(s.linear_index(s.multi_index(l)), l);
        }
        assert_eq!(s.point(s.linear_index([2, 1, 1, 4])), [0.0, 0.25, 3.0, -2.5]);
        assert_eq!(s.cell_volume(), 0.5 * 0.25 * 1.0 * 0.125);
    }

    #[test]
    fn bit_exact_round_trip() {
        let mut s = SpectralSignal::zeros(axes()).unwrap();
        for (i, z) in s.data.iter_mut().enumerate() {
            *z = Complex64::new((i as f64).sin() * 1e-300, -(i as f64).exp() / 3.0);
        }
        s.data[5] = Complex64::new(f64::MIN_POSITIVE / 2.0, -0.0);
        s.flags = vec![3, 17];
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = SpectralSignal::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.axes, s.axes);
        assert_eq!(back.flags, s.flags);
        for (a, b) in back.data.iter().zip(&s.data) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sig.bin");
        s.save(&p).unwrap();
        let mut again = Vec::new();
        SpectralSignal::load(&p).unwrap().write_to(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn rejects_bad_input() {
        let mut a = axes();
        a[0].count = 1;
        assert!(SpectralSignal::zeros(a).is_err());
        assert!(SpectralSignal::from_data(axes(), vec![]).is_err());
        let mut buf = Vec::new();
        SpectralSignal::zeros(axes()).unwrap().write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 1);
        assert!(SpectralSignal::read_from(buf.as_slice()).is_err());
    }
}
