//! Finite point samples and their plain-text file format.
//!
//! The text format is one point per line, coordinates separated by single
//! commas, no header, LF line endings. The dimension is taken from the first
//! line and enforced on every following line.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// An ordered, immutable list of points sharing one ambient dimension.
///
/// Point order matters: it drives tie-breaking in the spanning-tree builders
/// and the scan order of greedy packings. Duplicate points are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("ambient dimension must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::input(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::input(format!(
                "point {} has a non-finite coordinate",
                pos / dim
            )));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// One-dimensional cloud from scalar positions.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::from_flat(1, xs.to_vec())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Cloud made of the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            dim: self.dim,
            coords,
        }
    }

    /// Applies `f` to every coordinate.
    pub fn map_coords(&self, f: impl Fn(f64) -> f64) -> Result<PointCloud> {
        Self::from_flat(self.dim, self.coords.iter().map(|&c| f(c)).collect())
    }

    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut pts = self.points();
        let first = pts.next()?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in pts {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    /// Parses the comma-separated point format. Errors carry 1-based line
    /// numbers.
    pub fn parse(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut dim = None;
        let mut coords = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            if line.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    message: "empty line".into(),
                });
            }
            let before = coords.len();
            for field in line.split(',') {
                let value: f64 = field.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("malformed coordinate {field:?}"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("non-finite coordinate {field:?}"),
                    });
                }
                coords.push(value);
            }
            let found = coords.len() - before;
            match dim {
                None => dim = Some(found),
                Some(d) if d != found => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected {d} coordinates, found {found}"),
                    })
                }
                Some(_) => {}
            }
        }
        let dim = dim.ok_or_else(|| Error::input("point file contains no points"))?;
        Self::from_flat(dim, coords)
    }

    /// Renders the point format. Coordinates use the shortest decimal that
    /// parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.coords.len() * 20);
        for p in self.points() {
            for (k, c) in p.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}
