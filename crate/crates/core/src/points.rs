use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n × d` table of observations stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    /// Build from a flat row-major buffer. `data.len()` must be a multiple of `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::input(format!(
                "buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite coordinate in row {}",
                pos / dim
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::input("point set is empty"))?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::input(format!(
                    "row {i} has dimension {} but expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(dim, data)
    }

    /// 1-D convenience constructor.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Rows selected by `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        PointSet {
            dim: self.dim,
            data,
        }
    }

    /// Per-coordinate `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for row in self.rows() {
            for (slot, &v) in b.iter_mut().zip(row) {
                slot.0 = slot.0.min(v);
                slot.1 = slot.1.max(v);
            }
        }
        b
    }

    /// Copy with `shift` added to every row.
    pub fn translated(&self, shift: &[f64]) -> PointSet {
        assert_eq!(shift.len(), self.dim);
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, v)| v + shift[i % self.dim])
            .collect();
        PointSet {
            dim: self.dim,
            data,
        }
    }

    pub fn scaled(&self, factor: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub(crate) fn check_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::input("point set is empty"))
        } else {
            Ok(())
        }
    }
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

#[inline]
pub fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Median of a slice (mean of the two middle values for even length).
pub(crate) fn median_of(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Coordinate-wise median of the given rows.
pub(crate) fn coordinate_median<'a, I>(rows: I, dim: usize) -> Vec<f64>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let mut column = Vec::new();
    (0..dim)
        .map(|j| {
            column.clear();
            column.extend(rows.clone().map(|r| r[j]));
            median_of(&mut column)
        })
        .collect()
}
