use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TensorError};

/// Dense row-major `rows x cols` matrix; `cols` is the decomposition rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FactorMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, v: f64) -> Self {
        FactorMatrix {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TensorError::dims(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(FactorMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(TensorError::dims("ragged rows"));
        }
        Ok(FactorMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    /// Entries drawn uniformly from `[0, 1)`.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen::<f64>()).collect();
        FactorMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, r: usize) -> f64 {
        self.data[i * self.cols + r]
    }

    pub fn set(&mut self, i: usize, r: usize, v: f64) {
        self.data[i * self.cols + r] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sq.iter_mut().zip(self.row(i)) {
                *s += v * v;
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Divide each column by its 2-norm and return the norms. Zero columns
    /// are left untouched.
    pub fn normalize_columns(&mut self) -> Vec<f64> {
        let norms = self.column_norms();
        for i in 0..self.rows {
            let cols = self.cols;
            let row = &mut self.data[i * cols..(i + 1) * cols];
            for (v, &n) in row.iter_mut().zip(&norms) {
                if n > 0.0 {
                    *v /= n;
                }
            }
        }
        norms
    }

    /// `self * m` for a row-major `cols x cols` matrix `m`.
    pub fn mul_square(&self, m: &[f64]) -> FactorMatrix {
        let r = self.cols;
        assert_eq!(m.len(), r * r);
        let mut out = FactorMatrix::zeros(self.rows, r);
        for i in 0..self.rows {
            let src = self.row(i);
            let dst = out.row_mut(i);
            for (p, &a) in src.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(&m[p * r..(p + 1) * r]) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn scaled(&self, alpha: f64) -> FactorMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Sum of all entries; used as an output checksum.
    pub fn checksum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Largest per-row `|a_i - b_i| / |b_i|` (2-norms). Rows where `b` is zero
/// are measured against the largest row norm of `b` instead.
pub fn max_relative_row_deviation(a: &FactorMatrix, b: &FactorMatrix) -> f64 {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols), "shape mismatch");
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = (0..b.rows).map(|i| norm(b.row(i))).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    (0..a.rows)
        .map(|i| {
            let diff: f64 = a
                .row(i)
                .iter()
                .zip(b.row(i))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let denom = norm(b.row(i));
            diff / if denom > 0.0 { denom } else { scale }
        })
        .fold(0.0, f64::max)
}
