//! CP decomposition by alternating least squares on top of the MTTKRP
//! kernels.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coo::CooTensor;
use crate::error::{Result, TensorError};
use crate::kernels::{FactorMatrix, OpCount};
use crate::par::Exec;
use crate::repr::{ModeRep, ModeReps};

/// Symmetric `R x R` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    rank: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn from_vec(rank: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rank * rank {
            return Err(TensorError::dims(format!(
                "{} entries for a {rank}x{rank} matrix",
                data.len()
            )));
        }
        Ok(GramMatrix { rank, data })
    }

    pub fn identity(rank: usize) -> Self {
        let mut data = vec![0.0; rank * rank];
        for p in 0..rank {
            data[p * rank + p] = 1.0;
        }
        GramMatrix { rank, data }
    }

    pub fn ones(rank: usize) -> Self {
        GramMatrix {
            rank,
            data: vec![1.0; rank * rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.data[p * self.rank + q]
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Ordinary matrix product.
    pub fn matmul(&self, other: &GramMatrix) -> GramMatrix {
        let r = self.rank;
        let mut data = vec![0.0; r * r];
        for p in 0..r {
            for k in 0..r {
                let a = self.data[p * r + k];
                for q in 0..r {
                    data[p * r + q] += a * other.data[k * r + q];
                }
            }
        }
        GramMatrix { rank: r, data }
    }

    pub fn sub(&self, other: &GramMatrix) -> GramMatrix {
        GramMatrix {
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let r = self.rank;
        let mut worst = 0.0f64;
        for p in 0..r {
            for q in p + 1..r {
                worst = worst.max((self.data[p * r + q] - self.data[q * r + p]).abs());
            }
        }
        worst
    }
}

/// `f^T f`.
pub fn gram(f: &FactorMatrix) -> GramMatrix {
    let r = f.cols();
    let mut data = vec![0.0; r * r];
    for i in 0..f.rows() {
        let row = f.row(i);
        for p in 0..r {
            let a = row[p];
            for q in p..r {
                data[p * r + q] += a * row[q];
            }
        }
    }
    for p in 0..r {
        for q in 0..p {
            data[p * r + q] = data[q * r + p];
        }
    }
    GramMatrix { rank: r, data }
}

/// Elementwise product of every Gram matrix except `skip`.
pub fn hadamard_all_but(grams: &[GramMatrix], skip: usize) -> GramMatrix {
    let rank = grams.first().map_or(0, |g| g.rank);
    let mut out = GramMatrix::ones(rank);
    for (d, g) in grams.iter().enumerate() {
        if d == skip {
            continue;
        }
        out.data.iter_mut().zip(&g.data).for_each(|(o, v)| *o *= v);
    }
    out
}

/// Moore-Penrose pseudo-inverse of a symmetric positive semidefinite matrix
/// through its eigendecomposition. Eigenvalues at or below
/// `rel_tol * lambda_max` are treated as zero; the default `rel_tol` is
/// `R * f64::EPSILON`.
pub fn pinv_spsd(g: &GramMatrix, rel_tol: Option<f64>) -> Result<GramMatrix> {
    let r = g.rank;
    if r == 0 {
        return Ok(g.clone());
    }
    let scale = g.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if g.max_asymmetry() > 1e-12 * scale {
        return Err(TensorError::arg(format!(
            "matrix is not symmetric (asymmetry {:e})",
            g.max_asymmetry()
        )));
    }
    let m = DMatrix::from_row_slice(r, r, &g.data);
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = rel_tol.unwrap_or(r as f64 * f64::EPSILON) * lmax;
    let v = &eig.eigenvectors;
    let mut data = vec![0.0; r * r];
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        let inv = 1.0 / lam;
        for p in 0..r {
            let vp = v[(p, k)] * inv;
            for q in 0..r {
                data[p * r + q] += vp * v[(q, k)];
            }
        }
    }
    Ok(GramMatrix { rank: r, data })
}

/// `[[lambda; U_1, ..., U_N]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KruskalModel {
    pub lambda: Vec<f64>,
    pub factors: Vec<FactorMatrix>,
}

impl KruskalModel {
    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rows()).collect()
    }

    /// Model value at one coordinate.
    pub fn value_at(&self, idx: &[u32]) -> f64 {
        (0..self.rank())
            .map(|r| {
                self.lambda[r]
                    * self
                        .factors
                        .iter()
                        .zip(idx)
                        .map(|(f, &i)| f.get(i as usize, r))
                        .product::<f64>()
            })
            .sum()
    }

    /// Squared Frobenius norm from the factor Gram matrices.
    pub fn norm_sq(&self) -> f64 {
        let grams: Vec<GramMatrix> = self.factors.iter().map(gram).collect();
        norm_sq_from_grams(&self.lambda, &grams)
    }
}

fn norm_sq_from_grams(lambda: &[f64], grams: &[GramMatrix]) -> f64 {
    let r = lambda.len();
    let all = hadamard_all_but(grams, usize::MAX);
    let mut s = 0.0;
    for p in 0..r {
        for q in 0..r {
            s += lambda[p] * lambda[q] * all.get(p, q);
        }
    }
    s
}

/// Dense tensor holding every nonzero value of a Kruskal model.
pub fn kruskal_to_coo(model: &KruskalModel) -> Result<CooTensor> {
    let dims = model.dims();
    let total: usize = dims.iter().product();
    let mut entries = Vec::new();
    let mut idx = vec![0u32; dims.len()];
    for mut z in 0..total {
        for (d, &dim) in dims.iter().enumerate() {
            idx[d] = (z % dim) as u32;
            z /= dim;
        }
        let v = model.value_at(&idx);
        if v != 0.0 {
            entries.push((idx.clone(), v));
        }
    }
    Ok(CooTensor::from_entries(dims, entries)?.canonicalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpdConfig {
    pub rank: usize,
    pub max_iters: usize,
    pub fit_tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for CpdConfig {
    fn default() -> Self {
        CpdConfig {
            rank: 32,
            max_iters: 50,
            fit_tol: 1e-5,
            seed: 0,
            exec: Exec::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    /// 0 is the initial guess.
    pub iteration: usize,
    pub fit: f64,
    pub delta: f64,
    pub mttkrp_seconds: Vec<f64>,
    pub ops: OpCount,
}

impl IterRecord {
    pub fn csv_header(order: usize) -> String {
        let mut h = String::from("iteration,fit,delta");
        for d in 0..order {
            h.push_str(&format!(",mttkrp_s_mode{d}"));
        }
        h.push_str(",muls,adds,ops");
        h
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{},{}", self.iteration, self.fit, self.delta);
        for t in &self.mttkrp_seconds {
            s.push_str(&format!(",{t}"));
        }
        s.push_str(&format!(",{},{},{}", self.ops.muls, self.ops.adds, self.ops.total()));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpdOutput {
    pub model: KruskalModel,
    pub history: Vec<IterRecord>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl CpdOutput {
    pub fn final_fit(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.fit)
    }
}

/// Seeded uniform(0, 1) factors, one per dimension, drawn in mode order.
pub fn random_factors(dims: &[usize], rank: usize, seed: u64) -> Vec<FactorMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    dims.iter().map(|&d| FactorMatrix::random(d, rank, &mut rng)).collect()
}

/// Result of one mode update.
pub struct ModeUpdate {
    pub factor: FactorMatrix,
    pub mttkrp: FactorMatrix,
    pub ops: OpCount,
    pub seconds: f64,
}

/// `factor_n = MTTKRP(X, factors, n) * pinv(hadamard of the other Grams)`.
pub fn als_update_mode(
    rep: &ModeRep,
    factors: &[FactorMatrix],
    grams: &[GramMatrix],
    mode: usize,
    exec: Exec,
) -> Result<ModeUpdate> {
    let start = Instant::now();
    let (m, ops) = rep.mttkrp(factors, mode, exec)?;
    let seconds = start.elapsed().as_secs_f64();
    let v = hadamard_all_but(grams, mode);
    let vinv = pinv_spsd(&v, None)?;
    Ok(ModeUpdate {
        factor: m.mul_square(vinv.data()),
        mttkrp: m,
        ops,
        seconds,
    })
}

/// Fit `1 - |X - X~| / |X|` with the residual from the Gram identity.
fn fit_from_parts(norm_x_sq: f64, model_sq: f64, inner: f64) -> f64 {
    let resid_sq = (norm_x_sq + model_sq - 2.0 * inner).max(0.0);
    1.0 - resid_sq.sqrt() / norm_x_sq.sqrt()
}

fn inner_with_last(lambda: &[f64], mttkrp: &FactorMatrix, last: &FactorMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..last.rows() {
        for (r, (&a, &b)) in mttkrp.row(i).iter().zip(last.row(i)).enumerate() {
            s += lambda[r] * a * b;
        }
    }
    s
}

/// CP-ALS over per-mode representations. Modes are updated in ascending
/// order; each updated factor has its columns scaled to unit 2-norm and the
/// last mode's norms become `lambda`. Stops when the fit changes by less
/// than `fit_tol` or after `max_iters` sweeps.
pub fn cp_als(reps: &ModeReps, cfg: &CpdConfig) -> Result<CpdOutput> {
    let n = reps.order();
    let dims = reps.dims().to_vec();
    let r = cfg.rank;
    if r == 0 {
        return Err(TensorError::arg("rank must be at least 1"));
    }
    if reps.nnz() == 0 || reps.norm_sq() == 0.0 {
        return Err(TensorError::arg("cannot decompose an empty tensor"));
    }
    let mut warnings = Vec::new();
    if dims.iter().any(|&d| r > d) {
        warnings.push(format!("rank {r} exceeds a tensor dimension {dims:?}"));
    }
    let norm_x_sq = reps.norm_sq();
    let mut factors = random_factors(&dims, r, cfg.seed);
    let mut grams: Vec<GramMatrix> = factors.iter().map(gram).collect();
    let mut lambda = vec![1.0; r];

    let last = n - 1;
    let start = Instant::now();
    let (m0, ops0) = reps.mode(last).mttkrp(&factors, last, cfg.exec)?;
    let init_secs = start.elapsed().as_secs_f64();
    let fit0 = fit_from_parts(
        norm_x_sq,
        norm_sq_from_grams(&lambda, &grams),
        inner_with_last(&lambda, &m0, &factors[last]),
    );
    let mut seconds0 = vec![0.0; n];
    seconds0[last] = init_secs;
    let mut history = vec![IterRecord {
        iteration: 0,
        fit: fit0,
        delta: 0.0,
        mttkrp_seconds: seconds0,
        ops: ops0,
    }];

    let mut converged = false;
    let mut fit_prev = fit0;
    for iter in 1..=cfg.max_iters {
        let mut seconds = vec![0.0; n];
        let mut ops = OpCount::default();
        let mut last_mttkrp = None;
        for mode in 0..n {
            let up = als_update_mode(reps.mode(mode), &factors, &grams, mode, cfg.exec)?;
            let mut factor = up.factor;
            if !factor.is_finite() {
                return Err(TensorError::Numerical {
                    iteration: iter,
                    msg: format!("non-finite entries in factor {mode}"),
                });
            }
            let norms = factor.normalize_columns();
            if mode == last {
                lambda = norms;
                last_mttkrp = Some(up.mttkrp);
            }
            grams[mode] = gram(&factor);
            factors[mode] = factor;
            seconds[mode] = up.seconds;
            ops += up.ops;
        }
        let fit = fit_from_parts(
            norm_x_sq,
            norm_sq_from_grams(&lambda, &grams),
            inner_with_last(&lambda, last_mttkrp.as_ref().expect("last mode updated"), &factors[last]),
        );
        if !fit.is_finite() {
            return Err(TensorError::Numerical {
                iteration: iter,
                msg: "fit is not finite".into(),
            });
        }
        let delta = fit - fit_prev;
        history.push(IterRecord {
            iteration: iter,
            fit,
            delta,
            mttkrp_seconds: seconds,
            ops,
        });
        fit_prev = fit;
        if delta.abs() < cfg.fit_tol {
            converged = true;
            break;
        }
    }

    Ok(CpdOutput {
        model: KruskalModel { lambda, factors },
        history,
        converged,
        warnings,
    })
}
