//! Truncated HOSVD, sequentially truncated HOSVD and HOOI.
//!
//! Leading left singular vectors of each unfolding are taken from the
//! eigendecomposition of its Gram matrix, which is accumulated straight from
//! tensor storage without materializing the unfolding.

use nalgebra::DMatrixView;

use crate::cur::{validate_ranks, HosvdDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::tensor::DenseTensor;

pub const HOOI_MAX_ITERS: usize = 50;
pub const HOOI_TOL: f64 = 1e-8;

/// `X_(k) X_(k)^T` for the mode-`k` unfolding of `t`.
pub fn mode_gram(t: &DenseTensor, mode: usize) -> Result<Matrix> {
    let dims = t.dims();
    if mode >= dims.len() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: dims.len(),
        });
    }
    let left: usize = dims[..mode].iter().product();
    let dk = dims[mode];
    let data = t.data();
    let mut g = Matrix::zeros(dk, dk);
    // Only contiguous column-major views go into gemm; transposes are
    // materialized block by block to bound the extra memory.
    if left == 1 {
        const BLOCK: usize = 4096;
        for blk in data.chunks(dk * BLOCK) {
            let x = DMatrixView::from_slice(blk, dk, blk.len() / dk);
            let xt = x.transpose();
            g.gemm(1.0, &x, &xt, 1.0);
        }
    } else if left < 8 {
        let x = t.unfold(mode)?;
        g.gemm(1.0, &x, &x.transpose(), 0.0);
    } else {
        // Column block r of the unfolding is the transpose of the r-th
        // contiguous left x dk slab.
        for slab in data.chunks_exact(left * dk) {
            let x = DMatrixView::from_slice(slab, left, dk);
            let xt = x.transpose();
            g.gemm(1.0, &xt, &x, 1.0);
        }
    }
    Ok(g)
}

fn leading(t: &DenseTensor, mode: usize, r: usize) -> Result<Matrix> {
    Ok(linalg::leading_from_gram(mode_gram(t, mode)?, r)?.0)
}

fn project(a: &DenseTensor, factors: &[Matrix], skip: Option<usize>) -> Result<DenseTensor> {
    let ts: Vec<Matrix> = factors.iter().map(|w| w.transpose()).collect();
    let mats: Vec<Option<&Matrix>> = ts
        .iter()
        .enumerate()
        .map(|(i, w)| (Some(i) != skip).then_some(w))
        .collect();
    a.multi_mode_product(&mats)
}

/// Truncated HOSVD: `W_i` are the leading `r_i` left singular vectors of
/// every unfolding of `a`, and the core is `a x_i W_i^T`.
pub fn hosvd(a: &DenseTensor, ranks: &[usize]) -> Result<HosvdDecomposition> {
    validate_ranks(a.dims(), ranks)?;
    let factors = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| leading(a, i, r))
        .collect::<Result<Vec<_>>>()?;
    let core = project(a, &factors, None)?;
    HosvdDecomposition::new(core, factors)
}

/// Sequentially truncated HOSVD, compressing modes in ascending order.
pub fn st_hosvd(a: &DenseTensor, ranks: &[usize]) -> Result<HosvdDecomposition> {
    validate_ranks(a.dims(), ranks)?;
    let mut y = a.clone();
    let mut factors = Vec::with_capacity(ranks.len());
    for (i, &r) in ranks.iter().enumerate() {
        let w = leading(&y, i, r)?;
        y = y.mode_product(&w.transpose(), i)?;
        factors.push(w);
    }
    HosvdDecomposition::new(y, factors)
}

/// HOOI with the default iteration limits.
pub fn hooi(a: &DenseTensor, ranks: &[usize]) -> Result<HosvdDecomposition> {
    Ok(hooi_with_history(a, ranks, HOOI_MAX_ITERS, HOOI_TOL)?.0)
}

/// Higher-order orthogonal iteration started from [`st_hosvd`].
///
/// Stops when the relative change of the core norm drops below `tol` or after
/// `max_iters` sweeps. Also returns the approximation error after each
/// sweep, computed as `sqrt(||a||^2 - ||core||^2)`.
pub fn hooi_with_history(
    a: &DenseTensor,
    ranks: &[usize],
    max_iters: usize,
    tol: f64,
) -> Result<(HosvdDecomposition, Vec<f64>)> {
    let init = st_hosvd(a, ranks)?;
    let norm_a2 = a.frobenius_norm().powi(2);
    let mut factors = init.factors().to_vec();
    let mut core = init.core().clone();
    let mut prev = core.frobenius_norm();
    let mut history = Vec::new();
    let n = ranks.len();
    for _ in 0..max_iters {
        for i in 0..n {
            let y = project(a, &factors, Some(i))?;
            factors[i] = leading(&y, i, ranks[i])?;
            if i == n - 1 {
                core = y.mode_product(&factors[i].transpose(), i)?;
            }
        }
        let g = core.frobenius_norm();
        history.push((norm_a2 - g * g).max(0.0).sqrt());
        let change = (g - prev).abs();
        prev = g;
        if change <= tol * g || g == 0.0 {
            break;
        }
    }
    Ok((HosvdDecomposition::new(core, factors)?, history))
}
