//! Coherence, error metrics and evaluators for the CUR perturbation bounds.
//!
//! The bound evaluators need the noiseless tensor `A` and the noise `E`
//! separately, so they are diagnostics for synthetic settings only.

use serde::Serialize;

use crate::cur::{select_rows, CurDecomposition, CurVariant};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::tensor::DenseTensor;

/// Largest tolerated `||W^T W - I||_max` for [`coherence`].
pub const ORTHONORMALITY_TOL: f64 = 1e-6;

/// `mu(W) = (d / r) * max_i ||W(i, :)||^2` for `W` with orthonormal columns.
pub fn coherence(w: &Matrix) -> Result<f64> {
    let (d, r) = w.shape();
    if d == 0 || r == 0 {
        return Err(Error::InvalidShape(format!("coherence of a {d}x{r} matrix")));
    }
    let residual = linalg::orthonormality_residual(w);
    if !(residual <= ORTHONORMALITY_TOL) {
        return Err(Error::NotOrthonormal(residual));
    }
    let max_row = w
        .row_iter()
        .map(|row| row.norm_squared())
        .fold(0.0, f64::max);
    Ok(d as f64 / r as f64 * max_row)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    /// `mu(W_i)` for the leading `r_i` left singular vectors of each unfolding.
    pub mode_coherence: Vec<f64>,
    /// Maximum over modes.
    pub coherence: f64,
    /// `min_i sigma_{r_i}(A_(i))`.
    pub sigma_min: f64,
    /// `max_i sigma_1(A_(i))`.
    pub sigma_max: f64,
    /// Leading `r_i` singular values of every unfolding.
    pub singular_values: Vec<Vec<f64>>,
}

pub fn tensor_coherence(a: &DenseTensor, ranks: &[usize]) -> Result<CoherenceReport> {
    crate::cur::validate_ranks(a.dims(), ranks)?;
    let mut mode_coherence = Vec::with_capacity(ranks.len());
    let mut singular_values = Vec::with_capacity(ranks.len());
    for (i, &r) in ranks.iter().enumerate() {
        let f = linalg::truncated_svd(&a.unfold(i)?, r)?;
        mode_coherence.push(coherence(&f.left)?);
        singular_values.push(f.singular_values);
    }
    let sigma_min = singular_values
        .iter()
        .map(|s| s.last().copied().unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    let sigma_max = singular_values
        .iter()
        .map(|s| s.first().copied().unwrap_or(0.0))
        .fold(0.0, f64::max);
    Ok(CoherenceReport {
        coherence: mode_coherence.iter().copied().fold(0.0, f64::max),
        mode_coherence,
        sigma_min,
        sigma_max,
        singular_values,
    })
}

/// `||approx - a||_F / ||a||_F`.
pub fn relative_error(a: &DenseTensor, approx: &DenseTensor) -> Result<f64> {
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Err(Error::ZeroDenominator("reference tensor has zero norm"));
    }
    Ok(approx.checked_sub(a)?.frobenius_norm() / scale)
}

/// `10 log10(||x||^2 / ||x - x_r||^2)`.
pub fn snr_db(x: &DenseTensor, x_r: &DenseTensor) -> Result<f64> {
    let err = x.checked_sub(x_r)?.frobenius_norm();
    if err == 0.0 {
        return Err(Error::ZeroDenominator("reconstruction is exact"));
    }
    Ok(20.0 * (x.frobenius_norm() / err).log10())
}

/// An evaluated bound and whether its premise held, i.e. whether the bound
/// is actually guaranteed on this instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundEstimate {
    pub rhs: f64,
    pub guaranteed: bool,
}

/// Per-mode quantities entering the bounds. `U_i`, `C_i` and `R` are the
/// noiseless parts; `W_i` are the leading left singular vectors of `A_(i)`.
#[derive(Debug, Clone, Serialize)]
pub struct ModeDiagnostics {
    /// `||W_i(I_i, :)^+||_2`.
    pub w_rows_pinv_norm: f64,
    /// `||U_i^+||_2`, taken at rank `r_i`.
    pub intersection_pinv_norm: f64,
    /// `sigma_{r_i}(U_i)`.
    pub intersection_sigma_r: f64,
    /// `||E_{J_i}||_F`.
    pub fiber_noise_fro: f64,
    /// `||E_{I_i,J_i}||_F`.
    pub intersection_noise_fro: f64,
    /// `||E_{I_i,J_i}||_2`.
    pub intersection_noise_norm: f64,
    /// `||R_(i)||_2`.
    pub core_unfolding_norm: f64,
    /// `||A_(i)^+||_2 = 1 / sigma_{r_i}(A_(i))`.
    pub unfolding_pinv_norm: f64,
    /// Largest singular value of `A_(i)`.
    pub unfolding_sigma_1: f64,
    /// `sigma_{r_i}(U_i) > 8 ||E_{I_i,J_i}||_2`.
    pub premise: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub variant: CurVariant,
    /// `||A - A_app||_F` with `A_app` the decomposition's reconstruction.
    pub measured: f64,
    pub general_rhs: f64,
    /// Only for Chidori decompositions.
    pub chidori_rhs: Option<f64>,
    /// `||E_R||_F`.
    pub core_noise_fro: f64,
    pub modes: Vec<ModeDiagnostics>,
    pub premise_holds: bool,
}

struct Diagnostics {
    modes: Vec<ModeDiagnostics>,
    core_noise_fro: f64,
}

fn diagnostics(a: &DenseTensor, e: &DenseTensor, dec: &CurDecomposition) -> Result<Diagnostics> {
    if a.dims() != dec.dims() || e.dims() != dec.dims() {
        return Err(Error::DimensionMismatch(format!(
            "tensor {:?}, noise {:?}, decomposition {:?}",
            a.dims(),
            e.dims(),
            dec.dims()
        )));
    }
    let rows = dec.row_indices();
    let r = a.subtensor(rows)?;
    let core_noise_fro = e.subtensor(rows)?.frobenius_norm();
    let mut modes = Vec::with_capacity(dec.order());
    for (i, &rank) in dec.ranks().iter().enumerate() {
        let svd = linalg::truncated_svd(&a.unfold(i)?, rank)?;
        let w_rows = select_rows(&svd.left, &rows[i]);
        let u = select_rows(&a.select_fibers(i, &dec.fiber_indices()[i])?, &rows[i]);
        let e_j = e.select_fibers(i, &dec.fiber_indices()[i])?;
        let e_ij = select_rows(&e_j, &rows[i]);
        let intersection_pinv_norm = linalg::pinv_spectral_norm(&u, rank)?;
        let intersection_sigma_r = 1.0 / intersection_pinv_norm;
        let intersection_noise_norm = linalg::spectral_norm(&e_ij)?;
        let sigma_r = svd.singular_values.get(rank - 1).copied().unwrap_or(0.0);
        modes.push(ModeDiagnostics {
            w_rows_pinv_norm: linalg::pinv_spectral_norm(&w_rows, rank)?,
            intersection_pinv_norm,
            intersection_sigma_r,
            fiber_noise_fro: e_j.norm(),
            intersection_noise_fro: e_ij.norm(),
            intersection_noise_norm,
            core_unfolding_norm: linalg::spectral_norm(&r.unfold(i)?)?,
            unfolding_pinv_norm: if sigma_r > 0.0 { 1.0 / sigma_r } else { f64::INFINITY },
            unfolding_sigma_1: svd.singular_values.first().copied().unwrap_or(0.0),
            premise: intersection_sigma_r > 8.0 * intersection_noise_norm,
        });
    }
    Ok(Diagnostics {
        modes,
        core_noise_fro,
    })
}

// 0 * inf shows up when a noise term vanishes but a pseudoinverse norm is
// infinite; the term is zero in that case.
fn mul(x: f64, y: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        0.0
    } else {
        x * y
    }
}

fn product_except(values: impl Iterator<Item = f64>, skip: usize, power: i32) -> f64 {
    values
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .fold(1.0, |acc, (_, v)| acc * v.powi(power))
}

fn general_rhs(d: &Diagnostics) -> f64 {
    let n = d.modes.len();
    let w = || d.modes.iter().map(|m| m.w_rows_pinv_norm);
    let mut rhs = mul(2.25f64.powi(n as i32) * w().product::<f64>(), d.core_noise_fro);
    for (j, m) in d.modes.iter().enumerate() {
        let noise = mul(5.0 * m.intersection_pinv_norm * m.w_rows_pinv_norm, m.intersection_noise_fro)
            + mul(2.0 * m.intersection_pinv_norm, m.fiber_noise_fro);
        let scale = 2.25f64.powi((n - 1 - j) as i32) * m.core_unfolding_norm * product_except(w(), j, 1);
        rhs += mul(scale, noise);
    }
    rhs
}

fn chidori_rhs(d: &Diagnostics) -> f64 {
    let n = d.modes.len();
    let w = || d.modes.iter().map(|m| m.w_rows_pinv_norm);
    let mut rhs = mul(2.25f64.powi(n as i32) * w().product::<f64>(), d.core_noise_fro);
    for (j, m) in d.modes.iter().enumerate() {
        let noise = mul(5.0 * m.w_rows_pinv_norm, m.intersection_noise_fro) + 2.0 * m.fiber_noise_fro;
        let scale = 2.25f64.powi((n - 1 - j) as i32)
            * m.core_unfolding_norm
            * product_except(w(), j, 2)
            * m.unfolding_pinv_norm
            * m.w_rows_pinv_norm;
        rhs += mul(scale, noise);
    }
    rhs
}

fn premise(d: &Diagnostics) -> bool {
    d.modes.iter().all(|m| m.premise)
}

/// Error bound for any Fiber or Chidori decomposition of `a + e` with
/// respect to the noiseless `a` of multilinear rank `dec.ranks()`.
pub fn general_error_bound(a: &DenseTensor, e: &DenseTensor, dec: &CurDecomposition) -> Result<BoundEstimate> {
    let d = diagnostics(a, e, dec)?;
    Ok(BoundEstimate {
        rhs: general_rhs(&d),
        guaranteed: premise(&d),
    })
}

/// Bound specialized to Chidori index sets, in terms of singular vectors of
/// the unfoldings of `a` only.
pub fn chidori_error_bound(a: &DenseTensor, e: &DenseTensor, dec: &CurDecomposition) -> Result<BoundEstimate> {
    require_chidori(dec)?;
    let d = diagnostics(a, e, dec)?;
    Ok(BoundEstimate {
        rhs: chidori_rhs(&d),
        guaranteed: premise(&d),
    })
}

fn require_chidori(dec: &CurDecomposition) -> Result<()> {
    match dec.variant() {
        CurVariant::Chidori => Ok(()),
        CurVariant::Fiber => Err(Error::InvalidConfig(
            "this bound applies to Chidori decompositions only".into(),
        )),
    }
}

/// Bound for uniformly sampled Chidori decompositions in terms of the
/// coherence-free quantities `sigma_min(a)`, `sigma_max(a)` and the sampling
/// ratios. `delta` in `[0, 1)` and `eta >= 0` are the concentration
/// parameters; the premise is checked for every mode.
pub fn uniform_sampling_bound(
    a: &DenseTensor,
    e: &DenseTensor,
    dec: &CurDecomposition,
    delta: f64,
    eta: f64,
) -> Result<BoundEstimate> {
    require_chidori(dec)?;
    if !(0.0..1.0).contains(&delta) || !(eta >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need 0 <= delta < 1 and eta >= 0, got delta={delta}, eta={eta}"
        )));
    }
    let d = diagnostics(a, e, dec)?;
    let n = dec.order();
    let nf = n as f64;
    let sigma_min = d
        .modes
        .iter()
        .map(|m| 1.0 / m.unfolding_pinv_norm)
        .fold(f64::INFINITY, f64::min);
    let sigma_max = d.modes.iter().map(|m| m.unfolding_sigma_1).fold(0.0, f64::max);
    let kappa = sigma_max / sigma_min;
    let ratios: Vec<f64> = dec
        .dims()
        .iter()
        .zip(dec.row_indices())
        .map(|(&di, set)| di as f64 / set.len() as f64)
        .collect();
    let shrink = (1.0 - delta).powf(nf / 2.0);
    let spread = ((1.0 + eta) / (1.0 - delta)).powf(nf / 2.0);
    let all_ratio: f64 = ratios.iter().product();

    let term1 = mul(2.25f64.powi(n as i32) * all_ratio.sqrt() / shrink, d.core_noise_fro);
    let term2 = mul(
        9f64.powi(n as i32) / 4f64.powi(n as i32 - 1)
            * kappa
            * spread
            * (all_ratio / (1.0 - delta).powi(n as i32)).sqrt(),
        d.core_noise_fro,
    );
    let mut term3 = 0.0;
    for (j, m) in d.modes.iter().enumerate() {
        let others = product_except(ratios.iter().map(|r| r / (1.0 - delta)), j, 1);
        term3 += mul(2.25f64.powi((n - 1 - j) as i32) * others.sqrt(), m.fiber_noise_fro);
    }
    term3 = mul(2.0 * kappa * spread, term3);

    let lhs = shrink * all_ratio.recip().sqrt() * sigma_min;
    let guaranteed = d.modes.iter().all(|m| lhs >= 8.0 * m.intersection_noise_norm);
    Ok(BoundEstimate {
        rhs: term1 + term2 + term3,
        guaranteed,
    })
}

/// Measured error of `dec` (built from `a + e`) against `a`, with every
/// applicable bound and its ingredients.
pub fn bound_report(a: &DenseTensor, e: &DenseTensor, dec: &CurDecomposition) -> Result<BoundReport> {
    let d = diagnostics(a, e, dec)?;
    let measured = a.checked_sub(&dec.reconstruct()?)?.frobenius_norm();
    Ok(BoundReport {
        variant: dec.variant(),
        measured,
        general_rhs: general_rhs(&d),
        chidori_rhs: (dec.variant() == CurVariant::Chidori).then(|| chidori_rhs(&d)),
        core_noise_fro: d.core_noise_fro,
        premise_holds: premise(&d),
        modes: d.modes,
    })
}
