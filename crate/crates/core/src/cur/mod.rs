//! Chidori and Fiber tensor CUR decompositions.
//!
//! Both variants keep a core subtensor `R = A(I_0, ..., I_{n-1})`, fiber
//! matrices `C_i` (columns `J_i` of the mode-`i` unfolding) and intersections
//! `U_i = C_i(I_i, :)`. The approximation is
//! `R x_0 (C_0 U_0^+) x_1 ... x_{n-1} (C_{n-1} U_{n-1}^+)`, where each
//! pseudoinverse is taken of the best rank-`r_i` approximation of `U_i`.
//!
//! Chidori CUR uses `J_i = x_{j!=i} I_j`, so `U_i` is exactly the mode-`i`
//! unfolding of `R`. Fiber CUR samples `J_i` independently.

mod characterization;
mod convert;
pub mod sampling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::tensor::{composite_index, DenseTensor, IndexSet};

pub use characterization::{check_characterization, projection_reconstruct, CharacterizationReport};
pub use convert::{cur_to_hosvd, HosvdDecomposition};
pub use sampling::{Distribution, SamplingPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurVariant {
    Chidori,
    Fiber,
}

/// How the fiber indices `J_i` are chosen in [`cur_with_indices`].
#[derive(Debug, Clone, Copy)]
pub enum FiberSelection<'a> {
    /// `J_i = x_{j!=i} I_j`.
    Chidori,
    Explicit(&'a [IndexSet]),
}

/// The mode-`i` factor `C_i U_i^+` together with the rank used for `U_i^+`.
#[derive(Debug, Clone)]
pub struct ModeFactor {
    pub matrix: Matrix,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct CurDecomposition {
    variant: CurVariant,
    dims: Vec<usize>,
    core: DenseTensor,
    fibers: Vec<Matrix>,
    intersections: Vec<Matrix>,
    row_indices: Vec<IndexSet>,
    fiber_indices: Vec<IndexSet>,
    ranks: Vec<usize>,
}

pub(crate) fn validate_ranks(dims: &[usize], ranks: &[usize]) -> Result<()> {
    if ranks.len() != dims.len() {
        return Err(Error::InvalidConfig(format!(
            "{} ranks for {} modes",
            ranks.len(),
            dims.len()
        )));
    }
    for (mode, (&rank, &dim)) in ranks.iter().zip(dims).enumerate() {
        if rank == 0 {
            return Err(Error::InvalidConfig(format!("mode {mode}: rank must be positive")));
        }
        if rank > dim {
            return Err(Error::RankExceedsDimension { mode, rank, dim });
        }
    }
    Ok(())
}

/// Randomized Chidori CUR: samples `I_i` per `plan` and extrudes the core
/// subtensor along every mode.
pub fn chidori_cur(a: &DenseTensor, plan: &SamplingPlan, ranks: &[usize]) -> Result<CurDecomposition> {
    validate_ranks(a.dims(), ranks)?;
    let (rows, _) = plan.draw(a, false)?;
    cur_with_indices(a, rows, FiberSelection::Chidori, ranks)
}

/// Randomized Fiber CUR: samples `I_i` and `J_i` independently per `plan`.
pub fn fiber_cur(a: &DenseTensor, plan: &SamplingPlan, ranks: &[usize]) -> Result<CurDecomposition> {
    validate_ranks(a.dims(), ranks)?;
    let (rows, cols) = plan.draw(a, true)?;
    let cols = cols.expect("fiber draw returns fiber indices");
    cur_with_indices(a, rows, FiberSelection::Explicit(&cols), ranks)
}

/// Deterministic construction from given index sets.
pub fn cur_with_indices(
    a: &DenseTensor,
    rows: Vec<IndexSet>,
    fibers: FiberSelection<'_>,
    ranks: &[usize],
) -> Result<CurDecomposition> {
    validate_ranks(a.dims(), ranks)?;
    let n = a.order();
    if rows.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} row index sets for {} modes",
            rows.len(),
            n
        )));
    }
    let (variant, fiber_indices) = match fibers {
        FiberSelection::Chidori => (
            CurVariant::Chidori,
            (0..n)
                .map(|i| composite_index(&rows, i))
                .collect::<Result<Vec<_>>>()?,
        ),
        FiberSelection::Explicit(sets) => {
            if sets.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} fiber index sets for {} modes",
                    sets.len(),
                    n
                )));
            }
            (CurVariant::Fiber, sets.to_vec())
        }
    };
    let core = a.subtensor(&rows)?;
    let mut c = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for i in 0..n {
        let ci = a.select_fibers(i, &fiber_indices[i])?;
        u.push(select_rows(&ci, &rows[i]));
        c.push(ci);
    }
    Ok(CurDecomposition {
        variant,
        dims: a.dims().to_vec(),
        core,
        fibers: c,
        intersections: u,
        row_indices: rows,
        fiber_indices,
        ranks: ranks.to_vec(),
    })
}

pub(crate) fn select_rows(m: &Matrix, rows: &IndexSet) -> Matrix {
    m.select_rows(rows.indices())
}

impl CurDecomposition {
    /// Assembles a decomposition from stored parts, checking that all shapes
    /// are mutually consistent.
    pub fn from_parts(
        variant: CurVariant,
        core: DenseTensor,
        fibers: Vec<Matrix>,
        intersections: Vec<Matrix>,
        row_indices: Vec<IndexSet>,
        fiber_indices: Vec<IndexSet>,
        ranks: Vec<usize>,
    ) -> Result<Self> {
        let n = core.order();
        if [fibers.len(), intersections.len(), row_indices.len(), fiber_indices.len()]
            .iter()
            .any(|&len| len != n)
        {
            return Err(Error::DimensionMismatch(format!(
                "a {n}-mode core needs {n} fiber matrices, intersections and index sets"
            )));
        }
        let dims: Vec<usize> = fibers.iter().map(|c| c.nrows()).collect();
        validate_ranks(&dims, &ranks)?;
        for i in 0..n {
            let (t, s) = (row_indices[i].len(), fiber_indices[i].len());
            if row_indices[i].extent() != dims[i] || core.dims()[i] != t {
                return Err(Error::DimensionMismatch(format!(
                    "mode {i}: core extent {} vs {} row indices over {}",
                    core.dims()[i],
                    t,
                    row_indices[i].extent()
                )));
            }
            if fiber_indices[i].extent() != sampling::other_extent(&dims, i) || fibers[i].ncols() != s {
                return Err(Error::DimensionMismatch(format!(
                    "mode {i}: fiber matrix has {} columns, {} fiber indices",
                    fibers[i].ncols(),
                    s
                )));
            }
            if intersections[i].shape() != (t, s) {
                return Err(Error::DimensionMismatch(format!(
                    "mode {i}: intersection is {:?}, expected {:?}",
                    intersections[i].shape(),
                    (t, s)
                )));
            }
        }
        Ok(Self {
            variant,
            dims,
            core,
            fibers,
            intersections,
            row_indices,
            fiber_indices,
            ranks,
        })
    }

    pub fn variant(&self) -> CurVariant {
        self.variant
    }

    /// Extents of the decomposed tensor.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// The core subtensor `R`.
    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    /// Fiber matrices `C_i`.
    pub fn fibers(&self) -> &[Matrix] {
        &self.fibers
    }

    /// Intersections `U_i`.
    pub fn intersections(&self) -> &[Matrix] {
        &self.intersections
    }

    pub fn row_indices(&self) -> &[IndexSet] {
        &self.row_indices
    }

    pub fn fiber_indices(&self) -> &[IndexSet] {
        &self.fiber_indices
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `C_i * pinv(best rank-r_i approximation of U_i)` for every mode.
    pub fn mode_factors(&self) -> Result<Vec<ModeFactor>> {
        self.fibers
            .iter()
            .zip(&self.intersections)
            .zip(&self.ranks)
            .map(|((c, u), &r)| {
                let p = linalg::rank_r_pinv(u, r)?;
                Ok(ModeFactor {
                    matrix: c * p.matrix,
                    rank: p.rank,
                })
            })
            .collect()
    }

    /// Ranks actually used for each `U_i^+` (below `r_i` when `U_i` is
    /// numerically rank deficient).
    pub fn effective_ranks(&self) -> Result<Vec<usize>> {
        self.intersections
            .iter()
            .zip(&self.ranks)
            .map(|(u, &r)| Ok(linalg::rank_r_pinv(u, r)?.rank))
            .collect()
    }

    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let factors = self.mode_factors()?;
        self.reconstruct_with(&factors)
    }

    /// Reconstruction from precomputed [`CurDecomposition::mode_factors`].
    pub fn reconstruct_with(&self, factors: &[ModeFactor]) -> Result<DenseTensor> {
        let mats: Vec<Option<&Matrix>> = factors.iter().map(|f| Some(&f.matrix)).collect();
        self.core.multi_mode_product(&mats)
    }

    /// Numerical ranks of the intersections `U_i`.
    pub fn intersection_ranks(&self, tol: Option<f64>) -> Result<Vec<usize>> {
        self.intersections
            .iter()
            .map(|u| linalg::numerical_rank(u, tol))
            .collect()
    }

    /// True when every `U_i` has numerical rank at least `r_i`.
    pub fn satisfies_rank_condition(&self, tol: Option<f64>) -> Result<bool> {
        Ok(self
            .intersection_ranks(tol)?
            .iter()
            .zip(&self.ranks)
            .all(|(&k, &r)| k >= r))
    }
}
