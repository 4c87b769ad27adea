use serde::Serialize;

use super::{CurDecomposition, CurVariant};
use crate::error::Result;
use crate::linalg::{self, Matrix};
use crate::tensor::DenseTensor;

/// Rank conditions and exactness of a CUR decomposition of a tensor with
/// known multilinear rank `dec.ranks()`.
#[derive(Debug, Clone, Serialize)]
pub struct CharacterizationReport {
    pub variant: CurVariant,
    pub ranks: Vec<usize>,
    pub intersection_ranks: Vec<usize>,
    pub core_multilinear_rank: Vec<usize>,
    pub fiber_ranks: Vec<usize>,
    /// Ranks of the row slabs `A_(i)(I_i, :)`.
    pub slice_ranks: Vec<usize>,
    /// `rank(U_i) = r_i` for every mode.
    pub rank_condition: bool,
    /// The core `R` has multilinear rank `(r_0, ..., r_{n-1})`.
    pub core_condition: bool,
    /// `rank(C_i) = r_i` for every mode.
    pub fiber_condition: bool,
    /// `rank(A_(i)(I_i, :)) = r_i` for every mode.
    pub slice_condition: bool,
    pub reconstruction_error: f64,
    /// `A = R x_i (C_i U_i^+)` to within the tolerance.
    pub exact: bool,
    pub projection_error: f64,
    /// `A = A x_i (C_i C_i^+)` to within the tolerance.
    pub projection_exact: bool,
}

impl CharacterizationReport {
    /// Whether the equivalent conditions agree on this instance: rank
    /// condition, exactness, and the rank conditions on `C_i` and `R` (plus
    /// the row-slab condition for Chidori).
    pub fn equivalences_hold(&self) -> bool {
        let third = self.fiber_condition && self.core_condition;
        let agree = self.rank_condition == self.exact && self.exact == third;
        match self.variant {
            CurVariant::Fiber => agree,
            CurVariant::Chidori => {
                agree && self.core_condition == self.rank_condition
                    && self.slice_condition == self.rank_condition
            }
        }
    }
}

fn relative(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    let diff = a.checked_sub(b)?.frobenius_norm();
    let scale = a.frobenius_norm();
    Ok(if scale > 0.0 {
        diff / scale
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    })
}

/// Evaluates every rank condition with relative tolerance `tol` and tests
/// exactness of both the CUR and the projection reconstruction at `tol`.
pub fn check_characterization(
    a: &DenseTensor,
    dec: &CurDecomposition,
    tol: f64,
) -> Result<CharacterizationReport> {
    let rank = |m: &Matrix| linalg::numerical_rank(m, Some(tol));
    let ranks = dec.ranks().to_vec();
    let n = dec.order();

    let intersection_ranks = dec.intersection_ranks(Some(tol))?;
    let core_multilinear_rank = (0..n)
        .map(|i| rank(&dec.core().unfold(i)?))
        .collect::<Result<Vec<_>>>()?;
    let fiber_ranks = dec.fibers().iter().map(rank).collect::<Result<Vec<_>>>()?;
    let slice_ranks = (0..n)
        .map(|i| rank(&a.select_slices(i, &dec.row_indices()[i])?))
        .collect::<Result<Vec<_>>>()?;

    let reconstruction_error = relative(a, &dec.reconstruct()?)?;
    let projection_error = relative(a, &projection_reconstruct(a, dec)?)?;

    Ok(CharacterizationReport {
        variant: dec.variant(),
        rank_condition: intersection_ranks == ranks,
        core_condition: core_multilinear_rank == ranks,
        fiber_condition: fiber_ranks == ranks,
        slice_condition: slice_ranks == ranks,
        exact: reconstruction_error < tol,
        projection_exact: projection_error < tol,
        ranks,
        intersection_ranks,
        core_multilinear_rank,
        fiber_ranks,
        slice_ranks,
        reconstruction_error,
        projection_error,
    })
}

/// `A x_0 (C_0 C_0^+) x_1 ... x_{n-1} (C_{n-1} C_{n-1}^+)`.
pub fn projection_reconstruct(a: &DenseTensor, dec: &CurDecomposition) -> Result<DenseTensor> {
    let projectors = dec
        .fibers()
        .iter()
        .map(|c| Ok(c * linalg::pinv(c, None)?))
        .collect::<Result<Vec<Matrix>>>()?;
    let mats: Vec<Option<&Matrix>> = projectors.iter().map(Some).collect();
    a.multi_mode_product(&mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cur::{cur_with_indices, FiberSelection};
    use crate::tensor::IndexSet;
    use crate::test_support::{example_tensor, low_rank_tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn example_tensor_characterization() {
        let a = example_tensor();
        let mlrank: Vec<_> = (0..3)
            .map(|k| linalg::numerical_rank(&a.unfold(k).unwrap(), None).unwrap())
            .collect();
        assert_eq!(mlrank, vec![2, 2, 2]);
        let rows: Vec<_> = a
            .dims()
            .iter()
            .map(|&d| IndexSet::new(vec![0, 1], d).unwrap())
            .collect();
        let dec = cur_with_indices(&a, rows, FiberSelection::Chidori, &[2, 2, 2]).unwrap();
        let report = check_characterization(&a, &dec, 1e-10).unwrap();
        assert_eq!(report.intersection_ranks, vec![1, 2, 2]);
        assert_eq!(report.core_multilinear_rank, vec![1, 2, 2]);
        assert_eq!(report.fiber_ranks, vec![2, 2, 2]);
        assert!(!report.rank_condition && !report.exact);
        assert!(report.projection_exact);
        assert!(report.projection_error < 1e-10);
        assert!(report.equivalences_hold());
    }

    #[test]
    fn exact_instance_all_conditions_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let a = low_rank_tensor(&[12, 10, 9], &[2, 3, 2], &mut rng);
        let rows = vec![
            IndexSet::new(vec![0, 3, 5, 7], 12).unwrap(),
            IndexSet::new(vec![1, 2, 4, 6, 9], 10).unwrap(),
            IndexSet::new(vec![0, 2, 8], 9).unwrap(),
        ];
        let dec = cur_with_indices(&a, rows, FiberSelection::Chidori, &[2, 3, 2]).unwrap();
        let report = check_characterization(&a, &dec, 1e-8).unwrap();
        assert!(report.rank_condition && report.exact && report.core_condition);
        assert!(report.fiber_condition && report.slice_condition && report.projection_exact);
        assert!(report.equivalences_hold());
    }

    #[test]
    fn full_indices_trivially_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = low_rank_tensor(&[5, 6, 4], &[2, 2, 2], &mut rng);
        let rows: Vec<_> = a.dims().iter().map(|&d| IndexSet::full(d)).collect();
        let dec = cur_with_indices(&a, rows, FiberSelection::Chidori, &[2, 2, 2]).unwrap();
        let report = check_characterization(&a, &dec, 1e-8).unwrap();
        assert!(report.rank_condition && report.exact && report.equivalences_hold());
    }

    #[test]
    fn square_full_rank_fibers_give_identity_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = crate::test_support::random_tensor(&[3, 3, 3], &mut rng);
        let cols: Vec<_> = (0..3)
            .map(|_| IndexSet::new(vec![0, 4, 8], 9).unwrap())
            .collect();
        let rows: Vec<_> = (0..3).map(|_| IndexSet::full(3)).collect();
        let dec = cur_with_indices(&a, rows, FiberSelection::Explicit(&cols), &[3, 3, 3]).unwrap();
        let p = projection_reconstruct(&a, &dec).unwrap();
        assert!(a.max_abs_diff(&p).unwrap() < 1e-12);
    }

    #[test]
    fn projection_agrees_with_cur_on_exact_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = low_rank_tensor(&[10, 10, 10], &[2, 2, 2], &mut rng);
        let rows: Vec<_> = (0..3)
            .map(|_| IndexSet::new(vec![1, 4, 6, 9], 10).unwrap())
            .collect();
        let dec = cur_with_indices(&a, rows, FiberSelection::Chidori, &[2, 2, 2]).unwrap();
        let p = projection_reconstruct(&a, &dec).unwrap();
        let r = dec.reconstruct().unwrap();
        assert!(p.checked_sub(&r).unwrap().frobenius_norm() < 1e-9 * a.frobenius_norm());
    }
}
