//! Dense tensors, Chidori and Fiber tensor CUR decompositions, Tucker-family
//! baselines and the tooling to compare them.
//!
//! All modes and indices are 0-based. Tensors are stored with the first
//! index varying fastest, and the mode-`k` unfolding orders its columns the
//! same way over the remaining indices.

pub mod analysis;
pub mod baselines;
pub mod cur;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod synthetic;
pub mod tensor;

pub use cur::{CurDecomposition, CurVariant, Distribution, HosvdDecomposition, SamplingPlan};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use tensor::{DenseTensor, IndexSet};

#[cfg(test)]
pub(crate) mod test_support {
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use crate::tensor::DenseTensor;

    /// 3x3x2 tensor of multilinear rank (2, 2, 2) whose leading 2x2x2 core
    /// has multilinear rank (1, 2, 2).
    pub fn example_tensor() -> DenseTensor {
        let slices = [
            [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [3.0, 8.0, 5.0]],
            [[2.0, 5.0, 3.0], [4.0, 10.0, 6.0], [3.0, 7.0, 4.0]],
        ];
        DenseTensor::from_fn(vec![3, 3, 2], |ix| slices[ix[2]][ix[0]][ix[1]]).unwrap()
    }

    pub fn random_tensor(dims: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
        let len = dims.iter().product();
        DenseTensor::new(dims.to_vec(), (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    pub fn low_rank_tensor(dims: &[usize], ranks: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
        crate::synthetic::low_rank_tensor(dims, ranks, rng).unwrap()
    }
}
