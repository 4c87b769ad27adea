//! Seeded synthetic low multilinear rank tensors.
//!
//! Gaussian entries come from `rand_distr::StandardNormal` (ziggurat) driven
//! by the caller's generator; with `ChaCha8Rng` the output is identical on
//! every platform for a given seed.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cur::validate_ranks;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tensor::DenseTensor;

#[derive(Debug, Clone)]
pub struct SyntheticTensor {
    pub exact: DenseTensor,
    pub noisy: DenseTensor,
    pub noise: DenseTensor,
}

fn gaussian_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `T x_0 G_0 ... x_{n-1} G_{n-1}` with a standard normal core of shape
/// `ranks` and standard normal `d_i x r_i` factors. Draws the core first,
/// then the factors in mode order.
pub fn low_rank_tensor<R: Rng + ?Sized>(dims: &[usize], ranks: &[usize], rng: &mut R) -> Result<DenseTensor> {
    validate_ranks(dims, ranks)?;
    let core = DenseTensor::new(ranks.to_vec(), gaussian_vec(ranks.iter().product(), rng))?;
    let factors: Vec<Matrix> = dims
        .iter()
        .zip(ranks)
        .map(|(&d, &r)| Matrix::from_vec(d, r, gaussian_vec(d * r, rng)))
        .collect();
    let mats: Vec<Option<&Matrix>> = factors.iter().map(Some).collect();
    core.multi_mode_product(&mats)
}

/// A low-rank tensor from [`low_rank_tensor`] plus i.i.d. `N(0, sigma^2)`
/// noise. With `sigma == 0` the noisy tensor is a copy of the exact one and
/// no noise is drawn.
pub fn generate_synthetic<R: Rng + ?Sized>(
    dims: &[usize],
    ranks: &[usize],
    sigma: f64,
    rng: &mut R,
) -> Result<SyntheticTensor> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise level {sigma} must be finite and nonnegative")));
    }
    let exact = low_rank_tensor(dims, ranks, rng)?;
    if sigma == 0.0 {
        return Ok(SyntheticTensor {
            noisy: exact.clone(),
            noise: DenseTensor::zeros(dims.to_vec())?,
            exact,
        });
    }
    let noise = DenseTensor::new(dims.to_vec(), gaussian_vec(exact.len(), rng))?.scaled(sigma);
    Ok(SyntheticTensor {
        noisy: exact.checked_add(&noise)?,
        noise,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_noise_is_a_bitwise_copy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = generate_synthetic(&[6, 7, 8], &[2, 2, 2], 0.0, &mut rng).unwrap();
        assert_eq!(s.exact, s.noisy);
        assert_eq!(s.noise.frobenius_norm(), 0.0);
    }

    #[test]
    fn multilinear_rank_is_as_requested() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = generate_synthetic(&[20, 20, 20], &[3, 3, 3], 0.0, &mut rng).unwrap();
        for k in 0..3 {
            assert_eq!(linalg::numerical_rank(&s.exact.unfold(k).unwrap(), None).unwrap(), 3);
        }
    }

    #[test]
    fn noise_has_the_requested_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = 1e-3;
        let s = generate_synthetic(&[50, 50, 50], &[2, 2, 2], sigma, &mut rng).unwrap();
        let per_entry = s.noise.frobenius_norm() / (s.noise.len() as f64).sqrt();
        assert!((per_entry / sigma - 1.0).abs() < 0.1);
        assert_eq!(s.noisy, s.exact.checked_add(&s.noise).unwrap());
    }

    #[test]
    fn same_seed_same_tensor() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate_synthetic(&[5, 6, 7], &[2, 3, 2], 0.1, &mut rng).unwrap().noisy
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn invalid_requests_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(generate_synthetic(&[3, 3], &[4, 1], 0.0, &mut rng).is_err());
        assert!(generate_synthetic(&[3, 3], &[1, 1], -1.0, &mut rng).is_err());
        assert!(generate_synthetic(&[3, 3], &[1, 1], f64::NAN, &mut rng).is_err());
    }
}
