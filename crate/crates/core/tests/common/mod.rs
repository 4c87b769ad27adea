#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tensor_cur::linalg::{self, Matrix};
use tensor_cur::DenseTensor;

/// 3x3x2 tensor of multilinear rank (2, 2, 2); its leading 2x2x2 block has
/// multilinear rank (1, 2, 2).
pub fn example_tensor() -> DenseTensor {
    let slices = [
        [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [3.0, 8.0, 5.0]],
        [[2.0, 5.0, 3.0], [4.0, 10.0, 6.0], [3.0, 7.0, 4.0]],
    ];
    DenseTensor::from_fn(vec![3, 3, 2], |ix| slices[ix[2]][ix[0]][ix[1]]).unwrap()
}

pub fn rel(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.checked_sub(b).unwrap().frobenius_norm() / a.frobenius_norm()
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_orthonormal(d: usize, r: usize, rng: &mut ChaCha8Rng) -> Matrix {
    linalg::qr_factor(&gaussian(d, r, rng)).unwrap().0
}

pub fn multilinear_rank(t: &DenseTensor, tol: Option<f64>) -> Vec<usize> {
    (0..t.order())
        .map(|k| linalg::numerical_rank(&t.unfold(k).unwrap(), tol).unwrap())
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
