//! Dense n-mode tensors and the multilinear algebra built on them.
//!
//! Storage is a flat `Vec<f64>` with the first index varying fastest, so the
//! element at zero-based multi-index `(i_0, ..., i_{n-1})` lives at offset
//! `sum_k i_k * prod_{l<k} d_l`. The mode-`k` unfolding is the
//! `d_k x prod_{j!=k} d_j` matrix whose column for a multi-index is the
//! linearization of the remaining indices, again first-fastest. Under this
//! convention the mode-0 unfolding is a plain reshape of the storage.
//!
//! All modes and indices in this crate are zero-based.

use nalgebra::{DMatrixView, DMatrixViewMut, DVector};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A sorted set of distinct zero-based positions drawn from `0..extent`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct IndexSet {
    extent: usize,
    indices: Vec<usize>,
}

impl IndexSet {
    /// Builds an index set, sorting the input. Duplicates and out-of-range
    /// positions are rejected.
    pub fn new(mut indices: Vec<usize>, extent: usize) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateIndex(w[0]));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= extent {
                return Err(Error::IndexOutOfRange { index: last, extent });
            }
        }
        Ok(Self { extent, indices })
    }

    pub fn full(extent: usize) -> Self {
        Self {
            extent,
            indices: (0..extent).collect(),
        }
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.extent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidShape("a tensor needs at least one mode".into()));
    }
    if let Some(k) = dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidShape(format!("mode {k} has zero extent")));
    }
    Ok(dims.iter().product())
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::InvalidShape(format!(
                "data length {} does not match dims {:?} (expected {})",
                data.len(),
                dims,
                len
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = check_dims(&dims)?;
        Ok(Self {
            dims,
            data: vec![0.0; len],
        })
    }

    /// Fills a tensor by evaluating `f` at every multi-index, in storage order.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_dims(&dims)?;
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (i, d) in idx.iter_mut().zip(&dims) {
                *i += 1;
                if *i < *d {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "multi-index has {} entries, tensor has {} modes",
                index.len(),
                self.order()
            )));
        }
        let mut offset = 0;
        let mut stride = 1;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return Err(Error::IndexOutOfRange { index: i, extent: d });
            }
            offset += i * stride;
            stride *= d;
        }
        Ok(offset)
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.data[self.offset(index)?])
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// `(prod of extents before mode, extent of mode, prod of extents after mode)`.
    fn split(&self, mode: usize) -> (usize, usize, usize) {
        let left = self.dims[..mode].iter().product();
        let right = self.dims[mode + 1..].iter().product();
        (left, self.dims[mode], right)
    }

    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (left, dk, right) = self.split(mode);
        if left == 1 {
            return Ok(Matrix::from_column_slice(dk, right, &self.data));
        }
        let mut out = vec![0.0; self.data.len()];
        for r in 0..right {
            for j in 0..dk {
                let src = &self.data[left * (j + dk * r)..left * (j + dk * r + 1)];
                for (l, &v) in src.iter().enumerate() {
                    out[(l + left * r) * dk + j] = v;
                }
            }
        }
        Ok(Matrix::from_vec(dk, left * right, out))
    }

    /// Inverse of [`DenseTensor::unfold`].
    pub fn fold(m: &Matrix, mode: usize, dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        if mode >= dims.len() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: dims.len(),
            });
        }
        let dk = dims[mode];
        if m.nrows() != dk || m.nrows() * m.ncols() != len {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold a {}x{} matrix along mode {} into {:?}",
                m.nrows(),
                m.ncols(),
                mode,
                dims
            )));
        }
        let left: usize = dims[..mode].iter().product();
        let right: usize = dims[mode + 1..].iter().product();
        let src = m.as_slice();
        let mut data = vec![0.0; len];
        for r in 0..right {
            for j in 0..dk {
                let dst = &mut data[left * (j + dk * r)..left * (j + dk * r + 1)];
                for (l, v) in dst.iter_mut().enumerate() {
                    *v = src[(l + left * r) * dk + j];
                }
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    /// Mode-`k` product `t x_k a`, i.e. the tensor whose mode-`k` unfolding
    /// is `a * t_(k)`.
    pub fn mode_product(&self, a: &Matrix, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let (left, dk, right) = self.split(mode);
        if a.ncols() != dk {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns but mode {} has extent {}",
                a.ncols(),
                mode,
                dk
            )));
        }
        let p = a.nrows();
        if p == 0 {
            return Err(Error::InvalidShape("mode product with an empty matrix".into()));
        }
        let mut dims = self.dims.clone();
        dims[mode] = p;
        let mut out = vec![0.0; left * p * right];
        if left == 1 {
            let x = DMatrixView::from_slice(&self.data, dk, right);
            let mut y = DMatrixViewMut::from_slice(&mut out, p, right);
            y.gemm(1.0, a, &x, 0.0);
        } else {
            // Each trailing slice is a contiguous left x dk block; multiply it by a^T.
            let at = a.transpose();
            for (x, y) in self
                .data
                .chunks_exact(left * dk)
                .zip(out.chunks_exact_mut(left * p))
            {
                let x = DMatrixView::from_slice(x, left, dk);
                let mut y = DMatrixViewMut::from_slice(y, left, p);
                y.gemm(1.0, &x, &at, 0.0);
            }
        }
        Ok(Self { dims, data: out })
    }

    /// Applies `mats[k]` along mode `k` for every supplied entry, in ascending
    /// mode order.
    pub fn multi_mode_product(&self, mats: &[Option<&Matrix>]) -> Result<Self> {
        if mats.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} matrices supplied for a tensor with {} modes",
                mats.len(),
                self.order()
            )));
        }
        let mut out = self.clone();
        for (mode, m) in mats.iter().enumerate() {
            if let Some(m) = m {
                out = out.mode_product(m, mode)?;
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// The subtensor `t(I_0, ..., I_{n-1})`.
    pub fn subtensor(&self, sets: &[IndexSet]) -> Result<Self> {
        if sets.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} index sets for a tensor with {} modes",
                sets.len(),
                self.order()
            )));
        }
        for (set, &d) in sets.iter().zip(&self.dims) {
            if set.extent() != d {
                return Err(Error::DimensionMismatch(format!(
                    "index set extent {} does not match mode extent {}",
                    set.extent(),
                    d
                )));
            }
        }
        let strides = self.strides();
        let offsets = expand_offsets(
            sets.iter().zip(&strides).map(|(s, &st)| (s.indices(), st)),
        );
        let dims = sets.iter().map(IndexSet::len).collect();
        let data = offsets.iter().map(|&o| self.data[o]).collect();
        Self::new(dims, data)
    }

    /// Columns `cols` of the mode-`k` unfolding, without forming the unfolding.
    pub fn select_fibers(&self, mode: usize, cols: &IndexSet) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (left, dk, right) = self.split(mode);
        if cols.extent() != left * right {
            return Err(Error::DimensionMismatch(format!(
                "fiber index extent {} does not match {} mode-{} fibers",
                cols.extent(),
                left * right,
                mode
            )));
        }
        let mut out = Matrix::zeros(dk, cols.len());
        for (c, &col) in cols.indices().iter().enumerate() {
            let (l, r) = (col % left, col / left);
            let base = l + left * dk * r;
            for (j, v) in out.column_mut(c).iter_mut().enumerate() {
                *v = self.data[base + left * j];
            }
        }
        Ok(out)
    }

    /// Rows `rows` of the mode-`k` unfolding.
    pub fn select_slices(&self, mode: usize, rows: &IndexSet) -> Result<Matrix> {
        self.check_mode(mode)?;
        let mut sets: Vec<IndexSet> = self.dims.iter().map(|&d| IndexSet::full(d)).collect();
        sets[mode] = rows.clone();
        self.subtensor(&sets)?.unfold(mode)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = 1;
        self.dims
            .iter()
            .map(|&d| {
                let cur = s;
                s *= d;
                cur
            })
            .collect()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.checked_sub(other)?;
        Ok(d.data.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

/// Linear offsets of the cartesian product of `(positions, stride)` pairs,
/// enumerated with the first pair varying fastest.
fn expand_offsets<'a>(parts: impl DoubleEndedIterator<Item = (&'a [usize], usize)>) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for (positions, stride) in parts.rev() {
        let mut next = Vec::with_capacity(offsets.len() * positions.len());
        for &base in &offsets {
            next.extend(positions.iter().map(|&p| base + p * stride));
        }
        offsets = next;
    }
    offsets
}

/// Linearizes the product set `x_{j != mode} I_j` into column positions of the
/// mode-`mode` unfolding. The entry `sets[mode]` is ignored.
pub fn composite_index(sets: &[IndexSet], mode: usize) -> Result<IndexSet> {
    if mode >= sets.len() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: sets.len(),
        });
    }
    let mut stride = 1;
    let mut parts = Vec::with_capacity(sets.len() - 1);
    for (j, set) in sets.iter().enumerate() {
        if j == mode {
            continue;
        }
        parts.push((set.indices(), stride));
        stride *= set.extent();
    }
    let cols = expand_offsets(parts.into_iter());
    // Enumeration order is already ascending for sorted inputs.
    Ok(IndexSet {
        extent: stride,
        indices: cols,
    })
}

pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Outer product `a_0 o a_1 o ... o a_{n-1}`.
pub fn outer(vectors: &[DVector<f64>]) -> Result<DenseTensor> {
    if vectors.is_empty() {
        return Err(Error::InvalidShape("outer product of no vectors".into()));
    }
    let dims = vectors.iter().map(|v| v.len()).collect();
    DenseTensor::from_fn(dims, |idx| {
        idx.iter().zip(vectors).map(|(&i, v)| v[i]).product()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::numerical_rank;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn counting(dims: Vec<usize>) -> DenseTensor {
        let n: usize = dims.iter().product();
        DenseTensor::new(dims, (1..=n).map(|v| v as f64).collect()).unwrap()
    }

    fn random_tensor(dims: Vec<usize>, rng: &mut ChaCha8Rng) -> DenseTensor {
        DenseTensor::from_fn(dims, |_| rng.random_range(-1.0..1.0)).unwrap()
    }

    fn random_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn unfold_counting_cube() {
        let t = counting(vec![2, 2, 2]);
        let m = t.unfold(0).unwrap();
        let expected = Matrix::from_row_slice(2, 4, &[1., 3., 5., 7., 2., 4., 6., 8.]);
        assert_eq!(m, expected);
        assert_eq!(DenseTensor::fold(&expected, 0, &[2, 2, 2]).unwrap(), t);
    }

    #[test]
    fn unfold_vector_is_column() {
        let t = counting(vec![5]);
        let m = t.unfold(0).unwrap();
        assert_eq!(m.shape(), (5, 1));
        assert_eq!(m.as_slice(), t.data());
    }

    #[test]
    fn unfold_matches_column_formula() {
        let t = counting(vec![2, 3, 4]);
        for k in 0..3 {
            let m = t.unfold(k).unwrap();
            for i0 in 0..2 {
                for i1 in 0..3 {
                    for i2 in 0..4 {
                        let idx = [i0, i1, i2];
                        let mut col = 0;
                        let mut stride = 1;
                        for m_ in 0..3 {
                            if m_ != k {
                                col += idx[m_] * stride;
                                stride *= t.dims()[m_];
                            }
                        }
                        assert_eq!(m[(idx[k], col)], t.get(&idx).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn fold_rejects_bad_shape() {
        let m = Matrix::zeros(2, 3);
        assert!(DenseTensor::fold(&m, 0, &[2, 2, 2]).is_err());
        assert!(matches!(
            counting(vec![2, 2]).unfold(2),
            Err(Error::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn constructor_invariants() {
        assert!(DenseTensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(DenseTensor::new(vec![], vec![]).is_err());
        assert!(DenseTensor::zeros(vec![2, 0]).is_err());
        let t = counting(vec![2, 3, 4]);
        assert_eq!(t.get(&[1, 2, 3]).unwrap(), (1 + 2 * 2 + 3 * 6 + 1) as f64);
    }

    #[test]
    fn mode_product_identity_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_tensor(vec![3, 4, 5], &mut rng);
        for k in 0..3 {
            let id = Matrix::identity(t.dims()[k], t.dims()[k]);
            assert_eq!(t.mode_product(&id, k).unwrap(), t);
            let z = t.mode_product(&Matrix::zeros(1, t.dims()[k]), k).unwrap();
            let mut dims = t.dims().to_vec();
            dims[k] = 1;
            assert_eq!(z, DenseTensor::zeros(dims).unwrap());
        }
        assert!(t.mode_product(&Matrix::zeros(2, 3), 1).is_err());
    }

    #[test]
    fn mode_product_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tensor(vec![3, 4, 5], &mut rng);
        let a = random_matrix(2, 4, &mut rng);
        let y = t.mode_product(&a, 1).unwrap();
        assert_eq!(y.dims(), &[3, 2, 5]);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..5 {
                    let naive: f64 = (0..4).map(|s| t.get(&[i, s, k]).unwrap() * a[(j, s)]).sum();
                    worst = worst.max((naive - y.get(&[i, j, k]).unwrap()).abs());
                }
            }
        }
        assert!(worst < 1e-12);
        let lhs = y.unfold(1).unwrap();
        let rhs = &a * t.unfold(1).unwrap();
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn mode_order_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tensor(vec![3, 4, 5], &mut rng);
        let a = random_matrix(6, 3, &mut rng);
        let b = random_matrix(2, 4, &mut rng);
        let ab = t.mode_product(&a, 0).unwrap().mode_product(&b, 1).unwrap();
        let ba = t.mode_product(&b, 1).unwrap().mode_product(&a, 0).unwrap();
        assert!(ab.max_abs_diff(&ba).unwrap() < 1e-12);
        let multi = t.multi_mode_product(&[Some(&a), Some(&b), None]).unwrap();
        assert!(multi.max_abs_diff(&ab).unwrap() < 1e-12);
    }

    #[test]
    fn other_mode_product_is_reversed_kronecker() {
        // unfold(t x_j a, k) = unfold(t, k) * (I (x) ... (x) a (x) ... (x) I)^T with the
        // factors listed from the last remaining mode down to the first.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_tensor(vec![3, 4, 5], &mut rng);
        let a = random_matrix(2, 5, &mut rng);
        let y = t.mode_product(&a, 2).unwrap();
        let k = 0;
        let kron = kronecker(&a, &Matrix::identity(4, 4));
        let rhs = t.unfold(k).unwrap() * kron.transpose();
        assert!((y.unfold(k).unwrap() - rhs).amax() < 1e-12);
    }

    #[test]
    fn kronecker_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_matrix(2, 3, &mut rng);
        let k = kronecker(&Matrix::identity(2, 2), &b);
        let mut expected = Matrix::zeros(4, 6);
        expected.view_mut((0, 0), (2, 3)).copy_from(&b);
        expected.view_mut((2, 3), (2, 3)).copy_from(&b);
        assert_eq!(k, expected);
        assert_eq!(kronecker(&Matrix::from_element(1, 1, 2.0), &b), &b * 2.0);

        let (a, b, c, d) = (
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
        );
        let lhs = kronecker(&a, &b) * kronecker(&c, &d);
        let rhs = kronecker(&(&a * &c), &(&b * &d));
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn outer_products() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let t = outer(&[e1.clone(), e1]).unwrap();
        assert_eq!(t.data(), &[1.0, 0.0, 0.0, 0.0]);

        let t = outer(&[
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![1.0, 1.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(
            t.unfold(0).unwrap(),
            Matrix::from_row_slice(2, 3, &[1., 1., 1., 2., 2., 2.])
        );
        assert!(outer(&[]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let vs: Vec<_> = [4, 5, 6]
            .iter()
            .map(|&n| DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5)))
            .collect();
        let t = outer(&vs).unwrap();
        for k in 0..3 {
            assert_eq!(numerical_rank(&t.unfold(k).unwrap(), None).unwrap(), 1);
        }
    }

    #[test]
    fn subtensor_and_fibers_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = random_tensor(vec![4, 5, 6], &mut rng);
        let full: Vec<_> = t.dims().iter().map(|&d| IndexSet::full(d)).collect();
        assert_eq!(t.subtensor(&full).unwrap(), t);

        let sets = vec![
            IndexSet::new(vec![0, 3], 4).unwrap(),
            IndexSet::new(vec![4, 1, 2], 5).unwrap(),
            IndexSet::new(vec![5, 0], 6).unwrap(),
        ];
        for k in 0..3 {
            let cols = composite_index(&sets, k).unwrap();
            let fibers = t.select_fibers(k, &cols).unwrap();
            let mut with_full = sets.clone();
            with_full[k] = IndexSet::full(t.dims()[k]);
            let expected = t.subtensor(&with_full).unwrap().unfold(k).unwrap();
            assert_eq!(fibers, expected);
            // brute force: enumerate each selected column directly
            let unf = t.unfold(k).unwrap();
            for (c, &col) in cols.indices().iter().enumerate() {
                assert_eq!(fibers.column(c), unf.column(col));
            }
        }
    }

    #[test]
    fn index_set_validation() {
        assert!(matches!(
            IndexSet::new(vec![1, 1], 3),
            Err(Error::DuplicateIndex(1))
        ));
        assert!(IndexSet::new(vec![3], 3).is_err());
        assert_eq!(IndexSet::new(vec![2, 0], 3).unwrap().indices(), &[0, 2]);
        let t = counting(vec![2, 2]);
        assert!(t.subtensor(&[IndexSet::full(2), IndexSet::full(3)]).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(DenseTensor::zeros(vec![2, 3]).unwrap().frobenius_norm(), 0.0);
        let ones = DenseTensor::new(vec![2, 2, 2], vec![1.0; 8]).unwrap();
        assert!((ones.frobenius_norm() - 8f64.sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_tensor(vec![3, 4, 5], &mut rng);
        let direct: f64 = t.data().iter().map(|v| v * v).sum();
        for k in 0..3 {
            let m = t.unfold(k).unwrap();
            let unf: f64 = m.iter().map(|v| v * v).sum();
            assert!((unf - direct).abs() < 1e-12);
        }
    }
}
