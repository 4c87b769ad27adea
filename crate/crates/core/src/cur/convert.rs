use super::CurDecomposition;
use crate::baselines;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::tensor::DenseTensor;

/// Tucker form `core x_0 W_0 x_1 ... x_{n-1} W_{n-1}` with orthonormal `W_i`.
#[derive(Debug, Clone)]
pub struct HosvdDecomposition {
    core: DenseTensor,
    factors: Vec<Matrix>,
}

impl HosvdDecomposition {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for a {}-mode core",
                factors.len(),
                core.order()
            )));
        }
        for (i, (w, &r)) in factors.iter().zip(core.dims()).enumerate() {
            if w.ncols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "factor {i} has {} columns, core extent is {r}",
                    w.ncols()
                )));
            }
        }
        Ok(Self { core, factors })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn ranks(&self) -> &[usize] {
        self.core.dims()
    }

    /// Extents of the represented tensor.
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|w| w.nrows()).collect()
    }

    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let mats: Vec<Option<&Matrix>> = self.factors.iter().map(Some).collect();
        self.core.multi_mode_product(&mats)
    }
}

/// Converts a CUR decomposition to Tucker form without forming the full
/// tensor: QR of every `C_i U_i^+`, a small HOSVD of the transformed core,
/// then `W_i = Q_i V_i`.
pub fn cur_to_hosvd(dec: &CurDecomposition) -> Result<HosvdDecomposition> {
    let mut qs = Vec::with_capacity(dec.order());
    let mut rs = Vec::with_capacity(dec.order());
    for f in dec.mode_factors()? {
        let (q, r) = linalg::qr_factor(&f.matrix)?;
        qs.push(q);
        rs.push(r);
    }
    let mats: Vec<Option<&Matrix>> = rs.iter().map(Some).collect();
    let t1 = dec.core().multi_mode_product(&mats)?;
    let ranks: Vec<usize> = dec
        .ranks()
        .iter()
        .zip(t1.dims())
        .map(|(&r, &d)| r.min(d))
        .collect();
    let small = baselines::hosvd(&t1, &ranks)?;
    let factors = qs.iter().zip(small.factors()).map(|(q, v)| q * v).collect();
    HosvdDecomposition::new(small.core().clone(), factors)
}
