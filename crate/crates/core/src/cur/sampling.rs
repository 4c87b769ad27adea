//! Index sampling for randomized tensor CUR.
//!
//! Row indices `I_i` are drawn from `0..d_i`, fiber indices `J_i` from the
//! columns of the mode-`i` unfolding. Both are drawn without replacement,
//! either uniformly or proportionally to squared lengths of the unfolding's
//! rows and columns.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tensor::{DenseTensor, IndexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

/// `p_j = ||m(j,:)||^2 / ||m||_F^2` for rows, `q_j = ||m(:,j)||^2 / ||m||_F^2`
/// for columns.
pub fn length_distribution(m: &Matrix, axis: Axis) -> Result<Vec<f64>> {
    let weights: Vec<f64> = match axis {
        Axis::Rows => m.row_iter().map(|r| r.norm_squared()).collect(),
        Axis::Cols => m.column_iter().map(|c| c.norm_squared()).collect(),
    };
    normalize(weights)
}

fn normalize(mut weights: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDistribution);
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// Row-length distribution of the mode-`mode` unfolding, computed in place.
pub fn row_length_distribution(t: &DenseTensor, mode: usize) -> Result<Vec<f64>> {
    let (left, dk) = mode_layout(t, mode)?;
    let mut weights = vec![0.0; dk];
    for (pos, v) in t.data().iter().enumerate() {
        weights[(pos / left) % dk] += v * v;
    }
    normalize(weights)
}

/// Column-length distribution of the mode-`mode` unfolding, computed in place.
pub fn fiber_length_distribution(t: &DenseTensor, mode: usize) -> Result<Vec<f64>> {
    let (left, dk) = mode_layout(t, mode)?;
    let cols = t.len() / dk;
    let mut weights = vec![0.0; cols];
    for (pos, v) in t.data().iter().enumerate() {
        let l = pos % left;
        let r = pos / (left * dk);
        weights[l + left * r] += v * v;
    }
    normalize(weights)
}

fn mode_layout(t: &DenseTensor, mode: usize) -> Result<(usize, usize)> {
    if mode >= t.order() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: t.order(),
        });
    }
    Ok((t.dims()[..mode].iter().product(), t.dims()[mode]))
}

#[derive(Debug, Clone, Copy)]
pub enum Weights<'a> {
    Uniform,
    Probabilities(&'a [f64]),
}

/// Draws `k` distinct indices from `0..population`, returned sorted.
///
/// Uniform draws use a partial Fisher-Yates shuffle. Weighted draws are
/// sequential: each pick is made from the remaining indices with their
/// weights renormalized.
pub fn sample_without_replacement<R: Rng + ?Sized>(
    population: usize,
    k: usize,
    weights: Weights<'_>,
    rng: &mut R,
) -> Result<IndexSet> {
    if k > population {
        return Err(Error::SampleSizeTooLarge {
            requested: k,
            available: population,
        });
    }
    let picks = match weights {
        Weights::Uniform => partial_shuffle(population, k, rng),
        Weights::Probabilities(p) => {
            if p.len() != population {
                return Err(Error::DimensionMismatch(format!(
                    "{} probabilities for a population of {}",
                    p.len(),
                    population
                )));
            }
            if p.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
                return Err(Error::DegenerateDistribution);
            }
            let positive = p.iter().filter(|&&w| w > 0.0).count();
            if k > positive {
                return Err(Error::SampleSizeTooLarge {
                    requested: k,
                    available: positive,
                });
            }
            sequential_weighted(p, k, rng)
        }
    };
    IndexSet::new(picks, population)
}

fn partial_shuffle<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    // Sparse representation of the permuted array: only displaced slots are stored.
    let mut displaced: HashMap<usize, usize> = HashMap::with_capacity(2 * k);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let j = rng.random_range(i..n);
        let at_j = *displaced.get(&j).unwrap_or(&j);
        let at_i = *displaced.get(&i).unwrap_or(&i);
        displaced.insert(j, at_i);
        out.push(at_j);
    }
    out
}

fn sequential_weighted<R: Rng + ?Sized>(p: &[f64], k: usize, rng: &mut R) -> Vec<usize> {
    let mut w = p.to_vec();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = w.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (j, &wj) in w.iter().enumerate() {
            if wj <= 0.0 {
                continue;
            }
            pick = Some(j);
            acc += wj;
            if acc > target {
                break;
            }
        }
        // `pick` is the last positive index if rounding left `target` unreached.
        let j = pick.expect("positive weight remains");
        w[j] = 0.0;
        out.push(j);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Uniform,
    /// Row indices by row length `p^(i)`, fiber indices by column length `q^(i)`
    /// of each unfolding.
    Length,
}

/// Per-mode sample sizes, distribution and seed for one randomized draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub row_sizes: Vec<usize>,
    /// Number of sampled fibers per mode; only used by Fiber CUR.
    pub fiber_sizes: Option<Vec<usize>>,
    pub distribution: Distribution,
    pub seed: u64,
}

/// `ceil(r log d)`, clamped to `1..=d`.
pub fn default_row_size(d: usize, r: usize) -> usize {
    let t = (r as f64 * (d as f64).ln()).ceil() as usize;
    t.clamp(1, d)
}

/// `ceil(2 r log(prod_{j!=mode} d_j))`, clamped to the number of fibers.
pub fn default_fiber_size(dims: &[usize], mode: usize, r: usize) -> usize {
    let population: usize = other_extent(dims, mode);
    let log: f64 = dims
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != mode)
        .map(|(_, &d)| (d as f64).ln())
        .sum();
    let s = (2.0 * r as f64 * log).ceil() as usize;
    s.clamp(1, population)
}

pub(crate) fn other_extent(dims: &[usize], mode: usize) -> usize {
    dims.iter()
        .enumerate()
        .filter(|&(j, _)| j != mode)
        .map(|(_, &d)| d)
        .product()
}

impl SamplingPlan {
    pub fn chidori(row_sizes: Vec<usize>, seed: u64) -> Self {
        Self {
            row_sizes,
            fiber_sizes: None,
            distribution: Distribution::Uniform,
            seed,
        }
    }

    pub fn fiber(row_sizes: Vec<usize>, fiber_sizes: Vec<usize>, seed: u64) -> Self {
        Self {
            row_sizes,
            fiber_sizes: Some(fiber_sizes),
            distribution: Distribution::Uniform,
            seed,
        }
    }

    /// Chidori sizes `t_i = ceil(r_i log d_i)`.
    pub fn chidori_default(dims: &[usize], ranks: &[usize], seed: u64) -> Self {
        let rows = dims
            .iter()
            .zip(ranks)
            .map(|(&d, &r)| default_row_size(d, r))
            .collect();
        Self::chidori(rows, seed)
    }

    /// Fiber sizes `t_i = ceil(r_i log d_i)`, `s_i = ceil(2 r_i log prod_{j!=i} d_j)`.
    pub fn fiber_default(dims: &[usize], ranks: &[usize], seed: u64) -> Self {
        let rows = dims
            .iter()
            .zip(ranks)
            .map(|(&d, &r)| default_row_size(d, r))
            .collect();
        let fibers = (0..dims.len())
            .map(|i| default_fiber_size(dims, i, ranks[i]))
            .collect();
        Self::fiber(rows, fibers, seed)
    }

    pub fn with_distribution(mut self, distribution: Distribution) -> Self {
        self.distribution = distribution;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, dims: &[usize], need_fibers: bool) -> Result<()> {
        let n = dims.len();
        if self.row_sizes.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{} row sample sizes for {} modes",
                self.row_sizes.len(),
                n
            )));
        }
        for (i, (&t, &d)) in self.row_sizes.iter().zip(dims).enumerate() {
            if t == 0 {
                return Err(Error::InvalidConfig(format!("mode {i}: zero row samples")));
            }
            if t > d {
                return Err(Error::SampleSizeTooLarge {
                    requested: t,
                    available: d,
                });
            }
        }
        if need_fibers {
            let fibers = self.fiber_sizes.as_ref().ok_or_else(|| {
                Error::InvalidConfig("Fiber CUR needs per-mode fiber sample sizes".into())
            })?;
            if fibers.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "{} fiber sample sizes for {} modes",
                    fibers.len(),
                    n
                )));
            }
            for (i, &s) in fibers.iter().enumerate() {
                let population = other_extent(dims, i);
                if s == 0 {
                    return Err(Error::InvalidConfig(format!("mode {i}: zero fiber samples")));
                }
                if s > population {
                    return Err(Error::SampleSizeTooLarge {
                        requested: s,
                        available: population,
                    });
                }
            }
        }
        Ok(())
    }

    /// Draws `I_i` for every mode (and `J_i` when `fibers` is set), interleaved
    /// per mode in ascending order from a single stream seeded by `self.seed`.
    pub(crate) fn draw(
        &self,
        t: &DenseTensor,
        fibers: bool,
    ) -> Result<(Vec<IndexSet>, Option<Vec<IndexSet>>)> {
        self.validate(t.dims(), fibers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut rows = Vec::with_capacity(t.order());
        let mut cols = Vec::with_capacity(t.order());
        for i in 0..t.order() {
            let d = t.dims()[i];
            let set = match self.distribution {
                Distribution::Uniform => {
                    sample_without_replacement(d, self.row_sizes[i], Weights::Uniform, &mut rng)?
                }
                Distribution::Length => {
                    let p = row_length_distribution(t, i)?;
                    sample_without_replacement(
                        d,
                        self.row_sizes[i],
                        Weights::Probabilities(&p),
                        &mut rng,
                    )?
                }
            };
            rows.push(set);
            if fibers {
                let population = other_extent(t.dims(), i);
                let s = self.fiber_sizes.as_ref().expect("validated")[i];
                let set = match self.distribution {
                    Distribution::Uniform => {
                        sample_without_replacement(population, s, Weights::Uniform, &mut rng)?
                    }
                    Distribution::Length => {
                        let q = fiber_length_distribution(t, i)?;
                        sample_without_replacement(
                            population,
                            s,
                            Weights::Probabilities(&q),
                            &mut rng,
                        )?
                    }
                };
                cols.push(set);
            }
        }
        Ok((rows, fibers.then_some(cols)))
    }
}
