//! Synthetic accuracy/runtime sweeps, file-based compression and the
//! workflows behind the command line tool.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{self, BoundReport};
use crate::baselines;
use crate::cur::sampling::{default_fiber_size, default_row_size};
use crate::cur::{
    cur_to_hosvd, cur_with_indices, CurDecomposition, CurVariant, Distribution, FiberSelection,
    HosvdDecomposition, ModeFactor, SamplingPlan,
};
use crate::error::{Error, Result};
use crate::io;
use crate::synthetic::generate_synthetic;
use crate::tensor::DenseTensor;

/// Relative errors at or below this are reported as exact recovery instead
/// of an SNR value.
pub const EXACT_REL_ERR: f64 = 1e-12;

pub const DEFAULT_MAX_RESAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Fiber,
    Chidori,
    Hosvd,
    StHosvd,
    Hooi,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Fiber,
        Method::Chidori,
        Method::Hosvd,
        Method::StHosvd,
        Method::Hooi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fiber => "fiber",
            Method::Chidori => "chidori",
            Method::Hosvd => "hosvd",
            Method::StHosvd => "st-hosvd",
            Method::Hooi => "hooi",
        }
    }

    pub fn cur_variant(self) -> Option<CurVariant> {
        match self {
            Method::Fiber => Some(CurVariant::Fiber),
            Method::Chidori => Some(CurVariant::Chidori),
            _ => None,
        }
    }

    fn stream(self) -> u64 {
        match self {
            Method::Fiber => 1,
            Method::Chidori => 2,
            Method::Hosvd => 3,
            Method::StHosvd => 4,
            Method::Hooi => 5,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for sampling stream `stream`, attempt `attempt` of the
/// trial seeded with `base`.
pub fn derive_seed(base: u64, stream: u64, attempt: u64) -> u64 {
    splitmix64(splitmix64(base ^ splitmix64(stream)) ^ attempt)
}

/// Per-mode sample sizes for CUR, each `None` meaning the default rule.
#[derive(Debug, Clone, Default)]
pub struct SampleSizes {
    pub rows: Option<Vec<usize>>,
    pub fibers: Option<Vec<usize>>,
}

impl SampleSizes {
    pub fn plan(&self, variant: CurVariant, dims: &[usize], ranks: &[usize], seed: u64) -> SamplingPlan {
        let rows = self.rows.clone().unwrap_or_else(|| {
            dims.iter().zip(ranks).map(|(&d, &r)| default_row_size(d, r)).collect()
        });
        match variant {
            CurVariant::Chidori => SamplingPlan::chidori(rows, seed),
            CurVariant::Fiber => {
                let fibers = self.fibers.clone().unwrap_or_else(|| {
                    ranks
                        .iter()
                        .enumerate()
                        .map(|(i, &r)| default_fiber_size(dims, i, r))
                        .collect()
                });
                SamplingPlan::fiber(rows, fibers, seed)
            }
        }
    }
}

/// Wall time of one CUR construction, split by phase.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CurTiming {
    pub sample_ms: f64,
    pub extract_ms: f64,
    pub solve_ms: f64,
}

impl CurTiming {
    pub fn total_ms(&self) -> f64 {
        self.sample_ms + self.extract_ms + self.solve_ms
    }

    /// Sampling plus the pseudoinverse work, without forming `R`, `C_i`, `U_i`.
    pub fn without_extraction_ms(&self) -> f64 {
        self.sample_ms + self.solve_ms
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Builds a CUR decomposition and its mode factors `C_i U_i^+`, timing each
/// phase.
pub fn timed_cur(a: &DenseTensor, plan: &SamplingPlan, ranks: &[usize]) -> Result<(CurDecomposition, Vec<ModeFactor>, CurTiming)> {
    let t0 = Instant::now();
    let fibers = plan.fiber_sizes.is_some();
    let (rows, cols) = plan.draw(a, fibers)?;
    let sample_ms = ms_since(t0);
    let t1 = Instant::now();
    let selection = match &cols {
        Some(c) => FiberSelection::Explicit(c),
        None => FiberSelection::Chidori,
    };
    let dec = cur_with_indices(a, rows, selection, ranks)?;
    let extract_ms = ms_since(t1);
    let t2 = Instant::now();
    let factors = dec.mode_factors()?;
    let solve_ms = ms_since(t2);
    Ok((
        dec,
        factors,
        CurTiming {
            sample_ms,
            extract_ms,
            solve_ms,
        },
    ))
}

/// Runs a Tucker baseline.
pub fn tucker(a: &DenseTensor, method: Method, ranks: &[usize]) -> Result<HosvdDecomposition> {
    match method {
        Method::Hosvd => baselines::hosvd(a, ranks),
        Method::StHosvd => baselines::st_hosvd(a, ranks),
        Method::Hooi => baselines::hooi(a, ranks),
        Method::Fiber | Method::Chidori => Err(Error::InvalidConfig(format!("{method} is not a Tucker method"))),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Extent `d` of every mode, one sweep point per entry.
    pub dims: Vec<usize>,
    pub order: usize,
    pub rank: usize,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    /// Trial `k` uses seed `seed + k`.
    pub seed: u64,
    pub methods: Vec<Method>,
    pub sizes: SampleSizes,
    pub distribution: Distribution,
    pub max_resamples: usize,
    /// Adds the `extract_ms` column.
    pub extract_column: bool,
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dims: vec![50],
            order: 3,
            rank: 5,
            sigmas: vec![1e-1, 1e-4, 1e-7, 0.0],
            trials: 50,
            seed: 0,
            methods: Method::ALL.to_vec(),
            sizes: SampleSizes::default(),
            distribution: Distribution::Uniform,
            max_resamples: DEFAULT_MAX_RESAMPLES,
            extract_column: false,
            parallel: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.order == 0 {
            return fail("order must be at least 1");
        }
        if self.dims.is_empty() || self.sigmas.is_empty() || self.methods.is_empty() {
            return fail("dims, sigmas and methods must be non-empty");
        }
        if self.rank == 0 {
            return fail("rank must be at least 1");
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d < self.rank) {
            return Err(Error::RankExceedsDimension {
                mode: 0,
                rank: self.rank,
                dim: d,
            });
        }
        if self.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return fail("noise levels must be finite and nonnegative");
        }
        for sizes in [&self.sizes.rows, &self.sizes.fibers].into_iter().flatten() {
            if sizes.len() != self.order {
                return fail("sample size overrides need one entry per mode");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub method: Method,
    pub d: usize,
    pub r: usize,
    pub sigma: f64,
    pub trial: usize,
    pub seed: u64,
    pub rel_err: f64,
    pub runtime_ms: f64,
    pub rank_ok: bool,
    pub resamples: usize,
    pub extract_ms: Option<f64>,
}

pub const CSV_HEADER: [&str; 10] = [
    "method",
    "d",
    "r",
    "sigma",
    "trial",
    "seed",
    "rel_err",
    "runtime_ms",
    "rank_ok",
    "resamples",
];

struct Point {
    d: usize,
    sigma: f64,
    trial: usize,
}

fn run_point(cfg: &ExperimentConfig, p: &Point) -> Result<Vec<SweepRow>> {
    let dims = vec![p.d; cfg.order];
    let ranks = vec![cfg.rank; cfg.order];
    let seed = cfg.seed.wrapping_add(p.trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = generate_synthetic(&dims, &ranks, p.sigma, &mut rng)?;
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let row = |rel_err, runtime_ms, rank_ok, resamples, extract_ms: Option<f64>| SweepRow {
            method,
            d: p.d,
            r: cfg.rank,
            sigma: p.sigma,
            trial: p.trial,
            seed,
            rel_err,
            runtime_ms,
            rank_ok,
            resamples,
            extract_ms: extract_ms.filter(|_| cfg.extract_column),
        };
        match method.cur_variant() {
            Some(variant) => {
                let mut attempt = 0;
                loop {
                    let plan = cfg
                        .sizes
                        .plan(variant, &dims, &ranks, derive_seed(seed, method.stream(), attempt as u64))
                        .with_distribution(cfg.distribution);
                    let (dec, factors, timing) = timed_cur(&data.noisy, &plan, &ranks)?;
                    let rank_ok = dec.satisfies_rank_condition(None)?;
                    if rank_ok || attempt == cfg.max_resamples {
                        let approx = dec.reconstruct_with(&factors)?;
                        let rel = analysis::relative_error(&data.exact, &approx)?;
                        rows.push(row(rel, timing.total_ms(), rank_ok, attempt, Some(timing.extract_ms)));
                        break;
                    }
                    attempt += 1;
                }
            }
            None => {
                let t = Instant::now();
                let dec = tucker(&data.noisy, method, &ranks)?;
                let runtime = ms_since(t);
                let rel = analysis::relative_error(&data.exact, &dec.reconstruct()?)?;
                rows.push(row(rel, runtime, true, 0, Some(0.0)));
            }
        }
    }
    Ok(rows)
}

/// Runs every (d, sigma, trial) point and every method on it. Rows come back
/// in configuration order whether or not trials run in parallel.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &d in &cfg.dims {
        for &sigma in &cfg.sigmas {
            for trial in 0..cfg.trials {
                points.push(Point { d, sigma, trial });
            }
        }
    }
    let chunks: Vec<Vec<SweepRow>> = if cfg.parallel {
        points.par_iter().map(|p| run_point(cfg, p)).collect::<Result<_>>()?
    } else {
        points.iter().map(|p| run_point(cfg, p)).collect::<Result<_>>()?
    };
    Ok(chunks.into_iter().flatten().collect())
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow], extract_column: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if extract_column {
        header.push("extract_ms");
    }
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.method.to_string(),
            r.d.to_string(),
            r.r.to_string(),
            format!("{:e}", r.sigma),
            r.trial.to_string(),
            r.seed.to_string(),
            format!("{:.6e}", r.rel_err),
            format!("{:.3}", r.runtime_ms),
            r.rank_ok.to_string(),
            r.resamples.to_string(),
        ];
        if extract_column {
            rec.push(format!("{:.3}", r.extract_ms.unwrap_or(0.0)));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Output of one decomposition in either family.
#[derive(Debug, Clone)]
pub enum Decomposition {
    Cur(CurDecomposition),
    Tucker(HosvdDecomposition),
}

impl Decomposition {
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        match self {
            Decomposition::Cur(d) => d.reconstruct(),
            Decomposition::Tucker(d) => d.reconstruct(),
        }
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        match self {
            Decomposition::Cur(d) => io::save_cur(dir, d),
            Decomposition::Tucker(d) => io::save_hosvd(dir, d),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompressOptions {
    pub input: PathBuf,
    pub method: Method,
    pub ranks: Vec<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub reconstruct: bool,
    pub sizes: SampleSizes,
    pub distribution: Distribution,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompressReport {
    pub method: Method,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    /// `None` when the reconstruction is exact.
    pub snr_db: Option<f64>,
    pub rel_err: f64,
    pub runtime_ms: f64,
}

pub const REPORT_FILE: &str = "report.csv";
pub const RECONSTRUCTION_FILE: &str = "reconstruction.tnsr";

/// Decomposes `a` in memory and measures the result against it.
pub fn compress_tensor(
    a: &DenseTensor,
    method: Method,
    ranks: &[usize],
    seed: u64,
    sizes: &SampleSizes,
    distribution: Distribution,
) -> Result<(Decomposition, DenseTensor, CompressReport)> {
    let t = Instant::now();
    let dec = match method.cur_variant() {
        Some(variant) => {
            crate::cur::validate_ranks(a.dims(), ranks)?;
            let plan = sizes.plan(variant, a.dims(), ranks, seed).with_distribution(distribution);
            let (dec, _, _) = timed_cur(a, &plan, ranks)?;
            Decomposition::Cur(dec)
        }
        None => Decomposition::Tucker(tucker(a, method, ranks)?),
    };
    let runtime_ms = ms_since(t);
    let approx = dec.reconstruct()?;
    let rel_err = analysis::relative_error(a, &approx)?;
    let snr_db = if rel_err <= EXACT_REL_ERR {
        None
    } else {
        Some(analysis::snr_db(a, &approx)?)
    };
    let report = CompressReport {
        method,
        dims: a.dims().to_vec(),
        ranks: ranks.to_vec(),
        snr_db,
        rel_err,
        runtime_ms,
    };
    Ok((dec, approx, report))
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x")
}

pub fn write_compress_report<W: Write>(w: W, report: &CompressReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "dims", "ranks", "snr_db", "rel_err", "runtime_ms"])?;
    out.write_record([
        report.method.to_string(),
        join(&report.dims),
        join(&report.ranks),
        report.snr_db.map_or_else(|| "exact".to_string(), |s| format!("{s:.4}")),
        format!("{:.6e}", report.rel_err),
        format!("{:.3}", report.runtime_ms),
    ])?;
    out.flush()?;
    Ok(())
}

/// Loads a tensor file, decomposes it, and writes the factor files plus
/// `report.csv` (and `reconstruction.tnsr` if requested) to `out_dir`.
pub fn compress(opts: &CompressOptions) -> Result<CompressReport> {
    let a = io::load_tensor(&opts.input)?;
    let (dec, approx, report) =
        compress_tensor(&a, opts.method, &opts.ranks, opts.seed, &opts.sizes, opts.distribution)?;
    dec.save(&opts.out_dir)?;
    if opts.reconstruct {
        io::save_tensor(opts.out_dir.join(RECONSTRUCTION_FILE), &approx)?;
    }
    let f = std::fs::File::create(opts.out_dir.join(REPORT_FILE))?;
    write_compress_report(f, &report)?;
    Ok(report)
}

/// Converts a saved CUR decomposition into Tucker factor files.
pub fn convert_dir(in_dir: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<HosvdDecomposition> {
    let dec = io::load_cur(in_dir)?;
    let h = cur_to_hosvd(&dec)?;
    io::save_hosvd(out_dir, &h)?;
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct BoundCheckOptions {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub sigma: f64,
    pub seed: u64,
    pub variant: CurVariant,
    pub sizes: SampleSizes,
}

/// Generates a synthetic instance, decomposes the noisy tensor and evaluates
/// the perturbation bounds against the known noise.
pub fn check_bounds(opts: &BoundCheckOptions) -> Result<BoundReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let data = generate_synthetic(&opts.dims, &opts.ranks, opts.sigma, &mut rng)?;
    let plan = opts.sizes.plan(
        opts.variant,
        &opts.dims,
        &opts.ranks,
        derive_seed(opts.seed, 0, 0),
    );
    let (dec, _, _) = timed_cur(&data.noisy, &plan, &opts.ranks)?;
    analysis::bound_report(&data.exact, &data.noise, &dec)
}
