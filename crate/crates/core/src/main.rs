use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tensor_cur::experiment::{
    self, BoundCheckOptions, CompressOptions, ExperimentConfig, Method, SampleSizes,
};
use tensor_cur::{io as tio, synthetic, CurVariant, Distribution};

#[derive(Parser)]
#[command(name = "tensor-cur", version, about = "Tensor CUR decompositions and Tucker baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    Uniform,
    Length,
}

impl From<Sampling> for Distribution {
    fn from(s: Sampling) -> Self {
        match s {
            Sampling::Uniform => Distribution::Uniform,
            Sampling::Length => Distribution::Length,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Chidori,
    Fiber,
}

#[derive(clap::Args)]
struct SizeArgs {
    /// Row samples per mode (default ceil(r log d)).
    #[arg(long, value_delimiter = ',')]
    row_sizes: Option<Vec<usize>>,
    /// Fiber samples per mode for Fiber CUR (default ceil(2 r log prod_{j!=i} d_j)).
    #[arg(long, value_delimiter = ',')]
    fiber_sizes: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "uniform")]
    distribution: Sampling,
}

impl SizeArgs {
    fn sizes(&self) -> SampleSizes {
        SampleSizes {
            rows: self.row_sizes.clone(),
            fibers: self.fiber_sizes.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Accuracy and runtime sweep over synthetic low-rank tensors, as CSV.
    Synthetic {
        /// Mode extents to sweep; every mode gets the same extent.
        #[arg(long, value_delimiter = ',', default_value = "50")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-4,1e-7,0")]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "fiber,chidori,hosvd,st-hosvd,hooi")]
        methods: Vec<String>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[command(flatten)]
        size: SizeArgs,
        /// Maximum CUR resamples when an intersection is rank deficient.
        #[arg(long, default_value_t = experiment::DEFAULT_MAX_RESAMPLES)]
        max_resamples: usize,
        /// Also report the time spent extracting R, C_i and U_i.
        #[arg(long)]
        extract_ms: bool,
        /// Run trials on all cores (timings then compete for CPU).
        #[arg(long)]
        parallel: bool,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a tensor file and report SNR and runtime.
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        method: String,
        /// One rank per mode, or a single rank for all modes.
        #[arg(long, value_delimiter = ',')]
        ranks: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write the approximation as reconstruction.tnsr.
        #[arg(long)]
        reconstruct: bool,
        #[command(flatten)]
        size: SizeArgs,
    },
    /// Convert saved CUR factors into Tucker (HOSVD) factors.
    Convert {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluate the perturbation bounds on a synthetic instance, as JSON.
    CheckBounds {
        /// Mode extents.
        #[arg(long, value_delimiter = ',', default_value = "30,30,30")]
        dims: Vec<usize>,
        /// One rank per mode, or a single rank for all modes.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        rank: Vec<usize>,
        #[arg(long, default_value_t = 1e-6)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "chidori")]
        variant: Variant,
        #[command(flatten)]
        size: SizeArgs,
    },
    /// Write a synthetic low-rank tensor (plus noise) as a tensor file.
    Generate {
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// One rank per mode, or a single rank for all modes.
        #[arg(long, value_delimiter = ',')]
        ranks: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the noiseless tensor here.
        #[arg(long)]
        exact_out: Option<PathBuf>,
    },
}

fn broadcast(ranks: Vec<usize>, order: usize) -> Result<Vec<usize>> {
    match ranks.len() {
        1 => Ok(vec![ranks[0]; order]),
        n if n == order => Ok(ranks),
        n => bail!("{n} ranks given for {order} modes"),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synthetic {
            dims,
            rank,
            sigma,
            trials,
            seed,
            methods,
            order,
            size,
            max_resamples,
            extract_ms,
            parallel,
            out,
        } => {
            let methods = methods
                .iter()
                .map(|m| m.parse::<Method>())
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = ExperimentConfig {
                dims,
                order,
                rank,
                sigmas: sigma,
                trials,
                seed,
                methods,
                sizes: size.sizes(),
                distribution: size.distribution.into(),
                max_resamples,
                extract_column: extract_ms,
                parallel,
            };
            let rows = experiment::run_sweep(&cfg)?;
            match out {
                Some(path) => {
                    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    experiment::write_sweep_csv(BufWriter::new(f), &rows, extract_ms)?;
                }
                None => experiment::write_sweep_csv(io::stdout().lock(), &rows, extract_ms)?,
            }
        }
        Command::Compress {
            input,
            method,
            ranks,
            seed,
            out_dir,
            reconstruct,
            size,
        } => {
            std::fs::create_dir_all(&out_dir)?;
            let a_order = tio::load_tensor(&input)
                .with_context(|| format!("reading {}", input.display()))?
                .order();
            let opts = CompressOptions {
                input,
                method: method.parse()?,
                ranks: broadcast(ranks, a_order)?,
                seed,
                out_dir,
                reconstruct,
                sizes: size.sizes(),
                distribution: size.distribution.into(),
            };
            let report = experiment::compress(&opts)?;
            experiment::write_compress_report(io::stdout().lock(), &report)?;
        }
        Command::Convert { in_dir, out_dir } => {
            let h = experiment::convert_dir(&in_dir, &out_dir)?;
            println!(
                "wrote core {:?} and {} factors to {}",
                h.ranks(),
                h.factors().len(),
                out_dir.display()
            );
        }
        Command::CheckBounds {
            dims,
            rank,
            sigma,
            seed,
            variant,
            size,
        } => {
            let ranks = broadcast(rank, dims.len())?;
            let opts = BoundCheckOptions {
                dims,
                ranks,
                sigma,
                seed,
                variant: match variant {
                    Variant::Chidori => CurVariant::Chidori,
                    Variant::Fiber => CurVariant::Fiber,
                },
                sizes: size.sizes(),
            };
            let report = experiment::check_bounds(&opts)?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        Command::Generate {
            dims,
            ranks,
            sigma,
            seed,
            out,
            exact_out,
        } => {
            let ranks = broadcast(ranks, dims.len())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = synthetic::generate_synthetic(&dims, &ranks, sigma, &mut rng)?;
            tio::save_tensor(&out, &t.noisy)?;
            if let Some(path) = exact_out {
                tio::save_tensor(path, &t.exact)?;
            }
        }
    }
    Ok(())
}
