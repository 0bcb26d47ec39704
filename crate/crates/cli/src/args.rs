use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cutproject", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output directory; created if missing. Every run writes a manifest
    /// next to its outputs.
    #[arg(long)]
    pub out: PathBuf,

    /// Seed for every sampled scan (sampling is always reproducible).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a model-set patch and export it as CSV.
    Gen {
        #[command(flatten)]
        common: CommonArgs,
        /// Lattice config JSON.
        #[arg(long)]
        lattice: PathBuf,
        /// Window config JSON.
        #[arg(long)]
        window: PathBuf,
        /// Index range start (inclusive).
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n0: i64,
        /// Index range end (exclusive).
        #[arg(long, default_value_t = 1000, allow_negative_numbers = true)]
        n1: i64,
    },
    /// Discrepancy profiles and bounded-remainder classification over the
    /// default base-point grid (or a single --x).
    Brs {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        window: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        nmax: u32,
        #[arg(long, default_value_t = 1000)]
        split: u32,
        /// Base point, comma-separated; defaults to the 17-per-axis grid.
        #[arg(long)]
        x: Option<String>,
    },
    /// Two-window gap profile (no measure subtraction).
    Pairgap {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        window2: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        nmax: u32,
        #[arg(long, default_value_t = 1000)]
        split: u32,
        #[arg(long)]
        x: Option<String>,
    },
    /// Bounded-distance matching of the patches of two windows.
    Bde {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        window2: PathBuf,
        /// Displacement bound.
        #[arg(long = "K", default_value_t = 2.0)]
        k: f64,
        /// Core exemption slack; defaults to K.
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long, default_value_t = -1000, allow_negative_numbers = true)]
        n0: i64,
        #[arg(long, default_value_t = 1000, allow_negative_numbers = true)]
        n1: i64,
        /// Binary-search the minimal feasible K instead of testing one K.
        #[arg(long = "binary-search-K", default_value_t = false)]
        binary_search_k: bool,
        /// Binary search step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Maximum matching and Hall-condition check of an explicit instance.
    Hall {
        #[command(flatten)]
        common: CommonArgs,
        /// Instance JSON: left/right point lists, translations, tolerance.
        #[arg(long)]
        instance: PathBuf,
    },
    /// Reduce a general-position lattice basis to special form.
    SpecialForm {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        lattice: PathBuf,
        /// Rational-independence certification bound.
        #[arg(long, default_value_t = 50)]
        qmax: u32,
    },
    /// Orbit enumeration of two equal-measure windows with displacement
    /// labels.
    Orbit {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        window2: PathBuf,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n0: i64,
        #[arg(long, default_value_t = 1000, allow_negative_numbers = true)]
        n1: i64,
        #[arg(long)]
        x: Option<String>,
    },
    /// Verify a piecewise-translation equidecomposition by Monte Carlo.
    EquiVerify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        window2: PathBuf,
        /// Decomposition JSON.
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Assemble candidate pieces from orbit matchings over a base grid.
    EquiBuild {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        window2: PathBuf,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n0: i64,
        #[arg(long, default_value_t = 2000, allow_negative_numbers = true)]
        n1: i64,
        /// Raster cell side for the assembled pieces.
        #[arg(long, default_value_t = 0.0009765625)]
        raster: f64,
        /// Self-check sample count.
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
    },
    /// G-uniformity scan of a window (generators default to the lattice
    /// alpha).
    Uniformity {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        window: PathBuf,
        #[arg(long, default_value_t = 128)]
        kmax: u32,
        /// Sampled base points.
        #[arg(long, default_value_t = 25)]
        samples: u32,
    },
}
