//! Command-line flags and the `runconfig-v1` file format.
//!
//! A config file supplies defaults; flags given on the command line win.
//! Subcommand parameters live under `params`, keyed by the long flag name
//! with dashes replaced by underscores.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "runconfig-v1";

#[derive(Debug, Parser)]
#[command(name = "dunkl", version, about = "Kernels, transforms and verification suites for rational Dunkl analysis on Z2^n")]
pub struct Cli {
    /// runconfig-v1 JSON file with defaults for every flag below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Multiplicities, comma separated; a single value is repeated over `--n` axes.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub k: Option<Vec<f64>>,
    /// Dimension.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Half-width of the uniform spatial grid.
    #[arg(long, global = true)]
    pub extent: Option<f64>,
    /// Spacing of the uniform spatial grid.
    #[arg(long, global = true)]
    pub spacing: Option<f64>,
    /// Use half-integer nodes (no node at the origin).
    #[arg(long, global = true)]
    pub staggered: bool,
    #[arg(long, global = true)]
    pub t_min: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub t_count: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the heat kernel, Poisson kernel or Dunkl kernel at points (CSV).
    Kernel(KernelArgs),
    /// Forward/inverse transform round trip with a Plancherel report.
    Transform(TransformArgs),
    /// Apply the Riesz transform R_j to a dunkl-field-v1 file.
    Riesz(RieszArgs),
    /// Cauchy-Riemann residuals of the conjugate system under grid refinement.
    VerifyCr(CrArgs),
    /// Search and verify the matrix-inequality constant delta(eps).
    VerifyLemma(LemmaArgs),
    /// Scan |F|^q for subharmonicity violations.
    SubharmonicScan(ScanArgs),
    /// Riesz characterization ratios over random atoms (CSV).
    HardyRatio(HardyArgs),
    /// Dunkl/Bessel folding identities on the positive orthant.
    BesselFold(FoldArgs),
    /// Run the full acceptance suite.
    VerifyAll(AllArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Transform(_) => "transform",
            Command::Riesz(_) => "riesz",
            Command::VerifyCr(_) => "verify-cr",
            Command::VerifyLemma(_) => "verify-lemma",
            Command::SubharmonicScan(_) => "subharmonic-scan",
            Command::HardyRatio(_) => "hardy-ratio",
            Command::BesselFold(_) => "bessel-fold",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelType {
    Heat,
    Poisson,
    Dunkl,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long = "type", value_enum)]
    pub kind: Option<KernelType>,
    /// Times, comma separated (ignored for the Dunkl kernel).
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// First point, comma separated coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Input dunkl-field-v1 file; a Gaussian-times-polynomial field when absent.
    #[arg(long)]
    pub field: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RieszArgs {
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Axis index (0-based).
    #[arg(long)]
    pub j: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CrArgs {
    /// Refinement levels, each halving the spacing.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Radius of the source atom.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Exponent; the proof-derived bound when absent.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HardyArgs {
    #[arg(long)]
    pub atoms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FoldArgs {
    /// Gaussian parameter a in e^{-a|x|^2}.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AllArgs {
    /// Smaller random samples.
    #[arg(long)]
    pub quick: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub extent: f64,
    pub spacing: f64,
    #[serde(default)]
    pub staggered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGridSpec {
    pub t_min: f64,
    pub dt: f64,
    pub count: usize,
}

/// Contents of a `runconfig-v1` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: Option<String>,
    pub k: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub grid: Option<GridSpec>,
    pub t_grid: Option<TGridSpec>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(s) = &cfg.schema {
            if s != SCHEMA {
                return Err(format!("unsupported schema {s:?}, expected {SCHEMA:?}"));
            }
        }
        Ok(cfg)
    }
}

/// Configuration after merging the file with the flags. Serialized, it is
/// the input of the fingerprint; the output path is left out so the same run
/// written to different files carries the same hash.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub schema: &'static str,
    pub command: &'static str,
    pub k: Vec<f64>,
    pub grid: Option<GridSpec>,
    pub t_grid: Option<TGridSpec>,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    file_params: BTreeMap<String, Value>,
}

impl Resolved {
    pub fn from_cli(cli: &Cli) -> Result<Resolved, String> {
        let file = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let n = cli.n.or(file.n);
        let mut k = cli.k.clone().or(file.k).unwrap_or_else(|| vec![1.0]);
        if let Some(n) = n {
            if n == 0 {
                return Err("dimension must be at least 1".into());
            }
            if k.len() == 1 && n > 1 {
                k = vec![k[0]; n];
            } else if k.len() != n {
                return Err(format!("{} multiplicities given for dimension {n}", k.len()));
            }
        }
        if let Some(bad) = k.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(format!("multiplicities must be finite and >= 0, got {bad}"));
        }
        let mut grid = file.grid;
        if cli.extent.is_some() || cli.spacing.is_some() || cli.staggered {
            let base = grid.unwrap_or(GridSpec { extent: 8.0, spacing: 0.1, staggered: false });
            grid = Some(GridSpec {
                extent: cli.extent.unwrap_or(base.extent),
                spacing: cli.spacing.unwrap_or(base.spacing),
                staggered: cli.staggered || base.staggered,
            });
        }
        if let Some(g) = grid {
            if !(g.extent > 0.0 && g.spacing > 0.0 && g.spacing < g.extent) {
                return Err("grid needs 0 < spacing < extent".into());
            }
        }
        let mut t_grid = file.t_grid;
        if cli.t_min.is_some() || cli.dt.is_some() || cli.t_count.is_some() {
            let base = t_grid.unwrap_or(TGridSpec { t_min: 0.5, dt: 0.05, count: 21 });
            t_grid = Some(TGridSpec {
                t_min: cli.t_min.unwrap_or(base.t_min),
                dt: cli.dt.unwrap_or(base.dt),
                count: cli.t_count.unwrap_or(base.count),
            });
        }
        if let Some(t) = t_grid {
            if !(t.t_min > 0.0 && t.dt > 0.0 && t.count >= 1) {
                return Err("t grid needs t_min > 0, dt > 0 and count >= 1".into());
            }
        }
        Ok(Resolved {
            schema: SCHEMA,
            command: cli.command.name(),
            k,
            grid,
            t_grid,
            seed: cli.seed.or(file.seed).unwrap_or(42),
            params: BTreeMap::new(),
            out: cli.out.clone().or(file.out),
            file_params: file.params,
        })
    }

    /// Flag value, else the file's `params` entry, else `default`. The
    /// chosen value is recorded for the fingerprint.
    pub fn param<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, String> {
        let v = match flag {
            Some(v) => v,
            None => match self.file_params.get(key) {
                Some(raw) => serde_json::from_value(raw.clone()).map_err(|e| format!("params.{key}: {e}"))?,
                None => default,
            },
        };
        self.params.insert(key.to_string(), serde_json::to_value(&v).map_err(|e| e.to_string())?);
        Ok(v)
    }

    /// Optional parameter without a default.
    pub fn param_opt<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, String> {
        let v: Option<T> = match flag {
            Some(v) => Some(v),
            None => match self.file_params.get(key) {
                Some(raw) => Some(serde_json::from_value(raw.clone()).map_err(|e| format!("params.{key}: {e}"))?),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.params.insert(key.to_string(), serde_json::to_value(v).map_err(|e| e.to_string())?);
        }
        Ok(v)
    }

    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
