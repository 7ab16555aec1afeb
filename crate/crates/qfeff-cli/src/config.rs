//! Run configuration: TOML file merged with command-line flags, flags
//! winning.  Every run is reproducible: random sampling always has a seed
//! (default 0).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use qfeff::cr::CoordinateCRStructure;
use qfeff::kernel::Algebra;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Latex,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "latex" => Ok(OutputFormat::Latex),
            other => bail!("unknown format '{other}' (expected text, json, or latex)"),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Builtin structure name or path to a structure TOML file
    #[arg(long)]
    pub structure: Option<String>,
    /// TOML run configuration; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fiber profile P (expression in the coordinates and r)
    #[arg(long = "P", allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Profile amplitude a; P becomes a / cos((r + s)/2)
    #[arg(long = "a", allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Profile phase s
    #[arg(long = "s", allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Twist datum x
    #[arg(long = "x", allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Fiber-direction datum H
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: Option<String>,
    /// Candidate closed section; derives a, s, x from it
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Gauge rescaling exponent tau
    #[arg(long = "gauge-tau", allow_hyphen_values = true)]
    pub gauge_tau: Option<String>,
    /// Gauge rotation angle theta
    #[arg(long = "gauge-theta", allow_hyphen_values = true)]
    pub gauge_theta: Option<String>,
    /// Invariance: fit the distinguished member's conformal factor instead
    #[arg(long)]
    pub fefferman: bool,
    /// Number of random sample points
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random sampling seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Residual tolerance
    #[arg(long, allow_hyphen_values = true)]
    pub tolerance: Option<f64>,
    /// Output format: text, json, or latex
    #[arg(long)]
    pub format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    structure: Option<String>,
    tolerance: Option<f64>,
    format: Option<String>,
    out: Option<PathBuf>,
    gauge: Option<GaugeConfig>,
    parameters: Option<ParamConfig>,
    samples: Option<SampleConfig>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GaugeConfig {
    tau: Option<String>,
    theta: Option<String>,
    fefferman: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ParamConfig {
    #[serde(rename = "P")]
    p: Option<String>,
    a: Option<String>,
    s: Option<String>,
    x: Option<String>,
    #[serde(rename = "H")]
    h: Option<String>,
    psi: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SampleConfig {
    count: Option<usize>,
    seed: Option<u64>,
    /// Half-width of the coordinate sampling box.
    #[serde(rename = "box")]
    box_half_width: Option<f64>,
    /// Explicit points (x1, x2, x3, r); suppresses random sampling.
    points: Option<Vec<[f64; 4]>>,
}

/// A coordinate structure given as a file: name plus the chart components
/// of mu and lambda.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    name: String,
    mu: [String; 3],
    lambda: [String; 3],
}

/// The fully resolved run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub structure: String,
    pub gauge: Option<(String, String)>,
    pub fefferman: bool,
    pub p: Option<String>,
    pub a: Option<String>,
    pub s: Option<String>,
    pub x: Option<String>,
    pub h: Option<String>,
    pub psi: Option<String>,
    pub count: usize,
    pub seed: u64,
    pub box_half_width: f64,
    pub points: Option<Vec<[f64; 4]>>,
    pub tolerance: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str::<FileConfig>(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let gauge_file = file.gauge.unwrap_or_default();
        let params = file.parameters.unwrap_or_default();
        let samples = file.samples.unwrap_or_default();

        let tau = args.gauge_tau.clone().or(gauge_file.tau);
        let theta = args.gauge_theta.clone().or(gauge_file.theta);
        let gauge = match (tau, theta) {
            (None, None) => None,
            (t, th) => Some((t.unwrap_or_else(|| "0".into()), th.unwrap_or_else(|| "0".into()))),
        };

        let format = args
            .format
            .clone()
            .or(file.format)
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or(OutputFormat::Text);

        let box_half_width = samples.box_half_width.unwrap_or(1.0);
        if box_half_width <= 0.0 {
            bail!("the sampling box half-width must be positive");
        }
        let tolerance = args.tolerance.or(file.tolerance).unwrap_or(1e-9);
        if tolerance <= 0.0 {
            bail!("the tolerance must be positive");
        }

        Ok(RunConfig {
            structure: args
                .structure
                .clone()
                .or(file.structure)
                .unwrap_or_else(|| "heisenberg".into()),
            gauge,
            fefferman: args.fefferman || gauge_file.fefferman.unwrap_or(false),
            p: args.p.clone().or(params.p),
            a: args.a.clone().or(params.a),
            s: args.s.clone().or(params.s),
            x: args.x.clone().or(params.x),
            h: args.h.clone().or(params.h),
            psi: args.psi.clone().or(params.psi),
            count: args.samples.or(samples.count).unwrap_or(5),
            seed: args.seed.or(samples.seed).unwrap_or(0),
            box_half_width,
            points: samples.points,
            tolerance,
            format,
            out: args.out.clone().or(file.out),
        })
    }

    /// Sample chart points: explicit ones if configured, otherwise seeded
    /// uniform draws over the box, with r kept away from the profile poles
    /// at r + s = pi mod 2 pi.
    pub fn sample_points(&self) -> Vec<[f64; 4]> {
        if let Some(points) = &self.points {
            return points.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let b = self.box_half_width;
        (0..self.count)
            .map(|_| {
                [
                    rng.gen_range(-b..b),
                    rng.gen_range(-b..b),
                    rng.gen_range(-b..b),
                    rng.gen_range(-PI + 0.2..PI - 0.2),
                ]
            })
            .collect()
    }
}

/// Resolve a structure: builtin name first, then a TOML file path.
pub fn load_structure(alg: &Algebra, source: &str) -> Result<CoordinateCRStructure> {
    if let Some(st) = CoordinateCRStructure::builtin(alg, source) {
        return Ok(st);
    }
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading structure {}", path.display()))?;
        let sf: StructureFile = toml::from_str(&text)
            .with_context(|| format!("parsing structure {}", path.display()))?;
        let mu: [&str; 3] = [&sf.mu[0], &sf.mu[1], &sf.mu[2]];
        let lambda: [&str; 3] = [&sf.lambda[0], &sf.lambda[1], &sf.lambda[2]];
        return CoordinateCRStructure::parse(alg, &sf.name, mu, lambda)
            .map_err(|e| anyhow::anyhow!("structure {}: {e}", path.display()));
    }
    bail!(
        "unknown structure '{source}' (builtins: {}; or pass a TOML file)",
        CoordinateCRStructure::builtin_names().join(", ")
    )
}
