use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use finsler::metrics::ZOO;
use finsler::verify::IdentityId;

#[derive(Debug, Parser)]
#[command(
    name = "finsler",
    version,
    about = "Connection and curvature computations for pseudo-Finsler metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print g, gamma, G, N, Gamma and P at a tangent vector as JSON.
    Tensors(TensorsArgs),
    /// Print the Chern curvature R_v(X,Y)Z as a JSON vector.
    Curvature(CurvatureArgs),
    /// Integrate a geodesic and print the trajectory as CSV.
    Geodesic(GeodesicArgs),
    /// Print the flag-curvature predecessor K_v(u,w) as JSON.
    Flag(FlagArgs),
    /// Run identity checks and print the residual reports as JSON.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Zoo metric.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(ZOO))]
    pub metric: String,
    /// Manifold dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Metric parameters as key=value pairs; randers takes b1..bn and Bij
    /// (the coefficient of x^j in b_i).
    #[arg(long, value_parser = parse_params, allow_hyphen_values = true)]
    pub params: Option<Params>,
    /// JSON file with the symmetric coefficient matrix of riemannian_poly.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TensorsArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Base point.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub x: Vector,
    /// Tangent vector.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub y: Vector,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub x: Vector,
    /// Reference vector.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v: Vector,
    #[arg(long = "X", value_parser = parse_vector, allow_hyphen_values = true)]
    pub x_dir: Vector,
    #[arg(long = "Y", value_parser = parse_vector, allow_hyphen_values = true)]
    pub y_dir: Vector,
    #[arg(long = "Z", value_parser = parse_vector, allow_hyphen_values = true)]
    pub z_dir: Vector,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub x0: Vector,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v0: Vector,
    /// Integration time.
    #[arg(long = "T", allow_hyphen_values = true)]
    pub duration: f64,
    /// Number of RK4 steps.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlagArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub x: Vector,
    /// Flagpole.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v: Vector,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub u: Vector,
    /// Second transverse vector; defaults to u (the flag curvature).
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub w: Option<Vector>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("which").required(true).args(["suite", "id"])))]
pub struct VerifyArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Run every identity with default samples and tolerances.
    #[arg(long)]
    pub suite: bool,
    /// Run a single identity.
    #[arg(long, value_parser = parse_identity)]
    pub id: Option<IdentityId>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Overrides the default sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Overrides the default tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A vector given as comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub Vec<f64>);

/// `key=value` metric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(pub Vec<(String, f64)>);

pub fn parse_vector(s: &str) -> Result<Vector, String> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            let v: f64 = part
                .parse()
                .map_err(|_| format!("'{part}' is not a real number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("'{part}' is not finite"))
            }
        })
        .collect::<Result<_, _>>()
        .map(Vector)
}

/// `key=value` pairs separated by commas.
pub fn parse_params(s: &str) -> Result<Params, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("'{pair}' is not of the form key=value"))?;
            let value = parse_vector(v)?;
            match value.0[..] {
                [single] => Ok((k.trim().to_string(), single)),
                _ => Err(format!("'{pair}' must have a single value")),
            }
        })
        .collect::<Result<_, _>>()
        .map(Params)
}

fn parse_identity(s: &str) -> Result<IdentityId, String> {
    s.parse().map_err(|e: finsler::verify::VerifyError| {
        let known: Vec<&str> = IdentityId::ALL.iter().map(|i| i.as_str()).collect();
        format!("{e}; expected one of {}", known.join(", "))
    })
}
