//! `finsler` command-line front end.
//!
//! Exit codes: 0 success, 1 failing identity or output error, 2 usage or
//! parse error, 3 inadmissible or degenerate input, 4 geodesic left the
//! chart (partial CSV is still written).

mod args;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use finsler::curvature::{chern_curvature, flag_predecessor};
use finsler::metrics::{make_metric, riemannian_from_matrix, MetricField, TangentSample};
use finsler::paths::geodesic_integrate;
use finsler::verify::{run_identity_with, IdentityCase, IdentityId, ResidualReport, VerifyError};
use finsler::{connection_bundle, GeometryError};

use args::{
    Cli, Command, CurvatureArgs, FlagArgs, GeodesicArgs, MetricArgs, TensorsArgs, VerifyArgs,
};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Output(String),
    ChartExit(String),
    Failed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed | CliError::Output(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::ChartExit(_) => 4,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::UnknownMetric(_) | GeometryError::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            GeometryError::ChartExit { .. } => CliError::ChartExit(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Geometry(g) => g.into(),
            VerifyError::UnknownIdentity(_) | VerifyError::InvalidCase(_) => {
                CliError::Usage(e.to_string())
            }
            VerifyError::SamplerExhausted { .. } => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tensors(a) => cmd_tensors(&a),
        Command::Curvature(a) => cmd_curvature(&a),
        Command::Geodesic(a) => cmd_geodesic(&a),
        Command::Flag(a) => cmd_flag(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => {
                    eprintln!("error: {msg}\n\nFor more information, try '--help'.")
                }
                CliError::Input(msg) | CliError::Output(msg) | CliError::ChartExit(msg) => {
                    eprintln!("error: {msg}")
                }
                CliError::Failed => eprintln!("error: at least one identity failed"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn build_metric(a: &MetricArgs) -> Result<MetricField, CliError> {
    if let Some(path) = &a.coeffs {
        if a.metric != "riemannian_poly" {
            return Err(CliError::Usage(
                "--coeffs applies to riemannian_poly only".into(),
            ));
        }
        if a.params.is_some() {
            return Err(CliError::Usage("use either --coeffs or --params".into()));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let matrix: Vec<Vec<Vec<f64>>> = serde_json::from_str(&text).map_err(|e| {
            CliError::Usage(format!(
                "{}: expected a matrix of coefficient lists: {e}",
                path.display()
            ))
        })?;
        if matrix.len() != a.dim {
            return Err(CliError::Usage(format!(
                "coefficient matrix is {0}x{0} but --dim is {1}",
                matrix.len(),
                a.dim
            )));
        }
        return Ok(riemannian_from_matrix(&matrix)?);
    }
    let params = match a.params.as_ref().map(|p| &p.0[..]) {
        None | Some([]) => Vec::new(),
        Some(kv) if a.metric == "randers" => randers_params(a.dim, kv)?,
        Some(_) if a.metric == "riemannian_poly" => {
            return Err(CliError::Usage(
                "riemannian_poly takes its coefficients through --coeffs".into(),
            ))
        }
        Some(_) => return Err(CliError::Usage(format!("{} takes no parameters", a.metric))),
    };
    Ok(make_metric(&a.metric, a.dim, &params)?)
}

/// `b1..bn` and `Bij` (1-based) into the offset-then-linear layout.
fn randers_params(n: usize, kv: &[(String, f64)]) -> Result<Vec<f64>, CliError> {
    let mut offset = vec![0.0; n];
    let mut linear = vec![0.0; n * n];
    let mut has_linear = false;
    let index = |s: &str| -> Option<usize> {
        let i: usize = s.parse().ok()?;
        (1..=n).contains(&i).then_some(i - 1)
    };
    for (key, value) in kv {
        let bad = || {
            CliError::Usage(format!(
                "unknown randers parameter '{key}' (expected b1..b{n}, Bij)"
            ))
        };
        if let Some(rest) = key.strip_prefix('b') {
            offset[index(rest).ok_or_else(bad)?] = *value;
        } else if let Some(rest) = key.strip_prefix('B') {
            if rest.len() != 2 {
                return Err(bad());
            }
            let i = index(&rest[..1]).ok_or_else(bad)?;
            let j = index(&rest[1..]).ok_or_else(bad)?;
            linear[i * n + j] = *value;
            has_linear = true;
        } else {
            return Err(bad());
        }
    }
    if has_linear {
        offset.extend(linear);
    }
    Ok(offset)
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

fn to_json(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("serializable output");
    s.push('\n');
    s
}

fn cmd_tensors(a: &TensorsArgs) -> Result<(), CliError> {
    let m = build_metric(&a.metric)?;
    let bundle = connection_bundle(&m, &TangentSample::new(a.x.0.clone(), a.y.0.clone()))?;
    write_output(
        &a.out,
        &to_json(serde_json::to_value(&bundle).expect("serializable output")),
    )
}

fn cmd_curvature(a: &CurvatureArgs) -> Result<(), CliError> {
    let m = build_metric(&a.metric)?;
    let v = TangentSample::new(a.x.0.clone(), a.v.0.clone());
    let r = chern_curvature(&m, &v, &a.x_dir.0, &a.y_dir.0, &a.z_dir.0)?;
    write_output(
        &a.out,
        &to_json(serde_json::to_value(&r).expect("serializable output")),
    )
}

fn cmd_flag(a: &FlagArgs) -> Result<(), CliError> {
    let m = build_metric(&a.metric)?;
    let v = TangentSample::new(a.x.0.clone(), a.v.0.clone());
    let w = a.w.as_ref().map_or(&a.u.0, |w| &w.0);
    let flag = flag_predecessor(&m, &v, &a.u.0, w)?;
    write_output(
        &a.out,
        &to_json(serde_json::to_value(flag).expect("serializable output")),
    )
}

fn cmd_geodesic(a: &GeodesicArgs) -> Result<(), CliError> {
    let m = build_metric(&a.metric)?;
    if a.steps == 0 || !a.duration.is_finite() {
        return Err(CliError::Usage(
            "--steps must be positive and --T finite".into(),
        ));
    }
    match geodesic_integrate(&m, &a.x0.0, &a.v0.0, a.duration, a.steps) {
        Ok(traj) => write_output(&a.out, &traj.to_csv()),
        Err(aborted) if aborted.partial.samples.is_empty() => Err(aborted.cause.into()),
        Err(aborted) => {
            write_output(&a.out, &aborted.partial.to_csv())?;
            let last = aborted.partial.last().map_or(0.0, |s| s.t);
            let msg = format!("{} (partial trajectory up to t = {last})", aborted.cause);
            Err(match aborted.cause {
                GeometryError::ChartExit { .. } => CliError::ChartExit(msg),
                _ => CliError::Input(msg),
            })
        }
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let m = build_metric(&a.metric)?;
    let ids: Vec<IdentityId> = match a.id {
        Some(id) => vec![id],
        None => IdentityId::ALL.to_vec(),
    };
    let reports: Vec<ResidualReport> = ids
        .iter()
        .map(|&id| {
            let mut case = IdentityCase::new(id, m.name(), a.seed);
            if let Some(n) = a.samples {
                case = case.with_samples(n);
            }
            if let Some(t) = a.tolerance {
                case = case.with_tolerance(t);
            }
            run_identity_with(&m, &case)
        })
        .collect::<Result<_, _>>()?;

    eprintln!(
        "{:<22} {:<16} {:>8} {:>12} {:>8}  result",
        "identity", "metric", "samples", "max_resid", "tol"
    );
    for r in &reports {
        eprintln!(
            "{:<22} {:<16} {:>8} {:>12.3e} {:>8.0e}  {}",
            r.id,
            r.metric,
            r.samples,
            r.max_residual,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let text = if a.suite {
        to_json(serde_json::to_value(&reports).expect("serializable output"))
    } else {
        to_json(serde_json::to_value(&reports[0]).expect("serializable output"))
    };
    write_output(&a.out, &text)?;
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}
