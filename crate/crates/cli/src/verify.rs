use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use fundamental_core::theory::{scaling_verification, AsymptoticReport, SLOPE_LIMIT};
use serde::Serialize;

use crate::failure::{CliResult, Failure};
use crate::io;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Polynomial spec: `[{"m": 1, "re": 1.0, "im": 0.0}, ...]` (complex
    /// exponentials over period 2π), or `{"form": "complex"|"real_cosine",
    /// "period": P, "terms": [...]}`. A term may use `"a"` for a real amplitude.
    #[arg(long)]
    pub signal: PathBuf,
    /// Strictly decreasing ε values in [1e-7, 0.1].
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5,1e-6")]
    pub eps_ladder: Vec<f64>,
}

#[derive(Serialize)]
struct Summary {
    summary: bool,
    cancelled: bool,
    vanishing: bool,
    slope: f64,
    slope_limit: f64,
    final_rel_error: Option<f64>,
    criterion_met: bool,
}

/// One JSON line per ε, then a summary line. Returns the exit code.
pub fn run(args: &VerifyArgs) -> CliResult<u8> {
    let bytes = io::read_bytes(&args.signal)?;
    let poly = io::parse_polynomial(&bytes)?;
    let result = scaling_verification(&poly, &args.eps_ladder)?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for report in &result.reports {
        writeln!(out, "{}", serde_json::to_string(&line(report))?)?;
    }
    let summary = Summary {
        summary: true,
        cancelled: result.cancelled,
        vanishing: result.vanishing,
        slope: result.slope,
        slope_limit: SLOPE_LIMIT,
        final_rel_error: result.reports.last().and_then(|r| r.rel_error),
        criterion_met: result.criterion_met,
    };
    writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    out.flush()?;
    if result.criterion_met {
        Ok(0)
    } else {
        Err(Failure::numeric(format!(
            "error growth exponent {:.3} exceeds {SLOPE_LIMIT}",
            result.slope
        )))
    }
}

#[derive(Serialize)]
struct Line {
    epsilon: f64,
    integral_re: f64,
    integral_im: f64,
    prediction_re: f64,
    prediction_im: f64,
    abs_error: f64,
    rel_error: Option<f64>,
    /// `|integral| · √ε`, which tends to the leading coefficient (or to 0
    /// when the peaks cancel).
    scaled_integral: f64,
    quadrature_error: f64,
}

fn line(r: &AsymptoticReport) -> Line {
    Line {
        epsilon: r.epsilon,
        integral_re: r.numeric_integral.re,
        integral_im: r.numeric_integral.im,
        prediction_re: r.prediction.re,
        prediction_im: r.prediction.im,
        abs_error: r.abs_error,
        rel_error: r.rel_error,
        scaled_integral: r.numeric_integral.norm() * r.epsilon.sqrt(),
        quadrature_error: r.quadrature_error,
    }
}
