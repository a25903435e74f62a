//! Channel and state ingestion: built-in generators or JSON spec files.

use std::path::Path;

use cqrel::channel::{CQChannel, ChannelSpec};
use cqrel::linalg::{Matrix, C64};
use cqrel::operator::DensityOperator;

use crate::CliError;

/// Tolerances applied to spec files before the states are handed on.
pub const FILE_TRACE_TOL: f64 = 1e-8;
pub const FILE_HERMITIAN_TOL: f64 = 1e-10;

/// A parsed channel with the optional input distribution from its spec.
pub struct Loaded {
    pub channel: CQChannel,
    pub prior: Option<Vec<f64>>,
}

fn generator_param(arg: &str, name: &str) -> Result<f64, CliError> {
    arg.parse::<f64>()
        .map_err(|_| CliError::Parse(format!("{name}: expected a number, got {arg:?}")))
}

/// `bsc:p`, `pure2:c`, `depol-out:p`, or a path to a JSON spec.
pub fn load_channel(spec: &str) -> Result<Loaded, CliError> {
    if let Some((kind, arg)) = spec.split_once(':') {
        let channel = match kind {
            "bsc" => CQChannel::bsc(generator_param(arg, kind)?),
            "pure2" => CQChannel::pure_pair(generator_param(arg, kind)?),
            "depol-out" => CQChannel::depolarized_pair(generator_param(arg, kind)?),
            _ => return load_file(Path::new(spec)),
        }
        .map_err(|e| CliError::Validation(format!("{spec}: {e}")))?;
        return Ok(Loaded { channel, prior: None });
    }
    load_file(Path::new(spec))
}

fn load_file(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let spec: ChannelSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    from_spec(&spec)
}

/// Checks each state with the file tolerances, then rebuilds the spec from
/// the cleaned matrices so the library sees exact Hermitian, unit-trace input.
pub fn from_spec(spec: &ChannelSpec) -> Result<Loaded, CliError> {
    let d = spec.dim_b;
    if spec.states.len() != spec.inputs {
        return Err(CliError::Validation(format!(
            "declared {} inputs but found {} states",
            spec.inputs,
            spec.states.len()
        )));
    }
    let mut outputs = Vec::with_capacity(spec.states.len());
    for (idx, s) in spec.states.iter().enumerate() {
        if s.len() != d || s.iter().any(|row| row.len() != d) {
            return Err(CliError::Validation(format!("state {idx}: not a {d}×{d} matrix")));
        }
        let m = Matrix::from_fn(d, d, |i, j| C64::new(s[i][j][0], s[i][j][1]));
        let herm = m.hermiticity_deviation();
        if herm > FILE_HERMITIAN_TOL {
            return Err(CliError::Validation(format!("state {idx}: not Hermitian (deviation {herm:.3e})")));
        }
        let tr = m.tr();
        if (tr - 1.0).abs() > FILE_TRACE_TOL {
            return Err(CliError::Validation(format!("state {idx}: trace {tr} is not 1")));
        }
        let clean = m.hermitian_part().scale_re(1.0 / tr);
        let rho = DensityOperator::new(clean).map_err(|e| CliError::Validation(format!("state {idx}: {e}")))?;
        outputs.push(rho);
    }
    let channel = CQChannel::new(outputs).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut cleaned = channel.to_spec(spec.prior.clone());
    cleaned.format_version = spec.format_version;
    let channel = cleaned
        .to_channel()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(Loaded {
        channel,
        prior: spec.prior.clone(),
    })
}

/// `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Parse(format!("invalid grid {text:?}; use start:stop:step or a comma list"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) = (
                a.parse().map_err(|_| bad())?,
                b.parse().map_err(|_| bad())?,
                step.parse().map_err(|_| bad())?,
            );
            if !(step > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| a + i as f64 * step).collect()
        }
        [list] => list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(CliError::Parse("empty grid".into()));
    }
    Ok(grid)
}
