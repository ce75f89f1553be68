use std::fmt;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use synaptic_core::{Effect, Error, Projection, SymmetricElement, ToleranceConfig};

pub type Rows = Vec<Vec<f64>>;

/// Failure modes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// bad flags or arguments (exit 2)
    Usage(String),
    /// unreadable or invalid input (exit 2)
    Input(String),
    /// an invariant or check failed (exit 1)
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) | CliError::Input(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::InvariantViolation { .. } | Error::NumericalFailure { .. } => CliError::Check(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

/// `{"dim": n, "p": [[...]], "e": [[...]], "tol": {...}}`. A failure record
/// written by `verify` (with the pair under `"instance"`) is accepted too.
#[derive(Debug, Clone, Deserialize)]
pub struct PairInput {
    pub dim: usize,
    #[serde(default)]
    pub p: Option<Rows>,
    #[serde(default)]
    pub e: Option<Rows>,
    #[serde(default)]
    pub q: Option<Rows>,
    #[serde(default)]
    pub tol: Option<ToleranceConfig>,
}

pub(crate) fn parse_element(name: &str, rows: &Rows, dim: usize, tol: &ToleranceConfig) -> Result<SymmetricElement, CliError> {
    element(name, rows, dim, tol)
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Unwraps a failure record to the instance it carries.
pub fn unwrap_record(value: Value) -> Value {
    match value {
        Value::Object(mut map) if map.contains_key("instance") => map.remove("instance").unwrap_or(Value::Null),
        other => other,
    }
}

pub fn load_pair_input(path: &Path) -> Result<PairInput, CliError> {
    let value = unwrap_record(read_json(path)?);
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Tolerances from the input file, then flag overrides.
pub fn tolerance(
    file: Option<&ToleranceConfig>,
    rank: Option<f64>,
    comm: Option<f64>,
) -> Result<ToleranceConfig, CliError> {
    let mut tol = file.cloned().unwrap_or_default();
    if let Some(r) = rank {
        tol.rank_eps = r;
    }
    if let Some(c) = comm {
        tol.comm_eps = c;
    }
    tol.validate()?;
    Ok(tol)
}

/// Rejects non-finite entries and matrices that are not symmetric up to
/// `rank_eps`, then checks the size against `dim`.
fn element(name: &str, rows: &Rows, dim: usize, tol: &ToleranceConfig) -> Result<SymmetricElement, CliError> {
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Input(format!("{name}: entries must be finite")));
    }
    let a = SymmetricElement::from_rows(rows).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
    if a.dim() != dim {
        return Err(CliError::Input(format!(
            "{name} is {}×{} but dim is {dim}",
            a.dim(),
            a.dim()
        )));
    }
    let asymmetry = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, x)| (x - rows[j][i]).abs()))
        .fold(0.0, f64::max);
    if asymmetry > tol.zero_threshold(a.frobenius_norm()) {
        return Err(CliError::Input(format!(
            "{name}: not symmetric (largest |a_ij - a_ji| = {asymmetry:e})"
        )));
    }
    Ok(a)
}

impl PairInput {
    fn rows<'a>(&'a self, name: &str, rows: &'a Option<Rows>) -> Result<&'a Rows, CliError> {
        rows.as_ref()
            .ok_or_else(|| CliError::Input(format!("input has no \"{name}\" matrix")))
    }

    pub fn projection(&self, tol: &ToleranceConfig) -> Result<Projection, CliError> {
        let a = element("p", self.rows("p", &self.p)?, self.dim, tol)?;
        Projection::new(a, tol).map_err(|e| CliError::Input(format!("p: {e}")))
    }

    pub fn effect(&self, tol: &ToleranceConfig) -> Result<Effect, CliError> {
        let a = element("e", self.rows("e", &self.e)?, self.dim, tol)?;
        Effect::new(a, tol).map_err(|e| CliError::Input(format!("e: {e}")))
    }

    pub fn q_projection(&self, tol: &ToleranceConfig) -> Result<Option<Projection>, CliError> {
        self.q
            .as_ref()
            .map(|rows| {
                let a = element("q", rows, self.dim, tol)?;
                Projection::new(a, tol).map_err(|e| CliError::Input(format!("q: {e}")))
            })
            .transpose()
    }
}

/// A projection file for `--q`: a bare matrix, or an object holding it
/// under `"q"` or `"p"`.
pub fn load_projection(path: &Path, dim: usize, tol: &ToleranceConfig) -> Result<Projection, CliError> {
    let value = unwrap_record(read_json(path)?);
    let rows = match &value {
        Value::Array(_) => value,
        Value::Object(map) => map
            .get("q")
            .or_else(|| map.get("p"))
            .cloned()
            .ok_or_else(|| CliError::Input(format!("{}: no \"q\" matrix", path.display())))?,
        _ => return Err(CliError::Input(format!("{}: expected a matrix", path.display()))),
    };
    let rows: Rows = serde_json::from_value(rows).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let a = element("q", &rows, dim, tol)?;
    Projection::new(a, tol).map_err(|e| CliError::Input(format!("q: {e}")))
}
