//! Run configuration: flag/file merging, field-data files, error→exit-code
//! mapping.
//!
//! Every subcommand flag can instead be supplied through a JSON config file
//! (`--config run.json`) whose keys are the flag names with `-` replaced by
//! `_`. Explicit flags always win over file values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use heatkern::{EvalConfig, FieldData};

/// CLI failure carrying its exit code: usage/config errors exit 2,
/// evaluation failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<heatkern::Error> for CliError {
    fn from(e: heatkern::Error) -> Self {
        use heatkern::Error::*;
        match e {
            // Bad inputs: the request itself was invalid.
            Domain(_) | UnsupportedOrder { .. } | UnsupportedArity(_) | UnsupportedRank(_)
            | UnsupportedKinematics(_) | SingularGram(_) | DimensionMismatch(_)
            | PoleOutsideContour { .. } | DivergentIntegral(_) | InvalidFieldData(_) | Io(_)
            | Json(_) => CliError::Usage(e.to_string()),
            // Numerical breakdown on a well-posed request.
            Convergence(_) | SingularSystem(_) | EigensolveFailure(_) | Overflow(_) => {
                CliError::Failure(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parsed `--config` file: flat JSON object of default flag values.
pub struct Ctx {
    map: serde_json::Map<String, Value>,
}

impl Ctx {
    pub fn load(path: Option<&Path>) -> CliResult<Ctx> {
        let map = match path {
            None => serde_json::Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(usage("config file must contain a JSON object")),
                    Err(e) => return Err(usage(format!("config file is not valid JSON: {e}"))),
                }
            }
        };
        Ok(Ctx { map })
    }

    /// Flag value if given, else the config entry rendered as a string.
    pub fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| match self.map.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Number(n)) => Some(n.to_string()),
            _ => None,
        })
    }

    pub fn f64(&self, flag: Option<f64>, key: &str) -> CliResult<Option<f64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(Value::String(s)) => s
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config key '{key}' is not a number: {s:?}"))),
            Some(v) => Err(usage(format!("config key '{key}' is not a number: {v}"))),
        }
    }

    pub fn u32(&self, flag: Option<u32>, key: &str) -> CliResult<Option<u32>> {
        match self.f64(flag.map(f64::from), key)? {
            None => Ok(None),
            Some(v) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 => Ok(Some(v as u32)),
            Some(v) => Err(usage(format!("config key '{key}' is not an integer: {v}"))),
        }
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| match self.map.get(key) {
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            _ => None,
        })
    }
}

pub fn require<T>(v: Option<T>, what: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("missing required parameter: {what}")))
}

/// Evaluation settings honouring the `HK_QUAD_TOL` environment variable.
pub fn eval_config() -> CliResult<EvalConfig> {
    let mut cfg = EvalConfig::default();
    if let Ok(raw) = std::env::var("HK_QUAD_TOL") {
        let tol: f64 = raw
            .parse()
            .map_err(|_| usage(format!("HK_QUAD_TOL is not a number: {raw:?}")))?;
        cfg.quad_rel_tol = tol;
        cfg.validate()
            .map_err(|e| usage(format!("HK_QUAD_TOL rejected: {e}")))?;
    }
    Ok(cfg)
}

/// One Fourier mode in a field-data file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeEntry {
    n: Vec<i32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

/// On-disk field configuration: potential and gauge modes on a periodic box.
///
/// ```json
/// {
///   "d": 1,
///   "box_length": 6.283185307179586,
///   "bundle_dim": 1,
///   "n_sites": 256,
///   "u_modes": [ { "n": [2], "re": 0.05 }, { "n": [-2], "re": 0.05 } ],
///   "a_modes": [ [ { "n": [1], "re": 0.0, "im": 0.0 } ] ]
/// }
/// ```
///
/// `n_sites` is only consulted by lattice commands; `a_modes` lists one mode
/// array per direction (omit for a pure potential).
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldsFile {
    d: usize,
    box_length: f64,
    #[serde(default = "default_bundle")]
    bundle_dim: usize,
    #[serde(default)]
    n_sites: Option<usize>,
    #[serde(default)]
    u_modes: Vec<ModeEntry>,
    #[serde(default)]
    a_modes: Vec<Vec<ModeEntry>>,
}

fn default_bundle() -> usize {
    1
}

fn mode_map(entries: &[ModeEntry], d: usize, what: &str) -> CliResult<BTreeMap<Vec<i32>, Complex64>> {
    let mut map = BTreeMap::new();
    for e in entries {
        if e.n.len() != d {
            return Err(usage(format!(
                "{what}: mode index {:?} has {} entries, expected {d}",
                e.n,
                e.n.len()
            )));
        }
        if map.insert(e.n.clone(), Complex64::new(e.re, e.im)).is_some() {
            return Err(usage(format!("{what}: duplicate mode index {:?}", e.n)));
        }
    }
    Ok(map)
}

/// Loads a field-data file; returns the fields and the optional site count.
pub fn load_fields(path: &Path) -> CliResult<(FieldData, Option<usize>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read fields file {}: {e}", path.display())))?;
    let file: FieldsFile = serde_json::from_str(&text)
        .map_err(|e| usage(format!("fields file {}: {e}", path.display())))?;
    let u = mode_map(&file.u_modes, file.d, "u_modes")?;
    let a = if file.a_modes.is_empty() {
        vec![BTreeMap::new(); file.d]
    } else {
        if file.a_modes.len() != file.d {
            return Err(usage(format!(
                "a_modes has {} direction arrays, expected {} (one per direction)",
                file.a_modes.len(),
                file.d
            )));
        }
        file.a_modes
            .iter()
            .enumerate()
            .map(|(mu, entries)| mode_map(entries, file.d, &format!("a_modes[{mu}]")))
            .collect::<CliResult<Vec<_>>>()?
    };
    let fields = FieldData::new(file.d, file.box_length, file.bundle_dim, u, a)?;
    Ok((fields, file.n_sites))
}
