use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    RunSingle,
    RunGeneral,
    VerifyIc,
    DemoThreshold,
    DemoNegative,
    BuildNetwork,
    BuildPrincipalAgent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub instance_path: Option<PathBuf>,
    pub welfare: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    /// Number of sampled instances for `verify-ic` without an instance file.
    pub count: Option<usize>,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            instance_path: None,
            welfare: None,
            params: BTreeMap::new(),
            seed: None,
            grid: None,
            count: None,
            output_path: None,
            format: Format::Json,
        }
    }
}

/// Parses one `--param key=value` argument.
pub fn parse_param(arg: &str) -> CliResult<(String, f64)> {
    let (key, value) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--param expects key=value, got {arg:?}")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--param {key}: {value:?} is not a number")))?;
    Ok((key.trim().to_string(), value))
}
