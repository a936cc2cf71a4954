//! Run configuration: command-line flags over a flat TOML file over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use cryamabe::heisenberg_geometry::ModelConvention;
use cryamabe::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Log,
    Power,
}

/// Which coefficient of `∫ φ σ_k dV` gates the variation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    /// `2(n+1−k)`.
    Consistent,
    /// `−2(n+k+1)`.
    Stated,
}

/// Every tunable, as given on the command line or in the config file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// CR dimension.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Curvature order.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Conformal factor as an expression in x1..xn, y1..yn, t.
    #[arg(long, global = true)]
    pub field: Option<String>,
    /// Catalog conformal factor (v0, bump, gaussian, monomial).
    #[arg(long, global = true)]
    pub catalog: Option<String>,
    /// Catalog parameter `key=value`; repeatable.
    #[arg(long = "param", global = true, value_parser = parse_param)]
    #[serde(default, deserialize_with = "params_from_table")]
    pub params: Vec<(String, f64)>,
    /// Whether the factor is `u` (θ = e^{2u}Θ₀) or `v` (θ = v^{2/n}Θ₀).
    #[arg(long, global = true)]
    pub form: Option<Form>,
    /// Curvature constant λ of the residual, or `auto`.
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// Seed of every random sample and matrix.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sample points or random matrices.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Quadrature refinement level.
    #[arg(long, global = true)]
    pub grid_level: Option<u32>,
    /// Tolerance of the primary check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Report format.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Worker threads for quadrature.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Hermitian matrix as inline JSON rows (entries `x` or `[re, im]`) or a file path.
    #[arg(long, global = true)]
    pub matrix: Option<String>,
    /// Number of bump directions for the variation checks.
    #[arg(long, global = true)]
    pub directions: Option<usize>,
    /// Treat a nonvanishing Cotton tensor as a hard error.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub strict: Option<bool>,
    #[arg(long, global = true)]
    pub coefficient: Option<Coefficient>,
    /// Levi scale c in h = c δ.
    #[arg(long, global = true)]
    pub levi_scale: Option<f64>,
    /// Frame sign s in T_α = ∂_α + s i z̄^α ∂_t.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub frame_sign: Option<i8>,
    /// Override of κ_n in dV = κ_n dx dy dt.
    #[arg(long, global = true)]
    pub volume_const: Option<f64>,
    /// Permit verify-sphere beyond n = 3.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub allow_large_n: Option<bool>,
    /// Flat TOML file with the same keys as the flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn params_from_table<'de, D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Vec<(String, f64)>, D::Error> {
    Ok(BTreeMap::<String, f64>::deserialize(deserializer)?.into_iter().collect())
}

fn parse_param(text: &str) -> std::result::Result<(String, f64), String> {
    let (key, value) = text.split_once('=').ok_or_else(|| format!("expected key=value, got `{text}`"))?;
    let value = value.trim().parse::<f64>().map_err(|e| format!("parameter `{key}`: {e}"))?;
    Ok((key.trim().to_string(), value))
}

/// Curvature constant of the residual command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaSpec {
    Auto,
    Value(f64),
}

/// The merged configuration echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub k: usize,
    pub field: Option<String>,
    pub catalog: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub form: Option<Form>,
    pub lambda: LambdaSpec,
    pub seed: u64,
    pub samples: usize,
    pub grid_level: u32,
    pub tol: Option<f64>,
    pub format: Format,
    pub workers: Option<usize>,
    pub matrix: Option<String>,
    pub directions: usize,
    pub strict: bool,
    pub coefficient: Coefficient,
    pub levi_scale: f64,
    pub frame_sign: i8,
    pub volume_const: Option<f64>,
    pub allow_large_n: bool,
}

macro_rules! prefer {
    ($flags:expr, $file:expr, $($field:ident),+) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.take(); } )+
    };
}

fn read_config_file(path: &Path) -> Result<Flags> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Validation(format!("config file {}: {e}", path.display())))
}

impl Flags {
    /// Fills every flag left unset from the config file, if one is named.
    pub fn with_config_file(mut self) -> Result<Self> {
        let flags = &mut self;
        if let Some(path) = flags.config.clone() {
            let mut file = read_config_file(&path)?;
            prefer!(
                flags, file, n, k, field, catalog, form, lambda, seed, samples, grid_level, tol, format, workers, matrix,
                directions, strict, coefficient, levi_scale, frame_sign, volume_const, allow_large_n
            );
            if flags.params.is_empty() {
                flags.params = file.params;
            }
        }
        Ok(self)
    }
}

impl RunConfig {
    /// Applies defaults and validates flags already merged with the config file.
    pub fn resolve(command: &str, flags: Flags) -> Result<Self> {
        let lambda = match flags.lambda.as_deref().map(str::trim) {
            None | Some("auto") => LambdaSpec::Auto,
            Some(text) => LambdaSpec::Value(
                text.parse().map_err(|e| Error::Validation(format!("lambda must be a number or `auto`: {e}")))?,
            ),
        };
        let n = flags.n.unwrap_or(1);
        if n == 0 || n > 16 {
            return Err(Error::Validation(format!("n must lie in 1..=16, got {n}")));
        }
        let k = flags.k.unwrap_or(1);
        if k == 0 || k > n {
            return Err(Error::Validation(format!("k must lie in 1..={n}, got {k}")));
        }
        if flags.field.is_some() && flags.catalog.is_some() {
            return Err(Error::Validation("give either --field or --catalog, not both".into()));
        }
        if let Some(tol) = flags.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
            }
        }
        if flags.workers == Some(0) {
            return Err(Error::Validation("workers must be at least 1".into()));
        }
        Ok(Self {
            command: command.to_string(),
            n,
            k,
            field: flags.field,
            catalog: flags.catalog,
            params: flags.params.into_iter().collect(),
            form: flags.form,
            lambda,
            seed: flags.seed.unwrap_or(0),
            samples: flags.samples.unwrap_or(20),
            grid_level: flags.grid_level.unwrap_or(1),
            tol: flags.tol,
            format: flags.format.unwrap_or(Format::Json),
            workers: flags.workers,
            matrix: flags.matrix,
            directions: flags.directions.unwrap_or(3),
            strict: flags.strict.unwrap_or(false),
            coefficient: flags.coefficient.unwrap_or(Coefficient::Consistent),
            levi_scale: flags.levi_scale.unwrap_or(2.0),
            frame_sign: flags.frame_sign.unwrap_or(1),
            volume_const: flags.volume_const,
            allow_large_n: flags.allow_large_n.unwrap_or(false),
        })
    }

    pub fn convention(&self) -> Result<ModelConvention> {
        let conv = ModelConvention::new(self.n, self.levi_scale, self.frame_sign)?;
        match self.volume_const {
            Some(kappa) => conv.with_volume_const(kappa),
            None => Ok(conv),
        }
    }
}
