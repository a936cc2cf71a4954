//! Command-line front end of the CR k-Yamabe toolkit.
//!
//! Every subcommand produces a [`report::RunReport`]: the merged
//! configuration, named checks with their values, targets and tolerances,
//! command-specific results and the wall time. Failures map onto disjoint
//! exit statuses through [`exit_code`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod geometry;
pub mod report;
pub mod symfun;

use std::time::Instant;

use clap::{Parser, Subcommand};
use cryamabe::Error;

use crate::config::{Flags, Format, RunConfig};
use crate::report::{to_csv, Outcome, RunReport};

/// All checks passed.
pub const EXIT_PASS: i32 = 0;
/// The run completed but a check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Invalid input: flags, config file, matrices, field syntax, dimensions.
pub const EXIT_VALIDATION: i32 = 2;
/// A field or matrix evaluated outside its domain.
pub const EXIT_DOMAIN: i32 = 3;
/// Quadrature failed or did not converge.
pub const EXIT_QUADRATURE: i32 = 4;
/// A structural hypothesis does not hold.
pub const EXIT_HYPOTHESIS: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "cryamabe", version, about = "Numerical checks of the CR k-Yamabe problem on the Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// σ_k, Newton-transformation identities, cone verdicts and inequality slacks.
    Symfun,
    /// The inequality suite on a seeded batch (symfun batch mode).
    Inequalities,
    /// Pointwise k-Yamabe residuals, Cotton norms and ellipticity.
    Residual,
    /// The sphere constant C(n,k) πᵏ with its convergence table.
    VerifySphere,
    /// First variation of the total σ_k-curvature and criticality of the sphere.
    Variation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Symfun => "symfun",
            Command::Inequalities => "inequalities",
            Command::Residual => "residual",
            Command::VerifySphere => "verify-sphere",
            Command::Variation => "variation",
        }
    }
}

/// Exit status of a failed run.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Validation(_) | Error::Parse { .. } => EXIT_VALIDATION,
        Error::Domain(_) | Error::Evaluation { .. } => EXIT_DOMAIN,
        Error::Integration(_) => EXIT_QUADRATURE,
        Error::Precondition(_) => EXIT_HYPOTHESIS,
    }
}

/// A finished run with its rendered output.
#[derive(Debug, Clone)]
pub struct Completed {
    pub report: RunReport,
    pub rendered: String,
}

impl Completed {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Resolves the configuration, runs the command and renders its report.
pub fn run(command: Command, flags: Flags) -> cryamabe::Result<Completed> {
    let started = Instant::now();
    let mut flags = flags.with_config_file()?;
    if command == Command::Symfun && flags.n.is_none() {
        if let Some(source) = &flags.matrix {
            flags.n = Some(symfun::read_matrix(source)?.dim());
        }
    }
    let cfg = RunConfig::resolve(command.name(), flags)?;
    let conv = cfg.convention()?;
    if let Some(workers) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::Validation(format!("cannot configure {workers} workers: {e}")))?;
    }
    let outcome: Outcome = match command {
        Command::Symfun => symfun::run_symfun(&cfg)?,
        Command::Inequalities => symfun::run_inequalities(&cfg)?,
        Command::Residual => geometry::run_residual(&cfg, &conv)?,
        Command::VerifySphere => geometry::run_verify_sphere(&cfg, &conv)?,
        Command::Variation => geometry::run_variation(&cfg, &conv)?,
    };
    let format = cfg.format;
    let report = RunReport::new(cfg, conv, &outcome, started.elapsed().as_secs_f64());
    let rendered = match format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => to_csv(&report, &outcome),
    };
    Ok(Completed { report, rendered })
}
