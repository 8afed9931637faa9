//! Run configuration: command-line flags layered over an optional TOML file
//! with the same keys, layered over defaults.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigRational;
use pqset_core::coeff::parse_rat;
use pqset_core::rewrite::{Background, Convention, Regime};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "pqset", version, about = "Symbolic checks of the perturbative stress-energy tensor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Bogoliubov expansion and interacting expectation value of a functional.
    Expand {
        /// phi, phi2, phik(K), dphi-dphi or set
        #[arg(long)]
        functional: String,
    },
    /// Divergence of the stress-energy expectation value and the η solving it.
    Conserve,
    /// Trace of the stress-energy expectation value against its closed form.
    Trace,
    /// Scaling degrees and extension classes of Feynman powers.
    Scaling {
        #[arg(long)]
        d: Option<u32>,
        /// Inclusive range such as 1..4, or a single k.
        #[arg(long)]
        k: Option<String>,
    },
}

/// Flags shared by every command; each may also come from the config file.
#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// TOML file with the same keys as the flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Interaction power (3 or 4).
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Drop the interaction.
    #[arg(long, global = true)]
    #[serde(default)]
    pub free: bool,
    /// Truncation order in λ.
    #[arg(long, global = true)]
    pub order: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub background: Option<RegimeArg>,
    /// `symbolic` or a rational such as 1/4.
    #[arg(long, global = true)]
    pub eta: Option<String>,
    /// `symbolic` or a rational such as 1/6.
    #[arg(long, global = true)]
    pub xi: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub convention: Option<ConventionArg>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    Minkowski,
    Generic,
    MaximallySymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    Delta,
    Idelta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Latex,
}

/// A coupling that is either kept as a symbol or fixed to a rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coupling {
    Symbolic,
    Value(BigRational),
}

impl Coupling {
    fn parse(key: &str, s: &str) -> Result<Self, String> {
        if s == "symbolic" {
            return Ok(Coupling::Symbolic);
        }
        parse_rat(s)
            .map(Coupling::Value)
            .ok_or_else(|| format!("--{key}: expected `symbolic` or a rational, got `{s}`"))
    }

    pub fn label(&self) -> String {
        match self {
            Coupling::Symbolic => "symbolic".into(),
            Coupling::Value(r) => r.to_string(),
        }
    }
}

/// Resolved configuration. `eta`/`xi` stay `None` when neither flag nor file
/// set them so each command can pick its own default.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<u32>,
    pub order: u32,
    pub regime: RegimeArg,
    pub eta: Option<Coupling>,
    pub xi: Option<Coupling>,
    pub convention: ConventionArg,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, String> {
        let file = match &cli.flags.config {
            Some(p) => load_file(p)?,
            None => Flags::default(),
        };
        let f = cli.flags;
        let free = f.free || file.free;
        let n = f.n.or(file.n).unwrap_or(4);
        if !free && !(n == 3 || n == 4) {
            return Err(format!("--n {n}: only 3 and 4 are supported"));
        }
        let coupling =
            |key: &str, a: Option<String>, b: Option<String>| a.or(b).map(|s| Coupling::parse(key, &s)).transpose();
        Ok(RunConfig {
            command: cli.command,
            n: (!free).then_some(n),
            order: f.order.or(file.order).unwrap_or(2),
            regime: f.background.or(file.background).unwrap_or(RegimeArg::Minkowski),
            eta: coupling("eta", f.eta, file.eta)?,
            xi: coupling("xi", f.xi, file.xi)?,
            convention: f.convention.or(file.convention).unwrap_or(ConventionArg::Delta),
            format: f.format.or(file.format).unwrap_or(Format::Json),
            output: f.output.or(file.output),
        })
    }

    pub fn background(&self) -> Background {
        let regime = match self.regime {
            RegimeArg::Minkowski => Regime::Minkowski,
            RegimeArg::Generic => Regime::Generic,
            RegimeArg::MaximallySymmetric => Regime::MaximallySymmetric,
        };
        let convention = match self.convention {
            ConventionArg::Delta => Convention::Delta,
            ConventionArg::Idelta => Convention::IDelta,
        };
        Background { regime, convention }
    }
}

fn load_file(p: &Path) -> Result<Flags, String> {
    let text = std::fs::read_to_string(p).map_err(|e| format!("config {}: {e}", p.display()))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {e}", p.display()))
}

/// `a..b` (inclusive) or a single integer.
pub fn parse_k_range(s: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("--k: expected `a..b` or an integer, got `{s}`");
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a == 0 || a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => {
            let k: u32 = s.trim().parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            Ok(vec![k])
        }
    }
}
