use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use holodyn::dynamics::{DEFAULT_APERTURE, DEFAULT_BOUND, DICHOTOMY_STEPS, HOLONOMY_MAX_ITER, HOLONOMY_TOL, SPLITTING_ITER};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "holodyn", version, about = "Numerical laboratory for holomorphic partially hyperbolic systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Registry name of the system; each subcommand has its own default.
    #[arg(long)]
    pub system: Option<String>,
    /// Seed for sample points and Monte Carlo streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat key=value file; flags given on the command line override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Write the curve of the operation as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    /// Run the engines on one thread.
    #[arg(long)]
    #[serde(skip)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Stable, center and unstable bundles at a sample point.
    Splitting {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: SplittingArgs,
    },
    /// Lyapunov exponents along the orbit of a sample point.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: LyapunovArgs,
    },
    /// Unstable holonomy between a sample point and a nearby point of its leaf.
    Holonomy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: HolonomyArgs,
    },
    /// Antilinear defect of the center holonomy between two center fibers.
    Dbar {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: DbarArgs,
    },
    /// Isometry or contraction of the center fibers.
    Dichotomy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: DichotomyArgs,
    },
    /// Moduli of unstable lattices transported along a center leaf.
    Modscan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: ModscanArgs,
    },
    /// Cesàro averages of an unstable disk against the test panel.
    Gibbs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: GibbsArgs,
    },
    /// Heat-semigroup decay of a fiber density.
    Heat {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: HeatArgs,
    },
    /// Nijenhuis tensor of a nilmanifold structure, in exact arithmetic.
    Nijenhuis {
        #[command(flatten)]
        common: Common,
    },
    /// Dimension of the subalgebra generated by the stable and unstable spaces.
    Accessibility {
        #[command(flatten)]
        common: Common,
    },
    /// Lattice bookkeeping: singular fibers, fiber moduli, involution checks, degrees.
    Lattice {
        action: LatticeAction,
        #[command(flatten)]
        common: Common,
    },
    /// Default battery over the whole registry.
    ReportAll {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SplittingArgs {
    #[arg(long, default_value_t = SPLITTING_ITER)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_APERTURE)]
    pub aperture: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LyapunovArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Iterate the inverse map.
    #[arg(long)]
    pub inverse: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HolonomyArgs {
    #[arg(long, default_value_t = HOLONOMY_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = HOLONOMY_MAX_ITER)]
    pub max_iter: usize,
    /// Size of the unstable displacement to the second point.
    #[arg(long, default_value_t = 0.05)]
    pub scale: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DbarArgs {
    /// Center coordinate of the first fiber, e.g. `z=0` or `0.5+1i`.
    #[arg(long, default_value = "z=0", value_parser = parse_complex)]
    pub from: C64,
    #[arg(long, default_value = "z=1", value_parser = parse_complex)]
    pub to: C64,
    /// Also differentiate sampled germs with this step.
    #[arg(long)]
    pub sampled_step: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DichotomyArgs {
    #[arg(long, default_value_t = DICHOTOMY_STEPS)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    pub bound: f64,
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModscanArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Complex coordinates of the first lattice vector, comma separated.
    #[arg(long, default_value = "1", value_parser = parse_complex, value_delimiter = ',')]
    pub v1: Vec<C64>,
    #[arg(long, default_value = "0.3+1.2i", value_parser = parse_complex, value_delimiter = ',')]
    pub v2: Vec<C64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GibbsArgs {
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Write the final particle cloud as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub particles: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeChoice {
    Square,
    Hexagonal,
    /// The fiber lattice of the chosen system.
    System,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HeatArgs {
    #[arg(long, value_enum, default_value_t = LatticeChoice::System)]
    pub lattice: LatticeChoice,
    /// Fourier mode of the initial perturbation, as `k1,k2`.
    #[arg(long, default_value = "1,0", value_delimiter = ',', allow_negative_numbers = true)]
    pub mode: Vec<i64>,
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 8)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 0.045)]
    pub t_max: f64,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeAction {
    SingularFibers,
    Moduli,
    Check,
    DetDegree,
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let body = s.trim();
    let body = body.split_once('=').map_or(body, |(_, v)| v).replace(' ', "");
    body.parse::<C64>().map_err(|_| format!("not a complex number: {s:?}"))
}

#[derive(Debug)]
pub enum ArgError {
    /// Help or version output; not an error.
    Display(String),
    Usage(String),
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Config entries become `--key=value` flags placed right after the
/// subcommand, so that later command-line flags override them.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, ArgError> {
    let mut argv = argv;
    if let Some(path) = config_path(&argv) {
        let entries = read_config(&path).map_err(ArgError::Usage)?;
        let pos = argv.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 2);
        if let Some(pos) = pos {
            let mut flags = Vec::new();
            for (k, v) in entries {
                match v.as_str() {
                    "true" => flags.push(OsString::from(format!("--{k}"))),
                    "false" => {}
                    _ => flags.push(OsString::from(format!("--{k}={v}"))),
                }
            }
            argv.splice(pos..pos, flags);
        }
    }
    let cmd = Cli::command().args_override_self(true).mut_subcommands(|s| s.args_override_self(true));
    let matches = cmd.try_get_matches_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ArgError::Display(e.to_string()),
        _ => ArgError::Usage(e.render().to_string()),
    })?;
    Cli::from_arg_matches(&matches).map_err(|e| ArgError::Usage(e.to_string()))
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Splitting { common, .. }
            | Command::Lyapunov { common, .. }
            | Command::Holonomy { common, .. }
            | Command::Dbar { common, .. }
            | Command::Dichotomy { common, .. }
            | Command::Modscan { common, .. }
            | Command::Gibbs { common, .. }
            | Command::Heat { common, .. }
            | Command::Nijenhuis { common }
            | Command::Accessibility { common }
            | Command::Lattice { common, .. }
            | Command::ReportAll { common } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Splitting { .. } => "splitting",
            Command::Lyapunov { .. } => "lyapunov",
            Command::Holonomy { .. } => "holonomy",
            Command::Dbar { .. } => "dbar",
            Command::Dichotomy { .. } => "dichotomy",
            Command::Modscan { .. } => "modscan",
            Command::Gibbs { .. } => "gibbs",
            Command::Heat { .. } => "heat",
            Command::Nijenhuis { .. } => "nijenhuis",
            Command::Accessibility { .. } => "accessibility",
            Command::Lattice { .. } => "lattice",
            Command::ReportAll { .. } => "report-all",
        }
    }

    pub fn default_system(&self) -> &'static str {
        match self {
            Command::Dbar { .. } => "bc_n1",
            Command::Dichotomy { .. } => "mobius_loxodromic",
            Command::Modscan { .. } | Command::Heat { .. } => "skew_l1",
            Command::Nijenhuis { .. } | Command::Accessibility { .. } => "iwasawa",
            Command::Lattice { action: LatticeAction::DetDegree, .. } => "bc_n1",
            Command::Lattice { .. } => "elliptic_quotient",
            _ => "cat2c",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn complex_values() {
        assert_eq!(parse_complex("z=0").unwrap(), C64::new(0.0, 0.0));
        assert_eq!(parse_complex("0.3+1.2i").unwrap(), C64::new(0.3, 1.2));
        assert_eq!(parse_complex(" w = -2i ").unwrap(), C64::new(0.0, -2.0));
        assert!(parse_complex("one").is_err());
    }

    #[test]
    fn later_flags_override_earlier_ones() {
        let cli = parse(argv("holodyn lyapunov --n 5 --n 7")).unwrap();
        let Command::Lyapunov { args, .. } = cli.command else { panic!() };
        assert_eq!(args.n, 7);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert!(matches!(parse(argv("holodyn splitting --bogus 1")), Err(ArgError::Usage(_))));
        assert!(matches!(parse(argv("holodyn --help")), Err(ArgError::Display(_))));
    }

    #[test]
    fn defaults_by_subcommand() {
        let cli = parse(argv("holodyn lattice det-degree")).unwrap();
        assert_eq!(cli.command.default_system(), "bc_n1");
        let cli = parse(argv("holodyn dbar")).unwrap();
        assert_eq!(cli.command.default_system(), "bc_n1");
        assert_eq!(cli.command.name(), "dbar");
    }
}
