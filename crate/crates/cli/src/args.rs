//! Command-line surface: subcommands, flags, and the exact-input grammars.
//!
//! Grammar summary (all inputs exact — no floats anywhere):
//!   p-adic ball   `p<prime>:<center num>/<center den>:k<exponent>`  e.g. `p5:0/1:k1`
//!   circle arc    `<left>:<length>`                                 e.g. `0:1/2`
//!   place         `p<prime>` or `inf`
//!   ψ function    `pow:<tau>` | `powlog:<sigma>` | `table:<path>`
//!
//! Table files are two-column CSV `n,value` with `value` a rational
//! `num/den`, heights contiguous from 1.

use std::path::PathBuf;

use ballapprox::exact::{parse_rational, Rational};
use ballapprox::padic::{Ball, Place};
use ballapprox::psi::ApproxFunction;
use clap::{Args, Parser, Subcommand};

/// A parsed ψ together with the flag text it came from, so config echoes
/// and manifests can reproduce the exact invocation (including table paths).
#[derive(Clone, Debug)]
pub struct PsiSpec {
    pub raw: String,
    pub f: ApproxFunction,
}

#[derive(Parser, Debug)]
#[command(
    name = "ballapprox",
    version,
    about = "Exact Diophantine approximation by rationals from a ball at one place of Q, measured at another",
    propagate_version = true
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Run directory (default: a fresh directory under $BALLAPPROX_OUT,
    /// falling back to ./runs).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate ball-restricted reduced fractions and their totient table.
    Enumerate(EnumerateArgs),
    /// Exact moment report: Ψ(N), M1, M2², with a built-in identity self-test.
    Moments(MomentsArgs),
    /// Sampled and exhaustive experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

/// Source ball: exactly one of the two forms.
#[derive(Args, Debug)]
pub struct SourceArgs {
    /// p-adic source ball, `p<prime>:<center num>/<center den>:k<exponent>`.
    #[arg(
        long,
        value_name = "BALL",
        value_parser = parse_ball_flag,
        conflicts_with = "source_arc",
        required_unless_present = "source_arc"
    )]
    pub source_ball: Option<Ball>,

    /// Circle-arc source, `<left>:<length>` with exact rationals.
    #[arg(long, value_name = "ARC", value_parser = parse_arc_flag)]
    pub source_arc: Option<Ball>,
}

impl SourceArgs {
    pub fn ball(&self) -> Ball {
        self.source_ball
            .clone()
            .or_else(|| self.source_arc.clone())
            .expect("clap enforces exactly one source flag")
    }
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Target place: `p<prime>` or `inf`.
    #[arg(long, value_name = "PLACE", value_parser = parse_place_flag)]
    pub target: Place,

    /// Largest height N to enumerate.
    #[arg(long, value_name = "N")]
    pub max_n: u64,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Target place: `p<prime>` (moments need a finite place).
    #[arg(long, value_name = "PLACE", value_parser = parse_place_flag)]
    pub target: Place,

    /// Approximation function: `pow:<tau>` | `powlog:<sigma>` | `table:<path>`.
    #[arg(long, value_name = "PSI", value_parser = parse_psi_flag)]
    pub psi: PsiSpec,

    /// Height N of the moments.
    #[arg(long, value_name = "N")]
    pub max_n: u64,
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// Sample targets and test whether mean Δ_N tracks the height sum Ψ(N).
    Dichotomy(DichotomyArgs),
    /// Exhaustive Paley–Zygmund check of the measure lower bound.
    PaleyZygmund(PaleyZygmundArgs),
    /// Box-counting dimension fit for the τ-approximable set.
    Dimension(DimensionArgs),
    /// Verify that translates of a scaled ball partition the unit ball.
    TranslatePartition(TranslatePartitionArgs),
}

#[derive(Args, Debug)]
pub struct DichotomyArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Target place: `p<prime>`.
    #[arg(long, value_name = "PLACE", value_parser = parse_place_flag)]
    pub target: Place,

    /// Approximation function: `pow:<tau>` | `powlog:<sigma>` | `table:<path>`.
    #[arg(long, value_name = "PSI", value_parser = parse_psi_flag)]
    pub psi: PsiSpec,

    /// Samples drawn when the residue space is too large to enumerate.
    #[arg(long, default_value_t = 500)]
    pub samples: u64,

    /// RNG seed (echoed into the manifest; ignored in exhaustive mode).
    #[arg(long)]
    pub seed: u64,

    /// Height checkpoints, comma separated, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10000])]
    pub grid: Vec<u64>,

    /// Sample digits at the target prime (default: enough to settle every
    /// count on the grid, with safety margin).
    #[arg(long)]
    pub precision: Option<u32>,
}

#[derive(Args, Debug)]
pub struct PaleyZygmundArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Target place: `p<prime>`.
    #[arg(long, value_name = "PLACE", value_parser = parse_place_flag)]
    pub target: Place,

    /// Approximation function: `pow:<tau>` | `powlog:<sigma>` | `table:<path>`.
    #[arg(long, value_name = "PSI", value_parser = parse_psi_flag)]
    pub psi: PsiSpec,

    /// Height N of the counter.
    #[arg(long, value_name = "N")]
    pub max_n: u64,

    /// Residue depth L: the full space Z_p / p^L is enumerated.
    #[arg(long)]
    pub depth: u32,

    /// Threshold ratios γ in [0, 1], comma separated rationals.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_rational_flag,
        default_values_t = default_gammas()
    )]
    pub gammas: Vec<Rational>,
}

#[derive(Args, Debug)]
pub struct DimensionArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Target place: `p<prime>` or `inf`.
    #[arg(long, value_name = "PLACE", value_parser = parse_place_flag)]
    pub target: Place,

    /// Approximation exponent τ ≥ 2 (rational), ψ = q^{-τ}.
    #[arg(long, value_parser = parse_rational_flag)]
    pub tau: Rational,

    /// Scale exponents l (boxes of size base^{-l}), comma separated
    /// (default: a ladder calibrated to the target and τ).
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<u32>>,
}

/// Checks that the translates {z·p1^k mod p2^l} hit every residue class
/// exactly once — the partition behind transferring a ball at one prime
/// across another.
#[derive(Args, Debug)]
pub struct TranslatePartitionArgs {
    /// Prime whose power scales the translates.
    #[arg(long)]
    pub p1: u64,

    /// Exponent of the scaling step p1^k.
    #[arg(long)]
    pub k: u32,

    /// Prime of the ambient ball Z_{p2}.
    #[arg(long)]
    pub p2: u64,

    /// Depth l: the walk covers the residue space mod p2^l.
    #[arg(long)]
    pub l: u32,
}

fn default_gammas() -> Vec<Rational> {
    ["0", "1/4", "1/2", "3/4"]
        .iter()
        .map(|s| parse_rational(s).expect("literal rationals parse"))
        .collect()
}

pub fn parse_rational_flag(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// `p<prime>:<center num>/<center den>:k<exponent>`, e.g. `p5:0/1:k1`.
pub fn parse_ball_flag(s: &str) -> Result<Ball, String> {
    let usage = || format!("`{s}` is not a ball (expected p<prime>:<num>/<den>:k<exp>)");
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(usage());
    }
    let p: u64 = parts[0]
        .strip_prefix('p')
        .ok_or_else(usage)?
        .parse()
        .map_err(|_| usage())?;
    let center = parse_rational(parts[1]).map_err(|e| e.to_string())?;
    let exp_str = parts[2].strip_prefix('k').ok_or_else(usage)?;
    let exponent: i64 = exp_str.parse().map_err(|_| usage())?;
    if exponent < 0 {
        return Err(format!(
            "radius exponent k must be >= 0 (got k{exponent}); shrinking balls only"
        ));
    }
    Ball::padic(p, center, exponent as u32).map_err(|e| e.to_string())
}

/// `<left>:<length>`, both exact rationals, e.g. `0:1/2` or `2/3:1/2`.
pub fn parse_arc_flag(s: &str) -> Result<Ball, String> {
    let usage = || format!("`{s}` is not an arc (expected <left>:<length> rationals)");
    let (left, length) = s.split_once(':').ok_or_else(usage)?;
    if length.contains(':') {
        return Err(usage());
    }
    let left = parse_rational(left).map_err(|e| e.to_string())?;
    let length = parse_rational(length).map_err(|e| e.to_string())?;
    Ball::arc(left, length).map_err(|e| e.to_string())
}

/// `p<prime>` or `inf`.
pub fn parse_place_flag(s: &str) -> Result<Place, String> {
    if s == "inf" {
        return Ok(Place::archimedean());
    }
    let p: u64 = s
        .strip_prefix('p')
        .ok_or_else(|| format!("`{s}` is not a place (expected p<prime> or inf)"))?
        .parse()
        .map_err(|_| format!("`{s}` is not a place (expected p<prime> or inf)"))?;
    Place::prime(p).map_err(|e| e.to_string())
}

/// `pow:<tau>` | `powlog:<sigma>` | `table:<path>`.
pub fn parse_psi_flag(s: &str) -> Result<PsiSpec, String> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not a psi spec (expected pow:<tau>, powlog:<sigma>, or table:<path>)"))?;
    let f = match kind {
        "pow" => {
            let tau = parse_rational(rest).map_err(|e| e.to_string())?;
            ApproxFunction::power_law(tau).map_err(|e| e.to_string())?
        }
        "powlog" => {
            let sigma = parse_rational(rest).map_err(|e| e.to_string())?;
            ApproxFunction::power_log(sigma).map_err(|e| e.to_string())?
        }
        "table" => load_psi_table(rest)?,
        other => {
            return Err(format!(
                "unknown psi kind `{other}` (expected pow, powlog, or table)"
            ))
        }
    };
    Ok(PsiSpec {
        raw: s.to_string(),
        f,
    })
}

/// Loads a two-column CSV `n,num/den` with heights contiguous from 1.
/// A single non-numeric header line is tolerated.
fn load_psi_table(path: &str) -> Result<ApproxFunction, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read psi table `{path}`: {e}"))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (n_str, val_str) = line
            .split_once(',')
            .ok_or_else(|| format!("{path}:{}: expected `n,num/den`", idx + 1))?;
        let n: u64 = match n_str.trim().parse() {
            Ok(n) => n,
            // Tolerate one header line.
            Err(_) if values.is_empty() && idx == 0 => continue,
            Err(_) => return Err(format!("{path}:{}: height `{n_str}` is not an integer", idx + 1)),
        };
        if n != values.len() as u64 + 1 {
            return Err(format!(
                "{path}:{}: heights must be contiguous from 1 (expected {}, got {n})",
                idx + 1,
                values.len() + 1
            ));
        }
        values.push(parse_rational(val_str).map_err(|e| format!("{path}:{}: {e}", idx + 1))?);
    }
    ApproxFunction::table(values).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ballapprox::exact::rat;

    #[test]
    fn ball_grammar_round_trips_through_display() {
        for text in ["p5:0:k1", "p3:1/2:k0", "p7:22/9:k4"] {
            let ball = parse_ball_flag(text).unwrap();
            assert_eq!(ball.to_string(), text);
        }
        // The num/den form normalizes to the bare-integer rendering.
        assert_eq!(parse_ball_flag("p5:0/1:k1").unwrap().to_string(), "p5:0:k1");
    }

    #[test]
    fn arc_grammar_round_trips_through_display() {
        for text in ["0:1/2", "1/3:1/4", "0:1", "5/6:1/2"] {
            let ball = parse_arc_flag(text).unwrap();
            assert_eq!(ball.to_string(), text);
        }
    }

    #[test]
    fn malformed_inputs_are_rejected_with_the_grammar() {
        assert!(parse_ball_flag("5:0:k1").unwrap_err().contains("p<prime>"));
        assert!(parse_ball_flag("p5:0:1").unwrap_err().contains("k<exp>"));
        assert!(parse_ball_flag("p5:0:k-1").unwrap_err().contains(">= 0"));
        assert!(parse_ball_flag("p4:0:k1").unwrap_err().contains("prime"));
        assert!(parse_arc_flag("0").unwrap_err().contains("<left>:<length>"));
        assert!(parse_arc_flag("0:1:2").unwrap_err().contains("<left>:<length>"));
        assert!(parse_place_flag("3").is_err());
        assert!(parse_psi_flag("pow").is_err());
        assert!(parse_psi_flag("exp:2").unwrap_err().contains("unknown psi kind"));
    }

    #[test]
    fn places_and_psi_parse() {
        assert_eq!(parse_place_flag("p3").unwrap(), Place::prime(3).unwrap());
        assert_eq!(parse_place_flag("inf").unwrap(), Place::archimedean());
        let psi = parse_psi_flag("pow:2").unwrap();
        assert_eq!(psi.f.eval_rational(10).unwrap(), rat(1, 100));
    }

    #[test]
    fn psi_tables_load_from_csv() {
        let dir = std::env::temp_dir().join(format!("psi-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        std::fs::write(&path, "n,psi\n1,1\n2,1/4\n3,1/9\n").unwrap();
        let psi = parse_psi_flag(&format!("table:{}", path.display())).unwrap();
        assert_eq!(psi.f.eval_rational(3).unwrap(), rat(1, 9));
        assert_eq!(psi.f.domain_end(), Some(3));

        std::fs::write(&path, "1,1\n3,1/9\n").unwrap();
        let err = parse_psi_flag(&format!("table:{}", path.display())).unwrap_err();
        assert!(err.contains("contiguous"), "{err}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
