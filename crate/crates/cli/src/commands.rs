//! The command implementations.  Each one follows the same artifact
//! protocol: `config.json` first, then `data.csv` (and any extra tables),
//! then `report.json`, then `manifest.json` last via [`RunDir::finish`].
//!
//! Exact quantities are always rendered as `num/den` strings (bare integers
//! when the denominator is 1); the only floats printed are genuinely
//! float-valued statistics (fitted slopes, R², c₁).

use std::fmt::Write as _;
use std::path::Path;

use ballapprox::approx::{m1_via_integral, moment_report, required_precision};
use ballapprox::exact::{format_rational, rational_to_f64};
use ballapprox::experiments::{
    check_translate_partition, run_dichotomy, run_paley_zygmund, TrialConfig,
};
use ballapprox::farey::{fractions_at_level, totient_table, SourceSpec};
use ballapprox::hausdorff::{box_count, BoxCountConfig};
use ballapprox::padic::Place;
use ballapprox::{Error, Rational};
use serde_json::json;

use crate::args::{
    DichotomyArgs, DimensionArgs, EnumerateArgs, MomentsArgs, PaleyZygmundArgs,
    TranslatePartitionArgs,
};
use crate::outdir::RunDir;

/// Library failures keep their exit class; I/O failures are their own kind.
#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    /// 2 usage, 3 budget, 4 precision, 5 identity failure, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        use ballapprox::error::ExitClass;
        match self {
            CliError::Lib(e) => match e.exit_class() {
                ExitClass::Usage => 2,
                ExitClass::Budget => 3,
                ExitClass::Precision => 4,
                ExitClass::Identity => 5,
            },
            CliError::Io(_) => 1,
        }
    }
}

pub fn enumerate(args: &EnumerateArgs, out: Option<&Path>) -> Result<(), CliError> {
    let spec = SourceSpec::new(args.source.ball(), args.target)?;
    let config = json!({
        "command": "enumerate",
        "source": spec.ball().to_string(),
        "target": args.target.to_string(),
        "max_n": args.max_n,
    });
    let mut run = RunDir::create(out, "enumerate")?;
    run.write_json("config.json", &config)?;

    let table = totient_table(&spec, args.max_n)?;
    let mut data = Vec::new();
    table.write_csv(&mut data)?;
    run.write_file("data.csv", &data)?;

    let mut fractions = String::from("n,a\n");
    let mut rows: u64 = 0;
    for n in 1..=args.max_n {
        for x in fractions_at_level(&spec, n)? {
            writeln!(fractions, "{},{}", x.denom(), x.numer()).expect("string writes");
            rows += 1;
        }
    }
    run.write_file("fractions.csv", fractions.as_bytes())?;

    let report = json!({
        "n_max": args.max_n,
        "fraction_rows": rows,
        "restricted_sum": table.restricted_sum().to_string(),
        "min_quadratic_ratio": format_rational(&table.min_quadratic_ratio()),
    });
    run.write_json("report.json", &report)?;
    println!(
        "N = {}: {} ball-restricted fractions; primed totient sum {}",
        args.max_n,
        rows,
        table.restricted_sum()
    );
    let dir = run.finish("enumerate", &config, None)?;
    eprintln!("run directory: {}", dir.display());
    Ok(())
}

pub fn moments(args: &MomentsArgs, out: Option<&Path>) -> Result<(), CliError> {
    let spec = SourceSpec::new(args.source.ball(), args.target)?;
    let config = json!({
        "command": "moments",
        "source": spec.ball().to_string(),
        "target": args.target.to_string(),
        "psi": args.psi.raw,
        "max_n": args.max_n,
    });
    let report = moment_report(&spec, &args.psi.f, args.max_n)?;

    // Built-in self-test: the sieve and the enumeration must agree exactly.
    let via_integral = m1_via_integral(&spec, &args.psi.f, args.max_n)?;
    if via_integral != report.m1 {
        return Err(Error::IdentityFailure(format!(
            "first-moment identity failed at N = {}: sieve {} vs enumeration {}",
            args.max_n,
            format_rational(&report.m1),
            format_rational(&via_integral)
        ))
        .into());
    }

    let mut run = RunDir::create(out, "moments")?;
    run.write_json("config.json", &config)?;
    let csv = format!(
        "N,Psi,M1,M2sq,c1\n{},{},{},{},{}\n",
        report.n_max,
        format_rational(&report.psi_sum),
        format_rational(&report.m1),
        format_rational(&report.m2sq),
        report.c1
    );
    run.write_file("data.csv", csv.as_bytes())?;
    let mut report_json = report.to_json();
    report_json["identity_check"] = json!("m1 sieve = m1 enumeration");
    run.write_json("report.json", &report_json)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report_json).expect("JSON trees serialize")
    );
    let dir = run.finish("moments", &config, None)?;
    eprintln!("run directory: {}", dir.display());
    Ok(())
}

pub fn dichotomy(args: &DichotomyArgs, out: Option<&Path>) -> Result<(), CliError> {
    let spec = SourceSpec::new(args.source.ball(), args.target)?;
    let p2 = spec.target_prime().ok_or(Error::ExpectedPrime)?;
    let grid_max = *args
        .grid
        .last()
        .ok_or_else(|| Error::OutOfRange("the height grid is empty".into()))?;
    let precision = match args.precision {
        Some(p) => p,
        None => required_precision(&args.psi.f, grid_max, p2)?,
    };
    let config = json!({
        "command": "experiment dichotomy",
        "source": spec.ball().to_string(),
        "target": args.target.to_string(),
        "psi": args.psi.raw,
        "samples": args.samples,
        "seed": args.seed,
        "grid": args.grid,
        "precision": precision,
    });
    let trial = TrialConfig {
        spec,
        psi: args.psi.f.clone(),
        sample_count: args.samples,
        n_grid: args.grid.clone(),
        seed: args.seed,
        precision,
    };
    let report = run_dichotomy(&trial)?;

    let mut run = RunDir::create(out, "dichotomy")?;
    run.write_json("config.json", &config)?;
    let mut data = Vec::new();
    report.write_csv(&mut data)?;
    run.write_file("data.csv", &data)?;
    run.write_json("report.json", &report.to_json())?;
    println!(
        "verdict: {} (fitted c = {:.6}, {} targets, {})",
        report.verdict.as_str(),
        report.fitted_c,
        report.samples_used,
        if report.exhaustive {
            "exhaustive"
        } else {
            "sampled"
        }
    );
    let dir = run.finish("experiment dichotomy", &config, Some(args.seed))?;
    eprintln!("run directory: {}", dir.display());
    Ok(())
}

pub fn paley_zygmund(args: &PaleyZygmundArgs, out: Option<&Path>) -> Result<(), CliError> {
    let spec = SourceSpec::new(args.source.ball(), args.target)?;
    let config = json!({
        "command": "experiment paley-zygmund",
        "source": spec.ball().to_string(),
        "target": args.target.to_string(),
        "psi": args.psi.raw,
        "max_n": args.max_n,
        "depth": args.depth,
        "gammas": args.gammas.iter().map(format_rational).collect::<Vec<_>>(),
    });
    let report = run_paley_zygmund(&spec, &args.psi.f, args.max_n, args.depth, &args.gammas)?;

    let mut run = RunDir::create(out, "paley-zygmund")?;
    run.write_json("config.json", &config)?;
    let mut data = Vec::new();
    report.write_csv(&mut data)?;
    run.write_file("data.csv", &data)?;
    run.write_json("report.json", &report.to_json())?;
    println!(
        "all {} thresholds hold exactly (M1 = {}, M2sq = {}, c1 = {:.6})",
        report.rows.len(),
        format_rational(&report.m1),
        format_rational(&report.m2sq),
        report.c1
    );
    let dir = run.finish("experiment paley-zygmund", &config, None)?;
    eprintln!("run directory: {}", dir.display());
    Ok(())
}

/// Scale ladders calibrated so the per-scale height windows stay informative:
/// deep enough that heights past 1 enter the window, shallow enough that the
/// box budget holds.
fn default_exponents(target: &Place, tau: &Rational) -> Vec<u32> {
    match target {
        Place::Prime(_) => (8..=12).collect(),
        Place::Archimedean => {
            let t = rational_to_f64(tau);
            if t < 2.25 {
                (8..=12).collect()
            } else if t < 2.75 {
                (12..=20).collect()
            } else if t < 3.5 {
                (10..=16).collect()
            } else {
                (12..=20).collect()
            }
        }
    }
}

pub fn dimension(args: &DimensionArgs, out: Option<&Path>) -> Result<(), CliError> {
    let spec = SourceSpec::new(args.source.ball(), args.target)?;
    let exponents = args
        .scales
        .clone()
        .unwrap_or_else(|| default_exponents(&args.target, &args.tau));
    let config = json!({
        "command": "experiment dimension",
        "source": spec.ball().to_string(),
        "target": args.target.to_string(),
        "tau": format_rational(&args.tau),
        "scales": exponents,
    });
    let report = box_count(&args.tau, &spec, &exponents, &BoxCountConfig::default())?;

    let mut run = RunDir::create(out, "dimension")?;
    run.write_json("config.json", &config)?;
    let mut data = Vec::new();
    report.write_csv(&mut data)?;
    run.write_file("data.csv", &data)?;
    let report_json = json!({
        "fit": report.fit_json(),
        "rows": report.rows.iter().map(|r| json!({
            "exponent": r.exponent,
            "scale": r.scale,
            "count": r.count,
            "ambient": r.ambient,
            "h_low": r.h_low,
            "h_high": r.h_high,
            "used_in_fit": r.used_in_fit,
        })).collect::<Vec<_>>(),
    });
    run.write_json("report.json", &report_json)?;
    println!(
        "dimension fit: slope {:.4} vs target {:.4} (R^2 {:.4}, {} of {} scales used)",
        report.slope,
        report.target_dim,
        report.r_squared,
        report.rows.iter().filter(|r| r.used_in_fit).count(),
        report.rows.len()
    );
    let dir = run.finish("experiment dimension", &config, None)?;
    eprintln!("run directory: {}", dir.display());
    Ok(())
}

pub fn translate_partition(
    args: &TranslatePartitionArgs,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let config = json!({
        "command": "experiment translate-partition",
        "p1": args.p1,
        "k": args.k,
        "p2": args.p2,
        "l": args.l,
    });
    let partition = check_translate_partition(args.p1, args.k, args.p2, args.l)?;

    let mut run = RunDir::create(out, "translate-partition")?;
    run.write_json("config.json", &config)?;
    let csv = format!(
        "p1,k,p2,l,partition\n{},{},{},{},{partition}\n",
        args.p1, args.k, args.p2, args.l
    );
    run.write_file("data.csv", csv.as_bytes())?;
    let mut report = config.clone();
    report["partition"] = json!(partition);
    run.write_json("report.json", &report)?;
    println!("partition: {partition}");
    let dir = run.finish("experiment translate-partition", &config, None)?;
    eprintln!("run directory: {}", dir.display());
    if partition {
        Ok(())
    } else {
        // The partition is a theorem for distinct primes; a false answer
        // means the arithmetic is broken, not the configuration.
        Err(Error::IdentityFailure(format!(
            "translates of {}^{} failed to partition the residues mod {}^{}",
            args.p1, args.k, args.p2, args.l
        ))
        .into())
    }
}
