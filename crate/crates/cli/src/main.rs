use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use linspec::report::{self, dual_eigen, profile_for, render_verdict, GroundStateSummary};
use linspec::resonance::resonance_verdict;
use linspec::spectral::gap_check;
use linspec::{Error, OperatorSpec, RunConfig};

#[derive(Parser)]
#[command(name = "linspec", version, about = "Spectral verification of the linearized operators at the cubic ground state")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Default)]
struct Overrides {
    /// Single mixing parameter (replaces the grid).
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Comma-separated mixing parameters.
    #[arg(long = "beta-grid", global = true)]
    beta_grid: Option<String>,
    #[arg(long, global = true)]
    rmax: Option<String>,
    /// Integrator tolerance.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Flat key = value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve (or load) the ground state and print its summary.
    GroundState,
    /// Bottom eigenvalue and gap counts for each mixing parameter.
    Spectrum,
    /// Threshold verdict for each mixing parameter.
    Resonance,
    /// Run every check and write the report.
    VerifyAll,
    /// Print the verdict of an existing report.
    Report,
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_)
        | Error::BracketNotFound { .. }
        | Error::NonDecaying { .. }
        | Error::GridMismatch { .. } => EXIT_NUMERIC,
        Error::Domain(_) | Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
    }
}

fn build_config(o: &Overrides) -> linspec::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &o.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    if let Some(v) = &o.beta_grid {
        cfg.set("beta_grid", v)?;
    }
    if let Some(v) = &o.beta {
        cfg.set("beta", v)?;
    }
    if let Some(v) = &o.rmax {
        cfg.set("rmax", v)?;
    }
    if let Some(v) = &o.tol {
        cfg.set("tol", v)?;
    }
    if let Some(v) = &o.out {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = &o.workers {
        cfg.set("workers", v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn verdict(pass: bool) -> u8 {
    if pass {
        0
    } else {
        EXIT_FAIL
    }
}

fn ground_state(cfg: &RunConfig) -> linspec::Result<u8> {
    let profile = profile_for(cfg)?;
    let s = GroundStateSummary::of(&profile);
    println!("center value   {:.16e}", s.center_value);
    println!("decay rate     {:.16e}", s.decay_rate);
    println!("tail amplitude {:.16e}", s.tail_amplitude);
    println!("residual       {:.3e}", s.residual_sup);
    println!("node count     {}", s.node_count);
    println!("cache          {}", cfg.cache_path().display());
    println!("{}", if s.pass { "PASS" } else { "FAIL" });
    Ok(verdict(s.pass))
}

fn spectrum(cfg: &RunConfig) -> linspec::Result<u8> {
    let profile = Arc::new(profile_for(cfg)?);
    let mut all = true;
    println!("beta,lambda_beta,shooting,err,node_count,gap_certified");
    for &beta in &cfg.beta_grid {
        let op = OperatorSpec::from_beta(beta, 0, Arc::clone(&profile))?;
        let e = dual_eigen(&op, cfg)?;
        let mut gap = true;
        for &ell in &cfg.sectors {
            let g = gap_check(&op.with_ell(ell), cfg.tol)?;
            gap &= g.below_high == g.below_low && (beta == 0.0 || g.zero_crossings == 0);
        }
        let ok = e.agree && e.single_signed && e.extrapolated < 0.0 && gap;
        all &= ok;
        println!(
            "{},{:.16e},{},{:.3e},{},{}",
            beta,
            e.extrapolated,
            e.shooting.map_or_else(String::new, |s| format!("{s:.16e}")),
            e.error(),
            e.node_count,
            gap
        );
    }
    Ok(verdict(all))
}

fn resonance(cfg: &RunConfig) -> linspec::Result<u8> {
    let profile = profile_for(cfg)?;
    let mut all = true;
    println!("beta,coupling,tail_slope,fit_residual,verdict");
    for &beta in &cfg.beta_grid {
        let c = linspec::coupling_coefficient(beta)?;
        let r = resonance_verdict(&profile, c, cfg.tol, cfg.slope_threshold)?;
        all &= r.classification == linspec::resonance::Classification::NoResonance;
        println!("{},{:.16e},{:.16e},{:.3e},{:?}", beta, c, r.tail_slope, r.fit_residual, r.classification);
    }
    Ok(verdict(all))
}

fn verify_all(cfg: &RunConfig) -> linspec::Result<u8> {
    let rep = report::run_pipeline(cfg)?;
    print!("{}", render_verdict(&rep));
    println!("wrote {}", cfg.out_dir.display());
    Ok(verdict(rep.pass))
}

fn show_report(cfg: &RunConfig) -> linspec::Result<u8> {
    let path = cfg.out_dir.join(report::JSON_FILE);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let rep = report::from_json(&text)?;
    print!("{}", render_verdict(&rep));
    Ok(verdict(rep.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli.overrides).and_then(|cfg| match cli.command {
        Command::GroundState => ground_state(&cfg),
        Command::Spectrum => spectrum(&cfg),
        Command::Resonance => resonance(&cfg),
        Command::VerifyAll => verify_all(&cfg),
        Command::Report => show_report(&cfg),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("linspec: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
