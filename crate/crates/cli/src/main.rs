//! Command-line driver: parse, atomize, simulate, verify.
//!
//! Exit codes: 0 pass, 1 fail, 2 antecedent failure, 3 unknown / solver
//! trouble, 4 usage or input errors.

mod report;
mod stimulus;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::time::{Duration, Instant};
use wste::atomize::{atomize_design, largest_atom};
use wste::expr::ExprPool;
use wste::ir::{elaborate, parse};
use wste::oracle::replay_fail;
use wste::solver::SolverConfig;
use wste::ste::{
    check, check_div_zero, emit_query, parse_spec, run_bmc, run_ste, AntFailPolicy, Query,
    VerifResult,
};
use wste::symsim::{ShiftMode, SimConfig};

#[derive(Parser)]
#[command(name = "wste", about = "Word-level symbolic trajectory evaluation", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify a property file against a design (STE or BMC mode).
    Verify(VerifyArgs),
    /// Print the atomization of every word of a design.
    Atomize {
        /// Design file (WDL).
        #[arg(long)]
        design: PathBuf,
        /// Optional property file whose atom references refine the cuts.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Simulate a design against a stimulus file and dump the trace.
    Simulate {
        #[arg(long)]
        design: PathBuf,
        /// Stimulus: one frame per line of name=value pairs; `X` marks an
        /// unknown word (routed through the exact ternary oracle).
        #[arg(long)]
        stimulus: PathBuf,
        #[arg(long)]
        frames: u32,
        /// Total X-bit budget for the exact oracle.
        #[arg(long, default_value_t = wste::oracle::X_BUDGET_DEFAULT)]
        x_budget: u32,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    /// Verification mode.
    #[arg(long, value_enum, default_value_t = Mode::Ste)]
    mode: Mode,
    /// Frame count override (defaults to the latest tuple end).
    #[arg(long)]
    frames: Option<u32>,
    /// Antecedent-failure policy.
    #[arg(long, value_enum, default_value_t = Policy::Report)]
    antfail: Policy,
    /// Variable-shift invalid-bit mode.
    #[arg(long, value_enum, default_value_t = Shift::StrictSound)]
    shift_mode: Shift,
    /// Solver command template; `{}` becomes the script path. Defaults to
    /// the WSTE_SOLVER environment variable.
    #[arg(long)]
    solver: Option<String>,
    /// Solver timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// Write the consequent query script here instead of solving.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
    /// Also ask whether any divisor can be zero.
    #[arg(long)]
    check_div_zero: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ste,
    Bmc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Report,
    Assume,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shift {
    StrictSound,
    PaperFaithful,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            4
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Atomize { design, spec } => cmd_atomize(&design, spec.as_deref()),
        Cmd::Simulate { design, stimulus, frames, x_budget } => {
            cmd_simulate(&design, &stimulus, frames, x_budget)
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let mut timings: Vec<(&'static str, Duration)> = Vec::new();
    let design_src = std::fs::read_to_string(&args.design)
        .with_context(|| format!("reading {}", args.design.display()))?;
    let spec_src = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;

    let t0 = Instant::now();
    let design = parse(&design_src).map_err(|e| anyhow!("{}: {e}", args.design.display()))?;
    let el = elaborate(&design).map_err(|e| anyhow!("{}: {e}", args.design.display()))?;
    let mut pool = ExprPool::new();
    let mut spec = parse_spec(&spec_src, &el, &mut pool)
        .map_err(|e| anyhow!("{}: {e}", args.spec.display()))?;
    spec.mode = match args.antfail {
        Policy::Report => AntFailPolicy::Report,
        Policy::Assume => AntFailPolicy::Assume,
    };
    timings.push(("parse", t0.elapsed()));

    let t0 = Instant::now();
    let atoms = atomize_design(&el, &spec.accesses())?;
    timings.push(("atomize", t0.elapsed()));

    let sim_cfg = SimConfig {
        shift_mode: match args.shift_mode {
            Shift::StrictSound => ShiftMode::StrictSound,
            Shift::PaperFaithful => ShiftMode::PaperFaithful,
        },
    };
    let t0 = Instant::now();
    let (ob, _trace) = match args.mode {
        Mode::Ste => run_ste(&mut pool, &el, &atoms, &spec, args.frames, sim_cfg)?,
        Mode::Bmc => run_bmc(&mut pool, &el, &atoms, &spec, args.frames, sim_cfg)?,
    };
    timings.push(("simulate", t0.elapsed()));

    let t0 = Instant::now();
    let script = emit_query(&mut pool, &ob, Query::NegOk);
    timings.push(("emit", t0.elapsed()));

    if let Some(path) = &args.dump_smt {
        std::fs::write(path, &script.text)
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote consequent query to {}", path.display());
        report::print_timings(&timings);
        return Ok(0);
    }
    drop(script);

    let scfg =
        match SolverConfig::resolve(args.solver.as_deref(), Duration::from_secs(args.timeout)) {
            Ok(c) => c,
            Err(e) => {
                report::print_no_solver(&e, args.format == Format::Json);
                return Ok(3);
            }
        };
    let t0 = Instant::now();
    let rpt = check(&mut pool, &ob, &scfg);
    timings.push(("solve", t0.elapsed()));

    // confirm failures on the concrete simulator
    let replay = match &rpt.verdict {
        VerifResult::Fail { assignment, violated } => {
            Some(replay_fail(&pool, &el, &atoms, &spec, &ob, assignment, violated))
        }
        _ => None,
    };
    let divzero = if args.check_div_zero {
        check_div_zero(&mut pool, &ob, &scfg).map(|r| r.map_err(|e| e.to_string()))
    } else {
        None
    };

    let code = match &rpt.verdict {
        VerifResult::Pass { .. } => 0,
        VerifResult::Fail { .. } => 1,
        VerifResult::AntecedentFailure { .. } => 2,
        VerifResult::Unknown { .. } => 3,
    };
    match args.format {
        Format::Human => {
            report::print_human(&pool, &ob, &rpt, replay.as_ref(), divzero.as_ref(), &timings)
        }
        Format::Json => {
            report::print_json(&pool, &ob, &rpt, replay.as_ref(), divzero.as_ref(), &timings)
        }
    }
    Ok(code)
}

fn cmd_atomize(design_path: &std::path::Path, spec_path: Option<&std::path::Path>) -> Result<i32> {
    let src = std::fs::read_to_string(design_path)
        .with_context(|| format!("reading {}", design_path.display()))?;
    let design = parse(&src).map_err(|e| anyhow!("{}: {e}", design_path.display()))?;
    let el = elaborate(&design).map_err(|e| anyhow!("{}: {e}", design_path.display()))?;
    let extra = match spec_path {
        None => Vec::new(),
        Some(p) => {
            let spec_src =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let mut pool = ExprPool::new();
            let spec = parse_spec(&spec_src, &el, &mut pool)
                .map_err(|e| anyhow!("{}: {e}", p.display()))?;
            spec.accesses()
        }
    };
    let atoms = atomize_design(&el, &extra)?;
    for (word, a) in &atoms {
        let list: Vec<String> = a.atoms().iter().map(|(hi, lo)| format!("[{hi}:{lo}]")).collect();
        println!("{word}\t{}\t{}", a.width(), list.join(" "));
    }
    println!("largest atom width: {}", largest_atom(&atoms));
    Ok(0)
}

fn cmd_simulate(
    design_path: &std::path::Path,
    stim_path: &std::path::Path,
    frames: u32,
    x_budget: u32,
) -> Result<i32> {
    let src = std::fs::read_to_string(design_path)
        .with_context(|| format!("reading {}", design_path.display()))?;
    let design = parse(&src).map_err(|e| anyhow!("{}: {e}", design_path.display()))?;
    let el = elaborate(&design).map_err(|e| anyhow!("{}: {e}", design_path.display()))?;
    let stim_src = std::fs::read_to_string(stim_path)
        .with_context(|| format!("reading {}", stim_path.display()))?;
    let stim = stimulus::parse_stimulus(&stim_src, &el)?;
    if stim.len() < frames as usize {
        return Err(anyhow!("stimulus has {} frame(s), {} requested", stim.len(), frames));
    }
    let has_x = stim.iter().any(|f| f.values().any(Option::is_none))
        || el.words.values().any(|w| w.kind == wste::ir::WordKind::Reg && w.init.is_none())
        || el.arrays.values().any(|a| !a.initialized);
    let names: Vec<&String> = el.words.keys().collect();
    let header: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    println!("frame\t{}", header.join("\t"));
    if has_x {
        let trace = wste::oracle::simulate_ternary(&el, &stim, frames, Some(x_budget))
            .map_err(|e| anyhow!("{e}"))?;
        for (t, fr) in trace.iter().enumerate() {
            let row: Vec<String> = names.iter().map(|n| fr[n.as_str()].display()).collect();
            println!("{t}\t{}", row.join("\t"));
        }
    } else {
        let trace = wste::oracle::simulate_concrete(&el, &stim, frames, &Default::default());
        for (t, fr) in trace.iter().enumerate() {
            let row: Vec<String> =
                names.iter().map(|n| format!("{:#x}", fr[n.as_str()])).collect();
            println!("{t}\t{}", row.join("\t"));
        }
    }
    Ok(0)
}
