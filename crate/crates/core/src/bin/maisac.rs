use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maisac::ao_pipeline::{compare_schemes, evaluate_solution, AoConfig, Scheme, Solution};
use maisac::bench::{
    beampattern, channel_gain_map, elevation_grid, run_sweep, selftest, BeampatternRequest, SweepParam, SweepSpec,
};
use maisac::channel_model::{linear_to_db, sample_realization, ScenarioConfig, ScenarioRealization};
use maisac::{Error, Result};

/// Joint beamforming and movable-antenna placement for bistatic ISAC.
///
/// Exit codes: 0 success, 1 infeasible, 2 usage or configuration error,
/// 3 numerical failure.
#[derive(Parser)]
#[command(name = "maisac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file; defaults apply to omitted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one realization and print the result.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "proposed")]
        scheme: String,
    },
    /// Sweep one scenario parameter over several seeds and schemes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// power, gamma, n_tx, n_rx or area.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated scheme names.
        #[arg(long, default_value = "proposed,receive-ma,transmit-ma,fpa")]
        scheme: String,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 30)]
        seeds: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Transmit elevation pattern of optimized beams, azimuth fixed at the target.
    Beampattern {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "transmit-ma,fpa")]
        scheme: String,
        #[arg(long, default_value_t = 721)]
        points: usize,
        #[arg(long)]
        normalize: bool,
    },
    /// Target-echo channel power over the receive region, with optimized positions.
    Gainmap {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "proposed")]
        scheme: String,
        #[arg(long, default_value_t = 61)]
        resolution: usize,
    },
    /// Quick invariant checks.
    Selftest {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: &Option<PathBuf>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::from_file(p).map_err(|e| match e {
            Error::Io(e) => Error::InvalidConfig(format!("cannot read {}: {e}", p.display())),
            e => e,
        }),
        None => Ok(ScenarioConfig::default()),
    }
}

fn schemes(list: &str) -> Result<Vec<Scheme>> {
    let v = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<Vec<Scheme>>>()?;
    if v.is_empty() {
        return Err(Error::InvalidConfig("no scheme given".into()));
    }
    Ok(v)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(common: &Common, list: &[Scheme]) -> Result<(ScenarioConfig, ScenarioRealization, Vec<Solution>)> {
    let cfg = load(&common.config)?;
    let real = sample_realization(&cfg, common.seed)?;
    let sols = compare_schemes(&real, &cfg, &AoConfig::default(), list)?;
    Ok((cfg, real, sols))
}

fn cmd_run(common: Common, scheme: &str) -> Result<()> {
    let scheme: Scheme = scheme.parse()?;
    let (cfg, real, sols) = solve(&common, &[scheme])?;
    let sol = &sols[0];
    let ev = evaluate_solution(sol, &real, &cfg)?;
    let mut s = String::new();
    writeln!(s, "scheme {} seed {}", sol.scheme, common.seed).unwrap();
    writeln!(s, "sensing SINR {:.4} dB", linear_to_db(sol.sensing_sinr)).unwrap();
    for (k, c) in sol.comm_sinrs.iter().enumerate() {
        writeln!(s, "user {k} SINR {:.4} dB", linear_to_db(*c)).unwrap();
    }
    writeln!(s, "iterations {} converged {}", sol.iterations, sol.converged).unwrap();
    writeln!(s, "power {:.6e} W, violations {}", ev.total_power, ev.violations.len()).unwrap();
    for (side, pts) in [("tx", &sol.layout.tx), ("rx", &sol.layout.rx)] {
        for (i, p) in pts.iter().enumerate() {
            writeln!(s, "{side}{i} {:.6} {:.6}", p.x, p.y).unwrap();
        }
    }
    print!("{s}");
    if common.out.is_some() {
        emit(&common.out, &sol.trace_to_text())?;
    }
    Ok(())
}

fn cmd_sweep(common: Common, param: &str, values: Vec<f64>, scheme: &str, seeds: u64, workers: Option<usize>) -> Result<()> {
    let spec = SweepSpec {
        param: param.parse::<SweepParam>()?,
        values,
        seeds: (common.seed..common.seed + seeds).collect(),
        schemes: schemes(scheme)?,
        out: common.out.clone(),
        workers,
    };
    let table = run_sweep(&spec, &load(&common.config)?, &AoConfig::default())?;
    if common.out.is_none() {
        print!("{}", table.rows_csv(true)?);
    }
    eprint!("{}", table.summary_csv(false)?);
    Ok(())
}

fn cmd_beampattern(common: Common, scheme: &str, points: usize, normalize: bool) -> Result<()> {
    let list = schemes(scheme)?;
    let (cfg, real, sols) = solve(&common, &list)?;
    let target = &real.target.tx_paths;
    let (el0, az0) = (target.elevations[0], target.azimuths[0]);
    let grid = elevation_grid(points);
    let mut s = format!("# target elevation {el0:.9} azimuth {az0:.9}\n");
    for sol in &sols {
        let at_target = beampattern(&BeampatternRequest {
            elevations: vec![el0],
            azimuth: az0,
            positions: sol.layout.tx.clone(),
            beams: sol.beams.tx.clone(),
            wavelength: cfg.wavelength,
            normalize: false,
        })?;
        writeln!(s, "# {} target gain {:.9e}", sol.scheme, at_target[0].gain).unwrap();
    }
    s.push_str("scheme,elevation,gain\n");
    for sol in &sols {
        let pat = beampattern(&BeampatternRequest {
            elevations: grid.clone(),
            azimuth: az0,
            positions: sol.layout.tx.clone(),
            beams: sol.beams.tx.clone(),
            wavelength: cfg.wavelength,
            normalize,
        })?;
        for p in pat {
            writeln!(s, "{},{:.9},{:.9e}", sol.scheme, p.elevation, p.gain).unwrap();
        }
    }
    emit(&common.out, &s)
}

fn cmd_gainmap(common: Common, scheme: &str, resolution: usize) -> Result<()> {
    let scheme: Scheme = scheme.parse()?;
    let (cfg, real, sols) = solve(&common, &[scheme])?;
    let map = channel_gain_map(resolution, &real.target.rx_paths, cfg.wavelength, &cfg.rx_region())?;
    let median = map.median();
    let mut s = format!("# median gain {median:.9e}\n");
    for (m, p) in sols[0].layout.rx.iter().enumerate() {
        let g = map.nearest(p);
        writeln!(s, "# rx{m} {:.6} {:.6} gain {g:.9e} top-half {}", p.x, p.y, g >= median).unwrap();
    }
    s.push_str("x,y,gain\n");
    for (iy, y) in map.ys.iter().enumerate() {
        for (ix, x) in map.xs.iter().enumerate() {
            writeln!(s, "{x:.6},{y:.6},{:.9e}", map.at(ix, iy)).unwrap();
        }
    }
    emit(&common.out, &s)
}

fn cmd_selftest(config: &Option<PathBuf>) -> Result<bool> {
    let checks = selftest(&load(config)?)?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { common, scheme } => cmd_run(common, &scheme).map(|_| true),
        Command::Sweep { common, param, values, scheme, seeds, workers } => {
            cmd_sweep(common, &param, values, &scheme, seeds, workers).map(|_| true)
        }
        Command::Beampattern { common, scheme, points, normalize } => {
            cmd_beampattern(common, &scheme, points, normalize).map(|_| true)
        }
        Command::Gainmap { common, scheme, resolution } => cmd_gainmap(common, &scheme, resolution).map(|_| true),
        Command::Selftest { config } => cmd_selftest(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 2 {
                eprintln!("run `maisac --help` for usage");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

