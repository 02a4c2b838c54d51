use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vlasov_dg::driver::{parse_config, run_with, RunHooks};
use vlasov_dg::verify::{
    conservation_from_records, conservation_identities, exact_solution_table, time_reversal_table, weibel_report,
    ConvergenceTable,
};
use vlasov_dg::{BasisFamily, CellCoefficients, Discretization, Domain1P2V, FluxKind, PhaseMesh, Scenario, SolutionState};

#[derive(Parser)]
#[command(name = "vlasov-dg", version, about = "DG solver for the 1D2V Vlasov-Maxwell system")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a `key = value` config file.
    Run {
        config: PathBuf,
        /// Print every diagnostics row to stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Run a verification suite: identities, time-reversal, central, exact, conservation, weibel.
    Verify(VerifyArgs),
    /// Convergence table for a scenario.
    Converge {
        scenario: String,
        #[command(flatten)]
        study: StudyArgs,
    },
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    #[command(flatten)]
    study: StudyArgs,
    /// Mesh size for conservation and weibel suites.
    #[arg(long, default_value_t = 40)]
    mesh: usize,
}

#[derive(Args, Clone)]
struct StudyArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    degrees: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "20,40")]
    meshes: Vec<usize>,
    #[arg(long, default_value = "upwind")]
    flux: String,
    /// Final time (time-reversal tables run to T and back to 2T).
    #[arg(long)]
    t_end: Option<f64>,
    /// Write a CSV copy of the table or report here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn flux(name: &str) -> Result<FluxKind> {
    Ok(FluxKind::parse(name)?)
}

fn emit_table(table: &ConvergenceTable, csv: &Option<PathBuf>) -> Result<()> {
    print!("{}", table.to_text());
    if let Some(path) = csv {
        std::fs::write(path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn converge(scenario: &str, study: &StudyArgs) -> Result<()> {
    let kind = flux(&study.flux)?;
    let table = match Scenario::preset(scenario)? {
        Scenario::Weibel(_) if scenario == "weibel-choice1" => {
            time_reversal_table(&study.degrees, &study.meshes, kind, study.t_end.unwrap_or(5.0))?
        }
        Scenario::Weibel(_) => bail!("time-reversal tables use weibel-choice1"),
        Scenario::VacuumMaxwell(_) => exact_solution_table(scenario, &study.degrees, &study.meshes, kind, study.t_end.unwrap_or(1.0), Some(2))?,
        Scenario::FreeStream(_) => exact_solution_table(scenario, &study.degrees, &study.meshes, kind, study.t_end.unwrap_or(1.0), None)?,
    };
    emit_table(&table, &study.csv)
}

fn identities() -> Result<()> {
    let mesh = PhaseMesh::new(Domain1P2V::new(0.0, 2.0, 1.2, 1.2)?, 4, 4, 4)?;
    let disc = Discretization::new(mesh, 2, BasisFamily::PType)?;
    // deterministic pseudo-random state
    let mut seed = 0x2545f4914f6cdd1du64;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut f = CellCoefficients::zeros(disc.mesh.n_cells(), disc.n_modes());
    f.data.iter_mut().for_each(|v| *v = next());
    let mut fields = vlasov_dg::FieldState::zeros(disc.mesh.n_x, disc.n_field_modes());
    for c in fields.components_mut() {
        c.data.iter_mut().for_each(|v| *v = next());
    }
    let state = SolutionState { f, fields, t: 0.0 };
    println!("{:>18} {:>24} {:>24} {:>24}", "flux", "<R,1> + Theta1", "<R,f> + D/2", "energy + Theta2 + Theta3");
    for kind in FluxKind::ALL {
        let c = conservation_identities(&disc, &state, kind)?;
        println!(
            "{:>18} {:>24.3e} {:>24.3e} {:>24.3e}",
            kind.name(),
            c.mass.0 - c.mass.1,
            c.l2.0 - c.l2.1,
            c.energy.0 - c.energy.1
        );
    }
    Ok(())
}

fn weibel_config(mesh: usize, t_end: f64, kind: FluxKind, threads: usize) -> Result<vlasov_dg::RunConfig> {
    let cfl = if kind.is_dissipative() || kind == FluxKind::Central { 0.19 } else { 0.12 };
    let mut cfg = parse_config(&format!("scenario = weibel-choice1\nmesh = {mesh}\nt_end = {t_end}\ncfl = {cfl}\ndiagnostics_every = 5"))?;
    cfg.flux = kind;
    cfg.threads = threads;
    Ok(cfg)
}

fn verify(args: &VerifyArgs, threads: usize) -> Result<()> {
    let study = &args.study;
    match args.suite.as_str() {
        "identities" => identities(),
        "time-reversal" => converge("weibel-choice1", study),
        "central" => {
            for name in ["central", "alternating"] {
                let t = time_reversal_table(&[1], &study.meshes, flux(name)?, study.t_end.unwrap_or(5.0))?;
                print!("{}", t.to_text());
            }
            Ok(())
        }
        "exact" => {
            for scenario in ["free-stream", "vacuum-maxwell"] {
                converge(scenario, &StudyArgs { csv: None, ..study.clone() })?;
            }
            Ok(())
        }
        "conservation" => {
            let t_end = study.t_end.unwrap_or(50.0);
            println!("{:>18} {:>12} {:>12} {:>12} {:>12} {:>14}", "flux", "mass", "energy", "P1", "P2", "int Theta2");
            for name in ["upwind", "central", "alternating"] {
                let kind = flux(name)?;
                let cfg = weibel_config(args.mesh, t_end, kind, threads)?;
                let summary = run_with(&cfg, RunHooks { in_memory: true, ..Default::default() })?;
                let r = conservation_from_records(kind, &summary.records)?;
                println!(
                    "{:>18} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e} {:>14.3e}",
                    name, r.mass_drift, r.energy_drift, r.p1_drift, r.p2_drift, r.theta2_integral
                );
            }
            Ok(())
        }
        "weibel" => {
            let kind = flux(&study.flux)?;
            let cfg = weibel_config(args.mesh, study.t_end.unwrap_or(100.0), kind, threads)?;
            let summary = run_with(&cfg, RunHooks { in_memory: true, ..Default::default() })?;
            let r = weibel_report(&summary.records)?;
            println!("{r:#?}");
            println!("E2 / B3 mode rate ratio: {:.3}", r.e2_mode_rate / r.b3_mode_rate);
            Ok(())
        }
        other => bail!("unknown suite '{other}' (identities, time-reversal, central, exact, conservation, weibel)"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<()> {
        if cli.threads > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().ok();
        }
        match &cli.command {
            Command::Run { config, verbose } => {
                let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
                let mut cfg = parse_config(&text).with_context(|| format!("in {}", config.display()))?;
                if cli.threads > 0 {
                    cfg.threads = cli.threads;
                }
                let mut progress = |r: &vlasov_dg::DiagnosticsRecord| {
                    if *verbose {
                        eprintln!("t = {:>10.4}  mass = {:.12e}  Etot = {:.12e}  Em = {:.6e}", r.t, r.mass, r.total_energy, r.magnetic);
                    }
                };
                let summary = run_with(&cfg, RunHooks { on_record: Some(&mut progress), in_memory: false })?;
                println!("{} steps to t = {}; output in {}", summary.steps, summary.final_state.t, summary.output_dir.display());
                Ok(())
            }
            Command::Verify(args) => verify(args, cli.threads),
            Command::Converge { scenario, study } => converge(scenario, study),
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
