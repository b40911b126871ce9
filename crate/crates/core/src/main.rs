//! Command-line front end: scenario parsing, subcommand dispatch, and
//! output emission.
//!
//! Exit codes: 0 on success, 1 on any validation or I/O error, 2 when a
//! requirement check fails under `--strict`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uosim::analytic::{
    breakeven_distance, check_requirements, latency, BreakevenResult, LatencyBudget,
    LatencyScope, RequirementBounds, Verdict,
};
use uosim::engine;
use uosim::experiments::{
    reproduce_all, resource_case_table, sweep_distance, sweep_nf_delay,
};
use uosim::model::{build_topology, OperatorKind};
use uosim::procedures::{data_transfer_uplink, extract_coefficients, ProcedureKind};
use uosim::scenario::{parse_scenario, ExperimentSpec, ScenarioConfig};

/// Environment variable naming the default output directory for `reproduce`.
const OUT_DIR_ENV: &str = "UOSIM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "uosim",
    about = "Latency simulator and closed-form model for local vs. remote 5G core deployments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print the latency breakdown.
    Simulate { scenario: PathBuf },
    /// Evaluate the closed form and check the latency requirements.
    Analyze {
        scenario: PathBuf,
        /// Exit with code 2 when a requirement check fails.
        #[arg(long)]
        strict: bool,
        /// Override the one-way latency bound, ms.
        #[arg(long, value_name = "MS")]
        one_way_bound: Option<f64>,
        /// Override the round-trip latency bound, ms.
        #[arg(long, value_name = "MS")]
        round_trip_bound: Option<f64>,
    },
    /// Solve the largest core-site distance meeting a target latency.
    Breakeven {
        scenario: PathBuf,
        /// Target end-to-end latency, ms.
        #[arg(long, value_name = "MS")]
        target: f64,
    },
    /// Run the scenario's experiment block and emit CSV.
    Sweep {
        scenario: PathBuf,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every experiment and write CSVs plus the comparison report.
    Reproduce {
        /// Output directory (defaults to $UOSIM_OUT_DIR, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the access/backhaul/processing crossing counts of a procedure.
    Coeffs { procedure: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Simulate { scenario } => simulate(&scenario),
        Command::Analyze {
            scenario,
            strict,
            one_way_bound,
            round_trip_bound,
        } => analyze(&scenario, strict, one_way_bound, round_trip_bound),
        Command::Breakeven { scenario, target } => breakeven(&scenario, target),
        Command::Sweep { scenario, out } => sweep(&scenario, out.as_deref()),
        Command::Reproduce { out } => reproduce(out),
        Command::Coeffs { procedure } => coeffs(&procedure),
    }
}

fn load_scenario(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read scenario `{}`: {e}", path.display()))?;
    Ok(parse_scenario(&text)?)
}

fn print_breakdown(cfg: &ScenarioConfig, e2e_ms: f64, parts: [f64; 5]) {
    println!("procedure         {}", cfg.procedure);
    println!("operator          {}", cfg.deployment.operator_kind);
    println!("distance_km       {:.2}", cfg.deployment.core_distance_km);
    println!("e2e_ms            {e2e_ms:.3}");
    println!("access_ms         {:.3}", parts[0]);
    println!("backhaul_ms       {:.3}", parts[1]);
    println!("processing_ms     {:.3}", parts[2]);
    println!("core_internal_ms  {:.3}", parts[3]);
    println!("server_ms         {:.3}", parts[4]);
}

fn simulate(path: &Path) -> anyhow::Result<u8> {
    let cfg = load_scenario(path)?;
    let topo = build_topology(&cfg.deployment, &cfg.params)?;
    let trace = engine::run(&cfg.procedure.procedure(), &topo, &cfg.params)?;
    let c = trace.per_component;
    print_breakdown(
        &cfg,
        trace.e2e_latency.as_ms(),
        [
            c.access.as_ms(),
            c.backhaul.as_ms(),
            c.processing.as_ms(),
            c.core_internal.as_ms(),
            c.server.as_ms(),
        ],
    );
    Ok(0)
}

fn budget_for(cfg: &ScenarioConfig) -> anyhow::Result<LatencyBudget> {
    let topo = build_topology(&cfg.deployment, &cfg.params)?;
    let coeffs = extract_coefficients(&cfg.procedure.procedure(), &topo)?;
    Ok(latency(&coeffs, &cfg.params, cfg.procedure.charges_server()))
}

fn verdict_line(label: &str, verdict: &Verdict, bound_ms: f64) -> String {
    match verdict {
        Verdict::Pass { margin_ms } => {
            format!("{label}  pass (margin {margin_ms:.3} ms, bound {bound_ms:.3} ms)")
        }
        Verdict::Fail { exceedance_ms } => {
            format!("{label}  fail (over by {exceedance_ms:.3} ms, bound {bound_ms:.3} ms)")
        }
    }
}

fn analyze(
    path: &Path,
    strict: bool,
    one_way_bound: Option<f64>,
    round_trip_bound: Option<f64>,
) -> anyhow::Result<u8> {
    let cfg = load_scenario(path)?;
    let bounds = RequirementBounds {
        one_way_ms: one_way_bound.unwrap_or(cfg.bounds.one_way_ms),
        round_trip_ms: round_trip_bound.unwrap_or(cfg.bounds.round_trip_ms),
    };
    let budget = budget_for(&cfg)?;
    print_breakdown(
        &cfg,
        budget.total_ms,
        [
            budget.access_ms,
            budget.backhaul_ms,
            budget.processing_ms,
            budget.core_internal_ms,
            budget.server_ms,
        ],
    );

    let round_trip = check_requirements(&budget, LatencyScope::RoundTrip, &bounds)?;
    println!(
        "{}",
        verdict_line("round_trip_check ", &round_trip, bounds.round_trip_ms)
    );
    let mut all_passed = round_trip.passed();

    if cfg.procedure == ProcedureKind::DataTransfer {
        let topo = build_topology(&cfg.deployment, &cfg.params)?;
        let uplink_coeffs = extract_coefficients(&data_transfer_uplink(), &topo)?;
        let uplink = latency(&uplink_coeffs, &cfg.params, false);
        println!("one_way_uplink_ms {:.3}", uplink.total_ms);
        let one_way = check_requirements(&uplink, LatencyScope::OneWay, &bounds)?;
        println!(
            "{}",
            verdict_line("one_way_check    ", &one_way, bounds.one_way_ms)
        );
        all_passed &= one_way.passed();
    }

    if strict && !all_passed {
        return Ok(2);
    }
    Ok(0)
}

fn breakeven(path: &Path, target_ms: f64) -> anyhow::Result<u8> {
    let cfg = load_scenario(path)?;
    let topo = build_topology(&cfg.deployment, &cfg.params)?;
    let coeffs = extract_coefficients(&cfg.procedure.procedure(), &topo)?;
    let result = breakeven_distance(
        &coeffs,
        target_ms,
        &cfg.params,
        cfg.procedure.charges_server(),
    )?;
    match result {
        BreakevenResult::Feasible { distance_km } => {
            println!("feasible {distance_km:.2} km");
        }
        BreakevenResult::Infeasible => println!("infeasible"),
    }
    Ok(0)
}

fn sweep(path: &Path, out: Option<&Path>) -> anyhow::Result<u8> {
    let cfg = load_scenario(path)?;
    let experiment = cfg
        .experiment
        .clone()
        .ok_or_else(|| anyhow::anyhow!("scenario has no [experiment] block"))?;

    // The shared knobs come from the scenario; the local reference runs at
    // the baseline NF delay and the local core distance.
    let uo_distance = match cfg.deployment.operator_kind {
        OperatorKind::Uo => cfg.deployment.core_distance_km,
        OperatorKind::Mno => uosim::scenario::defaults::UO_CORE_DISTANCE_KM,
    };
    let uo_reference = cfg
        .params
        .with_t_nf_ms(cfg.base_nf_ms)?
        .with_distance_km(uo_distance)?;

    let csv = match experiment {
        ExperimentSpec::DistanceSweep {
            d_min_km,
            d_max_km,
            step_km,
            mno_nf_ms,
        } => sweep_distance(cfg.procedure, d_min_km, d_max_km, step_km, mno_nf_ms, &uo_reference)?
            .to_csv(),
        ExperimentSpec::NfDelaySweep {
            t_min_ms,
            t_max_ms,
            n_points,
            uo_distance_km,
            mno_distance_km,
        } => sweep_nf_delay(
            cfg.procedure,
            t_min_ms,
            t_max_ms,
            n_points,
            uo_distance_km,
            mno_distance_km,
            &cfg.params,
        )?
        .to_csv(),
        ExperimentSpec::CaseTable {
            uo_nf_ms,
            uo_distance_km,
            n_factories,
        } => resource_case_table(
            cfg.procedure,
            uo_nf_ms,
            uo_distance_km,
            n_factories,
            &cfg.params,
        )?
        .to_csv(),
        ExperimentSpec::Threshold {
            threshold_ms,
            d_min_km,
            d_max_km,
            step_km,
            mno_nf_ms,
        } => {
            let mut result = sweep_distance(
                cfg.procedure,
                d_min_km,
                d_max_km,
                step_km,
                mno_nf_ms,
                &uo_reference,
            )?;
            result.reference.threshold_ms = Some(threshold_ms);
            match result.threshold_crossing(threshold_ms) {
                Some(km) => eprintln!("threshold {threshold_ms:.3} ms crossed at {km:.2} km"),
                None => eprintln!("threshold {threshold_ms:.3} ms not crossed on this grid"),
            }
            result.to_csv()
        }
    };

    match out {
        Some(out_path) => std::fs::write(out_path, csv)
            .map_err(|e| anyhow::anyhow!("cannot write `{}`: {e}", out_path.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn reproduce(out: Option<PathBuf>) -> anyhow::Result<u8> {
    let out_dir = out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = reproduce_all(&out_dir)?;
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)?
        .map(|e| Ok(e?.file_name().to_string_lossy().into_owned()))
        .collect::<anyhow::Result<_>>()?;
    names.sort();
    println!("wrote {} files to {}", names.len(), out_dir.display());
    for name in names {
        println!("  {name}");
    }
    println!("report sections: {}", report.sections.len());
    Ok(0)
}

fn coeffs(procedure: &str) -> anyhow::Result<u8> {
    let kind = ProcedureKind::parse(procedure)?;
    let params = uosim::model::LatencyParams::default();
    let topo = build_topology(&uosim::model::DeploymentSpec::uo(), &params)?;
    let c = extract_coefficients(&kind.procedure(), &topo)?;
    println!(
        "{},{},{}",
        c.access_crossings, c.backhaul_crossings, c.processing_charges
    );
    Ok(0)
}
