use relvac::checks;
use relvac::dynamics::assemble_coefficients;
use relvac::energy::energy_functionals;
use relvac::eos::ThermoParams;
use relvac::error::Error;
use relvac::expr::Expr;
use relvac::grid::GridSpec;
use relvac::io::{read_checkpoint, write_checkpoint, write_energy_csv, RunConfig};
use relvac::kinematics::compute_deformation;
use relvac::solver::{limit_sweep, mms_convergence, run, SolverConfig};
use relvac::vorticity::assemble_curl_structure;
use relvac::weight::make_weight;
use serde::Deserialize;
use std::path::{Path, PathBuf};

const USAGE: &str = "\
relvac -- Lagrangian fluid-vacuum free-boundary simulator

USAGE:
    relvac simulate --config <run.json>
    relvac verify   [--quick] [--config <run.json>]
    relvac energy   --checkpoint <snap.json> [--order <N>]
    relvac mms      [--config <mms.json>]
    relvac limit    [--config <limit.json>]

Exit codes: 0 success, 1 validation/run failure, 2 usage error.
The --seed flag is accepted and reserved; nothing is stochastic yet.
RELVAC_OUTPUT_DIR overrides the configured output directory.";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(dispatch(&args));
}

struct Flags {
    config: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    order: Option<usize>,
    quick: bool,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags { config: None, checkpoint: None, order: None, quick: false };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                flags.config = Some(PathBuf::from(
                    it.next().ok_or_else(|| "--config needs a path".to_string())?,
                ))
            }
            "--checkpoint" => {
                flags.checkpoint = Some(PathBuf::from(
                    it.next().ok_or_else(|| "--checkpoint needs a path".to_string())?,
                ))
            }
            "--order" => {
                let v = it.next().ok_or_else(|| "--order needs an integer".to_string())?;
                flags.order =
                    Some(v.parse().map_err(|_| format!("--order: bad integer `{v}`"))?);
            }
            "--quick" => flags.quick = true,
            "--seed" => {
                // reserved; consume the value if one follows
                it.next();
            }
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(flags)
}

fn dispatch(args: &[String]) -> i32 {
    let Some(cmd) = args.first() else {
        eprintln!("{USAGE}");
        return 2;
    };
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            return 2;
        }
    };
    match cmd.as_str() {
        "simulate" => cmd_simulate(&flags),
        "verify" => cmd_verify(&flags),
        "energy" => cmd_energy(&flags),
        "mms" => cmd_mms(&flags),
        "limit" => cmd_limit(&flags),
        other => {
            eprintln!("error: unknown subcommand `{other}`\n\n{USAGE}");
            2
        }
    }
}

/// Config and expression problems are usage errors (exit 2); runtime
/// failures are validation errors (exit 1).
fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Expr(_) | Error::InvalidInput(_) | Error::InvalidWeight(_) => 2,
        _ => 1,
    }
}

fn cmd_simulate(flags: &Flags) -> i32 {
    let Some(path) = &flags.config else {
        eprintln!("error: simulate needs --config\n\n{USAGE}");
        return 2;
    };
    let cfg = match RunConfig::from_file(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let solver_cfg = match cfg.to_solver_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    if solver_cfg.params.outside_standard_range() {
        eprintln!(
            "note: gamma = {} lies outside the (1, 2) range the theory assumes",
            solver_cfg.params.gamma
        );
    }
    let out_dir = cfg.output_dir();
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        return 1;
    }

    match run(&solver_cfg) {
        Ok(traj) => {
            let csv = out_dir.join("energy.csv");
            if let Err(e) = write_energy_csv(&csv, &traj.reports) {
                eprintln!("error: {e}");
                return 1;
            }
            if cfg.output.checkpoints {
                let base = out_dir.join("final");
                if let Err(e) = write_checkpoint(
                    &base,
                    traj.last_state(),
                    &solver_cfg.params,
                    &solver_cfg.weight,
                ) {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
            let last = traj.reports.last().unwrap();
            println!(
                "completed t = {:.6}: {} steps, {} outputs, energy drift {:.3e}, min J {:.6}",
                traj.times.last().unwrap(),
                traj.steps,
                traj.times.len(),
                last.energy_drift,
                last.min_j,
            );
            for ev in &traj.events {
                println!("event: {ev}");
            }
            println!("wrote {}", csv.display());
            if traj.events.is_empty() {
                0
            } else {
                1
            }
        }
        Err(Error::SimulationAborted { time, reason, partial }) => {
            eprintln!("simulation aborted at t = {time:.6e}: {reason}");
            if !partial.reports.is_empty() {
                let csv = out_dir.join("energy.csv");
                if write_energy_csv(&csv, &partial.reports).is_ok() {
                    eprintln!("partial log written to {}", csv.display());
                }
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn cmd_verify(flags: &Flags) -> i32 {
    let mut quick = flags.quick;
    if let Some(path) = &flags.config {
        match RunConfig::from_file(path) {
            Ok(cfg) => match cfg.verify_suite.as_deref() {
                None | Some("full") => {}
                Some("quick") => quick = true,
                Some(other) => {
                    eprintln!("error: unknown verify_suite `{other}` (expected quick or full)");
                    return 2;
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        }
    }
    let results = if quick { checks::quick_suite() } else { checks::full_suite() };
    println!("{:<4} {:<38} detail", "", "check");
    for r in &results {
        println!("{}", r.line());
    }
    let failures = results.iter().filter(|r| !r.passed).count();
    println!(
        "{} of {} checks passed",
        results.len() - failures,
        results.len()
    );
    if failures == 0 {
        0
    } else {
        1
    }
}

fn cmd_energy(flags: &Flags) -> i32 {
    let Some(path) = &flags.checkpoint else {
        eprintln!("error: energy needs --checkpoint\n\n{USAGE}");
        return 2;
    };
    match energy_report_for(path, flags.order) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn energy_report_for(path: &Path, order: Option<usize>) -> relvac::Result<()> {
    let (header, state) = read_checkpoint(path)?;
    let params = ThermoParams::new(header.gamma, header.eps)?;
    let grid = state.grid();
    let weight = make_weight(&header.weight, grid)?;
    let defo = compute_deformation(&state.eta, grid)?;
    let coeffs = assemble_coefficients(&state, &defo, &weight, &params)?;
    let cs = assemble_curl_structure(&state, &defo, &coeffs, &params, None)?;
    let order = order.unwrap_or_else(|| {
        let by_grid = (grid.shape[2].saturating_sub(5)) / 2;
        if grid.is_planar() { 8.min(by_grid) } else { 4.min(by_grid) }
    });
    let rep = energy_functionals(&state, &defo, &coeffs, &cs, &weight, params.alpha, order)?;
    println!(
        "t = {:.6e}  grid = {:?}  gamma = {}  eps = {}  order = {} (theory asks >= {})",
        rep.time, header.grid, header.gamma, header.eps, rep.order, rep.order_threshold
    );
    println!("E_I = {:.10e}", rep.e1);
    println!("E_II = {:.10e}", rep.e2);
    println!("E_III = {:.10e}", rep.e3);
    println!("E_IV = {:.10e}", rep.e4);
    println!("E_total = {:.10e}", rep.e_total);
    println!("{:<10} {:>18} {:>18} {:>18} {:>18}", "(m1,m2,n)", "E_I", "E_II", "E_III", "E_IV");
    for (((a, b), c), d) in rep
        .e1_entries
        .iter()
        .zip(&rep.e2_entries)
        .zip(&rep.e3_entries)
        .zip(&rep.e4_entries)
    {
        println!(
            "({},{},{})    {:>18.10e} {:>18.10e} {:>18.10e} {:>18.10e}",
            a.m1, a.m2, a.n, a.value, b.value, c.value, d.value
        );
    }
    println!("a priori sup-norm table:");
    for s in &rep.sup_table {
        match s.eta_t_grad {
            Some(v) => println!(
                "  (p,q)=({},{})  |w^(q/2) d D eta| = {:.6e}  |w^(q/2) d D eta_t| = {:.6e}",
                s.p, s.q, s.eta_grad, v
            ),
            None => println!("  (p,q)=({},{})  |w^(q/2) d D eta| = {:.6e}", s.p, s.q, s.eta_grad),
        }
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MmsCliConfig {
    #[serde(default = "default_eps_values")]
    eps_values: Vec<f64>,
    #[serde(default = "default_resolutions")]
    resolutions: Vec<usize>,
    #[serde(default = "default_amplitude")]
    amplitude: f64,
    #[serde(default = "default_t_end")]
    t_end: f64,
    #[serde(default = "default_cfl")]
    cfl: f64,
}

fn default_eps_values() -> Vec<f64> {
    vec![0.0, 0.2]
}
fn default_resolutions() -> Vec<usize> {
    vec![64, 128, 256, 512]
}
fn default_amplitude() -> f64 {
    0.25
}
fn default_t_end() -> f64 {
    1.0
}
fn default_cfl() -> f64 {
    0.4
}

impl Default for MmsCliConfig {
    fn default() -> Self {
        MmsCliConfig {
            eps_values: default_eps_values(),
            resolutions: default_resolutions(),
            amplitude: default_amplitude(),
            t_end: default_t_end(),
            cfl: default_cfl(),
        }
    }
}

fn cmd_mms(flags: &Flags) -> i32 {
    let cfg: MmsCliConfig = match &flags.config {
        None => MmsCliConfig::default(),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: line {}, column {}: {e}", path.display(), e.line(), e.column());
                    return 2;
                }
            },
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return 2;
            }
        },
    };
    let mut ok = true;
    for &eps in &cfg.eps_values {
        let params = match ThermoParams::new(2.0, eps) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        };
        match mms_convergence(params, &cfg.resolutions, cfg.amplitude, cfg.t_end, cfg.cfl) {
            Ok(study) => {
                println!("eps = {eps}:");
                let mut prev: Option<(usize, f64)> = None;
                for &(n3, err) in &study.rows {
                    match prev {
                        Some((pn, pe)) => {
                            let order = (pe / err).ln()
                                / (((n3 - 1) as f64) / ((pn - 1) as f64)).ln();
                            println!("  n3 = {n3:<5} L_inf(t_end) = {err:.6e}  order {order:.3}");
                        }
                        None => println!("  n3 = {n3:<5} L_inf(t_end) = {err:.6e}"),
                    }
                    prev = Some((n3, err));
                }
                println!("  fitted order = {:.3}", study.order);
                ok &= study.order > 1.5;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        }
    }
    if ok {
        0
    } else {
        1
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitCliConfig {
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_n3")]
    n3: usize,
    #[serde(default = "default_limit_t_end")]
    t_end: f64,
    #[serde(default = "default_cfl")]
    cfl: f64,
    #[serde(default = "default_eta1")]
    eta1: [String; 3],
    #[serde(default = "default_eps_list")]
    eps_list: Vec<f64>,
}

fn default_gamma() -> f64 {
    2.0
}
fn default_n3() -> usize {
    129
}
fn default_limit_t_end() -> f64 {
    0.25
}
fn default_eta1() -> [String; 3] {
    ["0".into(), "0".into(), "0.2*x3*(1-x3)".into()]
}
fn default_eps_list() -> Vec<f64> {
    vec![0.4, 0.2, 0.1, 0.05]
}

impl Default for LimitCliConfig {
    fn default() -> Self {
        LimitCliConfig {
            gamma: default_gamma(),
            n3: default_n3(),
            t_end: default_limit_t_end(),
            cfl: default_cfl(),
            eta1: default_eta1(),
            eps_list: default_eps_list(),
        }
    }
}

fn cmd_limit(flags: &Flags) -> i32 {
    let cfg: LimitCliConfig = match &flags.config {
        None => LimitCliConfig::default(),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: line {}, column {}: {e}", path.display(), e.line(), e.column());
                    return 2;
                }
            },
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return 2;
            }
        },
    };
    let build = || -> relvac::Result<_> {
        let params = ThermoParams::new(cfg.gamma, cfg.eps_list.first().copied().unwrap_or(0.4))?;
        let grid = GridSpec::planar(cfg.n3)?;
        let mut base = SolverConfig::new(params, grid, cfg.t_end)?;
        base.cfl = cfg.cfl;
        base.cadence_dt = cfg.t_end / 5.0;
        base.diag_order = Some(0);
        base.eta1 = [
            Expr::parse(&cfg.eta1[0])?,
            Expr::parse(&cfg.eta1[1])?,
            Expr::parse(&cfg.eta1[2])?,
        ];
        limit_sweep(&base, &cfg.eps_list)
    };
    match build() {
        Ok(table) => {
            println!("{:<8} {:>16} {:>10} {:>16}", "eps", "sup|eta-eta_0|", "ratio", "max|B-I|");
            for row in &table.rows {
                match &row.aborted {
                    Some(msg) => println!("{:<8} {msg}", row.eps),
                    None => println!(
                        "{:<8} {:>16.6e} {:>10} {:>16.6e}",
                        row.eps,
                        row.sup_diff,
                        row.ratio.map_or("-".to_string(), |r| format!("{r:.3}")),
                        row.max_b_dev
                    ),
                }
            }
            if table.rows.iter().any(|r| r.aborted.is_some()) {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
