use std::path::{Path, PathBuf};

use popmw::dynamics::{run_until_converged, simulate, DEFAULT_CONVERGENCE_THRESHOLD};
use popmw::equivalence::{
    check_marginal_claim, check_rs_marginal, check_sr_marginal, check_trajectory, matching_learner, EquivalenceReport,
    STEP_TOLERANCE, TRAJECTORY_TOLERANCE,
};
use popmw::experiments::{
    counterexample_convergence, counterexample_wright, instance_seed, random_landscape, run_sweep, InitialDistribution,
    LimitOutcome, SweepConfig,
};
use popmw::io::{
    fmt_f64, read_distribution, read_landscape, read_marginals, strategy_csv, sweep_records_csv, sweep_summary_csv,
    trajectory_csv, with_metadata,
};
use popmw::learners::cosimulate_learners;
use popmw::regret::{build_ledger, check_regret_bound, RegretMode};
use popmw::{DynamicsKind, FitnessLandscape, JointDistribution, MarginalProfile, Shape};
use serde_json::json;

use crate::args::{Check, ConvergenceArgs, RegretArgs, SimulateArgs, SweepArgs, VerifyArgs, WrightArgs};
use crate::config::metadata;
use crate::error::CliError;

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Input(format!("{flag} is required")))
}

fn check_threshold(threshold: f64) -> Result<(), CliError> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "--threshold must lie in (0, 1), got {threshold}"
        )))
    }
}

/// Writes every output only after all of them have been produced, so a
/// failed run leaves nothing behind.
fn write_all(outputs: Vec<(&Path, String)>) -> Result<(), CliError> {
    for (path, body) in outputs {
        std::fs::write(path, body).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn json_body(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes a JSON report to `output`, or prints it when there is none.
fn emit_json(output: &Option<PathBuf>, value: &serde_json::Value, meta: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_all(vec![(path.as_path(), with_metadata(json_body(value), meta))]),
        None => {
            print!("{}", json_body(value));
            Ok(())
        }
    }
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let w = read_landscape(required(&args.landscape, "--landscape")?)?;
    let p0 = read_distribution(required(&args.initial, "--initial")?)?;
    w.shape().ensure_same(p0.shape())?;
    let kind = args.dynamics.with_rate(args.r)?;
    check_threshold(args.threshold)?;

    let steps = if args.stop_at_convergence {
        run_until_converged(&w, &p0, kind, args.steps, args.threshold)?
            .steps
            .max(1)
    } else {
        args.steps
    };
    let traj = simulate(&w, &p0, kind, steps, args.threshold)?;

    let meta = metadata("simulate", &args);
    let mut outputs = Vec::new();
    if let Some(path) = &args.output {
        outputs.push((path.as_path(), with_metadata(trajectory_csv(&traj), &meta)));
    }
    if let Some(path) = &args.strategies {
        let learners = cosimulate_learners(&w, &traj.states, &matching_learner(kind)?)?;
        outputs.push((path.as_path(), with_metadata(strategy_csv(&learners), &meta)));
    }
    write_all(outputs)?;

    println!("dynamics: {}, steps: {}", describe(kind), traj.steps());
    match traj.converged_at {
        Some(t) => println!("converged at t = {t} to {}", traj.last().max_entry().0),
        None => println!(
            "not converged (largest genotype frequency {:.4})",
            traj.last().max_entry().1
        ),
    }
    println!("final mean fitness: {:.4}", traj.mean_fitness.last().unwrap());
    Ok(())
}

fn describe(kind: DynamicsKind) -> String {
    match kind {
        DynamicsKind::Asexual => "asexual".into(),
        k => format!("{} (r = {})", k.name(), k.rate()),
    }
}

struct Instance {
    label: String,
    w: FitnessLandscape,
    p: JointDistribution,
}

fn verify_instances(args: &VerifyArgs) -> Result<Vec<Instance>, CliError> {
    if let Some(path) = &args.landscape {
        let w = read_landscape(path)?;
        let p = read_distribution(required(&args.initial, "--initial")?)?;
        w.shape().ensure_same(p.shape())?;
        return Ok(vec![Instance {
            label: "input".into(),
            w,
            p,
        }]);
    }
    if args.initial.is_some() || args.marginals.is_some() {
        return Err(CliError::Input("--initial and --marginals need --landscape".into()));
    }
    let shape = Shape::new(args.alleles.clone())?;
    (0..args.instances)
        .map(|i| {
            let seed = instance_seed(args.seed, i as u64);
            Ok(Instance {
                label: i.to_string(),
                w: random_landscape(shape.alleles(), args.s, seed)?,
                p: InitialDistribution::RandomJoint.sample(&shape, seed)?,
            })
        })
        .collect()
}

pub fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let checks: Vec<Check> = match args.check {
        Check::All => vec![
            Check::SrMarginal,
            Check::RsMarginal,
            Check::SrTrajectory,
            Check::RsTrajectory,
        ],
        c => vec![c],
    };
    let claimed: Option<MarginalProfile> = match &args.marginals {
        Some(_) if !matches!(args.check, Check::SrMarginal | Check::RsMarginal) => {
            return Err(CliError::Input(
                "--marginals works with --check sr-marginal or rs-marginal".into(),
            ));
        }
        Some(path) => Some(read_marginals(path)?),
        None => None,
    };
    let instances = verify_instances(&args)?;

    let mut results = Vec::new();
    let mut failures: Vec<(String, EquivalenceReport)> = Vec::new();
    for inst in &instances {
        for &check in &checks {
            let report = match check {
                Check::SrMarginal | Check::RsMarginal => {
                    let tol = args.tol.unwrap_or(STEP_TOLERANCE);
                    let kind = if check == Check::SrMarginal {
                        DynamicsKind::sr(args.r)?
                    } else {
                        DynamicsKind::rs(args.r)?
                    };
                    match (&claimed, kind) {
                        (Some(c), _) => check_marginal_claim(&inst.w, &inst.p, kind, c, tol)?,
                        (None, DynamicsKind::Rs(r)) => check_rs_marginal(&inst.w, &inst.p, r, tol)?,
                        (None, _) => check_sr_marginal(&inst.w, &inst.p, args.r, tol)?,
                    }
                }
                Check::SrTrajectory | Check::RsTrajectory => {
                    let tol = args.tol.unwrap_or(TRAJECTORY_TOLERANCE);
                    let kind = if check == Check::SrTrajectory {
                        DynamicsKind::sr(args.r)?
                    } else {
                        DynamicsKind::rs(args.r)?
                    };
                    check_trajectory(&inst.w, &inst.p, kind, args.steps, tol)?
                }
                Check::All => unreachable!("expanded above"),
            };
            results.push(json!({ "instance": inst.label, "report": report }));
            if !report.passed {
                failures.push((inst.label.clone(), report));
            }
        }
    }

    let passed = failures.is_empty();
    emit_json(
        &args.output,
        &json!({ "passed": passed, "results": results }),
        &metadata("verify", &args),
    )?;
    eprintln!(
        "{} check(s) on {} instance(s): {} failed",
        results.len(),
        instances.len(),
        failures.len()
    );
    match failures
        .into_iter()
        .max_by(|a, b| a.1.max_deviation().total_cmp(&b.1.max_deviation()))
    {
        None => Ok(()),
        Some((label, r)) => Err(CliError::Failed(format!(
            "{} on instance {label}: deviation {:.3e} > {:.0e} at t = {}, locus {}, allele {}",
            r.check,
            r.max_deviation(),
            r.tol,
            r.worst.t,
            r.worst.locus + 1,
            r.worst.index + 1
        ))),
    }
}

pub fn cmd_regret(args: RegretArgs) -> Result<(), CliError> {
    let w = read_landscape(required(&args.landscape, "--landscape")?)?;
    let p0 = match &args.initial {
        Some(path) => read_distribution(path)?,
        None => JointDistribution::uniform(w.shape().clone()),
    };
    w.shape().ensure_same(p0.shape())?;
    let kind = args.dynamics.with_rate(args.r)?;
    let mode = match kind {
        DynamicsKind::Rs(r) => RegretMode::Rs(r),
        _ => RegretMode::Sr,
    };
    let s = args.s.unwrap_or_else(|| w.selection_strength());
    if s < w.selection_strength() {
        return Err(popmw::Error::SelectionStrengthTooSmall {
            s,
            required: w.selection_strength(),
        }
        .into());
    }
    let traj = simulate(&w, &p0, kind, args.steps, DEFAULT_CONVERGENCE_THRESHOLD)?;

    let k = w.shape().k();
    let mut reports = Vec::with_capacity(k);
    let mut cumulative = Vec::with_capacity(k);
    for player in 0..k {
        let ledger = build_ledger(&w, &traj.states, player, mode)?;
        cumulative.push(ledger.cumulative_regret());
        reports.push(check_regret_bound(&ledger, s, w.shape().n(player)));
    }
    let passed = reports.iter().all(|r| r.passed);

    let meta = metadata("regret", &args);
    if let Some(path) = &args.cumulative {
        let mut csv = String::from("t");
        for j in 1..=k {
            csv.push_str(&format!(",regret_{j}"));
        }
        csv.push('\n');
        for t in 0..args.steps {
            csv.push_str(&(t + 1).to_string());
            for c in &cumulative {
                csv.push(',');
                csv.push_str(&fmt_f64(c[t]));
            }
            csv.push('\n');
        }
        write_all(vec![(path.as_path(), with_metadata(csv, &meta))])?;
    }
    let report = json!({
        "passed": passed,
        "dynamics": kind.name(),
        "guaranteed": s > 0.0 && s < 0.5,
        "players": reports,
    });
    emit_json(&args.output, &report, &meta)?;

    for r in &reports {
        eprintln!(
            "player {}: AF {:.4}, best action AF {:.4}, bound {:.4}, slack {:.4}",
            r.player + 1,
            r.af_realized,
            r.af_best_action,
            r.bound,
            r.slack
        );
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(
            "realized average fitness falls below the regret bound".into(),
        ))
    }
}

pub fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let cfg = SweepConfig {
        alleles: args.shape(),
        s: args.s,
        kind: args.dynamics.with_rate(args.r)?,
        instances: args.instances,
        t_max: args.t_max,
        threshold: args.threshold,
        seed: args.seed,
        init: args.init.into(),
    };
    cfg.validate()?;
    let (records, summary) = run_sweep(&cfg, args.workers)?;

    let meta = metadata("sweep", &args);
    let mut outputs = Vec::new();
    if let Some(path) = &args.output {
        outputs.push((path.as_path(), with_metadata(sweep_records_csv(&cfg, &records), &meta)));
    }
    if let Some(path) = &args.summary {
        outputs.push((path.as_path(), with_metadata(sweep_summary_csv(&summary), &meta)));
    }
    write_all(outputs)?;

    let converged = summary.converged.max(1) as f64;
    let suboptimal = records.iter().filter(|r| r.quality.is_some_and(|q| q < 1.0)).count();
    let nash = records.iter().filter(|r| r.is_nash == Some(true)).count();
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    println!("converged: {}/{}", summary.converged, summary.instances);
    match summary.median_t_conv {
        Some(t) => println!("median convergence time: {t}"),
        None => println!("median convergence time: not reached within {}", cfg.t_max),
    }
    println!("converged with q < 1: {:.4}", suboptimal as f64 / converged);
    println!("converged to a pure Nash equilibrium: {:.4}", nash as f64 / converged);
    if failed > 0 {
        println!("instances with numerical failures: {failed}");
    }
    Ok(())
}

pub fn cmd_wright(args: WrightArgs) -> Result<(), CliError> {
    let d = counterexample_wright(args.s, args.t_max)?;
    if let Some(path) = &args.output {
        let mut csv = String::from("t,l1,linf\n");
        for (t, (a, b)) in d.l1.iter().zip(&d.linf).enumerate() {
            csv.push_str(&format!("{t},{},{}\n", fmt_f64(*a), fmt_f64(*b)));
        }
        write_all(vec![(
            path.as_path(),
            with_metadata(csv, &metadata("counterexample wright", &args)),
        )])?;
    }
    println!(
        "max l1 distance from the Wright manifold: {:.4} at t = {}",
        d.max_l1, d.argmax_t
    );
    println!("max linf distance: {:.4}", d.max_linf);
    Ok(())
}

fn describe_limit(name: &str, o: &LimitOutcome) {
    match (&o.limit, o.steps) {
        (Some(g), Some(t)) => println!(
            "{name}: converged to {g} at t = {t} ({})",
            if o.is_nash == Some(true) {
                "pure Nash"
            } else {
                "not pure Nash"
            }
        ),
        _ => println!("{name}: did not converge"),
    }
}

pub fn cmd_convergence(args: ConvergenceArgs) -> Result<(), CliError> {
    let v = counterexample_convergence(args.t_max)?;
    if let Some(path) = &args.output {
        let body = json_body(&json!({ "limits_differ": v.limits_differ(), "verdict": v }));
        write_all(vec![(
            path.as_path(),
            with_metadata(body, &metadata("counterexample convergence", &args)),
        )])?;
    }
    describe_limit("uncorrelated PW", &v.independent_pw);
    describe_limit("SR (r = 0.5)", &v.sr);
    if v.conclusive() {
        println!("limits differ: {}", v.limits_differ());
    }
    Ok(())
}
