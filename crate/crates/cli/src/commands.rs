use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use popgen_dyn::analysis::{
    slow_manifold_consistency, verify_boundedness, verify_hardy_weinberg, verify_rate_ordering,
    verify_selection_convergence, ManifoldConfig, OrderingConfig, VerificationReport,
};
use popgen_dyn::equilibria::{
    monomorphic_capacity, neutral_capacity, population_bound, CapacityResult, PopulationBound,
};
use popgen_dyn::genetics::{allele_frequency, hardy_weinberg_proportions, Allele};
use popgen_dyn::integrate::{simulate as simulate_reduced, simulate_two_phase, Trajectory};
use popgen_dyn::rates::ValidationReport;
use popgen_dyn::{Error, Execution, GenotypeVector, ReducedKind, ReducedModel};

use crate::config::{set_numeric_leaf, CheckName, Model, ModelKind, RunConfig};
use crate::output::{resolve, write_atomic, write_json};
use crate::{CliError, CommonArgs};

/// Preconditions of a check that the configuration does not meet.
fn precondition(e: Error) -> CliError {
    match e {
        Error::NeutralityViolation(_) | Error::AssumptionViolation(_) => CliError::Config(e.to_string()),
        other => CliError::Numerical(other),
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn kind_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Full => "full",
        ModelKind::Fast => "fast",
        ModelKind::Slow => "slow",
    }
}

/// Simulates and writes the CSV; returns the terminal reduced-variable state.
fn simulate_to(cfg: &RunConfig, model: &Model, csv: &Path) -> Result<GenotypeVector, CliError> {
    match model {
        Model::Reduced(m) => {
            let x0 = cfg.initial.reduced_start(model)?;
            let traj = simulate_reduced(m, &x0, &cfg.sim)?;
            write_atomic(csv, |w| traj.write_csv(w))?;
            Ok(*traj.terminal())
        }
        Model::TwoPhase(p) => {
            let s0 = cfg.initial.two_phase_start(model)?;
            let traj = simulate_two_phase(p, &s0, &cfg.sim)?;
            write_atomic(csv, |w| traj.write_csv(w))?;
            Ok(*traj.slow.last().expect("nonempty trajectory"))
        }
    }
}

pub fn simulate(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    let model = cfg.model.build()?;
    let csv = resolve(&args.out, &cfg.output.csv);
    let end = simulate_to(&cfg, &model, &csv)?;
    if !args.quiet {
        println!("wrote {} (terminal state {end})", csv.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EquilibriaReport {
    command: &'static str,
    model_kind: &'static str,
    reduced_kind: ReducedKind,
    assumptions: ValidationReport,
    c1: CapacityResult,
    c3: CapacityResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    neutral: Option<NeutralLevel>,
    population_bound: PopulationBound,
}

#[derive(Debug, Serialize)]
struct NeutralLevel {
    p_a: f64,
    direction: GenotypeVector,
    c_sn: CapacityResult,
    equilibrium: GenotypeVector,
}

pub fn equilibria(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    let model = cfg.model.build()?;
    let reduced = model.reduced()?;
    let x0 = cfg.initial.reduced_start(&model)?;
    let neutral = if reduced.is_selectively_neutral() && !x0.is_zero() {
        let p = allele_frequency(&x0, Allele::A)?;
        let h = hardy_weinberg_proportions(p);
        let c = neutral_capacity(&reduced, &h, false)?;
        Some(NeutralLevel {
            p_a: p,
            direction: h,
            c_sn: c,
            equilibrium: h.scale(c.value),
        })
    } else {
        None
    };
    let report = EquilibriaReport {
        command: "equilibria",
        model_kind: kind_name(cfg.model.kind),
        reduced_kind: reduced.kind,
        assumptions: reduced.rates.validate(),
        c1: monomorphic_capacity(&reduced, 1)?,
        c3: monomorphic_capacity(&reduced, 3)?,
        neutral,
        population_bound: population_bound(&reduced, &cfg.verify.boundedness.grid, Execution::default())?,
    };
    let path = resolve(&args.out, &cfg.output.report);
    write_json(&path, &report)?;
    if !args.quiet {
        println!("c1* = {:.12} (residual {:e})", report.c1.value, report.c1.residual);
        println!("c3* = {:.12} (residual {:e})", report.c3.value, report.c3.residual);
        if let Some(n) = &report.neutral {
            println!("c_sn* = {:.12} along {}", n.c_sn.value, n.direction);
        }
        println!(
            "c* = {:.9} (grid max {:.12}, {} directions)",
            report.population_bound.capacity.value,
            report.population_bound.grid_max,
            report.population_bound.directions
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    command: &'static str,
    seed: u64,
    model_kind: &'static str,
    reduced_kind: ReducedKind,
    assumptions: ValidationReport,
    checks: BTreeMap<&'static str, VerificationReport>,
    passed: bool,
}

fn reduced_trajectory(cfg: &RunConfig, model: &Model, reduced: &ReducedModel) -> Result<Trajectory, CliError> {
    let x0 = cfg.initial.reduced_start(model)?;
    Ok(simulate_reduced(reduced, &x0, &cfg.sim)?)
}

fn run_check(cfg: &RunConfig, model: &Model, name: CheckName, exec: Execution) -> Result<VerificationReport, CliError> {
    let reduced = model.reduced()?;
    let v = &cfg.verify;
    match name {
        CheckName::HardyWeinberg => {
            if !reduced.is_selectively_neutral() {
                return Err(precondition(Error::NeutralityViolation(
                    "hardy_weinberg needs identical rates for every genotype".into(),
                )));
            }
            let traj = reduced_trajectory(cfg, model, &reduced)?;
            verify_hardy_weinberg(&traj, &reduced, &v.hardy_weinberg).map_err(precondition)
        }
        CheckName::SelectionConvergence => {
            let ass1 = reduced.rates.validate().ass1;
            if !ass1.holds {
                return Err(precondition(Error::AssumptionViolation(ass1.failures.join("; "))));
            }
            let traj = reduced_trajectory(cfg, model, &reduced)?;
            verify_selection_convergence(&traj, &reduced, &v.selection).map_err(precondition)
        }
        CheckName::RateOrdering => {
            let oc = OrderingConfig {
                samples: v.ordering.samples,
                slack: v.ordering.slack,
                seed: cfg.seed,
            };
            verify_rate_ordering(&reduced, &oc, exec).map_err(precondition)
        }
        CheckName::SlowManifold => {
            let Model::TwoPhase(p) = model else {
                return Err(CliError::Config(
                    "verify.checks: slow_manifold needs model.kind = \"full\"".into(),
                ));
            };
            let mc = ManifoldConfig {
                epsilons: v.manifold.epsilons.clone().unwrap_or_else(|| vec![p.epsilon]),
                horizon: v.manifold.horizon,
                max_ratio: v.manifold.max_ratio,
                record_every: v.manifold.record_every,
            };
            let x0 = cfg.initial.reduced_start(model)?;
            slow_manifold_consistency(p, p.scaling.reduced_kind(), &x0, &mc, exec).map_err(|e| match e {
                Error::InvalidParameter { field, reason } => {
                    CliError::Config(format!("verify.manifold.{field}: {reason}"))
                }
                other => precondition(other),
            })
        }
        CheckName::Boundedness => {
            let b = &v.boundedness;
            let bound = population_bound(&reduced, &b.grid, exec)?;
            // the tail must be the end of the horizon, not the end of an early stop
            let x0 = cfg.initial.reduced_start(model)?;
            let sim = popgen_dyn::SimConfig {
                stop_at_equilibrium: false,
                ..cfg.sim
            };
            let traj = simulate_reduced(&reduced, &x0, &sim)?;
            let mut report = verify_boundedness(&traj, bound.capacity.value, b.slack, b.tail_fraction);
            report.metric("grid_max", bound.grid_max);
            report.metric("flat", if bound.flat { 1.0 } else { 0.0 });
            Ok(report)
        }
    }
}

fn run_checks(cfg: &RunConfig, model: &Model, exec: Execution) -> Result<VerifyReport, CliError> {
    let reduced = model.reduced()?;
    let mut checks = BTreeMap::new();
    for &name in &cfg.verify.checks {
        checks.insert(name.as_str(), run_check(cfg, model, name, exec)?);
    }
    let passed = checks.values().all(|r| r.passed);
    Ok(VerifyReport {
        command: "verify",
        seed: cfg.seed,
        model_kind: kind_name(cfg.model.kind),
        reduced_kind: reduced.kind,
        assumptions: reduced.rates.validate(),
        checks,
        passed,
    })
}

pub fn verify(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    if cfg.verify.checks.is_empty() {
        return Err(CliError::Config("verify.checks: select at least one check".into()));
    }
    let model = cfg.model.build()?;
    let report = run_checks(&cfg, &model, Execution::default())?;
    let path = resolve(&args.out, &cfg.output.report);
    write_json(&path, &report)?;
    if !args.quiet {
        for (name, r) in &report.checks {
            for c in &r.checks {
                println!(
                    "{name}.{}: {} (worst {:e}, threshold {:e})",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.worst_deviation,
                    c.threshold
                );
            }
        }
        println!("wrote {}", path.display());
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .checks
            .iter()
            .flat_map(|(name, r)| r.failed().map(move |c| format!("{name}.{}", c.name)))
            .collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

#[derive(Debug, Serialize)]
struct SweepPoint {
    index: usize,
    value: f64,
    csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terminal: Option<GenotypeVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terminal_total: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<SweepVerification>,
}

#[derive(Debug, Serialize)]
struct SweepVerification {
    passed: bool,
    failed: Vec<String>,
    metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
struct SweepIndex {
    command: &'static str,
    seed: u64,
    parameter: String,
    points: Vec<SweepPoint>,
}

fn sweep_point(base: &toml::Value, parameter: &str, seed: u64, value: f64, csv: &Path) -> Result<SweepPoint, CliError> {
    let mut doc = base.clone();
    set_numeric_leaf(&mut doc, parameter, value)?;
    let text = toml::to_string(&doc).map_err(|e| CliError::Config(e.to_string()))?;
    let mut cfg = RunConfig::from_toml_str(&text)?;
    cfg.seed = seed;
    let model = cfg.model.build()?;
    let end = simulate_to(&cfg, &model, csv)?;
    let verification = if cfg.verify.checks.is_empty() {
        None
    } else {
        // the sweep already runs points in parallel
        let report = run_checks(&cfg, &model, Execution::Sequential)?;
        let mut failed = Vec::new();
        let mut metrics = BTreeMap::new();
        for (name, r) in &report.checks {
            failed.extend(r.failed().map(|c| format!("{name}.{}", c.name)));
            for (k, v) in &r.metrics {
                metrics.insert(format!("{name}.{k}"), *v);
            }
            for c in &r.checks {
                metrics.insert(format!("{name}.{}", c.name), c.worst_deviation);
            }
        }
        Some(SweepVerification {
            passed: report.passed,
            failed,
            metrics,
        })
    };
    Ok(SweepPoint {
        index: 0,
        value,
        csv: None,
        error: None,
        terminal: Some(end),
        terminal_total: Some(end.total()),
        verification,
    })
}

pub fn sweep(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    let Some(sweep) = cfg.sweep.clone() else {
        return Err(CliError::Config("sweep: section is required".into()));
    };
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::Config(e.to_string()))?;
    let base: toml::Value = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    // fail early on a path that does not address a numeric leaf
    set_numeric_leaf(&mut base.clone(), &sweep.parameter, sweep.values[0])?;

    let stem = Path::new(&cfg.output.csv)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory".into());
    let names: Vec<String> = (0..sweep.values.len()).map(|k| format!("{stem}_{k:03}.csv")).collect();
    let jobs: Vec<(usize, f64)> = sweep.values.iter().copied().enumerate().collect();
    let points = Execution::default().map(&jobs, |&(k, value)| {
        let csv = resolve(&args.out, &names[k]);
        let mut point = match sweep_point(&base, &sweep.parameter, cfg.seed, value, &csv) {
            Ok(p) => p,
            Err(e) => SweepPoint {
                index: k,
                value,
                csv: None,
                error: Some(e.to_string()),
                terminal: None,
                terminal_total: None,
                verification: None,
            },
        };
        point.index = k;
        if point.error.is_none() {
            point.csv = Some(names[k].clone());
        }
        point
    });
    let all_failed = points.iter().all(|p| p.error.is_some());
    let index = SweepIndex {
        command: "sweep",
        seed: cfg.seed,
        parameter: sweep.parameter.clone(),
        points,
    };
    let path = resolve(&args.out, &format!("{stem}_index.json"));
    write_json(&path, &index)?;
    if !args.quiet {
        for p in &index.points {
            match (&p.error, &p.verification) {
                (Some(e), _) => println!("[{}] {} = {}: error: {e}", p.index, index.parameter, p.value),
                (None, Some(v)) => println!(
                    "[{}] {} = {}: total {:.9}, checks {}",
                    p.index,
                    index.parameter,
                    p.value,
                    p.terminal_total.unwrap_or(f64::NAN),
                    if v.passed { "pass" } else { "FAIL" }
                ),
                (None, None) => println!(
                    "[{}] {} = {}: total {:.9}",
                    p.index,
                    index.parameter,
                    p.value,
                    p.terminal_total.unwrap_or(f64::NAN)
                ),
            }
        }
        println!("wrote {}", path.display());
    }
    if all_failed {
        return Err(CliError::SweepFailed(index.points.len()));
    }
    Ok(())
}
