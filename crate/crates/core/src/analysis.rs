//! Mean allelic rates and numerical certification of the qualitative
//! behaviour of trajectories: Hardy-Weinberg conservation under neutrality,
//! convergence to the fittest homozygote under selection, ordering of the mean
//! allelic rates, fidelity of the slow-manifold reductions and boundedness.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::equilibria::{monomorphic_capacity, neutral_capacity};
use crate::error::{Error, Result};
use crate::genetics::{
    allele_count, hardy_weinberg_proportions, is_polymorphic, mendel_offspring, Allele, GenotypeVector, U_A, U_LOWER_A,
};
use crate::integrate::{integrate, simulate, SimConfig, Trajectory};
use crate::models::{ReducedKind, ReducedModel, TwoPhaseParams};
use crate::par::Execution;
use crate::sampling::{random_polymorphic_state, rng};

/// Per-allele averages of the genotype rates, weighted by allele copies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanAllelicRates {
    pub kind: ReducedKind,
    pub m_tilde_upper: f64,
    pub m_tilde_lower: f64,
    pub mu_tilde_upper: f64,
    pub mu_tilde_lower: f64,
    /// Genotype recruitment rates at the relevant `b*`.
    pub m: [f64; 3],
    /// Genotype mortality rates at `wᵀx`.
    pub mu: [f64; 3],
}

pub fn mean_allelic_rates(model: &ReducedModel, x: &GenotypeVector) -> Result<MeanAllelicRates> {
    if !is_polymorphic(x) {
        return Err(Error::NotPolymorphic(x.0));
    }
    let rates = &model.rates;
    let count_upper = allele_count(x, Allele::A);
    let count_lower = allele_count(x, Allele::LowerA);
    let mu = rates.mortality(x.dot(&rates.w));
    let (m, recruited) = match model.kind {
        ReducedKind::Fast => {
            let m = rates.recruitment(rates.solve_bstar(x)?);
            (m, x.hadamard(&m))
        }
        ReducedKind::Slow => {
            let offspring = mendel_offspring(x)?;
            let m = rates.recruitment(rates.solve_bstar(&offspring)?);
            (m, offspring.hadamard(&m))
        }
    };
    let dying = x.hadamard(&mu);
    Ok(MeanAllelicRates {
        kind: model.kind,
        m_tilde_upper: recruited.dot(&U_A) / count_upper,
        m_tilde_lower: recruited.dot(&U_LOWER_A) / count_lower,
        mu_tilde_upper: dying.dot(&U_A) / count_upper,
        mu_tilde_lower: dying.dot(&U_LOWER_A) / count_lower,
        m,
        mu,
    })
}

/// `u_aᵀx / u_Aᵀx`.
pub fn allelic_ratio(x: &GenotypeVector) -> Result<f64> {
    let upper = allele_count(x, Allele::A);
    if !(upper > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    Ok(allele_count(x, Allele::LowerA) / upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub worst_deviation: f64,
    /// Time of the worst deviation, for trajectory checks.
    pub at_time: Option<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    /// Reported quantities that are not asserted.
    pub metrics: BTreeMap<String, f64>,
    pub passed: bool,
}

impl VerificationReport {
    fn new() -> Self {
        VerificationReport {
            passed: true,
            ..Default::default()
        }
    }

    /// Records a check passing when `worst ≤ threshold`.
    pub fn push(&mut self, name: impl Into<String>, worst: f64, at_time: Option<f64>, threshold: f64) {
        self.push_outcome(name, worst <= threshold, worst, at_time, threshold);
    }

    pub fn push_outcome(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        worst: f64,
        at_time: Option<f64>,
        threshold: f64,
    ) {
        self.passed &= passed;
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            worst_deviation: worst,
            at_time,
            threshold,
        });
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends `other`, prefixing its names.
    pub fn merge(&mut self, prefix: &str, other: VerificationReport) {
        self.passed &= other.passed;
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        for (k, v) in other.metrics {
            self.metrics.insert(format!("{prefix}.{k}"), v);
        }
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Tracks the largest value seen and where it occurred.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    at: Option<f64>,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, at: None }
    }

    fn see(&mut self, value: f64, at: f64) {
        // NaN counts as the worst possible outcome
        if value.is_nan() || value > self.value {
            self.value = if value.is_nan() { f64::INFINITY } else { value };
            self.at = Some(at);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardyWeinbergTolerances {
    pub frequency: f64,
    pub state: f64,
}

impl Default for HardyWeinbergTolerances {
    fn default() -> Self {
        HardyWeinbergTolerances {
            frequency: 1e-7,
            state: 1e-5,
        }
    }
}

/// Window maxima of `values` over the second half, in order.
fn tail_envelope(values: &[f64]) -> Vec<f64> {
    let tail = &values[values.len() / 2..];
    if tail.is_empty() {
        return Vec::new();
    }
    let width = tail.len().div_ceil(8).max(1);
    tail.chunks(width)
        .map(|w| w.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .collect()
}

/// Worst increase between consecutive window maxima, relative to the largest
/// value of the whole series so round-off at the floor does not count.
fn envelope_growth(values: &[f64]) -> f64 {
    let env = tail_envelope(values);
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    env.windows(2)
        .map(|p| (p[1] - p[0]).max(0.0) / scale)
        .fold(0.0_f64, f64::max)
}

/// Checks frequency conservation, convergence to the Hardy-Weinberg
/// equilibrium fixed by the initial allele frequency, and decay of the
/// Hardy-Weinberg residuals.
pub fn verify_hardy_weinberg(
    traj: &Trajectory,
    model: &ReducedModel,
    tol: &HardyWeinbergTolerances,
) -> Result<VerificationReport> {
    if !model.is_selectively_neutral() {
        return Err(Error::NeutralityViolation(
            "Hardy-Weinberg verification needs identical rates for every genotype".into(),
        ));
    }
    let x0 = traj.initial();
    if x0.is_zero() {
        return Err(Error::ZeroPopulation { total: 0.0 });
    }
    let mut report = VerificationReport::new();
    let p0 = traj.derived[0].p_upper;

    let mut freq = Worst::new();
    for (t, d) in traj.times.iter().zip(&traj.derived) {
        freq.see((d.p_upper - p0).abs(), *t);
    }
    report.push("allele_frequency", freq.value, freq.at, tol.frequency);

    let h = hardy_weinberg_proportions(p0);
    let c = neutral_capacity(model, &h, false)?;
    let target = h.scale(c.value);
    let end = traj.terminal();
    report.push(
        "terminal_state",
        (*end - target).max_abs(),
        Some(traj.t_end()),
        tol.state,
    );
    report.metric("c_sn", c.value);
    report.metric("p_a0", p0);

    let q0 = 1.0 - p0;
    if p0 > 0.0 && q0 > 0.0 {
        let (mut r1, mut r2) = (Vec::new(), Vec::new());
        for (x, d) in traj.states.iter().zip(&traj.derived) {
            let (p, q) = (d.p_upper, d.p_lower);
            let het = x[1] / (2.0 * p * q);
            r1.push(x[0] / (p * p) - het);
            r2.push(x[2] / (q * q) - het);
        }
        let growth = envelope_growth(&r1).max(envelope_growth(&r2));
        report.push("residual_decay", growth, None, 1e-9);
        report.metric(
            "terminal_residual",
            r1.last().unwrap().abs().max(r2.last().unwrap().abs()),
        );
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionTolerances {
    /// Allowed increase of the allelic ratio between samples.
    pub ratio_slack: f64,
    /// Required relative reduction of the allelic ratio over the horizon.
    pub min_reduction: f64,
    pub state: f64,
    pub frequency: f64,
}

impl Default for SelectionTolerances {
    fn default() -> Self {
        SelectionTolerances {
            ratio_slack: 1e-10,
            min_reduction: 1e-6,
            state: 1e-4,
            frequency: 1e-4,
        }
    }
}

/// Least-squares slope of `ln y` against `t` over positive samples.
fn log_slope(ts: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 1e-300 && y.is_finite())
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Checks that the allelic ratio decreases along the trajectory and that the
/// population converges to the fittest homozygote present at the start.
pub fn verify_selection_convergence(
    traj: &Trajectory,
    model: &ReducedModel,
    tol: &SelectionTolerances,
) -> Result<VerificationReport> {
    let validation = model.rates.validate();
    if !validation.ass1.holds {
        return Err(Error::AssumptionViolation(validation.ass1.failures.join("; ")));
    }
    let x0 = traj.initial();
    let mut report = VerificationReport::new();
    let upper_present = allele_count(x0, Allele::A) > 0.0;
    let lower_present = allele_count(x0, Allele::LowerA) > 0.0;

    if upper_present && lower_present {
        let ratios = traj.states.iter().map(allelic_ratio).collect::<Result<Vec<f64>>>()?;
        let mut rise = Worst::new();
        for (k, pair) in ratios.windows(2).enumerate() {
            rise.see(pair[1] - pair[0], traj.times[k + 1]);
        }
        report.push("ratio_nonincreasing", rise.value, rise.at, tol.ratio_slack);
        let (first, last) = (ratios[0], *ratios.last().unwrap());
        let reduction = 1.0 - last / first;
        report.push_outcome(
            "ratio_reduction",
            reduction >= tol.min_reduction,
            reduction,
            Some(traj.t_end()),
            tol.min_reduction,
        );
        let half = ratios.len() / 2;
        if let Some(slope) = log_slope(&traj.times[half..], &ratios[half..]) {
            report.metric("ratio_log_slope", slope);
        }
    }

    let (genotype, c) = if upper_present {
        (1, monomorphic_capacity(model, 1)?)
    } else {
        (3, monomorphic_capacity(model, 3)?)
    };
    let target = if x0.is_zero() {
        GenotypeVector::ZERO
    } else {
        GenotypeVector::basis(genotype).scale(c.value)
    };
    let end = traj.terminal();
    report.push(
        "terminal_state",
        (*end - target).max_abs(),
        Some(traj.t_end()),
        tol.state,
    );
    report.metric(if genotype == 1 { "c1" } else { "c3" }, c.value);

    let total = end.total();
    if genotype == 1 && c.value > 0.0 && total > 0.0 {
        let worst = (end[1] / total).max(end[2] / total);
        report.push("minor_genotype_frequency", worst, Some(traj.t_end()), tol.frequency);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrderingConfig {
    pub samples: usize,
    /// Slack, scaled by `max(1, |value|)`.
    pub slack: f64,
    pub seed: u64,
}

impl Default for OrderingConfig {
    fn default() -> Self {
        OrderingConfig {
            samples: 1000,
            slack: 1e-12,
            seed: 42,
        }
    }
}

/// Residuals of every ordering/identity at one state (positive means violated).
#[derive(Debug, Clone, Copy, Default)]
struct OrderingSample {
    recruitment_chain: f64,
    mortality_chain: f64,
    allelic_balance: f64,
    gap_sign: f64,
    gap_identity: f64,
}

fn chain_violation(chain: [f64; 5], slack: f64) -> f64 {
    chain
        .windows(2)
        .map(|p| (p[1] - p[0]) / (slack * p[0].abs().max(p[1].abs()).max(1.0)))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn ordering_sample(model: &ReducedModel, x: &GenotypeVector, slack: f64) -> Result<OrderingSample> {
    let r = mean_allelic_rates(model, x)?;
    let (m, mu) = (r.m, r.mu);
    // violations expressed in units of the scaled slack; ≤ 1 passes
    let recruitment_chain = chain_violation([m[0], r.m_tilde_upper, m[1], r.m_tilde_lower, m[2]], slack);
    let mortality_chain = chain_violation([-mu[0], -r.mu_tilde_upper, -mu[1], -r.mu_tilde_lower, -mu[2]], slack);

    let rhs = model.rhs(x)?;
    let birth = model.birth(x)?;
    let mut allelic_balance = 0.0_f64;
    for (u, mt, mut_) in [
        (&U_A, r.m_tilde_upper, r.mu_tilde_upper),
        (&U_LOWER_A, r.m_tilde_lower, r.mu_tilde_lower),
    ] {
        let count = x.dot(u);
        let scale = birth.dot(u).abs().max(x.hadamard(&mu).dot(u).abs()).max(1.0);
        allelic_balance = allelic_balance.max((rhs.dot(u) - (mt - mut_) * count).abs() / scale);
    }

    let gap_upper = r.m_tilde_upper - m[1] - r.mu_tilde_upper + mu[1];
    let gap_lower = m[1] - r.m_tilde_lower + r.mu_tilde_lower - mu[1];
    let count_upper = x.dot(&U_A);
    let count_lower = x.dot(&U_LOWER_A);
    let (closed_upper, closed_lower) = match model.kind {
        ReducedKind::Fast => (
            x[0] / count_upper * (m[0] - m[1] + mu[1] - mu[0]),
            x[2] / count_lower * (m[1] - m[2] + mu[2] - mu[1]),
        ),
        ReducedKind::Slow => {
            let a = mendel_offspring(x)?;
            (
                a[0] / (a[0] + 0.5 * a[1]) * (m[0] - m[1]) + x[0] / count_upper * (mu[1] - mu[0]),
                a[2] / (a[2] + 0.5 * a[1]) * (m[1] - m[2]) + x[2] / count_lower * (mu[2] - mu[1]),
            )
        }
    };
    let scale = m.iter().chain(mu.iter()).fold(1.0_f64, |s, v| s.max(v.abs()));
    let gap_sign = (-gap_upper).max(-gap_lower) / scale;
    let gap_identity = ((gap_upper - closed_upper).abs()).max((gap_lower - closed_lower).abs()) / scale;
    Ok(OrderingSample {
        recruitment_chain,
        mortality_chain,
        allelic_balance,
        gap_sign,
        gap_identity,
    })
}

/// Samples random polymorphic states and checks, for both reductions, the
/// ordering of the mean allelic rates between the genotype rates, the allelic
/// balance identity, and the decomposition of the fitness gap into two
/// nonnegative terms.
pub fn verify_rate_ordering(model: &ReducedModel, cfg: &OrderingConfig, exec: Execution) -> Result<VerificationReport> {
    let mut r = rng(cfg.seed);
    let states: Vec<GenotypeVector> = (0..cfg.samples).map(|_| random_polymorphic_state(&mut r)).collect();
    let mut report = VerificationReport::new();
    for kind in ReducedKind::BOTH {
        let m = model.with_kind(kind);
        let samples = exec
            .map(&states, |x| ordering_sample(&m, x, cfg.slack))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let worst = |f: fn(&OrderingSample) -> f64| samples.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let prefix = match kind {
            ReducedKind::Fast => "fast",
            ReducedKind::Slow => "slow",
        };
        // chains are reported in units of the scaled slack
        report.push(
            format!("{prefix}.recruitment_chain"),
            worst(|s| s.recruitment_chain),
            None,
            1.0,
        );
        report.push(
            format!("{prefix}.mortality_chain"),
            worst(|s| s.mortality_chain),
            None,
            1.0,
        );
        report.push(
            format!("{prefix}.allelic_balance"),
            worst(|s| s.allelic_balance),
            None,
            1e-12,
        );
        report.push(format!("{prefix}.gap_nonnegative"), worst(|s| s.gap_sign), None, 1e-12);
        report.push(
            format!("{prefix}.gap_decomposition"),
            worst(|s| s.gap_identity),
            None,
            1e-12,
        );
    }
    report.metric("samples", cfg.samples as f64);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldConfig {
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    pub max_ratio: f64,
    pub record_every: f64,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        ManifoldConfig {
            epsilons: vec![0.1, 0.05, 0.025],
            horizon: 10.0,
            max_ratio: 0.7,
            record_every: 0.05,
        }
    }
}

/// Largest deviation over time between the slow variable of the two-phase
/// system, started on the manifold above `x0`, and the reduced trajectory.
pub fn manifold_deviation(
    p: &TwoPhaseParams,
    kind: ReducedKind,
    x0: &GenotypeVector,
    epsilon: f64,
    horizon: f64,
    record_every: f64,
) -> Result<(f64, f64)> {
    let full = p.with_epsilon(epsilon, kind.scaling_mode());
    let reduced = p.reduce(kind)?;
    let cfg = SimConfig {
        t_end: horizon,
        dt: 1e-3 * epsilon.min(1.0),
        abs_tol: 1e-11,
        rel_tol: 1e-10,
        record_every,
        stop_at_equilibrium: false,
        ..SimConfig::default()
    };
    let s0 = full.manifold_state(kind, x0)?;
    let stiff = integrate(&full, s0.to_array(), &cfg)?;
    let slow = integrate(&reduced, x0.0, &cfg)?;
    let mut worst = Worst::new();
    for (k, (t, s)) in stiff.times.iter().zip(&stiff.states).enumerate() {
        let state = crate::models::TwoPhaseState::from_array(s);
        let y = full.slow_variable(kind, &state);
        worst.see((y - GenotypeVector(slow.states[k])).max_abs(), *t);
    }
    Ok((worst.value, worst.at.unwrap_or(0.0)))
}

/// Checks that the reduction error shrinks as the phase separation grows.
pub fn slow_manifold_consistency(
    p: &TwoPhaseParams,
    kind: ReducedKind,
    x0: &GenotypeVector,
    cfg: &ManifoldConfig,
    exec: Execution,
) -> Result<VerificationReport> {
    if cfg.epsilons.is_empty() {
        return Err(Error::invalid("epsilons", "at least one value is required"));
    }
    if cfg.epsilons.windows(2).any(|e| e[1] >= e[0]) || cfg.epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("epsilons", "must be positive and strictly decreasing"));
    }
    p.check()?;
    let errors = exec
        .map(&cfg.epsilons, |&eps| {
            manifold_deviation(p, kind, x0, eps, cfg.horizon, cfg.record_every)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new();
    for (eps, (err, at)) in cfg.epsilons.iter().zip(&errors) {
        report.metric(format!("error[eps={eps}]"), *err);
        report.metric(format!("at_time[eps={eps}]"), *at);
    }
    if errors.len() > 1 {
        let mut worst = f64::NEG_INFINITY;
        let mut worst_eps = cfg.epsilons[1];
        for (k, pair) in errors.windows(2).enumerate() {
            let ratio = pair[1].0 / pair[0].0;
            if ratio > worst || ratio.is_nan() {
                worst = ratio;
                worst_eps = cfg.epsilons[k + 1];
            }
        }
        report.push_outcome("error_ratio", worst <= cfg.max_ratio, worst, None, cfg.max_ratio);
        report.metric("worst_ratio_eps", worst_eps);
    }
    Ok(report)
}

/// Checks that `𝟙ᵀx` stays below `bound + slack` over the last `tail_fraction`
/// of the recorded samples.
pub fn verify_boundedness(traj: &Trajectory, bound: f64, slack: f64, tail_fraction: f64) -> VerificationReport {
    let n = traj.len();
    let skip = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * n as f64).floor() as usize;
    let mut excess = Worst::new();
    excess.value = f64::NEG_INFINITY;
    for (t, d) in traj.times.iter().zip(&traj.derived).skip(skip.min(n.saturating_sub(1))) {
        excess.see(d.total - bound, *t);
    }
    let mut report = VerificationReport::new();
    report.push("tail_total", excess.value, excess.at, slack);
    report.metric("bound", bound);
    report
}

/// Runs a reduced simulation and returns it with its boundedness report.
pub fn simulate_and_bound(
    model: &ReducedModel,
    x0: &GenotypeVector,
    cfg: &SimConfig,
    bound: f64,
) -> Result<(Trajectory, VerificationReport)> {
    let traj = simulate(model, x0, cfg)?;
    let report = verify_boundedness(&traj, bound, 1e-6, 0.25);
    Ok((traj, report))
}
