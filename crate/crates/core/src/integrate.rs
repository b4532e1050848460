//! Explicit Runge-Kutta integration on the nonnegative orthant.
//!
//! Two schemes are available: classical RK4 with a fixed step and the
//! Dormand-Prince 5(4) pair with adaptive steps. Round-off negatives in
//! `[-1e-12, 0)` are clamped to zero; larger excursions reject the step
//! (adaptive) or abort (fixed). States are recorded on a regular time grid and
//! the run stops early once the vector field residual indicates an equilibrium.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genetics::{allele_count, Allele, GenotypeVector, MIN_TOTAL};
use crate::models::{two_phase_rhs, ReducedKind, ReducedModel, TwoPhaseParams, TwoPhaseState};

/// Largest negative component silently clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
/// Smallest adaptive step before giving up.
pub const MIN_STEP: f64 = 1e-14;

/// Autonomous vector field on `R^N`.
pub trait VectorField<const N: usize>: Sync {
    fn eval(&self, x: &[f64; N]) -> Result<[f64; N]>;
}

impl VectorField<3> for ReducedModel {
    fn eval(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        Ok(self.rhs(&GenotypeVector(*x))?.0)
    }
}

impl VectorField<6> for TwoPhaseParams {
    fn eval(&self, x: &[f64; 6]) -> Result<[f64; 6]> {
        Ok(two_phase_rhs(self, &TwoPhaseState::from_array(x))?.to_array())
    }
}

/// Wraps a closure as a [`VectorField`].
pub struct FnField<F>(pub F);

impl<const N: usize, F> VectorField<N> for FnField<F>
where
    F: Fn(&[f64; N]) -> Result<[f64; N]> + Sync,
{
    fn eval(&self, x: &[f64; N]) -> Result<[f64; N]> {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub t_end: f64,
    /// Fixed step (RK4) or initial step (adaptive).
    pub dt: f64,
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub record_every: f64,
    pub equilibrium_tol: f64,
    pub stop_at_equilibrium: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_end: 100.0,
            dt: 0.01,
            method: Method::Rk45Adaptive,
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            record_every: 0.5,
            equilibrium_tol: 1e-10,
            stop_at_equilibrium: true,
        }
    }
}

impl SimConfig {
    pub fn check(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    format!("sim.{name}"),
                    format!("must be finite and positive, got {v}"),
                ))
            }
        };
        positive("t_end", self.t_end)?;
        positive("dt", self.dt)?;
        positive("abs_tol", self.abs_tol)?;
        positive("rel_tol", self.rel_tol)?;
        positive("record_every", self.record_every)?;
        positive("equilibrium_tol", self.equilibrium_tol)?;
        if self.dt > self.t_end {
            return Err(Error::invalid("sim.dt", "must not exceed t_end"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Reached `t_end`.
    Completed,
    /// Stopped early at a state with negligible vector field.
    Equilibrium,
}

/// Recorded samples of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub status: Status,
    pub steps: usize,
}

fn max_abs<const N: usize>(x: &[f64; N]) -> f64 {
    x.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
}

/// `‖f(x)‖∞ < tol·(1 + ‖x‖∞)`.
pub fn is_equilibrium<const N: usize, F: VectorField<N>>(field: &F, x: &[f64; N], tol: f64) -> Result<bool> {
    let fx = field.eval(x)?;
    Ok(max_abs(&fx) < tol * (1.0 + max_abs(x)))
}

/// Last state of `states` if it is an equilibrium of `field`.
pub fn detect_equilibrium<const N: usize, F: VectorField<N>>(
    states: &[[f64; N]],
    field: &F,
    tol: f64,
) -> Option<[f64; N]> {
    let last = states.last()?;
    match is_equilibrium(field, last, tol) {
        Ok(true) => Some(*last),
        _ => None,
    }
}

fn axpy<const N: usize>(x: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *x;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

fn check_finite<const N: usize>(x: &[f64; N], t: f64) -> Result<()> {
    if x.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// Clamps round-off negatives; returns the first large negative, if any.
fn clamp_negatives<const N: usize>(x: &mut [f64; N]) -> Option<(usize, f64)> {
    for (i, c) in x.iter_mut().enumerate() {
        if *c < 0.0 {
            if *c < -NEGATIVE_CLAMP {
                return Some((i, *c));
            }
            *c = 0.0;
        }
    }
    None
}

fn rk4_step<const N: usize, F: VectorField<N>>(field: &F, x: &[f64; N], h: f64) -> Result<[f64; N]> {
    let k1 = field.eval(x)?;
    let k2 = field.eval(&axpy(x, h, &[(0.5, &k1)]))?;
    let k3 = field.eval(&axpy(x, h, &[(0.5, &k2)]))?;
    let k4 = field.eval(&axpy(x, h, &[(1.0, &k3)]))?;
    Ok(axpy(
        x,
        h,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    ))
}

// Dormand-Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Dp45Trial<const N: usize> {
    x: [f64; N],
    k7: [f64; N],
    err: f64,
}

fn dp45_trial<const N: usize, F: VectorField<N>>(
    field: &F,
    x: &[f64; N],
    k1: &[f64; N],
    h: f64,
    cfg: &SimConfig,
) -> Result<Dp45Trial<N>> {
    let k2 = field.eval(&axpy(x, h, &[(A21, k1)]))?;
    let k3 = field.eval(&axpy(x, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = field.eval(&axpy(x, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = field.eval(&axpy(x, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = field.eval(&axpy(
        x,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ))?;
    let x_new = axpy(x, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = field.eval(&x_new)?;
    let mut err = 0.0_f64;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = cfg.abs_tol + cfg.rel_tol * x[i].abs().max(x_new[i].abs());
        err = err.max(e.abs() / scale);
    }
    if err.is_nan() {
        err = f64::INFINITY;
    }
    Ok(Dp45Trial { x: x_new, k7, err })
}

/// Integrates `field` from `x0` over `[0, cfg.t_end]`.
pub fn integrate<const N: usize, F: VectorField<N>>(
    field: &F,
    x0: [f64; N],
    cfg: &SimConfig,
) -> Result<RawTrajectory<N>> {
    cfg.check()?;
    for (i, &c) in x0.iter().enumerate() {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid(
                format!("x0[{i}]"),
                "initial state must be finite and nonnegative",
            ));
        }
    }
    let mut traj = RawTrajectory {
        times: vec![0.0],
        states: vec![x0],
        status: Status::Completed,
        steps: 0,
    };
    if cfg.stop_at_equilibrium && is_equilibrium(field, &x0, cfg.equilibrium_tol)? {
        traj.status = Status::Equilibrium;
        return Ok(traj);
    }

    let mut x = x0;
    let mut t = 0.0;
    let mut h = cfg.dt;
    let mut k1 = field.eval(&x)?;
    let n_records = (cfg.t_end / cfg.record_every - 1e-9).ceil().max(1.0) as usize;

    for r in 1..=n_records {
        let t_rec = if r == n_records {
            cfg.t_end
        } else {
            r as f64 * cfg.record_every
        };
        match cfg.method {
            Method::Rk4Fixed => {
                let span = t_rec - t;
                let n = (span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
                let step = span / n as f64;
                for _ in 0..n {
                    let mut next = rk4_step(field, &x, step)?;
                    check_finite(&next, t + step)?;
                    if let Some((index, value)) = clamp_negatives(&mut next) {
                        return Err(Error::NegativeState {
                            t: t + step,
                            index,
                            value,
                        });
                    }
                    x = next;
                    t += step;
                    traj.steps += 1;
                }
                t = t_rec;
            }
            Method::Rk45Adaptive => {
                while t < t_rec {
                    let remaining = t_rec - t;
                    let last = h >= remaining;
                    let step = if last { remaining } else { h };
                    if let Some(index) = (0..N).find(|&i| x[i] <= 0.0 && k1[i] < -NEGATIVE_CLAMP) {
                        // the field pushes out of the orthant; no step size can fix that
                        return Err(Error::NegativeState {
                            t,
                            index,
                            value: k1[index],
                        });
                    }
                    // intermediate stages may leave the field's domain even when x is fine
                    let trial = match dp45_trial(field, &x, &k1, step, cfg) {
                        Ok(trial) => trial,
                        Err(e) => {
                            h = 0.5 * step;
                            if h < MIN_STEP {
                                return Err(e);
                            }
                            continue;
                        }
                    };
                    let mut next = trial.x;
                    let negative = next.iter().all(|c| c.is_finite()) && clamp_negatives(&mut next).is_some();
                    if trial.err <= 1.0 && !negative && next.iter().all(|c| c.is_finite()) {
                        x = next;
                        t = if last { t_rec } else { t + step };
                        k1 = if next == trial.x { trial.k7 } else { field.eval(&x)? };
                        traj.steps += 1;
                        let factor = if trial.err == 0.0 {
                            5.0
                        } else {
                            (0.9 * trial.err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        if !last || factor < 1.0 {
                            h = step * factor;
                        }
                    } else {
                        h = if negative || !trial.err.is_finite() {
                            0.5 * step
                        } else {
                            step * (0.9 * trial.err.powf(-0.2)).clamp(0.1, 0.9)
                        };
                    }
                    if h < MIN_STEP {
                        return Err(Error::StepUnderflow { t, dt: h });
                    }
                }
            }
        }
        traj.times.push(t);
        traj.states.push(x);
        if cfg.stop_at_equilibrium && is_equilibrium(field, &x, cfg.equilibrium_tol)? {
            traj.status = Status::Equilibrium;
            break;
        }
        if cfg.method == Method::Rk4Fixed {
            k1 = field.eval(&x)?;
        }
    }
    let _ = k1;
    Ok(traj)
}

/// Per-sample quantities derived from a genotype state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    /// Frequency of allele `A`.
    pub p_upper: f64,
    /// Frequency of allele `a`.
    pub p_lower: f64,
    /// `u_a·x / u_A·x` (infinite when `A` is absent, NaN at zero).
    pub ratio_a_over_upper: f64,
    pub b_star: f64,
    pub total: f64,
}

impl Derived {
    pub fn compute(model: &ReducedModel, x: &GenotypeVector) -> Result<Self> {
        let total = x.total();
        let count_a = allele_count(x, Allele::A);
        let count_la = allele_count(x, Allele::LowerA);
        let (p_upper, p_lower) = if total < MIN_TOTAL {
            (f64::NAN, f64::NAN)
        } else {
            (count_a / total, count_la / total)
        };
        let ratio_a_over_upper = if count_a > 0.0 {
            count_la / count_a
        } else if count_la > 0.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
        Ok(Derived {
            p_upper,
            p_lower,
            ratio_a_over_upper,
            b_star: model.recruitment_density(x)?,
            total,
        })
    }
}

/// Trajectory of a reduced model with derived quantities at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GenotypeVector>,
    pub derived: Vec<Derived>,
    pub status: Status,
}

impl Trajectory {
    pub fn from_raw(raw: RawTrajectory<3>, model: &ReducedModel) -> Result<Self> {
        let states: Vec<GenotypeVector> = raw.states.into_iter().map(GenotypeVector).collect();
        let derived = states
            .iter()
            .map(|x| Derived::compute(model, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            times: raw.times,
            states,
            derived,
            status: raw.status,
        })
    }

    pub fn initial(&self) -> &GenotypeVector {
        &self.states[0]
    }

    pub fn terminal(&self) -> &GenotypeVector {
        self.states
            .last()
            .expect("trajectories hold at least the initial state")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectories hold at least the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn detect_equilibrium(&self, model: &ReducedModel, tol: f64) -> Option<GenotypeVector> {
        let last = self.states.last()?;
        detect_equilibrium(&[last.0], model, tol).map(GenotypeVector)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for ((t, x), d) in self.times.iter().zip(&self.states).zip(&self.derived) {
            write_row(&mut out, *t, x, d)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

pub const CSV_HEADER: &str = "t,x1,x2,x3,pA,pa,ratio_a_over_A,b_star,total";

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row<W: Write>(out: &mut W, t: f64, x: &GenotypeVector, d: &Derived) -> io::Result<()> {
    let fields = [
        t,
        x[0],
        x[1],
        x[2],
        d.p_upper,
        d.p_lower,
        d.ratio_a_over_upper,
        d.b_star,
        d.total,
    ];
    let line: Vec<String> = fields.iter().map(|v| fmt17(*v)).collect();
    write!(out, "{}", line.join(","))
}

pub fn simulate(model: &ReducedModel, x0: &GenotypeVector, cfg: &SimConfig) -> Result<Trajectory> {
    let raw = integrate(model, x0.0, cfg)?;
    Trajectory::from_raw(raw, model)
}

/// Two-phase trajectory. The genotype columns hold the variable tracked by the
/// reduction matching the scaling mode (`L/ω` for fast adults, `A` for fast
/// pre-adults), with derived quantities computed through that reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<TwoPhaseState>,
    pub slow: Vec<GenotypeVector>,
    pub derived: Vec<Derived>,
    pub status: Status,
}

impl TwoPhaseTrajectory {
    pub fn from_raw(raw: RawTrajectory<6>, params: &TwoPhaseParams) -> Result<Self> {
        let kind: ReducedKind = params.scaling.reduced_kind();
        let reduced = params.reduce(kind)?;
        let states: Vec<TwoPhaseState> = raw.states.iter().map(TwoPhaseState::from_array).collect();
        let slow: Vec<GenotypeVector> = states.iter().map(|s| params.slow_variable(kind, s)).collect();
        let derived = slow
            .iter()
            .map(|x| Derived::compute(&reduced, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(TwoPhaseTrajectory {
            times: raw.times,
            states,
            slow,
            derived,
            status: raw.status,
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER},L1,L2,L3,A1,A2,A3")?;
        for (k, t) in self.times.iter().enumerate() {
            write_row(&mut out, *t, &self.slow[k], &self.derived[k])?;
            for v in self.states[k].to_array() {
                write!(out, ",{}", fmt17(v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn simulate_two_phase(params: &TwoPhaseParams, s0: &TwoPhaseState, cfg: &SimConfig) -> Result<TwoPhaseTrajectory> {
    params.check()?;
    let raw = integrate(params, s0.to_array(), cfg)?;
    TwoPhaseTrajectory::from_raw(raw, params)
}
