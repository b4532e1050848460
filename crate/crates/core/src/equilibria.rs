//! Monomorphic capacities, the selectively neutral equilibrium level, and the
//! asymptotic population bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genetics::{mendel_offspring, GenotypeVector};
use crate::models::{ReducedKind, ReducedModel};
use crate::par::Execution;
use crate::roots::{bisect_increasing, expand_upper, Bracket};

/// Largest residual accepted for a capacity solve.
pub const CAPACITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl CapacityResult {
    fn zero() -> Self {
        CapacityResult {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
        }
    }
}

/// Solves `g(c) = 0` for an increasing `g` with `g(0) < 0`, starting the
/// bracket search at `start`.
fn solve_increasing<F>(g: F, start: f64, what: &'static str) -> Result<CapacityResult>
where
    F: Fn(f64) -> Result<f64>,
{
    let bracket = expand_upper(&g, 0.0, start, what)?;
    let (root, bracket) = bisect_increasing(&g, bracket, 0.0)?;
    let mut best = root;
    // one secant step inside the final bracket picks up what bisection cannot resolve
    if bracket.f_hi != bracket.f_lo && best.residual != 0.0 {
        let t = bracket.lo - bracket.f_lo * (bracket.hi - bracket.lo) / (bracket.f_hi - bracket.f_lo);
        if t > bracket.lo && t < bracket.hi {
            let r = g(t)?;
            if r.abs() < best.residual.abs() {
                best.value = t;
                best.residual = r;
            }
        }
    }
    if best.residual.abs() > CAPACITY_TOL {
        return Err(Error::NonConvergence {
            what,
            iterations: best.iterations,
        });
    }
    Ok(CapacityResult {
        value: best.value,
        residual: best.residual,
        iterations: best.iterations,
    })
}

/// `c_i*` for a homozygous genotype `i ∈ {1, 3}`: the positive `c` with
/// `m_i(b*(c·e_i)) = μ_i(c·w_i)`, or exactly 0 when `m_i(0) ≤ μ_i(0)`.
pub fn monomorphic_capacity(model: &ReducedModel, i: usize) -> Result<CapacityResult> {
    monomorphic_capacity_from(model, i, 1.0)
}

/// [`monomorphic_capacity`] with the bracket search started at `start`.
pub fn monomorphic_capacity_from(model: &ReducedModel, i: usize, start: f64) -> Result<CapacityResult> {
    if i != 1 && i != 3 {
        return Err(Error::invalid("i", format!("genotype must be 1 or 3, got {i}")));
    }
    let rates = &model.rates;
    let k = i - 1;
    let (m, mu) = (&rates.m[k], &rates.mu[k]);
    if m.eval(0.0) <= mu.eval(0.0) {
        return Ok(CapacityResult::zero());
    }
    let w = rates.w[k];
    let g = |c: f64| {
        let b = rates.solve_bstar(&GenotypeVector::basis(i).scale(c))?;
        Ok(mu.eval(c * w) - m.eval(b))
    };
    solve_increasing(g, start, "monomorphic capacity")
}

/// `c_sn*` of a selectively neutral model along `x_dir`: the `c` with
/// `m(b_sn(c·vᵀx_dir)) = μ(c·wᵀx_dir)`.
///
/// A non-viable model (`m(0) ≤ μ(0)`) yields 0, or an error when `strict`.
pub fn neutral_capacity(model: &ReducedModel, x_dir: &GenotypeVector, strict: bool) -> Result<CapacityResult> {
    let rates = &model.rates;
    if !rates.is_selectively_neutral() {
        return Err(Error::NeutralityViolation(
            "recruitment or mortality differs between genotypes".into(),
        ));
    }
    if x_dir.0.iter().any(|c| !(c.is_finite() && *c >= 0.0)) || x_dir.is_zero() {
        return Err(Error::invalid("x_dir", "direction must be nonnegative and nonzero"));
    }
    let (m, mu) = (&rates.m[0], &rates.mu[0]);
    if m.eval(0.0) <= mu.eval(0.0) {
        if strict {
            return Err(Error::AssumptionViolation(format!(
                "neutral model is not viable: m(0) = {} ≤ μ(0) = {}",
                m.eval(0.0),
                mu.eval(0.0)
            )));
        }
        return Ok(CapacityResult::zero());
    }
    let sv = x_dir.dot(&rates.v);
    let sw = x_dir.dot(&rates.w);
    let g = |c: f64| {
        let b = rates.solve_bstar_neutral(c * sv)?;
        Ok(mu.eval(c * sw) - m.eval(b))
    };
    solve_increasing(g, 1.0 / sw, "neutral capacity")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConfig {
    /// Barycentric subdivisions of the direction simplex.
    pub subdivisions: usize,
    /// Relative width of the final bisection bracket.
    pub rel_width: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            subdivisions: 20,
            rel_width: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationBound {
    /// Grid-certified bound and `grid_max − 1` as residual.
    pub capacity: CapacityResult,
    /// Largest sampled ratio `m_i/μ_i` at the returned bound.
    pub grid_max: f64,
    pub directions: usize,
    /// The ratio is constant across the final bracket, so the crossing is not sharp.
    pub flat: bool,
}

/// Points of `{x ≥ 0 : wᵀx = 1}` on a barycentric grid with `n` subdivisions.
pub fn simplex_directions(w: &[f64; 3], n: usize) -> Vec<GenotypeVector> {
    let n = n.max(1);
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=(n - i) {
            let k = n - i - j;
            let x = GenotypeVector::new(i as f64, j as f64, k as f64);
            out.push(x.scale(1.0 / x.dot(w)));
        }
    }
    out
}

fn worst_ratio(model: &ReducedModel, dirs: &[GenotypeVector], c: f64, exec: Execution) -> Result<f64> {
    let rates = &model.rates;
    let mu = rates.mortality(c);
    let per_dir = exec.map(dirs, |d| -> Result<f64> {
        let at = match model.kind {
            ReducedKind::Fast => d.scale(c),
            ReducedKind::Slow => mendel_offspring(d)?.scale(c),
        };
        let m = rates.recruitment(rates.solve_bstar(&at)?);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            let r = if mu[i] > 0.0 {
                m[i] / mu[i]
            } else if m[i] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            worst = worst.max(r);
        }
        Ok(worst)
    });
    per_dir.into_iter().try_fold(0.0_f64, |acc, r| Ok(acc.max(r?)))
}

/// Upper estimate of the level `c*` beyond which the weighted population
/// `wᵀx` can no longer grow: the threshold where the largest sampled
/// recruitment/mortality ratio falls to 1.
pub fn population_bound(model: &ReducedModel, cfg: &BoundConfig, exec: Execution) -> Result<PopulationBound> {
    if !(cfg.rel_width.is_finite() && cfg.rel_width > 0.0) {
        return Err(Error::invalid("rel_width", "must be finite and positive"));
    }
    let dirs = simplex_directions(&model.rates.w, cfg.subdivisions);
    let phi = |c: f64| worst_ratio(model, &dirs, c, exec);
    let phi0 = phi(0.0)?;
    if phi0 <= 1.0 {
        return Ok(PopulationBound {
            capacity: CapacityResult {
                value: 0.0,
                residual: phi0 - 1.0,
                iterations: 0,
            },
            grid_max: phi0,
            directions: dirs.len(),
            flat: false,
        });
    }
    let g = |c: f64| Ok(1.0 - phi(c)?);
    let Bracket { lo, f_lo, hi, f_hi } = expand_upper(&g, 0.0, 1.0, "population bound")?;
    let mut bracket = Bracket { lo, f_lo, hi, f_hi };
    let mut iterations = 0;
    while bracket.hi - bracket.lo > cfg.rel_width * bracket.hi {
        let (_, b) = bisect_increasing(g, bracket, cfg.rel_width * bracket.hi)?;
        iterations += 1;
        bracket = b;
        if iterations > 64 {
            break;
        }
    }
    let grid_max = 1.0 - bracket.f_hi;
    let flat = (bracket.f_hi - bracket.f_lo).abs() <= 1e-12;
    Ok(PopulationBound {
        capacity: CapacityResult {
            value: bracket.hi,
            residual: grid_max - 1.0,
            iterations,
        },
        grid_max,
        directions: dirs.len(),
        flat,
    })
}
