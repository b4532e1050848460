//! Density-dependent recruitment and mortality rates, their assumption checks,
//! and the implicit competition density `b*(x)` solving `b = Σ v_i m_i(b) x_i`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genetics::GenotypeVector;
use crate::roots::{bisect_increasing, Bracket};

/// Declared monotone direction of a tabulated rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Decreasing,
    Increasing,
    Constant,
}

/// A scalar rate `z ↦ r(z)` on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RateSpec", into = "RateSpec")]
pub enum RateFunction {
    /// `a / (1 + βz)`
    RationalDecay { a: f64, beta: f64 },
    /// `a·exp(−βz)`
    ExpDecay { a: f64, beta: f64 },
    /// `c + d·z`
    AffineGrowth { c: f64, d: f64 },
    /// `c + d·z^p`
    PowerGrowth { c: f64, d: f64, p: f64 },
    /// Piecewise-linear through `(z, r)` knots, constant beyond the ends.
    Tabulated {
        knots: Vec<(f64, f64)>,
        direction: Monotonicity,
    },
    /// `numerator / (shift + inner(z))`
    Reciprocal {
        numerator: f64,
        shift: f64,
        inner: Box<RateFunction>,
    },
    /// `shift + inner(z)`
    Shifted { shift: f64, inner: Box<RateFunction> },
}

impl RateFunction {
    pub fn rational_decay(a: f64, beta: f64) -> Self {
        RateFunction::RationalDecay { a, beta }
    }

    pub fn exp_decay(a: f64, beta: f64) -> Self {
        RateFunction::ExpDecay { a, beta }
    }

    pub fn affine(c: f64, d: f64) -> Self {
        RateFunction::AffineGrowth { c, d }
    }

    pub fn power(c: f64, d: f64, p: f64) -> Self {
        RateFunction::PowerGrowth { c, d, p }
    }

    pub fn tabulated(knots: Vec<(f64, f64)>, direction: Monotonicity) -> Result<Self> {
        let f = RateFunction::Tabulated { knots, direction };
        f.check_parameters("tabulated")?;
        Ok(f)
    }

    pub fn reciprocal(numerator: f64, shift: f64, inner: RateFunction) -> Self {
        RateFunction::Reciprocal {
            numerator,
            shift,
            inner: Box::new(inner),
        }
    }

    pub fn shifted(shift: f64, inner: RateFunction) -> Self {
        RateFunction::Shifted {
            shift,
            inner: Box::new(inner),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            RateFunction::RationalDecay { a, beta } => a / (1.0 + beta * z),
            RateFunction::ExpDecay { a, beta } => a * (-beta * z).exp(),
            RateFunction::AffineGrowth { c, d } => c + d * z,
            RateFunction::PowerGrowth { c, d, p } => c + d * z.powf(*p),
            RateFunction::Tabulated { knots, .. } => interpolate(knots, z).0,
            RateFunction::Reciprocal {
                numerator,
                shift,
                inner,
            } => numerator / (shift + inner.eval(z)),
            RateFunction::Shifted { shift, inner } => shift + inner.eval(z),
        }
    }

    /// Right derivative; may be infinite (e.g. `z^p` with `p < 1` at 0).
    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            RateFunction::RationalDecay { a, beta } => {
                let den = 1.0 + beta * z;
                -a * beta / (den * den)
            }
            RateFunction::ExpDecay { a, beta } => -a * beta * (-beta * z).exp(),
            RateFunction::AffineGrowth { d, .. } => *d,
            RateFunction::PowerGrowth { d, p, .. } => {
                if *d == 0.0 {
                    0.0
                } else {
                    d * p * z.powf(p - 1.0)
                }
            }
            RateFunction::Tabulated { knots, .. } => interpolate(knots, z).1,
            RateFunction::Reciprocal {
                numerator,
                shift,
                inner,
            } => {
                let den = shift + inner.eval(z);
                -numerator * inner.derivative(z) / (den * den)
            }
            RateFunction::Shifted { inner, .. } => inner.derivative(z),
        }
    }

    /// Monotone direction derived from the parameters (or declared, for tables).
    pub fn monotonicity(&self) -> Monotonicity {
        match self {
            RateFunction::RationalDecay { a, beta } | RateFunction::ExpDecay { a, beta } => {
                if *a == 0.0 || *beta == 0.0 {
                    Monotonicity::Constant
                } else {
                    Monotonicity::Decreasing
                }
            }
            RateFunction::AffineGrowth { d, .. } | RateFunction::PowerGrowth { d, .. } => {
                if *d == 0.0 {
                    Monotonicity::Constant
                } else {
                    Monotonicity::Increasing
                }
            }
            RateFunction::Tabulated { direction, .. } => *direction,
            RateFunction::Reciprocal { numerator, inner, .. } => match inner.monotonicity() {
                _ if *numerator == 0.0 => Monotonicity::Constant,
                Monotonicity::Increasing => Monotonicity::Decreasing,
                Monotonicity::Decreasing => Monotonicity::Increasing,
                Monotonicity::Constant => Monotonicity::Constant,
            },
            RateFunction::Shifted { inner, .. } => inner.monotonicity(),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        matches!(self.monotonicity(), Monotonicity::Decreasing | Monotonicity::Constant)
    }

    pub fn is_nondecreasing(&self) -> bool {
        matches!(self.monotonicity(), Monotonicity::Increasing | Monotonicity::Constant)
    }

    /// Checks parameter signs and, for tables, that the knots follow the declared direction.
    pub fn check_parameters(&self, field: &str) -> Result<()> {
        let nonneg = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    format!("{field}.{name}"),
                    format!("must be finite and nonnegative, got {v}"),
                ))
            }
        };
        match self {
            RateFunction::RationalDecay { a, beta } | RateFunction::ExpDecay { a, beta } => {
                nonneg("a", *a)?;
                nonneg("beta", *beta)
            }
            RateFunction::AffineGrowth { c, d } => {
                nonneg("c", *c)?;
                nonneg("d", *d)
            }
            RateFunction::PowerGrowth { c, d, p } => {
                nonneg("c", *c)?;
                nonneg("d", *d)?;
                if p.is_finite() && *p > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        format!("{field}.p"),
                        format!("exponent must be positive, got {p}"),
                    ))
                }
            }
            RateFunction::Tabulated { knots, direction } => check_knots(field, knots, *direction),
            RateFunction::Reciprocal {
                numerator,
                shift,
                inner,
            } => {
                nonneg("numerator", *numerator)?;
                nonneg("shift", *shift)?;
                inner.check_parameters(&format!("{field}.inner"))?;
                if !inner.is_nondecreasing() {
                    return Err(Error::invalid(
                        format!("{field}.inner"),
                        "reciprocal rates need a nondecreasing inner function",
                    ));
                }
                if shift + inner.eval(0.0) <= 0.0 {
                    return Err(Error::DivisionDomain(format!(
                        "{field}: denominator vanishes at density 0"
                    )));
                }
                Ok(())
            }
            RateFunction::Shifted { shift, inner } => {
                nonneg("shift", *shift)?;
                inner.check_parameters(&format!("{field}.inner"))
            }
        }
    }
}

fn check_knots(field: &str, knots: &[(f64, f64)], direction: Monotonicity) -> Result<()> {
    if knots.is_empty() {
        return Err(Error::invalid(field, "tabulated rate needs at least one knot"));
    }
    if knots[0].0 != 0.0 {
        return Err(Error::invalid(field, "first knot must sit at density 0"));
    }
    for pair in knots.windows(2) {
        let ((z0, r0), (z1, r1)) = (pair[0], pair[1]);
        if z1 <= z0 {
            return Err(Error::invalid(field, "knot densities must be strictly increasing"));
        }
        let ok = match direction {
            Monotonicity::Decreasing => r1 <= r0,
            Monotonicity::Increasing => r1 >= r0,
            Monotonicity::Constant => r1 == r0,
        };
        if !ok {
            return Err(Error::invalid(
                field,
                format!("knot values do not follow the declared {direction:?} direction"),
            ));
        }
    }
    if knots.iter().any(|(z, r)| !z.is_finite() || !r.is_finite() || *r < 0.0) {
        return Err(Error::invalid(field, "knots must be finite with nonnegative values"));
    }
    Ok(())
}

/// Value and slope of the piecewise-linear interpolant.
fn interpolate(knots: &[(f64, f64)], z: f64) -> (f64, f64) {
    let last = knots[knots.len() - 1];
    if z <= knots[0].0 {
        return (knots[0].1, 0.0);
    }
    if z >= last.0 {
        return (last.1, 0.0);
    }
    let k = knots.partition_point(|(kz, _)| *kz <= z);
    let (z0, r0) = knots[k - 1];
    let (z1, r1) = knots[k];
    let slope = (r1 - r0) / (z1 - z0);
    (r0 + slope * (z - z0), slope)
}

impl fmt::Display for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateFunction::RationalDecay { a, beta } => write!(f, "{a}/(1+{beta}z)"),
            RateFunction::ExpDecay { a, beta } => write!(f, "{a}exp(-{beta}z)"),
            RateFunction::AffineGrowth { c, d } => write!(f, "{c}+{d}z"),
            RateFunction::PowerGrowth { c, d, p } => write!(f, "{c}+{d}z^{p}"),
            RateFunction::Tabulated { knots, .. } => write!(f, "table[{}]", knots.len()),
            RateFunction::Reciprocal {
                numerator,
                shift,
                inner,
            } => write!(f, "{numerator}/({shift}+{inner})"),
            RateFunction::Shifted { shift, inner } => write!(f, "{shift}+({inner})"),
        }
    }
}

/// Serialized form of a rate: a family name and its parameter list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Monotonicity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<RateSpec>>,
}

impl RateSpec {
    fn simple(family: &str, params: Vec<f64>) -> Self {
        RateSpec {
            family: family.to_string(),
            params,
            knots: None,
            direction: None,
            inner: None,
        }
    }
}

impl From<RateFunction> for RateSpec {
    fn from(f: RateFunction) -> Self {
        match f {
            RateFunction::RationalDecay { a, beta } => RateSpec::simple("rational_decay", vec![a, beta]),
            RateFunction::ExpDecay { a, beta } => RateSpec::simple("exp_decay", vec![a, beta]),
            RateFunction::AffineGrowth { c, d } => RateSpec::simple("affine_growth", vec![c, d]),
            RateFunction::PowerGrowth { c, d, p } => RateSpec::simple("power_growth", vec![c, d, p]),
            RateFunction::Tabulated { knots, direction } => RateSpec {
                knots: Some(knots.into_iter().map(|(z, r)| [z, r]).collect()),
                direction: Some(direction),
                ..RateSpec::simple("tabulated", vec![])
            },
            RateFunction::Reciprocal {
                numerator,
                shift,
                inner,
            } => RateSpec {
                inner: Some(Box::new((*inner).into())),
                ..RateSpec::simple("reciprocal", vec![numerator, shift])
            },
            RateFunction::Shifted { shift, inner } => RateSpec {
                inner: Some(Box::new((*inner).into())),
                ..RateSpec::simple("shifted", vec![shift])
            },
        }
    }
}

impl TryFrom<RateSpec> for RateFunction {
    type Error = String;

    fn try_from(spec: RateSpec) -> std::result::Result<Self, String> {
        let arity = |n: usize| -> std::result::Result<(), String> {
            if spec.params.len() == n {
                Ok(())
            } else {
                Err(format!(
                    "rate family `{}` takes {n} parameters, got {}",
                    spec.family,
                    spec.params.len()
                ))
            }
        };
        let p = &spec.params;
        let inner = || -> std::result::Result<RateFunction, String> {
            let inner = spec
                .inner
                .clone()
                .ok_or_else(|| format!("rate family `{}` needs an `inner` rate", spec.family))?;
            RateFunction::try_from(*inner)
        };
        let f = match spec.family.as_str() {
            "rational_decay" => {
                arity(2)?;
                RateFunction::rational_decay(p[0], p[1])
            }
            "exp_decay" => {
                arity(2)?;
                RateFunction::exp_decay(p[0], p[1])
            }
            "affine_growth" => {
                arity(2)?;
                RateFunction::affine(p[0], p[1])
            }
            "power_growth" => {
                arity(3)?;
                RateFunction::power(p[0], p[1], p[2])
            }
            "tabulated" => {
                arity(0)?;
                let knots = spec
                    .knots
                    .clone()
                    .ok_or("tabulated rate needs `knots`")?
                    .into_iter()
                    .map(|[z, r]| (z, r))
                    .collect();
                let direction = spec.direction.ok_or("tabulated rate needs `direction`")?;
                RateFunction::Tabulated { knots, direction }
            }
            "reciprocal" => {
                arity(2)?;
                RateFunction::reciprocal(p[0], p[1], inner()?)
            }
            "shifted" => {
                arity(1)?;
                RateFunction::shifted(p[0], inner()?)
            }
            other => return Err(format!("unknown rate family `{other}`")),
        };
        f.check_parameters(&spec.family).map_err(|e| e.to_string())?;
        Ok(f)
    }
}

/// Per-genotype recruitment `m_i` and mortality `μ_i` with density weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub m: [RateFunction; 3],
    pub mu: [RateFunction; 3],
    /// Weights of the recruitment density `b = Σ v_i m_i(b) x_i`.
    pub v: [f64; 3],
    /// Weights of the mortality density `wᵀx`.
    pub w: [f64; 3],
}

pub(crate) fn check_positive_vector(field: &str, v: &[f64; 3]) -> Result<()> {
    for (i, &c) in v.iter().enumerate() {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(
                format!("{field}[{i}]"),
                format!("weights must be finite and strictly positive, got {c}"),
            ));
        }
    }
    Ok(())
}

impl RateModel {
    pub fn new(m: [RateFunction; 3], mu: [RateFunction; 3], v: [f64; 3], w: [f64; 3]) -> Result<Self> {
        let model = RateModel { m, mu, v, w };
        model.check()?;
        Ok(model)
    }

    /// Identical rates for every genotype.
    pub fn neutral(m: RateFunction, mu: RateFunction, v: [f64; 3], w: [f64; 3]) -> Result<Self> {
        Self::new([m.clone(), m.clone(), m], [mu.clone(), mu.clone(), mu], v, w)
    }

    /// Parameter-level checks (weights, parameter signs).
    pub fn check(&self) -> Result<()> {
        check_positive_vector("v", &self.v)?;
        check_positive_vector("w", &self.w)?;
        for i in 0..3 {
            self.m[i].check_parameters(&format!("m[{i}]"))?;
            self.mu[i].check_parameters(&format!("mu[{i}]"))?;
        }
        Ok(())
    }

    pub fn recruitment(&self, b: f64) -> [f64; 3] {
        [self.m[0].eval(b), self.m[1].eval(b), self.m[2].eval(b)]
    }

    pub fn mortality(&self, z: f64) -> [f64; 3] {
        [self.mu[0].eval(z), self.mu[1].eval(z), self.mu[2].eval(z)]
    }

    pub fn is_selectively_neutral(&self) -> bool {
        self.m[0] == self.m[1] && self.m[1] == self.m[2] && self.mu[0] == self.mu[1] && self.mu[1] == self.mu[2]
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&ValidationConfig::default())
    }

    pub fn validate_with(&self, cfg: &ValidationConfig) -> ValidationReport {
        let grid = cfg.grid();
        let mut report = ValidationReport::default();

        for i in 0..3 {
            if !self.m[i].is_nonincreasing() {
                report.ass0.fail(format!("m[{i}] = {} is not decreasing", self.m[i]));
            }
            if !self.mu[i].is_nondecreasing() {
                report.ass0.fail(format!("mu[{i}] = {} is not increasing", self.mu[i]));
            }
            if grid
                .iter()
                .any(|&z| !(self.m[i].eval(z) >= 0.0 && self.m[i].eval(z).is_finite()))
            {
                report.ass0.fail(format!("m[{i}] leaves [0, ∞) on the grid"));
            }
            if grid
                .iter()
                .any(|&z| !(self.mu[i].eval(z) >= 0.0 && self.mu[i].eval(z).is_finite()))
            {
                report.ass0.fail(format!("mu[{i}] leaves [0, ∞) on the grid"));
            }
        }
        if let Err(e) = self.check() {
            report.ass0.fail(e.to_string());
        }

        let mut min_m_gap = f64::INFINITY;
        let mut min_mu_gap = f64::INFINITY;
        for &z in &grid {
            let m = self.recruitment(z);
            let mu = self.mortality(z);
            if !(m[0] >= m[1] && m[1] >= m[2]) {
                report
                    .ass1
                    .fail(format!("recruitment ordering m1 ≥ m2 ≥ m3 fails at density {z:e}"));
            }
            if !(mu[0] <= mu[1] && mu[1] <= mu[2]) {
                report
                    .ass1
                    .fail(format!("mortality ordering μ1 ≤ μ2 ≤ μ3 fails at density {z:e}"));
            }
            min_m_gap = min_m_gap.min(m[0] - m[2]);
            min_mu_gap = min_mu_gap.min(mu[2] - mu[0]);
        }
        report.ass1_min_gap = min_m_gap + min_mu_gap;
        if !(report.ass1_min_gap > 0.0) {
            report.ass1.fail(format!(
                "m1 − m3 + μ3 − μ1 is not strictly positive on the grid (min {:e})",
                report.ass1_min_gap
            ));
        }
        report.ass1.dedup();

        let (m0, mu0) = (self.m[0].eval(0.0), self.mu[0].eval(0.0));
        if !(m0 > mu0) {
            report.ass2.fail(format!("m1(0) = {m0} does not exceed μ1(0) = {mu0}"));
        }

        for i in 0..3 {
            let (m, mu) = (self.m[i].eval(cfg.probe), self.mu[i].eval(cfg.probe));
            if !(m < mu) {
                report.ass3.fail(format!(
                    "at probe density {:e}: m{}={m} is not below μ{}={mu}",
                    cfg.probe,
                    i + 1,
                    i + 1
                ));
            }
        }
        report.finish()
    }

    /// Unique `b ≥ 0` with `b = Σ v_i m_i(b) x_i`.
    pub fn solve_bstar(&self, x: &GenotypeVector) -> Result<f64> {
        solve_density(|b| {
            let m = self.recruitment(b);
            let value = self.v[0] * m[0] * x[0] + self.v[1] * m[1] * x[1] + self.v[2] * m[2] * x[2];
            let slope = self.v[0] * self.m[0].derivative(b) * x[0]
                + self.v[1] * self.m[1].derivative(b) * x[1]
                + self.v[2] * self.m[2].derivative(b) * x[2];
            (value, slope)
        })
    }

    /// `b_sn(s)` solving `b = m(b)·s` for a selectively neutral model.
    pub fn solve_bstar_neutral(&self, s: f64) -> Result<f64> {
        if !self.is_selectively_neutral() {
            return Err(Error::NeutralityViolation(
                "recruitment or mortality differs between genotypes".into(),
            ));
        }
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::invalid(
                "s",
                format!("weighted size must be nonnegative, got {s}"),
            ));
        }
        let m = &self.m[0];
        solve_density(|b| (m.eval(b) * s, m.derivative(b) * s))
    }
}

/// Solves `b = F(b)` for nonincreasing `F ≥ 0`, where `eval(b) = (F(b), F'(b))`.
fn solve_density<F>(eval: F) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let upper = eval(0.0).0;
    if upper == 0.0 {
        return Ok(0.0);
    }
    if !upper.is_finite() || upper < 0.0 {
        return Err(Error::Bracketing {
            what: "b*",
            limit: upper,
        });
    }
    let g = |b: f64| Ok(b - eval(b).0);
    let g_hi = g(upper)?;
    if g_hi < 0.0 {
        // only possible when a recruitment rate is not decreasing
        return Err(Error::Bracketing {
            what: "b*",
            limit: upper,
        });
    }
    let bracket = Bracket {
        lo: 0.0,
        f_lo: -upper,
        hi: upper,
        f_hi: g_hi,
    };
    let (root, bracket) = bisect_increasing(g, bracket, 1e-12 * upper.max(1.0))?;

    // safeguarded Newton polish inside the final bracket
    let mut b = root.value;
    let mut r = root.residual;
    for _ in 0..3 {
        if r == 0.0 {
            break;
        }
        let slope = 1.0 - eval(b).1;
        if !(slope.is_finite() && slope > 0.0) {
            break;
        }
        let cand = b - r / slope;
        if !(cand >= bracket.lo && cand <= bracket.hi) {
            break;
        }
        let rc = cand - eval(cand).0;
        if rc.abs() < r.abs() {
            b = cand;
            r = rc;
        } else {
            break;
        }
    }
    if r.abs() > 1e-10 * b.max(1.0) {
        return Err(Error::NonConvergence {
            what: "b*",
            iterations: root.iterations,
        });
    }
    Ok(b)
}

/// Sampling grid and probe density for assumption checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub grid_points: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    /// Density standing in for `+∞` in the saturation check.
    pub probe: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            grid_points: 64,
            grid_min: 1e-6,
            grid_max: 1e6,
            probe: 1e6,
        }
    }
}

impl ValidationConfig {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points.max(2);
        let ratio = (self.grid_max / self.grid_min).ln() / (n - 1) as f64;
        (0..n).map(|k| self.grid_min * (ratio * k as f64).exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub holds: bool,
    pub failures: Vec<String>,
}

impl AssumptionCheck {
    fn fail(&mut self, why: String) {
        self.failures.push(why);
    }

    fn dedup(&mut self) {
        // keep the first occurrence of each failure kind
        let mut seen = Vec::<String>::new();
        self.failures.retain(|f| {
            let key: String = f.split(" fails at").next().unwrap_or(f).to_string();
            if seen.contains(&key) {
                false
            } else {
                seen.push(key);
                true
            }
        });
    }
}

/// Which of the four standing assumptions a rate model satisfies.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Monotone rates, nonnegative values, positive weights.
    pub ass0: AssumptionCheck,
    /// Fitness ordering with a strictly positive total gap.
    pub ass1: AssumptionCheck,
    /// Genotype 1 viable at low density.
    pub ass2: AssumptionCheck,
    /// Mortality eventually dominates recruitment.
    pub ass3: AssumptionCheck,
    /// Grid minimum of `m1 − m3 + μ3 − μ1`.
    pub ass1_min_gap: f64,
}

impl ValidationReport {
    fn finish(mut self) -> Self {
        for check in [&mut self.ass0, &mut self.ass1, &mut self.ass2, &mut self.ass3] {
            check.holds = check.failures.is_empty();
        }
        self
    }
}
