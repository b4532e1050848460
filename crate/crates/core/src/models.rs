//! Vector fields of the two-phase (pre-adult / adult) model and of its two
//! reductions on the slow manifold.
//!
//! * **Fast** reduction (adult phase fast): state `L̂ = L/ω`,
//!   `ẋ = 𝔸(M(x)x) − μ(wᵀx)x` with `M(x) = diag m_i(b*(x))`.
//! * **Slow** reduction (pre-adult phase fast): state `A`,
//!   `ẋ = M(𝔸(x))𝔸(x) − μ(wᵀx)x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genetics::{mendel_offspring, GenotypeVector, MIN_TOTAL};
use crate::rates::{check_positive_vector, RateFunction, RateModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedKind {
    /// Heredity applied after recruitment scaling (fast reproductive phase).
    Fast,
    /// Recruitment evaluated at the offspring repartition (slow reproductive phase).
    Slow,
}

impl ReducedKind {
    pub const BOTH: [ReducedKind; 2] = [ReducedKind::Fast, ReducedKind::Slow];

    /// Two-phase scaling mode that makes this reduction the singular limit.
    pub fn scaling_mode(self) -> ScalingMode {
        match self {
            ReducedKind::Fast => ScalingMode::FastAdult,
            ReducedKind::Slow => ScalingMode::FastLarva,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedModel {
    pub kind: ReducedKind,
    pub rates: RateModel,
}

impl ReducedModel {
    pub fn new(kind: ReducedKind, rates: RateModel) -> Result<Self> {
        rates.check()?;
        let report = rates.validate();
        if !report.ass0.holds {
            return Err(Error::AssumptionViolation(report.ass0.failures.join("; ")));
        }
        Ok(ReducedModel { kind, rates })
    }

    pub fn with_kind(&self, kind: ReducedKind) -> Self {
        ReducedModel {
            kind,
            rates: self.rates.clone(),
        }
    }

    pub fn rhs(&self, x: &GenotypeVector) -> Result<GenotypeVector> {
        match self.kind {
            ReducedKind::Fast => fast_rhs(&self.rates, x),
            ReducedKind::Slow => slow_rhs(&self.rates, x),
        }
    }

    /// Birth term: `𝔸(M(x)x)` (Fast) or `M(𝔸(x))𝔸(x)` (Slow); zero at `x = 0`.
    pub fn birth(&self, x: &GenotypeVector) -> Result<GenotypeVector> {
        match self.kind {
            ReducedKind::Fast => fast_birth(&self.rates, x),
            ReducedKind::Slow => slow_birth(&self.rates, x),
        }
    }

    /// Competition density entering recruitment: `b*(x)` or `b*(𝔸(x))`.
    pub fn recruitment_density(&self, x: &GenotypeVector) -> Result<f64> {
        if x.total() < MIN_TOTAL {
            return Ok(0.0);
        }
        match self.kind {
            ReducedKind::Fast => self.rates.solve_bstar(x),
            ReducedKind::Slow => self.rates.solve_bstar(&mendel_offspring(x)?),
        }
    }

    pub fn is_selectively_neutral(&self) -> bool {
        self.rates.is_selectively_neutral()
    }
}

fn fast_birth(rates: &RateModel, x: &GenotypeVector) -> Result<GenotypeVector> {
    if x.total() < MIN_TOTAL {
        return Ok(GenotypeVector::ZERO);
    }
    let b = rates.solve_bstar(x)?;
    let recruited = x.hadamard(&rates.recruitment(b));
    if recruited.total() < MIN_TOTAL {
        return Ok(GenotypeVector::ZERO);
    }
    mendel_offspring(&recruited)
}

fn slow_birth(rates: &RateModel, x: &GenotypeVector) -> Result<GenotypeVector> {
    if x.total() < MIN_TOTAL {
        return Ok(GenotypeVector::ZERO);
    }
    let offspring = mendel_offspring(x)?;
    let b = rates.solve_bstar(&offspring)?;
    Ok(offspring.hadamard(&rates.recruitment(b)))
}

fn mortality_term(rates: &RateModel, x: &GenotypeVector) -> GenotypeVector {
    x.hadamard(&rates.mortality(x.dot(&rates.w)))
}

/// `ẋ = 𝔸(M(x)x) − μ(wᵀx)x`.
pub fn fast_rhs(rates: &RateModel, x: &GenotypeVector) -> Result<GenotypeVector> {
    Ok(fast_birth(rates, x)? - mortality_term(rates, x))
}

/// `ẋ = M(𝔸(x))𝔸(x) − μ(wᵀx)x`.
pub fn slow_rhs(rates: &RateModel, x: &GenotypeVector) -> Result<GenotypeVector> {
    Ok(slow_birth(rates, x)? - mortality_term(rates, x))
}

/// Which phase of the two-phase model is accelerated by `1/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// Adult equation divided by `ε`.
    FastAdult,
    /// Pre-adult equation divided by `ε`.
    FastLarva,
}

impl ScalingMode {
    pub fn reduced_kind(self) -> ReducedKind {
        match self {
            ScalingMode::FastAdult => ReducedKind::Fast,
            ScalingMode::FastLarva => ReducedKind::Slow,
        }
    }
}

/// Parameters of the pre-adult / adult model
/// `L̇_i = ω_i α_i(A) − μ_i(vᵀL)L_i − ν_i L_i`, `Ȧ_i = ν_i L_i − μ̂_i(wᵀA)A_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseParams {
    /// Fertility rates.
    pub omega: [f64; 3],
    /// Maturation rates.
    pub nu: [f64; 3],
    pub mu_larva: [RateFunction; 3],
    pub mu_adult: [RateFunction; 3],
    pub v: [f64; 3],
    pub w: [f64; 3],
    pub epsilon: f64,
    pub scaling: ScalingMode,
}

impl TwoPhaseParams {
    pub fn check(&self) -> Result<()> {
        check_positive_vector("omega", &self.omega)?;
        check_positive_vector("nu", &self.nu)?;
        check_positive_vector("v", &self.v)?;
        check_positive_vector("w", &self.w)?;
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be finite and positive"));
        }
        for i in 0..3 {
            for (name, f) in [("mu_larva", &self.mu_larva[i]), ("mu_adult", &self.mu_adult[i])] {
                let field = format!("{name}[{i}]");
                f.check_parameters(&field)?;
                if !f.is_nondecreasing() {
                    return Err(Error::invalid(field, "mortality must be increasing"));
                }
            }
        }
        Ok(())
    }

    /// `ν̂_i = ω_i ν_i`.
    pub fn nu_hat(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.omega[i] * self.nu[i])
    }

    /// `v̂ = diag(ω) v`.
    pub fn v_hat(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.omega[i] * self.v[i])
    }

    pub fn with_epsilon(&self, epsilon: f64, scaling: ScalingMode) -> Self {
        TwoPhaseParams {
            epsilon,
            scaling,
            ..self.clone()
        }
    }

    pub fn reduce(&self, kind: ReducedKind) -> Result<ReducedModel> {
        match kind {
            ReducedKind::Fast => reduce_fast(self),
            ReducedKind::Slow => reduce_slow(self),
        }
    }

    /// Two-phase state on the slow manifold above a reduced state.
    ///
    /// Fast: `x = L̂`, adults recovered as `A_i = m_i(b*(L̂)) L̂_i`.
    /// Slow: `x = A`, pre-adults recovered as `L̂_i = α_i(A)/(ν_i + μ_i(b*(𝔸(A))))`.
    pub fn manifold_state(&self, kind: ReducedKind, x: &GenotypeVector) -> Result<TwoPhaseState> {
        let reduced = self.reduce(kind)?;
        match kind {
            ReducedKind::Fast => {
                let b = reduced.recruitment_density(x)?;
                let adults = x.hadamard(&reduced.rates.recruitment(b));
                Ok(TwoPhaseState {
                    larvae: x.hadamard(&self.omega),
                    adults,
                })
            }
            ReducedKind::Slow => {
                if x.total() < MIN_TOTAL {
                    return Ok(TwoPhaseState {
                        larvae: GenotypeVector::ZERO,
                        adults: *x,
                    });
                }
                let offspring = mendel_offspring(x)?;
                let b = reduced.rates.solve_bstar(&offspring)?;
                let l_hat = GenotypeVector(std::array::from_fn(|i| {
                    offspring[i] / (self.nu[i] + self.mu_larva[i].eval(b))
                }));
                Ok(TwoPhaseState {
                    larvae: l_hat.hadamard(&self.omega),
                    adults: *x,
                })
            }
        }
    }

    /// The variable a reduction tracks: `L/ω` (Fast) or `A` (Slow).
    pub fn slow_variable(&self, kind: ReducedKind, s: &TwoPhaseState) -> GenotypeVector {
        match kind {
            ReducedKind::Fast => GenotypeVector(std::array::from_fn(|i| s.larvae[i] / self.omega[i])),
            ReducedKind::Slow => s.adults,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoPhaseState {
    pub larvae: GenotypeVector,
    pub adults: GenotypeVector,
}

impl TwoPhaseState {
    pub fn to_array(&self) -> [f64; 6] {
        let (l, a) = (self.larvae.0, self.adults.0);
        [l[0], l[1], l[2], a[0], a[1], a[2]]
    }

    pub fn from_array(s: &[f64; 6]) -> Self {
        TwoPhaseState {
            larvae: GenotypeVector([s[0], s[1], s[2]]),
            adults: GenotypeVector([s[3], s[4], s[5]]),
        }
    }
}

/// Derivative of the two-phase model; no births when there are no adults.
pub fn two_phase_rhs(p: &TwoPhaseParams, s: &TwoPhaseState) -> Result<TwoPhaseState> {
    let births = if s.adults.total() < MIN_TOTAL {
        GenotypeVector::ZERO
    } else {
        mendel_offspring(&s.adults)?
    };
    let larval_density = s.larvae.dot(&p.v);
    let adult_density = s.adults.dot(&p.w);
    let mut dl = [0.0; 3];
    let mut da = [0.0; 3];
    for i in 0..3 {
        let l = s.larvae[i];
        let a = s.adults[i];
        dl[i] = p.omega[i] * births[i] - p.mu_larva[i].eval(larval_density) * l - p.nu[i] * l;
        da[i] = p.nu[i] * l - p.mu_adult[i].eval(adult_density) * a;
    }
    let inv = 1.0 / p.epsilon;
    match p.scaling {
        ScalingMode::FastAdult => da.iter_mut().for_each(|d| *d *= inv),
        ScalingMode::FastLarva => dl.iter_mut().for_each(|d| *d *= inv),
    }
    Ok(TwoPhaseState {
        larvae: GenotypeVector(dl),
        adults: GenotypeVector(da),
    })
}

/// Fast reduction: `m_i(b) = ω_i ν_i / μ̂_i(b)`, mortality `ν_i + μ_i(z)`,
/// recruitment weights `w`, mortality weights `v̂ = diag(ω) v`.
pub fn reduce_fast(p: &TwoPhaseParams) -> Result<ReducedModel> {
    p.check()?;
    let nu_hat = p.nu_hat();
    for (i, f) in p.mu_adult.iter().enumerate() {
        if !(f.eval(0.0) > 0.0) {
            return Err(Error::DivisionDomain(format!("mu_adult[{i}] vanishes at density 0")));
        }
    }
    let m = std::array::from_fn(|i| RateFunction::reciprocal(nu_hat[i], 0.0, p.mu_adult[i].clone()));
    let mu = std::array::from_fn(|i| RateFunction::shifted(p.nu[i], p.mu_larva[i].clone()));
    let rates = RateModel::new(m, mu, p.w, p.v_hat())?;
    ReducedModel::new(ReducedKind::Fast, rates)
}

/// Slow reduction: `m_i(b) = ω_i ν_i / (ν_i + μ_i(b))`, mortality `μ̂_i`,
/// recruitment weights `v_i / ν_i`, mortality weights `w`.
pub fn reduce_slow(p: &TwoPhaseParams) -> Result<ReducedModel> {
    p.check()?;
    let nu_hat = p.nu_hat();
    let m = std::array::from_fn(|i| RateFunction::reciprocal(nu_hat[i], p.nu[i], p.mu_larva[i].clone()));
    let v = std::array::from_fn(|i| p.v[i] / p.nu[i]);
    let rates = RateModel::new(m, p.mu_adult.clone(), v, p.w)?;
    ReducedModel::new(ReducedKind::Slow, rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genetics::{allele_count, Allele};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_params(mu_larva: RateFunction, mu_adult: RateFunction) -> TwoPhaseParams {
        TwoPhaseParams {
            omega: [1.0; 3],
            nu: [1.0; 3],
            mu_larva: std::array::from_fn(|_| mu_larva.clone()),
            mu_adult: std::array::from_fn(|_| mu_adult.clone()),
            v: [1.0; 3],
            w: [1.0; 3],
            epsilon: 1.0,
            scaling: ScalingMode::FastAdult,
        }
    }

    fn neutral_rates() -> RateModel {
        RateModel::neutral(
            RateFunction::rational_decay(2.0, 1.0),
            RateFunction::affine(0.5, 0.5),
            [1.0; 3],
            [1.0; 3],
        )
        .unwrap()
    }

    fn codominant_rates() -> RateModel {
        RateModel::new(
            std::array::from_fn(|_| RateFunction::rational_decay(2.0, 1.0)),
            [
                RateFunction::affine(0.5, 0.5),
                RateFunction::affine(0.6, 0.5),
                RateFunction::affine(0.7, 0.5),
            ],
            [1.0; 3],
            [1.0; 3],
        )
        .unwrap()
    }

    #[test]
    fn two_phase_extinction_and_single_adult() {
        let p = unit_params(RateFunction::affine(1.0, 0.0), RateFunction::affine(1.0, 0.0));
        let d = two_phase_rhs(&p, &TwoPhaseState::default()).unwrap();
        assert_eq!(d, TwoPhaseState::default());

        let s = TwoPhaseState {
            larvae: GenotypeVector::ZERO,
            adults: GenotypeVector::new(1.0, 0.0, 0.0),
        };
        let d = two_phase_rhs(&p, &s).unwrap();
        assert_eq!(d.larvae, GenotypeVector::new(1.0, 0.0, 0.0));
        assert_eq!(d.adults, GenotypeVector::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn two_phase_monomorphic_closure() {
        let p = unit_params(RateFunction::affine(0.3, 0.2), RateFunction::affine(0.4, 0.1));
        let s = TwoPhaseState {
            larvae: GenotypeVector::new(0.7, 0.0, 0.0),
            adults: GenotypeVector::new(1.3, 0.0, 0.0),
        };
        let d = two_phase_rhs(&p, &s).unwrap();
        assert_eq!(
            (d.larvae[1], d.larvae[2], d.adults[1], d.adults[2]),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn epsilon_scales_the_selected_phase() {
        let mut p = unit_params(RateFunction::affine(0.3, 0.2), RateFunction::affine(0.4, 0.1));
        let s = TwoPhaseState {
            larvae: GenotypeVector::new(0.7, 0.2, 0.1),
            adults: GenotypeVector::new(1.3, 0.5, 0.2),
        };
        let base = two_phase_rhs(&p, &s).unwrap();
        p.epsilon = 0.1;
        let fast_adult = two_phase_rhs(&p, &s).unwrap();
        assert_eq!(fast_adult.larvae, base.larvae);
        assert_abs_diff_eq!(fast_adult.adults[0], 10.0 * base.adults[0], epsilon = 1e-12);
        p.scaling = ScalingMode::FastLarva;
        let fast_larva = two_phase_rhs(&p, &s).unwrap();
        assert_eq!(fast_larva.adults, base.adults);
        assert_abs_diff_eq!(fast_larva.larvae[1], 10.0 * base.larvae[1], epsilon = 1e-12);
    }

    #[test]
    fn fast_reduction_rates() {
        let p = unit_params(RateFunction::affine(0.5, 0.1), RateFunction::affine(1.0, 1.0));
        let r = reduce_fast(&p).unwrap();
        assert_eq!(r.kind, ReducedKind::Fast);
        for b in [0.0, 0.5, 3.0] {
            assert_abs_diff_eq!(r.rates.m[0].eval(b), 1.0 / (1.0 + b), epsilon = 1e-15);
            assert_abs_diff_eq!(r.rates.mu[2].eval(b), 1.5 + 0.1 * b, epsilon = 1e-15);
        }
        let mut doubled = p.clone();
        doubled.omega = [2.0; 3];
        let r2 = reduce_fast(&doubled).unwrap();
        assert_eq!(r2.rates.w, [2.0; 3]);
        assert_eq!(r2.rates.v, p.w);
    }

    #[test]
    fn fast_reduction_rejects_vanishing_adult_mortality() {
        let p = unit_params(RateFunction::affine(0.5, 0.1), RateFunction::affine(0.0, 1.0));
        assert!(matches!(reduce_fast(&p), Err(Error::DivisionDomain(_))));
    }

    #[test]
    fn slow_reduction_rates() {
        let p = unit_params(RateFunction::affine(1.0, 1.0), RateFunction::affine(0.5, 0.5));
        let r = reduce_slow(&p).unwrap();
        assert_eq!(r.kind, ReducedKind::Slow);
        for b in [0.0, 0.5, 3.0] {
            assert_abs_diff_eq!(r.rates.m[1].eval(b), 1.0 / (2.0 + b), epsilon = 1e-15);
        }
        assert_eq!(r.rates.mu[0], p.mu_adult[0]);

        let mut fast_larva = p.clone();
        fast_larva.nu = [1e3; 3];
        fast_larva.omega = [2.0, 3.0, 4.0];
        let r = reduce_slow(&fast_larva).unwrap();
        for i in 0..3 {
            assert!((r.rates.m[i].eval(1.0) - fast_larva.omega[i]).abs() < 1e-2 * fast_larva.omega[i]);
        }

        let mut halved = p;
        halved.nu = [2.0; 3];
        assert_eq!(reduce_slow(&halved).unwrap().rates.v, [0.5; 3]);
    }

    #[test]
    fn reduced_fields_vanish_at_zero() {
        let rates = codominant_rates();
        assert_eq!(fast_rhs(&rates, &GenotypeVector::ZERO).unwrap(), GenotypeVector::ZERO);
        assert_eq!(slow_rhs(&rates, &GenotypeVector::ZERO).unwrap(), GenotypeVector::ZERO);
    }

    #[test]
    fn monomorphic_capacity_is_an_equilibrium() {
        // c = 1 solves c³ + 2c² + 3c − 6 = 0 for genotype 1 of the example models
        let rates = codominant_rates();
        let x = GenotypeVector::new(1.0, 0.0, 0.0);
        for d in [fast_rhs(&rates, &x).unwrap(), slow_rhs(&rates, &x).unwrap()] {
            assert!(d.max_abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn slow_field_vanishes_at_viable_aa_capacity() {
        let mut rates = codominant_rates();
        rates.mu[2] = RateFunction::affine(0.5, 0.5);
        let x = GenotypeVector::new(0.0, 0.0, 1.0);
        assert!(slow_rhs(&rates, &x).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn slow_birth_scales_through_the_heredity_operator() {
        let rates = codominant_rates();
        let model = ReducedModel::new(ReducedKind::Slow, rates.clone()).unwrap();
        let x = GenotypeVector::new(0.3, 0.4, 0.5);
        let lambda = 2.0;
        let birth = model.birth(&x.scale(lambda)).unwrap();
        let y = mendel_offspring(&x).unwrap().scale(lambda);
        let b = rates.solve_bstar(&y).unwrap();
        let expected = y.hadamard(&rates.recruitment(b));
        for i in 0..3 {
            assert_abs_diff_eq!(birth[i], expected[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn neutrality_is_structural() {
        let neutral = ReducedModel::new(ReducedKind::Fast, neutral_rates()).unwrap();
        assert!(neutral.is_selectively_neutral());
        let mut weighted = neutral.clone();
        weighted.rates.v = [1.0, 2.0, 3.0];
        weighted.rates.w = [0.5, 0.2, 0.1];
        assert!(weighted.is_selectively_neutral());
        let mut off = neutral;
        off.rates.mu[1] = RateFunction::affine(0.6, 0.5);
        assert!(!off.is_selectively_neutral());
    }

    #[test]
    fn manifold_state_balances_the_fast_phase() {
        let mut p = unit_params(RateFunction::affine(0.2, 0.3), RateFunction::affine(1.0, 1.0));
        p.omega = [3.0, 2.5, 2.0];
        p.v = [1.0, 0.8, 1.2];
        p.w = [0.9, 1.1, 1.0];
        let x = GenotypeVector::new(0.4, 0.3, 0.2);

        let fast = p.manifold_state(ReducedKind::Fast, &x).unwrap();
        let d = two_phase_rhs(&p, &fast).unwrap();
        assert!(d.adults.max_abs() < 1e-12, "adult equation balanced: {}", d.adults);

        let slow = p.manifold_state(ReducedKind::Slow, &x).unwrap();
        let d = two_phase_rhs(&p, &slow).unwrap();
        assert!(d.larvae.max_abs() < 1e-12, "larval equation balanced: {}", d.larvae);
    }

    #[test]
    fn reductions_reproduce_the_slow_derivative_on_the_manifold() {
        let mut p = unit_params(RateFunction::affine(0.2, 0.3), RateFunction::affine(1.0, 1.0));
        p.omega = [3.0, 2.5, 2.0];
        p.v = [1.0, 0.8, 1.2];
        p.w = [0.9, 1.1, 1.0];
        let x = GenotypeVector::new(0.4, 0.3, 0.2);
        for kind in ReducedKind::BOTH {
            let s = p.manifold_state(kind, &x).unwrap();
            let full = two_phase_rhs(&p, &s).unwrap();
            let slow_dot = match kind {
                ReducedKind::Fast => GenotypeVector(std::array::from_fn(|i| full.larvae[i] / p.omega[i])),
                ReducedKind::Slow => full.adults,
            };
            let reduced = p.reduce(kind).unwrap().rhs(&x).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(slow_dot[i], reduced[i], epsilon = 1e-12);
            }
        }
    }

    fn boundary_state() -> impl Strategy<Value = GenotypeVector> {
        (prop::array::uniform3(0.0..10.0f64), 0usize..3).prop_map(|(mut x, zero)| {
            x[zero] = 0.0;
            GenotypeVector(x)
        })
    }

    fn interior_state() -> impl Strategy<Value = GenotypeVector> {
        prop::array::uniform3(0.01..10.0f64).prop_map(GenotypeVector)
    }

    proptest! {
        #[test]
        fn flow_points_into_the_orthant(x in boundary_state()) {
            let rates = codominant_rates();
            for d in [fast_rhs(&rates, &x).unwrap(), slow_rhs(&rates, &x).unwrap()] {
                for i in 0..3 {
                    if x[i] == 0.0 {
                        prop_assert!(d[i] >= 0.0);
                    }
                }
            }
        }

        #[test]
        fn total_balance(x in interior_state()) {
            let rates = codominant_rates();
            let d = fast_rhs(&rates, &x).unwrap();
            let b = rates.solve_bstar(&x).unwrap();
            let m = rates.recruitment(b);
            let mu = rates.mortality(x.dot(&rates.w));
            let expected: f64 = (0..3).map(|i| (m[i] - mu[i]) * x[i]).sum();
            prop_assert!((d.total() - expected).abs() <= 1e-12 * (1.0 + expected.abs()) * 10.0);
        }

        #[test]
        fn monomorphic_states_stay_on_axis(c in 0.01..10.0f64, aa in any::<bool>()) {
            let rates = codominant_rates();
            let i = if aa { 0 } else { 2 };
            let mut x = [0.0; 3];
            x[i] = c;
            let x = GenotypeVector(x);
            let b = rates.solve_bstar(&x).unwrap();
            let expected = (rates.m[i].eval(b) - rates.mu[i].eval(rates.w[i] * c)) * c;
            for d in [fast_rhs(&rates, &x).unwrap(), slow_rhs(&rates, &x).unwrap()] {
                for k in 0..3 {
                    if k != i {
                        prop_assert_eq!(d[k], 0.0);
                    }
                }
                prop_assert!((d[i] - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
            }
        }

        #[test]
        fn neutral_fields_coincide(x in interior_state()) {
            let rates = neutral_rates();
            let f = fast_rhs(&rates, &x).unwrap();
            let s = slow_rhs(&rates, &x).unwrap();
            for i in 0..3 {
                prop_assert!((f[i] - s[i]).abs() <= 1e-12 * (1.0 + f.max_abs()));
            }
            // allele frequencies are stationary in the neutral case
            let pa = allele_count(&x, Allele::A) / x.total();
            prop_assert!((allele_count(&f, Allele::A) - pa * f.total()).abs() <= 1e-12 * (1.0 + f.max_abs()));
        }
    }
}
