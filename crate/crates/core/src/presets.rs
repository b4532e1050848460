//! Reference models used throughout the tests and the CLI examples.

use crate::models::{ReducedKind, ReducedModel, ScalingMode, TwoPhaseParams};
use crate::rates::{RateFunction, RateModel};

/// All genotypes share `m(b) = 2/(1+b)` and `μ(z) = 0.5 + 0.5z`, with `v = w = 𝟙`.
/// Every equilibrium level is 1.
pub fn neutral_example(kind: ReducedKind) -> ReducedModel {
    let rates = RateModel::neutral(
        RateFunction::rational_decay(2.0, 1.0),
        RateFunction::affine(0.5, 0.5),
        [1.0; 3],
        [1.0; 3],
    )
    .expect("valid preset");
    ReducedModel::new(kind, rates).expect("valid preset")
}

/// Equal recruitment `2/(1+b)`; mortality intercepts 0.5, 0.6, 0.7 with slope 0.5.
/// Genotype AA is fittest and `c1* = 1`.
pub fn codominant_example(kind: ReducedKind) -> ReducedModel {
    let rates = RateModel::new(
        std::array::from_fn(|_| RateFunction::rational_decay(2.0, 1.0)),
        [
            RateFunction::affine(0.5, 0.5),
            RateFunction::affine(0.6, 0.5),
            RateFunction::affine(0.7, 0.5),
        ],
        [1.0; 3],
        [1.0; 3],
    )
    .expect("valid preset");
    ReducedModel::new(kind, rates).expect("valid preset")
}

/// Two-phase model with fertility 3, unit maturation, mildly codominant
/// pre-adult mortality and adult mortality `1 + z`.
pub fn two_phase_example() -> TwoPhaseParams {
    TwoPhaseParams {
        omega: [3.0; 3],
        nu: [1.0; 3],
        mu_larva: [
            RateFunction::affine(0.2, 0.3),
            RateFunction::affine(0.25, 0.3),
            RateFunction::affine(0.3, 0.3),
        ],
        mu_adult: std::array::from_fn(|_| RateFunction::affine(1.0, 1.0)),
        v: [1.0; 3],
        w: [1.0; 3],
        epsilon: 0.1,
        scaling: ScalingMode::FastAdult,
    }
}
