//! Seeded random states and rate models for property checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::genetics::{is_polymorphic, GenotypeVector};
use crate::models::{ReducedKind, ReducedModel};
use crate::rates::{RateFunction, RateModel};

pub type SimRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Components log-uniform on `[1e-3, 1e3]`; monomorphic draws are rejected.
pub fn random_polymorphic_state<R: Rng + ?Sized>(rng: &mut R) -> GenotypeVector {
    loop {
        let x = GenotypeVector(std::array::from_fn(|_| log_uniform(rng, 1e-3, 1e3)));
        if is_polymorphic(&x) {
            return x;
        }
    }
}

/// Nonzero state whose components may vanish individually.
pub fn random_nonzero_state<R: Rng + ?Sized>(rng: &mut R) -> GenotypeVector {
    loop {
        let x = GenotypeVector(std::array::from_fn(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                log_uniform(rng, 1e-3, 1e3)
            }
        }));
        if !x.is_zero() {
            return x;
        }
    }
}

fn random_decay<R: Rng + ?Sized>(rng: &mut R, a: f64, beta: f64) -> RateFunction {
    if rng.random_bool(0.5) {
        RateFunction::rational_decay(a, beta)
    } else {
        RateFunction::exp_decay(a, beta)
    }
}

fn random_growth<R: Rng + ?Sized>(rng: &mut R, c: f64, d: f64) -> RateFunction {
    if rng.random_bool(0.5) {
        RateFunction::affine(c, d)
    } else {
        RateFunction::power(c, d, rng.random_range(0.5..2.0))
    }
}

/// Unordered rates satisfying the monotonicity and saturation assumptions,
/// viable for genotype 1, with `v ∈ [0.5, 2]³` and `w ∈ [1, 2]³`.
pub fn random_valid_rates<R: Rng + ?Sized>(rng: &mut R) -> RateModel {
    let m: [RateFunction; 3] = std::array::from_fn(|_| {
        let a = rng.random_range(1.0..3.0);
        let beta = rng.random_range(0.3..2.0);
        random_decay(rng, a, beta)
    });
    let mut mu: [RateFunction; 3] = std::array::from_fn(|_| {
        let c = rng.random_range(0.1..1.5);
        let d = rng.random_range(0.2..1.0);
        random_growth(rng, c, d)
    });
    let a1 = m[0].eval(0.0);
    if mu[0].eval(0.0) >= a1 {
        let d = rng.random_range(0.2..1.0);
        mu[0] = random_growth(rng, 0.5 * a1, d);
    }
    let v = std::array::from_fn(|_| rng.random_range(0.5..2.0));
    let w = std::array::from_fn(|_| rng.random_range(1.0..2.0));
    RateModel::new(m, mu, v, w).expect("sampled parameters are in range")
}

/// Strictly codominant rates: `m1 > m2 > m3` sharing a decay shape and
/// `μ1 < μ2 < μ3` sharing a slope, all genotypes viable.
pub fn random_ass1_rates<R: Rng + ?Sized>(rng: &mut R) -> RateModel {
    let beta = rng.random_range(0.3..2.0);
    let a1 = rng.random_range(2.0..3.0);
    let a2 = a1 - rng.random_range(0.0..0.3);
    let a3 = a2 - rng.random_range(0.0..0.3);
    let exp = rng.random_bool(0.5);
    let decay = |a: f64| {
        if exp {
            RateFunction::exp_decay(a, beta)
        } else {
            RateFunction::rational_decay(a, beta)
        }
    };
    let d = rng.random_range(0.2..1.0);
    let c1 = rng.random_range(0.2..0.6);
    let c2 = c1 + rng.random_range(0.08..0.3);
    let c3 = c2 + rng.random_range(0.08..0.3);
    let v = std::array::from_fn(|_| rng.random_range(0.5..2.0));
    let w = std::array::from_fn(|_| rng.random_range(0.5..2.0));
    RateModel::new(
        [decay(a1), decay(a2), decay(a3)],
        [
            RateFunction::affine(c1, d),
            RateFunction::affine(c2, d),
            RateFunction::affine(c3, d),
        ],
        v,
        w,
    )
    .expect("sampled parameters are in range")
}

/// Viable selectively neutral rates with random weights.
pub fn random_neutral_rates<R: Rng + ?Sized>(rng: &mut R) -> RateModel {
    let a = rng.random_range(1.5..3.0);
    let beta = rng.random_range(0.3..2.0);
    let m = random_decay(rng, a, beta);
    let c = rng.random_range(0.1..0.8 * a.min(1.2));
    let d = rng.random_range(0.2..1.0);
    let mu = random_growth(rng, c, d);
    let v = std::array::from_fn(|_| rng.random_range(0.5..2.0));
    let w = std::array::from_fn(|_| rng.random_range(0.5..2.0));
    RateModel::neutral(m, mu, v, w).expect("sampled parameters are in range")
}

pub fn model(kind: ReducedKind, rates: RateModel) -> ReducedModel {
    ReducedModel::new(kind, rates).expect("sampled rates satisfy the monotonicity assumption")
}
