use popgen_dyn::analysis::{allelic_ratio, mean_allelic_rates, verify_rate_ordering, OrderingConfig};
use popgen_dyn::equilibria::{monomorphic_capacity, neutral_capacity, population_bound, BoundConfig};
use popgen_dyn::genetics::{allele_frequency, hardy_weinberg_proportions, Allele, GenotypeVector};
use popgen_dyn::integrate::{simulate, SimConfig};
use popgen_dyn::sampling::{
    model, random_ass1_rates, random_neutral_rates, random_polymorphic_state, random_valid_rates, rng,
};
use popgen_dyn::{Execution, ReducedKind};
use proptest::prelude::*;

fn kind(fast: bool) -> ReducedKind {
    if fast {
        ReducedKind::Fast
    } else {
        ReducedKind::Slow
    }
}

fn short_run() -> SimConfig {
    SimConfig {
        t_end: 60.0,
        record_every: 0.5,
        ..SimConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectories_stay_in_the_orthant(seed in any::<u64>(), fast in any::<bool>()) {
        let mut r = rng(seed);
        let m = model(kind(fast), random_valid_rates(&mut r));
        let x0 = random_polymorphic_state(&mut r);
        let traj = simulate(&m, &x0, &short_run()).unwrap();
        for x in &traj.states {
            prop_assert!(x.0.iter().all(|c| c.is_finite() && *c >= 0.0), "{x}");
        }
    }

    #[test]
    fn neutral_runs_keep_their_allele_frequency(seed in any::<u64>(), fast in any::<bool>()) {
        let mut r = rng(seed);
        let m = model(kind(fast), random_neutral_rates(&mut r));
        let x0 = random_polymorphic_state(&mut r);
        let p0 = allele_frequency(&x0, Allele::A).unwrap();
        let traj = simulate(&m, &x0, &short_run()).unwrap();
        for x in &traj.states {
            prop_assert!((allele_frequency(x, Allele::A).unwrap() - p0).abs() < 1e-9);
        }
    }

    #[test]
    fn neutral_level_is_a_rest_point(seed in any::<u64>(), fast in any::<bool>(), p in 0.05f64..0.95) {
        let mut r = rng(seed);
        let m = model(kind(fast), random_neutral_rates(&mut r));
        let h = hardy_weinberg_proportions(p);
        let c = neutral_capacity(&m, &h, true).unwrap().value;
        let f = m.rhs(&h.scale(c)).unwrap();
        prop_assert!(f.max_abs() < 1e-9 * c.max(1.0), "{f}");
    }

    #[test]
    fn monomorphic_capacities_are_rest_points(seed in any::<u64>(), fast in any::<bool>()) {
        let mut r = rng(seed);
        let m = model(kind(fast), random_valid_rates(&mut r));
        for i in [1, 3] {
            let c = monomorphic_capacity(&m, i).unwrap().value;
            let f = m.rhs(&GenotypeVector::basis(i).scale(c)).unwrap();
            prop_assert!(f.max_abs() < 1e-9 * c.max(1.0), "genotype {i}: {f}");
        }
    }

    #[test]
    fn fitter_allele_ratio_never_rises(seed in any::<u64>(), fast in any::<bool>()) {
        let mut r = rng(seed);
        let m = model(kind(fast), random_ass1_rates(&mut r));
        let x0 = random_polymorphic_state(&mut r);
        let traj = simulate(&m, &x0, &short_run()).unwrap();
        let ratios: Vec<f64> = traj.states.iter().map(|x| allelic_ratio(x).unwrap()).collect();
        for w in ratios.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-10) + 1e-300, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn mean_rates_lie_between_homozygotes(seed in any::<u64>(), fast in any::<bool>()) {
        let mut r = rng(seed);
        let m = model(kind(fast), random_ass1_rates(&mut r));
        let x = random_polymorphic_state(&mut r);
        let a = mean_allelic_rates(&m, &x).unwrap();
        let slack = 1e-12 * a.mu[2].abs().max(1.0);
        prop_assert!(a.mu[0] <= a.mu_tilde_upper + slack);
        prop_assert!(a.mu_tilde_upper <= a.mu_tilde_lower + slack);
        prop_assert!(a.mu_tilde_lower <= a.mu[2] + slack);
        prop_assert!(a.m_tilde_upper + slack >= a.m_tilde_lower);
    }
}

#[test]
fn bound_dominates_long_run_totals() {
    let mut r = rng(11);
    let cfg = SimConfig {
        t_end: 200.0,
        record_every: 1.0,
        stop_at_equilibrium: false,
        ..SimConfig::default()
    };
    for k in 0..4 {
        let m = model(kind(k % 2 == 0), random_valid_rates(&mut r));
        let bound = population_bound(&m, &BoundConfig::default(), Execution::Sequential).unwrap();
        let traj = simulate(&m, &random_polymorphic_state(&mut r), &cfg).unwrap();
        let tail = &traj.states[traj.len() * 3 / 4..];
        for x in tail {
            assert!(
                x.total() <= bound.capacity.value + 1e-6,
                "{} > {}",
                x.total(),
                bound.capacity.value
            );
        }
    }
}

#[test]
fn execution_modes_agree() {
    let mut r = rng(5);
    let m = model(ReducedKind::Slow, random_valid_rates(&mut r));
    let cfg = BoundConfig::default();
    let seq = population_bound(&m, &cfg, Execution::Sequential).unwrap();
    let par = population_bound(&m, &cfg, Execution::Parallel).unwrap();
    assert_eq!(seq, par);

    let ordering = OrderingConfig {
        samples: 200,
        ..OrderingConfig::default()
    };
    let m = model(ReducedKind::Fast, random_ass1_rates(&mut r));
    let seq = verify_rate_ordering(&m, &ordering, Execution::Sequential).unwrap();
    let par = verify_rate_ordering(&m, &ordering, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
}
