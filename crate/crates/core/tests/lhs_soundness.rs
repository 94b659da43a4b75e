use proptest::prelude::*;
use qsl_steering::assemblage::{
    assemblage_from_lhs, conditional_displacement, conditional_mean_rate, conditional_qfi, conditional_variance,
    evolve_assemblage, geometric_time_bound, mt_witness, DiscreteAssemblage, LhsModel,
};
use qsl_steering::linalg::{DensityMatrix, Observable};
use qsl_steering::random::{random_hermitian, random_lhs_model, random_pure_state, stream_rng};
use qsl_steering::Constants;

const SETTINGS: [&str; 3] = ["X", "Y", "Z"];
const OUTCOMES: [&str; 3] = ["0", "1", "2"];

struct Case {
    model: LhsModel,
    asm: DiscreteAssemblage,
    m: Observable,
    h: Observable,
}

fn case(seed: u64, dim: usize, hidden: usize, settings: usize, outcomes: usize) -> Case {
    let mut rng = stream_rng(seed, 0);
    let model = random_lhs_model(&mut rng, dim, hidden, settings, outcomes).unwrap();
    let asm = assemblage_from_lhs(&model, &SETTINGS[..settings], &OUTCOMES[..outcomes]).unwrap();
    let m = random_hermitian(&mut rng, dim);
    let h = random_hermitian(&mut rng, dim);
    Case { model, asm, m, h }
}

fn params() -> impl Strategy<Value = (u64, usize, usize, usize, usize)> {
    (any::<u64>(), 2usize..=4, 1usize..=5, 2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lhs_assemblages_never_violate((seed, dim, hidden, settings, outcomes) in params()) {
        let c = Constants::NATURAL;
        let Case { asm, m, h, .. } = case(seed, dim, hidden, settings, outcomes);

        let mt = mt_witness(&asm, &m, &h, &c).unwrap();
        prop_assert!(!mt.violated);
        prop_assert!(mt.degenerate || mt.gamma >= 1.0 - 1e-9, "gamma = {}", mt.gamma);

        let qfi = conditional_qfi(&asm, &h, &c).unwrap().value;
        let var_h = conditional_variance(&asm, &h).unwrap().value;
        prop_assert!(qfi <= 4.0 * var_h / (c.hbar * c.hbar) + 1e-9, "{qfi} > 4 * {var_h}");

        for dt in [0.05, 0.5, 2.0] {
            let evolved = evolve_assemblage(&asm, &h, dt, &c).unwrap();
            let geo = geometric_time_bound(&asm, &evolved, &h, dt, &c).unwrap();
            prop_assert!(!geo.violated, "dt = {dt}: bound {}", geo.lhs_bound);
        }
    }

    #[test]
    fn conditional_variance_dominates_hidden_average((seed, dim, hidden, settings, outcomes) in params()) {
        let Case { model, asm, m, .. } = case(seed, dim, hidden, settings, outcomes);
        let hidden_avg: f64 = model
            .hidden()
            .iter()
            .map(|s| s.weight * s.state.variance(&m).unwrap())
            .sum();
        let v = conditional_variance(&asm, &m).unwrap().value;
        prop_assert!(v >= hidden_avg - 1e-10, "{v} < {hidden_avg}");
    }

    #[test]
    fn displacement_dominates_reduced_state_shift(
        (seed, dim, hidden, settings, outcomes) in params(),
        dt in 0.01f64..3.0,
    ) {
        let c = Constants::NATURAL;
        let Case { asm, m, h, .. } = case(seed, dim, hidden, settings, outcomes);
        let later = evolve_assemblage(&asm, &h, dt, &c).unwrap();
        let d = conditional_displacement(&asm, &later, &m).unwrap().value;
        let shift = (later.reduced_state().expectation(&m).unwrap()
            - asm.reduced_state().expectation(&m).unwrap())
        .abs();
        prop_assert!(d >= shift - 1e-10, "{d} < {shift}");
    }

    #[test]
    fn non_optimal_and_duplicate_settings_do_not_matter((seed, dim, hidden, _s, outcomes) in params()) {
        let c = Constants::NATURAL;
        let Case { asm, m, h, .. } = case(seed, dim, hidden, 3, outcomes);

        let var = conditional_variance(&asm, &m).unwrap();
        let rate = conditional_mean_rate(&asm, &m, &h, &c).unwrap();
        let keep: Vec<&str> = SETTINGS
            .iter()
            .copied()
            .filter(|s| *s == var.setting || *s == rate.setting)
            .collect();
        let pruned = asm.restricted(&keep).unwrap();
        prop_assert_eq!(conditional_variance(&pruned, &m).unwrap().value, var.value);
        prop_assert_eq!(conditional_mean_rate(&pruned, &m, &h, &c).unwrap().value, rate.value);

        let mut tables = asm.settings().to_vec();
        let mut dup = tables[0].clone();
        dup.label = "X-again".into();
        tables.push(dup);
        let extended = DiscreteAssemblage::new(asm.dim(), tables).unwrap();
        prop_assert_eq!(conditional_variance(&extended, &m).unwrap().value, var.value);
        prop_assert_eq!(conditional_mean_rate(&extended, &m, &h, &c).unwrap().value, rate.value);
    }
}

#[test]
fn single_pure_states_obey_the_plain_limit() {
    let c = Constants::NATURAL;
    let mut rng = stream_rng(2024, 0);
    for _ in 0..100 {
        let psi = DensityMatrix::pure(&random_pure_state(&mut rng, 2)).unwrap();
        let asm = DiscreteAssemblage::new(
            2,
            vec![qsl_steering::assemblage::SettingTable::new(
                "only",
                vec![qsl_steering::assemblage::Outcome::new("a", 1.0, psi)],
            )],
        )
        .unwrap();
        let m = random_hermitian(&mut rng, 2);
        let h = random_hermitian(&mut rng, 2);
        let w = mt_witness(&asm, &m, &h, &c).unwrap();
        assert!(w.degenerate || w.gamma >= 1.0 - 1e-9, "gamma = {}", w.gamma);
    }
}
