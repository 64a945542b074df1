use proptest::prelude::*;
use star_noma::channel::Zone;
use star_noma::noma::SicMode;
use star_noma::scenario::{
    AxisKind, NoiseModel, ScenarioConfig, SweepConfig, SystemConfig, SystemVariant, UserConfig,
};

fn users() -> impl Strategy<Value = Vec<UserConfig>> {
    prop::collection::vec((any::<bool>(), 0usize..200, 0.01f64..1.0, 0.5f64..30.0, prop::option::of(1.0f64..100.0)), 1..5)
        .prop_map(|raw| {
            let mut weights: Vec<f64> = raw.iter().map(|r| r.2).collect();
            weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let total: f64 = weights.iter().sum();
            let mut power: Vec<f64> = weights.iter().map(|w| w / total).collect();
            // put the rounding residue on the first user so the sum is 1 and order holds
            let rest: f64 = power[1..].iter().sum();
            power[0] = 1.0 - rest;
            raw.into_iter()
                .zip(power)
                .map(|((t, elements, _, ris, bs), power)| UserConfig {
                    zone: if t { Zone::Transmission } else { Zone::Reflection },
                    elements,
                    power,
                    ris_distance: Some(ris),
                    bs_distance: bs,
                })
                .collect()
        })
}

fn config() -> impl Strategy<Value = ScenarioConfig> {
    (
        users(),
        0.1f64..10.0,
        1.0f64..200.0,
        (1.5f64..4.0, 1.5f64..4.0),
        any::<bool>(),
        any::<bool>(),
        prop::option::of((prop::collection::vec(-20.0f64..80.0, 1..6), any::<u64>(), 1u64..1000)),
    )
        .prop_map(|(users, p, d, (e1, e2), detected, circular, sweep)| ScenarioConfig {
            system: SystemConfig {
                variant: SystemVariant::StarRisNoma,
                transmit_power: p,
                bs_ris_distance: Some(d),
                bs_exponent: e1,
                ris_user_exponent: e2,
                classical_exponent: 2.0,
                sic: if detected { SicMode::Detected } else { SicMode::Genie },
                noise: if circular { NoiseModel::Circular } else { NoiseModel::PerDimension },
            },
            users,
            sweep: sweep.map(|(mut values, seed, min_errors)| {
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                values.dedup();
                SweepConfig {
                    axis: AxisKind::Snr,
                    values,
                    users: None,
                    snr_db: None,
                    seed: Some(seed),
                    min_errors: Some(min_errors),
                    max_trials: None,
                }
            }),
        })
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(c in config()) {
        prop_assume!(c.validate().is_ok());
        let text = c.to_toml_string().unwrap();
        let (back, _) = ScenarioConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &c);
        let (again, _) = ScenarioConfig::from_toml_str(&back.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(again, back);
    }
}
