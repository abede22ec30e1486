mod common;

use std::collections::BTreeMap;

use common::rat;
use gcb_core::fixtures::{dumbbell, five_checks};
use gcb_core::gibbs::{
    global_function, global_function_exact, gibbs_energy_terms, gibbs_minimizer,
    gibbs_partition, gibbs_partition_exact, log_gibbs_partition, modified_gibbs_partition, relative_entropy,
    ConfigDistribution,
};
use gcb_core::nfg::format::{emit_nfg, parse_nfg};
use gcb_core::nfg::{enumerate_configurations, LocalTable};
use gcb_core::types::{type_class_size, type_of_sequence, type_probability, types_of_degree, TypeVector};
use gcb_core::{Caps, Configuration, Error, Nfg};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(bits: &str) -> Configuration {
    Configuration(bits.chars().map(|c| c.to_digit(10).unwrap()).collect())
}

fn single_free_edge() -> Nfg {
    parse_nfg("halfedge x\nfactor f x\nrow 0 1\nrow 1 1\n").unwrap()
}

fn two_valued() -> Nfg {
    parse_nfg("halfedge x\nfactor f x\nrow 0 1\nrow 1 2.718281828459045\n").unwrap()
}

#[test]
fn five_checks_has_eight_valid_configurations() {
    let configs = enumerate_configurations(&five_checks(), &Caps::default()).unwrap();
    assert_eq!(configs.len(), 8);
    assert!(configs.iter().any(|c| c.config == config("10011011")));
    let mut sorted: Vec<_> = configs.iter().map(|c| c.config.clone()).collect();
    sorted.sort();
    assert_eq!(sorted, configs.iter().map(|c| c.config.clone()).collect::<Vec<_>>());
}

#[test]
fn five_checks_half_edge_projection() {
    let nfg = five_checks();
    let half = nfg.half_edges();
    let projected: std::collections::BTreeSet<Vec<u32>> = enumerate_configurations(&nfg, &Caps::default())
        .unwrap()
        .iter()
        .map(|c| half.iter().map(|&e| c.config.0[e]).collect())
        .collect();
    assert_eq!(projected, [vec![0, 0], vec![1, 1]].into_iter().collect());
}

#[test]
fn unconstrained_edge_has_two_unit_configurations() {
    let configs = enumerate_configurations(&single_free_edge(), &Caps::default()).unwrap();
    assert_eq!(configs.len(), 2);
    assert!(configs.iter().all(|c| c.value == 1.0));
}

#[test]
fn enumeration_respects_the_cap() {
    let caps = Caps { config: 16, ..Caps::default() };
    assert!(matches!(enumerate_configurations(&five_checks(), &caps), Err(Error::CapExceeded { .. })));
}

#[test]
fn global_function_examples() {
    let nfg = five_checks();
    assert_eq!(global_function(&nfg, &config("10011011")).unwrap(), 1.0);
    assert_eq!(global_function(&nfg, &config("10000000")).unwrap(), 0.0);
    let chain = parse_nfg(
        "alphabet b 3\nhalfedge a\nfulledge b f1 f2\nfactor f1 a b\nrow 00 2\nrow 01 1/3\nrow 12 5\nfactor f2 b\nrow 0 1/2\nrow 1 7\nrow 2 3\n",
    )
    .unwrap();
    let c = chain.configuration(&[("a", 0), ("b", 1)]).unwrap();
    assert_eq!(global_function_exact(&chain, &c).unwrap(), rat("7/3"));
    let c = chain.configuration(&[("a", 1), ("b", 2)]).unwrap();
    assert_eq!(global_function_exact(&chain, &c).unwrap(), rat("15"));
}

#[test]
fn global_function_rejects_malformed_configurations() {
    let nfg = five_checks();
    assert!(matches!(global_function(&nfg, &config("10011012")), Err(Error::OutOfAlphabet { .. })));
    assert!(matches!(nfg.configuration(&[("e9", 0)]), Err(Error::UnknownEdge(_))));
}

#[test]
fn gibbs_partition_examples() {
    let caps = Caps::default();
    assert_eq!(gibbs_partition_exact(&dumbbell(), &caps).unwrap(), rat("4"));
    assert_eq!(gibbs_partition_exact(&five_checks(), &caps).unwrap(), rat("8"));
    assert_eq!(gibbs_partition(&five_checks(), 1.0, &caps).unwrap(), 8.0);
    let empty = parse_nfg("halfedge x\nfactor f x\nrow 0 0\nrow 1 0\n").unwrap();
    assert_eq!(gibbs_partition(&empty, 1.0, &caps).unwrap(), 0.0);
    assert!(gibbs_partition_exact(&empty, &caps).unwrap().is_zero());
}

#[test]
fn gibbs_partition_at_other_temperatures() {
    let nfg = two_valued();
    let z = gibbs_partition(&nfg, 0.5, &Caps::default()).unwrap();
    assert!((z - (1.0 + 1f64.exp().powi(2))).abs() < 1e-12);
    assert!(gibbs_partition(&nfg, 0.0, &Caps::default()).is_err());
}

#[test]
fn gibbs_energy_terms_examples() {
    let nfg = five_checks();
    let caps = Caps::default();
    let uniform = gibbs_minimizer(&nfg, 1.0, &caps).unwrap();
    assert_eq!(uniform.entries().len(), 8);
    assert!(uniform.entries().iter().all(|(_, p)| (p - 0.125).abs() < 1e-15));
    let terms = gibbs_energy_terms(&nfg, &uniform).unwrap();
    assert_eq!(terms.u, 0.0);
    assert!((terms.h - 8f64.ln()).abs() < 1e-14);
    assert!((terms.free_energy(1.0) + 8f64.ln()).abs() < 1e-14);

    let point = ConfigDistribution::new(vec![(config("10011011"), 1.0)]).unwrap();
    assert_eq!(gibbs_energy_terms(&nfg, &point).unwrap().h, 0.0);

    let bad = ConfigDistribution::new(vec![(config("10000000"), 1.0)]).unwrap();
    assert_eq!(gibbs_energy_terms(&nfg, &bad), Err(Error::SupportOnZeroMass));
}

#[test]
fn gibbs_minimizer_examples() {
    let caps = Caps::default();
    let p = gibbs_minimizer(&two_valued(), 1.0, &caps).unwrap();
    let e = 1f64.exp();
    assert!((p.probability(&config("0")) - 1.0 / (1.0 + e)).abs() < 1e-12);
    assert!((p.probability(&config("1")) - e / (1.0 + e)).abs() < 1e-12);

    let single = parse_nfg("halfedge x\nfactor f x\nrow 0 0\nrow 1 3\n").unwrap();
    let p = gibbs_minimizer(&single, 1.0, &caps).unwrap();
    assert_eq!(p.entries(), &[(config("1"), 1.0)]);

    let empty = parse_nfg("halfedge x\nfactor f x\nrow 0 0\nrow 1 0\n").unwrap();
    assert_eq!(gibbs_minimizer(&empty, 1.0, &caps), Err(Error::EmptyCode));
}

#[test]
fn modified_gibbs_partition_examples() {
    let caps = Caps::default();
    let nfg = five_checks();
    assert_eq!(modified_gibbs_partition(&nfg, &[0, 0], 1.0, &caps).unwrap(), 4.0);
    assert_eq!(modified_gibbs_partition(&nfg, &[0, 1], 1.0, &caps).unwrap(), 0.0);
    let closed = dumbbell();
    assert_eq!(
        modified_gibbs_partition(&closed, &[], 1.0, &caps).unwrap(),
        gibbs_partition(&closed, 1.0, &caps).unwrap()
    );
    assert!(matches!(modified_gibbs_partition(&nfg, &[0], 1.0, &caps), Err(Error::LengthMismatch { .. })));
}

#[test]
fn type_examples() {
    let nfg = five_checks();
    let c = config("10011011");
    let d = config("00000000");
    let q = type_of_sequence(&nfg, &[c.clone(), c.clone(), c.clone()]).unwrap();
    assert_eq!(q.degree(), 3);
    assert_eq!(q.frequency(&c), BigRational::one());
    assert_eq!(type_class_size(&q), BigUint::one());

    let q = type_of_sequence(&nfg, &[c.clone(), d.clone()]).unwrap();
    assert_eq!(q.frequency(&c), rat("1/2"));
    assert_eq!(q.frequency(&d), rat("1/2"));
    assert_eq!(type_class_size(&q), BigUint::from(2u32));

    let seq = [c.clone(), d.clone(), c.clone(), config("11110000")];
    let q = type_of_sequence(&nfg, &seq).unwrap();
    let expected: Vec<BigRational> = (0..8)
        .map(|e| BigRational::new(seq.iter().map(|s| s.0[e] as i64).sum::<i64>().into(), 4.into()))
        .collect();
    assert_eq!(q.mean_vector(), expected);

    assert_eq!(type_of_sequence(&nfg, &[c, config("10000000")]), Err(Error::InvalidMember(1)));
}

#[test]
fn type_class_size_multinomial() {
    let counts: BTreeMap<Configuration, u32> =
        [(config("00000000"), 2), (config("10011011"), 1), (config("11110000"), 1)].into_iter().collect();
    assert_eq!(type_class_size(&TypeVector::from_counts(counts).unwrap()), BigUint::from(12u32));
}

#[test]
fn type_distribution_sums_to_one() {
    let caps = Caps::default();
    for nfg in [five_checks(), dumbbell(), two_valued()] {
        let configs: Vec<Configuration> =
            enumerate_configurations(&nfg, &caps).unwrap().into_iter().map(|c| c.config).collect();
        let z = gibbs_partition_exact(&nfg, &caps).unwrap();
        for m in 1..=4 {
            let types = types_of_degree(&configs, m);
            assert!(BigUint::from(types.len()) <= BigUint::from(m + 1).pow(configs.len() as u32));
            if nfg.is_indicator() {
                let total: BigRational = types.iter().map(|q| type_probability(&nfg, q, &z).unwrap()).sum();
                assert_eq!(total, BigRational::one(), "M = {m}");
            }
        }
    }
}

#[test]
fn indicator_partition_counts_valid_configurations() {
    let caps = Caps::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let n = rng.random_range(3..=6);
        let h = common::random_tree_code(&mut rng, n);
        let nfg = gcb_core::coding::nfg_from_parity_check(&h);
        let count = enumerate_configurations(&nfg, &caps).unwrap().len();
        assert_eq!(gibbs_partition_exact(&nfg, &caps).unwrap(), BigRational::from_integer(count.into()));
    }
}

#[test]
fn nfg_text_round_trips() {
    for nfg in [five_checks(), dumbbell(), two_valued()] {
        let text = emit_nfg(&nfg);
        assert_eq!(parse_nfg(&text).unwrap(), nfg);
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    assert!(matches!(parse_nfg("halfedge x\nfactor f x\nrow 0 -1\n"), Err(Error::Parse { line: 3, .. })));
    assert!(matches!(parse_nfg("halfedge x\nbogus\n"), Err(Error::Parse { line: 2, .. })));
    assert!(parse_nfg("fulledge x f g\nfactor f x\nparity\n").is_err());
}

#[test]
fn repetition_shorthand_matches_explicit_rows() {
    let short = parse_nfg("halfedge a\nhalfedge b\nfactor f a b\nrepetition\n").unwrap();
    let long = parse_nfg("halfedge a\nhalfedge b\nfactor f a b\nrow 00 1\nrow 11 1\n").unwrap();
    assert_eq!(short.factor(0).table, long.factor(0).table);
    assert_eq!(LocalTable::repetition(vec![2, 2]).unwrap(), long.factor(0).table);
}

fn distribution_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gibbs_free_energy_is_minimized_at_p_star(weights in distribution_strategy(4), t in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let nfg = parse_nfg("halfedge x\nhalfedge y\nfactor f x y\nrow 00 1\nrow 01 2\nrow 10 1/3\nrow 11 5/2\n").unwrap();
        let caps = Caps::default();
        let configs: Vec<Configuration> = enumerate_configurations(&nfg, &caps).unwrap().into_iter().map(|c| c.config).collect();
        let p = ConfigDistribution::new(configs.into_iter().zip(weights).collect()).unwrap();
        let star = gibbs_minimizer(&nfg, t, &caps).unwrap();
        let f_p = gibbs_energy_terms(&nfg, &p).unwrap().free_energy(t);
        let f_star = gibbs_energy_terms(&nfg, &star).unwrap().free_energy(t);
        prop_assert!(f_p >= f_star - 1e-12);
        let log_z = log_gibbs_partition(&nfg, t, &caps).unwrap();
        prop_assert!((f_p - (t * relative_entropy(&p, &star) - t * log_z)).abs() <= 1e-10);
    }
}
