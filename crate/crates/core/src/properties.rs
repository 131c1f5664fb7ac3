//! Property tests over random lattices and the built-in families.

use proptest::prelude::*;

use crate::builtin;
use crate::chsh::{conditional_table, model_chsh};
use crate::freewill::{assert_equivalence, freewill_report};
use crate::independence::{
    independence_report, measurement_dependence_table, outcome_dependence_table, parameter_dependence_table,
    HiddenSubset, LambdaTable, Witness,
};
use crate::random::{random_lattice, RandomFamily};
use crate::sampling::{sample_words, SampleRun, SamplerKind};
use crate::search::{maximize_chsh, Objective, SearchSpace};
use crate::series::{chain_check, ladder_check};
use crate::{build_model, BoltzmannModel, PartialAssignment, Spin, SpinConfiguration};

fn family() -> impl Strategy<Value = RandomFamily> {
    prop::sample::select(RandomFamily::ALL.to_vec())
}

fn model(seed: u64, nodes: usize, family: RandomFamily) -> BoltzmannModel {
    build_model(random_lattice(seed, nodes, family).unwrap()).unwrap()
}

fn assign(entries: &[(usize, Spin)]) -> PartialAssignment {
    PartialAssignment::new(entries.to_vec()).unwrap()
}

fn spin(bits: u32, i: usize) -> Spin {
    Spin::from_bit(bits >> i & 1 == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn probabilities_are_normalized(seed: u64, nodes in 5usize..=12, f in family()) {
        let m = model(seed, nodes, f);
        let total: f64 = m.configuration_weights().iter().sum::<f64>() / m.z_shifted();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let t = m.probability_table(&[0, 1, 2, 3]).unwrap();
        prop_assert!((t.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(t.iter().all(|&p| (0.0..=1.0 + 1e-15).contains(&p)));
    }

    #[test]
    fn marginals_are_partition_sums(seed: u64, nodes in 5usize..=12, f in family(), pick in any::<prop::sample::Index>()) {
        let m = model(seed, nodes, f);
        let k = pick.index(nodes - 2) + 2;
        let coarse = m.probability_table(&[0, 1]).unwrap();
        let fine = m.probability_table(&[0, 1, k]).unwrap();
        for (c, &p) in coarse.iter().enumerate() {
            let summed = fine[c] + fine[c | 4];
            prop_assert!((p - summed).abs() <= 1e-12);
        }
        let eta = assign(&[(k, Spin::Up)]);
        let direct = m.marginal(&eta).unwrap();
        let from_table = m.probability_table(&[k]).unwrap()[1];
        prop_assert!((direct - from_table).abs() <= 1e-12);
    }

    #[test]
    fn chain_rule(seed: u64, nodes in 5usize..=12, f in family(), i in 0usize..5, j in 0usize..5, si: bool, sj: bool) {
        prop_assume!(i != j);
        let m = model(seed, nodes, f);
        let a = assign(&[(i, Spin::from_bit(si))]);
        let b = assign(&[(j, Spin::from_bit(sj))]);
        let joint = m.marginal(&a.union(&b).unwrap()).unwrap();
        let pb = m.marginal(&b).unwrap();
        let cond = m.conditional(&a, &b).unwrap();
        prop_assert!((joint - cond * pb).abs() <= 1e-12);
    }

    #[test]
    fn markov_blanket(seed: u64, nodes in 5usize..=12, f in family(), site in any::<prop::sample::Index>(), bits: u32) {
        let m = model(seed, nodes, f);
        let i = site.index(nodes);
        let neighbours = m.spec().neighbours();
        let rest: Vec<(usize, Spin)> = (0..nodes).filter(|&k| k != i).map(|k| (k, spin(bits, k))).collect();
        let blanket: Vec<(usize, Spin)> = neighbours[i].iter().map(|&k| (k, spin(bits, k))).collect();
        let target = assign(&[(i, Spin::Up)]);
        let full = m.conditional(&target, &assign(&rest)).unwrap();
        let local = if blanket.is_empty() { m.marginal(&target).unwrap() } else { m.conditional(&target, &assign(&blanket)).unwrap() };
        prop_assert!((full - local).abs() <= 1e-10, "{full} vs {local}");
    }

    #[test]
    fn zero_field_flip_symmetry(seed: u64, nodes in 5usize..=12, bits: u32) {
        let mut spec = random_lattice(seed, nodes, RandomFamily::General).unwrap();
        for n in &mut spec.nodes {
            n.h = 0.0;
        }
        let m = build_model(spec).unwrap();
        let c = SpinConfiguration::from_bits(bits & ((1 << nodes) - 1), nodes);
        let p = m.probability(&c).unwrap();
        let q = m.probability(&c.flipped()).unwrap();
        prop_assert!((p - q).abs() <= 1e-12 * p.max(q).max(1e-300));
    }

    #[test]
    fn freewill_equivalence(seed: u64, nodes in 5usize..=12, f in family()) {
        let m = model(seed, nodes, f);
        prop_assert!(assert_equivalence(&m).unwrap() <= 1e-12);
        let r = freewill_report(&m).unwrap();
        prop_assert!(r.derived_discrepancy.unwrap() <= 1e-12);
        prop_assert!(r.partition_defect <= 1e-12);
    }

    #[test]
    fn premises_imply_bell_inequality(seed: u64, nodes in 5usize..=11, f in family()) {
        let m = model(seed, nodes, f);
        let r = independence_report(&m, &HiddenSubset::all(&m).unwrap()).unwrap();
        let x = model_chsh(&m).unwrap();
        if r.mi_holds && r.oi_holds && r.pi_holds {
            prop_assert!(x.x_bi.abs() <= 2.0 + 1e-9);
        }
        prop_assert!(x.max_abs_x <= 4.0 + 1e-12);
        prop_assert!(x.max_abs_x >= x.x_bi.abs() - 1e-15);
    }

    #[test]
    fn witnesses_reproduce_their_values(seed: u64, nodes in 5usize..=11) {
        let m = model(seed, nodes, RandomFamily::General);
        let lambda = HiddenSubset::all(&m).unwrap();
        let table = LambdaTable::from_model(&m, &lambda).unwrap();
        let md = measurement_dependence_table(&table).unwrap();
        if let Witness::Measurement { first, second, value } = md.witness {
            prop_assert_eq!(table.md_pair(first, second).unwrap(), md.value);
            prop_assert_eq!(value, md.value);
        }
        let od = outcome_dependence_table(&table, &lambda).unwrap();
        if let Witness::Outcome { setting, lambda_bits, .. } = od.od.witness {
            prop_assert_eq!(table.od_at(setting, lambda_bits).unwrap().0, od.od.value);
        }
        let pd = parameter_dependence_table(&table, &lambda).unwrap();
        if let Witness::Parameter { side, first, second, lambda_bits, outcome, .. } = pd.pd.witness {
            let p = table.outcome_marginal(side, outcome, first, lambda_bits).unwrap();
            let q = table.outcome_marginal(side, outcome, second, lambda_bits).unwrap();
            prop_assert_eq!((p - q).abs(), pd.pd.value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_ladders_are_mirror_symmetric(unit in prop::collection::vec(0.0f64..=1.0, 13)) {
        let base = builtin::canonical_ladder(1.0, 1.0);
        let space = SearchSpace::symmetric(base, |id| builtin::mirror_label(id).map(str::to_string), Objective::XBi).unwrap();
        let point: Vec<f64> = space.params().iter().zip(&unit).map(|(p, u)| p.lower + u * (p.upper - p.lower)).collect();
        let m = build_model(space.apply(&point).unwrap()).unwrap();
        let t = conditional_table(&m).unwrap();
        for (s1, s2, sa, sb, p) in t.cells() {
            prop_assert!((p - t.get(s2, s1, sb, sa)).abs() <= 1e-12);
        }
    }

    #[test]
    fn ladder_series_matches_enumeration(k in 0.0f64..0.95) {
        let dev = ladder_check(k).unwrap().iter().map(|r| r.max_rel_dev).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-9, "{dev}");
    }

    #[test]
    fn chain_series_matches_enumeration(n in 5usize..=10, k in 0.0f64..0.95) {
        let dev = chain_check(n, k).unwrap().iter().map(|r| r.max_rel_dev).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-9, "{dev}");
    }

    #[test]
    fn sampling_is_seed_deterministic(seed: u64, metropolis: bool) {
        let m = build_model(builtin::canonical_ladder(1.0, 1.0)).unwrap();
        let kind = if metropolis { SamplerKind::Metropolis { burn_in: 100, thin: 3 } } else { SamplerKind::ExactCategorical };
        let run = SampleRun { seed, n: 200, kind };
        prop_assert_eq!(sample_words(&m, &run).unwrap(), sample_words(&m, &run).unwrap());
    }

    #[test]
    fn search_incumbents_reevaluate(seed: u64) {
        let base = builtin::canonical_ladder(1.0, 1.0);
        let space = SearchSpace::uniform_coupling(base, 0.0, 2.0, Objective::MaxAbsX).unwrap();
        let result = maximize_chsh(&space, 40, seed, 2).unwrap();
        for inc in &result.trajectory {
            prop_assert!((space.score(&inc.point) - inc.value).abs() <= 1e-10);
        }
        let again = space.evaluate(&result.best_point).unwrap();
        prop_assert!((again.max_abs_x - result.best_value).abs() <= 1e-10);
        prop_assert!(result.evaluations <= 40);
    }
}
