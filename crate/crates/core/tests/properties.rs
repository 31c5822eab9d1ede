use proptest::prelude::*;

use peershare::analysis::{compositions, expected_shares, threshold_check, Belief, Resistance, SizeCap};
use peershare::io::parse_document;
use peershare::{
    DirectProfile, DirectReport, MechanismConfig, PeerEvaluation, PeerPrediction, PredictionProfile,
    PredictionReport, Rational, Report, SharingMechanism, StrategyProfile,
};

/// Picks one composition of `total` into `parts` from a raw index.
fn pick(total: u32, parts: usize, raw: usize) -> Vec<u32> {
    let all = compositions(total, parts);
    all[raw % all.len()].clone()
}

fn direct_profile(config: &MechanismConfig, picks: &[usize]) -> DirectProfile {
    let reports = config
        .agents()
        .map(|i| DirectReport::from_values(i, pick(config.cap, config.n - 1, picks[i - 1]), config).unwrap())
        .collect();
    StrategyProfile::new(reports, config).unwrap()
}

fn prediction_profile(config: &MechanismConfig, picks: &[usize]) -> PredictionProfile {
    let evaluators = (config.n - 1) as u32;
    let reports = config
        .agents()
        .map(|i| {
            let hists = (0..config.n - 1)
                .map(|s| pick(evaluators, config.bins(), picks[(i - 1) * (config.n - 1) + s]))
                .collect();
            PredictionReport::from_histograms(i, hists, config).unwrap()
        })
        .collect();
    StrategyProfile::new(reports, config).unwrap()
}

fn rational(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Relabels agents: old agent `i` becomes `perm[i - 1]`.
fn relabel<R: Report>(profile: &StrategyProfile<R>, perm: &[usize], rebuild: impl Fn(usize, Vec<(usize, &R)>) -> R) -> Vec<R> {
    let n = perm.len();
    let mut out: Vec<Option<R>> = vec![None; n];
    for old in 1..=n {
        let report = profile.report(old);
        let entries = (1..=n).filter(|&j| j != old).map(|j| (perm[j - 1], report)).collect();
        out[perm[old - 1] - 1] = Some(rebuild(perm[old - 1], entries));
    }
    out.into_iter().map(Option::unwrap).collect()
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut s = seed;
    for i in (1..n).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        perm.swap(i, (s >> 33) as usize % (i + 1));
    }
    perm
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn peer_evaluation_is_budget_balanced(
        n in 2usize..7,
        m in 1u32..6,
        extra in 0i64..50,
        den in 1i64..7,
        picks in proptest::collection::vec(any::<usize>(), 6),
    ) {
        let reward = Rational::from(m) + rational(extra, den);
        let config = MechanismConfig::peer_evaluation(n, reward.clone(), m);
        let result = PeerEvaluation::new(config.clone()).unwrap().shares(&direct_profile(&config, &picks)).unwrap();
        let total: Rational = result.shares.iter().sum();
        prop_assert_eq!(total, reward);
        prop_assert!(result.shares.iter().all(|s| !s.is_negative()));
    }

    #[test]
    fn own_report_never_moves_own_peer_evaluation_share(
        n in 2usize..7,
        m in 1u32..6,
        picks in proptest::collection::vec(any::<usize>(), 6),
        agent_raw in any::<usize>(),
        replacement in any::<usize>(),
    ) {
        let config = MechanismConfig::peer_evaluation(n, 100, m);
        let mech = PeerEvaluation::new(config.clone()).unwrap();
        let profile = direct_profile(&config, &picks);
        let agent = agent_raw % n + 1;
        let lie = DirectReport::from_values(agent, pick(m, n - 1, replacement), &config).unwrap();
        let before = mech.shares(&profile).unwrap();
        let after = mech.shares(&profile.with_report(lie)).unwrap();
        prop_assert_eq!(before.share(agent), after.share(agent));
    }

    #[test]
    fn peer_prediction_never_loses_money(
        n in 3usize..7,
        m in 1u32..5,
        alpha_num in 1i64..40,
        alpha_den in 1i64..8,
        picks in proptest::collection::vec(any::<usize>(), 30),
    ) {
        let config = MechanismConfig::peer_prediction(n, 60, m, rational(alpha_num, alpha_den));
        let result = PeerPrediction::new(config.clone()).unwrap().shares(&prediction_profile(&config, &picks)).unwrap();
        let total: Rational = result.shares.iter().sum();
        prop_assert!(result.shares.iter().all(|s| !s.is_negative()));
        prop_assert!(total <= Rational::from(60));
        prop_assert_eq!(result.surplus, Rational::from(60) - total);
        prop_assert!(result.scores.iter().all(|s| !s.is_negative() && *s <= Rational::from(2)));
    }

    #[test]
    fn shares_scale_with_reward(
        m in 1u32..4,
        factor in 1i64..9,
        picks in proptest::collection::vec(any::<usize>(), 12),
    ) {
        let small = MechanismConfig::peer_prediction(4, 12, m, 2);
        let big = MechanismConfig::peer_prediction(4, 12 * factor, m, 2);
        let a = PeerPrediction::new(small.clone()).unwrap().shares(&prediction_profile(&small, &picks)).unwrap();
        let b = PeerPrediction::new(big.clone()).unwrap().shares(&prediction_profile(&big, &picks)).unwrap();
        for (x, y) in a.shares.iter().zip(&b.shares) {
            prop_assert_eq!(x * Rational::from(factor), y.clone());
        }
    }

    #[test]
    fn relabeling_agents_relabels_shares(
        n in 3usize..6,
        m in 1u32..4,
        perm_seed in any::<u64>(),
        picks in proptest::collection::vec(any::<usize>(), 20),
    ) {
        let perm = permutation(n, perm_seed);

        let config = MechanismConfig::peer_evaluation(n, 30, m);
        let profile = direct_profile(&config, &picks);
        let moved = relabel(&profile, &perm, |owner, entries| {
            let mut map = std::collections::BTreeMap::new();
            for (new_target, report) in entries {
                let old_target = perm.iter().position(|&p| p == new_target).unwrap() + 1;
                map.insert(new_target, u64::from(report.evaluation(old_target)));
            }
            DirectReport::from_map(owner, &map, &config).unwrap()
        });
        let mech = PeerEvaluation::new(config.clone()).unwrap();
        let a = mech.shares(&profile).unwrap();
        let b = mech.shares(&StrategyProfile::new(moved, &config).unwrap()).unwrap();
        for old in 1..=n {
            prop_assert_eq!(a.share(old), b.share(perm[old - 1]));
        }

        let config = MechanismConfig::peer_prediction(n, 30, m, rational(3, 2));
        let profile = prediction_profile(&config, &picks);
        let moved = relabel(&profile, &perm, |owner, entries| {
            let mut map = std::collections::BTreeMap::new();
            for (new_target, report) in entries {
                let old_target = perm.iter().position(|&p| p == new_target).unwrap() + 1;
                map.insert(new_target, report.histogram(old_target).iter().map(|&c| u64::from(c)).collect());
            }
            PredictionReport::from_map(owner, &map, &config).unwrap()
        });
        let mech = PeerPrediction::new(config.clone()).unwrap();
        let a = mech.shares(&profile).unwrap();
        let b = mech.shares(&StrategyProfile::new(moved, &config).unwrap()).unwrap();
        for old in 1..=n {
            prop_assert_eq!(a.share(old), b.share(perm[old - 1]));
        }
    }

    #[test]
    fn expected_shares_are_linear_in_beliefs(
        m in 1u32..3,
        w in 1i64..10,
        picks_a in proptest::collection::vec(any::<usize>(), 12),
        picks_b in proptest::collection::vec(any::<usize>(), 12),
    ) {
        let config = MechanismConfig::peer_prediction(4, 12, m, 1);
        let mech = PeerPrediction::new(config.clone()).unwrap();
        let a = prediction_profile(&config, &picks_a);
        let b = prediction_profile(&config, &picks_b);
        let weight = rational(w, 10);
        let rest = Rational::one() - &weight;
        let mixed = Belief::mixture(&[
            (Belief::from_profile(&a, 1), weight.clone()),
            (Belief::from_profile(&b, 1), rest.clone()),
        ]).unwrap();
        let own = a.report(1);
        let ea = expected_shares(&mech, &Belief::from_profile(&a, 1), own, 1).unwrap();
        let eb = expected_shares(&mech, &Belief::from_profile(&b, 1), own, 1).unwrap();
        let em = expected_shares(&mech, &mixed, own, 1).unwrap();
        for i in 0..4 {
            prop_assert_eq!(em[i].clone(), &ea[i] * &weight + &eb[i] * &rest);
        }
    }

    #[test]
    fn arbitrary_documents_never_panic(
        n in 0usize..6,
        m in 0u32..5,
        entries in proptest::collection::vec((0usize..7, 0u64..6, proptest::collection::vec(0u64..5, 0..5), any::<bool>()), 0..30),
        prediction in any::<bool>(),
    ) {
        let mut reports = vec![Vec::new(); n];
        for (idx, (target, value, hist, as_hist)) in entries.iter().enumerate() {
            if n == 0 {
                break;
            }
            let entry = if *as_hist { format!("{hist:?}") } else { value.to_string() };
            reports[idx % n].push(format!("\"{target}\": {entry}"));
        }
        let body: Vec<String> = reports.iter().map(|r| format!("{{{}}}", r.join(", "))).collect();
        let mechanism = if prediction { "peer-prediction" } else { "peer-evaluation" };
        let text = format!(
            r#"{{"mechanism": "{mechanism}", "config": {{"n": {n}, "V": "10", "M": {m}, "alpha": "1/2"}}, "reports": [{}]}}"#,
            body.join(", ")
        );
        if let Ok(doc) = parse_document(&text) {
            prop_assert!(peershare::compute_shares(&doc.config, &doc.profile).is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Above the bound no inflation pays under beliefs matching the liar's
    /// own forecasts, whatever those forecasts are; at the bound none is
    /// strictly profitable.
    #[test]
    fn resistance_above_the_bound_for_any_truthful_forecasts(
        n in 3usize..5,
        m in 1u32..3,
        extra in 1i64..4,
        picks in proptest::collection::vec(any::<usize>(), 12),
    ) {
        let base = MechanismConfig::peer_prediction(n, 12, m, 1);
        let truthful = prediction_profile(&base, &picks);
        let bound = Rational::from(m) * Rational::from(n - 1) / Rational::from(2);
        let rows = threshold_check(&base, &[bound.clone(), &bound + rational(extra, 4)], Some(&truthful), SizeCap::DEFAULT).unwrap();
        prop_assert_ne!(rows[0].resistance, Resistance::NotResistant);
        prop_assert_eq!(rows[1].resistance, Resistance::Resistant);
    }
}
