mod oracles;

use std::collections::{BTreeMap, BTreeSet};

use embedforge_core::filter::{filter_triplets, judge, FilterConfig, RejectReason, RerankScore};
use embedforge_core::mining::{mine_hard_negatives, MiningParams};
use embedforge_core::{rng, Error};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (Vec<u8>, usize, Vec<bool>, usize, usize)> {
    (1usize..=50).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..20, n),
            0..n,
            prop::collection::vec(prop::bool::weighted(0.1), n),
            1usize..=60,
            1usize..=60,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mining_matches_brute_force((raw, pos, relevant, top_n, window) in instance()) {
        let scored: Vec<(String, f64)> =
            raw.iter().enumerate().map(|(i, s)| (format!("d{i:02}"), f64::from(*s) / 19.0)).collect();
        let positive = scored[pos].0.clone();
        let also: BTreeSet<String> = scored
            .iter()
            .zip(&relevant)
            .filter(|(d, r)| **r && d.0 != positive)
            .map(|(d, _)| d.0.clone())
            .collect();
        let map: BTreeMap<String, f64> = scored.iter().cloned().collect();
        let params = MiningParams { top_n_for_sigma: top_n, candidate_window_k: window, negatives_per_query: 2, seed: 0 };
        let (sigma, eligible) = oracles::mining(&scored, &positive, &also, top_n, window).unwrap();
        match mine_hard_negatives("q", &map, &positive, &also, &params, &mut rng::seeded(3)) {
            Ok(m) => {
                prop_assert!((m.sigma - sigma).abs() < 1e-12);
                prop_assert_eq!(&m.eligible, &eligible);
                prop_assert_eq!(m.sampled.len(), eligible.len().min(2));
                prop_assert!(m.sampled.iter().all(|s| eligible.contains(s)));
                // Nothing eligible sits inside the ignore margin.
                let sp = map[&positive];
                prop_assert!(m.eligible.iter().all(|d| !(map[d] > sp - m.sigma && map[d] < sp)));
            }
            Err(Error::EmptyEligible(_)) => prop_assert!(eligible.is_empty()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn eligible_set_is_affine_invariant((raw, pos, _rel, top_n, window) in instance(), slope in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let base: BTreeMap<String, f64> =
            raw.iter().enumerate().map(|(i, s)| (format!("d{i:02}"), f64::from(*s))).collect();
        let mapped: BTreeMap<String, f64> = base.iter().map(|(d, s)| (d.clone(), s * slope + shift)).collect();
        let positive = format!("d{pos:02}");
        let params = MiningParams { top_n_for_sigma: top_n, candidate_window_k: window, negatives_per_query: 1, seed: 0 };
        let none = BTreeSet::new();
        let a = mine_hard_negatives("q", &base, &positive, &none, &params, &mut rng::seeded(0)).map(|m| m.eligible);
        let b = mine_hard_negatives("q", &mapped, &positive, &none, &params, &mut rng::seeded(0)).map(|m| m.eligible);
        // Integer-valued scores keep the threshold comparison exact up to rounding;
        // allow disagreement only for docs that sit on the boundary.
        if a != b {
            let sp = base[&positive];
            let top: Vec<f64> = {
                let mut v: Vec<f64> = base.values().copied().collect();
                v.sort_by(|x, y| y.total_cmp(x));
                v.truncate(top_n);
                v
            };
            let mean = top.iter().sum::<f64>() / top.len() as f64;
            let sigma = (top.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / top.len() as f64).sqrt();
            prop_assert!(base.values().any(|s| ((sp - sigma) - s).abs() < 1e-9));
        }
    }

    #[test]
    fn filter_gate_is_exact(pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..200)) {
        let scores: Vec<RerankScore> = pairs
            .iter()
            .enumerate()
            .map(|(i, (p, n))| RerankScore { id: i.to_string(), s_pos: *p, s_neg: *n })
            .collect();
        let out = filter_triplets(&scores, &FilterConfig::default());
        let expected: Vec<String> = scores
            .iter()
            .filter(|s| s.s_pos - s.s_neg > 0.0 && s.s_pos - s.s_neg < 0.96)
            .map(|s| s.id.clone())
            .collect();
        prop_assert_eq!(&out.kept, &expected);
        prop_assert_eq!(out.kept.len() + out.rejected.len(), scores.len());
        // Idempotent and order independent.
        let kept_scores: Vec<RerankScore> = scores.iter().filter(|s| out.kept.contains(&s.id)).cloned().collect();
        prop_assert_eq!(&filter_triplets(&kept_scores, &FilterConfig::default()).kept, &out.kept);
        let mut reversed = scores.clone();
        reversed.reverse();
        let mut rk = filter_triplets(&reversed, &FilterConfig::default()).kept;
        rk.reverse();
        prop_assert_eq!(rk, out.kept);
    }

    #[test]
    fn raising_c_never_shrinks_kept(pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..100), mut ladder in prop::collection::vec(0.01f64..=1.0, 2..6)) {
        ladder.sort_by(f64::total_cmp);
        let scores: Vec<RerankScore> = pairs
            .iter()
            .enumerate()
            .map(|(i, (p, n))| RerankScore { id: i.to_string(), s_pos: *p, s_neg: *n })
            .collect();
        let mut prev: BTreeSet<String> = BTreeSet::new();
        for c in ladder {
            let kept: BTreeSet<String> = filter_triplets(&scores, &FilterConfig::new(c).unwrap()).kept.into_iter().collect();
            prop_assert!(prev.is_subset(&kept));
            prev = kept;
        }
    }
}

#[test]
fn filter_examples() {
    let cfg = FilterConfig::default();
    let s = |p, n| RerankScore { id: "t".into(), s_pos: p, s_neg: n };
    assert_eq!(judge(&s(0.80, 0.30), &cfg), Ok(()));
    assert_eq!(judge(&s(0.99, 0.01), &cfg), Err(RejectReason::MarginAtLeastC));
    assert_eq!(judge(&s(0.40, 0.50), &cfg), Err(RejectReason::NonPositiveMargin));
    assert_eq!(RejectReason::MarginAtLeastC.to_string(), "margin ≥ C");
    // Boundary margin equal to C is rejected.
    assert_eq!(judge(&s(0.5, 0.0), &FilterConfig::new(0.5).unwrap()), Err(RejectReason::MarginAtLeastC));
    assert!(s(1.2, 0.0).validate().is_err());
}

#[test]
fn mining_edge_cases() {
    let all_equal: BTreeMap<String, f64> = ["a", "b", "c", "p"].iter().map(|d| (d.to_string(), 0.5)).collect();
    let m = mine_hard_negatives("q", &all_equal, "b", &BTreeSet::new(), &MiningParams::default(), &mut rng::seeded(0))
        .unwrap();
    assert_eq!(m.sigma, 0.0);
    assert_eq!(m.eligible, vec!["c", "p"]);
    let only: BTreeMap<String, f64> = [("d+".to_string(), 0.9)].into_iter().collect();
    assert!(matches!(
        mine_hard_negatives("q", &only, "d+", &BTreeSet::new(), &MiningParams::default(), &mut rng::seeded(0)),
        Err(Error::EmptyEligible(_))
    ));
    assert!(matches!(
        mine_hard_negatives("q", &only, "zz", &BTreeSet::new(), &MiningParams::default(), &mut rng::seeded(0)),
        Err(Error::PositiveMissing(_))
    ));
}
