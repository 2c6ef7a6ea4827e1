use pbdlearn_core::dist::{
    brute_force_pbd_pmf, kolmogorov_distance, pbd_pmf, tv_distance, Pmf, ProbVector, UNIMODAL_SLACK,
};
use pbdlearn_core::empirical::SampleSet;
use pbdlearn_core::selection::competition;
use proptest::prelude::*;

fn probs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64], 1..=max_len)
}

fn pmf(len: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.0..1.0f64, len).prop_filter_map("nonzero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| Pmf::new(w.iter().map(|x| x / s).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_matches_brute_force(p in probs(15)) {
        let pv = ProbVector::new(p).unwrap();
        let dp = pbd_pmf(&pv);
        let bf = brute_force_pbd_pmf(&pv).unwrap();
        for (a, b) in dp.mass().iter().zip(bf.mass()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((dp.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pbd_is_unimodal(p in probs(60)) {
        prop_assert!(pbd_pmf(&ProbVector::new(p).unwrap()).is_unimodal(UNIMODAL_SLACK));
    }

    #[test]
    fn tv_is_a_metric(a in pmf(8), b in pmf(8), c in pmf(8)) {
        let ab = tv_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, tv_distance(&b, &a));
        prop_assert_eq!(tv_distance(&a, &a), 0.0);
        prop_assert!(tv_distance(&a, &c) <= ab + tv_distance(&b, &c) + 1e-12);
    }

    #[test]
    fn kolmogorov_at_most_twice_tv(a in pmf(10), b in pmf(10)) {
        let dk = kolmogorov_distance(&a.to_cdf(), &b.to_cdf());
        prop_assert!(dk <= 2.0 * tv_distance(&a, &b) + 1e-12);
    }

    #[test]
    fn competition_swap_mirrors(a in pmf(6), b in pmf(6), xs in prop::collection::vec(0u64..6, 1..200), delta in 0.001..0.2f64) {
        let s = SampleSet::new(xs, 5).unwrap();
        let ab = competition(&a, &b, &s, delta).unwrap();
        let ba = competition(&b, &a, &s, delta).unwrap();
        prop_assert_eq!(ab.outcome, ba.outcome.mirrored());
        prop_assert_eq!(ab.p1, ba.p1);
        prop_assert_eq!(ab.q1, ba.q1);
        prop_assert_eq!(ab.t_stat, ba.t_stat);
    }
}
