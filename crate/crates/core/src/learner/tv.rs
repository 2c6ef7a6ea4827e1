//! Total-variation proper learner.
//!
//! The cover is built at accuracy `eps^beta`. Sparse elements are screened
//! by the delta statistic, heavy elements by their CDF gap to the empirical
//! CDF; the first sparse element passing wins, and heavy elements are only
//! consulted when none does.

use alloc::vec::Vec;

use crate::cover::{build_cover, Cover, CoverConfig, CoverElement, HeavyBinomialForm, SparseForm};
use crate::dist::{binomial_mass, max_cdf_gap, pbd_mass};
use crate::empirical::{check_unit_open, dkw_sample_size, empirical_cdf, EmpiricalCdf, SampleSet};
use crate::error::{Error, Result};
use crate::learner::STAGE_DELTA;

#[derive(Clone, Debug, PartialEq)]
pub struct TvLearnerConfig {
    epsilon: f64,
    tau: f64,
    k_override: Option<u32>,
    delta_threshold: Option<f64>,
    h_threshold: Option<f64>,
    sparse_ell_cap: Option<usize>,
    heavy_q_stride: Option<u64>,
    element_cap: Option<usize>,
}

impl TvLearnerConfig {
    /// `tau` defaults to 1, so `beta = 13/12` and `alpha = 4.5`.
    pub fn new(epsilon: f64) -> Result<Self> {
        check_unit_open("epsilon", epsilon)?;
        Ok(TvLearnerConfig {
            epsilon,
            tau: 1.0,
            k_override: None,
            delta_threshold: None,
            h_threshold: None,
            sparse_ell_cap: None,
            heavy_q_stride: None,
            element_cap: None,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Domain {
                name: "tau",
                value: tau,
            });
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k_override = Some(k);
        self
    }

    /// Fixed delta-test threshold, replacing the per-element formula.
    pub fn with_delta_threshold(mut self, t: f64) -> Self {
        self.delta_threshold = Some(t);
        self
    }

    pub fn with_h_threshold(mut self, t: f64) -> Self {
        self.h_threshold = Some(t);
        self
    }

    pub fn with_sparse_ell_cap(mut self, cap: usize) -> Self {
        self.sparse_ell_cap = Some(cap);
        self
    }

    pub fn with_heavy_q_stride(mut self, stride: u64) -> Self {
        self.heavy_q_stride = Some(stride);
        self
    }

    pub fn with_element_cap(mut self, cap: usize) -> Self {
        self.element_cap = Some(cap);
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn beta(&self) -> f64 {
        1.0 + self.tau / 12.0
    }

    pub fn alpha(&self) -> f64 {
        4.0 + self.tau / 2.0
    }

    /// `eps^beta`, the accuracy of the cover the learner searches.
    pub fn cover_accuracy(&self) -> f64 {
        libm::pow(self.epsilon, self.beta())
    }

    /// `eps^alpha`, the Kolmogorov accuracy asked of the empirical CDF.
    pub fn cdf_accuracy(&self) -> f64 {
        libm::pow(self.epsilon, self.alpha())
    }

    pub fn cover_config(&self, n: usize) -> Result<CoverConfig> {
        let mut c = CoverConfig::new(self.cover_accuracy(), n)?;
        if let Some(k) = self.k_override {
            c = c.with_k(k)?;
        }
        if let Some(cap) = self.sparse_ell_cap {
            c = c.with_sparse_ell_cap(cap);
        }
        if let Some(s) = self.heavy_q_stride {
            c = c.with_heavy_q_stride(s);
        }
        if let Some(cap) = self.element_cap {
            c = c.with_element_cap(cap);
        }
        Ok(c)
    }

    /// `eps^beta + 2 |supp(Y)| eps^alpha`, unless overridden.
    pub fn delta_threshold(&self, support: usize) -> f64 {
        self.delta_threshold
            .unwrap_or_else(|| self.cover_accuracy() + 2.0 * support as f64 * self.cdf_accuracy())
    }

    /// `2 eps^beta + eps^alpha`, unless overridden.
    pub fn h_threshold(&self) -> f64 {
        self.h_threshold
            .unwrap_or_else(|| 2.0 * self.cover_accuracy() + self.cdf_accuracy())
    }

    /// `eps > eps^beta + 4 S eps^alpha` with `S` the largest sparse support
    /// in the cover.
    pub fn condition_holds(&self, max_sparse_support: usize) -> bool {
        self.epsilon > self.cover_accuracy() + 4.0 * max_sparse_support as f64 * self.cdf_accuracy()
    }

    /// Samples for a DKW estimate at accuracy `eps^alpha` with failure 1/20.
    pub fn sample_size(&self) -> Result<u64> {
        dkw_sample_size(self.cdf_accuracy(), STAGE_DELTA)
    }
}

/// Accepted cover element together with the statistic that accepted it.
#[derive(Clone, Debug, PartialEq)]
pub struct TvHypothesis {
    pub element: CoverElement,
    /// Delta statistic for sparse elements, CDF gap for heavy ones.
    pub statistic: f64,
    pub threshold: f64,
    /// Cover uncapped and the accuracy condition holds.
    pub certified: bool,
}

/// `(1/2) (sum_{z in supp} |f_Y(z) - fhat(z)| + 1 - sum_{z in supp} fhat(z))`.
pub fn delta_statistic(y: &SparseForm, e: &EmpiricalCdf, n: usize) -> f64 {
    debug_assert!(y.ones() + y.ell() <= n);
    delta_on_support(&pbd_mass(&y.probs()), y.ones(), e)
}

/// `inner[i]` is the mass at `offset + i`.
fn delta_on_support(inner: &[f64], offset: usize, e: &EmpiricalCdf) -> f64 {
    let mut diff = 0.0;
    let mut covered = 0.0;
    for (i, &fy) in inner.iter().enumerate() {
        let fx = e.pmf_at(offset + i);
        diff += (fy - fx).abs();
        covered += fx;
    }
    0.5 * (diff + 1.0 - covered)
}

pub fn delta_test(y: &SparseForm, e: &EmpiricalCdf, cfg: &TvLearnerConfig) -> bool {
    let n = e.domain_max();
    delta_statistic(y, e, n) <= cfg.delta_threshold(y.ell() + 1)
}

/// `max_l |F_Y(l) - Fhat(l)|` for a heavy element.
pub fn h_statistic(y: &HeavyBinomialForm, e: &EmpiricalCdf) -> f64 {
    let cum = heavy_cdf(y, e.domain_max());
    max_cdf_gap(&cum, e.cum())
}

fn heavy_cdf(y: &HeavyBinomialForm, domain_max: usize) -> Vec<f64> {
    let inner = binomial_mass(y.ell(), y.q());
    let mut cum = alloc::vec![0.0; domain_max.max(y.ones() + y.ell()) + 1];
    let mut acc = 0.0;
    for (x, slot) in cum.iter_mut().enumerate() {
        if x >= y.ones() && x - y.ones() < inner.len() {
            acc += inner[x - y.ones()];
        }
        *slot = acc;
    }
    cum
}

pub fn h_test(y: &HeavyBinomialForm, e: &EmpiricalCdf, cfg: &TvLearnerConfig) -> bool {
    h_statistic(y, e) <= cfg.h_threshold()
}

/// Learner with its cover materialized once, reusable across sample sets.
#[derive(Clone, Debug)]
pub struct TvLearner {
    cfg: TvLearnerConfig,
    cover: Cover,
    cdfs: Vec<Vec<f64>>,
    condition_holds: bool,
}

impl TvLearner {
    pub fn new(cfg: TvLearnerConfig, n: usize) -> Result<Self> {
        let cover = build_cover(&cfg.cover_config(n)?)?;
        let cdfs = cover
            .pmfs()
            .iter()
            .map(|p| p.to_cdf().cum().to_vec())
            .collect();
        let condition_holds = cfg.condition_holds(cover.max_sparse_support());
        Ok(TvLearner {
            cfg,
            cover,
            cdfs,
            condition_holds,
        })
    }

    pub fn config(&self) -> &TvLearnerConfig {
        &self.cfg
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn condition_holds(&self) -> bool {
        self.condition_holds
    }

    pub fn certified(&self) -> bool {
        self.condition_holds && self.cover.certified()
    }

    /// Delta test over all sparse elements, then the H test over heavy ones;
    /// the first acceptance in cover order wins.
    pub fn learn(&self, e: &EmpiricalCdf) -> Result<TvHypothesis> {
        let n = self.cover.n();
        if e.domain_max() != n {
            return Err(Error::DomainMismatch {
                left: e.domain_max(),
                right: n,
            });
        }
        let mut best_delta: Option<f64> = None;
        for (element, pmf) in self.cover.iter() {
            let CoverElement::Sparse(s) = element else {
                continue;
            };
            let inner = &pmf.mass()[s.ones()..=s.ones() + s.ell()];
            let stat = delta_on_support(inner, s.ones(), e);
            let threshold = self.cfg.delta_threshold(s.ell() + 1);
            if stat <= threshold {
                return Ok(self.hypothesis(element, stat, threshold));
            }
            best_delta = Some(best_delta.map_or(stat, |b: f64| b.min(stat)));
        }
        let threshold = self.cfg.h_threshold();
        let mut best_gap: Option<f64> = None;
        for (element, cdf) in self.cover.elements().iter().zip(&self.cdfs) {
            if element.is_sparse() {
                continue;
            }
            let stat = max_cdf_gap(cdf, e.cum());
            if stat <= threshold {
                return Ok(self.hypothesis(element, stat, threshold));
            }
            best_gap = Some(best_gap.map_or(stat, |b: f64| b.min(stat)));
        }
        Err(Error::NoAcceptingElement {
            best_delta,
            best_cdf_gap: best_gap,
        })
    }

    fn hypothesis(&self, element: &CoverElement, statistic: f64, threshold: f64) -> TvHypothesis {
        TvHypothesis {
            element: element.clone(),
            statistic,
            threshold,
            certified: self.certified(),
        }
    }
}

/// One-shot total-variation learner.
pub fn learn_tv(samples: &SampleSet, n: usize, cfg: &TvLearnerConfig) -> Result<TvHypothesis> {
    if samples.domain_max() != n {
        return Err(Error::DomainMismatch {
            left: samples.domain_max(),
            right: n,
        });
    }
    TvLearner::new(cfg.clone(), n)?.learn(&empirical_cdf(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::cover_element_pmf;
    use crate::dist::{pbd_pmf, tv_distance, ProbVector};
    use crate::empirical::empirical_pmf;
    use crate::sampling::sample_pbd;
    use alloc::vec;

    fn ecdf_from_pmf_counts(counts: &[u64]) -> EmpiricalCdf {
        let mut cum = counts.to_vec();
        for i in 1..cum.len() {
            cum[i] += cum[i - 1];
        }
        EmpiricalCdf::from_cumulative_counts(cum).unwrap()
    }

    #[test]
    fn derived_exponents() {
        let c = TvLearnerConfig::new(0.2).unwrap();
        assert_eq!(c.beta(), 13.0 / 12.0);
        assert_eq!(c.alpha(), 4.5);
        let c = c.with_tau(6.0).unwrap();
        assert_eq!((c.beta(), c.alpha()), (1.5, 7.0));
        assert!(TvLearnerConfig::new(0.2).unwrap().with_tau(0.0).is_err());
    }

    #[test]
    fn delta_statistic_examples() {
        // f_Y = {0: .5, 1: .5}; fhat equal -> 0.
        let y = SparseForm::new(2, vec![2], 0).unwrap();
        let e = ecdf_from_pmf_counts(&[5, 5, 0]);
        assert!(delta_statistic(&y, &e, 2).abs() < 1e-15);
        // fhat = {0: .4, 1: .4, 2: .2} -> (1/2)(0.1 + 0.1 + 1 - 0.8) = 0.2
        let e = ecdf_from_pmf_counts(&[2, 2, 1]);
        assert!((delta_statistic(&y, &e, 2) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn delta_equals_tv_to_empirical_pmf() {
        // f_Y vanishes off its support, so the statistic is exactly the
        // total variation distance to the empirical PMF.
        let truth = ProbVector::new(vec![0.3, 0.6, 0.2, 0.9, 0.5, 0.1]).unwrap();
        for seed in 0..30 {
            let s = SampleSet::new(sample_pbd(&truth, seed, 300), 6).unwrap();
            let e = empirical_cdf(&s);
            let emp = empirical_pmf(&e);
            let nums: Vec<u32> = (0..(seed as usize % 4))
                .map(|i| 1 + (i as u32 * 5 + seed as u32) % 15)
                .collect();
            let y = SparseForm::new(4, nums, seed as usize % 3).unwrap();
            let ypmf = cover_element_pmf(&CoverElement::Sparse(y.clone()), 6).unwrap();
            let d = delta_statistic(&y, &e, 6);
            assert!((d - tv_distance(&ypmf, &emp)).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_arithmetic() {
        let c = TvLearnerConfig::new(0.2).unwrap();
        // 0.2^(13/12) + 2 * 9 * 0.2^4.5 ~= 0.188 for the largest k = 2 support.
        assert!(c.delta_threshold(1) < 0.21);
        assert!(c.delta_threshold(9) < 0.21);
        assert!(c.delta_threshold(500) < 1.0);
        let y = SparseForm::new(2, vec![], 0).unwrap();
        // Delta = 1 when fhat puts no mass on the support.
        let e = ecdf_from_pmf_counts(&[0, 4]);
        assert_eq!(delta_statistic(&y, &e, 1), 1.0);
        assert!(!delta_test(&y, &e, &c));
        let e = ecdf_from_pmf_counts(&[4, 0]);
        assert!(delta_test(&y, &e, &c));
        // 2 * 0.2^(13/12) + 0.2^4.5 ~= 0.35 < 0.9
        let h = c.h_threshold();
        assert!((h - 0.3509).abs() < 1e-3 && h < 0.9);
    }

    #[test]
    fn h_test_examples() {
        let c = TvLearnerConfig::new(0.2).unwrap();
        let y = HeavyBinomialForm::new(1, 4, 2, 2, 1).unwrap();
        // F_Y equals Fhat exactly: counts proportional to (0, .25, .5, .25, 0).
        let e = ecdf_from_pmf_counts(&[0, 1, 2, 1, 0]);
        assert_eq!(h_statistic(&y, &e), 0.0);
        assert!(h_test(&y, &e, &c));
        // All samples at 0 -> gap 1.
        let e = ecdf_from_pmf_counts(&[4, 0, 0, 0, 0]);
        assert!(!h_test(&y, &e, &c));
    }

    #[test]
    fn returns_exact_sparse_target_via_sparse_step() {
        let cfg = TvLearnerConfig::new(0.3).unwrap().with_k(2);
        let learner = TvLearner::new(cfg, 6).unwrap();
        let target = CoverElement::Sparse(SparseForm::new(2, vec![1, 2], 2).unwrap());
        let tp = cover_element_pmf(&target, 6).unwrap();
        // Exact frequencies: 16 * (mass) are integers for these grid means.
        let counts: Vec<u64> = tp
            .mass()
            .iter()
            .map(|m| libm::round(m * 1600.0) as u64)
            .collect();
        let e = ecdf_from_pmf_counts(&counts);
        let hyp = learner.learn(&e).unwrap();
        assert!(hyp.element.is_sparse());
        let got = cover_element_pmf(&hyp.element, 6).unwrap();
        assert!(tv_distance(&got, &tp) <= hyp.threshold);
        assert!(hyp.statistic <= hyp.threshold);
    }

    #[test]
    fn deterministic_and_heavy_only_when_no_sparse_passes() {
        let cfg = TvLearnerConfig::new(0.15).unwrap().with_k(2);
        let truth = ProbVector::new(vec![0.5; 30]).unwrap();
        let s = SampleSet::new(sample_pbd(&truth, 4, 20_000), 30).unwrap();
        let a = learn_tv(&s, 30, &cfg).unwrap();
        let b = learn_tv(&s, 30, &cfg).unwrap();
        assert_eq!(a, b);
        // Variance 7.5 is out of reach of sparse forms (at most 8 * 1/4 = 2).
        assert!(!a.element.is_sparse());
        let learner = TvLearner::new(cfg.clone(), 30).unwrap();
        let e = empirical_cdf(&s);
        for (el, _) in learner.cover().iter() {
            if let CoverElement::Sparse(sf) = el {
                assert!(!delta_test(sf, &e, &cfg));
            }
        }
        let got = cover_element_pmf(&a.element, 30).unwrap();
        assert!(max_cdf_gap(got.to_cdf().cum(), e.cum()) <= cfg.h_threshold());
    }

    #[test]
    fn no_accepting_element_reports_best_statistics() {
        let cfg = TvLearnerConfig::new(0.5)
            .unwrap()
            .with_k(1)
            .with_delta_threshold(0.0)
            .with_h_threshold(0.0);
        let e = ecdf_from_pmf_counts(&[1, 1, 1]);
        let err = TvLearner::new(cfg, 2).unwrap().learn(&e).unwrap_err();
        match err {
            Error::NoAcceptingElement { best_delta, .. } => {
                assert!((best_delta.unwrap() - 2.0 / 3.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn close_sparse_target_is_accepted() {
        // A target within eps^beta of a sparse element passes the delta test
        // once the empirical CDF is accurate.
        let cfg = TvLearnerConfig::new(0.3).unwrap().with_k(2);
        let y = SparseForm::new(2, vec![1, 3], 1).unwrap();
        let ypmf = cover_element_pmf(&CoverElement::Sparse(y.clone()), 5).unwrap();
        let truth = ProbVector::new(vec![0.26, 0.74, 1.0, 0.0, 0.0]).unwrap();
        let tpmf = pbd_pmf(&truth);
        assert!(tv_distance(&ypmf, &tpmf) <= cfg.cover_accuracy());
        let mut accepted = 0;
        for seed in 0..50 {
            let s = SampleSet::new(sample_pbd(&truth, seed, 20_000), 5).unwrap();
            if delta_test(&y, &empirical_cdf(&s), &cfg) {
                accepted += 1;
            }
        }
        assert!(accepted >= 45, "{accepted}");
    }
}
