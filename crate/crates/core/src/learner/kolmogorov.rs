//! Kolmogorov-distance proper learner: first cover element whose CDF is
//! within `eps/2` of the empirical CDF.

use alloc::vec::Vec;

use crate::cover::{build_cover, Cover, CoverConfig, CoverElement};
use crate::dist::max_cdf_gap;
use crate::empirical::{check_unit_open, dkw_sample_size, empirical_cdf, EmpiricalCdf, SampleSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovConfig {
    epsilon: f64,
    k_override: Option<u32>,
    sparse_ell_cap: Option<usize>,
    heavy_q_stride: Option<u64>,
    element_cap: Option<usize>,
}

impl KolmogorovConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_unit_open("epsilon", epsilon)?;
        Ok(KolmogorovConfig {
            epsilon,
            k_override: None,
            sparse_ell_cap: None,
            heavy_q_stride: None,
            element_cap: None,
        })
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k_override = Some(k);
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

    /// Acceptance threshold `eps/2` on the CDF gap.
    pub fn threshold(&self) -> f64 {
        self.epsilon / 2.0
    }

    /// Cover at accuracy `eps/8`, so `k = ceil(8/eps)` unless overridden.
    pub fn cover_config(&self, n: usize) -> Result<CoverConfig> {
        let mut c = CoverConfig::new(self.epsilon / 8.0, n)?;
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
}

/// `max(9216, 18 ln(1/delta)) / eps^2`, i.e. a DKW estimate at accuracy `eps/4`.
pub fn kolmogorov_sample_size(epsilon: f64, delta: f64) -> Result<u64> {
    check_unit_open("epsilon", epsilon)?;
    dkw_sample_size(epsilon / 4.0, delta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovHypothesis {
    pub element: CoverElement,
    /// `max_l |F_Y(l) - Fhat(l)|` for the returned element.
    pub statistic: f64,
    pub threshold: f64,
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct KolmogorovLearner {
    cfg: KolmogorovConfig,
    cover: Cover,
    cdfs: Vec<Vec<f64>>,
}

impl KolmogorovLearner {
    pub fn new(cfg: KolmogorovConfig, n: usize) -> Result<Self> {
        let cover = build_cover(&cfg.cover_config(n)?)?;
        let cdfs = cover
            .pmfs()
            .iter()
            .map(|p| p.to_cdf().cum().to_vec())
            .collect();
        Ok(KolmogorovLearner { cfg, cover, cdfs })
    }

    pub fn config(&self) -> &KolmogorovConfig {
        &self.cfg
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn learn(&self, e: &EmpiricalCdf) -> Result<KolmogorovHypothesis> {
        let n = self.cover.n();
        if e.domain_max() != n {
            return Err(Error::DomainMismatch {
                left: e.domain_max(),
                right: n,
            });
        }
        let threshold = self.cfg.threshold();
        let mut best: Option<f64> = None;
        for (element, cdf) in self.cover.elements().iter().zip(&self.cdfs) {
            let gap = max_cdf_gap(cdf, e.cum());
            if gap <= threshold {
                return Ok(KolmogorovHypothesis {
                    element: element.clone(),
                    statistic: gap,
                    threshold,
                    certified: self.cover.certified(),
                });
            }
            best = Some(best.map_or(gap, |b: f64| b.min(gap)));
        }
        Err(Error::NoAcceptingElement {
            best_delta: None,
            best_cdf_gap: best,
        })
    }
}

pub fn learn_kolmogorov(
    samples: &SampleSet,
    n: usize,
    cfg: &KolmogorovConfig,
) -> Result<KolmogorovHypothesis> {
    if samples.domain_max() != n {
        return Err(Error::DomainMismatch {
            left: samples.domain_max(),
            right: n,
        });
    }
    KolmogorovLearner::new(cfg.clone(), n)?.learn(&empirical_cdf(samples))
}
