//! Sample sets and DKW-sized empirical distribution estimates.

use alloc::vec;
use alloc::vec::Vec;

use crate::dist::{Cdf, Pmf};
use crate::error::{Error, Result};

/// Nonempty samples from `{0, ..., domain_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    values: Vec<u64>,
    domain_max: usize,
    source_seed: Option<u64>,
}

impl SampleSet {
    /// Rejects (never clamps) values above `domain_max`.
    pub fn new(values: Vec<u64>, domain_max: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("sample set"));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| v > domain_max as u64)
        {
            return Err(Error::SampleOutOfDomain {
                index,
                value,
                domain_max,
            });
        }
        Ok(SampleSet {
            values,
            domain_max,
            source_seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.source_seed = Some(seed);
        self
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn domain_max(&self) -> usize {
        self.domain_max
    }

    pub fn source_seed(&self) -> Option<u64> {
        self.source_seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Occurrence count of every point of the domain, in one pass.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.domain_max + 1];
        for &v in &self.values {
            counts[v as usize] += 1;
        }
        counts
    }
}

/// Empirical CDF `F(l) = |{i : Z_i <= l}| / k`, stored as integer counts.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    cum_counts: Vec<u64>,
    cum: Vec<f64>,
    sample_count: u64,
    accuracy_budget: Option<f64>,
}

impl EmpiricalCdf {
    /// Builds from cumulative counts; the last entry is the sample count.
    pub fn from_cumulative_counts(cum_counts: Vec<u64>) -> Result<Self> {
        let Some(&k) = cum_counts.last() else {
            return Err(Error::Empty("cumulative counts"));
        };
        if k == 0 {
            return Err(Error::Empty("sample set"));
        }
        if cum_counts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("cumulative counts must be nondecreasing"));
        }
        let cum = cum_counts.iter().map(|&c| c as f64 / k as f64).collect();
        Ok(EmpiricalCdf {
            cum_counts,
            cum,
            sample_count: k,
            accuracy_budget: None,
        })
    }

    /// Records the Kolmogorov accuracy this estimate was sized for.
    pub fn with_accuracy_budget(mut self, epsilon: f64) -> Self {
        self.accuracy_budget = Some(epsilon);
        self
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    pub fn cum_counts(&self) -> &[u64] {
        &self.cum_counts
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn accuracy_budget(&self) -> Option<f64> {
        self.accuracy_budget
    }

    pub fn domain_max(&self) -> usize {
        self.cum.len() - 1
    }

    /// `f(z) = F(z) - F(z - 1)`, with `f(0) = F(0)`.
    pub fn pmf_at(&self, z: usize) -> f64 {
        match z {
            0 => self.cum_counts[0] as f64 / self.sample_count as f64,
            _ if z < self.cum_counts.len() => {
                (self.cum_counts[z] - self.cum_counts[z - 1]) as f64 / self.sample_count as f64
            }
            _ => 0.0,
        }
    }

    pub fn to_cdf(&self) -> Cdf {
        Cdf::new(self.cum.clone()).expect("empirical cdf ends at exactly one")
    }
}

/// Sample count for a DKW estimate with Kolmogorov accuracy `epsilon` and
/// failure probability `delta`: `ceil(max(576, (9/8) ln(1/delta)) / epsilon^2)`.
pub fn dkw_sample_size(epsilon: f64, delta: f64) -> Result<u64> {
    check_unit_open("epsilon", epsilon)?;
    check_unit_open("delta", delta)?;
    let c = f64::max(576.0, 9.0 / 8.0 * libm::log(1.0 / delta));
    Ok(libm::ceil(c / (epsilon * epsilon)) as u64)
}

/// Sample count from the two-sided DKW inequality with Massart's constant:
/// `ceil(ln(2/delta) / (2 epsilon^2))`. Much smaller than [`dkw_sample_size`].
pub fn dkw_sample_size_classical(epsilon: f64, delta: f64) -> Result<u64> {
    check_unit_open("epsilon", epsilon)?;
    check_unit_open("delta", delta)?;
    Ok(libm::ceil(libm::log(2.0 / delta) / (2.0 * epsilon * epsilon)) as u64)
}

/// Kolmogorov accuracy certified by `k` samples at failure probability
/// `delta`; the inverse of [`dkw_sample_size`].
pub fn dkw_accuracy(k: u64, delta: f64) -> Result<f64> {
    check_unit_open("delta", delta)?;
    if k == 0 {
        return Err(Error::Empty("sample set"));
    }
    let c = f64::max(576.0, 9.0 / 8.0 * libm::log(1.0 / delta));
    Ok(libm::sqrt(c / k as f64))
}

pub(crate) fn check_unit_open(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

/// Empirical CDF by a single bucket-count pass.
pub fn empirical_cdf(s: &SampleSet) -> EmpiricalCdf {
    let mut cum_counts = s.counts();
    for i in 1..cum_counts.len() {
        cum_counts[i] += cum_counts[i - 1];
    }
    EmpiricalCdf::from_cumulative_counts(cum_counts).expect("sample sets are nonempty")
}

/// Differenced empirical CDF. Masses are `count / k`, so they are
/// nonnegative and sum to one up to a single rounding per entry.
pub fn empirical_pmf(e: &EmpiricalCdf) -> Pmf {
    Pmf::from_vec_unchecked((0..=e.domain_max()).map(|z| e.pmf_at(z)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{kolmogorov_distance, pbd_pmf, ProbVector};
    use crate::sampling::sample_pbd;

    #[test]
    fn dkw_sizes() {
        assert_eq!(dkw_sample_size(0.1, 0.1).unwrap(), 57_600);
        assert_eq!(dkw_sample_size(1.0 / 24.0, 0.5).unwrap(), 331_776);
        assert_eq!(dkw_sample_size(0.5, 0.5).unwrap(), 2_304);
        // The log term only dominates for astronomically small delta.
        // 4 * (9/8) * ln(1e300) = 3108.49
        assert_eq!(dkw_sample_size(0.5, 1e-300).unwrap(), 3109);
        assert!(dkw_sample_size(0.0, 0.1).is_err());
        assert!(dkw_sample_size(0.1, 1.0).is_err());
        assert_eq!(dkw_sample_size_classical(0.1, 0.1).unwrap(), 150);
    }

    #[test]
    fn dkw_accuracy_inverts_sizing() {
        let k = dkw_sample_size(0.05, 0.05).unwrap();
        let eps = dkw_accuracy(k, 0.05).unwrap();
        assert!(eps <= 0.05 && eps > 0.0499);
    }

    #[test]
    fn cdf_by_counting() {
        let s = SampleSet::new(alloc::vec![0, 0, 1, 1], 2).unwrap();
        let e = empirical_cdf(&s);
        assert_eq!(e.cum(), &[0.5, 1.0, 1.0]);
        assert_eq!(empirical_pmf(&e).mass(), &[0.5, 0.5, 0.0]);

        let s = SampleSet::new(alloc::vec![4; 9], 4).unwrap();
        let e = empirical_cdf(&s);
        assert_eq!(e.cum(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(empirical_pmf(&e).mass(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_domain_rejected() {
        assert!(matches!(
            SampleSet::new(alloc::vec![0, 3, 5], 4),
            Err(Error::SampleOutOfDomain {
                index: 2,
                value: 5,
                domain_max: 4
            })
        ));
        assert!(SampleSet::new(alloc::vec![], 4).is_err());
    }

    #[test]
    fn pointwise_pmf_bound_holds() {
        // |f(z) - fhat(z)| <= |F(z) - Fhat(z)| + |F(z-1) - Fhat(z-1)| on every trial.
        let p = ProbVector::new(alloc::vec![0.35; 30]).unwrap();
        let truth = pbd_pmf(&p);
        let tc = truth.to_cdf();
        for seed in 0..20 {
            let s = SampleSet::new(sample_pbd(&p, seed, 2000), 30).unwrap();
            let e = empirical_cdf(&s);
            for z in 0..=30 {
                let lhs = (truth.get(z) - e.pmf_at(z)).abs();
                let prev = if z == 0 {
                    0.0
                } else {
                    (tc.at(z - 1) - e.cum()[z - 1]).abs()
                };
                let rhs = (tc.at(z) - e.cum()[z]).abs() + prev;
                assert!(lhs <= rhs + 1e-12);
            }
            assert!(kolmogorov_distance(&tc, &e.to_cdf()) < 0.1);
        }
    }
}
