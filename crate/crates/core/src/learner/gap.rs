//! Exact comparisons of total variation and Kolmogorov distance on heavy
//! binomial forms and on shifted Poisson pairs.

use crate::cover::{cover_element_pmf, CoverElement, HeavyBinomialForm};
use crate::dist::{
    binomial_pmf, kolmogorov_distance, shifted_poisson_pmf, translated_poisson_pmf, tv_distance,
    TranslatedPoissonParams,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport {
    pub d_tv: f64,
    pub d_k: f64,
    /// `d_tv - 2 d_k`; positive values measure the additive slack needed.
    pub residual: f64,
    /// `d_k / 2 <= d_tv`.
    pub left_holds: bool,
}

/// Exact `d_TV` and `d_K` of two heavy forms over the same `k` and `n`.
pub fn kolmogorov_tv_gap_check(
    x: &HeavyBinomialForm,
    y: &HeavyBinomialForm,
    n: usize,
) -> Result<GapReport> {
    if x.k() != y.k() {
        return Err(Error::Invalid("heavy forms must share k"));
    }
    if x.n() != n || y.n() != n {
        return Err(Error::DomainMismatch {
            left: x.n().max(y.n()),
            right: n,
        });
    }
    let px = cover_element_pmf(&CoverElement::Heavy(x.clone()), n)?;
    let py = cover_element_pmf(&CoverElement::Heavy(y.clone()), n)?;
    let d_tv = tv_distance(&px, &py);
    let d_k = kolmogorov_distance(&px.to_cdf(), &py.to_cdf());
    Ok(GapReport {
        d_tv,
        d_k,
        residual: d_tv - 2.0 * d_k,
        left_holds: 0.5 * d_k <= d_tv,
    })
}

/// How the rate of the larger-shift variable compares with the other rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RateRegime {
    Greater,
    Equal,
    Less,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonPairReport {
    pub regime: RateRegime,
    pub d_tv: f64,
    pub d_k: f64,
    /// Mass discarded by truncating both PMFs to a common finite domain.
    pub lost_mass: f64,
    /// `d_tv <= 2 d_k + 1e-9`.
    pub holds: bool,
}

fn poisson_horizon(rate: f64) -> usize {
    libm::ceil(rate + 40.0 * libm::sqrt(rate) + 41.0) as usize
}

/// Compares `m + Poisson(lambda)` with `m_hat + Poisson(lambda_hat)` exactly
/// on a domain long enough that the truncated tails are below 1e-9.
pub fn shifted_poisson_pair_check(
    m: u64,
    lambda: f64,
    m_hat: u64,
    lambda_hat: f64,
) -> Result<PoissonPairReport> {
    // Orient so that the first variable carries the larger shift.
    let ((m, lambda), (m_hat, lambda_hat)) = if m >= m_hat {
        ((m, lambda), (m_hat, lambda_hat))
    } else {
        ((m_hat, lambda_hat), (m, lambda))
    };
    let regime = match lambda.total_cmp(&lambda_hat) {
        core::cmp::Ordering::Greater => RateRegime::Greater,
        core::cmp::Ordering::Equal => RateRegime::Equal,
        core::cmp::Ordering::Less => RateRegime::Less,
    };
    let domain = m as usize + poisson_horizon(lambda.max(lambda_hat));
    let a = shifted_poisson_pmf(m as i64, lambda, domain)?;
    let b = shifted_poisson_pmf(m_hat as i64, lambda_hat, domain)?;
    let d_tv = tv_distance(&a.pmf, &b.pmf);
    let d_k = kolmogorov_distance(&a.pmf.to_cdf(), &b.pmf.to_cdf());
    Ok(PoissonPairReport {
        regime,
        d_tv,
        d_k,
        lost_mass: a.lost_mass + b.lost_mass,
        holds: d_tv <= 2.0 * d_k + 1e-9,
    })
}

/// `d_TV(Bin(ell, q), TP(ell q, ell q (1 - q)))` for `0 < q < 1`.
pub fn binomial_tp_distance(ell: usize, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) || ell == 0 {
        return Err(Error::Domain {
            name: "binomial q",
            value: q,
        });
    }
    let mu = ell as f64 * q;
    let tp = TranslatedPoissonParams::new(mu, mu * (1.0 - q))?;
    let domain = ell + poisson_horizon(tp.rate());
    let t = translated_poisson_pmf(&tp, domain)?;
    Ok(tv_distance(&binomial_pmf(ell, q)?, &t.pmf))
}
