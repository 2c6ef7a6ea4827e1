//! Exact discrete distributions on `{0, ..., n}` and the distances between them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a [`Pmf`] and the final entry of a [`Cdf`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Slack used when comparing adjacent PMF entries for unimodality.
pub const UNIMODAL_SLACK: f64 = 1e-12;

/// Largest vector accepted by [`brute_force_pbd_pmf`].
pub const BRUTE_FORCE_MAX_N: usize = 25;

/// Above this many trials (or this Poisson rate) every term is evaluated
/// directly in log space instead of by ratio recurrence.
pub const LOG_SPACE_THRESHOLD: usize = 1000;

/// Means of the independent Bernoulli variables whose sum is being modelled.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("probability vector"));
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidProbability { index, value });
        }
        Ok(ProbVector(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    /// Number of Bernoulli variables.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn variance(&self) -> f64 {
        self.0.iter().map(|p| p * (1.0 - p)).sum()
    }
}

/// Probability mass function over `{0, ..., domain_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    mass: Vec<f64>,
}

impl Pmf {
    /// Validates nonnegativity and that the total is within [`MASS_TOLERANCE`] of one.
    /// The masses are stored as given; nothing is renormalized.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Empty("pmf"));
        }
        if let Some((index, &value)) = mass
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m >= 0.0))
        {
            return Err(Error::InvalidProbability { index, value });
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain {
                name: "pmf total mass",
                value: total,
            });
        }
        Ok(Pmf { mass })
    }

    pub(crate) fn from_vec_unchecked(mass: Vec<f64>) -> Self {
        debug_assert!(!mass.is_empty());
        Pmf { mass }
    }

    /// Point mass at `at` over `{0, ..., domain_max}`.
    pub fn point_mass(at: usize, domain_max: usize) -> Self {
        let mut mass = vec![0.0; domain_max.max(at) + 1];
        mass[at] = 1.0;
        Pmf { mass }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<f64> {
        self.mass
    }

    pub fn domain_max(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn get(&self, x: usize) -> f64 {
        self.mass.get(x).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Pads with zeros up to `domain_max`. Never truncates.
    pub fn padded(mut self, domain_max: usize) -> Self {
        if self.mass.len() < domain_max + 1 {
            self.mass.resize(domain_max + 1, 0.0);
        }
        self
    }

    /// Shifts the distribution right by `by`, padding to `domain_max`.
    pub fn shifted(&self, by: usize, domain_max: usize) -> Result<Self> {
        let top = self.last_nonzero().map_or(0, |t| t + by);
        if top > domain_max {
            return Err(Error::ShiftOverflow {
                needed: top,
                n: domain_max,
            });
        }
        let mut mass = vec![0.0; domain_max + 1];
        for (x, &m) in self.mass.iter().enumerate() {
            if m != 0.0 {
                mass[x + by] = m;
            }
        }
        Ok(Pmf { mass })
    }

    fn last_nonzero(&self) -> Option<usize> {
        self.mass.iter().rposition(|&m| m != 0.0)
    }

    pub fn to_cdf(&self) -> Cdf {
        let mut acc = 0.0;
        let cum = self
            .mass
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Cdf { cum }
    }

    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(x, m)| x as f64 * m)
            .sum()
    }

    /// True when there is a mode `M` with mass nondecreasing on `[0, M]` and
    /// nonincreasing on `[M, n]`, comparing adjacent entries with `slack`.
    pub fn is_unimodal(&self, slack: f64) -> bool {
        let m = &self.mass;
        let mut i = 0;
        while i + 1 < m.len() && m[i + 1] >= m[i] - slack {
            i += 1;
        }
        while i + 1 < m.len() && m[i + 1] <= m[i] + slack {
            i += 1;
        }
        i + 1 >= m.len()
    }
}

/// Cumulative distribution over `{0, ..., domain_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cdf {
    cum: Vec<f64>,
}

impl Cdf {
    pub fn new(cum: Vec<f64>) -> Result<Self> {
        if cum.is_empty() {
            return Err(Error::Empty("cdf"));
        }
        if cum.windows(2).any(|w| w[1] < w[0]) || cum[0] < 0.0 {
            return Err(Error::Invalid("cdf must be nonnegative and nondecreasing"));
        }
        let last = cum[cum.len() - 1];
        if (last - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain {
                name: "cdf final value",
                value: last,
            });
        }
        Ok(Cdf { cum })
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    pub fn domain_max(&self) -> usize {
        self.cum.len() - 1
    }

    /// `F(x)`, extended by its final value beyond the domain.
    pub fn at(&self, x: usize) -> f64 {
        match self.cum.get(x) {
            Some(&v) => v,
            None => self.cum[self.cum.len() - 1],
        }
    }

    pub fn to_pmf(&self) -> Pmf {
        let mut prev = 0.0;
        let mass = self
            .cum
            .iter()
            .map(|&c| {
                let m = c - prev;
                prev = c;
                m
            })
            .collect();
        Pmf { mass }
    }
}

/// Exact PMF of a sum of independent Bernoulli variables, by the
/// quadratic-time convolution recurrence.
pub fn pbd_pmf(p: &ProbVector) -> Pmf {
    Pmf {
        mass: pbd_mass(p.probs()),
    }
}

/// Convolution recurrence on raw probabilities. Callers guarantee each
/// entry is in `[0, 1]`.
pub(crate) fn pbd_mass(probs: &[f64]) -> Vec<f64> {
    let n = probs.len();
    let mut dp = vec![0.0; n + 1];
    dp[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        for j in (1..=i + 1).rev() {
            dp[j] = dp[j] * q + dp[j - 1] * p;
        }
        dp[0] *= q;
    }
    dp
}

/// Reference PMF by summing over all `2^n` outcomes. Exponential; refuses
/// vectors longer than [`BRUTE_FORCE_MAX_N`].
pub fn brute_force_pbd_pmf(p: &ProbVector) -> Result<Pmf> {
    let n = p.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeLimit {
            what: "brute-force enumeration",
            limit: BRUTE_FORCE_MAX_N,
            requested: n,
        });
    }
    let probs = p.probs();
    let mut mass = vec![0.0; n + 1];
    for outcome in 0u32..(1u32 << n) {
        let mut weight = 1.0;
        for (i, &pi) in probs.iter().enumerate() {
            weight *= if outcome >> i & 1 == 1 { pi } else { 1.0 - pi };
        }
        mass[outcome.count_ones() as usize] += weight;
    }
    Ok(Pmf { mass })
}

/// Total variation distance, half the L1 distance. The shorter PMF is
/// padded with zeros.
pub fn tv_distance(a: &Pmf, b: &Pmf) -> f64 {
    let len = a.mass.len().max(b.mass.len());
    let l1: f64 = (0..len).map(|x| (a.get(x) - b.get(x)).abs()).sum();
    (0.5 * l1).clamp(0.0, 1.0)
}

/// Kolmogorov distance, the largest absolute gap between two CDFs.
pub fn kolmogorov_distance(a: &Cdf, b: &Cdf) -> f64 {
    let len = a.cum.len().max(b.cum.len());
    (0..len)
        .map(|x| (a.at(x) - b.at(x)).abs())
        .fold(0.0, f64::max)
}

/// Largest gap between a CDF and an arbitrary cumulative sequence of the
/// same length. Shared by the Kolmogorov learner and the H-test.
pub(crate) fn max_cdf_gap(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let last_a = a.last().copied().unwrap_or(0.0);
    let last_b = b.last().copied().unwrap_or(0.0);
    (0..len)
        .map(|x| {
            let fa = a.get(x).copied().unwrap_or(last_a);
            let fb = b.get(x).copied().unwrap_or(last_b);
            (fa - fb).abs()
        })
        .fold(0.0, f64::max)
}

/// Binomial(`m`, `q`) PMF over `{0, ..., m}`.
///
/// Small `m` starts from the mode (evaluated in log space) and fills the
/// rest by the ratio recurrence; `m` above [`LOG_SPACE_THRESHOLD`] evaluates
/// every term in log space.
pub fn binomial_pmf(m: usize, q: f64) -> Result<Pmf> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability { index: 0, value: q });
    }
    Ok(Pmf {
        mass: binomial_mass(m, q),
    })
}

pub(crate) fn binomial_mass(m: usize, q: f64) -> Vec<f64> {
    let mut mass = vec![0.0; m + 1];
    if q == 0.0 {
        mass[0] = 1.0;
        return mass;
    }
    if q == 1.0 {
        mass[m] = 1.0;
        return mass;
    }
    let ln_q = libm::log(q);
    let ln_1q = libm::log1p(-q);
    let ln_m_fact = libm::lgamma(m as f64 + 1.0);
    let log_term = |j: usize| {
        ln_m_fact - libm::lgamma(j as f64 + 1.0) - libm::lgamma((m - j) as f64 + 1.0)
            + j as f64 * ln_q
            + (m - j) as f64 * ln_1q
    };
    if m > LOG_SPACE_THRESHOLD {
        for (j, slot) in mass.iter_mut().enumerate() {
            *slot = libm::exp(log_term(j));
        }
        return mass;
    }
    let mode = (((m + 1) as f64 * q) as usize).min(m);
    let odds = q / (1.0 - q);
    mass[mode] = libm::exp(log_term(mode));
    for j in mode..m {
        mass[j + 1] = mass[j] * ((m - j) as f64 / (j + 1) as f64) * odds;
    }
    for j in (0..mode).rev() {
        mass[j] = mass[j + 1] * ((j + 1) as f64 / (m - j) as f64) / odds;
    }
    mass
}

/// `ln P[Poisson(lambda) = j]`.
pub(crate) fn ln_poisson(j: usize, lambda: f64) -> f64 {
    -lambda + j as f64 * libm::log(lambda) - libm::lgamma(j as f64 + 1.0)
}

/// Parameters of a translated Poisson distribution: the law of
/// `floor(mu - sigma2) + Poisson(sigma2 + frac(mu - sigma2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslatedPoissonParams {
    mu: f64,
    sigma2: f64,
}

impl TranslatedPoissonParams {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::Domain {
                name: "mu",
                value: mu,
            });
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Domain {
                name: "sigma2",
                value: sigma2,
            });
        }
        Ok(TranslatedPoissonParams { mu, sigma2 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Integer shift `floor(mu - sigma2)` (may be negative).
    pub fn shift(&self) -> i64 {
        libm::floor(self.mu - self.sigma2) as i64
    }

    /// Rate `sigma2 + frac(mu - sigma2)` of the Poisson component.
    pub fn rate(&self) -> f64 {
        let d = self.mu - self.sigma2;
        self.sigma2 + (d - libm::floor(d))
    }
}

/// Output of [`translated_poisson_pmf`]: the truncated PMF plus an account
/// of the mass that fell outside `{0, ..., domain_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPmf {
    pub pmf: Pmf,
    /// Mass above `domain_max` plus any mass below zero.
    pub lost_mass: f64,
    /// Set when a negative shift placed support below zero.
    pub clipped_below: bool,
}

/// `shift + Poisson(rate)` restricted to `{0, ..., domain_max}`.
pub fn shifted_poisson_pmf(shift: i64, rate: f64, domain_max: usize) -> Result<TruncatedPmf> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Domain {
            name: "poisson rate",
            value: rate,
        });
    }
    let mut mass = vec![0.0; domain_max + 1];
    let mut kept = 0.0;
    let mut below = 0.0;
    // Past this index the Poisson terms are below f64 resolution of the kept mass.
    let horizon = (rate + 40.0 * libm::sqrt(rate) + 40.0) as i64;
    for j in 0..=(domain_max as i64 - shift).min(horizon) {
        let x = shift + j;
        let term = libm::exp(ln_poisson(j as usize, rate));
        if x < 0 {
            below += term;
        } else {
            mass[x as usize] = term;
            kept += term;
        }
    }
    let above = (1.0 - kept - below).max(0.0);
    let lost_mass = above + below;
    if lost_mass > MASS_TOLERANCE {
        return Err(Error::TailMass {
            lost: lost_mass,
            tolerance: MASS_TOLERANCE,
        });
    }
    Ok(TruncatedPmf {
        pmf: Pmf { mass },
        lost_mass,
        clipped_below: below > 0.0,
    })
}

/// PMF of the translated Poisson distribution truncated to `{0, ..., domain_max}`.
/// Poisson terms are evaluated in log space. Fails when the discarded mass
/// (upper tail plus anything shifted below zero) exceeds [`MASS_TOLERANCE`].
pub fn translated_poisson_pmf(
    tp: &TranslatedPoissonParams,
    domain_max: usize,
) -> Result<TruncatedPmf> {
    shifted_poisson_pmf(tp.shift(), tp.rate(), domain_max)
}
