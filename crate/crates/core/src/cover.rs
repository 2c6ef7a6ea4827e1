//! Enumeration of the sparse / k-heavy-binomial cover of sums of
//! independent Bernoulli variables.
//!
//! Every cover element is a collection of `n` indicators of one of two shapes:
//!
//! * **sparse**: at most `k^3` nontrivial indicators with means on the grid
//!   `{1/k^2, ..., (k^2-1)/k^2}`, the rest deterministic;
//! * **k-heavy binomial**: `ell` indicators sharing a mean `q` on the grid
//!   `{1/(kn), ..., (kn-1)/(kn)}` with `ell q >= k^2 - 1/k` and
//!   `ell q (1-q) >= k^2 - k - 1 - 3/k`, the rest deterministic.
//!
//! The deterministic indicators are described by `ones`, the number equal to
//! one; enumeration covers every `ones` in `{0, ..., n - ell}` for both shapes.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::dist::{binomial_mass, pbd_mass, Pmf, ProbVector};
use crate::empirical::check_unit_open;
use crate::error::{Error, Result};

/// Default bound on the number of materialized cover elements.
pub const DEFAULT_ELEMENT_CAP: usize = 2_000_000;

/// PMF fingerprint resolution used for deduplication.
pub const FINGERPRINT_QUANTUM: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CoverConfig {
    epsilon: f64,
    k: u32,
    n: usize,
    sparse_ell_cap: Option<usize>,
    heavy_q_stride: Option<u64>,
    element_cap: usize,
}

impl CoverConfig {
    /// Cover of accuracy `epsilon` over `n` indicators with `k = ceil(1/epsilon)`.
    pub fn new(epsilon: f64, n: usize) -> Result<Self> {
        check_unit_open("epsilon", epsilon)?;
        if n == 0 {
            return Err(Error::Empty("indicator count n"));
        }
        let k = libm::ceil(1.0 / epsilon - 1e-9).max(1.0) as u32;
        Ok(CoverConfig {
            epsilon,
            k,
            n,
            sparse_ell_cap: None,
            heavy_q_stride: None,
            element_cap: DEFAULT_ELEMENT_CAP,
        })
    }

    pub fn with_k(mut self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain {
                name: "k",
                value: 0.0,
            });
        }
        self.k = k;
        Ok(self)
    }

    /// Restricts sparse forms to at most `cap` nontrivial indicators.
    pub fn with_sparse_ell_cap(mut self, cap: usize) -> Self {
        self.sparse_ell_cap = Some(cap);
        self
    }

    /// Keeps only heavy-form means `j/(kn)` with `j` a multiple of `stride`.
    pub fn with_heavy_q_stride(mut self, stride: u64) -> Self {
        self.heavy_q_stride = Some(stride.max(1));
        self
    }

    pub fn with_element_cap(mut self, cap: usize) -> Self {
        self.element_cap = cap;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn element_cap(&self) -> usize {
        self.element_cap
    }

    fn k3(&self) -> usize {
        let k = self.k as usize;
        k.saturating_mul(k).saturating_mul(k)
    }

    /// Largest sparse `ell` that will be enumerated.
    pub fn max_sparse_ell(&self) -> usize {
        let uncapped = self.k3().min(self.n);
        match self.sparse_ell_cap {
            Some(cap) => cap.min(uncapped),
            None => uncapped,
        }
    }

    /// False when a cap actually removes elements from the full enumeration.
    pub fn certified(&self) -> bool {
        let ell_capped = self
            .sparse_ell_cap
            .is_some_and(|cap| cap < self.k3().min(self.n));
        let q_capped = self.heavy_q_stride.is_some_and(|s| s > 1);
        !(ell_capped || q_capped)
    }
}

/// At most `k^3` indicators with means `j/k^2`, plus `ones` deterministic ones.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SparseForm {
    k: u32,
    /// Nondecreasing numerators `j` in `1..k^2`.
    numerators: Vec<u32>,
    ones: usize,
}

impl SparseForm {
    pub fn new(k: u32, mut numerators: Vec<u32>, ones: usize) -> Result<Self> {
        let k2 = k.checked_mul(k).ok_or(Error::Invalid("k^2 overflows"))?;
        if numerators.iter().any(|&j| j == 0 || j >= k2) {
            return Err(Error::Invalid("sparse numerators must lie in 1..k^2"));
        }
        let k3 = (k as usize).saturating_mul(k2 as usize);
        if numerators.len() > k3 {
            return Err(Error::Invalid(
                "sparse form has more than k^3 nontrivial indicators",
            ));
        }
        numerators.sort_unstable();
        Ok(SparseForm {
            k,
            numerators,
            ones,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn ell(&self) -> usize {
        self.numerators.len()
    }

    pub fn numerators(&self) -> &[u32] {
        &self.numerators
    }

    pub fn probs(&self) -> Vec<f64> {
        let den = (self.k * self.k) as f64;
        self.numerators.iter().map(|&j| j as f64 / den).collect()
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    /// Support `{ones, ..., ones + ell}`; every grid mean is strictly inside (0, 1).
    pub fn support(&self) -> core::ops::RangeInclusive<usize> {
        self.ones..=self.ones + self.ell()
    }
}

/// `ones + Binomial(ell, q)` with `q = q_numerator / (k n)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HeavyBinomialForm {
    k: u32,
    n: usize,
    ell: usize,
    q_numerator: u64,
    ones: usize,
}

impl HeavyBinomialForm {
    /// Validates grid membership and both moment constraints in exact
    /// integer arithmetic.
    pub fn new(k: u32, n: usize, ell: usize, q_numerator: u64, ones: usize) -> Result<Self> {
        if ell + ones > n {
            return Err(Error::ShiftOverflow {
                needed: ell + ones,
                n,
            });
        }
        let den = k as u64 * n as u64;
        if q_numerator == 0 || q_numerator >= den {
            return Err(Error::Invalid(
                "heavy q must lie strictly inside the 1/(kn) grid",
            ));
        }
        if !heavy_constraints_hold(k, n, ell, q_numerator) {
            return Err(Error::Invalid("heavy form violates its moment constraints"));
        }
        Ok(HeavyBinomialForm {
            k,
            n,
            ell,
            q_numerator,
            ones,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn q_numerator(&self) -> u64 {
        self.q_numerator
    }

    pub fn q(&self) -> f64 {
        self.q_numerator as f64 / (self.k as f64 * self.n as f64)
    }

    pub fn ones(&self) -> usize {
        self.ones
    }
}

/// `ell q >= k^2 - 1/k` and `ell q (1-q) >= k^2 - k - 1 - 3/k` for
/// `q = j/(kn)`, multiplied through to integers.
fn heavy_constraints_hold(k: u32, n: usize, ell: usize, j: u64) -> bool {
    let (k, n, ell, j) = (k as i128, n as i128, ell as i128, j as i128);
    let kn = k * n;
    // ell j / (kn) >= (k^3 - 1) / k  <=>  ell j k >= (k^3 - 1) kn
    let mean_ok = ell * j * k >= (k * k * k - 1) * kn;
    // ell j (kn - j) / (kn)^2 >= (k^3 - k^2 - k - 3) / k
    let var_ok = ell * j * (kn - j) * k >= (k * k * k - k * k - k - 3) * kn * kn;
    mean_ok && var_ok
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoverElement {
    Sparse(SparseForm),
    Heavy(HeavyBinomialForm),
}

impl CoverElement {
    pub fn ones(&self) -> usize {
        match self {
            CoverElement::Sparse(s) => s.ones,
            CoverElement::Heavy(h) => h.ones,
        }
    }

    pub fn ell(&self) -> usize {
        match self {
            CoverElement::Sparse(s) => s.ell(),
            CoverElement::Heavy(h) => h.ell,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, CoverElement::Sparse(_))
    }

    /// The `n` indicator means: the nontrivial ones first, then `ones`
    /// ones, then zeros.
    pub fn to_prob_vector(&self, n: usize) -> Result<ProbVector> {
        let needed = self.ell() + self.ones();
        if needed > n {
            return Err(Error::ShiftOverflow { needed, n });
        }
        let mut probs = match self {
            CoverElement::Sparse(s) => s.probs(),
            CoverElement::Heavy(h) => vec![h.q(); h.ell],
        };
        probs.resize(self.ell() + self.ones(), 1.0);
        probs.resize(n, 0.0);
        ProbVector::new(probs)
    }
}

/// PMF of a cover element over `{0, ..., n}`.
pub fn cover_element_pmf(e: &CoverElement, n: usize) -> Result<Pmf> {
    let needed = e.ell() + e.ones();
    if needed > n {
        return Err(Error::ShiftOverflow { needed, n });
    }
    let inner = match e {
        CoverElement::Sparse(s) => pbd_mass(&s.probs()),
        CoverElement::Heavy(h) => binomial_mass(h.ell, h.q()),
    };
    let mut mass = vec![0.0; n + 1];
    mass[e.ones()..e.ones() + inner.len()].copy_from_slice(&inner);
    Ok(Pmf::from_vec_unchecked(mass))
}

/// Lazily yields every canonical sparse form: `ell` ascending, multisets in
/// lexicographic order, then `ones` ascending.
#[derive(Clone, Debug)]
pub struct SparseForms {
    k: u32,
    n: usize,
    max_ell: usize,
    ell: usize,
    multiset: Vec<u32>,
    ones: usize,
    done: bool,
}

pub fn enumerate_sparse_forms(cfg: &CoverConfig) -> SparseForms {
    SparseForms {
        k: cfg.k,
        n: cfg.n,
        max_ell: cfg.max_sparse_ell(),
        ell: 0,
        multiset: Vec::new(),
        ones: 0,
        done: false,
    }
}

impl SparseForms {
    fn grid_max(&self) -> u32 {
        self.k * self.k - 1
    }

    /// Moves to the next multiset of the current size, or to the first
    /// multiset of the next feasible size.
    fn advance_multiset(&mut self) {
        let top = self.grid_max();
        if let Some(pos) = self.multiset.iter().rposition(|&j| j < top) {
            let v = self.multiset[pos] + 1;
            for slot in &mut self.multiset[pos..] {
                *slot = v;
            }
            return;
        }
        self.ell += 1;
        if self.ell > self.max_ell || top == 0 {
            self.done = true;
            return;
        }
        self.multiset = vec![1; self.ell];
    }
}

impl Iterator for SparseForms {
    type Item = SparseForm;

    fn next(&mut self) -> Option<SparseForm> {
        if self.done {
            return None;
        }
        let item = SparseForm {
            k: self.k,
            numerators: self.multiset.clone(),
            ones: self.ones,
        };
        debug_assert!(item.ell() <= (self.k as usize).pow(3));
        if self.ones < self.n - self.ell {
            self.ones += 1;
        } else {
            self.ones = 0;
            self.advance_multiset();
        }
        Some(item)
    }
}

/// Lazily yields every heavy form on the grid passing both moment
/// constraints: `ell` ascending, then `q`, then `ones`.
#[derive(Clone, Debug)]
pub struct HeavyForms {
    k: u32,
    n: usize,
    stride: u64,
    ell: usize,
    j: u64,
    ones: usize,
    done: bool,
}

pub fn enumerate_heavy_forms(cfg: &CoverConfig) -> HeavyForms {
    let mut it = HeavyForms {
        k: cfg.k,
        n: cfg.n,
        stride: cfg.heavy_q_stride.unwrap_or(1),
        ell: 0,
        j: 0,
        ones: 0,
        done: false,
    };
    it.seek_valid_shape(true);
    it
}

impl HeavyForms {
    fn den(&self) -> u64 {
        self.k as u64 * self.n as u64
    }

    /// Advances `(ell, j)` to the next shape satisfying both constraints.
    /// With `include_current`, the current shape is accepted if valid.
    fn seek_valid_shape(&mut self, include_current: bool) {
        let den = self.den();
        let mut first = include_current;
        loop {
            if !first {
                self.j += self.stride;
                if self.j >= den {
                    self.ell += 1;
                    self.j = self.stride;
                }
            } else if self.j == 0 {
                self.j = self.stride;
            }
            first = false;
            if self.ell > self.n || self.stride >= den {
                self.done = true;
                return;
            }
            if self.j < den && heavy_constraints_hold(self.k, self.n, self.ell, self.j) {
                self.ones = 0;
                return;
            }
        }
    }
}

impl Iterator for HeavyForms {
    type Item = HeavyBinomialForm;

    fn next(&mut self) -> Option<HeavyBinomialForm> {
        if self.done {
            return None;
        }
        let item = HeavyBinomialForm {
            k: self.k,
            n: self.n,
            ell: self.ell,
            q_numerator: self.j,
            ones: self.ones,
        };
        assert!(heavy_constraints_hold(
            item.k,
            item.n,
            item.ell,
            item.q_numerator
        ));
        if self.ones < self.n - self.ell {
            self.ones += 1;
        } else {
            self.seek_valid_shape(false);
        }
        Some(item)
    }
}

/// Per-form counts reported by [`build_cover`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CoverCounts {
    pub sparse_enumerated: usize,
    pub heavy_enumerated: usize,
    pub sparse_kept: usize,
    pub heavy_kept: usize,
}

impl CoverCounts {
    pub fn duplicates(&self) -> usize {
        self.sparse_enumerated + self.heavy_enumerated - self.sparse_kept - self.heavy_kept
    }
}

/// A materialized cover: deduplicated elements in enumeration order together
/// with their PMFs over `{0, ..., n}`.
#[derive(Clone, Debug)]
pub struct Cover {
    k: u32,
    n: usize,
    elements: Vec<CoverElement>,
    pmfs: Vec<Pmf>,
    certified: bool,
    counts: CoverCounts,
}

impl Cover {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[CoverElement] {
        &self.elements
    }

    pub fn pmfs(&self) -> &[Pmf] {
        &self.pmfs
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn counts(&self) -> CoverCounts {
        self.counts
    }

    /// Indices of sparse and heavy elements, in order.
    pub fn iter(&self) -> impl Iterator<Item = (&CoverElement, &Pmf)> {
        self.elements.iter().zip(&self.pmfs)
    }

    /// Largest support size `ell + 1` over the sparse elements.
    pub fn max_sparse_support(&self) -> usize {
        self.elements
            .iter()
            .filter_map(|e| match e {
                CoverElement::Sparse(s) => Some(s.ell() + 1),
                CoverElement::Heavy(_) => None,
            })
            .max()
            .unwrap_or(1)
    }

    /// Index and distance of the element closest to `target` under `dist`.
    pub fn closest_by<F: Fn(&Pmf) -> f64>(&self, dist: F) -> Option<(usize, f64)> {
        self.pmfs
            .iter()
            .map(dist)
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn fingerprint(pmf: &Pmf) -> Vec<i64> {
    pmf.mass()
        .iter()
        .map(|m| libm::round(m / FINGERPRINT_QUANTUM) as i64)
        .collect()
}

/// Enumerates sparse then heavy forms, materializes each PMF, and drops any
/// element whose quantized PMF repeats an earlier one.
pub fn build_cover(cfg: &CoverConfig) -> Result<Cover> {
    let mut seen = BTreeSet::new();
    let mut elements = Vec::new();
    let mut pmfs = Vec::new();
    let mut counts = CoverCounts::default();
    let mut push = |e: CoverElement| -> Result<bool> {
        let pmf = cover_element_pmf(&e, cfg.n)?;
        if !seen.insert(fingerprint(&pmf)) {
            return Ok(false);
        }
        if elements.len() >= cfg.element_cap {
            return Err(Error::ElementCap {
                cap: cfg.element_cap,
            });
        }
        elements.push(e);
        pmfs.push(pmf);
        Ok(true)
    };
    for s in enumerate_sparse_forms(cfg) {
        counts.sparse_enumerated += 1;
        if push(CoverElement::Sparse(s))? {
            counts.sparse_kept += 1;
        }
    }
    for h in enumerate_heavy_forms(cfg) {
        counts.heavy_enumerated += 1;
        if push(CoverElement::Heavy(h))? {
            counts.heavy_kept += 1;
        }
    }
    Ok(Cover {
        k: cfg.k,
        n: cfg.n,
        elements,
        pmfs,
        certified: cfg.certified(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{brute_force_pbd_pmf, pbd_pmf, tv_distance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(k: u32, n: usize) -> CoverConfig {
        CoverConfig::new(0.5, n).unwrap().with_k(k).unwrap()
    }

    fn binom(n: u64, r: u64) -> u64 {
        (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn default_k_is_ceil_inverse_epsilon() {
        assert_eq!(CoverConfig::new(0.5, 3).unwrap().k(), 2);
        assert_eq!(CoverConfig::new(0.3, 3).unwrap().k(), 4);
        assert_eq!(CoverConfig::new(0.25, 3).unwrap().k(), 4);
        assert!(CoverConfig::new(1.0, 3).is_err());
        assert!(CoverConfig::new(0.5, 0).is_err());
    }

    #[test]
    fn k1_sparse_forms_are_point_masses() {
        let forms: Vec<_> = enumerate_sparse_forms(&cfg(1, 5)).collect();
        assert_eq!(forms.len(), 6);
        assert!(forms.iter().all(|f| f.ell() == 0));
        assert_eq!(
            forms.iter().map(|f| f.ones()).collect::<Vec<_>>(),
            [0, 1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn k2_n3_sparse_count_matches_stars_and_bars() {
        // sum_{l=0}^{3} C(l+2, 2) (4 - l)
        let expected: u64 = (0..=3).map(|l| binom(l + 2, 2) * (4 - l)).sum();
        assert_eq!(expected, 35);
        let forms: Vec<_> = enumerate_sparse_forms(&cfg(2, 3)).collect();
        assert_eq!(forms.len() as u64, expected);
        let unique: BTreeSet<_> = forms.iter().cloned().collect();
        assert_eq!(unique.len(), forms.len());
        for f in &forms {
            assert!(f.numerators().windows(2).all(|w| w[0] <= w[1]));
            assert!(f.numerators().iter().all(|&j| (1..4).contains(&j)));
            assert!(f.ell() + f.ones() <= 3);
        }
    }

    #[test]
    fn sparse_count_general_formula() {
        // Multisets of size l over g = k^2 - 1 values: C(l + g - 1, l).
        for (k, n) in [(2u32, 6usize), (3, 4)] {
            let g = (k * k - 1) as u64;
            let max_ell = ((k as usize).pow(3)).min(n) as u64;
            let expected: u64 = (0..=max_ell)
                .map(|l| binom(l + g - 1, l) * (n as u64 - l + 1))
                .sum();
            assert_eq!(enumerate_sparse_forms(&cfg(k, n)).count() as u64, expected);
        }
    }

    #[test]
    fn sparse_ell_cap_limits_and_decertifies() {
        let c = cfg(2, 10).with_sparse_ell_cap(2);
        assert!(!c.certified());
        assert!(enumerate_sparse_forms(&c).all(|f| f.ell() <= 2));
        // A cap above min(k^3, n) changes nothing.
        assert!(cfg(2, 10).with_sparse_ell_cap(50).certified());
        assert!(!cfg(2, 10).with_heavy_q_stride(3).certified());
    }

    #[test]
    fn heavy_examples() {
        let c = cfg(2, 20);
        let forms: Vec<_> = enumerate_heavy_forms(&c).collect();
        // q = 0.25 is numerator 10 on the 1/40 grid.
        assert!(forms
            .iter()
            .any(|h| h.ell() == 16 && h.q_numerator() == 10 && h.ones() == 0));
        assert!(!forms.iter().any(|h| h.ell() == 4 && h.q_numerator() == 10));
        assert!(HeavyBinomialForm::new(2, 20, 4, 10, 0).is_err());
        assert!(HeavyBinomialForm::new(2, 20, 16, 10, 0).is_ok());
        for h in &forms {
            let (l, q) = (h.ell() as f64, h.q());
            assert!(l * q >= 4.0 - 0.5 - 1e-12);
            assert!(l * q * (1.0 - q) >= 4.0 - 2.0 - 1.0 - 1.5 - 1e-12);
            assert!(h.ell() + h.ones() <= 20);
        }
        // Order: ell ascending, then q, then ones.
        let keys: Vec<_> = forms
            .iter()
            .map(|h| (h.ell(), h.q_numerator(), h.ones()))
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));

        assert_eq!(enumerate_heavy_forms(&cfg(10, 5)).count(), 0);
    }

    #[test]
    fn heavy_enumeration_matches_filtered_grid() {
        let c = cfg(2, 9);
        let mut brute = Vec::new();
        for ell in 0..=9usize {
            for j in 1..18u64 {
                let q = j as f64 / 18.0;
                let l = ell as f64;
                if l * q >= 3.5 && l * q * (1.0 - q) >= -0.5 {
                    for ones in 0..=9 - ell {
                        brute.push((ell, j, ones));
                    }
                }
            }
        }
        let got: Vec<_> = enumerate_heavy_forms(&c)
            .map(|h| (h.ell(), h.q_numerator(), h.ones()))
            .collect();
        assert_eq!(got, brute);

        let strided: Vec<_> = enumerate_heavy_forms(&c.with_heavy_q_stride(3)).collect();
        assert!(strided.iter().all(|h| h.q_numerator() % 3 == 0));
    }

    #[test]
    fn element_pmf_examples() {
        let s = CoverElement::Sparse(SparseForm::new(2, vec![], 3).unwrap());
        assert_eq!(
            cover_element_pmf(&s, 5).unwrap().mass(),
            &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );

        let h = CoverElement::Heavy(HeavyBinomialForm {
            k: 1,
            n: 4,
            ell: 2,
            q_numerator: 2,
            ones: 1,
        });
        assert_eq!(
            cover_element_pmf(&h, 4).unwrap().mass(),
            &[0.0, 0.25, 0.5, 0.25, 0.0]
        );
        assert!(matches!(
            cover_element_pmf(&h, 2),
            Err(Error::ShiftOverflow { .. })
        ));
    }

    #[test]
    fn sparse_pmf_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let ell = rng.random_range(0..=12usize);
            let ones = rng.random_range(0..=3usize);
            let nums = (0..ell).map(|_| rng.random_range(1..9u32)).collect();
            let e = CoverElement::Sparse(SparseForm::new(3, nums, ones).unwrap());
            let n = ell + ones + 2;
            let direct = cover_element_pmf(&e, n).unwrap();
            let bf = brute_force_pbd_pmf(&e.to_prob_vector(n).unwrap()).unwrap();
            for (a, b) in direct.mass().iter().zip(bf.mass()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k1_sparse_part_is_point_masses() {
        // With k = 1 both heavy constraints are vacuous, so every shifted
        // Binomial(ell, j/n) is a heavy element; the sparse part is the n + 1
        // point masses.
        let cover = build_cover(&cfg(1, 10)).unwrap();
        assert_eq!(cover.counts().sparse_kept, 11);
        for (x, pmf) in cover.pmfs().iter().take(11).enumerate() {
            assert_eq!(pmf, &Pmf::point_mass(x, 10));
        }
        assert!(cover.elements()[11..].iter().all(|e| !e.is_sparse()));
    }

    #[test]
    fn cover_is_deterministic_and_deduplicated() {
        let a = build_cover(&cfg(2, 6)).unwrap();
        let b = build_cover(&cfg(2, 6)).unwrap();
        assert_eq!(a.elements(), b.elements());
        let fps: BTreeSet<_> = a.pmfs().iter().map(fingerprint).collect();
        assert_eq!(fps.len(), a.len());
        let c = a.counts();
        assert_eq!(c.sparse_kept + c.heavy_kept, a.len());
        assert!(c.duplicates() > 0);
        // Sparse elements precede heavy ones.
        let first_heavy = a
            .elements()
            .iter()
            .position(|e| !e.is_sparse())
            .unwrap_or(a.len());
        assert!(a.elements()[first_heavy..].iter().all(|e| !e.is_sparse()));
    }

    #[test]
    fn element_cap_is_enforced() {
        let err = build_cover(&cfg(2, 6).with_element_cap(10)).unwrap_err();
        assert_eq!(err, Error::ElementCap { cap: 10 });
    }

    #[test]
    fn k2_cover_within_half_for_random_targets() {
        let cover = build_cover(&cfg(2, 10)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let p = ProbVector::new((0..10).map(|_| rng.random::<f64>()).collect()).unwrap();
            let target = pbd_pmf(&p);
            let (_, best) = cover.closest_by(|q| tv_distance(&target, q)).unwrap();
            assert!(best <= 0.5, "best {best}");
        }
    }
}
