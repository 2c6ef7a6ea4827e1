//! Weighted sums `f(X) = sum_i a_i X_i` where the weights take few distinct
//! values, learned through the product of per-group covers.
//!
//! Indicators sharing a weight `b_j` form group `j` with sum `S_j`, so
//! `f(X) = sum_j b_j S_j`. The PMF over the attainable range is built by
//! convolving one group at a time over a sorted, deduplicated sumset, which
//! gives the same masses as summing over all count tuples.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::index::sample as sample_indices;

use crate::cover::{build_cover, Cover, CoverConfig, CoverElement};
use crate::dist::{pbd_mass, Pmf, ProbVector};
use crate::empirical::{check_unit_open, SampleSet};
use crate::error::{Error, Result};
use crate::sampling::{stream_rng, PmfSampler};
use crate::selection::tournament;

/// Values closer than this merge when weights are real.
pub const VALUE_MERGE_TOLERANCE: f64 = 1e-9;

/// Default bound on the intermediate sumset work, `|range so far| * (n_j + 1)`.
pub const DEFAULT_RANGE_WORK_CAP: usize = 50_000_000;

/// Default bound on the product cover cardinality.
pub const DEFAULT_PRODUCT_CAP: usize = 250_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    /// Exact integer arithmetic on the range.
    Integer(Vec<i64>),
    /// Range values merged within [`VALUE_MERGE_TOLERANCE`].
    Real(Vec<f64>),
}

impl Weights {
    pub fn len(&self) -> usize {
        match self {
            Weights::Integer(w) => w.len(),
            Weights::Real(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, j: usize) -> f64 {
        match self {
            Weights::Integer(w) => w[j] as f64,
            Weights::Real(w) => w[j],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Empty("weights"));
        }
        let distinct = match self {
            Weights::Integer(w) => {
                let mut s = w.clone();
                s.sort_unstable();
                s.windows(2).all(|p| p[0] != p[1])
            }
            Weights::Real(w) => {
                if let Some(&bad) = w.iter().find(|x| !x.is_finite()) {
                    return Err(Error::Domain {
                        name: "weight",
                        value: bad,
                    });
                }
                let mut s = w.clone();
                s.sort_by(f64::total_cmp);
                s.windows(2).all(|p| p[0] != p[1])
            }
        };
        if distinct {
            Ok(())
        } else {
            Err(Error::Invalid("weights must be pairwise distinct"))
        }
    }
}

/// Groups of indicators, one distinct weight per group.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPbd {
    weights: Weights,
    groups: Vec<ProbVector>,
}

impl WeightedPbd {
    pub fn new(weights: Weights, groups: Vec<ProbVector>) -> Result<Self> {
        weights.validate()?;
        if groups.len() != weights.len() {
            return Err(Error::Invalid("one probability group per weight"));
        }
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::Empty("weight group"));
        }
        Ok(WeightedPbd { weights, groups })
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn groups(&self) -> &[ProbVector] {
        &self.groups
    }

    pub fn counts(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len()).collect()
    }

    pub fn n(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RangeValues {
    Integer(Vec<i64>),
    Real(Vec<f64>),
}

/// Sorted distinct attainable values `sum_j b_j m_j`, `0 <= m_j <= n_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedRange {
    values: RangeValues,
}

impl WeightedRange {
    pub fn values(&self) -> &RangeValues {
        &self.values
    }

    pub fn len(&self) -> usize {
        match &self.values {
            RangeValues::Integer(v) => v.len(),
            RangeValues::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        match &self.values {
            RangeValues::Integer(v) => v[i] as f64,
            RangeValues::Real(v) => v[i],
        }
    }

    pub fn index_of_integer(&self, x: i64) -> Option<usize> {
        match &self.values {
            RangeValues::Integer(v) => v.binary_search(&x).ok(),
            RangeValues::Real(_) => self.index_of(x as f64),
        }
    }

    /// Position of `x`; real ranges match within [`VALUE_MERGE_TOLERANCE`].
    pub fn index_of(&self, x: f64) -> Option<usize> {
        match &self.values {
            RangeValues::Integer(v) => {
                if !x.is_finite() || libm::trunc(x) != x {
                    return None;
                }
                v.binary_search(&(x as i64)).ok()
            }
            RangeValues::Real(v) => {
                let i = v.partition_point(|&y| y < x - VALUE_MERGE_TOLERANCE);
                (i < v.len() && (v[i] - x).abs() <= VALUE_MERGE_TOLERANCE).then_some(i)
            }
        }
    }

    /// Maps raw output values to range indices, rejecting unattainable ones.
    pub fn to_samples(&self, raw: &[f64]) -> Result<SampleSet> {
        let mut idx = Vec::with_capacity(raw.len());
        for (index, &x) in raw.iter().enumerate() {
            match self.index_of(x) {
                Some(i) => idx.push(i as u64),
                None => {
                    return Err(Error::SampleOutOfDomain {
                        index,
                        value: x as u64,
                        domain_max: self.len() - 1,
                    })
                }
            }
        }
        SampleSet::new(idx, self.len() - 1)
    }
}

/// Weighted PMF indexed by range position.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDistribution {
    pub range: WeightedRange,
    pub pmf: Pmf,
}

impl WeightedDistribution {
    pub fn mass_at(&self, value: f64) -> f64 {
        self.range.index_of(value).map_or(0.0, |i| self.pmf.get(i))
    }

    /// Draws range indices.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<u64> {
        PmfSampler::new(&self.pmf).sample(seed, count)
    }
}

/// One sumset step: every `cur[i] + b m`, sorted and merged. Returns the new
/// values and, for position `i (n + 1) + m`, the index of that sum.
fn sumset_step<V: Copy>(
    cur: &[V],
    n: usize,
    shift: impl Fn(V, usize) -> Option<V>,
    cmp: impl Fn(&V, &V) -> Ordering,
    same: impl Fn(V, V) -> bool,
) -> Result<(Vec<V>, Vec<u32>)> {
    let width = n + 1;
    let mut all = Vec::with_capacity(cur.len() * width);
    for (i, &v) in cur.iter().enumerate() {
        for m in 0..width {
            let s = shift(v, m).ok_or(Error::Invalid("weighted value overflows i64"))?;
            all.push((s, i * width + m));
        }
    }
    all.sort_by(|a, b| cmp(&a.0, &b.0));
    let mut next: Vec<V> = Vec::new();
    let mut map = vec![0u32; all.len()];
    for (v, pos) in all {
        match next.last() {
            Some(&head) if same(head, v) => {}
            _ => next.push(v),
        }
        map[pos] = (next.len() - 1) as u32;
    }
    Ok((next, map))
}

/// Precomputed sumset steps, reusable for many sets of group PMFs over the
/// same weights and counts.
#[derive(Clone, Debug)]
pub struct WeightedLayout {
    counts: Vec<usize>,
    range: WeightedRange,
    // maps[j][i (n_j + 1) + m] = index after step j of (value i before step j) + b_j m.
    maps: Vec<Vec<u32>>,
    sizes: Vec<usize>,
}

impl WeightedLayout {
    pub fn new(weights: &Weights, counts: &[usize], work_cap: usize) -> Result<Self> {
        weights.validate()?;
        if counts.len() != weights.len() {
            return Err(Error::Invalid("one count per weight"));
        }
        if counts.contains(&0) {
            return Err(Error::Empty("weight group"));
        }
        let mut maps = Vec::with_capacity(counts.len());
        let mut sizes = vec![1usize];
        let check = |len: usize, n: usize| -> Result<()> {
            let work = len.saturating_mul(n + 1);
            if work > work_cap {
                Err(Error::SizeLimit {
                    what: "weighted range work",
                    limit: work_cap,
                    requested: work,
                })
            } else {
                Ok(())
            }
        };
        let range = match weights {
            Weights::Integer(b) => {
                let mut cur = vec![0i64];
                for (&bj, &nj) in b.iter().zip(counts) {
                    check(cur.len(), nj)?;
                    let (next, map) = sumset_step(
                        &cur,
                        nj,
                        |v, m| (m as i64).checked_mul(bj).and_then(|d| v.checked_add(d)),
                        |x, y| x.cmp(y),
                        |x, y| x == y,
                    )?;
                    sizes.push(next.len());
                    maps.push(map);
                    cur = next;
                }
                RangeValues::Integer(cur)
            }
            Weights::Real(b) => {
                let mut cur = vec![0.0f64];
                for (&bj, &nj) in b.iter().zip(counts) {
                    check(cur.len(), nj)?;
                    let (next, map) = sumset_step(
                        &cur,
                        nj,
                        |v, m| Some(v + bj * m as f64),
                        |x, y| x.total_cmp(y),
                        |x, y| (y - x).abs() <= VALUE_MERGE_TOLERANCE,
                    )?;
                    sizes.push(next.len());
                    maps.push(map);
                    cur = next;
                }
                RangeValues::Real(cur)
            }
        };
        Ok(WeightedLayout {
            counts: counts.to_vec(),
            range: WeightedRange { values: range },
            maps,
            sizes,
        })
    }

    pub fn range(&self) -> &WeightedRange {
        &self.range
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Weighted PMF from one PMF per group, `group_mass[j]` over `{0, ..., n_j}`.
    pub fn combine(&self, group_mass: &[&[f64]]) -> Vec<f64> {
        debug_assert_eq!(group_mass.len(), self.counts.len());
        let mut cur = vec![1.0];
        for (j, g) in group_mass.iter().enumerate() {
            let width = self.counts[j] + 1;
            let mut next = vec![0.0; self.sizes[j + 1]];
            for (i, &w) in cur.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (m, &p) in g.iter().enumerate().take(width) {
                    next[self.maps[j][i * width + m] as usize] += w * p;
                }
            }
            cur = next;
        }
        cur
    }
}

/// Exact PMF of `f(X)` over its attainable range, with the default work cap.
pub fn weighted_pmf(w: &WeightedPbd) -> Result<WeightedDistribution> {
    weighted_pmf_capped(w, DEFAULT_RANGE_WORK_CAP)
}

pub fn weighted_pmf_capped(w: &WeightedPbd, work_cap: usize) -> Result<WeightedDistribution> {
    let layout = WeightedLayout::new(&w.weights, &w.counts(), work_cap)?;
    let groups: Vec<Vec<f64>> = w.groups.iter().map(|g| pbd_mass(g.probs())).collect();
    let refs: Vec<&[f64]> = groups.iter().map(|g| g.as_slice()).collect();
    let mass = layout.combine(&refs);
    Ok(WeightedDistribution {
        range: layout.range,
        pmf: Pmf::from_vec_unchecked(mass),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLearnConfig {
    epsilon: f64,
    k_override: Option<u32>,
    sparse_ell_cap: Option<usize>,
    heavy_q_stride: Option<u64>,
    product_cap: usize,
    tournament_delta: Option<f64>,
}

impl WeightedLearnConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_unit_open("epsilon", epsilon)?;
        Ok(WeightedLearnConfig {
            epsilon,
            k_override: None,
            sparse_ell_cap: None,
            heavy_q_stride: None,
            product_cap: DEFAULT_PRODUCT_CAP,
            tournament_delta: None,
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

    pub fn with_product_cap(mut self, cap: usize) -> Self {
        self.product_cap = cap;
        self
    }

    pub fn with_tournament_delta(mut self, delta: f64) -> Self {
        self.tournament_delta = Some(delta);
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Tournament accuracy; `epsilon` unless overridden.
    pub fn tournament_delta(&self) -> f64 {
        self.tournament_delta.unwrap_or(self.epsilon)
    }

    fn group_cover(&self, n: usize) -> Result<CoverConfig> {
        let mut c = CoverConfig::new(self.epsilon, n)?;
        if let Some(k) = self.k_override {
            c = c.with_k(k)?;
        }
        if let Some(cap) = self.sparse_ell_cap {
            c = c.with_sparse_ell_cap(cap);
        }
        if let Some(s) = self.heavy_q_stride {
            c = c.with_heavy_q_stride(s);
        }
        Ok(c)
    }
}

/// Product of per-group covers with every element's weighted PMF.
#[derive(Clone, Debug)]
pub struct ProductCover {
    layout: WeightedLayout,
    covers: Vec<Cover>,
    pmfs: Vec<Pmf>,
}

impl ProductCover {
    pub fn new(weights: &Weights, counts: &[usize], cfg: &WeightedLearnConfig) -> Result<Self> {
        let layout = WeightedLayout::new(weights, counts, DEFAULT_RANGE_WORK_CAP)?;
        let covers = counts
            .iter()
            .map(|&n| build_cover(&cfg.group_cover(n)?))
            .collect::<Result<Vec<_>>>()?;
        let size = covers
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
            .unwrap_or(usize::MAX);
        if size > cfg.product_cap {
            return Err(Error::SizeLimit {
                what: "product cover",
                limit: cfg.product_cap,
                requested: size,
            });
        }
        let mut pmfs = Vec::with_capacity(size);
        for idx in 0..size {
            let parts = digits(idx, &covers);
            let refs: Vec<&[f64]> = parts
                .iter()
                .zip(&covers)
                .map(|(&i, c)| c.pmfs()[i].mass())
                .collect();
            pmfs.push(Pmf::from_vec_unchecked(layout.combine(&refs)));
        }
        Ok(ProductCover {
            layout,
            covers,
            pmfs,
        })
    }

    pub fn len(&self) -> usize {
        self.pmfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmfs.is_empty()
    }

    pub fn range(&self) -> &WeightedRange {
        self.layout.range()
    }

    pub fn pmfs(&self) -> &[Pmf] {
        &self.pmfs
    }

    pub fn covers(&self) -> &[Cover] {
        &self.covers
    }

    pub fn certified(&self) -> bool {
        self.covers.iter().all(|c| c.certified())
    }

    /// Per-group cover elements of product element `idx`.
    pub fn elements(&self, idx: usize) -> Vec<CoverElement> {
        digits(idx, &self.covers)
            .iter()
            .zip(&self.covers)
            .map(|(&i, c)| c.elements()[i].clone())
            .collect()
    }
}

/// Mixed-radix digits of `idx`, group 0 most significant.
fn digits(mut idx: usize, covers: &[Cover]) -> Vec<usize> {
    let mut out = vec![0; covers.len()];
    for (slot, c) in out.iter_mut().zip(covers).rev() {
        *slot = idx % c.len();
        idx /= c.len();
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedHypothesis {
    pub pbd: WeightedPbd,
    pub elements: Vec<CoverElement>,
    pub product_index: usize,
    pub product_size: usize,
    pub certified: bool,
    pub pmf: Pmf,
}

/// Tournament over a prebuilt product cover; `samples` hold range indices.
pub fn learn_weighted_on(
    product: &ProductCover,
    weights: &Weights,
    samples: &SampleSet,
    cfg: &WeightedLearnConfig,
) -> Result<WeightedHypothesis> {
    let r = product.range().len();
    if samples.domain_max() + 1 != r {
        return Err(Error::DomainMismatch {
            left: samples.domain_max(),
            right: r - 1,
        });
    }
    let winner = tournament(product.pmfs(), samples, cfg.tournament_delta())?;
    let elements = product.elements(winner);
    let groups = elements
        .iter()
        .zip(product.layout.counts())
        .map(|(e, &n)| e.to_prob_vector(n))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedHypothesis {
        pbd: WeightedPbd::new(weights.clone(), groups)?,
        elements,
        product_index: winner,
        product_size: product.len(),
        certified: product.certified(),
        pmf: product.pmfs()[winner].clone(),
    })
}

pub fn learn_weighted(
    samples: &SampleSet,
    weights: &Weights,
    counts: &[usize],
    cfg: &WeightedLearnConfig,
) -> Result<WeightedHypothesis> {
    let product = ProductCover::new(weights, counts, cfg)?;
    learn_weighted_on(&product, weights, samples, cfg)
}

/// Lower-bound family: `k` indicators, weight `i` on indicator `i > k/2`
/// and 0 below; mean `100/k` on a random support `S` in the upper half.
#[derive(Clone, Debug, PartialEq)]
pub struct HardInstance {
    pub k: usize,
    /// Sorted 1-based indicator indices.
    pub support: Vec<usize>,
    pub probs: ProbVector,
    /// `a_i` for `i = 1..=k`.
    pub weights: Vec<i64>,
}

impl HardInstance {
    /// Weight-0 group first, then one singleton group per weight `k/2 + 1 ..= k`.
    pub fn to_weighted_pbd(&self) -> Result<WeightedPbd> {
        let half = self.k / 2;
        let p = self.probs.probs();
        let mut weights = vec![0i64];
        let mut groups = vec![ProbVector::new(p[..half].to_vec())?];
        for i in half + 1..=self.k {
            weights.push(i as i64);
            groups.push(ProbVector::new(vec![p[i - 1]])?);
        }
        WeightedPbd::new(Weights::Integer(weights), groups)
    }

    /// `P[f = 0] = prod_i (1 - p_i) = (1 - 100/k)^{|S|}`.
    pub fn mass_at_zero(&self) -> f64 {
        self.probs.probs().iter().map(|p| 1.0 - p).product()
    }
}

/// `max(1, round_half_up(k/100))`.
pub fn hard_support_size(k: usize) -> usize {
    ((k + 50) / 100).max(1)
}

pub fn make_lower_bound_instance(k: usize, seed: u64) -> Result<HardInstance> {
    if k % 2 == 1 {
        return Err(Error::Domain {
            name: "k (must be even)",
            value: k as f64,
        });
    }
    if k < 100 {
        return Err(Error::Domain {
            name: "k (100/k must be a probability)",
            value: k as f64,
        });
    }
    let half = k / 2;
    let s = hard_support_size(k);
    let mut rng = stream_rng(seed, 0);
    let mut support: Vec<usize> = sample_indices(&mut rng, half, s)
        .into_iter()
        .map(|i| half + 1 + i)
        .collect();
    support.sort_unstable();
    let p = 100.0 / k as f64;
    let mut probs = vec![0.0; k];
    for &i in &support {
        probs[i - 1] = p;
    }
    let weights = (1..=k)
        .map(|i| if i > half { i as i64 } else { 0 })
        .collect();
    Ok(HardInstance {
        k,
        support,
        probs: ProbVector::new(probs)?,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::cover_element_pmf;
    use crate::dist::{pbd_pmf, tv_distance};
    use crate::sampling::derive_seed;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn int_pbd(weights: &[i64], groups: &[&[f64]]) -> WeightedPbd {
        WeightedPbd::new(
            Weights::Integer(weights.to_vec()),
            groups
                .iter()
                .map(|g| ProbVector::new(g.to_vec()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    /// Sum over all `2^n` assignments of the flattened indicators.
    fn brute_force(w: &WeightedPbd) -> BTreeMap<i64, f64> {
        let mut flat = Vec::new();
        for (j, g) in w.groups().iter().enumerate() {
            for &p in g.probs() {
                flat.push((w.weights().get(j) as i64, p));
            }
        }
        let mut out = BTreeMap::new();
        for mask in 0u32..(1 << flat.len()) {
            let (mut v, mut pr) = (0i64, 1.0);
            for (i, &(a, p)) in flat.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v += a;
                    pr *= p;
                } else {
                    pr *= 1.0 - p;
                }
            }
            *out.entry(v).or_insert(0.0) += pr;
        }
        out
    }

    /// Joint mass of every count tuple `(m_1, ..., m_k)`.
    fn tuples(w: &WeightedPbd) -> Vec<(Vec<usize>, f64)> {
        let per: Vec<Pmf> = w.groups().iter().map(pbd_pmf).collect();
        let mut out = vec![(Vec::new(), 1.0)];
        for g in &per {
            let mut next = Vec::new();
            for (t, p) in &out {
                for (m, &q) in g.mass().iter().enumerate() {
                    let mut t2 = t.clone();
                    t2.push(m);
                    next.push((t2, p * q));
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn single_group_is_plain_pbd() {
        let p = [0.1, 0.5, 0.7, 0.2];
        let d = weighted_pmf(&int_pbd(&[1], &[&p])).unwrap();
        assert_eq!(d.range.values(), &RangeValues::Integer(vec![0, 1, 2, 3, 4]));
        let direct = pbd_pmf(&ProbVector::new(p.to_vec()).unwrap());
        for x in 0..5 {
            assert!((d.pmf.get(x) - direct.get(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn two_fair_coins_weights_one_two() {
        let d = weighted_pmf(&int_pbd(&[1, 2], &[&[0.5], &[0.5]])).unwrap();
        assert_eq!(d.range.values(), &RangeValues::Integer(vec![0, 1, 2, 3]));
        assert_eq!(d.pmf.mass(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn matches_brute_force_on_mixed_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = rng.random_range(1..=4usize);
            let mut weights: Vec<i64> = Vec::new();
            while weights.len() < g {
                let b = rng.random_range(-4..=7i64);
                if !weights.contains(&b) {
                    weights.push(b);
                }
            }
            let mut left = 15usize;
            let groups: Vec<Vec<f64>> = (0..g)
                .map(|j| {
                    let c = if j + 1 == g {
                        left.clamp(1, 5)
                    } else {
                        rng.random_range(1..=left.min(5) - (g - j - 1).min(left.min(5) - 1))
                    };
                    left = left.saturating_sub(c);
                    (0..c).map(|_| rng.random::<f64>()).collect()
                })
                .collect();
            let refs: Vec<&[f64]> = groups.iter().map(|g| g.as_slice()).collect();
            let w = int_pbd(&weights, &refs);
            assert!(w.n() <= 15);
            let d = weighted_pmf(&w).unwrap();
            let bf = brute_force(&w);
            assert_eq!(d.range.len(), bf.len());
            for (&v, &m) in &bf {
                let i = d.range.index_of_integer(v).unwrap();
                assert!((d.pmf.get(i) - m).abs() < 1e-12);
            }
            assert!((d.pmf.total() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn range_is_exact_sumset() {
        let w = int_pbd(&[2, 3], &[&[0.5, 0.5], &[0.0]]);
        let d = weighted_pmf(&w).unwrap();
        // {0,2,4} + {0,3}; zero-probability groups still shape the range.
        assert_eq!(
            d.range.values(),
            &RangeValues::Integer(vec![0, 2, 3, 4, 5, 7])
        );
        assert_eq!(d.mass_at(3.0), 0.0);
        assert_eq!(d.mass_at(2.0), 0.5);
    }

    #[test]
    fn real_weights_merge_within_tolerance() {
        let w = WeightedPbd::new(
            Weights::Real(vec![0.1, 0.2]),
            vec![
                ProbVector::new(vec![0.5, 0.5]).unwrap(),
                ProbVector::new(vec![0.5]).unwrap(),
            ],
        )
        .unwrap();
        let d = weighted_pmf(&w).unwrap();
        // {0, .1, .2} + {0, .2}: 0.1 + 0.1 and 0.2 coincide up to rounding.
        assert_eq!(d.range.len(), 5);
        let i = d.range.index_of(0.2).unwrap();
        assert!((d.pmf.get(i) - (0.25 * 0.5 + 0.25 * 0.5)).abs() < 1e-15);
        assert!(d.range.index_of(0.25).is_none());
    }

    #[test]
    fn marginal_of_tuple_sum_is_group_pbd() {
        let w = int_pbd(&[1, 4, -2], &[&[0.3, 0.6], &[0.9, 0.1, 0.5], &[0.25]]);
        let t = tuples(&w);
        for (j, g) in w.groups().iter().enumerate() {
            let direct = pbd_pmf(g);
            let mut marg = vec![0.0; g.len() + 1];
            for (tuple, p) in &t {
                marg[tuple[j]] += p;
            }
            for (m, &x) in marg.iter().enumerate() {
                assert!((x - direct.get(m)).abs() < 1e-14);
            }
        }
        // Grouping the tuple sum by output value reproduces the convolution.
        let d = weighted_pmf(&w).unwrap();
        let mut by_value: BTreeMap<i64, f64> = BTreeMap::new();
        for (tuple, p) in &t {
            let v = tuple[0] as i64 + 4 * tuple[1] as i64 - 2 * tuple[2] as i64;
            *by_value.entry(v).or_default() += p;
        }
        for (v, p) in by_value {
            assert!((d.mass_at(v as f64) - p).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(WeightedPbd::new(
            Weights::Integer(vec![1, 1]),
            vec![
                ProbVector::new(vec![0.5]).unwrap(),
                ProbVector::new(vec![0.5]).unwrap()
            ]
        )
        .is_err());
        assert!(WeightedPbd::new(Weights::Integer(vec![]), vec![]).is_err());
        assert!(WeightedPbd::new(
            Weights::Integer(vec![1, 2]),
            vec![ProbVector::new(vec![0.5]).unwrap()]
        )
        .is_err());
        assert!(matches!(
            WeightedLayout::new(&Weights::Integer(vec![1, 1000]), &[100, 100], 50),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn hard_instance_k200() {
        let inst = make_lower_bound_instance(200, 7).unwrap();
        assert_eq!(inst.support.len(), 2);
        assert!(inst.support.iter().all(|&i| (101..=200).contains(&i)));
        for (i, &p) in inst.probs.probs().iter().enumerate() {
            let expect = if inst.support.contains(&(i + 1)) {
                0.5
            } else {
                0.0
            };
            assert_eq!(p, expect);
            assert_eq!(
                inst.weights[i],
                if i + 1 > 100 { (i + 1) as i64 } else { 0 }
            );
        }
        let d = weighted_pmf(&inst.to_weighted_pbd().unwrap()).unwrap();
        assert_eq!(d.mass_at(0.0), 0.25);
        assert_eq!(inst.mass_at_zero(), 0.25);
        let closed = 0.5 * libm::pow(0.5, 1.0);
        for j in 101..=200 {
            let m = d.mass_at(j as f64);
            if inst.support.contains(&j) {
                assert!((m - closed).abs() < 1e-15);
            } else {
                assert_eq!(m, 0.0);
            }
        }
        assert!((d.pmf.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hard_instance_family() {
        assert!(make_lower_bound_instance(201, 0).is_err());
        assert!(make_lower_bound_instance(50, 0).is_err());
        assert_eq!(hard_support_size(100), 1);
        assert_eq!(hard_support_size(250), 3);
        assert_eq!(hard_support_size(300), 3);
        assert_eq!(
            make_lower_bound_instance(200, 1).unwrap(),
            make_lower_bound_instance(200, 1).unwrap()
        );
        for k in [2000usize, 4000, 10_000] {
            let inst = make_lower_bound_instance(k, 3).unwrap();
            assert_eq!(inst.support.len(), k / 100);
            let z = inst.mass_at_zero();
            assert!(z > 0.35, "{k}: {z}");
            let expect = libm::pow(1.0 - 100.0 / k as f64, (k / 100) as f64);
            assert!((z - expect).abs() < 1e-12);
        }
        // Support outcome property at a second scale.
        let inst = make_lower_bound_instance(300, 11).unwrap();
        let d = weighted_pmf(&inst.to_weighted_pbd().unwrap()).unwrap();
        let p = 1.0 / 3.0;
        for j in 151..=300 {
            let m = d.mass_at(j as f64);
            if inst.support.contains(&j) {
                assert!((m - p * (1.0 - p) * (1.0 - p)).abs() < 1e-14);
            } else {
                assert_eq!(m, 0.0);
            }
        }
    }

    #[test]
    fn single_group_learn_matches_plain_tournament() {
        let cfg = WeightedLearnConfig::new(0.1)
            .unwrap()
            .with_k(2)
            .with_sparse_ell_cap(2);
        let w = Weights::Integer(vec![1]);
        let truth = ProbVector::new(vec![0.2, 0.7, 0.9, 0.4, 0.5, 0.5]).unwrap();
        let s = SampleSet::new(crate::sampling::sample_pbd(&truth, 5, 4000), 6).unwrap();
        let h = learn_weighted(&s, &w, &[6], &cfg).unwrap();
        let cover = build_cover(&cfg.group_cover(6).unwrap()).unwrap();
        let plain = tournament(cover.pmfs(), &s, 0.1).unwrap();
        assert_eq!(h.product_index, plain);
        assert_eq!(h.elements[0], cover.elements()[plain]);
        assert!(!h.certified);
    }

    #[test]
    fn two_group_learn_is_deterministic_and_close() {
        let cfg = WeightedLearnConfig::new(0.05)
            .unwrap()
            .with_k(2)
            .with_sparse_ell_cap(2)
            .with_heavy_q_stride(2);
        let w = Weights::Integer(vec![1, 3]);
        let product = ProductCover::new(&w, &[6, 6], &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(1, 2, 3));
        let truth = WeightedPbd::new(
            w.clone(),
            (0..2)
                .map(|_| ProbVector::new((0..6).map(|_| rng.random()).collect()).unwrap())
                .collect(),
        )
        .unwrap();
        let td = weighted_pmf(&truth).unwrap();
        let s = SampleSet::new(td.sample(9, 20_000), td.range.len() - 1).unwrap();
        let a = learn_weighted_on(&product, &w, &s, &cfg).unwrap();
        let b = learn_weighted_on(&product, &w, &s, &cfg).unwrap();
        assert_eq!(a, b);
        let best = product
            .pmfs()
            .iter()
            .map(|p| tv_distance(p, &td.pmf))
            .fold(1.0, f64::min);
        assert!(tv_distance(&a.pmf, &td.pmf) <= best + 6.0 * 0.05);
        // The hypothesis PMF matches its own per-group description.
        let again = weighted_pmf(&a.pbd).unwrap();
        assert!(tv_distance(&again.pmf, &a.pmf) < 1e-12);
        let e0 = cover_element_pmf(&a.elements[0], 6).unwrap();
        assert!(tv_distance(&e0, &pbd_pmf(&a.pbd.groups()[0])) < 1e-12);
    }

    #[test]
    fn samples_map_to_range_indices() {
        let d = weighted_pmf(&int_pbd(&[2, 5], &[&[0.5], &[0.5]])).unwrap();
        let s = d.range.to_samples(&[0.0, 7.0, 5.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[0, 3, 2, 1]);
        assert!(d.range.to_samples(&[1.0]).is_err());
    }
}
