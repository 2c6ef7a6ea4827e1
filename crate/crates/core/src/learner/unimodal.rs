//! Histogram learner for unimodal distributions on `{0, ..., n}` and a
//! low-randomness sampler for the resulting histograms.
//!
//! The domain is first cut greedily into maximal intervals of empirical mass
//! at most `eps/10`. Each interval is then split into buckets whose lengths
//! grow by a factor `1 + eps`, starting with unit length at the end that
//! holds more samples: inside a monotone stretch of a unimodal PMF that is
//! the end nearer the mode, where the mass changes fastest.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::dist::Pmf;
use crate::empirical::{check_unit_open, SampleSet};
use crate::error::{Error, Result};
use crate::sampling::stream_rng;

/// Piecewise-uniform distribution: interval `i` is
/// `boundaries[i] .. boundaries[i + 1]` (half open) and carries mass
/// `counts[i] / total`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistogramHypothesis {
    boundaries: Vec<usize>,
    counts: Vec<u64>,
    total: u64,
}

impl HistogramHypothesis {
    /// `boundaries` must start at 0 and increase strictly; one count per interval.
    pub fn new(boundaries: Vec<usize>, counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty("histogram intervals"));
        }
        if boundaries.len() != counts.len() + 1 || boundaries[0] != 0 {
            return Err(Error::Invalid(
                "histogram boundaries must be 0 = b_0 < ... < b_m = n + 1",
            ));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(
                "histogram boundaries must increase strictly",
            ));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Empty("histogram mass"));
        }
        Ok(HistogramHypothesis {
            boundaries,
            counts,
            total,
        })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn domain_max(&self) -> usize {
        self.boundaries[self.boundaries.len() - 1] - 1
    }

    pub fn interval_count(&self) -> usize {
        self.counts.len()
    }

    /// Inclusive endpoints of interval `i`.
    pub fn interval(&self, i: usize) -> (usize, usize) {
        (self.boundaries[i], self.boundaries[i + 1] - 1)
    }

    pub fn width(&self, i: usize) -> usize {
        self.boundaries[i + 1] - self.boundaries[i]
    }

    pub fn max_width(&self) -> usize {
        (0..self.interval_count())
            .map(|i| self.width(i))
            .max()
            .unwrap_or(1)
    }

    pub fn masses(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    /// Point masses, uniform inside each interval.
    pub fn pmf(&self) -> Pmf {
        let mut mass = vec![0.0; self.domain_max() + 1];
        for i in 0..self.interval_count() {
            let each = self.counts[i] as f64 / (self.total as f64 * self.width(i) as f64);
            mass[self.boundaries[i]..self.boundaries[i + 1]].fill(each);
        }
        Pmf::from_vec_unchecked(mass)
    }
}

/// `ceil(50 log2(n + 1) / eps^3)`.
pub fn unimodal_sample_size(n: usize, epsilon: f64) -> Result<u64> {
    check_unit_open("epsilon", epsilon)?;
    let bits = libm::log2((n as f64) + 1.0);
    Ok(libm::ceil(50.0 * bits / (epsilon * epsilon * epsilon)) as u64)
}

pub fn learn_unimodal(samples: &SampleSet, n: usize, epsilon: f64) -> Result<HistogramHypothesis> {
    check_unit_open("epsilon", epsilon)?;
    if samples.domain_max() != n {
        return Err(Error::DomainMismatch {
            left: samples.domain_max(),
            right: n,
        });
    }
    let counts = samples.counts();
    let total = samples.len() as u64;
    let limit = epsilon / 10.0 * total as f64;

    let mut boundaries = vec![0usize];
    let mut bucket_counts = Vec::new();
    let mut a = 0;
    while a <= n {
        let mut b = a;
        let mut mass = counts[a];
        while b < n && (mass + counts[b + 1]) as f64 <= limit {
            b += 1;
            mass += counts[b];
        }
        if mass == 0 {
            boundaries.push(b + 1);
            bucket_counts.push(0);
        } else {
            split_geometric(
                &counts[a..=b],
                a,
                epsilon,
                &mut boundaries,
                &mut bucket_counts,
            );
        }
        a = b + 1;
    }
    HistogramHypothesis::new(boundaries, bucket_counts)
}

/// Appends the geometric buckets of one interval starting at `offset`.
fn split_geometric(
    counts: &[u64],
    offset: usize,
    epsilon: f64,
    boundaries: &mut Vec<usize>,
    out: &mut Vec<u64>,
) {
    let len = counts.len();
    let half = len / 2;
    let left: u64 = counts[..half].iter().sum();
    let right: u64 = counts[len - half..].iter().sum();
    let mut lengths = Vec::new();
    let mut covered = 0;
    let mut i = 0;
    while covered < len {
        let l = (libm::floor(libm::pow(1.0 + epsilon, i as f64)) as usize).max(1);
        let l = l.min(len - covered);
        lengths.push(l);
        covered += l;
        i += 1;
    }
    if right > left {
        lengths.reverse();
    }
    let mut start = 0;
    for l in lengths {
        out.push(counts[start..start + l].iter().sum());
        start += l;
        boundaries.push(offset + start);
    }
}

/// Random bits from a ChaCha stream, buffered per 64-bit word, with a count
/// of the bits handed out.
#[derive(Clone, Debug)]
pub struct BitSource {
    rng: ChaCha8Rng,
    buf: u64,
    avail: u32,
    used: u64,
}

impl BitSource {
    pub fn new(seed: u64) -> Self {
        BitSource {
            rng: stream_rng(seed, 0),
            buf: 0,
            avail: 0,
            used: 0,
        }
    }

    /// Next `r <= 128` bits as an integer in `[0, 2^r)`.
    pub fn bits(&mut self, r: u32) -> u128 {
        assert!(r <= 128);
        let mut out: u128 = 0;
        let mut need = r;
        while need > 0 {
            if self.avail == 0 {
                self.buf = self.rng.next_u64();
                self.avail = 64;
            }
            let take = need.min(self.avail);
            // Most significant bits first.
            let chunk = if take == 64 {
                self.buf
            } else {
                self.buf >> (64 - take)
            };
            self.buf = if take == 64 { 0 } else { self.buf << take };
            self.avail -= take;
            out = (out << take) | chunk as u128;
            need -= take;
        }
        self.used += r as u64;
        out
    }

    pub fn bits_used(&self) -> u64 {
        self.used
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HistogramDraw {
    pub value: u64,
    pub bits: u32,
}

/// Extra precision bits beyond the interval and width bits.
const PRECISION_BITS: u32 = 16;

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Two-stage sampler: an interval by mass, then a uniform point inside it.
/// A draw takes one integer of `R = ceil(log2 m) + ceil(log2 W) + 16` bits
/// (`m` intervals, widest `W`) and inverts the piecewise-uniform CDF on the
/// integer grid `[0, 2^R)`; when a single interval carries all the mass only
/// the position inside it is drawn.
#[derive(Clone, Debug)]
pub struct HistogramSampler {
    boundaries: Vec<usize>,
    // Integer CDF cut points on [0, 2^r], one per interval boundary.
    cuts: Vec<u128>,
    r: u32,
    only: Option<usize>,
}

impl HistogramSampler {
    pub fn new(h: &HistogramHypothesis) -> Self {
        let m = h.interval_count() as u64;
        let positive: Vec<usize> = (0..h.interval_count())
            .filter(|&i| h.counts[i] > 0)
            .collect();
        let only = (positive.len() == 1).then(|| positive[0]);
        let r = ceil_log2(m) + ceil_log2(h.max_width() as u64) + PRECISION_BITS;
        assert!(r <= 112, "histogram too large for exact integer inversion");
        let scale: u128 = 1u128 << r;
        let k = h.total as u128;
        let (q, rem) = (scale / k, scale % k);
        let mut cuts = Vec::with_capacity(h.counts.len() + 1);
        let mut c: u128 = 0;
        cuts.push(0);
        for &x in &h.counts {
            c += x as u128;
            // floor(c 2^r / k) without overflow.
            cuts.push(c * q + c * rem / k);
        }
        HistogramSampler {
            boundaries: h.boundaries.clone(),
            cuts,
            r,
            only,
        }
    }

    /// Upper bound on the bits of any single draw.
    pub fn bits_per_draw(&self) -> u32 {
        self.r
    }

    pub fn draw(&self, src: &mut BitSource) -> HistogramDraw {
        let before = src.bits_used();
        let value = match self.only {
            Some(i) => {
                let lo = self.boundaries[i] as u64;
                let w = (self.boundaries[i + 1] - self.boundaries[i]) as u64;
                lo + uniform_below(w, src)
            }
            None => {
                let u = src.bits(self.r);
                let i = self.cuts.partition_point(|&c| c <= u) - 1;
                let (a, b) = (self.cuts[i], self.cuts[i + 1]);
                let w = (self.boundaries[i + 1] - self.boundaries[i]) as u128;
                (self.boundaries[i] as u128 + (u - a) * w / (b - a)) as u64
            }
        };
        HistogramDraw {
            value,
            bits: (src.bits_used() - before) as u32,
        }
    }

    /// `count` draws from one bit stream; returns the values and total bits.
    pub fn sample(&self, seed: u64, count: usize) -> (Vec<u64>, u64) {
        let mut src = BitSource::new(seed);
        let values = (0..count).map(|_| self.draw(&mut src).value).collect();
        (values, src.bits_used())
    }
}

/// Uniform on `[0, w)`: exact with `log2 w` bits for powers of two, otherwise
/// `ceil(log2 w) + 16` bits of fixed-point precision.
fn uniform_below(w: u64, src: &mut BitSource) -> u64 {
    if w.is_power_of_two() {
        src.bits(w.trailing_zeros()) as u64
    } else {
        let r = ceil_log2(w) + PRECISION_BITS;
        ((src.bits(r) * w as u128) >> r) as u64
    }
}

/// One draw with a fresh bit stream.
pub fn histogram_sample(h: &HistogramHypothesis, seed: u64) -> HistogramDraw {
    HistogramSampler::new(h).draw(&mut BitSource::new(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{binomial_pmf, pbd_pmf, tv_distance, ProbVector, UNIMODAL_SLACK};
    use crate::sampling::{sample_pbd, PmfSampler};

    #[test]
    fn constant_samples_one_interval_gets_all_mass() {
        let s = SampleSet::new(vec![7; 50], 20).unwrap();
        let h = learn_unimodal(&s, 20, 0.2).unwrap();
        let owner = (0..h.interval_count())
            .find(|&i| h.interval(i).0 <= 7 && 7 <= h.interval(i).1)
            .unwrap();
        assert_eq!(h.counts()[owner], 50);
        assert_eq!(h.counts().iter().sum::<u64>(), 50);
        assert_eq!(h.interval(owner), (7, 7));
    }

    #[test]
    fn intervals_partition_and_counts_are_exact() {
        let p = ProbVector::new((0..60).map(|i| (i as f64 / 61.0).powi(2)).collect()).unwrap();
        for seed in 0..10 {
            let s = SampleSet::new(sample_pbd(&p, seed, 3000), 60).unwrap();
            let h = learn_unimodal(&s, 60, 0.3).unwrap();
            assert_eq!(h.boundaries()[0], 0);
            assert_eq!(*h.boundaries().last().unwrap(), 61);
            let raw = s.counts();
            for i in 0..h.interval_count() {
                let (lo, hi) = h.interval(i);
                assert_eq!(h.counts()[i], raw[lo..=hi].iter().sum::<u64>());
            }
            assert_eq!(h.total(), 3000);
            let pmf = h.pmf();
            assert!((pmf.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_buckets_start_at_heavy_end() {
        let mut b = vec![0];
        let mut c = Vec::new();
        // Decreasing counts: unit bucket first.
        split_geometric(&[9, 8, 7, 6, 5, 4, 3, 2, 1, 1], 5, 1.0, &mut b, &mut c);
        assert_eq!(b, [0, 6, 8, 12, 15]);
        assert_eq!(c, [9, 15, 18, 4]);
        let mut b = vec![0];
        let mut c = Vec::new();
        split_geometric(&[1, 1, 2, 3, 4, 5, 6, 7, 8, 9], 0, 1.0, &mut b, &mut c);
        assert_eq!(b, [0, 3, 7, 9, 10]);
    }

    #[test]
    fn binomial_1000_accuracy() {
        let eps = 0.2;
        let m = unimodal_sample_size(1000, eps).unwrap();
        // 50 * 9.96723 / 0.008 = 62295.2
        assert_eq!(m, 62_296);
        let truth = binomial_pmf(1000, 0.5).unwrap();
        let sampler = PmfSampler::new(&truth);
        let bound = 50.0 * libm::log2(1001.0) / eps;
        for seed in 0..10 {
            let s = SampleSet::new(sampler.sample(seed, m as usize), 1000).unwrap();
            let h = learn_unimodal(&s, 1000, eps).unwrap();
            assert!(tv_distance(&h.pmf(), &truth) <= eps);
            assert!((h.interval_count() as f64) <= bound);
        }
    }

    #[test]
    fn single_point_histogram_needs_no_bits() {
        let h = HistogramHypothesis::new(vec![0, 3, 4, 6], vec![0, 5, 0]).unwrap();
        for seed in 0..20 {
            let d = histogram_sample(&h, seed);
            assert_eq!(d, HistogramDraw { value: 3, bits: 0 });
        }
    }

    #[test]
    fn power_of_two_width_uses_exact_bits() {
        let h = HistogramHypothesis::new(vec![0, 8], vec![4]).unwrap();
        let s = HistogramSampler::new(&h);
        let mut src = BitSource::new(3);
        let mut seen = [0u32; 8];
        for _ in 0..8000 {
            let d = s.draw(&mut src);
            assert_eq!(d.bits, 3);
            seen[d.value as usize] += 1;
        }
        assert!(seen.iter().all(|&c| (850..1150).contains(&c)), "{seen:?}");
    }

    #[test]
    fn frequencies_within_three_sigma() {
        let h = HistogramHypothesis::new(vec![0, 1, 4, 5, 12], vec![10, 30, 45, 15]).unwrap();
        let s = HistogramSampler::new(&h);
        let draws = 100_000;
        let (values, bits) = s.sample(11, draws);
        assert!(bits <= draws as u64 * s.bits_per_draw() as u64);
        assert_eq!(s.bits_per_draw(), 2 + 3 + 16);
        let pmf = h.pmf();
        let mut counts = [0u64; 12];
        for v in values {
            counts[v as usize] += 1;
        }
        for (x, &c) in counts.iter().enumerate() {
            let p = pmf.get(x);
            let sigma = libm::sqrt(draws as f64 * p * (1.0 - p));
            assert!(
                (c as f64 - draws as f64 * p).abs() <= 3.0 * sigma + 1.0,
                "{x}: {c} vs {p}"
            );
        }
    }

    #[test]
    fn bit_source_concatenates_words() {
        let mut a = BitSource::new(5);
        let mut b = BitSource::new(5);
        let whole = a.bits(100);
        let hi = b.bits(40);
        let lo = b.bits(60);
        assert_eq!(whole, (hi << 60) | lo);
        assert_eq!(a.bits_used(), 100);
    }

    #[test]
    fn learned_histogram_close_on_skewed_pbd() {
        let p = ProbVector::new(
            (0..200)
                .map(|i| if i % 7 == 0 { 0.9 } else { 0.05 })
                .collect(),
        )
        .unwrap();
        let truth = pbd_pmf(&p);
        assert!(truth.is_unimodal(UNIMODAL_SLACK));
        let s = SampleSet::new(sample_pbd(&p, 2, 20_000), 200).unwrap();
        let h = learn_unimodal(&s, 200, 0.25).unwrap();
        assert!(tv_distance(&h.pmf(), &truth) <= 0.25);
    }
}
