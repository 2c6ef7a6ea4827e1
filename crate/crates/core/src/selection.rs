//! Hypothesis selection by pairwise competitions over a finite candidate list.
//!
//! For candidates `a`, `b` let `W1 = {w : a(w) >= b(w)}`, `p1 = a(W1)`,
//! `q1 = b(W1)` and `T` the fraction of samples landing in `W1`. The
//! competition is a draw when `p1 - q1 <= 5 delta`; otherwise `a` wins when
//! `T > p1 - 3 delta / 2`, `b` wins when `T < q1 + 3 delta / 2`, and it is a
//! draw in between. The tournament returns the lowest-index candidate that
//! never loses.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dist::{tv_distance, Pmf, ProbVector};
use crate::empirical::{check_unit_open, SampleSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    WinFirst,
    WinSecond,
    Draw,
}

impl Outcome {
    pub fn mirrored(self) -> Outcome {
        match self {
            Outcome::WinFirst => Outcome::WinSecond,
            Outcome::WinSecond => Outcome::WinFirst,
            Outcome::Draw => Outcome::Draw,
        }
    }
}

/// Result of one competition.
///
/// `p1`, `q1` and `t_stat` are measured in the orientation the decision was
/// taken in: `p1` is the mass of `W1` under the candidate playing the first
/// role. When `first_is_q1` is false the roles were swapped (see
/// [`competition`]); `outcome` is always relative to the caller's argument order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompetitionResult {
    pub outcome: Outcome,
    pub p1: f64,
    pub q1: f64,
    pub t_stat: f64,
    pub first_is_q1: bool,
}

/// Decision table applied to `(p1, q1, T)` for the oriented pair.
pub fn decide(p1: f64, q1: f64, t_stat: f64, delta: f64) -> Outcome {
    if p1 - q1 <= 5.0 * delta {
        Outcome::Draw
    } else if t_stat > p1 - 1.5 * delta {
        Outcome::WinFirst
    } else if t_stat < q1 + 1.5 * delta {
        Outcome::WinSecond
    } else {
        Outcome::Draw
    }
}

/// Sample histogram shared by every competition of a tournament.
#[derive(Clone, Debug)]
pub struct SampleCounts {
    counts: Vec<u64>,
    total: u64,
}

impl SampleCounts {
    pub fn new(samples: &SampleSet) -> Self {
        SampleCounts {
            counts: samples.counts(),
            total: samples.len() as u64,
        }
    }

    pub fn domain_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// The sample frequencies as a PMF.
    pub fn frequencies(&self) -> Pmf {
        let k = self.total as f64;
        Pmf::from_vec_unchecked(self.counts.iter().map(|&c| c as f64 / k).collect())
    }
}

/// Orders two mass vectors lexicographically; the larger plays `Q1`.
fn first_leads(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Greater => return true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
    }
    true
}

fn oriented(a: &[f64], b: &[f64], counts: &SampleCounts, delta: f64) -> (Outcome, f64, f64, f64) {
    let (mut p1, mut q1, mut hits) = (0.0, 0.0, 0u64);
    for ((&x, &y), &c) in a.iter().zip(b).zip(&counts.counts) {
        if x >= y {
            p1 += x;
            q1 += y;
            hits += c;
        }
    }
    let t = hits as f64 / counts.total as f64;
    (decide(p1, q1, t, delta), p1, q1, t)
}

/// Competition on precomputed counts. Both PMFs must share the count domain.
pub fn compete(a: &Pmf, b: &Pmf, counts: &SampleCounts, delta: f64) -> CompetitionResult {
    let (am, bm) = (a.mass(), b.mass());
    debug_assert_eq!(am.len(), counts.counts.len());
    debug_assert_eq!(bm.len(), counts.counts.len());
    if first_leads(am, bm) {
        let (outcome, p1, q1, t_stat) = oriented(am, bm, counts, delta);
        CompetitionResult {
            outcome,
            p1,
            q1,
            t_stat,
            first_is_q1: true,
        }
    } else {
        let (outcome, p1, q1, t_stat) = oriented(bm, am, counts, delta);
        CompetitionResult {
            outcome: outcome.mirrored(),
            p1,
            q1,
            t_stat,
            first_is_q1: false,
        }
    }
}

/// One competition between `a` and `b` on `samples`.
///
/// Points where the two candidates tie belong to `W1`, which makes the raw
/// decision depend on argument order whenever the sample frequency of the
/// tie set differs from its mass. The pair is therefore always evaluated
/// with the lexicographically larger mass vector as `Q1`, and the outcome is
/// reported relative to the caller's order, so swapping the arguments
/// exactly mirrors the outcome.
pub fn competition(a: &Pmf, b: &Pmf, samples: &SampleSet, delta: f64) -> Result<CompetitionResult> {
    check_unit_open("delta", delta)?;
    if a.domain_max() != b.domain_max() {
        return Err(Error::DomainMismatch {
            left: a.domain_max(),
            right: b.domain_max(),
        });
    }
    check_samples(a.domain_max(), samples)?;
    Ok(compete(a, b, &SampleCounts::new(samples), delta))
}

fn check_samples(domain_max: usize, samples: &SampleSet) -> Result<()> {
    if let Some((index, &value)) = samples
        .values()
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
    Ok(())
}

fn check_candidates(candidates: &[Pmf], samples: &SampleSet) -> Result<usize> {
    let first = candidates.first().ok_or(Error::Empty("candidate list"))?;
    let d = first.domain_max();
    if let Some(bad) = candidates.iter().find(|c| c.domain_max() != d) {
        return Err(Error::DomainMismatch {
            left: d,
            right: bad.domain_max(),
        });
    }
    check_samples(d, samples)?;
    Ok(d)
}

/// Lowest-index candidate that wins or draws every competition against the
/// others on the shared sample set; [`Error::TournamentFailure`] otherwise.
pub fn tournament(candidates: &[Pmf], samples: &SampleSet, delta: f64) -> Result<usize> {
    check_unit_open("delta", delta)?;
    let d = check_candidates(candidates, samples)?;
    let mut counts = SampleCounts::new(samples);
    counts.counts.resize(d + 1, 0);
    tournament_on_counts(candidates, &counts, delta)
}

/// [`tournament`] on precomputed counts.
///
/// Candidates are scanned in index order and each is matched against the
/// others until it loses. Opponents are tried closest-to-the-samples first,
/// which only changes how quickly losers are found, never the answer.
pub fn tournament_on_counts(
    candidates: &[Pmf],
    counts: &SampleCounts,
    delta: f64,
) -> Result<usize> {
    let freq = counts.frequencies();
    let mut order: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (tv_distance(c, &freq), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    'candidates: for (i, cand) in candidates.iter().enumerate() {
        for &(_, j) in &order {
            if j != i && compete(cand, &candidates[j], counts, delta).outcome == Outcome::WinSecond
            {
                continue 'candidates;
            }
        }
        return Ok(i);
    }
    Err(Error::TournamentFailure)
}

/// Full outcome matrix; entry `[i][j]` is the outcome of `i` versus `j`
/// from `i`'s point of view. Quadratic; intended for replay checks.
pub fn competition_matrix(
    candidates: &[Pmf],
    samples: &SampleSet,
    delta: f64,
) -> Result<Vec<Vec<Outcome>>> {
    check_unit_open("delta", delta)?;
    let d = check_candidates(candidates, samples)?;
    let mut counts = SampleCounts::new(samples);
    counts.counts.resize(d + 1, 0);
    let n = candidates.len();
    let mut m = vec![vec![Outcome::Draw; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let o = compete(&candidates[i], &candidates[j], &counts, delta).outcome;
            m[i][j] = o;
            m[j][i] = o.mirrored();
        }
    }
    Ok(m)
}

/// True when candidate `i` never loses in the matrix.
pub fn never_loses(matrix: &[Vec<Outcome>], i: usize) -> bool {
    matrix[i].iter().all(|&o| o != Outcome::WinSecond)
}

/// Samples that make `exp(-m delta^2 / 8) <= 1/(40 N)`:
/// `ceil((8 / delta^2) ln(40 N))`.
pub fn tournament_sample_size(delta: f64, n_candidates: usize) -> Result<u64> {
    check_unit_open("delta", delta)?;
    if n_candidates == 0 {
        return Err(Error::Empty("candidate list"));
    }
    Ok(libm::ceil(8.0 / (delta * delta) * libm::log(40.0 * n_candidates as f64)) as u64)
}

/// Every vector in `[0, 1]^n` whose entries are integer multiples of
/// `delta / n`. Any target has a grid point within `delta` in total
/// variation, since each coordinate rounds by at most `delta / n`. Grows as
/// `(n / delta)^n`; refuses more than `cap` vectors.
pub fn generic_grid_cover(n: usize, delta: f64, cap: usize) -> Result<Vec<ProbVector>> {
    if n == 0 {
        return Err(Error::Empty("indicator count n"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
        });
    }
    let step = delta / n as f64;
    let levels = libm::floor(1.0 / step + 1e-9) as usize + 1;
    let total = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(levels));
    match total {
        Some(t) if t <= cap => {}
        _ => {
            return Err(Error::SizeLimit {
                what: "generic grid cover",
                limit: cap,
                requested: total.unwrap_or(usize::MAX),
            })
        }
    }
    let grid: Vec<f64> = (0..levels).map(|j| (j as f64 * step).min(1.0)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        out.push(ProbVector::new(idx.iter().map(|&j| grid[j]).collect())?);
        let Some(pos) = idx.iter().rposition(|&j| j + 1 < levels) else {
            break;
        };
        idx[pos] += 1;
        for slot in &mut idx[pos + 1..] {
            *slot = 0;
        }
    }
    Ok(out)
}
