//! Seeded Monte Carlo scenarios, one CSV row per trial.
//!
//! Every trial seed is `derive_seed(base_seed, TRIAL, t)`; targets, decoys
//! and samples of a trial use further substreams of that seed, so trials can
//! run in any order and on any number of threads.

use std::fmt::Write as _;
use std::time::Instant;

use pbdlearn_core::cover::{build_cover, cover_element_pmf, CoverConfig, HeavyBinomialForm};
use pbdlearn_core::dist::{
    brute_force_pbd_pmf, kolmogorov_distance, pbd_pmf, tv_distance, Pmf, ProbVector,
};
use pbdlearn_core::empirical::{dkw_accuracy, dkw_sample_size, empirical_cdf, SampleSet};
use pbdlearn_core::learner::{
    kolmogorov_sample_size, kolmogorov_tv_gap_check, learn_unimodal, shifted_poisson_pair_check,
    unimodal_sample_size, HistogramSampler, KolmogorovConfig, KolmogorovLearner, TvLearner,
    TvLearnerConfig, STAGE_DELTA,
};
use pbdlearn_core::sampling::{derive_seed, sample_pbd, PmfSampler};
use pbdlearn_core::selection::{
    competition_matrix, never_loses, tournament, tournament_sample_size,
};
use pbdlearn_core::weighted::{
    learn_weighted_on, make_lower_bound_instance, weighted_pmf, ProductCover, WeightedLearnConfig,
    WeightedPbd, Weights,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const CSV_VERSION: u32 = 1;
pub const CSV_COLUMNS: &str =
    "trial,seed,error,bound,accepted_form,samples,time_ms,success,violation";

/// Substream purposes under a base seed.
pub const TRIAL: u64 = 1;
pub const TARGET: u64 = 2;
pub const SAMPLES: u64 = 3;
pub const DECOY: u64 = 4;

pub const SCENARIOS: &[&str] = &[
    "dp",
    "dkw",
    "cover",
    "tournament",
    "tv",
    "kolmogorov",
    "unimodal-binomial",
    "unimodal-skewed",
    "gap",
    "poisson",
    "hard-instance",
    "weighted",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub k_override: Option<u32>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub h_threshold: Option<f64>,
    /// Allowed error above the reference value (best in cover, or a constant).
    #[serde(default)]
    pub slack: Option<f64>,
    #[serde(default)]
    pub sparse_ell_cap: Option<usize>,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    /// Record wall time per trial; off by default so reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(scenario: &str, trials: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            scenario: scenario.to_string(),
            trials,
            base_seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub error: f64,
    pub bound: f64,
    pub accepted_form: String,
    pub samples: u64,
    pub time_ms: f64,
    pub success: bool,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub trials: usize,
    pub successes: usize,
    pub violations: usize,
    pub fraction: f64,
    pub max_error: f64,
    /// Largest `error - (bound - slack)`, the excess over the reference.
    pub max_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown scenario {0:?}; known: {known}", known = SCENARIOS.join(", "))]
    UnknownScenario(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pbdlearn_core::Error),
}

type Result<T> = std::result::Result<T, BenchError>;

pub fn rng_for(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, purpose, index))
}

/// Means in `[1/4, 3/4]`: a binomial-like, high-variance sum.
pub fn heavy_target(rng: &mut ChaCha8Rng, n: usize) -> ProbVector {
    ProbVector::new((0..n).map(|_| rng.random_range(0.25..0.75)).collect()).unwrap()
}

/// Deterministic indicators except for three random means.
pub fn sparse_target(rng: &mut ChaCha8Rng, n: usize) -> ProbVector {
    let mut p: Vec<f64> = (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
        .collect();
    for _ in 0..3 {
        let j = rng.random_range(0..n);
        p[j] = rng.random();
    }
    ProbVector::new(p).unwrap()
}

/// Even trials draw a heavy target, odd trials a sparse one.
pub fn mixed_target(trial: usize, seed: u64, n: usize) -> ProbVector {
    let mut rng = rng_for(seed, TARGET, 0);
    if trial.is_multiple_of(2) {
        heavy_target(&mut rng, n)
    } else {
        sparse_target(&mut rng, n)
    }
}

/// Means `((i + 1/2)/n)^3`: mass concentrated well below `n/2`.
pub fn skewed_pbd(n: usize) -> ProbVector {
    ProbVector::new(
        (0..n)
            .map(|i| ((i as f64 + 0.5) / n as f64).powi(3))
            .collect(),
    )
    .unwrap()
}

fn row(trial: usize, seed: u64, error: f64, bound: f64, form: String, samples: u64) -> TrialRow {
    TrialRow {
        trial,
        seed,
        error,
        bound,
        accepted_form: form,
        samples,
        time_ms: 0.0,
        success: error <= bound,
        violation: false,
    }
}

fn trial_seeds(cfg: &ExperimentConfig) -> Vec<(usize, u64)> {
    (0..cfg.trials)
        .map(|t| (t, derive_seed(cfg.base_seed, TRIAL, t as u64)))
        .collect()
}

fn par_rows<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<TrialRow>>
where
    F: Fn(usize, u64) -> Result<TrialRow> + Sync,
{
    trial_seeds(cfg)
        .into_par_iter()
        .map(|(t, s)| {
            let start = Instant::now();
            let mut r = f(t, s)?;
            if cfg.timing {
                r.time_ms = start.elapsed().as_secs_f64() * 1e3;
            }
            Ok(r)
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.trials == 0 {
        return Err(BenchError::Config("trials must be at least 1".into()));
    }
    let rows = match cfg.scenario.as_str() {
        "dp" => dp(cfg)?,
        "dkw" => dkw(cfg)?,
        "cover" => cover(cfg)?,
        "tournament" => tournament_scenario(cfg)?,
        "tv" => tv(cfg)?,
        "kolmogorov" => kolmogorov(cfg)?,
        "unimodal-binomial" => unimodal(cfg, false)?,
        "unimodal-skewed" => unimodal(cfg, true)?,
        "gap" => gap(cfg)?,
        "poisson" => poisson(cfg)?,
        "hard-instance" => hard_instance(cfg)?,
        "weighted" => weighted(cfg)?,
        other => return Err(BenchError::UnknownScenario(other.to_string())),
    };
    let slack = cfg.slack.unwrap_or(0.0);
    let successes = rows.iter().filter(|r| r.success).count();
    let summary = Summary {
        scenario: cfg.scenario.clone(),
        trials: rows.len(),
        successes,
        violations: rows.iter().filter(|r| r.violation).count(),
        fraction: successes as f64 / rows.len() as f64,
        max_error: rows
            .iter()
            .map(|r| r.error)
            .filter(|e| e.is_finite())
            .fold(f64::MIN, f64::max),
        max_excess: rows
            .iter()
            .filter(|r| r.error.is_finite())
            .map(|r| r.error - (r.bound - slack))
            .fold(f64::MIN, f64::max),
    };
    Ok(Report {
        config: cfg.clone(),
        rows,
        summary,
    })
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "# pbdlearn bench csv v{CSV_VERSION} scenario={} base_seed={}",
            self.config.scenario, self.config.base_seed
        )
        .unwrap();
        writeln!(s, "{CSV_COLUMNS}").unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{:.3},{},{}",
                r.trial,
                r.seed,
                r.error,
                r.bound,
                r.accepted_form,
                r.samples,
                r.time_ms,
                r.success,
                r.violation
            )
            .unwrap();
        }
        let m = &self.summary;
        writeln!(
            s,
            "summary,{},{},,{}/{},,,{},{}",
            self.config.base_seed, m.max_error, m.successes, m.trials, m.fraction, m.violations
        )
        .unwrap();
        s
    }
}

fn dp(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let max_n = cfg.n.unwrap_or(15).min(20);
    par_rows(cfg, |t, seed| {
        let mut rng = rng_for(seed, TARGET, 0);
        let n = rng.random_range(1..=max_n);
        let p = ProbVector::new((0..n).map(|_| rng.random()).collect())?;
        let dp = pbd_pmf(&p);
        let bf = brute_force_pbd_pmf(&p)?;
        let err = dp
            .mass()
            .iter()
            .zip(bf.mass())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(row(t, seed, err, 1e-9, format!("n={n}"), 0))
    })
}

fn dkw(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let n = cfg.n.unwrap_or(50);
    let eps = cfg.epsilon.unwrap_or(0.1);
    let delta = cfg.delta.unwrap_or(0.1);
    let m = match cfg.samples {
        Some(m) => m as u64,
        None => dkw_sample_size(eps, delta)?,
    };
    par_rows(cfg, |t, seed| {
        let mut rng = rng_for(seed, TARGET, 0);
        let p = ProbVector::new((0..n).map(|_| rng.random()).collect())?;
        let truth = pbd_pmf(&p).to_cdf();
        let s = SampleSet::new(sample_pbd(&p, derive_seed(seed, SAMPLES, 0), m as usize), n)?;
        let err = kolmogorov_distance(&truth, &empirical_cdf(&s).to_cdf());
        Ok(row(t, seed, err, eps, "empirical".into(), m))
    })
}

fn cover(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let n = cfg.n.unwrap_or(8);
    let k = cfg.k_override.unwrap_or(2);
    let c = build_cover(&CoverConfig::new(0.5, n)?.with_k(k)?)?;
    let bound = 1.0 / k as f64 + cfg.slack.unwrap_or(0.05);
    par_rows(cfg, |t, seed| {
        let mut rng = rng_for(seed, TARGET, 0);
        let p = ProbVector::new((0..n).map(|_| rng.random()).collect())?;
        let target = pbd_pmf(&p);
        let (i, d) = c
            .closest_by(|q| tv_distance(q, &target))
            .expect("nonempty cover");
        let form = if c.elements()[i].is_sparse() {
            "sparse"
        } else {
            "heavy"
        };
        Ok(row(t, seed, d, bound, form.into(), 0))
    })
}

/// Truth plus one candidate within `delta` and 49 decoys farther than `6 delta`.
pub fn tournament_candidates(
    seed: u64,
    n: usize,
    delta: f64,
    count: usize,
) -> (ProbVector, Vec<Pmf>, usize) {
    let mut rng = rng_for(seed, TARGET, 0);
    let truth = ProbVector::new((0..n).map(|_| rng.random()).collect()).unwrap();
    let tp = pbd_pmf(&truth);
    let close = loop {
        let p: Vec<f64> = truth
            .probs()
            .iter()
            .map(|&x| (x + rng.random_range(-0.02..0.02)).clamp(0.0, 1.0))
            .collect();
        let c = pbd_pmf(&ProbVector::new(p).unwrap());
        if tv_distance(&c, &tp) <= delta {
            break c;
        }
    };
    let mut drng = rng_for(seed, DECOY, 0);
    let mut cands = Vec::with_capacity(count);
    while cands.len() + 1 < count {
        let d = pbd_pmf(&ProbVector::new((0..n).map(|_| drng.random()).collect()).unwrap());
        if tv_distance(&d, &tp) > 6.0 * delta {
            cands.push(d);
        }
    }
    let pos = rng.random_range(0..count);
    cands.insert(pos, close);
    (truth, cands, pos)
}

fn tournament_scenario(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let n = cfg.n.unwrap_or(20);
    let delta = cfg.delta.unwrap_or(0.1);
    let count = 50;
    let m = match cfg.samples {
        Some(m) => m as u64,
        None => tournament_sample_size(delta, count)?,
    };
    par_rows(cfg, |t, seed| {
        let (truth, cands, pos) = tournament_candidates(seed, n, delta, count);
        let tp = pbd_pmf(&truth);
        let s = SampleSet::new(
            sample_pbd(&truth, derive_seed(seed, SAMPLES, 0), m as usize),
            n,
        )?;
        match tournament(&cands, &s, delta) {
            Ok(w) => {
                let matrix = competition_matrix(&cands, &s, delta)?;
                let err = tv_distance(&cands[w], &tp);
                let form = if w == pos { "close" } else { "decoy" };
                let mut r = row(t, seed, err, 6.0 * delta, form.into(), m);
                r.violation = !never_loses(&matrix, w);
                r.success &= !r.violation;
                Ok(r)
            }
            Err(pbdlearn_core::Error::TournamentFailure) => {
                let mut r = row(t, seed, f64::NAN, 6.0 * delta, "failure".into(), m);
                r.success = false;
                Ok(r)
            }
            Err(e) => Err(e.into()),
        }
    })
}

pub fn tv_config(cfg: &ExperimentConfig) -> Result<TvLearnerConfig> {
    let mut c =
        TvLearnerConfig::new(cfg.epsilon.unwrap_or(0.1))?.with_k(cfg.k_override.unwrap_or(2));
    if let Some(tau) = cfg.tau {
        c = c.with_tau(tau)?;
    }
    if let Some(h) = cfg.h_threshold {
        c = c.with_h_threshold(h);
    }
    if let Some(cap) = cfg.sparse_ell_cap {
        c = c.with_sparse_ell_cap(cap);
    }
    Ok(c)
}

fn tv(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let n = cfg.n.unwrap_or(40);
    let learner = TvLearner::new(tv_config(cfg)?, n)?;
    let m = cfg
        .samples
        .ok_or_else(|| BenchError::Config("tv needs an explicit sample count".into()))?
        as u64;
    let slack = cfg.slack.unwrap_or(0.15);
    par_rows(cfg, |t, seed| {
        let p = mixed_target(t, seed, n);
        let tp = pbd_pmf(&p);
        let best = learner
            .cover()
            .pmfs()
            .iter()
            .map(|c| tv_distance(c, &tp))
            .fold(1.0, f64::min);
        let s = SampleSet::new(sample_pbd(&p, derive_seed(seed, SAMPLES, 0), m as usize), n)?;
        match learner.learn(&empirical_cdf(&s)) {
            Ok(h) => {
                let err = tv_distance(&cover_element_pmf(&h.element, n)?, &tp);
                let form = if h.element.is_sparse() {
                    "sparse"
                } else {
                    "heavy"
                };
                let mut r = row(t, seed, err, best + slack, form.into(), m);
                r.violation = h.statistic > h.threshold;
                Ok(r)
            }
            Err(pbdlearn_core::Error::NoAcceptingElement { .. }) => {
                let mut r = row(t, seed, f64::NAN, best + slack, "none".into(), m);
                r.success = false;
                Ok(r)
            }
            Err(e) => Err(e.into()),
        }
    })
}

fn kolmogorov(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let n = cfg.n.unwrap_or(40);
    let eps = cfg.epsilon.unwrap_or(0.25);
    let mut kc = KolmogorovConfig::new(eps)?;
    if let Some(k) = cfg.k_override {
        kc = kc.with_k(k);
    }
    let learner = KolmogorovLearner::new(kc, n)?;
    let m = match cfg.samples {
        Some(m) => m as u64,
        None => kolmogorov_sample_size(eps, STAGE_DELTA)?,
    };
    let bound = 0.75 * eps + dkw_accuracy(m, STAGE_DELTA)?;
    par_rows(cfg, |t, seed| {
        let p = mixed_target(t, seed, n);
        let tc = pbd_pmf(&p).to_cdf();
        let s = SampleSet::new(sample_pbd(&p, derive_seed(seed, SAMPLES, 0), m as usize), n)?;
        let e = empirical_cdf(&s);
        match learner.learn(&e) {
            Ok(h) => {
                let yc = cover_element_pmf(&h.element, n)?.to_cdf();
                let err = kolmogorov_distance(&yc, &tc);
                let form = if h.element.is_sparse() {
                    "sparse"
                } else {
                    "heavy"
                };
                let mut r = row(t, seed, err, bound, form.into(), m);
                // Replay the acceptance inequality against the empirical CDF.
                r.violation = kolmogorov_distance(&yc, &e.to_cdf()) > eps / 2.0;
                r.success &= !r.violation;
                Ok(r)
            }
            Err(pbdlearn_core::Error::NoAcceptingElement { .. }) => {
                let mut r = row(t, seed, f64::NAN, bound, "none".into(), m);
                r.success = false;
                Ok(r)
            }
            Err(e) => Err(e.into()),
        }
    })
}

/// Largest number of bits any draw may use under the stated budget.
pub fn histogram_bit_budget(intervals: usize, max_width: usize) -> u32 {
    let cl = |x: usize| {
        if x <= 1 {
            0
        } else {
            usize::BITS - (x - 1).leading_zeros()
        }
    };
    cl(intervals) + cl(max_width) + 16
}

fn unimodal(cfg: &ExperimentConfig, skewed: bool) -> Result<Vec<TrialRow>> {
    let n = cfg.n.unwrap_or(1000);
    let eps = cfg.epsilon.unwrap_or(0.2);
    let truth = if skewed {
        pbd_pmf(&skewed_pbd(n))
    } else {
        pbdlearn_core::dist::binomial_pmf(n, 0.5)?
    };
    let sampler = PmfSampler::new(&truth);
    let m = match cfg.samples {
        Some(m) => m as u64,
        None => unimodal_sample_size(n, eps)?,
    };
    let max_intervals = 50.0 * ((n + 1) as f64).log2() / eps;
    par_rows(cfg, |t, seed| {
        let s = SampleSet::new(sampler.sample(derive_seed(seed, SAMPLES, 0), m as usize), n)?;
        let h = learn_unimodal(&s, n, eps)?;
        let err = tv_distance(&h.pmf(), &truth);
        let mut r = row(
            t,
            seed,
            err,
            eps,
            format!("intervals={}", h.interval_count()),
            m,
        );
        let hs = HistogramSampler::new(&h);
        let budget = histogram_bit_budget(h.interval_count(), h.max_width());
        let mut src = pbdlearn_core::learner::BitSource::new(derive_seed(seed, SAMPLES, 1));
        let bits_ok = (0..1000).all(|_| hs.draw(&mut src).bits <= budget);
        r.violation = !bits_ok || h.interval_count() as f64 > max_intervals;
        r.success &= !r.violation;
        Ok(r)
    })
}

fn random_heavy(rng: &mut ChaCha8Rng, k: u32, n: usize) -> HeavyBinomialForm {
    loop {
        let ell = rng.random_range(1..=n);
        let j = rng.random_range(1..(k as u64 * n as u64));
        let ones = rng.random_range(0..=n - ell);
        if let Ok(f) = HeavyBinomialForm::new(k, n, ell, j, ones) {
            return f;
        }
    }
}

/// A valid heavy form with mean within 3 and shape close to `x`.
fn nearby_heavy(rng: &mut ChaCha8Rng, x: &HeavyBinomialForm) -> HeavyBinomialForm {
    let (k, n) = (x.k(), x.n());
    let kn = k as u64 * n as u64;
    loop {
        let ell = (x.ell() as i64 + rng.random_range(-20..=20)).clamp(1, n as i64) as usize;
        let ones =
            (x.ones() as i64 + rng.random_range(-20..=20)).clamp(0, (n - ell) as i64) as usize;
        let mean = x.ones() as f64 + x.ell() as f64 * x.q() + rng.random_range(-3.0..3.0);
        let q = (mean - ones as f64) / ell as f64;
        if !(q > 0.0 && q < 1.0) {
            continue;
        }
        let j = ((q * kn as f64).round() as u64).max(1);
        if let Ok(f) = HeavyBinomialForm::new(k, n, ell, j, ones) {
            return f;
        }
    }
}

/// Pairs of heavy forms at `n = 8 k^2`; half independent, half nearby.
fn gap(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let k = cfg.k_override.unwrap_or(2);
    let n = cfg.n.unwrap_or(8 * (k as usize) * (k as usize));
    let c = cfg.slack.unwrap_or(1.0);
    par_rows(cfg, |t, seed| {
        let mut rng = rng_for(seed, TARGET, 0);
        let x = random_heavy(&mut rng, k, n);
        let y = if t % 2 == 0 {
            nearby_heavy(&mut rng, &x)
        } else {
            random_heavy(&mut rng, k, n)
        };
        let g = kolmogorov_tv_gap_check(&x, &y, n)?;
        let mut r = row(t, seed, g.residual * k as f64, c, format!("k={k}"), 0);
        r.violation = !g.left_holds;
        r.success &= !r.violation;
        Ok(r)
    })
}

/// Trial `t` draws a pair in regime `t mod 3`: larger, equal, smaller rate
/// for the variable with the larger shift.
fn poisson(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    par_rows(cfg, |t, seed| {
        let mut rng = rng_for(seed, TARGET, 0);
        let m_hat = rng.random_range(0..50u64);
        let m = m_hat + rng.random_range(1..30u64);
        let lh = rng.random_range(0.2..80.0);
        let l = match t % 3 {
            0 => lh * rng.random_range(1.01..3.0),
            1 => lh,
            _ => lh * rng.random_range(0.2..0.99),
        };
        let r0 = shifted_poisson_pair_check(m, l, m_hat, lh)?;
        let form = format!("{:?}", r0.regime).to_lowercase();
        Ok(row(t, seed, r0.d_tv - 2.0 * r0.d_k, 1e-9, form, 0))
    })
}

fn hard_instance(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let k = cfg.n.unwrap_or(200);
    par_rows(cfg, |t, seed| {
        let inst = make_lower_bound_instance(k, seed)?;
        let d = weighted_pmf(&inst.to_weighted_pbd()?)?;
        let p = 100.0 / k as f64;
        let s = inst.support.len() as f64;
        let at_s = p * (1.0 - p).powf(s - 1.0);
        let mut err = (d.mass_at(0.0) - (1.0 - p).powf(s)).abs();
        for j in k / 2 + 1..=k {
            let expect = if inst.support.contains(&j) { at_s } else { 0.0 };
            err = err.max((d.mass_at(j as f64) - expect).abs());
        }
        Ok(row(
            t,
            seed,
            err,
            1e-12,
            format!("support={}", inst.support.len()),
            0,
        ))
    })
}

pub fn weighted_config(cfg: &ExperimentConfig) -> Result<WeightedLearnConfig> {
    let mut c =
        WeightedLearnConfig::new(cfg.epsilon.unwrap_or(0.05))?.with_k(cfg.k_override.unwrap_or(2));
    if let Some(cap) = cfg.sparse_ell_cap {
        c = c.with_sparse_ell_cap(cap);
    }
    if let Some(d) = cfg.delta {
        c = c.with_tournament_delta(d);
    }
    Ok(c)
}

/// Weights (1, 3), ten indicators each, uniform random means.
fn weighted(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let per = cfg.n.unwrap_or(10);
    let wcfg = weighted_config(cfg)?;
    let weights = Weights::Integer(vec![1, 3]);
    let product = ProductCover::new(&weights, &[per, per], &wcfg)?;
    let m = match cfg.samples {
        Some(m) => m as u64,
        None => tournament_sample_size(wcfg.tournament_delta(), product.len())?,
    };
    let slack = cfg.slack.unwrap_or(0.1);
    par_rows(cfg, |t, seed| {
        let mut rng = rng_for(seed, TARGET, 0);
        let groups = (0..2)
            .map(|_| ProbVector::new((0..per).map(|_| rng.random()).collect()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let truth = weighted_pmf(&WeightedPbd::new(weights.clone(), groups)?)?;
        let best = product
            .pmfs()
            .iter()
            .map(|q| tv_distance(q, &truth.pmf))
            .fold(1.0, f64::min);
        let s = SampleSet::new(
            truth.sample(derive_seed(seed, SAMPLES, 0), m as usize),
            truth.range.len() - 1,
        )?;
        match learn_weighted_on(&product, &weights, &s, &wcfg) {
            Ok(h) => {
                let err = tv_distance(&h.pmf, &truth.pmf);
                Ok(row(
                    t,
                    seed,
                    err,
                    best + slack,
                    format!("index={}", h.product_index),
                    m,
                ))
            }
            Err(pbdlearn_core::Error::TournamentFailure) => {
                let mut r = row(t, seed, f64::NAN, best + slack, "failure".into(), m);
                r.success = false;
                Ok(r)
            }
            Err(e) => Err(e.into()),
        }
    })
}
