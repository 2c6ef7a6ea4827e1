//! Proper learners over the cover, and the unimodal histogram learner.

mod gap;
mod kolmogorov;
mod tv;
mod unimodal;

pub use gap::{
    binomial_tp_distance, kolmogorov_tv_gap_check, shifted_poisson_pair_check, GapReport,
    PoissonPairReport, RateRegime,
};
pub use kolmogorov::{
    kolmogorov_sample_size, learn_kolmogorov, KolmogorovConfig, KolmogorovHypothesis,
    KolmogorovLearner,
};
pub use tv::{
    delta_statistic, delta_test, h_statistic, h_test, learn_tv, TvHypothesis, TvLearner,
    TvLearnerConfig,
};
pub use unimodal::{
    histogram_sample, learn_unimodal, unimodal_sample_size, BitSource, HistogramDraw,
    HistogramHypothesis, HistogramSampler,
};

/// Failure budget of each internal DKW estimate; two stages keep the whole
/// learner within probability 1/10 of failure.
pub const STAGE_DELTA: f64 = 1.0 / 20.0;
