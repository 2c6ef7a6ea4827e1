use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use pbdlearn::bench::{self, ExperimentConfig};
use pbdlearn::formats::{
    format_samples, parse_samples, parse_values, read_json, read_text, sha256_hex,
    weights_from_f64, write_json, write_text, CandidatesFile, CoverFile, DistSpec,
    HardInstanceFile, HypothesisFile, HypothesisForm, Resolved, SampleMeta,
};
use pbdlearn_core::cover::{build_cover, CoverConfig};
use pbdlearn_core::dist::{kolmogorov_distance, tv_distance, Pmf, ProbVector};
use pbdlearn_core::empirical::{
    dkw_sample_size, dkw_sample_size_classical, empirical_cdf, SampleSet,
};
use pbdlearn_core::learner::{
    kolmogorov_sample_size, learn_unimodal, unimodal_sample_size, KolmogorovConfig,
    KolmogorovLearner, TvLearner, TvLearnerConfig, STAGE_DELTA,
};
use pbdlearn_core::sampling::{sample_pbd, PmfSampler};
use pbdlearn_core::selection::{tournament, tournament_sample_size};
use pbdlearn_core::weighted::{
    learn_weighted, make_lower_bound_instance, RangeValues, WeightedLearnConfig,
};
use serde::Serialize;

const THREADS_ENV: &str = "PBDLEARN_THREADS";

const EXIT_DATA: u8 = 3;
const EXIT_NOT_CERTIFIED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pbdlearn",
    version,
    about = "Learn sums of independent indicators from samples"
)]
struct Cli {
    /// Worker threads for parallel stages
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw samples from a distribution spec
    Sample {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a hypothesis from a sample file
    #[command(subcommand)]
    Learn(LearnCmd),
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Run a tournament over candidate distributions
    Select {
        /// Cover JSON or {"candidates":[spec, ..]}
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    #[command(subcommand)]
    Weighted(WeightedCmd),
    /// Exact distances between a hypothesis and a truth spec
    Eval {
        #[arg(long)]
        hypothesis: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo scenario and write CSV
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        /// Overrides the config's output path; `-` writes to stdout
        #[arg(long)]
        out: Option<String>,
        /// Record wall time per trial (rows then differ between runs)
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    k: Option<u32>,
    /// Cap on nontrivial indicators in sparse forms (voids certification)
    #[arg(long)]
    cap_ell: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum LearnCmd {
    Tv {
        #[command(flatten)]
        common: LearnArgs,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long)]
        delta_threshold: Option<f64>,
        #[arg(long)]
        h_threshold: Option<f64>,
    },
    Kolmogorov {
        #[command(flatten)]
        common: LearnArgs,
    },
    Unimodal {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Enumerate a cover and write it as JSON
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        cap_ell: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the counts and certification of a cover file
    Stats {
        #[arg(long)]
        cover: PathBuf,
    },
}

#[derive(Subcommand)]
enum WeightedCmd {
    Learn {
        /// Comma-separated distinct weights
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
        /// Comma-separated indicator count per weight
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        cap_ell: Option<usize>,
        /// Tournament accuracy; defaults to epsilon
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a lower-bound instance
    HardInstance {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Successful runs that still report whether the guarantee applies.
enum Outcome {
    Done,
    NotCertified,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    }
    match run(cli.cmd) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotCertified) => {
            eprintln!("warning: guarantee not certified for this configuration");
            ExitCode::from(EXIT_NOT_CERTIFIED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn run(cmd: Cmd) -> anyhow::Result<Outcome> {
    match cmd {
        Cmd::Sample {
            spec,
            count,
            seed,
            out,
        } => cmd_sample(&spec, count, seed, &out),
        Cmd::Learn(l) => cmd_learn(l),
        Cmd::Cover(CoverCmd::Build {
            n,
            epsilon,
            k,
            cap_ell,
            out,
        }) => {
            let mut cfg = CoverConfig::new(epsilon, n)?;
            if let Some(k) = k {
                cfg = cfg.with_k(k)?;
            }
            if let Some(cap) = cap_ell {
                cfg = cfg.with_sparse_ell_cap(cap);
            }
            let c = build_cover(&cfg)?;
            let file = CoverFile::from_cover(&c);
            write_json(&out, &file)?;
            eprintln!(
                "cover: k = {}, {} elements, certified = {}",
                file.k,
                c.len(),
                file.certified
            );
            Ok(certified(file.certified))
        }
        Cmd::Cover(CoverCmd::Stats { cover }) => {
            let file: CoverFile = read_json(&cover)?;
            let stats = serde_json::json!({
                "k": file.k,
                "n": file.n,
                "certified": file.certified,
                "elements": file.elements.len(),
                "counts": file.counts,
            });
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(Outcome::Done)
        }
        Cmd::Select {
            candidates,
            samples,
            delta,
            out,
        } => cmd_select(&candidates, &samples, delta, &out),
        Cmd::Weighted(w) => cmd_weighted(w),
        Cmd::Eval {
            hypothesis,
            truth,
            out,
        } => cmd_eval(&hypothesis, &truth, out.as_deref()),
        Cmd::Bench {
            config,
            trials,
            base_seed,
            out,
            timing,
        } => {
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = base_seed {
                cfg.base_seed = s;
            }
            cfg.timing |= timing;
            if out.is_some() {
                cfg.output = out;
            }
            let report = bench::run(&cfg)?;
            let csv = report.to_csv();
            match cfg.output.as_deref() {
                None | Some("-") => print!("{csv}"),
                Some(path) => write_text(Path::new(path), &csv)?,
            }
            let s = &report.summary;
            eprintln!(
                "{}: {}/{} succeeded ({:.3}), {} violations, max error {}, max excess {}",
                s.scenario,
                s.successes,
                s.trials,
                s.fraction,
                s.violations,
                s.max_error,
                s.max_excess
            );
            Ok(Outcome::Done)
        }
    }
}

fn certified(c: bool) -> Outcome {
    if c {
        Outcome::Done
    } else {
        Outcome::NotCertified
    }
}

fn cmd_sample(spec_path: &Path, count: usize, seed: u64, out: &Path) -> anyhow::Result<Outcome> {
    let raw = read_text(spec_path)?;
    let spec: DistSpec = serde_json::from_str(&raw)
        .with_context(|| format!("{}: invalid spec", spec_path.display()))?;
    let text = match &spec {
        // Indicator-level sampling, independent of the PMF computation.
        DistSpec::Pbd { probs } => {
            format_samples(&sample_pbd(&ProbVector::new(probs.clone())?, seed, count))
        }
        _ => match spec.resolve()? {
            Resolved::Plain(p) => format_samples(&PmfSampler::new(&p).sample(seed, count)),
            Resolved::Weighted(w) => {
                let idx = w.sample(seed, count);
                match w.range.values() {
                    RangeValues::Integer(v) => {
                        format_samples(&idx.iter().map(|&i| v[i as usize]).collect::<Vec<_>>())
                    }
                    RangeValues::Real(v) => {
                        format_samples(&idx.iter().map(|&i| v[i as usize]).collect::<Vec<_>>())
                    }
                }
            }
        },
    };
    write_text(out, &text)?;
    let meta = SampleMeta {
        spec_sha256: sha256_hex(raw.as_bytes()),
        seed,
        count,
    };
    write_json(&sidecar(out), &meta)?;
    Ok(Outcome::Done)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn load_samples(path: &Path, n: usize) -> anyhow::Result<SampleSet> {
    let values = parse_samples(&path.display().to_string(), &read_text(path)?)?;
    Ok(SampleSet::new(values, n)?)
}

fn report_sizing(label: &str, learner_sizing: u64, eps: f64, have: usize) {
    let dkw = dkw_sample_size(eps, STAGE_DELTA)
        .map(|v| v.to_string())
        .unwrap_or_else(|_| "n/a".into());
    let classical = dkw_sample_size_classical(eps, STAGE_DELTA)
        .map(|v| v.to_string())
        .unwrap_or_else(|_| "n/a".into());
    eprintln!(
        "{label}: recommended samples {learner_sizing}; DKW at accuracy {eps:.3e}: {dkw}, classical DKW: {classical}; have {have}"
    );
}

fn cmd_learn(cmd: LearnCmd) -> anyhow::Result<Outcome> {
    match cmd {
        LearnCmd::Tv {
            common,
            tau,
            delta_threshold,
            h_threshold,
        } => {
            let mut cfg = TvLearnerConfig::new(common.epsilon)?.with_tau(tau)?;
            if let Some(k) = common.k {
                cfg = cfg.with_k(k);
            }
            if let Some(cap) = common.cap_ell {
                cfg = cfg.with_sparse_ell_cap(cap);
            }
            if let Some(t) = delta_threshold {
                cfg = cfg.with_delta_threshold(t);
            }
            if let Some(t) = h_threshold {
                cfg = cfg.with_h_threshold(t);
            }
            let s = load_samples(&common.samples, common.n)?;
            let needed = cfg.sample_size().unwrap_or(u64::MAX);
            report_sizing("tv", needed, cfg.cdf_accuracy(), s.len());
            let learner = TvLearner::new(cfg, common.n)?;
            let h = learner.learn(&empirical_cdf(&s))?;
            let file = HypothesisFile {
                form: HypothesisForm::from_element(&h.element),
                n: common.n,
                certified: h.certified,
                statistic: Some(h.statistic),
            };
            write_json(&common.out, &file)?;
            Ok(certified(h.certified))
        }
        LearnCmd::Kolmogorov { common } => {
            let mut cfg = KolmogorovConfig::new(common.epsilon)?;
            if let Some(k) = common.k {
                cfg = cfg.with_k(k);
            }
            if let Some(cap) = common.cap_ell {
                cfg = cfg.with_sparse_ell_cap(cap);
            }
            let s = load_samples(&common.samples, common.n)?;
            let needed = kolmogorov_sample_size(common.epsilon, STAGE_DELTA)?;
            report_sizing("kolmogorov", needed, common.epsilon / 4.0, s.len());
            let learner = KolmogorovLearner::new(cfg, common.n)?;
            let h = learner.learn(&empirical_cdf(&s))?;
            let file = HypothesisFile {
                form: HypothesisForm::from_element(&h.element),
                n: common.n,
                certified: h.certified,
                statistic: Some(h.statistic),
            };
            write_json(&common.out, &file)?;
            Ok(certified(h.certified))
        }
        LearnCmd::Unimodal {
            samples,
            n,
            epsilon,
            out,
        } => {
            let s = load_samples(&samples, n)?;
            let needed = unimodal_sample_size(n, epsilon)?;
            report_sizing("unimodal", needed, epsilon * epsilon / 100.0, s.len());
            let h = learn_unimodal(&s, n, epsilon)?;
            let file = HypothesisFile {
                form: HypothesisForm::from_histogram(&h),
                n,
                certified: true,
                statistic: None,
            };
            write_json(&out, &file)?;
            Ok(Outcome::Done)
        }
    }
}

/// Pads every candidate to the largest domain.
fn candidate_pmfs(path: &Path) -> anyhow::Result<(Vec<Pmf>, Vec<serde_json::Value>)> {
    let value: serde_json::Value = read_json(path)?;
    let (pmfs, labels): (Vec<Pmf>, Vec<serde_json::Value>) = if value.get("elements").is_some() {
        let cover: CoverFile = serde_json::from_value(value)?;
        let pmfs = cover
            .elements
            .iter()
            .map(|e| e.pmf(cover.n))
            .collect::<Result<Vec<_>, _>>()?;
        (
            pmfs,
            cover
                .elements
                .iter()
                .map(|e| serde_json::to_value(e).unwrap())
                .collect(),
        )
    } else {
        let file: CandidatesFile = serde_json::from_value(value)?;
        let mut pmfs = Vec::new();
        for c in &file.candidates {
            match c.resolve()? {
                Resolved::Plain(p) => pmfs.push(p),
                Resolved::Weighted(_) => {
                    bail!("weighted candidates are selected with `weighted learn`")
                }
            }
        }
        (
            pmfs,
            file.candidates
                .iter()
                .map(|c| serde_json::to_value(c).unwrap())
                .collect(),
        )
    };
    if pmfs.is_empty() {
        bail!("{}: no candidates", path.display());
    }
    let top = pmfs.iter().map(Pmf::domain_max).max().unwrap();
    Ok((pmfs.into_iter().map(|p| p.padded(top)).collect(), labels))
}

#[derive(Serialize)]
struct Selection {
    index: usize,
    candidate: serde_json::Value,
    delta: f64,
    guarantee: f64,
    candidates: usize,
    samples: usize,
    recommended_samples: u64,
}

fn cmd_select(
    candidates: &Path,
    samples: &Path,
    delta: f64,
    out: &Path,
) -> anyhow::Result<Outcome> {
    let (pmfs, labels) = candidate_pmfs(candidates)?;
    let s = load_samples(samples, pmfs[0].domain_max())?;
    let winner = tournament(&pmfs, &s, delta)?;
    let sel = Selection {
        index: winner,
        candidate: labels[winner].clone(),
        delta,
        guarantee: 6.0 * delta,
        candidates: pmfs.len(),
        samples: s.len(),
        recommended_samples: tournament_sample_size(delta, pmfs.len())?,
    };
    write_json(out, &sel)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct WeightedOutput {
    weights: Vec<f64>,
    counts: Vec<usize>,
    groups: Vec<Vec<f64>>,
    elements: Vec<HypothesisForm>,
    product_index: usize,
    product_size: usize,
    delta: f64,
    guarantee: f64,
    certified: bool,
    samples: usize,
    recommended_samples: u64,
}

fn cmd_weighted(cmd: WeightedCmd) -> anyhow::Result<Outcome> {
    match cmd {
        WeightedCmd::Learn {
            weights,
            counts,
            samples,
            epsilon,
            k,
            cap_ell,
            delta,
            out,
        } => {
            if weights.len() != counts.len() {
                bail!("--weights and --counts must have the same length");
            }
            let w = weights_from_f64(&weights);
            let mut cfg = WeightedLearnConfig::new(epsilon)?;
            if let Some(k) = k {
                cfg = cfg.with_k(k);
            }
            if let Some(cap) = cap_ell {
                cfg = cfg.with_sparse_ell_cap(cap);
            }
            if let Some(d) = delta {
                cfg = cfg.with_tournament_delta(d);
            }
            let raw = parse_values(&samples.display().to_string(), &read_text(&samples)?)?;
            let layout = pbdlearn_core::weighted::WeightedLayout::new(
                &w,
                &counts,
                pbdlearn_core::weighted::DEFAULT_RANGE_WORK_CAP,
            )?;
            let s = layout.range().to_samples(&raw)?;
            let h = learn_weighted(&s, &w, &counts, &cfg)?;
            let o = WeightedOutput {
                weights,
                counts: counts.clone(),
                groups: h.pbd.groups().iter().map(|g| g.probs().to_vec()).collect(),
                elements: h
                    .elements
                    .iter()
                    .map(HypothesisForm::from_element)
                    .collect(),
                product_index: h.product_index,
                product_size: h.product_size,
                delta: cfg.tournament_delta(),
                guarantee: 6.0 * cfg.tournament_delta(),
                certified: h.certified,
                samples: s.len(),
                recommended_samples: tournament_sample_size(
                    cfg.tournament_delta(),
                    h.product_size,
                )?,
            };
            match out {
                Some(p) => write_json(&p, &o)?,
                None => println!("{}", serde_json::to_string_pretty(&o)?),
            }
            Ok(certified(h.certified))
        }
        WeightedCmd::HardInstance { k, seed, out } => {
            let inst = make_lower_bound_instance(k, seed)?;
            let file = HardInstanceFile {
                k,
                seed,
                support: inst.support.clone(),
                probs: inst.probs.probs().to_vec(),
                weights: inst.weights.clone(),
                mass_at_zero: inst.mass_at_zero(),
            };
            write_json(&out, &file)?;
            Ok(Outcome::Done)
        }
    }
}

#[derive(Serialize)]
struct EvalReport {
    d_tv: f64,
    d_k: f64,
    certified: bool,
    n: usize,
    wall_time_ms: f64,
}

fn cmd_eval(hypothesis: &Path, truth: &Path, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let h: HypothesisFile = read_json(hypothesis)?;
    let spec: DistSpec = read_json(truth)?;
    let t = match spec.resolve()? {
        Resolved::Plain(p) => p,
        Resolved::Weighted(_) => {
            bail!("weighted truths are evaluated on range positions; use a pmf spec")
        }
    };
    if t.domain_max() != h.n {
        return Err(anyhow!(
            "domain mismatch: hypothesis n = {}, truth n = {}",
            h.n,
            t.domain_max()
        ));
    }
    let hp = h.form.pmf(h.n)?;
    let report = EvalReport {
        d_tv: tv_distance(&hp, &t),
        d_k: kolmogorov_distance(&hp.to_cdf(), &t.to_cdf()),
        certified: h.certified,
        n: h.n,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let text = serde_json::to_string_pretty(&report)?;
    match out {
        Some(p) => write_text(p, &(text + "\n"))?,
        None => println!("{text}"),
    }
    Ok(Outcome::Done)
}
