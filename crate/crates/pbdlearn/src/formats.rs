//! JSON and text file formats.
//!
//! * distribution specs: `{"type":"pbd","probs":[..]}`, `{"type":"binomial","n":..,"q":..}`,
//!   `{"type":"pmf","mass":[..]}`, `{"type":"weighted","weights":[..],"groups":[[..],..]}`
//! * sample files: one integer (or weighted output value) per line, `#` comments
//! * hypotheses: `{"form":"sparse"|"heavy_binomial"|"histogram",..,"certified":..,"statistic":..}`

use std::fmt::Write as _;
use std::path::Path;

use pbdlearn_core::cover::{cover_element_pmf, Cover, CoverElement, HeavyBinomialForm, SparseForm};
use pbdlearn_core::dist::{binomial_pmf, pbd_pmf, Pmf, ProbVector};
use pbdlearn_core::learner::HistogramHypothesis;
use pbdlearn_core::weighted::{weighted_pmf, WeightedDistribution, WeightedPbd, Weights};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Line {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Core(#[from] pbdlearn_core::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, FormatError>;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistSpec {
    Pbd {
        probs: Vec<f64>,
    },
    Binomial {
        n: usize,
        q: f64,
    },
    Pmf {
        mass: Vec<f64>,
    },
    /// One Bernoulli-mean group per weight. Integral weights use exact
    /// integer arithmetic.
    Weighted {
        weights: Vec<f64>,
        groups: Vec<Vec<f64>>,
    },
}

/// A distribution over `{0, ..., n}` or, for weighted specs, over the
/// positions of the attainable range.
pub enum Resolved {
    Plain(Pmf),
    Weighted(WeightedDistribution),
}

impl Resolved {
    pub fn pmf(&self) -> &Pmf {
        match self {
            Resolved::Plain(p) => p,
            Resolved::Weighted(w) => &w.pmf,
        }
    }
}

pub fn weights_from_f64(w: &[f64]) -> Weights {
    if w.iter().all(|x| x.fract() == 0.0 && x.abs() < 9.0e15) {
        Weights::Integer(w.iter().map(|&x| x as i64).collect())
    } else {
        Weights::Real(w.to_vec())
    }
}

impl DistSpec {
    pub fn resolve(&self) -> Result<Resolved> {
        Ok(match self {
            DistSpec::Pbd { probs } => Resolved::Plain(pbd_pmf(&ProbVector::new(probs.clone())?)),
            DistSpec::Binomial { n, q } => Resolved::Plain(binomial_pmf(*n, *q)?),
            DistSpec::Pmf { mass } => Resolved::Plain(Pmf::new(mass.clone())?),
            DistSpec::Weighted { .. } => Resolved::Weighted(weighted_pmf(&self.weighted_pbd()?)?),
        })
    }

    pub fn weighted_pbd(&self) -> Result<WeightedPbd> {
        match self {
            DistSpec::Weighted { weights, groups } => {
                let groups = groups
                    .iter()
                    .map(|g| ProbVector::new(g.clone()))
                    .collect::<std::result::Result<_, _>>()?;
                Ok(WeightedPbd::new(weights_from_f64(weights), groups)?)
            }
            _ => Err(FormatError::Invalid("not a weighted spec".into())),
        }
    }
}

/// Parses a sample file. Blank lines and lines starting with `#` are skipped.
pub fn parse_samples(path: &str, text: &str) -> Result<Vec<u64>> {
    parse_lines(path, text, |tok| {
        tok.parse::<u64>().map_err(|e| e.to_string())
    })
}

/// Weighted sample files hold output values, which may be real.
pub fn parse_values(path: &str, text: &str) -> Result<Vec<f64>> {
    parse_lines(path, text, |tok| match tok.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err("non-finite value".into()),
        Err(e) => Err(e.to_string()),
    })
}

fn parse_lines<T>(
    path: &str,
    text: &str,
    parse: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = parse(line).map_err(|msg| FormatError::Line {
            path: path.to_string(),
            line: i + 1,
            msg: format!("{msg}: {line:?}"),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(FormatError::Invalid(format!("{path}: no samples")));
    }
    Ok(out)
}

pub fn format_samples<T: std::fmt::Display>(values: &[T]) -> String {
    let mut s = String::with_capacity(values.len() * 4);
    for v in values {
        writeln!(s, "{v}").unwrap();
    }
    s
}

/// Sidecar written next to a sample file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub spec_sha256: String,
    pub seed: u64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum HypothesisForm {
    Sparse {
        ell: usize,
        probs: Vec<f64>,
        ones: usize,
    },
    HeavyBinomial {
        ell: usize,
        q: f64,
        ones: usize,
    },
    Histogram {
        boundaries: Vec<usize>,
        masses: Vec<f64>,
        counts: Vec<u64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFile {
    #[serde(flatten)]
    pub form: HypothesisForm,
    pub n: usize,
    pub certified: bool,
    pub statistic: Option<f64>,
}

impl HypothesisForm {
    pub fn from_element(e: &CoverElement) -> Self {
        match e {
            CoverElement::Sparse(s) => HypothesisForm::Sparse {
                ell: s.ell(),
                probs: s.probs(),
                ones: s.ones(),
            },
            CoverElement::Heavy(h) => HypothesisForm::HeavyBinomial {
                ell: h.ell(),
                q: h.q(),
                ones: h.ones(),
            },
        }
    }

    pub fn from_histogram(h: &HistogramHypothesis) -> Self {
        HypothesisForm::Histogram {
            boundaries: h.boundaries().to_vec(),
            masses: h.masses(),
            counts: h.counts().to_vec(),
        }
    }

    /// PMF over `{0, ..., n}`.
    pub fn pmf(&self, n: usize) -> Result<Pmf> {
        match self {
            HypothesisForm::Sparse { probs, ones, .. } => {
                let mut p = vec![1.0; *ones];
                p.extend(probs);
                p.resize(n.max(p.len()), 0.0);
                if p.len() > n {
                    return Err(FormatError::Invalid(format!(
                        "hypothesis needs {} indicators, n = {n}",
                        p.len()
                    )));
                }
                Ok(pbd_pmf(&ProbVector::new(p)?))
            }
            HypothesisForm::HeavyBinomial { ell, q, ones } => {
                if ell + ones > n {
                    return Err(FormatError::Invalid(format!(
                        "hypothesis needs {} indicators, n = {n}",
                        ell + ones
                    )));
                }
                Ok(binomial_pmf(*ell, *q)?.shifted(*ones, n)?)
            }
            HypothesisForm::Histogram {
                boundaries, counts, ..
            } => {
                let h = HistogramHypothesis::new(boundaries.clone(), counts.clone())?;
                if h.domain_max() != n {
                    return Err(FormatError::Invalid(format!(
                        "histogram covers 0..={}, n = {n}",
                        h.domain_max()
                    )));
                }
                Ok(h.pmf())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCountsJson {
    pub sparse_enumerated: usize,
    pub heavy_enumerated: usize,
    pub sparse_kept: usize,
    pub heavy_kept: usize,
    pub duplicates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverFile {
    pub k: u32,
    pub n: usize,
    pub certified: bool,
    pub counts: CoverCountsJson,
    pub elements: Vec<HypothesisForm>,
}

impl CoverFile {
    pub fn from_cover(c: &Cover) -> Self {
        let counts = c.counts();
        CoverFile {
            k: c.k(),
            n: c.n(),
            certified: c.certified(),
            counts: CoverCountsJson {
                sparse_enumerated: counts.sparse_enumerated,
                heavy_enumerated: counts.heavy_enumerated,
                sparse_kept: counts.sparse_kept,
                heavy_kept: counts.heavy_kept,
                duplicates: counts.duplicates(),
            },
            elements: c
                .elements()
                .iter()
                .map(HypothesisForm::from_element)
                .collect(),
        }
    }
}

/// Rebuilds a cover element from its JSON form (grid values are recovered
/// by rounding).
pub fn element_from_form(form: &HypothesisForm, k: u32, n: usize) -> Result<CoverElement> {
    match form {
        HypothesisForm::Sparse { probs, ones, .. } => {
            let k2 = (k as f64) * (k as f64);
            let nums = probs.iter().map(|p| (p * k2).round() as u32).collect();
            Ok(CoverElement::Sparse(SparseForm::new(k, nums, *ones)?))
        }
        HypothesisForm::HeavyBinomial { ell, q, ones } => {
            let j = (q * k as f64 * n as f64).round() as u64;
            Ok(CoverElement::Heavy(HeavyBinomialForm::new(
                k, n, *ell, j, *ones,
            )?))
        }
        HypothesisForm::Histogram { .. } => Err(FormatError::Invalid(
            "histograms are not cover elements".into(),
        )),
    }
}

pub fn element_pmf(e: &CoverElement, n: usize) -> Result<Pmf> {
    Ok(cover_element_pmf(e, n)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatesFile {
    pub candidates: Vec<DistSpec>,
}

/// `{"k":..,"support":[..],"probs":[..],"weights":[..]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceFile {
    pub k: usize,
    pub seed: u64,
    pub support: Vec<usize>,
    pub probs: Vec<f64>,
    pub weights: Vec<i64>,
    pub mass_at_zero: f64,
}
