//! Weight profiles, dimension scores, total score, retuning, and ranking.
//!
//! `d_i = Σ_j m_ij · α_ij` and `T = Σ_i d_i · β_i`, in exact rationals.
//! Not-applicable metrics are dropped and the remaining α renormalized; a
//! dimension whose positively weighted metrics are all not applicable is
//! itself dropped and β renormalized. Strict mode refuses instead.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{self, DimensionSpec, CATALOG_VERSION};
use crate::metrics::MetricScore;
use crate::rational::Rational;

pub type Weights = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub profile_id: String,
    pub use_case_id: String,
    /// Missing dimensions weigh 0.
    pub beta: Weights,
    /// Per dimension, per metric. Missing metrics weigh 0.
    #[serde(default)]
    pub alpha: BTreeMap<String, Weights>,
    pub catalog_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    CatalogVersion { expected: String, found: String },
    UnknownDimension { dimension_id: String },
    UnknownMetric { dimension_id: String, metric_id: String },
    OutOfRange { key: String, value: Rational },
    BetaSum { sum: Rational },
    AlphaSum { dimension_id: String, sum: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CatalogVersion { expected, found } => {
                write!(f, "catalog version {found:?} does not match {expected:?}")
            }
            Violation::UnknownDimension { dimension_id } => write!(f, "unknown dimension {dimension_id:?}"),
            Violation::UnknownMetric { dimension_id, metric_id } => {
                write!(f, "metric {metric_id:?} does not belong to dimension {dimension_id:?}")
            }
            Violation::OutOfRange { key, value } => write!(f, "weight {key} = {value} is outside [0, 1]"),
            Violation::BetaSum { sum } => write!(f, "beta sum {sum} ≠ 1"),
            Violation::AlphaSum { dimension_id, sum } => {
                write!(f, "alpha sum {sum} ≠ 1 for {}", catalog::dimension_name(dimension_id))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregationError {
    #[error("invalid weight profile: {}", join(.0))]
    InvalidProfile(Vec<Violation>),
    #[error("no score for positively weighted metric {0:?}")]
    MissingScore(String),
    #[error("metric {0:?} is not applicable and strict mode forbids exclusion")]
    StrictNotApplicable(String),
    #[error("every positively weighted dimension is not applicable")]
    AllNotApplicable,
    #[error("catalog version mismatch: scores use {scores:?}, profile uses {profile:?}")]
    CatalogMismatch { scores: String, profile: String },
    #[error("ranking mixes {0}")]
    MixedRanking(&'static str),
    #[error("cannot normalize: weights are empty or all zero")]
    ZeroWeights,
    #[error("negative weight for {0:?}")]
    NegativeWeight(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().sum()
}

impl WeightProfile {
    /// β = 1/20 everywhere, α uniform within each dimension.
    pub fn uniform(profile_id: impl Into<String>, use_case_id: impl Into<String>) -> Self {
        let dims = catalog::catalog();
        WeightProfile {
            profile_id: profile_id.into(),
            use_case_id: use_case_id.into(),
            beta: dims
                .iter()
                .map(|d| (d.dimension_id.clone(), Rational::ratio(1, dims.len())))
                .collect(),
            alpha: dims.iter().map(|d| (d.dimension_id.clone(), uniform_alpha(d))).collect(),
            catalog_version: CATALOG_VERSION.to_string(),
        }
    }

    pub fn beta_of(&self, dimension_id: &str) -> Rational {
        self.beta.get(dimension_id).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn alpha_of(&self, dimension_id: &str, metric_id: &str) -> Rational {
        self.alpha
            .get(dimension_id)
            .and_then(|a| a.get(metric_id))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Positively weighted metrics: α > 0 inside a dimension with β > 0.
    pub fn weighted_metrics(&self) -> Vec<String> {
        catalog::catalog()
            .iter()
            .filter(|d| self.beta_of(&d.dimension_id).is_positive())
            .flat_map(|d| {
                d.metrics
                    .iter()
                    .filter(|m| self.alpha_of(&d.dimension_id, &m.metric_id).is_positive())
                    .map(|m| m.metric_id.clone())
            })
            .collect()
    }
}

pub fn uniform_alpha(d: &DimensionSpec) -> Weights {
    d.metrics
        .iter()
        .map(|m| (m.metric_id.clone(), Rational::ratio(1, d.metrics.len())))
        .collect()
}

/// All violations, in a deterministic order. Empty means valid.
pub fn profile_violations(p: &WeightProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.catalog_version != CATALOG_VERSION {
        out.push(Violation::CatalogVersion {
            expected: CATALOG_VERSION.to_string(),
            found: p.catalog_version.clone(),
        });
    }
    for (dim, value) in &p.beta {
        if catalog::resolve_dimension(dim).is_err() {
            out.push(Violation::UnknownDimension { dimension_id: dim.clone() });
        }
        if !value.is_unit_interval() {
            out.push(Violation::OutOfRange {
                key: format!("beta[{dim}]"),
                value: value.clone(),
            });
        }
    }
    for (dim, weights) in &p.alpha {
        let spec = match catalog::resolve_dimension(dim) {
            Ok(spec) => Some(spec),
            Err(_) => {
                if !p.beta.contains_key(dim) {
                    out.push(Violation::UnknownDimension { dimension_id: dim.clone() });
                }
                None
            }
        };
        for (metric, value) in weights {
            if let Some(spec) = spec {
                if !spec.metrics.iter().any(|m| &m.metric_id == metric) {
                    out.push(Violation::UnknownMetric {
                        dimension_id: dim.clone(),
                        metric_id: metric.clone(),
                    });
                }
            }
            if !value.is_unit_interval() {
                out.push(Violation::OutOfRange {
                    key: format!("alpha[{dim}][{metric}]"),
                    value: value.clone(),
                });
            }
        }
    }
    let beta_sum = sum(p.beta.values());
    if beta_sum != Rational::one() {
        out.push(Violation::BetaSum { sum: beta_sum });
    }
    for d in catalog::catalog() {
        if !p.beta_of(&d.dimension_id).is_positive() {
            continue;
        }
        let alpha_sum = p.alpha.get(&d.dimension_id).map(|a| sum(a.values())).unwrap_or_else(Rational::zero);
        if alpha_sum != Rational::one() {
            out.push(Violation::AlphaSum {
                dimension_id: d.dimension_id.clone(),
                sum: alpha_sum,
            });
        }
    }
    out
}

pub fn validate_profile(p: &WeightProfile) -> Result<(), Vec<Violation>> {
    let v = profile_violations(p);
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// `raw / Σ raw` for every entry.
pub fn normalize_weights(raw: &Weights) -> Result<Weights, AggregationError> {
    if let Some((k, _)) = raw.iter().find(|(_, v)| v.is_negative()) {
        return Err(AggregationError::NegativeWeight(k.clone()));
    }
    let total = sum(raw.values());
    if !total.is_positive() {
        return Err(AggregationError::ZeroWeights);
    }
    Ok(raw.iter().map(|(k, v)| (k.clone(), v / &total)).collect())
}

/// Unnormalized importances, as a user would enter them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawWeights {
    pub beta: Weights,
    #[serde(default)]
    pub alpha: BTreeMap<String, Weights>,
}

impl RawWeights {
    /// Normalize β over dimensions and α within each positively weighted
    /// dimension. A dimension with β > 0 and no α entry gets uniform α.
    pub fn normalize(
        &self,
        profile_id: impl Into<String>,
        use_case_id: impl Into<String>,
    ) -> Result<WeightProfile, AggregationError> {
        let beta = normalize_weights(&self.beta)?;
        let mut alpha = BTreeMap::new();
        for d in catalog::catalog() {
            let positive = beta.get(&d.dimension_id).is_some_and(Rational::is_positive);
            let a = match self.alpha.get(&d.dimension_id) {
                Some(raw) if positive => normalize_weights(raw)?,
                Some(raw) => normalize_weights(raw).unwrap_or_else(|_| uniform_alpha(d)),
                None => uniform_alpha(d),
            };
            alpha.insert(d.dimension_id.clone(), a);
        }
        let profile = WeightProfile {
            profile_id: profile_id.into(),
            use_case_id: use_case_id.into(),
            beta,
            alpha,
            catalog_version: CATALOG_VERSION.to_string(),
        };
        validate_profile(&profile).map_err(AggregationError::InvalidProfile)?;
        Ok(profile)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub metric_id: String,
    pub score: Rational,
    pub alpha: Rational,
    pub effective_alpha: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub dimension_id: String,
    /// Zero when not applicable.
    pub value: Rational,
    pub not_applicable: bool,
    pub beta: Rational,
    /// Weight actually used in the total; zero when excluded.
    pub effective_beta: Rational,
    pub contributing: Vec<Contribution>,
    pub excluded_not_applicable: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationOptions {
    /// Fail on any not-applicable metric with positive weight.
    pub strict: bool,
}

/// Score one dimension from its metric scores.
pub fn dimension_score(
    dimension_id: &str,
    scores: &HashMap<&str, &MetricScore>,
    alpha: &Weights,
    options: AggregationOptions,
) -> Result<DimensionScore, AggregationError> {
    let mut contributing = Vec::new();
    let mut excluded = Vec::new();
    let mut applicable_alpha = Rational::zero();
    for (metric_id, a) in alpha {
        if !a.is_positive() {
            continue;
        }
        let score = scores
            .get(metric_id.as_str())
            .ok_or_else(|| AggregationError::MissingScore(metric_id.clone()))?;
        if score.not_applicable {
            if options.strict {
                return Err(AggregationError::StrictNotApplicable(metric_id.clone()));
            }
            excluded.push(metric_id.clone());
        } else {
            applicable_alpha = applicable_alpha + a;
            contributing.push((metric_id.clone(), score.value.clone(), a.clone()));
        }
    }
    let not_applicable = !applicable_alpha.is_positive();
    let contributing: Vec<Contribution> = contributing
        .into_iter()
        .map(|(metric_id, score, alpha)| Contribution {
            effective_alpha: &alpha / &applicable_alpha,
            metric_id,
            score,
            alpha,
        })
        .collect();
    let value = contributing
        .iter()
        .map(|c| &c.score * &c.effective_alpha)
        .sum();
    Ok(DimensionScore {
        dimension_id: dimension_id.to_string(),
        value,
        not_applicable,
        beta: Rational::zero(),
        effective_beta: Rational::zero(),
        contributing,
        excluded_not_applicable: excluded,
    })
}

/// Fills in `beta`/`effective_beta` and returns T.
pub fn total_score(dimensions: &mut [DimensionScore], beta: &Weights, options: AggregationOptions) -> Result<Rational, AggregationError> {
    let weight = |d: &DimensionScore| beta.get(&d.dimension_id).cloned().unwrap_or_else(Rational::zero);
    let mut applicable = Rational::zero();
    for d in dimensions.iter_mut() {
        d.beta = weight(d);
        d.effective_beta = Rational::zero();
        if d.beta.is_positive() {
            if d.not_applicable {
                if options.strict {
                    return Err(AggregationError::StrictNotApplicable(d.dimension_id.clone()));
                }
            } else {
                applicable = applicable + &d.beta;
            }
        }
    }
    if !applicable.is_positive() {
        return Err(AggregationError::AllNotApplicable);
    }
    let mut total = Rational::zero();
    for d in dimensions.iter_mut() {
        if d.beta.is_positive() && !d.not_applicable {
            d.effective_beta = &d.beta / &applicable;
            total = total + &d.value * &d.effective_beta;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgAssessment {
    pub kg_id: String,
    pub use_case_id: String,
    pub profile_id: String,
    pub catalog_version: String,
    pub dimension_scores: Vec<DimensionScore>,
    pub total: Rational,
    pub metric_scores: Vec<MetricScore>,
}

impl KgAssessment {
    pub fn dimension(&self, dimension_id: &str) -> Option<&DimensionScore> {
        self.dimension_scores.iter().find(|d| d.dimension_id == dimension_id)
    }

    /// Strongest and weakest positively weighted, applicable dimensions.
    /// Ties go to the earlier dimension in catalog order.
    pub fn extremes(&self) -> Option<(&DimensionScore, &DimensionScore)> {
        let weighted: Vec<_> = self
            .dimension_scores
            .iter()
            .filter(|d| d.effective_beta.is_positive())
            .collect();
        let mut best = *weighted.first()?;
        let mut worst = best;
        for d in &weighted[1..] {
            if d.value > best.value {
                best = d;
            }
            if d.value < worst.value {
                worst = d;
            }
        }
        Some((best, worst))
    }
}

/// Compose dimension scores and the total. Dimensions with β = 0 are still
/// scored for display, with uniform α if theirs is unusable.
pub fn assess(
    kg_id: &str,
    metric_scores: &[MetricScore],
    profile: &WeightProfile,
    options: AggregationOptions,
) -> Result<KgAssessment, AggregationError> {
    validate_profile(profile).map_err(AggregationError::InvalidProfile)?;
    let by_id: HashMap<&str, &MetricScore> = metric_scores.iter().map(|s| (s.metric_id.as_str(), s)).collect();
    let mut dims = Vec::with_capacity(20);
    for d in catalog::catalog() {
        let weighted = profile.beta_of(&d.dimension_id).is_positive();
        let own = profile.alpha.get(&d.dimension_id);
        let alpha = match own {
            Some(a) if weighted || sum(a.values()) == Rational::one() => a.clone(),
            _ => uniform_alpha(d),
        };
        let opts = if weighted { options } else { AggregationOptions { strict: false } };
        match dimension_score(&d.dimension_id, &by_id, &alpha, opts) {
            Ok(ds) => dims.push(ds),
            Err(e) if weighted => return Err(e),
            Err(_) => dims.push(DimensionScore {
                dimension_id: d.dimension_id.clone(),
                value: Rational::zero(),
                not_applicable: true,
                beta: Rational::zero(),
                effective_beta: Rational::zero(),
                contributing: vec![],
                excluded_not_applicable: vec![],
            }),
        }
    }
    let total = total_score(&mut dims, &profile.beta, options)?;
    Ok(KgAssessment {
        kg_id: kg_id.to_string(),
        use_case_id: profile.use_case_id.clone(),
        profile_id: profile.profile_id.clone(),
        catalog_version: profile.catalog_version.clone(),
        dimension_scores: dims,
        total,
        metric_scores: metric_scores.to_vec(),
    })
}

/// Recompute from the cached metric scores only.
pub fn retune(
    assessment: &KgAssessment,
    profile: &WeightProfile,
    options: AggregationOptions,
) -> Result<KgAssessment, AggregationError> {
    if assessment.catalog_version != profile.catalog_version {
        return Err(AggregationError::CatalogMismatch {
            scores: assessment.catalog_version.clone(),
            profile: profile.catalog_version.clone(),
        });
    }
    assess(&assessment.kg_id, &assessment.metric_scores, profile, options)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedKg {
    /// 1-based; tied totals share the better rank.
    pub rank: usize,
    pub kg_id: String,
    pub total: Rational,
    pub tied: bool,
}

/// Descending T, ties broken by `kg_id`, competition ranking.
pub fn rank_kgs(assessments: &[KgAssessment]) -> Result<Vec<RankedKg>, AggregationError> {
    if let Some(first) = assessments.first() {
        if assessments.iter().any(|a| a.use_case_id != first.use_case_id) {
            return Err(AggregationError::MixedRanking("use cases"));
        }
        if assessments.iter().any(|a| a.profile_id != first.profile_id) {
            return Err(AggregationError::MixedRanking("profiles"));
        }
    }
    let mut order: Vec<&KgAssessment> = assessments.iter().collect();
    order.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.kg_id.cmp(&b.kg_id)));
    let mut out: Vec<RankedKg> = Vec::with_capacity(order.len());
    for (i, a) in order.iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.total == a.total => prev.rank,
            _ => i + 1,
        };
        out.push(RankedKg {
            rank,
            kg_id: a.kg_id.clone(),
            total: a.total.clone(),
            tied: false,
        });
    }
    for i in 0..out.len() {
        let tied = (i > 0 && out[i - 1].total == out[i].total) || (i + 1 < out.len() && out[i + 1].total == out[i].total);
        out[i].tied = tied;
    }
    Ok(out)
}

/// One-line recommendation naming the top KG and its extremes.
pub fn recommendation(top: &KgAssessment) -> String {
    let t = top.total.display_decimal();
    match top.extremes() {
        Some((best, worst)) => format!(
            "Use {} (T = {t}): strongest in {} ({}), weakest in {} ({}).",
            top.kg_id,
            catalog::dimension_name(&best.dimension_id),
            best.value.display_decimal(),
            catalog::dimension_name(&worst.dimension_id),
            worst.value.display_decimal(),
        ),
        None => format!("Use {} (T = {t}).", top.kg_id),
    }
}
