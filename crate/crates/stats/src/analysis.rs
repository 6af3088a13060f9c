//! The per-measure analysis pipeline over a metrics file.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use newsxai_study::{MetricsRecord, StudyCondition};

use crate::inference::{anova_oneway, levene, mean, pearson, shapiro_wilk, tukey_hsd, Center, GroupSample, StatsResult};

pub const DEFAULT_MIN_DURATION_MINUTES: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Credibility,
    Incredibility,
    AgreementRate,
    PredictionTaskAccuracy,
    EngagementRate,
    PerceivedAccuracy,
    ExpectedAiAccuracy,
    EstimatedFakeRate,
    ClickCount,
    DurationMinutes,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Credibility => "credibility",
            Measure::Incredibility => "incredibility",
            Measure::AgreementRate => "agreement_rate",
            Measure::PredictionTaskAccuracy => "prediction_task_accuracy",
            Measure::EngagementRate => "engagement_rate",
            Measure::PerceivedAccuracy => "perceived_accuracy",
            Measure::ExpectedAiAccuracy => "expected_ai_accuracy",
            Measure::EstimatedFakeRate => "estimated_fake_rate",
            Measure::ClickCount => "click_count",
            Measure::DurationMinutes => "duration_minutes",
        }
    }

    /// The measure's value, `None` when undefined for this participant.
    pub fn value(self, r: &MetricsRecord) -> Option<f64> {
        match self {
            Measure::Credibility => r.credibility.value,
            Measure::Incredibility => r.incredibility.value,
            Measure::AgreementRate => r.agreement_rate.and_then(|x| x.value),
            Measure::PredictionTaskAccuracy => r.prediction_task_accuracy.value,
            Measure::EngagementRate => r.engagement_rate.and_then(|x| x.value),
            Measure::PerceivedAccuracy => r.perceived_accuracy,
            Measure::ExpectedAiAccuracy => r.expected_ai_accuracy,
            Measure::EstimatedFakeRate => r.estimated_fake_rate,
            Measure::ClickCount => Some(r.click_count as f64),
            Measure::DurationMinutes => Some(r.duration_minutes),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupTest {
    ShapiroWilk,
    Levene,
    Anova,
    TukeyHsd,
}

impl GroupTest {
    pub fn name(self) -> &'static str {
        match self {
            GroupTest::ShapiroWilk => "shapiro_wilk",
            GroupTest::Levene => "levene",
            GroupTest::Anova => "anova",
            GroupTest::TukeyHsd => "tukey_hsd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisPlan {
    pub name: String,
    pub measures: Vec<Measure>,
    pub tests: Vec<GroupTest>,
    pub correlations: Vec<(Measure, Measure)>,
    pub min_duration_minutes: f64,
    pub levene_center: Center,
    pub alpha: f64,
}

impl Default for AnalysisPlan {
    fn default() -> Self {
        use Measure::*;
        Self {
            name: "default".into(),
            measures: vec![
                Credibility,
                Incredibility,
                AgreementRate,
                PredictionTaskAccuracy,
                EngagementRate,
                PerceivedAccuracy,
            ],
            tests: vec![GroupTest::ShapiroWilk, GroupTest::Levene, GroupTest::Anova, GroupTest::TukeyHsd],
            correlations: vec![
                (ExpectedAiAccuracy, PerceivedAccuracy),
                (EstimatedFakeRate, EngagementRate),
                (EngagementRate, PredictionTaskAccuracy),
                (EngagementRate, AgreementRate),
                (PredictionTaskAccuracy, PerceivedAccuracy),
                (PredictionTaskAccuracy, AgreementRate),
                (PredictionTaskAccuracy, Credibility),
                (PredictionTaskAccuracy, Incredibility),
                (PerceivedAccuracy, AgreementRate),
            ],
            min_duration_minutes: DEFAULT_MIN_DURATION_MINUTES,
            levene_center: Center::Mean,
            alpha: 0.05,
        }
    }
}

impl AnalysisPlan {
    /// Looks up a named plan; only `default` exists.
    pub fn named(name: &str) -> Option<Self> {
        (name == "default").then(Self::default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub condition: StudyCondition,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerGroupResult {
    pub condition: StudyCondition,
    pub result: Option<StatsResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub measure: Measure,
    pub test: GroupTest,
    pub groups: Vec<GroupSummary>,
    pub result: Option<StatsResult>,
    /// Normality is checked within each group.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_group: Vec<PerGroupResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub x: Measure,
    pub y: Measure,
    pub n: usize,
    pub result: Option<StatsResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub plan: AnalysisPlan,
    pub participants: usize,
    pub retained: usize,
    /// Sessions dropped by the duration filter.
    pub excluded: Vec<String>,
    pub rows: Vec<AnalysisRow>,
    pub correlations: Vec<CorrelationRow>,
}

fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Groups for `measure`, in condition order. Conditions where the measure is
/// never defined (no assistant in baseline) are not applicable and left out.
fn groups_for(records: &[&MetricsRecord], measure: Measure) -> Vec<(StudyCondition, Vec<f64>)> {
    StudyCondition::ALL
        .into_iter()
        .filter_map(|c| {
            let v: Vec<f64> = records
                .iter()
                .filter(|r| r.condition == c)
                .filter_map(|r| measure.value(r))
                .collect();
            (!v.is_empty()).then_some((c, v))
        })
        .collect()
}

fn run_test(test: GroupTest, groups: &[GroupSample], plan: &AnalysisPlan) -> Result<StatsResult, String> {
    let r = match test {
        GroupTest::Levene => levene(groups, plan.levene_center),
        GroupTest::Anova => anova_oneway(groups),
        GroupTest::TukeyHsd => tukey_hsd(groups, plan.alpha),
        GroupTest::ShapiroWilk => {
            let residuals: Vec<f64> = groups
                .iter()
                .flat_map(|g| {
                    let m = g.mean();
                    g.values.iter().map(move |x| x - m)
                })
                .collect();
            shapiro_wilk(&residuals)
        }
    };
    r.map_err(|e| e.to_string())
}

/// Runs `plan` over the records. Records shorter than the duration threshold
/// are dropped first; undefined values are excluded per test.
pub fn analyze_study(records: &[MetricsRecord], plan: &AnalysisPlan) -> AnalysisReport {
    let mut sorted: Vec<&MetricsRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let (kept, dropped): (Vec<&MetricsRecord>, Vec<&MetricsRecord>) =
        sorted.into_iter().partition(|r| r.duration_minutes >= plan.min_duration_minutes);
    let mut rows = Vec::new();
    for &measure in &plan.measures {
        let groups = groups_for(&kept, measure);
        let summaries: Vec<GroupSummary> = groups
            .iter()
            .map(|(c, v)| GroupSummary {
                condition: *c,
                n: v.len(),
                mean: mean(v),
                sd: sd(v),
            })
            .collect();
        let samples: Vec<GroupSample> = groups.iter().map(|(c, v)| GroupSample::new(c.to_string(), v.clone())).collect();
        let problem = if groups.len() < 2 {
            Some(format!("{} condition(s) with data; at least 2 required", groups.len()))
        } else {
            groups
                .iter()
                .find(|(_, v)| v.len() < 2)
                .map(|(c, v)| format!("condition {c} has {} retained participant(s)", v.len()))
        };
        for &test in &plan.tests {
            let mut row = AnalysisRow {
                measure,
                test,
                groups: summaries.clone(),
                result: None,
                per_group: Vec::new(),
                skipped: problem.clone(),
            };
            if problem.is_none() {
                match run_test(test, &samples, plan) {
                    Ok(r) => row.result = Some(r),
                    Err(e) => row.skipped = Some(e),
                }
                if test == GroupTest::ShapiroWilk {
                    row.per_group = groups
                        .iter()
                        .map(|(c, v)| match shapiro_wilk(v) {
                            Ok(r) => PerGroupResult {
                                condition: *c,
                                result: Some(r),
                                skipped: None,
                            },
                            Err(e) => PerGroupResult {
                                condition: *c,
                                result: None,
                                skipped: Some(e.to_string()),
                            },
                        })
                        .collect();
                }
            }
            rows.push(row);
        }
    }
    let correlations = plan
        .correlations
        .iter()
        .map(|&(x, y)| {
            let pairs: Vec<(f64, f64)> = kept.iter().filter_map(|r| Some((x.value(r)?, y.value(r)?))).collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let res = pearson(&xs, &ys);
            CorrelationRow {
                x,
                y,
                n: xs.len(),
                skipped: res.as_ref().err().map(|e| e.to_string()),
                result: res.ok(),
            }
        })
        .collect();
    AnalysisReport {
        plan: plan.clone(),
        participants: records.len(),
        retained: kept.len(),
        excluded: dropped.iter().map(|r| r.session_id.clone()).collect(),
        rows,
        correlations,
    }
}

fn fmt_p(p: f64) -> String {
    if p < 0.001 {
        "< 0.001".into()
    } else {
        format!("= {p:.3}")
    }
}

/// Plain-text summary of a report.
pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "participants: {} retained of {} (minimum duration {} min)",
        report.retained, report.participants, report.plan.min_duration_minutes
    );
    for row in &report.rows {
        let head = format!("{} / {}", row.measure.name(), row.test.name());
        match (&row.result, &row.skipped) {
            (Some(r), _) => {
                let df: Vec<String> = r.df.iter().map(|d| format!("{d}")).collect();
                let _ = writeln!(out, "{head}: stat = {:.4}, df = ({}), p {}", r.statistic, df.join(", "), fmt_p(r.p_value));
                for pr in &r.pairwise {
                    let _ = writeln!(
                        out,
                        "    {} - {}: diff = {:.4}, p {}{}",
                        pr.group_a,
                        pr.group_b,
                        pr.mean_diff,
                        fmt_p(pr.p_value),
                        if pr.reject { " *" } else { "" }
                    );
                }
            }
            (None, Some(why)) => {
                let _ = writeln!(out, "{head}: skipped ({why})");
            }
            (None, None) => {}
        }
        if row.test == GroupTest::Anova {
            for g in &row.groups {
                let _ = writeln!(out, "    {}: n = {}, M = {:.4}, SD = {:.4}", g.condition, g.n, g.mean, g.sd);
            }
        }
    }
    for c in &report.correlations {
        match &c.result {
            Some(r) => {
                let _ = writeln!(out, "pearson {} ~ {}: r = {:.3}, p {}, n = {}", c.x.name(), c.y.name(), r.statistic, fmt_p(r.p_value), c.n);
            }
            None => {
                let _ = writeln!(
                    out,
                    "pearson {} ~ {}: skipped ({})",
                    c.x.name(),
                    c.y.name(),
                    c.skipped.as_deref().unwrap_or("")
                );
            }
        }
    }
    out
}
