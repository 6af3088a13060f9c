//! The individual tests.

use serde::{Deserialize, Serialize};

use crate::dist::{f_sf, normal_quantile, normal_sf, ptukey_sf, qtukey, t_two_sided};
use crate::StatsError;

/// Named sample, one value per participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub label: String,
    pub values: Vec<f64>,
}

impl GroupSample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub group_a: String,
    pub group_b: String,
    /// mean(a) − mean(b)
    pub mean_diff: f64,
    pub q: f64,
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsResult {
    pub test: String,
    pub statistic: f64,
    pub df: Vec<f64>,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairwise: Vec<PairwiseRow>,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_groups(groups: &[GroupSample]) -> Result<(), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    for g in groups {
        if g.n() < 2 {
            return Err(StatsError::TooFewObservations {
                group: g.label.clone(),
                n: g.n(),
            });
        }
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(g.label.clone()));
        }
    }
    Ok(())
}

struct Partition {
    k: usize,
    n: usize,
    ss_between: f64,
    ss_within: f64,
}

fn partition(groups: &[GroupSample]) -> Partition {
    let n: usize = groups.iter().map(GroupSample::n).sum();
    let grand = groups.iter().flat_map(|g| &g.values).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.mean();
        ss_between += g.n() as f64 * (m - grand).powi(2);
        ss_within += g.values.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    Partition {
        k: groups.len(),
        n,
        ss_between,
        ss_within,
    }
}

/// One-way independent ANOVA.
pub fn anova_oneway(groups: &[GroupSample]) -> Result<StatsResult, StatsError> {
    check_groups(groups)?;
    let p = partition(groups);
    let (d1, d2) = ((p.k - 1) as f64, (p.n - p.k) as f64);
    let (f, pv) = if p.ss_within == 0.0 {
        if p.ss_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (p.ss_between / d1) / (p.ss_within / d2);
        (f, f_sf(f, d1, d2))
    };
    Ok(StatsResult {
        test: "anova_oneway".into(),
        statistic: f,
        df: vec![d1, d2],
        p_value: pv,
        pairwise: Vec::new(),
    })
}

/// Pooled-variance two-sample t test.
pub fn t_test_pooled(a: &[f64], b: &[f64]) -> Result<StatsResult, StatsError> {
    let groups = [GroupSample::new("a", a.to_vec()), GroupSample::new("b", b.to_vec())];
    check_groups(&groups)?;
    let (ma, mb) = (mean(a), mean(b));
    let ss: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() + b.iter().map(|x| (x - mb).powi(2)).sum::<f64>();
    let df = (a.len() + b.len() - 2) as f64;
    let se = (ss / df * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
    let t = (ma - mb) / se;
    Ok(StatsResult {
        test: "t_test_pooled".into(),
        statistic: t,
        df: vec![df],
        p_value: t_two_sided(t, df),
        pairwise: Vec::new(),
    })
}

/// Tukey HSD with the Tukey-Kramer standard error for unequal sizes.
pub fn tukey_hsd(groups: &[GroupSample], alpha: f64) -> Result<StatsResult, StatsError> {
    check_groups(groups)?;
    let p = partition(groups);
    let df = (p.n - p.k) as f64;
    let k = p.k as f64;
    let msw = p.ss_within / df;
    let crit = qtukey(1.0 - alpha, k, df);
    let mut rows = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (a, b) = (&groups[i], &groups[j]);
            let diff = a.mean() - b.mean();
            let se = (msw / 2.0 * (1.0 / a.n() as f64 + 1.0 / b.n() as f64)).sqrt();
            let (q, pv) = if se > 0.0 {
                let q = diff.abs() / se;
                (q, ptukey_sf(q, k, df))
            } else if diff == 0.0 {
                (0.0, 1.0)
            } else {
                (f64::INFINITY, 0.0)
            };
            rows.push(PairwiseRow {
                group_a: a.label.clone(),
                group_b: b.label.clone(),
                mean_diff: diff,
                q,
                p_value: pv,
                ci_lower: diff - crit * se,
                ci_upper: diff + crit * se,
                reject: pv < alpha,
            });
        }
    }
    let min_p = rows.iter().map(|r| r.p_value).fold(1.0, f64::min);
    let max_q = rows.iter().map(|r| r.q).fold(0.0, f64::max);
    Ok(StatsResult {
        test: "tukey_hsd".into(),
        statistic: max_q,
        df: vec![k, df],
        p_value: min_p,
        pairwise: rows,
    })
}

/// Levene's test centre.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    /// Classic Levene.
    #[default]
    Mean,
    /// Brown-Forsythe.
    Median,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Absolute deviations from each group's centre.
pub fn absolute_deviations(groups: &[GroupSample], center: Center) -> Vec<GroupSample> {
    groups
        .iter()
        .map(|g| {
            let c = match center {
                Center::Mean => g.mean(),
                Center::Median => median(&g.values),
            };
            GroupSample::new(g.label.clone(), g.values.iter().map(|x| (x - c).abs()).collect())
        })
        .collect()
}

/// ANOVA over absolute deviations from group centres.
pub fn levene(groups: &[GroupSample], center: Center) -> Result<StatsResult, StatsError> {
    check_groups(groups)?;
    let mut r = anova_oneway(&absolute_deviations(groups, center))?;
    r.test = match center {
        Center::Mean => "levene",
        Center::Median => "brown_forsythe",
    }
    .into();
    Ok(r)
}

/// Pearson correlation with a two-sided t-based p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<StatsResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::SampleSize(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("pearson input".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (x.len() - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(StatsResult {
        test: "pearson".into(),
        statistic: r,
        df: vec![df],
        p_value: p,
        pairwise: Vec::new(),
    })
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Shapiro-Wilk W with Royston's normalizing approximation for the p-value.
pub fn shapiro_wilk(values: &[f64]) -> Result<StatsResult, StatsError> {
    let n = values.len();
    if !(3..=5000).contains(&n) {
        return Err(StatsError::SampleSize(n));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("shapiro input".into()));
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    if x[n - 1] - x[0] == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let nf = n as f64;
    let half = n / 2;
    // a[i] is the weight of x[n-1-i] (and minus the weight of x[i])
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
        const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
        let m: Vec<f64> = (1..=half).map(|i| normal_quantile((i as f64 - 0.375) / (nf + 0.25))).collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / nf.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (start, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            a[1] = a2;
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
            (2, fac)
        } else {
            (1, ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt())
        };
        a[0] = a1;
        for i in start..half {
            a[i] = -m[i] / fac;
        }
    }
    // W as the squared correlation between data and weights
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let j = n - 1 - i;
            if i < j {
                -a[i]
            } else if i > j {
                a[j]
            } else {
                0.0
            }
        })
        .collect();
    let mx = mean(&x);
    let mw = mean(&weights);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, wi) in x.iter().zip(&weights) {
        sxy += (xi - mx) * (wi - mw);
        sxx += (xi - mx).powi(2);
        syy += (wi - mw).powi(2);
    }
    let w = (sxy * sxy / (sxx * syy)).min(1.0);
    let p = if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::FRAC_PI_3;
        (pi6 * (w.sqrt().asin() - stqr)).max(0.0)
    } else {
        let w1 = 1.0 - w;
        let y = w1.ln();
        if n <= 11 {
            let gamma = poly(&[-2.273, 0.459], nf);
            if y >= gamma {
                1e-99
            } else {
                let y = -(gamma - y).ln();
                let m = poly(&[0.544, -0.39978, 0.025054, -6.714e-4], nf);
                let s = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
                normal_sf((y - m) / s)
            }
        } else {
            let xx = nf.ln();
            let m = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], xx);
            let s = poly(&[-0.4803, -0.082676, 0.0030302], xx).exp();
            normal_sf((y - m) / s)
        }
    };
    Ok(StatsResult {
        test: "shapiro_wilk".into(),
        statistic: w,
        df: vec![nf],
        p_value: p.clamp(0.0, 1.0),
        pairwise: Vec::new(),
    })
}
