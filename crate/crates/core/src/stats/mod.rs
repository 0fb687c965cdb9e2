//! Inequality, correlation, trend and rank tests, effect sizes, multiple
//! testing correction, and the GLM fits in [`glm`].

pub mod glm;

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub use glm::{
    effect_table, fit_binomial_logistic, fit_negative_binomial, fit_poisson, logistic_gradient,
    logistic_log_likelihood, EffectRow, EffectTable, Family, GlmFit,
};

/// Samples up to this combined size get an exact permutation p-value in
/// [`mann_whitney_u`].
pub const EXACT_MWU_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub method: &'static str,
    pub statistic: f64,
    /// Authoritative p-value: exact when computed, otherwise the normal
    /// approximation.
    pub p_value: f64,
    pub p_normal: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub n: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn of(delta: f64) -> Self {
        let d = delta.abs();
        if d < 0.147 {
            Magnitude::Negligible
        } else if d < 0.33 {
            Magnitude::Small
        } else if d < 0.474 {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectSize {
    pub delta: f64,
    pub magnitude: Magnitude,
}

/// Two-sided tail probability of a standard normal deviate.
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile of sorted data (R type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    quantile_sorted(&sorted(values), p)
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Five-number summary with type-7 quartiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        let s = sorted(values);
        Some(Summary {
            n: s.len(),
            min: *s.first()?,
            q1: quantile_sorted(&s, 0.25)?,
            median: quantile_sorted(&s, 0.5)?,
            q3: quantile_sorted(&s, 0.75)?,
            max: *s.last()?,
            mean: mean(&s)?,
        })
    }
}

/// Gini coefficient over ascending-sorted values:
/// `(2 Σ i·x(i)) / (n Σx) − (n+1)/n`.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Stats("gini of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Stats(
            "gini requires finite nonnegative values".into(),
        ));
    }
    let s = sorted(values);
    let total: f64 = s.iter().sum();
    if total == 0.0 {
        return Err(Error::Stats("gini of an all-zero sample".into()));
    }
    let n = s.len() as f64;
    let weighted: f64 = s.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    Ok((2.0 * weighted / (n * total) - (n + 1.0) / n).max(0.0))
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of tie groups.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let s = sorted(values);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        groups.push(j - i + 1);
        i = j + 1;
    }
    groups
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x).unwrap_or(0.0);
    let my = mean(y).unwrap_or(0.0);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Stats("undefined correlation".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Stats(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Stats(
            "spearman needs at least 3 observations".into(),
        ));
    }
    pearson(&mid_ranks(x), &mid_ranks(y))
}

/// Mann-Kendall trend test with tie-corrected variance and continuity
/// correction. `tau` is Kendall's τ-b against time.
pub fn mann_kendall(series: &[f64]) -> Result<TestResult> {
    let n = series.len();
    if n < 4 {
        return Err(Error::Stats(format!(
            "mann-kendall needs at least 4 points, got {n}"
        )));
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += sign(series[j] - series[i]);
        }
    }
    let nf = n as f64;
    let ties = tie_groups(series);
    let tie_var: f64 = ties
        .iter()
        .map(|&t| (t * (t - 1) * (2 * t + 5)) as f64)
        .sum();
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_var) / 18.0;
    let z = if var <= 0.0 || s == 0.0 {
        0.0
    } else {
        (s - s.signum()) / var.sqrt()
    };
    let n0 = nf * (nf - 1.0) / 2.0;
    let n1: f64 = ties.iter().map(|&t| (t * (t - 1)) as f64 / 2.0).sum();
    let tau = if n0 - n1 > 0.0 {
        s / (n0 * (n0 - n1)).sqrt()
    } else {
        0.0
    };
    let p = normal_two_sided(z);
    Ok(TestResult {
        method: "mann-kendall",
        statistic: s,
        p_value: p,
        p_normal: p,
        exact: false,
        tau: Some(tau),
        n: vec![n],
    })
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// U statistic of `x`: pairs with x > y plus half the ties.
fn u_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut u = 0.0;
    for a in x {
        for b in y {
            if a > b {
                u += 1.0;
            } else if a == b {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided Mann-Whitney U test. The normal approximation uses tie and
/// continuity corrections; for `|x| + |y| <= 16` the exact permutation
/// p-value is reported as authoritative.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Stats(
            "mann-whitney needs two non-empty samples".into(),
        ));
    }
    let (n, m) = (x.len() as f64, y.len() as f64);
    let u = u_statistic(x, y);
    let mu = n * m / 2.0;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let total = n + m;
    let tie_term: f64 = tie_groups(&pooled)
        .iter()
        .map(|&t| (t * t * t - t) as f64)
        .sum();
    let var = n * m / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)).max(1.0));
    let p_normal = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
        normal_two_sided(z)
    };
    let exact = (x.len() + y.len() <= EXACT_MWU_LIMIT).then(|| exact_mwu_p(&pooled, x.len(), u));
    Ok(TestResult {
        method: "mann-whitney-u",
        statistic: u,
        p_value: exact.unwrap_or(p_normal),
        p_normal,
        exact: exact.is_some(),
        tau: None,
        n: vec![x.len(), y.len()],
    })
}

/// Exact two-sided p: share of all relabelings whose U is at least as far
/// from its mean as the observed one.
fn exact_mwu_p(pooled: &[f64], n: usize, u_obs: f64) -> f64 {
    let ranks = mid_ranks(pooled);
    let total = pooled.len();
    let m = total - n;
    let mu = (n * m) as f64 / 2.0;
    let observed = (u_obs - mu).abs() - 1e-9;
    let offset = (n * (n + 1)) as f64 / 2.0;
    let (mut extreme, mut count) = (0u64, 0u64);
    let mut chosen = Vec::with_capacity(n);
    fn walk(
        start: usize,
        chosen: &mut Vec<usize>,
        n: usize,
        ranks: &[f64],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == n {
            visit(chosen);
            return;
        }
        let remaining = n - chosen.len();
        for i in start..=ranks.len() - remaining {
            chosen.push(i);
            walk(i + 1, chosen, n, ranks, visit);
            chosen.pop();
        }
    }
    walk(0, &mut chosen, n, &ranks, &mut |idx| {
        let rank_sum: f64 = idx.iter().map(|&i| ranks[i]).sum();
        let u = rank_sum - offset;
        count += 1;
        if (u - mu).abs() >= observed {
            extreme += 1;
        }
    });
    (extreme as f64 / count as f64).min(1.0)
}

/// Cliff's δ with magnitude labels at 0.147 / 0.33 / 0.474.
pub fn cliffs_delta(x: &[f64], y: &[f64]) -> Result<EffectSize> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Stats(
            "cliff's delta needs two non-empty samples".into(),
        ));
    }
    let (mut greater, mut less) = (0i64, 0i64);
    let ys = sorted(y);
    for a in x {
        // counts via binary search keep this O((n + m) log m)
        let below = ys.partition_point(|b| b < a);
        let not_above = ys.partition_point(|b| b <= a);
        greater += below as i64;
        less += (ys.len() - not_above) as i64;
    }
    let delta = (greater - less) as f64 / (x.len() * y.len()) as f64;
    Ok(EffectSize {
        delta,
        magnitude: Magnitude::of(delta),
    })
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
pub fn bh_adjust(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Stats(format!("p-value {bad} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        running = running.min(p_values[i] * m as f64 / (rank + 1) as f64);
        // p·m/m can round below p
        adjusted[i] = running.min(1.0).max(p_values[i]);
    }
    Ok(adjusted)
}
