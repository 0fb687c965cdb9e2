//! Binomial logistic and negative binomial (NB2) regression by iteratively
//! reweighted least squares.
//!
//! Both fits stop when the largest coefficient change drops below
//! [`TOLERANCE`] or after [`MAX_ITERATIONS`] iterations. Standard errors come
//! from the inverse Fisher information at the estimate.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::{digamma, ln_gamma};

use super::normal_two_sided;
use crate::error::{Error, Result};

pub const TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100;
/// Linear predictors beyond this magnitude signal separation.
const SEPARATION_ETA: f64 = 35.0;
const THETA_MIN: f64 = 1e-6;
/// Upper end of the dispersion search; fits that reach it are effectively
/// Poisson.
pub const THETA_MAX: f64 = 1e8;
const Z95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    BinomialLogistic,
    NegativeBinomial,
    Poisson,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlmFit {
    pub family: Family,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// NB2 θ, with variance μ + μ²/θ.
    pub dispersion: Option<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood after each accepted iteration.
    pub ll_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl GlmFit {
    pub fn with_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.names = names.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectTable {
    pub family: Family,
    pub rows: Vec<EffectRow>,
}

impl EffectTable {
    pub fn row(&self, name: &str) -> Option<&EffectRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// exp(β) with a Wald 95% interval and p-value for each coefficient.
pub fn effect_table(fit: &GlmFit) -> Result<EffectTable> {
    if !fit.converged {
        return Err(Error::NotConverged(
            fit.diagnostic
                .clone()
                .unwrap_or_else(|| "fit did not converge".into()),
        ));
    }
    let rows = fit
        .coefficients
        .iter()
        .zip(&fit.standard_errors)
        .enumerate()
        .map(|(i, (&b, &se))| EffectRow {
            name: fit.names.get(i).cloned().unwrap_or_else(|| format!("x{i}")),
            estimate: b,
            std_error: se,
            ratio: b.exp(),
            ci_low: (b - Z95 * se).exp(),
            ci_high: (b + Z95 * se).exp(),
            p_value: if se > 0.0 {
                normal_two_sided(b / se)
            } else {
                f64::NAN
            },
        })
        .collect();
    Ok(EffectTable {
        family: fit.family,
        rows,
    })
}

fn default_names(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| {
            if i == 0 {
                "intercept".to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

fn check_rank(design: &DMatrix<f64>) -> Result<()> {
    let (n, k) = design.shape();
    if n == 0 || k == 0 {
        return Err(Error::Stats("empty design matrix".into()));
    }
    if design.iter().any(|v| !v.is_finite()) {
        return Err(Error::Stats("design matrix has non-finite entries".into()));
    }
    let sv = design.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let tol = max * n.max(k) as f64 * f64::EPSILON;
    let rank = sv.iter().filter(|s| **s > tol).count();
    if rank < k {
        return Err(Error::RankDeficient { rank, columns: k });
    }
    Ok(())
}

/// `Xᵀ diag(w) X`.
fn weighted_gram(design: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = design.clone();
    for (mut row, wi) in scaled.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    design.transpose() * scaled
}

fn invert(info: DMatrix<f64>) -> Option<DMatrix<f64>> {
    info.cholesky().map(|c| c.inverse())
}

fn standard_errors(info: DMatrix<f64>) -> Option<Vec<f64>> {
    let inv = invert(info)?;
    Some(
        (0..inv.nrows())
            .map(|i| inv[(i, i)].max(0.0).sqrt())
            .collect(),
    )
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Binomial log-likelihood at `beta`.
pub fn logistic_log_likelihood(
    design: &DMatrix<f64>,
    successes: &[f64],
    trials: &[f64],
    beta: &[f64],
) -> f64 {
    let eta = design * DVector::from_column_slice(beta);
    eta.iter()
        .zip(successes.iter().zip(trials))
        .map(|(&e, (&y, &t))| ln_choose(t, y) + y * e - t * softplus(e))
        .sum()
}

/// Score vector `Xᵀ(y − t·p)` of the binomial log-likelihood.
pub fn logistic_gradient(
    design: &DMatrix<f64>,
    successes: &[f64],
    trials: &[f64],
    beta: &[f64],
) -> Vec<f64> {
    let eta = design * DVector::from_column_slice(beta);
    let resid = DVector::from_iterator(
        eta.len(),
        eta.iter()
            .zip(successes.iter().zip(trials))
            .map(|(&e, (&y, &t))| y - t * sigmoid(e)),
    );
    (design.transpose() * resid).iter().copied().collect()
}

fn check_rows(design: &DMatrix<f64>, len: usize, what: &str) -> Result<()> {
    if design.nrows() != len {
        return Err(Error::Stats(format!(
            "{what} has {len} entries but the design has {} rows",
            design.nrows()
        )));
    }
    Ok(())
}

/// Maximum-likelihood binomial logistic regression. `design` carries its own
/// intercept column.
pub fn fit_binomial_logistic(
    design: &DMatrix<f64>,
    successes: &[f64],
    trials: &[f64],
) -> Result<GlmFit> {
    check_rows(design, successes.len(), "successes")?;
    check_rows(design, trials.len(), "trials")?;
    for (&y, &t) in successes.iter().zip(trials) {
        if !(t >= 1.0 && y >= 0.0 && y <= t) {
            return Err(Error::Stats(format!(
                "invalid binomial observation {y}/{t}"
            )));
        }
    }
    check_rank(design)?;
    let k = design.ncols();
    let ll = |b: &DVector<f64>| logistic_log_likelihood(design, successes, trials, b.as_slice());
    let mut beta = DVector::zeros(k);
    let mut current = ll(&beta);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut diagnostic = None;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let eta = design * &beta;
        let w = DVector::from_iterator(
            eta.len(),
            eta.iter().zip(trials).map(|(&e, &t)| {
                let p = sigmoid(e);
                t * p * (1.0 - p)
            }),
        );
        let score = DVector::from_vec(logistic_gradient(
            design,
            successes,
            trials,
            beta.as_slice(),
        ));
        let Some(step) = weighted_gram(design, &w)
            .cholesky()
            .map(|c| c.solve(&score))
        else {
            diagnostic = Some("information matrix became singular (separation)".into());
            break;
        };
        let (next, next_ll, applied) = halve_until_nondecreasing(&beta, &step, current, &ll);
        beta = next;
        current = next_ll;
        trace.push(current);
        let eta_max = max_abs(&(design * &beta));
        if eta_max > SEPARATION_ETA {
            diagnostic = Some(format!(
                "linear predictor reached {eta_max:.1}; data are perfectly or quasi-completely separated"
            ));
            break;
        }
        if max_abs(&applied) < TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!("no convergence after {MAX_ITERATIONS} iterations"));
    }
    let eta = design * &beta;
    let w = DVector::from_iterator(
        eta.len(),
        eta.iter()
            .zip(trials)
            .map(|(&e, &t)| t * sigmoid(e) * (1.0 - sigmoid(e))),
    );
    let ses = standard_errors(weighted_gram(design, &w)).unwrap_or_else(|| vec![f64::INFINITY; k]);
    Ok(GlmFit {
        family: Family::BinomialLogistic,
        names: default_names(k),
        coefficients: beta.iter().copied().collect(),
        standard_errors: ses,
        dispersion: None,
        log_likelihood: current,
        converged,
        iterations,
        ll_trace: trace,
        diagnostic,
    })
}

/// Applies `step`, halving it until the log-likelihood does not decrease.
/// Returns the new point, its log-likelihood and the step actually taken.
fn halve_until_nondecreasing(
    beta: &DVector<f64>,
    step: &DVector<f64>,
    current: f64,
    ll: &dyn Fn(&DVector<f64>) -> f64,
) -> (DVector<f64>, f64, DVector<f64>) {
    let mut step = step.clone();
    for _ in 0..60 {
        let candidate = beta + &step;
        let value = ll(&candidate);
        if value.is_finite() && value >= current - 1e-12 * current.abs().max(1.0) {
            return (candidate, value.max(current), step);
        }
        step /= 2.0;
    }
    (beta.clone(), current, DVector::zeros(beta.len()))
}

fn check_counts(design: &DMatrix<f64>, counts: &[f64]) -> Result<()> {
    check_rows(design, counts.len(), "counts")?;
    if counts
        .iter()
        .any(|c| !(c.is_finite() && *c >= 0.0 && c.fract() == 0.0))
    {
        return Err(Error::Stats("counts must be nonnegative integers".into()));
    }
    if counts.iter().all(|c| *c == 0.0) {
        return Err(Error::Stats("all counts are zero".into()));
    }
    check_rank(design)
}

fn poisson_ll(counts: &[f64], mu: &DVector<f64>) -> f64 {
    counts
        .iter()
        .zip(mu.iter())
        .map(|(&y, &m)| y * m.ln() - m - ln_gamma(y + 1.0))
        .sum()
}

fn nb_ll(counts: &[f64], mu: &DVector<f64>, theta: f64) -> f64 {
    counts
        .iter()
        .zip(mu.iter())
        .map(|(&y, &m)| {
            ln_gamma(y + theta) - ln_gamma(theta) - ln_gamma(y + 1.0)
                + theta * (theta / (theta + m)).ln()
                + y * (m / (theta + m)).ln()
        })
        .sum()
}

/// d/dθ of the NB2 log-likelihood.
fn theta_score(counts: &[f64], mu: &DVector<f64>, theta: f64) -> f64 {
    counts
        .iter()
        .zip(mu.iter())
        .map(|(&y, &m)| {
            digamma(y + theta) - digamma(theta) + (theta / (theta + m)).ln() + 1.0
                - (y + theta) / (theta + m)
        })
        .sum()
}

fn mean_of(design: &DMatrix<f64>, beta: &DVector<f64>) -> DVector<f64> {
    (design * beta).map(|e| e.clamp(-700.0, 700.0).exp())
}

struct LogLinear {
    beta: DVector<f64>,
    ll: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// IRLS for a log-link count model at fixed θ (`None` = Poisson).
fn irls_log_link(
    design: &DMatrix<f64>,
    counts: &[f64],
    theta: Option<f64>,
    start: DVector<f64>,
) -> LogLinear {
    let ll = |b: &DVector<f64>| {
        let mu = mean_of(design, b);
        match theta {
            Some(t) => nb_ll(counts, &mu, t),
            None => poisson_ll(counts, &mu),
        }
    };
    let mut beta = start;
    let mut current = ll(&beta);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mu = mean_of(design, &beta);
        let w = mu.map(|m| match theta {
            Some(t) => m / (1.0 + m / t),
            None => m,
        });
        // score of the log-link model: Xᵀ (W (y − μ)/μ)
        let r = DVector::from_iterator(
            counts.len(),
            counts
                .iter()
                .zip(mu.iter())
                .zip(w.iter())
                .map(|((&y, &m), &wi)| wi * (y - m) / m),
        );
        let score = design.transpose() * r;
        let Some(step) = weighted_gram(design, &w)
            .cholesky()
            .map(|c| c.solve(&score))
        else {
            break;
        };
        let (next, next_ll, applied) = halve_until_nondecreasing(&beta, &step, current, &ll);
        beta = next;
        current = next_ll;
        trace.push(current);
        if max_abs(&applied) < TOLERANCE {
            converged = true;
            break;
        }
    }
    LogLinear {
        beta,
        ll: current,
        iterations,
        converged,
        trace,
    }
}

fn log_link_start(design: &DMatrix<f64>, counts: &[f64]) -> DVector<f64> {
    // intercept-only start at the sample mean when column 0 is constant
    let mut start = DVector::zeros(design.ncols());
    let constant = design.column(0).iter().all(|v| *v == design[(0, 0)]) && design[(0, 0)] != 0.0;
    if constant {
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        start[0] = mean.ln() / design[(0, 0)];
    }
    start
}

pub fn fit_poisson(design: &DMatrix<f64>, counts: &[f64]) -> Result<GlmFit> {
    check_counts(design, counts)?;
    let fit = irls_log_link(design, counts, None, log_link_start(design, counts));
    let mu = mean_of(design, &fit.beta);
    let ses = standard_errors(weighted_gram(design, &mu))
        .unwrap_or_else(|| vec![f64::INFINITY; design.ncols()]);
    Ok(GlmFit {
        family: Family::Poisson,
        names: default_names(design.ncols()),
        coefficients: fit.beta.iter().copied().collect(),
        standard_errors: ses,
        dispersion: None,
        log_likelihood: fit.ll,
        converged: fit.converged,
        iterations: fit.iterations,
        ll_trace: fit.trace,
        diagnostic: (!fit.converged)
            .then(|| format!("no convergence after {MAX_ITERATIONS} iterations")),
    })
}

/// ML θ at fixed means: root of the θ score bracketed on a log scale.
fn solve_theta(counts: &[f64], mu: &DVector<f64>) -> f64 {
    let score = |log_t: f64| theta_score(counts, mu, log_t.exp());
    let (mut lo, mut hi) = (THETA_MIN.ln(), THETA_MAX.ln());
    if score(hi) > 0.0 {
        return THETA_MAX;
    }
    if score(lo) < 0.0 {
        return THETA_MIN;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// NB2 regression with a log link. Alternates IRLS for β at fixed θ with a
/// one-dimensional ML update of θ, starting from the Poisson fit.
pub fn fit_negative_binomial(design: &DMatrix<f64>, counts: &[f64]) -> Result<GlmFit> {
    check_counts(design, counts)?;
    let poisson = irls_log_link(design, counts, None, log_link_start(design, counts));
    let mut beta = poisson.beta;
    let mut theta = solve_theta(counts, &mean_of(design, &beta));
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut ll = nb_ll(counts, &mean_of(design, &beta), theta);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let inner = irls_log_link(design, counts, Some(theta), beta.clone());
        let new_theta = solve_theta(counts, &mean_of(design, &inner.beta));
        let d_beta = max_abs(&(&inner.beta - &beta));
        let d_theta = (new_theta.ln() - theta.ln()).abs();
        beta = inner.beta;
        theta = new_theta;
        ll = nb_ll(counts, &mean_of(design, &beta), theta);
        trace.push(ll);
        if inner.converged && d_beta < TOLERANCE && d_theta < TOLERANCE {
            converged = true;
            break;
        }
    }
    let mu = mean_of(design, &beta);
    let w = mu.map(|m| m / (1.0 + m / theta));
    let ses = standard_errors(weighted_gram(design, &w))
        .unwrap_or_else(|| vec![f64::INFINITY; design.ncols()]);
    let diagnostic = if !converged {
        Some(format!("no convergence after {MAX_ITERATIONS} iterations"))
    } else if theta >= THETA_MAX {
        Some("no overdispersion detected; dispersion at its upper bound".into())
    } else {
        None
    };
    Ok(GlmFit {
        family: Family::NegativeBinomial,
        names: default_names(design.ncols()),
        coefficients: beta.iter().copied().collect(),
        standard_errors: ses,
        dispersion: Some(theta),
        log_likelihood: ll,
        converged,
        iterations,
        ll_trace: trace,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma, Poisson};

    fn column_design(columns: &[&[f64]]) -> DMatrix<f64> {
        let n = columns[0].len();
        DMatrix::from_fn(n, columns.len() + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                columns[j - 1][i]
            }
        })
    }

    #[test]
    fn intercept_only_logistic() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let fit = fit_binomial_logistic(&x, &[50.0], &[100.0]).unwrap();
        assert!(fit.converged);
        assert!(fit.coefficients[0].abs() < 1e-10);
        assert!((effect_table(&fit).unwrap().rows[0].ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_logistic() {
        let x = column_design(&[&[0.0, 1.0]]);
        let fit = fit_binomial_logistic(&x, &[25.0, 50.0], &[100.0, 100.0]).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[1] - 3f64.ln()).abs() < 1e-9);
        let table = effect_table(&fit).unwrap();
        assert!((table.rows[1].ratio - 3.0).abs() < 1e-6);
        // closed-form SE of a log odds ratio: sqrt(Σ 1/cell)
        let se = (1.0f64 / 25.0 + 1.0 / 75.0 + 1.0 / 50.0 + 1.0 / 50.0).sqrt();
        assert!((fit.standard_errors[1] - se).abs() < 1e-8);
        for w in fit.ll_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let xs = [0.1, 0.5, 1.2, 2.0, 3.1, 4.2];
        let x = column_design(&[&xs]);
        let y = [1.0, 2.0, 2.0, 5.0, 6.0, 9.0];
        let t = [10.0; 6];
        let fit = fit_binomial_logistic(&x, &y, &t).unwrap();
        let grad = logistic_gradient(&x, &y, &t, &fit.coefficients);
        let h = 1e-5;
        for j in 0..2 {
            let mut up = fit.coefficients.clone();
            let mut down = fit.coefficients.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (logistic_log_likelihood(&x, &y, &t, &up)
                - logistic_log_likelihood(&x, &y, &t, &down))
                / (2.0 * h);
            assert!((fd - grad[j]).abs() < 1e-4);
            assert!(grad[j].abs() < 1e-6);
        }
    }

    #[test]
    fn logistic_errors() {
        let x = column_design(&[&[1.0, 1.0, 1.0]]);
        assert!(matches!(
            fit_binomial_logistic(&x, &[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]),
            Err(Error::RankDeficient {
                rank: 1,
                columns: 2
            })
        ));
        let x = column_design(&[&[0.0, 1.0, 2.0, 3.0]]);
        let fit = fit_binomial_logistic(&x, &[0.0, 0.0, 5.0, 5.0], &[5.0; 4]).unwrap();
        assert!(!fit.converged);
        assert!(fit.diagnostic.as_deref().unwrap().contains("separated"));
        assert!(effect_table(&fit).is_err());
        assert!(fit_binomial_logistic(&x, &[6.0, 0.0, 0.0, 0.0], &[5.0; 4]).is_err());
    }

    #[test]
    fn nb_intercept_only_recovers_mean() {
        let counts = [1.0, 3.0, 8.0, 0.0, 2.0, 10.0, 4.0, 4.0];
        let x = DMatrix::from_element(counts.len(), 1, 1.0);
        let fit = fit_negative_binomial(&x, &counts).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[0].exp() - 4.0).abs() < 1e-6);
        assert!(fit.dispersion.unwrap() > 0.0);
    }

    #[test]
    fn nb_recovers_simulated_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let theta = 1.5;
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64) / n as f64 * 4.0 - 2.0).collect();
        let counts: Vec<f64> = xs
            .iter()
            .map(|x| {
                let mu = (0.5 + 0.3 * x).exp();
                let lambda = Gamma::new(theta, mu / theta).unwrap().sample(&mut rng);
                Poisson::new(lambda.max(1e-12)).unwrap().sample(&mut rng)
            })
            .collect();
        let fit = fit_negative_binomial(&column_design(&[&xs]), &counts).unwrap();
        assert!(fit.converged);
        for (b, (est, se)) in [0.5, 0.3]
            .iter()
            .zip(fit.coefficients.iter().zip(&fit.standard_errors))
        {
            assert!((est - b).abs() < 3.0 * se, "{est} vs {b} (se {se})");
        }
        let d = fit.dispersion.unwrap();
        assert!((d - theta).abs() / theta < 0.2, "theta {d}");
    }

    #[test]
    fn nb_nests_poisson() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..400).map(|i| (i % 20) as f64 / 10.0).collect();
        let counts: Vec<f64> = xs
            .iter()
            .map(|x| {
                Poisson::new((1.0 + 0.4 * x).exp())
                    .unwrap()
                    .sample(&mut rng)
            })
            .collect();
        let design = column_design(&[&xs]);
        let nb = fit_negative_binomial(&design, &counts).unwrap();
        let pois = fit_poisson(&design, &counts).unwrap();
        assert!(nb.converged && pois.converged);
        assert!(nb.dispersion.unwrap() > 50.0, "theta {:?}", nb.dispersion);
        assert!(nb.log_likelihood >= pois.log_likelihood - 1e-6);
    }

    #[test]
    fn nb_errors() {
        let x = DMatrix::from_element(3, 1, 1.0);
        assert!(fit_negative_binomial(&x, &[0.0, 0.0, 0.0]).is_err());
        assert!(fit_negative_binomial(&x, &[1.0, -1.0, 0.0]).is_err());
        assert!(fit_negative_binomial(&x, &[1.5, 1.0, 0.0]).is_err());
    }

    #[test]
    fn effect_table_interval() {
        let fit = GlmFit {
            family: Family::BinomialLogistic,
            names: vec!["x".into()],
            coefficients: vec![0.0],
            standard_errors: vec![0.1],
            dispersion: None,
            log_likelihood: 0.0,
            converged: true,
            iterations: 1,
            ll_trace: vec![],
            diagnostic: None,
        };
        let row = &effect_table(&fit).unwrap().rows[0];
        assert_eq!(row.ratio, 1.0);
        assert!((row.ci_low - (-0.196f64).exp()).abs() < 1e-12);
        assert!((row.ci_low - 0.822).abs() < 1e-3 && (row.ci_high - 1.217).abs() < 1e-3);
        assert_eq!(row.p_value, 1.0);
    }
}
