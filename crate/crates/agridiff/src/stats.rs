//! Statistical machinery for the pipeline: error metrics, logistic curve
//! fitting, kernel density estimation, the two-sample Kolmogorov-Smirnov
//! test, diffusion timing metrics, and convergence diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
}

/// Root mean square error between two equal-length series.
pub fn rmse(observed: &[f64], simulated: &[f64]) -> Result<f64> {
    if observed.len() != simulated.len() || observed.is_empty() {
        return Err(Error::LengthMismatch(format!(
            "series lengths {} and {} must match and be non-zero",
            observed.len(),
            simulated.len()
        )));
    }
    let ss: f64 = observed
        .iter()
        .zip(simulated)
        .map(|(y, yhat)| (yhat - y).powi(2))
        .sum();
    Ok((ss / observed.len() as f64).sqrt())
}

/// RMSE, MAE, and the coefficient of determination of `simulated` against
/// `observed`. Errors when the observed series has zero variance, which
/// leaves R² undefined.
pub fn fit_metrics(observed: &[f64], simulated: &[f64]) -> Result<FitMetrics> {
    let root = rmse(observed, simulated)?;
    let n = observed.len() as f64;
    let mae = observed
        .iter()
        .zip(simulated)
        .map(|(y, yhat)| (yhat - y).abs())
        .sum::<f64>()
        / n;
    let y_bar = mean(observed);
    let ss_tot: f64 = observed.iter().map(|y| (y - y_bar).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Degenerate(
            "observed series has zero variance; R² is undefined".to_string(),
        ));
    }
    let ss_res: f64 = observed
        .iter()
        .zip(simulated)
        .map(|(y, yhat)| (y - yhat).powi(2))
        .sum();
    Ok(FitMetrics {
        rmse: root,
        mae,
        r2: 1.0 - ss_res / ss_tot,
    })
}

// ---------------------------------------------------------------------------
// Logistic (Rogers) curve fitting
// ---------------------------------------------------------------------------

/// Parameters of the diffusion S-curve `K / (1 + exp(-r (t - t0)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub saturation: f64,
    pub growth_rate: f64,
    pub inflection_year: f64,
    pub residual_rmse: f64,
}

/// Curve value at time `t`.
pub fn logistic_value(saturation: f64, growth_rate: f64, inflection_year: f64, t: f64) -> f64 {
    saturation / (1.0 + (-growth_rate * (t - inflection_year)).exp())
}

const LOGISTIC_MAX_REFINEMENTS: usize = 500;
const LOGISTIC_GRADIENT_TOL: f64 = 1e-8;

/// Least-squares fit of the S-curve to an adoption series.
///
/// The series is indexed from year 1. A coarse grid over
/// (K in [max(y), 1], r in (0, 3], t0 in [1, T]) seeds a damped Gauss-Newton
/// refinement, which is deterministic and robust to the flat early phase.
pub fn fit_logistic(adoption: &[f64]) -> Result<LogisticFit> {
    if adoption.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 points to fit a logistic curve, got {}",
            adoption.len()
        )));
    }
    if adoption.iter().any(|y| !(0.0..=1.0).contains(y)) {
        return Err(Error::InvalidParameter(
            "adoption values must lie in [0, 1]".to_string(),
        ));
    }
    let y_max = adoption.iter().cloned().fold(f64::MIN, f64::max);
    let y_min = adoption.iter().cloned().fold(f64::MAX, f64::min);
    if y_max - y_min < 1e-12 {
        return Err(Error::Degenerate(
            "constant adoption series cannot identify a logistic curve".to_string(),
        ));
    }
    let times: Vec<f64> = (1..=adoption.len()).map(|t| t as f64).collect();
    let horizon = adoption.len() as f64;

    let k_lo = y_max.max(1e-3);
    let mut best = (f64::MAX, k_lo, 0.5, horizon / 2.0);
    let k_steps = 13;
    for ki in 0..=k_steps {
        let k = k_lo + (1.0 - k_lo) * ki as f64 / k_steps as f64;
        for ri in 1..=30 {
            let r = 3.0 * ri as f64 / 30.0;
            for ti in 0..=40 {
                let t0 = 1.0 + (horizon - 1.0) * ti as f64 / 40.0;
                let sse = sse_logistic(adoption, &times, k, r, t0);
                if sse < best.0 {
                    best = (sse, k, r, t0);
                }
            }
        }
    }

    let (mut k, mut r, mut t0) = (best.1, best.2, best.3);
    let mut lambda = 1e-3;
    let mut sse = sse_logistic(adoption, &times, k, r, t0);
    for _ in 0..LOGISTIC_MAX_REFINEMENTS {
        // Residuals and Jacobian of e_t = K s_t - y_t with s_t the logistic.
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jte = [0.0f64; 3];
        for (&t, &y) in times.iter().zip(adoption) {
            let s = 1.0 / (1.0 + (-r * (t - t0)).exp());
            let e = k * s - y;
            let ds = k * s * (1.0 - s);
            let grad = [s, ds * (t - t0), -ds * r];
            for a in 0..3 {
                jte[a] += grad[a] * e;
                for b in 0..3 {
                    jtj[a][b] += grad[a] * grad[b];
                }
            }
        }
        let gradient_norm = (jte[0].powi(2) + jte[1].powi(2) + jte[2].powi(2)).sqrt();
        if gradient_norm < LOGISTIC_GRADIENT_TOL {
            break;
        }
        // Damped normal equations (Levenberg style).
        let mut damped = jtj;
        for (a, row) in damped.iter_mut().enumerate() {
            row[a] += lambda * (1.0 + jtj[a][a]);
        }
        let Some(step) = solve3(damped, [-jte[0], -jte[1], -jte[2]]) else {
            lambda *= 10.0;
            continue;
        };
        let k_new = (k + step[0]).clamp(1e-3, 1.0);
        let r_new = (r + step[1]).clamp(1e-4, 10.0);
        let t0_new = (t0 + step[2]).clamp(0.0, 2.0 * horizon);
        let sse_new = sse_logistic(adoption, &times, k_new, r_new, t0_new);
        if sse_new < sse {
            k = k_new;
            r = r_new;
            t0 = t0_new;
            sse = sse_new;
            lambda = (lambda * 0.3).max(1e-12);
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    Ok(LogisticFit {
        saturation: k,
        growth_rate: r,
        inflection_year: t0,
        residual_rmse: (sse / adoption.len() as f64).sqrt(),
    })
}

fn sse_logistic(y: &[f64], times: &[f64], k: f64, r: f64, t0: f64) -> f64 {
    times
        .iter()
        .zip(y)
        .map(|(&t, &obs)| (logistic_value(k, r, t0, t) - obs).powi(2))
        .sum()
}

/// Gaussian elimination with partial pivoting; None on singular systems.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                let pivot_row = m[col];
                for (c, pivot_value) in pivot_row.iter().enumerate().skip(col) {
                    m[row][c] -= f * pivot_value;
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov test
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
}

/// Exact D via a merged sweep of both empirical CDFs; asymptotic p-value from
/// the Kolmogorov distribution with the small-sample correction applied to
/// the effective size `ne = n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let d = ks_statistic(a, b)?;
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(KsResult {
        d_statistic: d,
        p_value: kolmogorov_survival(lambda),
    })
}

/// The sup-distance between the two empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter(
            "KS test requires two non-empty samples".to_string(),
        ));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        // Step both ECDFs past every tied value before measuring.
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Two-sided tail of the Kolmogorov distribution,
/// `2 Σ_{j>=1} (-1)^{j-1} exp(-2 j² λ²)`, truncated below 1e-12 and clamped
/// into (0, 1].
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Exact permutation p-value for small samples (each at most 30 values,
/// assuming no cross-sample ties): the probability that a uniformly random
/// interleaving attains a D at least as large as `d_observed`, computed by
/// counting the lattice paths that stay inside the band.
pub fn ks_exact_p_value(n: usize, m: usize, d_observed: f64) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "KS test requires two non-empty samples".to_string(),
        ));
    }
    if n > 30 || m > 30 {
        return Err(Error::InvalidParameter(
            "exact KS p-value is limited to samples of at most 30".to_string(),
        ));
    }
    if d_observed <= 0.0 {
        return Ok(1.0);
    }
    // Path (i, j) is inside the band when |i/n - j/m| < d, i.e.
    // |i m - j n| < d n m. Nudge the threshold to absorb float error in d.
    let bound = d_observed * (n * m) as f64 - 1e-9;
    let mut counts = vec![vec![0u128; m + 1]; n + 1];
    counts[0][0] = 1;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let dev = ((i * m) as i64 - (j * n) as i64).abs() as f64;
            if dev >= bound {
                counts[i][j] = 0;
                continue;
            }
            let from_left = if i > 0 { counts[i - 1][j] } else { 0 };
            let from_below = if j > 0 { counts[i][j - 1] } else { 0 };
            counts[i][j] = from_left + from_below;
        }
    }
    let total = binomial_u128(n + m, n);
    let inside = counts[n][m];
    Ok(1.0 - inside as f64 / total as f64)
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
    }
    result
}

// ---------------------------------------------------------------------------
// Kernel density estimation
// ---------------------------------------------------------------------------

/// Evaluation grid request for [`kde`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    /// Grid half-extension beyond the data range, in bandwidths.
    pub span_bandwidths: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 512,
            span_bandwidths: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityEstimate {
    /// Trapezoidal integral over the grid; close to 1 when the grid spans the
    /// data plus a few bandwidths.
    pub fn trapezoid_integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, f)| (x[1] - x[0]) * (f[0] + f[1]) / 2.0)
            .sum()
    }
}

/// Gaussian KDE with Silverman's rule-of-thumb bandwidth
/// `h = 0.9 min(σ, IQR/1.34) n^{-1/5}`.
pub fn kde(sample: &[f64], grid: GridSpec) -> Result<DensityEstimate> {
    if sample.len() < 2 {
        return Err(Error::Degenerate(
            "KDE requires at least 2 sample points".to_string(),
        ));
    }
    if grid.points < 2 {
        return Err(Error::InvalidParameter(
            "KDE grid needs at least 2 points".to_string(),
        ));
    }
    let h = silverman_bandwidth(sample)?;
    let lo = sample.iter().cloned().fold(f64::MAX, f64::min) - grid.span_bandwidths * h;
    let hi = sample.iter().cloned().fold(f64::MIN, f64::max) + grid.span_bandwidths * h;
    let last = (grid.points - 1) as f64;
    let xs: Vec<f64> = (0..grid.points)
        .map(|i| (lo * (last - i as f64) + hi * i as f64) / last)
        .collect();
    let norm = 1.0 / (sample.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let density = xs
        .iter()
        .map(|&x| {
            norm * sample
                .iter()
                .map(|&xi| (-0.5 * ((x - xi) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    Ok(DensityEstimate {
        grid: xs,
        density,
        bandwidth: h,
    })
}

pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    let sigma = sample_std(sample);
    let iqr = quantile(sample, 0.75) - quantile(sample, 0.25);
    let scale = sigma.min(iqr / 1.34);
    let h = 0.9 * scale * (sample.len() as f64).powf(-0.2);
    if h.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Degenerate(format!(
            "sample spread is degenerate (sigma={sigma}, iqr={iqr}); bandwidth undefined"
        )));
    }
    Ok(h)
}

/// Linear-interpolation quantile of an unsorted sample.
fn quantile(sample: &[f64], q: f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

// ---------------------------------------------------------------------------
// Diffusion timing metrics
// ---------------------------------------------------------------------------

/// First year (1-based position in the series) at which the trajectory
/// reaches `threshold`; `None` when it never does.
pub fn threshold_year(trajectory: &[f64], threshold: f64) -> Option<usize> {
    trajectory
        .iter()
        .position(|&a| a >= threshold)
        .map(|idx| idx + 1)
}

/// Largest year-over-year increment and the year it lands on (earliest year
/// wins ties). The series is indexed from year 1, so the first difference is
/// attributed to year 2.
pub fn peak_velocity(trajectory: &[f64]) -> Result<(f64, usize)> {
    if trajectory.len() < 2 {
        return Err(Error::InvalidParameter(
            "peak velocity needs at least 2 points".to_string(),
        ));
    }
    let mut peak = f64::MIN;
    let mut year = 2usize;
    for (i, pair) in trajectory.windows(2).enumerate() {
        let v = pair[1] - pair[0];
        if v > peak {
            peak = v;
            year = i + 2;
        }
    }
    Ok((peak, year))
}

/// Per-run timing metrics for one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionMetrics {
    pub t50: Option<usize>,
    pub t90: Option<usize>,
    pub peak_velocity: f64,
    pub peak_year: usize,
}

impl DiffusionMetrics {
    pub fn from_trajectory(adoption: &[f64]) -> Result<Self> {
        let (peak, year) = peak_velocity(adoption)?;
        Ok(DiffusionMetrics {
            t50: threshold_year(adoption, 0.5),
            t90: threshold_year(adoption, 0.9),
            peak_velocity: peak,
            peak_year: year,
        })
    }
}

// ---------------------------------------------------------------------------
// Convergence diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub running_mean: Vec<f64>,
    pub final_mean: f64,
    /// Coefficient of variation of the per-run totals, sample std over mean
    /// (a ratio, not percent).
    pub cv: f64,
    /// Stability diagnostic of the estimator itself: dispersion of the
    /// running mean over its tail window (after `STABILITY_BURN_IN`
    /// iterations, or the second half for short ensembles), relative to the
    /// final mean. This is the quantity that collapses as iterations
    /// accumulate; `cv` measures the run-to-run spread and does not.
    pub running_mean_cv: f64,
}

/// Iterations discarded before judging running-mean stability.
pub const STABILITY_BURN_IN: usize = 150;

pub fn convergence(per_run_totals: &[f64]) -> Result<ConvergenceReport> {
    if per_run_totals.len() < 2 {
        return Err(Error::InvalidParameter(
            "convergence diagnostics need at least 2 runs".to_string(),
        ));
    }
    let mut running_mean = Vec::with_capacity(per_run_totals.len());
    let mut acc = 0.0;
    for (i, &total) in per_run_totals.iter().enumerate() {
        acc += total;
        running_mean.push(acc / (i + 1) as f64);
    }
    let final_mean = *running_mean.last().unwrap();
    if final_mean == 0.0 {
        return Err(Error::Degenerate(
            "mean of per-run totals is zero; CV undefined".to_string(),
        ));
    }
    let tail_start = if per_run_totals.len() > STABILITY_BURN_IN {
        STABILITY_BURN_IN
    } else {
        per_run_totals.len() / 2
    };
    let tail = &running_mean[tail_start..];
    let tail_spread = (sample_std(tail).powi(2)
        + (mean(tail) - final_mean).powi(2))
    .sqrt();
    Ok(ConvergenceReport {
        cv: sample_std(per_run_totals) / final_mean,
        running_mean_cv: tail_spread / final_mean.abs(),
        running_mean,
        final_mean,
    })
}

// ---------------------------------------------------------------------------
// Sample summary
// ---------------------------------------------------------------------------

/// Default cutoff above which a carbon-intensity value counts as high-tail.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Population variance (n denominator).
    pub variance: f64,
    /// Fraction of the sample above the tail threshold.
    pub tail_mass: f64,
}

pub fn summarize(sample: &[f64], tail_threshold: f64) -> Result<SummaryStats> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot summarize an empty sample".to_string(),
        ));
    }
    let m = mean(sample);
    let variance = sample.iter().map(|v| (v - m).powi(2)).sum::<f64>() / sample.len() as f64;
    let tail = sample.iter().filter(|&&v| v > tail_threshold).count() as f64
        / sample.len() as f64;
    Ok(SummaryStats {
        mean: m,
        variance,
        tail_mass: tail,
    })
}
