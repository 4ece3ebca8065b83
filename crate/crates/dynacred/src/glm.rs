//! Poisson regression with log link, fitted by iteratively reweighted least
//! squares — the a-priori mean estimator `λ̂_it = exp(x_itᵀβ̂)` feeding the
//! premium pipeline.
//!
//! The fitter is deliberately plain: IRLS on the weighted normal equations
//! `XᵀWX·β = XᵀWz` with step-halving when a step increases the deviance,
//! convergence on relative deviance change `< 1e-10`, and a hard cap of 50
//! iterations (after which the fit is returned with `converged = false`).
//! Standard errors come from the inverse of the observed information
//! `XᵀWX` at the optimum; p-values are two-sided normal.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, SymMatrix};

/// Relative deviance-change threshold for convergence.
const DEV_TOL: f64 = 1e-10;
/// Iteration cap.
const MAX_ITER: usize = 50;
/// Maximum number of step-halvings per iteration.
const MAX_HALVINGS: usize = 10;
/// |β̂_j| beyond this is reported as a possible-separation warning.
const SEPARATION_BOUND: f64 = 30.0;

/// A fitted Poisson GLM.
#[derive(Debug, Clone)]
pub struct GlmFit {
    /// Coefficients, one per design column.
    pub beta: Vec<f64>,
    /// Standard errors from the inverse observed information.
    pub std_err: Vec<f64>,
    /// Two-sided normal p-values.
    pub p_values: Vec<f64>,
    /// Whether the deviance criterion was met within the iteration cap.
    pub converged: bool,
    /// IRLS iterations used.
    pub iterations: usize,
    /// Poisson log-likelihood at the returned coefficients.
    pub log_likelihood: f64,
    /// Residual deviance at the returned coefficients.
    pub deviance: f64,
    /// Non-fatal diagnostics (possible separation, …).
    pub warnings: Vec<String>,
}

impl GlmFit {
    /// Render the coefficient table (Estimate, Std. err, p-value), one row
    /// per design column.
    pub fn coefficient_table(&self, names: &[String]) -> String {
        let mut out = String::from(format!(
            "{:<12} {:>12} {:>12} {:>10}\n",
            "coefficient", "estimate", "std_err", "p_value"
        ));
        for (j, b) in self.beta.iter().enumerate() {
            let name = names.get(j).cloned().unwrap_or_else(|| format!("b{}", j));
            out.push_str(&format!(
                "{:<12} {:>12.4} {:>12.4} {:>10.4}\n",
                name, b, self.std_err[j], self.p_values[j]
            ));
        }
        out
    }
}

/// Poisson deviance `2Σ[y·ln(y/μ) − (y − μ)]` (the `y = 0` term is `2μ`).
fn poisson_deviance(y: &[f64], mu: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&yi, &mi)| {
            if yi > 0.0 {
                2.0 * (yi * (yi / mi).ln() - (yi - mi))
            } else {
                2.0 * mi
            }
        })
        .sum()
}

fn poisson_loglik(y: &[f64], mu: &[f64]) -> f64 {
    y.iter().zip(mu).map(|(&yi, &mi)| yi * mi.ln() - mi - ln_gamma(yi + 1.0)).sum()
}

/// Fit a Poisson log-link GLM of `y` on `design` with a per-row `offset`
/// added to the linear predictor: `E[y_i] = exp(x_iᵀβ + offset_i)`.
///
/// `design` is row-major, one `Vec` per observation; all rows must share the
/// column count, the system must have more rows than columns, and the design
/// must be full column rank (detected through the pivots of the weighted
/// normal equations).
pub fn fit_poisson(design: &[Vec<f64>], y: &[f64], offset: &[f64]) -> Result<GlmFit> {
    let n = design.len();
    if n == 0 {
        return Err(Error::InvalidParams("empty design matrix".to_string()));
    }
    let k = design[0].len();
    if k == 0 {
        return Err(Error::InvalidParams("design matrix has no columns".to_string()));
    }
    if n <= k {
        return Err(Error::InvalidParams(format!(
            "need more observations than coefficients, got n = {} with k = {}",
            n, k
        )));
    }
    if design.iter().any(|row| row.len() != k) {
        return Err(Error::DimensionMismatch("ragged design matrix".to_string()));
    }
    if y.len() != n || offset.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows but y has {} and offset has {}",
            n,
            y.len(),
            offset.len()
        )));
    }
    for (i, &yi) in y.iter().enumerate() {
        if !(yi.is_finite() && yi >= 0.0 && yi.fract() == 0.0) {
            return Err(Error::InvalidParams(format!(
                "y[{}] = {} is not a non-negative count",
                i, yi
            )));
        }
    }

    // One weighted least-squares step: solve XᵀWX·β = XᵀW·z. A non-positive
    // pivot in the SPD factorization means a linearly dependent column.
    let wls_step = |w: &[f64], z: &[f64]| -> Result<Vec<f64>> {
        let xtwx = SymMatrix::from_fn(k, |a, b| {
            (0..n).map(|i| design[i][a] * w[i] * design[i][b]).sum()
        })?;
        let xtwz: Vec<f64> =
            (0..k).map(|a| (0..n).map(|i| design[i][a] * w[i] * z[i]).sum()).collect();
        solve_spd(&xtwx, &xtwz).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot_index, .. } => {
                Error::RankDeficient { column: pivot_index }
            }
            other => other,
        })
    };

    // Start from the classic working response at μ⁰ = y + 0.5.
    let mu0: Vec<f64> = y.iter().map(|&yi| yi + 0.5).collect();
    let z0: Vec<f64> =
        mu0.iter().zip(offset).map(|(&mi, &oi)| mi.ln() - oi).collect();
    let mut beta = wls_step(&mu0, &z0)?;

    let eta_mu = |beta: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let eta: Vec<f64> = (0..n)
            .map(|i| design[i].iter().zip(beta).map(|(x, b)| x * b).sum::<f64>() + offset[i])
            .collect();
        let mu: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
        (eta, mu)
    };

    let (mut eta, mut mu) = eta_mu(&beta);
    let mut deviance = poisson_deviance(y, &mu);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=MAX_ITER {
        iterations = iter;
        // Working response z_i = η_i − offset_i + (y_i − μ_i)/μ_i, weight μ_i.
        let z: Vec<f64> = (0..n).map(|i| eta[i] - offset[i] + (y[i] - mu[i]) / mu[i]).collect();
        let mut proposal = wls_step(&mu, &z)?;

        let (mut eta_new, mut mu_new) = eta_mu(&proposal);
        let mut dev_new = poisson_deviance(y, &mu_new);
        // Halve back toward the current point while the deviance worsens.
        let mut halvings = 0;
        while dev_new > deviance + 1e-14 && halvings < MAX_HALVINGS {
            for (p, b) in proposal.iter_mut().zip(&beta) {
                *p = 0.5 * (*p + b);
            }
            let pair = eta_mu(&proposal);
            eta_new = pair.0;
            mu_new = pair.1;
            dev_new = poisson_deviance(y, &mu_new);
            halvings += 1;
        }

        let rel_change = (deviance - dev_new).abs() / (deviance.abs() + DEV_TOL);
        beta = proposal;
        eta = eta_new;
        mu = mu_new;
        deviance = dev_new;
        if rel_change < DEV_TOL {
            converged = true;
            break;
        }
    }

    // Observed information XᵀWX at the optimum; invert column by column for
    // the standard errors.
    let info = SymMatrix::from_fn(k, |a, b| {
        (0..n).map(|i| design[i][a] * mu[i] * design[i][b]).sum()
    })?;
    let mut std_err = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let col = solve_spd(&info, &e).map_err(|err| match err {
            Error::NotPositiveDefinite { pivot_index, .. } => {
                Error::RankDeficient { column: pivot_index }
            }
            other => other,
        })?;
        std_err.push(col[j].max(0.0).sqrt());
    }

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_values: Vec<f64> = beta
        .iter()
        .zip(&std_err)
        .map(|(&b, &se)| {
            if se == 0.0 {
                0.0
            } else {
                2.0 * (1.0 - normal.cdf((b / se).abs()))
            }
        })
        .collect();

    let mut warnings = Vec::new();
    for (j, &b) in beta.iter().enumerate() {
        if b.abs() > SEPARATION_BOUND {
            warnings.push(format!(
                "coefficient {} is {:.2}; fitted means may be degenerate (possible separation)",
                j, b
            ));
        }
    }
    if !converged {
        warnings.push(format!("IRLS did not converge within {} iterations", MAX_ITER));
    }

    Ok(GlmFit {
        log_likelihood: poisson_loglik(y, &mu),
        beta,
        std_err,
        p_values,
        converged,
        iterations,
        deviance,
        warnings,
    })
}

/// Predicted a-priori mean `exp(xᵀβ̂ + offset)` for one design row.
pub fn predict_lambda(fit: &GlmFit, design_row: &[f64], offset: f64) -> Result<f64> {
    if design_row.len() != fit.beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "design row has {} entries, fit has {} coefficients",
            design_row.len(),
            fit.beta.len()
        )));
    }
    let eta: f64 = design_row.iter().zip(&fit.beta).map(|(x, b)| x * b).sum::<f64>() + offset;
    Ok(eta.exp())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
