//! Premium rules and the holdout evaluation harness.
//!
//! Five rating rules sit on a common panel + GLM pipeline:
//!
//! * `NAIVE` charges the fitted a-priori mean and ignores experience.
//! * `STATIC` is the classical Buhlmann/conjugate update with a single
//!   time-constant risk factor.
//! * `PROPOSED` charges the linear credibility premium from the dynamic
//!   covariance model (see [`crate::credibility`]).
//! * `EXACT_SMC` approximates the Bayes premium `E[Y_{T+1} | Y_{1:T}]` by a
//!   bootstrap particle filter over the latent risk path.
//! * `TRUE` charges `R_{T+1} * lambda_{T+1}` using the simulated latent factor
//!   and is the yardstick the relative metrics are scaled against.
//!
//! `HARVEY` (the exponentially-weighted ratio rule) is also wired in for
//! comparison runs.
//!
//! The harness (`evaluate`) fits one Poisson GLM for everyone, estimates the
//! dispersion/autocorrelation moments, prices each policy under the requested
//! rules, and scores all of them against fresh holdout copies drawn around the
//! true latent mean.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::io::Write;

use crate::credibility::{credibility_factors, json_num10, CovModel};
use crate::error::{Error, Result};
use crate::glm::{fit_poisson, predict_lambda};
use crate::processes::{fmt_sig12, ClaimPanel, EdFamily, EdKind, PanelRecord, StateSpec};

/// Resampling trigger: resample when ESS drops below this fraction of N.
const ESS_FRACTION: f64 = 0.5;
/// Hard floor: below this ESS the filter is declared degenerate.
const ESS_FLOOR: f64 = 10.0;
/// Default particle count for `EXACT_SMC`.
pub const DEFAULT_PARTICLES: usize = 2000;
/// Default number of holdout copies per policy in `evaluate`.
pub const DEFAULT_COPIES: usize = 100;

/// A rating rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Naive,
    Static,
    Proposed,
    ExactSmc,
    True,
    Harvey,
}

impl Method {
    /// Stable label used in CSV/JSON output and row sorting.
    pub fn label(&self) -> &'static str {
        match self {
            Method::Naive => "NAIVE",
            Method::Static => "STATIC",
            Method::Proposed => "PROPOSED",
            Method::ExactSmc => "EXACT_SMC",
            Method::True => "TRUE",
            Method::Harvey => "HARVEY",
        }
    }

    /// Parse a method name (case-insensitive; `EXACT` is accepted for
    /// `EXACT_SMC`).
    pub fn parse(name: &str) -> Result<Method> {
        match name.trim().to_ascii_uppercase().as_str() {
            "NAIVE" => Ok(Method::Naive),
            "STATIC" => Ok(Method::Static),
            "PROPOSED" => Ok(Method::Proposed),
            "EXACT" | "EXACT_SMC" | "SMC" => Ok(Method::ExactSmc),
            "TRUE" => Ok(Method::True),
            "HARVEY" => Ok(Method::Harvey),
            other => Err(Error::Parse(format!("unknown method '{}'", other))),
        }
    }

    /// All methods in reporting order.
    pub fn all() -> [Method; 6] {
        [Method::Naive, Method::Static, Method::Proposed, Method::ExactSmc, Method::True, Method::Harvey]
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The naive premium: charge the a-priori mean for the forecast period.
pub fn naive_premium(lambda_next: f64) -> f64 {
    lambda_next
}

/// Static (time-constant risk factor) premium.
///
/// With a conjugate gamma prior matched to `sigma2` the posterior mean of the
/// common factor is `(sum y + 1/sigma2) / (sum lambda + 1/sigma2)`, so the
/// premium is that ratio times `lambda_next`.  `sigma2 == 0` collapses the
/// prior to a point mass at 1 and the premium is `lambda_next` itself.
///
/// `policy` carries the experience periods; `record.lambda` is the a-priori
/// mean used in rating (callers substitute fitted values when rating off a
/// GLM).
pub fn static_premium(policy: &[PanelRecord], sigma2: f64, lambda_next: f64) -> Result<f64> {
    if !sigma2.is_finite() || sigma2 < 0.0 {
        return Err(Error::InvalidSigma(sigma2));
    }
    if policy.is_empty() {
        return Err(Error::InvalidParams("static_premium: empty experience".to_string()));
    }
    if sigma2 == 0.0 {
        return Ok(lambda_next);
    }
    let sum_y: f64 = policy.iter().map(|r| r.y).sum();
    let sum_lambda: f64 = policy.iter().map(|r| r.lambda).sum();
    let inv = 1.0 / sigma2;
    Ok(lambda_next * (sum_y + inv) / (sum_lambda + inv))
}

/// Linear credibility premium `alpha0 * mean_next + sum_t alpha_t * y_t`.
///
/// `model.lambdas` must hold the a-priori means for periods `1..=T+1` (the
/// last entry is the forecast mean); `policy` supplies the observations for
/// periods `1..=T`.  The result can be negative when the factors are not
/// regular; it is returned as computed, never clipped.
pub fn proposed_premium(policy: &[PanelRecord], model: &CovModel) -> Result<f64> {
    let t = policy.len();
    if t == 0 {
        return Err(Error::InvalidParams("proposed_premium: empty experience".to_string()));
    }
    if model.lambdas.len() < t + 1 {
        return Err(Error::DimensionMismatch(format!(
            "proposed_premium: {} lambdas for {} experience periods (need T+1)",
            model.lambdas.len(),
            t
        )));
    }
    let factors = credibility_factors(model, t)?;
    let experience: f64 = factors.alpha.iter().zip(policy).map(|(a, r)| a * r.y).sum();
    Ok(factors.alpha0 * model.lambdas[t] + experience)
}

/// Point estimate and Monte Carlo standard error from the particle filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcEstimate {
    pub premium: f64,
    pub std_err: f64,
    /// Smallest effective sample size seen across filtering steps.
    pub min_ess: f64,
}

/// Bayes premium `E[Y_{T+1} | y_{1:T}] = lambda_{T+1} * E[R_{T+1} | y_{1:T}]`
/// by a bootstrap particle filter.
///
/// Particles start from the stationary law of `state`, are pushed through the
/// transition kernel each period, and are reweighted by the observation
/// density of `family` at mean `lambda_t * r`.  Systematic resampling fires
/// when the effective sample size drops below N/2; an ESS below 10 aborts
/// with `ParticleDegeneracy`.  The reported standard error is the usual
/// weighted-variance estimate at the final step (it ignores resampling
/// correlation, which is mild at these sample sizes).
///
/// `policy` carries periods `1..=T` with the rating means in `record.lambda`;
/// `lambda_next` is the forecast-period mean.
pub fn exact_premium_smc(
    policy: &[PanelRecord],
    lambda_next: f64,
    state: &StateSpec,
    family: &EdFamily,
    n_particles: usize,
    seed: u64,
) -> Result<SmcEstimate> {
    state.validate()?;
    if policy.is_empty() {
        return Err(Error::InvalidParams("exact_premium_smc: empty experience".to_string()));
    }
    if n_particles < 2 {
        return Err(Error::InvalidParams(format!(
            "exact_premium_smc: n_particles = {} is too small",
            n_particles
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = n_particles;
    // R_1 is drawn from the stationary law directly; transitions take over
    // from period 2 on.  Log-weights avoid underflow on long panels.
    let mut particles: Vec<f64> = (0..n).map(|_| state.stationary_draw(&mut rng)).collect();
    let mut weights: Vec<f64> = vec![1.0 / n as f64; n];
    let mut min_ess = n as f64;

    for (step, record) in policy.iter().enumerate() {
        if step > 0 {
            for r in particles.iter_mut() {
                *r = state.transition(*r, &mut rng);
            }
        }
        let mut logw: Vec<f64> = particles
            .iter()
            .zip(&weights)
            .map(|(&r, &w)| w.ln() + family.log_density(record.y, record.lambda * r))
            .collect();
        let max_logw = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max_logw.is_finite() {
            return Err(Error::ParticleDegeneracy { ess: 0.0, period: record.period });
        }
        let mut total = 0.0;
        for lw in logw.iter_mut() {
            *lw = (*lw - max_logw).exp();
            total += *lw;
        }
        for (w, lw) in weights.iter_mut().zip(&logw) {
            *w = lw / total;
        }
        let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        min_ess = min_ess.min(ess);
        if ess < ESS_FLOOR {
            return Err(Error::ParticleDegeneracy { ess, period: record.period });
        }
        if ess < ESS_FRACTION * n as f64 {
            systematic_resample(&mut particles, &mut weights, &mut rng);
        }
    }

    // One-step propagation to R_{T+1}, then the weighted mean prices the
    // forecast period.
    for r in particles.iter_mut() {
        *r = state.transition(*r, &mut rng);
    }
    let mean_r: f64 = particles.iter().zip(&weights).map(|(r, w)| r * w).sum();
    let var_r: f64 = particles
        .iter()
        .zip(&weights)
        .map(|(r, w)| w * w * (r - mean_r) * (r - mean_r))
        .sum();
    Ok(SmcEstimate {
        premium: lambda_next * mean_r,
        std_err: lambda_next * var_r.sqrt(),
        min_ess,
    })
}

/// Systematic resampling: one uniform offset, N evenly spaced positions.
fn systematic_resample<R: Rng + ?Sized>(particles: &mut Vec<f64>, weights: &mut Vec<f64>, rng: &mut R) {
    let n = particles.len();
    let u0: f64 = rng.gen::<f64>() / n as f64;
    let mut resampled = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut j = 0usize;
    for i in 0..n {
        let u = u0 + i as f64 / n as f64;
        while u > cum && j + 1 < n {
            j += 1;
            cum += weights[j];
        }
        resampled.push(particles[j]);
    }
    *particles = resampled;
    weights.iter_mut().for_each(|w| *w = 1.0 / n as f64);
}

/// Oracle premium from the simulated latent factor: `R_{T+1} * lambda_next`.
pub fn true_premium(true_r_next: f64, lambda_next: f64) -> f64 {
    true_r_next * lambda_next
}

/// Method-of-moments estimates for the dynamic random-effects model.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimates {
    /// Variance of the latent factor, clamped to `[0, inf)`.
    pub sigma2_hat: f64,
    /// Lag-1 autocorrelation of the latent factor, clamped to `[0, 0.999]`.
    pub rho_hat: f64,
    /// Dispersion of the observation family (gamma panels only).
    pub psi_hat: Option<f64>,
    /// Number of records that entered the estimates.
    pub n_used: usize,
    /// One message per clamp or fallback applied to the raw estimates.
    pub clamp_flags: Vec<String>,
}

/// Upper clamp for the estimated autocorrelation.
const RHO_CAP: f64 = 0.999;

/// Method-of-moments estimation of `(sigma2, rho)` (and `psi` for gamma
/// panels) from standardized residuals `y - lambda_hat`.
///
/// `fitted_lambdas` must align with `panel.records` (one fitted mean per
/// record, GLM or otherwise).  For Poisson panels the variance identity
/// `Var(Y) = lambda + lambda^2 sigma2` gives `sigma2` from the pooled squared
/// residuals, and the lag-1 cross-moment identifies `rho`.  For gamma panels
/// lag-1 and lag-2 cross-moments are combined (`rho = c2/c1`,
/// `sigma2 = c1^2/c2`) and the pooled variance then yields `psi`; this needs
/// at least three periods per policy.  Raw estimates outside their domains
/// are clamped and each clamp is recorded in `clamp_flags`.
pub fn estimate_moments(
    panel: &ClaimPanel,
    family: &EdFamily,
    fitted_lambdas: &[f64],
) -> Result<MomentEstimates> {
    if fitted_lambdas.len() != panel.records.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate_moments: {} fitted means for {} records",
            fitted_lambdas.len(),
            panel.records.len()
        )));
    }
    let policies = panel.policies();
    if policies.is_empty() {
        return Err(Error::InvalidParams("estimate_moments: empty panel".to_string()));
    }

    // Pooled moments.  Residuals and fitted means are walked policy by
    // policy so lagged pairs never straddle a policy boundary.
    let mut sum_sq = 0.0; // sum (y - lam)^2
    let mut sum_lam = 0.0; // sum lam
    let mut sum_lam_sq = 0.0; // sum lam^2
    let mut lag1_num = 0.0; // sum e_t e_{t+1}
    let mut lag1_den = 0.0; // sum lam_t lam_{t+1}
    let mut lag2_num = 0.0;
    let mut lag2_den = 0.0;
    let mut n_used = 0usize;
    let mut offset = 0usize;
    for policy in &policies {
        let k = policy.len();
        let lams = &fitted_lambdas[offset..offset + k];
        let resid: Vec<f64> = policy.iter().zip(lams).map(|(r, l)| r.y - l).collect();
        for (r, l) in resid.iter().zip(lams) {
            sum_sq += r * r;
            sum_lam += l;
            sum_lam_sq += l * l;
            n_used += 1;
        }
        for t in 0..k.saturating_sub(1) {
            lag1_num += resid[t] * resid[t + 1];
            lag1_den += lams[t] * lams[t + 1];
        }
        for t in 0..k.saturating_sub(2) {
            lag2_num += resid[t] * resid[t + 2];
            lag2_den += lams[t] * lams[t + 2];
        }
        offset += k;
    }

    let mut flags = Vec::new();
    match family.kind() {
        EdKind::Poisson => {
            if sum_lam_sq <= 0.0 {
                return Err(Error::DegenerateDenominator(
                    "estimate_moments: sum of squared fitted means is zero".to_string(),
                ));
            }
            if lag1_den <= 0.0 {
                return Err(Error::DegenerateDenominator(
                    "estimate_moments: no consecutive-period pairs (need T >= 2)".to_string(),
                ));
            }
            // Var(Y) = lambda + lambda^2 sigma2  =>  pooled estimator.
            let sigma2_raw = (sum_sq - sum_lam) / sum_lam_sq;
            let sigma2_hat = if sigma2_raw < 0.0 {
                flags.push(format!("sigma2_hat clamped to 0 (raw {:.6e})", sigma2_raw));
                0.0
            } else {
                sigma2_raw
            };
            let rho_hat = if sigma2_hat <= 0.0 {
                flags.push("rho_hat set to 0 (no detectable heterogeneity)".to_string());
                0.0
            } else {
                let rho_raw = lag1_num / (sigma2_hat * lag1_den);
                clamp_rho(rho_raw, &mut flags)
            };
            Ok(MomentEstimates { sigma2_hat, rho_hat, psi_hat: None, n_used, clamp_flags: flags })
        }
        EdKind::Gamma => {
            if lag2_den <= 0.0 {
                return Err(Error::DegenerateDenominator(
                    "estimate_moments: gamma estimation needs at least three periods per policy".to_string(),
                ));
            }
            let c1 = lag1_num / lag1_den; // sigma2 * rho
            let c2 = lag2_num / lag2_den; // sigma2 * rho^2
            let v_hat = sum_sq / sum_lam_sq; // psi (1 + sigma2) + sigma2
            let (sigma2_hat, rho_hat) = if c1 <= 0.0 {
                flags.push(format!("sigma2_hat and rho_hat set to 0 (lag-1 moment {:.6e})", c1));
                (0.0, 0.0)
            } else if c2 <= 0.0 {
                flags.push(format!("rho_hat set to 0 (lag-2 moment {:.6e}); sigma2_hat from lag-1", c2));
                (c1, 0.0)
            } else {
                let rho = clamp_rho(c2 / c1, &mut flags);
                let sigma2 = c1 / rho.max(1e-12);
                (sigma2, rho)
            };
            let psi_raw = (v_hat - sigma2_hat) / (1.0 + sigma2_hat);
            let psi_hat = if psi_raw <= 0.0 {
                flags.push(format!("psi_hat clamped to 1e-8 (raw {:.6e})", psi_raw));
                1e-8
            } else {
                psi_raw
            };
            Ok(MomentEstimates {
                sigma2_hat,
                rho_hat,
                psi_hat: Some(psi_hat),
                n_used,
                clamp_flags: flags,
            })
        }
    }
}

fn clamp_rho(raw: f64, flags: &mut Vec<String>) -> f64 {
    if raw < 0.0 {
        flags.push(format!("rho_hat clamped to 0 (raw {:.6e})", raw));
        0.0
    } else if raw > RHO_CAP {
        flags.push(format!("rho_hat clamped to {} (raw {:.6e})", RHO_CAP, raw));
        RHO_CAP
    } else {
        raw
    }
}

/// Pooled variance estimate under the static model (`rho = 1`): all pairs
/// `t < s` within a policy share covariance `lambda_t lambda_s sigma2`.
pub fn estimate_static_sigma2(panel: &ClaimPanel, fitted_lambdas: &[f64]) -> Result<(f64, Vec<String>)> {
    if fitted_lambdas.len() != panel.records.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate_static_sigma2: {} fitted means for {} records",
            fitted_lambdas.len(),
            panel.records.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut offset = 0usize;
    for policy in panel.policies() {
        let k = policy.len();
        let lams = &fitted_lambdas[offset..offset + k];
        let resid: Vec<f64> = policy.iter().zip(lams).map(|(r, l)| r.y - l).collect();
        for t in 0..k {
            for s in (t + 1)..k {
                num += resid[t] * resid[s];
                den += lams[t] * lams[s];
            }
        }
        offset += k;
    }
    if den <= 0.0 {
        return Err(Error::DegenerateDenominator(
            "estimate_static_sigma2: no within-policy pairs (need T >= 2)".to_string(),
        ));
    }
    let raw = num / den;
    let mut flags = Vec::new();
    let sigma2 = if raw < 0.0 {
        flags.push(format!("static sigma2_hat clamped to 0 (raw {:.6e})", raw));
        0.0
    } else {
        raw
    };
    Ok((sigma2, flags))
}

/// How the static method obtains its variance parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticSigmaMode {
    /// Re-estimate `sigma2` under the static (`rho = 1`) model. Default.
    RefitStatic,
    /// Reuse the dynamic-model estimate.
    ReuseDynamic,
    /// Use a fixed value.
    Fixed(f64),
}

/// Configuration for [`evaluate`].
#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Observation family for holdout copies and the SMC likelihood.
    pub family: EdFamily,
    /// Particle count for `EXACT_SMC`.
    pub n_particles: usize,
    /// Variance source for the static method.
    pub static_sigma: StaticSigmaMode,
    /// Prior weight for the Harvey-Fernandez rule.
    pub harvey_a0: f64,
    /// Discount factor for the Harvey-Fernandez rule, in `(0, 1]`.
    pub harvey_alpha: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            family: EdFamily::poisson(),
            n_particles: DEFAULT_PARTICLES,
            static_sigma: StaticSigmaMode::RefitStatic,
            harvey_a0: 1.0,
            harvey_alpha: 0.9,
        }
    }
}

/// One priced policy-method pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PremiumRow {
    pub policy_id: String,
    pub method: Method,
    pub predicted: f64,
}

/// Holdout accuracy of one method, absolute and relative to `TRUE` (= 100).
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub rmse: f64,
    pub mae: f64,
    pub relative_rmse_pct: f64,
    pub relative_mae_pct: f64,
}

/// Output of [`evaluate`]: per-policy premiums, per-method accuracy, and any
/// warnings raised along the way (clamped moments, negative premiums, ...).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PremiumReport {
    pub rows: Vec<PremiumRow>,
    pub summary: Vec<MethodSummary>,
    pub warnings: Vec<String>,
    /// Moment estimates the model-based methods were priced with.
    pub sigma2_hat: f64,
    pub rho_hat: f64,
}

impl PremiumReport {
    /// Write the per-policy premiums as CSV (`policy_id,method,predicted`).
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "policy_id,method,predicted")?;
        for row in &self.rows {
            writeln!(writer, "{},{},{}", row.policy_id, row.method.label(), fmt_sig12(row.predicted))?;
        }
        Ok(())
    }

    /// Save the per-policy premiums to a CSV file.
    pub fn save_csv<P: AsRef<std::path::Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Accuracy summary as JSON (numbers at 10 significant digits).
    pub fn summary_json(&self) -> serde_json::Value {
        let methods: Vec<serde_json::Value> = self
            .summary
            .iter()
            .map(|s| {
                serde_json::json!({
                    "method": s.method.label(),
                    "rmse": json_num10(s.rmse),
                    "mae": json_num10(s.mae),
                    "relative_rmse_pct": json_num10(s.relative_rmse_pct),
                    "relative_mae_pct": json_num10(s.relative_mae_pct),
                })
            })
            .collect();
        serde_json::json!({
            "summary": methods,
            "sigma2_hat": json_num10(self.sigma2_hat),
            "rho_hat": json_num10(self.rho_hat),
            "warnings": self.warnings,
        })
    }

    /// Relative-metric table: one row, methods as columns, RMSE block then
    /// MAE block, scaled so `TRUE` = 100.
    pub fn table_text(&self) -> String {
        let mut out = String::new();
        let labels: Vec<&str> = self.summary.iter().map(|s| s.method.label()).collect();
        out.push_str("relative RMSE (TRUE = 100)");
        out.push('\n');
        for l in &labels {
            out.push_str(&format!("{:>10}", l));
        }
        out.push('\n');
        for s in &self.summary {
            out.push_str(&format!("{:>10.1}", s.relative_rmse_pct));
        }
        out.push('\n');
        out.push_str("relative MAE (TRUE = 100)");
        out.push('\n');
        for l in &labels {
            out.push_str(&format!("{:>10}", l));
        }
        out.push('\n');
        for s in &self.summary {
            out.push_str(&format!("{:>10.1}", s.relative_mae_pct));
        }
        out.push('\n');
        out
    }
}

/// Split a policy's records into experience periods and the holdout record.
/// The panel must carry exactly `max_period` periods per policy, the last of
/// which is held out.
fn split_holdout(policy: &[PanelRecord]) -> (&[PanelRecord], &PanelRecord) {
    let (train, rest) = policy.split_at(policy.len() - 1);
    (train, &rest[0])
}

/// Mix a per-policy salt into the evaluation seed so copy draws and SMC runs
/// never share a stream with the panel generator or each other.
fn derive_seed(seed: u64, salt: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined words.
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SALT_COPIES: u64 = 0xC0;
const SALT_SMC: u64 = 0x5C;

/// Price every policy under `methods` and score against fresh holdout copies.
///
/// Pipeline: one shared Poisson GLM over the experience periods gives fitted
/// means for all periods including the holdout; method-of-moments estimates
/// `(sigma2, rho)`; each policy is priced; `n_copies` holdout copies are
/// drawn per policy from `config.family` with the true latent mean
/// `R_{T+1} * lambda_{T+1}` (panel values); RMSE and MAE pool over all
/// policy-copy pairs and are reported relative to the `TRUE` rule (= 100).
///
/// Requires a simulated panel (latent factors present) with at least two
/// periods per policy.  Deterministic given `(panel, methods, config,
/// n_copies, seed)`; rows come back sorted by `(policy_id, method)`.
pub fn evaluate(
    panel: &ClaimPanel,
    methods: &[Method],
    config: &EvalConfig,
    n_copies: usize,
    seed: u64,
) -> Result<PremiumReport> {
    panel.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidParams("evaluate: no methods requested".to_string()));
    }
    if n_copies == 0 {
        return Err(Error::InvalidParams("evaluate: n_copies must be positive".to_string()));
    }
    let policies = panel.policies();
    let t = (panel.max_period() as usize) - 1;
    if t < 1 {
        return Err(Error::InvalidParams("evaluate: need at least one experience period plus a holdout".to_string()));
    }
    for policy in &policies {
        if policy.len() != t + 1 {
            return Err(Error::InvalidParams(format!(
                "evaluate: policy {} has {} periods, expected {}",
                policy[0].policy_id,
                policy.len(),
                t + 1
            )));
        }
        let holdout = &policy[t];
        if holdout.true_r.is_none() {
            return Err(Error::MissingTruth { policy_id: holdout.policy_id.clone() });
        }
    }

    let mut warnings = Vec::new();

    // Shared GLM over the experience periods (intercept + covariates, log
    // link, no offset), then fitted means for every record incl. holdouts.
    let k = panel.n_covariates();
    let mut design = Vec::new();
    let mut y = Vec::new();
    for policy in &policies {
        for record in &policy[..t] {
            let mut row = Vec::with_capacity(k + 1);
            row.push(1.0);
            row.extend_from_slice(&record.covariates);
            design.push(row);
            y.push(record.y);
        }
    }
    let offsets = vec![0.0; y.len()];
    let fit = fit_poisson(&design, &y, &offsets)?;
    warnings.extend(fit.warnings.iter().cloned());

    let fitted_record = |record: &PanelRecord| -> Result<f64> {
        let mut row = Vec::with_capacity(k + 1);
        row.push(1.0);
        row.extend_from_slice(&record.covariates);
        predict_lambda(&fit, &row, 0.0)
    };

    // Training-only panel view + fitted means for moment estimation.
    let mut train_panel = ClaimPanel::default();
    let mut train_fitted = Vec::new();
    let mut fitted_by_policy: Vec<Vec<f64>> = Vec::with_capacity(policies.len());
    for policy in &policies {
        let mut lams = Vec::with_capacity(t + 1);
        for record in policy.iter() {
            lams.push(fitted_record(record)?);
        }
        for (record, lam) in policy[..t].iter().zip(&lams) {
            train_panel.records.push(record.clone());
            train_fitted.push(*lam);
        }
        fitted_by_policy.push(lams);
    }

    let moments = estimate_moments(&train_panel, &config.family, &train_fitted)?;
    warnings.extend(moments.clamp_flags.iter().cloned());
    let static_sigma2 = match config.static_sigma {
        StaticSigmaMode::RefitStatic => {
            let (s2, flags) = estimate_static_sigma2(&train_panel, &train_fitted)?;
            warnings.extend(flags);
            s2
        }
        StaticSigmaMode::ReuseDynamic => moments.sigma2_hat,
        StaticSigmaMode::Fixed(s2) => {
            if !s2.is_finite() || s2 < 0.0 {
                return Err(Error::InvalidSigma(s2));
            }
            s2
        }
    };

    // Score methods: always compute TRUE internally (the relative scale),
    // price the requested set per policy, and pool errors over copies.
    let mut requested: Vec<Method> = methods.to_vec();
    requested.sort();
    requested.dedup();
    let scored: Vec<Method> = if requested.contains(&Method::True) {
        requested.clone()
    } else {
        let mut v = requested.clone();
        v.push(Method::True);
        v
    };

    let mut rows: Vec<PremiumRow> = Vec::with_capacity(policies.len() * requested.len());
    let mut sq_err: std::collections::BTreeMap<Method, f64> = scored.iter().map(|&m| (m, 0.0)).collect();
    let mut abs_err = sq_err.clone();
    let mut negatives = 0usize;
    let mut any_nonregular = false;

    for (i, policy) in policies.iter().enumerate() {
        let (train, holdout) = split_holdout(policy);
        let lams = &fitted_by_policy[i];
        let lambda_next = lams[t];
        // Rating records: experience with fitted means substituted.
        let rating: Vec<PanelRecord> = train
            .iter()
            .zip(&lams[..t])
            .map(|(r, &l)| {
                let mut r = r.clone();
                r.lambda = l;
                r
            })
            .collect();
        let true_r_next = holdout.true_r.expect("checked above");

        let mut predicted: std::collections::BTreeMap<Method, f64> = std::collections::BTreeMap::new();
        for &method in &scored {
            let value = match method {
                Method::Naive => naive_premium(lambda_next),
                Method::Static => static_premium(&rating, static_sigma2, lambda_next)?,
                Method::Proposed => {
                    let model = CovModel::dynamic_ar1(
                        moments.sigma2_hat,
                        moments.rho_hat,
                        config.family.clone(),
                        lams.clone(),
                    );
                    let factors = credibility_factors(&model, t)?;
                    if !factors.regular {
                        any_nonregular = true;
                    }
                    let experience: f64 = factors.alpha.iter().zip(&rating).map(|(a, r)| a * r.y).sum();
                    factors.alpha0 * lambda_next + experience
                }
                Method::ExactSmc => {
                    if moments.sigma2_hat <= 1e-12 {
                        // Degenerate latent factor: the filter reduces to the
                        // a-priori mean.
                        lambda_next
                    } else {
                        let state = StateSpec::Bgar1 { sigma2: moments.sigma2_hat, rho: moments.rho_hat };
                        let est = exact_premium_smc(
                            &rating,
                            lambda_next,
                            &state,
                            &config.family,
                            config.n_particles,
                            derive_seed(seed, SALT_SMC, i as u64),
                        )?;
                        est.premium
                    }
                }
                Method::True => true_premium(true_r_next, lambda_next),
                Method::Harvey => {
                    let ys: Vec<f64> = rating.iter().map(|r| r.y).collect();
                    let ls: Vec<f64> = rating.iter().map(|r| r.lambda).collect();
                    crate::credibility::harvey_fernandez_predict(
                        &ys,
                        &ls,
                        config.harvey_a0,
                        config.harvey_alpha,
                        lambda_next,
                    )?
                }
            };
            if value < 0.0 {
                negatives += 1;
            }
            predicted.insert(method, value);
            if requested.contains(&method) {
                rows.push(PremiumRow { policy_id: holdout.policy_id.clone(), method, predicted: value });
            }
        }

        // Holdout copies around the true latent mean (panel lambda, not the
        // fitted one: the copies are the actual future claims).
        let copy_mean = true_r_next * holdout.lambda;
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, SALT_COPIES, i as u64));
        for _ in 0..n_copies {
            let copy = config.family.sample(copy_mean, &mut rng);
            for (&method, &pred) in &predicted {
                let err = copy - pred;
                *sq_err.get_mut(&method).unwrap() += err * err;
                *abs_err.get_mut(&method).unwrap() += err.abs();
            }
        }
    }

    if negatives > 0 {
        warnings.push(format!("{} negative premium(s) reported as computed (not clipped)", negatives));
    }
    if any_nonregular {
        warnings.push("credibility factors were non-regular for at least one policy".to_string());
    }

    let denom = (policies.len() * n_copies) as f64;
    let metric = |m: Method| -> (f64, f64) { ((sq_err[&m] / denom).sqrt(), abs_err[&m] / denom) };
    let (true_rmse, true_mae) = metric(Method::True);
    let mut summary = Vec::with_capacity(requested.len());
    for &method in &requested {
        let (rmse, mae) = metric(method);
        summary.push(MethodSummary {
            method,
            rmse,
            mae,
            relative_rmse_pct: 100.0 * rmse / true_rmse,
            relative_mae_pct: 100.0 * mae / true_mae,
        });
    }

    rows.sort_by(|a, b| a.policy_id.cmp(&b.policy_id).then(a.method.cmp(&b.method)));
    Ok(PremiumReport {
        rows,
        summary,
        warnings,
        sigma2_hat: moments.sigma2_hat,
        rho_hat: moments.rho_hat,
    })
}
