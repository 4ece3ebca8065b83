//! Covariance builders, credibility factors, closed forms, and the
//! regularity/isotonicity checks.
//!
//! The credibility premium for period `T+1` is the best linear predictor
//!
//! ```text
//! Prem = α̂_0·λ_{T+1} + α̂_1·Y_1 + … + α̂_T·Y_T
//! ```
//!
//! whose weights solve the normal equations `Σ_T·α = cross` with
//! `Σ_T[i][j] = Cov(Y_i, Y_j)` and `cross[t] = Cov(Y_t, Y_{T+1})`, and whose
//! intercept coefficient is `α̂_0 = (E[Y_{T+1}] − Σ_t α̂_t·E[Y_t])/λ_{T+1}`.
//! The standardized factors `α̂*_t = λ_t·α̂_t` are the weights on the
//! standardized claims `Y_t/λ_t`.
//!
//! Six covariance structures are supported (see [`CovVariant`]); the
//! dynamic-AR(1) and INAR(1) variants additionally have analytic factor
//! formulas ([`closed_form_factors_model1`], [`inar1_closed_form`]) that this
//! module cross-checks against the general solver.
//!
//! Two qualitative properties of a factor set are tracked:
//!
//! - **regular** — every `α̂_t` is (numerically) positive, so no observed
//!   claim can lower the premium;
//! - **positively isotonic** — `α̂*_1 ≤ … ≤ α̂*_T`, so recent claims weigh
//!   at least as much as old ones.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, tridiag_uv, SymMatrix};
use crate::processes::EdFamily;

/// Sign tolerance for the regularity check: a factor counts as positive when
/// it exceeds −1e-12 (strictly positive up to rounding).
pub const TOL_SIGN: f64 = -1e-12;
/// Per-step slack for the isotonicity check.
pub const TOL_STEP: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

/// Unit variance function of the observation layer, `V(u) = u` or `V(u) = u²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum VarianceFn {
    Identity,
    Square,
}

impl VarianceFn {
    /// Parse a config string; anything but `identity`/`square` is rejected.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" => Ok(VarianceFn::Identity),
            "square" => Ok(VarianceFn::Square),
            other => Err(Error::UnsupportedVarianceFn(other.to_string())),
        }
    }
}

/// The covariance structure of the claim vector `(Y_1, …, Y_{T+1})`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum CovVariant {
    /// Static random effect: `Cov(Y_i, Y_j) = λ_iλ_jσ²` off the diagonal,
    /// `Var(Y_t) = q*_t + λ_t²σ²`. The observation `family` fixes `q*_t`
    /// (the enum constructor [`CovModel::static_re`] defaults it to Poisson).
    StaticRe { sigma2: f64, family: EdFamily },
    /// AR(1) latent state: `Cov(Y_i, Y_j) = λ_iλ_jσ²ρ^{|i−j|}` off the
    /// diagonal, `Var(Y_t) = q*_t + λ_t²σ²` with `q*_t = ψE[V(λ_tR_t)]`.
    DynamicAr1 { sigma2: f64, rho: f64, family: EdFamily },
    /// One AR(1) component plus one time-invariant component, each with unit
    /// mean: `E[Y_t] = 2λ_t`, `Cov = λ_iλ_j(σ₁²ρ^{|i−j|} + σ₂²)` off the
    /// diagonal, `Var(Y_t) = ψE[V(λ_t(R_1+R_2))] + λ_t²(σ₁²+σ₂²)`.
    TwoComponent { sigma1_sq: f64, sigma2_sq: f64, rho: f64, psi: f64, variance_fn: VarianceFn },
    /// Semi-parametric effect process with free autocorrelations `ρ_1..ρ_T`
    /// and a Poisson observation layer: `Var(Y_t) = λ_t + λ_t²σ²`,
    /// `Cov(Y_i, Y_j) = λ_iλ_jσ²ρ_{|i−j|}`.
    ArbitraryAcf { sigma2: f64, correlations: Vec<f64> },
    /// Claims whose standardized deviations follow an ARMA(1,1):
    /// `Cov(Y_i, Y_j) = λ_iλ_jγ_{|i−j|}` with `γ` the ARMA autocovariance.
    Arma11 { phi: f64, theta: f64, sigma_e_sq: f64 },
    /// Heterogeneous INAR(1) counts: stationary mean `m = λ/(1−p)`,
    /// `Cov(Y_t, Y_{t+h}) = m(p^h + mψ₀)`, `Var(Y_t) = m(1 + mψ₀)`.
    Inar1Het { lambda: f64, p: f64, psi0: f64 },
}

/// A covariance model together with the a-priori means `λ_1..λ_{T+1}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CovModel {
    pub variant: CovVariant,
    /// A-priori means, one per period including the forecast period; its
    /// length bounds the horizons the model can be used with.
    pub lambdas: Vec<f64>,
}

impl CovModel {
    /// Static random effect with a Poisson observation layer.
    pub fn static_re(sigma2: f64, lambdas: Vec<f64>) -> Self {
        CovModel {
            variant: CovVariant::StaticRe { sigma2, family: EdFamily::poisson() },
            lambdas,
        }
    }

    /// Static random effect with an explicit observation family.
    pub fn static_re_with_family(sigma2: f64, family: EdFamily, lambdas: Vec<f64>) -> Self {
        CovModel { variant: CovVariant::StaticRe { sigma2, family }, lambdas }
    }

    /// Dynamic AR(1) random effect.
    pub fn dynamic_ar1(sigma2: f64, rho: f64, family: EdFamily, lambdas: Vec<f64>) -> Self {
        CovModel { variant: CovVariant::DynamicAr1 { sigma2, rho, family }, lambdas }
    }

    /// Two-component (AR(1) + static) random effect.
    pub fn two_component(
        sigma1_sq: f64,
        sigma2_sq: f64,
        rho: f64,
        psi: f64,
        variance_fn: VarianceFn,
        lambdas: Vec<f64>,
    ) -> Self {
        CovModel {
            variant: CovVariant::TwoComponent { sigma1_sq, sigma2_sq, rho, psi, variance_fn },
            lambdas,
        }
    }

    /// Semi-parametric model with free autocorrelations.
    pub fn arbitrary_acf(sigma2: f64, correlations: Vec<f64>, lambdas: Vec<f64>) -> Self {
        CovModel { variant: CovVariant::ArbitraryAcf { sigma2, correlations }, lambdas }
    }

    /// ARMA(1,1) claim-dependence model.
    pub fn arma11(phi: f64, theta: f64, sigma_e_sq: f64, lambdas: Vec<f64>) -> Self {
        CovModel { variant: CovVariant::Arma11 { phi, theta, sigma_e_sq }, lambdas }
    }

    /// Heterogeneous INAR(1) over a horizon of `t` periods; the constant
    /// a-priori mean `m = λ/(1−p)` fills all `t + 1` slots.
    pub fn inar1_het(lambda: f64, p: f64, psi0: f64, t: usize) -> Self {
        let m = lambda / (1.0 - p);
        CovModel { variant: CovVariant::Inar1Het { lambda, p, psi0 }, lambdas: vec![m; t + 1] }
    }

    /// Validate the parameter domains for use with horizon `t`.
    pub fn validate(&self, t: usize) -> Result<()> {
        if t == 0 {
            return Err(Error::InvalidParams("horizon T must be at least 1".to_string()));
        }
        if self.lambdas.len() < t + 1 {
            return Err(Error::DimensionMismatch(format!(
                "need {} a-priori means for horizon T = {}, got {}",
                t + 1,
                t,
                self.lambdas.len()
            )));
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParams(format!("lambda_{} = {} must be > 0", i + 1, l)));
            }
        }
        let check_rho = |rho: f64| -> Result<()> {
            if !(rho.is_finite() && rho.abs() < 1.0) {
                return Err(Error::InvalidRho(rho));
            }
            Ok(())
        };
        // sigma2 = 0 is admitted on purpose: the premium-evaluation pipeline
        // clamps a negative moment estimate to exactly 0, and the resulting
        // covariance is still positive definite (the diagonal keeps q*).
        let check_var = |v: f64, name: &str| -> Result<()> {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("{} = {} must be >= 0", name, v)));
            }
            Ok(())
        };
        match &self.variant {
            CovVariant::StaticRe { sigma2, .. } => check_var(*sigma2, "sigma2")?,
            CovVariant::DynamicAr1 { sigma2, rho, .. } => {
                check_var(*sigma2, "sigma2")?;
                check_rho(*rho)?;
            }
            CovVariant::TwoComponent { sigma1_sq, sigma2_sq, rho, psi, .. } => {
                if !(sigma1_sq.is_finite() && *sigma1_sq > 0.0) {
                    return Err(Error::InvalidParams(format!("sigma1_sq = {} must be > 0", sigma1_sq)));
                }
                check_var(*sigma2_sq, "sigma2_sq")?;
                check_rho(*rho)?;
                if !(psi.is_finite() && *psi > 0.0) {
                    return Err(Error::InvalidParams(format!("psi = {} must be > 0", psi)));
                }
            }
            CovVariant::ArbitraryAcf { sigma2, correlations } => {
                if !(sigma2.is_finite() && *sigma2 > 0.0) {
                    return Err(Error::InvalidParams(format!("sigma2 = {} must be > 0", sigma2)));
                }
                if correlations.len() < t {
                    return Err(Error::DimensionMismatch(format!(
                        "ARBITRARY_ACF needs correlations up to lag {} for horizon T = {}, got {}",
                        t,
                        t,
                        correlations.len()
                    )));
                }
                for (h, &r) in correlations.iter().enumerate() {
                    if !(r.is_finite() && r.abs() < 1.0) {
                        return Err(Error::InvalidParams(format!(
                            "correlation at lag {} is {}, must lie in (-1, 1)",
                            h + 1,
                            r
                        )));
                    }
                }
            }
            CovVariant::Arma11 { phi, sigma_e_sq, .. } => {
                if !(phi.is_finite() && phi.abs() < 1.0) {
                    return Err(Error::NonStationary { phi: *phi });
                }
                if !(sigma_e_sq.is_finite() && *sigma_e_sq > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "sigma_e_sq = {} must be > 0",
                        sigma_e_sq
                    )));
                }
            }
            CovVariant::Inar1Het { lambda, p, psi0 } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::InvalidParams(format!("lambda = {} must be > 0", lambda)));
                }
                if !(p.is_finite() && (0.0..1.0).contains(p)) {
                    return Err(Error::InvalidParams(format!("p = {} must lie in [0, 1)", p)));
                }
                check_var(*psi0, "psi0")?;
                let m = lambda / (1.0 - p);
                if self.lambdas.iter().any(|&l| (l - m).abs() > 1e-9 * m) {
                    return Err(Error::InvalidParams(format!(
                        "INAR1_HET a-priori means must all equal lambda/(1-p) = {}",
                        m
                    )));
                }
            }
        }
        Ok(())
    }

    /// One-line human-readable summary, echoed into factor reports.
    pub fn summary(&self) -> String {
        match &self.variant {
            CovVariant::StaticRe { sigma2, family } => {
                format!("STATIC_RE(sigma2={}, family={})", sigma2, family)
            }
            CovVariant::DynamicAr1 { sigma2, rho, family } => {
                format!("DYNAMIC_AR1(sigma2={}, rho={}, family={})", sigma2, rho, family)
            }
            CovVariant::TwoComponent { sigma1_sq, sigma2_sq, rho, psi, variance_fn } => format!(
                "TWO_COMPONENT(sigma1_sq={}, sigma2_sq={}, rho={}, psi={}, V={:?})",
                sigma1_sq, sigma2_sq, rho, psi, variance_fn
            ),
            CovVariant::ArbitraryAcf { sigma2, correlations } => {
                format!("ARBITRARY_ACF(sigma2={}, lags={})", sigma2, correlations.len())
            }
            CovVariant::Arma11 { phi, theta, sigma_e_sq } => {
                format!("ARMA11(phi={}, theta={}, sigma_e_sq={})", phi, theta, sigma_e_sq)
            }
            CovVariant::Inar1Het { lambda, p, psi0 } => {
                format!("INAR1_HET(lambda={}, p={}, psi0={})", lambda, p, psi0)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Covariance assembly
// ---------------------------------------------------------------------------

/// Build the training covariance `Σ_T`, the cross-covariance vector
/// `cross[t] = Cov(Y_{t+1}, Y_{T+1})`, and the means `E[Y_1]..E[Y_{T+1}]`
/// (the returned means vector has length `T + 1`; its last entry is the
/// forecast-period mean).
pub fn build_covariance(model: &CovModel, t: usize) -> Result<(SymMatrix, Vec<f64>, Vec<f64>)> {
    model.validate(t)?;
    let lam = &model.lambdas;

    // Covariance between periods i and j (0-based, 0..=t) per variant.
    let cov: Box<dyn Fn(usize, usize) -> f64> = match &model.variant {
        CovVariant::StaticRe { sigma2, family } => {
            let (s2, fam) = (*sigma2, *family);
            Box::new(move |i, j| {
                let base = lam[i] * lam[j] * s2;
                if i == j {
                    base + fam.q_star(lam[i], s2)
                } else {
                    base
                }
            })
        }
        CovVariant::DynamicAr1 { sigma2, rho, family } => {
            let (s2, r, fam) = (*sigma2, *rho, *family);
            Box::new(move |i, j| {
                let h = i.abs_diff(j);
                let base = lam[i] * lam[j] * s2 * r.powi(h as i32);
                if i == j {
                    base + fam.q_star(lam[i], s2)
                } else {
                    base
                }
            })
        }
        CovVariant::TwoComponent { sigma1_sq, sigma2_sq, rho, psi, variance_fn } => {
            let (s1, s2, r, p, vf) = (*sigma1_sq, *sigma2_sq, *rho, *psi, *variance_fn);
            Box::new(move |i, j| {
                let h = i.abs_diff(j);
                let base = lam[i] * lam[j] * (s1 * r.powi(h as i32) + s2);
                if i == j {
                    // E[V(λ(R_1+R_2))]: the sum has mean 2 and variance σ₁²+σ₂².
                    let ev = match vf {
                        VarianceFn::Identity => 2.0 * lam[i],
                        VarianceFn::Square => lam[i] * lam[i] * (s1 + s2 + 4.0),
                    };
                    base + p * ev
                } else {
                    base
                }
            })
        }
        CovVariant::ArbitraryAcf { sigma2, correlations } => {
            let s2 = *sigma2;
            let rhos = correlations.clone();
            Box::new(move |i, j| {
                let h = i.abs_diff(j);
                if h == 0 {
                    lam[i] * lam[i] * s2 + lam[i]
                } else {
                    lam[i] * lam[j] * s2 * rhos[h - 1]
                }
            })
        }
        CovVariant::Arma11 { phi, theta, sigma_e_sq } => {
            let acf = arma11_acf(*phi, *theta, *sigma_e_sq, t)?;
            Box::new(move |i, j| {
                let h = i.abs_diff(j);
                let gamma =
                    if h == 0 { acf.variance } else { acf.variance * acf.correlations[h - 1] };
                lam[i] * lam[j] * gamma
            })
        }
        CovVariant::Inar1Het { lambda, p, psi0 } => {
            let m = lambda / (1.0 - p);
            let (pp, ps0) = (*p, *psi0);
            Box::new(move |i, j| {
                let h = i.abs_diff(j);
                m * (pp.powi(h as i32) + m * ps0)
            })
        }
    };

    let sigma = SymMatrix::from_fn(t, |i, j| cov(i, j))?;
    let cross: Vec<f64> = (0..t).map(|i| cov(i, t)).collect();

    let mean_scale = match &model.variant {
        CovVariant::TwoComponent { .. } => 2.0,
        _ => 1.0,
    };
    let means: Vec<f64> = match &model.variant {
        CovVariant::Inar1Het { lambda, p, .. } => vec![lambda / (1.0 - p); t + 1],
        _ => lam[..=t].iter().map(|&l| mean_scale * l).collect(),
    };
    Ok((sigma, cross, means))
}

// ---------------------------------------------------------------------------
// Credibility factors
// ---------------------------------------------------------------------------

/// Credibility weights for one model and horizon, with the qualitative flags.
#[derive(Debug, Clone, PartialEq)]
pub struct CredibilityFactors {
    /// Coefficient of `λ_{T+1}` in the premium.
    pub alpha0: f64,
    /// Weights on the raw claims `Y_1..Y_T`.
    pub alpha: Vec<f64>,
    /// Weights on the standardized claims: `alpha_star[t] = λ_t·alpha[t]`.
    pub alpha_star: Vec<f64>,
    /// Every `alpha[t]` positive (up to −1e-12).
    pub regular: bool,
    /// `alpha_star` non-decreasing (per-step slack 1e-12).
    pub isotonic_star: bool,
    /// One-line description of the generating model.
    pub model_echo: String,
}

impl CredibilityFactors {
    fn assemble(
        alpha: Vec<f64>,
        lambdas: &[f64],
        mean_next: f64,
        means: &[f64],
        lambda_next: f64,
        model_echo: String,
    ) -> Self {
        let alpha_star: Vec<f64> = alpha.iter().zip(lambdas).map(|(a, l)| a * l).collect();
        let weighted: f64 = alpha.iter().zip(means).map(|(a, m)| a * m).sum();
        let alpha0 = (mean_next - weighted) / lambda_next;
        let regular = alpha.iter().all(|&a| a > TOL_SIGN);
        let isotonic_star = alpha_star.windows(2).all(|w| w[1] >= w[0] - TOL_STEP);
        CredibilityFactors { alpha0, alpha, alpha_star, regular, isotonic_star, model_echo }
    }

    /// Serialize as JSON with 10-significant-digit numbers, under the keys
    /// `alpha0`, `alpha`, `alpha_star`, `regular`, `isotonic`, `model`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha0": json_num10(self.alpha0),
            "alpha": self.alpha.iter().map(|&a| json_num10(a)).collect::<Vec<_>>(),
            "alpha_star": self.alpha_star.iter().map(|&a| json_num10(a)).collect::<Vec<_>>(),
            "regular": self.regular,
            "isotonic": self.isotonic_star,
            "model": self.model_echo,
        })
    }
}

/// Round to 10 significant digits for JSON output.
pub(crate) fn json_num10(v: f64) -> serde_json::Value {
    let rounded: f64 = format!("{:.9e}", v).parse().unwrap_or(v);
    serde_json::Number::from_f64(rounded).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

/// Solve the credibility normal equations for `model` at horizon `t`.
pub fn credibility_factors(model: &CovModel, t: usize) -> Result<CredibilityFactors> {
    let (sigma, cross, means) = build_covariance(model, t)?;
    let alpha = solve_spd(&sigma, &cross)?;
    Ok(CredibilityFactors::assemble(
        alpha,
        &model.lambdas[..t],
        means[t],
        &means[..t],
        model.lambdas[t],
        model.summary(),
    ))
}

/// Analytic factors for the dynamic-AR(1) model, via the tridiagonal
/// recursions:
///
/// ```text
/// ξ_t = σ²(1−ρ²)λ_t²/q*_t,
/// α*_t = ρ(1−ρ²)σ²λ_{T+1}·(v_T·u_t)·λ_t²/q*_t,
/// ```
///
/// where `v_T·u_t` is the last inverse column of the standardized tridiagonal
/// matrix (computed in a form that stays finite as `ρ → 0`). Agrees with
/// [`credibility_factors`] to 1e-10 over the whole parameter domain.
pub fn closed_form_factors_model1(model: &CovModel, t: usize) -> Result<CredibilityFactors> {
    let (sigma2, rho, family) = match &model.variant {
        CovVariant::DynamicAr1 { sigma2, rho, family } => (*sigma2, *rho, *family),
        other => {
            return Err(Error::InvalidVariant(format!(
                "closed_form_factors_model1 needs DYNAMIC_AR1, got {:?}",
                variant_name(other)
            )))
        }
    };
    model.validate(t)?;
    let lam = &model.lambdas;
    let lambda_next = lam[t];

    let alpha_star: Vec<f64> = if rho == 0.0 || sigma2 == 0.0 {
        // Zero cross-covariance: the past carries no credibility weight.
        vec![0.0; t]
    } else {
        let lam_ratio: Vec<f64> =
            (0..t).map(|i| lam[i] * lam[i] / family.q_star(lam[i], sigma2)).collect();
        let xi: Vec<f64> =
            lam_ratio.iter().map(|&lr| sigma2 * (1.0 - rho * rho) * lr).collect();
        let uv = tridiag_uv(&xi, rho)?;
        let scale = rho * (1.0 - rho * rho) * sigma2 * lambda_next;
        (0..t).map(|i| scale * uv.last_col[i] * lam_ratio[i]).collect()
    };
    let alpha: Vec<f64> = alpha_star.iter().zip(lam).map(|(s, l)| s / l).collect();
    Ok(CredibilityFactors::assemble(
        alpha,
        &lam[..t],
        lambda_next,
        &lam[..t],
        lambda_next,
        model.summary(),
    ))
}

/// Analytic factors for the heterogeneous INAR(1) model with `t ≥ 3` periods:
///
/// ```text
/// b = λψ₀/(1−p),  D = b(t − p(t−2)) + 1 + p,
/// α_1 = b(1−p)/D,  α_j = (1−p)α_1 (j = 2..t−1),  α_t = α_1 + p,
/// α_0 = (1−p²)/D.
/// ```
///
/// The premium intercept in absolute terms is `m·α_0` with `m = λ/(1−p)`.
/// Agrees with `credibility_factors(INAR1_HET)` to 1e-10.
pub fn inar1_closed_form(lambda: f64, p: f64, psi0: f64, t: usize) -> Result<CredibilityFactors> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParams(format!("lambda = {} must be > 0", lambda)));
    }
    if !(p.is_finite() && (0.0..1.0).contains(&p)) {
        return Err(Error::InvalidParams(format!("p = {} must lie in [0, 1)", p)));
    }
    if !(psi0.is_finite() && psi0 > 0.0) {
        return Err(Error::InvalidParams(format!("psi0 = {} must be > 0", psi0)));
    }
    if t < 3 {
        return Err(Error::InvalidParams(format!(
            "INAR(1) closed form needs t >= 3 to distinguish interior periods, got {}",
            t
        )));
    }
    let b = lambda * psi0 / (1.0 - p);
    let d = b * (t as f64 - p * (t as f64 - 2.0)) + 1.0 + p;
    let alpha1 = b * (1.0 - p) / d;
    let mut alpha = vec![(1.0 - p) * alpha1; t];
    alpha[0] = alpha1;
    alpha[t - 1] = alpha1 + p;
    let alpha0 = (1.0 - p * p) / d;

    let m = lambda / (1.0 - p);
    let model = CovModel::inar1_het(lambda, p, psi0, t);
    let alpha_star: Vec<f64> = alpha.iter().map(|a| a * m).collect();
    let regular = alpha.iter().all(|&a| a > TOL_SIGN);
    let isotonic_star = alpha_star.windows(2).all(|w| w[1] >= w[0] - TOL_STEP);
    Ok(CredibilityFactors {
        alpha0,
        alpha,
        alpha_star,
        regular,
        isotonic_star,
        model_echo: model.summary(),
    })
}

fn variant_name(v: &CovVariant) -> &'static str {
    match v {
        CovVariant::StaticRe { .. } => "STATIC_RE",
        CovVariant::DynamicAr1 { .. } => "DYNAMIC_AR1",
        CovVariant::TwoComponent { .. } => "TWO_COMPONENT",
        CovVariant::ArbitraryAcf { .. } => "ARBITRARY_ACF",
        CovVariant::Arma11 { .. } => "ARMA11",
        CovVariant::Inar1Het { .. } => "INAR1_HET",
    }
}

// ---------------------------------------------------------------------------
// Alternative predictors and ACF helpers
// ---------------------------------------------------------------------------

/// Exponential-moving-average predictive mean:
///
/// ```text
/// predict = λ_next · (a₀ + Σ_τ α^{−τ}·y_τ) / (a₀ + Σ_τ α^{−τ}·λ_τ)
/// ```
///
/// The weights on standardized claims form a geometric sequence increasing in
/// recency; `alpha = 1` reduces to the static conjugate form. Internally the
/// ratio is evaluated with weights `α^{t−τ}` to avoid overflowing `α^{−τ}`
/// for long histories.
pub fn harvey_fernandez_predict(
    y: &[f64],
    lambdas: &[f64],
    a0: f64,
    alpha: f64,
    lambda_next: f64,
) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if y.len() != lambdas.len() || y.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "y has {} entries, lambdas has {}; need equal and non-empty",
            y.len(),
            lambdas.len()
        )));
    }
    if !(a0.is_finite() && a0 > 0.0) {
        return Err(Error::InvalidParams(format!("a0 = {} must be > 0", a0)));
    }
    if !(lambda_next.is_finite() && lambda_next > 0.0) {
        return Err(Error::InvalidParams(format!("lambda_next = {} must be > 0", lambda_next)));
    }
    if lambdas.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(Error::InvalidParams("all a-priori means must be > 0".to_string()));
    }
    let t = y.len();
    // Same ratio as with α^{−τ} weights, scaled by α^t.
    let mut num = a0 * alpha.powi(t as i32);
    let mut den = num;
    for tau in 1..=t {
        let w = alpha.powi((t - tau) as i32);
        num += w * y[tau - 1];
        den += w * lambdas[tau - 1];
    }
    Ok(lambda_next * num / den)
}

/// Variance and autocorrelations of the stationary ARMA(1,1) process
/// `Y_t = φY_{t−1} + e_t − θe_{t−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfSpec {
    /// `Var(Y_t) = (1 − 2φθ + θ²)/(1 − φ²)·σ_e²`.
    pub variance: f64,
    /// `correlations[k-1] = Corr(Y_t, Y_{t+k})` for `k = 1..=maxlag`.
    pub correlations: Vec<f64>,
}

/// Autocovariance function of a stationary ARMA(1,1):
/// `Cov(lag 1) = φ·Var − θσ_e²`, and `Cov(lag k) = φ·Cov(lag k−1)` beyond.
pub fn arma11_acf(phi: f64, theta: f64, sigma_e_sq: f64, maxlag: usize) -> Result<AcfSpec> {
    if !(phi.is_finite() && phi.abs() < 1.0) {
        return Err(Error::NonStationary { phi });
    }
    if !(sigma_e_sq.is_finite() && sigma_e_sq > 0.0) {
        return Err(Error::InvalidParams(format!("sigma_e_sq = {} must be > 0", sigma_e_sq)));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidParams(format!("theta = {} must be finite", theta)));
    }
    let variance = (1.0 - 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi) * sigma_e_sq;
    let mut correlations = Vec::with_capacity(maxlag);
    let mut cov = variance;
    for k in 1..=maxlag {
        cov = if k == 1 { phi * variance - theta * sigma_e_sq } else { phi * cov };
        correlations.push(cov / variance);
    }
    Ok(AcfSpec { variance, correlations })
}

// ---------------------------------------------------------------------------
// Qualitative checks
// ---------------------------------------------------------------------------

/// Outcome of the regularity check.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub regular: bool,
    /// 1-based indices of the factors at or below the sign tolerance.
    pub violations: Vec<usize>,
}

/// Regular ⇔ every `α_t > −1e-12`; the report lists the violating periods.
pub fn check_regular(f: &CredibilityFactors) -> RegularityReport {
    let violations: Vec<usize> = f
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a <= TOL_SIGN)
        .map(|(i, _)| i + 1)
        .collect();
    RegularityReport { regular: violations.is_empty(), violations }
}

/// Outcome of the isotonicity check.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicReport {
    pub isotonic: bool,
    /// First period `t` (1-based) with `α*_t > α*_{t+1}`, when any.
    pub first_violation: Option<usize>,
}

/// Positively isotonic ⇔ `α*_1 ≤ … ≤ α*_T` with per-step slack 1e-12.
pub fn check_isotonic(f: &CredibilityFactors) -> IsotonicReport {
    let first_violation = f
        .alpha_star
        .windows(2)
        .position(|w| w[1] < w[0] - TOL_STEP)
        .map(|i| i + 1);
    IsotonicReport { isotonic: first_violation.is_none(), first_violation }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
