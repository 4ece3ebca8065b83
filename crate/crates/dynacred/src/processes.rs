//! Seeded simulators for the latent risk processes and the observation layer.
//!
//! The latent state `(R_t)` is a stationary positive Markov process with unit
//! mean; observations are drawn from an exponential dispersion family with
//! conditional mean `λ_t·R_t`. Four state families are implemented:
//!
//! - **BGAR(1)** — beta-thinned gamma autoregression `R_t = B_t·R_{t−1} + G_t`
//!   with `B_t ~ Beta(γρ, γ(1−ρ))` and `G_t ~ Gamma(γ(1−ρ), rate γ)`, which has
//!   an exact `Gamma(γ, rate γ)` marginal and autocorrelation `ρ^h`.
//! - **ARG(1)** — autoregressive gamma transition sampled by Poisson mixing:
//!   `Z ~ Poisson(ρR_t/c)`, `R_{t+1} ~ Gamma(δ+Z, scale c)`, with stationary
//!   marginal `Gamma(δ, scale c/(1−ρ))` and `E[R_{t+1}|R_t] = ρR_t + cδ`.
//! - **GAR(1)** — Gaver–Lewis recursion `R_{t+1} = ρR_t + ε_{t+1}` with the
//!   innovation chosen so the marginal is `Gamma(shape, rate)`; the general
//!   shape uses a compound-Poisson representation (see [`simulate_gar1`]).
//! - **CONSTANT** — the static random effect `R_t ≡ R_0` (the `ρ = 1` limit).
//!
//! plus a heterogeneous INAR(1) count simulator (binomial thinning with a
//! gamma-distributed intensity) and the panel generator that combines
//! covariates, a state path and an observation family into a [`ClaimPanel`].
//!
//! All simulators are pure functions of `(spec, seed)`: identical inputs give
//! bit-identical output. Panel generation derives one RNG stream per policy
//! from `(master seed, policy index)`, so per-policy work could be farmed out
//! to threads without changing the result.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution, Exp, Gamma, Normal, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Name of the RNG recorded in panel metadata; one seedable generator with a
/// separate stream per policy.
pub const RNG_ALGORITHM: &str = "chacha12";

// ---------------------------------------------------------------------------
// Exponential dispersion family
// ---------------------------------------------------------------------------

/// Which unit variance function the observation family uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EdKind {
    /// `V(u) = u`; dispersion fixed at 1.
    Poisson,
    /// `V(u) = u²`; free dispersion `psi`.
    Gamma,
}

/// Observation family: Poisson counts or gamma severities, with conditional
/// mean `λ·R` and dispersion `psi` (`Var(Y|R) = psi·V(λR)`).
///
/// The gamma parameterization bridge used everywhere in this crate: a gamma
/// variable with mean `m` and variance `m²ψ` has shape `1/ψ` and scale `mψ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EdFamily {
    kind: EdKind,
    psi: f64,
}

impl EdFamily {
    /// Poisson family; the dispersion is identically 1.
    pub fn poisson() -> Self {
        EdFamily { kind: EdKind::Poisson, psi: 1.0 }
    }

    /// Gamma family with dispersion `psi > 0`.
    pub fn gamma(psi: f64) -> Result<Self> {
        if !(psi.is_finite() && psi > 0.0) {
            return Err(Error::InvalidParams(format!("gamma dispersion psi = {} must be > 0", psi)));
        }
        Ok(EdFamily { kind: EdKind::Gamma, psi })
    }

    pub fn kind(&self) -> EdKind {
        self.kind
    }

    /// Dispersion `psi` (1 for Poisson by construction).
    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// `E[V(λR)]` for a unit-mean effect `R` with variance `sigma2`:
    /// `λ` for the identity variance function, `λ²(1+σ²)` for the square.
    pub fn e_v_lambda_r(&self, lambda: f64, sigma2: f64) -> f64 {
        match self.kind {
            EdKind::Poisson => lambda,
            EdKind::Gamma => lambda * lambda * (1.0 + sigma2),
        }
    }

    /// Conditional-variance scale `q*_t = psi·E[V(λ_t R_t)]`.
    pub fn q_star(&self, lambda: f64, sigma2: f64) -> f64 {
        self.psi * self.e_v_lambda_r(lambda, sigma2)
    }

    /// Draw one observation with conditional mean `mean`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        match self.kind {
            EdKind::Poisson => sample_poisson(mean, rng) as f64,
            EdKind::Gamma => {
                // mean m, variance m²ψ  →  shape 1/ψ, scale mψ.
                let shape = 1.0 / self.psi;
                let scale = mean * self.psi;
                Gamma::new(shape, scale).expect("validated parameters").sample(rng)
            }
        }
    }

    /// Log density (gamma) or log mass (Poisson) of `y` at conditional mean
    /// `mean`; used by the particle filter weights.
    pub fn log_density(&self, y: f64, mean: f64) -> f64 {
        if mean <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            EdKind::Poisson => y * mean.ln() - mean - ln_gamma(y + 1.0),
            EdKind::Gamma => {
                if y <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let shape = 1.0 / self.psi;
                let scale = mean * self.psi;
                -ln_gamma(shape) - shape * scale.ln() + (shape - 1.0) * y.ln() - y / scale
            }
        }
    }
}

impl std::fmt::Display for EdFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            EdKind::Poisson => write!(f, "POISSON"),
            EdKind::Gamma => write!(f, "GAMMA(psi={})", self.psi),
        }
    }
}

/// Poisson draw that tolerates a zero mean (rand_distr rejects λ = 0).
fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Gamma draw with unit mean and variance `sigma2` (shape `1/σ²`, rate `1/σ²`);
/// `sigma2 = 0` degenerates to the constant 1.
fn sample_unit_gamma<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> f64 {
    if sigma2 == 0.0 {
        return 1.0;
    }
    let gamma = 1.0 / sigma2;
    Gamma::new(gamma, 1.0 / gamma).expect("positive shape").sample(rng)
}

// ---------------------------------------------------------------------------
// State processes
// ---------------------------------------------------------------------------

/// Tag for which latent family generated a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StateFamily {
    Bgar1,
    Arg1,
    Gar1,
    Iid,
    Constant,
}

/// A simulated latent trajectory `R_0..R_T` with generator metadata.
#[derive(Debug, Clone)]
pub struct StatePath {
    /// `values[t] = R_t` for `t = 0..=T`; all strictly positive.
    pub values: Vec<f64>,
    /// Which family produced the path.
    pub family: StateFamily,
    /// Family-specific parameters, in the order of the simulator signature.
    pub params: Vec<f64>,
    /// Seed the path was drawn with.
    pub seed: u64,
}

/// Simulable specification of a latent state process; this is what the panel
/// generator and the particle filter share.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum StateSpec {
    /// Beta-thinned gamma AR(1) with unit mean, variance `sigma2`,
    /// autocorrelation `rho ∈ [0, 1]` (`rho = 1` degenerates to `Constant`).
    Bgar1 { sigma2: f64, rho: f64 },
    /// Autoregressive gamma: `rho ∈ [0, 1)`, scale `c > 0`, shape `delta > 0`.
    Arg1 { rho: f64, c: f64, delta: f64 },
    /// Gaver–Lewis gamma AR(1) with marginal `Gamma(shape, rate)`, `rho ∈ (0,1)`.
    Gar1 { shape: f64, rate: f64, rho: f64 },
    /// Independent unit-mean gamma effects with variance `sigma2` each period.
    Iid { sigma2: f64 },
    /// Static random effect: one unit-mean gamma draw shared by all periods.
    Constant { sigma2: f64 },
}

impl StateSpec {
    /// Validate the parameter domains.
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Bgar1 { sigma2, rho } => {
                if !(sigma2.is_finite() && sigma2 > 0.0) {
                    return Err(Error::InvalidParams(format!("BGAR(1) sigma2 = {} must be > 0", sigma2)));
                }
                if !(rho.is_finite() && (0.0..=1.0).contains(&rho)) {
                    return Err(Error::InvalidRho(rho));
                }
            }
            StateSpec::Arg1 { rho, c, delta } => {
                if !(rho.is_finite() && (0.0..1.0).contains(&rho)) {
                    return Err(Error::InvalidRho(rho));
                }
                if !(c.is_finite() && c > 0.0 && delta.is_finite() && delta > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "ARG(1) needs c > 0 and delta > 0, got c = {}, delta = {}",
                        c, delta
                    )));
                }
            }
            StateSpec::Gar1 { shape, rate, rho } => {
                if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "GAR(1) needs shape > 0 and rate > 0, got shape = {}, rate = {}",
                        shape, rate
                    )));
                }
                if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
                    return Err(Error::InvalidRho(rho));
                }
            }
            StateSpec::Iid { sigma2 } | StateSpec::Constant { sigma2 } => {
                if !(sigma2.is_finite() && sigma2 >= 0.0) {
                    return Err(Error::InvalidParams(format!("sigma2 = {} must be >= 0", sigma2)));
                }
            }
        }
        Ok(())
    }

    /// Draw from the stationary marginal.
    pub fn stationary_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            StateSpec::Bgar1 { sigma2, .. }
            | StateSpec::Iid { sigma2 }
            | StateSpec::Constant { sigma2 } => sample_unit_gamma(sigma2, rng),
            StateSpec::Arg1 { rho, c, delta } => {
                Gamma::new(delta, c / (1.0 - rho)).expect("validated parameters").sample(rng)
            }
            StateSpec::Gar1 { shape, rate, .. } => {
                Gamma::new(shape, 1.0 / rate).expect("validated parameters").sample(rng)
            }
        }
    }

    /// One Markov transition from `r`.
    pub fn transition<R: Rng + ?Sized>(&self, r: f64, rng: &mut R) -> f64 {
        match *self {
            StateSpec::Bgar1 { sigma2, rho } => {
                if rho >= 1.0 {
                    return r; // static limit
                }
                let gamma = 1.0 / sigma2;
                let innovation =
                    Gamma::new(gamma * (1.0 - rho), 1.0 / gamma).expect("validated").sample(rng);
                if rho == 0.0 {
                    // Beta(0, ·) is degenerate at 0: the thinned part vanishes.
                    innovation
                } else {
                    let b = Beta::new(gamma * rho, gamma * (1.0 - rho)).expect("validated").sample(rng);
                    b * r + innovation
                }
            }
            StateSpec::Arg1 { rho, c, delta } => {
                let z = sample_poisson(rho * r / c, rng) as f64;
                Gamma::new(delta + z, c).expect("validated").sample(rng)
            }
            StateSpec::Gar1 { shape, rate, rho } => {
                // Compound-Poisson innovation: N ~ Poisson(shape·ln(1/rho)),
                // eps = Σ W_i·rho^{U_i} with W ~ Exp(rate), U ~ Uniform(0,1).
                // Its Laplace transform is ((rate + s·rho)/(rate + s))^shape,
                // exactly what keeps the Gamma(shape, rate) marginal invariant.
                let n = sample_poisson(shape * (1.0 / rho).ln(), rng);
                let exp = Exp::new(rate).expect("validated");
                let mut eps = 0.0;
                for _ in 0..n {
                    let w: f64 = exp.sample(rng);
                    let u: f64 = rng.gen();
                    eps += w * rho.powf(u);
                }
                rho * r + eps
            }
            StateSpec::Iid { sigma2 } => sample_unit_gamma(sigma2, rng),
            StateSpec::Constant { .. } => r,
        }
    }

    /// Stationary mean of the process (1 for the unit-mean families).
    pub fn mean(&self) -> f64 {
        match *self {
            StateSpec::Bgar1 { .. } | StateSpec::Iid { .. } | StateSpec::Constant { .. } => 1.0,
            StateSpec::Arg1 { rho, c, delta } => delta * c / (1.0 - rho),
            StateSpec::Gar1 { shape, rate, .. } => shape / rate,
        }
    }

    fn family_tag(&self) -> StateFamily {
        match self {
            StateSpec::Bgar1 { rho, .. } if *rho >= 1.0 => StateFamily::Constant,
            StateSpec::Bgar1 { .. } => StateFamily::Bgar1,
            StateSpec::Arg1 { .. } => StateFamily::Arg1,
            StateSpec::Gar1 { .. } => StateFamily::Gar1,
            StateSpec::Iid { .. } => StateFamily::Iid,
            StateSpec::Constant { .. } => StateFamily::Constant,
        }
    }

    fn params_vec(&self) -> Vec<f64> {
        match *self {
            StateSpec::Bgar1 { sigma2, rho } => vec![sigma2, rho],
            StateSpec::Arg1 { rho, c, delta } => vec![rho, c, delta],
            StateSpec::Gar1 { shape, rate, rho } => vec![shape, rate, rho],
            StateSpec::Iid { sigma2 } | StateSpec::Constant { sigma2 } => vec![sigma2],
        }
    }

    /// Simulate `R_0..R_T` with the given seed.
    pub fn simulate(&self, t: usize, seed: u64) -> Result<StatePath> {
        self.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let path = self.sample_path(t, &mut rng);
        Ok(StatePath { values: path, family: self.family_tag(), params: self.params_vec(), seed })
    }

    /// Draw `R_0..R_T` from an already-positioned RNG stream.
    pub fn sample_path<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Vec<f64> {
        let mut values = Vec::with_capacity(t + 1);
        let mut r = self.stationary_draw(rng);
        values.push(r);
        for _ in 0..t {
            r = self.transition(r, rng);
            values.push(r);
        }
        values
    }
}

/// Simulate a BGAR(1) path `R_0..R_T` (unit mean, variance `sigma2`,
/// autocorrelation `rho^h`). `rho = 1` returns the `Constant` family: one
/// draw shared by all periods, which is the static-random-effects limit that
/// the Beta parameterization itself cannot represent.
pub fn simulate_bgar1(sigma2: f64, rho: f64, t: usize, seed: u64) -> Result<StatePath> {
    StateSpec::Bgar1 { sigma2, rho }.simulate(t, seed)
}

/// Simulate an ARG(1) path with stationary marginal `Gamma(delta, scale c/(1−rho))`
/// and conditional mean `E[R_{t+1}|R_t] = rho·R_t + c·delta`.
pub fn simulate_arg1(rho: f64, c: f64, delta: f64, t: usize, seed: u64) -> Result<StatePath> {
    StateSpec::Arg1 { rho, c, delta }.simulate(t, seed)
}

/// Simulate a Gaver–Lewis GAR(1) path with marginal `Gamma(shape, rate)`.
///
/// For `shape = 1` the innovation is the classical "zero with probability
/// rho, else Exp(rate)" mixture; the compound-Poisson sampler used here
/// reproduces that as a special case and extends it to any positive shape.
pub fn simulate_gar1(shape: f64, rate: f64, rho: f64, t: usize, seed: u64) -> Result<StatePath> {
    StateSpec::Gar1 { shape, rate, rho }.simulate(t, seed)
}

// ---------------------------------------------------------------------------
// Heterogeneous INAR(1) counts
// ---------------------------------------------------------------------------

/// Simulate `T` periods of the heterogeneous INAR(1) count process:
/// a single intensity `R ~ Gamma(mean 1, variance psi0)` per path, then
///
/// ```text
/// Y_1 ~ Poisson(λR/(1−p)),   Y_t = Binomial(Y_{t−1}, p) + Poisson(λR)
/// ```
///
/// which keeps `(Y_t)` stationary with mean `λ/(1−p)` given `R`.
pub fn simulate_inar1_het(lambda: f64, p: f64, psi0: f64, t: usize, seed: u64) -> Result<Vec<u64>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParams(format!("INAR(1) lambda = {} must be > 0", lambda)));
    }
    if !(p.is_finite() && (0.0..1.0).contains(&p)) {
        return Err(Error::InvalidParams(format!("INAR(1) p = {} must lie in [0, 1)", p)));
    }
    if !(psi0.is_finite() && psi0 >= 0.0) {
        return Err(Error::InvalidParams(format!("INAR(1) psi0 = {} must be >= 0", psi0)));
    }
    if t == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let r = sample_unit_gamma(psi0, &mut rng);
    let arrival_mean = lambda * r;
    let mut ys = Vec::with_capacity(t);
    let mut y = sample_poisson(arrival_mean / (1.0 - p), &mut rng);
    ys.push(y);
    for _ in 1..t {
        let kept = if p == 0.0 || y == 0 {
            0
        } else {
            rand_distr::Binomial::new(y, p).expect("validated").sample(&mut rng)
        };
        y = kept + sample_poisson(arrival_mean, &mut rng);
        ys.push(y);
    }
    Ok(ys)
}

// ---------------------------------------------------------------------------
// Claim panels
// ---------------------------------------------------------------------------

/// One longitudinal record of a policy-period.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRecord {
    pub policy_id: String,
    /// Period index, 1-based and consecutive within a policy.
    pub period: u32,
    /// A-priori mean for the period (claims/period), strictly positive.
    pub lambda: f64,
    /// Observed claim statistic (a count for Poisson, a severity for gamma).
    pub y: f64,
    /// Covariates `x1..xk` (excluding the intercept), possibly empty.
    pub covariates: Vec<f64>,
    /// Latent `R_t` when the record comes from simulation.
    pub true_r: Option<f64>,
}

/// A longitudinal claims panel: records grouped by policy, periods
/// consecutive from 1 within each policy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClaimPanel {
    pub records: Vec<PanelRecord>,
    /// RNG algorithm used to generate the panel, when simulated.
    pub generator: Option<String>,
}

/// Covariate-generating law for the panel simulator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum CovariateLaw {
    /// Independent normals, one per non-intercept coefficient per period.
    Normal { mean: f64, variance: f64 },
}

impl Default for CovariateLaw {
    /// The evaluation scheme's default: `N(0, 0.6)`.
    fn default() -> Self {
        CovariateLaw::Normal { mean: 0.0, variance: 0.6 }
    }
}

impl ClaimPanel {
    /// Validate the panel invariants: non-empty policies, consecutive periods
    /// starting at 1, strictly positive lambdas, finite claims.
    pub fn validate(&self) -> Result<()> {
        let mut last: Option<(&str, u32)> = None;
        for rec in &self.records {
            if !(rec.lambda.is_finite() && rec.lambda > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "policy '{}' period {}: lambda = {} must be > 0",
                    rec.policy_id, rec.period, rec.lambda
                )));
            }
            if !rec.y.is_finite() || rec.y < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "policy '{}' period {}: y = {} must be finite and >= 0",
                    rec.policy_id, rec.period, rec.y
                )));
            }
            match last {
                Some((id, p)) if id == rec.policy_id => {
                    if rec.period != p + 1 {
                        return Err(Error::Parse(format!(
                            "policy '{}': period {} follows {}, expected consecutive",
                            rec.policy_id, rec.period, p
                        )));
                    }
                }
                _ => {
                    if rec.period != 1 {
                        return Err(Error::Parse(format!(
                            "policy '{}': first period is {}, expected 1",
                            rec.policy_id, rec.period
                        )));
                    }
                }
            }
            last = Some((&rec.policy_id, rec.period));
        }
        Ok(())
    }

    /// Group records by policy, preserving record order. Each item is the
    /// slice of consecutive records for one policy.
    pub fn policies(&self) -> Vec<&[PanelRecord]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.records.len() {
            if i == self.records.len() || self.records[i].policy_id != self.records[start].policy_id
            {
                out.push(&self.records[start..i]);
                start = i;
            }
        }
        out
    }

    /// Largest period present (0 for an empty panel).
    pub fn max_period(&self) -> u32 {
        self.records.iter().map(|r| r.period).max().unwrap_or(0)
    }

    /// True when every record carries a simulated latent value.
    pub fn has_truth(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.true_r.is_some())
    }

    /// Number of covariate columns (0 when the panel has none).
    pub fn n_covariates(&self) -> usize {
        self.records.first().map_or(0, |r| r.covariates.len())
    }

    /// Serialize to CSV with header `policy_id,period,lambda,y,true_r` plus
    /// covariate columns `x1..xk`; floats carry 12 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let k = self.n_covariates();
        let mut header = vec![
            "policy_id".to_string(),
            "period".to_string(),
            "lambda".to_string(),
            "y".to_string(),
            "true_r".to_string(),
        ];
        for j in 1..=k {
            header.push(format!("x{}", j));
        }
        w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for rec in &self.records {
            if rec.covariates.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "policy '{}' period {}: {} covariates, expected {}",
                    rec.policy_id,
                    rec.period,
                    rec.covariates.len(),
                    k
                )));
            }
            let mut row = vec![
                rec.policy_id.clone(),
                rec.period.to_string(),
                fmt_sig12(rec.lambda),
                fmt_sig12(rec.y),
                rec.true_r.map(fmt_sig12).unwrap_or_default(),
            ];
            for &x in &rec.covariates {
                row.push(fmt_sig12(x));
            }
            w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Write the CSV to a file path.
    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }

    /// Parse a panel from CSV in the [`ClaimPanel::write_csv`] format.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let expect = ["policy_id", "period", "lambda", "y", "true_r"];
        if headers.len() < expect.len()
            || !expect.iter().enumerate().all(|(i, e)| headers.get(i) == Some(e))
        {
            return Err(Error::Parse(format!(
                "panel CSV header must start with {:?}, got {:?}",
                expect, headers
            )));
        }
        let k = headers.len() - expect.len();
        let mut records = Vec::new();
        for (line, row) in r.records().enumerate() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            let field = |i: usize| -> Result<&str> {
                row.get(i).ok_or_else(|| Error::Parse(format!("row {}: missing field {}", line + 2, i)))
            };
            let parse_f64 = |s: &str, name: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {}: cannot parse {} = '{}'", line + 2, name, s))
                })
            };
            let true_r_raw = field(4)?.trim();
            let mut covariates = Vec::with_capacity(k);
            for j in 0..k {
                covariates.push(parse_f64(field(5 + j)?, &format!("x{}", j + 1))?);
            }
            records.push(PanelRecord {
                policy_id: field(0)?.to_string(),
                period: field(1)?.trim().parse().map_err(|_| {
                    Error::Parse(format!("row {}: cannot parse period '{}'", line + 2, field(1).unwrap_or("")))
                })?,
                lambda: parse_f64(field(2)?, "lambda")?,
                y: parse_f64(field(3)?, "y")?,
                covariates,
                true_r: if true_r_raw.is_empty() { None } else { Some(parse_f64(true_r_raw, "true_r")?) },
            });
        }
        let panel = ClaimPanel { records, generator: None };
        panel.validate()?;
        Ok(panel)
    }

    /// Read a panel CSV from a file path.
    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }
}

/// Format with 12 significant digits (scientific), the panel CSV contract.
pub fn fmt_sig12(v: f64) -> String {
    format!("{:.11e}", v)
}

/// Simulate a longitudinal claim panel: per policy a latent path from
/// `state`, per period fresh covariates from `covariate_law`, a-priori mean
/// `λ_it = exp(βᵀx_it)` with `x_it = (1, covariates)`, and an observation
/// from `family` with conditional mean `λ_it·R_it`.
///
/// `t` training periods plus one extra period are generated; the final
/// period (`t + 1`) is the out-of-sample holdout. Latent values are recorded
/// in `true_r`. Policy `i` draws from RNG stream `i` of the master seed, so
/// the panel is reproducible record-for-record regardless of scheduling.
pub fn simulate_panel(
    n_policies: usize,
    t: usize,
    state: &StateSpec,
    family: &EdFamily,
    beta: &[f64],
    covariate_law: &CovariateLaw,
    seed: u64,
) -> Result<ClaimPanel> {
    state.validate()?;
    if n_policies == 0 || t == 0 {
        return Err(Error::InvalidParams(
            "simulate_panel: need at least one policy and one period".to_string(),
        ));
    }
    if beta.is_empty() {
        return Err(Error::InvalidParams("simulate_panel: beta must include an intercept".to_string()));
    }
    let CovariateLaw::Normal { mean, variance } = *covariate_law;
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::InvalidParams(format!("covariate variance = {} must be >= 0", variance)));
    }
    let normal = Normal::new(mean, variance.sqrt())
        .map_err(|e| Error::InvalidParams(format!("covariate law: {}", e)))?;
    let k = beta.len() - 1;
    let width = (n_policies as f64).log10().ceil().max(1.0) as usize;

    let mut records = Vec::with_capacity(n_policies * (t + 1));
    for i in 0..n_policies {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let path = state.sample_path(t + 1, &mut rng);
        let policy_id = format!("P{:0width$}", i + 1, width = width);
        for period in 1..=(t + 1) {
            let covariates: Vec<f64> = (0..k).map(|_| normal.sample(&mut rng)).collect();
            let eta = beta[0] + beta[1..].iter().zip(&covariates).map(|(b, x)| b * x).sum::<f64>();
            let lambda = eta.exp();
            let r = path[period];
            let y = family.sample(lambda * r, &mut rng);
            records.push(PanelRecord {
                policy_id: policy_id.clone(),
                period: period as u32,
                lambda,
                y,
                covariates,
                true_r: Some(r),
            });
        }
    }
    Ok(ClaimPanel { records, generator: Some(RNG_ALGORITHM.to_string()) })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
