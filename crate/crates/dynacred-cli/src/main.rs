//! `dynacred` — batch front door for the credibility library.
//!
//! Five subcommands: `factors` (credibility factors for a model config),
//! `tables` (built-in golden factor tables), `simulate` (claims panels),
//! `evaluate` (premium comparison with holdout copies), and `fit` (Poisson
//! GLM + moment estimates).  Model specifications live in TOML config files;
//! flags cover paths, seeds, and output locations.  The seed precedence is
//! `--seed` flag, then the `DYNACRED_SEED` environment variable, then the
//! config file, then 0.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::fs;
use std::path::{Path, PathBuf};

use dynacred::credibility::{
    credibility_factors, CovModel, CredibilityFactors, VarianceFn,
};
use dynacred::glm::{fit_poisson, predict_lambda};
use dynacred::premiums::{
    evaluate, EvalConfig, Method, StaticSigmaMode, DEFAULT_COPIES, DEFAULT_PARTICLES,
};
use dynacred::processes::{
    simulate_panel, ClaimPanel, CovariateLaw, EdFamily, StateSpec,
};

const SEED_ENV: &str = "DYNACRED_SEED";

#[derive(Parser)]
#[command(name = "dynacred")]
#[command(about = "Credibility factors and premium experiments for dynamic random-effects ratemaking")]
#[command(version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute credibility factors for the model in a config file.
    Factors(FactorsArgs),
    /// Write one of the built-in golden factor tables as CSV.
    Tables(TablesArgs),
    /// Simulate a claims panel and write it as CSV.
    Simulate(SimulateArgs),
    /// Price a panel under several methods and score against holdout copies.
    Evaluate(EvaluateArgs),
    /// Fit the Poisson GLM and moment estimates on a panel.
    Fit(FitArgs),
}

#[derive(Args)]
struct FactorsArgs {
    /// TOML config with a [model] block.
    #[arg(long)]
    config: PathBuf,
    /// Write the factors as JSON to this path.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    /// Table id: two-component | poisson-std | poisson-nonstd | gamma-both |
    /// semiparametric | arma-remark.
    #[arg(long)]
    id: String,
    /// Directory the CSV is written into (created if missing).
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config describing the panel (size, state process, family, beta).
    #[arg(long)]
    config: PathBuf,
    /// Output panel CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Seed override (wins over DYNACRED_SEED and the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// TOML config with methods, copies, and estimation toggles.
    #[arg(long)]
    config: PathBuf,
    /// Panel CSV (training periods + one holdout period with true_r).
    #[arg(long)]
    panel: PathBuf,
    /// Directory for premiums.csv and summary.json (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    /// Seed override (wins over DYNACRED_SEED and the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FitArgs {
    /// TOML config with the observation family block.
    #[arg(long)]
    config: PathBuf,
    /// Panel CSV to fit on.
    #[arg(long)]
    panel: PathBuf,
    /// Write the fit + moment estimates as JSON to this path.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Factors(args) => cmd_factors(args),
        Command::Tables(args) => cmd_tables(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Fit(args) => cmd_fit(args),
    };
    if let Err(err) = result {
        eprintln!("error: {:#}", err);
        std::process::exit(1);
    }
}

/// Seed precedence: flag, then DYNACRED_SEED, then config, then 0.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var(SEED_ENV) {
        return raw
            .trim()
            .parse::<u64>()
            .with_context(|| format!("{} must be a non-negative integer, got '{}'", SEED_ENV, raw));
    }
    Ok(config.unwrap_or(0))
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

// ---------------------------------------------------------------------------
// config blocks
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyBlock {
    kind: String,
    psi: Option<f64>,
}

impl FamilyBlock {
    fn build(&self) -> Result<EdFamily> {
        match self.kind.to_ascii_uppercase().as_str() {
            "POISSON" => {
                if self.psi.is_some() {
                    bail!("family POISSON has unit dispersion; drop the psi field");
                }
                Ok(EdFamily::poisson())
            }
            "GAMMA" => {
                let psi = self.psi.ok_or_else(|| anyhow!("family GAMMA needs a psi field"))?;
                Ok(EdFamily::gamma(psi)?)
            }
            other => bail!("unknown family kind '{}' (POISSON or GAMMA)", other),
        }
    }
}

fn default_family() -> EdFamily {
    EdFamily::poisson()
}

#[derive(Debug, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
enum ModelBlock {
    #[serde(rename = "STATIC_RE")]
    StaticRe {
        sigma2: f64,
        lambdas: Vec<f64>,
        family: Option<FamilyBlock>,
    },
    #[serde(rename = "DYNAMIC_AR1")]
    DynamicAr1 {
        sigma2: f64,
        rho: f64,
        lambdas: Vec<f64>,
        family: Option<FamilyBlock>,
    },
    #[serde(rename = "TWO_COMPONENT")]
    TwoComponent {
        sigma1_sq: f64,
        sigma2_sq: f64,
        rho: f64,
        psi: f64,
        variance_fn: String,
        lambdas: Vec<f64>,
    },
    #[serde(rename = "ARBITRARY_ACF")]
    ArbitraryAcf {
        sigma2: f64,
        correlations: Vec<f64>,
        lambdas: Vec<f64>,
    },
    #[serde(rename = "ARMA11")]
    Arma11 {
        phi: f64,
        theta: f64,
        sigma_e_sq: f64,
        lambdas: Vec<f64>,
    },
    #[serde(rename = "INAR1_HET")]
    Inar1Het { lambda: f64, p: f64, psi0: f64, t: usize },
}

impl ModelBlock {
    /// Build the covariance model and the default horizon (experience
    /// periods) implied by the block.
    fn build(self) -> Result<(CovModel, usize)> {
        let horizon = |lambdas: &[f64]| -> Result<usize> {
            if lambdas.len() < 2 {
                bail!("lambdas must list T experience means plus the forecast mean");
            }
            Ok(lambdas.len() - 1)
        };
        match self {
            ModelBlock::StaticRe { sigma2, lambdas, family } => {
                let t = horizon(&lambdas)?;
                let fam = family.map(|f| f.build()).transpose()?.unwrap_or_else(default_family);
                Ok((CovModel::static_re_with_family(sigma2, fam, lambdas), t))
            }
            ModelBlock::DynamicAr1 { sigma2, rho, lambdas, family } => {
                let t = horizon(&lambdas)?;
                let fam = family.map(|f| f.build()).transpose()?.unwrap_or_else(default_family);
                Ok((CovModel::dynamic_ar1(sigma2, rho, fam, lambdas), t))
            }
            ModelBlock::TwoComponent { sigma1_sq, sigma2_sq, rho, psi, variance_fn, lambdas } => {
                let t = horizon(&lambdas)?;
                let vf = VarianceFn::parse(&variance_fn)?;
                Ok((CovModel::two_component(sigma1_sq, sigma2_sq, rho, psi, vf, lambdas), t))
            }
            ModelBlock::ArbitraryAcf { sigma2, correlations, lambdas } => {
                let t = horizon(&lambdas)?;
                Ok((CovModel::arbitrary_acf(sigma2, correlations, lambdas), t))
            }
            ModelBlock::Arma11 { phi, theta, sigma_e_sq, lambdas } => {
                let t = horizon(&lambdas)?;
                Ok((CovModel::arma11(phi, theta, sigma_e_sq, lambdas), t))
            }
            ModelBlock::Inar1Het { lambda, p, psi0, t } => {
                Ok((CovModel::inar1_het(lambda, p, psi0, t), t))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorsConfig {
    /// Number of experience periods; defaults to len(lambdas) - 1.
    t: Option<usize>,
    model: ModelBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateBlock {
    family: String,
    sigma2: Option<f64>,
    rho: Option<f64>,
    c: Option<f64>,
    delta: Option<f64>,
    shape: Option<f64>,
    rate: Option<f64>,
}

impl StateBlock {
    fn build(&self) -> Result<StateSpec> {
        let need = |v: Option<f64>, name: &str, fam: &str| {
            v.ok_or_else(|| anyhow!("state family {} needs a {} field", fam, name))
        };
        let spec = match self.family.to_ascii_uppercase().as_str() {
            "BGAR1" => StateSpec::Bgar1 {
                sigma2: need(self.sigma2, "sigma2", "BGAR1")?,
                rho: need(self.rho, "rho", "BGAR1")?,
            },
            "ARG1" => StateSpec::Arg1 {
                rho: need(self.rho, "rho", "ARG1")?,
                c: need(self.c, "c", "ARG1")?,
                delta: need(self.delta, "delta", "ARG1")?,
            },
            "GAR1" => StateSpec::Gar1 {
                shape: need(self.shape, "shape", "GAR1")?,
                rate: need(self.rate, "rate", "GAR1")?,
                rho: need(self.rho, "rho", "GAR1")?,
            },
            "IID" => StateSpec::Iid { sigma2: need(self.sigma2, "sigma2", "IID")? },
            "CONSTANT" => StateSpec::Constant { sigma2: need(self.sigma2, "sigma2", "CONSTANT")? },
            other => bail!("unknown state family '{}' (BGAR1, ARG1, GAR1, IID, CONSTANT)", other),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovariateBlock {
    mean: f64,
    variance: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    n_policies: usize,
    /// Experience periods; the panel gets t+1 periods (the last is held out).
    t: usize,
    seed: Option<u64>,
    /// Regression coefficients, intercept first.
    beta: Vec<f64>,
    covariates: Option<CovariateBlock>,
    state: StateBlock,
    family: Option<FamilyBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SigmaModeField {
    Name(String),
    Value(f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HarveyBlock {
    a0: f64,
    alpha: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluateConfig {
    methods: Vec<String>,
    n_copies: Option<usize>,
    seed: Option<u64>,
    n_particles: Option<usize>,
    /// "refit-static" (default), "reuse-dynamic", or a fixed number.
    static_sigma: Option<SigmaModeField>,
    family: Option<FamilyBlock>,
    harvey: Option<HarveyBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    family: Option<FamilyBlock>,
    /// Drop each policy's last period before fitting (treat it as holdout).
    #[serde(default)]
    drop_last_period: bool,
}

// ---------------------------------------------------------------------------
// factors
// ---------------------------------------------------------------------------

fn cmd_factors(args: FactorsArgs) -> Result<()> {
    let config: FactorsConfig = read_toml(&args.config)?;
    let (model, default_t) = config.model.build()?;
    let t = config.t.unwrap_or(default_t);
    let factors = credibility_factors(&model, t)?;
    print_factors(&factors);
    if let Some(path) = args.json_out {
        let json = serde_json::to_string_pretty(&factors.to_json())?;
        fs::write(&path, json.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_factors(f: &CredibilityFactors) {
    println!("model: {}", f.model_echo);
    println!("alpha0: {}", sig10(f.alpha0));
    println!("alpha:      {}", f.alpha.iter().map(|&a| sig10(a)).collect::<Vec<_>>().join(" "));
    println!(
        "alpha (x1e-3):      {}",
        f.alpha.iter().map(|&a| format!("{:.3}", a * 1e3)).collect::<Vec<_>>().join(" ")
    );
    println!(
        "alpha_star (x1e-3): {}",
        f.alpha_star.iter().map(|&a| format!("{:.3}", a * 1e3)).collect::<Vec<_>>().join(" ")
    );
    println!("regular: {}", yesno(f.regular));
    println!("isotonic: {}", yesno(f.isotonic_star));
}

fn sig10(v: f64) -> String {
    let rounded: f64 = format!("{:.9e}", v).parse().unwrap_or(v);
    format!("{}", rounded)
}

fn yesno(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// ---------------------------------------------------------------------------
// tables
// ---------------------------------------------------------------------------

fn cmd_tables(args: TablesArgs) -> Result<()> {
    let id = args.id.trim().to_ascii_lowercase();
    let csv = match id.as_str() {
        "two-component" => table_two_component()?,
        "poisson-std" => table_poisson(true)?,
        "poisson-nonstd" => table_poisson(false)?,
        "gamma-both" => table_gamma_both()?,
        "semiparametric" => table_semiparametric()?,
        "arma-remark" => table_arma_remark()?,
        other => return Err(dynacred::Error::UnknownTable(other.to_string()).into()),
    };
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let path = args.out_dir.join(format!("{}.csv", id));
    fs::write(&path, csv.as_bytes()).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn lam_flat() -> Vec<f64> {
    vec![1.0; 6]
}

fn lam_up(lambda6: f64) -> Vec<f64> {
    vec![0.001, 0.01, 0.1, 1.0, 10.0, lambda6]
}

fn lam_down(lambda6: f64) -> Vec<f64> {
    vec![10.0, 1.0, 0.1, 0.01, 0.001, lambda6]
}

fn lam_label(lambdas: &[f64]) -> String {
    lambdas[..lambdas.len() - 1]
        .iter()
        .map(|l| format!("{}", l))
        .collect::<Vec<_>>()
        .join(";")
}

/// Factor table of the two-component counter-example: sigma1^2 = 1,
/// rho = 0.8, identity variance function, lambda = 1, T = 5; scenarios vary
/// (psi, sigma2^2).  Values printed at 3 decimals like the source table.
fn table_two_component() -> Result<String> {
    let scenarios: [(&str, f64, f64); 4] =
        [("I", 0.01, 1.0), ("II", 0.1, 1.0), ("III", 1.0, 1.0), ("IV", 0.1, 0.01)];
    let mut out = String::from("scenario,psi,sigma2_2,alpha1,alpha2,alpha3,alpha4,alpha5,monotone\n");
    for (name, psi, s2) in scenarios {
        let model = CovModel::two_component(1.0, s2, 0.8, psi, VarianceFn::Identity, lam_flat());
        let f = credibility_factors(&model, 5)?;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            name,
            psi,
            s2,
            f.alpha.iter().map(|&a| format!("{:.3}", a)).collect::<Vec<_>>().join(","),
            yesno(f.isotonic_star)
        ));
    }
    Ok(out)
}

/// The six Poisson cases shared by the standardized and non-standardized
/// factor tables: rho in {0.3, 0.6} x lambda in {flat, increasing,
/// decreasing}, sigma^2 = 0.5, forecast mean 1.  Values in units of 1e-3 at
/// 3 decimals.
fn table_poisson(standardized: bool) -> Result<String> {
    let cases: [(&str, f64, Vec<f64>); 6] = [
        ("1.a", 0.3, lam_flat()),
        ("1.b", 0.3, lam_up(1.0)),
        ("1.c", 0.3, lam_down(1.0)),
        ("2.a", 0.6, lam_flat()),
        ("2.b", 0.6, lam_up(1.0)),
        ("2.c", 0.6, lam_down(1.0)),
    ];
    let head = if standardized { "alpha_star" } else { "alpha" };
    let mut out = format!(
        "case,rho,lambdas,{}\n",
        (1..=5).map(|i| format!("{}{}_x1e3", head, i)).collect::<Vec<_>>().join(",")
    );
    for (name, rho, lambdas) in cases {
        let model = CovModel::dynamic_ar1(0.5, rho, EdFamily::poisson(), lambdas.clone());
        let f = credibility_factors(&model, 5)?;
        let values = if standardized { &f.alpha_star } else { &f.alpha };
        out.push_str(&format!(
            "{},{},{},{}\n",
            name,
            rho,
            lam_label(&lambdas),
            values.iter().map(|&a| format!("{:.3}", a * 1e3)).collect::<Vec<_>>().join(",")
        ));
    }
    Ok(out)
}

/// The gamma-family factor table: psi = 0.5, sigma^2 = 0.5, rho = 0.3.  The
/// first block reports raw factors (flat lambda with forecast mean 1, then
/// the increasing lambda vector with forecast mean 0.001), the second block
/// the standardized factors for the same two cases.  Values in units of 1e-3.
fn table_gamma_both() -> Result<String> {
    let fam = EdFamily::gamma(0.5).map_err(anyhow::Error::from)?;
    let cases: [(&str, &str, Vec<f64>); 4] = [
        ("1.a", "alpha", lam_flat()),
        ("1.b", "alpha", lam_up(0.001)),
        ("2.a", "alpha_star", lam_flat()),
        ("2.b", "alpha_star", lam_up(0.001)),
    ];
    let mut out = String::from("case,kind,rho,lambdas,c1_x1e3,c2_x1e3,c3_x1e3,c4_x1e3,c5_x1e3\n");
    for (name, kind, lambdas) in cases {
        let model = CovModel::dynamic_ar1(0.5, 0.3, fam.clone(), lambdas.clone());
        let f = credibility_factors(&model, 5)?;
        let values = if kind == "alpha" { &f.alpha } else { &f.alpha_star };
        out.push_str(&format!(
            "{},{},0.3,{},{}\n",
            name,
            kind,
            lam_label(&lambdas),
            values.iter().map(|&a| format!("{:.3}", a * 1e3)).collect::<Vec<_>>().join(",")
        ));
    }
    Ok(out)
}

/// Semi-parametric counter-example: sigma^2 = 1, lambda = 1, the published
/// ACF estimates, T = 3, 4, 5.  Coefficients are printed newest-first (the
/// source table's layout) at 2 decimals; shorter rows leave trailing columns
/// empty.
fn table_semiparametric() -> Result<String> {
    let rhos = vec![0.733, 0.524, 0.504, 0.483, 0.401];
    let mut out = String::from("t,newest,next1,next2,next3,oldest\n");
    for t in [3usize, 4, 5] {
        let model = CovModel::arbitrary_acf(1.0, rhos.clone(), vec![1.0; 6]);
        let f = credibility_factors(&model, t)?;
        // Calendar order internally; the table lists alpha_{T}, ..., alpha_1.
        let mut printed: Vec<String> =
            f.alpha.iter().rev().map(|&a| format!("{:.2}", a)).collect();
        printed.resize(5, String::new());
        out.push_str(&format!("{},{}\n", t, printed.join(",")));
    }
    Ok(out)
}

/// ARMA(1,1) remark: (phi, theta, sigma_e^2) = (0.5, -0.2, 1.0), T = 5.
fn table_arma_remark() -> Result<String> {
    let model = CovModel::arma11(0.5, -0.2, 1.0, lam_flat());
    let f = credibility_factors(&model, 5)?;
    let mut out = String::from("phi,theta,sigma_e_sq,alpha1,alpha2,alpha3,alpha4,alpha5,regular\n");
    out.push_str(&format!(
        "0.5,-0.2,1.0,{},{}\n",
        f.alpha.iter().map(|&a| format!("{:.3}", a)).collect::<Vec<_>>().join(","),
        yesno(f.regular)
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config: SimulateConfig = read_toml(&args.config)?;
    let seed = resolve_seed(args.seed, config.seed)?;
    let state = config.state.build()?;
    let family = config.family.map(|f| f.build()).transpose()?.unwrap_or_else(default_family);
    let law = match &config.covariates {
        Some(block) => CovariateLaw::Normal { mean: block.mean, variance: block.variance },
        None => CovariateLaw::default(),
    };
    let panel = simulate_panel(
        config.n_policies,
        config.t,
        &state,
        &family,
        &config.beta,
        &law,
        seed,
    )?;
    panel.save_csv(&args.out)?;
    println!(
        "wrote {}: {} policies x {} periods (seed {})",
        args.out.display(),
        config.n_policies,
        config.t + 1,
        seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let config: EvaluateConfig = read_toml(&args.config)?;
    let seed = resolve_seed(args.seed, config.seed)?;
    let methods: Vec<Method> = config
        .methods
        .iter()
        .map(|name| Method::parse(name).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    let family = config.family.map(|f| f.build()).transpose()?.unwrap_or_else(default_family);
    let static_sigma = match config.static_sigma {
        None => StaticSigmaMode::RefitStatic,
        Some(SigmaModeField::Value(v)) => StaticSigmaMode::Fixed(v),
        Some(SigmaModeField::Name(name)) => match name.to_ascii_lowercase().as_str() {
            "refit-static" => StaticSigmaMode::RefitStatic,
            "reuse-dynamic" => StaticSigmaMode::ReuseDynamic,
            other => bail!("unknown static_sigma mode '{}' (refit-static, reuse-dynamic, or a number)", other),
        },
    };
    let mut eval_config = EvalConfig {
        family,
        n_particles: config.n_particles.unwrap_or(DEFAULT_PARTICLES),
        static_sigma,
        ..EvalConfig::default()
    };
    if let Some(h) = config.harvey {
        eval_config.harvey_a0 = h.a0;
        eval_config.harvey_alpha = h.alpha;
    }

    let panel = ClaimPanel::load_csv(&args.panel)?;
    let report = evaluate(
        &panel,
        &methods,
        &eval_config,
        config.n_copies.unwrap_or(DEFAULT_COPIES),
        seed,
    )?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let csv_path = args.out_dir.join("premiums.csv");
    report.save_csv(&csv_path)?;
    let json_path = args.out_dir.join("summary.json");
    fs::write(&json_path, serde_json::to_string_pretty(&report.summary_json())?.as_bytes())
        .with_context(|| format!("cannot write {}", json_path.display()))?;

    for warning in &report.warnings {
        eprintln!("warning: {}", warning);
    }
    print!("{}", report.table_text());
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn cmd_fit(args: FitArgs) -> Result<()> {
    let config: FitConfig = read_toml(&args.config)?;
    let family = config.family.map(|f| f.build()).transpose()?.unwrap_or_else(default_family);
    let mut panel = ClaimPanel::load_csv(&args.panel)?;
    if config.drop_last_period {
        let max = panel.max_period();
        panel.records.retain(|r| r.period < max);
    }
    if panel.records.is_empty() {
        bail!("panel {} has no records to fit", args.panel.display());
    }

    let k = panel.n_covariates();
    let design: Vec<Vec<f64>> = panel
        .records
        .iter()
        .map(|r| {
            let mut row = Vec::with_capacity(k + 1);
            row.push(1.0);
            row.extend_from_slice(&r.covariates);
            row
        })
        .collect();
    let y: Vec<f64> = panel.records.iter().map(|r| r.y).collect();
    let fit = fit_poisson(&design, &y, &vec![0.0; y.len()])?;

    let mut names = vec!["intercept".to_string()];
    names.extend((1..=k).map(|i| format!("x{}", i)));
    print!("{}", fit.coefficient_table(&names));

    let fitted: Vec<f64> = design
        .iter()
        .map(|row| predict_lambda(&fit, row, 0.0).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    let moments = dynacred::premiums::estimate_moments(&panel, &family, &fitted)?;
    println!(
        "sigma2_hat: {}  rho_hat: {}{}  (n_used = {})",
        sig10(moments.sigma2_hat),
        sig10(moments.rho_hat),
        moments
            .psi_hat
            .map(|p| format!("  psi_hat: {}", sig10(p)))
            .unwrap_or_default(),
        moments.n_used
    );
    let mut warnings: Vec<String> = fit.warnings.clone();
    warnings.extend(moments.clamp_flags.iter().cloned());
    for warning in &warnings {
        eprintln!("warning: {}", warning);
    }

    if let Some(path) = args.json_out {
        let json = serde_json::json!({
            "beta": fit.beta,
            "std_err": fit.std_err,
            "p_values": fit.p_values,
            "converged": fit.converged,
            "iterations": fit.iterations,
            "log_likelihood": fit.log_likelihood,
            "deviance": fit.deviance,
            "sigma2_hat": moments.sigma2_hat,
            "rho_hat": moments.rho_hat,
            "psi_hat": moments.psi_hat,
            "n_used": moments.n_used,
            "warnings": warnings,
        });
        fs::write(&path, serde_json::to_string_pretty(&json)?.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
