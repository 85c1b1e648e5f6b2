//! One function per subcommand. Each returns the typed result together with
//! its curve table; [`crate::cli`] serializes and writes them.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use dsharp_core::decisions::{
    self, action_profile, expected_losses, least_favorable, minimax_action, optimal_action, robust_action,
    DecisionProblem, MinimaxResult, ModelEnsemble,
};
use dsharp_core::divergence::{chisq_index, model_divergence, DivergenceKind};
use dsharp_core::gbayes::{kernel_divergence, posterior_from_divergences, ParamFamily, PosteriorOptions, Smoothing};
use dsharp_core::q2d::{self, Lambda, Method, Q2dOptions, Solver};
use dsharp_core::sharpening::{self, make_dsharp};
use dsharp_core::{experts, BaseModel, DSharpModel, Family, Model, Univariate, DEFAULT_SEED};
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{hull, span, u_grid, x_grid};
use crate::io;

pub const SCHEMA_VERSION: u32 = 1;
/// OPEN penalty per selected coefficient.
pub const OPEN_GAMMA: f64 = 2.0;

/// Flags shared by every subcommand.
#[derive(Args, Serialize, Debug, Clone)]
pub struct Common {
    /// Master seed for every random draw
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// JSON report path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV path for plotting curves
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

/// Every report has this envelope.
#[derive(Serialize, Debug, Clone)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub config: &'a C,
    pub result: &'a R,
}

/// Named columns of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    fn push(&mut self, name: impl Into<String>, column: Vec<f64>) {
        self.header.push(name.into());
        self.columns.push(column);
    }

    fn insert(&mut self, at: usize, name: impl Into<String>, column: Vec<f64>) {
        self.header.insert(at, name.into());
        self.columns.insert(at, column);
    }

    fn insert_first(&mut self, name: impl Into<String>, column: Vec<f64>) {
        self.insert(0, name, column);
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct Output<R> {
    pub result: R,
    pub curves: Table,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub j: usize,
    pub value: f64,
}

fn coefficient_list(pairs: &[(usize, f64)]) -> Vec<Coefficient> {
    pairs.iter().map(|&(j, value)| Coefficient { j, value }).collect()
}

fn parse_model(spec: &str) -> Result<BaseModel> {
    spec.parse::<BaseModel>().map_err(|e| anyhow!("--f0: {e}"))
}

// ---------------------------------------------------------------- fit

#[derive(Args, Serialize, Debug, Clone)]
pub struct FitArgs {
    /// One-column CSV of observations
    #[arg(long)]
    pub data: PathBuf,
    /// Model-0 spec, e.g. `exp:mean=25`
    #[arg(long)]
    pub f0: String,
    /// Largest LP order considered by OPEN
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize, Debug, Clone)]
pub struct FitResult {
    pub n: usize,
    pub f0: String,
    pub raw_coeffs: Vec<f64>,
    pub selected: Vec<usize>,
    pub smooth_coeffs: Vec<Coefficient>,
    pub open_scores: Vec<f64>,
    pub chisq: f64,
    pub dof: usize,
    pub p_value: f64,
    pub normalizer: f64,
}

pub fn fit(args: &FitArgs) -> Result<Output<FitResult>> {
    let data = io::read_data(&args.data)?;
    let base = parse_model(&args.f0)?;
    let f0: Model = base.clone().into();
    let fit = sharpening::fit(&data, &f0, args.m, OPEN_GAMMA)?;
    let index = chisq_index(fit.raw_coeffs(), data.len())?;
    let model = fit.to_model()?;

    let mut curves = Table::default();
    let us = u_grid();
    let d: Vec<f64> = us.iter().map(|&u| model.ratio(u)).collect();
    let xs = x_grid(hull(span(&base)?, span(&model)?), &base)?;
    curves.push("u", us);
    curves.push("d_hat", d);
    curves.push("f0", xs.iter().map(|&x| base.pdf(x)).collect());
    curves.push("f_hat", xs.iter().map(|&x| model.pdf(x)).collect());
    curves.insert(2, "x", xs);

    let result = FitResult {
        n: data.len(),
        f0: base.to_string(),
        raw_coeffs: fit.raw_coeffs().to_vec(),
        selected: fit.selected().to_vec(),
        smooth_coeffs: coefficient_list(fit.smooth_coeffs()),
        open_scores: fit.open_scores().to_vec(),
        chisq: index.value,
        dof: index.dof.unwrap_or(args.m),
        p_value: index.p_value.unwrap_or(f64::NAN),
        normalizer: model.normalizer(),
    };
    Ok(Output { result, curves })
}

// ---------------------------------------------------------------- diagnose

#[derive(Args, Serialize, Debug, Clone)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub f0: String,
    /// Number of LP coefficients in the chi-square index
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize, Debug, Clone)]
pub struct DiagnoseResult {
    pub n: usize,
    pub f0: String,
    pub raw_coeffs: Vec<f64>,
    pub chisq: f64,
    pub dof: usize,
    pub p_value: f64,
    pub selected: Vec<usize>,
    /// Divergences of the OPEN-smoothed d-sharp model from model-0.
    pub divergences: BTreeMap<String, f64>,
}

pub fn diagnose(args: &DiagnoseArgs) -> Result<Output<DiagnoseResult>> {
    let data = io::read_data(&args.data)?;
    let base = parse_model(&args.f0)?;
    let fit = sharpening::fit(&data, &base.clone().into(), args.m, OPEN_GAMMA)?;
    let index = chisq_index(fit.raw_coeffs(), data.len())?;
    let model = fit.to_model()?;
    let mut divergences = BTreeMap::new();
    for kind in [
        DivergenceKind::Kl,
        DivergenceKind::Tv,
        DivergenceKind::Hellinger,
        DivergenceKind::ChiSq,
        DivergenceKind::Renyi(0.5),
    ] {
        divergences.insert(kind.to_string(), model_divergence(&model, kind)?.value);
    }
    let mut curves = Table::default();
    let us = u_grid();
    curves.push("d_hat", us.iter().map(|&u| model.ratio(u)).collect());
    curves.push("d_raw", us.iter().map(|&u| fit.eval_d(u)).collect::<dsharp_core::Result<_>>()?);
    curves.insert_first("u", us);
    let result = DiagnoseResult {
        n: data.len(),
        f0: base.to_string(),
        raw_coeffs: fit.raw_coeffs().to_vec(),
        chisq: index.value,
        dof: index.dof.unwrap_or(args.m),
        p_value: index.p_value.unwrap_or(f64::NAN),
        selected: fit.selected().to_vec(),
        divergences,
    };
    Ok(Output { result, curves })
}

// ---------------------------------------------------------------- decide

#[derive(Args, Serialize, Debug, Clone)]
pub struct DecideArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub f0: String,
    /// JSON list of actions with `expr` or `table` losses
    #[arg(long)]
    pub losses: PathBuf,
    /// Bootstrap replicates
    #[arg(long = "B", default_value_t = decisions::DEFAULT_REPLICATES)]
    #[serde(rename = "B")]
    pub b: usize,
    /// Largest LP order of every synthesized model
    #[arg(long = "M", default_value_t = decisions::DEFAULT_MAX_ORDER)]
    #[serde(rename = "M")]
    pub m_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize, Debug, Clone)]
pub struct ActionValue {
    pub action: String,
    pub value: f64,
}

#[derive(Serialize, Debug, Clone)]
pub struct ProfileEntry {
    pub action: String,
    pub count: usize,
    pub probability: f64,
}

#[derive(Serialize, Debug, Clone)]
pub struct WorstCase {
    pub action: String,
    pub expected_loss: f64,
    /// `bootstrap:<replicate>` or `direct:m=<order>`.
    pub attained_by: String,
}

#[derive(Serialize, Debug, Clone)]
pub struct Minimax {
    pub action: String,
    pub worst_case: Vec<WorstCase>,
}

#[derive(Serialize, Debug, Clone)]
pub struct LeastFavorable {
    pub action: String,
    pub replicate: usize,
    pub expected_loss: f64,
}

#[derive(Serialize, Debug, Clone)]
pub struct DecideResult {
    pub n: usize,
    pub actions: Vec<String>,
    pub replicates_requested: usize,
    pub replicates_used: usize,
    pub replicates_skipped: usize,
    pub model0_expected_loss: Vec<ActionValue>,
    pub model0_action: String,
    pub profile: Vec<ProfileEntry>,
    pub entropy: f64,
    pub robust_action: String,
    pub averaged_expected_loss: Vec<ActionValue>,
    pub minimax_bootstrap: Minimax,
    pub minimax_direct: Minimax,
    pub minimax: Minimax,
    pub least_favorable: Vec<LeastFavorable>,
}

fn action_values(problem: &DecisionProblem, values: &[f64]) -> Vec<ActionValue> {
    values
        .iter()
        .enumerate()
        .map(|(a, &value)| ActionValue { action: problem.label(a).to_string(), value })
        .collect()
}

fn minimax_report(problem: &DecisionProblem, r: &MinimaxResult, name: impl Fn(usize) -> String) -> Minimax {
    Minimax {
        action: problem.label(r.action).to_string(),
        worst_case: (0..problem.len())
            .map(|a| WorstCase {
                action: problem.label(a).to_string(),
                expected_loss: r.worst_loss[a],
                attained_by: name(r.attained_by[a]),
            })
            .collect(),
    }
}

/// Bootstrap ensemble with replicates fitted in parallel; identical to the
/// sequential [`decisions::bootstrap_ensemble`].
pub fn parallel_ensemble(
    data: &dsharp_core::Sample,
    base: &BaseModel,
    m_max: usize,
    replicates: usize,
    seed: u64,
) -> Result<ModelEnsemble> {
    decisions::validate_bootstrap(data, replicates)?;
    let base = Arc::new(Model::from(base.clone()));
    let results = (0..replicates)
        .into_par_iter()
        .map(|i| decisions::bootstrap_replicate(data, &base, m_max, seed, i))
        .collect::<dsharp_core::Result<Vec<_>>>()?;
    Ok(ModelEnsemble::from_replicates(base, results)?)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

pub fn decide(args: &DecideArgs) -> Result<Output<DecideResult>> {
    let data = io::read_data(&args.data)?;
    let base = parse_model(&args.f0)?;
    let problem = io::read_losses(&args.losses)?;
    let ensemble = parallel_ensemble(&data, &base, args.m_max, args.b, args.common.seed)?;

    let model0_loss = expected_losses(&problem, &base)?;
    let model0_action = optimal_action(&problem, &base)?;
    let profile = action_profile(&problem, &ensemble)?;
    let robust = robust_action(&problem, &ensemble)?;

    let direct = decisions::direct_fits(&data, base.clone(), args.m_max)?;
    let ids = ensemble.replicate_ids().to_vec();
    let from_boot = minimax_action(&problem, ensemble.members())?;
    let from_direct = minimax_action(&problem, &direct)?;
    let mut all: Vec<DSharpModel> = ensemble.members().to_vec();
    all.extend(direct.iter().cloned());
    let combined = minimax_action(&problem, &all)?;
    let boot_name = |k: usize| format!("bootstrap:{}", ids[k]);
    let direct_name = |k: usize| format!("direct:m={k}");
    let members = ensemble.len();
    let all_name = |k: usize| if k < members { boot_name(k) } else { direct_name(k - members) };

    let least = (0..problem.len())
        .map(|a| {
            let (k, m) = least_favorable(&problem, a, &ensemble)?;
            Ok(LeastFavorable {
                action: problem.label(a).to_string(),
                replicate: ids[k],
                expected_loss: decisions::expected_loss(&problem, a, m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let xs = x_grid(hull(span(&base)?, span(&ensemble)?), &base)?;
    let mut lo = Vec::with_capacity(xs.len());
    let mut mid = Vec::with_capacity(xs.len());
    let mut hi = Vec::with_capacity(xs.len());
    let mut buf = vec![0.0; members];
    for &x in &xs {
        for (b, m) in buf.iter_mut().zip(ensemble.members()) {
            *b = m.pdf(x);
        }
        let v = median(&mut buf);
        lo.push(buf[0]);
        hi.push(buf[members - 1]);
        mid.push(v);
    }
    let mut curves = Table::default();
    curves.push("f0", xs.iter().map(|&x| base.pdf(x)).collect());
    curves.push("f_bar", xs.iter().map(|&x| ensemble.pdf(x)).collect());
    curves.push("band_min", lo);
    curves.push("band_median", mid);
    curves.push("band_max", hi);
    curves.insert_first("x", xs);

    let result = DecideResult {
        n: data.len(),
        actions: problem.actions().iter().map(|a| a.label.clone()).collect(),
        replicates_requested: ensemble.requested(),
        replicates_used: ensemble.len(),
        replicates_skipped: ensemble.skipped(),
        model0_expected_loss: action_values(&problem, &model0_loss),
        model0_action: problem.label(model0_action).to_string(),
        profile: (0..problem.len())
            .map(|a| ProfileEntry {
                action: problem.label(a).to_string(),
                count: profile.counts[a],
                probability: profile.probabilities[a],
            })
            .collect(),
        entropy: profile.entropy,
        robust_action: problem.label(robust.action).to_string(),
        averaged_expected_loss: action_values(&problem, &robust.expected_loss),
        minimax_bootstrap: minimax_report(&problem, &from_boot, boot_name),
        minimax_direct: minimax_report(&problem, &from_direct, direct_name),
        minimax: minimax_report(&problem, &combined, all_name),
        least_favorable: least,
    };
    Ok(Output { result, curves })
}

// ---------------------------------------------------------------- q2d

#[derive(Args, Serialize, Debug, Clone)]
pub struct Q2dArgs {
    /// CSV of `x,p` rows
    #[arg(long)]
    pub qp: PathBuf,
    /// Model-0 family: normal, lognormal, exp, logistic, laplace, uniform
    #[arg(long)]
    pub family: String,
    /// Number of LP coefficients
    #[arg(long, default_value_t = q2d::DEFAULT_ORDER)]
    pub m: usize,
    /// Lasso penalty, or `auto` for leave-one-out cross-validation
    #[arg(long, default_value = "auto")]
    pub lambda: String,
    /// auto, ols or lasso
    #[arg(long, default_value = "auto")]
    pub solver: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize, Debug, Clone)]
pub struct QpCheck {
    pub x: f64,
    pub p: f64,
    pub fitted_cdf: f64,
}

#[derive(Serialize, Debug, Clone)]
pub struct Q2dResult {
    pub base: String,
    pub base_params: BTreeMap<String, f64>,
    pub beta: Vec<f64>,
    pub method: &'static str,
    pub lambda: Option<f64>,
    pub residual: f64,
    pub cv: Vec<(f64, f64)>,
    pub normalizer: f64,
    pub fitted: Vec<QpCheck>,
}

fn q2d_options(args: &Q2dArgs) -> Result<Q2dOptions> {
    let lambda = if args.lambda.trim().eq_ignore_ascii_case("auto") {
        Lambda::Auto
    } else {
        let l: f64 = args.lambda.trim().parse().map_err(|_| anyhow!("--lambda: expected `auto` or a number"))?;
        Lambda::Fixed(l)
    };
    let solver = match args.solver.trim().to_ascii_lowercase().as_str() {
        "auto" if matches!(lambda, Lambda::Fixed(_)) => Solver::Lasso,
        "auto" => Solver::Auto,
        "ols" => Solver::Ols,
        "lasso" => Solver::Lasso,
        other => bail!("--solver: unknown solver `{other}`"),
    };
    Ok(Q2dOptions { m: args.m, solver, lambda })
}

pub fn q2d(args: &Q2dArgs) -> Result<Output<Q2dResult>> {
    let qp = io::read_qp(&args.qp)?;
    let family: Family = args.family.parse().map_err(|e| anyhow!("--family: {e}"))?;
    let opts = q2d_options(args)?;
    let fit = q2d::q2d(&qp, family, &opts)?;
    let model = &fit.model;

    let xs = x_grid(hull(span(&fit.base)?, span(model)?), &fit.base)?;
    let mut curves = Table::default();
    curves.push("pdf", xs.iter().map(|&x| model.pdf(x)).collect());
    curves.push("cdf", xs.iter().map(|&x| model.cdf(x)).collect());
    curves.push("f0", xs.iter().map(|&x| fit.base.pdf(x)).collect());
    curves.insert_first("x", xs);

    let (method, lambda) = match fit.method {
        Method::Ols => ("ols", None),
        Method::Lasso { lambda } => ("lasso", Some(lambda)),
    };
    let result = Q2dResult {
        base: fit.base.to_string(),
        base_params: fit.base.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        beta: fit.beta.clone(),
        method,
        lambda,
        residual: fit.residual,
        cv: fit.cv.clone(),
        normalizer: model.normalizer(),
        fitted: qp
            .pairs()
            .iter()
            .map(|&(x, p)| QpCheck { x, p, fitted_cdf: model.cdf(x) })
            .collect(),
    };
    Ok(Output { result, curves })
}

// ---------------------------------------------------------------- combine

#[derive(Args, Serialize, Debug, Clone)]
pub struct CombineArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON list of expert model specs
    #[arg(long)]
    pub experts: PathBuf,
    /// LP order of the relevance weights
    #[arg(long, default_value_t = experts::DEFAULT_ORDER)]
    pub m: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize, Debug, Clone)]
pub struct ExpertWeight {
    pub expert: String,
    pub chisq: f64,
    pub weight: f64,
    pub probability: f64,
}

#[derive(Serialize, Debug, Clone)]
pub struct CombineResult {
    pub n: usize,
    pub experts: Vec<ExpertWeight>,
    pub consensus: String,
}

pub fn combine(args: &CombineArgs) -> Result<Output<CombineResult>> {
    let data = io::read_data(&args.data)?;
    let list = io::read_experts(&args.experts)?;
    let ens = experts::consensus(&data, &list, args.m)?;
    let xs = x_grid(span(&ens.consensus)?, &ens.consensus)?;
    let mut curves = Table::default();
    curves.push("x", xs.clone());
    curves.push("consensus", xs.iter().map(|&x| ens.consensus.pdf(x)).collect());
    for (i, e) in ens.experts.iter().enumerate() {
        curves.push(format!("expert_{}", i + 1), xs.iter().map(|&x| e.pdf(x)).collect());
    }
    let result = CombineResult {
        n: data.len(),
        experts: (0..ens.experts.len())
            .map(|i| ExpertWeight {
                expert: ens.experts[i].to_string(),
                chisq: ens.chisq[i],
                weight: ens.weights[i],
                probability: ens.probabilities[i],
            })
            .collect(),
        consensus: ens.consensus.to_string(),
    };
    Ok(Output { result, curves })
}

// ---------------------------------------------------------------- gbayes

#[derive(Args, Serialize, Debug, Clone)]
pub struct GbayesArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Family template; parameters not on the grid stay fixed
    #[arg(long)]
    pub f0: String,
    /// `param=lo:hi:step[,param=lo:hi:step]`
    #[arg(long)]
    pub grid: String,
    /// `uniform` or a CSV of parameter values followed by a weight
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    /// kl, tv, hellinger, chisq or renyi
    #[arg(long, default_value = "kl")]
    pub divergence: String,
    /// Renyi order
    #[arg(long)]
    pub alpha: Option<f64>,
    /// LP order of the comparison density
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize, Debug, Clone)]
pub struct GbayesResult {
    pub n: usize,
    pub parameters: Vec<String>,
    pub divergence: String,
    pub grid_points: usize,
    pub mode: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

fn divergence_kind(name: &str, alpha: Option<f64>) -> Result<DivergenceKind> {
    let kind: DivergenceKind = name.parse().map_err(|e| anyhow!("--divergence: {e}"))?;
    match (kind, alpha) {
        (DivergenceKind::Renyi(_), Some(a)) => {
            format!("renyi:{a}").parse().map_err(|e| anyhow!("--alpha: {e}"))
        }
        (_, Some(_)) => bail!("--alpha only applies to --divergence renyi"),
        (k, None) => Ok(k),
    }
}

pub fn gbayes(args: &GbayesArgs) -> Result<Output<GbayesResult>> {
    let data = io::read_data(&args.data)?;
    let template = parse_model(&args.f0)?;
    let grid = io::parse_grid(&args.grid)?;
    let names: Vec<&str> = grid.names.iter().map(String::as_str).collect();
    let family = ParamFamily::new(template, &names).context("--grid")?;
    let prior = io::read_prior(&args.prior, &grid)?;
    let kind = divergence_kind(&args.divergence, args.alpha)?;
    let opts = PosteriorOptions { kind, m: args.m, smoothing: Smoothing::Raw, ..Default::default() };
    let divergence = grid
        .points
        .par_iter()
        .map(|theta| kernel_divergence(&data, &family, theta, &opts))
        .collect::<dsharp_core::Result<Vec<_>>>()?;
    let post = posterior_from_divergences(&family, &grid.points, &prior, divergence, &opts)?;

    let mut curves = Table::default();
    for (k, name) in grid.names.iter().enumerate() {
        curves.push(name.clone(), grid.points.iter().map(|p| p[k]).collect());
    }
    curves.push("prior", post.prior.clone());
    curves.push("posterior", post.posterior.clone());
    curves.push("divergence", post.divergence.clone());

    let result = GbayesResult {
        n: data.len(),
        parameters: grid.names.clone(),
        divergence: kind.to_string(),
        grid_points: grid.points.len(),
        mode: post.mode().to_vec(),
        mean: post.mean(),
        variance: post.variance(),
    };
    Ok(Output { result, curves })
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Serialize, Debug, Clone)]
pub struct SimulateArgs {
    /// Model spec to draw from
    #[arg(long)]
    pub true_model: String,
    /// Optional LP coefficients `j:c[,j:c]` sharpening the model
    #[arg(long)]
    pub coeffs: Option<String>,
    /// Number of draws
    #[arg(long)]
    pub n: usize,
    /// Seed for the draws
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Data CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional JSON report path
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Serialize, Debug, Clone)]
pub struct SimulateResult {
    pub model: String,
    pub coeffs: Vec<Coefficient>,
    pub n: usize,
    /// Accept-reject proposals used (equal to `n` without coefficients).
    pub proposals: usize,
}

pub fn simulate(args: &SimulateArgs) -> Result<(dsharp_core::Sample, SimulateResult)> {
    if args.n == 0 {
        bail!("--n must be positive");
    }
    let base = args.true_model.parse::<BaseModel>().map_err(|e| anyhow!("--true-model: {e}"))?;
    let coeffs = match &args.coeffs {
        Some(s) => io::parse_coeffs(s).context("--coeffs")?,
        None => Vec::new(),
    };
    let model = make_dsharp(base.clone(), &coeffs)?;
    let (sample, proposals) = model.sample_counting(args.n, args.seed);
    let result = SimulateResult {
        model: base.to_string(),
        coeffs: coefficient_list(model.coeffs()),
        n: args.n,
        proposals,
    };
    Ok((sample, result))
}
