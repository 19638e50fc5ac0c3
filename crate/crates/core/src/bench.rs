//! Omniscient-optimum estimation and algorithm-versus-omniscient ratios.
//!
//! Trial `t` of a run with base seed `s` uses seed `s ^ t` for both the
//! realization and the algorithm's own randomness (on separate streams).
//! Trials run in parallel and are folded in trial order, so every number
//! is reproducible for a fixed seed regardless of thread count.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{
    adaptive_match_capped, naive_random, naive_scheduled, nonadaptive_select, query_plan, query_all,
    single_matching_baseline, GraphOracle,
};
use crate::error::{Error, Result};
use crate::exact;
use crate::graph::{max_matching_with, Graph};
use crate::kset::{
    adaptive_kset, best_packing_within, local_search_packing, nonadaptive_kset_plan, nonadaptive_kset_with_plan,
    KSetInstance, Packing, SetOracle,
};
use crate::report::RunReport;
use crate::model::{item_probs, rng_for, sample_with_probs, trial_seed, Incidence, ProbModel, Realization, Stream};

/// Instances with at most this many items are evaluated exactly by default.
pub const AUTO_EXACT_LIMIT: usize = 16;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EstimateMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmniscientEstimate {
    pub mean: f64,
    /// Standard error of the mean; zero in exact mode.
    pub se: f64,
    pub trials: usize,
    pub mode: EstimateMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimation {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn monte_carlo<I, F>(inc: &I, probs: &[f64], trials: usize, seed: u64, value: F) -> Result<OmniscientEstimate>
where
    I: Incidence + Sync + ?Sized,
    F: Fn(&Realization) -> Result<usize> + Sync,
{
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    debug_assert_eq!(probs.len(), inc.item_count());
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| value(&sample_with_probs(probs, trial_seed(seed, t))).map(|v| v as f64))
        .collect::<Result<_>>()?;
    let (mean, se) = mean_se(&values);
    Ok(OmniscientEstimate {
        mean,
        se,
        trials,
        mode: EstimateMode::MonteCarlo,
    })
}

fn exact_estimate<I: Incidence + ?Sized>(inc: &I, probs: &[f64]) -> Result<OmniscientEstimate> {
    Ok(OmniscientEstimate {
        mean: exact::exact_expectation(inc, probs)?,
        se: 0.0,
        trials: 0,
        mode: EstimateMode::Exact,
    })
}

/// `E[|M(E_p)|]`, by enumeration (at most 20 edges) or Monte Carlo.
pub fn omniscient_matching(g: &Graph, model: &ProbModel, est: Estimation) -> Result<OmniscientEstimate> {
    let probs = item_probs(model, g)?;
    match est {
        Estimation::Exact => exact_estimate(g, &probs),
        Estimation::MonteCarlo { trials, seed } => monte_carlo(g, &probs, trials, seed, |r| {
            Ok(max_matching_with(g, |e| r.exists(e), None).len())
        }),
    }
}

/// Expected maximum packing size. Monte Carlo trials use
/// [`best_packing_within`], which falls back to local search with cap
/// `proxy_s` on large collections of sets with three or more elements.
pub fn omniscient_kset(inst: &KSetInstance, model: &ProbModel, est: Estimation, proxy_s: usize) -> Result<OmniscientEstimate> {
    let probs = item_probs(model, inst)?;
    match est {
        Estimation::Exact => exact_estimate(inst, &probs),
        Estimation::MonteCarlo { trials, seed } => monte_carlo(inst, &probs, trials, seed, |r| {
            Ok(best_packing_within(inst, &realized(r), proxy_s)?.0.len())
        }),
    }
}

fn realized(r: &Realization) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(r.len());
    for i in r.existing() {
        bits.insert(i);
    }
    bits
}

/// Exact check of `E[M(E)] <= E[M(E1)] + E[M(E \ E1)]`; `part[e]` puts
/// edge `e` in `E1`.
pub fn matching_subadditivity_check(g: &Graph, model: &ProbModel, part: &[bool]) -> Result<bool> {
    if part.len() != g.m() {
        return Err(Error::InvalidGraph(format!("partition has {} flags for {} edges", part.len(), g.m())));
    }
    let probs = item_probs(model, g)?;
    let table = exact::subset_expectations(&exact::subset_optima(&exact::conflict_masks(g)?), &probs);
    let mask = part.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i));
    Ok(exact::subadditive_at(&table, mask))
}

/// `n - (10 / ln(1/(1-p))) ln n`, the lower bound on the expected maximum
/// matching of K_{n,n} with uniform edge probability `p`.
pub fn complete_bipartite_bound(n: usize, p: f64) -> f64 {
    let n = n as f64;
    n - 10.0 / (1.0 / (1.0 - p)).ln() * n.ln()
}

/// How the omniscient side of a ratio is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OmniPolicy {
    /// Exact when the instance has at most [`AUTO_EXACT_LIMIT`] items,
    /// otherwise paired with the algorithm's realizations.
    #[default]
    Auto,
    Exact,
    Paired,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub trials: usize,
    pub base_seed: u64,
    pub omniscient: OmniPolicy,
}

impl EvalConfig {
    pub fn new(trials: usize, base_seed: u64) -> Self {
        Self {
            trials,
            base_seed,
            omniscient: OmniPolicy::Auto,
        }
    }
}

/// One row of the ratio CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRecord {
    pub family: String,
    pub params: String,
    pub algorithm: String,
    #[serde(rename = "R")]
    pub rounds: usize,
    pub p_or_f: String,
    pub trials: usize,
    pub alg_mean: f64,
    pub omni_mean: f64,
    pub omni_se: f64,
    pub ratio: f64,
    /// Half-width of the 95% interval for `ratio`.
    pub ci: f64,
}

pub const RATIO_HEADER: [&str; 11] = [
    "family", "params", "algorithm", "R", "p_or_f", "trials", "alg_mean", "omni_mean", "omni_se", "ratio", "ci",
];

impl RatioRecord {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.family.clone(),
            self.params.clone(),
            self.algorithm.clone(),
            self.rounds.to_string(),
            self.p_or_f.clone(),
            self.trials.to_string(),
            format!("{:.6}", self.alg_mean),
            format!("{:.6}", self.omni_mean),
            format!("{:.6}", self.omni_se),
            format!("{:.6}", self.ratio),
            format!("{:.6}", self.ci),
        ]
    }

    /// Ratio above 1 by more than its interval: not explainable by noise.
    pub fn exceeds_one(&self) -> bool {
        self.ratio - self.ci > 1.0 + 1e-12
    }

    pub fn labeled(mut self, family: impl Into<String>, params: impl Into<String>) -> Self {
        self.family = family.into();
        self.params = params.into();
        self
    }
}

/// A ratio record plus what the oracles saw across all trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub record: RatioRecord,
    pub omniscient: OmniscientEstimate,
    /// Largest per-vertex (per-element) count of distinct queried items in
    /// any trial.
    pub max_budget: usize,
    pub max_queries: usize,
    pub mean_queries: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct TrialOut {
    alg: usize,
    omni: usize,
    budget: usize,
    queries: usize,
}

/// Ratio and its 95% half-width. Against an exact omniscient value only the
/// algorithm side varies; against paired Monte Carlo the delta method on
/// `a_i - ratio * o_i` accounts for both.
fn ratio_stats(alg: &[f64], omni: Option<&[f64]>, omni_mean: f64) -> (f64, f64, f64) {
    let (alg_mean, alg_se) = mean_se(alg);
    if omni_mean <= 0.0 {
        let ratio = if alg_mean <= 0.0 { 1.0 } else { f64::INFINITY };
        return (alg_mean, ratio, 0.0);
    }
    let ratio = alg_mean / omni_mean;
    let ci = match omni {
        None => Z95 * alg_se / omni_mean,
        Some(o) => {
            let d: Vec<f64> = alg.iter().zip(o).map(|(a, b)| a - ratio * b).collect();
            Z95 * mean_se(&d).1 / omni_mean
        }
    };
    (alg_mean, ratio, ci)
}

fn p_or_f(model: &ProbModel) -> String {
    match model {
        ProbModel::Uniform(p) => p.to_string(),
        other => other.describe(),
    }
}

fn use_exact(policy: OmniPolicy, items: usize) -> bool {
    match policy {
        OmniPolicy::Auto => items <= AUTO_EXACT_LIMIT,
        OmniPolicy::Exact => true,
        OmniPolicy::Paired => false,
    }
}

fn summarize(
    outs: &[TrialOut],
    exact_omni: Option<OmniscientEstimate>,
    algorithm: String,
    rounds: usize,
    model: &ProbModel,
) -> Evaluation {
    let alg: Vec<f64> = outs.iter().map(|o| o.alg as f64).collect();
    let (omniscient, omni_vals) = match exact_omni {
        Some(e) => (e, None),
        None => {
            let o: Vec<f64> = outs.iter().map(|o| o.omni as f64).collect();
            let (mean, se) = mean_se(&o);
            (
                OmniscientEstimate {
                    mean,
                    se,
                    trials: outs.len(),
                    mode: EstimateMode::MonteCarlo,
                },
                Some(o),
            )
        }
    };
    let (alg_mean, ratio, ci) = ratio_stats(&alg, omni_vals.as_deref(), omniscient.mean);
    let queries: usize = outs.iter().map(|o| o.queries).sum();
    Evaluation {
        record: RatioRecord {
            family: String::new(),
            params: String::new(),
            algorithm,
            rounds,
            p_or_f: p_or_f(model),
            trials: outs.len(),
            alg_mean,
            omni_mean: omniscient.mean,
            omni_se: omniscient.se,
            ratio,
            ci,
        },
        omniscient,
        max_budget: outs.iter().map(|o| o.budget).max().unwrap_or(0),
        max_queries: outs.iter().map(|o| o.queries).max().unwrap_or(0),
        mean_queries: if outs.is_empty() { 0.0 } else { queries as f64 / outs.len() as f64 },
    }
}

/// Matching query algorithms as evaluated by [`evaluate_matching`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchAlgorithm {
    Adaptive { rounds: usize, path_cap: Option<usize> },
    NonAdaptive { rounds: usize },
    /// A fixed edge set chosen before any query, such as a strategic
    /// non-adaptive schedule.
    Planned { id: String, rounds: usize, plan: Vec<usize> },
    NaiveRandom { budget: usize },
    NaiveScheduled { rounds: usize },
    SingleMatching,
    QueryAll,
}

pub const MATCH_ALGORITHM_IDS: [&str; 6] = [
    "adaptive",
    "nonadaptive",
    "naive-random",
    "naive-scheduled",
    "single-matching",
    "query-all",
];

impl MatchAlgorithm {
    /// Builds an algorithm from its id; `rounds` doubles as the per-vertex
    /// budget of `naive-random`.
    pub fn from_id(id: &str, rounds: usize) -> Result<Self> {
        Ok(match id {
            "adaptive" => Self::Adaptive { rounds, path_cap: None },
            "nonadaptive" => Self::NonAdaptive { rounds },
            "naive-random" => Self::NaiveRandom { budget: rounds },
            "naive-scheduled" => Self::NaiveScheduled { rounds },
            "single-matching" => Self::SingleMatching,
            "query-all" => Self::QueryAll,
            _ => return Err(Error::domain(format!("unknown algorithm '{id}'"))),
        })
    }

    pub fn id(&self) -> &str {
        match self {
            Self::Adaptive { .. } => "adaptive",
            Self::NonAdaptive { .. } => "nonadaptive",
            Self::Planned { id, .. } => id,
            Self::NaiveRandom { .. } => "naive-random",
            Self::NaiveScheduled { .. } => "naive-scheduled",
            Self::SingleMatching => "single-matching",
            Self::QueryAll => "query-all",
        }
    }

    /// The `R` column: rounds, or the per-vertex budget for naive-random.
    pub fn rounds(&self) -> usize {
        match self {
            Self::Adaptive { rounds, .. }
            | Self::NonAdaptive { rounds }
            | Self::Planned { rounds, .. }
            | Self::NaiveScheduled { rounds } => *rounds,
            Self::NaiveRandom { budget } => *budget,
            Self::SingleMatching => 1,
            Self::QueryAll => 0,
        }
    }

    /// Per-vertex query cap the algorithm promises, if any.
    pub fn budget_cap(&self) -> Option<usize> {
        match self {
            Self::Adaptive { rounds, .. }
            | Self::NonAdaptive { rounds }
            | Self::Planned { rounds, .. }
            | Self::NaiveScheduled { rounds } => Some(*rounds),
            Self::SingleMatching => Some(1),
            Self::NaiveRandom { .. } | Self::QueryAll => None,
        }
    }
}

/// Validates `alg` on `g` and computes any query-free plan up front, so a
/// non-adaptive selection is shared by every trial.
pub fn prepare_matching(g: &Graph, alg: &MatchAlgorithm) -> Result<MatchAlgorithm> {
    let run = match alg {
        MatchAlgorithm::NonAdaptive { rounds } => MatchAlgorithm::Planned {
            id: alg.id().to_string(),
            rounds: *rounds,
            plan: nonadaptive_select(g, *rounds)?,
        },
        other => other.clone(),
    };
    if let MatchAlgorithm::Adaptive { path_cap: Some(c), .. } = run {
        if c == 0 || c % 2 == 0 {
            return Err(Error::InvalidLength(c));
        }
    }
    if let MatchAlgorithm::NaiveScheduled { rounds: 0 } = run {
        return Err(Error::domain("scheduling cap must be at least 1"));
    }
    Ok(run)
}

/// One run of a prepared algorithm against `real`; `seed` drives the
/// algorithm's own randomness. Returns the report and the number of
/// distinct queries.
pub fn run_matching_trial(g: &Graph, prepared: &MatchAlgorithm, real: &Realization, seed: u64) -> Result<(RunReport, usize)> {
    let mut oracle = GraphOracle::new(g, real)?;
    let mut rng = rng_for(seed, Stream::Algorithm);
    let rep = match prepared {
        MatchAlgorithm::Adaptive { rounds, path_cap } => adaptive_match_capped(g, &mut oracle, *rounds, *path_cap)?,
        MatchAlgorithm::Planned { plan, .. } => query_plan(g, &mut oracle, plan),
        MatchAlgorithm::NaiveRandom { budget } => naive_random(g, &mut oracle, *budget, &mut rng),
        MatchAlgorithm::NaiveScheduled { rounds } => naive_scheduled(g, &mut oracle, *rounds, &mut rng)?,
        MatchAlgorithm::SingleMatching => single_matching_baseline(g, &mut oracle),
        MatchAlgorithm::QueryAll => query_all(g, &mut oracle),
        MatchAlgorithm::NonAdaptive { .. } => return Err(Error::domain("non-adaptive algorithm must be prepared first")),
    };
    Ok((rep, oracle.distinct_queries()))
}

/// Runs `cfg.trials` paired (realization, algorithm) executions and
/// compares the mean matching size with the omniscient optimum.
pub fn evaluate_matching(g: &Graph, model: &ProbModel, alg: &MatchAlgorithm, cfg: &EvalConfig) -> Result<Evaluation> {
    if cfg.trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let probs = item_probs(model, g)?;
    let exact_omni = if use_exact(cfg.omniscient, g.m()) {
        Some(exact_estimate(g, &probs)?)
    } else {
        None
    };
    let run = prepare_matching(g, alg)?;

    let outs: Vec<TrialOut> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<TrialOut> {
            let seed = trial_seed(cfg.base_seed, t);
            let real = sample_with_probs(&probs, seed);
            let (rep, queries) = run_matching_trial(g, &run, &real, seed)?;
            let omni = if exact_omni.is_none() {
                max_matching_with(g, |e| real.exists(e), None).len()
            } else {
                0
            };
            Ok(TrialOut {
                alg: rep.size(),
                omni,
                budget: rep.max_budget,
                queries,
            })
        })
        .collect::<Result<_>>()?;

    Ok(summarize(&outs, exact_omni, alg.id().to_string(), alg.rounds(), model))
}

/// k-set packing query algorithms as evaluated by [`evaluate_kset`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KsetAlgorithm {
    Adaptive { rounds: usize, s: usize },
    NonAdaptive { rounds: usize, s: usize },
    /// Query one local-search packing and keep what exists.
    SinglePacking { s: usize },
    QueryAll,
}

impl KsetAlgorithm {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Adaptive { .. } => "kset-adaptive",
            Self::NonAdaptive { .. } => "kset-nonadaptive",
            Self::SinglePacking { .. } => "kset-single",
            Self::QueryAll => "kset-query-all",
        }
    }

    pub fn rounds(&self) -> usize {
        match self {
            Self::Adaptive { rounds, .. } | Self::NonAdaptive { rounds, .. } => *rounds,
            Self::SinglePacking { .. } => 1,
            Self::QueryAll => 0,
        }
    }
}

/// Packing algorithm with any query-free plan already computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedKset {
    pub alg: KsetAlgorithm,
    pub plan: Vec<Packing>,
}

pub fn prepare_kset(inst: &KSetInstance, alg: &KsetAlgorithm) -> Result<PreparedKset> {
    let plan = match alg {
        KsetAlgorithm::NonAdaptive { rounds, s } => nonadaptive_kset_plan(inst, *rounds, *s)?,
        KsetAlgorithm::SinglePacking { s } => vec![local_search_packing(inst, *s)?],
        _ => Vec::new(),
    };
    Ok(PreparedKset { alg: alg.clone(), plan })
}

/// Like [`run_matching_trial`] for packings; `proxy_s` caps the local
/// search used by query-all on large instances.
pub fn run_kset_trial(inst: &KSetInstance, prepared: &PreparedKset, real: &Realization, proxy_s: usize) -> Result<(RunReport, usize)> {
    let mut oracle = SetOracle::new(inst, real)?;
    let rep = match &prepared.alg {
        KsetAlgorithm::Adaptive { rounds, s } => adaptive_kset(inst, &mut oracle, *rounds, *s)?,
        KsetAlgorithm::NonAdaptive { s, .. } | KsetAlgorithm::SinglePacking { s } => {
            nonadaptive_kset_with_plan(inst, &mut oracle, &prepared.plan, *s)?
        }
        KsetAlgorithm::QueryAll => {
            for i in 0..inst.len() {
                oracle.query(i);
            }
            let (p, _) = best_packing_within(inst, &realized(real), proxy_s)?;
            RunReport {
                solution: p.sets().to_vec(),
                rounds: Vec::new(),
                max_budget: oracle.max_counter(),
            }
        }
    };
    Ok((rep, oracle.distinct_queries()))
}

/// Like [`evaluate_matching`] for packings. The paired omniscient side uses
/// [`best_packing_within`] with cap `proxy_s`.
pub fn evaluate_kset(
    inst: &KSetInstance,
    model: &ProbModel,
    alg: &KsetAlgorithm,
    cfg: &EvalConfig,
    proxy_s: usize,
) -> Result<Evaluation> {
    if cfg.trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let probs = item_probs(model, inst)?;
    let exact_omni = if use_exact(cfg.omniscient, inst.len()) {
        Some(exact_estimate(inst, &probs)?)
    } else {
        None
    };
    let prepared = prepare_kset(inst, alg)?;

    let outs: Vec<TrialOut> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<TrialOut> {
            let seed = trial_seed(cfg.base_seed, t);
            let real = sample_with_probs(&probs, seed);
            let (rep, queries) = run_kset_trial(inst, &prepared, &real, proxy_s)?;
            let omni = if exact_omni.is_none() {
                best_packing_within(inst, &realized(&real), proxy_s)?.0.len()
            } else {
                0
            };
            Ok(TrialOut {
                alg: rep.size(),
                omni,
                budget: rep.max_budget,
                queries,
            })
        })
        .collect::<Result<_>>()?;

    Ok(summarize(&outs, exact_omni, alg.id().to_string(), alg.rounds(), model))
}
