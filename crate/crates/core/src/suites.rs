//! Named replication suites: fixed instances, algorithms and trial counts
//! whose CSV rows back the acceptance checks.

use crate::algorithms::{derive_params, nonadaptive_select_strategic};
use crate::bench::{
    evaluate_matching, omniscient_matching, complete_bipartite_bound, EvalConfig, Estimation, Evaluation, MatchAlgorithm,
    OmniPolicy, RatioRecord, RATIO_HEADER,
};
use crate::error::{Error, Result};
use crate::generators::{
    example31_degree, gen_appendix_a, gen_complete_bipartite, gen_disjoint_edges, gen_example31, gen_figure3,
    Figure3Selector, Generated,
};
use crate::kidney::{run_experiment, KidneyConfig, KIDNEY_EXTRA_HEADER};
use crate::model::ProbModel;

pub const SUITES: [&str; 8] = [
    "theorem1",
    "theorem2",
    "example31",
    "figure3",
    "appendixA",
    "lemmaB1",
    "kidney-2cycle",
    "kidney-23cycle",
];

/// Overrides for a suite run; `None` keeps the suite default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteConfig {
    pub trials: Option<usize>,
    pub seed: u64,
    /// Main size parameter: `t` for the four-class families, the pool size
    /// for kidney suites.
    pub size: Option<usize>,
    pub include_empty: bool,
}

/// Largest per-vertex (or total) query count seen against its cap.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetCheck {
    pub label: String,
    pub observed: usize,
    pub cap: usize,
    /// `true` when `cap` bounds the total number of queries rather than the
    /// per-vertex count.
    pub total: bool,
}

impl BudgetCheck {
    pub fn ok(&self) -> bool {
        self.observed <= self.cap
    }

    fn from_eval(label: String, alg: &MatchAlgorithm, ev: &Evaluation, n: usize) -> Option<Self> {
        match (alg.budget_cap(), alg) {
            (Some(cap), _) => Some(Self {
                label,
                observed: ev.max_budget,
                cap,
                total: false,
            }),
            (None, MatchAlgorithm::NaiveRandom { budget }) => Some(Self {
                label,
                observed: ev.max_queries,
                cap: n * budget,
                total: true,
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteRow {
    pub record: RatioRecord,
    /// Values for [`SuiteOutput::extra_header`].
    pub extra: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutput {
    pub suite: String,
    pub extra_header: Vec<String>,
    pub rows: Vec<SuiteRow>,
    pub budgets: Vec<BudgetCheck>,
}

impl SuiteOutput {
    pub fn header(&self) -> Vec<String> {
        RATIO_HEADER.iter().map(|s| s.to_string()).chain(self.extra_header.iter().cloned()).collect()
    }

    pub fn row_fields(&self, row: &SuiteRow) -> Vec<String> {
        let mut f = row.record.fields();
        f.extend(row.extra.iter().cloned());
        f
    }

    /// Rows whose algorithm and `R` match.
    pub fn find(&self, algorithm: &str, rounds: usize) -> impl Iterator<Item = &SuiteRow> + '_ {
        let algorithm = algorithm.to_string();
        self.rows
            .iter()
            .filter(move |r| r.record.algorithm == algorithm && r.record.rounds == rounds)
    }
}

fn paired(trials: usize, seed: u64) -> EvalConfig {
    EvalConfig {
        omniscient: OmniPolicy::Paired,
        ..EvalConfig::new(trials, seed)
    }
}

struct Collector {
    rows: Vec<SuiteRow>,
    budgets: Vec<BudgetCheck>,
}

impl Collector {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            budgets: Vec::new(),
        }
    }

    fn eval(&mut self, gen: &Generated, model: &ProbModel, alg: &MatchAlgorithm, cfg: &EvalConfig, extra: Vec<String>) -> Result<()> {
        let ev = evaluate_matching(&gen.graph, model, alg, cfg)?;
        let label = format!("{}[{}] {} R={}", gen.family, gen.params, alg.id(), alg.rounds());
        self.budgets.extend(BudgetCheck::from_eval(label, alg, &ev, gen.graph.n()));
        self.rows.push(SuiteRow {
            record: ev.record.labeled(gen.family.clone(), gen.params.clone()),
            extra,
        });
        Ok(())
    }

    fn finish(self, suite: &str, extra_header: &[&str]) -> SuiteOutput {
        SuiteOutput {
            suite: suite.to_string(),
            extra_header: extra_header.iter().map(|s| s.to_string()).collect(),
            rows: self.rows,
            budgets: self.budgets,
        }
    }
}

fn theorem_suite(name: &str, cfg: &SuiteConfig, adaptive: bool) -> Result<SuiteOutput> {
    let eps = 0.5;
    let p = 0.5;
    let params = derive_params(eps, p)?;
    let rounds = params.rounds as usize;
    let model = ProbModel::uniform(p)?;
    let trials = cfg.trials.unwrap_or(2000);
    let half = cfg.size.unwrap_or(50);
    let (alg, bound) = if adaptive {
        (MatchAlgorithm::Adaptive { rounds, path_cap: None }, 1.0 - eps)
    } else {
        (MatchAlgorithm::NonAdaptive { rounds }, 0.5 * (1.0 - eps))
    };
    let mut c = Collector::new();
    for gen in [gen_disjoint_edges(half)?, gen_complete_bipartite(half)?] {
        c.eval(&gen, &model, &alg, &paired(trials, cfg.seed), vec![bound.to_string()])?;
    }
    Ok(c.finish(name, &["bound"]))
}

fn example31_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let t = cfg.size.unwrap_or(1600);
    let p = 0.5;
    let n = 3 * t;
    let degree = example31_degree(n, p);
    let gen = gen_example31(t, degree, cfg.seed)?;
    let model = ProbModel::uniform(p)?;
    let ec = paired(cfg.trials.unwrap_or(20), cfg.seed);
    let mut c = Collector::new();
    c.eval(&gen, &model, &MatchAlgorithm::NaiveScheduled { rounds: degree }, &ec, Vec::new())?;
    c.eval(&gen, &model, &MatchAlgorithm::Adaptive { rounds: 10, path_cap: None }, &ec, Vec::new())?;
    Ok(c.finish("example31", &[]))
}

fn figure3_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let t = cfg.size.unwrap_or(200);
    let gen = gen_figure3(t)?;
    let rounds = (gen.graph.n() as f64).log2().ceil() as usize;
    let mut selector = Figure3Selector::new(t)?;
    let plan = nonadaptive_select_strategic(&gen.graph, rounds, &mut selector)?;
    let alg = MatchAlgorithm::Planned {
        id: "nonadaptive-strategic".into(),
        rounds,
        plan,
    };
    let model = ProbModel::uniform(0.5)?;
    let mut c = Collector::new();
    c.eval(&gen, &model, &alg, &paired(cfg.trials.unwrap_or(2000), cfg.seed), vec![(5.0 / 6.0).to_string()])?;
    Ok(c.finish("figure3", &["bound"]))
}

fn appendix_a_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let beta = 0.75;
    let model = ProbModel::uniform(0.5)?;
    let sizes = match cfg.size {
        Some(t) => vec![t],
        None => vec![256, 4096],
    };
    let mut c = Collector::new();
    for t in sizes {
        let gen = gen_appendix_a(t, beta)?;
        let budget = ((t as f64).sqrt().round() as usize).max(1);
        c.eval(
            &gen,
            &model,
            &MatchAlgorithm::NaiveRandom { budget },
            &paired(cfg.trials.unwrap_or(8), cfg.seed),
            vec![t.to_string()],
        )?;
    }
    Ok(c.finish("appendixA", &["t"]))
}

fn lemma_b1_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let trials = cfg.trials.unwrap_or(200);
    let sizes = match cfg.size {
        Some(n) => vec![n],
        None => vec![100, 200],
    };
    let mut rows = Vec::new();
    for n in sizes {
        let gen = gen_complete_bipartite(n)?;
        for p in [0.3, 0.5] {
            let est = omniscient_matching(&gen.graph, &ProbModel::uniform(p)?, Estimation::MonteCarlo { trials, seed: cfg.seed })?;
            let bound = complete_bipartite_bound(n, p);
            rows.push(SuiteRow {
                record: RatioRecord {
                    family: gen.family.clone(),
                    params: gen.params.clone(),
                    algorithm: "omniscient".into(),
                    rounds: 0,
                    p_or_f: p.to_string(),
                    trials,
                    alg_mean: est.mean,
                    omni_mean: est.mean,
                    omni_se: est.se,
                    ratio: 1.0,
                    ci: 0.0,
                },
                extra: vec![n.to_string(), format!("{bound:.6}")],
            });
        }
    }
    Ok(SuiteOutput {
        suite: "lemmaB1".into(),
        extra_header: vec!["n".into(), "bound".into()],
        rows,
        budgets: Vec::new(),
    })
}

fn kidney_suite(name: &str, cfg: &SuiteConfig, k_max: usize) -> Result<SuiteOutput> {
    let default_trials = if k_max == 2 { 500 } else { 20 };
    let mut kc = KidneyConfig::new(cfg.size.unwrap_or(250), k_max, cfg.trials.unwrap_or(default_trials), cfg.seed);
    kc.include_empty = cfg.include_empty;
    let rows = run_experiment(&kc)?
        .into_iter()
        .map(|r| {
            let extra = r.fields().split_off(RATIO_HEADER.len());
            SuiteRow { record: r.record, extra }
        })
        .collect();
    Ok(SuiteOutput {
        suite: name.into(),
        extra_header: KIDNEY_EXTRA_HEADER.iter().map(|s| s.to_string()).collect(),
        rows,
        budgets: Vec::new(),
    })
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteOutput> {
    if cfg.trials == Some(0) {
        return Err(Error::domain("trials must be at least 1"));
    }
    match name {
        "theorem1" => theorem_suite(name, cfg, true),
        "theorem2" => theorem_suite(name, cfg, false),
        "example31" => example31_suite(cfg),
        "figure3" => figure3_suite(cfg),
        "appendixA" => appendix_a_suite(cfg),
        "lemmaB1" => lemma_b1_suite(cfg),
        "kidney-2cycle" => kidney_suite(name, cfg, 2),
        "kidney-23cycle" => kidney_suite(name, cfg, 3),
        _ => Err(Error::domain(format!("unknown suite '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_run() {
        let cfg = SuiteConfig {
            trials: Some(3),
            seed: 1,
            size: Some(8),
            include_empty: false,
        };
        for name in SUITES {
            let out = run_suite(name, &cfg).unwrap();
            assert!(!out.rows.is_empty(), "{name}");
            assert!(out.budgets.iter().all(BudgetCheck::ok), "{name}");
            for row in &out.rows {
                assert_eq!(out.row_fields(row).len(), out.header().len());
            }
        }
        assert!(run_suite("nope", &cfg).is_err());
    }
}
