use std::fs;

use stochmatch::bench::{
    evaluate_kset, evaluate_matching, prepare_kset, prepare_matching, run_kset_trial, run_matching_trial, EvalConfig,
    Evaluation, KsetAlgorithm, MatchAlgorithm, OmniPolicy, RATIO_HEADER,
};
use stochmatch::algorithms::nonadaptive_select_strategic;
use stochmatch::exact::EXACT_ITEM_LIMIT;
use stochmatch::generators::{
    example31_degree, gen_appendix_a, gen_complete_bipartite, gen_disjoint_edges, gen_erdos_renyi, gen_example31,
    gen_figure3, gen_named, Figure3Selector, Generated, NAMED_FAMILIES,
};
use stochmatch::graph::Graph;
use stochmatch::io::{parse_graph, parse_instance, parse_model, write_graph, write_instance, write_pool};
use stochmatch::kidney::{build_compat, enumerate_cycles, gen_pool, run_experiment, KidneyConfig, PoolConfig, KIDNEY_EXTRA_HEADER};
use stochmatch::kset::KSetInstance;
use stochmatch::model::{f_delta, item_probs, sample_vertex_params, sample_with_probs, trial_seed, ProbModel, VertexDist};
use stochmatch::suites::{run_suite, SuiteConfig, SUITES};

use crate::settings::Settings;
use crate::CliError;

/// Largest structure cap accepted; structure search is exponential in it.
pub const MAX_S: usize = 4;

pub const KSET_ALGORITHM_IDS: [&str; 4] = ["kset-adaptive", "kset-nonadaptive", "kset-single", "kset-query-all"];

pub const GRAPH_FAMILIES: [&str; 6] = ["complete-bipartite", "disjoint-edges", "erdos-renyi", "example31", "figure3", "appendixA"];

const KIDNEY_FAMILIES: [&str; 3] = ["kidney", "kidney-2cycle", "kidney-23cycle"];

fn cfg_err(e: stochmatch::Error) -> CliError {
    CliError::config(e.to_string())
}

fn rt_err(e: stochmatch::Error) -> CliError {
    CliError::runtime(e.to_string())
}

fn read_file(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read '{path}': {e}")))
}

/// Writes `text` to the `out` setting, or stdout when unset.
pub fn emit(s: &Settings, text: &str) -> Result<(), CliError> {
    match s.raw("out") {
        Some(path) => fs::write(path, text).map_err(|e| CliError::runtime(format!("cannot write '{path}': {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn header_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::runtime(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::runtime(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::runtime(e.to_string()))
}

fn ratio_header() -> Vec<String> {
    RATIO_HEADER.iter().map(|s| s.to_string()).collect()
}

pub fn apply_threads(s: &Settings) -> Result<(), CliError> {
    if let Some(n) = s.get::<usize>("threads")? {
        if n == 0 {
            return Err(CliError::config("threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn seed(s: &Settings) -> Result<u64, CliError> {
    s.need("seed")
}

fn graph_family(s: &Settings, family: &str, p_hint: f64) -> Result<Generated, CliError> {
    let seed = seed(s)?;
    let g = if NAMED_FAMILIES.contains(&family) {
        gen_named(family)
    } else {
        match family {
            "complete-bipartite" => gen_complete_bipartite(s.need("n")?),
            "disjoint-edges" => gen_disjoint_edges(s.need("n")?),
            "erdos-renyi" => gen_erdos_renyi(s.need("n")?, s.need("d")?, seed),
            "example31" => {
                let t: usize = s.need("t")?;
                let degree = s.get_or("degree", example31_degree(3 * t, p_hint))?;
                gen_example31(t, degree, seed)
            }
            "figure3" => gen_figure3(s.need("t")?),
            "appendixA" => gen_appendix_a(s.need("t")?, s.get_or("beta", 0.75)?),
            _ => {
                return Err(CliError::config(format!(
                    "unknown family '{family}' (graph families: {}, {}; set families: kidney)",
                    NAMED_FAMILIES.join(", "),
                    GRAPH_FAMILIES.join(", ")
                )))
            }
        }
    };
    g.map_err(cfg_err)
}

fn parse_vertex_dist(spec: &str) -> Result<VertexDist, CliError> {
    let bad = || CliError::config(format!("bad vertex distribution '{spec}' (uniform | const:C | twopoint:LO:HI:FRAC)"));
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    Ok(match parts.as_slice() {
        ["uniform"] => VertexDist::Uniform01,
        ["const", c] => VertexDist::Constant(num(c)?),
        ["twopoint", lo, hi, frac] => VertexDist::TwoPoint {
            lo: num(lo)?,
            hi: num(hi)?,
            frac_lo: num(frac)?,
        },
        _ => return Err(bad()),
    })
}

/// `uniform:P`, `vertex:DIST` (sampled per point from the seed) or
/// `file:PATH`.
fn parse_model_spec(spec: &str, items: usize, points: usize, seed: u64) -> Result<ProbModel, CliError> {
    if let Some(p) = spec.strip_prefix("uniform:") {
        let p: f64 = p
            .parse()
            .map_err(|_| CliError::config(format!("bad probability in model '{spec}'")))?;
        return ProbModel::uniform(p).map_err(cfg_err);
    }
    if let Some(d) = spec.strip_prefix("vertex:") {
        return sample_vertex_params(points, parse_vertex_dist(d)?, seed).map_err(cfg_err);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return parse_model(&read_file(path)?, items, points).map_err(cfg_err);
    }
    Err(CliError::config(format!("unknown model '{spec}' (uniform:P | vertex:DIST | file:PATH)")))
}

fn uniform_hint(s: &Settings) -> f64 {
    s.raw("model")
        .and_then(|m| m.strip_prefix("uniform:"))
        .and_then(|p| p.parse().ok())
        .unwrap_or(0.5)
}

pub enum Target {
    Graph {
        family: String,
        params: String,
        graph: Graph,
        model: ProbModel,
        /// Figure-3 class size, when the family supports the strategic
        /// selector.
        figure3_t: Option<usize>,
    },
    Sets {
        family: String,
        params: String,
        inst: KSetInstance,
        model: ProbModel,
    },
}

impl Target {
    fn items(&self) -> usize {
        match self {
            Target::Graph { graph, .. } => graph.m(),
            Target::Sets { inst, .. } => inst.len(),
        }
    }

    fn with_model(&self, model: ProbModel) -> Self {
        match self {
            Target::Graph { family, params, graph, figure3_t, .. } => Target::Graph {
                family: family.clone(),
                params: params.clone(),
                graph: graph.clone(),
                model,
                figure3_t: *figure3_t,
            },
            Target::Sets { family, params, inst, .. } => Target::Sets {
                family: family.clone(),
                params: params.clone(),
                inst: inst.clone(),
                model,
            },
        }
    }
}

fn kidney_instance(s: &Settings) -> Result<(KSetInstance, Vec<f64>, String), CliError> {
    let n: usize = s.get_or("n", 250)?;
    let k_max: usize = s.get_or("k_max", 2)?;
    let f: f64 = s.get_or("f", 0.5)?;
    if !(0.0..=1.0).contains(&f) {
        return Err(CliError::config("f must lie in [0,1]"));
    }
    let seed = seed(s)?;
    let pool = gen_pool(n, seed, &PoolConfig::default()).map_err(cfg_err)?;
    let cycles = enumerate_cycles(build_compat(&pool), k_max).map_err(cfg_err)?;
    Ok((cycles.kset(), cycles.cycle_probs(f), format!("n={n};k_max={k_max};f={f};seed={seed}")))
}

/// The instance and model selected by `input`, `instance` or `family`.
pub fn load_target(s: &Settings) -> Result<Target, CliError> {
    let seed = seed(s)?;
    let explicit = s.raw("model");
    if let Some(path) = s.raw("input") {
        let (graph, file_model) = parse_graph(&read_file(path)?).map_err(cfg_err)?;
        let model = match (explicit, file_model) {
            (Some(spec), _) => parse_model_spec(spec, graph.m(), graph.n(), seed)?,
            (None, Some(m)) => m,
            (None, None) => ProbModel::Uniform(0.5),
        };
        model.check_compatible(&graph).map_err(cfg_err)?;
        return Ok(Target::Graph {
            family: "file".into(),
            params: path.into(),
            graph,
            model,
            figure3_t: None,
        });
    }
    if let Some(path) = s.raw("instance") {
        let (inst, file_model) = parse_instance(&read_file(path)?, true).map_err(cfg_err)?;
        let model = match (explicit, file_model) {
            (Some(spec), _) => parse_model_spec(spec, inst.len(), inst.universe(), seed)?,
            (None, Some(m)) => m,
            (None, None) => ProbModel::Uniform(0.5),
        };
        model.check_compatible(&inst).map_err(cfg_err)?;
        return Ok(Target::Sets {
            family: "file".into(),
            params: path.into(),
            inst,
            model,
        });
    }
    let family = s.require("family")?;
    if family == "kidney" {
        let (inst, probs, params) = kidney_instance(s)?;
        let model = match explicit {
            Some(spec) => parse_model_spec(spec, inst.len(), inst.universe(), seed)?,
            None => ProbModel::per_edge(probs).map_err(cfg_err)?,
        };
        return Ok(Target::Sets {
            family: "kidney".into(),
            params,
            inst,
            model,
        });
    }
    let gen = graph_family(s, family, uniform_hint(s))?;
    let model = match explicit {
        Some(spec) => parse_model_spec(spec, gen.graph.m(), gen.graph.n(), seed)?,
        None => ProbModel::Uniform(0.5),
    };
    model.check_compatible(&gen.graph).map_err(cfg_err)?;
    let figure3_t = if family == "figure3" { s.get("t")? } else { None };
    Ok(Target::Graph {
        family: gen.family,
        params: gen.params,
        graph: gen.graph,
        model,
        figure3_t,
    })
}

enum Alg {
    Match(MatchAlgorithm),
    Sets(KsetAlgorithm),
}

fn structure_cap(s: &Settings) -> Result<usize, CliError> {
    let cap: usize = s.get_or("s", 3)?;
    if cap == 0 || cap > MAX_S {
        return Err(CliError::config(format!("s must lie in 1..={MAX_S}, got {cap}")));
    }
    Ok(cap)
}

fn build_alg(s: &Settings, target: &Target, rounds: usize) -> Result<Alg, CliError> {
    let id = s.require("alg")?;
    let cap = structure_cap(s)?;
    if let Some(k) = match id {
        "kset-adaptive" => Some(KsetAlgorithm::Adaptive { rounds, s: cap }),
        "kset-nonadaptive" => Some(KsetAlgorithm::NonAdaptive { rounds, s: cap }),
        "kset-single" => Some(KsetAlgorithm::SinglePacking { s: cap }),
        "kset-query-all" => Some(KsetAlgorithm::QueryAll),
        _ => None,
    } {
        return Ok(Alg::Sets(k));
    }
    let Target::Graph { graph, figure3_t, .. } = target else {
        return Err(CliError::config(format!(
            "algorithm '{id}' needs a graph; set instances take {}",
            KSET_ALGORITHM_IDS.join(", ")
        )));
    };
    if id == "nonadaptive-strategic" {
        let Some(t) = figure3_t else {
            return Err(CliError::config("nonadaptive-strategic needs --family figure3"));
        };
        let mut sel = Figure3Selector::new(*t).map_err(cfg_err)?;
        let plan = nonadaptive_select_strategic(graph, rounds, &mut sel).map_err(cfg_err)?;
        return Ok(Alg::Match(MatchAlgorithm::Planned {
            id: id.into(),
            rounds,
            plan,
        }));
    }
    let mut alg = MatchAlgorithm::from_id(id, rounds).map_err(|_| {
        CliError::config(format!(
            "unknown algorithm '{id}' (known: {}, nonadaptive-strategic, {})",
            stochmatch::bench::MATCH_ALGORITHM_IDS.join(", "),
            KSET_ALGORITHM_IDS.join(", ")
        ))
    })?;
    if let MatchAlgorithm::Adaptive { path_cap, .. } = &mut alg {
        *path_cap = s.get("path-cap")?;
    }
    if matches!(alg, MatchAlgorithm::NonAdaptive { rounds: 0 } | MatchAlgorithm::NaiveScheduled { rounds: 0 }) {
        return Err(CliError::config(format!("algorithm '{id}' needs R >= 1")));
    }
    prepare_matching(graph, &alg).map_err(cfg_err)?;
    Ok(Alg::Match(alg))
}

fn eval_config(s: &Settings, items: usize) -> Result<EvalConfig, CliError> {
    let trials: usize = s.get_or("trials", 100)?;
    if trials == 0 {
        return Err(CliError::config("trials must be at least 1"));
    }
    let omniscient = match s.raw("omniscient").unwrap_or("auto") {
        "auto" => OmniPolicy::Auto,
        "exact" => {
            if items > EXACT_ITEM_LIMIT {
                return Err(CliError::config(format!(
                    "exact omniscient needs at most {EXACT_ITEM_LIMIT} items, instance has {items}"
                )));
            }
            OmniPolicy::Exact
        }
        "mc" => OmniPolicy::Paired,
        other => return Err(CliError::config(format!("omniscient must be auto, exact or mc, got '{other}'"))),
    };
    Ok(EvalConfig {
        trials,
        base_seed: seed(s)?,
        omniscient,
    })
}

fn evaluate(target: &Target, alg: &Alg, cfg: &EvalConfig, proxy_s: usize) -> Result<Evaluation, CliError> {
    let ev = match (target, alg) {
        (Target::Graph { graph, model, .. }, Alg::Match(a)) => evaluate_matching(graph, model, a, cfg),
        (Target::Graph { graph, model, .. }, Alg::Sets(a)) => {
            evaluate_kset(&KSetInstance::from_graph(graph), model, a, cfg, proxy_s)
        }
        (Target::Sets { inst, model, .. }, Alg::Sets(a)) => evaluate_kset(inst, model, a, cfg, proxy_s),
        (Target::Sets { .. }, Alg::Match(_)) => unreachable!("rejected in build_alg"),
    }
    .map_err(rt_err)?;
    let (family, params) = match target {
        Target::Graph { family, params, .. } | Target::Sets { family, params, .. } => (family.clone(), params.clone()),
    };
    Ok(Evaluation {
        record: ev.record.clone().labeled(family, params),
        ..ev
    })
}

/// Per-round record of trial 0.
fn trial_zero_report(target: &Target, alg: &Alg, cfg: &EvalConfig, proxy_s: usize) -> Result<String, CliError> {
    let seed = trial_seed(cfg.base_seed, 0);
    let rep = match (target, alg) {
        (Target::Graph { graph, model, .. }, Alg::Match(a)) => {
            let real = sample_with_probs(&item_probs(model, graph).map_err(rt_err)?, seed);
            let prepared = prepare_matching(graph, a).map_err(rt_err)?;
            run_matching_trial(graph, &prepared, &real, seed).map_err(rt_err)?.0
        }
        (Target::Graph { graph, model, .. }, Alg::Sets(a)) => {
            let inst = KSetInstance::from_graph(graph);
            let real = sample_with_probs(&item_probs(model, &inst).map_err(rt_err)?, seed);
            let prepared = prepare_kset(&inst, a).map_err(rt_err)?;
            run_kset_trial(&inst, &prepared, &real, proxy_s).map_err(rt_err)?.0
        }
        (Target::Sets { inst, model, .. }, Alg::Sets(a)) => {
            let real = sample_with_probs(&item_probs(model, inst).map_err(rt_err)?, seed);
            let prepared = prepare_kset(inst, a).map_err(rt_err)?;
            run_kset_trial(inst, &prepared, &real, proxy_s).map_err(rt_err)?.0
        }
        (Target::Sets { .. }, Alg::Match(_)) => unreachable!("rejected in build_alg"),
    };
    let solution: Vec<String> = rep.solution.iter().map(|x| x.to_string()).collect();
    Ok(format!(
        "# trial 0 seed {seed}\n# solution {}\n# max_budget {}\n{}",
        solution.join(" "),
        rep.max_budget,
        rep.to_record_text()
    ))
}

fn extra_header_lines(s: &Settings, target: &Target) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    if let Some(delta) = s.get::<f64>("delta")? {
        let model = match target {
            Target::Graph { model, .. } | Target::Sets { model, .. } => model,
        };
        let count = f_delta(model, delta).map_err(cfg_err)?;
        out.push(format!("f_delta({delta})={count}"));
    }
    Ok(out)
}

pub fn cmd_run(s: &Settings) -> Result<(), CliError> {
    let target = load_target(s)?;
    let rounds: usize = s.get_or("R", 1)?;
    let alg = build_alg(s, &target, rounds)?;
    let cfg = eval_config(s, target.items())?;
    let proxy_s = structure_cap(s)?;
    let mut header = s.echo("run");
    header.extend(extra_header_lines(s, &target)?);
    eprintln!("running {} trials", cfg.trials);
    let ev = evaluate(&target, &alg, &cfg, proxy_s)?;
    header.push(format!("max_budget={} max_queries={}", ev.max_budget, ev.max_queries));
    let text = header_block(&header) + &csv_text(&ratio_header(), &[ev.record.fields()])?;
    if let Some(path) = s.raw("report") {
        let dump = header_block(&s.echo("run")) + &trial_zero_report(&target, &alg, &cfg, proxy_s)?;
        fs::write(path, dump).map_err(|e| CliError::runtime(format!("cannot write '{path}': {e}")))?;
    }
    emit(s, &text)
}

fn kidney_sweep(s: &Settings, family: &str) -> Result<(), CliError> {
    let k_max = match family {
        "kidney-2cycle" => 2,
        "kidney-23cycle" => 3,
        _ => s.get_or("k_max", 2)?,
    };
    let mut kc = KidneyConfig::new(s.get_or("n", 250)?, k_max, s.get_or("trials", 100)?, seed(s)?);
    if let Some(f) = s.f64_list("f")? {
        kc.f_grid = f;
    }
    if let Some(r) = s.usize_list("R")? {
        kc.r_grid = r;
    }
    kc.s = s.get_or("s", 2)?;
    if kc.s > MAX_S {
        return Err(CliError::config(format!("s must lie in 1..={MAX_S}")));
    }
    kc.include_empty = s.flag("include-empty")?;
    kc.validate().map_err(cfg_err)?;
    eprintln!("kidney sweep: {} trials, {} cells", kc.trials, kc.f_grid.len() * kc.r_grid.len());
    let rows = run_experiment(&kc).map_err(rt_err)?;
    let mut header = ratio_header();
    header.extend(KIDNEY_EXTRA_HEADER.iter().map(|s| s.to_string()));
    let mut comments = s.echo("sweep");
    let excluded: usize = rows.iter().map(|r| r.excluded).sum();
    comments.push(format!("trials with an empty omniscient packing excluded: {excluded}"));
    let fields: Vec<Vec<String>> = rows.iter().map(|r| r.fields()).collect();
    emit(s, &(header_block(&comments) + &csv_text(&header, &fields)?))
}

pub fn cmd_sweep(s: &Settings) -> Result<(), CliError> {
    if let Some(family) = s.raw("family") {
        if KIDNEY_FAMILIES.contains(&family) && s.raw("alg").is_none() {
            return kidney_sweep(s, family);
        }
    }
    let base = load_target(s)?;
    let rounds = s.usize_list("R")?.unwrap_or_else(|| vec![1]);
    let targets: Vec<Target> = match s.f64_list("p")? {
        Some(ps) => ps
            .into_iter()
            .map(|p| ProbModel::uniform(p).map(|m| base.with_model(m)).map_err(cfg_err))
            .collect::<Result<_, _>>()?,
        None => vec![base],
    };
    let cfg = eval_config(s, targets[0].items())?;
    let proxy_s = structure_cap(s)?;
    let mut plans = Vec::new();
    for t in &targets {
        for &r in &rounds {
            plans.push((t, build_alg(s, t, r)?));
        }
    }
    let mut rows = Vec::new();
    for (i, (t, alg)) in plans.iter().enumerate() {
        eprintln!("cell {}/{}", i + 1, plans.len());
        rows.push(evaluate(t, alg, &cfg, proxy_s)?.record.fields());
    }
    let mut header = s.echo("sweep");
    header.extend(extra_header_lines(s, &targets[0])?);
    emit(s, &(header_block(&header) + &csv_text(&ratio_header(), &rows)?))
}

pub fn cmd_generate(s: &Settings) -> Result<(), CliError> {
    let family = s.require("family")?;
    let seed = seed(s)?;
    let header = s.echo("generate");
    let text = match family {
        "kidney-pool" => {
            let pool = gen_pool(s.get_or("n", 250)?, seed, &PoolConfig::default()).map_err(cfg_err)?;
            write_pool(&pool, &header)
        }
        "kidney" => {
            let (inst, probs, _) = kidney_instance(s)?;
            write_instance(&inst, Some(&probs), &header)
        }
        _ => {
            let gen = graph_family(s, family, uniform_hint(s))?;
            let model = match s.raw("model") {
                Some(spec) => Some(parse_model_spec(spec, gen.graph.m(), gen.graph.n(), seed)?),
                None => None,
            };
            let mut header = header;
            for c in &gen.classes {
                header.push(format!("class {} {}", c.name, c.vertices.len()));
            }
            write_graph(&gen.graph, model.as_ref(), &header)
        }
    };
    emit(s, &text)
}

pub fn cmd_replicate(s: &Settings) -> Result<(), CliError> {
    let suite = s.require("suite")?;
    if !SUITES.contains(&suite) {
        return Err(CliError::config(format!("unknown suite '{suite}' (known: {})", SUITES.join(", "))));
    }
    let cfg = SuiteConfig {
        trials: s.get("trials")?,
        seed: seed(s)?,
        size: s.get("size")?,
        include_empty: s.flag("include-empty")?,
    };
    if cfg.trials == Some(0) {
        return Err(CliError::config("trials must be at least 1"));
    }
    eprintln!("replicating {suite}");
    let out = run_suite(suite, &cfg).map_err(rt_err)?;
    for b in &out.budgets {
        eprintln!(
            "budget {}: {} {} {} ({})",
            b.label,
            b.observed,
            if b.ok() { "<=" } else { ">" },
            b.cap,
            if b.total { "total" } else { "per vertex" }
        );
    }
    let rows: Vec<Vec<String>> = out.rows.iter().map(|r| out.row_fields(r)).collect();
    emit(s, &(header_block(&s.echo("replicate")) + &csv_text(&out.header(), &rows)?))
}
