//! Query algorithms for stochastic matching.
//!
//! Every algorithm sees the realization only through a [`QueryOracle`], so
//! per-vertex budgets can be audited from the oracle's counters after the
//! run.

use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{max_matching, max_matching_with, symmetric_difference, Adj, Graph, Matching, Side};
use crate::model::QueryOracle;
use crate::report::{RoundRecord, RunReport};

pub type GraphOracle<'a> = QueryOracle<'a, Graph>;

/// Constants of the adaptive guarantee for a target gap `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoryParams {
    pub epsilon: f64,
    pub p_min: f64,
    /// Odd bound on augmenting-path length.
    pub path_len: usize,
    pub rounds: u64,
    pub alpha: f64,
    pub gamma: f64,
}

impl TheoryParams {
    /// `(alpha/gamma) * (1 - (1 - gamma)^R)`, the fraction of the
    /// omniscient optimum guaranteed after `rounds` rounds.
    pub fn guarantee(&self) -> f64 {
        guarantee(self.alpha, self.gamma, self.rounds)
    }
}

pub fn guarantee(alpha: f64, gamma: f64, rounds: u64) -> f64 {
    (alpha / gamma) * (1.0 - (1.0 - gamma).max(0.0).powf(rounds as f64))
}

/// Path bound L = smallest odd integer >= 4/eps - 1, and
/// R = ceil(ln(2/eps) / p^((L+1)/2)).
pub fn derive_params(epsilon: f64, p_min: f64) -> Result<TheoryParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    if !(p_min > 0.0 && p_min <= 1.0) {
        return Err(Error::domain(format!("p_min must lie in (0,1], got {p_min}")));
    }
    // tolerance absorbs representation error in 4/eps, e.g. eps = 0.8
    let target = (4.0 / epsilon - 1.0 - 1e-9).ceil().max(1.0) as usize;
    let path_len = if target % 2 == 1 { target } else { target + 1 };
    let half = (path_len + 1) / 2;
    let success = p_min.powi(half as i32);
    let rounds = ((2.0 / epsilon).ln() / success - 1e-9).ceil();
    if !rounds.is_finite() || rounds > u64::MAX as f64 {
        return Err(Error::domain("round count overflows"));
    }
    let alpha = success;
    let gamma = success * (1.0 + 2.0 / (path_len as f64 + 1.0));
    Ok(TheoryParams {
        epsilon,
        p_min,
        path_len,
        rounds: rounds as u64,
        alpha,
        gamma,
    })
}

fn known_sets(g: &Graph, oracle: &GraphOracle<'_>) -> (FixedBitSet, FixedBitSet) {
    let mut exists = FixedBitSet::with_capacity(g.m());
    let mut missing = FixedBitSet::with_capacity(g.m());
    for &e in oracle.log() {
        if oracle.known(e) == Some(true) {
            exists.insert(e);
        } else {
            missing.insert(e);
        }
    }
    (exists, missing)
}

/// Queries `edges` in order (skipping known ones) and returns the round
/// record plus a maximum matching over all edges known to exist.
fn query_and_match(g: &Graph, oracle: &mut GraphOracle<'_>, edges: &[usize]) -> RunReport {
    let mut rec = RoundRecord::default();
    for &e in edges {
        if oracle.was_queried(e) {
            continue;
        }
        rec.queried.push(e);
        if oracle.query(e) {
            rec.found += 1;
        }
    }
    let (exists, _) = known_sets(g, oracle);
    let m = max_matching_with(g, |e| exists.contains(e), None);
    rec.size = m.len();
    RunReport {
        solution: m.edges().to_vec(),
        rounds: vec![rec],
        max_budget: oracle.max_counter(),
    }
}

/// Adaptive rounds: match on everything not known to be missing, query the
/// augmenting paths that matching offers, rematch on known edges.
pub fn adaptive_match(g: &Graph, oracle: &mut GraphOracle<'_>, rounds: usize) -> RunReport {
    adaptive_match_capped(g, oracle, rounds, None).expect("uncapped run cannot fail")
}

/// [`adaptive_match`] with an optional odd cap on the length of queried
/// augmenting paths (ablation knob; `None` queries every path).
pub fn adaptive_match_capped(
    g: &Graph,
    oracle: &mut GraphOracle<'_>,
    rounds: usize,
    path_cap: Option<usize>,
) -> Result<RunReport> {
    if let Some(cap) = path_cap {
        if cap == 0 || cap % 2 == 0 {
            return Err(Error::InvalidLength(cap));
        }
    }
    let (mut exists, mut missing) = known_sets(g, oracle);
    let mut current = max_matching_with(g, |e| exists.contains(e), None);
    let mut report = RunReport::default();

    for _ in 0..rounds {
        let optimistic = max_matching_with(g, |e| !missing.contains(e), Some(&current));
        let mut rec = RoundRecord::default();
        for path in symmetric_difference(&current, &optimistic, g) {
            if !path.augments(Side::First) || path_cap.is_some_and(|c| path.len() > c) {
                continue;
            }
            for &e in &path.edges {
                if oracle.was_queried(e) {
                    continue;
                }
                rec.queried.push(e);
                if oracle.query(e) {
                    rec.found += 1;
                    exists.insert(e);
                } else {
                    missing.insert(e);
                }
            }
        }
        current = max_matching_with(g, |e| exists.contains(e), Some(&current));
        rec.size = current.len();
        report.rounds.push(rec);
    }

    report.solution = current.edges().to_vec();
    report.max_budget = oracle.max_counter();
    Ok(report)
}

/// Chooses one maximum matching of the residual graph per round.
pub trait MatchingSelector {
    /// `available` marks the edges not chosen in earlier rounds.
    fn select(&mut self, g: &Graph, round: usize, available: &FixedBitSet) -> Vec<usize>;
}

/// Lowest-index deterministic choice; what [`nonadaptive_select`] uses.
#[derive(Clone, Copy, Debug, Default)]
pub struct LowestIndexSelector;

impl MatchingSelector for LowestIndexSelector {
    fn select(&mut self, g: &Graph, _round: usize, available: &FixedBitSet) -> Vec<usize> {
        max_matching_with(g, |e| available.contains(e), None).edges().to_vec()
    }
}

/// The R successively removed maximum matchings, with the choice in each
/// round delegated to `selector` and checked against the residual graph.
/// Stops early once the residual graph has no edges left to match.
pub fn nonadaptive_rounds_strategic<S: MatchingSelector + ?Sized>(
    g: &Graph,
    rounds: usize,
    selector: &mut S,
) -> Result<Vec<Matching>> {
    if rounds == 0 {
        return Err(Error::domain("non-adaptive selection needs at least one round"));
    }
    let mut available = FixedBitSet::with_capacity(g.m());
    available.insert_range(..);
    let mut out = Vec::new();
    for round in 1..=rounds {
        let chosen = selector.select(g, round, &available);
        if let Some(&e) = chosen.iter().find(|&&e| e >= g.m() || !available.contains(e)) {
            return Err(Error::SelectorRejected {
                round,
                reason: format!("edge {e} is not in the residual graph"),
            });
        }
        let m = Matching::new(g, chosen).map_err(|err| Error::SelectorRejected {
            round,
            reason: err.to_string(),
        })?;
        let best = max_matching_with(g, |e| available.contains(e), None).len();
        if m.len() != best {
            return Err(Error::SelectorRejected {
                round,
                reason: format!("matching has {} edges, residual maximum is {best}", m.len()),
            });
        }
        if m.is_empty() {
            break;
        }
        for &e in m.edges() {
            available.set(e, false);
        }
        out.push(m);
    }
    Ok(out)
}

pub fn nonadaptive_select_strategic<S: MatchingSelector + ?Sized>(
    g: &Graph,
    rounds: usize,
    selector: &mut S,
) -> Result<Vec<usize>> {
    let rounds = nonadaptive_rounds_strategic(g, rounds, selector)?;
    let mut edges: Vec<usize> = rounds.iter().flat_map(|m| m.edges().iter().copied()).collect();
    edges.sort_unstable();
    Ok(edges)
}

/// Union of `rounds` successively removed maximum matchings. Depends on the
/// graph alone; no realization is involved.
pub fn nonadaptive_select(g: &Graph, rounds: usize) -> Result<Vec<usize>> {
    nonadaptive_select_strategic(g, rounds, &mut LowestIndexSelector)
}

/// Queries a precomputed plan in one round and matches on what exists.
pub fn query_plan(g: &Graph, oracle: &mut GraphOracle<'_>, plan: &[usize]) -> RunReport {
    query_and_match(g, oracle, plan)
}

pub fn nonadaptive_match(g: &Graph, oracle: &mut GraphOracle<'_>, rounds: usize) -> Result<RunReport> {
    let plan = nonadaptive_select(g, rounds)?;
    Ok(query_and_match(g, oracle, &plan))
}

/// Every vertex, in index order, picks `min(budget, degree)` incident
/// edges uniformly at random; the union is queried.
pub fn naive_random<R: Rng + ?Sized>(
    g: &Graph,
    oracle: &mut GraphOracle<'_>,
    budget: usize,
    rng: &mut R,
) -> RunReport {
    let mut chosen = FixedBitSet::with_capacity(g.m());
    let mut plan = Vec::new();
    for v in 0..g.n() {
        let adj = g.neighbors(v);
        let take = budget.min(adj.len());
        if take == 0 {
            continue;
        }
        for i in index::sample(rng, adj.len(), take) {
            let e = adj[i].edge as usize;
            if !chosen.put(e) {
                plan.push(e);
            }
        }
    }
    query_and_match(g, oracle, &plan)
}

/// Scheduling baseline: each vertex, in index order, schedules up to
/// `rounds` queries to random neighbors that still have fewer than
/// `rounds` scheduled queries. The cap holds for both endpoints.
pub fn naive_scheduled<R: Rng + ?Sized>(
    g: &Graph,
    oracle: &mut GraphOracle<'_>,
    rounds: usize,
    rng: &mut R,
) -> Result<RunReport> {
    if rounds == 0 {
        return Err(Error::domain("scheduling cap must be at least 1"));
    }
    let mut scheduled = vec![0usize; g.n()];
    let mut chosen = FixedBitSet::with_capacity(g.m());
    let mut plan = Vec::new();
    let mut open: Vec<Adj> = Vec::new();
    for v in 0..g.n() {
        let room = rounds.saturating_sub(scheduled[v]);
        if room == 0 {
            continue;
        }
        open.clear();
        open.extend(
            g.neighbors(v)
                .iter()
                .filter(|a| scheduled[a.to as usize] < rounds && !chosen.contains(a.edge as usize)),
        );
        let take = room.min(open.len());
        if take == 0 {
            continue;
        }
        for i in index::sample(rng, open.len(), take) {
            let a = open[i];
            chosen.insert(a.edge as usize);
            plan.push(a.edge as usize);
            scheduled[v] += 1;
            scheduled[a.to as usize] += 1;
        }
    }
    Ok(query_and_match(g, oracle, &plan))
}

/// Queries one maximum matching and keeps the edges that exist.
pub fn single_matching_baseline(g: &Graph, oracle: &mut GraphOracle<'_>) -> RunReport {
    let m = max_matching(g);
    query_and_match(g, oracle, m.edges())
}

/// Queries every edge. Reference point whose ratio is exactly 1.
pub fn query_all(g: &Graph, oracle: &mut GraphOracle<'_>) -> RunReport {
    let all: Vec<usize> = (0..g.m()).collect();
    query_and_match(g, oracle, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rng_for, sample_realization, ProbModel, Realization, Stream};

    fn k4() -> Graph {
        Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn p4() -> Graph {
        Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn derive_params_examples() {
        let t = derive_params(0.5, 0.5).unwrap();
        assert_eq!(t.path_len, 7);
        assert_eq!(t.rounds, 23);
        assert_eq!(t.alpha, 0.0625);
        assert!((t.gamma - 0.078125).abs() < 1e-15);

        assert!(derive_params(1.0, 0.5).is_err());
        assert!(derive_params(0.0, 0.5).is_err());
        assert!(derive_params(0.5, 0.0).is_err());

        for eps in [0.3, 0.5, 0.8] {
            let t = derive_params(eps, 1.0).unwrap();
            let l = t.path_len as f64;
            assert!((t.gamma - (1.0 + 2.0 / (l + 1.0))).abs() < 1e-12);
            assert!((t.alpha - t.gamma * (l + 1.0) / (l + 3.0)).abs() < 1e-12);
            assert!(t.alpha <= t.gamma);
            assert_eq!(t.path_len % 2, 1);
        }
        assert_eq!(derive_params(0.8, 0.5).unwrap().path_len, 5);
        assert_eq!(derive_params(0.3, 0.5).unwrap().path_len, 13);
    }

    #[test]
    fn adaptive_trivial_cases() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let r = Realization::all(1, true);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = adaptive_match(&g, &mut o, 1);
        assert_eq!(rep.size(), 1);
        assert_eq!(rep.total_queries(), 1);

        let g = k4();
        let r = Realization::all(6, true);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = adaptive_match(&g, &mut o, 0);
        assert_eq!(rep.size(), 0);
        assert_eq!(o.distinct_queries(), 0);
    }

    #[test]
    fn adaptive_on_p4() {
        let g = p4();
        let r = Realization::all(3, true);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = adaptive_match(&g, &mut o, 2);
        assert_eq!(rep.trace(), vec![2, 2]);
        assert_eq!(rep.rounds[0].queried, vec![0, 2]);
        assert!(rep.rounds[1].queried.is_empty());
    }

    #[test]
    fn adaptive_regrows_after_failure() {
        // middle edge missing: the first round queries the perfect
        // matching (0,1),(2,3) directly and both exist
        let g = p4();
        let r = Realization::from_fn(3, |e| e != 1);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        assert_eq!(adaptive_match(&g, &mut o, 3).size(), 2);

        // end edge missing: (2,3) already blocks (1,2), so it is never queried
        let r = Realization::from_fn(3, |e| e != 0);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = adaptive_match(&g, &mut o, 3);
        assert_eq!(rep.trace(), vec![1, 1, 1]);
        assert_eq!(o.log(), &[0, 2]);

        // both end edges missing: round 2 finds the middle edge
        let r = Realization::from_fn(3, |e| e == 1);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = adaptive_match(&g, &mut o, 3);
        assert_eq!(rep.trace(), vec![0, 1, 1]);
        assert_eq!(o.log(), &[0, 2, 1]);
    }

    #[test]
    fn adaptive_cap_validation() {
        let g = p4();
        let r = Realization::all(3, true);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        assert_eq!(
            adaptive_match_capped(&g, &mut o, 1, Some(4)),
            Err(Error::InvalidLength(4))
        );
    }

    #[test]
    fn nonadaptive_select_examples() {
        let g = k4();
        assert_eq!(nonadaptive_select(&g, 1).unwrap().len(), 2);
        assert_eq!(nonadaptive_select(&g, 3).unwrap(), (0..6).collect::<Vec<_>>());
        assert_eq!(nonadaptive_select(&g, 7).unwrap(), (0..6).collect::<Vec<_>>());
        let single = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(nonadaptive_select(&single, 5).unwrap(), vec![0]);
        assert!(nonadaptive_select(&g, 0).is_err());
    }

    #[test]
    fn nonadaptive_match_degenerate() {
        let g = k4();
        let r = Realization::all(6, true);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        assert_eq!(nonadaptive_match(&g, &mut o, 1).unwrap().size(), 2);
        let r = Realization::all(6, false);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        assert_eq!(nonadaptive_match(&g, &mut o, 4).unwrap().size(), 0);
    }

    #[test]
    fn nonadaptive_single_edge_mean() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let model = ProbModel::Uniform(0.5);
        let total: usize = (0..10_000u64)
            .map(|s| {
                let r = sample_realization(&model, &g, s).unwrap();
                let mut o = GraphOracle::new(&g, &r).unwrap();
                nonadaptive_match(&g, &mut o, 1).unwrap().size()
            })
            .sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 0.5).abs() <= 0.02, "{mean}");
    }

    struct Fixed(Vec<Vec<usize>>);

    impl MatchingSelector for Fixed {
        fn select(&mut self, _g: &Graph, round: usize, _a: &FixedBitSet) -> Vec<usize> {
            self.0[round - 1].clone()
        }
    }

    #[test]
    fn strategic_selector_validation() {
        let g = k4();
        assert_eq!(
            nonadaptive_select_strategic(&g, 3, &mut LowestIndexSelector).unwrap(),
            nonadaptive_select(&g, 3).unwrap()
        );
        // one edge is not maximum
        let err = nonadaptive_select_strategic(&g, 1, &mut Fixed(vec![vec![0]])).unwrap_err();
        assert!(matches!(err, Error::SelectorRejected { round: 1, .. }));
        // reusing a removed edge
        let err =
            nonadaptive_select_strategic(&g, 2, &mut Fixed(vec![vec![0, 5], vec![0, 5]])).unwrap_err();
        assert!(matches!(err, Error::SelectorRejected { round: 2, .. }));
        // not a matching
        let err = nonadaptive_select_strategic(&g, 1, &mut Fixed(vec![vec![0, 1]])).unwrap_err();
        assert!(matches!(err, Error::SelectorRejected { round: 1, .. }));
        // a different valid schedule
        let ok = nonadaptive_select_strategic(&g, 2, &mut Fixed(vec![vec![2, 3], vec![0, 5]])).unwrap();
        assert_eq!(ok, vec![0, 2, 3, 5]);
    }

    #[test]
    fn naive_random_extremes() {
        let g = k4();
        let r = Realization::all(6, true);
        let mut rng = rng_for(1, Stream::Algorithm);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = naive_random(&g, &mut o, 3, &mut rng);
        assert_eq!(o.distinct_queries(), 6);
        assert_eq!(rep.size(), 2);

        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = naive_random(&g, &mut o, 0, &mut rng);
        assert_eq!(rep.size(), 0);
        assert_eq!(o.distinct_queries(), 0);
    }

    #[test]
    fn naive_scheduled_star() {
        let star = Graph::new(6, (1..6).map(|i| (0, i))).unwrap();
        let r = Realization::all(5, true);
        let mut rng = rng_for(9, Stream::Algorithm);
        let mut o = GraphOracle::new(&star, &r).unwrap();
        let rep = naive_scheduled(&star, &mut o, 2, &mut rng).unwrap();
        assert_eq!(o.distinct_queries(), 2);
        assert_eq!(o.counter(0), 2);
        assert_eq!(rep.size(), 1);

        let g = k4();
        let r = Realization::all(6, true);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        let rep = naive_scheduled(&g, &mut o, 4, &mut rng).unwrap();
        assert_eq!(o.distinct_queries(), 6);
        assert_eq!(rep.size(), 2);
        assert!(naive_scheduled(&g, &mut o, 0, &mut rng).is_err());
    }

    #[test]
    fn single_matching_extremes() {
        let g = Graph::new(8, (0..4).map(|i| (2 * i, 2 * i + 1))).unwrap();
        let r = Realization::all(4, true);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        assert_eq!(single_matching_baseline(&g, &mut o).size(), 4);
        let r = Realization::all(4, false);
        let mut o = GraphOracle::new(&g, &r).unwrap();
        assert_eq!(single_matching_baseline(&g, &mut o).size(), 0);
    }
}
