//! Existence-probability models, seeded realizations and budget-counting
//! query oracles.
//!
//! Everything here is generic over [`Incidence`]: an item is an edge of a
//! [`Graph`] (its points are the two endpoints) or a set of a k-set
//! instance (its points are its elements). Per-vertex budgets for matching
//! and per-element budgets for packing are the same counter.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Items that touch a fixed universe of points.
pub trait Incidence {
    fn item_count(&self) -> usize;
    fn point_count(&self) -> usize;
    fn members(&self, item: usize) -> &[u32];
}

impl Incidence for Graph {
    fn item_count(&self) -> usize {
        self.m()
    }

    fn point_count(&self) -> usize {
        self.n()
    }

    fn members(&self, item: usize) -> &[u32] {
        self.raw_endpoints(item)
    }
}

/// Seed of trial `t` in an experiment with base seed `base`.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base ^ trial
}

/// Random streams derived from one seed. Realizations and algorithm
/// coin flips never share a stream, so adding a randomized algorithm to a
/// run leaves its realizations unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Realization = 0,
    Algorithm = 1,
    Generator = 2,
    Extra = 3,
}

pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must lie in [0,1], got {p}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbModel {
    Uniform(f64),
    /// One probability per item (edge or set).
    PerEdge(Vec<f64>),
    /// One parameter per point; an item exists with the product of its
    /// members' parameters.
    VertexParams(Vec<f64>),
}

impl ProbModel {
    pub fn uniform(p: f64) -> Result<Self> {
        check_prob(p, "probability")?;
        Ok(ProbModel::Uniform(p))
    }

    pub fn per_edge(probs: Vec<f64>) -> Result<Self> {
        for &p in &probs {
            check_prob(p, "probability")?;
        }
        Ok(ProbModel::PerEdge(probs))
    }

    pub fn vertex_params(params: Vec<f64>) -> Result<Self> {
        for &p in &params {
            check_prob(p, "vertex parameter")?;
        }
        Ok(ProbModel::VertexParams(params))
    }

    pub fn check_compatible<I: Incidence + ?Sized>(&self, inc: &I) -> Result<()> {
        match self {
            ProbModel::Uniform(p) => check_prob(*p, "probability"),
            ProbModel::PerEdge(v) if v.len() != inc.item_count() => Err(Error::domain(format!(
                "per-edge model has {} entries for {} items",
                v.len(),
                inc.item_count()
            ))),
            ProbModel::VertexParams(v) if v.len() != inc.point_count() => {
                Err(Error::domain(format!(
                    "vertex-parameter model has {} entries for {} points",
                    v.len(),
                    inc.point_count()
                )))
            }
            _ => Ok(()),
        }
    }

    /// Smallest item probability; 1 for an empty instance.
    pub fn min_prob<I: Incidence + ?Sized>(&self, inc: &I) -> Result<f64> {
        self.check_compatible(inc)?;
        let mut min = 1.0f64;
        for item in 0..inc.item_count() {
            min = min.min(item_prob(self, inc, item)?);
        }
        Ok(min)
    }

    pub fn describe(&self) -> String {
        match self {
            ProbModel::Uniform(p) => format!("uniform:{p}"),
            ProbModel::PerEdge(v) => format!("peredge:{}", v.len()),
            ProbModel::VertexParams(v) => format!("vertexparams:{}", v.len()),
        }
    }
}

/// Existence probability of edge `e` of `g`.
pub fn edge_prob(model: &ProbModel, g: &Graph, e: usize) -> Result<f64> {
    item_prob(model, g, e)
}

pub fn item_prob<I: Incidence + ?Sized>(model: &ProbModel, inc: &I, item: usize) -> Result<f64> {
    if item >= inc.item_count() {
        return Err(Error::IndexOutOfRange {
            index: item,
            len: inc.item_count(),
        });
    }
    match model {
        ProbModel::Uniform(p) => Ok(*p),
        ProbModel::PerEdge(v) => v.get(item).copied().ok_or(Error::IndexOutOfRange {
            index: item,
            len: v.len(),
        }),
        ProbModel::VertexParams(v) => inc.members(item).iter().try_fold(1.0, |acc, &x| {
            v.get(x as usize)
                .map(|p| acc * p)
                .ok_or(Error::IndexOutOfRange {
                    index: x as usize,
                    len: v.len(),
                })
        }),
    }
}

/// All item probabilities, validated against `inc`.
pub fn item_probs<I: Incidence + ?Sized>(model: &ProbModel, inc: &I) -> Result<Vec<f64>> {
    model.check_compatible(inc)?;
    (0..inc.item_count()).map(|i| item_prob(model, inc, i)).collect()
}

/// Which items exist in one draw of the model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    bits: FixedBitSet,
}

impl Realization {
    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut bits = FixedBitSet::with_capacity(len);
        for i in 0..len {
            bits.set(i, f(i));
        }
        Realization { bits }
    }

    pub fn all(len: usize, exists: bool) -> Self {
        let mut bits = FixedBitSet::with_capacity(len);
        if exists {
            bits.insert_range(..);
        }
        Realization { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn exists(&self, item: usize) -> bool {
        self.bits.contains(item)
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn existing(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }
}

/// Draws each item independently with its model probability.
pub fn sample_realization<I: Incidence + ?Sized>(
    model: &ProbModel,
    inc: &I,
    seed: u64,
) -> Result<Realization> {
    let probs = item_probs(model, inc)?;
    Ok(sample_with_probs(&probs, seed))
}

/// Same as [`sample_realization`] with precomputed probabilities.
pub fn sample_with_probs(probs: &[f64], seed: u64) -> Realization {
    let mut rng = rng_for(seed, Stream::Realization);
    let mut bits = FixedBitSet::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        // one draw per item, even when p is 0 or 1, keeps streams aligned
        let u: f64 = rng.random();
        if u < p {
            bits.insert(i);
        }
    }
    Realization { bits }
}

/// Answers existence queries against a hidden realization and counts, per
/// point, how many distinct queried items touch it.
#[derive(Debug)]
pub struct QueryOracle<'a, I: Incidence + ?Sized> {
    inc: &'a I,
    hidden: &'a Realization,
    queried: FixedBitSet,
    log: Vec<usize>,
    counters: Vec<u32>,
}

impl<'a, I: Incidence + ?Sized> QueryOracle<'a, I> {
    pub fn new(inc: &'a I, hidden: &'a Realization) -> Result<Self> {
        if hidden.len() != inc.item_count() {
            return Err(Error::domain(format!(
                "realization has {} items, instance has {}",
                hidden.len(),
                inc.item_count()
            )));
        }
        Ok(QueryOracle {
            inc,
            hidden,
            queried: FixedBitSet::with_capacity(inc.item_count()),
            log: Vec::new(),
            counters: vec![0; inc.point_count()],
        })
    }

    /// Tests one item. Repeat queries return the same answer and cost
    /// nothing.
    pub fn query(&mut self, item: usize) -> bool {
        if !self.queried.put(item) {
            self.log.push(item);
            for &p in self.inc.members(item) {
                self.counters[p as usize] += 1;
            }
        }
        self.hidden.exists(item)
    }

    /// `Some(answer)` for an item already queried.
    pub fn known(&self, item: usize) -> Option<bool> {
        self.queried.contains(item).then(|| self.hidden.exists(item))
    }

    pub fn was_queried(&self, item: usize) -> bool {
        self.queried.contains(item)
    }

    pub fn log(&self) -> &[usize] {
        &self.log
    }

    pub fn distinct_queries(&self) -> usize {
        self.log.len()
    }

    pub fn counter(&self, point: usize) -> u32 {
        self.counters[point]
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    pub fn max_counter(&self) -> usize {
        self.counters.iter().copied().max().unwrap_or(0) as usize
    }
}

/// Number of points whose parameter is below `delta`.
pub fn f_delta(model: &ProbModel, delta: f64) -> Result<usize> {
    match model {
        ProbModel::VertexParams(v) => Ok(v.iter().filter(|&&p| p < delta).count()),
        _ => Err(Error::WrongModelVariant {
            expected: "vertex-parameter",
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexDist {
    Uniform01,
    Constant(f64),
    /// `lo` with probability `frac_lo`, otherwise `hi`.
    TwoPoint { lo: f64, hi: f64, frac_lo: f64 },
}

impl VertexDist {
    fn validate(&self) -> Result<()> {
        match *self {
            VertexDist::Uniform01 => Ok(()),
            VertexDist::Constant(c) => check_prob(c, "constant parameter"),
            VertexDist::TwoPoint { lo, hi, frac_lo } => {
                check_prob(lo, "low parameter")?;
                check_prob(hi, "high parameter")?;
                check_prob(frac_lo, "low fraction")
            }
        }
    }

    /// Probability that one draw falls below `delta`.
    pub fn below(&self, delta: f64) -> f64 {
        match *self {
            VertexDist::Uniform01 => delta.clamp(0.0, 1.0),
            VertexDist::Constant(c) => (c < delta) as u8 as f64,
            VertexDist::TwoPoint { lo, hi, frac_lo } => {
                frac_lo * (lo < delta) as u8 as f64 + (1.0 - frac_lo) * (hi < delta) as u8 as f64
            }
        }
    }
}

pub fn sample_vertex_params(n: usize, dist: VertexDist, seed: u64) -> Result<ProbModel> {
    if n == 0 {
        return Err(Error::domain("vertex count must be at least 1"));
    }
    dist.validate()?;
    let mut rng = rng_for(seed, Stream::Generator);
    let params = (0..n)
        .map(|_| match dist {
            VertexDist::Uniform01 => rng.random::<f64>(),
            VertexDist::Constant(c) => c,
            VertexDist::TwoPoint { lo, hi, frac_lo } => {
                if rng.random::<f64>() < frac_lo {
                    lo
                } else {
                    hi
                }
            }
        })
        .collect();
    Ok(ProbModel::VertexParams(params))
}
