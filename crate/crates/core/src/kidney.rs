//! Simplified kidney-exchange pools, compatibility digraphs, exchange
//! cycles as k-sets, and the failure-rate sweep.
//!
//! The pool generator keeps three knobs (blood-type frequencies, PRA class
//! frequencies, per-class crossmatch failure rates); all live in
//! [`PoolConfig`].

use fixedbitset::FixedBitSet;
use rand::Rng;
use rayon::prelude::*;

use crate::bench::{mean_se, RatioRecord, Z95};
use crate::error::{Error, Result};
use crate::kset::{best_packing_within, KSetInstance, Packing};
use crate::model::{rng_for, sample_with_probs, trial_seed, Realization, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BloodType {
    O,
    A,
    B,
    AB,
}

impl BloodType {
    pub const ALL: [BloodType; 4] = [BloodType::O, BloodType::A, BloodType::B, BloodType::AB];

    /// Whether a donor of this type can give to a patient of type `patient`.
    pub fn can_donate_to(self, patient: BloodType) -> bool {
        use BloodType::*;
        match self {
            O => true,
            A => matches!(patient, A | AB),
            B => matches!(patient, B | AB),
            AB => patient == AB,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BloodType::O => "O",
            BloodType::A => "A",
            BloodType::B => "B",
            BloodType::AB => "AB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pra {
    Low,
    Medium,
    High,
}

impl Pra {
    pub const ALL: [Pra; 3] = [Pra::Low, Pra::Medium, Pra::High];

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pra::Low => "low",
            Pra::Medium => "medium",
            Pra::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoolConfig {
    /// Frequencies of O, A, B, AB.
    pub blood: [f64; 4],
    /// Frequencies of low, medium, high PRA.
    pub pra: [f64; 3],
    /// Crossmatch failure probability per PRA class.
    pub pra_fail: [f64; 3],
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            blood: [0.44, 0.42, 0.10, 0.04],
            pra: [0.70, 0.20, 0.10],
            pra_fail: [0.05, 0.45, 0.90],
        }
    }
}

impl PoolConfig {
    pub fn validate(&self) -> Result<()> {
        let dist_ok = |v: &[f64]| v.iter().all(|x| (0.0..=1.0).contains(x)) && (v.iter().sum::<f64>() - 1.0).abs() < 1e-9;
        if !dist_ok(&self.blood) || !dist_ok(&self.pra) {
            return Err(Error::domain("blood-type and PRA frequencies must each sum to 1"));
        }
        if !self.pra_fail.iter().all(|x| (0.0..=1.0).contains(x)) {
            return Err(Error::domain("crossmatch failure rates must lie in [0,1]"));
        }
        Ok(())
    }

    pub fn fail(&self, pra: Pra) -> f64 {
        self.pra_fail[pra.index()]
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

pub fn sample_blood_type<R: Rng + ?Sized>(rng: &mut R, cfg: &PoolConfig) -> BloodType {
    BloodType::ALL[pick(rng, &cfg.blood)]
}

pub fn sample_pra<R: Rng + ?Sized>(rng: &mut R, cfg: &PoolConfig) -> Pra {
    Pra::ALL[pick(rng, &cfg.pra)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pair {
    pub patient: BloodType,
    pub donor: BloodType,
    pub pra: Pra,
}

/// Incompatible patient–donor pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PairPool {
    pub pairs: Vec<Pair>,
    pub seed: u64,
    pub config: PoolConfig,
}

impl PairPool {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Draws pairs until `n` of them are incompatible (ABO mismatch or a failed
/// crossmatch with the paired donor); only those enter the pool.
pub fn gen_pool(n: usize, seed: u64, cfg: &PoolConfig) -> Result<PairPool> {
    if n == 0 {
        return Err(Error::domain("pool size must be at least 1"));
    }
    cfg.validate()?;
    if cfg.pra_fail.iter().zip(&cfg.pra).all(|(&f, &w)| f == 0.0 || w == 0.0)
        && cfg.blood.iter().filter(|&&w| w > 0.0).count() == 1
        && cfg.blood[0] > 0.0
    {
        return Err(Error::domain("configuration never produces an incompatible pair"));
    }
    let mut rng = rng_for(seed, Stream::Generator);
    let mut pairs = Vec::with_capacity(n);
    let mut draws = 0usize;
    while pairs.len() < n {
        draws += 1;
        if draws > 1000 * n + 100_000 {
            return Err(Error::domain("incompatible pairs are too rare under this configuration"));
        }
        let patient = sample_blood_type(&mut rng, cfg);
        let donor = sample_blood_type(&mut rng, cfg);
        let pra = sample_pra(&mut rng, cfg);
        let crossmatch_fails = rng.random::<f64>() < cfg.fail(pra);
        if !donor.can_donate_to(patient) || crossmatch_fails {
            pairs.push(Pair { patient, donor, pra });
        }
    }
    Ok(PairPool {
        pairs,
        seed,
        config: cfg.clone(),
    })
}

/// Directed compatibility graph over pool pairs plus its exchange cycles.
#[derive(Clone, Debug)]
pub struct CycleInstance {
    pub n: usize,
    /// Arcs `(u, v)`: donor of `u` can give to patient of `v`.
    pub arcs: Vec<(usize, usize)>,
    out: Vec<Vec<u32>>,
    /// Each cycle as its pair sequence, starting at its smallest pair.
    pub cycles: Vec<Vec<usize>>,
    pub k_max: usize,
}

impl CycleInstance {
    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&(v as u32)).is_ok()
    }

    /// The cycles as sets of pairs; two orientations of a triple stay
    /// separate sets.
    pub fn kset(&self) -> KSetInstance {
        KSetInstance::with_duplicates(self.n, self.k_max.max(2), self.cycles.iter().map(|c| c.iter().copied()))
            .expect("cycles are valid sets")
    }

    /// Existence probability `(1-f)^len` of every cycle.
    pub fn cycle_probs(&self, f: f64) -> Vec<f64> {
        self.cycles.iter().map(|c| (1.0 - f).powi(c.len() as i32)).collect()
    }
}

/// Arc `u -> v` when the donor of `u` is ABO-compatible with the patient of
/// `v` and a virtual crossmatch (failure rate by the patient's PRA class)
/// succeeds. Crossmatches are drawn from the pool seed.
pub fn build_compat(pool: &PairPool) -> CycleInstance {
    let n = pool.len();
    let mut rng = rng_for(pool.seed, Stream::Extra);
    let mut arcs = Vec::new();
    let mut out = vec![Vec::new(); n];
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let (pu, pv) = (pool.pairs[u], pool.pairs[v]);
            // draw regardless of ABO so the stream does not depend on it
            let ok = rng.random::<f64>() >= pool.config.fail(pv.pra);
            if pu.donor.can_donate_to(pv.patient) && ok {
                arcs.push((u, v));
                out[u].push(v as u32);
            }
        }
    }
    CycleInstance {
        n,
        arcs,
        out,
        cycles: Vec::new(),
        k_max: 0,
    }
}

/// A compatibility digraph from explicit arcs.
pub fn compat_from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<CycleInstance> {
    let mut out = vec![Vec::new(); n];
    let mut list = Vec::new();
    for (u, v) in arcs {
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidGraph(format!("bad arc ({u}, {v}) for {n} pairs")));
        }
        out[u].push(v as u32);
        list.push((u, v));
    }
    for o in &mut out {
        o.sort_unstable();
        o.dedup();
    }
    list.sort_unstable();
    list.dedup();
    Ok(CycleInstance {
        n,
        arcs: list,
        out,
        cycles: Vec::new(),
        k_max: 0,
    })
}

/// All directed cycles of length 2..=k_max, each listed once from its
/// smallest pair. All 2-cycles come before all 3-cycles, so lowest-index
/// tie-breaking prefers the likelier exchanges.
pub fn enumerate_cycles(mut inst: CycleInstance, k_max: usize) -> Result<CycleInstance> {
    if !(2..=3).contains(&k_max) {
        return Err(Error::domain(format!("k_max must be 2 or 3, got {k_max}")));
    }
    let mut cycles = Vec::new();
    for u in 0..inst.n {
        for &v in &inst.out[u] {
            let v = v as usize;
            if v > u && inst.has_arc(v, u) {
                cycles.push(vec![u, v]);
            }
        }
    }
    if k_max == 3 {
        for u in 0..inst.n {
            for &v in &inst.out[u] {
                let v = v as usize;
                if v <= u {
                    continue;
                }
                for &w in &inst.out[v] {
                    let w = w as usize;
                    if w > u && w != v && inst.has_arc(w, u) {
                        cycles.push(vec![u, v, w]);
                    }
                }
            }
        }
    }
    inst.cycles = cycles;
    inst.k_max = k_max;
    Ok(inst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KidneyConfig {
    pub n: usize,
    pub f_grid: Vec<f64>,
    pub r_grid: Vec<usize>,
    pub k_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Structure cap for local search on 2&3-cycle instances.
    pub s: usize,
    /// Count trials with an empty omniscient packing as ratio 1 instead of
    /// dropping them.
    pub include_empty: bool,
    pub pool: PoolConfig,
}

impl KidneyConfig {
    pub fn new(n: usize, k_max: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            f_grid: (0..10).map(|i| i as f64 / 10.0).collect(),
            r_grid: (0..=5).collect(),
            k_max,
            trials,
            seed,
            s: 2,
            include_empty: false,
            pool: PoolConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 {
            return Err(Error::domain("n and trials must be at least 1"));
        }
        if !(2..=3).contains(&self.k_max) {
            return Err(Error::domain("k_max must be 2 or 3"));
        }
        if self.s == 0 {
            return Err(Error::domain("s must be at least 1"));
        }
        if self.f_grid.is_empty() || self.r_grid.is_empty() {
            return Err(Error::domain("f and R grids must be non-empty"));
        }
        if !self.f_grid.iter().all(|f| (0.0..=1.0).contains(f)) {
            return Err(Error::domain("failure rates must lie in [0,1]"));
        }
        self.pool.validate()
    }

    pub fn family(&self) -> &'static str {
        if self.k_max == 2 {
            "kidney-2cycle"
        } else {
            "kidney-23cycle"
        }
    }
}

/// One output row: the ratio record plus `f,k_max,n`.
#[derive(Clone, Debug, PartialEq)]
pub struct KidneyRow {
    pub record: RatioRecord,
    pub f: f64,
    pub k_max: usize,
    pub n: usize,
    /// Trials dropped because the omniscient packing was empty.
    pub excluded: usize,
}

pub const KIDNEY_EXTRA_HEADER: [&str; 3] = ["f", "k_max", "n"];

impl KidneyRow {
    pub fn fields(&self) -> Vec<String> {
        let mut v = self.record.fields();
        v.extend([self.f.to_string(), self.k_max.to_string(), self.n.to_string()]);
        v
    }
}

fn realized_count(p: &Packing, real: &Realization) -> usize {
    p.sets().iter().filter(|&&i| real.exists(i)).count()
}

/// Planned packings O_1, O_2, ... each maximum (k = 2) or locally optimal
/// over the sets not yet planned.
pub fn plan_rounds(inst: &KSetInstance, rounds: usize, s: usize) -> Result<Vec<Packing>> {
    let mut remaining = FixedBitSet::with_capacity(inst.len());
    remaining.insert_range(..);
    let mut out = Vec::new();
    for _ in 0..rounds {
        let (o, _) = best_packing_within(inst, &remaining, s)?;
        for &i in o.sets() {
            remaining.set(i, false);
        }
        out.push(o);
    }
    Ok(out)
}

/// Number of exchanges that go through after `rounds` rounds of crossmatch
/// tests on the planned packings. With no tests the first planned packing
/// is executed untested. Otherwise the final packing is the best one over
/// sets known to exist, extended by untested sets on still-uncovered pairs;
/// untested sets count only if they exist.
pub fn executed_value(inst: &KSetInstance, plan: &[Packing], rounds: usize, real: &Realization, s: usize) -> Result<usize> {
    let Some(first) = plan.first() else {
        return Ok(0);
    };
    if rounds == 0 {
        return Ok(realized_count(first, real));
    }
    let mut tested = FixedBitSet::with_capacity(inst.len());
    for o in plan.iter().take(rounds) {
        for &i in o.sets() {
            tested.insert(i);
        }
    }
    let mut known = FixedBitSet::with_capacity(inst.len());
    for i in tested.ones() {
        if real.exists(i) {
            known.insert(i);
        }
    }
    let (sure, _) = best_packing_within(inst, &known, s)?;
    let mut covered = vec![false; inst.universe()];
    for &i in sure.sets() {
        for &x in inst.set(i) {
            covered[x as usize] = true;
        }
    }
    let mut open = FixedBitSet::with_capacity(inst.len());
    for i in 0..inst.len() {
        if !tested.contains(i) && inst.set(i).iter().all(|&x| !covered[x as usize]) {
            open.insert(i);
        }
    }
    let (extra, _) = best_packing_within(inst, &open, s)?;
    Ok(sure.len() + realized_count(&extra, real))
}

#[derive(Clone, Copy, Debug, Default)]
struct Cell {
    value: usize,
    omni: usize,
}

/// Runs the (f, R) sweep. Every trial draws a fresh pool; realizations for
/// different `f` share their uniform draws, so they are coupled across the
/// grid. Each cell's ratio is the mean of per-trial ratios.
pub fn run_experiment(cfg: &KidneyConfig) -> Result<Vec<KidneyRow>> {
    cfg.validate()?;
    let max_r = cfg.r_grid.iter().copied().max().unwrap_or(0).max(1);
    let trials: Vec<Vec<Cell>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<Cell>> {
            let seed = trial_seed(cfg.seed, t);
            let pool = gen_pool(cfg.n, seed, &cfg.pool)?;
            let ci = enumerate_cycles(build_compat(&pool), cfg.k_max)?;
            let inst = ci.kset();
            let plan = plan_rounds(&inst, max_r, cfg.s)?;
            let mut cells = Vec::with_capacity(cfg.f_grid.len() * cfg.r_grid.len());
            for &f in &cfg.f_grid {
                let real = sample_with_probs(&ci.cycle_probs(f), seed);
                let mut exist = FixedBitSet::with_capacity(inst.len());
                for i in real.existing() {
                    exist.insert(i);
                }
                let omni = best_packing_within(&inst, &exist, cfg.s)?.0.len();
                for &r in &cfg.r_grid {
                    cells.push(Cell {
                        value: executed_value(&inst, &plan, r, &real, cfg.s)?,
                        omni,
                    });
                }
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut idx = 0;
    for &f in &cfg.f_grid {
        for &r in &cfg.r_grid {
            let cells: Vec<Cell> = trials.iter().map(|t| t[idx]).collect();
            idx += 1;
            let mut ratios = Vec::new();
            let mut excluded = 0;
            for c in &cells {
                if c.omni == 0 {
                    if cfg.include_empty {
                        ratios.push(1.0);
                    } else {
                        excluded += 1;
                    }
                } else {
                    ratios.push(c.value as f64 / c.omni as f64);
                }
            }
            let (alg_mean, _) = mean_se(&cells.iter().map(|c| c.value as f64).collect::<Vec<_>>());
            let (omni_mean, omni_se) = mean_se(&cells.iter().map(|c| c.omni as f64).collect::<Vec<_>>());
            let (ratio, ratio_se) = if ratios.is_empty() { (f64::NAN, f64::NAN) } else { mean_se(&ratios) };
            rows.push(KidneyRow {
                record: RatioRecord {
                    family: cfg.family().to_string(),
                    params: format!("n={};k_max={};s={}", cfg.n, cfg.k_max, cfg.s),
                    algorithm: "nonadaptive-rounds".to_string(),
                    rounds: r,
                    p_or_f: f.to_string(),
                    trials: ratios.len(),
                    alg_mean,
                    omni_mean,
                    omni_se,
                    ratio,
                    ci: Z95 * ratio_se,
                },
                f,
                k_max: cfg.k_max,
                n: cfg.n,
                excluded,
            });
        }
    }
    Ok(rows)
}
