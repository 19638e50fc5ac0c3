//! Stochastic k-set packing: local search with bounded augmenting
//! structures, disjoint structure collection, and the adaptive and
//! non-adaptive query algorithms built on them.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::exact;
use crate::graph::Graph;
use crate::model::{item_probs, Incidence, ProbModel, QueryOracle};
use crate::report::{RoundRecord, RunReport};

const NONE: u32 = u32::MAX;

/// Largest collection accepted by [`packing_oracle`].
pub const ORACLE_SET_LIMIT: usize = 24;

pub type SetOracle<'a> = QueryOracle<'a, KSetInstance>;

/// A universe `0..universe` and a collection of sets of at most `k`
/// elements. Sets are stored sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KSetInstance {
    universe: usize,
    k: usize,
    offsets: Vec<usize>,
    elems: Vec<u32>,
    by_elem_offsets: Vec<usize>,
    by_elem: Vec<u32>,
}

impl KSetInstance {
    /// Rejects out-of-range elements, empty or oversized sets, repeated
    /// elements within a set, and repeated sets.
    pub fn new<S, E>(universe: usize, k: usize, sets: S) -> Result<Self>
    where
        S: IntoIterator<Item = E>,
        E: IntoIterator<Item = usize>,
    {
        Self::build(universe, k, sets, false)
    }

    /// Like [`KSetInstance::new`] but keeps sets with identical elements as
    /// distinct items. Used for exchange cycles, where two orientations of
    /// one triple are different cycles over the same pairs.
    pub fn with_duplicates<S, E>(universe: usize, k: usize, sets: S) -> Result<Self>
    where
        S: IntoIterator<Item = E>,
        E: IntoIterator<Item = usize>,
    {
        Self::build(universe, k, sets, true)
    }

    /// One 2-set per edge, in edge order.
    pub fn from_graph(g: &Graph) -> Self {
        Self::new(g.n(), 2, g.edge_list().map(|(u, v)| [u, v])).expect("graph edges form a valid instance")
    }

    fn build<S, E>(universe: usize, k: usize, sets: S, allow_duplicates: bool) -> Result<Self>
    where
        S: IntoIterator<Item = E>,
        E: IntoIterator<Item = usize>,
    {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        if universe > NONE as usize {
            return Err(Error::InvalidInstance("universe too large".into()));
        }
        let mut offsets = vec![0];
        let mut elems: Vec<u32> = Vec::new();
        for (i, set) in sets.into_iter().enumerate() {
            let start = elems.len();
            for x in set {
                if x >= universe {
                    return Err(Error::InvalidInstance(format!(
                        "set {i} has element {x} outside universe of size {universe}"
                    )));
                }
                elems.push(x as u32);
            }
            let s = &mut elems[start..];
            if s.is_empty() {
                return Err(Error::InvalidInstance(format!("set {i} is empty")));
            }
            if s.len() > k {
                return Err(Error::InvalidInstance(format!("set {i} has {} > k = {k} elements", s.len())));
            }
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInstance(format!("set {i} repeats an element")));
            }
            offsets.push(elems.len());
        }
        let count = offsets.len() - 1;
        if count > NONE as usize {
            return Err(Error::InvalidInstance("too many sets".into()));
        }

        if !allow_duplicates {
            let mut order: Vec<usize> = (0..count).collect();
            let set = |i: usize| &elems[offsets[i]..offsets[i + 1]];
            order.sort_unstable_by(|&a, &b| set(a).cmp(set(b)));
            if let Some(w) = order.windows(2).find(|w| set(w[0]) == set(w[1])) {
                return Err(Error::InvalidInstance(format!(
                    "sets {} and {} are identical",
                    w[0].min(w[1]),
                    w[0].max(w[1])
                )));
            }
        }

        let mut by_elem_offsets = vec![0usize; universe + 1];
        for &x in &elems {
            by_elem_offsets[x as usize + 1] += 1;
        }
        for i in 0..universe {
            by_elem_offsets[i + 1] += by_elem_offsets[i];
        }
        let mut fill = by_elem_offsets.clone();
        let mut by_elem = vec![0u32; elems.len()];
        for i in 0..count {
            for &x in &elems[offsets[i]..offsets[i + 1]] {
                by_elem[fill[x as usize]] = i as u32;
                fill[x as usize] += 1;
            }
        }

        Ok(Self {
            universe,
            k,
            offsets,
            elems,
            by_elem_offsets,
            by_elem,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn set(&self, i: usize) -> &[u32] {
        &self.elems[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn sets(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len()).map(|i| self.set(i))
    }

    /// Indices of the sets containing `x`, ascending.
    pub fn sets_containing(&self, x: usize) -> &[u32] {
        &self.by_elem[self.by_elem_offsets[x]..self.by_elem_offsets[x + 1]]
    }

    pub fn disjoint(&self, a: usize, b: usize) -> bool {
        let (mut x, mut y) = (self.set(a), self.set(b));
        while let (Some(&p), Some(&q)) = (x.first(), y.first()) {
            match p.cmp(&q) {
                std::cmp::Ordering::Less => x = &x[1..],
                std::cmp::Ordering::Greater => y = &y[1..],
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

impl Incidence for KSetInstance {
    fn item_count(&self) -> usize {
        self.len()
    }

    fn point_count(&self) -> usize {
        self.universe
    }

    fn members(&self, item: usize) -> &[u32] {
        self.set(item)
    }
}

/// Pairwise-disjoint sets of an instance, stored sorted by index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Packing {
    sets: Vec<usize>,
}

impl Packing {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(inst: &KSetInstance, sets: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut sets: Vec<usize> = sets.into_iter().collect();
        sets.sort_unstable();
        if sets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPacking("set listed twice".into()));
        }
        let mut used = vec![false; inst.universe()];
        for &s in &sets {
            if s >= inst.len() {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    len: inst.len(),
                });
            }
            for &x in inst.set(s) {
                if std::mem::replace(&mut used[x as usize], true) {
                    return Err(Error::InvalidPacking(format!("element {x} covered twice")));
                }
            }
        }
        Ok(Self { sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[usize] {
        &self.sets
    }

    pub fn contains(&self, s: usize) -> bool {
        self.sets.binary_search(&s).is_ok()
    }

    /// Adds `st.add` and drops every current set meeting it. Returns the
    /// change in size, which is positive for a structure built against a
    /// subset of this packing.
    pub fn apply(&mut self, inst: &KSetInstance, st: &AugStructure) -> Result<isize> {
        let mut owner = vec![NONE; inst.universe()];
        for &s in &self.sets {
            for &x in inst.set(s) {
                owner[x as usize] = s as u32;
            }
        }
        let mut dropped: Vec<usize> = st
            .add
            .iter()
            .flat_map(|&c| inst.set(c).iter())
            .filter_map(|&x| (owner[x as usize] != NONE).then_some(owner[x as usize] as usize))
            .collect();
        dropped.sort_unstable();
        dropped.dedup();
        let before = self.len() as isize;
        let next = self
            .sets
            .iter()
            .copied()
            .filter(|s| dropped.binary_search(s).is_err())
            .chain(st.add.iter().copied());
        *self = Packing::new(inst, next)?;
        Ok(self.len() as isize - before)
    }
}

/// Sets to add (`add`, written C) and sets of the packing to remove
/// (`remove`, written D). `remove` is exactly the packing sets that meet
/// `add`, and `add` is larger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugStructure {
    pub add: Vec<usize>,
    pub remove: Vec<usize>,
}

impl AugStructure {
    pub fn gain(&self) -> usize {
        self.add.len() - self.remove.len()
    }

    pub fn size(&self) -> usize {
        self.add.len().max(self.remove.len())
    }
}

/// Exact maximum packing by branch and bound.
pub fn packing_oracle(inst: &KSetInstance) -> Result<Packing> {
    if inst.len() > ORACLE_SET_LIMIT {
        return Err(Error::InstanceTooLarge {
            limit: ORACLE_SET_LIMIT,
            actual: inst.len(),
        });
    }

    struct Bnb<'a> {
        inst: &'a KSetInstance,
        used: Vec<bool>,
        cur: Vec<usize>,
        best: Vec<usize>,
    }

    impl Bnb<'_> {
        fn go(&mut self, i: usize) {
            if self.cur.len() > self.best.len() {
                self.best = self.cur.clone();
            }
            if i == self.inst.len() || self.cur.len() + (self.inst.len() - i) <= self.best.len() {
                return;
            }
            let set = self.inst.set(i);
            if set.iter().all(|&x| !self.used[x as usize]) {
                set.iter().for_each(|&x| self.used[x as usize] = true);
                self.cur.push(i);
                self.go(i + 1);
                self.cur.pop();
                set.iter().for_each(|&x| self.used[x as usize] = false);
            }
            self.go(i + 1);
        }
    }

    let mut b = Bnb {
        inst,
        used: vec![false; inst.universe()],
        cur: Vec::new(),
        best: Vec::new(),
    };
    b.go(0);
    Packing::new(inst, b.best)
}

/// The approximation ratio that an s-locally optimal packing is
/// guaranteed to reach (the best `2/k - eta` the cap `s` supports).
///
/// k = 2: no augmenting path with at most `s` new edges gives s/(s+1).
/// k >= 3: the Hurkens–Schrijver bound for improvements of up to `s` sets.
pub fn local_ratio(k: usize, s: usize) -> f64 {
    assert!(s >= 1, "structure cap must be at least 1");
    match k {
        0 | 1 => 1.0,
        2 => s as f64 / (s as f64 + 1.0),
        _ => {
            let k = k as f64;
            let r = s.div_ceil(2) as i32;
            let q = (k - 1.0).powi(r);
            if s % 2 == 1 {
                (2.0 * q - k) / (k * q - k)
            } else {
                (2.0 * q - 2.0) / (k * q - 2.0)
            }
        }
    }
}

/// `2/k - local_ratio(k, s)`.
pub fn eta_for(k: usize, s: usize) -> f64 {
    2.0 / k.max(1) as f64 - local_ratio(k, s)
}

/// Depth-first search for a connected augmenting structure whose smallest
/// added set is `c1`. Sets are tried in ascending index order.
struct StructureSearch<'a> {
    inst: &'a KSetInstance,
    candidates: FixedBitSet,
    s: usize,
    owner: Vec<u32>,
    in_b: FixedBitSet,
    covered: Vec<bool>,
    hits: Vec<u32>,
    c: Vec<usize>,
    d: Vec<usize>,
}

impl<'a> StructureSearch<'a> {
    fn new(inst: &'a KSetInstance, b: &Packing, candidates: FixedBitSet, s: usize) -> Self {
        let mut owner = vec![NONE; inst.universe()];
        let mut in_b = FixedBitSet::with_capacity(inst.len());
        for &set in b.sets() {
            in_b.insert(set);
            for &x in inst.set(set) {
                owner[x as usize] = set as u32;
            }
        }
        Self {
            inst,
            candidates,
            s,
            owner,
            in_b,
            covered: vec![false; inst.universe()],
            hits: vec![0; inst.len()],
            c: Vec::new(),
            d: Vec::new(),
        }
    }

    fn is_candidate(&self, t: usize) -> bool {
        self.candidates.contains(t) && !self.in_b.contains(t)
    }

    fn push(&mut self, t: usize) {
        self.c.push(t);
        for &x in self.inst.set(t) {
            self.covered[x as usize] = true;
            let b = self.owner[x as usize];
            if b != NONE {
                self.hits[b as usize] += 1;
                if self.hits[b as usize] == 1 {
                    self.d.push(b as usize);
                }
            }
        }
    }

    fn pop(&mut self) {
        let t = self.c.pop().expect("pop on empty structure");
        for &x in self.inst.set(t).iter().rev() {
            self.covered[x as usize] = false;
            let b = self.owner[x as usize];
            if b != NONE {
                self.hits[b as usize] -= 1;
                if self.hits[b as usize] == 0 {
                    let top = self.d.pop();
                    debug_assert_eq!(top, Some(b as usize));
                }
            }
        }
    }

    fn extend(&mut self, c1: usize) -> bool {
        if self.c.len() > self.d.len() {
            return true;
        }
        if self.d.len() >= self.s {
            return false;
        }
        let mut next: Vec<usize> = Vec::new();
        for &b in &self.d {
            for &x in self.inst.set(b) {
                if self.covered[x as usize] {
                    continue;
                }
                for &t in self.inst.sets_containing(x as usize) {
                    let t = t as usize;
                    if t > c1
                        && self.is_candidate(t)
                        && self.inst.set(t).iter().all(|&y| !self.covered[y as usize])
                    {
                        next.push(t);
                    }
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        for t in next {
            self.push(t);
            if self.extend(c1) {
                return true;
            }
            self.pop();
        }
        false
    }

    fn find_from(&mut self, c1: usize) -> Option<AugStructure> {
        if !self.is_candidate(c1) {
            return None;
        }
        self.push(c1);
        let found = self.extend(c1);
        let out = found.then(|| {
            let mut add = self.c.clone();
            let mut remove = self.d.clone();
            add.sort_unstable();
            remove.sort_unstable();
            AugStructure { add, remove }
        });
        while !self.c.is_empty() {
            self.pop();
        }
        out
    }

    /// Moves a found structure into the packing tracked by `owner`/`in_b`.
    fn commit(&mut self, st: &AugStructure) {
        for &b in &st.remove {
            self.in_b.set(b, false);
            for &x in self.inst.set(b) {
                self.owner[x as usize] = NONE;
            }
        }
        for &c in &st.add {
            self.in_b.insert(c);
            for &x in self.inst.set(c) {
                self.owner[x as usize] = c as u32;
            }
        }
    }

    fn packing(&self) -> Packing {
        Packing {
            sets: self.in_b.ones().collect(),
        }
    }
}

fn all_sets(inst: &KSetInstance) -> FixedBitSet {
    let mut all = FixedBitSet::with_capacity(inst.len());
    all.insert_range(..);
    all
}

fn check_cap(s: usize) -> Result<()> {
    if s == 0 {
        Err(Error::domain("structure size cap s must be at least 1"))
    } else {
        Ok(())
    }
}

/// Greedy packing in ascending index order over the `allowed` sets.
pub fn greedy_packing(inst: &KSetInstance, allowed: &FixedBitSet) -> Packing {
    let mut used = vec![false; inst.universe()];
    let mut sets = Vec::new();
    for i in allowed.ones() {
        let set = inst.set(i);
        if set.iter().all(|&x| !used[x as usize]) {
            set.iter().for_each(|&x| used[x as usize] = true);
            sets.push(i);
        }
    }
    Packing { sets }
}

/// Greedy start, then augmenting structures with at most `s` added sets
/// until none is left.
pub fn local_search_packing(inst: &KSetInstance, s: usize) -> Result<Packing> {
    local_search_within(inst, s, &all_sets(inst))
}

/// [`local_search_packing`] restricted to the `allowed` sets.
pub fn local_search_within(inst: &KSetInstance, s: usize, allowed: &FixedBitSet) -> Result<Packing> {
    check_cap(s)?;
    let start = greedy_packing(inst, allowed);
    let mut search = StructureSearch::new(inst, &start, allowed.clone(), s);
    loop {
        let mut improved = false;
        for c1 in allowed.ones() {
            if let Some(st) = search.find_from(c1) {
                search.commit(&st);
                improved = true;
            }
        }
        if !improved {
            return Ok(search.packing());
        }
    }
}

/// Collects augmenting structures for `b` one at a time; after each, its
/// added sets and every non-`b` set meeting them leave the pool, so the
/// added collections are pairwise disjoint in sets and elements.
pub fn find_aug_structures(inst: &KSetInstance, b: &Packing, s: usize) -> Result<Vec<AugStructure>> {
    find_aug_structures_within(inst, b, s, &all_sets(inst))
}

/// [`find_aug_structures`] drawing added sets only from `allowed`.
pub fn find_aug_structures_within(
    inst: &KSetInstance,
    b: &Packing,
    s: usize,
    allowed: &FixedBitSet,
) -> Result<Vec<AugStructure>> {
    check_cap(s)?;
    let mut search = StructureSearch::new(inst, b, allowed.clone(), s);
    let mut out = Vec::new();
    for c1 in allowed.ones() {
        while let Some(st) = search.find_from(c1) {
            for &c in &st.add {
                for &x in inst.set(c) {
                    for &t in inst.sets_containing(x as usize) {
                        if !search.in_b.contains(t as usize) {
                            search.candidates.set(t as usize, false);
                        }
                    }
                }
            }
            out.push(st);
        }
    }
    Ok(out)
}

/// Lower bound on how many disjoint structures must exist:
/// `(opt - |b| / ratio) / (k * s)` with `ratio = local_ratio(k, s)`.
pub fn structure_count_bound(k: usize, s: usize, opt: usize, b_len: usize) -> f64 {
    (opt as f64 - b_len as f64 / local_ratio(k, s)) / (k * s) as f64
}

/// Queries the added sets of each structure (skipping known ones) and
/// applies a structure only when all of its added sets exist.
fn query_structures(
    inst: &KSetInstance,
    oracle: &mut SetOracle<'_>,
    structures: &[AugStructure],
    b: &mut Packing,
    missing: &mut FixedBitSet,
) -> Result<RoundRecord> {
    let mut rec = RoundRecord::default();
    for st in structures {
        let mut all = true;
        for &c in &st.add {
            if !oracle.was_queried(c) {
                rec.queried.push(c);
                if oracle.query(c) {
                    rec.found += 1;
                }
            }
            if oracle.known(c) != Some(true) {
                missing.insert(c);
                all = false;
            }
        }
        if all {
            b.apply(inst, st)?;
        }
    }
    rec.size = b.len();
    Ok(rec)
}

fn known_missing(inst: &KSetInstance, oracle: &SetOracle<'_>) -> FixedBitSet {
    let mut missing = FixedBitSet::with_capacity(inst.len());
    for &i in oracle.log() {
        if oracle.known(i) == Some(false) {
            missing.insert(i);
        }
    }
    missing
}

/// Adaptive rounds: collect disjoint structures for the current packing
/// among sets not known to be missing, query them, apply the ones that
/// exist in full.
pub fn adaptive_kset(inst: &KSetInstance, oracle: &mut SetOracle<'_>, rounds: usize, s: usize) -> Result<RunReport> {
    check_cap(s)?;
    let mut missing = known_missing(inst, oracle);
    let mut b = Packing::empty();
    let mut report = RunReport::default();
    for _ in 0..rounds {
        let mut allowed = all_sets(inst);
        allowed.difference_with(&missing);
        let structures = find_aug_structures_within(inst, &b, s, &allowed)?;
        let rec = query_structures(inst, oracle, &structures, &mut b, &mut missing)?;
        report.rounds.push(rec);
    }
    report.solution = b.sets().to_vec();
    report.max_budget = oracle.max_counter();
    Ok(report)
}

/// The `rounds` successively removed local-search packings. Depends on the
/// instance alone. Stops early once nothing is left to pack.
pub fn nonadaptive_kset_plan(inst: &KSetInstance, rounds: usize, s: usize) -> Result<Vec<Packing>> {
    if rounds == 0 {
        return Err(Error::domain("non-adaptive selection needs at least one round"));
    }
    check_cap(s)?;
    let mut remaining = all_sets(inst);
    let mut out = Vec::new();
    for _ in 0..rounds {
        let o = local_search_within(inst, s, &remaining)?;
        if o.is_empty() {
            break;
        }
        for &i in o.sets() {
            remaining.set(i, false);
        }
        out.push(o);
    }
    Ok(out)
}

/// Queries the first planned packing, keeps what exists, then for every
/// later packing queries the structures it offers against the running
/// solution and applies the complete ones.
pub fn nonadaptive_kset(inst: &KSetInstance, oracle: &mut SetOracle<'_>, rounds: usize, s: usize) -> Result<RunReport> {
    let plan = nonadaptive_kset_plan(inst, rounds, s)?;
    nonadaptive_kset_with_plan(inst, oracle, &plan, s)
}

/// [`nonadaptive_kset`] with the planned packings computed in advance.
pub fn nonadaptive_kset_with_plan(
    inst: &KSetInstance,
    oracle: &mut SetOracle<'_>,
    plan: &[Packing],
    s: usize,
) -> Result<RunReport> {
    check_cap(s)?;
    let mut report = RunReport::default();
    let mut missing = known_missing(inst, oracle);
    let mut q = Packing::empty();
    for (r, o) in plan.iter().enumerate() {
        if r == 0 {
            let mut rec = RoundRecord::default();
            for &i in o.sets() {
                if !oracle.was_queried(i) {
                    rec.queried.push(i);
                    if oracle.query(i) {
                        rec.found += 1;
                    }
                }
            }
            q = Packing::new(inst, o.sets().iter().copied().filter(|&i| oracle.known(i) == Some(true)))?;
            rec.size = q.len();
            report.rounds.push(rec);
            continue;
        }
        let mut allowed = FixedBitSet::with_capacity(inst.len());
        for &i in o.sets() {
            if !missing.contains(i) {
                allowed.insert(i);
            }
        }
        let structures = find_aug_structures_within(inst, &q, s, &allowed)?;
        let rec = query_structures(inst, oracle, &structures, &mut q, &mut missing)?;
        report.rounds.push(rec);
    }
    report.solution = q.sets().to_vec();
    report.max_budget = oracle.max_counter();
    Ok(report)
}

/// Largest packing found over the `allowed` sets, and whether it is
/// certified maximum. Instances with sets of at most two elements are
/// solved as matchings; otherwise small collections go to
/// [`packing_oracle`] and larger ones to local search with cap `proxy_s`.
pub fn best_packing_within(inst: &KSetInstance, allowed: &FixedBitSet, proxy_s: usize) -> Result<(Packing, bool)> {
    let ids: Vec<usize> = allowed.ones().filter(|&i| i < inst.len()).collect();
    if inst.k() <= 2 {
        // a singleton {x} becomes an edge to a private copy of x
        let u = inst.universe();
        let mut first: std::collections::HashMap<(usize, usize), usize> = Default::default();
        let mut edges = Vec::new();
        let mut owner = Vec::new();
        for &i in &ids {
            let set = inst.set(i);
            let key = match set {
                [x] => (*x as usize, u + *x as usize),
                [x, y] => (*x as usize, *y as usize),
                _ => unreachable!("k <= 2"),
            };
            if let std::collections::hash_map::Entry::Vacant(v) = first.entry(key) {
                v.insert(i);
                edges.push(key);
                owner.push(i);
            }
        }
        let g = Graph::new(2 * u, edges)?;
        let m = crate::graph::max_matching(&g);
        return Ok((Packing::new(inst, m.edges().iter().map(|&e| owner[e]))?, true));
    }
    if ids.len() <= ORACLE_SET_LIMIT {
        let sub = KSetInstance::with_duplicates(
            inst.universe(),
            inst.k(),
            ids.iter().map(|&i| inst.set(i).iter().map(|&x| x as usize)),
        )?;
        let best = packing_oracle(&sub)?;
        return Ok((Packing::new(inst, best.sets().iter().map(|&j| ids[j]))?, true));
    }
    Ok((local_search_within(inst, proxy_s, allowed)?, false))
}

/// Checks `E[opt(A)] <= E[opt(A1)] + E[opt(A \ A1)]` by enumerating all
/// realizations. `part[i]` puts set `i` in `A1`.
pub fn kset_subadditivity_check(inst: &KSetInstance, model: &ProbModel, part: &[bool]) -> Result<bool> {
    if part.len() != inst.len() {
        return Err(Error::InvalidPacking(format!(
            "partition has {} flags for {} sets",
            part.len(),
            inst.len()
        )));
    }
    let probs = item_probs(model, inst)?;
    let conflicts = exact::conflict_masks(inst)?;
    let table = exact::subset_expectations(&exact::subset_optima(&conflicts), &probs);
    let mask = part.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i));
    Ok(exact::subadditive_at(&table, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Realization;

    fn tricky() -> KSetInstance {
        KSetInstance::new(5, 3, [vec![0, 1, 2], vec![2, 3, 4], vec![0, 3], vec![1, 4]]).unwrap()
    }

    #[test]
    fn instance_validation() {
        assert!(KSetInstance::new(3, 2, [vec![0, 3]]).is_err());
        assert!(KSetInstance::new(3, 2, [vec![0, 1, 2]]).is_err());
        assert!(KSetInstance::new(3, 2, [Vec::<usize>::new()]).is_err());
        assert!(KSetInstance::new(3, 2, [vec![1, 1]]).is_err());
        assert!(KSetInstance::new(3, 2, [vec![0, 1], vec![1, 0]]).is_err());
        assert!(KSetInstance::new(3, 0, Vec::<Vec<usize>>::new()).is_err());
        let dup = KSetInstance::with_duplicates(3, 3, [vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        assert_eq!(dup.len(), 2);
        assert_eq!(dup.set(1), &[0, 1, 2]);
        let t = tricky();
        assert_eq!(t.sets_containing(2), &[0, 1]);
        assert!(t.disjoint(2, 3));
        assert!(!t.disjoint(0, 2));
    }

    #[test]
    fn packing_validation() {
        let t = tricky();
        assert!(Packing::new(&t, [0, 2]).is_err());
        assert!(Packing::new(&t, [2, 3]).is_ok());
        assert!(Packing::new(&t, [7]).is_err());
        assert!(Packing::new(&t, [2, 2]).is_err());
    }

    #[test]
    fn oracle_examples() {
        let a = KSetInstance::new(4, 2, [vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(packing_oracle(&a).unwrap().len(), 2);
        let tri = KSetInstance::new(3, 2, [vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(packing_oracle(&tri).unwrap().len(), 1);
        assert_eq!(packing_oracle(&tricky()).unwrap().sets(), &[2, 3]);
        let big = KSetInstance::new(50, 2, (0..25).map(|i| vec![2 * i, 2 * i + 1])).unwrap();
        assert!(matches!(packing_oracle(&big), Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn local_search_examples() {
        let t = tricky();
        assert_eq!(greedy_packing(&t, &all_sets(&t)).len(), 1);
        assert_eq!(local_search_packing(&t, 1).unwrap().len(), 1);
        assert_eq!(local_search_packing(&t, 2).unwrap().sets(), &[2, 3]);
        assert_eq!(local_search_packing(&t, 4).unwrap().len(), 2);
        assert!(local_search_packing(&t, 0).is_err());
    }

    #[test]
    fn structure_examples() {
        let t = tricky();
        let b = Packing::new(&t, [0]).unwrap();
        let found = find_aug_structures(&t, &b, 2).unwrap();
        assert_eq!(
            found,
            vec![AugStructure {
                add: vec![2, 3],
                remove: vec![0]
            }]
        );
        assert!(find_aug_structures(&t, &b, 1).unwrap().is_empty());
        let opt = Packing::new(&t, [2, 3]).unwrap();
        assert!(find_aug_structures(&t, &opt, 4).unwrap().is_empty());

        let disjoint = KSetInstance::new(6, 2, (0..3).map(|i| vec![2 * i, 2 * i + 1])).unwrap();
        let found = find_aug_structures(&disjoint, &Packing::empty(), 1).unwrap();
        assert_eq!(found.len(), 3);
        assert!(found.iter().all(|s| s.add.len() == 1 && s.remove.is_empty()));
    }

    #[test]
    fn apply_structure() {
        let t = tricky();
        let mut b = Packing::new(&t, [0]).unwrap();
        let st = AugStructure {
            add: vec![2, 3],
            remove: vec![0],
        };
        assert_eq!(b.apply(&t, &st).unwrap(), 1);
        assert_eq!(b.sets(), &[2, 3]);
    }

    #[test]
    fn ratio_table() {
        assert_eq!(local_ratio(2, 1), 0.5);
        assert!((local_ratio(2, 3) - 0.75).abs() < 1e-12);
        assert!((local_ratio(3, 1) - 1.0 / 3.0).abs() < 1e-12);
        assert!((local_ratio(3, 2) - 0.5).abs() < 1e-12);
        assert!((local_ratio(3, 3) - 5.0 / 9.0).abs() < 1e-12);
        for k in 3..6 {
            for s in 1..8 {
                assert!(local_ratio(k, s) <= local_ratio(k, s + 1) + 1e-12);
                assert!(local_ratio(k, s) < 2.0 / k as f64);
            }
            assert!((local_ratio(k, 1) - 1.0 / k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_trivial() {
        let one = KSetInstance::new(3, 3, [vec![0, 1, 2]]).unwrap();
        let r = Realization::all(1, true);
        let mut o = SetOracle::new(&one, &r).unwrap();
        assert_eq!(adaptive_kset(&one, &mut o, 1, 2).unwrap().size(), 1);
        let mut o = SetOracle::new(&one, &r).unwrap();
        assert_eq!(adaptive_kset(&one, &mut o, 0, 2).unwrap().size(), 0);
        assert_eq!(o.distinct_queries(), 0);
    }

    #[test]
    fn adaptive_all_or_nothing() {
        // P4 as 2-sets, packing {middle}: the structure {ends} fails as a
        // whole when one end is missing, so nothing changes
        let p4 = KSetInstance::new(4, 2, [vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let r = Realization::from_fn(3, |i| i != 0);
        let mut o = SetOracle::new(&p4, &r).unwrap();
        let mut b = Packing::new(&p4, [1]).unwrap();
        let mut missing = FixedBitSet::with_capacity(3);
        let st = find_aug_structures(&p4, &b, 2).unwrap();
        assert_eq!(st.len(), 1);
        let rec = query_structures(&p4, &mut o, &st, &mut b, &mut missing).unwrap();
        assert_eq!(rec.queried, vec![0, 2]);
        assert_eq!(b.sets(), &[1]);
    }

    #[test]
    fn nonadaptive_examples() {
        let disjoint = KSetInstance::new(6, 2, (0..3).map(|i| vec![2 * i, 2 * i + 1])).unwrap();
        let r = Realization::all(3, true);
        let mut o = SetOracle::new(&disjoint, &r).unwrap();
        let rep = nonadaptive_kset(&disjoint, &mut o, 1, 2).unwrap();
        assert_eq!(rep.size(), 3);
        assert!(nonadaptive_kset(&disjoint, &mut o, 0, 2).is_err());

        let t = tricky();
        let plan = nonadaptive_kset_plan(&t, 5, 2).unwrap();
        assert_eq!(plan.len(), 3);
        assert!(plan[1..].iter().all(|p| p.len() == 1));
        assert_eq!(plan[0].sets(), &[2, 3]);
    }

    #[test]
    fn subadditivity_examples() {
        let tri = KSetInstance::new(3, 2, [vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let m = ProbModel::Uniform(0.5);
        for mask in 0..8usize {
            let part: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
            assert!(kset_subadditivity_check(&tri, &m, &part).unwrap());
        }
        assert!(kset_subadditivity_check(&tri, &m, &[true]).is_err());
    }
}
