//! Graph families: the counterexample constructions, the complete
//! bipartite and Erdős–Rényi benchmarks, and small fixed graphs.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::algorithms::{LowestIndexSelector, MatchingSelector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{rng_for, Stream};

/// A named group of vertices in a generated graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexClass {
    pub name: String,
    pub vertices: Vec<usize>,
}

/// A generated graph with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub graph: Graph,
    pub family: String,
    /// `key=value` pairs separated by `;`.
    pub params: String,
    pub classes: Vec<VertexClass>,
}

impl Generated {
    pub fn class(&self, name: &str) -> Option<&VertexClass> {
        self.classes.iter().find(|c| c.name == name)
    }
}

fn class(name: &str, vertices: impl IntoIterator<Item = usize>) -> VertexClass {
    VertexClass {
        name: name.to_string(),
        vertices: vertices.into_iter().collect(),
    }
}

fn finish(n: usize, mut edges: Vec<(usize, usize)>, family: &str, params: String, classes: Vec<VertexClass>) -> Result<Generated> {
    for e in &mut edges {
        if e.0 > e.1 {
            *e = (e.1, e.0);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(Generated {
        graph: Graph::new(n, edges)?,
        family: family.to_string(),
        params,
        classes,
    })
}

fn require_even(t: usize) -> Result<()> {
    if t == 0 || t % 2 == 1 {
        Err(Error::domain(format!("t must be a positive even number, got {t}")))
    } else {
        Ok(())
    }
}

/// Default degree of the random bipartite parts: ceil(2 ln n / p).
pub fn example31_degree(n: usize, p: f64) -> usize {
    ((2.0 * (n as f64).ln() / p) - 1e-9).ceil().max(1.0) as usize
}

/// Union of `degree` random perfect matchings between equal-size sides,
/// repeated pairs dropped.
fn random_regular_bipartite<R: Rng>(left: &[usize], right: &[usize], degree: usize, rng: &mut R) -> Vec<(usize, usize)> {
    debug_assert_eq!(left.len(), right.len());
    let mut perm: Vec<usize> = (0..right.len()).collect();
    let mut edges = Vec::with_capacity(left.len() * degree);
    for _ in 0..degree.min(right.len()) {
        perm.shuffle(rng);
        edges.extend(left.iter().zip(&perm).map(|(&a, &j)| (a, right[j])));
    }
    edges
}

/// Classes A, B of size t/2 and C, D of size t. Degree-`degree` random
/// bipartite graphs join A–B and C–D, and B–C is complete. Vertex ids are
/// a seeded random permutation, so index order interleaves the classes.
pub fn gen_example31(t: usize, degree: usize, seed: u64) -> Result<Generated> {
    require_even(t)?;
    if degree == 0 {
        return Err(Error::domain("degree must be at least 1"));
    }
    let h = t / 2;
    let n = 2 * h + 2 * t;
    let mut rng = rng_for(seed, Stream::Generator);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    let a = ids[..h].to_vec();
    let b = ids[h..2 * h].to_vec();
    let c = ids[2 * h..2 * h + t].to_vec();
    let d = ids[2 * h + t..].to_vec();

    let mut edges = random_regular_bipartite(&a, &b, degree, &mut rng);
    edges.extend(random_regular_bipartite(&c, &d, degree, &mut rng));
    for &u in &b {
        edges.extend(c.iter().map(|&v| (u, v)));
    }
    let params = format!("t={t};degree={degree};seed={seed}");
    finish(
        n,
        edges,
        "example31",
        params,
        vec![class("A", a), class("B", b), class("C", c), class("D", d)],
    )
}

/// Contiguous layout A (a), B (t), C (t), D (a) with a perfect B–C matching
/// and complete A–B and C–D graphs.
fn four_block(a: usize, t: usize) -> Vec<(usize, usize)> {
    let (b0, c0, d0) = (a, a + t, a + 2 * t);
    let mut edges = Vec::with_capacity(t + 2 * a * t);
    for i in 0..a {
        edges.extend((0..t).map(|j| (i, b0 + j)));
    }
    edges.extend((0..t).map(|j| (b0 + j, c0 + j)));
    for j in 0..t {
        edges.extend((0..a).map(|i| (c0 + j, d0 + i)));
    }
    edges
}

/// |A| = |D| = t/2, |B| = |C| = t. B and C are split into halves B1, B2 and
/// C1, C2; the matching pairs B_i with C_i.
pub fn gen_figure3(t: usize) -> Result<Generated> {
    require_even(t)?;
    let h = t / 2;
    let (b0, c0, d0) = (h, h + t, h + 2 * t);
    let classes = vec![
        class("A", 0..h),
        class("B", b0..b0 + t),
        class("C", c0..c0 + t),
        class("D", d0..d0 + h),
        class("B1", b0..b0 + h),
        class("B2", b0 + h..b0 + t),
        class("C1", c0..c0 + h),
        class("C2", c0 + h..c0 + t),
    ];
    finish(2 * h + 2 * t, four_block(h, t), "figure3", format!("t={t}"), classes)
}

/// |A| = |D| = floor(t^beta), |B| = |C| = t, same edge pattern as
/// [`gen_figure3`].
pub fn gen_appendix_a(t: usize, beta: f64) -> Result<Generated> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0,1), got {beta}")));
    }
    if t == 0 {
        return Err(Error::domain("t must be positive"));
    }
    let a = ((t as f64).powf(beta) + 1e-9).floor() as usize;
    let classes = vec![
        class("A", 0..a),
        class("B", a..a + t),
        class("C", a + t..a + 2 * t),
        class("D", a + 2 * t..2 * a + 2 * t),
    ];
    finish(2 * a + 2 * t, four_block(a, t), "appendixA", format!("t={t};beta={beta}"), classes)
}

/// K_{n,n} with sides `0..n` and `n..2n`.
pub fn gen_complete_bipartite(n: usize) -> Result<Generated> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let edges = (0..n).flat_map(|i| (0..n).map(move |j| (i, n + j))).collect();
    finish(
        2 * n,
        edges,
        "complete-bipartite",
        format!("n={n}"),
        vec![class("U", 0..n), class("V", n..2 * n)],
    )
}

/// G(n, d/(n-1)): expected degree `d`.
pub fn gen_erdos_renyi(n: usize, d: f64, seed: u64) -> Result<Generated> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    if !(d >= 0.0) || (n > 1 && d > (n - 1) as f64) {
        return Err(Error::domain(format!("expected degree {d} impossible for n = {n}")));
    }
    let q = if n > 1 { d / (n - 1) as f64 } else { 0.0 };
    let mut rng = rng_for(seed, Stream::Generator);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < q {
                edges.push((u, v));
            }
        }
    }
    finish(n, edges, "erdos-renyi", format!("n={n};d={d};seed={seed}"), Vec::new())
}

/// `n` vertex-disjoint edges (2i, 2i+1).
pub fn gen_disjoint_edges(n: usize) -> Result<Generated> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    finish(2 * n, (0..n).map(|i| (2 * i, 2 * i + 1)).collect(), "disjoint-edges", format!("n={n}"), Vec::new())
}

/// Small fixed graphs by name: single-edge, triangle, k4, p4, petersen, k22.
pub fn gen_named(name: &str) -> Result<Generated> {
    let (n, edges): (usize, Vec<(usize, usize)>) = match name {
        "single-edge" => (2, vec![(0, 1)]),
        "triangle" => (3, vec![(0, 1), (1, 2), (0, 2)]),
        "k4" => (4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
        "p4" => (4, vec![(0, 1), (1, 2), (2, 3)]),
        "k22" => (4, vec![(0, 2), (0, 3), (1, 2), (1, 3)]),
        "petersen" => (
            10,
            (0..5)
                .flat_map(|i| [(i, (i + 1) % 5), (i, i + 5), (5 + i, 5 + (i + 2) % 5)])
                .collect(),
        ),
        _ => return Err(Error::domain(format!("unknown graph family '{name}'"))),
    };
    finish(n, edges, name, String::new(), Vec::new())
}

pub const NAMED_FAMILIES: [&str; 6] = ["single-edge", "triangle", "k4", "p4", "k22", "petersen"];

/// The schedule that holds [`gen_figure3`] graphs to 5/6 of the omniscient
/// optimum. Round 1 takes B1–C1, A–B2 and C2–D; round 2 takes B2–C2, A–B1
/// and C1–D; later rounds take shifted A–B1 and C1–D matchings. Once those
/// run out it defers to the lowest-index choice.
#[derive(Clone, Copy, Debug)]
pub struct Figure3Selector {
    t: usize,
}

impl Figure3Selector {
    pub fn new(t: usize) -> Result<Self> {
        require_even(t)?;
        Ok(Self { t })
    }

    fn pairs(&self, round: usize) -> Option<Vec<(usize, usize)>> {
        let t = self.t;
        let h = t / 2;
        let (b0, c0, d0) = (h, h + t, h + 2 * t);
        let b1 = |i: usize| b0 + i;
        let b2 = |i: usize| b0 + h + i;
        let c1 = |i: usize| c0 + i;
        let c2 = |i: usize| c0 + h + i;
        let d = |i: usize| d0 + i;
        let mut out = Vec::with_capacity(3 * h);
        match round {
            1 => {
                for i in 0..h {
                    out.extend([(b1(i), c1(i)), (i, b2(i)), (c2(i), d(i))]);
                }
            }
            2 => {
                for i in 0..h {
                    out.extend([(b2(i), c2(i)), (i, b1(i)), (c1(i), d(i))]);
                }
            }
            r if r - 2 < h => {
                let shift = r - 2;
                for i in 0..h {
                    let j = (i + shift) % h;
                    out.extend([(i, b1(j)), (c1(j), d(i))]);
                }
            }
            _ => return None,
        }
        Some(out)
    }
}

impl MatchingSelector for Figure3Selector {
    fn select(&mut self, g: &Graph, round: usize, available: &FixedBitSet) -> Vec<usize> {
        let planned = self.pairs(round).and_then(|pairs| {
            pairs
                .into_iter()
                .map(|(u, v)| g.find_edge(u, v).filter(|&e| available.contains(e)))
                .collect::<Option<Vec<usize>>>()
        });
        planned.unwrap_or_else(|| LowestIndexSelector.select(g, round, available))
    }
}
