//! Plain-text formats for graphs, probability models, k-set instances and
//! pair pools. Lines starting with `#` and blank lines are ignored on
//! input; writers emit caller-supplied header lines as `#` comments.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kidney::{BloodType, Pair, PairPool, PoolConfig, Pra};
use crate::kset::KSetInstance;
use crate::model::ProbModel;

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l.split_whitespace().collect()))
            }
            None => Err(Error::parse(self.last + 1, format!("unexpected end of input, expected {what}"))),
        }
    }

    fn at_end(&mut self) -> bool {
        self.inner.peek().is_none()
    }
}

fn num<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected {what}, found `{tok}`")))
}

fn expect_len(toks: &[&str], n: usize, line: usize, what: &str) -> Result<()> {
    if toks.len() == n {
        Ok(())
    } else {
        Err(Error::parse(line, format!("expected {what} ({n} fields), found {} fields", toks.len())))
    }
}

fn write_header(out: &mut String, header: &[String]) {
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
}

/// Reads `n m` and `m` edge lines, optionally followed by a model block.
pub fn parse_graph(text: &str) -> Result<(Graph, Option<ProbModel>)> {
    let mut lines = Lines::new(text);
    let (ln, toks) = lines.next_line("`n m` header")?;
    expect_len(&toks, 2, ln, "`n m` header")?;
    let n: usize = num(toks[0], ln, "vertex count")?;
    let m: usize = num(toks[1], ln, "edge count")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, toks) = lines.next_line("an edge line")?;
        expect_len(&toks, 2, ln, "edge `u v`")?;
        edges.push((num(toks[0], ln, "vertex index")?, num(toks[1], ln, "vertex index")?));
    }
    let g = Graph::new(n, edges)?;
    let model = if lines.at_end() {
        None
    } else {
        let model = read_model(&mut lines, m, n)?;
        model.check_compatible(&g)?;
        Some(model)
    };
    if !lines.at_end() {
        let (ln, _) = lines.next_line("")?;
        return Err(Error::parse(ln, "trailing content after graph"));
    }
    Ok((g, model))
}

fn read_model(lines: &mut Lines<'_>, items: usize, points: usize) -> Result<ProbModel> {
    let (ln, toks) = lines.next_line("model header")?;
    let probs = |lines: &mut Lines<'_>, count: usize| -> Result<Vec<f64>> {
        (0..count)
            .map(|_| {
                let (ln, toks) = lines.next_line("a probability line")?;
                expect_len(&toks, 1, ln, "probability")?;
                num(toks[0], ln, "probability")
            })
            .collect()
    };
    match toks.as_slice() {
        ["uniform", p] => ProbModel::uniform(num(p, ln, "probability")?),
        ["peredge"] => ProbModel::per_edge(probs(lines, items)?),
        ["vertexparams"] => ProbModel::vertex_params(probs(lines, points)?),
        _ => Err(Error::parse(
            ln,
            format!("unknown model header `{}`", toks.join(" ")),
        )),
    }
}

/// Reads a standalone model for an instance with the given item and point
/// counts.
pub fn parse_model(text: &str, items: usize, points: usize) -> Result<ProbModel> {
    let mut lines = Lines::new(text);
    let model = read_model(&mut lines, items, points)?;
    if !lines.at_end() {
        let (ln, _) = lines.next_line("")?;
        return Err(Error::parse(ln, "trailing content after model"));
    }
    Ok(model)
}

pub fn write_model(model: &ProbModel) -> String {
    let mut out = String::new();
    match model {
        ProbModel::Uniform(p) => {
            let _ = writeln!(out, "uniform {p}");
        }
        ProbModel::PerEdge(v) | ProbModel::VertexParams(v) => {
            out.push_str(if matches!(model, ProbModel::PerEdge(_)) { "peredge\n" } else { "vertexparams\n" });
            for p in v {
                let _ = writeln!(out, "{p}");
            }
        }
    }
    out
}

pub fn write_graph(g: &Graph, model: Option<&ProbModel>, header: &[String]) -> String {
    let mut out = String::new();
    write_header(&mut out, header);
    let _ = writeln!(out, "{} {}", g.n(), g.m());
    for (u, v) in g.edge_list() {
        let _ = writeln!(out, "{u} {v}");
    }
    if let Some(m) = model {
        out.push_str(&write_model(m));
    }
    out
}

/// Reads `|U| |A| k` and one line per set; a trailing token containing `.`
/// is that set's existence probability. Either every set carries one or
/// none does.
pub fn parse_instance(text: &str, allow_duplicates: bool) -> Result<(KSetInstance, Option<ProbModel>)> {
    let mut lines = Lines::new(text);
    let (ln, toks) = lines.next_line("`|U| |A| k` header")?;
    expect_len(&toks, 3, ln, "`|U| |A| k` header")?;
    let universe: usize = num(toks[0], ln, "universe size")?;
    let count: usize = num(toks[1], ln, "set count")?;
    let k: usize = num(toks[2], ln, "k")?;
    let mut sets = Vec::with_capacity(count);
    let mut probs = Vec::new();
    let mut first_has_prob = None;
    for _ in 0..count {
        let (ln, mut toks) = lines.next_line("a set line")?;
        let prob = match toks.last() {
            Some(t) if t.contains('.') => {
                let p: f64 = num(t, ln, "probability")?;
                toks.pop();
                Some(p)
            }
            _ => None,
        };
        match (first_has_prob, prob.is_some()) {
            (None, has) => first_has_prob = Some(has),
            (Some(a), b) if a != b => {
                return Err(Error::parse(ln, "either every set or no set may carry a probability"));
            }
            _ => {}
        }
        probs.extend(prob);
        let elems = toks
            .iter()
            .map(|t| num::<usize>(t, ln, "element index"))
            .collect::<Result<Vec<_>>>()?;
        sets.push(elems);
    }
    if !lines.at_end() {
        let (ln, _) = lines.next_line("")?;
        return Err(Error::parse(ln, "trailing content after instance"));
    }
    let inst = if allow_duplicates {
        KSetInstance::with_duplicates(universe, k, sets)?
    } else {
        KSetInstance::new(universe, k, sets)?
    };
    let model = if first_has_prob == Some(true) {
        Some(ProbModel::per_edge(probs)?)
    } else {
        None
    };
    Ok((inst, model))
}

pub fn write_instance(inst: &KSetInstance, probs: Option<&[f64]>, header: &[String]) -> String {
    let mut out = String::new();
    write_header(&mut out, header);
    let _ = writeln!(out, "{} {} {}", inst.universe(), inst.len(), inst.k());
    for (i, set) in inst.sets().enumerate() {
        let line: Vec<String> = set.iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(" "));
        if let Some(p) = probs {
            // keep a `.` so the token reads back as a probability
            let _ = write!(out, " {:?}", p[i]);
        }
        out.push('\n');
    }
    out
}

/// Pool dump: `n seed`, then `patient donor pra` per pair. The generator
/// configuration goes in the header.
pub fn write_pool(pool: &PairPool, header: &[String]) -> String {
    let mut out = String::new();
    write_header(&mut out, header);
    let c = &pool.config;
    let _ = writeln!(out, "# blood={:?} pra={:?} pra_fail={:?}", c.blood, c.pra, c.pra_fail);
    let _ = writeln!(out, "{} {}", pool.len(), pool.seed);
    for p in &pool.pairs {
        let _ = writeln!(out, "{} {} {}", p.patient.as_str(), p.donor.as_str(), p.pra.as_str());
    }
    out
}

/// Reads a pool dump. The generator configuration is not part of the data
/// lines; `config` supplies the crossmatch rates for later use.
pub fn parse_pool(text: &str, config: PoolConfig) -> Result<PairPool> {
    let mut lines = Lines::new(text);
    let (ln, toks) = lines.next_line("`n seed` header")?;
    expect_len(&toks, 2, ln, "`n seed` header")?;
    let n: usize = num(toks[0], ln, "pair count")?;
    let seed: u64 = num(toks[1], ln, "seed")?;
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, toks) = lines.next_line("a pair line")?;
        expect_len(&toks, 3, ln, "`patient donor pra`")?;
        let bt = |t: &str| BloodType::parse(t).ok_or_else(|| Error::parse(ln, format!("unknown blood type `{t}`")));
        pairs.push(Pair {
            patient: bt(toks[0])?,
            donor: bt(toks[1])?,
            pra: Pra::parse(toks[2]).ok_or_else(|| Error::parse(ln, format!("unknown PRA class `{}`", toks[2])))?,
        });
    }
    if !lines.at_end() {
        let (ln, _) = lines.next_line("")?;
        return Err(Error::parse(ln, "trailing content after pool"));
    }
    Ok(PairPool { pairs, seed, config })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kidney::gen_pool;

    #[test]
    fn graph_round_trip() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let model = ProbModel::per_edge(vec![0.5, 0.25, 1.0]).unwrap();
        let text = write_graph(&g, Some(&model), &["family=p4".into()]);
        assert!(text.starts_with("# family=p4\n4 3\n"));
        let (h, m) = parse_graph(&text).unwrap();
        assert_eq!(h.edge_list().collect::<Vec<_>>(), g.edge_list().collect::<Vec<_>>());
        assert_eq!(m, Some(model));
        let (_, none) = parse_graph("2 1\n0 1\n").unwrap();
        assert_eq!(none, None);
    }

    #[test]
    fn graph_errors() {
        assert!(matches!(parse_graph("3 2\n0 1\n1 0\n"), Err(Error::InvalidGraph(_))));
        assert!(matches!(parse_graph("3 1\n1 1\n"), Err(Error::InvalidGraph(_))));
        assert!(matches!(parse_graph("3 2\n0 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_graph("3 1\n0 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("2 1\n0 1\nbogus 3\n"), Err(Error::Parse { line: 3, .. })));
        assert!(parse_graph("2 1\n0 1\nuniform 1.5\n").is_err());
        assert!(parse_graph("3 1\n0 1\nvertexparams\n0.5\n0.5\n").is_err());
    }

    #[test]
    fn model_text() {
        assert_eq!(parse_model("uniform 0.3", 5, 5).unwrap(), ProbModel::Uniform(0.3));
        let v = ProbModel::vertex_params(vec![0.1, 0.9]).unwrap();
        assert_eq!(parse_model(&write_model(&v), 1, 2).unwrap(), v);
    }

    #[test]
    fn instance_round_trip() {
        let text = "# k=3\n5 3 3\n0 1 2 0.5\n2 3 0.25\n4 1.0\n";
        let (inst, model) = parse_instance(text, false).unwrap();
        assert_eq!(inst.len(), 3);
        assert_eq!(inst.set(1), &[2, 3]);
        let probs = vec![0.5, 0.25, 1.0];
        assert_eq!(model, Some(ProbModel::PerEdge(probs.clone())));
        let back = write_instance(&inst, Some(&probs), &[]);
        assert_eq!(parse_instance(&back, false).unwrap().0, inst);

        assert!(parse_instance("3 2 2\n0 1 0.5\n1 2\n", false).is_err());
        assert!(parse_instance("3 2 2\n0 1\n1 0\n", false).is_err());
        assert_eq!(parse_instance("3 2 2\n0 1\n1 0\n", true).unwrap().0.len(), 2);
        assert!(parse_instance("3 1 2\n0 1 2\n", false).is_err());
    }

    #[test]
    fn pool_round_trip() {
        let pool = gen_pool(30, 9, &PoolConfig::default()).unwrap();
        let text = write_pool(&pool, &["n=30".into()]);
        assert_eq!(parse_pool(&text, PoolConfig::default()).unwrap(), pool);
        assert!(parse_pool("1 0\nO Z low\n", PoolConfig::default()).is_err());
    }
}
