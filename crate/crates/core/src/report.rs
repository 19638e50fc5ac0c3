use std::fmt::Write as _;

/// What happened in one round of queries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundRecord {
    /// Items queried for the first time this round, in query order.
    pub queried: Vec<usize>,
    /// How many of them exist.
    pub found: usize,
    /// Solution size at the end of the round.
    pub size: usize,
}

/// Outcome of one algorithm run against a query oracle.
///
/// `solution` holds edge indices for matching algorithms and set indices
/// for packing algorithms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    pub solution: Vec<usize>,
    pub rounds: Vec<RoundRecord>,
    /// Largest number of distinct queried items touching one vertex
    /// (element, for packings).
    pub max_budget: usize,
}

impl RunReport {
    pub fn size(&self) -> usize {
        self.solution.len()
    }

    pub fn rounds_executed(&self) -> usize {
        self.rounds.len()
    }

    pub fn trace(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.size).collect()
    }

    pub fn total_queries(&self) -> usize {
        self.rounds.iter().map(|r| r.queried.len()).sum()
    }

    /// One line per round: `round queries exists size`.
    pub fn to_record_text(&self) -> String {
        let mut out = String::from("# round queries exists size\n");
        for (i, r) in self.rounds.iter().enumerate() {
            let _ = writeln!(out, "{} {} {} {}", i + 1, r.queried.len(), r.found, r.size);
        }
        out
    }
}
