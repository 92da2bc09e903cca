//! Instance types and their text formats.
//!
//! Three instance kinds flow through the toolkit:
//!
//! - [`XorInstance`]: a system of 3-variable parity constraints under the
//!   incidence model (each unordered variable triple appears at most once).
//!   Text form is DIMACS-like: `p xor <n> <m>`, then one `i j k b` line per
//!   constraint.
//! - [`CnfFormula`]: width-3 CNF. Standard DIMACS `p cnf <n> <m>` with
//!   zero-terminated clauses, except that clauses here are exactly three
//!   literals on distinct variables (no tautologies, no repeats).
//! - [`LiteralGraph`]: the clause/literal graph of the CLIQUE reduction.
//!   Text form `p edge <V> <E>` with `n <v> <clause> <lit>` label lines and
//!   `e <u> <v>` edge lines, all indices 1-based.
//!
//! Assignments are bit masks: variable `i` (1-based) lives at bit `i - 1`.
//!
//! The seeded generator draws constraints without rejection: it picks an
//! index into the lexicographic enumeration of the *remaining* triples, so
//! the draw sequence is a pure function of the seed.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: expected header {expected:?}")]
    MissingHeader { line: usize, expected: &'static str },
    #[error("line {line}: malformed header: {msg}")]
    BadHeader { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    BadLine { line: usize, msg: String },
    #[error("line {line}: clause has {width} literals, need exactly 3")]
    ClauseWidth { line: usize, width: usize },
    #[error("line {line}: variable {var} out of range 1..={n}")]
    VarRange { line: usize, var: i64, n: u32 },
    #[error("line {line}: clause repeats variable {var}")]
    RepeatedVar { line: usize, var: u32 },
    #[error("line {line}: tautological clause on variable {var}")]
    Tautology { line: usize, var: u32 },
    #[error("line {line}: constraint repeats a variable")]
    DegenerateTriple { line: usize },
    #[error("line {line}: duplicate triple ({i}, {j}, {k})")]
    DuplicateTriple { line: usize, i: u32, j: u32, k: u32 },
    #[error("header declared {declared} items, found {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("line {line}: edge endpoint {v} out of range 1..={max}")]
    EdgeRange { line: usize, v: u32, max: u32 },
    #[error("line {line}: duplicate or missing vertex label")]
    BadLabel { line: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("need at least 3 variables, got {n}")]
    TooFewVars { n: u32 },
    #[error("requested {m} constraints but only {available} distinct triples exist")]
    TooManyConstraints { m: u64, available: u64 },
    #[error("planted assignment has {got} bits, instance has {need} variables")]
    PlantLength { got: usize, need: usize },
}

/// One parity constraint `x_i ^ x_j ^ x_k = parity` with `i < j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XorConstraint {
    pub vars: [u32; 3],
    pub parity: bool,
}

impl XorConstraint {
    /// Sorts the triple; the three indices must be distinct and >= 1.
    pub fn new(a: u32, b: u32, c: u32, parity: bool) -> Option<Self> {
        let mut vars = [a, b, c];
        vars.sort_unstable();
        if vars[0] == 0 || vars[0] == vars[1] || vars[1] == vars[2] {
            return None;
        }
        Some(Self { vars, parity })
    }

    pub fn satisfied_by(&self, assignment: u64) -> bool {
        let v = |i: u32| assignment >> (i - 1) & 1 == 1;
        (v(self.vars[0]) ^ v(self.vars[1]) ^ v(self.vars[2])) == self.parity
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorInstance {
    pub n: u32,
    pub constraints: Vec<XorConstraint>,
}

impl XorInstance {
    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.constraints.iter().all(|c| c.satisfied_by(assignment))
    }
}

/// A literal: variable index (1-based) plus sign. Ordered by variable, with
/// the negative literal first on ties, so clause forms are canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub var: u32,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: u32) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: u32) -> Self {
        Self {
            var,
            positive: false,
        }
    }

    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 || x.unsigned_abs() > u64::from(u32::MAX) {
            return None;
        }
        Some(Self {
            var: x.unsigned_abs() as u32,
            positive: x > 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var);
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn negated(self) -> Self {
        Self {
            var: self.var,
            positive: !self.positive,
        }
    }

    pub fn satisfied_by(self, assignment: u64) -> bool {
        (assignment >> (self.var - 1) & 1 == 1) == self.positive
    }

    /// True when the two literals are the same variable with opposite signs.
    pub fn contradicts(self, other: Lit) -> bool {
        self.var == other.var && self.positive != other.positive
    }
}

/// Width-3 clause, literals sorted by variable index, variables distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    lits: [Lit; 3],
}

#[derive(Debug, PartialEq)]
pub enum ClauseError {
    RepeatedVar(u32),
    Tautology(u32),
}

impl Clause {
    pub fn new(mut lits: [Lit; 3]) -> Result<Self, ClauseError> {
        lits.sort_unstable_by_key(|l| l.var);
        for w in lits.windows(2) {
            if w[0].var == w[1].var {
                if w[0].positive == w[1].positive {
                    return Err(ClauseError::RepeatedVar(w[0].var));
                }
                return Err(ClauseError::Tautology(w[0].var));
            }
        }
        Ok(Self { lits })
    }

    pub fn lits(&self) -> &[Lit; 3] {
        &self.lits
    }

    pub fn vars(&self) -> [u32; 3] {
        [self.lits[0].var, self.lits[1].var, self.lits[2].var]
    }

    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.lits.iter().any(|l| l.satisfied_by(assignment))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub n: u32,
    pub clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(assignment))
    }

    /// Distinct variables actually mentioned, ascending.
    pub fn support(&self) -> Vec<u32> {
        let mut vars: Vec<u32> = self
            .clauses
            .iter()
            .flat_map(|c| c.vars())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }
}

/// Vertex-labelled graph of the CLIQUE reduction: vertex ids are
/// `3*clause + slot`, each labelled with its (clause, literal) pair. Edges
/// are stored as sorted `(u, v)` pairs with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralGraph {
    pub blocks: u32,
    pub labels: Vec<(u32, Lit)>,
    pub edges: Vec<(u32, u32)>,
}

impl LiteralGraph {
    pub fn vertex_count(&self) -> u32 {
        self.labels.len() as u32
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    /// Adjacency as one bitset row per vertex.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let n = self.labels.len();
        let words = n.div_ceil(64);
        let mut adj = vec![vec![0u64; words]; n];
        for &(u, v) in &self.edges {
            adj[u as usize][v as usize / 64] |= 1 << (v % 64);
            adj[v as usize][u as usize / 64] |= 1 << (u % 64);
        }
        adj
    }
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

/// Tokenize a body line, skipping blank and comment (`c ...`) lines.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('c'))
}

fn parse_header(
    line_no: usize,
    line: &str,
    kind: &'static str,
) -> Result<(u32, usize), ParseError> {
    let mut it = line.split_ascii_whitespace();
    let bad = |msg: &str| ParseError::BadHeader {
        line: line_no,
        msg: msg.to_string(),
    };
    if it.next() != Some("p") || it.next() != Some(kind) {
        return Err(ParseError::MissingHeader {
            line: line_no,
            expected: kind,
        });
    }
    let n = it
        .next()
        .and_then(|t| t.parse::<u32>().ok())
        .ok_or_else(|| bad("bad first count"))?;
    let m = it
        .next()
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| bad("bad second count"))?;
    if it.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    Ok((n, m))
}

/// Parse the `p xor` format. Triples are canonicalized to `i < j < k`;
/// repeated variables and duplicate triples are rejected.
pub fn parse_xor(text: &str) -> Result<XorInstance, ParseError> {
    let mut lines = content_lines(text);
    let (line_no, header) = lines.next().ok_or(ParseError::MissingHeader {
        line: 1,
        expected: "xor",
    })?;
    let (n, m) = parse_header(line_no, header, "xor")?;
    let mut seen: HashSet<[u32; 3]> = HashSet::new();
    let mut constraints = Vec::with_capacity(m);
    for (line_no, line) in lines {
        let toks: Vec<&str> = line.split_ascii_whitespace().collect();
        if toks.len() != 4 {
            return Err(ParseError::BadLine {
                line: line_no,
                msg: format!("expected `i j k b`, got {} tokens", toks.len()),
            });
        }
        let mut nums = [0u32; 3];
        for (slot, tok) in nums.iter_mut().zip(&toks[..3]) {
            let v: i64 = tok.parse().map_err(|_| ParseError::BadLine {
                line: line_no,
                msg: format!("bad index {tok:?}"),
            })?;
            if v < 1 || v > i64::from(n) {
                return Err(ParseError::VarRange {
                    line: line_no,
                    var: v,
                    n,
                });
            }
            *slot = v as u32;
        }
        let parity = match toks[3] {
            "0" => false,
            "1" => true,
            other => {
                return Err(ParseError::BadLine {
                    line: line_no,
                    msg: format!("parity must be 0 or 1, got {other:?}"),
                })
            }
        };
        let c = XorConstraint::new(nums[0], nums[1], nums[2], parity)
            .ok_or(ParseError::DegenerateTriple { line: line_no })?;
        if !seen.insert(c.vars) {
            return Err(ParseError::DuplicateTriple {
                line: line_no,
                i: c.vars[0],
                j: c.vars[1],
                k: c.vars[2],
            });
        }
        constraints.push(c);
    }
    if constraints.len() != m {
        return Err(ParseError::CountMismatch {
            declared: m,
            found: constraints.len(),
        });
    }
    Ok(XorInstance { n, constraints })
}

pub fn serialize_xor(inst: &XorInstance) -> String {
    let mut out = format!("p xor {} {}\n", inst.n, inst.constraints.len());
    for c in &inst.constraints {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            c.vars[0],
            c.vars[1],
            c.vars[2],
            u8::from(c.parity)
        );
    }
    out
}

/// Parse width-3 DIMACS CNF. Clauses are zero-terminated; each must have
/// exactly three literals on three distinct variables.
pub fn parse_cnf(text: &str) -> Result<CnfFormula, ParseError> {
    let mut lines = content_lines(text);
    let (line_no, header) = lines.next().ok_or(ParseError::MissingHeader {
        line: 1,
        expected: "cnf",
    })?;
    let (n, m) = parse_header(line_no, header, "cnf")?;
    let mut clauses = Vec::with_capacity(m);
    let mut current: Vec<Lit> = Vec::new();
    let mut start_line = 0usize;
    for (line_no, line) in lines {
        for tok in line.split_ascii_whitespace() {
            let x: i64 = tok.parse().map_err(|_| ParseError::BadLine {
                line: line_no,
                msg: format!("bad literal {tok:?}"),
            })?;
            if x == 0 {
                if current.len() != 3 {
                    return Err(ParseError::ClauseWidth {
                        line: line_no,
                        width: current.len(),
                    });
                }
                let clause = Clause::new([current[0], current[1], current[2]]).map_err(|e| {
                    match e {
                        ClauseError::RepeatedVar(var) => ParseError::RepeatedVar {
                            line: line_no,
                            var,
                        },
                        ClauseError::Tautology(var) => ParseError::Tautology {
                            line: line_no,
                            var,
                        },
                    }
                })?;
                clauses.push(clause);
                current.clear();
            } else {
                if current.is_empty() {
                    start_line = line_no;
                }
                let lit = Lit::from_dimacs(x).ok_or(ParseError::BadLine {
                    line: line_no,
                    msg: format!("bad literal {tok:?}"),
                })?;
                if lit.var > n {
                    return Err(ParseError::VarRange {
                        line: line_no,
                        var: x,
                        n,
                    });
                }
                if current.len() >= 3 {
                    return Err(ParseError::ClauseWidth {
                        line: line_no,
                        width: current.len() + 1,
                    });
                }
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(ParseError::BadLine {
            line: start_line,
            msg: "clause not terminated by 0".to_string(),
        });
    }
    if clauses.len() != m {
        return Err(ParseError::CountMismatch {
            declared: m,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula { n, clauses })
}

pub fn serialize_cnf(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.n, f.clauses.len());
    for c in &f.clauses {
        let l = c.lits();
        let _ = writeln!(
            out,
            "{} {} {} 0",
            l[0].to_dimacs(),
            l[1].to_dimacs(),
            l[2].to_dimacs()
        );
    }
    out
}

/// Parse the `p edge` graph format with `n`-labelled vertices.
pub fn parse_graph(text: &str) -> Result<LiteralGraph, ParseError> {
    let mut lines = content_lines(text);
    let (line_no, header) = lines.next().ok_or(ParseError::MissingHeader {
        line: 1,
        expected: "edge",
    })?;
    let (v_count, e_count) = parse_header(line_no, header, "edge")?;
    let mut labels: Vec<Option<(u32, Lit)>> = vec![None; v_count as usize];
    let mut edges = Vec::with_capacity(e_count);
    let mut seen_edges = HashSet::new();
    for (line_no, line) in lines {
        let toks: Vec<&str> = line.split_ascii_whitespace().collect();
        let bad = |msg: String| ParseError::BadLine {
            line: line_no,
            msg,
        };
        match toks.first() {
            Some(&"n") => {
                if toks.len() != 4 {
                    return Err(bad("expected `n <v> <clause> <lit>`".to_string()));
                }
                let v: u32 = toks[1].parse().map_err(|_| bad("bad vertex".to_string()))?;
                if v < 1 || v > v_count {
                    return Err(ParseError::EdgeRange {
                        line: line_no,
                        v,
                        max: v_count,
                    });
                }
                let clause: u32 = toks[2]
                    .parse()
                    .map_err(|_| bad("bad clause index".to_string()))?;
                let lit: i64 = toks[3].parse().map_err(|_| bad("bad literal".to_string()))?;
                let lit = Lit::from_dimacs(lit).ok_or_else(|| bad("bad literal".to_string()))?;
                let slot = &mut labels[(v - 1) as usize];
                if slot.is_some() {
                    return Err(ParseError::BadLabel { line: line_no });
                }
                *slot = Some((clause, lit));
            }
            Some(&"e") => {
                if toks.len() != 3 {
                    return Err(bad("expected `e <u> <v>`".to_string()));
                }
                let mut uv = [0u32; 2];
                for (slot, tok) in uv.iter_mut().zip(&toks[1..]) {
                    let x: u32 = tok.parse().map_err(|_| bad("bad endpoint".to_string()))?;
                    if x < 1 || x > v_count {
                        return Err(ParseError::EdgeRange {
                            line: line_no,
                            v: x,
                            max: v_count,
                        });
                    }
                    *slot = x;
                }
                if uv[0] == uv[1] {
                    return Err(bad("self loop".to_string()));
                }
                let (u, v) = (uv[0].min(uv[1]) - 1, uv[0].max(uv[1]) - 1);
                if !seen_edges.insert((u, v)) {
                    return Err(bad(format!("duplicate edge {} {}", u + 1, v + 1)));
                }
                edges.push((u, v));
            }
            _ => return Err(bad(format!("unknown line {line:?}"))),
        }
    }
    if edges.len() != e_count {
        return Err(ParseError::CountMismatch {
            declared: e_count,
            found: edges.len(),
        });
    }
    let labels: Vec<(u32, Lit)> = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or(ParseError::BadLabel {
                line: i + 1,
            })
        })
        .collect::<Result<_, _>>()?;
    if !labels.len().is_multiple_of(3) {
        return Err(ParseError::CountMismatch {
            declared: labels.len() / 3 * 3,
            found: labels.len(),
        });
    }
    edges.sort_unstable();
    Ok(LiteralGraph {
        blocks: (labels.len() / 3) as u32,
        labels,
        edges,
    })
}

pub fn serialize_graph(g: &LiteralGraph) -> String {
    let mut out = format!("p edge {} {}\n", g.vertex_count(), g.edge_count());
    for (i, (clause, lit)) in g.labels.iter().enumerate() {
        let _ = writeln!(out, "n {} {} {}", i + 1, clause, lit.to_dimacs());
    }
    for &(u, v) in &g.edges {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

// ---------------------------------------------------------------------------
// Seeded generation
// ---------------------------------------------------------------------------

fn binom3(n: u64) -> u64 {
    if n < 3 {
        0
    } else {
        // n <= ~3e6 keeps this in u64 comfortably at desk scale.
        n * (n - 1) / 2 * (n - 2) / 3
    }
}

fn binom2(n: u64) -> u64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

/// The `rank`-th sorted triple over `1..=n` in lexicographic order.
fn triple_unrank(n: u64, mut rank: u64) -> [u32; 3] {
    debug_assert!(rank < binom3(n));
    let mut i = 1u64;
    loop {
        let block = binom2(n - i);
        if rank < block {
            break;
        }
        rank -= block;
        i += 1;
    }
    let mut j = i + 1;
    loop {
        let block = n - j;
        if rank < block {
            break;
        }
        rank -= block;
        j += 1;
    }
    let k = j + 1 + rank;
    [i as u32, j as u32, k as u32]
}

/// Draw `m` distinct constraints uniformly (by triple) with parities either
/// planted against `planted` or drawn from the same stream.
///
/// Draw order per constraint: one `below(remaining)` call for the triple,
/// then (only when unplanted) one `bit()` call for the parity.
pub fn random_xor_instance(
    n: u32,
    m: u64,
    seed: u64,
    planted: Option<u64>,
) -> Result<XorInstance, GenError> {
    if n < 3 {
        return Err(GenError::TooFewVars { n });
    }
    let total = binom3(u64::from(n));
    if m > total {
        return Err(GenError::TooManyConstraints { m, available: total });
    }
    let mut rng = SplitMix64::new(seed);
    let mut picked: Vec<u64> = Vec::with_capacity(m as usize);
    let mut constraints = Vec::with_capacity(m as usize);
    for step in 0..m {
        let mut r = rng.below(total - step);
        // Shift past already-picked ranks to index the remaining triples.
        for &p in picked.iter() {
            if p <= r {
                r += 1;
            }
        }
        let pos = picked.partition_point(|&p| p < r);
        picked.insert(pos, r);
        let vars = triple_unrank(u64::from(n), r);
        let parity = match planted {
            Some(assignment) => {
                let v = |i: u32| assignment >> (i - 1) & 1 == 1;
                v(vars[0]) ^ v(vars[1]) ^ v(vars[2])
            }
            None => rng.bit(),
        };
        constraints.push(XorConstraint {
            vars,
            parity,
        });
    }
    Ok(XorInstance { n, constraints })
}

/// Uniform assignment over `n` variables from the shared generator.
pub fn random_assignment(n: u32, rng: &mut SplitMix64) -> u64 {
    debug_assert!(n <= 64);
    if n == 64 {
        rng.next_u64()
    } else {
        rng.next_u64() & ((1u64 << n) - 1)
    }
}
