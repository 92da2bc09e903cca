//! The injective 3XOR -> 3SAT translation and its inverse.
//!
//! Each parity constraint on a sorted triple becomes exactly four clauses on
//! the same triple and nothing else (no auxiliary variables), so the clause
//! count is exactly `4m`. With signs written as (+,-) over the sorted triple,
//! the templates are
//!
//! ```text
//! b = 1:  (+ + +) (+ - -) (- + -) (- - +)      odd  sign patterns
//! b = 0:  (- - -) (+ + -) (+ - +) (- + +)      even sign patterns
//! ```
//!
//! A clause with sign pattern `s` forbids the single assignment `!s`, so the
//! four clauses for parity `b` forbid precisely the four assignments of
//! parity `1 - b`: each block keeps exactly the four assignments with
//! `x ^ y ^ z = b`.
//!
//! The canonical block identifier of a four-clause group is its sorted list
//! of sign patterns; it determines the parity and is invariant under clause
//! reordering, literal reordering, and variable renaming (renaming permutes
//! pattern coordinates, and both template sets are permutation-closed).
//! Assignment tables index the local assignment as `x<<2 | y<<1 | z`.

use std::collections::HashMap;

use thiserror::Error;

use crate::instances::{Clause, CnfFormula, Lit, XorConstraint, XorInstance};

#[derive(Debug, Error, PartialEq)]
pub enum BlockError {
    #[error("block on ({i}, {j}, {k}) has {count} clauses, expected 4")]
    WrongClauseCount { i: u32, j: u32, k: u32, count: usize },
    #[error("clauses mix variable triples ({0:?} vs {1:?})")]
    MixedSupport([u32; 3], [u32; 3]),
    #[error("block on ({i}, {j}, {k}) repeats a clause")]
    RepeatedClause { i: u32, j: u32, k: u32 },
    #[error("block on ({i}, {j}, {k}) matches neither parity template")]
    NotATemplate { i: u32, j: u32, k: u32 },
    #[error("formula is empty")]
    Empty,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConsistencyError {
    #[error("instance has {n} variables, exhaustive cap is {cap}")]
    CapExceeded { n: u32, cap: u32 },
}

/// Sign patterns (true = positive literal over the sorted triple), in
/// canonical emission order.
pub fn clause_templates(parity: bool) -> [[bool; 3]; 4] {
    if parity {
        [
            [true, true, true],
            [true, false, false],
            [false, true, false],
            [false, false, true],
        ]
    } else {
        [
            [false, false, false],
            [true, true, false],
            [true, false, true],
            [false, true, true],
        ]
    }
}

fn block_clauses(c: &XorConstraint) -> [Clause; 4] {
    clause_templates(c.parity).map(|signs| {
        let lits = [0, 1, 2].map(|slot| Lit {
            var: c.vars[slot],
            positive: signs[slot],
        });
        Clause::new(lits).expect("template literals are on distinct sorted variables")
    })
}

/// Translate a parity system into width-3 CNF: four clauses per constraint,
/// same variable set, blocks in constraint order.
pub fn translate(inst: &XorInstance) -> CnfFormula {
    let mut clauses = Vec::with_capacity(inst.constraints.len() * 4);
    for c in &inst.constraints {
        clauses.extend(block_clauses(c));
    }
    CnfFormula {
        n: inst.n,
        clauses,
    }
}

/// Local satisfaction table of one block over the 8 assignments of its
/// triple, indexed `x<<2 | y<<1 | z`, derived by evaluating the clauses.
pub fn block_truth_table(parity: bool) -> [bool; 8] {
    let c = XorConstraint::new(1, 2, 3, parity).expect("fixed triple");
    let clauses = block_clauses(&c);
    std::array::from_fn(|a| {
        // Local assignment bits to a global mask on variables 1, 2, 3.
        let mask = u64::from(a as u8 >> 2 & 1)
            | u64::from(a as u8 >> 1 & 1) << 1
            | u64::from(a as u8 & 1) << 2;
        clauses.iter().all(|cl| cl.satisfied_by(mask))
    })
}

/// The four local assignments a block forbids, ascending.
pub fn forbidden_assignments(parity: bool) -> [u8; 4] {
    let table = block_truth_table(parity);
    let mut out = [0u8; 4];
    let mut idx = 0;
    for (a, &ok) in table.iter().enumerate() {
        if !ok {
            out[idx] = a as u8;
            idx += 1;
        }
    }
    debug_assert_eq!(idx, 4);
    out
}

/// Canonical identifier of a four-clause block: the sorted sign patterns
/// (each encoded `x<<2 | y<<1 | z` over the sorted triple) plus the parity
/// they decode to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockId {
    pub vars: [u32; 3],
    pub parity: bool,
    /// Sorted sign patterns; always one of the two template sets.
    pub patterns: [u8; 4],
}

fn sign_pattern(clause: &Clause) -> u8 {
    let l = clause.lits();
    u8::from(l[0].positive) << 2 | u8::from(l[1].positive) << 1 | u8::from(l[2].positive)
}

fn template_patterns(parity: bool) -> [u8; 4] {
    let mut pats = clause_templates(parity)
        .map(|s| u8::from(s[0]) << 2 | u8::from(s[1]) << 1 | u8::from(s[2]));
    pats.sort_unstable();
    pats
}

/// Identify a clause group as one translated block, or say why it is not in
/// the image.
pub fn canonical_block_id(clauses: &[Clause]) -> Result<BlockId, BlockError> {
    let first = clauses.first().ok_or(BlockError::Empty)?;
    let vars = first.vars();
    let [i, j, k] = vars;
    for c in clauses {
        if c.vars() != vars {
            return Err(BlockError::MixedSupport(vars, c.vars()));
        }
    }
    if clauses.len() != 4 {
        return Err(BlockError::WrongClauseCount {
            i,
            j,
            k,
            count: clauses.len(),
        });
    }
    let mut patterns = [0u8; 4];
    for (slot, c) in patterns.iter_mut().zip(clauses) {
        *slot = sign_pattern(c);
    }
    patterns.sort_unstable();
    if patterns.windows(2).any(|w| w[0] == w[1]) {
        return Err(BlockError::RepeatedClause { i, j, k });
    }
    for parity in [false, true] {
        if patterns == template_patterns(parity) {
            return Ok(BlockId {
                vars,
                parity,
                patterns,
            });
        }
    }
    Err(BlockError::NotATemplate { i, j, k })
}

/// Invert [`translate`]: group clauses by triple in first-appearance order,
/// identify each group, and rebuild the parity system. Any formula not in
/// the image is rejected with the offending triple named.
pub fn invert(f: &CnfFormula) -> Result<XorInstance, BlockError> {
    let mut order: Vec<[u32; 3]> = Vec::new();
    let mut groups: HashMap<[u32; 3], Vec<Clause>> = HashMap::new();
    for c in &f.clauses {
        let key = c.vars();
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::with_capacity(4)
            })
            .push(*c);
    }
    let mut constraints = Vec::with_capacity(order.len());
    for key in order {
        let id = canonical_block_id(&groups[&key])?;
        constraints.push(XorConstraint {
            vars: id.vars,
            parity: id.parity,
        });
    }
    Ok(XorInstance {
        n: f.n,
        constraints,
    })
}

/// Exhaustive satisfiability scan, capped. Returns a satisfying assignment
/// mask if one exists.
pub fn check_consistency_brute(
    inst: &XorInstance,
    cap: u32,
) -> Result<Option<u64>, ConsistencyError> {
    if inst.n > cap {
        return Err(ConsistencyError::CapExceeded { n: inst.n, cap });
    }
    Ok((0u64..1 << inst.n).find(|&a| inst.satisfied_by(a)))
}

/// Gaussian elimination over F2; no size cap. Free variables are set to
/// false in the returned assignment.
pub fn solve_f2(inst: &XorInstance) -> Option<u64> {
    let words = (inst.n as usize).div_ceil(64);
    // Row layout: variable bits, then the parity in an extra virtual column.
    let mut rows: Vec<(Vec<u64>, bool)> = inst
        .constraints
        .iter()
        .map(|c| {
            let mut mask = vec![0u64; words];
            for &v in &c.vars {
                mask[(v - 1) as usize / 64] |= 1 << ((v - 1) % 64);
            }
            (mask, c.parity)
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut rank = 0usize;
    for col in 0..inst.n as usize {
        let (w, b) = (col / 64, col % 64);
        let Some(r) = (rank..rows.len()).find(|&r| rows[r].0[w] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(rank, r);
        let (pivot_mask, pivot_parity) = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row.0[w] >> b & 1 == 1 {
                for (dst, src) in row.0.iter_mut().zip(&pivot_mask) {
                    *dst ^= src;
                }
                row.1 ^= pivot_parity;
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    // A zero row with parity one is the inconsistency witness.
    if rows[rank..]
        .iter()
        .any(|(mask, parity)| *parity && mask.iter().all(|&w| w == 0))
    {
        return None;
    }
    let mut assignment = 0u64;
    for &(row, col) in &pivots {
        if rows[row].1 {
            assignment |= 1 << col;
        }
    }
    Some(assignment)
}

/// A fixed inconsistent system on six variables whose constraint rows are
/// F2-dependent: the four triples XOR to the empty set while the parities
/// XOR to one, so elimination derives 0 = 1. Used as the reverse
/// unsatisfiability check; its translation is UNSAT over the support.
pub fn dependent_unsat_core() -> XorInstance {
    let mk = |a, b, c, p| XorConstraint::new(a, b, c, p).expect("distinct indices");
    XorInstance {
        n: 6,
        constraints: vec![
            mk(1, 2, 3, false),
            mk(3, 4, 5, false),
            mk(1, 5, 6, false),
            mk(2, 4, 6, true),
        ],
    }
}
