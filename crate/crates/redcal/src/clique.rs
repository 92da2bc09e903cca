//! The classical 3SAT -> CLIQUE reduction.
//!
//! Every clause contributes a block of three vertices, one per literal.
//! Vertices in different blocks are adjacent exactly when their literals do
//! not contradict (same variable, opposite sign); blocks are independent
//! sets. A formula with `m` clauses is satisfiable iff the graph has an
//! `m`-clique, which must take one vertex per block. So `|V| = 3m` and
//! `|E| <= 9 * C(m, 2)`.

use thiserror::Error;

use crate::instances::{CnfFormula, LiteralGraph};

#[derive(Debug, Error, PartialEq)]
pub enum CliqueError {
    #[error("clique target {target} must equal the block count {blocks}")]
    TargetMismatch { target: u32, blocks: u32 },
    #[error("formula has {n} variables, exhaustive cap is {cap}")]
    SatCapExceeded { n: u32, cap: u32 },
    #[error("graph has {blocks} blocks, search cap is {cap}")]
    BlockCapExceeded { blocks: u32, cap: u32 },
    #[error("satisfiability and clique existence disagree: sat={sat} clique={clique}")]
    Disagreement { sat: bool, clique: bool },
}

/// Build the clause/literal graph. Vertex `3i + s` is slot `s` of clause `i`.
pub fn reduce_to_clique(f: &CnfFormula) -> LiteralGraph {
    let mut labels = Vec::with_capacity(f.clauses.len() * 3);
    for (i, c) in f.clauses.iter().enumerate() {
        for &lit in c.lits() {
            labels.push((i as u32, lit));
        }
    }
    let mut edges = Vec::new();
    for u in 0..labels.len() {
        for v in u + 1..labels.len() {
            let (cu, lu) = labels[u];
            let (cv, lv) = labels[v];
            if cu != cv && !lu.contradicts(lv) {
                edges.push((u as u32, v as u32));
            }
        }
    }
    LiteralGraph {
        blocks: f.clauses.len() as u32,
        labels,
        edges,
    }
}

/// Structural sanity of a reduction graph: no edges inside a block and no
/// contradictory endpoints.
pub fn structurally_valid(g: &LiteralGraph) -> bool {
    g.edges.iter().all(|&(u, v)| {
        let (cu, lu) = g.labels[u as usize];
        let (cv, lv) = g.labels[v as usize];
        cu != cv && !lu.contradicts(lv)
    })
}

/// Search for a clique of size `target` (= block count) by picking one
/// vertex per block with bitset pruning. Returns the vertex ids.
pub fn has_clique_of_size(g: &LiteralGraph, target: u32) -> Result<Option<Vec<u32>>, CliqueError> {
    if target != g.blocks {
        return Err(CliqueError::TargetMismatch {
            target,
            blocks: g.blocks,
        });
    }
    if g.blocks > 24 {
        return Err(CliqueError::BlockCapExceeded {
            blocks: g.blocks,
            cap: 24,
        });
    }
    if g.blocks == 0 {
        return Ok(Some(Vec::new()));
    }
    let adj = g.adjacency();
    let words = g.labels.len().div_ceil(64);
    // Candidate mask starts full; each chosen vertex intersects it with its
    // adjacency row, so any completion stays mutually adjacent.
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let lo = w * 64;
            let hi = (lo + 64).min(g.labels.len());
            if hi <= lo {
                0
            } else if hi - lo == 64 {
                u64::MAX
            } else {
                (1u64 << (hi - lo)) - 1
            }
        })
        .collect();
    let mut chosen: Vec<u32> = Vec::with_capacity(g.blocks as usize);
    fn recurse(
        block: u32,
        blocks: u32,
        cand: &[u64],
        adj: &[Vec<u64>],
        chosen: &mut Vec<u32>,
    ) -> bool {
        if block == blocks {
            return true;
        }
        for slot in 0..3u32 {
            let v = (block * 3 + slot) as usize;
            if cand[v / 64] >> (v % 64) & 1 == 0 {
                continue;
            }
            let next: Vec<u64> = cand.iter().zip(&adj[v]).map(|(c, a)| c & a).collect();
            chosen.push(v as u32);
            if recurse(block + 1, blocks, &next, adj, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    if recurse(0, g.blocks, &full, &adj, &mut chosen) {
        Ok(Some(chosen))
    } else {
        Ok(None)
    }
}

/// Exhaustive satisfiability scan, capped; returns an assignment mask.
pub fn brute_sat(f: &CnfFormula, cap: u32) -> Result<Option<u64>, CliqueError> {
    if f.n > cap {
        return Err(CliqueError::SatCapExceeded { n: f.n, cap });
    }
    Ok((0u64..1 << f.n).find(|&a| f.satisfied_by(a)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub sat: bool,
    pub clique: bool,
    /// When a clique exists, its labels were checked to be contradiction-free
    /// and to extend to a satisfying assignment.
    pub witness_checked: bool,
}

/// Decide the formula twice (brute-force SAT, clique search) and insist the
/// answers agree; when a clique is found, validate its induced assignment.
pub fn check_equivalence(f: &CnfFormula) -> Result<EquivalenceReport, CliqueError> {
    let sat = brute_sat(f, 16)?.is_some();
    let g = reduce_to_clique(f);
    let clique = has_clique_of_size(&g, g.blocks)?;
    let has_clique = clique.is_some();
    if sat != has_clique {
        return Err(CliqueError::Disagreement {
            sat,
            clique: has_clique,
        });
    }
    let mut witness_checked = false;
    if let Some(vs) = clique {
        // One vertex per block, mutually non-contradictory: the positive
        // literals force an assignment that satisfies every clause.
        let mut assignment = 0u64;
        for &v in &vs {
            let (_, lit) = g.labels[v as usize];
            if lit.positive {
                assignment |= 1 << (lit.var - 1);
            }
        }
        let consistent = vs.iter().all(|&v| {
            let (_, lit) = g.labels[v as usize];
            lit.positive == (assignment >> (lit.var - 1) & 1 == 1)
        });
        if !consistent || !f.satisfied_by(assignment) {
            return Err(CliqueError::Disagreement { sat, clique: true });
        }
        witness_checked = true;
    }
    Ok(EquivalenceReport {
        sat,
        clique: has_clique,
        witness_checked,
    })
}
