//! F2 normal forms for 3-in/2-out gadget interfaces, the Index gadget, and
//! degree pullbacks.
//!
//! Truth tables over `(a,b,c)` are packed into a `u8` with row index
//! `a<<2 | b<<1 | c`; algebraic normal forms use monomial masks with the same
//! bit-for-variable convention (`a` is bit 2). A parity-preserving gadget
//! splits per output into a constant, a linear vector, and a nonlinear core,
//! and the two cores always coincide.
//!
//! Admissible interface matrices have every column summing to 1 over F2.
//! Exactly two elements of GL2 preserve that constraint under left
//! multiplication (identity and the row swap); every other mixing matrix
//! maps every admissible interface outside the admissible set. Orbits are
//! therefore computed under the row-swap subgroup, and [`orbits_under`]
//! exposes what happens under the full group.
//!
//! Degree pullbacks come in two readings. Over F2, substituting affine forms
//! into an ANF never increases degree ([`affine_pullback_anf`]). Over the
//! reals, an XOR of `w` inputs is a degree-`w` multilinear polynomial, so an
//! affine wiring only guarantees degree `w * k` ([`affine_pullback`]), with
//! strict preservation exactly in the weight-1 case; a unit test keeps the
//! two-output counterexample that separates the readings. The Index wiring
//! is bilinear, hence the clean factor-2 law ([`index_pullback`]).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lowdeg::{LowDegError, MonomialPoly, ProductProxy, WalshPolynomial, EXHAUSTIVE_CAP};

#[derive(Debug, Error, PartialEq)]
pub enum GadgetError {
    #[error("truth table has {len} rows, expected {expected}")]
    BadTable { len: usize, expected: usize },
    #[error("gadget is not parity-preserving")]
    NotParityPreserving,
    #[error("column {col} of the interface matrix does not sum to 1")]
    BadColumnSum { col: usize },
    #[error("interface matrix is degenerate (rank < 2)")]
    Degenerate,
    #[error("offset vector has odd parity")]
    BadOffset,
    #[error("input variable {var} is used by two blocks")]
    OverlappingBlocks { var: usize },
    #[error("polynomial mentions output {output}, but the wiring has {outputs}")]
    ArityMismatch { output: usize, outputs: usize },
    #[error("{side} side has {n} variables, above the exhaustive cap {cap}")]
    CapExceeded {
        side: &'static str,
        n: usize,
        cap: usize,
    },
    #[error("line {line}: {msg}")]
    BadText { line: usize, msg: String },
    #[error(transparent)]
    LowDeg(#[from] LowDegError),
}

// ---------------------------------------------------------------------------
// Algebraic normal forms
// ---------------------------------------------------------------------------

/// F2 polynomial as a set of monomial masks (bit `i` of a mask = variable `i`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnfPoly {
    monomials: BTreeSet<u32>,
}

impl AnfPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self {
            monomials: [0u32].into(),
        }
    }

    pub fn variable(i: usize) -> Self {
        Self {
            monomials: [1u32 << i].into(),
        }
    }

    pub fn from_monomials(monomials: impl IntoIterator<Item = u32>) -> Self {
        // XOR semantics: a monomial listed twice cancels.
        let mut set = BTreeSet::new();
        for m in monomials {
            if !set.remove(&m) {
                set.insert(m);
            }
        }
        Self { monomials: set }
    }

    /// Möbius transform of a complete truth table (`table[x]` = value at the
    /// assignment with bit pattern `x`). The same transform inverts itself.
    pub fn from_truth_table(n: usize, table: &[bool]) -> Result<Self, GadgetError> {
        assert!(n <= 20, "ANF tables are explicit");
        if table.len() != 1 << n {
            return Err(GadgetError::BadTable {
                len: table.len(),
                expected: 1 << n,
            });
        }
        let mut a = table.to_vec();
        for i in 0..n {
            for mask in 0..1usize << n {
                if mask >> i & 1 == 1 {
                    a[mask] ^= a[mask ^ (1 << i)];
                }
            }
        }
        Ok(Self {
            monomials: (0..1u32 << n).filter(|&m| a[m as usize]).collect(),
        })
    }

    pub fn to_truth_table(&self, n: usize) -> Vec<bool> {
        (0..1u32 << n).map(|x| self.eval(x)).collect()
    }

    /// XOR over monomials contained in the assignment mask.
    pub fn eval(&self, x: u32) -> bool {
        self.monomials.iter().filter(|&&m| x & m == m).count() % 2 == 1
    }

    pub fn xor(&self, other: &Self) -> Self {
        Self {
            monomials: self
                .monomials
                .symmetric_difference(&other.monomials)
                .copied()
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc = BTreeSet::new();
        for &m1 in &self.monomials {
            for &m2 in &other.monomials {
                let m = m1 | m2;
                if !acc.remove(&m) {
                    acc.insert(m);
                }
            }
        }
        Self { monomials: acc }
    }

    /// Replace variable `i` by `subs[i]` and re-expand.
    pub fn substitute(&self, subs: &[AnfPoly]) -> Self {
        let mut total = Self::zero();
        for &m in &self.monomials {
            let mut term = Self::one();
            let mut rest = m;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                term = term.mul(&subs[i]);
            }
            total = total.xor(&term);
        }
        total
    }

    pub fn degree(&self) -> usize {
        self.monomials
            .iter()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &BTreeSet<u32> {
        &self.monomials
    }
}

/// Row masks for the gadget variables `a`, `b`, `c`.
pub const A_VAR: u32 = 0b100;
pub const B_VAR: u32 = 0b010;
pub const C_VAR: u32 = 0b001;

/// Packed truth table of `a XOR b XOR c` (bit `r` = parity of row `r`).
pub const PARITY_TABLE: u8 = 0x96;

fn table_to_bools(table: u8) -> Vec<bool> {
    (0..8).map(|r| table >> r & 1 == 1).collect()
}

/// A 3-in/2-out gadget with both outputs in algebraic normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnfGadget {
    pub table1: u8,
    pub table2: u8,
    pub anf1: AnfPoly,
    pub anf2: AnfPoly,
    pub parity_preserving: bool,
}

impl AnfGadget {
    fn anf(&self, output: usize) -> &AnfPoly {
        match output {
            1 => &self.anf1,
            2 => &self.anf2,
            _ => panic!("outputs are numbered 1 and 2"),
        }
    }

    /// Constant part `alpha` of the chosen output.
    pub fn constant(&self, output: usize) -> bool {
        self.anf(output).monomials.contains(&0)
    }

    /// Linear part `beta` as a 3-bit mask over `(a,b,c)`.
    pub fn linear(&self, output: usize) -> u32 {
        self.anf(output)
            .monomials
            .iter()
            .filter(|m| m.count_ones() == 1)
            .fold(0, |acc, m| acc | m)
    }

    /// Nonlinear core `q`: monomials of degree at least 2.
    pub fn core(&self, output: usize) -> BTreeSet<u32> {
        self.anf(output)
            .monomials
            .iter()
            .copied()
            .filter(|m| m.count_ones() >= 2)
            .collect()
    }
}

/// Expand both outputs in ANF and flag parity preservation
/// (`s1 XOR s2 = a XOR b XOR c` on all 8 rows).
pub fn anf_decompose(table1: u8, table2: u8) -> AnfGadget {
    let anf1 = AnfPoly::from_truth_table(3, &table_to_bools(table1)).expect("8 rows");
    let anf2 = AnfPoly::from_truth_table(3, &table_to_bools(table2)).expect("8 rows");
    AnfGadget {
        table1,
        table2,
        anf1,
        anf2,
        parity_preserving: table1 ^ table2 == PARITY_TABLE,
    }
}

/// Shared nonlinear core of a parity-preserving gadget. The parity identity
/// forces the degree-2-and-up parts of the two outputs to cancel, so the two
/// cores are equal; the equality is still checked.
pub fn shared_core_check(g: &AnfGadget) -> Result<BTreeSet<u32>, GadgetError> {
    if !g.parity_preserving {
        return Err(GadgetError::NotParityPreserving);
    }
    let q1 = g.core(1);
    let q2 = g.core(2);
    assert_eq!(q1, q2, "parity-preserving gadget with distinct cores");
    Ok(q1)
}

// ---------------------------------------------------------------------------
// Interface matrices
// ---------------------------------------------------------------------------

/// 2x3 interface matrix over F2 with column sums `(1,1,1)`, rank 2, and an
/// even-parity offset. Rows are stored as 3-bit masks, bit `j` = column `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct InterfaceMatrix {
    rows: [u8; 2],
    offset: u8,
}

impl InterfaceMatrix {
    pub fn new(rows: [[bool; 3]; 2], offset: [bool; 2]) -> Result<Self, GadgetError> {
        let pack = |r: [bool; 3]| (0..3).fold(0u8, |m, j| m | (u8::from(r[j]) << j));
        let packed = [pack(rows[0]), pack(rows[1])];
        for col in 0..3 {
            if (packed[0] >> col & 1) ^ (packed[1] >> col & 1) != 1 {
                return Err(GadgetError::BadColumnSum { col });
            }
        }
        // With every column in {e1, e2}, rank 2 just means the columns are
        // not all equal, i.e. neither row is all-ones.
        if packed[0] == 0b111 || packed[1] == 0b111 {
            return Err(GadgetError::Degenerate);
        }
        if offset[0] != offset[1] {
            return Err(GadgetError::BadOffset);
        }
        Ok(Self {
            rows: packed,
            offset: u8::from(offset[0]) | (u8::from(offset[1]) << 1),
        })
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        self.rows[row] >> col & 1 == 1
    }

    pub fn offset_bit(&self, row: usize) -> bool {
        self.offset >> row & 1 == 1
    }

    pub fn row_swap(&self) -> Self {
        Self {
            rows: [self.rows[1], self.rows[0]],
            offset: (self.offset >> 1 & 1) | (self.offset << 1 & 0b10),
        }
    }

    /// Drop the affine offset (classification normalizes it away).
    pub fn linear_part(&self) -> Self {
        Self {
            rows: self.rows,
            offset: 0,
        }
    }

    /// `y_i = sum_j A_ij x_j + r_i` over F2; input bit `j` = variable `j`.
    pub fn apply(&self, x: u8) -> u8 {
        let mut y = self.offset;
        for row in 0..2 {
            let bit = (self.rows[row] & x).count_ones() & 1;
            y ^= (bit as u8) << row;
        }
        y
    }

    /// As an [`AffineWiring`] on 3 inputs.
    pub fn wiring(&self) -> AffineWiring {
        AffineWiring {
            masks: vec![self.rows[0] as u64, self.rows[1] as u64],
            consts: vec![self.offset_bit(0), self.offset_bit(1)],
        }
    }
}

impl std::fmt::Display for InterfaceMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in 0..2 {
            write!(f, "[")?;
            for col in 0..3 {
                write!(f, "{}", u8::from(self.entry(row, col)))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// The displayed class representatives.
pub fn representative(class: usize) -> InterfaceMatrix {
    let reps = [
        [[true, false, false], [false, true, true]],
        [[false, true, false], [true, false, true]],
        [[false, false, true], [true, true, false]],
    ];
    InterfaceMatrix::new(reps[class - 1], [false, false]).expect("representatives are admissible")
}

#[derive(Debug, Clone)]
pub struct InterfaceClass {
    /// 1-based class id; the representative has its weight-1 row on top with
    /// the 1 in column `id - 1`.
    pub id: usize,
    pub representative: InterfaceMatrix,
    pub members: Vec<InterfaceMatrix>,
}

#[derive(Debug, Clone)]
pub struct InterfaceEnumeration {
    pub matrices: Vec<InterfaceMatrix>,
    pub classes: Vec<InterfaceClass>,
}

/// Enumerate all admissible interface matrices (offset 0) and group them into
/// row-swap orbits. There are exactly 6 matrices in exactly 3 classes, and
/// each class contains exactly one displayed representative.
pub fn enumerate_interfaces() -> InterfaceEnumeration {
    let mut matrices = Vec::new();
    for top in 0..8u8 {
        let unpack = |m: u8| [m & 1 == 1, m >> 1 & 1 == 1, m >> 2 & 1 == 1];
        if let Ok(m) = InterfaceMatrix::new([unpack(top), unpack(!top & 0b111)], [false, false]) {
            matrices.push(m);
        }
    }
    assert_eq!(matrices.len(), 6, "admissible interface count");

    let mut classes: Vec<InterfaceClass> = Vec::new();
    for &m in &matrices {
        let (id, rep) = classify(&m).expect("enumerated matrices classify");
        match classes.iter_mut().find(|c| c.id == id) {
            Some(c) => c.members.push(m),
            None => classes.push(InterfaceClass {
                id,
                representative: rep,
                members: vec![m],
            }),
        }
    }
    classes.sort_by_key(|c| c.id);
    assert_eq!(classes.len(), 3, "interface class count");
    for c in &classes {
        assert_eq!(c.members.len(), 2);
        assert!(c.members.contains(&c.representative));
        assert!(c.members.contains(&c.representative.row_swap()));
    }
    InterfaceEnumeration { matrices, classes }
}

/// Class of an admissible matrix under the row-swap subgroup, after dropping
/// the offset: the class id is the position of the unique column whose 1 sits
/// alone in its row.
pub fn classify(m: &InterfaceMatrix) -> Result<(usize, InterfaceMatrix), GadgetError> {
    let m = m.linear_part();
    let top = if m.rows[0].count_ones() == 1 { m } else { m.row_swap() };
    let col = top.rows[0].trailing_zeros() as usize;
    let rep = representative(col + 1);
    debug_assert_eq!(top, rep);
    Ok((col + 1, rep))
}

/// Output-mixing group choice for orbit computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingGroup {
    /// `{identity, row swap}`: the stabilizer of the column-sum constraint.
    ParityPreserving,
    /// All six invertible 2x2 matrices over F2.
    FullGl2,
}

#[derive(Debug, Clone)]
pub struct OrbitReport {
    pub group: MixingGroup,
    pub orbit_count: usize,
    /// Whether every group element maps the admissible set into itself.
    pub closed: bool,
    /// A mixing matrix and an admissible interface it maps outside the set.
    pub escape_witness: Option<([[bool; 2]; 2], InterfaceMatrix)>,
}

fn gl2_elements() -> Vec<[[bool; 2]; 2]> {
    let mut out = Vec::new();
    for bits in 0..16u8 {
        let u = [
            [bits & 1 == 1, bits >> 1 & 1 == 1],
            [bits >> 2 & 1 == 1, bits >> 3 & 1 == 1],
        ];
        let det = (u[0][0] & u[1][1]) ^ (u[0][1] & u[1][0]);
        if det {
            out.push(u);
        }
    }
    out
}

fn mix_rows(u: [[bool; 2]; 2], m: &InterfaceMatrix) -> [u8; 2] {
    let mut rows = [0u8; 2];
    for (i, u_row) in u.iter().enumerate() {
        let mut r = 0u8;
        if u_row[0] {
            r ^= m.rows[0];
        }
        if u_row[1] {
            r ^= m.rows[1];
        }
        rows[i] = r;
    }
    rows
}

fn admissible_from_rows(rows: [u8; 2]) -> Option<InterfaceMatrix> {
    let unpack = |m: u8| [m & 1 == 1, m >> 1 & 1 == 1, m >> 2 & 1 == 1];
    InterfaceMatrix::new([unpack(rows[0]), unpack(rows[1])], [false, false]).ok()
}

/// Orbits of the admissible set under a mixing-group choice. Mixing by any
/// element outside `{identity, swap}` lands outside the admissible set, so
/// the induced partition is the same for both groups; the report records
/// whether the action stayed closed.
pub fn orbits_under(group: MixingGroup) -> OrbitReport {
    let matrices = enumerate_interfaces().matrices;
    let elements = match group {
        MixingGroup::ParityPreserving => {
            vec![[[true, false], [false, true]], [[false, true], [true, false]]]
        }
        MixingGroup::FullGl2 => gl2_elements(),
    };
    let mut escape_witness = None;
    let mut reached: Vec<BTreeSet<InterfaceMatrix>> =
        matrices.iter().map(|&m| [m].into()).collect();
    for (idx, &m) in matrices.iter().enumerate() {
        for &u in &elements {
            match admissible_from_rows(mix_rows(u, &m)) {
                Some(image) => {
                    reached[idx].insert(image);
                }
                None => {
                    if escape_witness.is_none() {
                        escape_witness = Some((u, m));
                    }
                }
            }
        }
    }
    // Merge overlapping reach sets into orbits.
    let mut orbits: Vec<BTreeSet<InterfaceMatrix>> = Vec::new();
    for set in reached {
        match orbits.iter_mut().find(|o| !o.is_disjoint(&set)) {
            Some(o) => o.extend(set),
            None => orbits.push(set),
        }
    }
    OrbitReport {
        group,
        orbit_count: orbits.len(),
        closed: escape_witness.is_none(),
        escape_witness,
    }
}

// ---------------------------------------------------------------------------
// Index gadget
// ---------------------------------------------------------------------------

/// `t = (1 XOR u) v0 XOR u v1`: routes `v0` when `u = 0`, `v1` when `u = 1`.
pub fn index_eval(u: bool, v0: bool, v1: bool) -> bool {
    if u {
        v1
    } else {
        v0
    }
}

/// Input positions feeding one Index output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexBlock {
    pub selector: usize,
    pub low: usize,
    pub high: usize,
}

fn check_disjoint(blocks: &[IndexBlock]) -> Result<(), GadgetError> {
    let mut seen = BTreeSet::new();
    for b in blocks {
        for var in [b.selector, b.low, b.high] {
            if !seen.insert(var) {
                return Err(GadgetError::OverlappingBlocks { var });
            }
        }
    }
    Ok(())
}

/// Apply the blockwise Index map to an input mask.
pub fn index_wiring_map(blocks: &[IndexBlock], x: u64) -> u64 {
    let mut y = 0u64;
    for (j, b) in blocks.iter().enumerate() {
        let bit = index_eval(
            x >> b.selector & 1 == 1,
            x >> b.low & 1 == 1,
            x >> b.high & 1 == 1,
        );
        y |= (bit as u64) << j;
    }
    y
}

/// Multilinear extension of one Index output: `v0 + u(v1 - v0)`, degree 2.
fn index_block_poly(b: &IndexBlock) -> MonomialPoly {
    let u = MonomialPoly::variable(b.selector);
    let v0 = MonomialPoly::variable(b.low);
    let v1 = MonomialPoly::variable(b.high);
    v0.add(&u.mul(&v1.add(&v0.scale(-1.0))))
}

/// Pull a chi polynomial on the Index outputs back to the inputs. Each output
/// substitutes a degree-2 multilinear polynomial, so the result has degree at
/// most `2 deg(p)`; the Index map is onto the output cube, so the sup-norm
/// cannot grow. Both facts are asserted after re-expansion.
pub fn index_pullback(
    p: &WalshPolynomial,
    blocks: &[IndexBlock],
    out_proxy: &ProductProxy,
    in_proxy: &ProductProxy,
) -> Result<WalshPolynomial, GadgetError> {
    check_disjoint(blocks)?;
    if in_proxy.n() > EXHAUSTIVE_CAP {
        return Err(GadgetError::CapExceeded {
            side: "input",
            n: in_proxy.n(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    let subs: Vec<MonomialPoly> = blocks.iter().map(index_block_poly).collect();
    let q = substitute_outputs(p, out_proxy, &subs)?;
    let k = p.degree();
    assert!(q.degree() <= 2 * k, "index pullback degree law");
    assert!(
        q.sup_norm_cube(in_proxy.n()) <= p.sup_norm(out_proxy) + 1e-9,
        "index pullback sup-norm law"
    );
    Ok(q.to_walsh(in_proxy, 2 * p.degree_bound())?)
}

/// Expand `p` into output monomials and substitute each output coordinate.
fn substitute_outputs(
    p: &WalshPolynomial,
    out_proxy: &ProductProxy,
    subs: &[MonomialPoly],
) -> Result<MonomialPoly, GadgetError> {
    let mono = MonomialPoly::from_walsh(p, out_proxy);
    let mut total = MonomialPoly::zero();
    for (&m, &c) in mono.coeffs() {
        let mut term = MonomialPoly::constant(c);
        let mut rest = m;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if j >= subs.len() {
                return Err(GadgetError::ArityMismatch {
                    output: j,
                    outputs: subs.len(),
                });
            }
            term = term.mul(&subs[j]);
        }
        total = total.add(&term);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Affine wirings
// ---------------------------------------------------------------------------

/// Blockwise affine map over F2: `y_j = XOR of x_i over masks[j], XOR consts[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineWiring {
    pub masks: Vec<u64>,
    pub consts: Vec<bool>,
}

impl AffineWiring {
    pub fn identity(n: usize) -> Self {
        Self {
            masks: (0..n).map(|i| 1u64 << i).collect(),
            consts: vec![false; n],
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.masks.len()
    }

    /// Largest number of inputs feeding one output.
    pub fn max_weight(&self) -> usize {
        self.masks
            .iter()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn apply(&self, x: u64) -> u64 {
        let mut y = 0u64;
        for (j, (&m, &r)) in self.masks.iter().zip(&self.consts).enumerate() {
            let bit = ((x & m).count_ones() & 1 == 1) ^ r;
            y |= (bit as u64) << j;
        }
        y
    }

    /// Multilinear extension of output `j` (XOR chain, degree = weight).
    fn output_poly(&self, j: usize) -> MonomialPoly {
        let mut acc = MonomialPoly::constant(if self.consts[j] { 1.0 } else { 0.0 });
        let mut rest = self.masks[j];
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let xi = MonomialPoly::variable(i);
            // a XOR b extends to a + b - 2ab.
            acc = acc.add(&xi).add(&acc.mul(&xi).scale(-2.0));
        }
        acc
    }
}

/// F2 route: substitute the affine forms into an ANF. Substituting degree-1
/// polynomials can only keep or lower the F2 degree, which is asserted.
pub fn affine_pullback_anf(p: &AnfPoly, wiring: &AffineWiring) -> Result<AnfPoly, GadgetError> {
    let outputs = wiring.n_outputs();
    if let Some(&m) = p.monomials().iter().max() {
        // The numerically largest mask carries the highest variable index.
        if m != 0 {
            let top = (31 - m.leading_zeros()) as usize;
            if top >= outputs {
                return Err(GadgetError::ArityMismatch {
                    output: top,
                    outputs,
                });
            }
        }
    }
    let subs: Vec<AnfPoly> = (0..outputs)
        .map(|j| {
            let mut f = if wiring.consts[j] {
                AnfPoly::one()
            } else {
                AnfPoly::zero()
            };
            let mut rest = wiring.masks[j];
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                f = f.xor(&AnfPoly::variable(i));
            }
            f
        })
        .collect();
    let q = p.substitute(&subs);
    assert!(q.degree() <= p.degree(), "affine ANF pullback degree law");
    Ok(q)
}

/// Real route: compose a chi polynomial with the multilinear extension of the
/// wiring. An XOR of `w` inputs has real degree `w`, so the degree can grow
/// by the factor `max_weight`; it is preserved exactly when every output
/// reads a single input. The sup-norm never grows (the wiring maps the cube
/// into the cube). Both facts are asserted after re-expansion.
pub fn affine_pullback(
    p: &WalshPolynomial,
    wiring: &AffineWiring,
    out_proxy: &ProductProxy,
    in_proxy: &ProductProxy,
) -> Result<WalshPolynomial, GadgetError> {
    if in_proxy.n() > EXHAUSTIVE_CAP {
        return Err(GadgetError::CapExceeded {
            side: "input",
            n: in_proxy.n(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    let subs: Vec<MonomialPoly> = (0..wiring.n_outputs())
        .map(|j| wiring.output_poly(j))
        .collect();
    let q = substitute_outputs(p, out_proxy, &subs)?;
    let w = wiring.max_weight().max(1);
    assert!(
        q.degree() <= w * p.degree(),
        "affine pullback weight-factor degree law"
    );
    if w <= 1 {
        assert!(q.degree() <= p.degree());
    }
    assert!(
        q.sup_norm_cube(in_proxy.n()) <= p.sup_norm(out_proxy) + 1e-9,
        "affine pullback sup-norm law"
    );
    Ok(q.to_walsh(in_proxy, w * p.degree_bound())?)
}

// ---------------------------------------------------------------------------
// Switching-path arithmetic
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SwitchingTrace {
    /// Per-round shrink factor `p = m^(-c/d)`.
    pub p: f64,
    /// `(W_r, M_r)` for `r = 0..=d`.
    pub rounds: Vec<(f64, f64)>,
    pub width: f64,
    pub bottom: f64,
}

/// Iterate `W_r = W_{r-1}/p`, `M_r = p * M_{r-1}` from `(1, m)` for `d`
/// rounds; the closed forms `W_d = m^c` and `M_d = m^{1-c}` are asserted.
pub fn switching_path_widths(m: f64, d: u32, c: f64) -> SwitchingTrace {
    assert!(m >= 2.0 && d >= 1 && c > 0.0 && c < 1.0);
    let p = m.powf(-c / d as f64);
    let mut rounds = vec![(1.0, m)];
    for r in 1..=d {
        let (w, size) = rounds[r as usize - 1];
        rounds.push((w / p, p * size));
    }
    let (width, bottom) = *rounds.last().unwrap();
    let tol = 1e-9 * m.powf(c.max(1.0 - c));
    assert!(width <= m.powf(c) + tol, "width bound along the path");
    assert!(bottom <= m.powf(1.0 - c) + tol, "bottom size bound");
    SwitchingTrace {
        p,
        rounds,
        width,
        bottom,
    }
}

// ---------------------------------------------------------------------------
// Truth-table text format
// ---------------------------------------------------------------------------

/// Parse a gadget from 8 lines `a b c s1 s2` (binary digits, any row order,
/// each row exactly once).
pub fn parse_gadget(text: &str) -> Result<AnfGadget, GadgetError> {
    let mut seen = [false; 8];
    let mut t1 = 0u8;
    let mut t2 = 0u8;
    let mut rows = 0usize;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut bits = [0u8; 5];
        let mut toks = line.split_ascii_whitespace();
        for slot in &mut bits {
            *slot = match toks.next() {
                Some("0") => 0,
                Some("1") => 1,
                other => {
                    return Err(GadgetError::BadText {
                        line: line_no,
                        msg: format!("expected binary digit, got {other:?}"),
                    })
                }
            };
        }
        if toks.next().is_some() {
            return Err(GadgetError::BadText {
                line: line_no,
                msg: "expected exactly 5 fields `a b c s1 s2`".to_string(),
            });
        }
        let row = (bits[0] << 2 | bits[1] << 1 | bits[2]) as usize;
        if seen[row] {
            return Err(GadgetError::BadText {
                line: line_no,
                msg: format!("row ({} {} {}) repeated", bits[0], bits[1], bits[2]),
            });
        }
        seen[row] = true;
        rows += 1;
        t1 |= bits[3] << row;
        t2 |= bits[4] << row;
    }
    if rows != 8 {
        return Err(GadgetError::BadTable {
            len: rows,
            expected: 8,
        });
    }
    Ok(anf_decompose(t1, t2))
}

pub fn serialize_gadget(g: &AnfGadget) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for row in 0..8u8 {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            row >> 2 & 1,
            row >> 1 & 1,
            row & 1,
            g.table1 >> row & 1,
            g.table2 >> row & 1
        );
    }
    out
}
