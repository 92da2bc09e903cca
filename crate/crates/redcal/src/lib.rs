//! Reduction and calibration toolkit.
//!
//! The crate collects the pieces needed to move constraint instances between
//! formats without losing track of what each move costs:
//!
//! - [`coding`]: Elias delta codes, self-delimiting meta records, and the
//!   bit-budget bounds used to price parameter records.
//! - [`instances`]: 3XOR systems, width-3 CNF formulas, literal graphs, their
//!   text formats, and a seeded instance generator.
//! - [`xorsat`]: the injective four-clause 3XOR -> 3SAT translation, canonical
//!   block identifiers, and the linear-time inverse.
//! - [`clique`]: the classical 3SAT -> CLIQUE reduction with a desk-scale
//!   clique search for equivalence checking.
//! - [`measure`]: finite distributions, total variation, pushforwards,
//!   windowing, and cost certificates.
//! - [`lowdeg`]: biased Walsh bases, discrepancy spectra, the exact low-degree
//!   distinguishing LP, noise smoothing, and the structure/vanishing dichotomy.
//! - [`gadgets`]: F2 algebraic normal forms, interface matrix enumeration,
//!   index gadgets, pullbacks, and switching-path width accounting.
//! - [`pipeline`]: the amplification / window / condense / fix-indices
//!   blueprint with a loss ledger.
//! - [`cli`]: the `redcal` command-line front end.
//!
//! Everything is deterministic: randomness comes from [`rng::SplitMix64`]
//! seeded explicitly, reports contain no timestamps, and serialization orders
//! are canonical.

pub mod cli;
pub mod clique;
pub mod coding;
pub mod gadgets;
pub mod instances;
pub mod lowdeg;
pub mod measure;
pub mod pipeline;
pub mod rng;
pub mod xorsat;
