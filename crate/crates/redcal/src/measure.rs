//! Finite distributions, total variation, windows, and cost certificates.
//!
//! Distributions are explicit finite supports with f64 probabilities,
//! validated at construction (distinct points, nonnegative, total mass 1
//! within 1e-12). [`exact`] mirrors the core operations with big-rational
//! arithmetic for oracle-grade identities.
//!
//! The text format for mask-valued distributions is one `point-hex
//! probability` pair per line, e.g. `1f 0.125`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::coding::{meta_overhead, CodingError, MetaRecord};

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("probability {p} at point index {index} is negative")]
    NegativeProbability { index: usize, p: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("duplicate support point at index {index}")]
    DuplicatePoint { index: usize },
    #[error("window has zero mass")]
    EmptyWindow,
    #[error("line {line}: {msg}")]
    BadText { line: usize, msg: String },
    #[error(transparent)]
    Coding(#[from] CodingError),
}

const MASS_TOL: f64 = 1e-12;

/// A probability distribution on an explicit finite support, kept sorted by
/// point for canonical iteration order.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution<T> {
    points: Vec<T>,
    probs: Vec<f64>,
}

impl<T: Ord + Clone> FiniteDistribution<T> {
    /// Validating constructor; points must be distinct.
    pub fn from_pairs(pairs: Vec<(T, f64)>) -> Result<Self, MeasureError> {
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut sum = 0.0;
        for (i, (_, p)) in pairs.iter().enumerate() {
            if *p < 0.0 {
                return Err(MeasureError::NegativeProbability { index: i, p: *p });
            }
            sum += p;
        }
        for (i, w) in pairs.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(MeasureError::DuplicatePoint { index: i + 1 });
            }
        }
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::NotNormalized { sum });
        }
        let (points, probs) = pairs.into_iter().unzip();
        Ok(Self { points, probs })
    }

    /// Point mass.
    pub fn dirac(point: T) -> Self {
        Self {
            points: vec![point],
            probs: vec![1.0],
        }
    }

    /// Internal constructor that merges duplicate images (pushforward).
    fn from_merging(pairs: impl IntoIterator<Item = (T, f64)>) -> Self {
        let mut acc: BTreeMap<T, f64> = BTreeMap::new();
        for (x, p) in pairs {
            *acc.entry(x).or_insert(0.0) += p;
        }
        let (points, probs) = acc.into_iter().unzip();
        Self { points, probs }
    }

    pub fn support(&self) -> &[T] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.points.iter().zip(self.probs.iter().copied())
    }

    pub fn prob_of(&self, x: &T) -> f64 {
        match self.points.binary_search_by(|p| p.cmp(x)) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    pub fn mass_where(&self, mut event: impl FnMut(&T) -> bool) -> f64 {
        self.iter().filter(|(x, _)| event(x)).map(|(_, p)| p).sum()
    }

    pub fn expect(&self, mut f: impl FnMut(&T) -> f64) -> f64 {
        self.iter().map(|(x, p)| p * f(x)).sum()
    }

    /// Image distribution under `f`, masses of merged points added.
    pub fn pushforward<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> FiniteDistribution<U> {
        FiniteDistribution::from_merging(self.iter().map(|(x, p)| (f(x), p)))
    }

    /// Condition on the window `w`; returns the conditioned distribution and
    /// the window mass.
    pub fn condition_window(
        &self,
        mut w: impl FnMut(&T) -> bool,
    ) -> Result<(Self, f64), MeasureError> {
        let kept: Vec<(T, f64)> = self
            .iter()
            .filter(|(x, _)| w(x))
            .map(|(x, p)| (x.clone(), p))
            .collect();
        let mass: f64 = kept.iter().map(|(_, p)| p).sum();
        if mass <= 0.0 {
            return Err(MeasureError::EmptyWindow);
        }
        let scaled = kept.into_iter().map(|(x, p)| (x, p / mass));
        Ok((Self::from_merging(scaled), mass))
    }
}

/// Total variation distance, `1/2` the L1 gap over the union support.
pub fn tv_distance<T: Ord + Clone>(
    a: &FiniteDistribution<T>,
    b: &FiniteDistribution<T>,
) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let mut l1 = 0.0;
    while i < a.points.len() || j < b.points.len() {
        match (a.points.get(i), b.points.get(j)) {
            (Some(x), Some(y)) => match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    l1 += a.probs[i];
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    l1 += b.probs[j];
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    l1 += (a.probs[i] - b.probs[j]).abs();
                    i += 1;
                    j += 1;
                }
            },
            (Some(_), None) => {
                l1 += a.probs[i];
                i += 1;
            }
            (None, Some(_)) => {
                l1 += b.probs[j];
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    l1 / 2.0
}

/// TV as a supremum over explicit events: enumerate all subsets of the union
/// support (test oracle; union capped at 25 points).
pub fn tv_event_supremum<T: Ord + Clone>(
    a: &FiniteDistribution<T>,
    b: &FiniteDistribution<T>,
) -> f64 {
    let mut union: Vec<&T> = a.points.iter().chain(b.points.iter()).collect();
    union.sort();
    union.dedup();
    assert!(union.len() <= 25, "event enumeration cap");
    let mut best: f64 = 0.0;
    for mask in 0u64..1 << union.len() {
        let mut pa = 0.0;
        let mut pb = 0.0;
        for (bit, x) in union.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                pa += a.prob_of(x);
                pb += b.prob_of(x);
            }
        }
        best = best.max((pa - pb).abs());
    }
    best
}

/// A bit-priced model plus its expected loss; `value` is the sum the
/// minimax accounting compares.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CostCertificate {
    pub model_bits: u64,
    pub expected_loss: f64,
}

impl CostCertificate {
    pub fn value(&self) -> f64 {
        self.model_bits as f64 + self.expected_loss
    }
}

/// Transport a certificate across a reduction: the reduction's meta record
/// is priced by [`meta_overhead`] at parameter `n` and its total bit count is
/// added to the model side; the loss term is unchanged. The record must pass
/// its range checks and the tight length bound.
pub fn transfer_certificate(
    cert: &CostCertificate,
    reduction_meta: &MetaRecord,
    n: u64,
) -> Result<CostCertificate, MeasureError> {
    let oh = meta_overhead(reduction_meta, n)?;
    if !oh.bound_ok {
        return Err(MeasureError::Coding(CodingError::RangeViolation {
            field: "(record exceeds its tight length bound)".to_string(),
            value: oh.total_bits,
            n,
            exponent: f64::NAN,
        }));
    }
    Ok(CostCertificate {
        model_bits: cert.model_bits + oh.total_bits,
        expected_loss: cert.expected_loss,
    })
}

// ---------------------------------------------------------------------------
// Mask-distribution text format
// ---------------------------------------------------------------------------

/// Parse `point-hex probability` lines into a mask distribution.
pub fn parse_distribution(text: &str) -> Result<FiniteDistribution<u64>, MeasureError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut toks = line.split_ascii_whitespace();
        let (Some(hex), Some(prob), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(MeasureError::BadText {
                line: line_no,
                msg: "expected `<hex> <prob>`".to_string(),
            });
        };
        let point = u64::from_str_radix(hex, 16).map_err(|_| MeasureError::BadText {
            line: line_no,
            msg: format!("bad hex point {hex:?}"),
        })?;
        let p: f64 = prob.parse().map_err(|_| MeasureError::BadText {
            line: line_no,
            msg: format!("bad probability {prob:?}"),
        })?;
        if !p.is_finite() {
            return Err(MeasureError::BadText {
                line: line_no,
                msg: format!("bad probability {prob:?}"),
            });
        }
        pairs.push((point, p));
    }
    FiniteDistribution::from_pairs(pairs)
}

pub fn serialize_distribution(d: &FiniteDistribution<u64>) -> String {
    let mut out = String::new();
    for (x, p) in d.iter() {
        let _ = writeln!(out, "{x:x} {p:.17}");
    }
    out
}

// ---------------------------------------------------------------------------
// Exact-rational mirror
// ---------------------------------------------------------------------------

pub mod exact {
    //! Rational-arithmetic mirror of the core operations, for oracle tests.

    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};
    use std::collections::BTreeMap;

    pub fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// Finite distribution with exact probabilities.
    #[derive(Debug, Clone, PartialEq)]
    pub struct ExactDist<T> {
        pub pairs: Vec<(T, BigRational)>,
    }

    impl<T: Ord + Clone> ExactDist<T> {
        pub fn new(mut pairs: Vec<(T, BigRational)>) -> Self {
            pairs.sort_by(|a, b| a.0.cmp(&b.0));
            let total: BigRational = pairs.iter().map(|(_, p)| p.clone()).sum();
            assert!(total == BigRational::from(BigInt::from(1)), "mass must be 1");
            Self { pairs }
        }

        pub fn prob_of(&self, x: &T) -> BigRational {
            self.pairs
                .iter()
                .find(|(y, _)| y == x)
                .map(|(_, p)| p.clone())
                .unwrap_or_else(BigRational::zero)
        }

        pub fn pushforward<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> ExactDist<U> {
            let mut acc: BTreeMap<U, BigRational> = BTreeMap::new();
            for (x, p) in &self.pairs {
                let y = f(x);
                let e = acc.entry(y).or_insert_with(BigRational::zero);
                *e += p.clone();
            }
            ExactDist {
                pairs: acc.into_iter().collect(),
            }
        }

        pub fn condition(&self, mut w: impl FnMut(&T) -> bool) -> Option<(ExactDist<T>, BigRational)> {
            let kept: Vec<(T, BigRational)> = self
                .pairs
                .iter()
                .filter(|(x, _)| w(x))
                .cloned()
                .collect();
            let mass: BigRational = kept.iter().map(|(_, p)| p.clone()).sum();
            if mass.is_zero() {
                return None;
            }
            let pairs = kept
                .into_iter()
                .map(|(x, p)| (x, p / mass.clone()))
                .collect();
            Some((ExactDist { pairs }, mass))
        }
    }

    /// Exact total variation over the union support.
    pub fn tv_exact<T: Ord + Clone>(a: &ExactDist<T>, b: &ExactDist<T>) -> BigRational {
        let mut union: Vec<&T> = a
            .pairs
            .iter()
            .map(|(x, _)| x)
            .chain(b.pairs.iter().map(|(x, _)| x))
            .collect();
        union.sort();
        union.dedup();
        let mut l1 = BigRational::zero();
        for x in union {
            l1 += (a.prob_of(x) - b.prob_of(x)).abs();
        }
        l1 / BigRational::from(BigInt::from(2))
    }

    /// Exact event supremum, enumerating subsets of the union support.
    pub fn tv_event_supremum_exact<T: Ord + Clone>(
        a: &ExactDist<T>,
        b: &ExactDist<T>,
    ) -> BigRational {
        let mut union: Vec<&T> = a
            .pairs
            .iter()
            .map(|(x, _)| x)
            .chain(b.pairs.iter().map(|(x, _)| x))
            .collect();
        union.sort();
        union.dedup();
        assert!(union.len() <= 20, "event enumeration cap");
        let mut best = BigRational::zero();
        for mask in 0u64..1 << union.len() {
            let mut gap = BigRational::zero();
            for (bit, x) in union.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    gap += a.prob_of(x) - b.prob_of(x);
                }
            }
            if gap.abs() > best {
                best = gap.abs();
            }
        }
        best
    }
}
