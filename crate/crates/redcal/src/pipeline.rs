//! Desk-scale amplification blueprint: direct-product Chernoff arithmetic, an
//! exact binomial hardcore window, a seeded F2-linear condenser, index fixing
//! priced by delta codes, and the cumulative loss ledger that strings the four
//! stages together.
//!
//! The repetition count uses the natural log, `t = ceil(c1 eps^-2 ln N)`: that
//! is the unique base under which the chain
//! `exp(-2 eps^2 t) <= N^(-2 c1)` closes. Bit lengths stay base 2, and both
//! bases are selectable through [`LogBase`] for anyone who wants the other
//! reading.
//!
//! Asymptotic entries (the `o(1)` TV slots, the `N^-c2` advantage target, the
//! condenser's low-degree preservation) are recorded as measured numbers or
//! notes, never asserted; the exact quantities here are the ledger algebra,
//! the Chernoff inequality, window masses, and the meta bit counts.

use serde::Serialize;
use thiserror::Error;

use crate::coding::{meta_overhead, CodingError, MetaRecord};
use crate::lowdeg::{delta_k_exact, LowDegError, ProductProxy};
use crate::measure::{FiniteDistribution, MeasureError};
use crate::rng::SplitMix64;

/// Explicit product distributions cap at this many blocks.
pub const PRODUCT_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("epsilon must lie in (0, 1/2), got {0}")]
    BadEpsilon(f64),
    #[error("instance bitlength must be at least 2, got {0}")]
    BadBitlength(u64),
    #[error("explicit products cap at {PRODUCT_CAP} blocks, got {0}")]
    TooManyBlocks(usize),
    #[error("window has zero mass")]
    EmptyWindow,
    #[error("locality {locality} exceeds input length {len}")]
    BadLocality { locality: usize, len: usize },
    #[error("index record breaks its tight length bound")]
    MetaBound,
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    LowDeg(#[from] LowDegError),
}

/// Base of the `log N` factor in the repetition count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, n: u64) -> f64 {
        match self {
            LogBase::Natural => (n as f64).ln(),
            LogBase::Two => (n as f64).log2(),
        }
    }
}

/// Bits needed to index `0..n`, i.e. `ceil(log2 n)` for `n >= 2`.
pub fn log2_ceil(n: u64) -> u32 {
    assert!(n >= 2);
    u64::BITS - (n - 1).leading_zeros()
}

/// `t = ceil(c1 eps^-2 log N)`; the paired bound
/// `exp(-2 eps^2 t) <= N^(-2 c1)` then holds by construction.
pub fn choose_t_in_base(epsilon: f64, n_bits: u64, c1: f64, base: LogBase) -> u64 {
    assert!(epsilon > 0.0 && epsilon < 0.5, "epsilon in (0, 1/2)");
    assert!(n_bits >= 2, "bitlength at least 2");
    assert!(c1 > 0.0);
    (c1 * epsilon.powi(-2) * base.log(n_bits)).ceil() as u64
}

pub fn choose_t(epsilon: f64, n_bits: u64, c1: f64) -> u64 {
    choose_t_in_base(epsilon, n_bits, c1, LogBase::Natural)
}

/// Chernoff failure bound `exp(-2 eps^2 t)` for a `t`-fold majority.
pub fn amplification_bound(epsilon: f64, t: u64) -> f64 {
    (-2.0 * epsilon * epsilon * t as f64).exp()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmplificationPlan {
    pub epsilon: f64,
    pub n_bits: u64,
    pub c1: f64,
    pub t: u64,
}

impl AmplificationPlan {
    pub fn new(epsilon: f64, n_bits: u64, c1: f64, base: LogBase) -> Self {
        Self {
            epsilon,
            n_bits,
            c1,
            t: choose_t_in_base(epsilon, n_bits, c1, base),
        }
    }

    /// `exp(-2 eps^2 t)`.
    pub fn bound(&self) -> f64 {
        amplification_bound(self.epsilon, self.t)
    }

    /// `N^(-2 c1)`, the target the bound is guaranteed to meet.
    pub fn target(&self) -> f64 {
        (self.n_bits as f64).powf(-2.0 * self.c1)
    }
}

// ---------------------------------------------------------------------------
// Majority Monte-Carlo
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MajorityOutcome {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Empirical majority failure rate; this is the quantity the Chernoff
    /// bound `exp(-2 eps^2 t)` controls.
    pub failure_rate: f64,
    /// `success_rate - 1/2`.
    pub advantage: f64,
}

/// Per-trial generator. Trial `i` seeds a fresh stream at
/// `seed XOR (i * 0xBF58476D1CE4E5B9)`; the odd multiplier spreads the trial
/// indices across the state space, so partitioned runs can reproduce any
/// trial in O(1) without correlated streams.
fn trial_rng(seed: u64, trial: u64) -> SplitMix64 {
    SplitMix64::new(seed ^ trial.wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

/// Simulate `trials` independent `t`-fold majorities of Bernoulli(1/2 + eps)
/// correctness indicators. Exact ties (possible only for even `t`) are broken
/// by a fair coin from the same trial stream, which keeps the ideal success
/// probability at `Pr[S > t/2] + Pr[S = t/2]/2 >= 1 - exp(-2 eps^2 t)`.
pub fn majority_experiment(epsilon: f64, t: u64, trials: u64, seed: u64) -> MajorityOutcome {
    assert!((0.0..=0.5).contains(&epsilon));
    assert!(trials >= 1);
    let p = 0.5 + epsilon;
    let mut successes = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut s = 0u64;
        for _ in 0..t {
            if rng.unit_f64() < p {
                s += 1;
            }
        }
        let correct = match (2 * s).cmp(&t) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => rng.bit(),
        };
        if correct {
            successes += 1;
        }
    }
    let success_rate = successes as f64 / trials as f64;
    MajorityOutcome {
        trials,
        successes,
        success_rate,
        failure_rate: 1.0 - success_rate,
        advantage: success_rate - 0.5,
    }
}

/// Three standard deviations of the failure-rate estimator at the analytic
/// rate, plus one count of slack: the margin used when comparing Monte-Carlo
/// output against [`amplification_bound`].
pub fn sampling_margin(bound: f64, trials: u64) -> f64 {
    3.0 * ((bound * (1.0 - bound) / trials as f64).sqrt() + 1.0 / trials as f64)
}

// ---------------------------------------------------------------------------
// Binomial tails
// ---------------------------------------------------------------------------

fn binomial_terms(t: u64, p: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&p));
    if p == 0.0 || p == 1.0 {
        let mut terms = vec![0.0; t as usize + 1];
        terms[if p == 0.0 { 0 } else { t as usize }] = 1.0;
        return terms;
    }
    // Log-space terms: log C(t,i) + i log p + (t-i) log(1-p). The incremental
    // log-binomial never under- or overflows, so this works far past the
    // point where (1-p)^t would vanish in plain f64.
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_c = 0.0f64;
    (0..=t)
        .map(|i| {
            let term = (log_c + i as f64 * lp + (t - i) as f64 * lq).exp();
            log_c += ((t - i) as f64).ln() - ((i + 1) as f64).ln();
            term
        })
        .collect()
}

/// `Pr[Binomial(t, p) >= threshold]`, summed small-to-large.
pub fn binomial_tail_ge(t: u64, p: f64, threshold: u64) -> f64 {
    if threshold > t {
        return 0.0;
    }
    let terms = binomial_terms(t, p);
    let mut tail: Vec<f64> = terms[threshold as usize..].to_vec();
    tail.sort_by(|a, b| a.total_cmp(b));
    tail.iter().sum::<f64>().min(1.0)
}

/// `Pr[Binomial(t, p) <= threshold]`.
pub fn binomial_tail_le(t: u64, p: f64, threshold: u64) -> f64 {
    let terms = binomial_terms(t, p);
    let mut head: Vec<f64> = terms[..=(threshold.min(t)) as usize].to_vec();
    head.sort_by(|a, b| a.total_cmp(b));
    head.iter().sum::<f64>().min(1.0)
}

/// Explicit product of `t` Bernoulli(p) blocks as a distribution over bit
/// masks; desk scale only (`t <= 20`).
pub fn bernoulli_product(t: usize, p: f64) -> Result<FiniteDistribution<u64>, PipelineError> {
    if t > PRODUCT_CAP {
        return Err(PipelineError::TooManyBlocks(t));
    }
    assert!((0.0..=1.0).contains(&p));
    let pairs: Vec<(u64, f64)> = (0..1u64 << t)
        .map(|x| {
            let ones = x.count_ones() as i32;
            (x, p.powi(ones) * (1.0 - p).powi(t as i32 - ones))
        })
        .collect();
    Ok(FiniteDistribution::from_pairs(pairs)?)
}

// ---------------------------------------------------------------------------
// Hardcore window
// ---------------------------------------------------------------------------

/// Complement of the majority-failure tail: the event
/// `popcount(x) >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HardcoreWindow {
    pub t: usize,
    pub threshold: usize,
}

impl HardcoreWindow {
    pub fn contains(&self, x: u64) -> bool {
        (x.count_ones() as usize) >= self.threshold
    }
}

/// Window predicate and its exact mass under the given product distribution.
pub fn toy_hardcore_select(
    dist: &FiniteDistribution<u64>,
    t: usize,
    threshold: usize,
) -> Result<(HardcoreWindow, f64), PipelineError> {
    if t > PRODUCT_CAP {
        return Err(PipelineError::TooManyBlocks(t));
    }
    let window = HardcoreWindow { t, threshold };
    let mass = dist.mass_where(|&x| window.contains(x));
    if mass <= 0.0 {
        return Err(PipelineError::EmptyWindow);
    }
    Ok((window, mass))
}

// ---------------------------------------------------------------------------
// Seeded condenser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CondenseParams {
    /// Ambient instance bitlength N; the seed indexes `ceil(log2 N)` bits.
    pub n_bits: u64,
    /// Polylog exponent: the output stretches by `ceil(log2 N)^a`.
    pub a: u32,
    /// Distinct input taps per output bit.
    pub locality: usize,
}

impl CondenseParams {
    pub fn stretch(&self) -> u64 {
        (log2_ceil(self.n_bits) as u64).pow(self.a)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        input_len * self.stretch() as usize
    }

    /// Seed length in bits, `s = ceil(log2 N)`.
    pub fn seed_bits(&self) -> u32 {
        log2_ceil(self.n_bits)
    }
}

/// Seeded F2-linear map: output `j` is the XOR of `locality` distinct input
/// positions drawn from the seed stream. Deterministic in `(x, seed)`, and
/// linear: `T(x XOR y) = T(x) XOR T(y)`, so `T(0) = 0`.
pub fn toy_condense(
    x: &[bool],
    seed: u64,
    params: &CondenseParams,
) -> Result<Vec<bool>, PipelineError> {
    let taps = condenser_taps(x.len(), seed, params)?;
    Ok(taps
        .iter()
        .map(|tap| tap.iter().fold(false, |acc, &i| acc ^ x[i]))
        .collect())
}

/// The tap positions for each output bit, fixed by `(input_len, seed)`.
fn condenser_taps(
    input_len: usize,
    seed: u64,
    params: &CondenseParams,
) -> Result<Vec<Vec<usize>>, PipelineError> {
    if params.locality > input_len || params.locality == 0 {
        return Err(PipelineError::BadLocality {
            locality: params.locality,
            len: input_len,
        });
    }
    let mut rng = SplitMix64::new(seed);
    let out_len = params.output_len(input_len);
    let mut taps = Vec::with_capacity(out_len);
    for _ in 0..out_len {
        let mut chosen: Vec<usize> = Vec::with_capacity(params.locality);
        while chosen.len() < params.locality {
            let i = rng.below(input_len as u64) as usize;
            if !chosen.contains(&i) {
                chosen.push(i);
            }
        }
        chosen.sort_unstable();
        taps.push(chosen);
    }
    Ok(taps)
}

fn mask_to_bits(x: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| x >> i & 1 == 1).collect()
}

fn bits_to_mask(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |m, (i, &b)| m | (u64::from(b) << i))
}

#[derive(Debug, Clone, Serialize)]
pub struct CondensationReport {
    pub input_bits: usize,
    pub output_bits: usize,
    pub k: usize,
    pub seeds: u64,
    /// Mean over seeds of `Delta_k(C_seed # mu, C_seed # u)`. Measured only;
    /// no vanishing rate is asserted at this scale.
    pub mean_delta: f64,
    pub max_delta: f64,
}

/// Push `mu` through the condenser for `seeds` consecutive seeds and measure
/// the exact low-degree discrepancy of each image pair against the uniform
/// image. Desk scale: the output side must stay within the LP cap.
pub fn condensation_report(
    mu: &FiniteDistribution<u64>,
    input_bits: usize,
    params: &CondenseParams,
    k: usize,
    seeds: u64,
    seed0: u64,
) -> Result<CondensationReport, PipelineError> {
    let out_bits = params.output_len(input_bits);
    let out_proxy = ProductProxy::unbiased(out_bits);
    let u_in = ProductProxy::unbiased(input_bits).as_distribution()?;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for s in 0..seeds {
        let seed = seed0.wrapping_add(s);
        let taps = condenser_taps(input_bits, seed, params)?;
        let push = |&x: &u64| {
            let bits = mask_to_bits(x, input_bits);
            let image: Vec<bool> = taps
                .iter()
                .map(|tap| tap.iter().fold(false, |acc, &i| acc ^ bits[i]))
                .collect();
            bits_to_mask(&image)
        };
        let d = delta_k_exact(&mu.pushforward(push), &u_in.pushforward(push), &out_proxy, k)?;
        sum += d;
        max = max.max(d);
    }
    Ok(CondensationReport {
        input_bits,
        output_bits: out_bits,
        k,
        seeds,
        mean_delta: sum / seeds as f64,
        max_delta: max,
    })
}

// ---------------------------------------------------------------------------
// Loss ledger
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub label: String,
    pub tv_loss: f64,
    pub size_factor: f64,
    pub meta_bits: u64,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LossLedger {
    pub rows: Vec<LedgerRow>,
}

impl LossLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        label: impl Into<String>,
        tv_loss: f64,
        size_factor: f64,
        meta_bits: u64,
        note: impl Into<String>,
    ) {
        self.rows.push(LedgerRow {
            label: label.into(),
            tv_loss,
            size_factor,
            meta_bits,
            note: note.into(),
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerTotals {
    pub tv_total: f64,
    pub size_total: f64,
    pub meta_total: u64,
}

/// Fold the ledger: TV adds, size multiplies, meta bits add. An empty ledger
/// totals to `(0, 1, 0)`.
pub fn ledger_summary(ledger: &LossLedger) -> LedgerTotals {
    let mut totals = LedgerTotals {
        tv_total: 0.0,
        size_total: 1.0,
        meta_total: 0,
    };
    for row in &ledger.rows {
        totals.tv_total += row.tv_loss;
        totals.size_total *= row.size_factor;
        totals.meta_total += row.meta_bits;
    }
    totals
}

/// Append the parameter-fixing row: TV 0, size 1, meta = the exact delta-coded
/// cost of the recorded index values at ambient parameter `N`. Fails if any
/// field overruns its declared range or its tight length bound.
pub fn fix_indices(
    mut ledger: LossLedger,
    indices: &MetaRecord,
    n_bits: u64,
) -> Result<LossLedger, PipelineError> {
    let oh = meta_overhead(indices, n_bits)?;
    if !oh.bound_ok {
        return Err(PipelineError::MetaBound);
    }
    let fields: Vec<String> = indices
        .fields
        .iter()
        .map(|f| format!("{}={}", f.name, f.value))
        .collect();
    ledger.push(
        "E4 (Parameter fixing)",
        0.0,
        1.0,
        oh.total_bits,
        format!(
            "fixed indices [{}], prefix-free ({} payload + {} tag bits)",
            fields.join(", "),
            oh.payload_bits,
            oh.tag_bits
        ),
    );
    Ok(ledger)
}

// ---------------------------------------------------------------------------
// Canonical blueprint
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlueprintParams {
    pub epsilon: f64,
    pub n_bits: u64,
    pub c1: f64,
    /// Window-mass target; recorded in the E2 note, never asserted.
    pub c2: f64,
    /// Condensation polylog exponent.
    pub a: u32,
    pub locality: usize,
    pub seed: u64,
    /// Prepend the XOR-to-SAT arrow (TV 0, size x4) to the ledger.
    pub with_xor_arrow: bool,
    pub log_base: LogBase,
}

impl Default for BlueprintParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            n_bits: 1024,
            c1: 1.0,
            c2: 0.25,
            a: 1,
            locality: 3,
            seed: 20250918,
            with_xor_arrow: false,
            log_base: LogBase::Natural,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlueprintReport {
    pub plan: AmplificationPlan,
    /// Repetitions actually expanded for the explicit window (capped).
    pub desk_t: usize,
    pub window: HardcoreWindow,
    pub window_mass: f64,
    pub condense_stretch: u64,
    pub ledger: LossLedger,
    pub totals: LedgerTotals,
}

/// Run the canonical four-stage sequence and account every loss.
///
/// E1 multiplies size by `t` and loses no mass; E2 conditions on the exact
/// binomial window (its mass deficit is the TV entry); E3 stretches by the
/// polylog factor with a seeded linear map; E4 records the fixed indices
/// (amplification schedule, window threshold, condenser seed index) as one
/// prefix-free record, the only meta cost in the run.
pub fn run_blueprint(params: &BlueprintParams) -> Result<BlueprintReport, PipelineError> {
    if !(params.epsilon > 0.0 && params.epsilon < 0.5) {
        return Err(PipelineError::BadEpsilon(params.epsilon));
    }
    if params.n_bits < 16 {
        return Err(PipelineError::BadBitlength(params.n_bits));
    }
    let plan = AmplificationPlan::new(params.epsilon, params.n_bits, params.c1, params.log_base);
    let mut ledger = LossLedger::new();
    if params.with_xor_arrow {
        ledger.push(
            "R_xor->sat",
            0.0,
            4.0,
            0,
            "injective clause-block translation, no new variables",
        );
    }

    ledger.push(
        "E1 (Direct product)",
        0.0,
        plan.t as f64,
        0,
        format!(
            "t = {}, failure bound {:.3e} <= target {:.3e}",
            plan.t,
            plan.bound(),
            plan.target()
        ),
    );

    // Desk-scale window: expand at most 16 explicit blocks.
    let desk_t = (plan.t as usize).min(16);
    let product = bernoulli_product(desk_t, 0.5 + params.epsilon)?;
    let threshold = desk_t.div_ceil(2);
    let (window, mass) = toy_hardcore_select(&product, desk_t, threshold)?;
    ledger.push(
        "E2 (Hardcore)",
        1.0 - mass,
        1.0,
        0,
        format!(
            "window mass {:.6} at {} of {} blocks (target >= c2 = {}); advantage target N^-c2 recorded, not asserted",
            mass, threshold, desk_t, params.c2
        ),
    );

    let condense = CondenseParams {
        n_bits: params.n_bits,
        a: params.a,
        locality: params.locality,
    };
    ledger.push(
        "E3 (Condensation)",
        0.0,
        condense.stretch() as f64,
        0,
        format!(
            "seeded F2-linear map, locality {}, seed length {} bits (seed index fixed at E4)",
            params.locality,
            condense.seed_bits()
        ),
    );

    // Lexicographic-first selection: the first schedule and seed index, the
    // window threshold actually used.
    let indices = MetaRecord::new(vec![
        crate::coding::MetaField::new("schedule", 1, 1.0),
        crate::coding::MetaField::new("selector", threshold as u64, 1.0),
        crate::coding::MetaField::new("seed", 1, 1.0),
    ]);
    let ledger = fix_indices(ledger, &indices, params.n_bits)?;
    let totals = ledger_summary(&ledger);
    Ok(BlueprintReport {
        plan,
        desk_t,
        window,
        window_mass: mass,
        condense_stretch: condense.stretch(),
        ledger,
        totals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{delta_len, MetaField};
    use proptest::prelude::*;

    #[test]
    fn choose_t_pins() {
        assert_eq!(choose_t(0.1, 1024, 1.0), 694);
        assert_eq!(choose_t_in_base(0.1, 1024, 1.0, LogBase::Two), 1000);
        // eps -> 1/2 from below: t = ceil(4 c1 ln N).
        assert_eq!(choose_t(0.4999999, 1024, 1.0), 28);
        assert_eq!((4.0 * 1024f64.ln()).ceil() as u64, 28);
    }

    #[test]
    fn amplification_bound_pins() {
        assert_eq!(amplification_bound(0.3, 0), 1.0);
        assert!((amplification_bound(0.5, 2) - (-1.0f64).exp()).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for t in 0..50 {
            let b = amplification_bound(0.2, t);
            assert!(b < prev || t == 0);
            prev = b;
        }
    }

    #[test]
    fn chernoff_identity_grid() {
        for &eps in &[0.05, 0.1, 0.2, 0.3, 0.45] {
            for &n in &[16u64, 64, 1024, 1 << 20] {
                for &c1 in &[0.5, 1.0, 2.0] {
                    let t = choose_t(eps, n, c1);
                    let bound = amplification_bound(eps, t);
                    let target = (n as f64).powf(-2.0 * c1);
                    assert!(
                        bound <= target * (1.0 + 1e-12),
                        "eps={eps} n={n} c1={c1}: {bound} > {target}"
                    );
                }
            }
        }
    }

    #[test]
    fn majority_extremes() {
        // Deterministic coordinates: always correct.
        let out = majority_experiment(0.5, 7, 100, 1);
        assert_eq!(out.successes, 100);
        assert_eq!(out.advantage, 0.5);
        assert_eq!(out.failure_rate, 0.0);
        // No signal: advantage is sampling noise around 0 (3 sigma at 4000
        // trials is about 0.024).
        let out = majority_experiment(0.0, 10, 4000, 20250918);
        assert!(out.advantage.abs() < 0.024, "advantage {}", out.advantage);
        assert!((out.success_rate + out.failure_rate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn majority_below_bound_modest_scale() {
        let (eps, t, trials) = (0.3f64, 50u64, 2000u64);
        let out = majority_experiment(eps, t, trials, 20250918);
        let bound = amplification_bound(eps, t);
        assert!(
            out.failure_rate <= bound + sampling_margin(bound, trials),
            "failure rate {} vs bound {}",
            out.failure_rate,
            bound
        );
    }

    #[test]
    fn trial_streams_are_partitionable() {
        // Running trials [0, 40) equals running [0, 20) and [20, 40) with the
        // same seed: each trial is self-seeded.
        let full = majority_experiment(0.1, 9, 40, 7);
        let mut successes = 0;
        for trial in 0..40u64 {
            let mut rng = trial_rng(7, trial);
            let mut s = 0;
            for _ in 0..9 {
                if rng.unit_f64() < 0.6 {
                    s += 1;
                }
            }
            if 2 * s > 9 {
                successes += 1;
            }
        }
        assert_eq!(successes, full.successes);
    }

    #[test]
    fn binomial_tail_pins() {
        // t=10, p=1/2, thr=5: (252+210+120+45+10+1)/1024.
        assert!((binomial_tail_ge(10, 0.5, 5) - 638.0 / 1024.0).abs() < 1e-12);
        assert!((binomial_tail_le(10, 0.5, 4) - 386.0 / 1024.0).abs() < 1e-12);
        assert_eq!(binomial_tail_ge(10, 0.5, 11), 0.0);
        assert_eq!(binomial_tail_ge(10, 0.5, 0), 1.0);
        assert_eq!(binomial_tail_ge(5, 1.0, 5), 1.0);
        assert_eq!(binomial_tail_ge(5, 0.0, 1), 0.0);
        // ge + le partition the mass.
        for thr in 0..=10u64 {
            let s = binomial_tail_ge(10, 0.37, thr + 1) + binomial_tail_le(10, 0.37, thr);
            assert!((s - 1.0).abs() < 1e-12);
        }
        // Far past the plain-f64 underflow point for (1-p)^t.
        let far = binomial_tail_ge(694, 0.7, 347);
        assert!(far > 0.9999 && far <= 1.0);
    }

    #[test]
    fn bernoulli_product_matches_binomial() {
        let dist = bernoulli_product(12, 0.6).unwrap();
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for thr in 0..=12u64 {
            let direct = dist.mass_where(|&x| x.count_ones() as u64 >= thr);
            let tail = binomial_tail_ge(12, 0.6, thr);
            assert!((direct - tail).abs() < 1e-12, "thr={thr}");
        }
        assert!(matches!(
            bernoulli_product(21, 0.5),
            Err(PipelineError::TooManyBlocks(21))
        ));
    }

    #[test]
    fn hardcore_window_pins() {
        // Deterministic blocks: the window is everything.
        let sure = bernoulli_product(8, 1.0).unwrap();
        let (w, mass) = toy_hardcore_select(&sure, 8, 4).unwrap();
        assert!(w.contains(0xff) && !w.contains(0b111));
        assert_eq!(mass, 1.0);
        // Threshold 0 never excludes anything.
        let dist = bernoulli_product(6, 0.55).unwrap();
        let (_, mass) = toy_hardcore_select(&dist, 6, 0).unwrap();
        assert!((mass - 1.0).abs() < 1e-12);
        // Exact binomial cross-check.
        let (_, mass) = toy_hardcore_select(&dist, 6, 4).unwrap();
        assert!((mass - binomial_tail_ge(6, 0.55, 4)).abs() < 1e-12);
        // Unreachable threshold: zero mass.
        assert!(matches!(
            toy_hardcore_select(&dist, 6, 7),
            Err(PipelineError::EmptyWindow)
        ));
    }

    #[test]
    fn condenser_is_linear_and_local() {
        let params = CondenseParams {
            n_bits: 1024,
            a: 1,
            locality: 3,
        };
        assert_eq!(params.stretch(), 10);
        assert_eq!(params.seed_bits(), 10);
        let n = 8;
        let zero = toy_condense(&vec![false; n], 5, &params).unwrap();
        assert_eq!(zero.len(), 80);
        assert!(zero.iter().all(|&b| !b));
        let mut rng = SplitMix64::new(99);
        for _ in 0..20 {
            let x: Vec<bool> = (0..n).map(|_| rng.bit()).collect();
            let y: Vec<bool> = (0..n).map(|_| rng.bit()).collect();
            let xy: Vec<bool> = x.iter().zip(&y).map(|(&a, &b)| a ^ b).collect();
            let tx = toy_condense(&x, 5, &params).unwrap();
            let ty = toy_condense(&y, 5, &params).unwrap();
            let txy = toy_condense(&xy, 5, &params).unwrap();
            let sum: Vec<bool> = tx.iter().zip(&ty).map(|(&a, &b)| a ^ b).collect();
            assert_eq!(txy, sum);
            // Determinism.
            assert_eq!(tx, toy_condense(&x, 5, &params).unwrap());
        }
        // Each output reads exactly `locality` inputs: probe unit vectors.
        let mut dependency_counts = vec![0usize; 80];
        for i in 0..n {
            let mut unit = vec![false; n];
            unit[i] = true;
            for (j, &bit) in toy_condense(&unit, 5, &params).unwrap().iter().enumerate() {
                dependency_counts[j] += usize::from(bit);
            }
        }
        assert!(dependency_counts.iter().all(|&c| c == 3));
        assert!(matches!(
            toy_condense(&[true, false], 5, &params),
            Err(PipelineError::BadLocality { locality: 3, len: 2 })
        ));
    }

    #[test]
    fn condensation_measurement_runs() {
        // Small ambient parameter keeps the output inside the LP cap:
        // N=4 -> stretch 2, 5 inputs -> 10 outputs.
        let params = CondenseParams {
            n_bits: 4,
            a: 1,
            locality: 2,
        };
        let mut rng = SplitMix64::new(3);
        let pairs: Vec<(u64, f64)> = (0..8u64).map(|x| (x * 3 % 32, rng.unit_f64())).collect();
        let total: f64 = pairs.iter().map(|(_, p)| p).sum();
        let mu = FiniteDistribution::from_pairs(
            pairs.into_iter().map(|(x, p)| (x, p / total)).collect(),
        )
        .unwrap();
        let report = condensation_report(&mu, 5, &params, 2, 3, 100).unwrap();
        assert_eq!(report.output_bits, 10);
        assert!(report.mean_delta.is_finite());
        assert!(report.mean_delta >= 0.0 && report.mean_delta <= 2.0);
        assert!(report.max_delta >= report.mean_delta - 1e-12);
    }

    #[test]
    fn ledger_algebra() {
        let empty = ledger_summary(&LossLedger::new());
        assert_eq!(
            empty,
            LedgerTotals {
                tv_total: 0.0,
                size_total: 1.0,
                meta_total: 0
            }
        );
        let mut ledger = LossLedger::new();
        ledger.push("a", 0.125, 3.0, 7, "");
        ledger.push("b", 0.25, 0.5, 9, "");
        ledger.push("c", 0.0, 4.0, 0, "");
        let totals = ledger_summary(&ledger);
        assert!((totals.tv_total - 0.375).abs() < 1e-15);
        assert!((totals.size_total - 6.0).abs() < 1e-15);
        assert_eq!(totals.meta_total, 16);
        // Reordering commuting rows leaves the totals alone.
        let mut reordered = LossLedger::new();
        for i in [2, 0, 1] {
            reordered.rows.push(ledger.rows[i].clone());
        }
        assert_eq!(ledger_summary(&reordered), totals);
    }

    #[test]
    fn fix_indices_pins() {
        // Empty record: just the count prefix delta(1) = "1".
        let ledger = fix_indices(LossLedger::new(), &MetaRecord::new(vec![]), 1024).unwrap();
        let row = &ledger.rows[0];
        assert_eq!(row.label, "E4 (Parameter fixing)");
        assert_eq!((row.tv_loss, row.size_factor), (0.0, 1.0));
        assert_eq!(row.meta_bits, 1);
        // One seed index <= N: meta stays within the tight per-field bound,
        // which is below 2 log2 N + small.
        let record = MetaRecord::new(vec![MetaField::new("seed", 700, 1.0)]);
        let ledger = fix_indices(LossLedger::new(), &record, 1024).unwrap();
        let expect = delta_len(2) + 1 + delta_len(700);
        assert_eq!(ledger.rows[0].meta_bits, expect);
        assert!((ledger.rows[0].meta_bits as f64) <= 2.0 * 1024f64.log2() + 5.0);
        // Range violations surface as coding errors.
        let record = MetaRecord::new(vec![MetaField::new("seed", 4000, 1.0)]);
        assert!(matches!(
            fix_indices(LossLedger::new(), &record, 1024),
            Err(PipelineError::Coding(_))
        ));
    }

    #[test]
    fn blueprint_canonical_run() {
        let report = run_blueprint(&BlueprintParams::default()).unwrap();
        assert_eq!(report.plan.t, 694);
        let labels: Vec<&str> = report.ledger.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "E1 (Direct product)",
                "E2 (Hardcore)",
                "E3 (Condensation)",
                "E4 (Parameter fixing)"
            ]
        );
        // Size total: t times the polylog stretch (E2 contributes exactly 1).
        assert!((report.totals.size_total - 694.0 * 10.0).abs() < 1e-9);
        // Meta: the E4 record alone, priced exactly.
        let expect = delta_len(4) + (1 + delta_len(1)) + (1 + delta_len(8)) + (1 + delta_len(1));
        assert_eq!(report.totals.meta_total, expect);
        assert_eq!(report.desk_t, 16);
        assert_eq!(report.window.threshold, 8);
        assert!((report.window_mass - binomial_tail_ge(16, 0.6, 8)).abs() < 1e-12);
        assert!((report.totals.tv_total - (1.0 - report.window_mass)).abs() < 1e-12);
        // The Chernoff chain holds on the plan.
        assert!(report.plan.bound() <= report.plan.target() * (1.0 + 1e-12));
    }

    #[test]
    fn blueprint_with_xor_arrow() {
        let params = BlueprintParams {
            with_xor_arrow: true,
            ..BlueprintParams::default()
        };
        let report = run_blueprint(&params).unwrap();
        assert_eq!(report.ledger.rows.len(), 5);
        let first = &report.ledger.rows[0];
        assert_eq!(first.label, "R_xor->sat");
        assert_eq!((first.tv_loss, first.size_factor, first.meta_bits), (0.0, 4.0, 0));
        let plain = run_blueprint(&BlueprintParams::default()).unwrap();
        assert!((report.totals.size_total - 4.0 * plain.totals.size_total).abs() < 1e-9);
        assert!((report.totals.tv_total - plain.totals.tv_total).abs() < 1e-15);
    }

    #[test]
    fn blueprint_rejects_bad_parameters() {
        let bad_eps = BlueprintParams {
            epsilon: 0.5,
            ..BlueprintParams::default()
        };
        assert!(matches!(
            run_blueprint(&bad_eps),
            Err(PipelineError::BadEpsilon(_))
        ));
        let bad_n = BlueprintParams {
            n_bits: 8,
            ..BlueprintParams::default()
        };
        assert!(matches!(
            run_blueprint(&bad_n),
            Err(PipelineError::BadBitlength(8))
        ));
    }

    proptest! {
        #[test]
        fn prop_chernoff_identity(
            eps in 0.01f64..0.49,
            n in 2u64..1_000_000,
            c1 in 0.1f64..4.0,
        ) {
            let t = choose_t(eps, n, c1);
            let bound = amplification_bound(eps, t);
            prop_assert!(bound <= (n as f64).powf(-2.0 * c1) * (1.0 + 1e-12));
        }

        #[test]
        fn prop_ledger_totals_are_algebraic(
            tvs in proptest::collection::vec(0.0f64..0.5, 0..6),
            sizes in proptest::collection::vec(0.25f64..8.0, 0..6),
            metas in proptest::collection::vec(0u64..64, 0..6),
        ) {
            let mut ledger = LossLedger::new();
            let rows = tvs.len().min(sizes.len()).min(metas.len());
            for i in 0..rows {
                ledger.push(format!("row{i}"), tvs[i], sizes[i], metas[i], "");
            }
            let totals = ledger_summary(&ledger);
            let tv: f64 = tvs[..rows].iter().sum();
            let size: f64 = sizes[..rows].iter().product();
            let meta: u64 = metas[..rows].iter().sum();
            prop_assert!((totals.tv_total - tv).abs() < 1e-9);
            prop_assert!((totals.size_total - size).abs() < 1e-9 * size.max(1.0));
            prop_assert_eq!(totals.meta_total, meta);
        }

        #[test]
        fn prop_condenser_linearity(
            seed in any::<u64>(),
            x in proptest::collection::vec(any::<bool>(), 6),
            y in proptest::collection::vec(any::<bool>(), 6),
        ) {
            let params = CondenseParams { n_bits: 16, a: 1, locality: 2 };
            let xy: Vec<bool> = x.iter().zip(&y).map(|(&a, &b)| a ^ b).collect();
            let lhs = toy_condense(&xy, seed, &params).unwrap();
            let tx = toy_condense(&x, seed, &params).unwrap();
            let ty = toy_condense(&y, seed, &params).unwrap();
            let rhs: Vec<bool> = tx.iter().zip(&ty).map(|(&a, &b)| a ^ b).collect();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
