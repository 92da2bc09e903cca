//! Biased Walsh analysis over product proxies.
//!
//! A [`ProductProxy`] carries per-coordinate biases inside a window
//! `[alpha, 1-alpha]`. Characters `chi_S` are products of centered,
//! variance-normalized coordinates and form an orthonormal system in
//! `L^2(u)`. On top of that basis the module provides the exact low-degree
//! discrepancy `Delta_k` (an LP over the full cube), the spectral proxy,
//! the noise operator, pseudoexpectation evaluation, and the
//! dichotomy-constant arithmetic used by the reports.
//!
//! Polynomials and spectra serialize as `S-as-bitmask coefficient` lines,
//! with the subset mask in hex.
//!
//! Everything here is exhaustive over `{0,1}^n` and deliberately capped:
//! [`EXHAUSTIVE_CAP`] for sweeps, [`LP_CAP`] for the discrepancy LP.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;
use thiserror::Error;

use crate::measure::FiniteDistribution;

pub const EXHAUSTIVE_CAP: usize = 14;
pub const LP_CAP: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum LowDegError {
    #[error("alpha {alpha} outside (0, 1/2)")]
    BadAlpha { alpha: f64 },
    #[error("bias {p} at coordinate {index} outside [{alpha}, {}]", 1.0 - alpha)]
    BiasOutOfWindow { index: usize, p: f64, alpha: f64 },
    #[error("n = {n} exceeds cap {cap} for exhaustive work")]
    CapExceeded { n: usize, cap: usize },
    #[error("degree {degree} exceeds bound {bound}")]
    DegreeTooHigh { degree: usize, bound: usize },
    #[error("subset mask {mask:#x} does not fit n = {n} coordinates")]
    MaskOutOfRange { mask: u64, n: usize },
    #[error("polynomial is not homogeneous of degree {expected}: subset {mask:#x}")]
    NotHomogeneous { expected: usize, mask: u64 },
    #[error("zero polynomial has no norm ratio")]
    ZeroPolynomial,
    #[error("zero variance leaves the correlation undefined")]
    ZeroVariance,
    #[error("lp solver: {0}")]
    Lp(String),
    #[error("line {line}: {msg}")]
    BadText { line: usize, msg: String },
}

/// Product measure on `{0,1}^n` with biases `p_i = Pr[x_i = 1]` kept inside
/// the window `[alpha, 1-alpha]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductProxy {
    biases: Vec<f64>,
    alpha: f64,
}

impl ProductProxy {
    pub fn new(biases: Vec<f64>, alpha: f64) -> Result<Self, LowDegError> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(LowDegError::BadAlpha { alpha });
        }
        for (index, &p) in biases.iter().enumerate() {
            if !(p >= alpha && p <= 1.0 - alpha) {
                return Err(LowDegError::BiasOutOfWindow { index, p, alpha });
            }
        }
        Ok(Self { biases, alpha })
    }

    /// All biases 1/2, window floor 1/4.
    pub fn unbiased(n: usize) -> Self {
        Self {
            biases: vec![0.5; n],
            alpha: 0.25,
        }
    }

    pub fn n(&self) -> usize {
        self.biases.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.biases[i]
    }

    /// Standard deviation of coordinate `i`.
    pub fn sigma(&self, i: usize) -> f64 {
        (self.biases[i] * (1.0 - self.biases[i])).sqrt()
    }

    /// Probability of a full assignment, coordinates independent.
    pub fn prob_of_mask(&self, x: u64) -> f64 {
        let mut p = 1.0;
        for (i, &b) in self.biases.iter().enumerate() {
            p *= if x >> i & 1 == 1 { b } else { 1.0 - b };
        }
        p
    }

    /// The proxy as an explicit distribution over all `2^n` masks.
    pub fn as_distribution(&self) -> Result<FiniteDistribution<u64>, LowDegError> {
        let n = self.n();
        if n > EXHAUSTIVE_CAP {
            return Err(LowDegError::CapExceeded {
                n,
                cap: EXHAUSTIVE_CAP,
            });
        }
        let pairs = (0..1u64 << n).map(|x| (x, self.prob_of_mask(x))).collect();
        Ok(FiniteDistribution::from_pairs(pairs).expect("product masses sum to 1"))
    }
}

/// `chi_S(x)`: product over `i in S` of `(x_i - p_i)/sigma_i`; `chi_[] = 1`.
pub fn chi_eval(s: u64, x: u64, proxy: &ProductProxy) -> f64 {
    let mut v = 1.0;
    let mut rest = s;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let xi = (x >> i & 1) as f64;
        v *= (xi - proxy.bias(i)) / proxy.sigma(i);
    }
    v
}

/// `E_u[chi_S]` via per-coordinate factorization: each factor is the centered
/// first moment `(E_u[x_i] - p_i)/sigma_i`, so the product is 1 for the empty
/// set and exactly 0 otherwise.
fn proxy_char_moment(s: u64, proxy: &ProductProxy) -> f64 {
    let mut v = 1.0;
    let mut rest = s;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let first_moment = proxy.bias(i);
        v *= (first_moment - proxy.bias(i)) / proxy.sigma(i);
    }
    v
}

/// All subset masks of `[n]` with at most `k` elements, ascending.
pub fn subsets_up_to(n: usize, k: usize) -> Vec<u64> {
    (0..1u64 << n)
        .filter(|s| (s.count_ones() as usize) <= k)
        .collect()
}

/// Real polynomial in the chi basis with an explicit degree bound.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshPolynomial {
    degree_bound: usize,
    coeffs: BTreeMap<u64, f64>,
}

impl WalshPolynomial {
    pub fn new(coeffs: BTreeMap<u64, f64>, degree_bound: usize) -> Result<Self, LowDegError> {
        for &s in coeffs.keys() {
            let d = s.count_ones() as usize;
            if d > degree_bound {
                return Err(LowDegError::DegreeTooHigh {
                    degree: d,
                    bound: degree_bound,
                });
            }
        }
        let coeffs = coeffs.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Ok(Self {
            degree_bound,
            coeffs,
        })
    }

    pub fn zero(degree_bound: usize) -> Self {
        Self {
            degree_bound,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert(0, c);
        }
        Self {
            degree_bound: 0,
            coeffs,
        }
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Largest `|S|` carrying a nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn coeff(&self, s: u64) -> f64 {
        self.coeffs.get(&s).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, f64> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: u64, proxy: &ProductProxy) -> f64 {
        self.coeffs
            .iter()
            .map(|(&s, &c)| c * chi_eval(s, x, proxy))
            .sum()
    }

    /// Exhaustive max of `|p(x)|` over the cube.
    pub fn sup_norm(&self, proxy: &ProductProxy) -> f64 {
        let n = proxy.n();
        assert!(n <= EXHAUSTIVE_CAP, "sup_norm is exhaustive");
        (0..1u64 << n)
            .map(|x| self.eval(x, proxy).abs())
            .fold(0.0, f64::max)
    }

    /// `sqrt(sum of squared coefficients)`; equals the `L^2(u)` norm by
    /// orthonormality of the basis.
    pub fn norm2_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `sqrt(E_u[p^2])` computed exhaustively (the slow side of Parseval).
    pub fn norm2_u(&self, proxy: &ProductProxy) -> f64 {
        let n = proxy.n();
        assert!(n <= EXHAUSTIVE_CAP, "norm2_u is exhaustive");
        (0..1u64 << n)
            .map(|x| {
                let v = self.eval(x, proxy);
                proxy.prob_of_mask(x) * v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&s, &c)| (s, c * factor))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        Self {
            degree_bound: self.degree_bound,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&s, &c) in &other.coeffs {
            let e = coeffs.entry(s).or_insert(0.0);
            *e -= c;
            if *e == 0.0 {
                coeffs.remove(&s);
            }
        }
        Self {
            degree_bound: self.degree_bound.max(other.degree_bound),
            coeffs,
        }
    }
}

/// Complete table of `Delta_hat(S) = E_mu[chi_S] - E_u[chi_S]` over `|S| <= k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    k: usize,
    entries: BTreeMap<u64, f64>,
}

impl Spectrum {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, s: u64) -> f64 {
        self.entries.get(&s).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> &BTreeMap<u64, f64> {
        &self.entries
    }

    /// `sqrt(sum of squared entries)`.
    pub fn spectral_norm(&self) -> f64 {
        self.entries.values().map(|d| d * d).sum::<f64>().sqrt()
    }
}

fn check_support(mu: &FiniteDistribution<u64>, n: usize) -> Result<(), LowDegError> {
    for &x in mu.support() {
        if n < 64 && x >> n != 0 {
            return Err(LowDegError::MaskOutOfRange { mask: x, n });
        }
    }
    Ok(())
}

/// The low-degree signed spectrum of `mu` against the proxy, exact by
/// enumeration over the support of `mu` and factorization for the proxy side.
pub fn spectrum(
    mu: &FiniteDistribution<u64>,
    proxy: &ProductProxy,
    k: usize,
) -> Result<Spectrum, LowDegError> {
    let n = proxy.n();
    if n > EXHAUSTIVE_CAP {
        return Err(LowDegError::CapExceeded {
            n,
            cap: EXHAUSTIVE_CAP,
        });
    }
    if k > n {
        return Err(LowDegError::DegreeTooHigh {
            degree: k,
            bound: n,
        });
    }
    check_support(mu, n)?;
    let entries = subsets_up_to(n, k)
        .into_iter()
        .map(|s| {
            let mu_side: f64 = mu.iter().map(|(&x, p)| p * chi_eval(s, x, proxy)).sum();
            (s, mu_side - proxy_char_moment(s, proxy))
        })
        .collect();
    Ok(Spectrum { k, entries })
}

/// Exact `Delta_k(mu, u)`: the best advantage `E_mu[p] - E_u[p]` over chi
/// polynomials of degree at most `k` with `|p(x)| <= 1` on the whole cube.
///
/// The LP optimizer is rescaled by `max(1, sup-norm)` before its advantage is
/// reported, so the returned value is always achieved by a certifiably
/// feasible polynomial regardless of solver tolerance.
pub fn delta_k_exact(
    mu: &FiniteDistribution<u64>,
    u: &FiniteDistribution<u64>,
    proxy: &ProductProxy,
    k: usize,
) -> Result<f64, LowDegError> {
    Ok(delta_k_with_witness(mu, u, proxy, k)?.1)
}

/// As [`delta_k_exact`], also returning the rescaled optimizer.
pub fn delta_k_with_witness(
    mu: &FiniteDistribution<u64>,
    u: &FiniteDistribution<u64>,
    proxy: &ProductProxy,
    k: usize,
) -> Result<(WalshPolynomial, f64), LowDegError> {
    let n = proxy.n();
    if n > LP_CAP {
        return Err(LowDegError::CapExceeded { n, cap: LP_CAP });
    }
    if k > n {
        return Err(LowDegError::DegreeTooHigh {
            degree: k,
            bound: n,
        });
    }
    check_support(mu, n)?;
    check_support(u, n)?;

    let subsets = subsets_up_to(n, k);
    let gain: Vec<f64> = subsets
        .iter()
        .map(|&s| {
            let mu_side: f64 = mu.iter().map(|(&x, p)| p * chi_eval(s, x, proxy)).sum();
            let u_side: f64 = u.iter().map(|(&x, p)| p * chi_eval(s, x, proxy)).sum();
            mu_side - u_side
        })
        .collect();

    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = gain
        .iter()
        .map(|&g| problem.add_var(g, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for x in 0..1u64 << n {
        let row: Vec<_> = vars
            .iter()
            .zip(&subsets)
            .map(|(&v, &s)| (v, chi_eval(s, x, proxy)))
            .collect();
        problem.add_constraint(row.clone(), ComparisonOp::Le, 1.0);
        problem.add_constraint(row, ComparisonOp::Ge, -1.0);
    }
    let sol = problem.solve().map_err(|e| LowDegError::Lp(e.to_string()))?;

    let coeffs: BTreeMap<u64, f64> = subsets
        .iter()
        .zip(&vars)
        .map(|(&s, &v)| (s, sol[v]))
        .filter(|(_, c)| *c != 0.0)
        .collect();
    let raw = WalshPolynomial::new(coeffs, k)?;
    let scale = 1.0 / raw.sup_norm(proxy).max(1.0);
    let witness = raw.scale(scale);
    let advantage: f64 = subsets
        .iter()
        .enumerate()
        .map(|(i, &s)| gain[i] * witness.coeff(s))
        .sum();
    Ok((witness, advantage.max(0.0)))
}

/// Sign-pattern witness from a spectrum: `p_0 = sum sgn(Delta_hat(S)) chi_S`,
/// rescaled by its exhaustive sup-norm. Returns the polynomial and its
/// achieved advantage `sum |Delta_hat(S)| / sup`. An all-zero spectrum yields
/// the zero polynomial with advantage 0.
pub fn witness_polynomial(sp: &Spectrum, proxy: &ProductProxy) -> (WalshPolynomial, f64) {
    let signs: BTreeMap<u64, f64> = sp
        .entries
        .iter()
        .filter(|(_, &d)| d != 0.0)
        .map(|(&s, &d)| (s, d.signum()))
        .collect();
    if signs.is_empty() {
        return (WalshPolynomial::zero(sp.k), 0.0);
    }
    let raw = WalshPolynomial::new(signs, sp.k).expect("spectrum respects its own bound");
    // A nonzero combination of orthonormal characters is a nonzero function,
    // so the sup-norm is positive.
    let sup = raw.sup_norm(proxy);
    let witness = raw.scale(1.0 / sup);
    let advantage: f64 = sp.entries.values().map(|d| d.abs()).sum::<f64>() / sup;
    (witness, advantage)
}

/// Noise operator `T_theta`: scales the coefficient at `S` by `theta^|S|`.
pub fn noise_apply(p: &WalshPolynomial, theta: f64) -> WalshPolynomial {
    debug_assert!((0.0..=1.0).contains(&theta));
    let coeffs = p
        .coeffs
        .iter()
        .map(|(&s, &c)| (s, c * theta.powi(s.count_ones() as i32)))
        .filter(|(_, c)| *c != 0.0)
        .collect();
    WalshPolynomial {
        degree_bound: p.degree_bound,
        coeffs,
    }
}

/// Pseudoexpectation of `p` from the proxy's factorized moment table. Each
/// character moment is a product of centered per-coordinate first moments,
/// so the value collapses to the constant coefficient, which is `E_u[p]`.
pub fn pseudoexpectation_eval(
    p: &WalshPolynomial,
    proxy: &ProductProxy,
    k: usize,
) -> Result<f64, LowDegError> {
    let d = p.degree();
    if d > k {
        return Err(LowDegError::DegreeTooHigh {
            degree: d,
            bound: k,
        });
    }
    Ok(p.coeffs
        .iter()
        .map(|(&s, &c)| c * proxy_char_moment(s, proxy))
        .sum())
}

/// `||q||_{4,u} / ||q||_{2,u}` for a homogeneous degree-`d` polynomial,
/// both norms exhaustive. Reported, never asserted against a bound.
pub fn hypercontractivity_ratio(
    q: &WalshPolynomial,
    proxy: &ProductProxy,
    d: usize,
) -> Result<f64, LowDegError> {
    if q.is_zero() {
        return Err(LowDegError::ZeroPolynomial);
    }
    for &s in q.coeffs.keys() {
        if s.count_ones() as usize != d {
            return Err(LowDegError::NotHomogeneous {
                expected: d,
                mask: s,
            });
        }
    }
    let n = proxy.n();
    if n > EXHAUSTIVE_CAP {
        return Err(LowDegError::CapExceeded {
            n,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for x in 0..1u64 << n {
        let v = q.eval(x, proxy);
        let w = proxy.prob_of_mask(x);
        m2 += w * v * v;
        m4 += w * v * v * v * v;
    }
    Ok(m4.powf(0.25) / m2.sqrt())
}

/// Weighted Pearson correlation of two functions under a finite law.
pub fn windowed_correlation<T: Ord + Clone>(
    mut x: impl FnMut(&T) -> f64,
    mut y: impl FnMut(&T) -> f64,
    weights: &FiniteDistribution<T>,
) -> Result<f64, LowDegError> {
    let ex = weights.expect(&mut x);
    let ey = weights.expect(&mut y);
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    let mut cov = 0.0;
    for (t, p) in weights.iter() {
        let dx = x(t) - ex;
        let dy = y(t) - ey;
        var_x += p * dx * dx;
        var_y += p * dy * dy;
        cov += p * dx * dy;
    }
    if var_x <= 1e-30 || var_y <= 1e-30 {
        return Err(LowDegError::ZeroVariance);
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

// ---------------------------------------------------------------------------
// Dichotomy arithmetic
// ---------------------------------------------------------------------------

/// The propagated constant set `(c1, c2, c, eta, zeta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DichotomyConstants {
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    pub eta: f64,
    pub zeta: f64,
}

impl Default for DichotomyConstants {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 0.25,
            c: 0.125,
            eta: 0.125,
            zeta: 1.0 / 16.0,
        }
    }
}

impl DichotomyConstants {
    /// Variant with the steeper degree rate `c = 1/4`.
    pub fn quarter() -> Self {
        Self {
            c: 0.25,
            ..Self::default()
        }
    }
}

/// `k = floor(c * log2 n)`.
pub fn choose_k(n: u64, c: f64) -> usize {
    assert!(n >= 2);
    (c * (n as f64).log2()).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Vanishing,
    Structure,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Vanishing => "vanishing",
            Branch::Structure => "structure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub n: u64,
    pub k: usize,
    pub threshold: f64,
    pub delta_value: f64,
    pub branch: Branch,
    /// `zeta * k`, present only in the structure branch.
    pub degree_bound: Option<f64>,
}

/// Classify a measured discrepancy against the threshold `n^(-eta)` with
/// `k = floor(c * log2 n)`; the threshold itself lands in the structure
/// branch. Pure arithmetic, no claim is verified here.
pub fn dichotomy_report(n: u64, delta_value: f64, constants: &DichotomyConstants) -> DichotomyReport {
    assert!(n >= 2);
    let k = choose_k(n, constants.c);
    let threshold = (n as f64).powf(-constants.eta);
    let structure = delta_value >= threshold;
    DichotomyReport {
        n,
        k,
        threshold,
        delta_value,
        branch: if structure {
            Branch::Structure
        } else {
            Branch::Vanishing
        },
        degree_bound: structure.then_some(constants.zeta * k as f64),
    }
}

/// Structured discrepancy record for reports.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyRecord {
    pub n: usize,
    pub k: usize,
    pub delta_k: f64,
    pub spectral_norm: f64,
    pub threshold: f64,
    pub branch: Branch,
    pub degree_bound: Option<f64>,
}

/// Compute `Delta_k` against the proxy (as explicit distribution), the
/// spectral norm at the same `k`, and the dichotomy classification of the
/// measured value.
pub fn discrepancy_record(
    mu: &FiniteDistribution<u64>,
    proxy: &ProductProxy,
    k: usize,
    constants: &DichotomyConstants,
) -> Result<DiscrepancyRecord, LowDegError> {
    let u = proxy.as_distribution()?;
    let delta_k = delta_k_exact(mu, &u, proxy, k)?;
    let sp = spectrum(mu, proxy, k)?;
    let n = proxy.n();
    let dich = dichotomy_report(n.max(2) as u64, delta_k, constants);
    Ok(DiscrepancyRecord {
        n,
        k,
        delta_k,
        spectral_norm: sp.spectral_norm(),
        threshold: dich.threshold,
        branch: dich.branch,
        degree_bound: dich.degree_bound,
    })
}

// ---------------------------------------------------------------------------
// Monomial basis and conversions
// ---------------------------------------------------------------------------

/// Multilinear real polynomial in the monomial basis `x^m = prod_{i in m} x_i`.
/// Products reduce by idempotence (`x_i^2 = x_i`), which is exact on `{0,1}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonomialPoly {
    coeffs: BTreeMap<u64, f64>,
}

impl MonomialPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert(0, c);
        }
        Self { coeffs }
    }

    pub fn variable(i: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1u64 << i, 1.0);
        Self { coeffs }
    }

    pub fn from_coeffs(coeffs: BTreeMap<u64, f64>) -> Self {
        Self {
            coeffs: coeffs.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    pub fn coeff(&self, m: u64) -> f64 {
        self.coeffs.get(&m).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, f64> {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&m, &c) in &other.coeffs {
            let e = coeffs.entry(m).or_insert(0.0);
            *e += c;
            if *e == 0.0 {
                coeffs.remove(&m);
            }
        }
        Self { coeffs }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&m, &c)| (m, c * factor))
                .filter(|(_, c)| *c != 0.0)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs: BTreeMap<u64, f64> = BTreeMap::new();
        for (&m1, &c1) in &self.coeffs {
            for (&m2, &c2) in &other.coeffs {
                *coeffs.entry(m1 | m2).or_insert(0.0) += c1 * c2;
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn eval_mask(&self, x: u64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&m, _)| x & m == m)
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn sup_norm_cube(&self, n: usize) -> f64 {
        assert!(n <= EXHAUSTIVE_CAP, "sup_norm_cube is exhaustive");
        (0..1u64 << n)
            .map(|x| self.eval_mask(x).abs())
            .fold(0.0, f64::max)
    }

    /// Expand a chi polynomial into monomials: each character is a product of
    /// distinct factors `(x_i - p_i)/sigma_i`.
    pub fn from_walsh(p: &WalshPolynomial, proxy: &ProductProxy) -> Self {
        let mut total = Self::zero();
        for (&s, &c) in p.coeffs() {
            let mut term = Self::constant(c);
            let mut rest = s;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let factor = Self::variable(i)
                    .add(&Self::constant(-proxy.bias(i)))
                    .scale(1.0 / proxy.sigma(i));
                term = term.mul(&factor);
            }
            total = total.add(&term);
        }
        total
    }

    /// Rewrite in the chi basis via `x_i = sigma_i chi_i + p_i`; fails if the
    /// result needs degree above `degree_bound`.
    pub fn to_walsh(
        &self,
        proxy: &ProductProxy,
        degree_bound: usize,
    ) -> Result<WalshPolynomial, LowDegError> {
        let mut total: BTreeMap<u64, f64> = BTreeMap::new();
        for (&m, &c) in &self.coeffs {
            // chi-basis expansion of c * x^m, factor by factor over distinct i.
            let mut term: BTreeMap<u64, f64> = BTreeMap::new();
            term.insert(0, c);
            let mut rest = m;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let mut next: BTreeMap<u64, f64> = BTreeMap::new();
                for (&s, &v) in &term {
                    *next.entry(s | 1 << i).or_insert(0.0) += v * proxy.sigma(i);
                    *next.entry(s).or_insert(0.0) += v * proxy.bias(i);
                }
                term = next;
            }
            for (s, v) in term {
                *total.entry(s).or_insert(0.0) += v;
            }
        }
        total.retain(|_, v| *v != 0.0);
        WalshPolynomial::new(total, degree_bound)
    }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Parse `S-as-bitmask coefficient` lines; the degree bound is the largest
/// subset size present.
pub fn parse_polynomial(text: &str) -> Result<WalshPolynomial, LowDegError> {
    let mut coeffs = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut toks = line.split_ascii_whitespace();
        let (Some(hex), Some(coef), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(LowDegError::BadText {
                line: line_no,
                msg: "expected `<mask-hex> <coefficient>`".to_string(),
            });
        };
        let mask = u64::from_str_radix(hex, 16).map_err(|_| LowDegError::BadText {
            line: line_no,
            msg: format!("bad subset mask {hex:?}"),
        })?;
        let c: f64 = coef.parse().map_err(|_| LowDegError::BadText {
            line: line_no,
            msg: format!("bad coefficient {coef:?}"),
        })?;
        if !c.is_finite() {
            return Err(LowDegError::BadText {
                line: line_no,
                msg: format!("bad coefficient {coef:?}"),
            });
        }
        if coeffs.insert(mask, c).is_some() {
            return Err(LowDegError::BadText {
                line: line_no,
                msg: format!("subset mask {hex} repeated"),
            });
        }
    }
    let bound = coeffs
        .keys()
        .map(|s: &u64| s.count_ones() as usize)
        .max()
        .unwrap_or(0);
    WalshPolynomial::new(coeffs, bound)
}

pub fn serialize_polynomial(p: &WalshPolynomial) -> String {
    let mut out = String::new();
    for (&s, &c) in p.coeffs() {
        let _ = writeln!(out, "{s:x} {c:.17}");
    }
    out
}

pub fn serialize_spectrum(sp: &Spectrum) -> String {
    let mut out = String::new();
    for (&s, &d) in sp.entries() {
        let _ = writeln!(out, "{s:x} {d:.17}");
    }
    out
}

// ---------------------------------------------------------------------------
// Exact-rational mirror
// ---------------------------------------------------------------------------

pub mod exact {
    //! Exact pseudoexpectation identity in the centered-monomial basis.
    //!
    //! `q = sum_S c_S prod_{i in S} (x_i - p_i)` differs from a chi polynomial
    //! only by the positive per-subset normalizer `prod 1/sigma_i`, so a zero
    //! gap here is equivalent to a zero gap in the normalized basis.

    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use std::collections::BTreeMap;

    /// `Etilde[q] - E_u[q]`: the moment-table functional (per-coordinate
    /// factorization) minus the exhaustive product-measure expectation.
    /// Both sides are exact rationals; the gap is identically zero.
    pub fn centered_moment_gap(
        coeffs: &BTreeMap<u64, BigRational>,
        biases: &[BigRational],
    ) -> BigRational {
        let n = biases.len();
        assert!(n <= 16, "exhaustive rational sweep");

        // Moment table side: product over S of (E_u[x_i] - p_i).
        let mut pseudo = BigRational::zero();
        for (&s, c) in coeffs {
            let mut m = BigRational::one();
            for (i, p) in biases.iter().enumerate() {
                if s >> i & 1 == 1 {
                    let first_moment = p.clone();
                    m *= first_moment - p.clone();
                }
            }
            pseudo += c.clone() * m;
        }

        // Exhaustive side.
        let mut direct = BigRational::zero();
        for x in 0..1u64 << n {
            let mut w = BigRational::one();
            for (i, p) in biases.iter().enumerate() {
                w *= if x >> i & 1 == 1 {
                    p.clone()
                } else {
                    BigRational::one() - p.clone()
                };
            }
            let mut qx = BigRational::zero();
            for (&s, c) in coeffs {
                let mut t = c.clone();
                for (i, p) in biases.iter().enumerate() {
                    if s >> i & 1 == 1 {
                        let xi = BigRational::from(BigInt::from(x >> i & 1));
                        t *= xi - p.clone();
                    }
                }
                qx += t;
            }
            direct += w * qx;
        }
        pseudo - direct
    }
}
