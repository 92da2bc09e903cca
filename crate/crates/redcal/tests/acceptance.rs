//! Acceptance gate: one test per shipped guarantee. Each prints a single
//! `[PASS]`/`[FAIL]` line (run with `--nocapture` to see them) and enforces
//! both the stated tolerance and a wall-clock budget.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use redcal::clique::{check_equivalence, reduce_to_clique, structurally_valid};
use redcal::coding::{delta_len, elias_delta_encode, BitCode, MetaField, MetaRecord};
use redcal::gadgets::{
    affine_pullback_anf, anf_decompose, enumerate_interfaces, index_pullback, index_wiring_map,
    representative, shared_core_check, AffineWiring, AnfPoly, GadgetError, IndexBlock,
    PARITY_TABLE,
};
use redcal::instances::{
    random_assignment, random_xor_instance, Clause, CnfFormula, Lit, XorConstraint, XorInstance,
};
use redcal::lowdeg::{
    delta_k_exact, discrepancy_record, noise_apply, pseudoexpectation_eval, DichotomyConstants,
    ProductProxy, WalshPolynomial,
};
use redcal::measure::{tv_distance, tv_event_supremum, FiniteDistribution};
use redcal::pipeline::{
    amplification_bound, binomial_tail_ge, choose_t, ledger_summary, majority_experiment,
    run_blueprint, sampling_margin, BlueprintParams,
};
use redcal::rng::SplitMix64;
use redcal::xorsat::{block_truth_table, forbidden_assignments, translate};

fn criterion(number: u32, what: &str, budget: Duration, body: impl FnOnce()) {
    let start = Instant::now();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => {
            let elapsed = start.elapsed();
            println!(
                "[PASS] criterion {number:02}: {what} ({:.2}s)",
                elapsed.as_secs_f64()
            );
            assert!(
                elapsed <= budget,
                "criterion {number} exceeded its {budget:?} budget: {elapsed:?}"
            );
        }
        Err(e) => {
            println!("[FAIL] criterion {number:02}: {what}");
            resume_unwind(e);
        }
    }
}

fn seeded_dist(rng: &mut SplitMix64, universe: u64, max_points: u64) -> FiniteDistribution<u64> {
    let points = 2 + rng.below(max_points.min(universe) - 1);
    let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
    while (weights.len() as u64) < points {
        weights.insert(rng.below(universe), 0.05 + rng.unit_f64());
    }
    let total: f64 = weights.values().sum();
    FiniteDistribution::from_pairs(weights.into_iter().map(|(x, w)| (x, w / total)).collect())
        .unwrap()
}

#[test]
fn criterion_01_truth_table_law() {
    criterion(1, "truth-table law for both parities", Duration::from_millis(50), || {
        for parity in [false, true] {
            let table = block_truth_table(parity);
            assert_eq!(table.iter().filter(|&&s| s).count(), 4);
            for (a, &sat) in table.iter().enumerate() {
                assert_eq!(sat, (a.count_ones() & 1 == 1) == parity, "assignment {a:03b}");
            }
            let mut forbidden = forbidden_assignments(parity);
            forbidden.sort_unstable();
            let expected: [u8; 4] = if parity { [0b000, 0b011, 0b101, 0b110] } else { [0b001, 0b010, 0b100, 0b111] };
            assert_eq!(forbidden, expected, "forbidden rows at parity {parity}");
            for a in forbidden {
                assert!(!table[a as usize]);
            }
        }
    });
}

#[test]
fn criterion_02_size_laws() {
    criterion(2, "4m clauses, 0 new variables, |V|=3m and |E| bound", Duration::from_secs(1), || {
        for seed in 0..1000u64 {
            let n = 6 + (seed % 20) as u32;
            let m = 1 + seed % 12;
            let inst = random_xor_instance(n, m, seed, None).unwrap();
            let cnf = translate(&inst);
            assert_eq!(cnf.clauses.len() as u64, 4 * m);
            assert_eq!(cnf.n, inst.n, "no new variables");
            let g = reduce_to_clique(&cnf);
            assert!(structurally_valid(&g));
            let blocks = cnf.clauses.len() as u64;
            assert_eq!(g.vertex_count() as u64, 3 * blocks);
            assert!(g.edge_count() as u64 <= 9 * blocks * (blocks - 1) / 2);
        }
    });
}

#[test]
fn criterion_03_inverse_identity() {
    criterion(3, "invert . translate = id (exhaustive small + planted)", Duration::from_secs(10), || {
        // (a) Exhaustive: every instance with n <= 6 and 1 <= m <= 3 distinct
        // triples, all parity patterns.
        for n in 3..=6u32 {
            let mut triples = Vec::new();
            for a in 1..=n {
                for b in a + 1..=n {
                    for c in b + 1..=n {
                        triples.push((a, b, c));
                    }
                }
            }
            let t = triples.len();
            let check = |picked: &[usize]| {
                for parities in 0..1u32 << picked.len() {
                    let constraints: Vec<XorConstraint> = picked
                        .iter()
                        .enumerate()
                        .map(|(slot, &i)| {
                            let (a, b, c) = triples[i];
                            XorConstraint::new(a, b, c, parities >> slot & 1 == 1).unwrap()
                        })
                        .collect();
                    let inst = XorInstance { n, constraints };
                    let back = redcal::xorsat::invert(&translate(&inst)).unwrap();
                    assert_eq!(back, inst);
                }
            };
            for i in 0..t {
                check(&[i]);
                for j in i + 1..t {
                    check(&[i, j]);
                    for k in j + 1..t {
                        check(&[i, j, k]);
                    }
                }
            }
        }
        // (b) Planted instances at the protocol's default scale.
        let mut rng = SplitMix64::new(20250918);
        for _ in 0..50 {
            let sub_seed = rng.next_u64();
            let planted = random_assignment(50, &mut rng);
            let inst = random_xor_instance(50, 200, sub_seed, Some(planted)).unwrap();
            assert_eq!(redcal::xorsat::invert(&translate(&inst)).unwrap(), inst);
        }
    });
}

#[test]
fn criterion_04_canonical_id_robustness() {
    criterion(4, "block-id invariance and corruption rejection", Duration::from_secs(5), || {
        use clap::Parser;
        let cli = redcal::cli::Cli::try_parse_from(["redcal", "check-blockid"]).unwrap();
        let (text, pass) = redcal::cli::execute(cli);
        assert!(pass, "check-blockid failed:\n{text}");
        assert!(text.contains(
            "[OK] Identifier invariance: 200 blocks stable under renaming, clause shuffling, and literal reordering."
        ));
        assert!(text.contains("[OK] Corruption check: 200 single-literal corruptions rejected."));
    });
}

#[test]
fn criterion_05_sat_clique_equivalence() {
    criterion(5, "SAT and clique brute-force oracles agree", Duration::from_secs(60), || {
        // Exhaustive: all formulas over 4 variables with up to 3 distinct
        // clauses.
        let mut clauses = Vec::new();
        for a in 1..=4u32 {
            for b in a + 1..=4 {
                for c in b + 1..=4 {
                    for signs in 0..8u32 {
                        clauses.push(
                            Clause::new([
                                Lit { var: a, positive: signs & 1 == 1 },
                                Lit { var: b, positive: signs & 2 == 2 },
                                Lit { var: c, positive: signs & 4 == 4 },
                            ])
                            .unwrap(),
                        );
                    }
                }
            }
        }
        let t = clauses.len();
        assert_eq!(t, 32);
        let run = |picked: &[usize]| {
            let f = CnfFormula {
                n: 4,
                clauses: picked.iter().map(|&i| clauses[i].clone()).collect(),
            };
            let report = check_equivalence(&f).unwrap();
            if report.sat {
                assert!(report.witness_checked);
            }
        };
        for i in 0..t {
            run(&[i]);
            for j in i + 1..t {
                run(&[i, j]);
                for k in j + 1..t {
                    run(&[i, j, k]);
                }
            }
        }
        // Seeded formulas at n <= 12, m <= 6.
        let mut rng = SplitMix64::new(20250918);
        for _ in 0..200 {
            let n = 5 + rng.below(8) as u32;
            let m = 1 + rng.below(6);
            let mut picked = Vec::new();
            for _ in 0..m {
                let lits = loop {
                    let (a, b, c) = (
                        1 + rng.below(n as u64) as u32,
                        1 + rng.below(n as u64) as u32,
                        1 + rng.below(n as u64) as u32,
                    );
                    if a != b && b != c && a != c {
                        break [
                            Lit { var: a, positive: rng.bit() },
                            Lit { var: b, positive: rng.bit() },
                            Lit { var: c, positive: rng.bit() },
                        ];
                    }
                };
                picked.push(Clause::new(lits).unwrap());
            }
            let f = CnfFormula { n, clauses: picked };
            let report = check_equivalence(&f).unwrap();
            if report.sat {
                assert!(report.witness_checked);
            }
        }
    });
}

#[test]
fn criterion_06_tv_contraction() {
    criterion(6, "TV contraction and event-supremum identity", Duration::from_secs(10), || {
        let mut rng = SplitMix64::new(20250918);
        for _ in 0..1000 {
            let a = seeded_dist(&mut rng, 4096, 10);
            let b = seeded_dist(&mut rng, 4096, 10);
            let mult = rng.next_u64() | 1;
            let f = |&x: &u64| x.wrapping_mul(mult) >> 61;
            let upstream = tv_distance(&a, &b);
            let downstream = tv_distance(&a.pushforward(f), &b.pushforward(f));
            assert!(downstream <= upstream + 1e-12, "{downstream} > {upstream}");
            // Union support here is at most 20 points; restrict to <= 12 for
            // the exhaustive event sweep.
            let small_a = seeded_dist(&mut rng, 12, 7);
            let small_b = seeded_dist(&mut rng, 12, 7);
            let sup = tv_event_supremum(&small_a, &small_b);
            let tv = tv_distance(&small_a, &small_b);
            assert!((sup - tv).abs() <= 1e-12, "{sup} vs {tv}");
        }
    });
}

#[test]
fn criterion_07_delta_code_exactness() {
    criterion(7, "delta lengths, prefix-freeness, partial Kraft", Duration::from_secs(30), || {
        for t in 1..=1u64 << 20 {
            assert_eq!(
                elias_delta_encode(t).unwrap().len() as u64,
                delta_len(t),
                "length law at t = {t}"
            );
        }
        let mut codes: Vec<BitCode> = (1..=1u64 << 16)
            .map(|t| elias_delta_encode(t).unwrap())
            .collect();
        let mut kraft = 0.0f64;
        for c in &codes {
            kraft += (0.5f64).powi(c.len() as i32);
        }
        assert!(kraft <= 1.0 + 1e-12, "partial Kraft sum {kraft}");
        codes.sort_by(|a, b| a.bits().cmp(b.bits()));
        for pair in codes.windows(2) {
            assert!(!pair[0].is_prefix_of(&pair[1]), "prefix violation");
        }
    });
}

#[test]
fn criterion_08_orthonormality_and_parseval() {
    criterion(8, "biased Walsh orthonormality and Parseval", Duration::from_secs(30), || {
        let biases = vec![0.5, 0.3, 0.7, 0.4, 0.6, 0.2, 0.8, 0.45, 0.55, 0.35];
        let n = biases.len();
        let proxy = ProductProxy::new(biases.clone(), 0.15).unwrap();
        let size = 1usize << n;
        // Per-point weights and the full character matrix.
        let mut weight = vec![0.0f64; size];
        for (x, w) in weight.iter_mut().enumerate() {
            *w = (0..n).fold(1.0, |acc, i| {
                acc * if x >> i & 1 == 1 { biases[i] } else { 1.0 - biases[i] }
            });
        }
        let mut phi = vec![vec![0.0f64; size]; size];
        for x in 0..size {
            phi[0][x] = 1.0;
        }
        for s in 1..size {
            let low = s & s.wrapping_neg();
            let i = low.trailing_zeros() as usize;
            let sigma = (biases[i] * (1.0 - biases[i])).sqrt();
            let rest = s ^ low;
            for x in 0..size {
                let xi = f64::from((x >> i & 1) as u8);
                phi[s][x] = phi[rest][x] * (xi - biases[i]) / sigma;
            }
        }
        for s in 0..size {
            let row: Vec<f64> = (0..size).map(|x| weight[x] * phi[s][x]).collect();
            for t in s..size {
                let dot: f64 = (0..size).map(|x| row[x] * phi[t][x]).sum();
                let expected = f64::from(s == t);
                assert!(
                    (dot - expected).abs() <= 1e-10,
                    "<chi_{s:b}, chi_{t:b}> = {dot}"
                );
            }
        }
        // Parseval: E_u[p^2] equals the coefficient square sum.
        let mut rng = SplitMix64::new(20250918);
        for _ in 0..100 {
            let mut coeffs = BTreeMap::new();
            for _ in 0..6 {
                coeffs.insert(rng.below(size as u64), rng.unit_f64() * 2.0 - 1.0);
            }
            let p = WalshPolynomial::new(coeffs.clone(), n).unwrap();
            let exhaustive: f64 = (0..size as u64)
                .map(|x| weight[x as usize] * p.eval(x, &proxy).powi(2))
                .sum();
            let coefficient: f64 = coeffs.values().map(|c| c * c).sum();
            assert!((exhaustive - coefficient).abs() <= 1e-10);
            assert!((p.norm2_u(&proxy).powi(2) - coefficient).abs() <= 1e-10);
        }
    });
}

#[test]
fn criterion_09_discrepancy_identities() {
    criterion(9, "Delta_0 = 0, monotone in k, Delta_n = 2 TV, spectral upper bound", Duration::from_secs(120), || {
        let mut rng = SplitMix64::new(20250918);
        let constants = DichotomyConstants::default();
        for seed in 0..50u64 {
            let n = 3 + (seed % 6) as usize;
            let proxy = ProductProxy::unbiased(n);
            let mu = seeded_dist(&mut rng, 1 << n, 6);
            let nu = seeded_dist(&mut rng, 1 << n, 6);
            let mut last = delta_k_exact(&mu, &nu, &proxy, 0).unwrap();
            assert!(last.abs() <= 1e-9, "Delta_0 = {last}");
            for k in 1..=n {
                let next = delta_k_exact(&mu, &nu, &proxy, k).unwrap();
                assert!(next >= last - 1e-7, "Delta_{k} dropped: {next} < {last}");
                last = next;
            }
            assert!(
                (last - 2.0 * tv_distance(&mu, &nu)).abs() <= 1e-6,
                "Delta_n vs 2 TV at n = {n}"
            );
            let record = discrepancy_record(&mu, &proxy, 2.min(n), &constants).unwrap();
            assert!(record.delta_k <= record.spectral_norm + 1e-9);
        }
    });
}

#[test]
fn criterion_10_noise_smoothing() {
    criterion(10, "noise operator 2-norm contraction", Duration::from_secs(10), || {
        let mut rng = SplitMix64::new(20250918);
        for case in 0..500u64 {
            let n = 4 + (case % 7) as usize;
            let k = 1 + (case % 4) as usize;
            let proxy = ProductProxy::unbiased(n);
            let mut coeffs = BTreeMap::new();
            for _ in 0..8 {
                // Random mask of weight <= k.
                let mut s = 0u64;
                for _ in 0..k {
                    s |= 1 << rng.below(n as u64);
                }
                coeffs.insert(s, rng.unit_f64() * 4.0 - 2.0);
            }
            let p = WalshPolynomial::new(coeffs.clone(), k).unwrap();
            let theta = rng.unit_f64();
            let smoothed = noise_apply(&p, theta);
            let diff_coeffs: BTreeMap<u64, f64> = coeffs
                .iter()
                .map(|(&s, &c)| (s, c - smoothed.coeff(s)))
                .collect();
            let diff = WalshPolynomial::new(diff_coeffs, k).unwrap();
            let lhs = diff.norm2_u(&proxy);
            let rhs = (1.0 - theta.powi(2 * k as i32)).sqrt() * p.norm2_u(&proxy);
            assert!(lhs <= rhs + 1e-12, "case {case}: {lhs} > {rhs}");
        }
    });
}

#[test]
fn criterion_11_pseudoexpectation_alignment() {
    criterion(11, "pseudoexpectation matches E_u exactly / to 1e-12", Duration::from_secs(5), || {
        let mut rng = SplitMix64::new(20250918);
        // Rational mode: the centered-moment gap is identically zero.
        for _ in 0..50 {
            let n = 2 + rng.below(5) as usize;
            let biases: Vec<BigRational> = (0..n)
                .map(|_| {
                    let den = 2 + rng.below(8) as i64;
                    let num = 1 + rng.below(den as u64 - 1) as i64;
                    BigRational::new(BigInt::from(num), BigInt::from(den))
                })
                .collect();
            let mut coeffs = BTreeMap::new();
            for _ in 0..5 {
                let num = rng.below(19) as i64 - 9;
                let den = 1 + rng.below(7) as i64;
                coeffs.insert(
                    rng.below(1 << n),
                    BigRational::new(BigInt::from(num), BigInt::from(den)),
                );
            }
            let gap = redcal::lowdeg::exact::centered_moment_gap(&coeffs, &biases);
            assert!(gap.is_zero(), "rational gap {gap}");
        }
        // Double mode against the exhaustive expectation.
        for _ in 0..50 {
            let n = 3 + rng.below(6) as usize;
            let proxy = ProductProxy::unbiased(n);
            let mut coeffs = BTreeMap::new();
            for _ in 0..6 {
                coeffs.insert(rng.below(1 << n), rng.unit_f64() * 2.0 - 1.0);
            }
            let k = coeffs.keys().map(|s| s.count_ones() as usize).max().unwrap();
            let p = WalshPolynomial::new(coeffs, n).unwrap();
            let pe = pseudoexpectation_eval(&p, &proxy, k.max(1)).unwrap();
            let direct: f64 = (0..1u64 << n)
                .map(|x| p.eval(x, &proxy) / (1u64 << n) as f64)
                .sum();
            assert!((pe - direct).abs() <= 1e-12, "{pe} vs {direct}");
        }
    });
}

#[test]
fn criterion_12_gadget_structure() {
    criterion(12, "shared core on all table pairs; 6 matrices / 3 classes", Duration::from_secs(10), || {
        let mut preserving = 0u32;
        for t1 in 0..=255u8 {
            for t2 in 0..=255u8 {
                let g = anf_decompose(t1, t2);
                assert_eq!(g.parity_preserving, t1 ^ t2 == PARITY_TABLE);
                if g.parity_preserving {
                    preserving += 1;
                    let core = shared_core_check(&g).unwrap();
                    assert_eq!(core, g.core(1));
                    assert_eq!(core, g.core(2));
                } else {
                    assert!(matches!(
                        shared_core_check(&g),
                        Err(GadgetError::NotParityPreserving)
                    ));
                }
            }
        }
        assert_eq!(preserving, 256);
        let e = enumerate_interfaces();
        assert_eq!(e.matrices.len(), 6);
        assert_eq!(e.classes.len(), 3);
        let reps: Vec<String> = e.classes.iter().map(|c| c.representative.to_string()).collect();
        assert_eq!(reps, ["[100][011]", "[010][101]", "[001][110]"]);
        for class in &e.classes {
            assert_eq!(class.members.len(), 2);
            assert_eq!(representative(class.id), class.representative);
        }
    });
}

#[test]
fn criterion_13_pullback_degree_laws() {
    criterion(13, "pullback degree/sup-norm laws and Delta transfer", Duration::from_secs(120), || {
        let mut rng = SplitMix64::new(20250918);
        // Affine route: substituting degree-1 ANFs never raises ANF degree.
        for _ in 0..300 {
            let outputs = 2 + rng.below(2) as usize;
            let inputs = 3 + rng.below(4) as usize;
            let p = AnfPoly::from_monomials(
                (0..4).map(|_| rng.below(1 << outputs) as u32),
            );
            let wiring = AffineWiring {
                masks: (0..outputs).map(|_| rng.below(1 << inputs)).collect(),
                consts: (0..outputs).map(|_| rng.bit()).collect(),
            };
            let pulled = affine_pullback_anf(&p, &wiring).unwrap();
            assert!(pulled.degree() <= p.degree());
        }
        // Index route: degree at most doubles, sup-norm never grows.
        let blocks = [
            IndexBlock { selector: 0, low: 1, high: 2 },
            IndexBlock { selector: 3, low: 4, high: 5 },
        ];
        let in_proxy = ProductProxy::unbiased(6);
        let out_proxy = ProductProxy::unbiased(2);
        for _ in 0..40 {
            let mut coeffs = BTreeMap::new();
            for _ in 0..3 {
                coeffs.insert(rng.below(4), rng.unit_f64() * 2.0 - 1.0);
            }
            let p = WalshPolynomial::new(coeffs, 2).unwrap();
            let pulled = index_pullback(&p, &blocks, &out_proxy, &in_proxy).unwrap();
            assert!(pulled.degree() <= 2 * p.degree());
            assert!(pulled.sup_norm(&in_proxy) <= p.sup_norm(&out_proxy) + 1e-9);
        }
        // Delta transfer: weight-1 wirings preserve Delta_k exactly; the
        // index map obeys the factor-2 law Delta_k(down) <= Delta_2k(up).
        let u6 = in_proxy.as_distribution().unwrap();
        let relabel = AffineWiring {
            masks: vec![0b000100, 0b000001, 0b100000, 0b000010, 0b010000, 0b001000],
            consts: vec![true, false, false, true, false, false],
        };
        for _ in 0..20 {
            let mu = seeded_dist(&mut rng, 1 << 6, 6);
            let g_mu = mu.pushforward(|&x| relabel.apply(x));
            let g_u = u6.pushforward(|&x| relabel.apply(x));
            let i_mu = mu.pushforward(|&x| index_wiring_map(&blocks, x));
            let i_u = u6.pushforward(|&x| index_wiring_map(&blocks, x));
            for k in 1..=2usize {
                let up = delta_k_exact(&mu, &u6, &in_proxy, k).unwrap();
                let down = delta_k_exact(&g_mu, &g_u, &in_proxy, k).unwrap();
                assert!((down - up).abs() <= 1e-6, "relabeling moved Delta_{k}");
                let idx_down = delta_k_exact(&i_mu, &i_u, &out_proxy, k.min(2)).unwrap();
                let idx_up = delta_k_exact(&mu, &u6, &in_proxy, (2 * k).min(6)).unwrap();
                assert!(idx_down <= idx_up + 1e-6, "factor-2 law at k = {k}");
            }
        }
    });
}

#[test]
fn criterion_14_amplification() {
    criterion(14, "Chernoff grid and Monte-Carlo majority", Duration::from_secs(30), || {
        for &eps in &[0.05, 0.1, 0.2, 0.3, 0.45] {
            for &n in &[16u64, 64, 256, 1024, 65536] {
                let t = choose_t(eps, n, 1.0);
                let bound = amplification_bound(eps, t);
                let target = (n as f64).powi(-2);
                assert!(bound <= target * (1.0 + 1e-12), "eps={eps} N={n}");
            }
        }
        let outcome = majority_experiment(0.2, 200, 100_000, 20250918);
        let bound = amplification_bound(0.2, 200);
        let margin = sampling_margin(bound, 100_000);
        assert!(
            outcome.failure_rate <= bound + margin,
            "failure rate {} above {bound} + {margin}",
            outcome.failure_rate
        );
    });
}

#[test]
fn criterion_15_ledger_totals() {
    criterion(15, "canonical ledger rows, exact meta bits, XOR arrow", Duration::from_secs(1), || {
        let report = run_blueprint(&BlueprintParams::default()).unwrap();
        let labels: Vec<&str> = report.ledger.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(
            labels,
            ["E1 (Direct product)", "E2 (Hardcore)", "E3 (Condensation)", "E4 (Parameter fixing)"]
        );
        let rows = &report.ledger.rows;
        assert_eq!(rows[0].tv_loss, 0.0);
        assert_eq!(rows[0].size_factor, 694.0);
        assert_eq!(rows[0].meta_bits, 0);
        let mass = binomial_tail_ge(16, 0.6, 8);
        assert!((rows[1].tv_loss - (1.0 - mass)).abs() <= 1e-12);
        assert_eq!(rows[1].size_factor, 1.0);
        assert_eq!(rows[1].meta_bits, 0);
        assert_eq!(rows[2].tv_loss, 0.0);
        assert_eq!(rows[2].size_factor, 10.0);
        assert_eq!(rows[2].meta_bits, 0);
        // E4 meta bits equal the length of the actual prefix-free record.
        let record = MetaRecord::new(vec![
            MetaField::new("schedule", 1, 1.0),
            MetaField::new("selector", 8, 1.0),
            MetaField::new("seed", 1, 1.0),
        ]);
        assert_eq!(rows[3].meta_bits, record.encode().len() as u64);
        assert_eq!(rows[3].tv_loss, 0.0);
        assert_eq!(rows[3].size_factor, 1.0);
        let totals = ledger_summary(&report.ledger);
        assert_eq!(totals.meta_total, rows[3].meta_bits);
        assert!((totals.size_total - 6940.0).abs() <= 1e-9);

        let with_arrow = run_blueprint(&BlueprintParams {
            with_xor_arrow: true,
            ..BlueprintParams::default()
        })
        .unwrap();
        assert_eq!(with_arrow.ledger.rows.len(), 5);
        let arrow = &with_arrow.ledger.rows[0];
        assert_eq!(arrow.label, "R_xor->sat");
        assert_eq!(arrow.tv_loss, 0.0);
        assert_eq!(arrow.size_factor, 4.0);
        assert_eq!(arrow.meta_bits, 0);
        let arrow_totals = ledger_summary(&with_arrow.ledger);
        assert!((arrow_totals.size_total - 4.0 * totals.size_total).abs() <= 1e-9);
    });
}

#[test]
fn criterion_16_appendix_protocol() {
    criterion(16, "check-xorsat default protocol output", Duration::from_secs(30), || {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_redcal"))
            .args(["check-xorsat", "--n", "50", "--m", "200", "--trials", "50", "--seed", "20250918"])
            .output()
            .unwrap();
        assert!(out.status.success(), "exit status {:?}", out.status);
        let stdout = String::from_utf8(out.stdout).unwrap();
        let lines: Vec<&str> = stdout.lines().collect();
        assert_eq!(
            lines[0],
            "[OK] Truth-table & count checks passed (each block has exactly 4 satisfying assignments)."
        );
        assert_eq!(
            lines[1],
            "[OK] Forward check: 50 planted XOR instances => CNF satisfied by planted solutions."
        );
        assert_eq!(
            lines[2],
            "[OK] Reverse check: inconsistent XOR core => CNF is UNSAT (brute force on support)."
        );
        assert_eq!(lines[3], "All checks passed.");
        assert!(lines[4].starts_with("RESULT {"));
    });
}
