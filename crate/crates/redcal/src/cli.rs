//! Command-line frontend. One subcommand per module; reports are line
//! oriented with a final machine-readable `RESULT` trailer, and repeated runs
//! with the same configuration produce byte-identical output.
//!
//! `translate`, `invert`, and `reduce-clique` print the produced artifact to
//! stdout when `--output` is omitted, so they compose in shell pipelines;
//! with `--output` they write the file and print a summary instead.
//! `check-xorsat` and `check-blockid` reproduce the verification protocol
//! with its exact default flags (`--n 50 --m 200 --trials 50 --seed
//! 20250918`, respectively `--trials 200 --seed 20250918`).
//!
//! Flags shared with the reference scripts keep their names (`--n`, `--m`,
//! `--trials`, `--seed`); everything else is namespaced (`--const.c1`, ...).
//! An optional TOML `--config` file supplies defaults; explicit flags win.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::clique::{brute_sat, reduce_to_clique, structurally_valid};
use crate::gadgets::{
    enumerate_interfaces, orbits_under, parse_gadget, shared_core_check, switching_path_widths,
    MixingGroup,
};
use crate::instances::{
    parse_cnf, parse_xor, random_assignment, random_xor_instance, serialize_cnf, serialize_graph,
    serialize_xor, Clause, Lit, XorConstraint,
};
use crate::lowdeg::{discrepancy_record, DichotomyConstants, ProductProxy, LP_CAP};
use crate::measure::{parse_distribution, FiniteDistribution};
use crate::pipeline::{
    condensation_report, run_blueprint, BlueprintParams, CondenseParams, LogBase,
};
use crate::rng::SplitMix64;
use crate::xorsat::{
    block_truth_table, canonical_block_id, dependent_unsat_core, forbidden_assignments, invert,
    solve_f2, translate,
};

#[derive(Debug, Parser)]
#[command(
    name = "redcal",
    version,
    about = "Reduction and calibration toolkit: parity blocks, clique reductions, \
             low-degree discrepancy, gadget normal forms, and the loss ledger."
)]
pub struct Cli {
    /// TOML config file with defaults; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy, Default)]
pub struct ConstArgs {
    /// Amplification constant c1.
    #[arg(long = "const.c1", value_name = "REAL")]
    pub c1: Option<f64>,
    /// Hardcore mass target c2.
    #[arg(long = "const.c2", value_name = "REAL")]
    pub c2: Option<f64>,
    /// Degree-selection constant c (k = floor(c log2 n)).
    #[arg(long = "const.c", value_name = "REAL")]
    pub c: Option<f64>,
    /// Dichotomy threshold exponent eta.
    #[arg(long = "const.eta", value_name = "REAL")]
    pub eta: Option<f64>,
    /// Structure-branch degree constant zeta.
    #[arg(long = "const.zeta", value_name = "REAL")]
    pub zeta: Option<f64>,
    /// Bias window half-width alpha.
    #[arg(long = "const.alpha", value_name = "REAL")]
    pub alpha: Option<f64>,
    /// Noise rate theta.
    #[arg(long = "const.theta", value_name = "REAL")]
    pub theta: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translate a parity instance (`p xor` format) into 3-CNF blocks.
    Translate {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Write the DIMACS formula here instead of stdout.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Recover the parity instance from a translated formula.
    Invert {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Reduce a 3-CNF formula to a labeled clique instance.
    ReduceClique {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Truth-table, planted-forward, and reverse-UNSAT verification.
    CheckXorsat {
        /// Variables per forward trial.
        #[arg(long)]
        n: Option<u32>,
        /// Parity constraints per forward trial.
        #[arg(long)]
        m: Option<u64>,
        /// Number of forward trials.
        #[arg(long)]
        trials: Option<u64>,
        /// RNG seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Canonical block-identifier invariance and corruption suite.
    CheckBlockid {
        /// Number of randomized blocks.
        #[arg(long)]
        trials: Option<u64>,
        /// RNG seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact low-degree discrepancy of a distribution against the uniform
    /// proxy, with the dichotomy classification.
    Discrepancy {
        /// Ambient bits (at most 12).
        #[arg(long)]
        n: Option<u64>,
        /// Test degree.
        #[arg(long)]
        k: Option<u64>,
        /// Support points of the seeded distribution.
        #[arg(long)]
        points: Option<u64>,
        /// RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Read the distribution from a `hex prob` file instead of seeding.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[command(flatten)]
        consts: ConstArgs,
    },
    /// Interface-matrix enumeration, orbit closure, switching widths, and
    /// (optionally) the ANF decomposition of a truth-table file.
    Gadgets {
        /// 8-line `a b c s1 s2` truth-table file to decompose.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Blocks for the switching trace.
        #[arg(long = "switch-m", default_value_t = 1 << 20)]
        switch_m: u64,
        /// Rounds for the switching trace.
        #[arg(long = "switch-d", default_value_t = 20)]
        switch_d: u32,
        #[command(flatten)]
        consts: ConstArgs,
    },
    /// Run the canonical E1-E4 blueprint and print the loss ledger.
    Pipeline {
        /// Per-coordinate advantage epsilon in (0, 1/2).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Instance bitlength N.
        #[arg(long = "n-bits")]
        n_bits: Option<u64>,
        /// Condensation polylog exponent a.
        #[arg(long)]
        a: Option<u32>,
        /// Condenser taps per output bit.
        #[arg(long)]
        locality: Option<u64>,
        /// RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Prepend the XOR-to-SAT arrow (tv 0, size x4).
        #[arg(long)]
        with_xor_arrow: bool,
        /// Base of the log in t = ceil(c1 eps^-2 log N).
        #[arg(long, value_enum, default_value_t = LogBaseArg::Natural)]
        log_base: LogBaseArg,
        /// Also measure the condenser's low-degree discrepancy at desk scale.
        #[arg(long)]
        measure: bool,
        #[command(flatten)]
        consts: ConstArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBaseArg {
    Natural,
    Two,
}

impl From<LogBaseArg> for LogBase {
    fn from(b: LogBaseArg) -> Self {
        match b {
            LogBaseArg::Natural => LogBase::Natural,
            LogBaseArg::Two => LogBase::Two,
        }
    }
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<u64>,
    pub m: Option<u64>,
    pub k: Option<u64>,
    pub points: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    #[serde(rename = "const", default)]
    pub constants: ConstFile,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstFile {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c: Option<f64>,
    pub eta: Option<f64>,
    pub zeta: Option<f64>,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
}

fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn resolve_constants(args: &ConstArgs, file: &ConstFile) -> DichotomyConstants {
    let d = DichotomyConstants::default();
    DichotomyConstants {
        c1: pick(args.c1, file.c1, d.c1),
        c2: pick(args.c2, file.c2, d.c2),
        c: pick(args.c, file.c, d.c),
        eta: pick(args.eta, file.eta, d.eta),
        zeta: pick(args.zeta, file.zeta, d.zeta),
    }
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

struct Report {
    lines: Vec<String>,
    data: serde_json::Value,
}

impl Report {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }
}

struct Failure {
    message: String,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Self {
            message: e.to_string(),
        }
    }
}

fn fail(msg: impl Into<String>) -> Failure {
    Failure {
        message: msg.into(),
    }
}

fn render(command: &str, outcome: Result<Report, Failure>) -> (String, bool) {
    let mut out = String::new();
    match outcome {
        Ok(report) => {
            for line in &report.lines {
                out.push_str(line);
                out.push('\n');
            }
            let trailer = json!({ "command": command, "pass": true, "data": report.data });
            out.push_str(&format!("RESULT {trailer}\n"));
            (out, true)
        }
        Err(f) => {
            out.push_str(&format!("[FAIL] {}\n", f.message));
            let trailer = json!({ "command": command, "pass": false, "error": f.message });
            out.push_str(&format!("RESULT {trailer}\n"));
            (out, false)
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| fail(format!("{}: {e}", path.display())))
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let (text, pass) = execute(cli);
    print!("{text}");
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Dispatch a parsed invocation; returns the full report text and whether
/// every executed assertion passed.
pub fn execute(cli: Cli) -> (String, bool) {
    let file_config = match &cli.config {
        Some(path) => match read_file(path).and_then(|text| {
            toml::from_str::<FileConfig>(&text).map_err(|e| fail(format!("config: {e}")))
        }) {
            Ok(c) => c,
            Err(f) => return render(command_name(&cli.command), Err(f)),
        },
        None => FileConfig::default(),
    };
    let name = command_name(&cli.command);
    let outcome = dispatch(cli.command, &file_config);
    render(name, outcome)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Translate { .. } => "translate",
        Command::Invert { .. } => "invert",
        Command::ReduceClique { .. } => "reduce-clique",
        Command::CheckXorsat { .. } => "check-xorsat",
        Command::CheckBlockid { .. } => "check-blockid",
        Command::Discrepancy { .. } => "discrepancy",
        Command::Gadgets { .. } => "gadgets",
        Command::Pipeline { .. } => "pipeline",
    }
}

fn dispatch(command: Command, file: &FileConfig) -> Result<Report, Failure> {
    match command {
        Command::Translate { input, output } => cmd_translate(&input, output.as_ref()),
        Command::Invert { input, output } => cmd_invert(&input, output.as_ref()),
        Command::ReduceClique { input, output } => cmd_reduce_clique(&input, output.as_ref()),
        Command::CheckXorsat { n, m, trials, seed } => cmd_check_xorsat(
            pick(n, file.n.map(|v| v as u32), 50),
            pick(m, file.m, 200),
            pick(trials, file.trials, 50),
            pick(seed, file.seed, 20250918),
        ),
        Command::CheckBlockid { trials, seed } => cmd_check_blockid(
            pick(trials, file.trials, 200),
            pick(seed, file.seed, 20250918),
        ),
        Command::Discrepancy {
            n,
            k,
            points,
            seed,
            input,
            consts,
        } => cmd_discrepancy(
            pick(n, file.n, 6),
            pick(k, file.k, 2) as usize,
            pick(points, file.points, 12),
            pick(seed, file.seed, 20250918),
            input.as_ref(),
            resolve_constants(&consts, &file.constants),
        ),
        Command::Gadgets {
            input,
            switch_m,
            switch_d,
            consts,
        } => cmd_gadgets(
            input.as_ref(),
            switch_m,
            switch_d,
            pick(consts.c, file.constants.c, 0.5),
        ),
        Command::Pipeline {
            epsilon,
            n_bits,
            a,
            locality,
            seed,
            with_xor_arrow,
            log_base,
            measure,
            consts,
        } => {
            let defaults = BlueprintParams::default();
            let params = BlueprintParams {
                epsilon: pick(epsilon, file.epsilon, defaults.epsilon),
                n_bits: pick(n_bits, file.n, defaults.n_bits),
                c1: pick(consts.c1, file.constants.c1, defaults.c1),
                c2: pick(consts.c2, file.constants.c2, defaults.c2),
                a: a.unwrap_or(defaults.a),
                locality: locality.map(|l| l as usize).unwrap_or(defaults.locality),
                seed: pick(seed, file.seed, defaults.seed),
                with_xor_arrow,
                log_base: log_base.into(),
            };
            cmd_pipeline(&params, measure)
        }
    }
}

// ---------------------------------------------------------------------------
// File-to-file reductions
// ---------------------------------------------------------------------------

fn emit_artifact(
    report: &mut Report,
    artifact: String,
    output: Option<&PathBuf>,
    summary: String,
) -> Result<(), Failure> {
    match output {
        Some(path) => {
            write_file(path, &artifact)?;
            report.push(summary);
            report.push(format!("wrote {}", path.display()));
        }
        None => {
            // Raw artifact on stdout for pipelines; the trailer still follows.
            for line in artifact.lines() {
                report.push(line);
            }
        }
    }
    Ok(())
}

fn cmd_translate(input: &PathBuf, output: Option<&PathBuf>) -> Result<Report, Failure> {
    let inst = parse_xor(&read_file(input)?).map_err(|e| fail(format!("translate: {e}")))?;
    let cnf = translate(&inst);
    let mut report = Report::new();
    let summary = format!(
        "translated {} parity constraints on {} variables into {} clauses",
        inst.constraints.len(),
        inst.n,
        cnf.clauses.len()
    );
    report.data = json!({
        "n": inst.n,
        "constraints": inst.constraints.len(),
        "clauses": cnf.clauses.len(),
    });
    emit_artifact(&mut report, serialize_cnf(&cnf), output, summary)?;
    Ok(report)
}

fn cmd_invert(input: &PathBuf, output: Option<&PathBuf>) -> Result<Report, Failure> {
    let cnf = parse_cnf(&read_file(input)?).map_err(|e| fail(format!("invert: {e}")))?;
    let inst = invert(&cnf).map_err(|e| fail(format!("invert: {e}")))?;
    let mut report = Report::new();
    let summary = format!(
        "recovered {} parity constraints on {} variables from {} clauses",
        inst.constraints.len(),
        inst.n,
        cnf.clauses.len()
    );
    report.data = json!({
        "n": inst.n,
        "constraints": inst.constraints.len(),
    });
    emit_artifact(&mut report, serialize_xor(&inst), output, summary)?;
    Ok(report)
}

fn cmd_reduce_clique(input: &PathBuf, output: Option<&PathBuf>) -> Result<Report, Failure> {
    let cnf = parse_cnf(&read_file(input)?).map_err(|e| fail(format!("reduce-clique: {e}")))?;
    let graph = reduce_to_clique(&cnf);
    if !structurally_valid(&graph) {
        return Err(fail("reduce-clique: produced graph violates its invariants"));
    }
    let mut report = Report::new();
    let summary = format!(
        "reduced {} clauses to |V|={} |E|={}, target clique size {}",
        cnf.clauses.len(),
        graph.vertex_count(),
        graph.edge_count(),
        graph.blocks
    );
    report.data = json!({
        "clauses": cnf.clauses.len(),
        "vertices": graph.vertex_count(),
        "edges": graph.edge_count(),
        "target": graph.blocks,
    });
    emit_artifact(&mut report, serialize_graph(&graph), output, summary)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// check-xorsat
// ---------------------------------------------------------------------------

fn cmd_check_xorsat(n: u32, m: u64, trials: u64, seed: u64) -> Result<Report, Failure> {
    let mut report = Report::new();

    // (i) Truth table & count: each block keeps exactly the four assignments
    // with the right parity.
    for parity in [false, true] {
        let table = block_truth_table(parity);
        let satisfying = table.iter().filter(|&&ok| ok).count();
        if satisfying != 4 {
            return Err(fail(format!(
                "truth-table check: parity {} block has {satisfying} satisfying assignments, expected 4",
                u8::from(parity)
            )));
        }
        for (a, &ok) in table.iter().enumerate() {
            let want = (a.count_ones() & 1 == 1) == parity;
            if ok != want {
                return Err(fail(format!(
                    "truth-table check: parity {} block disagrees with XOR at assignment {a:03b}",
                    u8::from(parity)
                )));
            }
        }
        if forbidden_assignments(parity).iter().any(|&a| table[a as usize]) {
            return Err(fail("truth-table check: forbidden assignment satisfies its block"));
        }
    }
    report.push(
        "[OK] Truth-table & count checks passed (each block has exactly 4 satisfying assignments).",
    );

    // (ii) Forward: planted instances stay satisfied after translation.
    let mut rng = SplitMix64::new(seed);
    for trial in 0..trials {
        let sub_seed = rng.next_u64();
        let planted = random_assignment(n, &mut rng);
        let inst = random_xor_instance(n, m, sub_seed, Some(planted))
            .map_err(|e| fail(format!("forward check, trial {trial}: {e}")))?;
        let cnf = translate(&inst);
        if cnf.clauses.len() as u64 != 4 * m {
            return Err(fail(format!(
                "forward check, trial {trial}: {} clauses, expected {}",
                cnf.clauses.len(),
                4 * m
            )));
        }
        if !cnf.satisfied_by(planted) {
            return Err(fail(format!(
                "forward check, trial {trial}: planted solution does not satisfy the translation"
            )));
        }
    }
    report.push(format!(
        "[OK] Forward check: {trials} planted XOR instances => CNF satisfied by planted solutions."
    ));

    // (iii) Reverse: the dependent inconsistent core translates to an UNSAT
    // formula, exhaustively over its support.
    let core = dependent_unsat_core();
    if solve_f2(&core).is_some() {
        return Err(fail("reverse check: elimination found a solution for the core"));
    }
    let cnf = translate(&core);
    match brute_sat(&cnf, 16) {
        Ok(None) => {}
        Ok(Some(a)) => {
            return Err(fail(format!(
                "reverse check: translated core satisfied by assignment {a:#x}"
            )))
        }
        Err(e) => return Err(fail(format!("reverse check: {e}"))),
    }
    report.push("[OK] Reverse check: inconsistent XOR core => CNF is UNSAT (brute force on support).");

    report.push("All checks passed.");
    report.data = json!({ "n": n, "m": m, "trials": trials, "seed": seed });
    Ok(report)
}

// ---------------------------------------------------------------------------
// check-blockid
// ---------------------------------------------------------------------------

fn random_block(rng: &mut SplitMix64) -> (XorConstraint, Vec<Clause>) {
    let mut vars = [0u32; 3];
    loop {
        for v in &mut vars {
            *v = 1 + rng.below(60) as u32;
        }
        if vars[0] != vars[1] && vars[1] != vars[2] && vars[0] != vars[2] {
            break;
        }
    }
    let c = XorConstraint::new(vars[0], vars[1], vars[2], rng.bit()).expect("distinct");
    let inst = crate::instances::XorInstance {
        n: 63,
        constraints: vec![c],
    };
    (c, translate(&inst).clauses)
}

fn cmd_check_blockid(trials: u64, seed: u64) -> Result<Report, Failure> {
    let mut report = Report::new();
    let mut rng = SplitMix64::new(seed);

    for trial in 0..trials {
        let (constraint, mut clauses) = random_block(&mut rng);
        let base = canonical_block_id(&clauses)
            .map_err(|e| fail(format!("invariance, trial {trial}: base block: {e}")))?;

        // Clause shuffling.
        rng.shuffle(&mut clauses);
        let shuffled = canonical_block_id(&clauses)
            .map_err(|e| fail(format!("invariance, trial {trial}: shuffled: {e}")))?;
        if shuffled != base {
            return Err(fail(format!(
                "invariance, trial {trial}: shuffling changed the identifier"
            )));
        }

        // Intra-clause literal reordering: rebuild each clause from a rotated
        // literal list.
        let rebuilt: Vec<Clause> = clauses
            .iter()
            .map(|c| {
                let l = c.lits();
                Clause::new([l[2], l[0], l[1]]).expect("same literals")
            })
            .collect();
        let reordered = canonical_block_id(&rebuilt)
            .map_err(|e| fail(format!("invariance, trial {trial}: reordered: {e}")))?;
        if reordered != base {
            return Err(fail(format!(
                "invariance, trial {trial}: literal reordering changed the identifier"
            )));
        }

        // Variable renaming by a random injection.
        let mut relabel: Vec<u32> = (1..=60).collect();
        rng.shuffle(&mut relabel);
        let map = |v: u32| relabel[(v - 1) as usize];
        let renamed: Vec<Clause> = clauses
            .iter()
            .map(|c| {
                let lits = c.lits().map(|l| Lit {
                    var: map(l.var),
                    positive: l.positive,
                });
                Clause::new(lits).expect("injection keeps variables distinct")
            })
            .collect();
        let renamed_id = canonical_block_id(&renamed)
            .map_err(|e| fail(format!("invariance, trial {trial}: renamed: {e}")))?;
        let mut expected_vars = constraint.vars.map(map);
        expected_vars.sort_unstable();
        if renamed_id.parity != base.parity || renamed_id.vars != expected_vars {
            return Err(fail(format!(
                "invariance, trial {trial}: renaming changed parity or support"
            )));
        }
    }
    report.push(format!(
        "[OK] Identifier invariance: {trials} blocks stable under renaming, clause shuffling, and literal reordering."
    ));

    // Single-literal corruptions must all be rejected.
    for trial in 0..trials {
        let (_, mut clauses) = random_block(&mut rng);
        let ci = rng.below(4) as usize;
        let slot = rng.below(3) as usize;
        let mut lits = *clauses[ci].lits();
        if rng.bit() {
            lits[slot] = lits[slot].negated();
        } else {
            // A variable outside the drawing range: forces mixed support.
            lits[slot] = Lit {
                var: 61 + rng.below(3) as u32,
                positive: lits[slot].positive,
            };
        }
        let rejected = match Clause::new(lits) {
            Ok(c) => {
                clauses[ci] = c;
                canonical_block_id(&clauses).is_err()
            }
            // The corruption did not even form a clause.
            Err(_) => true,
        };
        if !rejected {
            return Err(fail(format!(
                "corruption, trial {trial}: corrupted block was accepted"
            )));
        }
    }
    report.push(format!(
        "[OK] Corruption check: {trials} single-literal corruptions rejected."
    ));

    report.push("All checks passed.");
    report.data = json!({ "trials": trials, "seed": seed });
    Ok(report)
}

// ---------------------------------------------------------------------------
// discrepancy
// ---------------------------------------------------------------------------

fn seeded_distribution(n: u64, points: u64, seed: u64) -> FiniteDistribution<u64> {
    let size = 1u64 << n;
    let points = points.clamp(1, size);
    let mut rng = SplitMix64::new(seed);
    let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
    while (weights.len() as u64) < points {
        weights.insert(rng.below(size), 0.05 + rng.unit_f64());
    }
    let total: f64 = weights.values().sum();
    FiniteDistribution::from_pairs(weights.into_iter().map(|(x, w)| (x, w / total)).collect())
        .expect("positive normalized weights")
}

fn cmd_discrepancy(
    n: u64,
    k: usize,
    points: u64,
    seed: u64,
    input: Option<&PathBuf>,
    constants: DichotomyConstants,
) -> Result<Report, Failure> {
    if n == 0 || n > LP_CAP as u64 {
        return Err(fail(format!("discrepancy: n must be in 1..={LP_CAP}")));
    }
    let mu = match input {
        Some(path) => parse_distribution(&read_file(path)?)
            .map_err(|e| fail(format!("discrepancy: {e}")))?,
        None => seeded_distribution(n, points, seed),
    };
    let proxy = ProductProxy::unbiased(n as usize);
    let record = discrepancy_record(&mu, &proxy, k, &constants)
        .map_err(|e| fail(format!("discrepancy: {e}")))?;
    let mut report = Report::new();
    report.push(format!(
        "discrepancy report: n={} k={} support={}",
        record.n,
        record.k,
        mu.support().len()
    ));
    report.push(format!("Delta_k        = {:.6}", record.delta_k));
    report.push(format!("spectral norm  = {:.6}", record.spectral_norm));
    report.push(format!("threshold      = {:.6}", record.threshold));
    report.push(format!("branch         = {}", record.branch));
    if let Some(bound) = record.degree_bound {
        report.push(format!("degree bound   = {bound:.4}"));
    }
    report.data = serde_json::to_value(&record).expect("record serializes");
    Ok(report)
}

// ---------------------------------------------------------------------------
// gadgets
// ---------------------------------------------------------------------------

fn cmd_gadgets(
    input: Option<&PathBuf>,
    switch_m: u64,
    switch_d: u32,
    c: f64,
) -> Result<Report, Failure> {
    let mut report = Report::new();
    let enumeration = enumerate_interfaces();
    report.push(format!(
        "interfaces: {} admissible matrices in {} classes",
        enumeration.matrices.len(),
        enumeration.classes.len()
    ));
    for class in &enumeration.classes {
        report.push(format!(
            "class {}: representative {}",
            class.id, class.representative
        ));
    }
    let swap_only = orbits_under(MixingGroup::ParityPreserving);
    let full = orbits_under(MixingGroup::FullGl2);
    report.push(format!(
        "orbits: row-swap group {} (closed), full GL2 {} (closed: {})",
        swap_only.orbit_count, full.orbit_count, full.closed
    ));

    let trace = switching_path_widths(switch_m as f64, switch_d, c);
    report.push(format!(
        "switching trace: m={switch_m} d={switch_d} c={c} -> width {:.6}, bottom {:.6}",
        trace.width, trace.bottom
    ));

    let mut data = json!({
        "matrices": enumeration.matrices.len(),
        "classes": enumeration.classes.len(),
        "full_gl2_closed": full.closed,
        "switch": { "m": switch_m, "d": switch_d, "c": c,
                     "width": trace.width, "bottom": trace.bottom },
    });

    if let Some(path) = input {
        let gadget = parse_gadget(&read_file(path)?).map_err(|e| fail(format!("gadgets: {e}")))?;
        report.push(format!(
            "gadget tables: s1={:#010b} s2={:#010b} parity_preserving={}",
            gadget.table1, gadget.table2, gadget.parity_preserving
        ));
        for output in [1usize, 2] {
            report.push(format!(
                "output {}: alpha={} beta={:03b} core={:?}",
                output,
                u8::from(gadget.constant(output)),
                gadget.linear(output),
                gadget.core(output).iter().collect::<Vec<_>>()
            ));
        }
        if gadget.parity_preserving {
            let core = shared_core_check(&gadget).map_err(|e| fail(format!("gadgets: {e}")))?;
            report.push(format!(
                "shared core: {:?}",
                core.iter().collect::<Vec<_>>()
            ));
        }
        data["gadget"] = json!({
            "parity_preserving": gadget.parity_preserving,
            "table1": gadget.table1,
            "table2": gadget.table2,
        });
    }
    report.data = data;
    Ok(report)
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

fn cmd_pipeline(params: &BlueprintParams, measure: bool) -> Result<Report, Failure> {
    let blueprint = run_blueprint(params).map_err(|e| fail(format!("pipeline: {e}")))?;
    let mut report = Report::new();
    report.push(format!(
        "plan: epsilon={} N={} c1={} t={} bound={:.3e} target={:.3e}",
        blueprint.plan.epsilon,
        blueprint.plan.n_bits,
        blueprint.plan.c1,
        blueprint.plan.t,
        blueprint.plan.bound(),
        blueprint.plan.target()
    ));
    report.push("loss ledger:".to_string());
    for row in &blueprint.ledger.rows {
        report.push(format!(
            "  {:<22} tv {:.6}  size x{:<10.4} meta {:>3} bits | {}",
            row.label, row.tv_loss, row.size_factor, row.meta_bits, row.note
        ));
    }
    report.push(format!(
        "totals: tv {:.6}, size x{:.4}, meta {} bits",
        blueprint.totals.tv_total, blueprint.totals.size_total, blueprint.totals.meta_total
    ));

    let mut data = serde_json::to_value(&blueprint).expect("report serializes");
    if measure {
        // Desk-scale condenser measurement: 5 input bits stretched by 2 keeps
        // the image within the LP cap.
        let mu = seeded_distribution(5, 8, params.seed);
        let desk = CondenseParams {
            n_bits: 4,
            a: 1,
            locality: 2,
        };
        let cr = condensation_report(&mu, 5, &desk, 2, 4, params.seed)
            .map_err(|e| fail(format!("pipeline: condenser measurement: {e}")))?;
        report.push(format!(
            "condenser measurement (report only): {} -> {} bits, k={}, {} seeds, mean Delta {:.6}, max {:.6}",
            cr.input_bits, cr.output_bits, cr.k, cr.seeds, cr.mean_delta, cr.max_delta
        ));
        data["condenser"] = serde_json::to_value(&cr).expect("measurement serializes");
    }
    report.data = data;
    Ok(report)
}
