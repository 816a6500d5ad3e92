//! `cyclelab`: build, verify and transform the objects of `cyclelab-core`
//! from the command line.
//!
//! Exit status: 0 verified, 1 property violated (witness printed), 2 usage or
//! input error, 3 budget exceeded.

mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use cyclelab_core::behrend::{behrend_construct, verify_equation_free, EquationCheck};
use cyclelab_core::cwgen::{
    cw_construct, cw_expectation_report, verify_partition_unique, CwConfig, CwResult, PartitionCheck,
};
use cyclelab_core::gadgets::{construct_a, construct_b, verify_gadget, GadgetCheck, MatrixFamily};
use cyclelab_core::pmf::{
    balanced_to_pmf, concat_pmf, diag_pmf, globalize_to_local, pmf_to_exponent, sunflower_to_pmf, verify_global_pmf,
    verify_local_pmf, verify_usp, GlobalCheck, LocalPmf, PmfCheck, UspCheck, UspCollection, GLOBALIZE_BUDGET,
    USP_BUDGET,
};
use cyclelab_core::search::{resume, search, SearchConfig, SearchState, Target};
use cyclelab_core::tester::{
    count_cycles, count_unordered_cycles, disjoint_cycle_lower_bound, exact_distance, extend_domain, g_exponent,
    lower_bound_exponent, pmf_to_instance, reduce_to_single, rejection_probability, simulate_canonical, zero_tester,
    CycleInstance,
};
use cyclelab_core::zvectors::{find_sunflower, recode_base, two_symbol_property, ZVecCollection};
use cyclelab_core::{Vector, DEFAULT_BUDGET};

use manifest::{FileDigest, RunManifest};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "cyclelab",
    version,
    about = "Lower-bound constructions for testing k-cycle-freeness"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Work limit for exhaustive scans and searches [default: 10^8; 720
    /// permutations for `pmf globalize`, (6!)^3 for `pmf usp`].
    #[arg(long, global = true, env = "CYCLELAB_BUDGET")]
    budget: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Where to write the run manifest (default: next to --out, else stderr).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Matrix gadget families.
    #[command(subcommand)]
    Gadget(GadgetCmd),
    /// Sunflower-free and two-symbol collections.
    #[command(subcommand)]
    Sunflower(SunflowerCmd),
    /// Local perfect-matching-free families.
    #[command(subcommand)]
    Pmf(PmfCmd),
    /// Equation-free integer sets.
    #[command(subcommand)]
    Behrend(BehrendCmd),
    /// Randomized balanced collections with unique partitions.
    #[command(subcommand)]
    Cw(CwCmd),
    /// Cycle instances and the canonical tester.
    #[command(subcommand)]
    Tester(TesterCmd),
    /// Query-complexity exponents.
    #[command(subcommand)]
    Exponent(ExponentCmd),
}

#[derive(Debug, Args, Serialize)]
struct InArg {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct OutArg {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum KindArg {
    A,
    B,
}

#[derive(Debug, Subcommand, Serialize)]
enum GadgetCmd {
    Construct {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = KindArg::A)]
        kind: KindArg,
        #[command(flatten)]
        out: OutArg,
    },
    Verify {
        #[command(flatten)]
        input: InArg,
    },
}

#[derive(Debug, Subcommand, Serialize)]
enum SunflowerCmd {
    /// Report the first 3-sunflower, or the first tuple violating the
    /// two-symbol property when --k is given.
    Find {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Exhaustive search for a largest collection.
    Search {
        #[arg(long = "D", required_unless_present = "resume")]
        d: Option<u32>,
        #[arg(long, required_unless_present = "resume")]
        n: Option<usize>,
        /// Search for the two-symbol property with this k instead.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        no_symmetry: bool,
        /// Write the resumable search state here.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from a checkpoint (ignores --D, --n, --k).
        #[arg(long)]
        resume: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Rewrite every symbol as base-q digits.
    Recode {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum Transform {
    /// Gadget columns from F_{p^(k-1)}; input over Z_{p^(k-1)}.
    Sunflower,
    /// (x, x, x) for a sunflower-free collection over Z_3.
    Diag,
    /// Class indicators of balanced vectors with unique partitions.
    Balanced,
}

#[derive(Debug, Subcommand, Serialize)]
enum PmfCmd {
    Transform {
        #[command(flatten)]
        input: InArg,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Transform::Sunflower)]
        mode: Transform,
        #[command(flatten)]
        out: OutArg,
    },
    Verify {
        #[command(flatten)]
        input: InArg,
        /// Check the permutation (global) condition instead.
        #[arg(long)]
        global: bool,
    },
    Concat {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    Exponent {
        #[command(flatten)]
        input: InArg,
    },
    /// One tuple per permutation of a global PMF.
    Globalize {
        #[command(flatten)]
        input: InArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Verify a (strong) uniquely solvable puzzle.
    Usp {
        #[command(flatten)]
        input: InArg,
    },
}

#[derive(Debug, Subcommand, Serialize)]
enum BehrendCmd {
    Build {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        m: u64,
        #[command(flatten)]
        out: OutArg,
    },
    Verify {
        #[command(flatten)]
        input: InArg,
        /// Arity; defaults to the `r` stored in the input.
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        modulus: Option<u64>,
    },
}

#[derive(Debug, Args, Serialize)]
struct CwArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    /// Override the default multiplier in the choice of M.
    #[arg(long)]
    c_k: Option<f64>,
    #[arg(long, default_value_t = 16)]
    trials: usize,
}

#[derive(Debug, Subcommand, Serialize)]
enum CwCmd {
    Build {
        #[command(flatten)]
        cfg: CwArgs,
        #[command(flatten)]
        out: OutArg,
    },
    Report {
        #[command(flatten)]
        cfg: CwArgs,
    },
    /// Check that only equal tuples partition the ground set.
    Verify {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
enum TesterCmd {
    /// Instance whose supports are the PMF positions.
    FromPmf {
        #[command(flatten)]
        input: InArg,
        #[command(flatten)]
        out: OutArg,
    },
    Count {
        #[command(flatten)]
        input: InArg,
        /// Count cycles as sets (multisets in single mode).
        #[arg(long)]
        unordered: bool,
    },
    Prob {
        #[command(flatten)]
        input: InArg,
    },
    Simulate {
        #[command(flatten)]
        input: InArg,
        #[arg(long, default_value_t = 100_000)]
        iterations: u64,
    },
    Distance {
        #[command(flatten)]
        input: InArg,
        /// Only the greedy disjoint-cycle lower bound.
        #[arg(long)]
        lower_bound: bool,
    },
    Reduce {
        #[command(flatten)]
        input: InArg,
        #[command(flatten)]
        out: OutArg,
    },
    Extend {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        n_target: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// One-sided test for the all-zero function.
    Zero {
        /// JSON `{"p", "n", "support"}` or a single-mode instance.
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        eps: f64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
enum ExponentCmd {
    /// Exponent from a local PMF capacity d.
    Alpha {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        d: f64,
    },
    /// Exponent from capacity 2^{H(1/k)}.
    G {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: u32,
    },
}

#[derive(Debug, Deserialize)]
struct SetInput {
    r: Option<u32>,
    elements: Vec<u64>,
}

#[derive(Debug, Deserialize)]
struct ZeroInput {
    p: u32,
    n: usize,
    support: Vec<Vector>,
}

#[derive(Debug, Serialize)]
struct Verdict<T: Serialize> {
    ok: bool,
    #[serde(flatten)]
    detail: T,
}

enum Outcome {
    Ok,
    Violation,
}

struct Ctx {
    format: Format,
    seed: u64,
    budget: u64,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    stdout: String,
    first_out: Option<PathBuf>,
}

impl Ctx {
    fn read<T: DeserializeOwned>(&mut self, path: &Path) -> anyhow::Result<T> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileDigest::of_bytes(path, &bytes));
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }

    /// A collection, bare or wrapped in a `cw build` result or search report.
    fn read_collection(&mut self, path: &Path) -> anyhow::Result<ZVecCollection> {
        let mut value: serde_json::Value = self.read(path)?;
        for key in ["collection", "best"] {
            if let Some(inner) = value.get_mut(key) {
                value = inner.take();
                break;
            }
        }
        serde_json::from_value(value).with_context(|| format!("parsing collection in {}", path.display()))
    }

    fn write_file(&mut self, path: &Path, text: &str) -> anyhow::Result<()> {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(FileDigest::of_bytes(path, text.as_bytes()));
        self.first_out.get_or_insert_with(|| path.to_path_buf());
        Ok(())
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        if !line.as_ref().ends_with('\n') {
            self.stdout.push('\n');
        }
    }

    /// JSON goes to `out` when given, else to stdout in JSON format; the text
    /// summary is printed in text format.
    fn emit<T: Serialize>(&mut self, out: &OutArg, value: &T, text: String) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(value)? + "\n";
        match &out.out {
            Some(path) => {
                self.write_file(path, &json)?;
                if self.format == Format::Text {
                    self.say(text);
                }
            }
            None => match self.format {
                Format::Json => self.say(json),
                Format::Text => self.say(text),
            },
        }
        Ok(())
    }

    fn report<T: Serialize>(&mut self, value: &T, text: String) -> anyhow::Result<()> {
        self.emit(&OutArg { out: None }, value, text)
    }

    fn verdict<T: Serialize>(&mut self, ok: bool, detail: T, text: String) -> anyhow::Result<Outcome> {
        self.report(&Verdict { ok, detail }, text)?;
        Ok(if ok { Outcome::Ok } else { Outcome::Violation })
    }
}

fn show(v: &[u32]) -> String {
    format!("({})", v.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
}

fn show_all(vs: &[Vector]) -> String {
    vs.iter().map(|v| show(v)).collect::<Vec<_>>().join(" ")
}

fn run(cli: &Cli, ctx: &mut Ctx) -> anyhow::Result<Outcome> {
    let budget = ctx.budget;
    match &cli.command {
        Command::Gadget(cmd) => match cmd {
            GadgetCmd::Construct { p, k, kind, out } => {
                let fam = match kind {
                    KindArg::A => construct_a(*p, *k)?,
                    KindArg::B => construct_b(*p, *k)?,
                };
                let text = format!(
                    "{} matrices of kind {:?} over F_{p} (k = {k})",
                    fam.matrices.len(),
                    fam.kind
                );
                ctx.emit(out, &fam, text)?;
                Ok(Outcome::Ok)
            }
            GadgetCmd::Verify { input } => {
                let fam: MatrixFamily = ctx.read(&input.input)?;
                let check = verify_gadget(&fam)?;
                let text = match &check {
                    GadgetCheck::Ok => format!("ok: {} gadget family verified", fam.matrices.len()),
                    GadgetCheck::NonzeroColumnSum { i } => format!("violation: matrix {i} has nonzero column sum"),
                    GadgetCheck::Witness { i, j, subset } => {
                        format!("violation: matrices {i} and {j} collide on columns {subset:?}")
                    }
                };
                let ok = check.is_ok();
                ctx.verdict(ok, check, text)
            }
        },
        Command::Sunflower(cmd) => match cmd {
            SunflowerCmd::Find { input, k } => {
                let coll = ctx.read_collection(&input.input)?;
                let witness: Option<Vec<Vector>> = match k {
                    None => find_sunflower(&coll).map(|w| w.to_vec()),
                    Some(k) => two_symbol_property(&coll, *k)?,
                };
                let text = match &witness {
                    None => format!("ok: no violating tuple among {} vectors", coll.len()),
                    Some(w) => format!("violation: {}", show_all(w)),
                };
                ctx.verdict(witness.is_none(), serde_json::json!({ "witness": witness }), text)
            }
            SunflowerCmd::Search {
                d,
                n,
                k,
                no_symmetry,
                checkpoint,
                resume: from,
                out,
            } => {
                let (report, state) = match from {
                    Some(path) => {
                        let state: SearchState = ctx.read(path)?;
                        resume(state, budget)?
                    }
                    None => {
                        let target = match k {
                            Some(k) => Target::TwoSymbol { k: *k },
                            None => Target::SunflowerFree,
                        };
                        let (Some(d), Some(n)) = (d, n) else {
                            bail!("--D and --n are required")
                        };
                        let cfg = SearchConfig {
                            symmetry: !no_symmetry,
                            seed: ctx.seed,
                            ..SearchConfig::new(*d, *n, target, budget)
                        };
                        search(&cfg)?
                    }
                };
                if let Some(path) = checkpoint {
                    ctx.write_file(path, &(serde_json::to_string_pretty(&state)? + "\n"))?;
                }
                let text = format!(
                    "size {} ({}) after {} nodes, {} subtrees pending\n{}",
                    report.best.len(),
                    if report.optimal {
                        "optimal"
                    } else {
                        "budget exhausted, greedy completion"
                    },
                    report.nodes_explored,
                    report.pending,
                    show_all(&report.best.vectors)
                );
                ctx.emit(out, &report, text)?;
                Ok(Outcome::Ok)
            }
            SunflowerCmd::Recode { input, q, out } => {
                let coll = ctx.read_collection(&input.input)?;
                let recoded = recode_base(&coll, *q)?;
                let text = format!("{} vectors of length {} over Z_{q}", recoded.len(), recoded.n);
                ctx.emit(out, &recoded, text)?;
                Ok(Outcome::Ok)
            }
        },
        Command::Pmf(cmd) => match cmd {
            PmfCmd::Transform { input, p, k, mode, out } => {
                let coll = ctx.read_collection(&input.input)?;
                let pmf = match mode {
                    Transform::Sunflower => sunflower_to_pmf(&coll, *p, *k)?,
                    Transform::Diag => diag_pmf(&coll)?,
                    Transform::Balanced => balanced_to_pmf(&coll, *p, budget)?,
                };
                let text = format!("{} tuples of {} vectors in F_{}^{}", pmf.len(), pmf.k, pmf.p, pmf.n);
                ctx.emit(out, &pmf, text)?;
                Ok(Outcome::Ok)
            }
            PmfCmd::Verify { input, global } => {
                let pmf: LocalPmf = ctx.read(&input.input)?;
                if *global {
                    let check = verify_global_pmf(&pmf, budget)?;
                    let text = match &check {
                        GlobalCheck::Ok => format!("ok: PMF with {} tuples", pmf.len()),
                        GlobalCheck::NonzeroTuple { index } => format!("violation: tuple {index} has nonzero sum"),
                        GlobalCheck::Matching { permutations } => format!("violation: permutations {permutations:?}"),
                    };
                    let ok = check == GlobalCheck::Ok;
                    return ctx.verdict(ok, check, text);
                }
                let check = verify_local_pmf(&pmf, budget)?;
                let text = match &check {
                    PmfCheck::Ok => format!("ok: local PMF with {} tuples", pmf.len()),
                    PmfCheck::NonzeroTuple { index } => format!("violation: tuple {index} has nonzero sum"),
                    PmfCheck::Cancellation { indices } => format!("violation: indices {indices:?} cancel"),
                };
                let ok = check.is_ok();
                ctx.verdict(ok, check, text)
            }
            PmfCmd::Concat { a, b, out } => {
                let a: LocalPmf = ctx.read(a)?;
                let b: LocalPmf = ctx.read(b)?;
                let pmf = concat_pmf(&a, &b)?;
                let text = format!("{} tuples in F_{}^{}", pmf.len(), pmf.p, pmf.n);
                ctx.emit(out, &pmf, text)?;
                Ok(Outcome::Ok)
            }
            PmfCmd::Exponent { input } => {
                let pmf: LocalPmf = ctx.read(&input.input)?;
                let e = pmf_to_exponent(&pmf)?;
                let text = format!("eps = {} alpha = {:.6}", e.epsilon, e.alpha);
                ctx.report(&e, text)?;
                Ok(Outcome::Ok)
            }
            PmfCmd::Globalize { input, out } => {
                let pmf: LocalPmf = ctx.read(&input.input)?;
                let local = globalize_to_local(&pmf, cli.budget.unwrap_or(GLOBALIZE_BUDGET))?;
                let text = format!("{} tuples in F_{}^{}", local.len(), local.p, local.n);
                ctx.emit(out, &local, text)?;
                Ok(Outcome::Ok)
            }
            PmfCmd::Usp { input } => {
                let usp: UspCollection = ctx.read(&input.input)?;
                let check = verify_usp(&usp, cli.budget.unwrap_or(USP_BUDGET))?;
                let text = match &check {
                    UspCheck::Ok => format!("ok: {:?} puzzle with {} rows", usp.strength, usp.vectors.len()),
                    UspCheck::Witness { permutations } => format!("violation: uncaught permutations {permutations:?}"),
                };
                let ok = check == UspCheck::Ok;
                ctx.verdict(ok, check, text)
            }
        },
        Command::Behrend(cmd) => match cmd {
            BehrendCmd::Build { r, m, out } => {
                let set = behrend_construct(*r, *m)?;
                let text = format!(
                    "{} elements in [1, {m}] with no nontrivial solution of x_1+...+x_r = r*x (r = {r})",
                    set.elements.len()
                );
                ctx.emit(out, &set, text)?;
                Ok(Outcome::Ok)
            }
            BehrendCmd::Verify { input, r, modulus } => {
                let set: SetInput = ctx.read(&input.input)?;
                let r = r.or(set.r).ok_or_else(|| anyhow!("arity missing: pass --r"))?;
                let check = verify_equation_free(&set.elements, r, *modulus, budget)?;
                let text = match &check {
                    EquationCheck::Ok => format!("ok: {} elements equation-free", set.elements.len()),
                    EquationCheck::Witness { tuple } => format!("violation: {tuple:?}"),
                };
                let ok = check.is_ok();
                ctx.verdict(ok, check, text)
            }
        },
        Command::Cw(cmd) => {
            let config = |a: &CwArgs| CwConfig {
                c_k: a.c_k,
                budget,
                ..CwConfig::new(a.k, a.n, ctx.seed, a.trials)
            };
            match cmd {
                CwCmd::Build { cfg, out } => {
                    let result: CwResult = cw_construct(&config(cfg))?;
                    let text = format!(
                        "{} balanced vectors (M = {}, |B| = {}, trial {})",
                        result.collection.len(),
                        result.diagnostics.modulus,
                        result.diagnostics.behrend.len(),
                        result.diagnostics.chosen_trial
                    );
                    ctx.emit(out, &result, text)?;
                    Ok(Outcome::Ok)
                }
                CwCmd::Report { cfg } => {
                    let r = cw_expectation_report(&config(cfg), cfg.trials)?;
                    let mut text = String::new();
                    writeln!(text, "M = {}, |B| = {}, {} trials", r.modulus, r.behrend_size, r.trials)?;
                    writeln!(text, "mean |L_i|  = {:.6} (se {:.6})", r.l.mean, r.l.standard_error)?;
                    writeln!(
                        text,
                        "mean |L'_i| = {:.6} (se {:.6})",
                        r.pruned.mean, r.pruned.standard_error
                    )?;
                    write!(
                        text,
                        "expected {} = {:.6}, deviation {:.3} se",
                        r.expected,
                        r.expected.to_f64(),
                        r.deviation
                    )?;
                    ctx.report(&r, text)?;
                    Ok(Outcome::Ok)
                }
                CwCmd::Verify { input, k } => {
                    let coll = ctx.read_collection(&input.input)?;
                    let k = k.unwrap_or(coll.d as usize);
                    let check = verify_partition_unique(&coll, k, budget)?;
                    let text = match &check {
                        PartitionCheck::Ok => format!("ok: {} vectors", coll.len()),
                        PartitionCheck::Unbalanced { vector } => format!("violation: {} is not balanced", show(vector)),
                        PartitionCheck::Witness { vectors } => format!("violation: {}", show_all(vectors)),
                    };
                    let ok = check.is_ok();
                    ctx.verdict(ok, check, text)
                }
            }
        }
        Command::Tester(cmd) => match cmd {
            TesterCmd::FromPmf { input, out } => {
                let pmf: LocalPmf = ctx.read(&input.input)?;
                let inst = pmf_to_instance(&pmf)?;
                let text = format!("instance on F_{}^{} with k = {}", inst.p, inst.n, inst.k);
                ctx.emit(out, &inst, text)?;
                Ok(Outcome::Ok)
            }
            TesterCmd::Count { input, unordered } => {
                let inst: CycleInstance = ctx.read(&input.input)?;
                let count = if *unordered {
                    count_unordered_cycles(&inst, budget)?
                } else {
                    count_cycles(&inst, budget)?
                };
                ctx.report(
                    &serde_json::json!({ "cycles": count, "unordered": unordered }),
                    count.to_string(),
                )?;
                Ok(Outcome::Ok)
            }
            TesterCmd::Prob { input } => {
                let inst: CycleInstance = ctx.read(&input.input)?;
                let prob = rejection_probability(&inst, budget)?;
                let text = format!("{prob} = {:.6e}", prob.to_f64());
                ctx.report(&serde_json::json!({ "probability": prob }), text)?;
                Ok(Outcome::Ok)
            }
            TesterCmd::Simulate { input, iterations } => {
                let inst: CycleInstance = ctx.read(&input.input)?;
                let r = simulate_canonical(&inst, *iterations, ctx.seed)?;
                let text = format!(
                    "{} hits in {} iterations (rate {:.6e}), first hit {:?}",
                    r.hits, r.iterations, r.empirical_rate, r.first_hit
                );
                ctx.report(&r, text)?;
                Ok(Outcome::Ok)
            }
            TesterCmd::Distance { input, lower_bound } => {
                let inst: CycleInstance = ctx.read(&input.input)?;
                if *lower_bound {
                    let lb = disjoint_cycle_lower_bound(&inst, budget)?;
                    ctx.report(
                        &serde_json::json!({ "disjoint_cycles": lb }),
                        format!("at least {lb} changes"),
                    )?;
                } else {
                    let d = exact_distance(&inst, budget)?;
                    let text = format!("{} changes, eps = {} over {} cycles", d.changes, d.epsilon, d.cycles);
                    ctx.report(&d, text)?;
                }
                Ok(Outcome::Ok)
            }
            TesterCmd::Reduce { input, out } => {
                let inst: CycleInstance = ctx.read(&input.input)?;
                let single = reduce_to_single(&inst)?;
                let text = format!(
                    "single function on F_{}^{} with {} support points",
                    single.p,
                    single.n,
                    single.supports[0].len()
                );
                ctx.emit(out, &single, text)?;
                Ok(Outcome::Ok)
            }
            TesterCmd::Extend { input, n_target, out } => {
                let inst: CycleInstance = ctx.read(&input.input)?;
                let ext = extend_domain(&inst, *n_target)?;
                let text = format!("instance on F_{}^{}", ext.p, ext.n);
                ctx.emit(out, &ext, text)?;
                Ok(Outcome::Ok)
            }
            TesterCmd::Zero { input, eps } => {
                let value: serde_json::Value = ctx.read(&input.input)?;
                let f = if value.get("supports").is_some() {
                    let inst: CycleInstance = serde_json::from_value(value).context("parsing instance")?;
                    if !inst.single_mode {
                        bail!("the zero tester takes a single function: pass a single-mode instance");
                    }
                    ZeroInput { p: inst.p, n: inst.n, support: inst.supports.into_iter().next().unwrap_or_default() }
                } else {
                    serde_json::from_value(value).context("parsing function")?
                };
                let r = zero_tester(&f.support, f.p, f.n, *eps, ctx.seed)?;
                let text = if r.accept {
                    format!("accept after {} queries", r.queries)
                } else {
                    format!("reject at query {}", r.first_hit.unwrap_or_default())
                };
                ctx.report(&r, text)?;
                Ok(if r.accept { Outcome::Ok } else { Outcome::Violation })
            }
        },
        Command::Exponent(cmd) => match cmd {
            ExponentCmd::Alpha { k, p, d } => {
                let alpha = lower_bound_exponent(*k, *p, *d)?;
                ctx.report(&serde_json::json!({ "alpha": alpha }), format!("{alpha:.6}"))?;
                Ok(Outcome::Ok)
            }
            ExponentCmd::G { k, p } => {
                let g = g_exponent(*k, *p)?;
                ctx.report(&serde_json::json!({ "g": g }), format!("{g:.6}"))?;
                Ok(Outcome::Ok)
            }
        },
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<cyclelab_core::Error>() {
        Some(cyclelab_core::Error::Budget { .. }) => 3,
        Some(cyclelab_core::Error::Precondition { .. }) => 1,
        _ => 2,
    }
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        bail!("--threads must be positive");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut ctx = Ctx {
        format: cli.format,
        seed: cli.seed,
        budget: cli.budget.unwrap_or(DEFAULT_BUDGET),
        inputs: Vec::new(),
        outputs: Vec::new(),
        stdout: String::new(),
        first_out: None,
    };
    let ctx_budget = ctx.budget;
    let code = match configure_threads(cli.threads).and_then(|()| run(&cli, &mut ctx)) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Violation) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(ctx.stdout.as_bytes());
    let _ = stdout.flush();

    let manifest = RunManifest {
        command: argv.iter().skip(1).cloned().collect(),
        parameters: serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null),
        seed: cli.seed,
        budget: ctx_budget,
        threads: cli.threads,
        parallel: cyclelab_core::exec::is_parallel(),
        inputs: ctx.inputs,
        outputs: ctx.outputs,
        stdout_sha256: FileDigest::of_bytes(Path::new("-"), ctx.stdout.as_bytes()).sha256,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        exit_code: code,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let body = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
    let target = cli.manifest.clone().or_else(|| {
        ctx.first_out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match target {
        Some(path) => {
            if let Err(e) = fs::write(&path, body) {
                eprintln!("error: writing manifest {}: {e}", path.display());
            }
        }
        None => eprint!("{body}"),
    }
    ExitCode::from(code)
}
