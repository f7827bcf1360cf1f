//! Command-line front end. [`dispatch`] maps an argument vector to an exit
//! code and a text report: 0 for a passing verdict, 1 for a verified
//! failure, 2 for usage and input errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use sharptrans::analysis::analyze;
use sharptrans::free_product::{
    fp_conjugacy_test, fp_in_tj, fp_is_involution, neumann_product, neumann_witness_search,
    neumann_witnesses, FPWord, Generators,
};
use sharptrans::io::{parse_group, parse_table, print_group, print_table};
use sharptrans::nearfield::{
    build_affine_group, build_dickson_nearfield, build_field_nearfield,
    classify_regular_linear_groups, extract_near_domain, extract_near_domain_any, is_isomorphic,
    verify_near_domain, NearStructure, Orientation,
};
use sharptrans::partial_action::{check_invariants, run_with_cadence};
use sharptrans::perm::{catalog, FiniteGroup};
use sharptrans::projective::{
    build_pgl, find_kerby_sigma, inversion, kerby_sigma_check, stabilizer_is_affine,
};
use sharptrans::{field, Error};

pub const DEFAULT_MAX_ORDER: usize = 100_000;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "sharptrans",
    version,
    about = "Sharply n-transitive groups, near-fields, and free-product partial actions",
    after_help = "Set SHARP_MAX_ORDER to change the closure cap for group files (default 100000)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a group and print or write it as a group file
    Build(BuildArgs),
    /// Check sharp n-transitivity of a group, or the axioms of a table
    Verify(VerifyArgs),
    /// Involution report of a sharply 2-transitive group
    Analyze(GroupArg),
    /// Near-field tables, or the regular linear groups of GF(q)
    Nearfield(NearfieldArgs),
    /// Word arithmetic in (C2 x F(C)) * F(N)
    Freeprod(FreeprodArgs),
    /// Run the staged partial-action construction and check it
    Construct(ConstructArgs),
    /// PGL(2, q) on the projective line
    Pgl(PglArgs),
    /// Kerby functional equation on a near-domain table
    Kerby(KerbyArgs),
    /// Read the near-domain off a sharply 2-transitive group
    Extract(ExtractArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BuildKind {
    /// AGL(1, q), or its Dickson twist with --dickson
    Agl,
    /// PGL(2, q)
    Pgl,
    /// A catalog group: S(n), A(n), C(n), D(2n), M11
    Catalog,
}

#[derive(Args, Debug)]
struct BuildArgs {
    kind: BuildKind,
    /// Catalog name, e.g. "S(4)" or M11
    name: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    /// Use the Dickson near-field of order q instead of GF(q)
    #[arg(long)]
    dickson: bool,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GroupArg {
    #[arg(long)]
    group: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "table")]
    group: Option<PathBuf>,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Transitivity degree to check for --group
    #[arg(long, default_value_t = 2)]
    sharp: usize,
}

#[derive(Args, Debug)]
struct NearfieldArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    dickson: bool,
    /// List the conjugacy classes of regular subgroups of GL(k, p), q = p^k
    #[arg(long, conflicts_with = "dickson")]
    classify: bool,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FreeprodArgs {
    #[command(subcommand)]
    op: FreeprodOp,
}

#[derive(Subcommand, Debug)]
enum FreeprodOp {
    /// Print the normal form of a word
    NormalForm { word: String },
    /// Is the word an involution?
    Involution { word: String },
    /// Are two words conjugate?
    Conjugate { u: String, v: String },
    /// Is the word in tJ?
    InTj { word: String },
    /// Search for (u, v) with (t t^u)(t t^v) outside tJ
    NeumannWitness {
        #[arg(long, default_value_t = 1)]
        radius: usize,
        /// Number of commuting generators c1, c2, ... to use
        #[arg(long, default_value_t = 1)]
        commuting: u32,
        /// Number of free generators n1, n2, ... to use
        #[arg(long, default_value_t = 1)]
        free: u32,
        /// Report every witness, not just the first
        #[arg(long)]
        all: bool,
    },
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Totalize after every k processed pairs
    #[arg(long, default_value_t = 1)]
    cadence: usize,
    /// Write a stage snapshot to this file
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PglArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    emit_group: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SigmaMode {
    Inversion,
    Search,
}

#[derive(Args, Debug)]
struct KerbyArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, value_enum, default_value_t = SigmaMode::Inversion)]
    sigma: SigmaMode,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    group: PathBuf,
    #[arg(long, default_value_t = 0)]
    zero: usize,
    #[arg(long, default_value_t = 1)]
    one: usize,
    /// canonical, swap-add, swap-mul, swap-both, or any
    #[arg(long, default_value = "canonical")]
    orientation: String,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

/// Failure modes of a command: usage or input problems, or a verified
/// negative verdict with its report.
enum Failure {
    Usage(String),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(format!("error: {e}\n"))
    }
}

type Outcome = Result<String, Failure>;

fn max_order() -> usize {
    std::env::var("SHARP_MAX_ORDER")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_ORDER)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("error: {}: {e}\n", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("error: {}: {e}\n", path.display())))
}

fn located(path: &Path, e: Error) -> Failure {
    Failure::Usage(format!("error: {}: {e}\n", path.display()))
}

fn load_group(path: &Path) -> Result<FiniteGroup, Failure> {
    parse_group(&read(path)?, max_order()).map_err(|e| located(path, e))
}

fn load_table(path: &Path) -> Result<NearStructure, Failure> {
    parse_table(&read(path)?).map_err(|e| located(path, e))
}

fn parse_word(s: &str) -> Result<FPWord, Failure> {
    s.parse().map_err(Failure::from)
}

fn need_q(q: Option<u64>) -> Result<u64, Failure> {
    q.ok_or_else(|| Failure::Usage("error: --q is required\n".into()))
}

fn near_structure(q: u64, dickson: bool) -> Result<NearStructure, Failure> {
    Ok(if dickson {
        build_dickson_nearfield(q)?
    } else {
        build_field_nearfield(q)?
    })
}

/// Writes `text` to `output`, or returns it when there is no output path.
fn emit(output: Option<&Path>, text: String, summary: String) -> Outcome {
    match output {
        Some(p) => {
            write(p, &text)?;
            Ok(summary)
        }
        None => Ok(text),
    }
}

fn cmd_build(a: BuildArgs) -> Outcome {
    let g = match a.kind {
        BuildKind::Agl => {
            let q = need_q(a.q)?;
            build_affine_group(&near_structure(q, a.dickson)?)?
        }
        BuildKind::Pgl => build_pgl(need_q(a.q)?)?,
        BuildKind::Catalog => {
            let name = a
                .name
                .ok_or_else(|| Failure::Usage("error: catalog needs a group name\n".into()))?;
            catalog(&name)?
        }
    };
    let summary = format!("degree: {}\norder: {}\n", g.degree(), g.order());
    emit(a.output.as_deref(), print_group(&g), summary)
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    if let Some(path) = a.table {
        let s = load_table(&path)?;
        let r = verify_near_domain(&s);
        let mut out = format!("order: {}\n", s.order());
        let _ = writeln!(out, "additive_associative: {}", r.additive_associative);
        let _ = writeln!(out, "near_domain: {}", r.is_near_domain());
        let _ = writeln!(out, "near_field: {}", r.is_near_field());
        return match &r.verdict {
            Ok(()) => {
                out.push_str("verdict: pass\n");
                Ok(out)
            }
            Err(f) => {
                let _ = writeln!(out, "verdict: {f}");
                Err(Failure::Verdict(out))
            }
        };
    }
    let path = a
        .group
        .ok_or_else(|| Failure::Usage("error: verify needs --group or --table\n".into()))?;
    let g = load_group(&path)?;
    let n = a.sharp;
    if n == 0 {
        return Err(Failure::Usage("error: --sharp must be at least 1\n".into()));
    }
    let mut out = format!("degree: {}\norder: {}\n", g.degree(), g.order());
    let transitive = n <= g.degree() && g.is_n_transitive(n)?;
    let sharp = transitive && g.is_sharply_n_transitive(n)?;
    if sharp {
        let _ = writeln!(out, "verdict: sharply {n}-transitive");
        Ok(out)
    } else if transitive {
        let _ = writeln!(
            out,
            "verdict: {n}-transitive but not sharply {n}-transitive"
        );
        Err(Failure::Verdict(out))
    } else {
        let _ = writeln!(out, "verdict: not {n}-transitive");
        Err(Failure::Verdict(out))
    }
}

fn cmd_analyze(a: GroupArg) -> Outcome {
    let g = load_group(&a.group)?;
    match analyze(&g) {
        Ok(r) => Ok(r.to_string()),
        Err(e @ Error::NotSharplyTransitive(_)) => Err(Failure::Verdict(format!("verdict: {e}\n"))),
        Err(e) => Err(e.into()),
    }
}

fn cmd_nearfield(a: NearfieldArgs) -> Outcome {
    if a.classify {
        let (p, k) = field::prime_power(a.q).ok_or(Error::NotPrimePower(a.q))?;
        let classes = classify_regular_linear_groups(p, k)?;
        let f = build_field_nearfield(a.q)?;
        let mut out = format!("q: {}\nclasses: {}\n", a.q, classes.len());
        for (i, c) in classes.iter().enumerate() {
            let _ = writeln!(
                out,
                "class {i}: conjugates {}, abelian {}, field {}",
                c.class_size,
                c.group.is_abelian(),
                is_isomorphic(&c.near_field, &f)
            );
        }
        return Ok(out);
    }
    let s = near_structure(a.q, a.dickson)?;
    emit(
        a.output.as_deref(),
        print_table(&s),
        format!("order: {}\n", s.order()),
    )
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn cmd_freeprod(a: FreeprodArgs) -> Outcome {
    match a.op {
        FreeprodOp::NormalForm { word } => {
            let w = parse_word(&word)?;
            Ok(format!("{w}\nsyllables: {}\n", w.syllable_len()))
        }
        FreeprodOp::Involution { word } => {
            let w = parse_word(&word)?;
            if w.is_identity() {
                return Err(Failure::Usage(
                    "error: the identity is not an involution candidate\n".into(),
                ));
            }
            let inv = fp_is_involution(&w);
            let out = format!("word: {w}\ninvolution: {}\n", yes_no(inv));
            if inv {
                Ok(out)
            } else {
                Err(Failure::Verdict(out))
            }
        }
        FreeprodOp::Conjugate { u, v } => {
            let (u, v) = (parse_word(&u)?, parse_word(&v)?);
            let c = fp_conjugacy_test(&u, &v);
            let out = format!(
                "u: {u}\nv: {v}\ncyclic_u: {}\ncyclic_v: {}\nconjugate: {}\n",
                u.cyclically_reduce(),
                v.cyclically_reduce(),
                yes_no(c)
            );
            if c {
                Ok(out)
            } else {
                Err(Failure::Verdict(out))
            }
        }
        FreeprodOp::InTj { word } => {
            let w = parse_word(&word)?;
            let m = fp_in_tj(&w);
            let out = format!("word: {w}\nin_tJ: {}\n", yes_no(m));
            if m {
                Ok(out)
            } else {
                Err(Failure::Verdict(out))
            }
        }
        FreeprodOp::NeumannWitness {
            radius,
            commuting,
            free,
            all,
        } => {
            if radius == 0 {
                return Err(Failure::Usage(
                    "error: --radius must be at least 1\n".into(),
                ));
            }
            let gens = Generators { commuting, free };
            let mut out = format!("radius: {radius}\n");
            let found = if all {
                let ws = neumann_witnesses(radius, gens);
                let _ = writeln!(out, "witnesses: {}", ws.len());
                ws.into_iter().next()
            } else {
                neumann_witness_search(radius, gens)
            };
            match found {
                Some((u, v)) => {
                    let p = neumann_product(&u, &v);
                    let tp = FPWord::t().multiply(&p);
                    let _ = writeln!(out, "witness: u = {u}, v = {v}");
                    let _ = writeln!(out, "product: {p}");
                    let _ = writeln!(out, "t*product cyclic: {}", tp.cyclically_reduce());
                    let _ = writeln!(
                        out,
                        "t*product cyclic syllables: {}",
                        tp.cyclically_reduce().syllable_len()
                    );
                    out.push_str("tJ closed: false\n");
                    Ok(out)
                }
                None => {
                    out.push_str("witness: none\n");
                    Err(Failure::Verdict(out))
                }
            }
        }
    }
}

fn cmd_construct(a: ConstructArgs) -> Outcome {
    if a.depth == 0 {
        return Err(Failure::Usage("error: --depth must be at least 1\n".into()));
    }
    let s = run_with_cadence(a.steps, a.seed, a.cadence)?;
    if let Some(path) = &a.snapshot {
        write(path, &s.to_snapshot())?;
    }
    let r = check_invariants(&s, a.depth)?;
    let mut out = format!(
        "steps: {}\nseed: {}\npoints: {}\ncommuting_generators: {}\nfree_generators: {}\njoined: {}\n",
        s.step_count(),
        s.seed(),
        s.points(),
        s.commuting_count(),
        s.free_count(),
        s.joined().len()
    );
    out.push_str(&r.to_string());
    if r.passed() {
        Ok(out)
    } else {
        Err(Failure::Verdict(out))
    }
}

fn cmd_pgl(a: PglArgs) -> Outcome {
    let g = build_pgl(a.q)?;
    if let Some(p) = &a.emit_group {
        write(p, &print_group(&g))?;
    }
    let affine = stabilizer_is_affine(a.q)?;
    let out = format!(
        "q: {}\ndegree: {}\norder: {}\nsharply_3_transitive: {}\nstabilizer_is_affine: {}\n",
        a.q,
        g.degree(),
        g.order(),
        yes_no(g.is_sharply_n_transitive(3)?),
        yes_no(affine)
    );
    if affine {
        Ok(out)
    } else {
        Err(Failure::Verdict(out))
    }
}

fn fmt_sigma(s: &[usize]) -> String {
    s.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_kerby(a: KerbyArgs) -> Outcome {
    let d = load_table(&a.table)?;
    if !verify_near_domain(&d).is_near_domain() {
        return Err(Failure::Usage("error: table is not a near-domain\n".into()));
    }
    match a.sigma {
        SigmaMode::Inversion => {
            let sigma = inversion(&d);
            let r = kerby_sigma_check(&d, &sigma)?;
            let opt = |o: Option<usize>| o.map_or("none".to_string(), |x| x.to_string());
            let mut out = format!("sigma: {}\n", fmt_sigma(&sigma));
            let _ = writeln!(out, "involutory: {}", yes_no(r.involutory.is_none()));
            let _ = writeln!(
                out,
                "multiplicative: {}",
                yes_no(r.multiplicative.is_none())
            );
            let _ = writeln!(out, "equation_counterexample: {}", opt(r.equation));
            if r.variants_differ() {
                let _ = writeln!(
                    out,
                    "equation_left_counterexample: {}",
                    opt(r.equation_left)
                );
            }
            let _ = writeln!(out, "literal_zero_counterexample: {}", opt(r.literal_zero));
            let _ = writeln!(out, "holds: {}", yes_no(r.holds()));
            if r.holds() {
                Ok(out)
            } else {
                Err(Failure::Verdict(out))
            }
        }
        SigmaMode::Search => {
            let found = find_kerby_sigma(&d)?;
            let mut out = format!("solutions: {}\n", found.len());
            for s in &found {
                let _ = writeln!(out, "sigma: {}", fmt_sigma(s));
            }
            if found.is_empty() {
                Err(Failure::Verdict(out))
            } else {
                Ok(out)
            }
        }
    }
}

fn cmd_extract(a: ExtractArgs) -> Outcome {
    let g = load_group(&a.group)?;
    let (o, s) = if a.orientation == "any" {
        extract_near_domain_any(&g, a.zero, a.one)
    } else {
        let o = Orientation::from_name(&a.orientation).ok_or_else(|| {
            Failure::Usage(format!("error: unknown orientation `{}`\n", a.orientation))
        })?;
        extract_near_domain(&g, a.zero, a.one, o).map(|s| (o, s))
    }
    .map_err(|e| match e {
        Error::Axiom(_) | Error::NotSharplyTransitive(_) => {
            Failure::Verdict(format!("verdict: {e}\n"))
        }
        e => e.into(),
    })?;
    let r = verify_near_domain(&s);
    let summary = format!(
        "orientation: {}\norder: {}\nnear_field: {}\n",
        o.name(),
        s.order(),
        yes_no(r.is_near_field())
    );
    emit(a.output.as_deref(), print_table(&s), summary)
}

/// Runs one command line. `args[0]` is the program name.
pub fn dispatch<I, S>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            return (code, e.render().to_string());
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Nearfield(a) => cmd_nearfield(a),
        Command::Freeprod(a) => cmd_freeprod(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Pgl(a) => cmd_pgl(a),
        Command::Kerby(a) => cmd_kerby(a),
        Command::Extract(a) => cmd_extract(a),
    };
    match outcome {
        Ok(text) => (EXIT_PASS, text),
        Err(Failure::Verdict(text)) => (EXIT_FAIL, text),
        Err(Failure::Usage(text)) => (EXIT_USAGE, text),
    }
}
