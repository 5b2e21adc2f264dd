mod recipe;
mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcsp_core::boolean::{self, BoolRelation};
use qcsp_core::catalog::{self, Payload};
use qcsp_core::format::{parse_gadget, parse_qfun, parse_relation, write_gadget, write_qfun, write_structure};
use qcsp_core::gadgets::{build_qdef, check_c1, check_c2, check_q1, check_q2, CommGadget};
use qcsp_core::qfun::set_dim_cap;
use qcsp_core::qhom::{find_bifurcation, is_quantum_polymorphism, verify, Mode, QHomCandidate, VerificationReport};
use qcsp_core::reduce::{compile, stamp};
use qcsp_core::structures::{GadgetSpec, Structure};
use qcsp_core::{Error, QFun};
use serde_json::json;

use recipe::{load_structure, read};
use report::Report;

type Q = num_rational::BigRational;

#[derive(Parser)]
#[command(name = "qcsp", version, about = "Quantum homomorphisms, gadgets and reductions over finite structures")]
struct Cli {
    /// Write a JSON-lines report of verdicts and witnesses.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Worker threads for parallel checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Oracular,
    Nonoracular,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Oracular => Mode::Oracular,
            ModeArg::Nonoracular => Mode::NonOracular,
        }
    }
}

#[derive(Args)]
struct CandidateArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    qfun: PathBuf,
    #[arg(long, value_enum, default_value = "oracular")]
    mode: ModeArg,
}

#[derive(Subcommand)]
enum Command {
    /// Check QH1 (and QH2 in oracular mode) for a quantum function.
    Verify(CandidateArgs),
    /// Check a quantum function `Aⁿ ⇒ A` as an n-ary quantum polymorphism.
    Polymorphism {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        qfun: PathBuf,
        #[arg(long, value_enum, default_value = "oracular")]
        mode: ModeArg,
    },
    /// Exit 0 when all measurements commute, 1 with a witness otherwise.
    Contextual {
        #[arg(long)]
        qfun: PathBuf,
    },
    /// Search for a bifurcation in a verified candidate.
    Bifurcation(CandidateArgs),
    /// Check c1/c2 for a commutativity gadget, or q1/q2 when `--relation` is given.
    GadgetCheck {
        #[arg(long)]
        gadget: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Tuples of the relation to define, e.g. "(0 1) (1 0)".
        #[arg(long)]
        relation: Option<String>,
        /// Candidate quantum functions from the gadget to the target.
        #[arg(long)]
        qfun: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "oracular")]
        mode: ModeArg,
    },
    /// Glue a commutativity gadget onto a classical gadget.
    QdefBuild {
        #[arg(long)]
        gadget: PathBuf,
        #[arg(long)]
        comm: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        relation: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile an instance through a gadget recipe.
    Reduce {
        #[arg(value_enum)]
        action: Option<ReduceAction>,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        recipe: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// One commutativity gadget per unordered adjacent pair instead of per ordered pair.
        #[arg(long)]
        dedupe_pairs: bool,
        /// Defaults to the instance path with extension `reduced.struct`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boolean structures.
    Boolean {
        #[command(subcommand)]
        command: BooleanCommand,
    },
    /// Built-in structures, gadgets and quantum functions.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceAction {
    Compile,
}

#[derive(Subcommand)]
enum BooleanCommand {
    /// Decide whether a relation is a translate of 1-in-k.
    Classify {
        #[arg(long)]
        arity: usize,
        /// Tuples as bit strings, e.g. 100 010 001.
        tuples: Vec<String>,
    },
    /// Pairs of subsets whose measurements must commute in any n-ary quantum polymorphism.
    Cover {
        #[arg(long)]
        n: usize,
    },
    /// Build and verify the default 4-ary contextual polymorphism.
    Arity4,
}

#[derive(Subcommand)]
enum CatalogCommand {
    List,
    /// Write entries as text files.
    Export {
        names: Vec<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Ok(cap) = std::env::var("QCSP_DIM_CAP") {
        set_dim_cap(
            cap.trim().parse().with_context(|| format!("QCSP_DIM_CAP must be a positive integer, got `{cap}`"))?,
        );
    }
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut report = Report::open(cli.report.as_deref())?;
    let ok = dispatch(cli.command, &mut report)?;
    report.finish()?;
    Ok(ok)
}

fn load_qfun(path: &Path) -> Result<QFun> {
    parse_qfun(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_gadget(path: &Path) -> Result<(GadgetSpec, Option<qcsp_core::gadgets::Certificate>)> {
    parse_gadget(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_candidate(args: &CandidateArgs) -> Result<QHomCandidate<Q>> {
    let source = load_structure(&args.source)?;
    let target = load_structure(&args.target)?;
    Ok(QHomCandidate::new(source, target, load_qfun(&args.qfun)?, args.mode.into())?)
}

fn print_violations(r: &VerificationReport<Q>, c: &QHomCandidate<Q>, report: &mut Report) -> Result<()> {
    let (x, a) = (&c.source, &c.target);
    let labels = |s: &Structure, t: &[usize]| t.iter().map(|&v| s.label(v).to_string()).collect::<Vec<_>>();
    for v in &r.qh1_violations {
        let (xt, at) = (labels(x, &v.source_tuple), labels(a, &v.target_tuple));
        let sym = x.signature().name(v.symbol);
        println!("  QH1 {sym}: ({}) -> ({}) has nonzero product", xt.join(" "), at.join(" "));
        report.record(json!({ "violation": "QH1", "symbol": sym, "source": xt, "target": at, "product": report::matrix(&v.product) }))?;
    }
    for v in &r.qh2_violations {
        let (s, t) = (x.label(v.a), x.label(v.a2));
        let (b, b2) = (a.label(v.b), a.label(v.b2));
        println!("  QH2 [Q({s},{b}), Q({t},{b2})] != 0");
        report.record(json!({ "violation": "QH2", "a": s, "b": b, "a2": t, "b2": b2, "commutator": report::matrix(&v.commutator) }))?;
    }
    Ok(())
}

fn verdict(verb: &str, ok: bool, report: &mut Report, extra: serde_json::Value) -> Result<bool> {
    let mut record = json!({ "verb": verb, "result": if ok { "pass" } else { "fail" } });
    if let (Some(r), serde_json::Value::Object(e)) = (record.as_object_mut(), extra) {
        r.extend(e);
    }
    report.record(record)?;
    Ok(ok)
}

fn dispatch(command: Command, report: &mut Report) -> Result<bool> {
    match command {
        Command::Verify(args) => {
            let c = load_candidate(&args)?;
            let r = verify(&c);
            println!(
                "{} => {} ({}, d={}): {}",
                c.source.name(),
                c.target.name(),
                c.mode.name(),
                c.qf.dim(),
                if r.passed() { "PASS" } else { "FAIL" }
            );
            print_violations(&r, &c, report)?;
            verdict("verify", r.passed(), report, json!({ "mode": c.mode.name(), "dim": c.qf.dim() }))
        }
        Command::Polymorphism { structure, arity, qfun, mode } => {
            let a = load_structure(&structure)?;
            let qf = load_qfun(&qfun)?;
            let r = is_quantum_polymorphism(&a, arity, &qf, mode.into())?;
            let power = qcsp_core::structures::direct_power(&a, arity)?;
            let c = QHomCandidate::new(power, a.clone(), qf, mode.into())?;
            println!("{arity}-ary quantum polymorphism of {}: {}", a.name(), if r.passed() { "PASS" } else { "FAIL" });
            print_violations(&r, &c, report)?;
            verdict("polymorphism", r.passed(), report, json!({ "structure": a.name(), "arity": arity }))
        }
        Command::Contextual { qfun } => {
            let qf = load_qfun(&qfun)?;
            match qf.contextuality_witness() {
                None => {
                    let dec = qf.decompose_noncontextual()?;
                    println!("non-contextual: direct sum of {} classical functions", dec.components.len());
                    let comps: Vec<Vec<&str>> =
                        dec.components.iter().map(|m| m.iter().map(|&b| qf.target()[b].as_str()).collect()).collect();
                    verdict("contextual", true, report, json!({ "components": comps }))
                }
                Some(w) => {
                    let (a, b, a2, b2) = (&qf.source()[w.a], &qf.target()[w.b], &qf.source()[w.a2], &qf.target()[w.b2]);
                    println!("contextual: [Q({a},{b}), Q({a2},{b2})] != 0");
                    verdict(
                        "contextual",
                        false,
                        report,
                        json!({ "witness": { "a": a, "b": b, "a2": a2, "b2": b2, "commutator": report::matrix(&w.commutator) } }),
                    )
                }
            }
        }
        Command::Bifurcation(args) => {
            let c = load_candidate(&args)?;
            if !verify(&c).passed() {
                bail!("the candidate does not verify in {} mode", c.mode.name());
            }
            if !c.source.is_connected() {
                println!("no bifurcation: {} is disconnected", c.source.name());
                return verdict("bifurcation", false, report, json!({ "reason": "disconnected source" }));
            }
            match find_bifurcation(&c)? {
                Some(b) => {
                    let path: Vec<&str> = b.path.iter().map(|&v| c.source.label(v)).collect();
                    let elems: Vec<(String, String)> = b
                        .elements()
                        .iter()
                        .map(|&(x, a)| (c.source.label(x).to_string(), c.target.label(a).to_string()))
                        .collect();
                    println!("bifurcation of length {} along {}", b.length(), path.join(" "));
                    verdict(
                        "bifurcation",
                        true,
                        report,
                        json!({ "length": b.length(), "path": path, "elements": elems }),
                    )
                }
                None => {
                    println!("no bifurcation");
                    verdict("bifurcation", false, report, json!({}))
                }
            }
        }
        Command::GadgetCheck { gadget, target, relation, qfun, mode } => {
            let (g, inherited) = load_gadget(&gadget)?;
            let a = load_structure(&target)?;
            let mode: Mode = mode.into();
            let candidates = qfun
                .iter()
                .map(|p| Ok(QHomCandidate::new(g.structure.clone(), a.clone(), load_qfun(p)?, mode)?))
                .collect::<Result<Vec<_>>>()?;
            match relation {
                None => {
                    let h = CommGadget::new(g)?;
                    let c1 = check_c1(&h, &a)?;
                    let c2 = check_c2(&h, &a, &candidates, mode)?;
                    println!("c1: {} ({} pairs checked)", if c1.holds() { "holds" } else { "fails" }, c1.checked);
                    for t in &c1.failures {
                        println!("  no extension for ({})", labels(&a, t));
                    }
                    println!("c2: {c2}");
                    let ok = c1.holds() && c2.kind.is_pass();
                    verdict("gadget-check", ok, report, json!({ "c1": c1.holds(), "c2": report::certificate(&c2) }))
                }
                Some(text) => {
                    let s = parse_relation(&text, &a, g.arity())?;
                    let q1 = check_q1(&g, &a, &s)?;
                    let q2 = check_q2(&g, &a, &s, &candidates, mode, inherited.as_ref())?;
                    println!("q1: {} ({} tuples checked)", if q1.holds() { "holds" } else { "fails" }, q1.checked);
                    for t in &q1.failures {
                        println!("  no extension for ({})", labels(&a, t));
                    }
                    println!("q2: {q2}");
                    let ok = q1.holds() && q2.kind.is_pass();
                    verdict("gadget-check", ok, report, json!({ "q1": q1.holds(), "q2": report::certificate(&q2) }))
                }
            }
        }
        Command::QdefBuild { gadget, comm, target, relation, out } => {
            let (g, _) = load_gadget(&gadget)?;
            let (h, _) = load_gadget(&comm)?;
            let a = load_structure(&target)?;
            let s = parse_relation(&relation, &a, g.arity())?;
            match build_qdef(&g, &CommGadget::new(h)?, &a, &s) {
                Ok(q) => {
                    write(&out, &write_gadget(&q.gadget, Some(&q.certificate)))?;
                    println!("wrote {} ({} elements): {}", out.display(), q.gadget.structure.size(), q.certificate);
                    verdict("qdef-build", true, report, json!({ "certificate": report::certificate(&q.certificate) }))
                }
                Err(Error::Precondition(msg)) => {
                    println!("not built: {msg}");
                    verdict("qdef-build", false, report, json!({ "reason": msg }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Reduce { action: _, instance, recipe, mode, dedupe_pairs, out } => {
            let x = load_structure(&instance)?;
            let mut loaded = recipe::load(&recipe, x.signature(), mode.map(Mode::from), dedupe_pairs)?;
            if let Some((b, a)) = &loaded.certify {
                loaded.recipe.certify(b, a)?;
            }
            let y = compile(&x, &loaded.recipe)?;
            let out = out.unwrap_or_else(|| instance.with_extension("reduced.struct"));
            write(&out, &write_structure(&y.instance))?;
            let sidecar = PathBuf::from(format!("{}.provenance", out.display()));
            let mut prov = String::new();
            for (v, origins) in y.provenance.iter().enumerate() {
                let tags: Vec<String> = origins.iter().map(ToString::to_string).collect();
                prov.push_str(&format!("{}\t{}\n", y.instance.label(v), tags.join(" ")));
            }
            write(&sidecar, &prov)?;
            println!(
                "wrote {} ({} elements, {} tuples, {}) and {}",
                out.display(),
                y.instance.size(),
                y.instance.tuple_count(),
                stamp(&y),
                sidecar.display()
            );
            let certs: Vec<_> =
                loaded.recipe.certificates.iter().map(|c| c.as_ref().map(report::certificate)).collect();
            verdict(
                "reduce",
                true,
                report,
                json!({
                    "mode": loaded.recipe.mode.name(),
                    "size": y.instance.size(),
                    "stamp": stamp(&y),
                    "certificates": certs,
                    "comm_certificate": loaded.recipe.comm_certificate.as_ref().map(report::certificate),
                }),
            )
        }
        Command::Boolean { command } => boolean_command(command, report),
        Command::Catalog { command } => catalog_command(command, report),
    }
}

fn labels(a: &Structure, t: &[usize]) -> String {
    t.iter().map(|&v| a.label(v)).collect::<Vec<_>>().join(" ")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn boolean_command(command: BooleanCommand, report: &mut Report) -> Result<bool> {
    match command {
        BooleanCommand::Classify { arity, tuples } => {
            let strs: Vec<&str> = tuples.iter().map(String::as_str).collect();
            let r = BoolRelation::from_strs(arity, &strs)?;
            let triple = r.property_triple();
            let translate = r.classify_translate();
            println!("relation {r}");
            println!("  no majority: {}", !r.majority_preserves());
            println!("  full binary projection: {}", r.has_full_binary_projection());
            println!("  proper projections majority-closed: {}", r.proper_projections_majority_closed());
            match translate {
                Some(t) => println!("translate of 1-in-{arity} by {}", r.format_tuple(t)),
                None => println!("not a translate of 1-in-{arity}"),
            }
            let t = translate.map(|t| r.format_tuple(t));
            verdict(
                "boolean classify",
                translate.is_some(),
                report,
                json!({ "property_triple": triple, "translate": t }),
            )
        }
        BooleanCommand::Cover { n } => {
            let cover = boolean::forced_commutation_cover(n);
            for (s, t) in &cover {
                println!("{s:?} {t:?}");
            }
            println!("{} forced pairs", cover.len());
            verdict("boolean cover", !cover.is_empty(), report, json!({ "n": n, "pairs": cover }))
        }
        BooleanCommand::Arity4 => {
            let c = catalog::b4_contextual()?;
            let r = verify(&c);
            let w = c.qf.contextuality_witness();
            println!("4-ary quantum polymorphism of {}: {}", c.target.name(), if r.passed() { "PASS" } else { "FAIL" });
            if let Some(w) = &w {
                println!(
                    "contextual: [Q({},{}), Q({},{})] != 0",
                    c.source.label(w.a),
                    c.target.label(w.b),
                    c.source.label(w.a2),
                    c.target.label(w.b2)
                );
            }
            verdict("boolean arity4", r.passed() && w.is_some(), report, json!({ "contextual": w.is_some() }))
        }
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .filter_map(|c| match c {
            '(' | ',' => Some('_'),
            ')' => None,
            c => Some(c),
        })
        .collect()
}

fn catalog_command(command: CatalogCommand, report: &mut Report) -> Result<bool> {
    match command {
        CatalogCommand::List => {
            for (name, description) in catalog::list() {
                println!("{name:<24} {description}");
            }
            Ok(true)
        }
        CatalogCommand::Export { names, all, out_dir } => {
            let mut names = names;
            if all {
                names.extend(catalog::default_names().into_iter().map(str::to_string));
            }
            if names.is_empty() {
                bail!("nothing to export: give entry names or --all");
            }
            std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let mut seen = BTreeSet::new();
            for name in &names {
                if !seen.insert(name.clone()) {
                    continue;
                }
                let entry = catalog::get(name)?;
                let stem = out_dir.join(file_stem(name));
                let flags: Vec<&str> = entry.flags.iter().map(|f| f.tag()).collect();
                let written = match &entry.payload {
                    Payload::Structure(s) => vec![(stem.with_extension("struct"), write_structure(s))],
                    Payload::Gadget(g) => vec![(stem.with_extension("gadget"), write_gadget(g, None))],
                    Payload::Candidate(c) => vec![
                        (PathBuf::from(format!("{}.source.struct", stem.display())), write_structure(&c.source)),
                        (PathBuf::from(format!("{}.target.struct", stem.display())), write_structure(&c.target)),
                        (stem.with_extension("qfun"), write_qfun(&c.qf)),
                    ],
                };
                for (path, text) in &written {
                    write(path, text)?;
                    println!("{name}: wrote {}", path.display());
                }
                let files: Vec<String> = written.iter().map(|(p, _)| p.display().to_string()).collect();
                report.record(json!({ "verb": "catalog export", "entry": name, "flags": flags, "files": files }))?;
            }
            Ok(true)
        }
    }
}
