//! `fanforge`: exact computations on rational polyhedral fans from the
//! command line.
//!
//! Exit codes: 0 success, 1 a verification report failed, 2 invalid fan,
//! 3 parse error, 4 usage error or unknown name.

use std::fmt;
use std::fs;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use num_traits::{Signed, Zero};
use serde_json::json;

use fanforge::corpus;
use fanforge::exactla::linalg::proportionality;
use fanforge::exactla::scalar::format_rational;
use fanforge::io::{self, format_row, qvec_strings, FanJson, IoError};
use fanforge::mori::{wall_relation, MoriCone};
use fanforge::plfun::{quasi_projectivity, PLBasis, QuasiProjectivity};
use fanforge::primcoll::{
    enumerate_primitive_collections, nef_description, primitive_relation, single_inequality_sufficiency,
    PrimitiveCollection,
};
use fanforge::refine::{qp_refinement, simplicial_refinement};
use fanforge::theorems::{check_fan, run_suite, suite_entries, SuiteConfig, TheoremId};
use fanforge::{Fan, RaySet};

#[derive(Parser, Debug)]
#[command(name = "fanforge", version, about = "Exact computations on rational polyhedral fans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct FanArgs {
    /// Fan JSON file, or `corpus:NAME` for a built-in fan.
    #[arg(long)]
    fan: String,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a fan and print its basic data.
    Validate(FanArgs),
    /// Primitive collections.
    Prim(FanArgs),
    /// Primitive relations.
    Relations(FanArgs),
    /// Interior walls with their relations and curve classes.
    Walls(FanArgs),
    /// Mori cone generators and extremal walls.
    Mori(FanArgs),
    /// Nef cone as an H-description in normalized coordinates.
    Nef(FanArgs),
    /// Quasi-projectivity test with a certificate either way.
    Qp(FanArgs),
    /// Generic simplicial refinement with the same rays.
    Refine {
        #[command(flatten)]
        fan: FanArgs,
        /// Ray indices the refinement must keep together, e.g. `2,4`.
        #[arg(long, value_delimiter = ',')]
        support: Vec<usize>,
        /// Also construct a strictly convex function on the refinement.
        #[arg(long)]
        qp: bool,
        #[arg(long, env = "FANFORGE_SEED", default_value_t = 0)]
        seed: u64,
        /// Write weights and cone map to this file.
        #[arg(long)]
        sidecar: Option<String>,
    },
    /// Run the verification suite.
    Verify {
        /// Check a single fan instead of the built-in corpus.
        #[arg(long, conflicts_with = "all")]
        fan: Option<String>,
        /// Built-in corpus plus random fans (the default without --fan).
        #[arg(long)]
        all: bool,
        /// Restrict to one theorem, e.g. `main-theorem`.
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long, env = "FANFORGE_SEED", default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        random_fans: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print a built-in fan as JSON.
    Corpus {
        /// `ex21`, `ex31`, `fulton` or `ex22(r)` for 4 <= r <= 12.
        name: Option<String>,
        /// List the built-in names.
        #[arg(long)]
        list: bool,
    },
}

/// Error carrying a process exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn exit(code: u8, message: impl Into<String>) -> anyhow::Error {
    Exit { code, message: message.into() }.into()
}

fn load_fan(source: &str) -> Result<Arc<Fan>> {
    if let Some(name) = source.strip_prefix("corpus:") {
        return corpus::builtin(name).map(Arc::new).ok_or_else(|| exit(4, format!("unknown corpus fan {name:?}")));
    }
    let text = fs::read_to_string(source).map_err(|e| exit(4, format!("cannot read {source}: {e}")))?;
    match io::fan_from_json(&text) {
        Ok(f) => Ok(Arc::new(f)),
        Err(e) if e.is_parse_error() => Err(exit(3, format!("{source}: {e}"))),
        Err(IoError::InvalidFan(e)) => Err(exit(2, format!("{source}: invalid fan: {e}"))),
        Err(e) => Err(exit(3, format!("{source}: {e}"))),
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("plain data serializes"));
}

fn ray_name(i: usize) -> String {
    format!("r{i}")
}

fn value_name(i: usize) -> String {
    format!("a{i}")
}

fn rays_json(s: &RaySet) -> serde_json::Value {
    json!(s.as_slice())
}

fn cmd_validate(args: &FanArgs) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    if args.json {
        print_json(&serde_json::to_value(FanJson::from(fan.as_ref()))?);
        return Ok(());
    }
    println!("valid fan in dimension {}", fan.dim());
    println!("rays: {}", fan.num_rays());
    for (i, r) in fan.rays().iter().enumerate() {
        println!("  r{i} = {r:?}");
    }
    println!("maximal cones: {}", fan.max_cones().len());
    for (k, c) in fan.max_cones().iter().enumerate() {
        println!("  {k}: {}", c.ray_indices);
    }
    println!("interior walls: {}", fan.interior_walls().len());
    println!("simplicial: {}", yes_no(fan.is_simplicial()));
    println!("complete: {}", yes_no(fan.is_complete()));
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_prim(args: &FanArgs) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    let collections = enumerate_primitive_collections(&fan);
    if args.json {
        print_json(&json!(collections.iter().map(|p| rays_json(&p.rays)).collect::<Vec<_>>()));
        return Ok(());
    }
    for p in &collections {
        println!("{}", p.rays);
    }
    Ok(())
}

fn cmd_relations(args: &FanArgs) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    let relations: Vec<_> =
        enumerate_primitive_collections(&fan).iter().map(|p| primitive_relation(&fan, p)).collect();
    if args.json {
        let v: Vec<_> = relations
            .iter()
            .map(|r| {
                json!({
                    "collection": rays_json(&r.collection.rays),
                    "support": rays_json(&r.support),
                    "b": qvec_strings(&r.b),
                    "a_p": qvec_strings(r.a_p.coeffs()),
                })
            })
            .collect();
        print_json(&json!(v));
        return Ok(());
    }
    for r in &relations {
        println!("{}    a_P: {} = 0", r.equation(), format_row(r.a_p.coeffs(), ray_name));
    }
    Ok(())
}

fn cmd_walls(args: &FanArgs) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    let basis = PLBasis::new(&fan);
    let mori = MoriCone::new(&basis)?;
    if args.json {
        let v: Vec<_> = fan
            .interior_walls()
            .iter()
            .zip(mori.relations.iter().zip(&mori.classes))
            .map(|(w, (rel, class))| {
                json!({
                    "rays": rays_json(&w.rays),
                    "cones": [w.left, w.right],
                    "relation": qvec_strings(rel.coeffs()),
                    "class": qvec_strings(class),
                })
            })
            .collect();
        print_json(&json!(v));
        return Ok(());
    }
    for (k, w) in fan.interior_walls().iter().enumerate() {
        let rel = wall_relation(&fan, w)?;
        println!(
            "wall {k} {} between cones {} and {}: {} = 0, class ({})",
            w.rays,
            w.left,
            w.right,
            format_row(rel.coeffs(), ray_name),
            qvec_strings(&mori.classes[k]).join(", ")
        );
    }
    Ok(())
}

fn cmd_mori(args: &FanArgs) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    let basis = PLBasis::new(&fan);
    let mori = MoriCone::new(&basis)?;
    let extremal = mori.extremal_walls().ok();
    let primitive: Vec<PrimitiveCollection> = enumerate_primitive_collections(&fan);
    if args.json {
        print_json(&json!({
            "dim": mori.dim,
            "pointed": mori.is_pointed(),
            "classes": mori.classes.iter().map(|c| qvec_strings(c)).collect::<Vec<_>>(),
            "extremal_walls": extremal,
            "lineality": mori.lineality().iter().map(|c| qvec_strings(c)).collect::<Vec<_>>(),
        }));
        return Ok(());
    }
    println!("Mori cone in dimension {} from {} wall classes", mori.dim, mori.classes.len());
    match extremal {
        Some(walls) => {
            // Several walls can span the same extremal ray.
            let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
            for w in walls {
                let same = |&(rep, _): &(usize, Vec<usize>)| {
                    proportionality(&mori.classes[rep], &mori.classes[w]).is_some_and(|f| f.is_positive())
                };
                match groups.iter().position(same) {
                    Some(k) => groups[k].1.push(w),
                    None => groups.push((w, vec![w])),
                }
            }
            println!("pointed, {} extremal rays:", groups.len());
            for (rep, members) in groups {
                let pos = mori.relations[rep].positive_support();
                let tag = if primitive.iter().any(|p| p.rays == pos) { ", primitive" } else { "" };
                let names: Vec<String> = members.iter().map(|&w| fan.interior_walls()[w].rays.to_string()).collect();
                println!(
                    "  class ({}) from walls {}; positive support {pos}{tag}",
                    qvec_strings(&mori.classes[rep]).join(", "),
                    names.join(" ")
                );
            }
        }
        None => {
            println!("not pointed; lineality space:");
            for l in mori.lineality() {
                println!("  ({})", qvec_strings(&l).join(", "));
            }
        }
    }
    Ok(())
}

fn cmd_nef(args: &FanArgs) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    let basis = PLBasis::new(&fan);
    let nef = nef_description(&basis);
    let single = if fan.is_simplicial() { Vec::new() } else { single_inequality_sufficiency(&basis) };
    if args.json {
        print_json(&json!({
            "primitive": nef.primitive.iter().map(|(p, row)| json!({
                "collection": rays_json(&p.rays),
                "row": qvec_strings(row),
            })).collect::<Vec<_>>(),
            "implied_equalities": nef.implied_equalities.iter().map(|r| qvec_strings(r)).collect::<Vec<_>>(),
            "pinned": nef.pinned,
            "free": nef.free,
            "equalities": nef.reduced_equalities.iter().map(|r| qvec_strings(r)).collect::<Vec<_>>(),
            "inequalities": nef.reduced_inequalities.iter().map(|(r, src)| json!({
                "row": qvec_strings(r),
                "sources": src,
            })).collect::<Vec<_>>(),
            "single_sufficient": single.iter().map(|(p, ok)| json!([rays_json(&p.rays), ok])).collect::<Vec<_>>(),
        }));
        return Ok(());
    }
    println!("primitive inequalities:");
    for (k, (p, row)) in nef.primitive.iter().enumerate() {
        println!("  P{} {}: {} >= 0", k + 1, p.rays, format_row(row, value_name));
    }
    if !nef.implied_equalities.is_empty() {
        println!("{} of them hold with equality on the whole cone", nef.implied_equalities.len());
    }
    let pinned: Vec<String> = nef.pinned.iter().map(|&i| format!("a{i} = 0")).collect();
    println!("normalization: {}", pinned.join(", "));
    if !nef.reduced_equalities.is_empty() {
        println!("equalities:");
        for row in &nef.reduced_equalities {
            println!("  {} = 0", format_row(row, value_name));
        }
    }
    let free: Vec<String> = nef.free.iter().map(|&i| value_name(i)).collect();
    println!("inequalities in {}:", free.join(", "));
    for (row, src) in &nef.reduced_inequalities {
        let from: Vec<String> = src.iter().map(|k| format!("P{}", k + 1)).collect();
        println!("  {} >= 0    (from {})", format_row(row, value_name), from.join(", "));
    }
    for (p, ok) in &single {
        let k = nef.primitive.iter().position(|(q, _)| q == p).expect("same enumeration");
        println!("P{} {} alone cuts out the cone: {}", k + 1, p.rays, yes_no(*ok));
    }
    Ok(())
}

fn cmd_qp(args: &FanArgs) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    let basis = PLBasis::new(&fan);
    let qp = quasi_projectivity(&basis);
    let walls = fan.interior_walls();
    match (&qp, args.json) {
        (QuasiProjectivity::Yes(phi), true) => {
            let witness: serde_json::Value = serde_json::from_str(&io::pl_to_json(phi))?;
            print_json(&json!({ "quasi_projective": true, "witness": witness }));
        }
        (QuasiProjectivity::No(cert), true) => {
            print_json(&json!({
                "quasi_projective": false,
                "wall_multipliers": qvec_strings(&cert.strict_multipliers),
            }));
        }
        (QuasiProjectivity::Yes(phi), false) => {
            println!("quasi-projective: yes");
            println!("strictly convex function:");
            println!("{}", io::pl_to_json(phi));
        }
        (QuasiProjectivity::No(cert), false) => {
            println!("quasi-projective: no");
            println!("wall functionals combining to zero on Pic:");
            for (w, y) in walls.iter().zip(&cert.strict_multipliers) {
                if !y.is_zero() {
                    println!("  {} * wall {}", format_rational(y), w.rays);
                }
            }
        }
    }
    Ok(())
}

fn cmd_refine(args: &FanArgs, support: &[usize], qp: bool, seed: u64, sidecar: Option<&str>) -> Result<()> {
    let fan = load_fan(&args.fan)?;
    if let Some(&bad) = support.iter().find(|&&i| i >= fan.num_rays()) {
        return Err(exit(4, format!("--support index {bad} out of range")));
    }
    let p = RaySet::new(support.iter().copied());
    let (refinement, witness) = if qp {
        let basis = PLBasis::new(&fan);
        let QuasiProjectivity::Yes(phi) = quasi_projectivity(&basis) else {
            return Err(exit(1, "--qp requires a quasi-projective fan"));
        };
        let q = qp_refinement(&fan, &p, &phi, seed)?;
        (q.refinement, Some(q.witness))
    } else {
        (simplicial_refinement(&fan, &p, seed)?, None)
    };
    info!("refined with {} weight draws", refinement.weights.attempts);
    let mut side = io::refinement_sidecar(&refinement);
    if let Some(w) = &witness {
        side["witness"] = serde_json::from_str(&io::pl_to_json(w))?;
    }
    let fine = serde_json::to_value(FanJson::from(refinement.fine.as_ref()))?;
    if let Some(path) = sidecar {
        fs::write(path, serde_json::to_string_pretty(&side)? + "\n").with_context(|| format!("writing {path}"))?;
    }
    if args.json && sidecar.is_none() {
        print_json(&json!({ "fan": fine, "sidecar": side }));
    } else {
        print_json(&fine);
    }
    Ok(())
}

fn cmd_verify(
    fan: Option<&str>,
    theorem: Option<&str>,
    seed: u64,
    random_fans: usize,
    json_out: bool,
) -> Result<bool> {
    let only = match theorem {
        Some(t) => Some(TheoremId::parse(t).ok_or_else(|| {
            let names: Vec<&str> = TheoremId::ALL.iter().map(|t| t.name()).collect();
            exit(4, format!("unknown theorem {t:?}; expected one of {}", names.join(", ")))
        })?),
        None => None,
    };
    let reports = match fan {
        Some(source) => {
            let f = load_fan(source)?;
            let name = source.strip_prefix("corpus:").unwrap_or(source);
            check_fan(name, &f, seed, only)
        }
        None => run_suite(suite_entries(&SuiteConfig { seed, random_fans }), seed, only),
    };
    if json_out {
        print_json(&io::report_json(&reports));
    } else {
        print!("{}", io::report_table(&reports));
    }
    Ok(reports.iter().all(|r| r.passed()))
}

fn cmd_corpus(name: Option<&str>, list: bool) -> Result<()> {
    if list {
        for n in ["ex21", "ex31", "fulton", "ex22(r) for 4 <= r <= 12"] {
            println!("{n}");
        }
        return Ok(());
    }
    let name = name.ok_or_else(|| exit(4, "corpus needs a NAME or --list"))?;
    let fan = corpus::builtin(name).ok_or_else(|| exit(4, format!("unknown corpus fan {name:?}")))?;
    println!("{}", io::fan_to_json(&fan));
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Validate(a) => cmd_validate(a)?,
        Command::Prim(a) => cmd_prim(a)?,
        Command::Relations(a) => cmd_relations(a)?,
        Command::Walls(a) => cmd_walls(a)?,
        Command::Mori(a) => cmd_mori(a)?,
        Command::Nef(a) => cmd_nef(a)?,
        Command::Qp(a) => cmd_qp(a)?,
        Command::Refine { fan, support, qp, seed, sidecar } => {
            cmd_refine(fan, support, *qp, *seed, sidecar.as_deref())?
        }
        Command::Verify { fan, all: _, theorem, seed, random_fans, json } => {
            if !cmd_verify(fan.as_deref(), theorem.as_deref(), *seed, *random_fans, *json)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Corpus { name, list } => cmd_corpus(name.as_deref(), *list)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let code = e.downcast_ref::<Exit>().map_or(1, |x| x.code);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
