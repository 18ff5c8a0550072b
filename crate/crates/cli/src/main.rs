mod render;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use perkh_core::equivariant::{
    borel_ekh, default_borel_degree, eigen_decompose, equivariant_complex, expected_stable_ranks,
    verify_fixed_generators, verify_smith,
};
use perkh_core::moduli::verify_counting;
use perkh_core::periodicity::{search_decompositions, CriterionInstance, LaurentPoly2, DEFAULT_NODE_CAP};
use perkh_core::permutohedra::{self, OrderedPartition};
use perkh_core::{akh, kh, lift_diagram, parse_diagram, quotient_diagram, AnnularDiagram, Field};

use report::{digest, RunReport, Verdict, EXIT_INPUT};

const DEFAULT_MAX_CROSSINGS: usize = 16;

#[derive(Parser)]
#[command(name = "perkh", version, about = "Khovanov homology of periodic links in the solid torus")]
struct Cli {
    /// Render a human-readable table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Khovanov homology.
    Kh {
        file: PathBuf,
        #[arg(long, default_value = "2")]
        field: Field,
    },
    /// Annular Khovanov homology.
    Akh {
        file: PathBuf,
        #[arg(long, default_value = "2")]
        field: Field,
    },
    /// Splitting of Kh over F_r for a p^n-periodic diagram.
    Ekh {
        file: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        r: u64,
    },
    /// Borel equivariant cohomology for a p-periodic diagram over F_p.
    Borel {
        file: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        max_degree: Option<i32>,
    },
    /// Run one of the verification sweeps.
    Verify {
        /// Diagram file; for `permutohedra`, a JSON object `{"max_r": r}`.
        file: PathBuf,
        which: Which,
        /// Largest configuration index for `counting`.
        #[arg(long, default_value_t = 5)]
        max_index: usize,
    },
    /// Search for splittings of a Khovanov polynomial allowed by periodicity.
    Periodicity {
        poly: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// The s-invariant (supplied, never computed).
        #[arg(long, allow_hyphen_values = true)]
        s: i32,
        #[arg(long, default_value_t = 2)]
        c: i32,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        blocks_file: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: u64,
    },
    /// Inspect a permutohedron face and optional hyperplane section.
    Permutohedron {
        /// Increasing sequence, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<i64>,
        /// Ordered partition, blocks separated by `|`, e.g. `1,2|3`.
        #[arg(long)]
        partition: Option<String>,
        /// Coordinates forced equal, e.g. `1,3`; repeatable.
        #[arg(long)]
        equal: Vec<String>,
    },
    /// Quotient of a periodic diagram by its symmetry.
    Quotient { file: PathBuf },
    /// The p-fold lift of an annular diagram.
    Lift {
        file: PathBuf,
        #[arg(long)]
        p: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Smith,
    Counting,
    FixedGens,
    Permutohedra,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn max_crossings() -> Result<usize> {
    match std::env::var("PERKH_MAX_CROSSINGS") {
        Ok(v) => v.parse().with_context(|| format!("PERKH_MAX_CROSSINGS={v}")),
        Err(_) => Ok(DEFAULT_MAX_CROSSINGS),
    }
}

fn load_diagram(path: &Path) -> Result<(AnnularDiagram, String)> {
    let text = read(path)?;
    let d = parse_diagram(&text).with_context(|| format!("parsing {}", path.display()))?;
    let cap = max_crossings()?;
    if d.n() > cap {
        bail!("{} crossings exceed the cap of {cap} (PERKH_MAX_CROSSINGS)", d.n());
    }
    Ok((d, digest(&text)))
}

fn symmetric_order(d: &AnnularDiagram) -> Result<u32> {
    d.symmetry().map(|s| s.order).ok_or_else(|| anyhow!("diagram carries no symmetry"))
}

fn eigen_payload(e: &perkh_core::EigenDecomposition) -> serde_json::Value {
    let parts: Vec<_> = (0..=e.n as usize)
        .map(|s| {
            json!({
                "s": s,
                "dim": e.dims[s],
                "homology": e.graded[s].to_json()["blocks"],
                "delta": e.delta[s].to_json()["blocks"],
            })
        })
        .collect();
    json!({ "p": e.p, "n": e.n, "r": e.r, "total": e.dims.iter().sum::<usize>(), "parts": parts })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PermutohedraSweep {
    max_r: usize,
}

fn permutohedra_sweep(max_r: usize) -> Result<(serde_json::Value, bool)> {
    if !(1..=7).contains(&max_r) {
        bail!("max_r must lie in 1..=7");
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for r in 1..=max_r {
        let s: Vec<i64> = (1..=r as i64).collect();
        let parts = permutohedra::ordered_partitions(r);
        // containment follows refinement, and vertex sets nest accordingly
        let faces: Vec<_> = parts.iter().map(|p| permutohedra::face(&s, p)).collect::<Result<_, _>>()?;
        let verts: Vec<std::collections::BTreeSet<Vec<i64>>> =
            faces.iter().map(|f| f.vertices().into_iter().collect()).collect();
        let mut lattice = true;
        for (a, fa) in faces.iter().enumerate() {
            for (b, fb) in faces.iter().enumerate() {
                if fa.contains(fb) != verts[b].is_subset(&verts[a]) {
                    lattice = false;
                }
            }
        }
        // reductions commute with refinement
        let mut consistent = true;
        for p in &parts {
            for blk in p.blocks().iter().filter(|b| b.len() >= 2) {
                let (a, b) = (blk[0], blk[1]);
                let reduced = p.reduce(b)?;
                let lhs: std::collections::BTreeSet<_> = p
                    .refinements()
                    .into_iter()
                    .filter(|q| q.block_of(a) == q.block_of(b))
                    .map(|q| q.reduce(b))
                    .collect::<Result<_, _>>()?;
                let rhs: std::collections::BTreeSet<_> = reduced.refinements().into_iter().collect();
                if lhs != rhs || reduced.extend(a, b)? != *p {
                    consistent = false;
                }
            }
        }
        ok &= lattice && consistent;
        rows.push(json!({ "r": r, "faces": parts.len(), "face_lattice": lattice, "reduction_consistency": consistent }));
    }
    Ok((json!({ "rows": rows }), ok))
}

fn parse_partition(text: &str) -> Result<OrderedPartition> {
    let blocks = text
        .split('|')
        .map(|b| b.split(',').map(|x| x.trim().parse::<usize>().map_err(Into::into)).collect())
        .collect::<Result<Vec<Vec<usize>>>>()?;
    Ok(OrderedPartition::new(blocks)?)
}

fn run(cli: &Cli, echo: Vec<String>) -> Result<RunReport> {
    let started = Instant::now();
    let report = |digest: String, result: serde_json::Value, verdict: Verdict| {
        RunReport::new(echo.clone(), digest, result, verdict, started)
    };
    Ok(match &cli.command {
        Command::Kh { file, field } | Command::Akh { file, field } => {
            let (d, dg) = load_diagram(file)?;
            let p = if matches!(cli.command, Command::Kh { .. }) { kh(&d, *field)? } else { akh(&d, *field)? };
            let mut payload = p.to_json();
            payload["field"] = json!(field.to_string());
            payload["total"] = json!(p.total());
            payload["polynomial"] = json!(p.to_string());
            report(dg, payload, Verdict::NotApplicable)
        }
        Command::Ekh { file, p, n, r } => {
            let (d, dg) = load_diagram(file)?;
            symmetric_order(&d)?;
            let (cx, act) = equivariant_complex(&d, Field::prime(*r)?, false)?;
            let e = eigen_decompose(&cx, &act, *p, *n, *r)?;
            report(dg, eigen_payload(&e), Verdict::NotApplicable)
        }
        Command::Borel { file, p, max_degree } => {
            let (d, dg) = load_diagram(file)?;
            if !perkh_core::field::is_prime(*p) {
                bail!("p = {p} is not prime");
            }
            let order = symmetric_order(&d)?;
            if order as u64 != *p {
                bail!("symmetry has order {order}, not {p}");
            }
            let (cx, act) = equivariant_complex(&d, Field::prime(*p)?, false)?;
            let j = max_degree.unwrap_or_else(|| default_borel_degree(&cx, *p));
            let table = borel_ekh(&cx, &act, *p, j)?;
            let expected = expected_stable_ranks(&d, *p)?;
            let stable: std::collections::BTreeMap<i32, usize> = table
                .blocks
                .iter()
                .filter(|b| b.stable > 0)
                .map(|b| (b.q, b.stable))
                .collect();
            let verdict = if !table.stabilized {
                Verdict::Inconclusive
            } else {
                Verdict::from_bool(stable == expected)
            };
            let mut payload = serde_json::to_value(&table)?;
            payload["expected_stable"] = json!(expected.iter().map(|(q, d)| json!({"q": q, "dim": d})).collect::<Vec<_>>());
            report(dg, payload, verdict)
        }
        Command::Verify { file, which, max_index } => match which {
            Which::Permutohedra => {
                let text = read(file)?;
                let cfg: PermutohedraSweep = serde_json::from_str(&text).context("permutohedra sweep config")?;
                let (payload, ok) = permutohedra_sweep(cfg.max_r)?;
                report(digest(&text), payload, Verdict::from_bool(ok))
            }
            Which::Smith => {
                let (d, dg) = load_diagram(file)?;
                let r = verify_smith(&d, symmetric_order(&d)? as u64)?;
                report(dg, serde_json::to_value(&r)?, Verdict::from_bool(r.pass))
            }
            Which::FixedGens => {
                let (d, dg) = load_diagram(file)?;
                let r = verify_fixed_generators(&d, symmetric_order(&d)? as u64)?;
                report(dg, serde_json::to_value(&r)?, Verdict::from_bool(r.pass))
            }
            Which::Counting => {
                let (d, dg) = load_diagram(file)?;
                let r = verify_counting(&d, *max_index)?;
                report(dg, serde_json::to_value(&r)?, Verdict::from_bool(r.pass))
            }
        },
        Command::Periodicity { poly, p, n, s, c, width, blocks_file, limit, node_cap } => {
            let text = read(poly)?;
            let khp = LaurentPoly2::parse_json(&text)?;
            let mut inst = CriterionInstance::new(khp, *s, *p, *n, *c, *width)?;
            let mut dg = digest(&text);
            if let Some(bf) = blocks_file {
                let btext = read(bf)?;
                let blocks: Vec<LaurentPoly2> = serde_json::from_str(&btext).context("blocks file")?;
                inst = inst.with_blocks(blocks)?;
                dg = digest(&format!("[{},{}]", text.trim(), btext.trim()));
            }
            let found = search_decompositions(&inst, *limit, *node_cap);
            let verdict = match found.verdict() {
                "pass" => Verdict::Pass,
                "fail" => Verdict::Fail,
                _ => Verdict::Inconclusive,
            };
            let payload = json!({
                "p": inst.p, "n": inst.n, "s": inst.s, "c": inst.c, "width": inst.width,
                "decompositions": found.decompositions,
                "count": found.decompositions.len(),
                "nodes": found.nodes,
                "complete": found.complete,
                "truncated_by_limit": found.truncated_by_limit,
            });
            report(dg, payload, verdict)
        }
        Command::Permutohedron { s, partition, equal } => {
            let p = match partition {
                Some(t) => parse_partition(t)?,
                None => OrderedPartition::trivial(s.len()),
            };
            let f = permutohedra::face(s, &p)?;
            let groups = equal
                .iter()
                .map(|g| g.split(',').map(|x| x.trim().parse::<usize>().map_err(Into::into)).collect())
                .collect::<Result<Vec<Vec<usize>>>>()?;
            let mut payload = json!({
                "s": s,
                "partition": p.to_string(),
                "dim": f.dim,
                "vertices": f.vertices(),
            });
            if !groups.is_empty() {
                let sec = permutohedra::intersect_hyperplanes(s, &groups)?;
                payload["section"] = json!({
                    "reduced_s": sec.reduced_s,
                    "codim": sec.codim,
                    "image": permutohedra::reduce_for_groups(&p, &groups).map(|q| q.to_string()),
                });
            }
            report(digest(&payload.to_string()), payload, Verdict::NotApplicable)
        }
        Command::Quotient { file } => {
            let (d, dg) = load_diagram(file)?;
            let s = d.symmetry().ok_or_else(|| anyhow!("diagram carries no symmetry"))?;
            let (q, _) = quotient_diagram(&d, s)?;
            report(dg, serde_json::from_str(&q.to_json())?, Verdict::NotApplicable)
        }
        Command::Lift { file, p } => {
            let (d, dg) = load_diagram(file)?;
            let (l, _) = lift_diagram(&d, *p)?;
            report(dg, serde_json::from_str(&l.to_json())?, Verdict::NotApplicable)
        }
    })
}

/// Arguments without the presentation flags, so reports do not depend on them.
fn command_echo(args: impl Iterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
        } else if a == "--threads" {
            skip_next = true;
        } else if a != "--pretty" && !a.starts_with("--threads=") {
            out.push(a);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    let echo = command_echo(std::env::args().skip(1));
    match run(&cli, echo) {
        Ok(r) => {
            if cli.pretty {
                print!("{}", render::render(&r));
            } else {
                println!("{}", serde_json::to_string(&r).expect("serializable report"));
            }
            ExitCode::from(r.verdict.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
