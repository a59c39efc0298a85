use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dimkit::generator::{
    emit_small_corpus, gen_no_dim, gen_planted, gen_random, CorpusEntry, Filters, P9Status, PlantedParams,
};
use dimkit::oracle::{count_dims, oracle_dim, verify_dim, Verdict};
use dimkit::patterns::{find_induced_path, find_k4, scan_forced_patterns, PatternKind};
use dimkit::{driver, solve, Graph, Matching, SolveConfig, SolveOutcome, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::{Command, GenArgs, GenKind, SolverFlags};

/// Search nodes the oracle may spend on one cross-check instance.
const CROSS_CHECK_NODE_LIMIT: u64 = 50_000_000;

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve { graph, json, solver } => cmd_solve(&graph, json, &solver),
        Command::Verify { graph, matching, json } => cmd_verify(&graph, &matching, json),
        Command::Oracle { graph, json, all, node_limit } => cmd_oracle(&graph, json, all, node_limit),
        Command::Gen(args) => cmd_gen(&args),
        Command::Check { graph, json } => cmd_check(&graph, json),
        Command::CrossCheck { corpus, max_n, count, seed, json, solver } => {
            cmd_cross_check(corpus.as_deref(), max_n, count, seed, json, &solver)
        }
        Command::Bench { max_n, count, seed, no_dim_family, out, solver } => {
            cmd_bench(max_n, count, seed, no_dim_family, out.as_deref(), &solver)
        }
        Command::Explain { graph, solver } => {
            let g = read_graph(&graph)?;
            let value = driver::explain(&g, &config(&solver, None));
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(0)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).context("reading standard input")?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    }
    Ok(text)
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = read_text(path)?;
    Graph::parse(&text).with_context(|| format!("{}: malformed graph", path.display()))
}

fn config(flags: &SolverFlags, default_oracle_max_n: Option<usize>) -> SolveConfig {
    let base = SolveConfig::default();
    SolveConfig {
        check_p9: flags.check_p9,
        branch_budget: flags.budget_branches,
        seed_budget: flags.budget_seeds,
        fallback_oracle_max_n: flags
            .oracle_max_n
            .or(default_oracle_max_n)
            .unwrap_or(base.fallback_oracle_max_n),
        timing: flags.timing,
    }
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Dim => 0,
        Status::NoDim => 1,
        Status::Inconclusive => 2,
    }
}

fn cmd_solve(path: &Path, json: bool, flags: &SolverFlags) -> Result<u8> {
    let g = read_graph(path)?;
    let out = solve(&g, &config(flags, None));
    if json {
        println!("{}", out.to_json_string());
    } else {
        print_outcome(&out);
    }
    Ok(exit_code(out.status))
}

fn print_outcome(out: &SolveOutcome) {
    match (&out.status, &out.matching) {
        (Status::Dim, Some(m)) => {
            println!("dim: {} edges", m.len());
            print!("{}", m.to_text());
        }
        _ => println!("{}", out.status.as_str()),
    }
    if let Some(reason) = &out.reason {
        println!("reason: {reason}");
    }
    let s = &out.stats;
    println!(
        "edges tried {}, forced edges {}, branches {}, {} ms",
        s.edges_tried, s.forced_edges, s.branches, s.millis
    );
}

fn cmd_verify(graph: &Path, matching: &Path, json: bool) -> Result<u8> {
    let g = read_graph(graph)?;
    let text = read_text(matching)?;
    let m = Matching::parse(&text, &g).with_context(|| format!("{}: malformed matching", matching.display()))?;
    let verdict = verify_dim(&g, &m).with_context(|| format!("{}: invalid matching", matching.display()))?;
    let (valid, message) = match verdict {
        Verdict::Valid => (true, "valid".to_string()),
        Verdict::Invalid(v) => (false, format!("invalid: {:?} at edge {}", v.kind, v.edge)),
    };
    if json {
        let violation = match verdict {
            Verdict::Valid => serde_json::Value::Null,
            Verdict::Invalid(v) => json!({ "kind": format!("{:?}", v.kind), "edge": [v.edge.u, v.edge.v] }),
        };
        println!("{}", json!({ "valid": valid, "violation": violation }));
    } else {
        println!("{message}");
    }
    Ok(if valid { 0 } else { 1 })
}

fn cmd_oracle(path: &Path, json: bool, all: bool, node_limit: Option<u64>) -> Result<u8> {
    let g = read_graph(path)?;
    let limit = node_limit.unwrap_or(u64::MAX);
    let report = if all { count_dims(&g, limit) } else { oracle_dim(&g, limit) };
    let status = if report.found.is_some() {
        Status::Dim
    } else if report.limit_hit {
        Status::Inconclusive
    } else {
        Status::NoDim
    };
    if json {
        let matching: Vec<[usize; 2]> =
            report.found.iter().flat_map(|m| m.edges().iter().map(|e| [e.u, e.v])).collect();
        println!(
            "{}",
            json!({
                "status": status.as_str(),
                "matching": matching,
                "count": report.count,
                "explored": report.explored,
                "limit_hit": report.limit_hit,
            })
        );
    } else {
        println!("{}", status.as_str());
        if let Some(m) = &report.found {
            print!("{}", m.to_text());
        }
        if let Some(count) = report.count {
            println!("count: {count}");
        }
        println!("explored {} nodes{}", report.explored, if report.limit_hit { ", limit hit" } else { "" });
    }
    Ok(exit_code(status))
}

fn planted_params(args: &GenArgs, seed: u64) -> PlantedParams {
    let n = args.n;
    let k = args.k.unwrap_or(n / 5);
    let capacity = n.saturating_sub(2 * k) * 2 * k;
    let extra = args.extra.unwrap_or((3 * n / 2).min(capacity));
    let mut p = PlantedParams::new(n, k, extra, seed);
    if args.connected {
        p = p.connected();
    }
    if args.check_p9 {
        p = p.with_p9_check();
    }
    p
}

fn generate_one(args: &GenArgs, seed: u64) -> Result<(CorpusEntry, Option<Matching>)> {
    let entry = |graph: Graph, label: Option<&'static str>, p9_free: P9Status| CorpusEntry {
        graph,
        label,
        p9_free,
        seed: Some(seed),
    };
    let checked = |g: &Graph| if args.check_p9 { P9Status::of(g) } else { P9Status::Unchecked };
    Ok(match args.kind {
        GenKind::Planted => {
            let inst = gen_planted(planted_params(args, seed))?;
            (entry(inst.graph, Some("dim"), inst.p9_free), Some(inst.planted))
        }
        GenKind::NoDim => {
            let g = gen_no_dim(planted_params(args, seed))?;
            let p9 = checked(&g);
            (entry(g, Some("no-dim"), p9), None)
        }
        GenKind::Random => {
            let filters =
                Filters { k4_free: args.k4_free, diamond_butterfly_free: args.diamond_butterfly_free, p9_free: args.p9_free };
            let (g, _) = gen_random(args.n, args.p, seed, filters, args.max_attempts)?;
            let p9 = if args.p9_free { P9Status::Verified } else { checked(&g) };
            (entry(g, None, p9), None)
        }
        GenKind::Small => unreachable!("handled by the caller"),
    })
}

fn cmd_gen(args: &GenArgs) -> Result<u8> {
    if !(0.0..=1.0).contains(&args.p) {
        bail!("--p must lie in [0, 1]");
    }
    let entries: Vec<(CorpusEntry, Option<Matching>)> = if args.kind == GenKind::Small {
        if args.max_n > 8 {
            bail!("--max-n is limited to 8 for the exhaustive corpus");
        }
        emit_small_corpus(args.max_n).into_iter().map(|e| (e, None)).collect()
    } else {
        (0..args.count as u64)
            .map(|i| generate_one(args, args.seed.wrapping_add(i)))
            .collect::<Result<_>>()?
    };
    let Some(dir) = &args.out else {
        if entries.len() != 1 {
            bail!("{} instances need --out DIR", entries.len());
        }
        print!("{}", entries[0].0.graph.to_text());
        return Ok(0);
    };
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let prefix = match args.kind {
        GenKind::Planted => "planted",
        GenKind::NoDim => "no-dim",
        GenKind::Random => "random",
        GenKind::Small => "small",
    };
    let mut manifest = String::new();
    for (i, (entry, planted)) in entries.iter().enumerate() {
        let name = format!("{prefix}-{i:05}.graph");
        write(&dir.join(&name), &entry.graph.to_text())?;
        if let Some(m) = planted {
            write(&dir.join(format!("{prefix}-{i:05}.matching")), &m.to_text())?;
        }
        manifest.push_str(&entry.manifest_line(&name));
        manifest.push('\n');
    }
    write(&dir.join("manifest.jsonl"), &manifest)?;
    eprintln!("wrote {} instances to {}", entries.len(), dir.display());
    Ok(0)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_check(path: &Path, json: bool) -> Result<u8> {
    let g = read_graph(path)?;
    let k4 = find_k4(&g).map(|h| h.vertices);
    let hits = scan_forced_patterns(&g);
    let count = |kind: PatternKind| hits.iter().filter(|h| h.kind == kind).count();
    let mut forced: Vec<[usize; 2]> =
        hits.iter().flat_map(|h| h.forced_edges.iter().map(|e| [e.u, e.v])).collect();
    forced.sort_unstable();
    forced.dedup();
    let p9 = find_induced_path(&g, 9).map(|h| h.vertices);
    let connected = g.n() > 0 && g.is_connected();
    let center = if connected { g.central_vertex().ok() } else { None };
    if json {
        let value = json!({
            "n": g.n(),
            "m": g.m(),
            "connected": connected,
            "k4": k4,
            "diamonds": count(PatternKind::Diamond),
            "butterflies": count(PatternKind::Butterfly),
            "forced_edges": forced,
            "induced_p9": p9,
            "central_vertex": center.map(|c| c.0),
            "eccentricity": center.map(|c| c.1),
        });
        println!("{value}");
    } else {
        println!("n {} m {}{}", g.n(), g.m(), if connected { ", connected" } else { "" });
        match k4 {
            Some(v) => println!("K4: {v:?}"),
            None => println!("K4-free"),
        }
        println!("diamonds {}, butterflies {}", count(PatternKind::Diamond), count(PatternKind::Butterfly));
        println!("forced edges: {forced:?}");
        match p9 {
            Some(v) => println!("induced P9: {v:?}"),
            None => println!("P9-free"),
        }
        if let Some((x, ecc)) = center {
            println!("central vertex {x}, eccentricity {ecc}");
        }
    }
    Ok(0)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DIMKIT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("DIMKIT_THREADS={v} is not a number"))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

struct Instance {
    name: String,
    graph: Graph,
}

fn corpus_instances(dir: &Path) -> Result<Vec<Instance>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "graph"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Ok(Instance { name: p.display().to_string(), graph: read_graph(&p)? }))
        .collect()
}

fn random_instances(max_n: usize, count: usize, seed: u64) -> Vec<Instance> {
    const DENSITIES: [f64; 4] = [0.1, 0.2, 0.3, 0.5];
    (0..count)
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let n = rng.gen_range(1..=max_n.max(1));
            let graph = dimkit::generator::random_graph(n, DENSITIES[i % DENSITIES.len()], &mut rng);
            Instance { name: format!("random #{i} (seed {s})"), graph }
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CheckResult {
    Agree,
    Disagree,
    Inconclusive,
    OracleGaveUp,
}

fn cmd_cross_check(
    corpus: Option<&Path>,
    max_n: usize,
    count: usize,
    seed: u64,
    json: bool,
    flags: &SolverFlags,
) -> Result<u8> {
    let instances = match corpus {
        Some(dir) => corpus_instances(dir)?,
        None => random_instances(max_n, count, seed),
    };
    // the exhaustive fallback would make the comparison trivial
    let cfg = config(flags, Some(0));
    let results: Vec<CheckResult> = thread_pool()?.install(|| {
        instances
            .par_iter()
            .map(|inst| {
                let g = &inst.graph;
                let truth = oracle_dim(g, CROSS_CHECK_NODE_LIMIT);
                let out = solve(g, &cfg);
                let result = match (out.status, &truth.found) {
                    (_, None) if truth.limit_hit => CheckResult::OracleGaveUp,
                    (Status::Inconclusive, _) => CheckResult::Inconclusive,
                    (Status::Dim, Some(_)) if driver::verify_outcome(g, &out) => CheckResult::Agree,
                    (Status::NoDim, None) => CheckResult::Agree,
                    _ => CheckResult::Disagree,
                };
                if result == CheckResult::Disagree {
                    eprintln!(
                        "disagreement on {}: solver {}, oracle {}\n{}",
                        inst.name,
                        out.status.as_str(),
                        if truth.found.is_some() { "dim" } else { "no-dim" },
                        g.to_text()
                    );
                }
                result
            })
            .collect()
    });
    let tally = |r: CheckResult| results.iter().filter(|&&x| x == r).count();
    let disagreements = tally(CheckResult::Disagree);
    if json {
        println!(
            "{}",
            json!({
                "instances": results.len(),
                "disagreements": disagreements,
                "inconclusive": tally(CheckResult::Inconclusive),
                "oracle_gave_up": tally(CheckResult::OracleGaveUp),
            })
        );
    } else {
        println!(
            "{} instances, {disagreements} disagreements, {} inconclusive, {} undecided by the oracle",
            results.len(),
            tally(CheckResult::Inconclusive),
            tally(CheckResult::OracleGaveUp)
        );
    }
    Ok(if disagreements == 0 { 0 } else { 1 })
}

fn cmd_bench(
    max_n: usize,
    count: usize,
    seed: u64,
    no_dim_family: bool,
    out: Option<&Path>,
    flags: &SolverFlags,
) -> Result<u8> {
    let mut sizes = Vec::new();
    let mut n = 250;
    while n <= max_n {
        sizes.push(n);
        n *= 2;
    }
    if sizes.is_empty() {
        bail!("--max-n must be at least 250");
    }
    let jobs: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&n| (0..count as u64).map(move |i| (n, seed.wrapping_add(i))))
        .collect();
    let cfg = config(flags, None);
    let rows: Vec<Result<String>> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(n, s)| {
                let params = PlantedParams::new(n, n / 5, 3 * n / 2, s).connected();
                let g = if no_dim_family { gen_no_dim(params)? } else { gen_planted(params)?.graph };
                let start = Instant::now();
                let outcome = solve(&g, &cfg);
                let millis = start.elapsed().as_millis();
                Ok(format!("{},{},{},{}", g.n(), g.m(), millis, outcome.status.as_str()))
            })
            .collect()
    });
    let mut csv = String::from("n,m,millis,status\n");
    for row in rows {
        csv.push_str(&row?);
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        write(&dir.join("bench.csv"), &csv)?;
    }
    Ok(0)
}
