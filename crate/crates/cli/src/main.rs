use clap::{Args, Parser, Subcommand};
use melonic_core::amplitude::{amplitude_bruteforce, amplitude_facesum, amplitude_transfer, EvalOptions, FaceSumOptions};
use melonic_core::checks::{self, Level};
use melonic_core::ensemble::{ensemble_sobolev, EnsembleConfig, Method as Integrator};
use melonic_core::graph::{count_graphs, ExpansionGraph, GraphFamily, DEFAULT_ORDER_GUARD};
use melonic_core::melonic::{count_melonic, find_reductions, is_melonic, is_melonic_greedy, melonic_family};
use melonic_core::series::{sobolev_coefficient, Scope};
use melonic_core::stranded::{incidence, to_stranded};
use melonic_core::trees::{count_2rooted, count_heap_trees_1rooted, enumerate_2rooted, enumerate_heap_trees_1rooted, fuss_catalan};
use melonic_core::Error;
use output::{Sink, Target};
use rayon::prelude::*;
use serde::Serialize;
use std::process::ExitCode;
use std::time::Instant;

mod output;

#[derive(Parser, Debug)]
#[command(name = "melonic", version, about = "Graph expansion of averaged Sobolev norms for a random resonant system")]
struct Cli {
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count or list heap-ordered trees.
    Trees(TreesArgs),
    /// Count or list expansion graphs of a given order.
    Graphs(GraphsArgs),
    /// Faces, incidence rank and degree of a graph, or the degree distribution of an order.
    Degree(DegreeArgs),
    /// Melonic classification of a graph or of every graph of an order.
    Classify(KeyArgs),
    /// Evaluate an averaged amplitude.
    Amplitude(AmplitudeArgs),
    /// Sobolev-norm series coefficient.
    Sobolev(SobolevArgs),
    /// Monte Carlo ensemble of the truncated flow.
    Mc(McArgs),
    /// Run the acceptance checks and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct TreesArgs {
    #[arg(long, default_value_t = 3)]
    q: usize,
    /// Number of vertices; for `--two-rooted`, the order `n`.
    #[arg(long)]
    h: usize,
    #[arg(long)]
    count: bool,
    /// Count plane shapes (Fuss-Catalan) instead of heap orderings.
    #[arg(long)]
    shapes: bool,
    #[arg(long)]
    two_rooted: bool,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct GraphsArgs {
    #[arg(long, alias = "order")]
    n: usize,
    #[arg(long)]
    count: bool,
    /// `count` is the same as `--count`.
    #[arg(long, value_parser = ["json", "count"])]
    format: Option<String>,
    /// Melonic graphs only, one per heap-free class.
    #[arg(long)]
    melonic: bool,
    /// Largest order whose full family may be listed.
    #[arg(long, default_value_t = DEFAULT_ORDER_GUARD)]
    guard: usize,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct KeyArgs {
    #[arg(long, conflicts_with = "order", required_unless_present = "order")]
    graph_key: Option<String>,
    /// Every graph of this order.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct DegreeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    which: KeyArgs,
    /// With `--order`, emit `(degree, count)` rows.
    #[arg(long)]
    histogram: bool,
}

#[derive(Args, Debug, Serialize)]
struct AmplitudeArgs {
    #[arg(long)]
    graph_key: String,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    p: f64,
    /// brute, face, transfer or both (brute and face).
    #[arg(long, default_value = "face")]
    method: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Initial momentum cutoff.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long, default_value_t = 1 << 13)]
    max_cutoff: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SobolevArgs {
    #[arg(long)]
    order: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value = "full")]
    scope: String,
    #[arg(long)]
    r_max: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct McArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 16)]
    jmax: usize,
    #[arg(long, default_value_t = 4000)]
    samples: usize,
    #[arg(long = "T", default_value_t = 0.1)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    gamma: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// rk4 or gbs8.
    #[arg(long, default_value = "rk4")]
    method: String,
    /// Record every this many steps.
    #[arg(long, default_value_t = 25)]
    record_every: usize,
    /// Sample couplings independently instead of in (C, -C) pairs.
    #[arg(long)]
    no_antithetic: bool,
    #[arg(long, default_value_t = 1e-8)]
    drift_limit: f64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Order-two oracles and small samples only.
    #[arg(long)]
    quick: bool,
    /// Comma-separated criterion numbers.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long, default_value_t = checks::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Io(std::io::Error),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Run = std::result::Result<(), Failure>;

fn params<T: Serialize>(a: &T) -> serde_json::Value {
    serde_json::to_value(a).expect("arguments serialize")
}

fn trees(a: &TreesArgs, t0: Instant) -> Run {
    let target = Target::parse(a.out.as_deref());
    if a.count {
        let n = match (a.two_rooted, a.shapes) {
            (true, _) => count_2rooted(a.h),
            (false, true) => fuss_catalan(a.q, a.h)?,
            (false, false) => count_heap_trees_1rooted(a.q, a.h)?,
        };
        println!("{n}");
        return Ok(());
    }
    if a.shapes {
        return Err(Failure::Usage("--shapes needs --count".into()));
    }
    let mut sink = Sink::new(target, &["index", "parent", "slot"]);
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    if a.two_rooted {
        for (i, u) in enumerate_2rooted(a.h)?.iter().enumerate() {
            let attach: Vec<String> = u.attach().iter().map(|s| format!("{s:?}")).collect();
            sink.row(vec![i.to_string(), attach.join(";"), String::new()], &attach);
        }
    } else {
        for (i, t) in enumerate_heap_trees_1rooted(a.q, a.h)?.iter().enumerate() {
            let r = t.to_record();
            sink.row(vec![i.to_string(), join(&r.parent), join(&r.slot)], &r);
        }
    }
    sink.finish("trees", &params(a), None, t0)?;
    Ok(())
}

fn graphs(a: &GraphsArgs, t0: Instant) -> Run {
    if a.count || a.format.as_deref() == Some("count") {
        let n = if a.melonic { count_melonic(a.n)? } else { count_graphs(a.n) };
        println!("{n}");
        return Ok(());
    }
    let limit = a.limit.unwrap_or(usize::MAX);
    let mut sink = Sink::new(Target::parse(a.out.as_deref()), &["key", "n", "sign", "propagators"]);
    let mut push = |g: &ExpansionGraph| {
        let r = g.to_record();
        let props = r.propagators.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        sink.row(vec![r.key.clone(), r.n.to_string(), r.sign.to_string(), props], &r);
    };
    if a.melonic {
        melonic_family(a.n)?.values().take(limit).for_each(&mut push);
    } else {
        GraphFamily::with_guard(a.n, a.guard)?.iter().take(limit).for_each(|g| push(&g));
    }
    sink.finish("graphs", &params(a), None, t0)?;
    Ok(())
}

#[derive(Serialize)]
struct DegreeRecord {
    key: String,
    n: usize,
    faces: usize,
    face_lengths: Vec<usize>,
    rank: usize,
    free_faces: usize,
    degree: usize,
    incidence: Vec<Vec<i64>>,
}

fn degree_record(g: &ExpansionGraph) -> melonic_core::Result<DegreeRecord> {
    let gs = to_stranded(g)?;
    let inc = incidence(&gs);
    Ok(DegreeRecord {
        key: g.canonical_key(),
        n: g.n(),
        faces: gs.face_count(),
        face_lengths: gs.faces.iter().map(|f| f.length()).collect(),
        rank: inc.rank,
        free_faces: inc.free_faces(),
        degree: g.n() - inc.free_faces(),
        incidence: inc.e.clone(),
    })
}

/// Every graph of order `n`, evaluated in parallel and returned in family order.
fn over_order<R: Send>(n: usize, f: impl Fn(&ExpansionGraph) -> melonic_core::Result<R> + Sync) -> melonic_core::Result<Vec<R>> {
    let fam = GraphFamily::new(n)?;
    (0..fam.len()).into_par_iter().map(|i| f(&fam.get(i))).collect()
}

#[derive(Serialize)]
struct HistogramRow {
    degree: usize,
    count: u64,
}

fn degree(a: &DegreeArgs, t0: Instant) -> Run {
    let w = &a.which;
    let target = Target::parse(w.out.as_deref());
    let header = ["key", "n", "faces", "rank", "degree"];
    let row = |sink: &mut Sink, r: &DegreeRecord| {
        sink.row(vec![r.key.clone(), r.n.to_string(), r.faces.to_string(), r.rank.to_string(), r.degree.to_string()], r);
    };
    let mut sink;
    if a.histogram && w.order.is_none() {
        return Err(Failure::Usage("--histogram needs --order".into()));
    }
    if let Some(key) = &w.graph_key {
        sink = Sink::new(target, &header);
        row(&mut sink, &degree_record(&ExpansionGraph::from_key(key)?)?);
    } else {
        let n = w.order.expect("clap requires --graph-key or --order");
        if a.histogram {
            let degs = over_order(n, melonic_core::stranded::degree)?;
            let mut hist = std::collections::BTreeMap::new();
            for d in degs {
                *hist.entry(d).or_insert(0u64) += 1;
            }
            sink = Sink::new(target, &["degree", "count"]);
            for (degree, count) in hist {
                sink.row(vec![degree.to_string(), count.to_string()], &HistogramRow { degree, count });
            }
        } else {
            sink = Sink::new(target, &header);
            for r in over_order(n, degree_record)? {
                row(&mut sink, &r);
            }
        }
    }
    sink.finish("degree", &params(a), None, t0)?;
    Ok(())
}

#[derive(Serialize)]
struct ClassifyRecord {
    key: String,
    melonic: bool,
    degree: usize,
    greedy: bool,
    reductions: Vec<String>,
}

fn classify_record(g: &ExpansionGraph) -> melonic_core::Result<ClassifyRecord> {
    Ok(ClassifyRecord {
        key: g.canonical_key(),
        melonic: is_melonic(g),
        degree: melonic_core::stranded::degree(g)?,
        greedy: is_melonic_greedy(g),
        reductions: find_reductions(g).iter().map(|m| format!("{:?}", m.kind)).collect(),
    })
}

fn classify(a: &KeyArgs, t0: Instant) -> Run {
    let recs = match (&a.graph_key, a.order) {
        (Some(k), _) => vec![classify_record(&ExpansionGraph::from_key(k)?)?],
        (None, Some(n)) => over_order(n, classify_record)?,
        (None, None) => unreachable!("clap requires --graph-key or --order"),
    };
    let mut sink = Sink::new(Target::parse(a.out.as_deref()), &["key", "melonic", "degree", "reductions"]);
    for r in &recs {
        sink.row(vec![r.key.clone(), r.melonic.to_string(), r.degree.to_string(), r.reductions.join(";")], r);
    }
    sink.finish("classify", &params(a), None, t0)?;
    Ok(())
}

fn amplitude(a: &AmplitudeArgs, t0: Instant) -> Run {
    let g = ExpansionGraph::from_key(&a.graph_key)?;
    let eval = EvalOptions {
        tol: a.tol,
        cutoff: a.cutoff,
        max_cutoff: a.max_cutoff,
    };
    let fo = FaceSumOptions::default();
    let values = match a.method.as_str() {
        "brute" => vec![amplitude_bruteforce(&g, a.r, a.p, &eval)?],
        "face" => vec![amplitude_facesum(&g, a.r, a.p, &eval, &fo)?],
        "transfer" => vec![amplitude_transfer(&g, a.r, a.p, &eval)?],
        "both" => vec![amplitude_bruteforce(&g, a.r, a.p, &eval)?, amplitude_facesum(&g, a.r, a.p, &eval, &fo)?],
        m => return Err(Failure::Usage(format!("unknown method {m}"))),
    };
    if let Some(v) = values.iter().find(|v| !v.converged) {
        return Err(Error::Convergence(format!("{:?} amplitude did not converge by cutoff {}", v.method, v.cutoff)).into());
    }
    let mut sink = Sink::new(Target::parse(a.out.as_deref()), &["key", "r", "p", "method", "value", "tail", "cutoff"]);
    for v in &values {
        sink.row(
            vec![
                g.canonical_key(),
                a.r.to_string(),
                a.p.to_string(),
                format!("{:?}", v.method).to_lowercase(),
                format!("{:e}", v.value),
                format!("{:e}", v.tail),
                v.cutoff.to_string(),
            ],
            v,
        );
    }
    sink.finish("amplitude", &params(a), None, t0)?;
    Ok(())
}

fn sobolev(a: &SobolevArgs, t0: Instant) -> Run {
    let scope: Scope = a.scope.parse()?;
    let c = sobolev_coefficient(a.order, a.gamma, a.p, scope, a.r_max)?;
    let mut sink = Sink::new(Target::parse(a.out.as_deref()), &["n", "gamma", "p", "scope", "value", "error", "R_max"]);
    sink.row(
        vec![
            c.n.to_string(),
            c.gamma.to_string(),
            c.p.to_string(),
            a.scope.clone(),
            format!("{:e}", c.value),
            format!("{:e}", c.error),
            c.r_max.to_string(),
        ],
        &c,
    );
    sink.finish("sobolev", &params(a), None, t0)?;
    Ok(())
}

#[derive(Serialize)]
struct McRow {
    t: f64,
    gamma: f64,
    mean: f64,
    stderr: f64,
}

fn mc(a: &McArgs, t0: Instant) -> Run {
    let seed = a.seed.ok_or_else(|| Failure::Usage("mc needs an explicit --seed".into()))?;
    let method: Integrator = a.method.parse()?;
    let cfg = EnsembleConfig {
        p: a.p,
        j_max: a.jmax,
        samples: a.samples,
        t_end: a.t_end,
        dt: a.dt,
        gammas: a.gamma.clone(),
        seed,
        method,
        record_every: a.record_every,
        antithetic: !a.no_antithetic,
        drift_limit: a.drift_limit,
        fit_window: 0.1,
    };
    let tab = ensemble_sobolev(&cfg)?;
    let mut sink = Sink::new(Target::parse(a.out.as_deref()), &["t", "gamma", "mean", "stderr"]);
    for (gi, &g) in tab.gammas.iter().enumerate() {
        for (ti, &t) in tab.times.iter().enumerate() {
            let row = McRow { t, gamma: g, mean: tab.mean[gi][ti], stderr: tab.stderr[gi][ti] };
            sink.row(
                vec![format!("{t}"), format!("{g}"), format!("{:e}", row.mean), format!("{:e}", row.stderr)],
                &row,
            );
        }
    }
    sink.finish("mc", &params(a), Some(seed), t0)?;
    Ok(())
}

fn verify(a: &VerifyArgs) -> Run {
    let level = if a.quick { Level::Quick } else { Level::Full };
    let ids: Vec<u8> = if !a.only.is_empty() {
        a.only.clone()
    } else if a.quick {
        vec![1, 2, 4, 5, 6, 7, 8, 10]
    } else {
        (1..=10).collect()
    };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=10).contains(&i)) {
        return Err(Failure::Usage(format!("no criterion {bad}")));
    }
    let res = checks::run(&ids, level, a.seed);
    for o in &res {
        println!("{o}");
    }
    let failed = res.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", res.len() - failed);
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let t0 = Instant::now();
    let res = match &cli.command {
        Command::Trees(a) => trees(a, t0),
        Command::Graphs(a) => graphs(a, t0),
        Command::Degree(a) => degree(a, t0),
        Command::Classify(a) => classify(a, t0),
        Command::Amplitude(a) => amplitude(a, t0),
        Command::Sobolev(a) => sobolev(a, t0),
        Command::Mc(a) => mc(a, t0),
        Command::Verify(a) => verify(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = match &f {
                Failure::Usage(_) => 2,
                Failure::Core(Error::Guard { .. }) => 3,
                Failure::Core(Error::Convergence(_)) => 4,
                Failure::Core(Error::Domain(_) | Error::Parse(_) | Error::OddOrder(_)) => 2,
                Failure::Core(_) | Failure::Io(_) | Failure::Checks(_) => 1,
            };
            match f {
                Failure::Checks(n) => eprintln!("{n} checks failed"),
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}
