//! Command-line front end: instance generation, LP-guided rounding with
//! certificates, outcome verification, clock sampling, discount tables, and
//! bi-uniform analysis.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a run ends
//! with a stuck certificate (from `solve` or `search-stuck`).

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hypermatch::analysis::{self, BiUniformParams, CheckMode, QMode};
use hypermatch::discounts::{comparison_table, DiscountProfile, Schedule};
use hypermatch::generators::{self, BiUniformSpec, RandomSpec};
use hypermatch::hypergraph::Hypergraph;
use hypermatch::io::{self, OutcomeBody, OutcomeDocument};
use hypermatch::rational::{decimal_str, format_rat, parse_rat};
use hypermatch::rounding::{self, RoundingOutcome};
use hypermatch::{lp, sampling, WeightedInstance};

#[derive(Parser)]
#[command(
    name = "hypermatch",
    version,
    about = "Exact LP-based matching toolkit for weighted hypergraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file in the JSON instance format
    Gen(GenArgs),
    /// Round the fractional LP optimum to a matching with an exact
    /// guarantee, or emit a stuck certificate (exit 2)
    Solve(SolveArgs),
    /// Re-check an outcome file against its instance with a fresh LP solve
    Verify(VerifyArgs),
    /// Compare exact inclusion probabilities with empirical clock draws
    Sample(SampleArgs),
    /// Print discount schedule tables as TSV
    Discounts(DiscountsArgs),
    /// Structured analyses
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Exhaustively search for a stuck configuration (exit 2 if found)
    SearchStuck(SearchStuckArgs),
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Certify a two-size discount pair by sweeping overlap counts
    Biuniform(BiuniformArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Fano,
    Plane,
    Triangle,
    Path,
    Disjoint,
    Random,
    Biuniform,
}

#[derive(Parser)]
struct GenArgs {
    /// Instance family to generate
    #[arg(long, value_enum)]
    kind: Kind,
    /// Plane order (prime, at most 13); `plane` only
    #[arg(long)]
    order: Option<u32>,
    /// Vertex count; `random` and `biuniform`
    #[arg(long)]
    vertices: Option<usize>,
    /// Edge count; `random`, `path`, and `disjoint`
    #[arg(long)]
    edges: Option<usize>,
    /// Smallest edge size; `random`
    #[arg(long)]
    size_min: Option<usize>,
    /// Largest edge size; `random`
    #[arg(long)]
    size_max: Option<usize>,
    /// Edge size; `disjoint`
    #[arg(long)]
    size: Option<usize>,
    /// Count of smaller edges; `biuniform`
    #[arg(long)]
    small_edges: Option<usize>,
    /// Count of larger edges; `biuniform`
    #[arg(long)]
    large_edges: Option<usize>,
    /// Size of the smaller edges; `biuniform`
    #[arg(long)]
    small_size: Option<usize>,
    /// Size of the larger edges; `biuniform`
    #[arg(long)]
    large_size: Option<usize>,
    /// RNG seed for the random families
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// hstar | hr:<r> | hinf:<terms> | htilde | baseline | constant:<rational> | table:<file>
    #[arg(long)]
    schedule: String,
    /// Also write the peel/drop step trace to this file
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Outcome file produced by `solve` or `search-stuck`
    #[arg(long)]
    outcome: PathBuf,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct SampleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Number of independent clock draws
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct DiscountsArgs {
    /// A schedule name, or `all` for the side-by-side comparison table
    #[arg(long)]
    schedule: String,
    /// Largest edge size to tabulate (rows run from 2 to this value)
    #[arg(long)]
    kmax: u32,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Integer,
    Grid,
}

#[derive(Parser)]
#[command(group(ArgGroup::new("qsel").required(true).args(["q", "maximize_q"])))]
struct BiuniformArgs {
    /// Size of the smaller edges
    #[arg(long)]
    k: u32,
    /// Size of the larger edges
    #[arg(long)]
    l: u32,
    /// Discount for the smaller edges (exact rational)
    #[arg(long)]
    p: String,
    /// Discount for the larger edges (exact rational); checks this pair
    #[arg(long)]
    q: Option<String>,
    /// Search for the largest certifiable larger-edge discount instead
    #[arg(long)]
    maximize_q: bool,
    /// Which overlap counts to sweep
    #[arg(long, value_enum, default_value_t = ModeArg::Integer)]
    mode: ModeArg,
    /// Grid spacing (exact rational; grid mode only, default: limit/1000)
    #[arg(long)]
    step: Option<String>,
    /// Search resolution for --maximize-q (exact rational)
    #[arg(long, default_value = "1/1000000")]
    tol: String,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct SearchStuckArgs {
    #[arg(long)]
    instance: PathBuf,
    /// hstar | hr:<r> | hinf:<terms> | htilde | baseline | constant:<rational> | table:<file>
    #[arg(long)]
    schedule: String,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Discounts(args) => cmd_discounts(args),
        Command::Analyze(AnalyzeCommand::Biuniform(args)) => cmd_biuniform(args),
        Command::SearchStuck(args) => cmd_search_stuck(args),
    }
}

/// Writes the fully built output, to a file or stdout.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<WeightedInstance> {
    io::load_instance(path).with_context(|| format!("cannot load instance {}", path.display()))
}

fn schedule_and_profile(arg: &str, h: &Hypergraph) -> Result<(Schedule, DiscountProfile)> {
    let schedule = io::parse_schedule(arg)?;
    let profile = DiscountProfile::from_schedule(h, &schedule)
        .with_context(|| format!("schedule '{arg}' is unusable on this instance"))?;
    Ok((schedule, profile))
}

fn require<T: Copy>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required for --kind {kind}"))
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let inst = match args.kind {
        Kind::Fano => WeightedInstance::unit(generators::fano()),
        Kind::Plane => {
            let order = require(args.order, "order", "plane")?;
            WeightedInstance::unit(generators::projective_plane(order)?)
        }
        Kind::Triangle => WeightedInstance::unit(generators::triangle()),
        Kind::Path => {
            let m = require(args.edges, "edges", "path")?;
            WeightedInstance::unit(generators::path(m))
        }
        Kind::Disjoint => {
            let m = require(args.edges, "edges", "disjoint")?;
            let k = require(args.size, "size", "disjoint")?;
            WeightedInstance::unit(generators::disjoint(m, k)?)
        }
        Kind::Random => generators::random_hypergraph(&RandomSpec {
            vertices: require(args.vertices, "vertices", "random")?,
            edges: require(args.edges, "edges", "random")?,
            size_min: require(args.size_min, "size-min", "random")?,
            size_max: require(args.size_max, "size-max", "random")?,
            seed: args.seed,
        })?,
        Kind::Biuniform => generators::biuniform_random(&BiUniformSpec {
            vertices: require(args.vertices, "vertices", "biuniform")?,
            small_edges: require(args.small_edges, "small-edges", "biuniform")?,
            large_edges: require(args.large_edges, "large-edges", "biuniform")?,
            small_size: require(args.small_size, "small-size", "biuniform")?,
            large_size: require(args.large_size, "large-size", "biuniform")?,
            seed: args.seed,
        })?,
    };
    emit(&args.out, &io::instance_to_json(&inst))?;
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let inst = load_instance(&args.instance)?;
    let (schedule, profile) = schedule_and_profile(&args.schedule, inst.hypergraph())?;
    let outcome = rounding::find_matching(&inst, &profile)?;
    let doc = OutcomeDocument::from_outcome(schedule.label(), profile.values().to_vec(), &outcome);
    let outcome_json = io::outcome_to_json(&doc);
    let trace_json = args.trace.as_ref().map(|_| match &outcome {
        RoundingOutcome::Success(r) => io::trace_to_json(&r.trace),
        RoundingOutcome::Stuck(r) => io::trace_to_json(&r.trace),
    });
    if let (Some(path), Some(json)) = (&args.trace, &trace_json) {
        std::fs::write(path, json)
            .with_context(|| format!("cannot write trace {}", path.display()))?;
    }
    emit(&args.out, &outcome_json)?;
    Ok(match outcome {
        RoundingOutcome::Success(_) => 0,
        RoundingOutcome::Stuck(_) => 2,
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let inst = load_instance(&args.instance)?;
    let text = io::read_file(&args.outcome)?;
    let doc = io::parse_outcome(&text)?;
    if doc.body == OutcomeBody::Absent {
        bail!("outcome records an absent search; there is nothing to verify");
    }
    let profile = DiscountProfile::from_values(inst.hypergraph(), doc.discounts.clone())
        .context("outcome discounts do not fit the instance")?;
    let verdict = doc
        .to_outcome(inst.hypergraph())
        .map_err(anyhow::Error::from)
        .and_then(|outcome| {
            rounding::verify_outcome(&inst, &profile, &outcome).map_err(anyhow::Error::from)
        });
    let (valid, reason) = match &verdict {
        Ok(()) => (true, None),
        Err(e) => (false, Some(format!("{e:#}"))),
    };
    let mut report = serde_json::json!({ "valid": valid });
    if let Some(reason) = reason {
        report["reason"] = serde_json::Value::String(reason);
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(&args.out, &text)?;
    Ok(if valid { 0 } else { 1 })
}

fn cmd_sample(args: SampleArgs) -> Result<i32> {
    let inst = load_instance(&args.instance)?;
    let solution = lp::solve_instance(&inst);
    let reports = sampling::inclusion_probability_report(
        inst.hypergraph(),
        &solution.x,
        args.samples,
        args.seed,
    )?;
    let mut out = String::from(
        "edge\trate\texact\tbound\tbound_holds\tempirical_decimal\tz_decimal\tflagged\n",
    );
    for r in &reports {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.3}\t{}",
            r.edge,
            format_rat(&r.rate),
            format_rat(&r.exact),
            format_rat(&r.lower_bound),
            r.bound_holds,
            r.empirical,
            r.z_score,
            r.flagged,
        )?;
    }
    emit(&args.out, &out)?;
    Ok(0)
}

fn cmd_discounts(args: DiscountsArgs) -> Result<i32> {
    if args.kmax < 2 {
        bail!("--kmax must be at least 2");
    }
    let ks: Vec<u32> = (2..=args.kmax).collect();
    let mut out = String::new();
    if args.schedule == "all" {
        out.push_str(
            "k\tbaseline\tbaseline_4dp\thstar\thstar_4dp\thinf\thinf_4dp\thtilde\thtilde_4dp\n",
        );
        for row in comparison_table(&ks)? {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                row.k,
                format_rat(&row.baseline),
                decimal_str(&row.baseline, 4),
                format_rat(&row.h_star),
                decimal_str(&row.h_star, 4),
                format_rat(&row.h_inf),
                decimal_str(&row.h_inf, 4),
                format_rat(&row.h_tilde_inf),
                decimal_str(&row.h_tilde_inf, 4),
            )?;
        }
    } else {
        let schedule = io::parse_schedule(&args.schedule)?;
        out.push_str("k\tvalue\tvalue_4dp\n");
        for &k in &ks {
            let v = schedule.value(k)?;
            writeln!(out, "{k}\t{}\t{}", format_rat(&v), decimal_str(&v, 4))?;
        }
    }
    emit(&args.out, &out)?;
    Ok(0)
}

fn cmd_biuniform(args: BiuniformArgs) -> Result<i32> {
    let p = parse_rat(&args.p).context("--p must be an exact rational")?;
    let mode_name = match args.mode {
        ModeArg::Integer => "integer",
        ModeArg::Grid => "grid",
    };
    let report = if args.maximize_q {
        let tol = parse_rat(&args.tol).context("--tol must be an exact rational")?;
        let qmode = match args.mode {
            ModeArg::Integer => QMode::Integer,
            ModeArg::Grid => QMode::Grid,
        };
        let res = analysis::max_q(args.k, args.l, &p, qmode, &tol)?;
        serde_json::json!({
            "kind": "max_q",
            "k": args.k,
            "l": args.l,
            "p": format_rat(&p),
            "mode": mode_name,
            "tolerance": format_rat(&tol),
            "q": format_rat(&res.q),
            "q_decimal": decimal_str(&res.q, 6),
            "monotone": res.verdict_monotone,
            "evaluations": res.evaluations,
        })
    } else {
        let q = parse_rat(args.q.as_deref().expect("clap enforces the group"))
            .context("--q must be an exact rational")?;
        let params = BiUniformParams::new(args.k, args.l, p.clone(), q.clone())?;
        let mode = match args.mode {
            ModeArg::Integer => CheckMode::Integer,
            ModeArg::Grid => {
                let step = match &args.step {
                    Some(s) => parse_rat(s).context("--step must be an exact rational")?,
                    None => analysis::default_grid_step(&params)?,
                };
                CheckMode::Grid { step }
            }
        };
        let rep = analysis::biuniform_check(&params, &mode)?;
        let failing: Vec<String> = rep
            .points
            .iter()
            .filter(|pt| !pt.holds)
            .map(|pt| format_rat(&pt.n))
            .collect();
        let mut json = serde_json::json!({
            "kind": "biuniform_check",
            "k": args.k,
            "l": args.l,
            "p": format_rat(&p),
            "q": format_rat(&q),
            "mode": mode_name,
            "overlap_limit": format_rat(&rep.overlap_limit),
            "p_within_fks": rep.p_within_fks,
            "points_checked": rep.points.len(),
            "failing": failing,
            "excluded": rep.excluded.as_ref().map(format_rat),
            "certified": rep.certified,
        });
        if let CheckMode::Grid { step } = &mode {
            json["step"] = serde_json::Value::String(format_rat(step));
        }
        json
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(&args.out, &text)?;
    Ok(0)
}

fn cmd_search_stuck(args: SearchStuckArgs) -> Result<i32> {
    let inst = load_instance(&args.instance)?;
    let (schedule, profile) = schedule_and_profile(&args.schedule, inst.hypergraph())?;
    let found = analysis::search_stuck(inst.hypergraph(), &profile)?;
    let (doc, code) = match found {
        Some(certificate) => (
            OutcomeDocument {
                schedule: schedule.label(),
                discounts: profile.values().to_vec(),
                body: OutcomeBody::Stuck { certificate },
            },
            2,
        ),
        None => (
            OutcomeDocument::absent(schedule.label(), profile.values().to_vec()),
            0,
        ),
    };
    emit(&args.out, &io::outcome_to_json(&doc))?;
    Ok(code)
}
