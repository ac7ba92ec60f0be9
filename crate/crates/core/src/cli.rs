//! The `wps` command line: analysis, conjugacy decisions with replayable
//! witnesses, Fock computations, the example corpus and seeded self-checks.
//!
//! Every command prints prose followed by a `[result]` block of `key=value`
//! lines. Exit codes: 0 holds, 1 fails, 2 inconclusive, 3 input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::characters::{disc_data, zeroing_residual};
use crate::conjugacy::{
    decide, replay_witness, Certificate, Gamma, Relation, Verdict, Witness, DEFAULT_DEPTH,
};
use crate::conjugacy::finite::{exhaustive_isomorphism, find_graph_conjugacy_finite};
use crate::corpus;
use crate::correspondence::Quiver;
use crate::error::{Error, Result};
use crate::fock::{cesaro, matrix, min_degree, op_norm};
use crate::io;
use crate::random;
use crate::rational::Show;
use crate::spaces::Subset;
use crate::wps::Wps;

#[derive(Debug, Parser)]
#[command(name = "wps", version, about = "Exact analysis of weighted partial systems")]
pub struct Cli {
    /// Seed for the randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelationArg {
    Graph,
    Btc,
    Woc,
}

impl From<RelationArg> for Relation {
    fn from(r: RelationArg) -> Relation {
        match r {
            RelationArg::Graph => Relation::Graph,
            RelationArg::Btc => Relation::BranchTransition,
            RelationArg::Woc => Relation::WeightedOrbit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FockOp {
    Norm,
    Fourier,
    Cesaro,
    Mindeg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph, branching structure, fixed points and discs of a system.
    Analyze { system: PathBuf },
    /// Decide or certify a conjugacy relation between two systems.
    Conjugacy {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum)]
        relation: RelationArg,
        /// Homeomorphism document; without it candidates are searched.
        #[arg(long)]
        gamma: Option<PathBuf>,
        /// Weighted-orbit certificate document.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Refinement rounds for interval certificates.
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Re-verify a witness document instead of deciding.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Truncated Fock computations on a finite system.
    Fock {
        system: PathBuf,
        element: PathBuf,
        #[arg(long, value_enum)]
        op: FockOp,
        /// Truncation level (defaults to the element's `N`).
        #[arg(long = "N")]
        level: Option<usize>,
        /// Degree for `fourier`, or the Cesàro index for `cesaro`.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Run corpus entries and check their expected verdicts.
    Examples {
        /// Entry name, or `all`.
        #[arg(default_value = "all")]
        name: String,
        /// Only list the entries.
        #[arg(long)]
        list: bool,
    },
    /// Seeded randomized checks of the finite collapse, the relation
    /// hierarchy and the zeroing construction.
    Selfcheck {
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

/// Prose plus a machine-readable block.
#[derive(Debug, Default)]
pub struct Report {
    pub prose: String,
    pub kv: Vec<(String, String)>,
    pub exit: i32,
}

impl Report {
    fn line(&mut self, s: impl AsRef<str>) {
        self.prose.push_str(s.as_ref());
        self.prose.push('\n');
    }

    fn kv(&mut self, k: &str, v: impl ToString) {
        self.kv.push((k.to_string(), v.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = self.prose.clone();
        s.push_str("\n[result]\n");
        for (k, v) in &self.kv {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })
}

fn load_system(path: &Path) -> Result<Wps> {
    io::parse_system(&read(path)?).map_err(|e| with_file(path, e))
}

fn with_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { path: p, message } => Error::Parse { path: format!("{}: {p}", path.display()), message },
        other => Error::Parse { path: path.display().to_string(), message: other.to_string() },
    }
}

/// Runs a parsed command line. Input errors become exit code 3.
pub fn run(cli: &Cli) -> Report {
    let result = match &cli.command {
        Command::Analyze { system } => analyze(system),
        Command::Conjugacy { a, b, relation, gamma, certificate, depth, replay } => {
            conjugacy(a, b, (*relation).into(), gamma.as_deref(), certificate.as_deref(), *depth, replay.as_deref())
        }
        Command::Fock { system, element, op, level, degree } => fock(system, element, *op, *level, *degree),
        Command::Examples { name, list } => examples(name, *list),
        Command::Selfcheck { count } => selfcheck(cli.seed, *count),
    };
    result.unwrap_or_else(|e| {
        let mut r = Report { exit: 3, ..Report::default() };
        r.line(format!("error: {e}"));
        r.kv("status", "input-error");
        r.kv("exit", 3);
        r
    })
}

fn subset_text(sys: &Wps, s: &Subset) -> String {
    match (s, sys) {
        (Subset::Atoms(xs), Wps::Finite(f)) => {
            format!("{{{}}}", xs.iter().map(|&x| f.label(x)).collect::<Vec<_>>().join(", "))
        }
        (Subset::Reals(p), _) => p.to_string(),
        _ => "?".into(),
    }
}

pub fn analyze_system(sys: &Wps) -> Result<Report> {
    let mut r = Report::default();
    let fixed = subset_text(sys, &sys.fixed_points());
    let branching = subset_text(sys, &sys.branching_points());
    match sys {
        Wps::Finite(s) => {
            r.line(format!("finite space with {} points, {} branches", s.len(), s.branches.len()));
            r.line("edges (range ← source): weight [branches]");
            let g = s.graph();
            for ((rr, ss), info) in &g {
                let idx: Vec<String> = info.indices.iter().map(|i| (i + 1).to_string()).collect();
                r.line(format!("  {} ← {}: {} [{}]", s.label(*rr), s.label(*ss), Show(&info.weight), idx.join(",")));
            }
            r.kv("space", "finite");
            r.kv("points", s.len());
            r.kv("edges", g.len());
        }
        Wps::Interval(s) => {
            let comps: Vec<String> = s.components.iter().map(|c| c.to_string()).collect();
            r.line(format!("interval space {} with {} branches", comps.join(" ∪ "), s.branches.len()));
            for (i, b) in s.branches.iter().enumerate() {
                r.line(format!("  σ_{} = {}, w_{} = {}", i + 1, b.map, i + 1, b.weight));
            }
            let g = s.graph();
            r.line("graph pieces:");
            r.prose.push_str(&g.to_string());
            r.line("coinciding sets C(I) and boundaries B(I):");
            for (idx, c, b) in s.coinciding_structure() {
                let names: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
                r.line(format!("  I = {{{}}}: C = {}, B = {}", names.join(","), c, b));
            }
            let edges: Vec<String> =
                s.branching_edges().iter().map(|(a, b)| format!("({}, {})", Show(a), Show(b))).collect();
            r.line(format!("branching edges: {}", if edges.is_empty() { "none".into() } else { edges.join(", ") }));
            for d in s.weight_discontinuities() {
                let lims: Vec<String> = d.limits.iter().map(|l| Show(l).to_string()).collect();
                r.line(format!(
                    "  edge weight at ({}, {}) is {} with limits {{{}}}",
                    Show(&d.range),
                    Show(&d.source),
                    Show(&d.value),
                    lims.join(", ")
                ));
            }
            r.kv("space", "intervals");
            r.kv("components", s.components.len());
            r.kv("graph_pieces", g.piece_count());
            r.kv("branching_edges", format!("[{}]", edges.join(", ")));
            if let Some((lo, hi)) = s.edge_weight_range() {
                r.line(format!("edge weights range over [{}, {}]", Show(&lo), Show(&hi)));
                r.kv("edge_weight_min", Show(&lo));
                r.kv("edge_weight_max", Show(&hi));
            }
        }
    }
    r.kv("branches", sys.num_branches());
    r.line(format!("branching points: {branching}"));
    r.line(format!("fixed points: {fixed}"));
    let ws = sys.is_well_supported();
    r.line(if ws { "well-supported" } else { "not well-supported" });
    let discs = disc_data(sys)?;
    for d in &discs.discs {
        r.line(format!("disc at {}: radius² = {}", d.point.describe(sys), Show(&d.radius_sq)));
    }
    for (lo, hi) in &discs.intervals {
        r.line(format!("discs along the fixed interval [{}, {}]: radius² = w(x,x)", Show(lo), Show(hi)));
    }
    r.kv("branching_points", branching);
    r.kv("fixed_points", fixed);
    r.kv("well_supported", ws);
    r.kv("discs", discs.discs.len());
    r.kv("exit", 0);
    Ok(r)
}

fn analyze(path: &Path) -> Result<Report> {
    analyze_system(&load_system(path)?)
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("JSON values serialize")
}

fn describe_witness(w: &Witness, sys: &Wps) -> String {
    match w {
        Witness::GraphMismatch { range, source, in_first } => format!(
            "edge ({}, {}) is in the {} graph only",
            range.describe(sys),
            source.describe(sys),
            if *in_first { "first" } else { "second (conjugated)" }
        ),
        Witness::NoIsomorphism { reason } => format!("no isomorphism: {reason}"),
        Witness::LimitMismatch { range, source, value, limits } => {
            let l: Vec<String> = limits.iter().map(|x| Show(x).to_string()).collect();
            format!(
                "transition ratio at ({}, {}) is {} but its limits are {{{}}}",
                range.describe(sys),
                source.describe(sys),
                Show(value),
                l.join(", ")
            )
        }
        Witness::ForcedDiscontinuity { point, forced, limit } => format!(
            "H is forced to {} at the self-loop ({p}, {p}) but to values tending to {} nearby",
            Show(forced),
            Show(limit),
            p = Show(point)
        ),
        Witness::Path(p) => {
            let steps: Vec<String> = p.steps.iter().map(|i| (i + 1).to_string()).collect();
            format!(
                "from {} along branches [{}]: product {} vs C = {}",
                p.source.describe(sys),
                steps.join(","),
                Show(&p.product),
                Show(&p.bound)
            )
        }
    }
}

/// Witness document with the γ (and certificate) needed to replay it.
pub fn witness_document(w: &Witness, a: &Wps, b: &Wps, gamma: Option<&Gamma>, cert: Option<&Certificate>) -> Value {
    let mut doc = io::witness_to_json(w, a);
    if let Some(g) = gamma {
        doc["gamma"] = io::gamma_to_json(g, a, b);
    }
    if let (Witness::Path(_), Some(c)) = (w, cert) {
        doc["certificate"] = io::certificate_to_json(c, a, b);
    }
    doc
}

pub fn report_verdict(
    r: &mut Report,
    verdict: &Verdict,
    a: &Wps,
    b: &Wps,
    gamma: Option<&Gamma>,
    cert: Option<&Certificate>,
) {
    r.kv("verdict", verdict.name());
    match verdict {
        Verdict::Holds { detail, certificate } => {
            r.line(format!("HOLDS: {detail}"));
            if let Some(c) = certificate {
                r.kv("certificate", compact(&io::certificate_to_json(c, a, b)));
            }
        }
        Verdict::Fails { detail, witness } => {
            r.line(format!("FAILS: {detail}"));
            r.line(format!("witness: {}", describe_witness(witness, a)));
            r.kv("witness", compact(&witness_document(witness, a, b, gamma, cert)));
        }
        Verdict::Inconclusive { reason, depth } => {
            r.line(format!("INCONCLUSIVE: {reason}"));
            r.kv("depth", depth);
        }
    }
    if let Some(g) = gamma {
        r.kv("gamma", compact(&io::gamma_to_json(g, a, b)));
    }
    r.exit = verdict.exit_code();
    r.kv("exit", r.exit);
}

fn conjugacy(
    a: &Path,
    b: &Path,
    relation: Relation,
    gamma: Option<&Path>,
    certificate: Option<&Path>,
    depth: usize,
    replay: Option<&Path>,
) -> Result<Report> {
    let sa = load_system(a)?;
    let sb = load_system(b)?;
    let gamma = gamma
        .map(|p| {
            let v = io::parse_json(&read(p)?).map_err(|e| with_file(p, e))?;
            io::gamma_from_value(&v, &sa, &sb, "").map_err(|e| with_file(p, e))
        })
        .transpose()?;
    let cert = certificate
        .map(|p| io::parse_certificate(&read(p)?, &sa, &sb).map_err(|e| with_file(p, e)))
        .transpose()?;
    let mut r = Report::default();
    r.kv("relation", relation.name());
    if let Some(p) = replay {
        return replay_report(r, p, &sa, &sb, gamma, cert);
    }
    let d = decide(&sa, &sb, relation, gamma.as_ref(), cert.as_ref(), depth)?;
    r.line(format!("relation: {}", relation.name()));
    if let Some(g) = &d.gamma {
        r.line(format!("gamma: {g}"));
    }
    for n in &d.notes {
        r.line(format!("note: {n}"));
    }
    r.kv("candidates", d.candidates);
    report_verdict(&mut r, &d.verdict, &sa, &sb, d.gamma.as_ref(), cert.as_ref());
    Ok(r)
}

fn replay_report(
    mut r: Report,
    path: &Path,
    a: &Wps,
    b: &Wps,
    gamma: Option<Gamma>,
    cert: Option<Certificate>,
) -> Result<Report> {
    let text = read(path)?;
    let doc = io::parse_json(&text).map_err(|e| with_file(path, e))?;
    let witness = io::parse_witness(&text, a).map_err(|e| with_file(path, e))?;
    let gamma = match (gamma, doc.get("gamma")) {
        (Some(g), _) => g,
        (None, Some(g)) => io::gamma_from_value(g, a, b, "gamma").map_err(|e| with_file(path, e))?,
        (None, None) => Gamma::identity(&a.space()),
    };
    let cert = match (cert, doc.get("certificate")) {
        (Some(c), _) => Some(c),
        (None, Some(c)) => Some(io::certificate_from_value(c, a, b).map_err(|e| with_file(path, e))?),
        (None, None) => None,
    };
    let ok = replay_witness(a, b, &gamma, cert.as_ref(), &witness)?;
    r.line(format!("witness: {}", describe_witness(&witness, a)));
    r.line(if ok { "re-verified: the violation is genuine" } else { "NOT re-verified" });
    r.exit = if ok { 0 } else { 1 };
    r.kv("replay", if ok { "verified" } else { "rejected" });
    r.kv("exit", r.exit);
    Ok(r)
}

fn fock(system: &Path, element: &Path, op: FockOp, level: Option<usize>, degree: Option<usize>) -> Result<Report> {
    let sys = load_system(system)?;
    let Wps::Finite(fs) = &sys else {
        return Err(Error::Unsupported("Fock computations need a finite space".into()));
    };
    let q = Quiver::new(fs);
    let (space, t) = io::parse_element(&read(element)?, &q, &fs.labels, level).map_err(|e| with_file(element, e))?;
    let mut r = Report::default();
    r.kv("N", space.level);
    match op {
        FockOp::Norm => {
            let n = op_norm(&space, &t)?;
            r.line(format!("operator norm at truncation N = {}: {n:.12}", space.level));
            r.kv("norm", format!("{n:.12}"));
        }
        FockOp::Fourier => {
            let n = degree.ok_or_else(|| Error::Argument("--degree is required for fourier".into()))?;
            let band = t.fourier(n);
            let exact = matrix(&space, &band)?.to_float();
            let averaged = matrix(&space, &t)?.to_float().fourier_by_gauge(&space, n as i32);
            let err = exact.max_abs_diff(&averaged);
            r.line(format!("Φ_{n}(T), cross-checked against the gauge average (max deviation {err:.3e})"));
            r.kv("element", compact(&io::element_to_json(&space, &fs.labels, &band)));
            r.kv("gauge_deviation", format!("{err:.3e}"));
        }
        FockOp::Cesaro => {
            let k = degree.unwrap_or(space.level);
            let s = cesaro(&t, k);
            r.line(format!("Cesàro mean σ_{k}(T)"));
            r.kv("element", compact(&io::element_to_json(&space, &fs.labels, &s)));
        }
        FockOp::Mindeg => {
            let m = min_degree(&t)?;
            r.line(format!("minimal degree: {m}"));
            r.kv("mindeg", m);
        }
    }
    r.kv("exit", 0);
    Ok(r)
}

fn examples(name: &str, list: bool) -> Result<Report> {
    let mut r = Report::default();
    let entries = if name == "all" { corpus::entries() } else { vec![corpus::entry(name)?] };
    if list {
        for e in &entries {
            r.line(format!("{}: {}", e.name, e.summary));
        }
        r.kv("entries", entries.len());
        r.kv("exit", 0);
        return Ok(r);
    }
    let mut failed = 0;
    for e in &entries {
        r.line(format!("{}: {}", e.name, e.summary));
        for o in corpus::run(e)? {
            let status = if o.passed() { "ok" } else { "MISMATCH" };
            let replay = match o.replayed {
                Some(true) => ", witness replayed",
                Some(false) => ", witness did NOT replay",
                None => "",
            };
            r.line(format!("  {:<12} expected {:<12} got {:<12} {status}{replay}", o.check.name(), o.expected, o.verdict.name()));
            r.kv(&format!("{}.{}", e.name, o.check.name()), o.verdict.name());
            if !o.passed() {
                failed += 1;
            }
        }
    }
    r.exit = if failed == 0 { 0 } else { 1 };
    r.kv("mismatches", failed);
    r.kv("exit", r.exit);
    Ok(r)
}

fn selfcheck(seed: u64, count: usize) -> Result<Report> {
    let mut r = Report::default();
    let mut rng = random::rng(seed);
    let mut collapse_bad = 0;
    for _ in 0..count {
        let n = rand::Rng::gen_range(&mut rng, 1..=6);
        let a = random::matrix_system(&mut rng, n, 0.5);
        let perm = random::permutation(&mut rng, n);
        let b = random::relabel_reweight(&mut rng, &a, &perm);
        let found = find_graph_conjugacy_finite(&a, &b)?.is_some();
        let oracle = exhaustive_isomorphism(&a, &b).is_some();
        let (wa, wb) = (Wps::Finite(a), Wps::Finite(b));
        let all_hold = [Relation::Graph, Relation::BranchTransition, Relation::WeightedOrbit]
            .iter()
            .map(|&rel| decide(&wa, &wb, rel, None, None, DEFAULT_DEPTH).map(|d| d.verdict.holds()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|h| h);
        if !(found && oracle && all_hold) {
            collapse_bad += 1;
        }
    }
    let mut hierarchy_bad = 0;
    let mut hierarchy_total = 0;
    for e in corpus::entries() {
        hierarchy_total += 1;
        if !hierarchy_consistent(&e.a, &e.b, e.gamma.as_ref())? {
            hierarchy_bad += 1;
        }
    }
    for _ in 0..count {
        let a = random::finite_system(&mut rng, 5, 3);
        let b = if rand::Rng::gen_bool(&mut rng, 0.5) {
            let perm = random::permutation(&mut rng, a.len());
            random::relabel_reweight(&mut rng, &a, &perm)
        } else {
            random::finite_system(&mut rng, 5, 3)
        };
        hierarchy_total += 1;
        if !hierarchy_consistent(&Wps::Finite(a), &Wps::Finite(b), None)? {
            hierarchy_bad += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..count.max(1) * 5 {
        worst = worst.max(zeroing_residual(&random::mobius(&mut rng, 0.95))?);
    }
    let zeroing_ok = worst <= 1e-9;
    r.line(format!("seed {seed}"));
    r.line(format!("finite collapse: {}/{count} relabeled pairs satisfy all three relations", count - collapse_bad));
    r.line(format!("hierarchy: {}/{hierarchy_total} pairs consistent", hierarchy_total - hierarchy_bad));
    r.line(format!("zeroing: worst residual {worst:.3e}"));
    r.kv("seed", seed);
    r.kv("collapse_failures", collapse_bad);
    r.kv("hierarchy_failures", hierarchy_bad);
    r.kv("zeroing_worst_residual", format!("{worst:.3e}"));
    let ok = collapse_bad == 0 && hierarchy_bad == 0 && zeroing_ok;
    r.exit = if ok { 0 } else { 1 };
    r.kv("exit", r.exit);
    Ok(r)
}

/// `btc ⟹ woc ⟹ graph` for one pair.
pub fn hierarchy_consistent(a: &Wps, b: &Wps, gamma: Option<&Gamma>) -> Result<bool> {
    let v = |rel| decide(a, b, rel, gamma, None, DEFAULT_DEPTH).map(|d| d.verdict);
    let graph = v(Relation::Graph)?;
    let btc = v(Relation::BranchTransition)?;
    let woc = v(Relation::WeightedOrbit)?;
    Ok((!btc.holds() || woc.holds()) && (!woc.holds() || graph.holds()))
}

/// Prints a report and returns its exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let r = run(cli);
    print!("{}", r.render());
    r.exit
}
