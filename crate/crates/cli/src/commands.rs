use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use profile_ugm::bayes_em::{EStepRule, Init, OmegaSolverOptions, TraceEntry, DEFAULT_Q_MAX};
use profile_ugm::evaluation::{self, Cuts, Metrics};
use profile_ugm::gaussian::{extract_profile_graph, ParamsDocument};
use profile_ugm::markov::{self, ChainDocument, ChainGraph, IndependenceStatement, Statement};
use profile_ugm::simulation::{self, Baseline, Scenario, ScenarioSpec};
use profile_ugm::{io, Error, Fit, FitConfig, Hyper, Matrix, MultipleGraphs, Params, ProfileGraph, Result, StateSpace, Summaries};

use crate::args::*;

pub struct Ctx {
    pub verbose: bool,
    pub quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn need_input(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::input(format!("input `{}` does not exist", path.display())))
    }
}

fn need_output_file(path: &Path) -> Result<()> {
    if path.is_dir() {
        return Err(Error::input(format!("output `{}` is a directory", path.display())));
    }
    match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(parent) if !parent.is_dir() => {
            Err(Error::input(format!("directory `{}` does not exist", parent.display())))
        }
        _ => Ok(()),
    }
}

fn check_paths(inputs: &[&Path], outputs: &[Option<&PathBuf>]) -> Result<()> {
    inputs.iter().try_for_each(|p| need_input(p))?;
    outputs.iter().flatten().try_for_each(|p| need_output_file(p))
}

/// Writes to `out` when given, stdout otherwise.
fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, text),
        None => stdout(text),
    }
}

/// A closed pipe on stdout (`pugm ... | head`) is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let nl = if text.ends_with('\n') { "" } else { "\n" };
    match out.write_all(text.as_bytes()).and_then(|()| out.write_all(nl.as_bytes())).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn to_json<V: Serialize>(v: &V) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

/// A fitted model on disk.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelDocument {
    pub params: ParamsDocument<f64>,
    pub summaries: Summaries,
    pub hyperparameters: Hyper,
    pub iterations: usize,
    pub converged: bool,
}

impl ModelDocument {
    fn load(path: &Path) -> Result<(Params, Summaries)> {
        let doc: ModelDocument = io::load_json(path)?;
        let wrap = |e: Error| Error::Parse { path: path.display().to_string(), message: e.to_string() };
        let params = Params::try_from(doc.params).map_err(wrap)?;
        doc.summaries.check().map_err(wrap)?;
        if doc.summaries.p() != params.p() || doc.summaries.q() != params.q() {
            return Err(wrap(Error::input("summaries and parameters disagree in shape")));
        }
        Ok((params, doc.summaries))
    }
}

fn hyperparameters(args: &HyperArgs) -> Result<Hyper> {
    let mut h = match &args.hyper {
        Some(path) => {
            need_input(path)?;
            io::load_json(path)?
        }
        None => Hyper::default(),
    };
    let overrides = [
        (&mut h.p1, args.p1),
        (&mut h.p2, args.p2),
        (&mut h.p3, args.p3),
        (&mut h.p4, args.p4),
        (&mut h.nu0, args.nu0),
        (&mut h.nu1, args.nu1),
        (&mut h.lambda0, args.lambda0),
        (&mut h.lambda1, args.lambda1),
        (&mut h.tau, args.tau),
        (&mut h.spectral_bound, args.spectral_bound),
    ];
    for (slot, v) in overrides {
        if let Some(v) = v {
            *slot = v;
        }
    }
    h.validate()?;
    Ok(h)
}

fn fit_config(em: &EmArgs, track_posterior: bool) -> FitConfig<f64> {
    FitConfig {
        max_iter: em.max_iter,
        tol: em.tol,
        init: Init::Default,
        rule: match em.estep {
            EStepArg::Auto => EStepRule::Auto,
            EStepArg::Exact => EStepRule::Exact,
            EStepArg::Factorized => EStepRule::Factorized,
        },
        q_max: DEFAULT_Q_MAX,
        omega_solver: OmegaSolverOptions::default(),
        track_posterior,
    }
}

fn cuts(c: &CutArgs) -> Cuts {
    Cuts { edge: c.edge_cut, vertex: c.vertex_cut }
}

fn levels_of(params: &Params) -> Result<StateSpace> {
    StateSpace::new(params.levels().to_vec())
}

pub fn run(command: Command, ctx: &Ctx) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a, ctx),
        Command::Fit(a) => fit(a, ctx),
        Command::ExtractGraph(a) => extract(a, ctx),
        Command::EnumerateIndependencies(a) => enumerate(a),
        Command::ChainClass(a) => chain_class(a),
        Command::CheckCompat(a) => check_compat(a),
        Command::VerifyThm1(a) => verify(a, ctx),
        Command::Evaluate(a) => evaluate(a),
        Command::Robustness(a) => robustness(a, ctx),
        Command::ExportDot(a) => export_dot(a),
    }
}

fn simulate(a: SimulateArgs, ctx: &Ctx) -> Result<()> {
    if a.out.is_file() {
        return Err(Error::input(format!("output `{}` is a file, expected a directory", a.out.display())));
    }
    let spec = ScenarioSpec {
        scenario: Scenario::try_from(a.scenario)?,
        p: a.p,
        q: a.q,
        s: a.s,
        n: a.n,
        seed: a.seed,
        baseline: match a.baseline {
            BaselineArg::Indexed => Baseline::Indexed,
            BaselineArg::Unit => Baseline::Unit,
        },
    };
    spec.validate()?;
    let sim = simulation::generate::<f64>(&spec)?;
    io::save_dataset_dir(&sim.dataset, &a.out)?;
    io::save_params(&sim.truth.params, &a.out.join("truth_params.json"))?;
    io::save_graph(&sim.truth.graph, &a.out.join("truth_graph.json"))?;
    io::write_text(&a.out.join("spec.json"), &to_json(&spec)?)?;
    ctx.info(format!("wrote {} levels x {} rows to {}", spec.q, spec.n, a.out.display()));
    Ok(())
}

fn trace_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("iteration,q,q_before,max_delta_omega,max_delta_beta,log_posterior\n");
    for t in trace {
        let lp = t.log_posterior.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t.iteration, t.q, t.q_before, t.max_delta_omega, t.max_delta_beta, lp
        );
    }
    out
}

fn fit(a: FitArgs, ctx: &Ctx) -> Result<()> {
    check_paths(&[&a.data], &[Some(&a.out), a.trace.as_ref()])?;
    let hyper = hyperparameters(&a.hyper)?;
    let data = io::load_dataset::<f64>(&a.data)?;
    ctx.note(format!("loaded p = {}, q = {}, n = {}", data.p(), data.q(), data.total_n()));
    let state: Fit = profile_ugm::bayes_em::fit(&data, &hyper, &fit_config(&a.em, a.track_posterior))?;
    ctx.info(format!(
        "{} after {} iterations",
        if state.converged { "converged" } else { "stopped" },
        state.iterations
    ));
    let doc = ModelDocument {
        params: state.params.to_document(),
        summaries: state.summaries,
        hyperparameters: hyper,
        iterations: state.iterations,
        converged: state.converged,
    };
    io::write_text(&a.out, &to_json(&doc)?)?;
    if let Some(path) = &a.trace {
        io::write_text(path, &trace_csv(&state.trace))?;
    }
    Ok(())
}

fn extract(a: ExtractArgs, ctx: &Ctx) -> Result<()> {
    check_paths(&[&a.model], &[a.out.as_ref()])?;
    let (params, summaries) = ModelDocument::load(&a.model)?;
    let e = extract_profile_graph(
        &summaries,
        levels_of(&params)?,
        params.vertices().to_vec(),
        a.cuts.edge_cut,
        a.cuts.vertex_cut,
    )?;
    if !e.demoted.is_empty() {
        ctx.info(format!("kept as circles (on a dotted edge): {}", e.demoted.join(", ")));
    }
    emit(a.out.as_ref(), &e.graph.to_json())
}

fn enumerate(a: EnumerateArgs) -> Result<()> {
    check_paths(&[&a.graph], &[a.out.as_ref()])?;
    let g = io::load_graph(&a.graph)?;
    let stmts: Vec<IndependenceStatement> = match a.property {
        Property::Pmp => markov::pairwise_statements(&g)?,
        Property::Lmp => markov::local_statements(&g)?,
        Property::Csmp => markov::csmp_statements(&g, a.cap)?,
        Property::Gmp => markov::gmp_statements(&g, a.cap)?,
    };
    let stmts: Vec<Statement> = stmts.into_iter().map(Statement::Independence).collect();
    let text = match a.format {
        Format::Text => stmts.iter().map(|s| s.render(g.vertices(), g.levels()) + "\n").collect(),
        Format::Json => {
            let docs: Vec<_> = stmts.iter().map(|s| s.to_document(g.vertices(), g.levels())).collect();
            to_json(&docs)?
        }
    };
    emit(a.out.as_ref(), &text)
}

#[derive(Serialize)]
struct ClassDocument {
    min: ChainDocument,
    max: ChainDocument,
    unique: ChainDocument,
}

fn chain_class(a: GraphIo) -> Result<()> {
    check_paths(&[&a.graph], &[a.out.as_ref()])?;
    let g = io::load_graph(&a.graph)?;
    let c = markov::induced_chain_class(&g);
    let doc = ClassDocument {
        min: ChainDocument::from(&c.min),
        max: ChainDocument::from(&c.max),
        unique: ChainDocument::from(&c.unique),
    };
    emit(a.out.as_ref(), &to_json(&doc)?)
}

fn check_compat(a: CheckCompatArgs) -> Result<()> {
    check_paths(&[&a.graph, &a.chain], &[a.out.as_ref()])?;
    let g = io::load_graph(&a.graph)?;
    let chain = io::load_json::<ChainDocument>(&a.chain)
        .and_then(|d| ChainGraph::try_from(&d))
        .map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::Parse { path: a.chain.display().to_string(), message: other.to_string() },
        })?;
    let c = markov::is_markov_compatible(&chain, &g)?;
    emit(a.out.as_ref(), &to_json(&c)?)
}

fn verify(a: VerifyArgs, ctx: &Ctx) -> Result<()> {
    check_paths(&[], &[a.out.as_ref()])?;
    let report = markov::verify_thm1(a.p, a.q)?;
    ctx.info(format!(
        "{} of {} graphs satisfy the equivalence",
        report.holds, report.graphs
    ));
    emit(a.out.as_ref(), &to_json(&report)?)
}

#[derive(Serialize)]
struct EvaluationDocument {
    levels: Vec<String>,
    per_level: Vec<evaluation::Counts>,
    pooled: evaluation::Counts,
    per_level_metrics: Vec<Metrics>,
    pooled_metrics: Metrics,
    auc: Option<f64>,
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let sources: Vec<&Path> = [&a.estimate, &a.edges, &a.model].into_iter().flatten().map(PathBuf::as_path).collect();
    let mut inputs = vec![a.truth.as_path()];
    inputs.extend(sources);
    check_paths(&inputs, &[a.out.as_ref()])?;
    let truth = io::load_graph(&a.truth)?;
    let truth_graphs = truth.induced_multiple_graphs();
    let (estimate, scores): (MultipleGraphs, Option<Vec<Matrix<f64>>>) = if let Some(path) = &a.estimate {
        let g = io::load_graph(path)?;
        if g.vertices() != truth.vertices() || g.levels() != truth.levels() {
            return Err(Error::input("estimate and truth have different vertices or levels"));
        }
        (g.induced_multiple_graphs(), None)
    } else if let Some(path) = &a.edges {
        let (g, s) = io::load_edge_list(path, truth.levels(), truth.vertices())?;
        (g, Some(s))
    } else {
        let path = a.model.as_ref().expect("clap requires one estimate source");
        let (params, summaries) = ModelDocument::load(path)?;
        if params.vertices() != truth.vertices() || params.levels() != truth.levels().names() {
            return Err(Error::input("model and truth have different vertices or levels"));
        }
        let c = cuts(&a.cuts);
        let e = extract_profile_graph(&summaries, levels_of(&params)?, params.vertices().to_vec(), c.edge, c.vertex)?;
        (e.graph.induced_multiple_graphs(), Some(summaries.r))
    };
    let conf = evaluation::confusion(&truth_graphs, &estimate)?;
    let auc = match &scores {
        Some(s) => evaluation::auc(s, &truth_graphs)?,
        None => None,
    };
    let doc = EvaluationDocument {
        levels: truth.levels().names().to_vec(),
        per_level_metrics: conf.per_level.iter().map(evaluation::metrics).collect(),
        pooled_metrics: evaluation::metrics(&conf.pooled),
        per_level: conf.per_level,
        pooled: conf.pooled,
        auc,
    };
    emit(a.out.as_ref(), &to_json(&doc)?)
}

fn robustness(a: RobustnessArgs, ctx: &Ctx) -> Result<()> {
    check_paths(&[&a.data], &[a.out.as_ref()])?;
    let hyper = hyperparameters(&a.hyper)?;
    let data = io::load_dataset::<f64>(&a.data)?;
    ctx.note(format!("{} repetitions dropping {} of each level", a.reps, a.fraction));
    let report = evaluation::robustness_harness(&data, &hyper, &fit_config(&a.em, false), cuts(&a.cuts), a.fraction, a.reps, a.seed)?;
    stdout(&report.render_table())?;
    if let Some(path) = &a.out {
        io::write_text(path, &to_json(&report)?)?;
    }
    Ok(())
}

fn export_dot(a: GraphIo) -> Result<()> {
    check_paths(&[&a.graph], &[a.out.as_ref()])?;
    let g: ProfileGraph = io::load_graph(&a.graph)?;
    emit(a.out.as_ref(), &g.to_dot())
}
