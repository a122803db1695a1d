use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flatmod::boutroux::{continue_loop, periods, seed, BoutrouxPath, LoopSpec, Model};
use flatmod::cover::{build_cover, darboux_report, intersection_matrix, symplectic_basis};
use flatmod::forms::{casimir_check, kontsevich_form, leaf_rank, mk_check, perimeter_map, poisson_bivector};
use flatmod::moves::{dehn_twist, facet_signs, orientation_check, pentagon, transport_basis, whitehead, MoveSequence};
use flatmod::ribbon::{enumerate, validate, GraphFile, RibbonGraph, ValenceFilter};
use flatmod::suite::{run_suite, SuiteConfig};
use flatmod::tau::{homogeneity_check, ledger, track_monodromy, Which};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "flatmod", version, about = "Flat combinatorial model of moduli spaces of curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ribbon graph files.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Kontsevich form and Poisson bivector.
    #[command(subcommand)]
    Forms(FormsCmd),
    /// Double cover and odd homology.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Whitehead moves, pentagons and Dehn twists.
    #[command(subcommand)]
    Moves(MovesCmd),
    /// Boutroux curves and loops.
    #[command(subcommand)]
    Boutroux(BoutrouxCmd),
    /// Tau function monodromies and the class ledger.
    #[command(subcommand)]
    Tau(TauCmd),
    /// Run the acceptance matrix.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    Validate { file: PathBuf },
    Enumerate {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        faces: usize,
        #[arg(long, conflicts_with = "valences")]
        trivalent: bool,
        /// Comma-separated vertex valences.
        #[arg(long, value_delimiter = ',')]
        valences: Option<Vec<usize>>,
        /// Write one graph file per graph into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    Canon { file: PathBuf },
}

#[derive(Subcommand)]
enum FormsCmd {
    Kontsevich { file: PathBuf },
    Bivector { file: PathBuf },
    MkCheck { file: PathBuf },
}

#[derive(Subcommand)]
enum CoverCmd {
    Build { file: PathBuf },
    Homology { file: PathBuf },
    Darboux { file: PathBuf },
}

#[derive(Args)]
struct MoveArgs {
    file: PathBuf,
    #[arg(long)]
    edge: usize,
    #[arg(long)]
    edge2: Option<usize>,
}

#[derive(Subcommand)]
enum MovesCmd {
    Whitehead(MoveArgs),
    Pentagon(MoveArgs),
    Dehn(MoveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Pentagon,
    Dehn,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Pentagon => Model::Pentagon,
            ModelArg::Dehn => Model::Dehn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    Plus,
    Minus,
}

impl From<WhichArg> for Which {
    fn from(w: WhichArg) -> Which {
        match w {
            WhichArg::Plus => Which::Plus,
            WhichArg::Minus => Which::Minus,
        }
    }
}

#[derive(Subcommand)]
enum BoutrouxCmd {
    /// On-locus configuration with equal-ish edge periods.
    Seed {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
    },
    Loop {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        /// Base steps per cell.
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TauCmd {
    Monodromy {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, value_enum)]
        which: WhichArg,
    },
    Homogeneity {
        #[arg(long, value_enum)]
        model: ModelArg,
    },
    Ledger {
        /// Run all four loops and use the measured units.
        #[arg(long, conflicts_with = "units")]
        auto: bool,
        /// Units for (W5, plus), (W5, minus), (W11, plus), (W11, minus).
        #[arg(long, value_delimiter = ',')]
        units: Option<Vec<i64>>,
    },
}

/// Verdict of a command: printed JSON and whether every check passed.
struct Output {
    value: Value,
    passed: bool,
}

fn ok(value: impl Serialize) -> Result<Output> {
    Ok(Output { value: serde_json::to_value(value)?, passed: true })
}

fn verdict(value: Value, passed: bool) -> Result<Output> {
    Ok(Output { value, passed })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_graph(path: &Path) -> Result<RibbonGraph> {
    let f: GraphFile = read_json(path)?;
    let report = validate(&f);
    if !report.is_valid() {
        bail!("invalid graph: {}", report.issues.join("; "));
    }
    Ok(RibbonGraph::from_file(&f)?)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sequence_json(seq: &MoveSequence) -> Value {
    json!({
        "moves": seq.moves.iter().map(|m| json!({
            "edge": m.moved_edge,
            "rule": format!("{:?}", m.rule).to_lowercase(),
            "corners": m.corners,
            "after": m.after.to_file(),
        })).collect::<Vec<_>>(),
        "transports": seq.transports,
        "closure": seq.closure,
        "composite_minus": seq.composite_minus,
        "composite_plus": seq.composite_plus,
        "facets": seq.facets,
        "closed": seq.is_closed(),
        "symplectic": seq.is_symplectic(),
        "trivial_on_cycles": seq.trivial_on_cycles(),
    })
}

fn graph(cmd: GraphCmd) -> Result<Output> {
    match cmd {
        GraphCmd::Validate { file } => {
            let f: GraphFile = read_json(&file)?;
            let r = validate(&f);
            let valid = r.is_valid();
            verdict(json!({ "valid": valid, "issues": r.issues }), valid)
        }
        GraphCmd::Enumerate { genus, faces, trivalent, valences, out_dir } => {
            let filter = match (trivalent, valences) {
                (_, Some(v)) => ValenceFilter::Valences(v),
                (true, None) => ValenceFilter::Trivalent,
                (false, None) => bail!("give --trivalent or --valences"),
            };
            let graphs = enumerate(genus, faces, &filter)?;
            let files: Vec<GraphFile> = graphs.iter().map(|g| g.to_file()).collect();
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)?;
                for (i, f) in files.iter().enumerate() {
                    write_json(&dir.join(format!("g{genus}_n{faces}_{i}.json")), f)?;
                }
            }
            ok(json!({ "count": files.len(), "graphs": files }))
        }
        GraphCmd::Canon { file } => {
            let g = load_graph(&file)?;
            ok(json!({ "code": g.canonical_form(), "graph": g.canonical_graph().to_file() }))
        }
    }
}

fn forms(cmd: FormsCmd) -> Result<Output> {
    match cmd {
        FormsCmd::Kontsevich { file } => ok(kontsevich_form(&load_graph(&file)?)),
        FormsCmd::Bivector { file } => ok(poisson_bivector(&load_graph(&file)?)),
        FormsCmd::MkCheck { file } => {
            let g = load_graph(&file)?;
            let mk = mk_check(&g);
            let casimir = casimir_check(&g);
            let rank = leaf_rank(&g).ok();
            let passed = mk.holds_mod_perimeters && casimir;
            verdict(json!({ "mk": mk, "casimir": casimir, "leaf_rank": rank, "perimeters": perimeter_map(&g) }), passed)
        }
    }
}

fn cover(cmd: CoverCmd) -> Result<Output> {
    match cmd {
        CoverCmd::Build { file } => {
            let c = build_cover(&load_graph(&file)?)?;
            let passed = c.genus() == c.formula_genus() && c.deck_is_automorphism();
            verdict(
                json!({
                    "cover": c.cover_graph.to_file(),
                    "branch_vertices": c.branch_vertices,
                    "deck_involution": c.deck_involution,
                    "genus": c.genus(),
                    "formula_genus": c.formula_genus(),
                }),
                passed,
            )
        }
        CoverCmd::Homology { file } => {
            let h = intersection_matrix(&load_graph(&file)?)?;
            let sb = symplectic_basis(&h)?;
            ok(json!({ "homology": h, "basis": sb }))
        }
        CoverCmd::Darboux { file } => {
            let r = darboux_report(&load_graph(&file)?)?;
            let passed = r.holds && r.j_equals_four_p;
            verdict(serde_json::to_value(r)?, passed)
        }
    }
}

fn moves(cmd: MovesCmd) -> Result<Output> {
    match cmd {
        MovesCmd::Whitehead(a) => {
            let g = load_graph(&a.file)?;
            let m = whitehead(&g, a.edge)?;
            let t = transport_basis(&m)?;
            let signs = facet_signs(&m)?;
            let passed = orientation_check(&m);
            verdict(json!({ "after": m.after.to_file(), "corners": m.corners, "transport": t, "facet": signs, "orientation_ok": passed }), passed)
        }
        MovesCmd::Pentagon(a) => {
            let g = load_graph(&a.file)?;
            let e2 = a.edge2.context("--edge2 is required")?;
            let seq = pentagon(&g, a.edge, e2)?;
            let passed = seq.is_closed() && seq.is_symplectic();
            verdict(sequence_json(&seq), passed)
        }
        MovesCmd::Dehn(a) => {
            let g = load_graph(&a.file)?;
            let e2 = a.edge2.context("--edge2 is required")?;
            let (seq, action) = dehn_twist(&g, a.edge, e2)?;
            let passed = seq.is_closed() && seq.is_symplectic() && action.rank_mod_radical == 1;
            let mut v = sequence_json(&seq);
            v["action"] = serde_json::to_value(action)?;
            verdict(v, passed)
        }
    }
}

fn boutroux(cmd: BoutrouxCmd) -> Result<Output> {
    match cmd {
        BoutrouxCmd::Seed { model, t } => {
            let c = seed(model.into(), t)?;
            let p = periods(&c)?;
            ok(json!({ "curve": c, "periods": p }))
        }
        BoutrouxCmd::Loop { model, t, steps, out } => {
            let spec = LoopSpec { steps, ..LoopSpec::new(model.into(), t) };
            let path = continue_loop(&spec)?;
            let summary = json!({
                "model": path.model,
                "walls": path.walls,
                "orientation": path.orientation,
                "closure_error": path.closure_error,
                "max_residual": path.max_residual,
                "samples": path.samples().count(),
            });
            match out {
                Some(p) => {
                    write_json(&p, &path)?;
                    ok(summary)
                }
                None => ok(path),
            }
        }
    }
}

fn tau(cmd: TauCmd) -> Result<Output> {
    match cmd {
        TauCmd::Monodromy { path, which } => {
            let p: BoutrouxPath = read_json(&path)?;
            ok(track_monodromy(&p, which.into())?)
        }
        TauCmd::Homogeneity { model } => {
            let c = seed(model.into(), 2.0)?;
            let rs = [Which::Plus, Which::Minus].map(|w| homogeneity_check(&c, w));
            let rs = rs.into_iter().collect::<Result<Vec<_>, _>>()?;
            let passed = rs.iter().all(|h| h.error < 1e-8);
            verdict(serde_json::to_value(rs)?, passed)
        }
        TauCmd::Ledger { auto, units } => {
            let u: [i64; 4] = match (auto, units) {
                (_, Some(u)) => u.try_into().map_err(|_| anyhow::anyhow!("--units takes four integers"))?,
                (true, None) => {
                    let mut u = [0; 4];
                    for (k, m) in [Model::Pentagon, Model::Dehn].into_iter().enumerate() {
                        let path = continue_loop(&LoopSpec::new(m, 2.0))?;
                        u[2 * k] = track_monodromy(&path, Which::Plus)?.units;
                        u[2 * k + 1] = track_monodromy(&path, Which::Minus)?.units;
                    }
                    u
                }
                (false, None) => bail!("give --auto or --units"),
            };
            let l = ledger(u);
            let display: Vec<String> = l.relations().iter().map(|r| r.display()).collect();
            ok(json!({ "ledger": l, "relations": display }))
        }
    }
}

fn suite(config: Option<PathBuf>, out: Option<PathBuf>) -> Result<Output> {
    let cfg: SuiteConfig = match config {
        Some(p) => read_json(&p)?,
        None => SuiteConfig::default(),
    };
    cfg.validate()?;
    let report = run_suite(&cfg)?;
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    if let Some(p) = out {
        write_json(&p, &report)?;
    }
    let passed = report.all_passed();
    verdict(serde_json::to_value(report)?, passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Graph(c) => graph(c),
        Command::Forms(c) => forms(c),
        Command::Cover(c) => cover(c),
        Command::Moves(c) => moves(c),
        Command::Boutroux(c) => boutroux(c),
        Command::Tau(c) => tau(c),
        Command::Suite { config, out } => suite(config, out),
    };
    match result {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o.value).expect("serializable"));
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
