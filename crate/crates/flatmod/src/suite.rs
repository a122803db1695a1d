//! The acceptance matrix: exact suites over enumerated ribbon graphs and the
//! numerical monodromies of the two local models.

use crate::boutroux::{continue_loop, seed, BoutrouxError, BoutrouxPath, LoopSpec, Model};
use crate::cover::{build_cover, darboux_check};
use crate::forms::{casimir_check, leaf_rank, mk_check};
use crate::moves::{dehn_twist, orientation_check, pentagon, whitehead, MovesError};
use crate::ribbon::{enumerate, RibbonError, RibbonGraph, ValenceFilter};
use crate::tau::{eta_deviation, homogeneity_check, ledger, track_monodromy, ClassLedger, MonodromyResult, TauError, Which};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// (genus, faces) pairs enumerated with trivalent vertices.
    pub targets: Vec<(usize, usize)>,
    /// Monodromy residual bound, radians.
    pub angle_tolerance: f64,
    pub omega_tolerance: f64,
    pub eta_tolerance: f64,
    pub homogeneity_tolerance: f64,
    pub scale: f64,
    pub steps: usize,
    pub epsilon: f64,
    pub output_dir: Option<String>,
    pub threads: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            targets: vec![(0, 3), (0, 4), (1, 1), (1, 2)],
            angle_tolerance: 1e-3,
            omega_tolerance: 1e-3,
            eta_tolerance: 1e-6,
            homogeneity_tolerance: 1e-8,
            scale: 2.0,
            steps: 400,
            epsilon: 1e-7,
            output_dir: None,
            threads: None,
        }
    }
}

/// Largest edge count the enumerator is asked for.
pub const MAX_EDGES: i64 = 9;

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), SuiteError> {
        for &(g, n) in &self.targets {
            let (g, n) = (g as i64, n as i64);
            if 2 * g - 2 + n <= 0 || n == 0 {
                return Err(SuiteError::Config(format!("({g},{n}) is not a stable type")));
            }
            if 6 * g - 6 + 3 * n > MAX_EDGES {
                return Err(SuiteError::Config(format!("({g},{n}) exceeds the enumeration bound of {MAX_EDGES} edges")));
            }
        }
        let tolerances = [self.angle_tolerance, self.omega_tolerance, self.eta_tolerance, self.homogeneity_tolerance];
        if tolerances.iter().any(|t| !(*t >= 0.0)) {
            return Err(SuiteError::Config("tolerances must be non-negative".into()));
        }
        if !(self.scale > 0.0) || self.steps == 0 || !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(SuiteError::Config("loop parameters out of range".into()));
        }
        Ok(())
    }

    fn threads(&self) -> usize {
        std::env::var("FLATMOD_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
            .or(self.threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!("criterion {} [{}] {}: {} ({:.2}s)", self.id, if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail, self.seconds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionResult>,
    pub monodromies: Vec<MonodromyResult>,
    pub ledger: Option<ClassLedger>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Genus 1, two faces, one 5-valent and one trivalent vertex.
pub fn five_valent_graph() -> RibbonGraph {
    RibbonGraph::new(vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7]], vec![[0, 5], [1, 6], [2, 3], [4, 7]]).expect("valid graph")
}

#[derive(Debug, Clone)]
pub struct SuiteGraph {
    pub name: String,
    pub graph: RibbonGraph,
}

pub fn suite_graphs(targets: &[(usize, usize)]) -> Result<Vec<SuiteGraph>, SuiteError> {
    let mut out = Vec::new();
    for &(g, n) in targets {
        for (i, graph) in enumerate(g, n, &ValenceFilter::Trivalent)?.into_iter().enumerate() {
            out.push(SuiteGraph { name: format!("({g},{n})#{i}"), graph });
        }
    }
    out.push(SuiteGraph { name: "five-valent".into(), graph: five_valent_graph() });
    Ok(out)
}

fn timed(id: u8, name: &str, f: impl FnOnce() -> (bool, String)) -> CriterionResult {
    let t = Instant::now();
    let (passed, detail) = f();
    CriterionResult { id, name: name.into(), passed, detail, seconds: t.elapsed().as_secs_f64() }
}

pub fn criterion_darboux(graphs: &[SuiteGraph]) -> CriterionResult {
    timed(1, "exact Darboux suite", || {
        let bad: Vec<_> = graphs.iter().filter(|g| !matches!(darboux_check(&g.graph), Ok(true))).map(|g| g.name.clone()).collect();
        (bad.is_empty(), format!("{} graphs, failures {:?}", graphs.len(), bad))
    })
}

pub fn criterion_mk(graphs: &[SuiteGraph]) -> CriterionResult {
    timed(2, "inverse identity, Casimirs and leaf rank", || {
        let mut bad = Vec::new();
        for g in graphs {
            let gr = &g.graph;
            // Top cells have leaf dimension 6g−6+2n; lower cells are checked for full rank E − F.
            let expected = if gr.is_trivalent() {
                6 * gr.genus() as i64 - 6 + 2 * gr.face_count() as i64
            } else {
                gr.edge_count() as i64 - gr.face_count() as i64
            };
            let rank_ok = leaf_rank(gr).is_ok_and(|r| r as i64 == expected);
            if !(mk_check(gr).holds_mod_perimeters && casimir_check(gr) && rank_ok) {
                bad.push(g.name.clone());
            }
        }
        (bad.is_empty(), format!("{} graphs, failures {:?}", graphs.len(), bad))
    })
}

pub fn criterion_cover(graphs: &[SuiteGraph]) -> CriterionResult {
    timed(3, "double cover genus", || {
        let bad: Vec<_> = graphs
            .iter()
            .filter(|g| !build_cover(&g.graph).is_ok_and(|c| c.genus() == c.formula_genus()))
            .map(|g| g.name.clone())
            .collect();
        (bad.is_empty(), format!("{} graphs, failures {:?}", graphs.len(), bad))
    })
}

/// Outcome of all Whitehead-move checks on the trivalent part of the suite.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MovesSummary {
    pub pentagons: usize,
    pub pentagon_failures: Vec<String>,
    pub twists: usize,
    pub twist_failures: Vec<String>,
    /// Distinct k₋ values along the positive loops.
    pub k_minus: Vec<String>,
    pub flips: usize,
    pub orientation_failures: Vec<String>,
}

pub fn moves_summary(graphs: &[SuiteGraph]) -> MovesSummary {
    let mut s = MovesSummary::default();
    for g in graphs.iter().filter(|g| g.graph.is_trivalent()) {
        let gr = &g.graph;
        let n = gr.edge_count();
        for e in 0..n {
            if let Ok(m) = whitehead(gr, e) {
                s.flips += 1;
                if !orientation_check(&m) {
                    s.orientation_failures.push(format!("{} e{e}", g.name));
                }
            }
        }
        for e1 in 0..n {
            for e2 in 0..n {
                if e1 == e2 {
                    continue;
                }
                match pentagon(gr, e1, e2) {
                    Ok(seq) => {
                        s.pentagons += 1;
                        if !(seq.moves.len() == 5 && seq.is_closed() && seq.is_symplectic() && seq.trivial_on_cycles()) {
                            s.pentagon_failures.push(format!("{} ({e1},{e2})", g.name));
                        }
                    }
                    Err(MovesError::NotAdjacent(..)) | Err(MovesError::DehnConfiguration(..)) | Err(MovesError::Loop(_)) => {}
                    Err(err) => s.pentagon_failures.push(format!("{} ({e1},{e2}): {err}", g.name)),
                }
                if e1 < e2 {
                    match dehn_twist(gr, e1, e2) {
                        Ok((seq, act)) => {
                            s.twists += 1;
                            let radical_zero = act.radical_part.iter().all(|c| c == "0");
                            let plus_ok = act.k_plus.is_none_or(|k| 2 * k == act.k_minus.parse::<i64>().unwrap_or(0));
                            if !(seq.is_closed() && seq.is_symplectic() && act.rank_mod_radical == 1 && radical_zero && plus_ok) {
                                s.twist_failures.push(format!("{} ({e1},{e2})", g.name));
                            }
                            if !s.k_minus.contains(&act.k_minus) {
                                s.k_minus.push(act.k_minus.clone());
                            }
                        }
                        Err(MovesError::NotDoubleEdge(..)) | Err(MovesError::BoundsFace(..)) | Err(MovesError::Loop(_)) => {}
                        Err(err) => s.twist_failures.push(format!("{} ({e1},{e2}): {err}", g.name)),
                    }
                }
            }
        }
    }
    s
}

pub fn criterion_moves(graphs: &[SuiteGraph]) -> CriterionResult {
    timed(4, "pentagon, Dehn twist and facet orientation", || {
        let s = moves_summary(graphs);
        // Along the loop with J(e, ẽ) > 0 the twist is b ↦ b + 2a; the
        // inverse loop gives b ↦ b − 2a.
        let twist_ok = s.k_minus.iter().all(|k| k == "2");
        let passed = s.pentagon_failures.is_empty()
            && s.twist_failures.is_empty()
            && s.orientation_failures.is_empty()
            && s.pentagons > 0
            && s.twists > 0
            && twist_ok;
        let detail = format!(
            "{} pentagons closed in 5, symplectic; {} twists with b -> b + {}a (+ radical 0) on the positive loop, b - 2a on its inverse; {} flips orientation-checked; failures {:?} {:?} {:?}",
            s.pentagons,
            s.twists,
            s.k_minus.join("|"),
            s.flips,
            s.pentagon_failures,
            s.twist_failures,
            s.orientation_failures
        );
        (passed, detail)
    })
}

fn monodromy_detail(m: &MonodromyResult) -> String {
    format!("{:?} {:?}: {} units (raw {:.9}, residual {:.2e})", m.model, m.which, m.units, m.raw_increment, m.residual)
}

/// Loops for both models, run concurrently when more than one thread is allowed.
pub fn loops(cfg: &SuiteConfig) -> [(Result<BoutrouxPath, BoutrouxError>, f64); 2] {
    let spec = |m| LoopSpec { steps: cfg.steps, epsilon: cfg.epsilon, ..LoopSpec::new(m, cfg.scale) };
    let run = |m| {
        let t = Instant::now();
        let r = continue_loop(&spec(m));
        (r, t.elapsed().as_secs_f64())
    };
    if cfg.threads() > 1 {
        std::thread::scope(|s| {
            let h = s.spawn(|| run(Model::Dehn));
            let p = run(Model::Pentagon);
            [p, h.join().expect("loop thread")]
        })
    } else {
        [run(Model::Pentagon), run(Model::Dehn)]
    }
}

fn loop_criterion(
    id: u8,
    name: &str,
    path: &Result<BoutrouxPath, BoutrouxError>,
    seconds: f64,
    expected: [i64; 2],
    cfg: &SuiteConfig,
    out: &mut Vec<MonodromyResult>,
) -> CriterionResult {
    let t = Instant::now();
    let (passed, detail) = match path {
        Err(e) => (false, format!("loop failed: {e}")),
        Ok(p) => {
            let r: Result<Vec<MonodromyResult>, TauError> = [Which::Plus, Which::Minus].iter().map(|&w| track_monodromy(p, w)).collect();
            match r {
                Err(e) => (false, format!("tracking failed: {e}")),
                Ok(ms) => {
                    let units_ok = ms[0].units == expected[0] && ms[1].units == expected[1];
                    let res_ok = ms.iter().all(|m| m.residual < cfg.angle_tolerance);
                    let omega_ok = ms[1].omega1_increment.abs() < cfg.omega_tolerance;
                    let walls_ok = p.walls == p.model.expected_walls();
                    let detail = format!(
                        "{} walls, closure {:.1e}; {}; {}; omega1 net {:.2e}",
                        p.walls,
                        p.closure_error,
                        monodromy_detail(&ms[0]),
                        monodromy_detail(&ms[1]),
                        ms[1].omega1_increment
                    );
                    out.extend(ms);
                    (units_ok && res_ok && omega_ok && walls_ok, detail)
                }
            }
        }
    };
    CriterionResult { id, name: name.into(), passed, detail, seconds: seconds + t.elapsed().as_secs_f64() }
}

pub fn criterion_homogeneity(cfg: &SuiteConfig) -> CriterionResult {
    timed(7, "homogeneity exponents", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for m in [Model::Pentagon, Model::Dehn] {
            let c = match seed(m, cfg.scale) {
                Ok(c) => c,
                Err(e) => return (false, format!("{m:?} seed failed: {e}")),
            };
            for w in [Which::Plus, Which::Minus] {
                match homogeneity_check(&c, w) {
                    Ok(h) => {
                        ok &= h.error < cfg.homogeneity_tolerance;
                        parts.push(format!("{m:?} {w:?} {:.10} vs {} (err {:.1e})", h.measured, h.expected, h.error));
                    }
                    Err(e) => {
                        ok = false;
                        parts.push(format!("{m:?} {w:?} failed: {e}"));
                    }
                }
            }
        }
        (ok, parts.join("; "))
    })
}

pub fn criterion_eta(paths: &[(Result<BoutrouxPath, BoutrouxError>, f64); 2], cfg: &SuiteConfig) -> CriterionResult {
    timed(8, "eta identity along loops", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (p, _) in paths {
            match p.as_ref().map_err(|e| e.to_string()).and_then(|p| eta_deviation(p).map(|d| (p.model, d)).map_err(|e| e.to_string())) {
                Ok((m, d)) => {
                    ok &= d < cfg.eta_tolerance;
                    parts.push(format!("{m:?} max deviation {d:.2e}"));
                }
                Err(e) => {
                    ok = false;
                    parts.push(e);
                }
            }
        }
        (ok, parts.join("; "))
    })
}

pub fn criterion_ledger(units: Option<[i64; 4]>) -> (CriterionResult, Option<ClassLedger>) {
    let mut out = None;
    let c = timed(9, "class ledger", || {
        let Some(u) = units else { return (false, "monodromy units unavailable".into()) };
        let l = ledger(u);
        let q = |n, d| num_rational::Rational64::new(n, d);
        let w = |r: &crate::tau::Relation, a: i64, b: i64| r.rhs_coefficient("W5") == q(a, 144) && r.rhs_coefficient("W11") == q(b, 144);
        let ok = w(&l.hodge, u[0], u[2])
            && w(&l.prym, u[1], u[3])
            && u == [1, 13, 13, 25]
            && l.hodge.lhs_coefficient("lambda") == q(1, 1)
            && l.hodge.lhs_coefficient("sum_psi") == q(1, 12)
            && l.prym.lhs_coefficient("lambda_P") == q(1, 1)
            && l.kappa.lhs_coefficient("kappa_1") == q(12, 1)
            && w(&l.kappa, 144, 144)
            && l.mumford.lhs_coefficient("lambda_2") == q(1, 1)
            && l.mumford.lhs_coefficient("lambda") == q(-13, 1)
            && l.mumford.rhs_coefficient("sum_psi") == q(1, 1)
            && l.mumford.rhs_coefficient("W11") == q(-1, 1)
            && l.mumford.rhs_coefficient("W5") == q(0, 1)
            && l.relations().iter().all(|r| l.is_consequence(r));
        let detail = l.relations().iter().map(|r| r.display()).collect::<Vec<_>>().join("; ");
        out = Some(l);
        (ok, detail)
    });
    (c, out)
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    cfg.validate()?;
    let graphs = suite_graphs(&cfg.targets)?;
    let mut criteria = vec![criterion_darboux(&graphs), criterion_mk(&graphs), criterion_cover(&graphs), criterion_moves(&graphs)];
    let paths = loops(cfg);
    let mut monodromies = Vec::new();
    criteria.push(loop_criterion(5, "pentagon monodromy", &paths[0].0, paths[0].1, [1, 13], cfg, &mut monodromies));
    criteria.push(loop_criterion(6, "Dehn monodromy", &paths[1].0, paths[1].1, [13, 25], cfg, &mut monodromies));
    criteria.push(criterion_homogeneity(cfg));
    criteria.push(criterion_eta(&paths, cfg));
    let units = (monodromies.len() == 4).then(|| [monodromies[0].units, monodromies[1].units, monodromies[2].units, monodromies[3].units]);
    let (c9, l) = criterion_ledger(units);
    criteria.push(c9);
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| SuiteError::Config(format!("output directory: {e}")))?;
        for (p, _) in paths.iter() {
            if let Ok(p) = p {
                let name = format!("{dir}/{}_loop.json", format!("{:?}", p.model).to_lowercase());
                let json = serde_json::to_string(p).map_err(|e| SuiteError::Config(e.to_string()))?;
                std::fs::write(&name, json).map_err(|e| SuiteError::Config(format!("{name}: {e}")))?;
            }
        }
    }
    Ok(SuiteReport { criteria, monodromies, ledger: l })
}
