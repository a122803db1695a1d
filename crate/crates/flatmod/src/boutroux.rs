//! Periods, Boutroux solving and loop continuation for the two genus-zero
//! local models.
//!
//! Pentagon model: `v = [(x−x₁)(x−x₂)(x−x₃)]^{1/2} dx` with `Σxᵢ = 0`. The
//! branch points are stored as `[central, first, second]`; edge 0 joins
//! central to first and edge 1 joins central to second.
//!
//! Dehn model: `v = x^{−3/2}[(x−x₁)(x−x₂)]^{1/2} dx`. Both edges join `x₁` to
//! `x₂`, edge 0 counterclockwise around the pole at 0 and edge 1 clockwise.
//! The counterclockwise angle from `x₁` to `x₂` is carried along as
//! `winding` so the two edges keep their identity through a loop.
//!
//! Every period is taken over the odd cycle of an edge, i.e. twice the
//! integral along the edge, and oriented so that its v-period has positive
//! real part. The holomorphic differential `v₀ = dx/y` for the cubic through
//! the finite branch points is integrated over the same cycles.

use crate::quad::{integrate, QuadError, Values, MAX_COMPONENTS};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoutrouxError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("branch points collided (separation {0:e})")]
    Collision(f64),
    #[error("Newton iteration stalled at residual {0:e}")]
    Newton(f64),
    #[error("continuation step underflow at parameter {0}")]
    StepUnderflow(f64),
    #[error("expected {expected} wall crossings, found {found}")]
    WallCount { expected: usize, found: usize },
    #[error("loop does not close: distance {0:e}")]
    Closure(f64),
    #[error("degenerate period lattice")]
    Lattice,
    #[error("expected a {0:?} curve")]
    Model(Model),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Pentagon,
    Dehn,
}

impl Model {
    /// Walls crossed by one loop around the degenerate configuration.
    pub fn expected_walls(self) -> usize {
        match self {
            Model::Pentagon => 5,
            Model::Dehn => 1,
        }
    }

    /// Branch points scale as (period scale)^exponent.
    pub fn scaling_exponent(self) -> f64 {
        match self {
            Model::Pentagon => 0.4,
            Model::Dehn => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub model: Model,
    pub x: Vec<C>,
    /// Counterclockwise angle from x₁ to x₂ (Dehn model only).
    #[serde(default)]
    pub winding: f64,
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

impl Curve {
    pub fn pentagon(central: C, first: C) -> Self {
        Curve { model: Model::Pentagon, x: vec![central, first, -central - first], winding: 0.0 }
    }

    pub fn dehn(x1: C, x2: C) -> Self {
        Curve { model: Model::Dehn, x: vec![x1, x2], winding: (x2 / x1).arg().rem_euclid(TAU) }
    }

    pub fn unknowns(&self) -> [C; 2] {
        [self.x[0], self.x[1]]
    }

    /// Move to new unknowns, keeping the winding continuous.
    pub fn with_unknowns(&self, z: [C; 2]) -> Self {
        match self.model {
            Model::Pentagon => Curve::pentagon(z[0], z[1]),
            Model::Dehn => {
                let w = self.winding + wrap((z[1] / z[0]).arg() - self.winding);
                Curve { model: Model::Dehn, x: vec![z[0], z[1]], winding: w }
            }
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Curve { model: self.model, x: self.x.iter().map(|x| x * lambda).collect(), winding: self.winding }
    }

    /// Branch points of v, with the pole last in the Dehn model.
    pub fn branch_points(&self) -> Vec<C> {
        match self.model {
            Model::Pentagon => self.x.clone(),
            Model::Dehn => vec![self.x[0], self.x[1], C::new(0.0, 0.0)],
        }
    }

    /// Exponents of v in half-units, aligned with `branch_points`.
    fn v_exponents(&self) -> [i32; 3] {
        match self.model {
            Model::Pentagon => [1, 1, 1],
            Model::Dehn => [1, 1, -3],
        }
    }

    /// Roots of the cubic whose square root is the denominator of v₀.
    pub fn cubic_roots(&self) -> [C; 3] {
        let b = self.branch_points();
        [b[0], b[1], b[2]]
    }

    /// Smallest distance between two branch points.
    pub fn separation(&self) -> f64 {
        let b = self.branch_points();
        let mut m = f64::INFINITY;
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                m = m.min((b[i] - b[j]).norm());
            }
        }
        m
    }

    /// Polygonal representatives of the two edges.
    pub fn edge_paths(&self) -> [Vec<C>; 2] {
        match self.model {
            Model::Pentagon => [vec![self.x[0], self.x[1]], vec![self.x[0], self.x[2]]],
            Model::Dehn => [spiral(self.x[0], self.x[1], self.winding), spiral(self.x[0], self.x[1], self.winding - TAU)],
        }
    }

    /// Coefficients expressing d/d(unknown j) through d/d(branch point b).
    fn chain(&self) -> [[f64; 3]; 2] {
        match self.model {
            Model::Pentagon => [[1.0, 0.0, -1.0], [0.0, 1.0, -1.0]],
            Model::Dehn => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        }
    }

    /// Endpoints of edge k.
    pub fn edge_ends(&self, k: usize) -> (usize, usize) {
        match self.model {
            Model::Pentagon => (0, k + 1),
            Model::Dehn => (0, 1),
        }
    }
}

const SPIRAL_SEGMENTS: usize = 24;

fn spiral(x1: C, x2: C, angle: f64) -> Vec<C> {
    let dl = C::new((x2.norm() / x1.norm()).ln(), angle);
    let mut pts = vec![x1];
    for k in 1..SPIRAL_SEGMENTS {
        let t = k as f64 / SPIRAL_SEGMENTS as f64;
        pts.push(x1 * (dl * t).exp());
    }
    pts.push(x2);
    pts
}

#[derive(Clone, Copy)]
enum Factor {
    Start(C),
    End(C),
    Mid(C, C),
}

/// Twice the integral of ∏ (x − bᵢ)^{nᵢ/2} dx along a polygon, one value per
/// exponent row. Square roots are continued along the polygon starting from
/// principal values at the first point.
pub fn cycle_integrals(pts: &[C], bps: &[C], rows: &[[i32; 3]], rel_tol: f64) -> Result<Vec<C>, QuadError> {
    let n = rows.len();
    assert!(n <= MAX_COMPONENTS && bps.len() <= 3);
    let mut cur: Vec<C> = bps.iter().map(|&b| (pts[0] - b).sqrt()).collect();
    let mut total = vec![C::new(0.0, 0.0); n];
    for w in pts.windows(2) {
        let (p, r) = (w[0], w[1]);
        let d = r - p;
        let mut factors = Vec::with_capacity(bps.len());
        let mut next = Vec::with_capacity(bps.len());
        for (i, &b) in bps.iter().enumerate() {
            if p == b {
                let r0 = d.sqrt();
                factors.push(Factor::Start(r0));
                next.push(r0);
            } else if r == b {
                factors.push(Factor::End(cur[i]));
                next.push(C::new(0.0, 0.0));
            } else {
                let ratio = d / (p - b);
                factors.push(Factor::Mid(cur[i], ratio));
                next.push(cur[i] * (C::new(1.0, 0.0) + ratio).sqrt());
            }
        }
        let f = |phi: f64| -> Values {
            let (sn, cs) = (0.5 * phi).sin_cos();
            let s = sn * sn;
            let jac = d * (sn * cs);
            let sq: Vec<C> = factors
                .iter()
                .map(|f| match *f {
                    Factor::Start(r0) => r0 * sn,
                    Factor::End(c) => c * cs,
                    Factor::Mid(c, ratio) => c * (C::new(1.0, 0.0) + ratio * s).sqrt(),
                })
                .collect();
            let mut out = [C::new(0.0, 0.0); MAX_COMPONENTS];
            for (k, row) in rows.iter().enumerate() {
                let mut v = jac;
                for (i, &e) in row.iter().enumerate().take(sq.len()) {
                    if e != 0 {
                        v *= sq[i].powi(e);
                    }
                }
                out[k] = v;
            }
            out
        };
        // Scale the tolerance by a coarse estimate of the segment's size.
        let size = (0..=16)
            .map(|k| f(PI * (k as f64 + 0.5) / 17.0).iter().take(n).map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
            .max(1e-300)
            * PI;
        let v = integrate(&f, 0.0, PI, n, rel_tol * size)?;
        for k in 0..n {
            total[k] += v[k] * 2.0;
        }
        cur = next;
    }
    Ok(total)
}

const REL_TOL: f64 = 1e-13;

/// Raw v-periods of the two edge cycles, optionally with their derivatives
/// in the unknowns.
struct Evaluation {
    raw: [C; 2],
    jac: Option<[[C; 2]; 2]>,
}

fn evaluate(c: &Curve, jacobian: bool) -> Result<Evaluation, BoutrouxError> {
    let sep = c.separation();
    if sep < 1e-15 * c.x.iter().map(|x| x.norm()).fold(0.0, f64::max) {
        return Err(BoutrouxError::Collision(sep));
    }
    let bps = c.branch_points();
    let v = c.v_exponents();
    let mut rows = vec![v];
    if jacobian {
        for b in 0..3 {
            let mut r = v;
            r[b] -= 2;
            rows.push(r);
        }
    }
    let chain = c.chain();
    let mut raw = [C::new(0.0, 0.0); 2];
    let mut jac = [[C::new(0.0, 0.0); 2]; 2];
    for (k, path) in c.edge_paths().iter().enumerate() {
        let vals = cycle_integrals(path, &bps, &rows, REL_TOL)?;
        raw[k] = vals[0];
        if jacobian {
            for j in 0..2 {
                let mut s = C::new(0.0, 0.0);
                for b in 0..3 {
                    s += vals[1 + b] * (-0.5 * chain[j][b]);
                }
                jac[k][j] = s;
            }
        }
    }
    Ok(Evaluation { raw, jac: jacobian.then_some(jac) })
}

fn orientation(raw: &[C; 2]) -> [f64; 2] {
    [if raw[0].re < 0.0 { -1.0 } else { 1.0 }, if raw[1].re < 0.0 { -1.0 } else { 1.0 }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodData {
    /// Oriented v-periods of the two edge cycles.
    pub periods: [C; 2],
    /// v₀-periods over the same oriented cycles.
    pub omega: [C; 2],
}

impl PeriodData {
    /// Imaginary parts of the v-periods.
    pub fn residual(&self) -> [f64; 2] {
        [self.periods[0].im, self.periods[1].im]
    }

    /// v₀-period over the sum of the two edge cycles.
    pub fn omega1(&self) -> C {
        self.omega[0] + self.omega[1]
    }

    /// Ratio of the two v₀-periods, taken with positive imaginary part.
    pub fn modulus(&self) -> C {
        let t = self.omega[1] / self.omega[0];
        if t.im < 0.0 {
            -t
        } else {
            t
        }
    }
}

pub fn periods(c: &Curve) -> Result<PeriodData, BoutrouxError> {
    let ev = evaluate(c, false)?;
    let sg = orientation(&ev.raw);
    let bps = c.branch_points();
    let rows = [[-1, -1, -1]];
    let mut omega = [C::new(0.0, 0.0); 2];
    for (k, path) in c.edge_paths().iter().enumerate() {
        omega[k] = cycle_integrals(path, &bps, &rows, REL_TOL)?[0] * sg[k];
    }
    Ok(PeriodData { periods: [ev.raw[0] * sg[0], ev.raw[1] * sg[1]], omega })
}

pub fn periods_pentagon(c: &Curve) -> Result<PeriodData, BoutrouxError> {
    if c.model != Model::Pentagon {
        return Err(BoutrouxError::Model(Model::Pentagon));
    }
    periods(c)
}

pub fn periods_dehn(c: &Curve) -> Result<PeriodData, BoutrouxError> {
    if c.model != Model::Dehn {
        return Err(BoutrouxError::Model(Model::Dehn));
    }
    periods(c)
}

/// Imaginary parts of the two oriented v-periods.
pub fn boutroux_residual(c: &Curve) -> Result<[f64; 2], BoutrouxError> {
    Ok(periods(c)?.residual())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerance: 1e-12, max_iterations: 40 }
    }
}

fn solve2(m: [[C; 2]; 2], r: [C; 2]) -> [C; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [(r[0] * m[1][1] - r[1] * m[0][1]) / det, (m[0][0] * r[1] - m[1][0] * r[0]) / det]
}

/// Damped Newton for oriented periods equal to the (real) targets.
pub fn solve(seed: &Curve, targets: [f64; 2], opts: SolveOptions) -> Result<(Curve, f64), BoutrouxError> {
    let tol = opts.tolerance * (targets[0].abs() + targets[1].abs()).max(1e-300);
    let residual = |raw: &[C; 2]| {
        let sg = orientation(raw);
        let f = [raw[0] * sg[0] - targets[0], raw[1] * sg[1] - targets[1]];
        (f, f[0].norm().max(f[1].norm()), sg)
    };
    let mut cur = seed.clone();
    let mut ev = evaluate(&cur, true)?;
    let (mut f, mut res, mut sg) = residual(&ev.raw);
    for _ in 0..opts.max_iterations {
        if res < tol {
            return Ok((cur, res / (targets[0].abs() + targets[1].abs())));
        }
        let j = ev.jac.expect("requested");
        let m = [[j[0][0] * sg[0], j[0][1] * sg[0]], [j[1][0] * sg[1], j[1][1] * sg[1]]];
        let step = solve2(m, [-f[0], -f[1]]);
        let z = cur.unknowns();
        let mut lambda = 1.0;
        loop {
            let cand = cur.with_unknowns([z[0] + step[0] * lambda, z[1] + step[1] * lambda]);
            if let Ok(ev2) = evaluate(&cand, true) {
                let (f2, res2, sg2) = residual(&ev2.raw);
                if res2 < res {
                    cur = cand;
                    ev = ev2;
                    f = f2;
                    res = res2;
                    sg = sg2;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-3 {
                return Err(BoutrouxError::Newton(res));
            }
        }
    }
    if res < tol {
        Ok((cur, res / (targets[0].abs() + targets[1].abs())))
    } else {
        Err(BoutrouxError::Newton(res))
    }
}

/// On-locus configuration with edge periods (L/2, L/2)-like proportions at scale L.
pub fn seed(model: Model, scale: f64) -> Result<Curve, BoutrouxError> {
    let (base, guess) = match model {
        Model::Pentagon => (2.0, Curve::pentagon(C::new(0.289054, 0.0), C::new(-0.144527, 0.93838))),
        Model::Dehn => (2.0, Curve::dehn(C::new(0.025_026_24, 0.003_776_82), C::new(0.001_032_2, -0.007_522_4))),
    };
    let p = periods(&guess)?;
    let sum = p.periods[0].re + p.periods[1].re;
    let t = [p.periods[0].re * base / sum, p.periods[1].re * base / sum];
    let (c, _) = solve(&guess, t, SolveOptions::default())?;
    let lambda = (scale / base).powf(model.scaling_exponent());
    let (c, _) = solve(&c.scaled(lambda), [t[0] * scale / base, t[1] * scale / base], SolveOptions::default())?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub curve: Curve,
    pub targets: [f64; 2],
    pub data: PeriodData,
}

/// One traversal of a cell: edge 1 grows from ε to L − ε while edge 0 shrinks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPath {
    pub samples: Vec<Sample>,
    /// Extra solutions a factor 10 closer to the walls, on either end.
    pub entry_probe: Sample,
    pub exit_probe: Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoutrouxPath {
    pub model: Model,
    pub scale: f64,
    pub epsilon: f64,
    /// +1 if cells are traversed with edge 0 shrinking, −1 if reversed.
    pub orientation: i8,
    pub walls: usize,
    pub closure_error: f64,
    pub max_residual: f64,
    pub cells: Vec<CellPath>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub model: Model,
    /// Sum of the two edge periods.
    pub scale: f64,
    /// Base number of steps per cell.
    pub steps: usize,
    /// Distance of the cell ends from the walls, relative to the scale.
    pub epsilon: f64,
    /// Largest change of any tracked argument per step.
    pub max_arg_step: f64,
}

impl LoopSpec {
    pub fn new(model: Model, scale: f64) -> Self {
        LoopSpec { model, scale, steps: 400, epsilon: 1e-7, max_arg_step: 0.1 }
    }
}

fn logistic(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn cell_targets(scale: f64, l: f64) -> [f64; 2] {
    let g = logistic(l);
    [scale * (1.0 - g), scale * g]
}

fn tracked_args(s: &Sample) -> Vec<f64> {
    let b = s.curve.branch_points();
    let mut a = Vec::new();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            a.push((b[i] - b[j]).arg());
        }
    }
    a.push(s.data.omega[0].arg());
    a.push(s.data.omega[1].arg());
    a
}

fn make_sample(curve: Curve, targets: [f64; 2]) -> Result<Sample, BoutrouxError> {
    let data = periods(&curve)?;
    Ok(Sample { curve, targets, data })
}

/// Follow the cell from logit parameter `from` to `to`, returning every accepted sample.
fn follow(start: &Sample, scale: f64, from: f64, to: f64, spec: &LoopSpec) -> Result<Vec<Sample>, BoutrouxError> {
    let base = (to - from) / spec.steps.max(1) as f64;
    let mut h = base;
    let mut l = from;
    let mut cur = start.clone();
    let mut out = Vec::new();
    while (to - l) * base.signum() > 1e-15 {
        let step = if (to - l).abs() < h.abs() { to - l } else { h };
        let t = cell_targets(scale, l + step);
        let r = solve(&cur.curve, t, SolveOptions::default()).and_then(|(c, _)| make_sample(c, t));
        let accepted = r.ok().filter(|s| {
            tracked_args(&cur).iter().zip(tracked_args(s)).all(|(a, b)| wrap(b - a).abs() <= spec.max_arg_step)
        });
        match accepted {
            Some(s) => {
                l += step;
                cur = s.clone();
                out.push(s);
                if h.abs() < base.abs() {
                    h *= 2.0;
                }
            }
            None => {
                h *= 0.5;
                if h.abs() < 1e-9 * base.abs() {
                    return Err(BoutrouxError::StepUnderflow(l));
                }
            }
        }
    }
    Ok(out)
}

fn traverse(entry: &Sample, spec: &LoopSpec) -> Result<CellPath, BoutrouxError> {
    let (l0, l1) = (logit(spec.epsilon), logit(1.0 - spec.epsilon));
    let mut samples = vec![entry.clone()];
    samples.extend(follow(entry, spec.scale, l0, l1, spec)?);
    let last = samples.last().expect("nonempty").clone();
    let probe = |s: &Sample, l: f64| -> Result<Sample, BoutrouxError> {
        let t = cell_targets(spec.scale, l);
        let (c, _) = solve(&s.curve, t, SolveOptions::default())?;
        make_sample(c, t)
    };
    let entry_probe = probe(entry, logit(spec.epsilon / 10.0))?;
    let exit_probe = probe(&last, logit(1.0 - spec.epsilon / 10.0))?;
    Ok(CellPath { samples, entry_probe, exit_probe })
}

/// Split the collided pair of edge 0 perpendicularly and solve into the next cell.
fn cross_wall(exit: &Sample, spec: &LoopSpec) -> Result<Vec<Sample>, BoutrouxError> {
    let x = &exit.curve.x;
    let (a, b) = (x[0], x[1]);
    let mid = (a + b) * 0.5;
    let half = (b - a) * C::new(0.0, 0.5);
    let t = cell_targets(spec.scale, logit(spec.epsilon));
    let mut cands = Vec::new();
    for sg in [1.0, -1.0] {
        let (u, w) = (mid + half * sg, mid - half * sg);
        let cand = match spec.model {
            Model::Pentagon => Curve::pentagon(u, x[2]),
            Model::Dehn => {
                let mut c = Curve::dehn(u, w);
                c.winding = TAU + wrap((w / u).arg());
                c
            }
        };
        cands.push(cand);
    }
    if spec.model == Model::Pentagon {
        // Keep the split whose long edge starts closer to the locus.
        let size = |c: &Curve| evaluate(c, false).map(|e| e.raw[0].norm()).unwrap_or(f64::INFINITY);
        let keep = if size(&cands[0]) <= size(&cands[1]) { 0 } else { 1 };
        cands = vec![cands.swap_remove(keep)];
    }
    let mut out = Vec::new();
    for cand in cands {
        if let Ok((c, _)) = solve(&cand, t, SolveOptions::default()) {
            out.push(make_sample(c, t)?);
        }
    }
    Ok(out)
}

fn distance(a: &Curve, b: &Curve) -> f64 {
    a.x.iter().zip(&b.x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

/// Closed loop on the Boutroux locus around the degenerate configuration.
pub fn continue_loop(spec: &LoopSpec) -> Result<BoutrouxPath, BoutrouxError> {
    let centre = seed(spec.model, spec.scale)?;
    let centre = make_sample(centre.clone(), [spec.scale / 2.0; 2]).map(|mut s| {
        s.targets = [s.data.periods[0].re, s.data.periods[1].re];
        s
    })?;
    // Positive direction: the growing edge pairs positively with the shrinking one.
    let forward = (centre.data.omega[1] / centre.data.omega[0]).im > 0.0;
    let l_centre = logit(centre.targets[1] / spec.scale);
    let approach = follow(&centre, spec.scale, l_centre, logit(spec.epsilon), spec)?;
    let start = approach.last().cloned().unwrap_or(centre);
    let mut cells = Vec::new();
    let mut entry = start.clone();
    let expected = spec.model.expected_walls();
    let mut closure = f64::INFINITY;
    for _ in 0..2 * expected + 2 {
        let cell = traverse(&entry, spec)?;
        let exit = cell.samples.last().expect("nonempty").clone();
        cells.push(cell);
        let next = cross_wall(&exit, spec)?;
        let tol = 1e-9 * start.curve.x.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if let Some(s) = next.iter().find(|s| distance(&s.curve, &start.curve) < tol) {
            closure = distance(&s.curve, &start.curve);
            break;
        }
        if spec.model == Model::Dehn || next.is_empty() {
            return Err(BoutrouxError::Closure(next.iter().map(|s| distance(&s.curve, &start.curve)).fold(f64::INFINITY, f64::min)));
        }
        entry = next[0].clone();
    }
    if !closure.is_finite() {
        return Err(BoutrouxError::Closure(closure));
    }
    if cells.len() != expected {
        return Err(BoutrouxError::WallCount { expected, found: cells.len() });
    }
    let max_residual = cells
        .iter()
        .flat_map(|c| c.samples.iter())
        .map(|s| s.data.residual()[0].abs().max(s.data.residual()[1].abs()) / spec.scale)
        .fold(0.0, f64::max);
    let mut path = BoutrouxPath {
        model: spec.model,
        scale: spec.scale,
        epsilon: spec.epsilon,
        orientation: 1,
        walls: cells.len(),
        closure_error: closure,
        max_residual,
        cells,
    };
    if !forward {
        path = path.reversed();
    }
    Ok(path)
}

impl BoutrouxPath {
    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let cells = self
            .cells
            .iter()
            .rev()
            .map(|c| {
                let mut samples = c.samples.clone();
                samples.reverse();
                CellPath { samples, entry_probe: c.exit_probe.clone(), exit_probe: c.entry_probe.clone() }
            })
            .collect();
        BoutrouxPath { orientation: -self.orientation, cells, ..self.clone() }
    }

    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.cells.iter().flat_map(|c| c.samples.iter())
    }
}

/// η(τ)²⁴ by its q-product.
pub fn eta24(tau: C) -> C {
    let q = (C::new(0.0, TAU) * tau).exp();
    let mut log = C::new(0.0, TAU) * tau;
    let mut qn = q;
    for _ in 0..200 {
        log += (C::new(1.0, 0.0) - qn).ln() * 24.0;
        qn *= q;
        if qn.norm() < 1e-18 {
            break;
        }
    }
    log.exp()
}

/// Reduce a lattice basis so that τ = ω₂/ω₁ lies in the standard fundamental domain.
pub fn reduce_lattice(mut w1: C, mut w2: C) -> Result<(C, C), BoutrouxError> {
    if (w2 / w1).im.abs() < 1e-14 {
        return Err(BoutrouxError::Lattice);
    }
    for _ in 0..200 {
        if w2.norm() < w1.norm() {
            std::mem::swap(&mut w1, &mut w2);
        }
        let m = (w2 / w1).re.round();
        if m == 0.0 {
            break;
        }
        w2 -= w1 * m;
    }
    if (w2 / w1).im < 0.0 {
        w2 = -w2;
    }
    Ok((w1, w2))
}

/// Generators of the period lattice of v₀. In the Dehn model the two edge
/// cycles differ by twice a primitive cycle around the pole.
pub fn lattice_basis(c: &Curve, pd: &PeriodData) -> [C; 2] {
    match c.model {
        Model::Pentagon => pd.omega,
        Model::Dehn => [pd.omega[1], (pd.omega[0] - pd.omega[1]) * 0.5],
    }
}

/// η²⁴(τ)(2π)¹² / (ω¹² Δ) in the Weierstrass normalization, ω the half
/// period and Δ = 16∏(eᵢ − eⱼ)².
pub fn eta_ratio(omega: [C; 2], roots: [C; 3]) -> Result<C, BoutrouxError> {
    let (w1, w2) = reduce_lattice(omega[0], omega[1])?;
    let tau = w2 / w1;
    let prod = (roots[0] - roots[1]) * (roots[0] - roots[2]) * (roots[1] - roots[2]);
    let disc = prod * prod * 16.0;
    Ok(eta24(tau) * TAU.powi(12) / ((w1 * 0.5).powi(12) * disc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_at_i() {
        // η(i) = Γ(1/4) / (2 π^{3/4}).
        let gamma_quarter = 3.625_609_908_221_908_f64;
        let eta = gamma_quarter / (2.0 * PI.powf(0.75));
        let v = eta24(C::new(0.0, 1.0));
        assert!((v.re - eta.powi(24)).abs() < 1e-14 * eta.powi(24));
    }

    #[test]
    fn lattice_reduction_is_unimodular() {
        let (a, b) = reduce_lattice(C::new(1.0, 0.0), C::new(7.3, 0.2)).unwrap();
        assert!(a.norm() <= b.norm());
        assert!((b / a).re.abs() <= 0.5 + 1e-12);
        assert!((a.re * b.im - a.im * b.re).abs() - 0.2 < 1e-12);
    }
}
