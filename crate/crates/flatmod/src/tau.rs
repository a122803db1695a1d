//! Closed-form tau functions of the two local models, their monodromy along
//! Boutroux loops and the class ledger assembled from the monodromy integers.

use crate::boutroux::{eta_ratio, lattice_basis, periods, BoutrouxError, BoutrouxPath, Curve, Model, PeriodData, Sample};
use num_complex::Complex64 as C;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TauError {
    #[error(transparent)]
    Boutroux(#[from] BoutrouxError),
    #[error("discriminant vanishes")]
    Discriminant,
    #[error("argument step {0} exceeds the unwrapping bound")]
    Unwrap(f64),
    #[error("a-cycle class not resolved at wall {wall}: coefficient error {error}")]
    ClassTransport { wall: usize, error: f64 },
    #[error("increment {0} is not close to a multiple of pi/72")]
    NotInteger(f64),
    #[error("wrong curve model")]
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Plus,
    Minus,
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    #[serde(with = "ratio_str")]
    pub exponent: Rational64,
    pub modulus: f64,
    pub arg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauValue {
    pub modulus: f64,
    pub arg: f64,
    pub components: Vec<Component>,
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl TauValue {
    fn from_components(components: Vec<Component>) -> Result<Self, TauError> {
        let mut log_mod = 0.0;
        let mut arg = 0.0;
        for c in &components {
            if c.modulus == 0.0 {
                return Err(TauError::Discriminant);
            }
            log_mod += ratio_f64(c.exponent) * c.modulus.ln();
            arg += ratio_f64(c.exponent) * c.arg;
        }
        Ok(TauValue { modulus: log_mod.exp(), arg, components })
    }

    /// Re-evaluate at a nearby point, continuing every component argument.
    pub fn continued(&self, next: &TauValue) -> Result<TauValue, TauError> {
        let mut comps = next.components.clone();
        for (c, p) in comps.iter_mut().zip(&self.components) {
            let step = wrap(c.arg - p.arg);
            if step.abs() > 0.5 * PI {
                return Err(TauError::Unwrap(step));
            }
            c.arg = p.arg + step;
        }
        TauValue::from_components(comps)
    }

    pub fn value(&self) -> C {
        C::from_polar(self.modulus, self.arg)
    }
}

fn component(name: &str, exponent: Rational64, z: C) -> Component {
    Component { name: name.to_string(), exponent, modulus: z.norm(), arg: z.arg() }
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn check(c: &Curve, m: Model) -> Result<(), TauError> {
    if c.model == m {
        Ok(())
    } else {
        Err(TauError::Model)
    }
}

fn pentagon_factors(c: &Curve, e: Rational64) -> Vec<Component> {
    let x = &c.x;
    vec![
        component("x1-x2", e, x[0] - x[1]),
        component("x2-x3", e, x[1] - x[2]),
        component("x3-x1", e, x[2] - x[0]),
    ]
}

/// τ₊ = [(x₁−x₂)(x₂−x₃)(x₃−x₁)]^{1/36}.
pub fn tau_plus_pentagon(c: &Curve) -> Result<TauValue, TauError> {
    check(c, Model::Pentagon)?;
    TauValue::from_components(pentagon_factors(c, r(1, 36)))
}

/// τ₋ = ω₁ [(x₁−x₂)(x₂−x₃)(x₃−x₁)]^{13/36}.
pub fn tau_minus_pentagon(c: &Curve, pd: &PeriodData) -> Result<TauValue, TauError> {
    check(c, Model::Pentagon)?;
    let mut comps = vec![component("omega1", Rational64::one(), pd.omega1())];
    comps.extend(pentagon_factors(c, r(13, 36)));
    TauValue::from_components(comps)
}

/// τ₊ = (x₁x₂)^{1/12}(x₁−x₂)^{1/36}.
pub fn tau_plus_dehn(c: &Curve) -> Result<TauValue, TauError> {
    check(c, Model::Dehn)?;
    let x = &c.x;
    TauValue::from_components(vec![
        component("x1", r(1, 12), x[0]),
        component("x2", r(1, 12), x[1]),
        component("x1-x2", r(1, 36), x[0] - x[1]),
    ])
}

/// τ₋ = ω₁(x₁x₂)^{1/12}(x₁−x₂)^{13/36}.
pub fn tau_minus_dehn(c: &Curve, pd: &PeriodData) -> Result<TauValue, TauError> {
    check(c, Model::Dehn)?;
    let x = &c.x;
    TauValue::from_components(vec![
        component("omega1", Rational64::one(), pd.omega1()),
        component("x1", r(1, 12), x[0]),
        component("x2", r(1, 12), x[1]),
        component("x1-x2", r(13, 36), x[0] - x[1]),
    ])
}

pub fn tau(c: &Curve, pd: &PeriodData, which: Which) -> Result<TauValue, TauError> {
    match (c.model, which) {
        (Model::Pentagon, Which::Plus) => tau_plus_pentagon(c),
        (Model::Pentagon, Which::Minus) => tau_minus_pentagon(c, pd),
        (Model::Dehn, Which::Plus) => tau_plus_dehn(c),
        (Model::Dehn, Which::Minus) => tau_minus_dehn(c, pd),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub model: Model,
    pub which: Which,
    pub raw_increment: f64,
    pub units: i64,
    pub residual: f64,
    /// Net increment of arg ω₁ over the loop (τ₋ only contributes it).
    pub omega1_increment: f64,
    /// a-cycle coefficients after each wall, in the basis of the next cell.
    pub class_history: Vec<[f64; 2]>,
}

/// Factors with equal exponents, multiplied together. Differences enter
/// squared so the group does not depend on the labelling of the points. The
/// factor between the two points that collide at a wall is left out of the
/// wall jump: the loop is continued through the wall by continuity.
struct Group {
    weight: f64,
    kind: GroupKind,
}

enum GroupKind {
    Differences,
    Product,
}

fn groups(model: Model) -> Vec<Group> {
    match model {
        Model::Pentagon => vec![Group { weight: 1.0 / 72.0, kind: GroupKind::Differences }],
        Model::Dehn => vec![
            Group { weight: 1.0 / 12.0, kind: GroupKind::Product },
            Group { weight: 1.0 / 72.0, kind: GroupKind::Differences },
        ],
    }
}

fn squared_differences(c: &Curve) -> Vec<C> {
    let x = &c.x;
    let mut d = Vec::new();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            d.push((x[i] - x[j]) * (x[i] - x[j]));
        }
    }
    d
}

fn group_value(g: &Group, c: &Curve, drop_collision: bool) -> C {
    match g.kind {
        GroupKind::Product => c.x.iter().product(),
        GroupKind::Differences => {
            let d = squared_differences(c);
            let skip = if drop_collision {
                d.iter().enumerate().min_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(i, _)| i)
            } else {
                None
            };
            d.iter().enumerate().filter(|(i, _)| Some(*i) != skip).map(|(_, v)| *v).product()
        }
    }
}

fn step(a: C, b: C) -> Result<f64, TauError> {
    let s = wrap((b / a).arg());
    if s.abs() > 0.5 * PI {
        return Err(TauError::Unwrap(s));
    }
    Ok(s)
}

/// Argument of ω at the wall end of a cell, from two samples at distances
/// ε and ε/10. A logarithmic divergence ω ≈ α ln δ + β points along −α.
fn limit_arg(near: C, nearer: C) -> f64 {
    let alpha = (nearer - near) / (0.1f64).ln();
    if alpha.norm() > 1e-6 * near.norm() {
        (-alpha).arg()
    } else {
        near.arg()
    }
}

fn real_coefficients(w: C, basis: [C; 2]) -> [f64; 2] {
    let det = basis[0].re * basis[1].im - basis[1].re * basis[0].im;
    [(w.re * basis[1].im - w.im * basis[1].re) / det, (basis[0].re * w.im - basis[0].im * w.re) / det]
}

fn class_value(coef: [f64; 2], s: &Sample) -> C {
    s.data.omega[0] * coef[0] + s.data.omega[1] * coef[1]
}

const CLASS_GRID: f64 = 64.0;

/// Net increment of arg ω₁ along the loop, with the a-cycle class carried
/// across every wall, together with the class after each wall.
fn omega1_increment(path: &BoutrouxPath) -> Result<(f64, Vec<[f64; 2]>), TauError> {
    let mut coef = [1.0, 1.0];
    let mut total = 0.0;
    let mut history = Vec::new();
    let mut first_limit = None;
    let mut prev_limit = 0.0;
    let n = path.cells.len();
    for (k, cell) in path.cells.iter().enumerate() {
        let w: Vec<C> = cell.samples.iter().map(|s| class_value(coef, s)).collect();
        let mut within = 0.0;
        for p in w.windows(2) {
            within += step(p[0], p[1])?;
        }
        let ls = limit_arg(w[0], class_value(coef, &cell.entry_probe));
        let le = limit_arg(w[w.len() - 1], class_value(coef, &cell.exit_probe));
        total += wrap(w[0].arg() - ls) + within + wrap(le - w[w.len() - 1].arg());
        match first_limit {
            None => first_limit = Some(ls),
            Some(_) => total += wrap(ls - prev_limit),
        }
        prev_limit = le;
        // Carry the class into the next cell.
        let next = &path.cells[(k + 1) % n].samples[0];
        let c = real_coefficients(w[w.len() - 1], next.data.omega);
        let rounded = [(c[0] * CLASS_GRID).round() / CLASS_GRID, (c[1] * CLASS_GRID).round() / CLASS_GRID];
        let err = (c[0] - rounded[0]).abs().max((c[1] - rounded[1]).abs());
        if err > 0.1 / CLASS_GRID {
            return Err(TauError::ClassTransport { wall: k, error: err });
        }
        coef = rounded;
        history.push(coef);
    }
    total += wrap(first_limit.unwrap_or(0.0) - prev_limit);
    Ok((total, history))
}

/// Net increment of the argument of one factor group, continued through walls.
fn group_increment(g: &Group, path: &BoutrouxPath) -> Result<f64, TauError> {
    let n = path.cells.len();
    let mut total = 0.0;
    for (k, cell) in path.cells.iter().enumerate() {
        for p in cell.samples.windows(2) {
            total += step(group_value(g, &p[0].curve, false), group_value(g, &p[1].curve, false))?;
        }
        let exit = &cell.samples[cell.samples.len() - 1].curve;
        let entry = &path.cells[(k + 1) % n].samples[0].curve;
        total += step(group_value(g, exit, true), group_value(g, entry, true))?;
    }
    Ok(total)
}

pub fn track_monodromy(path: &BoutrouxPath, which: Which) -> Result<MonodromyResult, TauError> {
    let mut raw = 0.0;
    for g in groups(path.model) {
        let e = match which {
            Which::Plus => g.weight,
            Which::Minus => match g.kind {
                GroupKind::Differences => 13.0 * g.weight,
                GroupKind::Product => g.weight,
            },
        };
        raw += e * group_increment(&g, path)?;
    }
    let (omega, history) = omega1_increment(path)?;
    if which == Which::Minus {
        raw += omega;
    }
    let unit = PI / 72.0;
    let units = (raw / unit).round();
    Ok(MonodromyResult {
        model: path.model,
        which,
        raw_increment: raw,
        units: units as i64,
        residual: (raw - units * unit).abs(),
        omega1_increment: omega,
        class_history: history,
    })
}

/// Largest |ratio − 1| of the eta identity over every sample of a path.
pub fn eta_deviation(path: &BoutrouxPath) -> Result<f64, TauError> {
    let mut worst = 0.0f64;
    for s in path.samples() {
        let q = eta_ratio(lattice_basis(&s.curve, &s.data), s.curve.cubic_roots())?;
        worst = worst.max((q - 1.0).norm());
    }
    Ok(worst)
}

/// Closed-form exponents κ of |τ| under Q → εQ.
pub fn kappa(model: Model, which: Which) -> Rational64 {
    // κ₊ = (1/48) Σ dᵢ(dᵢ+4)/(dᵢ+2), κ₋ = κ₊ + (1/8) Σ 1/(dᵢ+2).
    let divisor: &[i64] = match model {
        Model::Pentagon => &[1, 1, 1, -7],
        Model::Dehn => &[1, 1, -3, -3],
    };
    let plus: Rational64 = divisor.iter().map(|&d| r(d * (d + 4), d + 2)).sum::<Rational64>() / 48;
    match which {
        Which::Plus => plus,
        Which::Minus => plus + divisor.iter().map(|&d| r(1, d + 2)).sum::<Rational64>() / 8,
    }
}

/// Branch points of the normal form of εQ are x·ε^{exponent}.
fn rescaling_exponent(model: Model) -> f64 {
    match model {
        Model::Pentagon => 0.2,
        Model::Dehn => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Homogeneity {
    pub model: Model,
    pub which: Which,
    pub measured: f64,
    #[serde(with = "ratio_str")]
    pub expected: Rational64,
    pub error: f64,
}

/// Log-log slope of |τ| under Q → εQ at the curve `c`.
pub fn homogeneity_check(c: &Curve, which: Which) -> Result<Homogeneity, TauError> {
    let h: f64 = 1.0;
    let a = rescaling_exponent(c.model);
    let eval = |eps: f64| -> Result<f64, TauError> {
        let s = c.scaled(eps.powf(a));
        let pd = periods(&s)?;
        Ok(tau(&s, &pd, which)?.modulus.ln())
    };
    let measured = (eval(h.exp())? - eval((-h).exp())?) / (2.0 * h);
    let expected = kappa(c.model, which);
    Ok(Homogeneity { model: c.model, which, measured, expected, error: (measured - ratio_f64(expected)).abs() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub symbol: String,
    #[serde(with = "ratio_str")]
    pub coefficient: Rational64,
}

/// Σ lhs = Σ rhs over formal class symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Combination(std::collections::BTreeMap<String, Rational64>);

impl Combination {
    fn add(&mut self, s: &str, c: Rational64) -> &mut Self {
        let e = self.0.entry(s.to_string()).or_insert_with(Rational64::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(s);
        }
        self
    }

    fn scaled(&self, k: Rational64) -> Self {
        let mut out = Combination::default();
        for (s, c) in &self.0 {
            out.add(s, *c * k);
        }
        out
    }

    fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (s, c) in &o.0 {
            out.add(s, *c);
        }
        out
    }

    fn terms(&self) -> Vec<Term> {
        self.0.iter().map(|(s, c)| Term { symbol: s.clone(), coefficient: *c }).collect()
    }
}


fn side(ts: &[Term], symbol: &str) -> Rational64 {
    ts.iter().filter(|t| t.symbol == symbol).map(|t| t.coefficient).sum()
}

impl Relation {
    /// Both sides as one combination equal to zero.
    fn difference(&self) -> Combination {
        let mut c = Combination::default();
        for t in &self.lhs {
            c.add(&t.symbol, t.coefficient);
        }
        for t in &self.rhs {
            c.add(&t.symbol, -t.coefficient);
        }
        c
    }

    /// Write `c = 0` with the listed symbols on the right.
    fn from_difference(c: &Combination, right: &[&str]) -> Relation {
        let mut lhs = Combination::default();
        let mut rhs = Combination::default();
        for (s, k) in &c.0 {
            if right.contains(&s.as_str()) {
                rhs.add(s, -*k);
            } else {
                lhs.add(s, *k);
            }
        }
        Relation { lhs: lhs.terms(), rhs: rhs.terms() }
    }

    pub fn lhs_coefficient(&self, symbol: &str) -> Rational64 {
        side(&self.lhs, symbol)
    }

    pub fn rhs_coefficient(&self, symbol: &str) -> Rational64 {
        side(&self.rhs, symbol)
    }

    pub fn display(&self) -> String {
        let show = |ts: &[Term]| {
            if ts.is_empty() {
                return "0".to_string();
            }
            ts.iter().map(|t| format!("({})·{}", t.coefficient, t.symbol)).collect::<Vec<_>>().join(" + ")
        };
        format!("{} = {}", show(&self.lhs), show(&self.rhs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLedger {
    /// Monodromy units for (W5, τ₊), (W5, τ₋), (W11, τ₊), (W11, τ₋).
    pub units: [i64; 4],
    pub hodge: Relation,
    pub prym: Relation,
    pub kappa: Relation,
    pub mumford: Relation,
}

const BOUNDARY: [&str; 2] = ["W5", "W11"];

/// Assemble the class relations from the four monodromy integers.
///
/// τ₊⁴⁸ is a section of det⁴⁸Λ ⊗ ∏Lᵢ⁴ and τ₋⁴⁸ of det⁴⁸Λ_P ⊗ ∏Lᵢ⁴; an
/// increment of u·π/72 around a cycle W gives it the coefficient u/144.
/// κ₁ = λ₂ − λ enters as the one external identity.
pub fn ledger(units: [i64; 4]) -> ClassLedger {
    let w = |u5: i64, u11: i64| {
        let mut c = Combination::default();
        c.add("W5", r(u5, 144)).add("W11", r(u11, 144));
        c
    };
    let lhs = |lambda: &str| {
        let mut c = Combination::default();
        c.add(lambda, Rational64::one()).add("sum_psi", r(1, 12));
        c
    };
    let hodge = lhs("lambda").plus(&w(units[0], units[2]).scaled(-Rational64::one()));
    let prym = lhs("lambda_P").plus(&w(units[1], units[3]).scaled(-Rational64::one()));
    // λ_P − λ = κ₁, so 12κ₁ = 12(prym − hodge) after moving λ_P − λ over.
    let mut kappa = prym.plus(&hodge.scaled(-Rational64::one())).scaled(r(12, 1));
    kappa.add("lambda_P", r(-12, 1)).add("lambda", r(12, 1)).add("kappa_1", r(12, 1));
    let mut mumford = prym.plus(&hodge.scaled(r(-13, 1)));
    mumford.add("lambda_P", r(-1, 1)).add("lambda_2", r(1, 1));
    ClassLedger {
        units,
        hodge: Relation::from_difference(&hodge, &BOUNDARY),
        prym: Relation::from_difference(&prym, &BOUNDARY),
        kappa: Relation::from_difference(&kappa, &BOUNDARY),
        mumford: Relation::from_difference(&mumford, &["sum_psi", "W5", "W11"]),
    }
}

impl ClassLedger {
    pub fn relations(&self) -> [&Relation; 4] {
        [&self.hodge, &self.prym, &self.kappa, &self.mumford]
    }

    /// Check that a relation is a rational combination of the two measured ones.
    pub fn is_consequence(&self, rel: &Relation) -> bool {
        let mut target = rel.difference();
        // Substitute the external identity λ₂ = λ_P = λ + κ₁.
        for (s, k) in target.0.clone() {
            match s.as_str() {
                "lambda_2" => {
                    target.add("lambda_2", -k).add("lambda_P", k);
                }
                "kappa_1" => {
                    target.add("kappa_1", -k).add("lambda_P", k).add("lambda", -k);
                }
                _ => {}
            }
        }
        let a = target.0.get("lambda").copied().unwrap_or_else(Rational64::zero);
        let b = target.0.get("lambda_P").copied().unwrap_or_else(Rational64::zero);
        let h = self.hodge.difference();
        let p = self.prym.difference();
        target.plus(&h.scaled(-a)).plus(&p.scaled(-b)).0.is_empty()
    }
}

mod ratio_str {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(Model::Pentagon, Which::Plus), r(1, 60));
        assert_eq!(kappa(Model::Pentagon, Which::Minus), r(7, 60));
        assert_eq!(kappa(Model::Dehn, Which::Plus), r(7, 36));
        assert_eq!(kappa(Model::Dehn, Which::Minus), r(1, 36));
    }
}
