use flatmod::boutroux::{continue_loop, periods, seed, Curve, LoopSpec, Model};
use flatmod::tau::{
    eta_deviation, homogeneity_check, kappa, ledger, tau, tau_minus_dehn, tau_minus_pentagon, tau_plus_dehn, tau_plus_pentagon, track_monodromy,
    Relation, Term, Which,
};
use num_complex::Complex64 as C;
use num_rational::Rational64;

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

#[test]
fn tau_values_on_symmetric_points() {
    // x = (0, −1, 1): |(x₁−x₂)(x₂−x₃)(x₃−x₁)| = 2.
    let c = Curve::pentagon(C::new(0.0, 0.0), C::new(-1.0, 0.0));
    let t = tau_plus_pentagon(&c).unwrap();
    assert!((t.modulus - 2f64.powf(1.0 / 36.0)).abs() < 1e-15);
    // x₁ = −x₂ = 1: |x₁x₂| = 1, |x₁ − x₂| = 2.
    let d = Curve::dehn(C::new(1.0, 0.0), C::new(-1.0, 0.0));
    let t = tau_plus_dehn(&d).unwrap();
    assert!((t.modulus - 2f64.powf(1.0 / 36.0)).abs() < 1e-15);
}

#[test]
fn minus_is_omega_times_thirteenth_power() {
    for m in [Model::Pentagon, Model::Dehn] {
        let c = seed(m, 2.0).unwrap();
        let pd = periods(&c).unwrap();
        let (plus, minus) = match m {
            Model::Pentagon => (tau_plus_pentagon(&c).unwrap(), tau_minus_pentagon(&c, &pd).unwrap()),
            Model::Dehn => (tau_plus_dehn(&c).unwrap(), tau_minus_dehn(&c, &pd).unwrap()),
        };
        let extra = match m {
            Model::Pentagon => 1.0,
            Model::Dehn => (c.x[0] * c.x[1]).norm(),
        };
        let lhs = minus.modulus * extra;
        let rhs = pd.omega1().norm() * plus.modulus.powi(13);
        assert!((lhs - rhs).abs() < 1e-12 * rhs, "{m:?}");
    }
}

#[test]
fn tau_rejects_wrong_model() {
    let c = seed(Model::Dehn, 2.0).unwrap();
    assert!(tau_plus_pentagon(&c).is_err());
}

/// Degree of |τ| in the branch points, from the exponents of each factor.
fn degree(m: Model, w: Which) -> Rational64 {
    let omega = q(-1, 2);
    match (m, w) {
        (Model::Pentagon, Which::Plus) => q(3, 36),
        (Model::Pentagon, Which::Minus) => omega + q(3 * 13, 36),
        (Model::Dehn, Which::Plus) => q(2, 12) + q(1, 36),
        (Model::Dehn, Which::Minus) => omega + q(2, 12) + q(13, 36),
    }
}

#[test]
fn kappa_matches_degree_count() {
    // Branch points of εQ scale as ε^{1/5} (pentagon) and ε (Dehn).
    for (m, a) in [(Model::Pentagon, q(1, 5)), (Model::Dehn, q(1, 1))] {
        for w in [Which::Plus, Which::Minus] {
            assert_eq!(kappa(m, w), degree(m, w) * a, "{m:?} {w:?}");
        }
    }
    assert_eq!(kappa(Model::Pentagon, Which::Plus), q(1, 60));
    assert_eq!(kappa(Model::Pentagon, Which::Minus), q(7, 60));
    assert_eq!(kappa(Model::Dehn, Which::Plus), q(7, 36));
    assert_eq!(kappa(Model::Dehn, Which::Minus), q(1, 36));
}

#[test]
fn measured_homogeneity() {
    for m in [Model::Pentagon, Model::Dehn] {
        let c = seed(m, 2.0).unwrap();
        for w in [Which::Plus, Which::Minus] {
            let h = homogeneity_check(&c, w).unwrap();
            assert!(h.error < 1e-8, "{m:?} {w:?}: {}", h.measured);
        }
    }
}

#[test]
fn pentagon_monodromy_units() {
    let p = continue_loop(&LoopSpec::new(Model::Pentagon, 0.1)).unwrap();
    let plus = track_monodromy(&p, Which::Plus).unwrap();
    let minus = track_monodromy(&p, Which::Minus).unwrap();
    assert_eq!((plus.units, minus.units), (1, 13));
    assert!(plus.residual < 1e-3 && minus.residual < 1e-3);
    assert!(minus.omega1_increment.abs() < 1e-3);
    assert!(eta_deviation(&p).unwrap() < 1e-6);
    let r = p.reversed();
    assert_eq!(track_monodromy(&r, Which::Plus).unwrap().units, -1);
    assert_eq!(track_monodromy(&r, Which::Minus).unwrap().units, -13);
}

#[test]
fn tau_dispatch() {
    let c = seed(Model::Pentagon, 2.0).unwrap();
    let pd = periods(&c).unwrap();
    assert_eq!(tau(&c, &pd, Which::Plus).unwrap(), tau_plus_pentagon(&c).unwrap());
}

#[test]
fn ledger_from_units() {
    let l = ledger([1, 13, 13, 25]);
    assert_eq!(l.hodge.lhs_coefficient("lambda"), q(1, 1));
    assert_eq!(l.hodge.lhs_coefficient("sum_psi"), q(1, 12));
    assert_eq!(l.hodge.rhs_coefficient("W5"), q(1, 144));
    assert_eq!(l.hodge.rhs_coefficient("W11"), q(13, 144));
    assert_eq!(l.prym.rhs_coefficient("W5"), q(13, 144));
    assert_eq!(l.prym.rhs_coefficient("W11"), q(25, 144));
    assert_eq!(l.kappa.lhs_coefficient("kappa_1"), q(12, 1));
    assert_eq!(l.kappa.rhs_coefficient("W5"), q(1, 1));
    assert_eq!(l.kappa.rhs_coefficient("W11"), q(1, 1));
    assert_eq!(l.mumford.rhs_coefficient("W5"), q(0, 1));
    assert_eq!(l.mumford.rhs_coefficient("W11"), q(-1, 1));
    assert!(l.relations().iter().all(|r| l.is_consequence(r)));
}

#[test]
fn ledger_rejects_unrelated_relation() {
    let l = ledger([1, 13, 13, 25]);
    let t = |s: &str, n| Term { symbol: s.into(), coefficient: q(n, 1) };
    let bogus = Relation { lhs: vec![t("lambda", 1)], rhs: vec![t("W5", 1)] };
    assert!(!l.is_consequence(&bogus));
    // Other units change the boundary coefficients.
    let other = ledger([2, 13, 13, 25]);
    assert_ne!(other.kappa.rhs_coefficient("W5"), q(1, 1));
}
