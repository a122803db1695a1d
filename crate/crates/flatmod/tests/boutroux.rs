use flatmod::boutroux::{
    boutroux_residual, continue_loop, eta24, eta_ratio, lattice_basis, periods, periods_dehn, reduce_lattice, seed, solve, Curve, LoopSpec,
    Model, SolveOptions,
};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

/// Twice ∫_a^b (x−a)^{1/2}(b−x)^{1/2} h(x) dx on a real segment, via x = m + r cos θ
/// and the trapezoid rule on the resulting smooth periodic integrand.
fn segment_oracle(a: f64, b: f64, h: impl Fn(f64) -> f64) -> f64 {
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    let n = 4000;
    let mut s = 0.0;
    for k in 0..n {
        let t = PI * (k as f64 + 0.5) / n as f64;
        s += r * r * t.sin().powi(2) * h(m + r * t.cos());
    }
    2.0 * s * PI / n as f64
}

/// Same substitution for (x−a)^{-1/2}(b−x)^{-1/2} h(x).
fn segment_oracle_inv(a: f64, b: f64, h: impl Fn(f64) -> f64) -> f64 {
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    let n = 4000;
    let mut s = 0.0;
    for k in 0..n {
        let t = PI * (k as f64 + 0.5) / n as f64;
        s += h(m + r * t.cos());
    }
    2.0 * s * PI / n as f64
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn pentagon_periods_on_real_roots() {
    // Branch points 0 (central), −1, 1.
    let c = Curve::pentagon(C::new(0.0, 0.0), C::new(-1.0, 0.0));
    let pd = periods(&c).unwrap();
    let p0 = segment_oracle(-1.0, 0.0, |x| (1.0 - x).sqrt());
    let p1 = segment_oracle(0.0, 1.0, |x| (x + 1.0).sqrt());
    assert!(close(pd.periods[0].norm(), p0, 1e-10), "{} vs {p0}", pd.periods[0]);
    assert!(close(pd.periods[1].norm(), p1, 1e-10));
    assert!(pd.periods[0].im.abs() < 1e-12);
    assert!(pd.periods[1].re.abs() < 1e-12);
    let w0 = segment_oracle_inv(-1.0, 0.0, |x| 1.0 / (1.0 - x).sqrt());
    assert!(close(pd.omega[0].norm(), w0, 1e-10), "{} vs {w0}", pd.omega[0]);
    // Beta-function value of the same integral.
    let beta = 3.625_609_908_221_908 * PI.sqrt() / 1.225_416_702_465_177_6;
    assert!(close(w0, beta, 1e-12));
}

#[test]
fn dehn_straight_edge_on_real_roots() {
    let c = Curve::dehn(C::new(1.0, 0.0), C::new(4.0, 0.0));
    let pd = periods_dehn(&c).unwrap();
    let p0 = segment_oracle(1.0, 4.0, |x| x.powf(-1.5));
    assert!(close(pd.periods[0].norm(), p0, 1e-10), "{} vs {p0}", pd.periods[0]);
    let w0 = segment_oracle_inv(1.0, 4.0, |x| x.powf(-0.5));
    assert!(close(pd.omega[0].norm(), w0, 1e-10));
    // ∫₁⁴ x^{-3/2}√((x−1)(4−x)) dx to 30 digits.
    assert!(close(p0, 2.0 * 1.094_130_016_950_54, 1e-12));
}

#[test]
fn periods_are_homogeneous() {
    for (m, degree) in [(Model::Pentagon, 2.5), (Model::Dehn, 0.5)] {
        let c = seed(m, 2.0).unwrap();
        let pd = periods(&c).unwrap();
        let lambda: f64 = 0.37;
        let ps = periods(&c.scaled(lambda)).unwrap();
        for k in 0..2 {
            let expect = pd.periods[k] * lambda.powf(degree);
            assert!((ps.periods[k] - expect).norm() < 1e-10 * expect.norm());
            let expect = pd.omega[k] * lambda.powf(-0.5);
            assert!((ps.omega[k] - expect).norm() < 1e-10 * expect.norm());
        }
    }
}

#[test]
fn seeds_lie_on_the_boutroux_locus() {
    for m in [Model::Pentagon, Model::Dehn] {
        for scale in [2.0, 0.1, 0.01] {
            let c = seed(m, scale).unwrap();
            let r = boutroux_residual(&c).unwrap();
            let pd = periods(&c).unwrap();
            let size = pd.periods[0].re + pd.periods[1].re;
            assert!(close(size, scale, 1e-10), "{m:?} {scale}: {size}");
            assert!(r[0].abs() < 1e-10 * scale && r[1].abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn solve_respects_scaling() {
    for m in [Model::Pentagon, Model::Dehn] {
        let c = seed(m, 2.0).unwrap();
        let pd = periods(&c).unwrap();
        let t = [pd.periods[0].re, pd.periods[1].re];
        let lambda: f64 = 0.5;
        let perturbed = c.scaled(lambda.powf(m.scaling_exponent()) * 1.01);
        let (s, res) = solve(&perturbed, [t[0] * lambda, t[1] * lambda], SolveOptions::default()).unwrap();
        assert!(res < 1e-11);
        for (a, b) in s.x.iter().zip(c.scaled(lambda.powf(m.scaling_exponent())).x.iter()) {
            assert!((a - b).norm() < 1e-8 * b.norm().max(1e-3), "{m:?}: {a} vs {b}");
        }
    }
}

#[test]
fn eta_identity_at_seeds() {
    for m in [Model::Pentagon, Model::Dehn] {
        let c = seed(m, 2.0).unwrap();
        let pd = periods(&c).unwrap();
        let q = eta_ratio(lattice_basis(&c, &pd), c.cubic_roots()).unwrap();
        assert!((q - 1.0).norm() < 1e-10, "{m:?}: {q}");
    }
}

#[test]
fn eta_at_rho() {
    // η(ρ)²⁴ with ρ = e^{2πi/3}: |η(ρ)| = 3^{1/8} Γ(1/3)^{3/2} / (2π).
    let rho = C::new(-0.5, 3f64.sqrt() / 2.0);
    let gamma_third = 2.678_938_534_707_747_6_f64;
    let m = 3f64.powf(0.125) * gamma_third.powf(1.5) / (2.0 * PI);
    let v = eta24(rho);
    assert!((v.norm() - m.powi(24)).abs() < 1e-12 * m.powi(24));
    // η(τ)²⁴ is invariant under τ → τ + 1 and τ → −1/τ up to τ¹².
    let t = C::new(0.2, 1.3);
    assert!((eta24(t + 1.0) - eta24(t)).norm() < 1e-12 * eta24(t).norm());
    let s = eta24(-1.0 / t);
    assert!((s - eta24(t) * t.powi(12)).norm() < 1e-10 * s.norm());
}

#[test]
fn lattice_reduction_lands_in_fundamental_domain() {
    let (w1, w2) = reduce_lattice(C::new(1.0, 0.0), C::new(7.3, 0.2)).unwrap();
    let t = w2 / w1;
    assert!(t.im > 0.0 && t.re.abs() <= 0.5 + 1e-12 && t.norm() >= 1.0 - 1e-12);
    assert!(reduce_lattice(C::new(1.0, 0.0), C::new(2.0, 0.0)).is_err());
}

#[test]
fn pentagon_loop_at_small_scale() {
    let p = continue_loop(&LoopSpec::new(Model::Pentagon, 0.1)).unwrap();
    assert_eq!(p.walls, Model::Pentagon.expected_walls());
    assert!(p.closure_error < 1e-9);
    assert!(p.max_residual < 1e-9);
    let r = p.reversed();
    assert_eq!(r.orientation, -p.orientation);
    assert_eq!(r.samples().count(), p.samples().count());
}
