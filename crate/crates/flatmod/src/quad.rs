//! Adaptive Gauss–Kronrod (7/15) quadrature for small vectors of complex integrands.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("quadrature did not converge: error {error:e} after {intervals} intervals")]
pub struct QuadError {
    pub error: f64,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

pub const MAX_COMPONENTS: usize = 6;
pub type Values = [Complex64; MAX_COMPONENTS];

fn rule(f: &mut impl FnMut(f64) -> Values, a: f64, b: f64, n: usize) -> (Values, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);
    let mut k = [zero; MAX_COMPONENTS];
    let mut g = [zero; MAX_COMPONENTS];
    let fc = f(c);
    for i in 0..n {
        k[i] = fc[i] * WGK[7];
        g[i] = fc[i] * WG[3];
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for i in 0..n {
            let s = f1[i] + f2[i];
            k[i] += s * WGK[j];
            if j % 2 == 1 {
                g[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..n {
        k[i] *= h;
        err = err.max((k[i] - g[i] * h).norm());
    }
    (k, err)
}

/// Integrate the first `n` components of `f` over `[a, b]` to the given
/// absolute tolerance.
pub fn integrate(mut f: impl FnMut(f64) -> Values, a: f64, b: f64, n: usize, tol: f64) -> Result<Values, QuadError> {
    const MAX_INTERVALS: usize = 4000;
    let zero = Complex64::new(0.0, 0.0);
    let mut total = [zero; MAX_COMPONENTS];
    let mut stack = vec![(a, b)];
    let mut intervals = 0;
    let width = b - a;
    while let Some((lo, hi)) = stack.pop() {
        intervals += 1;
        let (v, err) = rule(&mut f, lo, hi, n);
        let local = tol * (hi - lo) / width;
        if err <= local || (hi - lo) < 1e-14 * width {
            for i in 0..n {
                total[i] += v[i];
            }
        } else if intervals > MAX_INTERVALS {
            return Err(QuadError { error: err, intervals });
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi));
            stack.push((lo, mid));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_endpoint_singularity() {
        let v = integrate(
            |x| {
                let mut o = [Complex64::new(0.0, 0.0); MAX_COMPONENTS];
                o[0] = Complex64::new(x.powi(5), 0.0);
                o[1] = Complex64::new(0.0, x.sqrt());
                o
            },
            0.0,
            1.0,
            2,
            1e-12,
        )
        .unwrap();
        assert!((v[0].re - 1.0 / 6.0).abs() < 1e-14);
        assert!((v[1].im - 2.0 / 3.0).abs() < 1e-11);
    }
}
