//! Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.

use crate::error::{Error, Result};

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over `[lo, hi]` to absolute error `abs_tol`, bisecting the
/// interval with the largest error estimate first.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, abs_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 10_000;
    let (value, error) = kronrod(&f, lo, hi);
    let mut pieces = vec![(lo, hi, value, error)];
    loop {
        let total_error: f64 = pieces.iter().map(|p| p.3).sum();
        if total_error <= abs_tol {
            return Ok(pieces.iter().map(|p| p.2).sum());
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence { what: "adaptive quadrature", iterations: pieces.len() });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (a, b, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (a + b);
        for (x, y) in [(a, mid), (mid, b)] {
            let (v, e) = kronrod(&f, x, y);
            pieces.push((x, y, v, e));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        // integral of 1 / (eps + x^2) over [-1, 1]
        let eps: f64 = 1e-6;
        let exact = 2.0 * (1.0 / eps.sqrt()).atan() / eps.sqrt();
        let v = integrate(|x| 1.0 / (eps + x * x), -1.0, 1.0, 1e-8).unwrap();
        assert!((v - exact).abs() < 1e-7 * exact.max(1.0));
    }
}
