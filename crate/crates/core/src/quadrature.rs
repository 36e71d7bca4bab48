//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: Complex<T>,
    /// Sum of the Kronrod–Gauss differences over accepted panels.
    pub error: T,
    pub evaluations: usize,
}

fn kronrod_panel<T: Real, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T) -> (Complex<T>, T) {
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let fc = f(c);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let pair = f(c - dx) + f(c + dx);
        kron += pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += pair * T::lit(WG[j / 2]);
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Integrates `f` over `[a, b]` until the estimated error falls below
/// `max(abs_tol, rel_tol·|I|)` or `max_panels` is reached.
pub fn integrate<T: Real, F: Fn(T) -> Complex<T>>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> Quadrature<T> {
    if a == b {
        return Quadrature {
            value: Complex::zero(),
            error: T::zero(),
            evaluations: 0,
        };
    }
    let (v0, e0) = kronrod_panel(&f, a, b);
    let mut panels = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let total: Complex<T> = panels.iter().fold(Complex::zero(), |acc, p| acc + p.2);
        let err: T = panels.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target || panels.len() >= max_panels {
            return Quadrature {
                value: total,
                error: err,
                evaluations,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = (pa + pb) * T::lit(0.5);
        let (vl, el) = kronrod_panel(&f, pa, mid);
        let (vr, er) = kronrod_panel(&f, mid, pb);
        evaluations += 30;
        panels.push((pa, mid, vl, el));
        panels.push((mid, pb, vr, er));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let q = integrate(|x: f64| Complex::new(x.powi(5) - 3.0 * x, 0.0), 0.0, 2.0, 1e-14, 1e-14, 50);
        assert!((q.value.re - (64.0 / 6.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn integrates_sqrt_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2, endpoint singularity forces bisection.
        let q = integrate(|x: f64| Complex::new(x.powf(-0.5), 0.0), 0.0, 1.0, 1e-10, 1e-12, 2000);
        assert!((q.value.re - 2.0).abs() < 1e-7, "{}", q.value);
    }

    #[test]
    fn complex_oscillatory() {
        // ∫₀^π e^{ix} dx = 2i
        let q = integrate(|x: f64| Complex::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-14, 1e-14, 100);
        assert!((q.value - Complex::new(0.0, 2.0)).norm() < 1e-13);
    }
}
