//! Special functions needed by the Mellin-transform machinery: the
//! complementary error function, the complex Gamma function and the upper
//! incomplete Gamma function with complex order.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_ITER: usize = 10_000;

/// `erf(x)` by its Maclaurin series; accurate for small `|x|`.
fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_ITER {
        let nf = T::from_usize_lossy(n);
        term = -term * x2 / nf;
        let contrib = term / (T::lit(2.0) * nf + T::one());
        sum += contrib;
        if contrib.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum * T::lit(2.0) / T::PI().sqrt()
}

/// `erfc(x)` for `x ≥ 0.5` by Lentz evaluation of the Laplace continued fraction.
fn erfc_continued_fraction<T: Real>(x: T) -> T {
    // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    if f == T::zero() {
        f = tiny;
    }
    let mut c = f;
    let mut d = T::zero();
    for k in 1..MAX_ITER {
        let a = T::from_usize_lossy(k) * T::lit(0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x < T::lit(0.5) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    if x.abs() < T::lit(0.5) {
        erf_series(x)
    } else {
        T::one() - erfc(x)
    }
}

fn is_nonpositive_integer<T: Real>(z: Complex<T>) -> bool {
    z.im == T::zero() && z.re <= T::zero() && z.re == z.re.round()
}

/// Complex Gamma function (Lanczos approximation with reflection).
pub fn gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    if is_nonpositive_integer(z) {
        return Complex::new(T::infinity(), T::zero());
    }
    let half = T::lit(0.5);
    if z.re < half {
        let pi = T::PI();
        let s = (z * pi).sin();
        return Complex::new(pi, T::zero()) / (s * gamma(Complex::<T>::one() - z));
    }
    let z = z - T::one();
    let mut acc = Complex::new(T::lit(LANCZOS[0]), T::zero());
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += Complex::new(T::lit(c), T::zero()) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(LANCZOS_G) + half;
    let sqrt_2pi = (T::lit(2.0) * T::PI()).sqrt();
    t.powc(z + half) * (-t).exp() * acc * sqrt_2pi
}

/// `1/Γ(z)`, entire; exactly zero at the non-positive integers.
pub fn recip_gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    if is_nonpositive_integer(z) {
        Complex::zero()
    } else {
        gamma(z).inv()
    }
}

/// Lower incomplete Gamma `γ(a, x)` by the power series, `x > 0`.
fn lower_incomplete_series<T: Real>(a: Complex<T>, x: T) -> Complex<T> {
    let mut term = a.inv();
    let mut sum = term;
    for k in 1..MAX_ITER {
        term = term * x / (a + T::from_usize_lossy(k));
        sum += term;
        if term.norm() <= T::epsilon() * sum.norm() {
            break;
        }
    }
    let xc = Complex::new(x, T::zero());
    xc.powc(a) * (-x).exp() * sum
}

/// Upper incomplete Gamma `Γ(a, x)` by Lentz continued fraction, large `x`.
fn upper_incomplete_cf<T: Real>(a: Complex<T>, x: T) -> Complex<T> {
    let tiny = T::min_positive_value() / T::epsilon();
    let one = Complex::<T>::one();
    let mut b = Complex::new(x + T::one(), T::zero()) - a;
    let mut c = Complex::new(T::one() / tiny, T::zero());
    let mut d = one / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = T::from_usize_lossy(i);
        let an = -(Complex::new(fi, T::zero()) * (Complex::new(fi, T::zero()) - a));
        b += T::lit(2.0);
        d = an * d + b;
        if d.norm() < tiny {
            d = Complex::new(tiny, T::zero());
        }
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex::new(tiny, T::zero());
        }
        d = one / d;
        let delta = d * c;
        h *= delta;
        if (delta - one).norm() <= T::epsilon() {
            break;
        }
    }
    let xc = Complex::new(x, T::zero());
    xc.powc(a) * (-x).exp() * h
}

/// Upper incomplete Gamma function `Γ(a, x) = ∫_x^∞ t^{a−1} e^{−t} dt`, `x > 0`.
pub fn upper_incomplete_gamma<T: Real>(a: Complex<T>, x: T) -> Complex<T> {
    assert!(x > T::zero(), "upper incomplete gamma needs x > 0");
    if x > T::lit(1.5) + a.norm() {
        upper_incomplete_cf(a, x)
    } else if is_nonpositive_integer(a) {
        Complex::new(upper_incomplete_gamma_neg_int(a.re, x), T::zero())
    } else {
        gamma(a) - lower_incomplete_series(a, x)
    }
}

/// Exponential integral `E₁(x) = Γ(0, x)` by its convergent series, moderate `x > 0`.
pub fn exp_integral_e1<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::zero();
    for k in 1..MAX_ITER {
        let kf = T::from_usize_lossy(k);
        term = -term * x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() <= T::epsilon() * sum.abs().max(T::min_positive_value()) {
            break;
        }
    }
    -T::lit(EULER_GAMMA) - x.ln() - sum
}

/// `Γ(−j, x) = ((−1)^j/j!)·[E₁(x) − e^{−x} Σ_{k<j} (−1)^k k!/x^{k+1}]`.
fn upper_incomplete_gamma_neg_int<T: Real>(a: T, x: T) -> T {
    let j = (-a).round().to_usize().unwrap_or(0);
    let mut acc = T::zero();
    let mut fact = T::one();
    for k in 0..j {
        if k > 0 {
            fact *= T::from_usize_lossy(k);
        }
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        acc += sign * fact / x.powi(k as i32 + 1);
    }
    let jfact = (1..=j).fold(T::one(), |f, k| f * T::from_usize_lossy(k));
    let sign = if j.is_multiple_of(2) { T::one() } else { -T::one() };
    sign / jfact * (exp_integral_e1(x) - (-x).exp() * acc)
}
